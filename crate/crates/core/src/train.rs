//! SGD training loop over pair batches.
//!
//! Each step draws a balanced pair batch, runs both branches through the one
//! shared parameter set, averages the per-pair gradients of the joint
//! objective, and applies a plain SGD update. Everything is sequential and
//! summation order is fixed, so a run is bit-reproducible from its seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::eval;
use crate::losses::{self, Margin};
use crate::net::{self, LayerSpec, ModelParams, ParamGrads};
use crate::pairing;

/// Hyperparameters of one training run.
///
/// `layers` may be left empty to use the default extractor, a single
/// `dense(D, embed_dim)` layer where `D` is the dataset's feature width.
/// The minimal linear extractor is enough for the synthetic datasets and,
/// being capacity-limited, exhibits the λ tradeoff: at large λ the margin
/// hinge caps inter-class distances while the intra-class pull keeps
/// compressing, which costs accuracy. Deeper `dense`/`relu` stacks are
/// configured explicitly; a non-empty stack must end in a dense layer whose
/// output width equals `embed_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Contrastive weight λ.
    pub lambda: f64,
    /// Contrastive margin m.
    pub margin: f64,
    /// SGD learning rate η. Zero is accepted and makes training a no-op.
    pub learning_rate: f64,
    pub epochs: usize,
    /// Pairs per batch.
    pub batch_size: usize,
    pub seed: u64,
    pub layers: Vec<LayerSpec>,
    pub embed_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            margin: 1.0,
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            layers: Vec::new(),
            embed_dim: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if !self.margin.is_finite() || self.margin <= 0.0 {
            return Err(Error::Config(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "lr must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.embed_dim == 0 {
            return Err(Error::Config("embed_dim must be positive".into()));
        }
        if !self.layers.is_empty() {
            let (_, embed) = net::validate_layers(&self.layers)?;
            if embed != self.embed_dim {
                return Err(Error::Config(format!(
                    "layer stack produces embedding width {embed}, embed_dim is {}",
                    self.embed_dim
                )));
            }
        }
        Ok(())
    }

    /// Reads a key-value config file (`key = value` lines, `#` comments).
    ///
    /// Keys: `lambda`, `margin`, `lr`, `epochs`, `batch_size`, `seed`,
    /// `embed_dim`, `layers`. Unset keys keep their defaults.
    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Parse {
                line: line_no,
                msg: format!("bad {what} '{value}'"),
            };
            match key {
                "lambda" => cfg.lambda = value.parse().map_err(|_| bad("number"))?,
                "margin" => cfg.margin = value.parse().map_err(|_| bad("number"))?,
                "lr" => cfg.learning_rate = value.parse().map_err(|_| bad("number"))?,
                "epochs" => cfg.epochs = value.parse().map_err(|_| bad("integer"))?,
                "batch_size" => cfg.batch_size = value.parse().map_err(|_| bad("integer"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
                "embed_dim" => cfg.embed_dim = value.parse().map_err(|_| bad("integer"))?,
                "layers" => {
                    cfg.layers = parse_layers(value).map_err(|e| Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown key '{other}'"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_layers(&self, input_dim: usize) -> Result<Vec<LayerSpec>> {
        if self.layers.is_empty() {
            return Ok(vec![LayerSpec::Dense {
                in_dim: input_dim,
                out_dim: self.embed_dim,
            }]);
        }
        if self.layers[0].in_dim() != input_dim {
            return Err(Error::Config(format!(
                "layer stack expects input width {}, dataset has {input_dim}",
                self.layers[0].in_dim()
            )));
        }
        Ok(self.layers.clone())
    }
}

/// Parses a layer stack like `dense(16,32) relu dense(32,16)`.
///
/// `relu` may carry an explicit width (`relu(32)`) or inherit the previous
/// layer's output width.
pub fn parse_layers(text: &str) -> Result<Vec<LayerSpec>> {
    let mut layers = Vec::new();
    for token in text.split_whitespace() {
        if token == "relu" {
            let dim = layers
                .last()
                .map(LayerSpec::out_dim)
                .ok_or_else(|| Error::Config("bare 'relu' cannot start a stack".into()))?;
            layers.push(LayerSpec::Relu { dim });
        } else if let Some(args) = token.strip_prefix("relu(").and_then(|s| s.strip_suffix(')')) {
            let dim = args
                .parse()
                .map_err(|_| Error::Config(format!("bad relu width '{args}'")))?;
            layers.push(LayerSpec::Relu { dim });
        } else if let Some(args) = token.strip_prefix("dense(").and_then(|s| s.strip_suffix(')')) {
            let (a, b) = args
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("dense needs 'in,out', got '{args}'")))?;
            let in_dim = a
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad dense input width '{a}'")))?;
            let out_dim = b
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad dense output width '{b}'")))?;
            layers.push(LayerSpec::Dense { in_dim, out_dim });
        } else {
            return Err(Error::Config(format!("unknown layer token '{token}'")));
        }
    }
    Ok(layers)
}

/// One completed epoch: means are over every pair processed in the epoch,
/// so `mean_total = mean_cls + λ·mean_contrastive`; accuracy is measured on
/// the training set after the epoch's updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_total: f64,
    pub mean_cls: f64,
    pub mean_contrastive: f64,
    pub train_accuracy: f64,
}

/// Per-epoch training history.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,total,cls,contrastive,acc\n");
        for r in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.epoch, r.mean_total, r.mean_cls, r.mean_contrastive, r.train_accuracy
            ));
        }
        out
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(self.to_csv().as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

/// One SGD update: every parameter becomes `p − η·g`, element-wise.
pub fn sgd_step(params: &mut ModelParams, grads: &ParamGrads, eta: f64) -> Result<()> {
    let grad_tensors = grads.tensors();
    let mut param_tensors = params.tensors_mut();
    if param_tensors.len() != grad_tensors.len() {
        return Err(Error::Dimension(format!(
            "{} gradient tensors for {} parameter tensors",
            grad_tensors.len(),
            param_tensors.len()
        )));
    }
    for (p, g) in param_tensors.iter_mut().zip(&grad_tensors) {
        if p.shape() != g.shape() {
            return Err(Error::Dimension(format!(
                "gradient shape {:?} does not match parameter shape {:?}",
                g.shape(),
                p.shape()
            )));
        }
        for (pv, gv) in p.data_mut().iter_mut().zip(g.data()) {
            *pv -= eta * gv;
        }
    }
    Ok(())
}

/// Trains on a normalized dataset. Returns the final parameters and the full
/// epoch log. Bit-reproducible given `cfg.seed`.
///
/// Runs `epochs × ⌈|ds| / (2·batch_size)⌉` steps. Aborts with
/// [`Error::Diverged`] the first time a pair loss is non-finite.
pub fn train(ds: &LabeledDataset, cfg: &TrainConfig) -> Result<(ModelParams, TrainLog)> {
    cfg.validate()?;
    pairing::validate_for_pairing(ds)?;
    let layers = cfg.resolve_layers(ds.feature_dim())?;
    let margin = Margin::new(cfg.margin)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ModelParams::init(&layers, ds.n_classes(), &mut rng)?;

    let steps_per_epoch = ds.len().div_ceil(2 * cfg.batch_size);
    let mut log = TrainLog::default();
    let mut global_step = 0usize;

    for epoch in 1..=cfg.epochs {
        let mut sum_total = 0.0;
        let mut sum_cls = 0.0;
        let mut sum_v = 0.0;
        let mut n_pairs = 0usize;

        for _ in 0..steps_per_epoch {
            global_step += 1;
            let batch = pairing::sample_pairs(ds, cfg.batch_size, &mut rng)?;
            let mut grads = ParamGrads::zeros_like(&params);

            for pair in &batch.pairs {
                let sample_a = &ds.samples()[pair.idx_a];
                let sample_b = &ds.samples()[pair.idx_b];
                let (f_i, trace_i) = net::forward_features(&params, &sample_a.features)?;
                let (f_j, trace_j) = net::forward_features(&params, &sample_b.features)?;
                let z_i = net::forward_logits(&params, &f_i)?;
                let z_j = net::forward_logits(&params, &f_j)?;
                // A non-finite forward pass means the loss diverged too.
                if !(f_i.all_finite()
                    && f_j.all_finite()
                    && z_i.all_finite()
                    && z_j.all_finite())
                {
                    return Err(Error::Diverged { step: global_step });
                }

                let bd = losses::joint_loss(
                    &z_i,
                    sample_a.label,
                    &z_j,
                    sample_b.label,
                    &f_i,
                    &f_j,
                    cfg.lambda,
                    margin,
                )?;
                if !bd.total.is_finite() {
                    return Err(Error::Diverged { step: global_step });
                }
                sum_total += bd.total;
                sum_cls += bd.loss_i + bd.loss_j;
                sum_v += bd.contrastive;
                n_pairs += 1;

                let jg = losses::joint_feature_grad(
                    &z_i,
                    sample_a.label,
                    &z_j,
                    sample_b.label,
                    &f_i,
                    &f_j,
                    cfg.lambda,
                    margin,
                    params.classifier_w(),
                )?;
                let (g_i, _) = net::backward(&params, &trace_i, &jg.d_feat_i)?;
                grads.add_assign(&g_i);
                let (g_j, _) = net::backward(&params, &trace_j, &jg.d_feat_j)?;
                grads.add_assign(&g_j);
                for (dst, src) in grads
                    .classifier_w
                    .data_mut()
                    .iter_mut()
                    .zip(jg.d_classifier_w.data())
                {
                    *dst += src;
                }
                for (dst, src) in grads
                    .classifier_b
                    .data_mut()
                    .iter_mut()
                    .zip(jg.d_classifier_b.data())
                {
                    *dst += src;
                }
            }

            grads.scale(1.0 / batch.pairs.len() as f64);
            sgd_step(&mut params, &grads, cfg.learning_rate)?;
        }

        let denom = n_pairs as f64;
        log.epochs.push(EpochRecord {
            epoch,
            mean_total: sum_total / denom,
            mean_cls: sum_cls / denom,
            mean_contrastive: sum_v / denom,
            train_accuracy: eval::accuracy(&params, ds)?,
        });
    }

    Ok((params, log))
}
