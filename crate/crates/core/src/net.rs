//! Minimal dense feedforward network with exact analytic backward passes.
//!
//! The feature extractor is a stack of dense and relu layers; the classifier
//! head is a single affine map `z_k = Σ_d W[d,k]·f[d] + b[k]`. One parameter
//! set serves both siamese branches: forward and backward are pure functions
//! over `&ModelParams`, so weight sharing holds by construction.
//!
//! Floating-point kernels are written in one canonical order and must stay
//! that way: affine outputs accumulate as `acc = bias; acc += x[i]·w[i][o]`
//! with `i` ascending. Reproducibility tests compare against scalar
//! re-implementations of exactly these loops.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// One layer of the feature extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSpec {
    Dense { in_dim: usize, out_dim: usize },
    Relu { dim: usize },
}

impl LayerSpec {
    pub fn in_dim(&self) -> usize {
        match *self {
            LayerSpec::Dense { in_dim, .. } => in_dim,
            LayerSpec::Relu { dim } => dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match *self {
            LayerSpec::Dense { out_dim, .. } => out_dim,
            LayerSpec::Relu { dim } => dim,
        }
    }
}

/// Checks a layer stack: positive dims, chained in/out dims, final layer
/// dense. Returns `(input_dim, embed_dim)`.
pub fn validate_layers(layers: &[LayerSpec]) -> Result<(usize, usize)> {
    if layers.is_empty() {
        return Err(Error::Config("layer list is empty".into()));
    }
    for (idx, layer) in layers.iter().enumerate() {
        if layer.in_dim() == 0 || layer.out_dim() == 0 {
            return Err(Error::Config(format!("layer {idx} has a zero dimension")));
        }
        if idx > 0 && layers[idx - 1].out_dim() != layer.in_dim() {
            return Err(Error::Config(format!(
                "layer {idx} expects {} inputs but layer {} produces {}",
                layer.in_dim(),
                idx - 1,
                layers[idx - 1].out_dim()
            )));
        }
    }
    let last = layers[layers.len() - 1];
    if !matches!(last, LayerSpec::Dense { .. }) {
        return Err(Error::Config(
            "final extractor layer must be dense (it produces the embedding)".into(),
        ));
    }
    Ok((layers[0].in_dim(), last.out_dim()))
}

/// Weights and bias of one dense layer; also used as the gradient record of
/// the same shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    /// Row-major `[in_dim, out_dim]`.
    pub weights: Tensor,
    /// `[out_dim]`.
    pub bias: Tensor,
}

/// All learnable parameters: dense extractor layers plus the classifier head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    layers: Vec<LayerSpec>,
    extractor: Vec<DenseParams>,
    classifier_w: Tensor,
    classifier_b: Tensor,
}

impl ModelParams {
    /// Initializes parameters from the run's seeded generator.
    ///
    /// Weights are uniform in `[−s, s]` with `s = sqrt(6/(in+out))`, biases
    /// zero. Draw order is fixed: extractor dense weights in layer order,
    /// then the classifier weights.
    pub fn init<R: Rng + ?Sized>(
        layers: &[LayerSpec],
        n_classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let (_, embed) = validate_layers(layers)?;
        if n_classes == 0 {
            return Err(Error::Config("n_classes must be positive".into()));
        }
        let mut extractor = Vec::new();
        for layer in layers {
            if let LayerSpec::Dense { in_dim, out_dim } = *layer {
                extractor.push(DenseParams {
                    weights: init_weights(in_dim, out_dim, rng),
                    bias: Tensor::zeros(vec![out_dim]),
                });
            }
        }
        let classifier_w = init_weights(embed, n_classes, rng);
        let classifier_b = Tensor::zeros(vec![n_classes]);
        Ok(Self {
            layers: layers.to_vec(),
            extractor,
            classifier_w,
            classifier_b,
        })
    }

    /// Rebuilds a parameter set from raw parts, re-checking every invariant.
    pub fn from_parts(
        layers: Vec<LayerSpec>,
        extractor: Vec<DenseParams>,
        classifier_w: Tensor,
        classifier_b: Tensor,
    ) -> Result<Self> {
        let params = Self {
            layers,
            extractor,
            classifier_w,
            classifier_b,
        };
        params.validate()?;
        Ok(params)
    }

    /// Re-checks shape consistency across the layer list and both heads.
    pub fn validate(&self) -> Result<()> {
        let (_, embed) = validate_layers(&self.layers)?;
        let dense_count = self
            .layers
            .iter()
            .filter(|l| matches!(l, LayerSpec::Dense { .. }))
            .count();
        if self.extractor.len() != dense_count {
            return Err(Error::Consistency(format!(
                "{} dense layers in spec but {} parameter records",
                dense_count,
                self.extractor.len()
            )));
        }
        let mut dense_idx = 0;
        for (idx, layer) in self.layers.iter().enumerate() {
            if let LayerSpec::Dense { in_dim, out_dim } = *layer {
                let p = &self.extractor[dense_idx];
                if p.weights.shape() != [in_dim, out_dim] || p.bias.shape() != [out_dim] {
                    return Err(Error::Consistency(format!(
                        "layer {idx} (dense {in_dim}x{out_dim}) has tensors {:?} / {:?}",
                        p.weights.shape(),
                        p.bias.shape()
                    )));
                }
                dense_idx += 1;
            }
        }
        let n_classes = self.classifier_b.len();
        if n_classes == 0 || self.classifier_w.shape() != [embed, n_classes] {
            return Err(Error::Consistency(format!(
                "classifier tensors {:?} / {:?} incompatible with embed_dim {embed}",
                self.classifier_w.shape(),
                self.classifier_b.shape()
            )));
        }
        Ok(())
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn extractor(&self) -> &[DenseParams] {
        &self.extractor
    }

    pub fn classifier_w(&self) -> &Tensor {
        &self.classifier_w
    }

    pub fn classifier_b(&self) -> &Tensor {
        &self.classifier_b
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn embed_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn n_classes(&self) -> usize {
        self.classifier_b.len()
    }

    /// All parameter tensors in canonical order: each extractor layer's
    /// weights then bias, then classifier weights, then classifier bias.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::with_capacity(2 * self.extractor.len() + 2);
        for p in &self.extractor {
            out.push(&p.weights);
            out.push(&p.bias);
        }
        out.push(&self.classifier_w);
        out.push(&self.classifier_b);
        out
    }

    /// Mutable view in the same canonical order as [`Self::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::with_capacity(2 * self.extractor.len() + 2);
        for p in &mut self.extractor {
            out.push(&mut p.weights);
            out.push(&mut p.bias);
        }
        out.push(&mut self.classifier_w);
        out.push(&mut self.classifier_b);
        out
    }
}

fn init_weights<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Tensor {
    let s = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let data: Vec<f64> = (0..in_dim * out_dim)
        .map(|_| rng.random_range(-s..=s))
        .collect();
    Tensor::new(vec![in_dim, out_dim], data).expect("init shape is consistent")
}

/// Gradients for every tensor in a [`ModelParams`], same shapes and order.
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub extractor: Vec<DenseParams>,
    pub classifier_w: Tensor,
    pub classifier_b: Tensor,
}

impl ParamGrads {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            extractor: params
                .extractor
                .iter()
                .map(|p| DenseParams {
                    weights: Tensor::zeros(p.weights.shape().to_vec()),
                    bias: Tensor::zeros(p.bias.shape().to_vec()),
                })
                .collect(),
            classifier_w: Tensor::zeros(params.classifier_w.shape().to_vec()),
            classifier_b: Tensor::zeros(params.classifier_b.shape().to_vec()),
        }
    }

    /// Tensors in the canonical order of [`ModelParams::tensors`].
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::with_capacity(2 * self.extractor.len() + 2);
        for p in &self.extractor {
            out.push(&p.weights);
            out.push(&p.bias);
        }
        out.push(&self.classifier_w);
        out.push(&self.classifier_b);
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::with_capacity(2 * self.extractor.len() + 2);
        for p in &mut self.extractor {
            out.push(&mut p.weights);
            out.push(&mut p.bias);
        }
        out.push(&mut self.classifier_w);
        out.push(&mut self.classifier_b);
        out
    }

    /// Element-wise `self += other`. Shapes must match.
    pub fn add_assign(&mut self, other: &ParamGrads) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            debug_assert_eq!(dst.shape(), src.shape());
            for (d, s) in dst.data_mut().iter_mut().zip(src.data()) {
                *d += s;
            }
        }
    }

    /// Element-wise multiply by a scalar.
    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }
}

/// Per-layer activations retained for the backward pass.
///
/// `outputs[k]` is the output of layer `k`; a relu layer's pre-activation is
/// its input, i.e. the previous entry (or the network input for `k = 0`).
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: Tensor,
    outputs: Vec<Tensor>,
}

impl ForwardTrace {
    pub fn input(&self) -> &Tensor {
        &self.input
    }

    pub fn outputs(&self) -> &[Tensor] {
        &self.outputs
    }

    fn check_against(&self, params: &ModelParams) -> Result<()> {
        if self.outputs.len() != params.layers.len() {
            return Err(Error::Consistency(format!(
                "trace has {} layer outputs, model has {} layers",
                self.outputs.len(),
                params.layers.len()
            )));
        }
        if self.input.len() != params.in_dim() {
            return Err(Error::Consistency(format!(
                "trace input length {} does not match model input {}",
                self.input.len(),
                params.in_dim()
            )));
        }
        for (idx, (out, layer)) in self.outputs.iter().zip(&params.layers).enumerate() {
            if out.len() != layer.out_dim() {
                return Err(Error::Consistency(format!(
                    "trace output {idx} has length {}, layer produces {}",
                    out.len(),
                    layer.out_dim()
                )));
            }
        }
        Ok(())
    }
}

fn dense_forward(p: &DenseParams, x: &[f64]) -> Vec<f64> {
    let in_dim = p.weights.shape()[0];
    let out_dim = p.weights.shape()[1];
    let mut y = vec![0.0; out_dim];
    for (o, yo) in y.iter_mut().enumerate() {
        let mut acc = p.bias.data()[o];
        for (i, &xi) in x.iter().enumerate().take(in_dim) {
            acc += xi * p.weights.at2(i, o);
        }
        *yo = acc;
    }
    y
}

/// Runs the feature extractor: `f = C(x, θc)`.
///
/// Returns the embedding and the trace needed by [`backward`].
pub fn forward_features(params: &ModelParams, x: &Tensor) -> Result<(Tensor, ForwardTrace)> {
    if x.len() != params.in_dim() {
        return Err(Error::Dimension(format!(
            "layer 0 ({}) expects input of length {}, got {}",
            describe_layer(&params.layers[0]),
            params.in_dim(),
            x.len()
        )));
    }
    let mut outputs = Vec::with_capacity(params.layers.len());
    let mut current: Vec<f64> = x.data().to_vec();
    let mut dense_idx = 0;
    for layer in &params.layers {
        current = match layer {
            LayerSpec::Dense { .. } => {
                let y = dense_forward(&params.extractor[dense_idx], &current);
                dense_idx += 1;
                y
            }
            LayerSpec::Relu { .. } => current.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect(),
        };
        outputs.push(Tensor::from_vec(current.clone()));
    }
    let f = outputs.last().expect("layer list is non-empty").clone();
    Ok((
        f,
        ForwardTrace {
            input: x.clone(),
            outputs,
        },
    ))
}

/// Classifier head: `z_k = Σ_d W[d,k]·f[d] + b[k]`.
pub fn forward_logits(params: &ModelParams, f: &Tensor) -> Result<Tensor> {
    let embed = params.embed_dim();
    if f.len() != embed {
        return Err(Error::Dimension(format!(
            "classifier expects embedding of length {embed}, got {}",
            f.len()
        )));
    }
    let n_classes = params.n_classes();
    let mut z = vec![0.0; n_classes];
    for (k, zk) in z.iter_mut().enumerate() {
        let mut acc = params.classifier_b.data()[k];
        for d in 0..embed {
            acc += f.data()[d] * params.classifier_w.at2(d, k);
        }
        *zk = acc;
    }
    Ok(Tensor::from_vec(z))
}

/// Backpropagates `dL/df` through the extractor.
///
/// Returns the gradients for every extractor tensor (the classifier entries
/// of the result are zero; they are produced by the loss layer) together
/// with the gradient w.r.t. the network input. The relu backward uses
/// subgradient 0 at exactly 0.
pub fn backward(
    params: &ModelParams,
    trace: &ForwardTrace,
    d_features: &Tensor,
) -> Result<(ParamGrads, Tensor)> {
    trace.check_against(params)?;
    if d_features.len() != params.embed_dim() {
        return Err(Error::Dimension(format!(
            "upstream gradient of length {}, embedding has {}",
            d_features.len(),
            params.embed_dim()
        )));
    }

    let mut grads = ParamGrads::zeros_like(params);
    let mut g: Vec<f64> = d_features.data().to_vec();
    let mut dense_idx = params.extractor.len();
    for (idx, layer) in params.layers.iter().enumerate().rev() {
        let layer_input: &[f64] = if idx == 0 {
            trace.input.data()
        } else {
            trace.outputs[idx - 1].data()
        };
        match layer {
            LayerSpec::Relu { .. } => {
                for (gv, &xv) in g.iter_mut().zip(layer_input) {
                    if xv <= 0.0 {
                        *gv = 0.0;
                    }
                }
            }
            LayerSpec::Dense { in_dim, out_dim } => {
                dense_idx -= 1;
                let p = &params.extractor[dense_idx];
                let gl = &mut grads.extractor[dense_idx];
                for o in 0..*out_dim {
                    gl.bias.data_mut()[o] = g[o];
                    for i in 0..*in_dim {
                        gl.weights.set2(i, o, layer_input[i] * g[o]);
                    }
                }
                let mut g_prev = vec![0.0; *in_dim];
                for (i, gp) in g_prev.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (o, &go) in g.iter().enumerate().take(*out_dim) {
                        acc += p.weights.at2(i, o) * go;
                    }
                    *gp = acc;
                }
                g = g_prev;
            }
        }
    }
    Ok((grads, Tensor::from_vec(g)))
}

fn describe_layer(layer: &LayerSpec) -> String {
    match *layer {
        LayerSpec::Dense { in_dim, out_dim } => format!("dense {in_dim}x{out_dim}"),
        LayerSpec::Relu { dim } => format!("relu {dim}"),
    }
}
