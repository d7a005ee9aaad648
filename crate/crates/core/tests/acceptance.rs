//! Acceptance suite.
//!
//! One test per criterion; each prints a `criterion N ... PASS` line with
//! the measured numbers (visible with `--nocapture`). Thresholds are pinned
//! here, not tuned at runtime:
//!
//! 1. gradient fidelity: seeds 0–9, relative error < 1e-5, under 10 s
//! 2. closed-form loss values at 1e-12
//! 3. scalar-loop oracle equivalence at 1e-10 on 100 random inputs
//! 4. separability(λ=1) > separability(λ=0) per seed 1–5, accuracy within
//!    0.02, under 60 s, measured values pinned as regression fixtures
//! 5. λ-sweep: median accuracy at λ=100 below the best moderate-λ median,
//!    under 5 min
//! 6. pair symmetry, λ=0 ≡ classification-only reference, η=0 no-op
//! 7. byte-identical CLI reruns

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pairembed::data::{self, LabeledDataset, SyntheticMode, SyntheticSpec};
use pairembed::eval;
use pairembed::gradcheck;
use pairembed::losses::{self, Margin};
use pairembed::net::{self, LayerSpec, ModelParams};
use pairembed::pairing;
use pairembed::train::{self, TrainConfig};
use pairembed::Tensor;

const ACCEPTANCE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn acceptance_spec() -> SyntheticSpec {
    SyntheticSpec {
        mode: SyntheticMode::Blobs { dim: 16 },
        n_classes: 8,
        per_class: 100,
        spread: 0.5,
        separation: 4.0,
        seed: 42,
    }
}

/// Raw 80/20 split of the acceptance dataset.
fn acceptance_split() -> (LabeledDataset, LabeledDataset) {
    let ds = data::gen_synthetic(&acceptance_spec()).unwrap();
    data::stratified_split(&ds, 0.8).unwrap()
}

fn normalized_split() -> (LabeledDataset, LabeledDataset) {
    let (mut train_ds, mut test_ds) = acceptance_split();
    data::normalize_mean(&mut train_ds, &mut [&mut test_ds]).unwrap();
    (train_ds, test_ds)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

#[test]
fn criterion_1_gradient_fidelity() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for seed in 0..10u64 {
        let report = gradcheck::check_joint_objective(seed, 1e-5).unwrap();
        assert!(
            report.max_rel_err < 1e-5,
            "seed {seed}: max relative error {}",
            report.max_rel_err
        );
        worst = worst.max(report.max_rel_err);
        checked += report.n_checked;
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "gradient fidelity took {elapsed:?}"
    );
    println!(
        "criterion 1 (gradient fidelity): PASS — {checked} derivatives over 10 seeds, \
         worst relative error {worst:.3e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_closed_form_loss_values() {
    let m1 = Margin::new(1.0).unwrap();
    let z = Tensor::from_vec(vec![0.0, 0.0]);
    let ce = losses::cross_entropy(&z, 0).unwrap();
    assert!((ce - 2.0_f64.ln()).abs() < 1e-12, "ce([0,0],0) = {ce}");

    let f = Tensor::from_vec(vec![0.3, -0.9, 2.0]);
    let same = losses::contrastive(&f, &f, true, m1).unwrap();
    assert!(same.abs() < 1e-12);
    let diff = losses::contrastive(&f, &f, false, m1).unwrap();
    assert!((diff - 0.5).abs() < 1e-12);

    let a = Tensor::from_vec(vec![3.0, 4.0]);
    let b = Tensor::from_vec(vec![0.0, 0.0]);
    let v = losses::contrastive(&a, &b, true, m1).unwrap();
    assert!((v - 12.5).abs() < 1e-12);

    println!(
        "criterion 2 (closed-form values): PASS — ln2 = {ce}, V(f,f,same) = {same}, \
         V(f,f,diff) = {diff}, V([3,4],[0,0],same) = {v}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: an independent scalar-loop reimplementation of the forward
// pass and all three losses. Written against the formulas directly; no max
// subtraction, no shared helpers.
// ---------------------------------------------------------------------------

fn naive_forward(params: &ModelParams, x: &[f64]) -> Vec<f64> {
    let mut cur = x.to_vec();
    let mut dense_idx = 0;
    for layer in params.layers() {
        match *layer {
            LayerSpec::Dense { in_dim, out_dim } => {
                let w = params.extractor()[dense_idx].weights.data();
                let b = params.extractor()[dense_idx].bias.data();
                let mut next = vec![0.0; out_dim];
                for (o, slot) in next.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..in_dim {
                        acc += cur[i] * w[i * out_dim + o];
                    }
                    *slot = acc + b[o];
                }
                cur = next;
                dense_idx += 1;
            }
            LayerSpec::Relu { .. } => {
                for v in &mut cur {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
        }
    }
    cur
}

fn naive_logits(params: &ModelParams, f: &[f64]) -> Vec<f64> {
    let n = params.n_classes();
    let w = params.classifier_w().data();
    let b = params.classifier_b().data();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for (d, &fd) in f.iter().enumerate() {
                acc += fd * w[d * n + k];
            }
            acc + b[k]
        })
        .collect()
}

fn naive_softmax(z: &[f64]) -> Vec<f64> {
    let total: f64 = z.iter().map(|&v| v.exp()).sum();
    z.iter().map(|&v| v.exp() / total).collect()
}

fn naive_cross_entropy(z: &[f64], c: usize) -> f64 {
    -naive_softmax(z)[c].ln()
}

fn naive_contrastive(f_i: &[f64], f_j: &[f64], same: bool, m: f64) -> f64 {
    let mut sum_sq = 0.0;
    for k in 0..f_i.len() {
        sum_sq += (f_i[k] - f_j[k]) * (f_i[k] - f_j[k]);
    }
    if same {
        0.5 * sum_sq
    } else {
        let hinge = m - sum_sq.sqrt();
        if hinge > 0.0 {
            0.5 * hinge * hinge
        } else {
            0.0
        }
    }
}

#[test]
fn criterion_3_oracle_equivalence() {
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + case);
        let in_dim = rng.random_range(2..=6);
        let hidden = rng.random_range(3..=8);
        let embed = rng.random_range(2..=5);
        let n_classes = rng.random_range(2..=5);
        let layers = vec![
            LayerSpec::Dense { in_dim, out_dim: hidden },
            LayerSpec::Relu { dim: hidden },
            LayerSpec::Dense { in_dim: hidden, out_dim: embed },
        ];
        let params = ModelParams::init(&layers, n_classes, &mut rng).unwrap();
        let x_i: Vec<f64> = (0..in_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x_j: Vec<f64> = (0..in_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c_i = rng.random_range(0..n_classes);
        let c_j = rng.random_range(0..n_classes);
        let lambda = rng.random_range(0.0..3.0);
        let m = Margin::new(1.0).unwrap();

        // Engine path.
        let (f_i, _) = net::forward_features(&params, &Tensor::from_vec(x_i.clone())).unwrap();
        let (f_j, _) = net::forward_features(&params, &Tensor::from_vec(x_j.clone())).unwrap();
        let z_i = net::forward_logits(&params, &f_i).unwrap();
        let z_j = net::forward_logits(&params, &f_j).unwrap();
        let p_i = losses::softmax_probs(&z_i).unwrap();
        let bd = losses::joint_loss(&z_i, c_i, &z_j, c_j, &f_i, &f_j, lambda, m).unwrap();

        // Oracle path.
        let nf_i = naive_forward(&params, &x_i);
        let nf_j = naive_forward(&params, &x_j);
        let nz_i = naive_logits(&params, &nf_i);
        let nz_j = naive_logits(&params, &nf_j);
        let np_i = naive_softmax(&nz_i);
        let n_ce_i = naive_cross_entropy(&nz_i, c_i);
        let n_ce_j = naive_cross_entropy(&nz_j, c_j);
        let n_v = naive_contrastive(&nf_i, &nf_j, c_i == c_j, 1.0);
        let n_total = n_ce_i + n_ce_j + lambda * n_v;

        let mut track = |a: f64, b: f64| {
            let err = (a - b).abs();
            worst = worst.max(err);
            assert!(err < 1e-10, "case {case}: engine {a} vs oracle {b}");
        };
        for (a, b) in f_i.data().iter().zip(&nf_i) {
            track(*a, *b);
        }
        for (a, b) in f_j.data().iter().zip(&nf_j) {
            track(*a, *b);
        }
        for (a, b) in z_i.data().iter().zip(&nz_i) {
            track(*a, *b);
        }
        for (a, b) in z_j.data().iter().zip(&nz_j) {
            track(*a, *b);
        }
        for (a, b) in p_i.data().iter().zip(&np_i) {
            track(*a, *b);
        }
        track(bd.loss_i, n_ce_i);
        track(bd.loss_j, n_ce_j);
        track(bd.contrastive, n_v);
        track(bd.total, n_total);
    }
    println!(
        "criterion 3 (oracle equivalence): PASS — 100 random configs, \
         worst |engine − oracle| = {worst:.3e}"
    );
}

#[test]
fn criterion_4_separability_improvement() {
    // Regression fixtures: values measured by this suite (x86-64 Linux,
    // rustc 1.97); per-seed (separability λ=0, separability λ=1,
    // accuracy λ=0, accuracy λ=1) on the test split.
    const FIXTURES: [(u64, f64, f64, f64, f64); 5] = [
        (1, 2.762742950982981, 3.319566792522049, 1.0, 1.0),
        (2, 2.709622867094733, 3.2018372976072764, 1.0, 1.0),
        (3, 2.842760801059846, 3.2387612922004716, 1.0, 1.0),
        (4, 2.670122867357758, 3.2191642912205336, 1.0, 1.0),
        (5, 2.8576402684197304, 3.3540118845638984, 1.0, 1.0),
    ];

    let started = Instant::now();
    let (train_ds, test_ds) = normalized_split();
    let margin = Margin::new(1.0).unwrap();
    let mut lines = Vec::new();
    for (idx, &seed) in ACCEPTANCE_SEEDS.iter().enumerate() {
        let base = TrainConfig { lambda: 0.0, seed, ..TrainConfig::default() };
        let joint = TrainConfig { lambda: 1.0, seed, ..TrainConfig::default() };
        let (params0, _) = train::train(&train_ds, &base).unwrap();
        let (params1, _) = train::train(&train_ds, &joint).unwrap();
        let acc0 = eval::accuracy(&params0, &test_ds).unwrap();
        let acc1 = eval::accuracy(&params1, &test_ds).unwrap();
        let sep0 = eval::distance_stats(&params0, &test_ds, margin).unwrap().separability;
        let sep1 = eval::distance_stats(&params1, &test_ds, margin).unwrap().separability;

        assert!(
            sep1 > sep0,
            "seed {seed}: separability λ=1 ({sep1}) not above λ=0 ({sep0})"
        );
        assert!(
            acc1 >= acc0 - 0.02,
            "seed {seed}: accuracy λ=1 ({acc1}) more than 0.02 below λ=0 ({acc0})"
        );

        let (fx_seed, fx_sep0, fx_sep1, fx_acc0, fx_acc1) = FIXTURES[idx];
        assert_eq!(seed, fx_seed);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
        assert!(close(sep0, fx_sep0), "seed {seed}: sep0 {sep0} vs fixture {fx_sep0}");
        assert!(close(sep1, fx_sep1), "seed {seed}: sep1 {sep1} vs fixture {fx_sep1}");
        assert!(close(acc0, fx_acc0), "seed {seed}: acc0 {acc0} vs fixture {fx_acc0}");
        assert!(close(acc1, fx_acc1), "seed {seed}: acc1 {acc1} vs fixture {fx_acc1}");

        lines.push(format!(
            "seed {seed}: sep {sep0:.4} -> {sep1:.4}, acc {acc0:.4} -> {acc1:.4}"
        ));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 4 took {elapsed:?}");
    println!(
        "criterion 4 (separability improvement): PASS — {} ({elapsed:?})",
        lines.join("; ")
    );
}

#[test]
fn criterion_5_lambda_tradeoff_shape() {
    let started = Instant::now();
    let (train_ds, test_ds) = acceptance_split();
    let lambdas = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    let rows = eval::lambda_sweep(
        &train_ds,
        &test_ds,
        &TrainConfig::default(),
        &lambdas,
        &ACCEPTANCE_SEEDS,
    )
    .unwrap();
    assert_eq!(rows.len(), lambdas.len() * ACCEPTANCE_SEEDS.len());
    for row in &rows {
        assert!(
            row.error.is_none(),
            "cell λ={} seed={} failed: {:?}",
            row.lambda,
            row.seed,
            row.error
        );
    }

    let median_for = |lambda: f64| -> f64 {
        median(
            rows.iter()
                .filter(|r| r.lambda == lambda)
                .map(|r| r.accuracy)
                .collect(),
        )
    };
    let moderate = [0.1, 0.5, 1.0, 2.0];
    let best_moderate = moderate
        .iter()
        .map(|&l| median_for(l))
        .fold(f64::NEG_INFINITY, f64::max);
    let at_hundred = median_for(100.0);
    assert!(
        at_hundred < best_moderate,
        "median accuracy at λ=100 ({at_hundred}) not below best moderate median ({best_moderate})"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "criterion 5 took {elapsed:?}");
    let summary: Vec<String> = lambdas
        .iter()
        .map(|&l| format!("λ={l}: {:.4}", median_for(l)))
        .collect();
    println!(
        "criterion 5 (lambda tradeoff): PASS — median accuracies {} ({elapsed:?})",
        summary.join(", ")
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: a classification-only trainer written with scalar loops,
// mirroring the engine's documented kernel order so a λ = 0 engine run must
// match it value for value.
// ---------------------------------------------------------------------------

struct RefModel {
    layers: Vec<LayerSpec>,
    dense_w: Vec<Vec<f64>>,
    dense_b: Vec<Vec<f64>>,
    cls_w: Vec<f64>,
    cls_b: Vec<f64>,
    n_classes: usize,
}

impl RefModel {
    fn from_params(params: &ModelParams) -> Self {
        Self {
            layers: params.layers().to_vec(),
            dense_w: params
                .extractor()
                .iter()
                .map(|p| p.weights.data().to_vec())
                .collect(),
            dense_b: params
                .extractor()
                .iter()
                .map(|p| p.bias.data().to_vec())
                .collect(),
            cls_w: params.classifier_w().data().to_vec(),
            cls_b: params.classifier_b().data().to_vec(),
            n_classes: params.n_classes(),
        }
    }

    /// Forward pass retaining each layer's output.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut outs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_vec();
        let mut dense_idx = 0;
        for layer in &self.layers {
            cur = match *layer {
                LayerSpec::Dense { in_dim, out_dim } => {
                    let w = &self.dense_w[dense_idx];
                    let b = &self.dense_b[dense_idx];
                    dense_idx += 1;
                    let mut next = vec![0.0; out_dim];
                    for (o, slot) in next.iter_mut().enumerate() {
                        let mut acc = b[o];
                        for (i, &xi) in cur.iter().enumerate().take(in_dim) {
                            acc += xi * w[i * out_dim + o];
                        }
                        *slot = acc;
                    }
                    next
                }
                LayerSpec::Relu { .. } => cur
                    .iter()
                    .map(|&v| if v > 0.0 { v } else { 0.0 })
                    .collect(),
            };
            outs.push(cur.clone());
        }
        outs
    }

    fn logits(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n_classes;
        (0..n)
            .map(|k| {
                let mut acc = self.cls_b[k];
                for (d, &fd) in f.iter().enumerate() {
                    acc += fd * self.cls_w[d * n + k];
                }
                acc
            })
            .collect()
    }

    fn softmax_grad(&self, z: &[f64], c: usize) -> Vec<f64> {
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
        let sum: f64 = p.iter().sum();
        for v in &mut p {
            *v /= sum;
        }
        p[c] -= 1.0;
        p
    }

    fn route(&self, g_z: &[f64], embed: usize) -> Vec<f64> {
        let n = self.n_classes;
        (0..embed)
            .map(|d| {
                let mut acc = 0.0;
                for (k, &g) in g_z.iter().enumerate() {
                    acc += self.cls_w[d * n + k] * g;
                }
                acc
            })
            .collect()
    }

    /// Backward through the extractor, accumulating into per-layer grads.
    fn backward_accumulate(
        &self,
        x: &[f64],
        outs: &[Vec<f64>],
        d_feat: &[f64],
        acc_w: &mut [Vec<f64>],
        acc_b: &mut [Vec<f64>],
    ) {
        let mut g = d_feat.to_vec();
        let mut dense_idx = self.dense_w.len();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let input: &[f64] = if idx == 0 { x } else { &outs[idx - 1] };
            match *layer {
                LayerSpec::Relu { .. } => {
                    for (gv, &xv) in g.iter_mut().zip(input) {
                        if xv <= 0.0 {
                            *gv = 0.0;
                        }
                    }
                }
                LayerSpec::Dense { in_dim, out_dim } => {
                    dense_idx -= 1;
                    for o in 0..out_dim {
                        acc_b[dense_idx][o] += g[o];
                        for i in 0..in_dim {
                            acc_w[dense_idx][i * out_dim + o] += input[i] * g[o];
                        }
                    }
                    let mut g_prev = vec![0.0; in_dim];
                    for (i, gp) in g_prev.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for (o, &go) in g.iter().enumerate().take(out_dim) {
                            acc += self.dense_w[dense_idx][i * out_dim + o] * go;
                        }
                        *gp = acc;
                    }
                    g = g_prev;
                }
            }
        }
    }
}

/// Pure cross-entropy trainer over the same pair stream as the engine.
fn reference_classification_train(ds: &LabeledDataset, cfg: &TrainConfig) -> RefModel {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = ModelParams::init(&cfg.layers, ds.n_classes(), &mut rng).unwrap();
    let mut model = RefModel::from_params(&init);
    let embed = init.embed_dim();
    let n = model.n_classes;
    let steps_per_epoch = ds.len().div_ceil(2 * cfg.batch_size);

    for _epoch in 0..cfg.epochs {
        for _step in 0..steps_per_epoch {
            let batch = pairing::sample_pairs(ds, cfg.batch_size, &mut rng).unwrap();
            let mut acc_w: Vec<Vec<f64>> =
                model.dense_w.iter().map(|w| vec![0.0; w.len()]).collect();
            let mut acc_b: Vec<Vec<f64>> =
                model.dense_b.iter().map(|b| vec![0.0; b.len()]).collect();
            let mut acc_cls_w = vec![0.0; model.cls_w.len()];
            let mut acc_cls_b = vec![0.0; model.cls_b.len()];

            for pair in &batch.pairs {
                let sa = &ds.samples()[pair.idx_a];
                let sb = &ds.samples()[pair.idx_b];
                let outs_i = model.forward(sa.features.data());
                let outs_j = model.forward(sb.features.data());
                let f_i = outs_i.last().unwrap().clone();
                let f_j = outs_j.last().unwrap().clone();
                let z_i = model.logits(&f_i);
                let z_j = model.logits(&f_j);
                let g_zi = model.softmax_grad(&z_i, sa.label);
                let g_zj = model.softmax_grad(&z_j, sb.label);
                let d_fi = model.route(&g_zi, embed);
                let d_fj = model.route(&g_zj, embed);

                model.backward_accumulate(
                    sa.features.data(),
                    &outs_i,
                    &d_fi,
                    &mut acc_w,
                    &mut acc_b,
                );
                model.backward_accumulate(
                    sb.features.data(),
                    &outs_j,
                    &d_fj,
                    &mut acc_w,
                    &mut acc_b,
                );
                for d in 0..embed {
                    for k in 0..n {
                        acc_cls_w[d * n + k] += f_i[d] * g_zi[k] + f_j[d] * g_zj[k];
                    }
                }
                for k in 0..n {
                    acc_cls_b[k] += g_zi[k] + g_zj[k];
                }
            }

            let factor = 1.0 / (batch.pairs.len() as f64);
            for w in acc_w.iter_mut().flatten() {
                *w *= factor;
            }
            for b in acc_b.iter_mut().flatten() {
                *b *= factor;
            }
            for v in &mut acc_cls_w {
                *v *= factor;
            }
            for v in &mut acc_cls_b {
                *v *= factor;
            }

            let eta = cfg.learning_rate;
            for (w, g) in model.dense_w.iter_mut().zip(&acc_w) {
                for (pv, gv) in w.iter_mut().zip(g) {
                    *pv -= eta * gv;
                }
            }
            for (b, g) in model.dense_b.iter_mut().zip(&acc_b) {
                for (pv, gv) in b.iter_mut().zip(g) {
                    *pv -= eta * gv;
                }
            }
            for (pv, gv) in model.cls_w.iter_mut().zip(&acc_cls_w) {
                *pv -= eta * gv;
            }
            for (pv, gv) in model.cls_b.iter_mut().zip(&acc_cls_b) {
                *pv -= eta * gv;
            }
        }
    }
    model
}

fn assert_params_equal_ref(params: &ModelParams, reference: &RefModel, what: &str) {
    for (idx, p) in params.extractor().iter().enumerate() {
        assert_eq!(
            p.weights.data(),
            &reference.dense_w[idx][..],
            "{what}: dense weights {idx}"
        );
        assert_eq!(
            p.bias.data(),
            &reference.dense_b[idx][..],
            "{what}: dense bias {idx}"
        );
    }
    assert_eq!(
        params.classifier_w().data(),
        &reference.cls_w[..],
        "{what}: classifier weights"
    );
    assert_eq!(
        params.classifier_b().data(),
        &reference.cls_b[..],
        "{what}: classifier bias"
    );
}

#[test]
fn criterion_6_symmetry_and_degeneracy() {
    // (a) pair symmetry of the joint loss, bit-exact.
    let m1 = Margin::new(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for case in 0..50 {
        let n = rng.random_range(2..=5);
        let e = rng.random_range(2..=5);
        let z_i = Tensor::from_vec((0..n).map(|_| rng.random_range(-3.0..3.0)).collect());
        let z_j = Tensor::from_vec((0..n).map(|_| rng.random_range(-3.0..3.0)).collect());
        let f_i = Tensor::from_vec((0..e).map(|_| rng.random_range(-2.0..2.0)).collect());
        let f_j = Tensor::from_vec((0..e).map(|_| rng.random_range(-2.0..2.0)).collect());
        let c_i = rng.random_range(0..n);
        let c_j = rng.random_range(0..n);
        let lambda = rng.random_range(0.0..4.0);
        let a = losses::joint_loss(&z_i, c_i, &z_j, c_j, &f_i, &f_j, lambda, m1).unwrap();
        let b = losses::joint_loss(&z_j, c_j, &z_i, c_i, &f_j, &f_i, lambda, m1).unwrap();
        assert_eq!(a.total, b.total, "case {case}");
        assert_eq!(a.contrastive, b.contrastive, "case {case}");
    }

    // (b) λ = 0 training equals the classification-only reference, for a
    // linear and for a relu stack, at two trajectory cuts.
    let (train_ds, _) = normalized_split();
    let stacks: [Vec<LayerSpec>; 2] = [
        vec![LayerSpec::Dense { in_dim: 16, out_dim: 16 }],
        vec![
            LayerSpec::Dense { in_dim: 16, out_dim: 8 },
            LayerSpec::Relu { dim: 8 },
            LayerSpec::Dense { in_dim: 8, out_dim: 16 },
        ],
    ];
    for (stack_idx, layers) in stacks.iter().enumerate() {
        for epochs in [1usize, 5] {
            let cfg = TrainConfig {
                lambda: 0.0,
                epochs,
                seed: 7,
                layers: layers.clone(),
                ..TrainConfig::default()
            };
            let (params, _) = train::train(&train_ds, &cfg).unwrap();
            let reference = reference_classification_train(&train_ds, &cfg);
            assert_params_equal_ref(
                &params,
                &reference,
                &format!("stack {stack_idx}, {epochs} epochs"),
            );
        }
    }

    // (c) η = 0 leaves the parameters at their seeded initialization.
    let layers = vec![LayerSpec::Dense { in_dim: 16, out_dim: 16 }];
    let cfg = TrainConfig {
        learning_rate: 0.0,
        epochs: 2,
        seed: 3,
        layers: layers.clone(),
        ..TrainConfig::default()
    };
    let (params, log) = train::train(&train_ds, &cfg).unwrap();
    let initial = ModelParams::init(
        &layers,
        train_ds.n_classes(),
        &mut ChaCha8Rng::seed_from_u64(3),
    )
    .unwrap();
    assert_eq!(params, initial);
    assert_eq!(log.epochs.len(), 2);

    println!(
        "criterion 6 (symmetry and degeneracy): PASS — 50 symmetric pairs, λ=0 ≡ \
         classification-only reference on 2 stacks x 2 trajectory cuts, η=0 no-op"
    );
}

#[test]
fn criterion_7_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_pairembed");
    let dir = tempfile::tempdir().unwrap();
    let o = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("spawn pairembed");
        assert!(
            out.status.success(),
            "command {:?} failed: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
    };

    run(&["gen-data", "--classes", "4", "--per-class", "20", "--dim", "6", "--seed", "9",
          "--out", &o("data.csv")]);
    for tag in ["a", "b"] {
        run(&[
            "train", "--data", &o("data.csv"), "--epochs", "8", "--seed", "5",
            "--out-model", &o(&format!("model_{tag}.json")),
            "--log", &o(&format!("log_{tag}.csv")),
        ]);
    }
    let model_a = std::fs::read(o("model_a.json")).unwrap();
    let model_b = std::fs::read(o("model_b.json")).unwrap();
    assert_eq!(model_a, model_b, "model files differ between identical runs");
    let log_a = std::fs::read(o("log_a.csv")).unwrap();
    let log_b = std::fs::read(o("log_b.csv")).unwrap();
    assert_eq!(log_a, log_b, "log files differ between identical runs");

    println!(
        "criterion 7 (determinism): PASS — byte-identical model ({} bytes) and log \
         ({} bytes) across reruns",
        model_a.len(),
        log_a.len()
    );
}
