//! Evaluation: classification accuracy, embedding distance statistics, 2-D
//! PCA projection, λ sweeps, and embedding export.
//!
//! Distance statistics are exhaustive over all unordered sample pairs;
//! datasets here are desk-scale and exactness beats sampling noise in tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::data::{self, LabeledDataset};
use crate::error::{Error, Result};
use crate::losses::Margin;
use crate::net::{self, ModelParams};
use crate::tensor::Tensor;
use crate::train::{self, TrainConfig};

/// Evaluation summary. `separability` is `mean_inter / mean_intra` and is
/// reported as `inf` when the intra-class mean distance is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub mean_intra: f64,
    pub mean_inter: f64,
    pub separability: f64,
    pub margin_violation_rate: f64,
}

/// The distance-based half of [`Metrics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceStats {
    pub mean_intra: f64,
    pub mean_inter: f64,
    pub separability: f64,
    pub margin_violation_rate: f64,
}

/// Embeds every sample with the feature extractor.
pub fn embeddings(params: &ModelParams, ds: &LabeledDataset) -> Result<Vec<Tensor>> {
    ds.samples()
        .iter()
        .map(|s| net::forward_features(params, &s.features).map(|(f, _)| f))
        .collect()
}

/// Fraction of samples whose argmax logit equals the label. Ties break
/// toward the lowest class index.
pub fn accuracy(params: &ModelParams, ds: &LabeledDataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Domain("accuracy of an empty dataset".into()));
    }
    let mut correct = 0usize;
    for s in ds.samples() {
        let (f, _) = net::forward_features(params, &s.features)?;
        let z = net::forward_logits(params, &f)?;
        let mut best = 0usize;
        for (k, &v) in z.data().iter().enumerate() {
            if v > z.data()[best] {
                best = k;
            }
        }
        if best == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Mean intra-class and inter-class embedding distances over all unordered
/// pairs, plus the fraction of different-class pairs closer than the margin.
///
/// Requires at least two classes that each have at least two samples.
pub fn distance_stats(
    params: &ModelParams,
    ds: &LabeledDataset,
    m: Margin,
) -> Result<DistanceStats> {
    let mut counts = vec![0usize; ds.n_classes().max(1)];
    for s in ds.samples() {
        counts[s.label] += 1;
    }
    if counts.iter().filter(|&&c| c >= 2).count() < 2 {
        return Err(Error::Domain(
            "distance stats need at least 2 classes with at least 2 samples each".into(),
        ));
    }

    let embedded = embeddings(params, ds)?;
    let labels: Vec<usize> = ds.samples().iter().map(|s| s.label).collect();
    let mut intra_sum = 0.0;
    let mut intra_n = 0usize;
    let mut inter_sum = 0.0;
    let mut inter_n = 0usize;
    let mut violations = 0usize;
    for a in 0..embedded.len() {
        for b in a + 1..embedded.len() {
            let d = embedded[a].euclidean_distance(&embedded[b])?;
            if labels[a] == labels[b] {
                intra_sum += d;
                intra_n += 1;
            } else {
                inter_sum += d;
                inter_n += 1;
                if d < m.value() {
                    violations += 1;
                }
            }
        }
    }
    let mean_intra = intra_sum / intra_n as f64;
    let mean_inter = inter_sum / inter_n as f64;
    let separability = if mean_intra == 0.0 {
        f64::INFINITY
    } else {
        mean_inter / mean_intra
    };
    Ok(DistanceStats {
        mean_intra,
        mean_inter,
        separability,
        margin_violation_rate: violations as f64 / inter_n as f64,
    })
}

/// Accuracy plus distance statistics in one record.
pub fn metrics(params: &ModelParams, ds: &LabeledDataset, m: Margin) -> Result<Metrics> {
    let acc = accuracy(params, ds)?;
    let d = distance_stats(params, ds, m)?;
    Ok(Metrics {
        accuracy: acc,
        mean_intra: d.mean_intra,
        mean_inter: d.mean_inter,
        separability: d.separability,
        margin_violation_rate: d.margin_violation_rate,
    })
}

/// Writes metrics as a flat `key = value` text file.
pub fn write_metrics<P: AsRef<Path>>(m: &Metrics, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "accuracy = {}", m.accuracy)?;
    writeln!(w, "mean_intra = {}", m.mean_intra)?;
    writeln!(w, "mean_inter = {}", m.mean_inter)?;
    writeln!(w, "separability = {}", m.separability)?;
    writeln!(w, "margin_violation_rate = {}", m.margin_violation_rate)?;
    w.flush()?;
    Ok(())
}

const PCA_TOL: f64 = 1e-9;
const PCA_MAX_ITER: usize = 1000;

/// Projects embeddings onto their top-2 principal components.
///
/// Power iteration with deflation on the sample covariance (normalized by
/// `n − 1`), deterministic start vector, tolerance `1e-9`, at most 1000
/// iterations. Components follow the sign convention that their first
/// loading above `1e-12` in magnitude is positive, so the output is
/// deterministic. Component 1 carries at least as much variance as
/// component 2.
pub fn pca2d(points: &[Tensor]) -> Result<Vec<(f64, f64)>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Domain(format!("pca2d needs at least 3 points, got {n}")));
    }
    let dim = points[0].len();
    if dim < 2 {
        return Err(Error::Domain(format!(
            "pca2d needs dimension >= 2, got {dim}"
        )));
    }
    for (idx, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::Dimension(format!(
                "point {idx} has dimension {}, expected {dim}",
                p.len()
            )));
        }
    }

    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p.data()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.data().iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let mut cov = vec![0.0; dim * dim];
    for row in &centered {
        for a in 0..dim {
            for b in 0..dim {
                cov[a * dim + b] += row[a] * row[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for v in &mut cov {
        *v /= denom;
    }
    let trace: f64 = (0..dim).map(|a| cov[a * dim + a]).sum();
    if trace < 1e-24 {
        return Err(Error::Degenerate(
            "all points identical, no principal directions".into(),
        ));
    }

    let v1 = power_iteration(&cov, dim).unwrap_or_else(|| fallback_direction(dim, None));
    let l1 = rayleigh(&cov, &v1, dim);
    let mut deflated = cov.clone();
    for a in 0..dim {
        for b in 0..dim {
            deflated[a * dim + b] -= l1 * v1[a] * v1[b];
        }
    }
    let mut v2 = power_iteration(&deflated, dim)
        .unwrap_or_else(|| fallback_direction(dim, Some(&v1)));
    // Re-orthogonalize against the first component.
    let dot: f64 = v1.iter().zip(&v2).map(|(a, b)| a * b).sum();
    for (x, y) in v2.iter_mut().zip(&v1) {
        *x -= dot * y;
    }
    let norm = v2.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        v2 = fallback_direction(dim, Some(&v1));
    } else {
        for x in &mut v2 {
            *x /= norm;
        }
    }

    let v1 = fix_sign(v1);
    let v2 = fix_sign(v2);
    Ok(centered
        .iter()
        .map(|row| {
            let x: f64 = row.iter().zip(&v1).map(|(a, b)| a * b).sum();
            let y: f64 = row.iter().zip(&v2).map(|(a, b)| a * b).sum();
            (x, y)
        })
        .collect())
}

/// Power iteration on a symmetric PSD matrix; `None` when the matrix is
/// numerically zero along the iterate (zero eigenvalue).
fn power_iteration(mat: &[f64], dim: usize) -> Option<Vec<f64>> {
    // Deterministic start: decreasing weights, unlikely to be orthogonal to
    // the dominant eigenvector.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 / (i + 1) as f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    for _ in 0..PCA_MAX_ITER {
        let mut w = vec![0.0; dim];
        for (a, wa) in w.iter_mut().enumerate() {
            let mut acc = 0.0;
            for b in 0..dim {
                acc += mat[a * dim + b] * v[b];
            }
            *wa = acc;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-30 {
            return None;
        }
        for x in &mut w {
            *x /= norm;
        }
        let delta: f64 = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        v = w;
        if delta < PCA_TOL {
            break;
        }
    }
    Some(v)
}

fn rayleigh(mat: &[f64], v: &[f64], dim: usize) -> f64 {
    let mut acc = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            acc += v[a] * mat[a * dim + b] * v[b];
        }
    }
    acc
}

/// Deterministic unit vector, orthogonal to `against` when given: the basis
/// vector least aligned with it, Gram-Schmidt corrected.
fn fallback_direction(dim: usize, against: Option<&[f64]>) -> Vec<f64> {
    match against {
        None => {
            let mut v = vec![0.0; dim];
            v[0] = 1.0;
            v
        }
        Some(v1) => {
            let k = (0..dim)
                .min_by(|&a, &b| v1[a].abs().total_cmp(&v1[b].abs()))
                .expect("dim >= 2");
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            let dot = v1[k];
            for (x, y) in v.iter_mut().zip(v1) {
                *x -= dot * y;
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in &mut v {
                *x /= norm;
            }
            v
        }
    }
}

fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
    }
    v
}

/// One cell of a λ sweep. Failed runs carry the error message and NaN
/// metrics instead of aborting the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub separability: f64,
    pub error: Option<String>,
}

/// Trains one run per `(λ, seed)` cell on raw (unnormalized) datasets and
/// measures test accuracy and separability.
///
/// λ = 0 is prepended as a baseline when absent. Rows come out λ-major in
/// input order. Cells run in parallel; each cell is internally
/// deterministic, and cells with the same seed share their initialization
/// and pair stream across λ values.
pub fn lambda_sweep(
    ds_train: &LabeledDataset,
    ds_test: &LabeledDataset,
    cfg: &TrainConfig,
    lambdas: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if lambdas.is_empty() {
        return Err(Error::Domain("lambda list is empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Domain("seed list is empty".into()));
    }
    for &l in lambdas {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::Domain(format!("invalid lambda {l}")));
        }
    }
    let mut lambda_list: Vec<f64> = Vec::with_capacity(lambdas.len() + 1);
    if !lambdas.contains(&0.0) {
        lambda_list.push(0.0);
    }
    lambda_list.extend_from_slice(lambdas);

    let mut train_ds = ds_train.clone();
    let mut test_ds = ds_test.clone();
    data::normalize_mean(&mut train_ds, &mut [&mut test_ds])?;
    let margin = Margin::new(cfg.margin)?;

    let cells: Vec<(f64, u64)> = lambda_list
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();

    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(lambda, seed)| {
            let cell_cfg = TrainConfig {
                lambda,
                seed,
                ..cfg.clone()
            };
            match train::train(&train_ds, &cell_cfg)
                .and_then(|(params, _)| {
                    let acc = accuracy(&params, &test_ds)?;
                    let stats = distance_stats(&params, &test_ds, margin)?;
                    Ok((acc, stats.separability))
                }) {
                Ok((acc, sep)) => SweepRow {
                    lambda,
                    seed,
                    accuracy: acc,
                    separability: sep,
                    error: None,
                },
                Err(e) => SweepRow {
                    lambda,
                    seed,
                    accuracy: f64::NAN,
                    separability: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}

/// Writes a sweep table as CSV (`lambda,seed,accuracy,separability`).
pub fn write_sweep_csv<P: AsRef<Path>>(rows: &[SweepRow], path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "lambda,seed,accuracy,separability")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.lambda, r.seed, r.accuracy, r.separability)?;
    }
    w.flush()?;
    Ok(())
}

/// Exports one embedding row per sample as CSV
/// (`id,label,e0,...,e{E-1}[,px,py]`), the 2-D columns present when `pca`
/// is requested.
pub fn export_embeddings<P: AsRef<Path>>(
    params: &ModelParams,
    ds: &LabeledDataset,
    path: P,
    pca: bool,
) -> Result<()> {
    let embedded = embeddings(params, ds)?;
    let coords = if pca && !ds.is_empty() {
        Some(pca2d(&embedded)?)
    } else {
        None
    };
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "id,label")?;
    for k in 0..params.embed_dim() {
        write!(w, ",e{k}")?;
    }
    if pca {
        write!(w, ",px,py")?;
    }
    writeln!(w)?;
    for (idx, (s, f)) in ds.samples().iter().zip(&embedded).enumerate() {
        write!(w, "{},{}", idx, s.label)?;
        for v in f.data() {
            write!(w, ",{v}")?;
        }
        if let Some(coords) = &coords {
            write!(w, ",{},{}", coords[idx].0, coords[idx].1)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
