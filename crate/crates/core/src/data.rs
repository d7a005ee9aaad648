//! Datasets: synthetic generation, CSV persistence, mean normalization and
//! crop/mirror augmentation.
//!
//! Two synthetic families stand in for real imagery at desk scale:
//!
//! - `blobs`: class centers drawn uniformly on a sphere of radius
//!   `separation`, samples Gaussian around them with std `spread`;
//! - `textures`: square images carrying a class-specific sinusoidal
//!   frequency/orientation pattern plus Gaussian pixel noise.
//!
//! The CSV format is `label,x0,x1,...,x{D-1}`, one sample per row, values
//! printed in shortest round-trip decimal form, so a save/load cycle is
//! lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// One labeled sample; features are stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Tensor,
    pub label: usize,
}

/// Labeled samples plus the normalization statistic applied to them.
///
/// `mean` records what has been subtracted from every feature vector; a zero
/// mean marks raw data. Adding it back inverts the normalization exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    samples: Vec<Sample>,
    n_classes: usize,
    mean: Tensor,
}

impl LabeledDataset {
    /// Builds a dataset, checking label range and feature-shape agreement.
    pub fn new(samples: Vec<Sample>, n_classes: usize) -> Result<Self> {
        if samples.is_empty() {
            return Ok(Self {
                samples,
                n_classes,
                mean: Tensor::zeros(vec![0]),
            });
        }
        if n_classes == 0 {
            return Err(Error::Dataset(
                "non-empty dataset with zero classes".into(),
            ));
        }
        let dim = samples[0].features.len();
        for (idx, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(Error::Dataset(format!(
                    "sample {idx} has {} features, expected {dim}",
                    s.features.len()
                )));
            }
            if s.label >= n_classes {
                return Err(Error::Dataset(format!(
                    "sample {idx} has label {} outside 0..{n_classes}",
                    s.label
                )));
            }
        }
        Ok(Self {
            samples,
            n_classes,
            mean: Tensor::zeros(vec![dim]),
        })
    }

    /// An empty dataset with a known feature width.
    pub fn empty(dim: usize, n_classes: usize) -> Self {
        Self {
            samples: Vec::new(),
            n_classes,
            mean: Tensor::zeros(vec![dim]),
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.mean.len()
    }

    /// The mean subtracted from this dataset's features (zeros if raw).
    pub fn mean(&self) -> &Tensor {
        &self.mean
    }
}

/// Which synthetic family to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticMode {
    /// Gaussian point clouds in `dim` dimensions.
    Blobs { dim: usize },
    /// `side`×`side` sinusoidal-texture images, stored flat.
    Textures { side: usize },
}

/// Parameters of a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub mode: SyntheticMode,
    pub n_classes: usize,
    pub per_class: usize,
    /// Within-class noise std. Zero is allowed and gives identical samples.
    pub spread: f64,
    /// Between-class scale: sphere radius for blobs, pattern amplitude for
    /// textures.
    pub separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_classes == 0 {
            return Err(Error::Spec("n_classes must be positive".into()));
        }
        if self.per_class < 2 {
            return Err(Error::Spec("per_class must be at least 2".into()));
        }
        if !self.spread.is_finite() || self.spread < 0.0 {
            return Err(Error::Spec(format!(
                "spread must be non-negative, got {}",
                self.spread
            )));
        }
        if !self.separation.is_finite() || self.separation <= 0.0 {
            return Err(Error::Spec(format!(
                "separation must be positive, got {}",
                self.separation
            )));
        }
        match self.mode {
            SyntheticMode::Blobs { dim } if dim < 2 => {
                Err(Error::Spec("blobs need dim >= 2".into()))
            }
            SyntheticMode::Textures { side } if side < 8 => {
                Err(Error::Spec("textures need side >= 8".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Generates a synthetic dataset. Deterministic given `spec.seed`.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = StandardNormal;
    let mut samples = Vec::with_capacity(spec.n_classes * spec.per_class);

    match spec.mode {
        SyntheticMode::Blobs { dim } => {
            for _class in 0..spec.n_classes {
                let center = random_sphere_point(dim, spec.separation, &mut rng)?;
                for _ in 0..spec.per_class {
                    let feats: Vec<f64> = center
                        .iter()
                        .map(|&c| {
                            let n: f64 = normal.sample(&mut rng);
                            c + spec.spread * n
                        })
                        .collect();
                    samples.push(Sample {
                        features: Tensor::from_vec(feats),
                        label: _class,
                    });
                }
            }
        }
        SyntheticMode::Textures { side } => {
            for class in 0..spec.n_classes {
                let theta = std::f64::consts::PI * class as f64 / spec.n_classes as f64;
                let freq = 1.0 + 0.5 * class as f64;
                let (cos_t, sin_t) = (theta.cos(), theta.sin());
                for _ in 0..spec.per_class {
                    let mut feats = Vec::with_capacity(side * side);
                    for r in 0..side {
                        for c in 0..side {
                            let u = c as f64 / side as f64;
                            let v = r as f64 / side as f64;
                            let phase =
                                2.0 * std::f64::consts::PI * freq * (u * cos_t + v * sin_t);
                            let n: f64 = normal.sample(&mut rng);
                            feats.push(spec.separation * phase.sin() + spec.spread * n);
                        }
                    }
                    samples.push(Sample {
                        features: Tensor::from_vec(feats),
                        label: class,
                    });
                }
            }
        }
    }
    LabeledDataset::new(samples, spec.n_classes)
}

fn random_sphere_point<R: Rng + ?Sized>(
    dim: usize,
    radius: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let normal = StandardNormal;
    for _ in 0..100 {
        let v: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return Ok(v.into_iter().map(|x| radius * x / norm).collect());
        }
    }
    Err(Error::Degenerate("could not draw a sphere point".into()))
}

/// Writes the dataset in the CSV interchange format.
pub fn save_csv<P: AsRef<Path>>(ds: &LabeledDataset, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "label")?;
    for k in 0..ds.feature_dim() {
        write!(w, ",x{k}")?;
    }
    writeln!(w)?;
    for s in &ds.samples {
        write!(w, "{}", s.label)?;
        for v in s.features.data() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset back from the CSV interchange format.
///
/// `n_classes` is inferred as `max label + 1`. Malformed rows report their
/// 1-based line number.
pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<LabeledDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header".into(),
            })
        }
    };
    let fields: Vec<&str> = header.split(',').collect();
    if fields[0] != "label" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header must start with 'label', got '{}'", fields[0]),
        });
    }
    for (k, f) in fields[1..].iter().enumerate() {
        if *f != format!("x{k}") {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected column 'x{k}', got '{f}'"),
            });
        }
    }
    let dim = fields.len() - 1;

    let mut samples = Vec::new();
    let mut max_label = None::<usize>;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != dim + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} cells, got {}", dim + 1, cells.len()),
            });
        }
        let label: usize = cells[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad label '{}'", cells[0]),
        })?;
        let mut feats = Vec::with_capacity(dim);
        for c in &cells[1..] {
            let v: f64 = c.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad number '{c}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value '{c}'"),
                });
            }
            feats.push(v);
        }
        max_label = Some(max_label.map_or(label, |m| m.max(label)));
        samples.push(Sample {
            features: Tensor::from_vec(feats),
            label,
        });
    }
    if samples.is_empty() {
        return Ok(LabeledDataset::empty(dim, 0));
    }
    LabeledDataset::new(samples, max_label.unwrap_or(0) + 1)
}

/// Subtracts the training set's per-feature mean from the training set and
/// every other dataset, recording it in each. Returns the mean.
pub fn normalize_mean(
    train: &mut LabeledDataset,
    others: &mut [&mut LabeledDataset],
) -> Result<Tensor> {
    if train.is_empty() {
        return Err(Error::Dataset("cannot normalize an empty training set".into()));
    }
    let dim = train.feature_dim();
    for (idx, ds) in others.iter().enumerate() {
        if ds.feature_dim() != dim {
            return Err(Error::Dimension(format!(
                "dataset {idx} has feature width {}, training set has {dim}",
                ds.feature_dim()
            )));
        }
    }
    let mut mean = vec![0.0; dim];
    for s in &train.samples {
        for (m, v) in mean.iter_mut().zip(s.features.data()) {
            *m += v;
        }
    }
    let n = train.samples.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    let mean = Tensor::from_vec(mean);
    apply_mean(train, &mean)?;
    for ds in others {
        apply_mean(ds, &mean)?;
    }
    Ok(mean)
}

/// Subtracts a stored mean (e.g. from a model checkpoint) from a dataset and
/// records it.
pub fn apply_mean(ds: &mut LabeledDataset, mean: &Tensor) -> Result<()> {
    if ds.feature_dim() != mean.len() {
        return Err(Error::Dimension(format!(
            "mean of length {} applied to features of width {}",
            mean.len(),
            ds.feature_dim()
        )));
    }
    for s in &mut ds.samples {
        for (v, m) in s.features.data_mut().iter_mut().zip(mean.data()) {
            *v -= m;
        }
    }
    ds.mean = mean.clone();
    Ok(())
}

/// Random crop to `crop_side` then horizontal mirror with probability ½.
///
/// Draw order is fixed: row offset, column offset, mirror coin. The input
/// must be a square 2-D tensor.
pub fn augment<R: Rng + ?Sized>(image: &Tensor, crop_side: usize, rng: &mut R) -> Result<Tensor> {
    let shape = image.shape();
    if shape.len() != 2 || shape[0] != shape[1] {
        return Err(Error::Dimension(format!(
            "augment expects a square 2-D image, got shape {shape:?}"
        )));
    }
    let side = shape[0];
    if crop_side == 0 || crop_side > side {
        return Err(Error::Dimension(format!(
            "crop side {crop_side} invalid for a {side}x{side} image"
        )));
    }
    let row_off = rng.random_range(0..=side - crop_side);
    let col_off = rng.random_range(0..=side - crop_side);
    let mirror = rng.random_bool(0.5);
    let mut out = Tensor::zeros(vec![crop_side, crop_side]);
    for r in 0..crop_side {
        for c in 0..crop_side {
            let src_c = if mirror { crop_side - 1 - c } else { c };
            out.set2(r, c, image.at2(row_off + r, col_off + src_c));
        }
    }
    Ok(out)
}

/// Splits per class: the first `train_frac` of each class's samples (in
/// dataset order) go to the train split, the rest to the test split.
pub fn stratified_split(
    ds: &LabeledDataset,
    train_frac: f64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(0.0..=1.0).contains(&train_frac) {
        return Err(Error::Domain(format!(
            "train fraction must be in [0,1], got {train_frac}"
        )));
    }
    let mut counts = vec![0usize; ds.n_classes];
    for s in &ds.samples {
        counts[s.label] += 1;
    }
    let take: Vec<usize> = counts
        .iter()
        .map(|&c| ((c as f64) * train_frac).round() as usize)
        .collect();
    let mut seen = vec![0usize; ds.n_classes];
    let mut train = Vec::new();
    let mut test = Vec::new();
    for s in &ds.samples {
        if seen[s.label] < take[s.label] {
            train.push(s.clone());
        } else {
            test.push(s.clone());
        }
        seen[s.label] += 1;
    }
    Ok((
        LabeledDataset::new(train, ds.n_classes)?,
        LabeledDataset::new(test, ds.n_classes)?,
    ))
}
