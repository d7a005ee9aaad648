//! Balanced same-class / different-class pair sampling.
//!
//! Each batch holds `⌈n/2⌉` same-class pairs followed by `⌊n/2⌋`
//! different-class pairs. Classes are selected uniformly (not by sample
//! count), then members uniformly within the class, so rare classes stay
//! represented. Sampling consumes the generator sequentially; the draw order
//! is part of the reproducibility contract.

use rand::Rng;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// One index pair with its same-class tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub idx_a: usize,
    pub idx_b: usize,
    pub same: bool,
}

/// A batch of training pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBatch {
    pub pairs: Vec<Pair>,
}

/// Checks that a dataset can feed the pair sampler: at least two classes,
/// every class with at least two samples.
pub fn validate_for_pairing(ds: &LabeledDataset) -> Result<Vec<Vec<usize>>> {
    if ds.n_classes() < 2 {
        return Err(Error::Dataset(format!(
            "pair sampling needs at least 2 classes, dataset has {}",
            ds.n_classes()
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
    for (idx, s) in ds.samples().iter().enumerate() {
        by_class[s.label].push(idx);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::Dataset(format!(
                "class {class} has {} samples, pair sampling needs at least 2",
                members.len()
            )));
        }
    }
    Ok(by_class)
}

/// Draws a balanced batch of exactly `batch_size` pairs.
///
/// Same-class pairs: uniform class, then two distinct uniform members.
/// Different-class pairs: two distinct uniform classes, one uniform member
/// each. Deterministic given the generator state.
pub fn sample_pairs<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    batch_size: usize,
    rng: &mut R,
) -> Result<PairBatch> {
    if batch_size == 0 {
        return Err(Error::Domain("batch_size must be positive".into()));
    }
    let by_class = validate_for_pairing(ds)?;
    let n_classes = ds.n_classes();
    let n_same = batch_size.div_ceil(2);
    let n_diff = batch_size / 2;

    let mut pairs = Vec::with_capacity(batch_size);
    for _ in 0..n_same {
        let class = rng.random_range(0..n_classes);
        let members = &by_class[class];
        let a = rng.random_range(0..members.len());
        // Draw the second member from the remaining slots to keep it distinct
        // with a single bounded draw.
        let mut b = rng.random_range(0..members.len() - 1);
        if b >= a {
            b += 1;
        }
        pairs.push(Pair {
            idx_a: members[a],
            idx_b: members[b],
            same: true,
        });
    }
    for _ in 0..n_diff {
        let class_a = rng.random_range(0..n_classes);
        let mut class_b = rng.random_range(0..n_classes - 1);
        if class_b >= class_a {
            class_b += 1;
        }
        let members_a = &by_class[class_a];
        let members_b = &by_class[class_b];
        pairs.push(Pair {
            idx_a: members_a[rng.random_range(0..members_a.len())],
            idx_b: members_b[rng.random_range(0..members_b.len())],
            same: false,
        });
    }
    Ok(PairBatch { pairs })
}
