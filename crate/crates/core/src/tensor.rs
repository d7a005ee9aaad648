//! Dense row-major tensor of `f64` values.
//!
//! This is the carrier for images, feature vectors, logits and gradients.
//! It is deliberately minimal: a shape plus a flat buffer, with the
//! invariant that the buffer length equals the product of the dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major array of `f64` with an explicit shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor from a shape and a flat row-major buffer.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(Error::Dimension(format!(
                "tensor data length {} does not match shape {:?} (expected {})",
                data.len(),
                shape,
                expect
            )));
        }
        Ok(Self { shape, data })
    }

    /// A tensor of zeros with the given shape.
    pub fn zeros(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    /// A 1-D tensor wrapping the given values.
    pub fn from_vec(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Total number of elements.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Element of a 2-D tensor at row `r`, column `c`.
    #[inline]
    pub fn at2(&self, r: usize, c: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[r * self.shape[1] + c]
    }

    #[inline]
    pub fn set2(&mut self, r: usize, c: usize, v: f64) {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[r * self.shape[1] + c] = v;
    }

    /// Reinterprets the buffer under a new shape with the same length.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if expect != self.data.len() {
            return Err(Error::Dimension(format!(
                "cannot reshape {} elements into {:?}",
                self.data.len(),
                shape
            )));
        }
        Ok(Self {
            shape,
            data: self.data.clone(),
        })
    }

    /// True when every entry is finite (no NaN or infinity).
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Euclidean distance to another tensor of the same length.
    ///
    /// Summation runs in element order, so the result is reproducible.
    pub fn euclidean_distance(&self, other: &Tensor) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "distance between tensors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        let mut acc = 0.0;
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            let d = a - b;
            acc += d * d;
        }
        Ok(acc.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_mismatched_length() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn at2_uses_row_major_order() {
        let t = Tensor::new(vec![2, 3], (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(t.at2(0, 0), 0.0);
        assert_eq!(t.at2(0, 2), 2.0);
        assert_eq!(t.at2(1, 0), 3.0);
        assert_eq!(t.at2(1, 2), 5.0);
    }

    #[test]
    fn euclidean_distance_three_four_five() {
        let a = Tensor::from_vec(vec![3.0, 4.0]);
        let b = Tensor::from_vec(vec![0.0, 0.0]);
        assert_eq!(a.euclidean_distance(&b).unwrap(), 5.0);
    }

    #[test]
    fn euclidean_distance_rejects_length_mismatch() {
        let a = Tensor::from_vec(vec![1.0]);
        let b = Tensor::from_vec(vec![1.0, 2.0]);
        assert!(a.euclidean_distance(&b).is_err());
    }

    #[test]
    fn all_finite_detects_nan_and_inf() {
        let mut t = Tensor::from_vec(vec![1.0, 2.0]);
        assert!(t.all_finite());
        t.data_mut()[0] = f64::NAN;
        assert!(!t.all_finite());
        t.data_mut()[0] = f64::INFINITY;
        assert!(!t.all_finite());
    }
}
