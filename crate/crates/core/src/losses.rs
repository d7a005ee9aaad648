//! The joint training objective and its analytic gradients.
//!
//! Three pieces make up the objective for a pair of inputs:
//!
//! - softmax cross-entropy `I` on each branch's logits,
//! - a margin contrastive term `V` on the pair of feature vectors:
//!   `½·d²` for same-class pairs, `½·max(m − d, 0)²` for different-class
//!   pairs, with `d` the Euclidean feature distance,
//! - the weighted sum `L = I_i + I_j + λ·V`.
//!
//! Every gradient here is closed-form; the finite-difference checks live in
//! [`crate::gradcheck`] and the test suites.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Distance pairs closer than `1e-12` are treated as coincident; the
/// different-class gradient direction is undefined there and is taken as zero.
pub const COINCIDENT_EPS: f64 = 1e-12;

/// The margin `m` of the contrastive hinge. Strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin(f64);

impl Margin {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::Domain(format!("margin must be positive, got {m}")));
        }
        Ok(Self(m))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Margin {
    fn default() -> Self {
        Self(1.0)
    }
}

/// Per-pair loss values, split by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairLossBreakdown {
    /// Cross-entropy of the first branch.
    pub loss_i: f64,
    /// Cross-entropy of the second branch.
    pub loss_j: f64,
    /// Contrastive term `V` (unweighted).
    pub contrastive: f64,
    /// `loss_i + loss_j + λ·contrastive`.
    pub total: f64,
    pub same_class: bool,
}

/// All gradients of the joint loss for one pair.
///
/// `d_feat_*` are the full feature gradients: the classification path routed
/// back through the classifier weights plus `λ` times the contrastive part.
#[derive(Debug, Clone)]
pub struct JointGrads {
    pub d_feat_i: Tensor,
    pub d_feat_j: Tensor,
    pub d_logits_i: Tensor,
    pub d_logits_j: Tensor,
    /// Gradient w.r.t. the classifier weight matrix, both branches summed.
    pub d_classifier_w: Tensor,
    /// Gradient w.r.t. the classifier bias, both branches summed.
    pub d_classifier_b: Tensor,
}

fn check_logits(z: &Tensor) -> Result<()> {
    if z.is_empty() {
        return Err(Error::Domain("softmax of empty logits".into()));
    }
    if !z.all_finite() {
        return Err(Error::Domain("softmax of non-finite logits".into()));
    }
    Ok(())
}

fn check_class(z: &Tensor, c: usize) -> Result<()> {
    check_logits(z)?;
    if c >= z.len() {
        return Err(Error::Index(format!(
            "class {c} out of range for {} logits",
            z.len()
        )));
    }
    Ok(())
}

/// Softmax probabilities with max-subtraction stabilization.
pub fn softmax_probs(z: &Tensor) -> Result<Tensor> {
    check_logits(z)?;
    let max = z.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = z.data().iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = p.iter().sum();
    for v in &mut p {
        *v /= sum;
    }
    Ok(Tensor::from_vec(p))
}

/// Softmax cross-entropy `−ln p_c`, evaluated in log-sum-exp form so the
/// result stays finite for any finite logits.
pub fn cross_entropy(z: &Tensor, c: usize) -> Result<f64> {
    check_class(z, c)?;
    let max = z.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z.data().iter().map(|&v| (v - max).exp()).sum();
    Ok(sum.ln() + max - z.data()[c])
}

/// Gradient of [`cross_entropy`] w.r.t. the logits: `p_i − 1` at the target
/// class, `p_i` elsewhere.
pub fn cross_entropy_logit_grad(z: &Tensor, c: usize) -> Result<Tensor> {
    check_class(z, c)?;
    let mut g = softmax_probs(z)?;
    g.data_mut()[c] -= 1.0;
    Ok(g)
}

fn check_pair(f_i: &Tensor, f_j: &Tensor) -> Result<()> {
    if f_i.len() != f_j.len() {
        return Err(Error::Dimension(format!(
            "feature vectors of length {} and {}",
            f_i.len(),
            f_j.len()
        )));
    }
    Ok(())
}

/// Contrastive term: `½·d²` for same-class pairs, `½·max(m − d, 0)²` for
/// different-class pairs.
pub fn contrastive(f_i: &Tensor, f_j: &Tensor, same: bool, m: Margin) -> Result<f64> {
    check_pair(f_i, f_j)?;
    let mut sum_sq = 0.0;
    for (a, b) in f_i.data().iter().zip(f_j.data().iter()) {
        let d = a - b;
        sum_sq += d * d;
    }
    if same {
        Ok(0.5 * sum_sq)
    } else {
        let hinge = m.value() - sum_sq.sqrt();
        if hinge > 0.0 {
            Ok(0.5 * hinge * hinge)
        } else {
            Ok(0.0)
        }
    }
}

/// Gradient of [`contrastive`] w.r.t. both feature vectors.
///
/// Same class: `∂V/∂f_i = f_i − f_j`. Different class:
/// `∂V/∂f_i = −max(m − d, 0)·(f_i − f_j)/d`, taken as zero when the pair is
/// coincident (`d < 1e-12`) or the hinge is inactive (`d ≥ m`). The second
/// gradient is always the exact negation of the first.
pub fn contrastive_grad(
    f_i: &Tensor,
    f_j: &Tensor,
    same: bool,
    m: Margin,
) -> Result<(Tensor, Tensor)> {
    check_pair(f_i, f_j)?;
    let n = f_i.len();
    let mut g_i = vec![0.0; n];
    if same {
        for (k, g) in g_i.iter_mut().enumerate() {
            *g = f_i.data()[k] - f_j.data()[k];
        }
    } else {
        let d = f_i.euclidean_distance(f_j)?;
        let hinge = m.value() - d;
        if d >= COINCIDENT_EPS && hinge > 0.0 {
            let factor = -hinge / d;
            for (k, g) in g_i.iter_mut().enumerate() {
                *g = factor * (f_i.data()[k] - f_j.data()[k]);
            }
        }
    }
    let g_j: Vec<f64> = g_i.iter().map(|&v| -v).collect();
    Ok((Tensor::from_vec(g_i), Tensor::from_vec(g_j)))
}

#[allow(clippy::too_many_arguments)]
fn check_joint(
    z_i: &Tensor,
    c_i: usize,
    z_j: &Tensor,
    c_j: usize,
    f_i: &Tensor,
    f_j: &Tensor,
    lambda: f64,
) -> Result<()> {
    check_class(z_i, c_i)?;
    check_class(z_j, c_j)?;
    check_pair(f_i, f_j)?;
    if z_i.len() != z_j.len() {
        return Err(Error::Dimension(format!(
            "logit vectors of length {} and {}",
            z_i.len(),
            z_j.len()
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    Ok(())
}

/// Joint pair objective `L = I(z_i) + I(z_j) + λ·V(f_i, f_j)`.
///
/// The pair is same-class iff `c_i == c_j`.
#[allow(clippy::too_many_arguments)]
pub fn joint_loss(
    z_i: &Tensor,
    c_i: usize,
    z_j: &Tensor,
    c_j: usize,
    f_i: &Tensor,
    f_j: &Tensor,
    lambda: f64,
    m: Margin,
) -> Result<PairLossBreakdown> {
    check_joint(z_i, c_i, z_j, c_j, f_i, f_j, lambda)?;
    let same = c_i == c_j;
    let loss_i = cross_entropy(z_i, c_i)?;
    let loss_j = cross_entropy(z_j, c_j)?;
    let v = contrastive(f_i, f_j, same, m)?;
    Ok(PairLossBreakdown {
        loss_i,
        loss_j,
        contrastive: v,
        total: loss_i + loss_j + lambda * v,
        same_class: same,
    })
}

/// All analytic gradients of [`joint_loss`] for one pair.
///
/// `classifier_w` (shape `[embed_dim, n_classes]`) routes the logit gradient
/// back into feature space: since `z_k = Σ_d W[d,k]·f[d] + b[k]`, the
/// classification path contributes `W·∂L/∂z` to `∂L/∂f`. The contrastive path
/// adds `λ·∂V/∂f` and is skipped entirely when `λ = 0`, so a zero-λ run is
/// classification backprop and nothing else.
#[allow(clippy::too_many_arguments)]
pub fn joint_feature_grad(
    z_i: &Tensor,
    c_i: usize,
    z_j: &Tensor,
    c_j: usize,
    f_i: &Tensor,
    f_j: &Tensor,
    lambda: f64,
    m: Margin,
    classifier_w: &Tensor,
) -> Result<JointGrads> {
    check_joint(z_i, c_i, z_j, c_j, f_i, f_j, lambda)?;
    let embed = f_i.len();
    let n_classes = z_i.len();
    if classifier_w.shape() != [embed, n_classes] {
        return Err(Error::Dimension(format!(
            "classifier weights {:?} incompatible with embed_dim {} and {} classes",
            classifier_w.shape(),
            embed,
            n_classes
        )));
    }

    let g_zi = cross_entropy_logit_grad(z_i, c_i)?;
    let g_zj = cross_entropy_logit_grad(z_j, c_j)?;

    // Classification path: d_f[d] = Σ_k W[d,k] · dL/dz[k].
    let route = |g_z: &Tensor| -> Vec<f64> {
        let mut out = vec![0.0; embed];
        for (d, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..n_classes {
                acc += classifier_w.at2(d, k) * g_z.data()[k];
            }
            *o = acc;
        }
        out
    };
    let mut d_fi = route(&g_zi);
    let mut d_fj = route(&g_zj);

    if lambda != 0.0 {
        let same = c_i == c_j;
        let (dv_i, dv_j) = contrastive_grad(f_i, f_j, same, m)?;
        for (g, dv) in d_fi.iter_mut().zip(dv_i.data()) {
            *g += lambda * dv;
        }
        for (g, dv) in d_fj.iter_mut().zip(dv_j.data()) {
            *g += lambda * dv;
        }
    }

    // Classifier gradients accumulate both branches.
    let mut d_w = Tensor::zeros(vec![embed, n_classes]);
    for d in 0..embed {
        for k in 0..n_classes {
            d_w.set2(
                d,
                k,
                f_i.data()[d] * g_zi.data()[k] + f_j.data()[d] * g_zj.data()[k],
            );
        }
    }
    let d_b: Vec<f64> = (0..n_classes)
        .map(|k| g_zi.data()[k] + g_zj.data()[k])
        .collect();

    Ok(JointGrads {
        d_feat_i: Tensor::from_vec(d_fi),
        d_feat_j: Tensor::from_vec(d_fj),
        d_logits_i: g_zi,
        d_logits_j: g_zj,
        d_classifier_w: d_w,
        d_classifier_b: Tensor::from_vec(d_b),
    })
}
