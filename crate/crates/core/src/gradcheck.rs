//! Finite-difference verification of the analytic gradients.
//!
//! The error metric is `|a − n| / max(|a|, |n|, 1)`, the usual guard against
//! blowing up on near-zero gradients. With central differences at `ε = 1e-5`
//! in `f64`, a correct gradient lands several orders of magnitude below the
//! `1e-5` pass threshold.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::{self, Margin};
use crate::net::{self, LayerSpec, ModelParams};
use crate::tensor::Tensor;

/// Central finite differences of `f` at `x`, one partial per coordinate.
pub fn central_diff<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], eps: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        let orig = probe[k];
        probe[k] = orig + eps;
        let plus = f(&probe);
        probe[k] = orig - eps;
        let minus = f(&probe);
        probe[k] = orig;
        out.push((plus - minus) / (2.0 * eps));
    }
    out
}

/// Relative error between an analytic and a numeric derivative.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Outcome of one full joint-objective gradient check.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    /// Worst relative error across every compared derivative.
    pub max_rel_err: f64,
    /// Number of derivatives compared.
    pub n_checked: usize,
}

impl GradCheckReport {
    fn record(&mut self, analytic: f64, numeric: f64) {
        self.max_rel_err = self.max_rel_err.max(relative_error(analytic, numeric));
        self.n_checked += 1;
    }
}

fn pipeline_loss(
    params: &ModelParams,
    x_i: &Tensor,
    c_i: usize,
    x_j: &Tensor,
    c_j: usize,
    lambda: f64,
    m: Margin,
) -> f64 {
    let (f_i, _) = net::forward_features(params, x_i).expect("shapes fixed by construction");
    let (f_j, _) = net::forward_features(params, x_j).expect("shapes fixed by construction");
    let z_i = net::forward_logits(params, &f_i).expect("shapes fixed by construction");
    let z_j = net::forward_logits(params, &f_j).expect("shapes fixed by construction");
    losses::joint_loss(&z_i, c_i, &z_j, c_j, &f_i, &f_j, lambda, m)
        .expect("valid inputs")
        .total
}

/// True when some relu pre-activation sits within `margin` of its kink,
/// where a central difference would straddle the non-smooth point.
fn near_relu_kink(params: &ModelParams, trace: &crate::net::ForwardTrace, margin: f64) -> bool {
    for (idx, layer) in params.layers().iter().enumerate() {
        if matches!(layer, LayerSpec::Relu { .. }) {
            let pre = if idx == 0 {
                trace.input().data()
            } else {
                trace.outputs()[idx - 1].data()
            };
            if pre.iter().any(|v| v.abs() < margin) {
                return true;
            }
        }
    }
    false
}

/// Builds a random two-layer configuration from `seed` and compares every
/// analytic gradient of the joint objective against central finite
/// differences: the softmax logit gradient, the contrastive feature
/// gradient, the routed feature gradient, and the full backward pass over
/// all parameters.
///
/// The objective is piecewise smooth; configurations are re-drawn when the
/// pair distance falls within `1e-3` of the hinge (`d = m`) or of
/// coincidence (`d = 0`), or when a relu pre-activation sits within `1e-3`
/// of its kink. The subgradient choice at those points is not a statement
/// about the derivative.
pub fn check_joint_objective(seed: u64, eps: f64) -> Result<GradCheckReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_dim = rng.random_range(3..=6);
    let hidden = rng.random_range(4..=8);
    let embed = rng.random_range(3..=6);
    let n_classes = rng.random_range(2..=5);
    let layers = vec![
        LayerSpec::Dense { in_dim, out_dim: hidden },
        LayerSpec::Relu { dim: hidden },
        LayerSpec::Dense { in_dim: hidden, out_dim: embed },
    ];
    let params = ModelParams::init(&layers, n_classes, &mut rng)?;
    let lambda = [0.0, 0.5, 1.0, 2.0][rng.random_range(0..4)];
    let m = Margin::new(1.0)?;
    let c_i = rng.random_range(0..n_classes);
    let c_j = rng.random_range(0..n_classes);

    // Draw inputs until the embedded pair sits away from d = 0 and d = m.
    let mut tries = 0;
    let (x_i, x_j, f_i, f_j, trace_i, trace_j) = loop {
        let x_i = Tensor::from_vec((0..in_dim).map(|_| rng.random_range(-1.0..1.0)).collect());
        let x_j = Tensor::from_vec((0..in_dim).map(|_| rng.random_range(-1.0..1.0)).collect());
        let (f_i, trace_i) = net::forward_features(&params, &x_i)?;
        let (f_j, trace_j) = net::forward_features(&params, &x_j)?;
        let d = f_i.euclidean_distance(&f_j)?;
        if d > 1e-3
            && (d - m.value()).abs() > 1e-3
            && !near_relu_kink(&params, &trace_i, 1e-3)
            && !near_relu_kink(&params, &trace_j, 1e-3)
        {
            break (x_i, x_j, f_i, f_j, trace_i, trace_j);
        }
        tries += 1;
        if tries > 1000 {
            return Err(Error::Degenerate(
                "could not draw a configuration away from the non-smooth points".into(),
            ));
        }
    };

    let z_i = net::forward_logits(&params, &f_i)?;
    let z_j = net::forward_logits(&params, &f_j)?;

    let jg = losses::joint_feature_grad(
        &z_i,
        c_i,
        &z_j,
        c_j,
        &f_i,
        &f_j,
        lambda,
        m,
        params.classifier_w(),
    )?;

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        n_checked: 0,
    };

    // Softmax logit gradient against the joint loss as a function of z_i.
    let numeric = central_diff(
        |v| {
            losses::joint_loss(
                &Tensor::from_vec(v.to_vec()),
                c_i,
                &z_j,
                c_j,
                &f_i,
                &f_j,
                lambda,
                m,
            )
            .unwrap()
            .total
        },
        z_i.data(),
        eps,
    );
    for (a, n) in jg.d_logits_i.data().iter().zip(&numeric) {
        report.record(*a, *n);
    }

    // Contrastive gradient for both branch roles.
    let same = c_i == c_j;
    let (dv_i, dv_j) = losses::contrastive_grad(&f_i, &f_j, same, m)?;
    let numeric = central_diff(
        |v| losses::contrastive(&Tensor::from_vec(v.to_vec()), &f_j, same, m).unwrap(),
        f_i.data(),
        eps,
    );
    for (a, n) in dv_i.data().iter().zip(&numeric) {
        report.record(*a, *n);
    }
    let numeric = central_diff(
        |v| losses::contrastive(&f_i, &Tensor::from_vec(v.to_vec()), same, m).unwrap(),
        f_j.data(),
        eps,
    );
    for (a, n) in dv_j.data().iter().zip(&numeric) {
        report.record(*a, *n);
    }

    // Routed feature gradient: perturb f_i, recompute the logits through the
    // classifier so the classification path is exercised.
    let numeric = central_diff(
        |v| {
            let fv = Tensor::from_vec(v.to_vec());
            let zv = net::forward_logits(&params, &fv).unwrap();
            losses::joint_loss(&zv, c_i, &z_j, c_j, &fv, &f_j, lambda, m)
                .unwrap()
                .total
        },
        f_i.data(),
        eps,
    );
    for (a, n) in jg.d_feat_i.data().iter().zip(&numeric) {
        report.record(*a, *n);
    }

    // Full backward pass: extractor gradients from both branches share the
    // single parameter set, classifier gradients come from the loss layer.
    let (g_i, _) = net::backward(&params, &trace_i, &jg.d_feat_i)?;
    let (g_j, _) = net::backward(&params, &trace_j, &jg.d_feat_j)?;
    let mut total = g_i;
    total.add_assign(&g_j);
    for (dst, src) in total
        .classifier_w
        .data_mut()
        .iter_mut()
        .zip(jg.d_classifier_w.data())
    {
        *dst += src;
    }
    for (dst, src) in total
        .classifier_b
        .data_mut()
        .iter_mut()
        .zip(jg.d_classifier_b.data())
    {
        *dst += src;
    }

    let analytic_tensors = total.tensors();
    for t_idx in 0..analytic_tensors.len() {
        for e_idx in 0..analytic_tensors[t_idx].len() {
            let mut perturbed = params.clone();
            perturbed.tensors_mut()[t_idx].data_mut()[e_idx] += eps;
            let plus = pipeline_loss(&perturbed, &x_i, c_i, &x_j, c_j, lambda, m);
            perturbed.tensors_mut()[t_idx].data_mut()[e_idx] -= 2.0 * eps;
            let minus = pipeline_loss(&perturbed, &x_i, c_i, &x_j, c_j, lambda, m);
            let numeric = (plus - minus) / (2.0 * eps);
            report.record(analytic_tensors[t_idx].data()[e_idx], numeric);
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_diff_of_quadratic() {
        // f(x) = x0² + 3·x1, so df = [2·x0, 3].
        let g = central_diff(|v| v[0] * v[0] + 3.0 * v[1], &[2.0, 5.0], 1e-5);
        assert!((g[0] - 4.0).abs() < 1e-9);
        assert!((g[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn relative_error_floors_denominator_at_one() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1e-9, 0.0) - 1e-9).abs() < 1e-24);
        assert!((relative_error(200.0, 100.0) - 0.5) < 1e-12);
    }

    #[test]
    fn joint_objective_check_passes_for_a_seed() {
        let report = check_joint_objective(7, 1e-5).unwrap();
        assert!(report.n_checked >= 50);
        assert!(
            report.max_rel_err < 1e-5,
            "max relative error {}",
            report.max_rel_err
        );
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(check_joint_objective(0, 0.0).is_err());
        assert!(check_joint_objective(0, f64::NAN).is_err());
    }
}
