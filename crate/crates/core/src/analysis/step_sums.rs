//! Integrals over the real line of sums over time steps, evaluated by exact
//! piecewise integration.
//!
//! For nodes `tⁿ` (extended by the largest step in both directions), weights
//! `aⁿ⁺¹ ≥ 0` with finite support and `τ > 0`:
//!
//! ```text
//! ∫_ℝ Σ_{n=n(t)+1}^{n(t+τ)} δtⁿ⁺½ aⁿ⁺¹ dt            = τ Σ δtⁿ⁺½ aⁿ⁺¹
//! ∫_ℝ (Σ_{n=n(t)+1}^{n(t+τ)} δtⁿ⁺½) a^{n(t+s)+1} dt  ≤ (τ + δt) Σ δtⁿ⁺½ aⁿ⁺¹
//! ```
//!
//! where `n(t)` is the index with `t ∈ (tⁿ, tⁿ⁺¹]`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSumReport {
    pub lhs1: f64,
    pub rhs1: f64,
    pub lhs2: f64,
    pub rhs2: f64,
    pub dt_max: f64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum StepSumError {
    #[error("invalid step family: {0}")]
    Invalid(String),
}

/// `nodes` are `t⁰ < … < tᴺ` and `a[n]` is the weight `aⁿ⁺¹` of step `n`.
pub fn step_sum_identities(nodes: &[f64], a: &[f64], tau: f64, s: f64) -> Result<StepSumReport, StepSumError> {
    if nodes.len() < 2 || a.len() != nodes.len() - 1 {
        return Err(StepSumError::Invalid("need N+1 nodes and N weights".into()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(StepSumError::Invalid("nodes must increase strictly".into()));
    }
    if a.iter().any(|&v| !(v >= 0.0)) {
        return Err(StepSumError::Invalid("weights must be non-negative".into()));
    }
    if !(tau > 0.0) {
        return Err(StepSumError::Invalid("tau must be positive".into()));
    }
    let dt_max = nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);

    // extend with steps of size dt_max far enough to cover all shifts
    let reach = tau + s.abs() + 2.0 * dt_max;
    let pad = (reach / dt_max).ceil() as usize + 1;
    let first = nodes[0];
    let last = nodes[nodes.len() - 1];
    let mut ext: Vec<f64> = (1..=pad).rev().map(|k| first - k as f64 * dt_max).collect();
    ext.extend_from_slice(nodes);
    ext.extend((1..=pad).map(|k| last + k as f64 * dt_max));
    let weight = |n: usize| -> f64 {
        // a for step n of the extended grid
        if n >= pad && n - pad < a.len() {
            a[n - pad]
        } else {
            0.0
        }
    };
    let steps = ext.len() - 1;
    let dt = |n: usize| ext[n + 1] - ext[n];
    // n(t): t ∈ (t^n, t^{n+1}]
    let index_of = |t: f64| -> Option<usize> {
        let k = ext.partition_point(|&x| x < t);
        (k >= 1 && k <= steps).then(|| k - 1)
    };
    // Σ over n with t ≤ tⁿ < t + τ of δtⁿ⁺½ · w(n)
    let window_sum = |t: f64, w: &dyn Fn(usize) -> f64| -> f64 {
        (0..steps)
            .filter(|&n| ext[n] >= t && ext[n] < t + tau)
            .map(|n| dt(n) * w(n))
            .sum()
    };

    let rhs_sum: f64 = (0..steps).map(|n| dt(n) * weight(n)).sum();

    // first integrand jumps at tⁿ − τ and tⁿ for weighted steps
    let mut cuts: Vec<f64> = (0..steps)
        .filter(|&n| weight(n) > 0.0)
        .flat_map(|n| [ext[n] - tau, ext[n]])
        .collect();
    let lhs1 = integrate_piecewise(&mut cuts, |t| window_sum(t, &weight));

    // second integrand: support t + s ∈ (tᵐ, tᵐ⁺¹] with aᵐ⁺¹ > 0
    let mut cuts2: Vec<f64> = Vec::new();
    let support: Vec<usize> = (0..steps).filter(|&m| weight(m) > 0.0).collect();
    if let (Some(&lo), Some(&hi)) = (support.first(), support.last()) {
        let (t_lo, t_hi) = (ext[lo] - s, ext[hi + 1] - s);
        cuts2.extend([t_lo, t_hi]);
        for &x in &ext {
            for c in [x - s, x, x - tau] {
                if c > t_lo && c < t_hi {
                    cuts2.push(c);
                }
            }
        }
    }
    let lhs2 = integrate_piecewise(&mut cuts2, |t| {
        let Some(m) = index_of(t + s) else {
            return 0.0;
        };
        let am = weight(m);
        if am == 0.0 {
            0.0
        } else {
            window_sum(t, &|_| 1.0) * am
        }
    });

    Ok(StepSumReport {
        lhs1,
        rhs1: tau * rhs_sum,
        lhs2,
        rhs2: (tau + dt_max) * rhs_sum,
        dt_max,
    })
}

/// Integral of a function constant between consecutive sorted cut points and
/// zero outside them, sampled at midpoints.
fn integrate_piecewise(cuts: &mut Vec<f64>, f: impl Fn(f64) -> f64) -> f64 {
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[1] - w[0]) * f(0.5 * (w[0] + w[1])))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_weight_uniform_steps() {
        let nodes: Vec<f64> = (0..=5).map(|k| k as f64).collect();
        let a = [0.0, 0.0, 1.0, 0.0, 0.0];
        let r = step_sum_identities(&nodes, &a, 2.0, 0.0).unwrap();
        assert!((r.lhs1 - 2.0).abs() < 1e-14 && (r.rhs1 - 2.0).abs() < 1e-14);
        assert!(r.lhs2 <= r.rhs2);
    }

    #[test]
    fn zero_weights() {
        let r = step_sum_identities(&[0.0, 0.3, 1.0], &[0.0, 0.0], 0.5, 0.2).unwrap();
        assert_eq!((r.lhs1, r.rhs1, r.lhs2, r.rhs2), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(step_sum_identities(&[0.0, 1.0], &[1.0], 0.0, 0.0).is_err());
        assert!(step_sum_identities(&[0.0, 1.0], &[-1.0], 1.0, 0.0).is_err());
        assert!(step_sum_identities(&[0.0, 0.0], &[1.0], 1.0, 0.0).is_err());
    }
}
