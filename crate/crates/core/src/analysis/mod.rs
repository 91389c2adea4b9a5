//! Numerical counterparts of the energy estimates and compactness monitors,
//! plus the step-sum and weak-limit identification tools.

mod step_sums;
mod weak;

pub use step_sums::{step_sum_identities, StepSumError, StepSumReport};
pub use weak::{
    uniform_weak_distance, weak_metric, weak_metric_moments, MomentTrajectory, TestFamily, DEFAULT_FAMILY_SIZE,
};

use serde::Serialize;

use crate::gd::{dual_seminorm, DofField, GdError, GradientDiscretisation, Trajectory};
use crate::nonlinearity::{NonlinearPair, PairError};
use crate::quadrature::gauss_time;
use crate::scheme::{flux_pairing, source_vector, ProblemSpec};
use crate::Vec2;

/// Relative slack applied to energy-ledger margins.
pub const LEDGER_SLACK: f64 = 1e-8;

/// Both sides of the discrete energy inequality at `t⁽ᵏ⁾`:
/// `∫B(β(u(tᵏ))) + Σ δt ∫a·∇ζ(u) ≤ ∫B(β(u⁰)) + Σ δt ∫f̄ ζ(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerRow {
    pub time: f64,
    pub lhs_b: f64,
    pub lhs_flux: f64,
    pub rhs_b0: f64,
    pub rhs_f: f64,
    pub margin: f64,
    pub slack: f64,
}

impl LedgerRow {
    pub fn holds(&self) -> bool {
        self.margin >= -self.slack
    }
}

fn entropy(gd: &GradientDiscretisation, pair: &NonlinearPair, u: &DofField) -> f64 {
    u.iter()
        .zip(gd.dof_measures())
        .map(|(&s, m)| m * pair.big_b_of_beta(s))
        .sum()
}

pub fn energy_ledger(gd: &GradientDiscretisation, spec: &ProblemSpec, theta: f64, traj: &Trajectory) -> Vec<LedgerRow> {
    let pair = &spec.pair;
    let rhs_b0 = entropy(gd, pair, &traj.states[0]);
    let mut lhs_flux = 0.0;
    let mut rhs_f = 0.0;
    let mut rows = Vec::with_capacity(traj.states.len());
    let make = |time, lhs_b: f64, lhs_flux: f64, rhs_f: f64| LedgerRow {
        time,
        lhs_b,
        lhs_flux,
        rhs_b0,
        rhs_f,
        margin: rhs_b0 + rhs_f - lhs_b - lhs_flux,
        slack: LEDGER_SLACK * (1.0 + lhs_b.abs() + lhs_flux.abs() + rhs_b0.abs() + rhs_f.abs()),
    };
    rows.push(make(0.0, rhs_b0, 0.0, 0.0));
    let nodes = traj.grid.nodes();
    for n in 0..traj.grid.steps() {
        let (t0, t1) = (nodes[n], nodes[n + 1]);
        let dt = t1 - t0;
        let (prev, next) = (&traj.states[n], &traj.states[n + 1]);
        let u_theta = next * theta + prev * (1.0 - theta);
        let z = next.map(|s| pair.zeta(s));
        lhs_flux += dt * flux_pairing(gd, pair, &spec.op, &u_theta, &z);
        rhs_f += dt * source_vector(gd, spec, t0, t1, theta).dot(&z);
        rows.push(make(t1, entropy(gd, pair, next), lhs_flux, rhs_f));
    }
    rows
}

/// Monitored a priori quantities of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriNorms {
    /// `max_k ∫ B(Π_D β(uᵏ))`
    pub max_entropy: f64,
    /// `‖∇_D ζ(u)‖_{L^p(Ω×(0,T))}`
    pub grad_zeta_lp: f64,
    /// `max_k ‖Π_D β(uᵏ)‖_{L²}`
    pub max_beta_l2: f64,
    /// `Σ δt |δ_D β(u)|_{⋆,D}^{p′}`
    pub dt_dual: f64,
}

pub fn apriori_norms(
    gd: &GradientDiscretisation,
    traj: &Trajectory,
    pair: &NonlinearPair,
) -> Result<AprioriNorms, GdError> {
    let p = gd.p();
    let max_entropy = traj.states.iter().map(|u| entropy(gd, pair, u)).fold(0.0, f64::max);
    let grad_sum: f64 = (0..traj.grid.steps())
        .map(|n| {
            let z = traj.states[n + 1].map(|s| pair.zeta(s));
            traj.grid.dt(n) * gd.gradient_norm(&z, p).powf(p)
        })
        .sum();
    let max_beta_l2 = traj
        .states
        .iter()
        .map(|u| gd.reconstruction_norm(&u.map(|s| pair.beta(s)), 2.0))
        .fold(0.0, f64::max);
    Ok(AprioriNorms {
        max_entropy,
        grad_zeta_lp: grad_sum.powf(1.0 / p),
        max_beta_l2,
        dt_dual: dt_dual_estimate(gd, traj, pair)?,
    })
}

/// `Σₙ δtⁿ⁺½ |δⁿ⁺½ β(u)|_{⋆,D}^{p′}`.
pub fn dt_dual_estimate(gd: &GradientDiscretisation, traj: &Trajectory, pair: &NonlinearPair) -> Result<f64, GdError> {
    let p = gd.p();
    let p_dual = p / (p - 1.0);
    (0..traj.grid.steps()).try_fold(0.0, |acc, n| {
        let d = traj.discrete_derivative(n, |s| pair.beta(s));
        if d.iter().all(|&v| v == 0.0) {
            return Ok(acc);
        }
        Ok(acc + traj.grid.dt(n) * dual_seminorm(gd, &d)?.powf(p_dual))
    })
}

/// `‖Π_D ν(u)(·+τ) − Π_D ν(u)‖²_{L²(Ω×(0,T−τ))}`, integrated exactly over the
/// partition generated by the nodes and their `τ`-shifts.
pub fn time_translate_norm(gd: &GradientDiscretisation, traj: &Trajectory, pair: &NonlinearPair, tau: f64) -> f64 {
    let end = traj.grid.final_time() - tau;
    if !(tau > 0.0) || end <= 0.0 {
        return 0.0;
    }
    let nu: Vec<DofField> = traj.states.iter().map(|u| u.map(|s| pair.nu(s))).collect();
    let mut cuts: Vec<f64> = traj
        .grid
        .nodes()
        .iter()
        .flat_map(|&t| [t, t - tau])
        .filter(|&t| t > 0.0 && t < end)
        .chain([0.0, end])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let index = |t: f64| traj.grid.interval_of(t) + 1;
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let (a, b) = (&nu[index(mid)], &nu[index(mid + tau)]);
            let sq: f64 = a
                .iter()
                .zip(b.iter())
                .zip(gd.dof_measures())
                .map(|((x, y), m)| m * (y - x) * (y - x))
                .sum();
            (w[1] - w[0]) * sq
        })
        .sum()
}

/// Per-level values of `∫∫ Π_D β(u) Π_D ζ(u) φ` and their distance to a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub values: Vec<f64>,
    pub reference: f64,
    /// `true` when the reference is the finest level rather than an exact value
    pub reference_is_finest: bool,
    pub gaps: Vec<f64>,
}

/// `∫_0^T ∫_Ω Π_D β(u) Π_D ζ(u) φ(x, t)` with Gauss quadrature in time.
pub fn product_integral(
    gd: &GradientDiscretisation,
    traj: &Trajectory,
    pair: &NonlinearPair,
    phi: &dyn Fn(Vec2, f64) -> f64,
) -> f64 {
    let nodes = traj.grid.nodes();
    (0..traj.grid.steps())
        .map(|n| {
            let u = &traj.states[n + 1];
            gd.pieces()
                .iter()
                .enumerate()
                .filter_map(|(k, pc)| pc.dof.map(|i| (k, i)))
                .map(|(k, i)| {
                    let prod = pair.beta(u[i]) * pair.zeta(u[i]);
                    if prod == 0.0 {
                        return 0.0;
                    }
                    let weight: f64 = gauss_time(nodes[n], nodes[n + 1])
                        .map(|(t, wt)| wt * gd.piece_quadrature(k).iter().map(|(x, w)| w * phi(*x, t)).sum::<f64>())
                        .sum();
                    prod * weight
                })
                .sum::<f64>()
        })
        .sum()
}

/// Gaps of every level to `reference`, or to the finest level when no
/// reference is supplied (the finest level is then excluded from the gaps).
pub fn compensated_product_probe(
    levels: &[(&GradientDiscretisation, &Trajectory)],
    pair: &NonlinearPair,
    phi: &dyn Fn(Vec2, f64) -> f64,
    reference: Option<f64>,
) -> ProbeReport {
    let values: Vec<f64> = levels
        .iter()
        .map(|(gd, traj)| product_integral(gd, traj, pair, phi))
        .collect();
    let (reference, compared) = match reference {
        Some(r) => (r, &values[..]),
        None => (*values.last().unwrap_or(&0.0), &values[..values.len().saturating_sub(1)]),
    };
    let gaps: Vec<f64> = compared.iter().map(|v| (v - reference).abs()).collect();
    ProbeReport {
        reference_is_finest: gaps.len() < levels.len(),
        gaps,
        values,
        reference,
    }
}

/// Weighted L² norm of `(β̄ − ζ̄)/2 − (β(w) − ζ(w))/2` on shared quadrature
/// points with weights `weights`.
pub fn minty_residual(pair: &NonlinearPair, w: &[f64], beta_bar: &[f64], zeta_bar: &[f64], weights: &[f64]) -> f64 {
    w.iter()
        .zip(beta_bar)
        .zip(zeta_bar)
        .zip(weights)
        .map(|(((&w, &b), &z), &q)| {
            let d = 0.5 * (b - z) - 0.5 * (pair.beta(w) - pair.zeta(w));
            q * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `w` with `(β + ζ)(w) = s`, pointwise, choosing the root closest to 0.
pub fn recover_from_sum(pair: &NonlinearPair, sums: &[f64]) -> Result<Vec<f64>, PairError> {
    let total = pair.beta_fn().sum(pair.zeta_fn());
    sums.iter().map(|&s| total.closest_root(s)).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::flux::LerayLionsOperator;
    use crate::gd::TimeGrid;
    use crate::instances::{build_mass_lumped_p1_1d, Mesh1D};
    use crate::scheme::{solve, SolverConfig};

    fn heat_one_dof() -> (GradientDiscretisation, ProblemSpec, Trajectory) {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap();
        let mut spec = ProblemSpec::zero(NonlinearPair::identity(), LerayLionsOperator::laplace(), 0.5);
        spec.initial = Arc::new(|_| 1.0);
        let traj = solve(&gd, &TimeGrid::uniform(0.5, 2).unwrap(), &spec, &SolverConfig::default()).unwrap();
        (gd, spec, traj)
    }

    #[test]
    fn ledger_of_heat_one_dof_by_hand() {
        let (gd, spec, traj) = heat_one_dof();
        let rows = energy_ledger(&gd, &spec, 1.0, &traj);
        // B(z) = z²/2, m = 1/2, ∫a·∇ζ = 4u², δt = 1/4
        let (u1, u2) = (1.0 / 3.0, 1.0 / 9.0);
        assert!((rows[0].lhs_b - 0.25).abs() < 1e-14);
        assert!((rows[1].lhs_b - 0.25 * u1 * u1).abs() < 1e-14);
        assert!((rows[1].lhs_flux - u1 * u1).abs() < 1e-14);
        assert!((rows[2].lhs_flux - u1 * u1 - u2 * u2).abs() < 1e-14);
        assert!(rows.iter().all(|r| r.rhs_f == 0.0 && r.holds()));
        assert!(rows[2].margin > 1e-3);
    }

    #[test]
    fn zero_problem_ledger_and_norms_vanish() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 6).unwrap(), 2.0).unwrap();
        let spec = ProblemSpec::zero(NonlinearPair::stefan(), LerayLionsOperator::laplace(), 1.0);
        let traj = solve(&gd, &TimeGrid::uniform(1.0, 4).unwrap(), &spec, &SolverConfig::default()).unwrap();
        for r in energy_ledger(&gd, &spec, 1.0, &traj) {
            assert_eq!((r.lhs_b, r.lhs_flux, r.rhs_b0, r.rhs_f, r.margin), (0.0, 0.0, 0.0, 0.0, 0.0));
        }
        let n = apriori_norms(&gd, &traj, &spec.pair).unwrap();
        assert_eq!((n.max_entropy, n.grad_zeta_lp, n.max_beta_l2, n.dt_dual), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(time_translate_norm(&gd, &traj, &spec.pair, 0.3), 0.0);
    }

    #[test]
    fn dual_estimate_of_heat_one_dof() {
        let (gd, spec, traj) = heat_one_dof();
        // steps: |δβ|⋆ = 0.25 · (2/3)/0.25 and 0.25 · (2/9)/0.25
        let v = dt_dual_estimate(&gd, &traj, &spec.pair).unwrap();
        assert!((v - 10.0 / 81.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn time_translate_matches_sampling() {
        let (gd, spec, traj) = heat_one_dof();
        let tau = 0.25;
        let exact = time_translate_norm(&gd, &traj, &spec.pair, tau);
        assert!((exact - 1.0 / 162.0).abs() < 1e-14);
        let n = 10_000;
        let end = 0.5 - tau;
        let sampled: f64 = (0..n)
            .map(|k| {
                let t = (k as f64 + 0.5) * end / n as f64;
                let d = traj.state_at(t + tau)[0] - traj.state_at(t)[0];
                0.5 * d * d * end / n as f64
            })
            .sum();
        assert!((exact - sampled).abs() < 1e-6);
        assert_eq!(time_translate_norm(&gd, &traj, &spec.pair, 0.5), 0.0);
    }

    #[test]
    fn minty_round_trip_and_perturbation() {
        let pair = NonlinearPair::doubly_degenerate();
        let n = 200;
        let weights = vec![1.0 / n as f64; n];
        let w: Vec<f64> = (0..n).map(|k| -2.0 + 4.0 * k as f64 / n as f64).collect();
        let b: Vec<f64> = w.iter().map(|&s| pair.beta(s)).collect();
        let z: Vec<f64> = w.iter().map(|&s| pair.zeta(s)).collect();
        assert_eq!(minty_residual(&pair, &w, &b, &z, &weights), 0.0);
        let sums: Vec<f64> = b.iter().zip(&z).map(|(x, y)| x + y).collect();
        let back = recover_from_sum(&pair, &sums).unwrap();
        assert!(minty_residual(&pair, &back, &b, &z, &weights) <= 1e-10);
        let zp: Vec<f64> = z.iter().enumerate().map(|(k, v)| if k < n / 2 { v + 0.1 } else { *v }).collect();
        let r = minty_residual(&pair, &w, &b, &zp, &weights);
        assert!((r - 0.05 * 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn probe_with_zero_weight() {
        let (gd, spec, traj) = heat_one_dof();
        let r = compensated_product_probe(&[(&gd, &traj), (&gd, &traj)], &spec.pair, &|_, _| 0.0, None);
        assert_eq!(r.values, vec![0.0, 0.0]);
        assert_eq!(r.gaps, vec![0.0]);
        assert!(r.reference_is_finest);
    }

    #[test]
    fn probe_equals_square_integral_for_heat() {
        let (gd, spec, traj) = heat_one_dof();
        // ∫∫ (Π u)² with m = 1/2, δt = 1/4
        let v = product_integral(&gd, &traj, &spec.pair, &|_, _| 1.0);
        let expect = 0.25 * 0.5 * (1.0 / 9.0 + 1.0 / 81.0);
        assert!((v - expect).abs() < 1e-14);
    }
}
