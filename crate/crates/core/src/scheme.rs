//! Implicit (and θ-) gradient scheme.
//!
//! For every time interval the unknown `u = uⁿ⁺¹` solves, for each dof `j`,
//!
//! ```text
//! R_j(u) = m_j (β(u_j) − β(uⁿ_j)) / δt
//!        + Σ_K ∫_K a(x, Π_D ν(u^θ), ∇_D ζ(u^θ)) · g_{K,j}
//!        − ∫_{Ω_j} f̄ = 0,
//! ```
//!
//! with `u^θ = θ u + (1 − θ) uⁿ`, `m_j = meas(Ω_j)` and `f̄` the time average of
//! `f` (the value at `tⁿ⁺¹` when θ = 1). Steps are solved by Newton's method
//! with Armijo backtracking and a damped fixed-point fallback.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::flux::LerayLionsOperator;
use crate::gd::{DofField, GdError, GradientDiscretisation, StepTelemetry, TimeGrid, Trajectory};
use crate::nonlinearity::NonlinearPair;
use crate::quadrature::gauss_time;
use crate::Vec2;

pub type SourceFn = Arc<dyn Fn(Vec2, f64) -> f64 + Send + Sync>;
pub type InitialFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

#[derive(Debug, thiserror::Error, Clone)]
pub enum SchemeError {
    #[error(transparent)]
    Gd(#[from] GdError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("step {step}: no convergence, residual {residual:e}")]
    NoConvergence {
        step: usize,
        residual: f64,
        iterate: DofField,
    },
}

/// `∂t β(u) − div a(x, ν(u), ∇ζ(u)) = f`, `u(0) = u_ini`, on `(0, T)`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub pair: NonlinearPair,
    pub op: LerayLionsOperator,
    pub source: SourceFn,
    pub initial: InitialFn,
    pub final_time: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("pair", &self.pair.name)
            .field("op", &self.op.name)
            .field("final_time", &self.final_time)
            .finish()
    }
}

impl ProblemSpec {
    /// `f ≡ 0`, `u_ini ≡ 0`.
    pub fn zero(pair: NonlinearPair, op: LerayLionsOperator, final_time: f64) -> Self {
        Self {
            pair,
            op,
            source: Arc::new(|_, _| 0.0),
            initial: Arc::new(|_| 0.0),
            final_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub theta: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub backtrack_factor: f64,
    pub max_halvings: usize,
    /// Floor on `β'` inside the Jacobian only.
    pub beta_prime_floor: f64,
    pub fixed_point_sweeps: usize,
    pub fixed_point_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta: 1.0,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            backtrack_factor: 0.5,
            max_halvings: 20,
            beta_prime_floor: 1e-10,
            fixed_point_sweeps: 5000,
            fixed_point_damping: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SchemeError> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(SchemeError::InvalidConfig(format!(
                "theta = {} must lie in [1/2, 1]",
                self.theta
            )));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(SchemeError::InvalidConfig("Newton tolerance and cap must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(SchemeError::InvalidConfig("backtracking factor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Per-dof load `∫_{Ω_j} f̄` on `(t0, t1]`.
pub fn source_vector(
    gd: &GradientDiscretisation,
    spec: &ProblemSpec,
    t0: f64,
    t1: f64,
    theta: f64,
) -> DofField {
    let mut out = gd.zeros();
    let times: Vec<(f64, f64)> = if theta == 1.0 {
        vec![(t1, 1.0)]
    } else {
        gauss_time(t0, t1).map(|(t, w)| (t, w / (t1 - t0))).collect()
    };
    for (k, pc) in gd.pieces().iter().enumerate() {
        if let Some(j) = pc.dof {
            for (x, w) in gd.piece_quadrature(k) {
                for (t, wt) in &times {
                    out[j] += w * wt * (spec.source)(*x, *t);
                }
            }
        }
    }
    out
}

/// Weighted residual norm `sqrt(Σ R_j² / m_j)`.
pub fn residual_norm(gd: &GradientDiscretisation, r: &DofField) -> f64 {
    r.iter()
        .zip(gd.dof_measures())
        .map(|(v, m)| v * v / m)
        .sum::<f64>()
        .sqrt()
}

struct StepContext<'a> {
    gd: &'a GradientDiscretisation,
    spec: &'a ProblemSpec,
    theta: f64,
    dt: f64,
    u_prev: &'a DofField,
    beta_prev: DofField,
    load: DofField,
}

impl StepContext<'_> {
    fn theta_state(&self, u: &DofField) -> DofField {
        u * self.theta + self.u_prev * (1.0 - self.theta)
    }

    fn residual(&self, u: &DofField) -> DofField {
        let gd = self.gd;
        let pair = &self.spec.pair;
        let op = &self.spec.op;
        let ut = self.theta_state(u);
        let zeta = ut.map(|s| pair.zeta(s));
        let nu = ut.map(|s| pair.nu(s));
        let grads = gd.gradient_unchecked(&zeta);
        let mut r = DofField::from_iterator(
            gd.dof_count(),
            gd.dof_measures()
                .iter()
                .zip(u.iter().zip(self.beta_prev.iter()))
                .map(|(m, (v, bp))| m * (pair.beta(*v) - bp) / self.dt),
        );
        for (k, cell) in gd.cells().iter().enumerate() {
            let xi = grads[k];
            let mut flux = [0.0, 0.0];
            if op.depends_on_xi_only() {
                let a = op.eval([0.0, 0.0], 0.0, xi);
                flux = [cell.measure * a[0], cell.measure * a[1]];
            } else {
                for &pk in gd.cell_pieces(k) {
                    let s = gd.pieces()[pk].dof.map_or(0.0, |i| nu[i]);
                    for (x, w) in gd.piece_quadrature(pk) {
                        let a = op.eval(*x, s, xi);
                        flux[0] += w * a[0];
                        flux[1] += w * a[1];
                    }
                }
            }
            for (j, g) in &cell.entries {
                r[*j] += flux[0] * g[0] + flux[1] * g[1];
            }
        }
        r - &self.load
    }

    fn jacobian(&self, u: &DofField, floor: f64) -> DMatrix<f64> {
        let gd = self.gd;
        let pair = &self.spec.pair;
        let op = &self.spec.op;
        let n = gd.dof_count();
        let ut = self.theta_state(u);
        let zeta = ut.map(|s| pair.zeta(s));
        let dzeta = ut.map(|s| pair.zeta_prime(s));
        let nu = ut.map(|s| pair.nu(s));
        let dnu = ut.map(|s| pair.nu_prime(s));
        let grads = gd.gradient_unchecked(&zeta);
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = gd.dof_measures()[i] * pair.beta_prime(u[i]).max(floor) / self.dt;
        }
        for (k, cell) in gd.cells().iter().enumerate() {
            let xi = grads[k];
            // ∫_K ∂a/∂ξ, and ∫_{piece} ∂a/∂s per owning dof
            let mut jxi = [[0.0; 2]; 2];
            let mut ds: Vec<(usize, Vec2)> = Vec::new();
            if op.depends_on_xi_only() {
                let j = op.jac_xi([0.0, 0.0], 0.0, xi);
                for r in 0..2 {
                    for c in 0..2 {
                        jxi[r][c] = cell.measure * j[r][c];
                    }
                }
            } else {
                for &pk in gd.cell_pieces(k) {
                    let dof = gd.pieces()[pk].dof;
                    let s = dof.map_or(0.0, |i| nu[i]);
                    let mut acc = [0.0, 0.0];
                    for (x, w) in gd.piece_quadrature(pk) {
                        let j = op.jac_xi(*x, s, xi);
                        for r in 0..2 {
                            for c in 0..2 {
                                jxi[r][c] += w * j[r][c];
                            }
                        }
                        let d = op.ds(*x, s, xi);
                        acc[0] += w * d[0];
                        acc[1] += w * d[1];
                    }
                    if let Some(i) = dof {
                        ds.push((i, acc));
                    }
                }
            }
            for (i, gi) in &cell.entries {
                let col = [
                    (jxi[0][0] * gi[0] + jxi[0][1] * gi[1]) * dzeta[*i],
                    (jxi[1][0] * gi[0] + jxi[1][1] * gi[1]) * dzeta[*i],
                ];
                for (j, gj) in &cell.entries {
                    jac[(*j, *i)] += self.theta * (col[0] * gj[0] + col[1] * gj[1]);
                }
            }
            for (i, d) in &ds {
                for (j, gj) in &cell.entries {
                    jac[(*j, *i)] += self.theta * dnu[*i] * (d[0] * gj[0] + d[1] * gj[1]);
                }
            }
        }
        jac
    }
}

/// `∫ a(x, Π_D ν(u), ∇_D ζ(u)) · ∇_D z`.
pub fn flux_pairing(
    gd: &GradientDiscretisation,
    pair: &NonlinearPair,
    op: &LerayLionsOperator,
    u: &DofField,
    z: &DofField,
) -> f64 {
    let zeta = u.map(|s| pair.zeta(s));
    let nu = u.map(|s| pair.nu(s));
    let grads = gd.gradient_unchecked(&zeta);
    let test = gd.gradient_unchecked(z);
    let mut total = 0.0;
    for (k, cell) in gd.cells().iter().enumerate() {
        let (xi, g) = (grads[k], test[k]);
        if op.depends_on_xi_only() {
            let a = op.eval([0.0, 0.0], 0.0, xi);
            total += cell.measure * (a[0] * g[0] + a[1] * g[1]);
            continue;
        }
        for &pk in gd.cell_pieces(k) {
            let s = gd.pieces()[pk].dof.map_or(0.0, |i| nu[i]);
            for (x, w) in gd.piece_quadrature(pk) {
                let a = op.eval(*x, s, xi);
                total += w * (a[0] * g[0] + a[1] * g[1]);
            }
        }
    }
    total
}

/// `R(u_next)` for one step on `(t0, t1]`.
pub fn residual(
    gd: &GradientDiscretisation,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    u_prev: &DofField,
    u_next: &DofField,
    interval: (f64, f64),
) -> Result<DofField, SchemeError> {
    gd.check_len(u_prev)?;
    gd.check_len(u_next)?;
    let ctx = context(gd, spec, cfg, u_prev, interval);
    Ok(ctx.residual(u_next))
}

fn context<'a>(
    gd: &'a GradientDiscretisation,
    spec: &'a ProblemSpec,
    cfg: &SolverConfig,
    u_prev: &'a DofField,
    (t0, t1): (f64, f64),
) -> StepContext<'a> {
    StepContext {
        gd,
        spec,
        theta: cfg.theta,
        dt: t1 - t0,
        u_prev,
        beta_prev: u_prev.map(|s| spec.pair.beta(s)),
        load: source_vector(gd, spec, t0, t1, cfg.theta),
    }
}

/// Solves one step; `step_index` only labels errors.
pub fn step(
    gd: &GradientDiscretisation,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    u_prev: &DofField,
    interval: (f64, f64),
    step_index: usize,
) -> Result<(DofField, StepTelemetry), SchemeError> {
    cfg.validate()?;
    gd.check_len(u_prev)?;
    if !(interval.1 > interval.0) {
        return Err(SchemeError::InvalidConfig("empty time interval".into()));
    }
    let ctx = context(gd, spec, cfg, u_prev, interval);
    let mut tel = StepTelemetry::default();
    let mut u = u_prev.clone();
    if gd.dof_count() == 0 {
        return Ok((u, tel));
    }
    let mut r = ctx.residual(&u);
    let mut norm = residual_norm(gd, &r);
    tel.residual_history.push(norm);

    let mut newton_ok = false;
    for _ in 0..cfg.newton_max_iter {
        if norm <= cfg.newton_tol {
            newton_ok = true;
            break;
        }
        let jac = ctx.jacobian(&u, cfg.beta_prime_floor);
        let Some(delta) = jac.lu().solve(&(-&r)) else {
            break;
        };
        tel.newton_iterations += 1;
        let mut t = 1.0;
        let mut accepted = None;
        for halving in 0..=cfg.max_halvings {
            let cand = &u + &delta * t;
            let rc = ctx.residual(&cand);
            let nc = residual_norm(gd, &rc);
            if nc <= (1.0 - 1e-4 * t) * norm || nc <= cfg.newton_tol {
                tel.line_search_halvings += halving;
                accepted = Some((cand, rc, nc));
                break;
            }
            t *= cfg.backtrack_factor;
        }
        match accepted {
            Some((cand, rc, nc)) => {
                u = cand;
                r = rc;
                norm = nc;
                tel.residual_history.push(norm);
            }
            None => break,
        }
    }
    if norm <= cfg.newton_tol {
        newton_ok = true;
    }

    if !newton_ok {
        tel.used_fixed_point = true;
        let jac = ctx.jacobian(&u, cfg.beta_prime_floor.max(1e-6));
        let diag = jac.diagonal();
        for _ in 0..cfg.fixed_point_sweeps {
            u -= r.component_div(&diag) * cfg.fixed_point_damping;
            r = ctx.residual(&u);
            norm = residual_norm(gd, &r);
            if norm <= cfg.newton_tol || !norm.is_finite() {
                break;
            }
        }
        tel.residual_history.push(norm);
        if !(norm <= cfg.newton_tol) {
            return Err(SchemeError::NoConvergence {
                step: step_index,
                residual: norm,
                iterate: u,
            });
        }
    }
    // independent post-hoc evaluation
    let check = residual_norm(gd, &residual(gd, spec, cfg, u_prev, &u, interval)?);
    tel.final_residual = check;
    if !(check <= cfg.newton_tol) {
        return Err(SchemeError::NoConvergence {
            step: step_index,
            residual: check,
            iterate: u,
        });
    }
    Ok((u, tel))
}

/// `u⁰ = I_D u_ini`, then one [`step`] per interval of the grid.
pub fn solve(
    gd: &GradientDiscretisation,
    grid: &TimeGrid,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<Trajectory, SchemeError> {
    cfg.validate()?;
    let init = spec.initial.clone();
    let u0 = gd.interpolate(move |x| init(x))?;
    let mut states = Vec::with_capacity(grid.steps() + 1);
    let mut telemetry = Vec::with_capacity(grid.steps());
    states.push(u0);
    for n in 0..grid.steps() {
        let interval = (grid.nodes()[n], grid.nodes()[n + 1]);
        let (u, tel) = step(gd, spec, cfg, &states[n], interval, n)?;
        states.push(u);
        telemetry.push(tel);
    }
    Ok(Trajectory {
        grid: grid.clone(),
        states,
        telemetry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_mass_lumped_p1_1d, Mesh1D};

    fn one_dof() -> GradientDiscretisation {
        build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap()
    }

    fn heat_spec(initial: f64) -> ProblemSpec {
        let mut s = ProblemSpec::zero(NonlinearPair::identity(), LerayLionsOperator::laplace(), 0.5);
        s.initial = Arc::new(move |_| initial);
        s
    }

    #[test]
    fn zero_residual_and_zero_trajectory() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 5).unwrap(), 2.0).unwrap();
        let spec = heat_spec(0.0);
        let cfg = SolverConfig::default();
        let z = gd.zeros();
        let r = residual(&gd, &spec, &cfg, &z, &z, (0.0, 0.1)).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
        let traj = solve(&gd, &TimeGrid::uniform(0.5, 5).unwrap(), &spec, &cfg).unwrap();
        assert!(traj.states.iter().all(|u| u.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn heat_one_dof_residual_and_golden_trajectory() {
        let gd = one_dof();
        let spec = heat_spec(1.0);
        let cfg = SolverConfig::default();
        let up = DofField::from_vec(vec![1.0]);
        for u1 in [0.0, 0.3, 2.0] {
            let r = residual(&gd, &spec, &cfg, &up, &DofField::from_vec(vec![u1]), (0.0, 0.25)).unwrap();
            assert!((r[0] - (0.5 * (u1 - 1.0) / 0.25 + 4.0 * u1)).abs() < 1e-14);
        }
        let (u, tel) = step(&gd, &spec, &cfg, &up, (0.0, 0.25), 0).unwrap();
        assert!((u[0] - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(tel.newton_iterations, 1);
        let traj = solve(&gd, &TimeGrid::uniform(0.5, 2).unwrap(), &spec, &cfg).unwrap();
        let vals: Vec<f64> = traj.states.iter().map(|u| u[0]).collect();
        for (v, e) in vals.iter().zip([1.0, 1.0 / 3.0, 1.0 / 9.0]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn plateau_of_zeta_leaves_only_mass_term() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 4).unwrap(), 2.0).unwrap();
        let spec = ProblemSpec::zero(NonlinearPair::doubly_degenerate(), LerayLionsOperator::laplace(), 1.0);
        let cfg = SolverConfig::default();
        let up = DofField::from_vec(vec![0.2, 0.5, 0.9]);
        let un = DofField::from_vec(vec![0.4, 0.1, 0.7]);
        let r = residual(&gd, &spec, &cfg, &up, &un, (0.0, 0.5)).unwrap();
        for i in 0..3 {
            let mass = gd.dof_measures()[i] * (un[i] - up[i]) / 0.5;
            assert!((r[i] - mass).abs() < 1e-15);
        }
    }

    #[test]
    fn p_laplace_newton_is_superlinear() {
        let gd = one_dof();
        let mut spec = ProblemSpec::zero(
            NonlinearPair::identity(),
            LerayLionsOperator::p_laplace(4.0).unwrap(),
            1.0,
        );
        // steady state u₁ = 1: flux 2·(2³)·... balanced by a constant source
        let flux = 2.0 * 0.5 * 2f64.powi(3) * 2.0;
        spec.source = Arc::new(move |_, _| flux / 0.5);
        let cfg = SolverConfig::default();
        let up = DofField::from_vec(vec![0.9]);
        let (u, tel) = step(&gd, &spec, &cfg, &up, (0.0, 0.1), 0).unwrap();
        assert!(tel.final_residual <= 1e-10);
        assert!(!tel.used_fixed_point);
        let h = &tel.residual_history;
        let k = h.len();
        assert!(k >= 3);
        // ratios of successive residuals shrink
        let r1 = h[k - 2] / h[k - 3];
        let r2 = h[k - 1] / h[k - 2];
        assert!(r2 < r1, "{h:?}");
        assert!(u[0] > 0.9 && u[0] < 1.0);
    }

    #[test]
    fn stefan_and_richards_steps_converge() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 16).unwrap(), 2.0).unwrap();
        for pair in [NonlinearPair::stefan(), NonlinearPair::richards(), NonlinearPair::doubly_degenerate()] {
            let mut spec = ProblemSpec::zero(pair, LerayLionsOperator::laplace(), 1.0);
            spec.initial = Arc::new(|x| 3.0 * (std::f64::consts::PI * x[0]).sin());
            spec.source = Arc::new(|_, _| 1.0);
            let traj = solve(&gd, &TimeGrid::uniform(0.2, 4).unwrap(), &spec, &SolverConfig::default()).unwrap();
            assert!(traj.telemetry.iter().all(|t| t.final_residual <= 1e-10));
        }
    }

    #[test]
    fn theta_is_validated() {
        let cfg = SolverConfig {
            theta: 0.3,
            ..SolverConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(SchemeError::InvalidConfig(_))));
    }
}
