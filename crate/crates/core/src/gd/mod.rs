//! Space–time gradient discretisations.
//!
//! A [`GradientDiscretisation`] is described by a partition of the domain into
//! pieces, each owned by one degree of freedom (its value is reconstructed
//! there) or by the boundary (reconstructed as 0), and by gradient cells on
//! which the discrete gradient is constant. Every piece lies inside a single
//! gradient cell, which is what lets nonlinear fluxes be integrated exactly
//! piece by piece.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::geometry::Region;
use crate::Vec2;

pub mod dual;
pub mod indicators;

pub use dual::{dual_norm_of_functional, dual_seminorm, dual_seminorm_bracket, norm_coercivity, Bracket};
pub use indicators::{
    compactness_modulus, consistency_defect, interpolation_defect, limit_conformity_defect,
    translate_difference_norm, translation_overlaps, BoundKind, IndicatorValue,
};

/// Vector of degree-of-freedom values.
pub type DofField = DVector<f64>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GdError {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("no convergence after {iterations} iterations (best bound {best}, relative gap {gap:e})")]
    NoConvergence { best: f64, gap: f64, iterations: usize },
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
}

/// Part of the domain on which the reconstruction is constant.
#[derive(Debug, Clone, Serialize)]
pub struct CellPiece {
    /// Owning dof, or `None` for boundary pieces carrying the value 0.
    pub dof: Option<usize>,
    /// Gradient cell containing the piece.
    pub cell: usize,
    pub region: Region,
    pub measure: f64,
}

/// Gradient cell: `∇_D u = Σ coeff · u_dof` on the cell.
#[derive(Debug, Clone, Serialize)]
pub struct GradCell {
    pub region: Region,
    pub measure: f64,
    pub entries: Vec<(usize, Vec2)>,
}

#[derive(Debug)]
pub struct GradientDiscretisation {
    pub name: String,
    dim: usize,
    p: f64,
    dof_count: usize,
    dof_points: Vec<Vec2>,
    pieces: Vec<CellPiece>,
    piece_quad: Vec<Vec<(Vec2, f64)>>,
    cells: Vec<GradCell>,
    cell_quad: Vec<Vec<(Vec2, f64)>>,
    cell_pieces: Vec<Vec<usize>>,
    dof_measure: Vec<f64>,
    domain_measure: f64,
    h: f64,
    gram_chol: OnceLock<Option<Cholesky<f64, Dyn>>>,
}

impl Clone for GradientDiscretisation {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            dim: self.dim,
            p: self.p,
            dof_count: self.dof_count,
            dof_points: self.dof_points.clone(),
            pieces: self.pieces.clone(),
            piece_quad: self.piece_quad.clone(),
            cells: self.cells.clone(),
            cell_quad: self.cell_quad.clone(),
            cell_pieces: self.cell_pieces.clone(),
            dof_measure: self.dof_measure.clone(),
            domain_measure: self.domain_measure,
            h: self.h,
            gram_chol: OnceLock::new(),
        }
    }
}

impl GradientDiscretisation {
    /// Assembles a discretisation from its pieces and gradient cells.
    ///
    /// `dof_points` are the nodes used by [`Self::nodal_interpolant`].
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        p: f64,
        dof_points: Vec<Vec2>,
        pieces: Vec<CellPiece>,
        cells: Vec<GradCell>,
        h: f64,
    ) -> Result<Self, GdError> {
        if !(p > 1.0) {
            return Err(GdError::DegenerateMesh(format!("exponent p = {p} must exceed 1")));
        }
        let dof_count = dof_points.len();
        let mut dof_measure = vec![0.0; dof_count];
        let mut cell_pieces = vec![Vec::new(); cells.len()];
        for (k, piece) in pieces.iter().enumerate() {
            if !(piece.measure > 0.0) {
                return Err(GdError::DegenerateMesh(format!("piece {k} has measure {}", piece.measure)));
            }
            if piece.cell >= cells.len() {
                return Err(GdError::DegenerateMesh(format!("piece {k} refers to missing cell")));
            }
            cell_pieces[piece.cell].push(k);
            if let Some(i) = piece.dof {
                if i >= dof_count {
                    return Err(GdError::DegenerateMesh(format!("piece {k} refers to missing dof {i}")));
                }
                dof_measure[i] += piece.measure;
            }
        }
        if let Some(i) = dof_measure.iter().position(|&m| m <= 0.0) {
            return Err(GdError::DegenerateMesh(format!("dof {i} owns no region")));
        }
        for (k, cell) in cells.iter().enumerate() {
            if !(cell.measure > 0.0) {
                return Err(GdError::DegenerateMesh(format!("cell {k} has measure {}", cell.measure)));
            }
            if cell.entries.iter().any(|(i, _)| *i >= dof_count) {
                return Err(GdError::DegenerateMesh(format!("cell {k} refers to missing dof")));
            }
        }
        let piece_quad = pieces.iter().map(|pc| pc.region.quadrature()).collect();
        let cell_quad = cells.iter().map(|c| c.region.quadrature()).collect();
        let domain_measure = cells.iter().map(|c| c.measure).sum();
        Ok(Self {
            name: name.into(),
            dim,
            p,
            dof_count,
            dof_points,
            pieces,
            piece_quad,
            cells,
            cell_quad,
            cell_pieces,
            dof_measure,
            domain_measure,
            h,
            gram_chol: OnceLock::new(),
        })
    }

    /// Same discretisation, norms measured with another exponent.
    pub fn with_p(&self, p: f64) -> Self {
        let mut out = self.clone();
        out.p = p;
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain_measure(&self) -> f64 {
        self.domain_measure
    }

    pub fn pieces(&self) -> &[CellPiece] {
        &self.pieces
    }

    pub fn piece_quadrature(&self, k: usize) -> &[(Vec2, f64)] {
        &self.piece_quad[k]
    }

    pub fn cells(&self) -> &[GradCell] {
        &self.cells
    }

    pub fn cell_quadrature(&self, k: usize) -> &[(Vec2, f64)] {
        &self.cell_quad[k]
    }

    /// Indices of the pieces inside gradient cell `k`.
    pub fn cell_pieces(&self, k: usize) -> &[usize] {
        &self.cell_pieces[k]
    }

    /// `meas(Ω_i)`, the lumped mass.
    pub fn dof_measures(&self) -> &[f64] {
        &self.dof_measure
    }

    pub fn dof_points(&self) -> &[Vec2] {
        &self.dof_points
    }

    pub fn zeros(&self) -> DofField {
        DofField::zeros(self.dof_count)
    }

    pub fn check_len(&self, u: &DofField) -> Result<(), GdError> {
        if u.len() != self.dof_count {
            return Err(GdError::DimensionMismatch {
                expected: self.dof_count,
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Value of `Π_D u` on each piece.
    pub fn reconstruct(&self, u: &DofField) -> Result<ReconstructedField<'_>, GdError> {
        self.check_len(u)?;
        let values = self
            .pieces
            .iter()
            .map(|pc| pc.dof.map_or(0.0, |i| u[i]))
            .collect();
        Ok(ReconstructedField { gd: self, values })
    }

    /// `∇_D u` on each gradient cell.
    pub fn gradient(&self, u: &DofField) -> Result<Vec<Vec2>, GdError> {
        self.check_len(u)?;
        Ok(self.gradient_unchecked(u))
    }

    pub(crate) fn gradient_unchecked(&self, u: &DofField) -> Vec<Vec2> {
        self.cells
            .iter()
            .map(|c| {
                c.entries.iter().fold([0.0, 0.0], |acc, (i, g)| {
                    [acc[0] + g[0] * u[*i], acc[1] + g[1] * u[*i]]
                })
            })
            .collect()
    }

    /// `‖∇_D u‖_{L^q}`.
    pub fn gradient_norm(&self, u: &DofField, q: f64) -> f64 {
        let grads = self.gradient_unchecked(u);
        let s: f64 = self
            .cells
            .iter()
            .zip(&grads)
            .map(|(c, g)| c.measure * g[0].hypot(g[1]).powf(q))
            .sum();
        s.powf(1.0 / q)
    }

    /// `‖Π_D u‖_{L^q}`.
    pub fn reconstruction_norm(&self, u: &DofField, q: f64) -> f64 {
        let s: f64 = self
            .dof_measure
            .iter()
            .zip(u.iter())
            .map(|(m, v)| m * v.abs().powf(q))
            .sum();
        s.powf(1.0 / q)
    }

    /// `∫ Π_D w Π_D z`.
    pub fn l2_pairing(&self, w: &DofField, z: &DofField) -> f64 {
        self.dof_measure
            .iter()
            .zip(w.iter().zip(z.iter()))
            .map(|(m, (a, b))| m * a * b)
            .sum()
    }

    /// Lumped mass applied to `w`.
    pub fn mass_apply(&self, w: &DofField) -> DofField {
        DofField::from_iterator(
            self.dof_count,
            self.dof_measure.iter().zip(w.iter()).map(|(m, v)| m * v),
        )
    }

    /// `b_j = Σ_K |K| σ_K · g_{K,j}`, the transpose of the gradient map
    /// weighted by cell measures.
    pub fn gradient_transpose(&self, sigma: &[Vec2]) -> DofField {
        let mut b = self.zeros();
        for (c, s) in self.cells.iter().zip(sigma) {
            for (i, g) in &c.entries {
                b[*i] += c.measure * (s[0] * g[0] + s[1] * g[1]);
            }
        }
        b
    }

    /// `A_ij = ∫ ∇_D e_i · ∇_D e_j`.
    pub fn gradient_gram(&self) -> DMatrix<f64> {
        let n = self.dof_count;
        let mut a = DMatrix::zeros(n, n);
        for c in &self.cells {
            for (i, gi) in &c.entries {
                for (j, gj) in &c.entries {
                    a[(*i, *j)] += c.measure * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
            }
        }
        a
    }

    pub(crate) fn gram_cholesky(&self) -> Result<&Cholesky<f64, Dyn>, GdError> {
        self.gram_chol
            .get_or_init(|| Cholesky::new(self.gradient_gram()))
            .as_ref()
            .ok_or_else(|| GdError::SolveFailure("gradient Gram matrix is singular".into()))
    }

    /// `I_D g`: mean of `g` over each `Ω_i`.
    pub fn interpolate(&self, g: impl Fn(Vec2) -> f64) -> Result<DofField, GdError> {
        let mut acc = vec![0.0; self.dof_count];
        for (pc, quad) in self.pieces.iter().zip(&self.piece_quad) {
            if let Some(i) = pc.dof {
                acc[i] += quad.iter().map(|(x, w)| w * g(*x)).sum::<f64>();
            }
        }
        let out = DofField::from_iterator(
            self.dof_count,
            acc.iter().zip(&self.dof_measure).map(|(a, m)| a / m),
        );
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(GdError::QuadratureFailure(format!("non-finite mean on cell {i}")));
        }
        Ok(out)
    }

    /// Values of `g` at the dof nodes.
    pub fn nodal_interpolant(&self, g: impl Fn(Vec2) -> f64) -> DofField {
        DofField::from_iterator(self.dof_count, self.dof_points.iter().map(|x| g(*x)))
    }

    /// `‖Π_D u − g‖_{L^q(Ω)}` by quadrature on every piece.
    pub fn reconstruction_error(&self, u: &DofField, g: impl Fn(Vec2) -> f64, q: f64) -> f64 {
        let s: f64 = self
            .pieces
            .iter()
            .zip(&self.piece_quad)
            .map(|(pc, quad)| {
                let v = pc.dof.map_or(0.0, |i| u[i]);
                quad.iter().map(|(x, w)| w * (v - g(*x)).abs().powf(q)).sum::<f64>()
            })
            .sum();
        s.powf(1.0 / q)
    }

    /// `‖∇_D u − G‖_{L^q(Ω)}` by quadrature on every cell.
    pub fn gradient_error(&self, u: &DofField, grad: impl Fn(Vec2) -> Vec2, q: f64) -> f64 {
        let grads = self.gradient_unchecked(u);
        let s: f64 = grads
            .iter()
            .zip(&self.cell_quad)
            .map(|(g, quad)| {
                quad.iter()
                    .map(|(x, w)| {
                        let e = grad(*x);
                        w * (g[0] - e[0]).hypot(g[1] - e[1]).powf(q)
                    })
                    .sum::<f64>()
            })
            .sum();
        s.powf(1.0 / q)
    }

    /// Partition and norm checks.
    pub fn check_invariants(&self) -> Result<InvariantReport, GdError> {
        let piece_sum: f64 = self.pieces.iter().map(|pc| pc.measure).sum();
        let partition_defect = (piece_sum - self.domain_measure).abs() / self.domain_measure;
        let mut cell_defect: f64 = 0.0;
        for (k, cell) in self.cells.iter().enumerate() {
            let s: f64 = self.cell_pieces[k].iter().map(|&j| self.pieces[j].measure).sum();
            cell_defect = cell_defect.max((s - cell.measure).abs() / cell.measure);
        }
        if partition_defect > 1e-12 || cell_defect > 1e-12 {
            return Err(GdError::DegenerateMesh(format!(
                "pieces do not partition the domain (relative defects {partition_defect:e}, {cell_defect:e})"
            )));
        }
        if self.dof_count > 0 {
            self.gram_cholesky()?;
        }
        Ok(InvariantReport {
            dof_count: self.dof_count,
            domain_measure: self.domain_measure,
            partition_defect,
            dof_measure_sum: self.dof_measure.iter().sum(),
            gradient_is_norm: true,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub dof_count: usize,
    pub domain_measure: f64,
    pub partition_defect: f64,
    pub dof_measure_sum: f64,
    pub gradient_is_norm: bool,
}

/// `Π_D u`, stored as one value per piece.
#[derive(Debug, Clone)]
pub struct ReconstructedField<'a> {
    gd: &'a GradientDiscretisation,
    pub values: Vec<f64>,
}

impl ReconstructedField<'_> {
    /// Value at `x`; `None` outside the domain. On shared boundaries the first
    /// piece found wins.
    pub fn value_at(&self, x: Vec2) -> Option<f64> {
        self.gd
            .pieces
            .iter()
            .position(|pc| pc.region.contains(x))
            .map(|k| self.values[k])
    }

    /// Values at every quadrature point, piece by piece.
    pub fn at_quadrature_points(&self) -> Vec<f64> {
        self.gd
            .piece_quad
            .iter()
            .zip(&self.values)
            .flat_map(|(q, v)| std::iter::repeat_n(*v, q.len()))
            .collect()
    }

    pub fn map(&self, chi: impl Fn(f64) -> f64) -> Self {
        Self {
            gd: self.gd,
            values: self.values.iter().map(|&v| chi(v)).collect(),
        }
    }

    pub fn integral(&self) -> f64 {
        self.gd
            .pieces
            .iter()
            .zip(&self.values)
            .map(|(pc, v)| pc.measure * v)
            .sum()
    }
}

/// `χ(u)` dof by dof.
pub fn apply_nonlinearity(u: &DofField, chi: impl Fn(f64) -> f64) -> DofField {
    u.map(chi)
}

/// Time nodes `0 = t⁰ < … < tᴺ = T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self, GdError> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(GdError::DegenerateMesh(
                "time grid needs t⁰ = 0 and at least one step".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GdError::DegenerateMesh("time nodes must increase strictly".into()));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(final_time: f64, steps: usize) -> Result<Self, GdError> {
        if steps == 0 || !(final_time > 0.0) {
            return Err(GdError::DegenerateMesh(format!(
                "uniform grid needs T > 0 and N ≥ 1 (got T={final_time}, N={steps})"
            )));
        }
        let dt = final_time / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|n| n as f64 * dt).collect();
        nodes[steps] = final_time;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// `δt^{(n+1/2)} = t^{n+1} − t^{n}`.
    pub fn dt(&self, n: usize) -> f64 {
        self.nodes[n + 1] - self.nodes[n]
    }

    pub fn step_sizes(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn dt_max(&self) -> f64 {
        self.step_sizes().into_iter().fold(0.0, f64::max)
    }

    /// Index `n` with `t ∈ (tⁿ, tⁿ⁺¹]`; 0 for `t ≤ 0` and `N − 1` beyond `T`.
    pub fn interval_of(&self, t: f64) -> usize {
        let k = self.nodes.partition_point(|&s| s < t);
        k.saturating_sub(1).min(self.steps() - 1)
    }
}

/// Per-step solver record.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StepTelemetry {
    pub newton_iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub line_search_halvings: usize,
    pub used_fixed_point: bool,
}

/// `(uⁿ)_{n=0..N}` on a time grid, piecewise constant in time on `(tⁿ, tⁿ⁺¹]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DofField>,
    pub telemetry: Vec<StepTelemetry>,
}

impl Trajectory {
    /// `u` at time `t` with the piecewise-constant convention (`u⁰` at `t = 0`).
    pub fn state_at(&self, t: f64) -> &DofField {
        if t <= 0.0 {
            return &self.states[0];
        }
        &self.states[self.grid.interval_of(t) + 1]
    }

    /// `δ^{(n+1/2)} χ(u) = (χ(uⁿ⁺¹) − χ(uⁿ)) / δt`.
    pub fn discrete_derivative(&self, n: usize, chi: impl Fn(f64) -> f64) -> DofField {
        let dt = self.grid.dt(n);
        (self.states[n + 1].map(&chi) - self.states[n].map(&chi)) / dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_mass_lumped_p1_1d, Mesh1D};

    fn two_element() -> GradientDiscretisation {
        build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap()
    }

    #[test]
    fn reconstruct_examples() {
        let gd = two_element();
        let u = DofField::from_vec(vec![3.0]);
        let f = gd.reconstruct(&u).unwrap();
        assert_eq!(f.value_at([0.5, 0.0]), Some(3.0));
        assert_eq!(f.value_at([0.3, 0.0]), Some(3.0));
        assert_eq!(f.value_at([0.1, 0.0]), Some(0.0));
        assert_eq!(f.value_at([0.9, 0.0]), Some(0.0));
        assert!((f.integral() - 1.5).abs() < 1e-15);
        assert!(matches!(
            gd.reconstruct(&DofField::zeros(2)),
            Err(GdError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn composition_commutes_exactly() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 3).unwrap(), 2.0).unwrap();
        let u = DofField::from_vec(vec![-1.0, 2.0]);
        let lhs = gd.reconstruct(&apply_nonlinearity(&u, f64::abs)).unwrap();
        let rhs = gd.reconstruct(&u).unwrap().map(f64::abs);
        assert_eq!(lhs.at_quadrature_points(), rhs.at_quadrature_points());
    }

    #[test]
    fn apply_nonlinearity_examples() {
        let u = DofField::from_vec(vec![0.5, 2.0]);
        assert_eq!(apply_nonlinearity(&u, |s| s), u);
        let stefan = crate::nonlinearity::NonlinearPair::stefan();
        assert_eq!(apply_nonlinearity(&u, |s| stefan.beta(s)), u);
        assert_eq!(
            apply_nonlinearity(&u, |s| stefan.zeta(s)),
            DofField::from_vec(vec![0.0, 1.0])
        );
    }

    #[test]
    fn interpolation_is_cell_mean() {
        let gd = two_element();
        assert!((gd.interpolate(|x| x[0]).unwrap()[0] - 0.5).abs() < 1e-15);
        assert!((gd.interpolate(|_| 4.0).unwrap()[0] - 4.0).abs() < 1e-15);
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 7).unwrap(), 2.0).unwrap();
        assert!(gd.interpolate(|_| 2.5).unwrap().iter().all(|&v| (v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn time_grid_basics() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(g.steps(), 4);
        assert!((g.dt_max() - 0.25).abs() < 1e-15);
        assert_eq!(g.interval_of(0.25), 0);
        assert_eq!(g.interval_of(0.26), 1);
        assert_eq!(g.interval_of(1.0), 3);
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5]).is_err());
    }
}
