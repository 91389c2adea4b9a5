//! Manufactured problems on the unit interval and unit square.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::flux::LerayLionsOperator;
use crate::nonlinearity::NonlinearPair;
use crate::scheme::{ProblemSpec, SourceFn};
use crate::Vec2;

pub type ExactFn = Arc<dyn Fn(Vec2, f64) -> f64 + Send + Sync>;
pub type ExactGradFn = Arc<dyn Fn(Vec2, f64) -> Vec2 + Send + Sync>;

/// Names of the problems known to [`ManufacturedProblem::by_name`].
pub const PROBLEM_NAMES: [&str; 7] = [
    "zero",
    "heat_1d",
    "heat_2d",
    "stefan",
    "richards",
    "p_laplace4",
    "doubly_degenerate",
];

/// A closed-form `ū` with the source that makes it solve the equation.
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub name: String,
    pub dim: usize,
    pub pair: NonlinearPair,
    pub op: LerayLionsOperator,
    pub exact: ExactFn,
    /// `∇ζ(ū)`
    pub grad_zeta: ExactGradFn,
    pub source: SourceFn,
    /// `true` when the source is built by finite-difference stencils
    pub numeric_source: bool,
}

impl fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("pair", &self.pair.name)
            .field("op", &self.op.name)
            .field("numeric_source", &self.numeric_source)
            .finish()
    }
}

/// `s ↦ 1 + s` below 0 and `1 + s³` above: sweeps `ū` across `[0, 1]`
/// while keeping `ζ(ū) = s₊³` smooth.
fn sweep(w: f64) -> f64 {
    if w <= 0.0 {
        1.0 + w
    } else {
        1.0 + w * w * w
    }
}

impl ManufacturedProblem {
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "zero" => Self::zero(),
            "heat_1d" => Self::heat_1d(),
            "heat_2d" => Self::heat_2d(),
            "stefan" => Self::stefan(),
            "richards" => Self::richards(),
            "p_laplace4" => Self::p_laplace4(),
            "doubly_degenerate" => Self::doubly_degenerate(),
            _ => return None,
        })
    }

    pub fn spec(&self, final_time: f64) -> ProblemSpec {
        let exact = self.exact.clone();
        ProblemSpec {
            pair: self.pair.clone(),
            op: self.op.clone(),
            source: self.source.clone(),
            initial: Arc::new(move |x| exact(x, 0.0)),
            final_time,
        }
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            dim: 1,
            pair: NonlinearPair::identity(),
            op: LerayLionsOperator::laplace(),
            exact: Arc::new(|_, _| 0.0),
            grad_zeta: Arc::new(|_, _| [0.0, 0.0]),
            source: Arc::new(|_, _| 0.0),
            numeric_source: false,
        }
    }

    /// `ū = sin(πx) e^{−t}`.
    pub fn heat_1d() -> Self {
        Self {
            name: "heat_1d".into(),
            dim: 1,
            pair: NonlinearPair::identity(),
            op: LerayLionsOperator::laplace(),
            exact: Arc::new(|x, t| (PI * x[0]).sin() * (-t).exp()),
            grad_zeta: Arc::new(|x, t| [PI * (PI * x[0]).cos() * (-t).exp(), 0.0]),
            source: Arc::new(|x, t| (PI * PI - 1.0) * (PI * x[0]).sin() * (-t).exp()),
            numeric_source: false,
        }
    }

    /// `ū = sin(πx) sin(πy) e^{−t}`.
    pub fn heat_2d() -> Self {
        let u = |x: Vec2, t: f64| (PI * x[0]).sin() * (PI * x[1]).sin() * (-t).exp();
        Self {
            name: "heat_2d".into(),
            dim: 2,
            pair: NonlinearPair::identity(),
            op: LerayLionsOperator::laplace(),
            exact: Arc::new(u),
            grad_zeta: Arc::new(|x, t| {
                let e = (-t).exp();
                [
                    PI * (PI * x[0]).cos() * (PI * x[1]).sin() * e,
                    PI * (PI * x[0]).sin() * (PI * x[1]).cos() * e,
                ]
            }),
            source: Arc::new(move |x, t| (2.0 * PI * PI - 1.0) * u(x, t)),
            numeric_source: false,
        }
    }

    /// β = Id with the Stefan ζ; `ū = sweep(w)`, `w = 2 sin(πx)(½ + t) − 1`.
    pub fn stefan() -> Self {
        Self::swept("stefan", NonlinearPair::stefan(), 2.0, |w, wt| {
            if w <= 0.0 {
                wt
            } else {
                3.0 * w * w * wt
            }
        })
    }

    /// Doubly degenerate pair; `ū = sweep(w)`, `w = 2.4 sin(πx)(½ + t) − 1`,
    /// crossing the plateau of ζ near the boundary and that of β inside.
    pub fn doubly_degenerate() -> Self {
        Self::swept("doubly_degenerate", NonlinearPair::doubly_degenerate(), 2.4, |w, wt| {
            if w <= 0.0 {
                wt
            } else if w <= 1.0 {
                0.0
            } else {
                3.0 * w * w * wt
            }
        })
    }

    /// Shared construction for `ū = sweep(amp sin(πx)(½ + t) − 1)`, where
    /// `ζ(ū) = w₊³` and `dbeta(w, w_t) = ∂t β(ū)`.
    fn swept(
        name: &str,
        pair: NonlinearPair,
        amp: f64,
        dbeta: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let w = move |x: Vec2, t: f64| amp * (PI * x[0]).sin() * (0.5 + t) - 1.0;
        Self {
            name: name.into(),
            dim: 1,
            pair,
            op: LerayLionsOperator::laplace(),
            exact: Arc::new(move |x, t| sweep(w(x, t))),
            grad_zeta: Arc::new(move |x, t| {
                let wp = w(x, t).max(0.0);
                let wx = amp * PI * (PI * x[0]).cos() * (0.5 + t);
                [3.0 * wp * wp * wx, 0.0]
            }),
            source: Arc::new(move |x, t| {
                let s = (PI * x[0]).sin();
                let wv = w(x, t);
                let wt = amp * s;
                let wx = amp * PI * (PI * x[0]).cos() * (0.5 + t);
                let wxx = -PI * PI * amp * s * (0.5 + t);
                let wp = wv.max(0.0);
                dbeta(wv, wt) - (6.0 * wp * wx * wx + 3.0 * wp * wp * wxx)
            }),
            numeric_source: false,
        }
    }

    /// ζ = Id with the Richards β; `ū = 2 sin(πx)(½ + t)`.
    pub fn richards() -> Self {
        let u = |x: Vec2, t: f64| 2.0 * (PI * x[0]).sin() * (0.5 + t);
        Self {
            name: "richards".into(),
            dim: 1,
            pair: NonlinearPair::richards(),
            op: LerayLionsOperator::laplace(),
            exact: Arc::new(u),
            grad_zeta: Arc::new(|x, t| [2.0 * PI * (PI * x[0]).cos() * (0.5 + t), 0.0]),
            source: Arc::new(move |x, t| {
                let ut = 2.0 * (PI * x[0]).sin();
                let dbeta = if u(x, t) > 1.0 { ut } else { 0.0 };
                dbeta + PI * PI * u(x, t)
            }),
            numeric_source: false,
        }
    }

    /// p-Laplace with p = 4, `ū = sin(πx)(1 + t)`, source by stencils.
    pub fn p_laplace4() -> Self {
        let pair = NonlinearPair::identity();
        let op = LerayLionsOperator::p_laplace(4.0).expect("p = 4 is valid");
        let exact: ExactFn = Arc::new(|x, t| (PI * x[0]).sin() * (1.0 + t));
        Self {
            name: "p_laplace4".into(),
            dim: 1,
            source: numeric_source(&pair, &op, 1, exact.clone()),
            pair,
            op,
            exact,
            grad_zeta: Arc::new(|x, t| [PI * (PI * x[0]).cos() * (1.0 + t), 0.0]),
            numeric_source: true,
        }
    }
}

/// Spatial step of the divergence stencils.
pub const STENCIL_H: f64 = 1e-3;
/// Time step of the time-derivative stencil.
pub const STENCIL_DT: f64 = 1e-4;

/// Sixth-order central first derivative of `g` at `x` with step `h`.
pub fn d6(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    const C: [(f64, f64); 3] = [(1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
    C.iter().map(|&(k, c)| c * (g(x + k * h) - g(x - k * h))).sum::<f64>() / (60.0 * h)
}

/// `f = ∂t β(ū) − div a(x, ν(ū), ∇ζ(ū))` from stencils applied to `ū`.
pub fn numeric_source(pair: &NonlinearPair, op: &LerayLionsOperator, dim: usize, exact: ExactFn) -> SourceFn {
    let (pair, op) = (pair.clone(), op.clone());
    Arc::new(move |x, t| {
        let beta_t = d6(|s| pair.beta(exact(x, s)), t, STENCIL_DT);
        let flux = |y: Vec2| -> Vec2 {
            let zeta = |y: Vec2| pair.zeta(exact(y, t));
            let mut g = [0.0, 0.0];
            for (d, gd) in g.iter_mut().enumerate().take(dim) {
                *gd = d6(
                    |s| {
                        let mut z = y;
                        z[d] = s;
                        zeta(z)
                    },
                    y[d],
                    STENCIL_H,
                );
            }
            op.eval(y, pair.nu(exact(y, t)), g)
        };
        let div: f64 = (0..dim)
            .map(|d| {
                d6(
                    |s| {
                        let mut z = x;
                        z[d] = s;
                        flux(z)[d]
                    },
                    x[d],
                    STENCIL_H,
                )
            })
            .sum();
        beta_t - div
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_is_sixth_order() {
        let e1 = (d6(f64::sin, 0.3, 0.1) - 0.3f64.cos()).abs();
        let e2 = (d6(f64::sin, 0.3, 0.05) - 0.3f64.cos()).abs();
        assert!(e1 / e2 > 50.0, "{e1} {e2}");
    }

    #[test]
    fn p_laplace_source_matches_closed_form() {
        let p = ManufacturedProblem::p_laplace4();
        for &(x, t) in &[(0.13, 0.0), (0.37, 0.2), (0.5, 0.41), (0.81, 0.5)] {
            let ux = PI * (PI * x).cos() * (1.0 + t);
            let uxx = -PI * PI * (PI * x).sin() * (1.0 + t);
            let closed = (PI * x).sin() - 3.0 * ux * ux * uxx;
            let got = (p.source)([x, 0.0], t);
            assert!((got - closed).abs() <= 1e-8 * (1.0 + closed.abs()), "{got} {closed}");
        }
    }

    #[test]
    fn closed_form_sources_match_stencils_away_from_kinks() {
        for name in ["heat_1d", "heat_2d", "stefan", "richards", "doubly_degenerate"] {
            let p = ManufacturedProblem::by_name(name).unwrap();
            let num = numeric_source(&p.pair, &p.op, p.dim, p.exact.clone());
            for &(x, y, t) in &[(0.21, 0.33, 0.07), (0.5, 0.5, 0.3), (0.64, 0.18, 0.45)] {
                let (a, b) = ((p.source)([x, y], t), num([x, y], t));
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{name} at ({x},{y},{t}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn boundary_values_are_dirichlet() {
        for name in PROBLEM_NAMES {
            let p = ManufacturedProblem::by_name(name).unwrap();
            for t in [0.0, 0.25, 0.5] {
                for x in [[0.0, 0.5], [1.0, 0.3]] {
                    assert!(p.pair.zeta((p.exact)(x, t)).abs() < 1e-12, "{name}");
                }
            }
        }
    }
}
