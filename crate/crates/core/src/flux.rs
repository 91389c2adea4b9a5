//! Leray–Lions fluxes `a(x, s, ξ)` and sampled checks of their hypotheses.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::Vec2;

pub type Mat2 = [[f64; 2]; 2];

type Coefficient = Arc<dyn Fn(Vec2, f64) -> f64 + Send + Sync>;
type CustomEval = Arc<dyn Fn(Vec2, f64, Vec2) -> Vec2 + Send + Sync>;
type CustomJac = Arc<dyn Fn(Vec2, f64, Vec2) -> Mat2 + Send + Sync>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FluxError {
    #[error("invalid operator: {0}")]
    Invalid(String),
    #[error("hypothesis {hypothesis} violated at x={x:?}, s={s}, xi={xi:?}, chi={chi:?} (margin {margin:e})")]
    PropertyViolation {
        hypothesis: &'static str,
        x: Vec2,
        s: f64,
        xi: Vec2,
        chi: Vec2,
        margin: f64,
    },
}

#[derive(Clone)]
pub enum FluxKind {
    /// `a = ξ`.
    Laplace,
    /// `a = |ξ|^{p−2} ξ`.
    PLaplace,
    /// `a = K(x, s) ξ` with a scalar coefficient.
    ScalarDiffusion(Coefficient),
    Custom {
        eval: CustomEval,
        jac: Option<CustomJac>,
    },
}

impl fmt::Debug for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FluxKind::Laplace => write!(f, "Laplace"),
            FluxKind::PLaplace => write!(f, "PLaplace"),
            FluxKind::ScalarDiffusion(_) => write!(f, "ScalarDiffusion"),
            FluxKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// A flux with its exponent and the constants it is declared to satisfy:
/// `a·ξ ≥ a_lower |ξ|^p` and `|a| ≤ a_upper(x) + mu |ξ|^{p−1}`.
#[derive(Clone)]
pub struct LerayLionsOperator {
    pub name: String,
    pub p: f64,
    pub kind: FluxKind,
    pub a_lower: f64,
    pub a_upper: Arc<dyn Fn(Vec2) -> f64 + Send + Sync>,
    pub mu: f64,
    pub strictly_monotone: bool,
}

impl fmt::Debug for LerayLionsOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LerayLionsOperator")
            .field("name", &self.name)
            .field("p", &self.p)
            .field("kind", &self.kind)
            .field("a_lower", &self.a_lower)
            .field("mu", &self.mu)
            .field("strictly_monotone", &self.strictly_monotone)
            .finish()
    }
}

fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

impl LerayLionsOperator {
    pub fn laplace() -> Self {
        Self {
            name: "laplace".into(),
            p: 2.0,
            kind: FluxKind::Laplace,
            a_lower: 1.0,
            a_upper: Arc::new(|_| 0.0),
            mu: 1.0,
            strictly_monotone: true,
        }
    }

    pub fn p_laplace(p: f64) -> Result<Self, FluxError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(FluxError::Invalid(format!("exponent p = {p} must lie in (1, ∞)")));
        }
        Ok(Self {
            name: format!("p_laplace({p})"),
            p,
            kind: FluxKind::PLaplace,
            a_lower: 1.0,
            a_upper: Arc::new(|_| 0.0),
            mu: 1.0,
            strictly_monotone: true,
        })
    }

    /// `K(x, s) ξ` with `k_min ≤ K ≤ k_max` declared by the caller.
    pub fn scalar_diffusion(
        k: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static,
        k_min: f64,
        k_max: f64,
    ) -> Result<Self, FluxError> {
        if !(k_min > 0.0 && k_max >= k_min) {
            return Err(FluxError::Invalid(format!(
                "diffusion bounds must satisfy 0 < k_min ≤ k_max, got {k_min}, {k_max}"
            )));
        }
        Ok(Self {
            name: "scalar_diffusion".into(),
            p: 2.0,
            kind: FluxKind::ScalarDiffusion(Arc::new(k)),
            a_lower: k_min,
            a_upper: Arc::new(|_| 0.0),
            mu: k_max,
            strictly_monotone: true,
        })
    }

    pub fn eval(&self, x: Vec2, s: f64, xi: Vec2) -> Vec2 {
        match &self.kind {
            FluxKind::Laplace => xi,
            FluxKind::PLaplace => {
                let n = norm(xi);
                if n == 0.0 {
                    return [0.0, 0.0];
                }
                let c = n.powf(self.p - 2.0);
                [c * xi[0], c * xi[1]]
            }
            FluxKind::ScalarDiffusion(k) => {
                let c = k(x, s);
                [c * xi[0], c * xi[1]]
            }
            FluxKind::Custom { eval, .. } => eval(x, s, xi),
        }
    }

    /// `∂a/∂ξ`; custom fluxes without an explicit Jacobian use central differences.
    pub fn jac_xi(&self, x: Vec2, s: f64, xi: Vec2) -> Mat2 {
        match &self.kind {
            FluxKind::Laplace => [[1.0, 0.0], [0.0, 1.0]],
            FluxKind::PLaplace => {
                let n2 = dot(xi, xi);
                if n2 == 0.0 {
                    return if self.p == 2.0 {
                        [[1.0, 0.0], [0.0, 1.0]]
                    } else {
                        [[0.0, 0.0], [0.0, 0.0]]
                    };
                }
                let c = n2.powf(0.5 * (self.p - 2.0));
                let q = (self.p - 2.0) / n2;
                [
                    [c * (1.0 + q * xi[0] * xi[0]), c * q * xi[0] * xi[1]],
                    [c * q * xi[1] * xi[0], c * (1.0 + q * xi[1] * xi[1])],
                ]
            }
            FluxKind::ScalarDiffusion(k) => {
                let c = k(x, s);
                [[c, 0.0], [0.0, c]]
            }
            FluxKind::Custom { jac: Some(j), .. } => j(x, s, xi),
            FluxKind::Custom { jac: None, .. } => self.fd_jac_xi(x, s, xi),
        }
    }

    /// Central-difference Jacobian in ξ.
    pub fn fd_jac_xi(&self, x: Vec2, s: f64, xi: Vec2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-6 * (1.0 + xi[j].abs());
            let mut plus = xi;
            let mut minus = xi;
            plus[j] += h;
            minus[j] -= h;
            let (ap, am) = (self.eval(x, s, plus), self.eval(x, s, minus));
            for i in 0..2 {
                out[i][j] = (ap[i] - am[i]) / (2.0 * h);
            }
        }
        out
    }

    /// Whether `a` depends on `ξ` only.
    pub fn depends_on_xi_only(&self) -> bool {
        matches!(self.kind, FluxKind::Laplace | FluxKind::PLaplace)
    }

    /// `∂a/∂s`, zero for fluxes independent of s.
    pub fn ds(&self, x: Vec2, s: f64, xi: Vec2) -> Vec2 {
        match &self.kind {
            FluxKind::Laplace | FluxKind::PLaplace => [0.0, 0.0],
            _ => {
                let h = 1e-6 * (1.0 + s.abs());
                let (ap, am) = (self.eval(x, s + h, xi), self.eval(x, s - h, xi));
                [(ap[0] - am[0]) / (2.0 * h), (ap[1] - am[1]) / (2.0 * h)]
            }
        }
    }
}

/// Sampling ranges for [`check_operator_hypotheses_with`].
#[derive(Debug, Clone, Copy)]
pub struct SampleBox {
    pub dim: usize,
    pub x_lo: Vec2,
    pub x_hi: Vec2,
    pub s_range: (f64, f64),
    pub xi_radius: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            dim: 2,
            x_lo: [0.0, 0.0],
            x_hi: [1.0, 1.0],
            s_range: (-10.0, 10.0),
            xi_radius: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisRecord {
    pub name: &'static str,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorReport {
    pub operator: String,
    pub samples: usize,
    pub records: Vec<HypothesisRecord>,
}

pub fn check_operator_hypotheses(
    op: &LerayLionsOperator,
    samples: usize,
    seed: u64,
) -> Result<OperatorReport, FluxError> {
    check_operator_hypotheses_with(op, samples, seed, SampleBox::default())
}

/// Samples `(x, s, ξ, χ)` and checks coercivity, monotonicity (strict when the
/// operator says so) and growth, each with slack `1e-10 (1 + magnitudes)`.
pub fn check_operator_hypotheses_with(
    op: &LerayLionsOperator,
    samples: usize,
    seed: u64,
    bx: SampleBox,
) -> Result<OperatorReport, FluxError> {
    if samples == 0 {
        return Err(FluxError::Invalid("samples must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = vec![
        HypothesisRecord {
            name: "coercivity",
            worst_margin: f64::INFINITY,
        },
        HypothesisRecord {
            name: "monotonicity",
            worst_margin: f64::INFINITY,
        },
        HypothesisRecord {
            name: "growth",
            worst_margin: f64::INFINITY,
        },
    ];
    let r = bx.xi_radius;
    for k in 0..samples {
        let x = [
            rng.random_range(bx.x_lo[0]..=bx.x_hi[0]),
            if bx.dim > 1 {
                rng.random_range(bx.x_lo[1]..=bx.x_hi[1])
            } else {
                0.0
            },
        ];
        let s = rng.random_range(bx.s_range.0..=bx.s_range.1);
        let draw = |rng: &mut ChaCha8Rng| -> Vec2 {
            // log-uniform magnitude so small gradients are exercised too
            let mag = r * 10f64.powf(rng.random_range(-4.0..=0.0));
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            if bx.dim > 1 {
                [mag * angle.cos(), mag * angle.sin()]
            } else {
                [mag * angle.cos().signum(), 0.0]
            }
        };
        let xi = draw(&mut rng);
        let chi = if k % 17 == 0 { xi } else { draw(&mut rng) };

        let a_xi = op.eval(x, s, xi);
        let a_chi = op.eval(x, s, chi);
        let nxi = norm(xi);

        let lhs = dot(a_xi, xi);
        let rhs = op.a_lower * nxi.powf(op.p);
        let coer = lhs - rhs;
        let diff = [xi[0] - chi[0], xi[1] - chi[1]];
        let mono = dot([a_xi[0] - a_chi[0], a_xi[1] - a_chi[1]], diff);
        let bound = (op.a_upper)(x) + op.mu * nxi.powf(op.p - 1.0);
        let growth = bound - norm(a_xi);

        let checks = [
            (coer, lhs.abs() + rhs.abs()),
            (mono, norm(a_xi) * norm(diff) + norm(a_chi) * norm(diff)),
            (growth, bound.abs() + norm(a_xi)),
        ];
        for (rec, (margin, mag)) in records.iter_mut().zip(checks) {
            let slack = 1e-10 * (1.0 + mag);
            let strict_fail = rec.name == "monotonicity"
                && op.strictly_monotone
                && norm(diff) > 1e-6
                && margin <= 0.0;
            if margin < -slack || strict_fail {
                return Err(FluxError::PropertyViolation {
                    hypothesis: rec.name,
                    x,
                    s,
                    xi,
                    chi,
                    margin,
                });
            }
            rec.worst_margin = rec.worst_margin.min(margin);
        }
    }
    Ok(OperatorReport {
        operator: op.name.clone(),
        samples,
        records,
    })
}
