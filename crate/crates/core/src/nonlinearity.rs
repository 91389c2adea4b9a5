//! Scalar nonlinearities of the degenerate parabolic model.
//!
//! A [`NonlinearPair`] holds the non-decreasing Lipschitz functions `beta`
//! (the accumulation term) and `zeta` (the diffused quantity), together with
//! the derived functions
//!
//! * `nu(s) = ∫₀ˢ ζ'(q) β'(q) dq`,
//! * `beta_r`, the pseudo-inverse of `beta` returning the root closest to 0,
//! * `B(z) = ∫₀ᶻ ζ(β_r(s)) ds`, the convex potential used by the energy
//!   estimates, with `B(β(s)) = ∫₀ˢ ζ(q) β'(q) dq`.
//!
//! Functions are stored as monotone piecewise descriptions (sorted
//! breakpoints, one closed-form piece per interval). When both functions are
//! piecewise affine every derived quantity is evaluated in closed form;
//! otherwise an adaptive Gauss–Kronrod rule resolves the non-affine pieces to
//! an absolute tolerance of 1e-12.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::quadrature::integrate_adaptive;

const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PairError {
    #[error("value {value} outside the range [{lo}, {hi}] of beta")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("not monotone: {0}")]
    NotMonotone(String),
    #[error("invalid nonlinearity: {0}")]
    Invalid(String),
    #[error("inequality {inequality} violated at a={a}, b={b} (margin {margin:e})")]
    PropertyViolation {
        inequality: &'static str,
        a: f64,
        b: f64,
        margin: f64,
    },
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One piece of a monotone function.
#[derive(Clone)]
pub enum Piece {
    /// `v0 + slope * (s - x0)`.
    Affine { x0: f64, v0: f64, slope: f64 },
    /// Closed-form non-affine piece with its derivative.
    Smooth { f: ScalarFn, df: ScalarFn },
}

impl Piece {
    fn value(&self, s: f64) -> f64 {
        match self {
            Piece::Affine { x0, v0, slope } => v0 + slope * (s - x0),
            Piece::Smooth { f, .. } => f(s),
        }
    }

    fn derivative(&self, s: f64) -> f64 {
        match self {
            Piece::Affine { slope, .. } => *slope,
            Piece::Smooth { df, .. } => df(s),
        }
    }

    fn slope(&self) -> Option<f64> {
        match self {
            Piece::Affine { slope, .. } => Some(*slope),
            Piece::Smooth { .. } => None,
        }
    }
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Affine { x0, v0, slope } => write!(f, "Affine({x0}, {v0}, {slope})"),
            Piece::Smooth { .. } => write!(f, "Smooth"),
        }
    }
}

/// Non-decreasing, continuous, piecewise-defined function on ℝ.
///
/// `pieces[j]` is active on `[breaks[j-1], breaks[j]]`; the first and last
/// pieces extend to -∞ and +∞ and must be affine.
#[derive(Clone, Debug)]
pub struct MonotoneFn {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl MonotoneFn {
    pub fn identity() -> Self {
        Self::linear(1.0)
    }

    pub fn linear(slope: f64) -> Self {
        Self {
            breaks: vec![],
            pieces: vec![Piece::Affine {
                x0: 0.0,
                v0: 0.0,
                slope,
            }],
        }
    }

    /// Polyline through `points` (strictly increasing abscissae) with the given
    /// tail slopes.
    pub fn piecewise_linear(
        points: &[(f64, f64)],
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self, PairError> {
        if points.is_empty() {
            return Err(PairError::Invalid("polyline needs at least one point".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(PairError::Invalid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let (x0, v0) = points[0];
        let mut pieces = vec![Piece::Affine {
            x0,
            v0,
            slope: left_slope,
        }];
        for w in points.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            pieces.push(Piece::Affine {
                x0: w[0].0,
                v0: w[0].1,
                slope,
            });
        }
        let (xl, vl) = points[points.len() - 1];
        pieces.push(Piece::Affine {
            x0: xl,
            v0: vl,
            slope: right_slope,
        });
        let breaks = points.iter().map(|p| p.0).collect();
        let out = Self { breaks, pieces };
        out.check_monotone()?;
        Ok(out)
    }

    /// Builds a function from `(breakpoint, slope, value)` triples: the piece
    /// starting at each breakpoint has the given value there and the given slope
    /// up to the next breakpoint. The first piece also covers everything left of
    /// its breakpoint. Consecutive triples must agree (continuity).
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self, PairError> {
        if triples.is_empty() {
            return Err(PairError::Invalid("empty piece table".into()));
        }
        for w in triples.windows(2) {
            let (x, s, v) = w[0];
            let (xn, _, vn) = w[1];
            let predicted = v + s * (xn - x);
            if (predicted - vn).abs() > 1e-12 * (1.0 + vn.abs()) {
                return Err(PairError::Invalid(format!(
                    "piece table is discontinuous at {xn}: {predicted} vs {vn}"
                )));
            }
        }
        let points: Vec<(f64, f64)> = triples.iter().map(|t| (t.0, t.2)).collect();
        let left = triples[0].1;
        let right = triples[triples.len() - 1].1;
        Self::piecewise_linear(&points, left, right)
    }

    /// General constructor; `pieces.len()` must equal `breaks.len() + 1` and the
    /// two tail pieces must be affine.
    pub fn from_pieces(breaks: Vec<f64>, pieces: Vec<Piece>) -> Result<Self, PairError> {
        if pieces.len() != breaks.len() + 1 {
            return Err(PairError::Invalid("need one more piece than breakpoints".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PairError::Invalid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if pieces[0].slope().is_none() || pieces[pieces.len() - 1].slope().is_none() {
            return Err(PairError::Invalid("tail pieces must be affine".into()));
        }
        for (j, &b) in breaks.iter().enumerate() {
            let l = pieces[j].value(b);
            let r = pieces[j + 1].value(b);
            if (l - r).abs() > 1e-12 * (1.0 + l.abs()) {
                return Err(PairError::Invalid(format!("discontinuous at {b}: {l} vs {r}")));
            }
        }
        let out = Self { breaks, pieces };
        out.check_monotone()?;
        Ok(out)
    }

    /// Smooth function on a single interior interval, affine tails outside.
    /// Handy for non-affine test pairs: `f` is used on `[lo, hi]` and continued
    /// affinely with the derivative at the interval ends.
    pub fn smooth_with_affine_tails(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lo: f64,
        hi: f64,
    ) -> Result<Self, PairError> {
        let left = Piece::Affine {
            x0: lo,
            v0: f(lo),
            slope: df(lo),
        };
        let right = Piece::Affine {
            x0: hi,
            v0: f(hi),
            slope: df(hi),
        };
        let mid = Piece::Smooth {
            f: Arc::new(f),
            df: Arc::new(df),
        };
        Self::from_pieces(vec![lo, hi], vec![left, mid, right])
    }

    fn check_monotone(&self) -> Result<(), PairError> {
        for (j, p) in self.pieces.iter().enumerate() {
            match p {
                Piece::Affine { slope, .. } if *slope < 0.0 => {
                    return Err(PairError::NotMonotone(format!(
                        "piece {j} has negative slope {slope}"
                    )))
                }
                Piece::Smooth { df, .. } => {
                    let (a, b) = (self.breaks[j - 1], self.breaks[j]);
                    for k in 0..=64 {
                        let s = a + (b - a) * k as f64 / 64.0;
                        if df(s) < -1e-14 {
                            return Err(PairError::NotMonotone(format!(
                                "derivative {} at {s}",
                                df(s)
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn is_piecewise_affine(&self) -> bool {
        self.pieces.iter().all(|p| p.slope().is_some())
    }

    fn piece_index(&self, s: f64) -> usize {
        self.breaks.partition_point(|&b| b < s)
    }

    fn piece_at(&self, j: usize) -> &Piece {
        &self.pieces[j]
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.pieces[self.piece_index(s)].value(s)
    }

    /// Derivative; at a breakpoint the larger of the one-sided derivatives.
    pub fn derivative(&self, s: f64) -> f64 {
        let j = self.piece_index(s);
        if j < self.breaks.len() && self.breaks[j] == s {
            self.pieces[j]
                .derivative(s)
                .max(self.pieces[j + 1].derivative(s))
        } else {
            self.pieces[j].derivative(s)
        }
    }

    /// Largest derivative (exact for affine pieces, sampled on smooth pieces).
    pub fn lipschitz_constant(&self) -> f64 {
        let mut l: f64 = 0.0;
        for (j, p) in self.pieces.iter().enumerate() {
            match p {
                Piece::Affine { slope, .. } => l = l.max(*slope),
                Piece::Smooth { df, .. } => {
                    let (a, b) = (self.breaks[j - 1], self.breaks[j]);
                    for k in 0..=1024 {
                        l = l.max(df(a + (b - a) * k as f64 / 1024.0));
                    }
                }
            }
        }
        l
    }

    fn left_slope(&self) -> f64 {
        self.pieces[0].slope().unwrap_or(0.0)
    }

    fn right_slope(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].slope().unwrap_or(0.0)
    }

    /// Closure of the range as `(lo, hi)`, infinite when a tail is increasing.
    pub fn range(&self) -> (f64, f64) {
        let lo = if self.left_slope() > 0.0 {
            f64::NEG_INFINITY
        } else {
            self.pieces[0].value(0.0)
        };
        let hi = if self.right_slope() > 0.0 {
            f64::INFINITY
        } else {
            self.pieces[self.pieces.len() - 1].value(0.0)
        };
        (lo, hi)
    }

    /// Closest `t` to 0 with `f(t) = y`, assuming `f(0) = 0`.
    pub fn closest_root(&self, y: f64) -> Result<f64, PairError> {
        if y == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi) = self.range();
        if !(y >= lo && y <= hi) {
            return Err(PairError::OutOfRange { value: y, lo, hi });
        }
        // Walk away from 0 piece by piece and invert the first piece reaching y.
        let j0 = self.piece_index(0.0);
        if y > 0.0 {
            let mut left = 0.0;
            for j in j0..self.pieces.len() {
                let right = if j < self.breaks.len() {
                    self.breaks[j]
                } else {
                    f64::INFINITY
                };
                if let Some(t) = invert_piece(&self.pieces[j], left, right, y, true) {
                    return Ok(t);
                }
                left = right;
            }
        } else {
            let mut right = 0.0;
            for j in (0..=j0).rev() {
                let left = if j > 0 {
                    self.breaks[j - 1]
                } else {
                    f64::NEG_INFINITY
                };
                if let Some(t) = invert_piece(&self.pieces[j], left, right, y, false) {
                    return Ok(t);
                }
                right = left;
            }
        }
        Err(PairError::OutOfRange { value: y, lo, hi })
    }

    /// Pointwise sum of two functions (both must share nothing but the real line).
    pub fn sum(&self, other: &MonotoneFn) -> MonotoneFn {
        let mut breaks: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut pieces = Vec::with_capacity(breaks.len() + 1);
        for j in 0..=breaks.len() {
            // Representative point strictly inside the sub-interval.
            let rep = match (j, breaks.len()) {
                (_, 0) => 0.0,
                (0, _) => breaks[0] - 1.0,
                (j, n) if j == n => breaks[n - 1] + 1.0,
                (j, _) => 0.5 * (breaks[j - 1] + breaks[j]),
            };
            let a = self.piece_at(self.piece_index(rep)).clone();
            let b = other.piece_at(other.piece_index(rep)).clone();
            let piece = match (a.slope(), b.slope()) {
                (Some(sa), Some(sb)) => Piece::Affine {
                    x0: rep,
                    v0: a.value(rep) + b.value(rep),
                    slope: sa + sb,
                },
                _ => {
                    let (a2, b2) = (a.clone(), b.clone());
                    Piece::Smooth {
                        f: Arc::new(move |s| a.value(s) + b.value(s)),
                        df: Arc::new(move |s| a2.derivative(s) + b2.derivative(s)),
                    }
                }
            };
            pieces.push(piece);
        }
        MonotoneFn { breaks, pieces }
    }
}

fn invert_piece(piece: &Piece, left: f64, right: f64, y: f64, upward: bool) -> Option<f64> {
    match piece {
        Piece::Affine { x0, v0, slope } => {
            if *slope == 0.0 {
                // Plateau: the endpoint closest to 0 attains y.
                let end = if upward { left } else { right };
                return (*v0 == y).then_some(end);
            }
            let t = x0 + (y - v0) / slope;
            let inside = t >= left - 1e-15 * (1.0 + left.abs())
                && t <= right + 1e-15 * (1.0 + right.abs());
            inside.then_some(t.clamp(left, right))
        }
        Piece::Smooth { f, .. } => {
            let (fl, fr) = (f(left), f(right));
            let reached = if upward { fr >= y } else { fl <= y };
            if !reached {
                return None;
            }
            // Bisection for the extremal root closest to 0.
            let (mut a, mut b) = (left, right);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                let fm = f(m);
                if upward {
                    if fm >= y {
                        b = m
                    } else {
                        a = m
                    }
                } else if fm <= y {
                    a = m
                } else {
                    b = m
                }
            }
            Some(if upward { b } else { a })
        }
    }
}

/// Constants of the quadratic growth sandwich `K0 β(s)² − K1 ≤ B(β(s)) ≤ K2 s²`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct GrowthConstants {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Cumulative integrals of `ζ'β'` (for ν) and `ζβ'` (for B∘β) at merged
/// breakpoints, so evaluation only integrates within one interval.
#[derive(Clone, Debug)]
struct IntegralTable {
    nodes: Vec<f64>,
    nu: Vec<f64>,
    b_of_beta: Vec<f64>,
}

/// The pair (β, ζ) with Lipschitz and growth constants and derived caches.
#[derive(Clone, Debug)]
pub struct NonlinearPair {
    pub name: String,
    beta: MonotoneFn,
    zeta: MonotoneFn,
    pub l_beta: f64,
    pub l_zeta: f64,
    pub m0: f64,
    pub m1: f64,
    table: IntegralTable,
}

impl NonlinearPair {
    pub fn new(name: impl Into<String>, beta: MonotoneFn, zeta: MonotoneFn) -> Result<Self, PairError> {
        for (label, f) in [("beta", &beta), ("zeta", &zeta)] {
            if f.eval(0.0).abs() > 1e-14 {
                return Err(PairError::Invalid(format!("{label}(0) = {} ≠ 0", f.eval(0.0))));
            }
        }
        if zeta.left_slope() <= 0.0 || zeta.right_slope() <= 0.0 {
            return Err(PairError::Invalid(
                "zeta must grow linearly at ±∞ (|ζ(s)| ≥ M0|s| − M1)".into(),
            ));
        }
        let l_beta = beta.lipschitz_constant();
        let l_zeta = zeta.lipschitz_constant();
        if l_beta <= 0.0 || l_zeta <= 0.0 {
            return Err(PairError::Invalid("Lipschitz constants must be positive".into()));
        }
        let (m0, m1) = growth_of_zeta(&zeta);
        let table = build_table(&beta, &zeta);
        Ok(Self {
            name: name.into(),
            beta,
            zeta,
            l_beta,
            l_zeta,
            m0,
            m1,
            table,
        })
    }

    /// β = ζ = Id: heat equation and p-Laplace problems.
    pub fn identity() -> Self {
        Self::new("p_laplace_identity", MonotoneFn::identity(), MonotoneFn::identity())
            .expect("identity pair is valid")
    }

    /// β = Id, ζ(s) = min(s, 0) + max(s − 1, 0).
    pub fn stefan() -> Self {
        let zeta = MonotoneFn::piecewise_linear(&[(0.0, 0.0), (1.0, 0.0)], 1.0, 1.0).unwrap();
        Self::new("stefan", MonotoneFn::identity(), zeta).unwrap()
    }

    /// ζ = Id, β(s) = min(s, 0) + max(s − 1, 0).
    pub fn richards() -> Self {
        let beta = MonotoneFn::piecewise_linear(&[(0.0, 0.0), (1.0, 0.0)], 1.0, 1.0).unwrap();
        Self::new("richards", beta, MonotoneFn::identity()).unwrap()
    }

    /// β plateau at 1 on [1, 2], ζ plateau at 0 on [0, 1].
    pub fn doubly_degenerate() -> Self {
        let beta = MonotoneFn::piecewise_linear(&[(1.0, 1.0), (2.0, 1.0)], 1.0, 1.0).unwrap();
        let zeta = MonotoneFn::piecewise_linear(&[(0.0, 0.0), (1.0, 0.0)], 1.0, 1.0).unwrap();
        Self::new("doubly_degenerate", beta, zeta).unwrap()
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "stefan" => Some(Self::stefan()),
            "richards" => Some(Self::richards()),
            "p_laplace_identity" | "identity" | "heat" => Some(Self::identity()),
            "doubly_degenerate" => Some(Self::doubly_degenerate()),
            _ => None,
        }
    }

    pub fn beta_fn(&self) -> &MonotoneFn {
        &self.beta
    }

    pub fn zeta_fn(&self) -> &MonotoneFn {
        &self.zeta
    }

    pub fn beta(&self, s: f64) -> f64 {
        self.beta.eval(s)
    }

    pub fn zeta(&self, s: f64) -> f64 {
        self.zeta.eval(s)
    }

    pub fn beta_prime(&self, s: f64) -> f64 {
        self.beta.derivative(s)
    }

    pub fn zeta_prime(&self, s: f64) -> f64 {
        self.zeta.derivative(s)
    }

    /// ν'(s) = β'(s) ζ'(s), same breakpoint convention as the factors.
    pub fn nu_prime(&self, s: f64) -> f64 {
        self.beta.derivative(s) * self.zeta.derivative(s)
    }

    pub fn nu(&self, s: f64) -> f64 {
        self.table_eval(s, |a, b| self.integral_nu(a, b), &self.table.nu)
    }

    /// B(β(s)) = ∫₀ˢ ζ(q) β'(q) dq.
    pub fn big_b_of_beta(&self, s: f64) -> f64 {
        self.table_eval(s, |a, b| self.integral_b(a, b), &self.table.b_of_beta)
    }

    pub fn beta_r(&self, s: f64) -> Result<f64, PairError> {
        self.beta.closest_root(s)
    }

    /// B(z) = ∫₀ᶻ ζ(β_r(s)) ds, evaluated as B(β(β_r(z))).
    pub fn big_b(&self, z: f64) -> Result<f64, PairError> {
        let t = self.beta_r(z)?;
        Ok(self.big_b_of_beta(t))
    }

    pub fn range_of_beta(&self) -> (f64, f64) {
        self.beta.range()
    }

    /// `K2 = LζLβ/2`, `K0 = M0/(4Lβ)` and `K1 = K0 max_{[-S,S]} β²` with
    /// `S = 2 M1 / M0`, following the standard construction.
    pub fn growth_constants(&self) -> GrowthConstants {
        let k2 = 0.5 * self.l_zeta * self.l_beta;
        let k0 = self.m0 / (4.0 * self.l_beta);
        let s = 2.0 * self.m1 / self.m0;
        let k1 = k0 * self.beta(s).powi(2).max(self.beta(-s).powi(2));
        GrowthConstants { k0, k1, k2 }
    }

    fn table_eval(&self, s: f64, integral: impl Fn(f64, f64) -> f64, vals: &[f64]) -> f64 {
        let nodes = &self.table.nodes;
        // nearest node at or below s (or the first node when s is left of all)
        let k = nodes.partition_point(|&n| n <= s);
        let k = if k == 0 { 0 } else { k - 1 };
        vals[k] + integral(nodes[k], s)
    }

    fn integral_nu(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let m = 0.5 * (a + b);
        let pb = &self.beta.pieces[self.beta.piece_index(m)];
        let pz = &self.zeta.pieces[self.zeta.piece_index(m)];
        match (pb.slope(), pz.slope()) {
            (Some(sb), Some(sz)) => sb * sz * (b - a),
            _ => integrate_adaptive(|q| pb.derivative(q) * pz.derivative(q), a, b, QUAD_TOL).0,
        }
    }

    fn integral_b(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let m = 0.5 * (a + b);
        let pb = &self.beta.pieces[self.beta.piece_index(m)];
        let pz = &self.zeta.pieces[self.zeta.piece_index(m)];
        match (pb.slope(), pz.slope()) {
            (Some(sb), Some(_)) => sb * 0.5 * (pz.value(a) + pz.value(b)) * (b - a),
            _ => integrate_adaptive(|q| pz.value(q) * pb.derivative(q), a, b, QUAD_TOL).0,
        }
    }
}

fn build_table(beta: &MonotoneFn, zeta: &MonotoneFn) -> IntegralTable {
    let mut nodes: Vec<f64> = beta
        .breaks
        .iter()
        .chain(zeta.breaks.iter())
        .copied()
        .chain(std::iter::once(0.0))
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let zero = nodes.iter().position(|&n| n == 0.0).unwrap();
    let mut table = IntegralTable {
        nu: vec![0.0; nodes.len()],
        b_of_beta: vec![0.0; nodes.len()],
        nodes,
    };
    // Temporary pair-less integration; mirrors NonlinearPair::integral_*.
    let seg = |a: f64, b: f64| -> (f64, f64) {
        let m = 0.5 * (a + b);
        let pb = &beta.pieces[beta.piece_index(m)];
        let pz = &zeta.pieces[zeta.piece_index(m)];
        match (pb.slope(), pz.slope()) {
            (Some(sb), Some(sz)) => (
                sb * sz * (b - a),
                sb * 0.5 * (pz.value(a) + pz.value(b)) * (b - a),
            ),
            _ => (
                integrate_adaptive(|q| pb.derivative(q) * pz.derivative(q), a, b, QUAD_TOL).0,
                integrate_adaptive(|q| pz.value(q) * pb.derivative(q), a, b, QUAD_TOL).0,
            ),
        }
    };
    for k in zero + 1..table.nodes.len() {
        let (dn, db) = seg(table.nodes[k - 1], table.nodes[k]);
        table.nu[k] = table.nu[k - 1] + dn;
        table.b_of_beta[k] = table.b_of_beta[k - 1] + db;
    }
    for k in (0..zero).rev() {
        let (dn, db) = seg(table.nodes[k + 1], table.nodes[k]);
        table.nu[k] = table.nu[k + 1] + dn;
        table.b_of_beta[k] = table.b_of_beta[k + 1] + db;
    }
    table
}

/// `(M0, M1)` with `|ζ(s)| ≥ M0|s| − M1`: M0 is the smaller tail slope and M1 the
/// largest defect over breakpoints, the origin, and (for smooth pieces) a sample.
fn growth_of_zeta(zeta: &MonotoneFn) -> (f64, f64) {
    let m0 = zeta.left_slope().min(zeta.right_slope());
    let mut candidates: Vec<f64> = zeta.breaks.clone();
    candidates.push(0.0);
    for (j, p) in zeta.pieces.iter().enumerate() {
        if let Piece::Smooth { .. } = p {
            let (a, b) = (zeta.breaks[j - 1], zeta.breaks[j]);
            candidates.extend((0..=256).map(|k| a + (b - a) * k as f64 / 256.0));
        }
    }
    let m1 = candidates
        .iter()
        .map(|&s| m0 * s.abs() - zeta.eval(s).abs())
        .fold(0.0, f64::max);
    (m0, m1)
}

/// Monotone multivalued graph `{(x, y)}` on ℝ given as a polyline that is
/// non-decreasing in both coordinates, plus two tail rays. `x` plays the role
/// of ζ and `y` the role of β.
#[derive(Debug, Clone)]
pub struct MonotoneGraph {
    pub vertices: Vec<[f64; 2]>,
    pub left_ray: [f64; 2],
    pub right_ray: [f64; 2],
}

impl MonotoneGraph {
    /// Graph of the identity.
    pub fn identity() -> Self {
        Self {
            vertices: vec![[0.0, 0.0]],
            left_ray: [1.0, 1.0],
            right_ray: [1.0, 1.0],
        }
    }

    /// `T(s) = {0}` for s < 0, `[0, 1]` at 0, `{1}` for s > 0.
    pub fn heaviside() -> Self {
        Self {
            vertices: vec![[0.0, 0.0], [0.0, 1.0]],
            left_ray: [1.0, 0.0],
            right_ray: [1.0, 0.0],
        }
    }

    /// Whether `(x, y)` lies on the graph (to `tol`).
    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        let v = &self.vertices;
        let on_segment = |a: [f64; 2], b: [f64; 2]| {
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((x - a[0]) * d[0] + (y - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
            };
            let p = [a[0] + t * d[0], a[1] + t * d[1]];
            (p[0] - x).hypot(p[1] - y) <= tol
        };
        let on_ray = |a: [f64; 2], dir: [f64; 2], sign: f64| {
            let t = sign * ((x - a[0]) * dir[0] + (y - a[1]) * dir[1]);
            if t < 0.0 {
                return false;
            }
            let n2 = dir[0] * dir[0] + dir[1] * dir[1];
            let t = t / n2;
            let p = [a[0] + sign * t * dir[0], a[1] + sign * t * dir[1]];
            (p[0] - x).hypot(p[1] - y) <= tol
        };
        v.windows(2).any(|w| on_segment(w[0], w[1]))
            || on_ray(v[0], self.left_ray, -1.0)
            || on_ray(v[v.len() - 1], self.right_ray, 1.0)
    }
}

/// Builds (ζ, β) with ζ + β = 2 Id parametrising a maximal monotone graph:
/// each graph point `(x, y)` is reached at `s = (x + y)/2` with ζ(s) = x, β(s) = y.
pub fn pair_from_graph(graph: &MonotoneGraph) -> Result<NonlinearPair, PairError> {
    let v = &graph.vertices;
    if v.is_empty() {
        return Err(PairError::Invalid("graph needs at least one vertex".into()));
    }
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let (dx, dy) = (v[j][0] - v[i][0], v[j][1] - v[i][1]);
            if dx * dy < 0.0 || dx < 0.0 || dy < 0.0 {
                return Err(PairError::NotMonotone(format!(
                    "vertices {:?} and {:?} violate (x−x′)(y−y′) ≥ 0 along the polyline",
                    v[i], v[j]
                )));
            }
            if dx == 0.0 && dy == 0.0 {
                return Err(PairError::Invalid(format!("repeated vertex {:?}", v[i])));
            }
        }
    }
    for ray in [graph.left_ray, graph.right_ray] {
        if ray[0] <= 0.0 || ray[1] < 0.0 {
            return Err(PairError::Invalid(format!(
                "tail ray {ray:?} must have positive x and non-negative y component"
            )));
        }
    }
    if !graph.contains(0.0, 0.0, 1e-14) {
        return Err(PairError::Invalid("graph must contain (0, 0)".into()));
    }
    let mut pts: Vec<[f64; 2]> = v.clone();
    if !pts.iter().any(|p| p[0] == 0.0 && p[1] == 0.0) {
        // (0,0) lies inside a segment or a ray: insert it as a vertex.
        let pos = pts.partition_point(|p| p[0] + p[1] < 0.0);
        pts.insert(pos, [0.0, 0.0]);
    }
    let s: Vec<f64> = pts.iter().map(|p| 0.5 * (p[0] + p[1])).collect();
    let zeta_pts: Vec<(f64, f64)> = s.iter().zip(&pts).map(|(&s, p)| (s, p[0])).collect();
    let beta_pts: Vec<(f64, f64)> = s.iter().zip(&pts).map(|(&s, p)| (s, p[1])).collect();
    let slope = |ray: [f64; 2], comp: usize| 2.0 * ray[comp] / (ray[0] + ray[1]);
    let zeta = MonotoneFn::piecewise_linear(
        &zeta_pts,
        slope(graph.left_ray, 0),
        slope(graph.right_ray, 0),
    )?;
    let beta = MonotoneFn::piecewise_linear(
        &beta_pts,
        slope(graph.left_ray, 1),
        slope(graph.right_ray, 1),
    )?;
    NonlinearPair::new("from_graph", beta, zeta)
}

/// Worst margin of one inequality over the sampled pairs.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityRecord {
    pub name: &'static str,
    pub worst_margin: f64,
    pub witness: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub pair: String,
    pub samples: usize,
    pub interval: (f64, f64),
    pub growth: GrowthConstants,
    pub records: Vec<InequalityRecord>,
}

impl PairReport {
    pub fn record(&self, name: &str) -> Option<&InequalityRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// Default sampling interval for the property checks.
pub const DEFAULT_SAMPLE_INTERVAL: (f64, f64) = (-10.0, 10.0);

pub fn check_pair_inequalities(
    pair: &NonlinearPair,
    samples: usize,
    seed: u64,
) -> Result<PairReport, PairError> {
    check_pair_inequalities_on(pair, samples, seed, DEFAULT_SAMPLE_INTERVAL)
}

/// Samples `(a, b)` uniformly on `interval` and checks the inequalities linking
/// ν, ζ, β and B, each with slack `1e-10 (1 + magnitudes)`.
pub fn check_pair_inequalities_on(
    pair: &NonlinearPair,
    samples: usize,
    seed: u64,
    interval: (f64, f64),
) -> Result<PairReport, PairError> {
    if samples == 0 {
        return Err(PairError::Invalid("samples must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let growth = pair.growth_constants();
    let (lb, lz) = (pair.l_beta, pair.l_zeta);
    let names = [
        "nu_lipschitz_in_zeta",
        "nu_lipschitz_in_beta",
        "nu_increment_squared",
        "entropy_subgradient",
        "entropy_midpoint",
        "entropy_lower_growth",
        "entropy_upper_growth",
        "entropy_convex",
    ];
    let mut records: Vec<InequalityRecord> = names
        .iter()
        .map(|&name| InequalityRecord {
            name,
            worst_margin: f64::INFINITY,
            witness: (0.0, 0.0),
        })
        .collect();

    for k in 0..samples {
        let (a, b) = if k == 0 {
            // a = b is always part of the sample
            let a = rng.random_range(interval.0..=interval.1);
            (a, a)
        } else {
            (
                rng.random_range(interval.0..=interval.1),
                rng.random_range(interval.0..=interval.1),
            )
        };
        let lambda: f64 = rng.random_range(0.0..=1.0);
        let (ba, bb) = (pair.beta(a), pair.beta(b));
        let (za, zb) = (pair.zeta(a), pair.zeta(b));
        let (na, nb) = (pair.nu(a), pair.nu(b));
        let (b_a, b_b) = (pair.big_b_of_beta(a), pair.big_b_of_beta(b));
        let b_mid = pair.big_b(0.5 * (ba + bb))?;
        let b_lam = pair.big_b(lambda * ba + (1.0 - lambda) * bb)?;
        let dn = na - nb;

        // Each entry: (lhs, rhs) with the inequality lhs ≤ rhs.
        let checks = [
            (dn.abs(), lb * (za - zb).abs()),
            (dn.abs(), lz * (ba - bb).abs()),
            (dn * dn, lb * lz * (za - zb) * (ba - bb)),
            (za * (bb - ba), b_b - b_a),
            (dn * dn, 4.0 * lb * lz * (b_a + b_b - 2.0 * b_mid)),
            (growth.k0 * ba * ba - growth.k1, b_a),
            (b_a, growth.k2 * a * a),
            (b_lam, lambda * b_a + (1.0 - lambda) * b_b),
        ];
        for (rec, (lhs, rhs)) in records.iter_mut().zip(checks) {
            let margin = rhs - lhs;
            let slack = 1e-10 * (1.0 + lhs.abs() + rhs.abs());
            if margin < -slack {
                return Err(PairError::PropertyViolation {
                    inequality: rec.name,
                    a,
                    b,
                    margin,
                });
            }
            if margin < rec.worst_margin {
                rec.worst_margin = margin;
                rec.witness = (a, b);
            }
        }
    }
    Ok(PairReport {
        pair: pair.name.clone(),
        samples,
        interval,
        growth,
        records,
    })
}
