//! Quadrature rules: fixed Gauss rules on intervals and triangles, and an
//! adaptive Gauss–Kronrod integrator for scalar integrands.

use crate::Vec2;

/// 5-point Gauss–Legendre nodes and weights on [-1, 1] (exact for degree 9).
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// 3-point Gauss–Legendre rule on [-1, 1], used for time integrals.
pub const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
pub const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Gauss–Legendre points mapped to [a, b], returned as (x, weight).
pub fn gauss_interval(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(move |(&x, &w)| (mid + half * x, half * w))
}

/// Three-point Gauss rule in time on [a, b].
pub fn gauss_time(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL3_NODES
        .iter()
        .zip(GL3_WEIGHTS.iter())
        .map(move |(&x, &w)| (mid + half * x, half * w))
}

// Degree-5, 7-point rule on the reference triangle (barycentric coords, weights sum to 1).
const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Signed area of triangle (a, b, c); positive for counter-clockwise order.
pub fn triangle_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Degree-5 rule on an arbitrary triangle, returned as (point, weight).
pub fn gauss_triangle(a: Vec2, b: Vec2, c: Vec2) -> impl Iterator<Item = (Vec2, f64)> {
    let area = triangle_area(a, b, c).abs();
    TRI7.iter().map(move |(l, w)| {
        let p = [
            l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
            l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
        ];
        (p, w * area)
    })
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] to absolute tolerance `tol`.
///
/// Returns the integral estimate and the accumulated error estimate. Bisection
/// stops at depth 50 per branch; the error estimate then reports what remains.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut stack = vec![(lo, hi, tol, 0u32)];
    let mut total = 0.0;
    let mut err = 0.0;
    while let Some((l, r, t, depth)) = stack.pop() {
        let (v, e) = gk15(&f, l, r);
        if e <= t || depth >= 50 || (r - l) < 1e-14 * (1.0 + l.abs()) {
            total += v;
            err += e;
        } else {
            let m = 0.5 * (l + r);
            stack.push((l, m, 0.5 * t, depth + 1));
            stack.push((m, r, 0.5 * t, depth + 1));
        }
    }
    (sign * total, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rule_is_exact_for_degree_nine() {
        let s: f64 = gauss_interval(0.0, 2.0).map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn triangle_rule_integrates_quadratics() {
        // ∫ x² over the unit right triangle = 1/12
        let s: f64 = gauss_triangle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])
            .map(|(p, w)| w * p[0] * p[0])
            .sum();
        assert!((s - 1.0 / 12.0).abs() < 1e-12);
        let s: f64 = gauss_triangle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])
            .map(|(p, w)| w * p[0].powi(2) * p[1].powi(3))
            .sum();
        // ∫ x² y³ = 2!3!/7! = 12/5040
        assert!((s - 12.0 / 5040.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let (v, _) = integrate_adaptive(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-13);
        assert!((v - (0.09 / 2.0 + 0.49 / 2.0)).abs() < 1e-12);
        let (v, _) = integrate_adaptive(f64::sin, 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-12);
        let (v, _) = integrate_adaptive(|x| x, 1.0, 0.0, 1e-13);
        assert!((v + 0.5).abs() < 1e-14);
    }
}
