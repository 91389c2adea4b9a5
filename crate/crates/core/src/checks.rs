//! Seeded property suites behind the `check` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{step_sum_identities, weak_metric_moments};
use crate::flux::{check_operator_hypotheses, LerayLionsOperator};
use crate::gd::{DofField, GradientDiscretisation};
use crate::instances::{build_mass_lumped_p1_1d, build_mass_lumped_p1_2d, Mesh1D, TriMesh2D};
use crate::nonlinearity::{check_pair_inequalities, NonlinearPair};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub case: String,
    pub pass: bool,
    pub detail: String,
}

fn record(suite: &str, case: impl Into<String>, pass: bool, detail: impl Into<String>) -> CheckRecord {
    CheckRecord {
        suite: suite.into(),
        case: case.into(),
        pass,
        detail: detail.into(),
    }
}

pub fn shipped_pairs() -> Vec<NonlinearPair> {
    vec![
        NonlinearPair::identity(),
        NonlinearPair::stefan(),
        NonlinearPair::richards(),
        NonlinearPair::doubly_degenerate(),
    ]
}

/// Inequalities linking β, ζ, ν and B for every shipped pair.
pub fn pair_suite(samples: usize, seed: u64) -> Vec<CheckRecord> {
    shipped_pairs()
        .iter()
        .map(|pair| match check_pair_inequalities(pair, samples, seed) {
            Ok(rep) => {
                let worst = rep
                    .records
                    .iter()
                    .map(|r| r.worst_margin)
                    .fold(f64::INFINITY, f64::min);
                record("pair_inequalities", &pair.name, true, format!("{samples} samples, worst margin {worst:e}"))
            }
            Err(e) => record("pair_inequalities", &pair.name, false, e.to_string()),
        })
        .collect()
}

/// Coercivity, monotonicity and growth of the shipped operators.
pub fn operator_suite(samples: usize, seed: u64) -> Vec<CheckRecord> {
    let ops = [
        LerayLionsOperator::laplace(),
        LerayLionsOperator::p_laplace(4.0).expect("valid exponent"),
        LerayLionsOperator::p_laplace(1.5).expect("valid exponent"),
        LerayLionsOperator::scalar_diffusion(|x, s| 1.0 + 0.5 * (x[0] * s).sin().powi(2), 1.0, 1.5)
            .expect("valid bounds"),
    ];
    ops.iter()
        .map(|op| match check_operator_hypotheses(op, samples, seed) {
            Ok(_) => record("operator_hypotheses", &op.name, true, format!("{samples} samples")),
            Err(e) => record("operator_hypotheses", &op.name, false, e.to_string()),
        })
        .collect()
}

pub fn shipped_instances() -> Vec<GradientDiscretisation> {
    vec![
        build_mass_lumped_p1_1d(&Mesh1D::graded(0.0, 1.0, 9, 1.3).expect("valid mesh"), 2.0).expect("valid gd"),
        build_mass_lumped_p1_2d(
            &TriMesh2D::structured_square([0.0, 0.0], [1.0, 1.0], 4).expect("valid mesh"),
            2.0,
        )
        .expect("valid gd"),
    ]
}

/// Largest `|Π_D χ(u) − χ(Π_D u)|` over the quadrature points of one case.
pub fn commutation_defect(gd: &GradientDiscretisation, u: &DofField, chi: impl Fn(f64) -> f64) -> f64 {
    let lhs = gd.reconstruct(&u.map(&chi)).expect("length checked").at_quadrature_points();
    let rhs = gd.reconstruct(u).expect("length checked").map(&chi).at_quadrature_points();
    lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// `Π_D χ(u) = χ(Π_D u)` for seeded `u` and χ drawn from the shipped pairs.
/// Only nonlinearities with `χ(0) = 0` apply, since boundary pieces carry 0.
pub fn commutation_suite(cases: usize, seed: u64) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = shipped_pairs();
    shipped_instances()
        .iter()
        .enumerate()
        .map(|(k, gd)| {
            let mut worst: f64 = 0.0;
            for _ in 0..cases {
                let u = DofField::from_fn(gd.dof_count(), |_, _| rng.random_range(-3.0..3.0));
                let pair = &pairs[rng.random_range(0..pairs.len())];
                worst = worst.max(match rng.random_range(0..3) {
                    0 => commutation_defect(gd, &u, |s| pair.beta(s)),
                    1 => commutation_defect(gd, &u, |s| pair.zeta(s)),
                    _ => commutation_defect(gd, &u, |s| pair.nu(s)),
                });
            }
            record(
                "commutation",
                format!("instance {k} ({}D)", gd.dim()),
                worst == 0.0,
                format!("{cases} cases, max defect {worst:e}"),
            )
        })
        .collect()
}

/// A seeded step family: nodes, weights with some zeros, τ and shift s.
pub fn random_step_family(rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>, f64, f64) {
    let n = rng.random_range(1..25);
    let mut nodes = vec![rng.random_range(-1.0..1.0)];
    for _ in 0..n {
        let last = *nodes.last().expect("non-empty");
        nodes.push(last + rng.random_range(0.05..1.0));
    }
    let a = (0..n)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..2.0) })
        .collect();
    (nodes, a, rng.random_range(0.05..3.0), rng.random_range(-2.0..2.0))
}

/// Identity (relative 1e-12) and inequality (slack 1e-12) on seeded families.
pub fn step_sum_suite(cases: usize, seed: u64) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_identity: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..cases {
        let (nodes, a, tau, s) = random_step_family(&mut rng);
        let r = step_sum_identities(&nodes, &a, tau, s).expect("valid family");
        let rel = if r.rhs1 == 0.0 {
            r.lhs1.abs()
        } else {
            (r.lhs1 - r.rhs1).abs() / r.rhs1
        };
        worst_identity = worst_identity.max(rel);
        worst_excess = worst_excess.max(r.lhs2 - r.rhs2);
    }
    vec![
        record(
            "step_sums",
            "identity",
            worst_identity <= 1e-12,
            format!("{cases} families, worst relative defect {worst_identity:e}"),
        ),
        record(
            "step_sums",
            "inequality",
            worst_excess <= 1e-12,
            format!("{cases} families, largest lhs − rhs {worst_excess:e}"),
        ),
    ]
}

/// Symmetry, triangle inequality and the `2 − 2^{1−K}` bound of the weak
/// metric on seeded moment triples.
pub fn metric_suite(cases: usize, seed: u64) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = crate::analysis::DEFAULT_FAMILY_SIZE;
    let bound = 2.0 - 2f64.powi(1 - k as i32);
    let (mut sym, mut tri, mut top): (f64, f64, f64) = (0.0, f64::NEG_INFINITY, 0.0);
    for _ in 0..cases {
        let scale = rng.random_range(0.01..5.0);
        let mut draw = || (0..k).map(|_| rng.random_range(-scale..scale)).collect::<Vec<f64>>();
        let (u, v, w) = (draw(), draw(), draw());
        let (uv, vu) = (weak_metric_moments(&u, &v), weak_metric_moments(&v, &u));
        sym = sym.max((uv - vu).abs());
        tri = tri.max(weak_metric_moments(&u, &w) - uv - weak_metric_moments(&v, &w));
        top = top.max(uv);
    }
    vec![
        record("weak_metric", "symmetry", sym <= 1e-12, format!("max asymmetry {sym:e}")),
        record("weak_metric", "triangle", tri <= 1e-12, format!("max excess {tri:e}")),
        record("weak_metric", "bound", top <= bound, format!("max {top} ≤ {bound}")),
    ]
}

/// Every suite with the default sizes.
pub fn all_checks(samples: usize, seed: u64) -> Vec<CheckRecord> {
    let mut out = pair_suite(samples, seed);
    out.extend(operator_suite(samples.min(20_000), seed));
    out.extend(commutation_suite(100, seed));
    out.extend(step_sum_suite(100, seed));
    out.extend(metric_suite(1000, seed));
    out.extend(shipped_instances().iter().enumerate().map(|(k, gd)| match gd.check_invariants() {
        Ok(r) => record("gd_invariants", format!("instance {k}"), true, format!("{} dofs", r.dof_count)),
        Err(e) => record("gd_invariants", format!("instance {k}"), false, e.to_string()),
    }));
    out
}
