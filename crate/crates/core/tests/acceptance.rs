//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gdm::analysis::{minty_residual, recover_from_sum};
use gdm::checks::{commutation_suite, pair_suite, step_sum_suite};
use gdm::flux::LerayLionsOperator;
use gdm::gd::{dual_seminorm, norm_coercivity, DofField, TimeGrid};
use gdm::harness::{indicator_table, run_study, IndicatorConfig, Monitor, StudyConfig, StudyReport};
use gdm::instances::{build_mass_lumped_p1_1d, Mesh1D};
use gdm::nonlinearity::NonlinearPair;
use gdm::scheme::{solve, ProblemSpec, SolverConfig};

const SEED: u64 = 20_240_917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn study(name: &str, levels: usize, monitors: &[Monitor]) -> StudyReport {
    let mut cfg = StudyConfig::load(&config_dir().join(format!("{name}.toml"))).expect("shipped config parses");
    cfg.levels = levels;
    cfg.monitors = monitors.to_vec();
    run_study(&cfg).expect("shipped study solves")
}

fn sci(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn c1_commutation() -> Outcome {
    let recs = commutation_suite(100, SEED);
    outcome(
        recs.iter().all(|r| r.pass),
        recs.iter().map(|r| format!("{}: {}", r.case, r.detail)).collect::<Vec<_>>().join("; "),
    )
}

fn c2_energy() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut pass = true;
    for name in ["heat_1d", "stefan", "richards", "p_laplace4"] {
        let rep = study(name, 3, &[Monitor::EnergyLedger]);
        for r in rep.rows_of("energy_ledger_margin") {
            pass &= r.pass;
            worst = worst.min(r.value - r.threshold.unwrap_or(0.0));
        }
    }
    outcome(pass, format!("4 problems × 3 levels, smallest margin above −slack {worst:e}"))
}

fn c3_apriori() -> Outcome {
    let names = ["apriori_max_entropy", "apriori_grad_zeta_lp", "apriori_max_beta_l2", "dt_dual_estimate"];
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    for problem in ["heat_1d", "heat_2d", "stefan", "richards", "p_laplace4", "doubly_degenerate"] {
        let rep = study(problem, 3, &[Monitor::Apriori]);
        for n in names {
            let v = rep.series(n);
            pass &= v.iter().all(|x| x.is_finite());
            for w in v.windows(2) {
                let ratio = if w[0] == 0.0 { 0.0 } else { w[1] / w[0] };
                worst_ratio = worst_ratio.max(ratio);
                pass &= ratio <= 2.0;
            }
        }
    }
    outcome(pass, format!("6 families × 3 levels, largest level ratio {worst_ratio:.4}"))
}

fn c4_step_sums() -> Outcome {
    let recs = step_sum_suite(100, SEED);
    outcome(
        recs.iter().all(|r| r.pass),
        recs.iter().map(|r| format!("{}: {}", r.case, r.detail)).collect::<Vec<_>>().join("; "),
    )
}

fn c5_dual_hand_values() -> Outcome {
    let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap();
    let dual = dual_seminorm(&gd, &DofField::from_vec(vec![1.0])).unwrap();
    let (c, _) = norm_coercivity(&gd, SEED).unwrap();
    let pass = (dual - 0.25).abs() <= 1e-9 && (c.value() - 0.3535533906).abs() <= 1e-9;
    outcome(pass, format!("|w|⋆ = {dual:.12}, C_D = {:.12}", c.value()))
}

fn c6_indicator_decay() -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for dim in [1, 2] {
        let rows = indicator_table(&IndicatorConfig::new(dim)).unwrap();
        for name in ["S_D", "W_D", "T_D", "I_D"] {
            let v: Vec<f64> = rows.iter().filter(|r| r.indicator == name).map(|r| r.value).collect();
            pass &= v.len() == 4;
            for w in v.windows(2) {
                let r = w[1] / w[0];
                worst = worst.max(r);
                pass &= r <= 0.75;
            }
        }
    }
    outcome(pass, format!("both instances, 4 levels, largest ratio {worst:.4}"))
}

fn c7_uniform_nu() -> Outcome {
    let heat_cfg = StudyConfig::load(&config_dir().join("heat_1d.toml")).unwrap();
    let min_order = heat_cfg.thresholds.min_order.get("error_uniform_nu").copied().unwrap_or(0.9);
    let heat = study("heat_1d", 4, &[Monitor::ErrorUniformNu]);
    let stefan = study("stefan", 4, &[Monitor::ErrorUniformNu]);
    let (he, se) = (heat.series("error_uniform_nu"), stefan.series("error_uniform_nu"));
    let orders = heat.series("order_error_uniform_nu");
    let last = *orders.last().unwrap();
    let pass = strictly_decreasing(&he) && strictly_decreasing(&se) && orders.len() == 3 && last >= min_order;
    outcome(
        pass,
        format!("heat {}, order {orders:.3?} (target ≥ {min_order}); stefan {}", sci(&he), sci(&se)),
    )
}

fn c8_gradient() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["heat_1d", "stefan", "p_laplace4"] {
        let e = study(name, 4, &[Monitor::ErrorGradientZeta]).series("error_gradient_zeta");
        pass &= e.len() == 4 && strictly_decreasing(&e);
        detail.push(format!("{name} {}", sci(&e)));
    }
    outcome(pass, detail.join("; "))
}

fn c9_compensated() -> Outcome {
    let gaps = study("doubly_degenerate", 4, &[Monitor::CompensatedProbe]).series("compensated_probe_gap");
    let pass = gaps.len() >= 3 && strictly_decreasing(&gaps) && gaps[gaps.len() - 1] <= 0.5 * gaps[0];
    outcome(pass, format!("gaps {}", sci(&gaps)))
}

fn c10_pair_inequalities() -> Outcome {
    let recs = pair_suite(100_000, SEED);
    outcome(
        recs.iter().all(|r| r.pass),
        recs.iter().map(|r| format!("{}: {}", r.case, r.detail)).collect::<Vec<_>>().join("; "),
    )
}

fn c11_minty() -> Outcome {
    // common quadrature set: the pieces of a uniform 1D discretisation
    let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 64).unwrap(), 2.0).unwrap();
    let quad: Vec<_> = (0..gd.pieces().len()).flat_map(|k| gd.piece_quadrature(k).to_vec()).collect();
    let meas: f64 = quad.iter().map(|q| q.1).sum();
    let weights: Vec<f64> = quad.iter().map(|q| q.1).collect();
    let pair = NonlinearPair::doubly_degenerate();
    let w: Vec<f64> = quad.iter().map(|(x, _)| 4.0 * (6.0 * x[0]).sin() - 0.5).collect();
    let beta: Vec<f64> = w.iter().map(|&s| pair.beta(s)).collect();
    let zeta: Vec<f64> = w.iter().map(|&s| pair.zeta(s)).collect();
    let sums: Vec<f64> = beta.iter().zip(&zeta).map(|(b, z)| b + z).collect();
    let back = recover_from_sum(&pair, &sums).unwrap();
    let round = minty_residual(&pair, &back, &beta, &zeta, &weights);
    let perturbed: Vec<f64> = quad
        .iter()
        .zip(&zeta)
        .map(|((x, _), z)| if x[0] < 0.5 { z + 0.1 } else { *z })
        .collect();
    let r = minty_residual(&pair, &w, &beta, &perturbed, &weights);
    let expect = 0.05 * (meas / 2.0).sqrt();
    let pass = round <= 1e-10 && (r - expect).abs() <= 1e-10;
    outcome(pass, format!("round trip {round:e}, perturbed {r:.12} vs {expect:.12}"))
}

fn c12_golden() -> Outcome {
    let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap();
    let mut spec = ProblemSpec::zero(NonlinearPair::identity(), LerayLionsOperator::laplace(), 0.5);
    spec.initial = Arc::new(|_| 1.0);
    let traj = solve(&gd, &TimeGrid::uniform(0.5, 2).unwrap(), &spec, &SolverConfig::default()).unwrap();
    let got: Vec<f64> = traj.states.iter().map(|u| u[0]).collect();
    let pass = got
        .iter()
        .zip([1.0, 1.0 / 3.0, 1.0 / 9.0])
        .all(|(g, e)| (g - e).abs() <= 1e-12);
    outcome(pass, format!("{got:?}"))
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Duration);
    let secs = Duration::from_secs;
    let criteria: [Criterion; 12] = [
        (1, "structural identity Π_D χ(u) = χ(Π_D u)", c1_commutation, secs(1)),
        (2, "energy inequality ledger", c2_energy, secs(120)),
        (3, "a priori bounds and dual time-derivative estimate", c3_apriori, secs(120)),
        (4, "step-sum identity and inequality", c4_step_sums, secs(1)),
        (5, "dual seminorm and coercivity hand values", c5_dual_hand_values, secs(1)),
        (6, "indicator decay", c6_indicator_decay, secs(60)),
        (7, "uniform-in-time convergence of ν(u)", c7_uniform_nu, secs(180)),
        (8, "gradient convergence of ζ(u)", c8_gradient, secs(180)),
        (9, "compensated-product probe", c9_compensated, secs(120)),
        (10, "nonlinearity inequality suite", c10_pair_inequalities, secs(10)),
        (11, "Minty residual", c11_minty, secs(1)),
        (12, "heat 1-dof golden trajectory", c12_golden, secs(1)),
    ];
    let mut failures = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= budget;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name} ({:.2?} of {:?}): {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed,
            budget,
            out.detail
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
