//! Runs a refinement study for a named manufactured problem and prints the
//! monitor table.
//!
//! `cargo run --release --example refinement_study -- stefan 4`

use gdm::harness::{run_study, StudyConfig};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let problem = args.next().unwrap_or_else(|| "heat_1d".into());
    let levels = args.next().map_or(Ok(4), |s| s.parse())?;
    study(&problem, levels)
}

pub fn study(problem: &str, levels: usize) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = StudyConfig::new(problem, problem);
    cfg.levels = levels;
    if problem == "heat_2d" {
        cfg.base_elements = 4;
    }
    let report = run_study(&cfg)?;
    for r in &report.rows {
        println!(
            "{:<28} level {} h {:.4} dt {:.5} value {:>12.5e} {}",
            r.monitor,
            r.level,
            r.h,
            r.dt,
            r.value,
            if r.pass { "ok" } else { "FAIL" }
        );
    }
    for l in &report.levels {
        println!("level {}: {} dofs, {} Newton iterations, {} fixed-point steps", l.level, l.dofs, l.newton_iterations, l.fixed_point_steps);
    }
    println!("overall: {}", if report.pass { "pass" } else { "fail" });
    Ok(())
}
