//! One Stefan solve with a manufactured solution crossing the plateau of ζ:
//! Newton telemetry, error monitors and the energy ledger.

use gdm::analysis::energy_ledger;
use gdm::gd::TimeGrid;
use gdm::harness::{error_gradient_zeta, error_uniform_nu, ManufacturedProblem};
use gdm::instances::{build_mass_lumped_p1_1d, Mesh1D};
use gdm::scheme::{solve, SolverConfig};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = ManufacturedProblem::stefan();
    let spec = problem.spec(0.5);
    let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 32)?, 2.0)?;
    let traj = solve(&gd, &TimeGrid::uniform(0.5, 32)?, &spec, &SolverConfig::default())?;
    let iterations: usize = traj.telemetry.iter().map(|t| t.newton_iterations).sum();
    let worst = traj.telemetry.iter().map(|t| t.final_residual).fold(0.0, f64::max);
    println!("{} steps, {iterations} Newton iterations, largest final residual {worst:e}", traj.grid.steps());
    println!("max_n ‖Π ν(u) − ν(ū)‖₂ = {:.4e}", error_uniform_nu(&gd, &traj, &problem.pair, &problem.exact));
    println!("‖∇ ζ(u) − ∇ ζ(ū)‖₂ = {:.4e}", error_gradient_zeta(&gd, &traj, &problem.pair, &problem.grad_zeta));
    let ledger = energy_ledger(&gd, &spec, 1.0, &traj);
    let min = ledger.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    println!("energy ledger: {} nodes, smallest margin {min:.3e}, all hold: {}", ledger.len(), ledger.iter().all(|r| r.holds()));
    Ok(())
}
