//! The smallest heat problem: one interior dof, two implicit Euler steps.
//! The trajectory is (1, 1/3, 1/9).

use std::sync::Arc;

use gdm::analysis::{dt_dual_estimate, energy_ledger};
use gdm::flux::LerayLionsOperator;
use gdm::gd::TimeGrid;
use gdm::instances::{build_mass_lumped_p1_1d, Mesh1D};
use gdm::nonlinearity::NonlinearPair;
use gdm::scheme::{solve, ProblemSpec, SolverConfig};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2)?, 2.0)?;
    let mut spec = ProblemSpec::zero(NonlinearPair::identity(), LerayLionsOperator::laplace(), 0.5);
    spec.initial = Arc::new(|_| 1.0);
    let traj = solve(&gd, &TimeGrid::uniform(0.5, 2)?, &spec, &SolverConfig::default())?;
    for (t, u) in traj.grid.nodes().iter().zip(&traj.states) {
        println!("t = {t:.2}: u = {:.15}", u[0]);
    }
    for row in energy_ledger(&gd, &spec, 1.0, &traj) {
        println!("t = {:.2}: B {:.6} + flux {:.6} ≤ {:.6} (margin {:.6})", row.time, row.lhs_b, row.lhs_flux, row.rhs_b0 + row.rhs_f, row.margin);
    }
    println!("Σ δt |δβ(u)|⋆² = {:.12} (10/81 = {:.12})", dt_dual_estimate(&gd, &traj, &spec.pair)?, 10.0 / 81.0);
    Ok(())
}
