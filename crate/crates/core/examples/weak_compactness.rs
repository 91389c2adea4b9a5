//! Compactness monitors on a Richards refinement family: the uniform-in-time
//! weak distance to the finest level, time translates of ν(u) and the
//! compensated product ∫∫ β(u) ζ(u).

use gdm::analysis::{compensated_product_probe, time_translate_norm, uniform_weak_distance, MomentTrajectory, TestFamily};
use gdm::harness::{solve_levels, ManufacturedProblem, StudyConfig};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = ManufacturedProblem::richards();
    let cfg = StudyConfig::new("richards", "richards");
    let levels = solve_levels(&cfg, &problem, 3)?;
    let pair = &problem.pair;
    let moments: Vec<MomentTrajectory> = levels
        .iter()
        .map(|l| MomentTrajectory::from_trajectory(&TestFamily::for_gd(&l.gd), &l.gd, &l.traj, |s| pair.beta(s)))
        .collect();
    for (l, m) in levels.iter().zip(&moments) {
        println!(
            "level {}: d(β(u), finest) = {:.4e}, ‖ν(u)(·+τ) − ν(u)‖² = {:.4e}",
            l.level,
            uniform_weak_distance(m, moments.last().unwrap()),
            time_translate_norm(&l.gd, &l.traj, pair, 0.125)
        );
    }
    let refs: Vec<_> = levels.iter().map(|l| (&l.gd, &l.traj)).collect();
    let probe = compensated_product_probe(&refs, pair, &|x, _| x[0], None);
    println!("∫∫ β(u) ζ(u) x: {:?}, gaps to finest {:?}", probe.values, probe.gaps);
    Ok(())
}
