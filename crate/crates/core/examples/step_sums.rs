//! Integrals of sums over time steps: the identity with τ Σ δt a and the
//! bound by (τ + δt) Σ δt a, on a non-uniform grid.

use gdm::analysis::step_sum_identities;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let uniform: Vec<f64> = (0..=5).map(f64::from).collect();
    let r = step_sum_identities(&uniform, &[0.0, 0.0, 1.0, 0.0, 0.0], 2.0, 0.0)?;
    println!("single weight, δt = 1, τ = 2: lhs1 = {}, rhs1 = {}", r.lhs1, r.rhs1);

    let nodes = [0.0, 0.1, 0.35, 0.4, 0.9, 1.0, 1.6];
    let a = [1.0, 0.0, 2.5, 0.3, 0.0, 1.2];
    for (tau, s) in [(0.2, 0.0), (0.5, 0.3), (1.7, -0.8)] {
        let r = step_sum_identities(&nodes, &a, tau, s)?;
        println!(
            "τ = {tau}, s = {s}: {:.12} = {:.12}; {:.6} ≤ {:.6}",
            r.lhs1, r.rhs1, r.lhs2, r.rhs2
        );
    }
    Ok(())
}
