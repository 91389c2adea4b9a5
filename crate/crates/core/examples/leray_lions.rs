//! Leray–Lions operators and the sampled check of coercivity, monotonicity
//! and growth.

use gdm::flux::{check_operator_hypotheses, LerayLionsOperator};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ops = [
        LerayLionsOperator::laplace(),
        LerayLionsOperator::p_laplace(4.0)?,
        LerayLionsOperator::scalar_diffusion(|x, s| 1.0 + 0.5 * (x[0] * s).sin().powi(2), 1.0, 1.5)?,
    ];
    for op in &ops {
        let a = op.eval([0.3, 0.4], 0.5, [1.0, -2.0]);
        println!("{}: a(x, s, (1, -2)) = ({:.4}, {:.4})", op.name, a[0], a[1]);
        let report = check_operator_hypotheses(op, 20_000, 3)?;
        for r in &report.records {
            println!("  {:<14} worst margin {:+.3e}", r.name, r.worst_margin);
        }
    }
    Ok(())
}
