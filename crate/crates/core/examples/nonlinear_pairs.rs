//! Nonlinear pairs (β, ζ): the derived ν, β_r and B, the growth constants,
//! and the seeded inequality suite. Also builds a pair from a maximal
//! monotone graph.

use gdm::nonlinearity::{check_pair_inequalities, pair_from_graph, MonotoneGraph, NonlinearPair};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    for pair in [NonlinearPair::stefan(), NonlinearPair::richards(), NonlinearPair::doubly_degenerate()] {
        let g = pair.growth_constants();
        println!("{}: L_β = {}, L_ζ = {}, K0 = {:.4}, K1 = {:.4}, K2 = {:.4}", pair.name, pair.l_beta, pair.l_zeta, g.k0, g.k1, g.k2);
        for s in [-1.0, 0.5, 1.5, 3.0] {
            let b = pair.beta(s);
            println!(
                "  s = {s:>4}: β = {b:.3}, ζ = {:.3}, ν = {:.3}, β_r(β(s)) = {:.3}, B(β(s)) = {:.4}",
                pair.zeta(s),
                pair.nu(s),
                pair.beta_r(b)?,
                pair.big_b(b)?
            );
        }
        let report = check_pair_inequalities(&pair, 10_000, 1)?;
        for r in &report.records {
            println!("  {:<22} worst margin {:+.3e}", r.name, r.worst_margin);
        }
    }
    let heaviside = pair_from_graph(&MonotoneGraph::heaviside())?;
    println!("pair from the Heaviside graph: β(0.5) = {}, ζ(0.5) = {}", heaviside.beta(0.5), heaviside.zeta(0.5));
    Ok(())
}
