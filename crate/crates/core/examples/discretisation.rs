//! Mass-lumped P1 gradient discretisations: reconstruction, discrete
//! gradient, the dual seminorm and the coercivity constant.

use gdm::gd::{dual_seminorm, norm_coercivity, DofField};
use gdm::instances::{build_mass_lumped_p1_1d, build_mass_lumped_p1_2d, Mesh1D, TriMesh2D};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2)?, 2.0)?;
    let w = DofField::from_vec(vec![1.0]);
    println!("one interior dof: |w|⋆ = {}, C_D = {:.10}", dual_seminorm(&one, &w)?, norm_coercivity(&one, 0)?.0.value());

    let gd = build_mass_lumped_p1_2d(&TriMesh2D::structured_square([0.0, 0.0], [1.0, 1.0], 8)?, 2.0)?;
    let u = gd.interpolate(|x| (std::f64::consts::PI * x[0]).sin() * x[1] * (1.0 - x[1]))?;
    let inv = gd.check_invariants()?;
    println!("2D: {} dofs, h = {:.4}, partition defect {:e}", gd.dof_count(), gd.h(), inv.partition_defect);
    println!("  ‖Π u‖₂ = {:.6}, ‖∇ u‖₂ = {:.6}", gd.reconstruction_norm(&u, 2.0), gd.gradient_norm(&u, 2.0));
    println!("  |u|⋆ (p = 2) = {:.6}", dual_seminorm(&gd, &u)?);
    println!("  |u|⋆ (p = 4) = {:.6}", dual_seminorm(&gd.with_p(4.0), &u)?);
    Ok(())
}
