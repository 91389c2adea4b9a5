//! Weak-in-space metric built from a finite family of tensor sines.

use std::f64::consts::PI;

use crate::gd::{DofField, GradientDiscretisation, Trajectory};
use crate::Vec2;

pub const DEFAULT_FAMILY_SIZE: usize = 16;

/// Witnesses `φ_l` on a box `[lo, hi]`, each vanishing on the box boundary.
///
/// In 1D `φ_l(x) = sin((l+1)π x̂)`; in 2D the products
/// `sin(mπ x̂) sin(nπ ŷ)` ordered by `m + n`, then by `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFamily {
    dim: usize,
    lo: Vec2,
    hi: Vec2,
    modes: Vec<(usize, usize)>,
}

impl TestFamily {
    pub fn new(dim: usize, lo: Vec2, hi: Vec2, size: usize) -> Self {
        let modes = if dim == 1 {
            (1..=size).map(|m| (m, 0)).collect()
        } else {
            (2..)
                .flat_map(|total| (1..total).map(move |m| (m, total - m)))
                .take(size)
                .collect()
        };
        Self { dim, lo, hi, modes }
    }

    /// Default family on the bounding box of the discretisation's domain.
    pub fn for_gd(gd: &GradientDiscretisation) -> Self {
        let (lo, hi) = gd
            .pieces()
            .iter()
            .map(|p| p.region.bbox())
            .fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), (a, b)| {
                ([lo[0].min(a[0]), lo[1].min(a[1])], [hi[0].max(b[0]), hi[1].max(b[1])])
            });
        Self::new(gd.dim(), lo, hi, DEFAULT_FAMILY_SIZE)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eval(&self, l: usize, x: Vec2) -> f64 {
        let (m, n) = self.modes[l];
        let xh = (x[0] - self.lo[0]) / (self.hi[0] - self.lo[0]);
        let sx = (m as f64 * PI * xh).sin();
        if self.dim == 1 {
            return sx;
        }
        let yh = (x[1] - self.lo[1]) / (self.hi[1] - self.lo[1]);
        sx * (n as f64 * PI * yh).sin()
    }

    pub fn gradient(&self, l: usize, x: Vec2) -> Vec2 {
        let (m, n) = self.modes[l];
        let (wx, wy) = (self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]);
        let ax = m as f64 * PI / wx;
        let xh = (x[0] - self.lo[0]) * ax;
        if self.dim == 1 {
            return [ax * xh.cos(), 0.0];
        }
        let ay = n as f64 * PI / wy;
        let yh = (x[1] - self.lo[1]) * ay;
        [ax * xh.cos() * yh.sin(), ay * xh.sin() * yh.cos()]
    }

    /// `M[l][i] = ∫_{Ω_i} φ_l`, so that `⟨Π_D v, φ_l⟩ = (M v)_l`.
    pub fn moment_matrix(&self, gd: &GradientDiscretisation) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|l| {
                let mut row = vec![0.0; gd.dof_count()];
                for (k, pc) in gd.pieces().iter().enumerate() {
                    if let Some(i) = pc.dof {
                        row[i] += gd.piece_quadrature(k).iter().map(|(x, w)| w * self.eval(l, *x)).sum::<f64>();
                    }
                }
                row
            })
            .collect()
    }

    pub fn moments(&self, gd: &GradientDiscretisation, v: &DofField) -> Vec<f64> {
        apply_moments(&self.moment_matrix(gd), v)
    }

    /// `⟨g, φ_l⟩` by the quadrature of the discretisation's pieces.
    pub fn moments_of_fn(&self, gd: &GradientDiscretisation, g: impl Fn(Vec2) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|l| {
                (0..gd.pieces().len())
                    .flat_map(|k| gd.piece_quadrature(k).iter())
                    .map(|(x, w)| w * g(*x) * self.eval(l, *x))
                    .sum()
            })
            .collect()
    }
}

fn apply_moments(m: &[Vec<f64>], v: &DofField) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum()).collect()
}

/// `d(v, w) = Σ_l 2^{−l} min(1, |⟨v − w, φ_l⟩|)` from precomputed moments.
pub fn weak_metric_moments(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(l, (x, y))| 0.5f64.powi(l as i32) * (x - y).abs().min(1.0))
        .sum()
}

pub fn weak_metric(family: &TestFamily, gd: &GradientDiscretisation, v: &DofField, w: &DofField) -> f64 {
    let m = family.moment_matrix(gd);
    weak_metric_moments(&apply_moments(&m, v), &apply_moments(&m, w))
}

/// Moments of a piecewise-constant-in-time field at each time node.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    pub nodes: Vec<f64>,
    pub moments: Vec<Vec<f64>>,
}

impl MomentTrajectory {
    /// Moments of `Π_D χ(uⁿ)` for every state.
    pub fn from_trajectory(
        family: &TestFamily,
        gd: &GradientDiscretisation,
        traj: &Trajectory,
        chi: impl Fn(f64) -> f64,
    ) -> Self {
        let m = family.moment_matrix(gd);
        Self {
            nodes: traj.grid.nodes().to_vec(),
            moments: traj.states.iter().map(|u| apply_moments(&m, &u.map(&chi))).collect(),
        }
    }

    /// Moments at `t`, with value `uⁿ⁺¹` on `(tⁿ, tⁿ⁺¹]`.
    pub fn at(&self, t: f64) -> &[f64] {
        let k = self.nodes.partition_point(|&x| x < t);
        &self.moments[k.min(self.moments.len() - 1)]
    }
}

/// `sup_t d(a(t), b(t))`, attained on the merged partition of both grids.
pub fn uniform_weak_distance(a: &MomentTrajectory, b: &MomentTrajectory) -> f64 {
    let mut times: Vec<f64> = a.nodes.iter().chain(&b.nodes).copied().collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .iter()
        .map(|&t| weak_metric_moments(a.at(t), b.at(t)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_mass_lumped_p1_1d, Mesh1D};

    #[test]
    fn family_vanishes_on_boundary_and_gradient_matches() {
        let f = TestFamily::new(2, [0.0, 0.0], [1.0, 2.0], 16);
        assert_eq!(f.len(), 16);
        for l in 0..f.len() {
            for x in [[0.0, 0.7], [1.0, 0.3], [0.4, 0.0], [0.2, 2.0]] {
                assert!(f.eval(l, x).abs() < 1e-12);
            }
            let x = [0.31, 0.77];
            let e = 1e-6;
            let g = f.gradient(l, x);
            let gx = (f.eval(l, [x[0] + e, x[1]]) - f.eval(l, [x[0] - e, x[1]])) / (2.0 * e);
            let gy = (f.eval(l, [x[0], x[1] + e]) - f.eval(l, [x[0], x[1] - e])) / (2.0 * e);
            assert!((g[0] - gx).abs() < 1e-6 && (g[1] - gy).abs() < 1e-6);
        }
    }

    #[test]
    fn metric_of_normalised_witness() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 64).unwrap(), 2.0).unwrap();
        let fam = TestFamily::for_gd(&gd);
        // v − w = φ₀ / ‖φ₀‖² with ‖φ₀‖² = 1/2
        let c = fam.moments_of_fn(&gd, |x| 2.0 * (PI * x[0]).sin());
        // Gram entries by an independent midpoint rule
        let n = 20000;
        let gram: Vec<f64> = (0..fam.len())
            .map(|l| {
                (0..n)
                    .map(|k| {
                        let x = (k as f64 + 0.5) / n as f64;
                        2.0 * (PI * x).sin() * ((l + 1) as f64 * PI * x).sin() / n as f64
                    })
                    .sum()
            })
            .collect();
        let expect: f64 = gram.iter().enumerate().map(|(l, g)| 0.5f64.powi(l as i32) * g.abs().min(1.0)).sum();
        let got = weak_metric_moments(&c, &vec![0.0; fam.len()]);
        assert!((got - expect).abs() < 1e-6, "{got} {expect}");
        assert!((got - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identical_fields_have_zero_distance() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 8).unwrap(), 2.0).unwrap();
        let fam = TestFamily::for_gd(&gd);
        let v = DofField::from_fn(7, |i, _| i as f64);
        assert_eq!(weak_metric(&fam, &gd, &v, &v), 0.0);
    }

    #[test]
    fn sup_over_merged_partition() {
        let a = MomentTrajectory {
            nodes: vec![0.0, 0.5, 1.0],
            moments: vec![vec![0.0], vec![0.0], vec![0.0]],
        };
        let b = MomentTrajectory {
            nodes: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            moments: vec![vec![0.0], vec![0.0], vec![0.0], vec![0.3], vec![0.0]],
        };
        assert!((uniform_weak_distance(&a, &b) - 0.3).abs() < 1e-15);
        assert_eq!(uniform_weak_distance(&a, &a), 0.0);
    }
}
