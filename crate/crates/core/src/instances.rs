//! Meshes and mass-lumped P1 gradient discretisations in 1D and 2D.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::gd::{CellPiece, GdError, GradCell, GradientDiscretisation, TimeGrid};
use crate::geometry::Region;
use crate::quadrature::triangle_area;
use crate::Vec2;

/// Sorted vertices of a subdivision of `(x_min, x_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    vertices: Vec<f64>,
}

impl Mesh1D {
    pub fn new(vertices: Vec<f64>) -> Result<Self, GdError> {
        if vertices.len() < 2 {
            return Err(GdError::DegenerateMesh("need at least one element".into()));
        }
        if vertices.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GdError::DegenerateMesh("vertices must increase strictly".into()));
        }
        Ok(Self { vertices })
    }

    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self, GdError> {
        Self::graded(a, b, n, 1.0)
    }

    /// Vertices `a + (b − a)(k/n)^grading`; grading 1 is uniform.
    pub fn graded(a: f64, b: f64, n: usize, grading: f64) -> Result<Self, GdError> {
        if n == 0 || !(b > a) || !(grading > 0.0) {
            return Err(GdError::DegenerateMesh(format!(
                "invalid 1D mesh request ({a}, {b}), n={n}, grading={grading}"
            )));
        }
        let v = (0..=n)
            .map(|k| a + (b - a) * (k as f64 / n as f64).powf(grading))
            .collect();
        Self::new(v)
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn element_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Splits every element at its midpoint.
    pub fn refined(&self) -> Self {
        let mut v = Vec::with_capacity(2 * self.vertices.len() - 1);
        for w in self.vertices.windows(2) {
            v.push(w[0]);
            v.push(0.5 * (w[0] + w[1]));
        }
        v.push(self.vertices[self.vertices.len() - 1]);
        Self { vertices: v }
    }
}

/// Mass-lumped P1: dofs at interior vertices, midpoint dual cells, and the two
/// boundary half-cells reconstructed as 0.
pub fn build_mass_lumped_p1_1d(mesh: &Mesh1D, p: f64) -> Result<GradientDiscretisation, GdError> {
    let v = &mesh.vertices;
    let n = mesh.element_count();
    if n < 2 {
        return Err(GdError::DegenerateMesh("mass-lumped P1 needs ≥ 2 elements".into()));
    }
    let dof = |k: usize| (k > 0 && k < n).then(|| k - 1);
    let mut pieces = Vec::with_capacity(2 * n);
    let mut cells = Vec::with_capacity(n);
    for e in 0..n {
        let (a, b) = (v[e], v[e + 1]);
        let len = b - a;
        let m = 0.5 * (a + b);
        pieces.push(CellPiece {
            dof: dof(e),
            cell: e,
            region: Region::Interval { a, b: m },
            measure: m - a,
        });
        pieces.push(CellPiece {
            dof: dof(e + 1),
            cell: e,
            region: Region::Interval { a: m, b },
            measure: b - m,
        });
        let entries = [(e, -1.0 / len), (e + 1, 1.0 / len)]
            .into_iter()
            .filter_map(|(k, g)| dof(k).map(|i| (i, [g, 0.0])))
            .collect();
        cells.push(GradCell {
            region: Region::Interval { a, b },
            measure: len,
            entries,
        });
    }
    let dof_points = (1..n).map(|k| [v[k], 0.0]).collect();
    GradientDiscretisation::new(
        format!("p1_lumped_1d_n{n}"),
        1,
        p,
        dof_points,
        pieces,
        cells,
        mesh.h(),
    )
}

/// Conforming triangulation with counter-clockwise triangles.
#[derive(Debug, Clone)]
pub struct TriMesh2D {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
}

impl TriMesh2D {
    /// Boundary vertices are those on edges owned by a single triangle.
    pub fn new(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>) -> Result<Self, GdError> {
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(GdError::DegenerateMesh(format!("triangle {k} has invalid vertex")));
            }
            let area = triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if !(area > 0.0) {
                return Err(GdError::DegenerateMesh(format!(
                    "triangle {k} has non-positive oriented area {area}"
                )));
            }
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if let Some(e) = edges.iter().find(|(_, &c)| c > 2) {
            return Err(GdError::DegenerateMesh(format!("edge {:?} shared by > 2 triangles", e.0)));
        }
        let mut boundary = vec![false; vertices.len()];
        for (&(a, b), &c) in &edges {
            if c == 1 {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
        })
    }

    /// `n × n` squares of the box, each cut along its rising diagonal.
    pub fn structured_square(lo: Vec2, hi: Vec2, n: usize) -> Result<Self, GdError> {
        if n == 0 || !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(GdError::DegenerateMesh("invalid square mesh request".into()));
        }
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([
                    lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
                ]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        Self::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.tri_area(t)).sum()
    }

    fn tri_area(&self, t: &[usize; 3]) -> f64 {
        triangle_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]])
    }

    /// Longest edge.
    pub fn h(&self) -> f64 {
        let d = |a: Vec2, b: Vec2| (a[0] - b[0]).hypot(a[1] - b[1]);
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |j| (t[j], t[(j + 1) % 3])))
            .map(|(a, b)| d(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Barycentric dual-cell area of every vertex.
    pub fn dual_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.vertices.len()];
        for t in &self.triangles {
            let a = self.tri_area(t) / 3.0;
            for &v in t {
                out[v] += a;
            }
        }
        out
    }

    /// Red refinement: every triangle into four through its edge midpoints.
    pub fn refined(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec2>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Self::new(vertices, triangles).expect("red refinement of a valid mesh is valid")
    }
}

/// Mass-lumped P1 on triangles with barycentric dual cells.
pub fn build_mass_lumped_p1_2d(mesh: &TriMesh2D, p: f64) -> Result<GradientDiscretisation, GdError> {
    let mut dof_of = vec![None; mesh.vertices.len()];
    let mut dof_points = Vec::new();
    for (v, x) in mesh.vertices.iter().enumerate() {
        if !mesh.boundary[v] {
            dof_of[v] = Some(dof_points.len());
            dof_points.push(*x);
        }
    }
    let mut pieces = Vec::with_capacity(3 * mesh.triangles.len());
    let mut cells = Vec::with_capacity(mesh.triangles.len());
    for (k, t) in mesh.triangles.iter().enumerate() {
        let x: Vec<Vec2> = t.iter().map(|&v| mesh.vertices[v]).collect();
        let area = triangle_area(x[0], x[1], x[2]);
        let bary = [
            (x[0][0] + x[1][0] + x[2][0]) / 3.0,
            (x[0][1] + x[1][1] + x[2][1]) / 3.0,
        ];
        let midp = |a: Vec2, b: Vec2| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let mut entries = Vec::new();
        for j in 0..3 {
            let (a, b, c) = (x[j], x[(j + 1) % 3], x[(j + 2) % 3]);
            let quad = vec![a, midp(a, b), bary, midp(c, a)];
            pieces.push(CellPiece {
                dof: dof_of[t[j]],
                cell: k,
                region: Region::Polygon(quad),
                measure: area / 3.0,
            });
            if let Some(i) = dof_of[t[j]] {
                // gradient of the hat function of vertex a on this triangle
                let g = [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)];
                entries.push((i, g));
            }
        }
        cells.push(GradCell {
            region: Region::Polygon(x),
            measure: area,
            entries,
        });
    }
    GradientDiscretisation::new(
        format!("p1_lumped_2d_t{}", mesh.triangles.len()),
        2,
        p,
        dof_points,
        pieces,
        cells,
        mesh.h(),
    )
}

/// How the time step follows the mesh size under refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRule {
    /// `δt ∝ h`.
    Linear,
    /// `δt ∝ h²`.
    Quadratic,
}

impl TimeRule {
    /// Number of steps at level `l` given the base count.
    pub fn steps_at(self, base: usize, level: usize) -> usize {
        match self {
            TimeRule::Linear => base << level,
            TimeRule::Quadratic => base << (2 * level),
        }
    }
}

#[derive(Debug, Clone)]
pub enum BaseMesh {
    OneD(Mesh1D),
    TwoD(TriMesh2D),
}

impl BaseMesh {
    pub fn refined(&self) -> Self {
        match self {
            BaseMesh::OneD(m) => BaseMesh::OneD(m.refined()),
            BaseMesh::TwoD(m) => BaseMesh::TwoD(m.refined()),
        }
    }

    pub fn build(&self, p: f64) -> Result<GradientDiscretisation, GdError> {
        match self {
            BaseMesh::OneD(m) => build_mass_lumped_p1_1d(m, p),
            BaseMesh::TwoD(m) => build_mass_lumped_p1_2d(m, p),
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            BaseMesh::OneD(m) => m.h(),
            BaseMesh::TwoD(m) => m.h(),
        }
    }
}

/// One level of a refinement family.
#[derive(Debug, Clone)]
pub struct Level {
    pub mesh: BaseMesh,
    pub gd: GradientDiscretisation,
    pub grid: TimeGrid,
}

#[derive(Debug, Clone)]
pub struct RefinementFamily {
    pub levels: Vec<Level>,
    pub rule: TimeRule,
}

/// Uniformly refines `base` `levels − 1` times, with `base_steps` time steps on
/// `(0, final_time)` at level 0 scaled by `rule`.
pub fn refine(
    base: &BaseMesh,
    p: f64,
    final_time: f64,
    base_steps: usize,
    rule: TimeRule,
    levels: usize,
) -> Result<RefinementFamily, GdError> {
    if levels == 0 {
        return Err(GdError::DegenerateMesh("a family needs at least one level".into()));
    }
    let mut out = Vec::with_capacity(levels);
    let mut mesh = base.clone();
    for l in 0..levels {
        if l > 0 {
            mesh = mesh.refined();
        }
        let gd = mesh.build(p)?;
        let grid = TimeGrid::uniform(final_time, rule.steps_at(base_steps, l))?;
        out.push(Level {
            mesh: mesh.clone(),
            gd,
            grid,
        });
    }
    Ok(RefinementFamily { levels: out, rule })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn two_element_1d() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap();
        assert_eq!(gd.dof_count(), 1);
        assert_eq!(gd.dof_measures(), &[0.5]);
        let g = gd.gradient(&DVector::from_vec(vec![1.5])).unwrap();
        assert_eq!(g, vec![[3.0, 0.0], [-3.0, 0.0]]);
        let inv = gd.check_invariants().unwrap();
        assert!((inv.dof_measure_sum - 0.5).abs() < 1e-15);
        assert!((inv.domain_measure - 1.0).abs() < 1e-15);
    }

    #[test]
    fn counts_and_boundary_half_cells() {
        let mesh = Mesh1D::uniform(0.0, 2.0, 10).unwrap();
        let gd = build_mass_lumped_p1_1d(&mesh, 2.0).unwrap();
        assert_eq!(gd.dof_count(), 9);
        let owned: f64 = gd.dof_measures().iter().sum();
        assert!((owned - (2.0 - 0.2)).abs() < 1e-14);
        assert!(build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 1).unwrap(), 2.0).is_err());
    }

    #[test]
    fn square_meshes() {
        let m = TriMesh2D::structured_square([0.0, 0.0], [1.0, 1.0], 1).unwrap();
        let gd = build_mass_lumped_p1_2d(&m, 2.0).unwrap();
        assert_eq!(gd.dof_count(), 0);
        for n in [2, 3, 5] {
            let m = TriMesh2D::structured_square([0.0, 0.0], [1.0, 1.0], n).unwrap();
            let gd = build_mass_lumped_p1_2d(&m, 2.0).unwrap();
            assert_eq!(gd.dof_count(), (n - 1) * (n - 1));
            gd.check_invariants().unwrap();
            let dual: f64 = m.dual_areas().iter().sum();
            assert!((dual - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_gradients_are_exact() {
        let m = TriMesh2D::structured_square([0.0, 0.0], [1.0, 1.0], 4).unwrap();
        let gd = build_mass_lumped_p1_2d(&m, 2.0).unwrap();
        let u = gd.nodal_interpolant(|x| 2.0 * x[0] + 3.0 * x[1]);
        let grads = gd.gradient(&u).unwrap();
        for (k, t) in m.triangles().iter().enumerate() {
            if t.iter().all(|&v| !m.is_boundary(v)) {
                assert!((grads[k][0] - 2.0).abs() < 1e-12 && (grads[k][1] - 3.0).abs() < 1e-12);
            }
        }
        // with all vertices as unknowns (full nodal field) every triangle is exact
        for t in m.triangles() {
            let x: Vec<Vec2> = t.iter().map(|&v| m.vertices()[v]).collect();
            let area = triangle_area(x[0], x[1], x[2]);
            let mut g = [0.0, 0.0];
            for j in 0..3 {
                let (a, b, c) = (x[j], x[(j + 1) % 3], x[(j + 2) % 3]);
                let val = 2.0 * a[0] + 3.0 * a[1];
                g[0] += val * (b[1] - c[1]) / (2.0 * area);
                g[1] += val * (c[0] - b[0]) / (2.0 * area);
            }
            assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_family() {
        let fam = refine(
            &BaseMesh::OneD(Mesh1D::uniform(0.0, 1.0, 4).unwrap()),
            2.0,
            1.0,
            10,
            TimeRule::Linear,
            3,
        )
        .unwrap();
        let counts: Vec<usize> = fam
            .levels
            .iter()
            .map(|l| match &l.mesh {
                BaseMesh::OneD(m) => m.element_count(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(counts, vec![4, 8, 16]);
        let dts: Vec<f64> = fam.levels.iter().map(|l| l.grid.dt_max()).collect();
        for (d, e) in dts.iter().zip([0.1, 0.05, 0.025]) {
            assert!((d - e).abs() < 1e-15);
        }
        let m = TriMesh2D::structured_square([0.0, 0.0], [2.0, 1.0], 3).unwrap();
        let r = m.refined().refined();
        assert!((r.area() - 2.0).abs() < 1e-14);
        assert_eq!(r.triangles().len(), 16 * m.triangles().len());
        assert!((r.h() - 0.25 * m.h()).abs() < 1e-14);
    }
}
