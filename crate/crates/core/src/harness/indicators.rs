//! Tables of the discretisation indicators across refinement levels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::gd::{
    compactness_modulus, consistency_defect, interpolation_defect, limit_conformity_defect, norm_coercivity, BoundKind,
};
use crate::instances::{BaseMesh, Mesh1D, TriMesh2D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    /// 1 (unit interval) or 2 (unit square)
    pub dim: usize,
    #[serde(default = "default_base")]
    pub base_elements: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Largest admissible ratio between consecutive levels for the decaying indicators.
    #[serde(default = "default_ratio")]
    pub max_ratio: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_base() -> usize {
    4
}
fn default_levels() -> usize {
    4
}
fn default_p() -> f64 {
    2.0
}
fn default_ratio() -> f64 {
    0.75
}

impl IndicatorConfig {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            base_elements: default_base(),
            levels: default_levels(),
            p: default_p(),
            max_ratio: default_ratio(),
            seed: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorRow {
    pub level: usize,
    pub h: f64,
    pub indicator: String,
    pub value: f64,
    pub kind: BoundKind,
    /// ratio to the previous level
    pub ratio: Option<f64>,
    pub pass: bool,
}

/// `C_D`, `Ŝ_D`, `W_D`, `T_D(h/2 e₁)` and the interpolation defect per level.
///
/// Witnesses are `sin(πx)` (times `sin(πy)` in 2D) and the non-affine field
/// `ψ = (cos(πx) e^y, 0)`; affine fields are integrated exactly by the
/// scheme and would give a zero defect.
pub fn indicator_table(cfg: &IndicatorConfig) -> Result<Vec<IndicatorRow>, HarnessError> {
    if cfg.levels == 0 || !(cfg.dim == 1 || cfg.dim == 2) {
        return Err(HarnessError::Config("indicators need dim ∈ {1, 2} and levels ≥ 1".into()));
    }
    if cfg.base_elements < 2 || !(cfg.p > 1.0) {
        return Err(HarnessError::Config("base_elements ≥ 2 and p > 1 are required".into()));
    }
    let dim = cfg.dim;
    let phi = move |x: crate::Vec2| {
        let s = (PI * x[0]).sin();
        if dim == 1 {
            s
        } else {
            s * (PI * x[1]).sin()
        }
    };
    let grad_phi = move |x: crate::Vec2| {
        if dim == 1 {
            [PI * (PI * x[0]).cos(), 0.0]
        } else {
            [
                PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
            ]
        }
    };
    let psi = |x: crate::Vec2| [(PI * x[0]).cos() * x[1].exp(), 0.0];
    let div_psi = |x: crate::Vec2| -PI * (PI * x[0]).sin() * x[1].exp();

    let mut mesh = if dim == 1 {
        BaseMesh::OneD(Mesh1D::uniform(0.0, 1.0, cfg.base_elements)?)
    } else {
        BaseMesh::TwoD(TriMesh2D::structured_square([0.0, 0.0], [1.0, 1.0], cfg.base_elements)?)
    };
    let mut rows: Vec<IndicatorRow> = Vec::new();
    for level in 0..cfg.levels {
        if level > 0 {
            mesh = mesh.refined();
        }
        let gd = mesh.build(cfg.p)?;
        let h = gd.h();
        let (c, _) = norm_coercivity(&gd, cfg.seed)?;
        let s = consistency_defect(&gd, phi, grad_phi)?;
        let w = limit_conformity_defect(&gd, psi, div_psi)?;
        let t = compactness_modulus(&gd, [h / 2.0, 0.0], cfg.seed)?;
        let i = interpolation_defect(&gd, phi)?;
        let entries = [
            ("C_D", c.value(), if c.exact { BoundKind::Exact } else { BoundKind::LowerBound }, false),
            ("S_D", s.value, s.kind, true),
            ("W_D", w.value, w.kind, true),
            ("T_D", t.value, t.kind, true),
            ("I_D", i, BoundKind::Exact, true),
        ];
        for (name, value, kind, decays) in entries {
            let prev = rows.iter().rev().find(|r| r.indicator == name).map(|r| r.value);
            let ratio = prev.map(|p| value / p);
            let pass = value.is_finite() && (!decays || ratio.is_none_or(|r| r <= cfg.max_ratio));
            rows.push(IndicatorRow {
                level,
                h,
                indicator: name.into(),
                value,
                kind,
                ratio,
                pass,
            });
        }
    }
    Ok(rows)
}
