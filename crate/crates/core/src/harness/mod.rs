//! Manufactured problems, error monitors and refinement studies.

mod indicators;
mod problems;

pub use indicators::{indicator_table, IndicatorConfig, IndicatorRow};
pub use problems::{
    d6, numeric_source, ExactFn, ExactGradFn, ManufacturedProblem, PROBLEM_NAMES, STENCIL_DT, STENCIL_H,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    apriori_norms, compensated_product_probe, energy_ledger, time_translate_norm, uniform_weak_distance,
    MomentTrajectory, TestFamily,
};
use crate::gd::{GdError, GradientDiscretisation, Trajectory};
use crate::instances::{refine, BaseMesh, Mesh1D, TimeRule, TriMesh2D};
use crate::nonlinearity::NonlinearPair;
use crate::quadrature::{gauss_interval, gauss_time};
use crate::scheme::{solve, SchemeError, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("level {level}: {source}")]
    Solve {
        level: usize,
        #[source]
        source: SchemeError,
    },
    #[error(transparent)]
    Gd(#[from] GdError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("output encoding: {0}")]
    Encode(String),
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

/// `max_n ‖Π_D ν(uⁿ) − ν(ū(tⁿ))‖_{L²}` over the time nodes.
pub fn error_uniform_nu(gd: &GradientDiscretisation, traj: &Trajectory, pair: &NonlinearPair, exact: &ExactFn) -> f64 {
    traj.grid
        .nodes()
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| gd.reconstruction_error(&u.map(|s| pair.nu(s)), |x| pair.nu(exact(x, t)), 2.0))
        .fold(0.0, f64::max)
}

/// `‖∇_D ζ(u) − ∇ζ(ū)‖_{L^p(Ω×(0,T))}` with Gauss quadrature in time.
pub fn error_gradient_zeta(
    gd: &GradientDiscretisation,
    traj: &Trajectory,
    pair: &NonlinearPair,
    grad_zeta: &ExactGradFn,
) -> f64 {
    let p = gd.p();
    let nodes = traj.grid.nodes();
    let total: f64 = (0..traj.grid.steps())
        .map(|n| {
            let z = traj.states[n + 1].map(|s| pair.zeta(s));
            gauss_time(nodes[n], nodes[n + 1])
                .map(|(t, wt)| wt * gd.gradient_error(&z, |x| grad_zeta(x, t), p).powf(p))
                .sum::<f64>()
        })
        .sum();
    total.powf(1.0 / p)
}

/// `∫_0^T ∫_Ω g(x, t)` over the unit interval or square by composite Gauss rules.
pub fn space_time_integral(dim: usize, final_time: f64, g: impl Fn(crate::Vec2, f64) -> f64) -> f64 {
    let (nx, nt) = if dim == 1 { (512, 256) } else { (96, 64) };
    let cells: Vec<(f64, f64)> = (0..nx)
        .flat_map(|k| gauss_interval(k as f64 / nx as f64, (k + 1) as f64 / nx as f64))
        .collect();
    let times: Vec<(f64, f64)> = (0..nt)
        .flat_map(|k| gauss_time(final_time * k as f64 / nt as f64, final_time * (k + 1) as f64 / nt as f64))
        .collect();
    times
        .iter()
        .map(|&(t, wt)| {
            wt * if dim == 1 {
                cells.iter().map(|&(x, w)| w * g([x, 0.0], t)).sum::<f64>()
            } else {
                cells
                    .iter()
                    .flat_map(|&(x, wx)| cells.iter().map(move |&(y, wy)| ([x, y], wx * wy)))
                    .map(|(p, w)| w * g(p, t))
                    .sum::<f64>()
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitor {
    ErrorUniformNu,
    ErrorGradientZeta,
    EnergyLedger,
    Apriori,
    TimeTranslate,
    UniformWeakDistance,
    CompensatedProbe,
}

impl Monitor {
    pub const ALL: [Monitor; 7] = [
        Monitor::ErrorUniformNu,
        Monitor::ErrorGradientZeta,
        Monitor::EnergyLedger,
        Monitor::Apriori,
        Monitor::TimeTranslate,
        Monitor::UniformWeakDistance,
        Monitor::CompensatedProbe,
    ];
}

/// Refinement-study description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub experiment: String,
    pub problem: String,
    #[serde(default = "defaults::levels")]
    pub levels: usize,
    /// Elements of the base mesh (per side in 2D).
    #[serde(default = "defaults::base_elements")]
    pub base_elements: usize,
    #[serde(default = "defaults::final_time")]
    pub final_time: f64,
    #[serde(default = "defaults::base_steps")]
    pub base_steps: usize,
    #[serde(default = "defaults::time_rule")]
    pub time_rule: TimeRule,
    #[serde(default = "defaults::monitors")]
    pub monitors: Vec<Monitor>,
    /// `τ = tau_fraction · T` for the time-translate monitor.
    #[serde(default = "defaults::tau_fraction")]
    pub tau_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// Regression targets. Observed orders are empirical, not proven rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Minimal observed order per error monitor name.
    #[serde(default)]
    pub min_order: BTreeMap<String, f64>,
    /// Largest admissible level-to-level growth of the a priori quantities.
    #[serde(default = "defaults::max_ratio")]
    pub max_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_order: BTreeMap::new(),
            max_ratio: defaults::max_ratio(),
        }
    }
}

mod defaults {
    use super::{Monitor, TimeRule};
    pub fn levels() -> usize {
        4
    }
    pub fn base_elements() -> usize {
        8
    }
    pub fn final_time() -> f64 {
        0.5
    }
    pub fn base_steps() -> usize {
        8
    }
    pub fn time_rule() -> TimeRule {
        TimeRule::Linear
    }
    pub fn monitors() -> Vec<Monitor> {
        Monitor::ALL.to_vec()
    }
    pub fn tau_fraction() -> f64 {
        0.25
    }
    pub fn max_ratio() -> f64 {
        2.0
    }
}

impl StudyConfig {
    pub fn new(experiment: &str, problem: &str) -> Self {
        Self {
            experiment: experiment.into(),
            problem: problem.into(),
            levels: defaults::levels(),
            base_elements: defaults::base_elements(),
            final_time: defaults::final_time(),
            base_steps: defaults::base_steps(),
            time_rule: defaults::time_rule(),
            monitors: defaults::monitors(),
            tau_fraction: defaults::tau_fraction(),
            seed: 0,
            thresholds: Thresholds::default(),
            solver: SolverConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn problem(&self) -> Result<ManufacturedProblem, HarnessError> {
        ManufacturedProblem::by_name(&self.problem).ok_or_else(|| {
            HarnessError::Config(format!(
                "unknown problem '{}' (known: {})",
                self.problem,
                PROBLEM_NAMES.join(", ")
            ))
        })
    }

    /// Checks everything except `levels`, which only studies constrain.
    pub fn validate_single(&self) -> Result<ManufacturedProblem, HarnessError> {
        let problem = self.problem()?;
        if self.base_elements < 2 || self.base_steps == 0 {
            return Err(HarnessError::Config("base_elements ≥ 2 and base_steps ≥ 1 are required".into()));
        }
        if !(self.final_time > 0.0) {
            return Err(HarnessError::Config("final_time must be positive".into()));
        }
        if !(self.tau_fraction > 0.0 && self.tau_fraction < 1.0) {
            return Err(HarnessError::Config("tau_fraction must lie in (0, 1)".into()));
        }
        self.solver.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<ManufacturedProblem, HarnessError> {
        if self.levels < 2 {
            return Err(HarnessError::Config(format!("levels = {} but a study needs levels ≥ 2", self.levels)));
        }
        self.validate_single()
    }

    pub fn base_mesh(&self, problem: &ManufacturedProblem) -> Result<BaseMesh, HarnessError> {
        Ok(if problem.dim == 1 {
            BaseMesh::OneD(Mesh1D::uniform(0.0, 1.0, self.base_elements)?)
        } else {
            BaseMesh::TwoD(TriMesh2D::structured_square([0.0, 0.0], [1.0, 1.0], self.base_elements)?)
        })
    }
}

/// One solved level.
#[derive(Debug, Clone)]
pub struct SolvedLevel {
    pub level: usize,
    pub h: f64,
    pub dt: f64,
    pub gd: GradientDiscretisation,
    pub traj: Trajectory,
}

/// Builds the refinement family and solves every level, one thread per level.
pub fn solve_levels(cfg: &StudyConfig, problem: &ManufacturedProblem, levels: usize) -> Result<Vec<SolvedLevel>, HarnessError> {
    let base = cfg.base_mesh(problem)?;
    let family = refine(&base, problem.op.p, cfg.final_time, cfg.base_steps, cfg.time_rule, levels)?;
    let spec = problem.spec(cfg.final_time);
    let results: Vec<Result<SolvedLevel, HarnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = family
            .levels
            .into_iter()
            .enumerate()
            .map(|(l, lev)| {
                let spec = &spec;
                scope.spawn(move || {
                    let traj = solve(&lev.gd, &lev.grid, spec, &cfg.solver)
                        .map_err(|source| HarnessError::Solve { level: l, source })?;
                    Ok(SolvedLevel {
                        level: l,
                        h: lev.gd.h(),
                        dt: lev.grid.dt_max(),
                        gd: lev.gd,
                        traj,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("level thread panicked")).collect()
    });
    results.into_iter().collect()
}

/// One CSV row: a monitor value at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub level: usize,
    pub h: f64,
    pub dt: f64,
    pub monitor: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub h: f64,
    pub dt: f64,
    pub dofs: usize,
    pub newton_iterations: usize,
    pub fixed_point_steps: usize,
    pub max_final_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub experiment: String,
    pub problem: String,
    /// What the error monitors compare against.
    pub reference: String,
    pub levels: Vec<LevelSummary>,
    pub rows: Vec<Row>,
    pub pass: bool,
}

impl StudyReport {
    /// Values of one monitor, in level order.
    pub fn series(&self, monitor: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.monitor == monitor).map(|r| r.value).collect()
    }

    pub fn rows_of(&self, monitor: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.monitor == monitor).collect()
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| HarnessError::Encode(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Encode(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Encode(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        serde_json::to_string_pretty(self).map_err(|e| HarnessError::Encode(e.to_string()))
    }

    /// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| HarnessError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&csv_path, self.to_csv()?).map_err(io(&csv_path))?;
        std::fs::write(&json_path, self.to_json()?).map_err(io(&json_path))?;
        Ok((csv_path, json_path))
    }
}

struct RowSink<'a> {
    experiment: &'a str,
    rows: Vec<Row>,
}

impl RowSink<'_> {
    fn push(&mut self, lv: &SolvedLevel, monitor: &str, value: f64, threshold: Option<f64>, pass: bool) {
        self.rows.push(Row {
            experiment: self.experiment.to_string(),
            level: lv.level,
            h: lv.h,
            dt: lv.dt,
            monitor: monitor.to_string(),
            value,
            threshold,
            pass: pass && value.is_finite(),
        });
    }

    /// Values that must strictly decrease, plus observed orders
    /// `log₂(e_{k−1}/e_k)` from consecutive levels.
    fn decreasing_with_order(&mut self, levels: &[SolvedLevel], name: &str, values: &[f64], min_order: Option<f64>) {
        for (k, lv) in levels.iter().enumerate() {
            let pass = k == 0 || values[k] < values[k - 1] || values[k - 1] == 0.0 && values[k] == 0.0;
            self.push(lv, name, values[k], None, pass);
        }
        for k in 1..levels.len() {
            let ratio = (levels[k - 1].h / levels[k].h).log2();
            let order = if values[k] == 0.0 && values[k - 1] == 0.0 {
                f64::INFINITY
            } else {
                (values[k - 1] / values[k]).log2() / ratio
            };
            let pass = min_order.is_none_or(|m| order >= m) || order == f64::INFINITY;
            let shown = if order.is_finite() { order } else { 0.0 };
            self.push(&levels[k], &format!("order_{name}"), shown, min_order, pass);
        }
    }

    /// Finite values growing by at most `max_ratio` between levels.
    fn bounded(&mut self, levels: &[SolvedLevel], name: &str, values: &[f64], max_ratio: f64) {
        for (k, lv) in levels.iter().enumerate() {
            if k == 0 {
                self.push(lv, name, values[k], None, true);
            } else {
                let limit = max_ratio * values[k - 1];
                let pass = values[k] <= limit || values[k] == 0.0;
                self.push(lv, name, values[k], Some(limit), pass);
            }
        }
    }
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport, HarnessError> {
    let problem = cfg.validate()?;
    let levels = solve_levels(cfg, &problem, cfg.levels)?;
    let spec = problem.spec(cfg.final_time);
    let pair = &problem.pair;
    let mut sink = RowSink {
        experiment: &cfg.experiment,
        rows: Vec::new(),
    };
    let mut monitors = cfg.monitors.clone();
    monitors.sort();
    monitors.dedup();
    for monitor in monitors {
        match monitor {
            Monitor::ErrorUniformNu => {
                let v: Vec<f64> = levels
                    .iter()
                    .map(|l| error_uniform_nu(&l.gd, &l.traj, pair, &problem.exact))
                    .collect();
                let min = cfg.thresholds.min_order.get("error_uniform_nu").copied();
                sink.decreasing_with_order(&levels, "error_uniform_nu", &v, min);
            }
            Monitor::ErrorGradientZeta => {
                let v: Vec<f64> = levels
                    .iter()
                    .map(|l| error_gradient_zeta(&l.gd, &l.traj, pair, &problem.grad_zeta))
                    .collect();
                let min = cfg.thresholds.min_order.get("error_gradient_zeta").copied();
                sink.decreasing_with_order(&levels, "error_gradient_zeta", &v, min);
            }
            Monitor::EnergyLedger => {
                for lv in &levels {
                    let ledger = energy_ledger(&lv.gd, &spec, cfg.solver.theta, &lv.traj);
                    // the initial row has margin 0 by construction
                    let tail = if ledger.len() > 1 { &ledger[1..] } else { &ledger[..] };
                    let worst = tail
                        .iter()
                        .min_by(|a, b| (a.margin + a.slack).total_cmp(&(b.margin + b.slack)))
                        .expect("ledger has the initial row");
                    let pass = ledger.iter().all(|r| r.holds());
                    sink.push(lv, "energy_ledger_margin", worst.margin, Some(-worst.slack), pass);
                }
            }
            Monitor::Apriori => {
                let norms = levels
                    .iter()
                    .map(|l| apriori_norms(&l.gd, &l.traj, pair))
                    .collect::<Result<Vec<_>, _>>()?;
                let r = cfg.thresholds.max_ratio;
                let col = |f: fn(&crate::analysis::AprioriNorms) -> f64| norms.iter().map(f).collect::<Vec<f64>>();
                sink.bounded(&levels, "apriori_max_entropy", &col(|n| n.max_entropy), r);
                sink.bounded(&levels, "apriori_grad_zeta_lp", &col(|n| n.grad_zeta_lp), r);
                sink.bounded(&levels, "apriori_max_beta_l2", &col(|n| n.max_beta_l2), r);
                sink.bounded(&levels, "dt_dual_estimate", &col(|n| n.dt_dual), r);
            }
            Monitor::TimeTranslate => {
                let tau = cfg.tau_fraction * cfg.final_time;
                let v: Vec<f64> = levels
                    .iter()
                    .map(|l| time_translate_norm(&l.gd, &l.traj, pair, tau))
                    .collect();
                sink.bounded(&levels, "time_translate_norm", &v, cfg.thresholds.max_ratio);
            }
            Monitor::UniformWeakDistance => {
                // reference: finest level, on Π_D β(u)
                let moments: Vec<MomentTrajectory> = levels
                    .iter()
                    .map(|l| {
                        let fam = TestFamily::for_gd(&l.gd);
                        MomentTrajectory::from_trajectory(&fam, &l.gd, &l.traj, |s| pair.beta(s))
                    })
                    .collect();
                let finest = moments.last().expect("at least two levels");
                let mut prev = f64::INFINITY;
                for (lv, m) in levels.iter().zip(&moments).take(levels.len() - 1) {
                    let d = uniform_weak_distance(m, finest);
                    sink.push(lv, "uniform_weak_distance", d, None, d <= prev);
                    prev = d;
                }
            }
            Monitor::CompensatedProbe => {
                let exact = &problem.exact;
                let reference = space_time_integral(problem.dim, cfg.final_time, |x, t| {
                    let u = exact(x, t);
                    pair.beta(u) * pair.zeta(u)
                });
                let pairs: Vec<_> = levels.iter().map(|l| (&l.gd, &l.traj)).collect();
                let probe = compensated_product_probe(&pairs, pair, &|_, _| 1.0, Some(reference));
                let mut prev = f64::INFINITY;
                for (lv, &gap) in levels.iter().zip(&probe.gaps) {
                    sink.push(lv, "compensated_probe_gap", gap, None, gap < prev || gap == 0.0);
                    prev = gap;
                }
            }
        }
    }
    let summaries = levels
        .iter()
        .map(|l| LevelSummary {
            level: l.level,
            h: l.h,
            dt: l.dt,
            dofs: l.gd.dof_count(),
            newton_iterations: l.traj.telemetry.iter().map(|t| t.newton_iterations).sum(),
            fixed_point_steps: l.traj.telemetry.iter().filter(|t| t.used_fixed_point).count(),
            max_final_residual: l.traj.telemetry.iter().map(|t| t.final_residual).fold(0.0, f64::max),
        })
        .collect();
    let rows = sink.rows;
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION,
        experiment: cfg.experiment.clone(),
        problem: cfg.problem.clone(),
        reference: "exact manufactured solution (uniform_weak_distance: finest level)".into(),
        levels: summaries,
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

/// `step,time,dof,x,y,u` rows of a single solve.
pub fn trajectory_csv(gd: &GradientDiscretisation, traj: &Trajectory) -> Result<String, HarnessError> {
    #[derive(Serialize)]
    struct Rec {
        step: usize,
        time: f64,
        dof: usize,
        x: f64,
        y: f64,
        u: f64,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for (n, (t, u)) in traj.grid.nodes().iter().zip(&traj.states).enumerate() {
        for (i, (x, v)) in gd.dof_points().iter().zip(u.iter()).enumerate() {
            w.serialize(Rec {
                step: n,
                time: *t,
                dof: i,
                x: x[0],
                y: x[1],
                u: *v,
            })
            .map_err(|e| HarnessError::Encode(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Encode(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gd::DofField;
    use crate::instances::build_mass_lumped_p1_1d;

    #[test]
    fn study_needs_two_levels() {
        let mut cfg = StudyConfig::new("t", "heat_1d");
        cfg.levels = 1;
        assert!(run_study(&cfg).unwrap_err().is_config());
        cfg.levels = 2;
        cfg.problem = "nope".into();
        assert!(run_study(&cfg).unwrap_err().is_config());
    }

    #[test]
    fn toml_round_trip_with_defaults() {
        let cfg = StudyConfig::from_toml(
            "experiment = \"a\"\nproblem = \"stefan\"\nmonitors = [\"energy_ledger\"]\n[thresholds.min_order]\nerror_uniform_nu = 0.9\n",
        )
        .unwrap();
        assert_eq!(cfg.levels, 4);
        assert_eq!(cfg.monitors, vec![Monitor::EnergyLedger]);
        assert_eq!(cfg.thresholds.min_order["error_uniform_nu"], 0.9);
        assert!(StudyConfig::from_toml("experiment = \"a\"\nproblem = \"x\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn zero_problem_study_is_all_zero() {
        let mut cfg = StudyConfig::new("zero", "zero");
        cfg.levels = 2;
        cfg.base_elements = 4;
        cfg.base_steps = 2;
        let rep = run_study(&cfg).unwrap();
        assert!(rep.pass);
        for r in &rep.rows {
            if !r.monitor.starts_with("order_") {
                assert_eq!(r.value, 0.0, "{}", r.monitor);
            }
        }
    }

    #[test]
    fn nodal_exact_values_give_zero_uniform_error() {
        // ū constant in time and equal to the dof value on each piece
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap();
        let grid = crate::gd::TimeGrid::uniform(1.0, 2).unwrap();
        let traj = Trajectory {
            grid,
            states: vec![DofField::from_vec(vec![0.0]); 3],
            telemetry: vec![],
        };
        let exact: ExactFn = std::sync::Arc::new(|_, _| 0.0);
        assert_eq!(error_uniform_nu(&gd, &traj, &NonlinearPair::identity(), &exact), 0.0);
    }

    #[test]
    fn heat_one_dof_error_by_quadrature_oracle() {
        let gd = build_mass_lumped_p1_1d(&Mesh1D::uniform(0.0, 1.0, 2).unwrap(), 2.0).unwrap();
        let mut spec = crate::scheme::ProblemSpec::zero(NonlinearPair::identity(), crate::flux::LerayLionsOperator::laplace(), 0.5);
        spec.initial = std::sync::Arc::new(|_| 1.0);
        let grid = crate::gd::TimeGrid::uniform(0.5, 2).unwrap();
        let traj = solve(&gd, &grid, &spec, &SolverConfig::default()).unwrap();
        let hat = |x: f64| 1.0 - (2.0 * x - 1.0).abs();
        let exact: ExactFn = std::sync::Arc::new(move |x, t| (-t).exp() * hat(x[0]));
        // midpoint oracle on the piecewise-constant reconstruction
        let oracle = |t: f64, u: f64| {
            let n = 200_000;
            (0..n)
                .map(|k| {
                    let x = (k as f64 + 0.5) / n as f64;
                    let v = if (0.25..0.75).contains(&x) { u } else { 0.0 };
                    (v - (-t).exp() * hat(x)).powi(2) / n as f64
                })
                .sum::<f64>()
                .sqrt()
        };
        let expect = [(0.0, 1.0), (0.25, 1.0 / 3.0), (0.5, 1.0 / 9.0)]
            .iter()
            .map(|&(t, u)| oracle(t, u))
            .fold(0.0, f64::max);
        let got = error_uniform_nu(&gd, &traj, &NonlinearPair::identity(), &exact);
        assert!((got - expect).abs() < 1e-6, "{got} {expect}");
    }
}
