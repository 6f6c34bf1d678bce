//! Parameter sweeps over the SU arrival or service rate.
//!
//! Grid points are evaluated concurrently; files are written in grid order
//! with fixed formatting, so identical inputs give byte-identical output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::format::g12;
use crate::metrics::{MetricsReport, METRIC_COLUMNS};
use crate::model::{analyze, Model};
use crate::params::SystemParams;
use crate::sim::{simulate, SimConfig, SimEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    LambdaS,
    MuS,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::LambdaS => "lambda_s",
            Axis::MuS => "mu_s",
        }
    }

    fn apply(self, p: SystemParams, value: f64) -> SystemParams {
        match self {
            Axis::LambdaS => p.with_su_arrival(value),
            Axis::MuS => p.with_su_service(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub models: Vec<Model>,
    /// Simulate every point with this config in addition to solving.
    pub simulation: Option<SimConfig>,
    pub tol: f64,
}

impl SweepSpec {
    /// Arrival-rate sweep 0.1..0.5 over five points, both models.
    pub fn arrival_reference(models: Vec<Model>) -> Self {
        Self {
            axis: Axis::LambdaS,
            start: 0.1,
            stop: 0.5,
            steps: 5,
            models,
            simulation: None,
            tol: crate::solver::DEFAULT_DIRECT_TOL,
        }
    }

    /// Service-rate sweep 0.25..0.5 over six points.
    pub fn service_reference(models: Vec<Model>) -> Self {
        Self {
            axis: Axis::MuS,
            start: 0.25,
            stop: 0.5,
            steps: 6,
            ..Self::arrival_reference(models)
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::Sweep(m.into()));
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return bad("start < stop violated");
        }
        if self.steps < 2 {
            return bad("steps >= 2 violated");
        }
        if self.models.is_empty() {
            return bad("at least one model must be selected");
        }
        if let Some(cfg) = &self.simulation {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Evenly spaced values; the last equals `stop` exactly.
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last
                }
            })
            .collect()
    }
}

/// Result at one (grid value, model) pair.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub params: SystemParams,
    pub model: Model,
    pub report: MetricsReport,
    pub simulation: Option<SimEstimate>,
}

/// Evaluates every grid point for every model, rows ordered by grid value,
/// then by model as listed in the spec. `workers = 0` uses all cores.
pub fn evaluate(
    base: &SystemParams,
    spec: &SweepSpec,
    workers: usize,
) -> Result<Vec<SweepRow>, Error> {
    let base = base.validate()?;
    spec.validate()?;
    let jobs: Vec<(f64, Model)> = spec
        .grid()
        .into_iter()
        .flat_map(|v| spec.models.iter().map(move |m| (v, *m)))
        .collect();
    let run = |&(value, model): &(f64, Model)| -> Result<SweepRow, Error> {
        let p = spec.axis.apply(base, value);
        let wrap = |source: Error| Error::AtPoint {
            point: format!(
                "{}={} ({} model)",
                spec.axis.name(),
                g12(value),
                model.kind()
            ),
            source: Box::new(source),
        };
        let analysis = analyze(&p, &model, spec.tol).map_err(wrap)?;
        let simulation = spec
            .simulation
            .map(|cfg| simulate(&p, &model, &cfg))
            .transpose()
            .map_err(wrap)?;
        Ok(SweepRow {
            params: p,
            model,
            report: analysis.report,
            simulation,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Sweep(e.to_string()))?;
    pool.install(|| jobs.par_iter().map(run).collect())
}

/// Column groups of the per-category files.
pub const FILES: [(&str, &[usize]); 4] = [
    ("capacity.csv", &[0, 1, 2]),
    ("utilization.csv", &[3]),
    ("blocking.csv", &[4, 5, 6]),
    ("handoff.csv", &[7, 8, 9]),
];

fn opt(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        out.push_str(&g12(v));
    }
}

/// One CSV with the given metric columns. Simulated sweeps add `sim_*`
/// means and `ci_*` half-widths after the analytical columns.
pub fn category_csv(rows: &[SweepRow], columns: &[usize]) -> String {
    let simulated = rows.iter().any(|r| r.simulation.is_some());
    let mut out = String::from("model,lambda_s,mu_s");
    let prefixes: &[&str] = if simulated {
        &["", "sim_", "ci_"]
    } else {
        &[""]
    };
    for prefix in prefixes {
        for &c in columns {
            write!(out, ",{prefix}{}", METRIC_COLUMNS[c]).unwrap();
        }
    }
    out.push('\n');
    for r in rows {
        write!(
            out,
            "{},{},{}",
            r.model.kind(),
            g12(r.params.su_arrival),
            g12(r.params.su_service)
        )
        .unwrap();
        let values = r.report.values();
        for &c in columns {
            opt(&mut out, values[c]);
        }
        if simulated {
            let est = |c: usize| {
                r.simulation
                    .as_ref()
                    .and_then(|s| s.metric(METRIC_COLUMNS[c]))
            };
            for &c in columns {
                opt(&mut out, est(c).map(|e| e.mean));
            }
            for &c in columns {
                opt(&mut out, est(c).and_then(|e| e.ci_half_width));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub params: SystemParams,
    pub spec: SweepSpec,
    pub grid: Vec<f64>,
    pub files: Vec<String>,
}

/// Runs the sweep and writes the category CSVs, `metrics.csv` (all
/// columns) and `manifest.json` into `out_dir`. Returns the written paths.
pub fn run_sweep(
    base: &SystemParams,
    spec: &SweepSpec,
    out_dir: &Path,
    workers: usize,
) -> Result<Vec<PathBuf>, Error> {
    let rows = evaluate(base, spec, workers)?;
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let all: Vec<usize> = (0..METRIC_COLUMNS.len()).collect();
    let files = FILES
        .iter()
        .copied()
        .chain([("metrics.csv", all.as_slice())]);
    let mut names = Vec::new();
    for (name, cols) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, category_csv(&rows, cols))?;
        names.push(name.to_string());
        written.push(path);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        params: *base,
        spec: spec.clone(),
        grid: spec.grid(),
        files: names,
    };
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}
