//! Experiment driver: reads an [`ExperimentConfig`], runs one verification
//! suite and writes `<out_dir>/<experiment>.csv` plus `<out_dir>/report.json`.

pub mod config;
pub mod experiments;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use orlicz_gamma::{energy, functions, orlicz, peridynamic, quadrature, young, Verdict};
use serde_json::{json, Value};

pub use config::{ConfigError, Experiment, ExperimentConfig};
pub use experiments::Outcome;

/// Process exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// Every asserted verdict passed.
    Pass,
    /// At least one asserted verdict failed.
    AssertionFail,
    /// The configuration was rejected; nothing was written.
    ConfigError,
    /// No failures, but some result is numerically inconclusive.
    Inconclusive,
}

impl RunStatus {
    pub fn code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::AssertionFail => 1,
            RunStatus::ConfigError => 2,
            RunStatus::Inconclusive => 3,
        }
    }

    /// FAIL dominates AMBIGUOUS; INFORMATIVE verdicts are never asserted.
    pub fn from_verdicts<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Self {
        let mut status = RunStatus::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return RunStatus::AssertionFail,
                Verdict::Ambiguous => status = RunStatus::Inconclusive,
                Verdict::Pass | Verdict::Informative => {}
            }
        }
        status
    }
}

/// Every tunable constant that shapes a verdict, keyed by name.
pub fn constants() -> Value {
    json!({
        "quadrature": {
            "max_evaluations": quadrature::MAX_EVALUATIONS,
            "circle_nodes": quadrature::CIRCLE_NODES,
            "radial_decades": quadrature::RADIAL_DECADES,
            "growth_factor": quadrature::GROWTH_FACTOR,
        },
        "young": {
            "flat_zero_glue": young::FLAT_ZERO_GLUE,
            "ratio_cap": young::RATIO_CAP,
            "conjugate_rel_tol": young::CONJUGATE_REL_TOL,
            "matuszewska_zero": young::MATUSZEWSKA_ZERO,
            "matuszewska_infinite": young::MATUSZEWSKA_INFINITE,
            "grid_points_per_decade": young::GRID_POINTS_PER_DECADE,
        },
        "functions": {
            "c2_grid_spacing": functions::C2_GRID_SPACING,
            "convolution_angles": functions::CONVOLUTION_ANGLES,
        },
        "orlicz": {
            "modular_rel_tol": orlicz::MODULAR_REL_TOL,
            "luxemburg_window": orlicz::LUXEMBURG_WINDOW,
            "holder_factor": orlicz::HOLDER_FACTOR,
        },
        "energy": {
            "max_s": energy::MAX_S,
            "taylor_radius": energy::TAYLOR_RADIUS,
            "energy_circle_nodes": energy::ENERGY_CIRCLE_NODES,
            "energy_growth_factor": energy::ENERGY_GROWTH_FACTOR,
            "certificate_cutoffs": energy::CERTIFICATE_CUTOFFS,
            "convergence_threshold": energy::CONVERGENCE_THRESHOLD,
            "liminf_slack": energy::LIMINF_SLACK,
            "max_liminf_terms": energy::MAX_LIMINF_TERMS,
            "rel_error_floor": energy::REL_ERROR_FLOOR,
            "exact_level": energy::EXACT_LEVEL,
        },
        "peridynamic": {
            "trend_window": peridynamic::TREND_WINDOW,
            "decade_slope": peridynamic::DECADE_SLOPE,
            "plateau_spread": peridynamic::PLATEAU_SPREAD,
            "max_local_horizon": peridynamic::MAX_LOCAL_HORIZON,
        },
        "runner": {
            "liminf_terms": experiments::LIMINF_TERMS,
            "localization_targets": experiments::LOCALIZATION_TARGETS,
            "localization_rel_tol": experiments::LOCALIZATION_REL_TOL,
            "energy_sample_points": experiments::ENERGY_SAMPLE_POINTS,
            "check_slack": experiments::CHECK_SLACK,
        },
    })
}

/// Assembles the JSON report. `seconds` is the wall-clock time of the run.
pub fn emit_report(config: &ExperimentConfig, outcome: &Outcome, seconds: f64) -> Value {
    json!({
        "meta": {
            "config": config,
            "config_text": config.to_text(),
            "versions": {
                "orlicz-gamma": env!("CARGO_PKG_VERSION"),
                "orlicz-gamma-core": orlicz_gamma::VERSION,
            },
            "constants": constants(),
            "wall_clock_seconds": seconds,
        },
        "tables": outcome.tables,
        "verdicts": outcome.verdicts,
    })
}

/// Result of [`run`]: the status plus what went into the report.
#[derive(Debug)]
pub struct RunSummary {
    pub status: RunStatus,
    pub verdicts: BTreeMap<String, Verdict>,
}

/// Runs the configured experiment and writes both output files.
///
/// A numerical error inside the experiment does not abort the run: it is
/// recorded in the report as an AMBIGUOUS `numerical` verdict.
pub fn run(config: &ExperimentConfig) -> io::Result<RunSummary> {
    let start = Instant::now();
    let outcome = match experiments::run_experiment(config) {
        Ok(o) => o,
        Err(e) => {
            let mut o = Outcome::default();
            o.tables.push(json!({"name": "error", "message": e.to_string()}));
            o.verdicts.insert("numerical".into(), Verdict::Ambiguous);
            o
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    write_outputs(&config.out_dir, config.experiment, &outcome, &emit_report(config, &outcome, seconds))?;
    Ok(RunSummary { status: RunStatus::from_verdicts(outcome.verdicts.values()), verdicts: outcome.verdicts })
}

fn write_outputs(dir: &Path, experiment: Experiment, outcome: &Outcome, report: &Value) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{experiment}.csv")), &outcome.csv)?;
    let mut text = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join("report.json"), text)
}
