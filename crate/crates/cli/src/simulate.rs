use std::path::Path;

use bbm_core::diagnostics::{decay_report, Band, energy_balance_residual, tail_dissipation, DecayConfig, DecayReport, TailDissipation};
use bbm_core::field::{h1_norm_interval, write_snapshot};
use bbm_core::timestep::{integrate, IntegrationConfig, Integrator, Run};
use bbm_core::{Field1D, Grid, Variant};
use serde::Serialize;

use crate::config::{DampingConfig, DomainConfig, IntegratorKind, SimConfig};
use crate::output::{write_atomic, write_json};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub status: &'static str,
    pub variant: Variant,
    pub error: Option<String>,
    pub failure_time: Option<f64>,
    pub final_time: Option<f64>,
    pub initial_energy: Option<f64>,
    pub final_energy: Option<f64>,
    pub balance_residual: Option<f64>,
    pub total_dissipation: Option<f64>,
    /// `‖u(T) − target‖₁` with target 0, or the initial mean for variant B.
    pub final_h1_distance: Option<f64>,
    pub tail: Option<TailDissipation>,
    pub decay: Option<DecayReport>,
    /// Why the tail or decay sections are missing, when they are.
    pub notes: Vec<String>,
}

impl RunReport {
    fn failed(variant: Variant, error: String, failure_time: Option<f64>) -> Self {
        Self {
            status: "failed",
            variant,
            error: Some(error),
            failure_time,
            final_time: None,
            initial_energy: None,
            final_energy: None,
            balance_residual: None,
            total_dissipation: None,
            final_h1_distance: None,
            tail: None,
            decay: None,
            notes: Vec::new(),
        }
    }
}

fn h1_distance(u: &Field1D, target: f64) -> Result<f64, CliError> {
    let d = u.map(|v| v - target).map_err(CliError::from_core)?;
    match d.grid() {
        Grid::Torus(_) => d.sobolev_norm(1.0),
        Grid::Interval(_) => h1_norm_interval(&d),
    }
    .map_err(CliError::from_core)
}

fn summarize(cfg: &SimConfig, run: &Run) -> Result<RunReport, CliError> {
    let ledger = &run.ledger;
    let residual = energy_balance_residual(ledger);
    let last = ledger.last().expect("ledger has the initial record");
    let target = if cfg.variant == Variant::GradientDamping {
        ledger.records[0].mean
    } else {
        0.0
    };
    let mut notes = Vec::new();
    let tail = match tail_dissipation(ledger, cfg.tail_window()) {
        Ok(t) => Some(t),
        Err(e) => {
            notes.push(format!("tail: {e}"));
            None
        }
    };
    let decay_cfg = DecayConfig {
        variant: cfg.variant,
        window: cfg.decay_window(),
        slack: cfg.tolerances.monotone_slack.unwrap_or(1e-9 + 10.0 * residual),
        band: run_band(cfg),
    };
    let decay = match decay_report(&run.trajectory, &decay_cfg) {
        Ok(d) => Some(d),
        Err(e) => {
            notes.push(format!("decay: {e}"));
            None
        }
    };
    Ok(RunReport {
        status: "ok",
        variant: cfg.variant,
        error: None,
        failure_time: None,
        final_time: Some(last.t),
        initial_energy: Some(ledger.initial_energy()),
        final_energy: Some(last.energy),
        balance_residual: Some(residual),
        total_dissipation: Some(last.cumulative_dissipation),
        final_h1_distance: Some(h1_distance(&run.final_state.u, target)?),
        tail,
        decay,
        notes,
    })
}

/// The damping support for A/B bumps; variant C observes boundary traces,
/// for which the band is only a placeholder.
fn run_band(cfg: &SimConfig) -> Option<Band> {
    match (&cfg.damping, &cfg.domain) {
        (_, DomainConfig::Interval { length, .. }) => Band::new(0.0, *length).ok(),
        (Some(DampingConfig::Bump { center, radius, .. }), _) => {
            let left = (center - radius).rem_euclid(2.0 * std::f64::consts::PI);
            Band::new(left, left + 2.0 * radius).ok()
        }
        _ => None,
    }
}

/// Runs one configuration and writes `ledger.csv`, `snapshots/` and
/// `report.json` under the output directory.
pub fn run_simulate(cfg: &SimConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    let prepared = cfg.prepare()?;
    let integration = IntegrationConfig {
        integrator: match cfg.integrator {
            IntegratorKind::Onestep => Integrator::OneStep,
            IntegratorKind::Picard => Integrator::Picard(prepared.picard),
        },
        dt: cfg.dt,
        record_stride: cfg.record_stride,
        snapshot_stride: cfg.snapshot_stride,
    };
    let report_path = out_dir.join("report.json");
    let run = match integrate(&prepared.u0, cfg.horizon, &prepared.model, &integration) {
        Ok(run) => run,
        Err(e) => {
            let report = RunReport::failed(cfg.variant, e.to_string(), e.failure_time());
            write_json(&report_path, &report)?;
            return Err(CliError::Integration {
                message: e.to_string(),
                failure_time: e.failure_time(),
            });
        }
    };

    write_atomic(&out_dir.join("ledger.csv"), |w| run.ledger.write_csv(w).map_err(CliError::from_core))?;
    let snap_dir = out_dir.join("snapshots");
    for (i, snap) in run.trajectory.snapshots.iter().enumerate() {
        let path = snap_dir.join(format!("snapshot_{i:05}.csv"));
        write_atomic(&path, |w| write_snapshot(w, snap.t, &snap.field).map_err(CliError::from_core))?;
    }
    let report = summarize(cfg, &run)?;
    write_json(&report_path, &report)?;
    Ok(report)
}
