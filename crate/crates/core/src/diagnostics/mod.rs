//! Energy ledgers, tail dissipation, band observables and decay reports.

mod ledger;
mod tail;

pub use ledger::{domain_mean, energy_balance_residual, dissipation_rate, EnergyLedger, EnergyRecord, LEDGER_HEADER};
pub use tail::{tail_dissipation, TailDissipation};

use serde::{Deserialize, Serialize};

use crate::error::{BbmError, Result};
use crate::field::{h1_norm_interval, l2_norm, sobolev_norm, Field1D, Grid, SobolevIndex};
use crate::operators::Variant;
use crate::timestep::Trajectory;

/// A sub-interval `(left, right)` of the domain. On the torus the band may
/// wrap, i.e. `right` may exceed `2π`, but its length is at most `2π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub left: f64,
    pub right: f64,
}

impl Band {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(BbmError::InvalidParameter(format!(
                "band needs left < right, got ({left}, {right})"
            )));
        }
        Ok(Self { left, right })
    }
}

/// `∫_l^r` of the piecewise-linear interpolant of `values` on nodes `k·h`.
fn band_integral(values: &[f64], h: f64, periodic: bool, band: Band) -> f64 {
    let n = values.len() as i64;
    let at = |k: i64| {
        if periodic {
            values[k.rem_euclid(n) as usize]
        } else {
            values[k.clamp(0, n - 1) as usize]
        }
    };
    let interp = |x: f64| {
        let k = (x / h).floor() as i64;
        let w = x / h - k as f64;
        (1.0 - w) * at(k) + w * at(k + 1)
    };
    let mut x_prev = band.left;
    let mut f_prev = interp(band.left);
    let mut total = 0.0;
    let mut k = (band.left / h).floor() as i64 + 1;
    loop {
        let x = k as f64 * h;
        if x >= band.right {
            break;
        }
        let f = at(k);
        total += 0.5 * (x - x_prev) * (f + f_prev);
        x_prev = x;
        f_prev = f;
        k += 1;
    }
    total + 0.5 * (band.right - x_prev) * (f_prev + interp(band.right))
}

/// Localized observable over `band`: `∫_ω u²` (A), `∫_ω u_x²` (B), or the
/// boundary traces `u(0)² + u(L)²` (C, where the band is ignored).
pub fn band_observable(u: &Field1D, band: Band, variant: Variant) -> Result<f64> {
    let grid = u.grid();
    if variant == Variant::BoundaryFeedback {
        let v = u.values();
        return Ok(v[0] * v[0] + v[v.len() - 1] * v[v.len() - 1]);
    }
    let periodic = matches!(grid, Grid::Torus(_));
    let len = grid.length();
    let inside = if periodic {
        band.right - band.left <= len * (1.0 + 1e-12)
    } else {
        band.left >= -1e-12 * len && band.right <= len * (1.0 + 1e-12)
    };
    if !inside {
        return Err(BbmError::InvalidParameter(format!(
            "band ({}, {}) does not fit in the {} domain of length {len}",
            band.left,
            band.right,
            grid.kind()
        )));
    }
    let density: Vec<f64> = match variant {
        Variant::LocalDamping => u.values().iter().map(|v| v * v).collect(),
        _ => u.derivative()?.values().iter().map(|v| v * v).collect(),
    };
    Ok(band_integral(&density, grid.spacing(), periodic, band))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayConfig {
    pub variant: Variant,
    /// Minimum spacing between report samples.
    pub window: f64,
    /// Allowed increase of the H¹ distance between consecutive samples.
    pub slack: f64,
    pub band: Option<Band>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub variant: Variant,
    pub window: f64,
    pub sample_times: Vec<f64>,
    pub norm_indices: Vec<f64>,
    /// `norms[i][j] = ‖u(t_i) − target‖_{s_j}`.
    pub norms: Vec<Vec<f64>>,
    pub target: f64,
    pub h1_distance: Vec<f64>,
    pub band: Option<Band>,
    pub band_observable: Vec<f64>,
    pub monotone: bool,
    pub max_h1_increase: f64,
    /// Final-sample values of each norm, used as the limit estimate.
    pub limit_estimate: Vec<f64>,
    /// `−d ln‖u − target‖₁ / dt` from a least-squares fit; observational only.
    pub empirical_rate: Option<f64>,
}

fn distance_norms(u: &Field1D, target: f64, indices: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = u.map(|v| v - target)?;
    match d.grid() {
        Grid::Torus(_) => {
            let norms = indices
                .iter()
                .map(|&s| sobolev_norm(&d, SobolevIndex::torus(s)?))
                .collect::<Result<Vec<_>>>()?;
            Ok((norms, sobolev_norm(&d, SobolevIndex::torus(1.0)?)?))
        }
        Grid::Interval(_) => {
            let h1 = h1_norm_interval(&d)?;
            Ok((vec![l2_norm(&d), h1], h1))
        }
    }
}

fn fit_rate(times: &[f64], dist: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(dist)
        .filter(|(_, d)| **d > f64::MIN_POSITIVE)
        .map(|(t, d)| (*t, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

/// Distances to the expected limit (0, or the initial mean for variant B)
/// at samples spaced at least one window apart.
pub fn decay_report(trajectory: &Trajectory, config: &DecayConfig) -> Result<DecayReport> {
    let first = trajectory
        .initial()
        .ok_or_else(|| BbmError::InvalidParameter("empty trajectory".into()))?;
    let last = trajectory.last().expect("nonempty");
    if !(config.window > 0.0) {
        return Err(BbmError::InvalidParameter("decay window must be positive".into()));
    }
    if last.t - first.t < 10.0 * config.window * (1.0 - 1e-9) {
        return Err(BbmError::InvalidParameter(format!(
            "trajectory spans {} which is less than 10 windows of {}",
            last.t - first.t,
            config.window
        )));
    }
    let torus = matches!(first.field.grid(), Grid::Torus(_));
    let norm_indices = if torus { vec![0.0, 0.5, 0.9] } else { vec![0.0, 1.0] };
    let target = if config.variant == Variant::GradientDamping {
        domain_mean(&first.field)
    } else {
        0.0
    };

    let mut sample_times = Vec::new();
    let mut norms = Vec::new();
    let mut h1_distance = Vec::new();
    let mut band_obs = Vec::new();
    for snap in &trajectory.snapshots {
        if let Some(&prev) = sample_times.last() {
            if snap.t - prev < config.window * (1.0 - 1e-9) {
                continue;
            }
        }
        let (ns, h1) = distance_norms(&snap.field, target, &norm_indices)?;
        sample_times.push(snap.t);
        norms.push(ns);
        h1_distance.push(h1);
        if let Some(band) = config.band {
            band_obs.push(band_observable(&snap.field, band, config.variant)?);
        }
    }
    let max_h1_increase = h1_distance
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayReport {
        variant: config.variant,
        window: config.window,
        monotone: !(max_h1_increase > config.slack),
        max_h1_increase: if max_h1_increase.is_finite() { max_h1_increase } else { 0.0 },
        limit_estimate: norms.last().cloned().unwrap_or_default(),
        empirical_rate: fit_rate(&sample_times, &h1_distance),
        sample_times,
        norm_indices,
        norms,
        target,
        h1_distance,
        band: config.band,
        band_observable: band_obs,
    })
}
