use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{BbmError, Result};
use crate::field::Field1D;
use crate::operators::{Model, Variant};

pub const LEDGER_HEADER: &str = "t,E,mean,D,cumD,residual";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// `½∫(u² + u_x²) dx`.
    pub energy: f64,
    pub mean: f64,
    pub dissipation_rate: f64,
    pub cumulative_dissipation: f64,
    /// `E(t) − E(0) + ∫₀ᵗ D`.
    pub balance_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyLedger {
    pub variant: Variant,
    pub records: Vec<EnergyRecord>,
}

/// Domain average: `(2π)⁻¹∫u` on the torus, `L⁻¹∫u` on the interval.
pub fn domain_mean(u: &Field1D) -> f64 {
    u.integral() / u.grid().length()
}

impl EnergyLedger {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            records: Vec::new(),
        }
    }

    pub fn record(&mut self, model: &Model, t: f64, u: &Field1D, cumulative_dissipation: f64) -> Result<()> {
        let energy = model.energy(u)?;
        let e0 = self.records.first().map_or(energy, |r| r.energy);
        self.records.push(EnergyRecord {
            t,
            energy,
            mean: domain_mean(u),
            dissipation_rate: model.dissipation_rate(u)?,
            cumulative_dissipation,
            balance_residual: energy - e0 + cumulative_dissipation,
        });
        Ok(())
    }

    pub fn initial_energy(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.energy)
    }

    pub fn last(&self) -> Option<&EnergyRecord> {
        self.records.last()
    }

    /// Largest energy increase between consecutive records (negative when
    /// the energy strictly decreases throughout).
    pub fn max_energy_increase(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cumulative dissipation at time `t`, linearly interpolated between records.
    pub fn cumulative_at(&self, t: f64) -> Option<f64> {
        let recs = &self.records;
        let i = recs.partition_point(|r| r.t < t);
        if i == 0 {
            return recs.first().filter(|r| (r.t - t).abs() <= 1e-9).map(|r| r.cumulative_dissipation);
        }
        if i == recs.len() {
            let last = recs.last()?;
            return ((last.t - t).abs() <= 1e-9 * t.abs().max(1.0)).then_some(last.cumulative_dissipation);
        }
        let (a, b) = (recs[i - 1], recs[i]);
        let w = (t - a.t) / (b.t - a.t);
        Some((1.0 - w) * a.cumulative_dissipation + w * b.cumulative_dissipation)
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{LEDGER_HEADER}")?;
        for r in &self.records {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.energy, r.mean, r.dissipation_rate, r.cumulative_dissipation, r.balance_residual
            )?;
        }
        Ok(())
    }

    pub fn read_csv(variant: Variant, r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| BbmError::Parse("empty ledger".into()))??;
        if header.trim() != LEDGER_HEADER {
            return Err(BbmError::Parse(format!(
                "ledger header {header:?} != {LEDGER_HEADER:?}"
            )));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| BbmError::Parse(format!("ledger row {}: {e}", i + 2)))?;
            let [t, energy, mean, d, q, res] = cols[..] else {
                return Err(BbmError::Parse(format!("ledger row {} has {} columns", i + 2, cols.len())));
            };
            records.push(EnergyRecord {
                t,
                energy,
                mean,
                dissipation_rate: d,
                cumulative_dissipation: q,
                balance_residual: res,
            });
        }
        Ok(Self { variant, records })
    }
}

/// `max_t |E(t) − E(0) + ∫₀ᵗ D|`.
pub fn energy_balance_residual(ledger: &EnergyLedger) -> f64 {
    ledger
        .records
        .iter()
        .fold(0.0, |m, r| m.max(r.balance_residual.abs()))
}

pub fn dissipation_rate(u: &Field1D, model: &Model) -> Result<f64> {
    model.dissipation_rate(u)
}
