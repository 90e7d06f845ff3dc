use serde::Serialize;

use super::EnergyLedger;
use crate::error::{BbmError, Result};

/// Window integrals `I_n = ∫_{nT}^{(n+1)T} D dt`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailDissipation {
    pub window: f64,
    pub integrals: Vec<f64>,
    /// First index from which `I_n` never increases again.
    pub decreasing_from: usize,
    /// At least three trailing windows are nonincreasing.
    pub eventually_decreasing: bool,
    pub last: f64,
}

pub fn tail_dissipation(ledger: &EnergyLedger, window: f64) -> Result<TailDissipation> {
    if !(window > 0.0) {
        return Err(BbmError::InvalidParameter("tail window must be positive".into()));
    }
    let horizon = ledger.last().map_or(0.0, |r| r.t);
    let count = ((horizon / window) + 1e-9).floor() as usize;
    if count < 3 {
        return Err(BbmError::InvalidParameter(format!(
            "horizon {horizon} covers fewer than three windows of length {window}"
        )));
    }
    let q = |t: f64| {
        ledger
            .cumulative_at(t)
            .ok_or_else(|| BbmError::InvalidParameter(format!("ledger does not cover t = {t}")))
    };
    let mut integrals = Vec::with_capacity(count);
    for n in 0..count {
        let t0 = n as f64 * window;
        let t1 = (t0 + window).min(horizon);
        integrals.push(q(t1)? - q(t0)?);
    }
    let mut decreasing_from = integrals.len() - 1;
    while decreasing_from > 0 && integrals[decreasing_from] <= integrals[decreasing_from - 1] {
        decreasing_from -= 1;
    }
    Ok(TailDissipation {
        window,
        eventually_decreasing: integrals.len() - decreasing_from >= 3,
        decreasing_from,
        last: *integrals.last().expect("count >= 3"),
        integrals,
    })
}
