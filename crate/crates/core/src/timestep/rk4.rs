use crate::error::{BbmError, Result};
use crate::field::Field1D;
use crate::operators::{Model, Variant};

#[derive(Clone, Debug)]
pub struct StepperState {
    pub t: f64,
    pub u: Field1D,
    pub dt: f64,
    pub variant: Variant,
    pub accepted_steps: u64,
    pub rejected_windows: u64,
    /// `∫₀ᵗ D(u) dt`, advanced by the same Runge–Kutta stages as `u`.
    pub dissipated: f64,
}

impl StepperState {
    pub fn new(u: Field1D, dt: f64, variant: Variant) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(BbmError::InvalidParameter(format!(
                "time step must be finite and nonzero, got {dt}"
            )));
        }
        Ok(Self {
            t: 0.0,
            u,
            dt,
            variant,
            accepted_steps: 0,
            rejected_windows: 0,
            dissipated: 0.0,
        })
    }
}

/// Classical four-stage Runge–Kutta step of `u_t = F(u)` augmented with
/// `Q_t = D(u)`. A negative `dt` integrates backwards in time.
pub fn rk4_step(state: &StepperState, model: &Model) -> Result<StepperState> {
    let dt = state.dt;
    let t = state.t;
    let blown = |e: BbmError| match e {
        BbmError::NonFinite(_) => BbmError::Instability { t },
        other => other,
    };
    let u = &state.u;
    let k1 = model.rhs(u).map_err(blown)?;
    let d1 = model.dissipation_rate(u)?;
    let u2 = u.add_scaled(0.5 * dt, &k1).map_err(blown)?;
    let k2 = model.rhs(&u2).map_err(blown)?;
    let d2 = model.dissipation_rate(&u2)?;
    let u3 = u.add_scaled(0.5 * dt, &k2).map_err(blown)?;
    let k3 = model.rhs(&u3).map_err(blown)?;
    let d3 = model.dissipation_rate(&u3)?;
    let u4 = u.add_scaled(dt, &k3).map_err(blown)?;
    let k4 = model.rhs(&u4).map_err(blown)?;
    let d4 = model.dissipation_rate(&u4)?;

    let w = dt / 6.0;
    let values: Vec<f64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            v + w * (k1.values()[j] + 2.0 * k2.values()[j] + 2.0 * k3.values()[j] + k4.values()[j])
        })
        .collect();
    let dissipated = state.dissipated + w * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    if !dissipated.is_finite() {
        return Err(BbmError::Instability { t });
    }
    Ok(StepperState {
        t: t + dt,
        u: u.with_values(values).map_err(blown)?,
        dissipated,
        accepted_steps: state.accepted_steps + 1,
        ..state.clone()
    })
}
