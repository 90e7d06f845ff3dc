//! Time integration: the classical Runge–Kutta step for production runs,
//! Picard iteration of the integral form for verification, and the driver
//! that chains either one over a horizon while filling an energy ledger.

mod picard;
mod quadrature;
mod rk4;

pub use picard::{gamma_map, picard_solve, PathNorm, PicardSettings, PicardSolution, TimePath};
pub use rk4::{rk4_step, StepperState};

use crate::diagnostics::EnergyLedger;
use crate::error::{BbmError, Result};
use crate::field::Field1D;
use crate::operators::Model;
use quadrature::cumulative_integral_scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrator {
    OneStep,
    /// Window-chained fixed-point iteration; samples are spaced by the
    /// configured `dt`.
    Picard(PicardSettings),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationConfig {
    pub integrator: Integrator,
    pub dt: f64,
    /// Ledger record every this many steps (the final state is always recorded).
    pub record_stride: usize,
    /// Snapshot every this many steps; 0 keeps only the initial and final states.
    pub snapshot_stride: usize,
}

impl IntegrationConfig {
    pub fn one_step(dt: f64) -> Self {
        Self {
            integrator: Integrator::OneStep,
            dt,
            record_stride: 1,
            snapshot_stride: 0,
        }
    }

    pub fn with_strides(mut self, record_stride: usize, snapshot_stride: usize) -> Self {
        self.record_stride = record_stride;
        self.snapshot_stride = snapshot_stride;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field1D,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, field: &Field1D) {
        self.snapshots.push(Snapshot {
            t,
            field: field.clone(),
        });
    }

    pub fn initial(&self) -> Option<&Snapshot> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub trajectory: Trajectory,
    pub ledger: EnergyLedger,
    pub final_state: StepperState,
}

pub fn integrate(u0: &Field1D, horizon: f64, model: &Model, config: &IntegrationConfig) -> Result<Run> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(BbmError::InvalidParameter(format!(
            "horizon must be >= 0, got {horizon}"
        )));
    }
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return Err(BbmError::InvalidParameter(format!(
            "dt must be positive, got {}",
            config.dt
        )));
    }
    if config.record_stride == 0 {
        return Err(BbmError::InvalidParameter("record_stride must be positive".into()));
    }
    match config.integrator {
        Integrator::OneStep => integrate_one_step(u0, horizon, model, config),
        Integrator::Picard(settings) => integrate_picard(u0, horizon, model, config, settings),
    }
}

fn wants(stride: usize, step: u64) -> bool {
    stride > 0 && step % stride as u64 == 0
}

fn integrate_one_step(u0: &Field1D, horizon: f64, model: &Model, config: &IntegrationConfig) -> Result<Run> {
    let n_steps = (horizon / config.dt - 1e-9).ceil().max(0.0) as u64;
    let dt = if n_steps == 0 { config.dt } else { horizon / n_steps as f64 };
    let mut state = StepperState::new(u0.clone(), dt, model.variant())?;
    let mut ledger = EnergyLedger::new(model.variant());
    let mut trajectory = Trajectory::default();
    ledger.record(model, 0.0, u0, 0.0)?;
    trajectory.push(0.0, u0);

    for step in 1..=n_steps {
        state = rk4_step(&state, model)?;
        let last = step == n_steps;
        // avoid accumulating rounding in t
        state.t = if last { horizon } else { step as f64 * dt };
        if last || wants(config.record_stride, step) {
            ledger.record(model, state.t, &state.u, state.dissipated)?;
        }
        if last || wants(config.snapshot_stride, step) {
            trajectory.push(state.t, &state.u);
        }
    }
    Ok(Run {
        trajectory,
        ledger,
        final_state: state,
    })
}

fn integrate_picard(
    u0: &Field1D,
    horizon: f64,
    model: &Model,
    config: &IntegrationConfig,
    settings: PicardSettings,
) -> Result<Run> {
    let settings = PicardSettings {
        sample_spacing: config.dt,
        ..settings
    };
    let mut state = StepperState::new(u0.clone(), config.dt, model.variant())?;
    let mut ledger = EnergyLedger::new(model.variant());
    let mut trajectory = Trajectory::default();
    ledger.record(model, 0.0, u0, 0.0)?;
    trajectory.push(0.0, u0);

    let mut step: u64 = 0;
    while horizon - state.t > 1e-12 * horizon.max(1.0) {
        let window = settings.window.min(horizon - state.t);
        let solution = picard::solve_window(&state.u, state.t, window, &settings, model)?;
        state.rejected_windows += solution.rejected_windows as u64;

        let rates = solution
            .path
            .fields
            .iter()
            .map(|u| model.dissipation_rate(u))
            .collect::<Result<Vec<f64>>>()?;
        let dissipated = cumulative_integral_scalar(&rates, solution.path.step);

        let k_max = solution.path.intervals();
        let window_end = state.t + solution.window;
        let finished = horizon - window_end <= 1e-12 * horizon.max(1.0);
        for k in 1..=k_max {
            step += 1;
            let t = if k == k_max { window_end } else { solution.path.time(k) };
            let u = &solution.path.fields[k];
            let q = state.dissipated + dissipated[k];
            let last = finished && k == k_max;
            if last || wants(config.record_stride, step) {
                ledger.record(model, t, u, q)?;
            }
            if last || wants(config.snapshot_stride, step) {
                trajectory.push(t, u);
            }
        }
        state.t = if finished { horizon } else { window_end };
        state.u = solution.path.last().clone();
        state.dissipated += dissipated[k_max];
        state.accepted_steps += k_max as u64;
    }
    Ok(Run {
        trajectory,
        ledger,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::energy_balance_residual;
    use crate::field::{l2_norm, TorusGrid};
    use crate::operators::{DampingProfile, RhsOptions};
    use std::f64::consts::PI;

    fn undamped(g: &TorusGrid) -> Model {
        Model::local_damping(DampingProfile::none(g))
    }

    fn linear(g: &TorusGrid) -> Model {
        undamped(g).with_options(RhsOptions {
            dealias: true,
            nonlinear: false,
        })
    }

    fn bump_model(g: &TorusGrid) -> Model {
        Model::local_damping(DampingProfile::bump(g, PI, 1.0, 1.0).unwrap())
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = TorusGrid::new(32).unwrap();
        let u0 = Field1D::zeros(g.clone());
        let run = integrate(&u0, 1.0, &bump_model(&g), &IntegrationConfig::one_step(0.1)).unwrap();
        assert_eq!(run.final_state.u.max_abs(), 0.0);
        assert_eq!(energy_balance_residual(&run.ledger), 0.0);
    }

    #[test]
    fn zero_horizon_records_initial_state_only() {
        let g = TorusGrid::new(32).unwrap();
        let u0 = Field1D::from_fn(g.clone(), f64::cos).unwrap();
        let run = integrate(&u0, 0.0, &undamped(&g), &IntegrationConfig::one_step(0.1)).unwrap();
        assert_eq!(run.ledger.records.len(), 1);
        assert_eq!(run.final_state.u.values(), u0.values());
    }

    #[test]
    fn linear_dispersion_relation() {
        // cos(n(x − t/(1+n²))) with n = 1
        let g = TorusGrid::new(32).unwrap();
        let u0 = Field1D::from_fn(g.clone(), f64::cos).unwrap();
        let t = 2.0 * PI;
        let run = integrate(&u0, t, &linear(&g), &IntegrationConfig::one_step(1e-2)).unwrap();
        let exact = Field1D::from_fn(g, |x| (x - 0.5 * t).cos()).unwrap();
        let err = run.final_state.u.sub(&exact).unwrap().max_abs();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn balance_residual_is_fourth_order() {
        let g = TorusGrid::new(64).unwrap();
        let u0 = Field1D::from_fn(g.clone(), |x| 0.5 * x.cos()).unwrap();
        let model = bump_model(&g);
        let res: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&dt| {
                let run = integrate(&u0, 4.0, &model, &IntegrationConfig::one_step(dt)).unwrap();
                energy_balance_residual(&run.ledger)
            })
            .collect();
        for w in res.windows(2) {
            let ratio = w[0] / w[1];
            assert!((12.0..=20.0).contains(&ratio), "{res:?}");
        }
    }

    #[test]
    fn time_reversal_returns_to_initial_data() {
        let g = TorusGrid::new(64).unwrap();
        let u0 = Field1D::from_fn(g.clone(), |x| 0.5 * x.cos() + 0.2 * (2.0 * x).sin()).unwrap();
        let model = undamped(&g);
        let mut state = StepperState::new(u0.clone(), 1e-3, model.variant()).unwrap();
        for _ in 0..1000 {
            state = rk4_step(&state, &model).unwrap();
        }
        state.dt = -1e-3;
        for _ in 0..1000 {
            state = rk4_step(&state, &model).unwrap();
        }
        let err = l2_norm(&state.u.sub(&u0).unwrap());
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn rejects_bad_configuration() {
        let g = TorusGrid::new(16).unwrap();
        let u0 = Field1D::zeros(g.clone());
        let m = undamped(&g);
        assert!(integrate(&u0, -1.0, &m, &IntegrationConfig::one_step(0.1)).is_err());
        assert!(integrate(&u0, 1.0, &m, &IntegrationConfig::one_step(0.0)).is_err());
        let cfg = IntegrationConfig::one_step(0.1).with_strides(0, 0);
        assert!(integrate(&u0, 1.0, &m, &cfg).is_err());
    }

    #[test]
    fn picard_zero_data() {
        let g = TorusGrid::new(32).unwrap();
        let u0 = Field1D::zeros(g.clone());
        let sol = picard_solve(&u0, 0.5, &PicardSettings::default(), &bump_model(&g)).unwrap();
        assert!(sol.path.fields.iter().all(|f| f.max_abs() == 0.0));
        assert_eq!(sol.window, 0.5);
    }

    #[test]
    fn picard_fixed_point_has_small_defect() {
        let g = TorusGrid::new(64).unwrap();
        let u0 = Field1D::from_fn(g.clone(), |x| 0.1 * x.cos()).unwrap();
        let model = bump_model(&g);
        let settings = PicardSettings {
            sample_spacing: 1e-2,
            ..PicardSettings::default()
        };
        let sol = picard_solve(&u0, 0.5, &settings, &model).unwrap();
        let image = gamma_map(&sol.path, &u0, &model).unwrap();
        let defect = image.sup_distance(&sol.path, PathNorm(0.0)).unwrap();
        assert!(defect <= 10.0 * settings.fixed_point_tolerance, "{defect}");
    }

    #[test]
    fn picard_agrees_with_runge_kutta() {
        let g = TorusGrid::new(256).unwrap();
        let u0 = Field1D::from_fn(g.clone(), |x| 0.5 * x.cos()).unwrap();
        let model = bump_model(&g);
        let settings = PicardSettings::default();
        let sol = picard_solve(&u0, 0.5, &settings, &model).unwrap();
        let mut state = StepperState::new(u0, sol.path.step, model.variant()).unwrap();
        let mut sup = 0.0_f64;
        for k in 1..=sol.path.intervals() {
            state = rk4_step(&state, &model).unwrap();
            sup = sup.max(PathNorm(0.0).eval(&state.u.sub(&sol.path.fields[k]).unwrap()).unwrap());
        }
        assert!(sup <= 1e-6, "{sup}");
    }

    #[test]
    fn picard_shrinks_window_for_large_data() {
        let g = TorusGrid::new(64).unwrap();
        let u0 = Field1D::from_fn(g.clone(), |x| 20.0 * x.cos()).unwrap();
        let settings = PicardSettings {
            sample_spacing: 1e-2,
            ..PicardSettings::default()
        };
        let sol = picard_solve(&u0, 2.0, &settings, &undamped(&g)).unwrap();
        assert!(sol.window < 2.0);
        assert!(sol.rejected_windows > 0);
    }

    #[test]
    fn picard_driver_matches_one_step_ledger() {
        let g = TorusGrid::new(64).unwrap();
        let u0 = Field1D::from_fn(g.clone(), |x| 0.5 * x.cos()).unwrap();
        let model = bump_model(&g);
        let one = integrate(&u0, 1.0, &model, &IntegrationConfig::one_step(1e-2)).unwrap();
        let cfg = IntegrationConfig {
            integrator: Integrator::Picard(PicardSettings::default()),
            dt: 1e-2,
            record_stride: 1,
            snapshot_stride: 0,
        };
        let pic = integrate(&u0, 1.0, &model, &cfg).unwrap();
        assert!((pic.final_state.t - 1.0).abs() < 1e-12);
        let diff = l2_norm(&pic.final_state.u.sub(&one.final_state.u).unwrap());
        assert!(diff < 1e-7, "{diff}");
        let (a, b) = (one.ledger.last().unwrap(), pic.ledger.last().unwrap());
        assert!((a.cumulative_dissipation - b.cumulative_dissipation).abs() < 1e-7);
        assert!(energy_balance_residual(&pic.ledger) < 1e-7);
    }
}
