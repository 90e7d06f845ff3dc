use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use bbm_core::{
    BbmError, DampingProfile, FeedbackCoefficients, Field1D, Grid, InitialCondition, IntervalGrid, Model,
    PicardSettings, TorusGrid, Variant,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Torus { n_points: usize },
    Interval { length: f64, cells: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingConfig {
    Bump { center: f64, radius: f64, amplitude: f64 },
    Constant { amplitude: f64 },
    None,
    /// Two-column CSV `(x, a)`, relative paths resolved against the config file.
    Table { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackConfig {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    #[serde(alias = "one_step", alias = "rk4")]
    Onestep,
    Picard,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub picard_window: f64,
    pub max_iterations: usize,
    pub fixed_point_tolerance: f64,
    pub contraction_target: f64,
    pub window_shrink_factor: f64,
    pub norm_index: f64,
    /// Spacing of DecayReport samples; defaults to a tenth of the horizon.
    pub decay_window: Option<f64>,
    /// Allowed per-sample increase of the H¹ distance; defaults to
    /// `1e-9 + 10 ×` the measured balance residual.
    pub monotone_slack: Option<f64>,
    /// Tail-dissipation window; defaults to a tenth of the horizon.
    pub tail_window: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let p = PicardSettings::default();
        Self {
            picard_window: p.window,
            max_iterations: p.max_iterations,
            fixed_point_tolerance: p.fixed_point_tolerance,
            contraction_target: p.contraction_target,
            window_shrink_factor: p.window_shrink_factor,
            norm_index: p.norm_index,
            decay_window: None,
            monotone_slack: None,
            tail_window: None,
        }
    }
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub variant: Variant,
    pub domain: DomainConfig,
    pub initial_condition: InitialCondition,
    #[serde(default)]
    pub damping: Option<DampingConfig>,
    #[serde(default)]
    pub feedback: Option<FeedbackConfig>,
    #[serde(default)]
    pub allow_nondissipative: bool,
    pub integrator: IntegratorKind,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn core_invalid(field: &str) -> impl Fn(BbmError) -> CliError + '_ {
    move |e| invalid(field, e)
}

/// Everything needed to run: the model, the initial field and integrator settings.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub model: Model,
    pub u0: Field1D,
    pub picard: PicardSettings,
}

impl SimConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: SimConfig = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(DampingConfig::Table { path: table }) = &mut cfg.damping {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn picard_settings(&self) -> PicardSettings {
        let t = &self.tolerances;
        PicardSettings {
            window: t.picard_window,
            max_iterations: t.max_iterations,
            fixed_point_tolerance: t.fixed_point_tolerance,
            contraction_target: t.contraction_target,
            window_shrink_factor: t.window_shrink_factor,
            sample_spacing: self.dt,
            norm_index: t.norm_index,
        }
    }

    pub fn decay_window(&self) -> f64 {
        self.tolerances.decay_window.unwrap_or(self.horizon / 10.0)
    }

    pub fn tail_window(&self) -> f64 {
        self.tolerances.tail_window.unwrap_or(self.horizon / 10.0)
    }

    /// Checks every field and builds the model and initial data. Error
    /// messages start with the offending field name.
    pub fn prepare(&self) -> Result<Prepared, CliError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be >= 0, got {}", self.horizon)));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride", "must be positive"));
        }
        for (name, v) in [("tolerances.decay_window", self.tolerances.decay_window), ("tolerances.tail_window", self.tolerances.tail_window)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(invalid(name, format!("must be positive, got {v}")));
                }
            }
        }
        let picard = self.picard_settings();
        picard.validate().map_err(core_invalid("tolerances"))?;

        let grid: Grid = match (&self.domain, self.variant) {
            (DomainConfig::Torus { n_points }, Variant::LocalDamping | Variant::GradientDamping) => {
                TorusGrid::new(*n_points).map_err(core_invalid("domain.n_points"))?.into()
            }
            (DomainConfig::Interval { length, cells }, Variant::BoundaryFeedback) => {
                IntervalGrid::new(*length, *cells).map_err(core_invalid("domain"))?.into()
            }
            (DomainConfig::Torus { .. }, Variant::BoundaryFeedback) => {
                return Err(invalid("domain", "variant C requires an interval domain"))
            }
            (DomainConfig::Interval { .. }, v) => {
                return Err(invalid("domain", format!("variant {} requires a torus domain", v.tag())))
            }
        };

        let model = match self.variant {
            Variant::LocalDamping | Variant::GradientDamping => {
                if self.feedback.is_some() {
                    return Err(invalid("feedback", "only applies to variant C"));
                }
                let torus = grid.as_torus().expect("checked above");
                let damping = match self.damping.as_ref().ok_or_else(|| invalid("damping", "required for variants A and B"))? {
                    DampingConfig::Bump {
                        center,
                        radius,
                        amplitude,
                    } => DampingProfile::bump(torus, *center, *radius, *amplitude),
                    DampingConfig::Constant { amplitude } => DampingProfile::constant(torus, *amplitude),
                    DampingConfig::None => Ok(DampingProfile::none(torus)),
                    DampingConfig::Table { path } => {
                        let file = File::open(path).map_err(|e| invalid("damping.path", format!("{}: {e}", path.display())))?;
                        DampingProfile::from_csv(torus, BufReader::new(file))
                    }
                }
                .map_err(core_invalid("damping"))?;
                if self.variant == Variant::LocalDamping {
                    Model::local_damping(damping)
                } else {
                    Model::gradient_damping(damping)
                }
            }
            Variant::BoundaryFeedback => {
                if self.damping.is_some() {
                    return Err(invalid("damping", "only applies to variants A and B"));
                }
                let fb = self.feedback.ok_or_else(|| invalid("feedback", "required for variant C"))?;
                let coeffs = if self.allow_nondissipative {
                    FeedbackCoefficients::new_unrestricted(fb.alpha, fb.beta)
                } else {
                    FeedbackCoefficients::new(fb.alpha, fb.beta)
                }
                .map_err(|e| {
                    invalid(
                        "feedback",
                        format!("{e}; set allow_nondissipative=true to run anyway"),
                    )
                })?;
                Model::boundary_feedback(coeffs)
            }
        };
        let u0 = self
            .initial_condition
            .sample(&grid)
            .map_err(core_invalid("initial_condition"))?;
        Ok(Prepared { model, u0, picard })
    }
}
