//! Named initial-data generators.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BbmError, Result};
use crate::field::{Field1D, Grid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant {
        value: f64,
    },
    /// `amplitude·cos(n x)` on the torus, `amplitude·cos(nπx/L)` on the interval.
    SingleMode {
        amplitude: f64,
        wavenumber: u32,
    },
    SolitaryWave {
        speed: f64,
        #[serde(default)]
        center: f64,
    },
    /// Random cosine/sine modes `1..=cutoff` with `1/n` decay, rescaled to
    /// `max |u| = amplitude`.
    RandomSmooth {
        seed: u64,
        amplitude: f64,
        cutoff: u32,
    },
}

/// `3(c−1) sech²(κξ)` with `κ = ½√((c−1)/c)`: the traveling profile of the
/// undamped equation on the line, `u(x, t) = φ(x − ct)`.
pub fn solitary_wave_profile(speed: f64, xi: f64) -> f64 {
    let kappa = 0.5 * ((speed - 1.0) / speed).sqrt();
    let s = 1.0 / (kappa * xi).cosh();
    3.0 * (speed - 1.0) * s * s
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BbmError::InvalidParameter(m));
        match *self {
            InitialCondition::Constant { value } if !value.is_finite() => {
                bad("initial_condition.value must be finite".into())
            }
            InitialCondition::SingleMode { amplitude, .. } if !amplitude.is_finite() => {
                bad("initial_condition.amplitude must be finite".into())
            }
            InitialCondition::SolitaryWave { speed, center } => {
                if !(speed > 1.0 && speed.is_finite()) {
                    bad(format!("initial_condition.speed must be > 1, got {speed}"))
                } else if !center.is_finite() {
                    bad("initial_condition.center must be finite".into())
                } else {
                    Ok(())
                }
            }
            InitialCondition::RandomSmooth { amplitude, cutoff, .. } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    bad(format!("initial_condition.amplitude must be >= 0, got {amplitude}"))
                } else if cutoff == 0 {
                    bad("initial_condition.cutoff must be positive".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field1D> {
        self.validate()?;
        let length = grid.length();
        let torus = matches!(grid, Grid::Torus(_));
        // angular frequency of mode n
        let freq = |n: f64| if torus { n } else { n * PI / length };
        match *self {
            InitialCondition::Constant { value } => Field1D::constant(grid.clone(), value),
            InitialCondition::SingleMode {
                amplitude,
                wavenumber,
            } => {
                let w = freq(wavenumber as f64);
                Field1D::from_fn(grid.clone(), |x| amplitude * (w * x).cos())
            }
            InitialCondition::SolitaryWave { speed, center } => {
                if torus {
                    // sum of periodic images, truncated once they are negligible
                    Field1D::from_fn(grid.clone(), |x| {
                        let mut total = solitary_wave_profile(speed, x - center);
                        for m in 1..200 {
                            let shift = 2.0 * PI * m as f64;
                            let term = solitary_wave_profile(speed, x - center + shift)
                                + solitary_wave_profile(speed, x - center - shift);
                            total += term;
                            if term < 1e-18 * total.abs().max(1e-300) {
                                break;
                            }
                        }
                        total
                    })
                } else {
                    Field1D::from_fn(grid.clone(), |x| solitary_wave_profile(speed, x - center))
                }
            }
            InitialCondition::RandomSmooth {
                seed,
                amplitude,
                cutoff,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let modes: Vec<(f64, f64, f64)> = (1..=cutoff)
                    .map(|n| {
                        let n = n as f64;
                        let a = rng.random_range(-1.0..1.0) / n;
                        let b = if torus { rng.random_range(-1.0..1.0) / n } else { 0.0 };
                        (freq(n), a, b)
                    })
                    .collect();
                let raw = Field1D::from_fn(grid.clone(), |x| {
                    modes
                        .iter()
                        .map(|(w, a, b)| a * (w * x).cos() + b * (w * x).sin())
                        .sum()
                })?;
                let peak = raw.max_abs();
                if peak == 0.0 {
                    return Ok(raw);
                }
                raw.scale(amplitude / peak)
            }
        }
    }
}
