//! Fixed-point iteration of the integral-form map
//! `(Γu)(t) = u₀ + ∫₀ᵗ F(u(τ)) dτ` on a time window.
//!
//! The contraction time of the existence proof depends on constants that
//! are not computable, so the window adapts instead: when successive
//! increments stop shrinking by at least `contraction_target` for three
//! iterations in a row, the window is cut by `window_shrink_factor` and the
//! iteration restarts.

use super::quadrature::{cumulative_integral, lincomb};
use crate::error::{BbmError, Result};
use crate::field::{h1_norm_interval, l2_norm, sobolev_norm, Field1D, Grid, SobolevIndex};
use crate::operators::Model;

const MIN_WINDOW: f64 = 1e-8;
const MIN_SAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardSettings {
    pub window: f64,
    pub max_iterations: usize,
    /// Convergence threshold on `sup_t ‖u^{k+1}(t) − u^k(t)‖_s`.
    pub fixed_point_tolerance: f64,
    pub contraction_target: f64,
    pub window_shrink_factor: f64,
    /// Target time spacing of the path samples; the window gets
    /// `max(16, ceil(T/spacing))` intervals.
    pub sample_spacing: f64,
    /// Sobolev index of the increment norm (torus). Interval paths use the
    /// H¹ norm when this is positive and L² otherwise.
    pub norm_index: f64,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self {
            window: 0.5,
            max_iterations: 50,
            fixed_point_tolerance: 1e-12,
            contraction_target: 0.5,
            window_shrink_factor: 0.5,
            sample_spacing: 1e-3,
            norm_index: 1.0,
        }
    }
}

impl PicardSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(BbmError::InvalidParameter(what.to_string()));
        if !(self.window > 0.0 && self.window.is_finite()) {
            return bad("picard window must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.fixed_point_tolerance > 0.0) {
            return bad("fixed_point_tolerance must be positive");
        }
        if !(self.contraction_target > 0.0 && self.contraction_target < 1.0) {
            return bad("contraction_target must lie in (0, 1)");
        }
        if !(self.window_shrink_factor > 0.0 && self.window_shrink_factor < 1.0) {
            return bad("window_shrink_factor must lie in (0, 1)");
        }
        if !(self.sample_spacing > 0.0) {
            return bad("sample_spacing must be positive");
        }
        if !(self.norm_index >= 0.0) {
            return bad("norm_index must be >= 0");
        }
        Ok(())
    }
}

/// Fields sampled at `t0 + k·step`, `k = 0..=K`.
#[derive(Clone, Debug)]
pub struct TimePath {
    pub t0: f64,
    pub step: f64,
    pub fields: Vec<Field1D>,
}

impl TimePath {
    pub fn constant(u0: &Field1D, t0: f64, window: f64, intervals: usize) -> Self {
        Self {
            t0,
            step: window / intervals as f64,
            fields: vec![u0.clone(); intervals + 1],
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.step * k as f64
    }

    pub fn intervals(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn last(&self) -> &Field1D {
        self.fields.last().expect("path has samples")
    }

    /// `sup_k ‖self_k − other_k‖` in the given path norm.
    pub fn sup_distance(&self, other: &TimePath, norm: PathNorm) -> Result<f64> {
        let mut sup = 0.0_f64;
        for (a, b) in self.fields.iter().zip(&other.fields) {
            sup = sup.max(norm.eval(&a.sub(b)?)?);
        }
        Ok(sup)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathNorm(pub f64);

impl PathNorm {
    pub fn eval(&self, f: &Field1D) -> Result<f64> {
        match f.grid() {
            Grid::Torus(_) => sobolev_norm(f, SobolevIndex::torus(self.0)?),
            Grid::Interval(_) if self.0 > 0.0 => h1_norm_interval(f),
            Grid::Interval(_) => Ok(l2_norm(f)),
        }
    }
}

/// One application of `Γ`: `u₀ + ∫ F(path)` with cumulative Simpson quadrature.
pub fn gamma_map(path: &TimePath, u0: &Field1D, model: &Model) -> Result<TimePath> {
    if path.fields.len() < 2 {
        return Err(BbmError::InvalidParameter("path needs at least two samples".into()));
    }
    let mut rates = Vec::with_capacity(path.fields.len());
    for (k, u) in path.fields.iter().enumerate() {
        let f = model.rhs(u).map_err(|e| match e {
            BbmError::NonFinite(_) => BbmError::Instability { t: path.time(k) },
            other => other,
        })?;
        rates.push(f.into_values());
    }
    let refs: Vec<&[f64]> = rates.iter().map(Vec::as_slice).collect();
    let integrals = cumulative_integral(&refs, path.step);
    let mut fields = Vec::with_capacity(integrals.len());
    for (k, integral) in integrals.iter().enumerate() {
        let values = lincomb(&[(1.0, u0.values()), (1.0, integral)]);
        fields.push(
            u0.with_values(values)
                .map_err(|_| BbmError::Instability { t: path.time(k) })?,
        );
    }
    Ok(TimePath {
        t0: path.t0,
        step: path.step,
        fields,
    })
}

#[derive(Clone, Debug)]
pub struct PicardSolution {
    pub path: TimePath,
    /// Window actually used after any shrinking.
    pub window: f64,
    pub iterations: usize,
    pub rejected_windows: usize,
    pub last_increment: f64,
}

pub fn picard_solve(
    u0: &Field1D,
    window: f64,
    settings: &PicardSettings,
    model: &Model,
) -> Result<PicardSolution> {
    solve_window(u0, 0.0, window, settings, model)
}

pub(crate) fn solve_window(
    u0: &Field1D,
    t0: f64,
    window: f64,
    settings: &PicardSettings,
    model: &Model,
) -> Result<PicardSolution> {
    settings.validate()?;
    if !(window > 0.0) {
        return Err(BbmError::InvalidParameter(format!(
            "picard window must be positive, got {window}"
        )));
    }
    let norm = PathNorm(settings.norm_index);
    let mut window = window;
    let mut rejected = 0;
    loop {
        if window < MIN_WINDOW {
            return Err(BbmError::WindowCollapsed { t: t0, window });
        }
        let intervals = MIN_SAMPLES.max((window / settings.sample_spacing).ceil() as usize);
        match iterate(u0, t0, window, intervals, settings, model, norm) {
            Ok(Some((path, iterations, last_increment))) => {
                return Ok(PicardSolution {
                    path,
                    window,
                    iterations,
                    rejected_windows: rejected,
                    last_increment,
                })
            }
            Ok(None) | Err(BbmError::Instability { .. }) => {
                rejected += 1;
                window *= settings.window_shrink_factor;
            }
            Err(e) => return Err(e),
        }
    }
}

/// `Ok(None)` when the iteration fails to contract on this window.
fn iterate(
    u0: &Field1D,
    t0: f64,
    window: f64,
    intervals: usize,
    settings: &PicardSettings,
    model: &Model,
    norm: PathNorm,
) -> Result<Option<(TimePath, usize, f64)>> {
    let mut path = TimePath::constant(u0, t0, window, intervals);
    let mut previous: Option<f64> = None;
    let mut streak = 0;
    for iteration in 1..=settings.max_iterations {
        let next = gamma_map(&path, u0, model)?;
        let increment = next.sup_distance(&path, norm)?;
        if increment < settings.fixed_point_tolerance {
            return Ok(Some((next, iteration, increment)));
        }
        if let Some(prev) = previous {
            if increment > settings.contraction_target * prev {
                streak += 1;
                if streak >= 3 {
                    return Ok(None);
                }
            } else {
                streak = 0;
            }
        }
        previous = Some(increment);
        path = next;
    }
    Ok(None)
}
