//! Spatial discretization: grids, nodal fields, Fourier coefficients,
//! differentiation, Sobolev norms and quadrature.
//!
//! Two domains are supported. The torus is `[0, 2π)` with periodic
//! boundary conditions and a Fourier pseudospectral representation. The
//! interval `[0, L]` carries nodal values at `M + 1` equally spaced points
//! including both endpoints, differentiated with fourth-order finite
//! differences.

mod snapshot;
mod spectral;

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::error::{BbmError, Result};

pub use snapshot::{read_snapshot, write_snapshot};
pub use spectral::{dealias, to_spectral, wavenumber, Spectrum};
pub(crate) use spectral::{dealias_bins, derivative_symbol, forward_bins, inverse_bins};

pub const MIN_TORUS_POINTS: usize = 16;
pub const MIN_INTERVAL_CELLS: usize = 32;

/// Uniform grid on the torus `ℝ/2πℤ`; node `j` sits at `2πj/N`.
#[derive(Clone)]
pub struct TorusGrid {
    n_points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl TorusGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < MIN_TORUS_POINTS || n_points % 2 != 0 {
            return Err(BbmError::InvalidGrid(format!(
                "torus needs an even number of points >= {MIN_TORUS_POINTS}, got {n_points}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n_points,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.spacing() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Highest wavenumber kept by the two-thirds rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n_points / 3
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<f64>> {
        &self.forward
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<f64>> {
        &self.inverse
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points
    }
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n_points", &self.n_points)
            .finish()
    }
}

/// Uniform grid on `[0, L]` with `M` cells; node `j` sits at `jL/M`, `j = 0..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalGrid {
    length: f64,
    cells: usize,
}

impl IntervalGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(BbmError::InvalidGrid(format!(
                "interval length must be positive, got {length}"
            )));
        }
        if cells < MIN_INTERVAL_CELLS {
            return Err(BbmError::InvalidGrid(format!(
                "interval needs at least {MIN_INTERVAL_CELLS} cells, got {cells}"
            )));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n_points(&self) -> usize {
        self.cells + 1
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.length * j as f64 / self.cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|j| self.x(j)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Torus(TorusGrid),
    Interval(IntervalGrid),
}

impl Grid {
    pub fn n_points(&self) -> usize {
        match self {
            Grid::Torus(g) => g.n_points(),
            Grid::Interval(g) => g.n_points(),
        }
    }

    /// Period of the torus or length of the interval.
    pub fn length(&self) -> f64 {
        match self {
            Grid::Torus(_) => 2.0 * PI,
            Grid::Interval(g) => g.length(),
        }
    }

    pub fn spacing(&self) -> f64 {
        match self {
            Grid::Torus(g) => g.spacing(),
            Grid::Interval(g) => g.spacing(),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        match self {
            Grid::Torus(g) => g.nodes(),
            Grid::Interval(g) => g.nodes(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Grid::Torus(_) => "torus",
            Grid::Interval(_) => "interval",
        }
    }

    pub fn as_torus(&self) -> Result<&TorusGrid> {
        match self {
            Grid::Torus(g) => Ok(g),
            Grid::Interval(_) => Err(BbmError::DomainMismatch {
                expected: "torus",
                found: "interval",
            }),
        }
    }

    pub fn as_interval(&self) -> Result<&IntervalGrid> {
        match self {
            Grid::Interval(g) => Ok(g),
            Grid::Torus(_) => Err(BbmError::DomainMismatch {
                expected: "interval",
                found: "torus",
            }),
        }
    }

    /// Trapezoid rule on the grid nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points());
        match self {
            Grid::Torus(g) => g.spacing() * values.iter().sum::<f64>(),
            Grid::Interval(g) => {
                let last = values.len() - 1;
                g.spacing() * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[last]))
            }
        }
    }
}

impl From<TorusGrid> for Grid {
    fn from(g: TorusGrid) -> Self {
        Grid::Torus(g)
    }
}

impl From<IntervalGrid> for Grid {
    fn from(g: IntervalGrid) -> Self {
        Grid::Interval(g)
    }
}

/// Real-valued function sampled on a grid. Values are immutable; the
/// Fourier coefficients of torus fields are computed once on demand.
#[derive(Clone)]
pub struct Field1D {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl Field1D {
    pub fn new(grid: impl Into<Grid>, values: Vec<f64>) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.n_points() {
            return Err(BbmError::GridMismatch(format!(
                "expected {} nodal values, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(BbmError::NonFinite(format!("field value at node {j}")));
        }
        Ok(Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: impl Into<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = grid.into();
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: impl Into<Grid>) -> Self {
        let grid = grid.into();
        let values = vec![0.0; grid.n_points()];
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn constant(grid: impl Into<Grid>, c: f64) -> Result<Self> {
        let grid = grid.into();
        let values = vec![c; grid.n_points()];
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// New field on the same grid.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values)
    }

    /// Cached Fourier coefficients (torus only).
    pub fn spectrum(&self) -> Result<&Spectrum> {
        let grid = self.grid.as_torus()?;
        Ok(self
            .spectrum
            .get_or_init(|| Spectrum::from_values(grid, &self.values)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid quadrature of the nodal values over the domain.
    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, scale: f64, other: &Field1D) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        self.with_values(values)
    }

    pub fn sub(&self, other: &Field1D) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|v| s * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn check_same_grid(&self, other: &Field1D) -> Result<()> {
        if self.grid != other.grid {
            return Err(BbmError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn derivative(&self) -> Result<Self> {
        derivative(self)
    }

    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        sobolev_norm(self, SobolevIndex::torus(s)?)
    }

    pub fn mean(&self) -> Result<f64> {
        mean(self)
    }
}

impl fmt::Debug for Field1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field1D")
            .field("grid", &self.grid)
            .field("values", &self.values)
            .finish()
    }
}

impl PartialEq for Field1D {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

/// Sobolev exponent, validated against the admissible range of its domain:
/// `s >= 0` on the torus, `1/2 < s < 5/2` on the interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevIndex {
    s: f64,
    interval: bool,
}

impl SobolevIndex {
    pub fn torus(s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(BbmError::InvalidParameter(format!(
                "torus Sobolev index must be >= 0, got {s}"
            )));
        }
        Ok(Self { s, interval: false })
    }

    pub fn interval(s: f64) -> Result<Self> {
        if !(s > 0.5 && s < 2.5) {
            return Err(BbmError::InvalidParameter(format!(
                "interval Sobolev index must lie in (1/2, 5/2), got {s}"
            )));
        }
        Ok(Self { s, interval: true })
    }

    pub fn value(&self) -> f64 {
        self.s
    }
}

/// Torus: spectral differentiation. Interval: fourth-order centered
/// differences with fourth-order one-sided closures at both ends.
pub fn derivative(f: &Field1D) -> Result<Field1D> {
    match f.grid() {
        Grid::Torus(grid) => {
            let bins = f.spectrum()?.bins();
            let n = grid.n_points();
            let dbins = bins
                .iter()
                .enumerate()
                .map(|(k, c)| c * derivative_symbol(k, n))
                .collect();
            f.with_values(inverse_bins(grid, dbins))
        }
        Grid::Interval(grid) => f.with_values(fd4_derivative(f.values(), grid.spacing())),
    }
}

pub(crate) fn fd4_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let m = v.len() - 1;
    let s = 1.0 / (12.0 * h);
    let mut d = vec![0.0; v.len()];
    d[0] = s * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    d[1] = s * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for j in 2..m - 1 {
        d[j] = s * (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]);
    }
    d[m - 1] = -s * (-3.0 * v[m] - 10.0 * v[m - 1] + 18.0 * v[m - 2] - 6.0 * v[m - 3] + v[m - 4]);
    d[m] = -s * (-25.0 * v[m] + 48.0 * v[m - 1] - 36.0 * v[m - 2] + 16.0 * v[m - 3] - 3.0 * v[m - 4]);
    d
}

/// `‖f‖_s = (Σ |c_n|² (1+n²)^s)^{1/2}` over the resolved modes. Every FFT
/// bin is counted once, so the Nyquist bin enters with its full weight.
pub fn sobolev_norm(f: &Field1D, s: SobolevIndex) -> Result<f64> {
    if s.interval {
        return Err(BbmError::InvalidParameter(
            "fractional interval norms are not available; use h1_norm_interval".into(),
        ));
    }
    let spec = f.spectrum()?;
    let n = spec.n_points();
    let sum: f64 = spec
        .bins()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let w = wavenumber(k, n) as f64;
            c.norm_sqr() * (1.0 + w * w).powf(s.s)
        })
        .sum();
    Ok(sum.sqrt())
}

/// `(∫₀ᴸ f² + f_x² dx)^{1/2}` by the trapezoid rule.
pub fn h1_norm_interval(f: &Field1D) -> Result<f64> {
    let grid = f.grid().as_interval()?;
    let dx = fd4_derivative(f.values(), grid.spacing());
    let density: Vec<f64> = f
        .values()
        .iter()
        .zip(&dx)
        .map(|(u, ux)| u * u + ux * ux)
        .collect();
    Ok(f.grid().integrate(&density).sqrt())
}

/// `(2π)⁻¹ ∫ f dx`, i.e. the zeroth Fourier coefficient.
pub fn mean(f: &Field1D) -> Result<f64> {
    f.grid().as_torus()?;
    Ok(f.integral() / (2.0 * PI))
}

/// `L² ` norm by trapezoid quadrature, on either domain.
pub fn l2_norm(f: &Field1D) -> f64 {
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    f.grid().integrate(&sq).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn torus(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(15).is_err());
        assert!(TorusGrid::new(18).is_ok());
        assert!(TorusGrid::new(14).is_err());
        assert!(IntervalGrid::new(1.0, 31).is_err());
        assert!(IntervalGrid::new(0.0, 64).is_err());
        let g = IntervalGrid::new(2.0, 40).unwrap();
        assert_eq!(g.x(0), 0.0);
        assert_eq!(g.x(40), 2.0);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = torus(16);
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(Field1D::new(g, v), Err(BbmError::NonFinite(_))));
    }

    #[test]
    fn torus_derivative_of_sine_and_constant() {
        let g = torus(64);
        let f = Field1D::from_fn(g.clone(), f64::sin).unwrap();
        let d = derivative(&f).unwrap();
        for (x, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - x.cos()).abs() <= 1e-12);
        }
        let c = Field1D::constant(g, 3.5).unwrap();
        assert!(derivative(&c).unwrap().max_abs() <= 1e-13);
    }

    #[test]
    fn interval_derivative_exact_for_quadratic() {
        let l = 3.0;
        let g = IntervalGrid::new(l, 40).unwrap();
        let f = Field1D::from_fn(g.clone(), |x| x * (l - x)).unwrap();
        let d = derivative(&f).unwrap();
        for (x, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - (l - 2.0 * x)).abs() <= 1e-10, "x={x}");
        }
        // quartic is still exact for the stencils
        let q = Field1D::from_fn(g.clone(), |x| x.powi(4) - 2.0 * x.powi(3)).unwrap();
        let dq = derivative(&q).unwrap();
        for (x, v) in g.nodes().iter().zip(dq.values()) {
            assert!((v - (4.0 * x.powi(3) - 6.0 * x * x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = torus(32);
        let c = Field1D::constant(g.clone(), -2.5).unwrap();
        for s in [0.0, 0.5, 1.0, 3.0] {
            assert_relative_eq!(c.sobolev_norm(s).unwrap(), 2.5, epsilon = 1e-14);
        }
        let cosx = Field1D::from_fn(g.clone(), f64::cos).unwrap();
        assert_relative_eq!(cosx.sobolev_norm(1.0).unwrap(), 1.0, epsilon = 1e-14);
        let sinx = Field1D::from_fn(g.clone(), f64::sin).unwrap();
        assert_relative_eq!(
            sinx.sobolev_norm(0.0).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
        // Parseval: ‖sin‖²_{L²} = π
        assert_relative_eq!(l2_norm(&sinx).powi(2), PI, epsilon = 1e-13);
    }

    #[test]
    fn sobolev_index_ranges() {
        assert!(SobolevIndex::torus(-0.1).is_err());
        assert!(SobolevIndex::torus(0.0).is_ok());
        assert!(SobolevIndex::interval(0.5).is_err());
        assert!(SobolevIndex::interval(1.0).is_ok());
        assert!(SobolevIndex::interval(2.5).is_err());
        let g = torus(16);
        let f = Field1D::zeros(g);
        assert!(sobolev_norm(&f, SobolevIndex::interval(1.0).unwrap()).is_err());
    }

    #[test]
    fn interval_h1_norm_examples() {
        let g = IntervalGrid::new(1.0, 64).unwrap();
        assert_eq!(h1_norm_interval(&Field1D::zeros(g.clone())).unwrap(), 0.0);
        let one = Field1D::constant(g, 1.0).unwrap();
        assert_relative_eq!(h1_norm_interval(&one).unwrap(), 1.0, epsilon = 1e-14);

        // ∫₀^π sin² + cos² = π; trapezoid is exact here because the
        // integrand is constant.
        let g = IntervalGrid::new(PI, 128).unwrap();
        let s = Field1D::from_fn(g, f64::sin).unwrap();
        assert_relative_eq!(h1_norm_interval(&s).unwrap(), PI.sqrt(), epsilon = 1e-6);
        assert!(sobolev_norm(&s, SobolevIndex::torus(1.0).unwrap()).is_err());
    }

    #[test]
    fn mean_examples() {
        let g = torus(32);
        assert_relative_eq!(Field1D::constant(g.clone(), 5.0).unwrap().mean().unwrap(), 5.0);
        let s7 = Field1D::from_fn(g.clone(), |x| (7.0 * x).sin()).unwrap();
        assert!(s7.mean().unwrap().abs() < 1e-15);
        let f = Field1D::from_fn(g, |x| 2.0 + x.cos()).unwrap();
        assert_relative_eq!(f.mean().unwrap(), 2.0, epsilon = 1e-15);
        let gi = IntervalGrid::new(1.0, 32).unwrap();
        assert!(mean(&Field1D::zeros(gi)).is_err());
    }
}
