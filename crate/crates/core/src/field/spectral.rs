//! Discrete Fourier representation of torus fields.
//!
//! Coefficients are stored in FFT bin order and normalized so that
//! `c_n ≈ (2π)⁻¹ ∫ f e^{-inx} dx`. The Nyquist bin `n = N/2` is a single
//! real coefficient; `coeff(±N/2)` both return it.

use rustfft::num_complex::Complex64;

use super::{Field1D, TorusGrid};
use crate::error::Result;

/// Signed wavenumber of FFT bin `k` on an `n`-point grid (Nyquist maps to `+n/2`).
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Symbol of `∂x`; zero on the Nyquist bin so derivatives of real fields stay real.
pub(crate) fn derivative_symbol(k: usize, n: usize) -> Complex64 {
    if 2 * k == n {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, wavenumber(k, n) as f64)
    }
}

pub(crate) fn forward_bins(grid: &TorusGrid, values: &[f64]) -> Vec<Complex64> {
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_forward().process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    buf
}

pub(crate) fn inverse_bins(grid: &TorusGrid, mut bins: Vec<Complex64>) -> Vec<f64> {
    grid.fft_inverse().process(&mut bins);
    bins.into_iter().map(|c| c.re).collect()
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: TorusGrid,
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub(crate) fn from_values(grid: &TorusGrid, values: &[f64]) -> Self {
        Self {
            grid: grid.clone(),
            bins: forward_bins(grid, values),
        }
    }

    pub(crate) fn from_bins(grid: &TorusGrid, bins: Vec<Complex64>) -> Self {
        debug_assert_eq!(bins.len(), grid.n_points());
        Self {
            grid: grid.clone(),
            bins,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn n_points(&self) -> usize {
        self.bins.len()
    }

    pub fn max_wavenumber(&self) -> usize {
        self.bins.len() / 2
    }

    /// Coefficients in FFT bin order.
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    /// Coefficient of `e^{inx}` for `|n| <= N/2`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let len = self.bins.len() as i64;
        assert!(n.abs() <= len / 2, "wavenumber {n} not resolved on {len} points");
        self.bins[n.rem_euclid(len) as usize]
    }

    /// Apply a per-mode multiplier `(n, c_n) -> c'_n`.
    pub fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Spectrum {
        let n = self.bins.len();
        let bins = self
            .bins
            .iter()
            .enumerate()
            .map(|(k, &c)| f(wavenumber(k, n), c))
            .collect();
        Spectrum::from_bins(&self.grid, bins)
    }

    /// Back to nodal values (real part of the inverse transform).
    pub fn to_field(&self) -> Field1D {
        let values = inverse_bins(&self.grid, self.bins.clone());
        Field1D::new(self.grid.clone(), values)
            .expect("inverse transform of finite coefficients is finite")
    }
}

pub fn to_spectral(f: &Field1D) -> Result<Spectrum> {
    f.spectrum().cloned()
}

/// Two-thirds rule: zero every mode with `|n| > N/3`.
pub fn dealias(spec: &Spectrum) -> Spectrum {
    let cutoff = spec.grid().dealias_cutoff() as i64;
    spec.map_modes(|n, c| if n.abs() > cutoff { Complex64::new(0.0, 0.0) } else { c })
}

pub(crate) fn dealias_bins(bins: &mut [Complex64], cutoff: usize) {
    let n = bins.len();
    for (k, c) in bins.iter_mut().enumerate() {
        if wavenumber(k, n).unsigned_abs() as usize > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}
