//! Inverses of `1 − ∂x²`: diagonal in Fourier space on the torus, a
//! symmetric tridiagonal solve with ghost-point Neumann closure on the
//! interval.

use crate::error::Result;
use crate::field::{wavenumber, Field1D, Spectrum};

/// `v̂_n = f̂_n / (1 + n²)`.
pub fn helmholtz_inverse_periodic(f: &Field1D) -> Result<Field1D> {
    let spec = f.spectrum()?;
    Ok(helmholtz_inverse_spectrum(spec).to_field())
}

pub(crate) fn helmholtz_inverse_spectrum(spec: &Spectrum) -> Spectrum {
    spec.map_modes(|n, c| c / (1.0 + (n * n) as f64))
}

pub(crate) fn helmholtz_symbol(k: usize, n: usize) -> f64 {
    let w = wavenumber(k, n) as f64;
    1.0 / (1.0 + w * w)
}

/// Solves `(1 − ∂x²) w = f` on `[0, L]` with `w_x(0) = w_x(L) = 0`.
///
/// Second-order differences; the ghost values `w_{-1} = w_1`,
/// `w_{M+1} = w_{M-1}` close the system. Boundary rows are halved so the
/// matrix is symmetric positive definite.
pub fn helmholtz_inverse_neumann(f: &Field1D) -> Result<Field1D> {
    let grid = f.grid().as_interval()?;
    let w = solve_neumann(f.values(), grid.spacing());
    f.with_values(w)
}

pub(crate) fn solve_neumann(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let m = n - 1;
    let ih2 = 1.0 / (h * h);
    let mut diag = vec![1.0 + 2.0 * ih2; n];
    diag[0] = 0.5 + ih2;
    diag[m] = 0.5 + ih2;
    let off = vec![-ih2; n - 1];
    let mut rhs = f.to_vec();
    rhs[0] *= 0.5;
    rhs[m] *= 0.5;
    solve_symmetric_tridiagonal(&diag, &off, rhs)
}

/// Applies the discrete Neumann operator used by [`helmholtz_inverse_neumann`]
/// (unscaled rows).
pub fn neumann_helmholtz_apply(w: &Field1D) -> Result<Field1D> {
    let grid = w.grid().as_interval()?;
    let v = w.values();
    let m = v.len() - 1;
    let ih2 = 1.0 / grid.spacing().powi(2);
    let mut out = vec![0.0; v.len()];
    out[0] = v[0] - 2.0 * ih2 * (v[1] - v[0]);
    out[m] = v[m] - 2.0 * ih2 * (v[m - 1] - v[m]);
    for j in 1..m {
        out[j] = v[j] - ih2 * (v[j - 1] - 2.0 * v[j] + v[j + 1]);
    }
    w.with_values(out)
}

/// Thomas elimination for a symmetric, diagonally dominant tridiagonal system.
/// `off[i]` couples unknowns `i` and `i+1`.
pub(crate) fn solve_symmetric_tridiagonal(diag: &[f64], off: &[f64], mut rhs: Vec<f64>) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    rhs
}
