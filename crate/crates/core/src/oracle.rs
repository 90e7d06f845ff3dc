//! Low-order reference discretization used to cross-check the production
//! operators and integrators.
//!
//! Everything here works on plain nodal vectors with second-order finite
//! differences, dense LU solves and explicit midpoint steps. It deliberately
//! does not call into `field`, `operators` or `timestep`.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use thiserror::Error;

pub const MAX_ORACLE_POINTS: usize = 513;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle grid of {n} points exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("oracle grid needs at least {min} points, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("expected {expected} nodal values, found {found}")]
    Length { expected: usize, found: usize },
    #[error("Helmholtz matrix is singular")]
    Singular,
    #[error("non-finite oracle state at t = {t}")]
    Instability { t: f64 },
    #[error("invalid oracle parameter: {0}")]
    InvalidParameter(String),
}

type OResult<T> = std::result::Result<T, OracleError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Closure {
    Periodic,
    /// Ghost-point Neumann closure with boundary rows halved.
    Neumann,
}

/// `I − D²` with the three-point stencil, factorized once.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    closure: Closure,
    h: f64,
}

impl DenseOperator {
    pub fn periodic(n: usize, h: f64) -> OResult<Self> {
        let mut m = DMatrix::zeros(n, n);
        let (d, o) = (1.0 + 2.0 / (h * h), -1.0 / (h * h));
        for i in 0..n {
            m[(i, i)] = d;
            m[(i, (i + 1) % n)] += o;
            m[(i, (i + n - 1) % n)] += o;
        }
        Self::factor(m, Closure::Periodic, h)
    }

    pub fn neumann(n: usize, h: f64) -> OResult<Self> {
        let mut m = DMatrix::zeros(n, n);
        let (d, o) = (1.0 + 2.0 / (h * h), -1.0 / (h * h));
        for i in 0..n {
            m[(i, i)] = d;
            if i > 0 {
                m[(i, i - 1)] = o;
            }
            if i + 1 < n {
                m[(i, i + 1)] = o;
            }
        }
        m[(0, 0)] = 0.5 * d;
        m[(n - 1, n - 1)] = 0.5 * d;
        Self::factor(m, Closure::Neumann, h)
    }

    fn factor(matrix: DMatrix<f64>, closure: Closure, h: f64) -> OResult<Self> {
        let lu = matrix.clone().lu();
        if !lu.is_invertible() {
            return Err(OracleError::Singular);
        }
        Ok(Self {
            matrix,
            lu,
            closure,
            h,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.matrix.transpose()
    }

    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        self.matrix.row_iter().enumerate().all(|(i, row)| {
            let off: f64 = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.abs()).sum();
            row[i].abs() > off
        })
    }

    /// Solves `(1 − ∂²)v = f` with `v_x(0) = a`, `v_x(L) = b` for the
    /// Neumann closure (ignored when periodic).
    pub fn solve(&self, f: &[f64], slopes: (f64, f64)) -> OResult<Vec<f64>> {
        let n = self.matrix.nrows();
        if f.len() != n {
            return Err(OracleError::Length {
                expected: n,
                found: f.len(),
            });
        }
        let mut rhs = DVector::from_column_slice(f);
        if self.closure == Closure::Neumann {
            // ghost values v₋₁ = v₁ − 2ha, v_{n} = v_{n−2} + 2hb
            rhs[0] = 0.5 * f[0] - slopes.0 / self.h;
            rhs[n - 1] = 0.5 * f[n - 1] + slopes.1 / self.h;
        }
        let v = self.lu.solve(&rhs).ok_or(OracleError::Singular)?;
        Ok(v.iter().copied().collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleVariant {
    /// Nodal samples of `a(x)` on the periodic grid.
    LocalDamping(Vec<f64>),
    GradientDamping(Vec<f64>),
    BoundaryFeedback { alpha: f64, beta: f64 },
}

#[derive(Clone, Debug)]
pub struct OracleProblem {
    pub variant: OracleVariant,
    pub nonlinear: bool,
    op: DenseOperator,
    h: f64,
    n: usize,
}

impl OracleProblem {
    /// `n` nodes `x_j = 2πj/n` on the torus.
    pub fn periodic(n: usize, variant: OracleVariant, nonlinear: bool) -> OResult<Self> {
        check_size(n)?;
        let a = match &variant {
            OracleVariant::LocalDamping(a) | OracleVariant::GradientDamping(a) => a,
            OracleVariant::BoundaryFeedback { .. } => {
                return Err(OracleError::InvalidParameter(
                    "boundary feedback lives on an interval".into(),
                ))
            }
        };
        if a.len() != n {
            return Err(OracleError::Length {
                expected: n,
                found: a.len(),
            });
        }
        let h = 2.0 * std::f64::consts::PI / n as f64;
        Ok(Self {
            variant,
            nonlinear,
            op: DenseOperator::periodic(n, h)?,
            h,
            n,
        })
    }

    /// `cells + 1` nodes `x_j = jL/cells` on `[0, L]`.
    pub fn interval(length: f64, cells: usize, alpha: f64, beta: f64, nonlinear: bool) -> OResult<Self> {
        let n = cells + 1;
        check_size(n)?;
        if !(length > 0.0) {
            return Err(OracleError::InvalidParameter("length must be positive".into()));
        }
        let h = length / cells as f64;
        Ok(Self {
            variant: OracleVariant::BoundaryFeedback { alpha, beta },
            nonlinear,
            op: DenseOperator::neumann(n, h)?,
            h,
            n,
        })
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// `½ Σ h (u_j² + (forward difference)²)`, with trapezoid end weights on the interval.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let h = self.h;
        match self.variant {
            OracleVariant::BoundaryFeedback { .. } => {
                let n = u.len();
                let mass: f64 = u.iter().map(|v| v * v).sum::<f64>() - 0.5 * (u[0] * u[0] + u[n - 1] * u[n - 1]);
                let grad: f64 = u.windows(2).map(|w| ((w[1] - w[0]) / h).powi(2)).sum();
                0.5 * h * (mass + grad)
            }
            _ => {
                let n = u.len();
                (0..n)
                    .map(|j| u[j] * u[j] + ((u[(j + 1) % n] - u[j]) / h).powi(2))
                    .sum::<f64>()
                    * 0.5
                    * h
            }
        }
    }
}

fn check_size(n: usize) -> OResult<()> {
    if n > MAX_ORACLE_POINTS {
        return Err(OracleError::TooLarge {
            n,
            limit: MAX_ORACLE_POINTS,
        });
    }
    if n < 8 {
        return Err(OracleError::TooSmall { n, min: 8 });
    }
    Ok(())
}

fn periodic_dx(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n).map(|j| (u[(j + 1) % n] - u[(j + n - 1) % n]) / (2.0 * h)).collect()
}

/// Centered differences inside, second-order one-sided at the ends.
fn interval_dx(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|j| {
            if j == 0 {
                (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
            } else {
                (u[j + 1] - u[j - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// `u_x + u u_x` on the torus, the quadratic part in skew form
/// `(D(u²) + u·Du)/3` so the semi-discrete flow conserves the FD energy.
fn periodic_flux_derivative(u: &[f64], h: f64, nonlinear: bool) -> Vec<f64> {
    let du = periodic_dx(u, h);
    if !nonlinear {
        return du;
    }
    let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
    let dsq = periodic_dx(&sq, h);
    (0..u.len())
        .map(|j| du[j] + (dsq[j] + u[j] * du[j]) / 3.0)
        .collect()
}

pub fn oracle_rhs(problem: &OracleProblem, u: &[f64]) -> OResult<Vec<f64>> {
    let n = problem.n;
    let h = problem.h;
    if u.len() != n {
        return Err(OracleError::Length {
            expected: n,
            found: u.len(),
        });
    }
    match &problem.variant {
        OracleVariant::LocalDamping(a) => {
            let flux = periodic_flux_derivative(u, h, problem.nonlinear);
            let f: Vec<f64> = (0..n).map(|j| a[j] * u[j] + flux[j]).collect();
            let v = problem.op.solve(&f, (0.0, 0.0))?;
            Ok(v.into_iter().map(|x| -x).collect())
        }
        OracleVariant::GradientDamping(a) => {
            let flux = periodic_flux_derivative(u, h, problem.nonlinear);
            // (a u_x)_x in conservative form with averaged midpoint coefficients
            let div = |j: usize| {
                let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
                let ap = 0.5 * (a[j] + a[jp]);
                let am = 0.5 * (a[j] + a[jm]);
                (ap * (u[jp] - u[j]) - am * (u[j] - u[jm])) / (h * h)
            };
            let f: Vec<f64> = (0..n).map(|j| flux[j] - div(j)).collect();
            let v = problem.op.solve(&f, (0.0, 0.0))?;
            Ok(v.into_iter().map(|x| -x).collect())
        }
        OracleVariant::BoundaryFeedback { alpha, beta } => {
            let du = interval_dx(u, h);
            let q = if problem.nonlinear { 1.0 } else { 0.0 };
            let f: Vec<f64> = (0..n).map(|j| -du[j] - q * u[j] * du[j]).collect();
            let (u0, ul) = (u[0], u[n - 1]);
            let a = alpha * u0 + q * u0 * u0 / 3.0;
            let b = beta * ul + q * ul * ul / 3.0;
            problem.op.solve(&f, (a, b))
        }
    }
}

/// Explicit midpoint steps of `oracle_rhs` up to `horizon`; the last step
/// is shortened to land on it.
pub fn oracle_integrate(problem: &OracleProblem, u0: &[f64], horizon: f64, dt: f64) -> OResult<Vec<f64>> {
    if !(dt > 0.0 && horizon >= 0.0) {
        return Err(OracleError::InvalidParameter(format!(
            "need dt > 0 and horizon >= 0, got dt={dt}, horizon={horizon}"
        )));
    }
    let steps = (horizon / dt - 1e-9).ceil().max(0.0) as usize;
    let step = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let mut u = u0.to_vec();
    for k in 0..steps {
        let f = oracle_rhs(problem, &u)?;
        let half: Vec<f64> = u.iter().zip(&f).map(|(v, d)| v + 0.5 * step * d).collect();
        let g = oracle_rhs(problem, &half)?;
        for (v, d) in u.iter_mut().zip(&g) {
            *v += step * d;
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::Instability {
                t: (k + 1) as f64 * step,
            });
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn nodes(n: usize) -> Vec<f64> {
        (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
    }

    #[test]
    fn dense_operator_structure() {
        for op in [DenseOperator::periodic(32, 0.2).unwrap(), DenseOperator::neumann(33, 0.1).unwrap()] {
            assert!(op.is_symmetric());
            assert!(op.is_strictly_diagonally_dominant());
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let n = 32;
        let a: Vec<f64> = nodes(n).iter().map(|x| x.sin().powi(2)).collect();
        for v in [OracleVariant::LocalDamping(a.clone()), OracleVariant::GradientDamping(a)] {
            let p = OracleProblem::periodic(n, v, true).unwrap();
            assert!(oracle_rhs(&p, &vec![0.0; n]).unwrap().iter().all(|&x| x == 0.0));
            assert!(oracle_integrate(&p, &vec![0.0; n], 1.0, 0.1).unwrap().iter().all(|&x| x == 0.0));
        }
        let p = OracleProblem::interval(2.0, 32, 1.0, 0.0, true).unwrap();
        assert!(oracle_rhs(&p, &vec![0.0; 33]).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_data_on_interval_matches_cosh_form() {
        // u ≡ c: f = 0, v'' = v with v'(0) = a, v'(L) = b
        let (len, c, alpha, beta) = (2.0_f64, 0.7_f64, 1.0, 0.0);
        let a = alpha * c + c * c / 3.0;
        let b = beta * c + c * c / 3.0;
        let exact = |x: f64| (b * x.cosh() - a * (len - x).cosh()) / len.sinh();
        let err = |cells: usize| {
            let p = OracleProblem::interval(len, cells, alpha, beta, true).unwrap();
            let v = oracle_rhs(&p, &vec![c; cells + 1]).unwrap();
            v.iter()
                .enumerate()
                .map(|(j, vj)| (vj - exact(j as f64 * len / cells as f64)).abs())
                .fold(0.0_f64, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 1e-2);
        assert!((e1 / e2 - 4.0).abs() < 0.3, "{e1} {e2}");
    }

    #[test]
    fn size_guards() {
        let big = vec![0.0; 600];
        assert!(matches!(
            OracleProblem::periodic(600, OracleVariant::LocalDamping(big), true),
            Err(OracleError::TooLarge { .. })
        ));
        let p = OracleProblem::periodic(16, OracleVariant::LocalDamping(vec![0.0; 16]), true).unwrap();
        assert!(matches!(oracle_rhs(&p, &[0.0; 8]), Err(OracleError::Length { .. })));
    }

    #[test]
    fn skew_form_conserves_the_semidiscrete_energy() {
        let n = 64;
        let p = OracleProblem::periodic(n, OracleVariant::LocalDamping(vec![0.0; n]), true).unwrap();
        let u: Vec<f64> = nodes(n).iter().map(|x| 0.5 * x.cos() + 0.3 * (2.0 * x).sin()).collect();
        let f = oracle_rhs(&p, &u).unwrap();
        // dE/dt = h Σ u·(I − D⁺D⁻)u_t
        let h = p.spacing();
        let m = p.operator().matrix();
        let mf = m * DVector::from_column_slice(&f);
        let rate: f64 = h * u.iter().zip(mf.iter()).map(|(a, b)| a * b).sum::<f64>();
        assert!(rate.abs() < 1e-12, "{rate}");
    }

    #[test]
    fn midpoint_energy_drift_is_second_order() {
        let n = 64;
        let p = OracleProblem::periodic(n, OracleVariant::LocalDamping(vec![0.0; n]), true).unwrap();
        let u0: Vec<f64> = nodes(n).iter().map(|x| 0.5 * x.cos()).collect();
        let e0 = p.energy(&u0);
        let drift = |dt: f64| (p.energy(&oracle_integrate(&p, &u0, 2.0, dt).unwrap()) - e0).abs();
        let (d1, d2, d3) = (drift(0.04), drift(0.02), drift(0.01));
        for r in [d1 / d2, d2 / d3] {
            assert!((3.5..=5.5).contains(&r), "{d1:e} {d2:e} {d3:e}");
        }
    }
}
