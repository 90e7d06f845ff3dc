use crate::error::{BbmError, Result};
use crate::field::Field1D;

/// Boundary feedback gains: `u_tx(0) = α u(0) + u(0)²/3`, `u_tx(L) = β u(L) + u(L)²/3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl FeedbackCoefficients {
    /// Accepts dissipative gains (`α > 1/2`, `β < 1/2`) or the conservative
    /// pair `α = β = 1/2`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let c = Self::new_unrestricted(alpha, beta)?;
        if !(c.is_dissipative() || c.is_conservative()) {
            return Err(BbmError::InvalidParameter(format!(
                "feedback requires alpha > 1/2 and beta < 1/2 (or alpha = beta = 1/2), got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(c)
    }

    pub fn new_unrestricted(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(BbmError::InvalidParameter("feedback gains must be finite".into()));
        }
        Ok(Self { alpha, beta })
    }

    pub fn is_dissipative(&self) -> bool {
        self.alpha > 0.5 && self.beta < 0.5
    }

    pub fn is_conservative(&self) -> bool {
        self.alpha == 0.5 && self.beta == 0.5
    }
}

/// Quadratic `g(x) = a·x + (b − a)/(2L)·x²`, so `g_x(0) = a` and `g_x(L) = b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryLift {
    pub a_val: f64,
    pub b_val: f64,
    pub length: f64,
}

impl BoundaryLift {
    pub fn eval(&self, x: f64) -> f64 {
        self.a_val * x + (self.b_val - self.a_val) / (2.0 * self.length) * x * x
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.a_val + (self.b_val - self.a_val) / self.length * x
    }

    /// `g_xx`, constant.
    pub fn curvature(&self) -> f64 {
        (self.b_val - self.a_val) / self.length
    }
}

pub fn make_boundary_lift(u: &Field1D, coeffs: FeedbackCoefficients) -> Result<BoundaryLift> {
    lift_with(u, coeffs, true)
}

pub(crate) fn lift_with(u: &Field1D, coeffs: FeedbackCoefficients, nonlinear: bool) -> Result<BoundaryLift> {
    let grid = u.grid().as_interval()?;
    let v = u.values();
    let (u0, ul) = (v[0], v[v.len() - 1]);
    let q = if nonlinear { 1.0 / 3.0 } else { 0.0 };
    Ok(BoundaryLift {
        a_val: coeffs.alpha * u0 + q * u0 * u0,
        b_val: coeffs.beta * ul + q * ul * ul,
        length: grid.length(),
    })
}
