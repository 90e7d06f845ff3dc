//! Right-hand sides of the three damped BBM evolutions written as
//! `u_t = F(u)`, together with the operators they are built from.
//!
//! * Local damping (torus): `u_t = −(1−∂x²)⁻¹[a u + (u + u²/2)_x]`
//! * Gradient damping (torus): `u_t = −(1−∂x²)⁻¹[(u + u²/2)_x − (a u_x)_x]`
//! * Boundary feedback (interval): `u_t = −(1−∂x²)_N⁻¹(u_x + u u_x) + (1 − (1−∂x²)_N⁻¹(1−∂x²)) g`
//!   with `g` the quadratic lift of the boundary slopes.

mod boundary;
mod damping;
mod helmholtz;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BbmError, Result};
use crate::field::{
    dealias_bins, derivative_symbol, fd4_derivative, forward_bins, h1_norm_interval,
    inverse_bins, sobolev_norm, Field1D, SobolevIndex, TorusGrid,
};

pub use boundary::{make_boundary_lift, BoundaryLift, FeedbackCoefficients};
pub use damping::{bump_value, DampingKind, DampingProfile};
pub use helmholtz::{helmholtz_inverse_neumann, helmholtz_inverse_periodic, neumann_helmholtz_apply};

use helmholtz::{helmholtz_symbol, solve_neumann};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Zeroth-order localized damping `a(x) u`.
    #[serde(rename = "A")]
    LocalDamping,
    /// First-order localized damping `−(a(x) u_x)_x`.
    #[serde(rename = "B")]
    GradientDamping,
    /// Dissipative boundary feedback on `(0, L)`.
    #[serde(rename = "C")]
    BoundaryFeedback,
}

impl Variant {
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::LocalDamping => "A",
            Variant::GradientDamping => "B",
            Variant::BoundaryFeedback => "C",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RhsOptions {
    /// Two-thirds-rule filtering of quadratic products on the torus.
    pub dealias: bool,
    /// Turning this off drops `u u_x` (and the `u²/3` boundary terms), leaving the linear BBM.
    pub nonlinear: bool,
}

impl Default for RhsOptions {
    fn default() -> Self {
        Self {
            dealias: true,
            nonlinear: true,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Model {
    LocalDamping {
        damping: DampingProfile,
        options: RhsOptions,
    },
    GradientDamping {
        damping: DampingProfile,
        options: RhsOptions,
    },
    BoundaryFeedback {
        feedback: FeedbackCoefficients,
        options: RhsOptions,
    },
}

impl Model {
    pub fn local_damping(damping: DampingProfile) -> Self {
        Model::LocalDamping {
            damping,
            options: RhsOptions::default(),
        }
    }

    pub fn gradient_damping(damping: DampingProfile) -> Self {
        Model::GradientDamping {
            damping,
            options: RhsOptions::default(),
        }
    }

    pub fn boundary_feedback(feedback: FeedbackCoefficients) -> Self {
        Model::BoundaryFeedback {
            feedback,
            options: RhsOptions::default(),
        }
    }

    pub fn with_options(mut self, opts: RhsOptions) -> Self {
        match &mut self {
            Model::LocalDamping { options, .. }
            | Model::GradientDamping { options, .. }
            | Model::BoundaryFeedback { options, .. } => *options = opts,
        }
        self
    }

    pub fn options(&self) -> RhsOptions {
        match self {
            Model::LocalDamping { options, .. }
            | Model::GradientDamping { options, .. }
            | Model::BoundaryFeedback { options, .. } => *options,
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            Model::LocalDamping { .. } => Variant::LocalDamping,
            Model::GradientDamping { .. } => Variant::GradientDamping,
            Model::BoundaryFeedback { .. } => Variant::BoundaryFeedback,
        }
    }

    pub fn damping(&self) -> Option<&DampingProfile> {
        match self {
            Model::LocalDamping { damping, .. } | Model::GradientDamping { damping, .. } => {
                Some(damping)
            }
            Model::BoundaryFeedback { .. } => None,
        }
    }

    /// True when the energy identity forces `E(t)` to be nonincreasing.
    pub fn is_dissipative(&self) -> bool {
        match self {
            Model::LocalDamping { .. } | Model::GradientDamping { .. } => true,
            Model::BoundaryFeedback { feedback, .. } => {
                feedback.is_dissipative() || feedback.is_conservative()
            }
        }
    }

    pub fn rhs(&self, u: &Field1D) -> Result<Field1D> {
        match self {
            Model::LocalDamping { damping, options } => local_damping_rhs(u, damping, *options),
            Model::GradientDamping { damping, options } => {
                gradient_damping_rhs(u, damping, *options)
            }
            Model::BoundaryFeedback { feedback, options } => {
                boundary_feedback_rhs(u, *feedback, *options)
            }
        }
    }

    /// Instantaneous dissipation `D(u) = −dE/dt`:
    /// `∫ a u²`, `∫ a u_x²`, or `(α−½)u(0)² + (½−β)u(L)²`.
    pub fn dissipation_rate(&self, u: &Field1D) -> Result<f64> {
        match self {
            Model::LocalDamping { damping, .. } => {
                check_damping(u.grid().as_torus()?, damping)?;
                let density: Vec<f64> = u
                    .values()
                    .iter()
                    .zip(damping.values())
                    .map(|(v, a)| a * v * v)
                    .collect();
                Ok(u.grid().integrate(&density))
            }
            Model::GradientDamping { damping, options } => {
                let grid = u.grid().as_torus()?;
                check_damping(grid, damping)?;
                let ux = torus_gradient(grid, u, options.dealias)?;
                let density: Vec<f64> = ux
                    .iter()
                    .zip(damping.values())
                    .map(|(v, a)| a * v * v)
                    .collect();
                Ok(u.grid().integrate(&density))
            }
            Model::BoundaryFeedback { feedback, .. } => {
                u.grid().as_interval()?;
                let v = u.values();
                let (u0, ul) = (v[0], v[v.len() - 1]);
                Ok((feedback.alpha - 0.5) * u0 * u0 + (0.5 - feedback.beta) * ul * ul)
            }
        }
    }

    /// `E = ½∫(u² + u_x²) dx` (equals `π‖u‖₁²` on the torus).
    pub fn energy(&self, u: &Field1D) -> Result<f64> {
        energy(u)
    }
}

pub fn energy(u: &Field1D) -> Result<f64> {
    match u.grid() {
        crate::field::Grid::Torus(_) => {
            let h1 = sobolev_norm(u, SobolevIndex::torus(1.0)?)?;
            Ok(std::f64::consts::PI * h1 * h1)
        }
        crate::field::Grid::Interval(_) => Ok(0.5 * h1_norm_interval(u)?.powi(2)),
    }
}

fn check_damping(grid: &TorusGrid, damping: &DampingProfile) -> Result<()> {
    if damping.values().len() != grid.n_points() {
        return Err(BbmError::GridMismatch(format!(
            "damping profile has {} nodes, field has {}",
            damping.values().len(),
            grid.n_points()
        )));
    }
    Ok(())
}

/// Fourier coefficients of `u²` (dealiased: `P[(Pu)²]`).
fn square_bins(grid: &TorusGrid, u: &Field1D, c: &[Complex64], dealias: bool) -> Vec<Complex64> {
    if dealias {
        let cutoff = grid.dealias_cutoff();
        let mut filtered = c.to_vec();
        dealias_bins(&mut filtered, cutoff);
        let uf = inverse_bins(grid, filtered);
        let sq: Vec<f64> = uf.iter().map(|v| v * v).collect();
        let mut w = forward_bins(grid, &sq);
        dealias_bins(&mut w, cutoff);
        w
    } else {
        let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
        forward_bins(grid, &sq)
    }
}

/// Nodal `u_x`, filtered to `|n| <= N/3` when dealiasing.
fn torus_gradient(grid: &TorusGrid, u: &Field1D, dealias: bool) -> Result<Vec<f64>> {
    let n = grid.n_points();
    let mut bins: Vec<Complex64> = u
        .spectrum()?
        .bins()
        .iter()
        .enumerate()
        .map(|(k, c)| c * derivative_symbol(k, n))
        .collect();
    if dealias {
        dealias_bins(&mut bins, grid.dealias_cutoff());
    }
    Ok(inverse_bins(grid, bins))
}

fn local_damping_rhs(u: &Field1D, damping: &DampingProfile, opts: RhsOptions) -> Result<Field1D> {
    let grid = u.grid().as_torus()?;
    check_damping(grid, damping)?;
    let n = grid.n_points();
    let c = u.spectrum()?.bins();
    let sq = opts
        .nonlinear
        .then(|| square_bins(grid, u, c, opts.dealias));
    let au: Vec<f64> = u
        .values()
        .iter()
        .zip(damping.values())
        .map(|(v, a)| a * v)
        .collect();
    let ca = forward_bins(grid, &au);
    let bins = (0..n)
        .map(|k| {
            let flux = c[k] + sq.as_ref().map_or(Complex64::new(0.0, 0.0), |w| 0.5 * w[k]);
            -(ca[k] + derivative_symbol(k, n) * flux) * helmholtz_symbol(k, n)
        })
        .collect();
    u.with_values(inverse_bins(grid, bins))
}

fn gradient_damping_rhs(u: &Field1D, damping: &DampingProfile, opts: RhsOptions) -> Result<Field1D> {
    let grid = u.grid().as_torus()?;
    check_damping(grid, damping)?;
    let n = grid.n_points();
    let c = u.spectrum()?.bins();
    let sq = opts
        .nonlinear
        .then(|| square_bins(grid, u, c, opts.dealias));
    let ux = torus_gradient(grid, u, opts.dealias)?;
    let flux: Vec<f64> = ux.iter().zip(damping.values()).map(|(v, a)| a * v).collect();
    let mut cf = forward_bins(grid, &flux);
    if opts.dealias {
        dealias_bins(&mut cf, grid.dealias_cutoff());
    }
    let bins = (0..n)
        .map(|k| {
            let nl = sq.as_ref().map_or(Complex64::new(0.0, 0.0), |w| 0.5 * w[k]);
            -derivative_symbol(k, n) * (c[k] + nl - cf[k]) * helmholtz_symbol(k, n)
        })
        .collect();
    u.with_values(inverse_bins(grid, bins))
}

fn boundary_feedback_rhs(u: &Field1D, coeffs: FeedbackCoefficients, opts: RhsOptions) -> Result<Field1D> {
    let grid = u.grid().as_interval()?;
    let lift = boundary::lift_with(u, coeffs, opts.nonlinear)?;
    let ux = fd4_derivative(u.values(), grid.spacing());
    let nodes = grid.nodes();
    let gxx = lift.curvature();
    // v = g − N⁻¹(u_x + u u_x + g − g_xx)
    let forcing: Vec<f64> = u
        .values()
        .iter()
        .zip(&ux)
        .zip(&nodes)
        .map(|((&v, &vx), &x)| {
            let nl = if opts.nonlinear { v * vx } else { 0.0 };
            vx + nl + lift.eval(x) - gxx
        })
        .collect();
    let w = solve_neumann(&forcing, grid.spacing());
    let v = nodes
        .iter()
        .zip(&w)
        .map(|(&x, wj)| lift.eval(x) - wj)
        .collect();
    u.with_values(v)
}

pub fn rhs_variant_a(u: &Field1D, a: &DampingProfile) -> Result<Field1D> {
    local_damping_rhs(u, a, RhsOptions::default())
}

pub fn rhs_variant_b(u: &Field1D, a: &DampingProfile) -> Result<Field1D> {
    gradient_damping_rhs(u, a, RhsOptions::default())
}

pub fn rhs_variant_c(u: &Field1D, coeffs: FeedbackCoefficients) -> Result<Field1D> {
    boundary_feedback_rhs(u, coeffs, RhsOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{derivative, mean, IntervalGrid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn max_diff(f: &Field1D, g: impl Fn(f64) -> f64) -> f64 {
        f.grid()
            .nodes()
            .iter()
            .zip(f.values())
            .fold(0.0, |m, (x, v)| m.max((v - g(*x)).abs()))
    }

    fn random_torus_field(g: &TorusGrid, seed: u64, amp: f64) -> Field1D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<(f64, f64)> = (0..6)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field1D::from_fn(g.clone(), |x| {
            amp * c
                .iter()
                .enumerate()
                .map(|(n, (a, b))| a * (n as f64 * x).cos() + b * (n as f64 * x).sin())
                .sum::<f64>()
        })
        .unwrap()
    }

    #[test]
    fn variant_a_examples() {
        let g = TorusGrid::new(64).unwrap();
        let c = Field1D::constant(g.clone(), 0.7).unwrap();
        let r = rhs_variant_a(&c, &DampingProfile::none(&g)).unwrap();
        assert!(r.max_abs() < 1e-14);

        // a ≡ 1, u = cos x: −[cos x/2 − sin x/2 − sin(2x)/10]
        let u = Field1D::from_fn(g.clone(), f64::cos).unwrap();
        let one = DampingProfile::constant(&g, 1.0).unwrap();
        let r = rhs_variant_a(&u, &one).unwrap();
        let err = max_diff(&r, |x| -(x.cos() / 2.0 - x.sin() / 2.0 - (2.0 * x).sin() / 10.0));
        assert!(err < 1e-14, "err {err}");
    }

    #[test]
    fn variant_b_examples() {
        let g = TorusGrid::new(64).unwrap();
        let bump = DampingProfile::bump(&g, 1.0, 1.0, 3.0).unwrap();
        let c = Field1D::constant(g.clone(), -1.2).unwrap();
        assert!(rhs_variant_b(&c, &bump).unwrap().max_abs() < 1e-14);

        // a ≡ 1, u = cos x: bracket = −sin x − sin(2x)/2 + cos x, so
        // F = sin x/2 + sin(2x)/10 − cos x/2.
        let u = Field1D::from_fn(g.clone(), f64::cos).unwrap();
        let one = DampingProfile::constant(&g, 1.0).unwrap();
        let r = rhs_variant_b(&u, &one).unwrap();
        let err = max_diff(&r, |x| x.sin() / 2.0 + (2.0 * x).sin() / 10.0 - x.cos() / 2.0);
        assert!(err < 1e-14, "err {err}");
    }

    #[test]
    fn variant_c_zero_and_constant() {
        let l = 2.0;
        let k = FeedbackCoefficients::new(1.0, 0.0).unwrap();
        let g = IntervalGrid::new(l, 64).unwrap();
        assert!(rhs_variant_c(&Field1D::zeros(g.clone()), k).unwrap().max_abs() < 1e-15);

        // u ≡ c: v = (−a cosh(L−x) + b cosh x)/sinh L
        let c = 0.8;
        let (a, b) = (k.alpha * c + c * c / 3.0, k.beta * c + c * c / 3.0);
        let exact = |x: f64| (-a * (l - x).cosh() + b * x.cosh()) / l.sinh();
        let err = |m: usize| {
            let g = IntervalGrid::new(l, m).unwrap();
            let u = Field1D::constant(g, c).unwrap();
            max_diff(&rhs_variant_c(&u, k).unwrap(), exact)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 < 1e-3);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn variant_c_satisfies_boundary_slopes() {
        let l = 3.0;
        let k = FeedbackCoefficients::new(0.9, -0.4).unwrap();
        let err = |m: usize| {
            let g = IntervalGrid::new(l, m).unwrap();
            let u = Field1D::from_fn(g, |x| 0.3 + 0.5 * (1.3 * x).sin() - 0.2 * (x / l).powi(2)).unwrap();
            let lift = make_boundary_lift(&u, k).unwrap();
            let v = rhs_variant_c(&u, k).unwrap();
            let vx = derivative(&v).unwrap();
            let last = vx.values().len() - 1;
            (vx.values()[0] - lift.a_val)
                .abs()
                .max((vx.values()[last] - lift.b_val).abs())
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 < 1e-2, "e1 {e1}");
        assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn dissipation_rate_examples() {
        let g = TorusGrid::new(64).unwrap();
        let one = DampingProfile::constant(&g, 1.0).unwrap();
        let model = Model::local_damping(one.clone());
        assert_eq!(model.dissipation_rate(&Field1D::zeros(g.clone())).unwrap(), 0.0);
        let s = Field1D::from_fn(g.clone(), f64::sin).unwrap();
        assert!((model.dissipation_rate(&s).unwrap() - PI).abs() < 1e-13);
        // ∫ cos² = π as well for the gradient variant
        let mb = Model::gradient_damping(one);
        assert!((mb.dissipation_rate(&s).unwrap() - PI).abs() < 1e-13);

        let gi = IntervalGrid::new(1.0, 32).unwrap();
        let mc = Model::boundary_feedback(FeedbackCoefficients::new(1.0, 0.0).unwrap());
        let two = Field1D::constant(gi, 2.0).unwrap();
        assert!((mc.dissipation_rate(&two).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn energy_matches_quadrature() {
        let g = TorusGrid::new(64).unwrap();
        let u = random_torus_field(&g, 1, 0.4);
        let ux = derivative(&u).unwrap();
        let density: Vec<f64> = u.values().iter().zip(ux.values()).map(|(a, b)| a * a + b * b).collect();
        let quad = 0.5 * u.grid().integrate(&density);
        assert!((energy(&u).unwrap() - quad).abs() < 1e-12 * quad);
    }

    #[test]
    fn rejects_wrong_domain() {
        let g = TorusGrid::new(32).unwrap();
        let gi = IntervalGrid::new(1.0, 32).unwrap();
        let a = DampingProfile::none(&g);
        assert!(rhs_variant_a(&Field1D::zeros(gi.clone()), &a).is_err());
        let k = FeedbackCoefficients::new(1.0, 0.0).unwrap();
        assert!(rhs_variant_c(&Field1D::zeros(g.clone()), k).is_err());
        let other = DampingProfile::none(&TorusGrid::new(64).unwrap());
        assert!(rhs_variant_a(&Field1D::zeros(g), &other).is_err());
    }

    /// Semi-discrete energy identity: `dE/dt = −D` holds exactly for the
    /// torus variants, since dE/dt = 2π Σ (1+n²) Re(conj(c_n) ċ_n).
    fn energy_rate(u: &Field1D, f: &Field1D) -> f64 {
        let cu = u.spectrum().unwrap();
        let cf = f.spectrum().unwrap();
        let n = cu.n_points();
        (0..n)
            .map(|k| {
                let w = crate::field::wavenumber(k, n) as f64;
                2.0 * PI * (1.0 + w * w) * (cu.bins()[k].conj() * cf.bins()[k]).re
            })
            .sum()
    }

    proptest! {
        #[test]
        fn variant_b_has_zero_mean(seed in 0u64..1000) {
            let g = TorusGrid::new(64).unwrap();
            let u = random_torus_field(&g, seed, 0.5);
            let a = DampingProfile::bump(&g, 2.0, 1.5, 2.0).unwrap();
            let r = rhs_variant_b(&u, &a).unwrap();
            let h1 = u.sobolev_norm(1.0).unwrap();
            prop_assert!(mean(&r).unwrap().abs() <= 1e-13 * (1.0 + h1 * h1));
        }

        #[test]
        fn torus_energy_identity_is_exact(seed in 0u64..1000, gradient in any::<bool>()) {
            let g = TorusGrid::new(64).unwrap();
            let u = random_torus_field(&g, seed, 0.5);
            let a = DampingProfile::bump(&g, 2.0, 1.5, 2.0).unwrap();
            let model = if gradient { Model::gradient_damping(a) } else { Model::local_damping(a) };
            let f = model.rhs(&u).unwrap();
            let d = model.dissipation_rate(&u).unwrap();
            let rate = energy_rate(&u, &f);
            prop_assert!((rate + d).abs() <= 1e-12 * (1.0 + d));
        }
    }
}
