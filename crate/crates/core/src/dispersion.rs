//! The dispersion function `lambda(z) = 1 + z integral K(mu) / (mu - z) dmu`.
//!
//! Off the real axis it is a plain Cauchy transform of the even kernel. On the
//! positive half-axis its upper boundary value is
//! `lambda+(mu) = lambda_PV(mu) + i pi mu K(mu)`, whose argument
//! `theta in [0, pi]` and the shifted phase `xi = theta - pi` drive the
//! factorization.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moments::DispersionKernel;
use crate::quadrature::{integrate, integrate_cauchy, integrate_principal_value, QuadratureConfig};

pub type ComplexValue = Complex64;

/// One point of the boundary phase curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub mu: f64,
    pub theta: f64,
    pub xi: f64,
    pub lambda_plus: ComplexValue,
}

/// Kernel integrals run one unit past the truncation radius so the boundary
/// phase can be evaluated at the radius itself.
fn kernel_extent(cfg: &QuadratureConfig) -> f64 {
    cfg.truncation_radius + 1.0
}

/// `lambda(z)` for `Im z != 0`.
pub fn lambda_offaxis<K: DispersionKernel + ?Sized>(
    z: ComplexValue,
    kernel: &K,
    cfg: &QuadratureConfig,
) -> Result<ComplexValue> {
    if z.im == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Precondition(format!(
            "lambda_offaxis needs Im z != 0 (got {z}); use lambda_boundary on the real axis"
        )));
    }
    let extent = kernel_extent(cfg);
    // Folding the even kernel: integral_R K/(mu - z) = C(z) - C(-z), C(w) = integral_0 K/(t - w).
    let forward = integrate_cauchy(|t| kernel.density(t), z, 0.0, extent, cfg)?;
    let backward = integrate_cauchy(|t| kernel.density(t), -z, 0.0, extent, cfg)?;
    Ok(1.0 + z * (forward.value - backward.value))
}

struct BoundaryParts {
    /// `PV integral_0 K [1/(t - mu) - 1/(t + mu)] dt`.
    folded: f64,
    re: f64,
    im: f64,
}

fn boundary_parts<K: DispersionKernel + ?Sized>(
    mu: f64,
    kernel: &K,
    cfg: &QuadratureConfig,
) -> Result<BoundaryParts> {
    let upper = kernel_extent(cfg).max(2.0 * mu);
    let pv = integrate_principal_value(|t| kernel.density(t), mu, 0.0, upper, cfg)?;
    let reg = integrate(|t| kernel.density(t) / (t + mu), 0.0, upper, cfg)?;
    let folded = pv.value - reg.value;
    let im = PI * mu * kernel.density(mu);
    if im < 0.0 {
        return Err(Error::BranchViolation { mu, imaginary: im });
    }
    Ok(BoundaryParts {
        folded,
        re: 1.0 + mu * folded,
        im,
    })
}

fn sample_from(mu: f64, parts: &BoundaryParts) -> PhaseSample {
    let theta = parts.im.atan2(parts.re);
    PhaseSample {
        mu,
        theta,
        xi: theta - PI,
        lambda_plus: Complex64::new(parts.re, parts.im),
    }
}

/// Boundary value `lambda+(mu)` and its phase, `mu > 0`.
pub fn lambda_boundary<K: DispersionKernel + ?Sized>(
    mu: f64,
    kernel: &K,
    cfg: &QuadratureConfig,
) -> Result<PhaseSample> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Precondition(format!(
            "lambda_boundary needs mu > 0 (got {mu})"
        )));
    }
    Ok(sample_from(mu, &boundary_parts(mu, kernel, cfg)?))
}

/// Phase sample together with `d theta / d mu`, for `mu >= 0`.
///
/// The slope comes from differentiating the principal-value integral under
/// the sign: `d/dmu PV integral K(t)/(t - mu) = PV integral K'(t)/(t - mu)`.
pub(crate) fn phase_with_slope<K: DispersionKernel + ?Sized>(
    mu: f64,
    kernel: &K,
    cfg: &QuadratureConfig,
) -> Result<(PhaseSample, f64)> {
    if mu == 0.0 {
        let sample = PhaseSample {
            mu,
            theta: 0.0,
            xi: -PI,
            lambda_plus: Complex64::new(1.0, 0.0),
        };
        return Ok((sample, PI * kernel.density(0.0)));
    }
    let parts = boundary_parts(mu, kernel, cfg)?;
    let upper = kernel_extent(cfg).max(2.0 * mu);
    let pv = integrate_principal_value(|t| kernel.slope(t), mu, 0.0, upper, cfg)?;
    let reg = integrate(|t| kernel.slope(t) / (t + mu), 0.0, upper, cfg)?;
    let re_slope = parts.folded + mu * (pv.value + reg.value);
    let im_slope = PI * (kernel.density(mu) + mu * kernel.slope(mu));
    let modulus2 = parts.re * parts.re + parts.im * parts.im;
    let slope = (parts.re * im_slope - parts.im * re_slope) / modulus2;
    Ok((sample_from(mu, &parts), slope))
}

/// Coefficients of `lambda(z) ~ -lambda2/z^2 - lambda4/z^4` at infinity.
pub fn asymptotic_coefficients<K: DispersionKernel + ?Sized>(kernel: &K) -> (f64, f64) {
    (kernel.lambda2(), kernel.lambda4())
}
