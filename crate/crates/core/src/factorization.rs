//! Riemann-problem solution `X(z) = exp(V(z)) / z` with
//! `V(z) = (1/pi) integral_0^inf xi(tau) / (tau - z) dtau`.
//!
//! The phase `xi` is sampled once into an [`XiTable`] and interpolated inside
//! every nested integral; nothing below re-solves the dispersion function.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::{lambda_offaxis, phase_with_slope, ComplexValue};
use crate::error::{Error, Result};
use crate::kramers;
use crate::moments::{DispersionKernel, GasStatistics, MomentSet};
use crate::quadrature::{
    integrate_cauchy, integrate_fallible, integrate_principal_value, QuadratureConfig,
};

/// Target for the midpoint interpolation error of the phase table.
pub const PHASE_INTERPOLATION_TOLERANCE: f64 = 1e-9;

const INITIAL_INTERVALS: usize = 64;
const MAX_NODES: usize = 1 << 16;

/// Tabulated phase `xi(tau) = theta(tau) - pi` on `[0, R]`.
///
/// Stores `theta` rather than `xi` so that `sin xi = -sin theta` keeps full
/// relative precision near `tau = 0`. Values are interpolated by cubic
/// Hermite segments using the analytic phase slope, limited with the
/// Fritsch–Carlson conditions so the interpolant stays monotone. The first
/// node is `tau = 0`, holding the exact limit `theta(0+) = 0`.
#[derive(Debug, Clone)]
pub struct XiTable {
    alpha: f64,
    statistics: Option<GasStatistics>,
    nodes: Vec<f64>,
    theta: Vec<f64>,
    slopes: Vec<f64>,
    error_bound: f64,
}

#[derive(Debug, Clone, Copy)]
struct NodeSample {
    tau: f64,
    theta: f64,
    slope: f64,
}

fn sample<K: DispersionKernel + ?Sized>(
    tau: f64,
    kernel: &K,
    cfg: &QuadratureConfig,
) -> Result<NodeSample> {
    let (s, slope) = phase_with_slope(tau, kernel, cfg)?;
    Ok(NodeSample {
        tau,
        theta: s.theta,
        slope,
    })
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

fn limit_slopes(nodes: &[f64], values: &[f64], raw: &[f64]) -> Vec<f64> {
    let mut m = raw.to_vec();
    for k in 0..nodes.len() - 1 {
        let delta = (values[k + 1] - values[k]) / (nodes[k + 1] - nodes[k]);
        if delta == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta;
        let b = m[k + 1] / delta;
        if a < 0.0 {
            m[k] = 0.0;
        }
        if b < 0.0 {
            m[k + 1] = 0.0;
        }
        let (a, b) = (m[k] / delta, m[k + 1] / delta);
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let t = 3.0 / r2.sqrt();
            m[k] = t * a * delta;
            m[k + 1] = t * b * delta;
        }
    }
    m
}

impl XiTable {
    /// Builds the table for a quantum gas at `alpha`.
    pub fn build(moments: &MomentSet, cfg: &QuadratureConfig) -> Result<Self> {
        Self::build_for_kernel(moments, cfg)
    }

    /// Adaptive construction: start from a uniform grid on `[0, R]`, compare
    /// the interpolant with a fresh phase evaluation at each interval midpoint
    /// and bisect until every midpoint agrees within tolerance.
    pub fn build_for_kernel<K: DispersionKernel + ?Sized>(
        kernel: &K,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let radius = cfg.truncation_radius;
        let tolerance = PHASE_INTERPOLATION_TOLERANCE.max(10.0 * cfg.abs_tol);

        let initial: Vec<f64> = (0..=INITIAL_INTERVALS)
            .map(|i| radius * i as f64 / INITIAL_INTERVALS as f64)
            .collect();
        let mut samples: Vec<NodeSample> = initial
            .par_iter()
            .map(|&tau| sample(tau, kernel, cfg))
            .collect::<Result<_>>()?;
        let mut midpoints: Vec<Option<NodeSample>> = vec![None; samples.len() - 1];

        loop {
            let missing: Vec<usize> = (0..midpoints.len())
                .filter(|&i| midpoints[i].is_none())
                .collect();
            let fresh: Vec<NodeSample> = missing
                .par_iter()
                .map(|&i| sample(0.5 * (samples[i].tau + samples[i + 1].tau), kernel, cfg))
                .collect::<Result<_>>()?;
            for (i, s) in missing.into_iter().zip(fresh) {
                midpoints[i] = Some(s);
            }

            let nodes: Vec<f64> = samples.iter().map(|s| s.tau).collect();
            let theta: Vec<f64> = samples.iter().map(|s| s.theta).collect();
            let raw: Vec<f64> = samples.iter().map(|s| s.slope).collect();
            let slopes = limit_slopes(&nodes, &theta, &raw);

            let errors: Vec<f64> = midpoints
                .iter()
                .enumerate()
                .map(|(i, mid)| {
                    let mid = mid.expect("midpoint sampled above");
                    let interp = hermite(
                        nodes[i],
                        nodes[i + 1],
                        theta[i],
                        theta[i + 1],
                        slopes[i],
                        slopes[i + 1],
                        mid.tau,
                    );
                    (interp - mid.theta).abs()
                })
                .collect();

            if errors.iter().all(|&e| e <= tolerance) {
                let error_bound = errors.iter().copied().fold(0.0, f64::max);
                return Ok(Self {
                    alpha: kernel.alpha(),
                    statistics: kernel.statistics(),
                    nodes,
                    theta,
                    slopes,
                    error_bound,
                });
            }

            let mut next_samples = Vec::with_capacity(samples.len() * 2);
            let mut next_mid = Vec::with_capacity(samples.len() * 2);
            for i in 0..midpoints.len() {
                next_samples.push(samples[i]);
                let mid = midpoints[i].expect("midpoint sampled above");
                if errors[i] > tolerance {
                    if !(mid.tau - samples[i].tau > 1e-12) {
                        return Err(Error::TableConstruction(format!(
                            "interval at tau = {} cannot be refined further (error {:e})",
                            samples[i].tau, errors[i]
                        )));
                    }
                    next_samples.push(mid);
                    next_mid.push(None);
                    next_mid.push(None);
                } else {
                    next_mid.push(Some(mid));
                }
            }
            next_samples.push(*samples.last().expect("nonempty"));
            if next_samples.len() > MAX_NODES {
                return Err(Error::TableConstruction(format!(
                    "more than {MAX_NODES} nodes required"
                )));
            }
            samples = next_samples;
            midpoints = next_mid;
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `None` for a table built from an explicit non-quantum kernel.
    pub fn statistics(&self) -> Option<GasStatistics> {
        self.statistics
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().expect("table has nodes")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest midpoint discrepancy observed during construction.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// `(tau, xi)` pairs at the nodes.
    pub fn node_values(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(&self.theta)
            .map(|(&t, &th)| (t, th - PI))
    }

    /// Interpolated `theta(tau)`; `0` below the table and `pi` beyond it.
    pub fn theta(&self, tau: f64) -> f64 {
        let n = self.nodes.len();
        if tau <= 0.0 {
            return 0.0;
        }
        if tau >= self.nodes[n - 1] {
            return PI;
        }
        let k = self.nodes.partition_point(|&x| x <= tau) - 1;
        hermite(
            self.nodes[k],
            self.nodes[k + 1],
            self.theta[k],
            self.theta[k + 1],
            self.slopes[k],
            self.slopes[k + 1],
            tau,
        )
    }

    pub fn xi(&self, tau: f64) -> f64 {
        self.theta(tau) - PI
    }

    pub fn sin_xi(&self, tau: f64) -> f64 {
        -self.theta(tau).sin()
    }

    /// Exact integral of the interpolated `xi` over the table range.
    pub fn integral_of_xi(&self) -> f64 {
        let mut total = 0.0;
        for k in 0..self.nodes.len() - 1 {
            let h = self.nodes[k + 1] - self.nodes[k];
            total += 0.5 * h * (self.theta[k] + self.theta[k + 1])
                + h * h * (self.slopes[k] - self.slopes[k + 1]) / 12.0;
        }
        total - PI * self.radius()
    }

    /// CSV dump with header `tau,xi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "tau,xi")?;
        for (tau, xi) in self.node_values() {
            writeln!(out, "{tau:.11e},{xi:.11e}")?;
        }
        Ok(())
    }
}

/// Convenience: moments plus phase table for `(alpha, statistics)`.
pub fn build_xi_table(
    alpha: f64,
    statistics: GasStatistics,
    cfg: &QuadratureConfig,
) -> Result<XiTable> {
    let moments = MomentSet::for_alpha(alpha, statistics, cfg)?;
    XiTable::build(&moments, cfg)
}

/// A value of `X` at a point off the cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XValue {
    pub z: ComplexValue,
    pub x: ComplexValue,
}

fn on_cut(z: ComplexValue) -> bool {
    z.im == 0.0 && z.re >= 0.0
}

/// `V(z)` for `z` off the cut `[0, inf)`.
pub fn v_exponent(
    z: ComplexValue,
    table: &XiTable,
    cfg: &QuadratureConfig,
) -> Result<ComplexValue> {
    if on_cut(z) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Precondition(format!(
            "V(z) needs z off [0, inf) (got {z}); use v_cut"
        )));
    }
    let r = integrate_cauchy(|t| table.xi(t), z, 0.0, table.radius(), cfg)?;
    Ok(r.value / PI)
}

/// Principal value `(1/pi) PV integral_0^inf xi(tau) / (tau - eta) dtau`, `eta > 0`.
///
/// The boundary values of `V` on the cut are `V_cut +- i xi`.
pub fn v_cut(eta: f64, table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Precondition(format!(
            "v_cut needs eta > 0 (got {eta})"
        )));
    }
    let radius = table.radius();
    let upper = if eta < radius { radius } else { eta + 1.0 };
    let r = integrate_principal_value(|t| table.xi(t), eta, 0.0, upper, cfg)?;
    Ok(r.value / PI)
}

/// `X(z) = exp(V(z)) / z`.
pub fn x_function(z: ComplexValue, table: &XiTable, cfg: &QuadratureConfig) -> Result<XValue> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Precondition("X(z) needs z != 0".into()));
    }
    let v = v_exponent(z, table, cfg)?;
    Ok(XValue { z, x: v.exp() / z })
}

/// `X` on the cut in the principal-value convention `exp(V_cut(eta)) / eta`.
pub fn x_cut(eta: f64, table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(v_cut(eta, table, cfg)?.exp() / eta)
}

/// `sin xi(eta) / X_cut(eta)`, the density shared by the continuum
/// coefficient, the profile and the representation of `1/X`.
pub fn sin_xi_over_x_cut(eta: f64, table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(table.sin_xi(eta) * eta * (-v_cut(eta, table, cfg)?).exp())
}

/// Closed form `X(-0) = -sqrt(l0 / l2)`.
pub fn x_at_minus_zero<K: DispersionKernel + ?Sized>(kernel: &K) -> f64 {
    -(1.0 / kernel.lambda2()).sqrt()
}

/// `|lambda(z) - lambda2 X(z) X(-z)|`, with `lambda` from direct quadrature of
/// the kernel and `X` from the phase table.
pub fn check_factorization<K: DispersionKernel + ?Sized>(
    z: ComplexValue,
    kernel: &K,
    table: &XiTable,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if z.im == 0.0 {
        return Err(Error::Precondition(format!(
            "factorization check needs Im z != 0 (got {z})"
        )));
    }
    let lambda = lambda_offaxis(z, kernel, cfg)?;
    let xp = x_function(z, table, cfg)?.x;
    let xm = x_function(-z, table, cfg)?.x;
    Ok((lambda - kernel.lambda2() * xp * xm).norm())
}

/// `(1/pi) integral_0^inf sin xi(eta) / (X_cut(eta) (eta - mu)) deta` for `mu < 0`.
pub fn representation_integral(mu: f64, table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    if !(mu < 0.0) {
        return Err(Error::Precondition(format!(
            "representation integral needs mu < 0 (got {mu})"
        )));
    }
    let r = integrate_fallible(
        |eta| Ok(sin_xi_over_x_cut(eta, table, cfg)? / (eta - mu)),
        0.0,
        table.radius(),
        &cfg.outer(),
    )?;
    Ok(r.value / PI)
}

/// Residual of `1/X(mu) = mu - V1 - (1/pi) integral sin xi / (X_cut (eta - mu))` at `mu < 0`.
pub fn check_inverse_x_representation(
    mu: f64,
    table: &XiTable,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let integral = representation_integral(mu, table, cfg)?;
    let v1 = kramers::v1(table, cfg)?;
    let x = x_function(Complex64::new(mu, 0.0), table, cfg)?.x;
    Ok(((1.0 / x).re - mu + v1 + integral).abs())
}

/// Residual of the `mu -> 0-` limit of the representation:
/// `(1/pi) integral sin xi / (X_cut eta) = -V1 - 1/X(-0) = -V1 + sqrt(lambda2)`.
pub fn check_wall_limit_representation<K: DispersionKernel + ?Sized>(
    kernel: &K,
    table: &XiTable,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let v1 = kramers::v1(table, cfg)?;
    let integral = kramers::wall_integral(table, cfg)?;
    Ok((integral + v1 + 1.0 / x_at_minus_zero(kernel)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::lambda_boundary;
    use crate::quadrature::integrate;

    fn setup(alpha: f64, stat: GasStatistics) -> (MomentSet, XiTable, QuadratureConfig) {
        let cfg = QuadratureConfig::for_alpha(alpha);
        let m = MomentSet::for_alpha(alpha, stat, &cfg).unwrap();
        let t = XiTable::build(&m, &cfg).unwrap();
        (m, t, cfg)
    }

    #[test]
    fn table_invariants() {
        for stat in GasStatistics::ALL {
            let (m, t, cfg) = setup(-1.0, stat);
            assert!(t.nodes().windows(2).all(|w| w[0] < w[1]));
            let (first, last) = (
                t.node_values().next().unwrap(),
                t.node_values().last().unwrap(),
            );
            assert!((first.1 + PI).abs() < 0.05);
            assert!(last.1.abs() < 1e-9);
            assert!(t.node_values().all(|(_, xi)| (-PI..=0.0).contains(&xi)));
            assert!(t.error_bound() < 1e-8);
            let direct = lambda_boundary(1.0, &m, &cfg).unwrap().xi;
            assert!((t.xi(1.0) - direct).abs() < 1e-8);
        }
    }

    #[test]
    fn interpolation_matches_fresh_phase_off_node() {
        let (m, t, cfg) = setup(-0.5, GasStatistics::Bose);
        // Deterministic pseudo-random abscissae from a Weyl sequence.
        let golden = 0.618_033_988_749_894_9;
        for i in 1..=50 {
            let tau = 0.01 + (i as f64 * golden).fract() * 5.5;
            let fresh = lambda_boundary(tau, &m, &cfg).unwrap().xi;
            assert!(
                (t.xi(tau) - fresh).abs() <= t.error_bound().max(1e-9) * 2.0,
                "{tau}"
            );
        }
    }

    #[test]
    fn exact_integral_agrees_with_quadrature() {
        let (_, t, cfg) = setup(-1.0, GasStatistics::Bose);
        let q = integrate(|x| t.xi(x), 0.0, t.radius(), &cfg).unwrap().value;
        assert!((q - t.integral_of_xi()).abs() < 1e-9);
    }

    #[test]
    fn v_symmetry_and_decay() {
        let (_, t, cfg) = setup(-1.0, GasStatistics::Bose);
        let v = v_exponent(Complex64::new(-1.0, 0.0), &t, &cfg).unwrap();
        assert_eq!(v.im, 0.0);
        let far = v_exponent(Complex64::new(0.0, 100.0), &t, &cfg).unwrap();
        assert!(far.norm() < 0.02);
        let z = Complex64::new(0.7, 0.4);
        let a = v_exponent(z.conj(), &t, &cfg).unwrap();
        let b = v_exponent(z, &t, &cfg).unwrap().conj();
        assert!((a - b).norm() < 1e-13);
        assert!(v_exponent(Complex64::new(1.0, 0.0), &t, &cfg).is_err());
    }

    #[test]
    fn plemelj_boundary_values() {
        let (_, t, cfg) = setup(-1.0, GasStatistics::Bose);
        for eta in [0.2, 1.0, 3.0] {
            let vc = v_cut(eta, &t, &cfg).unwrap();
            let up = v_exponent(Complex64::new(eta, 1e-6), &t, &cfg).unwrap();
            let down = v_exponent(Complex64::new(eta, -1e-6), &t, &cfg).unwrap();
            assert!((up - Complex64::new(vc, t.xi(eta))).norm() < 1e-4);
            // X+/X- = exp(2 i xi): the jump of V is 2 i xi.
            assert!(((up - down) - Complex64::new(0.0, 2.0 * t.xi(eta))).norm() < 1e-4);
            // sin xi = Im exp(V+ - V_cut).
            assert!(((up - vc).exp().im - t.sin_xi(eta)).abs() < 1e-5);
        }
    }

    #[test]
    fn x_asymptotics_and_sign() {
        let (m, t, cfg) = setup(-1.0, GasStatistics::Bose);
        let z = Complex64::new(0.0, 100.0);
        let x = x_function(z, &t, &cfg).unwrap();
        assert!((z * x.x - 1.0).norm() < 0.02);
        let neg = x_function(Complex64::new(-1.0, 0.0), &t, &cfg).unwrap();
        assert!(neg.x.im == 0.0 && neg.x.re < 0.0);
        assert!(x_function(Complex64::new(0.0, 0.0), &t, &cfg).is_err());
        let x0 = x_at_minus_zero(&m);
        assert!((x0 + (m.l0 / m.l2).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn x_cut_positive_and_limits() {
        let (m, t, cfg) = setup(-1.0, GasStatistics::Bose);
        for i in 1..=60 {
            let eta = 0.1 * i as f64;
            assert!(x_cut(eta, &t, &cfg).unwrap() > 0.0);
        }
        // eta X_cut ~ exp(V1 / eta) at large eta.
        let v1 = kramers::v1(&t, &cfg).unwrap();
        for far in [6.0, 8.0, 12.0] {
            assert!(
                (far * x_cut(far, &t, &cfg).unwrap() - (v1 / far).exp()).abs() < 1.5 / (far * far)
            );
        }
        // V_cut diverges like ln(eta) at the origin, so X_cut itself tends to
        // the finite value -X(-0) = 1/sqrt(lambda2).
        let near = x_cut(1e-7, &t, &cfg).unwrap();
        assert!((near + x_at_minus_zero(&m)).abs() < 1e-4, "{near}");
    }

    #[test]
    fn v_cut_continuity() {
        let (_, t, cfg) = setup(-1.0, GasStatistics::Fermi);
        let mut prev = v_cut(0.01, &t, &cfg).unwrap();
        for i in 1..=599 {
            let eta = 0.01 + 0.01 * i as f64;
            let v = v_cut(eta, &t, &cfg).unwrap();
            // Near the origin V_cut follows ln(eta).
            let log_step = (eta / (eta - 0.01)).ln();
            assert!((v - prev).abs() < 0.02 + 1.1 * log_step, "{eta}");
            prev = v;
        }
    }

    #[test]
    fn factorization_residuals() {
        let (m, t, cfg) = setup(-1.0, GasStatistics::Bose);
        let z = Complex64::new(1.0, 1.0);
        let r = check_factorization(z, &m, &t, &cfg).unwrap();
        assert!(r < 1e-7, "{r}");
        let r_neg = check_factorization(-z, &m, &t, &cfg).unwrap();
        assert!((r - r_neg).abs() < 1e-9);
        let (m4, t4, c4) = setup(-4.0, GasStatistics::Bose);
        let r4 = check_factorization(Complex64::new(0.0, 0.3), &m4, &t4, &c4).unwrap();
        assert!(r4 < 1e-7, "{r4}");
    }

    #[test]
    fn wrong_lambda2_breaks_factorization() {
        let (mut m, t, cfg) = setup(-1.0, GasStatistics::Bose);
        m.lambda2 += 1e-3;
        let r = check_factorization(Complex64::new(1.0, 1.0), &m, &t, &cfg).unwrap();
        assert!(r > 1e-5);
    }

    #[test]
    fn inverse_representation() {
        let (m, t, cfg) = setup(-1.0, GasStatistics::Bose);
        for mu in [-0.5, -5.0] {
            let r = check_inverse_x_representation(mu, &t, &cfg).unwrap();
            assert!(r < 1e-6, "{mu}: {r}");
        }
        let w = check_wall_limit_representation(&m, &t, &cfg).unwrap();
        assert!(w < 1e-6, "{w}");
    }

    #[test]
    fn x_approaches_closed_form_at_origin() {
        let (m, t, cfg) = setup(-1.0, GasStatistics::Bose);
        let target = x_at_minus_zero(&m);
        let mut last = f64::INFINITY;
        for e in [1e-2, 1e-4, 1e-6, 1e-8] {
            let x = x_function(Complex64::new(-e, 0.0), &t, &cfg).unwrap().x.re;
            let gap = (x - target).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-5, "{last}");
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let (_, t, _) = setup(-1.0, GasStatistics::Bose);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tau,xi\n"));
        assert_eq!(text.lines().count(), t.len() + 1);
    }
}
