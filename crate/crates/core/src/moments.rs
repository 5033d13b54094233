//! Quantum-statistics kernel `K(mu, alpha)` and its even moments.
//!
//! For Bose statistics the kernel is `ln(1 - e^(alpha - mu^2)) / (2 l0)`,
//! for Fermi statistics the sign inside the logarithm flips. The moments
//! `l_2n = integral_0^inf tau^2n ln(1 -+ e^(alpha - tau^2)) dtau` are evaluated
//! by quadrature; a polylogarithm series provides the independent oracle.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_semi_infinite, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GasStatistics {
    Bose,
    Fermi,
}

impl GasStatistics {
    pub const ALL: [GasStatistics; 2] = [GasStatistics::Bose, GasStatistics::Fermi];

    /// Sign `s` in `ln(1 + s e^x)`: -1 for Bose, +1 for Fermi.
    pub fn occupation_sign(self) -> f64 {
        match self {
            GasStatistics::Bose => -1.0,
            GasStatistics::Fermi => 1.0,
        }
    }

    /// `ln(1 -+ e^x)`.
    pub fn log_occupation(self, x: f64) -> f64 {
        (self.occupation_sign() * x.exp()).ln_1p()
    }

    /// Supported `alpha` window, inclusive.
    pub fn alpha_window(self) -> (f64, f64) {
        match self {
            GasStatistics::Bose => (-30.0, -0.01),
            GasStatistics::Fermi => (-30.0, 30.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GasStatistics::Bose => "bose",
            GasStatistics::Fermi => "fermi",
        }
    }
}

impl fmt::Display for GasStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GasStatistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bose" | "b" => Ok(GasStatistics::Bose),
            "fermi" | "f" => Ok(GasStatistics::Fermi),
            other => Err(Error::ParameterDomain(format!(
                "unknown statistics {other:?}"
            ))),
        }
    }
}

/// Reduced chemical potential `alpha = mu0 / (k_B T)`, checked against the
/// supported window of a particular statistics.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ChemicalPotentialRatio(f64);

impl ChemicalPotentialRatio {
    pub fn new(alpha: f64, statistics: GasStatistics) -> Result<Self> {
        let (lo, hi) = statistics.alpha_window();
        if alpha.is_finite() && alpha >= lo && alpha <= hi {
            Ok(Self(alpha))
        } else {
            Err(Error::AlphaOutOfWindow {
                alpha,
                statistics,
                lo,
                hi,
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// An even, unit-normalized kernel on the real line together with the
/// moment ratios `lambda_2n = integral mu^2n K dmu`.
///
/// The dispersion and factorization machinery only sees a kernel through
/// this trait, so the whole pipeline can be rerun on an explicit classical
/// Gaussian for cross-checks.
pub trait DispersionKernel: Sync {
    /// `K(mu)`.
    fn density(&self, mu: f64) -> f64;
    /// `dK/dmu`.
    fn slope(&self, mu: f64) -> f64;
    fn lambda2(&self) -> f64;
    fn lambda4(&self) -> f64;

    fn alpha(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn statistics(&self) -> Option<GasStatistics> {
        None
    }
}

/// Moments `l0, l2, l4` and their ratios for one `(alpha, statistics)` pair.
///
/// Computed once and passed down; nothing downstream caches moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub alpha: f64,
    pub statistics: GasStatistics,
    pub l0: f64,
    pub l2: f64,
    pub l4: f64,
    pub lambda2: f64,
    pub lambda4: f64,
}

impl MomentSet {
    pub fn compute(
        alpha: ChemicalPotentialRatio,
        statistics: GasStatistics,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        // Re-check: the ratio may have been validated against the other statistics.
        let alpha = ChemicalPotentialRatio::new(alpha.value(), statistics)?;
        let l0 = moment_l2n(0, alpha, statistics, cfg)?;
        let l2 = moment_l2n(1, alpha, statistics, cfg)?;
        let l4 = moment_l2n(2, alpha, statistics, cfg)?;
        let set = Self {
            alpha: alpha.value(),
            statistics,
            l0,
            l2,
            l4,
            lambda2: l2 / l0,
            lambda4: l4 / l0,
        };
        set.check_signs()?;
        Ok(set)
    }

    /// Convenience wrapper validating a bare `alpha`.
    pub fn for_alpha(
        alpha: f64,
        statistics: GasStatistics,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        Self::compute(
            ChemicalPotentialRatio::new(alpha, statistics)?,
            statistics,
            cfg,
        )
    }

    fn check_signs(&self) -> Result<()> {
        let expected = self.statistics.occupation_sign();
        let ok = self.l0 * expected > 0.0 && self.l2 * expected > 0.0 && self.lambda2 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!(
                "moments have unexpected signs: {self:?}"
            )))
        }
    }

    /// `K(mu, alpha)`; even in `mu` and strictly positive.
    pub fn kernel(&self, mu: f64) -> f64 {
        self.statistics.log_occupation(self.alpha - mu * mu) / (2.0 * self.l0)
    }

    pub fn kernel_slope(&self, mu: f64) -> f64 {
        // d/dmu ln(1 + s e^(alpha - mu^2)) = -2 mu s / (e^(mu^2 - alpha) + s)
        let s = self.statistics.occupation_sign();
        let denom = (mu * mu - self.alpha).exp() + s;
        -2.0 * mu * s / denom / (2.0 * self.l0)
    }
}

impl DispersionKernel for MomentSet {
    fn density(&self, mu: f64) -> f64 {
        self.kernel(mu)
    }
    fn slope(&self, mu: f64) -> f64 {
        self.kernel_slope(mu)
    }
    fn lambda2(&self) -> f64 {
        self.lambda2
    }
    fn lambda4(&self) -> f64 {
        self.lambda4
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn statistics(&self) -> Option<GasStatistics> {
        Some(self.statistics)
    }
}

/// `l_2n(alpha) = integral_0^inf tau^2n ln(1 -+ e^(alpha - tau^2)) dtau` for `n` in `{0, 1, 2}`.
pub fn moment_l2n(
    n: u32,
    alpha: ChemicalPotentialRatio,
    statistics: GasStatistics,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if n > 2 {
        return Err(Error::ParameterDomain(format!(
            "moment order n = {n} not in {{0, 1, 2}}"
        )));
    }
    let alpha = ChemicalPotentialRatio::new(alpha.value(), statistics)?.value();
    let power = 2 * n as i32;
    let r = integrate_semi_infinite(
        |tau| tau.powi(power) * statistics.log_occupation(alpha - tau * tau),
        cfg,
    )?;
    Ok(r.value)
}

/// `K(mu, alpha)` for the statistics and `alpha` captured in `moments`.
pub fn kernel_k(mu: f64, moments: &MomentSet) -> f64 {
    moments.kernel(mu)
}

/// Largest admissible `|fugacity|` for the series oracle.
pub const POLYLOG_MAX_FUGACITY: f64 = 0.990_049_833_749_168_1; // e^-0.01

/// `Li_s(z) = sum_k z^k / k^s` for `s` in `{3/2, 5/2, 7/2}` by direct summation.
pub fn polylog_half_integer(order: f64, fugacity: f64) -> Result<f64> {
    if ![1.5, 2.5, 3.5].contains(&order) {
        return Err(Error::ParameterDomain(format!(
            "polylog order {order} not in {{3/2, 5/2, 7/2}}"
        )));
    }
    if !(fugacity.abs() <= POLYLOG_MAX_FUGACITY) {
        return Err(Error::ParameterDomain(format!(
            "|fugacity| = {} exceeds {POLYLOG_MAX_FUGACITY}",
            fugacity.abs()
        )));
    }
    let mut sum = 0.0;
    let mut power = fugacity;
    let mut k = 1.0_f64;
    loop {
        sum += power / k.powf(order);
        power *= fugacity;
        k += 1.0;
        if (power / k.powf(order)).abs() < 1e-16 {
            return Ok(sum);
        }
    }
}
