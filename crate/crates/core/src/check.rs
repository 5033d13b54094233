//! Identity suite: the closed-form relations the solution must satisfy,
//! evaluated numerically with residuals.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::factorization::{
    check_factorization, check_inverse_x_representation, check_wall_limit_representation,
};
use crate::kramers::{wall_velocity_closed_form, KramersSolution};
use crate::moments::{DispersionKernel, GasStatistics};
use crate::quadrature::QuadratureConfig;

pub const FACTORIZATION_TOLERANCE: f64 = 1e-7;
pub const REPRESENTATION_TOLERANCE: f64 = 1e-6;
pub const WALL_TOLERANCE: f64 = 1e-6;
pub const BOUNDARY_TOLERANCE: f64 = 5e-4;
pub const CONSISTENCY_TOLERANCE: f64 = 1e-4;

/// Reference slip velocity of the classical BGK gas.
pub const CLASSICAL_V1: f64 = 1.0162;

/// Off-axis probe points for the factorization identity.
pub const FACTORIZATION_POINTS: [Complex64; 10] = [
    Complex64::new(0.31, 0.07),
    Complex64::new(-0.84, 0.52),
    Complex64::new(1.27, -0.19),
    Complex64::new(-2.6, -1.4),
    Complex64::new(0.05, 2.3),
    Complex64::new(3.9, 0.8),
    Complex64::new(-0.47, -0.03),
    Complex64::new(1.9, 3.1),
    Complex64::new(-5.2, 0.6),
    Complex64::new(0.68, -0.91),
];

pub const REPRESENTATION_POINTS: [f64; 5] = [-0.1, -0.5, -1.0, -2.0, -10.0];
pub const BOUNDARY_POINTS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const CONSISTENCY_POINTS: [f64; 3] = [0.0, 0.5, 2.0];

/// Which identities to run and where.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub alphas: Vec<f64>,
    pub statistics: Vec<GasStatistics>,
    /// Overrides the default quadrature tolerance when set.
    pub tolerance: Option<f64>,
    /// Added to `lambda2` inside the factorization identity only.
    pub lambda2_offset: f64,
    /// Kernel-integrated mass velocity against `C_v Gv`; the slowest identity.
    pub consistency: bool,
    /// Classical-limit constants at `alpha = -20`.
    pub classical: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            alphas: vec![-0.5, -1.0, -4.0],
            statistics: GasStatistics::ALL.to_vec(),
            tolerance: None,
            lambda2_offset: 0.0,
            consistency: true,
            classical: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub identity: String,
    pub alpha: f64,
    pub statistics: GasStatistics,
    /// Evaluation point, for identities sampled at several points.
    pub at: Option<f64>,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub results: Vec<IdentityResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        !self.results.is_empty() && self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    /// Fixed-width residual table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<26} {:>7} {:<6} {:>9} {:>13} {:>9}  status",
            "identity", "alpha", "stat", "at", "residual", "threshold"
        );
        for r in &self.results {
            let at = r.at.map_or_else(|| "-".to_string(), |v| format!("{v}"));
            let status = match (&r.error, r.passed) {
                (Some(e), _) => format!("ERROR {e}"),
                (None, true) => "PASS".to_string(),
                (None, false) => "FAIL".to_string(),
            };
            let _ = writeln!(
                s,
                "{:<26} {:>7} {:<6} {:>9} {:>13.6e} {:>9.1e}  {}",
                r.identity, r.alpha, r.statistics, at, r.residual, r.threshold, status
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(s, "{} identities, {} failed", self.results.len(), failed);
        s
    }
}

/// Kernel with `lambda2` shifted, leaving the density untouched.
struct Lambda2Offset<'a, K: ?Sized> {
    inner: &'a K,
    offset: f64,
}

impl<K: DispersionKernel + ?Sized> DispersionKernel for Lambda2Offset<'_, K> {
    fn density(&self, mu: f64) -> f64 {
        self.inner.density(mu)
    }
    fn slope(&self, mu: f64) -> f64 {
        self.inner.slope(mu)
    }
    fn lambda2(&self) -> f64 {
        self.inner.lambda2() + self.offset
    }
    fn lambda4(&self) -> f64 {
        self.inner.lambda4()
    }
}

struct Recorder {
    alpha: f64,
    statistics: GasStatistics,
    results: Vec<IdentityResult>,
}

impl Recorder {
    fn record(&mut self, identity: &str, at: Option<f64>, threshold: f64, residual: Result<f64>) {
        let (residual, error) = match residual {
            Ok(r) => (r, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.results.push(IdentityResult {
            identity: identity.to_string(),
            alpha: self.alpha,
            statistics: self.statistics,
            at,
            residual,
            threshold,
            passed: error.is_none() && residual < threshold,
            error,
        });
    }
}

fn config_for(alpha: f64, opts: &CheckOptions) -> QuadratureConfig {
    let cfg = QuadratureConfig::for_alpha(alpha);
    match opts.tolerance {
        Some(t) => cfg.with_tolerance(t),
        None => cfg,
    }
}

fn run_case(alpha: f64, statistics: GasStatistics, opts: &CheckOptions) -> Vec<IdentityResult> {
    let mut rec = Recorder {
        alpha,
        statistics,
        results: Vec::new(),
    };
    let cfg = config_for(alpha, opts);
    let sol = match KramersSolution::new(alpha, statistics, &cfg) {
        Ok(s) => s,
        Err(e) => {
            rec.record("setup", None, 0.0, Err(e));
            return rec.results;
        }
    };
    let kernel = Lambda2Offset {
        inner: &sol.moments,
        offset: opts.lambda2_offset,
    };

    for z in FACTORIZATION_POINTS {
        rec.record(
            "factorization",
            Some(z.re),
            FACTORIZATION_TOLERANCE,
            check_factorization(z, &kernel, &sol.table, &cfg),
        );
    }
    for mu in REPRESENTATION_POINTS {
        rec.record(
            "inverse_x_representation",
            Some(mu),
            REPRESENTATION_TOLERANCE,
            check_inverse_x_representation(mu, &sol.table, &cfg),
        );
    }
    rec.record(
        "wall_limit_representation",
        None,
        REPRESENTATION_TOLERANCE,
        check_wall_limit_representation(&sol.moments, &sol.table, &cfg),
    );
    rec.record(
        "wall_closed_form",
        None,
        WALL_TOLERANCE,
        sol.profile(0.0)
            .map(|p| (p.cv - wall_velocity_closed_form(&sol.moments)).abs()),
    );
    for mu in BOUNDARY_POINTS {
        rec.record(
            "boundary_condition",
            Some(mu),
            BOUNDARY_TOLERANCE,
            sol.distribution(0.0, mu, 1.0).map(f64::abs),
        );
    }
    if opts.consistency {
        for x1 in CONSISTENCY_POINTS {
            rec.record(
                "mass_velocity_consistency",
                Some(x1),
                CONSISTENCY_TOLERANCE,
                sol.mass_velocity_routes(x1, 1.0)
                    .map(|r| (r.kernel_route - r.profile_route).abs()),
            );
        }
    }
    rec.results
}

fn run_classical(statistics: GasStatistics, opts: &CheckOptions) -> Vec<IdentityResult> {
    let alpha = -20.0;
    let mut rec = Recorder {
        alpha,
        statistics,
        results: Vec::new(),
    };
    match KramersSolution::new(alpha, statistics, &config_for(alpha, opts)) {
        Ok(sol) => {
            rec.record(
                "classical_wall_velocity",
                None,
                1e-5,
                sol.profile(0.0).map(|p| (p.cv - 0.5f64.sqrt()).abs()),
            );
            rec.record(
                "classical_slip_velocity",
                None,
                1e-3,
                Ok((sol.v1 - CLASSICAL_V1).abs()),
            );
            let kv = 2.0 * CLASSICAL_V1 / PI.sqrt();
            rec.record(
                "classical_slip_coefficient",
                None,
                2e-3,
                Ok((sol.slip().kv - kv).abs()),
            );
        }
        Err(e) => rec.record("setup", None, 0.0, Err(e)),
    }
    rec.results
}

/// Runs the suite; cases are evaluated in parallel and reported in a fixed order.
pub fn run_checks(opts: &CheckOptions) -> CheckReport {
    let mut cases: Vec<(f64, GasStatistics, bool)> = Vec::new();
    for &alpha in &opts.alphas {
        for &stat in &opts.statistics {
            cases.push((alpha, stat, false));
        }
    }
    if opts.classical {
        for &stat in &opts.statistics {
            cases.push((-20.0, stat, true));
        }
    }
    let results = cases
        .par_iter()
        .map(|&(alpha, stat, classical)| {
            if classical {
                run_classical(stat, opts)
            } else {
                run_case(alpha, stat, opts)
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    CheckReport { results }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(alpha: f64, stat: GasStatistics) -> CheckOptions {
        CheckOptions {
            alphas: vec![alpha],
            statistics: vec![stat],
            consistency: false,
            classical: false,
            ..CheckOptions::default()
        }
    }

    #[test]
    fn identities_hold() {
        let report = run_checks(&quick(-1.0, GasStatistics::Bose));
        assert!(report.all_passed(), "{}", report.to_text());
        assert_eq!(report.results.len(), 10 + 5 + 1 + 1 + 4);
    }

    #[test]
    fn injected_lambda2_breaks_factorization_only() {
        let opts = CheckOptions {
            lambda2_offset: 1e-3,
            ..quick(-1.0, GasStatistics::Fermi)
        };
        let report = run_checks(&opts);
        assert!(!report.all_passed());
        assert!(report.failures().all(|r| r.identity == "factorization"));
        assert!(report.failures().count() >= 5);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let opts = CheckOptions {
            tolerance: Some(1e-14),
            ..quick(-1.0, GasStatistics::Bose)
        };
        let report = run_checks(&opts);
        assert!(!report.all_passed());
        assert!(report.failures().any(|r| r.error.is_some()));
        assert!(report.to_text().contains("ERROR"));
    }

    #[test]
    fn empty_report_does_not_pass() {
        let opts = CheckOptions {
            alphas: vec![],
            classical: false,
            ..CheckOptions::default()
        };
        assert!(!run_checks(&opts).all_passed());
    }
}
