//! Problem-level results of the half-space isothermal-slip problem.
//!
//! Everything is per unit dimensionless gradient `Gv` unless a gradient is
//! passed explicitly; lengths are in units of the thermal length
//! `l_T = v_T / nu`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorization::{sin_xi_over_x_cut, v_cut, x_cut, XiTable};
use crate::moments::{DispersionKernel, GasStatistics, MomentSet};
use crate::quadrature::{
    integrate, integrate_fallible, integrate_principal_value_fallible, QuadratureConfig,
};

/// Below `eta = x1 / CUTOFF_EXPONENT` the damping `exp(-x1/eta)` is under `1e-18`.
pub const CUTOFF_EXPONENT: f64 = 41.5;

/// `V1 = -(1/pi) integral_0^inf xi(mu) dmu`, the dimensionless slip velocity.
pub fn v1(table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    let r = integrate(|t| table.xi(t), 0.0, table.radius(), cfg)?;
    Ok(-r.value / PI)
}

/// `(1/pi) integral_0^inf exp(-x1/eta) sin xi(eta) / (eta X_cut(eta)) deta`,
/// the Knudsen-layer correction to the velocity profile.
pub fn profile_integral(x1: f64, table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    if !(x1 >= 0.0) || !x1.is_finite() {
        return Err(Error::Precondition(format!("x1 must be >= 0 (got {x1})")));
    }
    let lower = x1 / CUTOFF_EXPONENT;
    let radius = table.radius();
    if lower >= radius {
        return Ok(0.0);
    }
    let r = integrate_fallible(
        |eta| {
            let damping = if x1 == 0.0 { 1.0 } else { (-x1 / eta).exp() };
            Ok(damping * sin_xi_over_x_cut(eta, table, cfg)? / eta)
        },
        lower,
        radius,
        &cfg.outer(),
    )?;
    Ok(r.value / PI)
}

/// The `x1 = 0` profile integral.
pub fn wall_integral(table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    profile_integral(0.0, table, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlipResult {
    pub alpha: f64,
    pub statistics: GasStatistics,
    /// Slip velocity per unit gradient, in thermal lengths.
    pub v1: f64,
    /// Slip coefficient in mean free paths.
    pub kv: f64,
    pub lambda2: f64,
    /// `l / l_T = sqrt(pi) lambda2`.
    pub mean_free_path_over_lt: f64,
    /// Dimensionless viscosity `eta nu beta / rho`, equal to `lambda2`.
    pub reduced_viscosity: f64,
}

/// Slip coefficient `Kv = V1 l0 / (sqrt(pi) l2)`.
pub fn slip_coefficient(
    moments: &MomentSet,
    table: &XiTable,
    cfg: &QuadratureConfig,
) -> Result<SlipResult> {
    let v1 = v1(table, cfg)?;
    let mfp = PI.sqrt() * moments.lambda2;
    Ok(SlipResult {
        alpha: moments.alpha,
        statistics: moments.statistics,
        v1,
        kv: v1 / mfp,
        lambda2: moments.lambda2,
        mean_free_path_over_lt: mfp,
        reduced_viscosity: moments.lambda2,
    })
}

/// Closed-form wall velocity `C_v(0) = -1/X(-0) = sqrt(l2 / l0)`.
pub fn wall_velocity_closed_form<K: DispersionKernel + ?Sized>(kernel: &K) -> f64 {
    kernel.lambda2().sqrt()
}

/// `Kv*(0) = C_v(0) l0 / (sqrt(pi) l2)` from the closed form.
pub fn wall_coefficient_closed_form<K: DispersionKernel + ?Sized>(kernel: &K) -> f64 {
    wall_velocity_closed_form(kernel) / (PI.sqrt() * kernel.lambda2())
}

/// One sample of the half-space velocity solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub x1: f64,
    pub cv: f64,
    pub kv_star: f64,
    /// `C_v - V1 - x1`; never positive.
    pub knudsen_defect: f64,
}

/// `C_v(x1) = V1 + x1 + profile_integral(x1)` and `Kv* = C_v / (sqrt(pi) lambda2)`.
pub fn profile_cv<K: DispersionKernel + ?Sized>(
    x1: f64,
    kernel: &K,
    table: &XiTable,
    v1: f64,
    cfg: &QuadratureConfig,
) -> Result<ProfilePoint> {
    let defect = profile_integral(x1, table, cfg)?;
    let cv = v1 + x1 + defect;
    Ok(ProfilePoint {
        x1,
        cv,
        kv_star: cv / (PI.sqrt() * kernel.lambda2()),
        knudsen_defect: defect,
    })
}

/// Everything needed to evaluate the solution at one `(alpha, statistics)`:
/// moments, phase table and the slip velocity, built once and shared.
#[derive(Debug, Clone)]
pub struct KramersSolution {
    pub moments: MomentSet,
    pub table: XiTable,
    pub v1: f64,
    pub cfg: QuadratureConfig,
}

impl KramersSolution {
    pub fn new(alpha: f64, statistics: GasStatistics, cfg: &QuadratureConfig) -> Result<Self> {
        let moments = MomentSet::for_alpha(alpha, statistics, cfg)?;
        let table = XiTable::build(&moments, cfg)?;
        let v1 = v1(&table, cfg)?;
        Ok(Self {
            moments,
            table,
            v1,
            cfg: *cfg,
        })
    }

    /// Default configuration for `alpha`.
    pub fn with_defaults(alpha: f64, statistics: GasStatistics) -> Result<Self> {
        Self::new(alpha, statistics, &QuadratureConfig::for_alpha(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.moments.alpha
    }

    pub fn statistics(&self) -> GasStatistics {
        self.moments.statistics
    }

    pub fn slip(&self) -> SlipResult {
        let mfp = PI.sqrt() * self.moments.lambda2;
        SlipResult {
            alpha: self.moments.alpha,
            statistics: self.moments.statistics,
            v1: self.v1,
            kv: self.v1 / mfp,
            lambda2: self.moments.lambda2,
            mean_free_path_over_lt: mfp,
            reduced_viscosity: self.moments.lambda2,
        }
    }

    pub fn profile(&self, x1: f64) -> Result<ProfilePoint> {
        profile_cv(x1, &self.moments, &self.table, self.v1, &self.cfg)
    }

    /// Continuum-spectrum coefficient `a(eta) = 2 Gv sin xi / (pi eta X_cut)`.
    pub fn continuum_coefficient(&self, eta: f64, gv: f64) -> Result<f64> {
        if !(eta > 0.0) {
            return Err(Error::Precondition(format!("eta must be > 0 (got {eta})")));
        }
        Ok(2.0 * gv / PI * sin_xi_over_x_cut(eta, &self.table, &self.cfg)? / eta)
    }

    /// Distribution function `h(x1, mu)` of the linearized problem.
    ///
    /// The continuous-spectrum eigenfunction contributes a principal-value
    /// part and, for `mu > 0`, a delta term `exp(-x1/mu) lambda(mu) a(mu) / K(mu)`
    /// with the real (principal-value) `lambda`. Since
    /// `sin xi = -pi mu K / |lambda+|`, that term equals
    /// `-2 Gv exp(-x1/mu) cos theta(mu) / X_cut(mu)`, which is how it is
    /// evaluated here so that it stays finite where `K` underflows.
    pub fn distribution(&self, x1: f64, mu: f64, gv: f64) -> Result<f64> {
        if !(x1 >= 0.0) || !x1.is_finite() || !mu.is_finite() {
            return Err(Error::Precondition(format!(
                "need x1 >= 0 and finite mu (got {x1}, {mu})"
            )));
        }
        let table = &self.table;
        let cfg = &self.cfg;
        let radius = table.radius();
        let chapman_enskog = 2.0 * self.v1 * gv + 2.0 * gv * (x1 - mu);

        let cutoff = x1 / CUTOFF_EXPONENT;
        let lower = if mu > 0.0 {
            cutoff.min(0.5 * mu)
        } else {
            cutoff
        };
        // eta a(eta) exp(-x1/eta)
        let weighted = |eta: f64| -> Result<f64> {
            let damping = if x1 == 0.0 { 1.0 } else { (-x1 / eta).exp() };
            Ok(2.0 * gv / PI * damping * sin_xi_over_x_cut(eta, table, cfg)?)
        };

        let outer = cfg.outer();
        let mut continuum = if lower >= radius {
            0.0
        } else if mu > lower && mu < radius {
            integrate_principal_value_fallible(weighted, mu, lower, radius, &outer)?.value
        } else {
            integrate_fallible(|eta| Ok(weighted(eta)? / (eta - mu)), lower, radius, &outer)?.value
        };

        if mu > 0.0 {
            let damping = if x1 == 0.0 { 1.0 } else { (-x1 / mu).exp() };
            if damping > 0.0 {
                continuum -= 2.0 * gv * damping * table.theta(mu).cos() / x_cut(mu, table, cfg)?;
            }
        }
        Ok(chapman_enskog + continuum)
    }

    /// Mass velocity `U = C_v Gv`.
    pub fn mass_velocity(&self, x1: f64, gv: f64) -> Result<f64> {
        Ok(self.profile(x1)?.cv * gv)
    }

    /// Both routes to `U(x1)`: kernel-weighted integral of `h` and `C_v Gv`.
    pub fn mass_velocity_routes(&self, x1: f64, gv: f64) -> Result<MassVelocityRoutes> {
        let radius = self.cfg.truncation_radius;
        let kernel_route = integrate_fallible(
            |mu| {
                let k = self.moments.kernel(mu);
                Ok(k * (self.distribution(x1, mu, gv)? + self.distribution(x1, -mu, gv)?))
            },
            0.0,
            radius,
            &self.cfg.outer(),
        )?
        .value
            * 0.5;
        Ok(MassVelocityRoutes {
            x1,
            kernel_route,
            profile_route: self.mass_velocity(x1, gv)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassVelocityRoutes {
    pub x1: f64,
    /// `(1/2) integral K(mu) h(x1, mu) dmu`.
    pub kernel_route: f64,
    /// `C_v(x1) Gv`.
    pub profile_route: f64,
}

/// `V_cut` re-exported for callers working at the problem level.
pub fn exponent_on_cut(eta: f64, table: &XiTable, cfg: &QuadratureConfig) -> Result<f64> {
    v_cut(eta, table, cfg)
}

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const HBAR: f64 = 1.054_571_817e-34;

/// Physical inputs for the dimensional report (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Kelvin.
    pub temperature: f64,
    /// kg.
    pub particle_mass: f64,
    /// Effective collision frequency, 1/s.
    pub collision_frequency: f64,
    /// Particle spin; a nonnegative half-integer.
    pub spin: f64,
    /// kg/m^3; defaults to `N m`.
    pub mass_density: Option<f64>,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::ParameterDomain(format!(
                    "{name} must be positive and finite (got {v})"
                )))
            }
        };
        positive("temperature", self.temperature)?;
        positive("particle_mass", self.particle_mass)?;
        positive("collision_frequency", self.collision_frequency)?;
        if let Some(rho) = self.mass_density {
            positive("mass_density", rho)?;
        }
        if !(self.spin >= 0.0) || (2.0 * self.spin).fract() != 0.0 {
            return Err(Error::ParameterDomain(format!(
                "spin must be a nonnegative half-integer (got {})",
                self.spin
            )));
        }
        Ok(())
    }

    /// `beta = m / (2 k_B T)`.
    pub fn beta(&self) -> f64 {
        self.particle_mass / (2.0 * BOLTZMANN * self.temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionalReport {
    pub alpha: f64,
    pub statistics: GasStatistics,
    pub velocity_gradient: f64,
    pub beta: f64,
    pub thermal_speed: f64,
    pub thermal_length: f64,
    pub number_density: f64,
    pub mass_density: f64,
    pub viscosity: f64,
    pub mean_free_path: f64,
    pub slip_coefficient: f64,
    pub wall_coefficient: f64,
    pub slip_velocity: f64,
    pub wall_velocity: f64,
    /// `sqrt(l0 / l2) l g_v`, the wall velocity written without the
    /// `1/sqrt(pi)` of `Kv*(0)`; reported for comparison only.
    pub wall_velocity_without_sqrt_pi: f64,
}

/// SI quantities for a gas with the given physical parameters.
pub fn dimensional_report(
    moments: &MomentSet,
    v1: f64,
    phys: &PhysicalParams,
    velocity_gradient: f64,
) -> Result<DimensionalReport> {
    phys.validate()?;
    if !velocity_gradient.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "velocity gradient must be finite (got {velocity_gradient})"
        )));
    }
    let beta = phys.beta();
    let thermal_speed = 1.0 / beta.sqrt();
    let thermal_length = thermal_speed / phys.collision_frequency;
    let m = phys.particle_mass;
    let two_pi_hbar = 2.0 * PI * HBAR;
    let number_density = 2.0 * PI * (2.0 * phys.spin + 1.0) * m.powi(3) * moments.l0.abs()
        / (two_pi_hbar.powi(3) * beta.powf(1.5));
    let mass_density = phys.mass_density.unwrap_or(number_density * m);
    let viscosity = mass_density / (phys.collision_frequency * beta) * moments.lambda2;
    let mean_free_path = viscosity * (PI * beta).sqrt() / mass_density;
    let kv = v1 / (PI.sqrt() * moments.lambda2);
    let wall_coefficient = wall_coefficient_closed_form(moments);
    Ok(DimensionalReport {
        alpha: moments.alpha,
        statistics: moments.statistics,
        velocity_gradient,
        beta,
        thermal_speed,
        thermal_length,
        number_density,
        mass_density,
        viscosity,
        mean_free_path,
        slip_coefficient: kv,
        wall_coefficient,
        slip_velocity: kv * mean_free_path * velocity_gradient,
        wall_velocity: wall_coefficient * mean_free_path * velocity_gradient,
        wall_velocity_without_sqrt_pi: (1.0 / moments.lambda2).sqrt()
            * mean_free_path
            * velocity_gradient,
    })
}
