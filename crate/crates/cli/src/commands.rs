use std::f64::consts::PI;
use std::fmt;

use kramers_core::check::{run_checks, CheckOptions};
use kramers_core::kramers::{
    dimensional_report, wall_coefficient_closed_form, wall_velocity_closed_form, DimensionalReport,
    BOLTZMANN, HBAR,
};
use kramers_core::quadrature::{QuadratureConfig, DEFAULT_MAX_SUBDIVISIONS, TAIL_EXPONENT};
use kramers_core::{Error, GasStatistics, KramersSolution, MomentSet, PhysicalParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Cli, Command, Common, Format, Physical, Range, StatChoice};
use crate::output::{emit, Cell, Dataset};

pub const DEFAULT_ALPHA_RANGE: Range = Range::new(-10.0, -0.1, 0.1);
pub const DEFAULT_X1_RANGE: Range = Range::new(0.0, 10.0, 0.05);
pub const DEFAULT_DISTRIBUTION_X1_RANGE: Range = Range::new(0.0, 2.0, 0.5);
pub const DEFAULT_MU_RANGE: Range = Range::new(-2.0, 2.0, 0.25);
pub const FIGURE_ALPHA: f64 = -1.0;
pub const DEFAULT_CHECK_ALPHAS: [f64; 3] = [-0.5, -1.0, -4.0];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Convergence(String),
    CheckFailed,
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed => 1,
            CliError::Usage(_) | CliError::Domain(_) | CliError::Io(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Convergence(m) => write!(f, "numerical non-convergence: {m}"),
            CliError::CheckFailed => write!(f, "identity check failed"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_convergence_failure() {
            CliError::Convergence(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Rows that could not be computed; reported after the output is written.
#[derive(Debug, Default)]
struct Skipped {
    rows: Vec<(f64, Error)>,
}

impl Skipped {
    fn into_result(self) -> Result<(), CliError> {
        if self.rows.is_empty() {
            return Ok(());
        }
        for (at, e) in &self.rows {
            eprintln!("skipped row {at}: {e}");
        }
        let convergence = self.rows.iter().any(|(_, e)| e.is_convergence_failure());
        let summary = format!("{} row(s) skipped", self.rows.len());
        Err(if convergence {
            CliError::Convergence(summary)
        } else {
            CliError::Domain(summary)
        })
    }
}

fn config_for(alpha: f64, tol: Option<f64>) -> QuadratureConfig {
    let cfg = QuadratureConfig::for_alpha(alpha);
    tol.map_or(cfg, |t| cfg.with_tolerance(t))
}

fn validate_tol(tol: Option<f64>) -> Result<(), CliError> {
    match tol {
        Some(t) if !(t > 0.0 && t < 1.0) => Err(CliError::Usage(format!(
            "--tol must be in (0, 1) (got {t})"
        ))),
        _ => Ok(()),
    }
}

fn alphas(common: &Common, default: Range) -> Vec<f64> {
    match (common.alpha, common.alpha_range) {
        (Some(a), _) => vec![a],
        (None, Some(r)) => r.values(),
        (None, None) => default.values(),
    }
}

fn single_alpha(common: &Common) -> Result<f64, CliError> {
    if common.alpha_range.is_some() {
        return Err(CliError::Usage(
            "this command takes --alpha, not --alpha-range".into(),
        ));
    }
    Ok(common.alpha.unwrap_or(FIGURE_ALPHA))
}

fn stat_names(stats: &[GasStatistics]) -> String {
    stats.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")
}

fn base_provenance(d: &mut Dataset, stats: &[GasStatistics], tol: Option<f64>) {
    let abs = tol.unwrap_or(kramers_core::quadrature::INNER_TOLERANCE);
    d.provenance("version", concat!("kramers ", env!("CARGO_PKG_VERSION")))
        .provenance("statistics", stat_names(stats))
        .provenance(
            "quadrature",
            format!(
                "gauss-kronrod-21 abs_tol={abs:e} rel_tol={abs:e} outer_tol={:e} max_subdivisions={DEFAULT_MAX_SUBDIVISIONS} truncation_radius=sqrt({TAIL_EXPONENT}+max(alpha,0))",
                abs.max(kramers_core::quadrature::OUTER_TOLERANCE)
            ),
        );
    let windows: Vec<String> = stats
        .iter()
        .map(|s| {
            let (lo, hi) = s.alpha_window();
            format!("{}=[{lo},{hi}]", s.name())
        })
        .collect();
    d.provenance("alpha_window", windows.join(" "));
}

fn columns(first: &[&str], per_stat: &[&str], stats: &[GasStatistics]) -> Vec<String> {
    let mut c: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    for p in per_stat {
        for s in stats {
            c.push(format!("{p}_{}", s.name()));
        }
    }
    c
}

/// Evaluates `f` on every grid point in parallel, keeping grid order.
fn sweep<T, F>(grid: &[f64], f: F) -> (Vec<(f64, T)>, Skipped)
where
    T: Send,
    F: Fn(f64) -> Result<T, Error> + Sync,
{
    let results: Vec<(f64, Result<T, Error>)> = grid.par_iter().map(|&x| (x, f(x))).collect();
    let mut rows = Vec::new();
    let mut skipped = Skipped::default();
    for (x, r) in results {
        match r {
            Ok(v) => rows.push((x, v)),
            Err(e) => skipped.rows.push((x, e)),
        }
    }
    (rows, skipped)
}

fn slip_dataset(
    figure: Option<u8>,
    stats: &[GasStatistics],
    grid: &[f64],
    tol: Option<f64>,
    with_v1: bool,
) -> (Dataset, Skipped) {
    let per_stat: &[&str] = if with_v1 { &["v1", "kv"] } else { &["kv"] };
    let mut d = Dataset::new(figure, columns(&["alpha"], per_stat, stats));
    base_provenance(&mut d, stats, tol);
    let (rows, skipped) = sweep(grid, |alpha| {
        stats
            .iter()
            .map(|&s| KramersSolution::new(alpha, s, &config_for(alpha, tol)).map(|sol| sol.slip()))
            .collect::<Result<Vec<_>, _>>()
    });
    for (alpha, slips) in rows {
        let mut row = vec![Cell::Num(alpha)];
        if with_v1 {
            row.extend(slips.iter().map(|r| Cell::Num(r.v1)));
        }
        row.extend(slips.iter().map(|r| Cell::Num(r.kv)));
        d.push(row);
    }
    (d, skipped)
}

fn wall_dataset(
    figure: Option<u8>,
    stats: &[GasStatistics],
    grid: &[f64],
    tol: Option<f64>,
    with_cv: bool,
) -> (Dataset, Skipped) {
    let per_stat: &[&str] = if with_cv {
        &["cv0", "kv_star0"]
    } else {
        &["kv_star0"]
    };
    let mut d = Dataset::new(figure, columns(&["alpha"], per_stat, stats));
    base_provenance(&mut d, stats, tol);
    d.provenance(
        "method",
        "closed form Cv(0) = sqrt(l2/l0), Kv*(0) = Cv(0) l0/(sqrt(pi) l2)",
    );
    let (rows, skipped) = sweep(grid, |alpha| {
        stats
            .iter()
            .map(|&s| MomentSet::for_alpha(alpha, s, &config_for(alpha, tol)))
            .collect::<Result<Vec<_>, _>>()
    });
    for (alpha, moments) in rows {
        let mut row = vec![Cell::Num(alpha)];
        if with_cv {
            row.extend(
                moments
                    .iter()
                    .map(|m| Cell::Num(wall_velocity_closed_form(m))),
            );
        }
        row.extend(
            moments
                .iter()
                .map(|m| Cell::Num(wall_coefficient_closed_form(m))),
        );
        d.push(row);
    }
    (d, skipped)
}

fn solutions(
    alpha: f64,
    stats: &[GasStatistics],
    tol: Option<f64>,
) -> Result<Vec<KramersSolution>, CliError> {
    stats
        .par_iter()
        .map(|&s| KramersSolution::new(alpha, s, &config_for(alpha, tol)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ProfileLayout {
    /// `cv`, `kv_star`, `asymptote` per statistics.
    Full,
    /// `kv_star` curves, then their asymptotes.
    Figure,
}

fn profile_dataset(
    figure: Option<u8>,
    alpha: f64,
    stats: &[GasStatistics],
    grid: &[f64],
    tol: Option<f64>,
    layout: ProfileLayout,
) -> Result<(Dataset, Skipped), CliError> {
    let sols = solutions(alpha, stats, tol)?;
    let per_stat: &[&str] = match layout {
        ProfileLayout::Full => &["cv", "kv_star", "asymptote"],
        ProfileLayout::Figure => &["kv_star", "kv_star_asymptote"],
    };
    let mut d = Dataset::new(figure, columns(&["x1"], per_stat, stats));
    base_provenance(&mut d, stats, tol);
    d.provenance("alpha", alpha);
    if layout == ProfileLayout::Figure {
        d.provenance("units", "x1 in thermal lengths l_T; kv_star = u_y/(l g_v); asymptote (V1 + x1)/(sqrt(pi) lambda2)");
    } else {
        d.provenance(
            "units",
            "x1 in thermal lengths l_T; cv per unit Gv; kv_star = u_y/(l g_v); asymptote V1 + x1",
        );
    }
    let (rows, skipped) = sweep(grid, |x1| {
        sols.iter()
            .map(|s| s.profile(x1))
            .collect::<Result<Vec<_>, _>>()
    });
    for (x1, points) in rows {
        let mut row = vec![Cell::Num(x1)];
        match layout {
            ProfileLayout::Full => {
                row.extend(points.iter().map(|p| Cell::Num(p.cv)));
                row.extend(points.iter().map(|p| Cell::Num(p.kv_star)));
                row.extend(sols.iter().map(|s| Cell::Num(s.v1 + x1)));
            }
            ProfileLayout::Figure => {
                row.extend(points.iter().map(|p| Cell::Num(p.kv_star)));
                row.extend(
                    sols.iter()
                        .map(|s| Cell::Num((s.v1 + x1) / (PI.sqrt() * s.moments.lambda2))),
                );
            }
        }
        d.push(row);
    }
    Ok((d, skipped))
}

fn distribution_dataset(
    common: &Common,
    stats: &[GasStatistics],
) -> Result<(Dataset, Skipped), CliError> {
    let alpha = single_alpha(common)?;
    let sols = solutions(alpha, stats, common.tol)?;
    let xs = common
        .x1_range
        .unwrap_or(DEFAULT_DISTRIBUTION_X1_RANGE)
        .values();
    let mus = common.mu_range.unwrap_or(DEFAULT_MU_RANGE).values();
    let mut d = Dataset::new(None, columns(&["x1", "mu"], &["h"], stats));
    base_provenance(&mut d, stats, common.tol);
    d.provenance("alpha", alpha).provenance("gv", common.gv);
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| mus.iter().map(move |&m| (x, m)))
        .collect();
    let results: Vec<Result<Vec<f64>, Error>> = pairs
        .par_iter()
        .map(|&(x1, mu)| {
            sols.iter()
                .map(|s| s.distribution(x1, mu, common.gv))
                .collect()
        })
        .collect();
    let mut skipped = Skipped::default();
    for ((x1, mu), r) in pairs.into_iter().zip(results) {
        match r {
            Ok(hs) => {
                let mut row = vec![Cell::Num(x1), Cell::Num(mu)];
                row.extend(hs.into_iter().map(Cell::Num));
                d.push(row);
            }
            Err(e) => skipped.rows.push((x1, e)),
        }
    }
    Ok((d, skipped))
}

fn require(value: Option<f64>, flag: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag {flag}")))
}

fn dimensional_dataset(
    common: &Common,
    phys: &Physical,
    stats: &[GasStatistics],
) -> Result<Dataset, CliError> {
    let params = PhysicalParams {
        temperature: require(phys.temperature, "--temperature")?,
        particle_mass: require(phys.mass, "--mass")?,
        collision_frequency: require(phys.collision_frequency, "--collision-frequency")?,
        spin: phys.spin,
        mass_density: phys.density,
    };
    params
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let alpha = single_alpha(common)?;
    let sols = solutions(alpha, stats, common.tol)?;
    let reports = sols
        .iter()
        .map(|s| dimensional_report(&s.moments, s.v1, &params, phys.gradient))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut d = Dataset::new(None, columns(&["quantity", "unit"], &["value"], stats));
    base_provenance(&mut d, stats, common.tol);
    d.provenance("alpha", alpha)
        .provenance("boltzmann_constant", format!("{BOLTZMANN:e} J/K"))
        .provenance("reduced_planck_constant", format!("{HBAR:e} J s"))
        .provenance("temperature", format!("{:e} K", params.temperature))
        .provenance("particle_mass", format!("{:e} kg", params.particle_mass))
        .provenance(
            "collision_frequency",
            format!("{:e} 1/s", params.collision_frequency),
        )
        .provenance("spin", params.spin)
        .provenance("velocity_gradient", format!("{:e} 1/s", phys.gradient));
    type Field = fn(&DimensionalReport) -> f64;
    let quantities: [(&str, &str, Field); 12] = [
        ("number_density", "1/m^3", |r| r.number_density),
        ("mass_density", "kg/m^3", |r| r.mass_density),
        ("viscosity", "Pa s", |r| r.viscosity),
        ("thermal_speed", "m/s", |r| r.thermal_speed),
        ("thermal_length", "m", |r| r.thermal_length),
        ("mean_free_path", "m", |r| r.mean_free_path),
        ("slip_coefficient", "1", |r| r.slip_coefficient),
        ("wall_coefficient", "1", |r| r.wall_coefficient),
        ("slip_velocity", "m/s", |r| r.slip_velocity),
        ("wall_velocity", "m/s", |r| r.wall_velocity),
        ("wall_velocity_without_sqrt_pi", "m/s", |r| {
            r.wall_velocity_without_sqrt_pi
        }),
        ("beta", "s^2/m^2", |r| r.beta),
    ];
    for (name, unit, get) in quantities {
        let mut row = vec![Cell::from(name), Cell::from(unit)];
        row.extend(reports.iter().map(|r| Cell::Num(get(r))));
        d.push(row);
    }
    Ok(d)
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    provenance: std::collections::BTreeMap<String, String>,
    all_passed: bool,
    results: &'a [kramers_core::check::IdentityResult],
}

fn run_check(common: &Common) -> Result<(), CliError> {
    let stats = common.stat.unwrap_or(StatChoice::Both).list();
    let alphas = match (common.alpha, common.alpha_range) {
        (None, None) => DEFAULT_CHECK_ALPHAS.to_vec(),
        _ => alphas(common, DEFAULT_ALPHA_RANGE),
    };
    let opts = CheckOptions {
        alphas,
        statistics: stats.clone(),
        tolerance: common.tol,
        lambda2_offset: common.inject_lambda2_offset,
        ..CheckOptions::default()
    };
    let report = run_checks(&opts);
    let text = match common.format {
        Some(Format::Json) => {
            let mut d = Dataset::new(None, Vec::new());
            base_provenance(&mut d, &stats, common.tol);
            if opts.lambda2_offset != 0.0 {
                d.provenance("injected_lambda2_offset", opts.lambda2_offset);
            }
            let out = CheckOutput {
                provenance: d.provenance,
                all_passed: report.all_passed(),
                results: &report.results,
            };
            let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
            s.push('\n');
            s
        }
        _ => report.to_text(),
    };
    emit(&text, common.out.as_deref())?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

fn write_dataset(d: &Dataset, common: &Common, default: Format) -> Result<(), CliError> {
    let text = match common.format.unwrap_or(default) {
        Format::Csv => d.to_csv(),
        Format::Json => d.to_json(),
    };
    emit(&text, common.out.as_deref())?;
    Ok(())
}

fn figure(id: u8, common: &Common) -> Result<(), CliError> {
    let tol = common.tol;
    let bose = [GasStatistics::Bose];
    let both = GasStatistics::ALL;
    let alpha_grid = DEFAULT_ALPHA_RANGE.values();
    let x1_grid = DEFAULT_X1_RANGE.values();
    let (mut d, skipped) =
        match id {
            1 => slip_dataset(Some(1), &bose, &alpha_grid, tol, false),
            2 => slip_dataset(Some(2), &both, &alpha_grid, tol, false),
            4 => profile_dataset(
                Some(4),
                FIGURE_ALPHA,
                &bose,
                &x1_grid,
                tol,
                ProfileLayout::Figure,
            )?,
            5 => profile_dataset(
                Some(5),
                FIGURE_ALPHA,
                &both,
                &x1_grid,
                tol,
                ProfileLayout::Figure,
            )?,
            6 => wall_dataset(Some(6), &both, &alpha_grid, tol, false),
            3 => return Err(CliError::Usage(
                "figure 3 needs a velocity-dependent collision frequency, which is not modelled"
                    .into(),
            )),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown figure {other}; expected 1, 2, 4, 5 or 6"
                )))
            }
        };
    let grid = if matches!(id, 4 | 5) {
        DEFAULT_X1_RANGE
    } else {
        DEFAULT_ALPHA_RANGE
    };
    d.provenance("grid", grid);
    write_dataset(&d, common, Format::Csv)?;
    skipped.into_result()
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let common = &cli.common;
    validate_tol(common.tol)?;
    if !common.gv.is_finite() {
        return Err(CliError::Usage(format!(
            "--gv must be finite (got {})",
            common.gv
        )));
    }
    let stats = common.stat.unwrap_or(StatChoice::Bose).list();
    match &cli.command {
        Command::Slip => {
            let grid = alphas(common, DEFAULT_ALPHA_RANGE);
            let (d, skipped) = slip_dataset(None, &stats, &grid, common.tol, true);
            write_dataset(&d, common, Format::Csv)?;
            skipped.into_result()
        }
        Command::Wall => {
            let grid = alphas(common, DEFAULT_ALPHA_RANGE);
            let (d, skipped) = wall_dataset(None, &stats, &grid, common.tol, true);
            write_dataset(&d, common, Format::Csv)?;
            skipped.into_result()
        }
        Command::Profile => {
            let alpha = single_alpha(common)?;
            let grid = common.x1_range.unwrap_or(DEFAULT_X1_RANGE).values();
            if grid.iter().any(|&x| x < 0.0) {
                return Err(CliError::Usage("--x1-range must be nonnegative".into()));
            }
            let (d, skipped) =
                profile_dataset(None, alpha, &stats, &grid, common.tol, ProfileLayout::Full)?;
            write_dataset(&d, common, Format::Csv)?;
            skipped.into_result()
        }
        Command::Distribution => {
            if common.x1_range.is_some_and(|r| r.lo < 0.0) {
                return Err(CliError::Usage("--x1-range must be nonnegative".into()));
            }
            let (d, skipped) = distribution_dataset(common, &stats)?;
            write_dataset(&d, common, Format::Csv)?;
            skipped.into_result()
        }
        Command::Dimensional(phys) => {
            let d = dimensional_dataset(common, phys, &stats)?;
            write_dataset(&d, common, Format::Json)
        }
        Command::Figure { id } => figure(*id, common),
        Command::Check => run_check(common),
    }
}
