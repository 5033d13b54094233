use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kramers_core::GasStatistics;

#[derive(Debug, Parser)]
#[command(
    name = "kramers",
    version,
    about = "Isothermal slip of quantum Bose and Fermi gases (BGK model)"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Slip velocity V1 and slip coefficient Kv against alpha
    Slip,
    /// Wall velocity Cv(0) and wall coefficient Kv*(0) against alpha
    Wall,
    /// Mass-velocity profile Cv(x1), Kv*(x1) at one alpha
    Profile,
    /// Distribution function h(x1, mu) at one alpha
    Distribution,
    /// SI quantities for a gas with given physical parameters
    Dimensional(Physical),
    /// Dataset behind one of the figures 1, 2, 4, 5, 6
    Figure { id: u8 },
    /// Run the identity suite; exit status 1 if any identity fails
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatChoice {
    Bose,
    Fermi,
    Both,
}

impl StatChoice {
    pub fn list(self) -> Vec<GasStatistics> {
        match self {
            StatChoice::Bose => vec![GasStatistics::Bose],
            StatChoice::Fermi => vec![GasStatistics::Fermi],
            StatChoice::Both => GasStatistics::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `lo:hi:step`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:step, got `{s}`"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(format!("range `{s}` must be finite"));
        }
        if !(step > 0.0) {
            return Err(format!("range step must be > 0 (got {step})"));
        }
        if hi < lo {
            return Err(format!("range `{s}` is empty (hi < lo)"));
        }
        Ok(Self { lo, hi, step })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Gas statistics
    #[arg(long, global = true, value_enum)]
    pub stat: Option<StatChoice>,

    /// Single chemical potential ratio
    #[arg(
        long,
        global = true,
        allow_hyphen_values = true,
        conflicts_with = "alpha_range"
    )]
    pub alpha: Option<f64>,

    /// Alpha grid lo:hi:step
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha_range: Option<Range>,

    /// Distance grid lo:hi:step, in thermal lengths
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x1_range: Option<Range>,

    /// Direction-cosine grid lo:hi:step for `distribution`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu_range: Option<Range>,

    /// Dimensionless velocity gradient Gv
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = 1.0)]
    pub gv: f64,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Quadrature tolerance (absolute and relative)
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// key=value file mirroring the long flags; flags given on the command line win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Shift lambda2 inside the factorization identity (fault injection)
    #[arg(
        long,
        global = true,
        hide = true,
        allow_hyphen_values = true,
        default_value_t = 0.0
    )]
    pub inject_lambda2_offset: f64,
}

#[derive(Debug, Args)]
pub struct Physical {
    /// Temperature, K
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Particle mass, kg
    #[arg(long)]
    pub mass: Option<f64>,
    /// Collision frequency, 1/s
    #[arg(long)]
    pub collision_frequency: Option<f64>,
    /// Particle spin
    #[arg(long, default_value_t = 0.0)]
    pub spin: f64,
    /// Mass density, kg/m^3 (default: N m)
    #[arg(long)]
    pub density: Option<f64>,
    /// Velocity gradient g_v, 1/s
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub gradient: f64,
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got `{raw}`", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{}`", i + 1, key));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Adds the config file's flags to the command line, skipping any flag the
/// command line already sets.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut merged = vec![args[0].clone()];
    // Subcommand-local flags must follow the subcommand, so the config goes
    // right after it; everything before it on the command line is global.
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-') && is_subcommand(&a.to_string_lossy()))
        .map(|p| p + 1);
    let split = sub.map_or(1, |p| p + 1);
    merged.extend_from_slice(&args[1..split]);
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| {
            a.to_str()?
                .strip_prefix("--")
                .map(|f| f.split('=').next().unwrap_or(f).to_string())
        })
        .collect();
    let overridden = |key: &str| {
        let twin = match key {
            "alpha" => "alpha-range",
            "alpha-range" => "alpha",
            _ => key,
        };
        given.iter().any(|g| g == key || g == twin)
    };
    for (key, value) in parse_config(&text)? {
        if overridden(&key) {
            continue;
        }
        match value.as_str() {
            "true" => merged.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                merged.push(format!("--{key}").into());
                merged.push(value.into());
            }
        }
    }
    merged.extend_from_slice(&args[split..]);
    Ok(merged)
}

fn is_subcommand(s: &str) -> bool {
    matches!(
        s,
        "slip" | "wall" | "profile" | "distribution" | "dimensional" | "figure" | "check"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: Range = "-10:-0.1:0.1".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 100);
        assert!((v[99] + 0.1).abs() < 1e-12);
        assert_eq!("0:10:0.05".parse::<Range>().unwrap().values().len(), 201);
        assert_eq!("1:1:0.5".parse::<Range>().unwrap().values(), vec![1.0]);
        assert!("0:1:0".parse::<Range>().is_err());
        assert!("0:1:-1".parse::<Range>().is_err());
        assert!("1:0:0.1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("a:1:1".parse::<Range>().is_err());
    }

    #[test]
    fn config_parsing() {
        let c = parse_config("# sweep\nalpha_range = -4:-1:1\n\nstat=both # both gases\n").unwrap();
        assert_eq!(
            c,
            vec![
                ("alpha-range".into(), "-4:-1:1".into()),
                ("stat".into(), "both".into())
            ]
        );
        assert!(parse_config("nonsense").is_err());
        assert!(parse_config("config=x").is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let dir = std::env::temp_dir().join(format!("kramers-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sweep.cfg");
        std::fs::write(&path, "alpha_range=-3:-1:1\nstat=fermi\ntemperature=5\n").unwrap();
        let argv: Vec<OsString> = [
            "kramers",
            "dimensional",
            "--config",
            path.to_str().unwrap(),
            "--alpha",
            "-2",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let cli = Cli::try_parse_from(merge_config(argv).unwrap()).unwrap();
        assert_eq!(cli.common.alpha, Some(-2.0));
        assert_eq!(cli.common.stat, Some(StatChoice::Fermi));
        match cli.command {
            Command::Dimensional(p) => assert_eq!(p.temperature, Some(5.0)),
            other => panic!("{other:?}"),
        }
    }
}
