//! Command-line flags, the flat `key = value` config file, and their merge into a validated [`RunConfig`].
//!
//! Flags override file values; file values override built-in defaults.

use clap::{Args, Parser, Subcommand};
use levy_fpe::{DriftScheme, Grid, NoiseSpec, SolverMethod, SolverOptions, TransientOptions};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

pub const DEFAULT_HALF_WIDTH: f64 = 10.0;
pub const DEFAULT_N: usize = 999;
pub const DEFAULT_PROMINENCE: f64 = 0.01;
pub const DEFAULT_MC_DT: f64 = 1e-3;
pub const DEFAULT_T_BURN: f64 = 20.0;
pub const DEFAULT_T_SAMPLE: f64 = 20.0;
pub const DEFAULT_PATHS: usize = 512;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BRACKET: (f64, f64) = (0.1, 1.9);
pub const DEFAULT_TOL_ALPHA: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(
    name = "levy-fpe",
    version,
    about = "Stationary densities and P-bifurcations under α-stable Lévy noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Solve one stationary density and write density.csv + report.json
    Solve(SharedArgs),
    /// Classify every (b, α, ε) point; writes diagram.csv, densities/ and plot.gp
    Sweep(SharedArgs),
    /// Locate α* for every (b, ε) pair; writes alpha_star.csv
    Bifurcate(SharedArgs),
    /// Compare a Monte Carlo histogram with the solver; writes mc_histogram.csv + comparison.json
    McCheck(SharedArgs),
}

/// Flags shared by every command. Lists are comma-separated.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// Flat key = value file; keys mirror the long flag names
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Drift parameter b (list for sweep/bifurcate)
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Stability index α in (0,2) (list for sweep)
    #[arg(long)]
    pub alpha: Option<String>,
    /// Brownian noise amplitude σ; replaces α and ε (solve only)
    #[arg(long)]
    pub sigma: Option<String>,
    /// Noise intensity ε > 0 (list for sweep/bifurcate)
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Domain half-width l [default: 10]
    #[arg(long, visible_alias = "half-width")]
    pub l: Option<String>,
    /// Number of interior nodes, odd [default: 999]
    #[arg(long)]
    pub n: Option<String>,
    /// direct | transient [default: direct]
    #[arg(long)]
    pub solver: Option<String>,
    /// auto | upwind | central drift flux [default: auto]
    #[arg(long)]
    pub scheme: Option<String>,
    /// Transient solver time step [default: 0.5]
    #[arg(long)]
    pub dt: Option<String>,
    /// Transient solver stopping tolerance on ‖Δp‖∞/dt [default: 1e-10]
    #[arg(long)]
    pub tol: Option<String>,
    /// Transient solver step limit [default: 100000]
    #[arg(long)]
    pub max_steps: Option<String>,
    /// Mode prominence threshold as a fraction of max(p) [default: 0.01]
    #[arg(long)]
    pub prominence: Option<String>,
    /// Output directory [default: .]
    #[arg(long)]
    pub out: Option<String>,
    /// Monte Carlo master seed [default: 1]
    #[arg(long)]
    pub seed: Option<String>,
    /// Monte Carlo time step [default: 0.001]
    #[arg(long)]
    pub mc_dt: Option<String>,
    /// Monte Carlo burn-in time [default: 20]
    #[arg(long)]
    pub t_burn: Option<String>,
    /// Monte Carlo sampling horizon per path [default: 20]
    #[arg(long)]
    pub t_sample: Option<String>,
    /// Monte Carlo path count [default: 512]
    #[arg(long)]
    pub paths: Option<String>,
    /// Lower end of the α bracket for bifurcate [default: 0.1]
    #[arg(long)]
    pub bracket_lo: Option<String>,
    /// Upper end of the α bracket for bifurcate [default: 1.9]
    #[arg(long)]
    pub bracket_hi: Option<String>,
    /// Bracket width at which bisection stops [default: 0.01]
    #[arg(long)]
    pub tol_alpha: Option<String>,
}

const KEYS: [&str; 22] = [
    "b",
    "alpha",
    "sigma",
    "epsilon",
    "l",
    "n",
    "solver",
    "scheme",
    "dt",
    "tol",
    "max-steps",
    "prominence",
    "out",
    "seed",
    "mc-dt",
    "t-burn",
    "t-sample",
    "paths",
    "bracket-lo",
    "bracket-hi",
    "tol-alpha",
    "half-width",
];

impl SharedArgs {
    fn flag(&self, key: &str) -> Option<&String> {
        match key {
            "b" => self.b.as_ref(),
            "alpha" => self.alpha.as_ref(),
            "sigma" => self.sigma.as_ref(),
            "epsilon" => self.epsilon.as_ref(),
            "l" | "half-width" => self.l.as_ref(),
            "n" => self.n.as_ref(),
            "solver" => self.solver.as_ref(),
            "scheme" => self.scheme.as_ref(),
            "dt" => self.dt.as_ref(),
            "tol" => self.tol.as_ref(),
            "max-steps" => self.max_steps.as_ref(),
            "prominence" => self.prominence.as_ref(),
            "out" => self.out.as_ref(),
            "seed" => self.seed.as_ref(),
            "mc-dt" => self.mc_dt.as_ref(),
            "t-burn" => self.t_burn.as_ref(),
            "t-sample" => self.t_sample.as_ref(),
            "paths" => self.paths.as_ref(),
            "bracket-lo" => self.bracket_lo.as_ref(),
            "bracket-hi" => self.bracket_hi.as_ref(),
            "tol-alpha" => self.tol_alpha.as_ref(),
            _ => None,
        }
    }
}

/// A parse or validation failure naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn from_core(field: &str, e: levy_fpe::Error) -> ConfigError {
    match e {
        levy_fpe::Error::InvalidParameter { message, .. } => ConfigError::new(field, message),
        other => ConfigError::new(field, other.to_string()),
    }
}

/// Parses the flat config format: `key = value` lines, `#` or `;` comments, `[section]` headers ignored.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::new(
                "config",
                format!("line {}: expected key = value", lineno + 1),
            ));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::new(
                &key,
                format!("unknown key {key:?} on line {}", lineno + 1),
            ));
        }
        let key = if key == "half-width" { "l".to_string() } else { key };
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Bifurcate,
    McCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Bifurcate => "bifurcate",
            Command::McCheck => "mc-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub dt: f64,
    pub t_burn: f64,
    pub t_sample: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub b: Vec<f64>,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub sigma: Option<f64>,
    pub grid: Grid,
    pub solver: SolverOptions,
    pub prominence: f64,
    pub out: PathBuf,
    pub mc: McSettings,
    pub bracket: (f64, f64),
    pub tol_alpha: f64,
}

impl RunConfig {
    /// Noise of a single-point command.
    pub fn noise(&self) -> NoiseSpec {
        match self.sigma {
            Some(sigma) => NoiseSpec::Gaussian { sigma },
            None => NoiseSpec::Stable {
                alpha: self.alpha[0],
                epsilon: self.epsilon[0],
            },
        }
    }
}

struct Lookup<'a> {
    flags: &'a SharedArgs,
    file: BTreeMap<String, String>,
}

impl Lookup<'_> {
    fn raw(&self, key: &str) -> Option<String> {
        self.flags.flag(key).cloned().or_else(|| self.file.get(key).cloned())
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key).map(|s| parse_real(key, &s)).transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.raw(key)
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| ConfigError::new(key, format!("{key} must be a non-negative integer, got {s:?}")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(s) => s.split(',').map(|v| parse_real(key, v)).collect(),
        }
    }
}

fn parse_real(key: &str, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| ConfigError::new(key, format!("{key} must be a number, got {:?}", s.trim())))?;
    if !v.is_finite() {
        return Err(ConfigError::new(key, format!("{key} must be finite, got {v}")));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("{key} must be positive, got {v}")))
    }
}

/// Merges flags over the optional config file and validates everything for `command`.
pub fn parse_config(command: Command, flags: &SharedArgs) -> Result<RunConfig, ConfigError> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    let look = Lookup { flags, file };

    let half_width = look.real("l")?.unwrap_or(DEFAULT_HALF_WIDTH);
    let n = look.count("n")?.unwrap_or(DEFAULT_N);
    let grid = Grid::new(half_width, n).map_err(|e| {
        let field = match &e {
            levy_fpe::Error::InvalidParameter { name, .. } if name.contains("half") => "l",
            _ => "n",
        };
        from_core(field, e)
    })?;

    let b = look.list("b")?;
    let alpha = look.list("alpha")?;
    let epsilon = look.list("epsilon")?;
    let sigma = look.real("sigma")?;
    for &a in &alpha {
        NoiseSpec::stable(a, 1.0).map_err(|e| from_core("alpha", e))?;
    }
    for &e in &epsilon {
        positive("epsilon", e)?;
    }
    if let Some(s) = sigma {
        positive("sigma", s)?;
    }

    let transient_keys = ["dt", "tol", "max-steps"];
    let method = match look.raw("solver").as_deref().map(str::trim) {
        None | Some("direct") => {
            if let Some(k) = transient_keys.iter().find(|k| look.raw(k).is_some()) {
                return Err(ConfigError::new(k, format!("{k} only applies to --solver transient")));
            }
            SolverMethod::Direct
        }
        Some("transient") => {
            let defaults = TransientOptions::default();
            let dt = positive("dt", look.real("dt")?.unwrap_or(defaults.dt))?;
            let tol = positive("tol", look.real("tol")?.unwrap_or(defaults.tol))?;
            let max_steps = look.count("max-steps")?.unwrap_or(defaults.max_steps);
            if max_steps == 0 {
                return Err(ConfigError::new("max-steps", "max-steps must be at least 1"));
            }
            SolverMethod::Transient(TransientOptions { dt, tol, max_steps })
        }
        Some(other) => {
            return Err(ConfigError::new(
                "solver",
                format!("solver must be direct or transient, got {other:?}"),
            ))
        }
    };
    let scheme = match look.raw("scheme").as_deref().map(str::trim) {
        None | Some("auto") => DriftScheme::Auto,
        Some("upwind") => DriftScheme::Upwind,
        Some("central") => DriftScheme::Central,
        Some(other) => {
            return Err(ConfigError::new(
                "scheme",
                format!("scheme must be auto, upwind or central, got {other:?}"),
            ))
        }
    };

    let prominence = look.real("prominence")?.unwrap_or(DEFAULT_PROMINENCE);
    if !(prominence > 0.0 && prominence < 1.0) {
        return Err(ConfigError::new(
            "prominence",
            format!("prominence must lie in (0,1), got {prominence}"),
        ));
    }

    let mc = McSettings {
        dt: positive("mc-dt", look.real("mc-dt")?.unwrap_or(DEFAULT_MC_DT))?,
        t_burn: look.real("t-burn")?.unwrap_or(DEFAULT_T_BURN),
        t_sample: look.real("t-sample")?.unwrap_or(DEFAULT_T_SAMPLE),
        n_paths: look.count("paths")?.unwrap_or(DEFAULT_PATHS),
        seed: match look.raw("seed") {
            None => DEFAULT_SEED,
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| ConfigError::new("seed", format!("seed must be a non-negative integer, got {s:?}")))?,
        },
    };
    if mc.t_burn < 0.0 {
        return Err(ConfigError::new(
            "t-burn",
            format!("t-burn must be non-negative, got {}", mc.t_burn),
        ));
    }
    if mc.t_sample < 0.0 {
        return Err(ConfigError::new(
            "t-sample",
            format!("t-sample must be non-negative, got {}", mc.t_sample),
        ));
    }
    if mc.n_paths == 0 {
        return Err(ConfigError::new("paths", "paths must be at least 1"));
    }

    let bracket = (
        look.real("bracket-lo")?.unwrap_or(DEFAULT_BRACKET.0),
        look.real("bracket-hi")?.unwrap_or(DEFAULT_BRACKET.1),
    );
    NoiseSpec::stable(bracket.0, 1.0).map_err(|e| from_core("bracket-lo", e))?;
    NoiseSpec::stable(bracket.1, 1.0).map_err(|e| from_core("bracket-hi", e))?;
    let tol_alpha = positive("tol-alpha", look.real("tol-alpha")?.unwrap_or(DEFAULT_TOL_ALPHA))?;

    let require = |key: &str, values: &Vec<f64>| -> Result<(), ConfigError> {
        if values.is_empty() {
            Err(ConfigError::new(
                key,
                format!("{key} is required for {}", command.name()),
            ))
        } else {
            Ok(())
        }
    };
    let single = |key: &str, values: &Vec<f64>| -> Result<(), ConfigError> {
        require(key, values)?;
        if values.len() > 1 {
            return Err(ConfigError::new(
                key,
                format!("{} takes a single {key}", command.name()),
            ));
        }
        Ok(())
    };
    match command {
        Command::Solve => {
            single("b", &b)?;
            if sigma.is_some() {
                if !alpha.is_empty() || !epsilon.is_empty() {
                    return Err(ConfigError::new(
                        "sigma",
                        "sigma selects Brownian noise; drop alpha and epsilon",
                    ));
                }
            } else {
                single("alpha", &alpha)?;
                single("epsilon", &epsilon)?;
            }
        }
        Command::McCheck => {
            if sigma.is_some() {
                return Err(ConfigError::new("sigma", "mc-check needs α-stable noise"));
            }
            single("b", &b)?;
            single("alpha", &alpha)?;
            single("epsilon", &epsilon)?;
        }
        Command::Sweep => {
            if sigma.is_some() {
                return Err(ConfigError::new("sigma", "sweep needs α-stable noise"));
            }
            require("b", &b)?;
            require("alpha", &alpha)?;
            require("epsilon", &epsilon)?;
        }
        Command::Bifurcate => {
            if sigma.is_some() {
                return Err(ConfigError::new("sigma", "bifurcate needs α-stable noise"));
            }
            if !alpha.is_empty() {
                return Err(ConfigError::new(
                    "alpha",
                    "bifurcate searches over α; use bracket-lo/bracket-hi",
                ));
            }
            require("b", &b)?;
            require("epsilon", &epsilon)?;
            if bracket.0 >= bracket.1 {
                return Err(ConfigError::new(
                    "bracket-lo",
                    format!(
                        "bracket-lo must be below bracket-hi, got ({}, {})",
                        bracket.0, bracket.1
                    ),
                ));
            }
        }
    }

    Ok(RunConfig {
        command,
        b,
        alpha,
        epsilon,
        sigma,
        grid,
        solver: SolverOptions { method, scheme },
        prominence,
        out: PathBuf::from(look.raw("out").unwrap_or_else(|| ".".to_string())),
        mc,
        bracket,
        tol_alpha,
    })
}
