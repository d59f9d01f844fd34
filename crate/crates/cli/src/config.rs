//! Command-line and config-file parsing into a validated [`RunConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use darboux2l::numerics::TimeGrid;
use darboux2l::Complex64;
use serde::Deserialize;

use crate::CliError;

pub const TOL_ENV: &str = "DARBOUX2L_TOL";
pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// `abs_tol = ABS_PER_REL * rel_tol` when only a relative tolerance is given.
const ABS_PER_REL: f64 = 1e-2;
pub const DEFAULT_GRID: &str = "-5:5:4001";
pub const DEFAULT_EPSILONS: [f64; 3] = [0.5, 1.0, 2.0];
pub const MIN_POINTS: usize = 9;

#[derive(Parser, Debug)]
#[command(name = "darboux2l", version, about = "Darboux-transformed two-level systems: tables, transforms and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandLine,
}

#[derive(Subcommand, Debug)]
pub enum CommandLine {
    /// Tabulate a potential f(t)
    Potential(Opts),
    /// Tabulate a closed-form seed solution and check it
    Seed(Opts),
    /// Apply one of the closed-form transformations
    Transform(Opts),
    /// Iterate the transformation over a list of radii
    Chain(Opts),
    /// Run the full check suite on a preset family
    Verify(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Constant,
    Sech,
    Tanh,
    Case1,
    Case2,
    Case3,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Sech => "sech",
            Family::Tanh => "tanh",
            Family::Case1 => "case1",
            Family::Case2 => "case2",
            Family::Case3 => "case3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Case1,
    Case2,
    Case3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKind {
    Constant,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Opts {
    /// TOML file with default values for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Seed family of a chain
    #[arg(long, value_enum)]
    pub seed: Option<SeedKind>,
    #[arg(long = "R0", value_name = "R0", allow_negative_numbers = true)]
    pub big_r0: Option<f64>,
    #[arg(long = "R1", value_name = "R1", allow_negative_numbers = true)]
    pub big_r1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r1: Option<f64>,
    /// Time scale of the sech and tanh families
    #[arg(long = "T", value_name = "T", allow_negative_numbers = true)]
    pub t_scale: Option<f64>,
    /// Radius of the tanh-step seed (spectral value -iR/T)
    #[arg(long = "R", value_name = "R", allow_negative_numbers = true)]
    pub radius: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Constant-seed amplitudes, complex literals such as `1-0.5i`
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    /// Weights of the two hypergeometric branches of a general tanh seed
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<String>,
    /// Spectral values, comma separated complex literals (`0.5,1,0-2i`)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Vec<String>,
    /// Time grid `start:end:count`
    #[arg(long = "t", value_name = "START:END:COUNT", allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Chain radii, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub radii: Vec<f64>,
    /// Per-step constants of a chain (phase for constant seeds, p for tanh seeds)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub constants: Vec<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Corrupt the computed data so every check must fail
    #[arg(long)]
    pub negative_control: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ComplexLiteral {
    Number(f64),
    Text(String),
}

impl ComplexLiteral {
    fn text(&self) -> String {
        match self {
            ComplexLiteral::Number(x) => x.to_string(),
            ComplexLiteral::Text(s) => s.clone(),
        }
    }
}

/// Keys of a config file; names match the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    family: Option<Family>,
    preset: Option<Preset>,
    seed: Option<SeedKind>,
    #[serde(rename = "R0")]
    big_r0: Option<f64>,
    #[serde(rename = "R1")]
    big_r1: Option<f64>,
    c0: Option<f64>,
    gamma0: Option<f64>,
    gamma1: Option<f64>,
    r0: Option<f64>,
    r1: Option<f64>,
    #[serde(rename = "T")]
    t_scale: Option<f64>,
    #[serde(rename = "R")]
    radius: Option<f64>,
    p: Option<f64>,
    p0: Option<ComplexLiteral>,
    q0: Option<ComplexLiteral>,
    c1: Option<ComplexLiteral>,
    c2: Option<ComplexLiteral>,
    eps: Option<Vec<ComplexLiteral>>,
    #[serde(rename = "t")]
    grid: Option<String>,
    radii: Option<Vec<f64>>,
    constants: Option<Vec<f64>>,
    #[serde(rename = "rel-tol")]
    rel_tol: Option<f64>,
    #[serde(rename = "abs-tol")]
    abs_tol: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    #[serde(rename = "negative-control")]
    negative_control: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config file {}: {}", path.display(), e.message())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Potential,
    Seed,
    Transform,
    Chain,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Potential => "potential",
            Command::Seed => "seed",
            Command::Transform => "transform",
            Command::Chain => "chain",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::uniform(self.t_start, self.t_end, self.n_points).expect("validated grid")
    }
}

/// Fully merged and validated configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// `--family`, or `--preset` for `verify`.
    pub family: Option<Family>,
    pub seed: Option<SeedKind>,
    /// Real parameters that were set, keyed by flag name.
    pub params: BTreeMap<&'static str, f64>,
    /// Complex amplitudes that were set, keyed by flag name.
    pub amplitudes: BTreeMap<&'static str, Complex64>,
    pub epsilons: Vec<Complex64>,
    /// `--eps` given explicitly (not defaulted).
    pub epsilons_given: bool,
    pub grid: GridSpec,
    pub radii: Vec<f64>,
    pub constants: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub negative_control: bool,
}

impl RunConfig {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<f64, CliError> {
        self.param(name).ok_or_else(|| {
            CliError::Usage(format!(
                "--{name} is required for {} {}",
                self.command.name(),
                self.family.map(Family::name).or(self.seed.map(seed_name)).unwrap_or("")
            ))
        })
    }

    pub fn amplitude(&self, name: &str, default: Complex64) -> Complex64 {
        self.amplitudes.get(name).copied().unwrap_or(default)
    }
}

fn seed_name(s: SeedKind) -> &'static str {
    match s {
        SeedKind::Constant => "constant",
        SeedKind::Tanh => "tanh",
    }
}

/// Parses `start:end:count`.
pub fn parse_grid(text: &str) -> Result<GridSpec, CliError> {
    let bad = |why: &str| CliError::Usage(format!("invalid grid '{text}': {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, count] = parts[..] else {
        return Err(bad("expected start:end:count"));
    };
    let t_start: f64 = start.trim().parse().map_err(|_| bad("start is not a number"))?;
    let t_end: f64 = end.trim().parse().map_err(|_| bad("end is not a number"))?;
    let n_points: usize = count.trim().parse().map_err(|_| bad("count is not a positive integer"))?;
    if !(t_start.is_finite() && t_end.is_finite()) {
        return Err(bad("bounds must be finite"));
    }
    if t_start >= t_end {
        return Err(bad("start must be below end"));
    }
    if n_points < 2 {
        return Err(bad("count must be at least 2"));
    }
    Ok(GridSpec { t_start, t_end, n_points })
}

/// Parses a complex literal: `1.5`, `2i`, `-i`, `0-2i`, `1e-3+4.5e2i`.
pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("invalid complex number '{text}'"));
    let s = text.trim();
    let number = |t: &str| t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(number(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    // last sign that is not part of an exponent splits real and imaginary parts
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_text, im_text) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_text.is_empty() { 0.0 } else { number(re_text)? };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => number(t)?,
    };
    Ok(Complex64::new(re, im))
}

fn tolerance(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {value}")))
    }
}

/// Merges flags over the config file over `DARBOUX2L_TOL` over built-in
/// defaults, then validates.
pub fn parse_config(cli: Cli, env_tol: Option<&str>) -> Result<RunConfig, CliError> {
    let (command, opts) = match cli.command {
        CommandLine::Potential(o) => (Command::Potential, o),
        CommandLine::Seed(o) => (Command::Seed, o),
        CommandLine::Transform(o) => (Command::Transform, o),
        CommandLine::Chain(o) => (Command::Chain, o),
        CommandLine::Verify(o) => (Command::Verify, o),
    };
    let file = match &opts.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let preset = opts.preset.or(file.preset).map(|p| match p {
        Preset::Case1 => Family::Case1,
        Preset::Case2 => Family::Case2,
        Preset::Case3 => Family::Case3,
    });
    let family = opts.family.or(file.family);
    let family = match command {
        Command::Verify => {
            if family.is_some() {
                return Err(CliError::Usage("verify takes --preset, not --family".into()));
            }
            Some(preset.ok_or_else(|| CliError::Usage("verify requires --preset case1|case2|case3".into()))?)
        }
        Command::Chain => None,
        _ => {
            if preset.is_some() {
                return Err(CliError::Usage(format!("--preset is only valid for verify, not {}", command.name())));
            }
            Some(family.ok_or_else(|| CliError::Usage(format!("{} requires --family", command.name())))?)
        }
    };
    let seed = opts.seed.or(file.seed);
    if command == Command::Chain && seed.is_none() {
        return Err(CliError::Usage("chain requires --seed constant|tanh".into()));
    }

    let mut params = BTreeMap::new();
    let real_pairs: [(&'static str, Option<f64>, Option<f64>); 10] = [
        ("R0", opts.big_r0, file.big_r0),
        ("R1", opts.big_r1, file.big_r1),
        ("c0", opts.c0, file.c0),
        ("gamma0", opts.gamma0, file.gamma0),
        ("gamma1", opts.gamma1, file.gamma1),
        ("r0", opts.r0, file.r0),
        ("r1", opts.r1, file.r1),
        ("T", opts.t_scale, file.t_scale),
        ("R", opts.radius, file.radius),
        ("p", opts.p, file.p),
    ];
    for (name, flag, from_file) in real_pairs {
        if let Some(v) = flag.or(from_file) {
            if !v.is_finite() {
                return Err(CliError::Usage(format!("--{name} must be finite, got {v}")));
            }
            params.insert(name, v);
        }
    }

    let mut amplitudes = BTreeMap::new();
    let complex_pairs: [(&'static str, Option<String>, Option<ComplexLiteral>); 4] = [
        ("p0", opts.p0, file.p0),
        ("q0", opts.q0, file.q0),
        ("c1", opts.c1, file.c1),
        ("c2", opts.c2, file.c2),
    ];
    for (name, flag, from_file) in complex_pairs {
        if let Some(text) = flag.or(from_file.map(|c| c.text())) {
            amplitudes.insert(name, parse_complex(&text)?);
        }
    }

    let eps_text: Option<Vec<String>> = if opts.eps.is_empty() {
        file.eps.map(|v| v.iter().map(ComplexLiteral::text).collect())
    } else {
        Some(opts.eps)
    };
    let epsilons_given = eps_text.is_some();
    let epsilons = match eps_text {
        Some(list) => list.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?,
        None => DEFAULT_EPSILONS.iter().map(|&e| Complex64::new(e, 0.0)).collect(),
    };

    let grid = parse_grid(opts.grid.as_deref().or(file.grid.as_deref()).unwrap_or(DEFAULT_GRID))?;
    if grid.n_points < MIN_POINTS {
        return Err(CliError::Usage(format!(
            "grid has {} points; at least {MIN_POINTS} are required",
            grid.n_points
        )));
    }

    let env_rel = env_tol
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}='{s}' is not a number")))
                .and_then(|v| tolerance(TOL_ENV, v))
        })
        .transpose()?;
    let rel_tol = tolerance(
        "--rel-tol",
        opts.rel_tol.or(file.rel_tol).or(env_rel).unwrap_or(DEFAULT_REL_TOL),
    )?;
    let abs_default = if opts.rel_tol.or(file.rel_tol).or(env_rel).is_some() {
        ABS_PER_REL * rel_tol
    } else {
        DEFAULT_ABS_TOL
    };
    let abs_tol = tolerance("--abs-tol", opts.abs_tol.or(file.abs_tol).unwrap_or(abs_default))?;

    let radii = if opts.radii.is_empty() { file.radii.unwrap_or_default() } else { opts.radii };
    let constants = if opts.constants.is_empty() {
        file.constants.unwrap_or_default()
    } else {
        opts.constants
    };

    Ok(RunConfig {
        command,
        family,
        seed,
        params,
        amplitudes,
        epsilons,
        epsilons_given,
        grid,
        radii,
        constants,
        rel_tol,
        abs_tol,
        output: opts.output.or(file.output),
        format: opts.format.or(file.format).unwrap_or_default(),
        negative_control: opts.negative_control || file.negative_control.unwrap_or(false),
    })
}
