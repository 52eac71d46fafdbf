use crate::error::{Result, YamabeError};
use crate::geometry::BackgroundKind;
use crate::initial_data::InitialPreset;
use crate::solver::GradientTreatment;
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    /// Solve one flow and export it.
    Run,
    /// Solve two flows and check that their ordering persists.
    Compare,
    /// Solve on a ladder of balls and measure convergence.
    Exhaust,
    /// Measure radial lengths across domain sizes.
    Incompleteness,
    /// Solve one flow and check it against its barriers.
    Barriers,
}

/// Yamabe flow of rotationally symmetric conformal metrics.
#[derive(Debug, Parser)]
#[command(name = "yamabe", version, allow_negative_numbers = true)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CommandKind,
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dimension: Option<String>,
    /// `constant:C`, `flatstatic:B`, `bump:BASE,AMP,CENTER,WIDTH`,
    /// `puncturedsphere` or `powerlaw:B`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Flow expected below the main one (compare).
    #[arg(long)]
    pub lower_preset: Option<String>,
    #[arg(long)]
    pub ell: Option<String>,
    #[arg(long)]
    pub r_min: Option<String>,
    #[arg(long)]
    pub nodes: Option<String>,
    #[arg(long)]
    pub dr: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub t_final: Option<String>,
    /// Comma-separated ball radii (exhaust).
    #[arg(long)]
    pub ladder: Option<String>,
    /// Comma-separated outer radii (incompleteness).
    #[arg(long)]
    pub domains: Option<String>,
    /// Comma-separated sample times (incompleteness).
    #[arg(long)]
    pub t_samples: Option<String>,
    #[arg(long)]
    pub theta: Option<String>,
    /// `implicit` or `explicit`.
    #[arg(long)]
    pub gradient: Option<String>,
    /// Scale of the flat upper barrier (barriers).
    #[arg(long)]
    pub b_flat: Option<String>,
    #[arg(long)]
    pub tolerance: Option<String>,
    /// CSV path; the JSON report goes next to it. Printed to stdout if unset.
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub dimension: usize,
    pub preset: InitialPreset<f64>,
    pub lower_preset: Option<InitialPreset<f64>>,
    pub ell: f64,
    /// Inner radius; `0` over hyperbolic space and `1` over flat space
    /// when unset.
    pub r_min: Option<f64>,
    pub nodes: usize,
    /// Spacing for multi-domain commands; derived from `ell / nodes` when unset.
    pub dr: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub ladder: Vec<f64>,
    pub domains: Vec<f64>,
    pub t_samples: Vec<f64>,
    pub theta: f64,
    pub gradient: GradientTreatment,
    pub b_flat: Option<f64>,
    pub tolerance: f64,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "dimension",
    "preset",
    "lower_preset",
    "ell",
    "r_min",
    "nodes",
    "dr",
    "dt",
    "t_final",
    "ladder",
    "domains",
    "t_samples",
    "theta",
    "gradient",
    "b_flat",
    "tolerance",
    "output",
];

impl RunConfig {
    pub fn defaults(command: CommandKind) -> Self {
        Self {
            command,
            dimension: 3,
            preset: InitialPreset::Constant { c: 1.0 },
            lower_preset: None,
            ell: 6.0,
            r_min: None,
            nodes: 400,
            dr: None,
            dt: 1e-3,
            t_final: 0.5,
            ladder: vec![3.0, 4.0, 5.0, 6.0],
            domains: Vec::new(),
            t_samples: Vec::new(),
            theta: 1.0,
            gradient: GradientTreatment::ImplicitLinearized,
            b_flat: None,
            tolerance: crate::diagnostics::BARRIER_TOLERANCE,
            output: None,
        }
    }

    pub fn background(&self) -> BackgroundKind {
        self.preset
            .required_background()
            .unwrap_or(BackgroundKind::Hyperbolic)
    }

    pub fn inner_radius(&self) -> f64 {
        self.r_min.unwrap_or(match self.background() {
            BackgroundKind::Hyperbolic => 0.0,
            BackgroundKind::Euclidean => 1.0,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dimension" => self.dimension = number(key, value)?,
            "preset" => self.preset = parse_preset(value).map_err(|e| keyed(key, e))?,
            "lower_preset" => {
                self.lower_preset = Some(parse_preset(value).map_err(|e| keyed(key, e))?)
            }
            "ell" => self.ell = number(key, value)?,
            "r_min" => self.r_min = Some(number(key, value)?),
            "nodes" => self.nodes = number(key, value)?,
            "dr" => self.dr = Some(number(key, value)?),
            "dt" => self.dt = number(key, value)?,
            "t_final" => self.t_final = number(key, value)?,
            "ladder" => self.ladder = list(key, value)?,
            "domains" => self.domains = list(key, value)?,
            "t_samples" => self.t_samples = list(key, value)?,
            "theta" => self.theta = number(key, value)?,
            "gradient" => {
                self.gradient = match value.to_ascii_lowercase().as_str() {
                    "implicit" | "implicit_linearized" => GradientTreatment::ImplicitLinearized,
                    "explicit" => GradientTreatment::Explicit,
                    _ => {
                        return Err(YamabeError::Config(format!(
                            "`gradient`: expected `implicit` or `explicit`, got `{value}`"
                        )))
                    }
                }
            }
            "b_flat" => self.b_flat = Some(number(key, value)?),
            "tolerance" => self.tolerance = number(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => {
                return Err(YamabeError::Config(format!(
                    "unknown config key `{key}`; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. `#` starts a comment; keys may
    /// use `-` or `_`.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                YamabeError::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    line_no + 1
                ))
            })?;
            self.set(&key.trim().replace('-', "_"), value)?;
        }
        Ok(())
    }

    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut cfg = Self::defaults(cli.command);
        if let Some(path) = &cli.config {
            let text = std::fs::read_to_string(path).map_err(|e| YamabeError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            cfg.apply_file(&text)?;
        }
        let flags = [
            ("dimension", &cli.dimension),
            ("preset", &cli.preset),
            ("lower_preset", &cli.lower_preset),
            ("ell", &cli.ell),
            ("r_min", &cli.r_min),
            ("nodes", &cli.nodes),
            ("dr", &cli.dr),
            ("dt", &cli.dt),
            ("t_final", &cli.t_final),
            ("ladder", &cli.ladder),
            ("domains", &cli.domains),
            ("t_samples", &cli.t_samples),
            ("theta", &cli.theta),
            ("gradient", &cli.gradient),
            ("b_flat", &cli.b_flat),
            ("tolerance", &cli.tolerance),
            ("output", &cli.output),
        ];
        debug_assert_eq!(flags.len(), KEYS.len());
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 3 {
            return Err(YamabeError::Config(format!(
                "`dimension`: the flow is studied for m >= 3, got {}",
                self.dimension
            )));
        }
        if self.nodes < 16 {
            return Err(YamabeError::Config(format!(
                "`nodes`: need at least 16, got {}",
                self.nodes
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(YamabeError::Config(format!("`dt`: must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(YamabeError::Config(format!(
                "`t_final`: must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.ell > self.inner_radius()) {
            return Err(YamabeError::Config(format!(
                "`ell`: must exceed the inner radius {}, got {}",
                self.inner_radius(),
                self.ell
            )));
        }
        if let Some(dr) = self.dr {
            if !(dr > 0.0) {
                return Err(YamabeError::Config(format!("`dr`: must be positive, got {dr}")));
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(YamabeError::Config(format!(
                "`tolerance`: must be nonnegative, got {}",
                self.tolerance
            )));
        }
        self.preset.validate().map_err(|e| keyed("preset", e))?;
        if let Some(lower) = &self.lower_preset {
            lower.validate().map_err(|e| keyed("lower_preset", e))?;
        }
        if self.command == CommandKind::Compare && self.lower_preset.is_none() {
            return Err(YamabeError::Config("`lower_preset`: required by compare".into()));
        }
        if let Some(out) = &self.output {
            ensure_writable(out)?;
        }
        Ok(())
    }
}

fn ensure_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(YamabeError::Config(format!(
            "`output`: directory {} does not exist",
            parent.display()
        )));
    }
    let readonly = std::fs::metadata(parent)
        .map(|m| m.permissions().readonly())
        .unwrap_or(true);
    if readonly {
        return Err(YamabeError::Config(format!(
            "`output`: directory {} is not writable",
            parent.display()
        )));
    }
    Ok(())
}

fn keyed(key: &str, e: YamabeError) -> YamabeError {
    YamabeError::Config(format!("`{key}`: {e}"))
}

fn number<N: std::str::FromStr>(key: &str, value: &str) -> Result<N> {
    value
        .parse()
        .map_err(|_| YamabeError::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| number(key, v.trim()))
        .collect()
}

fn params(name: &str, value: &str, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = value
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| YamabeError::Config(format!("preset `{name}`: cannot parse `{p}`")))
        })
        .collect::<Result<_>>()?;
    if v.len() != count {
        return Err(YamabeError::Config(format!(
            "preset `{name}` takes {count} parameter(s), got {}",
            v.len()
        )));
    }
    Ok(v)
}

/// Parses `name[:p1,p2,...]`.
pub fn parse_preset(spec: &str) -> Result<InitialPreset<f64>> {
    let (name, rest) = match spec.trim().split_once(':') {
        Some((n, r)) => (n.trim().to_ascii_lowercase(), Some(r)),
        None => (spec.trim().to_ascii_lowercase(), None),
    };
    let need = |count: usize| -> Result<Vec<f64>> {
        match rest {
            Some(r) => params(&name, r, count),
            None => Err(YamabeError::Config(format!(
                "preset `{name}` takes {count} parameter(s), e.g. `{name}:1.0`"
            ))),
        }
    };
    let preset = match name.as_str() {
        "constant" => InitialPreset::Constant { c: need(1)?[0] },
        "flatstatic" => InitialPreset::FlatStatic { b: need(1)?[0] },
        "bump" => {
            let p = need(4)?;
            InitialPreset::Bump {
                base: p[0],
                amplitude: p[1],
                center: p[2],
                width: p[3],
            }
        }
        "puncturedsphere" => {
            if rest.is_some_and(|r| !r.trim().is_empty()) {
                return Err(YamabeError::Config(
                    "preset `puncturedsphere` takes no parameters".into(),
                ));
            }
            InitialPreset::PuncturedSphere
        }
        "powerlaw" => InitialPreset::PowerLaw { b: need(1)?[0] },
        _ => return Err(YamabeError::Config(format!("unknown preset `{name}`"))),
    };
    preset.validate()?;
    Ok(preset)
}

/// Inverse of [`parse_preset`].
pub fn preset_spec(preset: &InitialPreset<f64>) -> String {
    match *preset {
        InitialPreset::Constant { c } => format!("constant:{c}"),
        InitialPreset::FlatStatic { b } => format!("flatstatic:{b}"),
        InitialPreset::Bump {
            base,
            amplitude,
            center,
            width,
        } => format!("bump:{base},{amplitude},{center},{width}"),
        InitialPreset::PuncturedSphere => "puncturedsphere".into(),
        InitialPreset::PowerLaw { b } => format!("powerlaw:{b}"),
    }
}

/// Parses command-line arguments, program name first.
pub fn parse_config<I, S>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| YamabeError::Config(e.to_string()))?;
    RunConfig::from_cli(&cli)
}
