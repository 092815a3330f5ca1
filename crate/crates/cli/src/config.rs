//! Command-line flags, config files, and the validated run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::output::Format;

/// Default `delta` when `--delta-alpha-sq` is given without a splitter setting.
pub const DEFAULT_DELTA_FOR_SIGNAL: f64 = 0.01;
pub const DEFAULT_TARGET_RESIDUAL: f64 = 1e-10;
pub const FIG1_SIGNAL: f64 = 500.0;

#[derive(Debug, Parser)]
#[command(name = "darkport", version, about = "Photon-counting statistics in the dark port of a squeezed-light interferometer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    /// Dark-port photon-number distribution (columns n, P_n)
    Distribution,
    /// Mean and variance from the closed form, the Gaussian model and the Fock oracle
    Moments,
    /// Moments while one parameter runs over a range
    Sweep,
    /// Coefficients of the ordered-exponential form of the output state
    Disentangle,
    /// Cross-checks between the independent engines
    Validate,
    /// Distributions for r = 0, 0.3, ..., 1.5 at |delta alpha|^2 = 500, theta = 2 phi
    Fig1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    AlphaMag,
    AlphaPhase,
    R,
    Theta,
    Delta,
    Gamma,
    DeltaAlphaSq,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::AlphaMag => "alpha-mag",
            SweepParam::AlphaPhase => "alpha-phase",
            SweepParam::R => "r",
            SweepParam::Theta => "theta",
            SweepParam::Delta => "delta",
            SweepParam::Gamma => "gamma",
            SweepParam::DeltaAlphaSq => "delta-alpha-sq",
        }
    }

    pub fn is_angle(self) -> bool {
        matches!(self, SweepParam::AlphaPhase | SweepParam::Theta | SweepParam::Delta | SweepParam::Gamma)
    }
}

/// Every flag is optional so that a config file can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Coherent amplitude |alpha|
    #[arg(long, global = true)]
    pub alpha_mag: Option<f64>,
    /// Coherent phase phi
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_phase: Option<f64>,
    /// Squeezing factor r
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Squeezing phase theta
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Offset from the dark-port setting, gamma = pi/2 - delta
    #[arg(long, global = true, conflicts_with = "gamma", allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Beam-splitter angle
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Coherent photon number reaching the dark port; sets |alpha| = sqrt(value)/delta
    #[arg(long, global = true)]
    pub delta_alpha_sq: Option<f64>,
    /// Read every angle in degrees
    #[arg(long, global = true)]
    pub degrees: bool,
    /// Per-mode Fock cutoff for the oracle
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Largest accepted 1 - sum P_n
    #[arg(long, global = true)]
    pub target_residual: Option<f64>,
    /// csv (default) or json
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Write here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Flat `key = value` file using the long flag names
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Parameter varied by `sweep`
    #[arg(long, global = true, value_enum)]
    pub sweep_param: Option<SweepParam>,
    /// First sweep value
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub from: Option<f64>,
    /// Last sweep value
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub to: Option<f64>,
    /// Number of sweep points
    #[arg(long, global = true)]
    pub steps: Option<usize>,
}

/// How the splitter setting was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Splitter {
    Delta(f64),
    Gamma(f64),
}

impl Splitter {
    pub fn delta(self) -> f64 {
        match self {
            Splitter::Delta(d) => d,
            Splitter::Gamma(g) => std::f64::consts::FRAC_PI_2 - g,
        }
    }

    pub fn gamma(self) -> f64 {
        match self {
            Splitter::Delta(d) => std::f64::consts::FRAC_PI_2 - d,
            Splitter::Gamma(g) => g,
        }
    }
}

/// Physical parameters, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physical {
    pub alpha_mag: f64,
    pub alpha_phase: f64,
    pub r: f64,
    pub theta: f64,
    pub splitter: Splitter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        (0..self.steps)
            .map(|k| self.from + (self.to - self.from) * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub physical: Physical,
    /// The signal photon number when it was given directly.
    pub delta_alpha_sq: Option<f64>,
    pub degrees: bool,
    pub target_residual: f64,
    pub cutoff: Option<usize>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub sweep: Option<Sweep>,
}

impl RunConfig {
    /// Merge flags over the config file (if any) and validate.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let flags = match &cli.flags.config {
            Some(path) => merge(&cli.flags, &read_config_file(path)?)?,
            None => cli.flags.clone(),
        };
        Self::from_flags(cli.command, &flags)
    }

    pub fn from_flags(command: CommandKind, f: &Flags) -> Result<Self, CliError> {
        let angle = |v: f64| if f.degrees { v.to_radians() } else { v };

        let splitter = match (f.delta, f.gamma) {
            (Some(_), Some(_)) => return Err(CliError::usage("--delta and --gamma are mutually exclusive")),
            (Some(d), None) => Splitter::Delta(angle(d)),
            (None, Some(g)) => Splitter::Gamma(angle(g)),
            (None, None) if f.delta_alpha_sq.is_some() || command == CommandKind::Fig1 => {
                Splitter::Delta(DEFAULT_DELTA_FOR_SIGNAL)
            }
            (None, None) => Splitter::Delta(0.0),
        };
        let delta = splitter.delta();
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&delta) {
            return Err(CliError::usage(format!(
                "splitter setting out of range: need 0 <= delta <= pi/2 (0 <= gamma <= pi/2), got delta = {delta}"
            )));
        }

        let signal = match (f.delta_alpha_sq, command) {
            (Some(v), _) => Some(v),
            (None, CommandKind::Fig1) if f.alpha_mag.is_none() => Some(FIG1_SIGNAL),
            _ => None,
        };
        let alpha_mag = match (signal, f.alpha_mag) {
            (Some(_), Some(_)) => return Err(CliError::usage("--alpha-mag and --delta-alpha-sq are mutually exclusive")),
            (Some(v), None) => alpha_from_signal(v, delta)?,
            (None, Some(m)) => m,
            (None, None) => 0.0,
        };
        let alpha_phase = angle(f.alpha_phase.unwrap_or(0.0));
        let theta = match (command, f.theta) {
            // the figure fixes theta = 2 phi
            (CommandKind::Fig1, _) => 2.0 * alpha_phase,
            (_, t) => angle(t.unwrap_or(0.0)),
        };
        let physical = Physical {
            alpha_mag,
            alpha_phase,
            r: f.r.unwrap_or(0.0),
            theta,
            splitter,
        };
        check_physical(&physical)?;

        let target_residual = f.target_residual.unwrap_or(DEFAULT_TARGET_RESIDUAL);
        if !(target_residual > 0.0 && target_residual <= 1e-3) {
            return Err(CliError::usage(format!("--target-residual must lie in (0, 1e-3], got {target_residual}")));
        }

        let sweep = if command == CommandKind::Sweep {
            let param = f.sweep_param.ok_or_else(|| CliError::usage("sweep needs --sweep-param"))?;
            let (from, to) = match (f.from, f.to) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(CliError::usage("sweep needs --from and --to")),
            };
            let steps = f.steps.unwrap_or(11);
            if steps == 0 {
                return Err(CliError::usage("--steps must be at least 1"));
            }
            let conv = |v: f64| if f.degrees && param.is_angle() { v.to_radians() } else { v };
            Some(Sweep { param, from: conv(from), to: conv(to), steps })
        } else {
            None
        };

        Ok(Self {
            command,
            physical,
            delta_alpha_sq: signal,
            degrees: f.degrees,
            target_residual,
            cutoff: f.cutoff,
            format: f.format.unwrap_or_default(),
            output: f.output.clone(),
            sweep,
        })
    }
}

pub fn alpha_from_signal(signal: f64, delta: f64) -> Result<f64, CliError> {
    if !(signal.is_finite() && signal >= 0.0) {
        return Err(CliError::usage(format!("--delta-alpha-sq must be finite and non-negative, got {signal}")));
    }
    if delta == 0.0 {
        return Err(CliError::usage("--delta-alpha-sq needs a non-zero delta"));
    }
    Ok(signal.sqrt() / delta)
}

pub fn check_physical(p: &Physical) -> Result<(), CliError> {
    darkport::CoherentParams::new(p.alpha_mag, p.alpha_phase).map_err(CliError::Input)?;
    darkport::SqueezeParams::new(p.r, p.theta).map_err(CliError::Input)?;
    Ok(())
}

/// Parse a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Fill unset flags from the config map.
pub fn merge(flags: &Flags, file: &BTreeMap<String, String>) -> Result<Flags, CliError> {
    let mut out = flags.clone();
    for (key, value) in file {
        match key.as_str() {
            "alpha-mag" => fill(&mut out.alpha_mag, key, value)?,
            "alpha-phase" => fill(&mut out.alpha_phase, key, value)?,
            "r" => fill(&mut out.r, key, value)?,
            "theta" => fill(&mut out.theta, key, value)?,
            "delta" => {
                if flags.gamma.is_none() {
                    fill(&mut out.delta, key, value)?
                }
            }
            "gamma" => {
                if flags.delta.is_none() {
                    fill(&mut out.gamma, key, value)?
                }
            }
            "delta-alpha-sq" => {
                if flags.alpha_mag.is_none() {
                    fill(&mut out.delta_alpha_sq, key, value)?
                }
            }
            "degrees" => {
                if !flags.degrees {
                    out.degrees = parse_bool(key, value)?;
                }
            }
            "cutoff" => fill(&mut out.cutoff, key, value)?,
            "target-residual" => fill(&mut out.target_residual, key, value)?,
            "format" => fill(&mut out.format, key, value)?,
            "output" => fill(&mut out.output, key, value)?,
            "sweep-param" => {
                if out.sweep_param.is_none() {
                    out.sweep_param = Some(
                        SweepParam::from_str(value, true)
                            .map_err(|e| CliError::usage(format!("config key `{key}`: {e}")))?,
                    );
                }
            }
            "from" => fill(&mut out.from, key, value)?,
            "to" => fill(&mut out.to, key, value)?,
            "steps" => fill(&mut out.steps, key, value)?,
            "config" => return Err(CliError::usage("config files cannot include other config files")),
            other => return Err(CliError::usage(format!("unknown config key `{other}`"))),
        }
    }
    // a file-provided delta must not clash with a flag-provided gamma and vice versa
    if out.delta.is_some() && out.gamma.is_some() {
        return Err(CliError::usage("config sets both delta and gamma"));
    }
    if out.alpha_mag.is_some() && out.delta_alpha_sq.is_some() {
        return Err(CliError::usage("config sets both alpha-mag and delta-alpha-sq"));
    }
    Ok(out)
}

fn fill<T: std::str::FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> Result<(), CliError>
where
    T::Err: std::fmt::Display,
{
    if slot.is_none() {
        *slot = Some(
            value
                .parse()
                .map_err(|e| CliError::usage(format!("config key `{key}`: cannot parse `{value}`: {e}")))?,
        );
    }
    Ok(())
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::usage(format!("config key `{key}`: expected true or false, got `{value}`"))),
    }
}
