//! Run configuration: defaults, an optional `key = value` file, then CLI
//! flags, each layer overriding the one before.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{RetryPolicy, DEFAULT_THETA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// One swap of two singlets (enumerated or sampled).
    Swap,
    /// Monte Carlo repeater-chain runs.
    Chain,
    /// Exhaustive closure check of the output states.
    Closure,
    /// Closed-form oracle and full-cavity checks at one detuning.
    Validate,
    /// Full-cavity swaps over a list of detunings.
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

macro_rules! impl_str {
    ($t:ty, $key:literal) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                <$t as ValueEnum>::from_str(s, true).map_err(|_| Error::Config {
                    key: $key.into(),
                    message: format!("unknown value `{s}`"),
                })
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = self.to_possible_value().expect("no skipped variants");
                f.write_str(v.get_name())
            }
        }
    };
}

impl_str!(Command, "command");
impl_str!(OutputFormat, "format");

/// Environment variable naming a directory for output files.
pub const OUTPUT_DIR_ENV: &str = "DQD_REPEATER_OUTPUT_DIR";

pub const DEFAULT_RATIOS: [f64; 5] = [5.0, 10.0, 20.0, 40.0, 80.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Exchange angle `λt`.
    pub theta: f64,
    pub delta_over_g: f64,
    pub g_over_omega: f64,
    pub n_max: usize,
    pub depth: u32,
    pub trials: u64,
    pub seed: u64,
    pub retry_policy: RetryPolicy,
    pub enumerate: bool,
    pub ratios: Vec<f64>,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            theta: DEFAULT_THETA,
            delta_over_g: 20.0,
            g_over_omega: 0.01,
            n_max: 8,
            depth: 2,
            trials: 10_000,
            seed: 0,
            retry_policy: RetryPolicy::DiscardBoth,
            enumerate: false,
            ratios: DEFAULT_RATIOS.to_vec(),
            format: OutputFormat::Json,
            output: None,
        }
    }

    fn check(self) -> Result<Self> {
        let bad = |key: &str, message: String| Error::Config {
            key: key.into(),
            message,
        };
        if !self.theta.is_finite() {
            return Err(bad("theta", format!("must be finite, got {}", self.theta)));
        }
        if !self.delta_over_g.is_finite() || self.delta_over_g == 0.0 {
            return Err(bad("delta_over_g", format!("must be finite and nonzero, got {}", self.delta_over_g)));
        }
        if !(self.g_over_omega > 0.0 && self.g_over_omega.is_finite()) {
            return Err(bad("g_over_omega", format!("must be positive, got {}", self.g_over_omega)));
        }
        if self.n_max < 1 {
            return Err(bad("n_max", "must be at least 1".into()));
        }
        if self.depth < 1 {
            return Err(bad("depth", "must be at least 1".into()));
        }
        if self.trials < 1 {
            return Err(bad("trials", "must be at least 1".into()));
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|r| !(*r >= 2.0 && r.is_finite())) {
            return Err(bad("ratios", format!("need finite ratios ≥ 2, got {:?}", self.ratios)));
        }
        Ok(self)
    }

    /// Apply one `key = value` setting.
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| Error::Config {
                key: key.into(),
                message: format!("cannot parse `{value}`"),
            })
        }
        match key {
            "command" => self.command = value.trim().parse()?,
            "theta" => self.theta = parse(key, value)?,
            "delta_over_g" => self.delta_over_g = parse(key, value)?,
            "g_over_omega" => self.g_over_omega = parse(key, value)?,
            "n_max" => self.n_max = parse(key, value)?,
            "depth" => self.depth = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "retry_policy" => self.retry_policy = value.trim().parse()?,
            "enumerate" => self.enumerate = parse(key, value)?,
            "ratios" => {
                self.ratios = value
                    .split(',')
                    .map(|v| parse::<f64>(key, v))
                    .collect::<Result<_>>()?
            }
            "format" => self.format = value.trim().parse()?,
            "output" => self.output = Some(PathBuf::from(value.trim())),
            _ => {
                return Err(Error::Config {
                    key: key.into(),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }
}

/// Parse a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
            key: format!("line {}", n + 1),
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "dqd-repeater", version, about = "Double-quantum-dot repeater simulator")]
pub struct Cli {
    /// Subcommand; may instead come from the config file. Defaults to `swap`.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// `key = value` file with defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exchange angle λt.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_over_g: Option<String>,
    #[arg(long)]
    pub g_over_omega: Option<String>,
    /// Cavity Fock cutoff.
    #[arg(long)]
    pub n_max: Option<String>,
    /// Chain or closure depth; a depth-k pair spans 2^(k+1) dots.
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// `discard-both` or `bounded-retries:N`.
    #[arg(long)]
    pub retry_policy: Option<String>,
    /// List every swap branch instead of sampling.
    #[arg(long)]
    pub enumerate: bool,
    /// Comma-separated Δ/g values for `sweep`.
    #[arg(long)]
    pub ratios: Option<String>,
    #[arg(long)]
    pub format: Option<String>,
    /// Output file; stdout when absent and no output directory is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Cli {
    fn settings(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        };
        push("theta", &self.theta);
        push("delta_over_g", &self.delta_over_g);
        push("g_over_omega", &self.g_over_omega);
        push("n_max", &self.n_max);
        push("depth", &self.depth);
        push("trials", &self.trials);
        push("seed", &self.seed);
        push("retry_policy", &self.retry_policy);
        push("ratios", &self.ratios);
        push("format", &self.format);
        out
    }
}

/// Build a [`RunConfig`] from parsed flags and the contents of the config
/// file named by `--config`, if any.
pub fn resolve(cli: &Cli, file: Option<&str>) -> Result<RunConfig> {
    let file = file.map(parse_config_file).transpose()?.unwrap_or_default();
    let command = match (cli.command, file.get("command")) {
        (Some(c), _) => c,
        (None, Some(c)) => c.parse()?,
        (None, None) => Command::Swap,
    };
    let mut cfg = RunConfig::new(command);
    for (k, v) in &file {
        if k != "command" {
            cfg.set(k, v)?;
        }
    }
    for (k, v) in cli.settings() {
        cfg.set(k, &v)?;
    }
    if cli.enumerate {
        cfg.enumerate = true;
    }
    if let Some(o) = &cli.output {
        cfg.output = Some(o.clone());
    }
    cfg.check()
}

/// Parse command-line arguments (program name first), reading the
/// `--config` file when given.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config {
        key: "arguments".into(),
        message: e.to_string(),
    })?;
    from_cli(&cli)
}

/// [`resolve`] with the `--config` file read from disk.
pub fn from_cli(cli: &Cli) -> Result<RunConfig> {
    let text = cli.config.as_ref().map(std::fs::read_to_string).transpose()?;
    resolve(cli, text.as_deref())
}
