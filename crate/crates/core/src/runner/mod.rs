//! Command dispatch, run records and output files.
//!
//! Every command produces a [`RunRecord`]: the effective configuration, the
//! tool version, a timestamp, the command's results and the wall time. The
//! results payload depends only on the configuration, so two runs with the
//! same configuration serialize identical `results`.

pub mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

pub use config::{from_cli, parse_config, resolve, Cli, Command, OutputFormat, RunConfig, DEFAULT_RATIOS, OUTPUT_DIR_ENV};
pub use output::{render, write_record};

use crate::analysis::{dispersive_sweep, success_stats, SuccessStats, SweepPoint};
use crate::error::{Error, Result};
use crate::model::{closed_form_error, PhysParams, TwoQubitBasis};
use crate::protocol::{
    check_truncation, closure_check_at, prepare_singlet, run_chain_trials, sample_swap_trials,
    swap_enumerate, swap_full_cavity, ChainRunRecord, ClosureReport, FullCavitySwap, SwapRecord, Tag,
    TruncationCheck,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Tolerance used by `validate` for the closed-form and conservation checks.
pub const VALIDATE_TOL: f64 = 1e-10;

/// Angles at which `validate` compares evolution with the closed forms.
pub const ORACLE_THETAS: [f64; 5] = [
    0.0,
    std::f64::consts::FRAC_PI_8,
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_2,
    1.234,
];

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidParams(_) => EXIT_USAGE,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_FAILED,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchRow {
    pub outcome: TwoQubitBasis,
    pub probability: f64,
    pub success: bool,
    pub tag: Option<Tag>,
    /// `(re, im)` over `ee, eg, ge, gg`; absent for zero-probability branches.
    pub post_state_amplitudes: Option<[(f64, f64); 4]>,
}

impl From<&SwapRecord> for BranchRow {
    fn from(r: &SwapRecord) -> Self {
        Self {
            outcome: r.outcome,
            probability: r.probability,
            success: r.success,
            tag: r.output_tag(),
            post_state_amplitudes: r.output.as_ref().map(|p| p.amplitudes().map(|a| (a.re, a.im))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledSwap {
    pub trial: u64,
    pub outcome: TwoQubitBasis,
    pub success: bool,
    pub tag: Option<Tag>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SwapResults {
    pub theta: f64,
    /// Every branch, when run with `enumerate`.
    pub branches: Vec<BranchRow>,
    pub success_probability: Option<f64>,
    /// One entry per sampled swap otherwise.
    pub samples: Vec<SampledSwap>,
    pub counts: BTreeMap<String, u64>,
    pub stats: Option<SuccessStats>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelTotals {
    pub level: u32,
    pub attempts: u64,
    pub successes: u64,
    pub mean_attempts_per_success: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainResults {
    pub depth: u32,
    pub span: u32,
    pub stats: SuccessStats,
    pub levels: Vec<LevelTotals>,
    pub mean_pairs_consumed: f64,
    pub trials: Vec<ChainRunRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidateResults {
    pub params: PhysParams,
    pub oracle_error: f64,
    pub full_cavity: FullCavitySwap,
    pub truncation: TruncationCheck,
    pub max_excitation_drift: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResults {
    pub theta: f64,
    pub points: Vec<SweepPoint>,
    /// Conditional infidelity strictly decreasing with `Δ/g`.
    pub monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Results {
    Swap(SwapResults),
    Chain(ChainResults),
    Closure(ClosureReport),
    Validate(ValidateResults),
    Sweep(SweepResults),
}

impl Results {
    /// `false` for a closure violation or a failed validation.
    pub fn passed(&self) -> bool {
        match self {
            Results::Closure(r) => r.ok(),
            Results::Validate(v) => v.passed,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub version: String,
    pub timestamp: String,
    pub results: Results,
    pub wall_time_ms: f64,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.results.passed()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_FAILED
        }
    }

    /// The results payload alone as JSON.
    pub fn results_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.results)?)
    }
}

/// Run the configured command.
pub fn execute(config: &RunConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let timestamp = chrono::Utc::now().to_rfc3339();
    log::info!("running {} (seed {})", config.command, config.seed);
    let results = match config.command {
        Command::Swap => Results::Swap(run_swap(config)?),
        Command::Chain => Results::Chain(run_chain(config)?),
        Command::Closure => Results::Closure(closure_check_at(config.depth, config.theta)?),
        Command::Validate => Results::Validate(run_validate(config)?),
        Command::Sweep => Results::Sweep(run_sweep(config)?),
    };
    Ok(RunRecord {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
        results,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Execute and write the record; returns the file written, if any.
pub fn run(config: &RunConfig) -> Result<(RunRecord, Option<PathBuf>)> {
    let record = execute(config)?;
    let path = write_record(&record)?;
    Ok((record, path))
}

fn count(counts: &mut BTreeMap<String, u64>, outcome: TwoQubitBasis) {
    *counts.entry(outcome.as_str().to_string()).or_default() += 1;
}

fn run_swap(c: &RunConfig) -> Result<SwapResults> {
    let mut counts = BTreeMap::new();
    if c.enumerate {
        let records = swap_enumerate(&prepare_singlet(1, 2)?, &prepare_singlet(3, 4)?, c.theta)?;
        let success = records.iter().filter(|r| r.success).map(|r| r.probability).sum();
        return Ok(SwapResults {
            theta: c.theta,
            branches: records.iter().map(BranchRow::from).collect(),
            success_probability: Some(success),
            samples: Vec::new(),
            counts,
            stats: None,
        });
    }
    let records = sample_swap_trials(c.theta, c.seed, c.trials)?;
    let samples = records
        .iter()
        .zip(0..)
        .map(|(r, trial)| {
            count(&mut counts, r.outcome);
            SampledSwap {
                trial,
                outcome: r.outcome,
                success: r.success,
                tag: r.output_tag(),
            }
        })
        .collect();
    Ok(SwapResults {
        theta: c.theta,
        branches: Vec::new(),
        success_probability: None,
        samples,
        counts,
        stats: Some(success_stats(&records)?),
    })
}

fn run_chain(c: &RunConfig) -> Result<ChainResults> {
    let trials = run_chain_trials(c.depth, c.theta, c.retry_policy, c.seed, c.trials)?;
    let levels = (1..=c.depth)
        .map(|level| {
            let (attempts, successes) = trials
                .iter()
                .filter_map(|t| t.levels.get(level as usize - 1))
                .fold((0, 0), |(a, s), l| (a + l.attempts, s + l.successes));
            LevelTotals {
                level,
                attempts,
                successes,
                mean_attempts_per_success: if successes == 0 {
                    f64::NAN
                } else {
                    attempts as f64 / successes as f64
                },
            }
        })
        .collect();
    let consumed: u64 = trials.iter().map(|t| t.pairs_consumed).sum();
    Ok(ChainResults {
        depth: c.depth,
        span: 1 << (c.depth + 1),
        stats: success_stats(&trials)?,
        levels,
        mean_pairs_consumed: consumed as f64 / trials.len() as f64,
        trials,
    })
}

fn params(c: &RunConfig) -> Result<PhysParams> {
    PhysParams::from_ratios(c.g_over_omega, c.delta_over_g, c.n_max)
}

fn run_validate(c: &RunConfig) -> Result<ValidateResults> {
    let p = params(c)?;
    let oracle_error = closed_form_error(&p, &ORACLE_THETAS)?;
    let left = prepare_singlet(1, 2)?;
    let right = prepare_singlet(3, 4)?;
    let full = match swap_full_cavity(&left, &right, &p, c.theta) {
        Err(e @ Error::Truncation { .. }) => {
            log::error!("{e}");
            return Err(e);
        }
        r => r?,
    };
    let truncation = check_truncation(&left, &right, &p, c.theta)?;
    let drift = full.max_excitation_drift;
    let passed = oracle_error < VALIDATE_TOL && drift < VALIDATE_TOL && truncation.converged;
    Ok(ValidateResults {
        params: p,
        oracle_error,
        full_cavity: full,
        truncation,
        max_excitation_drift: drift,
        passed,
    })
}

fn run_sweep(c: &RunConfig) -> Result<SweepResults> {
    let template = params(c)?;
    let mut ratios = c.ratios.clone();
    ratios.sort_by(f64::total_cmp);
    let points = dispersive_sweep(&ratios, &template, c.theta)?;
    let monotone = points
        .windows(2)
        .all(|w| w[1].conditional_infidelity < w[0].conditional_infidelity);
    Ok(SweepResults {
        theta: c.theta,
        points,
        monotone,
    })
}
