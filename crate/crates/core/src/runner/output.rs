//! JSON and CSV rendering of run records.
//!
//! JSON carries full `f64` precision. CSV holds one row per branch, trial,
//! case or sweep point with a header row; reals are written with 15
//! significant digits and complex amplitudes as `re`/`im` column pairs.

use std::path::{Path, PathBuf};

use super::config::{OutputFormat, OUTPUT_DIR_ENV};
use super::{Results, RunRecord};
use crate::error::{Error, Result};
use crate::protocol::{PairState, Tag};

const AMP_COLUMNS: [&str; 8] = ["ee_re", "ee_im", "eg_re", "eg_im", "ge_re", "ge_im", "gg_re", "gg_im"];

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn tag(t: Option<Tag>) -> String {
    t.map_or(String::new(), |t| t.as_str().to_string())
}

fn amps(p: Option<[(f64, f64); 4]>) -> Vec<String> {
    match p {
        Some(a) => a.iter().flat_map(|(re, im)| [num(*re), num(*im)]).collect(),
        None => vec![String::new(); 8],
    }
}

fn pair_amps(p: Option<&PairState>) -> Vec<String> {
    amps(p.map(|p| p.amplitudes().map(|a| (a.re, a.im))))
}

fn table(results: &Results) -> (Vec<String>, Vec<Vec<String>>) {
    let head = |cols: &[&str]| cols.iter().map(|c| c.to_string()).collect::<Vec<_>>();
    match results {
        Results::Swap(s) if !s.branches.is_empty() => {
            let mut h = head(&["outcome", "probability", "success", "tag"]);
            h.extend(head(&AMP_COLUMNS));
            let rows = s
                .branches
                .iter()
                .map(|b| {
                    let mut r = vec![
                        b.outcome.to_string(),
                        num(b.probability),
                        b.success.to_string(),
                        tag(b.tag),
                    ];
                    r.extend(amps(b.post_state_amplitudes));
                    r
                })
                .collect();
            (h, rows)
        }
        Results::Swap(s) => {
            let h = head(&["trial", "outcome", "success", "tag"]);
            let rows = s
                .samples
                .iter()
                .map(|t| vec![t.trial.to_string(), t.outcome.to_string(), t.success.to_string(), tag(t.tag)])
                .collect();
            (h, rows)
        }
        Results::Chain(c) => {
            let mut h = head(&["trial", "completed", "pairs_consumed", "final_tag", "final_fidelity"]);
            for level in 1..=c.depth {
                h.push(format!("level{level}_attempts"));
                h.push(format!("level{level}_successes"));
            }
            h.extend(head(&AMP_COLUMNS));
            let rows = c
                .trials
                .iter()
                .zip(0u64..)
                .map(|(t, i)| {
                    let mut r = vec![
                        i.to_string(),
                        t.completed.to_string(),
                        t.pairs_consumed.to_string(),
                        tag(t.final_tag),
                        num(t.final_fidelity),
                    ];
                    for level in 0..c.depth as usize {
                        let l = t.levels.get(level);
                        r.push(l.map_or(0, |l| l.attempts).to_string());
                        r.push(l.map_or(0, |l| l.successes).to_string());
                    }
                    r.extend(pair_amps(t.final_pair.as_ref()));
                    r
                })
                .collect();
            (h, rows)
        }
        Results::Closure(report) => {
            let mut h = head(&[
                "level",
                "left_tag",
                "right_tag",
                "outcome",
                "probability",
                "success",
                "output_tag",
                "fidelity",
                "concurrence",
            ]);
            h.extend(head(&AMP_COLUMNS));
            let rows = report
                .levels
                .iter()
                .flat_map(|l| &l.rows)
                .map(|row| {
                    let mut r = vec![
                        row.level.to_string(),
                        row.left_tag.to_string(),
                        row.right_tag.to_string(),
                        row.outcome.to_string(),
                        num(row.probability),
                        row.success.to_string(),
                        tag(row.output_tag),
                        num(row.fidelity),
                        num(row.concurrence),
                    ];
                    r.extend(pair_amps(row.output.as_ref()));
                    r
                })
                .collect();
            (h, rows)
        }
        Results::Validate(v) => {
            let h = head(&[
                "outcome",
                "probability",
                "effective_probability",
                "success",
                "fidelity",
                "oracle_error",
                "max_excitation_drift",
                "truncation_fidelity",
            ]);
            let rows = v
                .full_cavity
                .branches
                .iter()
                .map(|b| {
                    vec![
                        b.outcome.to_string(),
                        num(b.probability),
                        num(b.effective_probability),
                        b.success.to_string(),
                        b.fidelity.map_or(String::new(), num),
                        num(v.oracle_error),
                        num(v.max_excitation_drift),
                        num(v.truncation.fidelity),
                    ]
                })
                .collect();
            (h, rows)
        }
        Results::Sweep(s) => {
            let h = head(&[
                "delta_over_g",
                "p_gg",
                "p_ge",
                "p_eg",
                "p_ee",
                "conditional_infidelity",
                "n_max",
                "max_top_fock_population",
                "max_excitation_drift",
            ]);
            let rows = s
                .points
                .iter()
                .map(|p| {
                    let mut r = vec![num(p.ratio)];
                    r.extend(p.branch_probabilities.iter().map(|x| num(*x)));
                    r.push(num(p.conditional_infidelity));
                    r.push(p.n_max_used.to_string());
                    r.push(num(p.max_top_fock_population));
                    r.push(num(p.max_excitation_drift));
                    r
                })
                .collect();
            (h, rows)
        }
    }
}

fn csv(results: &Results) -> Result<String> {
    let (header, rows) = table(results);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(std::io::Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

/// The record in its configured format. CSV output holds only the results
/// table.
pub fn render(record: &RunRecord) -> Result<String> {
    match record.config.format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(record)? + "\n"),
        OutputFormat::Csv => csv(&record.results),
    }
}

fn extension(f: OutputFormat) -> &'static str {
    match f {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    }
}

/// Where the record goes: `output`, resolved against the output directory
/// when relative, or `<dir>/<command>.<ext>` when only the directory is set.
fn destination(record: &RunRecord) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let cfg = &record.config;
    match (&cfg.output, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{}.{}", cfg.command, extension(cfg.format)))),
        (None, None) => None,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Write the record to its destination, or to stdout when there is none.
pub fn write_record(record: &RunRecord) -> Result<Option<PathBuf>> {
    let text = render(record)?;
    match destination(record) {
        Some(path) => {
            write_file(&path, &text)?;
            log::info!("wrote {}", path.display());
            Ok(Some(path))
        }
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(None)
        }
    }
}
