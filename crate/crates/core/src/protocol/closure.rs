//! Exhaustive check that `{ψ, ψ′}` is closed under swapping at every level.

use std::collections::BTreeMap;

use serde::Serialize;

use super::pair::{prepare_singlet, PairState, QdId, Tag};
use super::swap::Swapper;
use super::DEFAULT_THETA;
use crate::error::{Error, Result};
use crate::model::TwoQubitBasis;

/// Probabilities in two tables must agree to this for the tables to match.
const TABLE_PROB_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct CaseRow {
    pub level: u32,
    pub left_tag: Tag,
    pub right_tag: Tag,
    pub left_qds: (QdId, QdId),
    pub right_qds: (QdId, QdId),
    pub outcome: TwoQubitBasis,
    pub probability: f64,
    pub success: bool,
    pub output_tag: Option<Tag>,
    /// Fidelity of the output to the reference state of `output_tag`.
    pub fidelity: f64,
    pub concurrence: f64,
    pub output: Option<PairState>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelTable {
    pub level: u32,
    pub span: u32,
    pub rows: Vec<CaseRow>,
}

impl LevelTable {
    /// `(left, right, outcome) → (output tag, probability)` for comparison
    /// across levels.
    fn signature(&self) -> BTreeMap<(Tag, Tag, TwoQubitBasis), (Option<Tag>, f64)> {
        self.rows
            .iter()
            .map(|r| ((r.left_tag, r.right_tag, r.outcome), (r.output_tag, r.probability)))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureViolation {
    pub level: u32,
    pub left_tag: Tag,
    pub right_tag: Tag,
    pub outcome: TwoQubitBasis,
    pub amplitudes: Option<[crate::hilbert::C64; 4]>,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub max_depth: u32,
    pub theta: f64,
    pub levels: Vec<LevelTable>,
    /// Every success branch at every level classified as `Psi` or `PsiPrime`.
    pub closed: bool,
    /// Every level-k table (k ≥ 2) equals the level-2 table.
    pub periodic: bool,
    pub violations: Vec<ClosureViolation>,
    pub mismatched_levels: Vec<u32>,
}

impl ClosureReport {
    pub fn ok(&self) -> bool {
        self.closed && self.periodic
    }
}

/// [`closure_check_at`] with `λt = π/4`.
pub fn closure_check(max_depth: u32) -> Result<ClosureReport> {
    closure_check_at(max_depth, DEFAULT_THETA)
}

/// Level 1 swaps two singlets. Each later level swaps every combination of
/// `Psi`/`PsiPrime` inputs, using as inputs the actual output states (with
/// their phases) produced one level below, relabeled onto the dots of the
/// current level.
pub fn closure_check_at(max_depth: u32, theta: f64) -> Result<ClosureReport> {
    if !(2..=30).contains(&max_depth) {
        return Err(Error::InvalidParams(format!(
            "closure check needs 2 ≤ depth ≤ 30, got {max_depth}"
        )));
    }
    let swapper = Swapper::new(theta)?;
    let mut levels = Vec::new();
    let mut violations = Vec::new();

    let mut inputs: Vec<(PairState, PairState)> = vec![(prepare_singlet(1, 2)?, prepare_singlet(3, 4)?)];
    for level in 1..=max_depth {
        let span: u32 = 1 << (level + 1);
        let mut rows = Vec::new();
        let mut reps: BTreeMap<Tag, PairState> = BTreeMap::new();
        for (left, right) in &inputs {
            for rec in swapper.enumerate(left, right)? {
                let output_tag = rec.output_tag();
                let row = CaseRow {
                    level,
                    left_tag: left.tag(),
                    right_tag: right.tag(),
                    left_qds: (left.left_qd(), left.right_qd()),
                    right_qds: (right.left_qd(), right.right_qd()),
                    outcome: rec.outcome,
                    probability: rec.probability,
                    success: rec.success,
                    output_tag,
                    fidelity: rec
                        .output
                        .as_ref()
                        .map_or(0.0, |o| o.fidelity_to(o.tag())),
                    concurrence: rec.output.as_ref().map_or(0.0, PairState::concurrence),
                    output: rec.output.clone(),
                };
                if rec.success {
                    match (&rec.output, output_tag) {
                        (Some(out), Some(tag @ (Tag::Psi | Tag::PsiPrime))) => {
                            reps.entry(tag).or_insert_with(|| out.clone());
                        }
                        _ => violations.push(ClosureViolation {
                            level,
                            left_tag: left.tag(),
                            right_tag: right.tag(),
                            outcome: rec.outcome,
                            amplitudes: rec.output.as_ref().map(|o| *o.amplitudes()),
                            reason: format!("success branch classified as {output_tag:?}"),
                        }),
                    }
                }
                rows.push(row);
            }
        }
        levels.push(LevelTable { level, span, rows });

        if level == max_depth {
            break;
        }
        for tag in [Tag::Psi, Tag::PsiPrime] {
            if !reps.contains_key(&tag) {
                violations.push(ClosureViolation {
                    level,
                    left_tag: Tag::Other,
                    right_tag: Tag::Other,
                    outcome: TwoQubitBasis::Gg,
                    amplitudes: None,
                    reason: format!("no success branch produced {tag}"),
                });
            }
        }
        if reps.len() < 2 {
            break;
        }
        // next level: pairs over 1…span and span+1…2·span
        inputs = Vec::new();
        for lt in [Tag::Psi, Tag::PsiPrime] {
            for rt in [Tag::Psi, Tag::PsiPrime] {
                let l = reps[&lt].relabeled(1, span)?;
                let r = reps[&rt].relabeled(span + 1, 2 * span)?;
                inputs.push((l, r));
            }
        }
    }

    let mut mismatched = Vec::new();
    let reference = levels.get(1).map(LevelTable::signature);
    for table in levels.iter().skip(2) {
        let sig = table.signature();
        let same = reference.as_ref().is_some_and(|r| {
            r.len() == sig.len()
                && r.iter().zip(&sig).all(|((ka, (ta, pa)), (kb, (tb, pb)))| {
                    ka == kb && ta == tb && (pa - pb).abs() <= TABLE_PROB_TOL
                })
        });
        if !same {
            mismatched.push(table.level);
        }
    }
    let complete = levels.len() == max_depth as usize;

    Ok(ClosureReport {
        max_depth,
        theta,
        closed: violations.is_empty() && complete,
        periodic: mismatched.is_empty() && complete,
        levels,
        violations,
        mismatched_levels: mismatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_to_depth_four() {
        let r = closure_check(4).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        assert_eq!(r.levels.len(), 4);
        assert_eq!(r.levels[3].span, 32);
        assert_eq!(r.levels[1].rows.len(), 16);
        for t in &r.levels {
            for row in t.rows.iter().filter(|x| x.success) {
                assert!(matches!(row.output_tag, Some(Tag::Psi | Tag::PsiPrime)));
                assert!((row.concurrence - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn depth_one_rejected() {
        assert!(closure_check(1).is_err());
    }

    #[test]
    fn off_angle_breaks_closure() {
        let r = closure_check_at(3, DEFAULT_THETA + 0.05).unwrap();
        assert!(!r.closed);
        assert!(!r.violations.is_empty());
    }
}
