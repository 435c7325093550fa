//! Whole-chain state-vector simulation, compared against pairwise swaps.

use serde::Serialize;

use super::pair::{prepare_singlet, qd_label, PairState, QdId};
use super::swap::Swapper;
use crate::analysis::fidelity;
use crate::error::{Error, Result};
use crate::hilbert::{tensor, StateVector};
use crate::measure::enumerate_branches;
use crate::model::TwoQubitBasis;

#[derive(Clone, Debug, Serialize)]
pub struct GlobalRow {
    /// Middle outcomes per level, one entry per swap block at that level.
    pub outcomes: Vec<Vec<TwoQubitBasis>>,
    pub global_probability: f64,
    pub pairwise_probability: f64,
    /// Fidelity between the global and pairwise final pairs, on rows that
    /// complete every level.
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalComparison {
    pub depth: u32,
    pub theta: f64,
    pub rows: Vec<GlobalRow>,
    pub max_probability_error: f64,
    pub min_fidelity: f64,
}

fn is_success(o: TwoQubitBasis) -> bool {
    matches!(o, TwoQubitBasis::Eg | TwoQubitBasis::Ge)
}

struct Walker {
    depth: u32,
    swapper: Swapper,
    last_qd: QdId,
    rows: Vec<GlobalRow>,
}

impl Walker {
    fn middles(&self, level: u32) -> Vec<(QdId, QdId)> {
        let block = 1u32 << (level + 1);
        let half = 1u32 << level;
        let blocks = self.last_qd / block;
        (0..blocks)
            .map(|b| {
                let start = b * block + 1;
                (start + half - 1, start + half)
            })
            .collect()
    }

    fn walk(
        &mut self,
        level: u32,
        state: &StateVector,
        pairs: &[PairState],
        history: &[Vec<TwoQubitBasis>],
        global_p: f64,
        pairwise_p: f64,
    ) -> Result<()> {
        let middles = self.middles(level);
        let mut evolved = state.clone();
        let mut measured = Vec::new();
        for &(a, b) in &middles {
            let labels = [qd_label(a), qd_label(b)];
            evolved = evolved.apply(self.swapper_propagator(), &labels)?;
            measured.extend(labels);
        }
        let pairwise: Vec<_> = pairs
            .chunks(2)
            .map(|lr| self.swapper.enumerate(&lr[0], &lr[1]))
            .collect::<Result<_>>()?;

        for branch in enumerate_branches(&evolved, &measured)? {
            let bits = branch.outcome.pattern();
            let outcomes: Vec<TwoQubitBasis> = (0..middles.len())
                .map(|i| bits[2 * i..2 * i + 2].parse())
                .collect::<Result<_>>()?;
            let recs: Vec<_> = outcomes
                .iter()
                .zip(&pairwise)
                .map(|(o, recs)| recs.iter().find(|r| r.outcome == *o).expect("all outcomes"))
                .collect();
            let g = global_p * branch.probability;
            let pw = pairwise_p * recs.iter().map(|r| r.probability).product::<f64>();
            let mut hist = history.to_vec();
            hist.push(outcomes.clone());
            let all_success = outcomes.iter().all(|&o| is_success(o));

            if branch.negligible || !all_success {
                self.rows.push(GlobalRow {
                    outcomes: hist,
                    global_probability: g,
                    pairwise_probability: pw,
                    fidelity: None,
                });
                continue;
            }
            let outputs: Vec<PairState> = recs
                .iter()
                .map(|r| r.output.clone().expect("non-negligible"))
                .collect();
            if level == self.depth {
                let interior: Vec<String> = (2..self.last_qd).map(qd_label).collect();
                let ends = branch.post_state.discard(&interior)?;
                let f = fidelity(&ends, &outputs[0].to_state())?;
                self.rows.push(GlobalRow {
                    outcomes: hist,
                    global_probability: g,
                    pairwise_probability: pw,
                    fidelity: Some(f),
                });
            } else {
                self.rows.push(GlobalRow {
                    outcomes: hist.clone(),
                    global_probability: g,
                    pairwise_probability: pw,
                    fidelity: None,
                });
                self.walk(level + 1, &branch.post_state, &outputs, &hist, g, pw)?;
            }
        }
        Ok(())
    }

    fn swapper_propagator(&self) -> &crate::hilbert::OperatorMatrix {
        self.swapper.propagator()
    }
}

/// Simulate the full `2^(depth+1)`-dot chain as one state vector, measuring
/// every middle pair of a level jointly, and compare each outcome history
/// with the product of pairwise swap probabilities and the pairwise final
/// state. Practical for `depth ≤ 3`.
pub fn global_vs_pairwise(depth: u32, theta: f64) -> Result<GlobalComparison> {
    if !(1..=3).contains(&depth) {
        return Err(Error::InvalidParams(format!(
            "global simulation supports depth 1..=3, got {depth}"
        )));
    }
    let last_qd: QdId = 1 << (depth + 1);
    let singlets: Vec<PairState> = (0..last_qd / 2)
        .map(|i| prepare_singlet(2 * i + 1, 2 * i + 2))
        .collect::<Result<_>>()?;
    let state = tensor(&singlets.iter().map(PairState::to_state).collect::<Vec<_>>())?;
    let mut walker = Walker {
        depth,
        swapper: Swapper::new(theta)?,
        last_qd,
        rows: Vec::new(),
    };
    walker.walk(1, &state, &singlets, &[], 1.0, 1.0)?;

    let max_probability_error = walker
        .rows
        .iter()
        .map(|r| (r.global_probability - r.pairwise_probability).abs())
        .fold(0.0, f64::max);
    let min_fidelity = walker
        .rows
        .iter()
        .filter_map(|r| r.fidelity)
        .fold(1.0, f64::min);
    Ok(GlobalComparison {
        depth,
        theta,
        rows: walker.rows,
        max_probability_error,
        min_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::DEFAULT_THETA;

    #[test]
    fn single_level_matches() {
        let c = global_vs_pairwise(1, DEFAULT_THETA).unwrap();
        assert_eq!(c.rows.len(), 4);
        assert!(c.max_probability_error < 1e-12);
        assert!(c.min_fidelity > 1.0 - 1e-10);
    }

    #[test]
    fn two_levels_match() {
        let c = global_vs_pairwise(2, DEFAULT_THETA).unwrap();
        // 16 first-level histories, 4 of which continue into 4 outcomes each
        assert_eq!(c.rows.len(), 16 + 16);
        let total: f64 = c
            .rows
            .iter()
            .filter(|r| r.outcomes.len() == 2 || !r.outcomes[0].iter().all(|&o| is_success(o)))
            .map(|r| r.global_probability)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(c.max_probability_error < 1e-12);
        assert!(c.min_fidelity > 1.0 - 1e-10);
    }
}
