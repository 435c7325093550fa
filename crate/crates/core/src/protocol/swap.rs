use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use super::pair::{prepare_singlet, qd_label, PairState, QdId, Tag};
use crate::error::{Error, Result};
use crate::hilbert::{tensor, OperatorMatrix, StateVector};
use crate::measure::{self, Branch, RngStream};
use crate::model::{effective_with_strength, TwoQubitBasis};

/// One branch of a swap: the middle-dot outcome and what it heralds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapRecord {
    pub inputs: (Tag, Tag),
    pub middle: (QdId, QdId),
    pub outcome: TwoQubitBasis,
    pub probability: f64,
    /// `true` exactly when the middle outcome is `eg` or `ge`.
    pub success: bool,
    /// Endpoint pair left by this outcome; absent for zero-probability branches.
    pub output: Option<PairState>,
    pub theta: f64,
}

impl SwapRecord {
    pub fn output_tag(&self) -> Option<Tag> {
        self.output.as_ref().map(PairState::tag)
    }
}

/// The exchange step at a fixed `λt`, with its propagator cached.
#[derive(Clone, Debug)]
pub struct Swapper {
    theta: f64,
    propagator: OperatorMatrix,
}

impl Swapper {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParams(format!("theta = {theta}")));
        }
        // unit strength: evolving for θ is a step of λt = θ
        let propagator = effective_with_strength(1.0).eigen()?.propagator(theta);
        Ok(Self { theta, propagator })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `e^{−iKθ}` on the two middle dots.
    pub fn propagator(&self) -> &OperatorMatrix {
        &self.propagator
    }

    /// Four-dot state after the exchange step, ordered `[l₁, m₁, m₂, r₂]`.
    pub fn evolved(&self, left: &PairState, right: &PairState) -> Result<StateVector> {
        let ids = [left.left_qd(), left.right_qd(), right.left_qd(), right.right_qd()];
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(Error::QdCollision(*id));
            }
        }
        let joint = tensor(&[left.to_state(), right.to_state()])?;
        joint.apply(&self.propagator, &[qd_label(ids[1]), qd_label(ids[2])])
    }

    fn record(&self, left: &PairState, right: &PairState, branch: &Branch) -> Result<SwapRecord> {
        let (m1, m2) = (left.right_qd(), right.left_qd());
        let outcome: TwoQubitBasis = branch.outcome.pattern().parse()?;
        let output = if branch.negligible {
            None
        } else {
            let ends = branch.post_state.discard(&[qd_label(m1), qd_label(m2)])?;
            Some(PairState::from_state(left.left_qd(), right.right_qd(), &ends)?)
        };
        Ok(SwapRecord {
            inputs: (left.tag(), right.tag()),
            middle: (m1, m2),
            outcome,
            probability: branch.probability,
            success: matches!(outcome, TwoQubitBasis::Eg | TwoQubitBasis::Ge),
            output,
            theta: self.theta,
        })
    }

    /// All four middle outcomes, in the order `gg, ge, eg, ee`.
    pub fn enumerate(&self, left: &PairState, right: &PairState) -> Result<Vec<SwapRecord>> {
        let state = self.evolved(left, right)?;
        let middle = [qd_label(left.right_qd()), qd_label(right.left_qd())];
        measure::enumerate_branches(&state, &middle)?
            .iter()
            .map(|b| self.record(left, right, b))
            .collect()
    }

    /// One outcome drawn with its Born probability.
    pub fn sample(&self, left: &PairState, right: &PairState, rng: &mut RngStream) -> Result<SwapRecord> {
        let state = self.evolved(left, right)?;
        let middle = [qd_label(left.right_qd()), qd_label(right.left_qd())];
        let branch = measure::sample(&state, &middle, rng)?;
        self.record(left, right, &branch)
    }
}

pub enum SwapMode<'a> {
    Enumerate,
    Sample(&'a mut RngStream),
}

/// Swap two pairs sharing no dot. `Enumerate` returns all four branches,
/// `Sample` a single drawn branch.
pub fn swap_effective(
    left: &PairState,
    right: &PairState,
    theta: f64,
    mode: SwapMode<'_>,
) -> Result<Vec<SwapRecord>> {
    let swapper = Swapper::new(theta)?;
    match mode {
        SwapMode::Enumerate => swapper.enumerate(left, right),
        SwapMode::Sample(rng) => Ok(vec![swapper.sample(left, right, rng)?]),
    }
}

pub fn swap_enumerate(left: &PairState, right: &PairState, theta: f64) -> Result<Vec<SwapRecord>> {
    Swapper::new(theta)?.enumerate(left, right)
}

pub fn swap_sample(
    left: &PairState,
    right: &PairState,
    theta: f64,
    rng: &mut RngStream,
) -> Result<SwapRecord> {
    Swapper::new(theta)?.sample(left, right, rng)
}

/// `trials` independent singlet⊗singlet swaps on dots 1–4, trial `i`
/// drawing from stream `i` of `seed`.
pub fn sample_swap_trials(theta: f64, seed: u64, trials: u64) -> Result<Vec<SwapRecord>> {
    let swapper = Swapper::new(theta)?;
    let left = prepare_singlet(1, 2)?;
    let right = prepare_singlet(3, 4)?;
    (0..trials)
        .into_par_iter()
        .map(|i| swapper.sample(&left, &right, &mut RngStream::new(seed, i)))
        .collect()
}

/// Chooses which branch of an enumerated swap happens.
pub trait BranchSelector {
    fn select(&mut self, branches: &[SwapRecord]) -> Result<usize>;

    /// Seed and stream, when the selector is random.
    fn provenance(&self) -> Option<(u64, u64)> {
        None
    }
}

impl BranchSelector for RngStream {
    fn select(&mut self, branches: &[SwapRecord]) -> Result<usize> {
        let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        Ok(self.choose(&probs))
    }

    fn provenance(&self) -> Option<(u64, u64)> {
        Some((self.seed(), self.stream()))
    }
}

/// Replays a fixed outcome script, one entry per swap attempt.
#[derive(Clone, Debug, Default)]
pub struct ForcedOutcomes(VecDeque<TwoQubitBasis>);

impl ForcedOutcomes {
    pub fn new(outcomes: impl IntoIterator<Item = TwoQubitBasis>) -> Self {
        Self(outcomes.into_iter().collect())
    }

    pub fn remaining(&self) -> usize {
        self.0.len()
    }
}

impl BranchSelector for ForcedOutcomes {
    fn select(&mut self, branches: &[SwapRecord]) -> Result<usize> {
        let want = self
            .0
            .pop_front()
            .ok_or(Error::Empty("forced outcome script exhausted"))?;
        branches
            .iter()
            .position(|b| b.outcome == want && b.output.is_some())
            .ok_or_else(|| Error::InvalidBasis(format!("forced outcome {want} has zero probability")))
    }
}
