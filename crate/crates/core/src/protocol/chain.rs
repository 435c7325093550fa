//! Recursive doubling along a chain of singlet pairs.
//!
//! A depth-`k` run joins `2^k` singlets into one pair spanning dots
//! `1 … 2^(k+1)`. Level `j` swaps two level-`j−1` pairs; level 0 is a fresh
//! singlet. A failed swap leaves both inputs unentangled, so they are
//! discarded and rebuilt from fresh singlets.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::pair::{prepare_singlet, PairState, QdId, Tag};
use super::swap::{BranchSelector, Swapper};
use crate::error::{Error, Result};
use crate::measure::RngStream;

/// Hard stop for a single swap under [`RetryPolicy::DiscardBoth`].
pub const MAX_ATTEMPTS_PER_SWAP: u32 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RetryPolicy {
    /// Rebuild both inputs and retry until the swap succeeds.
    DiscardBoth,
    /// Like `DiscardBoth`, but each swap gets at most this many attempts;
    /// running out fails the whole run.
    BoundedRetries(u32),
}

impl RetryPolicy {
    fn budget(self) -> u32 {
        match self {
            RetryPolicy::DiscardBoth => MAX_ATTEMPTS_PER_SWAP,
            RetryPolicy::BoundedRetries(n) => n,
        }
    }
}

impl fmt::Display for RetryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetryPolicy::DiscardBoth => f.write_str("discard-both"),
            RetryPolicy::BoundedRetries(n) => write!(f, "bounded-retries:{n}"),
        }
    }
}

impl Serialize for RetryPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for RetryPolicy {
    type Err = Error;

    /// `discard-both` or `bounded-retries:N`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config {
            key: "retry_policy".into(),
            message: format!("expected `discard-both` or `bounded-retries:N`, got `{s}`"),
        };
        if s == "discard-both" {
            return Ok(RetryPolicy::DiscardBoth);
        }
        let n = s
            .strip_prefix("bounded-retries:")
            .and_then(|n| n.parse::<u32>().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(bad)?;
        Ok(RetryPolicy::BoundedRetries(n))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: u32,
    pub attempts: u64,
    pub successes: u64,
    /// Attempts spent on each successful swap at this level.
    pub attempts_per_success: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainRunRecord {
    pub depth: u32,
    /// Number of dots spanned by the final pair, `2^(depth+1)`.
    pub span: u32,
    pub levels: Vec<LevelStats>,
    pub pairs_consumed: u64,
    pub completed: bool,
    pub final_pair: Option<PairState>,
    pub final_tag: Option<Tag>,
    /// Fidelity of the final pair to the closer of `ψ`, `ψ′`.
    pub final_fidelity: f64,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
}

struct Builder<'a, S: BranchSelector + ?Sized> {
    swapper: Swapper,
    policy: RetryPolicy,
    selector: &'a mut S,
    levels: Vec<LevelStats>,
    consumed: u64,
}

impl<S: BranchSelector + ?Sized> Builder<'_, S> {
    /// Pair spanning `first … first + 2^(level+1) − 1`, or `None` when the
    /// retry budget ran out.
    fn build(&mut self, level: u32, first: QdId) -> Result<Option<PairState>> {
        if level == 0 {
            self.consumed += 1;
            return Ok(Some(prepare_singlet(first, first + 1)?));
        }
        let half = 1 << level;
        let budget = self.policy.budget();
        for attempt in 1..=budget {
            let Some(left) = self.build(level - 1, first)? else {
                return Ok(None);
            };
            let Some(right) = self.build(level - 1, first + half)? else {
                return Ok(None);
            };
            let branches = self.swapper.enumerate(&left, &right)?;
            let pick = self.selector.select(&branches)?;
            let stats = &mut self.levels[level as usize - 1];
            stats.attempts += 1;
            let rec = &branches[pick];
            if rec.success {
                stats.successes += 1;
                stats.attempts_per_success.push(attempt);
                return Ok(rec.output.clone());
            }
        }
        Ok(None)
    }
}

/// Run the chain with branch choices made by `selector`.
pub fn run_chain_with<S: BranchSelector + ?Sized>(
    depth: u32,
    theta: f64,
    policy: RetryPolicy,
    selector: &mut S,
) -> Result<ChainRunRecord> {
    if depth < 1 {
        return Err(Error::InvalidParams("chain depth must be at least 1".into()));
    }
    if depth > 30 {
        return Err(Error::InvalidParams(format!("chain depth {depth} too large")));
    }
    let provenance = selector.provenance();
    let mut b = Builder {
        swapper: Swapper::new(theta)?,
        policy,
        selector,
        levels: (1..=depth)
            .map(|level| LevelStats {
                level,
                ..LevelStats::default()
            })
            .collect(),
        consumed: 0,
    };
    let pair = b.build(depth, 1)?;
    let final_fidelity = pair.as_ref().map_or(0.0, |p| {
        p.fidelity_to(Tag::Psi).max(p.fidelity_to(Tag::PsiPrime)).clamp(0.0, 1.0)
    });
    Ok(ChainRunRecord {
        depth,
        span: 1 << (depth + 1),
        levels: b.levels,
        pairs_consumed: b.consumed,
        completed: pair.is_some(),
        final_tag: pair.as_ref().map(PairState::tag),
        final_pair: pair,
        final_fidelity,
        seed: provenance.map(|p| p.0),
        stream: provenance.map(|p| p.1),
    })
}

/// Run the chain with Born-rule sampling from `rng`.
pub fn run_chain(depth: u32, theta: f64, policy: RetryPolicy, rng: &mut RngStream) -> Result<ChainRunRecord> {
    run_chain_with(depth, theta, policy, rng)
}

/// `trials` independent runs; trial `i` uses stream `i` of `seed`, so the
/// result does not depend on the thread pool.
pub fn run_chain_trials(
    depth: u32,
    theta: f64,
    policy: RetryPolicy,
    seed: u64,
    trials: u64,
) -> Result<Vec<ChainRunRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|i| run_chain(depth, theta, policy, &mut RngStream::new(seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TwoQubitBasis::{Eg, Ge, Gg};
    use crate::protocol::swap::ForcedOutcomes;
    use crate::protocol::DEFAULT_THETA;

    #[test]
    fn forced_eg_gives_psi() {
        let mut f = ForcedOutcomes::new([Eg]);
        let r = run_chain_with(1, DEFAULT_THETA, RetryPolicy::DiscardBoth, &mut f).unwrap();
        assert_eq!(r.final_tag, Some(Tag::Psi));
        assert_eq!(r.pairs_consumed, 2);
        assert_eq!(r.span, 4);
        assert!((r.final_fidelity - 1.0).abs() < 1e-12);
        assert_eq!(r.seed, None);
    }

    #[test]
    fn failure_redraws_both_pairs() {
        let mut f = ForcedOutcomes::new([Gg, Gg, Ge]);
        let r = run_chain_with(1, DEFAULT_THETA, RetryPolicy::DiscardBoth, &mut f).unwrap();
        assert_eq!(r.pairs_consumed, 6);
        assert_eq!(r.levels[0].attempts, 3);
        assert_eq!(r.levels[0].attempts_per_success, vec![3]);
        assert_eq!(r.final_tag, Some(Tag::PsiPrime));
    }

    #[test]
    fn bounded_retries_can_fail() {
        let mut f = ForcedOutcomes::new([Gg, Gg]);
        let r = run_chain_with(1, DEFAULT_THETA, RetryPolicy::BoundedRetries(2), &mut f).unwrap();
        assert!(!r.completed);
        assert_eq!(r.final_tag, None);
        assert_eq!(r.final_fidelity, 0.0);
        assert_eq!(r.levels[0].successes, 0);
    }

    #[test]
    fn depth_two_spans_eight_dots() {
        let mut f = ForcedOutcomes::new([Eg, Ge, Eg]);
        let r = run_chain_with(2, DEFAULT_THETA, RetryPolicy::DiscardBoth, &mut f).unwrap();
        let p = r.final_pair.unwrap();
        assert_eq!((p.left_qd(), p.right_qd()), (1, 8));
        assert!(matches!(p.tag(), Tag::Psi | Tag::PsiPrime));
        assert_eq!(r.pairs_consumed, 4);
    }

    #[test]
    fn sampled_runs_are_deterministic() {
        let a = run_chain_trials(3, DEFAULT_THETA, RetryPolicy::DiscardBoth, 7, 50).unwrap();
        let b = run_chain_trials(3, DEFAULT_THETA, RetryPolicy::DiscardBoth, 7, 50).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.completed);
            assert!(matches!(r.final_tag, Some(Tag::Psi | Tag::PsiPrime)));
            for l in &r.levels {
                assert!(l.successes <= l.attempts);
            }
        }
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("discard-both".parse::<RetryPolicy>().unwrap(), RetryPolicy::DiscardBoth);
        assert_eq!(
            "bounded-retries:5".parse::<RetryPolicy>().unwrap(),
            RetryPolicy::BoundedRetries(5)
        );
        assert!("bounded-retries:0".parse::<RetryPolicy>().is_err());
        assert!("retry".parse::<RetryPolicy>().is_err());
        assert_eq!(RetryPolicy::BoundedRetries(3).to_string(), "bounded-retries:3");
    }

    #[test]
    fn depth_zero_rejected() {
        let mut rng = RngStream::new(0, 0);
        assert!(run_chain(0, DEFAULT_THETA, RetryPolicy::DiscardBoth, &mut rng).is_err());
    }
}
