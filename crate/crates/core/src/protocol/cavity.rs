//! The swap run through the full Tavis–Cummings model, for checking the
//! effective description.

use log::warn;
use serde::Serialize;

use super::pair::{qd_label, PairState, Tag};
use super::swap::Swapper;
use crate::analysis::fidelity;
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, tensor, DensityMatrix, StateVector, C64};
use crate::measure::enumerate_branches;
use crate::model::{align_frame_on, build_full_tcm, excitation_number, PhysParams, TwoQubitBasis, CAVITY};

/// Largest population allowed in the highest retained Fock level.
pub const TOP_FOCK_LIMIT: f64 = 1e-8;

/// Sampled instants (besides `t = 0`) at which truncation and excitation
/// number are monitored.
const MONITOR_STEPS: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct CavityBranch {
    pub outcome: TwoQubitBasis,
    pub probability: f64,
    pub success: bool,
    /// Endpoint state with the cavity and middle dots traced out.
    pub endpoint: Option<DensityMatrix>,
    /// Effective-model output for the same outcome.
    pub effective: Option<PairState>,
    pub effective_probability: f64,
    /// `⟨ψ_eff|ρ|ψ_eff⟩`.
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FullCavitySwap {
    pub inputs: (Tag, Tag),
    pub params: PhysParams,
    pub time: f64,
    /// `λt` used for the effective comparison.
    pub theta: f64,
    pub dispersive: bool,
    pub branches: Vec<CavityBranch>,
    pub max_top_fock_population: f64,
    pub max_excitation_drift: f64,
    /// Worst `1 − F` over success branches.
    pub conditional_infidelity: f64,
    /// Frame-aligned joint state before measurement, `[cavity, l₁, m₁, m₂, r₂]`.
    #[serde(skip)]
    pub final_state: StateVector,
}

impl FullCavitySwap {
    pub fn branch_probabilities(&self) -> [f64; 4] {
        let mut p = [0.0; 4];
        for b in &self.branches {
            p[b.outcome.index()] = b.probability;
        }
        p
    }
}

/// Swap through the full cavity model for `t = theta/λ`.
pub fn swap_full_cavity(
    left: &PairState,
    right: &PairState,
    p: &PhysParams,
    theta: f64,
) -> Result<FullCavitySwap> {
    let t = p.time_for(theta)?;
    swap_full_cavity_at_time(left, right, p, t)
}

/// Attach a vacuum cavity to the middle dots, evolve under the lab-frame
/// Tavis–Cummings Hamiltonian for `t`, rotate into the `H₀` frame, measure
/// the middle dots and trace out the cavity. Each branch is compared with
/// the effective model at `λt`.
pub fn swap_full_cavity_at_time(
    left: &PairState,
    right: &PairState,
    p: &PhysParams,
    t: f64,
) -> Result<FullCavitySwap> {
    if !p.is_dispersive() {
        warn!(
            "Δ/g = {:.3} is outside the dispersive regime; effective model may not apply",
            p.delta() / p.g()
        );
    }
    let theta = p.lambda() * t;
    let swapper = Swapper::new(theta)?;
    // validates dot ids as a side effect
    let effective = swapper.enumerate(left, right)?;

    let (l1, m1, m2, r2) = (
        qd_label(left.left_qd()),
        qd_label(left.right_qd()),
        qd_label(right.left_qd()),
        qd_label(right.right_qd()),
    );
    let dim = p.n_max() + 1;
    let initial = tensor(&[StateVector::vacuum(CAVITY, dim)?, left.to_state(), right.to_state()])?;
    let targets = [CAVITY.to_string(), m1.clone(), m2.clone()];

    let eigen = build_full_tcm(p)?.eigen()?;
    let number = excitation_number(p)?;
    let n0 = expect_on(&number, &targets, &initial)?;
    let mut max_top = top_fock_population(&initial, dim);
    let mut max_drift: f64 = 0.0;
    for k in 1..=MONITOR_STEPS {
        let tk = t * k as f64 / MONITOR_STEPS as f64;
        let s = initial.apply(&eigen.propagator(tk), &targets)?;
        max_top = max_top.max(top_fock_population(&s, dim));
        max_drift = max_drift.max((expect_on(&number, &targets, &s)? - n0).abs());
    }
    if max_top > TOP_FOCK_LIMIT {
        return Err(Error::Truncation {
            population: max_top,
            limit: TOP_FOCK_LIMIT,
            n_max: p.n_max(),
        });
    }

    let lab = initial.apply(&eigen.propagator(t), &targets)?;
    let aligned = align_frame_on(&lab, &targets, t, p)?;

    let mut branches = Vec::with_capacity(4);
    let mut worst: f64 = 0.0;
    for (branch, eff) in enumerate_branches(&aligned, &[&m1, &m2])?.into_iter().zip(&effective) {
        let outcome: TwoQubitBasis = branch.outcome.pattern().parse()?;
        debug_assert_eq!(outcome, eff.outcome);
        let endpoint = if branch.negligible {
            None
        } else {
            Some(partial_trace(&branch.post_state, &[&l1, &r2])?)
        };
        let fid = match (&endpoint, &eff.output) {
            (Some(rho), Some(out)) => Some(fidelity(rho, &out.to_state())?),
            _ => None,
        };
        if eff.success {
            worst = worst.max(1.0 - fid.unwrap_or(0.0));
        }
        branches.push(CavityBranch {
            outcome,
            probability: branch.probability,
            success: eff.success,
            endpoint,
            effective: eff.output.clone(),
            effective_probability: eff.probability,
            fidelity: fid,
        });
    }

    Ok(FullCavitySwap {
        inputs: (left.tag(), right.tag()),
        params: *p,
        time: t,
        theta,
        dispersive: p.is_dispersive(),
        branches,
        max_top_fock_population: max_top,
        max_excitation_drift: max_drift,
        conditional_infidelity: worst.clamp(0.0, 1.0),
        final_state: aligned,
    })
}

fn expect_on(op: &crate::hilbert::OperatorMatrix, targets: &[String], s: &StateVector) -> Result<f64> {
    let applied = s.apply(op, targets)?;
    Ok(s.inner(&applied)?.re)
}

/// Population of the highest Fock level; the cavity is subsystem 0.
fn top_fock_population(s: &StateVector, dim: usize) -> f64 {
    let block = s.amplitudes().len() / dim;
    s.amplitudes()[(dim - 1) * block..].iter().map(C64::norm_sqr).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationCheck {
    pub n_max: usize,
    pub doubled: usize,
    /// `|⟨ψ(n_max)|ψ(2·n_max)⟩|²` of the frame-aligned joint states.
    pub fidelity: f64,
    pub converged: bool,
}

/// Rerun with twice the Fock cutoff and compare the joint states.
pub fn check_truncation(
    left: &PairState,
    right: &PairState,
    p: &PhysParams,
    theta: f64,
) -> Result<TruncationCheck> {
    let small = swap_full_cavity(left, right, p, theta)?;
    let big_p = p.with_n_max(2 * p.n_max())?;
    let big = swap_full_cavity(left, right, &big_p, theta)?;
    // cavity is the slowest index, so padding is a prefix copy
    let mut padded = vec![C64::new(0.0, 0.0); big.final_state.amplitudes().len()];
    padded[..small.final_state.amplitudes().len()].copy_from_slice(small.final_state.amplitudes());
    let padded = StateVector::from_space(big.final_state.space().clone(), padded)?;
    let f = fidelity(&padded, &big.final_state)?;
    Ok(TruncationCheck {
        n_max: p.n_max(),
        doubled: big_p.n_max(),
        fidelity: f,
        converged: f >= 1.0 - 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{prepare_singlet, DEFAULT_THETA};

    fn singlets() -> (PairState, PairState) {
        (prepare_singlet(1, 2).unwrap(), prepare_singlet(3, 4).unwrap())
    }

    #[test]
    fn deep_dispersive_limit_matches_effective() {
        let (l, r) = singlets();
        let p = PhysParams::from_ratios(0.01, 80.0, 4).unwrap();
        let run = swap_full_cavity(&l, &r, &p, DEFAULT_THETA).unwrap();
        for prob in run.branch_probabilities() {
            assert!((prob - 0.25).abs() < 0.01);
        }
        assert!(run.conditional_infidelity < 1e-5);
        assert!(run.max_excitation_drift < 1e-10);
        assert!(run.max_top_fock_population < 1e-20);
    }

    #[test]
    fn zero_coupling_is_free_evolution() {
        let (l, r) = singlets();
        let p = PhysParams::from_ratios(0.01, 20.0, 2).unwrap().with_g(0.0).unwrap();
        assert!(swap_full_cavity(&l, &r, &p, DEFAULT_THETA).is_err());
        let run = swap_full_cavity_at_time(&l, &r, &p, 37.5).unwrap();
        assert_eq!(run.theta, 0.0);
        for b in &run.branches {
            assert!((b.probability - 0.25).abs() < 1e-12);
            assert!(b.fidelity.unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn truncation_converges() {
        let (l, r) = singlets();
        let p = PhysParams::from_ratios(0.01, 20.0, 3).unwrap();
        let c = check_truncation(&l, &r, &p, DEFAULT_THETA).unwrap();
        assert!(c.converged, "{c:?}");
    }

    #[test]
    fn one_photon_cutoff_is_flagged() {
        // two excitations can reach n = 2, which n_max = 1 cannot hold
        let (l, r) = singlets();
        let p = PhysParams::from_ratios(0.01, 5.0, 1).unwrap();
        let run = swap_full_cavity(&l, &r, &p, DEFAULT_THETA);
        assert!(matches!(run, Err(Error::Truncation { .. })), "{run:?}");
    }
}
