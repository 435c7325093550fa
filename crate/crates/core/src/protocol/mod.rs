//! The repeater protocol: singlet pairs, the cavity-mediated swap, chain
//! doubling and the closure of the output states under further swaps.
//!
//! A swap takes two pairs `(l₁, m₁)` and `(m₂, r₂)`, lets the middle dots
//! `m₁, m₂` exchange through a detuned cavity until `λt = θ`, then measures
//! both middle dots. Outcomes `eg` and `ge` herald an entangled `(l₁, r₂)`
//! pair. At `θ = π/4` the heralded states are, up to global phase,
//!
//! - `ψ  = (|ge⟩ − i|eg⟩)/√2`
//! - `ψ′ = (|eg⟩ − i|ge⟩)/√2`
//!
//! and swapping two pairs drawn from `{ψ, ψ′}` again yields `ψ` or `ψ′`.

mod cavity;
mod chain;
mod closure;
mod global;
mod pair;
mod swap;

pub use cavity::{
    check_truncation, swap_full_cavity, swap_full_cavity_at_time, CavityBranch, FullCavitySwap,
    TruncationCheck, TOP_FOCK_LIMIT,
};
pub use chain::{
    run_chain, run_chain_trials, run_chain_with, ChainRunRecord, LevelStats, RetryPolicy,
    MAX_ATTEMPTS_PER_SWAP,
};
pub use closure::{closure_check, closure_check_at, CaseRow, ClosureReport, ClosureViolation, LevelTable};
pub use global::{global_vs_pairwise, GlobalComparison, GlobalRow};
pub use pair::{classify_pair, prepare_singlet, qd_label, PairState, QdId, Tag};
pub use swap::{
    sample_swap_trials, swap_effective, swap_enumerate, swap_sample, BranchSelector, ForcedOutcomes,
    SwapMode, SwapRecord, Swapper,
};

/// `λt = π/4`, the exchange angle at which swaps herald `ψ`/`ψ′`.
pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_4;

/// Classification tolerance on `1 − |⟨target|pair⟩|²`.
pub const CLASSIFY_TOL: f64 = 1e-8;
