//! Entanglement and agreement metrics, Monte Carlo statistics and the
//! dispersive-regime sweep.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, StateVector, C64};
use crate::model::PhysParams;
use crate::protocol::{prepare_singlet, swap_full_cavity, ChainRunRecord, SwapRecord};

/// Either kind of state as the first argument of [`fidelity`].
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

/// `|⟨b|a⟩|²` for pure `a`, `⟨b|ρ|b⟩` for mixed `a`. The target `b` must be
/// pure; labels are not compared, only dimensions.
pub fn fidelity<'a>(a: impl Into<StateRef<'a>>, b: &StateVector) -> Result<f64> {
    let f = match a.into() {
        StateRef::Pure(a) => b.inner(a)?.norm_sqr(),
        StateRef::Mixed(rho) => rho.expectation_in(b)?,
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Density eigenvalues below this are treated as exact zeros when taking
/// `√ρ`, which keeps rank-deficient (e.g. pure) inputs exact.
const SQRT_FLOOR: f64 = 1e-14;

/// Wootters concurrence of a two-qubit density matrix.
///
/// The decreasing square roots `λᵢ` of the spectrum of `ρ(σy⊗σy)ρ*(σy⊗σy)`
/// are computed as the singular values of `√ρ · (σy⊗σy) · √ρ*`, avoiding a
/// non-Hermitian eigenproblem.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::DimensionMismatch {
            expected: vec![2, 2],
            found: rho.dims().to_vec(),
        });
    }
    let eig = rho.as_operator().eigen()?;
    let sqrt_rho = eig.map(|e| C64::new(if e > SQRT_FLOOR { e.sqrt() } else { 0.0 }, 0.0));
    // σy⊗σy in the gg, ge, eg, ee basis is the anti-diagonal (−1, 1, 1, −1)
    let mut yy = DMatrix::<C64>::zeros(4, 4);
    yy[(0, 3)] = C64::new(-1.0, 0.0);
    yy[(1, 2)] = C64::new(1.0, 0.0);
    yy[(2, 1)] = C64::new(1.0, 0.0);
    yy[(3, 0)] = C64::new(-1.0, 0.0);
    let m = &sqrt_rho * yy * sqrt_rho.conjugate();
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// Concurrence `2|α_gg α_ee − α_ge α_eg|` of a pure two-qubit state.
pub fn concurrence_pure(state: &StateVector) -> Result<f64> {
    if state.dims() != [2, 2] {
        return Err(Error::DimensionMismatch {
            expected: vec![2, 2],
            found: state.dims().to_vec(),
        });
    }
    state.ensure_normalized()?;
    let a = state.amplitudes();
    Ok((2.0 * (a[0] * a[3] - a[1] * a[2]).norm()).min(1.0))
}

/// Anything with a success/failure outcome.
pub trait Trial {
    fn succeeded(&self) -> bool;
}

impl Trial for SwapRecord {
    fn succeeded(&self) -> bool {
        self.success
    }
}

impl Trial for ChainRunRecord {
    fn succeeded(&self) -> bool {
        self.completed
    }
}

impl Trial for bool {
    fn succeeded(&self) -> bool {
        *self
    }
}

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuccessStats {
    pub count: u64,
    pub successes: u64,
    pub mean: f64,
    pub std_error: f64,
    pub ci99: (f64, f64),
}

/// Bernoulli mean, standard error and normal-approximation 99% interval.
pub fn success_stats<T: Trial>(records: &[T]) -> Result<SuccessStats> {
    if records.is_empty() {
        return Err(Error::Empty("success statistics need at least one record"));
    }
    let count = records.len() as u64;
    let successes = records.iter().filter(|r| r.succeeded()).count() as u64;
    let mean = successes as f64 / count as f64;
    let std_error = (mean * (1.0 - mean) / count as f64).sqrt();
    Ok(SuccessStats {
        count,
        successes,
        mean,
        std_error,
        ci99: (mean - Z99 * std_error, mean + Z99 * std_error),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub ratio: f64,
    /// Over middle outcomes `gg, ge, eg, ee`.
    pub branch_probabilities: [f64; 4],
    pub conditional_infidelity: f64,
    pub n_max_used: usize,
    pub max_top_fock_population: f64,
    pub max_excitation_drift: f64,
}

/// Full-cavity singlet swaps over a list of `Δ/g` ratios, keeping `ω_cavity`,
/// `g` and `n_max` from `template`.
pub fn dispersive_sweep(ratios: &[f64], template: &PhysParams, theta: f64) -> Result<Vec<SweepPoint>> {
    if ratios.is_empty() {
        return Err(Error::Empty("sweep needs at least one ratio"));
    }
    let left = prepare_singlet(1, 2)?;
    let right = prepare_singlet(3, 4)?;
    ratios
        .iter()
        .map(|&ratio| {
            if ratio.is_nan() || ratio < 2.0 {
                return Err(Error::InvalidParams(format!("sweep ratio {ratio} < 2")));
            }
            let g = template.g();
            let p = PhysParams::new(
                template.omega_cavity(),
                template.omega_cavity() + ratio * g,
                g,
                template.n_max(),
            )?;
            let run = swap_full_cavity(&left, &right, &p, theta)?;
            Ok(SweepPoint {
                ratio,
                branch_probabilities: run.branch_probabilities(),
                conditional_infidelity: run.conditional_infidelity,
                n_max_used: p.n_max(),
                max_top_fock_population: run.max_top_fock_population,
                max_excitation_drift: run.max_excitation_drift,
            })
        })
        .collect()
}
