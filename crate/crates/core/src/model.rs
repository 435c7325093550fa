//! Tavis–Cummings cavity model for two quantum dots and its dispersive
//! reduction.
//!
//! The full model lives on `cavity(n_max + 1) ⊗ QD_a ⊗ QD_b` in the lab
//! frame. The effective model is a two-qubit exchange Hamiltonian of
//! strength `λ = g²/Δ`, valid with the cavity in vacuum and `|Δ| ≫ g`.
//! Full and effective dynamics are compared in the frame of the free
//! Hamiltonian `H₀`, see [`align_frame`].

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{apply, OperatorKind, OperatorMatrix, Space, StateVector, C64};

pub const CAVITY: &str = "cavity";
pub const QD_A: &str = "QD_a";
pub const QD_B: &str = "QD_b";

/// Smallest `|Δ|/g` for which the dispersive reduction is trusted.
pub const DISPERSIVE_RATIO: f64 = 10.0;

/// Cavity and dot parameters, in units where ħ = 1.
///
/// Both dots share one transition frequency. Detuning and `λ` are derived
/// on demand and never stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysParams {
    omega_cavity: f64,
    omega_qubit: f64,
    g: f64,
    n_max: usize,
}

impl PhysParams {
    pub fn new(omega_cavity: f64, omega_qubit: f64, g: f64, n_max: usize) -> Result<Self> {
        if ![omega_cavity, omega_qubit, g].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("frequencies must be finite".into()));
        }
        if g < 0.0 {
            return Err(Error::InvalidParams(format!("coupling g = {g} is negative")));
        }
        if omega_qubit == omega_cavity {
            return Err(Error::InvalidParams("detuning must be nonzero".into()));
        }
        if n_max < 1 {
            return Err(Error::InvalidParams("n_max must be at least 1".into()));
        }
        Ok(Self {
            omega_cavity,
            omega_qubit,
            g,
            n_max,
        })
    }

    /// `ω_cavity = 1`, `g = g_over_omega`, `Δ = delta_over_g · g`.
    pub fn from_ratios(g_over_omega: f64, delta_over_g: f64, n_max: usize) -> Result<Self> {
        if g_over_omega.is_nan() || g_over_omega <= 0.0 || !delta_over_g.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need g/ω > 0 and finite Δ/g, got {g_over_omega} and {delta_over_g}"
            )));
        }
        let g = g_over_omega;
        Self::new(1.0, 1.0 + delta_over_g * g, g, n_max)
    }

    pub fn omega_cavity(&self) -> f64 {
        self.omega_cavity
    }

    pub fn omega_qubit(&self) -> f64 {
        self.omega_qubit
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `Δ = ω_qubit − ω_cavity`.
    pub fn delta(&self) -> f64 {
        self.omega_qubit - self.omega_cavity
    }

    /// `λ = g²/Δ`.
    pub fn lambda(&self) -> f64 {
        self.g * self.g / self.delta()
    }

    pub fn is_dispersive(&self) -> bool {
        self.delta().abs() >= DISPERSIVE_RATIO * self.g
    }

    pub fn with_n_max(self, n_max: usize) -> Result<Self> {
        Self::new(self.omega_cavity, self.omega_qubit, self.g, n_max)
    }

    pub fn with_g(self, g: f64) -> Result<Self> {
        Self::new(self.omega_cavity, self.omega_qubit, g, self.n_max)
    }

    /// Lab-frame time at which `λt = theta`.
    pub fn time_for(&self, theta: f64) -> Result<f64> {
        let lambda = self.lambda();
        if lambda == 0.0 {
            return Err(Error::InvalidParams("λ = 0: no exchange time exists".into()));
        }
        Ok(theta / lambda)
    }

    fn space(&self) -> Space {
        Space::new(vec![self.n_max + 1, 2, 2], [CAVITY, QD_A, QD_B]).expect("valid space")
    }
}

fn lift(space: &Space, op: &OperatorMatrix, target: &str) -> OperatorMatrix {
    op.embed(space, &[target]).expect("target exists")
}

fn free_terms(p: &PhysParams) -> Result<OperatorMatrix> {
    let space = p.space();
    let dim = p.n_max + 1;
    let n = lift(&space, &OperatorMatrix::number(CAVITY, dim)?, CAVITY);
    let za = lift(&space, &OperatorMatrix::sigma_z(QD_A), QD_A);
    let zb = lift(&space, &OperatorMatrix::sigma_z(QD_B), QD_B);
    let half_wq = C64::new(0.5 * p.omega_qubit, 0.0);
    n.scaled(C64::new(p.omega_cavity, 0.0))
        .add(&za.scaled(half_wq))?
        .add(&zb.scaled(half_wq))
}

/// `H₀ = ω a†a + ½ω_q σ_Z,a + ½ω_q σ_Z,b`.
pub fn build_h0(p: &PhysParams) -> Result<OperatorMatrix> {
    free_terms(p)?.with_kind(OperatorKind::Hermitian)
}

/// Full Tavis–Cummings Hamiltonian `H₀ + g Σᵢ (a†σᵢ⁻ + aσᵢ⁺)`.
pub fn build_full_tcm(p: &PhysParams) -> Result<OperatorMatrix> {
    let dim = p.n_max + 1;
    let space = p.space();
    let a = OperatorMatrix::annihilation(CAVITY, dim)?;
    let ad = a.adjoint();
    let mut h = free_terms(p)?;
    for qd in [QD_A, QD_B] {
        let down = ad.kron(&OperatorMatrix::sigma_minus(qd))?.embed(&space, &[CAVITY, qd])?;
        let up = a.kron(&OperatorMatrix::sigma_plus(qd))?.embed(&space, &[CAVITY, qd])?;
        h = h.add(&down.add(&up)?.scaled(C64::new(p.g, 0.0)))?;
    }
    h.with_kind(OperatorKind::Hermitian)
}

/// Total excitation number `a†a + |e⟩⟨e|_a + |e⟩⟨e|_b` on the full space.
pub fn excitation_number(p: &PhysParams) -> Result<OperatorMatrix> {
    let space = p.space();
    lift(&space, &OperatorMatrix::number(CAVITY, p.n_max + 1)?, CAVITY)
        .add(&lift(&space, &OperatorMatrix::excited_projector(QD_A), QD_A))?
        .add(&lift(&space, &OperatorMatrix::excited_projector(QD_B), QD_B))?
        .with_kind(OperatorKind::Hermitian)
}

/// Diagonal matrix of `H₀` eigenvalues in the Fock ⊗ spin basis.
fn h0_diagonal(p: &PhysParams) -> Vec<f64> {
    let space = p.space();
    (0..space.size())
        .map(|i| {
            let d = space.digits(i);
            let spin = |x: usize| if x == 1 { 0.5 } else { -0.5 };
            p.omega_cavity * d[0] as f64 + p.omega_qubit * (spin(d[1]) + spin(d[2]))
        })
        .collect()
}

/// `e^{+iH₀t}` as an operator on `cavity ⊗ QD_a ⊗ QD_b`.
pub fn frame_rotation(p: &PhysParams, t: f64) -> OperatorMatrix {
    let diag = h0_diagonal(p);
    let n = diag.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, e) in diag.into_iter().enumerate() {
        m[(i, i)] = C64::from_polar(1.0, e * t);
    }
    OperatorMatrix::on_space(p.space(), m, OperatorKind::Unitary).expect("diagonal phases")
}

/// Move a lab-frame state on `cavity ⊗ QD_a ⊗ QD_b` into the interaction
/// picture of `H₀` at time `t`: returns `e^{+iH₀t}|state⟩`.
pub fn align_frame(state: &StateVector, t: f64, p: &PhysParams) -> Result<StateVector> {
    let expected = [p.n_max + 1, 2, 2];
    if state.dims() != expected {
        return Err(Error::DimensionMismatch {
            expected: expected.to_vec(),
            found: state.dims().to_vec(),
        });
    }
    let targets = state.labels().to_vec();
    apply(&frame_rotation(p, t), &targets, state)
}

/// [`align_frame`] for a larger state where the cavity and the two coupled
/// dots are the subsystems named in `targets` (cavity first).
pub fn align_frame_on<S: AsRef<str>>(
    state: &StateVector,
    targets: &[S],
    t: f64,
    p: &PhysParams,
) -> Result<StateVector> {
    apply(&frame_rotation(p, t), targets, state)
}

/// Effective two-dot Hamiltonian `λ[Σᵢ |e⟩ᵢ⟨e| + σ_a⁺σ_b⁻ + σ_a⁻σ_b⁺]`.
pub fn build_effective(p: &PhysParams) -> OperatorMatrix {
    effective_with_strength(p.lambda())
}

/// The effective Hamiltonian for a given exchange strength. With
/// `lambda = 1`, evolving for time `θ` is a step of `λt = θ`.
pub fn effective_with_strength(lambda: f64) -> OperatorMatrix {
    // basis order gg, ge, eg, ee
    let l = C64::new(lambda, 0.0);
    let mut m = DMatrix::zeros(4, 4);
    m[(1, 1)] = l;
    m[(2, 2)] = l;
    m[(1, 2)] = l;
    m[(2, 1)] = l;
    m[(3, 3)] = l * 2.0;
    OperatorMatrix::new(m, vec![2, 2], [QD_A, QD_B], OperatorKind::Hermitian)
        .expect("real symmetric")
}

/// Two-dot product basis ket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoQubitBasis {
    Gg,
    Ge,
    Eg,
    Ee,
}

impl TwoQubitBasis {
    pub const ALL: [TwoQubitBasis; 4] = [Self::Gg, Self::Ge, Self::Eg, Self::Ee];

    /// Composite index with `g = 0`, `e = 1`, first dot slowest.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gg => "gg",
            Self::Ge => "ge",
            Self::Eg => "eg",
            Self::Ee => "ee",
        }
    }
}

impl fmt::Display for TwoQubitBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TwoQubitBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gg" => Ok(Self::Gg),
            "ge" => Ok(Self::Ge),
            "eg" => Ok(Self::Eg),
            "ee" => Ok(Self::Ee),
            _ => Err(Error::InvalidBasis(s.to_string())),
        }
    }
}

/// Analytic image of a basis ket under the effective Hamiltonian after
/// `λt = theta`:
///
/// - `|eg⟩ → e^{−iθ}(cos θ |eg⟩ − i sin θ |ge⟩)` and the mirror for `|ge⟩`
/// - `|ee⟩ → e^{−2iθ}|ee⟩`
/// - `|gg⟩ → |gg⟩`
pub fn closed_form_step(basis: TwoQubitBasis, theta: f64) -> StateVector {
    let mut amps = [C64::new(0.0, 0.0); 4];
    let phase = C64::from_polar(1.0, -theta);
    let (s, c) = theta.sin_cos();
    match basis {
        TwoQubitBasis::Gg => amps[0] = C64::new(1.0, 0.0),
        TwoQubitBasis::Ee => amps[3] = C64::from_polar(1.0, -2.0 * theta),
        TwoQubitBasis::Eg => {
            amps[2] = phase * c;
            amps[1] = phase * C64::new(0.0, -s);
        }
        TwoQubitBasis::Ge => {
            amps[1] = phase * c;
            amps[2] = phase * C64::new(0.0, -s);
        }
    }
    StateVector::new(amps.to_vec(), vec![2, 2], [QD_A, QD_B]).expect("4 amplitudes")
}

/// [`closed_form_step`] from a basis label such as `"eg"`.
pub fn closed_form_step_str(basis: &str, theta: f64) -> Result<StateVector> {
    Ok(closed_form_step(basis.parse()?, theta))
}

/// Largest amplitude error between numerical evolution under
/// [`build_effective`] and [`closed_form_step`], over all basis kets and the
/// given angles.
pub fn closed_form_error(p: &PhysParams, thetas: &[f64]) -> Result<f64> {
    let eig = build_effective(p).eigen()?;
    let lambda = p.lambda();
    if lambda == 0.0 {
        return Err(Error::InvalidParams("λ = 0: no exchange".into()));
    }
    let mut worst = 0.0f64;
    for &th in thetas {
        let u = eig.propagator(th / lambda);
        for b in TwoQubitBasis::ALL {
            let start = StateVector::ket(&[QD_A, QD_B], b.as_str())?;
            let num = start.apply(&u, &[QD_A, QD_B])?;
            let exact = closed_form_step(b, th);
            for (x, y) in num.amplitudes().iter().zip(exact.amplitudes()) {
                worst = worst.max((x - y).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{evolve, tensor};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    fn params(ratio: f64) -> PhysParams {
        PhysParams::from_ratios(0.01, ratio, 3).unwrap()
    }

    fn basis(p: &PhysParams, n: usize, a: usize, b: usize) -> StateVector {
        StateVector::basis(vec![p.n_max() + 1, 2, 2], [CAVITY, QD_A, QD_B], &[n, a, b]).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let p = params(20.0);
        assert!((p.delta() - 0.2).abs() < 1e-15);
        assert_eq!(p.lambda(), p.g() * p.g() / p.delta());
        assert!(p.is_dispersive());
        assert!(!params(5.0).is_dispersive());
        assert!(PhysParams::new(1.0, 1.0, 0.01, 4).is_err());
        assert!(PhysParams::from_ratios(0.01, 20.0, 0).is_err());
    }

    #[test]
    fn tcm_matrix_elements() {
        let p = params(20.0);
        let h = build_full_tcm(&p).unwrap();
        assert_eq!(h.kind(), OperatorKind::Hermitian);
        let bra = basis(&p, 0, 1, 0);
        let ket = basis(&p, 1, 0, 0);
        let elem = bra.inner(&apply(&h, bra.labels(), &ket).unwrap()).unwrap();
        assert!((elem - C64::new(p.g(), 0.0)).norm() < 1e-15);
        for n in 0..=p.n_max() {
            let k = basis(&p, n, 0, 0);
            let d = k.inner(&apply(&h, k.labels(), &k).unwrap()).unwrap();
            let expected = n as f64 * p.omega_cavity() - p.omega_qubit();
            assert!((d.re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_limit_is_diagonal_and_free() {
        let p = params(20.0).with_g(0.0).unwrap();
        let h = build_full_tcm(&p).unwrap();
        let e = h.entries();
        for r in 0..e.nrows() {
            for c in 0..e.ncols() {
                if r != c {
                    assert_eq!(e[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
        let h0 = build_h0(&p).unwrap();
        assert!(h.add(&h0.scaled(C64::new(-1.0, 0.0))).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn h0_action_and_number_conservation() {
        let p = params(20.0);
        let h0 = build_h0(&p).unwrap();
        let k = basis(&p, 0, 0, 0);
        let out = apply(&h0, k.labels(), &k).unwrap();
        let expected = k.scaled(C64::new(-p.omega_qubit(), 0.0));
        assert_eq!(out, expected);
        let n = excitation_number(&p).unwrap();
        assert!(h0.commutator(&n).unwrap().max_abs() < 1e-12);
        assert!(build_full_tcm(&p).unwrap().commutator(&n).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn align_frame_properties() {
        let p = params(20.0);
        let labels = [CAVITY, QD_A, QD_B];
        let amps: Vec<C64> = (0..16).map(|i| C64::new(1.0 + i as f64, 0.3 * i as f64)).collect();
        let s = StateVector::new(amps, vec![4, 2, 2], labels).unwrap().normalized().unwrap();
        assert_eq!(align_frame(&s, 0.0, &p).unwrap(), s);
        let t = 123.4;
        let r = align_frame(&s, t, &p).unwrap();
        for (x, y) in r.amplitudes().iter().zip(s.amplitudes()) {
            assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
        let h0 = build_h0(&p).unwrap();
        let back = align_frame(&evolve(&h0, t, &s).unwrap(), t, &p).unwrap();
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((x - y).norm() < 1e-10);
        }
        let wrong = StateVector::ket(&["a", "b"], "gg").unwrap();
        assert!(matches!(
            align_frame(&wrong, t, &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn effective_spectrum_and_action() {
        let p = params(20.0);
        let h = build_effective(&p);
        let l = p.lambda();
        let ee = StateVector::ket(&[QD_A, QD_B], "ee").unwrap();
        let gg = StateVector::ket(&[QD_A, QD_B], "gg").unwrap();
        assert_eq!(apply(&h, &[QD_A, QD_B], &ee).unwrap(), ee.scaled(C64::new(2.0 * l, 0.0)));
        assert_eq!(apply(&h, &[QD_A, QD_B], &gg).unwrap().norm(), 0.0);
        let e = h.entries();
        assert_eq!((e[(1, 1)], e[(1, 2)], e[(2, 1)], e[(2, 2)]), (
            C64::new(l, 0.0),
            C64::new(l, 0.0),
            C64::new(l, 0.0),
            C64::new(l, 0.0)
        ));
        let vals = h.eigen().unwrap().values();
        for (v, expected) in vals.iter().zip([0.0, 0.0, 2.0 * l, 2.0 * l]) {
            assert!((v - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms() {
        let s = closed_form_step(TwoQubitBasis::Eg, FRAC_PI_4);
        let w = C64::from_polar(1.0, -FRAC_PI_4) / 2f64.sqrt();
        assert!((s.amplitudes()[2] - w).norm() < 1e-15);
        assert!((s.amplitudes()[1] - w * C64::new(0.0, -1.0)).norm() < 1e-15);
        for th in [0.0, 0.7, -2.0] {
            assert_eq!(
                closed_form_step(TwoQubitBasis::Gg, th),
                StateVector::ket(&[QD_A, QD_B], "gg").unwrap()
            );
            let ee = closed_form_step(TwoQubitBasis::Ee, th);
            assert!((ee.amplitudes()[3] - C64::from_polar(1.0, -2.0 * th)).norm() < 1e-15);
        }
        assert!(matches!(closed_form_step_str("xg", 0.1), Err(Error::InvalidBasis(_))));
    }

    #[test]
    fn evolution_matches_closed_form() {
        let p = params(20.0);
        let h = build_effective(&p);
        for b in TwoQubitBasis::ALL {
            for th in [0.0, FRAC_PI_8, FRAC_PI_4, PI / 2.0, 1.234] {
                let start = StateVector::ket(&[QD_A, QD_B], b.as_str()).unwrap();
                let num = evolve(&h, th / p.lambda(), &start).unwrap();
                let exact = closed_form_step(b, th);
                for (x, y) in num.amplitudes().iter().zip(exact.amplitudes()) {
                    assert!((x - y).norm() < 1e-10, "{b} θ={th}");
                }
            }
        }
    }

    #[test]
    fn vacuum_tensor_spin_ordering() {
        let p = params(20.0);
        let s = tensor(&[
            StateVector::vacuum(CAVITY, p.n_max() + 1).unwrap(),
            StateVector::ket(&[QD_A, QD_B], "eg").unwrap(),
        ])
        .unwrap();
        assert_eq!(s, basis(&p, 0, 1, 0));
    }
}
