use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::Serialize;

use super::CLASSIFY_TOL;
use crate::error::{Error, Result};
use crate::hilbert::{StateVector, C64, NORM_TOL};
use crate::model::TwoQubitBasis;

pub type QdId = u32;

pub fn qd_label(id: QdId) -> String {
    format!("QD{id}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Tag {
    Singlet,
    Psi,
    PsiPrime,
    Other,
}

impl Tag {
    /// Reference state over `[ee, eg, ge, gg]`, or `None` for `Other`.
    pub fn target(self) -> Option<[C64; 4]> {
        let h = FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        match self {
            Tag::Singlet => Some([z, C64::new(h, 0.0), C64::new(-h, 0.0), z]),
            Tag::Psi => Some([z, C64::new(0.0, -h), C64::new(h, 0.0), z]),
            Tag::PsiPrime => Some([z, C64::new(h, 0.0), C64::new(0.0, -h), z]),
            Tag::Other => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Singlet => "Singlet",
            Tag::Psi => "Psi",
            Tag::PsiPrime => "PsiPrime",
            Tag::Other => "Other",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two-dot state between the endpoint dots of a link.
///
/// Amplitudes are stored over `[ee, eg, ge, gg]` with the left dot written
/// first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairState {
    left_qd: QdId,
    right_qd: QdId,
    amplitudes: [C64; 4],
    tag: Tag,
}

const EE: usize = 0;
const EG: usize = 1;
const GE: usize = 2;
const GG: usize = 3;

impl PairState {
    pub fn from_amplitudes(left_qd: QdId, right_qd: QdId, amplitudes: [C64; 4]) -> Result<Self> {
        if left_qd == right_qd {
            return Err(Error::QdCollision(left_qd));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() >= NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let mut pair = Self {
            left_qd,
            right_qd,
            amplitudes,
            tag: Tag::Other,
        };
        pair.tag = classify_pair(&pair, CLASSIFY_TOL);
        Ok(pair)
    }

    /// Pair from a normalized two-qubit [`StateVector`] (left dot first).
    pub fn from_state(left_qd: QdId, right_qd: QdId, state: &StateVector) -> Result<Self> {
        if state.dims() != [2, 2] {
            return Err(Error::DimensionMismatch {
                expected: vec![2, 2],
                found: state.dims().to_vec(),
            });
        }
        let a = state.amplitudes();
        Self::from_amplitudes(left_qd, right_qd, [a[3], a[2], a[1], a[0]])
    }

    pub fn to_state(&self) -> StateVector {
        let a = &self.amplitudes;
        StateVector::new(
            vec![a[GG], a[GE], a[EG], a[EE]],
            vec![2, 2],
            [qd_label(self.left_qd), qd_label(self.right_qd)],
        )
        .expect("distinct dots")
    }

    pub fn left_qd(&self) -> QdId {
        self.left_qd
    }

    pub fn right_qd(&self) -> QdId {
        self.right_qd
    }

    pub fn labels(&self) -> [String; 2] {
        [qd_label(self.left_qd), qd_label(self.right_qd)]
    }

    /// Amplitudes over `[ee, eg, ge, gg]`.
    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amplitudes
    }

    pub fn amplitude(&self, basis: TwoQubitBasis) -> C64 {
        match basis {
            TwoQubitBasis::Ee => self.amplitudes[EE],
            TwoQubitBasis::Eg => self.amplitudes[EG],
            TwoQubitBasis::Ge => self.amplitudes[GE],
            TwoQubitBasis::Gg => self.amplitudes[GG],
        }
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    /// Same state on a different pair of dots.
    pub fn relabeled(&self, left_qd: QdId, right_qd: QdId) -> Result<Self> {
        if left_qd == right_qd {
            return Err(Error::QdCollision(left_qd));
        }
        Ok(Self {
            left_qd,
            right_qd,
            ..self.clone()
        })
    }

    /// `|⟨other|self⟩|²` over amplitudes `[ee, eg, ge, gg]`.
    pub fn overlap(&self, other: &[C64; 4]) -> f64 {
        let ip: C64 = other
            .iter()
            .zip(&self.amplitudes)
            .map(|(o, s)| o.conj() * s)
            .sum();
        ip.norm_sqr().min(1.0)
    }

    /// Fidelity to the reference state of `tag` (0 for `Other`).
    pub fn fidelity_to(&self, tag: Tag) -> f64 {
        tag.target().map_or(0.0, |t| self.overlap(&t))
    }

    /// Pure-state concurrence `2|a_ee a_gg − a_eg a_ge|`.
    pub fn concurrence(&self) -> f64 {
        let a = &self.amplitudes;
        (2.0 * (a[EE] * a[GG] - a[EG] * a[GE]).norm()).min(1.0)
    }
}

/// Ideal `(|eg⟩ − |ge⟩)/√2` on the dots `left_qd, right_qd`.
pub fn prepare_singlet(left_qd: QdId, right_qd: QdId) -> Result<PairState> {
    if left_qd == right_qd {
        return Err(Error::QdCollision(left_qd));
    }
    let amps = Tag::Singlet.target().expect("singlet target");
    Ok(PairState {
        left_qd,
        right_qd,
        amplitudes: amps,
        tag: Tag::Singlet,
    })
}

/// Phase-insensitive classification: the first of `Singlet`, `Psi`,
/// `PsiPrime` with `|⟨target|pair⟩|² ≥ 1 − tol`, else `Other`.
///
/// `ψ` and `ψ′` are orthogonal and each has overlap ½ with the singlet, so
/// the answer is unique for any `tol < ½`.
pub fn classify_pair(pair: &PairState, tol: f64) -> Tag {
    [Tag::Singlet, Tag::Psi, Tag::PsiPrime]
        .into_iter()
        .find(|&t| pair.fidelity_to(t) >= 1.0 - tol)
        .unwrap_or(Tag::Other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singlet_amplitudes() {
        let s = prepare_singlet(1, 2).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_eq!(s.amplitude(TwoQubitBasis::Eg), C64::new(h, 0.0));
        assert_eq!(s.amplitude(TwoQubitBasis::Ge), C64::new(-h, 0.0));
        assert_eq!(s.amplitude(TwoQubitBasis::Ee), C64::new(0.0, 0.0));
        assert_eq!(s.tag(), Tag::Singlet);
        assert!((s.concurrence() - 1.0).abs() < 1e-15);
        assert!(matches!(prepare_singlet(3, 3), Err(Error::QdCollision(3))));
        // state-vector layout: index 2 is |eg⟩
        assert_eq!(s.to_state().amplitudes()[2], C64::new(h, 0.0));
        assert_eq!(PairState::from_state(1, 2, &s.to_state()).unwrap(), s);
    }

    #[test]
    fn classification() {
        let h = FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        // (|ge⟩ − i|eg⟩)/√2
        let psi = PairState::from_amplitudes(1, 4, [z, C64::new(0.0, -h), C64::new(h, 0.0), z]).unwrap();
        assert_eq!(psi.tag(), Tag::Psi);
        let eg = PairState::from_amplitudes(1, 4, [z, C64::new(1.0, 0.0), z, z]).unwrap();
        assert_eq!(eg.tag(), Tag::Other);
        assert_eq!(eg.concurrence(), 0.0);
        let p = Tag::Psi.target().unwrap();
        let q = Tag::PsiPrime.target().unwrap();
        let ip: C64 = p.iter().zip(&q).map(|(a, b)| a.conj() * b).sum();
        assert!(ip.norm() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        let z = C64::new(0.0, 0.0);
        let r = PairState::from_amplitudes(1, 2, [C64::new(0.9, 0.0), z, z, z]);
        assert!(matches!(r, Err(Error::NotNormalized(_))));
    }

    proptest! {
        #[test]
        fn global_phase_is_ignored(phi in -10.0f64..10.0) {
            let ph = C64::from_polar(1.0, phi);
            for tag in [Tag::Singlet, Tag::Psi, Tag::PsiPrime] {
                let t = tag.target().unwrap().map(|a| a * ph);
                let pair = PairState::from_amplitudes(5, 8, t).unwrap();
                prop_assert_eq!(pair.tag(), tag);
            }
        }
    }
}
