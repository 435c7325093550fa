use std::fmt;

use serde::Serialize;

use super::{OperatorMatrix, Space, Split, C64, NORM_TOL};
use crate::error::{Error, Result};

/// Pure state as a dense amplitude vector over a labeled product space.
///
/// States are not forced to be normalized: applying a ladder operator can
/// produce a zero or sub-normalized vector, and callers check [`norm`]
/// before renormalizing.
///
/// [`norm`]: StateVector::norm
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateVector {
    space: Space,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new<S: Into<String>>(
        amplitudes: Vec<C64>,
        dims: Vec<usize>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::from_space(Space::new(dims, labels)?, amplitudes)
    }

    pub fn from_space(space: Space, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != space.size() {
            return Err(Error::InvalidShape(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.size()
            )));
        }
        Ok(Self { space, amplitudes })
    }

    /// Computational basis state with the given digit per subsystem.
    pub fn basis<S: Into<String>>(
        dims: Vec<usize>,
        labels: impl IntoIterator<Item = S>,
        digits: &[usize],
    ) -> Result<Self> {
        let space = Space::new(dims, labels)?;
        let idx = space.index(digits)?;
        let mut amps = vec![C64::new(0.0, 0.0); space.size()];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    /// Qubit product ket written as a `g`/`e` string, e.g. `ket(&["QD1", "QD2"], "eg")`.
    pub fn ket<S: AsRef<str>>(labels: &[S], pattern: &str) -> Result<Self> {
        let digits = pattern
            .chars()
            .map(|c| match c {
                'g' => Ok(0),
                'e' => Ok(1),
                _ => Err(Error::InvalidBasis(pattern.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if digits.len() != labels.len() {
            return Err(Error::InvalidBasis(pattern.to_string()));
        }
        Self::basis(
            vec![2; labels.len()],
            labels.iter().map(|l| l.as_ref().to_string()),
            &digits,
        )
    }

    /// Fock vacuum of a mode truncated to `dim` levels.
    pub fn vacuum(label: &str, dim: usize) -> Result<Self> {
        Self::basis(vec![dim], [label], &[0])
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dims(&self) -> &[usize] {
        self.space.dims()
    }

    pub fn labels(&self) -> &[String] {
        self.space.labels()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<C64> {
        Ok(self.amplitudes[self.space.index(digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOL
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm()))
        }
    }

    /// Rescaled copy with unit norm. Fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * c).collect(),
        }
    }

    /// `⟨self|other⟩`. Only dimensions must agree; labels are ignored.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims().to_vec(),
                found: other.dims().to_vec(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Same amplitudes under new subsystem names.
    pub fn relabeled<S: Into<String>>(&self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels = labels.into_iter().map(Into::into).collect();
        Ok(Self {
            space: self.space.with_labels(labels)?,
            amplitudes: self.amplitudes.clone(),
        })
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let space = self.space.compose(&other.space)?;
        let mut amps = Vec::with_capacity(space.size());
        for a in &self.amplitudes {
            amps.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    /// Reorder subsystems so that `order` lists every label once.
    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.space.len() {
            return Err(Error::InvalidShape(format!(
                "permutation of {} labels for {} subsystems",
                order.len(),
                self.space.len()
            )));
        }
        let positions = self.space.positions(order)?;
        let split = Split::new(&self.space, &positions);
        debug_assert_eq!(split.bases, vec![0]);
        let space = self.space.select(&positions);
        let amplitudes = split.offsets.iter().map(|&o| self.amplitudes[o]).collect();
        Ok(Self { space, amplitudes })
    }

    /// Drop subsystems that sit in a definite computational basis state,
    /// such as measured qubits after projection.
    ///
    /// Fails with [`Error::NotDiscardable`] when any listed subsystem carries
    /// weight on more than one basis level.
    pub fn discard<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let positions = self.space.positions(labels)?;
        let rest = self
            .space
            .without(&positions)
            .ok_or_else(|| Error::InvalidShape("cannot discard every subsystem".into()))?;
        let split = Split::new(&self.space, &positions);
        // weight on each joint level of the discarded block
        let weights: Vec<f64> = split
            .offsets
            .iter()
            .map(|&o| split.bases.iter().map(|&b| self.amplitudes[b + o].norm_sqr()).sum())
            .collect();
        let total: f64 = weights.iter().sum();
        let (best, &peak) = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if total - peak > 1e-20 * total.max(1.0) {
            let culprit = positions
                .iter()
                .map(|&p| self.labels()[p].clone())
                .collect::<Vec<_>>()
                .join(",");
            return Err(Error::NotDiscardable(culprit));
        }
        let off = split.offsets[best];
        let amplitudes = split.bases.iter().map(|&b| self.amplitudes[b + off]).collect();
        Ok(Self {
            space: rest,
            amplitudes,
        })
    }

    /// `|self⟩` with `op` acting on `targets`.
    pub fn apply<S: AsRef<str>>(&self, op: &OperatorMatrix, targets: &[S]) -> Result<Self> {
        apply(op, targets, self)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() < 1e-12 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let digits = self.space.digits(i);
            let ket: String = digits
                .iter()
                .zip(self.dims())
                .map(|(&x, &d)| {
                    if d == 2 {
                        if x == 0 { "g".to_string() } else { "e".to_string() }
                    } else {
                        x.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join(",");
            write!(f, "({:.6}{:+.6}i)|{ket}⟩", a.re, a.im)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Kronecker product of the parts, part 0 slowest-varying.
pub fn tensor(parts: &[StateVector]) -> Result<StateVector> {
    let (first, rest) = parts
        .split_first()
        .ok_or(Error::Empty("tensor needs at least one part"))?;
    rest.iter().try_fold(first.clone(), |acc, p| acc.tensor(p))
}

/// Apply `op` to the subsystems named in `targets` (in that order), leaving
/// the rest untouched.
pub fn apply<S: AsRef<str>>(
    op: &OperatorMatrix,
    targets: &[S],
    state: &StateVector,
) -> Result<StateVector> {
    let positions = state.space.positions(targets)?;
    let target_dims: Vec<usize> = positions.iter().map(|&p| state.dims()[p]).collect();
    if target_dims != op.dims() {
        return Err(Error::DimensionMismatch {
            expected: op.dims().to_vec(),
            found: target_dims,
        });
    }
    let split = Split::new(&state.space, &positions);
    let m = op.entries();
    let n = split.offsets.len();
    let mut out = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
    let mut local = vec![C64::new(0.0, 0.0); n];
    for &base in &split.bases {
        for (k, &o) in split.offsets.iter().enumerate() {
            local[k] = state.amplitudes[base + o];
        }
        for (r, &o) in split.offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (k, v) in local.iter().enumerate() {
                let e = m[(r, k)];
                if e.re != 0.0 || e.im != 0.0 {
                    acc += e * v;
                }
            }
            out[base + o] = acc;
        }
    }
    Ok(StateVector {
        space: state.space.clone(),
        amplitudes: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn singlet(a: &str, b: &str) -> StateVector {
        StateVector::new(
            vec![c(0.0, 0.0), c(-FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0)],
            vec![2, 2],
            [a, b],
        )
        .unwrap()
    }

    #[test]
    fn g_tensor_e_is_index_one() {
        let g = StateVector::ket(&["a"], "g").unwrap();
        let e = StateVector::ket(&["b"], "e").unwrap();
        let ge = tensor(&[g, e]).unwrap();
        assert_eq!(ge.dims(), &[2, 2]);
        assert_eq!(ge.amplitudes()[1], c(1.0, 0.0));
        assert_eq!(ge.norm_sqr(), 1.0);
    }

    #[test]
    fn two_singlets_have_four_half_amplitudes() {
        let s = tensor(&[singlet("QD1", "QD2"), singlet("QD3", "QD4")]).unwrap();
        let nonzero: Vec<_> = s.amplitudes().iter().filter(|a| a.norm() > 1e-15).collect();
        assert_eq!(nonzero.len(), 4);
        for a in nonzero {
            assert!((a.norm() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn tensor_of_three_keeps_norm() {
        let a = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)], vec![2], ["a"]).unwrap();
        let b = singlet("b", "c");
        let v = StateVector::new(
            vec![c(0.5, 0.5), c(0.5, -0.5), c(0.0, 0.0)],
            vec![3],
            ["m"],
        )
        .unwrap();
        let t = tensor(&[a, b, v]).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_rejects_duplicate_labels() {
        let r = tensor(&[singlet("a", "b"), singlet("b", "c")]);
        assert!(matches!(r, Err(Error::DuplicateLabel(l)) if l == "b"));
        assert!(matches!(tensor(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn sigma_plus_raises_listed_qubit() {
        let gg = StateVector::ket(&["QD2", "QD3"], "gg").unwrap();
        let up = apply(&OperatorMatrix::sigma_plus("q"), &["QD2"], &gg).unwrap();
        assert_eq!(up, StateVector::ket(&["QD2", "QD3"], "eg").unwrap());
        let down = apply(&OperatorMatrix::sigma_minus("q"), &["QD2"], &gg).unwrap();
        assert_eq!(down.norm(), 0.0);
        assert!(down.normalized().is_err());
    }

    #[test]
    fn identity_is_exact() {
        let s = singlet("a", "b");
        let id = OperatorMatrix::identity(vec![2, 2], ["x", "y"]).unwrap();
        assert_eq!(apply(&id, &["b", "a"], &s).unwrap(), s);
    }

    #[test]
    fn apply_errors() {
        let s = singlet("a", "b");
        assert!(matches!(
            apply(&OperatorMatrix::sigma_z("q"), &["z"], &s),
            Err(Error::UnknownLabel(_))
        ));
        let op = OperatorMatrix::identity(vec![3], ["m"]).unwrap();
        assert!(matches!(
            apply(&op, &["a"], &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn target_order_matters() {
        // σ⁺ ⊗ I applied to targets [b, a] raises b
        let gg = StateVector::ket(&["a", "b"], "gg").unwrap();
        let op = OperatorMatrix::sigma_plus("x")
            .kron(&OperatorMatrix::identity(vec![2], ["y"]).unwrap())
            .unwrap();
        let out = apply(&op, &["b", "a"], &gg).unwrap();
        assert_eq!(out, StateVector::ket(&["a", "b"], "ge").unwrap());
    }

    #[test]
    fn discard_drops_basis_subsystems() {
        let s = tensor(&[
            StateVector::ket(&["m"], "e").unwrap(),
            singlet("a", "b"),
        ])
        .unwrap();
        let d = s.discard(&["m"]).unwrap();
        assert_eq!(d, singlet("a", "b"));
        assert!(matches!(s.discard(&["a"]), Err(Error::NotDiscardable(_))));
    }

    #[test]
    fn permute_reverses_order() {
        let s = StateVector::ket(&["a", "b", "c"], "egg").unwrap();
        let p = s.permuted(&["c", "b", "a"]).unwrap();
        assert_eq!(p, StateVector::ket(&["c", "b", "a"], "gge").unwrap());
    }
}
