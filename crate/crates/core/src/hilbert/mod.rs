//! Dense linear algebra over labeled tensor-product Hilbert spaces.
//!
//! Composite indices are big-endian: subsystem 0 is the slowest-varying
//! digit. Qubit basis states are indexed `g = 0`, `e = 1`, so for labels
//! `[a, b]` the ket `|ge⟩` sits at index 1.

mod density;
mod operator;
mod state;

pub use density::{partial_trace, DensityMatrix, PartialTrace};
pub use operator::{evolve, evolve_on, HermitianEigen, OperatorKind, OperatorMatrix};
pub use state::{apply, tensor, StateVector};

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Tolerance on `‖ψ‖ − 1` for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on `‖H − H†‖_max` for Hermitian operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `‖U†U − I‖_max` for unitary operators.
pub const UNITARY_TOL: f64 = 1e-10;

/// Ordered list of subsystem labels and dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Space {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl Space {
    pub fn new<S: Into<String>>(
        dims: Vec<usize>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.is_empty() {
            return Err(Error::InvalidShape("space has no subsystems".into()));
        }
        if dims.len() != labels.len() {
            return Err(Error::InvalidShape(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("subsystem dimension {d} < 2")));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { dims, labels })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Total dimension.
    pub fn size(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Mixed-radix digits of a composite index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (i, &d) in self.dims.iter().enumerate().rev() {
            out[i] = index % d;
            index /= d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() || digits.iter().zip(&self.dims).any(|(x, d)| x >= d) {
            return Err(Error::InvalidShape(format!(
                "digits {digits:?} out of range for dims {:?}",
                self.dims
            )));
        }
        Ok(digits.iter().zip(&self.dims).fold(0, |acc, (x, d)| acc * d + x))
    }

    pub fn compose(&self, other: &Space) -> Result<Space> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let labels = self.labels.iter().chain(&other.labels).cloned();
        Space::new(dims, labels)
    }

    /// The space with the subsystems at `positions` removed, or `None` if
    /// nothing would remain.
    pub(crate) fn without(&self, positions: &[usize]) -> Option<Space> {
        let (dims, labels): (Vec<_>, Vec<_>) = self
            .dims
            .iter()
            .zip(&self.labels)
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, (d, l))| (*d, l.clone()))
            .unzip();
        if dims.is_empty() {
            None
        } else {
            Some(Space { dims, labels })
        }
    }

    pub(crate) fn select(&self, positions: &[usize]) -> Space {
        Space {
            dims: positions.iter().map(|&p| self.dims[p]).collect(),
            labels: positions.iter().map(|&p| self.labels[p].clone()).collect(),
        }
    }

    pub(crate) fn with_labels(&self, labels: Vec<String>) -> Result<Space> {
        Space::new(self.dims.clone(), labels)
    }
}

/// Index bookkeeping for acting on a subset of subsystems.
///
/// Every composite index is `bases[r] + offsets[k]`, where `k` enumerates the
/// targeted subsystems (in target order, big-endian) and `r` enumerates the
/// remaining subsystems in their original order.
pub(crate) struct Split {
    pub bases: Vec<usize>,
    pub offsets: Vec<usize>,
}

impl Split {
    pub fn new(space: &Space, targets: &[usize]) -> Self {
        let strides = space.strides();
        let target_dims: Vec<usize> = targets.iter().map(|&p| space.dims[p]).collect();
        let target_size: usize = target_dims.iter().product();
        let offsets = (0..target_size)
            .map(|mut k| {
                let mut off = 0;
                for (j, &d) in target_dims.iter().enumerate().rev() {
                    off += (k % d) * strides[targets[j]];
                    k /= d;
                }
                off
            })
            .collect();

        let rest: Vec<usize> = (0..space.len()).filter(|p| !targets.contains(p)).collect();
        let rest_size: usize = rest.iter().map(|&p| space.dims[p]).product();
        let bases = (0..rest_size)
            .map(|mut r| {
                let mut base = 0;
                for &p in rest.iter().rev() {
                    base += (r % space.dims[p]) * strides[p];
                    r /= space.dims[p];
                }
                base
            })
            .collect();
        Self { bases, offsets }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let s = Space::new(vec![3, 2, 4], ["c", "a", "b"]).unwrap();
        for i in 0..s.size() {
            assert_eq!(s.index(&s.digits(i)).unwrap(), i);
        }
        assert_eq!(s.strides(), vec![8, 4, 1]);
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(matches!(
            Space::new(vec![2, 2], ["a", "a"]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(Space::new(vec![1], ["a"]).is_err());
        assert!(Space::new(vec![2], ["a", "b"]).is_err());
    }

    #[test]
    fn split_covers_every_index_once() {
        let s = Space::new(vec![2, 3, 2, 2], ["a", "b", "c", "d"]).unwrap();
        let split = Split::new(&s, &[2, 0]);
        let mut seen = vec![false; s.size()];
        for &b in &split.bases {
            for &o in &split.offsets {
                assert!(!seen[b + o]);
                seen[b + o] = true;
            }
        }
        assert!(seen.into_iter().all(|x| x));
        // first target slowest: offset of (c=1, a=0) is stride of c
        assert_eq!(split.offsets[2], s.strides()[2]);
    }
}
