use nalgebra::DMatrix;
use serde::Serialize;

use super::{OperatorKind, OperatorMatrix, Space, Split, StateVector, C64};
use crate::error::{Error, Result};

const TRACE_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = -1e-10;

/// Normalized, Hermitian, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    space: Space,
    #[serde(serialize_with = "serialize_matrix")]
    entries: DMatrix<C64>,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<(f64, f64)> = (0..m.ncols()).map(|c| (m[(r, c)].re, m[(r, c)].im)).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl DensityMatrix {
    pub fn new<S: Into<String>>(
        entries: DMatrix<C64>,
        dims: Vec<usize>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::on_space(Space::new(dims, labels)?, entries)
    }

    pub fn on_space(space: Space, entries: DMatrix<C64>) -> Result<Self> {
        let op = OperatorMatrix::on_space(space, entries, OperatorKind::Hermitian)
            .map_err(|e| Error::InvalidDensity(e.to_string()))?;
        let tr = op.entries().trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = op.eigen()?.values()[0];
        if min < EIGEN_FLOOR {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            space: op.space().clone(),
            entries: op.entries().clone(),
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        state.ensure_normalized()?;
        let n = state.amplitudes().len();
        let a = state.amplitudes();
        let mut m = DMatrix::from_fn(n, n, |r, c| a[r] * a[c].conj());
        renormalize(&mut m);
        Ok(Self {
            space: state.space().clone(),
            entries: m,
        })
    }

    /// `I / d`.
    pub fn maximally_mixed<S: Into<String>>(
        dims: Vec<usize>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let space = Space::new(dims, labels)?;
        let n = space.size();
        let entries = DMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
        Ok(Self { space, entries })
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

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.as_operator().eigen().expect("density is Hermitian").values()
    }

    pub fn as_operator(&self) -> OperatorMatrix {
        OperatorMatrix::on_space(self.space.clone(), self.entries.clone(), OperatorKind::General)
            .expect("square")
            .with_kind(OperatorKind::Hermitian)
            .expect("density is Hermitian")
    }

    /// `⟨φ|ρ|φ⟩`.
    pub fn expectation_in(&self, state: &StateVector) -> Result<f64> {
        if self.dims() != state.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims().to_vec(),
                found: state.dims().to_vec(),
            });
        }
        let a = state.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..a.len() {
            for c in 0..a.len() {
                acc += a[r].conj() * self.entries[(r, c)] * a[c];
            }
        }
        Ok(acc.re)
    }

    /// `U ρ U†` with `U` acting on `targets`.
    pub fn conjugated<S: AsRef<str>>(&self, u: &OperatorMatrix, targets: &[S]) -> Result<Self> {
        let full = u.embed(&self.space, targets)?;
        let mut m = full.entries() * &self.entries * full.entries().adjoint();
        hermitize(&mut m);
        Ok(Self {
            space: self.space.clone(),
            entries: m,
        })
    }
}

fn hermitize(m: &mut DMatrix<C64>) {
    let h = (&*m + m.adjoint()) * C64::new(0.5, 0.0);
    *m = h;
}

fn renormalize(m: &mut DMatrix<C64>) {
    hermitize(m);
    let tr = m.trace().re;
    *m /= C64::new(tr, 0.0);
}

/// Reduction to a subset of subsystems, which keep their original order.
pub trait PartialTrace {
    fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityMatrix>;
}

fn keep_positions<S: AsRef<str>>(space: &Space, keep: &[S]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::Empty("partial trace needs at least one kept subsystem"));
    }
    let mut pos = space.positions(keep)?;
    pos.sort_unstable();
    Ok(pos)
}

impl PartialTrace for StateVector {
    fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityMatrix> {
        self.ensure_normalized()?;
        let pos = keep_positions(self.space(), keep)?;
        let split = Split::new(self.space(), &pos);
        let a = self.amplitudes();
        let dk = split.offsets.len();
        // M[k, r] = ψ(k, r); ρ = M M†
        let m = DMatrix::from_fn(dk, split.bases.len(), |k, r| a[split.bases[r] + split.offsets[k]]);
        let mut rho = &m * m.adjoint();
        renormalize(&mut rho);
        Ok(DensityMatrix {
            space: self.space().select(&pos),
            entries: rho,
        })
    }
}

impl PartialTrace for DensityMatrix {
    fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityMatrix> {
        let pos = keep_positions(&self.space, keep)?;
        let split = Split::new(&self.space, &pos);
        let dk = split.offsets.len();
        let mut rho = DMatrix::zeros(dk, dk);
        for (i, &oi) in split.offsets.iter().enumerate() {
            for (j, &oj) in split.offsets.iter().enumerate() {
                rho[(i, j)] = split
                    .bases
                    .iter()
                    .map(|&b| self.entries[(b + oi, b + oj)])
                    .sum();
            }
        }
        renormalize(&mut rho);
        Ok(DensityMatrix {
            space: self.space.select(&pos),
            entries: rho,
        })
    }
}

pub fn partial_trace<T: PartialTrace, S: AsRef<str>>(x: &T, keep: &[S]) -> Result<DensityMatrix> {
    x.partial_trace(keep)
}
