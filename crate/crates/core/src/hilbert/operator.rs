use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{apply, Space, StateVector, C64, HERMITIAN_TOL, UNITARY_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    Hermitian,
    Unitary,
    General,
}

/// Square operator on a labeled product space.
///
/// The labels record what the operator was built for; [`apply`] only
/// checks that the targeted dimensions agree.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: Space,
    kind: OperatorKind,
    entries: DMatrix<C64>,
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl OperatorMatrix {
    /// Builds an operator, checking the invariant that `kind` promises.
    pub fn new<S: Into<String>>(
        entries: DMatrix<C64>,
        dims: Vec<usize>,
        labels: impl IntoIterator<Item = S>,
        kind: OperatorKind,
    ) -> Result<Self> {
        Self::on_space(Space::new(dims, labels)?, entries, kind)
    }

    pub fn on_space(space: Space, entries: DMatrix<C64>, kind: OperatorKind) -> Result<Self> {
        let n = space.size();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::InvalidShape(format!(
                "{}x{} matrix for a space of dimension {n}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        match kind {
            OperatorKind::Hermitian => {
                let dev = max_abs(&(&entries - entries.adjoint()));
                if dev > HERMITIAN_TOL {
                    return Err(Error::InvalidOperator {
                        kind: "Hermitian",
                        deviation: dev,
                    });
                }
            }
            OperatorKind::Unitary => {
                let dev = max_abs(&(entries.adjoint() * &entries - DMatrix::identity(n, n)));
                if dev > UNITARY_TOL {
                    return Err(Error::InvalidOperator {
                        kind: "unitary",
                        deviation: dev,
                    });
                }
            }
            OperatorKind::General => {}
        }
        Ok(Self {
            space,
            kind,
            entries,
        })
    }

    pub fn identity<S: Into<String>>(
        dims: Vec<usize>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let space = Space::new(dims, labels)?;
        let n = space.size();
        Ok(Self {
            space,
            kind: OperatorKind::Unitary,
            entries: DMatrix::identity(n, n),
        })
    }

    fn qubit(label: &str, m: [[f64; 2]; 2], kind: OperatorKind) -> Self {
        let entries = DMatrix::from_fn(2, 2, |r, c| C64::new(m[r][c], 0.0));
        Self {
            space: Space::new(vec![2], [label]).expect("valid qubit space"),
            kind,
            entries,
        }
    }

    /// `σ⁺ = |e⟩⟨g|`.
    pub fn sigma_plus(label: &str) -> Self {
        Self::qubit(label, [[0.0, 0.0], [1.0, 0.0]], OperatorKind::General)
    }

    /// `σ⁻ = |g⟩⟨e|`.
    pub fn sigma_minus(label: &str) -> Self {
        Self::qubit(label, [[0.0, 1.0], [0.0, 0.0]], OperatorKind::General)
    }

    /// `σ_Z = |e⟩⟨e| − |g⟩⟨g|`.
    pub fn sigma_z(label: &str) -> Self {
        Self::qubit(label, [[-1.0, 0.0], [0.0, 1.0]], OperatorKind::Hermitian)
    }

    /// `|e⟩⟨e|`.
    pub fn excited_projector(label: &str) -> Self {
        Self::qubit(label, [[0.0, 0.0], [0.0, 1.0]], OperatorKind::Hermitian)
    }

    /// Truncated annihilation operator `a` on `dim` Fock levels.
    pub fn annihilation(label: &str, dim: usize) -> Result<Self> {
        let entries = DMatrix::from_fn(dim, dim, |r, c| {
            if c == r + 1 {
                C64::new((c as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(entries, vec![dim], [label], OperatorKind::General)
    }

    pub fn creation(label: &str, dim: usize) -> Result<Self> {
        Ok(Self::annihilation(label, dim)?.adjoint())
    }

    /// `a†a`.
    pub fn number(label: &str, dim: usize) -> Result<Self> {
        let entries = DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                C64::new(r as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(entries, vec![dim], [label], OperatorKind::Hermitian)
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

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let kind = self.kind;
        Self {
            space: self.space.clone(),
            kind,
            entries: self.entries.adjoint(),
        }
    }

    /// Re-tag the operator, validating the new kind.
    pub fn with_kind(self, kind: OperatorKind) -> Result<Self> {
        Self::on_space(self.space, self.entries, kind)
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims().to_vec(),
                found: other.dims().to_vec(),
            });
        }
        Ok(())
    }

    /// Kronecker product; `self` occupies the slower-varying subsystems.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let kind = match (self.kind, other.kind) {
            (OperatorKind::Hermitian, OperatorKind::Hermitian) => OperatorKind::Hermitian,
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            _ => OperatorKind::General,
        };
        Ok(Self {
            space: self.space.compose(&other.space)?,
            kind,
            entries: self.entries.kronecker(&other.entries),
        })
    }

    /// Sum of two operators on the same dimensions, tagged [`OperatorKind::General`].
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            kind: OperatorKind::General,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            kind: OperatorKind::General,
            entries: &self.entries * c,
        }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            kind: OperatorKind::General,
            entries: &self.entries * &other.entries,
        })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.add(&ba.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    /// Operator lifted to `space`, acting on the `targets` subsystems.
    pub fn embed<S: AsRef<str>>(&self, space: &Space, targets: &[S]) -> Result<Self> {
        let n = space.size();
        let mut entries = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut amps = vec![C64::new(0.0, 0.0); n];
            amps[col] = C64::new(1.0, 0.0);
            let e = StateVector::from_space(space.clone(), amps)?;
            let out = apply(self, targets, &e)?;
            entries.set_column(col, &DVector::from_column_slice(out.amplitudes()));
        }
        Ok(Self {
            space: space.clone(),
            kind: self.kind,
            entries,
        })
    }

    /// `⟨ψ|self|ψ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        if self.dims() != state.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims().to_vec(),
                found: state.dims().to_vec(),
            });
        }
        let v = DVector::from_column_slice(state.amplitudes());
        Ok((v.adjoint() * (&self.entries * &v))[(0, 0)])
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        HermitianEigen::new(self)
    }
}

/// Spectral decomposition `H = V diag(E) V†` of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    space: Space,
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        if h.kind != OperatorKind::Hermitian {
            return Err(Error::InvalidOperator {
                kind: "Hermitian",
                deviation: max_abs(&(&h.entries - h.entries.adjoint())),
            });
        }
        let eig = h.entries.clone().symmetric_eigen();
        Ok(Self {
            space: h.space.clone(),
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        let d = DMatrix::from_diagonal(&self.values.map(|x| C64::new(x, 0.0)));
        &self.vectors * d * self.vectors.adjoint()
    }

    /// `f(H) = V diag(f(E)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let fe = f(e);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fe);
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{−iHt}` with ħ = 1.
    pub fn propagator(&self, t: f64) -> OperatorMatrix {
        OperatorMatrix {
            space: self.space.clone(),
            kind: OperatorKind::Unitary,
            entries: self.map(|e| C64::from_polar(1.0, -e * t)),
        }
    }
}

/// `e^{−iht}|state⟩` by exact Hermitian eigendecomposition.
pub fn evolve(h: &OperatorMatrix, t: f64, state: &StateVector) -> Result<StateVector> {
    if h.dims() != state.dims() {
        return Err(Error::DimensionMismatch {
            expected: h.dims().to_vec(),
            found: state.dims().to_vec(),
        });
    }
    let targets = state.labels().to_vec();
    evolve_on(h, &targets, t, state)
}

/// [`evolve`] with `h` acting only on `targets`; other subsystems are idle.
pub fn evolve_on<S: AsRef<str>>(
    h: &OperatorMatrix,
    targets: &[S],
    t: f64,
    state: &StateVector,
) -> Result<StateVector> {
    let u = HermitianEigen::new(h)?.propagator(t);
    apply(&u, targets, state)
}
