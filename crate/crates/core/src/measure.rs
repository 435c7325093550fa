//! Projective measurement of qubit subsystems in the `{g, e}` basis.
//!
//! [`enumerate_branches`] lists every outcome with its exact Born weight.
//! [`sample`] draws one of them from a seeded [`RngStream`]. Measured qubits
//! stay in the post-measurement state, projected onto their outcome; use
//! [`StateVector::discard`] to drop them.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{Split, StateVector, C64};

/// Branches with Born weight at or below this are flagged negligible and
/// their post-measurement state is left unnormalized.
pub const ZERO_PROBABILITY: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Bit {
    G,
    E,
}

impl Bit {
    pub fn from_digit(d: usize) -> Self {
        if d == 0 {
            Bit::G
        } else {
            Bit::E
        }
    }

    pub fn digit(self) -> usize {
        match self {
            Bit::G => 0,
            Bit::E => 1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Bit::G => 'g',
            Bit::E => 'e',
        }
    }
}

/// Result of measuring a list of qubits: one bit per label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Outcome {
    labels: Vec<String>,
    bits: Vec<Bit>,
}

impl Outcome {
    pub fn new(labels: Vec<String>, bits: Vec<Bit>) -> Result<Self> {
        if labels.len() != bits.len() {
            return Err(Error::InvalidShape(format!(
                "{} labels for {} bits",
                labels.len(),
                bits.len()
            )));
        }
        Ok(Self { labels, bits })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    pub fn bit(&self, label: &str) -> Option<Bit> {
        self.labels.iter().position(|l| l == label).map(|i| self.bits[i])
    }

    /// Outcome string such as `"eg"`, in measured-label order.
    pub fn pattern(&self) -> String {
        self.bits.iter().map(|b| b.as_char()).collect()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern())
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.pattern())
    }
}

/// One measurement outcome with its probability and projected state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub outcome: Outcome,
    pub probability: f64,
    pub post_state: StateVector,
    pub negligible: bool,
}

/// Enumerate every `{g, e}` outcome of the `measured` qubits, in big-endian
/// order over the listed labels (`gg, ge, eg, ee` for two qubits).
pub fn enumerate_branches<S: AsRef<str>>(state: &StateVector, measured: &[S]) -> Result<Vec<Branch>> {
    let positions = state.space().positions(measured)?;
    for &p in &positions {
        let dim = state.dims()[p];
        if dim != 2 {
            return Err(Error::NotAQubit {
                label: state.labels()[p].clone(),
                dim,
            });
        }
    }
    if positions.is_empty() {
        return Err(Error::Empty("no subsystems to measure"));
    }
    state.ensure_normalized()?;

    let labels: Vec<String> = positions.iter().map(|&p| state.labels()[p].clone()).collect();
    let split = Split::new(state.space(), &positions);
    let amps = state.amplitudes();
    let zero = C64::new(0.0, 0.0);

    split
        .offsets
        .iter()
        .enumerate()
        .map(|(k, &off)| {
            let bits = (0..positions.len())
                .map(|j| Bit::from_digit((k >> (positions.len() - 1 - j)) & 1))
                .collect();
            let mut projected = vec![zero; amps.len()];
            let mut probability = 0.0;
            for &b in &split.bases {
                let a = amps[b + off];
                projected[b + off] = a;
                probability += a.norm_sqr();
            }
            let negligible = probability <= ZERO_PROBABILITY;
            if !negligible {
                let scale = 1.0 / probability.sqrt();
                projected.iter_mut().for_each(|a| *a *= scale);
            }
            Ok(Branch {
                outcome: Outcome::new(labels.clone(), bits)?,
                probability,
                post_state: StateVector::from_space(state.space().clone(), projected)?,
                negligible,
            })
        })
        .collect()
}

/// Draw one outcome with its Born probability.
pub fn sample<S: AsRef<str>>(state: &StateVector, measured: &[S], rng: &mut RngStream) -> Result<Branch> {
    let mut branches = enumerate_branches(state, measured)?;
    let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let idx = rng.choose(&probs);
    Ok(branches.swap_remove(idx))
}

/// Platform-stable seeded random stream.
///
/// Backed by ChaCha8 keyed from the master seed, with the stream index
/// selecting an independent ChaCha stream. Trial `i` of a run uses stream
/// `i`, so results do not depend on how trials are scheduled.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    draws: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            stream,
            draws: 0,
            rng,
        }
    }

    pub fn algorithm(&self) -> &'static str {
        Self::ALGORITHM
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    /// Index drawn with probability proportional to `weights`, never
    /// returning a zero-weight entry.
    pub fn choose(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let u = self.next_f64() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::tensor;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn singlet() -> StateVector {
        StateVector::new(
            vec![
                C64::new(0.0, 0.0),
                C64::new(-FRAC_1_SQRT_2, 0.0),
                C64::new(FRAC_1_SQRT_2, 0.0),
                C64::new(0.0, 0.0),
            ],
            vec![2, 2],
            ["QD1", "QD2"],
        )
        .unwrap()
    }

    #[test]
    fn ground_state_has_one_live_branch() {
        let gg = StateVector::ket(&["a", "b"], "gg").unwrap();
        let br = enumerate_branches(&gg, &["a", "b"]).unwrap();
        assert_eq!(br.len(), 4);
        assert_eq!(br[0].outcome.pattern(), "gg");
        assert_eq!(br[0].probability, 1.0);
        assert!(br[1..].iter().all(|b| b.negligible && b.probability == 0.0));
        let mut rng = RngStream::new(3, 0);
        for _ in 0..100 {
            assert_eq!(sample(&gg, &["a", "b"], &mut rng).unwrap().outcome.pattern(), "gg");
        }
    }

    #[test]
    fn singlet_branches() {
        let br = enumerate_branches(&singlet(), &["QD1", "QD2"]).unwrap();
        let p: Vec<(String, f64)> = br.iter().map(|b| (b.outcome.pattern(), b.probability)).collect();
        assert_eq!(p[0].0, "gg");
        assert!(p[0].1 == 0.0 && p[3].1 == 0.0);
        assert!((p[1].1 - 0.5).abs() < 1e-15 && (p[2].1 - 0.5).abs() < 1e-15);
        assert_eq!(p[2].0, "eg");
    }

    #[test]
    fn partial_measurement_keeps_other_qubits() {
        let s = tensor(&[singlet(), StateVector::ket(&["c"], "e").unwrap()]).unwrap();
        let br = enumerate_branches(&s, &["QD2"]).unwrap();
        assert_eq!(br.len(), 2);
        // QD2 = g forces QD1 = e
        let post = br[0].post_state.discard(&["QD2"]).unwrap();
        assert_eq!(post, StateVector::ket(&["QD1", "c"], "ee").unwrap());
    }

    #[test]
    fn rejects_non_qubits() {
        let s = tensor(&[StateVector::vacuum("cavity", 3).unwrap(), singlet()]).unwrap();
        assert!(matches!(
            enumerate_branches(&s, &["cavity"]),
            Err(Error::NotAQubit { dim: 3, .. })
        ));
    }

    #[test]
    fn singlet_sampling_frequency() {
        let n = 100_000;
        let mut rng = RngStream::new(11, 0);
        let eg = (0..n)
            .filter(|_| sample(&singlet(), &["QD1", "QD2"], &mut rng).unwrap().outcome.pattern() == "eg")
            .count();
        let sigma = (0.25 / n as f64).sqrt();
        assert!((eg as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = {
            let mut r = RngStream::new(42, 5);
            (0..8).map(|_| r.next_f64()).collect()
        };
        let b: Vec<f64> = {
            let mut r = RngStream::new(42, 5);
            (0..8).map(|_| r.next_f64()).collect()
        };
        let c: Vec<f64> = {
            let mut r = RngStream::new(42, 6);
            (0..8).map(|_| r.next_f64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut r = RngStream::new(42, 5);
        r.next_f64();
        assert_eq!(r.draws(), 1);
    }

    fn random_state(raw: &[(f64, f64)]) -> StateVector {
        let amps: Vec<C64> = raw.iter().map(|&(re, im)| C64::new(re, im)).collect();
        StateVector::new(amps, vec![2, 2, 2], ["a", "b", "c"]).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

        #[test]
        fn branches_are_complete(raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
            let s = random_state(&raw);
            prop_assume!(s.norm() > 1e-3);
            let s = s.normalized().unwrap();
            let br = enumerate_branches(&s, &["c", "a"]).unwrap();
            let total: f64 = br.iter().map(|b| b.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for b in br.iter().filter(|b| !b.negligible) {
                prop_assert!(b.post_state.is_normalized());
                // measuring again reproduces the outcome with certainty
                let again = enumerate_branches(&b.post_state, &["c", "a"]).unwrap();
                let same = again.iter().find(|x| x.outcome == b.outcome).unwrap();
                prop_assert!((same.probability - 1.0).abs() < 1e-12);
            }
        }
    }
}
