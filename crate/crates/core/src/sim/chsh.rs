use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell::ObservableQuad;
use crate::error::{Error, Result};
use crate::matkernel::{kron, ComplexMatrix, StateVector};

const SIGNS: [[f64; 2]; 2] = [[1.0, 1.0], [1.0, -1.0]];

/// Sampled CHSH value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub shots: u64,
}

/// Born probabilities `P(a, b | i, j)` for the four setting pairs, with
/// outcomes ordered `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshTables {
    probabilities: [[[f64; 4]; 2]; 2],
}

impl ChshTables {
    pub fn new(state: &StateVector<f64>, quad: &ObservableQuad<f64>) -> Result<Self> {
        let d = quad.side_dim();
        if state.dim() != d * d {
            return Err(Error::Dimension { expected: d * d, actual: state.dim() });
        }
        let id = ComplexMatrix::identity(d);
        let alice = [&quad.a0, &quad.a1];
        let bob = [&quad.b0, &quad.b1];
        let mut probabilities = [[[0.0; 4]; 2]; 2];
        for i in 0..2 {
            let ea = state.expectation(&kron(alice[i], &id)).re;
            for j in 0..2 {
                let eb = state.expectation(&kron(&id, bob[j])).re;
                let eab = state.expectation(&kron(alice[i], bob[j])).re;
                let mut table = [0.0; 4];
                for (k, slot) in table.iter_mut().enumerate() {
                    let a = if k < 2 { 1.0 } else { -1.0 };
                    let b = if k % 2 == 0 { 1.0 } else { -1.0 };
                    *slot = ((1.0 + a * ea + b * eb + a * b * eab) / 4.0).max(0.0);
                }
                let total: f64 = table.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::NotNormalized(total));
                }
                probabilities[i][j] = table.map(|q| q / total);
            }
        }
        Ok(Self { probabilities })
    }

    /// `⟨A_i ⊗ B_j⟩` from the table.
    pub fn correlator(&self, i: usize, j: usize) -> f64 {
        let t = &self.probabilities[i][j];
        t[0] - t[1] - t[2] + t[3]
    }

    pub fn exact_value(&self) -> f64 {
        (0..4).map(|k| SIGNS[k / 2][k % 2] * self.correlator(k / 2, k % 2)).sum()
    }

    /// Product `a·b ∈ {±1}` of one measurement at settings `(i, j)`.
    pub fn sample_product<R: Rng + ?Sized>(&self, i: usize, j: usize, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let t = &self.probabilities[i][j];
        let mut acc = 0.0;
        for (k, &q) in t.iter().enumerate() {
            acc += q;
            if u < acc {
                return if k == 0 || k == 3 { 1.0 } else { -1.0 };
            }
        }
        // rounding left u above the cumulative sum; take the last nonzero outcome
        let k = (0..4).rev().find(|&k| t[k] > 0.0).unwrap_or(0);
        if k == 0 || k == 3 {
            1.0
        } else {
            -1.0
        }
    }

    /// Signed sum of one sample at each of the four settings.
    pub fn sample_round<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (0..4).map(|k| SIGNS[k / 2][k % 2] * self.sample_product(k / 2, k % 2, rng)).sum()
    }
}

/// Estimates the CHSH value of `state` by drawing settings uniformly and
/// sampling joint outcomes shot by shot.
pub fn chsh_experiment(
    state: &StateVector<f64>,
    quad: &ObservableQuad<f64>,
    shots: u64,
    seed: u64,
) -> Result<ChshEstimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    let tables = ChshTables::new(state, quad)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    let mut sums = [0.0f64; 4];
    for _ in 0..shots {
        let k = rng.random_range(0..4usize);
        sums[k] += tables.sample_product(k / 2, k % 2, &mut rng);
        counts[k] += 1;
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    for k in 0..4 {
        if counts[k] == 0 {
            variance = f64::INFINITY;
            continue;
        }
        let n = counts[k] as f64;
        let mean = sums[k] / n;
        value += SIGNS[k / 2][k % 2] * mean;
        variance += (1.0 - mean * mean).max(0.0) / n;
    }
    Ok(ChshEstimate { value, standard_error: variance.sqrt(), shots })
}
