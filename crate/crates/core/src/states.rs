//! The one-parameter state family: `|Ψ(p)⟩ = √p|ψ⟩ + √(1−p)|φ⟩` with
//! `|ψ⟩ = (|00⟩+|11⟩)/√2`, `|φ⟩ = (|01⟩+|10⟩)/√2`, its tensor powers, and
//! the mixture `ρ = p|ψ⟩⟨ψ| + (1−p)|φ⟩⟨φ|`.
//!
//! Multi-copy states use one qubit ordering everywhere: Alice's `n` qubits
//! first, then Bob's `n`, with copy 1 most significant on each side. A
//! basis index is therefore `(x_A << n) | x_B`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{ComplexMatrix, StateVector};
use crate::scalar::{Complex, Real};

/// Largest copy count for Schmidt spectra.
pub const MAX_SPECTRUM_COPIES: usize = 4;
/// Largest copy count for dense vectors and density matrices (dimension 64).
pub const MAX_DENSE_COPIES: usize = 3;

/// Mixing weight `p ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct NoiseParameter<T>(T);

impl<T: Real> NoiseParameter<T> {
    pub fn new(p: T) -> Result<Self> {
        if p >= T::zero() && p <= T::one() {
            Ok(Self(p))
        } else {
            Err(Error::NoiseParameter(p.to_f64().unwrap_or(f64::NAN)))
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    /// `1 − p`.
    #[inline]
    pub fn complement(self) -> T {
        T::one() - self.0
    }

    /// `steps` evenly spaced parameters from `lo` to `hi` inclusive.
    pub fn grid(lo: T, hi: T, steps: usize) -> Result<Vec<Self>> {
        if steps < 2 || !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("grid needs lo <= hi and at least 2 steps (got {steps})")));
        }
        let last = T::from_usize(steps - 1).unwrap();
        (0..steps)
            .map(|i| {
                let t = T::from_usize(i).unwrap() / last;
                // clamp so rounding cannot leave [lo, hi]
                Self::new((lo + (hi - lo) * t).min(hi).max(lo))
            })
            .collect()
    }
}

/// Descending Schmidt amplitudes `σ₁ ≥ σ₂ ≥ … ≥ 0`. Probabilities are `σᵢ²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchmidtSpectrum<T> {
    amplitudes: Vec<T>,
}

impl<T: Real> SchmidtSpectrum<T> {
    /// Validates that the squares sum to one; sorts descending.
    pub fn new(amplitudes: Vec<T>) -> Result<Self> {
        if amplitudes.iter().any(|&a| a < T::zero() || !a.is_finite()) {
            return Err(Error::InvalidArgument("Schmidt amplitudes must be finite and non-negative".into()));
        }
        let spectrum = Self::from_unsorted(amplitudes);
        let total = spectrum.total_probability();
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized(total.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(spectrum)
    }

    pub(crate) fn from_unsorted(mut amplitudes: Vec<T>) -> Self {
        for a in amplitudes.iter_mut() {
            *a = a.max(T::zero());
        }
        amplitudes.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|&a| a * a).collect()
    }

    /// `σ₁²`.
    pub fn largest_probability(&self) -> T {
        self.amplitudes.first().map(|&a| a * a).unwrap_or_else(T::zero)
    }

    pub fn total_probability(&self) -> T {
        self.amplitudes.iter().map(|&a| a * a).sum()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Number of amplitudes above `tol`.
    pub fn rank(&self, tol: T) -> usize {
        self.amplitudes.iter().filter(|&&a| a > tol).count()
    }
}

/// Weights `w_x = p^(n−|x|) (1−p)^|x|` of `ρ^⊗n = Σ_x w_x (𝟙⊗X^x)|ψ⟩⟨ψ|^⊗n(𝟙⊗X^x)`,
/// indexed by the bitstring `x` read as an integer with copy 1 most significant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightVector<T> {
    pub n: usize,
    pub weights: Vec<T>,
}

impl<T: Real> WeightVector<T> {
    pub fn weight(&self, x: usize) -> T {
        self.weights[x]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn check_copies(n: usize, max: usize) -> Result<()> {
    if (1..=max).contains(&n) {
        Ok(())
    } else {
        Err(Error::CopyCount { n, min: 1, max })
    }
}

/// Schmidt amplitudes `a = (√p+√(1−p))/√2`, `b = |√p−√(1−p)|/√2` of one copy.
pub fn single_copy_amplitudes<T: Real>(p: NoiseParameter<T>) -> (T, T) {
    let sp = p.value().sqrt();
    let sq = p.complement().sqrt();
    let r = T::FRAC_1_SQRT_2();
    ((sp + sq) * r, (sp - sq).abs() * r)
}

/// `t = a²b² = (2p−1)²/4`.
pub fn schmidt_product<T: Real>(p: NoiseParameter<T>) -> T {
    let d = T::two() * p.value() - T::one();
    d * d / T::of(4.0)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Spectrum of `|Ψ⟩^⊗n`: amplitude `a^(n−k) b^k` with multiplicity `C(n, k)`.
pub fn tensor_power_spectrum<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<SchmidtSpectrum<T>> {
    check_copies(n, MAX_SPECTRUM_COPIES)?;
    let (a, b) = single_copy_amplitudes(p);
    let mut amplitudes = Vec::with_capacity(1 << n);
    for k in 0..=n {
        let value = a.powi((n - k) as i32) * b.powi(k as i32);
        amplitudes.extend(std::iter::repeat_n(value, binomial(n, k)));
    }
    Ok(SchmidtSpectrum::from_unsorted(amplitudes))
}

/// Splits a multi-copy basis index into per-copy two-qubit indices `2·a_k + b_k`.
fn copy_pairs(index: usize, n: usize) -> impl Iterator<Item = usize> {
    let alice = index >> n;
    let bob = index & ((1 << n) - 1);
    (0..n).map(move |k| {
        let shift = n - 1 - k;
        (((alice >> shift) & 1) << 1) | ((bob >> shift) & 1)
    })
}

fn single_copy_vector<T: Real>(p: NoiseParameter<T>) -> [T; 4] {
    let r = T::FRAC_1_SQRT_2();
    let e = p.value().sqrt() * r;
    let o = p.complement().sqrt() * r;
    [e, o, o, e]
}

/// `|Ψ(p)⟩^⊗n` in the shared qubit ordering.
pub fn pure_state_vector<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<StateVector<T>> {
    check_copies(n, MAX_DENSE_COPIES)?;
    let single = single_copy_vector(p);
    let amps = (0..1usize << (2 * n))
        .map(|idx| Complex::new(copy_pairs(idx, n).map(|k| single[k]).fold(T::one(), |acc, v| acc * v), T::zero()))
        .collect();
    StateVector::new(amps)
}

fn single_copy_density<T: Real>(p: NoiseParameter<T>) -> [[T; 4]; 4] {
    let h = T::half();
    let (w, v) = (p.value() * h, p.complement() * h);
    let z = T::zero();
    [[w, z, z, w], [z, v, v, z], [z, v, v, z], [w, z, z, w]]
}

/// `ρ^⊗n` as a `4ⁿ × 4ⁿ` matrix in the shared qubit ordering.
pub fn mixed_density<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<ComplexMatrix<T>> {
    check_copies(n, MAX_DENSE_COPIES)?;
    let single = single_copy_density(p);
    let dim = 1usize << (2 * n);
    let pairs: Vec<Vec<usize>> = (0..dim).map(|i| copy_pairs(i, n).collect()).collect();
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        let value = pairs[i].iter().zip(&pairs[j]).fold(T::one(), |acc, (&r, &c)| acc * single[r][c]);
        Complex::new(value, T::zero())
    }))
}

pub fn mixed_weights<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<WeightVector<T>> {
    check_copies(n, MAX_SPECTRUM_COPIES)?;
    let weights = (0..1usize << n)
        .map(|x| {
            let flips = x.count_ones() as i32;
            p.value().powi(n as i32 - flips) * p.complement().powi(flips)
        })
        .collect();
    Ok(WeightVector { n, weights })
}
