//! One-way LOCC conversion of `|Ψ(p)⟩^⊗n` into a single Bell pair.
//!
//! After a local Hadamard rotation the state reads `Σ_x σ_x |x⟩|x⟩`. When
//! the largest weight `λ₀ = σ₀²` exceeds 1/2 Alice first applies the filter
//! `diag(c, 1, …, 1)` with `c = √((1−λ₀)/λ₀)`; success leaves `λ₀ = 1/2`.
//! She then performs a diagonal measurement whose outcomes are pairs
//! `{i, j}`: lay the weights out as consecutive arcs on a unit circle and
//! let `m_ij` be the overlap of arc `i` with arc `j` turned by half a turn.
//! The Kraus operator `√(m_ij/λ_i)|i⟩⟨i| + √(m_ij/λ_j)|j⟩⟨j|` fires with
//! probability `2m_ij` and leaves `(|ii⟩+|jj⟩)/√2`, which both parties
//! rotate onto their first qubit. The measurement is realized as a chain
//! of binary ancilla measurements, each followed by an ancilla reset.

use crate::distill::entanglement_success_probability;
use crate::error::{Error, Result};
use crate::matkernel::{schmidt, StateVector};
use crate::scalar::Complex;
use crate::states::{pure_state_vector, tensor_power_spectrum, NoiseParameter, MAX_DENSE_COPIES};

use super::circuit::{Circuit, Condition, Control, Gate, GateOp};
use super::prepare::prepare_sparse;
use super::run::run;

const WEIGHT_FLOOR: f64 = 1e-15;

/// Result of one protocol execution.
#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub success: bool,
    /// Classical register Alice sends to Bob.
    pub message_bits: Vec<bool>,
    /// The `2n` data qubits after the ancilla is reset.
    pub final_state: StateVector<f64>,
    /// `|⟨Φ⁺|final⟩|²` with `Φ⁺` on the first qubit of each side.
    pub bell_fidelity: f64,
}

impl ProtocolOutcome {
    /// Second Schmidt amplitude of the final state across the Alice/Bob cut.
    pub fn second_schmidt_amplitude(&self) -> f64 {
        let side = 1 << (self.final_state.dim().trailing_zeros() / 2);
        schmidt(&self.final_state, side, side)
            .map(|s| s.amplitudes().get(1).copied().unwrap_or(0.0))
            .unwrap_or(f64::NAN)
    }
}

/// Precompiled protocol circuit for fixed `(p, n)`.
#[derive(Clone, Debug)]
pub struct Distiller {
    copies: usize,
    /// The whole protocol on `2n + 1` qubits, ancilla last.
    circuit: Circuit,
    /// Classical bit holding the filter outcome, if there is a filter.
    filter_bit: Option<usize>,
    success_probability: f64,
    bell: StateVector<f64>,
}

fn bits_of(x: usize, width: usize) -> impl Iterator<Item = bool> {
    (0..width).map(move |q| (x >> (width - 1 - q)) & 1 == 1)
}

/// `(position, controls)` pairs selecting each of Alice's basis states.
fn alice_controls(x: usize, n: usize) -> Vec<Control> {
    bits_of(x, n).enumerate().map(|(q, on)| Control { qubit: q, on }).collect()
}

/// Overlap of `[a0, a1)` with the arc `[b0, b1)` turned by half a turn.
fn shifted_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    let overlap = |lo: f64, hi: f64| (a1.min(hi) - a0.max(lo)).max(0.0);
    let (s0, s1) = (b0 + 0.5, b1 + 0.5);
    if s1 <= 1.0 {
        overlap(s0, s1)
    } else if s0 >= 1.0 {
        overlap(s0 - 1.0, s1 - 1.0)
    } else {
        overlap(s0, 1.0) + overlap(0.0, s1 - 1.0)
    }
}

/// Pairs `{i, j}` (with `i < j`) and weights `m_ij` for weights summing to 1
/// with none above 1/2.
fn circle_pairs(weights: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut starts = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        starts.push(acc);
        acc += w;
    }
    let mut pairs = Vec::new();
    for i in 0..weights.len() {
        for j in i + 1..weights.len() {
            let m = shifted_overlap(starts[i], starts[i] + weights[i], starts[j], starts[j] + weights[j]);
            if m > WEIGHT_FLOOR {
                pairs.push((i, j, m));
            }
        }
    }
    pairs
}

/// Gates on one side that take `|i⟩ → |0…0⟩` and `|j⟩ → |10…0⟩` (or the
/// reverse), for local qubits `offset .. offset + n`.
fn pair_correction(i: usize, j: usize, n: usize, offset: usize) -> Vec<Gate> {
    let xi: Vec<bool> = bits_of(i, n).collect();
    let xj: Vec<bool> = bits_of(j, n).collect();
    let d = (0..n).find(|&q| xi[q] != xj[q]).expect("distinct pair");
    let low = if xi[d] { &xj } else { &xi };
    let mut gates = Vec::new();
    for q in (0..n).filter(|&q| q != d && xi[q] != xj[q]) {
        gates.push(Gate::cx(offset + d, offset + q));
    }
    for q in (0..n).filter(|&q| q != d && low[q]) {
        gates.push(Gate::single(offset + q, GateOp::X));
    }
    if d != 0 {
        gates.push(Gate::cx(offset + d, offset));
        gates.push(Gate::cx(offset, offset + d));
    }
    gates
}

impl Distiller {
    pub fn new(p: NoiseParameter<f64>, n: usize) -> Result<Self> {
        if !(1..=MAX_DENSE_COPIES).contains(&n) {
            return Err(Error::CopyCount { n, min: 1, max: MAX_DENSE_COPIES });
        }
        let spectrum = tensor_power_spectrum(p, n)?;
        let success_probability = entanglement_success_probability(&spectrum);
        let anc = 2 * n;
        let side = 1usize << n;

        let single_a = (p.value().sqrt() + p.complement().sqrt()) / 2f64.sqrt();
        let single_b = (p.value().sqrt() - p.complement().sqrt()) / 2f64.sqrt();
        let weights: Vec<f64> = (0..side)
            .map(|x| {
                let k = x.count_ones() as i32;
                single_a.powi(2 * (n as i32 - k)) * single_b.powi(2 * k)
            })
            .collect();

        let mut gates: Vec<Gate> = Vec::new();
        let mut clbits = 0;
        let preparation = prepare_sparse(&pure_state_vector(p, n)?)?;

        // Schmidt basis: H on every qubit, Z on Bob's if b < 0.
        for q in 0..2 * n {
            gates.push(Gate::single(q, GateOp::H));
        }
        if single_b < 0.0 {
            for q in n..2 * n {
                gates.push(Gate::single(q, GateOp::Z));
            }
        }

        let mut guard: Vec<Condition> = Vec::new();
        let mut filter_bit = None;
        let lambda0 = weights[0];
        let mut post = weights.clone();
        if lambda0 > 0.5 + WEIGHT_FLOOR {
            let c = ((1.0 - lambda0) / lambda0).sqrt().min(1.0);
            let bit = clbits;
            clbits += 1;
            gates.push(Gate::controlled(alice_controls(0, n), anc, GateOp::Ry(2.0 * c.acos())));
            gates.push(Gate::Measure { qubit: anc, clbit: bit });
            gates.push(Gate::conditioned(vec![Condition { clbit: bit, value: true }], Gate::single(anc, GateOp::X)));
            filter_bit = Some(bit);
            guard.push(Condition { clbit: bit, value: false });
            let rest = 1.0 - lambda0;
            post = weights.iter().enumerate().map(|(x, &w)| if x == 0 { 0.5 } else { w / (2.0 * rest) }).collect();
        }

        if success_probability > WEIGHT_FLOOR {
            let pairs = circle_pairs(&post);
            let mut remaining = post.clone();
            for (k, &(i, j, m)) in pairs.iter().enumerate() {
                let last = k + 1 == pairs.len();
                let mut select = guard.clone();
                if !last {
                    let bit = clbits;
                    clbits += 1;
                    for x in [i, j] {
                        let yes =
                            if remaining[x] > WEIGHT_FLOOR { (m / remaining[x]).clamp(0.0, 1.0).sqrt() } else { 0.0 };
                        if yes > 0.0 {
                            let rotation = GateOp::Ry(2.0 * yes.asin());
                            gates.push(Gate::conditioned(
                                guard.clone(),
                                Gate::controlled(alice_controls(x, n), anc, rotation),
                            ));
                        }
                        remaining[x] = (remaining[x] - m).max(0.0);
                    }
                    gates.push(Gate::conditioned(guard.clone(), Gate::Measure { qubit: anc, clbit: bit }));
                    gates.push(Gate::conditioned(
                        vec![Condition { clbit: bit, value: true }],
                        Gate::single(anc, GateOp::X),
                    ));
                    select.push(Condition { clbit: bit, value: true });
                    guard.push(Condition { clbit: bit, value: false });
                }
                for offset in [0, n] {
                    for gate in pair_correction(i, j, n, offset) {
                        gates.push(Gate::conditioned(select.clone(), gate));
                    }
                }
            }
        }

        let mut circuit = Circuit::new(2 * n + 1, clbits);
        circuit.append(&preparation, 0, 0);
        circuit.gates.extend(gates);
        circuit.validate()?;

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut bell = vec![Complex::new(0.0, 0.0); 1 << (2 * n)];
        bell[0] = Complex::new(h, 0.0);
        bell[(1 << (2 * n - 1)) | (1 << (n - 1))] = Complex::new(h, 0.0);
        Ok(Self { copies: n, circuit, filter_bit, success_probability, bell: StateVector::new(bell)? })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Analytic `min{1, 2(1 − σ₁²)}` that the circuit realizes.
    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    pub fn run(&self, seed: u64) -> Result<ProtocolOutcome> {
        let result = run(&self.circuit, seed)?;
        let success = self.success_probability > WEIGHT_FLOOR && self.filter_bit.is_none_or(|b| !result.bits[b]);
        // ancilla is the least significant qubit and has been reset to |0⟩
        let amps = result.state.amplitudes();
        let leaked: f64 = amps.iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum();
        if leaked > 1e-12 {
            return Err(Error::InvalidCircuit(format!("ancilla not reset (weight {leaked:e})")));
        }
        let final_state = StateVector::normalized(amps.iter().step_by(2).copied().collect())?;
        let bell_fidelity = final_state.fidelity(&self.bell).clamp(0.0, 1.0);
        Ok(ProtocolOutcome { success, message_bits: result.bits, final_state, bell_fidelity })
    }
}

/// Runs the protocol once on `|Ψ(p)⟩^⊗n`.
pub fn distill_protocol(p: NoiseParameter<f64>, n: usize, seed: u64) -> Result<ProtocolOutcome> {
    Distiller::new(p, n)?.run(seed)
}
