//! Preparation circuits whose size scales with the number of nonzero
//! amplitudes. The target is first split into tensor factors over qubit
//! subsets; each factor is then loaded by a binary tree of rotations that
//! visits only prefixes carrying weight, with controls trimmed to what is
//! needed to single out each prefix.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matkernel::StateVector;
use crate::scalar::Complex;

use super::circuit::{Circuit, Control, Gate, GateOp};

/// Largest number of nonzero amplitudes in any tensor factor accepted by
/// [`prepare_sparse`].
pub const MAX_NONZEROS: usize = 16;
/// Product factors are searched only up to this many qubits.
const MAX_FACTOR_SEARCH_QUBITS: usize = 12;
const ZERO: f64 = 1e-14;
const PRODUCT_TOL: f64 = 1e-12;

type Entries = Vec<(usize, Complex<f64>)>;

/// Circuit taking `|0…0⟩` to `target` (qubit 0 most significant).
pub fn prepare_sparse(target: &StateVector<f64>) -> Result<Circuit> {
    let dim = target.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidArgument(format!("state dimension {dim} is not 2^q with q >= 1")));
    }
    let qubits = dim.trailing_zeros() as usize;
    let entries: Entries =
        target.amplitudes().iter().enumerate().filter(|(_, z)| z.norm() > ZERO).map(|(i, z)| (i, *z)).collect();

    let mut factors = Vec::new();
    collect_factors((0..qubits).collect(), entries, &mut factors);
    if let Some(count) = factors.iter().map(|(_, e)| e.len()).find(|&c| c > MAX_NONZEROS) {
        return Err(Error::TooManyNonzeros { count, max: MAX_NONZEROS });
    }

    let mut circuit = Circuit::new(qubits, 0);
    for (factor_qubits, factor_entries) in &factors {
        load_factor(&mut circuit, factor_qubits, factor_entries);
    }
    Ok(circuit)
}

fn extract(index: usize, width: usize, positions: &[usize]) -> usize {
    positions.iter().fold(0, |key, &pos| (key << 1) | ((index >> (width - 1 - pos)) & 1))
}

/// Splits the state on `qubits` into as many tensor factors as possible.
fn collect_factors(qubits: Vec<usize>, entries: Entries, out: &mut Vec<(Vec<usize>, Entries)>) {
    let width = qubits.len();
    if width > 1 && width <= MAX_FACTOR_SEARCH_QUBITS {
        for size in 1..=width / 2 {
            for mask in 0usize..1 << width {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let left: Vec<usize> = (0..width).filter(|&i| mask >> (width - 1 - i) & 1 == 1).collect();
                let right: Vec<usize> = (0..width).filter(|&i| mask >> (width - 1 - i) & 1 == 0).collect();
                if let Some((u, v)) = split_product(&entries, width, &left, &right) {
                    collect_factors(left.iter().map(|&i| qubits[i]).collect(), u, out);
                    collect_factors(right.iter().map(|&i| qubits[i]).collect(), v, out);
                    return;
                }
            }
        }
    }
    out.push((qubits, entries));
}

/// `entries = u ⊗ v` across the two position sets, if it factors.
fn split_product(entries: &Entries, width: usize, left: &[usize], right: &[usize]) -> Option<(Entries, Entries)> {
    let mut matrix: BTreeMap<(usize, usize), Complex<f64>> = BTreeMap::new();
    for &(i, z) in entries {
        matrix.insert((extract(i, width, left), extract(i, width, right)), z);
    }
    let rows: Vec<usize> = {
        let mut r: Vec<usize> = matrix.keys().map(|k| k.0).collect();
        r.sort_unstable();
        r.dedup();
        r
    };
    let cols: Vec<usize> = {
        let mut c: Vec<usize> = matrix.keys().map(|k| k.1).collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let (&(r0, c0), &pivot) = matrix.iter().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    let get = |r: usize, c: usize| matrix.get(&(r, c)).copied().unwrap_or_default();
    for &r in &rows {
        for &c in &cols {
            if (get(r, c) - get(r, c0) * get(r0, c) / pivot).norm() > PRODUCT_TOL {
                return None;
            }
        }
    }
    let u_norm = rows.iter().map(|&r| get(r, c0).norm_sqr()).sum::<f64>().sqrt();
    let u = rows.iter().map(|&r| (r, get(r, c0) / u_norm)).filter(|(_, z)| z.norm() > ZERO).collect();
    let v = cols.iter().map(|&c| (c, get(r0, c) * u_norm / pivot)).filter(|(_, z)| z.norm() > ZERO).collect();
    Some((u, v))
}

/// Gate taking `|0⟩` to the unit vector `(v0, v1)`, if it is not `|0⟩`.
fn state_gate(v0: Complex<f64>, v1: Complex<f64>) -> Option<GateOp> {
    if v1.norm() < ZERO && (v0 - Complex::new(1.0, 0.0)).norm() < ZERO {
        return None;
    }
    if v0.im.abs() < ZERO && v1.im.abs() < ZERO {
        let (r0, r1) = (v0.re, v1.re);
        if r0.abs() < ZERO && (r1 - 1.0).abs() < ZERO {
            return Some(GateOp::X);
        }
        if r0 > 0.0 && (r0 - r1).abs() < ZERO {
            return Some(GateOp::H);
        }
        return Some(GateOp::Ry(2.0 * r1.atan2(r0)));
    }
    Some(GateOp::Unitary([v0, -v1.conj(), v1, v0.conj()]))
}

/// Controls on `qubits[..level]` matching `prefix`, with every control
/// dropped that is not needed to exclude the other live prefixes.
fn trimmed_controls(qubits: &[usize], level: usize, prefix: usize, live: &[usize]) -> Vec<Control> {
    let bit = |value: usize, j: usize| (value >> (level - 1 - j)) & 1 == 1;
    let mut kept: Vec<usize> = (0..level).collect();
    let mut j = 0;
    while j < kept.len() {
        let trial: Vec<usize> = kept.iter().copied().filter(|&k| k != kept[j]).collect();
        let collides =
            live.iter().any(|&other| other != prefix && trial.iter().all(|&k| bit(other, k) == bit(prefix, k)));
        if collides {
            j += 1;
        } else {
            kept = trial;
        }
    }
    kept.into_iter().map(|k| Control { qubit: qubits[k], on: bit(prefix, k) }).collect()
}

/// Appends the rotation tree for one factor in its local qubit order.
fn load_factor(circuit: &mut Circuit, qubits: &[usize], entries: &Entries) {
    let width = qubits.len();
    for level in 0..width {
        let last = level + 1 == width;
        // prefix -> (amplitude or weight for next bit 0, same for bit 1)
        let mut children: BTreeMap<usize, [Complex<f64>; 2]> = BTreeMap::new();
        for &(i, z) in entries {
            let prefix = i >> (width - level);
            let next = (i >> (width - 1 - level)) & 1;
            let slot = &mut children.entry(prefix).or_default()[next];
            if last {
                *slot = z;
            } else {
                slot.re += z.norm_sqr();
            }
        }
        let live: Vec<usize> = children.keys().copied().collect();
        for (&prefix, pair) in &children {
            let (v0, v1) = if last {
                let norm = (pair[0].norm_sqr() + pair[1].norm_sqr()).sqrt();
                (pair[0] / norm, pair[1] / norm)
            } else {
                let total = pair[0].re + pair[1].re;
                (Complex::new((pair[0].re / total).sqrt(), 0.0), Complex::new((pair[1].re / total).sqrt(), 0.0))
            };
            if let Some(op) = state_gate(v0, v1) {
                let controls = trimmed_controls(qubits, level, prefix, &live);
                circuit.push(Gate::controlled(controls, qubits[level], op));
            }
        }
    }
}
