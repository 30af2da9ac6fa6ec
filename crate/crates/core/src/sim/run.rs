use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matkernel::StateVector;
use crate::scalar::Complex;

use super::circuit::{Circuit, Condition, Control, Gate, GateOp};

const NORM_TOL: f64 = 1e-10;
const BRANCH_TOL: f64 = 1e-12;

/// Final state and classical register of one execution.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub state: StateVector<f64>,
    pub bits: Vec<bool>,
}

/// Executes `circuit` on `|0…0⟩`, sampling measurements from a generator
/// seeded with `seed`.
pub fn run(circuit: &Circuit, seed: u64) -> Result<RunResult> {
    let mut sim = Simulator::new(circuit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for gate in &circuit.gates {
        sim.apply(gate, &mut rng)?;
    }
    Ok(RunResult { state: StateVector::new(sim.amps)?, bits: sim.bits })
}

struct Simulator {
    qubits: usize,
    amps: Vec<Complex<f64>>,
    bits: Vec<bool>,
}

impl Simulator {
    fn new(circuit: &Circuit) -> Result<Self> {
        circuit.validate()?;
        if circuit.qubits >= usize::BITS as usize - 1 {
            return Err(Error::InvalidCircuit(format!("{} qubits is too many to simulate", circuit.qubits)));
        }
        let mut amps = vec![Complex::new(0.0, 0.0); 1 << circuit.qubits];
        amps[0] = Complex::new(1.0, 0.0);
        Ok(Self { qubits: circuit.qubits, amps, bits: vec![false; circuit.clbits] })
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    fn apply(&mut self, gate: &Gate, rng: &mut ChaCha8Rng) -> Result<()> {
        match gate {
            Gate::Conditioned { conditions, gate } => {
                if conditions.iter().all(|&Condition { clbit, value }| self.bits[clbit] == value) {
                    self.apply(gate, rng)?;
                }
                Ok(())
            }
            Gate::Measure { qubit, clbit } => self.measure(*qubit, *clbit, rng),
            Gate::Single { target, op } => self.unitary(&[], *target, op),
            Gate::Controlled { controls, target, op } => self.unitary(controls, *target, op),
        }
    }

    fn unitary(&mut self, controls: &[Control], target: usize, op: &GateOp) -> Result<()> {
        let [u00, u01, u10, u11] = op.matrix();
        let t = self.mask(target);
        let (mut need, mut want) = (0usize, 0usize);
        for ctrl in controls {
            let m = self.mask(ctrl.qubit);
            need |= m;
            if ctrl.on {
                want |= m;
            }
        }
        for i in 0..self.amps.len() {
            if i & t != 0 || i & need != want {
                continue;
            }
            let j = i | t;
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = u00 * a + u01 * b;
            self.amps[j] = u10 * a + u11 * b;
        }
        let norm: f64 = self.amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(())
    }

    fn measure(&mut self, qubit: usize, clbit: usize, rng: &mut ChaCha8Rng) -> Result<()> {
        let m = self.mask(qubit);
        let (mut p0, mut p1) = (0.0, 0.0);
        for (i, z) in self.amps.iter().enumerate() {
            if i & m == 0 {
                p0 += z.norm_sqr();
            } else {
                p1 += z.norm_sqr();
            }
        }
        if (p0 + p1 - 1.0).abs() > BRANCH_TOL {
            return Err(Error::NotNormalized(p0 + p1));
        }
        let outcome = rng.random::<f64>() < p1;
        let keep = if outcome { p1 } else { p0 };
        let scale = 1.0 / keep.sqrt();
        for (i, z) in self.amps.iter_mut().enumerate() {
            if (i & m != 0) == outcome {
                *z = z.scale(scale);
            } else {
                *z = Complex::new(0.0, 0.0);
            }
        }
        self.bits[clbit] = outcome;
        Ok(())
    }
}
