//! End-to-end pipelines: nonlocality distillation measures the prepared
//! copies directly, entanglement distillation runs the LOCC protocol first
//! and measures the resulting Bell pair.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell::{meas_observables, ObservableQuad};
use crate::distill::{v_ed, v_nd_closed};
use crate::error::{Error, Result};
use crate::matkernel::{kron, ComplexMatrix};
use crate::states::{pure_state_vector, NoiseParameter};

use super::chsh::{chsh_experiment, ChshEstimate, ChshTables};
use super::circuit::{Circuit, Gate, GateOp, ResourceMetrics};
use super::prepare::prepare_sparse;
use super::protocol::Distiller;
use super::run::run;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Nonlocality,
    Entanglement,
}

/// [`ResourceMetrics`] tagged with the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineMetrics {
    pub protocol: Pipeline,
    #[serde(flatten)]
    pub metrics: ResourceMetrics,
}

/// Single-copy observables acting on the first copy of `n`.
pub fn lift_to_first_copy(quad: &ObservableQuad<f64>, n: usize) -> Result<ObservableQuad<f64>> {
    if quad.copies() != 1 || n == 0 {
        return Err(Error::InvalidArgument("lifting needs a single-copy quad and n >= 1".into()));
    }
    let id = ComplexMatrix::identity(1 << (n - 1));
    ObservableQuad::new(kron(&quad.a0, &id), kron(&quad.a1, &id), kron(&quad.b0, &id), kron(&quad.b1, &id))
}

/// Angle `φ` with `O = cos φ Z + sin φ X` for a real single-qubit observable.
fn bloch_angle(o: &ComplexMatrix<f64>) -> f64 {
    o[(0, 1)].re.atan2(o[(0, 0)].re)
}

/// Rotations to the eigenbases of `A₁` on qubit `alice` and `B₀` on qubit
/// `bob`, then both Z measurements.
fn measurement_stage(circuit: &mut Circuit, quad: &ObservableQuad<f64>, alice: usize, bob: usize) {
    let clbit = circuit.clbits;
    circuit.clbits += 2;
    for (qubit, observable, bit) in [(alice, &quad.a1, clbit), (bob, &quad.b0, clbit + 1)] {
        let phi = bloch_angle(observable);
        if phi.abs() > 1e-15 {
            circuit.push(Gate::single(qubit, GateOp::Ry(-phi)));
        }
        circuit.push(Gate::Measure { qubit, clbit: bit });
    }
}

/// The full circuit of a pipeline on `n` copies, measured at one
/// representative setting pair.
pub fn pipeline_circuit(pipeline: Pipeline, p: NoiseParameter<f64>, n: usize) -> Result<Circuit> {
    match pipeline {
        Pipeline::Nonlocality => {
            let mut circuit = prepare_sparse(&pure_state_vector(p, n)?)?;
            measurement_stage(&mut circuit, &meas_observables(p), 0, n);
            Ok(circuit)
        }
        Pipeline::Entanglement => {
            let mut circuit = Distiller::new(p, n)?.circuit().clone();
            measurement_stage(&mut circuit, &meas_observables(NoiseParameter::new(1.0)?), 0, n);
            Ok(circuit)
        }
    }
}

pub fn pipeline_metrics(pipeline: Pipeline, p: NoiseParameter<f64>, n: usize) -> Result<PipelineMetrics> {
    Ok(PipelineMetrics { protocol: pipeline, metrics: pipeline_circuit(pipeline, p, n)?.metrics() })
}

/// Summary of repeated entanglement-distillation runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementRun {
    pub runs: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub analytic_success: f64,
    /// Binomial standard deviation of the rate at the analytic probability.
    pub success_standard_error: f64,
    /// Smallest Bell fidelity over successful runs (1 when there are none).
    pub min_bell_fidelity: f64,
    /// Largest second Schmidt amplitude over failed runs (0 when none).
    pub max_failure_schmidt: f64,
    /// CHSH over all runs, one sample per setting pair and run; failures
    /// answer `+1` deterministically.
    pub chsh: ChshEstimate,
    pub v_ed: f64,
}

pub fn simulate_entanglement(p: NoiseParameter<f64>, n: usize, runs: u64, seed: u64) -> Result<EntanglementRun> {
    if runs < 2 {
        return Err(Error::InvalidArgument("need at least two runs".into()));
    }
    let distiller = Distiller::new(p, n)?;
    let quad = lift_to_first_copy(&meas_observables(NoiseParameter::new(1.0)?), n)?;
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut sampler = ChaCha8Rng::seed_from_u64(seed);
    sampler.set_stream(1);

    let (mut successes, mut sum, mut sum_sq) = (0u64, 0.0, 0.0);
    let (mut min_fidelity, mut max_schmidt) = (1.0f64, 0.0f64);
    for _ in 0..runs {
        let outcome = distiller.run(seeds.next_u64())?;
        let round = if outcome.success {
            successes += 1;
            min_fidelity = min_fidelity.min(outcome.bell_fidelity);
            ChshTables::new(&outcome.final_state, &quad)?.sample_round(&mut sampler)
        } else {
            max_schmidt = max_schmidt.max(outcome.second_schmidt_amplitude());
            2.0
        };
        sum += round;
        sum_sq += round * round;
    }
    let count = runs as f64;
    let mean = sum / count;
    let variance = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
    let analytic = distiller.success_probability();
    Ok(EntanglementRun {
        runs,
        successes,
        success_rate: successes as f64 / count,
        analytic_success: analytic,
        success_standard_error: (analytic * (1.0 - analytic) / count).sqrt(),
        min_bell_fidelity: min_fidelity,
        max_failure_schmidt: max_schmidt,
        chsh: ChshEstimate { value: mean, standard_error: (variance / count).sqrt(), shots: runs },
        v_ed: v_ed(p, n)?,
    })
}

/// Sampled CHSH of the nonlocality pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonlocalityRun {
    pub chsh: ChshEstimate,
    /// Exact value of the measured observables on the prepared state.
    pub exact: f64,
    pub v_nd: f64,
}

/// Prepares `|Ψ(p)⟩^⊗n` by circuit and samples the CHSH value of the
/// single-copy optimal observables on the first copy.
pub fn simulate_nonlocality(p: NoiseParameter<f64>, n: usize, shots: u64, seed: u64) -> Result<NonlocalityRun> {
    if !(1..=2).contains(&n) {
        return Err(Error::CopyCount { n, min: 1, max: 2 });
    }
    let state = run(&prepare_sparse(&pure_state_vector(p, n)?)?, seed)?.state;
    let quad = lift_to_first_copy(&meas_observables(p), n)?;
    Ok(NonlocalityRun {
        chsh: chsh_experiment(&state, &quad, shots, seed)?,
        exact: ChshTables::new(&state, &quad)?.exact_value(),
        v_nd: v_nd_closed(p, n)?,
    })
}
