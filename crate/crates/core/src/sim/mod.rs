//! Double-precision statevector simulation. Circuits use a small gate model
//! with a line-oriented text form. On top of it sit sparse state
//! preparation, the distillation protocol and CHSH sampling.

mod chsh;
mod circuit;
mod pipeline;
mod prepare;
mod protocol;
mod run;

pub use chsh::{chsh_experiment, ChshEstimate, ChshTables};
pub use circuit::{Circuit, Condition, Control, Gate, GateOp, ResourceMetrics};
pub use pipeline::{
    lift_to_first_copy, pipeline_circuit, pipeline_metrics, simulate_entanglement, simulate_nonlocality,
    EntanglementRun, NonlocalityRun, Pipeline, PipelineMetrics,
};
pub use prepare::{prepare_sparse, MAX_NONZEROS};
pub use protocol::{distill_protocol, Distiller, ProtocolOutcome};
pub use run::{run, RunResult};
