//! Operator zoo and the verification harness.

mod constant;
mod convergence;
mod identities;
mod square;
pub mod zoo;

pub use constant::{
    empirical_constant, evaluate_witness, q_sweep, BlockSpec, ExperimentConfig, FamilyBase, FamilyKind, JumpCheck,
    NormMode, OperatorFamilySpec, Report, StabilityVerdict, SweepReport, SweepRow, DEFAULT_TIME_STEP,
};
pub use convergence::{dyadic_schedule, pointwise_convergence, ConvergenceMode};
pub use identities::{telescoping_check, transference_check_p2, Kernel, Telescoping, TelescopingResult, TransferenceResult};
pub use square::{square_function, SquareFunctionValue};
pub use zoo::ZooSpec;
