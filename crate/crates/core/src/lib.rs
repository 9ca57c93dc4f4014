//! Incremental self-tuning control for equivalent dynamic linearization
//! models with delay and disturbance.

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod estimate;
pub mod model;
pub mod poly;
pub mod presets;
pub mod scalar;
pub mod sim;
pub mod synth;

pub use control::ControllerState;
pub use error::{Error, Result};
pub use estimate::{Estimator, EstimatorConfig, ProjectionState, RlsState};
pub use model::{
    armax_to_edlm, darma_to_edlm, ArmaxModel, ArmaxSimulator, DifferenceEquationPlant,
    EdlmSimulator, ModelOrders, PgModel, Plant, PlantHistory, RegressorWindow,
};
pub use poly::{final_value_limit, DelayPoly, FinalValue, RationalTf, StabilityVerdict};
pub use scalar::Scalar;
pub use sim::{
    compute_metrics, gaussian_noise, run_experiment, run_with_plant, standard_normal,
    ControllerCase, Disturbance, ExperimentConfig, MetricWindows, Metrics, Trace, TraceRow,
    Trajectory,
};
pub use synth::{
    char_poly, closed_loop_report, design_min_phase, error_tf, pid_to_e, solve_diophantine,
    static_error, synth_mfac, synth_min_phase, synth_pole_placement, ClosedLoopReport,
    ControllerPolys, DesignSpec, EChoice, InputClass, MinPhaseDesign, PidSpec,
};

pub type Poly = DelayPoly<f64>;
pub type PgModelF64 = PgModel<f64>;
pub type ArmaxModelF64 = ArmaxModel<f64>;
pub type ControllerPolysF64 = ControllerPolys<f64>;
pub type EstimatorF64 = Estimator<f64>;
pub type ExperimentConfigF64 = ExperimentConfig<f64>;
pub type TraceF64 = Trace<f64>;
