//! Load identification for a vibrating plate: dual reciprocity boundary
//! elements in space, the precise integration method in time, and a
//! dynamic programming filter with first-order Tikhonov regularization.

pub mod drbem;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod lcurve;
pub mod mesh;
pub mod pim;

pub use drbem::{PlateModel, ReducedSystem};
pub use error::{Error, Result};
pub use experiments::{
    add_noise, analytic_rod_response, default_b_grid, reference_scenarios, run_inverse, run_inverse_with,
    ForwardResponse, InverseOutcome, InverseSolver, LoadKind, LoadSignal, MeasurementSet, Metrics, ModelConfig,
    NoiseDistribution, NoiseSpec, PlateSetup, Regularization, Scenario, SensorSpec,
};
pub use filter::{batch_qp_oracle, estimate, AugmentedModel, EstimationResult, FilterWeights, Quantity, Sensor};
pub use lcurve::{l_curve_select, log_grid, LCurveSelection};
pub use mesh::{build_square_plate, BoundaryMesh, Point};
pub use pim::{build_state_space, build_transition, precise_expm, simulate, StateSpaceModel, TransitionSet};
pub use nalgebra;
