//! Mesh-free least-squares solver for high-dimensional PDEs.
//!
//! A feedforward network `u(x; θ)` is trained to minimise the mean squared
//! residual of `Du = f` at random interior points and of `Bu = g` at random
//! boundary points. The SelectNet model reweights both residuals with
//! bounded selection networks trained by gradient ascent, which shifts
//! attention toward points where the residual is large. Spatial and time
//! derivatives come from central finite differences of the network; only
//! parameter gradients are computed by backpropagation.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar type to `f64`, which is what the finite
//! difference stencils need.

pub mod error;
pub mod grad;
pub mod loss;
pub mod net;
pub mod operators;
pub mod optim;
pub mod problems;
pub mod sampling;
pub mod scalar;
pub mod trainer;

pub use error::{Error, Result};
pub use grad::{accumulate_gradient, backprop_params, forward_with_cache, ForwardCache, ParameterGradient};
pub use loss::{
    basic_loss, binary_weighted_loss, evaluate_residuals, evaluate_residuals_tracked, selectnet_loss,
    BinaryWeightConfig, LossComponents, LossGradients, LossWeights,
};
pub use net::{
    init_network, ActivationKind, DenseLayer, Field, FnField, Mask, MlpNetwork, NetworkShape, SelectionNetwork,
    SolutionAnsatz,
};
pub use operators::{
    apply_boundary_operator, apply_elliptic_fd, apply_gradient_fd, apply_operator, BoundaryOperatorKind,
    Coefficient, OperatorConfig, OperatorKind,
};
pub use optim::{adagrad_step, lr_schedule, AdaGradState, Direction, Optimizer, OptimizerKind, ScheduleSpec};
pub use problems::{
    evaluate_f, make_problem, poisson2d_exact, BoundaryComponent, DomainKind, ProblemName, ProblemSpec,
};
pub use sampling::{
    sample_ball_annular, sample_cube, sample_cube_boundary, sample_cylinder, sample_sphere, RngStream, SampleBatch,
    SamplerConfig, SamplingStrategy, StreamPurpose,
};
pub use scalar::Real;
pub use trainer::{
    evaluate_error, run_trials, train, BoundaryMode, Method, RunResult, TrainConfig, TrainError, TrainRecord,
    TrialStats,
};

/// Double-precision network.
pub type Network = MlpNetwork<f64>;
/// Double-precision solution ansatz.
pub type Ansatz = SolutionAnsatz<f64>;
/// Double-precision selection network.
pub type Selection = SelectionNetwork<f64>;
/// Double-precision problem.
pub type Problem = ProblemSpec<f64>;
/// Double-precision sample batch.
pub type Batch = SampleBatch<f64>;
/// Double-precision run result.
pub type Run = RunResult<f64>;
/// Single-precision network, for forward evaluation only.
pub type NetworkF32 = MlpNetwork<f32>;
