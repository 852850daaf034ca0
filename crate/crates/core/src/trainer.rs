//! The alternating ascent/descent training loop.
//!
//! Each outer iteration draws a fresh batch, takes `n1` ascent steps on the
//! two selection networks (SelectNet only), then `n2` descent steps on the
//! solution network, all on that batch. The solution network does not change
//! during the ascent steps, so its residuals and forward caches are computed
//! once and shared with the first descent step.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{
    basic_loss_from, binary_loss_from, evaluate_residuals, evaluate_residuals_tracked, evaluate_selection,
    selection_gradients, selectnet_loss_from, solution_gradient, BinaryWeightConfig, LossComponents,
    LossEvaluation, LossWeights, ResidualEvaluation,
};
use crate::net::{ActivationKind, Field, Mask, MlpNetwork, NetworkShape, SelectionNetwork, SolutionAnsatz};
use crate::operators::OperatorConfig;
use crate::optim::{lr_schedule, Direction, Optimizer, OptimizerKind, ScheduleSpec};
use crate::problems::{make_problem, ProblemName, ProblemSpec};
use crate::sampling::{
    sample_test_points, sample_training_batch, RngStream, SampleBatch, SamplerConfig, SamplingStrategy,
    StreamPurpose, RNG_ALGORITHM,
};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Basic,
    Selectnet,
    Binary,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Basic => "basic",
            Method::Selectnet => "selectnet",
            Method::Binary => "binary",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Method::Basic),
            "selectnet" => Ok(Method::Selectnet),
            "binary" => Ok(Method::Binary),
            _ => Err(Error::InvalidConfig(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Boundary residuals enter the loss with weight `λ`.
    #[default]
    Penalty,
    /// The solution is masked to vanish on `∂Ω`; only initial conditions
    /// remain as boundary residuals.
    Conforming,
}

/// Every knob of a training run. Serialised field names are the model's
/// symbols (`N1`, `L`, `M0`, …).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub method: Method,
    pub problem: ProblemName,
    /// Spatial dimension.
    pub d: usize,
    /// Solution network width.
    pub m: usize,
    /// Solution network depth.
    #[serde(rename = "L")]
    pub depth: usize,
    /// Selection network width.
    pub m_s: usize,
    /// Selection network depth.
    #[serde(rename = "L_s")]
    pub selection_depth: usize,
    /// Selection upper bound.
    #[serde(rename = "M0")]
    pub upper: f64,
    /// Selection lower bound.
    pub m0: f64,
    /// Outer iterations.
    pub n: usize,
    /// Ascent steps per iteration.
    pub n1: usize,
    /// Descent steps per iteration.
    pub n2: usize,
    #[serde(rename = "N1")]
    pub interior_points: usize,
    #[serde(rename = "N2")]
    pub boundary_points: usize,
    #[serde(rename = "N_a")]
    pub annuli: usize,
    pub sampling: SamplingStrategy,
    pub epsilon: f64,
    pub lambda: f64,
    /// Finite-difference step.
    pub h: f64,
    /// Binary weighting fraction.
    pub p: f64,
    #[serde(rename = "w_L")]
    pub w_large: f64,
    #[serde(rename = "w_S")]
    pub w_small: f64,
    pub activation: ActivationKind,
    pub selection_activation: ActivationKind,
    pub optimizer: OptimizerKind,
    /// Selection learning rate.
    pub tau_s: f64,
    /// Staircase length before the rate is held at its floor; the whole run
    /// when absent.
    pub schedule_iterations: Option<usize>,
    pub seed: u64,
    pub eval_every: usize,
    pub test_points: usize,
    pub time_budget_seconds: Option<f64>,
    pub boundary_mode: BoundaryMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let binary = BinaryWeightConfig::<f64>::default();
        Self {
            method: Method::Selectnet,
            problem: ProblemName::EllipticNl,
            d: 10,
            m: 100,
            depth: 3,
            m_s: 20,
            selection_depth: 3,
            upper: 5.0,
            m0: 0.8,
            n: 20_000,
            n1: 1,
            n2: 1,
            interior_points: 10_000,
            boundary_points: 10_000,
            annuli: 10,
            sampling: SamplingStrategy::Annular,
            epsilon: 1e-3,
            lambda: 1.0,
            h: 1e-4,
            p: binary.fraction,
            w_large: binary.large,
            w_small: binary.small,
            activation: ActivationKind::CubicRelu,
            selection_activation: ActivationKind::Relu,
            optimizer: OptimizerKind::Adagrad,
            tau_s: 1e-4,
            schedule_iterations: None,
            seed: 0,
            eval_every: 100,
            test_points: 10_000,
            time_budget_seconds: None,
            boundary_mode: BoundaryMode::Penalty,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.depth == 0 || self.m_s == 0 || self.selection_depth == 0 {
            return bad("network widths and depths must be positive".into());
        }
        if self.eval_every == 0 {
            return bad("eval_every must be positive".into());
        }
        if self.test_points == 0 || self.test_points % self.annuli.max(1) != 0 {
            return bad(format!(
                "test_points={} must be positive and divisible by N_a={}",
                self.test_points, self.annuli
            ));
        }
        if !(self.h > 0.0) {
            return Err(Error::InvalidStep(self.h));
        }
        if !(self.tau_s > 0.0) {
            return bad(format!("tau_s must be positive, got {}", self.tau_s));
        }
        if self.method == Method::Selectnet && !(self.upper > 1.0 && 1.0 > self.m0 && self.m0 >= 0.0) {
            return Err(Error::InvalidBounds {
                lower: self.m0,
                upper: self.upper,
            });
        }
        if let Some(b) = self.time_budget_seconds {
            if !(b >= 0.0) {
                return bad(format!("time budget must be non-negative, got {b}"));
            }
        }
        if self.method == Method::Binary {
            self.binary()?;
        }
        LossWeights {
            lambda: self.lambda,
            epsilon: self.epsilon,
        }
        .validate()?;
        self.sampler().validate()
    }

    pub fn binary(&self) -> Result<BinaryWeightConfig<f64>> {
        BinaryWeightConfig::new(self.p, self.w_large, self.w_small)
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            annuli: self.annuli,
            interior_count: self.interior_points,
            boundary_count: self.boundary_points,
            strategy: self.sampling,
            skip_spatial_boundary: self.boundary_mode == BoundaryMode::Conforming,
        }
    }

    pub fn schedule(&self) -> ScheduleSpec {
        let mut s = ScheduleSpec::new(self.n);
        s.selection_rate = self.tau_s;
        s.floor_after = self.schedule_iterations;
        s
    }

    pub fn make_problem<T: Real>(&self) -> Result<ProblemSpec<T>> {
        make_problem(self.problem, self.d)
    }
}

/// One checkpoint of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub iteration: usize,
    pub seconds: f64,
    pub loss_interior: f64,
    pub loss_boundary: f64,
    pub loss_penalty: f64,
    pub loss_total: f64,
    pub rel_l2_error: f64,
    pub lr: f64,
    pub lr_selection: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngMetadata {
    pub algorithm: String,
    pub seed: u64,
    pub streams: Vec<StreamPurpose>,
}

/// Selection networks for the interior and the boundary residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SelectionPair<T> {
    pub interior: SelectionNetwork<T>,
    pub boundary: SelectionNetwork<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RunResult<T> {
    pub solution: SolutionAnsatz<T>,
    pub selection: Option<SelectionPair<T>>,
    pub records: Vec<TrainRecord>,
    pub config: TrainConfig,
    pub rng: RngMetadata,
    /// Outer iterations actually completed.
    pub iterations: usize,
    pub stopped_by_budget: bool,
}

impl<T: Real> RunResult<T> {
    pub fn final_error(&self) -> Option<f64> {
        self.records.last().map(|r| r.rel_l2_error)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError<T: Real> {
    #[error(transparent)]
    Config(#[from] Error),
    #[error("non-finite loss at iteration {iteration}")]
    Diverged {
        iteration: usize,
        partial: Box<RunResult<T>>,
    },
}

/// `(Σ|u − u*|² / Σ|u*|²)^{1/2}` over precomputed values.
pub fn relative_error<T: Real>(predicted: ArrayView1<'_, T>, exact: ArrayView1<'_, T>) -> Result<T> {
    if predicted.len() != exact.len() {
        return Err(Error::DimensionMismatch {
            expected: exact.len(),
            found: predicted.len(),
        });
    }
    let (num, den) = predicted
        .iter()
        .zip(exact.iter())
        .fold((T::zero(), T::zero()), |(n, d), (&u, &e)| (n + (u - e) * (u - e), d + e * e));
    if den == T::zero() {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}

/// Relative ℓ² error of `field` against the exact solution at `test_points`.
pub fn evaluate_error<T: Real, F: Field<T> + ?Sized>(
    field: &F,
    problem: &ProblemSpec<T>,
    test_points: ArrayView2<'_, T>,
) -> Result<T> {
    let exact = problem.exact_values(test_points)?;
    let predicted = field.evaluate(test_points)?;
    relative_error(predicted.view(), exact.view())
}

fn check_compatible<T: Real>(config: &TrainConfig, problem: &ProblemSpec<T>) -> Result<()> {
    config.validate()?;
    if problem.name != config.problem || problem.spatial_dim != config.d {
        return Err(Error::InvalidConfig(format!(
            "config describes {} in d={}, problem is {} in d={}",
            config.problem, config.d, problem.name, problem.spatial_dim
        )));
    }
    if config.boundary_mode == BoundaryMode::Conforming && !problem.homogeneous_dirichlet {
        return Err(Error::InvalidConfig(format!(
            "{} has non-zero Dirichlet data; the conforming ansatz does not apply",
            problem.name
        )));
    }
    Ok(())
}

/// Networks at iteration zero, drawn from the init stream in a fixed order:
/// solution core, interior selection core, boundary selection core.
pub fn initial_networks<T: Real>(
    config: &TrainConfig,
    problem: &ProblemSpec<T>,
) -> Result<(SolutionAnsatz<T>, Option<SelectionPair<T>>)> {
    let mut init = RngStream::new(config.seed, StreamPurpose::Init);
    let dim = problem.input_dim();
    let core = MlpNetwork::init_with_rng(
        NetworkShape::new(dim, config.m, config.depth)?,
        config.activation,
        init.rng(),
    )?;
    let mask = match config.boundary_mode {
        BoundaryMode::Penalty => Mask::None,
        BoundaryMode::Conforming => problem.conforming_mask().unwrap_or(Mask::None),
    };
    let solution = SolutionAnsatz::new(core, mask)?;
    let selection = if config.method == Method::Selectnet {
        let shape = NetworkShape::new(dim, config.m_s, config.selection_depth)?;
        let mut make = || -> Result<SelectionNetwork<T>> {
            let core = MlpNetwork::init_with_rng(shape, config.selection_activation, init.rng())?;
            let mut net = SelectionNetwork::new(core, T::lit(config.m0), T::lit(config.upper))?;
            net.center_at_unit();
            Ok(net)
        };
        let interior = make()?;
        let boundary = make()?;
        Some(SelectionPair { interior, boundary })
    } else {
        None
    };
    Ok((solution, selection))
}

struct Optimizers<T> {
    solution: Optimizer<T>,
    interior: Option<Optimizer<T>>,
    boundary: Option<Optimizer<T>>,
}

fn weighted<T: Real>(
    config: &TrainConfig,
    res: &ResidualEvaluation<T>,
    selection: Option<&SelectionPair<T>>,
    batch: &SampleBatch<T>,
) -> Result<LossEvaluation<T>> {
    let weights = LossWeights {
        lambda: T::lit(config.lambda),
        epsilon: T::lit(config.epsilon),
    };
    match config.method {
        Method::Basic => Ok(basic_loss_from(res, &weights)),
        Method::Binary => {
            let b = config.binary()?;
            let bw = BinaryWeightConfig {
                fraction: T::lit(b.fraction),
                large: T::lit(b.large),
                small: T::lit(b.small),
            };
            binary_loss_from(res, &bw, &weights)
        }
        Method::Selectnet => {
            let pair = selection.expect("selectnet runs carry selection networks");
            let sel = evaluate_selection(&pair.interior, &pair.boundary, batch)?;
            selectnet_loss_from(res, &pair.interior, &pair.boundary, &sel, &weights)
        }
    }
}

fn finite<T: Real>(c: &LossComponents<T>) -> bool {
    c.total.is_finite() && c.interior_term.is_finite() && c.boundary_term.is_finite()
}

/// Runs Algorithm-1 style training of `problem` under `config`.
pub fn train<T: Real>(config: &TrainConfig, problem: &ProblemSpec<T>) -> Result<RunResult<T>, TrainError<T>> {
    check_compatible(config, problem)?;
    let start = Instant::now();
    let (mut solution, mut selection) = initial_networks(config, problem)?;
    let op_cfg = OperatorConfig::new(T::lit(config.h))?;
    let sampler = config.sampler();
    let schedule = config.schedule();
    let tau_s = T::lit(config.tau_s);

    let mut test_rng = RngStream::new(config.seed, StreamPurpose::Test);
    let test_points: Array2<T> = sample_test_points(problem, config.test_points, config.annuli, test_rng.rng())?;
    let exact = problem.exact_values(test_points.view())?;
    if exact.iter().all(|&v| v == T::zero()) {
        return Err(Error::ZeroReference.into());
    }
    let mut interior_rng = RngStream::new(config.seed, StreamPurpose::Interior);
    let mut boundary_rng = RngStream::new(config.seed, StreamPurpose::Boundary);

    let mut opt = Optimizers {
        solution: Optimizer::new(config.optimizer, &solution.core),
        interior: selection
            .as_ref()
            .map(|p| Optimizer::new(config.optimizer, &p.interior.core)),
        boundary: selection
            .as_ref()
            .map(|p| Optimizer::new(config.optimizer, &p.boundary.core)),
    };

    let mut records = Vec::with_capacity(config.n.div_ceil(config.eval_every));
    let result = |solution: &SolutionAnsatz<T>,
                      selection: &Option<SelectionPair<T>>,
                      records: Vec<TrainRecord>,
                      iterations: usize,
                      stopped_by_budget: bool| RunResult {
        solution: solution.clone(),
        selection: selection.clone(),
        records,
        config: config.clone(),
        rng: RngMetadata {
            algorithm: RNG_ALGORITHM.to_string(),
            seed: config.seed,
            streams: StreamPurpose::ALL.to_vec(),
        },
        iterations,
        stopped_by_budget,
    };

    let mut completed = 0;
    let mut stopped_by_budget = false;
    for k in 1..=config.n {
        if let Some(budget) = config.time_budget_seconds {
            if start.elapsed().as_secs_f64() >= budget {
                stopped_by_budget = true;
                break;
            }
        }
        let batch = sample_training_batch(problem, &sampler, interior_rng.rng(), boundary_rng.rng())?;
        let lr = lr_schedule(k, &schedule)?;
        let rate = T::lit(lr);

        let mut res = evaluate_residuals_tracked(problem, &solution, &batch, &op_cfg)?;
        if let Some(pair) = selection.as_mut() {
            for _ in 0..config.n1 {
                let eval = weighted(config, &res, Some(pair), &batch)?;
                if !finite(&eval.components) {
                    return Err(TrainError::Diverged {
                        iteration: k,
                        partial: Box::new(result(&solution, &selection_snapshot(pair), records, completed, false)),
                    });
                }
                let (gi, gb) = selection_gradients(&pair.interior, &pair.boundary, &batch, &eval)?;
                opt.interior
                    .as_mut()
                    .expect("selection optimizer")
                    .step(&mut pair.interior.core, &gi, tau_s, Direction::Ascend)?;
                opt.boundary
                    .as_mut()
                    .expect("selection optimizer")
                    .step(&mut pair.boundary.core, &gb, tau_s, Direction::Ascend)?;
            }
        }
        let mut last = None;
        for j in 0..config.n2 {
            if j > 0 {
                res = evaluate_residuals_tracked(problem, &solution, &batch, &op_cfg)?;
            }
            let eval = weighted(config, &res, selection.as_ref(), &batch)?;
            if !finite(&eval.components) {
                return Err(TrainError::Diverged {
                    iteration: k,
                    partial: Box::new(result(&solution, &selection, records, completed, false)),
                });
            }
            let g = solution_gradient(&solution, &res, &eval)?;
            opt.solution.step(&mut solution.core, &g, rate, Direction::Descend)?;
            last = Some(eval.components);
        }
        completed = k;

        if k % config.eval_every == 0 || k == config.n {
            let predicted = solution.forward(test_points.view())?;
            let err = relative_error(predicted.view(), exact.view())?;
            let c = match last {
                Some(c) => c,
                None => weighted(config, &res, selection.as_ref(), &batch)?.components,
            };
            if !err.is_finite() {
                return Err(TrainError::Diverged {
                    iteration: k,
                    partial: Box::new(result(&solution, &selection, records, completed, false)),
                });
            }
            records.push(TrainRecord {
                iteration: k,
                seconds: start.elapsed().as_secs_f64(),
                loss_interior: c.interior_term.as_f64(),
                loss_boundary: c.boundary_term.as_f64(),
                loss_penalty: c.penalty_term.as_f64(),
                loss_total: c.total.as_f64(),
                rel_l2_error: err.as_f64(),
                lr,
                lr_selection: if selection.is_some() { config.tau_s } else { 0.0 },
            });
        }
    }
    Ok(result(&solution, &selection, records, completed, stopped_by_budget))
}

fn selection_snapshot<T: Real>(pair: &SelectionPair<T>) -> Option<SelectionPair<T>> {
    Some(pair.clone())
}

/// Final-error statistics over several seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub errors: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub stdev: f64,
    /// `stdev / mean`.
    pub cv: f64,
}

impl TrialStats {
    pub fn from_errors(errors: Vec<f64>) -> Self {
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let stdev = if errors.len() < 2 {
            0.0
        } else {
            (errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        let cv = if mean == 0.0 { 0.0 } else { stdev / mean };
        Self {
            errors,
            mean,
            stdev,
            cv,
        }
    }
}

/// Trains `trials` times with seeds `base_seed + i` and aggregates the final
/// errors.
pub fn run_trials<T: Real>(
    config: &TrainConfig,
    problem: &ProblemSpec<T>,
    trials: usize,
    base_seed: u64,
) -> Result<TrialStats, TrainError<T>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trial count must be at least 1".into()).into());
    }
    let mut errors = Vec::with_capacity(trials);
    for i in 0..trials {
        let mut c = config.clone();
        c.seed = base_seed + i as u64;
        let run = train(&c, problem)?;
        errors.push(run.final_error().unwrap_or(f64::NAN));
    }
    Ok(TrialStats::from_errors(errors))
}

/// Mean interior selection weight over the test points in the top and the
/// bottom decile of `|Du − f|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub top_decile_mean: f64,
    pub bottom_decile_mean: f64,
}

pub fn selection_concentration<T: Real>(
    solution: &SolutionAnsatz<T>,
    selection: &SelectionNetwork<T>,
    problem: &ProblemSpec<T>,
    points: Array2<T>,
    cfg: &OperatorConfig<T>,
) -> Result<Concentration> {
    let dim = points.ncols();
    let batch = SampleBatch {
        interior: points,
        boundary: Array2::zeros((0, dim)),
        tags: Vec::new(),
    };
    let res = evaluate_residuals(problem, solution, &batch, cfg)?;
    let phi = selection.forward(batch.interior.view())?;
    let mut order: Vec<usize> = (0..res.interior_len()).collect();
    order.sort_by(|&a, &b| {
        res.interior[b]
            .abs()
            .partial_cmp(&res.interior[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let decile = (order.len() / 10).max(1);
    let avg = |idx: &[usize]| idx.iter().map(|&i| phi[i].as_f64()).sum::<f64>() / idx.len() as f64;
    Ok(Concentration {
        top_decile_mean: avg(&order[..decile]),
        bottom_decile_mean: avg(&order[order.len() - decile..]),
    })
}

/// Test points of a run, redrawn from its seed.
pub fn run_test_points<T: Real>(config: &TrainConfig, problem: &ProblemSpec<T>) -> Result<Array2<T>> {
    let mut rng = RngStream::new(config.seed, StreamPurpose::Test);
    sample_test_points(problem, config.test_points, config.annuli, rng.rng())
}

/// Values of `field` at `points` as `f64`.
pub fn values_f64<T: Real, F: Field<T> + ?Sized>(field: &F, points: ArrayView2<'_, T>) -> Result<Array1<f64>> {
    Ok(field.evaluate(points)?.mapv(|v| v.as_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(method: Method) -> TrainConfig {
        TrainConfig {
            method,
            problem: ProblemName::Poisson2d,
            d: 2,
            m: 8,
            depth: 2,
            m_s: 4,
            selection_depth: 2,
            n: 5,
            interior_points: 50,
            boundary_points: 20,
            test_points: 100,
            eval_every: 2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_iterations_return_initial_network() {
        let mut c = small(Method::Basic);
        c.n = 0;
        let p = c.make_problem::<f64>().unwrap();
        let run = train(&c, &p).unwrap();
        assert!(run.records.is_empty());
        assert_eq!(run.solution, initial_networks(&c, &p).unwrap().0);
    }

    #[test]
    fn record_count_and_order() {
        for method in [Method::Basic, Method::Selectnet, Method::Binary] {
            let c = small(method);
            let p = c.make_problem::<f64>().unwrap();
            let run = train(&c, &p).unwrap();
            let its: Vec<usize> = run.records.iter().map(|r| r.iteration).collect();
            assert_eq!(its, vec![2, 4, 5]);
            assert!(run.records.windows(2).all(|w| w[0].seconds <= w[1].seconds));
            assert_eq!(run.selection.is_some(), method == Method::Selectnet);
        }
    }

    #[test]
    fn mismatched_problem_rejected() {
        let c = small(Method::Basic);
        let p = make_problem::<f64>(ProblemName::EllipticNl, 2).unwrap();
        assert!(matches!(train(&c, &p), Err(TrainError::Config(_))));
        let mut c = TrainConfig {
            problem: ProblemName::Parabolic,
            d: 2,
            ..small(Method::Basic)
        };
        c.boundary_mode = BoundaryMode::Conforming;
        let p = c.make_problem::<f64>().unwrap();
        assert!(matches!(train(&c, &p), Err(TrainError::Config(_))));
    }

    #[test]
    fn relative_error_conventions() {
        let e: Array1<f64> = ndarray::array![1.0, -2.0, 0.5];
        assert_eq!(relative_error(e.view(), e.view()).unwrap(), 0.0);
        let z = Array1::zeros(3);
        assert_eq!(relative_error(z.view(), e.view()).unwrap(), 1.0);
        let (a, b) = (e.mapv(|v| 3.0 * v + 0.1), e.mapv(|v| 3.0 * v));
        let base = relative_error(e.mapv(|v| v + 0.1 / 3.0).view(), e.view()).unwrap();
        assert!((relative_error(a.view(), b.view()).unwrap() - base).abs() < 1e-15);
        assert_eq!(relative_error(e.view(), z.view()), Err(Error::ZeroReference));
    }

    #[test]
    fn trial_statistics() {
        let s = TrialStats::from_errors(vec![0.2]);
        assert_eq!((s.stdev, s.cv), (0.0, 0.0));
        let s = TrialStats::from_errors(vec![1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.stdev, 1.0);
    }

    #[test]
    fn time_budget_stops_early() {
        let mut c = small(Method::Basic);
        c.n = 1000;
        c.time_budget_seconds = Some(0.0);
        let p = c.make_problem::<f64>().unwrap();
        let run = train(&c, &p).unwrap();
        assert!(run.stopped_by_budget);
        assert_eq!(run.iterations, 0);
    }
}
