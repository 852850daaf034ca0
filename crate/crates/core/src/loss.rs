//! Empirical losses: basic least squares, SelectNet min-max, and binary
//! weighting.
//!
//! Residuals are computed once per solution-network state
//! ([`evaluate_residuals`] or [`evaluate_residuals_tracked`]) and then
//! weighted. All three models go through the same weighted reduction, so a
//! SelectNet loss whose selection weights are exactly 1 reproduces the basic
//! loss bit for bit.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::{accumulate_gradient, backprop_params, forward_with_cache, ForwardCache, ParameterGradient};
use crate::net::{Field, Mask, SelectionNetwork, SolutionAnsatz};
use crate::operators::{
    boundary_rows, reduce_stencil, stencil_points, stencil_size, BoundaryOperatorKind, OperatorConfig,
    StencilEvaluation, StencilKernel,
};
use crate::problems::ProblemSpec;
use crate::sampling::SampleBatch;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights<T> {
    /// Weight `λ` of the boundary term.
    pub lambda: T,
    /// Penalty strength `ε` of the selection normalisation.
    pub epsilon: T,
}

impl<T: Real> Default for LossWeights<T> {
    fn default() -> Self {
        Self {
            lambda: T::one(),
            epsilon: T::lit(1e-3),
        }
    }
}

impl<T: Real> LossWeights<T> {
    pub fn validate(&self) -> Result<()> {
        if self.lambda > T::zero() && self.epsilon > T::zero() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "lambda and epsilon must be positive, got {} and {}",
                self.lambda, self.epsilon
            )))
        }
    }
}

/// The fraction `p` of points with the largest residuals is weighted
/// `large`, the rest `small`, with `large·p + small·(1 − p) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryWeightConfig<T> {
    pub fraction: T,
    pub large: T,
    pub small: T,
}

impl<T: Real> BinaryWeightConfig<T> {
    pub fn new(fraction: T, large: T, small: T) -> Result<Self> {
        let cfg = Self { fraction, large, small };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Weights with `large / small = ratio`, normalised.
    pub fn from_ratio(fraction: T, ratio: T) -> Result<Self> {
        let small = T::one() / (ratio * fraction + T::one() - fraction);
        Self::new(fraction, ratio * small, small)
    }

    pub fn validate(&self) -> Result<()> {
        let (p, wl, ws) = (self.fraction, self.large, self.small);
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::InvalidConfig(format!("binary fraction p={p} outside (0, 1)")));
        }
        // Equal weights (both 1) are allowed as the degenerate basic model.
        if !(wl >= T::one() && T::one() >= ws && ws >= T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "binary weights need w_L >= 1 >= w_S >= 0, got {wl} and {ws}"
            )));
        }
        let norm = wl * p + ws * (T::one() - p);
        if (norm - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidConfig(format!(
                "binary weights must satisfy w_L p + w_S (1-p) = 1, got {norm}"
            )));
        }
        Ok(())
    }
}

impl<T: Real> Default for BinaryWeightConfig<T> {
    fn default() -> Self {
        Self::from_ratio(T::lit(0.8), T::lit(4.0)).expect("valid default")
    }
}

/// Loss value and its parts.
#[derive(Clone, Debug, PartialEq)]
pub struct LossComponents<T> {
    pub interior_term: T,
    pub boundary_term: T,
    pub penalty_term: T,
    /// `interior + λ·boundary − penalty`.
    pub total: T,
    /// Unweighted squared residual per interior point.
    pub interior_squared: Array1<T>,
    /// Unweighted squared residual per boundary point, averaged over the
    /// conditions on its component.
    pub boundary_squared: Array1<T>,
}

/// One boundary condition evaluated at one boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryTerm<T> {
    pub point: usize,
    pub op: BoundaryOperatorKind,
    /// First of this term's rows in the boundary evaluation matrix.
    pub first_row: usize,
    /// `1 / (number of conditions on the point's component)`.
    pub share: T,
    /// `Bu − g`.
    pub residual: T,
}

#[derive(Clone, Debug)]
struct Tracked<T> {
    interior_cache: ForwardCache<T>,
    interior_mask: Option<Array1<T>>,
    boundary_cache: ForwardCache<T>,
    boundary_mask: Option<Array1<T>>,
}

/// Residuals of one solution-network state on one batch.
#[derive(Clone, Debug)]
pub struct ResidualEvaluation<T> {
    /// `Du − f` per interior point.
    pub interior: Array1<T>,
    pub interior_stencil: StencilEvaluation<T>,
    pub boundary_terms: Vec<BoundaryTerm<T>>,
    pub boundary_squared: Array1<T>,
    pub step: T,
    tracked: Option<Tracked<T>>,
}

impl<T: Real> ResidualEvaluation<T> {
    pub fn interior_squared(&self) -> Array1<T> {
        self.interior.mapv(|r| r * r)
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len()
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary_squared.len()
    }

    /// Whether forward caches were kept, so parameter gradients are available.
    pub fn is_tracked(&self) -> bool {
        self.tracked.is_some()
    }
}

/// Expands boundary points into operator rows, recording one term per
/// (point, condition).
fn boundary_layout<T: Real>(
    problem: &ProblemSpec<T>,
    batch: &SampleBatch<T>,
    step: T,
) -> Result<(Array2<T>, Vec<BoundaryTerm<T>>)> {
    let dim = problem.input_dim();
    if batch.boundary.nrows() > 0 && batch.boundary.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: batch.boundary.ncols(),
        });
    }
    if batch.tags.len() != batch.boundary.nrows() {
        return Err(Error::InvalidShape("one tag per boundary point".into()));
    }
    let mut rows: Vec<T> = Vec::new();
    let mut terms = Vec::new();
    let mut count = 0;
    for (i, (p, &tag)) in batch.boundary.outer_iter().zip(&batch.tags).enumerate() {
        let conds = problem.conditions(tag);
        if conds.is_empty() {
            return Err(Error::WrongBoundaryComponent {
                op: "any",
                context: format!("{tag:?} boundary of {}", problem.name),
            });
        }
        let share = T::one() / T::count(conds.len());
        for c in conds {
            let first_row = count;
            for r in boundary_rows(c.op, p, step) {
                rows.extend(r.iter().copied());
                count += 1;
            }
            terms.push(BoundaryTerm {
                point: i,
                op: c.op,
                first_row,
                share,
                residual: T::zero(),
            });
        }
    }
    let rows = Array2::from_shape_vec((count, dim), rows).expect("row-major layout");
    Ok((rows, terms))
}

fn boundary_value<T: Real>(op: BoundaryOperatorKind, values: &Array1<T>, first: usize, step: T) -> T {
    match op {
        BoundaryOperatorKind::DirichletTrace | BoundaryOperatorKind::InitialValue => values[first],
        BoundaryOperatorKind::InitialVelocity => (values[first] - values[first + 1]) / (step + step),
    }
}

fn residuals_with<T: Real>(
    problem: &ProblemSpec<T>,
    batch: &SampleBatch<T>,
    cfg: &OperatorConfig<T>,
    eval: &mut dyn FnMut(ArrayView2<'_, T>) -> Result<Array1<T>>,
) -> Result<ResidualEvaluation<T>> {
    cfg.validate()?;
    let interior = batch.interior.view();
    let n1 = interior.nrows();
    if n1 == 0 {
        return Err(Error::InvalidConfig("interior batch is empty".into()));
    }
    let dim = problem.input_dim();
    if interior.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: interior.ncols(),
        });
    }
    let rows = stencil_points(interior, cfg.step);
    let values = eval(rows.view())?
        .into_shape_with_order((n1, stencil_size(dim)))
        .expect("stencil rows are contiguous");
    let stencil = reduce_stencil(
        StencilKernel::Operator(&problem.operator),
        problem.spatial_dim,
        interior,
        values,
        cfg,
    )?;
    let f = problem.evaluate_f(interior)?;
    let residual = &stencil.operator_values - &f;

    let (brows, mut terms) = boundary_layout(problem, batch, cfg.step)?;
    let bvalues = eval(brows.view())?;
    let mut squared = Array1::zeros(batch.boundary.nrows());
    for term in &mut terms {
        let p = batch.boundary.row(term.point).to_vec();
        let data = problem
            .conditions(batch.tags[term.point])
            .iter()
            .find(|c| c.op == term.op)
            .expect("term built from this component")
            .data
            .clone();
        term.residual = boundary_value(term.op, &bvalues, term.first_row, cfg.step) - data(&p);
        squared[term.point] += term.share * term.residual * term.residual;
    }
    Ok(ResidualEvaluation {
        interior: residual,
        interior_stencil: stencil,
        boundary_terms: terms,
        boundary_squared: squared,
        step: cfg.step,
        tracked: None,
    })
}

/// Residuals of any field; no gradients.
pub fn evaluate_residuals<T: Real, F: Field<T> + ?Sized>(
    problem: &ProblemSpec<T>,
    field: &F,
    batch: &SampleBatch<T>,
    cfg: &OperatorConfig<T>,
) -> Result<ResidualEvaluation<T>> {
    if field.input_dim() != problem.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.input_dim(),
            found: field.input_dim(),
        });
    }
    let mut eval = |rows: ArrayView2<'_, T>| {
        if rows.nrows() == 0 {
            Ok(Array1::zeros(0))
        } else {
            field.evaluate(rows)
        }
    };
    residuals_with(problem, batch, cfg, &mut eval)
}

/// Residuals of a solution ansatz, keeping forward caches for backprop.
pub fn evaluate_residuals_tracked<T: Real>(
    problem: &ProblemSpec<T>,
    ansatz: &SolutionAnsatz<T>,
    batch: &SampleBatch<T>,
    cfg: &OperatorConfig<T>,
) -> Result<ResidualEvaluation<T>> {
    if ansatz.core.input_dim() != problem.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.input_dim(),
            found: ansatz.core.input_dim(),
        });
    }
    let mut saved: Vec<(ForwardCache<T>, Option<Array1<T>>)> = Vec::with_capacity(2);
    let mut eval = |rows: ArrayView2<'_, T>| -> Result<Array1<T>> {
        let (mut values, cache) = forward_with_cache(&ansatz.core, rows)?;
        let mask = (ansatz.mask != Mask::None).then(|| ansatz.mask.values(rows));
        if let Some(m) = &mask {
            values.zip_mut_with(m, |u, &h| *u = h * *u);
        }
        saved.push((cache, mask));
        Ok(values)
    };
    let mut res = residuals_with(problem, batch, cfg, &mut eval)?;
    let (boundary_cache, boundary_mask) = saved.pop().expect("boundary pass");
    let (interior_cache, interior_mask) = saved.pop().expect("interior pass");
    res.tracked = Some(Tracked {
        interior_cache,
        interior_mask,
        boundary_cache,
        boundary_mask,
    });
    Ok(res)
}

/// Core-output upstreams of the two selection networks.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionUpstream<T> {
    pub interior: Array1<T>,
    pub boundary: Array1<T>,
}

/// A weighted loss together with what its gradients need.
#[derive(Clone, Debug, PartialEq)]
pub struct LossEvaluation<T> {
    pub components: LossComponents<T>,
    /// Per-point weights on the interior squared residuals.
    pub interior_weights: Array1<T>,
    /// Per-point weights on the boundary squared residuals.
    pub boundary_weights: Array1<T>,
    pub lambda: T,
    pub selection: Option<SelectionUpstream<T>>,
}

fn weighted_mean<T: Real>(weights: ArrayView1<'_, T>, squared: ArrayView1<'_, T>) -> T {
    if squared.is_empty() {
        return T::zero();
    }
    let sum = weights
        .iter()
        .zip(squared.iter())
        .fold(T::zero(), |acc, (&w, &s)| acc + w * s);
    sum / T::count(squared.len())
}

fn mean<T: Real>(v: ArrayView1<'_, T>) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x) / T::count(v.len())
}

fn assemble<T: Real>(
    res: &ResidualEvaluation<T>,
    interior_weights: Array1<T>,
    boundary_weights: Array1<T>,
    lambda: T,
    penalty: T,
) -> LossEvaluation<T> {
    let interior_squared = res.interior_squared();
    let interior_term = weighted_mean(interior_weights.view(), interior_squared.view());
    let boundary_term = weighted_mean(boundary_weights.view(), res.boundary_squared.view());
    LossEvaluation {
        components: LossComponents {
            interior_term,
            boundary_term,
            penalty_term: penalty,
            total: interior_term + lambda * boundary_term - penalty,
            interior_squared,
            boundary_squared: res.boundary_squared.clone(),
        },
        interior_weights,
        boundary_weights,
        lambda,
        selection: None,
    }
}

/// `(1/N1)Σ r² + λ(1/N2)Σ r_b²`.
pub fn basic_loss_from<T: Real>(res: &ResidualEvaluation<T>, weights: &LossWeights<T>) -> LossEvaluation<T> {
    assemble(
        res,
        Array1::ones(res.interior_len()),
        Array1::ones(res.boundary_len()),
        weights.lambda,
        T::zero(),
    )
}

/// Selection weights and the matching core outputs at the batch points.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionValues<T> {
    pub interior: Array1<T>,
    pub interior_core: Array1<T>,
    pub boundary: Array1<T>,
    pub boundary_core: Array1<T>,
}

pub fn evaluate_selection<T: Real>(
    interior_net: &SelectionNetwork<T>,
    boundary_net: &SelectionNetwork<T>,
    batch: &SampleBatch<T>,
) -> Result<SelectionValues<T>> {
    let (interior, interior_core) = interior_net.forward_with_core(batch.interior.view())?;
    let (boundary, boundary_core) = if batch.boundary.nrows() == 0 {
        (Array1::zeros(0), Array1::zeros(0))
    } else {
        boundary_net.forward_with_core(batch.boundary.view())?
    };
    Ok(SelectionValues {
        interior,
        interior_core,
        boundary,
        boundary_core,
    })
}

/// `(1/N1)Σ φ′r² + λ(1/N2)Σ φ″r_b² − ε⁻¹[(mean φ′ − 1)² + (mean φ″ − 1)²]`.
/// The boundary part of the penalty is dropped when there are no boundary
/// points.
pub fn selectnet_loss_from<T: Real>(
    res: &ResidualEvaluation<T>,
    interior_net: &SelectionNetwork<T>,
    boundary_net: &SelectionNetwork<T>,
    sel: &SelectionValues<T>,
    weights: &LossWeights<T>,
) -> Result<LossEvaluation<T>> {
    if sel.interior.len() != res.interior_len() || sel.boundary.len() != res.boundary_len() {
        return Err(Error::ShapeMismatch);
    }
    let inv_eps = T::one() / weights.epsilon;
    let two = T::lit(2.0);
    let dev_i = mean(sel.interior.view()) - T::one();
    let (dev_b, has_boundary) = if sel.boundary.is_empty() {
        (T::zero(), false)
    } else {
        (mean(sel.boundary.view()) - T::one(), true)
    };
    let penalty = inv_eps * (dev_i * dev_i + dev_b * dev_b);
    let mut eval = assemble(
        res,
        sel.interior.clone(),
        sel.boundary.clone(),
        weights.lambda,
        penalty,
    );

    let n1 = T::count(res.interior_len());
    let interior_up = ndarray::Zip::from(&eval.components.interior_squared)
        .and(&sel.interior_core)
        .map_collect(|&sq, &z| (sq / n1 - two * inv_eps * dev_i / n1) * interior_net.squash_derivative(z));
    let boundary_up = if has_boundary {
        let n2 = T::count(res.boundary_len());
        ndarray::Zip::from(&eval.components.boundary_squared)
            .and(&sel.boundary_core)
            .map_collect(|&sq, &z| {
                (weights.lambda * sq / n2 - two * inv_eps * dev_b / n2) * boundary_net.squash_derivative(z)
            })
    } else {
        Array1::zeros(0)
    };
    eval.selection = Some(SelectionUpstream {
        interior: interior_up,
        boundary: boundary_up,
    });
    Ok(eval)
}

/// Ranks by squared value, largest first, ties by index; the top
/// `round(p·N)` get `large`, the rest `small`.
pub fn binary_partition<T: Real>(squared: ArrayView1<'_, T>, bw: &BinaryWeightConfig<T>) -> Array1<T> {
    let n = squared.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| squared[b].partial_cmp(&squared[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let top = (bw.fraction * T::count(n)).round().to_usize().unwrap_or(0).min(n);
    let mut w = Array1::from_elem(n, bw.small);
    for &i in &order[..top] {
        w[i] = bw.large;
    }
    w
}

pub fn binary_loss_from<T: Real>(
    res: &ResidualEvaluation<T>,
    bw: &BinaryWeightConfig<T>,
    weights: &LossWeights<T>,
) -> Result<LossEvaluation<T>> {
    bw.validate()?;
    let interior_squared = res.interior_squared();
    let wi = binary_partition(interior_squared.view(), bw);
    let wb = binary_partition(res.boundary_squared.view(), bw);
    Ok(assemble(res, wi, wb, weights.lambda, T::zero()))
}

/// Gradient of `total` with respect to the solution core's parameters.
pub fn solution_gradient<T: Real>(
    ansatz: &SolutionAnsatz<T>,
    res: &ResidualEvaluation<T>,
    eval: &LossEvaluation<T>,
) -> Result<ParameterGradient<T>> {
    let tracked = res
        .tracked
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("residuals were evaluated without caches".into()))?;
    let stencil = &res.interior_stencil;
    let per = stencil.values.ncols();
    let n1 = T::count(res.interior_len());
    let two = T::lit(2.0);

    let mut up = Array1::zeros(res.interior_len() * per);
    for (i, (&r, &w)) in res.interior.iter().zip(&eval.interior_weights).enumerate() {
        let g = two * w * r / n1;
        for k in 0..per {
            up[i * per + k] = g * stencil.sensitivities[[i, k]];
        }
    }
    if let Some(m) = &tracked.interior_mask {
        up.zip_mut_with(m, |u, &h| *u = *u * h);
    }
    let mut grad = backprop_params(&ansatz.core, &tracked.interior_cache, up.view())?;

    if !res.boundary_terms.is_empty() {
        let n2 = T::count(res.boundary_len());
        let mut bup = Array1::zeros(tracked.boundary_cache.rows());
        for term in &res.boundary_terms {
            let g = eval.lambda * eval.boundary_weights[term.point] / n2 * term.share * two * term.residual;
            match term.op {
                BoundaryOperatorKind::DirichletTrace | BoundaryOperatorKind::InitialValue => {
                    bup[term.first_row] += g;
                }
                BoundaryOperatorKind::InitialVelocity => {
                    let two_h = res.step + res.step;
                    bup[term.first_row] += g / two_h;
                    bup[term.first_row + 1] -= g / two_h;
                }
            }
        }
        if let Some(m) = &tracked.boundary_mask {
            bup.zip_mut_with(m, |u, &h| *u = *u * h);
        }
        grad.add_assign(&backprop_params(&ansatz.core, &tracked.boundary_cache, bup.view())?);
    }
    Ok(grad)
}

/// Gradients of `total` with respect to the interior and boundary selection
/// cores.
pub fn selection_gradients<T: Real>(
    interior_net: &SelectionNetwork<T>,
    boundary_net: &SelectionNetwork<T>,
    batch: &SampleBatch<T>,
    eval: &LossEvaluation<T>,
) -> Result<(ParameterGradient<T>, ParameterGradient<T>)> {
    let up = eval
        .selection
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("loss has no selection networks".into()))?;
    let gi = accumulate_gradient(&interior_net.core, batch.interior.view(), up.interior.view())?;
    let gb = if up.boundary.is_empty() {
        ParameterGradient::zeros_like(&boundary_net.core)
    } else {
        accumulate_gradient(&boundary_net.core, batch.boundary.view(), up.boundary.view())?
    };
    Ok((gi, gb))
}

/// Parameter gradients of a loss.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGradients<T> {
    pub solution: ParameterGradient<T>,
    pub interior_selection: Option<ParameterGradient<T>>,
    pub boundary_selection: Option<ParameterGradient<T>>,
}

/// Basic model loss and its solution gradient.
pub fn basic_loss<T: Real>(
    ansatz: &SolutionAnsatz<T>,
    problem: &ProblemSpec<T>,
    batch: &SampleBatch<T>,
    weights: &LossWeights<T>,
    cfg: &OperatorConfig<T>,
) -> Result<(LossComponents<T>, LossGradients<T>)> {
    weights.validate()?;
    let res = evaluate_residuals_tracked(problem, ansatz, batch, cfg)?;
    let eval = basic_loss_from(&res, weights);
    let solution = solution_gradient(ansatz, &res, &eval)?;
    Ok((
        eval.components,
        LossGradients {
            solution,
            interior_selection: None,
            boundary_selection: None,
        },
    ))
}

/// SelectNet loss and the gradients for `θ`, `θ_s′` and `θ_s″`.
pub fn selectnet_loss<T: Real>(
    ansatz: &SolutionAnsatz<T>,
    interior_net: &SelectionNetwork<T>,
    boundary_net: &SelectionNetwork<T>,
    problem: &ProblemSpec<T>,
    batch: &SampleBatch<T>,
    weights: &LossWeights<T>,
    cfg: &OperatorConfig<T>,
) -> Result<(LossComponents<T>, LossGradients<T>)> {
    weights.validate()?;
    let res = evaluate_residuals_tracked(problem, ansatz, batch, cfg)?;
    let sel = evaluate_selection(interior_net, boundary_net, batch)?;
    let eval = selectnet_loss_from(&res, interior_net, boundary_net, &sel, weights)?;
    let solution = solution_gradient(ansatz, &res, &eval)?;
    let (gi, gb) = selection_gradients(interior_net, boundary_net, batch, &eval)?;
    Ok((
        eval.components,
        LossGradients {
            solution,
            interior_selection: Some(gi),
            boundary_selection: Some(gb),
        },
    ))
}

/// Binary-weighted loss and its solution gradient.
pub fn binary_weighted_loss<T: Real>(
    ansatz: &SolutionAnsatz<T>,
    problem: &ProblemSpec<T>,
    batch: &SampleBatch<T>,
    bw: &BinaryWeightConfig<T>,
    weights: &LossWeights<T>,
    cfg: &OperatorConfig<T>,
) -> Result<(LossComponents<T>, LossGradients<T>)> {
    weights.validate()?;
    let res = evaluate_residuals_tracked(problem, ansatz, batch, cfg)?;
    let eval = binary_loss_from(&res, bw, weights)?;
    let solution = solution_gradient(ansatz, &res, &eval)?;
    Ok((
        eval.components,
        LossGradients {
            solution,
            interior_selection: None,
            boundary_selection: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{ActivationKind, MlpNetwork, NetworkShape};
    use crate::problems::{make_problem, BoundaryComponent, ProblemName};
    use ndarray::array;

    fn poisson_batch() -> SampleBatch<f64> {
        SampleBatch {
            interior: array![[0.1, 0.2], [-0.5, 0.3], [0.7, -0.7]],
            boundary: array![[1.0, 0.2], [-0.3, -1.0]],
            tags: vec![BoundaryComponent::Spatial; 2],
        }
    }

    fn zero_ansatz(dim: usize) -> SolutionAnsatz<f64> {
        let shape = NetworkShape::new(dim, 4, 2).unwrap();
        SolutionAnsatz::unmasked(MlpNetwork::constant(shape, ActivationKind::Tanh, 0.0).unwrap())
    }

    fn constant_selection(dim: usize, value: f64) -> SelectionNetwork<f64> {
        // With lower = value − 0.5, upper = value + 0.5 and a zero core the
        // weight is exactly `value`.
        let shape = NetworkShape::new(dim, 3, 1).unwrap();
        let core = MlpNetwork::constant(shape, ActivationKind::Relu, 0.0).unwrap();
        SelectionNetwork::new(core, value - 0.5, value + 0.5).unwrap()
    }

    #[test]
    fn zero_network_on_poisson() {
        let problem = make_problem::<f64>(ProblemName::Poisson2d, 2).unwrap();
        let (c, _) = basic_loss(
            &zero_ansatz(2),
            &problem,
            &poisson_batch(),
            &LossWeights::default(),
            &OperatorConfig::default(),
        )
        .unwrap();
        assert_eq!(c.interior_term, 1.0);
        assert_eq!(c.boundary_term, 0.0);
        assert_eq!(c.total, 1.0);
    }

    #[test]
    fn binary_arithmetic_example() {
        let sq = array![9.0, 4.0, 1.0, 0.0];
        let bw = BinaryWeightConfig::new(0.5, 1.5, 0.5).unwrap();
        let w = binary_partition(sq.view(), &bw);
        assert_eq!(w, array![1.5, 1.5, 0.5, 0.5]);
        assert_eq!(weighted_mean(w.view(), sq.view()), 5.0);
    }

    #[test]
    fn binary_ties_broken_by_index() {
        let sq = array![1.0, 2.0, 1.0, 1.0];
        let bw = BinaryWeightConfig::new(0.5, 1.5, 0.5).unwrap();
        assert_eq!(binary_partition(sq.view(), &bw), array![1.5, 1.5, 0.5, 0.5]);
    }

    #[test]
    fn binary_config_validation() {
        assert!(BinaryWeightConfig::new(0.5, 1.5, 0.4).is_err());
        assert!(BinaryWeightConfig::new(1.0, 1.0, 1.0).is_err());
        let bw = BinaryWeightConfig::<f64>::from_ratio(0.2, 8.0).unwrap();
        assert!((bw.large / bw.small - 8.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_of_shifted_constant_selection() {
        let problem = make_problem::<f64>(ProblemName::Poisson2d, 2).unwrap();
        let batch = poisson_batch();
        let res = evaluate_residuals(&problem, &zero_ansatz(2), &batch, &OperatorConfig::default()).unwrap();
        let si = constant_selection(2, 1.25);
        let sb = constant_selection(2, 1.0);
        let sel = evaluate_selection(&si, &sb, &batch).unwrap();
        let e = selectnet_loss_from(&res, &si, &sb, &sel, &LossWeights::default()).unwrap();
        assert!((e.components.penalty_term - 1000.0 * 0.0625).abs() < 1e-9);
        assert_eq!(e.components.interior_term, 1.25);
    }

    #[test]
    fn empty_boundary_contributes_nothing() {
        let problem = make_problem::<f64>(ProblemName::Poisson2d, 2).unwrap();
        let mut batch = poisson_batch();
        batch.boundary = Array2::zeros((0, 2));
        batch.tags.clear();
        let si = constant_selection(2, 1.0);
        let (c, g) = selectnet_loss(
            &zero_ansatz(2),
            &si,
            &si,
            &problem,
            &batch,
            &LossWeights::default(),
            &OperatorConfig::default(),
        )
        .unwrap();
        assert_eq!(c.boundary_term, 0.0);
        assert_eq!(c.penalty_term, 0.0);
        assert_eq!(g.boundary_selection.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn untracked_residuals_have_no_gradient() {
        let problem = make_problem::<f64>(ProblemName::Poisson2d, 2).unwrap();
        let a = zero_ansatz(2);
        let res = evaluate_residuals(&problem, &a, &poisson_batch(), &OperatorConfig::default()).unwrap();
        let e = basic_loss_from(&res, &LossWeights::default());
        assert!(!res.is_tracked());
        assert!(solution_gradient(&a, &res, &e).is_err());
    }
}
