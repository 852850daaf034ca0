//! Finite-difference evaluation of the interior operator `D` and the
//! boundary/initial operators `B`.
//!
//! Every collocation point `x` of dimension `D` expands into the `2D + 1`
//! stencil rows
//!
//! ```text
//! [x, x + h e₀, x − h e₀, x + h e₁, x − h e₁, …]
//! ```
//!
//! which are evaluated as ordinary network inputs. Networks are defined on
//! all of ℝᴰ, so stencil rows that leave the domain are evaluated unchanged.
//! For time-dependent problems the last coordinate is `t` and shares the
//! step `h` with space.

use std::fmt;
use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1};

use crate::error::{Error, Result};
use crate::net::Field;
use crate::problems::{BoundaryComponent, ProblemSpec};
use crate::scalar::Real;

/// Collocation points per evaluation batch when applying operators to a
/// generic [`Field`].
const POINT_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorConfig<T> {
    pub step: T,
}

impl<T: Real> Default for OperatorConfig<T> {
    fn default() -> Self {
        OperatorConfig { step: T::lit(1e-4) }
    }
}

impl<T: Real> OperatorConfig<T> {
    pub fn new(step: T) -> Result<Self> {
        let cfg = OperatorConfig { step };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step > T::zero() && self.step.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidStep(self.step.as_f64()))
        }
    }
}

/// Scalar diffusion coefficient `a(x)` of the spatial variable.
#[derive(Clone)]
pub struct Coefficient<T> {
    f: Arc<dyn Fn(&[T]) -> T + Send + Sync>,
}

impl<T> Coefficient<T> {
    pub fn new(f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Coefficient { f: Arc::new(f) }
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        (self.f)(x)
    }
}

impl<T> fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Coefficient(..)")
    }
}

/// Interior differential operator. A `None` coefficient means `a ≡ 1` and
/// costs no coefficient evaluations.
#[derive(Clone, Debug)]
pub enum OperatorKind<T> {
    /// `−∇·(a∇u)`, plus `|∇u|²` when `gradient_square` is set.
    DivergenceElliptic {
        coefficient: Option<Coefficient<T>>,
        gradient_square: bool,
    },
    /// `∂ₜu − ∇ₓ·(a∇ₓu)`.
    Heat { coefficient: Option<Coefficient<T>> },
    /// `∂ₜu − Δₓu − u + u³`.
    AllenCahn,
    /// `∂ₜₜu − Δₓu`.
    Wave,
}

impl<T> OperatorKind<T> {
    pub fn is_time_dependent(&self) -> bool {
        !matches!(self, OperatorKind::DivergenceElliptic { .. })
    }

    pub fn coefficient(&self) -> Option<&Coefficient<T>> {
        match self {
            OperatorKind::DivergenceElliptic { coefficient, .. } | OperatorKind::Heat { coefficient } => {
                coefficient.as_ref()
            }
            _ => None,
        }
    }
}

/// Boundary and initial operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryOperatorKind {
    /// `u` on the spatial boundary.
    DirichletTrace,
    /// `u(x, 0)`.
    InitialValue,
    /// `∂ₜu(x, 0)` by central difference over `t = ±h`.
    InitialVelocity,
}

impl BoundaryOperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryOperatorKind::DirichletTrace => "dirichlet_trace",
            BoundaryOperatorKind::InitialValue => "initial_value",
            BoundaryOperatorKind::InitialVelocity => "initial_velocity",
        }
    }

    pub fn component(self) -> BoundaryComponent {
        match self {
            BoundaryOperatorKind::DirichletTrace => BoundaryComponent::Spatial,
            _ => BoundaryComponent::Initial,
        }
    }
}

/// Number of stencil rows per collocation point.
pub fn stencil_size(dim: usize) -> usize {
    2 * dim + 1
}

/// Expands `points` (`N × D`) into the `N·(2D+1) × D` stencil matrix.
pub fn stencil_points<T: Real>(points: ArrayView2<'_, T>, step: T) -> Array2<T> {
    let (n, dim) = points.dim();
    let per = stencil_size(dim);
    let mut out = Array2::zeros((n * per, dim));
    for (i, x) in points.outer_iter().enumerate() {
        let base = i * per;
        for r in 0..per {
            out.row_mut(base + r).assign(&x);
        }
        for k in 0..dim {
            out[[base + 1 + 2 * k, k]] += step;
            out[[base + 2 + 2 * k, k]] -= step;
        }
    }
    out
}

/// Every network value and coefficient value an operator application used,
/// with the derivative of each operator value with respect to each of its
/// stencil values.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilEvaluation<T> {
    /// Dimension `D` of the collocation points.
    pub dim: usize,
    /// Leading coordinates treated as space.
    pub spatial_dim: usize,
    pub step: T,
    /// `N × (2D+1)` field values in stencil order.
    pub values: Array2<T>,
    /// `N × 2·spatial_dim` values `a(x ± ½h eᵢ)` as `[a⁺₀, a⁻₀, a⁺₁, …]`;
    /// zero columns when `a ≡ 1`.
    pub coefficients: Array2<T>,
    /// Operator value per collocation point.
    pub operator_values: Array1<T>,
    /// `∂(operator value) / ∂(stencil value)`, same layout as `values`.
    pub sensitivities: Array2<T>,
}

impl<T: Real> StencilEvaluation<T> {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// Recomputes the operator values from the stored stencil and coefficient
    /// values. Bitwise equal to `operator_values`.
    pub fn reduce(&self, kind: &StencilKernel<'_, T>) -> Array1<T> {
        let mut sens = Array1::zeros(self.values.ncols());
        (0..self.len())
            .map(|i| {
                kind.apply(
                    self.spatial_dim,
                    self.step,
                    self.values.row(i),
                    self.coefficients.row(i),
                    sens.view_mut(),
                )
            })
            .collect()
    }
}

/// The reduction applied to stencil values.
#[derive(Clone, Copy, Debug)]
pub enum StencilKernel<'a, T> {
    /// `+∇·(a∇u)` over the spatial coordinates.
    Divergence { coefficient: Option<&'a Coefficient<T>> },
    Operator(&'a OperatorKind<T>),
}

impl<'a, T: Real> StencilKernel<'a, T> {
    fn coefficient(&self) -> Option<&'a Coefficient<T>> {
        match *self {
            StencilKernel::Divergence { coefficient } => coefficient,
            StencilKernel::Operator(kind) => kind.coefficient(),
        }
    }

    /// Operator value from one stencil row, writing sensitivities.
    fn apply(
        &self,
        spatial: usize,
        h: T,
        vals: ArrayView1<'_, T>,
        coef: ArrayView1<'_, T>,
        mut sens: ArrayViewMut1<'_, T>,
    ) -> T {
        sens.fill(T::zero());
        let dim = (vals.len() - 1) / 2;
        let u0 = vals[0];
        let up = |k: usize| vals[1 + 2 * k];
        let dn = |k: usize| vals[2 + 2 * k];
        let h2 = h * h;
        let has_coef = !coef.is_empty();

        // +∇·(a∇u) with sign `sign`, accumulated into value and sensitivities.
        let divergence = |sign: T, sens: &mut ArrayViewMut1<'_, T>| -> T {
            let mut acc = T::zero();
            for k in 0..spatial {
                let (ap, am) = if has_coef {
                    (coef[2 * k], coef[2 * k + 1])
                } else {
                    (T::one(), T::one())
                };
                acc += ap * (up(k) - u0) - am * (u0 - dn(k));
                sens[1 + 2 * k] += sign * ap / h2;
                sens[2 + 2 * k] += sign * am / h2;
                sens[0] -= sign * (ap + am) / h2;
            }
            sign * acc / h2
        };

        match *self {
            StencilKernel::Divergence { .. } => divergence(T::one(), &mut sens),
            StencilKernel::Operator(kind) => {
                let t = dim - 1;
                let two_h = h + h;
                match kind {
                    OperatorKind::DivergenceElliptic {
                        gradient_square, ..
                    } => {
                        let mut value = divergence(-T::one(), &mut sens);
                        if *gradient_square {
                            let mut sq = T::zero();
                            for k in 0..spatial {
                                let g = (up(k) - dn(k)) / two_h;
                                sq += g * g;
                                sens[1 + 2 * k] += g / h;
                                sens[2 + 2 * k] -= g / h;
                            }
                            value += sq;
                        }
                        value
                    }
                    OperatorKind::Heat { .. } => {
                        let div = divergence(-T::one(), &mut sens);
                        sens[1 + 2 * t] += T::one() / two_h;
                        sens[2 + 2 * t] -= T::one() / two_h;
                        (up(t) - dn(t)) / two_h + div
                    }
                    OperatorKind::AllenCahn => {
                        let lap = divergence(-T::one(), &mut sens);
                        sens[1 + 2 * t] += T::one() / two_h;
                        sens[2 + 2 * t] -= T::one() / two_h;
                        sens[0] += T::lit(3.0) * u0 * u0 - T::one();
                        (up(t) - dn(t)) / two_h + lap - u0 + u0 * u0 * u0
                    }
                    OperatorKind::Wave => {
                        let lap = divergence(-T::one(), &mut sens);
                        sens[1 + 2 * t] += T::one() / h2;
                        sens[2 + 2 * t] += T::one() / h2;
                        sens[0] -= T::lit(2.0) / h2;
                        (up(t) - u0 - (u0 - dn(t))) / h2 + lap
                    }
                }
            }
        }
    }
}

/// Coefficient values `[a(x+½he₀), a(x−½he₀), …]` for each point.
fn coefficient_values<T: Real>(
    coefficient: Option<&Coefficient<T>>,
    points: ArrayView2<'_, T>,
    spatial: usize,
    step: T,
) -> Array2<T> {
    let Some(a) = coefficient else {
        return Array2::zeros((points.nrows(), 0));
    };
    let half = step / T::lit(2.0);
    let mut out = Array2::zeros((points.nrows(), 2 * spatial));
    let mut buf = vec![T::zero(); spatial];
    for (i, x) in points.outer_iter().enumerate() {
        for k in 0..spatial {
            for (b, &v) in buf.iter_mut().zip(x.iter()) {
                *b = v;
            }
            buf[k] = x[k] + half;
            out[[i, 2 * k]] = a.eval(&buf);
            buf[k] = x[k] - half;
            out[[i, 2 * k + 1]] = a.eval(&buf);
        }
    }
    out
}

/// Reduces already-evaluated stencil values (`N × (2D+1)`) at `points`.
pub fn reduce_stencil<T: Real>(
    kernel: StencilKernel<'_, T>,
    spatial_dim: usize,
    points: ArrayView2<'_, T>,
    values: Array2<T>,
    cfg: &OperatorConfig<T>,
) -> Result<StencilEvaluation<T>> {
    cfg.validate()?;
    let (n, dim) = points.dim();
    if values.dim() != (n, stencil_size(dim)) {
        return Err(Error::DimensionMismatch {
            expected: stencil_size(dim),
            found: values.ncols(),
        });
    }
    let coefficients = coefficient_values(kernel.coefficient(), points, spatial_dim, cfg.step);
    let mut sensitivities = Array2::zeros(values.dim());
    let operator_values = (0..n)
        .map(|i| {
            kernel.apply(
                spatial_dim,
                cfg.step,
                values.row(i),
                coefficients.row(i),
                sensitivities.row_mut(i),
            )
        })
        .collect();
    Ok(StencilEvaluation {
        dim,
        spatial_dim,
        step: cfg.step,
        values,
        coefficients,
        operator_values,
        sensitivities,
    })
}

/// Evaluates `field` on the stencils of `points`, in bounded-memory chunks.
pub fn evaluate_stencil<T: Real, F: Field<T> + ?Sized>(
    field: &F,
    points: ArrayView2<'_, T>,
    step: T,
) -> Result<Array2<T>> {
    let (n, dim) = points.dim();
    if field.input_dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: field.input_dim(),
            found: dim,
        });
    }
    let per = stencil_size(dim);
    let mut values = Array2::zeros((n, per));
    let mut lo = 0;
    while lo < n {
        let hi = (lo + POINT_CHUNK).min(n);
        let rows = stencil_points(points.slice(s![lo..hi, ..]), step);
        let v = field.evaluate(rows.view())?;
        let v = v
            .into_shape_with_order((hi - lo, per))
            .expect("stencil rows are contiguous");
        values.slice_mut(s![lo..hi, ..]).assign(&v);
        lo = hi;
    }
    Ok(values)
}

/// `∇·(a∇u)` by the second-order central difference
/// `h⁻² Σᵢ [a(x+½heᵢ)(u(x+heᵢ)−u(x)) − a(x−½heᵢ)(u(x)−u(x−heᵢ))]`
/// over every coordinate of the points.
pub fn apply_elliptic_fd<T: Real, F: Field<T> + ?Sized>(
    field: &F,
    coefficient: Option<&Coefficient<T>>,
    points: ArrayView2<'_, T>,
    cfg: &OperatorConfig<T>,
) -> Result<StencilEvaluation<T>> {
    cfg.validate()?;
    let values = evaluate_stencil(field, points, cfg.step)?;
    reduce_stencil(
        StencilKernel::Divergence { coefficient },
        points.ncols(),
        points,
        values,
        cfg,
    )
}

/// Central-difference gradient, one row per point.
pub fn apply_gradient_fd<T: Real, F: Field<T> + ?Sized>(
    field: &F,
    points: ArrayView2<'_, T>,
    cfg: &OperatorConfig<T>,
) -> Result<Array2<T>> {
    cfg.validate()?;
    let values = evaluate_stencil(field, points, cfg.step)?;
    let dim = points.ncols();
    let two_h = cfg.step + cfg.step;
    Ok(Array2::from_shape_fn((points.nrows(), dim), |(i, k)| {
        (values[[i, 1 + 2 * k]] - values[[i, 2 + 2 * k]]) / two_h
    }))
}

/// Applies an interior operator with `spatial_dim` leading space coordinates.
pub fn apply_operator_kind<T: Real, F: Field<T> + ?Sized>(
    kind: &OperatorKind<T>,
    spatial_dim: usize,
    field: &F,
    points: ArrayView2<'_, T>,
    cfg: &OperatorConfig<T>,
) -> Result<StencilEvaluation<T>> {
    cfg.validate()?;
    let expected = spatial_dim + usize::from(kind.is_time_dependent());
    if points.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: points.ncols(),
        });
    }
    let values = evaluate_stencil(field, points, cfg.step)?;
    reduce_stencil(StencilKernel::Operator(kind), spatial_dim, points, values, cfg)
}

/// Applies the interior operator `D` of `problem`.
pub fn apply_operator<T: Real, F: Field<T> + ?Sized>(
    problem: &ProblemSpec<T>,
    field: &F,
    points: ArrayView2<'_, T>,
    cfg: &OperatorConfig<T>,
) -> Result<StencilEvaluation<T>> {
    apply_operator_kind(&problem.operator, problem.spatial_dim, field, points, cfg)
}

/// Rows at which a boundary operator evaluates the field, per point.
pub(crate) fn boundary_rows<T: Real>(
    op: BoundaryOperatorKind,
    point: ArrayView1<'_, T>,
    step: T,
) -> Vec<Array1<T>> {
    match op {
        BoundaryOperatorKind::DirichletTrace | BoundaryOperatorKind::InitialValue => {
            vec![point.to_owned()]
        }
        BoundaryOperatorKind::InitialVelocity => {
            let t = point.len() - 1;
            let mut plus = point.to_owned();
            let mut minus = point.to_owned();
            plus[t] += step;
            minus[t] -= step;
            vec![plus, minus]
        }
    }
}

/// Applies `op` to `field` at boundary points of `problem`.
pub fn apply_boundary_operator<T: Real, F: Field<T> + ?Sized>(
    problem: &ProblemSpec<T>,
    field: &F,
    op: BoundaryOperatorKind,
    points: ArrayView2<'_, T>,
    cfg: &OperatorConfig<T>,
) -> Result<Array1<T>> {
    cfg.validate()?;
    let component = op.component();
    if !problem.conditions(component).iter().any(|c| c.op == op) {
        return Err(Error::WrongBoundaryComponent {
            op: op.name(),
            context: format!("problem {}", problem.name),
        });
    }
    for (i, p) in points.outer_iter().enumerate() {
        if !problem.domain.on_component(p, component) {
            return Err(Error::WrongBoundaryComponent {
                op: op.name(),
                context: format!("point {i}"),
            });
        }
    }
    match op {
        BoundaryOperatorKind::DirichletTrace | BoundaryOperatorKind::InitialValue => {
            field.evaluate(points)
        }
        BoundaryOperatorKind::InitialVelocity => {
            let t = points.ncols() - 1;
            let mut plus = points.to_owned();
            let mut minus = points.to_owned();
            plus.column_mut(t).mapv_inplace(|v| v + cfg.step);
            minus.column_mut(t).mapv_inplace(|v| v - cfg.step);
            let up = field.evaluate(plus.view())?;
            let dn = field.evaluate(minus.view())?;
            let two_h = cfg.step + cfg.step;
            Ok((&up - &dn).mapv(|v| v / two_h))
        }
    }
}
