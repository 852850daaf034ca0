//! Feedforward networks, the bounded selection wrapper and the
//! boundary-conforming solution ansatz.
//!
//! A network of depth `L` and width `m` is the recursion
//!
//! ```text
//! x⁰ = x
//! xˡ⁺¹ = σ(Wˡ xˡ + bˡ),   l = 0 .. L-1
//! φ(x) = Wᴸ xᴸ + bᴸ
//! ```
//!
//! so it owns `L + 1` affine layers. Batches are row-major matrices with one
//! point per row.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rows per unit of parallel work. Fixed so that results never depend on the
/// number of worker threads.
pub(crate) const CHUNK_ROWS: usize = 512;

/// Pointwise nonlinearity applied after every hidden affine map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationKind {
    Sine,
    Relu,
    /// `x ↦ max(x³, 0)`.
    CubicRelu,
    Sigmoid,
    Tanh,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [
        ActivationKind::Sine,
        ActivationKind::Relu,
        ActivationKind::CubicRelu,
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
    ];

    #[inline]
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            ActivationKind::Sine => x.sin(),
            ActivationKind::Relu => x.max(T::zero()),
            ActivationKind::CubicRelu => {
                if x > T::zero() {
                    x * x * x
                } else {
                    T::zero()
                }
            }
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => x.tanh(),
        }
    }

    /// Exact first derivative. Kinks (relu at 0) take the value 0.
    #[inline]
    pub fn derivative<T: Real>(self, x: T) -> T {
        match self {
            ActivationKind::Sine => x.cos(),
            ActivationKind::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            ActivationKind::CubicRelu => {
                if x > T::zero() {
                    T::lit(3.0) * x * x
                } else {
                    T::zero()
                }
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (T::one() - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                T::one() - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sine => "sine",
            ActivationKind::Relu => "relu",
            ActivationKind::CubicRelu => "cubic-relu",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActivationKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown activation `{s}`")))
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Layer sizes of a scalar-output network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub input_dim: usize,
    pub width: usize,
    pub depth: usize,
    pub output_dim: usize,
}

impl NetworkShape {
    pub fn new(input_dim: usize, width: usize, depth: usize) -> Result<Self> {
        let shape = NetworkShape {
            input_dim,
            width,
            depth,
            output_dim: 1,
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidShape("input dimension is zero".into()));
        }
        if self.width == 0 {
            return Err(Error::InvalidShape("width is zero".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidShape("depth is zero".into()));
        }
        if self.output_dim != 1 {
            return Err(Error::InvalidShape(format!(
                "output dimension must be 1, got {}",
                self.output_dim
            )));
        }
        Ok(())
    }

    /// `(rows, cols)` of every weight matrix, input layer first.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        (0..=self.depth)
            .map(|l| {
                let rows = if l == self.depth {
                    self.output_dim
                } else {
                    self.width
                };
                let cols = if l == 0 { self.input_dim } else { self.width };
                (rows, cols)
            })
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_dims().iter().map(|(r, c)| r * c + r).sum()
    }
}

/// One affine map `z = W x + b`, `W` stored as `out × in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DenseLayer<T> {
    pub weights: Array2<T>,
    pub biases: Array1<T>,
}

impl<T: Real> DenseLayer<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseLayer {
            weights: Array2::zeros((rows, cols)),
            biases: Array1::zeros(rows),
        }
    }

    pub fn zeros_like(&self) -> Self {
        DenseLayer::zeros(self.weights.nrows(), self.weights.ncols())
    }

    pub fn same_shape(&self, other: &DenseLayer<T>) -> bool {
        self.weights.dim() == other.weights.dim() && self.biases.len() == other.biases.len()
    }

    /// `points · Wᵀ + b` for a row-major batch.
    pub(crate) fn affine(&self, points: ArrayView2<'_, T>) -> Array2<T> {
        let mut z = points.dot(&self.weights.t());
        z += &self.biases;
        z
    }
}

/// Fully connected network with scalar output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MlpNetwork<T> {
    pub shape: NetworkShape,
    pub activation: ActivationKind,
    pub layers: Vec<DenseLayer<T>>,
}

/// Glorot-normal weights, zero biases. Identical seeds give identical networks.
pub fn init_network<T: Real>(
    shape: NetworkShape,
    activation: ActivationKind,
    seed: u64,
) -> Result<MlpNetwork<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MlpNetwork::init_with_rng(shape, activation, &mut rng)
}

impl<T: Real> MlpNetwork<T> {
    pub fn init_with_rng<R: Rng + ?Sized>(
        shape: NetworkShape,
        activation: ActivationKind,
        rng: &mut R,
    ) -> Result<Self> {
        shape.validate()?;
        let layers = shape
            .layer_dims()
            .into_iter()
            .map(|(rows, cols)| {
                let std = (2.0 / (rows + cols) as f64).sqrt();
                let normal = Normal::new(0.0, std).expect("finite positive deviation");
                let weights =
                    Array2::from_shape_simple_fn((rows, cols), || T::lit(normal.sample(rng)));
                DenseLayer {
                    weights,
                    biases: Array1::zeros(rows),
                }
            })
            .collect();
        Ok(MlpNetwork {
            shape,
            activation,
            layers,
        })
    }

    /// A network whose every parameter is zero except the output bias.
    pub fn constant(shape: NetworkShape, activation: ActivationKind, value: T) -> Result<Self> {
        shape.validate()?;
        let mut layers: Vec<DenseLayer<T>> = shape
            .layer_dims()
            .into_iter()
            .map(|(r, c)| DenseLayer::zeros(r, c))
            .collect();
        layers[shape.depth].biases[0] = value;
        Ok(MlpNetwork {
            shape,
            activation,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.shape.input_dim
    }

    pub fn depth(&self) -> usize {
        self.shape.depth
    }

    /// Checks that stored parameters agree with the declared shape.
    pub fn audit(&self) -> Result<()> {
        self.shape.validate()?;
        let dims = self.shape.layer_dims();
        if dims.len() != self.layers.len() {
            return Err(Error::ShapeMismatch);
        }
        for (layer, (rows, cols)) in self.layers.iter().zip(dims) {
            if layer.weights.dim() != (rows, cols) || layer.biases.len() != rows {
                return Err(Error::ShapeMismatch);
            }
        }
        Ok(())
    }

    pub(crate) fn check_points(&self, points: &ArrayView2<'_, T>) -> Result<()> {
        if points.ncols() != self.shape.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.shape.input_dim,
                found: points.ncols(),
            });
        }
        Ok(())
    }

    /// Evaluates one chunk, keeping nothing.
    pub(crate) fn forward_chunk(&self, points: ArrayView2<'_, T>) -> Array1<T> {
        let act = self.activation;
        let mut x: Option<Array2<T>> = None;
        for layer in &self.layers[..self.shape.depth] {
            let mut z = match &x {
                None => layer.affine(points),
                Some(prev) => layer.affine(prev.view()),
            };
            z.mapv_inplace(|v| act.apply(v));
            x = Some(z);
        }
        let last = &self.layers[self.shape.depth];
        let hidden = x.expect("depth >= 1");
        output_layer(last, hidden.view())
    }

    /// Batched evaluation; one output per row of `points`.
    pub fn forward(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        self.check_points(&points)?;
        let n = points.nrows();
        let parts: Vec<Array1<T>> = (0..n.div_ceil(CHUNK_ROWS))
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK_ROWS;
                let hi = (lo + CHUNK_ROWS).min(n);
                self.forward_chunk(points.slice(s![lo..hi, ..]))
            })
            .collect();
        Ok(concat(parts, n))
    }

    /// Single-point convenience wrapper around [`MlpNetwork::forward`].
    pub fn eval_point(&self, point: &[T]) -> Result<T> {
        let view = ArrayView2::from_shape((1, point.len()), point)
            .map_err(|e| Error::InvalidShape(e.to_string()))?;
        Ok(self.forward(view)?[0])
    }
}

/// `Wᴸ xᴸ + bᴸ` for a scalar output layer.
pub(crate) fn output_layer<T: Real>(last: &DenseLayer<T>, hidden: ArrayView2<'_, T>) -> Array1<T> {
    let w = last.weights.row(0);
    let mut out = hidden.dot(&w);
    out += last.biases[0];
    out
}

pub(crate) fn concat<T: Real>(parts: Vec<Array1<T>>, n: usize) -> Array1<T> {
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p.iter().copied());
    }
    Array1::from(out)
}

/// Network whose output is squashed into the open interval `(lower, upper)`:
/// `(upper − lower)·sigmoid(core(x)) + lower`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SelectionNetwork<T> {
    pub core: MlpNetwork<T>,
    pub lower: T,
    pub upper: T,
}

impl<T: Real> SelectionNetwork<T> {
    pub fn new(core: MlpNetwork<T>, lower: T, upper: T) -> Result<Self> {
        if !(upper > T::one() && T::one() > lower && lower >= T::zero()) {
            return Err(Error::InvalidBounds {
                lower: lower.as_f64(),
                upper: upper.as_f64(),
            });
        }
        Ok(SelectionNetwork { core, lower, upper })
    }

    /// Core output at which the weight is 1.
    pub fn unit_logit(&self) -> T {
        let s = (T::one() - self.lower) / (self.upper - self.lower);
        (s / (T::one() - s)).ln()
    }

    /// Shifts the output bias so that a core whose pre-bias output is zero
    /// gives weight 1.
    pub fn center_at_unit(&mut self) {
        let z = self.unit_logit();
        let depth = self.core.shape.depth;
        self.core.layers[depth].biases[0] = z;
    }

    /// Maps a core output to the bounded weight.
    #[inline]
    pub fn squash(&self, z: T) -> T {
        let v = (self.upper - self.lower) * sigmoid(z) + self.lower;
        // Saturated sigmoids round onto the bounds; keep the interval open.
        let hi = self.upper - self.upper * T::epsilon();
        let lo = self.lower + (self.lower * T::epsilon()).max(T::min_positive_value());
        v.max(lo).min(hi)
    }

    /// `d squash / dz` at a core output.
    #[inline]
    pub fn squash_derivative(&self, z: T) -> T {
        let s = sigmoid(z);
        (self.upper - self.lower) * s * (T::one() - s)
    }

    /// Returns `(weights, core outputs)`.
    pub fn forward_with_core(&self, points: ArrayView2<'_, T>) -> Result<(Array1<T>, Array1<T>)> {
        let core = self.core.forward(points)?;
        let weights = core.mapv(|z| self.squash(z));
        Ok((weights, core))
    }

    pub fn forward(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        Ok(self.forward_with_core(points)?.0)
    }
}

/// Multiplicative factor that vanishes on the boundary of a reference domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mask {
    None,
    /// `|x|² − 1` over the first `dims` coordinates.
    Ball { dims: usize },
    /// `∏ (xᵢ² − 1)` over the first `dims` coordinates.
    Cube { dims: usize },
}

impl Mask {
    #[inline]
    pub fn value<T: Real>(&self, point: ArrayView1<'_, T>) -> T {
        match *self {
            Mask::None => T::one(),
            Mask::Ball { dims } => {
                point.iter().take(dims).fold(T::zero(), |acc, &x| acc + x * x) - T::one()
            }
            Mask::Cube { dims } => point
                .iter()
                .take(dims)
                .fold(T::one(), |acc, &x| acc * (x * x - T::one())),
        }
    }

    pub fn values<T: Real>(&self, points: ArrayView2<'_, T>) -> Array1<T> {
        match self {
            Mask::None => Array1::ones(points.nrows()),
            _ => points.outer_iter().map(|p| self.value(p)).collect(),
        }
    }

    fn max_dims(&self) -> usize {
        match *self {
            Mask::None => 0,
            Mask::Ball { dims } | Mask::Cube { dims } => dims,
        }
    }
}

/// Solution network `u(x) = h(x)·û(x)` where `h` is the [`Mask`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolutionAnsatz<T> {
    pub core: MlpNetwork<T>,
    pub mask: Mask,
}

impl<T: Real> SolutionAnsatz<T> {
    pub fn new(core: MlpNetwork<T>, mask: Mask) -> Result<Self> {
        if mask.max_dims() > core.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: core.input_dim(),
                found: mask.max_dims(),
            });
        }
        Ok(SolutionAnsatz { core, mask })
    }

    pub fn unmasked(core: MlpNetwork<T>) -> Self {
        SolutionAnsatz {
            core,
            mask: Mask::None,
        }
    }

    pub fn forward(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        let mut out = self.core.forward(points)?;
        if self.mask != Mask::None {
            out.zip_mut_with(&self.mask.values(points), |u, &m| *u = m * *u);
        }
        Ok(out)
    }
}

/// Anything evaluable on a batch of points: networks, ansatzes, and exact
/// functions standing in for them in operator tests.
pub trait Field<T: Real>: Sync {
    fn input_dim(&self) -> usize;
    fn evaluate(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>>;
}

impl<T: Real> Field<T> for MlpNetwork<T> {
    fn input_dim(&self) -> usize {
        self.shape.input_dim
    }
    fn evaluate(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        self.forward(points)
    }
}

impl<T: Real> Field<T> for SolutionAnsatz<T> {
    fn input_dim(&self) -> usize {
        self.core.input_dim()
    }
    fn evaluate(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        self.forward(points)
    }
}

impl<T: Real> Field<T> for SelectionNetwork<T> {
    fn input_dim(&self) -> usize {
        self.core.input_dim()
    }
    fn evaluate(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        self.forward(points)
    }
}

/// A closed-form function used as an exact stand-in for a network.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<T: Real, F: Fn(&[T]) -> T + Sync> Field<T> for FnField<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn evaluate(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        if points.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: points.ncols(),
            });
        }
        Ok(points
            .axis_iter(Axis(0))
            .map(|row| match row.as_slice() {
                Some(slice) => (self.f)(slice),
                None => (self.f)(&row.to_vec()),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::PI;

    fn shape(d: usize, m: usize, l: usize) -> NetworkShape {
        NetworkShape::new(d, m, l).unwrap()
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(NetworkShape::new(3, 0, 2).is_err());
        assert!(NetworkShape::new(3, 4, 0).is_err());
        assert!(NetworkShape::new(0, 4, 2).is_err());
    }

    #[test]
    fn layer_dims_follow_recursion() {
        let s = shape(5, 7, 3);
        assert_eq!(s.layer_dims(), vec![(7, 5), (7, 7), (7, 7), (1, 7)]);
        let net: MlpNetwork<f64> = init_network(s, ActivationKind::Tanh, 1).unwrap();
        net.audit().unwrap();
        assert!(net.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        assert_eq!(s.parameter_count(), 7 * 5 + 7 + 2 * (49 + 7) + 7 + 1);
    }

    #[test]
    fn zero_network_returns_zero() {
        let net = MlpNetwork::<f64>::constant(shape(4, 6, 2), ActivationKind::Sine, 0.0).unwrap();
        let pts = Array2::from_elem((3, 4), 0.7);
        assert!(net.forward(pts.view()).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_network() {
        let a: MlpNetwork<f64> = init_network(shape(3, 8, 3), ActivationKind::Relu, 42).unwrap();
        let b: MlpNetwork<f64> = init_network(shape(3, 8, 3), ActivationKind::Relu, 42).unwrap();
        let c: MlpNetwork<f64> = init_network(shape(3, 8, 3), ActivationKind::Relu, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn first_layer_variance_matches_glorot() {
        // 100 x 100 input layer gives 10^4 draws.
        let d = 100;
        let m = 100;
        let net: MlpNetwork<f64> = init_network(shape(d, m, 1), ActivationKind::Sine, 7).unwrap();
        let w = &net.layers[0].weights;
        let n = w.len() as f64;
        let mean = w.sum() / n;
        let var = w.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expected = 2.0 / (d + m) as f64;
        assert!((var / expected - 1.0).abs() < 0.1, "var {var} vs {expected}");
    }

    #[test]
    fn one_neuron_sine() {
        let mut net = MlpNetwork::<f64>::constant(shape(3, 1, 1), ActivationKind::Sine, 0.0).unwrap();
        net.layers[0].weights[[0, 0]] = 1.0;
        net.layers[1].weights[[0, 0]] = 1.0;
        let out = net.eval_point(&[PI / 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, 1.0);
    }

    #[test]
    fn batch_of_copies_is_constant() {
        let net: MlpNetwork<f64> = init_network(shape(3, 16, 3), ActivationKind::CubicRelu, 3).unwrap();
        let pts = Array2::from_shape_fn((1200, 3), |(_, j)| 0.1 * (j as f64 + 1.0));
        let out = net.forward(pts.view()).unwrap();
        assert!(out.iter().all(|&v| v == out[0]));
        let single = net.eval_point(&[0.1, 0.2, 0.30000000000000004]).unwrap();
        assert_eq!(single, out[0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let net: MlpNetwork<f64> = init_network(shape(3, 4, 1), ActivationKind::Tanh, 0).unwrap();
        let pts = Array2::zeros((2, 4));
        assert_eq!(
            net.forward(pts.view()),
            Err(Error::DimensionMismatch { expected: 3, found: 4 })
        );
    }

    #[test]
    fn activation_derivatives_match_difference_quotients() {
        for act in ActivationKind::ALL {
            for &x in &[-1.3_f64, -0.2, 0.4, 1.7] {
                let h = 1e-6;
                let fd = (act.apply(x + h) - act.apply(x - h)) / (2.0 * h);
                assert!((fd - act.derivative(x)).abs() < 1e-7, "{act} at {x}");
            }
            assert!(act.derivative(0.0_f64).is_finite());
        }
        assert_eq!(ActivationKind::CubicRelu.derivative(0.0_f64), 0.0);
        assert_eq!("cubic-relu".parse::<ActivationKind>().unwrap(), ActivationKind::CubicRelu);
    }

    fn fixed_core(value: f64, dim: usize) -> MlpNetwork<f64> {
        MlpNetwork::constant(shape(dim, 3, 1), ActivationKind::Relu, value).unwrap()
    }

    #[test]
    fn selection_midpoint_and_saturation() {
        let sel = SelectionNetwork::new(fixed_core(0.0, 2), 0.8, 5.0).unwrap();
        let out = sel.forward(array![[0.3, -0.1]].view()).unwrap();
        assert!((out[0] - 2.9).abs() < 1e-15);

        let sat = SelectionNetwork::new(fixed_core(1e3, 2), 0.8, 5.0).unwrap();
        let v = sat.forward(array![[0.0, 0.0]].view()).unwrap()[0];
        assert!(v < 5.0 && 5.0 - v < 1e-6);

        let low = SelectionNetwork::new(fixed_core(-1e3, 2), 0.8, 5.0).unwrap();
        let v = low.forward(array![[0.0, 0.0]].view()).unwrap()[0];
        assert!(v > 0.8 && v - 0.8 < 1e-6);
    }

    #[test]
    fn selection_bounds_validated() {
        assert!(SelectionNetwork::new(fixed_core(0.0, 1), 1.0, 5.0).is_err());
        assert!(SelectionNetwork::new(fixed_core(0.0, 1), 0.5, 1.0).is_err());
        assert!(SelectionNetwork::new(fixed_core(0.0, 1), -0.1, 2.0).is_err());
        assert!(SelectionNetwork::new(fixed_core(0.0, 1), 0.0, 2.0).is_ok());
    }

    #[test]
    fn ansatz_masks() {
        let one = fixed_core(1.0, 2);
        let ball = SolutionAnsatz::new(one.clone(), Mask::Ball { dims: 2 }).unwrap();
        let cube = SolutionAnsatz::new(one.clone(), Mask::Cube { dims: 2 }).unwrap();
        let none = SolutionAnsatz::unmasked(one.clone());
        let pts = array![[0.0, 0.0], [0.6, 0.8], [0.5, 0.5], [1.0, 0.3]];
        let b = ball.forward(pts.view()).unwrap();
        assert_eq!(b[0], -1.0);
        assert!(b[1].abs() < 1e-15);
        let c = cube.forward(pts.view()).unwrap();
        assert_eq!(c[2], 0.5625);
        assert_eq!(c[3], 0.0);
        assert_eq!(none.forward(pts.view()).unwrap(), one.forward(pts.view()).unwrap());
        assert!(SolutionAnsatz::new(one, Mask::Ball { dims: 3 }).is_err());
    }

    #[test]
    fn f32_networks_evaluate() {
        let net: MlpNetwork<f32> = init_network(shape(2, 8, 2), ActivationKind::Tanh, 5).unwrap();
        let pts = Array2::<f32>::from_elem((4, 2), 0.25);
        assert!(net.forward(pts.view()).unwrap().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn centered_selection_is_unit_for_a_zero_core() {
        let core = MlpNetwork::constant(shape(3, 4, 2), ActivationKind::Relu, 0.0).unwrap();
        let mut sel = SelectionNetwork::new(core, 0.8, 5.0).unwrap();
        sel.center_at_unit();
        let w = sel.forward(Array2::<f64>::zeros((2, 3)).view()).unwrap();
        assert!(w.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }
}
