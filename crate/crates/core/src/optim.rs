//! AdaGrad (and Adam) parameter updates and the staircase learning-rate
//! schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::ParameterGradient;
use crate::net::MlpNetwork;
use crate::scalar::Real;

/// Damping added to the root accumulator.
pub const DAMPING: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Descend,
    Ascend,
}

impl Direction {
    fn sign<T: Real>(self) -> T {
        match self {
            Direction::Descend => -T::one(),
            Direction::Ascend => T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adagrad,
    Adam,
}

fn check<T: Real>(net: &MlpNetwork<T>, grad: &ParameterGradient<T>, state: &ParameterGradient<T>) -> Result<()> {
    if grad.congruent_to(net) && state.congruent_to(net) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch)
    }
}

/// Per-network AdaGrad state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AdaGradState<T> {
    pub accumulator: ParameterGradient<T>,
    pub damping: T,
}

impl<T: Real> AdaGradState<T> {
    pub fn new(net: &MlpNetwork<T>) -> Self {
        Self {
            accumulator: ParameterGradient::zeros_like(net),
            damping: T::lit(DAMPING),
        }
    }

    /// `acc += g²`, `θ ∓= rate·g/(√acc + δ)`.
    pub fn step(
        &mut self,
        net: &mut MlpNetwork<T>,
        grad: &ParameterGradient<T>,
        rate: T,
        direction: Direction,
    ) -> Result<()> {
        check(net, grad, &self.accumulator)?;
        let scale = direction.sign::<T>() * rate;
        let damping = self.damping;
        for ((layer, g), acc) in net
            .layers
            .iter_mut()
            .zip(&grad.layers)
            .zip(&mut self.accumulator.layers)
        {
            ndarray::Zip::from(&mut layer.weights)
                .and(&g.weights)
                .and(&mut acc.weights)
                .for_each(|p, &g, a| {
                    *a += g * g;
                    *p += scale * g / (a.sqrt() + damping);
                });
            ndarray::Zip::from(&mut layer.biases)
                .and(&g.biases)
                .and(&mut acc.biases)
                .for_each(|p, &g, a| {
                    *a += g * g;
                    *p += scale * g / (a.sqrt() + damping);
                });
        }
        Ok(())
    }
}

/// Free-function form of [`AdaGradState::step`].
pub fn adagrad_step<T: Real>(
    net: &mut MlpNetwork<T>,
    grad: &ParameterGradient<T>,
    state: &mut AdaGradState<T>,
    rate: T,
    direction: Direction,
) -> Result<()> {
    state.step(net, grad, rate, direction)
}

/// Adam with bias correction, `β₁ = 0.9`, `β₂ = 0.999`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AdamState<T> {
    pub first: ParameterGradient<T>,
    pub second: ParameterGradient<T>,
    pub steps: i32,
    pub beta1: T,
    pub beta2: T,
    pub damping: T,
}

impl<T: Real> AdamState<T> {
    pub fn new(net: &MlpNetwork<T>) -> Self {
        Self {
            first: ParameterGradient::zeros_like(net),
            second: ParameterGradient::zeros_like(net),
            steps: 0,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            damping: T::lit(DAMPING),
        }
    }

    pub fn step(
        &mut self,
        net: &mut MlpNetwork<T>,
        grad: &ParameterGradient<T>,
        rate: T,
        direction: Direction,
    ) -> Result<()> {
        check(net, grad, &self.first)?;
        self.steps += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.damping);
        let c1 = T::one() - b1.powi(self.steps);
        let c2 = T::one() - b2.powi(self.steps);
        let scale = direction.sign::<T>() * rate;
        let update = |p: &mut T, g: T, m: &mut T, v: &mut T| {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            *p += scale * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (((layer, g), m), v) in net
            .layers
            .iter_mut()
            .zip(&grad.layers)
            .zip(&mut self.first.layers)
            .zip(&mut self.second.layers)
        {
            ndarray::Zip::from(&mut layer.weights)
                .and(&g.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .for_each(|p, &g, m, v| update(p, g, m, v));
            ndarray::Zip::from(&mut layer.biases)
                .and(&g.biases)
                .and(&mut m.biases)
                .and(&mut v.biases)
                .for_each(|p, &g, m, v| update(p, g, m, v));
        }
        Ok(())
    }
}

/// Optimizer state for one network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum Optimizer<T> {
    Adagrad(AdaGradState<T>),
    Adam(AdamState<T>),
}

impl<T: Real> Optimizer<T> {
    pub fn new(kind: OptimizerKind, net: &MlpNetwork<T>) -> Self {
        match kind {
            OptimizerKind::Adagrad => Optimizer::Adagrad(AdaGradState::new(net)),
            OptimizerKind::Adam => Optimizer::Adam(AdamState::new(net)),
        }
    }

    pub fn step(
        &mut self,
        net: &mut MlpNetwork<T>,
        grad: &ParameterGradient<T>,
        rate: T,
        direction: Direction,
    ) -> Result<()> {
        match self {
            Optimizer::Adagrad(s) => s.step(net, grad, rate, direction),
            Optimizer::Adam(s) => s.step(net, grad, rate, direction),
        }
    }
}

/// Staircase schedule `τ⁽ᵏ⁾ = 10^(base + (final − base)·j/segments)` where
/// segment `j` holds iterations `j·n/segments < k ≤ (j+1)·n/segments`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub total: usize,
    pub segments: usize,
    pub base_exponent: i32,
    pub final_exponent: i32,
    /// Constant rate of the selection networks.
    pub selection_rate: f64,
    /// Run the staircase over this many iterations only, then hold
    /// `10^final_exponent`.
    pub floor_after: Option<usize>,
}

impl ScheduleSpec {
    pub fn new(total: usize) -> Self {
        Self {
            total,
            segments: 1000,
            base_exponent: -3,
            final_exponent: -6,
            selection_rate: 1e-4,
            floor_after: None,
        }
    }

    pub fn with_floor_after(mut self, iterations: usize) -> Self {
        self.floor_after = Some(iterations);
        self
    }
}

/// Solution-network learning rate at iteration `k` (1-based).
pub fn lr_schedule(k: usize, spec: &ScheduleSpec) -> Result<f64> {
    if k == 0 || k > spec.total {
        return Err(Error::ScheduleOutOfRange { k, n: spec.total });
    }
    if spec.segments == 0 {
        return Err(Error::InvalidConfig("schedule needs at least one segment".into()));
    }
    let span = match spec.floor_after {
        Some(0) => return Ok(10f64.powi(spec.final_exponent)),
        Some(m) if k > m => return Ok(10f64.powi(spec.final_exponent)),
        Some(m) => m,
        None => spec.total,
    };
    let j = (k * spec.segments - 1) / span;
    if j == 0 {
        return Ok(10f64.powi(spec.base_exponent));
    }
    let drop = f64::from(spec.final_exponent - spec.base_exponent) * j as f64 / spec.segments as f64;
    Ok(10f64.powf(f64::from(spec.base_exponent) + drop))
}
