//! Reverse accumulation of parameter gradients through batched network
//! evaluations.
//!
//! Spatial derivatives never pass through here: every finite-difference
//! stencil point is an independent forward evaluation, and its upstream
//! sensitivity already carries the stencil coefficient.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{output_layer, DenseLayer, MlpNetwork, CHUNK_ROWS};
use crate::scalar::Real;

/// Derivative of a scalar loss with respect to every weight and bias of a
/// network, laid out like [`MlpNetwork::layers`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ParameterGradient<T> {
    pub layers: Vec<DenseLayer<T>>,
}

impl<T: Real> ParameterGradient<T> {
    pub fn zeros_like(net: &MlpNetwork<T>) -> Self {
        ParameterGradient {
            layers: net.layers.iter().map(DenseLayer::zeros_like).collect(),
        }
    }

    pub fn congruent_to(&self, net: &MlpNetwork<T>) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| g.same_shape(l))
    }

    pub fn add_assign(&mut self, other: &ParameterGradient<T>) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.biases += &b.biases;
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        ParameterGradient {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer {
                    weights: l.weights.mapv(|v| v * factor),
                    biases: l.biases.mapv(|v| v * factor),
                })
                .collect(),
        }
    }

    /// All entries, layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.biases.iter().copied());
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.flatten()
            .into_iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

/// Activations of one chunk of rows retained for the backward pass.
#[derive(Clone, Debug)]
struct CacheChunk<T> {
    input: Array2<T>,
    /// `zˡ = Wˡxˡ + bˡ` for `l < depth`.
    pre: Vec<Array2<T>>,
    /// `xˡ⁺¹ = σ(zˡ)` for `l < depth`.
    post: Vec<Array2<T>>,
}

/// Everything a forward pass produced that backprop needs.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    chunks: Vec<CacheChunk<T>>,
    rows: usize,
    depth: usize,
}

impl<T: Real> ForwardCache<T> {
    /// Number of affine layers covered, `depth + 1`.
    pub fn layer_count(&self) -> usize {
        self.depth + 1
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Recomputes the output layer from cached hidden activations.
    pub fn replay_output(&self, net: &MlpNetwork<T>) -> Array1<T> {
        let last = &net.layers[net.shape.depth];
        let parts = self
            .chunks
            .iter()
            .map(|c| output_layer(last, c.post[self.depth - 1].view()))
            .collect();
        crate::net::concat(parts, self.rows)
    }
}

fn forward_chunk_cached<T: Real>(net: &MlpNetwork<T>, points: ArrayView2<'_, T>) -> (Array1<T>, CacheChunk<T>) {
    let act = net.activation;
    let depth = net.shape.depth;
    let mut pre = Vec::with_capacity(depth);
    let mut post: Vec<Array2<T>> = Vec::with_capacity(depth);
    for (l, layer) in net.layers[..depth].iter().enumerate() {
        let z = if l == 0 {
            layer.affine(points)
        } else {
            layer.affine(post[l - 1].view())
        };
        post.push(z.mapv(|v| act.apply(v)));
        pre.push(z);
    }
    let out = output_layer(&net.layers[depth], post[depth - 1].view());
    (
        out,
        CacheChunk {
            input: points.to_owned(),
            pre,
            post,
        },
    )
}

/// Forward pass that keeps per-layer activations. `values` is bitwise equal
/// to [`MlpNetwork::forward`] on the same input.
pub fn forward_with_cache<T: Real>(
    net: &MlpNetwork<T>,
    points: ArrayView2<'_, T>,
) -> Result<(Array1<T>, ForwardCache<T>)> {
    net.check_points(&points)?;
    let n = points.nrows();
    let results: Vec<(Array1<T>, CacheChunk<T>)> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK_ROWS;
            let hi = (lo + CHUNK_ROWS).min(n);
            forward_chunk_cached(net, points.slice(s![lo..hi, ..]))
        })
        .collect();
    let (parts, chunks): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((
        crate::net::concat(parts, n),
        ForwardCache {
            chunks,
            rows: n,
            depth: net.shape.depth,
        },
    ))
}

fn backprop_chunk<T: Real>(
    net: &MlpNetwork<T>,
    chunk: &CacheChunk<T>,
    upstream: ArrayView1<'_, T>,
) -> ParameterGradient<T> {
    let depth = net.shape.depth;
    let act = net.activation;
    let mut grads: Vec<DenseLayer<T>> = Vec::with_capacity(depth + 1);

    // Output layer.
    let hidden = &chunk.post[depth - 1];
    let last = &net.layers[depth];
    let w_out = upstream.dot(hidden).insert_axis(Axis(0));
    let b_out = Array1::from_elem(1, upstream.sum());
    grads.push(DenseLayer {
        weights: w_out,
        biases: b_out,
    });

    // δ for the last hidden pre-activation.
    let mut delta = upstream
        .insert_axis(Axis(1))
        .dot(&last.weights.view());
    delta.zip_mut_with(&chunk.pre[depth - 1], |d, &z| *d *= act.derivative(z));

    for l in (0..depth).rev() {
        let input = if l == 0 {
            chunk.input.view()
        } else {
            chunk.post[l - 1].view()
        };
        let gw = delta.t().dot(&input);
        let gb = delta.sum_axis(Axis(0));
        grads.push(DenseLayer {
            weights: gw,
            biases: gb,
        });
        if l > 0 {
            let mut next = delta.dot(&net.layers[l].weights);
            next.zip_mut_with(&chunk.pre[l - 1], |d, &z| *d *= act.derivative(z));
            delta = next;
        }
    }
    grads.reverse();
    ParameterGradient { layers: grads }
}

fn reduce_in_order<T: Real>(net: &MlpNetwork<T>, parts: Vec<ParameterGradient<T>>) -> ParameterGradient<T> {
    let mut total = ParameterGradient::zeros_like(net);
    for p in &parts {
        total.add_assign(p);
    }
    total
}

/// Gradient of `Σᵢ upstream[i]·net(xᵢ)` with respect to the parameters.
pub fn backprop_params<T: Real>(
    net: &MlpNetwork<T>,
    cache: &ForwardCache<T>,
    upstream: ArrayView1<'_, T>,
) -> Result<ParameterGradient<T>> {
    if upstream.len() != cache.rows {
        return Err(Error::DimensionMismatch {
            expected: cache.rows,
            found: upstream.len(),
        });
    }
    if cache.depth != net.shape.depth
        || cache
            .chunks
            .first()
            .is_some_and(|c| c.input.ncols() != net.shape.input_dim || c.pre[0].ncols() != net.shape.width)
    {
        return Err(Error::ShapeMismatch);
    }
    let offsets: Vec<usize> = cache
        .chunks
        .iter()
        .scan(0, |acc, c| {
            let start = *acc;
            *acc += c.input.nrows();
            Some(start)
        })
        .collect();
    let parts: Vec<ParameterGradient<T>> = cache
        .chunks
        .par_iter()
        .zip(offsets.par_iter())
        .map(|(chunk, &lo)| {
            let hi = lo + chunk.input.nrows();
            backprop_chunk(net, chunk, upstream.slice(s![lo..hi]))
        })
        .collect();
    Ok(reduce_in_order(net, parts))
}

/// Fused forward-and-backward pass, chunk by chunk, without retaining a cache.
pub fn accumulate_gradient<T: Real>(
    net: &MlpNetwork<T>,
    points: ArrayView2<'_, T>,
    upstream: ArrayView1<'_, T>,
) -> Result<ParameterGradient<T>> {
    net.check_points(&points)?;
    let n = points.nrows();
    if upstream.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: upstream.len(),
        });
    }
    let parts: Vec<ParameterGradient<T>> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK_ROWS;
            let hi = (lo + CHUNK_ROWS).min(n);
            let (_, chunk) = forward_chunk_cached(net, points.slice(s![lo..hi, ..]));
            backprop_chunk(net, &chunk, upstream.slice(s![lo..hi]))
        })
        .collect();
    Ok(reduce_in_order(net, parts))
}
