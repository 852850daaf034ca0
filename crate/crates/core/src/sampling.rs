//! Monte-Carlo collocation points.
//!
//! Every sampler draws in `f64` and converts; points that round onto the
//! boundary of their target set are rejected and redrawn.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{BoundaryComponent, DomainKind, ProblemSpec};
use crate::scalar::Real;

/// Generator behind every [`RngStream`].
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seeded from u64, one stream id per purpose";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamPurpose {
    Init,
    Interior,
    Boundary,
    Test,
}

impl StreamPurpose {
    pub const ALL: [StreamPurpose; 4] = [
        StreamPurpose::Init,
        StreamPurpose::Interior,
        StreamPurpose::Boundary,
        StreamPurpose::Test,
    ];

    fn stream_id(self) -> u64 {
        match self {
            StreamPurpose::Init => 0,
            StreamPurpose::Interior => 1,
            StreamPurpose::Boundary => 2,
            StreamPurpose::Test => 3,
        }
    }
}

/// A seeded ChaCha8 stream. Streams with the same seed and different
/// purposes use disjoint ChaCha stream ids, so they never overlap.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    purpose: StreamPurpose,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, purpose: StreamPurpose) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(purpose.stream_id());
        Self { seed, purpose, rng }
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn purpose(&self) -> StreamPurpose {
        self.purpose
    }

    /// Position in the stream, in 32-bit words.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingStrategy {
    Uniform,
    Annular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub annuli: usize,
    pub interior_count: usize,
    pub boundary_count: usize,
    pub strategy: SamplingStrategy,
    /// Drop the `∂Ω` component (boundary-conforming ansatz); evolution
    /// problems then spend the whole boundary budget on `t = 0`.
    pub skip_spatial_boundary: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            annuli: 10,
            interior_count: 10_000,
            boundary_count: 10_000,
            strategy: SamplingStrategy::Annular,
            skip_spatial_boundary: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.interior_count == 0 {
            return Err(Error::InvalidConfig("interior sample count must be positive".into()));
        }
        if self.annuli == 0 {
            return Err(Error::InvalidConfig("annulus count must be positive".into()));
        }
        if self.strategy == SamplingStrategy::Annular && self.interior_count % self.annuli != 0 {
            return Err(Error::InvalidConfig(format!(
                "annular sampling needs N1={} divisible by N_a={}",
                self.interior_count, self.annuli
            )));
        }
        Ok(())
    }
}

/// Interior and boundary collocation points for one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch<T> {
    pub interior: Array2<T>,
    pub boundary: Array2<T>,
    /// Component of each boundary row.
    pub tags: Vec<BoundaryComponent>,
}

impl<T: Real> SampleBatch<T> {
    /// Row indices of the boundary points on `component`.
    pub fn component_indices(&self, component: BoundaryComponent) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == component)
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks the membership invariants against `domain`.
    pub fn validate(&self, domain: &DomainKind) -> Result<()> {
        if let Some(index) = self.interior.outer_iter().position(|p| !domain.contains(p)) {
            return Err(Error::OutsideDomain { index });
        }
        if self.tags.len() != self.boundary.nrows() {
            return Err(Error::InvalidShape("one tag per boundary point".into()));
        }
        for (index, (p, &tag)) in self.boundary.outer_iter().zip(&self.tags).enumerate() {
            if !domain.on_component(p, tag) {
                return Err(Error::OutsideDomain { index });
            }
        }
        Ok(())
    }
}

/// Uniform draw from the open interval `(0, 1)`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn gaussian_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn norm<T: Real>(x: ArrayView1<'_, T>) -> T {
    x.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

fn lift<T: Real>(v: &[f64]) -> Array1<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

/// One point uniform in `{r_in < |x| < r_out}`, strictly inside the unit ball.
fn annulus_point<T: Real, R: Rng + ?Sized>(dim: usize, r_in: f64, r_out: f64, rng: &mut R) -> Array1<T> {
    let d = dim as f64;
    let (lo, hi) = (r_in.powf(d), r_out.powf(d));
    loop {
        let u = open_unit(rng);
        let r = (lo + u * (hi - lo)).powf(1.0 / d);
        let dir = gaussian_direction(dim, rng);
        let p: Vec<f64> = dir.iter().map(|x| x * r).collect();
        let p = lift::<T>(&p);
        let rr = norm(p.view()).as_f64();
        if rr > r_in && rr < r_out && rr < 1.0 {
            return p;
        }
    }
}

/// `N/N_a` points uniform in each annulus `k/N_a < |x| < (k+1)/N_a`,
/// annulus by annulus.
pub fn sample_ball_annular<T: Real, R: Rng + ?Sized>(
    dim: usize,
    count: usize,
    annuli: usize,
    rng: &mut R,
) -> Result<Array2<T>> {
    if annuli == 0 || count % annuli != 0 {
        return Err(Error::InvalidConfig(format!(
            "annular sampling needs N={count} divisible by N_a={annuli}"
        )));
    }
    let per = count / annuli;
    let mut out = Array2::zeros((count, dim));
    for k in 0..annuli {
        let r_in = k as f64 / annuli as f64;
        let r_out = (k + 1) as f64 / annuli as f64;
        for i in 0..per {
            out.row_mut(k * per + i).assign(&annulus_point::<T, R>(dim, r_in, r_out, rng));
        }
    }
    Ok(out)
}

/// Points uniform in the open unit ball.
pub fn sample_ball_uniform<T: Real, R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Array2<T> {
    let mut out = Array2::zeros((count, dim));
    for mut row in out.outer_iter_mut() {
        row.assign(&annulus_point::<T, R>(dim, 0.0, 1.0, rng));
    }
    out
}

/// Points uniform on the unit sphere.
pub fn sample_sphere<T: Real, R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Array2<T> {
    let mut out = Array2::zeros((count, dim));
    for mut row in out.outer_iter_mut() {
        row.assign(&lift::<T>(&gaussian_direction(dim, rng)));
    }
    out
}

fn open_symmetric<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    loop {
        let v = T::lit(2.0 * open_unit(rng) - 1.0);
        if v.abs() < T::one() {
            return v;
        }
    }
}

/// Points uniform in `(−1, 1)ᵈ`.
pub fn sample_cube<T: Real, R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Array2<T> {
    let mut out = Array2::zeros((count, dim));
    for v in out.iter_mut() {
        *v = open_symmetric(rng);
    }
    out
}

/// Points uniform on the surface of `[−1, 1]ᵈ`: a face is chosen uniformly
/// among the `2d`, its coordinate fixed at `±1`.
pub fn sample_cube_boundary<T: Real, R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Array2<T> {
    let mut out = Array2::zeros((count, dim));
    for mut row in out.outer_iter_mut() {
        let face = rng.random_range(0..2 * dim);
        for v in row.iter_mut() {
            *v = open_symmetric(rng);
        }
        row[face / 2] = if face % 2 == 0 { T::one() } else { -T::one() };
    }
    out
}

fn interior_space<T: Real, R: Rng + ?Sized>(
    dim: usize,
    count: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Array2<T>> {
    match cfg.strategy {
        SamplingStrategy::Annular => sample_ball_annular(dim, count, cfg.annuli, rng),
        SamplingStrategy::Uniform => Ok(sample_ball_uniform(dim, count, rng)),
    }
}

/// Appends a time column, uniform on `(0, horizon)`, or all zeros.
fn with_time<T: Real, R: Rng + ?Sized>(space: Array2<T>, horizon: Option<f64>, rng: &mut R) -> Array2<T> {
    let (n, dim) = space.dim();
    let mut out = Array2::zeros((n, dim + 1));
    out.slice_mut(ndarray::s![.., ..dim]).assign(&space);
    if let Some(horizon) = horizon {
        for i in 0..n {
            out[[i, dim]] = loop {
                let t = T::lit(horizon * open_unit(rng));
                if t > T::zero() && t < T::lit(horizon) {
                    break t;
                }
            };
        }
    }
    out
}

/// Interior (annular or uniform in space, uniform in time) and boundary
/// (`⌈N2/2⌉` on the side, `⌊N2/2⌋` at `t = 0`) points for an evolution
/// problem.
pub fn sample_cylinder<T: Real, R: Rng + ?Sized>(
    problem: &ProblemSpec<T>,
    cfg: &SamplerConfig,
    interior_rng: &mut R,
    boundary_rng: &mut R,
) -> Result<SampleBatch<T>> {
    let DomainKind::BallTimeCylinder { dim, horizon } = problem.domain else {
        return Err(Error::InvalidConfig(format!(
            "{} is not time-dependent",
            problem.name
        )));
    };
    cfg.validate()?;
    let space = interior_space(dim, cfg.interior_count, cfg, interior_rng)?;
    let interior = with_time(space, Some(horizon), interior_rng);

    let (side, bottom) = if cfg.skip_spatial_boundary {
        (0, cfg.boundary_count)
    } else {
        (cfg.boundary_count.div_ceil(2), cfg.boundary_count / 2)
    };
    let side_pts = with_time(sample_sphere(dim, side, boundary_rng), Some(horizon), boundary_rng);
    // Bottom points reuse the interior strategy in space.
    let bottom_space = match cfg.strategy {
        SamplingStrategy::Annular if bottom % cfg.annuli == 0 => {
            sample_ball_annular(dim, bottom, cfg.annuli, boundary_rng)?
        }
        _ => sample_ball_uniform(dim, bottom, boundary_rng),
    };
    let bottom_pts = with_time(bottom_space, None, boundary_rng);
    let boundary = ndarray::concatenate(ndarray::Axis(0), &[side_pts.view(), bottom_pts.view()])
        .expect("equal column counts");
    let mut tags = vec![BoundaryComponent::Spatial; side];
    tags.extend(std::iter::repeat_n(BoundaryComponent::Initial, bottom));
    Ok(SampleBatch {
        interior,
        boundary,
        tags,
    })
}

/// Fresh training points for `problem`.
pub fn sample_training_batch<T: Real, R: Rng + ?Sized>(
    problem: &ProblemSpec<T>,
    cfg: &SamplerConfig,
    interior_rng: &mut R,
    boundary_rng: &mut R,
) -> Result<SampleBatch<T>> {
    cfg.validate()?;
    let n2 = if cfg.skip_spatial_boundary { 0 } else { cfg.boundary_count };
    match problem.domain {
        DomainKind::Cube { dim } => Ok(SampleBatch {
            interior: sample_cube(dim, cfg.interior_count, interior_rng),
            boundary: sample_cube_boundary(dim, n2, boundary_rng),
            tags: vec![BoundaryComponent::Spatial; n2],
        }),
        DomainKind::UnitBall { dim } => Ok(SampleBatch {
            interior: interior_space(dim, cfg.interior_count, cfg, interior_rng)?,
            boundary: sample_sphere(dim, n2, boundary_rng),
            tags: vec![BoundaryComponent::Spatial; n2],
        }),
        DomainKind::BallTimeCylinder { .. } => sample_cylinder(problem, cfg, interior_rng, boundary_rng),
    }
}

/// Test points: uniform in the square for the cube problem, annular in
/// space (uniform in time) otherwise.
pub fn sample_test_points<T: Real, R: Rng + ?Sized>(
    problem: &ProblemSpec<T>,
    count: usize,
    annuli: usize,
    rng: &mut R,
) -> Result<Array2<T>> {
    match problem.domain {
        DomainKind::Cube { dim } => Ok(sample_cube(dim, count, rng)),
        DomainKind::UnitBall { dim } => sample_ball_annular(dim, count, annuli, rng),
        DomainKind::BallTimeCylinder { dim, horizon } => {
            let space = sample_ball_annular(dim, count, annuli, rng)?;
            Ok(with_time(space, Some(horizon), rng))
        }
    }
}
