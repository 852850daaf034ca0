//! The benchmark problems with manufactured data and exact solutions.
//!
//! All high-dimensional problems live on the unit ball (times `(0, 1)` in
//! time) and have radial exact solutions `u = T(t)·φ(|x|)`. Source terms are
//! derived by hand from the radial identities
//!
//! ```text
//! Δu         = φ″(r) + (d−1)·φ′(r)/r
//! ∇·(a∇u)    = a·Δu + a′(r)·φ′(r)        (radial a)
//! |∇u|²      = φ′(r)²
//! ```
//!
//! with the `r → 0` limit `(d−1)·φ′(r)/r → (d−1)·φ″(0)` below
//! [`ORIGIN_GUARD`] for profiles with `φ′(0) = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::Mask;
use crate::operators::{BoundaryOperatorKind, Coefficient, OperatorKind};
use crate::scalar::Real;

/// Radius below which the singular radial term is replaced by its limit.
pub const ORIGIN_GUARD: f64 = 1e-8;

/// Odd truncation used for the double-series reference value of `poisson2d`.
pub const POISSON_SERIES_TERMS: usize = 99;

/// Odd truncation of the single (hyperbolic) series used as `poisson2d`'s
/// exact solution.
pub const POISSON_RAPID_TERMS: usize = 399;

/// Distance from a boundary within which a point counts as on it.
pub const BOUNDARY_TOL: f64 = 1e-12;

pub type ScalarFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemName {
    Poisson2d,
    EllipticNl,
    Parabolic,
    AllenCahn,
    Wave,
}

impl ProblemName {
    pub const ALL: [ProblemName; 5] = [
        ProblemName::Poisson2d,
        ProblemName::EllipticNl,
        ProblemName::Parabolic,
        ProblemName::AllenCahn,
        ProblemName::Wave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Poisson2d => "poisson2d",
            ProblemName::EllipticNl => "elliptic_nl",
            ProblemName::Parabolic => "parabolic",
            ProblemName::AllenCahn => "allen_cahn",
            ProblemName::Wave => "wave",
        }
    }

    pub fn is_time_dependent(self) -> bool {
        matches!(
            self,
            ProblemName::Parabolic | ProblemName::AllenCahn | ProblemName::Wave
        )
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Which part of `Γ` a boundary point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryComponent {
    /// `∂Ω` (times `(0, T)` for evolution problems).
    Spatial,
    /// The `t = 0` slice.
    Initial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    UnitBall { dim: usize },
    /// `(−1, 1)ᵈ`.
    Cube { dim: usize },
    /// Unit ball times `(0, horizon)`; the time coordinate comes last.
    BallTimeCylinder { dim: usize, horizon: f64 },
}

fn norm_sq<T: Real>(x: ArrayView1<'_, T>, dims: usize) -> T {
    x.iter().take(dims).fold(T::zero(), |acc, &v| acc + v * v)
}

impl DomainKind {
    pub fn spatial_dim(&self) -> usize {
        match *self {
            DomainKind::UnitBall { dim }
            | DomainKind::Cube { dim }
            | DomainKind::BallTimeCylinder { dim, .. } => dim,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            DomainKind::BallTimeCylinder { dim, .. } => dim + 1,
            _ => self.spatial_dim(),
        }
    }

    pub fn horizon(&self) -> Option<f64> {
        match *self {
            DomainKind::BallTimeCylinder { horizon, .. } => Some(horizon),
            _ => None,
        }
    }

    /// Strict interior membership.
    pub fn contains<T: Real>(&self, x: ArrayView1<'_, T>) -> bool {
        match *self {
            DomainKind::UnitBall { dim } => norm_sq(x, dim) < T::one(),
            DomainKind::Cube { dim } => x.iter().take(dim).all(|v| v.abs() < T::one()),
            DomainKind::BallTimeCylinder { dim, horizon } => {
                let t = x[dim];
                norm_sq(x, dim) < T::one() && t > T::zero() && t < T::lit(horizon)
            }
        }
    }

    /// Membership in the closure, up to `tol`.
    pub fn contains_closed<T: Real>(&self, x: ArrayView1<'_, T>, tol: f64) -> bool {
        let tol = T::lit(tol);
        match *self {
            DomainKind::UnitBall { dim } => norm_sq(x, dim).sqrt() <= T::one() + tol,
            DomainKind::Cube { dim } => x.iter().take(dim).all(|v| v.abs() <= T::one() + tol),
            DomainKind::BallTimeCylinder { dim, horizon } => {
                let t = x[dim];
                norm_sq(x, dim).sqrt() <= T::one() + tol && t >= -tol && t <= T::lit(horizon) + tol
            }
        }
    }

    /// Whether `x` lies on `component` to within `1e-12`.
    pub fn on_component<T: Real>(&self, x: ArrayView1<'_, T>, component: BoundaryComponent) -> bool {
        let tol = T::lit(BOUNDARY_TOL);
        match (*self, component) {
            (DomainKind::UnitBall { dim }, BoundaryComponent::Spatial) => {
                (norm_sq(x, dim).sqrt() - T::one()).abs() <= tol
            }
            (DomainKind::Cube { dim }, BoundaryComponent::Spatial) => {
                let m = x.iter().take(dim).fold(T::zero(), |acc, v| acc.max(v.abs()));
                (m - T::one()).abs() <= tol
            }
            (DomainKind::BallTimeCylinder { dim, horizon }, BoundaryComponent::Spatial) => {
                let t = x[dim];
                (norm_sq(x, dim).sqrt() - T::one()).abs() <= tol
                    && t >= T::zero()
                    && t <= T::lit(horizon)
            }
            (DomainKind::BallTimeCylinder { dim, .. }, BoundaryComponent::Initial) => {
                x[dim].abs() <= tol && norm_sq(x, dim).sqrt() <= T::one() + tol
            }
            (_, BoundaryComponent::Initial) => false,
        }
    }
}

/// A boundary operator and the data it must reproduce.
#[derive(Clone)]
pub struct BoundaryCondition<T> {
    pub op: BoundaryOperatorKind,
    pub data: ScalarFn<T>,
}

impl<T> fmt::Debug for BoundaryCondition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryCondition({})", self.op.name())
    }
}

/// One benchmark PDE `Du = f in Q`, `Bu = g on Γ`.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub name: ProblemName,
    pub spatial_dim: usize,
    pub domain: DomainKind,
    pub operator: OperatorKind<T>,
    /// Conditions on `∂Ω` (the lateral surface for evolution problems).
    pub spatial_conditions: Vec<BoundaryCondition<T>>,
    /// Conditions on the `t = 0` slice.
    pub initial_conditions: Vec<BoundaryCondition<T>>,
    pub source: ScalarFn<T>,
    pub exact: ScalarFn<T>,
    pub low_regularity_locus: &'static str,
    /// Dirichlet data on `∂Ω` vanish, so a boundary-conforming mask applies.
    pub homogeneous_dirichlet: bool,
}

impl<T: Real> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("spatial_dim", &self.spatial_dim)
            .field("domain", &self.domain)
            .field("operator", &self.operator)
            .field("spatial_conditions", &self.spatial_conditions)
            .field("initial_conditions", &self.initial_conditions)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ProblemSpec<T> {
    pub fn input_dim(&self) -> usize {
        self.domain.input_dim()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.operator.is_time_dependent()
    }

    pub fn conditions(&self, component: BoundaryComponent) -> &[BoundaryCondition<T>] {
        match component {
            BoundaryComponent::Spatial => &self.spatial_conditions,
            BoundaryComponent::Initial => &self.initial_conditions,
        }
    }

    /// The mask that makes an ansatz satisfy the homogeneous Dirichlet data.
    pub fn conforming_mask(&self) -> Option<Mask> {
        if !self.homogeneous_dirichlet {
            return None;
        }
        Some(match self.domain {
            DomainKind::Cube { dim } => Mask::Cube { dims: dim },
            DomainKind::UnitBall { dim } | DomainKind::BallTimeCylinder { dim, .. } => {
                Mask::Ball { dims: dim }
            }
        })
    }

    fn check_dim(&self, points: &ArrayView2<'_, T>) -> Result<()> {
        if points.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: points.ncols(),
            });
        }
        Ok(())
    }

    pub fn exact_values(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        self.check_dim(&points)?;
        Ok(points.outer_iter().map(|p| (self.exact)(&p.to_vec())).collect())
    }

    /// Source term `f` at points of the closed domain.
    pub fn evaluate_f(&self, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
        self.check_dim(&points)?;
        points
            .outer_iter()
            .enumerate()
            .map(|(index, p)| {
                if self.domain.contains_closed(p, BOUNDARY_TOL) {
                    Ok((self.source)(&p.to_vec()))
                } else {
                    Err(Error::OutsideDomain { index })
                }
            })
            .collect()
    }
}

/// Source term `f` at `points`.
pub fn evaluate_f<T: Real>(problem: &ProblemSpec<T>, points: ArrayView2<'_, T>) -> Result<Array1<T>> {
    problem.evaluate_f(points)
}

/// Partial sum of the double cosine series of the Poisson problem on the
/// square, over odd `n, m ≤ truncation`.
pub fn poisson2d_exact<T: Real>(x: [T; 2], truncation: usize) -> Result<T> {
    if truncation % 2 == 0 {
        return Err(Error::EvenTruncation(truncation));
    }
    let half_pi = T::FRAC_PI_2();
    let odd: Vec<usize> = (1..=truncation).step_by(2).collect();
    let c1: Vec<T> = odd.iter().map(|&n| (T::count(n) * half_pi * x[0]).cos()).collect();
    let c2: Vec<T> = odd.iter().map(|&m| (T::count(m) * half_pi * x[1]).cos()).collect();
    let mut sum = T::zero();
    for (i, &n) in odd.iter().enumerate() {
        let nf = T::count(n);
        let mut row = T::zero();
        for (j, &m) in odd.iter().enumerate() {
            let mf = T::count(m);
            let sign = if ((n + m) / 2) % 2 == 0 { T::one() } else { -T::one() };
            row += sign * c2[j] / (mf * (nf * nf + mf * mf));
        }
        sum += c1[i] * row / nf;
    }
    let pi = T::PI();
    Ok(-T::lit(64.0) / (pi * pi * pi * pi) * sum)
}

/// The same solution written as `(1 − x₁²)/2` minus a harmonic correction
/// series in `cos(nπx₁/2)·cosh(nπx₂/2)`. Every partial sum satisfies
/// `−Δu = 1` exactly; the truncation only perturbs the trace at `x₂ = ±1`.
pub fn poisson2d_exact_rapid<T: Real>(x: [T; 2], truncation: usize) -> Result<T> {
    if truncation % 2 == 0 {
        return Err(Error::EvenTruncation(truncation));
    }
    let half_pi = T::FRAC_PI_2();
    let y = x[1].abs();
    let mut corr = T::zero();
    for n in (1..=truncation).step_by(2) {
        let nf = T::count(n);
        let a = nf * half_pi;
        // cosh(a y) / cosh(a) without overflow.
        let ratio = (a * (y - T::one())).exp() * (T::one() + (-(a + a) * y).exp())
            / (T::one() + (-(a + a)).exp());
        let sign = if (n / 2) % 2 == 0 { T::one() } else { -T::one() };
        corr += sign * (a * x[0]).cos() * ratio / (nf * nf * nf);
    }
    let pi = T::PI();
    Ok((T::one() - x[0] * x[0]) / T::lit(2.0) - T::lit(16.0) / (pi * pi * pi) * corr)
}

/// `φ(r) = sin(π/2·(1 − r)^{5/2})`, extended by zero outside the ball.
#[derive(Clone, Copy, Debug)]
pub struct SineProfile;

/// Radial values `(φ, φ′, φ″)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radial<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> Radial<T> {
    /// `φ″ + (d−1)·φ′/r`, using the limit when `φ′(0) = 0` and `r` is tiny.
    pub fn laplacian(&self, r: T, dim: usize, vanishing_slope: bool) -> T {
        let dm1 = T::count(dim - 1);
        if vanishing_slope && r < T::lit(ORIGIN_GUARD) {
            self.d2 + dm1 * self.d2
        } else {
            self.d2 + dm1 * self.d1 / r
        }
    }
}

impl SineProfile {
    pub fn eval<T: Real>(r: T) -> Radial<T> {
        let c = T::FRAC_PI_2();
        let s = (T::one() - r).max(T::zero());
        let g = c * s.powf(T::lit(2.5));
        let g1 = -T::lit(2.5) * c * s.powf(T::lit(1.5));
        let g2 = T::lit(3.75) * c * s.sqrt();
        let (sin, cos) = g.sin_cos();
        Radial {
            value: sin,
            d1: cos * g1,
            d2: -sin * g1 * g1 + cos * g2,
        }
    }
}

fn radius<T: Real>(x: &[T], dims: usize) -> T {
    x.iter().take(dims).fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

fn constant<T: Real>(v: f64) -> ScalarFn<T> {
    let v = T::lit(v);
    Arc::new(move |_: &[T]| v)
}

/// Builds a benchmark by name. `dim` is the spatial dimension; `poisson2d`
/// requires `dim = 2`, the others `dim ≥ 2`.
pub fn make_problem<T: Real>(name: ProblemName, dim: usize) -> Result<ProblemSpec<T>> {
    match name {
        ProblemName::Poisson2d if dim != 2 => {
            return Err(Error::InvalidConfig(format!("poisson2d is two-dimensional, got d={dim}")))
        }
        _ if dim < 2 => return Err(Error::InvalidConfig(format!("{name} needs d >= 2, got d={dim}"))),
        _ => {}
    }
    Ok(match name {
        ProblemName::Poisson2d => poisson2d(),
        ProblemName::EllipticNl => elliptic_nl(dim),
        ProblemName::Parabolic => parabolic(dim),
        ProblemName::AllenCahn => allen_cahn(dim),
        ProblemName::Wave => wave(dim),
    })
}

/// Parses a problem identifier and builds it.
pub fn problem_by_name<T: Real>(name: &str, dim: usize) -> Result<ProblemSpec<T>> {
    make_problem(name.parse()?, dim)
}

fn poisson2d<T: Real>() -> ProblemSpec<T> {
    ProblemSpec {
        name: ProblemName::Poisson2d,
        spatial_dim: 2,
        domain: DomainKind::Cube { dim: 2 },
        operator: OperatorKind::DivergenceElliptic {
            coefficient: None,
            gradient_square: false,
        },
        spatial_conditions: vec![BoundaryCondition {
            op: BoundaryOperatorKind::DirichletTrace,
            data: constant(0.0),
        }],
        initial_conditions: vec![],
        source: constant(1.0),
        exact: Arc::new(|x: &[T]| {
            poisson2d_exact_rapid([x[0], x[1]], POISSON_RAPID_TERMS).expect("odd truncation")
        }),
        low_regularity_locus: "the four corners of the square",
        homogeneous_dirichlet: true,
    }
}

fn elliptic_nl<T: Real>(dim: usize) -> ProblemSpec<T> {
    let exact: ScalarFn<T> = Arc::new(move |x: &[T]| SineProfile::eval(radius(x, dim)).value);
    ProblemSpec {
        name: ProblemName::EllipticNl,
        spatial_dim: dim,
        domain: DomainKind::UnitBall { dim },
        operator: OperatorKind::DivergenceElliptic {
            coefficient: Some(Coefficient::new(move |x: &[T]| {
                let r2 = x.iter().take(dim).fold(T::zero(), |acc, &v| acc + v * v);
                T::one() + r2 / T::lit(2.0)
            })),
            gradient_square: true,
        },
        spatial_conditions: vec![BoundaryCondition {
            op: BoundaryOperatorKind::DirichletTrace,
            data: exact.clone(),
        }],
        initial_conditions: vec![],
        source: Arc::new(move |x: &[T]| {
            let r = radius(x, dim);
            let p = SineProfile::eval(r);
            let a = T::one() + r * r / T::lit(2.0);
            // −(a Δu + a′ φ′) + φ′², a′(r) = r
            -(a * p.laplacian(r, dim, true) + r * p.d1) + p.d1 * p.d1
        }),
        exact,
        low_regularity_locus: "the origin (first derivative) and the unit sphere (third derivative)",
        homogeneous_dirichlet: true,
    }
}

fn parabolic<T: Real>(dim: usize) -> ProblemSpec<T> {
    let exact: ScalarFn<T> = Arc::new(move |x: &[T]| {
        let s = (T::one() - x[dim]).max(T::zero()).sqrt();
        (radius(x, dim) * s).exp()
    });
    ProblemSpec {
        name: ProblemName::Parabolic,
        spatial_dim: dim,
        domain: DomainKind::BallTimeCylinder { dim, horizon: 1.0 },
        operator: OperatorKind::Heat {
            coefficient: Some(Coefficient::new(move |x: &[T]| T::one() + radius(x, dim) / T::lit(2.0))),
        },
        spatial_conditions: vec![BoundaryCondition {
            op: BoundaryOperatorKind::DirichletTrace,
            data: exact.clone(),
        }],
        initial_conditions: vec![BoundaryCondition {
            op: BoundaryOperatorKind::InitialValue,
            data: exact.clone(),
        }],
        source: Arc::new(move |x: &[T]| {
            let r = radius(x, dim);
            let s = (T::one() - x[dim]).max(T::zero()).sqrt();
            let e = (r * s).exp();
            let d1 = s * e;
            let d2 = s * s * e;
            let lap = d2 + T::count(dim - 1) * d1 / r;
            let a = T::one() + r / T::lit(2.0);
            let dt = -e * r / (s + s);
            // ∂ₜu − (a Δu + a′ φ′), a′ = 1/2
            dt - (a * lap + d1 / T::lit(2.0))
        }),
        exact,
        low_regularity_locus: "the origin and the terminal slice t = 1",
        homogeneous_dirichlet: false,
    }
}

fn allen_cahn<T: Real>(dim: usize) -> ProblemSpec<T> {
    let exact: ScalarFn<T> =
        Arc::new(move |x: &[T]| (-x[dim]).exp() * SineProfile::eval(radius(x, dim)).value);
    ProblemSpec {
        name: ProblemName::AllenCahn,
        spatial_dim: dim,
        domain: DomainKind::BallTimeCylinder { dim, horizon: 1.0 },
        operator: OperatorKind::AllenCahn,
        spatial_conditions: vec![BoundaryCondition {
            op: BoundaryOperatorKind::DirichletTrace,
            data: exact.clone(),
        }],
        initial_conditions: vec![BoundaryCondition {
            op: BoundaryOperatorKind::InitialValue,
            data: exact.clone(),
        }],
        source: Arc::new(move |x: &[T]| {
            let r = radius(x, dim);
            let decay = (-x[dim]).exp();
            let p = SineProfile::eval(r);
            let u = decay * p.value;
            // ∂ₜu = −u
            -u - decay * p.laplacian(r, dim, true) - u + u * u * u
        }),
        exact,
        low_regularity_locus: "the origin",
        homogeneous_dirichlet: true,
    }
}

fn wave<T: Real>(dim: usize) -> ProblemSpec<T> {
    let exact: ScalarFn<T> = Arc::new(move |x: &[T]| {
        let t = x[dim];
        ((t * t).exp() - T::one()) * SineProfile::eval(radius(x, dim)).value
    });
    ProblemSpec {
        name: ProblemName::Wave,
        spatial_dim: dim,
        domain: DomainKind::BallTimeCylinder { dim, horizon: 1.0 },
        operator: OperatorKind::Wave,
        spatial_conditions: vec![BoundaryCondition {
            op: BoundaryOperatorKind::DirichletTrace,
            data: exact.clone(),
        }],
        initial_conditions: vec![
            BoundaryCondition {
                op: BoundaryOperatorKind::InitialValue,
                data: exact.clone(),
            },
            BoundaryCondition {
                op: BoundaryOperatorKind::InitialVelocity,
                data: constant(0.0),
            },
        ],
        source: Arc::new(move |x: &[T]| {
            let r = radius(x, dim);
            let t = x[dim];
            let et = (t * t).exp();
            let p = SineProfile::eval(r);
            (T::lit(2.0) + T::lit(4.0) * t * t) * et * p.value
                - (et - T::one()) * p.laplacian(r, dim, true)
        }),
        exact,
        low_regularity_locus: "the origin",
        homogeneous_dirichlet: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn names_round_trip() {
        for p in ProblemName::ALL {
            assert_eq!(p.as_str().parse::<ProblemName>().unwrap(), p);
        }
        assert_eq!(
            "heat".parse::<ProblemName>(),
            Err(Error::UnknownProblem("heat".into()))
        );
    }

    #[test]
    fn dimension_requirements() {
        assert!(make_problem::<f64>(ProblemName::Poisson2d, 3).is_err());
        assert!(make_problem::<f64>(ProblemName::EllipticNl, 1).is_err());
        assert!(make_problem::<f64>(ProblemName::Wave, 10).is_ok());
    }

    #[test]
    fn series_vanishes_on_boundary_and_is_symmetric() {
        for n in [1, 7, 99] {
            for &y in &[-0.7, 0.0, 0.3, 1.0] {
                assert!(poisson2d_exact([1.0_f64, y], n).unwrap().abs() < 1e-15);
            }
            let a = poisson2d_exact([0.3_f64, -0.6], n).unwrap();
            let b = poisson2d_exact([-0.6_f64, 0.3], n).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(poisson2d_exact([0.0_f64, 0.0], 10), Err(Error::EvenTruncation(10)));
    }

    #[test]
    fn elliptic_solution_at_origin() {
        let p = make_problem::<f64>(ProblemName::EllipticNl, 10).unwrap();
        assert_eq!((p.exact)(&[0.0; 10]), 1.0);
    }

    #[test]
    fn wave_initial_data_vanish() {
        let p = make_problem::<f64>(ProblemName::Wave, 3).unwrap();
        let x = [0.2, -0.1, 0.3, 0.0];
        assert_eq!((p.exact)(&x), 0.0);
        let h = 1e-4;
        let vel = ((p.exact)(&[0.2, -0.1, 0.3, h]) - (p.exact)(&[0.2, -0.1, 0.3, -h])) / (2.0 * h);
        assert!(vel.abs() < 1e-12);
        assert_eq!((p.initial_conditions[1].data)(&x), 0.0);
    }

    #[test]
    fn poisson_source_is_one_and_domain_checked() {
        let p = make_problem::<f64>(ProblemName::Poisson2d, 2).unwrap();
        let f = p.evaluate_f(array![[0.1, 0.2], [1.0, -1.0]].view()).unwrap();
        assert_eq!(f, array![1.0, 1.0]);
        assert_eq!(
            p.evaluate_f(array![[0.1, 1.5]].view()),
            Err(Error::OutsideDomain { index: 0 })
        );
    }

    #[test]
    fn sine_profile_slope_vanishes_at_origin() {
        let r = SineProfile::eval(0.0_f64);
        assert_eq!(r.value, 1.0);
        assert!(r.d1.abs() < 1e-15);
        let c = std::f64::consts::FRAC_PI_2;
        assert!((r.d2 + 6.25 * c * c).abs() < 1e-12);
        // Guarded and unguarded forms agree just above the guard radius.
        let near = SineProfile::eval(2e-8_f64);
        let guarded = near.laplacian(5e-9, 10, true);
        let plain = near.laplacian(2e-8, 10, false);
        assert!((guarded - plain).abs() < 1e-5 * guarded.abs());
    }

    #[test]
    fn domains_membership() {
        let ball = DomainKind::UnitBall { dim: 2 };
        assert!(ball.contains(array![0.6, 0.7].view()));
        assert!(!ball.contains(array![0.6, 0.8].view()));
        assert!(ball.on_component(array![0.6, 0.8].view(), BoundaryComponent::Spatial));
        let cyl = DomainKind::BallTimeCylinder { dim: 2, horizon: 1.0 };
        assert!(cyl.contains(array![0.1, 0.1, 0.5].view()));
        assert!(!cyl.contains(array![0.1, 0.1, 0.0].view()));
        assert!(cyl.on_component(array![0.1, 0.1, 0.0].view(), BoundaryComponent::Initial));
        let cube = DomainKind::Cube { dim: 2 };
        assert!(!cube.on_component(array![0.1, 0.1].view(), BoundaryComponent::Initial));
        assert!(cube.on_component(array![1.0, 0.1].view(), BoundaryComponent::Spatial));
    }
}
