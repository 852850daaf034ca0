//! Distributional checks on the samplers.

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use selectnet::sampling::{sample_ball_uniform, sample_test_points, sample_training_batch};
use selectnet::*;

fn norm(x: ArrayView1<'_, f64>) -> f64 {
    x.dot(&x).sqrt()
}

/// Kolmogorov–Smirnov distance of `samples` from U(0, 1).
fn ks_uniform(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - i as f64 / n).abs().max(((i + 1) as f64 / n - u).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn annular_counts_are_exact_and_radial_law_is_uniform() {
    for (d, annuli) in [(2, 10), (10, 10), (100, 4)] {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let n = 100_000;
        let pts: Array2<f64> = sample_ball_annular(d, n, annuli, &mut rng).unwrap();
        let per = n / annuli;
        let mut counts = vec![0usize; annuli];
        let mut scaled = Vec::with_capacity(n);
        for (i, p) in pts.outer_iter().enumerate() {
            let r = norm(p);
            let k = i / per;
            let (lo, hi) = (k as f64 / annuli as f64, (k + 1) as f64 / annuli as f64);
            assert!(r > lo && r < hi && r < 1.0);
            counts[((r * annuli as f64) as usize).min(annuli - 1)] += 1;
            let (a, b) = (lo.powi(d as i32), hi.powi(d as i32));
            scaled.push((r.powi(d as i32) - a) / (b - a));
        }
        assert!(counts.iter().all(|&c| c == per), "d={d}: {counts:?}");
        let ks = ks_uniform(scaled);
        assert!(ks < 0.01, "d={d}: KS {ks}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(sample_ball_annular::<f64, _>(3, 101, 10, &mut rng).is_err());
}

#[test]
fn uniform_ball_radius_power_is_uniform() {
    for d in [2, 5, 20] {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + d as u64);
        let pts: Array2<f64> = sample_ball_uniform(d, 100_000, &mut rng);
        let u: Vec<f64> = pts.outer_iter().map(|p| norm(p).powi(d as i32)).collect();
        assert!(u.iter().all(|&v| v > 0.0 && v < 1.0));
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        assert!((mean - 0.5).abs() < 0.005);
        let ks = ks_uniform(u);
        assert!(ks < 0.01, "d={d}: KS {ks}");
    }
}

#[test]
fn sphere_points_are_isotropic() {
    for d in [2, 10, 50] {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + d as u64);
        let n = 100_000;
        let pts: Array2<f64> = sample_sphere(d, n, &mut rng);
        for p in pts.outer_iter() {
            assert!((norm(p) - 1.0).abs() < 1e-12);
        }
        for k in 0..d {
            let col = pts.column(k);
            let second = col.dot(&col) / n as f64;
            assert!((second * d as f64 - 1.0).abs() < 0.05, "d={d} coord {k}: {second}");
            let first = col.sum() / n as f64;
            assert!(first.abs() < 5.0 / (n as f64 * d as f64).sqrt());
        }
    }
}

#[test]
fn cube_boundary_faces_are_equally_likely() {
    let d = 4;
    let n = 80_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Array2<f64> = sample_cube_boundary(d, n, &mut rng);
    let mut faces = vec![0usize; 2 * d];
    for p in pts.outer_iter() {
        let on: Vec<usize> = (0..d).filter(|&k| p[k].abs() == 1.0).collect();
        assert_eq!(on.len(), 1);
        let k = on[0];
        faces[2 * k + usize::from(p[k] < 0.0)] += 1;
        assert!(p.iter().all(|v| v.abs() <= 1.0));
    }
    let expected = n as f64 / (2 * d) as f64;
    let chi2: f64 = faces.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 7 degrees of freedom; 24.3 is the 0.1% critical value.
    assert!(chi2 < 24.3, "{faces:?}");

    let inner: Array2<f64> = sample_cube(d, 1000, &mut rng);
    assert!(inner.iter().all(|v| v.abs() < 1.0));
}

#[test]
fn training_batches_respect_their_domains() {
    let cfg = SamplerConfig {
        interior_count: 500,
        boundary_count: 300,
        ..SamplerConfig::default()
    };
    for (name, d) in [
        (ProblemName::Poisson2d, 2),
        (ProblemName::EllipticNl, 6),
        (ProblemName::Parabolic, 3),
        (ProblemName::Wave, 2),
    ] {
        let problem: Problem = make_problem(name, d).unwrap();
        let mut ri = ChaCha8Rng::seed_from_u64(1);
        let mut rb = ChaCha8Rng::seed_from_u64(2);
        let batch = sample_training_batch(&problem, &cfg, &mut ri, &mut rb).unwrap();
        assert_eq!(batch.interior.nrows(), 500);
        assert_eq!(batch.boundary.nrows(), 300);
        batch.validate(&problem.domain).unwrap();
        for p in batch.interior.outer_iter() {
            assert!(problem.domain.contains(p));
        }
        let test = sample_test_points(&problem, 1000, 10, &mut ri).unwrap();
        for p in test.outer_iter() {
            assert!(problem.domain.contains(p));
        }
    }
}

#[test]
fn streams_are_reproducible_and_distinct() {
    use rand::Rng;
    let draw = |purpose| {
        let mut s = RngStream::new(42, purpose);
        (0..8).map(|_| s.rng().random::<u64>()).collect::<Vec<_>>()
    };
    assert_eq!(draw(StreamPurpose::Interior), draw(StreamPurpose::Interior));
    assert_ne!(draw(StreamPurpose::Interior), draw(StreamPurpose::Boundary));
    assert_ne!(draw(StreamPurpose::Init), draw(StreamPurpose::Test));
}
