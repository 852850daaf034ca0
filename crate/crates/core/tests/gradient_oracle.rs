//! Parameter gradients against central finite differences.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selectnet::loss::{
    basic_loss_from, evaluate_residuals, evaluate_residuals_tracked, evaluate_selection, selection_gradients,
    selectnet_loss_from, solution_gradient,
};
use selectnet::sampling::sample_training_batch;
use selectnet::*;

fn param_count(net: &Network) -> usize {
    net.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
}

/// Mutable access in `ParameterGradient::flatten` order.
fn param_mut(net: &mut Network, mut idx: usize) -> &mut f64 {
    for l in &mut net.layers {
        let w = l.weights.len();
        if idx < w {
            return l.weights.iter_mut().nth(idx).unwrap();
        }
        idx -= w;
        let b = l.biases.len();
        if idx < b {
            return &mut l.biases[idx];
        }
        idx -= b;
    }
    panic!("parameter index out of range");
}

fn central<F: Fn(&Network) -> f64>(net: &Network, idx: usize, step: f64, f: F) -> f64 {
    let mut plus = net.clone();
    *param_mut(&mut plus, idx) += step;
    let mut minus = net.clone();
    *param_mut(&mut minus, idx) -= step;
    (f(&plus) - f(&minus)) / (2.0 * step)
}

/// Glorot init leaves biases at zero, so a dead relu layer hands the next
/// layer an exact zero pre-activation, right on the kink.
fn with_random_biases(mut net: Network, rng: &mut ChaCha8Rng) -> Network {
    for l in &mut net.layers {
        l.biases.mapv_inplace(|_| rng.random_range(-0.1..0.1));
    }
    net
}

fn random_points(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, d), || rng.random_range(-1.0..1.0))
}

fn agrees(backprop: f64, fd: f64, rel: f64, abs_floor: f64) -> bool {
    if fd.abs() < 1e-3 {
        (backprop - fd).abs() < abs_floor
    } else {
        (backprop - fd).abs() <= rel * fd.abs()
    }
}

#[test]
fn backprop_matches_finite_differences_for_every_activation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for act in ActivationKind::ALL {
        for trial in 0..5 {
            let d = 2 + trial % 3;
            let shape = NetworkShape::new(d, 3 + trial, 1 + trial % 3).unwrap();
            let net = with_random_biases(init_network(shape, act, 100 + trial as u64).unwrap(), &mut rng);
            let n = 1 + trial;
            let pts = random_points(n, d, &mut rng);
            let upstream = Array1::from_shape_simple_fn(n, || rng.random_range(-1.0..1.0));
            let (_, cache) = forward_with_cache(&net, pts.view()).unwrap();
            let g = backprop_params(&net, &cache, upstream.view()).unwrap().flatten();
            assert_eq!(g.len(), param_count(&net));
            let objective = |m: &Network| m.forward(pts.view()).unwrap().dot(&upstream);
            // Rounding in the central difference grows with the objective.
            let floor = 1e-8 * (1.0 + objective(&net).abs());
            for (i, &gi) in g.iter().enumerate() {
                let fd = central(&net, i, 1e-4, objective);
                assert!(agrees(gi, fd, 1e-5, floor), "{act} trial {trial} coord {i}: {gi} vs {fd}");
            }
        }
    }
}

#[test]
fn backprop_is_linear_in_upstream() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net: Network = init_network(NetworkShape::new(3, 6, 2).unwrap(), ActivationKind::Tanh, 9).unwrap();
    let pts = random_points(8, 3, &mut rng);
    let u = Array1::from_shape_simple_fn(8, || rng.random_range(-1.0..1.0));
    let v = Array1::from_shape_simple_fn(8, || rng.random_range(-1.0..1.0));
    let (a, b) = (0.7, -1.3);
    let (_, cache) = forward_with_cache(&net, pts.view()).unwrap();
    let combined = backprop_params(&net, &cache, (&u * a + &v * b).view()).unwrap().flatten();
    let gu = backprop_params(&net, &cache, u.view()).unwrap().flatten();
    let gv = backprop_params(&net, &cache, v.view()).unwrap().flatten();
    for i in 0..combined.len() {
        assert!((combined[i] - (a * gu[i] + b * gv[i])).abs() < 1e-12);
    }
}

#[test]
fn forward_matches_straight_line_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shape = NetworkShape::new(4, 7, 3).unwrap();
    let net: Network = init_network(shape, ActivationKind::Sine, 21).unwrap();
    let pts = random_points(100, 4, &mut rng);
    let out = net.forward(pts.view()).unwrap();
    for (p, &o) in pts.outer_iter().zip(out.iter()) {
        let mut x: Vec<f64> = p.to_vec();
        for (l, layer) in net.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.biases.len()];
            for (r, v) in next.iter_mut().enumerate() {
                let mut acc = layer.biases[r];
                for (c, xc) in x.iter().enumerate() {
                    acc += layer.weights[[r, c]] * xc;
                }
                *v = if l < shape.depth { acc.sin() } else { acc };
            }
            x = next;
        }
        assert!((x[0] - o).abs() < 1e-12);
    }
}

/// Small trained-looking setup: random nets, a real batch, and a coarse
/// stencil so that rounding does not swamp parameter differences.
struct Setup {
    problem: Problem,
    batch: Batch,
    cfg: OperatorConfig<f64>,
}

fn setup(name: ProblemName, d: usize, seed: u64) -> Setup {
    let problem: Problem = make_problem(name, d).unwrap();
    let sampler = SamplerConfig {
        interior_count: 10,
        boundary_count: 6,
        annuli: 5,
        ..SamplerConfig::default()
    };
    let mut ri = ChaCha8Rng::seed_from_u64(seed);
    let mut rb = ChaCha8Rng::seed_from_u64(seed + 1);
    let batch = sample_training_batch(&problem, &sampler, &mut ri, &mut rb).unwrap();
    Setup {
        problem,
        batch,
        cfg: OperatorConfig::new(1e-2).unwrap(),
    }
}

fn check_solution_gradient(s: &Setup, ansatz: &Ansatz, method: &str) {
    let weights = LossWeights {
        lambda: 1.7,
        epsilon: 1e-3,
    };
    let bw = BinaryWeightConfig::from_ratio(0.3, 4.0).unwrap();
    let shape = NetworkShape::new(s.problem.input_dim(), 4, 2).unwrap();
    let sel_i = SelectionNetwork::new(init_network(shape, ActivationKind::Tanh, 77).unwrap(), 0.8, 5.0).unwrap();
    let sel_b = SelectionNetwork::new(init_network(shape, ActivationKind::Tanh, 78).unwrap(), 0.8, 5.0).unwrap();

    let total = |a: &Ansatz| -> f64 {
        let res = evaluate_residuals(&s.problem, a, &s.batch, &s.cfg).unwrap();
        match method {
            "basic" => basic_loss_from(&res, &weights).components.total,
            "binary" => selectnet::loss::binary_loss_from(&res, &bw, &weights).unwrap().components.total,
            _ => {
                let sel = evaluate_selection(&sel_i, &sel_b, &s.batch).unwrap();
                selectnet_loss_from(&res, &sel_i, &sel_b, &sel, &weights).unwrap().components.total
            }
        }
    };
    let res = evaluate_residuals_tracked(&s.problem, ansatz, &s.batch, &s.cfg).unwrap();
    let eval = match method {
        "basic" => basic_loss_from(&res, &weights),
        "binary" => selectnet::loss::binary_loss_from(&res, &bw, &weights).unwrap(),
        _ => {
            let sel = evaluate_selection(&sel_i, &sel_b, &s.batch).unwrap();
            selectnet_loss_from(&res, &sel_i, &sel_b, &sel, &weights).unwrap()
        }
    };
    let g = solution_gradient(ansatz, &res, &eval).unwrap().flatten();
    let mut worst: f64 = 0.0;
    for (i, &gi) in g.iter().enumerate() {
        let fd = central(&ansatz.core, i, 1e-5, |c| {
            total(&SolutionAnsatz {
                core: c.clone(),
                mask: ansatz.mask,
            })
        });
        let scale = fd.abs().max(1e-3 * (1.0 + total(ansatz).abs()));
        worst = worst.max((gi - fd).abs() / scale);
    }
    assert!(worst < 1e-4, "{method} on {}: worst relative deviation {worst}", s.problem.name);
}

#[test]
fn solution_gradients_of_all_losses_match_finite_differences() {
    for (name, d) in [
        (ProblemName::Poisson2d, 2),
        (ProblemName::EllipticNl, 3),
        (ProblemName::Parabolic, 2),
        (ProblemName::AllenCahn, 2),
        (ProblemName::Wave, 2),
    ] {
        let s = setup(name, d, 40);
        let core = init_network(NetworkShape::new(s.problem.input_dim(), 5, 2).unwrap(), ActivationKind::Tanh, 5)
            .unwrap();
        let ansatz = SolutionAnsatz::unmasked(core);
        for method in ["basic", "selectnet", "binary"] {
            check_solution_gradient(&s, &ansatz, method);
        }
    }
}

#[test]
fn masked_and_cubic_solution_gradients_match_finite_differences() {
    let s = setup(ProblemName::EllipticNl, 3, 8);
    let core = init_network(NetworkShape::new(3, 6, 3).unwrap(), ActivationKind::CubicRelu, 13).unwrap();
    let mut ansatz = SolutionAnsatz::new(core, Mask::Ball { dims: 3 }).unwrap();
    // Push the cubic units into their active range.
    for l in &mut ansatz.core.layers {
        l.weights.mapv_inplace(|w| 2.0 * w);
        l.biases.fill(0.3);
    }
    check_solution_gradient(&s, &ansatz, "basic");
    check_solution_gradient(&s, &ansatz, "selectnet");

    let s = setup(ProblemName::AllenCahn, 2, 9);
    let core = init_network(NetworkShape::new(3, 5, 2).unwrap(), ActivationKind::Sine, 14).unwrap();
    let ansatz = SolutionAnsatz::new(core, Mask::Ball { dims: 2 }).unwrap();
    check_solution_gradient(&s, &ansatz, "binary");
}

#[test]
fn selection_gradients_match_finite_differences() {
    for (name, d) in [(ProblemName::Poisson2d, 2), (ProblemName::Wave, 2)] {
        let s = setup(name, d, 60);
        let dim = s.problem.input_dim();
        let ansatz =
            SolutionAnsatz::unmasked(init_network(NetworkShape::new(dim, 5, 2).unwrap(), ActivationKind::Tanh, 1).unwrap());
        let shape = NetworkShape::new(dim, 4, 2).unwrap();
        let sel_i = SelectionNetwork::new(init_network(shape, ActivationKind::Sigmoid, 2).unwrap(), 0.8, 5.0).unwrap();
        let sel_b = SelectionNetwork::new(init_network(shape, ActivationKind::Tanh, 3).unwrap(), 0.5, 3.0).unwrap();
        // ε = 1 keeps the penalty comparable to the residual terms.
        let weights = LossWeights {
            lambda: 0.6,
            epsilon: 1.0,
        };
        let res = evaluate_residuals_tracked(&s.problem, &ansatz, &s.batch, &s.cfg).unwrap();
        let total = |si: &Selection, sb: &Selection| {
            let sel = evaluate_selection(si, sb, &s.batch).unwrap();
            selectnet_loss_from(&res, si, sb, &sel, &weights).unwrap().components.total
        };
        let sel = evaluate_selection(&sel_i, &sel_b, &s.batch).unwrap();
        let eval = selectnet_loss_from(&res, &sel_i, &sel_b, &sel, &weights).unwrap();
        let (gi, gb) = selection_gradients(&sel_i, &sel_b, &s.batch, &eval).unwrap();
        // Rounding in the differenced objective scales with its magnitude.
        let noise = 1e-9 * (1.0 + eval.components.total.abs());
        for (which, g) in [("interior", gi.flatten()), ("boundary", gb.flatten())] {
            for (i, &gk) in g.iter().enumerate() {
                let fd = if which == "interior" {
                    central(&sel_i.core, i, 1e-6, |c| {
                        total(&SelectionNetwork { core: c.clone(), ..sel_i.clone() }, &sel_b)
                    })
                } else {
                    central(&sel_b.core, i, 1e-6, |c| {
                        total(&sel_i, &SelectionNetwork { core: c.clone(), ..sel_b.clone() })
                    })
                };
                assert!((gk - fd).abs() <= 1e-4 * fd.abs() + noise, "{name} {which} coord {i}: {gk} vs {fd}");
            }
        }
    }
}

#[test]
fn small_ascent_step_does_not_decrease_the_objective() {
    let s = setup(ProblemName::EllipticNl, 3, 70);
    let ansatz =
        SolutionAnsatz::unmasked(init_network(NetworkShape::new(3, 5, 2).unwrap(), ActivationKind::Sine, 4).unwrap());
    let shape = NetworkShape::new(3, 4, 2).unwrap();
    let sel_i = SelectionNetwork::new(init_network(shape, ActivationKind::Relu, 5).unwrap(), 0.8, 5.0).unwrap();
    let sel_b = SelectionNetwork::new(init_network(shape, ActivationKind::Relu, 6).unwrap(), 0.8, 5.0).unwrap();
    let weights = LossWeights::default();
    let res = evaluate_residuals_tracked(&s.problem, &ansatz, &s.batch, &s.cfg).unwrap();
    let objective = |si: &Selection, sb: &Selection| {
        let sel = evaluate_selection(si, sb, &s.batch).unwrap();
        selectnet_loss_from(&res, si, sb, &sel, &weights).unwrap().components.total
    };
    let before = objective(&sel_i, &sel_b);
    let sel = evaluate_selection(&sel_i, &sel_b, &s.batch).unwrap();
    let eval = selectnet_loss_from(&res, &sel_i, &sel_b, &sel, &weights).unwrap();
    let (gi, gb) = selection_gradients(&sel_i, &sel_b, &s.batch, &eval).unwrap();
    let (mut ni, mut nb) = (sel_i.clone(), sel_b.clone());
    for (l, g) in ni.core.layers.iter_mut().zip(&gi.layers) {
        l.weights.scaled_add(1e-6, &g.weights);
        l.biases.scaled_add(1e-6, &g.biases);
    }
    for (l, g) in nb.core.layers.iter_mut().zip(&gb.layers) {
        l.weights.scaled_add(1e-6, &g.weights);
        l.biases.scaled_add(1e-6, &g.biases);
    }
    assert!(objective(&ni, &nb) >= before);
}
