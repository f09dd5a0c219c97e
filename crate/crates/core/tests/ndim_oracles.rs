//! Independent checks of the n-dimensional model: eigendecomposition and RK4
//! oracles, strong stable leaves, the optimal kick and the planar reduction.

use kickshear::lyapunov::{self, max_lyapunov};
use kickshear::ndim::{self, KickProfile, NdParams, NdState};
use kickshear::prng::{self, prng_stream, uniform_in, StreamRng};
use kickshear::shear::{self, circle_distance, CylinderPoint, ShearParams};
use kickshear::{Classification, LyapunovConfig};
use nalgebra::{DMatrix, DVector};

fn random_matrix(rng: &mut StreamRng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| uniform_in(rng, lo, hi))
}

/// `Λ` with eigenvalues in `[0.1, 0.6]`: a diagonal plus a small coupling.
fn random_lambda(rng: &mut StreamRng, m: usize) -> DMatrix<f64> {
    let mut l = random_matrix(rng, m, -0.03, 0.03);
    for i in 0..m {
        l[(i, i)] += uniform_in(rng, 0.15, 0.6);
    }
    l
}

fn random_sigma(rng: &mut StreamRng, m: usize) -> DVector<f64> {
    DVector::from_fn(m, |_, _| uniform_in(rng, -1.0, 1.0))
}

#[test]
fn mat_exp_matches_eigendecomposition() {
    let mut rng = prng_stream(201, 0);
    for _ in 0..50 {
        let mut p = random_matrix(&mut rng, 3, -1.0, 1.0);
        for i in 0..3 {
            p[(i, i)] += 2.0;
        }
        let d = [uniform_in(&mut rng, -2.0, -1.0), uniform_in(&mut rng, -0.5, 0.5), uniform_in(&mut rng, 1.0, 2.0)];
        let p_inv = p.clone().try_inverse().unwrap();
        let m = &p * DMatrix::from_diagonal(&DVector::from_column_slice(&d)) * &p_inv;
        let t = uniform_in(&mut rng, 0.1, 2.0);
        let oracle = &p * DMatrix::from_diagonal(&DVector::from_iterator(3, d.iter().map(|x| (x * t).exp()))) * &p_inv;
        let got = ndim::mat_exp(&m, t).unwrap();
        let err = (&got - &oracle).norm() / oracle.norm();
        assert!(err <= 1e-12, "relative error {err:e}");
    }
}

/// RK4 for `θ' = 1 + σᵀy, y' = -Λy`.
fn rk4_nd(s: &NdState, t: f64, sigma: &DVector<f64>, lambda: &DMatrix<f64>, h: f64) -> (f64, DVector<f64>) {
    let steps = (t / h).ceil() as usize;
    let h = t / steps as f64;
    let rhs = |y: &DVector<f64>| (1.0 + sigma.dot(y), -(lambda * y));
    let (mut th, mut y) = (s.theta, s.y.clone());
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&(&y + &k1.1 * (0.5 * h)));
        let k3 = rhs(&(&y + &k2.1 * (0.5 * h)));
        let k4 = rhs(&(&y + &k3.1 * h));
        th += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
    }
    (th, y)
}

fn random_params(rng: &mut StreamRng, m: usize, tau: f64) -> NdParams {
    NdParams::with_optimal_direction(
        random_sigma(rng, m),
        random_lambda(rng, m),
        uniform_in(rng, 0.0, 0.2),
        KickProfile::sine(),
        tau,
    )
    .unwrap()
}

fn random_state(rng: &mut StreamRng, m: usize) -> NdState {
    NdState::new(prng::uniform(rng), DVector::from_fn(m, |_, _| uniform_in(rng, -0.05, 0.05)))
}

#[test]
fn flow_matches_rk4_in_four_dimensions() {
    let mut rng = prng_stream(202, 0);
    for _ in 0..10 {
        let p = random_params(&mut rng, 3, 10.0);
        let s = random_state(&mut rng, 3);
        let exact = ndim::flow_nd_lifted(&s, 10.0, &p).unwrap();
        let (th, y) = rk4_nd(&s, 10.0, p.sigma(), p.lambda(), 1e-3);
        assert!((exact.theta - th).abs() <= 1e-8);
        assert!((&exact.y - y).amax() <= 1e-8);
    }
}

#[test]
fn psi_matches_rk4_after_kick() {
    let mut rng = prng_stream(203, 0);
    for _ in 0..100 {
        let m = 1 + (prng::uniform(&mut rng) * 3.0) as usize;
        let tau = uniform_in(&mut rng, 5.0, 15.0);
        let p = random_params(&mut rng, m, tau);
        let s = random_state(&mut rng, m);
        let fast = ndim::psi_nd(&s, &p);
        let (th, y) = rk4_nd(&ndim::kick_nd(&s, &p), tau, p.sigma(), p.lambda(), 2e-3);
        assert!(circle_distance(fast.theta, th) <= 1e-8);
        assert!((&fast.y - y).amax() <= 1e-8);
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = prng_stream(204, 0);
    let h = 1e-6;
    for _ in 0..50 {
        let tau = uniform_in(&mut rng, 5.0, 15.0);
        let p = random_params(&mut rng, 3, tau);
        let s = random_state(&mut rng, 3);
        let j = ndim::jacobian_nd(&s, &p);
        let coords = |q: &NdState| {
            let mut v = vec![q.theta];
            v.extend(q.y.iter());
            v
        };
        for c in 0..4 {
            let shifted = |sign: f64| {
                let mut t = s.clone();
                if c == 0 {
                    t.theta += sign * h;
                } else {
                    t.y[c - 1] += sign * h;
                }
                coords(&ndim::psi_nd_lifted(&t, &p))
            };
            let (plus, minus) = (shifted(1.0), shifted(-1.0));
            for r in 0..4 {
                let fd = (plus[r] - minus[r]) / (2.0 * h);
                assert!((fd - j[(r, c)]).abs() <= 1e-6 * (1.0 + j[(r, c)].abs()), "entry ({r},{c})");
            }
        }
    }
}

#[test]
fn jacobian_determinant_is_the_volume_contraction() {
    let mut rng = prng_stream(205, 0);
    for _ in 0..10_000 {
        let m = 1 + (prng::uniform(&mut rng) * 3.0) as usize;
        let tau = uniform_in(&mut rng, 1.0, 15.0);
        let p = random_params(&mut rng, m, tau);
        let s = random_state(&mut rng, m);
        let det = ndim::jacobian_nd(&s, &p).determinant();
        let expected = (-p.lambda().trace() * p.tau()).exp();
        assert!(((det - expected) / expected).abs() <= 1e-10);
    }
}

#[test]
fn strong_stable_leaves_are_carried_by_the_flow() {
    let mut rng = prng_stream(206, 0);
    for _ in 0..100 {
        let p = random_params(&mut rng, 3, 10.0);
        let c = ndim::wss_covector(&p);
        let z1 = random_state(&mut rng, 3);
        // Same leaf: move y and compensate the phase.
        let dy = DVector::from_fn(3, |_, _| uniform_in(&mut rng, -0.05, 0.05));
        let y2 = &z1.y + &dy;
        let theta2 = z1.theta - c.rows(1, 3).dot(&dy);
        let z2 = NdState { theta: theta2, y: y2 };
        let t = uniform_in(&mut rng, 0.0, 30.0);
        let (a, b) = (ndim::flow_nd_lifted(&z1, t, &p).unwrap(), ndim::flow_nd_lifted(&z2, t, &p).unwrap());
        let mut diff = vec![a.theta - b.theta];
        diff.extend((&a.y - &b.y).iter());
        let along = c.dot(&DVector::from_vec(diff));
        assert!(along.abs() <= 1e-10, "{along:e}");
        let decay = ndim::mat_exp(p.lambda(), -t).unwrap();
        let err = (&b.y - &a.y - &decay * &dy).amax();
        assert!(err <= 1e-12, "{err:e}");
    }
}

#[test]
fn optimal_direction_beats_random_directions() {
    let mut rng = prng_stream(207, 0);
    for _ in 0..20 {
        let m = 2 + (prng::uniform(&mut rng) * 3.0) as usize;
        let sigma = random_sigma(&mut rng, m);
        let lambda = random_lambda(&mut rng, m);
        let gain = |v: &DVector<f64>| sigma.dot(&lambda.clone().lu().solve(v).unwrap());
        let best = ndim::optimal_kick_direction(&sigma, &lambda).unwrap();
        let top = gain(&best);
        assert!((gain(&-&best) + top).abs() <= 1e-12);
        for _ in 0..1000 {
            let u = DVector::from_vec(prng::unit_vector(&mut rng, m));
            assert!(gain(&u) <= top + 1e-12);
        }
    }
}

#[test]
fn long_relaxation_approaches_the_magnified_kick() {
    let mut rng = prng_stream(208, 0);
    for _ in 0..100 {
        let m = 1 + (prng::uniform(&mut rng) * 3.0) as usize;
        let sigma = random_sigma(&mut rng, m);
        let lambda = random_lambda(&mut rng, m);
        let lambda_min = lambda.clone().eigenvalues().map_or(0.1, |e| e.min());
        let tau = 20.0 / lambda_min.max(0.01) + uniform_in(&mut rng, 0.0, 1.0);
        let p = NdParams::with_optimal_direction(sigma, lambda, 0.1, KickProfile::sine(), tau).unwrap();
        let theta = prng::uniform(&mut rng);
        let image = ndim::psi_nd_lifted(&NdState::on_cycle(theta, m), &p);
        let predicted = theta + tau + ndim::magnification_factor(&p, theta);
        let decay = ndim::mat_exp(p.lambda(), -tau).unwrap().norm();
        let c = ndim::wss_covector(&p).rows(1, m).norm() * p.amplitude() * p.profile().sup_bound();
        assert!((image.theta - predicted).abs() <= c * decay + 1e-12 * tau, "tau={tau}");
    }
}

#[test]
fn singular_limit_map_is_the_long_period_limit() {
    let mut rng = prng_stream(209, 0);
    for _ in 0..50 {
        let m = 1 + (prng::uniform(&mut rng) * 3.0) as usize;
        let lambda = random_lambda(&mut rng, m);
        let lambda_min = lambda.clone().eigenvalues().map_or(0.1, |e| e.min());
        let k = (30.0 / lambda_min).ceil();
        let a = prng::uniform(&mut rng);
        let p = NdParams::with_optimal_direction(random_sigma(&mut rng, m), lambda, 0.1, KickProfile::sine(), k + a)
            .unwrap();
        let theta = prng::uniform(&mut rng);
        let image = ndim::psi_nd(&NdState::on_cycle(theta, m), &p);
        let limit = ndim::singular_limit_map_nd(theta, a, &p);
        assert!(circle_distance(image.theta, limit) <= 1e-6);
    }
}

fn planar_pair(sigma: f64, lambda: f64, a: f64, tau: f64) -> (ShearParams, NdParams) {
    let planar = ShearParams::new(sigma, lambda, a, tau).unwrap();
    let nd = ndim::NdParams::from_shear(&planar).unwrap();
    (planar, nd)
}

#[test]
fn planar_reduction_agrees_with_the_planar_model() {
    let mut rng = prng_stream(210, 0);
    for _ in 0..1000 {
        let (planar, nd) = planar_pair(
            uniform_in(&mut rng, 0.05, 4.0),
            uniform_in(&mut rng, 0.05, 0.5),
            uniform_in(&mut rng, 0.0, 0.2),
            uniform_in(&mut rng, 5.0, 15.0),
        );
        let x = CylinderPoint::new(prng::uniform(&mut rng), uniform_in(&mut rng, -0.05, 0.05));
        let s = NdState::new(x.theta, DVector::from_element(1, x.y));
        let (a, b) = (shear::psi(x, &planar), ndim::psi_nd(&s, &nd));
        assert!(circle_distance(a.theta, b.theta) <= 1e-12 && (a.y - b.y[0]).abs() <= 1e-12);
        let t = uniform_in(&mut rng, 0.0, 20.0);
        let (a, b) = (shear::flow(x, t, &planar), ndim::flow_nd(&s, t, &nd).unwrap());
        assert!(circle_distance(a.theta, b.theta) <= 1e-12 && (a.y - b.y[0]).abs() <= 1e-12);
        let (ja, jb) = (shear::jacobian(x, &planar), ndim::jacobian_nd(&s, &nd));
        for (u, v) in [ja.a11, ja.a12, ja.a21, ja.a22].iter().zip([jb[(0, 0)], jb[(0, 1)], jb[(1, 0)], jb[(1, 1)]]) {
            assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }
}

#[test]
fn planar_reduction_has_the_planar_exponent() {
    let cfg = LyapunovConfig::default();
    for (sigma, tau) in [(2.0, 10.0), (0.05, 10.0), (0.5, 12.25)] {
        let (planar, nd) = planar_pair(sigma, 0.1, 0.1, tau);
        let mut rng = prng_stream(17, 0);
        let (x, v) = lyapunov::sample_trapping_band(&planar, &mut rng);
        let a = max_lyapunov(&planar, x, &v, 100_000, &cfg).unwrap();
        let s = NdState::new(x.theta, DVector::from_element(1, x.y));
        let b = ndim::top_lyapunov_nd(s, &v, 100_000, &nd, &cfg).unwrap();
        assert!((a.value - b.value).abs() <= 1e-10, "sigma={sigma}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn three_dimensional_example_is_chaotic_like_the_plane() {
    let sigma = DVector::from_vec(vec![2.0, 0.0]);
    let lambda = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.3]);
    let p = NdParams::with_optimal_direction(sigma, lambda, 0.1, KickProfile::sine(), 10.0).unwrap();
    assert!((p.effective_gain() * p.amplitude() - 2.0).abs() <= 1e-12);
    let cfg = LyapunovConfig::default();
    let nd = ndim::ensemble_nd(&p, 10, 100_000, 4, &cfg).unwrap();
    let planar = lyapunov::ensemble_protocol(&ShearParams::new(2.0, 0.1, 0.1, 10.0).unwrap(), 10, 100_000, 4, &cfg).unwrap();
    assert_eq!(nd.classification, Classification::Positive);
    assert_eq!(planar.classification, Classification::Positive);
}
