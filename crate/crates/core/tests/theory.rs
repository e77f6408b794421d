use mixcs::ensembles::{
    gen_matrix, gen_noise, gen_perturbed_decoder, gen_signal, EnsembleKind, EnsembleSpec,
    PerturbationSpec, SignalSpec,
};
use mixcs::metrics::{
    perturbation_constants, ric_exact, tail_metrics, PerturbationConstants, RicEstimate,
    TailMetrics, DEFAULT_BUDGET,
};
use mixcs::rng::derive_seed;
use mixcs::theory::{
    check_cosamp_conditions, cosamp_bracket, decoder_ric_bound, rip_norm_bounds, total_noise_param,
};
use mixcs::{DenseMatrix, SignalVector};
use proptest::prelude::*;

fn rows(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

fn pc(eps_full: f64, eps_sub: f64, delta: f64, norm_full: f64) -> PerturbationConstants {
    PerturbationConstants::from_norms(2, norm_full, 1.0, eps_full * norm_full, eps_sub, delta)
        .unwrap()
}

fn tm(alpha: f64, beta: f64) -> TailMetrics {
    TailMetrics { alpha, beta, s: 2 }
}

#[test]
fn total_noise_matches_its_definition() {
    let p = pc(0.03, 0.05, 0.2, 1.7);
    let t = tm(0.1, 0.15);
    let (b, e) = (2.5, 0.2);
    let kappa = (1.2f64 / 0.8).sqrt();
    let gamma = 1.7 / 0.8f64.sqrt();
    let expected = ((0.05 * kappa + 0.03 * gamma * 0.1) / (1.0 - kappa * 0.25) + e / b) * b;
    assert!((total_noise_param(&p, &t, b, e).unwrap() - expected).abs() <= 1e-12);
}

#[test]
fn total_noise_grows_with_every_input() {
    let f = |ef: f64, es: f64, a: f64, bt: f64, e: f64| {
        total_noise_param(&pc(ef, es, 0.2, 1.5), &tm(a, bt), 2.0, e).unwrap()
    };
    let base = [0.02, 0.04, 0.1, 0.15, 0.1];
    let eval = |v: [f64; 5]| f(v[0], v[1], v[2], v[3], v[4]);
    for k in 0..5 {
        let mut prev = eval(base);
        for step in 1..=5 {
            let mut v = base;
            v[k] += 0.01 * step as f64;
            let cur = eval(v);
            assert!(cur > prev, "input {k} step {step}");
            prev = cur;
        }
    }
}

#[test]
fn cosamp_bracket_matches_its_definition() {
    let x = SignalVector::new(vec![1.0, -0.8, 0.05, 0.0, 0.02, -0.03, 0.01, 0.04]).unwrap();
    let p = PerturbationConstants::from_norms(2, 1.8, 1.3, 0.09, 0.04, 0.3).unwrap();
    let br = cosamp_bracket(&x, 2, &p, 1.9, 0.07).unwrap();
    let tail = [0.05f64, 0.0, 0.02, -0.03, 0.01, 0.04];
    let l2 = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
    let l1: f64 = tail.iter().map(|v| v.abs()).sum();
    let alpha = l2 / (1.0f64 + 0.64).sqrt();
    let expected = l2 + l1 / 2f64.sqrt() + (0.09 * alpha + 0.04) * 1.9 + 0.07;
    assert!((br.total() - expected).abs() <= 1e-12);
}

#[test]
fn unperturbed_cosamp_condition_is_delta_4s_at_most_one_tenth() {
    let p = pc(0.0, 0.0, 0.05, 1.0);
    let t = tm(0.0, 0.0);
    for (delta, ok) in [(0.0999, true), (0.1, true), (0.1001, false)] {
        let c = check_cosamp_conditions(&RicEstimate::exact(8, delta), 0.0, &p, &t).unwrap();
        assert_eq!(c.ric.ok, ok, "delta {delta}");
    }
}

#[test]
fn total_noise_and_bracket_reduce_to_noise_norm_without_perturbation() {
    let a = gen_matrix(&EnsembleSpec {
        kind: EnsembleKind::Bernoulli,
        m: 12,
        d: 16,
        seed: 3,
    })
    .unwrap();
    let x = gen_signal(&SignalSpec {
        d: 16,
        s: 2,
        tail_alpha: 0.0,
        tail_beta: 0.0,
        seed: 4,
    })
    .unwrap();
    let delta = ric_exact(&a, 2, DEFAULT_BUDGET).unwrap();
    let p = perturbation_constants(&a, &a, 2, &delta, DEFAULT_BUDGET).unwrap();
    let t = tail_metrics(&x, 2).unwrap();
    let e = gen_noise(12, 0.2, 5).unwrap();
    let b = a.matvec(&x).unwrap().add(&e).unwrap();
    assert!((total_noise_param(&p, &t, b.norm2(), 0.2).unwrap() - 0.2).abs() <= 1e-15);
    assert!((cosamp_bracket(&x, 2, &p, b.norm2(), 0.2).unwrap().total() - 0.2).abs() <= 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decoder_ric_is_bounded(seed in 0u64..100_000, t in 0.0f64..0.3, s in 1usize..3) {
        let a = gen_matrix(&EnsembleSpec { kind: EnsembleKind::Gaussian, m: 10, d: 14, seed }).unwrap();
        let phi = gen_perturbed_decoder(&a, &PerturbationSpec { target: t, s, seed: seed ^ 7 }).unwrap();
        let da = ric_exact(&a, s, DEFAULT_BUDGET).unwrap();
        let dphi = ric_exact(&phi, s, DEFAULT_BUDGET).unwrap();
        let oracle = testkit::ric_brute(&rows(&phi), s);
        prop_assert!((dphi.delta - oracle).abs() <= 1e-12);
        let eps = if t == 0.0 { 0.0 } else {
            testkit::submatrix_norm_brute(&rows(&a.sub(&phi).unwrap()), s) / testkit::submatrix_norm_brute(&rows(&a), s)
        };
        prop_assert!(dphi.delta <= decoder_ric_bound(&da, eps).unwrap() + 1e-10);
    }

    #[test]
    fn rip_bounds_sandwich_the_measurement_norm(
        seed in 0u64..100_000,
        alpha in 0.0f64..0.5,
        spread in 0.0f64..1.0,
    ) {
        let (d, s) = (12, 2);
        let a = gen_matrix(&EnsembleSpec { kind: EnsembleKind::Gaussian, m: 8, d, seed: derive_seed(seed, 0) }).unwrap();
        let (lo_b, hi_b) = mixcs::ensembles::beta_range(d, s, alpha);
        let beta = lo_b + spread * (hi_b - lo_b);
        let x = gen_signal(&SignalSpec { d, s, tail_alpha: alpha, tail_beta: beta, seed: derive_seed(seed, 1) }).unwrap();
        let delta = ric_exact(&a, s, DEFAULT_BUDGET).unwrap();
        let (lower, upper) = rip_norm_bounds(&x, s, &delta).unwrap();
        let ax = testkit::norm2(&testkit::matvec(&rows(&a), x.as_slice()));
        prop_assert!(lower <= ax + 1e-10 && ax <= upper + 1e-10);
    }
}
