use std::f64::consts::{E, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warpband::debranges::{
    affine_boundedness_test, dbr_kernel, dbr_measure_bound_check, hg_norm, mean_type_gate,
    DbrMeasure, StructureFunction,
};
use warpband::paley_wiener::{
    pw_kernel, synthesize_grid, BandSpec, BandlimitedSignal, GridSamples, RealGrid,
};
use warpband::warps::Warp;
use warpband::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn probe() -> RealGrid {
    RealGrid::new(-100.0, 0.01, 20001).unwrap()
}

/// `g(t) = t + i`.
fn cauchy_structure() -> StructureFunction {
    StructureFunction::poly_exp(vec![c(0.0, 1.0), c(1.0, 0.0)], 0.0).unwrap()
}

/// Independent inverse of an increasing function by plain bisection.
fn bisect_inverse(f: impl Fn(f64) -> f64, y: f64) -> f64 {
    let (mut lo, mut hi) = (-1e3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn kernel_reduces_to_paley_wiener() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..500 {
        let a: f64 = rng.gen_range(0.2..4.0);
        let s = StructureFunction::exponential(a).unwrap();
        let z = c(rng.gen_range(-10.0..10.0), rng.gen_range(-2.0..2.0));
        let w = c(rng.gen_range(-10.0..10.0), rng.gen_range(-2.0..2.0));
        let got = dbr_kernel(&s, z, w).unwrap();
        let expected = pw_kernel(BandSpec::new(a).unwrap(), z, w);
        assert!(
            (got - expected).norm() <= 1e-12 * expected.norm().max(1.0),
            "{z} {w}: {got} vs {expected}"
        );
    }
    let s = StructureFunction::exponential(PI).unwrap();
    for x in [-2.5, 0.0, 3.7] {
        let d = dbr_kernel(&s, x.into(), x.into()).unwrap();
        assert!((d - 1.0).norm() < 1e-8, "{d}");
    }
}

#[test]
fn kernel_hermitian_and_diagonal_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let structures = [
        StructureFunction::exponential(1.5).unwrap(),
        cauchy_structure(),
        StructureFunction::poly_exp(vec![c(1.0, 2.0), c(1.0, 0.0)], 0.7).unwrap(),
    ];
    for s in &structures {
        for _ in 0..100 {
            let z = c(rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0));
            let w = c(rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0));
            let kz = dbr_kernel(s, z, w).unwrap();
            let kw = dbr_kernel(s, w, z).unwrap();
            assert!((kz - kw.conj()).norm() <= 1e-10 * kz.norm().max(1.0));
        }
        for _ in 0..200 {
            let x: f64 = rng.gen_range(-20.0..20.0);
            let d = dbr_kernel(s, x.into(), x.into()).unwrap();
            assert!(d.re >= -1e-10 && d.im.abs() < 1e-8, "{x}: {d}");
        }
    }
}

#[test]
fn hg_norm_examples() {
    let grid = RealGrid::default_time();
    for a in [0.5, 1.0, 2.0] {
        let s = StructureFunction::exponential(a).unwrap();
        let f = synthesize_grid(
            &BandlimitedSignal::sinc(BandSpec::new(a).unwrap(), 2049).unwrap(),
            grid,
        );
        let n = hg_norm(&f, &s).unwrap();
        let l2 = f.l2_norm();
        assert!((n - l2).abs() <= 1e-6 * l2, "{n} vs {l2}");
    }
    let s = cauchy_structure();
    let f = GridSamples::from_fn(grid, |t| s.eval(t.into()));
    assert!(matches!(hg_norm(&f, &s), Err(Error::Diverging { .. })));
    assert_eq!(hg_norm(&GridSamples::zeros(grid), &s).unwrap(), 0.0);

    let vanishing = StructureFunction::custom(|z: Complex64| (z + c(0.0, 1.0)) * (z - 0.5), None);
    assert!(matches!(vanishing, Err(Error::StructureZeroOnGrid { .. })));
    // a zero beyond the construction probe but inside the time grid
    let far =
        StructureFunction::custom(|z: Complex64| (z + c(0.0, 1.0)) * (z - 75.0), None).unwrap();
    assert!(
        matches!(hg_norm(&GridSamples::zeros(grid), &far), Err(Error::StructureZeroOnGrid { t }) if t == 75.0)
    );
}

#[test]
fn boundedness_examples() {
    let s = StructureFunction::exponential(1.0).unwrap();
    let r = affine_boundedness_test(&s, 0.5, c(1.0, 0.0), probe()).unwrap();
    assert!(r.bounded);
    assert!((r.c_estimate - 1.0).abs() < 1e-12);
    let r = affine_boundedness_test(&s, 0.5, c(0.0, 1.0), probe()).unwrap();
    assert!(r.bounded);
    assert!((r.c_estimate - E).abs() < 1e-12, "{}", r.c_estimate);

    let s = StructureFunction::poly_exp(vec![c(0.0, 1.0), c(1.0, 0.0)], 1.0).unwrap();
    let r = affine_boundedness_test(&s, 0.5, c(0.0, 0.0), probe()).unwrap();
    assert!(r.bounded);
    assert!((r.c_estimate - 1.0).abs() < 1e-12);
    // oracle: |0.5t + i| / |t + i| on the probe grid
    let sup = probe()
        .points()
        .map(|t| (0.25 * t * t + 1.0).sqrt() / (t * t + 1.0).sqrt())
        .fold(0.0, f64::max);
    assert!((r.window_sups[2].1 - sup).abs() < 1e-12);

    assert!(matches!(
        affine_boundedness_test(&s, 1.5, c(0.0, 0.0), probe()),
        Err(Error::HypothesisViolated(_))
    ));
    assert!(matches!(
        affine_boundedness_test(&s, 0.0, c(0.0, 0.0), probe()),
        Err(Error::HypothesisViolated(_))
    ));
}

#[test]
fn exponential_structures_always_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..40 {
        let sigma: f64 = rng.gen_range(0.1..3.0);
        let a: f64 = rng.gen_range(0.05..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b: f64 = rng.gen_range(-10.0..10.0);
        let s = StructureFunction::exponential(sigma).unwrap();
        let r = affine_boundedness_test(&s, a, b.into(), probe()).unwrap();
        assert!(r.bounded, "σ = {sigma}, a = {a}, b = {b}");
        assert!((r.c_estimate - 1.0).abs() < 1e-9);
    }
}

#[test]
fn measure_gate_and_bounds() {
    // g = 1 already fails strict dominance; e^{-iz} passes it but |g| = 1 on ℝ
    assert!(matches!(
        StructureFunction::poly_exp(vec![c(1.0, 0.0)], 0.0),
        Err(Error::InvalidStructure(_))
    ));
    assert!(matches!(
        DbrMeasure::new(
            StructureFunction::exponential(1.0).unwrap(),
            (-100.0, 100.0)
        ),
        Err(Error::HypothesisViolated(_))
    ));
    let m = DbrMeasure::new(cauchy_structure(), (-100.0, 100.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let intervals: Vec<(f64, f64)> = (0..50)
        .map(|_| {
            let u: f64 = rng.gen_range(-3.0..3.0);
            let v: f64 = rng.gen_range(-3.0..3.0);
            (u.min(v), u.max(v) + 1e-3)
        })
        .collect();

    let r = dbr_measure_bound_check(&m, &Warp::identity(), &intervals, None).unwrap();
    assert!(r.ratios.iter().all(|q| (q - 1.0).abs() < 1e-9));
    assert_eq!(r.violations, 0);

    let phi = |x: f64| x * x * x + x;
    let r = dbr_measure_bound_check(&m, &Warp::cubic_example(), &intervals, Some(0.5)).unwrap();
    let mut worst: f64 = 0.0;
    for (&(u, v), q) in intervals.iter().zip(&r.ratios) {
        let (x1, x2) = (bisect_inverse(phi, u), bisect_inverse(phi, v));
        let oracle = (x2.atan() - x1.atan()) / (v.atan() - u.atan());
        assert!(
            (q - oracle).abs() < 1e-7 * oracle,
            "[{u}, {v}]: {q} vs {oracle}"
        );
        worst = worst.max(oracle);
    }
    assert!((r.c_estimate - worst).abs() < 1e-7 * worst);
    assert_eq!(r.violations, r.ratios.iter().filter(|q| **q > 0.5).count());

    let square = Warp::polynomial(vec![0.0, 0.0, 1.0]).unwrap();
    assert!(matches!(
        dbr_measure_bound_check(&m, &square, &intervals, None),
        Err(Error::NonMonotoneWarp)
    ));
}

#[test]
fn mean_type_gate_examples() {
    let g = StructureFunction::exponential(1.0).unwrap();
    let same = |z: Complex64| g.eval(z);
    let r = mean_type_gate(&same, &g).unwrap();
    assert!(r.ratio_upper_ok && r.reflected_ok);

    for (s1, s) in [(0.5, 1.0), (1.0, 1.0), (0.0, 2.0)] {
        let g = StructureFunction::exponential(s).unwrap();
        let f = move |z: Complex64| (c(0.0, -s1) * z).exp();
        let r = mean_type_gate(&f, &g).unwrap();
        assert!(
            r.ratio_upper_ok && r.reflected_ok,
            "σ₁ = {s1}, σ = {s}: {r:?}"
        );
        assert!((r.ratio_mean_type - (s1 - s)).abs() < 0.05);
    }

    let f = |z: Complex64| (c(0.0, -2.0) * z).exp();
    let r = mean_type_gate(&f, &StructureFunction::exponential(1.0).unwrap()).unwrap();
    assert!(!r.ratio_upper_ok);
    assert!((r.ratio_mean_type - 1.0).abs() < 0.05);
}

#[test]
fn dominance_gate_rejects() {
    // |g(z̄)| > |g(z)| in the upper half-plane
    assert!(StructureFunction::custom(|z: Complex64| (c(0.0, 1.0) * z).exp(), None).is_err());
    assert!(StructureFunction::custom(|z: Complex64| z - c(0.0, 1.0), None).is_err());
    assert!(StructureFunction::custom(|z: Complex64| z + c(0.0, 1.0), None).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_matches_pw(a in 0.2f64..4.0, x in -30.0f64..30.0) {
        let s = StructureFunction::exponential(a).unwrap();
        let d = dbr_kernel(&s, x.into(), x.into()).unwrap();
        prop_assert!((d.re - a / PI).abs() < 1e-8);
    }
}
