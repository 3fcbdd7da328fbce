use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use warpband::paley_wiener::{
    analyze_band, forward_transform, l2_inner, pw_kernel, synthesize, synthesize_grid, BandSpec,
    BandlimitedSignal, GridSamples, RealGrid, Spectrum,
};
use warpband::range_rkhs::{gram_on_nodes, WarpedKernel};
use warpband::warps::Warp;
use warpband::Error;

fn band(a: f64) -> BandSpec {
    BandSpec::new(a).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `sinc(t - n)` for `a = π`: spectrum `e^{iωn}/2π`.
fn shifted_sinc(n: f64) -> BandlimitedSignal {
    let s = Spectrum::from_fn(band(PI), 2049, |w| {
        Complex64::from_polar(1.0 / (2.0 * PI), w * n)
    })
    .unwrap();
    BandlimitedSignal::new(s, "shifted sinc")
}

#[test]
fn normalized_sinc_values() {
    let f = BandlimitedSignal::sinc(band(PI), 2049).unwrap();
    assert!((synthesize(&f, c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-12);
    for n in 1..6 {
        assert!(synthesize(&f, c(n as f64, 0.0)).unwrap().norm() < 1e-12);
    }
    // off the axis: sin(πz)/(πz)
    let z = c(0.3, 1.2);
    let exact = (z * PI).sin() / (z * PI);
    assert!((synthesize(&f, z).unwrap() - exact).norm() < 1e-10);
    let zero = BandlimitedSignal::zero(band(PI), 33).unwrap();
    assert_eq!(synthesize(&zero, c(2.0, 1.0)).unwrap(), c(0.0, 0.0));
}

#[test]
fn exponent_cap() {
    let f = BandlimitedSignal::sinc(band(2.0), 33).unwrap();
    assert!(matches!(
        synthesize(&f, c(0.0, 351.0)),
        Err(Error::Overflow { .. })
    ));
    assert!(synthesize(&f, c(0.0, 349.0)).is_ok());
}

#[test]
fn kernel_examples() {
    assert!((pw_kernel(band(PI), c(0.0, 0.0), c(0.0, 0.0)) - 1.0).norm() < 1e-15);
    let v = pw_kernel(band(1.0), c(1.0, 0.0), c(0.0, 0.0));
    assert!((v.re - 1f64.sin() / PI).abs() < 1e-15 && v.im == 0.0);
    for (m, n) in [(0, 1), (-3, 4), (7, 2)] {
        assert!(pw_kernel(band(PI), c(m as f64, 0.0), c(n as f64, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn sinc_norm_and_orthogonality() {
    let grid = RealGrid::default_time();
    let s0 = synthesize_grid(&shifted_sinc(0.0), grid);
    let s1 = synthesize_grid(&shifted_sinc(1.0), grid);
    let s3 = synthesize_grid(&shifted_sinc(-3.0), grid);
    assert!((l2_inner(&s0, &s0).unwrap() - 1.0).norm() < 1e-3);
    assert!(l2_inner(&s0, &s1).unwrap().norm() < 1e-3);
    assert!(l2_inner(&s1, &s3).unwrap().norm() < 1e-3);
    assert_eq!(
        l2_inner(&s0, &GridSamples::zeros(grid)).unwrap(),
        c(0.0, 0.0)
    );
    let other = RealGrid::new(-10.0, 0.05, 401).unwrap();
    assert!(matches!(
        l2_inner(&s0, &GridSamples::zeros(other)),
        Err(Error::GridMismatch)
    ));
}

#[test]
fn reproducing_property() {
    let grid = RealGrid::default_time();
    let b = band(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let f = BandlimitedSignal::random(b, 2049, &mut rng).unwrap();
        let samples = synthesize_grid(&f, grid);
        for x in [-3.0, 0.0, 1.7] {
            let k = GridSamples::from_fn(grid, |t| pw_kernel(b, t.into(), x.into()));
            let lhs = l2_inner(&samples, &k).unwrap();
            let rhs = synthesize(&f, x.into()).unwrap();
            assert!((lhs - rhs).norm() < 1e-3, "x = {x}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn plancherel_for_random_spectra() {
    let grid = RealGrid::default_time();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for a in [0.5, 1.0, 2.0] {
        let f = BandlimitedSignal::random(band(a), 1025, &mut rng).unwrap();
        let time = synthesize_grid(&f, grid).l2_norm().powi(2);
        let freq = 2.0 * PI * f.spectrum.energy();
        assert!((time - freq).abs() < 1e-3 * freq, "{time} vs {freq}");
    }
}

#[test]
fn sinc_transform_is_flat() {
    let f = BandlimitedSignal::sinc(band(PI), 2049).unwrap();
    let x = synthesize_grid(&f, RealGrid::default_time());
    let s = forward_transform(&x).unwrap();
    let mut worst: f64 = 0.0;
    for (k, v) in s.values.iter().enumerate() {
        let w = s.node(k);
        // Gibbs ringing at the band edges is excluded
        if (w.abs() - PI).abs() < 0.1 {
            continue;
        }
        let exact = if w.abs() < PI { 1.0 / (2.0 * PI) } else { 0.0 };
        worst = worst.max((v - exact).norm());
    }
    assert!(worst < 1e-2, "{worst}");
    let zero = forward_transform(&GridSamples::zeros(RealGrid::default_time())).unwrap();
    assert!(zero.values.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn round_trip_through_band_nodes() {
    let grid = RealGrid::default_time();
    let b = band(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = BandlimitedSignal::random(b, 2049, &mut rng).unwrap();
    let x = synthesize_grid(&f, grid);
    let back = BandlimitedSignal::new(analyze_band(&x, b, 2049).unwrap(), "analyzed");
    let mut worst: f64 = 0.0;
    for t in (0..grid.count).step_by(37).map(|i| grid.point(i)) {
        worst = worst
            .max((synthesize(&back, t.into()).unwrap() - synthesize(&f, t.into()).unwrap()).norm());
    }
    assert!(worst < 1e-4, "{worst}");
    let inv = forward_transform(&x).unwrap().inverse();
    let err = x
        .sub(&inv)
        .unwrap()
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()));
    assert!(err < 1e-12);
}

#[test]
fn short_window_refused() {
    let f = BandlimitedSignal::sinc(band(1.0), 257).unwrap();
    let x = synthesize_grid(&f, RealGrid::new(-5.0, 0.05, 201).unwrap());
    assert!(matches!(
        forward_transform(&x),
        Err(Error::WindowTooShort { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kernel_hermitian(a in 0.1f64..5.0, zr in -20.0f64..20.0, zi in -3.0f64..3.0,
                        wr in -20.0f64..20.0, wi in -3.0f64..3.0) {
        let b = band(a);
        let z = c(zr, zi);
        let w = c(wr, wi);
        let k = pw_kernel(b, z, w);
        let kt = pw_kernel(b, w, z);
        prop_assert!((k - kt.conj()).norm() <= 1e-14 * k.norm().max(1e-300));
    }

    #[test]
    fn kernel_psd(a in 0.2f64..4.0, nodes in proptest::collection::btree_set(-400i32..400, 1..20)) {
        let nodes: Vec<f64> = nodes.into_iter().map(|n| n as f64 * 0.05).collect();
        let g = gram_on_nodes(&WarpedKernel::new(band(a), Warp::identity()), nodes, 0.0).unwrap();
        prop_assert!(g.min_eigenvalue() >= -1e-10);
    }
}
