use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warpband::paley_wiener::{
    pw_kernel, synthesize, BandSpec, BandlimitedSignal, RealGrid, Spectrum,
};
use warpband::range_rkhs::{
    build_gram, gram_on_nodes, injectivity_probe, project_onto_kernels, pullback_norm_check,
    range_inner_product, warped_kernel_eval, ExpansionCoefficients, GramSystem, WarpedKernel,
    DEFAULT_RIDGE,
};
use warpband::warps::Warp;
use warpband::Error;

fn kernel(a: f64, w: Warp) -> WarpedKernel {
    WarpedKernel::new(BandSpec::new(a).unwrap(), w)
}

fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn shifted_sinc(a: f64, n: f64) -> BandlimitedSignal {
    let s = Spectrum::from_fn(BandSpec::new(a).unwrap(), 2049, |w| {
        Complex64::from_polar(1.0 / (2.0 * PI), w * n)
    })
    .unwrap();
    BandlimitedSignal::new(s, "shifted sinc")
}

#[test]
fn kernel_factorizes_through_warp() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let w = Warp::cubic_example();
    let k = kernel(1.3, w.clone());
    for _ in 0..100 {
        let z = random_complex(&mut rng, 2.0);
        let v = random_complex(&mut rng, 2.0);
        assert_eq!(
            warped_kernel_eval(&k, z, v),
            pw_kernel(k.band, w.eval(z), w.eval(v))
        );
        let diff = warped_kernel_eval(&k, z, v) - warped_kernel_eval(&k, v, z).conj();
        assert!(diff.norm() <= 1e-12 * warped_kernel_eval(&k, z, v).norm().max(1e-300));
    }
    let k = kernel(1.0, Warp::cubic_example());
    let v = warped_kernel_eval(&k, 1.0.into(), 0.0.into());
    assert!((v.re - 2f64.sin() / (2.0 * PI)).abs() < 1e-15);
    assert!((warped_kernel_eval(&k, 0.0.into(), 0.0.into()).re - 1.0 / PI).abs() < 1e-15);
}

#[test]
fn identity_gram_is_identity() {
    let g = build_gram(&kernel(PI, Warp::identity()), 10, 0.0).unwrap();
    assert_eq!(g.dimension(), 21);
    let defect = (&g.matrix - DMatrix::<Complex64>::identity(21, 21))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()));
    assert!(defect < 1e-12, "{defect}");
    let single = build_gram(&kernel(2.5, Warp::cubic_example()), 0, 0.0).unwrap();
    assert_eq!(single.dimension(), 1);
    assert!((single.matrix[(0, 0)].re - 2.5 / PI).abs() < 1e-15);
}

#[test]
fn cubic_gram_is_hermitian_psd() {
    for n in [10, 40] {
        let g = build_gram(&kernel(1.0, Warp::cubic_example()), n, 0.0).unwrap();
        assert!(g.hermitian_defect() < 1e-12);
        assert!(
            g.min_eigenvalue() >= -1e-10,
            "N = {n}: {}",
            g.min_eigenvalue()
        );
        eprintln!("N = {n}: condition estimate {:.3e}", g.condition_estimate());
    }
    for w in [
        Warp::affine(0.4, 0.2).unwrap(),
        Warp::polynomial(vec![0.0, 1.0, 0.5, 0.2]).unwrap(),
    ] {
        let g = build_gram(&kernel(1.0, w), 20, DEFAULT_RIDGE).unwrap();
        assert!(g.min_eigenvalue() >= -1e-10);
    }
}

#[test]
fn indefinite_matrix_is_refused() {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[1.0, 2.0, 2.0, 1.0].map(|v: f64| Complex64::new(v, 0.0)),
    );
    assert!(matches!(
        GramSystem::from_matrix(vec![0.0, 1.0], m, 0.0),
        Err(Error::FactorizationFailure { .. })
    ));
    // singular but PSD: accepted through the eigen fallback
    let m = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
    let g = GramSystem::from_matrix(vec![0.0, 1.0], m, 0.0).unwrap();
    assert!(g.used_eigen_fallback());
}

#[test]
fn inner_product_examples() {
    let k = kernel(1.0, Warp::cubic_example());
    let g = build_gram(&k, 3, DEFAULT_RIDGE).unwrap();
    let e0 = ExpansionCoefficients::unit(g.nodes.clone(), 3);
    let v = range_inner_product(&g, &e0, &e0).unwrap();
    assert!((v.re - 1.0 / PI).abs() < 1e-15 && v.im == 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = ExpansionCoefficients::new(
        g.nodes.clone(),
        (0..7).map(|_| random_complex(&mut rng, 1.0)).collect(),
    )
    .unwrap();
    let zero =
        ExpansionCoefficients::new(g.nodes.clone(), vec![Complex64::new(0.0, 0.0); 7]).unwrap();
    assert_eq!(
        range_inner_product(&g, &x, &zero).unwrap(),
        Complex64::new(0.0, 0.0)
    );

    let id = build_gram(&kernel(PI, Warp::identity()), 5, 0.0).unwrap();
    let e0 = ExpansionCoefficients::unit(id.nodes.clone(), 5);
    let e1 = ExpansionCoefficients::unit(id.nodes.clone(), 6);
    assert!(range_inner_product(&id, &e0, &e1).unwrap().norm() < 1e-15);

    let other = ExpansionCoefficients::unit(vec![0.0, 1.0], 0);
    assert!(matches!(
        range_inner_product(&g, &other, &other),
        Err(Error::NodeMismatch)
    ));
}

#[test]
fn projection_examples() {
    let g = build_gram(&kernel(1.0, Warp::cubic_example()), 2, DEFAULT_RIDGE).unwrap();
    for j in 0..g.dimension() {
        let column: Vec<Complex64> = g.matrix.column(j).iter().cloned().collect();
        let p = project_onto_kernels(&g, &column).unwrap();
        for (i, c) in p.coefficients.coeffs.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((c - expected).norm() < 1e-6, "column {j}, entry {i}: {c}");
        }
    }
    let zero = project_onto_kernels(&g, &[Complex64::new(0.0, 0.0); 5]).unwrap();
    assert!(zero.coefficients.coeffs.iter().all(|c| c.norm() == 0.0));
    assert!(matches!(
        project_onto_kernels(&g, &[Complex64::new(1.0, 0.0)]),
        Err(Error::NodeMismatch)
    ));

    let id = build_gram(&kernel(PI, Warp::identity()), 20, DEFAULT_RIDGE).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = BandlimitedSignal::random(BandSpec::new(PI).unwrap(), 1025, &mut rng).unwrap();
    let samples: Vec<Complex64> = id
        .nodes
        .iter()
        .map(|&n| synthesize(&f, n.into()).unwrap())
        .collect();
    let p = project_onto_kernels(&id, &samples).unwrap();
    for (c, s) in p.coefficients.coeffs.iter().zip(&samples) {
        assert!((c - s).norm() < 1e-9);
    }
}

#[test]
fn pullback_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = BandlimitedSignal::random(BandSpec::new(PI).unwrap(), 2049, &mut rng).unwrap();
    let r = pullback_norm_check(&f, &Warp::identity(), 40).unwrap();
    assert!(r.relative_gap() < 1e-2, "{r:?}");

    let zero = BandlimitedSignal::zero(BandSpec::new(1.0).unwrap(), 33).unwrap();
    let r = pullback_norm_check(&zero, &Warp::identity(), 5).unwrap();
    assert_eq!((r.range_norm, r.source_norm), (0.0, 0.0));

    let sinc = BandlimitedSignal::sinc(BandSpec::new(1.0).unwrap(), 2049).unwrap();
    for n in [20, 40, 80] {
        let r = pullback_norm_check(&sinc, &Warp::cubic_example(), n).unwrap();
        eprintln!(
            "cubic, N = {n}: range {:.6} source {:.6} gap {:.3e}",
            r.range_norm,
            r.source_norm,
            r.relative_gap()
        );
        assert!(r.range_norm.is_finite());
    }

    let flat = Warp::polynomial(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(matches!(
        pullback_norm_check(&sinc, &flat, 5),
        Err(Error::HypothesisFailed(_))
    ));
}

#[test]
fn injectivity_examples() {
    let grid = RealGrid::default_time();
    let f1 = shifted_sinc(1.0, 0.0);
    let f2 = shifted_sinc(1.0, 1.0);
    let d = injectivity_probe(&Warp::cubic_example(), &f1, &f2, grid).unwrap();
    // at x = 0 the warped signals differ by f1(0) - f2(0) = 1/π - sin(1)/π
    assert!(d > 0.0);
    let point =
        (synthesize(&f1, 0.0.into()).unwrap() - synthesize(&f2, 0.0.into()).unwrap()).norm();
    assert!((point - (1.0 - 1f64.sin()) / PI).abs() < 1e-9);

    assert!(matches!(
        injectivity_probe(&Warp::cubic_example(), &f1, &f1, grid),
        Err(Error::IndistinguishableInputs { .. })
    ));

    let direct = warpband::paley_wiener::synthesize_grid(&f1, grid)
        .sub(&warpband::paley_wiener::synthesize_grid(&f2, grid))
        .unwrap()
        .l2_norm();
    let via_identity = injectivity_probe(&Warp::identity(), &f1, &f2, grid).unwrap();
    assert!((via_identity - direct).abs() < 1e-12 * direct);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inner_product_positive(seed in 0u64..10_000, n in 1usize..15, a in 0.3f64..3.0) {
        let g = build_gram(&kernel(a, Warp::cubic_example()), n, DEFAULT_RIDGE).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ExpansionCoefficients::new(
            g.nodes.clone(),
            (0..g.dimension()).map(|_| random_complex(&mut rng, 1.0)).collect(),
        ).unwrap();
        prop_assert!(range_inner_product(&g, &x, &x).unwrap().re >= -1e-10);
    }

    #[test]
    fn reproducing_in_range(seed in 0u64..10_000, n in 1usize..10, b in -1.0f64..1.0) {
        let w = Warp::polynomial(vec![0.0, b * b / 3.0 + 0.5, b, 1.0]).unwrap();
        let k = kernel(1.0, w);
        let g = build_gram(&k, n, DEFAULT_RIDGE).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ExpansionCoefficients::new(
            g.nodes.clone(),
            (0..g.dimension()).map(|_| random_complex(&mut rng, 1.0)).collect(),
        ).unwrap();
        for (m, &node) in g.nodes.iter().enumerate() {
            let em = ExpansionCoefficients::unit(g.nodes.clone(), m);
            let via_pairing = range_inner_product(&g, &a, &em).unwrap();
            let direct: Complex64 = a.nodes.iter().zip(&a.coeffs)
                .map(|(&x, c)| c * k.eval(node.into(), x.into()))
                .sum();
            prop_assert!((via_pairing - direct).norm() < 1e-9);
            prop_assert!((a.evaluate(&k, node.into()) - direct).norm() < 1e-9);
        }
    }
}

#[test]
fn gram_on_custom_nodes() {
    let g = gram_on_nodes(&kernel(PI, Warp::identity()), vec![-0.5, 0.5, 1.5], 0.0).unwrap();
    assert!((g.matrix[(0, 2)].re).abs() < 1e-15);
    assert!(matches!(
        gram_on_nodes(&kernel(1.0, Warp::identity()), vec![], 0.0),
        Err(Error::Invalid(_))
    ));
}
