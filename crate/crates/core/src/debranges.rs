//! de Branges–Rovnyak spaces `H(g)`.
//!
//! A structure function `g` is entire with `|g(z̄)| < |g(z)|` in the upper
//! half-plane. `H(g)` holds the entire `f` with `f/g ∈ L²(ℝ)` and both `f/g`,
//! `f*(z)/g(z)` of nonpositive mean type, where `f*(z) = conj f(z̄)`. With
//! `g(z) = e^{-iaz}` it is the Paley–Wiener space `B²_a`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entire_analysis::{mean_type, HalfPlane, DEFAULT_RADII};
use crate::error::{Error, Result};
use crate::paley_wiener::{GridSamples, RealGrid, EXPONENT_CAP};
use crate::quadrature::adaptive_simpson;
use crate::warps::{check_measure_bound, Warp, DEFAULT_GRID_SPACING, DEFAULT_PROBE_WINDOW};

/// Points sampled by the dominance gate.
pub const DOMINANCE_SAMPLES: usize = 200;
/// Height range `Im z` of the dominance samples.
pub const DOMINANCE_HEIGHTS: (f64, f64) = (0.01, 10.0);
/// Real-part range of the dominance samples.
pub const DOMINANCE_SPAN: f64 = 50.0;
const DOMINANCE_SEED: u64 = 0x6442_5220;
/// Real grid on which `g` must not vanish.
pub const NONVANISHING_STEP: f64 = 1e-2;
/// `|g(t)|` at or below this fraction of its grid peak counts as a zero.
pub const ZERO_RELATIVE: f64 = 1e-12;

/// Below this `|z - w̄|` the kernel uses the derivative of its numerator.
pub const KERNEL_SINGULAR_THRESHOLD: f64 = 1e-6;
pub const KERNEL_DIFF_STEP: f64 = 1e-4;

/// Window half-widths for the boundedness test.
pub const BOUNDEDNESS_WINDOWS: [f64; 3] = [25.0, 50.0, 100.0];
/// Allowed relative spread between window sups.
pub const BOUNDEDNESS_SPREAD: f64 = 0.01;

/// Partial integrals growing by more than this over every one of the last
/// three window doublings count as divergent.
pub const DIVERGENCE_RATIO: f64 = 1.05;

/// Mean types up to this value pass [`mean_type_gate`].
pub const MEAN_TYPE_TOLERANCE: f64 = 0.05;

/// Quadrature tolerance for `λ`.
pub const LAMBDA_TOL: f64 = 1e-10;

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum StructureKind {
    /// `g(z) = e^{-iaz}`.
    Exponential {
        a: f64,
    },
    /// `g(z) = p(z)·e^{-iaz}`, `p` with ascending coefficients.
    PolyExp {
        poly: Vec<Complex64>,
        a: f64,
    },
    Custom,
}

#[derive(Clone)]
pub struct StructureFunction {
    kind: StructureKind,
    evaluator: Evaluator,
    exponential_type: Option<f64>,
}

impl fmt::Debug for StructureFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureFunction")
            .field("kind", &self.kind)
            .field("exponential_type", &self.exponential_type)
            .finish()
    }
}

impl StructureFunction {
    pub fn exponential(a: f64) -> Result<Self> {
        check_rate(a)?;
        let evaluator: Evaluator =
            Arc::new(move |z: Complex64| (Complex64::new(0.0, -a) * z).exp());
        Self::validated(StructureKind::Exponential { a }, evaluator, Some(a))
    }

    pub fn poly_exp(poly: Vec<Complex64>, a: f64) -> Result<Self> {
        check_rate(a)?;
        let mut poly = poly;
        while poly.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            poly.pop();
        }
        if poly.is_empty() {
            return Err(Error::InvalidStructure("polynomial factor is zero".into()));
        }
        if poly.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidStructure(
                "non-finite polynomial coefficient".into(),
            ));
        }
        let p = poly.clone();
        let evaluator: Evaluator =
            Arc::new(move |z: Complex64| horner(&p, z) * (Complex64::new(0.0, -a) * z).exp());
        Self::validated(StructureKind::PolyExp { poly, a }, evaluator, Some(a))
    }

    /// In-process evaluator; `exponential_type` is optional metadata.
    pub fn custom<F>(g: F, exponential_type: Option<f64>) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        if let Some(t) = exponential_type {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidStructure(format!("bad exponential type {t}")));
            }
        }
        Self::validated(StructureKind::Custom, Arc::new(g), exponential_type)
    }

    fn validated(
        kind: StructureKind,
        evaluator: Evaluator,
        exponential_type: Option<f64>,
    ) -> Result<Self> {
        let s = StructureFunction {
            kind,
            evaluator,
            exponential_type,
        };
        if let Some(t) = s.exponential_type {
            let exponent = t * DOMINANCE_HEIGHTS.1;
            if exponent > EXPONENT_CAP {
                return Err(Error::Overflow {
                    exponent,
                    cap: EXPONENT_CAP,
                });
            }
        }
        s.check_dominance()?;
        s.check_nonvanishing()?;
        Ok(s)
    }

    fn check_dominance(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(DOMINANCE_SEED);
        for _ in 0..DOMINANCE_SAMPLES {
            let z = Complex64::new(
                rng.gen_range(-DOMINANCE_SPAN..=DOMINANCE_SPAN),
                rng.gen_range(DOMINANCE_HEIGHTS.0..=DOMINANCE_HEIGHTS.1),
            );
            let upper = self.eval(z).norm();
            let lower = self.eval(z.conj()).norm();
            if !upper.is_finite() || !lower.is_finite() {
                return Err(Error::InvalidStructure(format!("g is not finite near {z}")));
            }
            if !(lower < upper) {
                return Err(Error::InvalidStructure(format!(
                    "|g(z̄)| < |g(z)| fails at z = {z}"
                )));
            }
        }
        Ok(())
    }

    fn check_nonvanishing(&self) -> Result<()> {
        let (lo, hi) = DEFAULT_PROBE_WINDOW;
        let grid = RealGrid::spanning(lo, hi, NONVANISHING_STEP)?;
        let values: Vec<(f64, Complex64)> =
            grid.points().map(|t| (t, self.eval(t.into()))).collect();
        let peak = values.iter().fold(0.0f64, |m, (_, v)| m.max(v.norm()));
        for (t, v) in values {
            if !(v.norm() > ZERO_RELATIVE * peak) || !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::StructureZeroOnGrid { t });
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &StructureKind {
        &self.kind
    }

    pub fn exponential_type(&self) -> Option<f64> {
        self.exponential_type
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.evaluator)(z)
    }

    /// `f*(z) = conj g(z̄)`.
    pub fn reflected(&self, z: Complex64) -> Complex64 {
        self.eval(z.conj()).conj()
    }

    /// Degree of the polynomial factor when known.
    fn poly_degree(&self) -> Option<usize> {
        match &self.kind {
            StructureKind::Exponential { .. } => Some(0),
            StructureKind::PolyExp { poly, .. } => Some(poly.len() - 1),
            StructureKind::Custom => None,
        }
    }
}

fn check_rate(a: f64) -> Result<()> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidStructure(format!(
            "exponential rate must be nonnegative, got {a}"
        )));
    }
    Ok(())
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// `(i/2)(g(z)conj g(w) - conj g(z̄) g(w̄)) / π(z - w̄)`.
pub fn dbr_kernel(s: &StructureFunction, z: Complex64, w: Complex64) -> Result<Complex64> {
    if let Some(t) = s.exponential_type {
        let exponent = t * (z.im.abs().max(w.im.abs()) + KERNEL_DIFF_STEP);
        if exponent > EXPONENT_CAP {
            return Err(Error::Overflow {
                exponent,
                cap: EXPONENT_CAP,
            });
        }
    }
    let gw = s.eval(w).conj();
    let gw_bar = s.eval(w.conj());
    let numerator = |zeta: Complex64| s.eval(zeta) * gw - s.reflected(zeta) * gw_bar;
    let half_i = Complex64::new(0.0, 0.5);
    let d = z - w.conj();
    let k = if d.norm() < KERNEL_SINGULAR_THRESHOLD {
        // removable singularity: numerator'(w̄), Richardson-extrapolated
        let centre = w.conj();
        let diff = |h: f64| (numerator(centre + h) - numerator(centre - h)) / (2.0 * h);
        let coarse = diff(KERNEL_DIFF_STEP);
        let fine = diff(0.5 * KERNEL_DIFF_STEP);
        half_i * (fine * 4.0 - coarse) / (3.0 * PI)
    } else {
        half_i * numerator(z) / (d * PI)
    };
    if !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::Overflow {
            exponent: f64::INFINITY,
            cap: EXPONENT_CAP,
        });
    }
    Ok(k)
}

/// `‖f‖_{H(g)} = (∫ |f/g|²)^{1/2}` by the trapezoid rule on the grid.
///
/// Partial integrals over nested windows `L/8, L/4, L/2, L` around the grid
/// centre detect an integrand that is not integrable.
pub fn hg_norm(f: &GridSamples, s: &StructureFunction) -> Result<f64> {
    let grid = f.grid;
    let mut integrand = Vec::with_capacity(f.values.len());
    for (t, v) in grid.points().zip(&f.values) {
        let g = s.eval(t.into());
        if g.norm() == 0.0 || !g.re.is_finite() || !g.im.is_finite() {
            return Err(Error::StructureZeroOnGrid { t });
        }
        integrand.push((v / g).norm_sqr());
    }
    let ratios = nested_ratios(&integrand, grid);
    if ratios.iter().all(|r| *r > DIVERGENCE_RATIO) {
        return Err(Error::Diverging { ratios });
    }
    Ok(trapezoid(&integrand, grid.step).sqrt())
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// Growth ratios of the partial integrals over the last three doublings.
fn nested_ratios(values: &[f64], grid: RealGrid) -> Vec<f64> {
    let n = values.len();
    let mid = (n - 1) / 2;
    let half = mid.min(n - 1 - mid);
    let partial = |k: usize| {
        let r = half >> k;
        trapezoid(&values[mid - r..=mid + r], grid.step)
    };
    let sums: Vec<f64> = (0..4).rev().map(partial).collect();
    sums.windows(2).map(|w| growth_ratio(w[0], w[1])).collect()
}

fn growth_ratio(prev: f64, next: f64) -> f64 {
    if prev > 0.0 {
        next / prev
    } else if next > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub bounded: bool,
    pub c_estimate: f64,
    /// `(L, sup over [-L, L] of |g(at+b)/g(t)|)`.
    pub window_sups: Vec<(f64, f64)>,
    /// `|a|^deg · e^{σ Im b}`, the limit of the ratio as `|t| → ∞`.
    pub asymptotic: Option<f64>,
}

/// Probe for `|g(at+b)/g(t)| ≤ c` on ℝ, the sufficient condition for
/// `f ↦ f(az+b)` to be bounded on `H(g)`.
///
/// The probe grid must cover `[-100, 100]`.
pub fn affine_boundedness_test(
    s: &StructureFunction,
    a: f64,
    b: Complex64,
    probe: RealGrid,
) -> Result<BoundednessReport> {
    if !(a != 0.0 && a.abs() <= 1.0) || !a.is_finite() {
        return Err(Error::HypothesisViolated(format!(
            "need 0 < |a| ≤ 1, got a = {a}"
        )));
    }
    let widest = BOUNDEDNESS_WINDOWS[BOUNDEDNESS_WINDOWS.len() - 1];
    if probe.start > -widest || probe.end() < widest {
        return Err(Error::Invalid(format!(
            "probe grid must cover [-{widest}, {widest}]"
        )));
    }
    let mut sups = [0.0f64; BOUNDEDNESS_WINDOWS.len()];
    for t in probe.points() {
        let den = s.eval(t.into());
        if den.norm() == 0.0 {
            return Err(Error::StructureZeroOnGrid { t });
        }
        let ratio = (s.eval(b + a * t) / den).norm();
        for (sup, l) in sups.iter_mut().zip(BOUNDEDNESS_WINDOWS) {
            if t.abs() <= l {
                *sup = sup.max(ratio);
            }
        }
    }
    let asymptotic = match (s.poly_degree(), s.exponential_type) {
        (Some(deg), Some(sigma)) => Some(a.abs().powi(deg as i32) * (sigma * b.im).exp()),
        _ => None,
    };
    let hi = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = sups.iter().cloned().fold(f64::INFINITY, f64::min);
    let bounded = hi.is_finite() && (hi - lo) <= BOUNDEDNESS_SPREAD * hi;
    Ok(BoundednessReport {
        bounded,
        c_estimate: asymptotic.map_or(hi, |v| hi.max(v)),
        window_sups: BOUNDEDNESS_WINDOWS.iter().cloned().zip(sups).collect(),
        asymptotic,
    })
}

/// `dλ = dt/|g(t)|²`, admitted only when `1/g` is square integrable.
#[derive(Debug, Clone)]
pub struct DbrMeasure {
    structure: StructureFunction,
    tol: f64,
}

impl DbrMeasure {
    /// Checks that `λ([-L, L])` flattens over the nested windows inside
    /// `probe_window`.
    pub fn new(structure: StructureFunction, probe_window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = probe_window;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::Invalid("probe window must contain 0".into()));
        }
        let m = DbrMeasure {
            structure,
            tol: LAMBDA_TOL,
        };
        let l = lo.abs().min(hi);
        let sums: Vec<f64> = (0..4)
            .rev()
            .map(|k| {
                let r = l / f64::from(1u32 << k);
                m.lambda(-r, r)
            })
            .collect();
        let ratios: Vec<f64> = sums.windows(2).map(|w| growth_ratio(w[0], w[1])).collect();
        if sums.iter().any(|v| !v.is_finite()) || ratios.iter().all(|r| *r > DIVERGENCE_RATIO) {
            return Err(Error::HypothesisViolated(format!(
                "1/g is not square integrable (window ratios {ratios:?})"
            )));
        }
        Ok(m)
    }

    pub fn structure(&self) -> &StructureFunction {
        &self.structure
    }

    /// Quadrature tolerance for [`DbrMeasure::lambda`].
    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Invalid(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        self.tol = tol;
        Ok(self)
    }

    /// `λ([u, v])`.
    pub fn lambda(&self, u: f64, v: f64) -> f64 {
        let density = |t: f64| 1.0 / self.structure.eval(t.into()).norm_sqr();
        adaptive_simpson(&density, u, v, self.tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbrBoundReport {
    /// Largest `λ(φ⁻¹E) / λ(E)` seen.
    pub c_estimate: f64,
    /// Intervals whose ratio exceeds the cap.
    pub violations: usize,
    pub ratios: Vec<f64>,
}

/// Measures `λ(φ⁻¹E) / λ(E)` on each interval `E`.
pub fn dbr_measure_bound_check(
    measure: &DbrMeasure,
    w: &Warp,
    intervals: &[(f64, f64)],
    cap: Option<f64>,
) -> Result<DbrBoundReport> {
    let report = check_measure_bound(w, DEFAULT_PROBE_WINDOW, DEFAULT_GRID_SPACING)?;
    if !report.monotone {
        return Err(Error::NonMonotoneWarp);
    }
    let mut ratios = Vec::with_capacity(intervals.len());
    for &(u, v) in intervals {
        if !(u < v) || !u.is_finite() || !v.is_finite() {
            return Err(Error::Invalid(format!("bad interval [{u}, {v}]")));
        }
        let (x1, x2) = w.preimage_monotone(u, v, report.increasing);
        ratios.push(measure.lambda(x1, x2) / measure.lambda(u, v));
    }
    let c_estimate = ratios.iter().cloned().fold(0.0, f64::max);
    let violations = cap.map_or(0, |c| ratios.iter().filter(|r| **r > c).count());
    Ok(DbrBoundReport {
        c_estimate,
        violations,
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanTypeGate {
    pub ratio_mean_type: f64,
    pub reflected_mean_type: f64,
    pub ratio_upper_ok: bool,
    pub reflected_ok: bool,
}

/// Finite-radius test that `f/g` and `f*/g` have nonpositive mean type in
/// the upper half-plane.
pub fn mean_type_gate<F>(f: &F, s: &StructureFunction) -> Result<MeanTypeGate>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let ratio = |z: Complex64| f(z) / s.eval(z);
    let reflected = |z: Complex64| f(z.conj()).conj() / s.eval(z);
    let r = mean_type(&ratio, HalfPlane::Upper, &DEFAULT_RADII)?.value;
    let q = mean_type(&reflected, HalfPlane::Upper, &DEFAULT_RADII)?.value;
    Ok(MeanTypeGate {
        ratio_mean_type: r,
        reflected_mean_type: q,
        ratio_upper_ok: r <= MEAN_TYPE_TOLERANCE,
        reflected_ok: q <= MEAN_TYPE_TOLERANCE,
    })
}
