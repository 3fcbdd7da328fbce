//! Warp maps `φ` with real coefficients, their classification against the
//! Paley-Wiener boundedness results, and measure pull-back certificates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paley_wiener::BandSpec;

pub const DEFAULT_PROBE_WINDOW: (f64, f64) = (-50.0, 50.0);
pub const DEFAULT_GRID_SPACING: f64 = 1e-3;

const MAX_PROBE_SAMPLES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarpKind {
    Affine,
    Polynomial,
}

/// Real-coefficient polynomial warp, coefficients in ascending degree.
///
/// Affine warps `cz + d` are stored as `[d, c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Warp {
    kind: WarpKind,
    coefficients: Vec<f64>,
}

impl Warp {
    pub fn new(kind: WarpKind, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite warp coefficient".into()));
        }
        let mut coefficients = coefficients;
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        if coefficients.len() < 2 {
            return Err(Error::ConstantWarp);
        }
        if kind == WarpKind::Affine && coefficients.len() != 2 {
            return Err(Error::Invalid(format!(
                "affine warp takes 2 coefficients, got degree {}",
                coefficients.len() - 1
            )));
        }
        Ok(Warp { kind, coefficients })
    }

    /// `φ(z) = cz + d`.
    pub fn affine(c: f64, d: f64) -> Result<Self> {
        Warp::new(WarpKind::Affine, vec![d, c])
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        Warp::new(WarpKind::Polynomial, coefficients)
    }

    pub fn identity() -> Self {
        Warp {
            kind: WarpKind::Affine,
            coefficients: vec![0.0, 1.0],
        }
    }

    /// `z³ + z`.
    pub fn cubic_example() -> Self {
        Warp {
            kind: WarpKind::Polynomial,
            coefficients: vec![0.0, 1.0, 0.0, 1.0],
        }
    }

    pub fn kind(&self) -> WarpKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coefficients.last().unwrap()
    }

    /// `(c, d)` when `φ(z) = cz + d`, whichever kind it was declared as.
    pub fn affine_parts(&self) -> Option<(f64, f64)> {
        (self.degree() == 1).then(|| (self.coefficients[1], self.coefficients[0]))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        horner(&self.coefficients, x)
    }

    pub fn derivative_coefficients(&self) -> Vec<f64> {
        derivative(&self.coefficients)
    }

    pub fn derivative_real(&self, x: f64) -> f64 {
        horner(&self.derivative_coefficients(), x)
    }

    /// Solves `φ(x) = y` for a monotone warp by bracketing and bisection.
    pub fn inverse_real(&self, y: f64) -> Result<f64> {
        let report = check_measure_bound(self, DEFAULT_PROBE_WINDOW, DEFAULT_GRID_SPACING)?;
        if !report.monotone {
            return Err(Error::NonMonotoneWarp);
        }
        Ok(self.inverse_monotone(y, report.increasing))
    }

    fn inverse_monotone(&self, y: f64, increasing: bool) -> f64 {
        let g = |x: f64| {
            let v = self.eval_real(x) - y;
            if increasing {
                v
            } else {
                -v
            }
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        while g(lo) > 0.0 {
            lo *= 2.0;
        }
        while g(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `φ⁻¹([u, v])` for a monotone warp, as a sorted interval.
    pub fn preimage_interval(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        let report = check_measure_bound(self, DEFAULT_PROBE_WINDOW, DEFAULT_GRID_SPACING)?;
        if !report.monotone {
            return Err(Error::NonMonotoneWarp);
        }
        Ok(self.preimage_monotone(u, v, report.increasing))
    }

    /// [`Warp::preimage_interval`] once monotonicity is already known.
    pub(crate) fn preimage_monotone(&self, u: f64, v: f64, increasing: bool) -> (f64, f64) {
        let x1 = self.inverse_monotone(u, increasing);
        let x2 = self.inverse_monotone(v, increasing);
        (x1.min(x2), x1.max(x2))
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationReason {
    AffineContractive,
    AffineExpansive,
    NonAffine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpClassification {
    pub preserves_pw: bool,
    /// `|c|`: `C_φ` maps `B²_a` into `B²_{|c|a}`. Absent for non-affine warps.
    pub target_band_factor: Option<f64>,
    pub reason: ClassificationReason,
}

/// Affine `cz + d` with `0 < |c| ≤ 1` keeps `B²_a` invariant; any affine warp
/// maps `B²_a` into `B²_{|c|a}`; nothing else lands in a Paley-Wiener space.
pub fn classify(w: &Warp) -> WarpClassification {
    match w.affine_parts() {
        Some((c, _)) => {
            let contractive = c.abs() <= 1.0;
            WarpClassification {
                preserves_pw: contractive,
                target_band_factor: Some(c.abs()),
                reason: if contractive {
                    ClassificationReason::AffineContractive
                } else {
                    ClassificationReason::AffineExpansive
                },
            }
        }
        None => WarpClassification {
            preserves_pw: false,
            target_band_factor: None,
            reason: ClassificationReason::NonAffine,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedBand {
    pub target: BandSpec,
    /// `[r - |c|a, s + |c|a]`, the support of `m̂ * (C_φ f)^`.
    pub support: (f64, f64),
}

/// Target bandwidth `A = max(|r - |c|a|, |s + |c|a|)` for `M_m C_φ` with
/// `φ(z) = cz + d` and `supp m̂ ⊆ [r, s]`.
pub fn weighted_target_band(band: BandSpec, c: f64, r: f64, s: f64) -> Result<WeightedBand> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::ConstantWarp);
    }
    if !(r <= s) {
        return Err(Error::EmptySupport { r, s });
    }
    let spread = c.abs() * band.a();
    let lo = r - spread;
    let hi = s + spread;
    let target = BandSpec::new((r - spread).abs().max((s + spread).abs()))?;
    Ok(WeightedBand {
        target,
        support: (lo, hi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateMethod {
    Symbolic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureBoundReport {
    pub monotone: bool,
    pub increasing: bool,
    /// `inf |φ'|` over the real line (zero when not monotone).
    pub inf_derivative: f64,
    /// `sup 1/|φ'|`, the constant in `m(φ⁻¹E) ≤ c·m(E)`.
    pub bound_c: Option<f64>,
    pub mutual_abs_continuity: bool,
    pub method: CertificateMethod,
}

impl MeasureBoundReport {
    fn build(monotone: bool, increasing: bool, inf: f64, method: CertificateMethod) -> Self {
        let certified = monotone && inf > 0.0;
        MeasureBoundReport {
            monotone,
            increasing,
            inf_derivative: if monotone { inf } else { 0.0 },
            bound_c: certified.then(|| 1.0 / inf),
            mutual_abs_continuity: certified,
            method,
        }
    }
}

/// Certifies `m(φ⁻¹E) ≤ c·m(E)` for a polynomial warp.
///
/// Degree ≤ 3 is decided in closed form from the discriminant of `φ'`. Higher
/// degrees locate the critical points of `φ'` (real roots of `φ''`) inside the
/// Cauchy root bound, so the infimum is global rather than window-limited;
/// the probe window is sampled as well as a cross-check.
pub fn check_measure_bound(
    w: &Warp,
    probe_window: (f64, f64),
    grid_spacing: f64,
) -> Result<MeasureBoundReport> {
    if !(grid_spacing > 0.0) || !(probe_window.0 < probe_window.1) {
        return Err(Error::Invalid("bad probe window or spacing".into()));
    }
    let d1 = w.derivative_coefficients();
    let lead_sign = w.leading() > 0.0;
    match w.degree() {
        1 => {
            let c = w.coefficients[1];
            Ok(MeasureBoundReport::build(
                true,
                c > 0.0,
                c.abs(),
                CertificateMethod::Symbolic,
            ))
        }
        2 => Ok(MeasureBoundReport::build(
            false,
            lead_sign,
            0.0,
            CertificateMethod::Symbolic,
        )),
        3 => {
            // φ' = A x² + B x + C, extremum C - B²/4A at x = -B/2A
            let (c, b, a) = (d1[0], d1[1], d1[2]);
            let vertex = c - b * b / (4.0 * a);
            let monotone = vertex == 0.0 || (vertex > 0.0) == (a > 0.0);
            Ok(MeasureBoundReport::build(
                monotone,
                a > 0.0,
                vertex.abs(),
                CertificateMethod::Symbolic,
            ))
        }
        _ => Ok(numeric_certificate(w, &d1, probe_window, grid_spacing)),
    }
}

fn numeric_certificate(
    w: &Warp,
    d1: &[f64],
    probe_window: (f64, f64),
    grid_spacing: f64,
) -> MeasureBoundReport {
    let increasing = w.leading() > 0.0;
    if w.degree().is_multiple_of(2) {
        return MeasureBoundReport::build(false, increasing, 0.0, CertificateMethod::Numeric);
    }
    let sign = if increasing { 1.0 } else { -1.0 };
    let oriented = |x: f64| sign * horner(d1, x);
    let d2 = derivative(d1);
    let lead = *d2.last().unwrap();
    let bound = 1.0 + d2.iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);

    let mut inf = f64::INFINITY;
    for root in real_roots(&d2, -bound, bound, grid_spacing) {
        inf = inf.min(oriented(root));
    }
    let (lo, hi) = probe_window;
    let steps = (((hi - lo) / grid_spacing).ceil() as usize).clamp(1, MAX_PROBE_SAMPLES);
    let h = (hi - lo) / steps as f64;
    for i in 0..=steps {
        inf = inf.min(oriented(lo + i as f64 * h));
    }
    let monotone = inf >= 0.0;
    MeasureBoundReport::build(
        monotone,
        increasing,
        inf.max(0.0),
        CertificateMethod::Numeric,
    )
}

/// Sign-change roots of a polynomial on `[lo, hi]`, refined by bisection.
fn real_roots(coeffs: &[f64], lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let steps = (((hi - lo) / spacing).ceil() as usize).clamp(16, MAX_PROBE_SAMPLES);
    let h = (hi - lo) / steps as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = horner(coeffs, x0);
    for i in 1..=steps {
        let x1 = lo + i as f64 * h;
        let f1 = horner(coeffs, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let fm = horner(coeffs, m);
                if fm == 0.0 || m <= a || m >= b {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots
}

/// `b² < 3ac`: the cubic `ax³ + bx² + cx + d` is strictly monotone with
/// `φ'` bounded away from zero.
pub fn cubic_criterion(a: f64, b: f64, c: f64) -> Result<bool> {
    if a == 0.0 {
        return Err(Error::DegenerateLeading);
    }
    Ok(b * b < 3.0 * a * c)
}
