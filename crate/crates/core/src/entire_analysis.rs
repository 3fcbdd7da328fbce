//! Growth of entire functions: order and type from Maclaurin coefficients,
//! mean type from arc integrals of `log|f|`.
//!
//! Coefficients are held in log-polar form so sequences like `1/n!` stay
//! representable far past the point where they underflow an `f64`.

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::simpson_weights;

/// Smallest `n_max` the coefficient estimators accept.
pub const MIN_N_MAX: usize = 8;

/// Intervals per arc for the mean-type integral.
pub const ARC_INTERVALS: usize = 2048;

/// Floor applied to `log|f|` on the arcs.
pub const LOG_MODULUS_FLOOR: f64 = -1.0e3;

pub const DEFAULT_RADII: [f64; 3] = [25.0, 50.0, 100.0];

/// A complex number stored as `(ln|z|, arg z)`. Zero has `ln_abs = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        ln_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn new(ln_abs: f64, arg: f64) -> Self {
        LogComplex { ln_abs, arg }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    /// Back to rectangular form; underflows to zero when out of range.
    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.ln_abs.exp(), self.arg)
    }
}

impl From<Complex64> for LogComplex {
    fn from(z: Complex64) -> Self {
        if z.norm() == 0.0 {
            LogComplex::ZERO
        } else {
            LogComplex::new(z.norm().ln(), z.arg())
        }
    }
}

/// Maclaurin coefficients `a_0 … a_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    coeffs: Vec<LogComplex>,
    exact_polynomial: bool,
}

impl CoefficientSequence {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::from_log(coeffs.into_iter().map(LogComplex::from).collect())
    }

    pub fn from_log(coeffs: Vec<LogComplex>) -> Result<Self> {
        if coeffs
            .iter()
            .any(|c| c.ln_abs.is_nan() || c.ln_abs == f64::INFINITY)
        {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        if coeffs.iter().all(LogComplex::is_zero) {
            return Err(Error::AllZero);
        }
        Ok(CoefficientSequence {
            coeffs,
            exact_polynomial: false,
        })
    }

    /// Builds `a_n = term(n)` for `n = 0..=n_max`.
    pub fn from_fn(n_max: usize, term: impl Fn(usize) -> LogComplex) -> Result<Self> {
        Self::from_log((0..=n_max).map(term).collect())
    }

    /// Marks the sequence as an exact polynomial rather than a truncated
    /// power series, so its order is zero by definition.
    pub fn exact_polynomial(mut self) -> Self {
        self.exact_polynomial = true;
        self
    }

    pub fn is_exact_polynomial(&self) -> bool {
        self.exact_polynomial
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[LogComplex] {
        &self.coeffs
    }

    /// `[n_max / 2, n_max]`, the window standing in for the limsup.
    pub fn tail_window(&self) -> (usize, usize) {
        (self.n_max() / 2, self.n_max())
    }

    /// `(n, ln(1/|a_n|))` over nonzero coefficients in the tail window.
    fn tail_points(&self) -> Result<Vec<(usize, f64)>> {
        if self.n_max() < MIN_N_MAX {
            let (lo, hi) = self.tail_window();
            return Err(Error::WindowEmpty { lo, hi });
        }
        let (lo, hi) = self.tail_window();
        let pts: Vec<_> = (lo.max(2)..=hi)
            .filter(|&n| !self.coeffs[n].is_zero())
            .map(|n| (n, -self.coeffs[n].ln_abs))
            .collect();
        if pts.is_empty() {
            return Err(Error::WindowEmpty { lo, hi });
        }
        Ok(pts)
    }
}

/// Order and type estimates plus the window they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEstimate {
    pub order_rho: f64,
    /// Raw `max n log n / log(1/|a_n|)` over the window, kept for comparison.
    pub order_tail_max: f64,
    /// `None` means infinite or undetermined (order zero or infinite).
    pub type_sigma: Option<f64>,
    pub tail_window: (usize, usize),
    pub mean_type_upper: Option<f64>,
    pub mean_type_lower: Option<f64>,
}

impl GrowthEstimate {
    pub fn from_coefficients(c: &CoefficientSequence) -> Result<Self> {
        let rho = estimate_order(c)?;
        let tail_max = if c.is_exact_polynomial() {
            0.0
        } else {
            order_tail_max(c)?
        };
        let sigma = if rho > 0.0 && rho.is_finite() {
            Some(estimate_type(c, rho)?)
        } else {
            None
        };
        Ok(GrowthEstimate {
            order_rho: rho,
            order_tail_max: tail_max,
            type_sigma: sigma,
            tail_window: c.tail_window(),
            mean_type_upper: None,
            mean_type_lower: None,
        })
    }

    /// Adds mean types in both half-planes at the given radii.
    pub fn with_mean_types<F>(mut self, f: F, radii: &[f64]) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        self.mean_type_upper = Some(mean_type(&f, HalfPlane::Upper, radii)?.value);
        self.mean_type_lower = Some(mean_type(&f, HalfPlane::Lower, radii)?.value);
        Ok(self)
    }

    /// Exponential type predicted by the larger of the two mean types.
    pub fn type_from_mean_types(&self) -> Option<f64> {
        match (self.mean_type_upper, self.mean_type_lower) {
            (Some(u), Some(l)) => Some(u.max(l)),
            _ => None,
        }
    }
}

fn order_tail_max(c: &CoefficientSequence) -> Result<f64> {
    let pts = c.tail_points()?;
    Ok(pts
        .iter()
        .map(|&(n, l)| {
            let n = n as f64;
            if l <= 0.0 {
                f64::INFINITY
            } else {
                n * n.ln() / l
            }
        })
        .fold(0.0, f64::max))
}

/// Order `ρ = limsup n log n / log(1/|a_n|)`.
///
/// For regular sequences `log(1/|a_n|)/n = (1/ρ) log n + β + γ log(n)/n + δ/n + …`,
/// and the raw ratio approaches `ρ` only like `1/log n`. The slope against
/// `log n` is fitted by least squares over the nonzero tail instead, which
/// recovers `ρ` to a few parts in 10⁵ by `n_max = 400`. Fewer than six tail
/// points fall back to the raw windowed maximum.
pub fn estimate_order(c: &CoefficientSequence) -> Result<f64> {
    if c.is_exact_polynomial() {
        return Ok(0.0);
    }
    let pts = c.tail_points()?;
    if pts.len() < 6 {
        return order_tail_max(c);
    }
    let rows = pts.len();
    let mut design = DMatrix::<f64>::zeros(rows, 4);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, &(n, l)) in pts.iter().enumerate() {
        let n = n as f64;
        design[(i, 0)] = n.ln();
        design[(i, 1)] = 1.0;
        design[(i, 2)] = n.ln() / n;
        design[(i, 3)] = 1.0 / n;
        rhs[i] = l / n;
    }
    let scales: Vec<f64> = (0..4).map(|j| design.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / s);
    }
    let fit = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Invalid(format!("order regression failed: {e}")))?;
    let slope = fit[0] / scales[0];
    if !slope.is_finite() || slope <= 1e-12 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / slope)
}

/// Type `σ = (1/ρe) limsup n |a_n|^{ρ/n}` with the windowed maximum as the limsup.
pub fn estimate_type(c: &CoefficientSequence, rho: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::NonpositiveOrder(rho));
    }
    let pts = c.tail_points()?;
    let peak = pts
        .iter()
        .map(|&(n, l)| {
            let n = n as f64;
            n * (-rho * l / n).exp()
        })
        .fold(0.0, f64::max);
    Ok(peak / (rho * E))
}

/// Coefficients of `f(sz)`: `a_n s^n`.
///
/// Fails only when `s = 0` and `a_0 = 0`, which leaves nothing nonzero.
pub fn scale_coefficients(c: &CoefficientSequence, s: Complex64) -> Result<CoefficientSequence> {
    let ls = LogComplex::from(s);
    let coeffs = c
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| {
            if n == 0 {
                *a
            } else if a.is_zero() || ls.is_zero() {
                LogComplex::ZERO
            } else {
                let nf = n as f64;
                LogComplex::new(a.ln_abs + nf * ls.ln_abs, a.arg + nf * ls.arg)
            }
        })
        .collect();
    let mut out = CoefficientSequence::from_log(coeffs)?;
    out.exact_polynomial = c.exact_polynomial;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanTypeEstimate {
    /// Estimate at the largest radius.
    pub value: f64,
    /// Difference between the last two radii; `None` with a single radius.
    pub convergence: Option<f64>,
    pub per_radius: Vec<(f64, f64)>,
}

/// Mean type `h = lim (2/πr) ∫₀^π log|f(re^{±iθ})| sin θ dθ`.
///
/// The lower half-plane uses the reflected arc `re^{-iθ}`.
pub fn mean_type<F>(f: &F, half_plane: HalfPlane, radii: &[f64]) -> Result<MeanTypeEstimate>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    if radii.is_empty() {
        return Err(Error::Invalid("no radii given".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) || radii.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Invalid(
            "radii must be positive and increasing".into(),
        ));
    }
    let nodes = ARC_INTERVALS + 1;
    let h = PI / ARC_INTERVALS as f64;
    let weights = simpson_weights(nodes, h);
    let sign = match half_plane {
        HalfPlane::Upper => 1.0,
        HalfPlane::Lower => -1.0,
    };
    let mut per_radius = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            let theta = i as f64 * h;
            let z = Complex64::from_polar(r, sign * theta);
            let v = f(z);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { radius: r });
            }
            let lm = v.norm().ln().max(LOG_MODULUS_FLOOR);
            acc += w * lm * theta.sin();
        }
        per_radius.push((r, 2.0 * acc / (PI * r)));
    }
    let value = per_radius.last().map(|p| p.1).unwrap_or(0.0);
    let convergence = if per_radius.len() >= 2 {
        let k = per_radius.len();
        Some((per_radius[k - 1].1 - per_radius[k - 2].1).abs())
    } else {
        None
    };
    Ok(MeanTypeEstimate {
        value,
        convergence,
        per_radius,
    })
}
