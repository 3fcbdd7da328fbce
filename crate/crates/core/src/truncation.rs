//! Re-bandlimiting of warped signals.
//!
//! `C_φ f` is transformed, its spectrum cut to `[-A, A]` and synthesized
//! back to `h ∈ B²_A`. The error `‖C_φ f - h‖` equals `√(2π)` times the
//! spectral tail norm, and the sweep over `A` shows it shrinking.
//!
//! Everything happens on the discrete Fourier grid of the time window, and
//! time-domain norms use the periodic trapezoid rule (uniform weights), so
//! `l2_error² = 2π·tail_mass` holds to rounding.

use crate::error::{Error, Result};
use crate::paley_wiener::{
    forward_transform, synthesize, synthesize_grid, BandlimitedSignal, FrequencySamples,
    GridSamples, RealGrid,
};
use crate::warps::{
    check_measure_bound, MeasureBoundReport, Warp, DEFAULT_GRID_SPACING, DEFAULT_PROBE_WINDOW,
};

/// `f∘φ` sampled on a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedSignal {
    pub source: BandlimitedSignal,
    pub warp: Warp,
    pub samples: GridSamples,
    pub measure_bound: MeasureBoundReport,
}

impl WarpedSignal {
    /// Whether `m(φ⁻¹E) ≤ c·m(E)` was certified for the warp. Processing
    /// continues either way.
    pub fn hypothesis_holds(&self) -> bool {
        self.measure_bound.bound_c.is_some()
    }
}

pub fn warp_signal(f: &BandlimitedSignal, w: &Warp, grid: RealGrid) -> Result<WarpedSignal> {
    let measure_bound = check_measure_bound(w, DEFAULT_PROBE_WINDOW, DEFAULT_GRID_SPACING)?;
    let values = grid
        .points()
        .map(|t| synthesize(f, w.eval_real(t).into()))
        .collect::<Result<Vec<_>>>()?;
    Ok(WarpedSignal {
        source: f.clone(),
        warp: w.clone(),
        samples: GridSamples::new(grid, values)?,
        measure_bound,
    })
}

/// Source samples on the grid, handy for identity-warp comparisons.
pub fn source_samples(f: &BandlimitedSignal, grid: RealGrid) -> GridSamples {
    synthesize_grid(f, grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationResult {
    pub a_limit: f64,
    pub h: GridSamples,
    pub h_spectrum: FrequencySamples,
    pub l2_error: f64,
    pub tail_mass: f64,
    pub hypothesis_holds: bool,
}

impl TruncationResult {
    /// `|l2_error² - 2π·tail_mass|` relative to `max(l2_error², 1e-12)`.
    pub fn plancherel_defect(&self) -> f64 {
        let e2 = self.l2_error * self.l2_error;
        (e2 - 2.0 * std::f64::consts::PI * self.tail_mass).abs() / e2.max(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub a_limit: f64,
    pub l2_error: f64,
    pub tail_mass: f64,
}

pub fn truncate_to_band(g: &WarpedSignal, a_limit: f64) -> Result<TruncationResult> {
    let spectrum = forward_transform(&g.samples)?;
    let mut r = truncate_spectrum(&g.samples, &spectrum, a_limit)?;
    r.hypothesis_holds = g.hypothesis_holds();
    Ok(r)
}

/// Truncation of arbitrary grid samples (no warp bookkeeping).
pub fn truncate_samples(x: &GridSamples, a_limit: f64) -> Result<TruncationResult> {
    let spectrum = forward_transform(x)?;
    truncate_spectrum(x, &spectrum, a_limit)
}

fn truncate_spectrum(
    x: &GridSamples,
    spectrum: &FrequencySamples,
    a_limit: f64,
) -> Result<TruncationResult> {
    if !(a_limit > 0.0) || !a_limit.is_finite() {
        return Err(Error::Invalid(format!(
            "band limit must be positive, got {a_limit}"
        )));
    }
    let h_spectrum = spectrum.truncated(a_limit);
    let h = h_spectrum.inverse();
    let tail_mass = spectrum.mass_outside(a_limit);
    let diff = x.sub(&h)?;
    let l2_error = (diff.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * x.grid.step).sqrt();
    Ok(TruncationResult {
        a_limit,
        h,
        h_spectrum,
        l2_error,
        tail_mass,
        hypothesis_holds: true,
    })
}

/// `(A, l2_error, tail_mass)` for each `A`, sharing one forward transform.
pub fn error_curve(g: &WarpedSignal, a_values: &[f64]) -> Result<Vec<CurvePoint>> {
    error_curve_samples(&g.samples, a_values)
}

/// [`error_curve`] for bare grid samples.
pub fn error_curve_samples(x: &GridSamples, a_values: &[f64]) -> Result<Vec<CurvePoint>> {
    if a_values.is_empty() {
        return Err(Error::Invalid("no band limits given".into()));
    }
    if a_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid(
            "band limits must be sorted ascending".into(),
        ));
    }
    let spectrum = forward_transform(x)?;
    a_values
        .iter()
        .map(|&a| {
            let r = truncate_spectrum(x, &spectrum, a)?;
            Ok(CurvePoint {
                a_limit: a,
                l2_error: r.l2_error,
                tail_mass: r.tail_mass,
            })
        })
        .collect()
}
