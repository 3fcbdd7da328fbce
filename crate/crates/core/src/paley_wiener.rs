//! Bandlimited signals in `B²_a`.
//!
//! A signal is stored as samples of its spectrum `f̂` on a uniform grid over
//! `[-a, a]` and synthesized by
//!
//! ```text
//! f(z) = ∫_{-a}^{a} f̂(ω) e^{-izω} dω
//! ```
//!
//! The matching analysis carries the `1/2π`:
//! `f̂(ω) = (1/2π) ∫ f(t) e^{iωt} dt`, so Plancherel reads
//! `‖f‖² = 2π ‖f̂‖²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::entire_analysis::{CoefficientSequence, LogComplex};
use crate::error::{Error, Result};
use crate::quadrature::{filon_simpson, simpson_weights, trapezoid_weights};

/// Largest `|Im z|·a` that synthesis will evaluate.
pub const EXPONENT_CAP: f64 = 700.0;

/// Below this `|z - w̄|` the sinc kernel switches to its Taylor series.
pub const KERNEL_SERIES_THRESHOLD: f64 = 1e-6;

pub const DEFAULT_SPECTRAL_NODES: usize = 2049;
pub const MIN_SPECTRAL_NODES: usize = 17;

/// Endpoint magnitude (relative to the peak) above which a transform warns.
pub const DECAY_WARN: f64 = 1e-6;
/// Endpoint magnitude (relative to the peak) above which a transform fails.
pub const DECAY_FAIL: f64 = 1e-2;

const RANDOM_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    a: f64,
}

impl BandSpec {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Invalid(format!(
                "bandwidth must be positive, got {a}"
            )));
        }
        Ok(BandSpec { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// `count` points `start, start + step, …`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl RealGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !(step > 0.0) || !step.is_finite() {
            return Err(Error::Invalid(format!(
                "bad grid start {start} / step {step}"
            )));
        }
        if count < 2 {
            return Err(Error::Invalid(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(RealGrid { start, step, count })
    }

    /// `[-200, 200]` with step `0.05`.
    pub fn default_time() -> Self {
        RealGrid {
            start: -200.0,
            step: 0.05,
            count: 8001,
        }
    }

    /// Grid covering `[lo, hi]` with the given step (`hi` rounded to the grid).
    pub fn spanning(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let count = ((hi - lo) / step).round() as usize + 1;
        RealGrid::new(lo, step, count)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }
}

/// Complex samples on a [`RealGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub grid: RealGrid,
    pub values: Vec<Complex64>,
}

impl GridSamples {
    pub fn new(grid: RealGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::GridMismatch);
        }
        Ok(GridSamples { grid, values })
    }

    pub fn from_fn(grid: RealGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        GridSamples { grid, values }
    }

    pub fn zeros(grid: RealGrid) -> Self {
        GridSamples {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.count],
        }
    }

    pub fn sub(&self, other: &GridSamples) -> Result<GridSamples> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridSamples {
            grid: self.grid,
            values,
        })
    }

    pub fn l2_norm(&self) -> f64 {
        l2_inner(self, self)
            .map(|v| v.re.max(0.0).sqrt())
            .unwrap_or(0.0)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Spectrum samples on `M` uniform nodes spanning `[-a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    band: BandSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(band: BandSpec, values: Vec<Complex64>) -> Result<Self> {
        let m = values.len();
        if m < MIN_SPECTRAL_NODES || m.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "spectrum needs an odd node count >= {MIN_SPECTRAL_NODES}, got {m}"
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Invalid("non-finite spectrum sample".into()));
        }
        Ok(Spectrum { band, values })
    }

    pub fn from_fn(band: BandSpec, nodes: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::Invalid("too few spectral nodes".into()));
        }
        let a = band.a();
        let h = 2.0 * a / (nodes - 1) as f64;
        let values = (0..nodes).map(|i| f(-a + i as f64 * h)).collect();
        Spectrum::new(band, values)
    }

    pub fn band(&self) -> BandSpec {
        self.band
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.band.a() / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.band.a() + i as f64 * self.spacing()
    }

    /// `∫ |f̂|² dω` by Simpson.
    pub fn energy(&self) -> f64 {
        let w = simpson_weights(self.values.len(), self.spacing());
        w.iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedSignal {
    pub spectrum: Spectrum,
    pub label: String,
}

impl BandlimitedSignal {
    pub fn new(spectrum: Spectrum, label: impl Into<String>) -> Self {
        BandlimitedSignal {
            spectrum,
            label: label.into(),
        }
    }

    /// Flat spectrum `1/2π`, i.e. `f(t) = sin(at)/(πt)`; `f(0) = 1` when `a = π`.
    pub fn sinc(band: BandSpec, nodes: usize) -> Result<Self> {
        let s = Spectrum::from_fn(band, nodes, |_| Complex64::new(1.0 / (2.0 * PI), 0.0))?;
        Ok(BandlimitedSignal::new(s, "sinc"))
    }

    pub fn zero(band: BandSpec, nodes: usize) -> Result<Self> {
        let s = Spectrum::from_fn(band, nodes, |_| Complex64::new(0.0, 0.0))?;
        Ok(BandlimitedSignal::new(s, "zero"))
    }

    /// Random member of `B²_a`: the spectrum is
    /// `cos(πω/2a) Σ_k c_k sin(kπ(ω + a)/2a)` for `k = 1..=8` with i.i.d.
    /// standard complex Gaussian `c_k`.
    ///
    /// The spectrum vanishes to second order at `±a`, so the signal decays
    /// like `1/t³` and windowed transforms see almost no tail.
    pub fn random<R: Rng + ?Sized>(band: BandSpec, nodes: usize, rng: &mut R) -> Result<Self> {
        let coeffs: Vec<Complex64> = (0..RANDOM_MODES)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        let a = band.a();
        let s = Spectrum::from_fn(band, nodes, |w| {
            let modes: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * PI * (w + a) / (2.0 * a)).sin())
                .sum();
            modes * (PI * w / (2.0 * a)).cos()
        })?;
        Ok(BandlimitedSignal::new(s, "random-spectrum"))
    }

    pub fn band(&self) -> BandSpec {
        self.spectrum.band()
    }

    /// Maclaurin coefficients `a_n = (1/n!) ∫ f̂(ω) (-iω)^n dω`, `n = 0..=n_max`.
    pub fn maclaurin(&self, n_max: usize) -> Result<CoefficientSequence> {
        let s = &self.spectrum;
        let w = simpson_weights(s.len(), s.spacing());
        let terms = (0..=n_max)
            .map(|n| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut scale = 0.0;
                for (i, v) in s.values().iter().enumerate() {
                    let p = Complex64::new(0.0, -s.node(i)).powu(n as u32);
                    acc += v * p * w[i];
                    scale += (v * p).norm() * w[i];
                }
                let lc = LogComplex::from(acc);
                // cancellation residue, e.g. odd moments of an even spectrum
                if lc.is_zero() || acc.norm() < 1e-12 * scale {
                    LogComplex::ZERO
                } else {
                    LogComplex::new(lc.ln_abs - ln_gamma(n as f64 + 1.0), lc.arg)
                }
            })
            .collect();
        CoefficientSequence::from_log(terms)
    }
}

/// `f(z) = ∫_{-a}^{a} f̂(ω) e^{-izω} dω` by Filon-Simpson quadrature.
pub fn synthesize(f: &BandlimitedSignal, z: Complex64) -> Result<Complex64> {
    let s = &f.spectrum;
    let a = s.band().a();
    let exponent = z.im.abs() * a;
    if exponent > EXPONENT_CAP {
        return Err(Error::Overflow {
            exponent,
            cap: EXPONENT_CAP,
        });
    }
    Ok(filon_simpson(s.values(), -a, s.spacing(), z))
}

/// [`synthesize`] at every point of a real grid.
pub fn synthesize_grid(f: &BandlimitedSignal, grid: RealGrid) -> GridSamples {
    let values = grid
        .points()
        .map(|t| {
            filon_simpson(
                f.spectrum.values(),
                -f.band().a(),
                f.spectrum.spacing(),
                t.into(),
            )
        })
        .collect();
    GridSamples { grid, values }
}

/// Sinc reproducing kernel `sin a(z - w̄) / π(z - w̄)`.
pub fn pw_kernel(band: BandSpec, z: Complex64, w: Complex64) -> Complex64 {
    let a = band.a();
    let d = z - w.conj();
    if d.norm() < KERNEL_SERIES_THRESHOLD {
        let x2 = (d * a) * (d * a);
        return (Complex64::new(1.0, 0.0) - x2 / 6.0 + x2 * x2 / 120.0) * (a / PI);
    }
    (d * a).sin() / (d * PI)
}

/// Trapezoid approximation of `∫ x ȳ dt`.
pub fn l2_inner(x: &GridSamples, y: &GridSamples) -> Result<Complex64> {
    if x.grid != y.grid || x.values.len() != y.values.len() {
        return Err(Error::GridMismatch);
    }
    let w = trapezoid_weights(x.grid.count, x.grid.step);
    Ok(x.values
        .iter()
        .zip(&y.values)
        .zip(&w)
        .map(|((a, b), w)| a * b.conj() * *w)
        .sum())
}

/// Endpoint magnitude relative to the peak; fails above [`DECAY_FAIL`].
pub fn check_decay(x: &GridSamples) -> Result<f64> {
    let peak = x.peak();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let ends = x.values[0].norm().max(x.values[x.values.len() - 1].norm()) / peak;
    if ends > DECAY_FAIL {
        return Err(Error::WindowTooShort { endpoint: ends });
    }
    Ok(ends)
}

/// Spectrum on the discrete Fourier grid of a time window.
///
/// Node `k` sits at `ω_k = start + k·step` with `step = 2π/(N·dt)`. Values are
/// `(1/2π) Σ_j x_j e^{iω_k t_j} dt`, the periodic trapezoid rule, so the
/// discrete Plancherel identity `Σ|x_j|² dt = 2π Σ|x̂_k|² dω` is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySamples {
    pub time_grid: RealGrid,
    pub start: f64,
    pub step: f64,
    pub values: Vec<Complex64>,
    /// Relative endpoint magnitude of the input; above [`DECAY_WARN`] the
    /// window was short enough to matter.
    pub endpoint_magnitude: f64,
}

impl FrequencySamples {
    pub fn node(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn decay_warning(&self) -> bool {
        self.endpoint_magnitude > DECAY_WARN
    }

    /// `Σ |x̂_k|² dω` over nodes with `|ω_k| ≤ limit`.
    pub fn mass_inside(&self, limit: f64) -> f64 {
        self.mass_where(|w| inside_band(w, limit))
    }

    /// `Σ |x̂_k|² dω` over nodes with `|ω_k| > limit`.
    pub fn mass_outside(&self, limit: f64) -> f64 {
        self.mass_where(|w| !inside_band(w, limit))
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_where(|_| true)
    }

    fn mass_where(&self, keep: impl Fn(f64) -> bool) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| keep(self.node(*k)))
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * self.step
    }

    /// Copy with every node outside `[-limit, limit]` zeroed (nodes exactly on
    /// the boundary are kept).
    pub fn truncated(&self, limit: f64) -> FrequencySamples {
        let mut out = self.clone();
        for (k, v) in out.values.iter_mut().enumerate() {
            if !inside_band(self.node(k), limit) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// `x_j = Σ_k x̂_k e^{-iω_k t_j} dω` back on the time grid.
    pub fn inverse(&self) -> GridSamples {
        let grid = self.time_grid;
        let n = grid.count;
        let k_min = (self.start / self.step).round() as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, v) in self.values.iter().enumerate() {
            let kk = k_min + k as i64;
            let phase = Complex64::from_polar(1.0, -(kk as f64) * self.step * grid.start);
            buf[kk.rem_euclid(n as i64) as usize] = v * phase;
        }
        FftPlanner::<f64>::new()
            .plan_fft_forward(n)
            .process(&mut buf);
        for v in buf.iter_mut() {
            *v *= self.step;
        }
        GridSamples { grid, values: buf }
    }
}

fn inside_band(w: f64, limit: f64) -> bool {
    w.abs() <= limit * (1.0 + 1e-12)
}

/// Forward transform `x̂(ω) = (1/2π) ∫ x(t) e^{iωt} dt` on the DFT grid.
pub fn forward_transform(x: &GridSamples) -> Result<FrequencySamples> {
    let endpoint = check_decay(x)?;
    let grid = x.grid;
    let n = grid.count;
    let dt = grid.step;
    let dw = 2.0 * PI / (n as f64 * dt);
    let k_min = -((n / 2) as i64);
    let mut buf = x.values.clone();
    FftPlanner::<f64>::new()
        .plan_fft_inverse(n)
        .process(&mut buf);
    let values = (0..n)
        .map(|k| {
            let kk = k_min + k as i64;
            let phase = Complex64::from_polar(1.0, kk as f64 * dw * grid.start);
            buf[kk.rem_euclid(n as i64) as usize] * phase * (dt / (2.0 * PI))
        })
        .collect();
    Ok(FrequencySamples {
        time_grid: grid,
        start: k_min as f64 * dw,
        step: dw,
        values,
        endpoint_magnitude: endpoint,
    })
}

/// Forward transform evaluated directly at the nodes of a band spectrum,
/// for feeding back into [`synthesize`].
pub fn analyze_band(x: &GridSamples, band: BandSpec, nodes: usize) -> Result<Spectrum> {
    check_decay(x)?;
    let w = trapezoid_weights(x.grid.count, x.grid.step);
    let weighted: Vec<Complex64> = x.values.iter().zip(&w).map(|(v, w)| v * *w).collect();
    let t0 = x.grid.start;
    let dt = x.grid.step;
    Spectrum::from_fn(band, nodes, |omega| {
        let step = Complex64::from_polar(1.0, omega * dt);
        let mut phase = Complex64::from_polar(1.0, omega * t0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in weighted.iter().enumerate() {
            if j % 256 == 0 {
                phase = Complex64::from_polar(1.0, omega * (t0 + j as f64 * dt));
            }
            acc += v * phase;
            phase *= step;
        }
        acc / (2.0 * PI)
    })
}
