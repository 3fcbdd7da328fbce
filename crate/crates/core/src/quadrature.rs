//! Quadrature rules shared by the analysis modules.

use num_complex::Complex64;

/// Composite Simpson weights for `n` equally spaced nodes with spacing `h`.
///
/// `n` must be odd and at least 3.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd node count >= 3");
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Composite trapezoid weights for `n` equally spaced nodes with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect()
}

/// Moments `∫_{-1}^{1} s^k e^{-iθs} ds` for `k = 0, 1, 2`.
///
/// Closed forms lose digits to cancellation for small `|θ|`, so a power
/// series takes over below `|θ| = 1`.
pub fn oscillatory_moments(theta: Complex64) -> [Complex64; 3] {
    if theta.norm() < 1.0 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            // (-iθ)^m / m!
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..40usize {
                if (k + m) % 2 == 0 {
                    acc += term * (2.0 / (k + m + 1) as f64);
                }
                term = term * Complex64::new(0.0, -1.0) * theta / (m + 1) as f64;
            }
            *slot = acc;
        }
        return out;
    }
    let (s, c) = (theta.sin(), theta.cos());
    let t2 = theta * theta;
    let m0 = 2.0 * s / theta;
    let m1 = Complex64::new(0.0, -2.0) * (s - theta * c) / t2;
    let m2 = 2.0 * ((t2 - 2.0) * s + 2.0 * theta * c) / (t2 * theta);
    [m0, m1, m2]
}

/// Filon-Simpson quadrature of `∫ f(ω) e^{-itω} dω` over a uniform grid.
///
/// `f` is interpolated by a quadratic on each pair of panels and the
/// product with the exponential is integrated exactly, so the rule stays
/// accurate for any `t` and reduces to composite Simpson as `t → 0`.
/// `values.len()` must be odd and at least 3.
pub fn filon_simpson(values: &[Complex64], start: f64, h: f64, t: Complex64) -> Complex64 {
    let n = values.len();
    assert!(
        n >= 3 && n % 2 == 1,
        "Filon-Simpson needs an odd node count >= 3"
    );
    let [m0, m1, m2] = oscillatory_moments(t * h);
    let w0 = (m2 - m1) * 0.5;
    let w1 = m0 - m2;
    let w2 = (m2 + m1) * 0.5;
    let minus_i = Complex64::new(0.0, -1.0);
    let mut centre = start + h;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut j = 0;
    while j + 2 < n {
        let phase = (minus_i * t * centre).exp();
        acc += phase * (values[j] * w0 + values[j + 1] * w1 + values[j + 2] * w2);
        j += 2;
        centre = start + (j + 1) as f64 * h;
    }
    acc * h
}

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_series_and_closed_form_agree_at_switch() {
        let below = oscillatory_moments(Complex64::new(0.999_999, 0.0));
        let above = oscillatory_moments(Complex64::new(1.000_001, 0.0));
        for k in 0..3 {
            assert!((below[k] - above[k]).norm() < 1e-5, "k = {k}");
        }
    }

    #[test]
    fn moments_at_zero() {
        let m = oscillatory_moments(Complex64::new(0.0, 0.0));
        assert!((m[0].re - 2.0).abs() < 1e-15);
        assert!(m[1].norm() < 1e-15);
        assert!((m[2].re - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn filon_is_exact_for_quadratics() {
        // ∫_{-1}^{1} ω² e^{-i 7 ω} dω against the closed form moment
        let n = 21;
        let h = 2.0 / (n - 1) as f64;
        let vals: Vec<_> = (0..n)
            .map(|i| {
                let w = -1.0 + i as f64 * h;
                Complex64::new(w * w, 0.0)
            })
            .collect();
        let got = filon_simpson(&vals, -1.0, h, Complex64::new(7.0, 0.0));
        let want = oscillatory_moments(Complex64::new(7.0, 0.0))[2];
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn simpson_integrates_cubic() {
        let n = 11;
        let h = 0.2;
        let w = simpson_weights(n, h);
        let s: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(3)).sum();
        assert!((s - 2.0f64.powi(4) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_simpson_cauchy_density() {
        let f = |t: f64| 1.0 / (1.0 + t * t);
        let v = adaptive_simpson(&f, -3.0, 3.0, 1e-12);
        assert!((v - 2.0 * 3.0f64.atan()).abs() < 1e-10);
    }
}
