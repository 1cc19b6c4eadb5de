//! Maximum-modulus probes on circles `|z| = r`.
//!
//! If `w(0) = 0` and `|w|` restricted to `|z| <= r` peaks at `z0` with
//! `|z0| = r`, then `z0 w'(z0)/w(z0)` is a real number at least the vanishing
//! order of `w`. The probe locates `z0` numerically and reports the quotient.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::series::AnalyticSeries;

/// Largest radius any probe or grid evaluates at.
pub const R_MAX: f64 = 0.995;

/// Default number of coarse angular samples per circle.
pub const DEFAULT_SAMPLES: usize = 512;

/// Default tolerance for the reality and order checks.
pub const DEFAULT_TOL: f64 = 1e-6;

/// `|w|` below this counts as zero.
const ZERO_MODULUS: f64 = 1e-14;

/// Relative spread of the coarse samples below which `|w|` is flat on the circle.
const FLAT_SPREAD: f64 = 1e-10;

const GOLDEN_TOL: f64 = 1e-12;

/// Location of the largest `|w|` on a circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleMax {
    pub z0: Complex64,
    pub modulus: f64,
    /// `|w|` is constant on the circle; `z0` is the first grid angle.
    pub flat: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JackReport {
    pub r: f64,
    pub z0: Complex64,
    pub wmax: f64,
    pub quotient: Complex64,
    pub k_est: f64,
    pub imag_residual: f64,
    pub vanishing_order: usize,
    /// `k_est >= vanishing_order - tol`.
    pub order_ok: bool,
    /// `imag_residual < tol`.
    pub real_ok: bool,
    pub flat: bool,
}

struct CircleProbe<'a> {
    w: &'a AnalyticSeries,
    dw: AnalyticSeries,
    ddw: AnalyticSeries,
    r: f64,
}

impl CircleProbe<'_> {
    fn point(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(self.r, theta)
    }

    fn modulus_sq(&self, theta: f64) -> Result<f64> {
        Ok(self.w.eval(self.point(theta))?.value.norm_sqr())
    }

    /// `z w'(z) / w(z)` at angle `theta` and its `theta`-derivative.
    fn quotient_and_slope(&self, theta: f64) -> Result<(Complex64, Complex64)> {
        let z = self.point(theta);
        let w = self.w.eval(z)?.value;
        let dw = self.dw.eval(z)?.value;
        let ddw = self.ddw.eval(z)?.value;
        let q = z * dw / w;
        // d/dtheta = i z d/dz
        let dq = Complex64::i() * z * (dw / w + z * ddw / w - z * dw * dw / (w * w));
        Ok((q, dq))
    }

    fn golden_max(&self, mut lo: f64, mut hi: f64) -> Result<f64> {
        let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let mut a = hi - inv_phi * (hi - lo);
        let mut b = lo + inv_phi * (hi - lo);
        let mut fa = self.modulus_sq(a)?;
        let mut fb = self.modulus_sq(b)?;
        while hi - lo > GOLDEN_TOL {
            if fa >= fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - inv_phi * (hi - lo);
                fa = self.modulus_sq(a)?;
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + inv_phi * (hi - lo);
                fb = self.modulus_sq(b)?;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// A few Newton steps on `Im(z w'/w) = 0`, the stationarity condition of
    /// `|w|` along the circle. Kept only if `|w|` does not decrease.
    fn polish(&self, theta: f64, lo: f64, hi: f64) -> Result<f64> {
        let mut t = theta;
        for _ in 0..4 {
            let (q, dq) = self.quotient_and_slope(t)?;
            if dq.im == 0.0 || !dq.im.is_finite() {
                break;
            }
            let next = t - q.im / dq.im;
            if !(next > lo && next < hi) {
                break;
            }
            t = next;
        }
        if self.modulus_sq(t)? >= self.modulus_sq(theta)? * (1.0 - 1e-15) {
            Ok(t)
        } else {
            Ok(theta)
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r <= R_MAX {
        Ok(())
    } else {
        Err(CoreError::InvalidParameter(alloc::format!("radius {r} outside (0, {R_MAX}]")))
    }
}

/// Coarse `m`-point scan of `|w(r e^{i theta})|`, golden-section refinement
/// around the best sample, then a Newton polish of the stationarity condition.
pub fn max_on_circle(w: &AnalyticSeries, r: f64, m: usize) -> Result<CircleMax> {
    check_radius(r)?;
    if m < 16 {
        return Err(CoreError::InvalidParameter(alloc::format!("need at least 16 samples, got {m}")));
    }
    let dw = w.derivative();
    let probe = CircleProbe { w, ddw: dw.derivative(), dw, r };
    let step = 2.0 * core::f64::consts::PI / m as f64;
    let samples: Vec<f64> = (0..m).map(|j| probe.modulus_sq(step * j as f64)).collect::<Result<_>>()?;
    let (best, best_val) = samples
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
    let min_val = samples.iter().copied().fold(f64::INFINITY, f64::min);
    if best_val.sqrt() < ZERO_MODULUS {
        return Err(CoreError::DegenerateMax { radius: r });
    }
    if best_val - min_val <= FLAT_SPREAD * best_val {
        let z0 = probe.point(0.0);
        return Ok(CircleMax { z0, modulus: samples[0].sqrt(), flat: true });
    }
    let center = step * best as f64;
    let (lo, hi) = (center - step, center + step);
    let theta = probe.golden_max(lo, hi)?;
    let theta = probe.polish(theta, lo, hi)?;
    let z0 = probe.point(theta);
    Ok(CircleMax { z0, modulus: probe.modulus_sq(theta)?.sqrt(), flat: false })
}

/// `z0 w'(z0) / w(z0)`.
pub fn jack_quotient(w: &AnalyticSeries, z0: Complex64) -> Result<Complex64> {
    let value = w.eval(z0)?.value;
    if value.norm() < ZERO_MODULUS {
        return Err(CoreError::ZeroDenominator);
    }
    let slope = w.derivative().eval(z0)?.value;
    Ok(z0 * slope / value)
}

/// Probes one circle.
pub fn jack_report(w: &AnalyticSeries, r: f64, m: usize, tol: f64) -> Result<JackReport> {
    let found = max_on_circle(w, r, m)?;
    let quotient = jack_quotient(w, found.z0)?;
    let vanishing_order = w.vanishing_order();
    let k_est = quotient.re;
    let imag_residual = quotient.im.abs();
    Ok(JackReport {
        r,
        z0: found.z0,
        wmax: found.modulus,
        quotient,
        k_est,
        imag_residual,
        vanishing_order,
        order_ok: k_est >= vanishing_order as f64 - tol,
        real_ok: imag_residual < tol,
        flat: found.flat,
    })
}

/// One report per radius; radii where the probe fails keep their error.
pub fn jack_verify(w: &AnalyticSeries, radii: &[f64], tol: f64) -> Vec<Result<JackReport>> {
    radii.iter().map(|&r| jack_report(w, r, DEFAULT_SAMPLES, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(coeffs: &[f64], order: usize) -> AnalyticSeries {
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); order + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            v[k] = Complex64::new(c, 0.0);
        }
        AnalyticSeries::from_coeffs(v).unwrap()
    }

    #[test]
    fn monomial_is_flat() {
        let w = series(&[0.0, 0.0, 1.0], 32);
        let m = max_on_circle(&w, 0.5, 512).unwrap();
        assert!(m.flat);
        assert!((m.modulus - 0.25).abs() < 1e-15);
    }

    #[test]
    fn shifted_product_peaks_on_positive_axis() {
        // z (z + 0.5)
        let w = series(&[0.0, 0.5, 1.0], 32);
        let m = max_on_circle(&w, 0.5, 512).unwrap();
        assert!(!m.flat);
        assert!((m.z0 - Complex64::new(0.5, 0.0)).norm() < 1e-9);
        assert!((m.modulus - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_series_is_degenerate() {
        let w = AnalyticSeries::zero(16);
        assert_eq!(max_on_circle(&w, 0.5, 64), Err(CoreError::DegenerateMax { radius: 0.5 }));
    }

    #[test]
    fn rejects_bad_arguments() {
        let w = series(&[0.0, 1.0], 8);
        assert!(max_on_circle(&w, 0.999, 64).is_err());
        assert!(max_on_circle(&w, 0.0, 64).is_err());
        assert!(max_on_circle(&w, 0.5, 8).is_err());
    }

    #[test]
    fn quotient_examples() {
        let w = series(&[0.0, 0.0, 0.0, 1.0], 16);
        let q = jack_quotient(&w, Complex64::new(0.2, -0.4)).unwrap();
        assert!((q - Complex64::new(3.0, 0.0)).norm() < 1e-14);

        let w = series(&[0.0, 0.5, 1.0], 16);
        let q = jack_quotient(&w, Complex64::new(0.5, 0.0)).unwrap();
        assert!((q - Complex64::new(1.5, 0.0)).norm() < 1e-14);

        let w = series(&[0.0, 0.0, 0.3], 16);
        let m = max_on_circle(&w, 0.9, 512).unwrap();
        let q = jack_quotient(&w, m.z0).unwrap();
        assert!((q - Complex64::new(2.0, 0.0)).norm() < 1e-14);

        assert_eq!(
            jack_quotient(&AnalyticSeries::zero(4), Complex64::new(0.1, 0.0)),
            Err(CoreError::ZeroDenominator)
        );
    }

    #[test]
    fn verify_examples() {
        let w = series(&[0.0, 0.0, 1.0], 32);
        for rep in jack_verify(&w, &[0.3, 0.6, 0.9], DEFAULT_TOL) {
            let rep = rep.unwrap();
            assert!((rep.k_est - 2.0).abs() < 1e-12);
            assert!(rep.real_ok && rep.order_ok);
        }

        let w = series(&[0.0, 0.5 / 1.5, 1.0 / 1.5], 32);
        let rep = jack_report(&w, 0.75, 512, DEFAULT_TOL).unwrap();
        assert!((rep.k_est - 1.6).abs() < 1e-9);
        assert!(rep.imag_residual < 1e-9);
        assert!(rep.order_ok);
    }

    #[test]
    fn verify_keeps_per_radius_errors() {
        let out = jack_verify(&AnalyticSeries::zero(8), &[0.2, 0.4], DEFAULT_TOL);
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|r| matches!(r, Err(CoreError::DegenerateMax { .. }))));
    }
}
