//! Truncated complex power series.
//!
//! An [`AnalyticSeries`] of order `N` stores `c_0 ..= c_N` and stands for the
//! germ `c_0 + c_1 z + ... + c_N z^N + O(z^{N+1})`. Binary operations
//! truncate to the shorter operand, so every coefficient a result reports is
//! determined by the known coefficients of its inputs.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{CoreError, Result};

/// Default truncation degree.
pub const DEFAULT_ORDER: usize = 128;

/// Coefficients below this fraction of the largest coefficient magnitude count
/// as zero when the vanishing order is computed.
pub const ZERO_TOL: f64 = 1e-13;

/// Number of trailing coefficients used for the geometric tail fit.
const TAIL_WINDOW: usize = 8;

/// Largest decay ratio the tail fit may report; keeps `q < 1`.
const MAX_DECAY_RATIO: f64 = 1.0 - 1e-12;

/// Truncated power series with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticSeries {
    coeffs: Vec<Complex64>,
    vanish: usize,
}

/// Value of a series at a point together with an estimate of the truncation
/// error there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub tail_bound: f64,
}

fn leading_index(coeffs: &[Complex64]) -> usize {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    if scale == 0.0 {
        return coeffs.len();
    }
    let tol = ZERO_TOL * scale;
    coeffs
        .iter()
        .position(|c| c.norm() > tol)
        .unwrap_or(coeffs.len())
}

impl AnalyticSeries {
    /// Builds a series from `c_0, ..., c_N`, rejecting NaN and infinite entries.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(CoreError::EmptySeries);
        }
        if let Some(index) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CoreError::NonFiniteCoefficient { index });
        }
        Ok(Self::from_raw(coeffs))
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Internal constructor for results of arithmetic on valid series.
    /// Leading coefficients below the zero tolerance are flushed to zero.
    pub(crate) fn from_raw(mut coeffs: Vec<Complex64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        let vanish = leading_index(&coeffs);
        for c in coeffs.iter_mut().take(vanish) {
            *c = Complex64::new(0.0, 0.0);
        }
        Self { coeffs, vanish }
    }

    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); order + 1], vanish: order + 1 }
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Self::from_raw(coeffs)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Complex64::new(1.0, 0.0), order)
    }

    /// `c z^m`, truncated at `order` (the zero series when `m > order`).
    pub fn monomial(c: Complex64, m: usize, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        if m <= order {
            coeffs[m] = c;
        }
        Self::from_raw(coeffs)
    }

    /// The identity function `z`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 1, order)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^k`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Truncation degree `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Smallest `k` with a nonzero coefficient, or `N + 1` for the zero series.
    pub fn vanishing_order(&self) -> usize {
        self.vanish
    }

    pub fn is_zero(&self) -> bool {
        self.vanish > self.order()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Drops every coefficient above `order`. Never extends.
    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self::from_raw(self.coeffs[..=n].to_vec())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| op(self.coeffs[k], other.coeffs[k])).collect();
        Self::from_raw(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_raw(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Adds a constant to `c_0`.
    pub fn add_constant(&self, c: Complex64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += c;
        Self::from_raw(coeffs)
    }

    /// Cauchy product truncated at the shorter order.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for i in self.vanish..=n {
            let a = self.coeffs[i];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in other.vanish..=(n - i) {
                out[i + j] += a * other.coeffs[j];
            }
        }
        Self::from_raw(out)
    }

    /// Quotient `self / divisor`.
    ///
    /// Both operands are divided by `z^v` first, where `v` is the vanishing
    /// order of the divisor, so the result loses `v` orders of truncation.
    pub fn div(&self, divisor: &Self) -> Result<Self> {
        let shift = divisor.vanish;
        let dividend_order = self.vanish;
        if divisor.is_zero() || shift > dividend_order {
            return Err(CoreError::DivisionOrder { dividend: dividend_order, divisor: shift });
        }
        let known = self.order().min(divisor.order());
        if known < shift {
            return Err(CoreError::DivisionOrder { dividend: dividend_order, divisor: shift });
        }
        let n = known - shift;
        let lead = divisor.coeffs[shift];
        let mut q: Vec<Complex64> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = Compensated::new(self.coeffs[k + shift]);
            for j in 1..=k {
                acc.add(-(divisor.coeffs[j + shift] * q[k - j]));
            }
            q.push(acc.total() / lead);
        }
        Ok(Self::from_raw(q))
    }

    /// Multiplies by `z^k`; the known order grows by `k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::from_raw(coeffs)
    }

    /// Divides by `z^k`. Requires `vanishing_order() >= k`.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if self.vanish < k || k > self.order() {
            return Err(CoreError::DivisionOrder { dividend: self.vanish, divisor: k });
        }
        Ok(Self::from_raw(self.coeffs[k..].to_vec()))
    }

    /// Term-wise derivative; order drops by one.
    pub fn derivative(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::zero(0);
        }
        let coeffs = (1..=n).map(|k| self.coeffs[k] * k as f64).collect();
        Self::from_raw(coeffs)
    }

    /// Antiderivative vanishing at the origin; order grows by one.
    pub fn antiderivative0(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Self::from_raw(coeffs)
    }

    /// `log(1 + self)`, the branch vanishing at the origin.
    pub fn log1p(&self) -> Result<Self> {
        if self.vanish < 1 {
            return Err(CoreError::BranchPrecondition);
        }
        let n = self.order();
        let h = &self.coeffs;
        let mut log = vec![Complex64::new(0.0, 0.0); n + 1];
        // (1 + h) L' = h'
        for k in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..k {
                acc += log[j] * h[k - j] * j as f64;
            }
            log[k] = h[k] - acc / k as f64;
        }
        Ok(Self::from_raw(log))
    }

    /// `exp(self)` for a series vanishing at the origin.
    pub fn exp0(&self) -> Result<Self> {
        if self.vanish < 1 {
            return Err(CoreError::BranchPrecondition);
        }
        let n = self.order();
        let f = &self.coeffs;
        let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
        e[0] = Complex64::new(1.0, 0.0);
        // E' = F' E
        for k in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += f[j] * e[k - j] * j as f64;
            }
            e[k] = acc / k as f64;
        }
        Ok(Self::from_raw(e))
    }

    /// `(1 + self)^e` on the analytic branch equal to 1 at the origin.
    pub fn pow1p(&self, e: f64) -> Result<Self> {
        if self.vanish < 1 {
            return Err(CoreError::BranchPrecondition);
        }
        if !e.is_finite() {
            return Err(CoreError::InvalidParameter(alloc::format!("exponent {e} is not finite")));
        }
        if e == 0.0 {
            return Ok(Self::one(self.order()));
        }
        if e == 1.0 {
            return Ok(self.add_constant(Complex64::new(1.0, 0.0)));
        }
        // k P_k = sum_{j=1}^{k} (e j - (k - j)) h_j P_{k-j}, from (1 + h) P' = e h' P
        let h = &self.coeffs;
        let mut p = alloc::vec![Complex64::new(0.0, 0.0); h.len()];
        p[0] = Complex64::new(1.0, 0.0);
        for k in 1..h.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in self.vanish..=k {
                acc += h[j] * p[k - j] * (e * j as f64 - (k - j) as f64);
            }
            p[k] = acc / k as f64;
        }
        Ok(Self::from_raw(p))
    }

    /// Horner evaluation with a truncation tail estimate.
    pub fn eval(&self, z: Complex64) -> Result<EvalResult> {
        let modulus = z.norm();
        if !(modulus < 1.0) {
            return Err(CoreError::OutsideDisk { modulus });
        }
        let value = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        Ok(EvalResult { value, tail_bound: self.tail_bound(modulus) })
    }

    /// Decay ratio fitted to the last coefficients, with the envelope
    /// magnitude projected to index `N`. `None` when the window is all zero.
    fn tail_envelope(&self) -> Option<(f64, f64)> {
        let n = self.order();
        if n == 0 {
            return None;
        }
        let start = (n + 1).saturating_sub(TAIL_WINDOW);
        let points: Vec<(f64, f64)> = (start..=n)
            .filter_map(|k| {
                let m = self.coeffs[k].norm();
                (m > 0.0).then(|| (k as f64, m.ln()))
            })
            .collect();
        if points.is_empty() {
            return None;
        }
        let q = if points.len() < 2 {
            MAX_DECAY_RATIO
        } else {
            let len = points.len() as f64;
            let mean_k = points.iter().map(|p| p.0).sum::<f64>() / len;
            let mean_l = points.iter().map(|p| p.1).sum::<f64>() / len;
            let sxy: f64 = points.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_l)).sum();
            let sxx: f64 = points.iter().map(|p| (p.0 - mean_k) * (p.0 - mean_k)).sum();
            (sxy / sxx).exp().clamp(0.0, MAX_DECAY_RATIO)
        };
        let amplitude = points
            .iter()
            .map(|&(k, l)| l.exp() * q.powf(n as f64 - k))
            .fold(0.0, f64::max);
        Some((q, amplitude))
    }

    /// Estimated `|sum_{k>N} c_k z^k|` at `|z| = modulus`, from a geometric
    /// continuation of the trailing coefficients. Infinite when that
    /// continuation does not converge.
    pub fn tail_bound(&self, modulus: f64) -> f64 {
        match self.tail_envelope() {
            None => 0.0,
            Some((q, amplitude)) => {
                let ratio = q * modulus;
                if ratio >= 1.0 {
                    f64::INFINITY
                } else {
                    amplitude * modulus.powi(self.order() as i32) * ratio / (1.0 - ratio)
                }
            }
        }
    }
}

/// Neumaier summation on real and imaginary parts separately.
struct Compensated {
    sum: Complex64,
    carry: Complex64,
}

impl Compensated {
    fn new(start: Complex64) -> Self {
        Self { sum: start, carry: Complex64::new(0.0, 0.0) }
    }

    fn add(&mut self, x: Complex64) {
        let (re, cre) = two_sum(self.sum.re, x.re);
        let (im, cim) = two_sum(self.sum.im, x.im);
        self.sum = Complex64::new(re, im);
        self.carry += Complex64::new(cre, cim);
    }

    fn total(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() { (a - s) + b } else { (b - s) + a };
    (s, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn geometric(order: usize) -> AnalyticSeries {
        AnalyticSeries::from_coeffs(vec![c(1.0); order + 1]).unwrap()
    }

    fn koebe(order: usize) -> AnalyticSeries {
        AnalyticSeries::from_coeffs((0..=order).map(|k| c(k as f64)).collect()).unwrap()
    }

    fn assert_coeffs(s: &AnalyticSeries, expected: &[f64], tol: f64) {
        for (k, &e) in expected.iter().enumerate() {
            let got = s.coeff(k);
            assert!((got - c(e)).norm() <= tol, "coefficient {k}: got {got}, expected {e}");
        }
    }

    #[test]
    fn from_coeffs_vanishing_orders() {
        let z = AnalyticSeries::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(z.vanishing_order(), 1);
        assert_eq!(z.order(), 1);
        let k = AnalyticSeries::from_real(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(k.vanishing_order(), 1);
        assert_eq!(k.order(), 4);
        let m = AnalyticSeries::from_real(&[0.0, 0.0, 0.5]).unwrap();
        assert_eq!(m.vanishing_order(), 2);
    }

    #[test]
    fn from_coeffs_rejects_bad_input() {
        assert_eq!(AnalyticSeries::from_coeffs(vec![]), Err(CoreError::EmptySeries));
        assert_eq!(
            AnalyticSeries::from_real(&[0.0, f64::NAN]),
            Err(CoreError::NonFiniteCoefficient { index: 1 })
        );
        assert!(AnalyticSeries::from_real(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn dust_below_tolerance_is_flushed() {
        let s = AnalyticSeries::from_real(&[1e-17, 1.0, 2.0]).unwrap();
        assert_eq!(s.vanishing_order(), 1);
        assert_eq!(s.coeff(0), c(0.0));
    }

    #[test]
    fn mul_examples() {
        let a = AnalyticSeries::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let b = AnalyticSeries::from_real(&[1.0, -1.0, 0.0, 0.0]).unwrap();
        assert_coeffs(&a.mul(&b), &[1.0, 0.0, -1.0, 0.0], 0.0);

        let z = AnalyticSeries::monomial(c(1.0), 1, 8);
        let z2 = AnalyticSeries::monomial(c(1.0), 2, 8);
        let z3 = z.mul(&z2);
        assert_eq!(z3.vanishing_order(), 3);
        assert_eq!(z3.coeff(3), c(1.0));

        let one_minus_z = AnalyticSeries::from_real(&[1.0, -1.0]).unwrap().shift_up(0);
        let padded = {
            let mut v = vec![c(0.0); 17];
            v[0] = c(1.0);
            v[1] = c(-1.0);
            AnalyticSeries::from_coeffs(v).unwrap()
        };
        let prod = geometric(16).mul(&padded);
        assert_eq!(prod, AnalyticSeries::one(16));
        // truncation follows the shorter operand
        assert_eq!(geometric(16).mul(&one_minus_z).order(), 1);
    }

    #[test]
    fn div_examples() {
        let one = AnalyticSeries::one(10);
        let mut v = vec![c(0.0); 11];
        v[0] = c(1.0);
        v[1] = c(-1.0);
        let one_minus_z = AnalyticSeries::from_coeffs(v).unwrap();
        assert_coeffs(&one.div(&one_minus_z).unwrap(), &[1.0; 11], 0.0);

        let z = AnalyticSeries::identity(10);
        let q = z.div(&z).unwrap();
        assert_eq!(q.coeff(0), c(1.0));
        assert!(q.coeffs()[1..].iter().all(|x| x.norm() == 0.0));

        let q = koebe(10).div(&z).unwrap();
        let expected: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        assert_coeffs(&q, &expected, 0.0);
        assert_eq!(q.order(), 9);
    }

    #[test]
    fn div_rejects_non_analytic_quotient() {
        let z = AnalyticSeries::identity(5);
        let one = AnalyticSeries::one(5);
        assert_eq!(one.div(&z), Err(CoreError::DivisionOrder { dividend: 0, divisor: 1 }));
        assert!(one.div(&AnalyticSeries::zero(5)).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_coeffs(&AnalyticSeries::identity(4).derivative(), &[1.0, 0.0, 0.0, 0.0], 0.0);
        let d = koebe(12).derivative();
        let expected: Vec<f64> = (0..12).map(|k| ((k + 1) * (k + 1)) as f64).collect();
        assert_coeffs(&d, &expected, 0.0);
        assert!(AnalyticSeries::one(5).derivative().is_zero());
    }

    #[test]
    fn antiderivative_examples() {
        let a = AnalyticSeries::one(3).antiderivative0();
        assert_coeffs(&a, &[0.0, 1.0, 0.0, 0.0, 0.0], 0.0);
        let b = AnalyticSeries::from_real(&[1.0, 0.5]).unwrap().antiderivative0();
        assert_coeffs(&b, &[0.0, 1.0, 0.25], 0.0);
    }

    #[test]
    fn pow1p_examples() {
        let z = AnalyticSeries::identity(6);
        assert_coeffs(&z.pow1p(2.0).unwrap(), &[1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0], 1e-14);
        // binomial(1/2, k): 1, 1/2, -1/8, 1/16, -5/128, 7/256
        assert_coeffs(
            &z.pow1p(0.5).unwrap(),
            &[1.0, 0.5, -0.125, 0.0625, -0.0390625, 0.02734375],
            1e-15,
        );
        assert_eq!(z.pow1p(0.0).unwrap(), AnalyticSeries::one(6));
        assert_eq!(
            AnalyticSeries::one(6).pow1p(0.5),
            Err(CoreError::BranchPrecondition)
        );
    }

    #[test]
    fn pow1p_constant_term_is_exactly_one() {
        let h = AnalyticSeries::from_real(&[0.0, 0.3, -0.2, 0.1]).unwrap();
        for e in [0.3, 1.7, -2.5, 4.0] {
            assert_eq!(h.pow1p(e).unwrap().coeff(0), c(1.0));
        }
    }

    #[test]
    fn eval_examples() {
        let g = geometric(128).eval(c(0.5)).unwrap();
        assert!((g.value - c(2.0)).norm() <= 2.0 * 0.5_f64.powi(128));
        assert!(g.tail_bound <= 2.0 * 0.5_f64.powi(128));
        assert!(g.tail_bound > 0.0);

        let z0 = Complex64::new(0.3, 0.4);
        let r = AnalyticSeries::identity(128).eval(z0).unwrap();
        assert_eq!(r.value, z0);
        assert_eq!(r.tail_bound, 0.0);

        let k = koebe(128).eval(c(0.5)).unwrap();
        assert!((k.value - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn eval_rejects_points_outside_disk() {
        let s = AnalyticSeries::identity(3);
        assert!(matches!(s.eval(c(1.0)), Err(CoreError::OutsideDisk { .. })));
        assert!(matches!(s.eval(Complex64::new(0.8, 0.7)), Err(CoreError::OutsideDisk { .. })));
    }

    #[test]
    fn tail_bound_flags_nonconvergent_continuation() {
        // growing coefficients clamp the decay ratio just below one
        let k = koebe(128);
        assert!(k.tail_bound(0.995) > 1.0);
        assert!(k.tail_bound(0.5) < 1e-30);
    }

    #[test]
    fn vanishing_order_examples() {
        assert_eq!(AnalyticSeries::monomial(c(1.0), 3, 10).vanishing_order(), 3);
        assert_eq!(AnalyticSeries::zero(10).vanishing_order(), 11);
    }
}
