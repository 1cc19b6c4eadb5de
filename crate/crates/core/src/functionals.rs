//! Composite functionals built from a pair `(f, g)`.
//!
//! With `w = (z f'/g)^{1/mu} - 1` (forward) or `w = (g/(z f'))^{1/mu} - 1`
//! (reciprocal), logarithmic differentiation gives
//!
//! ```text
//!  forward:     1 + z f''/f' - z g'/g =  mu z w'/(1 + w)
//!  reciprocal: -1 - z f''/f' + z g'/g =  mu z w'/(1 + w)
//! ```
//!
//! Every quantity here is a series. Pointwise values go through
//! [`AnalyticSeries::eval`] so they carry a tail bound.

use alloc::format;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::function::NormalizedFunction;
use crate::series::AnalyticSeries;

/// Which ratio defines `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `w = (z f'/g)^{1/mu} - 1`.
    Forward,
    /// `w = (g/(z f'))^{1/mu} - 1`.
    Reciprocal,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reciprocal => -1.0,
        }
    }
}

/// A function `f` together with its reference function `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionPair {
    f: NormalizedFunction,
    g: NormalizedFunction,
    n: usize,
}

impl FunctionPair {
    pub fn new(f: NormalizedFunction, g: NormalizedFunction) -> Self {
        let n = f.n_index().min(g.n_index());
        Self { f, g, n }
    }

    pub fn f(&self) -> &NormalizedFunction {
        &self.f
    }

    pub fn g(&self) -> &NormalizedFunction {
        &self.g
    }

    /// `min(n_1, n_2)`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `z f'(z)` as a series of the same order as `f`.
    pub fn z_fprime(&self) -> AnalyticSeries {
        self.f.series().derivative().shift_up(1)
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(CoreError::InvalidParameter(format!("mu = {mu} must lie in (0, 1]")))
    }
}

/// `z f'/g - 1` (forward) or `g/(z f') - 1` (reciprocal).
pub fn ratio_minus_one(p: &FunctionPair, d: Direction) -> Result<AnalyticSeries> {
    let zfp = p.z_fprime();
    let g = p.g.series();
    let ratio = match d {
        Direction::Forward => zfp.div(g)?,
        Direction::Reciprocal => g.div(&zfp)?,
    };
    Ok(ratio.add_constant(Complex64::new(-1.0, 0.0)))
}

/// `w = (1 + ratio_minus_one)^{1/mu} - 1`, taken on the branch with `w(0) = 0`.
pub fn w_series(p: &FunctionPair, mu: f64, d: Direction) -> Result<AnalyticSeries> {
    check_mu(mu)?;
    let h = ratio_minus_one(p, d)?;
    Ok(h.pow1p(1.0 / mu)?.add_constant(Complex64::new(-1.0, 0.0)))
}

/// `1 + z f''/f' - z g'/g`, negated for the reciprocal direction.
pub fn logderiv_combo(p: &FunctionPair, d: Direction) -> Result<AnalyticSeries> {
    let fp = p.f.series().derivative();
    let fpp = fp.derivative();
    let zf_ratio = fpp.div(&fp)?.shift_up(1);
    let g = p.g.series();
    let zg_ratio = g.derivative().shift_up(1).div(g)?;
    let combo = zf_ratio.sub(&zg_ratio).add_constant(Complex64::new(1.0, 0.0));
    Ok(combo.scale(Complex64::new(d.sign(), 0.0)))
}

/// `mu z w'/(1 + w)` for a series `w` with `w(0) = 0`.
pub fn mu_log_derivative(w: &AnalyticSeries, mu: f64) -> Result<AnalyticSeries> {
    let zw = w.derivative().shift_up(1);
    let one_plus_w = w.add_constant(Complex64::new(1.0, 0.0));
    Ok(zw.div(&one_plus_w)?.scale(Complex64::new(mu, 0.0)))
}

/// `logderiv_combo - mu z w'/(1 + w)`; identically zero when the pair and
/// `w` are consistent.
pub fn identity_residual(p: &FunctionPair, mu: f64, d: Direction) -> Result<AnalyticSeries> {
    let w = w_series(p, mu, d)?;
    let rhs = mu_log_derivative(&w, mu)?;
    Ok(logderiv_combo(p, d)?.sub(&rhs))
}

/// `Re(delta + mu k e^{i theta}/(e^{i theta} + 1))`, which equals
/// `Re(delta) + mu k / 2` for every `theta != pi`.
pub fn halfplane_re(delta: Complex64, mu: f64, k: f64, theta: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(CoreError::InvalidParameter(format!("k = {k} must be nonnegative")));
    }
    let half = 0.5 * theta;
    if half.cos().abs() < 1e-12 {
        return Err(CoreError::SingularPoint(format!("w(z0) = -1 at theta = {theta}")));
    }
    // u/(u + 1) = (1 + i tan(theta/2))/2 for |u| = 1
    let ratio = Complex64::new(0.5, 0.5 * half.tan());
    Ok((delta + ratio * (mu * k)).re)
}

/// Closed-form `|delta + mu k rho e^{i theta}/(rho e^{i theta} + 1)|`:
///
/// `sqrt(delta^2 + mu delta k + (mu delta k (rho^2 - 1) + mu^2 rho^2 k^2) / (rho^2 + 1 + 2 rho cos theta))`.
pub fn boundary_modulus(delta: f64, mu: f64, k: f64, rho: f64, theta: f64) -> Result<f64> {
    if !(delta > 0.0) || !(rho > 0.0) || !(k >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "need delta > 0, rho > 0, k >= 0 (got delta = {delta}, rho = {rho}, k = {k})"
        )));
    }
    check_mu(mu)?;
    // rho^2 + 1 + 2 rho cos(theta), written without cancellation near rho e^{i theta} = -1
    let c = (0.5 * theta).cos();
    let denom = (rho - 1.0) * (rho - 1.0) + 4.0 * rho * c * c;
    if denom <= 1e-24 {
        return Err(CoreError::SingularPoint(format!("rho e^(i theta) = -1 at theta = {theta}")));
    }
    let numer = mu * delta * k * (rho * rho - 1.0) + mu * mu * rho * rho * k * k;
    Ok((delta * delta + mu * delta * k + numer / denom).max(0.0).sqrt())
}

/// `sqrt(delta / (delta + mu k))`: for `rho` at or above this value the
/// boundary modulus is smallest at `theta = 0`, provided `k > 0`.
pub fn modulus_threshold(delta: f64, mu: f64, k: f64) -> f64 {
    (delta / (delta + mu * k)).sqrt()
}

/// Whether `theta -> boundary_modulus(delta, mu, k, rho, theta)` attains its
/// minimum at `theta = 0`, decided from the sign of the `cos theta` numerator.
pub fn boundary_min_at_zero(delta: f64, mu: f64, k: f64, rho: f64) -> bool {
    mu * delta * k * (rho * rho - 1.0) + mu * mu * rho * rho * k * k >= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::AnalyticSeries;
    use alloc::vec::Vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn normalized(coeffs: &[f64]) -> NormalizedFunction {
        NormalizedFunction::detect(AnalyticSeries::from_real(coeffs).unwrap()).unwrap()
    }

    fn ident(order: usize) -> NormalizedFunction {
        NormalizedFunction::identity(order)
    }

    fn max_coeff(s: &AnalyticSeries) -> f64 {
        s.max_abs_coeff()
    }

    /// f = z + 0.25 z^2 so that z f' = z (1 + 0.5 z).
    fn quarter_pair(order: usize) -> FunctionPair {
        let mut f = alloc::vec![0.0; order + 1];
        f[1] = 1.0;
        f[2] = 0.25;
        FunctionPair::new(normalized(&f), ident(order))
    }

    #[test]
    fn ratio_minus_one_examples() {
        let p = FunctionPair::new(ident(16), ident(16));
        assert!(ratio_minus_one(&p, Direction::Forward).unwrap().is_zero());

        let p = quarter_pair(16);
        let fwd = ratio_minus_one(&p, Direction::Forward).unwrap();
        assert!((fwd.coeff(1) - c(0.5)).norm() < 1e-15);
        assert!(fwd.coeffs()[2..].iter().all(|x| x.norm() < 1e-15));

        let rec = ratio_minus_one(&p, Direction::Reciprocal).unwrap();
        // 1/(1 + z/2) - 1 = sum_{k>=1} (-1/2)^k z^k
        for k in 1..=rec.order() {
            assert!((rec.coeff(k) - c((-0.5_f64).powi(k as i32))).norm() < 1e-15);
        }
    }

    #[test]
    fn w_series_examples() {
        let p = FunctionPair::new(ident(16), ident(16));
        for mu in [0.2, 0.7, 1.0] {
            assert!(w_series(&p, mu, Direction::Forward).unwrap().is_zero());
        }
        assert!(w_series(&p, 0.0, Direction::Forward).is_err());
        assert!(w_series(&p, 1.5, Direction::Forward).is_err());

        // z f' = z (1 + 0.3 z^2): f = z + 0.1 z^3
        let mut f = alloc::vec![0.0; 17];
        f[1] = 1.0;
        f[3] = 0.1;
        let p = FunctionPair::new(normalized(&f), ident(16));
        let w = w_series(&p, 1.0, Direction::Forward).unwrap();
        assert_eq!(w.vanishing_order(), 2);
        assert!((w.coeff(2) - c(0.3)).norm() < 1e-15);
    }

    #[test]
    fn logderiv_combo_examples() {
        let p = FunctionPair::new(ident(16), ident(16));
        assert!(logderiv_combo(&p, Direction::Forward).unwrap().is_zero());

        let p = quarter_pair(32);
        let fwd = logderiv_combo(&p, Direction::Forward).unwrap();
        // z f''/f' = 0.5 z / (1 + 0.5 z)
        assert!(fwd.coeff(0).norm() < 1e-15);
        for k in 1..=fwd.order() {
            let expected = -(-0.5_f64).powi(k as i32);
            assert!((fwd.coeff(k) - c(expected)).norm() < 1e-14, "k = {k}");
        }
        let rec = logderiv_combo(&p, Direction::Reciprocal).unwrap();
        assert_eq!(rec, fwd.neg());
    }

    #[test]
    fn identity_residual_vanishes_on_hand_examples() {
        let p = FunctionPair::new(ident(24), ident(24));
        assert!(identity_residual(&p, 0.6, Direction::Forward).unwrap().is_zero());

        let p = quarter_pair(24);
        for d in [Direction::Forward, Direction::Reciprocal] {
            for mu in [0.3, 1.0] {
                let r = identity_residual(&p, mu, d).unwrap();
                assert!(max_coeff(&r) < 1e-13, "{d:?} mu = {mu}: {}", max_coeff(&r));
            }
        }
    }

    #[test]
    fn halfplane_examples() {
        assert_eq!(halfplane_re(c(0.0), 1.0, 2.0, 0.0).unwrap(), 1.0);
        let v = halfplane_re(c(0.5), 0.5, 3.0, 2.0).unwrap();
        assert!((v - 1.25).abs() < 1e-15);
        let v = halfplane_re(Complex64::new(0.0, 1.0), 0.7, 1.5, -1.1).unwrap();
        assert!((v - 0.525).abs() < 1e-15);
        assert!(matches!(
            halfplane_re(c(0.0), 1.0, 1.0, core::f64::consts::PI),
            Err(CoreError::SingularPoint(_))
        ));
    }

    #[test]
    fn boundary_modulus_examples() {
        assert!((boundary_modulus(1.0, 1.0, 1.0, 1.0, 0.0).unwrap() - 1.5).abs() < 1e-15);
        for (rho, theta) in [(0.3, 0.0), (2.0, 1.0), (0.9, -2.5)] {
            assert!((boundary_modulus(1.0, 1.0, 0.0, rho, theta).unwrap() - 1.0).abs() < 1e-15);
        }
        let (delta, mu, k, rho, theta) = (0.7, 0.9, 2.0, 0.8, 2.1);
        let u = Complex64::from_polar(rho, theta);
        let direct = (c(delta) + u * (mu * k) / (u + 1.0)).norm();
        let closed = boundary_modulus(delta, mu, k, rho, theta).unwrap();
        assert!((direct - closed).abs() < 1e-12);
        assert!(boundary_modulus(1.0, 1.0, 1.0, 1.0, core::f64::consts::PI).is_err());
        assert!(boundary_modulus(-1.0, 1.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn boundary_modulus_near_the_pole() {
        // reference value computed at 50 digits
        let v = boundary_modulus(
            0.4075642418879568,
            0.6884017106853885,
            5.681837586179425,
            0.9704149967491892,
            -3.1191931588461745,
        )
        .unwrap();
        assert!((v - 102.519_781_459_093_2).abs() < 2e-13);
    }

    #[test]
    fn boundary_minimum_location_follows_threshold() {
        let (delta, mu) = (1.0, 0.8);
        for k in [0.5, 1.0, 3.0] {
            let t = modulus_threshold(delta, mu, k);
            for rho in [0.5 * t, 0.99 * t, 1.01 * t, 1.5 * t] {
                let thetas: Vec<f64> = (0..720).map(|i| -3.1 + 6.2 * i as f64 / 719.0).collect();
                let at_zero = boundary_modulus(delta, mu, k, rho, 0.0).unwrap();
                let min = thetas
                    .iter()
                    .map(|&t| boundary_modulus(delta, mu, k, rho, t).unwrap())
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(at_zero <= min + 1e-14, rho >= t, "k = {k}, rho = {rho}");
                assert_eq!(boundary_min_at_zero(delta, mu, k, rho), rho >= t);
            }
        }
    }
}
