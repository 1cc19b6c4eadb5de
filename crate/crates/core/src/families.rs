//! Test-function generators with known ground truth.
//!
//! * [`koebe_alpha`]: `z/(1 - z^n)^{2(1-alpha)/n}`, extremal for starlikeness of order `alpha`.
//! * [`random_starlike`]: `z g'/g = alpha + (1 - alpha) p(z^n)` with `p` a
//!   convex combination of Möbius kernels, so `Re(z g'/g) > alpha` by construction.
//! * [`realize_w`]: bounded `w` with `w(0) = 0` and a known circle maximum.
//! * [`synth_from_w`]: inverts the definition of `w`, returning `f` with
//!   `z f' = g (1 + w)^mu`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::RngCore;

use crate::error::{CoreError, Result};
use crate::function::NormalizedFunction;
use crate::functionals::{check_mu, Direction};
use crate::series::AnalyticSeries;

/// At most this many Möbius kernels per starlike function.
pub const MAX_ATOMS: usize = 8;

/// Minimum circular distance between kernel phases.
pub const MIN_PHASE_GAP: f64 = 0.05;

const TAU: f64 = 2.0 * core::f64::consts::PI;

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(CoreError::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1)")))
    }
}

/// `z / (1 - z^n)^{2(1 - alpha)/n}`, with `z g'/g = (1 + (1 - 2 alpha) z^n)/(1 - z^n)`.
pub fn koebe_alpha_n(alpha: f64, n: usize, order: usize) -> Result<NormalizedFunction> {
    check_alpha(alpha)?;
    if n == 0 || n >= order {
        return Err(CoreError::InvalidParameter(format!("class index {n} must lie in 1..{order}")));
    }
    let minus_zn = AnalyticSeries::monomial(Complex64::new(-1.0, 0.0), n, order - 1);
    let g_over_z = minus_zn.pow1p(-2.0 * (1.0 - alpha) / n as f64)?;
    NormalizedFunction::new(g_over_z.shift_up(1), n)
}

/// `z / (1 - z)^{2(1 - alpha)}`; the Koebe function for `alpha = 0`.
pub fn koebe_alpha(alpha: f64, order: usize) -> Result<NormalizedFunction> {
    koebe_alpha_n(alpha, 1, order)
}

/// Weights and phases of a Herglotz kernel combination
/// `p(z) = sum_j lambda_j (1 + e^{i phi_j} z)/(1 - e^{i phi_j} z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HerglotzAtoms {
    weights: Vec<f64>,
    phases: Vec<f64>,
}

impl HerglotzAtoms {
    /// Validates positivity and renormalizes the weights to sum to one.
    pub fn new(weights: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != phases.len() {
            return Err(CoreError::InvalidParameter(
                "need matching nonempty weight and phase lists".into(),
            ));
        }
        if weights.len() > MAX_ATOMS {
            return Err(CoreError::InvalidParameter(format!("at most {MAX_ATOMS} atoms")));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) || phases.iter().any(|p| !p.is_finite()) {
            return Err(CoreError::InvalidParameter("weights must be positive and finite".into()));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.iter().map(|w| w / total).collect();
        let phases = phases
            .iter()
            .map(|p| {
                let r = p % TAU;
                if r < 0.0 {
                    r + TAU
                } else {
                    r
                }
            })
            .collect();
        Ok(Self { weights, phases })
    }

    /// Single kernel at `phi` with weight one.
    pub fn single(phi: f64) -> Self {
        Self::new(vec![1.0], vec![phi]).expect("one positive weight")
    }

    /// Random atoms with phases at least [`MIN_PHASE_GAP`] apart (circularly).
    pub fn sample<R: RngCore>(rng: &mut R, count: usize) -> Result<Self> {
        if count == 0 || count > MAX_ATOMS {
            return Err(CoreError::InvalidParameter(format!("atom count must lie in 1..={MAX_ATOMS}")));
        }
        let mut phases: Vec<f64> = Vec::with_capacity(count);
        while phases.len() < count {
            let phi = unit_f64(rng) * TAU;
            let clear = phases.iter().all(|&q| {
                let d = (phi - q).abs();
                d.min(TAU - d) >= MIN_PHASE_GAP
            });
            if clear {
                phases.push(phi);
            }
        }
        let weights = (0..count).map(|_| 0.1 + unit_f64(rng)).collect();
        Self::new(weights, phases)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// Uniform draw from `[0, 1)` with 53 random bits.
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Starlike function of order `alpha` in `A_n` built from Herglotz atoms.
pub fn random_starlike_n(alpha: f64, atoms: &HerglotzAtoms, n: usize, order: usize) -> Result<NormalizedFunction> {
    check_alpha(alpha)?;
    if n == 0 || n >= order {
        return Err(CoreError::InvalidParameter(format!("class index {n} must lie in 1..{order}")));
    }
    // log(g/z) = sum_k 2 (1 - alpha) s_k z^{nk} / (nk),  s_k = sum_j lambda_j e^{i k phi_j}
    let top = order - 1;
    let mut log = vec![Complex64::new(0.0, 0.0); top + 1];
    let mut k = 1;
    while n * k <= top {
        let s: Complex64 = atoms
            .weights
            .iter()
            .zip(&atoms.phases)
            .map(|(&l, &phi)| Complex64::from_polar(l, k as f64 * phi))
            .sum();
        log[n * k] = s * (2.0 * (1.0 - alpha) / (n * k) as f64);
        k += 1;
    }
    let g_over_z = AnalyticSeries::from_coeffs(log)?.exp0()?;
    NormalizedFunction::new(g_over_z.shift_up(1), n)
}

pub fn random_starlike(alpha: f64, atoms: &HerglotzAtoms, order: usize) -> Result<NormalizedFunction> {
    random_starlike_n(alpha, atoms, 1, order)
}

/// Shape of a bounded `w` with `w(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum WSpec {
    /// `c z^m`.
    ScaledMonomial { c: Complex64, m: usize },
    /// `c z^m (z + a)/(1 + conj(a) z)` with `|a| < 1`.
    MobiusMonomial { c: Complex64, m: usize, a: Complex64 },
    /// `c_1 z + c_2 z^2 + ...`; entry `k` multiplies `z^{k+1}`.
    Poly(Vec<Complex64>),
}

impl WSpec {
    /// Exact `max |w|` on `|z| = r`, where a closed form exists.
    pub fn circle_sup(&self, r: f64) -> Option<f64> {
        match self {
            WSpec::ScaledMonomial { c, m } => Some(c.norm() * r.powi(*m as i32)),
            WSpec::MobiusMonomial { c, m, a } => {
                let s = a.norm();
                Some(c.norm() * r.powi(*m as i32) * (r + s) / (1.0 + s * r))
            }
            WSpec::Poly(_) => None,
        }
    }
}

/// Series of `w`. Requires the vanishing order to be at least `n`.
pub fn realize_w(spec: &WSpec, n: usize, order: usize) -> Result<AnalyticSeries> {
    let bad = |msg: alloc::string::String| Err(CoreError::SpecInvalid(msg));
    let w = match spec {
        WSpec::ScaledMonomial { c, m } => {
            if *m == 0 || *m > order {
                return bad(format!("monomial degree {m} must lie in 1..={order}"));
            }
            AnalyticSeries::monomial(*c, *m, order)
        }
        WSpec::MobiusMonomial { c, m, a } => {
            if *m == 0 || *m >= order {
                return bad(format!("monomial degree {m} must lie in 1..{order}"));
            }
            if !(a.norm() < 1.0) {
                return bad(format!("|a| = {} must be below 1", a.norm()));
            }
            // (z + a) / (1 + conj(a) z) = (z + a) sum_k (-conj(a) z)^k
            let geom: Vec<Complex64> = (0..=order).map(|k| (-a.conj()).powu(k as u32)).collect();
            let mut numer = vec![Complex64::new(0.0, 0.0); order + 1];
            numer[0] = *a;
            numer[1] = Complex64::new(1.0, 0.0);
            let blaschke = AnalyticSeries::from_coeffs(numer)?.mul(&AnalyticSeries::from_coeffs(geom)?);
            AnalyticSeries::monomial(*c, *m, order).mul(&blaschke)
        }
        WSpec::Poly(coeffs) => {
            if coeffs.is_empty() || coeffs.len() > order {
                return bad(format!("need between 1 and {order} coefficients"));
            }
            let mut v = vec![Complex64::new(0.0, 0.0); order + 1];
            v[1..=coeffs.len()].copy_from_slice(coeffs);
            AnalyticSeries::from_coeffs(v)?
        }
    };
    if w.vanishing_order() < n {
        return bad(format!("w vanishes to order {} but class index {n} needs at least {n}", w.vanishing_order()));
    }
    Ok(w)
}

/// `f` with `z f' = g (1 + w)^{mu}` (forward) or `z f' = g (1 + w)^{-mu}`
/// (reciprocal), so that the pair `(f, g)` reproduces `w` in that direction.
pub fn synth_with(g: &NormalizedFunction, mu: f64, w: &AnalyticSeries, d: Direction) -> Result<NormalizedFunction> {
    check_mu(mu)?;
    if w.vanishing_order() < 1 {
        return Err(CoreError::BranchPrecondition);
    }
    let e = match d {
        Direction::Forward => mu,
        Direction::Reciprocal => -mu,
    };
    let zfp = g.series().mul(&w.pow1p(e)?);
    let f = zfp.shift_down(1)?.antiderivative0();
    NormalizedFunction::detect(f)
}

pub fn synth_from_w(g: &NormalizedFunction, mu: f64, w: &AnalyticSeries) -> Result<NormalizedFunction> {
    synth_with(g, mu, w, Direction::Forward)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{w_series, FunctionPair};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - c(b)).norm() < tol
    }

    #[test]
    fn koebe_examples() {
        let k = koebe_alpha(0.0, 40).unwrap();
        assert!((0..=40).all(|j| close(k.series().coeff(j), j as f64, 1e-12 * j.max(1) as f64)));
        let h = koebe_alpha(0.5, 40).unwrap();
        assert!((1..=40).all(|j| close(h.series().coeff(j), 1.0, 1e-12)));
        let near_one = koebe_alpha(1.0 - 1e-12, 20).unwrap();
        assert!((2..=20).all(|j| near_one.series().coeff(j).norm() < 1e-10));
        assert!(koebe_alpha(1.0, 10).is_err());
    }

    #[test]
    fn koebe_n_has_class_index_n() {
        let g = koebe_alpha_n(0.2, 3, 30).unwrap();
        assert_eq!(g.n_index(), 3);
        assert!(g.series().coeff(2).norm() == 0.0 && g.series().coeff(3).norm() == 0.0);
        assert!(g.series().coeff(4).norm() > 0.0);
    }

    #[test]
    fn starlike_examples() {
        let koebe = random_starlike(0.0, &HerglotzAtoms::single(0.0), 30).unwrap();
        assert!((0..=30).all(|j| close(koebe.series().coeff(j), j as f64, 1e-12 * j.max(1) as f64)));

        let rotated = random_starlike(0.0, &HerglotzAtoms::single(core::f64::consts::PI), 30).unwrap();
        for j in 1..=30 {
            let expected = if j % 2 == 1 { j as f64 } else { -(j as f64) };
            assert!(close(rotated.series().coeff(j), expected, 1e-11), "j = {j}");
        }

        let atoms = HerglotzAtoms::new(vec![1.0, 1.0], vec![0.0, core::f64::consts::PI]).unwrap();
        let odd = random_starlike(0.0, &atoms, 30).unwrap();
        for j in 1..=30 {
            let expected = if j % 2 == 1 { 1.0 } else { 0.0 };
            assert!(close(odd.series().coeff(j), expected, 1e-12), "j = {j}");
        }
    }

    #[test]
    fn atoms_validation_and_normalization() {
        let a = HerglotzAtoms::new(vec![2.0, 6.0], vec![-1.0, 7.0]).unwrap();
        assert_eq!(a.weights(), &[0.25, 0.75]);
        assert!(a.phases().iter().all(|p| (0.0..TAU).contains(p)));
        assert!(HerglotzAtoms::new(vec![1.0], vec![]).is_err());
        assert!(HerglotzAtoms::new(vec![-1.0], vec![0.0]).is_err());
        assert!(HerglotzAtoms::new(vec![1.0; 9], vec![0.0; 9]).is_err());
    }

    #[test]
    fn realize_w_examples() {
        let w = realize_w(&WSpec::ScaledMonomial { c: c(0.6), m: 1 }, 1, 16).unwrap();
        assert_eq!(w.coeff(1), c(0.6));
        assert_eq!(w.vanishing_order(), 1);
        let w = realize_w(&WSpec::ScaledMonomial { c: c(1.2), m: 2 }, 2, 16).unwrap();
        assert_eq!(w.coeff(2), c(1.2));
        let w = realize_w(&WSpec::Poly(vec![c(0.3), c(0.2)]), 1, 16).unwrap();
        assert_eq!(w.coeff(1), c(0.3));
        assert_eq!(w.coeff(2), c(0.2));
        assert!(matches!(
            realize_w(&WSpec::ScaledMonomial { c: c(0.5), m: 1 }, 2, 16),
            Err(CoreError::SpecInvalid(_))
        ));
        assert!(realize_w(&WSpec::MobiusMonomial { c: c(0.5), m: 1, a: c(1.0) }, 1, 16).is_err());
    }

    #[test]
    fn mobius_monomial_matches_closed_form() {
        let a = Complex64::new(0.3, -0.4);
        let spec = WSpec::MobiusMonomial { c: c(0.7), m: 2, a };
        let w = realize_w(&spec, 2, 128).unwrap();
        let z = Complex64::new(0.2, 0.5);
        let direct = 0.7 * z * z * (z + a) / (1.0 + a.conj() * z);
        assert!((w.eval(z).unwrap().value - direct).norm() < 1e-14);
        // sup on the circle is attained in the direction of a
        let r = 0.8;
        let z_star = Complex64::from_polar(r, a.arg());
        let at_star = w.eval(z_star).unwrap().value.norm();
        assert!((at_star - spec.circle_sup(r).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn synth_examples() {
        let id = NormalizedFunction::identity(16);
        let w = realize_w(&WSpec::ScaledMonomial { c: c(0.5), m: 1 }, 1, 16).unwrap();
        let f = synth_from_w(&id, 1.0, &w).unwrap();
        assert!(close(f.series().coeff(2), 0.25, 1e-15));
        assert!(f.series().coeffs()[3..].iter().all(|x| x.norm() < 1e-15));

        let koebe = koebe_alpha(0.0, 32).unwrap();
        let f = synth_from_w(&koebe, 0.4, &AnalyticSeries::zero(32)).unwrap();
        assert!((1..=f.order()).all(|j| close(f.series().coeff(j), 1.0, 1e-12)));

        let w = realize_w(&WSpec::ScaledMonomial { c: c(0.4), m: 1 }, 1, 64).unwrap();
        let f = synth_from_w(&NormalizedFunction::identity(64), 0.5, &w).unwrap();
        let p = FunctionPair::new(f, NormalizedFunction::identity(64));
        let back = w_series(&p, 0.5, Direction::Forward).unwrap();
        assert!(back.sub(&w).max_abs_coeff() < 1e-10);
    }

    #[test]
    fn reciprocal_synth_round_trips() {
        let g = koebe_alpha(0.3, 64).unwrap();
        let w = realize_w(&WSpec::Poly(vec![c(0.2), Complex64::new(0.1, 0.3)]), 1, 64).unwrap();
        let f = synth_with(&g, 0.7, &w, Direction::Reciprocal).unwrap();
        let p = FunctionPair::new(f, g);
        let back = w_series(&p, 0.7, Direction::Reciprocal).unwrap();
        assert!(back.sub(&w).max_abs_coeff() < 1e-10);
    }

    #[test]
    fn synth_rejects_bad_inputs() {
        let id = NormalizedFunction::identity(8);
        assert!(synth_from_w(&id, 0.0, &AnalyticSeries::zero(8)).is_err());
        assert_eq!(
            synth_from_w(&id, 0.5, &AnalyticSeries::one(8)),
            Err(CoreError::BranchPrecondition)
        );
    }
}
