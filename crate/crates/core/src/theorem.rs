//! Hypothesis and conclusion evaluators for the five sufficient conditions,
//! plus class-membership margins.
//!
//! Every condition has the shape
//!
//! ```text
//! |w(z)|^beta * F(z)^gamma  <  bound      (z in the unit disk)
//! ```
//!
//! where `F` is either `Re(delta + combo)` or `|delta + combo|` and `combo` is
//! the signed logarithmic-derivative combination. The conclusion is
//! `|w| < 1` (or `|w| < rho`). A [`Verdict`] evaluates both sides on a
//! [`DiskGrid`] and records whether the implication survived.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::function::NormalizedFunction;
use crate::functionals::{check_mu, w_series, Direction, FunctionPair};
use crate::jack::R_MAX;
use crate::series::AnalyticSeries;

/// Any tail bound above this marks an evaluation unreliable.
pub const RELIABILITY_THRESHOLD: f64 = 1e-7;

/// `|f'(z)|` or `|g(z)|` below this makes the hypothesis undefined at `z`.
pub const SINGULAR_TOL: f64 = 1e-12;

pub const DEFAULT_RADII: usize = 64;
pub const DEFAULT_ANGLES: usize = 512;
const MIN_ANGLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    /// `Re`-form, forward ratio, `g` starlike.
    One,
    /// `Re`-form without the `z g'/g` term, `g` starlike of order `alpha`.
    Two,
    /// Modulus form, forward ratio, conclusion `|w| < rho`.
    Three,
    /// `Re`-form, reciprocal ratio.
    Four,
    /// Modulus form, reciprocal ratio, conclusion `|w| < rho`.
    Five,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] =
        [TheoremId::One, TheoremId::Two, TheoremId::Three, TheoremId::Four, TheoremId::Five];

    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(TheoremId::One),
            2 => Ok(TheoremId::Two),
            3 => Ok(TheoremId::Three),
            4 => Ok(TheoremId::Four),
            5 => Ok(TheoremId::Five),
            _ => Err(CoreError::InvalidParameter(format!("theorem {n} is not one of 1..=5"))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            TheoremId::One => 1,
            TheoremId::Two => 2,
            TheoremId::Three => 3,
            TheoremId::Four => 4,
            TheoremId::Five => 5,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            TheoremId::One | TheoremId::Two | TheoremId::Three => Direction::Forward,
            TheoremId::Four | TheoremId::Five => Direction::Reciprocal,
        }
    }

    /// Theorems 3 and 5 bound `|delta + combo|` and conclude `|w| < rho`.
    pub fn is_modulus_form(self) -> bool {
        matches!(self, TheoremId::Three | TheoremId::Five)
    }

    /// Only theorem 2 states its hypothesis with a non-strict inequality.
    pub fn strict_hypothesis(self) -> bool {
        self != TheoremId::Two
    }
}

/// Parameters of one theorem instance.
///
/// `rho` is read only by theorems 3 and 5, `alpha` only by theorem 2. For the
/// modulus forms `delta` must be a positive real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremParams {
    pub id: TheoremId,
    pub mu: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: Complex64,
    pub rho: f64,
    pub alpha: f64,
    /// Effective class index `min(n_1, n_2)`.
    pub n: usize,
}

fn invalid(msg: alloc::string::String) -> CoreError {
    CoreError::InvalidParameter(msg)
}

impl TheoremParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.mu, self.beta, self.gamma, self.delta.re, self.delta.im, self.rho, self.alpha]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(invalid("parameters must be finite".into()));
        }
        check_mu(self.mu)?;
        if self.beta < 0.0 || self.gamma < 0.0 || self.beta + self.gamma <= 0.0 {
            return Err(invalid(format!(
                "need beta >= 0, gamma >= 0, beta + gamma > 0 (got {}, {})",
                self.beta, self.gamma
            )));
        }
        if self.n == 0 {
            return Err(invalid("class index n must be positive".into()));
        }
        let half = self.mu * self.n as f64 / 2.0;
        match self.id {
            TheoremId::One | TheoremId::Four => {
                if !(self.delta.re > -half) {
                    return Err(invalid(format!("need Re(delta) > -mu n / 2 = {}", -half)));
                }
            }
            TheoremId::Two => {
                if !(0.0..1.0).contains(&self.alpha) {
                    return Err(invalid(format!("alpha = {} must lie in [0, 1)", self.alpha)));
                }
                if !(self.delta.re > -half - self.alpha) {
                    return Err(invalid(format!(
                        "need Re(delta) > -mu n / 2 - alpha = {}",
                        -half - self.alpha
                    )));
                }
            }
            TheoremId::Three | TheoremId::Five => {
                if self.delta.im != 0.0 || !(self.delta.re > 0.0) {
                    return Err(invalid(format!("delta = {} must be a positive real", self.delta)));
                }
                let floor = rho_floor(self.delta.re, self.mu, self.n);
                if !(self.rho > floor) {
                    return Err(invalid(format!("rho = {} must exceed {floor}", self.rho)));
                }
            }
        }
        Ok(())
    }

    /// Right-hand side of the conclusion: 1, or `rho` for the modulus forms.
    pub fn conclusion_bound(&self) -> f64 {
        if self.id.is_modulus_form() {
            self.rho
        } else {
            1.0
        }
    }
}

/// `x^e` with `x^0 = 1` for every `x`, including 0.
fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// `x^e` for a possibly negative base; `None` when the base is negative and
/// the exponent is not an integer.
fn real_power(x: f64, e: f64) -> Option<f64> {
    if e == 0.0 {
        Some(1.0)
    } else if x >= 0.0 || e.fract() == 0.0 {
        Some(x.powf(e))
    } else {
        None
    }
}

/// Closed-form right-hand side of the hypothesis.
pub fn rhs_bound(tp: &TheoremParams) -> f64 {
    let n = tp.n as f64;
    match tp.id {
        TheoremId::One | TheoremId::Four => pow0(tp.delta.re + tp.mu * n / 2.0, tp.gamma),
        TheoremId::Two => pow0(tp.delta.re + tp.alpha + tp.mu * n / 2.0, tp.gamma),
        TheoremId::Three | TheoremId::Five => {
            let rho = tp.rho;
            pow0(rho, tp.beta) * pow0(tp.delta.re + tp.mu * rho * n / (1.0 + rho), tp.gamma)
        }
    }
}

/// `sqrt(delta / (delta + mu n))`, the smallest admissible `rho` (exclusive).
pub fn rho_floor(delta: f64, mu: f64, n: usize) -> f64 {
    (delta / (delta + mu * n as f64)).sqrt()
}

/// Sampling lattice `r_i e^{2 pi i j / angles}` over the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskGrid {
    radii: Vec<f64>,
    angles: usize,
}

impl DiskGrid {
    pub fn new(radii: Vec<f64>, angles: usize) -> Result<Self> {
        if radii.is_empty() {
            return Err(CoreError::GridEmpty);
        }
        if angles < MIN_ANGLES {
            return Err(invalid(format!("need at least {MIN_ANGLES} angles, got {angles}")));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("radii must be strictly increasing".into()));
        }
        if !(radii[0] > 0.0) || !(radii[radii.len() - 1] <= R_MAX) {
            return Err(invalid(format!("radii must lie in (0, {R_MAX}]")));
        }
        Ok(Self { radii, angles })
    }

    /// `count` radii ending at `r_max`, with `1 - r` geometric between
    /// `1 - r_max / 10` and `1 - r_max` so that they crowd towards the boundary.
    pub fn geometric(count: usize, angles: usize, r_max: f64) -> Result<Self> {
        if count == 0 {
            return Err(CoreError::GridEmpty);
        }
        if !(r_max > 0.0 && r_max <= R_MAX) {
            return Err(invalid(format!("r_max = {r_max} outside (0, {R_MAX}]")));
        }
        let radii = if count == 1 {
            alloc::vec![r_max]
        } else {
            let first = 1.0 - r_max / 10.0;
            let last = 1.0 - r_max;
            let mut radii: Vec<f64> = (0..count)
                .map(|i| 1.0 - first * (last / first).powf(i as f64 / (count - 1) as f64))
                .collect();
            radii[count - 1] = r_max;
            radii
        };
        Self::new(radii, angles)
    }

    /// 64 radii towards 0.995, 512 angles.
    pub fn default_grid() -> Self {
        Self::geometric(DEFAULT_RADII, DEFAULT_ANGLES, R_MAX).expect("default grid is valid")
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    pub fn r_max(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angles
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        let step = 2.0 * core::f64::consts::PI / self.angles as f64;
        self.radii
            .iter()
            .flat_map(move |&r| (0..self.angles).map(move |j| Complex64::from_polar(r, step * j as f64)))
    }
}

/// Hypothesis side at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LhsValue {
    Defined(f64),
    /// Negative `Re` base under a non-integer power, or `f'(z) = 0`, or `g(z) = 0`.
    Undefined,
}

/// Pointwise evaluation of one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSample {
    pub lhs: LhsValue,
    pub w_modulus: f64,
    /// Largest tail bound among the series evaluated at this point.
    pub tail_bound: f64,
}

/// Series needed to evaluate one theorem on one pair at arbitrary points.
#[derive(Clone, Debug)]
pub struct HypothesisEvaluator {
    tp: TheoremParams,
    fp: AnalyticSeries,
    fpp: AnalyticSeries,
    g: AnalyticSeries,
    gp: AnalyticSeries,
    w: AnalyticSeries,
}

impl HypothesisEvaluator {
    pub fn new(tp: &TheoremParams, p: &FunctionPair) -> Result<Self> {
        tp.validate()?;
        if tp.n > p.n() {
            return Err(invalid(format!(
                "theorem index n = {} exceeds min(n1, n2) = {} of the pair",
                tp.n,
                p.n()
            )));
        }
        let fp = p.f().series().derivative();
        let fpp = fp.derivative();
        let g = p.g().series().clone();
        let gp = g.derivative();
        let w = w_series(p, tp.mu, tp.id.direction())?;
        Ok(Self { tp: *tp, fp, fpp, g, gp, w })
    }

    pub fn params(&self) -> &TheoremParams {
        &self.tp
    }

    pub fn w(&self) -> &AnalyticSeries {
        &self.w
    }

    /// Evaluates `f'`, `f''`, `g`, `g'` and `w` at `z` and combines them.
    pub fn sample(&self, z: Complex64) -> Result<PointSample> {
        let fp = self.fp.eval(z)?;
        let fpp = self.fpp.eval(z)?;
        let g = self.g.eval(z)?;
        let gp = self.gp.eval(z)?;
        let w = self.w.eval(z)?;
        let tail_bound = [fp.tail_bound, fpp.tail_bound, g.tail_bound, gp.tail_bound, w.tail_bound]
            .into_iter()
            .fold(0.0, f64::max);
        let w_modulus = w.value.norm();
        let lhs = if fp.value.norm() < SINGULAR_TOL || g.value.norm() < SINGULAR_TOL {
            LhsValue::Undefined
        } else {
            let zf = z * fpp.value / fp.value;
            let zg = z * gp.value / g.value;
            let combo = match self.tp.id {
                TheoremId::One | TheoremId::Three => 1.0 + zf - zg,
                TheoremId::Two => 1.0 + zf,
                TheoremId::Four | TheoremId::Five => -1.0 - zf + zg,
            };
            let shifted = self.tp.delta + combo;
            let factor = if self.tp.id.is_modulus_form() {
                Some(pow0(shifted.norm(), self.tp.gamma))
            } else {
                real_power(shifted.re, self.tp.gamma)
            };
            match factor.map(|f| pow0(w_modulus, self.tp.beta) * f) {
                Some(v) if v.is_finite() => LhsValue::Defined(v),
                _ => LhsValue::Undefined,
            }
        };
        Ok(PointSample { lhs, w_modulus, tail_bound })
    }
}

/// Hypothesis left-hand side at `z`, failing when the evaluation there is
/// not reliable.
pub fn lhs_at(tp: &TheoremParams, p: &FunctionPair, z: Complex64) -> Result<LhsValue> {
    if !(z.norm() <= R_MAX) {
        return Err(CoreError::OutsideDisk { modulus: z.norm() });
    }
    let s = HypothesisEvaluator::new(tp, p)?.sample(z)?;
    if s.tail_bound > RELIABILITY_THRESHOLD {
        return Err(CoreError::EvaluationUnreliable { tail_bound: s.tail_bound });
    }
    Ok(s.lhs)
}

/// Outcome of checking one theorem instance on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub theorem: TheoremId,
    pub n: usize,
    /// Vanishing order of the realized `w`; may exceed `n`.
    pub w_vanishing_order: usize,
    pub hyp_sup: f64,
    pub hyp_bound: f64,
    pub hyp_holds: bool,
    pub hyp_undefined: Vec<Complex64>,
    pub concl_sup: f64,
    pub concl_bound: f64,
    pub concl_holds: bool,
    /// `!hyp_holds || concl_holds`.
    pub consistent: bool,
    pub witness_hyp: Option<Complex64>,
    pub witness_concl: Option<Complex64>,
    /// Largest tail bound met on the grid.
    pub reliability: f64,
    pub reliable: bool,
    pub points: usize,
}

impl Verdict {
    /// `w` vanishes to a higher order than the declared class indices imply.
    pub fn index_mismatch(&self) -> bool {
        self.w_vanishing_order > self.n
    }
}

/// Accumulates samples in grid order.
#[derive(Clone, Debug)]
pub struct VerdictBuilder {
    hyp_sup: f64,
    witness_hyp: Option<Complex64>,
    undefined: Vec<Complex64>,
    concl_sup: f64,
    witness_concl: Option<Complex64>,
    reliability: f64,
    points: usize,
}

impl Default for VerdictBuilder {
    fn default() -> Self {
        Self {
            hyp_sup: f64::NEG_INFINITY,
            witness_hyp: None,
            undefined: Vec::new(),
            concl_sup: f64::NEG_INFINITY,
            witness_concl: None,
            reliability: 0.0,
            points: 0,
        }
    }
}

impl VerdictBuilder {
    pub fn push(&mut self, z: Complex64, s: &PointSample) {
        self.points += 1;
        match s.lhs {
            LhsValue::Defined(v) => {
                if v > self.hyp_sup {
                    self.hyp_sup = v;
                    self.witness_hyp = Some(z);
                }
            }
            LhsValue::Undefined => self.undefined.push(z),
        }
        if s.w_modulus > self.concl_sup {
            self.concl_sup = s.w_modulus;
            self.witness_concl = Some(z);
        }
        self.reliability = self.reliability.max(s.tail_bound);
    }

    /// Folds a builder that covered later grid points into this one; ties keep
    /// the earlier witness.
    pub fn merge(&mut self, later: VerdictBuilder) {
        if later.hyp_sup > self.hyp_sup {
            self.hyp_sup = later.hyp_sup;
            self.witness_hyp = later.witness_hyp;
        }
        if later.concl_sup > self.concl_sup {
            self.concl_sup = later.concl_sup;
            self.witness_concl = later.witness_concl;
        }
        self.undefined.extend(later.undefined);
        self.reliability = self.reliability.max(later.reliability);
        self.points += later.points;
    }

    pub fn finish(self, eval: &HypothesisEvaluator) -> Verdict {
        let tp = eval.params();
        let hyp_bound = rhs_bound(tp);
        let below = if tp.id.strict_hypothesis() {
            self.hyp_sup < hyp_bound
        } else {
            self.hyp_sup <= hyp_bound
        };
        let hyp_holds = self.undefined.is_empty() && below;
        let concl_bound = tp.conclusion_bound();
        let concl_holds = self.concl_sup < concl_bound;
        Verdict {
            theorem: tp.id,
            n: tp.n,
            w_vanishing_order: eval.w().vanishing_order(),
            hyp_sup: self.hyp_sup,
            hyp_bound,
            hyp_holds,
            hyp_undefined: self.undefined,
            concl_sup: self.concl_sup,
            concl_bound,
            concl_holds,
            consistent: !hyp_holds || concl_holds,
            witness_hyp: self.witness_hyp,
            witness_concl: self.witness_concl,
            reliability: self.reliability,
            reliable: self.reliability <= RELIABILITY_THRESHOLD,
            points: self.points,
        }
    }
}

/// Evaluates hypothesis and conclusion over the whole grid.
///
/// Points where the hypothesis is undefined count as hypothesis failures.
/// Unreliable tail bounds do not abort the check; they show up in
/// [`Verdict::reliable`].
pub fn check(tp: &TheoremParams, p: &FunctionPair, grid: &DiskGrid) -> Result<Verdict> {
    if grid.is_empty() {
        return Err(CoreError::GridEmpty);
    }
    let eval = HypothesisEvaluator::new(tp, p)?;
    let mut acc = VerdictBuilder::default();
    for z in grid.points() {
        acc.push(z, &eval.sample(z)?);
    }
    Ok(acc.finish(&eval))
}

fn infimum_re(series: &AnalyticSeries, grid: &DiskGrid) -> Result<f64> {
    let mut inf = f64::INFINITY;
    let mut worst_tail: f64 = 0.0;
    for z in grid.points() {
        let e = series.eval(z)?;
        worst_tail = worst_tail.max(e.tail_bound);
        inf = inf.min(e.value.re);
    }
    if worst_tail > RELIABILITY_THRESHOLD {
        return Err(CoreError::EvaluationUnreliable { tail_bound: worst_tail });
    }
    Ok(inf)
}

/// `inf Re(z g'/g) - alpha` over the grid; positive certifies starlikeness of
/// order `alpha` on the sampled region.
pub fn starlike_margin(g: &NormalizedFunction, alpha: f64, grid: &DiskGrid) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid(format!("alpha = {alpha} must lie in [0, 1)")));
    }
    let s = g.series();
    let zg = s.derivative().shift_up(1).div(s)?;
    Ok(infimum_re(&zg, grid)? - alpha)
}

/// `inf Re(1 + w)` over the grid with the forward `w`; positive certifies
/// strong close-to-convexity of order `mu` relative to this `g`.
pub fn stc_margin(p: &FunctionPair, mu: f64, grid: &DiskGrid) -> Result<f64> {
    let w = w_series(p, mu, Direction::Forward)?;
    infimum_re(&w.add_constant(Complex64::new(1.0, 0.0)), grid)
}
