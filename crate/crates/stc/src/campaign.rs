//! Seeded randomized campaigns for the implication property: whenever the
//! sampled hypothesis holds, the conclusion must hold too.
//!
//! Every sample is a pure function of `(seed, theorem, index)`. Samples are
//! drawn in index order until the requested number of reliable verdicts is
//! reached; rejected and unreliable draws are counted, not hidden.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use stc_core::families::{random_starlike_n, realize_w, synth_with, unit_f64, HerglotzAtoms, WSpec, MAX_ATOMS};
use stc_core::theorem::{rho_floor, starlike_margin, stc_margin, DiskGrid, TheoremId, TheoremParams, Verdict};
use stc_core::{Complex64, CoreError, FunctionPair};

use crate::commands::check_par;

/// Smallest certified starlike margin of `g`.
pub const CERTIFIED_MARGIN: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub theorem: TheoremId,
    pub seed: u64,
    /// Reliable verdicts to collect.
    pub target: usize,
    /// Give up after this many draws.
    pub max_draws: usize,
    pub order: usize,
    pub grid: DiskGrid,
}

impl CampaignConfig {
    pub fn new(theorem: TheoremId, seed: u64, target: usize) -> Self {
        Self {
            theorem,
            seed,
            target,
            max_draws: target * 4,
            order: 256,
            grid: DiskGrid::geometric(16, 128, 0.85).expect("campaign grid is valid"),
        }
    }
}

/// What was drawn; enough to rebuild the pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleInputs {
    pub index: u64,
    pub g_alpha: f64,
    pub g_n: usize,
    pub atoms: HerglotzAtoms,
    pub w: WSpec,
    pub params: TheoremParams,
}

#[derive(Clone, Debug)]
pub enum SampleOutcome {
    Verdict { inputs: Box<SampleInputs>, verdict: Verdict, stc_margin: Option<f64> },
    /// `g` missed the certified margin or a draw failed a precondition.
    Rejected { index: u64, reason: String },
    Unreliable { index: u64, tail_bound: f64 },
}

#[derive(Clone, Debug, Default)]
pub struct CampaignSummary {
    pub draws: usize,
    pub reliable: usize,
    pub rejected: usize,
    pub unreliable: usize,
    pub hyp_holds: usize,
    pub concl_fails: usize,
    /// Reliable verdicts with `hyp_holds` but not `concl_holds`.
    pub inconsistent: Vec<SampleInputs>,
    /// Verdicts whose hypothesis passed despite undefined grid points.
    pub undefined_leaks: usize,
    /// Forward verdicts with `concl_sup < 1` but `stc_margin <= 0`.
    pub stc_violations: usize,
    /// Verdicts whose `w` vanishes beyond `n`.
    pub index_mismatches: usize,
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(rng)
}

fn below(rng: &mut ChaCha8Rng, n: u32) -> u32 {
    rng.next_u32() % n
}

fn polar(rng: &mut ChaCha8Rng, modulus: f64) -> Complex64 {
    Complex64::from_polar(modulus, uniform(rng, 0.0, std::f64::consts::TAU))
}

/// Exponents with exact zeros and integers mixed in.
fn exponent(rng: &mut ChaCha8Rng) -> f64 {
    match below(rng, 10) {
        0 | 1 => 0.0,
        2 => 1.0,
        3 => 2.0,
        _ => uniform(rng, 0.0, 2.5),
    }
}

fn class_index(rng: &mut ChaCha8Rng) -> usize {
    match below(rng, 10) {
        0..=4 => 1,
        5..=7 => 2,
        _ => 3,
    }
}

fn draw_w(rng: &mut ChaCha8Rng, n1: usize) -> WSpec {
    // half the draws stay inside the unit disk, the rest may leave it
    let size = if below(rng, 2) == 0 { uniform(rng, 0.05, 0.95) } else { uniform(rng, 0.95, 1.6) };
    match below(rng, 4) {
        0 => WSpec::ScaledMonomial { c: polar(rng, size.min(0.999)), m: n1 + below(rng, 2) as usize },
        1 => {
            let c = polar(rng, size.min(0.999));
            let a = uniform(rng, 0.0, 0.7);
            WSpec::MobiusMonomial { c, m: n1, a: polar(rng, a) }
        }
        2 => {
            // (1 + c z^m)^p - 1: 1 + w has no zeros in the disk, yet |w| can exceed 1
            let p = 2 + below(rng, 2);
            let modulus = uniform(rng, 0.3, 0.95);
            let c = polar(rng, modulus);
            let mut coeffs = vec![Complex64::new(0.0, 0.0); (p as usize) * n1];
            let mut binom = 1.0;
            for k in 1..=p {
                binom = binom * (p - k + 1) as f64 / k as f64;
                coeffs[k as usize * n1 - 1] = c.powu(k) * binom;
            }
            WSpec::Poly(coeffs)
        }
        _ => {
            let terms = 1 + below(rng, 4) as usize;
            let mut raw: Vec<Complex64> = (0..terms)
                .map(|_| {
                    let r = unit_f64(rng);
                    polar(rng, r)
                })
                .collect();
            let total: f64 = raw.iter().map(|c| c.norm()).sum();
            let scale = if total > 0.0 { size / total } else { 0.0 };
            raw.iter_mut().for_each(|c| *c *= scale);
            let mut coeffs = vec![Complex64::new(0.0, 0.0); n1 - 1];
            coeffs.extend(raw);
            WSpec::Poly(coeffs)
        }
    }
}

fn sample_rng(seed: u64, theorem: TheoremId, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((theorem.number() as u64) << 48) | index);
    rng
}

/// Draws and checks one sample.
pub fn run_sample(cfg: &CampaignConfig, index: u64) -> SampleOutcome {
    match try_sample(cfg, index) {
        Ok(out) => out,
        Err(CoreError::EvaluationUnreliable { tail_bound }) => SampleOutcome::Unreliable { index, tail_bound },
        Err(e) => SampleOutcome::Rejected { index, reason: e.to_string() },
    }
}

fn try_sample(cfg: &CampaignConfig, index: u64) -> Result<SampleOutcome, CoreError> {
    let id = cfg.theorem;
    let rng = &mut sample_rng(cfg.seed, id, index);
    let theorem_alpha = if id == TheoremId::Two { uniform(rng, 0.0, 0.7) } else { 0.0 };
    let g_alpha = if id == TheoremId::Two { theorem_alpha } else { uniform(rng, 0.0, 0.5) };
    let g_n = class_index(rng);
    let atom_count = 1 + below(rng, MAX_ATOMS as u32) as usize;
    let atoms = HerglotzAtoms::sample(rng, atom_count)?;
    let n1 = class_index(rng);
    let w_spec = draw_w(rng, n1);
    let mu = if below(rng, 5) == 0 { 1.0 } else { uniform(rng, 0.05, 1.0) };
    let beta = exponent(rng);
    let mut gamma = exponent(rng);
    if beta + gamma == 0.0 {
        gamma = 1.0;
    }
    let delta_draw = (unit_f64(rng), uniform(rng, -1.0, 1.0), below(rng, 10) < 3, unit_f64(rng));

    let g = random_starlike_n(g_alpha, &atoms, g_n, cfg.order)?;
    let margin = starlike_margin(&g, theorem_alpha, &cfg.grid)?;
    if !(margin > CERTIFIED_MARGIN) {
        return Ok(SampleOutcome::Rejected { index, reason: format!("starlike margin {margin:.3e}") });
    }
    let w = realize_w(&w_spec, 1, cfg.order)?;
    let f = synth_with(&g, mu, &w, id.direction())?;
    let pair = FunctionPair::new(f, g);
    let n = pair.n();

    let half = mu * n as f64 / 2.0;
    let (u, im, real_only, v) = delta_draw;
    let (delta, rho) = match id {
        TheoremId::Three | TheoremId::Five => {
            let d = 0.01 + 1.99 * u;
            let floor = rho_floor(d, mu, n);
            (Complex64::new(d, 0.0), floor + (1.3 - floor).max(0.05) * (0.001 + 0.999 * v))
        }
        _ => {
            // Re(delta) from 90% of the way down to the floor up to 2
            let floor = -half - theorem_alpha;
            let re = 0.9 * floor + (2.0 - 0.9 * floor) * u;
            (Complex64::new(re, if real_only { 0.0 } else { im }), 0.0)
        }
    };
    let params = TheoremParams { id, mu, beta, gamma, delta, rho, alpha: theorem_alpha, n };
    params.validate()?;

    let verdict = check_par(&params, &pair, &cfg.grid)?;
    if !verdict.reliable {
        return Ok(SampleOutcome::Unreliable { index, tail_bound: verdict.reliability });
    }
    let stc = if id.direction() == stc_core::Direction::Forward && verdict.concl_sup < 1.0 {
        Some(stc_margin(&pair, mu, &cfg.grid)?)
    } else {
        None
    };
    let inputs = SampleInputs { index, g_alpha, g_n, atoms, w: w_spec, params };
    Ok(SampleOutcome::Verdict { inputs: Box::new(inputs), verdict, stc_margin: stc })
}

/// Runs draws in parallel batches and folds them in index order.
pub fn run_campaign(cfg: &CampaignConfig) -> CampaignSummary {
    let mut s = CampaignSummary::default();
    let mut next = 0u64;
    while s.reliable < cfg.target && s.draws < cfg.max_draws {
        let batch = (cfg.target - s.reliable).max(16).min(cfg.max_draws - s.draws) as u64;
        let outcomes: Vec<SampleOutcome> = (next..next + batch).into_par_iter().map(|i| run_sample(cfg, i)).collect();
        next += batch;
        for out in outcomes {
            if s.reliable >= cfg.target {
                break;
            }
            s.draws += 1;
            match out {
                SampleOutcome::Rejected { .. } => s.rejected += 1,
                SampleOutcome::Unreliable { .. } => s.unreliable += 1,
                SampleOutcome::Verdict { inputs, verdict, stc_margin } => {
                    s.reliable += 1;
                    s.hyp_holds += usize::from(verdict.hyp_holds);
                    s.concl_fails += usize::from(!verdict.concl_holds);
                    s.index_mismatches += usize::from(verdict.index_mismatch());
                    if verdict.hyp_holds && !verdict.hyp_undefined.is_empty() {
                        s.undefined_leaks += 1;
                    }
                    if stc_margin.is_some_and(|m| !(m > 0.0)) {
                        s.stc_violations += 1;
                    }
                    if !verdict.consistent {
                        s.inconsistent.push(*inputs);
                    }
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible() {
        let cfg = CampaignConfig { order: 128, ..CampaignConfig::new(TheoremId::Three, 5, 4) };
        let a = run_sample(&cfg, 3);
        let b = run_sample(&cfg, 3);
        match (a, b) {
            (SampleOutcome::Verdict { verdict: va, .. }, SampleOutcome::Verdict { verdict: vb, .. }) => {
                assert_eq!(va, vb)
            }
            (SampleOutcome::Rejected { reason: ra, .. }, SampleOutcome::Rejected { reason: rb, .. }) => {
                assert_eq!(ra, rb)
            }
            (SampleOutcome::Unreliable { tail_bound: ta, .. }, SampleOutcome::Unreliable { tail_bound: tb, .. }) => {
                assert_eq!(ta, tb)
            }
            (a, b) => panic!("{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn small_campaign_is_consistent() {
        let cfg = CampaignConfig::new(TheoremId::One, 1, 20);
        let s = run_campaign(&cfg);
        assert_eq!(s.reliable, 20);
        assert!(s.inconsistent.is_empty());
        assert_eq!(s.undefined_leaks, 0);
    }
}
