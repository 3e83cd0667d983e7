//! Recovery of the ℓ0 pseudonorm from graded sequences of norms, and checks
//! of the three equivalent forms of (strict) gradedness.
//!
//! A nondecreasing sequence `v_1 <= .. <= v_d` is strictly increasingly
//! graded at `x` when it becomes stationary exactly at `l0(x)`:
//! `v_{l-1} < v_l = .. = v_d` with `l = l0(x)`. The decreasing notion mirrors
//! this for nonincreasing sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{dual_eval, eval, NormSpec};
use crate::properties::{CheckConfig, Verdict};
use crate::sampling::{planted_sparse, run_trials, trial_rng};
use crate::topk::{
    default_method, ksupport_eval_with, ksupport_sequence, ksupport_stationarity, topk_eval, topk_sequence,
    topk_stationarity, NormSequenceReport,
};
use crate::vectors::{l0, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Top-k sequences, nondecreasing in `k`.
    Increasing,
    /// k-support sequences, nonincreasing in `k`.
    Decreasing,
}

/// The three forms of gradedness evaluated on one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradednessForms {
    /// Positional chain shape around `l0`.
    pub chain: bool,
    /// `l0 <= l` implies (or, when strict, is equivalent to) `v_l = v_d`.
    pub implication: bool,
    /// `l0 >= min { k : v_k = v_d }`, with equality when strict.
    pub min_index: bool,
}

impl GradednessForms {
    pub fn consistent(&self) -> bool {
        self.chain == self.implication && self.implication == self.min_index
    }

    pub fn all(&self) -> bool {
        self.chain && self.implication && self.min_index
    }
}

/// Gradedness of one sequence at one vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradednessVerdict {
    pub direction: Direction,
    pub strict: bool,
    pub holds_for_vector: bool,
    pub l0_true: usize,
    pub l0_recovered: usize,
    pub forms: GradednessForms,
    pub x: Vector,
    pub sequence: NormSequenceReport,
}

/// Evaluates the three forms on `sequence` with `l = l0(x)`.
pub fn grade(x: &Vector, sequence: NormSequenceReport, direction: Direction, strict: bool) -> GradednessVerdict {
    let l = l0(x);
    let v = &sequence.values;
    let d = v.len();
    let tol = sequence.tolerance;
    let last = v[d - 1];
    let settled = |k: usize| tol.equal(v[k - 1], last);
    let monotone = sequence.monotone_ok;
    let forms = if l == 0 {
        // the zero vector: every value vanishes
        let zero = v.iter().all(|&a| tol.equal(a, 0.0));
        GradednessForms {
            chain: zero,
            implication: zero,
            min_index: zero,
        }
    } else {
        let tail = (l..=d).all(settled);
        let step = l == 1 || !settled(l - 1);
        let chain = monotone && tail && (!strict || step);
        let implication = monotone && (1..=d).all(|k| if strict { (l <= k) == settled(k) } else { l > k || settled(k) });
        let from = sequence.stationary_from;
        let min_index = monotone && if strict { l == from } else { l >= from };
        GradednessForms {
            chain,
            implication,
            min_index,
        }
    };
    GradednessVerdict {
        direction,
        strict,
        holds_for_vector: forms.all(),
        l0_true: l,
        l0_recovered: if l == 0 { 0 } else { sequence.stationary_from },
        forms,
        x: x.clone(),
        sequence,
    }
}

/// `min { k : top-k(x) = ||x||_(d) }`, or 0 for `x = 0`.
///
/// Equals `l0(x)` when the source is orthant-strictly monotonic; otherwise it
/// is only a lower bound.
pub fn l0_from_topk(source: &NormSpec, x: &Vector, tol: f64) -> Result<usize> {
    source.check_dim(x.dim())?;
    if x.is_zero() {
        return Ok(0);
    }
    Ok(topk_sequence(source, x, tol)?.stationary_from)
}

/// `min { k : k-support(y) = ||y||_* }`, or 0 for `y = 0`.
///
/// Equals `l0(y)` when the source is orthant-monotonic and its dual norm is
/// strictly convex.
pub fn l0_from_ksupport(source: &NormSpec, y: &Vector, tol: f64) -> Result<usize> {
    source.check_dim(y.dim())?;
    if y.is_zero() {
        return Ok(0);
    }
    let method = default_method(source);
    let stationarity = ksupport_stationarity(method, tol);
    let target = dual_eval(source, y)?;
    for k in 1..=y.dim() {
        if stationarity.equal(ksupport_eval_with(source, k, y, tol, method)?, target) {
            return Ok(k);
        }
    }
    Err(Error::Unsupported(format!(
        "the k-support sequence of {source} never reaches the dual norm; the source is not orthant-monotonic"
    )))
}

/// Membership of `x` in the ℓ0 level set `{ l0 <= k }` through the
/// difference of norms `||x|| - top-k(x) <= 0`.
pub fn dc_level_membership(source: &NormSpec, x: &Vector, k: usize, tol: f64) -> Result<bool> {
    source.check_dim(x.dim())?;
    if k == 0 {
        return Ok(x.is_zero());
    }
    let norm = eval(source, x)?;
    let top = topk_eval(source, k, x)?;
    Ok(norm <= top + topk_stationarity(source, tol).threshold(norm))
}

/// Aggregate of [`classify_gradedness`] over many planted-sparsity vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradednessReport {
    pub source: NormSpec,
    pub direction: Direction,
    pub strict: bool,
    pub verdict: Verdict,
    pub trials: usize,
    pub seed: u64,
    pub dim: usize,
    /// First vector (by trial index) on which gradedness fails.
    pub witness: Option<GradednessVerdict>,
    /// Whether the three forms agreed on every vector.
    pub forms_consistent: bool,
    /// First vector on which the three forms disagree.
    pub inconsistency: Option<GradednessVerdict>,
}

/// Samples vectors with planted sparsity cycling through `0..=d` and grades
/// the top-k (increasing) or k-support (decreasing) sequence of each.
pub fn classify_gradedness(
    source: &NormSpec,
    direction: Direction,
    strict: bool,
    cfg: &CheckConfig,
) -> Result<GradednessReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    source.check_dim(cfg.dim)?;
    let verdicts = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let x = planted_sparse(&mut rng, cfg.dim, t % (cfg.dim + 1));
        let sequence = match direction {
            Direction::Increasing => topk_sequence(source, &x, cfg.tol)?,
            Direction::Decreasing => ksupport_sequence(source, &x, cfg.tol)?,
        };
        Ok(grade(&x, sequence, direction, strict))
    })?;
    let witness = verdicts.iter().find(|v| !v.holds_for_vector).cloned();
    let inconsistency = verdicts.iter().find(|v| !v.forms.consistent()).cloned();
    Ok(GradednessReport {
        source: source.clone(),
        direction,
        strict,
        verdict: if witness.is_some() { Verdict::Falsified } else { Verdict::Passed },
        trials: cfg.trials,
        seed: cfg.seed,
        dim: cfg.dim,
        witness,
        forms_consistent: inconsistency.is_none(),
        inconsistency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::DEFAULT_TOL;

    fn v(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn recovery_examples() {
        let l2 = NormSpec::lp(2.0).unwrap();
        let x = v(&[0.0, 3.0, 0.0, -1.0, 0.0]);
        assert_eq!(l0_from_topk(&l2, &x, DEFAULT_TOL).unwrap(), 2);
        assert_eq!(l0_from_ksupport(&l2, &x, DEFAULT_TOL).unwrap(), 2);
        assert_eq!(l0_from_topk(&NormSpec::lp_inf(), &v(&[1.0, -7.0, 2.0]), DEFAULT_TOL).unwrap(), 1);
        assert_eq!(l0_from_topk(&l2, &v(&[0.0, 0.0]), DEFAULT_TOL).unwrap(), 0);
        assert_eq!(l0_from_ksupport(&l2, &v(&[0.0, 0.0]), DEFAULT_TOL).unwrap(), 0);
        let l1 = NormSpec::lp(1.0).unwrap();
        assert_eq!(l0_from_ksupport(&l1, &v(&[0.25, 0.25, 1.0]), DEFAULT_TOL).unwrap(), 2);
    }

    #[test]
    fn dc_examples() {
        let l2 = NormSpec::lp(2.0).unwrap();
        let x = v(&[1.0, 0.0, 2.0, 0.0]);
        assert!(dc_level_membership(&l2, &x, 2, DEFAULT_TOL).unwrap());
        assert!(!dc_level_membership(&l2, &x, 1, DEFAULT_TOL).unwrap());
        assert!(dc_level_membership(&l2, &x, 4, DEFAULT_TOL).unwrap());
        assert!(dc_level_membership(&l2, &v(&[0.0, 0.0]), 1, DEFAULT_TOL).unwrap());
        assert!(!dc_level_membership(&l2, &x, 0, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn classification_examples() {
        let cfg = CheckConfig::new(4).trials(100);
        let r = classify_gradedness(&NormSpec::lp(2.0).unwrap(), Direction::Increasing, true, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Passed);
        assert!(r.forms_consistent);
        let l1 = NormSpec::lp(1.0).unwrap();
        assert_eq!(
            classify_gradedness(&l1, Direction::Increasing, false, &cfg).unwrap().verdict,
            Verdict::Passed
        );
        let r = classify_gradedness(&l1, Direction::Decreasing, true, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        let w = r.witness.unwrap();
        assert!(w.l0_recovered < w.l0_true);
        assert!(r.forms_consistent);
        let r = classify_gradedness(&NormSpec::lp_inf(), Direction::Increasing, true, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        assert_eq!(
            classify_gradedness(&NormSpec::lp_inf(), Direction::Increasing, false, &cfg).unwrap().verdict,
            Verdict::Passed
        );
    }

    #[test]
    fn grading_a_constant_sequence() {
        let x = v(&[1.0, -7.0, 2.0]);
        let seq = topk_sequence(&NormSpec::lp_inf(), &x, DEFAULT_TOL).unwrap();
        let g = grade(&x, seq, Direction::Increasing, true);
        assert!(!g.holds_for_vector);
        assert_eq!((g.l0_true, g.l0_recovered), (3, 1));
        assert!(g.forms.consistent());
    }
}
