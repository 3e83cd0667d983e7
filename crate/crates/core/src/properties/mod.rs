//! Randomized checkers for monotonicity classes, Birkhoff orthogonality and
//! the duality characterizations of orthant-monotonic norms.
//!
//! Every checker runs `trials` independent seeded trials and reports the
//! first violation by trial index, so reports are reproducible whatever the
//! thread count. A falsified report carries a witness that [`replay`]
//! re-evaluates.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{dual_pair_search, k_star_eval, star_k_eval, Exponent, Norm, NormSpec};
use crate::sampling::{
    mixture_vector, nonzero_mixture_vector, random_nonempty_subset, random_subset, random_subset_of, run_trials,
    trial_rng,
};
use crate::vectors::{numeric_support, project, support, IndexSet, Vector, DEFAULT_SUPPORT_THRESHOLD};

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CHECK_TOL: f64 = 1e-8;
/// Default relative size of the strict perturbation in strictness checks.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Sampling parameters shared by all checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Strictness checks only shrink coordinates whose modulus is at least
    /// `margin` times the largest one, and by a factor of at most `1 - margin`.
    pub margin: f64,
}

impl CheckConfig {
    pub fn new(dim: usize) -> Self {
        CheckConfig {
            dim,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            tol: DEFAULT_CHECK_TOL,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    fn validate(&self, norm: &dyn Norm) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("at least one trial is required".into()));
        }
        if self.dim == 0 {
            return Err(Error::EmptyVector);
        }
        if let Some(d) = norm.fixed_dim() {
            if d != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: self.dim,
                });
            }
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be nonnegative, got {}", self.tol)));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::InvalidArgument(format!("margin must lie in (0, 1), got {}", self.margin)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Passed,
    Falsified,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Passed => "passed",
            Verdict::Falsified => "falsified",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Inputs of a violating (or undecided) trial with the measured values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub subtest: String,
    pub inputs: BTreeMap<String, Vector>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub index_sets: BTreeMap<String, IndexSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl Witness {
    fn new(trial: usize, subtest: &str, lhs: f64, rhs: f64, margin: f64) -> Self {
        Witness {
            trial,
            subtest: subtest.to_string(),
            inputs: BTreeMap::new(),
            index_sets: BTreeMap::new(),
            k: None,
            lhs,
            rhs,
            margin,
        }
    }

    fn input(mut self, name: &str, v: Vector) -> Self {
        self.inputs.insert(name.to_string(), v);
        self
    }

    fn set(mut self, name: &str, k: IndexSet) -> Self {
        self.index_sets.insert(name.to_string(), k);
        self
    }

    fn vector(&self, name: &str) -> Result<&Vector> {
        self.inputs
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("witness has no input '{name}'")))
    }

    fn index_set(&self, name: &str) -> Result<&IndexSet> {
        self.index_sets
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("witness has no index set '{name}'")))
    }
}

/// Outcome of a checker run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub norm: String,
    pub verdict: Verdict,
    pub trials: usize,
    pub seed: u64,
    pub dim: usize,
    pub tol: f64,
    pub witness: Option<Witness>,
    /// Smallest slack observed over all trials (negative once violated).
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Passed
    }

    pub fn falsified(&self) -> bool {
        self.verdict == Verdict::Falsified
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

enum Outcome {
    Held(f64),
    Violated(Witness),
    Undecided(Witness),
}

fn reduce(property: &str, norm: &dyn Norm, cfg: &CheckConfig, outcomes: Vec<Vec<Outcome>>) -> PropertyReport {
    let mut margin: Option<f64> = None;
    let mut violation = None;
    let mut undecided = None;
    for outcome in outcomes.into_iter().flatten() {
        let m = match &outcome {
            Outcome::Held(m) => Some(*m),
            Outcome::Violated(w) => Some(w.margin),
            Outcome::Undecided(_) => None,
        };
        if let Some(m) = m {
            margin = Some(margin.map_or(m, |cur| cur.min(m)));
        }
        match outcome {
            Outcome::Violated(w) if violation.is_none() => violation = Some(w),
            Outcome::Undecided(w) if undecided.is_none() => undecided = Some(w),
            _ => {}
        }
    }
    let (verdict, witness) = match (violation, undecided) {
        (Some(w), _) => (Verdict::Falsified, Some(w)),
        (None, Some(w)) => (Verdict::Inconclusive, Some(w)),
        (None, None) => (Verdict::Passed, None),
    };
    PropertyReport {
        property: property.to_string(),
        norm: norm.label(),
        verdict,
        trials: cfg.trials,
        seed: cfg.seed,
        dim: cfg.dim,
        tol: cfg.tol,
        witness,
        margin,
        note: None,
    }
}

fn skipped(property: &str, norm: &dyn Norm, cfg: &CheckConfig, note: &str) -> PropertyReport {
    PropertyReport {
        property: property.to_string(),
        norm: norm.label(),
        verdict: Verdict::Inconclusive,
        trials: 0,
        seed: cfg.seed,
        dim: cfg.dim,
        tol: cfg.tol,
        witness: None,
        margin: None,
        note: Some(note.to_string()),
    }
}

/// How a comparison subtest relates `eval(lhs)` to `eval(rhs)`.
#[derive(Debug, Clone, Copy)]
struct Comparison {
    subtest: &'static str,
    lhs: &'static str,
    rhs: &'static str,
    strict: bool,
}

const DOMINATION: Comparison = Comparison {
    subtest: "absolute_domination",
    lhs: "x",
    rhs: "x_prime",
    strict: false,
};
const SAME_ORTHANT: Comparison = Comparison {
    subtest: "same_orthant",
    lhs: "x",
    rhs: "x_prime",
    strict: false,
};
const NESTED: Comparison = Comparison {
    subtest: "nested_subspaces",
    lhs: "x_J",
    rhs: "x_K",
    strict: false,
};
const STRICT_SAME_ORTHANT: Comparison = Comparison {
    subtest: "strict_same_orthant",
    lhs: "x",
    rhs: "x_prime",
    strict: true,
};
const STRICT_NESTED: Comparison = Comparison {
    subtest: "strict_nested_subspaces",
    lhs: "x_J",
    rhs: "x_K",
    strict: true,
};
const BIRKHOFF: Comparison = Comparison {
    subtest: "birkhoff",
    lhs: "u",
    rhs: "u_plus_v",
    strict: false,
};
const STRICT_BIRKHOFF: Comparison = Comparison {
    subtest: "strict_birkhoff",
    lhs: "u",
    rhs: "u_plus_v",
    strict: true,
};

const COMPARISONS: [Comparison; 7] = [
    DOMINATION,
    SAME_ORTHANT,
    NESTED,
    STRICT_SAME_ORTHANT,
    STRICT_NESTED,
    BIRKHOFF,
    STRICT_BIRKHOFF,
];

/// `lhs <= rhs` up to a relative tolerance, or `lhs < rhs` exactly.
fn violates(c: &Comparison, lhs: f64, rhs: f64, tol: f64) -> bool {
    if c.strict {
        lhs >= rhs
    } else {
        lhs > rhs + tol * lhs.abs().max(rhs.abs())
    }
}

fn compare(
    c: &Comparison,
    trial: usize,
    norm: &dyn Norm,
    a: Vector,
    b: Vector,
    tol: f64,
    extra: impl FnOnce(Witness) -> Witness,
) -> Result<Outcome> {
    let lhs = norm.eval(&a)?;
    let rhs = norm.eval(&b)?;
    if violates(c, lhs, rhs, tol) {
        let w = Witness::new(trial, c.subtest, lhs, rhs, rhs - lhs)
            .input(c.lhs, a)
            .input(c.rhs, b);
        Ok(Outcome::Violated(extra(w)))
    } else {
        Ok(Outcome::Held(rhs - lhs))
    }
}

fn hadamard_slice(x: &Vector, f: &[f64]) -> Vector {
    Vector::from_finite(x.iter().zip(f).map(|(a, b)| a * b).collect())
}

/// Shrink factors in `[0, 1]`: exact zeros and exact ones are both common so
/// that supports and ties are exercised.
fn shrink_factors(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| match rng.random_range(0..4u8) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.0..=1.0),
        })
        .collect()
}

/// `|x| <= |x'|` implies `||x|| <= ||x'||`, with independent signs on `x`.
pub fn check_monotonic(norm: &dyn Norm, cfg: &CheckConfig) -> Result<PropertyReport> {
    cfg.validate(norm)?;
    let outcomes = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let x_prime = mixture_vector(&mut rng, cfg.dim);
        let mut f = shrink_factors(&mut rng, cfg.dim);
        for fi in f.iter_mut() {
            if rng.random_bool(0.5) {
                *fi = -*fi;
            }
        }
        let x = hadamard_slice(&x_prime, &f);
        Ok(vec![compare(&DOMINATION, t, norm, x, x_prime, cfg.tol, |w| w)?])
    })?;
    Ok(reduce("monotonic", norm, cfg, outcomes))
}

/// Both characterizations of orthant-monotonicity: domination within an
/// orthant, and growth of `||x_K||` along nested coordinate subspaces.
pub fn check_orthant_monotonic(norm: &dyn Norm, cfg: &CheckConfig) -> Result<PropertyReport> {
    cfg.validate(norm)?;
    let outcomes = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let x_prime = mixture_vector(&mut rng, cfg.dim);
        let f = shrink_factors(&mut rng, cfg.dim);
        let x = hadamard_slice(&x_prime, &f);
        let first = compare(&SAME_ORTHANT, t, norm, x, x_prime, cfg.tol, |w| w)?;

        let x = mixture_vector(&mut rng, cfg.dim);
        let k = random_subset(&mut rng, cfg.dim);
        let j = random_subset_of(&mut rng, &k);
        let (xj, xk) = (project(&x, &j)?, project(&x, &k)?);
        let second = compare(&NESTED, t, norm, xj, xk, cfg.tol, |w| w.input("x", x).set("J", j).set("K", k))?;
        Ok(vec![first, second])
    })?;
    Ok(reduce("orthant_monotonic", norm, cfg, outcomes))
}

/// Strict versions: a strict decrease of one modulus within an orthant, or
/// dropping a nonzero coordinate from a subspace, strictly decreases the norm.
/// Comparisons use no tolerance; witnesses carry the measured gap.
pub fn check_orthant_strictly_monotonic(norm: &dyn Norm, cfg: &CheckConfig) -> Result<PropertyReport> {
    cfg.validate(norm)?;
    let outcomes = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let x_prime = nonzero_mixture_vector(&mut rng, cfg.dim);
        let j = pick_large(&mut rng, &x_prime, &IndexSet::full(cfg.dim), cfg.margin);
        let f: Vec<f64> = (0..cfg.dim)
            .map(|i| {
                if i == j {
                    rng.random_range(0.0..=1.0 - cfg.margin)
                } else if rng.random_bool(0.5) {
                    1.0
                } else {
                    rng.random_range(0.0..=1.0)
                }
            })
            .collect();
        let x = hadamard_slice(&x_prime, &f);
        let first = compare(&STRICT_SAME_ORTHANT, t, norm, x, x_prime, cfg.tol, |w| w)?;

        let x = nonzero_mixture_vector(&mut rng, cfg.dim);
        let mut k = random_nonempty_subset(&mut rng, cfg.dim);
        if project(&x, &k)?.is_zero() {
            k = support(&x);
        }
        let dropped = pick_large(&mut rng, &x, &k, cfg.margin);
        let rest = IndexSet::new(k.members().iter().copied().filter(|&i| i != dropped).collect(), cfg.dim)?;
        let jset = random_subset_of(&mut rng, &rest);
        let (xj, xk) = (project(&x, &jset)?, project(&x, &k)?);
        let second = compare(&STRICT_NESTED, t, norm, xj, xk, cfg.tol, |w| {
            w.input("x", x).set("J", jset).set("K", k)
        })?;
        Ok(vec![first, second])
    })?;
    Ok(reduce("orthant_strictly_monotonic", norm, cfg, outcomes))
}

/// A random index of `within` whose modulus is at least `margin` times the
/// largest modulus of `x` on `within`.
fn pick_large(rng: &mut impl Rng, x: &Vector, within: &IndexSet, margin: f64) -> usize {
    let max = within.members().iter().fold(0.0f64, |m, &i| m.max(x[i].abs()));
    let candidates: Vec<usize> = within.members().iter().copied().filter(|&i| x[i].abs() >= margin * max).collect();
    candidates[rng.random_range(0..candidates.len())]
}

/// `u in F_K`, `v in F_{-K}` implies `||u + v|| >= ||u||` (strictly when `v != 0`).
pub fn check_birkhoff(norm: &dyn Norm, k: &IndexSet, strict: bool, cfg: &CheckConfig) -> Result<PropertyReport> {
    cfg.validate(norm)?;
    crate::vectors::check_same_dim(cfg.dim, k.ambient_dim())?;
    let property = if strict { "birkhoff_strict" } else { "birkhoff" };
    let complement = k.complement();
    if strict && complement.is_empty() {
        return Ok(skipped(property, norm, cfg, "K is the whole index set, so v = 0 is forced"));
    }
    let comparison = if strict { STRICT_BIRKHOFF } else { BIRKHOFF };
    let outcomes = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let u = project(&mixture_vector(&mut rng, cfg.dim), k)?;
        let mut v = project(&mixture_vector(&mut rng, cfg.dim), &complement)?;
        if strict {
            while v.is_zero() {
                v = project(&nonzero_mixture_vector(&mut rng, cfg.dim), &complement)?;
            }
            // keep the orthogonal part from vanishing against u at float precision
            let floor = cfg.margin * u.max_abs();
            if v.max_abs() < floor {
                v = v.scale(floor / v.max_abs());
            }
        }
        let sum = u.add(&v)?;
        let set = k.clone();
        Ok(vec![compare(&comparison, t, norm, u, sum, cfg.tol, |w| w.input("v", v).set("K", set))?])
    })?;
    Ok(reduce(property, norm, cfg, outcomes))
}

fn require_spec<'a>(norm: &'a dyn Norm, property: &str) -> Result<&'a NormSpec> {
    norm.spec()
        .ok_or_else(|| Error::Unsupported(format!("{property} needs a source norm specification")))
}

/// Whether every `||.||`-dual vector of `u` has `Supp(v) = Supp(u)` is only
/// decided analytically for ℓ∞-type sources, where the dual vectors are
/// supported on the arg-max set.
fn dual_set_is_characterized(spec: &NormSpec) -> bool {
    spec.exponent() == Some(Exponent::Infinity)
}

/// Searches, for random `u`, a dual vector `v` with the same support and
/// `u∘v >= 0`. A failed search falsifies only where the set of dual vectors
/// is known in closed form; elsewhere it is inconclusive.
pub fn check_dual_pair_support(norm: &NormSpec, cfg: &CheckConfig) -> Result<PropertyReport> {
    cfg.validate(norm)?;
    let outcomes = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let u = nonzero_mixture_vector(&mut rng, cfg.dim);
        dual_support_trial(norm, t, u, cfg.tol).map(|o| vec![o])
    })?;
    Ok(reduce("dual_pair_support", norm, cfg, outcomes))
}

fn dual_support_trial(norm: &NormSpec, trial: usize, u: Vector, tol: f64) -> Result<Outcome> {
    let search_tol = tol.max(1e-12);
    let pair = match dual_pair_search(norm, &u, search_tol) {
        Ok(pair) => pair,
        Err(Error::NonConvergence { achieved_gap, .. }) => {
            return Ok(Outcome::Undecided(
                Witness::new(trial, "dual_pair_support", achieved_gap, 0.0, -achieved_gap).input("u", u),
            ))
        }
        Err(e) => return Err(e),
    };
    let scale = crate::norms::eval(norm, &u)? * crate::norms::dual_eval(norm, &pair.v)?;
    let slack = search_tol * scale - pair.gap;
    let same_support = numeric_support(&pair.v, DEFAULT_SUPPORT_THRESHOLD) == support(&u);
    let aligned = u.iter().zip(pair.v.iter()).all(|(a, b)| a * b >= -tol);
    if same_support && aligned && slack >= 0.0 {
        return Ok(Outcome::Held(slack));
    }
    let w = Witness::new(trial, "dual_pair_support", pair.gap, search_tol * scale, slack)
        .input("u", u)
        .input("v", pair.v);
    if dual_set_is_characterized(norm) {
        Ok(Outcome::Violated(w))
    } else {
        Ok(Outcome::Undecided(w))
    }
}

/// `||.||_{K,*} = ||.||_{*,K}` on random `K` and `y in F_K`.
pub fn check_restriction_duality(norm: &NormSpec, cfg: &CheckConfig) -> Result<PropertyReport> {
    cfg.validate(norm)?;
    let outcomes = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let k = random_nonempty_subset(&mut rng, cfg.dim);
        let y = project(&mixture_vector(&mut rng, cfg.dim), &k)?;
        restriction_trial(norm, t, y, k, cfg.tol).map(|o| vec![o])
    })?;
    Ok(reduce("restriction_duality", norm, cfg, outcomes))
}

fn restriction_discrepancy(norm: &NormSpec, y: &Vector, k: &IndexSet, tol: f64) -> Result<(f64, f64, f64)> {
    let star_k = star_k_eval(norm, k, y)?;
    let k_star = k_star_eval(norm, k, y, tol.max(1e-12))?;
    let slack = tol * star_k.max(k_star) - (star_k - k_star).abs();
    Ok((star_k, k_star, slack))
}

fn restriction_trial(norm: &NormSpec, trial: usize, y: Vector, k: IndexSet, tol: f64) -> Result<Outcome> {
    let (star_k, k_star, slack) = restriction_discrepancy(norm, &y, &k, tol)?;
    if slack >= 0.0 {
        Ok(Outcome::Held(slack))
    } else {
        Ok(Outcome::Violated(
            Witness::new(trial, "restriction_duality", star_k, k_star, slack)
                .input("y", y)
                .set("K", k),
        ))
    }
}

/// For strictly convex norms, orthant-monotonicity implies
/// orthant-strict-monotonicity. Both checkers run on the same seed; a passed
/// OM check with a failed OSM check is a library-level inconsistency.
pub fn check_om_rotund_implies_osm(norm: &NormSpec, cfg: &CheckConfig) -> Result<PropertyReport> {
    const NAME: &str = "om_rotund_implies_osm";
    cfg.validate(norm)?;
    if !norm.is_strictly_convex() {
        return Ok(skipped(NAME, norm, cfg, "the norm is not strictly convex, so the hypothesis is not met"));
    }
    let om = check_orthant_monotonic(norm, cfg)?;
    if !om.passed() {
        let mut report = om;
        report.property = NAME.into();
        report.verdict = Verdict::Inconclusive;
        return Ok(report.with_note("orthant-monotonicity was not observed, so the hypothesis is not met"));
    }
    let osm = check_orthant_strictly_monotonic(norm, cfg)?;
    let mut report = osm;
    report.property = NAME.into();
    Ok(match report.verdict {
        Verdict::Passed => report,
        _ => report.with_note("orthant-monotonic and strictly convex, yet a strict monotonicity violation was found"),
    })
}

/// Whether `l0(y) <= k` matches `y` lying in the k-support unit ball, for `y`
/// normalized to the dual unit sphere.
pub fn check_level_set_sphere_identity(norm: &NormSpec, k: usize, cfg: &CheckConfig) -> Result<PropertyReport> {
    cfg.validate(norm)?;
    if k == 0 || k > cfg.dim {
        return Err(Error::KOutOfRange { k, dim: cfg.dim });
    }
    let outcomes = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        // planted sparsity cycles through 1..=d so both sides of k are covered
        let s = 1 + t % cfg.dim;
        let y = crate::sampling::planted_sparse(&mut rng, cfg.dim, s);
        let y = y.scale(1.0 / crate::norms::dual_eval(norm, &y)?);
        sphere_trial(norm, t, y, k, cfg.tol).map(|o| vec![o])
    })?;
    Ok(reduce("level_set_sphere_identity", norm, cfg, outcomes))
}

fn sphere_sides(norm: &NormSpec, y: &Vector, k: usize, tol: f64) -> Result<(bool, bool, f64)> {
    let method = crate::topk::default_method(norm);
    let value = crate::topk::ksupport_eval_with(norm, k, y, tol, method)?;
    let threshold = crate::topk::ksupport_stationarity(method, tol).threshold(1.0);
    Ok((crate::vectors::l0(y) <= k, value <= 1.0 + threshold, value))
}

fn sphere_trial(norm: &NormSpec, trial: usize, y: Vector, k: usize, tol: f64) -> Result<Outcome> {
    let (sparse, in_ball, value) = sphere_sides(norm, &y, k, tol)?;
    if sparse == in_ball {
        return Ok(Outcome::Held((1.0 - value).abs()));
    }
    let subtest = if sparse { "sparse_implies_ball" } else { "ball_implies_sparse" };
    let mut w = Witness::new(trial, subtest, crate::vectors::l0(&y) as f64, value, -(1.0 - value).abs()).input("y", y);
    w.k = Some(k);
    Ok(Outcome::Violated(w))
}

/// Re-evaluates the witness of a falsified report against `norm` and returns
/// whether the violation reproduces with bit-identical measured values.
pub fn replay(report: &PropertyReport, norm: &dyn Norm) -> Result<bool> {
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("report carries no witness".into()))?;
    if let Some(c) = COMPARISONS.iter().find(|c| c.subtest == w.subtest) {
        let lhs = norm.eval(w.vector(c.lhs)?)?;
        let rhs = norm.eval(w.vector(c.rhs)?)?;
        return Ok(lhs.to_bits() == w.lhs.to_bits()
            && rhs.to_bits() == w.rhs.to_bits()
            && violates(c, lhs, rhs, report.tol));
    }
    let spec = require_spec(norm, &report.property)?;
    match w.subtest.as_str() {
        "restriction_duality" => {
            let (star_k, k_star, slack) = restriction_discrepancy(spec, w.vector("y")?, w.index_set("K")?, report.tol)?;
            Ok(star_k.to_bits() == w.lhs.to_bits() && k_star.to_bits() == w.rhs.to_bits() && slack < 0.0)
        }
        "dual_pair_support" => match dual_support_trial(spec, w.trial, w.vector("u")?.clone(), report.tol)? {
            Outcome::Violated(again) => Ok(again == *w),
            _ => Ok(false),
        },
        "sparse_implies_ball" | "ball_implies_sparse" => {
            let k = w.k.ok_or_else(|| Error::InvalidArgument("witness has no k".into()))?;
            let (sparse, in_ball, value) = sphere_sides(spec, w.vector("y")?, k, report.tol)?;
            Ok(sparse != in_ball && value.to_bits() == w.rhs.to_bits())
        }
        other => Err(Error::InvalidArgument(format!("unknown witness kind '{other}'"))),
    }
}
