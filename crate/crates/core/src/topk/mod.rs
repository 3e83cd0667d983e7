//! Generalized top-k norms `sup_{|K| <= k} ||x_K||` and their duals, the
//! generalized k-support norms.

mod decomp;
mod dual_opt;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{eval_slice, lp_value, Exponent, Norm, NormKind, NormSpec, DEFAULT_TOL};
use crate::vectors::{sorted_abs_desc_slice, Vector};

/// Largest dimension for the subset sweep of the generic top-k path.
pub const MAX_BRUTE_FORCE_DIM: usize = 20;

/// Largest dimension accepted by the gauge decomposition method.
pub const MAX_DECOMPOSITION_DIM: usize = 8;

/// Decides when two values of a graded sequence count as equal:
/// `|a - b| <= max(atol, rtol * |reference|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    pub atol: f64,
    pub rtol: f64,
}

impl Stationarity {
    pub const ATOL: f64 = 1e-10;

    /// Tolerance for closed-form evaluations, which only carry roundoff.
    pub fn analytic() -> Self {
        Stationarity {
            atol: Self::ATOL,
            rtol: 1e-8,
        }
    }

    /// Tolerance for values produced by a solver run at `solver_tol`.
    pub fn optimized(solver_tol: f64) -> Self {
        Stationarity {
            atol: Self::ATOL,
            rtol: 100.0 * solver_tol,
        }
    }

    pub fn threshold(&self, reference: f64) -> f64 {
        self.atol.max(self.rtol * reference.abs())
    }

    pub fn equal(&self, value: f64, reference: f64) -> bool {
        (value - reference).abs() <= self.threshold(reference)
    }
}

/// Values `v_1..v_d` of a graded sequence with its stationarity index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSequenceReport {
    pub values: Vec<f64>,
    /// Smallest `k` (1-based) with `values[k] == values[d]` under tolerance.
    pub stationary_from: usize,
    pub monotone_ok: bool,
    pub tolerance: Stationarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Nondecreasing,
    Nonincreasing,
}

impl NormSequenceReport {
    fn new(values: Vec<f64>, tolerance: Stationarity, direction: Direction) -> Self {
        let last = *values.last().expect("sequences have at least one value");
        let stationary_from = values
            .iter()
            .position(|&v| tolerance.equal(v, last))
            .map_or(values.len(), |i| i + 1);
        let monotone_ok = values.windows(2).all(|w| {
            let slack = tolerance.threshold(w[0].abs().max(w[1].abs()));
            match direction {
                Direction::Nondecreasing => w[0] <= w[1] + slack,
                Direction::Nonincreasing => w[1] <= w[0] + slack,
            }
        });
        NormSequenceReport {
            values,
            stationary_from,
            monotone_ok,
            tolerance,
        }
    }
}

/// Which algorithm evaluates a k-support norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSupportMethod {
    /// Closed forms, available for unweighted ℓ1 and ℓ∞ sources.
    Analytic,
    /// Maximizes `<x, y>` over the top-k unit ball.
    DualOpt,
    /// Minimizes the dual-norm cost of a decomposition of `y` over supports.
    GaugeDecomp,
}

impl fmt::Display for KSupportMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KSupportMethod::Analytic => "analytic",
            KSupportMethod::DualOpt => "dual_opt",
            KSupportMethod::GaugeDecomp => "gauge_decomp",
        })
    }
}

impl std::str::FromStr for KSupportMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(KSupportMethod::Analytic),
            "dual_opt" => Ok(KSupportMethod::DualOpt),
            "gauge_decomp" => Ok(KSupportMethod::GaugeDecomp),
            other => Err(Error::Parse(format!("unknown k-support method '{other}'"))),
        }
    }
}

/// Whether the source has closed-form k-support norms.
pub fn has_analytic_ksupport(source: &NormSpec) -> bool {
    matches!(source.kind(), NormKind::Lp { p } if p.is_one() || p.is_infinite())
}

/// The analytic method when it exists, otherwise `dual_opt`.
pub fn default_method(source: &NormSpec) -> KSupportMethod {
    if has_analytic_ksupport(source) {
        KSupportMethod::Analytic
    } else {
        KSupportMethod::DualOpt
    }
}

/// Stationarity tolerance matching how a source's values are computed.
pub fn topk_stationarity(source: &NormSpec, tol: f64) -> Stationarity {
    match source.kind() {
        NormKind::Atomic { .. } => Stationarity::optimized(tol),
        _ => Stationarity::analytic(),
    }
}

pub fn ksupport_stationarity(method: KSupportMethod, tol: f64) -> Stationarity {
    match method {
        KSupportMethod::Analytic => Stationarity::analytic(),
        _ => Stationarity::optimized(tol),
    }
}

/// The generalized top-k norm of a source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKNorm {
    pub source: NormSpec,
    pub k: usize,
}

impl TopKNorm {
    pub fn new(source: NormSpec, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::KOutOfRange { k, dim: source.fixed_dim().unwrap_or(0) });
        }
        if let Some(d) = source.fixed_dim() {
            check_k(k, d)?;
        }
        Ok(TopKNorm { source, k })
    }
}

impl Norm for TopKNorm {
    fn eval(&self, x: &Vector) -> Result<f64> {
        topk_eval(&self.source, self.k, x)
    }

    fn fixed_dim(&self) -> Option<usize> {
        self.source.fixed_dim()
    }

    fn label(&self) -> String {
        format!("top-{}({})", self.k, self.source)
    }
}

/// The generalized k-support norm of a source, evaluated with a fixed method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSupportNorm {
    pub source: NormSpec,
    pub k: usize,
    pub method: KSupportMethod,
    pub tol: f64,
}

impl KSupportNorm {
    pub fn new(source: NormSpec, k: usize, method: KSupportMethod) -> Result<Self> {
        if k == 0 {
            return Err(Error::KOutOfRange { k, dim: source.fixed_dim().unwrap_or(0) });
        }
        if let Some(d) = source.fixed_dim() {
            check_k(k, d)?;
        }
        if method == KSupportMethod::Analytic && !has_analytic_ksupport(&source) {
            return Err(no_closed_form(&source));
        }
        Ok(KSupportNorm {
            source,
            k,
            method,
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

impl Norm for KSupportNorm {
    fn eval(&self, y: &Vector) -> Result<f64> {
        ksupport_eval_with(&self.source, self.k, y, self.tol, self.method)
    }

    fn fixed_dim(&self) -> Option<usize> {
        self.source.fixed_dim()
    }

    fn label(&self) -> String {
        format!("{}-support({}, {})", self.k, self.source, self.method)
    }
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::KOutOfRange { k, dim: d });
    }
    Ok(())
}

fn no_closed_form(source: &NormSpec) -> Error {
    Error::Unsupported(format!("no closed-form k-support norm for source {source}"))
}

/// `sup_{|K| <= k} ||x_K||`.
///
/// Unweighted ℓp sources are permutation invariant and monotonic, so the
/// supremum is attained on the `k` largest moduli. Every other source goes
/// through the subset sweep.
///
/// ```
/// use graded_norms::{topk::topk_eval, NormSpec, Vector};
/// let x = Vector::new(vec![3.0, -1.0, 2.0]).unwrap();
/// assert_eq!(topk_eval(&NormSpec::lp(1.0).unwrap(), 2, &x).unwrap(), 5.0);
/// ```
pub fn topk_eval(source: &NormSpec, k: usize, x: &Vector) -> Result<f64> {
    source.check_dim(x.dim())?;
    check_k(k, x.dim())?;
    if source.is_structurally_symmetric_monotonic() {
        return Ok(sorted_topk(source, x.as_slice(), k));
    }
    Ok(brute_force_levels(source, x.as_slice(), k)?[k - 1])
}

/// Subset-sweep evaluation, regardless of any structure of the source.
pub fn topk_eval_brute_force(source: &NormSpec, k: usize, x: &Vector) -> Result<f64> {
    source.check_dim(x.dim())?;
    check_k(k, x.dim())?;
    Ok(brute_force_levels(source, x.as_slice(), k)?[k - 1])
}

/// `||.||` applied to the `k` largest moduli of `x`.
pub fn topk_eval_sorted(source: &NormSpec, k: usize, x: &Vector) -> Result<f64> {
    source.check_dim(x.dim())?;
    check_k(k, x.dim())?;
    if !source.is_structurally_symmetric_monotonic() {
        return Err(Error::Unsupported(format!(
            "source {source} is not known to be permutation invariant and monotonic"
        )));
    }
    Ok(sorted_topk(source, x.as_slice(), k))
}

fn sorted_topk(source: &NormSpec, x: &[f64], k: usize) -> f64 {
    let sorted = sorted_abs_desc_slice(x);
    match source.kind() {
        NormKind::Lp { p } => lp_value(&sorted[..k], *p),
        _ => unreachable!("sorted path is reserved for unweighted lp sources"),
    }
}

/// Returns `[top-1, .., top-kmax]` from one sweep over the subsets of the
/// support of `x`: coordinates outside the support never change `x_K`.
fn brute_force_levels(source: &NormSpec, x: &[f64], kmax: usize) -> Result<Vec<f64>> {
    let d = x.len();
    if d > MAX_BRUTE_FORCE_DIM {
        return Err(Error::CombinatorialBlowup {
            dim: d,
            limit: MAX_BRUTE_FORCE_DIM,
        });
    }
    let supp: Vec<usize> = (0..d).filter(|&i| x[i] != 0.0).collect();
    let mut best = vec![0.0f64; kmax];
    let mut buf = vec![0.0; d];
    for mask in 1u32..(1u32 << supp.len()) {
        let size = mask.count_ones() as usize;
        if size > kmax {
            continue;
        }
        buf.iter_mut().for_each(|b| *b = 0.0);
        for (bit, &i) in supp.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                buf[i] = x[i];
            }
        }
        let value = eval_slice(source, &buf)?;
        if value > best[size - 1] {
            best[size - 1] = value;
        }
    }
    for j in 1..kmax {
        best[j] = best[j].max(best[j - 1]);
    }
    Ok(best)
}

/// Top-k values for `k = 1..d` with the stationarity index.
pub fn topk_sequence(source: &NormSpec, x: &Vector, tol: f64) -> Result<NormSequenceReport> {
    source.check_dim(x.dim())?;
    let d = x.dim();
    let values = if source.is_structurally_symmetric_monotonic() {
        (1..=d).map(|k| sorted_topk(source, x.as_slice(), k)).collect()
    } else {
        brute_force_levels(source, x.as_slice(), d)?
    };
    Ok(NormSequenceReport::new(
        values,
        topk_stationarity(source, tol),
        Direction::Nondecreasing,
    ))
}

/// The k-support norm at `y` with the default method for the source.
///
/// ```
/// use graded_norms::{topk::ksupport_eval, NormSpec, Vector};
/// let y = Vector::new(vec![3.0, -1.0, 2.0]).unwrap();
/// assert_eq!(ksupport_eval(&NormSpec::lp(1.0).unwrap(), 2, &y, 1e-8).unwrap(), 3.0);
/// assert_eq!(ksupport_eval(&NormSpec::lp_inf(), 2, &y, 1e-8).unwrap(), 6.0);
/// ```
pub fn ksupport_eval(source: &NormSpec, k: usize, y: &Vector, tol: f64) -> Result<f64> {
    ksupport_eval_with(source, k, y, tol, default_method(source))
}

pub fn ksupport_eval_with(
    source: &NormSpec,
    k: usize,
    y: &Vector,
    tol: f64,
    method: KSupportMethod,
) -> Result<f64> {
    source.check_dim(y.dim())?;
    check_k(k, y.dim())?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    match method {
        KSupportMethod::Analytic => analytic(source, k, y.as_slice()),
        KSupportMethod::DualOpt => {
            if y.is_zero() {
                return Ok(0.0);
            }
            dual_opt::solve(source, k, y.as_slice(), tol)
        }
        KSupportMethod::GaugeDecomp => {
            if y.dim() > MAX_DECOMPOSITION_DIM {
                return Err(Error::CombinatorialBlowup {
                    dim: y.dim(),
                    limit: MAX_DECOMPOSITION_DIM,
                });
            }
            if y.is_zero() {
                return Ok(0.0);
            }
            decomp::solve(source, k, y.as_slice(), tol)
        }
    }
}

fn analytic(source: &NormSpec, k: usize, y: &[f64]) -> Result<f64> {
    match source.kind() {
        NormKind::Lp { p } if p.is_one() => {
            let l1 = lp_value(y, Exponent::Finite(1.0));
            let linf = lp_value(y, Exponent::Infinity);
            Ok((l1 / k as f64).max(linf))
        }
        NormKind::Lp { p } if p.is_infinite() => Ok(lp_value(y, Exponent::Finite(1.0))),
        _ => Err(no_closed_form(source)),
    }
}

/// k-support values for `k = 1..d` with the default method.
pub fn ksupport_sequence(source: &NormSpec, y: &Vector, tol: f64) -> Result<NormSequenceReport> {
    ksupport_sequence_with(source, y, tol, default_method(source))
}

pub fn ksupport_sequence_with(
    source: &NormSpec,
    y: &Vector,
    tol: f64,
    method: KSupportMethod,
) -> Result<NormSequenceReport> {
    source.check_dim(y.dim())?;
    let values = (1..=y.dim())
        .map(|k| ksupport_eval_with(source, k, y, tol, method))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormSequenceReport::new(
        values,
        ksupport_stationarity(method, tol),
        Direction::Nonincreasing,
    ))
}

/// Whether `x` lies in the top-k unit ball, up to `tol`.
pub fn topk_ball_contains(source: &NormSpec, k: usize, x: &Vector, tol: f64) -> Result<bool> {
    Ok(topk_eval(source, k, x)? <= 1.0 + tol)
}

/// Whether `y` lies in the k-support unit ball, up to `tol`.
pub fn ksupport_ball_contains(source: &NormSpec, k: usize, y: &Vector, tol: f64) -> Result<bool> {
    Ok(ksupport_eval(source, k, y, tol.max(1e-12))? <= 1.0 + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{dual_eval, eval};
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    fn parallelogram() -> NormSpec {
        NormSpec::atomic(vec![v(&[2.0, 1.0]), v(&[1.0, 2.0])]).unwrap()
    }

    #[test]
    fn topk_examples() {
        let l1 = NormSpec::lp(1.0).unwrap();
        let x = v(&[3.0, -1.0, 2.0]);
        assert_eq!(topk_eval(&l1, 2, &x).unwrap(), 5.0);
        assert_eq!(topk_eval_brute_force(&l1, 2, &x).unwrap(), 5.0);
        let y = v(&[1.0, -7.0, 2.0]);
        for k in 1..=3 {
            assert_eq!(topk_eval(&NormSpec::lp_inf(), k, &y).unwrap(), 7.0);
        }
        assert!(matches!(topk_eval(&l1, 0, &x), Err(Error::KOutOfRange { .. })));
        assert!(matches!(topk_eval(&l1, 4, &x), Err(Error::KOutOfRange { .. })));
        let big = Vector::new(vec![1.0; 21]).unwrap();
        let w = NormSpec::weighted_lp(1.0, big.clone()).unwrap();
        assert!(matches!(topk_eval(&w, 3, &big), Err(Error::CombinatorialBlowup { .. })));
    }

    #[test]
    fn topk_sequence_examples() {
        let s = topk_sequence(&NormSpec::lp(1.0).unwrap(), &v(&[3.0, -1.0, 2.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.values, vec![3.0, 5.0, 6.0]);
        assert_eq!(s.stationary_from, 3);
        assert!(s.monotone_ok);
        let s = topk_sequence(&NormSpec::lp(2.0).unwrap(), &v(&[0.0, 0.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0]);
        assert_eq!(s.stationary_from, 1);
        let s = topk_sequence(&NormSpec::lp_inf(), &v(&[1.0, -7.0, 2.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.values, vec![7.0, 7.0, 7.0]);
        assert_eq!(s.stationary_from, 1);
    }

    #[test]
    fn non_orthant_monotonic_source_exceeds_its_own_norm_at_k_equal_d() {
        // gauge max(|x+y|/3, |x-y|): ||(1,1)|| = 2/3 but ||(1,0)|| = 1
        let n = parallelogram();
        let x = v(&[1.0, 1.0]);
        assert_relative_eq!(eval(&n, &x).unwrap(), 2.0 / 3.0, max_relative = 1e-12);
        let s = topk_sequence(&n, &x, DEFAULT_TOL).unwrap();
        assert_relative_eq!(s.values[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.values[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ksupport_examples() {
        let l1 = NormSpec::lp(1.0).unwrap();
        let y = v(&[3.0, -1.0, 2.0]);
        assert_eq!(ksupport_eval(&l1, 2, &y, DEFAULT_TOL).unwrap(), 3.0);
        for k in 1..=3 {
            assert_eq!(ksupport_eval(&NormSpec::lp_inf(), k, &y, DEFAULT_TOL).unwrap(), 6.0);
        }
        assert!(matches!(
            ksupport_eval_with(&NormSpec::lp(2.0).unwrap(), 1, &y, DEFAULT_TOL, KSupportMethod::Analytic),
            Err(Error::Unsupported(_))
        ));
        assert!(KSupportNorm::new(NormSpec::lp(3.0).unwrap(), 2, KSupportMethod::Analytic).is_err());
    }

    #[test]
    fn ksupport_sequence_counterexample() {
        let s = ksupport_sequence(&NormSpec::lp(1.0).unwrap(), &v(&[0.25, 0.25, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.values, vec![1.5, 1.0, 1.0]);
        assert_eq!(s.stationary_from, 2);
        assert!(s.monotone_ok);
        let s = ksupport_sequence(&NormSpec::lp(2.0).unwrap(), &v(&[0.0, 0.0, 0.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn l2_ksupport_of_the_ones_vector() {
        // by symmetry the top-k ball maximizer of <x, 1> is a constant vector
        // c*1 with sqrt(k) c = 1, giving d / sqrt(k)
        let l2 = NormSpec::lp(2.0).unwrap();
        let y = v(&[1.0, 1.0, 1.0]);
        let expected = [3.0, 3.0 / 2f64.sqrt(), 3f64.sqrt()];
        for method in [KSupportMethod::DualOpt, KSupportMethod::GaugeDecomp] {
            let s = ksupport_sequence_with(&l2, &y, 1e-9, method).unwrap();
            for (got, want) in s.values.iter().zip(expected) {
                assert_relative_eq!(*got, want, max_relative = 1e-8);
            }
            assert_eq!(s.stationary_from, 3);
        }
    }

    #[test]
    fn methods_agree_on_small_examples() {
        let y = v(&[0.3, -1.2, 0.0, 2.5]);
        for source in [
            NormSpec::lp(1.0).unwrap(),
            NormSpec::lp(1.5).unwrap(),
            NormSpec::lp(3.0).unwrap(),
            NormSpec::lp_inf(),
            NormSpec::weighted_lp(2.0, v(&[1.0, 0.5, 2.0, 1.5])).unwrap(),
            NormSpec::weighted_lp(1.0, v(&[1.0, 0.5, 2.0, 1.5])).unwrap(),
        ] {
            for k in 1..=4 {
                let a = ksupport_eval_with(&source, k, &y, 1e-9, KSupportMethod::DualOpt).unwrap();
                let b = ksupport_eval_with(&source, k, &y, 1e-9, KSupportMethod::GaugeDecomp).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-8);
                if has_analytic_ksupport(&source) {
                    let c = ksupport_eval_with(&source, k, &y, 1e-9, KSupportMethod::Analytic).unwrap();
                    assert_relative_eq!(a, c, max_relative = 1e-8);
                }
            }
            // k = d recovers the dual norm for orthant-monotonic sources
            let full = ksupport_eval_with(&source, 4, &y, 1e-9, KSupportMethod::DualOpt).unwrap();
            assert_relative_eq!(full, dual_eval(&source, &y).unwrap(), max_relative = 1e-8);
        }
    }

    #[test]
    fn atomic_ksupport_methods_agree_for_a_non_orthant_monotonic_source() {
        let n = parallelogram();
        for y in [[1.0, 0.0], [0.3, -2.0], [1.0, 1.0]] {
            let y = v(&y);
            for k in 1..=2 {
                let a = ksupport_eval_with(&n, k, &y, 1e-9, KSupportMethod::DualOpt).unwrap();
                let b = ksupport_eval_with(&n, k, &y, 1e-9, KSupportMethod::GaugeDecomp).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-7);
            }
        }
        // the top-2 ball is {|x1|, |x2| <= 1} ∩ B, whose support at (1,0) is 1,
        // strictly below the dual norm max <a, (1,0)> = 2
        let y = v(&[1.0, 0.0]);
        assert_relative_eq!(ksupport_eval(&n, 2, &y, 1e-9).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(dual_eval(&n, &y).unwrap(), 2.0);
    }

    #[test]
    fn ball_membership() {
        let l2 = NormSpec::lp(2.0).unwrap();
        let x = v(&[0.3, 0.4, 0.0]);
        assert!(topk_ball_contains(&l2, 1, &x, 1e-12).unwrap());
        assert!(topk_ball_contains(&l2, 3, &v(&[0.0, 0.0, 0.0]), 0.0).unwrap());
        let x = v(&[0.6, 0.8, 0.7]);
        assert!(topk_ball_contains(&l2, 1, &x, 0.0).unwrap());
        assert!(!topk_ball_contains(&l2, 2, &x, 1e-9).unwrap());
        assert!(ksupport_ball_contains(&NormSpec::lp_inf(), 2, &v(&[0.5, -0.25, 0.25]), 0.0).unwrap());
    }

    #[test]
    fn stationarity_tolerances() {
        assert!(Stationarity::analytic().equal(1.0 + 5e-9, 1.0));
        assert!(!Stationarity::analytic().equal(1.0 + 5e-8, 1.0));
        assert!(Stationarity::optimized(1e-8).equal(1.0 + 5e-7, 1.0));
        assert!(Stationarity::analytic().equal(5e-11, 0.0));
    }
}
