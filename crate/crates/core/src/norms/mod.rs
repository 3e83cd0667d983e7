//! Source norms: evaluation, dual norms, restriction norms and
//! `||.||`-dual pairs.

mod atomic;
mod spec;

use serde::Serialize;

pub use spec::{DeclaredFlags, Exponent, NormKind, NormSpec};

use crate::error::{Error, Result};
use crate::vectors::{check_same_dim, dot, sign_scalar, support, IndexSet, Vector};

/// Default tolerance for optimization-backed evaluations.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Anything that can be evaluated as a norm on `R^d`. The property checkers
/// work against this trait so that derived norms (top-k, k-support, duals)
/// can be checked the same way as source norms.
pub trait Norm: Send + Sync {
    fn eval(&self, x: &Vector) -> Result<f64>;

    /// Dimension imposed by the norm itself, if any.
    fn fixed_dim(&self) -> Option<usize> {
        None
    }

    fn label(&self) -> String;

    /// The underlying specification, when the norm is a source norm.
    fn spec(&self) -> Option<&NormSpec> {
        None
    }
}

impl Norm for NormSpec {
    fn eval(&self, x: &Vector) -> Result<f64> {
        eval(self, x)
    }

    fn fixed_dim(&self) -> Option<usize> {
        NormSpec::fixed_dim(self)
    }

    fn label(&self) -> String {
        self.to_string()
    }

    fn spec(&self) -> Option<&NormSpec> {
        Some(self)
    }
}

/// The dual norm of a spec, viewed as a [`Norm`].
#[derive(Debug, Clone)]
pub struct DualNorm<'a>(pub &'a NormSpec);

impl Norm for DualNorm<'_> {
    fn eval(&self, y: &Vector) -> Result<f64> {
        dual_eval(self.0, y)
    }

    fn fixed_dim(&self) -> Option<usize> {
        self.0.fixed_dim()
    }

    fn label(&self) -> String {
        format!("dual({})", self.0)
    }
}

/// `(sum |x_i|^p)^(1/p)`, or `max |x_i|`. Scaled by the largest modulus so
/// that large exponents neither overflow nor underflow.
pub(crate) fn lp_value(x: &[f64], p: Exponent) -> f64 {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match p {
        Exponent::Infinity => max,
        Exponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
        _ if max == 0.0 => 0.0,
        Exponent::Finite(2.0) => max * x.iter().map(|v| (v / max) * (v / max)).sum::<f64>().sqrt(),
        Exponent::Finite(p) => max * x.iter().map(|v| (v.abs() / max).powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

fn weighted(x: &[f64], w: &Vector) -> Vec<f64> {
    x.iter().zip(w.iter()).map(|(a, b)| a * b).collect()
}

fn unweighted(y: &[f64], w: &Vector) -> Vec<f64> {
    y.iter().zip(w.iter()).map(|(a, b)| a / b).collect()
}

/// `||x||` on raw slices; the dimension has already been checked.
pub(crate) fn eval_slice(n: &NormSpec, x: &[f64]) -> Result<f64> {
    match n.kind() {
        NormKind::Lp { p } => Ok(lp_value(x, *p)),
        NormKind::WeightedLp { p, w } => Ok(lp_value(&weighted(x, w), *p)),
        NormKind::Atomic { atoms } => atomic::gauge(atoms, x),
    }
}

pub(crate) fn dual_eval_slice(n: &NormSpec, y: &[f64]) -> f64 {
    match n.kind() {
        NormKind::Lp { p } => lp_value(y, p.conjugate()),
        NormKind::WeightedLp { p, w } => lp_value(&unweighted(y, w), p.conjugate()),
        NormKind::Atomic { atoms } => atomic::support_function(atoms, y),
    }
}

/// `||x||` for the source norm `n`.
pub fn eval(n: &NormSpec, x: &Vector) -> Result<f64> {
    n.check_dim(x.dim())?;
    eval_slice(n, x.as_slice())
}

/// `||y||_* = sup { <x, y> : ||x|| <= 1 }`.
pub fn dual_eval(n: &NormSpec, y: &Vector) -> Result<f64> {
    n.check_dim(y.dim())?;
    Ok(dual_eval_slice(n, y.as_slice()))
}

/// The dual of the dual norm at `x`, computed by maximizing `<x, y>` over the
/// dual unit ball. For the ℓp family the maximizer is explicit; for atomic
/// norms it is the polar-polytope LP.
pub fn bidual_eval(n: &NormSpec, x: &Vector, tol: f64) -> Result<f64> {
    n.check_dim(x.dim())?;
    if x.is_zero() {
        return Ok(0.0);
    }
    match n.kind() {
        NormKind::Atomic { atoms } => atomic::polar_support(atoms, x.as_slice(), tol),
        _ => {
            let v = dual_vector(n, x.as_slice())?;
            Ok(dot(x.as_slice(), &v) / dual_eval_slice(n, &v))
        }
    }
}

fn require_in_subspace(x: &Vector, k: &IndexSet) -> Result<()> {
    check_same_dim(k.ambient_dim(), x.dim())?;
    if !support(x).is_subset_of(k) {
        return Err(Error::NotInSubspace(k.to_string()));
    }
    Ok(())
}

/// The `K`-restriction norm: the source norm evaluated on `F_K`.
pub fn restrict_eval(n: &NormSpec, k: &IndexSet, x: &Vector) -> Result<f64> {
    require_in_subspace(x, k)?;
    eval(n, x)
}

/// First dual, then restriction: the dual norm evaluated on `F_K`.
pub fn star_k_eval(n: &NormSpec, k: &IndexSet, y: &Vector) -> Result<f64> {
    require_in_subspace(y, k)?;
    dual_eval(n, y)
}

/// First restriction, then dual: `sup { <x, y> : x in F_K, ||x|| <= 1 }`.
pub fn k_star_eval(n: &NormSpec, k: &IndexSet, y: &Vector, _tol: f64) -> Result<f64> {
    require_in_subspace(y, k)?;
    n.check_dim(y.dim())?;
    let pick = |v: &[f64]| -> Vec<f64> { k.members().iter().map(|&i| v[i]).collect() };
    match n.kind() {
        NormKind::Lp { p } => Ok(lp_value(&pick(y.as_slice()), p.conjugate())),
        NormKind::WeightedLp { p, w } => {
            let scaled = unweighted(y.as_slice(), w);
            Ok(lp_value(&pick(&scaled), p.conjugate()))
        }
        NormKind::Atomic { atoms } => atomic::restricted_dual(atoms, k, y.as_slice()),
    }
}

/// A pair `(u, v)` together with its duality gap `||u|| ||v||_* - <u, v>`.
#[derive(Debug, Clone, Serialize)]
pub struct DualPair {
    pub u: Vector,
    pub v: Vector,
    pub norm: NormSpec,
    pub gap: f64,
}

impl DualPair {
    fn new(norm: &NormSpec, u: Vector, v: Vector) -> Result<Self> {
        let gap = eval(norm, &u)? * dual_eval(norm, &v)? - u.dot(&v)?;
        Ok(DualPair {
            u,
            v,
            norm: norm.clone(),
            gap,
        })
    }

    /// Whether `gap <= tol * ||u|| ||v||_*`.
    pub fn is_certified(&self, tol: f64) -> Result<bool> {
        let scale = eval(&self.norm, &self.u)? * dual_eval(&self.norm, &self.v)?;
        Ok(self.gap <= tol * scale)
    }
}

/// ℓp-dual vector of a nonzero `u`, following the closed-form rules for each
/// exponent; weights are absorbed by duality of `w∘x` against `y/w`.
fn dual_vector(n: &NormSpec, u: &[f64]) -> Result<Vec<f64>> {
    let (p, w) = match n.kind() {
        NormKind::Lp { p } => (*p, None),
        NormKind::WeightedLp { p, w } => (*p, Some(w)),
        NormKind::Atomic { .. } => {
            return Err(Error::Unsupported(
                "closed-form dual pairs exist only for the lp family; use dual_pair_search".into(),
            ))
        }
    };
    let base = match w {
        Some(w) => weighted(u, w),
        None => u.to_vec(),
    };
    let max = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut v: Vec<f64> = match p {
        Exponent::Finite(1.0) => base.iter().map(|&x| sign_scalar(x)).collect(),
        Exponent::Finite(2.0) => base.clone(),
        // |u|^(p/q) = |u|^(p-1); normalized by max|u| (a positive rescaling)
        Exponent::Finite(p) => base
            .iter()
            .map(|&x| sign_scalar(x) * (x.abs() / max).powf(p - 1.0))
            .collect(),
        Exponent::Infinity => base
            .iter()
            .map(|&x| if x.abs() == max { sign_scalar(x) } else { 0.0 })
            .collect(),
    };
    if let Some(w) = w {
        v = weighted(&v, w);
    }
    Ok(v)
}

/// Explicit `||.||`-dual vector for the ℓp family.
///
/// For `p < inf` the result has the same support as `u` and `u∘v >= 0`; for
/// `p = inf` it is supported on `argmax |u_i|` only.
pub fn dual_pair_construct(n: &NormSpec, u: &Vector) -> Result<DualPair> {
    n.check_dim(u.dim())?;
    if u.is_zero() {
        return Err(Error::InvalidArgument("dual pairs are not defined for u = 0".into()));
    }
    let v = dual_vector(n, u.as_slice())?;
    DualPair::new(n, u.clone(), Vector::from_finite(v))
}

/// A maximizer `v` of `<u, .>` over the dual unit ball, with certified gap.
pub fn dual_pair_search(n: &NormSpec, u: &Vector, tol: f64) -> Result<DualPair> {
    n.check_dim(u.dim())?;
    if u.is_zero() {
        return Err(Error::InvalidArgument("dual pairs are not defined for u = 0".into()));
    }
    let pair = match n.kind() {
        NormKind::Atomic { atoms } => {
            let v = atomic::dual_ball_maximizer(atoms, u.as_slice())?;
            DualPair::new(n, u.clone(), v)?
        }
        _ => dual_pair_construct(n, u)?,
    };
    let scale = eval(n, &pair.u)? * dual_eval(n, &pair.v)?;
    if pair.gap > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::non_convergence("dual pair search", pair.gap));
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    fn cross_polytope() -> NormSpec {
        NormSpec::atomic(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval(&NormSpec::lp(2.0).unwrap(), &v(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(eval(&NormSpec::lp_inf(), &v(&[1.0, -7.0, 2.0])).unwrap(), 7.0);
        let w = NormSpec::weighted_lp(1.0, v(&[1.0, 2.0])).unwrap();
        assert_eq!(eval(&w, &v(&[3.0, -1.0])).unwrap(), 5.0);
        assert!(matches!(eval(&w, &v(&[1.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn cross_polytope_gauge_is_l1() {
        // LP oracle: the gauge of conv{±e1, ±e2} is |x1| + |x2|
        let n = cross_polytope();
        for x in [[0.3, -2.0], [1.0, 1.0], [-4.5, 0.0], [0.0, 0.0]] {
            let g = eval(&n, &v(&x)).unwrap();
            assert_relative_eq!(g, x[0].abs() + x[1].abs(), max_relative = 1e-12);
        }
    }

    #[test]
    fn dual_eval_examples() {
        assert_eq!(dual_eval(&NormSpec::lp(1.0).unwrap(), &v(&[1.0, -3.0, 2.0])).unwrap(), 3.0);
        let y = v(&[1.0, -2.0, 2.0]);
        assert_eq!(dual_eval(&NormSpec::lp(2.0).unwrap(), &y).unwrap(), 3.0);
        // max over (±1,0),(0,±1) of <a, (2,5)>
        assert_eq!(dual_eval(&cross_polytope(), &v(&[2.0, 5.0])).unwrap(), 5.0);
    }

    #[test]
    fn bidual_examples() {
        let l3 = NormSpec::lp(3.0).unwrap();
        let x = v(&[0.7, -1.3, 2.2, 0.0]);
        assert_relative_eq!(bidual_eval(&l3, &x, 1e-9).unwrap(), eval(&l3, &x).unwrap(), max_relative = 1e-12);
        assert_eq!(bidual_eval(&l3, &v(&[0.0, 0.0]), 1e-9).unwrap(), 0.0);
        let b = bidual_eval(&cross_polytope(), &v(&[1.0, 1.0]), 1e-9).unwrap();
        assert!((b - 2.0).abs() < 1e-7, "{b}");
    }

    #[test]
    fn restriction_examples() {
        let l2 = NormSpec::lp(2.0).unwrap();
        let k13 = IndexSet::from_one_based(&[1, 3], 3).unwrap();
        assert_eq!(restrict_eval(&l2, &k13, &v(&[3.0, 0.0, 4.0])).unwrap(), 5.0);
        assert_eq!(restrict_eval(&l2, &k13, &v(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        let k2 = IndexSet::from_one_based(&[2], 3).unwrap();
        assert_eq!(restrict_eval(&NormSpec::lp(1.0).unwrap(), &k2, &v(&[0.0, -6.0, 0.0])).unwrap(), 6.0);
        assert!(matches!(
            restrict_eval(&l2, &k2, &v(&[1.0, -6.0, 0.0])),
            Err(Error::NotInSubspace(_))
        ));
    }

    #[test]
    fn star_k_and_k_star_examples() {
        let l2 = NormSpec::lp(2.0).unwrap();
        let k12 = IndexSet::from_one_based(&[1, 2], 3).unwrap();
        let y = v(&[3.0, 4.0, 0.0]);
        assert_eq!(star_k_eval(&l2, &k12, &y).unwrap(), 5.0);
        assert_eq!(k_star_eval(&l2, &k12, &y, DEFAULT_TOL).unwrap(), 5.0);
        let full = IndexSet::full(3);
        let y = v(&[1.0, -2.0, 0.5]);
        for n in [NormSpec::lp(1.5).unwrap(), NormSpec::lp_inf()] {
            let d = dual_eval(&n, &y).unwrap();
            assert_relative_eq!(star_k_eval(&n, &full, &y).unwrap(), d);
            assert_relative_eq!(k_star_eval(&n, &full, &y, DEFAULT_TOL).unwrap(), d, max_relative = 1e-12);
        }
        let zero = v(&[0.0, 0.0, 0.0]);
        assert_eq!(star_k_eval(&l2, &k12, &zero).unwrap(), 0.0);
        assert_eq!(k_star_eval(&l2, &k12, &zero, DEFAULT_TOL).unwrap(), 0.0);
        assert!(k_star_eval(&l2, &k12, &v(&[0.0, 0.0, 1.0]), DEFAULT_TOL).is_err());
    }

    #[test]
    fn atomic_k_star_differs_for_a_non_orthant_monotonic_ball() {
        // conv{±(2,1), ±(1,2)}: on F_{1} the restricted ball reaches x1 = 1,
        // while the dual norm of (1, 0) is max <a, (1,0)> = 2
        let n = NormSpec::atomic(vec![v(&[2.0, 1.0]), v(&[1.0, 2.0])]).unwrap();
        let k1 = IndexSet::from_one_based(&[1], 2).unwrap();
        let y = v(&[1.0, 0.0]);
        assert_relative_eq!(star_k_eval(&n, &k1, &y).unwrap(), 2.0);
        assert_relative_eq!(k_star_eval(&n, &k1, &y, DEFAULT_TOL).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn dual_pair_examples() {
        let l1 = NormSpec::lp(1.0).unwrap();
        let pair = dual_pair_construct(&l1, &v(&[3.0, -1.0, 2.0])).unwrap();
        assert_eq!(pair.v, v(&[1.0, -1.0, 1.0]));
        assert_eq!(pair.u.dot(&pair.v).unwrap(), 6.0);
        assert_eq!(pair.gap, 0.0);

        let l2 = NormSpec::lp(2.0).unwrap();
        let pair = dual_pair_construct(&l2, &v(&[3.0, 4.0])).unwrap();
        assert_eq!(pair.v, v(&[3.0, 4.0]));
        assert_eq!(pair.u.dot(&pair.v).unwrap(), 25.0);

        let pair = dual_pair_construct(&NormSpec::lp_inf(), &v(&[1.0, 0.5, 0.0])).unwrap();
        assert_eq!(pair.v, v(&[1.0, 0.0, 0.0]));
        assert!(support(&pair.v).is_subset_of(&support(&pair.u)));
        assert_ne!(support(&pair.v), support(&pair.u));

        assert!(dual_pair_construct(&l2, &v(&[0.0, 0.0])).is_err());
        assert!(matches!(
            dual_pair_construct(&cross_polytope(), &v(&[1.0, 0.0])),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dual_pair_search_examples() {
        let pair = dual_pair_search(&NormSpec::lp(2.0).unwrap(), &v(&[0.0, 2.5, 0.0]), DEFAULT_TOL).unwrap();
        assert!(pair.gap <= DEFAULT_TOL);
        // polar of the cross-polytope is the square; (1,1) is the vertex maximizing <(2,5), .>
        let pair = dual_pair_search(&cross_polytope(), &v(&[2.0, 5.0]), DEFAULT_TOL).unwrap();
        assert_eq!(pair.v, v(&[1.0, 1.0]));
        assert!(pair.gap.abs() <= 1e-12);
    }

    #[test]
    fn weighted_duality() {
        let n = NormSpec::weighted_lp(3.0, v(&[0.5, 2.0, 1.0])).unwrap();
        let u = v(&[1.0, -0.25, 3.0]);
        let pair = dual_pair_construct(&n, &u).unwrap();
        assert!(pair.is_certified(1e-12).unwrap());
        assert_eq!(support(&pair.v), support(&u));
        assert_relative_eq!(bidual_eval(&n, &u, 1e-9).unwrap(), eval(&n, &u).unwrap(), max_relative = 1e-12);
        let dual = n.dual_spec().unwrap();
        let y = v(&[0.3, 1.0, -2.0]);
        assert_relative_eq!(eval(&dual, &y).unwrap(), dual_eval(&n, &y).unwrap(), max_relative = 1e-12);
    }

    fn spec_strategy() -> impl Strategy<Value = NormSpec> {
        prop_oneof![
            Just(NormSpec::lp(1.0).unwrap()),
            Just(NormSpec::lp(2.0).unwrap()),
            Just(NormSpec::lp(3.0).unwrap()),
            Just(NormSpec::lp(1.5).unwrap()),
            Just(NormSpec::lp_inf()),
        ]
    }

    fn vec_strategy(d: usize) -> impl Strategy<Value = Vector> {
        prop::collection::vec(prop_oneof![Just(0.0), -10.0..10.0f64], d).prop_map(|xs| Vector::new(xs).unwrap())
    }

    proptest! {
        #[test]
        fn norm_axioms_and_holder(n in spec_strategy(), x in vec_strategy(5), y in vec_strategy(5), rho in -5.0..5.0f64) {
            let nx = eval(&n, &x).unwrap();
            let ny = eval(&n, &y).unwrap();
            prop_assert!(eval(&n, &x.add(&y).unwrap()).unwrap() <= nx + ny + 1e-12 * (nx + ny));
            let scaled = eval(&n, &x.scale(rho)).unwrap();
            prop_assert!((scaled - rho.abs() * nx).abs() <= 1e-12 * rho.abs() * nx + 1e-300);
            prop_assert_eq!(nx == 0.0, x.is_zero());
            let holder = x.dot(&y).unwrap();
            prop_assert!(holder <= nx * dual_eval(&n, &y).unwrap() + 1e-12 * (1.0 + holder.abs()));
        }

        #[test]
        fn constructed_pairs_are_certified(n in spec_strategy(), u in vec_strategy(6)) {
            prop_assume!(!u.is_zero());
            let pair = dual_pair_construct(&n, &u).unwrap();
            prop_assert!(pair.is_certified(1e-12).unwrap(), "gap {}", pair.gap);
            let uv = crate::vectors::hadamard(&pair.u, &pair.v).unwrap();
            prop_assert!(uv.iter().all(|&c| c >= 0.0));
            if n.exponent() != Some(Exponent::Infinity) {
                prop_assert_eq!(support(&pair.v), support(&u));
            } else {
                prop_assert!(support(&pair.v).is_subset_of(&support(&u)));
            }
        }

        #[test]
        fn restriction_duality_holds_for_lp(n in spec_strategy(), y in vec_strategy(5), mask in 0u32..32) {
            let members: Vec<usize> = (0..5).filter(|i| mask >> i & 1 == 1).collect();
            let k = IndexSet::new(members, 5).unwrap();
            let yk = crate::vectors::project(&y, &k).unwrap();
            let a = star_k_eval(&n, &k, &yk).unwrap();
            let b = k_star_eval(&n, &k, &yk, DEFAULT_TOL).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(b));
        }
    }
}
