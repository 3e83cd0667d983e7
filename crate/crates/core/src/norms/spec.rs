//! Declarative description of a source norm and its JSON form.

use std::fmt;

use nalgebra::DMatrix;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::vectors::Vector;

/// An exponent in `[1, inf]`. Infinity is its own variant so that conjugate
/// pairs `(1, inf)` never go through `1/inf` arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidSpec(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    /// `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_one(self) -> bool {
        self == Exponent::Finite(1.0)
    }

    pub fn is_infinite(self) -> bool {
        self == Exponent::Infinity
    }

    /// True for `p` in `(1, inf)`, where the ball is strictly convex.
    pub fn is_strictly_convex(self) -> bool {
        matches!(self, Exponent::Finite(p) if p > 1.0)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let p = match Raw::deserialize(deserializer)? {
            Raw::Number(p) => p,
            Raw::Text(s) if s == "inf" || s == "infinity" => f64::INFINITY,
            Raw::Text(s) => s
                .parse::<f64>()
                .map_err(|_| de::Error::custom(format!("invalid exponent {s:?}")))?,
        };
        Exponent::new(p).map_err(de::Error::custom)
    }
}

/// Properties a caller claims for a norm. Evaluators never rely on these;
/// the `properties` checkers verify them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeclaredFlags {
    pub permutation_invariant: bool,
    pub monotonic: bool,
    pub orthant_monotonic: bool,
    pub orthant_strictly_monotonic: bool,
}

impl DeclaredFlags {
    fn is_empty(&self) -> bool {
        *self == DeclaredFlags::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Lp { p: Exponent },
    WeightedLp { p: Exponent, w: Vector },
    /// Gauge of the convex hull of a symmetric, spanning atom set.
    Atomic { atoms: Vec<Vector> },
}

/// A validated source norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    kind: NormKind,
    declared: DeclaredFlags,
}

impl NormSpec {
    pub fn lp(p: f64) -> Result<Self> {
        Ok(NormSpec {
            kind: NormKind::Lp { p: Exponent::new(p)? },
            declared: DeclaredFlags::default(),
        })
    }

    pub fn lp_inf() -> Self {
        NormSpec {
            kind: NormKind::Lp { p: Exponent::Infinity },
            declared: DeclaredFlags::default(),
        }
    }

    pub fn weighted_lp(p: f64, w: Vector) -> Result<Self> {
        if let Some(bad) = w.iter().find(|&&wi| wi <= 0.0) {
            return Err(Error::InvalidSpec(format!("weights must be strictly positive, got {bad}")));
        }
        Ok(NormSpec {
            kind: NormKind::WeightedLp { p: Exponent::new(p)?, w },
            declared: DeclaredFlags::default(),
        })
    }

    /// Gauge of `conv(atoms ∪ -atoms)`. Fails unless the atoms span the space.
    pub fn atomic(atoms: Vec<Vector>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::InvalidSpec("atomic norm needs at least one atom".into()))?;
        let dim = first.dim();
        if let Some(bad) = atoms.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        let mut closed: Vec<Vector> = Vec::with_capacity(2 * atoms.len());
        for a in atoms.iter().flat_map(|a| [a.clone(), a.scale(-1.0)]) {
            if a.is_zero() {
                continue;
            }
            if !closed.contains(&a) {
                closed.push(a);
            }
        }
        let matrix = DMatrix::from_fn(dim, closed.len(), |i, j| closed[j][i]);
        if closed.is_empty() || matrix.rank(1e-10) < dim {
            return Err(Error::InvalidSpec(
                "atoms do not span the space, so their gauge is not a norm".into(),
            ));
        }
        Ok(NormSpec {
            kind: NormKind::Atomic { atoms: closed },
            declared: DeclaredFlags::default(),
        })
    }

    pub fn with_declared(mut self, flags: DeclaredFlags) -> Self {
        self.declared = flags;
        self
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn declared(&self) -> DeclaredFlags {
        self.declared
    }

    /// Dimension fixed by the spec itself; `None` for the dimension-free ℓp family.
    pub fn fixed_dim(&self) -> Option<usize> {
        match &self.kind {
            NormKind::Lp { .. } => None,
            NormKind::WeightedLp { w, .. } => Some(w.dim()),
            NormKind::Atomic { atoms } => Some(atoms[0].dim()),
        }
    }

    pub fn exponent(&self) -> Option<Exponent> {
        match &self.kind {
            NormKind::Lp { p } | NormKind::WeightedLp { p, .. } => Some(*p),
            NormKind::Atomic { .. } => None,
        }
    }

    /// Permutation invariance and monotonicity known from the formula, not from
    /// declarations: only the unweighted ℓp family qualifies.
    pub fn is_structurally_symmetric_monotonic(&self) -> bool {
        matches!(self.kind, NormKind::Lp { .. })
    }

    /// Orthant-monotonicity known from the formula (every weighted ℓp norm is monotonic).
    pub fn is_structurally_orthant_monotonic(&self) -> bool {
        !matches!(self.kind, NormKind::Atomic { .. })
    }

    /// Whether `(R^d, ||.||)` is strictly convex. Polytope balls never are.
    pub fn is_strictly_convex(&self) -> bool {
        self.exponent().is_some_and(Exponent::is_strictly_convex)
    }

    /// Whether the dual space is strictly convex.
    pub fn dual_is_strictly_convex(&self) -> bool {
        self.exponent().is_some_and(|p| p.conjugate().is_strictly_convex())
    }

    /// True when the unit ball is a polytope (ℓ1, ℓ∞, weighted variants, atomic).
    pub fn is_polyhedral(&self) -> bool {
        match self.exponent() {
            Some(p) => p.is_one() || p.is_infinite(),
            None => true,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.fixed_dim() {
            Some(expected) if expected != dim => Err(Error::DimensionMismatch { expected, found: dim }),
            _ => Ok(()),
        }
    }

    /// The dual norm as a spec, when it has a closed form in this family.
    /// Atomic duals are built from the polar polytope's vertices.
    pub fn dual_spec(&self) -> Result<NormSpec> {
        match &self.kind {
            NormKind::Lp { p } => Ok(NormSpec {
                kind: NormKind::Lp { p: p.conjugate() },
                declared: DeclaredFlags::default(),
            }),
            NormKind::WeightedLp { p, w } => Ok(NormSpec {
                kind: NormKind::WeightedLp {
                    p: p.conjugate(),
                    w: Vector::from_finite(w.iter().map(|wi| 1.0 / wi).collect()),
                },
                declared: DeclaredFlags::default(),
            }),
            NormKind::Atomic { atoms } => NormSpec::atomic(super::atomic::polar_vertices(atoms)?),
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NormKind::Lp { p } => write!(f, "lp:{p}"),
            NormKind::WeightedLp { p, w } => {
                write!(f, "wlp:{p}:[")?;
                for (i, wi) in w.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{wi}")?;
                }
                write!(f, "]")
            }
            NormKind::Atomic { atoms } => write!(f, "atomic[{} atoms, d={}]", atoms.len(), atoms[0].dim()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawKind {
    Lp {
        p: Exponent,
    },
    WeightedLp {
        p: Exponent,
        w: Vector,
    },
    Atomic {
        atoms: Vec<Vector>,
    },
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    kind: RawKind,
    #[serde(default, skip_serializing_if = "DeclaredFlags::is_empty")]
    declared_flags: DeclaredFlags,
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let kind = match &self.kind {
            NormKind::Lp { p } => RawKind::Lp { p: *p },
            NormKind::WeightedLp { p, w } => RawKind::WeightedLp { p: *p, w: w.clone() },
            NormKind::Atomic { atoms } => RawKind::Atomic { atoms: atoms.clone() },
        };
        RawSpec {
            kind,
            declared_flags: self.declared,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpec::deserialize(deserializer)?;
        let spec = match raw.kind {
            RawKind::Lp { p } => Ok(NormSpec {
                kind: NormKind::Lp { p },
                declared: DeclaredFlags::default(),
            }),
            RawKind::WeightedLp { p, w } => NormSpec::weighted_lp(p.as_f64(), w),
            RawKind::Atomic { atoms } => NormSpec::atomic(atoms),
        }
        .map_err(de::Error::custom)?;
        Ok(spec.with_declared(raw.declared_flags))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_conjugates() {
        assert_eq!(Exponent::new(1.0).unwrap().conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::Finite(1.0));
        assert_eq!(Exponent::new(2.0).unwrap().conjugate(), Exponent::Finite(2.0));
        assert_eq!(Exponent::new(3.0).unwrap().conjugate(), Exponent::Finite(1.5));
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
    }

    #[test]
    fn json_forms() {
        let lp2: NormSpec = serde_json::from_str(r#"{"kind":"lp","p":2.0}"#).unwrap();
        assert_eq!(lp2, NormSpec::lp(2.0).unwrap());
        let inf: NormSpec = serde_json::from_str(r#"{"kind":"lp","p":"inf"}"#).unwrap();
        assert_eq!(inf, NormSpec::lp_inf());
        assert_eq!(serde_json::to_string(&inf).unwrap(), r#"{"kind":"lp","p":"inf"}"#);
        let w: NormSpec = serde_json::from_str(r#"{"kind":"weighted_lp","p":1.0,"w":[1,2,3]}"#).unwrap();
        assert_eq!(w.fixed_dim(), Some(3));
        let a: NormSpec = serde_json::from_str(r#"{"kind":"atomic","atoms":[[1,0],[0,1]]}"#).unwrap();
        match a.kind() {
            NormKind::Atomic { atoms } => assert_eq!(atoms.len(), 4),
            _ => unreachable!(),
        }
        let round: NormSpec = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(round, a);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"lp","p":0.5}"#).is_err());
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"weighted_lp","p":2,"w":[1,0]}"#).is_err());
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"atomic","atoms":[[1,1],[2,2]]}"#).is_err());
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"atomic","atoms":[]}"#).is_err());
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"simplex"}"#).is_err());
    }

    #[test]
    fn declared_flags_round_trip() {
        let spec = NormSpec::lp(2.0).unwrap().with_declared(DeclaredFlags {
            monotonic: true,
            ..DeclaredFlags::default()
        });
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("declared_flags"));
        let back: NormSpec = serde_json::from_str(&json).unwrap();
        assert!(back.declared().monotonic);
    }
}
