//! Coordinate-vector primitives: supports, coordinate projections,
//! magnitude sorting and subset enumeration.
//!
//! Index sets are stored 0-based and rendered 1-based whenever they cross
//! an I/O boundary (JSON, CLI, Display).

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default absolute threshold for [`numeric_support`].
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-9;

/// Largest ambient dimension accepted by [`subsets_of_size_at_most`].
pub const MAX_ENUMERATION_DIM: usize = 24;

/// A finite real vector of fixed dimension `d >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = components.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Vector::new(vec![0.0; dim])
    }

    /// Unit vector `e_i` (0-based `i`).
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i + 1, dim });
        }
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector::new(v)
    }

    /// Builds a vector from components already known to be finite.
    pub(crate) fn from_finite(components: Vec<f64>) -> Self {
        debug_assert!(!components.is_empty() && components.iter().all(|v| v.is_finite()));
        Vector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn abs(&self) -> Vector {
        Vector(self.0.iter().map(|v| v.abs()).collect())
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Vector::new(value)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A subset `K` of the coordinate indices of a `dim`-dimensional space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    members: Vec<usize>,
    dim: usize,
}

impl IndexSet {
    /// Builds a set from 0-based indices; duplicates are merged.
    pub fn new(mut members: Vec<usize>, dim: usize) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index: bad + 1, dim });
        }
        members.sort_unstable();
        members.dedup();
        Ok(IndexSet { members, dim })
    }

    /// Builds a set from 1-based indices, as they appear in user-facing I/O.
    pub fn from_one_based(members: &[usize], dim: usize) -> Result<Self> {
        let zero_based = members
            .iter()
            .map(|&i| {
                if i == 0 || i > dim {
                    Err(Error::IndexOutOfRange { index: i, dim })
                } else {
                    Ok(i - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        IndexSet::new(zero_based, dim)
    }

    pub fn empty(dim: usize) -> Self {
        IndexSet { members: Vec::new(), dim }
    }

    pub fn full(dim: usize) -> Self {
        IndexSet { members: (0..dim).collect(), dim }
    }

    /// `{0, .., k-1}` in 0-based terms.
    pub fn leading(k: usize, dim: usize) -> Result<Self> {
        if k > dim {
            return Err(Error::KOutOfRange { k, dim });
        }
        Ok(IndexSet { members: (0..k).collect(), dim })
    }

    /// 0-based members, sorted ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.members.iter().map(|i| i + 1).collect()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet {
            members: (0..self.dim).filter(|i| !self.contains(*i)).collect(),
            dim: self.dim,
        }
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.dim == other.dim && self.members.iter().all(|&i| other.contains(i))
    }

    /// Membership mask of length `dim`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.dim];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(serializer)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact support `{ j : x_j != 0 }`.
pub fn support(x: &Vector) -> IndexSet {
    IndexSet {
        members: (0..x.dim()).filter(|&j| x[j] != 0.0).collect(),
        dim: x.dim(),
    }
}

/// Support with an absolute threshold, for reading approximate solver output.
pub fn numeric_support(x: &Vector, threshold: f64) -> IndexSet {
    IndexSet {
        members: (0..x.dim()).filter(|&j| x[j].abs() > threshold).collect(),
        dim: x.dim(),
    }
}

/// Number of nonzero components.
pub fn l0(x: &Vector) -> usize {
    x.iter().filter(|&&v| v != 0.0).count()
}

/// Orthogonal projection onto the coordinate subspace of `k`: keeps the
/// components in `k` and zeroes the rest.
pub fn project(x: &Vector, k: &IndexSet) -> Result<Vector> {
    check_same_dim(k.ambient_dim(), x.dim())?;
    Ok(Vector(project_slice(x.as_slice(), k.members())))
}

pub(crate) fn project_slice(x: &[f64], members: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for &i in members {
        out[i] = x[i];
    }
    out
}

/// Moduli sorted in nonincreasing order; ties keep the original index order.
pub fn sorted_abs_desc(x: &Vector) -> Vector {
    Vector(sorted_abs_desc_slice(x.as_slice()))
}

pub(crate) fn sorted_abs_desc_slice(x: &[f64]) -> Vec<f64> {
    let mut moduli: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    // stable sort; moduli are finite so total_cmp agrees with <
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

/// Componentwise sign in `{-1, 0, 1}`.
pub fn sign(x: &Vector) -> Vector {
    Vector(x.iter().map(|&v| sign_scalar(v)).collect())
}

pub(crate) fn sign_scalar(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Entrywise product.
pub fn hadamard(x: &Vector, y: &Vector) -> Result<Vector> {
    check_same_dim(x.dim(), y.dim())?;
    Ok(Vector(x.iter().zip(y.iter()).map(|(a, b)| a * b).collect()))
}

/// Lazily enumerates every `K` with `|K| <= k`, lexicographically by member list.
///
/// ```
/// use graded_norms::vectors::subsets_of_size_at_most;
/// let all: Vec<_> = subsets_of_size_at_most(3, 1).unwrap().map(|k| k.one_based()).collect();
/// assert_eq!(all, vec![vec![], vec![1], vec![2], vec![3]]);
/// ```
pub fn subsets_of_size_at_most(dim: usize, k: usize) -> Result<Subsets> {
    if dim > MAX_ENUMERATION_DIM {
        return Err(Error::CombinatorialBlowup {
            dim,
            limit: MAX_ENUMERATION_DIM,
        });
    }
    if k > dim {
        return Err(Error::KOutOfRange { k, dim });
    }
    Ok(Subsets {
        dim,
        max_size: k,
        current: Vec::new(),
        started: false,
        done: false,
    })
}

/// Iterator returned by [`subsets_of_size_at_most`].
#[derive(Debug, Clone)]
pub struct Subsets {
    dim: usize,
    max_size: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl Subsets {
    fn advance(&mut self) -> bool {
        let next = self.current.last().map_or(0, |&l| l + 1);
        if self.current.len() < self.max_size && next < self.dim {
            self.current.push(next);
            return true;
        }
        while let Some(last) = self.current.pop() {
            if last + 1 < self.dim {
                self.current.push(last + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for Subsets {
    type Item = IndexSet;

    fn next(&mut self) -> Option<IndexSet> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        Some(IndexSet {
            members: self.current.clone(),
            dim: self.dim,
        })
    }
}

/// Every `K` with `|K| == k`, in lexicographic order.
pub fn subsets_of_size(dim: usize, k: usize) -> Result<impl Iterator<Item = IndexSet>> {
    Ok(subsets_of_size_at_most(dim, k)?.filter(move |s| s.len() == k))
}

/// `C(n, k)` as f64, for sizing checks.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
