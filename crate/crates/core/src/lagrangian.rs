//! Objects `L_a`, pairwise intersection data and the potentials `f_{ab;I}`.
//!
//! In dual coordinates the section `L_a` is `y = (a/2)x`, so for `a ≠ b` the
//! intersection components of `L_a` and the `I`-shifted `L_b` are the points
//! `v_{ab;I} = 2I/(b−a)`. All data here is per simplex factor; product spaces
//! are assembled in [`crate::morse_category`].

use std::fmt;
use std::ops::Add;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dg_model::{normalization_constant, DgError};
use crate::exact_weight::{ExactLog, PosExact};
use crate::polytope::{RationalPoint, SimplexFactor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LagrangianError {
    #[error("pair ({a},{b}) is not in the a<b regime")]
    NotIncreasing { a: i64, b: i64 },
    #[error("index {index} is not admissible for the pair ({a},{b})")]
    Inadmissible { a: i64, b: i64, index: MultiIndex },
    #[error("point {0} lies outside the polytope")]
    OutsidePolytope(RationalPoint),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Normalization(#[from] DgError),
}

/// `L_a` on a product of projective spaces, one label per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineObject(pub Vec<i64>);

impl LineObject {
    pub fn new(labels: Vec<i64>) -> Self {
        Self(labels)
    }

    pub fn single(a: i64) -> Self {
        Self(vec![a])
    }

    pub fn labels(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for LineObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "L({})", parts.join(","))
    }
}

/// Integer sector label `I`, grouped by factor when it spans a product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zero(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&i| i == 0)
    }

    /// `|I| = i_1 + ⋯ + i_n`.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), rhs.len(), "multi-index lengths differ");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Geometry of one factor of a hom generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FactorGeometry {
    Point(RationalPoint),
    WholeFactor,
}

/// One generator of `Mo(P_n)(L_a, L_b)` for a single simplex factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactorGenerator {
    pub index: MultiIndex,
    pub geometry: FactorGeometry,
    pub degree: usize,
}

/// All vectors of `len` non-negative integers with sum at most `bound`, in
/// lexicographic order.
pub(crate) fn bounded_compositions(len: usize, bound: i64) -> Vec<Vec<i64>> {
    fn rec(len: usize, bound: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for i in 0..=bound {
            prefix.push(i);
            rec(len, bound - i, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if bound >= 0 {
        rec(len, bound, &mut Vec::with_capacity(len), &mut out);
    }
    out
}

/// `v_{ab;I} = 2I/(b−a)`; requires `a ≠ b`.
pub fn base_point(a: i64, b: i64, index: &MultiIndex) -> RationalPoint {
    assert_ne!(a, b, "base point needs distinct labels");
    RationalPoint(
        index
            .0
            .iter()
            .map(|&i| Rational64::new(2 * i, b - a))
            .collect(),
    )
}

/// Generators of `Mo(P_n)(L_a, L_b)` with their points and degrees.
///
/// `a < b`: one degree-0 point per `I ≥ 0` with `|I| ≤ b−a`. `a = b`: the
/// whole factor in degree 0. `a > b`: the interior points `2I/(b−a)` with
/// every `i_j ≤ −1` and `Σ(−i_j) ≤ a−b−1`, in degree `n` (their stable
/// manifold is everything, so only interior points are admitted).
pub fn hom_indices(a: i64, b: i64, n: usize) -> Vec<FactorGenerator> {
    use std::cmp::Ordering::*;
    match a.cmp(&b) {
        Equal => vec![FactorGenerator {
            index: MultiIndex::zero(n),
            geometry: FactorGeometry::WholeFactor,
            degree: 0,
        }],
        Less => bounded_compositions(n, b - a)
            .into_iter()
            .map(|i| {
                let index = MultiIndex(i);
                FactorGenerator {
                    geometry: FactorGeometry::Point(base_point(a, b, &index)),
                    index,
                    degree: 0,
                }
            })
            .collect(),
        Greater => {
            // shift by one: j_k = -i_k - 1 ≥ 0, Σ j ≤ a-b-1-n
            bounded_compositions(n, a - b - 1 - n as i64)
                .into_iter()
                .map(|j| {
                    let index = MultiIndex(j.into_iter().map(|x| -x - 1).collect());
                    FactorGenerator {
                        geometry: FactorGeometry::Point(base_point(a, b, &index)),
                        index,
                        degree: n,
                    }
                })
                .collect()
        }
    }
}

/// Whether `I` labels a generator of the pair `(a, b)` with `a ≤ b`.
pub fn is_admissible(a: i64, b: i64, index: &MultiIndex) -> bool {
    a <= b && index.0.iter().all(|&i| i >= 0) && index.total() <= b - a
}

/// Magnitude of a normalized basis element at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Magnitude {
    /// A boundary factor raised to a positive power.
    Zero,
    Positive(PosExact),
}

impl Magnitude {
    pub fn positive(self) -> Option<PosExact> {
        match self {
            Magnitude::Zero => None,
            Magnitude::Positive(p) => Some(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PotentialValue {
    NegInfinity,
    Finite(ExactLog),
}

/// The pair `(L_a, L_b)`, `a < b`, in sector `I` on a single simplex factor.
///
/// Its potential is `f_{ab;I} = log|e_{ab;I}|`: non-positive on the polytope
/// and zero exactly at `v_{ab;I}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairPotential {
    a: i64,
    b: i64,
    index: MultiIndex,
    base_point: RationalPoint,
    constant: PosExact,
}

impl PairPotential {
    pub fn new(a: i64, b: i64, index: MultiIndex) -> Result<Self, LagrangianError> {
        if a >= b {
            return Err(LagrangianError::NotIncreasing { a, b });
        }
        if !is_admissible(a, b, &index) {
            return Err(LagrangianError::Inadmissible { a, b, index });
        }
        let constant = normalization_constant(a, b, &index)?;
        Ok(Self {
            base_point: base_point(a, b, &index),
            a,
            b,
            index,
            constant,
        })
    }

    pub fn labels(&self) -> (i64, i64) {
        (self.a, self.b)
    }

    pub fn index(&self) -> &MultiIndex {
        &self.index
    }

    pub fn base_point(&self) -> &RationalPoint {
        &self.base_point
    }

    pub fn constant(&self) -> &PosExact {
        &self.constant
    }

    fn check_point(&self, x: &RationalPoint) -> Result<(), LagrangianError> {
        let n = self.index.len();
        if x.dim() != n {
            return Err(LagrangianError::DimensionMismatch {
                expected: n,
                got: x.dim(),
            });
        }
        let factor = SimplexFactor::new(n).expect("index has positive length");
        if factor.active_constraints(x.coords()).is_none() {
            return Err(LagrangianError::OutsidePolytope(x.clone()));
        }
        Ok(())
    }

    /// `|e_{ab;I}(x)| = c · ((2−Σx)/2)^{(b−a−|I|)/2} · Π (x^j/2)^{i_j/2}`.
    pub fn magnitude_at(&self, x: &RationalPoint) -> Result<Magnitude, LagrangianError> {
        self.check_point(x)?;
        let two = Rational64::from_integer(2);
        let slack = (two - x.coords().iter().sum::<Rational64>()) / two;
        let mut parts = vec![(slack, self.b - self.a - self.index.total())];
        parts.extend(
            x.coords()
                .iter()
                .map(|c| c / two)
                .zip(self.index.0.iter().copied()),
        );
        let mut value = self.constant.clone();
        for (base, twice_exp) in parts {
            if twice_exp == 0 {
                continue;
            }
            if base.is_zero() {
                return Ok(Magnitude::Zero);
            }
            debug_assert!(base.is_positive());
            value = &value
                * &PosExact::rational_power(base, Rational64::new(twice_exp, 2))
                    .expect("positive base");
        }
        Ok(Magnitude::Positive(value))
    }

    pub fn potential_value(&self, x: &RationalPoint) -> Result<PotentialValue, LagrangianError> {
        Ok(match self.magnitude_at(x)? {
            Magnitude::Zero => PotentialValue::NegInfinity,
            Magnitude::Positive(m) => PotentialValue::Finite(m.ln()),
        })
    }

    pub fn minus_grad(&self, x: &RationalPoint) -> Vec<Rational64> {
        minus_grad(self.a, self.b, &self.index, x)
    }
}

/// `−grad f_{ab;I}` in dual coordinates: component `j` is
/// `((b−a)/2)·x^j − i_j`. Linear, defined on all of `R^n`.
pub fn minus_grad(a: i64, b: i64, index: &MultiIndex, x: &RationalPoint) -> Vec<Rational64> {
    assert_eq!(index.len(), x.dim(), "dimension mismatch");
    let rate = Rational64::new(b - a, 2);
    x.coords()
        .iter()
        .zip(&index.0)
        .map(|(c, &i)| rate * c - Rational64::from_integer(i))
        .collect()
}

/// Fiber coordinates `s_a = (a/2)x` of the section `L_a`.
pub fn section(a: i64, x: &RationalPoint) -> Vec<Rational64> {
    let slope = Rational64::new(a, 2);
    x.coords().iter().map(|c| slope * c).collect()
}
