//! Dual polytopes of projective spaces and their products.
//!
//! The polytope of `CP^n` is the closed simplex
//! `{x ∈ R^n : x^j ≥ 0, x^1 + ⋯ + x^n ≤ 2}`; products of projective spaces
//! get the cartesian product of these simplices, with coordinates grouped by
//! factor in the order the factors were given.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_weight::format_rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("point has dimension {got}, polytope has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot parse space descriptor {0:?} (expected e.g. \"P2\" or \"P1xP2\")")]
    BadDescriptor(String),
    #[error("infeasible face in factor {factor}: every constraint active")]
    InfeasibleFace { factor: usize },
    #[error("constraint {constraint} does not exist in factor {factor}")]
    UnknownConstraint {
        factor: usize,
        constraint: Constraint,
    },
}

/// The scaled simplex `P_n` of `CP^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimplexFactor {
    dim: usize,
}

impl SimplexFactor {
    pub fn new(dim: usize) -> Option<Self> {
        (dim >= 1).then_some(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rational coordinates of the `n + 1` vertices: the origin, then `2e_j`.
    pub fn vertices(&self) -> Vec<Vec<Rational64>> {
        let two = Rational64::from_integer(2);
        let mut out = vec![vec![Rational64::zero(); self.dim]];
        for j in 0..self.dim {
            let mut v = vec![Rational64::zero(); self.dim];
            v[j] = two;
            out.push(v);
        }
        out
    }

    /// Constraints of this factor that hold with equality at `x`, or `None`
    /// when `x` violates one of them.
    pub fn active_constraints(&self, x: &[Rational64]) -> Option<BTreeSet<Constraint>> {
        debug_assert_eq!(x.len(), self.dim);
        let mut active = BTreeSet::new();
        for (j, c) in x.iter().enumerate() {
            if c.is_negative() {
                return None;
            }
            if c.is_zero() {
                active.insert(Constraint::CoordZero(j + 1));
            }
        }
        let sum: Rational64 = x.iter().sum();
        let two = Rational64::from_integer(2);
        if sum > two {
            return None;
        }
        if sum == two {
            active.insert(Constraint::SumIsTwo);
        }
        Some(active)
    }
}

/// One of the facet inequalities of a simplex factor, in the form "holds with
/// equality". Coordinates are numbered from 1 within their factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constraint {
    CoordZero(usize),
    SumIsTwo,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::CoordZero(j) => write!(f, "x{}=0", j),
            Constraint::SumIsTwo => write!(f, "sum=2"),
        }
    }
}

/// Active constraint sets, one per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaceDescriptor {
    per_factor: Vec<BTreeSet<Constraint>>,
}

impl FaceDescriptor {
    pub fn new(
        polytope: &ProductPolytope,
        per_factor: Vec<BTreeSet<Constraint>>,
    ) -> Result<Self, PolytopeError> {
        if per_factor.len() != polytope.factors.len() {
            return Err(PolytopeError::DimensionMismatch {
                expected: polytope.factors.len(),
                got: per_factor.len(),
            });
        }
        for (k, (set, factor)) in per_factor.iter().zip(&polytope.factors).enumerate() {
            for c in set {
                if let Constraint::CoordZero(j) = c {
                    if *j == 0 || *j > factor.dim {
                        return Err(PolytopeError::UnknownConstraint {
                            factor: k + 1,
                            constraint: *c,
                        });
                    }
                }
            }
            // all coordinates zero forces the sum to be 0, not 2
            if set.len() == factor.dim + 1 {
                return Err(PolytopeError::InfeasibleFace { factor: k + 1 });
            }
        }
        Ok(Self { per_factor })
    }

    pub fn per_factor(&self) -> &[BTreeSet<Constraint>] {
        &self.per_factor
    }

    /// Labels such as `"f1:x1=0"`, in factor order.
    pub fn labels(&self) -> Vec<String> {
        self.per_factor
            .iter()
            .enumerate()
            .flat_map(|(k, set)| set.iter().map(move |c| format!("f{}:{}", k + 1, c)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Interior,
    Boundary(FaceDescriptor),
    Outside,
}

impl Location {
    pub fn is_boundary(&self) -> bool {
        matches!(self, Location::Boundary(_))
    }
}

/// Exact rational point, coordinates grouped by factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint(pub Vec<Rational64>);

impl RationalPoint {
    pub fn new(coords: Vec<Rational64>) -> Self {
        Self(coords)
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        Self(
            coords
                .iter()
                .map(|&c| Rational64::from_integer(c))
                .collect(),
        )
    }

    pub fn coords(&self) -> &[Rational64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|c| *c.numer() as f64 / *c.denom() as f64)
            .collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

/// `Π P_{n_k}`; at least one factor, order fixed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductPolytope {
    factors: Vec<SimplexFactor>,
}

impl ProductPolytope {
    pub fn new(dims: &[usize]) -> Option<Self> {
        if dims.is_empty() {
            return None;
        }
        let factors = dims
            .iter()
            .map(|&d| SimplexFactor::new(d))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { factors })
    }

    pub fn projective_space(n: usize) -> Option<Self> {
        Self::new(&[n])
    }

    pub fn factors(&self) -> &[SimplexFactor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).sum()
    }

    /// Coordinate ranges of the factors inside a full point.
    pub fn factor_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.factors
            .iter()
            .map(|f| {
                let r = start..start + f.dim;
                start += f.dim;
                r
            })
            .collect()
    }

    fn check_dim(&self, x: &RationalPoint) -> Result<(), PolytopeError> {
        if x.dim() != self.total_dim() {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.total_dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    pub fn classify(&self, x: &RationalPoint) -> Result<Location, PolytopeError> {
        self.check_dim(x)?;
        let mut per_factor = Vec::with_capacity(self.factors.len());
        for (factor, range) in self.factors.iter().zip(self.factor_ranges()) {
            match factor.active_constraints(&x.0[range]) {
                Some(active) => per_factor.push(active),
                None => return Ok(Location::Outside),
            }
        }
        if per_factor.iter().all(BTreeSet::is_empty) {
            Ok(Location::Interior)
        } else {
            Ok(Location::Boundary(FaceDescriptor { per_factor }))
        }
    }

    pub fn vertices(&self) -> Vec<RationalPoint> {
        let mut out: Vec<Vec<Rational64>> = vec![Vec::new()];
        for factor in &self.factors {
            let fv = factor.vertices();
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    fv.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.extend_from_slice(v);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(RationalPoint).collect()
    }

    pub fn descriptor(&self) -> String {
        self.factors
            .iter()
            .map(|f| format!("P{}", f.dim))
            .collect::<Vec<_>>()
            .join("x")
    }
}

impl fmt::Display for ProductPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for ProductPolytope {
    type Err = PolytopeError;

    /// Parses `"P2"`, `"P1xP2"`, … ; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolytopeError::BadDescriptor(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let dims = compact
            .split(['x', 'X'])
            .map(|part| {
                let digits = part.strip_prefix('P').or_else(|| part.strip_prefix('p'))?;
                if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
                    return None;
                }
                digits.parse::<usize>().ok()
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        ProductPolytope::new(&dims).ok_or_else(bad)
    }
}

/// Returns `Some(λ)` with `c = λa + (1−λ)b`, `λ ∈ [0, 1]`, when `c` lies on
/// the closed segment `[a, b]`. For `a = b = c` the witness is `λ = 1`.
pub fn segment_parameter(
    a: &RationalPoint,
    b: &RationalPoint,
    c: &RationalPoint,
) -> Result<Option<Rational64>, PolytopeError> {
    if a.dim() != b.dim() || a.dim() != c.dim() {
        return Err(PolytopeError::DimensionMismatch {
            expected: a.dim(),
            got: if a.dim() != b.dim() { b.dim() } else { c.dim() },
        });
    }
    let pivot = a.0.iter().zip(&b.0).position(|(x, y)| x != y);
    let Some(j) = pivot else {
        return Ok((c == a).then(Rational64::one));
    };
    let lambda = (c.0[j] - b.0[j]) / (a.0[j] - b.0[j]);
    if lambda.is_negative() || lambda > Rational64::one() {
        return Ok(None);
    }
    let on_line =
        a.0.iter()
            .zip(&b.0)
            .zip(&c.0)
            .all(|((x, y), z)| lambda * x + (Rational64::one() - lambda) * y == *z);
    Ok(on_line.then_some(lambda))
}

pub fn segment_contains(
    a: &RationalPoint,
    b: &RationalPoint,
    c: &RationalPoint,
) -> Result<bool, PolytopeError> {
    Ok(segment_parameter(a, b, c)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn pt(c: &[(i64, i64)]) -> RationalPoint {
        RationalPoint(c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    fn set(cs: &[Constraint]) -> BTreeSet<Constraint> {
        cs.iter().copied().collect()
    }

    #[test]
    fn classify_examples() {
        let p2: ProductPolytope = "P2".parse().unwrap();
        assert_eq!(
            p2.classify(&pt(&[(1, 1), (1, 2)])).unwrap(),
            Location::Interior
        );
        match p2.classify(&pt(&[(1, 1), (1, 1)])).unwrap() {
            Location::Boundary(face) => {
                assert_eq!(face.per_factor(), &[set(&[Constraint::SumIsTwo])])
            }
            other => panic!("unexpected {:?}", other),
        }
        let p1p1: ProductPolytope = "P1xP1".parse().unwrap();
        match p1p1
            .classify(&RationalPoint::from_integers(&[0, 2]))
            .unwrap()
        {
            Location::Boundary(face) => {
                assert_eq!(
                    face.per_factor(),
                    &[
                        set(&[Constraint::CoordZero(1)]),
                        set(&[Constraint::SumIsTwo])
                    ]
                );
                assert_eq!(face.labels(), vec!["f1:x1=0", "f2:sum=2"]);
            }
            other => panic!("unexpected {:?}", other),
        }
        assert_eq!(
            p2.classify(&pt(&[(3, 2), (1, 1)])).unwrap(),
            Location::Outside
        );
        assert_eq!(
            p2.classify(&pt(&[(-1, 2), (1, 1)])).unwrap(),
            Location::Outside
        );
    }

    #[test]
    fn classify_rejects_wrong_dimension() {
        let p2 = ProductPolytope::projective_space(2).unwrap();
        assert!(matches!(
            p2.classify(&RationalPoint::from_integers(&[1])),
            Err(PolytopeError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn vertices_examples() {
        let p2 = ProductPolytope::projective_space(2).unwrap();
        assert_eq!(
            p2.vertices(),
            vec![
                RationalPoint::from_integers(&[0, 0]),
                RationalPoint::from_integers(&[2, 0]),
                RationalPoint::from_integers(&[0, 2]),
            ]
        );
        let p1 = ProductPolytope::projective_space(1).unwrap();
        assert_eq!(p1.vertices().len(), 2);
        let p1p1: ProductPolytope = "P1xP1".parse().unwrap();
        assert_eq!(p1p1.vertices().len(), 4);
    }

    #[test]
    fn every_vertex_is_boundary() {
        for desc in ["P1", "P2", "P3", "P1xP2", "P2xP1xP1"] {
            let p: ProductPolytope = desc.parse().unwrap();
            for v in p.vertices() {
                assert!(p.classify(&v).unwrap().is_boundary(), "{} {}", desc, v);
            }
        }
    }

    #[test]
    fn segment_examples() {
        let r = |c: &[i64]| RationalPoint::from_integers(c);
        assert_eq!(
            segment_parameter(&r(&[0]), &r(&[2]), &r(&[1])).unwrap(),
            Some(q(1, 2))
        );
        assert!(!segment_contains(&r(&[0, 0]), &r(&[2, 0]), &r(&[0, 2])).unwrap());
        assert_eq!(
            segment_parameter(&r(&[1]), &r(&[2]), &pt(&[(4, 3)])).unwrap(),
            Some(q(2, 3))
        );
        assert!(!segment_contains(&r(&[0]), &r(&[2]), &r(&[3])).unwrap());
        assert!(segment_contains(&r(&[1, 1]), &r(&[1, 1]), &r(&[1, 1])).unwrap());
        assert!(segment_contains(&r(&[0]), &r(&[1, 1]), &r(&[0])).is_err());
    }

    #[test]
    fn descriptor_parsing() {
        let p: ProductPolytope = "P1x P2".parse().unwrap();
        assert_eq!(p.dims(), vec![1, 2]);
        assert_eq!(p.descriptor(), "P1xP2");
        for bad in ["", "P0", "Q2", "P1x", "P-1", "P1xxP2", "2"] {
            assert!(bad.parse::<ProductPolytope>().is_err(), "{:?}", bad);
        }
    }

    #[test]
    fn infeasible_faces_are_rejected() {
        let p1 = ProductPolytope::projective_space(1).unwrap();
        let all = set(&[Constraint::CoordZero(1), Constraint::SumIsTwo]);
        assert_eq!(
            FaceDescriptor::new(&p1, vec![all]),
            Err(PolytopeError::InfeasibleFace { factor: 1 })
        );
        assert!(FaceDescriptor::new(&p1, vec![set(&[Constraint::CoordZero(2)])]).is_err());
        assert!(FaceDescriptor::new(&p1, vec![set(&[Constraint::SumIsTwo])]).is_ok());
    }
}
