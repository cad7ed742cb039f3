//! Cohomology-level model of the holomorphic side.
//!
//! `H^0(O(a), O(b))` on `CP^n` is spanned by monomials `w^I` with `|I| ≤ b−a`.
//! After the twist to dual coordinates each monomial becomes
//! `((2−Σx)/2)^{(b−a−|I|)/2} Π (x^j/2)^{i_j/2}` times a phase, and the
//! constant `c_{ab;I}` rescales it to have maximum modulus one on the
//! polytope. Products of normalized bases are computed purely from these
//! constants, which makes this module an oracle for the Morse side.

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::exact_weight::PosExact;
use crate::lagrangian::{LineObject, MultiIndex};
use crate::morse_category::{hom_space_ranks, HomGenerator};
use crate::polytope::{ProductPolytope, RationalPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DgError {
    #[error("index {index} is not admissible for H^0(O({a}), O({b}))")]
    Inadmissible { a: i64, b: i64, index: MultiIndex },
    #[error("cannot multiply: target {left} differs from source {right}")]
    NotComposable { left: LineObject, right: LineObject },
    #[error("generator of degree {0} has no degree-0 counterpart")]
    NotDegreeZero(usize),
    #[error("factor count mismatch: {0} vs {1}")]
    FactorMismatch(usize, usize),
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `dim H^0(O(a), O(b))` on `CP^n`: `C(b−a+n, n)` for `a ≤ b`, else 0.
pub fn hom_dimension(a: i64, b: i64, n: usize) -> u64 {
    if a > b {
        0
    } else {
        binomial((b - a) as u64 + n as u64, n as u64)
    }
}

/// `dim H^n(O(a), O(b))` on `CP^n`: `C(a−b−1, n)` for `a−b ≥ n+1`, else 0.
pub fn serre_rank(a: i64, b: i64, n: usize) -> u64 {
    if a - b > n as i64 {
        binomial((a - b - 1) as u64, n as u64)
    } else {
        0
    }
}

/// `c_{ab;I}`: the reciprocal of the unnormalized modulus at its maximizer
/// `v = 2I/(b−a)`. `0^0 = 1`; `a = b` forces `I = 0` and `c = 1`.
pub fn normalization_constant(a: i64, b: i64, index: &MultiIndex) -> Result<PosExact, DgError> {
    let admissible = a <= b && index.0.iter().all(|&i| i >= 0) && index.total() <= b - a;
    if !admissible {
        return Err(DgError::Inadmissible {
            a,
            b,
            index: index.clone(),
        });
    }
    if a == b {
        return Ok(PosExact::one());
    }
    let two = Rational64::from_integer(2);
    let v: Vec<Rational64> = index
        .0
        .iter()
        .map(|&i| Rational64::new(2 * i, b - a))
        .collect();
    let slack = (two - v.iter().sum::<Rational64>()) / two;
    let mut terms = vec![(slack, b - a - index.total())];
    terms.extend(v.iter().map(|c| c / two).zip(index.0.iter().copied()));
    let mut value = PosExact::one();
    for (base, twice_exp) in terms {
        if twice_exp == 0 {
            continue;
        }
        // base > 0 whenever its exponent is nonzero
        debug_assert!(!base.is_zero());
        value = &value
            * &PosExact::rational_power(base, Rational64::new(twice_exp, 2)).expect("positive");
    }
    Ok(value.inv())
}

/// The monomial `w^I` in `H^0(O(a), O(b))` of one simplex factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorMonomial {
    pub a: i64,
    pub b: i64,
    pub index: MultiIndex,
}

impl FactorMonomial {
    pub fn new(a: i64, b: i64, index: MultiIndex) -> Result<Self, DgError> {
        normalization_constant(a, b, &index)?;
        Ok(Self { a, b, index })
    }

    pub fn constant(&self) -> PosExact {
        normalization_constant(self.a, self.b, &self.index).expect("validated on construction")
    }

    /// Unique maximizer of the normalized modulus, or `None` when the modulus
    /// is identically one (`a = b`).
    pub fn max_point(&self) -> Option<RationalPoint> {
        (self.a != self.b).then(|| {
            RationalPoint(
                self.index
                    .0
                    .iter()
                    .map(|&i| Rational64::new(2 * i, self.b - self.a))
                    .collect(),
            )
        })
    }
}

/// Tensor product of factor monomials, `e_{a_1b_1;I} ⊗ e_{a_2b_2;J} ⊗ ⋯`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialClass {
    factors: Vec<FactorMonomial>,
}

impl MonomialClass {
    pub fn new(factors: Vec<FactorMonomial>) -> Self {
        Self { factors }
    }

    pub fn identity(object: &LineObject, dims: &[usize]) -> Self {
        Self {
            factors: object
                .labels()
                .iter()
                .zip(dims)
                .map(|(&a, &n)| FactorMonomial {
                    a,
                    b: a,
                    index: MultiIndex::zero(n),
                })
                .collect(),
        }
    }

    pub fn factors(&self) -> &[FactorMonomial] {
        &self.factors
    }

    pub fn source(&self) -> LineObject {
        LineObject(self.factors.iter().map(|f| f.a).collect())
    }

    pub fn target(&self) -> LineObject {
        LineObject(self.factors.iter().map(|f| f.b).collect())
    }

    pub fn index(&self) -> MultiIndex {
        MultiIndex(
            self.factors
                .iter()
                .flat_map(|f| f.index.0.iter().copied())
                .collect(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|f| f.a == f.b)
    }
}

/// A monomial class together with its normalization constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedBasis {
    pub class: MonomialClass,
    pub constant: PosExact,
}

impl NormalizedBasis {
    pub fn new(class: MonomialClass) -> Self {
        let constant = class.factors.iter().map(FactorMonomial::constant).product();
        Self { class, constant }
    }
}

/// Monomial basis of `H^0(O(source), O(target))`, enumerated over the box
/// `[0, b−a]^n` per factor. Empty when some factor has `a > b`.
pub fn monomial_basis(
    dims: &[usize],
    source: &LineObject,
    target: &LineObject,
) -> Vec<NormalizedBasis> {
    let mut classes: Vec<Vec<FactorMonomial>> = vec![Vec::new()];
    for ((&a, &b), &n) in source.labels().iter().zip(target.labels()).zip(dims) {
        if a > b {
            return Vec::new();
        }
        let side = (b - a + 1) as usize;
        let mut factor_monomials = Vec::new();
        for code in 0..side.pow(n as u32) {
            let mut c = code;
            let index: Vec<i64> = (0..n)
                .map(|_| {
                    let d = (c % side) as i64;
                    c /= side;
                    d
                })
                .rev()
                .collect();
            if index.iter().sum::<i64>() <= b - a {
                factor_monomials.push(FactorMonomial {
                    a,
                    b,
                    index: MultiIndex(index),
                });
            }
        }
        factor_monomials.sort();
        classes = classes
            .into_iter()
            .flat_map(|prefix| {
                factor_monomials.iter().map(move |m| {
                    let mut p = prefix.clone();
                    p.push(m.clone());
                    p
                })
            })
            .collect();
    }
    classes
        .into_iter()
        .map(|f| NormalizedBasis::new(MonomialClass::new(f)))
        .collect()
}

/// `e_u · e_v = coef · e_w` with `w` the class of index `I+K`.
///
/// The unnormalized monomials multiply without a constant (the powers of
/// `(2−Σx)/2` and of each `x^j/2` simply add), so `coef = c_u c_v / c_w`.
pub fn multiply_bases(
    u: &NormalizedBasis,
    v: &NormalizedBasis,
) -> Result<(PosExact, MonomialClass), DgError> {
    if u.class.factors.len() != v.class.factors.len() {
        return Err(DgError::FactorMismatch(
            u.class.factors.len(),
            v.class.factors.len(),
        ));
    }
    if u.class.target() != v.class.source() {
        return Err(DgError::NotComposable {
            left: u.class.target(),
            right: v.class.source(),
        });
    }
    let factors = u
        .class
        .factors
        .iter()
        .zip(&v.class.factors)
        .map(|(x, y)| FactorMonomial::new(x.a, y.b, &x.index + &y.index))
        .collect::<Result<Vec<_>, _>>()?;
    let result = NormalizedBasis::new(MonomialClass::new(factors));
    let coef = &(&u.constant * &v.constant) / &result.constant;
    Ok((coef, result.class))
}

/// The comparison map on degree-0 generators: same labels, same index.
pub fn iota(generator: &HomGenerator) -> Result<NormalizedBasis, DgError> {
    if generator.degree() != 0 {
        return Err(DgError::NotDegreeZero(generator.degree()));
    }
    let factors = generator
        .factors()
        .iter()
        .zip(
            generator
                .source()
                .labels()
                .iter()
                .zip(generator.target().labels()),
        )
        .map(|(g, (&a, &b))| FactorMonomial::new(a, b, g.index.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NormalizedBasis::new(MonomialClass::new(factors)))
}

/// Ranks of `Ext^*(O(source), O(target))` on a product of projective spaces:
/// a list of `(degree, rank)` with nonzero rank.
///
/// Each factor contributes either `H^0` (`a ≤ b`) or `H^{n}` (`a > b`), and
/// the Künneth formula multiplies them.
pub fn ext_ranks(dims: &[usize], source: &LineObject, target: &LineObject) -> Vec<(usize, u64)> {
    let mut degree = 0;
    let mut rank = 1u64;
    for ((&a, &b), &n) in source.labels().iter().zip(target.labels()).zip(dims) {
        if a <= b {
            rank *= hom_dimension(a, b, n);
        } else {
            rank *= serre_rank(a, b, n);
            degree += n;
        }
    }
    if rank == 0 {
        Vec::new()
    } else {
        vec![(degree, rank)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionalReport {
    pub pass: bool,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

/// Checks the strongly exceptional conditions for an ordered collection:
/// rank-one endomorphisms, nothing from later to earlier objects in degree 0,
/// and nothing in nonzero degrees. Ranks come from the closed formulas and
/// are cross-checked against the Morse generator counts.
pub fn exceptional_check(
    polytope: &ProductPolytope,
    collection: &[LineObject],
) -> ExceptionalReport {
    let dims = polytope.dims();
    let mut failures = Vec::new();
    let mut pairs_checked = 0;
    for (i, x) in collection.iter().enumerate() {
        for (j, y) in collection.iter().enumerate() {
            pairs_checked += 1;
            let formula = ext_ranks(&dims, x, y);
            let morse = hom_space_ranks(polytope, x, y);
            if formula != morse {
                failures.push(format!(
                    "{} -> {}: formula ranks {:?} but Morse ranks {:?}",
                    x, y, formula, morse
                ));
            }
            let rank_in = |deg: usize| {
                formula
                    .iter()
                    .filter(|(d, _)| *d == deg)
                    .map(|(_, r)| *r)
                    .sum::<u64>()
            };
            if i == j && rank_in(0) != 1 {
                failures.push(format!("{} -> {}: endomorphism rank {}", x, y, rank_in(0)));
            }
            if i > j && rank_in(0) != 0 {
                failures.push(format!("{} -> {}: backward H^0 rank {}", x, y, rank_in(0)));
            }
            for (d, r) in formula.iter().filter(|(d, _)| *d != 0) {
                failures.push(format!("{} -> {}: H^{} rank {}", x, y, d, r));
            }
        }
    }
    ExceptionalReport {
        pass: failures.is_empty(),
        pairs_checked,
        failures,
    }
}

/// `(O(q), …, O(q+n))` on `CP^n`.
pub fn beilinson_collection(q: i64, n: usize) -> Vec<LineObject> {
    (q..=q + n as i64).map(LineObject::single).collect()
}

/// `{O(a_1, …, a_r)}` with `0 ≤ a_k ≤ n_k`, in lexicographic order.
pub fn lexicographic_collection(dims: &[usize]) -> Vec<LineObject> {
    let ranges: Vec<Vec<i64>> = dims.iter().map(|&n| (0..=n as i64).collect()).collect();
    cartesian_objects(&ranges)
}

/// All label vectors drawn from per-factor label lists, lexicographically.
pub fn cartesian_objects(ranges: &[Vec<i64>]) -> Vec<LineObject> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for r in ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                r.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(LineObject).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn pe(pairs: &[(u64, i64, i64)]) -> PosExact {
        PosExact::from_factors(pairs.iter().map(|&(p, n, d)| (p, q(n, d)))).unwrap()
    }

    fn basis1(a: i64, b: i64, i: &[i64]) -> NormalizedBasis {
        NormalizedBasis::new(MonomialClass::new(vec![FactorMonomial::new(
            a,
            b,
            MultiIndex(i.to_vec()),
        )
        .unwrap()]))
    }

    #[test]
    fn normalization_constant_examples() {
        assert_eq!(
            normalization_constant(0, 1, &MultiIndex(vec![0])).unwrap(),
            PosExact::one()
        );
        assert_eq!(
            normalization_constant(0, 2, &MultiIndex(vec![1])).unwrap(),
            PosExact::from_integer(2).unwrap()
        );
        assert_eq!(
            normalization_constant(0, 3, &MultiIndex(vec![2])).unwrap(),
            pe(&[(2, -1, 1), (3, 3, 2)])
        );
        assert_eq!(
            normalization_constant(5, 5, &MultiIndex(vec![0, 0])).unwrap(),
            PosExact::one()
        );
        assert!(normalization_constant(5, 5, &MultiIndex(vec![1, 0])).is_err());
        assert!(normalization_constant(0, 1, &MultiIndex(vec![1, 1])).is_err());
    }

    #[test]
    fn multiply_examples() {
        let (coef, w) = multiply_bases(&basis1(0, 1, &[0]), &basis1(1, 2, &[1])).unwrap();
        assert_eq!(coef, PosExact::from_rational(q(1, 2)).unwrap());
        assert_eq!(w, basis1(0, 2, &[1]).class);

        let (coef, w) = multiply_bases(&basis1(0, 1, &[1]), &basis1(1, 2, &[1])).unwrap();
        assert!(coef.is_one());
        assert_eq!(w, basis1(0, 2, &[2]).class);

        let id = NormalizedBasis::new(MonomialClass::identity(&LineObject::single(0), &[1]));
        let (coef, w) = multiply_bases(&id, &basis1(0, 2, &[1])).unwrap();
        assert!(coef.is_one());
        assert_eq!(w, basis1(0, 2, &[1]).class);
    }

    #[test]
    fn multiply_rejects_mismatched_middle() {
        assert!(matches!(
            multiply_bases(&basis1(0, 1, &[0]), &basis1(2, 3, &[0])),
            Err(DgError::NotComposable { .. })
        ));
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(hom_dimension(0, 2, 2), 6);
        assert_eq!(hom_dimension(2, 0, 1), 0);
        assert_eq!(serre_rank(2, 0, 1), 1);
        for n in 1..=4usize {
            for q in -2..=2i64 {
                assert_eq!(serre_rank(q + n as i64 + 1, q, n), 1);
                assert_eq!(serre_rank(q + n as i64, q, n), 0);
            }
        }
    }

    #[test]
    fn monomial_basis_counts_match_formula() {
        for n in 1..=3usize {
            for d in 0..=4i64 {
                let basis = monomial_basis(&[n], &LineObject::single(0), &LineObject::single(d));
                assert_eq!(basis.len() as u64, hom_dimension(0, d, n));
            }
        }
        let prod = monomial_basis(&[1, 2], &LineObject(vec![0, 0]), &LineObject(vec![1, 1]));
        assert_eq!(prod.len(), 6);
    }

    #[test]
    fn exceptional_examples() {
        let p2 = ProductPolytope::projective_space(2).unwrap();
        assert!(exceptional_check(&p2, &beilinson_collection(0, 2)).pass);
        let long: Vec<_> = (0..=3).map(LineObject::single).collect();
        let report = exceptional_check(&p2, &long);
        assert!(!report.pass);
        assert!(
            report.failures.iter().any(|f| f.contains("H^2 rank 1")),
            "{:?}",
            report
        );

        let p1p1 = ProductPolytope::new(&[1, 1]).unwrap();
        let lex = lexicographic_collection(&[1, 1]);
        assert_eq!(lex.len(), 4);
        assert!(exceptional_check(&p1p1, &lex).pass);
    }

    #[test]
    fn constants_make_product_coefficients_at_most_one() {
        for d1 in 1..=3i64 {
            for d2 in 1..=3i64 {
                for u in monomial_basis(&[2], &LineObject::single(0), &LineObject::single(d1)) {
                    for v in
                        monomial_basis(&[2], &LineObject::single(d1), &LineObject::single(d1 + d2))
                    {
                        let (coef, _) = multiply_bases(&u, &v).unwrap();
                        assert!(coef <= PosExact::one());
                    }
                }
            }
        }
    }
}
