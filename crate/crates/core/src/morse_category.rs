//! The weighted Morse homotopy category on a product of simplices.
//!
//! Hom spaces are tensor products of the per-factor generator lists. The
//! composition `m_2` is realized by a two-input gradient tree: in every
//! factor with `a < b < c` the two input edges are straight segments from
//! `v_ab` and `v_bc` meeting at `v_ac`, the output edge is constant, and the
//! weight is `e^{−A(γ)} = |e_{ab;I}(v_ac)| · |e_{bc;K}(v_ac)|`. Factors where
//! two labels agree contribute a constant tree and no area.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::One;
use thiserror::Error;

use crate::exact_weight::{ExactLog, PosExact};
use crate::lagrangian::{
    hom_indices, FactorGenerator, FactorGeometry, LagrangianError, LineObject, Magnitude,
    MultiIndex, PairPotential,
};
use crate::polytope::{Constraint, ProductPolytope, RationalPoint, SimplexFactor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CategoryError {
    #[error("object {object} has {got} labels, the space has {expected} factors")]
    LabelMismatch {
        object: LineObject,
        expected: usize,
        got: usize,
    },
    #[error("cannot compose: target {left} differs from source {right}")]
    NotComposable { left: LineObject, right: LineObject },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("higher products need at least 3 arguments, got {0}")]
    ArityTooSmall(usize),
    #[error("case classification needs a two-factor space, got {0} factors")]
    NotTwoFactors(usize),
    #[error("degenerate gradient tree: {0}")]
    DegenerateTree(String),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
}

/// Basis element of `Mo(P)(L, L')`: one factor generator per simplex factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomGenerator {
    source: LineObject,
    target: LineObject,
    factors: Vec<FactorGenerator>,
}

impl HomGenerator {
    pub fn new(source: LineObject, target: LineObject, factors: Vec<FactorGenerator>) -> Self {
        debug_assert_eq!(source.labels().len(), factors.len());
        debug_assert_eq!(target.labels().len(), factors.len());
        Self {
            source,
            target,
            factors,
        }
    }

    /// The unit `P` of `Mo(P)(L, L)`.
    pub fn identity(object: &LineObject, dims: &[usize]) -> Self {
        let factors = dims
            .iter()
            .map(|&n| FactorGenerator {
                index: MultiIndex::zero(n),
                geometry: FactorGeometry::WholeFactor,
                degree: 0,
            })
            .collect();
        Self::new(object.clone(), object.clone(), factors)
    }

    pub fn source(&self) -> &LineObject {
        &self.source
    }

    pub fn target(&self) -> &LineObject {
        &self.target
    }

    pub fn factors(&self) -> &[FactorGenerator] {
        &self.factors
    }

    pub fn index(&self) -> MultiIndex {
        MultiIndex(
            self.factors
                .iter()
                .flat_map(|f| f.index.0.iter().copied())
                .collect(),
        )
    }

    pub fn degree(&self) -> usize {
        self.factors.iter().map(|f| f.degree).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
    }

    /// Per-coordinate strings: `"p/q"` for point factors, `"*"` for
    /// coordinates of a whole factor.
    pub fn point_strings(&self) -> Vec<String> {
        self.factors
            .iter()
            .flat_map(|f| match &f.geometry {
                FactorGeometry::Point(p) => p.to_strings(),
                FactorGeometry::WholeFactor => vec!["*".to_string(); f.index.len()],
            })
            .collect()
    }

    /// Active boundary constraints of the point factors, e.g. `"f2:x1=0"`.
    pub fn boundary_faces(&self) -> Vec<String> {
        self.factors
            .iter()
            .enumerate()
            .flat_map(|(k, f)| match &f.geometry {
                FactorGeometry::Point(p) => factor_constraints(p)
                    .into_iter()
                    .map(|c| format!("f{}:{}", k + 1, c))
                    .collect(),
                FactorGeometry::WholeFactor => Vec::new(),
            })
            .collect()
    }

    /// Whether the generator's locus lies in `∂P`.
    pub fn lies_on_boundary(&self) -> bool {
        self.factors.iter().any(|f| match &f.geometry {
            FactorGeometry::Point(p) => !factor_constraints(p).is_empty(),
            FactorGeometry::WholeFactor => false,
        })
    }
}

impl fmt::Display for HomGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V[{} -> {}; I={}]",
            self.source,
            self.target,
            self.index()
        )
    }
}

fn factor_constraints(p: &RationalPoint) -> Vec<Constraint> {
    SimplexFactor::new(p.dim())
        .and_then(|s| s.active_constraints(p.coords()))
        .map(|s| s.into_iter().collect())
        .unwrap_or_default()
}

fn check_labels(polytope: &ProductPolytope, object: &LineObject) -> Result<(), CategoryError> {
    if object.labels().len() != polytope.num_factors() {
        return Err(CategoryError::LabelMismatch {
            object: object.clone(),
            expected: polytope.num_factors(),
            got: object.labels().len(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomSpace {
    pub source: LineObject,
    pub target: LineObject,
    pub generators: Vec<HomGenerator>,
}

impl HomSpace {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn by_degree(&self) -> BTreeMap<usize, Vec<&HomGenerator>> {
        let mut out: BTreeMap<usize, Vec<&HomGenerator>> = BTreeMap::new();
        for g in &self.generators {
            out.entry(g.degree()).or_default().push(g);
        }
        out
    }

    /// Decomposition into `Z^n`-graded sectors.
    pub fn sectors(&self) -> BTreeMap<MultiIndex, Vec<&HomGenerator>> {
        let mut out: BTreeMap<MultiIndex, Vec<&HomGenerator>> = BTreeMap::new();
        for g in &self.generators {
            out.entry(g.index()).or_default().push(g);
        }
        out
    }

    /// `(degree, rank)` pairs with nonzero rank.
    pub fn ranks(&self) -> Vec<(usize, u64)> {
        self.by_degree()
            .into_iter()
            .map(|(d, gs)| (d, gs.len() as u64))
            .collect()
    }

    pub fn find(&self, index: &MultiIndex) -> Option<&HomGenerator> {
        self.generators.iter().find(|g| &g.index() == index)
    }
}

pub fn hom_space(
    polytope: &ProductPolytope,
    source: &LineObject,
    target: &LineObject,
) -> Result<HomSpace, CategoryError> {
    check_labels(polytope, source)?;
    check_labels(polytope, target)?;
    let mut combos: Vec<Vec<FactorGenerator>> = vec![Vec::new()];
    for ((&a, &b), &n) in source
        .labels()
        .iter()
        .zip(target.labels())
        .zip(&polytope.dims())
    {
        let factor = hom_indices(a, b, n);
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                factor.iter().map(move |g| {
                    let mut p = prefix.clone();
                    p.push(g.clone());
                    p
                })
            })
            .collect();
    }
    let generators = combos
        .into_iter()
        .map(|f| HomGenerator::new(source.clone(), target.clone(), f))
        .collect();
    Ok(HomSpace {
        source: source.clone(),
        target: target.clone(),
        generators,
    })
}

pub(crate) fn hom_space_ranks(
    polytope: &ProductPolytope,
    source: &LineObject,
    target: &LineObject,
) -> Vec<(usize, u64)> {
    hom_space(polytope, source, target)
        .map(|h| h.ranks())
        .unwrap_or_default()
}

/// The image of a two-input tree in one simplex factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorTree {
    /// `a = b = c`: the whole factor, constant tree.
    Whole,
    /// Exactly one of `a = b`, `b = c`: a constant map to the given point.
    Constant(RationalPoint),
    /// `a < b < c`: two straight segments meeting at `v_ac`, with
    /// `v_ac = λ v_ab + (1−λ) v_bc`, `λ = (b−a)/(c−a)`.
    Segments {
        v_ab: RationalPoint,
        v_bc: RationalPoint,
        v_ac: RationalPoint,
        lambda: Rational64,
    },
}

impl FactorTree {
    /// Whether the image lies in the boundary of the factor simplex. A
    /// segment does exactly when some facet is active at both endpoints.
    pub fn lies_on_boundary(&self) -> bool {
        match self {
            FactorTree::Whole => false,
            FactorTree::Constant(p) => !factor_constraints(p).is_empty(),
            FactorTree::Segments { v_ab, v_bc, .. } => {
                let at_b = factor_constraints(v_bc);
                factor_constraints(v_ab).iter().any(|c| at_b.contains(c))
            }
        }
    }
}

/// Two-input gradient tree of a composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradientTree2 {
    pub left: HomGenerator,
    pub right: HomGenerator,
    pub output: HomGenerator,
    pub factors: Vec<FactorTree>,
    /// Per-factor areas; the total is their sum.
    pub factor_areas: Vec<ExactLog>,
    pub area: ExactLog,
}

impl GradientTree2 {
    pub fn lies_on_boundary(&self) -> bool {
        self.factors.iter().any(FactorTree::lies_on_boundary)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledGenerator {
    pub weight: PosExact,
    pub generator: HomGenerator,
}

fn check_composable(left: &HomGenerator, right: &HomGenerator) -> Result<(), CategoryError> {
    if left.target != right.source || left.factors.len() != right.factors.len() {
        return Err(CategoryError::NotComposable {
            left: left.target.clone(),
            right: right.source.clone(),
        });
    }
    Ok(())
}

fn factor_magnitude(
    a: i64,
    b: i64,
    generator: &FactorGenerator,
    x: &RationalPoint,
) -> Result<PosExact, CategoryError> {
    if a == b {
        return Ok(PosExact::one());
    }
    match PairPotential::new(a, b, generator.index.clone())?.magnitude_at(x)? {
        Magnitude::Positive(m) => Ok(m),
        Magnitude::Zero => Err(CategoryError::DegenerateTree(format!(
            "pair ({},{}) vanishes at the meeting point {}",
            a, b, x
        ))),
    }
}

/// Builds the tree for `m_2(left, right)` in the degree-0 regime
/// (`a ≤ b ≤ c` in every factor).
pub fn gradient_tree(
    left: &HomGenerator,
    right: &HomGenerator,
) -> Result<GradientTree2, CategoryError> {
    check_composable(left, right)?;
    for g in [left, right] {
        if g.degree() != 0 {
            return Err(CategoryError::Unsupported(format!(
                "{} has degree {}; only degree-0 compositions are computed",
                g,
                g.degree()
            )));
        }
    }
    let mut factors = Vec::with_capacity(left.factors.len());
    let mut factor_areas = Vec::with_capacity(left.factors.len());
    let mut out_factors = Vec::with_capacity(left.factors.len());
    for k in 0..left.factors.len() {
        let (a, b, c) = (
            left.source.labels()[k],
            left.target.labels()[k],
            right.target.labels()[k],
        );
        let (gl, gr) = (&left.factors[k], &right.factors[k]);
        let index = &gl.index + &gr.index;
        let (tree, meeting) = match (&gl.geometry, &gr.geometry) {
            (FactorGeometry::WholeFactor, FactorGeometry::WholeFactor) => (FactorTree::Whole, None),
            (FactorGeometry::WholeFactor, FactorGeometry::Point(p))
            | (FactorGeometry::Point(p), FactorGeometry::WholeFactor) => {
                (FactorTree::Constant(p.clone()), Some(p.clone()))
            }
            (FactorGeometry::Point(p), FactorGeometry::Point(q)) => {
                let lambda = Rational64::new(b - a, c - a);
                let v_ac = RationalPoint(
                    p.coords()
                        .iter()
                        .zip(q.coords())
                        .map(|(x, y)| lambda * x + (Rational64::one() - lambda) * y)
                        .collect(),
                );
                (
                    FactorTree::Segments {
                        v_ab: p.clone(),
                        v_bc: q.clone(),
                        v_ac: v_ac.clone(),
                        lambda,
                    },
                    Some(v_ac),
                )
            }
        };
        let area = match &meeting {
            None => ExactLog::zero(),
            Some(x) => {
                let w = &factor_magnitude(a, b, gl, x)? * &factor_magnitude(b, c, gr, x)?;
                -w.ln()
            }
        };
        out_factors.push(FactorGenerator {
            index,
            geometry: match meeting {
                Some(x) => FactorGeometry::Point(x),
                None => FactorGeometry::WholeFactor,
            },
            degree: 0,
        });
        factors.push(tree);
        factor_areas.push(area);
    }
    let area = factor_areas.iter().cloned().sum();
    Ok(GradientTree2 {
        output: HomGenerator::new(left.source.clone(), right.target.clone(), out_factors),
        left: left.clone(),
        right: right.clone(),
        factors,
        factor_areas,
        area,
    })
}

/// `m_2(left, right) = e^{−A(γ)} · V_ac` with sign `+1`.
pub fn compose(
    left: &HomGenerator,
    right: &HomGenerator,
) -> Result<ScaledGenerator, CategoryError> {
    let tree = gradient_tree(left, right)?;
    Ok(ScaledGenerator {
        weight: (-tree.area).exp(),
        generator: tree.output,
    })
}

/// Composes scaled generators; weights multiply.
pub fn compose_scaled(
    left: &ScaledGenerator,
    right: &ScaledGenerator,
) -> Result<ScaledGenerator, CategoryError> {
    let m = compose(&left.generator, &right.generator)?;
    Ok(ScaledGenerator {
        weight: &(&left.weight * &right.weight) * &m.weight,
        generator: m.generator,
    })
}

/// Record of why a higher product vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HigherProductZero {
    pub arity: usize,
    pub input_degree: usize,
    pub target_degree: i64,
    pub reason: String,
}

/// `m_l` for `l ≥ 3`: the output would need degree `Σ|V_i| + 2 − l`, which is
/// negative when every input has degree 0, so no generator can appear.
pub fn higher_product(args: &[HomGenerator]) -> Result<HigherProductZero, CategoryError> {
    if args.len() < 3 {
        return Err(CategoryError::ArityTooSmall(args.len()));
    }
    for w in args.windows(2) {
        check_composable(&w[0], &w[1])?;
    }
    let input_degree: usize = args.iter().map(HomGenerator::degree).sum();
    let target_degree = input_degree as i64 + 2 - args.len() as i64;
    if target_degree >= 0 {
        return Err(CategoryError::Unsupported(format!(
            "higher product with target degree {} needs tree enumeration",
            target_degree
        )));
    }
    Ok(HigherProductZero {
        arity: args.len(),
        input_degree,
        target_degree,
        reason: format!("target degree {}", target_degree),
    })
}

/// Case labels for products on a two-factor space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProductCase {
    Generic,
    OneEquality,
    IdentityPair,
    Crossed,
    FactorWise,
    ThreeEqualities,
    AllEqual,
}

impl ProductCase {
    pub fn label(&self) -> &'static str {
        match self {
            ProductCase::Generic => "(0)",
            ProductCase::OneEquality => "(1)",
            ProductCase::IdentityPair => "(2)",
            ProductCase::Crossed => "(2')",
            ProductCase::FactorWise => "(2'')",
            ProductCase::ThreeEqualities => "(3)",
            ProductCase::AllEqual => "(4)",
        }
    }
}

impl fmt::Display for ProductCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Sorts a composable triple of objects on a two-factor space into one of
/// the 4×4 product types, by which of `a_k = b_k`, `b_k = c_k` hold.
pub fn classify_product_case(
    a: &LineObject,
    b: &LineObject,
    c: &LineObject,
) -> Result<ProductCase, CategoryError> {
    let n = a.labels().len();
    if n != 2 || b.labels().len() != 2 || c.labels().len() != 2 {
        return Err(CategoryError::NotTwoFactors(n));
    }
    for k in 0..2 {
        let (x, y, z) = (a.labels()[k], b.labels()[k], c.labels()[k]);
        if !(x <= y && y <= z) {
            return Err(CategoryError::Unsupported(format!(
                "labels {},{},{} in factor {} are not non-decreasing",
                x,
                y,
                z,
                k + 1
            )));
        }
    }
    let ab1 = a.labels()[0] == b.labels()[0];
    let bc1 = b.labels()[0] == c.labels()[0];
    let ab2 = a.labels()[1] == b.labels()[1];
    let bc2 = b.labels()[1] == c.labels()[1];
    let count = [ab1, bc1, ab2, bc2].iter().filter(|&&e| e).count();
    Ok(match count {
        0 => ProductCase::Generic,
        1 => ProductCase::OneEquality,
        2 if (ab1 && ab2) || (bc1 && bc2) => ProductCase::IdentityPair,
        2 if (ab1 && bc2) || (bc1 && ab2) => ProductCase::Crossed,
        2 => ProductCase::FactorWise,
        3 => ProductCase::ThreeEqualities,
        _ => ProductCase::AllEqual,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryReport {
    pub pass: bool,
    pub generators_checked: usize,
    pub trees_checked: usize,
    pub witnesses: Vec<String>,
    /// Whether the collection is strongly exceptional; failures outside that
    /// regime are expected.
    pub exceptional: bool,
}

/// Checks that generators between distinct objects and trees among not
/// all-equal objects stay in `∂P`.
pub fn boundary_report(
    polytope: &ProductPolytope,
    collection: &[LineObject],
) -> Result<BoundaryReport, CategoryError> {
    let mut witnesses = Vec::new();
    let mut generators_checked = 0;
    let mut trees_checked = 0;
    for x in collection {
        for y in collection {
            if x == y {
                continue;
            }
            for g in hom_space(polytope, x, y)?.generators {
                generators_checked += 1;
                if !g.lies_on_boundary() {
                    witnesses.push(format!(
                        "generator {} at {:?} is interior",
                        g,
                        g.point_strings()
                    ));
                }
            }
        }
    }
    for x in collection {
        for y in collection {
            let left = hom_space(polytope, x, y)?;
            if left.generators.iter().any(|g| g.degree() != 0) {
                continue;
            }
            for z in collection {
                if x == y && y == z {
                    continue;
                }
                let right = hom_space(polytope, y, z)?;
                if right.generators.iter().any(|g| g.degree() != 0) {
                    continue;
                }
                for u in &left.generators {
                    for v in &right.generators {
                        trees_checked += 1;
                        let tree = gradient_tree(u, v)?;
                        if !tree.lies_on_boundary() {
                            witnesses.push(format!("tree of {} · {} leaves the boundary", u, v));
                        }
                    }
                }
            }
        }
    }
    Ok(BoundaryReport {
        pass: witnesses.is_empty(),
        generators_checked,
        trees_checked,
        witnesses,
        exceptional: crate::dg_model::exceptional_check(polytope, collection).pass,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssociativityReport {
    pub pass: bool,
    pub triples_checked: usize,
    pub failures: Vec<String>,
    /// Largest `|log w_left − log w_right|`; zero when every triple agrees.
    pub max_log_discrepancy: f64,
}

/// Compares both bracketings of `m_2` on every basis triple along a chain
/// `L_0 → L_1 → L_2 → L_3` of non-decreasing labels.
pub fn associativity_check(
    polytope: &ProductPolytope,
    chain: &[LineObject; 4],
) -> Result<AssociativityReport, CategoryError> {
    let homs = [
        hom_space(polytope, &chain[0], &chain[1])?,
        hom_space(polytope, &chain[1], &chain[2])?,
        hom_space(polytope, &chain[2], &chain[3])?,
    ];
    let mut failures = Vec::new();
    let mut triples_checked = 0;
    let mut max_log_discrepancy: f64 = 0.0;
    for u in &homs[0].generators {
        for v in &homs[1].generators {
            let uv = compose(u, v)?;
            for w in &homs[2].generators {
                triples_checked += 1;
                let vw = compose(v, w)?;
                let left = compose_scaled(
                    &uv,
                    &ScaledGenerator {
                        weight: PosExact::one(),
                        generator: w.clone(),
                    },
                )?;
                let right = compose_scaled(
                    &ScaledGenerator {
                        weight: PosExact::one(),
                        generator: u.clone(),
                    },
                    &vw,
                )?;
                if left != right {
                    let gap = (left.weight.ln_f64() - right.weight.ln_f64()).abs();
                    max_log_discrepancy = max_log_discrepancy.max(gap);
                    failures.push(format!(
                        "({} · {}) · {} = {}·{} but {} · ({} · {}) = {}·{}",
                        u,
                        v,
                        w,
                        left.weight,
                        left.generator,
                        u,
                        v,
                        w,
                        right.weight,
                        right.generator
                    ));
                }
            }
        }
    }
    Ok(AssociativityReport {
        pass: failures.is_empty(),
        triples_checked,
        failures,
        max_log_discrepancy,
    })
}
