//! Verification suites: exact structural checks on the standard exceptional
//! collections and seeded numeric checks of the underlying geometry.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dg_model::{
    beilinson_collection, binomial, exceptional_check, lexicographic_collection, serre_rank,
};
use crate::exact_weight::PosExact;
use crate::flow_verifier::{
    grid_max_check, integrate_pair_flow, legendre_check, lg_report, verify_tree_numeric,
    CheckReport, LgConvention,
};
use crate::lagrangian::{bounded_compositions, LineObject, MultiIndex};
use crate::morse_category::{
    associativity_check, boundary_report, compose, gradient_tree, higher_product, hom_space,
    FactorTree, HomGenerator,
};
use crate::polytope::{segment_contains, ProductPolytope};
use crate::table::{diff_tables, StructureTable};

pub const SEED: u64 = 0x6d6f7273;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Exact,
    Numeric,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub n_max: usize,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

/// Tallies failures of an exact check.
struct Tally {
    name: &'static str,
    params: Value,
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, params: Value) -> Self {
        Self {
            name,
            params,
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> CheckReport {
        let mut residuals = BTreeMap::new();
        residuals.insert("failures".to_string(), self.failures.len() as f64);
        let mut info = BTreeMap::new();
        info.insert("checked".to_string(), json!(self.checked));
        if !self.failures.is_empty() {
            info.insert(
                "first_failures".to_string(),
                json!(self.failures.iter().take(5).collect::<Vec<_>>()),
            );
        }
        CheckReport {
            check: self.name.to_string(),
            params: self.params,
            residuals,
            pass: self.failures.is_empty(),
            info,
        }
    }
}

/// The strongly exceptional collections used throughout: `(O(0),…,O(n))` on
/// `P_n` and the lexicographic collections on `P1xP1` and `P1xP2`, limited
/// to factor dimensions at most `n_max`.
pub fn standard_collections(n_max: usize) -> Vec<(ProductPolytope, Vec<LineObject>)> {
    let mut out = Vec::new();
    for n in 1..=n_max.min(3) {
        out.push((
            ProductPolytope::projective_space(n).expect("n >= 1"),
            beilinson_collection(0, n),
        ));
    }
    for dims in [[1, 1], [1, 2]] {
        if dims[1] <= n_max {
            out.push((
                ProductPolytope::new(&dims).expect("positive dims"),
                lexicographic_collection(&dims),
            ));
        }
    }
    out
}

fn collection_names(collections: &[(ProductPolytope, Vec<LineObject>)]) -> Value {
    json!(collections
        .iter()
        .map(|(p, _)| p.descriptor())
        .collect::<Vec<_>>())
}

/// Generator counts against `C(b−a+n, n)` and `C(a−b−1, n)`.
pub fn hom_rank_check(n_max: usize) -> CheckReport {
    let mut t = Tally::new("hom_ranks", json!({"n_max": n_max}));
    for n in 1..=n_max {
        let p = ProductPolytope::projective_space(n).expect("n >= 1");
        for a in 0..=(n as i64 + 2) {
            for b in 0..=(n as i64 + 2) {
                let h = hom_space(&p, &LineObject::single(a), &LineObject::single(b))
                    .expect("labels match");
                let by_degree = h.by_degree();
                let count = |d: usize| by_degree.get(&d).map_or(0, |v| v.len()) as u64;
                if a <= b {
                    let expected = binomial((b - a) as u64 + n as u64, n as u64);
                    t.expect(h.rank() as u64 == expected && count(0) == expected, || {
                        format!(
                            "P{} {}->{}: {} generators, expected {}",
                            n,
                            a,
                            b,
                            h.rank(),
                            expected
                        )
                    });
                } else if a - b <= n as i64 {
                    t.expect(h.rank() == 0, || {
                        format!("P{} {}->{}: expected none", n, a, b)
                    });
                } else {
                    let expected = binomial((a - b - 1) as u64, n as u64);
                    t.expect(count(n) == expected && h.rank() as u64 == expected, || {
                        format!(
                            "P{} {}->{}: {} in degree {}, expected {}",
                            n,
                            a,
                            b,
                            count(n),
                            n,
                            expected
                        )
                    });
                    t.expect(serre_rank(a, b, n) == expected, || {
                        format!("serre_rank({},{},{})", a, b, n)
                    });
                }
            }
        }
    }
    t.finish()
}

/// Morse and monomial structure tables agree exactly on each collection.
pub fn structure_equivalence_check(
    collections: &[(ProductPolytope, Vec<LineObject>)],
) -> CheckReport {
    let mut t = Tally::new(
        "structure_equivalence",
        json!({"collections": collection_names(collections)}),
    );
    for (p, objects) in collections {
        let morse = StructureTable::morse(p, objects);
        let dg = StructureTable::dg(p, objects);
        match (morse, dg) {
            (Ok(m), Ok(d)) => {
                let diff = diff_tables(&m, &d);
                t.expect(diff.is_empty(), || {
                    format!("{}: {}", p, diff.entries.join("; "))
                });
                t.expect(!m.products.is_empty(), || format!("{}: no products", p));
            }
            (m, d) => t.expect(false, || format!("{}: {:?} / {:?}", p, m.err(), d.err())),
        }
    }
    t.finish()
}

fn find_generator(
    p: &ProductPolytope,
    a: &[i64],
    b: &[i64],
    index: &[i64],
) -> Option<HomGenerator> {
    hom_space(p, &LineObject(a.to_vec()), &LineObject(b.to_vec()))
        .ok()?
        .find(&MultiIndex(index.to_vec()))
        .cloned()
}

/// Three hand-computed compositions.
pub fn worked_constants_check() -> CheckReport {
    let mut t = Tally::new("worked_constants", json!({}));
    let half = PosExact::from_rational(Rational64::new(1, 2)).expect("positive");
    let four_over_root27 = PosExact::from_factors([
        (2, Rational64::from_integer(2)),
        (3, Rational64::new(-3, 2)),
    ])
    .expect("primes");
    let cases: [(usize, [i64; 3], [&[i64]; 3], PosExact); 3] = [
        (1, [0, 1, 2], [&[0], &[1], &[1]], half.clone()),
        (2, [0, 1, 2], [&[1, 0], &[0, 1], &[1, 1]], half),
        (1, [0, 2, 3], [&[1], &[1], &[2]], four_over_root27),
    ];
    for (n, [a, b, c], [i, k, out], weight) in cases {
        let p = ProductPolytope::projective_space(n).expect("n >= 1");
        let result = find_generator(&p, &[a], &[b], i)
            .zip(find_generator(&p, &[b], &[c], k))
            .and_then(|(u, v)| compose(&u, &v).ok());
        let expected = find_generator(&p, &[a], &[c], out);
        t.expect(
            result
                .as_ref()
                .is_some_and(|m| m.weight == weight && Some(&m.generator) == expected.as_ref()),
            || {
                format!(
                    "P{} {}->{}->{}: got {:?}",
                    n,
                    a,
                    b,
                    c,
                    result.map(|m| m.weight.to_string())
                )
            },
        );
    }
    t.finish()
}

/// Both bracketings agree on every non-decreasing chain of four labels in
/// `{0..4}` on `P_n`, `n ≤ min(n_max, 2)`.
pub fn associativity_suite(n_max: usize) -> CheckReport {
    let mut t = Tally::new(
        "associativity",
        json!({"n_max": n_max.min(2), "labels": "0..4"}),
    );
    let mut triples = 0;
    for n in 1..=n_max.min(2) {
        let p = ProductPolytope::projective_space(n).expect("n >= 1");
        for l0 in 0..=4 {
            for l1 in l0..=4 {
                for l2 in l1..=4 {
                    for l3 in l2..=4 {
                        let chain = [l0, l1, l2, l3].map(LineObject::single);
                        match associativity_check(&p, &chain) {
                            Ok(r) => {
                                triples += r.triples_checked;
                                t.expect(r.pass, || {
                                    format!(
                                        "P{} {:?}: {:?}",
                                        n,
                                        [l0, l1, l2, l3],
                                        r.failures.first()
                                    )
                                });
                            }
                            Err(e) => {
                                t.expect(false, || format!("P{} {:?}: {}", n, [l0, l1, l2, l3], e))
                            }
                        }
                    }
                }
            }
        }
    }
    let mut r = t.finish();
    r.info.insert("triples".to_string(), json!(triples));
    r
}

/// Every composable pair of degree-0 generators on a collection.
fn composable_pairs(
    p: &ProductPolytope,
    objects: &[LineObject],
) -> Vec<(HomGenerator, HomGenerator)> {
    let mut out = Vec::new();
    for x in objects {
        for y in objects {
            let left = hom_space(p, x, y).expect("labels match");
            for z in objects {
                let right = hom_space(p, y, z).expect("labels match");
                for u in left.generators.iter().filter(|g| g.degree() == 0) {
                    for v in right.generators.iter().filter(|g| g.degree() == 0) {
                        out.push((u.clone(), v.clone()));
                    }
                }
            }
        }
    }
    out
}

pub fn grading_check(collections: &[(ProductPolytope, Vec<LineObject>)]) -> CheckReport {
    let mut t = Tally::new(
        "grading",
        json!({"collections": collection_names(collections)}),
    );
    for (p, objects) in collections {
        for (u, v) in composable_pairs(p, objects) {
            match compose(&u, &v) {
                Ok(m) => t.expect(
                    m.generator.index() == &u.index() + &v.index()
                        && m.generator.degree() == u.degree() + v.degree(),
                    || format!("{} * {} -> {}", u, v, m.generator),
                ),
                Err(e) => t.expect(false, || format!("{} * {}: {}", u, v, e)),
            }
        }
    }
    t.finish()
}

pub fn boundary_check(collections: &[(ProductPolytope, Vec<LineObject>)]) -> CheckReport {
    let mut t = Tally::new(
        "boundary",
        json!({"collections": collection_names(collections)}),
    );
    for (p, objects) in collections {
        match boundary_report(p, objects) {
            Ok(r) => t.expect(r.pass && r.exceptional, || {
                format!("{}: {:?}", p, r.witnesses.first())
            }),
            Err(e) => t.expect(false, || format!("{}: {}", p, e)),
        }
        let ex = exceptional_check(p, objects);
        t.expect(ex.pass, || format!("{}: {:?}", p, ex.failures.first()));
    }
    t.finish()
}

/// `(c−a)v_ac = (b−a)v_ab + (c−b)v_bc` in every factor with `a < b < c`.
pub fn segment_law_check(collections: &[(ProductPolytope, Vec<LineObject>)]) -> CheckReport {
    let mut t = Tally::new(
        "segment_law",
        json!({"collections": collection_names(collections)}),
    );
    for (p, objects) in collections {
        for (u, v) in composable_pairs(p, objects) {
            let Ok(tree) = gradient_tree(&u, &v) else {
                t.expect(false, || format!("{} * {}: no tree", u, v));
                continue;
            };
            for (k, f) in tree.factors.iter().enumerate() {
                if let FactorTree::Segments {
                    v_ab, v_bc, v_ac, ..
                } = f
                {
                    let (a, b, c) = (
                        u.source().labels()[k],
                        u.target().labels()[k],
                        v.target().labels()[k],
                    );
                    let weighted = v_ab
                        .coords()
                        .iter()
                        .zip(v_bc.coords())
                        .zip(v_ac.coords())
                        .all(|((x, y), z)| *z * (c - a) == *x * (b - a) + *y * (c - b));
                    let contained = segment_contains(v_ab, v_bc, v_ac).unwrap_or(false);
                    t.expect(weighted && contained, || {
                        format!("{} * {} factor {}", u, v, k + 1)
                    });
                }
            }
        }
    }
    t.finish()
}

/// `m_3` and `m_4` on every composable chain vanish for degree reasons.
pub fn higher_products_check(collections: &[(ProductPolytope, Vec<LineObject>)]) -> CheckReport {
    let mut t = Tally::new(
        "higher_products",
        json!({"collections": collection_names(collections), "arities": [3, 4]}),
    );
    for (p, objects) in collections {
        let mut homs = BTreeMap::new();
        for x in objects {
            for y in objects {
                let gens: Vec<HomGenerator> = hom_space(p, x, y)
                    .expect("labels match")
                    .generators
                    .into_iter()
                    .filter(|g| g.degree() == 0)
                    .collect();
                if !gens.is_empty() {
                    homs.insert((x.clone(), y.clone()), gens);
                }
            }
        }
        for arity in [3usize, 4] {
            let mut chains: Vec<Vec<HomGenerator>> = objects
                .iter()
                .flat_map(|x| {
                    homs.iter()
                        .filter(move |((s, _), _)| s == x)
                        .flat_map(|(_, gs)| gs.iter().map(|g| vec![g.clone()]))
                })
                .collect();
            for _ in 1..arity {
                chains = chains
                    .into_iter()
                    .flat_map(|chain| {
                        let end = chain.last().expect("nonempty").target().clone();
                        homs.iter()
                            .filter(move |((s, _), _)| *s == end)
                            .flat_map(|(_, gs)| gs.iter())
                            .map(move |g| {
                                let mut c = chain.clone();
                                c.push(g.clone());
                                c
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect();
            }
            for chain in chains {
                match higher_product(&chain) {
                    Ok(z) => t.expect(
                        z.target_degree == 2 - arity as i64 && z.target_degree < 0,
                        || z.reason.clone(),
                    ),
                    Err(e) => t.expect(false, || format!("{}: {}", p, e)),
                }
            }
        }
    }
    t.finish()
}

pub fn exact_checks(n_max: usize) -> Vec<CheckReport> {
    let collections = standard_collections(n_max);
    vec![
        hom_rank_check(n_max),
        structure_equivalence_check(&collections),
        worked_constants_check(),
        associativity_suite(n_max),
        grading_check(&collections),
        boundary_check(&collections),
        segment_law_check(&collections),
        higher_products_check(&collections),
    ]
}

/// Legendre round trips and metric positivity at random points with
/// `|x_i| ≤ 10`.
pub fn legendre_suite(n_max: usize, count: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport {
        check: "legendre_random".to_string(),
        params: json!({"n_max": n_max.min(3), "count": count, "seed": seed, "tol": 1e-10}),
        residuals: BTreeMap::new(),
        pass: true,
        info: BTreeMap::new(),
    };
    let mut worst = BTreeMap::new();
    for _ in 0..count {
        let n = rng.gen_range(1..=n_max.min(3));
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..=10.0)).collect();
        let r = legendre_check(&x, 1e-10);
        report.pass &= r.pass;
        for (k, v) in r.residuals {
            let e = worst.entry(k.clone()).or_insert(v);
            *e = if k == "min_eigenvalue_lower_bound" {
                e.min(v)
            } else {
                e.max(v)
            };
        }
    }
    report.residuals = worst;
    report
}

/// RK4 against the closed-form flow on `t ∈ [0, 5]` with step `1e-3`, for
/// starts that stay inside the polytope.
pub fn rk4_suite(n_max: usize) -> CheckReport {
    let cases: Vec<(i64, i64, Vec<i64>, Vec<f64>)> = vec![
        (0, 1, vec![0], vec![0.01]),
        (0, 2, vec![1], vec![1.001]),
        (0, 3, vec![1], vec![2.0 / 3.0 + 1e-4]),
        (0, 2, vec![1, 0], vec![1.0005, 0.0005]),
        (0, 3, vec![1, 1], vec![2.0 / 3.0 - 1e-4, 2.0 / 3.0 - 1e-4]),
        (0, 3, vec![1, 1, 0], vec![2.0 / 3.0 + 1e-4, 2.0 / 3.0, 1e-4]),
    ];
    let mut report = CheckReport {
        check: "rk4_flow".to_string(),
        params: json!({"t_end": 5.0, "step": 1e-3, "tol": 1e-8}),
        residuals: BTreeMap::new(),
        pass: true,
        info: BTreeMap::new(),
    };
    let mut worst: f64 = 0.0;
    let mut collinearity: f64 = 0.0;
    let mut truncated = 0;
    let mut run = 0;
    for (a, b, i, start) in cases.into_iter().filter(|c| c.2.len() <= n_max) {
        run += 1;
        match integrate_pair_flow(a, b, &MultiIndex(i), &start, 5.0, 5000) {
            Ok(s) => {
                worst = worst.max(s.max_deviation);
                collinearity = collinearity.max(s.collinearity);
                truncated += s.truncated as usize;
            }
            Err(_) => truncated += 1,
        }
    }
    report.residuals.insert("max_deviation".to_string(), worst);
    report
        .residuals
        .insert("collinearity".to_string(), collinearity);
    report
        .residuals
        .insert("truncated".to_string(), truncated as f64);
    report.info.insert("trajectories".to_string(), json!(run));
    report.pass = worst < 1e-8 && collinearity < 1e-8 && truncated == 0;
    report
}

/// Numeric trees for random composable degree-0 pairs on the standard
/// spaces with factor dimension at most `n_max`.
pub fn tree_suite(n_max: usize, count: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spaces: Vec<ProductPolytope> = ["P1", "P2", "P3", "P1xP1", "P1xP2"]
        .iter()
        .map(|d| d.parse::<ProductPolytope>().expect("valid descriptor"))
        .filter(|p| p.dims().iter().all(|&d| d <= n_max.min(3)))
        .collect();
    let mut report = CheckReport {
        check: "tree_numeric".to_string(),
        params: json!({"n_max": n_max.min(3), "count": count, "seed": seed, "tol": 1e-6}),
        residuals: BTreeMap::new(),
        pass: true,
        info: BTreeMap::new(),
    };
    let mut meeting: f64 = 0.0;
    let mut area: f64 = 0.0;
    let mut nontrivial = 0;
    for _ in 0..count {
        let p = spaces.choose(&mut rng).expect("at least P1");
        let mut labels = [Vec::new(), Vec::new(), Vec::new()];
        for _ in 0..p.num_factors() {
            let mut l: Vec<i64> = (0..3).map(|_| rng.gen_range(0..=4)).collect();
            l.sort();
            for (slot, v) in labels.iter_mut().zip(l) {
                slot.push(v);
            }
        }
        let [a, b, c] = labels.map(LineObject);
        let left = hom_space(p, &a, &b).expect("labels match").generators;
        let right = hom_space(p, &b, &c).expect("labels match").generators;
        let (u, v) = (
            left.choose(&mut rng).expect("a<=b"),
            right.choose(&mut rng).expect("b<=c"),
        );
        match verify_tree_numeric(u, v, 1e-6) {
            Ok(r) => {
                report.pass &= r.pass;
                meeting = meeting.max(r.residuals["meeting_error"]);
                area = area.max(r.residuals["area_error"]);
                nontrivial += (r.info["area_numeric"].as_f64().unwrap_or(0.0) != 0.0) as usize;
            }
            Err(_) => report.pass = false,
        }
    }
    report
        .residuals
        .insert("max_meeting_error".to_string(), meeting);
    report
        .residuals
        .insert("max_area_relative_error".to_string(), area);
    report
        .info
        .insert("nonzero_area_trees".to_string(), json!(nontrivial));
    report
}

/// Max-at-`v` on the `1/100` grid for every `(a,b,I)` with `b−a ≤ 3`.
pub fn grid_suite(n_max: usize) -> CheckReport {
    let mut t = Tally::new(
        "grid_max",
        json!({"n_max": n_max.min(2), "spacing": "1/100", "eps": 1e-6}),
    );
    for n in 1..=n_max.min(2) {
        for d in 1..=3i64 {
            for index in bounded_compositions(n, d) {
                let index = MultiIndex(index);
                match grid_max_check(0, d, &index, 100, 1e-12, 1e-6) {
                    Ok(r) => t.expect(r.pass, || format!("(0,{},{}): {:?}", d, index, r.residuals)),
                    Err(e) => t.expect(false, || e.to_string()),
                }
            }
        }
    }
    t.finish()
}

/// Gradient residuals at the Landau–Ginzburg critical points; membership in
/// `L_a` under both coordinate readings is attached as information.
pub fn lg_suite(n_max: usize) -> CheckReport {
    let mut report = CheckReport {
        check: "lg_critical_points".to_string(),
        params: json!({"n_max": n_max.min(3), "tol": 1e-12}),
        residuals: BTreeMap::new(),
        pass: true,
        info: BTreeMap::new(),
    };
    let mut worst: f64 = 0.0;
    for n in 1..=n_max.min(3) {
        for convention in [LgConvention::Literal, LgConvention::NegLogTurns] {
            let r = lg_report(n, convention, 1e-12);
            report.pass &= r.pass;
            worst = worst.max(r.residuals["max_gradient_residual"]);
            let key = format!(
                "membership_n{}_{}",
                n,
                serde_json::to_value(convention)
                    .expect("enum")
                    .as_str()
                    .unwrap_or("")
            );
            report.info.insert(key, r.info["membership"].clone());
        }
    }
    report
        .residuals
        .insert("max_gradient_residual".to_string(), worst);
    report
}

pub fn numeric_checks(n_max: usize) -> Vec<CheckReport> {
    vec![
        legendre_suite(n_max, 100, SEED),
        rk4_suite(n_max),
        tree_suite(n_max, 60, SEED),
        grid_suite(n_max),
        lg_suite(n_max),
    ]
}

pub fn run_suite(suite: Suite, n_max: usize) -> SuiteReport {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Exact | Suite::All) {
        checks.extend(exact_checks(n_max));
    }
    if matches!(suite, Suite::Numeric | Suite::All) {
        checks.extend(numeric_checks(n_max));
    }
    SuiteReport {
        suite,
        n_max,
        pass: checks.iter().all(|c| c.pass),
        checks,
    }
}
