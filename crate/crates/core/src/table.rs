//! Structure tables: every generator and every degree-0 product on a
//! collection of objects, built either from gradient trees or from the
//! monomial model, in one JSON schema so the two can be diffed.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::dg_model::{monomial_basis, multiply_bases, DgError, NormalizedBasis};
use crate::exact_weight::PosExact;
use crate::lagrangian::LineObject;
use crate::morse_category::{classify_product_case, compose, hom_space, CategoryError};
use crate::polytope::{ProductPolytope, SimplexFactor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Morse,
    Dg,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Morse => "morse",
            Side::Dg => "dg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorRef {
    pub from: LineObject,
    pub to: LineObject,
    pub index: Vec<i64>,
}

impl GeneratorRef {
    fn to_json(&self) -> Value {
        json!({"from": self.from.to_string(), "to": self.to.to_string(), "index": self.index})
    }

    fn label(&self) -> String {
        format!("{}->{}{:?}", self.from, self.to, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GeneratorEntry {
    pub index: Vec<i64>,
    pub point: Vec<String>,
    pub degree: usize,
    pub boundary_faces: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomEntry {
    pub from: LineObject,
    pub to: LineObject,
    pub generators: Vec<GeneratorEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductEntry {
    pub left: GeneratorRef,
    pub right: GeneratorRef,
    pub result: GeneratorRef,
    pub weight: PosExact,
    pub case: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureTable {
    pub space: String,
    pub side: Side,
    pub objects: Vec<LineObject>,
    pub homs: Vec<HomEntry>,
    pub products: Vec<ProductEntry>,
    /// Composable pairs left out because one input has positive degree.
    pub skipped_products: usize,
}

fn case_label(a: &LineObject, b: &LineObject, c: &LineObject) -> Option<String> {
    classify_product_case(a, b, c)
        .ok()
        .map(|k| k.label().to_string())
}

fn dg_point_faces(e: &NormalizedBasis) -> (Vec<String>, Vec<String>) {
    let mut coords = Vec::new();
    let mut faces = Vec::new();
    for (k, f) in e.class.factors().iter().enumerate() {
        match f.max_point() {
            Some(p) => {
                coords.extend(p.to_strings());
                let active = SimplexFactor::new(p.dim())
                    .and_then(|s| s.active_constraints(p.coords()))
                    .unwrap_or_default();
                faces.extend(active.into_iter().map(|c| format!("f{}:{}", k + 1, c)));
            }
            None => coords.extend(std::iter::repeat_n("*".to_string(), f.index.len())),
        }
    }
    (coords, faces)
}

impl StructureTable {
    /// Table computed from gradient trees.
    pub fn morse(
        polytope: &ProductPolytope,
        objects: &[LineObject],
    ) -> Result<Self, CategoryError> {
        let mut homs = Vec::new();
        let mut spaces = BTreeMap::new();
        for x in objects {
            for y in objects {
                let h = hom_space(polytope, x, y)?;
                let mut generators: Vec<GeneratorEntry> = h
                    .generators
                    .iter()
                    .map(|g| GeneratorEntry {
                        index: g.index().0,
                        point: g.point_strings(),
                        degree: g.degree(),
                        boundary_faces: g.boundary_faces(),
                    })
                    .collect();
                generators.sort();
                homs.push(HomEntry {
                    from: x.clone(),
                    to: y.clone(),
                    generators,
                });
                spaces.insert((x.clone(), y.clone()), h);
            }
        }
        let mut products = Vec::new();
        let mut skipped_products = 0;
        for x in objects {
            for y in objects {
                for z in objects {
                    let (left, right) = (
                        &spaces[&(x.clone(), y.clone())],
                        &spaces[&(y.clone(), z.clone())],
                    );
                    for u in &left.generators {
                        for v in &right.generators {
                            if u.degree() != 0 || v.degree() != 0 {
                                skipped_products += 1;
                                continue;
                            }
                            let m = compose(u, v)?;
                            products.push(ProductEntry {
                                left: GeneratorRef {
                                    from: x.clone(),
                                    to: y.clone(),
                                    index: u.index().0,
                                },
                                right: GeneratorRef {
                                    from: y.clone(),
                                    to: z.clone(),
                                    index: v.index().0,
                                },
                                result: GeneratorRef {
                                    from: x.clone(),
                                    to: z.clone(),
                                    index: m.generator.index().0,
                                },
                                weight: m.weight,
                                case: case_label(x, y, z),
                            });
                        }
                    }
                }
            }
        }
        Ok(Self::assemble(
            polytope,
            Side::Morse,
            objects,
            homs,
            products,
            skipped_products,
        ))
    }

    /// Table computed from the normalized monomial basis. Only degree-0
    /// classes have an explicit basis here; positive-degree ranks appear as
    /// empty hom lists, so a table outside the exceptional regime differs
    /// from the Morse side.
    pub fn dg(polytope: &ProductPolytope, objects: &[LineObject]) -> Result<Self, DgError> {
        let dims = polytope.dims();
        let mut homs = Vec::new();
        let mut bases: BTreeMap<(LineObject, LineObject), Vec<NormalizedBasis>> = BTreeMap::new();
        for x in objects {
            for y in objects {
                let basis = monomial_basis(&dims, x, y);
                let mut generators: Vec<GeneratorEntry> = basis
                    .iter()
                    .map(|e| {
                        let (point, boundary_faces) = dg_point_faces(e);
                        GeneratorEntry {
                            index: e.class.index().0,
                            point,
                            degree: 0,
                            boundary_faces,
                        }
                    })
                    .collect();
                generators.sort();
                homs.push(HomEntry {
                    from: x.clone(),
                    to: y.clone(),
                    generators,
                });
                bases.insert((x.clone(), y.clone()), basis);
            }
        }
        let mut products = Vec::new();
        for x in objects {
            for y in objects {
                for z in objects {
                    let (left, right) = (
                        &bases[&(x.clone(), y.clone())],
                        &bases[&(y.clone(), z.clone())],
                    );
                    for u in left {
                        for v in right {
                            let (coef, class) = multiply_bases(u, v)?;
                            products.push(ProductEntry {
                                left: GeneratorRef {
                                    from: x.clone(),
                                    to: y.clone(),
                                    index: u.class.index().0,
                                },
                                right: GeneratorRef {
                                    from: y.clone(),
                                    to: z.clone(),
                                    index: v.class.index().0,
                                },
                                result: GeneratorRef {
                                    from: x.clone(),
                                    to: z.clone(),
                                    index: class.index().0,
                                },
                                weight: coef,
                                case: case_label(x, y, z),
                            });
                        }
                    }
                }
            }
        }
        Ok(Self::assemble(
            polytope,
            Side::Dg,
            objects,
            homs,
            products,
            0,
        ))
    }

    fn assemble(
        polytope: &ProductPolytope,
        side: Side,
        objects: &[LineObject],
        homs: Vec<HomEntry>,
        mut products: Vec<ProductEntry>,
        skipped_products: usize,
    ) -> Self {
        products.sort_by(|p, q| (&p.left, &p.right).cmp(&(&q.left, &q.right)));
        Self {
            space: polytope.descriptor(),
            side,
            objects: objects.to_vec(),
            homs,
            products,
            skipped_products,
        }
    }

    /// Componentwise product of tables on two spaces: objects pair up in
    /// lexicographic order, indices and points concatenate, degrees add and
    /// weights multiply.
    pub fn tensor(&self, other: &StructureTable) -> StructureTable {
        let concat = |x: &LineObject, y: &LineObject| {
            LineObject(x.labels().iter().chain(y.labels()).copied().collect())
        };
        let shift_faces = |faces: &[String], by: usize| -> Vec<String> {
            faces
                .iter()
                .map(|f| {
                    let (k, rest) = f[1..].split_once(':').expect("face label");
                    format!(
                        "f{}:{}",
                        k.parse::<usize>().expect("factor number") + by,
                        rest
                    )
                })
                .collect()
        };
        let left_factors = self.space.split('x').count();
        let mut objects = Vec::new();
        for x in &self.objects {
            for y in &other.objects {
                objects.push(concat(x, y));
            }
        }
        let mut homs = Vec::new();
        for h1 in &self.homs {
            for h2 in &other.homs {
                let mut generators = Vec::new();
                for g1 in &h1.generators {
                    for g2 in &h2.generators {
                        let mut faces = g1.boundary_faces.clone();
                        faces.extend(shift_faces(&g2.boundary_faces, left_factors));
                        generators.push(GeneratorEntry {
                            index: g1.index.iter().chain(&g2.index).copied().collect(),
                            point: g1.point.iter().chain(&g2.point).cloned().collect(),
                            degree: g1.degree + g2.degree,
                            boundary_faces: faces,
                        });
                    }
                }
                generators.sort();
                homs.push(HomEntry {
                    from: concat(&h1.from, &h2.from),
                    to: concat(&h1.to, &h2.to),
                    generators,
                });
            }
        }
        let join = |a: &GeneratorRef, b: &GeneratorRef| GeneratorRef {
            from: concat(&a.from, &b.from),
            to: concat(&a.to, &b.to),
            index: a.index.iter().chain(&b.index).copied().collect(),
        };
        let mut products = Vec::new();
        for p1 in &self.products {
            for p2 in &other.products {
                let left = join(&p1.left, &p2.left);
                let right = join(&p1.right, &p2.right);
                let result = join(&p1.result, &p2.result);
                let case = case_label(&left.from, &left.to, &right.to);
                products.push(ProductEntry {
                    left,
                    right,
                    result,
                    weight: &p1.weight * &p2.weight,
                    case,
                });
            }
        }
        products.sort_by(|p, q| (&p.left, &p.right).cmp(&(&q.left, &q.right)));
        StructureTable {
            space: format!("{}x{}", self.space, other.space),
            side: self.side,
            objects,
            homs,
            products,
            skipped_products: self.skipped_products + other.skipped_products,
        }
    }

    pub fn to_json(&self, precision_bits: u32) -> Value {
        let homs: Vec<Value> = self
            .homs
            .iter()
            .map(|h| {
                let gens: Vec<Value> = h
                    .generators
                    .iter()
                    .map(|g| {
                        json!({
                            "index": g.index,
                            "point": g.point,
                            "degree": g.degree,
                            "boundary_faces": g.boundary_faces,
                        })
                    })
                    .collect();
                json!({"from": h.from.to_string(), "to": h.to.to_string(), "generators": gens})
            })
            .collect();
        let products: Vec<Value> = self
            .products
            .iter()
            .map(|p| {
                json!({
                    "left": p.left.to_json(),
                    "right": p.right.to_json(),
                    "result": p.result.to_json(),
                    "weight": p.weight.to_json(precision_bits),
                    "case": p.case,
                })
            })
            .collect();
        json!({
            "space": self.space,
            "side": self.side.as_str(),
            "objects": self.objects.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
            "homs": homs,
            "products": products,
            "skipped_products": self.skipped_products,
        })
    }

    /// One row per product: `left,right,result,weight,approx,case`.
    pub fn products_csv(&self, precision_bits: u32) -> String {
        let mut out = String::from("left,right,result,weight,approx,case\n");
        for p in &self.products {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&p.left.label()),
                csv_field(&p.right.label()),
                csv_field(&p.result.label()),
                csv_field(&p.weight.to_string()),
                p.weight.approx_string(precision_bits),
                csv_field(p.case.as_deref().unwrap_or("")),
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Differences between two tables, ignoring which side built them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableDiff {
    pub entries: Vec<String>,
}

impl TableDiff {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({"empty": self.is_empty(), "entries": self.entries})
    }
}

pub fn diff_tables(a: &StructureTable, b: &StructureTable) -> TableDiff {
    let mut entries = Vec::new();
    if a.space != b.space {
        entries.push(format!("space: {} vs {}", a.space, b.space));
    }
    let objs = |t: &StructureTable| t.objects.iter().cloned().collect::<BTreeSet<_>>();
    if objs(a) != objs(b) {
        entries.push("object lists differ".to_string());
    }
    let homs = |t: &StructureTable| {
        t.homs
            .iter()
            .map(|h| {
                (
                    (h.from.clone(), h.to.clone()),
                    h.generators.iter().cloned().collect::<BTreeSet<_>>(),
                )
            })
            .collect::<BTreeMap<_, _>>()
    };
    let (ha, hb) = (homs(a), homs(b));
    for key in ha.keys().chain(hb.keys()).collect::<BTreeSet<_>>() {
        let (ga, gb) = (ha.get(key), hb.get(key));
        if ga != gb {
            let count = |g: Option<&BTreeSet<GeneratorEntry>>| g.map_or(0, |s| s.len());
            entries.push(format!(
                "hom {} -> {}: {} {} generators vs {} {}",
                key.0,
                key.1,
                count(ga),
                a.side.as_str(),
                count(gb),
                b.side.as_str()
            ));
        }
    }
    fn prods(t: &StructureTable) -> BTreeMap<(GeneratorRef, GeneratorRef), &ProductEntry> {
        t.products
            .iter()
            .map(|p| ((p.left.clone(), p.right.clone()), p))
            .collect()
    }
    let (pa, pb) = (prods(a), prods(b));
    for key in pa.keys().chain(pb.keys()).collect::<BTreeSet<_>>() {
        match (pa.get(key), pb.get(key)) {
            (Some(p), Some(q)) => {
                if p.result != q.result {
                    entries.push(format!(
                        "product {} * {}: result {} vs {}",
                        key.0.label(),
                        key.1.label(),
                        p.result.label(),
                        q.result.label()
                    ));
                }
                if p.weight != q.weight {
                    entries.push(format!(
                        "product {} * {}: weight {} vs {}",
                        key.0.label(),
                        key.1.label(),
                        p.weight,
                        q.weight
                    ));
                }
                if p.case != q.case {
                    entries.push(format!(
                        "product {} * {}: case {:?} vs {:?}",
                        key.0.label(),
                        key.1.label(),
                        p.case,
                        q.case
                    ));
                }
            }
            (p, _) => entries.push(format!(
                "product {} * {}: only on the {} side",
                key.0.label(),
                key.1.label(),
                if p.is_some() {
                    a.side.as_str()
                } else {
                    b.side.as_str()
                }
            )),
        }
    }
    TableDiff { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg_model::{beilinson_collection, lexicographic_collection};

    fn tables(desc: &str, objects: &[LineObject]) -> (StructureTable, StructureTable) {
        let p: ProductPolytope = desc.parse().unwrap();
        (
            StructureTable::morse(&p, objects).unwrap(),
            StructureTable::dg(&p, objects).unwrap(),
        )
    }

    #[test]
    fn projective_tables_agree() {
        for n in 1..=3 {
            let (m, d) = tables(&format!("P{}", n), &beilinson_collection(0, n));
            let diff = diff_tables(&m, &d);
            assert!(diff.is_empty(), "{:?}", diff.entries);
            assert!(!m.products.is_empty());
        }
    }

    #[test]
    fn product_tables_agree_and_carry_cases() {
        let (m, d) = tables("P1xP1", &lexicographic_collection(&[1, 1]));
        assert!(diff_tables(&m, &d).is_empty());
        assert!(m.products.iter().all(|p| p.case.is_some()));
        let labels: BTreeSet<_> = m.products.iter().filter_map(|p| p.case.clone()).collect();
        // a<b<c needs three labels in one factor, so (0), (1) and (2'') are absent
        let expected: BTreeSet<String> = ["(2)", "(2')", "(3)", "(4)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(labels, expected);
    }

    #[test]
    fn long_collection_differs() {
        let (m, d) = tables("P1", &beilinson_collection(0, 2));
        let diff = diff_tables(&m, &d);
        assert!(!diff.is_empty());
        assert!(
            diff.entries.iter().any(|e| e.contains("L(2) -> L(0)")),
            "{:?}",
            diff.entries
        );
    }

    #[test]
    fn tensor_law() {
        let p1: ProductPolytope = "P1".parse().unwrap();
        let p2: ProductPolytope = "P2".parse().unwrap();
        let p12: ProductPolytope = "P1xP2".parse().unwrap();
        let a = StructureTable::morse(&p1, &beilinson_collection(0, 1)).unwrap();
        let b = StructureTable::morse(&p2, &beilinson_collection(0, 2)).unwrap();
        let direct = StructureTable::morse(&p12, &lexicographic_collection(&[1, 2])).unwrap();
        let product = a.tensor(&b);
        let diff = diff_tables(&direct, &product);
        assert!(diff.is_empty(), "{:?}", diff.entries);
        assert_eq!(direct.products.len(), product.products.len());
    }

    #[test]
    fn json_is_deterministic_and_sorted() {
        let (m, _) = tables("P2", &beilinson_collection(0, 2));
        let s1 = serde_json::to_string(&m.to_json(64)).unwrap();
        let s2 = serde_json::to_string(&m.to_json(64)).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.find("\"homs\"").unwrap() < s1.find("\"objects\"").unwrap());
        let v = m.to_json(64);
        let w = &v["products"][0]["weight"];
        assert!(w["factors"].is_object() && w["approx"].is_string());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let (m, _) = tables("P1", &beilinson_collection(0, 1));
        let csv = m.products_csv(64);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "left,right,result,weight,approx,case");
        assert_eq!(lines.len(), 1 + m.products.len());
    }
}
