//! SVG pictures of a polytope of total dimension at most two with the
//! generator loci and composition trees of one triple of objects.

use std::fmt::Write;

use thiserror::Error;

use crate::lagrangian::{FactorGeometry, LineObject};
use crate::morse_category::{
    compose, gradient_tree, hom_space, CategoryError, FactorTree, HomGenerator,
};
use crate::polytope::ProductPolytope;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("only spaces of total dimension at most 2 can be drawn, {0} has {1}")]
    TooManyDimensions(String, usize),
    #[error(transparent)]
    Category(#[from] CategoryError),
}

const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
const TREE_SAMPLES: usize = 24;
const TREE_SPAN: f64 = 12.0;

/// Maps polytope coordinates to drawing coordinates (y pointing down).
/// One-dimensional spaces are drawn along the x axis.
fn to_canvas(p: &[f64]) -> (f64, f64) {
    match p {
        [x] => (*x, 2.0),
        [x, y, ..] => (*x, 2.0 - *y),
        [] => (0.0, 2.0),
    }
}

fn fmt(v: f64) -> String {
    let s = format!("{:.4}", v);
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// Points of a generator locus, widening whole factors to their extent.
fn locus(g: &HomGenerator) -> Vec<Vec<f64>> {
    let mut pieces: Vec<Vec<f64>> = vec![Vec::new()];
    for f in g.factors() {
        match &f.geometry {
            FactorGeometry::Point(p) => {
                for piece in &mut pieces {
                    piece.extend(p.to_f64());
                }
            }
            FactorGeometry::WholeFactor => {
                // only one-dimensional whole factors occur when total dim <= 2
                pieces = pieces
                    .into_iter()
                    .flat_map(|piece| {
                        [0.0, 2.0].map(|end| {
                            let mut q = piece.clone();
                            q.push(end);
                            q
                        })
                    })
                    .collect();
            }
        }
    }
    pieces
}

/// Samples an input edge of a tree: per factor, the flow line of rate
/// `(b−a)/2` that ends at the meeting point.
fn edge_curve(tree_factors: &[FactorTree], rates: &[f64], from_left: bool) -> Vec<Vec<f64>> {
    (0..=TREE_SAMPLES)
        .map(|k| {
            let s = -TREE_SPAN * (1.0 - k as f64 / TREE_SAMPLES as f64);
            tree_factors
                .iter()
                .zip(rates)
                .flat_map(|(f, &rate)| match f {
                    FactorTree::Segments {
                        v_ab, v_bc, v_ac, ..
                    } => {
                        let start = if from_left {
                            v_ab.to_f64()
                        } else {
                            v_bc.to_f64()
                        };
                        let end = v_ac.to_f64();
                        let scale = (rate * s).exp();
                        start
                            .iter()
                            .zip(&end)
                            .map(|(p, q)| p + scale * (q - p))
                            .collect::<Vec<_>>()
                    }
                    FactorTree::Constant(p) => p.to_f64(),
                    FactorTree::Whole => vec![1.0],
                })
                .collect()
        })
        .collect()
}

/// Draws the polytope, the loci of `hom(a,b)`, `hom(b,c)`, `hom(a,c)`, and
/// every tree of `m_2` on `hom(a,b) ⊗ hom(b,c)` annotated with its weight.
pub fn plot_triple(
    polytope: &ProductPolytope,
    triple: &[LineObject; 3],
) -> Result<String, PlotError> {
    let dim = polytope.total_dim();
    if dim > 2 {
        return Err(PlotError::TooManyDimensions(polytope.descriptor(), dim));
    }
    let [a, b, c] = triple;
    let homs = [
        hom_space(polytope, a, b)?,
        hom_space(polytope, b, c)?,
        hom_space(polytope, a, c)?,
    ];

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-0.5 -0.5 3 3\" width=\"600\" height=\"600\">"
    );
    let _ = writeln!(out, "<title>{} {} {} {}</title>", polytope, a, b, c);
    let outline: Vec<(f64, f64)> = match polytope.dims().as_slice() {
        [1] => vec![(0.0, 2.0), (2.0, 2.0)],
        [2] => vec![(0.0, 2.0), (2.0, 2.0), (0.0, 0.0)],
        _ => vec![(0.0, 2.0), (2.0, 2.0), (2.0, 0.0), (0.0, 0.0)],
    };
    let pts: Vec<String> = outline
        .iter()
        .map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y)))
        .collect();
    let _ = writeln!(
        out,
        "<polygon points=\"{}\" fill=\"#f4f4f4\" stroke=\"black\" stroke-width=\"0.01\"/>",
        pts.join(" ")
    );

    for (k, h) in homs.iter().enumerate() {
        let color = COLORS[k];
        let _ = writeln!(
            out,
            "<g class=\"hom\" data-from=\"{}\" data-to=\"{}\" fill=\"{}\" stroke=\"{}\">",
            h.source, h.target, color, color
        );
        for g in &h.generators {
            let piece = locus(g);
            if piece.len() == 2 {
                let (x1, y1) = to_canvas(&piece[0]);
                let (x2, y2) = to_canvas(&piece[1]);
                let _ = writeln!(
                    out,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke-width=\"0.015\" stroke-opacity=\"0.5\"/>",
                    fmt(x1), fmt(y1), fmt(x2), fmt(y2)
                );
            } else {
                let (x, y) = to_canvas(&piece[0]);
                let offset = 0.04 * k as f64;
                let _ = writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                    fmt(x),
                    fmt(y),
                    fmt(0.03 - 0.007 * k as f64)
                );
                let _ = writeln!(
                    out,
                    "<text x=\"{}\" y=\"{}\" font-size=\"0.06\" stroke=\"none\">{}</text>",
                    fmt(x + 0.04),
                    fmt(y - 0.04 - offset),
                    g.index()
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }

    let rates = |from: &LineObject, to: &LineObject| -> Vec<f64> {
        from.labels()
            .iter()
            .zip(to.labels())
            .map(|(x, y)| (y - x) as f64 / 2.0)
            .collect()
    };
    let _ = writeln!(
        out,
        "<g class=\"trees\" fill=\"none\" stroke=\"#555\" stroke-width=\"0.008\">"
    );
    for u in homs[0].generators.iter().filter(|g| g.degree() == 0) {
        for v in homs[1].generators.iter().filter(|g| g.degree() == 0) {
            let tree = gradient_tree(u, v)?;
            let weight = compose(u, v)?.weight;
            for (left, r) in [(true, rates(a, b)), (false, rates(b, c))] {
                let path: Vec<String> = edge_curve(&tree.factors, &r, left)
                    .iter()
                    .map(|p| {
                        let (x, y) = to_canvas(p);
                        format!("{},{}", fmt(x), fmt(y))
                    })
                    .collect();
                let _ = writeln!(out, "<polyline points=\"{}\"/>", path.join(" "));
            }
            let meet = edge_curve(&tree.factors, &rates(a, b), true)
                .pop()
                .unwrap_or_default();
            let (x, y) = to_canvas(&meet);
            if !weight.is_one() {
                let _ = writeln!(
                    out,
                    "<text x=\"{}\" y=\"{}\" font-size=\"0.05\" fill=\"#555\" stroke=\"none\">{} = {}</text>",
                    fmt(x + 0.04),
                    fmt(y + 0.08),
                    weight,
                    weight.approx_string(24)
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}
