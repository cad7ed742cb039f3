//! Floating-point checks of the geometry behind the exact model: the Hessian
//! metric and Legendre duality, straight gradient lines, tree meeting
//! points and areas, the location of the maximum of `|e_{ab;I}|`, and the
//! Landau–Ginzburg critical points.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::lagrangian::{LagrangianError, MultiIndex, PairPotential};
use crate::morse_category::{gradient_tree, CategoryError, FactorTree, HomGenerator};
use crate::polytope::segment_contains;

/// Distance outside the polytope that a numeric trajectory may reach before
/// it is cut off.
pub const GUARD_BAND: f64 = 1e-9;

/// Outcome of one numeric check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, Value>,
}

impl CheckReport {
    fn new(check: &str, params: Value) -> Self {
        Self {
            check: check.to_string(),
            params,
            residuals: BTreeMap::new(),
            pass: true,
            info: BTreeMap::new(),
        }
    }

    fn residual(&mut self, name: &str, value: f64, bound: f64) {
        self.residuals.insert(name.to_string(), value);
        // NaN fails
        self.pass &= value < bound;
    }
}

/// Hessian chart of `CP^n` on `R^n` with potential
/// `φ(x) = log(1 + e^{2x_1} + ⋯ + e^{2x_n})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HessianChart {
    pub n: usize,
}

/// A dual point together with its slack `2 − Σx^j`, kept separately so
/// that points close to the far facet keep full relative precision.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint {
    pub coords: Vec<f64>,
    pub slack: f64,
}

impl DualPoint {
    pub fn from_coords(coords: Vec<f64>) -> Self {
        let slack = 2.0 - coords.iter().sum::<f64>();
        Self { coords, slack }
    }

    pub fn is_interior(&self) -> bool {
        self.slack > 0.0 && self.coords.iter().all(|&c| c > 0.0)
    }
}

impl HessianChart {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// `log(1 + Σe^{2x_i})`, evaluated without overflow.
    pub fn potential(&self, x: &[f64]) -> f64 {
        let m = x.iter().map(|&t| 2.0 * t).fold(0.0_f64, f64::max);
        let sum: f64 = (-m).exp() + x.iter().map(|&t| (2.0 * t - m).exp()).sum::<f64>();
        m + sum.ln()
    }

    /// Gradient of the potential: `x^i = 2e^{2x_i} / (1 + Σe^{2x_j})`.
    pub fn to_dual(&self, x: &[f64]) -> DualPoint {
        let m = x.iter().map(|&t| 2.0 * t).fold(0.0_f64, f64::max);
        let base = (-m).exp();
        let terms: Vec<f64> = x.iter().map(|&t| (2.0 * t - m).exp()).collect();
        let total = base + terms.iter().sum::<f64>();
        DualPoint {
            coords: terms.iter().map(|t| 2.0 * t / total).collect(),
            slack: 2.0 * base / total,
        }
    }

    /// `x_i = ½ log(x^i / (2 − Σx^j))`.
    pub fn from_dual(&self, p: &DualPoint) -> Vec<f64> {
        p.coords.iter().map(|&c| 0.5 * (c / p.slack).ln()).collect()
    }

    /// `g^{ij} = ∂²φ/∂x_i∂x_j = 2δ_ij x^i − x^i x^j` in terms of the dual point.
    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.to_dual(x).coords;
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let diag = if i == j { 2.0 * d[i] } else { 0.0 };
            diag - d[i] * d[j]
        })
    }

    pub fn min_eigenvalue(&self, x: &[f64]) -> f64 {
        SymmetricEigen::new(self.metric(x))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Certified lower bound for the smallest eigenvalue of the metric.
    ///
    /// With `S = diag(√g_ii)` the metric is `S A S` for a unit-diagonal `A`,
    /// and Ostrowski's theorem gives `λ_min(g) ≥ λ_min(A) · min g_ii` when
    /// `λ_min(A) > 0`. Unlike a direct solve on `g`, the rescaled problem is
    /// not swamped by rounding when some dual coordinate is tiny.
    pub fn min_eigenvalue_lower_bound(&self, x: &[f64]) -> f64 {
        let g = self.metric(x);
        let diag: Vec<f64> = (0..self.n).map(|i| g[(i, i)]).collect();
        if diag.iter().any(|&d| d <= 0.0) {
            return diag.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        }
        let a = DMatrix::from_fn(self.n, self.n, |i, j| {
            g[(i, j)] / (diag[i] * diag[j]).sqrt()
        });
        let lam = SymmetricEigen::new(a)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if lam <= 0.0 {
            lam
        } else {
            lam * diag.iter().copied().fold(f64::INFINITY, f64::min)
        }
    }

    /// Central second differences of the potential.
    pub fn finite_difference_hessian(&self, x: &[f64], h: f64) -> DMatrix<f64> {
        let shifted = |i: usize, si: f64, j: usize, sj: f64| {
            let mut y = x.to_vec();
            y[i] += si;
            y[j] += sj;
            self.potential(&y)
        };
        DMatrix::from_fn(self.n, self.n, |i, j| {
            (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h)
                + shifted(i, -h, j, -h))
                / (4.0 * h * h)
        })
    }
}

const HESSIAN_STEP: f64 = 1e-4;
const HESSIAN_TOL: f64 = 1e-5;

/// Round trip through the Legendre transform, interior membership of the
/// dual point, positivity of the metric and agreement with finite
/// differences.
pub fn legendre_check(x_orig: &[f64], tol: f64) -> CheckReport {
    let chart = HessianChart::new(x_orig.len());
    let mut report = CheckReport::new("legendre", json!({"x": x_orig, "tol": tol}));
    let dual = chart.to_dual(x_orig);
    let back = chart.from_dual(&dual);
    let round_trip = back
        .iter()
        .zip(x_orig)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report.residual("round_trip", round_trip, tol);
    report.residual(
        "outside_open_polytope",
        if dual.is_interior() { 0.0 } else { 1.0 },
        0.5,
    );
    let fd = chart.finite_difference_hessian(x_orig, HESSIAN_STEP);
    let hessian_gap = (chart.metric(x_orig) - fd).abs().max();
    report.residual("hessian_vs_finite_difference", hessian_gap, HESSIAN_TOL);
    let bound = chart.min_eigenvalue_lower_bound(x_orig);
    report
        .residuals
        .insert("min_eigenvalue_lower_bound".to_string(), bound);
    report.pass &= bound > 0.0;
    report.info.insert(
        "min_eigenvalue".to_string(),
        json!(chart.min_eigenvalue(x_orig)),
    );
    report.info.insert("dual".to_string(), json!(dual.coords));
    report
}

/// Sampled trajectory of `−grad f_{ab;I} = ((b−a)/2)(x − v)` in dual
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub step: f64,
    /// Largest distance from the closed-form solution at a sample time.
    pub max_deviation: f64,
    /// Largest distance from the line through `v` and the start point.
    pub collinearity: f64,
    /// Set when the trajectory left the guard band around the polytope.
    pub truncated: bool,
}

fn rk4_step(
    field: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    let k1 = field(x);
    let k2 = field(&(x + &k1 * (h / 2.0)));
    let k3 = field(&(x + &k2 * (h / 2.0)));
    let k4 = field(&(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn within_guard(x: &DVector<f64>) -> bool {
    x.iter().all(|&c| c >= -GUARD_BAND) && x.sum() <= 2.0 + GUARD_BAND
}

fn pair_field(a: i64, b: i64, index: &MultiIndex) -> impl Fn(&DVector<f64>) -> DVector<f64> {
    let rate = (b - a) as f64 / 2.0;
    let v = DVector::from_iterator(
        index.len(),
        index.0.iter().map(|&i| 2.0 * i as f64 / (b - a) as f64),
    );
    move |x: &DVector<f64>| (x - &v) * rate
}

/// Fixed-step RK4 from `start` over `[0, t_end]` (`t_end < 0` integrates
/// backward), cross-checked against `v + e^{((b−a)/2)t}(start − v)`.
pub fn integrate_pair_flow(
    a: i64,
    b: i64,
    index: &MultiIndex,
    start: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<TrajectorySample, LagrangianError> {
    let pair = PairPotential::new(a, b, index.clone())?;
    if start.len() != index.len() {
        return Err(LagrangianError::DimensionMismatch {
            expected: index.len(),
            got: start.len(),
        });
    }
    let v = DVector::from_vec(pair.base_point().to_f64());
    let x0 = DVector::from_column_slice(start);
    let field = pair_field(a, b, index);
    let rate = (b - a) as f64 / 2.0;
    let h = t_end / steps.max(1) as f64;
    let offset = &x0 - &v;
    let direction = if offset.norm() > 0.0 {
        Some(offset.normalize())
    } else {
        None
    };

    let mut sample = TrajectorySample {
        times: vec![0.0],
        points: vec![start.to_vec()],
        step: h,
        max_deviation: 0.0,
        collinearity: 0.0,
        truncated: !within_guard(&x0),
    };
    let mut x = x0.clone();
    for k in 1..=steps {
        if sample.truncated {
            break;
        }
        x = rk4_step(&field, &x, h);
        if !within_guard(&x) {
            sample.truncated = true;
            break;
        }
        let t = k as f64 * h;
        let exact = &v + &offset * (rate * t).exp();
        sample.max_deviation = sample.max_deviation.max((&x - exact).norm());
        if let Some(dir) = &direction {
            let rel = &x - &v;
            let along = rel.dot(dir);
            sample.collinearity = sample.collinearity.max((rel - dir * along).norm());
        }
        sample.times.push(t);
        sample.points.push(x.iter().copied().collect());
    }
    Ok(sample)
}

const MEETING_NUDGE: f64 = 1e-6;
const MEETING_STEP: f64 = 1e-2;
const MEETING_MAX_STEPS: usize = 200_000;
const AREA_INTERVALS: usize = 2000;

/// Follows the flow of `(a,b;I)` from just off `from` toward `toward` and
/// returns the point where it balances the flow of `(b,c;K)`, i.e. where
/// the output field `−grad f_ac` vanishes along the trajectory.
fn meeting_point(
    lead: (i64, i64, &MultiIndex),
    other: (i64, i64, &MultiIndex),
    from: &DVector<f64>,
    toward: &DVector<f64>,
) -> Option<DVector<f64>> {
    let f_lead = pair_field(lead.0, lead.1, lead.2);
    let f_other = pair_field(other.0, other.1, other.2);
    let dir = toward - from;
    let balance = |x: &DVector<f64>| (f_lead(x) + f_other(x)).dot(&dir);
    let mut x = from + &dir * MEETING_NUDGE;
    let mut g = balance(&x);
    for _ in 0..MEETING_MAX_STEPS {
        let next = rk4_step(&f_lead, &x, MEETING_STEP);
        let g_next = balance(&next);
        if g.signum() != g_next.signum() || g_next == 0.0 {
            // bisect on the step length from x
            let (mut lo, mut hi) = (0.0, MEETING_STEP);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if balance(&rk4_step(&f_lead, &x, mid)).signum() == g.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(rk4_step(&f_lead, &x, 0.5 * (lo + hi)));
        }
        if !within_guard(&next) {
            return None;
        }
        x = next;
        g = g_next;
    }
    None
}

/// `∫ df_{ab;I}` along the straight path `from → to` in dual coordinates,
/// with `df = ½Σ i_j dlog x^j + ½(b−a−|I|) dlog(2−Σx)`, by composite Simpson.
fn potential_increment(
    a: i64,
    b: i64,
    index: &MultiIndex,
    from: &DVector<f64>,
    to: &DVector<f64>,
) -> f64 {
    let slack_coef = 0.5 * (b - a - index.total()) as f64;
    let dx = to - from;
    let integrand = |t: f64| {
        let x = from + &dx * t;
        let mut s = 0.0;
        for (j, &i) in index.0.iter().enumerate() {
            if i != 0 {
                s += 0.5 * i as f64 * dx[j] / x[j];
            }
        }
        if slack_coef != 0.0 {
            s -= slack_coef * dx.sum() / (2.0 - x.sum());
        }
        s
    };
    let m = AREA_INTERVALS;
    let h = 1.0 / m as f64;
    let mut total = integrand(0.0) + integrand(1.0);
    for k in 1..m {
        total += integrand(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    total * h / 3.0
}

/// Numeric reconstruction of the tree of `m_2(left, right)`: meeting point
/// from the flows leaving `v_ab` and `v_bc`, area from line integrals of the
/// potential differentials, and the exact segment test.
pub fn verify_tree_numeric(
    left: &HomGenerator,
    right: &HomGenerator,
    tol: f64,
) -> Result<CheckReport, CategoryError> {
    let tree = gradient_tree(left, right)?;
    let mut report = CheckReport::new(
        "tree",
        json!({"left": left.to_string(), "right": right.to_string(), "tol": tol}),
    );
    let mut meeting_error: f64 = 0.0;
    let mut area_numeric = 0.0;
    let mut on_segment = true;
    for (k, factor) in tree.factors.iter().enumerate() {
        let FactorTree::Segments {
            v_ab, v_bc, v_ac, ..
        } = factor
        else {
            continue;
        };
        let (a, b, c) = (
            left.source().labels()[k],
            left.target().labels()[k],
            right.target().labels()[k],
        );
        let (i, kk) = (&left.factors()[k].index, &right.factors()[k].index);
        let (p, q, m) = (
            DVector::from_vec(v_ab.to_f64()),
            DVector::from_vec(v_bc.to_f64()),
            DVector::from_vec(v_ac.to_f64()),
        );
        on_segment &= segment_contains(v_ab, v_bc, v_ac).unwrap_or(false);
        if v_ab != v_bc {
            for found in [
                meeting_point((a, b, i), (b, c, kk), &p, &q),
                meeting_point((b, c, kk), (a, b, i), &q, &p),
            ] {
                meeting_error = meeting_error.max(found.map_or(f64::INFINITY, |x| (x - &m).norm()));
            }
        }
        area_numeric -=
            potential_increment(a, b, i, &p, &m) + potential_increment(b, c, kk, &q, &m);
    }
    let area_exact = tree.area.to_f64();
    let area_error = if area_exact.abs() < 1e-12 {
        area_numeric.abs()
    } else {
        ((area_numeric - area_exact) / area_exact).abs()
    };
    report.residual("meeting_error", meeting_error, tol);
    report.residual("area_error", area_error, tol);
    report.residual("off_segment", if on_segment { 0.0 } else { 1.0 }, 0.5);
    report
        .info
        .insert("area_numeric".to_string(), json!(area_numeric));
    report
        .info
        .insert("area_exact".to_string(), json!(tree.area.to_string()));
    report
        .info
        .insert("area_exact_approx".to_string(), json!(area_exact));
    Ok(report)
}

/// `|e_{ab;I}(x)|` in floating point.
pub fn magnitude_f64(pair: &PairPotential, x: &[f64]) -> f64 {
    let (a, b) = pair.labels();
    let index = pair.index();
    let slack = (2.0 - x.iter().sum::<f64>()) / 2.0;
    let mut value =
        pair.constant().to_f64() * slack.max(0.0).powf((b - a - index.total()) as f64 / 2.0);
    for (&c, &i) in x.iter().zip(&index.0) {
        value *= (c / 2.0).max(0.0).powf(i as f64 / 2.0);
    }
    value
}

/// Evaluates `|e_{ab;I}|` on the grid `(1/divisions)·Z^n ∩ P`. Passes when
/// the magnitude never exceeds `1 + tol`, the grid maximum is within one
/// grid step of `v` (Chebyshev distance), and every value above `1 − eps`
/// is too.
pub fn grid_max_check(
    a: i64,
    b: i64,
    index: &MultiIndex,
    divisions: u32,
    tol: f64,
    eps: f64,
) -> Result<CheckReport, LagrangianError> {
    let pair = PairPotential::new(a, b, index.clone())?;
    let n = index.len();
    let h = 1.0 / divisions as f64;
    let v = pair.base_point().to_f64();
    let mut report = CheckReport::new(
        "grid_max",
        json!({"a": a, "b": b, "index": index.0, "spacing": format!("1/{}", divisions), "tol": tol, "eps": eps}),
    );
    let side = 2 * divisions as usize;
    let mut counter = vec![0usize; n];
    let mut max_value = f64::NEG_INFINITY;
    let mut argmax = vec![0.0; n];
    let mut near_max_far = 0usize;
    let mut near_max = 0usize;
    let mut points = 0usize;
    loop {
        if counter.iter().sum::<usize>() <= side {
            points += 1;
            let x: Vec<f64> = counter.iter().map(|&k| k as f64 * h).collect();
            let value = magnitude_f64(&pair, &x);
            let dist = x
                .iter()
                .zip(&v)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            if value > max_value {
                max_value = value;
                argmax = x.clone();
            }
            if value > 1.0 - eps {
                near_max += 1;
                if dist > h * (1.0 + 1e-9) {
                    near_max_far += 1;
                }
            }
        }
        let mut j = 0;
        loop {
            if j == n {
                report.residual("max_minus_one", (max_value - 1.0).max(0.0), tol);
                let dist = argmax
                    .iter()
                    .zip(&v)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max);
                report.residual("argmax_cells_from_v", dist / h, 1.0 + 1e-9);
                report.residual("near_max_outside_cell", near_max_far as f64, 0.5);
                report.info.insert("grid_points".to_string(), json!(points));
                report
                    .info
                    .insert("near_max_points".to_string(), json!(near_max));
                report.info.insert("argmax".to_string(), json!(argmax));
                return Ok(report);
            }
            counter[j] += 1;
            if counter[j] <= side {
                break;
            }
            counter[j] = 0;
            j += 1;
        }
    }
}

/// How a point of `(C^×)^n` is read as `(x, y)` on the mirror side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LgConvention {
    /// `z = e^{x + iy}`, `y` in radians mod `2π`.
    Literal,
    /// `x = −log|z|`, `y = arg z / 2π` mod 1.
    NegLogTurns,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LgPoint {
    pub a: usize,
    pub z: Vec<(f64, f64)>,
    pub gradient_residual: f64,
    pub in_open_polytope: bool,
    pub on_section: bool,
}

fn lg_gradient(z: &[Complex64]) -> Vec<Complex64> {
    let prod: Complex64 = z.iter().product();
    let q = (-2.0f64).exp();
    z.iter()
        .map(|zi| Complex64::new(1.0, 0.0) - q / (zi * prod))
        .collect()
}

/// `|∇W(z)|` for `W = z^1 + ⋯ + z^n + e^{−2}/(z^1⋯z^n)`.
pub fn lg_gradient_norm(z: &[Complex64]) -> f64 {
    lg_gradient(z)
        .iter()
        .map(|g| g.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// The points `c_a = (e^{−2/(n+1)}ω^a, …)` with their gradient residuals and
/// whether, read through `convention`, they lie on `y = (a/2)x` over the
/// open polytope.
pub fn lg_critical_points(n: usize, convention: LgConvention) -> Vec<LgPoint> {
    let modulus = (-2.0 / (n as f64 + 1.0)).exp();
    (0..=n)
        .map(|a| {
            let phase = 2.0 * PI * a as f64 / (n as f64 + 1.0);
            let c = Complex64::from_polar(modulus, phase);
            let z = vec![c; n];
            let (x, y, period) = match convention {
                LgConvention::Literal => (c.norm().ln(), c.arg().rem_euclid(2.0 * PI), 2.0 * PI),
                LgConvention::NegLogTurns => {
                    (-c.norm().ln(), (c.arg() / (2.0 * PI)).rem_euclid(1.0), 1.0)
                }
            };
            let in_open_polytope = x > 0.0 && n as f64 * x < 2.0;
            let gap = (y - a as f64 / 2.0 * x).rem_euclid(period);
            let on_section = gap.min(period - gap) < 1e-12;
            LgPoint {
                a,
                z: z.iter().map(|w| (w.re, w.im)).collect(),
                gradient_residual: lg_gradient_norm(&z),
                in_open_polytope,
                on_section: in_open_polytope && on_section,
            }
        })
        .collect()
}

/// Gradient residuals must be below `tol`; membership is recorded only.
pub fn lg_report(n: usize, convention: LgConvention, tol: f64) -> CheckReport {
    let mut report = CheckReport::new(
        "lg_critical_points",
        json!({"n": n, "convention": convention, "tol": tol}),
    );
    let points = lg_critical_points(n, convention);
    let worst = points
        .iter()
        .map(|p| p.gradient_residual)
        .fold(0.0, f64::max);
    report.residual("max_gradient_residual", worst, tol);
    report.info.insert(
        "membership".to_string(),
        json!(points.iter().map(|p| p.on_section).collect::<Vec<_>>()),
    );
    report
}
