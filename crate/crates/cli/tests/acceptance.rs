//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report is always printed; exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mirror_morse::flow_verifier::CheckReport;
use mirror_morse::lagrangian::MultiIndex;
use mirror_morse::verify::{
    associativity_suite, boundary_check, grading_check, grid_suite, higher_products_check,
    hom_rank_check, legendre_suite, lg_suite, rk4_suite, segment_law_check, standard_collections,
    structure_equivalence_check, tree_suite, SEED,
};
use mirror_morse::{compose, hom_space, LineObject, PosExact, ProductPolytope};
use num_rational::Rational64;

const LEGENDRE_TOL: f64 = 1e-10;
const RK4_TOL: f64 = 1e-8;
const MEETING_TOL: f64 = 1e-6;
const AREA_TOL: f64 = 1e-6;
const LG_TOL: f64 = 1e-12;
const TREE_COUNT: usize = 60;
const LEGENDRE_COUNT: usize = 100;
const BUDGET: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn from_reports(reports: &[CheckReport]) -> Self {
        let pass = reports
            .iter()
            .all(|r| r.pass && r.residuals.get("failures").is_none_or(|&f| f == 0.0));
        let detail = reports
            .iter()
            .map(|r| {
                let failures = r
                    .info
                    .get("failures")
                    .map(|f| format!(" {}", f))
                    .unwrap_or_default();
                format!(
                    "{}={}{}",
                    r.check,
                    if r.pass { "ok" } else { "failed" },
                    failures
                )
            })
            .collect::<Vec<_>>()
            .join(", ");
        Self { pass, detail }
    }
}

fn residual(r: &CheckReport, key: &str) -> f64 {
    *r.residuals.get(key).unwrap_or(&f64::INFINITY)
}

fn hom_ranks() -> Outcome {
    Outcome::from_reports(&[hom_rank_check(3)])
}

fn structure_equivalence() -> Outcome {
    let collections = standard_collections(3);
    let mut out = Outcome::from_reports(&[structure_equivalence_check(&collections)]);
    let names: Vec<String> = collections.iter().map(|(p, _)| p.descriptor()).collect();
    let expected = ["P1", "P2", "P3", "P1xP1", "P1xP2"];
    out.pass &= names == expected;
    out.detail += &format!(" over {}", names.join(" "));
    out
}

fn generator(n: usize, a: i64, b: i64, index: &[i64]) -> mirror_morse::HomGenerator {
    let p = ProductPolytope::projective_space(n).unwrap();
    hom_space(&p, &LineObject::single(a), &LineObject::single(b))
        .unwrap()
        .find(&MultiIndex(index.to_vec()))
        .cloned()
        .unwrap()
}

fn worked_constants() -> Outcome {
    // frozen oracle values: 1/2, 1/2 and 4·3^(−3/2) ≈ 0.769800358919501
    let half = PosExact::from_rational(Rational64::new(1, 2)).unwrap();
    let four_root = PosExact::from_factors([
        (2, Rational64::from_integer(2)),
        (3, Rational64::new(-3, 2)),
    ])
    .unwrap();
    let cases = [
        (1, [0, 1, 2], [vec![0], vec![1], vec![1]], half.clone()),
        (2, [0, 1, 2], [vec![1, 0], vec![0, 1], vec![1, 1]], half),
        (1, [0, 2, 3], [vec![1], vec![1], vec![2]], four_root),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, [a, b, c], [i, k, out], expected) in cases {
        let m = compose(&generator(n, a, b, &i), &generator(n, b, c, &k)).unwrap();
        pass &= m.weight == expected && m.generator == generator(n, a, c, &out);
        detail.push(format!("P{} {}{}{}: {}", n, a, b, c, m.weight));
    }
    let approx = PosExact::from_factors([
        (2, Rational64::from_integer(2)),
        (3, Rational64::new(-3, 2)),
    ])
    .unwrap()
    .to_f64();
    pass &= (approx - 0.769800358919501).abs() < 1e-15;
    Outcome {
        pass,
        detail: detail.join(", "),
    }
}

fn associativity() -> Outcome {
    Outcome::from_reports(&[associativity_suite(2)])
}

fn grading() -> Outcome {
    Outcome::from_reports(&[grading_check(&standard_collections(3))])
}

fn boundary() -> Outcome {
    Outcome::from_reports(&[boundary_check(&standard_collections(3))])
}

fn segment_law() -> Outcome {
    Outcome::from_reports(&[segment_law_check(&standard_collections(3))])
}

fn higher_products() -> Outcome {
    Outcome::from_reports(&[higher_products_check(&standard_collections(3))])
}

fn numerics() -> Outcome {
    let legendre = legendre_suite(3, LEGENDRE_COUNT, SEED);
    let rk4 = rk4_suite(3);
    let trees = tree_suite(3, TREE_COUNT, SEED);
    let grid = grid_suite(2);
    let checks = [
        (
            "legendre_round_trip",
            residual(&legendre, "round_trip"),
            LEGENDRE_TOL,
        ),
        ("rk4_deviation", residual(&rk4, "max_deviation"), RK4_TOL),
        (
            "meeting_error",
            residual(&trees, "max_meeting_error"),
            MEETING_TOL,
        ),
        (
            "area_relative_error",
            residual(&trees, "max_area_relative_error"),
            AREA_TOL,
        ),
    ];
    let mut pass = checks.iter().all(|&(_, v, tol)| v < tol);
    pass &= legendre.pass && rk4.pass && trees.pass && grid.pass;
    pass &= residual(&legendre, "min_eigenvalue_lower_bound") > 0.0;
    pass &= residual(&rk4, "truncated") == 0.0;
    pass &= residual(&grid, "failures") == 0.0;
    pass &=
        legendre.params["count"] == LEGENDRE_COUNT && trees.params["count"].as_u64() >= Some(50);
    pass &= grid.params["spacing"] == "1/100";
    let mut detail: Vec<String> = checks
        .iter()
        .map(|(k, v, tol)| format!("{}={:.2e}<{:e}", k, v, tol))
        .collect();
    detail.push(format!("grid_failures={}", residual(&grid, "failures")));
    Outcome {
        pass,
        detail: detail.join(", "),
    }
}

fn lg_diagnostic() -> Outcome {
    let r = lg_suite(3);
    let worst = residual(&r, "max_gradient_residual");
    let membership: Vec<String> = r
        .info
        .iter()
        .filter(|(k, _)| k.starts_with("membership"))
        .map(|(k, v)| format!("{}={}", k.trim_start_matches("membership_"), v))
        .collect();
    Outcome {
        pass: worst < LG_TOL,
        detail: format!(
            "max |grad W|={:.2e}<{:e}; membership (reported) {}",
            worst,
            LG_TOL,
            membership.join(" ")
        ),
    }
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_mirror-morse");
    let table = || {
        Command::new(bin)
            .args(["table", "--space", "P2", "--range", "0..2"])
            .env_remove("MIRROR_MORSE_PRECISION")
            .output()
            .expect("binary runs")
    };
    let (first, second) = (table(), table());
    let identical =
        first.status.success() && first.stdout == second.stdout && !first.stdout.is_empty();
    let verify = Command::new(bin)
        .args(["verify", "--suite", "all", "--n-max", "2"])
        .env_remove("MIRROR_MORSE_PRECISION")
        .output()
        .expect("binary runs");
    Outcome {
        pass: identical && verify.status.code() == Some(0),
        detail: format!(
            "table identical={}, verify exit={:?}",
            identical,
            verify.status.code()
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("hom ranks", hom_ranks),
        ("structure-constant equivalence", structure_equivalence),
        ("worked constants", worked_constants),
        ("associativity", associativity),
        ("grading", grading),
        ("boundary", boundary),
        ("segment law", segment_law),
        ("higher products", higher_products),
        ("numerics", numerics),
        ("LG diagnostic", lg_diagnostic),
        ("CLI determinism", cli_determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        failed += !o.pass as usize;
        println!(
            "{} {:>2} {}  ({:.2}s)  {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            name,
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    let elapsed = start.elapsed();
    let in_budget = elapsed < BUDGET;
    failed += !in_budget as usize;
    println!(
        "{} total time {:.2}s < {}s",
        if in_budget { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        BUDGET.as_secs()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
