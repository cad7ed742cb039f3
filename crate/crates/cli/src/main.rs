use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mirror_morse::dg_model::{cartesian_objects, exceptional_check, ext_ranks, serre_rank};
use mirror_morse::exact_weight::DEFAULT_PRECISION_BITS;
use mirror_morse::morse_category::{classify_product_case, compose, hom_space, HomGenerator};
use mirror_morse::svg::plot_triple;
use mirror_morse::table::{diff_tables, StructureTable};
use mirror_morse::verify::{run_suite, Suite};
use mirror_morse::{LineObject, ProductPolytope};

const PRECISION_VAR: &str = "MIRROR_MORSE_PRECISION";

#[derive(Parser, Debug)]
#[command(
    name = "mirror-morse",
    version,
    about = "Weighted Morse category of toric projective spaces"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Pretty, global = true)]
    format: Format,
    /// Write output here instead of stdout (a directory for `table`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Exact,
    Numeric,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the generators of a hom space.
    Hom {
        #[arg(long, num_args = 1.., required = true)]
        space: Vec<String>,
        #[arg(long, value_parser = parse_object, allow_hyphen_values = true)]
        from: LineObject,
        #[arg(long, value_parser = parse_object, allow_hyphen_values = true)]
        to: LineObject,
    },
    /// Compose generators along a triple of objects.
    Compose {
        #[arg(long, num_args = 1.., required = true)]
        space: Vec<String>,
        /// Objects separated by commas, factor labels by colons: `0:0,1:0,1:1`.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        triple: Triple,
        /// Index of the left generator (default: all).
        #[arg(long, value_parser = parse_index, allow_hyphen_values = true)]
        left: Option<Index>,
        /// Index of the right generator (default: all).
        #[arg(long, value_parser = parse_index, allow_hyphen_values = true)]
        right: Option<Index>,
    },
    /// Build the Morse and DG structure tables of a collection and diff them.
    Table {
        #[arg(long, num_args = 1.., required = true)]
        space: Vec<String>,
        /// One inclusive range per factor: `0..1,0..2`.
        #[arg(long, value_parser = parse_ranges, value_delimiter = ',', required = true)]
        range: Vec<Vec<i64>>,
    },
    /// Run the verification suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
    },
    /// Draw a polytope of total dimension at most 2 with the trees of a triple.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        space: Vec<String>,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        triple: Triple,
    },
    /// Hom ranks by degree for every ordered pair of a collection.
    Dims {
        #[arg(long, num_args = 1.., required = true)]
        space: Vec<String>,
        #[arg(long, value_parser = parse_ranges, value_delimiter = ',', required = true)]
        range: Vec<Vec<i64>>,
    },
}

#[derive(Clone, Debug)]
struct Triple([LineObject; 3]);

#[derive(Clone, Debug)]
struct Index(Vec<i64>);

/// Joins the words of `--space` so that `P1x P1` works unquoted.
fn parse_space(words: &[String]) -> Result<ProductPolytope> {
    words
        .concat()
        .parse::<ProductPolytope>()
        .map_err(|e| usage(e.to_string()))
}

fn parse_index(s: &str) -> Result<Index, String> {
    parse_labels(s).map(Index)
}

fn parse_labels(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad label {:?}: {}", t, e))
        })
        .collect()
}

fn parse_object(s: &str) -> Result<LineObject, String> {
    parse_labels(s).map(LineObject)
}

fn parse_triple(s: &str) -> Result<Triple, String> {
    let objects: Vec<LineObject> = s
        .split(',')
        .map(|o| {
            o.split(':')
                .map(|t| {
                    t.trim()
                        .parse::<i64>()
                        .map_err(|e| format!("bad label {:?}: {}", t, e))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(LineObject)
        })
        .collect::<Result<_, _>>()?;
    let arr: [LineObject; 3] = objects
        .try_into()
        .map_err(|v: Vec<LineObject>| format!("a triple needs 3 objects, got {}", v.len()))?;
    Ok(Triple(arr))
}

fn parse_ranges(s: &str) -> Result<Vec<i64>, String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got {:?}", s))?;
    let lo: i64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad range start: {}", e))?;
    let hi: i64 = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad range end: {}", e))?;
    if hi < lo {
        return Err(format!("empty range {}..{}", lo, hi));
    }
    Ok((lo..=hi).collect())
}

/// Errors the user should fix; exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn precision() -> Result<u32> {
    match std::env::var(PRECISION_VAR) {
        Ok(v) => v
            .trim()
            .parse::<u32>()
            .ok()
            .filter(|&b| b >= 24)
            .ok_or_else(|| {
                usage(format!(
                    "{} must be an integer >= 24, got {:?}",
                    PRECISION_VAR, v
                ))
            }),
        Err(_) => Ok(DEFAULT_PRECISION_BITS),
    }
}

fn check_labels(space: &ProductPolytope, objects: &[&LineObject]) -> Result<()> {
    for o in objects {
        if o.labels().len() != space.num_factors() {
            return Err(usage(format!(
                "{} has {} labels but {} has {} factors",
                o,
                o.labels().len(),
                space,
                space.num_factors()
            )));
        }
    }
    Ok(())
}

fn collection(space: &ProductPolytope, ranges: &[Vec<i64>]) -> Result<Vec<LineObject>> {
    let ranges: Vec<Vec<i64>> = if ranges.len() == 1 && space.num_factors() > 1 {
        vec![ranges[0].clone(); space.num_factors()]
    } else {
        ranges.to_vec()
    };
    if ranges.len() != space.num_factors() {
        return Err(usage(format!(
            "{} needs {} ranges, got {}",
            space,
            space.num_factors(),
            ranges.len()
        )));
    }
    Ok(cartesian_objects(&ranges))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn csv_row(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    quoted.join(",") + "\n"
}

fn generator_json(g: &HomGenerator) -> Value {
    json!({
        "index": g.index().0,
        "point": g.point_strings(),
        "degree": g.degree(),
        "boundary_faces": g.boundary_faces(),
    })
}

fn cmd_hom(cli: &Cli, space: &ProductPolytope, from: &LineObject, to: &LineObject) -> Result<bool> {
    check_labels(space, &[from, to])?;
    let h = hom_space(space, from, to)?;
    let note = from
        .labels()
        .iter()
        .zip(to.labels())
        .any(|(a, b)| a > b)
        .then(|| {
            let ranks: Vec<String> = from
                .labels()
                .iter()
                .zip(to.labels())
                .zip(space.dims())
                .map(|((&a, &b), n)| serre_rank(a, b, n).to_string())
                .collect();
            format!("serre_rank={}", ranks.join(","))
        });
    let text = match cli.format {
        Format::Json => to_json_text(&json!({
            "space": space.descriptor(),
            "from": from.to_string(),
            "to": to.to_string(),
            "generators": h.generators.iter().map(generator_json).collect::<Vec<_>>(),
            "note": note,
        })),
        Format::Csv => {
            let mut s = String::from("index,point,degree,boundary_faces\n");
            for g in &h.generators {
                s += &csv_row(&[
                    g.index().to_string(),
                    g.point_strings().join(" "),
                    g.degree().to_string(),
                    g.boundary_faces().join(" "),
                ]);
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("{} -> {} on {}: {} generators\n", from, to, space, h.rank());
            for g in &h.generators {
                let faces = g.boundary_faces();
                s += &format!(
                    "  {}@({})  degree {}  {}\n",
                    g.index(),
                    g.point_strings().join(","),
                    g.degree(),
                    if faces.is_empty() {
                        "interior".to_string()
                    } else {
                        faces.join(" ")
                    }
                );
            }
            if let Some(n) = &note {
                s += &format!("  note: {}\n", n);
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(true)
}

fn cmd_compose(
    cli: &Cli,
    space: &ProductPolytope,
    triple: &Triple,
    left: Option<&Index>,
    right: Option<&Index>,
) -> Result<bool> {
    let [a, b, c] = &triple.0;
    check_labels(space, &[a, b, c])?;
    let bits = precision()?;
    let pick =
        |from: &LineObject, to: &LineObject, index: Option<&Index>| -> Result<Vec<HomGenerator>> {
            let h = hom_space(space, from, to)?;
            match index {
                None => Ok(h.generators),
                Some(Index(i)) => match h.generators.into_iter().find(|g| &g.index().0 == i) {
                    Some(g) => Ok(vec![g]),
                    None => Err(usage(format!(
                        "no generator with index {:?} in {} -> {}",
                        i, from, to
                    ))),
                },
            }
        };
    let (lefts, rights) = (pick(a, b, left)?, pick(b, c, right)?);
    let case = classify_product_case(a, b, c)
        .ok()
        .map(|k| k.label().to_string());
    let mut rows = Vec::new();
    for u in &lefts {
        for v in &rights {
            let m = compose(u, v)?;
            rows.push((u.index(), v.index(), m));
        }
    }
    let text = match cli.format {
        Format::Json => to_json_text(&json!({
            "space": space.descriptor(),
            "objects": [a.to_string(), b.to_string(), c.to_string()],
            "case": case,
            "products": rows.iter().map(|(i, k, m)| json!({
                "left": i.0,
                "right": k.0,
                "result": m.generator.index().0,
                "point": m.generator.point_strings(),
                "weight": m.weight.to_json(bits),
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("left,right,result,weight,approx\n");
            for (i, k, m) in &rows {
                s += &csv_row(&[
                    i.to_string(),
                    k.to_string(),
                    m.generator.index().to_string(),
                    m.weight.to_string(),
                    m.weight.approx_string(bits),
                ]);
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("m2 on {} along {} -> {} -> {}", space, a, b, c);
            if let Some(case) = &case {
                s += &format!(", case {}", case);
            }
            s.push('\n');
            for (i, k, m) in &rows {
                s += &format!(
                    "  {} * {} = {} V{}  (~{})\n",
                    i,
                    k,
                    m.weight,
                    m.generator.index(),
                    m.weight.approx_string(bits)
                );
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(true)
}

fn cmd_table(cli: &Cli, space: &ProductPolytope, ranges: &[Vec<i64>]) -> Result<bool> {
    let objects = collection(space, ranges)?;
    let bits = precision()?;
    let morse = StructureTable::morse(space, &objects)?;
    let dg = StructureTable::dg(space, &objects)?;
    let diff = diff_tables(&morse, &dg);
    let exceptional = exceptional_check(space, &objects);
    if !exceptional.pass {
        eprintln!(
            "warning: the collection is not strongly exceptional ({}); the diff is expected to be nonempty",
            exceptional.failures.first().map(String::as_str).unwrap_or("")
        );
    }
    let ok = diff.is_empty() || !exceptional.pass;
    match (cli.format, cli.out.as_deref()) {
        (Format::Pretty, out) => {
            let mut s = format!("{} with {} objects\n", space, objects.len());
            s += &format!(
                "  morse products: {}\n  dg products: {}\n",
                morse.products.len(),
                dg.products.len()
            );
            for p in &morse.products {
                s += &format!(
                    "  {} -> {} -> {}: {:?} * {:?} = {} {:?}{}\n",
                    p.left.from,
                    p.left.to,
                    p.right.to,
                    p.left.index,
                    p.right.index,
                    p.weight,
                    p.result.index,
                    p.case
                        .as_ref()
                        .map(|c| format!("  case {}", c))
                        .unwrap_or_default()
                );
            }
            s += &format!(
                "  diff: {}\n",
                if diff.is_empty() {
                    "empty".to_string()
                } else {
                    diff.entries.join("; ")
                }
            );
            emit(out, &s)?;
        }
        (format, Some(dir)) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let ext = if format == Format::Csv { "csv" } else { "json" };
            for (name, table) in [("morse", &morse), ("dg", &dg)] {
                let body = if format == Format::Csv {
                    table.products_csv(bits)
                } else {
                    to_json_text(&table.to_json(bits))
                };
                emit(Some(&dir.join(format!("{}.{}", name, ext))), &body)?;
            }
            emit(Some(&dir.join("diff.json")), &to_json_text(&diff.to_json()))?;
        }
        (Format::Json, None) => emit(
            None,
            &to_json_text(
                &json!({"morse": morse.to_json(bits), "dg": dg.to_json(bits), "diff": diff.to_json()}),
            ),
        )?,
        (Format::Csv, None) => {
            emit(None, &morse.products_csv(bits))?;
        }
    }
    Ok(ok)
}

fn cmd_verify(cli: &Cli, suite: SuiteArg, n_max: usize) -> Result<bool> {
    if n_max == 0 {
        return Err(usage("--n-max must be at least 1"));
    }
    let suite = match suite {
        SuiteArg::Exact => Suite::Exact,
        SuiteArg::Numeric => Suite::Numeric,
        SuiteArg::All => Suite::All,
    };
    let report = run_suite(suite, n_max);
    let text = match cli.format {
        Format::Json => to_json_text(&serde_json::to_value(&report)?),
        Format::Csv => {
            let mut s = String::from("check,pass,residuals\n");
            for c in &report.checks {
                let res: Vec<String> = c
                    .residuals
                    .iter()
                    .map(|(k, v)| format!("{}={:e}", k, v))
                    .collect();
                s += &csv_row(&[c.check.clone(), c.pass.to_string(), res.join(" ")]);
            }
            s
        }
        Format::Pretty => {
            let mut s = String::new();
            for c in &report.checks {
                let res: Vec<String> = c
                    .residuals
                    .iter()
                    .map(|(k, v)| format!("{}={:.3e}", k, v))
                    .collect();
                s += &format!(
                    "{} {}  {}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.check,
                    res.join(" ")
                );
            }
            s += &format!(
                "{}\n",
                if report.pass {
                    "all checks passed"
                } else {
                    "some checks failed"
                }
            );
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(report.pass)
}

fn cmd_plot(cli: &Cli, space: &ProductPolytope, triple: &Triple) -> Result<bool> {
    let [a, b, c] = &triple.0;
    check_labels(space, &[a, b, c])?;
    if space.total_dim() > 2 {
        return Err(usage(format!(
            "cannot plot {}: total dimension {} exceeds 2",
            space,
            space.total_dim()
        )));
    }
    let svg = plot_triple(space, &triple.0)?;
    emit(cli.out.as_deref(), &svg)?;
    Ok(true)
}

fn cmd_dims(cli: &Cli, space: &ProductPolytope, ranges: &[Vec<i64>]) -> Result<bool> {
    let objects = collection(space, ranges)?;
    let dims = space.dims();
    let mut rows = Vec::new();
    let mut agree = true;
    for x in &objects {
        for y in &objects {
            let morse = hom_space(space, x, y)?.ranks();
            let dg = ext_ranks(&dims, x, y);
            agree &= morse == dg;
            rows.push((x, y, morse, dg));
        }
    }
    let fmt_ranks = |r: &[(usize, u64)]| -> String {
        if r.is_empty() {
            "0".to_string()
        } else {
            r.iter()
                .map(|(d, k)| format!("H{}:{}", d, k))
                .collect::<Vec<_>>()
                .join(" ")
        }
    };
    let text = match cli.format {
        Format::Json => to_json_text(&json!({
            "space": space.descriptor(),
            "pairs": rows.iter().map(|(x, y, m, d)| json!({
                "from": x.to_string(),
                "to": y.to_string(),
                "morse": m.iter().map(|(deg, r)| json!({"degree": deg, "rank": r})).collect::<Vec<_>>(),
                "dg": d.iter().map(|(deg, r)| json!({"degree": deg, "rank": r})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "agree": agree,
        })),
        Format::Csv => {
            let mut s = String::from("from,to,morse,dg\n");
            for (x, y, m, d) in &rows {
                s += &csv_row(&[x.to_string(), y.to_string(), fmt_ranks(m), fmt_ranks(d)]);
            }
            s
        }
        Format::Pretty => {
            let mut s = String::new();
            for (x, y, m, d) in &rows {
                s += &format!("{} -> {}: {}", x, y, fmt_ranks(m));
                if m != d {
                    s += &format!("  (dg: {})", fmt_ranks(d));
                }
                s.push('\n');
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(agree)
}

fn run(cli: &Cli) -> Result<bool> {
    precision()?;
    match &cli.command {
        Command::Hom { space, from, to } => cmd_hom(cli, &parse_space(space)?, from, to),
        Command::Compose {
            space,
            triple,
            left,
            right,
        } => cmd_compose(
            cli,
            &parse_space(space)?,
            triple,
            left.as_ref(),
            right.as_ref(),
        ),
        Command::Table { space, range } => cmd_table(cli, &parse_space(space)?, range),
        Command::Verify { suite, n_max } => cmd_verify(cli, *suite, *n_max),
        Command::Plot { space, triple } => cmd_plot(cli, &parse_space(space)?, triple),
        Command::Dims { space, range } => cmd_dims(cli, &parse_space(space)?, range),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
