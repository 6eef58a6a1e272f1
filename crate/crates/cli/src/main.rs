//! asymcop: axiom checks, asymmetry measures, order comparisons, dyadic
//! good/bad decompositions, parameter sweeps, and the Cobb-Douglas case
//! study, from the command line.
//!
//! Exit codes: 0 success, 1 axiom-check failure, 2 usage or validation
//! error.

mod output;
mod specref;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use asymcop::families;
use asymcop::{
    bracket, compare_order, cz_decompose, distinct_classes, equivalent, most_symmetric, mu_p,
    tolerance_compare, verify_axioms_seeded, AnySpec, CopulaSpec, Grid, GridFunction, Measurable,
    PExponent,
};

use output::{emit, render_json, OutputFormat};
use specref::{parse_spec_ref, FamilyArgs};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "asymcop",
    version,
    about = "Copula asymmetry toolkit: axiom checks, bracket measures, dyadic decompositions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Grid resolution (power of two, 4..=4096). Defaults to 256
    /// (1024 for paper-example).
    #[arg(short = 'n', long, global = true)]
    n: Option<usize>,

    /// Axiom/comparison tolerance; auto-selected per spec kind when omitted.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol: Option<f64>,

    /// Norm exponent: a number >= 1 or "inf".
    #[arg(short, long, global = true, default_value = "1")]
    p: String,

    /// Threshold for decompositions (cz: any t > 0; tolerance mode:
    /// 0 < t < 1). Defaults to 1.
    #[arg(short, long, global = true, allow_negative_numbers = true)]
    t: Option<f64>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized checks (Lipschitz pair sampling).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the copula axioms of a spec on a grid.
    Check {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Compute the asymmetry measure mu_p of a spec.
    Measure {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Compare two specs under the symmetry preorder, bracket equality, or
    /// the tolerance order.
    Compare {
        /// order | equiv | tolerance
        #[arg(long, default_value = "order")]
        mode: String,
        /// First spec reference (family[:param] or @file.json).
        spec_a: String,
        /// Second spec reference.
        spec_b: String,
        /// Replace the second spec by its transpose before comparing.
        #[arg(long)]
        transpose_second: bool,
    },
    /// Dyadic good/bad decomposition of a grid function or a spec bracket.
    Cz {
        /// Grid-function file (.csv or .json) to decompose.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        /// Write the good part as a grid-function CSV.
        #[arg(long)]
        dump_good: Option<PathBuf>,
        /// Write the bad part as a grid-function CSV.
        #[arg(long)]
        dump_bad: Option<PathBuf>,
    },
    /// Scan a one-parameter family for its most symmetric member.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        /// Parameter range "lo:hi".
        #[arg(long)]
        range: String,
    },
    /// Build the empirical copula of a CSV sample and measure it.
    Empirical {
        /// Sample file with comma-separated columns.
        path: PathBuf,
        /// x column: 0-based index or header name.
        #[arg(long, default_value = "0")]
        x_col: String,
        /// y column: 0-based index or header name.
        #[arg(long, default_value = "1")]
        y_col: String,
        /// Also write the tabulated copula spec as JSON.
        #[arg(long)]
        save_spec: Option<PathBuf>,
    },
    /// Run the Cobb-Douglas case study end to end and emit its report.
    PaperExample {
        /// Cobb-Douglas exponent.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_grid(n: Option<usize>, default_n: usize) -> Result<Grid> {
    let n = n.unwrap_or(default_n);
    if !(4..=4096).contains(&n) || !n.is_power_of_two() {
        bail!("resolution must be a power of two between 4 and 4096, got {n}");
    }
    Ok(Grid::new(n)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let p = PExponent::parse(&cli.p)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Check { family } => {
            let grid = parse_grid(cli.n, 256)?;
            let spec = family.resolve()?;
            let tol = cli
                .tol
                .unwrap_or_else(|| spec.measurable_part().default_axiom_tol(grid));
            if tol <= 0.0 {
                bail!("tolerance must be positive, got {tol}");
            }
            let report = verify_axioms_seeded(spec.measurable_part(), grid, tol, cli.seed)?;
            let text = match cli.format {
                OutputFormat::Json => {
                    let mut doc = report.to_json_value();
                    let map = doc.as_object_mut().expect("report is an object");
                    map.insert("schema".into(), json!(SCHEMA_VERSION));
                    map.insert("spec".into(), json!(family.label()));
                    map.insert("n".into(), json!(grid.n()));
                    map.insert("ae_only".into(), json!(spec.ae_only()));
                    render_json(&doc)
                }
                _ => {
                    let mut lines = format!(
                        "axiom check: {} (n={}, tol={:e})\n",
                        family.label(),
                        grid.n(),
                        tol
                    );
                    let verdict = |pass: bool| if pass { "pass" } else { "FAIL" };
                    lines += &format!(
                        "  grounded:       {} (worst {:.3e})\n",
                        verdict(report.grounded.pass),
                        report.grounded.worst
                    );
                    lines += &format!(
                        "  margins:        {} (worst {:.3e})\n",
                        verdict(report.margins.pass),
                        report.margins.worst
                    );
                    lines += &format!(
                        "  two-increasing: {} (worst {:.3e})\n",
                        verdict(report.two_increasing.pass),
                        report.two_increasing.worst
                    );
                    lines += &format!(
                        "  lipschitz:      {} (worst excess {:.3e})\n",
                        verdict(report.lipschitz.pass),
                        report.lipschitz.worst
                    );
                    lines += &format!(
                        "  fh-envelope:    {} (worst {:.3e})\n",
                        verdict(report.fh_envelope.pass),
                        report.fh_envelope.worst
                    );
                    lines += &format!("overall: {}\n", verdict(report.all_pass()));
                    lines
                }
            };
            emit(&text, out)?;
            Ok(if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }

        Command::Measure { family } => {
            let grid = parse_grid(cli.n, 256)?;
            let spec = family.resolve()?;
            let value = mu_p(&spec, p, grid)?;
            let doc = json!({
                "schema": SCHEMA_VERSION,
                "spec": family.label(),
                "n": grid.n(),
                "p": p.to_string(),
                "mu_p": value,
                "ae_only": spec.ae_only(),
            });
            let text = match cli.format {
                OutputFormat::Json => render_json(&doc),
                _ => format!(
                    "mu_{p} = {value:.17e}  (spec {}, n={}{})\n",
                    family.label(),
                    grid.n(),
                    if spec.ae_only() {
                        ", valid a.e. only"
                    } else {
                        ""
                    }
                ),
            };
            emit(&text, out)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Compare {
            mode,
            spec_a,
            spec_b,
            transpose_second,
        } => {
            let grid = parse_grid(cli.n, 256)?;
            let a = parse_spec_ref(&spec_a)?;
            let mut b = parse_spec_ref(&spec_b)?;
            if transpose_second {
                b = match b {
                    AnySpec::Copula(c) => AnySpec::Copula(c.transpose()),
                    AnySpec::Subcopula(s) => AnySpec::Subcopula(s.transpose()),
                };
            }
            let ae_only = a.ae_only() || b.ae_only();
            let default_tol = a
                .measurable_part()
                .default_axiom_tol(grid)
                .max(b.measurable_part().default_axiom_tol(grid));
            let tol = cli.tol.unwrap_or(default_tol);
            let doc = match mode.as_str() {
                "order" => {
                    let verdict = compare_order(&a, &b, grid, tol)?;
                    let mut doc = verdict.to_json_value();
                    let map = doc.as_object_mut().expect("verdict is an object");
                    map.insert("mode".into(), json!("order"));
                    doc
                }
                "equiv" => {
                    let eq = equivalent(&a, &b, grid, tol)?;
                    json!({
                        "mode": "equiv",
                        "equivalent": eq.equivalent,
                        "sup_deviation": eq.sup_deviation,
                        "tol": tol,
                    })
                }
                "tolerance" => {
                    let t = cli.t.unwrap_or(1.0);
                    let verdict = tolerance_compare(&a, &b, t, p, grid)?;
                    let mut doc = verdict.to_json_value();
                    let map = doc.as_object_mut().expect("verdict is an object");
                    map.insert("mode".into(), json!("tolerance"));
                    doc
                }
                other => bail!("unknown mode '{other}'; expected order, equiv, or tolerance"),
            };
            let mut doc = doc;
            let map = doc.as_object_mut().expect("comparison doc is an object");
            map.insert("schema".into(), json!(SCHEMA_VERSION));
            map.insert("first".into(), json!(spec_a));
            map.insert(
                "second".into(),
                json!(if transpose_second {
                    format!("transpose({spec_b})")
                } else {
                    spec_b.clone()
                }),
            );
            map.insert("n".into(), json!(grid.n()));
            map.insert("valid_ae_only".into(), json!(ae_only));
            let text = match cli.format {
                OutputFormat::Json => render_json(&doc),
                _ => {
                    let headline = doc
                        .get("relation")
                        .or_else(|| doc.get("equivalent"))
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    format!("{mode}: {headline}\n{}", render_json(&doc))
                }
            };
            emit(&text, out)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Cz {
            input,
            family,
            dump_good,
            dump_bad,
        } => {
            let t = cli.t.unwrap_or(1.0);
            let f = match (&input, family.family.is_some() || family.spec.is_some()) {
                (Some(path), false) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    if path.extension().and_then(|e| e.to_str()) == Some("json") {
                        GridFunction::from_json(&text)?
                    } else {
                        GridFunction::from_csv(&text)?
                    }
                }
                (None, true) => {
                    let grid = parse_grid(cli.n, 256)?;
                    bracket(&family.resolve()?, grid)?
                }
                (Some(_), true) => bail!("pass either --input or a spec, not both"),
                (None, false) => bail!("cz needs --input <file> or a spec (--family/--spec)"),
            };
            let decomposition = cz_decompose(&f, t)?;
            if let Some(path) = dump_good {
                emit(&decomposition.good().to_csv(), Some(&path))?;
            }
            if let Some(path) = dump_bad {
                emit(&decomposition.bad().to_csv(), Some(&path))?;
            }
            let mut doc = decomposition.to_json_value();
            let map = doc.as_object_mut().expect("decomposition is an object");
            map.insert("schema".into(), json!(SCHEMA_VERSION));
            map.insert("n".into(), json!(f.grid().n()));
            let text = match cli.format {
                OutputFormat::Json => render_json(&doc),
                _ => format!(
                    "squares: {}, area: {}, l1(f): {:.6e}, l1(g): {:.6e}, l1(b): {:.6e}\n",
                    decomposition.squares().len(),
                    decomposition.area_union(),
                    decomposition.input_l1(),
                    decomposition.good_l1(),
                    decomposition.bad_l1(),
                ),
            };
            emit(&text, out)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Sweep { family, range } => {
            let grid = parse_grid(cli.n, 256)?;
            let (lo, hi) = range
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)))
                .ok_or_else(|| anyhow!("--range must look like lo:hi, got '{range}'"))?;
            let name = family
                .family
                .clone()
                .ok_or_else(|| anyhow!("sweep needs --family <name>"))?;
            let fixed = family.param_map();
            let param_family = families::param_family(&name, &fixed)?;
            let result = most_symmetric(&param_family, lo, hi, p, grid)?;
            let mut summary = result.summary_json();
            let map = summary.as_object_mut().expect("summary is an object");
            map.insert("schema".into(), json!(SCHEMA_VERSION));
            map.insert("family".into(), json!(result.family));
            map.insert("param".into(), json!(result.param));
            map.insert("n".into(), json!(grid.n()));
            match (&cli.out, cli.format) {
                // --out BASE writes BASE.csv (scan table) and BASE.json
                (Some(base), _) => {
                    let csv_path = base.with_extension("csv");
                    let json_path = base.with_extension("json");
                    emit(&result.to_csv(), Some(&csv_path))?;
                    emit(&render_json(&summary), Some(&json_path))?;
                    println!("wrote {} and {}", csv_path.display(), json_path.display());
                }
                (None, OutputFormat::Csv) => emit(&result.to_csv(), None)?,
                (None, OutputFormat::Json) => {
                    let mut full = result.to_json_value();
                    let map = full.as_object_mut().expect("sweep doc is an object");
                    map.insert("schema".into(), json!(SCHEMA_VERSION));
                    map.insert("n".into(), json!(grid.n()));
                    emit(&render_json(&full), None)?;
                }
                (None, OutputFormat::Text) => {
                    emit(
                        &format!(
                            "argmin {} = {} with mu_{} = {:.6e} ({} evaluations{})\n",
                            result.param,
                            result.argmin_param,
                            p,
                            result.argmin_value,
                            result.evaluations,
                            if result.non_unimodal {
                                ", non-unimodal scan"
                            } else {
                                ""
                            }
                        ),
                        None,
                    )?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Empirical {
            path,
            x_col,
            y_col,
            save_spec,
        } => {
            let grid = parse_grid(cli.n, 256)?;
            let sample = asymcop::load_csv(
                &path,
                &asymcop::ColumnSelector::parse(&x_col),
                &asymcop::ColumnSelector::parse(&y_col),
            )?;
            let copula = asymcop::empirical_copula(&sample, grid)?;
            if let Some(spec_path) = save_spec {
                let doc = copula.to_json_value()?;
                emit(&render_json(&doc), Some(&spec_path))?;
            }
            let value = mu_p(&copula, p, grid)?;
            let doc = json!({
                "schema": SCHEMA_VERSION,
                "input": path.display().to_string(),
                "m": sample.len(),
                "n": grid.n(),
                "p": p.to_string(),
                "mu_p": value,
            });
            let text = match cli.format {
                OutputFormat::Json => render_json(&doc),
                _ => format!(
                    "mu_{p} = {value:.17e}  (empirical copula of {} samples, n={})\n",
                    sample.len(),
                    grid.n()
                ),
            };
            emit(&text, out)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::PaperExample { alpha } => {
            let grid = parse_grid(cli.n, 1024)?;
            let doc = paper_example(alpha, grid, p)?;
            let text = match cli.format {
                OutputFormat::Json => render_json(&doc),
                _ => {
                    format!(
                        "Cobb-Douglas case study (alpha={alpha}, n={})\n\
                         mu_1(C) = {}\nmu_1(D) = {}\n\
                         product vs C: {}\nproduct vs D: {}\n\
                         classes of [product, C(0.25), C(0.5)]: {}\n\
                         tolerance verdict at t=0.5: {} (paper orientation: {})\n\
                         verdicts valid a.e. only: {}\n",
                        grid.n(),
                        doc["mu1_c"],
                        doc["mu1_d"],
                        doc["order_product_vs_c"]["relation"],
                        doc["order_product_vs_d"]["relation"],
                        doc["classes"]["count"],
                        doc["tolerance"]["relation"],
                        doc["tolerance"]["paper_orientation"],
                        doc["valid_ae_only"],
                    )
                }
            };
            emit(&text, out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// The full case-study pipeline: measures for C and D, order facts against
/// the product copula, the three-class separation, and the tolerance
/// verdict. Classes are always computed at n = 256, tol 1e-3; measures use
/// the configured grid.
fn paper_example(alpha: f64, grid: Grid, p: PExponent) -> Result<serde_json::Value> {
    let c = families::make_cobb_douglas_c(alpha)?;
    let d = families::make_cobb_douglas_d(alpha)?;
    let product = CopulaSpec::Product;

    let mu1_c = mu_p(&c, PExponent::ONE, grid)?;
    let mu1_d = mu_p(&d, PExponent::ONE, grid)?;
    let mu_p_c = mu_p(&c, p, grid)?;

    let order_tol = 1e-9;
    let vs_c = compare_order(&product, &c, grid, order_tol)?;
    let vs_d = compare_order(&product, &d, grid, order_tol)?;

    let class_grid = Grid::new(256)?;
    let classes = distinct_classes(
        &[
            AnySpec::Copula(product.clone()),
            AnySpec::from(families::make_cobb_douglas_c(0.25)?),
            AnySpec::from(families::make_cobb_douglas_c(0.5)?),
        ],
        class_grid,
        1e-3,
    )?;
    let mut classes_doc = classes.to_json_value();
    classes_doc
        .as_object_mut()
        .expect("classes doc is an object")
        .insert("n".into(), json!(class_grid.n()));

    let tolerance = tolerance_compare(&c, &d, 0.5, PExponent::ONE, grid)?;

    Ok(json!({
        "schema": SCHEMA_VERSION,
        "alpha": alpha,
        "n": grid.n(),
        "p": p.to_string(),
        "mu1_c": mu1_c,
        "mu1_d": mu1_d,
        "mu_p_c": mu_p_c,
        "order_product_vs_c": vs_c.to_json_value(),
        "order_product_vs_d": vs_d.to_json_value(),
        "classes": classes_doc,
        "tolerance": tolerance.to_json_value(),
        "valid_ae_only": c.ae_only() || d.ae_only(),
    }))
}
