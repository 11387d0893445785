//! `lipgauge`: JSON reports for gauges, cores, Lipschitz certificates,
//! subdifferentials and the bundled examples.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use lipgauge::calculus_rules::{curated_fixtures, RULES};
use lipgauge::convex_geometry::{check_symmetry, span_of_difference, ConvexSet, Gauge, Vector};
use lipgauge::document::{core_to_json, point_from_str, set_from_str};
use lipgauge::error::Error;
use lipgauge::function::ScalarFunction;
use lipgauge::l2_examples::{self, WeightedGrid, EXAMPLES};
use lipgauge::lipschitz::{self, LipschitzConfig};
use lipgauge::registry;
use lipgauge::subdifferential::{fermat_check, lebourg_point, subdifferential_hull};
use lipgauge::symmetrization::SublevelCore;

#[derive(Parser, Debug)]
#[command(name = "lipgauge", version, about = "Gauge-relative Lipschitz and subdifferential checks")]
struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Pass/fail tolerance for the selected check (command-specific default).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cells of the weighted grid used by grid functions and `l2demo`.
    #[arg(long = "grid-n", global = true, default_value_t = 1000)]
    grid_n: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the gauge of a centred set at points.
    Gauge {
        /// Set document (file path or inline JSON); must have a centre.
        #[arg(long)]
        set: String,
        /// Point as a JSON array; repeatable.
        #[arg(long = "point", required = true)]
        points: Vec<String>,
    },
    /// Build the sublevel set and its symmetric core about a point.
    Core {
        /// Registry name or expression.
        #[arg(long = "fn")]
        function: String,
        /// Domain set document.
        #[arg(long)]
        set: String,
        /// Core centre `x0`.
        #[arg(long)]
        point: String,
        /// Sublevel `A` (default `f(x0) + 1`).
        #[arg(long)]
        level: Option<f64>,
    },
    /// Lipschitz certificates on `eps (C - p) + p`. Without `--set`, a grid
    /// function is certified on its own unit-sublevel core.
    Lipschitz {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        set: Option<String>,
        /// Centre `p` of the symmetric set.
        #[arg(long)]
        point: Option<String>,
        /// Ratios in (0, 1); repeatable.
        #[arg(long = "eps", default_values_t = vec![0.25, 0.5, 0.9])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = lipschitz::DEFAULT_PAIRS)]
        pairs: usize,
    },
    /// Support values and extreme subgradients at a point.
    Subdiff {
        #[arg(long = "fn")]
        function: String,
        /// Gauge set document (centred).
        #[arg(long)]
        set: String,
        #[arg(long)]
        point: String,
        /// Number of extraction objectives.
        #[arg(long, default_value_t = 8)]
        objectives: usize,
    },
    /// Mean-value point on the segment between two points.
    Lebourg {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        set: String,
        /// The two endpoints, `--point X --point Y`.
        #[arg(long = "point", num_args = 1, required = true)]
        points: Vec<String>,
    },
    /// Check that `0` is a subgradient at a sampled extremum.
    Fermat {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        point: String,
        /// Neighbourhood ratio.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Run the curated fixtures of a calculus rule (or `all`).
    Verify { rule: String },
    /// Run one weighted-grid example (`closed_form` and `certificate` too).
    L2demo { example: String },
    /// Reproduce the four counterexamples.
    Counterexamples,
    /// List registry functions.
    Functions,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Document(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Expr(_)
            | Error::MissingCenter
            | Error::NotAMember(_)
            | Error::NotSerializable(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn read_set(arg: &str) -> Result<ConvexSet, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("cannot read {arg}: {e}")))?
    };
    Ok(set_from_str(&text)?)
}

fn read_point(arg: &str) -> Result<Vector, Failure> {
    Ok(point_from_str(arg)?)
}

fn function(input: &str, dim: Option<usize>, grid_n: usize) -> Result<ScalarFunction, Failure> {
    let grid_entry = matches!(registry::entry(input).map(|e| e.source), Some(registry::Source::Grid(_)));
    let dim = if grid_entry { Some(grid_n) } else { dim };
    Ok(registry::resolve(input, dim)?)
}

fn centred_gauge(set: ConvexSet) -> Result<Gauge, Failure> {
    if set.center().is_none() {
        return Err(Failure::Usage("the set needs a \"center\"".into()));
    }
    Ok(Gauge::new(set)?)
}

fn list(v: &Vector) -> Value {
    json!(v.as_slice())
}

fn gauge_cmd(set: &str, points: &[String]) -> Outcome {
    let g = centred_gauge(read_set(set)?)?;
    let values = points
        .iter()
        .map(|p| Ok(g.eval(&read_point(p)?)?))
        .collect::<Result<Vec<f64>, Failure>>()?;
    let doc = if values.len() == 1 {
        json!({ "gauge": values[0] })
    } else {
        json!({ "gauges": values })
    };
    Ok((doc, true))
}

fn core_cmd(cli: &Cli, func: &str, set: &str, point: &str, level: Option<f64>) -> Outcome {
    let domain = read_set(set)?;
    let f = function(func, Some(domain.dim()), cli.grid_n)?;
    let x0 = read_point(point)?;
    let core = SublevelCore::build(&f, &domain, &x0, level)?;
    let span_s = span_of_difference(&core.s_a, &x0)?;
    let span_c = span_of_difference(&core.c_a, &x0)?;
    let spans = core.verify_span_equality();
    let icr = core.verify_icr_membership();
    let symmetric = check_symmetry(&core.c_a, &x0, 200)?;
    let doc = json!({
        "core": core_to_json(&core).ok(),
        "level": core.level,
        "x0": list(&x0),
        "span_dim_sublevel": span_s.dim(),
        "span_dim_core": span_c.dim(),
        "span_equal": spans,
        "x0_in_icr": icr,
        "core_symmetric": symmetric,
    });
    Ok((doc, spans && icr && symmetric))
}

fn lipschitz_cmd(cli: &Cli, func: &str, set: Option<&str>, point: Option<&str>, eps: &[f64], pairs: usize) -> Outcome {
    let tol = cli.tol.unwrap_or(1e-6);
    let mut certs = Vec::new();
    let mut ok = true;
    match (set, point) {
        (Some(set), Some(point)) => {
            let c = read_set(set)?;
            let f = function(func, Some(c.dim()), cli.grid_n)?;
            let p = read_point(point)?;
            let cfg = LipschitzConfig {
                m_samples: None,
                pairs,
                seed: cli.seed,
            };
            for &e in eps {
                let cert = lipschitz::theoretical_constant_with(&f, &c, &p, e, &cfg)?;
                let holds = !cert.theoretical_l.is_finite() || cert.empirical_l <= cert.theoretical_l * (1.0 + tol) + 1e-12;
                ok &= holds;
                let mut j = cert.to_json();
                j["holds"] = json!(holds);
                certs.push(j);
            }
        }
        (None, None) => {
            if func != "phi_l2" {
                return Err(Failure::Usage("--set and --point are required unless --fn phi_l2".into()));
            }
            let grid = WeightedGrid::midpoint(cli.grid_n)?;
            for &e in eps {
                let cert = l2_examples::l2_certificate(&grid, e, pairs, cli.seed)?;
                let holds = cert.empirical_l <= cert.theoretical_l * (1.0 + tol) + 1e-12;
                ok &= holds;
                let mut j = cert.to_json();
                j["holds"] = json!(holds);
                certs.push(j);
            }
        }
        _ => return Err(Failure::Usage("--set and --point go together".into())),
    }
    Ok((json!({ "function": func, "certificates": certs, "holds": ok }), ok))
}

fn subdiff_cmd(cli: &Cli, func: &str, set: &str, point: &str, objectives: usize) -> Outcome {
    let g = centred_gauge(read_set(set)?)?;
    let f = function(func, Some(g.dim()), cli.grid_n)?;
    let x = read_point(point)?;
    let hull = subdifferential_hull(&f, &g, &x, objectives)?;
    let tol = cli.tol.unwrap_or(1e-5);
    let ok = hull.max_violation() <= tol;
    let mut doc = hull.to_json();
    doc["max_violation"] = json!(hull.max_violation());
    Ok((doc, ok))
}

fn lebourg_cmd(cli: &Cli, func: &str, set: &str, points: &[String]) -> Outcome {
    if points.len() != 2 {
        return Err(Failure::Usage("lebourg needs exactly two --point values".into()));
    }
    let g = centred_gauge(read_set(set)?)?;
    let f = function(func, Some(g.dim()), cli.grid_n)?;
    let (x, y) = (read_point(&points[0])?, read_point(&points[1])?);
    let lp = lebourg_point(&f, &g, &x, &y)?;
    let doc = json!({
        "alpha": lp.alpha,
        "z": list(&lp.z),
        "zeta": list(&lp.zeta),
        "residual": lp.residual,
        "kernel_case": lp.kernel_case,
    });
    Ok((doc, true))
}

fn fermat_cmd(cli: &Cli, func: &str, set: &str, point: &str, eps: f64) -> Outcome {
    let g = centred_gauge(read_set(set)?)?;
    let f = function(func, Some(g.dim()), cli.grid_n)?;
    let u = read_point(point)?;
    match fermat_check(&f, &g, &u, eps) {
        Ok(holds) => Ok((json!({ "point": list(&u), "extremal": true, "zero_in_subdifferential": holds }), holds)),
        Err(Error::NotExtremal) => Ok((
            json!({ "point": list(&u), "extremal": false, "zero_in_subdifferential": null }),
            false,
        )),
        Err(e) => Err(e.into()),
    }
}

fn verify_cmd(rule: &str) -> Outcome {
    if rule != "all" && !RULES.contains(&rule) {
        return Err(Failure::Usage(format!("unknown rule '{rule}' (expected all or one of {})", RULES.join(", "))));
    }
    let mut cases = Vec::new();
    let mut ok = true;
    for case in curated_fixtures().into_iter().filter(|c| rule == "all" || c.rule == rule) {
        let report = case.run()?;
        let as_expected = report.inclusion_holds() && report.equality_holds() == case.expect_equality;
        ok &= as_expected;
        cases.push(json!({
            "case": case.name,
            "expect_equality": case.expect_equality,
            "as_expected": as_expected,
            "report": report.to_json(),
        }));
    }
    Ok((json!({ "rule": rule, "cases": cases, "passed": ok }), ok))
}

fn l2demo_cmd(cli: &Cli, example: &str) -> Outcome {
    let grid = WeightedGrid::midpoint(cli.grid_n)?;
    let doc = match example {
        "closed_form" => l2_examples::closed_form_report(&grid)?,
        "certificate" => {
            let cert = l2_examples::l2_certificate(&grid, 0.5, lipschitz::DEFAULT_PAIRS, cli.seed)?;
            let mut j = cert.to_json();
            j["passed"] = json!(cert.holds());
            j
        }
        name if EXAMPLES.contains(&name) => l2_examples::run_example(name, &grid, cli.seed)?,
        other => {
            return Err(Failure::Usage(format!(
                "unknown example '{other}' (expected closed_form, certificate or one of {})",
                EXAMPLES.join(", ")
            )))
        }
    };
    let ok = doc["passed"] == true;
    Ok((doc, ok))
}

fn functions_cmd() -> Outcome {
    let entries: Vec<Value> = registry::entries()
        .iter()
        .map(|e| {
            let (kind, dim) = match e.source {
                registry::Source::Expr { src, dim } => (json!({ "expr": src }), json!(dim)),
                registry::Source::Grid(_) => (json!("grid"), json!("grid-n")),
            };
            json!({ "name": e.name, "description": e.description, "source": kind, "dim": dim })
        })
        .collect();
    Ok((json!({ "functions": entries }), true))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Gauge { set, points } => gauge_cmd(set, points),
        Command::Core {
            function,
            set,
            point,
            level,
        } => core_cmd(cli, function, set, point, *level),
        Command::Lipschitz {
            function,
            set,
            point,
            eps,
            pairs,
        } => lipschitz_cmd(cli, function, set.as_deref(), point.as_deref(), eps, *pairs),
        Command::Subdiff {
            function,
            set,
            point,
            objectives,
        } => subdiff_cmd(cli, function, set, point, *objectives),
        Command::Lebourg { function, set, points } => lebourg_cmd(cli, function, set, points),
        Command::Fermat {
            function,
            set,
            point,
            eps,
        } => fermat_cmd(cli, function, set, point, *eps),
        Command::Verify { rule } => verify_cmd(rule),
        Command::L2demo { example } => l2demo_cmd(cli, example),
        Command::Counterexamples => {
            let doc = lipschitz::counterexample_suite()?;
            let ok = doc["all_reproduced"] == true;
            Ok((doc, ok))
        }
        Command::Functions => functions_cmd(),
    }
}

fn emit(cli: &Cli, doc: &Value) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| e.to_string())?;
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((doc, ok)) => {
            if let Err(e) = emit(&cli, &doc) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
