//! Command-line front end. Every command reads JSON (standard input or
//! `--input`), prints canonical JSON and exits with 0 (favorable verdict),
//! 1 (unfavorable verdict) or 2 (error).

use std::io::Read;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::arith::Place;
use crate::brauer::{curve_brauer_quotient, TruncationWindow};
use crate::builders::{build_cf, build_d, build_pencil};
use crate::curve::{validate_curve, ConicalCurve};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::forms::{analyze_form, construct_form_with_bound, BinaryForm, Verdict, DEFAULT_C_BOUND};
use crate::graph::{homology_action, IncidenceGraph};
use crate::hasse::{counterexample_report, sample_adelic_point, verify_tree_hasse, Classification};

pub const ENV_WINDOW_N: &str = "CONICAL_WINDOW_N";
pub const ENV_PLACES_MAX: &str = "CONICAL_PLACES_MAX";
pub const DEFAULT_WINDOW_N: u64 = 24;
pub const DEFAULT_PLACES_MAX: u64 = 50;
pub const DEFAULT_PRECISION: u32 = 5;

#[derive(Debug, Parser)]
#[command(name = "conical", version, about = "Arithmetic of conical curves over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Read the JSON input from this file instead of standard input.
    #[arg(long, global = true)]
    input: Option<String>,
    /// Torsion bound n of the truncation window.
    #[arg(long = "window-n", visible_alias = "n", global = true)]
    window_n: Option<u64>,
    /// The window contains the real place and all primes up to this bound.
    #[arg(long = "places-max", visible_alias = "smax", global = true)]
    places_max: Option<u64>,
    /// p-adic precision of sampled local points.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json, global = true)]
    out: OutFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Dot,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local and global solubility of a product of binary forms.
    CheckForm,
    /// Build the degree-8 counterexample form for {"a": .., "b": ..}.
    ConstructForm {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i128>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<i128>,
        /// Largest c tried.
        #[arg(long, default_value_t = DEFAULT_C_BOUND)]
        bound: u64,
    },
    /// Check the consistency of a curve model.
    CurveValidate,
    /// Incidence-graph invariants and homology action (or DOT).
    CurveGraph,
    /// Truncated Br(C) modulo the image of Br(Q).
    CurveBrauer,
    /// Local, adelic, rational points and the counterexample classification.
    CurveHasse,
    /// Rerun a worked example with built-in self-checks.
    PaperDemo {
        #[arg(value_enum)]
        which: Demo,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Demo {
    E1,
    #[value(name = "Cf")]
    Cf,
    #[value(name = "D")]
    D,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid_input",
        Error::NotOddPrime(_) => "not_odd_prime",
        Error::ZeroInput => "zero_input",
        Error::InsufficientProfile { .. } => "insufficient_profile",
        Error::Unsupported(_) => "unsupported",
        Error::Precondition(_) => "precondition",
        Error::SearchExhausted { .. } => "search_exhausted",
        Error::Defect(_) => "defect",
        Error::Json(_) => "json",
    }
}

/// Canonical rendering: sorted keys (serde_json's default map), two-space
/// indentation, trailing newline.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn error_output(e: &Error) -> (i32, String) {
    (
        2,
        canonical(&json!({"error": {"kind": error_kind(e), "message": e.to_string()}})),
    )
}

struct Settings {
    n: u64,
    places_max: u64,
    precision: u32,
}

fn env_default(name: &str, default: u64) -> Result<u64> {
    match std::env::var(name) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("{name} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(default),
    }
}

impl Settings {
    fn from(cli: &Cli) -> Result<Settings> {
        let n = match cli.window_n {
            Some(n) => n,
            None => env_default(ENV_WINDOW_N, DEFAULT_WINDOW_N)?,
        };
        let places_max = match cli.places_max {
            Some(m) => m,
            None => env_default(ENV_PLACES_MAX, DEFAULT_PLACES_MAX)?,
        };
        if n == 0 {
            return Err(Error::InvalidInput("the torsion bound must be positive".into()));
        }
        let precision = cli.precision.unwrap_or(DEFAULT_PRECISION);
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be positive".into()));
        }
        Ok(Settings { n, places_max, precision })
    }

    fn window(&self, c: &ConicalCurve) -> TruncationWindow {
        TruncationWindow::up_to(self.n, self.places_max, &c.bad_places())
    }
}

/// Run the CLI on the given arguments (including the program name); `stdin`
/// is read only by commands that take input.
pub fn run<I, S>(args: I, stdin: &mut dyn Read) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (0, e.to_string()),
                _ => error_output(&Error::InvalidInput(e.to_string())),
            };
        }
    };
    match dispatch(&cli, stdin) {
        Ok((code, Output::Json(v))) => (code, canonical(&v)),
        Ok((code, Output::Text(s))) => (code, s),
        Err(e) => error_output(&e),
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn read_input(cli: &Cli, stdin: &mut dyn Read) -> Result<Value> {
    let text = match &cli.input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}")))?,
        None => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::InvalidInput(format!("cannot read standard input: {e}")))?;
            s
        }
    };
    Ok(serde_json::from_str(&text)?)
}

fn read_curve(cli: &Cli, stdin: &mut dyn Read) -> Result<ConicalCurve> {
    ConicalCurve::from_json(&read_input(cli, stdin)?)
}

fn form_report(f: &BinaryForm) -> Result<(i32, Value)> {
    let report = analyze_form(f)?;
    let code = match report.verdict {
        Verdict::Soluble => 0,
        _ => 1,
    };
    let mut v = serde_json::to_value(&report)?;
    v["form"] = serde_json::to_value(f)?;
    v["expanded"] = json!(f.expanded());
    Ok((code, v))
}

fn graph_json(c: &ConicalCurve) -> Result<Value> {
    let g = IncidenceGraph::of_curve(c);
    let mut v = serde_json::to_value(g.invariants())?;
    v["homology_action"] = serde_json::to_value(homology_action(c)?)?;
    Ok(v)
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read) -> Result<(i32, Output)> {
    let settings = Settings::from(cli)?;
    let json_out = |(code, v): (i32, Value)| Ok((code, Output::Json(v)));
    match &cli.command {
        Command::CheckForm => {
            let f: BinaryForm = serde_json::from_value(read_input(cli, stdin)?)?;
            json_out(form_report(&f)?)
        }
        Command::ConstructForm { a, b, bound } => {
            let (a, b) = match (a, b) {
                (Some(a), Some(b)) => (*a, *b),
                _ => {
                    let v = read_input(cli, stdin)?;
                    let get = |k: &str| {
                        v[k].as_i64()
                            .map(i128::from)
                            .ok_or_else(|| Error::InvalidInput(format!("missing integer field {k:?}")))
                    };
                    (get("a")?, get("b")?)
                }
            };
            let f = construct_form_with_bound(a, b, *bound)?;
            let (_, mut v) = form_report(&f)?;
            v["c"] = json!(f.quadratic_classes()[3]);
            json_out((0, v))
        }
        Command::CurveValidate => {
            let c = read_curve(cli, stdin)?;
            let report = validate_curve(&c);
            json_out(((!report.valid) as i32, serde_json::to_value(&report)?))
        }
        Command::CurveGraph => {
            let c = read_curve(cli, stdin)?;
            let report = validate_curve(&c);
            if !report.valid {
                return Err(Error::Precondition(format!("invalid curve: {report}")));
            }
            match cli.out {
                OutFormat::Dot => Ok((0, Output::Text(IncidenceGraph::of_curve(&c).to_dot()))),
                OutFormat::Json => json_out((0, graph_json(&c)?)),
            }
        }
        Command::CurveBrauer => {
            let c = read_curve(cli, stdin)?;
            let q = curve_brauer_quotient(&c, &settings.window(&c))?;
            json_out(((q.quotient_dimension > 0) as i32, q.to_json(&c)))
        }
        Command::CurveHasse => {
            let c = read_curve(cli, stdin)?;
            let r = counterexample_report(&c, &settings.window(&c))?;
            let code = (r.classification != Classification::HasRationalPoints) as i32;
            json_out((code, serde_json::to_value(&r)?))
        }
        Command::PaperDemo { which } => json_out(demo(*which, &settings)?),
    }
}

fn self_check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Defect(format!("demo self-check failed: {what}")))
    }
}

fn sextic() -> BinaryForm {
    BinaryForm::quadratic_product(&[2, 17, 34]).expect("valid form")
}

fn demo(which: Demo, s: &Settings) -> Result<(i32, Value)> {
    match which {
        Demo::E1 => {
            let (code, v) = form_report(&sextic())?;
            self_check(v["verdict"] == "counterexample", "(x²−2y²)(x²−17y²)(x²−34y²) violates the Hasse principle")?;
            Ok((code, v))
        }
        Demo::Cf => {
            let f = sextic();
            let c = build_cf(&f)?;
            self_check(validate_curve(&c).valid, "C^f validates")?;
            let tree = verify_tree_hasse(&c)?;
            self_check(
                serde_json::to_value(&tree.witness)? == json!({"kind": "singular_point", "orbit": "P"}),
                "the rational point of C^f is the singular point P",
            )?;
            let mut places = vec![Place::Real];
            places.extend(crate::arith::primes_up_to(s.places_max).into_iter().map(Place::Finite));
            let sample = sample_adelic_point(&f, &places, s.precision)?;
            Ok((
                0,
                json!({
                    "form": f.expanded(),
                    "curve": c.to_json(),
                    "graph": graph_json(&c)?,
                    "tree_hasse": tree,
                    "adelic_sample": sample,
                }),
            ))
        }
        Demo::D => {
            let f = sextic();
            let (l, ff) = (FieldSpec::quadratic(5)?, FieldSpec::cubic_x3_x_1());
            let c = build_d(&f, &l, &ff)?;
            let w = TruncationWindow::up_to(s.n, s.places_max, &c.bad_places());
            let r = counterexample_report(&c, &w)?;
            self_check(
                matches!(
                    r.classification,
                    Classification::CounterexampleWithTrivialTruncatedBrauer { .. }
                ),
                "D is a counterexample with trivial truncated Brauer quotient",
            )?;
            let graph = graph_json(&c)?;
            self_check(graph["h1_rank"] == 20, "h1(X(D)) = 20")?;
            let pencil = build_pencil(&f, &l, &ff)?;
            let mut v = serde_json::to_value(&r)?;
            v["curve"] = c.to_json();
            v["graph"] = json!({
                "vertices": graph["vertices"], "edges": graph["edges"],
                "is_tree": graph["is_tree"], "h1_rank": graph["h1_rank"],
            });
            v["pencil"] = pencil.to_json();
            Ok((1, v))
        }
    }
}
