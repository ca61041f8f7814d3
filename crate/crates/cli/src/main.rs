use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use qval::lemmas::{run_check, standard_family, Check, SuiteConfig};
use qval::quasival::{check_axioms, QuasiValuation};
use qval::report::Report;
use qval::sample::{seeded_rng, ElemSampler};
use qval::topology::{separation_witness, Ball};
use qval::{Error, FieldElem};

/// Quasi-valuations on Q and Q(sqrt d): evaluation, balls, property checks
/// and weak approximation.
#[derive(Parser, Debug)]
#[command(name = "qval", version)]
struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    format: Format,

    /// Cap on the p-adic digits used to evaluate split extensions.
    #[arg(long, global = true, env = "QVAL_PRECISION_CAP")]
    precision_cap: Option<u32>,

    /// TOML file; `hensel_precision_cap` applies when neither the flag nor
    /// QVAL_PRECISION_CAP is set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value of the quasi-valuation at each expression.
    Eval {
        #[arg(long)]
        qv: String,
        #[arg(required = true, allow_hyphen_values = true)]
        exprs: Vec<String>,
    },
    /// Membership of each expression in the ball around --center.
    Ball {
        #[arg(long)]
        qv: String,
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long, allow_hyphen_values = true)]
        bound: String,
        /// Use w(y - x) >= bound instead of > bound.
        #[arg(long)]
        closed: bool,
        #[arg(required = true, allow_hyphen_values = true)]
        exprs: Vec<String>,
    },
    /// Random check of the quasi-valuation axioms.
    Axioms {
        #[arg(long)]
        qv: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Two disjoint open balls around distinct points.
    Separate {
        #[arg(long)]
        qv: String,
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(allow_hyphen_values = true)]
        y: String,
    },
    /// Solve a weak approximation problem given as JSON.
    Approx {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Sampling check of a topological property (name, numeric id, or `all`).
    Lemma {
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Default, Deserialize)]
struct Config {
    hensel_precision_cap: Option<u32>,
}

enum Failure {
    Usage(String),
    Property(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Property(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

struct Ctx {
    format: Format,
    precision_cap: Option<u32>,
}

impl Ctx {
    fn qv(&self, spec: &str) -> Result<QuasiValuation, Failure> {
        let w = qval::qvspec::parse_qv(spec).map_err(|e| Failure::Usage(format!("--qv {spec:?}: {e}")))?;
        Ok(match self.precision_cap {
            Some(cap) => w.with_precision_cap(cap),
            None => w,
        })
    }

    fn elem(&self, w: &QuasiValuation, text: &str) -> Result<FieldElem, Failure> {
        let x = qval::expr::parse_elem(text).map_err(|e| Failure::Usage(format!("{text:?}: {e}")))?;
        x.in_field(w.field())
            .map_err(|e| Failure::Usage(format!("{text:?}: {e}")))
    }

    fn json(&self, v: serde_json::Value) -> String {
        serde_json::to_string_pretty(&v).expect("json serializes")
    }
}

fn trim_one(q: &str) -> String {
    q.strip_suffix("/1").unwrap_or(q).to_owned()
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{s:<w$}", w = widths[i]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out.trim_end().to_owned()
}

fn report_output(ctx: &Ctx, reports: &[Report]) -> Outcome {
    let as_json = || match reports {
        [one] => one.to_json(),
        many => serde_json::to_string_pretty(many).expect("json serializes"),
    };
    let text = match ctx.format {
        Format::Json => as_json(),
        Format::Table => {
            let mut rows = vec![vec![
                "check".into(),
                "instances".into(),
                "assertions".into(),
                "failures".into(),
                "seed".into(),
            ]];
            for report in reports {
                rows.push(vec![
                    report.lemma.clone(),
                    report.instances.to_string(),
                    report.checks.to_string(),
                    report.failure_count.to_string(),
                    report.seed.map(|s| s.to_string()).unwrap_or_default(),
                ]);
            }
            for report in reports {
                for f in &report.failures {
                    let inputs: Vec<String> = f.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    rows.push(vec![
                        format!("failure in {}", report.lemma),
                        inputs.join(" "),
                        format!("expected {}", f.expected),
                        format!("got {}", f.got),
                    ]);
                }
            }
            table(&rows)
        }
    };
    if reports.iter().all(Report::passed) {
        Ok(text)
    } else {
        // Failures always carry the machine-readable counterexamples.
        Err(Failure::Property(match ctx.format {
            Format::Json => text,
            Format::Table => format!("{text}\n{}", as_json()),
        }))
    }
}

fn run(ctx: &Ctx, command: Command) -> Outcome {
    match command {
        Command::Eval { qv, exprs } => {
            let w = ctx.qv(&qv)?;
            let mut rows = Vec::new();
            for e in &exprs {
                let x = ctx.elem(&w, e)?;
                rows.push((e.clone(), x.clone(), w.eval(&x)?));
            }
            Ok(match ctx.format {
                Format::Json => ctx.json(json!(rows
                    .iter()
                    .map(|(e, x, v)| json!({"expr": e, "x": x.to_string(), "value": v.to_fraction_string()}))
                    .collect::<Vec<_>>())),
                Format::Table if rows.len() == 1 => rows[0].2.to_string(),
                Format::Table => table(
                    &rows
                        .iter()
                        .map(|(e, _, v)| vec![e.clone(), v.to_string()])
                        .collect::<Vec<_>>(),
                ),
            })
        }
        Command::Ball {
            qv,
            center,
            bound,
            closed,
            exprs,
        } => {
            let w = ctx.qv(&qv)?;
            let c = ctx.elem(&w, &center)?;
            let m = qval::arith::parse_fraction(&bound).map_err(|e| Failure::Usage(format!("--bound: {e}")))?;
            let ball = Ball::new(w.clone(), c, m, !closed)?;
            let mut rows = Vec::new();
            for e in &exprs {
                let y = ctx.elem(&w, e)?;
                rows.push((e.clone(), ball.distance_value(&y)?, ball.contains(&y)?));
            }
            Ok(match ctx.format {
                Format::Json => ctx.json(json!({
                    "qv": w.to_string(),
                    "center": ball.center().to_string(),
                    "bound": qval::arith::format_fraction(ball.bound()),
                    "strict": ball.is_strict(),
                    "members": rows.iter().map(|(e, v, inside)| json!({
                        "expr": e, "distance": v.to_fraction_string(), "inside": inside,
                    })).collect::<Vec<_>>(),
                })),
                Format::Table => {
                    let mut t = vec![vec!["y".into(), "w(y - center)".into(), "inside".into()]];
                    t.extend(rows.iter().map(|(e, v, inside)| vec![e.clone(), v.to_string(), inside.to_string()]));
                    table(&t)
                }
            })
        }
        Command::Axioms { qv, samples, seed } => {
            let w = ctx.qv(&qv)?;
            let xs = ElemSampler::for_qv(&w).elements(&mut seeded_rng(seed), samples);
            let mut report = check_axioms(&w, &xs);
            report.seed = Some(seed);
            report_output(ctx, &[report])
        }
        Command::Separate { qv, x, y } => {
            let w = ctx.qv(&qv)?;
            let (x, y) = (ctx.elem(&w, &x)?, ctx.elem(&w, &y)?);
            let sep = separation_witness(&w, &x, &y)?;
            let m = qval::arith::format_fraction(&sep.m);
            Ok(match ctx.format {
                Format::Json => ctx.json(json!({
                    "qv": w.to_string(),
                    "x": x.to_string(),
                    "y": y.to_string(),
                    "m": m,
                    "balls": [format!("U_{m}({x})"), format!("U_{m}({y})")],
                })),
                Format::Table => table(&[
                    vec!["m".into(), sep.m.to_string()],
                    vec!["around x".into(), format!("{{z : w(z - ({x})) > {}}}", sep.m)],
                    vec!["around y".into(), format!("{{z : w(z - ({y})) > {}}}", sep.m)],
                ]),
            })
        }
        Command::Approx { problem } => {
            let text = std::fs::read_to_string(&problem)
                .map_err(|e| Failure::Usage(format!("{}: {e}", problem.display())))?;
            let solution = qval::approx::solve_json(&text, ctx.precision_cap)?;
            Ok(match ctx.format {
                Format::Json => solution,
                Format::Table => {
                    let s: qval::approx::JsonSolution = serde_json::from_str(&solution).expect("own output parses");
                    let d = serde_json::from_str::<qval::approx::JsonProblem>(&text).map(|p| p.d).unwrap_or_default();
                    let show = |r: &qval::approx::JsonRational| match r {
                        qval::approx::JsonRational::Int(n) => n.to_string(),
                        qval::approx::JsonRational::Text(t) => trim_one(t),
                    };
                    let mut t = vec![vec!["p".into(), "achieved".into(), "required".into()]];
                    t.extend(
                        s.certificates
                            .iter()
                            .map(|c| vec![c.p.clone(), trim_one(&c.achieved), trim_one(&c.required)]),
                    );
                    format!("x = {} + ({})*sqrt({d})\n{}", show(&s.x.a), show(&s.x.b), table(&t))
                }
            })
        }
        Command::Lemma {
            id,
            samples,
            instances,
            seed,
        } => {
            let checks: Vec<Check> = if id == "all" {
                Check::ALL.to_vec()
            } else {
                vec![id.parse::<Check>().map_err(|e| Failure::Usage(e.to_string()))?]
            };
            let cfg = SuiteConfig {
                instances,
                samples,
                seed,
            };
            let family: Vec<QuasiValuation> = standard_family()
                .into_iter()
                .map(|w| match ctx.precision_cap {
                    Some(cap) => w.with_precision_cap(cap),
                    None => w,
                })
                .collect();
            let reports: Vec<Report> = checks.into_iter().map(|c| run_check(c, &family, &cfg)).collect();
            report_output(ctx, &reports)
        }
    }
}

fn load_config(path: &PathBuf) -> Result<Config, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// A closed pipe (`qval ... | head`) is not an error worth a panic.
fn emit(out: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{out}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.config.as_ref().map(load_config).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(Failure::Usage(msg) | Failure::Property(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let ctx = Ctx {
        format: cli.format,
        precision_cap: cli.precision_cap.or(config.hensel_precision_cap),
    };
    match run(&ctx, cli.command) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(Failure::Property(out)) => {
            emit(&out);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
