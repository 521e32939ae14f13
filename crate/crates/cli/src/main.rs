//! `xpadic`: evaluate exact p-adic expressions, inspect polynomials and run
//! the benchmarks.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value as Json};
use xpadic::approx::ApproxElement;
use xpadic::bench::{self, BenchParams, Experiment, Mode};
use xpadic::expr::{self, Value};
use xpadic::lazy::{Approx, Config, Dep, NodeId, TypeTag, UserFn};
use xpadic::newton::{self, Factorization};
use xpadic::query;
use xpadic::rings::{Context, Elem, Poly, Structure};
use xpadic::{Error, Result};

const BENCH_MAX_EPOCH: u32 = 16;

#[derive(Parser)]
#[command(name = "xpadic", version, about = "Lazy exact p-adic arithmetic")]
struct Cli {
    /// The prime p of the base field Q_p.
    #[arg(long, global = true, default_value = "2")]
    prime: BigInt,
    /// Epoch budget (precision 2^N). Defaults to 31, or 16 for benchmarks.
    #[arg(long, global = true)]
    max_epoch: Option<u32>,
    /// Skip validation of new approximations.
    #[arg(long, global = true)]
    no_checks: bool,
    /// Compile the result into a straight-line program over its inputs.
    #[arg(long, global = true)]
    optimize: bool,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an expression and print its approximation.
    Eval {
        expr: String,
        /// Print at this epoch instead of the first one that shows the valuation.
        #[arg(long)]
        epoch: Option<u32>,
    },
    /// Print the valuation of an expression.
    Val { expr: String },
    /// Compare the valuation of an expression with V.
    Valcmp {
        expr: String,
        #[arg(allow_negative_numbers = true)]
        v: i64,
    },
    /// Print the Newton polygon of a polynomial.
    Polygon { poly: String },
    /// Decide whether a root lifts from AT, and print its approximations.
    Root {
        poly: String,
        at: String,
        /// Number of epochs of the root to print.
        #[arg(long, default_value_t = 4)]
        epochs: u32,
    },
    /// List the roots found from the Newton polygon and residual polynomials.
    Roots {
        poly: String,
        #[arg(long, default_value_t = 4)]
        epochs: u32,
    },
    /// Split a polynomial along its Newton polygon.
    Factor {
        poly: String,
        #[arg(long, default_value_t = 4)]
        epochs: u32,
    },
    /// Run a benchmark experiment.
    Bench {
        #[command(subcommand)]
        exp: BenchCmd,
    },
    /// Evaluate the precision-doubling overhead model at (ALPHA, B).
    Overhead { alpha: String, b: String },
    /// Evaluate a kind that contradicts itself at epoch 3.
    #[command(hide = true)]
    FaultDemo,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Random sums seeded with 1 and 2.
    Exp1(SumArgs),
    /// Random sums seeded with 1/3 and 1/5.
    Exp2(SumArgs),
    /// Factoring (x-u)^d - 2^(10d+1) and a product of two such.
    Exp3 {
        #[arg(short, default_value_t = 2)]
        d: u32,
        #[arg(short, default_value = "0", allow_negative_numbers = true)]
        u: BigInt,
    },
}

#[derive(Args)]
struct SumArgs {
    #[arg(short = 'n', long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Run only this mode; all four by default.
    #[arg(long)]
    mode: Option<Mode>,
}

impl Cli {
    fn config(&self) -> Config {
        let mut c = Config { validate: !self.no_checks, ..Config::default() };
        if let Some(n) = self.max_epoch {
            c.max_epoch = n;
        }
        c
    }

    fn bench_max_epoch(&self) -> u32 {
        self.max_epoch
            .or_else(|| std::env::var(xpadic::lazy::MAX_EPOCH_ENV).ok()?.trim().parse().ok())
            .unwrap_or(BENCH_MAX_EPOCH)
    }
}

struct Session {
    cx: Context,
    s: Structure,
}

impl Session {
    fn new(cli: &Cli) -> Result<Self> {
        let config = cli.config();
        if !(1..63).contains(&config.max_epoch) {
            return Err(Error::InvalidArgument("max epoch must lie in 1..=62".into()));
        }
        let mut cx = Context::with_config(config);
        let s = cx.prime_field(cli.prime.clone())?;
        Ok(Session { cx, s })
    }

    fn element(&mut self, src: &str, optimize: bool) -> Result<Elem> {
        let x = expr::element(&mut self.cx, self.s, src)?;
        if optimize {
            let leaves = leaves(&self.cx, x.0);
            return self.cx.optimize(x, &leaves);
        }
        Ok(x)
    }

    fn poly(&mut self, src: &str) -> Result<Poly> {
        expr::polynomial(&mut self.cx, self.s, src)
    }
}

/// Element nodes under `x` that depend on no other element.
fn leaves(cx: &Context, x: NodeId) -> Vec<Elem> {
    let g = cx.graph();
    let is_elt = |id: NodeId| g.node(id).tag == TypeTag::ExactElement;
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![x];
    let mut out = Vec::new();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        let deps: Vec<NodeId> = g.node(id).node_deps().filter(|&d| is_elt(d)).collect();
        if deps.is_empty() {
            out.push(Elem(id));
        }
        stack.extend(deps);
    }
    out.sort_by_key(|e| e.0.index());
    out
}

/// `a mod p^W` for an element of a prime field, with `W` its absolute
/// precision.
fn residue(x: &ApproxElement) -> String {
    let prec = x.abs_precision();
    match x.to_rational() {
        Ok(q) if q.is_integer() => format!("{} mod {}^{prec}", q.numer(), x.ring().prime()),
        Ok(q) => format!("{q} + O({}^{prec})", x.ring().prime()),
        Err(_) => x.to_string(),
    }
}

fn emit(cli: &Cli, text: String, value: Json) {
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).expect("json")),
        _ => println!("{text}"),
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Eval { expr, epoch } => {
            let mut ses = Session::new(cli)?;
            match expr::evaluate(&mut ses.cx, ses.s, expr)? {
                Value::Elem(x) => {
                    let x = if cli.optimize { ses.element(expr, true)? } else { x };
                    let n = match epoch {
                        Some(n) => *n,
                        None => {
                            query::valuation(&mut ses.cx, x)?;
                            ses.cx.graph().node(x.0).cache().len() as u32
                        }
                    };
                    let a = ses.cx.approx_elt(x, n)?;
                    emit(cli, a.to_string(), json!({ "epoch": n, "value": a.to_string(), "residue": residue(&a) }));
                }
                Value::Poly(f) => {
                    let n = epoch.unwrap_or(4);
                    let a = ses.cx.approx_poly(f, n)?;
                    emit(cli, a.to_string(), json!({ "epoch": n, "value": a.to_string() }));
                }
            }
        }
        Cmd::Val { expr } => {
            let mut ses = Session::new(cli)?;
            let x = ses.element(expr, cli.optimize)?;
            let v = query::valuation(&mut ses.cx, x)?;
            emit(cli, v.to_string(), json!({ "valuation": v }));
        }
        Cmd::Valcmp { expr, v } => {
            let mut ses = Session::new(cli)?;
            let x = ses.element(expr, cli.optimize)?;
            let o = query::valuation_cmp(&mut ses.cx, x, *v)?;
            let word = match o {
                std::cmp::Ordering::Less => "less",
                std::cmp::Ordering::Equal => "equal",
                std::cmp::Ordering::Greater => "greater",
            };
            emit(cli, word.into(), json!({ "comparison": word }));
        }
        Cmd::Polygon { poly } => {
            let mut ses = Session::new(cli)?;
            let f = ses.poly(poly)?;
            let (np, epoch) = newton::newton_polygon_at(&mut ses.cx, f)?;
            let faces: Vec<Json> = np
                .faces()
                .iter()
                .map(|fc| json!({ "start": fc.start, "end": fc.end, "slope": fc.slope().to_string() }))
                .collect();
            let mut text = format!("vertices {np}\nresolved at epoch {epoch}");
            for fc in np.faces() {
                text += &format!("\nface {:?} -- {:?}: slope {}, {} roots of valuation {}", fc.start, fc.end, fc.slope(), fc.width(), fc.root_valuation());
            }
            emit(cli, text, json!({ "vertices": np.vertices(), "faces": faces, "epoch": epoch }));
        }
        Cmd::Root { poly, at, epochs } => {
            let mut ses = Session::new(cli)?;
            let f = ses.poly(poly)?;
            let a = ses.element(at, false)?;
            let out = newton::is_hensel_liftable(&mut ses.cx, f, a)?;
            let mut text = format!("liftable: {} (decided at epoch {})", out.liftable, out.epoch);
            let mut approx = Vec::new();
            if let Some(root) = out.root {
                for n in 1..=(*epochs).min(ses.cx.max_epoch()) {
                    let r = ses.cx.approx_elt(root, n)?;
                    text += &format!("\nepoch {n}: {}", residue(&r));
                    approx.push(json!({ "epoch": n, "residue": residue(&r), "value": r.to_string() }));
                }
            }
            emit(cli, text, json!({ "liftable": out.liftable, "epoch": out.epoch, "root": approx }));
        }
        Cmd::Roots { poly, epochs } => {
            let mut ses = Session::new(cli)?;
            let f = ses.poly(poly)?;
            let found = newton::roots(&mut ses.cx, f)?;
            let n = (*epochs).min(ses.cx.max_epoch());
            let mut text = format!("{} roots{}", found.roots.len(), if found.complete { "" } else { " (search incomplete)" });
            let mut list = Vec::new();
            for &r in &found.roots {
                let a = ses.cx.approx_elt(r, n)?;
                text += &format!("\n{}", residue(&a));
                list.push(residue(&a));
            }
            emit(cli, text, json!({ "roots": list, "complete": found.complete, "epoch": n }));
        }
        Cmd::Factor { poly, epochs } => {
            let mut ses = Session::new(cli)?;
            let f = ses.poly(poly)?;
            let split = newton::segment_split(&mut ses.cx, f)?;
            let mut text = format!("polygon {}\ncertified at epoch {}", split.polygon, split.epoch);
            let mut factors = Vec::new();
            let outcome = match &split.outcome {
                Factorization::Split(gs) => {
                    let n = (*epochs).min(ses.cx.max_epoch());
                    for &g in gs {
                        let a = ses.cx.approx_poly(g, n)?;
                        text += &format!("\nfactor: {a}");
                        factors.push(a.to_string());
                    }
                    "split".to_string()
                }
                Factorization::CertifiedIrreducible => {
                    text += "\nirreducible";
                    "irreducible".into()
                }
                Factorization::RequiresFurtherMethods(why) => {
                    text += &format!("\nrequires further methods: {why}");
                    "requires-further-methods".into()
                }
            };
            emit(cli, text, json!({ "polygon": split.polygon.vertices(), "epoch": split.epoch, "outcome": outcome, "factors": factors }));
        }
        Cmd::Bench { exp } => run_bench(cli, exp)?,
        Cmd::Overhead { alpha, b } => {
            let m = bench::overhead(&bench::parse_rational(alpha)?, &bench::parse_rational(b)?)?;
            let text = format!("alpha {}\nb {}\nr {}\nb* {}\nr* {}\nr/r* {:.6}", m.alpha, m.b, m.r, m.b_star, m.r_star, m.r.to_f64() / m.r_star.to_f64());
            emit(cli, text, serde_json::to_value(&m).expect("json"));
        }
        Cmd::FaultDemo => {
            let mut ses = Session::new(cli)?;
            let faulty: UserFn = Arc::new(|n, d| {
                let r = d[0].ring()?;
                Ok(Approx::Elt(r.coerce_int(if n >= 3 { 3 } else { 1 })?))
            });
            let s = ses.s;
            let x = ses.cx.user_elem(s, faulty, vec![Dep::Node(s.0)], 1)?;
            for n in 1..=3 {
                let a = ses.cx.approx_elt(x, n)?;
                println!("epoch {n}: {a}");
            }
        }
    }
    Ok(())
}

fn run_bench(cli: &Cli, exp: &BenchCmd) -> Result<()> {
    let max_epoch = cli.bench_max_epoch();
    let (experiment, args) = match exp {
        BenchCmd::Exp1(a) => (Experiment::Exp1, a),
        BenchCmd::Exp2(a) => (Experiment::Exp2, a),
        BenchCmd::Exp3 { d, u } => {
            let reports = bench::bench_exp3(*d, u, max_epoch)?;
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&reports).expect("json")),
                Format::Csv => {
                    println!("experiment,target,d,u,method,outcome,certification_epoch,epoch,exact_s");
                    for r in &reports {
                        for row in &r.rows {
                            println!("exp3,{},{},{},{},{},{},{},{:.6}", r.target, r.d, r.u, r.method, r.outcome, r.certification_epoch, row.epoch, row.exact_s);
                        }
                    }
                }
                Format::Text => {
                    for r in &reports {
                        let last = r.rows.last().map_or(0.0, |x| x.exact_s);
                        println!(
                            "{} d={} u={}: {} ({}), polygon {}, certified at epoch {}, factor degrees {:?}, construction {:.4}s, approximation to epoch {} {:.4}s",
                            r.target, r.d, r.u, r.outcome, r.method, r.polygon, r.certification_epoch, r.factor_degrees, r.construct_s, r.max_epoch, last
                        );
                    }
                }
            }
            return Ok(());
        }
    };
    let modes: Vec<Mode> = match args.mode {
        Some(m) => vec![m],
        None if cli.optimize => vec![Mode::ExactOptimized],
        None if cli.no_checks => vec![Mode::ExactNoChecks],
        None => Mode::ALL.to_vec(),
    };
    let p: u64 = (&cli.prime).try_into().map_err(|_| Error::InvalidArgument("benchmark prime must fit in 64 bits".into()))?;
    let params = BenchParams { n: args.n, p, seed: cli.seed, max_epoch, reps: args.reps };
    let reports = modes.iter().map(|&m| bench::bench_sums(experiment, m, &params)).collect::<Result<Vec<_>>>()?;
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports).expect("json")),
        Format::Csv => {
            println!("{}", bench::CSV_HEADER);
            for r in &reports {
                for line in r.csv_rows() {
                    println!("{line}");
                }
            }
        }
        Format::Text => {
            println!("{} N={} p={} seed={} epochs 1..={} reps={}", experiment.name(), params.n, p, params.seed, max_epoch, params.reps);
            println!("{:<16} {:>21} {:>28} {:>9}", "mode", "total", "construction + approx", "final");
            for r in &reports {
                println!("{}", r.table_row());
            }
            if let Some(r) = reports.first() {
                println!("y at epoch {max_epoch}: {}", r.values.last().map_or("", String::as_str));
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        3
    } else if e.is_budget_exhausted() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
