//! The timing experiments: random sum DAGs over integers and rationals, and
//! factoring polynomials with clustered roots.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approx::{ApproxElement, ApproxRing};
use crate::error::{Error, Result};
use crate::lazy::{epoch_precision, Config};
use crate::newton::{segment_split, Factorization};
use crate::rings::{Context, Elem, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    InexactReplay,
    ExactDefault,
    ExactNoChecks,
    ExactOptimized,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::InexactReplay, Mode::ExactDefault, Mode::ExactNoChecks, Mode::ExactOptimized];

    pub fn name(self) -> &'static str {
        match self {
            Mode::InexactReplay => "inexact-replay",
            Mode::ExactDefault => "exact-default",
            Mode::ExactNoChecks => "exact-no-checks",
            Mode::ExactOptimized => "exact-optimized",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mode {s}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Exp1,
    Exp2,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Exp1 => "exp1",
            Experiment::Exp2 => "exp2",
        }
    }

    /// The two seeds `x_1`, `x_2`.
    fn seeds(self) -> [BigRational; 2] {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        match self {
            Experiment::Exp1 => [q(1, 1), q(2, 1)],
            Experiment::Exp2 => [q(1, 3), q(1, 5)],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchParams {
    pub n: usize,
    pub p: u64,
    pub seed: u64,
    pub max_epoch: u32,
    pub reps: usize,
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Stat { mean, sd: var.sqrt() }
    }
}

/// Timings at one epoch, averaged over repetitions. `approx_s` is
/// cumulative through this epoch; `final_s` is this epoch alone.
#[derive(Clone, Debug, Serialize)]
pub struct EpochRow {
    pub epoch: u32,
    pub construct_s: f64,
    pub approx_s: f64,
    pub final_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub experiment: Experiment,
    pub mode: Mode,
    pub params: BenchParams,
    pub rows: Vec<EpochRow>,
    pub total: Stat,
    pub construct: Stat,
    pub approx: Stat,
    pub final_epoch: Stat,
    /// `y` at each epoch, from the first repetition.
    pub values: Vec<String>,
    /// Dependencies of the node computing `y` (exact modes).
    pub y_deps: Option<usize>,
}

pub const CSV_HEADER: &str = "experiment,mode,N,p,seed,epoch,construct_s,approx_s,final_s";

impl BenchReport {
    pub fn csv_rows(&self) -> Vec<String> {
        let p = &self.params;
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{:.6},{:.6},{:.6}",
                    self.experiment.name(),
                    self.mode,
                    p.n,
                    p.p,
                    p.seed,
                    r.epoch,
                    r.construct_s,
                    r.approx_s,
                    r.final_s
                )
            })
            .collect()
    }

    /// One table line: total, construction + approximation, final epoch.
    pub fn table_row(&self) -> String {
        let t = self.total;
        if self.mode == Mode::InexactReplay {
            format!("{:<16} {:>9.4} ± {:<7.4} {:>28} {:>9.4}", self.mode, t.mean, t.sd, "", self.final_epoch.mean)
        } else {
            format!(
                "{:<16} {:>9.4} ± {:<7.4} = {:>9.4} + {:>9.4}   {:>9.4}",
                self.mode, t.mean, t.sd, self.construct.mean, self.approx.mean, self.final_epoch.mean
            )
        }
    }
}

/// The random pairs `(j_i, k_i)` for `i = 3..=N`, as zero-based indices.
pub fn random_dag(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (2..n).map(|i| (rng.gen_range(0..i), rng.gen_range(0..i))).collect()
}

struct Run {
    construct: f64,
    epochs: Vec<f64>,
    values: Vec<ApproxElement>,
    y_deps: Option<usize>,
}

fn run_exact(exp: Experiment, mode: Mode, p: u64, n: usize, dag: &[(usize, usize)], max_epoch: u32) -> Result<Run> {
    let start = Instant::now();
    let mut cx = Context::with_config(Config { validate: mode != Mode::ExactNoChecks, max_epoch });
    let s = cx.prime_field(p)?;
    let [a, b] = exp.seeds();
    let mut xs: Vec<Elem> = Vec::with_capacity(n);
    xs.push(cx.rational(s, a)?);
    xs.push(cx.rational(s, b)?);
    for &(j, k) in dag {
        let x = cx.add(xs[j], xs[k])?;
        xs.push(x);
    }
    let mut y = xs[0];
    for &x in &xs[1..n.min(xs.len())] {
        y = cx.add(y, x)?;
    }
    if mode == Mode::ExactOptimized {
        y = cx.optimize(y, &[xs[0], xs[1]])?;
    }
    let construct = start.elapsed().as_secs_f64();
    let mut epochs = Vec::new();
    let mut values = Vec::new();
    for e in 1..=max_epoch {
        let t = Instant::now();
        let v = cx.approx_elt(y, e)?;
        epochs.push(t.elapsed().as_secs_f64());
        values.push(v);
    }
    let y_deps = Some(cx.graph().node(y.0).deps.len());
    Ok(Run { construct, epochs, values, y_deps })
}

fn run_inexact(exp: Experiment, p: u64, n: usize, dag: &[(usize, usize)], max_epoch: u32) -> Result<Run> {
    let [a, b] = exp.seeds();
    let mut epochs = Vec::new();
    let mut values = Vec::new();
    for e in 1..=max_epoch {
        let t = Instant::now();
        let w = epoch_precision(e);
        let ring = ApproxRing::prime_field(p, w)?;
        let mut xs: Vec<ApproxElement> = Vec::with_capacity(n);
        xs.push(ring.coerce_rational(&a)?.truncate_abs(w));
        xs.push(ring.coerce_rational(&b)?.truncate_abs(w));
        for &(j, k) in dag {
            let x = xs[j].add(&xs[k])?;
            xs.push(x);
        }
        let mut y = xs[0].clone();
        for x in &xs[1..n.min(xs.len())] {
            y = y.add(x)?;
        }
        epochs.push(t.elapsed().as_secs_f64());
        values.push(y);
    }
    Ok(Run { construct: 0.0, epochs, values, y_deps: None })
}

/// Runs Experiment 1 or 2 in one mode. Repetition `r` uses the DAG drawn
/// from seed `seed + r`, so every mode sees the same DAGs.
pub fn bench_sums(exp: Experiment, mode: Mode, params: &BenchParams) -> Result<BenchReport> {
    if params.n < 2 {
        return Err(Error::InvalidArgument("N must be at least 2".into()));
    }
    if exp == Experiment::Exp2 && (params.p == 3 || params.p == 5) {
        return Err(Error::InvalidArgument("Experiment 2 needs p coprime to 15".into()));
    }
    let reps = params.reps.max(1);
    let mut runs = Vec::with_capacity(reps);
    for r in 0..reps {
        let dag = random_dag(params.n, params.seed.wrapping_add(r as u64));
        runs.push(match mode {
            Mode::InexactReplay => run_inexact(exp, params.p, params.n, &dag, params.max_epoch)?,
            _ => run_exact(exp, mode, params.p, params.n, &dag, params.max_epoch)?,
        });
    }
    let epochs = params.max_epoch as usize;
    let mean = |f: &dyn Fn(&Run) -> f64| runs.iter().map(f).sum::<f64>() / reps as f64;
    let construct = mean(&|r| r.construct);
    let mut rows = Vec::with_capacity(epochs);
    let mut cumulative = 0.0;
    for e in 0..epochs {
        let this = mean(&|r| r.epochs[e]);
        cumulative += this;
        rows.push(EpochRow { epoch: e as u32 + 1, construct_s: construct, approx_s: cumulative, final_s: this });
    }
    let approx: Vec<f64> = runs.iter().map(|r| r.epochs.iter().sum()).collect();
    let total: Vec<f64> = runs.iter().zip(&approx).map(|(r, a)| r.construct + a).collect();
    Ok(BenchReport {
        experiment: exp,
        mode,
        params: params.clone(),
        rows,
        total: Stat::of(&total),
        construct: Stat::of(&runs.iter().map(|r| r.construct).collect::<Vec<_>>()),
        approx: Stat::of(&approx),
        final_epoch: Stat::of(&runs.iter().map(|r| *r.epochs.last().unwrap_or(&0.0)).collect::<Vec<_>>()),
        values: runs[0].values.iter().map(ToString::to_string).collect(),
        y_deps: runs[0].y_deps,
    })
}

/// Final values of the first repetition, for checking modes against each
/// other.
pub fn sum_values(exp: Experiment, mode: Mode, params: &BenchParams) -> Result<Vec<ApproxElement>> {
    let dag = random_dag(params.n, params.seed);
    Ok(match mode {
        Mode::InexactReplay => run_inexact(exp, params.p, params.n, &dag, params.max_epoch)?,
        _ => run_exact(exp, mode, params.p, params.n, &dag, params.max_epoch)?,
    }
    .values)
}

/// `y` computed directly from the DAG with exact rationals.
pub fn sum_oracle(exp: Experiment, n: usize, seed: u64) -> BigRational {
    let dag = random_dag(n, seed);
    let mut xs: Vec<BigRational> = exp.seeds().to_vec();
    for &(j, k) in &dag {
        let x = &xs[j] + &xs[k];
        xs.push(x);
    }
    xs.iter().take(n).sum()
}

// Experiment 3.

/// Coefficients of `(x - u)^d - 2^(10 d + 1)`.
pub fn f_coeffs(d: u32, u: &BigInt) -> Vec<BigInt> {
    let mut c = vec![BigInt::from(0); d as usize + 1];
    let mut binom = BigInt::one();
    for (i, ci) in c.iter_mut().enumerate() {
        // binom = C(d, i); coefficient of x^i is C(d, i) (-u)^(d-i)
        *ci = &binom * num_traits::pow(-u.clone(), d as usize - i);
        binom = binom * BigInt::from(d as usize - i) / BigInt::from(i + 1);
    }
    c[0] -= num_traits::pow(BigInt::from(2), 10 * d as usize + 1);
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct Exp3Row {
    pub epoch: u32,
    /// Cumulative seconds for this and all lower epochs.
    pub exact_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Exp3Report {
    /// `f` or `g`.
    pub target: String,
    pub d: u32,
    pub u: String,
    pub max_epoch: u32,
    /// `direct`, or `shifted` when only the polynomial in `x - u` split.
    pub method: String,
    /// `split`, `irreducible` or `requires-further-methods`.
    pub outcome: String,
    pub factor_degrees: Vec<usize>,
    pub polygon: String,
    pub certification_epoch: u32,
    pub construct_s: f64,
    pub rows: Vec<Exp3Row>,
}

fn outcome_name(o: &Factorization) -> &'static str {
    match o {
        Factorization::Split(_) => "split",
        Factorization::CertifiedIrreducible => "irreducible",
        Factorization::RequiresFurtherMethods(_) => "requires-further-methods",
    }
}

fn exp3_one(target: &str, d: u32, u: &BigInt, max_epoch: u32) -> Result<Exp3Report> {
    let start = Instant::now();
    let mut cx = Context::with_config(Config { validate: true, max_epoch });
    let q2 = cx.prime_field(2)?;
    let f = cx.poly_from_bigints(q2, &f_coeffs(d, u))?;
    let poly = if target == "g" {
        let u2 = u + BigInt::from(1 << 11);
        let h = cx.poly_from_bigints(q2, &f_coeffs(d, &u2))?;
        cx.poly_mul(f, h)?
    } else {
        f
    };
    let mut method = "direct";
    let mut split = segment_split(&mut cx, poly)?;
    if matches!(split.outcome, Factorization::RequiresFurtherMethods(_)) && *u != BigInt::from(0) {
        let ue = cx.int(q2, u.clone())?;
        let shifted = cx.shift(poly, ue)?;
        let again = segment_split(&mut cx, shifted)?;
        if !matches!(again.outcome, Factorization::RequiresFurtherMethods(_)) {
            method = "shifted";
            split = again;
        }
    }
    let factors: Vec<Poly> = match &split.outcome {
        Factorization::Split(fs) => fs.clone(),
        _ => vec![poly],
    };
    let construct_s = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    let mut cumulative = 0.0;
    for e in 1..=max_epoch {
        let t = Instant::now();
        for &g in &factors {
            cx.approx_poly(g, e)?;
        }
        cumulative += t.elapsed().as_secs_f64();
        rows.push(Exp3Row { epoch: e, exact_s: cumulative });
    }
    Ok(Exp3Report {
        target: target.into(),
        d,
        u: u.to_string(),
        max_epoch,
        method: method.into(),
        outcome: outcome_name(&split.outcome).into(),
        factor_degrees: factors.iter().map(|&g| cx.degree_bound(g)).collect(),
        polygon: split.polygon.to_string(),
        certification_epoch: split.epoch,
        construct_s,
        rows,
    })
}

/// Factors `f_{d,u}` and `g_{2d,u}` over `Q_2`.
pub fn bench_exp3(d: u32, u: &BigInt, max_epoch: u32) -> Result<Vec<Exp3Report>> {
    if !d.is_power_of_two() {
        return Err(Error::InvalidArgument("d must be a power of 2".into()));
    }
    Ok(vec![exp3_one("f", d, u, max_epoch)?, exp3_one("g", d, u, max_epoch)?])
}
