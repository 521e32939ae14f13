//! Benchmark harness and the precision-doubling overhead model.

mod experiments;
mod overhead;

pub use experiments::{
    bench_exp3, bench_sums, f_coeffs, random_dag, sum_oracle, sum_values, BenchParams, BenchReport, EpochRow, Exp3Report,
    Exp3Row, Experiment, Mode, Stat, CSV_HEADER,
};
pub use overhead::{base_two_ratio, base_two_within, overhead, parse_rational, r, Number, OverheadModel};
