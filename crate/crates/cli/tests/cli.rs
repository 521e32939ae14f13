use std::process::{Command, Output};

fn xpadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xpadic"))
        .args(args)
        .env_remove("XPADIC_MAX_EPOCH")
        .output()
        .expect("run xpadic")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn valuation_of_twelve() {
    let o = xpadic(&["val", "(12)", "--prime", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn zero_difference_exhausts_budget() {
    let o = xpadic(&["val", "1-1", "--prime", "2", "--max-epoch", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("last weak valuation 32"));
}

#[test]
fn budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_xpadic"))
        .args(["val", "1-1"])
        .env("XPADIC_MAX_EPOCH", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("last weak valuation 16"));
}

#[test]
fn square_root_of_two_mod_49() {
    let o = xpadic(&["root", "x^2-2", "3", "--prime", "7", "--max-epoch", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("liftable: true"));
    assert!(out.contains("epoch 1: 10 mod 7^2"), "{out}");
    // 1802916^2 - 2 is divisible by 7^8
    assert!(out.contains("epoch 3: 1802916 mod 7^8"), "{out}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(xpadic(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(xpadic(&["val", "1 +"]).status.code(), Some(1));
    assert_eq!(xpadic(&["val", "x"]).status.code(), Some(1));
    assert_eq!(xpadic(&["val", "1", "--prime", "6"]).status.code(), Some(1));
    assert_eq!(xpadic(&["overhead", "0", "2"]).status.code(), Some(1));
    assert_eq!(xpadic(&["--help"]).status.code(), Some(0));
}

#[test]
fn validation_failure_exits_three() {
    let o = xpadic(&["fault-demo"]);
    assert_eq!(o.status.code(), Some(3));
    let o = xpadic(&["fault-demo", "--no-checks"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn comparisons_and_evaluation() {
    assert_eq!(stdout(&xpadic(&["valcmp", "24", "3"])).trim(), "equal");
    assert_eq!(stdout(&xpadic(&["valcmp", "1/24", "-4", "--prime", "2"])).trim(), "greater");
    assert_eq!(stdout(&xpadic(&["valcmp", "0", "50"])).trim(), "greater");
    let e = stdout(&xpadic(&["eval", "1/3", "--prime", "2", "--epoch", "2"]));
    // 1/3 = 11 mod 16
    assert_eq!(e.trim(), "1 + 2 + 2^3 + O(2^4)");
    let a = stdout(&xpadic(&["eval", "let a = 5; a^3 - 3*a", "--prime", "3", "--epoch", "3"]));
    let b = stdout(&xpadic(&["eval", "let a = 5; a^3 - 3*a", "--prime", "3", "--epoch", "3", "--optimize"]));
    assert_eq!(a, b);
    let j = stdout(&xpadic(&["eval", "110", "--prime", "2", "--epoch", "3", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&j).unwrap();
    assert_eq!(v["residue"], "110 mod 2^8");
}

#[test]
fn polygons_and_factors() {
    let out = stdout(&xpadic(&["polygon", "(x^2-2)*(x^2-8)"]));
    assert!(out.contains("vertices (0, 4) -- (2, 1) -- (4, 0)"), "{out}");
    let out = stdout(&xpadic(&["factor", "(x^2-2)*(x^2-8)"]));
    assert_eq!(out.matches("factor:").count(), 2, "{out}");
    assert!(stdout(&xpadic(&["factor", "x^2 - 2^21"])).contains("irreducible"));
    let j = stdout(&xpadic(&["roots", "(x-1)*(x-15)*(x^2+1)", "--prime", "5", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&j).unwrap();
    assert_eq!(v["roots"].as_array().unwrap().len(), 4);
    assert_eq!(v["complete"], true);
}

#[test]
fn overhead_model() {
    let out = stdout(&xpadic(&["overhead", "1", "2"]));
    assert!(out.contains("r 4\n") && out.contains("b* 2\n") && out.contains("r* 4\n"), "{out}");
    let out = stdout(&xpadic(&["overhead", "1", "3"]));
    assert!(out.contains("r 9/2"), "{out}");
}

#[test]
fn bench_csv_is_deterministic_apart_from_timings() {
    let args = ["bench", "exp1", "-n", "300", "--reps", "1", "--max-epoch", "5", "--seed", "9", "--format", "csv"];
    let strip = |s: String| -> Vec<String> {
        s.lines().map(|l| l.split(',').take(6).collect::<Vec<_>>().join(",")).collect()
    };
    let a = strip(stdout(&xpadic(&args)));
    let b = strip(stdout(&xpadic(&args)));
    assert_eq!(a, b);
    assert_eq!(a[0], "experiment,mode,N,p,seed,epoch");
    assert_eq!(a.len(), 1 + 4 * 5);
    assert_eq!(a[1], "exp1,inexact-replay,300,2,9,1");

    let t1 = stdout(&xpadic(&["bench", "exp2", "-n", "50", "--reps", "1", "--max-epoch", "4", "--prime", "7"]));
    let t2 = stdout(&xpadic(&["bench", "exp2", "-n", "50", "--reps", "1", "--max-epoch", "4", "--prime", "7", "--no-checks"]));
    let last = |s: &str| s.lines().last().unwrap().to_string();
    assert_eq!(last(&t1), last(&t2));
    assert_eq!(xpadic(&["bench", "exp2", "--prime", "5", "--max-epoch", "2"]).status.code(), Some(1));
}

#[test]
fn bench_exp3_json() {
    let j = stdout(&xpadic(&["bench", "exp3", "-d", "2", "--max-epoch", "6", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&j).unwrap();
    assert_eq!(v[0]["target"], "f");
    assert_eq!(v[0]["outcome"], "irreducible");
    assert_eq!(v[1]["target"], "g");
    // all four roots of g have valuation 21/2, so the polygon has one face
    assert_eq!(v[1]["outcome"], "requires-further-methods");
    assert_eq!(v[1]["rows"].as_array().unwrap().len(), 6);
}
