use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use derand_core::planted::Sidecar;
use derand_core::rational::parse;
use derand_core::{Assignment, CnfFormula};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_derand"));
    c.env_remove("DERAND_MAX_EXHAUSTIVE");
    c
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn derand")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn golden_exit_codes() {
    let cases: [(&str, &[&str], i32); 12] = [
        ("trivial.cnf", &[], 0),
        ("empty.cnf", &["--driver", "naive", "--eps", "1"], 0),
        ("unsat.cnf", &["--driver", "prg-enum", "--eps", "1/4"], 1),
        ("unsat.cnf", &[], 1),
        ("unsat.cnf", &["--driver", "naive", "--eps", "1/4"], 2),
        ("unsat.cnf", &["--driver", "stagewise", "--eps", "1/4"], 2),
        ("sparse.cnf", &["--driver", "naive", "--eps", "1/2"], 2),
        ("dense.cnf", &["--driver", "smallbias", "--eps", "7/8"], 0),
        ("bad_literal.cnf", &[], 3),
        ("no_header.cnf", &[], 3),
        ("out_of_range.cnf", &[], 3),
        ("dense.cnf", &["--eps", "3/2"], 3),
    ];
    for (file, extra, want) in cases {
        let path = golden(file);
        let mut args = vec!["solve", path.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert_eq!(code(&o), want, "{file} {extra:?}: {}", String::from_utf8_lossy(&o.stderr));
        if want == 0 {
            let f = CnfFormula::parse_dimacs(&fs::read_to_string(&path).unwrap()).unwrap();
            let x: Assignment = stdout(&o).trim().parse().unwrap();
            assert_eq!(f.evaluate(&x), Ok(true));
        }
    }
}

#[test]
fn malformed_dimacs_reports_line() {
    let o = run(&["solve", golden("bad_literal.cnf").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn env_limit_is_honoured() {
    let p = golden("dense.cnf");
    let args = ["solve", p.to_str().unwrap(), "--driver", "prg-enum", "--eps", "1/2"];
    assert_eq!(code(&run(&args)), 0);
    let o = bin().args(args).env("DERAND_MAX_EXHAUSTIVE", "4").output().unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn gen_is_deterministic_and_sidecar_recounts() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |out: &Path| {
        run(&[
            "gen", "--n", "12", "--M", "20", "--k", "3", "--eps", "1/4", "--seed", "7", "--out",
            out.to_str().unwrap(),
        ])
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&gen(&a)), 0);
    assert_eq!(code(&gen(&b)), 0);
    let cnf = fs::read(a.with_extension("cnf")).unwrap();
    assert_eq!(cnf, fs::read(b.with_extension("cnf")).unwrap());
    assert_eq!(
        fs::read(a.with_extension("json")).unwrap(),
        fs::read(b.with_extension("json")).unwrap()
    );

    let f = CnfFormula::parse_dimacs(std::str::from_utf8(&cnf).unwrap()).unwrap();
    let side: Sidecar = serde_json::from_slice(&fs::read(a.with_extension("json")).unwrap()).unwrap();
    let sat = (0u64..1 << 12)
        .filter(|&m| f.evaluate(&Assignment::from_mask(12, m)) == Ok(true))
        .count() as i64;
    assert_eq!(side.true_bias, parse(&format!("{sat}/4096")).unwrap());
    assert!(side.true_bias >= parse("1/4").unwrap());
    assert_eq!(f.evaluate(&side.witness.parse().unwrap()), Ok(true));

    let o = run(&[
        "solve",
        a.with_extension("cnf").to_str().unwrap(),
        "--driver",
        "stagewise",
        "--eps",
        "1/4",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(f.evaluate(&stdout(&o).trim().parse().unwrap()), Ok(true));
}

#[test]
fn gen_target_one_is_tautology() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = run(&["gen", "--n", "5", "--M", "4", "--k", "2", "--eps", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let f = CnfFormula::parse_dimacs(&fs::read_to_string(out.with_extension("cnf")).unwrap()).unwrap();
    assert!(f.is_tautology_syntactically());
}

#[test]
fn gen_infeasible_exhausts_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = run(&["gen", "--n", "3", "--M", "1", "--k", "1", "--eps", "3/4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(!out.with_extension("cnf").exists());
}

#[test]
fn trace_and_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let (t, s) = (dir.path().join("t.csv"), dir.path().join("s.json"));
    let o = run(&[
        "solve",
        golden("dense.cnf").to_str().unwrap(),
        "--driver",
        "naive",
        "--eps",
        "1/2",
        "--trace-out",
        t.to_str().unwrap(),
        "--summary-out",
        s.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(t).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "stage,n_t,candidates,chosen_restriction,est_bias_num,est_bias_den,audited_bias_num,audited_bias_den,counter_calls"
    );
    assert_eq!(lines.len(), 7);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(s).unwrap()).unwrap();
    assert_eq!(summary["outcome"], "found");
    assert_eq!(summary["counter_calls"], 12);
    assert_eq!(summary["exit_code"], 0);
}

#[test]
fn verify_passes_and_catches_trim_bug() {
    let o = run(&["verify", "--suite", "params"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().all(|l| l.contains("\"passed\":true")));

    let o = run(&["verify", "--suite", "core", "--inject-trim-bug"]);
    assert_eq!(code(&o), 1);
    let trim: serde_json::Value = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|v| v["invariant"] == "trim")
        .unwrap();
    assert_eq!(trim["passed"], false);
    assert!(trim["counterexample"].as_str().unwrap().contains("p cnf"));
}

#[test]
fn bench_matrix_rows() {
    let files = ["trivial.cnf", "dense.cnf", "unsat.cnf"].map(golden);
    let mut args = vec!["bench", "--eps", "1/4"];
    args.extend(files.iter().map(|p| p.to_str().unwrap()));
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "instance,driver,counter_calls,candidates,stages,success,exit_code,wall_time_ms");
    assert_eq!(rows.len(), 1 + 9);
    let mut keys: Vec<(String, String)> = rows[1..]
        .iter()
        .map(|r| {
            let c: Vec<&str> = r.split(',').collect();
            (c[0].to_string(), c[1].to_string())
        })
        .collect();
    let sorted = {
        let mut k = keys.clone();
        k.sort();
        k
    };
    assert_eq!(keys, sorted);
    keys.dedup();
    assert_eq!(keys.len(), 9);
    let naive_dense = rows.iter().find(|r| r.contains("dense.cnf,naive")).unwrap();
    assert_eq!(naive_dense.split(',').nth(2), Some("12"));
}

#[test]
fn params_prints_json() {
    let o = run(&["params", "--M", "16384", "--n", "64", "--eps", "1/8"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["parameters"]["M"], 16384);
    assert_eq!(v["proposition"]["ineq2"], true);
}
