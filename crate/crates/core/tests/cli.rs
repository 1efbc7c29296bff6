use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coded_matmul::io::{load, random_matrix};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coded-matmul"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> (String, Vec<String>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().map(str::to_owned);
    let header = lines.next().unwrap();
    (header, lines.collect())
}

#[test]
fn gen_matrix_is_deterministic_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.cdm");
    let two = dir.path().join("two.cdm");
    for out in [&one, &two] {
        let o = cli(&[
            "gen-matrix",
            "--rows",
            "6",
            "--cols",
            "4",
            "--bound",
            "9",
            "--signed",
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = fs::read(&one).unwrap();
    assert_eq!(bytes, fs::read(&two).unwrap());
    assert_eq!(&bytes[..4], b"CDM1");
    assert_eq!(bytes.len(), 4 + 4 + 4 + 1 + 6 * 4 * 8);
    assert_eq!(load(&one).unwrap(), random_matrix(6, 4, 9, true, 5));
}

#[test]
fn plan_dump_lists_blocks_and_useful_map() {
    let o = cli(&["plan-dump", "--m", "2", "--n", "2", "--p", "4", "--p-prime", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("side,block_row,block_col,z_exp,s_exp"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().filter(|r| r[0] == "A").count(), 8);
    assert_eq!(rows.iter().filter(|r| r[0] == "B").count(), 8);
    let useful: Vec<(u32, u32, i64)> = rows
        .iter()
        .filter(|r| r[0] == "C")
        .map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    // m p' u + p' i + p' - 1 with m = p' = 2.
    assert_eq!(useful, vec![(0, 0, 1), (0, 1, 5), (1, 0, 3), (1, 1, 7)]);
}

#[test]
fn run_exact_reports_exact_match() {
    let o = cli(&[
        "run",
        "--size",
        "8",
        "--mode",
        "exact",
        "--points",
        "integer",
        "--stragglers",
        "twice:3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = String::from_utf8(o.stderr).unwrap();
    assert!(summary.contains("exact_match=true"), "{summary}");
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
}

#[test]
fn sweep_stragglers_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let o = cli(&[
            "sweep-stragglers",
            "--size",
            "8",
            "--trials",
            "2",
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (header, rows) = csv_rows(&paths[0]);
    assert_eq!(
        header,
        "scheme,m,n,p,p_prime,K,tau,S,trial,seed,latency_ms,decode_ms,rel_error,condition_estimate"
    );
    assert_eq!(rows.len(), 2 * 10 * 2);
    assert!(rows.iter().all(|r| r.split(',').count() == 14));
    assert!(rows.iter().any(|r| r.starts_with("pprime1,")) && rows.iter().any(|r| r.starts_with("pprime2,")));
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn sweep_error_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("err.csv");
    let o = cli(&[
        "sweep-error",
        "--size",
        "8",
        "--bound",
        "10,20",
        "--s",
        "2^16,2^18",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&out);
    assert_eq!(
        header,
        "bound,s,rel_error,trial,seed,L,exact_match,failed_entries,digit_margin,condition_estimate"
    );
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("10,65536,"));
    assert!(rows[1].starts_with("20,262144,"));
}

#[test]
fn exit_codes() {
    let bad_params = cli(&["run", "--m", "3", "--size", "8"]);
    assert_eq!(bad_params.status.code(), Some(2));
    let too_few = cli(&["run", "--size", "8", "--p-prime", "2", "--workers", "8"]);
    assert_eq!(too_few.status.code(), Some(2));
    let small_base = cli(&["run", "--size", "8", "--s", "16"]);
    assert_eq!(small_base.status.code(), Some(2));
    let missing = cli(&[
        "run",
        "--a-file",
        "/nonexistent/a.cdm",
        "--b-file",
        "/nonexistent/b.cdm",
    ]);
    assert_eq!(missing.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/a.cdm"));
}
