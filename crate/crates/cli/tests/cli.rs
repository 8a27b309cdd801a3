use std::path::Path;
use std::process::{Command, Output};

use clap::CommandFactory;
use ribe_cli::{Cli, Format, Report};
use tempfile::TempDir;

fn ribe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ribe"))
        .args(args)
        .current_dir(dir)
        .env_remove("RIBE_SEED")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Report {
    let out = ribe(dir, &[args, &["--format", "tsv"]].concat());
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Report::parse_tsv(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

#[test]
fn argument_definitions_are_consistent() {
    Cli::command().debug_assert();
}

#[test]
fn named_graph_then_identity() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen", "--named", "petersen", "--out", "g.txt"]);
    let r = ok(dir.path(), &["spectral", "identity", "--graph", "g.txt", "--k", "3", "--m", "2"]);
    assert_eq!(r.get("check.identity"), Some("pass"));
    assert_eq!(r.get("max_deviation"), Some("0"));
    let r = ok(dir.path(), &["spectral", "mixing", "--graph", "g.txt"]);
    assert_eq!(r.get("violations"), Some("0"));
}

#[test]
fn oracle_dumps_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--cloud", "80", "--dim", "3", "--seed", "4", "--out", "m.txt"]);
    for out in ["a.txt", "b.txt"] {
        ok(d, &["build-oracle", "--metric", "m.txt", "--epsilon", "0.5", "--seed", "7", "--out", out]);
    }
    let a = std::fs::read(d.join("a.txt")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(d.join("b.txt")).unwrap());
    let r = ok(d, &["verify", "--oracle", "a.txt", "--metric", "m.txt"]);
    assert_eq!(r.get("check.sandwich"), Some("pass"));
}

#[test]
fn malformed_metric_exits_two_naming_file_and_line() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "3\n0.5 1\nnope\n").unwrap();
    let out = ribe(dir.path(), &["metric", "--input", "bad.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.txt") && err.contains("line 3"), "{err}");
    let out = ribe(dir.path(), &["build-oracle", "--metric", "missing.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--cloud", "30", "--out", "m.txt"]);
    ok(d, &["build-oracle", "--metric", "m.txt", "--out", "o.txt"]);
    let m = ribe_core::io::parse_metric(&std::fs::read_to_string(d.join("m.txt")).unwrap()).unwrap();
    std::fs::write(d.join("far.txt"), ribe_core::io::write_metric(&m.scaled(1000.0))).unwrap();
    let out = ribe(d, &["verify", "--oracle", "o.txt", "--metric", "far.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fail"));
}

#[test]
fn query_and_rank() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--cloud", "40", "--out", "m.txt"]);
    ok(d, &["build-oracle", "--metric", "m.txt", "--out", "o.txt"]);
    let r = ok(d, &["query", "--oracle", "o.txt", "--i", "2", "--j", "9", "--metric", "m.txt"]);
    assert_eq!(r.get("check.sandwich"), Some("pass"));
    let r = ok(d, &["rank", "--oracle", "o.txt", "--metric", "m.txt", "--x", "5", "--i", "1"]);
    assert_eq!(r.get("point"), Some("5"));
    let r = ok(d, &["rank", "--oracle", "o.txt", "--metric", "m.txt", "--x", "5", "--i", "17"]);
    let u = r.get("point").unwrap().to_string();
    let r = ok(d, &["rank", "--oracle", "o.txt", "--metric", "m.txt", "--x", "5", "--u", &u]);
    assert_eq!(r.get("rank"), Some("17"));
    assert_eq!(ribe(d, &["query", "--oracle", "o.txt", "--i", "40", "--j", "0"]).status.code(), Some(2));
}

#[test]
fn tsv_reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--cube-function", "4", "--codim", "2", "--out", "f.txt"]);
    let out = ribe(d, &["cube", "heat", "--function", "f.txt", "--t", "0.3", "--format", "tsv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let r = Report::parse_tsv(&text).unwrap();
    assert_eq!(r.render(Format::Tsv), text);
    let before: f64 = r.get("mean_norm").unwrap().parse().unwrap();
    assert!(before > 0.0);

    let mut built = Report::new();
    built.put("x", 0.1 + 0.2).put("name", "a b").check("ok", true);
    let back = Report::parse_tsv(&built.render(Format::Tsv)).unwrap();
    assert_eq!(back, built);
    assert_eq!(back.get("x").unwrap().parse::<f64>().unwrap(), 0.1 + 0.2);
    assert!(Report::parse_tsv("no tab here").is_err());
}

#[test]
fn printed_command_replays_the_report() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = Command::new(env!("CARGO_BIN_EXE_ribe"))
        .args(["gen", "--cloud", "25", "--format", "tsv", "--out", "m.txt"])
        .current_dir(d)
        .env("RIBE_SEED", "99")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let r = Report::parse_tsv(&text).unwrap();
    assert_eq!(r.get("seed"), Some("99"));
    let first = std::fs::read(d.join("m.txt")).unwrap();
    let command = r.get("command").unwrap().to_string();
    let words: Vec<&str> = command.split_whitespace().skip(1).collect();
    assert!(words.contains(&"--seed") && words.contains(&"99"));
    let again = ribe(d, &words);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    assert_eq!(std::fs::read(d.join("m.txt")).unwrap(), first);

    // an explicit flag beats the environment
    let out = Command::new(env!("CARGO_BIN_EXE_ribe"))
        .args(["gen", "--cloud", "5", "--seed", "3", "--format", "tsv", "--out", "n.txt"])
        .current_dir(d)
        .env("RIBE_SEED", "99")
        .output()
        .unwrap();
    let r = Report::parse_tsv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(r.get("seed"), Some("3"));
}

#[test]
fn bench_reports() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--cloud", "2", "--out", "two.txt"]);
    ok(d, &["build-oracle", "--metric", "two.txt", "--out", "two.oracle"]);
    let r = ok(d, &["bench", "--oracle", "two.oracle", "--metric", "two.txt", "--queries", "10000"]);
    assert!(r.get("size_scalars").unwrap().parse::<usize>().unwrap() > 0);
    assert!(r.get("latency_median_ns").unwrap().parse::<f64>().unwrap().is_finite());

    ok(d, &["gen", "--cloud", "512", "--dim", "3", "--seed", "1", "--out", "big.txt"]);
    ok(d, &["build-oracle", "--metric", "big.txt", "--epsilon", "0.5", "--seed", "2", "--out", "big.oracle"]);
    let hist = |r: &Report| -> Vec<(String, String)> {
        r.entries().iter().filter(|(k, _)| k.starts_with("stretch_hist") || k == "max_stretch").cloned().collect()
    };
    let args = ["bench", "--oracle", "big.oracle", "--metric", "big.txt", "--queries", "20000", "--seed", "5"];
    let a = ok(d, &args);
    assert!(a.get("max_stretch").unwrap().parse::<f64>().unwrap() <= 256.0);
    assert_eq!(a.get("check.sandwich"), Some("pass"));
    assert_eq!(hist(&a), hist(&ok(d, &args)));
}

#[test]
fn walk_and_cube_commands() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let r = ok(d, &["walk", "drift", "--hypercube", "7", "--t-max", "20"]);
    assert_eq!(r.get("check.closed_form"), Some("pass"));
    let r = ok(d, &["walk", "drift", "--tree", "3", "--depth", "4"]);
    assert_eq!(r.get("check.linear_drift"), Some("pass"));
    assert!((r.get("drift.4").unwrap().parse::<f64>().unwrap() - 4.0).abs() < 1e-12);
    let r = ok(d, &["walk", "type", "--states", "12", "--euclidean", "2", "--t-max", "20"]);
    assert_eq!(r.get("check.euclidean_type_two"), Some("pass"));
    let r = ok(d, &["walk", "convexity", "--tree", "3", "--depth", "8"]);
    assert!(r.get("pi_lower").unwrap().parse::<f64>().unwrap() > 1.0);
    let r = ok(d, &["spectral", "geronimus", "--k", "3", "--m", "8"]);
    assert_eq!(r.get("polynomial"), Some("x^8 - 15x^6 + 70x^4 - 104x^2 + 24"));
    ok(d, &["gen", "--cube-function", "5", "--out", "f.txt"]);
    ok(d, &["cube", "transform", "--function", "f.txt", "--out", "s.txt"]);
    let s = ribe_core::io::parse_cube_function(&std::fs::read_to_string(d.join("s.txt")).unwrap()).unwrap();
    let f = ribe_core::io::parse_cube_function(&std::fs::read_to_string(d.join("f.txt")).unwrap()).unwrap();
    assert!((s.value(0)[0] - f.mean()[0]).abs() < 1e-12);
    let r = ok(d, &["cube", "pisier", "--function", "f.txt", "--norm", "inf"]);
    assert_eq!(r.get("check.below_heat_factor"), Some("pass"));
    let r = ok(d, &["cube", "type", "--function", "f.txt", "--p", "1", "--variant", "enflo"]);
    assert!(r.get("constant").unwrap().parse::<f64>().unwrap() <= 1.0 + 1e-12);
}
