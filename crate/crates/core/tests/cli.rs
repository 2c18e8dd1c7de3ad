use std::path::Path;
use std::process::{Command, Output};

use jointpf::report::{self, ArcKind};

const FASTA: &str = ">query\nGGAUCCAUGCA\n>target\nUGCAUGGAUCC\n";

fn jointpf(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jointpf"));
    cmd.args(args).env_remove("JOINTPF_PARAMS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = jointpf(args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn error_class(out: &Output) -> String {
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().last().unwrap();
    line.strip_prefix("error: ").unwrap().split(':').next().unwrap().to_string()
}

#[test]
fn artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "pair.fa", FASTA);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    for cmd in ["pf", "bpp", "hybrids", "targets", "dotplot"] {
        ok(&[cmd, &f, "--out", o]);
    }
    ok(&["sample", &f, "--out", o, "--num", "50", "--seed", "3"]);
    let read = |name: &str| std::fs::read_to_string(out.join(name)).unwrap();

    let (q, qr, qs) = report::read_pf(&read("pf.txt")).unwrap();
    assert!(q > qr * qs && qr >= 1.0 && qs >= 1.0);

    let bpp = report::read_bpp(&read("bpp.tsv")).unwrap();
    assert!(bpp.iter().any(|r| r.0 == ArcKind::RS));
    assert!(bpp.iter().all(|r| (0.0..=1.0 + 1e-9).contains(&r.3)));

    let (four, proj) = report::read_hybrids(&read("hybrids.tsv")).unwrap();
    assert!(!four.is_empty() && !proj.is_empty());
    // the projection aggregates the footprints
    for &(i, j, p) in &proj {
        let sum: f64 = four.iter().filter(|r| r.0 == i && r.1 == j).map(|r| r.4).sum();
        assert!((sum - p).abs() < 1e-8);
    }

    let targets = report::read_targets(&read("targets.txt")).unwrap();
    assert!(targets.optimum.is_some());
    assert!(targets.r.iter().chain(&targets.s).all(|r| r.2 > 10.0));

    let samples = report::read_samples(&read("samples.txt")).unwrap();
    assert_eq!(samples.len(), 50);
    assert!(samples.iter().all(|js| jointpf::validate(js, 3).is_valid()));

    let svg = read("dotplot.svg");
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    let squares = report::read_dotplot(&svg).unwrap();
    let ext: Vec<_> = bpp.iter().filter(|r| r.0 == ArcKind::RS).collect();
    assert_eq!(squares.len(), ext.len());
}

#[test]
fn headers_carry_run_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "pair.fa", FASTA);
    let text = ok(&["sample", &f, "--num", "2", "--seed", "11"]);
    assert!(text.starts_with(&format!("# jointpf {} sample\n", report::VERSION)));
    assert!(text.contains("# seed 11\n"));
    assert!(text.contains("# R query length 11: positions 1..11 read 5'->3'"));
    assert!(text.contains("internal index = 12 - position"));
}

#[test]
fn pf_json_and_two_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let r = write(dir.path(), "r.fa", ">query\nGGAUCCAUGCA\n");
    let s = write(dir.path(), "s.fa", ">target\nUGCAUGGAUCC\n");
    let both = write(dir.path(), "pair.fa", FASTA);
    let json: serde_json::Value = serde_json::from_str(&ok(&["pf", &r, &s, "--json"])).unwrap();
    assert_eq!(json["r_id"], "query");
    assert_eq!(json["m"], 11);
    assert_eq!(ok(&["pf", &r, &s]), ok(&["pf", &both]));
}

#[test]
fn factorization_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "pair.fa", FASTA);
    let params = write(dir.path(), "noext.params", "# no intermolecular pairs\nexterior_arc = inf\n");
    let out = jointpf(&["pf", &f], &[("JOINTPF_PARAMS", &params)]);
    assert!(out.status.success());
    let (q, qr, qs) = report::read_pf(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((q - qr * qs).abs() <= 1e-11 * q);
}

#[test]
fn errors_are_classified() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.fa", ">r\nGAAAC\n");
    assert_eq!(error_class(&jointpf(&["pf", &one], &[])), "WrongRecordCount");
    let bad = write(dir.path(), "bad.fa", ">r\nGAXAC\n>s\nGUUUC\n");
    assert_eq!(error_class(&jointpf(&["pf", &bad], &[])), "BadAlphabet");
    let junk = write(dir.path(), "junk.fa", "GAAAC\n");
    assert_eq!(error_class(&jointpf(&["pf", &junk], &[])), "BadFasta");
    let f = write(dir.path(), "pair.fa", FASTA);
    assert_eq!(error_class(&jointpf(&["targets", &f, "--mem-budget", "1KiB"], &[])), "CapacityExceeded");
    assert_eq!(error_class(&jointpf(&["pf", &f, "--params", "/nonexistent"], &[])), "MissingFile");
    let p = write(dir.path(), "x.params", "nonsense = 1\n");
    assert_eq!(error_class(&jointpf(&["pf", &f, "--params", &p], &[])), "ParseError");
    assert!(!jointpf(&["sample", &f, "--num", "0"], &[]).status.success());
    assert!(!jointpf(&["targets", &f, "--threshold", "1.5"], &[]).status.success());
}

#[test]
fn oracle_subcommand_agrees_with_pf() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "small.fa", ">r\nGAUC\n>s\nGAUC\n");
    let oracle = ok(&["oracle", &f, "--full"]);
    let weighted: f64 = oracle.lines().find_map(|l| l.strip_prefix("weighted_sum\t")).unwrap().parse().unwrap();
    let (q, _, _) = report::read_pf(&ok(&["pf", &f])).unwrap();
    assert!((q - weighted).abs() <= 1e-9 * q);
    assert!(oracle.contains("## structures"));
}
