use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use toral_nodal::config::{ExperimentConfig, NSpec};
use toral_nodal::export::EigenfunctionFile;
use toral_nodal::output::{execute, strip_header};
use toral_nodal::records::{parse_jsonl, ExceptionRow, Record};
use toral_nodal::run::{generate, nodal_eigenfunction};
use toral_nodal::Command;

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_toral-nodal"))
}

fn brute_count(n: u64) -> usize {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut c = 0;
    for x in -r..=r {
        for y in -r..=r {
            c += usize::from((x * x + y * y) as u64 == n);
        }
    }
    c
}

fn read_rows(path: &Path) -> Vec<Record> {
    parse_jsonl(&fs::read_to_string(path).unwrap()).unwrap().1
}

#[test]
fn lattice_rows_match_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["lattice", "--n", "1..100", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&dir.path().join("lattice.jsonl"));
    let expected: Vec<u64> = (1..100).filter(|&n| brute_count(n) > 0).collect();
    assert_eq!(rows.len(), 42);
    let got: Vec<u64> = rows
        .iter()
        .map(|r| match r {
            Record::Lattice(l) => {
                assert_eq!(l.count, brute_count(l.n));
                assert!(l.jarnik_ok && l.jarnik_max <= 2);
                assert_eq!(l.cc_violations, Some(0));
                l.n
            }
            other => panic!("unexpected row {other:?}"),
        })
        .collect();
    assert_eq!(got, expected);
    for (i, r) in rows.iter().enumerate() {
        let Record::Lattice(l) = r else { unreachable!() };
        assert_eq!(l.run, i);
    }
    let csv = fs::read_to_string(dir.path().join("lattice.csv")).unwrap();
    assert_eq!(csv.lines().count(), 43);
}

#[test]
fn empty_range_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { n: NSpec::Range([3, 4]), ..Default::default() };
    let w = execute(Command::Lattice, &cfg, dir.path()).unwrap();
    assert_eq!(w.rows, 0);
    let text = fs::read_to_string(&w.jsonl).unwrap();
    assert_eq!(text.lines().count(), 1);
    let (header, rows) = parse_jsonl(&text).unwrap();
    assert_eq!(header.command, "lattice");
    assert!(rows.is_empty());
}

#[test]
fn nodal_runs_are_deterministic() {
    let cfg = ExperimentConfig { n: NSpec::List(vec![65, 1105]), seeds: 3, seed: 5, ..Default::default() };
    let a = generate(Command::Nodal, &cfg).unwrap().rows;
    let b = generate(Command::Nodal, &ExperimentConfig { jobs: 1, ..cfg.clone() }).unwrap().rows;
    assert_eq!(a, b);
    assert_eq!(a.len(), 6);
    let seeds: Vec<u64> = a
        .iter()
        .map(|r| match r {
            Record::Nodal(x) => {
                assert!(x.holder_ok);
                x.seed
            }
            _ => unreachable!(),
        })
        .collect();
    let mut unique = seeds.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 3, "the same seed index reuses the same seed across n");
}

#[test]
fn seed_offset_shifts_the_ensemble() {
    let base = ExperimentConfig { n: NSpec::List(vec![65]), seeds: 4, ..Default::default() };
    let all = generate(Command::Nodal, &base).unwrap().rows;
    let tail = generate(Command::Nodal, &ExperimentConfig { seeds: 2, seed_offset: 2, ..base }).unwrap().rows;
    let seed = |r: &Record| match r {
        Record::Nodal(x) => (x.seed, x.sign_changes),
        _ => unreachable!(),
    };
    assert_eq!(all[2..].iter().map(seed).collect::<Vec<_>>(), tail.iter().map(seed).collect::<Vec<_>>());
}

#[test]
fn bad_configs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"sigma": 0.9}"#,
        r#"{"unknown_field": 1}"#,
        r#"{"schema": "toral-nodal/0"}"#,
        r#"{"seeds": 0}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = dir.path().join(format!("c{i}.json"));
        fs::write(&path, text).unwrap();
        let out = bin().arg("nodal").arg("--config").arg(&path).arg("--out").arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(3), "{text}");
    }
    let out = bin().args(["lattice", "--n", "x..y"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_config_and_unwritable_out_exit_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["lattice", "--config"]).arg(dir.path().join("absent.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = bin().args(["lattice", "--n", "5", "--out"]).arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"n": {"list": [25, 65]}, "seeds": 2, "plot": false,
            "curve": {"kind": "ellipse_arc", "center": [0, 0], "a": 2, "b": 1, "start": 0.1, "end": 0.6}}"#,
    )
    .unwrap();
    let out = bin()
        .arg("nodal")
        .arg("--config")
        .arg(&cfg)
        .args(["--seeds", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = parse_jsonl(&fs::read_to_string(dir.path().join("nodal.jsonl")).unwrap()).unwrap();
    assert_eq!(header.config.seeds, 3);
    assert_eq!(rows.len(), 6);
    assert!(!dir.path().join("nodal_ratio_thm11.svg").exists());
}

#[test]
fn sweep_writes_summary_plots_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n: NSpec::List(vec![65, 1105]),
        seeds: 2,
        commands: vec![Command::Lattice, Command::Nodal, Command::Schur],
        ..Default::default()
    };
    let w = execute(Command::Sweep, &cfg, dir.path()).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(w.summary.unwrap()).unwrap()).unwrap();
    assert_eq!(summary["nodal_runs"], 4);
    assert_eq!(summary["rows"]["lattice"], 2);
    for name in ["sweep_ratio_thm11.svg", "sweep_ratio_thm12.svg", "sweep_n_over_lambda.svg"] {
        let svg = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name}");
    }
    for c in ["lattice", "nodal", "schur"] {
        assert!(dir.path().join(format!("sweep_{c}.csv")).exists(), "{c}");
    }
    let rows = read_rows(&w.jsonl);
    let order: Vec<&str> = rows.iter().map(Record::command).collect();
    let first_nodal = order.iter().position(|&c| c == "nodal").unwrap();
    assert!(order[..first_nodal].iter().all(|&c| c == "lattice"));
}

#[test]
fn schur_table_for_a_rich_circle() {
    let cfg = ExperimentConfig { n: NSpec::List(vec![5, 1105]), ..Default::default() };
    let rows = generate(Command::Schur, &cfg).unwrap().rows;
    let mut rich = 0;
    for r in &rows {
        let Record::Schur(s) = r else { unreachable!() };
        rich += usize::from(s.n == 1105);
        assert_eq!(s.bound_sq, s.norm1to1 * s.norm_adj1to1);
        assert!((s.bilinear_blocked - s.bilinear_flat).abs() <= 1e-12 * s.bilinear_flat.abs().max(1.0));
    }
    assert!(rich > 0);
}

#[test]
fn exceptions_rows() {
    let rows = generate(Command::Exceptions, &ExperimentConfig::default()).unwrap().rows;
    let (mut geo, mut wit, mut leg) = (0, 0, 0);
    for r in &rows {
        match r {
            Record::Exceptions(ExceptionRow::Geodesic { max_on_geodesic, .. }) => {
                geo += 1;
                assert!(*max_on_geodesic <= 1e-12);
            }
            Record::Exceptions(ExceptionRow::Witness { sign_changes, min_on_segment, lower_bound, .. }) => {
                wit += 1;
                assert_eq!(*sign_changes, 0);
                assert!(min_on_segment >= lower_bound);
            }
            Record::Exceptions(ExceptionRow::Legendre { branch, hits, .. }) => {
                leg += 1;
                if branch == "equator" {
                    assert!(*hits > 0);
                }
            }
            Record::Exceptions(ExceptionRow::Convergent { error, bound, .. }) => assert!(error <= bound),
            other => panic!("unexpected row {other:?}"),
        }
    }
    assert_eq!((geo, wit, leg), (3, 8, 3));
}

#[test]
fn eigenfunction_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n: NSpec::List(vec![1105]),
        seeds: 2,
        seed: 3,
        export_eigenfunctions: true,
        plot: false,
        ..Default::default()
    };
    let w = execute(Command::Nodal, &cfg, dir.path()).unwrap();
    assert_eq!(w.exports.len(), 2);
    let path = dir.path().join("eigenfunctions").join("nodal_n1105_s1.json");
    let file: EigenfunctionFile = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let back = file.to_eigenfunction().unwrap();
    let direct = nodal_eigenfunction(&cfg, 1105, 1).unwrap();
    assert_eq!(back.coeffs(), direct.coeffs());
    for x in [[0.1, 0.2], [1.3, -0.7]] {
        assert_eq!(back.evaluate(x), direct.evaluate(x));
    }
}

#[test]
fn replay_matches_across_worker_counts() {
    let cfg = ExperimentConfig { n: NSpec::List(vec![65, 325]), seeds: 3, plot: false, ..Default::default() };
    let mut texts = Vec::new();
    for jobs in [1, 4] {
        let dir = tempfile::tempdir().unwrap();
        let w = execute(Command::Nodal, &ExperimentConfig { jobs, ..cfg.clone() }, dir.path()).unwrap();
        texts.push(strip_header(&fs::read_to_string(w.jsonl).unwrap()).to_string());
    }
    assert_eq!(texts[0], texts[1]);
}
