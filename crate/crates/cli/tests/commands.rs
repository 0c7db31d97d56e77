use std::path::Path;
use std::process::{Command, Output};

use pnlsep::bundle::SolutionBundle;
use pnlsep::csvio::load_csv;

fn pnlsep(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pnlsep"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: [&str; 6] = ["--pop", "20", "--archive", "10", "--gens", "5"];

fn args<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn synth_writes_loadable_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pnlsep(&["synth", "--seed", "3", "--out", "data"], dir.path()));
    let x = load_csv(dir.path().join("data/mixtures.csv")).unwrap();
    let s = load_csv(dir.path().join("data/truth.csv")).unwrap();
    assert_eq!((x.channels(), x.samples()), (2, 41));
    assert_eq!((s.channels(), s.samples()), (2, 41));
    assert_eq!(x.labels().unwrap(), ["e1_mv", "e2_mv"]);
    assert!(dir.path().join("data/synth.json").exists());
}

#[test]
fn default_run_fills_archive() {
    let dir = tempfile::tempdir().unwrap();
    let table = ok(&pnlsep(&["run", "--synthetic", "--seed", "7"], dir.path()));
    let bundle = SolutionBundle::load(dir.path().join("bundle.json")).unwrap();
    assert_eq!(bundle.archive.len(), 50);
    assert!(bundle.max_recompute_error().unwrap() <= 1e-9);
    // header, 50 entries, 2 baselines
    assert_eq!(table.lines().count(), 53);
}

#[test]
fn console_table_matches_bundle_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let table = ok(&pnlsep(&args(&["run", "--synthetic", "--seed", "2"], &SMALL), dir.path()));
    let bundle = SolutionBundle::load(dir.path().join("bundle.json")).unwrap();
    let entries: Vec<_> = bundle
        .archive
        .iter()
        .chain([&bundle.baselines.nernst, &bundle.baselines.sobi_criterion])
        .collect();
    for (line, e) in table.lines().skip(1).zip(entries) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let sir = e.sir.as_ref().unwrap();
        let printed: Vec<f64> = fields[fields.len() - 3..].iter().map(|v| v.parse().unwrap()).collect();
        assert_eq!(printed, [sir.per_source[0], sir.per_source[1], sir.average]);
    }
}

#[test]
fn degenerate_config_gives_single_entry() {
    let dir = tempfile::tempdir().unwrap();
    let a = ["run", "--synthetic", "--gens", "0", "--pop", "1", "--archive", "1"];
    ok(&pnlsep(&a, dir.path()));
    let bundle = SolutionBundle::load(dir.path().join("bundle.json")).unwrap();
    assert_eq!(bundle.archive.len(), 1);
    assert_eq!(bundle.best_index, Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = args(&["run", "--synthetic", "--seed", "11", "--out", "a.json"], &SMALL);
    let b = args(&["run", "--synthetic", "--seed", "11", "--out", "b.json"], &SMALL);
    ok(&pnlsep(&a, dir.path()));
    ok(&pnlsep(&b, dir.path()));
    let read = |f: &str| {
        let mut bundle = SolutionBundle::load(dir.path().join(f)).unwrap();
        bundle.manifest.command.clear();
        bundle.to_json().unwrap()
    };
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn file_inputs_round_trip_through_run() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pnlsep(&["synth", "--seed", "5", "--out", "."], dir.path()));
    let a = args(&["run", "--input", "mixtures.csv", "--truth", "truth.csv", "--seed", "5"], &SMALL);
    ok(&pnlsep(&a, dir.path()));
    let from_files = SolutionBundle::load(dir.path().join("bundle.json")).unwrap();
    let b = args(&["run", "--synthetic", "--seed", "5", "--out", "syn.json"], &SMALL);
    ok(&pnlsep(&b, dir.path()));
    let synthetic = SolutionBundle::load(dir.path().join("syn.json")).unwrap();
    assert_eq!(from_files.manifest.inputs, ["mixtures.csv", "truth.csv"]);
    // CSV text keeps full precision, so the runs agree
    assert_eq!(from_files.archive, synthetic.archive);
}

#[test]
fn sweep_single_reference_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = args(&["sweep", "--synthetic", "--seed", "4", "--range", "59,59"], &SMALL);
    let table = ok(&pnlsep(&sweep, dir.path()));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 2);
    let best: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();

    ok(&pnlsep(&args(&["run", "--synthetic", "--seed", "4"], &SMALL), dir.path()));
    let bundle = SolutionBundle::load(dir.path().join("bundle.json")).unwrap();
    assert_eq!(best, bundle.best_entry().unwrap().average_sir().unwrap());

    let plotted = ok(&pnlsep(&["plotdata", "--input", "sweep.json", "--figure", "sweep"], dir.path()));
    assert_eq!(plotted, table);
}

#[test]
fn sweep_grid_has_nine_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = ["sweep", "--synthetic", "--pop", "10", "--archive", "6", "--gens", "2"];
    let table = ok(&pnlsep(&a, dir.path()));
    assert_eq!(table.lines().count(), 10);
    let bundle = SolutionBundle::load(dir.path().join("sweep.json")).unwrap();
    let rows = bundle.sweep.unwrap();
    assert!(rows.iter().all(|r| r.best_sir.is_finite() && r.archive_size == 6));
}

#[test]
fn plotdata_figures() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pnlsep(&args(&["run", "--synthetic", "--seed", "9"], &SMALL), dir.path()));
    let front = ok(&pnlsep(&["plotdata", "--input", "bundle.json", "--figure", "front"], dir.path()));
    assert_eq!(front.lines().count(), 1 + 10 + 2);

    let sir = ok(&pnlsep(&["plotdata", "--input", "bundle.json", "--figure", "sir-by-index"], dir.path()));
    let j1: Vec<f64> = sir.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(j1.windows(2).all(|w| w[0] <= w[1]));

    let a = ["plotdata", "--input", "bundle.json", "--figure", "sources", "--entry", "3", "--out", "s.csv"];
    ok(&pnlsep(&a, dir.path()));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,s1,s2,y1,y2,yhat1,yhat2");
    assert_eq!(text.lines().count(), 42);

    // no sweep in a run bundle
    let out = pnlsep(&["plotdata", "--input", "bundle.json", "--figure", "sweep"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn baselines_table() {
    let dir = tempfile::tempdir().unwrap();
    let a = args(&["baselines", "--synthetic", "--seed", "1", "--out", "base.json"], &SMALL);
    let table = ok(&pnlsep(&a, dir.path()));
    assert_eq!(table.lines().count(), 3);
    assert!(table.lines().nth(1).unwrap().starts_with("nernst"));
    let json = std::fs::read_to_string(dir.path().join("base.json")).unwrap();
    assert!(json.contains("\"sobi_criterion\""));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for a in [
        &["run"][..],
        &["run", "--synthetic", "--frobnicate"],
        &["run", "--synthetic", "--bounds", "10"],
        &["run", "--synthetic", "--pop", "0"],
        &["plotdata", "--input", "b.json", "--figure", "pie"],
        &["sweep", "--synthetic", "--range", "5,80"],
    ] {
        assert_eq!(pnlsep(a, dir.path()).status.code(), Some(2), "{a:?}");
    }
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ragged.csv"), "1,2\n3\n4,5\n").unwrap();
    let out = pnlsep(&["run", "--input", "ragged.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
    let missing = pnlsep(&["run", "--input", "nope.csv"], dir.path());
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn numerical_failure_exits_4_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    // a flat electrode cannot be whitened
    let rows: String = (0..41).map(|t| format!("{},-20\n", (t as f64 * 0.7).sin() * 10.0 - 60.0)).collect();
    std::fs::write(dir.path().join("flat.csv"), rows).unwrap();
    let out = pnlsep(&args(&["run", "--input", "flat.csv", "--out", "f.json"], &SMALL), dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("f.json").exists());
    let manifest = std::fs::read_to_string(dir.path().join("f.json.manifest.json")).unwrap();
    assert!(manifest.contains("flat.csv"));
    assert!(manifest.contains("\"error\""));
}
