use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ehypo_core::{Distribution, EHypoParams, Hypoexponential};
use ehypofit::commands::{eval_table, plot_data};
use ehypofit::output::round_sig;
use ehypofit::{Grid, ModelSpec};
use serde_json::Value;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/bladder_cancer.csv")
}

fn ehypofit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehypofit"))
        .args(args)
        .env_remove("EHYPOFIT_SEED")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn eval_worked_example_grid() {
    let out = ehypofit(&["eval", "--rates", "5,4,3", "--k", "3", "--grid", "0:10:0.01", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,pdf,cdf,survival,hazard");
    assert_eq!(lines.len(), 1002);
    let row: Vec<f64> = lines[201].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 2.0);
    assert!((row[3] - 0.0588886).abs() < 5e-4, "{row:?}");
}

#[test]
fn eval_with_unit_exponent_is_hypoexponential() {
    let params = EHypoParams::from_rates(&[0.5, 2.0], 1.0).unwrap();
    let hypo = Hypoexponential::from_rates(&[0.5, 2.0]).unwrap();
    let table = eval_table(&params, &Grid::new(0.0, 8.0, 0.25).unwrap());
    for row in &table.rows {
        assert!((row.pdf - hypo.pdf(row.t)).abs() <= 1e-15, "{row:?}");
        assert!((row.cdf - hypo.cdf(row.t)).abs() <= 1e-15, "{row:?}");
        assert!((row.survival - hypo.survival(row.t)).abs() <= 1e-15, "{row:?}");
    }
    let a = stdout(&ehypofit(&["eval", "--rates", "0.5,2", "--k", "1", "--grid", "0:8:0.25"]));
    let b = stdout(&ehypofit(&["eval", "--model", "hypoexp", "--rates", "0.5,2", "--grid", "0:8:0.25"]));
    assert_eq!(a, b);
}

#[test]
fn config_errors_exit_one() {
    for args in [
        &["eval", "--rates", "5,4,3", "--k", "3", "--grid", "0:0:1"][..],
        &["eval", "--rates", "5,4,3", "--k", "3"],
        &["eval", "--rates", "1,1", "--k", "2", "--grid", "0:1:0.1"],
        &["eval", "--rates", "1,-2", "--k", "2", "--grid", "0:1:0.1"],
        &["fit", "--data", "x.csv", "--n", "0"],
        &["compare", "--data", "x.csv", "--model", "ehypoexp:2"],
        &["sample", "--rates", "1", "--k", "2"],
        &["fit", "--format", "xml", "--data", "x.csv"],
        &["frobnicate"],
    ] {
        let out = ehypofit(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(ehypofit(&["--help"]).status.code(), Some(0));
}

#[test]
fn ingestion_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("parse.csv", "1.0\n2.0\nabc\n", "line 3"),
        ("negative.csv", "1.0, -2.0\n", "not positive"),
        ("empty.csv", "\n\n", "no values"),
    ];
    for (name, text, needle) in cases {
        let path = write(dir.path(), name, text);
        let out = ehypofit(&["fit", "--data", &path]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let missing = dir.path().join("missing.csv");
    assert_eq!(ehypofit(&["plotdata", "--data", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn mixed_separators_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "mixed.csv", "1.0, 2.0\n3.0\n");
    let out = ehypofit(&["fit", "--data", &path, "--model", "exp"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["data"]["count"], 3);
    assert_eq!(report["estimates"]["rates"][0].as_f64().unwrap(), round_sig(0.5));
}

#[test]
fn fit_reports_on_fixture() {
    let data = fixture();
    let data = data.to_str().unwrap();
    let out = ehypofit(&["fit", "--data", data, "--model", "ehypoexp", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["model"], "ehypoexp:2");
    assert_eq!(r["data"]["count"], 128);
    assert_eq!(r["convergence"]["converged"], true);
    let k = r["estimates"]["k"].as_f64().unwrap();
    assert!((k - 0.718769).abs() < 0.01, "{k}");
    let s = &r["statistics"];
    let neg2 = s["neg2loglik"].as_f64().unwrap();
    assert!((neg2 - 823.33).abs() < 2.0);
    assert!((s["aic"].as_f64().unwrap() - round_sig(neg2 + 6.0)).abs() < 1e-6);
    assert!((s["bic"].as_f64().unwrap() - (neg2 + 3.0 * 128f64.ln())).abs() < 1e-6);

    let hypo = json(&ehypofit(&["fit", "--data", data, "--model", "hypoexp", "--n", "2"]));
    let neg2 = hypo["statistics"]["neg2loglik"].as_f64().unwrap();
    assert!((neg2 - 826.09).abs() < 2.0, "{neg2}");
    assert_eq!(hypo["estimates"]["k"], 1.0);

    let csv = stdout(&ehypofit(&["fit", "--data", data, "--format", "csv"]));
    assert!(csv.starts_with("field,value\nmodel,ehypoexp:2\n"), "{csv}");
    assert!(csv.contains("\ncount,128\n"));
}

#[test]
fn compare_ranks_models() {
    let data = fixture();
    let data = data.to_str().unwrap();
    let out = ehypofit(&["compare", "--data", data, "--model", "hypoexp:2", "--model", "ehypoexp:2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let row = |name: &str| r["rows"].as_array().unwrap().iter().find(|x| x["model"] == name).unwrap().clone();
    let (e, h) = (row("ehypoexp:2"), row("hypoexp:2"));
    for stat in ["neg2loglik", "a_star", "w_star"] {
        assert!(e["statistics"][stat].as_f64() < h["statistics"][stat].as_f64(), "{stat}");
    }
    let rankings = r["rankings"].as_array().unwrap();
    assert_eq!(rankings.len(), 6);
    let by_bic = rankings.iter().find(|x| x["criterion"] == "bic").unwrap();
    assert_eq!(by_bic["order"][0], "hypoexp:2");
}

#[test]
fn compare_same_model_twice_gives_identical_rows() {
    let data = fixture();
    let r = json(&ehypofit(&["compare", "--data", data.to_str().unwrap(), "--model", "ehypoexp:2,ehypoexp:2"]));
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn compare_keeps_going_when_a_model_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "tiny.csv", "1.0 2.0 3.0 4.0\n");
    let out = ehypofit(&["compare", "--data", &path, "--model", "exp,ehypoexp:3"]);
    assert_eq!(out.status.code(), Some(3));
    let r = json(&out);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows[0]["status"], "ok");
    assert_eq!(rows[1]["status"], "failed");
    assert!(rows[1]["error"].as_str().unwrap().contains("too few"));
}

#[test]
fn plotdata_histogram_and_curve() {
    let model = ModelSpec::parse("ehypoexp", Some(2)).unwrap();
    let plot = plot_data(model, &fixture(), None, 42).unwrap();
    let area: f64 = plot.histogram.iter().map(|b| b.density * (b.right - b.left)).sum();
    assert!((area - 1.0).abs() < 1e-9, "{area}");
    assert_eq!(plot.histogram.iter().map(|b| b.count).sum::<usize>(), 128);
    let dist = EHypoParams::from_rates(&plot.estimates.rates, plot.estimates.k).unwrap().distribution();
    for p in &plot.curve {
        assert_eq!(p.pdf, dist.pdf(p.t));
    }

    let out = ehypofit(&["plotdata", "--data", fixture().to_str().unwrap(), "--grid", "0:80:0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["curve"].as_array().unwrap().len(), 161);
    for p in r["curve"].as_array().unwrap() {
        let t = p["t"].as_f64().unwrap();
        assert_eq!(p["pdf"].as_f64().unwrap(), round_sig(dist.pdf(t)));
    }
    let empty = ehypofit(&["plotdata", "--data", fixture().to_str().unwrap(), "--grid", "1:1:0.5"]);
    assert_eq!(empty.status.code(), Some(1));

    let csv = stdout(&ehypofit(&["plotdata", "--data", fixture().to_str().unwrap(), "--format", "csv"]));
    let blocks: Vec<&str> = csv.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].starts_with("left,right,count,density\n"));
    assert!(blocks[1].starts_with("t,pdf\n"));
}

#[test]
fn json_round_trips_exactly() {
    let data = fixture();
    let data = data.to_str().unwrap();
    for args in [
        &["eval", "--rates", "5,4,3", "--k", "3", "--grid", "0:10:0.5"][..],
        &["sample", "--rates", "0.5,2", "--k", "0.7", "--count", "200"],
        &["fit", "--data", data],
        &["compare", "--data", data, "--model", "exp,hypoexp:2"],
    ] {
        let text = stdout(&ehypofit(args));
        let parsed: Value = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
        assert_eq!(text, again, "{args:?}");
    }
}

#[test]
fn reruns_are_byte_identical_and_seeded() {
    let base = ["sample", "--rates", "0.5,2", "--k", "0.7", "--count", "500", "--format", "csv"];
    let a = ehypofit(&base);
    assert_eq!(a.stdout, ehypofit(&base).stdout);

    let with_seed = |seed: &str| {
        let mut args = base.to_vec();
        args.extend(["--seed", seed]);
        ehypofit(&args).stdout
    };
    assert_eq!(a.stdout, with_seed("42"));
    assert_ne!(a.stdout, with_seed("7"));

    let env = Command::new(env!("CARGO_BIN_EXE_ehypofit")).args(base).env("EHYPOFIT_SEED", "7").output().unwrap();
    assert_eq!(env.stdout, with_seed("7"));
    let explicit = Command::new(env!("CARGO_BIN_EXE_ehypofit"))
        .args(base)
        .args(["--seed", "42"])
        .env("EHYPOFIT_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(explicit.stdout, a.stdout);
    let bad_env = Command::new(env!("CARGO_BIN_EXE_ehypofit")).args(base).env("EHYPOFIT_SEED", "x").output().unwrap();
    assert_eq!(bad_env.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("grid.csv");
    let args = ["eval", "--rates", "2", "--model", "exp", "--grid", "0:1:0.25", "--format", "csv"];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", target.to_str().unwrap()]);
    let out = ehypofit(&with_out);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), ehypofit(&args).stdout);

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let mut bad = args.to_vec();
    bad.extend(["--out", unwritable.to_str().unwrap()]);
    assert_eq!(ehypofit(&bad).status.code(), Some(1));
}
