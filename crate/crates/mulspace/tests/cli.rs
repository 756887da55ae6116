use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use mulspace::msgf;
use mulspace_core::fixtures::{ensemble_member, EnsembleKind, EnsembleSpec};
use mulspace_core::{Complex64, Grid, GridFunction, Side};
use proptest::prelude::*;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mulspace").chain(args.iter().copied());
    let code = mulspace::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(r: &Run) -> Value {
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn error_field(r: &Run) -> String {
    let doc: Value =
        serde_json::from_str(r.stderr.trim()).unwrap_or_else(|_| panic!("stderr: {}", r.stderr));
    assert!(doc["error"].is_string());
    doc["field"].as_str().unwrap().to_string()
}

const SMALL: [&str; 4] = ["--points", "512", "--half-width", "16pi"];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(SMALL).collect()
}

#[test]
fn check_of_one_has_identical_columns() {
    let doc = json(&run(&[
        "check", "--symbol", "one", "--s", "1", "--jmin", "-4", "--jmax", "4",
    ]));
    assert_eq!(doc["command"], "check");
    let rows = doc["per_j"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for column in [
        "sobolev_s",
        "besov_n2_11",
        "modulation_s",
        "herz_s",
        "modulation_p1",
    ] {
        let first = rows[0][column].as_f64().unwrap();
        for row in rows {
            let v = row[column].as_f64().unwrap();
            assert!((v - first).abs() <= 1e-10 * first, "{column}");
        }
    }
}

#[test]
fn every_report_embeds_the_run_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ens");
    let out = out.to_str().unwrap();
    let runs = [
        with_small(&["partition-check", "--samples", "100"]),
        with_small(&["check", "--symbol", "sign", "--jmin", "-1", "--jmax", "1"]),
        with_small(&["kernel", "--symbol", "one", "--jmin", "0", "--jmax", "0"]),
        with_small(&["hormander", "--symbol", "sign", "--y", "1,2"]),
        with_small(&[
            "gen",
            "--kind",
            "gaussian_mix",
            "--count",
            "2",
            "--out",
            out,
        ]),
        with_small(&["verify", "--mode", "embed110", "--count", "2"]),
        with_small(&["opnorm", "--symbol", "sign"]),
    ];
    for args in runs {
        let doc = json(&run(&args));
        let config = &doc["config"];
        assert_eq!(config["grid"]["points"], 512, "{args:?}");
        assert_eq!(config["grid"]["half_width"].as_f64().unwrap(), 16.0 * PI);
        assert_eq!(
            config["rng_algorithm"],
            "chacha20:seed_from_u64:stream=member"
        );
        assert!(
            config["j_range"].is_array()
                && config["partition"].is_object()
                && config["format"] == "json"
        );
        let keys: Vec<&String> = doc.as_object().unwrap().keys().take(2).collect();
        assert_eq!(keys, ["command", "config"]);
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let r = run(&[
        "norm",
        "--spec",
        r#"{"family":"Besov","p":2,"q":1,"s":0.5}"#,
        "--input",
        "missing.msgf",
    ]);
    assert_eq!(r.code, 74);
    assert_eq!(error_field(&r), "io");

    assert_eq!(run(&["frobnicate"]).code, 64);
    assert_eq!(run(&[]).code, 64);
    assert_eq!(run(&["--help"]).code, 0);

    for (args, field) in [
        (vec!["check", "--symbol", "nope"], "symbol"),
        (
            vec!["check", "--symbol", "one", "--points", "100"],
            "points",
        ),
        (
            vec!["check", "--symbol", "one", "--jmin", "3", "--jmax", "2"],
            "j_range",
        ),
        (vec!["check", "--symbol", "one", "--p", "0.5"], "p"),
        (vec!["check", "--symbol", "one", "--bogus"], "bogus"),
        (
            vec!["check", "--symbol", "one", "--transition-window", "0.1"],
            "transition_window",
        ),
        (vec!["kernel", "--symbol", "one", "--radii", "500"], "radii"),
        (vec!["hormander", "--symbol", "one", "--y", "0"], "y"),
        (vec!["verify", "--mode", "nope"], "mode"),
        (vec!["verify", "--mode", "herz16"], "symbol"),
        (
            vec!["verify", "--mode", "prop32", "--kind", "h1_atom"],
            "kind",
        ),
        (
            vec!["verify", "--mode", "embed110", "--band", "ball:1000"],
            "band",
        ),
        (
            vec!["verify", "--mode", "embed110", "--band", "disc:3"],
            "band",
        ),
        (
            vec!["opnorm", "--symbol", "one", "--iterations", "3"],
            "iterations",
        ),
        (
            vec![
                "norm",
                "--spec",
                "{\"family\":\"Nope\"}",
                "--input",
                "x.msgf",
            ],
            "spec",
        ),
    ] {
        let r = run(&args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert_eq!(error_field(&r), field, "{args:?}");
        assert!(r.stdout.is_empty());
    }
}

#[test]
fn malformed_input_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.msgf");
    fs::write(&path, b"MSGF but not really").unwrap();
    let r = run(&[
        "norm",
        "--spec",
        r#"{"family":"Lp","p":2}"#,
        "--input",
        path.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 2);
    assert_eq!(error_field(&r), "input");
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(
        &path,
        "# small grid\npoints = 256\nhalf_width = 8pi\nj_min = -2\nj_max = 2\nformat = csv\n",
    )
    .unwrap();
    let config = path.to_str().unwrap();

    let r = run(&["check", "--symbol", "one", "--config", config]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("j,sobolev_s,"));
    assert_eq!(r.stdout.lines().count(), 1 + 5);

    let doc = json(&run(&[
        "check", "--symbol", "one", "--config", config, "--format", "json", "--jmax", "0",
    ]));
    assert_eq!(doc["config"]["grid"]["points"], 256);
    assert_eq!(doc["config"]["j_range"], serde_json::json!([-2, 0]));

    fs::write(&path, "colour = red\n").unwrap();
    let r = run(&["check", "--symbol", "one", "--config", config]);
    assert_eq!((r.code, error_field(&r)), (2, "colour".to_string()));

    let r = run(&[
        "check",
        "--symbol",
        "one",
        "--config",
        dir.path().join("absent").to_str().unwrap(),
    ]);
    assert_eq!(r.code, 74);
}

#[test]
fn single_threaded_output_is_byte_identical() {
    for args in [
        with_small(&[
            "verify",
            "--mode",
            "embed110",
            "--count",
            "6",
            "--seed",
            "3",
            "--threads",
            "1",
        ]),
        with_small(&[
            "check",
            "--symbol",
            "oscillatory:0",
            "--jmin",
            "-2",
            "--jmax",
            "2",
            "--threads",
            "1",
        ]),
        with_small(&["opnorm", "--symbol", "mihlin_poly:1", "--threads", "1"]),
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.code, 0, "{}", a.stderr);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn thread_count_does_not_change_the_report() {
    let base = with_small(&[
        "verify",
        "--mode",
        "toft_chain",
        "--count",
        "8",
        "--seed",
        "2",
    ]);
    let mut one = base.clone();
    one.extend(["--threads", "1"]);
    let mut four = base;
    four.extend(["--threads", "4"]);
    assert_eq!(run(&one).stdout, run(&four).stdout);
}

#[test]
fn gen_writes_members_that_norm_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atoms");
    let args = with_small(&[
        "gen",
        "--kind",
        "h1_atom",
        "--count",
        "3",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    let doc = json(&run(&args));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest, doc);

    let grid = Grid::new(1, 512, 16.0 * PI).unwrap();
    let spec = EnsembleSpec::new(EnsembleKind::H1Atom, 3, 9);
    for (i, member) in doc["members"].as_array().unwrap().iter().enumerate() {
        let path = out.join(member["file"].as_str().unwrap());
        let stored = msgf::load(&path).unwrap();
        assert_eq!(stored, ensemble_member(&spec, &grid, i).unwrap());

        // An atom has mean zero and sup at most 1/|Q|, so its L1 norm is at most 1.
        let r = run(&[
            "norm",
            "--spec",
            r#"{"family":"Lp","p":1}"#,
            "--input",
            path.to_str().unwrap(),
        ]);
        let value = json(&r)["value"].as_f64().unwrap();
        assert!(value > 0.0 && value <= 1.0 + 1e-12, "{value}");
    }
}

#[test]
fn norm_flags_an_undecayed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.msgf");
    let grid = Grid::new(1, 64, 4.0 * PI).unwrap();
    msgf::save(
        &GridFunction::from_real_fn(&grid, Side::Space, |_| 1.0),
        &path,
    )
    .unwrap();
    let r = run(&[
        "norm",
        "--spec",
        r#"{"family":"Sobolev","s":1}"#,
        "--input",
        path.to_str().unwrap(),
    ]);
    let doc = json(&r);
    assert_eq!(doc["config"]["grid"]["points"], 64);
    assert!(doc["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w["kind"] == "boundary"));
    assert!(r.stderr.starts_with("warning: "));
}

#[test]
fn csv_is_the_per_index_table() {
    let r = run(&with_small(&[
        "kernel", "--symbol", "sign", "--jmin", "-1", "--jmax", "1", "--format", "csv",
    ]));
    assert_eq!(r.code, 0);
    let mut reader = csv::Reader::from_reader(r.stdout.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header[..5],
        ["j", "k_l1", "grad_k_l1", "bernstein_ratio", "tail_slope"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let js: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(js, ["-1", "0", "1"]);
}

#[test]
fn atom_transfer_is_a_verify_mode() {
    let args = with_small(&[
        "verify",
        "--mode",
        "atom_transfer",
        "--symbol",
        "one",
        "--count",
        "3",
        "--atom-scales",
        "0.5,1",
    ]);
    let doc = json(&run(&args));
    let scales = doc["per_scale"].as_array().unwrap();
    assert_eq!(scales.len(), 2);
    for s in scales {
        for entry in s["per_input"].as_array().unwrap() {
            assert!((entry["ratio"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn binary_exit_codes_and_thread_env() {
    let bin = env!("CARGO_BIN_EXE_mulspace");
    let status = |args: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args(args);
        match env {
            Some(v) => cmd.env("MULSPACE_THREADS", v),
            None => cmd.env_remove("MULSPACE_THREADS"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(status(&["nope"], None).status.code(), Some(64));
    let out = status(&["opnorm", "--symbol", "one", "--points", "64"], Some("2"));
    assert_eq!(out.status.code(), Some(0));
    let out = status(&["opnorm", "--symbol", "one"], Some("lots"));
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(doc["field"], "threads");
    let help = status(&["--help"], None);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8(help.stdout).unwrap();
    assert!(text.contains("[default: 4096 in 1D, 512 in 2D]") && text.contains("MULSPACE_THREADS"));
}

fn write_read(f: &GridFunction, dir: &Path) -> GridFunction {
    let path = dir.join("f.msgf");
    msgf::save(f, &path).unwrap();
    msgf::load(&path).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn msgf_round_trip_is_exact(
        dim in 1usize..=2,
        log_n in 3u32..=5,
        half_width in 0.1..100.0_f64,
        freq in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let grid = Grid::new(dim, 1 << log_n, half_width).unwrap();
        let side = if freq { Side::Frequency } else { Side::Space };
        let mut state = seed;
        let samples = (0..grid.len())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Complex64::new(f64::from_bits(state >> 2), (state as i64 as f64) * 1e-300)
            })
            .collect();
        let f = GridFunction::new(grid, side, samples).unwrap();
        let bytes = msgf::encode(&f);
        prop_assert_eq!(msgf::decode(&bytes).unwrap(), f.clone());
        let dir = tempfile::tempdir().unwrap();
        prop_assert_eq!(write_read(&f, dir.path()), f);
    }
}
