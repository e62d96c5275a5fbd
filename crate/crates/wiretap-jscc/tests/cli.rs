//! Black-box runs of the compiled binary: stdout formats, file side
//! effects, and exit codes.

use std::process::{Command, Output};

use wiretap_jscc::experiment::read_csv_file;
use wiretap_jscc::quantizer::ScalarCodebook;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wiretap-jscc"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["analytic", "sweep", "simulate", "quantizer", "exponent"] {
        assert!(text.contains(name), "help is missing {name}:\n{text}");
    }
}

#[test]
fn analytic_prints_csv_rows() {
    let out = run(&["analytic", "--preset", "fig2", "--snr-db", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("scheme,leakage_budget_bits,snr_a_db,distortion"));
    let sep_line = text.lines().find(|l| l.starts_with("separation")).unwrap();
    assert!(sep_line.starts_with("separation,0.01,20.0,0.0195293604850170"), "{sep_line}");
    assert!(sep_line.ends_with(",0.01,analytic,,,"), "{sep_line}");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn analytic_db_flag_rescales_distortion() {
    let linear = stdout(&run(&["analytic", "--preset", "fig2", "--snr-db", "20"]));
    let db = stdout(&run(&[
        "analytic",
        "--preset",
        "fig2",
        "--snr-db",
        "20",
        "--db-distortion",
    ]));
    let pick = |text: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with("separation"))
            .unwrap()
            .split(',')
            .nth(3)
            .unwrap()
            .parse()
            .unwrap()
    };
    let lin_val = pick(&linear);
    let db_val = pick(&db);
    assert!((db_val - 10.0 * lin_val.log10()).abs() < 1e-9);
}

#[test]
fn sweep_writes_the_preset_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("curves.csv");
    let out = run(&[
        "sweep",
        "--preset",
        "fig2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("wrote 124 rows"));
    assert_eq!(read_csv_file(&out_path).unwrap().len(), 124);
}

#[test]
fn simulate_reports_distortion_and_leakage() {
    let out = run(&[
        "simulate",
        "--preset",
        "fig2",
        "--scheme",
        "uncoded",
        "--snr-db",
        "20",
        "--trials",
        "20",
        "--block-length",
        "500",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("scheme=uncoded snr_a_db=20 trials=20 block_length=500 seed=3"));
    for key in ["distortion mean=", "power mean=", "leakage_bits mean=", "distortion_analytic="] {
        assert!(text.contains(key), "missing {key:?} in:\n{text}");
    }
}

#[test]
fn quantizer_emits_parseable_codebook_json() {
    let out = run(&[
        "quantizer",
        "--preset",
        "fig2",
        "--levels",
        "2",
        "--trials",
        "20",
        "--block-length",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("levels=2 training_samples=10000"));
    let json = &text[text.find('{').unwrap()..];
    let codebook = ScalarCodebook::from_json_str(json).unwrap();
    assert_eq!(codebook.num_levels(), 2);
}

#[test]
fn exponent_prints_one_slope_per_scheme() {
    let out = run(&["exponent", "--preset", "fig2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("scheme=separation leakage_budget_bits=0.01 slope=0"));
    let uncoded_slope: f64 = text
        .lines()
        .find(|l| l.contains("scheme=uncoded"))
        .unwrap()
        .split("slope=")
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((-1.05..=-0.95).contains(&uncoded_slope), "{uncoded_slope}");
}

#[test]
fn validation_failures_exit_two_with_a_message() {
    let out = run(&["exponent", "--preset", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error:"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    std::fs::write(
        &path,
        wiretap_jscc::experiment::Preset::Fig2
            .spec()
            .to_json_string()
            .unwrap()
            .replace("\"schemes\"", "\"schemas\""),
    )
    .unwrap();
    let out = run(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_three() {
    let out = run(&["sweep", "--config", "/no/such/file.json"]);
    assert_eq!(out.status.code(), Some(3));
}
