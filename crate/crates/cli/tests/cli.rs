use std::path::PathBuf;
use std::process::{Command, Output};

fn cobose() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cobose"));
    for (key, _) in std::env::vars() {
        if key.starts_with("COBOSE_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    cobose().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cobose-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn chi_of_two_equal_modes() {
    let rows = csv_rows(&stdout(&run(&["chi", "--values", "0.5,0.5", "--n", "3"])));
    assert_eq!(rows[0], ["n", "log_chi", "chi", "ratio"]);
    assert_eq!(rows[1][0], "3");
    assert!((num(&rows[1][1]) - 3f64.ln()).abs() < 1e-14);
    assert!((num(&rows[1][2]) - 3.0).abs() < 1e-13);
    assert_eq!(rows[1][3], "");
}

#[test]
fn engines_agree_through_the_cli() {
    let outputs: Vec<Vec<Vec<String>>> = ["grouped", "recursive", "oracle"]
        .iter()
        .map(|e| {
            csv_rows(&stdout(&run(&["chi", "--values", "1/2,1/3,1/6", "--n-lin", "0:10:1", "--engine", e, "--verify"])))
        })
        .collect();
    for rows in &outputs[1..] {
        for (a, b) in rows[1..].iter().zip(&outputs[0][1..]) {
            assert!((num(&a[2]) / num(&b[2]) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn bounds_collapse_at_one_particle() {
    let rows = csv_rows(&stdout(&run(&["bounds", "--lambda1", "0.31", "--purity", "0.205", "--n", "1"])));
    assert_eq!(rows[0], ["n", "tight_lo", "tight_hi", "p_lo", "p_mid", "p_cap", "l1_floor", "l1_mid", "l1_hi"]);
    assert!((num(&rows[1][1]) - 1.205).abs() < 1e-12);
    assert!((num(&rows[1][2]) - 1.205).abs() < 1e-12);
}

#[test]
fn occupation_trailer() {
    let rows = csv_rows(&stdout(&run(&["occupation", "--values", "0.5,0.5", "--n", "4"])));
    assert_eq!(rows[0], ["m", "prob"]);
    assert_eq!(rows.len(), 1 + 5 + 2);
    assert_eq!(rows[6], ["mean", "fraction"]);
    assert!((num(&rows[7][0]) - 2.0).abs() < 1e-12);
    assert!((num(&rows[7][1]) - 0.5).abs() < 1e-12);
}

#[test]
fn fig4_multiplicities() {
    let rows = csv_rows(&stdout(&run(&["figure", "fig4", "--purity", "1e-4", "--n-grid", "1:1000:5"])));
    assert_eq!(rows[0], ["lambda1", "n", "fraction_min", "fraction_max", "multiplicity_max"]);
    let mut seen: Vec<(String, String)> = Vec::new();
    for row in &rows[1..] {
        if seen.last().map(|(l1, _)| l1) != Some(&row[0]) {
            seen.push((row[0].clone(), row[4].clone()));
        }
    }
    let multiplicities: Vec<&str> = seen.iter().map(|(_, k)| k.as_str()).collect();
    assert_eq!(multiplicities, ["1", "1", "6", "100", "10000"]);
}

#[test]
fn fig2_lists_both_constructions() {
    let rows = csv_rows(&stdout(&run(&["figure", "fig2"])));
    assert_eq!(rows[0], ["distribution", "kind", "value", "multiplicity"]);
    assert_eq!(rows.iter().filter(|r| r[0] == "max").count(), 3);
    assert_eq!(rows.iter().filter(|r| r[0] == "min").count(), 3);
}

#[test]
fn exit_codes_and_diagnostics() {
    let cases: [(&[&str], i32); 6] = [
        (&["chi", "--values", "0.5,0.5"], 2),
        (&["chi", "--values", "0.5,0.4", "--n", "2"], 2),
        (&["bounds", "--lambda1", "0.3", "--purity", "0.01", "--n", "2"], 3),
        (&["chi", "--values", "0.5,0.5", "--n", "20000"], 4),
        (&["chi", "--values", "0.5,0.5", "--n", "13", "--engine", "oracle"], 4),
        (&["chi", "--unknown-flag"], 2),
    ];
    for (args, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["exit_code"], code);
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn flags_beat_environment_beat_config() {
    let dir = scratch("layers");
    let config = dir.join("config.json");
    std::fs::write(&config, r#"{"values": "1", "n": 5, "format": "json"}"#).unwrap();
    let config = config.to_str().unwrap();

    let from_file = stdout(&run(&["chi", "--config", config]));
    let v: serde_json::Value = serde_json::from_str(&from_file).unwrap();
    assert_eq!(v["rows"][0]["n"], 5);

    let out =
        cobose().args(["chi", "--config", config]).env("COBOSE_N", "4").env("COBOSE_FORMAT", "csv").output().unwrap();
    assert!(stdout(&out).starts_with("n,log_chi,chi,ratio\n4,"));

    let out = cobose().args(["chi", "--config", config, "--n", "3"]).env("COBOSE_N", "4").output().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rows"][0]["n"], 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_file_matches_stdout() {
    let dir = scratch("out");
    let path = dir.join("ratio.csv");
    let args =
        ["ratio", "--groups", r#"{"groups": [{"value": 0.2, "mult": 3}], "tail_mass": 0.4}"#, "--n-grid", "1:100:4"];
    let direct = stdout(&run(&args));
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert!(stdout(&run(&with_out)).is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let args = ["bounds", "--lambda1", "0.1", "--purity", "0.02", "--n-lin", "1:5:2"];
    let csv = csv_rows(&stdout(&run(&args)));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&json_args))).unwrap();
    for (i, row) in csv[1..].iter().enumerate() {
        for (j, col) in csv[0].iter().enumerate().skip(1) {
            assert_eq!(v["rows"][i][col].as_f64().unwrap(), num(&row[j]));
        }
    }
}
