use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainstore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn records(csv_text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column<'a>(header: &[String], rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let i = header.iter().position(|h| h == name).expect("column exists");
    rows.iter().map(|r| r[i].as_str()).collect()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&all)).unwrap()
}

#[test]
fn solve_high_prior_point() {
    let v = json(&["solve", "--p0", "0.6", "--pi", "0.8"]);
    assert_eq!(v[0]["regime"], "HIGH_FIGHT");
    assert_eq!(v[0]["qA"], 1.0);
}

#[test]
fn solve_simultaneous_entry() {
    let v = json(&["solve", "--protocol", "simultaneous", "--p0", "0.3"]);
    assert_eq!(v[0]["regime"], "SIMULTANEOUS");
    assert_eq!(v[0]["entrantAEnters"], true);
    assert_eq!(v[0]["exAnteEntryB"], 1.0);
    assert_eq!(v[0]["qA"], 0.0);
}

#[test]
fn solve_with_noise_and_verification() {
    let v = json(&["solve", "--p0", "0.6", "--pi", "0.8", "--eps-f", "0.45", "--eps-a", "0.45", "--verify"]);
    assert_eq!(v[0]["regime"], "LOW_ACCOMMODATE");
    assert_eq!(v[0]["verification"]["passed"], true);
}

#[test]
fn exact_fractions_reach_the_boundary() {
    let v = json(&["solve", "--p0", "3/10", "--pi", "5/7", "--rational"]);
    assert_eq!(v[0]["regime"], "BOUNDARY_MIX");
    let float = json(&["solve", "--p0", "0.3", "--pi", "0.714"]);
    assert_eq!(float[0]["regime"], "LOW_ACCOMMODATE");
}

#[test]
fn region_grid_shapes() {
    let (h, rows) = records(&stdout(&["regions", "--grid", "2x2"]));
    assert_eq!(h, ["p0", "pi", "regime", "qA", "exAnteEntryB", "fightProb"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(column(&h, &rows, "regime").iter().filter(|r| **r == "HIGH_FIGHT").count(), 1);

    let (h, rows) = records(&stdout(&["regions", "--grid", "6x6", "--a", "0.5", "--c", "0.6"]));
    assert!(column(&h, &rows, "regime").iter().all(|r| *r != "HIGH_FIGHT"));
}

#[test]
fn region_boundary_sits_at_the_thresholds() {
    let (h, rows) = records(&stdout(&["regions", "--grid", "101x101"]));
    assert_eq!(rows.len(), 101 * 101);
    let p0 = column(&h, &rows, "p0");
    let pi = column(&h, &rows, "pi");
    let regime = column(&h, &rows, "regime");
    for i in 0..rows.len() {
        let (p, q): (f64, f64) = (p0[i].parse().unwrap(), pi[i].parse().unwrap());
        let expected = p > 0.5 && q >= 5.0 / 7.0;
        assert_eq!(regime[i] == "HIGH_FIGHT", expected, "p0 = {p}, pi = {q}");
    }
    // Rows are in lexicographic (p0, pi) order.
    assert_eq!((p0[0], pi[0], pi[1]), ("0.01", "0", "0.01"));
}

#[test]
fn low_prior_pi_sweep() {
    let (h, rows) = records(&stdout(&["sweep", "--axis", "pi", "--p0", "0.3", "--points", "21"]));
    let pi = column(&h, &rows, "pi");
    let entry = column(&h, &rows, "exAnteEntryB");
    let mut prev = f64::INFINITY;
    for (x, e) in pi.iter().zip(&entry) {
        let (x, e): (f64, f64) = (x.parse().unwrap(), e.parse().unwrap());
        if x < 5.0 / 7.0 {
            assert!((e - (1.0 - 0.3 * x)).abs() < 1e-11);
        }
        assert!(e <= prev + 1e-12);
        prev = e;
    }
}

#[test]
fn sweep_reports_monotonicity() {
    let v = json(&["sweep", "--axis", "pi", "--p0", "0.6", "--points", "51"]);
    assert_eq!(v["axis"], "pi");
    assert_eq!(v["monotonicity"]["qA"], "weakly_increasing");
    let out = run(&["sweep", "--axis", "pi", "--p0", "0.6", "--points", "11"]);
    let notes = String::from_utf8(out.stderr).unwrap();
    assert!(notes.contains("monotonicity qA: weakly_increasing"));
}

#[test]
fn acquisition_flips_at_the_cutoff() {
    let (h, rows) = records(&stdout(&[
        "sweep", "--axis", "k", "--p0", "0.3", "--pi", "0.5", "--lo", "0", "--hi", "0.3", "--points", "7",
    ]));
    let k = column(&h, &rows, "k");
    let acq = column(&h, &rows, "acquires");
    for (k, a) in k.iter().zip(&acq) {
        let k: f64 = k.parse().unwrap();
        assert_eq!(*a == "true", k <= 0.15 + 1e-12, "k = {k}");
    }
}

#[test]
fn value_of_information_example() {
    let v = json(&["voi", "--p0", "0.3", "--pi", "0.5", "--k", "0.1", "--q-a", "0"]);
    assert!((v["voi"].as_f64().unwrap() - 0.15).abs() < 1e-12);
    assert_eq!(v["acquires"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--p0", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--set", "model.unknown=1"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--set", "oops"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "--p0", "0.6", "--pi", "0.5", "--candidate-q", "1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["solve", "--p0", "0.3", "--pi", "0.5", "--k", "0.1"]).status.code(),
        Some(4)
    );
    assert_eq!(run(&["verify", "--p0", "0.6", "--pi", "0.5"]).status.code(), Some(0));
}

#[test]
fn planted_candidate_report() {
    let out = run(&["verify", "--p0", "0.6", "--pi", "0.5", "--candidate-q", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gain = v[0]["verification"]["maxIncumbentGain"].as_f64().unwrap();
    assert!((gain - 0.15).abs() < 1e-12);
    assert_eq!(v[0]["verification"]["passed"], false);
}

#[test]
fn simulation_output_is_reproducible() {
    let args = ["simulate", "--n-markets", "4", "--t-periods", "4", "--p0", "0.4", "--pi", "0.7", "--reps", "3000", "--seed", "5"];
    assert_eq!(stdout(&args), stdout(&args));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    assert_eq!(stdout(&json_args), stdout(&json_args));
    let v: serde_json::Value = serde_json::from_str(&stdout(&json_args)).unwrap();
    assert_eq!(v["replications"], 3000);
    assert_eq!(v["periods"].as_array().unwrap().len(), 4);
}

#[test]
fn unobserved_markets_have_flat_entry() {
    let (h, rows) = records(&stdout(&[
        "simulate", "--n-markets", "4", "--t-periods", "4", "--p0", "0.3", "--pi", "0",
        "--policy", "constant(1)", "--entry-mode", "cutoff", "--reps", "500",
    ]));
    assert!(column(&h, &rows, "entry").iter().all(|e| *e == "1"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"p0": "3/10", "pi": 0.5}, "payoffs": {"M": 1, "a": 0.3, "c": 0.2, "d": 1, "v": 1}, "output": {"format": "json"}}"#,
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&["solve", "--config", path])).unwrap();
    assert_eq!(v[0]["p0"], 0.3);
    assert_eq!(v[0]["regime"], "LOW_ACCOMMODATE");
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["solve", "--config", path, "--set", "model.pi=0.9", "--p0", "0.6"])).unwrap();
    assert_eq!(v[0]["regime"], "HIGH_FIGHT");

    let out = dir.path().join("regions.csv");
    stdout(&["regions", "--grid", "3x3", "--out", out.to_str().unwrap()]);
    let (_, rows) = records(&std::fs::read_to_string(out).unwrap());
    assert_eq!(rows.len(), 9);
}

#[test]
fn csv_numbers_round_trip_at_twelve_digits() {
    let text = stdout(&["sweep", "--axis", "p0", "--pi", "0.9", "--points", "37"]);
    let (_, rows) = records(&text);
    for row in rows {
        for cell in row {
            if let Ok(x) = cell.parse::<f64>() {
                let again: f64 = format!("{x:.11e}").parse().unwrap();
                assert_eq!(x, again, "{cell} has more than 12 significant digits");
            }
        }
    }
}
