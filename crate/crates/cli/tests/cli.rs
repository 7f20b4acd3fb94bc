use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracpoly_cli::output::{GRID_HEADER, TRACE_HEADER};
use fracpoly_cli::validate_report;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracpoly"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const INFEASIBLE: &str = r#"{
  "n": 1,
  "objective": {"n": 1, "terms": [{"exp": [1], "c": 1}]},
  "constraints": [{"n": 1, "terms": [{"exp": [0], "c": -1}, {"exp": [2], "c": -1}]}]
}"#;

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("rerun");
    let input = configs().join("box-fractional.json");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let report = dir.join(format!("r{i}.json"));
        let trace = dir.join(format!("t{i}.csv"));
        let o = run(&["solve-frac", s(&input), "--seed", "5", "--report", s(&report), "--trace", s(&trace)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push((o.stdout, fs::read(&report).unwrap(), fs::read(&trace).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    let sos = configs().join("motzkin.json");
    let reports: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let report = dir.join(format!("sos{i}.json"));
            run(&["certify-sos", s(&sos), "--seed", "9", "--report", s(&report)]);
            fs::read(&report).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn reports_round_trip_through_the_validator() {
    let dir = scratch("validate");
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["example1".into()], 0),
        (vec!["solve-poly".into(), s(&configs().join("disk-linear.json")).into()], 0),
        (vec!["solve-frac".into(), s(&configs().join("scalar-fractional.json")).into()], 0),
        (vec!["certify-sos".into(), s(&configs().join("square.json")).into()], 0),
        (vec!["certify-sos".into(), s(&configs().join("motzkin.json")).into()], 2),
    ];
    for (i, (args, code)) in cases.into_iter().enumerate() {
        let report = dir.join(format!("{i}.json"));
        let mut args: Vec<&str> = args.iter().map(String::as_str).collect();
        args.extend(["--report", s(&report)]);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
        let text = fs::read_to_string(&report).unwrap();
        validate_report(s(&report), &text).unwrap();
        let o = run(&["validate-report", s(&report)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
}

#[test]
fn validator_rejects_tampered_reports() {
    let dir = scratch("tamper");
    let report = dir.join("r.json");
    run(&["example1", "--report", s(&report)]);
    let text = fs::read_to_string(&report).unwrap();

    let flipped = text.replace("\"status\": \"certified\"", "\"status\": \"uncertified\"");
    assert_ne!(flipped, text);
    let bad = dir.join("flipped.json");
    fs::write(&bad, flipped).unwrap();
    let o = run(&["validate-report", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("status disagrees"), "{}", stderr(&o));

    let extra = text.replacen("\"tool\"", "\"extra\": 1,\n  \"tool\"", 1);
    let bad = dir.join("extra.json");
    fs::write(&bad, extra).unwrap();
    let o = run(&["validate-report", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("{}:2:", s(&bad))), "{}", stderr(&o));
}

#[test]
fn trace_csv_shape() {
    let dir = scratch("trace");
    let input = configs().join("scalar-fractional.json");
    let trace = dir.join("t.csv");
    let o = run(&["solve-frac", s(&input), "--trace", s(&trace)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let lambdas: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[1] >= w[0]), "{lambdas:?}");

    // one outer iteration: header plus one row, uncertified
    let one = dir.join("one.csv");
    let o = run(&["solve-frac", s(&input), "--max-outer", "1", "--trace", s(&one)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&one).unwrap().lines().count(), 2);
}

#[test]
fn grid_csv_shape() {
    let dir = scratch("grid");
    let cfg = dir.join("small.json");
    // a coarse grid and a low order keep this quick
    let text = fs::read_to_string(configs().join("ee-synthetic.json"))
        .unwrap()
        .replace("\"K_max\": 60, \"M_max\": 300", "\"K_max\": 6, \"M_max\": 20");
    fs::write(&cfg, text).unwrap();
    let grid = dir.join("g.csv");
    let o = run(&["solve-ee", s(&cfg), "--order", "2", "--max-outer", "2", "--grid", s(&grid)]);
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
    let text = fs::read_to_string(&grid).unwrap();
    assert!(text.ends_with('\n'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], GRID_HEADER);
    assert_eq!(lines.len(), 1 + 6 * 20);
    assert!(lines[1].starts_with("1,1,"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",true") || l.ends_with(",false")));
}

#[test]
fn infeasible_problem_writes_nothing() {
    let dir = scratch("infeasible");
    let input = dir.join("p.json");
    fs::write(&input, INFEASIBLE.replace("\"objective\": {\"n\": 1, \"terms\": [{\"exp\": [1], \"c\": 1}]}",
        "\"objective\": {\"numerator\": {\"n\": 1, \"terms\": [{\"exp\": [1], \"c\": 1}]}, \
         \"denominator\": {\"n\": 1, \"terms\": [{\"exp\": [0], \"c\": 1}]}}")).unwrap();
    let trace = dir.join("t.csv");
    let report = dir.join("r.json");
    let o = run(&["solve-frac", s(&input), "--trace", s(&trace), "--report", s(&report)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!trace.exists() && !report.exists());
    assert!(stderr(&o).contains("error"), "{}", stderr(&o));

    let plain = dir.join("q.json");
    fs::write(&plain, INFEASIBLE).unwrap();
    let o = run(&["solve-poly", s(&plain)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn diagnostics_carry_line_numbers() {
    let dir = scratch("diag");
    let input = dir.join("p.json");
    fs::write(&input, INFEASIBLE.replace("[{\"exp\": [1], \"c\": 1}]", "[{\"exp\": [1], \"c\": \"one\"}]")).unwrap();
    let o = run(&["solve-poly", s(&input)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("{}:3:", s(&input))), "{}", stderr(&o));

    let cfg = dir.join("ee.json");
    let text = fs::read_to_string(configs().join("ee-synthetic.json"))
        .unwrap()
        .replace("\"(1,1)\": 0.05", "\"(1,1)\": 0.05, \"(0,3)\": 1");
    fs::write(&cfg, text).unwrap();
    let o = run(&["solve-ee", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("{}:4:", s(&cfg))), "{}", stderr(&o));

    let o = run(&["solve-frac", s(&dir.join("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));
}

#[test]
fn option_validation() {
    let frac = configs().join("scalar-fractional.json");
    for args in [
        vec!["solve-frac", s(&frac), "--eps", "0"],
        vec!["solve-frac", s(&frac), "--gap-tol=-1e-9"],
        vec!["solve-frac", s(&frac), "--no-such-flag"],
        vec!["solve-frac", s(&frac), "--order", "0"],
        vec!["solve-frac", s(&frac), "--max-outer", "0"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    let o = run(&["solve-poly", s(&frac)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("solve-frac"));

    let dir = scratch("options");
    let min = dir.join("min.json");
    fs::write(&min, fs::read_to_string(&frac).unwrap().replace("\"max\"", "\"min\"")).unwrap();
    let o = run(&["solve-frac", s(&min)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("maximized"), "{}", stderr(&o));

    let sq = configs().join("disk-linear.json");
    let o = run(&["certify-sos", s(&sq)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unconstrained"));
}
