use std::path::Path;
use std::process::{Command, Output};

fn dynprice(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynprice"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn appendix_demo_prints_the_exact_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let a = dynprice(&["demo", "appendix-a1"], dir.path());
    assert!(a.status.success());
    let text = stdout(&a);
    assert!(text.contains("lambda 2/3@1 1/3@2 ;"), "{text}");
    assert!(text.contains("lambda 1@3 ; t=3 rho=1"), "{text}");
    assert!(
        text.contains("lambda 2/10@3 3/10@4 2/10@5 2/10@6 1/10@7 ; t=7 rho=1"),
        "{text}"
    );
    assert_eq!(stdout(&dynprice(&["demo", "appendix-a1"], dir.path())), text);
}

#[test]
fn parking_gap_demo() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynprice(&["demo", "parking-gap", "n=10", "--trials", "20"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let ratio: f64 = text
        .lines()
        .find(|l| l.starts_with("greedy"))
        .and_then(|l| l.rsplit(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio >= 400.0, "{text}");
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynprice(&["verify", "all"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(
        text.lines()
            .all(|l| l.starts_with("SUITE ") && l.contains(" PASS witness=-")),
        "{text}"
    );
    let bad = dynprice(&["verify", "nope"], dir.path());
    assert!(!bad.status.success());
}

#[test]
fn poa_reports_the_free_parking_gap() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynprice(
        &[
            "poa",
            "--family",
            "parking",
            "--generator",
            "adversarial",
            "--algorithm",
            "greedy",
            "--pricing",
            "none",
            "--param",
            "n=10",
            "--param",
            "eps=1e-6",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let max: f64 = text
        .split_whitespace()
        .find_map(|w| w.strip_prefix("ratio_max="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(max >= 400.0, "{text}");
}

#[test]
fn generated_instances_run_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(dynprice(
        &[
            "gen",
            "parking",
            "weighted-line",
            "slots=12",
            "cars=9",
            "--seed",
            "3",
            "--out",
            "street.toml"
        ],
        p
    )
    .status
    .success());
    std::fs::write(
        p.join("scenario.toml"),
        r#"family = "parking"
algorithm = "agents"
pricing = "harmonic"
trials = 25
seed = 11
tie_policy = "random"

[instance]
file = "street.toml"
"#,
    )
    .unwrap();
    let serial = dynprice(&["run", "scenario.toml", "--out", "a.csv"], p);
    assert!(serial.status.success(), "{}", String::from_utf8_lossy(&serial.stderr));
    assert!(dynprice(&["run", "scenario.toml", "--out", "b.csv", "--jobs", "4"], p)
        .status
        .success());
    let a = std::fs::read_to_string(p.join("a.csv")).unwrap();
    let b = std::fs::read_to_string(p.join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("trial,family,algorithm,pricing,cost,opt,ratio,seed\n"));
    assert_eq!(a.lines().count(), 26);

    let tsv = stdout(&dynprice(
        &["run", "scenario.toml", "--format", "tsv", "--trials", "2"],
        p,
    ));
    assert!(tsv.starts_with("trial\tfamily\talgorithm"));
    let reseeded = stdout(&dynprice(&["run", "scenario.toml", "--seed", "12"], p));
    assert_ne!(reseeded, a);
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let none = dynprice(&[], dir.path());
    assert!(!none.status.success());
    assert!(String::from_utf8_lossy(&none.stderr).contains("Usage"));
    let missing = dynprice(&["run", "missing.toml"], dir.path());
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.toml"));
    std::fs::write(dir.path().join("bad.toml"), "family = \"parking\"\ntrials = 0\n").unwrap();
    let bad = dynprice(&["run", "bad.toml"], dir.path());
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("config error"));
}
