use std::path::Path;
use std::process::{Command, Output};

fn specgap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specgap")).arg("--out").arg(out).args(args).output().expect("spawn specgap")
}

fn example(name: &str) -> String {
    format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn empty_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let o = specgap(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty.toml"));
}

#[test]
fn free_bands_example_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = specgap(&["run", &example("free-bands.toml")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let bands = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    assert!(bands.starts_with("band,lower,upper,gap_above"));
    assert_eq!(bands.lines().count(), 7);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "pass");
}

#[test]
fn overstated_kappa_exits_with_precondition_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example("lift-bottom.toml")).unwrap().replace("t_points = 6", "t_points = 6\nkappa = 5.0");
    let cfg = dir.path().join("lift.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = specgap(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(std::fs::read_to_string(dir.path().join("lift.json")).unwrap().contains("precondition_failed"));
}

#[test]
fn kappa_subcommand_prints_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = specgap(&["kappa", "--delta", "0.2", "--v-min", "-10", "--v-max", "10", "--energy", "50"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let value: f64 = text.lines().find_map(|l| l.strip_prefix("value ")).unwrap().parse().unwrap();
    let expect = specgap::lifting::c_uc(
        1,
        1.0,
        0.2,
        &specgap::schrodinger::PotentialStats { min: -10.0, max: 10.0, sup: 10.0 },
        50.0,
        10.0,
    )
    .unwrap();
    assert_eq!(value, expect.value);
}

#[test]
fn smoke_verify_is_reproducible() {
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let o = specgap(&["--seed", "7", "full-verify"], dir.path());
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
            std::fs::read(dir.path().join("suites.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn tampered_kappa_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let o = specgap(&["--tamper-kappa", "1e6", "full-verify"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("suites.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("lifting,bottom_lifting")).unwrap();
    assert!(row.ends_with("false"), "{row}");
}

#[test]
fn bands_subcommand_lists_gaps_for_mathieu() {
    let dir = tempfile::tempdir().unwrap();
    let o = specgap(&["bands", "--potential", "cosine", "--amplitude", "2", "--cells", "256", "--bands", "3"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(first[3].parse::<f64>().unwrap() > 0.1);
}
