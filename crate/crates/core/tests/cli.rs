mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sectorflow(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sectorflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn scenario(name: &str) -> String {
    common::scenarios_dir().join(name).to_str().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_writes_three_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let o = sectorflow(&["simulate", &scenario("case_study.toml")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for (name, header) in [
        ("backlogs.csv", "t,from_sector,to_sector,backlog"),
        ("arrivals.csv", "aircraft_id,arrival_t"),
        ("events.csv", "t,event,route,aircraft_id"),
    ] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().next(), Some(header));
    }
    let arrivals = rows(&dir.path().join("arrivals.csv"));
    assert_eq!(arrivals.len(), 21);
    assert!(arrivals.iter().all(|r| !r[1].is_empty()));
}

#[test]
fn long_term_backlog_column_matches_recurrence() {
    let dir = tempfile::tempdir().unwrap();
    let o = sectorflow(&["simulate", &scenario("long_term_u3.toml")], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let want = common::backlog_oracle(2, 3, |_| 3, |t| (3..=6).contains(&t), 16);
    let got: Vec<i64> = rows(&dir.path().join("backlogs.csv"))
        .iter()
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(got, want);
    assert_eq!(&got[..8], &[2, 2, 2, 5, 8, 11, 14, 14]);
}

#[test]
fn crdos_on_a_cut_sector_names_the_edge() {
    let dir = tempfile::tempdir().unwrap();
    let o = sectorflow(
        &["rank-spectral", &scenario("case_study.toml"), "--attack", "crdos"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("disconnect"), "{err}");
    assert!(err.contains('-'), "{err}");
}

#[test]
fn spectral_rankings_on_grid() {
    let dir = tempfile::tempdir().unwrap();
    for attack in ["crdos", "prdos", "sdos"] {
        let o = sectorflow(
            &["rank-spectral", &scenario("grid12.toml"), "--attack", attack],
            dir.path(),
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{attack}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let r = rows(&dir.path().join(format!("spectral_{attack}.csv")));
        let expected = if attack == "prdos" { 17 } else { 12 };
        assert_eq!(r.len(), expected, "{attack}");
        let mut ranks: Vec<usize> = r.iter().map(|x| x.last().unwrap().parse().unwrap()).collect();
        ranks.sort();
        assert_eq!(ranks, (1..=expected).collect::<Vec<_>>());
    }
}

#[test]
fn path_rankings_on_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = sectorflow(
        &[
            "rank-path",
            &scenario("grid12.toml"),
            "--weight-lost",
            "0.8",
            "--max-n",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&dir.path().join("path_sectors.csv")).len(), 12);
    assert!(dir.path().join("path_routes.csv").exists());
}

#[test]
fn rdos_delays_some_aircraft() {
    let dir = tempfile::tempdir().unwrap();
    let o = sectorflow(&["baseline-diff", &scenario("case_study_rdos.toml")], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let deltas = rows(&dir.path().join("arrival_deltas.csv"));
    assert!(deltas.iter().any(|r| r[3].parse::<i64>().unwrap() > 0));
}

#[test]
fn no_attacks_means_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let o = sectorflow(&["baseline-diff", &scenario("case_study.toml")], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let arrivals = rows(&dir.path().join("arrival_deltas.csv"));
    let backlogs = rows(&dir.path().join("backlog_deltas.csv"));
    assert_eq!(arrivals.len(), 21);
    assert!(arrivals.iter().all(|r| r[3] == "0"));
    assert!(!backlogs.is_empty());
    assert!(backlogs.iter().all(|r| r[5] == "0"));
}

#[test]
fn invalid_scenarios_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "version = 7\nhorizon = 3\n[graph]\nsectors = [1]\n").unwrap();
    let o = sectorflow(&["simulate", bad.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("version"));

    let o = sectorflow(
        &["simulate", dir.path().join("missing.toml").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = sectorflow(
        &["rank-spectral", &scenario("grid12.toml"), "--attack", "rst"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let o = sectorflow(
        &["rank-path", &scenario("grid12.toml"), "--weight-lost", "0.2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}
