use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reslab_cli::{InstanceFile, Report};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn reslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reslab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn report(o: &Output) -> Report {
    serde_json::from_slice(&o.stdout).expect("report is JSON")
}

/// Data rows of a tab-separated table, parsed as numbers.
fn rows(table: &str) -> Vec<Vec<f64>> {
    table.lines().skip(1).map(|l| l.split('\t').map(|x| x.parse().unwrap()).collect()).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fixtures_are_in_canonical_form() {
    for name in ["i1.json", "i2.json", "i3.json", "i4.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let f = InstanceFile::from_json(&text).unwrap();
        assert_eq!(f.to_json(), text, "{name}");
    }
}

#[test]
fn generated_instances_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, n, d, m, de) in [("isometric", "3", "1", "2", "0"), ("symmetric", "3", "1", "3", "1")] {
        let a = dir.path().join(format!("{kind}_a.json"));
        let b = dir.path().join(format!("{kind}_b.json"));
        for p in [&a, &b] {
            let o = reslab(&["gen", kind, "--n", n, "--d", d, "--m", m, "--de", de, "--seed", "11", "--out", path_str(p)]);
            assert!(o.status.success(), "{}", stderr(&o));
        }
        let first = std::fs::read_to_string(&a).unwrap();
        assert_eq!(first, std::fs::read_to_string(&b).unwrap(), "gen is deterministic");
        let again = InstanceFile::load(&a).unwrap().to_json();
        assert_eq!(again, first, "save -> load -> save");
    }
    // Only the two outputs per kind: no temporary files left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 4);
}

#[test]
fn small_isometric_instance_is_a_one_plus_one_dilation() {
    let o = reslab(&["gen", "isometric", "--n", "1", "--d", "0", "--m", "1", "--seed", "7"]);
    assert!(o.status.success());
    let f = InstanceFile::from_json(&stdout(&o)).unwrap();
    assert_eq!(f.ambient_dim, 1);
    assert_eq!(f.exit.as_ref().unwrap().dim, 1);
    assert_eq!(f.seed, Some(7));
}

#[test]
fn self_adjoint_generation_warns() {
    let o = reslab(&["gen", "symmetric", "--n", "2", "--d", "2", "--seed", "1"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("self-adjoint, defects (0,0)"), "{}", stderr(&o));
}

#[test]
fn generated_symmetric_instance_passes_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    let o = reslab(&["gen", "symmetric", "--n", "2", "--d", "1", "--m", "2", "--seed", "3", "--out", path_str(&p)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = reslab(&["verify", path_str(&p), "--suite", "oracle"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&o);
    assert!(!r.checks.is_empty());
    for c in &r.checks {
        assert!(c.pass && c.residual.unwrap() < 1e-9, "{c:?}");
    }
}

#[test]
fn generated_isometric_instance_passes_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("i.json");
    let o = reslab(&["gen", "isometric", "--n", "3", "--d", "1", "--m", "2", "--seed", "5", "--out", path_str(&p)]);
    assert!(o.status.success());
    let o = reslab(&["verify", path_str(&p)]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(report(&o).summary.all_pass);
}

#[test]
fn spectrum_of_i1_has_two_half_atoms() {
    let o = reslab(&["spectrum", path_str(&fixture("i1.json"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.starts_with("theta\tweight_trace"));
    let r = rows(&table);
    assert_eq!(r.len(), 2);
    for (row, theta) in r.iter().zip([0.0, std::f64::consts::PI]) {
        assert!((row[0] - theta).abs() < 1e-12);
        assert!((row[1] - 0.5).abs() < 1e-12);
    }
}

#[test]
fn resolvent_of_i2_at_2i() {
    let o = reslab(&["resolvent", path_str(&fixture("i2.json")), "--point", "0,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    let row = &r[0];
    assert_eq!((row[0], row[1]), (0.0, 2.0));
    assert!(row[2].abs() < 1e-12 && (row[3] - 0.4).abs() < 1e-12, "{row:?}");
}

#[test]
fn resolvent_grid_gives_one_row_per_point() {
    let o = reslab(&["resolvent", path_str(&fixture("i4.json")), "--grid", "5"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 5);
    assert!(r.iter().all(|row| row.len() == 2 + 2 * 4));
}

#[test]
fn gap_on_i4_sees_the_atom() {
    let arc = format!("{},{}", std::f64::consts::FRAC_PI_4, 3.0 * std::f64::consts::FRAC_PI_4);
    let o = reslab(&["gap", path_str(&fixture("i4.json")), "--arc", &arc]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "not analytic");
    let atoms = v["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 1);
    assert!((atoms[0].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn gap_away_from_the_atom_is_analytic() {
    let o = reslab(&["gap", path_str(&fixture("i4.json")), "--arc", "2.5,5.5", "--grid", "32"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "analytic");
    assert_eq!(v["atoms"].as_array().unwrap().len(), 0);
}

#[test]
fn gap_reports_points_of_irregular_type() {
    // V e1 = e1, so 1 is an eigenvalue of V itself.
    let o = reslab(&["gap", path_str(&fixture("i4.json")), "--arc", "0,0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("not of regular type") && err.contains("1+0i"), "{err}");
}

#[test]
fn symmetric_gap_needs_an_interval() {
    let o = reslab(&["gap", path_str(&fixture("i3.json")), "--arc", "0.5,1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = reslab(&["gap", path_str(&fixture("i3.json")), "--interval", "0.25,0.75"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn halved_resolvent_fails_axiom_two() {
    let o = reslab(&["verify", path_str(&fixture("i1.json")), "--suite", "axioms", "--tamper", "scale"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    let a2 = r.checks.iter().find(|c| c.name.starts_with("axiom 2")).unwrap();
    assert!(!a2.pass);
    assert!(!r.summary.all_pass);
}

#[test]
fn every_fixture_passes_every_suite() {
    for name in ["i1.json", "i2.json", "i3.json", "i4.json"] {
        let o = reslab(&["verify", path_str(&fixture(name)), "--suite", "all"]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let r = report(&o);
        assert_eq!(r.suite, "all");
        assert!(r.summary.all_pass && r.summary.total > 0, "{name}");
    }
}

#[test]
fn reports_are_deterministic_and_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = reslab(&["verify", path_str(&fixture("i2.json")), "--suite", "oracle", "--out", path_str(p)]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn tolerance_flags_are_honoured() {
    let f = fixture("i1.json");
    let o = reslab(&["spectrum", path_str(&f), "--abs-floor", "1e-12", "--rank-rel", "1e-14"]);
    assert!(o.status.success());
    let o = reslab(&["spectrum", path_str(&f), "--abs-floor", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    // A floor above every atom's weight empties the table.
    let o = reslab(&["spectrum", path_str(&f), "--abs-floor", "0.9"]);
    assert!(o.status.success());
    assert!(rows(&stdout(&o)).is_empty());
}

#[test]
fn sector_flag_is_validated() {
    let o = reslab(&["verify", path_str(&fixture("i2.json")), "--suite", "limits", "--epsilon", "0.3"]);
    assert!(o.status.success());
    let o = reslab(&["verify", path_str(&fixture("i2.json")), "--suite", "limits", "--epsilon", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(report(&o).checks[0].note.as_deref().unwrap().contains("sector"));
}

#[test]
fn malformed_instances_are_rejected() {
    let text = std::fs::read_to_string(fixture("i1.json")).unwrap();
    assert!(InstanceFile::from_json(&text.replace("\"schema_version\": 1", "\"schema_version\": 9")).is_err());
    assert!(InstanceFile::from_json(&text.replace("\"seed\"", "\"sead\"")).is_err());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    // A non-unitary exit block.
    std::fs::write(&p, text.replace("\"t\": [\n      [\n        [\n          0.0,\n          0.0", "\"t\": [\n      [\n        [\n          0.5,\n          0.0")).unwrap();
    let o = reslab(&["spectrum", path_str(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json"));
}
