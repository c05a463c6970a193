use std::path::Path;
use std::process::{Command, Output};

use qbm_core::StructureMap;

const POD: &str = r#"
[run]
scenario = "pod"

[model]
m1 = 1.2
omega = 1.0

[bath]
modes = [
  { omega = 0.8, coupling = 0.0 },
  { mass = 1.5, omega = 1.7, coupling = 0.0 },
]

[times]
t_max = 8.0
points = 9
"#;

fn binary(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbm-structures"))
        .arg(config)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn columns(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# qbm-structures v1"));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn uncoupled_pod_has_constant_purity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pod.toml", POD);
    let out = binary(&cfg, &["--output", "-"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = columns(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["t", "purity_1", "purity_Sp", "neg_12", "neg_SpEp"]);
    assert_eq!(rows.len(), 9);
    for row in &rows {
        assert!((row[1] - rows[0][1]).abs() < 1e-12);
        assert!(row[3].abs() < 1e-12);
        assert!(row.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = POD.replace("coupling = 0.0", "coupling = 0.3").replace("[bath]", "[initial]\nkind = \"cat\"\n\n[bath]");
    let cfg = write(dir.path(), "pod.toml", &text);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let status = binary(&cfg, &["--output", out.to_str().unwrap(), "--seed", "5", "--set", "run.perturb=0.2"]);
        assert!(status.status.success());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let (header, _) = columns(&String::from_utf8(a).unwrap());
    assert!(header.contains(&"coherence_Sp".to_string()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "unknown.toml", &POD.replace("m1 = 1.2", "m1 = 1.2\nfooo = 3"));
    let out = binary(&unknown, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fooo"));

    let negative = write(dir.path(), "negative.toml", &POD.replace("m1 = 1.2", "m1 = -1.2"));
    let out = binary(&negative, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m1"));

    let missing = binary(&dir.path().join("absent.toml"), &[]);
    assert_eq!(missing.status.code(), Some(1));

    // a mixed bath without purification cannot be checked for entanglement relativity
    let mixed = write(dir.path(), "mixed.toml", &POD.replace("[times]", "[initial]\ntemperature = 1.0\n\n[times]"));
    let out = binary(&mixed, &["--scenario", "er"]);
    assert_eq!(out.status.code(), Some(1));

    // an oracle cutoff too small for the state is a numerical failure
    let tight = write(
        dir.path(),
        "tight.toml",
        &format!("{}\n[oracle]\ncutoffs = [3, 3, 3]\nstep = 1\n", POD.replace("m1 = 1.2", "m1 = 1.0")),
    );
    let out = binary(&tight, &["--scenario", "oracle-compare"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_compare_two_bath_modes() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[run]
scenario = "oracle-compare"

[bath]
modes = [{ omega = 0.9, coupling = 0.1 }, { omega = 1.25, coupling = 0.08 }]

[initial]
kind = "cat"
x = 0.0
separation = 2.0

[times]
t_max = 3.0
points = 4

[oracle]
cutoffs = [12, 8, 7]
step = 2
"#;
    let cfg = write(dir.path(), "oracle.toml", text);
    let out = binary(&cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = columns(&String::from_utf8(out.stdout).unwrap());
    let col = header.iter().position(|h| h == "max_abs_diff").unwrap();
    for row in rows {
        assert!(row[col] < 1e-6, "{}", row[col]);
    }
}

#[test]
fn scenarios_write_their_columns() {
    let dir = tempfile::tempdir().unwrap();
    let coupled = POD.replace("coupling = 0.0", "coupling = 0.25");
    let cfg = write(dir.path(), "s.toml", &coupled);
    let cases = [
        ("er", vec!["t", "neg_12", "neg_SpEp", "witnessed"]),
        ("exclusivity", vec!["t", "neg_SpEp", "excluding"]),
        (
            "marginal",
            vec!["t", "mean_Sp", "var_Sp", "mean_relabeled", "var_relabeled", "l1_distance"],
        ),
    ];
    for (scenario, expected) in cases {
        let out = binary(&cfg, &["--scenario", scenario]);
        assert!(out.status.success(), "{scenario}: {}", String::from_utf8_lossy(&out.stderr));
        let (header, rows) = columns(&String::from_utf8(out.stdout).unwrap());
        assert_eq!(header, expected);
        assert_eq!(rows.len(), 9);
    }
}

#[test]
fn structure_map_is_written_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let map_path = dir.path().join("map.txt");
    let text = POD.replace("[run]", &format!("[run]\nmap_output = {:?}", map_path.to_str().unwrap()));
    let cfg = write(dir.path(), "m.toml", &text);
    let out = binary(&cfg, &["--output", dir.path().join("o.csv").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let map = StructureMap::from_text(&std::fs::read_to_string(map_path).unwrap()).unwrap();
    assert_eq!(map.n_modes(), 3);
    assert_eq!(map.labels(), ["S'", "E'1", "E'2"]);
    // centre-of-mass row
    let row: Vec<f64> = map.positions().row(0).iter().copied().collect();
    let total = 1.2 + 1.0 + 1.5;
    for (v, m) in row.iter().zip([1.2, 1.0, 1.5]) {
        assert!((v - m / total).abs() < 1e-15);
    }
}
