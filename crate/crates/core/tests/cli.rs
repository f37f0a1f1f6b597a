use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_factor-matching"))
}

#[test]
fn degenerate_match_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .arg("--out")
        .arg(dir.path())
        .args(["--set", "process.pi.kind=degenerate"])
        .args(["--set", "process.pi_prime.kind=degenerate"])
        .args(["--set", "graph.depth=5", "match"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("matching.txt")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("left_vertex"))
        .collect();
    assert!(!rows.is_empty());
    for row in rows {
        let f: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(f[0], f[2], "{row}");
        assert_eq!(f[4], "0", "{row}");
    }
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("--out")
        .arg(dir.path())
        .args(["--set", "radii.r0=3", "sample"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("radii.r0"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("--out")
        .arg(dir.path())
        .args(["--set", "graph.nope=1", "sample"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
