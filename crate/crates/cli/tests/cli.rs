use std::path::Path;
use std::process::{Command, Output};

fn vnwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vnwb")).args(args).output().expect("spawn vnwb")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn normalform_single_rewrite() {
    let o = vnwb(&["normalform", "e*g1*e"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("E(g1)*e"), "{}", stdout(&o));
}

#[test]
fn basis_index_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("index.cert");
    let o = vnwb(&["index", "--method", "basis", "--out", path(&cert)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4 ± 1e-6"), "{}", stdout(&o));
    let v = vnwb(&["verify", path(&cert)]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
}

#[test]
fn ppbasis_certificate_rechecks_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.cert");
    let b = dir.path().join("b.cert");
    assert_eq!(vnwb(&["ppbasis", "--out", path(&a)]).status.code(), Some(0));
    assert_eq!(vnwb(&["ppbasis", "--workers", "4", "--out", path(&b)]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = vnwb(&["verify", path(&a)]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).contains("sum mj e mj* = 1"));
}

#[test]
fn every_subcommand_emits_a_verifiable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["build"],
        vec!["norm", "g1 + g3*e"],
        vec!["trace", "e*g1*e"],
        vec!["expect", "g1*g3 + g2", "--gallery", "crossed-product-z2"],
        vec!["expect", "g1*g3", "--method", "jump"],
        vec!["index"],
        vec!["normalform", "g1*e*g2*e*g3"],
        vec!["stripe", "g3*e*g1"],
        vec!["tower"],
        vec!["markov", "--gallery", "tlj", "--len", "4"],
        vec!["index", "--method", "backend", "--gallery", "fixed-point-flip", "--budget", "500"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let cert = dir.path().join(format!("{i}.cert"));
        let mut a = args.clone();
        a.extend(["--out", path(&cert)]);
        let o = vnwb(&a);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v = vnwb(&["verify", path(&cert)]);
        assert_eq!(v.status.code(), Some(0), "{args:?}: {}", stdout(&v));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("partial.cert");
    let o = vnwb(&["ppbasis", "--budget", "3", "--out", path(&cert)]);
    assert_eq!(o.status.code(), Some(3));
    let text = std::fs::read_to_string(&cert).unwrap();
    assert!(text.contains("status partial"));
    assert_eq!(vnwb(&["verify", path(&cert)]).status.code(), Some(0));

    assert_eq!(vnwb(&["--precision", "0", "build"]).status.code(), Some(2));
    assert_eq!(vnwb(&["trace", "g7"]).status.code(), Some(2));
    assert_eq!(vnwb(&["build", "--gallery", "nope"]).status.code(), Some(2));
    assert_eq!(vnwb(&["tower", "--gallery", "tlj"]).status.code(), Some(2));
    assert_eq!(vnwb(&["frobnicate"]).status.code(), Some(2));

    let bad = dir.path().join("bad.cert");
    let o = vnwb(&["trace", "g1*g3", "--out", path(&bad)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&bad).unwrap().replace("value (0/1 + 0/1 i)", "value (1/3 + 0/1 i)");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(vnwb(&["verify", path(&bad)]).status.code(), Some(1));
}

#[test]
fn backend_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("m2.vnwb");
    std::fs::write(
        &f,
        "vnwb-backend v1\ndims 2\nunit special\ngen\n(0/1+0/1 i) (1/1+0/1 i)\n(0/1+0/1 i) (0/1+0/1 i)\nend\ngallery\nconstruction amplification\nm 2\n",
    )
    .unwrap();
    let o = vnwb(&["build", "--input", path(&f)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("index           4"), "{}", stdout(&o));
    std::fs::write(&f, "not a backend\n").unwrap();
    assert_eq!(vnwb(&["build", "--input", path(&f)]).status.code(), Some(2));
}
