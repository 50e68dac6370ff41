use vnwb_core::backend::{parse_backend, write_backend};
use vnwb_core::gallery::builtin_backend;
use vnwb_core::job::{run, verify};
use vnwb_core::{Certificate, Command, JobConfig, Method, Outcome, Status};

fn cfg(name: &str) -> JobConfig {
    JobConfig::new(builtin_backend(name).unwrap())
}

/// Runs, checks the outcome, and re-verifies the emitted certificate from
/// its text.
fn round_trip(cmd: Command, c: &JobConfig) -> String {
    let out = run(&cmd, c).unwrap();
    assert_eq!(out.outcome, Outcome::Passed, "{}", out.report);
    let text = out.certificate.to_text();
    let back = Certificate::parse(&text).unwrap();
    let v = verify(&back, 1).unwrap();
    assert_eq!(v.outcome, Outcome::Passed, "{}\n{}", v.report, text);
    out.report
}

#[test]
fn builtin_files_round_trip() {
    for name in vnwb_core::gallery::BUILTIN {
        let b = builtin_backend(name).unwrap();
        let again = parse_backend(&write_backend(&b)).unwrap();
        assert_eq!(write_backend(&again), write_backend(&b));
    }
}

#[test]
fn normal_form_command() {
    let r = round_trip(Command::NormalForm("e*g1*e".into()), &cfg("amplification"));
    assert!(r.contains("E(g1)*e"), "{r}");
}

#[test]
fn exact_commands_verify() {
    let c = cfg("amplification");
    round_trip(Command::Build, &c);
    round_trip(Command::Trace("g1*g1 + e".into()), &c);
    let r = round_trip(Command::Trace("e".into()), &c);
    assert!(r.contains("1/4"), "{r}");
    round_trip(Command::Norm("g1 + g3*e".into()), &c);
    round_trip(Command::Norm("(1/2)*g1 + g2*g3".into()), &c);
    round_trip(Command::Stripe("g3*e*g1 + g4*e".into()), &c);
    round_trip(Command::Index, &c);
    round_trip(Command::Tower, &c);
}

#[test]
fn expectation_methods_verify() {
    let mut c = cfg("crossed-product-z2");
    for m in [Method::Declared, Method::Backend, Method::Jump] {
        c.method = Some(m);
        round_trip(Command::Expect("g1*g3 + g2".into()), &c);
    }
    c.method = Some(Method::Jump);
    c.z_words = Some(1);
    let out = run(&Command::Expect("g1*g3 + g2".into()), &c).unwrap();
    assert_eq!(out.certificate.get("flag"), Some("unsound-below-spanning-budget"));
    assert_eq!(verify(&out.certificate, 1).unwrap().outcome, Outcome::Passed);
}

#[test]
fn index_by_basis_prints_four() {
    let mut c = cfg("amplification");
    c.method = Some(Method::Basis);
    let r = round_trip(Command::Index, &c);
    assert!(r.contains("4 ± 1e-6"), "{r}");
}

#[test]
fn pp_inf_index_verifies() {
    let mut c = cfg("fixed-point-flip");
    c.method = Some(Method::Backend);
    c.budget = Some(2_000);
    round_trip(Command::Index, &c);
    c.method = Some(Method::Jump);
    round_trip(Command::Index, &c);
}

#[test]
fn tampered_certificate_fails() {
    let c = cfg("amplification");
    let out = run(&Command::Trace("g1*g3".into()), &c).unwrap();
    let mut cert = out.certificate;
    for f in cert.fields.iter_mut().filter(|f| f.0 == "value") {
        f.1 = "(1/2 + 0/1 i)".into();
    }
    assert_eq!(verify(&cert, 1).unwrap().outcome, Outcome::Failed);
}

#[test]
fn markov_and_budget() {
    let mut c = cfg("tlj");
    c.markov_len = 4;
    round_trip(Command::Markov, &c);
    round_trip(Command::Build, &c);
    let mut a = cfg("amplification");
    a.budget = Some(3);
    let out = run(&Command::PpBasis, &a).unwrap();
    assert_eq!(out.outcome, Outcome::Exhausted);
    assert_eq!(out.certificate.status, Status::Partial);
    assert_eq!(verify(&out.certificate, 1).unwrap().outcome, Outcome::Passed);
}

#[test]
fn config_errors() {
    let mut c = cfg("amplification");
    c.precision = 0;
    assert!(run(&Command::Build, &c).is_err());
    let c = cfg("tlj");
    assert!(run(&Command::Tower, &c).is_err());
    assert!(run(&Command::Trace("g9".into()), &cfg("amplification")).is_err());
}
