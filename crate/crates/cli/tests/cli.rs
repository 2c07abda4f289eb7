use std::process::{Command, Output};

fn pn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pn"))
        .args(args)
        .env_remove("PN_MAX_COEFFICIENTS")
        .output()
        .expect("run pn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn coefficient_of_a_triple() {
    let o = pn(&["coeff", "--primes", "5,11,23", "--k", "71"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn methods_agree() {
    for k in ["0", "100", "233", "4000", "-3", "5005"] {
        let mut seen = Vec::new();
        for m in ["closed", "recursive", "oracle"] {
            let o = pn(&["coeff", "--primes", "5,7,11,13", "--k", k, "--method", m]);
            assert_eq!(o.status.code(), Some(0), "{m} at {k}");
            seen.push(stdout(&o));
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]), "k={k}: {seen:?}");
    }
}

#[test]
fn height_of_a_four_tuple() {
    for m in ["region", "dense"] {
        let o = pn(&["height", "--primes", "5,7,11,13", "--method", m]);
        assert_eq!(stdout(&o), "height=2 witness=233\n", "{m}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let o = pn(&["coeff", "--primes", "5,9,23", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("9 is not prime"));
    assert_eq!(pn(&["coeff", "--primes", "5,7"]).status.code(), Some(2));
    assert_eq!(pn(&["classify3", "--primes", "5,7"]).status.code(), Some(2));
    assert_eq!(pn(&["coeff", "--primes", "5,x", "--k", "1"]).status.code(), Some(2));
}

#[test]
fn budget_errors_exit_3() {
    let o = pn(&["--max-coefficients", "2", "poly", "--primes", "3,5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pn.conf");
    std::fs::write(&file, "max_coefficients = 2\n").unwrap();
    let conf = file.to_str().unwrap();
    let args = ["--config", conf, "poly", "--primes", "3,5"];
    assert_eq!(pn(&args).status.code(), Some(3));
    let env = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_pn"))
            .args(args)
            .env("PN_MAX_COEFFICIENTS", v)
            .output()
            .unwrap()
    };
    assert_eq!(env("100").status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_pn"))
        .args(["--max-coefficients", "2"])
        .args(args)
        .env("PN_MAX_COEFFICIENTS", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let c = cert.to_str().unwrap();
    assert_eq!(pn(&["construct", "height1", "--n", "4", "--out", c]).status.code(), Some(0));
    let o = pn(&["verify", c]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok height1 4\n");

    let text = std::fs::read_to_string(&cert).unwrap();
    let tampered = text.replacen("\"height\": 1", "\"height\": 2", 1);
    assert_ne!(text, tampered);
    std::fs::write(&cert, tampered).unwrap();
    let o = pn(&["verify", c]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn amplify_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = pn(&["construct", "amplify", "--n", "4", "--cache-dir", d]);
    assert_eq!(a.status.code(), Some(0));
    let b = pn(&["construct", "amplify", "--n", "4", "--cache-dir", d]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["kind"], "amplified");
    assert_eq!(v["witness_coefficient"].as_i64().map(i64::abs), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["table3", "--primes", "5,7,11", "--format", "svg"][..],
        &["poly", "--primes", "3,5,7", "--format", "json"],
        &["construct", "height1", "--n", "3"],
        &["height", "--primes", "7,11,13,17", "--threads", "3"],
    ] {
        assert_eq!(stdout(&pn(args)), stdout(&pn(args)), "{args:?}");
    }
    let one = pn(&["height", "--primes", "7,11,13,17", "--threads", "1"]);
    let four = pn(&["height", "--primes", "7,11,13,17", "--threads", "4"]);
    assert_eq!(stdout(&one), stdout(&four));
}

#[test]
fn identity_suite_and_tables() {
    let o = pn(&["verify", "--identities", "--primes", "3,5,7"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 8 + 6);
    assert!(!out.contains("FAIL"));

    let o = pn(&["table3", "--primes", "5,7,11"]);
    assert_eq!(stdout(&o).lines().count(), 65);
    let o = pn(&["classify3", "--primes", "5,7,11"]);
    assert!(stdout(&o).starts_with("case="));
    let o = pn(&["bounds", "--n", "5"]);
    assert!(stdout(&o).contains("\"lower\":\"6\""));
    let o = pn(&["bench", "--primes", "3,5,7", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
}
