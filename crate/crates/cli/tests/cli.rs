use std::path::{Path, PathBuf};
use std::process::Command;

use cstn_cli::{run, EXIT_NO, EXIT_NOT_WD, EXIT_USAGE, EXIT_YES};
use serde_json::Value;
use tempfile::TempDir;

fn corpus(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name);
    p.to_string_lossy().into_owned()
}

fn cstn(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(
        std::iter::once("cstn").chain(args.iter().copied()),
        &mut out,
    );
    (code, String::from_utf8(out).unwrap())
}

fn report(args: &[&str]) -> (i32, Value) {
    let (code, out) = cstn(args);
    (
        code,
        serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn gamma_box_is_not_pi_dc() {
    let (code, r) = report(&["check-pi-dc", &corpus("gamma_box.cstn")]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(r["verdict"], "no");
    assert_eq!(r["property"], "pi-dc");
    assert!(r.get("strategy").is_none());
    assert!(!r["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn gamma_box_is_zero_dc() {
    let (code, r) = report(&[
        "check-eps-dc",
        "--epsilon",
        "0/1",
        &corpus("gamma_box.cstn"),
    ]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(r["verdict"], "yes");
    assert_eq!(r["strategy"].as_object().unwrap().len(), 8);
}

#[test]
fn gamma_box_dc_reports_eps_hat() {
    let (code, r) = report(&["check-dc", &corpus("gamma_box.cstn")]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(r["parameters"]["eps_hat"], "1/40");
}

#[test]
fn gamma_pi_strategy() {
    let (code, r) = report(&["check-pi-dc", &corpus("gamma_pi.cstn")]);
    assert_eq!(code, EXIT_YES);
    let s = &r["strategy"];
    for key in ["p", "!p"] {
        assert_eq!(s[key]["times"]["O_p"], 0);
        assert_eq!(s[key]["positions"]["O_p"], 1);
        assert_eq!(s[key]["times"]["⊤"], 1);
    }
    assert_eq!(s["p"]["times"]["X"], 0);
    assert_eq!(s["!p"]["times"]["X"], 1);
}

#[test]
fn oracle_agrees_on_the_corpus() {
    let (code, r) = report(&["check-pi-dc", "--oracle", &corpus("gamma_pi.cstn")]);
    assert_eq!(
        (code, r["property"].as_str()),
        (EXIT_YES, Some("pi-dc-oracle"))
    );
    assert_eq!(r["parameters"]["tree"], "p");
    let (code, r) = report(&["check-pi-dc", "--oracle", &corpus("gamma_box.cstn")]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(r["parameters"]["trees_refuted"], "12");
}

#[test]
fn oracle_letter_cap_is_a_usage_error() {
    let (code, r) = report(&[
        "check-pi-dc",
        "--oracle",
        "--max-letters",
        "2",
        &corpus("gamma_box.cstn"),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(r["verdict"], "invalid");
}

#[test]
fn emitted_strategies_revalidate() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.json");
    let out_s = out.to_str().unwrap();
    let cases: [(&[&str], &str, &[&str]); 3] = [
        (&["check-pi-dc"], "gamma_pi.cstn", &["--mode", "pi"]),
        (
            &["check-eps-dc", "--epsilon", "0/1"],
            "gamma_box.cstn",
            &["--mode", "eps", "--epsilon", "0"],
        ),
        (
            &["check-eps-dc", "--epsilon", "1/3"],
            "gamma_pi.cstn",
            &["--mode", "eps", "--epsilon", "1/3"],
        ),
    ];
    for (check, net, mode) in cases {
        let net = corpus(net);
        let mut args = check.to_vec();
        args.extend(["--strategy-out", out_s, &net]);
        let (code, first) = report(&args);
        if code != EXIT_YES {
            // a no-instance has nothing to round-trip
            assert_eq!(code, EXIT_NO);
            assert!(!out.exists());
            continue;
        }
        let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(written, first["strategy"]);
        let mut args = vec!["validate-strategy"];
        args.extend_from_slice(mode);
        args.extend([net.as_str(), out_s]);
        let (code, r) = report(&args);
        assert_eq!(code, EXIT_YES, "{r}");
        std::fs::remove_file(&out).unwrap();
    }
}

#[test]
fn sigma_box_file_modes() {
    let (net, s) = (corpus("gamma_box.cstn"), corpus("sigma_box.strategy"));
    assert_eq!(
        cstn(&["validate-strategy", "--mode", "viability", &net, &s]).0,
        EXIT_YES
    );
    assert_eq!(
        cstn(&[
            "validate-strategy",
            "--mode",
            "eps",
            "--epsilon",
            "0/1",
            &net,
            &s
        ])
        .0,
        EXIT_YES
    );
    let (code, r) = report(&["validate-strategy", "--mode", "dynamic", &net, &s]);
    assert_eq!(code, EXIT_NO);
    assert!(!r["witnesses"].as_array().unwrap().is_empty());
    // no positions in the file
    assert_eq!(
        cstn(&["validate-strategy", "--mode", "pi", &net, &s]).0,
        EXIT_USAGE
    );
    // eps without a value
    assert_eq!(
        cstn(&["validate-strategy", "--mode", "eps", &net, &s]).0,
        EXIT_USAGE
    );
}

#[test]
fn strategy_missing_a_scenario_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let text = std::fs::read_to_string(corpus("sigma_box.strategy")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("a & b & c");
    let p = write(&dir, "s.json", &v.to_string());
    let (code, r) = report(&[
        "validate-strategy",
        "--mode",
        "viability",
        &corpus("gamma_box.cstn"),
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(r["verdict"], "invalid");
}

#[test]
fn not_well_defined_networks_exit_4() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "bad.cstn",
        r#"{"letters":["p"],"nodes":[{"name":"O_p","observes":"p"},{"name":"X","label":"p"}]}"#,
    );
    for cmd in ["parse", "check-dc", "check-pi-dc"] {
        let (code, r) = report(&[cmd, p.to_str().unwrap()]);
        assert_eq!(code, EXIT_NOT_WD, "{cmd}");
        assert_eq!(r["verdict"], "invalid");
        assert!(r["witnesses"][0].as_str().unwrap().contains("X"));
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad_json = write(&dir, "a.cstn", "{ nodes: ");
    let bad_label = write(&dir, "b.cstn", r#"{"nodes":[{"name":"x","label":"p &"}]}"#);
    let unknown = write(
        &dir,
        "c.cstn",
        r#"{"nodes":[{"name":"x"}],"constraints":[{"u":"x","v":"y","w":1}]}"#,
    );
    for p in [&bad_json, &bad_label, &unknown, &dir.path().join("missing")] {
        let (code, r) = report(&["check-dc", p.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE, "{}", p.display());
        assert_eq!(r["verdict"], "invalid");
    }
    let g = corpus("gamma_pi.cstn");
    assert_eq!(
        cstn(&["check-eps-dc", "--epsilon", "-1/2", &g]).0,
        EXIT_USAGE
    );
    assert_eq!(
        cstn(&["check-eps-dc", "--epsilon", "1/0", &g]).0,
        EXIT_USAGE
    );
    assert_eq!(cstn(&["check-eps-dc", &g]).0, EXIT_USAGE);
    assert_eq!(cstn(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn stn_and_hytn_files() {
    let dir = TempDir::new().unwrap();
    let ok = write(
        &dir,
        "ok.stn",
        r#"{"nodes":["x","y"],"constraints":[{"u":"x","v":"y","w":3},{"u":"y","v":"x","w":-1}]}"#,
    );
    let (code, r) = report(&["check-stn", ok.to_str().unwrap()]);
    assert_eq!(code, EXIT_YES);
    let (x, y) = (
        r["strategy"]["x"].as_i64().unwrap(),
        r["strategy"]["y"].as_i64().unwrap(),
    );
    assert!(y - x <= 3 && x - y <= -1);

    let cyc = write(
        &dir,
        "no.stn",
        r#"{"nodes":["x","y"],"constraints":[{"u":"x","v":"y","w":-1},{"u":"y","v":"x","w":0}]}"#,
    );
    let (code, r) = report(&["check-stn", cyc.to_str().unwrap()]);
    assert_eq!(code, EXIT_NO);
    assert!(!r["witnesses"].as_array().unwrap().is_empty());

    // t(x) ≥ min(t(y) + 2, t(z) + 5), y ≥ x, z ≥ x: infeasible
    let h = write(
        &dir,
        "h.hytn",
        r#"{"nodes":["x","y","z"],"hyperarcs":[
            {"tail":"x","heads":[{"node":"y","w":-2},{"node":"z","w":-5}]},
            {"tail":"y","heads":[{"node":"x","w":0}]},
            {"tail":"z","heads":[{"node":"x","w":0}]}]}"#,
    );
    assert_eq!(cstn(&["check-hytn", h.to_str().unwrap()]).0, EXIT_NO);
    let h = write(
        &dir,
        "h2.hytn",
        r#"{"nodes":["x","y","z"],"hyperarcs":[
            {"tail":"x","heads":[{"node":"y","w":-2},{"node":"z","w":-5}]},
            {"tail":"y","heads":[{"node":"x","w":0}]}]}"#,
    );
    let (code, r) = report(&["check-hytn", h.to_str().unwrap()]);
    assert_eq!(code, EXIT_YES);
    let t = |n: &str| r["strategy"][n].as_i64().unwrap();
    assert!(t("x") >= (t("y") + 2).min(t("z") + 5) && t("y") >= t("x"));
}

#[test]
fn generated_networks_parse_and_are_deterministic() {
    let dir = TempDir::new().unwrap();
    for seed in 0..20 {
        let (code, text) = cstn(&[
            "generate",
            "--seed",
            &seed.to_string(),
            "--max-letters",
            "3",
        ]);
        assert_eq!(code, EXIT_YES);
        assert_eq!(
            cstn(&[
                "generate",
                "--seed",
                &seed.to_string(),
                "--max-letters",
                "3"
            ])
            .1,
            text
        );
        let p = write(&dir, "g.cstn", &text);
        assert_eq!(cstn(&["parse", p.to_str().unwrap()]).0, EXIT_YES);
        let (code, _) = cstn(&["check-pi-dc", "--oracle", p.to_str().unwrap()]);
        assert!(code == EXIT_YES || code == EXIT_NO);
    }
    let (code, text) = cstn(&["generate", "--seed", "7", "--stn"]);
    assert_eq!(code, EXIT_YES);
    let p = write(&dir, "g.stn", &text);
    let code = cstn(&["check-stn", p.to_str().unwrap()]).0;
    assert!(code == EXIT_YES || code == EXIT_NO);
}

#[test]
fn text_format() {
    let (code, out) = cstn(&["--format", "text", "check-pi-dc", &corpus("gamma_pi.cstn")]);
    assert_eq!(code, EXIT_YES);
    assert!(out.starts_with("pi-dc: yes"));
    assert!(out.contains("[p] O_p=0 (#1)"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cstn");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = status(&["check-pi-dc", &corpus("gamma_pi.cstn")]);
    assert_eq!(out.status.code(), Some(EXIT_YES));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "yes");
    assert_eq!(
        status(&["check-dc", &corpus("gamma_pi.cstn")])
            .status
            .code(),
        Some(EXIT_NO)
    );
    assert_eq!(status(&["check-dc"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(status(&["--help"]).status.code(), Some(EXIT_YES));
}
