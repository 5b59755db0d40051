use splitcross::corpus::{build_scenario, BUILTIN};
use splitcross_cli::{parse_scenario_source, run_args, EXIT_INCOMPLETE, EXIT_OK, EXIT_PARSE};

fn run(args: &[&str]) -> (String, i32) {
    let o = run_args(std::iter::once("splitcross").chain(args.iter().copied()));
    (o.output, o.code)
}

#[test]
fn zz_asymmetry_from_the_command_line() {
    let (out, code) = run(&["cross", "--scenario", "builtin:zz-asymmetric"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Y crosses X: true (certified"));
    assert!(out.contains("X crosses Y: false (certified"));
}

#[test]
fn unknown_key_is_a_parse_error_with_its_line() {
    let dir = std::env::temp_dir().join(format!("splitcross-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.txt");
    std::fs::write(
        &path,
        "splitcross-scenario v1\nname = m\ngenerators = s t\nsplitting F amalgam\n  edge_grp = s | t\nend\n",
    )
    .unwrap();
    let (out, code) = run(&["cross", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_PARSE);
    assert!(out.contains("line 5") && out.contains("edge_grp"), "{out}");
}

#[test]
fn structured_output_is_deterministic() {
    let args = ["intersect", "--scenario", "builtin:four-z2", "--format", "structured"];
    let (a, code) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(run(&args).0, a);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["result"].as_array().unwrap().len(), 3);
    assert_eq!(v["result"][0]["report"]["certified_exact"], 1);
}

#[test]
fn verify_four_z2_all_pass() {
    let (out, code) = run(&["verify", "--scenario", "builtin:four-z2", "--radius", "6"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.matches("[pass]").count(), 15);
}

#[test]
fn advisory_verdicts_set_the_incomplete_code() {
    let (out, code) = run(&[
        "cross", "--scenario", "builtin:genus2-curves", "--method", "truncated", "--radius", "3",
    ]);
    assert_eq!(code, EXIT_INCOMPLETE, "{out}");
    assert!(out.contains("advisory, truncated, radius 3"));
    // Tree certificates need splitting sets; the plane has none.
    let (_, code) = run(&["cross", "--scenario", "builtin:zz-asymmetric", "--method", "tree"]);
    assert_eq!(code, EXIT_PARSE);
}

#[test]
fn json_and_text_scenarios_agree() {
    for name in BUILTIN {
        let sc = build_scenario(name).unwrap();
        let json = serde_json::to_string(&sc).unwrap();
        assert_eq!(parse_scenario_source(&json).unwrap(), sc);
        let (text, code) = run(&["emit", "--scenario", &format!("builtin:{name}")]);
        assert_eq!(code, EXIT_OK);
        let body = text.rsplit_once("command:").unwrap().0;
        assert_eq!(parse_scenario_source(body).unwrap(), sc);
    }
}

#[test]
fn bad_flags_and_names() {
    assert_eq!(run(&["cross", "--scenario", "builtin:nope"]).1, EXIT_PARSE);
    assert_eq!(run(&["cross", "--method", "magic"]).1, EXIT_PARSE);
    assert_eq!(run(&["corpus-list"]).1, EXIT_OK);
}
