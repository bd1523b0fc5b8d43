use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn dyncaus(args: &[&str]) -> Output {
    dyncaus_with_input(args, "")
}

fn dyncaus_with_input(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dyncaus"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn traces_of_the_shrinking_example() {
    let o = dyncaus(&["traces", &fixture("sigma_xi.esd")]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 11);
    for t in ["ε", "a b", "c a b", "c b a", "a c b"] {
        assert!(lines.iter().any(|l| l == t), "{t} missing");
    }
    assert!(!lines.iter().any(|l| l == "b"));
    let short = dyncaus(&["traces", &fixture("sigma_xi.esd"), "--max-len", "1"]);
    assert_eq!(stdout(&short), "ε\na\nc\n");
}

#[test]
fn encoding_preserves_posets() {
    let o = dyncaus(&["compare", &fixture("sigma_xi.esd"), &fixture("des_of_sigma_xi.esd"), "--by", "posets"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for flavor in ["liberal", "minimal", "late"] {
        let o = dyncaus(&[
            "compare",
            &fixture("sigma_xi.esd"),
            &fixture("des_of_sigma_xi.esd"),
            "--by",
            "posets",
            "--flavor",
            flavor,
        ]);
        assert_eq!(code(&o), 0, "{flavor}");
    }
    let o = dyncaus(&["encode", &fixture("sigma_xi.esd"), "--to", "des"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(fixture("des_of_sigma_xi.esd")).unwrap());
}

#[test]
fn inequivalent_structures_exit_one() {
    let o = dyncaus(&["compare", &fixture("sigma_xi.esd"), &fixture("farm.esd"), "--by", "traces"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), "not equivalent\n");
    let o = dyncaus(&["compare", &fixture("sigma_xi.esd"), &fixture("farm.esd"), "--by", "ts"]);
    assert_eq!(code(&o), 1);
    let o = dyncaus(&["compare", &fixture("farm.esd"), &fixture("farm.esd"), "--by", "ts"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn invalid_structures_exit_one_with_a_diagnostic() {
    let o = dyncaus(&["validate", &fixture("broken.esd")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("adds and drops the same cause"), "{}", stderr(&o));
}

#[test]
fn parse_and_usage_errors_exit_two() {
    let o = dyncaus(&["validate", &fixture("syntax.esd")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("3:12"), "{}", stderr(&o));
    assert_eq!(code(&dyncaus(&["frobnicate"])), 2);
    assert_eq!(code(&dyncaus(&["validate", "/no/such/file.esd"])), 2);
    assert_eq!(code(&dyncaus(&["encode", &fixture("farm.esd"), "--to", "des"])), 2);
    assert_eq!(code(&dyncaus(&["oracle", "no-such-check"])), 2);
    assert_eq!(code(&dyncaus(&["oracle"])), 2);
    // traces are not defined for resolvable conflicts
    let rces = dyncaus(&["encode", &fixture("sigma_xi.esd"), "--to", "rces"]);
    let o = dyncaus_with_input(&["traces", "-"], &stdout(&rces));
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_reports_the_class() {
    let o = dyncaus(&["validate", &fixture("farm.esd")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "valid dces structure with 7 events\nssdc: true\nebdc: false\n");
}

#[test]
fn every_subcommand_speaks_json() {
    let s = fixture("sigma_xi.esd");
    let d = fixture("des_of_sigma_xi.esd");
    let cases: Vec<Vec<&str>> = vec![
        vec!["validate", &s],
        vec!["traces", &s],
        vec!["configs", &s],
        vec!["posets", &s, "--flavor", "late"],
        vec!["graph", &s],
        vec!["encode", &s, "--to", "rces"],
        vec!["compare", &s, &d, "--by", "configs"],
        vec!["oracle", "ses-in-rces-strict"],
    ];
    for mut args in cases {
        args.push("--json");
        let o = dyncaus(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(!v.is_null());
    }
    let o = dyncaus(&["configs", &s, "--json"]);
    let configs: Vec<Vec<String>> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(configs.len(), 7);
}

#[test]
fn graphs() {
    let o = dyncaus(&["graph", &fixture("farm.esd"), "--format", "json", "--steps", "single"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let nodes = v["nodes"].as_array().unwrap();
    assert!(nodes.iter().all(|n| n.get("caus").is_some()));
    let edges = v["edges"].as_array().unwrap();
    for e in edges {
        let (a, b) = (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize);
        let size = |i: usize| nodes[i]["config"].as_array().unwrap().len();
        assert_eq!(size(b), size(a) + 1);
    }
    let o = dyncaus(&["graph", &fixture("sigma_xi.esd")]);
    assert!(stdout(&o).starts_with("digraph transitions {"));
}

#[test]
fn oracle_outcomes() {
    let o = dyncaus(&["oracle", "ges-vs-ses"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("HOLDS ges-vs-ses"));
    let o = dyncaus(&["oracle", "weakened-ses-in-rces"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness at tier 0 index 0"), "{}", stdout(&o));
}

#[test]
fn stepping_and_undoing() {
    let script = "plow\nrain\nshow caus\nharvest\nundo\nundo\nshow\n";
    let o = dyncaus_with_input(&["step", &fixture("farm.esd"), "--json"], script);
    assert_eq!(code(&o), 0);
    let out: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // initial, plow, rain, show caus, undo, undo, show
    assert_eq!(out.len(), 7);
    assert_eq!(out[2]["delta"]["dropped"], serde_json::json!([["water", "plant"]]));
    assert_eq!(out[3], serde_json::json!([["plant", "harvest"], ["plow", "plant"]]));
    assert_eq!(out[4]["caus"], out[1]["caus"]);
    assert_eq!(out[4]["config"], out[1]["config"]);
    assert_eq!(out[6]["caus"], out[0]["caus"]);
    assert_eq!(out[6]["config"], out[0]["config"]);
    assert!(stderr(&o).contains("harvest is not enabled"));
}

#[test]
fn static_families_cannot_be_stepped() {
    let o = dyncaus(&["step", &fixture("des_of_sigma_xi.esd")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn output_is_deterministic() {
    for args in [["traces", "farm.esd"], ["configs", "farm.esd"], ["graph", "farm.esd"]] {
        let f = fixture(args[1]);
        let a = dyncaus(&[args[0], &f]);
        let b = dyncaus(&[args[0], &f]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn serve_reads_the_port_from_the_environment() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_dyncaus"))
        .arg("serve")
        .env("DYNCAUS_PORT", port.to_string())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let mut reply = String::new();
    while Instant::now() < deadline {
        if let Ok(mut s) = TcpStream::connect(("127.0.0.1", port)) {
            s.write_all(b"GET /sessions/none HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
            s.read_to_string(&mut reply).unwrap();
            break;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 404"), "{reply}");
}
