use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tiospec::oracle::{digitize, extract_triple_traces, Bounds};
use tiospec::syntax::{parse_spec, parse_tioa};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn tiospec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiospec")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tiospec"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_examples() {
    for f in ["scheduler.tioa", "controller.tioa", "scheduler_par_controller.tioa", "strategies.tioa"] {
        let o = tiospec(&["validate", path(&example(f))]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = tiospec(&["--json", "validate", path(&example("strategies.tioa"))]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["automata"][0]["deterministic"], false);
    assert_eq!(v["automata"][1]["deterministic"], true);
}

#[test]
fn syntax_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tioa");
    std::fs::write(&bad, "automaton A {\n  clocks x;\n  location L init inv: x <= ;\n}\n").unwrap();
    let o = tiospec(&["validate", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("3:29") && err.contains("expected an integer"), "{err}");

    std::fs::write(&bad, "automaton A { clocks x; location L init coinv: x>=2; }").unwrap();
    let o = tiospec(&["validate", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not downward-closed"), "{}", stdout(&o));
}

#[test]
fn compose_writes_the_golden_product() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("product.tioa");
    let o = tiospec(&[
        "compose",
        "--op",
        "par",
        path(&example("scheduler.tioa")),
        path(&example("controller.tioa")),
        "-o",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written, std::fs::read_to_string(example("scheduler_par_controller.tioa")).unwrap());
    let reparsed = parse_tioa(&written).unwrap();
    assert_eq!(tiospec::syntax::print_tioa(&reparsed), written);
}

#[test]
fn compose_pipes_into_reach_bot() {
    let o = tiospec(&["compose", "--op", "par", path(&example("scheduler.tioa")), path(&example("controller.tioa"))]);
    let r = with_stdin(&["--json", "reach-bot"], &o.stdout);
    assert_eq!(r.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["outcome"], "fails");
    assert!(v["witness"].as_array().is_some_and(|w| !w.is_empty()));

    let s = tiospec(&["reach-bot", path(&example("scheduler.tioa"))]);
    assert_eq!(s.status.code(), Some(0), "{}", stdout(&s));
}

#[test]
fn refine_and_equiv_exit_codes() {
    let s = example("scheduler.tioa");
    assert_eq!(tiospec(&["refine", path(&s), path(&s)]).status.code(), Some(0));
    assert_eq!(tiospec(&["equiv", path(&s), path(&s)]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let tight = dir.path().join("tight.tioa");
    let text = std::fs::read_to_string(&s).unwrap().replace("x>=5 && x<=8", "x>=6 && x<=8");
    std::fs::write(&tight, text).unwrap();
    // accepting finish in fewer situations is not a refinement
    let o = tiospec(&["refine", path(&s), path(&tight)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness"), "{}", stdout(&o));
    assert_eq!(tiospec(&["refine", path(&tight), path(&s)]).status.code(), Some(0));
    assert_eq!(tiospec(&["equiv", path(&s), path(&tight)]).status.code(), Some(1));

    let q = format!("{}:Q", path(&example("strategies.tioa")));
    assert_eq!(tiospec(&["refine", &q, path(&s)]).status.code(), Some(2));
}

#[test]
fn traces_json_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traces.json");
    let s = example("scheduler.tioa");
    let o = tiospec(&["traces", path(&s), "--depth", "2", "--horizon", "3", "--json-out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["alphabet", "delta", "depth", "horizon", "exact", "tt", "tr", "te"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let a = parse_tioa(&std::fs::read_to_string(&s).unwrap()).unwrap();
    let b = Bounds::unit(3, 2);
    let expected = extract_triple_traces(&digitize(&a, &b), &b).to_json(100_000).unwrap();
    assert_eq!(v, expected);

    let o = tiospec(&["traces", path(&s), "--depth", "4", "--horizon", "12", "--json-out", "-", "--limit", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mirror_dot_det_and_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let s = example("scheduler.tioa");
    let m = tiospec(&["mirror", path(&s)]);
    assert_eq!(m.status.code(), Some(0));
    let mirrored = parse_spec(&stdout(&m)).unwrap();
    assert_eq!(mirrored.automata[0].inputs.iter().collect::<Vec<_>>(), ["start"]);

    let dot = dir.path().join("s.dot");
    assert_eq!(tiospec(&["dot", path(&s), "-o", path(&dot), "--completion"]).status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph") && text.contains("⊥") && text.contains("inv: x<=100"));

    let d = tiospec(&["--json", "det", path(&s), "--horizon", "3", "--delta", "1/2"]);
    assert_eq!(d.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&d.stdout).unwrap();
    assert_eq!(v["deterministic"], true);
    assert_eq!(v["delta"], "1/2");

    let g = tiospec(&["--json", "strategies", &format!("{}:Q", path(&example("strategies.tioa"))), "--depth", "2"]);
    let v: Value = serde_json::from_slice(&g.stdout).unwrap();
    assert_eq!(v["count"].as_u64().unwrap() as usize, v["strategies"].as_array().unwrap().len());
}

#[test]
fn check_lemmas_is_deterministic() {
    let run = || tiospec(&["--json", "check-lemmas", "--corpus", "3", "--seed", "9", "--depth", "2"]);
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn selecting_from_multi_automaton_files() {
    let f = example("strategies.tioa");
    let o = tiospec(&["reach-bot", path(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FILE:NAME"));
    let o = tiospec(&["reach-bot", &format!("{}:R", path(&f))]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no automaton named `R`"));
}
