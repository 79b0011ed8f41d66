use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EX1: &str = "\
1: 3 4 5 2
2: 1 4 3 5 6
3: 5 6 1 2
4: 5 6 1 2
5: 1 2 3 4
6: 2 3 4
";

const NOSM: &str = "\
1: 2 3 4
2: 3 1 4
3: 1 2 4
4: 1 2 3
";

const C6: &str = "\
1: 2 6
2: 3 1
3: 4 2
4: 5 3
5: 6 4
6: 1 5
";

const LAT3: &str = "\
1: 4 5 6
2: 5 6 4
3: 6 4 5
4: 2 3 1
5: 3 1 2
6: 1 2 3
";

const PATH3: &str = "\
1: 2
2: 1 3
3: 2
";

const C6_W: &str = "\
1 2 5
2 3 1
3 4 1
4 5 1
5 6 1
6 1 1
";

struct Workbench {
    dir: tempfile::TempDir,
}

impl Workbench {
    fn new() -> Self {
        Workbench { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, content: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        p
    }
}

fn srp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srp"))
        .args(args)
        .output()
        .unwrap()
}

fn run(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srp"))
        .args(args.iter().map(|p| p.as_os_str()))
        .output()
        .unwrap()
}

fn run_s(head: &[&str], tail: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_srp"));
    cmd.args(head);
    cmd.args(tail.iter().map(|p| p.as_os_str()));
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn solve_prints_the_matching() {
    let wb = Workbench::new();
    let ex1 = wb.file("ex1.sm", EX1);
    let out = run_s(&["solve"], &[&ex1]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "1 4\n2 5\n3 6\n");
}

#[test]
fn solve_without_stable_matching_exits_1() {
    let wb = Workbench::new();
    let nosm = wb.file("nosm.sm", NOSM);
    let out = run_s(&["solve"], &[&nosm]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "no stable matching\n");
}

#[test]
fn reduce_emits_a_parseable_instance() {
    let wb = Workbench::new();
    let ex1 = wb.file("ex1.sm", EX1);
    let out = run_s(&["reduce", "--emit", "h"], &[&ex1]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    // round trip: the emitted instance parses and solves to the same matching
    let h = wb.file("h.sm", &text);
    let solved = run_s(&["solve"], &[&h]);
    assert_eq!(stdout(&solved), "1 4\n2 5\n3 6\n");
    let again = run_s(&["reduce", "--emit", "h"], &[&h]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn reduce_emits_stable_edges_and_log() {
    let wb = Workbench::new();
    let ex1 = wb.file("ex1.sm", EX1);
    let em = run_s(&["reduce", "--emit", "em"], &[&ex1]);
    assert_eq!(stdout(&em), "1 4\n2 5\n3 6\n");
    let log = run_s(&["reduce", "--emit", "log"], &[&ex1]);
    assert_eq!(code(&log), 0);
    // phase one removes three edges; elimination, run on the whole core,
    // removes all nine edges outside the stable-edge set
    assert_eq!(stdout(&log).lines().count(), 3 + 9);
    let gi = run_s(&["reduce", "--emit", "gi"], &[&ex1]);
    assert_eq!(code(&gi), 0);
    let gi_sys = wb.file("gi.sm", &stdout(&gi));
    assert_eq!(code(&run_s(&["solve"], &[&gi_sys])), 0);
}

#[test]
fn check_reports_stability() {
    let wb = Workbench::new();
    let ex1 = wb.file("ex1.sm", EX1);
    let good = wb.file("good.m", "1 4\n2 5\n3 6\n");
    let bad = wb.file("bad.m", "1 5\n2 4\n3 6\n");
    let broken = wb.file("broken.m", "1 4\n4 2\n");
    let out = run(&[Path::new("check"), &ex1, &good]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "stable\n");
    let out = run(&[Path::new("check"), &ex1, &bad]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("unstable: blocking edge "));
    let out = run(&[Path::new("check"), &ex1, &broken]);
    assert_eq!(code(&out), 3);
}

#[test]
fn reducible_answers_yes_on_ex1() {
    let wb = Workbench::new();
    let ex1 = wb.file("ex1.sm", EX1);
    let out = run_s(&["reducible"], &[&ex1]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("reducible\n"));
}

#[test]
fn optimize_exact_and_brute_agree() {
    let wb = Workbench::new();
    let c6 = wb.file("c6.sm", C6);
    let w = wb.file("c6.w", C6_W);
    for method in ["exact", "brute"] {
        let out = run_s(&["optimize", "--method", method, "--weights"], &[&w, &c6]);
        assert_eq!(code(&out), 0, "{method}");
        assert!(stdout(&out).ends_with("weight 3\n"), "{method}: {}", stdout(&out));
        let out = run_s(&["optimize", "--max", "--method", method, "--weights"], &[&w, &c6]);
        assert!(stdout(&out).ends_with("weight 7\n"), "{method}: {}", stdout(&out));
    }
}

#[test]
fn optimize_approx_respects_its_bound() {
    let wb = Workbench::new();
    let c6 = wb.file("c6.sm", C6);
    let w = wb.file("c6.w", C6_W);
    let out = run_s(&["optimize", "--method", "approx", "--weights"], &[&w, &c6]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("weight 3\n"), "{text}");
    assert!(text.contains("bound "), "{text}");

    // degree three in the stable-edge graph: rejected as a precondition
    let lat3 = wb.file("lat3.sm", LAT3);
    let w3 = wb.file("lat3.w", "1 4 1\n");
    let out = run_s(&["optimize", "--method", "approx", "--weights"], &[&w3, &lat3]);
    assert_eq!(code(&out), 2);

    // approximation only minimizes
    let out = run_s(&["optimize", "--max", "--method", "approx", "--weights"], &[&w, &c6]);
    assert_eq!(code(&out), 3);
}

#[test]
fn optimize_warns_about_defaulted_weights() {
    let wb = Workbench::new();
    let c6 = wb.file("c6.sm", C6);
    let partial = wb.file("partial.w", "1 2 5\n");
    let out = run_s(&["optimize", "--weights"], &[&partial, &c6]);
    assert_eq!(code(&out), 0);
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("defaulting to 0"), "{err}");
    assert!(stdout(&out).ends_with("weight 0\n"));
}

#[test]
fn enumerate_counts_and_limits() {
    let wb = Workbench::new();
    let c6 = wb.file("c6.sm", C6);
    let out = run_s(&["enumerate"], &[&c6]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("2 stable matching(s)\n"));
    assert_eq!(stdout(&out).lines().count(), 3);
    let out = run_s(&["enumerate", "--limit", "1"], &[&c6]);
    assert_eq!(stdout(&out).lines().count(), 2);
    let nosm = wb.file("nosm.sm", NOSM);
    let out = run_s(&["enumerate"], &[&nosm]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "0 stable matching(s)\n");
}

#[test]
fn polytope_membership_verdicts() {
    let wb = Workbench::new();
    let ex1 = wb.file("ex1.sm", EX1);
    let member = wb.file("m.pt", "1 4 1\n2 5 1\n3 6 1\n");
    let zero = wb.file("z.pt", "# empty point\n");
    for variant in ["fsm", "fsm-prime", "fsm-bar"] {
        let out = run_s(&["polytope", "--variant", variant, "--point"], &[&member, &ex1]);
        assert_eq!(code(&out), 0, "{variant}");
        assert_eq!(stdout(&out), "member\n", "{variant}");
    }
    let out = run_s(&["polytope", "--variant", "fsm", "--point"], &[&zero, &ex1]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("not a member\n"));
    assert!(stdout(&out).contains("violated: stability at edge "));

    // stable-edge variants need perfect-core form
    let path3 = wb.file("path3.sm", PATH3);
    let pt = wb.file("p.pt", "1 2 1\n");
    let out = run_s(&["polytope", "--variant", "fsm-bar", "--point"], &[&pt, &path3]);
    assert_eq!(code(&out), 2);
}

#[test]
fn parse_and_usage_failures_exit_3() {
    let wb = Workbench::new();
    let garbled = wb.file("bad.sm", "1: 2\n2: 3\n3: 2\n");
    assert_eq!(code(&run_s(&["solve"], &[&garbled])), 3);
    assert_eq!(code(&srp(&["solve", "/definitely/missing.sm"])), 3);
    assert_eq!(code(&srp(&["frobnicate"])), 3);
    assert_eq!(code(&srp(&["--help"])), 0);
}

#[test]
fn json_reports_are_deterministic_and_valid() {
    let wb = Workbench::new();
    let ex1 = wb.file("ex1.sm", EX1);
    let c6 = wb.file("c6.sm", C6);
    let w = wb.file("c6.w", C6_W);
    let good = wb.file("good.m", "1 4\n2 5\n3 6\n");
    let pt = wb.file("m.pt", "1 4 1\n2 5 1\n3 6 1\n");
    let nosm = wb.file("nosm.sm", NOSM);

    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json"),
        )
        .unwrap(),
    )
    .unwrap();

    let invocations: Vec<Vec<&Path>> = vec![
        vec![Path::new("--json"), Path::new("solve"), &ex1],
        vec![Path::new("--json"), Path::new("solve"), &nosm],
        vec![Path::new("--json"), Path::new("reduce"), &ex1],
        vec![Path::new("--json"), Path::new("check"), &ex1, &good],
        vec![Path::new("--json"), Path::new("reducible"), &ex1],
        vec![
            Path::new("--json"),
            Path::new("optimize"),
            Path::new("--weights"),
            &w,
            &c6,
        ],
        vec![Path::new("--json"), Path::new("enumerate"), &c6],
        vec![
            Path::new("--json"),
            Path::new("polytope"),
            Path::new("--variant"),
            Path::new("fsm"),
            Path::new("--point"),
            &pt,
            &ex1,
        ],
    ];
    for args in invocations {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "nondeterministic payload for {args:?}");
        let payload: Value = serde_json::from_slice(&a.stdout).unwrap();
        if let Err(msg) = validate(&schema, &payload) {
            panic!("schema violation for {args:?}: {msg}");
        }
        // rationals travel as p/q strings
        if args[1] == Path::new("optimize") {
            assert_eq!(payload["result"]["weight"], Value::String("3/1".into()));
        }
    }
}

// Minimal validator for the subset of JSON Schema the report schema uses:
// type, required, properties, additionalProperties, items, enum.
fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            return Err(format!("{value} not in enum"));
        }
    }
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.is_i64() || value.is_u64(),
            "number" => value.is_number(),
            "boolean" => value.is_boolean(),
            other => return Err(format!("unsupported type `{other}`")),
        };
        if !ok {
            return Err(format!("expected {ty}, got {value}"));
        }
    }
    if let Some(obj) = value.as_object() {
        if let Some(req) = schema.get("required").and_then(Value::as_array) {
            for key in req {
                let key = key.as_str().unwrap();
                if !obj.contains_key(key) {
                    return Err(format!("missing required key `{key}`"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        let extra_ok = schema
            .get("additionalProperties")
            .and_then(Value::as_bool)
            .unwrap_or(true);
        for (key, sub) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(subschema) => validate(subschema, sub)?,
                None if extra_ok => {}
                None => return Err(format!("unexpected key `{key}`")),
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for item in arr {
            validate(items, item)?;
        }
    }
    Ok(())
}
