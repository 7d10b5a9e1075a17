use std::io::Write;
use std::process::{Command, Output, Stdio};

fn cpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpc")).args(args).output().expect("run cpc")
}

fn corpus(name: &str) -> String {
    format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn valid_document_exits_zero_with_qed_per_proof() {
    let o = cpc(&["check", &corpus("ewd1297-gen.cpc"), "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.matches("\nQED\n").count(), 3, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn rational_mutation_exits_one_with_counterexamples() {
    let o = cpc(&["check", &corpus("ewd1297-rational.cpc")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("--- Checking that completed statement passes contract checking... FAIL"));
    assert!(out.contains("Counterexample found when testing guard obligation:"));
    assert!(out.contains("(b 0)"));
}

#[test]
fn syntax_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.cpc");
    std::fs::write(&path, "Conjecture broken:\n(=> (natp n)\n").unwrap();
    let o = cpc(&["check", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let d = &v["diagnostics"][0];
    assert_eq!(d["code"], "syntax");
    assert_eq!(d["severity"], "error");
    assert!(d["span"]["line"].as_u64().unwrap() >= 1);
}

#[test]
fn missing_file_is_an_internal_error() {
    let o = cpc(&["check", "/nonexistent/file.cpc"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn parsing_an_empty_file_gives_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cpc");
    std::fs::write(&path, "").unwrap();
    let o = cpc(&["parse", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["items"].as_array().unwrap().len(), 0);
    assert_eq!(v["diagnostics"].as_array().unwrap().len(), 0);
}

#[test]
fn stdin_is_read_for_dash() {
    let text = std::fs::read_to_string(corpus("ewd1297.cpc")).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_cpc"))
        .args(["parse", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Conjecture ewd-1297-2:"));
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;").replace('\'', "&apos;")
}

#[test]
fn json_and_xml_carry_the_same_diagnostics() {
    for file in ["ewd1297-rational.cpc", "sorting.cpc"] {
        let json = stdout(&cpc(&["check", &corpus(file), "--format", "json", "--max-tests", "200"]));
        let xml = stdout(&cpc(&["check", &corpus(file), "--format", "xml", "--max-tests", "200"]));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let diags = v["diagnostics"].as_array().unwrap();
        assert_eq!(xml.matches("<diagnostic ").count(), diags.len());
        for d in diags {
            let head = format!(
                r#"<diagnostic severity="{}" code="{}">"#,
                d["severity"].as_str().unwrap(),
                xml_escape(d["code"].as_str().unwrap())
            );
            assert!(xml.contains(&head), "{head}");
            let msg = format!("<message>{}</message>", xml_escape(d["message"].as_str().unwrap()));
            assert!(xml.contains(&msg), "{msg}");
            for cx in d["data"]["counterexamples"].as_array().into_iter().flatten() {
                assert!(xml.contains(&xml_escape(cx.as_str().unwrap())));
            }
        }
        let items = v["items"].as_array().unwrap();
        assert_eq!(xml.matches("<item ").count(), items.len());
        let checks: usize = items.iter().map(|i| i["checks"].as_array().unwrap().len()).sum();
        assert_eq!(xml.matches("<check ").count(), checks);
    }
}

#[test]
fn text_output_is_stable() {
    let a = stdout(&cpc(&["check", &corpus("ewd1297-rational.cpc")]));
    let b = stdout(&cpc(&["check", &corpus("ewd1297-rational.cpc")]));
    assert_eq!(a, b);
    let golden =
        std::fs::read_to_string(format!("{}/tests/golden/ewd1297-rational.txt", env!("CARGO_MANIFEST_DIR"))).unwrap();
    assert_eq!(a, golden);
}

#[test]
fn trace_files_are_written_per_proof() {
    let dir = tempfile::tempdir().unwrap();
    let o = cpc(&["trace", &corpus("ewd1297.cpc"), "--trace-out", dir.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["ewd-1297-1", "ewd-1297-2", "ewd-1297"] {
        let path = dir.path().join(format!("{name}.trace"));
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(cpc_kernel::replay_text(&text), cpc_kernel::Verdict::Accepted, "{name}");
    }
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let files: Vec<&str> = v["items"].as_array().unwrap().iter().filter_map(|i| i["trace_file"].as_str()).collect();
    assert_eq!(files, ["ewd-1297-1.trace", "ewd-1297-2.trace", "ewd-1297.trace"]);
}
