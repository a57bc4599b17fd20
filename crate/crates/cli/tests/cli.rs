//! Driver-level behaviors: report formats, flags, exit codes, diagnostics
//! for the remaining codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn corpus(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(path)
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tensorlint"))
}

fn scratch_file(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tensorlint-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn text_diagnostics_have_the_documented_shape() {
    let path = scratch_file(
        "bad_reshape.py",
        "import tensorflow as tf\nx = tf.placeholder(tf.float32, [None, 10])\ny = tf.reshape(x, [-1, 3])\n",
    );
    let out = binary().arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().next().expect("one diagnostic line");
    // file:line:col: severity CODE: message
    assert!(line.contains("bad_reshape.py:3:"), "{line}");
    assert!(line.contains(" error ARI00"), "{line}");
}

#[test]
fn syntax_and_unsupported_constructs_exit_2() {
    let bad = scratch_file("bad_syntax.py", "def f(:\n");
    let out = binary().arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));

    let unsupported = scratch_file("unsupported.py", "x = (lambda: 1)()\n");
    let out = binary().arg(&unsupported).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported construct"));
}

#[test]
fn unknown_import_and_unresolved_call_warn() {
    let path = scratch_file("imports.py", "import scipy\ny = undefined_function()\n");
    let out = binary().arg(&path).arg("--format").arg("json").output().unwrap();
    // warnings only: exit 0 without --fail-on-error
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let codes: Vec<&str> = doc["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"ARI008"), "{codes:?}");

    let strict = binary()
        .arg(&path)
        .arg("--fail-on-error")
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1), "warnings fail under --fail-on-error");
}

#[test]
fn unresolved_declaration_selector_warns_ari009() {
    let program = scratch_file("plain.py", "x = 1\n");
    let annotations = scratch_file(
        "bad_selector.json",
        r#"{"declarations":[{"selector":{"kind":"parameter","function":"nope","parameter":"p"},"type":"top"}]}"#,
    );
    let out = binary()
        .arg(&program)
        .arg("--annotations")
        .arg(&annotations)
        .arg("--format")
        .arg("json")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let codes: Vec<&str> = doc["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap())
        .collect();
    assert_eq!(codes, vec!["ARI009"]);
}

#[test]
fn widening_cap_override_reports_ari007() {
    // a join point collecting two placeholder types exceeds a cap of 1
    let path = scratch_file(
        "widen.py",
        "import tensorflow as tf\nif c:\n    x = tf.placeholder(tf.float32, [None, 4])\nelse:\n    x = tf.placeholder(tf.float32, [None, 8])\ny = x\n",
    );
    let out = binary()
        .arg(&path)
        .arg("--widen-cap")
        .arg("1")
        .arg("--format")
        .arg("json")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let codes: Vec<&str> = doc["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"ARI007"), "{codes:?}");
}

#[test]
fn partial_failures_are_warnings() {
    // one of the two shapes reaching the reshape is invalid: a warning, not
    // an error, since a valid witness exists
    let path = scratch_file(
        "partial.py",
        "import tensorflow as tf\nx = tf.placeholder(tf.float32, [None, 12])\nif c:\n    s = [-1, 3, 4]\nelse:\n    s = [-1, 5]\ny = tf.reshape(x, s)\n",
    );
    let out = binary().arg(&path).arg("--format").arg("json").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let diags = doc["diagnostics"].as_array().unwrap();
    assert!(
        diags
            .iter()
            .any(|d| d["severity"] == "warning" && d["code"] == "ARI001"),
        "{diags:?}"
    );
    assert_eq!(doc["summary"]["errors"], 0);
}

#[test]
fn loose_hw_order_accepts_swapped_labels() {
    let out = binary()
        .arg(corpus("mnist_convnet.py"))
        .arg("--annotations")
        .arg(corpus("annotations/mnist_convnet_swapped.json"))
        .arg("--hw-order")
        .arg("loose")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn numeric_labels_override_is_respected() {
    // with an override that excludes `channel`, the convolutions reject the
    // element type
    let out = binary()
        .arg(corpus("mnist_convnet.py"))
        .arg("--annotations")
        .arg(corpus("annotations/mnist_convnet.json"))
        .arg("--numeric-labels")
        .arg("num,value")
        .arg("--format")
        .arg("json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(
        doc["diagnostics"]
            .as_array()
            .unwrap()
            .iter()
            .any(|d| d["code"] == "ARI005"),
        "{doc}"
    );
}

#[test]
fn model_search_path_env_is_used() {
    let dir = std::env::temp_dir().join(format!("tensorlint-models-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("tiny.json"),
        r#"{"packages":[{"name":"","classes":[{"name":"mylib","allocatable":true,"methods":[{"name":"import","numArgs":0,"body":[{"op":"new","def":"m","class":"mylib"},{"op":"return","value":"m"}]}]}]}]}"#,
    )
    .unwrap();
    let program = scratch_file("uses_mylib.py", "import mylib\n");
    let out = binary()
        .arg(&program)
        .arg("--model")
        .arg("tiny.json")
        .env("TENSORLINT_MODEL_DIR", &dir)
        .arg("--format")
        .arg("json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["diagnostics"].as_array().unwrap().len(), 0, "import resolves via the search path");
}

#[test]
fn multiple_files_are_analyzed_independently() {
    let a = scratch_file("multi_a.py", "import tensorflow as tf\nx = tf.placeholder(tf.float32, [None, 4])\n");
    let b = scratch_file(
        "multi_b.py",
        "import tensorflow as tf\np = tf.placeholder(tf.float32, [None, 6])\nq = tf.reshape(p, [-1, 5])\n",
    );
    let out = binary().arg(&a).arg(&b).arg("--format").arg("json").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let diags = doc["diagnostics"].as_array().unwrap();
    assert!(diags.iter().all(|d| d["file"].as_str().unwrap().contains("multi_b")));
}

#[test]
fn dump_callgraph_emits_nodes_and_edges() {
    let out = binary()
        .arg(corpus("method_calls.py"))
        .arg("--dump-callgraph")
        .arg("--format")
        .arg("json")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cg = &doc["callgraph"][0];
    assert!(cg["nodes"].as_array().unwrap().iter().any(|n| n == "Foo.foo"));
    let edges = cg["edges"].as_array().unwrap();
    assert!(
        edges
            .iter()
            .any(|e| e["targets"].as_array().unwrap().iter().any(|t| t == "Foo.foo")),
        "{edges:?}"
    );
}

#[test]
fn filters_last_output_convention() {
    // a model variant can switch the convolution output to put the filter
    // count in the trailing dimension
    let dir = std::env::temp_dir().join(format!("tensorlint-flast-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("conv.json");
    std::fs::write(
        &model,
        r#"{"output":"filters-last","packages":[
            {"name":"","classes":[{"name":"tf","allocatable":true,"methods":[{"name":"import","numArgs":0,"body":[
                {"op":"new","def":"m","class":"tf"},
                {"op":"new","def":"ph","class":"tf/placeholder"},
                {"op":"putfield","ref":"m","field":"placeholder","value":"ph"},
                {"op":"new","def":"cv","class":"tf/conv2d"},
                {"op":"putfield","ref":"m","field":"conv2d","value":"cv"},
                {"op":"return","value":"m"}]}]}]},
            {"name":"tf","classes":[
                {"name":"placeholder","allocatable":true,"methods":[{"name":"do","numArgs":2,"params":["shape"],"semantics":"placeholder"}]},
                {"name":"conv2d","allocatable":true,"methods":[{"name":"do","numArgs":3,"params":["inputs","filters"],"semantics":"conv2d"}]}]}
        ]}"#,
    )
    .unwrap();
    let program = scratch_file(
        "flast.py",
        "import tf\nx = tf.placeholder([None, 8, 8, 1])\ny = tf.conv2d(x, 32)\n",
    );
    let out = binary()
        .arg(&program)
        .arg("--model")
        .arg(&model)
        .arg("--dump-types")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.contains(":3: tensor[?1, 8, 8, 32] of num")),
        "{text}"
    );
}
