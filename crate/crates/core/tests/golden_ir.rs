//! Pins the pretty-printed IR of the MNIST corpus program; the textual form
//! is a stable output format and must stay byte-identical across runs.

use std::path::Path;
use tensorlint_core::frontend::{lower_module, parse_module};
use tensorlint_core::ir::{pretty_print, validate};

#[test]
fn convnet_ir_matches_the_golden_file() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let src = std::fs::read_to_string(root.join("../../corpus/mnist_convnet.py")).unwrap();
    let ast = parse_module(&src, "mnist_convnet.py").unwrap();
    let lowered = lower_module(&ast).unwrap();

    for f in &lowered.functions {
        let violations = validate(f);
        assert!(violations.is_empty(), "{}: {violations:?}", f.name);
    }

    let mut rendered = String::new();
    for f in &lowered.functions {
        rendered.push_str(&pretty_print(f));
        rendered.push('\n');
    }
    let golden = std::fs::read_to_string(root.join("tests/golden/mnist_convnet.ir")).unwrap();
    assert_eq!(rendered, golden, "IR text drifted from the pinned golden file");
}

#[test]
fn pretty_print_is_stable_across_runs() {
    let src = "def f(a):\n    if a == 1:\n        b = a + 2\n    else:\n        b = 3\n    return b\n";
    let first = {
        let ast = parse_module(src, "t.py").unwrap();
        let lowered = lower_module(&ast).unwrap();
        lowered.functions.iter().map(pretty_print).collect::<Vec<_>>()
    };
    for _ in 0..5 {
        let ast = parse_module(src, "t.py").unwrap();
        let lowered = lower_module(&ast).unwrap();
        let again: Vec<String> = lowered.functions.iter().map(pretty_print).collect();
        assert_eq!(first, again);
    }
}
