//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test -p tensorlint --test acceptance` (add
//! `-- --nocapture` to see the lines).

mod interp;
mod oracle;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;
use tensorlint_core::analysis::build;
use tensorlint_core::diag::Severity;
use tensorlint_core::frontend::{lower_module, parse_module};
use tensorlint_core::model::bundled_tensorflow_model;
use tensorlint_core::tensor::{
    api_matrix, check, load_declarations, propagate, ApiKind, ApiStatus, PropagateOptions,
    WorklistOrder,
};
use tensorlint_core::types::{
    normalize, parse_type, reshape_apply, type_equal, Dim, PyType, TensorType,
};

fn corpus(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(path)
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tensorlint"))
}

fn pass(line: &str) {
    println!("ACCEPTANCE {line}: PASS");
}

fn run_pipeline(
    program: &Path,
    annotations: Option<&Path>,
    opts: &PropagateOptions,
) -> (
    tensorlint_core::analysis::Analysis,
    tensorlint_core::tensor::TensorEstimate,
    Vec<tensorlint_core::diag::Diagnostic>,
) {
    let src = std::fs::read_to_string(program).expect("program exists");
    let ast = parse_module(&src, &program.display().to_string()).expect("parses");
    let lowered = lower_module(&ast).expect("lowers");
    let analysis = build(&lowered, &bundled_tensorflow_model());
    let decls = annotations
        .map(|p| load_declarations(p).expect("annotations load"))
        .unwrap_or_default();
    let est = propagate(&analysis, &decls, opts);
    let diags = check(&analysis, &est, opts);
    (analysis, est, diags)
}

// -- criterion 1: convnet regression -----------------------------------------

#[test]
fn acceptance_1_convnet_regression() {
    let started = Instant::now();
    let out = binary()
        .arg(corpus("mnist_convnet.py"))
        .arg("--annotations")
        .arg(corpus("annotations/mnist_convnet.json"))
        .arg("--dump-types")
        .arg("--format")
        .arg("json")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "expected exit 0: {out:?}");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    assert_eq!(doc["summary"]["errors"], 0, "no false positives expected");
    assert_eq!(doc["summary"]["warnings"], 0);

    // the thirteen annotated points of the example program
    let expected: &[(u32, &str)] = &[
        (3, "{test: {images: tensor[batch, y(28)*x(28)] of channel}, train: {images: tensor[batch, y(28)*x(28)] of channel, labels: tensor[10] of label}}"),
        (15, "(x_dict: {images: tensor[batch, y(28)*x(28)] of channel}) -> tensor[batch, n_classes] of channel"),
        (19, "tensor[batch, y(28)*x(28)] of channel"),
        (23, "tensor[batch, y(28), x(28), 1] of channel"),
        (25, "tensor[batch, y(28), x(28), 1] of channel"),
        (27, "tensor[batch, y(14), x(14), 1] of channel"),
        (29, "tensor[batch, y(14), x(14), 1] of channel"),
        (31, "tensor[batch, y(7), x(7), 1] of channel"),
        (33, "tensor[batch, y(7)*x(7)] of channel"),
        (35, "tensor[batch, 1024] of channel"),
        (37, "tensor[batch, 1024] of channel"),
        (39, "tensor[batch, n_classes] of channel"),
        (47, "tensor[batch, 10] of channel"),
    ];
    let types = doc["types"].as_array().expect("types dumped");
    for (line, want) in expected {
        let got = types
            .iter()
            .find(|t| t["line"] == *line)
            .unwrap_or_else(|| panic!("no type dumped at line {line}"));
        let got_text = got["type"].as_str().expect("type is a string");
        // byte equality of the canonical form
        assert_eq!(got_text, *want, "line {line}");
        // and equality under the annotation grammar
        let got_ty = parse_type(got_text).expect("output parses");
        let want_ty = parse_type(want).expect("expected type parses");
        assert!(type_equal(&got_ty, &want_ty), "line {line} differs as a type");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 5, "analysis took {elapsed:?}");
    pass(&format!("1 convnet regression (13 points, {} ms)", elapsed.as_millis()));
}

// -- criterion 2: factorization mutants ---------------------------------------

#[test]
fn acceptance_2_factorization_mutants() {
    let src = std::fs::read_to_string(corpus("mnist_convnet.py")).unwrap();
    let dir = std::env::temp_dir().join(format!("tensorlint-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    for (replacement, code) in [("shape=[-1, 56, 14, 1]", "ARI002"), ("shape=[-1, 28, 27, 1]", "ARI001")] {
        let mutated = src.replace("shape=[-1, 28, 28, 1]", replacement);
        assert_ne!(mutated, src);
        let path = dir.join(format!("mutant_{code}.py"));
        std::fs::write(&path, &mutated).unwrap();
        let out = binary()
            .arg(&path)
            .arg("--annotations")
            .arg(corpus("annotations/mnist_convnet.json"))
            .arg("--format")
            .arg("json")
            .output()
            .expect("binary runs");
        assert_eq!(out.status.code(), Some(1), "errors exit 1");
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let diags = doc["diagnostics"].as_array().unwrap();
        assert_eq!(diags.len(), 1, "exactly one diagnostic: {diags:?}");
        assert_eq!(diags[0]["code"], code);
        assert_eq!(diags[0]["severity"], "error");
        assert_eq!(diags[0]["line"], 23, "flagged at the reshape line");
    }
    std::fs::remove_dir_all(&dir).ok();
    pass("2 factorization mutants (ARI002 at 56x14, ARI001 at 28x27)");
}

// -- criterion 3: swap detection ----------------------------------------------

#[test]
fn acceptance_3_swap_detection() {
    let out = binary()
        .arg(corpus("mnist_convnet.py"))
        .arg("--annotations")
        .arg(corpus("annotations/mnist_convnet_swapped.json"))
        .arg("--hw-order")
        .arg("strict")
        .arg("--format")
        .arg("json")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let diags = doc["diagnostics"].as_array().unwrap();
    let label_errors: Vec<_> = diags.iter().filter(|d| d["code"] == "ARI004").collect();
    assert!(!label_errors.is_empty(), "{diags:?}");
    assert_eq!(label_errors[0]["line"], 25, "first convolution flags the swap");
    pass("3 swap detection (ARI004 under strict height/width order)");
}

// -- criterion 4: method-call semantics ---------------------------------------

#[test]
fn acceptance_4_method_semantics() {
    let (a, _, _) = run_pipeline(&corpus("method_calls.py"), None, &PropagateOptions::default());
    let init = a.program.lookup("<module>").unwrap();
    let foo = a.program.lookup("Foo.foo").unwrap();
    let sites = a.callgraph.calls_between(init, foo);
    assert_eq!(sites.len(), 4, "all four call sites reach the method");
    for s in &sites {
        let targets = a.callgraph.targets(init, *s);
        assert_eq!(targets.len(), 1, "site {s:?} resolves to exactly one target");
        assert!(targets.contains(&foo));
    }
    pass("4 method semantics (4 call sites each resolve to exactly Foo.foo)");
}

// -- criterion 5: callback resolution ------------------------------------------

#[test]
fn acceptance_5_callback_resolution() {
    let (a, _, _) = run_pipeline(
        &corpus("mnist_convnet.py"),
        Some(&corpus("annotations/mnist_convnet.json")),
        &PropagateOptions::default(),
    );
    let train_do = a.program.lookup("tensorflow/estimator/train/train.do").unwrap();
    let model_fn = a.program.lookup("model_fn").unwrap();
    let edges = a.callgraph.calls_between(train_do, model_fn);
    assert!(!edges.is_empty(), "the stored callback is invoked by train");
    pass("5 callback resolution (train reaches model_fn through the stored callback)");
}

// -- criterion 6: verified-API matrix ------------------------------------------

#[test]
fn acceptance_6_api_matrix() {
    // rows follow the expected usage pattern: reshape, conv2d, conv3d, placeholder
    let table: &[(&str, Option<&str>, [bool; 4])] = &[
        ("programs/conv_network.py", Some("annotations/mnist_convnet.json"), [true, true, false, false]),
        ("programs/mnist_deep.py", None, [true, true, false, true]),
        ("programs/mnist_max.py", None, [false, false, false, true]),
        ("programs/mnist_max_xla.py", None, [false, false, false, true]),
        ("programs/mnist_sum.py", None, [true, false, false, true]),
        ("programs/neuroimage.py", Some("annotations/neuroimage.json"), [true, false, true, false]),
    ];
    let opts = PropagateOptions::default();
    for (program, annotations, expected) in table {
        let (a, est, diags) = run_pipeline(
            &corpus(program),
            annotations.map(corpus).as_deref(),
            &opts,
        );
        let errors: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).collect();
        assert!(errors.is_empty(), "{program}: {errors:?}");
        let matrix = api_matrix(&a, &est, &opts);
        for (kind, want) in ApiKind::ALL.iter().zip(expected) {
            let got = matrix[kind];
            if *want {
                assert_eq!(got, ApiStatus::Verified, "{program}: {} should be verified", kind.as_str());
            } else {
                assert_eq!(got, ApiStatus::Absent, "{program}: {} should be absent", kind.as_str());
            }
        }
    }
    pass("6 verified-API matrix (6 programs match the expected usage pattern, zero errors)");
}

// -- criterion 7: property suites ----------------------------------------------

fn random_label(rng: &mut StdRng) -> String {
    const LABELS: [&str; 8] = ["batch", "y", "x", "z", "k", "n", "c", "v"];
    LABELS[rng.gen_range(0..LABELS.len())].to_string()
}

fn random_factor(rng: &mut StdRng, allow_sym: bool) -> Dim {
    match rng.gen_range(0..if allow_sym { 3 } else { 2 }) {
        0 => Dim::Num(rng.gen_range(1..=12)),
        1 => Dim::Labeled(random_label(rng), rng.gen_range(1..=12)),
        _ => Dim::Sym(random_label(rng)),
    }
}

fn random_dim(rng: &mut StdRng, allow_sym: bool) -> Dim {
    if rng.gen_bool(0.25) {
        let n = rng.gen_range(2..=3);
        Dim::Product((0..n).map(|_| random_factor(rng, allow_sym)).collect())
    } else {
        random_factor(rng, allow_sym)
    }
}

fn random_tensor(rng: &mut StdRng, allow_sym: bool, max_dims: usize) -> TensorType {
    let n = rng.gen_range(1..=max_dims);
    TensorType::new(
        (0..n).map(|_| random_dim(rng, allow_sym)).collect(),
        PyType::Label(random_label(rng)),
    )
}

fn random_type(rng: &mut StdRng, depth: u32) -> PyType {
    let choice = rng.gen_range(0..if depth == 0 { 3 } else { 5 });
    match choice {
        0 => PyType::Top,
        1 => PyType::Label(random_label(rng)),
        2 => PyType::Tensor(random_tensor(rng, true, 4)),
        3 => {
            let n = rng.gen_range(1..=3);
            PyType::Record(
                (0..n)
                    .map(|_| (random_label(rng), random_type(rng, depth - 1)))
                    .collect(),
            )
        }
        _ => {
            // nested tensor: element is itself a type
            let dims = (0..rng.gen_range(1..=2)).map(|_| random_dim(rng, true)).collect();
            PyType::Tensor(TensorType::new(dims, random_type(rng, depth - 1)))
        }
    }
}

#[test]
fn acceptance_7a_normalize_properties() {
    let mut rng = StdRng::seed_from_u64(0x7a);
    for _ in 0..1000 {
        let t = random_type(&mut rng, 3);
        let once = normalize(&t);
        assert_eq!(once, normalize(&once), "idempotence failed for {t:?}");

        // list form and nested form are the same type
        if let PyType::Tensor(tt) = &once {
            if tt.dims.len() >= 2 {
                let (head, tail) = tt.dims.split_first().expect("len checked");
                let nested = PyType::Tensor(TensorType::new(
                    vec![head.clone()],
                    PyType::Tensor(TensorType::new(tail.to_vec(), (*tt.element).clone())),
                ));
                assert!(type_equal(&once, &nested));
            }
        }
    }
    pass("7a normalize idempotence and nested/list equivalence (1000 random types)");
}

#[test]
fn acceptance_7b_reshape_identity_and_conservation() {
    let mut rng = StdRng::seed_from_u64(0x7b);
    for _ in 0..1000 {
        let t = random_tensor(&mut rng, false, 4);
        let total = t.total_size().expect("no symbolic dims");

        // identity
        let shape: Vec<Option<i64>> = t.dims.iter().map(|d| Some(d.size().expect("known") as i64)).collect();
        let out = reshape_apply(&t, &shape).expect("identity reshape succeeds");
        assert!(
            type_equal(&PyType::Tensor(out.clone()), &PyType::Tensor(t.clone())),
            "identity changed {t:?} to {out:?}"
        );

        // conservation on a random legal regrouping attempt
        let split = rng.gen_range(1..=4u64);
        if total.is_multiple_of(split) {
            if let Ok(out) = reshape_apply(&t, &[Some(split as i64), Some((total / split) as i64)]) {
                assert_eq!(out.total_size(), Some(total), "element count changed");
            }
        }
    }
    pass("7b reshape identity and element-count conservation (1000 random known tensors)");
}

#[test]
fn acceptance_7c_reshape_matches_brute_force_oracle() {
    let mut rng = StdRng::seed_from_u64(0x7c);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    for _ in 0..4000 {
        // tensors with <= 6 factors of size <= 12
        let mut factors = Vec::new();
        let mut dims = Vec::new();
        let n_dims = rng.gen_range(1..=3);
        for _ in 0..n_dims {
            let allow_sym = rng.gen_bool(0.3);
            let d = random_dim(&mut rng, allow_sym);
            match &d {
                Dim::Product(fs) => factors.extend(fs.clone()),
                other => factors.push(other.clone()),
            }
            dims.push(d);
        }
        if factors.len() > 6 {
            continue;
        }
        let src = TensorType::new(dims, PyType::Label("v".to_string()));

        // targets of length <= 4 with entries <= 144, biased toward products
        // of actual factor sizes so valid reshapes are well represented
        let len = rng.gen_range(1..=4);
        let mut shape: Vec<Option<i64>> = Vec::with_capacity(len);
        let mut used_wild = false;
        for _ in 0..len {
            let entry = match rng.gen_range(0..10) {
                0 if !used_wild => {
                    used_wild = true;
                    Some(-1)
                }
                1..=2 => Some(1),
                3..=6 => {
                    // product of a random run of factor sizes
                    let known: Vec<u64> = factors.iter().filter_map(|f| f.size()).collect();
                    if known.is_empty() {
                        Some(rng.gen_range(1..=12))
                    } else {
                        let a = rng.gen_range(0..known.len());
                        let b = rng.gen_range(a..known.len().min(a + 3));
                        let p: u64 = known[a..=b].iter().product();
                        Some(p.min(144) as i64)
                    }
                }
                _ => Some(rng.gen_range(1..=144)),
            };
            shape.push(entry);
        }

        let got = reshape_apply(&src, &shape);
        let oracle_solutions = oracle::enumerate_reshapes(&src, &shape);
        match got {
            Ok(out) => {
                accepted += 1;
                assert!(
                    !oracle_solutions.is_empty(),
                    "checker accepted {src:?} -> {shape:?} but the oracle rejects"
                );
                let normalized_out = match normalize(&PyType::Tensor(out.clone())) {
                    PyType::Tensor(t) => t.dims,
                    _ => unreachable!(),
                };
                let matched = oracle_solutions.iter().any(|sol| {
                    let sol_t = match normalize(&PyType::Tensor(TensorType::new(
                        sol.clone(),
                        PyType::Label("v".to_string()),
                    ))) {
                        PyType::Tensor(t) => t.dims,
                        _ => unreachable!(),
                    };
                    sol_t == normalized_out
                });
                assert!(
                    matched,
                    "checker produced {out:?} for {src:?} -> {shape:?}, oracle allows {oracle_solutions:?}"
                );
            }
            Err(_) => {
                rejected += 1;
                assert!(
                    oracle_solutions.is_empty(),
                    "checker rejected {src:?} -> {shape:?} but the oracle accepts {oracle_solutions:?}"
                );
            }
        }
    }
    assert!(accepted > 200, "sampling produced too few valid reshapes ({accepted})");
    assert!(rejected > 200, "sampling produced too few invalid reshapes ({rejected})");
    pass(&format!(
        "7c reshape matches the brute-force grouping oracle ({accepted} accepts, {rejected} rejects)"
    ));
}

#[test]
fn acceptance_7d_record_permutation_invariance() {
    let mut rng = StdRng::seed_from_u64(0x7d);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let mut fields: Vec<(String, PyType)> = (0..n)
            .map(|i| (format!("f{i}"), random_type(&mut rng, 2)))
            .collect();
        let a = PyType::Record(fields.iter().cloned().collect());
        // shuffle
        for i in (1..fields.len()).rev() {
            let j = rng.gen_range(0..=i);
            fields.swap(i, j);
        }
        let b = PyType::Record(fields.into_iter().collect());
        assert!(type_equal(&a, &b));
    }
    pass("7d record field-permutation invariance of type equality (1000 cases)");
}

#[test]
fn acceptance_7e_fixpoint_determinism() {
    for (program, annotations) in [
        ("mnist_convnet.py", Some("annotations/mnist_convnet.json")),
        ("programs/mnist_deep.py", None),
        ("programs/neuroimage.py", Some("annotations/neuroimage.json")),
    ] {
        let src = std::fs::read_to_string(corpus(program)).unwrap();
        let ast = parse_module(&src, program).unwrap();
        let lowered = lower_module(&ast).unwrap();
        let analysis = build(&lowered, &bundled_tensorflow_model());
        let decls = annotations
            .map(|p| load_declarations(&corpus(p)).unwrap())
            .unwrap_or_default();

        let baseline_opts = PropagateOptions::default();
        let baseline = propagate(&analysis, &decls, &baseline_opts);
        let baseline_snapshot = baseline.snapshot();
        let baseline_diags = check(&analysis, &baseline, &baseline_opts);

        for seed in 1..=10u64 {
            let opts = PropagateOptions {
                order: WorklistOrder::Shuffled(seed.wrapping_mul(0x9e3779b97f4a7c15)),
                ..PropagateOptions::default()
            };
            let est = propagate(&analysis, &decls, &opts);
            assert_eq!(
                est.snapshot(),
                baseline_snapshot,
                "{program}: estimates differ under shuffled order {seed}"
            );
            let diags = check(&analysis, &est, &opts);
            assert_eq!(diags, baseline_diags, "{program}: diagnostics differ under order {seed}");
        }
    }
    pass("7e fixpoint determinism under 10 randomized worklist orders (3 programs)");
}

#[test]
fn acceptance_7f_pointer_analysis_soundness() {
    let mut rng = StdRng::seed_from_u64(0x7f);
    for case in 0..200 {
        let f = interp::generate_program(&mut rng, 30);
        let total: usize = f.blocks.iter().map(|b| b.instrs.len()).sum();
        assert!(total <= 30);
        let analysis = interp::analyze_straight_line(f.clone());
        if let Err(msg) = interp::check_soundness(&f, &analysis) {
            panic!(
                "case {case}: unsound points-to result: {msg}\n{}",
                tensorlint_core::ir::pretty_print(&f)
            );
        }
    }
    pass("7f pointer analysis sound vs the reference interpreter (200 programs <= 30 instructions)");
}

// -- auxiliary invariants exercised through the binary --------------------------

#[test]
fn acceptance_aux_exit_codes_and_json() {
    // missing file -> usage failure
    let out = binary().arg("no_such_file.py").output().expect("binary runs");
    assert_eq!(out.status.code(), Some(2));

    // json output round-trips
    let out = binary()
        .arg(corpus("mnist_convnet.py"))
        .arg("--annotations")
        .arg(corpus("annotations/mnist_convnet.json"))
        .arg("--format")
        .arg("json")
        .output()
        .expect("binary runs");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reserialized: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(doc, reserialized);
    pass("aux exit codes and JSON round-trip");
}
