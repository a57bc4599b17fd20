//! Declarative library models: JSON files describing framework objects and
//! functions as small IR bodies, plus per-method semantics tags that bind
//! API calls to the tensor transfer functions.
//!
//! A model file is a list of packages, each holding classes with methods.
//! A method body is written in the IR's own vocabulary (`new`, `putfield`,
//! `getfield`, `call`, `return`); operands are `argN` parameter references,
//! prior `def` names, or `{"int": n}` literals. A method named `import` is
//! the module-import entry invoked by the lowering of `import` statements.

use crate::ir::{
    AllocKind, Callee, FunctionBuilder, FunctionKind, IRFunction, InstrKind, Literal, Terminator, ValueId,
};
use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// Semantics tags a model method may carry; each names a transfer function
/// in the type module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Semantics {
    Reshape,
    Conv2d,
    Conv3d,
    Placeholder,
    MaxPooling2d,
    Flatten,
    Dense,
    Dropout,
    Identity,
    Opaque,
}

impl Semantics {
    pub fn parse(tag: &str) -> Option<Semantics> {
        Some(match tag {
            "reshape" => Semantics::Reshape,
            "conv2d" => Semantics::Conv2d,
            "conv3d" => Semantics::Conv3d,
            "placeholder" => Semantics::Placeholder,
            "max_pooling2d" => Semantics::MaxPooling2d,
            "flatten" => Semantics::Flatten,
            "dense" => Semantics::Dense,
            "dropout" => Semantics::Dropout,
            "identity" => Semantics::Identity,
            "opaque" => Semantics::Opaque,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Reshape => "reshape",
            Semantics::Conv2d => "conv2d",
            Semantics::Conv3d => "conv3d",
            Semantics::Placeholder => "placeholder",
            Semantics::MaxPooling2d => "max_pooling2d",
            Semantics::Flatten => "flatten",
            Semantics::Dense => "dense",
            Semantics::Dropout => "dropout",
            Semantics::Identity => "identity",
            Semantics::Opaque => "opaque",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {pointer}: {message}")]
    Schema {
        path: String,
        pointer: String,
        message: String,
    },
    #[error("model references undefined name {name:?} at {pointer}")]
    DanglingReference { name: String, pointer: String },
    #[error("unknown semantics tag {tag:?} at {pointer}")]
    UnknownSemanticsTag { tag: String, pointer: String },
    #[error("no model for module {name:?}")]
    UnknownModule { name: String },
    #[error("cannot read model file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

// ---------------------------------------------------------------------------
// raw file schema

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RawModel {
    packages: Vec<RawPackage>,
    /// `"filters-last"` switches the convolution output convention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RawPackage {
    name: String,
    classes: Vec<RawClass>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RawClass {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allocatable: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    methods: Vec<RawMethod>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RawMethod {
    name: String,
    #[serde(rename = "numArgs")]
    num_args: u32,
    /// Names for arg1.., used to match keyword arguments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    semantics: Option<String>,
    /// Element label attached by the placeholder transfer (default `num`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    element: Option<String>,
    /// Absent body defaults to allocating and returning a fresh object.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    body: Option<Vec<RawInstr>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "lowercase")]
enum RawInstr {
    New {
        def: String,
        class: String,
    },
    Putfield {
        #[serde(rename = "ref")]
        target: Operand,
        field: String,
        value: Operand,
    },
    Getfield {
        #[serde(rename = "ref")]
        target: Operand,
        field: String,
        def: String,
    },
    Call {
        receiver: Operand,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        args: Vec<Operand>,
        def: String,
    },
    Return {
        value: Operand,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
enum Operand {
    Name(String),
    Int { int: i64 },
}

// ---------------------------------------------------------------------------
// loaded model

#[derive(Debug, Clone)]
pub struct ModelMethod {
    pub qualified: String,
    pub semantics: Option<Semantics>,
    /// Declared names for arg1.., possibly shorter than the arity.
    pub param_names: Vec<String>,
    pub num_args: u32,
    pub element: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ModelClass {
    pub qualified: String,
    pub allocatable: bool,
    /// method name -> qualified function name
    pub methods: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ModelSpec {
    /// qualified class name -> class
    pub classes: BTreeMap<String, ModelClass>,
    /// synthesized functions, every one valid IR
    pub functions: Vec<IRFunction>,
    /// qualified function name -> index into `functions`
    pub function_index: BTreeMap<String, usize>,
    /// qualified function name -> method metadata
    pub methods: BTreeMap<String, ModelMethod>,
    /// module path (slash form) -> import function qualified name
    pub imports: BTreeMap<String, String>,
    pub filters_last: bool,
    raw: RawModel,
}

impl ModelSpec {
    pub fn empty() -> ModelSpec {
        ModelSpec {
            classes: BTreeMap::new(),
            functions: Vec::new(),
            function_index: BTreeMap::new(),
            methods: BTreeMap::new(),
            imports: BTreeMap::new(),
            filters_last: false,
            raw: RawModel {
                packages: Vec::new(),
                output: None,
            },
        }
    }

    /// Merges another model into this one; later definitions win on clashes.
    pub fn merge(&mut self, other: ModelSpec) {
        let base = self.functions.len();
        self.functions.extend(other.functions);
        for (name, idx) in other.function_index {
            self.function_index.insert(name, idx + base);
        }
        self.classes.extend(other.classes);
        self.methods.extend(other.methods);
        self.imports.extend(other.imports);
        self.filters_last |= other.filters_last;
        self.raw.packages.extend(other.raw.packages);
    }

    /// The synthetic init function that builds a module's object graph.
    pub fn import_function(&self, module: &str) -> Result<&IRFunction, ModelError> {
        let path = module.replace('.', "/");
        let qualified = self.imports.get(&path).ok_or_else(|| ModelError::UnknownModule {
            name: module.to_string(),
        })?;
        Ok(&self.functions[self.function_index[qualified]])
    }

    pub fn function(&self, qualified: &str) -> Option<&IRFunction> {
        self.function_index.get(qualified).map(|i| &self.functions[*i])
    }

    /// Content-equal re-serialization of the loaded file (field order
    /// normalized by the JSON value model).
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(&self.raw).expect("raw model serializes")
    }
}

/// Compares two model documents for content equality: field order, explicit
/// nulls and empty lists do not count as differences.
pub fn model_content_equal(a: &serde_json::Value, b: &serde_json::Value) -> bool {
    normalize_json(a) == normalize_json(b)
}

fn normalize_json(v: &serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => Value::Object(
            map.iter()
                .filter(|(_, v)| {
                    !v.is_null() && !matches!(v, Value::Array(items) if items.is_empty())
                })
                .map(|(k, v)| (k.clone(), normalize_json(v)))
                .collect(),
        ),
        Value::Array(items) => Value::Array(items.iter().map(normalize_json).collect()),
        other => other.clone(),
    }
}

pub fn load_model(path: &Path) -> Result<ModelSpec, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_model_str(&text, &path.display().to_string())
}

pub fn load_model_str(text: &str, path: &str) -> Result<ModelSpec, ModelError> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| ModelError::Schema {
        path: path.to_string(),
        pointer: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    build_spec(raw, path)
}

fn build_spec(raw: RawModel, path: &str) -> Result<ModelSpec, ModelError> {
    let mut spec = ModelSpec::empty();
    spec.filters_last = match raw.output.as_deref() {
        None => false,
        Some("filters-last") => true,
        Some(other) => {
            return Err(ModelError::Schema {
                path: path.to_string(),
                pointer: "/output".to_string(),
                message: format!("unknown output convention {other:?}"),
            })
        }
    };

    // first pass: register classes so bodies can reference them
    for (pi, pkg) in raw.packages.iter().enumerate() {
        for (ci, class) in pkg.classes.iter().enumerate() {
            let qualified = qualify_class(&pkg.name, &class.name);
            if spec.classes.contains_key(&qualified) {
                return Err(ModelError::Schema {
                    path: path.to_string(),
                    pointer: format!("/packages/{pi}/classes/{ci}"),
                    message: format!("duplicate class {qualified:?}"),
                });
            }
            let mut methods = BTreeMap::new();
            for m in &class.methods {
                methods.insert(m.name.clone(), format!("{qualified}.{}", m.name));
            }
            spec.classes.insert(
                qualified.clone(),
                ModelClass {
                    qualified,
                    allocatable: class.allocatable.unwrap_or(false),
                    methods,
                },
            );
        }
    }

    // second pass: synthesize IR for every method
    for (pi, pkg) in raw.packages.iter().enumerate() {
        for (ci, class) in pkg.classes.iter().enumerate() {
            let class_qualified = qualify_class(&pkg.name, &class.name);
            for (mi, method) in class.methods.iter().enumerate() {
                let pointer = format!("/packages/{pi}/classes/{ci}/methods/{mi}");
                let qualified = format!("{class_qualified}.{}", method.name);
                let semantics = match &method.semantics {
                    None => None,
                    Some(tag) => Some(Semantics::parse(tag).ok_or_else(|| ModelError::UnknownSemanticsTag {
                        tag: tag.clone(),
                        pointer: pointer.clone(),
                    })?),
                };
                let func = synthesize_method(&spec, &class_qualified, method, &qualified, path, &pointer)?;
                let violations = crate::ir::validate(&func);
                if !violations.is_empty() {
                    return Err(ModelError::Schema {
                        path: path.to_string(),
                        pointer,
                        message: format!("generated IR is invalid: {}", violations[0].message),
                    });
                }
                let idx = spec.functions.len();
                spec.functions.push(func);
                spec.function_index.insert(qualified.clone(), idx);
                spec.methods.insert(
                    qualified.clone(),
                    ModelMethod {
                        qualified: qualified.clone(),
                        semantics,
                        param_names: method.params.clone().unwrap_or_default(),
                        num_args: method.num_args,
                        element: method.element.clone(),
                    },
                );
                if method.name == "import" {
                    spec.imports.insert(class_qualified.clone(), qualified);
                }
            }
        }
    }
    spec.raw = raw;
    Ok(spec)
}

fn qualify_class(package: &str, class: &str) -> String {
    if package.is_empty() {
        class.to_string()
    } else {
        format!("{package}/{class}")
    }
}

fn synthesize_method(
    spec: &ModelSpec,
    class_qualified: &str,
    method: &RawMethod,
    qualified: &str,
    path: &str,
    pointer: &str,
) -> Result<IRFunction, ModelError> {
    let span = SourceSpan::synthetic(&format!("model:{qualified}"));
    let mut b = FunctionBuilder::new(qualified, FunctionKind::Model, span.clone());

    // import methods are static (no receiver); everything else follows the
    // arg0-receiver convention
    let is_import = method.name == "import";
    let declared = method.param_names_or_default();
    if !is_import {
        for i in 0..method.num_args {
            let name = if i == 0 {
                None
            } else {
                declared.get((i - 1) as usize).cloned()
            };
            b.add_param(name, span.clone());
        }
    }

    let mut defs: BTreeMap<String, ValueId> = BTreeMap::new();
    let resolve = |defs: &BTreeMap<String, ValueId>,
                   b: &mut FunctionBuilder,
                   operand: &Operand|
     -> Result<ValueId, ModelError> {
        match operand {
            Operand::Int { int } => {
                let def = b.fresh(None, span.clone());
                b.emit(
                    InstrKind::Const {
                        def,
                        lit: Literal::Int(*int),
                    },
                    span.clone(),
                );
                Ok(def)
            }
            Operand::Name(name) => {
                if let Some(idx) = name.strip_prefix("arg") {
                    if let Ok(n) = idx.parse::<usize>() {
                        return b.params.get(n).copied().ok_or_else(|| ModelError::DanglingReference {
                            name: name.clone(),
                            pointer: pointer.to_string(),
                        });
                    }
                }
                defs.get(name).copied().ok_or_else(|| ModelError::DanglingReference {
                    name: name.clone(),
                    pointer: pointer.to_string(),
                })
            }
        }
    };

    let body = method.body.clone().unwrap_or_else(|| {
        // default: allocate and return a fresh result object
        vec![
            RawInstr::New {
                def: "result".to_string(),
                class: "object".to_string(),
            },
            RawInstr::Return {
                value: Operand::Name("result".to_string()),
            },
        ]
    });

    let mut returned = false;
    for instr in &body {
        match instr {
            RawInstr::New { def, class } => {
                let alloc = if class == "object" {
                    AllocKind::Object
                } else if is_import && class == class_qualified {
                    // the module object itself is a singleton per name
                    AllocKind::Module(class_qualified.to_string())
                } else if spec.classes.contains_key(class) {
                    AllocKind::ModelInstance(class.clone())
                } else {
                    return Err(ModelError::Schema {
                        path: path.to_string(),
                        pointer: pointer.to_string(),
                        message: format!("new of unknown class {class:?}"),
                    });
                };
                let site = b.fresh_site();
                let v = b.fresh(Some(def.clone()), span.clone());
                if defs.insert(def.clone(), v).is_some() {
                    return Err(ModelError::Schema {
                        path: path.to_string(),
                        pointer: pointer.to_string(),
                        message: format!("duplicate def {def:?}"),
                    });
                }
                b.emit(InstrKind::New { def: v, alloc, site }, span.clone());
            }
            RawInstr::Putfield { target, field, value } => {
                let obj = resolve(&defs, &mut b, target)?;
                let value = resolve(&defs, &mut b, value)?;
                b.emit(
                    InstrKind::PutField {
                        obj,
                        field: field.clone(),
                        value,
                    },
                    span.clone(),
                );
            }
            RawInstr::Getfield { target, field, def } => {
                let obj = resolve(&defs, &mut b, target)?;
                let v = b.fresh(Some(def.clone()), span.clone());
                if defs.insert(def.clone(), v).is_some() {
                    return Err(ModelError::Schema {
                        path: path.to_string(),
                        pointer: pointer.to_string(),
                        message: format!("duplicate def {def:?}"),
                    });
                }
                b.emit(
                    InstrKind::GetField {
                        def: v,
                        obj,
                        field: field.clone(),
                    },
                    span.clone(),
                );
            }
            RawInstr::Call { receiver, args, def } => {
                let callee = resolve(&defs, &mut b, receiver)?;
                let mut arg_vs = Vec::with_capacity(args.len());
                for a in args {
                    arg_vs.push(resolve(&defs, &mut b, a)?);
                }
                let site = b.fresh_site();
                let v = b.fresh(Some(def.clone()), span.clone());
                if defs.insert(def.clone(), v).is_some() {
                    return Err(ModelError::Schema {
                        path: path.to_string(),
                        pointer: pointer.to_string(),
                        message: format!("duplicate def {def:?}"),
                    });
                }
                b.emit(
                    InstrKind::Invoke {
                        def: v,
                        callee: Callee::Value(callee),
                        args: arg_vs,
                        kwargs: vec![],
                        site,
                    },
                    span.clone(),
                );
            }
            RawInstr::Return { value } => {
                let v = resolve(&defs, &mut b, value)?;
                b.terminate_current(Terminator::Return {
                    value: v,
                    span: span.clone(),
                });
                returned = true;
                break;
            }
        }
    }
    if !returned {
        let def = b.fresh(None, span.clone());
        b.emit(
            InstrKind::Const {
                def,
                lit: Literal::None,
            },
            span.clone(),
        );
        b.terminate_current(Terminator::Return { value: def, span });
    }
    Ok(b.finish())
}

impl RawMethod {
    fn param_names_or_default(&self) -> Vec<String> {
        self.params.clone().unwrap_or_default()
    }
}

/// The bundled model of the TensorFlow API surface used by the corpus.
pub fn bundled_tensorflow_model() -> ModelSpec {
    static MODEL_JSON: &str = include_str!("../models/tensorflow.json");
    load_model_str(MODEL_JSON, "<bundled tensorflow model>").expect("bundled model is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC_EXAMPLE: &str = r#"{"packages":[{"name":"tensorflow/estimator","classes":[{"name":"Estimator","allocatable":true,"methods":[{"name":"do","numArgs":2,"semantics":null,"body":[{"op":"new","def":"x","class":"tensorflow/estimator/train/train"},{"op":"putfield","ref":"arg0","field":"train","value":"x"},{"op":"putfield","ref":"x","field":"$callback","value":"arg1"},{"op":"return","value":"arg0"}]}]},{"name":"train","allocatable":true,"methods":[]}]},{"name":"tensorflow/estimator/train","classes":[{"name":"train","allocatable":true,"methods":[]}]}]}"#;

    #[test]
    fn loads_the_documented_estimator_shape() {
        let spec = load_model_str(SPEC_EXAMPLE, "test.json").unwrap();
        let f = spec.function("tensorflow/estimator/Estimator.do").unwrap();
        assert_eq!(f.params.len(), 2);
        let text = crate::ir::pretty_print(f);
        assert!(text.contains(".$callback"), "{text}");
        assert!(text.contains("return v0"), "{text}");
    }

    #[test]
    fn dangling_reference_is_reported() {
        let bad = r#"{"packages":[{"name":"p","classes":[{"name":"C","allocatable":true,"methods":[{"name":"do","numArgs":1,"body":[{"op":"putfield","ref":"arg0","field":"f","value":"y"},{"op":"return","value":"arg0"}]}]}]}]}"#;
        let err = load_model_str(bad, "test.json").unwrap_err();
        assert!(matches!(err, ModelError::DanglingReference { ref name, .. } if name == "y"), "{err}");
    }

    #[test]
    fn empty_packages_is_a_valid_model() {
        let spec = load_model_str(r#"{"packages":[]}"#, "test.json").unwrap();
        assert!(spec.classes.is_empty());
        assert!(spec.functions.is_empty());
    }

    #[test]
    fn unknown_semantics_tag_is_rejected() {
        let bad = r#"{"packages":[{"name":"p","classes":[{"name":"C","allocatable":true,"methods":[{"name":"do","numArgs":1,"semantics":"transmogrify"}]}]}]}"#;
        let err = load_model_str(bad, "test.json").unwrap_err();
        assert!(matches!(err, ModelError::UnknownSemanticsTag { ref tag, .. } if tag == "transmogrify"));
    }

    #[test]
    fn out_of_range_arg_is_dangling() {
        let bad = r#"{"packages":[{"name":"p","classes":[{"name":"C","allocatable":true,"methods":[{"name":"do","numArgs":1,"body":[{"op":"return","value":"arg3"}]}]}]}]}"#;
        let err = load_model_str(bad, "test.json").unwrap_err();
        assert!(matches!(err, ModelError::DanglingReference { ref name, .. } if name == "arg3"));
    }

    #[test]
    fn reserialization_is_content_equal() {
        let spec = load_model_str(SPEC_EXAMPLE, "test.json").unwrap();
        let original: serde_json::Value = serde_json::from_str(SPEC_EXAMPLE).unwrap();
        assert!(model_content_equal(&spec.to_json_value(), &original));
    }

    #[test]
    fn import_builds_the_module_object_graph() {
        let spec = bundled_tensorflow_model();
        let f = spec.import_function("tensorflow").unwrap();
        let text = crate::ir::pretty_print(f);
        for field in ["estimator", "reshape", "layers", "nn", "train", "placeholder"] {
            assert!(text.contains(&format!(".{field} <-")), "missing {field} in import body");
        }
        assert!(matches!(
            spec.import_function("scipy"),
            Err(ModelError::UnknownModule { .. })
        ));
    }

    #[test]
    fn bundled_model_loads_and_validates() {
        let spec = bundled_tensorflow_model();
        assert!(spec.imports.contains_key("tensorflow"), "tensorflow import missing");
        for f in &spec.functions {
            let violations = crate::ir::validate(f);
            assert!(violations.is_empty(), "{}: {:?}", f.name, violations);
        }
        // the shipped surface covers the APIs the corpus exercises
        for tagged in [
            ("tensorflow/reshape.do", Semantics::Reshape),
            ("tensorflow/layers/conv2d.do", Semantics::Conv2d),
            ("tensorflow/layers/conv3d.do", Semantics::Conv3d),
            ("tensorflow/placeholder.do", Semantics::Placeholder),
            ("tensorflow/layers/max_pooling2d.do", Semantics::MaxPooling2d),
            ("tensorflow/contrib/layers/flatten.do", Semantics::Flatten),
            ("tensorflow/layers/dense.do", Semantics::Dense),
            ("tensorflow/layers/dropout.do", Semantics::Dropout),
        ] {
            let m = spec.methods.get(tagged.0).unwrap_or_else(|| panic!("{} missing", tagged.0));
            assert_eq!(m.semantics, Some(tagged.1));
        }
        assert!(spec
            .function("tensorflow/estimator/train/train.do")
            .is_some());
        assert!(spec.imports.contains_key("tensorflow/examples/tutorials/mnist"));
    }
}
