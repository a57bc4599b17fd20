//! Call-graph construction with subset-constraint pointer analysis over the
//! IR plus loaded library models.
//!
//! The solver is allocation-site-sensitive and context- and flow-insensitive:
//! every SSA value, function return and (object, field) pair is a node; `New`
//! seeds objects, assignments and phis add copy edges, field accesses and
//! calls add edges as the points-to sets of their base values grow. The
//! result is the dataflow graph (variables, points-to sets, flow edges) and
//! the call graph consumed by the tensor analysis.

mod solve;

pub use solve::{build, synthesize_class_model};

use crate::frontend::ClassInfo;
use crate::ir::{FuncId, IRFunction, SiteId, ValueId};
use crate::model::Semantics;
use crate::span::SourceSpan;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Module name used for a user script's own globals object.
pub const SCRIPT_MODULE: &str = "<script>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

/// What an allocation site produces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AllocToken {
    Object,
    Dict,
    List,
    /// Instance of a user class (index into `Program::classes`).
    Instance(usize),
    /// Instance of a model class (qualified name).
    ModelInstance(String),
}

/// An abstract heap object or first-class value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractObject {
    /// Allocation-site object; identity is (function, site).
    AllocSite {
        func: FuncId,
        site: SiteId,
        token: AllocToken,
    },
    /// First-class function value.
    FunctionObj(FuncId),
    /// A user class object (index into `Program::classes`).
    ClassObj(usize),
    /// Module object; singleton per name.
    ModuleObj(String),
    /// A method closed over a receiver; calls forward to the method with the
    /// receiver in the self slot.
    BoundMethod { method: FuncId, receiver: NodeId },
    /// A list literal of integer constants / None, tracked with its contents.
    ShapeList {
        func: FuncId,
        site: SiteId,
        elems: Vec<Option<i64>>,
    },
}

/// A node in the dataflow graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Var(FuncId, ValueId),
    Field(ObjId, String),
    Ret(FuncId),
}

/// Edge payload: how values flow across the edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeKind {
    Plain,
    /// Return value flowing back to a call result. Carries the callee and
    /// the integer constants bound to its named parameters at this site, so
    /// the tensor analysis can instantiate symbolic result dimensions.
    CallResult {
        target: FuncId,
        int_args: BTreeMap<String, i64>,
    },
}

/// All functions under analysis: user code, models, synthetic constructors.
#[derive(Debug)]
pub struct Program {
    pub functions: Vec<IRFunction>,
    pub by_name: BTreeMap<String, FuncId>,
    pub classes: Vec<ClassInfo>,
    /// class index -> synthesized constructor
    pub ctors: BTreeMap<usize, FuncId>,
    /// function qualified name -> model method semantics
    pub semantics: BTreeMap<FuncId, Semantics>,
    /// model method parameter names (arg1..) by function
    pub model_params: BTreeMap<FuncId, Vec<String>>,
    /// model placeholder element labels by function
    pub model_elements: BTreeMap<FuncId, String>,
}

impl Program {
    pub fn func(&self, id: FuncId) -> &IRFunction {
        &self.functions[id.0 as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<FuncId> {
        self.by_name.get(name).copied()
    }
}

/// One call site as seen by later analyses.
#[derive(Debug, Clone)]
pub struct CallSite {
    pub func: FuncId,
    pub site: SiteId,
    pub span: SourceSpan,
    pub args: Vec<ValueId>,
    pub kwargs: Vec<(String, ValueId)>,
    pub result: ValueId,
    /// whether the site is in user-written code (diagnostics only there)
    pub in_user_code: bool,
}

#[derive(Debug, Default)]
pub struct CallGraph {
    /// call site -> resolved targets
    pub edges: BTreeMap<(FuncId, SiteId), BTreeSet<FuncId>>,
    /// sites that resolved to nothing
    pub unresolved: Vec<(FuncId, SiteId)>,
}

impl CallGraph {
    pub fn targets(&self, func: FuncId, site: SiteId) -> BTreeSet<FuncId> {
        self.edges.get(&(func, site)).cloned().unwrap_or_default()
    }

    /// All sites in `from` that call `to`.
    pub fn calls_between(&self, from: FuncId, to: FuncId) -> Vec<SiteId> {
        self.edges
            .iter()
            .filter(|((f, _), targets)| *f == from && targets.contains(&to))
            .map(|((_, s), _)| *s)
            .collect()
    }
}

/// The dataflow graph: nodes, points-to sets, and flow edges.
#[derive(Debug)]
pub struct DataflowGraph {
    pub(crate) nodes: Vec<Node>,
    pub(crate) node_index: BTreeMap<Node, NodeId>,
    pub(crate) objects: Vec<AbstractObject>,
    pub(crate) object_index: BTreeMap<AbstractObject, ObjId>,
    pub(crate) pts: Vec<BTreeSet<ObjId>>,
    /// propagation edges src -> [(dst, kind)]; dst ≺ src in flow terms
    pub(crate) succs: Vec<Vec<(NodeId, EdgeKind)>>,
    /// locally known integer constants per (function, value)
    pub(crate) int_consts: BTreeMap<(FuncId, ValueId), i64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("unknown variable {1} in function {0:?}")]
    UnknownVariable(String, ValueId),
}

impl DataflowGraph {
    pub fn node_id(&self, node: &Node) -> Option<NodeId> {
        self.node_index.get(node).copied()
    }

    pub fn object(&self, id: ObjId) -> &AbstractObject {
        &self.objects[id.0 as usize]
    }

    pub fn object_id(&self, o: &AbstractObject) -> Option<ObjId> {
        self.object_index.get(o).copied()
    }

    /// All (field name, node) pairs recorded for an object.
    pub fn fields_of(&self, obj: ObjId) -> Vec<(String, NodeId)> {
        self.node_index
            .range(Node::Field(obj, String::new())..)
            .take_while(|(n, _)| matches!(n, Node::Field(o, _) if *o == obj))
            .map(|(n, id)| match n {
                Node::Field(_, f) => (f.clone(), *id),
                _ => unreachable!("range filtered to field nodes"),
            })
            .collect()
    }

    pub fn points_to_node(&self, id: NodeId) -> &BTreeSet<ObjId> {
        &self.pts[id.0 as usize]
    }

    /// Points-to set of an SSA value, read-only.
    pub fn points_to(&self, program: &Program, func: FuncId, v: ValueId) -> Result<BTreeSet<AbstractObject>, AnalysisError> {
        let node = Node::Var(func, v);
        match self.node_index.get(&node) {
            Some(id) => Ok(self.pts[id.0 as usize]
                .iter()
                .map(|o| self.objects[o.0 as usize].clone())
                .collect()),
            None => Err(AnalysisError::UnknownVariable(program.func(func).name.clone(), v)),
        }
    }

    /// Known integer constant of a value, when locally derivable.
    pub fn int_const(&self, func: FuncId, v: ValueId) -> Option<i64> {
        self.int_consts.get(&(func, v)).copied()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn edges_from(&self, id: NodeId) -> &[(NodeId, EdgeKind)] {
        &self.succs[id.0 as usize]
    }

    /// Snapshot of all points-to sets, for fixpoint/idempotence checks.
    pub fn pts_snapshot(&self) -> Vec<(Node, BTreeSet<AbstractObject>)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.clone(),
                    self.pts[i].iter().map(|o| self.objects[o.0 as usize].clone()).collect(),
                )
            })
            .collect()
    }
}

/// Warnings produced during constraint solving (arity mismatches, unknown
/// modules); kept separate from user-facing diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnalysisWarning {
    pub message: String,
    pub span: SourceSpan,
    pub in_user_code: bool,
}

/// Everything the pointer analysis produces.
#[derive(Debug)]
pub struct Analysis {
    pub program: Program,
    pub graph: DataflowGraph,
    pub callgraph: CallGraph,
    pub sites: Vec<CallSite>,
    pub warnings: Vec<AnalysisWarning>,
}

impl Analysis {
    /// Call graph and points-to sets as a JSON document.
    pub fn dump_json(&self) -> serde_json::Value {
        use serde_json::json;
        let nodes: Vec<String> = self.program.functions.iter().map(|f| f.name.clone()).collect();
        let edges: Vec<serde_json::Value> = self
            .callgraph
            .edges
            .iter()
            .map(|((f, s), targets)| {
                json!({
                    "function": self.program.func(*f).name,
                    "site": s.0,
                    "targets": targets.iter().map(|t| self.program.func(*t).name.clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let points_to: Vec<serde_json::Value> = self
            .graph
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.graph.pts[*i].is_empty())
            .map(|(i, n)| {
                json!({
                    "node": self.describe_node(n),
                    "objects": self.graph.pts[i]
                        .iter()
                        .map(|o| self.describe_object(&self.graph.objects[o.0 as usize]))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({"nodes": nodes, "edges": edges, "points_to": points_to})
    }

    pub fn describe_node(&self, n: &Node) -> String {
        match n {
            Node::Var(f, v) => format!("{}::{v}", self.program.func(*f).name),
            Node::Field(o, field) => {
                format!("{}.{field}", self.describe_object(&self.graph.objects[o.0 as usize]))
            }
            Node::Ret(f) => format!("{}::<ret>", self.program.func(*f).name),
        }
    }

    pub fn describe_object(&self, o: &AbstractObject) -> String {
        match o {
            AbstractObject::AllocSite { func, site, token } => {
                let t = match token {
                    AllocToken::Object => "object".to_string(),
                    AllocToken::Dict => "dict".to_string(),
                    AllocToken::List => "list".to_string(),
                    AllocToken::Instance(c) => format!("instance {}", self.program.classes[*c].name),
                    AllocToken::ModelInstance(q) => format!("model {q}"),
                };
                format!("{t}@{}:{}", self.program.func(*func).name, site.0)
            }
            AbstractObject::FunctionObj(f) => format!("function {}", self.program.func(*f).name),
            AbstractObject::ClassObj(c) => format!("class {}", self.program.classes[*c].name),
            AbstractObject::ModuleObj(m) => format!("module {m}"),
            AbstractObject::BoundMethod { method, .. } => {
                format!("bound {}", self.program.func(*method).name)
            }
            AbstractObject::ShapeList { elems, .. } => {
                let parts: Vec<String> = elems
                    .iter()
                    .map(|e| e.map(|n| n.to_string()).unwrap_or_else(|| "None".to_string()))
                    .collect();
                format!("shape [{}]", parts.join(", "))
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(func, v) => write!(f, "f{}::{v}", func.0),
            Node::Field(o, field) => write!(f, "obj{}.{field}", o.0),
            Node::Ret(func) => write!(f, "f{}::<ret>", func.0),
        }
    }
}
