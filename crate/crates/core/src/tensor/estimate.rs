//! The tensor-estimate fixpoint and the diagnostic pass over its results.

use super::{InputDeclaration, Selector};
use crate::analysis::{Analysis, CallSite, Node, NodeId, AbstractObject};
use crate::diag::{sort_diagnostics, Code, Diagnostic, Severity};
use crate::ir::{FuncId, FunctionKind, InstrKind, ValueId};
use crate::model::Semantics;
use crate::types::{
    conv2d_check, conv3d_check, dense_apply, flatten_apply, placeholder_type, pool2d_apply,
    reshape_apply, ApiError, DenseUnits, PyType, ReshapeError, TypeConfig,
};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorklistOrder {
    Fifo,
    Shuffled(u64),
}

#[derive(Debug, Clone)]
pub struct PropagateOptions {
    /// Cardinality cap per node; exceeding it widens the estimate to top.
    pub cap: usize,
    pub config: TypeConfig,
    pub order: WorklistOrder,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            cap: 16,
            config: TypeConfig::default(),
            order: WorklistOrder::Fifo,
        }
    }
}

/// The computed estimate: a set of types per dataflow node.
#[derive(Debug)]
pub struct TensorEstimate {
    types: Vec<BTreeSet<PyType>>,
    widened: Vec<bool>,
    selector_warnings: Vec<Diagnostic>,
    pub cap: usize,
}

impl TensorEstimate {
    pub fn at_node(&self, n: NodeId) -> &BTreeSet<PyType> {
        &self.types[n.0 as usize]
    }

    /// Estimate of an SSA value; empty when the value has no node.
    pub fn at(&self, a: &Analysis, func: FuncId, value: ValueId) -> BTreeSet<PyType> {
        match a.graph.node_id(&Node::Var(func, value)) {
            Some(n) => self.types[n.0 as usize].clone(),
            None => BTreeSet::new(),
        }
    }

    pub fn was_widened(&self, n: NodeId) -> bool {
        self.widened[n.0 as usize]
    }

    /// Non-empty estimates, for fixpoint comparisons.
    pub fn snapshot(&self) -> BTreeMap<NodeId, BTreeSet<PyType>> {
        self.types
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(i, s)| (NodeId(i as u32), s.clone()))
            .collect()
    }
}

// ---------------------------------------------------------------------------

/// One tagged call site with everything its transfer needs, resolved against
/// the frozen pointer-analysis results.
#[derive(Debug, Clone)]
struct TaggedSite {
    site_idx: usize,
    tag: Semantics,
    /// node of the tensor argument (None for placeholder)
    input: Option<NodeId>,
    /// shape lists reaching the shape argument
    shapes: Vec<Vec<Option<i64>>>,
    filters: Option<u64>,
    pool: Option<u64>,
    stride: Option<u64>,
    units: DenseUnits,
    element: PyType,
    result: NodeId,
    arg_nodes: Vec<NodeId>,
    in_user_code: bool,
}

/// Outcome of evaluating one tagged site against the current estimates.
#[derive(Debug, Default)]
struct SiteEval {
    results: BTreeSet<PyType>,
    /// passes with concrete (non-top) evidence
    pass_concrete: usize,
    /// vacuous passes through unknown types
    pass_vacuous: usize,
    failures: BTreeSet<(Code, String)>,
    /// whether this tag performs any verification at all
    checked: bool,
}

fn evaluate(ts: &TaggedSite, inputs: &BTreeSet<PyType>, cfg: &TypeConfig) -> SiteEval {
    let mut eval = SiteEval::default();
    match ts.tag {
        Semantics::Opaque => {
            if !inputs.is_empty() {
                eval.results.insert(PyType::Top);
            }
        }
        Semantics::Identity | Semantics::Dropout => {
            for t in inputs {
                eval.results.insert(t.clone());
            }
        }
        Semantics::Placeholder => {
            eval.checked = true;
            for shape in &ts.shapes {
                match placeholder_type(shape, ts.element.clone()) {
                    Ok(t) => {
                        eval.pass_concrete += 1;
                        eval.results.insert(PyType::Tensor(t));
                    }
                    Err(e) => {
                        eval.failures.insert(api_error_code(&e));
                        eval.results.insert(PyType::Top);
                    }
                }
            }
        }
        Semantics::Reshape => {
            eval.checked = true;
            for t in inputs {
                match t {
                    PyType::Top => {
                        if !ts.shapes.is_empty() {
                            eval.pass_vacuous += 1;
                        }
                        eval.results.insert(PyType::Top);
                    }
                    PyType::Tensor(tt) => {
                        for shape in &ts.shapes {
                            match reshape_apply(tt, shape) {
                                Ok(out) => {
                                    eval.pass_concrete += 1;
                                    eval.results.insert(PyType::Tensor(out));
                                }
                                Err(e) => {
                                    eval.failures.insert(reshape_error_code(&e));
                                    eval.results.insert(PyType::Top);
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        Semantics::Conv2d | Semantics::Conv3d => {
            eval.checked = true;
            for t in inputs {
                match t {
                    PyType::Top => {
                        eval.pass_vacuous += 1;
                        eval.results.insert(PyType::Top);
                    }
                    PyType::Tensor(tt) => {
                        let out = if ts.tag == Semantics::Conv2d {
                            conv2d_check(tt, ts.filters, cfg)
                        } else {
                            conv3d_check(tt, ts.filters, cfg)
                        };
                        match out {
                            Ok(o) => {
                                eval.pass_concrete += 1;
                                eval.results.insert(PyType::Tensor(o));
                            }
                            Err(e) => {
                                eval.failures.insert(api_error_code(&e));
                                eval.results.insert(PyType::Top);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        Semantics::MaxPooling2d => {
            eval.checked = true;
            for t in inputs {
                match t {
                    PyType::Top => {
                        eval.pass_vacuous += 1;
                        eval.results.insert(PyType::Top);
                    }
                    PyType::Tensor(tt) => match pool2d_apply(tt, ts.pool, ts.stride, cfg) {
                        Ok((o, _floored)) => {
                            eval.pass_concrete += 1;
                            eval.results.insert(PyType::Tensor(o));
                        }
                        Err(e) => {
                            eval.failures.insert(api_error_code(&e));
                            eval.results.insert(PyType::Top);
                        }
                    },
                    _ => {}
                }
            }
        }
        Semantics::Flatten => {
            eval.checked = true;
            for t in inputs {
                match t {
                    PyType::Top => {
                        eval.pass_vacuous += 1;
                        eval.results.insert(PyType::Top);
                    }
                    PyType::Tensor(tt) => match flatten_apply(tt) {
                        Ok(o) => {
                            eval.pass_concrete += 1;
                            eval.results.insert(PyType::Tensor(o));
                        }
                        Err(e) => {
                            eval.failures.insert(api_error_code(&e));
                            eval.results.insert(PyType::Top);
                        }
                    },
                    _ => {}
                }
            }
        }
        Semantics::Dense => {
            eval.checked = true;
            for t in inputs {
                match t {
                    PyType::Top => {
                        eval.pass_vacuous += 1;
                        eval.results.insert(PyType::Top);
                    }
                    PyType::Tensor(tt) => match dense_apply(tt, &ts.units) {
                        Ok(o) => {
                            eval.pass_concrete += 1;
                            eval.results.insert(PyType::Tensor(o));
                        }
                        Err(e) => {
                            eval.failures.insert(api_error_code(&e));
                            eval.results.insert(PyType::Top);
                        }
                    },
                    _ => {}
                }
            }
        }
    }
    eval
}

fn reshape_error_code(e: &ReshapeError) -> (Code, String) {
    let code = match e {
        ReshapeError::SizeMismatch { .. } => Code::Ari001ReshapeSizeMismatch,
        ReshapeError::InvalidFactorization { .. } => Code::Ari002ReshapeInvalidFactorization,
        ReshapeError::MultipleWildcards | ReshapeError::WildcardUnresolvable => Code::Ari006ReshapeWildcardError,
    };
    (code, e.to_string())
}

fn api_error_code(e: &ApiError) -> (Code, String) {
    let code = match e {
        ApiError::Rank { .. } | ApiError::PlaceholderRankZero => Code::Ari003ConvRankError,
        ApiError::Label { .. } => Code::Ari004ConvLabelMismatch,
        ApiError::ElementNotNumeric { .. } => Code::Ari005ElementNotNumeric,
    };
    (code, e.to_string())
}

// ---------------------------------------------------------------------------
// the fixpoint engine

struct Engine<'a> {
    a: &'a Analysis,
    opts: &'a PropagateOptions,
    types: Vec<BTreeSet<PyType>>,
    widened: Vec<bool>,
    worklist: VecDeque<NodeId>,
    queued: Vec<bool>,
    rng: u64,
    /// field loads keyed by base-object node (for record projection)
    loads_from: BTreeMap<NodeId, Vec<(String, NodeId)>>,
    /// dict-literal registry and reverse map from field nodes
    dicts: Vec<(NodeId, Vec<(String, NodeId)>)>,
    dict_by_field: BTreeMap<NodeId, Vec<usize>>,
    tagged: Vec<TaggedSite>,
    sites_by_input: BTreeMap<NodeId, Vec<usize>>,
    selector_warnings: Vec<Diagnostic>,
}

impl<'a> Engine<'a> {
    fn new(a: &'a Analysis, opts: &'a PropagateOptions) -> Engine<'a> {
        let n = a.graph.num_nodes();
        Engine {
            a,
            opts,
            types: vec![BTreeSet::new(); n],
            widened: vec![false; n],
            worklist: VecDeque::new(),
            queued: vec![false; n],
            rng: match opts.order {
                WorklistOrder::Fifo => 0,
                WorklistOrder::Shuffled(seed) => seed | 1,
            },
            loads_from: BTreeMap::new(),
            dicts: Vec::new(),
            dict_by_field: BTreeMap::new(),
            tagged: Vec::new(),
            sites_by_input: BTreeMap::new(),
            selector_warnings: Vec::new(),
        }
    }

    fn build_deps(&mut self) {
        let a = self.a;
        // record-projection sources: every GetField in the program
        for (fi, f) in a.program.functions.iter().enumerate() {
            let fid = FuncId(fi as u32);
            for block in &f.blocks {
                for instr in &block.instrs {
                    if let InstrKind::GetField { def, obj, field } = &instr.kind {
                        if let (Some(on), Some(dn)) = (
                            a.graph.node_id(&Node::Var(fid, *obj)),
                            a.graph.node_id(&Node::Var(fid, *def)),
                        ) {
                            self.loads_from.entry(on).or_default().push((field.clone(), dn));
                        }
                    }
                }
            }
        }
        // dict literals and their field nodes
        for (fi, f) in a.program.functions.iter().enumerate() {
            let fid = FuncId(fi as u32);
            for block in &f.blocks {
                for instr in &block.instrs {
                    if let InstrKind::New {
                        def,
                        alloc: crate::ir::AllocKind::Dict,
                        site,
                    } = &instr.kind
                    {
                        let Some(var) = a.graph.node_id(&Node::Var(fid, *def)) else {
                            continue;
                        };
                        let obj = AbstractObject::AllocSite {
                            func: fid,
                            site: *site,
                            token: crate::analysis::AllocToken::Dict,
                        };
                        let Some(oid) = a.graph.object_id(&obj) else { continue };
                        let fields = a.graph.fields_of(oid);
                        let idx = self.dicts.len();
                        for (_, fnode) in &fields {
                            self.dict_by_field.entry(*fnode).or_default().push(idx);
                        }
                        self.dicts.push((var, fields));
                    }
                }
            }
        }
        // tagged call sites
        for (site_idx, site) in a.sites.iter().enumerate() {
            for target in a.callgraph.targets(site.func, site.site) {
                let Some(tag) = a.program.semantics.get(&target).copied() else {
                    continue;
                };
                let ts = self.resolve_tagged(site_idx, site, target, tag);
                let idx = self.tagged.len();
                if let Some(input) = ts.input {
                    self.sites_by_input.entry(input).or_default().push(idx);
                }
                if matches!(tag, Semantics::Opaque) {
                    for an in &ts.arg_nodes {
                        self.sites_by_input.entry(*an).or_default().push(idx);
                    }
                }
                self.tagged.push(ts);
            }
        }
    }

    fn resolve_tagged(&self, site_idx: usize, site: &CallSite, target: FuncId, tag: Semantics) -> TaggedSite {
        let a = self.a;
        let params = a.program.model_params.get(&target).cloned().unwrap_or_default();
        let arg_for = |name: &str| -> Option<ValueId> {
            if let Some((_, v)) = site.kwargs.iter().find(|(k, _)| k == name) {
                return Some(*v);
            }
            let pos = params.iter().position(|p| p == name)?;
            site.args.get(pos).copied()
        };
        let node_of = |v: ValueId| a.graph.node_id(&Node::Var(site.func, v));

        // tensor input: first declared parameter, except placeholder
        let input = if tag == Semantics::Placeholder {
            None
        } else {
            params.first().and_then(|p| arg_for(p)).and_then(node_of)
        };

        // shape argument
        let mut shapes = Vec::new();
        if matches!(tag, Semantics::Reshape | Semantics::Placeholder) {
            let shape_val = arg_for("shape").or_else(|| {
                // fall back to any argument holding a shape list
                site.args
                    .iter()
                    .chain(site.kwargs.iter().map(|(_, v)| v))
                    .copied()
                    .find(|v| {
                        node_of(*v).is_some_and(|n| {
                            a.graph
                                .points_to_node(n)
                                .iter()
                                .any(|o| matches!(a.graph.object(*o), AbstractObject::ShapeList { .. }))
                        })
                    })
            });
            if let Some(n) = shape_val.and_then(node_of) {
                for o in a.graph.points_to_node(n) {
                    if let AbstractObject::ShapeList { elems, .. } = a.graph.object(*o) {
                        shapes.push(elems.clone());
                    }
                }
            }
            shapes.sort();
        }

        let int_of = |v: Option<ValueId>| v.and_then(|v| a.graph.int_const(site.func, v)).filter(|n| *n >= 0).map(|n| n as u64);
        let filters = int_of(arg_for("filters"));
        let pool = int_of(arg_for("pool_size"));
        let stride = int_of(arg_for("strides"));
        let units = match arg_for("units") {
            Some(v) => match a.graph.int_const(site.func, v).filter(|n| *n >= 0) {
                Some(n) => DenseUnits::Known(n as u64),
                None => match a.program.func(site.func).value_name(v) {
                    Some(name) => DenseUnits::Named(name.to_string()),
                    None => DenseUnits::Unknown,
                },
            },
            None => DenseUnits::Unknown,
        };
        let element = PyType::Label(
            a.program
                .model_elements
                .get(&target)
                .cloned()
                .unwrap_or_else(|| "num".to_string()),
        );
        let arg_nodes = site
            .args
            .iter()
            .chain(site.kwargs.iter().map(|(_, v)| v))
            .filter_map(|v| node_of(*v))
            .collect();
        TaggedSite {
            site_idx,
            tag,
            input,
            shapes,
            filters,
            pool,
            stride,
            units,
            element,
            result: node_of(site.result).expect("call results always have nodes"),
            arg_nodes,
            in_user_code: site.in_user_code,
        }
    }

    fn enqueue(&mut self, n: NodeId) {
        if !self.queued[n.0 as usize] {
            self.queued[n.0 as usize] = true;
            self.worklist.push_back(n);
        }
    }

    fn next(&mut self) -> Option<NodeId> {
        if self.worklist.is_empty() {
            return None;
        }
        let idx = match self.opts.order {
            WorklistOrder::Fifo => 0,
            WorklistOrder::Shuffled(_) => {
                self.rng = self
                    .rng
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((self.rng >> 33) as usize) % self.worklist.len()
            }
        };
        let n = self.worklist.remove(idx).expect("index within worklist");
        self.queued[n.0 as usize] = false;
        Some(n)
    }

    fn add_type(&mut self, n: NodeId, ty: PyType) {
        let i = n.0 as usize;
        if self.widened[i] {
            return;
        }
        if self.types[i].insert(ty) {
            if self.types[i].len() > self.opts.cap {
                self.types[i] = BTreeSet::from([PyType::Top]);
                self.widened[i] = true;
            }
            self.enqueue(n);
        }
    }

    fn seed(&mut self, decls: &[InputDeclaration]) {
        let a = self.a;
        for decl in decls {
            match &decl.selector {
                Selector::CallResult { callee } => {
                    let slashed = callee.replace('.', "/");
                    let target = a
                        .program
                        .lookup(&format!("{slashed}.do"))
                        .or_else(|| a.program.lookup(&slashed))
                        .or_else(|| a.program.lookup(callee));
                    let mut attached = false;
                    if let Some(target) = target {
                        for site in &a.sites {
                            if a.callgraph.targets(site.func, site.site).contains(&target) {
                                if let Some(n) = a.graph.node_id(&Node::Var(site.func, site.result)) {
                                    self.add_type(n, decl.declared_type.clone());
                                    attached = true;
                                }
                            }
                        }
                    }
                    if !attached {
                        self.selector_warning(format!(
                            "declaration for call result of {callee:?} matched no call site"
                        ));
                    }
                }
                Selector::Parameter { function, parameter } => {
                    let mut attached = false;
                    if let Some(fid) = a.program.lookup(function) {
                        let f = a.program.func(fid);
                        for (i, p) in f.params.iter().enumerate() {
                            if f.param_name(i) == Some(parameter.as_str()) {
                                if let Some(n) = a.graph.node_id(&Node::Var(fid, *p)) {
                                    self.add_type(n, decl.declared_type.clone());
                                    attached = true;
                                }
                            }
                        }
                    }
                    if !attached {
                        self.selector_warning(format!(
                            "declaration for parameter {parameter:?} of {function:?} matched no program point"
                        ));
                    }
                }
            }
        }
        // evaluate every tagged site once so input-free transfers fire
        for idx in 0..self.tagged.len() {
            self.eval_site(idx);
        }
    }

    fn selector_warning(&mut self, message: String) {
        let span = self
            .a
            .program
            .functions
            .iter()
            .find(|f| f.kind == FunctionKind::ModuleInit)
            .map(|f| f.span.clone())
            .unwrap_or_else(|| crate::span::SourceSpan::synthetic("declarations"));
        self.selector_warnings.push(Diagnostic::new(
            Code::Ari009UnresolvedDeclarationSelector,
            Severity::Warning,
            message,
            span,
        ));
    }

    fn eval_site(&mut self, idx: usize) {
        let ts = self.tagged[idx].clone();
        let inputs = match ts.tag {
            Semantics::Opaque => {
                // any argument with a known type makes the result top
                let mut set = BTreeSet::new();
                for an in &ts.arg_nodes {
                    set.extend(self.types[an.0 as usize].iter().cloned());
                }
                set
            }
            _ => ts
                .input
                .map(|n| self.types[n.0 as usize].clone())
                .unwrap_or_default(),
        };
        let eval = evaluate(&ts, &inputs, &self.opts.config);
        for ty in eval.results {
            self.add_type(ts.result, ty);
        }
    }

    fn solve(&mut self) {
        while let Some(n) = self.next() {
            let tys: Vec<PyType> = self.types[n.0 as usize].iter().cloned().collect();

            // flow along edges, instantiating symbolic dims at call results
            let edges: Vec<(NodeId, crate::analysis::EdgeKind)> = self.a.graph.edges_from(n).to_vec();
            for (dst, kind) in edges {
                match &kind {
                    crate::analysis::EdgeKind::Plain => {
                        for t in &tys {
                            self.add_type(dst, t.clone());
                        }
                    }
                    crate::analysis::EdgeKind::CallResult { int_args, .. } => {
                        for t in &tys {
                            self.add_type(dst, substitute(t, int_args));
                        }
                    }
                }
            }
            // record projection through field reads
            if let Some(loads) = self.loads_from.get(&n).cloned() {
                for (field, dst) in loads {
                    for t in &tys {
                        if let PyType::Record(fields) = t {
                            if let Some(ft) = fields.get(&field) {
                                self.add_type(dst, ft.clone());
                            }
                        }
                    }
                }
            }
            // dict literals assemble record types from their fields
            if let Some(dict_idxs) = self.dict_by_field.get(&n).cloned() {
                for di in dict_idxs {
                    self.recompute_dict(di);
                }
            }
            // re-run transfers whose inputs grew
            if let Some(site_idxs) = self.sites_by_input.get(&n).cloned() {
                for si in site_idxs {
                    self.eval_site(si);
                }
            }
        }
    }

    /// Builds record types for a dict literal from the current estimates of
    /// its field nodes (cartesian over fields; unknown fields omitted).
    fn recompute_dict(&mut self, idx: usize) {
        let (var, fields) = self.dicts[idx].clone();
        let mut records: Vec<BTreeMap<String, PyType>> = vec![BTreeMap::new()];
        for (name, fnode) in &fields {
            let tys: Vec<PyType> = self.types[fnode.0 as usize]
                .iter()
                .filter(|t| !matches!(t, PyType::Top))
                .cloned()
                .collect();
            if tys.is_empty() {
                continue;
            }
            let mut next = Vec::with_capacity(records.len() * tys.len());
            for r in &records {
                for t in &tys {
                    let mut r2 = r.clone();
                    r2.insert(name.clone(), t.clone());
                    next.push(r2);
                }
                if next.len() > 64 {
                    break;
                }
            }
            records = next;
        }
        for r in records {
            if !r.is_empty() {
                self.add_type(var, PyType::Record(r));
            }
        }
    }

    fn finish(self) -> TensorEstimate {
        TensorEstimate {
            types: self.types,
            widened: self.widened,
            selector_warnings: self.selector_warnings,
            cap: self.opts.cap,
        }
    }
}

/// Replaces symbolic dimensions named after callee parameters with the
/// integer constants bound at the call site.
fn substitute(t: &PyType, int_args: &BTreeMap<String, i64>) -> PyType {
    use crate::types::{Dim, TensorType};
    fn subst_dim(d: &Dim, m: &BTreeMap<String, i64>) -> Dim {
        match d {
            Dim::Sym(l) => match m.get(l).filter(|v| **v >= 0) {
                Some(v) => Dim::Num(*v as u64),
                None => d.clone(),
            },
            Dim::Product(fs) => Dim::Product(fs.iter().map(|f| subst_dim(f, m)).collect()),
            _ => d.clone(),
        }
    }
    match t {
        PyType::Tensor(tt) => PyType::Tensor(TensorType {
            dims: tt.dims.iter().map(|d| subst_dim(d, int_args)).collect(),
            element: Box::new(substitute(&tt.element, int_args)),
        }),
        PyType::Record(fields) => PyType::Record(
            fields
                .iter()
                .map(|(k, v)| (k.clone(), substitute(v, int_args)))
                .collect(),
        ),
        PyType::Function { params, result } => PyType::Function {
            params: params
                .iter()
                .map(|(k, v)| (k.clone(), substitute(v, int_args)))
                .collect(),
            result: Box::new(substitute(result, int_args)),
        },
        PyType::Label(_) | PyType::Top => t.clone(),
    }
}

/// Computes the least fixpoint of the tensor estimate.
pub fn propagate(a: &Analysis, decls: &[InputDeclaration], opts: &PropagateOptions) -> TensorEstimate {
    let mut engine = Engine::new(a, opts);
    engine.build_deps();
    engine.seed(decls);
    engine.solve();
    engine.finish()
}

/// Function signature assembled from the converged parameter and return
/// estimates; declaration lines are annotated with these in type dumps.
/// Parameters with unknown types are omitted, matching the convention that
/// irrelevant arguments are not written.
pub fn function_signature(a: &Analysis, est: &TensorEstimate, target: FuncId) -> Option<PyType> {
    let tf = a.program.func(target);
    let mut params = BTreeMap::new();
    for (i, p) in tf.params.iter().enumerate() {
        let Some(pname) = tf.param_name(i) else { continue };
        let Some(pn) = a.graph.node_id(&Node::Var(target, *p)) else {
            continue;
        };
        let set = est.at_node(pn);
        if set.len() == 1 {
            let t = set.iter().next().expect("len checked").clone();
            if !matches!(t, PyType::Top) {
                params.insert(pname.to_string(), t);
            }
        }
    }
    let result = match a.graph.node_id(&Node::Ret(target)) {
        Some(rn) => {
            let set = est.at_node(rn);
            if set.len() == 1 {
                set.iter().next().expect("len checked").clone()
            } else {
                PyType::Top
            }
        }
        None => PyType::Top,
    };
    if params.is_empty() && matches!(result, PyType::Top) {
        return None;
    }
    Some(PyType::Function {
        params,
        result: Box::new(result),
    })
}

// ---------------------------------------------------------------------------
// diagnostics

/// Evaluates every tagged call site against the converged estimate and
/// collects diagnostics: all-combinations-fail is an error, a partial
/// failure is a warning, an unanalyzed tensor argument is an info.
pub fn check(a: &Analysis, est: &TensorEstimate, opts: &PropagateOptions) -> Vec<Diagnostic> {
    let mut engine = Engine::new(a, opts);
    engine.build_deps();
    let mut diags = Vec::new();

    for ts in &engine.tagged {
        if !ts.in_user_code {
            continue;
        }
        let site = &a.sites[ts.site_idx];
        let inputs = match ts.input {
            Some(n) => est.at_node(n).clone(),
            None => BTreeSet::new(),
        };
        let eval = evaluate(ts, &inputs, &opts.config);
        if !eval.checked {
            continue;
        }
        let passes = eval.pass_concrete + eval.pass_vacuous;
        if !eval.failures.is_empty() {
            let severity = if passes == 0 { Severity::Error } else { Severity::Warning };
            for (code, message) in &eval.failures {
                diags.push(Diagnostic::new(*code, severity, message.clone(), site.span.clone()));
            }
        } else if passes == 0 {
            // nothing to verify at this site
            let what = match ts.tag {
                Semantics::Placeholder => "shape argument has no known value",
                Semantics::Reshape if ts.input.is_some() && !est.at_node(ts.input.expect("guarded")).is_empty() => {
                    "shape argument has no known value"
                }
                _ => "tensor argument has no inferred type",
            };
            diags.push(Diagnostic::new(
                Code::Ari000UnanalyzedTensorArg,
                Severity::Info,
                format!("{what}; call not verified"),
                site.span.clone(),
            ));
        }
    }

    // widening
    for i in 0..a.graph.num_nodes() {
        let n = NodeId(i as u32);
        if est.was_widened(n) {
            if let Node::Var(f, v) = a.graph.node(n) {
                let func = a.program.func(*f);
                if matches!(func.kind, FunctionKind::Source | FunctionKind::ModuleInit) {
                    diags.push(Diagnostic::new(
                        Code::Ari007WideningApplied,
                        Severity::Warning,
                        format!("estimate exceeded {} types and was widened to top", est.cap),
                        func.value_span(*v).clone(),
                    ));
                }
            }
        }
    }

    // unresolved calls in user code
    for (f, s) in &a.callgraph.unresolved {
        if let Some(site) = a.sites.iter().find(|site| site.func == *f && site.site == *s) {
            if site.in_user_code {
                diags.push(Diagnostic::new(
                    Code::Ari008UnresolvedCall,
                    Severity::Warning,
                    "call target could not be resolved".to_string(),
                    site.span.clone(),
                ));
            }
        }
    }

    diags.extend(est.selector_warnings.iter().cloned());
    sort_diagnostics(&mut diags);
    diags.dedup();
    diags
}

// ---------------------------------------------------------------------------
// per-line type listing

/// Inferred types per source line: every line owning an SSA definition with a
/// non-empty tensor estimate, rendered in the annotation syntax. Estimates
/// that are exactly `top` are omitted; parameters are not listed (their types
/// show up in function signatures instead).
pub fn dump_types(a: &Analysis, est: &TensorEstimate) -> BTreeMap<(String, u32), BTreeSet<String>> {
    let mut out: BTreeMap<(String, u32), BTreeSet<String>> = BTreeMap::new();
    for (fi, f) in a.program.functions.iter().enumerate() {
        if !matches!(f.kind, FunctionKind::Source | FunctionKind::ModuleInit) {
            continue;
        }
        let fid = FuncId(fi as u32);
        for block in &f.blocks {
            for instr in &block.instrs {
                let Some(def) = instr.kind.def() else { continue };
                // a function definition line is annotated with the signature
                if let InstrKind::New {
                    alloc: crate::ir::AllocKind::Function(name),
                    ..
                } = &instr.kind
                {
                    if let Some(sig) = a
                        .program
                        .lookup(name)
                        .and_then(|target| function_signature(a, est, target))
                    {
                        let span = f.value_span(def);
                        out.entry((span.file.clone(), span.line_start))
                            .or_default()
                            .insert(sig.to_string());
                    }
                    continue;
                }
                let Some(n) = a.graph.node_id(&Node::Var(fid, def)) else {
                    continue;
                };
                let rendered: BTreeSet<String> = est
                    .at_node(n)
                    .iter()
                    .filter(|t| !matches!(t, PyType::Top))
                    .map(|t| t.to_string())
                    .collect();
                if rendered.is_empty() {
                    continue;
                }
                let span = f.value_span(def);
                out.entry((span.file.clone(), span.line_start))
                    .or_default()
                    .extend(rendered);
            }
        }
    }
    out
}

/// One text line per dumped point: `file:line: type` with multi-type
/// estimates sorted and brace-enclosed.
pub fn render_dump_line(file: &str, line: u32, types: &BTreeSet<String>) -> String {
    if types.len() == 1 {
        format!("{file}:{line}: {}", types.iter().next().expect("len checked"))
    } else {
        let parts: Vec<&str> = types.iter().map(|s| s.as_str()).collect();
        format!("{file}:{line}: {{{}}}", parts.join(", "))
    }
}

// ---------------------------------------------------------------------------
// verified-API matrix

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ApiKind {
    Reshape,
    Conv2d,
    Conv3d,
    Placeholder,
}

impl ApiKind {
    pub const ALL: [ApiKind; 4] = [ApiKind::Reshape, ApiKind::Conv2d, ApiKind::Conv3d, ApiKind::Placeholder];

    pub fn as_str(self) -> &'static str {
        match self {
            ApiKind::Reshape => "reshape",
            ApiKind::Conv2d => "conv2d",
            ApiKind::Conv3d => "conv3d",
            ApiKind::Placeholder => "placeholder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApiStatus {
    /// The program does not use the API.
    Absent,
    /// Used, but no call could be verified with concrete evidence.
    Found,
    /// Used and verified with at least one concrete input.
    Verified,
}

/// Which of the checked APIs each program uses, and whether at least one use
/// was verified against concrete shape evidence.
pub fn api_matrix(a: &Analysis, est: &TensorEstimate, opts: &PropagateOptions) -> BTreeMap<ApiKind, ApiStatus> {
    let mut engine = Engine::new(a, opts);
    engine.build_deps();
    let mut matrix: BTreeMap<ApiKind, ApiStatus> = ApiKind::ALL.iter().map(|k| (*k, ApiStatus::Absent)).collect();
    for ts in &engine.tagged {
        if !ts.in_user_code {
            continue;
        }
        let kind = match ts.tag {
            Semantics::Reshape => ApiKind::Reshape,
            Semantics::Conv2d => ApiKind::Conv2d,
            Semantics::Conv3d => ApiKind::Conv3d,
            Semantics::Placeholder => ApiKind::Placeholder,
            _ => continue,
        };
        let inputs = match ts.input {
            Some(n) => est.at_node(n).clone(),
            None => BTreeSet::new(),
        };
        let eval = evaluate(ts, &inputs, &opts.config);
        let status = matrix.get_mut(&kind).expect("all kinds present");
        if eval.pass_concrete > 0 {
            *status = ApiStatus::Verified;
        } else if *status == ApiStatus::Absent {
            *status = ApiStatus::Found;
        }
    }
    matrix
}
