//! Constraint generation and the worklist solver.

use super::*;
use crate::ast::BinOpKind;
use crate::frontend::{ClassInfo, LoweredModule};
use crate::ir::{
    AllocKind, Callee, FunctionBuilder, FunctionKind, IRFunction, InstrKind, Literal, OpKind, SiteId,
    Terminator, ValueId,
};
use crate::model::ModelSpec;
use crate::span::SourceSpan;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// Builds the call graph and dataflow graph for a lowered module against the
/// loaded library models.
pub fn build(lowered: &LoweredModule, models: &ModelSpec) -> Analysis {
    let mut solver = Solver::new(lowered, models);
    solver.scan_all();
    solver.solve();
    solver.finish()
}

/// Synthesizes the constructor for a user class: allocates the instance,
/// installs one bound method per declared method, forwards to `__init__`
/// when present, and returns the instance.
pub fn synthesize_class_model(class: &ClassInfo, init_params: &[String]) -> IRFunction {
    let span = SourceSpan::synthetic(&format!("ctor:{}", class.name));
    let mut b = FunctionBuilder::new(format!("{}.<new>", class.name), FunctionKind::SyntheticCtor, class.span.clone());
    b.add_param(None, span.clone()); // callee slot (the class object)
    let mut forwarded = Vec::new();
    for p in init_params {
        forwarded.push(b.add_param(Some(p.clone()), span.clone()));
    }

    let site = b.fresh_site();
    let instance = b.fresh(Some("self".to_string()), class.span.clone());
    b.emit(
        InstrKind::New {
            def: instance,
            alloc: AllocKind::Instance(class.name.clone()),
            site,
        },
        class.span.clone(),
    );
    for (method_name, qualified) in &class.methods {
        if method_name == "__init__" {
            continue;
        }
        let site = b.fresh_site();
        let bm = b.fresh(None, span.clone());
        b.emit(
            InstrKind::New {
                def: bm,
                alloc: AllocKind::BoundMethod {
                    method: qualified.clone(),
                    receiver: instance,
                },
                site,
            },
            span.clone(),
        );
        b.emit(
            InstrKind::PutField {
                obj: instance,
                field: method_name.clone(),
                value: bm,
            },
            span.clone(),
        );
    }
    if let Some((_, init_qualified)) = class.methods.iter().find(|(m, _)| m == "__init__") {
        let mut args = vec![instance];
        args.extend(forwarded.iter().copied());
        let site = b.fresh_site();
        let def = b.fresh(None, span.clone());
        b.emit(
            InstrKind::Invoke {
                def,
                callee: Callee::Static(init_qualified.clone()),
                args,
                kwargs: vec![],
                site,
            },
            span.clone(),
        );
    }
    b.terminate_current(Terminator::Return {
        value: instance,
        span,
    });
    b.finish()
}

/// How positional arguments at a call site map onto target parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ArgMapping {
    /// args fill params[0..]: static calls and unbound method reads
    FromSlotZero,
    /// callee value flows to param 0; args fill params[1..]
    CalleeInSlotZero,
    /// a captured receiver flows to param 0; args fill params[1..]
    Receiver(NodeId),
}

struct Solver<'a> {
    program: Program,
    models: &'a ModelSpec,
    class_index: BTreeMap<String, usize>,

    nodes: Vec<Node>,
    node_index: BTreeMap<Node, NodeId>,
    objects: Vec<AbstractObject>,
    object_index: BTreeMap<AbstractObject, ObjId>,
    pts: Vec<BTreeSet<ObjId>>,
    succs: Vec<Vec<(NodeId, EdgeKind)>>,
    edge_set: HashSet<(u32, u32)>,

    loads: Vec<Vec<(String, NodeId)>>,
    stores: Vec<Vec<(String, NodeId)>>,
    invokes: Vec<Vec<usize>>,

    sites: Vec<CallSite>,
    callgraph: CallGraph,
    warnings: Vec<AnalysisWarning>,
    int_consts: BTreeMap<(FuncId, ValueId), i64>,

    worklist: VecDeque<NodeId>,
    queued: Vec<bool>,
    /// (site index, target) pairs already wired
    linked: HashSet<(usize, FuncId)>,
    /// warnings already emitted, to keep reprocessing quiet
    warned: HashSet<String>,
    /// per-function value holding the module-globals object
    globals_handle: BTreeMap<FuncId, ValueId>,
    /// module-level names bound once to an integer constant (None = reassigned)
    global_ints: BTreeMap<String, Option<i64>>,
}

impl<'a> Solver<'a> {
    fn new(lowered: &LoweredModule, models: &'a ModelSpec) -> Solver<'a> {
        let mut functions: Vec<IRFunction> = Vec::new();
        let mut by_name = BTreeMap::new();
        let push = |f: IRFunction, by_name: &mut BTreeMap<String, FuncId>, functions: &mut Vec<IRFunction>| {
            let id = FuncId(functions.len() as u32);
            by_name.insert(f.name.clone(), id);
            functions.push(f);
            id
        };

        for f in &lowered.functions {
            push(f.clone(), &mut by_name, &mut functions);
        }

        let mut class_index = BTreeMap::new();
        let mut ctors = BTreeMap::new();
        for (idx, class) in lowered.classes.iter().enumerate() {
            class_index.insert(class.name.clone(), idx);
            let init_params: Vec<String> = class
                .methods
                .iter()
                .find(|(m, _)| m == "__init__")
                .and_then(|(_, q)| by_name.get(q.as_str()))
                .map(|fid| {
                    let f = &functions[fid.0 as usize];
                    f.params
                        .iter()
                        .skip(1)
                        .filter_map(|p| f.value_name(*p).map(str::to_string))
                        .collect()
                })
                .unwrap_or_default();
            let ctor = synthesize_class_model(class, &init_params);
            let id = push(ctor, &mut by_name, &mut functions);
            ctors.insert(idx, id);
        }

        for f in &models.functions {
            push(f.clone(), &mut by_name, &mut functions);
        }

        let mut semantics = BTreeMap::new();
        let mut model_params = BTreeMap::new();
        let mut model_elements = BTreeMap::new();
        for (qualified, method) in &models.methods {
            if let Some(id) = by_name.get(qualified.as_str()) {
                if let Some(s) = method.semantics {
                    semantics.insert(*id, s);
                }
                model_params.insert(*id, method.param_names.clone());
                if let Some(e) = &method.element {
                    model_elements.insert(*id, e.clone());
                }
            }
        }

        let program = Program {
            functions,
            by_name,
            classes: lowered.classes.clone(),
            ctors,
            semantics,
            model_params,
            model_elements,
        };
        Solver {
            program,
            models,
            class_index,
            nodes: Vec::new(),
            node_index: BTreeMap::new(),
            objects: Vec::new(),
            object_index: BTreeMap::new(),
            pts: Vec::new(),
            succs: Vec::new(),
            edge_set: HashSet::new(),
            loads: Vec::new(),
            stores: Vec::new(),
            invokes: Vec::new(),
            sites: Vec::new(),
            callgraph: CallGraph::default(),
            warnings: Vec::new(),
            int_consts: BTreeMap::new(),
            worklist: VecDeque::new(),
            queued: Vec::new(),
            linked: HashSet::new(),
            warned: HashSet::new(),
            globals_handle: BTreeMap::new(),
            global_ints: BTreeMap::new(),
        }
    }

    fn node(&mut self, n: Node) -> NodeId {
        if let Some(id) = self.node_index.get(&n) {
            return *id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.node_index.insert(n.clone(), id);
        self.nodes.push(n);
        self.pts.push(BTreeSet::new());
        self.succs.push(Vec::new());
        self.loads.push(Vec::new());
        self.stores.push(Vec::new());
        self.invokes.push(Vec::new());
        self.queued.push(false);
        id
    }

    fn object(&mut self, o: AbstractObject) -> ObjId {
        if let Some(id) = self.object_index.get(&o) {
            return *id;
        }
        let id = ObjId(self.objects.len() as u32);
        self.object_index.insert(o.clone(), id);
        self.objects.push(o);
        id
    }

    fn enqueue(&mut self, n: NodeId) {
        if !self.queued[n.0 as usize] {
            self.queued[n.0 as usize] = true;
            self.worklist.push_back(n);
        }
    }

    fn add_obj(&mut self, n: NodeId, o: ObjId) {
        if self.pts[n.0 as usize].insert(o) {
            self.enqueue(n);
        }
    }

    fn add_edge(&mut self, src: NodeId, dst: NodeId, kind: EdgeKind) {
        if src == dst {
            return;
        }
        if self.edge_set.insert((src.0, dst.0)) {
            self.succs[src.0 as usize].push((dst, kind));
            // flow everything already known
            let objs: Vec<ObjId> = self.pts[src.0 as usize].iter().copied().collect();
            let mut grew = false;
            for o in objs {
                grew |= self.pts[dst.0 as usize].insert(o);
            }
            if grew {
                self.enqueue(dst);
            }
        }
    }

    fn warn_once(&mut self, key: String, message: String, span: &SourceSpan, in_user_code: bool) {
        if self.warned.insert(key) {
            self.warnings.push(AnalysisWarning {
                message,
                span: span.clone(),
                in_user_code,
            });
        }
    }

    // -- constraint generation ---------------------------------------------

    fn scan_all(&mut self) {
        for i in 0..self.program.functions.len() {
            self.scan_function(FuncId(i as u32));
        }
        for i in 0..self.pts.len() {
            if !self.pts[i].is_empty() {
                self.enqueue(NodeId(i as u32));
            }
        }
    }

    fn scan_function(&mut self, fid: FuncId) {
        let f = self.program.functions[fid.0 as usize].clone();
        let in_user_code = matches!(f.kind, FunctionKind::Source | FunctionKind::ModuleInit);
        for block in &f.blocks {
            for phi in &block.phis {
                let def = self.node(Node::Var(fid, phi.def));
                for (_, arg) in &phi.args {
                    let src = self.node(Node::Var(fid, *arg));
                    self.add_edge(src, def, EdgeKind::Plain);
                }
            }
            for instr in &block.instrs {
                match &instr.kind {
                    InstrKind::Const { def, lit } => {
                        self.node(Node::Var(fid, *def));
                        if let Literal::Int(v) = lit {
                            self.int_consts.insert((fid, *def), *v);
                        }
                    }
                    InstrKind::Assign { def, src } => {
                        let d = self.node(Node::Var(fid, *def));
                        let s = self.node(Node::Var(fid, *src));
                        self.add_edge(s, d, EdgeKind::Plain);
                        if let Some(v) = self.int_consts.get(&(fid, *src)).copied() {
                            self.int_consts.insert((fid, *def), v);
                        }
                    }
                    InstrKind::BinOp { def, op, lhs, rhs } => {
                        self.node(Node::Var(fid, *def));
                        if let (Some(a), Some(b)) = (
                            self.int_consts.get(&(fid, *lhs)).copied(),
                            self.int_consts.get(&(fid, *rhs)).copied(),
                        ) {
                            let folded = match op {
                                OpKind::Arith(BinOpKind::Add) => a.checked_add(b),
                                OpKind::Arith(BinOpKind::Sub) => a.checked_sub(b),
                                OpKind::Arith(BinOpKind::Mul) => a.checked_mul(b),
                                OpKind::Arith(BinOpKind::FloorDiv) if b != 0 => Some(a.div_euclid(b)),
                                OpKind::Arith(BinOpKind::Mod) if b != 0 => Some(a.rem_euclid(b)),
                                _ => None,
                            };
                            if let Some(v) = folded {
                                self.int_consts.insert((fid, *def), v);
                            }
                        }
                    }
                    InstrKind::New { def, alloc, site } => {
                        let d = self.node(Node::Var(fid, *def));
                        if let Some(obj) = self.alloc_object(fid, *site, alloc, &instr.span, in_user_code) {
                            let o = self.object(obj);
                            self.add_obj(d, o);
                        }
                    }
                    InstrKind::GetField { def, obj, field } => {
                        let d = self.node(Node::Var(fid, *def));
                        let o = self.node(Node::Var(fid, *obj));
                        self.loads[o.0 as usize].push((field.clone(), d));
                        // module-level integer constants are visible through
                        // globals reads
                        if self.globals_handle.get(&fid) == Some(obj) {
                            if let Some(Some(v)) = self.global_ints.get(field) {
                                self.int_consts.insert((fid, *def), *v);
                            }
                        }
                    }
                    InstrKind::PutField { obj, field, value } => {
                        let o = self.node(Node::Var(fid, *obj));
                        let v = self.node(Node::Var(fid, *value));
                        self.stores[o.0 as usize].push((field.clone(), v));
                        if f.kind == FunctionKind::ModuleInit && self.globals_handle.get(&fid) == Some(obj) {
                            let value_const = self.int_consts.get(&(fid, *value)).copied();
                            self.global_ints
                                .entry(field.clone())
                                .and_modify(|slot| {
                                    if *slot != value_const {
                                        *slot = None;
                                    }
                                })
                                .or_insert(value_const);
                        }
                    }
                    InstrKind::Invoke {
                        def,
                        callee,
                        args,
                        kwargs,
                        site,
                    } => {
                        self.scan_invoke(fid, *def, callee, args, kwargs, *site, &instr.span, in_user_code);
                    }
                }
            }
            if let Terminator::Return { value, .. } = &block.term {
                let v = self.node(Node::Var(fid, *value));
                let r = self.node(Node::Ret(fid));
                self.add_edge(v, r, EdgeKind::Plain);
            }
        }
    }

    fn alloc_object(
        &mut self,
        fid: FuncId,
        site: SiteId,
        alloc: &AllocKind,
        span: &SourceSpan,
        in_user_code: bool,
    ) -> Option<AbstractObject> {
        Some(match alloc {
            AllocKind::Object => AbstractObject::AllocSite {
                func: fid,
                site,
                token: AllocToken::Object,
            },
            AllocKind::Dict => AbstractObject::AllocSite {
                func: fid,
                site,
                token: AllocToken::Dict,
            },
            AllocKind::List => AbstractObject::AllocSite {
                func: fid,
                site,
                token: AllocToken::List,
            },
            AllocKind::ShapeList(elems) => AbstractObject::ShapeList {
                func: fid,
                site,
                elems: elems.clone(),
            },
            AllocKind::Instance(name) => match self.class_index.get(name) {
                Some(idx) => AbstractObject::AllocSite {
                    func: fid,
                    site,
                    token: AllocToken::Instance(*idx),
                },
                None => AbstractObject::AllocSite {
                    func: fid,
                    site,
                    token: AllocToken::Object,
                },
            },
            AllocKind::ModelInstance(q) => AbstractObject::AllocSite {
                func: fid,
                site,
                token: AllocToken::ModelInstance(q.clone()),
            },
            AllocKind::Module(name) => AbstractObject::ModuleObj(name.clone()),
            AllocKind::Function(name) => match self.program.by_name.get(name).copied() {
                Some(target) => AbstractObject::FunctionObj(target),
                None => {
                    self.warn_once(
                        format!("missing-fn:{name}"),
                        format!("no function named {name:?}"),
                        span,
                        in_user_code,
                    );
                    return None;
                }
            },
            AllocKind::Class(name) => {
                let idx = self.class_index.get(name)?;
                AbstractObject::ClassObj(*idx)
            },
            AllocKind::BoundMethod { method, receiver } => {
                let target = self.program.by_name.get(method).copied()?;
                let recv = self.node(Node::Var(fid, *receiver));
                AbstractObject::BoundMethod {
                    method: target,
                    receiver: recv,
                }
            },
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_invoke(
        &mut self,
        fid: FuncId,
        def: ValueId,
        callee: &Callee,
        args: &[ValueId],
        kwargs: &[(String, ValueId)],
        site: SiteId,
        span: &SourceSpan,
        in_user_code: bool,
    ) {
        let result = self.node(Node::Var(fid, def));
        let site_record = CallSite {
            func: fid,
            site,
            span: span.clone(),
            args: args.to_vec(),
            kwargs: kwargs.to_vec(),
            result: def,
            in_user_code,
        };
        let site_idx = self.sites.len();
        self.sites.push(site_record);

        match callee {
            Callee::Globals => {
                let o = self.object(AbstractObject::ModuleObj(SCRIPT_MODULE.to_string()));
                self.add_obj(result, o);
                self.globals_handle.insert(fid, def);
                // synthetic read, never a call graph edge
            }
            Callee::Import(module) => {
                let path = module.replace('.', "/");
                match self.models.imports.get(&path).cloned() {
                    Some(qualified) => {
                        let target = self.program.by_name[qualified.as_str()];
                        self.link_call(site_idx, target, ArgMapping::FromSlotZero);
                    }
                    None => {
                        self.warn_once(
                            format!("unknown-module:{module}"),
                            format!("no model for module {module:?}; treating its value as opaque"),
                            span,
                            in_user_code,
                        );
                        let o = self.object(AbstractObject::AllocSite {
                            func: fid,
                            site,
                            token: AllocToken::Object,
                        });
                        self.add_obj(result, o);
                    }
                }
            }
            Callee::Static(name) => match self.program.by_name.get(name).copied() {
                Some(target) => self.link_call(site_idx, target, ArgMapping::FromSlotZero),
                None => self.warn_once(
                    format!("missing-static:{name}"),
                    format!("no function named {name:?}"),
                    span,
                    in_user_code,
                ),
            },
            Callee::Value(v) => {
                let callee_node = self.node(Node::Var(fid, *v));
                self.invokes[callee_node.0 as usize].push(site_idx);
            }
        }
    }

    // -- solving -------------------------------------------------------------

    fn solve(&mut self) {
        while let Some(n) = self.worklist.pop_front() {
            self.queued[n.0 as usize] = false;
            let objs: Vec<ObjId> = self.pts[n.0 as usize].iter().copied().collect();

            let loads = self.loads[n.0 as usize].clone();
            for (field, dst) in &loads {
                for &o in &objs {
                    self.apply_load(o, field, *dst);
                }
            }
            let stores = self.stores[n.0 as usize].clone();
            for (field, src) in &stores {
                for &o in &objs {
                    let fnode = self.node(Node::Field(o, field.clone()));
                    self.add_edge(*src, fnode, EdgeKind::Plain);
                }
            }
            let invokes = self.invokes[n.0 as usize].clone();
            for site_idx in invokes {
                for &o in &objs {
                    self.dispatch(site_idx, o);
                }
            }
            let succs = self.succs[n.0 as usize].clone();
            for (dst, _) in succs {
                let objs: Vec<ObjId> = self.pts[n.0 as usize].iter().copied().collect();
                let mut grew = false;
                for o in objs {
                    grew |= self.pts[dst.0 as usize].insert(o);
                }
                if grew {
                    self.enqueue(dst);
                }
            }
        }
    }

    fn apply_load(&mut self, o: ObjId, field: &str, dst: NodeId) {
        // reading a method from the class object yields the unbound function
        if let AbstractObject::ClassObj(idx) = &self.objects[o.0 as usize] {
            let class = &self.program.classes[*idx];
            if let Some((_, qualified)) = class.methods.iter().find(|(m, _)| m == field) {
                if let Some(target) = self.program.by_name.get(qualified.as_str()).copied() {
                    let fo = self.object(AbstractObject::FunctionObj(target));
                    self.add_obj(dst, fo);
                }
            }
        }
        let fnode = self.node(Node::Field(o, field.to_string()));
        self.add_edge(fnode, dst, EdgeKind::Plain);
    }

    fn dispatch(&mut self, site_idx: usize, o: ObjId) {
        let obj = self.objects[o.0 as usize].clone();
        match obj {
            AbstractObject::FunctionObj(target) => {
                let mapping = if self.program.func(target).is_method() {
                    // unbound method: explicit self in argument position 0
                    ArgMapping::FromSlotZero
                } else {
                    ArgMapping::CalleeInSlotZero
                };
                self.link_call(site_idx, target, mapping);
            }
            AbstractObject::BoundMethod { method, receiver } => {
                self.link_call(site_idx, method, ArgMapping::Receiver(receiver));
            }
            AbstractObject::ClassObj(idx) => {
                if let Some(ctor) = self.program.ctors.get(&idx).copied() {
                    self.link_call(site_idx, ctor, ArgMapping::CalleeInSlotZero);
                }
            }
            AbstractObject::AllocSite {
                token: AllocToken::ModelInstance(q),
                ..
            } => {
                if let Some(class) = self.models.classes.get(&q) {
                    if let Some(qualified) = class.methods.get("do") {
                        if let Some(target) = self.program.by_name.get(qualified.as_str()).copied() {
                            self.link_call(site_idx, target, ArgMapping::CalleeInSlotZero);
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn link_call(&mut self, site_idx: usize, target: FuncId, mapping: ArgMapping) {
        if !self.linked.insert((site_idx, target)) {
            return;
        }
        let site = self.sites[site_idx].clone();
        self.callgraph
            .edges
            .entry((site.func, site.site))
            .or_default()
            .insert(target);

        let callee = self.program.func(target).clone();
        let positional_base = match mapping {
            ArgMapping::FromSlotZero => 0usize,
            ArgMapping::CalleeInSlotZero | ArgMapping::Receiver(_) => 1,
        };

        // param 0: callee value or captured receiver
        match mapping {
            ArgMapping::CalleeInSlotZero => {
                if let Some(p0) = callee.params.first() {
                    // every object the call site's callee may hold flows into
                    // the receiver slot
                    let site_callee = self.site_callee_node(site_idx);
                    if let Some(cn) = site_callee {
                        let p0n = self.node(Node::Var(target, *p0));
                        self.add_edge(cn, p0n, EdgeKind::Plain);
                    }
                }
            }
            ArgMapping::Receiver(recv) => {
                if let Some(p0) = callee.params.first() {
                    let p0n = self.node(Node::Var(target, *p0));
                    self.add_edge(recv, p0n, EdgeKind::Plain);
                }
            }
            ArgMapping::FromSlotZero => {}
        }

        // positional arguments
        let mut int_args: BTreeMap<String, i64> = BTreeMap::new();
        for (i, arg) in site.args.iter().enumerate() {
            let pidx = positional_base + i;
            match callee.params.get(pidx) {
                Some(p) => {
                    let an = self.node(Node::Var(site.func, *arg));
                    let pn = self.node(Node::Var(target, *p));
                    self.add_edge(an, pn, EdgeKind::Plain);
                    if let (Some(v), Some(name)) = (
                        self.int_consts.get(&(site.func, *arg)).copied(),
                        self.param_display_name(target, pidx),
                    ) {
                        int_args.insert(name, v);
                    }
                }
                None => {
                    if site.in_user_code {
                        self.warn_once(
                            format!("arity:{site_idx}:{}", target.0),
                            format!(
                                "call passes {} positional arguments but {} takes {}",
                                site.args.len(),
                                callee.name,
                                callee.params.len().saturating_sub(positional_base),
                            ),
                            &site.span,
                            true,
                        );
                    }
                }
            }
        }

        // keyword arguments match declared parameter names
        for (name, arg) in &site.kwargs {
            match self.param_index_by_name(target, name) {
                Some(pidx) => {
                    let p = callee.params[pidx];
                    let an = self.node(Node::Var(site.func, *arg));
                    let pn = self.node(Node::Var(target, p));
                    self.add_edge(an, pn, EdgeKind::Plain);
                    if let Some(v) = self.int_consts.get(&(site.func, *arg)).copied() {
                        int_args.insert(name.clone(), v);
                    }
                }
                None => {
                    if site.in_user_code {
                        self.warn_once(
                            format!("kwarg:{site_idx}:{}:{name}", target.0),
                            format!("{} has no parameter named {name:?}", callee.name),
                            &site.span,
                            true,
                        );
                    }
                }
            }
        }

        // return value flows to the call result
        let ret = self.node(Node::Ret(target));
        let result = self.node(Node::Var(site.func, site.result));
        self.add_edge(
            ret,
            result,
            EdgeKind::CallResult {
                target,
                int_args,
            },
        );
    }

    /// The callee-expression node of a `Callee::Value` site.
    fn site_callee_node(&mut self, site_idx: usize) -> Option<NodeId> {
        let site = &self.sites[site_idx];
        let func = site.func;
        let f = self.program.func(func);
        // find the invoke instruction by site id
        for block in &f.blocks.clone() {
            for instr in &block.instrs {
                if let InstrKind::Invoke {
                    callee: Callee::Value(v),
                    site: s,
                    ..
                } = &instr.kind
                {
                    if *s == site.site {
                        let v = *v;
                        return Some(self.node(Node::Var(func, v)));
                    }
                }
            }
        }
        None
    }

    /// Declared (or model-declared) name of a parameter, for keyword matching
    /// and symbolic substitutions.
    fn param_display_name(&self, target: FuncId, pidx: usize) -> Option<String> {
        let f = self.program.func(target);
        if let Some(name) = f.param_name(pidx) {
            return Some(name.to_string());
        }
        if pidx >= 1 {
            if let Some(params) = self.program.model_params.get(&target) {
                return params.get(pidx - 1).cloned();
            }
        }
        None
    }

    fn param_index_by_name(&self, target: FuncId, name: &str) -> Option<usize> {
        let f = self.program.func(target);
        f.params.iter().enumerate().map(|(i, _)| i).find(|&i| self.param_display_name(target, i).as_deref() == Some(name))
    }

    fn finish(mut self) -> Analysis {
        // record unresolved call sites (value-callee sites with no edges)
        let mut unresolved = Vec::new();
        for site in &self.sites {
            let resolved = self.callgraph.edges.contains_key(&(site.func, site.site));
            if !resolved {
                let f = self.program.func(site.func);
                let is_value_call = f.blocks.iter().any(|b| {
                    b.instrs.iter().any(|i| {
                        matches!(
                            &i.kind,
                            InstrKind::Invoke { callee: Callee::Value(_), site: s, .. } if *s == site.site
                        )
                    })
                });
                if is_value_call {
                    unresolved.push((site.func, site.site));
                }
            }
        }
        self.callgraph.unresolved = unresolved;

        let graph = DataflowGraph {
            nodes: self.nodes,
            node_index: self.node_index,
            objects: self.objects,
            object_index: self.object_index,
            pts: self.pts,
            succs: self.succs,
            int_consts: self.int_consts,
        };
        Analysis {
            program: self.program,
            graph,
            callgraph: self.callgraph,
            sites: self.sites,
            warnings: self.warnings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{lower_module, parse_module};
    use crate::model::{bundled_tensorflow_model, ModelSpec};

    fn analyze(src: &str) -> Analysis {
        let ast = parse_module(src, "t.py").unwrap();
        let lowered = lower_module(&ast).unwrap();
        build(&lowered, &bundled_tensorflow_model())
    }

    fn analyze_no_models(src: &str) -> Analysis {
        let ast = parse_module(src, "t.py").unwrap();
        let lowered = lower_module(&ast).unwrap();
        build(&lowered, &ModelSpec::empty())
    }

    fn named_value(a: &Analysis, func: &str, name: &str) -> (FuncId, ValueId) {
        let fid = a.program.lookup(func).unwrap();
        let f = a.program.func(fid);
        // last value with the given source name
        let v = (0..f.values.len() as u32)
            .map(ValueId).rfind(|v| f.value_name(*v) == Some(name))
            .unwrap_or_else(|| panic!("no value named {name} in {func}"));
        (fid, v)
    }

    #[test]
    fn transitive_copies_share_points_to() {
        let a = analyze_no_models("class Obj(object):\n    pass\nx = Obj()\ny = x\nz = y\n");
        let (fid, x) = named_value(&a, "<module>", "x");
        let (_, z) = named_value(&a, "<module>", "z");
        let sx = a.graph.points_to(&a.program, fid, x).unwrap();
        let sz = a.graph.points_to(&a.program, fid, z).unwrap();
        assert_eq!(sx, sz);
        assert_eq!(sx.len(), 1);
        assert!(matches!(
            sx.iter().next().unwrap(),
            AbstractObject::AllocSite {
                token: AllocToken::Instance(_),
                ..
            }
        ));
    }

    #[test]
    fn unknown_variable_is_an_error() {
        let a = analyze_no_models("x = 1\n");
        let fid = a.program.lookup("<module>").unwrap();
        assert!(matches!(
            a.graph.points_to(&a.program, fid, ValueId(999)),
            Err(AnalysisError::UnknownVariable(..))
        ));
    }

    #[test]
    fn shape_list_is_tracked_with_contents() {
        let a = analyze_no_models("s = [-1, 28, 28, 1]\n");
        let (fid, s) = named_value(&a, "<module>", "s");
        let pts = a.graph.points_to(&a.program, fid, s).unwrap();
        assert_eq!(pts.len(), 1);
        match pts.iter().next().unwrap() {
            AbstractObject::ShapeList { elems, .. } => {
                assert_eq!(elems, &vec![Some(-1), Some(28), Some(28), Some(1)]);
            }
            other => panic!("expected shape list, got {other:?}"),
        }
    }

    #[test]
    fn method_call_sites_resolve_to_the_single_method() {
        let src = "\
class Foo(object):
    def foo(self, a):
        return self.contents + a

x = Foo()
y = x.foo

x.foo(3)
Foo.foo(x, 3)
y(3)

x.foo = Foo.foo
x.foo(x, 3)
";
        let a = analyze_no_models(src);
        let init = a.program.lookup("<module>").unwrap();
        let foo = a.program.lookup("Foo.foo").unwrap();
        let calling_sites = a.callgraph.calls_between(init, foo);
        assert_eq!(calling_sites.len(), 4, "callgraph: {:?}", a.callgraph.edges);
        // each of the four sites resolves to exactly {Foo.foo}
        for s in calling_sites {
            assert_eq!(a.callgraph.targets(init, s), BTreeSet::from([foo]));
        }
    }

    #[test]
    fn imports_are_singletons() {
        let a = analyze("import tensorflow as tf\nimport tensorflow as tf2\n");
        let (fid, tf) = named_value(&a, "<module>", "tf");
        let (_, tf2) = named_value(&a, "<module>", "tf2");
        let s1 = a.graph.points_to(&a.program, fid, tf).unwrap();
        let s2 = a.graph.points_to(&a.program, fid, tf2).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 1);
        assert!(matches!(s1.iter().next().unwrap(), AbstractObject::ModuleObj(m) if m == "tensorflow"));
    }

    #[test]
    fn unknown_import_is_opaque_with_warning() {
        let a = analyze("import scipy\n");
        assert!(a.warnings.iter().any(|w| w.message.contains("scipy")));
        let (fid, v) = named_value(&a, "<module>", "scipy");
        let pts = a.graph.points_to(&a.program, fid, v).unwrap();
        assert_eq!(pts.len(), 1);
    }

    #[test]
    fn estimator_callback_reaches_model_fn() {
        let src = "\
import tensorflow as tf

def model_fn(features, labels, mode):
    return features

model = tf.estimator.Estimator(model_fn)
model.train(1, steps=2)
";
        let a = analyze(src);
        let train_do = a.program.lookup("tensorflow/estimator/train/train.do").unwrap();
        let model_fn = a.program.lookup("model_fn").unwrap();
        let edges = a.callgraph.calls_between(train_do, model_fn);
        assert_eq!(edges.len(), 1, "callback edge missing: {:?}", a.callgraph.edges);
    }

    #[test]
    fn heap_flow_through_model_wrapper() {
        let src = "\
import tensorflow as tf

def model_fn(features, labels, mode):
    x = features['images']
    return x

model = tf.estimator.Estimator(model_fn)
images = tf.zeros([784])
input_fn = tf.estimator.inputs.numpy_input_fn(x={'images': images}, y=2, batch_size=1, num_epochs=None, shuffle=True)
model.train(input_fn, steps=3)
";
        let a = analyze(src);
        // the dict literal object must reach model_fn's features parameter
        let model_fn = a.program.lookup("model_fn").unwrap();
        let f = a.program.func(model_fn);
        let features = f.params[1];
        let pts = a.graph.points_to(&a.program, model_fn, features).unwrap();
        assert!(
            pts.iter().any(|o| matches!(
                o,
                AbstractObject::AllocSite {
                    token: AllocToken::Dict,
                    ..
                }
            )),
            "features points to {pts:?}"
        );
        // and the images read aliases the stored value
        let (_, x) = named_value(&a, "model_fn", "x");
        let px = a.graph.points_to(&a.program, model_fn, x).unwrap();
        assert!(!px.is_empty(), "images read resolved nothing");
    }

    #[test]
    fn rebuilding_is_deterministic_and_stable() {
        let src = "\
class Foo(object):
    def foo(self, a):
        return a

x = Foo()
y = x.foo
z = y(x)
";
        let ast = parse_module(src, "t.py").unwrap();
        let lowered = lower_module(&ast).unwrap();
        let a1 = build(&lowered, &ModelSpec::empty());
        let a2 = build(&lowered, &ModelSpec::empty());
        assert_eq!(a1.graph.pts_snapshot(), a2.graph.pts_snapshot());
        assert_eq!(a1.callgraph.edges, a2.callgraph.edges);
    }

    #[test]
    fn constructors_run_init() {
        let src = "\
class Box(object):
    def __init__(self, item):
        self.item = item

b = Box(3)
";
        let a = analyze_no_models(src);
        let init = a.program.lookup("<module>").unwrap();
        let ctor = a.program.lookup("Box.<new>").unwrap();
        let box_init = a.program.lookup("Box.__init__").unwrap();
        assert!(!a.callgraph.calls_between(init, ctor).is_empty());
        assert!(!a.callgraph.calls_between(ctor, box_init).is_empty());
    }

    #[test]
    fn unresolved_call_is_recorded() {
        let a = analyze_no_models("def f(g):\n    return g()\n");
        assert!(!a.callgraph.unresolved.is_empty());
    }
}
