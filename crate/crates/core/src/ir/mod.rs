//! Three-address, SSA-style intermediate representation shared by all
//! analyses. Functions are immutable after construction.

mod pretty;
mod validate;

pub use pretty::pretty_print;
pub use validate::{validate, Violation};

use crate::ast::{BinOpKind, CmpOpKind};
use crate::span::SourceSpan;
use std::fmt;

/// Function-scoped SSA value id. Defined exactly once within its function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(pub u32);

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bb{}", self.0)
    }
}

/// Per-function id for allocation and call sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteId(pub u32);

/// Index of a function within an analysis [`Program`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    None,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Float(v) => write!(f, "{v}"),
            Literal::Str(s) => write!(f, "{s:?}"),
            Literal::Bool(true) => write!(f, "True"),
            Literal::Bool(false) => write!(f, "False"),
            Literal::None => write!(f, "None"),
        }
    }
}

/// What a `New` instruction allocates.
#[derive(Debug, Clone, PartialEq)]
pub enum AllocKind {
    /// A plain object (tuple, generic allocation).
    Object,
    /// A dict literal; its constant keys become field writes.
    Dict,
    /// A list literal with at least one non-constant element.
    List,
    /// A list literal whose elements are all integer constants or None.
    ShapeList(Vec<Option<i64>>),
    /// Instance of a user-defined class.
    Instance(String),
    /// Instance of a library-model class (qualified, slash-separated).
    ModelInstance(String),
    /// A module object; singleton per name.
    Module(String),
    /// First-class function value for the named function.
    Function(String),
    /// Class object for a user-defined class.
    Class(String),
    /// Method closed over a receiver; forwards calls to the real method.
    BoundMethod { method: String, receiver: ValueId },
}

/// Operator carried by a `BinOp` instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Arith(BinOpKind),
    Cmp(CmpOpKind),
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Arith(op) => op.as_str(),
            OpKind::Cmp(op) => op.as_str(),
        }
    }
}

/// Call target position of an `Invoke`.
#[derive(Debug, Clone, PartialEq)]
pub enum Callee {
    /// Indirect call through a value.
    Value(ValueId),
    /// Static call to the import function of a module (dotted name).
    Import(String),
    /// Static read of the enclosing module's globals object.
    Globals,
    /// Direct static call to a function by qualified name.
    Static(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstrKind {
    Const {
        def: ValueId,
        lit: Literal,
    },
    Assign {
        def: ValueId,
        src: ValueId,
    },
    BinOp {
        def: ValueId,
        op: OpKind,
        lhs: ValueId,
        rhs: ValueId,
    },
    New {
        def: ValueId,
        alloc: AllocKind,
        site: SiteId,
    },
    GetField {
        def: ValueId,
        obj: ValueId,
        field: String,
    },
    PutField {
        obj: ValueId,
        field: String,
        value: ValueId,
    },
    Invoke {
        def: ValueId,
        callee: Callee,
        args: Vec<ValueId>,
        kwargs: Vec<(String, ValueId)>,
        site: SiteId,
    },
}

impl InstrKind {
    pub fn def(&self) -> Option<ValueId> {
        match self {
            InstrKind::Const { def, .. }
            | InstrKind::Assign { def, .. }
            | InstrKind::BinOp { def, .. }
            | InstrKind::New { def, .. }
            | InstrKind::GetField { def, .. }
            | InstrKind::Invoke { def, .. } => Some(*def),
            InstrKind::PutField { .. } => None,
        }
    }

    pub fn uses(&self) -> Vec<ValueId> {
        match self {
            InstrKind::Const { .. } => vec![],
            InstrKind::Assign { src, .. } => vec![*src],
            InstrKind::BinOp { lhs, rhs, .. } => vec![*lhs, *rhs],
            InstrKind::New { alloc, .. } => match alloc {
                AllocKind::BoundMethod { receiver, .. } => vec![*receiver],
                _ => vec![],
            },
            InstrKind::GetField { obj, .. } => vec![*obj],
            InstrKind::PutField { obj, value, .. } => vec![*obj, *value],
            InstrKind::Invoke { callee, args, kwargs, .. } => {
                let mut uses = Vec::new();
                if let Callee::Value(v) = callee {
                    uses.push(*v);
                }
                uses.extend(args.iter().copied());
                uses.extend(kwargs.iter().map(|(_, v)| *v));
                uses
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub kind: InstrKind,
    pub span: SourceSpan,
}

/// SSA join; one incoming value per predecessor block.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi {
    pub def: ValueId,
    pub args: Vec<(BlockId, ValueId)>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Terminator {
    Goto(BlockId),
    Branch {
        cond: ValueId,
        then_bb: BlockId,
        else_bb: BlockId,
    },
    Return {
        value: ValueId,
        span: SourceSpan,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub phis: Vec<Phi>,
    pub instrs: Vec<Instruction>,
    pub term: Terminator,
}

/// Metadata for one SSA value: source variable name (if any) and span.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueInfo {
    pub name: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    /// The synthetic function holding a module's top-level statements.
    ModuleInit,
    /// A user-written function or method.
    Source,
    /// Generated from a library model file.
    Model,
    /// Synthesized class constructor that installs bound-method fields.
    SyntheticCtor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IRFunction {
    /// Qualified name, e.g. `<module>`, `conv_net`, `Foo.foo`,
    /// `tensorflow/estimator/Estimator.do`.
    pub name: String,
    /// Param 0 is the callee/self slot; declared parameters follow for plain
    /// functions, while methods use param 0 for `self` directly.
    pub params: Vec<ValueId>,
    pub blocks: Vec<Block>,
    pub values: Vec<ValueInfo>,
    pub declared_class: Option<String>,
    pub kind: FunctionKind,
    pub span: SourceSpan,
}

impl IRFunction {
    pub fn entry(&self) -> BlockId {
        BlockId(0)
    }

    pub fn value_name(&self, v: ValueId) -> Option<&str> {
        self.values.get(v.0 as usize).and_then(|i| i.name.as_deref())
    }

    pub fn value_span(&self, v: ValueId) -> &SourceSpan {
        &self.values[v.0 as usize].span
    }

    /// Declared parameter name for keyword matching; the callee slot of a
    /// plain function has none.
    pub fn param_name(&self, index: usize) -> Option<&str> {
        self.params.get(index).and_then(|v| self.value_name(*v))
    }

    /// True when this function is a method of a user class (param 0 = self).
    pub fn is_method(&self) -> bool {
        self.declared_class.is_some()
    }

    /// All `Return` terminator values with their spans.
    pub fn returns(&self) -> Vec<(ValueId, &SourceSpan)> {
        self.blocks
            .iter()
            .filter_map(|b| match &b.term {
                Terminator::Return { value, span } => Some((*value, span)),
                _ => None,
            })
            .collect()
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.0 as usize]
    }

    /// Predecessors of every block, indexed by block.
    pub fn predecessors(&self) -> Vec<Vec<BlockId>> {
        let mut preds = vec![Vec::new(); self.blocks.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            let from = BlockId(i as u32);
            match &b.term {
                Terminator::Goto(t) => preds[t.0 as usize].push(from),
                Terminator::Branch { then_bb, else_bb, .. } => {
                    preds[then_bb.0 as usize].push(from);
                    if then_bb != else_bb {
                        preds[else_bb.0 as usize].push(from);
                    }
                }
                Terminator::Return { .. } => {}
            }
        }
        preds
    }
}

/// Helper used by the lowering and model code to build functions.
pub struct FunctionBuilder {
    pub name: String,
    pub values: Vec<ValueInfo>,
    pub params: Vec<ValueId>,
    pub blocks: Vec<Block>,
    pub declared_class: Option<String>,
    pub kind: FunctionKind,
    pub span: SourceSpan,
    next_site: u32,
    current: BlockId,
}

impl FunctionBuilder {
    pub fn new(name: impl Into<String>, kind: FunctionKind, span: SourceSpan) -> Self {
        FunctionBuilder {
            name: name.into(),
            values: Vec::new(),
            params: Vec::new(),
            blocks: vec![Block {
                phis: Vec::new(),
                instrs: Vec::new(),
                term: Terminator::Return {
                    value: ValueId(u32::MAX),
                    span: span.clone(),
                },
            }],
            declared_class: None,
            kind,
            span,
            next_site: 0,
            current: BlockId(0),
        }
    }

    pub fn fresh(&mut self, name: Option<String>, span: SourceSpan) -> ValueId {
        let id = ValueId(self.values.len() as u32);
        self.values.push(ValueInfo { name, span });
        id
    }

    pub fn add_param(&mut self, name: Option<String>, span: SourceSpan) -> ValueId {
        let id = self.fresh(name, span);
        self.params.push(id);
        id
    }

    pub fn fresh_site(&mut self) -> SiteId {
        let s = SiteId(self.next_site);
        self.next_site += 1;
        s
    }

    pub fn current_block(&self) -> BlockId {
        self.current
    }

    pub fn new_block(&mut self) -> BlockId {
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(Block {
            phis: Vec::new(),
            instrs: Vec::new(),
            term: Terminator::Return {
                value: ValueId(u32::MAX),
                span: self.span.clone(),
            },
        });
        id
    }

    pub fn switch_to(&mut self, block: BlockId) {
        self.current = block;
    }

    pub fn emit(&mut self, kind: InstrKind, span: SourceSpan) {
        self.blocks[self.current.0 as usize].instrs.push(Instruction { kind, span });
    }

    pub fn add_phi(&mut self, block: BlockId, phi: Phi) {
        self.blocks[block.0 as usize].phis.push(phi);
    }

    pub fn set_term(&mut self, block: BlockId, term: Terminator) {
        self.blocks[block.0 as usize].term = term;
    }

    pub fn terminate_current(&mut self, term: Terminator) {
        let cur = self.current;
        self.set_term(cur, term);
    }

    pub fn finish(self) -> IRFunction {
        IRFunction {
            name: self.name,
            params: self.params,
            blocks: self.blocks,
            values: self.values,
            declared_class: self.declared_class,
            kind: self.kind,
            span: self.span,
        }
    }
}
