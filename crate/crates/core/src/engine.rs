//! Effect registry, reification and the single-thread and threadpool step relations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use serde::Serialize;
use thiserror::Error;

use crate::later::Later;
use crate::tree::{Cont, EffVal, ErrorKind, GITree, KFn, OpId, Tag};

/// One operation of a signature with its input and output shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSig {
    pub op: OpId,
    pub input: Tag,
    pub output: Tag,
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub ops: Vec<OpSig>,
}

impl Signature {
    pub fn lookup(&self, op: &OpId) -> Option<&OpSig> {
        self.ops.iter().find(|s| &s.op == op)
    }
}

/// Exception handler entry: name, handler, saved continuation.
#[derive(Clone)]
pub struct Handler {
    pub exc: Rc<str>,
    pub handler: KFn,
    pub saved: KFn,
}

/// The heap of the store family.
#[derive(Clone, Default)]
pub struct Heap {
    pub cells: BTreeMap<usize, Later<GITree>>,
    pub next_fresh: usize,
}

impl Heap {
    pub fn get(&self, l: usize) -> Option<&Later<GITree>> {
        self.cells.get(&l)
    }

    pub fn alloc(&mut self, v: Later<GITree>) -> usize {
        let l = self.next_fresh;
        self.cells.insert(l, v);
        self.next_fresh += 1;
        l
    }
}

/// Per-family local state. Payloads sit behind `Rc` so untouched families
/// can be checked for identity.
#[derive(Clone)]
pub enum SubState {
    Unit,
    Heap(Rc<Heap>),
    Handlers(Rc<Vec<Handler>>),
    /// Most recent delimiter last.
    Conts(Rc<Vec<KFn>>),
}

impl SubState {
    pub fn same(&self, other: &SubState) -> bool {
        match (self, other) {
            (SubState::Unit, SubState::Unit) => true,
            (SubState::Heap(a), SubState::Heap(b)) => Rc::ptr_eq(a, b),
            (SubState::Handlers(a), SubState::Handlers(b)) => Rc::ptr_eq(a, b),
            (SubState::Conts(a), SubState::Conts(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SubState::Unit => 0,
            SubState::Heap(h) => h.cells.len(),
            SubState::Handlers(h) => h.len(),
            SubState::Conts(k) => k.len(),
        }
    }
}

impl fmt::Debug for SubState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubState::Unit => f.write_str("()"),
            SubState::Heap(h) => {
                let mut m = f.debug_map();
                for (l, v) in &h.cells {
                    let shown = if v.is_forced() { v.force().render_value() } else { "▷..".into() };
                    m.entry(l, &shown);
                }
                m.finish()
            }
            SubState::Handlers(h) => {
                let names: Vec<&str> = h.iter().map(|e| &*e.exc).collect();
                write!(f, "handlers{names:?}")
            }
            SubState::Conts(k) => write!(f, "conts[{}]", k.len()),
        }
    }
}

/// Product of family states, ordered by family name.
#[derive(Clone, Debug, Default)]
pub struct CompositeState {
    pub parts: BTreeMap<&'static str, SubState>,
}

impl CompositeState {
    pub fn get(&self, family: &str) -> Option<&SubState> {
        self.parts.get(family)
    }

    pub fn set(&mut self, family: &'static str, s: SubState) {
        self.parts.insert(family, s);
    }

    pub fn heap(&self) -> Option<&Heap> {
        self.parts.values().find_map(|s| match s {
            SubState::Heap(h) => Some(&**h),
            _ => None,
        })
    }

    pub fn cont_stack_len(&self) -> Option<usize> {
        self.parts.values().find_map(|s| match s {
            SubState::Conts(k) => Some(k.len()),
            _ => None,
        })
    }

    pub fn handler_depth(&self) -> Option<usize> {
        self.parts.values().find_map(|s| match s {
            SubState::Handlers(h) => Some(h.len()),
            _ => None,
        })
    }
}

/// Successful reification: successor, new local state, spawned threads.
pub struct Reified {
    pub next: Later<GITree>,
    pub state: SubState,
    pub spawned: Vec<Later<GITree>>,
}

impl Reified {
    pub fn new(next: Later<GITree>, state: SubState) -> Self {
        Reified {
            next,
            state,
            spawned: Vec::new(),
        }
    }
}

/// A context-dependent reifier for one effect family.
pub trait Reifier {
    fn family(&self) -> &'static str;
    fn signature(&self) -> Vec<OpSig>;
    fn initial(&self) -> SubState;
    /// `None` means the operation is undefined in this state.
    fn step(&self, op: OpId, input: &EffVal, state: &SubState, k: &Cont) -> Option<Reified>;
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("effect family `{0}` registered twice")]
    DuplicateFamily(String),
    #[error("operation `{0}` registered twice")]
    DuplicateOp(String),
}

/// A combined set of reifiers with their dispatch table.
#[derive(Clone)]
pub struct Effects {
    reifiers: Vec<Rc<dyn Reifier>>,
    signature: Signature,
    index: HashMap<OpId, usize>,
}

impl fmt::Debug for Effects {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fams: Vec<&str> = self.reifiers.iter().map(|r| r.family()).collect();
        write!(f, "Effects{fams:?}")
    }
}

/// Disjoint union of signatures, product of states.
pub fn combine(rs: Vec<Rc<dyn Reifier>>) -> Result<Effects, EngineError> {
    let mut signature = Signature::default();
    let mut index = HashMap::new();
    let mut families: Vec<&'static str> = Vec::new();
    for (i, r) in rs.iter().enumerate() {
        if families.contains(&r.family()) {
            return Err(EngineError::DuplicateFamily(r.family().to_string()));
        }
        families.push(r.family());
        for s in r.signature() {
            if index.insert(s.op, i).is_some() {
                return Err(EngineError::DuplicateOp(s.op.to_string()));
            }
            signature.ops.push(s);
        }
    }
    Ok(Effects {
        reifiers: rs,
        signature,
        index,
    })
}

impl Effects {
    pub fn none() -> Effects {
        combine(Vec::new()).expect("empty combination")
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn families(&self) -> Vec<&'static str> {
        self.reifiers.iter().map(|r| r.family()).collect()
    }

    pub fn initial_state(&self) -> CompositeState {
        let mut s = CompositeState::default();
        for r in &self.reifiers {
            s.set(r.family(), r.initial());
        }
        s
    }

    /// Reify a top-level `Vis`. `Err` when the operation is unknown or
    /// its input has the wrong shape.
    pub fn reify(
        &self,
        node: &crate::tree::VisNode,
        sigma: &CompositeState,
    ) -> Result<(GITree, CompositeState, Vec<GITree>), StuckReason> {
        let i = *self
            .index
            .get(&node.op)
            .ok_or(StuckReason::UnknownOp(node.op))?;
        let sig = self.signature.lookup(&node.op).expect("indexed op has a signature");
        if node.input.tag() != sig.input {
            return Err(StuckReason::BadInput(node.op));
        }
        let r = &self.reifiers[i];
        let family = r.family();
        let local = sigma
            .get(family)
            .cloned()
            .unwrap_or_else(|| r.initial());
        match r.step(node.op, &node.input, &local, &node.cont) {
            Some(res) => {
                let mut next_state = sigma.clone();
                next_state.set(family, res.state);
                debug_assert!(frame_holds(sigma, &next_state, family));
                let spawned = res.spawned.into_iter().map(|l| l.force()).collect();
                Ok((GITree::Tau(res.next), next_state, spawned))
            }
            None => Ok((GITree::Err(ErrorKind::RunTime), sigma.clone(), Vec::new())),
        }
    }
}

/// Every family other than `family` is left untouched.
pub fn frame_holds(before: &CompositeState, after: &CompositeState, family: &str) -> bool {
    before.parts.len() == after.parts.len()
        && before.parts.iter().all(|(f, s)| {
            *f == family || after.parts.get(f).is_some_and(|t| s.same(t))
        })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StuckReason {
    Error(ErrorKind),
    UnknownOp(OpId),
    BadInput(OpId),
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::Error(e) => write!(f, "error {e}"),
            StuckReason::UnknownOp(op) => write!(f, "unknown operation {op}"),
            StuckReason::BadInput(op) => write!(f, "ill-shaped input for {op}"),
        }
    }
}

/// What a single step did, for tracing.
#[derive(Clone, Debug)]
pub enum StepKind {
    Tau,
    Effect { op: OpId, input: serde_json::Value },
}

pub enum StepResult {
    Stepped {
        next: GITree,
        state: CompositeState,
        spawned: Vec<GITree>,
        kind: StepKind,
    },
    Value(GITree),
    Stuck(StuckReason),
}

/// One step of a single tree.
pub fn istep(effects: &Effects, a: &GITree, sigma: &CompositeState) -> StepResult {
    match a {
        GITree::Tau(t) => StepResult::Stepped {
            next: t.force(),
            state: sigma.clone(),
            spawned: Vec::new(),
            kind: StepKind::Tau,
        },
        GITree::Vis(v) => match effects.reify(v, sigma) {
            Ok((next, state, spawned)) => StepResult::Stepped {
                next,
                state,
                spawned,
                kind: StepKind::Effect {
                    op: v.op,
                    input: v.input.render(),
                },
            },
            Err(r) => StepResult::Stuck(r),
        },
        GITree::Ret(_) | GITree::Fun(_) => StepResult::Value(a.clone()),
        GITree::Err(e) => StepResult::Stuck(StuckReason::Error(e.clone())),
    }
}

/// One trace event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub step: u64,
    pub thread: usize,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl Event {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }

    pub fn is_effect(&self) -> bool {
        self.kind == "effect"
    }
}

pub fn trace_to_jsonl(trace: &[Event]) -> String {
    let mut out = String::new();
    for e in trace {
        out.push_str(&e.to_json());
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PoolError {
    #[error("thread {0} does not exist")]
    NoSuchThread(usize),
    #[error("thread {0} cannot step")]
    NotRunnable(usize),
}

/// Threadpool step: the chosen thread advances and spawned threads are appended.
pub fn tp_step(
    effects: &Effects,
    pool: &[GITree],
    sigma: &CompositeState,
    choice: usize,
) -> Result<(Vec<GITree>, CompositeState, StepKind, usize), PoolError> {
    let t = pool.get(choice).ok_or(PoolError::NoSuchThread(choice))?;
    match istep(effects, t, sigma) {
        StepResult::Stepped {
            next,
            state,
            spawned,
            kind,
        } => {
            let n = spawned.len();
            let mut out = pool.to_vec();
            out[choice] = next;
            out.extend(spawned);
            Ok((out, state, kind, n))
        }
        _ => Err(PoolError::NotRunnable(choice)),
    }
}
