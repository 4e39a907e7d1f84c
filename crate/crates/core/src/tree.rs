//! The guarded interaction tree datatype.

use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::later::Later;

/// Ground results carried by `Ret` leaves.
///
/// `Pair` holds two value trees so tensors of functions can be represented;
/// it is only comparable when both halves are ground.
#[derive(Clone)]
pub enum Ground {
    Nat(BigUint),
    Unit,
    Loc(usize),
    Pair(Rc<GITree>, Rc<GITree>),
}

impl Ground {
    pub fn nat(n: u64) -> Self {
        Ground::Nat(BigUint::from(n))
    }

    /// Structural equality, `None` when a function is reached.
    pub fn try_eq(&self, other: &Ground) -> Option<bool> {
        match (self, other) {
            (Ground::Nat(a), Ground::Nat(b)) => Some(a == b),
            (Ground::Unit, Ground::Unit) => Some(true),
            (Ground::Loc(a), Ground::Loc(b)) => Some(a == b),
            (Ground::Pair(a1, a2), Ground::Pair(b1, b2)) => {
                let l = tree_ground_eq(a1, b1)?;
                let r = tree_ground_eq(a2, b2)?;
                Some(l && r)
            }
            (Ground::Pair(a1, a2), _) | (_, Ground::Pair(a1, a2)) => {
                // still undecidable if a function hides inside
                tree_ground_eq(a1, a1)?;
                tree_ground_eq(a2, a2)?;
                Some(false)
            }
            _ => Some(false),
        }
    }

    pub fn as_nat(&self) -> Option<&BigUint> {
        match self {
            Ground::Nat(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_loc(&self) -> Option<usize> {
        match self {
            Ground::Loc(l) => Some(*l),
            _ => None,
        }
    }
}

fn tree_ground_eq(a: &GITree, b: &GITree) -> Option<bool> {
    match (a, b) {
        (GITree::Ret(x), GITree::Ret(y)) => x.try_eq(y),
        _ => None,
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ground::Nat(n) => write!(f, "{n}"),
            Ground::Unit => f.write_str("()"),
            Ground::Loc(l) => write!(f, "#{l}"),
            Ground::Pair(a, b) => write!(f, "({}, {})", a.render_value(), b.render_value()),
        }
    }
}

impl fmt::Debug for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorKind {
    RunTime,
    Lin,
    Custom(String),
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::RunTime => f.write_str("RunTime"),
            ErrorKind::Lin => f.write_str("Lin"),
            ErrorKind::Custom(t) => write!(f, "Custom({t})"),
        }
    }
}

/// Operation name, namespaced by effect family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId {
    pub family: &'static str,
    pub name: &'static str,
}

impl OpId {
    pub const fn new(family: &'static str, name: &'static str) -> Self {
        OpId { family, name }
    }
}

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.family, self.name)
    }
}

/// Body of a `Fun` leaf.
pub type FunBody = Rc<dyn Fn(GITree) -> GITree>;
/// A semantic continuation on delayed trees, `▷IT → ▷IT`.
pub type KFn = Rc<dyn Fn(Later<GITree>) -> Later<GITree>>;
/// Continuation stored in a `Vis` node.
pub type Cont = Rc<dyn Fn(EffVal) -> Later<GITree>>;
/// Input of control operators: receives the current continuation.
pub type ControlFn = Rc<dyn Fn(KFn) -> Later<GITree>>;
/// Read-modify-write function for the atomic effect: old value to (result, new value).
pub type AtomicFn = Rc<dyn Fn(GITree) -> Option<(GITree, GITree)>>;

/// Effect inputs and outputs.
#[derive(Clone)]
pub enum EffVal {
    Unit,
    Ground(Ground),
    Name(Rc<str>),
    Tree(Later<GITree>),
    Cont(KFn),
    LaterFun(Later<FunBody>),
    Control(ControlFn),
    Atomic(AtomicFn),
    Tuple(Rc<[EffVal]>),
}

/// Shape tags for effect inputs and outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tag {
    Empty,
    Unit,
    Ground,
    Name,
    Tree,
    Cont,
    LaterFun,
    Control,
    Atomic,
    Tuple(Vec<Tag>),
}

impl EffVal {
    pub fn tuple(items: Vec<EffVal>) -> Self {
        EffVal::Tuple(items.into())
    }

    pub fn loc(l: usize) -> Self {
        EffVal::Ground(Ground::Loc(l))
    }

    pub fn tag(&self) -> Tag {
        match self {
            EffVal::Unit => Tag::Unit,
            EffVal::Ground(_) => Tag::Ground,
            EffVal::Name(_) => Tag::Name,
            EffVal::Tree(_) => Tag::Tree,
            EffVal::Cont(_) => Tag::Cont,
            EffVal::LaterFun(_) => Tag::LaterFun,
            EffVal::Control(_) => Tag::Control,
            EffVal::Atomic(_) => Tag::Atomic,
            EffVal::Tuple(xs) => Tag::Tuple(xs.iter().map(EffVal::tag).collect()),
        }
    }

    pub fn item(&self, i: usize) -> Option<&EffVal> {
        match self {
            EffVal::Tuple(xs) => xs.get(i),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&Later<GITree>> {
        match self {
            EffVal::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_loc(&self) -> Option<usize> {
        match self {
            EffVal::Ground(g) => g.as_loc(),
            _ => None,
        }
    }

    pub fn as_name(&self) -> Option<&Rc<str>> {
        match self {
            EffVal::Name(n) => Some(n),
            _ => None,
        }
    }

    /// JSON rendering of the ground-serializable parts; opaque parts become null.
    pub fn render(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            EffVal::Unit => Value::String("()".into()),
            EffVal::Ground(g) => render_ground(g),
            EffVal::Name(n) => Value::String(n.to_string()),
            EffVal::Tuple(xs) => Value::Array(xs.iter().map(EffVal::render).collect()),
            EffVal::Tree(t) if t.is_forced() => match t.force() {
                GITree::Ret(g) => render_ground(&g),
                _ => Value::Null,
            },
            _ => Value::Null,
        }
    }
}

fn render_ground(g: &Ground) -> serde_json::Value {
    use serde_json::Value;
    match g {
        Ground::Nat(n) => match u64::try_from(n) {
            Ok(small) => Value::from(small),
            Err(_) => Value::String(n.to_string()),
        },
        Ground::Unit => Value::String("()".into()),
        Ground::Loc(l) => serde_json::json!({ "loc": l }),
        Ground::Pair(_, _) => Value::String(g.to_string()),
    }
}

impl fmt::Debug for EffVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Node payload of `Vis`.
pub struct VisNode {
    pub op: OpId,
    pub input: EffVal,
    /// Output shape the continuation expects.
    pub out: Tag,
    pub cont: Cont,
}

/// A guarded interaction tree.
#[derive(Clone)]
pub enum GITree {
    Ret(Ground),
    Fun(Later<FunBody>),
    Err(ErrorKind),
    Tau(Later<GITree>),
    Vis(Rc<VisNode>),
}

impl GITree {
    pub fn nat(n: u64) -> Self {
        GITree::Ret(Ground::nat(n))
    }

    pub fn big(n: BigUint) -> Self {
        GITree::Ret(Ground::Nat(n))
    }

    pub fn unit() -> Self {
        GITree::Ret(Ground::Unit)
    }

    pub fn loc(l: usize) -> Self {
        GITree::Ret(Ground::Loc(l))
    }

    pub fn err(e: ErrorKind) -> Self {
        GITree::Err(e)
    }

    pub fn runtime_err() -> Self {
        GITree::Err(ErrorKind::RunTime)
    }

    pub fn pair(a: GITree, b: GITree) -> Self {
        GITree::Ret(Ground::Pair(Rc::new(a), Rc::new(b)))
    }

    /// `Fun(Next(f))`.
    pub fn fun(f: impl Fn(GITree) -> GITree + 'static) -> Self {
        GITree::Fun(Later::now(Rc::new(f) as FunBody))
    }

    pub fn tau(t: Later<GITree>) -> Self {
        GITree::Tau(t)
    }

    /// `Tick = Tau ∘ Next`.
    pub fn tick(t: GITree) -> Self {
        GITree::Tau(Later::now(t))
    }

    /// Tau whose successor is computed on demand.
    pub fn tau_with(f: impl FnOnce() -> GITree + 'static) -> Self {
        GITree::Tau(Later::new(f))
    }

    pub fn vis(op: OpId, input: EffVal, out: Tag, cont: Cont) -> Self {
        GITree::Vis(Rc::new(VisNode {
            op,
            input,
            out,
            cont,
        }))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, GITree::Ret(_) | GITree::Fun(_))
    }

    pub fn head(&self) -> &'static str {
        match self {
            GITree::Ret(_) => "Ret",
            GITree::Fun(_) => "Fun",
            GITree::Err(_) => "Err",
            GITree::Tau(_) => "Tau",
            GITree::Vis(_) => "Vis",
        }
    }

    pub fn as_ground(&self) -> Option<&Ground> {
        match self {
            GITree::Ret(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_nat(&self) -> Option<&BigUint> {
        self.as_ground().and_then(Ground::as_nat)
    }

    pub fn as_u64(&self) -> Option<u64> {
        self.as_nat().and_then(|n| u64::try_from(n).ok())
    }

    /// Short rendering of a value leaf for reports.
    pub fn render_value(&self) -> String {
        match self {
            GITree::Ret(g) => g.to_string(),
            GITree::Fun(_) => "<fun>".into(),
            GITree::Err(e) => format!("<err {e}>"),
            GITree::Tau(_) => "<tau>".into(),
            GITree::Vis(v) => format!("<vis {}>", v.op),
        }
    }

    /// Peel up to `limit` leading Tau nodes.
    pub fn skip_taus(&self, limit: usize) -> (GITree, usize) {
        let mut cur = self.clone();
        let mut n = 0;
        while n < limit {
            match cur {
                GITree::Tau(t) => {
                    cur = t.force();
                    n += 1;
                }
                _ => break,
            }
        }
        (cur, n)
    }
}

impl fmt::Debug for GITree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GITree::Ret(g) => write!(f, "Ret({g})"),
            GITree::Fun(_) => f.write_str("Fun(..)"),
            GITree::Err(e) => write!(f, "Err({e})"),
            GITree::Tau(t) => write!(f, "Tau({t:?})"),
            GITree::Vis(v) => write!(f, "Vis({}, {:?}, ..)", v.op, v.input),
        }
    }
}

/// True for `Ret(Nat 0)`.
pub fn is_zero(g: &Ground) -> bool {
    matches!(g, Ground::Nat(n) if n.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_wraps_without_collapsing() {
        let t = GITree::tick(GITree::runtime_err());
        match t {
            GITree::Tau(l) => {
                assert!(l.is_forced());
                assert!(matches!(l.force(), GITree::Err(ErrorKind::RunTime)));
            }
            other => panic!("expected Tau, got {other:?}"),
        }
    }

    #[test]
    fn values_are_ret_or_fun() {
        assert!(GITree::nat(1).is_value());
        assert!(GITree::fun(|x| x).is_value());
        assert!(!GITree::runtime_err().is_value());
        assert!(!GITree::tick(GITree::nat(1)).is_value());
    }

    #[test]
    fn ground_equality_refuses_functions() {
        let a = Ground::Pair(Rc::new(GITree::nat(1)), Rc::new(GITree::fun(|x| x)));
        let b = Ground::Pair(Rc::new(GITree::nat(1)), Rc::new(GITree::fun(|x| x)));
        assert_eq!(a.try_eq(&b), None);
        assert_eq!(Ground::nat(2).try_eq(&Ground::nat(2)), Some(true));
        assert_eq!(Ground::Unit.try_eq(&Ground::Loc(0)), Some(false));
    }

    #[test]
    fn skip_taus_counts() {
        let t = GITree::tick(GITree::tick(GITree::nat(5)));
        let (v, n) = t.skip_taus(10);
        assert_eq!(n, 2);
        assert_eq!(v.as_u64(), Some(5));
    }
}
