//! Abstract syntax shared by all five languages.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ops::BinOp;

pub type Name = Rc<str>;
pub type E = Rc<Expr>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    Cc,
    Exc,
    Delim,
    Embed,
    Aff,
}

impl Lang {
    pub const ALL: [Lang; 5] = [Lang::Cc, Lang::Exc, Lang::Delim, Lang::Embed, Lang::Aff];

    pub fn name(self) -> &'static str {
        match self {
            Lang::Cc => "cc",
            Lang::Exc => "exc",
            Lang::Delim => "delim",
            Lang::Embed => "embed",
            Lang::Aff => "aff",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Lang::Cc => "cc",
            Lang::Exc => "exc",
            Lang::Delim => "dl",
            Lang::Embed => "emb",
            Lang::Aff => "aff",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Lang> {
        Lang::ALL.into_iter().find(|l| l.extension() == ext)
    }

    /// Languages with an abstract machine.
    pub fn has_machine(self) -> bool {
        matches!(self, Lang::Cc | Lang::Exc | Lang::Delim)
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown language `{0}` (expected cc, exc, delim, embed or aff)")]
pub struct UnknownLang(String);

impl FromStr for Lang {
    type Err = UnknownLang;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Lang::ALL
            .into_iter()
            .find(|l| l.name() == s || l.extension() == s)
            .ok_or_else(|| UnknownLang(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Nat(BigUint),
    Bool(bool),
    Unit,
    Var(Name),
    Lam(Name, E),
    /// `rec f x = e`
    Rec(Name, Name, E),
    App(E, E),
    BinOp(BinOp, E, E),
    If(E, E, E),
    Callcc(Name, E),
    Throw(E, E),
    /// `try e1 catch EXC with h. e2`
    Try(E, Name, Name, E),
    Raise(Name, E),
    Reset(E),
    Shift(Name, E),
    ContApp(E, E),
    Embed(E),
    Alloc(E),
    Deref(E),
    Assign(E, E),
    Pair(E, E),
    LetPair(Name, Name, E, E),
    Replace(E, E),
    Dealloc(E),
    Fork(E, E),
    /// Captured context; only produced by the machines.
    Cont(Rc<Ctx>),
    Loc(usize),
    /// Primality test on nats, 1 for prime and 0 otherwise.
    IsPrime,
}

/// One evaluation frame. Application and arithmetic evaluate their right
/// operand first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    /// `e1 □`
    AppArg(E),
    /// `□ v`
    AppFun(E),
    /// `e1 op □`
    BinR(BinOp, E),
    /// `□ op v`
    BinL(BinOp, E),
    /// `if □ then e2 else e3`
    IfC(E, E),
    /// `throw □ to e2`
    ThrowV(E),
    /// `throw v to □`
    ThrowK(E),
    /// `try □ catch EXC with h. e2`
    TryC(Name, Name, E),
    /// `raise EXC □`
    RaiseC(Name),
    /// `e1 @ □`
    ContAppArg(E),
    /// `□ @ v`
    ContAppFun(E),
}

/// Evaluation context, innermost frame last.
pub type Ctx = Vec<Frame>;

impl Frame {
    pub fn plug(&self, e: E) -> E {
        Rc::new(match self {
            Frame::AppArg(f) => Expr::App(f.clone(), e),
            Frame::AppFun(v) => Expr::App(e, v.clone()),
            Frame::BinR(op, l) => Expr::BinOp(*op, l.clone(), e),
            Frame::BinL(op, r) => Expr::BinOp(*op, e, r.clone()),
            Frame::IfC(t, f) => Expr::If(e, t.clone(), f.clone()),
            Frame::ThrowV(k) => Expr::Throw(e, k.clone()),
            Frame::ThrowK(v) => Expr::Throw(v.clone(), e),
            Frame::TryC(x, h, b) => Expr::Try(e, x.clone(), h.clone(), b.clone()),
            Frame::RaiseC(x) => Expr::Raise(x.clone(), e),
            Frame::ContAppArg(k) => Expr::ContApp(k.clone(), e),
            Frame::ContAppFun(v) => Expr::ContApp(e, v.clone()),
        })
    }
}

/// `K[e]`.
pub fn plug(k: &[Frame], e: E) -> E {
    k.iter().rev().fold(e, |acc, f| f.plug(acc))
}

pub fn nat(n: u64) -> E {
    Rc::new(Expr::Nat(BigUint::from(n)))
}

pub fn var(x: &str) -> E {
    Rc::new(Expr::Var(x.into()))
}

impl Expr {
    /// Syntactic values, closed or not.
    pub fn is_value(&self) -> bool {
        matches!(
            self,
            Expr::Nat(_)
                | Expr::Bool(_)
                | Expr::Unit
                | Expr::Lam(..)
                | Expr::Rec(..)
                | Expr::Cont(_)
                | Expr::Loc(_)
                | Expr::IsPrime
        )
    }

    pub fn children(&self) -> Vec<&E> {
        match self {
            Expr::Nat(_)
            | Expr::Bool(_)
            | Expr::Unit
            | Expr::Var(_)
            | Expr::Cont(_)
            | Expr::Loc(_)
            | Expr::IsPrime => Vec::new(),
            Expr::Lam(_, b)
            | Expr::Rec(_, _, b)
            | Expr::Callcc(_, b)
            | Expr::Raise(_, b)
            | Expr::Reset(b)
            | Expr::Shift(_, b)
            | Expr::Embed(b)
            | Expr::Alloc(b)
            | Expr::Deref(b)
            | Expr::Dealloc(b) => vec![b],
            Expr::App(a, b)
            | Expr::BinOp(_, a, b)
            | Expr::Throw(a, b)
            | Expr::Try(a, _, _, b)
            | Expr::ContApp(a, b)
            | Expr::Assign(a, b)
            | Expr::Pair(a, b)
            | Expr::LetPair(_, _, a, b)
            | Expr::Replace(a, b)
            | Expr::Fork(a, b) => vec![a, b],
            Expr::If(a, b, c) => vec![a, b, c],
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        free_into(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Count nodes satisfying `p`.
    pub fn count(&self, p: &dyn Fn(&Expr) -> bool) -> usize {
        usize::from(p(self)) + self.children().into_iter().map(|c| c.count(p)).sum::<usize>()
    }
}

fn free_into(e: &Expr, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let under = |names: &[&Name], body: &Expr, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>| {
        let n = bound.len();
        bound.extend(names.iter().map(|x| (*x).clone()));
        free_into(body, bound, out);
        bound.truncate(n);
    };
    match e {
        Expr::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Expr::Lam(x, b) | Expr::Callcc(x, b) | Expr::Shift(x, b) => under(&[x], b, bound, out),
        Expr::Rec(f, x, b) => under(&[f, x], b, bound, out),
        Expr::Try(a, _, h, b) => {
            free_into(a, bound, out);
            under(&[h], b, bound, out);
        }
        Expr::LetPair(x, y, a, b) => {
            free_into(a, bound, out);
            under(&[x, y], b, bound, out);
        }
        _ => {
            for c in e.children() {
                free_into(c, bound, out);
            }
        }
    }
}
