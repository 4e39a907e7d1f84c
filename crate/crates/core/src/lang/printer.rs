//! Pretty-printer producing text the parser reads back to the same tree.

use std::fmt;

use super::syntax::{Expr, Frame};

const PREFIX: u8 = 0;
const ASSIGN: u8 = 1;
const CONTAPP: u8 = 2;
const ADDSUB: u8 = 3;
const APP: u8 = 4;
const HEADED: u8 = 5;
const ATOM: u8 = 6;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Lam(..)
        | Expr::Rec(..)
        | Expr::Callcc(..)
        | Expr::Shift(..)
        | Expr::Try(..)
        | Expr::Raise(..)
        | Expr::Throw(..)
        | Expr::If(..)
        | Expr::LetPair(..)
        | Expr::Fork(..) => PREFIX,
        Expr::Assign(..) => ASSIGN,
        Expr::ContApp(..) => CONTAPP,
        Expr::BinOp(..) => ADDSUB,
        Expr::App(..) => APP,
        Expr::Alloc(_) | Expr::Dealloc(_) => HEADED,
        _ => ATOM,
    }
}

struct At<'a>(&'a Expr, u8);

impl fmt::Display for At<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if level(self.0) < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Nat(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Unit => f.write_str("()"),
            Expr::Var(x) => f.write_str(x),
            Expr::Lam(x, b) => write!(f, "fun {x} -> {b}"),
            Expr::Rec(g, x, b) => write!(f, "rec {g} {x} = {b}"),
            Expr::App(a, b) => write!(f, "{} {}", At(a, APP), At(b, HEADED)),
            Expr::BinOp(op, a, b) => write!(f, "{} {op} {}", At(a, ADDSUB), At(b, APP)),
            Expr::If(a, b, c) => write!(f, "if {a} then {b} else {c}"),
            Expr::Callcc(k, b) => write!(f, "callcc {k}. {b}"),
            Expr::Throw(a, b) => write!(f, "throw {a} to {b}"),
            Expr::Try(a, x, h, b) => write!(f, "try {a} catch {x} with {h}. {b}"),
            Expr::Raise(x, b) => write!(f, "raise {x} {b}"),
            Expr::Reset(b) => write!(f, "< {b} >"),
            Expr::Shift(k, b) => write!(f, "shift {k}. {b}"),
            Expr::ContApp(a, b) => write!(f, "{} @ {}", At(a, ADDSUB), At(b, CONTAPP)),
            Expr::Embed(b) => write!(f, "embed {{ {b} }}"),
            Expr::Alloc(b) => write!(f, "alloc {}", At(b, ATOM)),
            Expr::Dealloc(b) => write!(f, "dealloc {}", At(b, ATOM)),
            Expr::Deref(b) => write!(f, "!{}", At(b, ATOM)),
            Expr::Assign(a, b) => write!(f, "{} := {}", At(a, CONTAPP), At(b, CONTAPP)),
            Expr::Pair(a, b) => write!(f, "({a}, {b})"),
            Expr::LetPair(x, y, a, b) => write!(f, "let ({x}, {y}) = {a} in {b}"),
            Expr::Replace(a, b) => write!(f, "replace({a}, {b})"),
            Expr::Fork(a, b) => write!(f, "fork {{ {a} }}; {b}"),
            Expr::Cont(k) => write!(f, "<cont/{}>", k.len()),
            Expr::Loc(l) => write!(f, "<loc {l}>"),
            Expr::IsPrime => f.write_str("isprime"),
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hole = Expr::Var("□".into());
        write!(f, "{}", self.plug(hole.into()))
    }
}

/// Render a context as `[outer, ..., inner]`.
pub fn show_ctx(k: &[Frame]) -> String {
    let parts: Vec<String> = k.iter().map(Frame::to_string).collect();
    format!("[{}]", parts.join(", "))
}
