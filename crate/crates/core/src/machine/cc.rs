//! Machine for undelimited control, decomposing `K[r]` afresh at each step.

use std::rc::Rc;

use super::{beta, delta, truthy, Machine, Step};
use crate::lang::subst::subst;
use crate::lang::syntax::{plug, Ctx, Expr, Frame, E};

pub struct CcMachine;

/// Split `e` into a context and the redex in focus, or `None` for a value.
pub fn decompose(e: &E) -> Option<(Ctx, E)> {
    let mut k = Vec::new();
    let mut cur = e.clone();
    loop {
        let next = match &*cur {
            _ if cur.is_value() => return if k.is_empty() { None } else { unreachable_value() },
            Expr::App(f, a) if !a.is_value() => (Frame::AppArg(f.clone()), a.clone()),
            Expr::App(f, a) if !f.is_value() => (Frame::AppFun(a.clone()), f.clone()),
            Expr::BinOp(op, l, r) if !r.is_value() => (Frame::BinR(*op, l.clone()), r.clone()),
            Expr::BinOp(op, l, r) if !l.is_value() => (Frame::BinL(*op, r.clone()), l.clone()),
            Expr::If(c, t, f) if !c.is_value() => (Frame::IfC(t.clone(), f.clone()), c.clone()),
            Expr::Throw(v, to) if !v.is_value() => (Frame::ThrowV(to.clone()), v.clone()),
            Expr::Throw(v, to) if !to.is_value() => (Frame::ThrowK(v.clone()), to.clone()),
            _ => return Some((k, cur)),
        };
        k.push(next.0);
        cur = next.1;
    }
}

fn unreachable_value() -> Option<(Ctx, E)> {
    unreachable!("decomposition only descends into non-values")
}

impl Machine for CcMachine {
    type Config = E;

    fn inject(e: &E) -> E {
        e.clone()
    }

    fn step(e: &E) -> Step<E> {
        let Some((k, r)) = decompose(e) else {
            return Step::Done(e.clone());
        };
        let reduct = match &*r {
            Expr::App(f, v) => beta(f, v),
            Expr::BinOp(op, a, b) => delta(*op, a, b),
            Expr::If(c, t, f) => truthy(c).map(|b| if b { t.clone() } else { f.clone() }),
            Expr::Callcc(x, b) => Some(subst(b, x, &Rc::new(Expr::Cont(Rc::new(k.clone()))))),
            Expr::Throw(v, to) => match &**to {
                Expr::Cont(k2) => return Step::Next(plug(k2, v.clone())),
                _ => None,
            },
            _ => None,
        };
        match reduct {
            Some(x) => Step::Next(plug(&k, x)),
            None => Step::Stuck(format!("no rule for `{r}`")),
        }
    }
}
