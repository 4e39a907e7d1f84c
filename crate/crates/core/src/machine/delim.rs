//! Machine for shift/reset with an explicit metacontinuation.
//!
//! The application, arithmetic and conditional rules are reconstructed in the
//! same CEK style as the exceptions machine.

use std::fmt;
use std::rc::Rc;

use super::{beta, delta, truthy, Machine, Step};
use crate::lang::printer::show_ctx;
use crate::lang::subst::subst;
use crate::lang::syntax::{Ctx, Expr, Frame, E};

/// Metacontinuation, most recent delimiter last.
pub type MetaK = Vec<Rc<Ctx>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DelimConfig {
    Term(E),
    Eval(E, Ctx, MetaK),
    Cont(Ctx, E, MetaK),
    MCont(MetaK, E),
    Ret(E),
}

fn show_mk(mk: &MetaK) -> String {
    let parts: Vec<String> = mk.iter().rev().map(|k| show_ctx(k)).collect();
    format!("[{}]", parts.join(" . "))
}

impl fmt::Display for DelimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelimConfig::Term(e) => write!(f, "term<{e}>"),
            DelimConfig::Eval(e, k, mk) => write!(f, "eval<{e}, {}, {}>", show_ctx(k), show_mk(mk)),
            DelimConfig::Cont(k, v, mk) => write!(f, "cont<{}, {v}, {}>", show_ctx(k), show_mk(mk)),
            DelimConfig::MCont(mk, v) => write!(f, "mcont<{}, {v}>", show_mk(mk)),
            DelimConfig::Ret(v) => write!(f, "ret<{v}>"),
        }
    }
}

pub struct DelimMachine;

fn push(k: &Ctx, f: Frame) -> Ctx {
    let mut k = k.clone();
    k.push(f);
    k
}

fn push_mk(mk: &MetaK, k: Ctx) -> MetaK {
    let mut mk = mk.clone();
    mk.push(Rc::new(k));
    mk
}

impl Machine for DelimMachine {
    type Config = DelimConfig;

    fn inject(e: &E) -> DelimConfig {
        DelimConfig::Term(e.clone())
    }

    fn step(c: &DelimConfig) -> Step<DelimConfig> {
        use DelimConfig::*;
        let stuck = |c: &DelimConfig| Step::Stuck(format!("no rule for {c}"));
        let next = match c {
            Term(e) => Eval(e.clone(), Vec::new(), Vec::new()),
            Ret(v) => return Step::Done(v.clone()),
            MCont(mk, v) => match mk.split_last() {
                Some((k, rest)) => Cont((**k).clone(), v.clone(), rest.to_vec()),
                None => Ret(v.clone()),
            },
            Eval(e, k, mk) if e.is_value() => Cont(k.clone(), e.clone(), mk.clone()),
            Eval(e, k, mk) => match &**e {
                Expr::ContApp(f, a) => Eval(a.clone(), push(k, Frame::ContAppArg(f.clone())), mk.clone()),
                Expr::Reset(b) => Eval(b.clone(), Vec::new(), push_mk(mk, k.clone())),
                Expr::Shift(x, b) => {
                    let kv = Rc::new(Expr::Cont(Rc::new(k.clone())));
                    Eval(subst(b, x, &kv), Vec::new(), mk.clone())
                }
                Expr::App(f, a) => Eval(a.clone(), push(k, Frame::AppArg(f.clone())), mk.clone()),
                Expr::BinOp(op, l, r) => Eval(r.clone(), push(k, Frame::BinR(*op, l.clone())), mk.clone()),
                Expr::If(g, t, f) => Eval(g.clone(), push(k, Frame::IfC(t.clone(), f.clone())), mk.clone()),
                _ => return stuck(c),
            },
            Cont(k, v, mk) => {
                let Some((top, rest)) = k.split_last() else {
                    return Step::Next(MCont(mk.clone(), v.clone()));
                };
                let rest = rest.to_vec();
                match top {
                    Frame::ContAppArg(f) => Eval(f.clone(), push(&rest, Frame::ContAppFun(v.clone())), mk.clone()),
                    Frame::ContAppFun(arg) => match &**v {
                        Expr::Cont(k2) => Cont((**k2).clone(), arg.clone(), push_mk(mk, rest)),
                        _ => return stuck(c),
                    },
                    Frame::AppArg(f) => Eval(f.clone(), push(&rest, Frame::AppFun(v.clone())), mk.clone()),
                    Frame::AppFun(arg) => match beta(v, arg) {
                        Some(e) => Eval(e, rest, mk.clone()),
                        None => return stuck(c),
                    },
                    Frame::BinR(op, l) => Eval(l.clone(), push(&rest, Frame::BinL(*op, v.clone())), mk.clone()),
                    Frame::BinL(op, r) => match delta(*op, v, r) {
                        Some(n) => Cont(rest, n, mk.clone()),
                        None => return stuck(c),
                    },
                    Frame::IfC(t, f) => match truthy(v) {
                        Some(b) => Eval(if b { t.clone() } else { f.clone() }, rest, mk.clone()),
                        None => return stuck(c),
                    },
                    _ => return stuck(c),
                }
            }
        };
        Step::Next(next)
    }
}
