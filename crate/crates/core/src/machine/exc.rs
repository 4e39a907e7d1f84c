//! CEK-style machine for exceptions.

use std::fmt;

use super::{beta, delta, truthy, Machine, Step};
use crate::lang::printer::show_ctx;
use crate::lang::subst::subst;
use crate::lang::syntax::{Ctx, Expr, Frame, E};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExcConfig {
    Term(E),
    Eval(E, Ctx),
    Cont(Ctx, E),
    Ret(E),
}

impl fmt::Display for ExcConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExcConfig::Term(e) => write!(f, "term<{e}>"),
            ExcConfig::Eval(e, k) => write!(f, "eval<{e}, {}>", show_ctx(k)),
            ExcConfig::Cont(k, v) => write!(f, "cont<{}, {v}>", show_ctx(k)),
            ExcConfig::Ret(v) => write!(f, "ret<{v}>"),
        }
    }
}

pub struct ExcMachine;

fn push(k: &Ctx, f: Frame) -> Ctx {
    let mut k = k.clone();
    k.push(f);
    k
}

impl Machine for ExcMachine {
    type Config = ExcConfig;

    fn inject(e: &E) -> ExcConfig {
        ExcConfig::Term(e.clone())
    }

    fn step(c: &ExcConfig) -> Step<ExcConfig> {
        use ExcConfig::*;
        let stuck = |c: &ExcConfig| Step::Stuck(format!("no rule for {c}"));
        let next = match c {
            Term(e) => Eval(e.clone(), Vec::new()),
            Ret(v) => return Step::Done(v.clone()),
            Eval(e, k) if e.is_value() => Cont(k.clone(), e.clone()),
            Eval(e, k) => match &**e {
                Expr::App(f, a) => Eval(a.clone(), push(k, Frame::AppArg(f.clone()))),
                Expr::BinOp(op, l, r) => Eval(r.clone(), push(k, Frame::BinR(*op, l.clone()))),
                Expr::If(g, t, f) => Eval(g.clone(), push(k, Frame::IfC(t.clone(), f.clone()))),
                Expr::Try(b, x, h, handler) => {
                    Eval(b.clone(), push(k, Frame::TryC(x.clone(), h.clone(), handler.clone())))
                }
                Expr::Raise(x, v) => Eval(v.clone(), push(k, Frame::RaiseC(x.clone()))),
                _ => return stuck(c),
            },
            Cont(k, v) => {
                let Some((top, rest)) = k.split_last() else {
                    return Step::Next(Ret(v.clone()));
                };
                let rest = rest.to_vec();
                match top {
                    Frame::AppArg(f) => Eval(f.clone(), push(&rest, Frame::AppFun(v.clone()))),
                    Frame::AppFun(arg) => match beta(v, arg) {
                        Some(e) => Eval(e, rest),
                        None => return stuck(c),
                    },
                    Frame::BinR(op, l) => Eval(l.clone(), push(&rest, Frame::BinL(*op, v.clone()))),
                    Frame::BinL(op, r) => match delta(*op, v, r) {
                        Some(n) => Cont(rest, n),
                        None => return stuck(c),
                    },
                    Frame::IfC(t, f) => match truthy(v) {
                        Some(b) => Eval(if b { t.clone() } else { f.clone() }, rest),
                        None => return stuck(c),
                    },
                    Frame::TryC(..) => Cont(rest, v.clone()),
                    Frame::RaiseC(x) => {
                        let found = rest
                            .iter()
                            .rposition(|f| matches!(f, Frame::TryC(y, ..) if y == x));
                        match found {
                            Some(i) => {
                                let Frame::TryC(_, h, handler) = &rest[i] else { unreachable!() };
                                Eval(subst(handler, h, v), rest[..i].to_vec())
                            }
                            None => return Step::Stuck(format!("uncaught exception {x}")),
                        }
                    }
                    _ => return stuck(c),
                }
            }
        };
        Step::Next(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse;
    use crate::lang::syntax::Lang;
    use crate::machine::{machine_run, MachineOutcome};

    fn go(src: &str) -> MachineOutcome {
        let e = parse(Lang::Exc, src).unwrap();
        machine_run::<ExcMachine>(ExcMachine::inject(&e), 1000, false).outcome
    }

    #[test]
    fn handlers() {
        assert_eq!(go("try 3 + 4 catch A with h. 0").nat(), Some(&7u32.into()));
        assert_eq!(go("try (fun x -> raise A x) 5 catch A with h. h + 1").nat(), Some(&6u32.into()));
        assert_eq!(
            go("try (try raise A 1 catch B with h. 50) catch A with h. h + 7").nat(),
            Some(&8u32.into())
        );
        assert!(matches!(go("raise A 5"), MachineOutcome::Stuck(_)));
    }

    #[test]
    fn handler_discarded_on_value() {
        let e = parse(Lang::Exc, "try 2 catch A with h. 0").unwrap();
        let r = machine_run::<ExcMachine>(ExcMachine::inject(&e), 100, true);
        assert!(r.configs.iter().any(|c| matches!(c, ExcConfig::Cont(k, _) if k.is_empty())));
        assert!(matches!(r.configs.last(), Some(ExcConfig::Ret(_))));
    }
}
