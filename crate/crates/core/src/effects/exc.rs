//! Named exceptions with a handler stack.

use std::rc::Rc;

use crate::engine::{Handler, OpSig, Reified, Reifier, SubState};
use crate::later::Later;
use crate::ops::{get_val, lift_k, unreachable_cont};
use crate::tree::{Cont, EffVal, GITree, KFn, OpId, Tag};

pub const FAMILY: &str = "exc";
pub const REGISTER: OpId = OpId::new(FAMILY, "register");
pub const THROW: OpId = OpId::new(FAMILY, "throw");
pub const POP: OpId = OpId::new(FAMILY, "pop");

pub struct Exceptions;

impl Reifier for Exceptions {
    fn family(&self) -> &'static str {
        FAMILY
    }

    fn signature(&self) -> Vec<OpSig> {
        vec![
            OpSig {
                op: REGISTER,
                input: Tag::Tuple(vec![Tag::Name, Tag::Cont, Tag::Tree]),
                output: Tag::Tree,
            },
            OpSig {
                op: THROW,
                input: Tag::Tuple(vec![Tag::Name, Tag::Tree]),
                output: Tag::Empty,
            },
            OpSig { op: POP, input: Tag::Tree, output: Tag::Tree },
        ]
    }

    fn initial(&self) -> SubState {
        SubState::Handlers(Rc::new(Vec::new()))
    }

    fn step(&self, op: OpId, input: &EffVal, state: &SubState, k: &Cont) -> Option<Reified> {
        let SubState::Handlers(stack) = state else {
            return None;
        };
        match op.name {
            "register" => {
                let exc = input.item(0)?.as_name()?.clone();
                let EffVal::Cont(handler) = input.item(1)? else {
                    return None;
                };
                let body = input.item(2)?.as_tree()?.clone();
                let kk = k.clone();
                let saved: KFn = Rc::new(move |l| kk(EffVal::Tree(l)));
                let mut s = (**stack).clone();
                s.push(Handler {
                    exc,
                    handler: handler.clone(),
                    saved,
                });
                Some(Reified::new(body, SubState::Handlers(Rc::new(s))))
            }
            "pop" => {
                let v = input.as_tree()?.clone();
                let mut s = (**stack).clone();
                match s.pop() {
                    Some(top) => Some(Reified::new((top.saved)(v), SubState::Handlers(Rc::new(s)))),
                    None => Some(Reified::new(k(EffVal::Tree(v)), state.clone())),
                }
            }
            "throw" => {
                let exc = input.item(0)?.as_name()?;
                let v = input.item(1)?.as_tree()?.clone();
                let at = stack.iter().rposition(|h| &h.exc == exc)?;
                let mut s = (**stack).clone();
                let entry = s[at].clone();
                s.truncate(at);
                Some(Reified::new(
                    (entry.saved)((entry.handler)(v)),
                    SubState::Handlers(Rc::new(s)),
                ))
            }
            _ => None,
        }
    }
}

fn expect_tree(o: EffVal) -> Later<GITree> {
    match o {
        EffVal::Tree(t) => t,
        _ => Later::now(GITree::runtime_err()),
    }
}

/// Install a handler for `exc` and run `body` under it.
pub fn reg(exc: &str, handler: KFn, body: Later<GITree>) -> GITree {
    GITree::vis(
        REGISTER,
        EffVal::tuple(vec![EffVal::Name(exc.into()), EffVal::Cont(handler), EffVal::Tree(body)]),
        Tag::Tree,
        Rc::new(expect_tree),
    )
}

/// Leave the innermost handler with value `v`.
pub fn pop(v: GITree) -> GITree {
    GITree::vis(POP, EffVal::Tree(Later::now(v)), Tag::Tree, Rc::new(expect_tree))
}

/// `get_val(t, POP)`.
pub fn popwrap(t: GITree) -> GITree {
    get_val(t, pop)
}

pub fn throw(exc: &str, v: GITree) -> GITree {
    GITree::vis(
        THROW,
        EffVal::tuple(vec![EffVal::Name(exc.into()), EffVal::Tree(Later::now(v))]),
        Tag::Empty,
        unreachable_cont(),
    )
}

/// `try body with exc x -> handler x`.
pub fn catch(
    exc: &str,
    body: impl FnOnce() -> GITree + 'static,
    handler: impl Fn(GITree) -> GITree + 'static,
) -> GITree {
    reg(exc, lift_k(handler), Later::new(move || popwrap(body())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::combine;
    use crate::ops::{get_val, natop, BinOp};
    use crate::sched::{final_nat, run, Outcome, SchedulerPolicy};

    fn go(t: GITree) -> crate::sched::Run {
        let fx = combine(vec![crate::effects::exc()]).unwrap();
        run(t, &fx, 200, &SchedulerPolicy::RoundRobin)
    }

    #[test]
    fn no_raise_returns_body() {
        let r = go(natop(BinOp::Add, GITree::nat(1), catch("A", || GITree::nat(2), |_| GITree::nat(9))));
        assert_eq!(final_nat(&r), Some(3));
        assert_eq!(r.state.handler_depth(), Some(0));
    }

    #[test]
    fn raise_reaches_handler() {
        let body = || natop(BinOp::Add, GITree::nat(100), throw("A", GITree::nat(4)));
        let t = natop(
            BinOp::Add,
            GITree::nat(1),
            catch("A", body, |v| natop(BinOp::Add, v, GITree::nat(10))),
        );
        let r = go(t);
        assert_eq!(final_nat(&r), Some(15));
        assert_eq!(r.state.handler_depth(), Some(0));
    }

    #[test]
    fn nearest_matching_name_wins() {
        let t = catch(
            "A",
            || catch("B", || throw("A", GITree::nat(1)), |_| GITree::nat(50)),
            |v| natop(BinOp::Add, v, GITree::nat(7)),
        );
        assert_eq!(final_nat(&go(t)), Some(8));
    }

    #[test]
    fn inner_shadows_outer() {
        let t = catch(
            "A",
            || catch("A", || throw("A", GITree::nat(1)), |_| GITree::nat(50)),
            |_| GITree::nat(7),
        );
        assert_eq!(final_nat(&go(t)), Some(50));
    }

    #[test]
    fn uncaught_is_error() {
        let r = go(get_val(throw("A", GITree::nat(1)), |v| v));
        assert!(matches!(r.outcome, Outcome::Error(_)));
    }
}
