//! Delimited continuations over an explicit metacontinuation stack.

use std::rc::Rc;

use crate::engine::{OpSig, Reified, Reifier, SubState};
use crate::later::Later;
use crate::ops::get_val;
use crate::tree::{Cont, EffVal, FunBody, GITree, KFn, OpId, Tag};

pub const FAMILY: &str = "delim";
pub const RESET: OpId = OpId::new(FAMILY, "reset");
pub const SHIFT: OpId = OpId::new(FAMILY, "shift");
pub const POP: OpId = OpId::new(FAMILY, "pop");
pub const APPCONT: OpId = OpId::new(FAMILY, "appcont");

pub struct Delim;

impl Reifier for Delim {
    fn family(&self) -> &'static str {
        FAMILY
    }

    fn signature(&self) -> Vec<OpSig> {
        vec![
            OpSig { op: RESET, input: Tag::Tree, output: Tag::Tree },
            OpSig { op: SHIFT, input: Tag::Control, output: Tag::Tree },
            OpSig { op: POP, input: Tag::Tree, output: Tag::Tree },
            OpSig {
                op: APPCONT,
                input: Tag::Tuple(vec![Tag::Tree, Tag::LaterFun]),
                output: Tag::Tree,
            },
        ]
    }

    fn initial(&self) -> SubState {
        SubState::Conts(Rc::new(Vec::new()))
    }

    fn step(&self, op: OpId, input: &EffVal, state: &SubState, k: &Cont) -> Option<Reified> {
        let SubState::Conts(stack) = state else {
            return None;
        };
        let kk = k.clone();
        let kappa: KFn = Rc::new(move |l| kk(EffVal::Tree(l)));
        match op.name {
            "reset" => {
                let body = input.as_tree()?.clone();
                let mut s = (**stack).clone();
                s.push(kappa);
                Some(Reified::new(body, SubState::Conts(Rc::new(s))))
            }
            "shift" => {
                let EffVal::Control(f) = input else {
                    return None;
                };
                Some(Reified::new(f(kappa), state.clone()))
            }
            "pop" => {
                let v = input.as_tree()?.clone();
                let mut s = (**stack).clone();
                match s.pop() {
                    Some(top) => Some(Reified::new(top(v), SubState::Conts(Rc::new(s)))),
                    None => Some(Reified::new(k(EffVal::Tree(v)), state.clone())),
                }
            }
            "appcont" => {
                let a = input.item(0)?.as_tree()?.clone();
                let EffVal::LaterFun(f) = input.item(1)? else {
                    return None;
                };
                let f = f.clone();
                let mut s = (**stack).clone();
                s.push(kappa);
                Some(Reified::new(
                    Later::new(move || (f.force())(a.force())),
                    SubState::Conts(Rc::new(s)),
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

/// Push the current continuation and run `body`.
pub fn reset(body: Later<GITree>) -> GITree {
    GITree::vis(RESET, EffVal::Tree(body), Tag::Tree, Rc::new(expect_tree))
}

/// Hand the current continuation (up to the nearest delimiter) to `f`.
pub fn shift(f: impl Fn(KFn) -> Later<GITree> + 'static) -> GITree {
    GITree::vis(SHIFT, EffVal::Control(Rc::new(f)), Tag::Tree, Rc::new(expect_tree))
}

/// Return `v` to the top of the metacontinuation.
pub fn pop(v: GITree) -> GITree {
    GITree::vis(POP, EffVal::Tree(Later::now(v)), Tag::Tree, Rc::new(expect_tree))
}

/// `POP′`: evaluate, then pop.
pub fn pop_prime(t: GITree) -> GITree {
    get_val(t, pop)
}

/// Apply a continuation function to `a` with the current continuation pushed.
pub fn appcont(a: Later<GITree>, f: Later<FunBody>) -> GITree {
    GITree::vis(
        APPCONT,
        EffVal::tuple(vec![EffVal::Tree(a), EffVal::LaterFun(f)]),
        Tag::Tree,
        Rc::new(expect_tree),
    )
}

/// `RESET(Later(POP′(body)))`.
pub fn delimit(body: impl FnOnce() -> GITree + 'static) -> GITree {
    reset(Later::new(move || pop_prime(body())))
}

/// `SHIFT` whose body is closed off with `POP′`; `f` receives the
/// continuation as a function value.
pub fn shift_pop(f: impl Fn(GITree) -> GITree + 'static) -> GITree {
    let f = Rc::new(f);
    shift(move |k| {
        let f = f.clone();
        Later::new(move || pop_prime(f(cont_value(k))))
    })
}

/// `Fun(Next(λy. Tau(κ(Next y))))`.
pub fn cont_value(k: KFn) -> GITree {
    GITree::fun(move |y| GITree::Tau(k(Later::now(y))))
}

/// `APPCONT′(x, k)` for a captured continuation `k`.
pub fn appcont_k(x: GITree, k: KFn) -> GITree {
    let body: FunBody = Rc::new(move |a| GITree::Tau(k(Later::now(a))));
    appcont(Later::now(x), Later::now(body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::combine;
    use crate::ops::{get_fun, natop, BinOp};
    use crate::sched::{final_nat, run, SchedulerPolicy};

    fn go(t: GITree) -> crate::sched::Run {
        let fx = combine(vec![crate::effects::delim()]).unwrap();
        run(pop_prime(t), &fx, 500, &SchedulerPolicy::RoundRobin)
    }

    fn call(kv: GITree, x: GITree) -> GITree {
        get_val(x, move |xv| get_fun(kv.clone(), move |f| appcont(Later::now(xv.clone()), f)))
    }

    #[test]
    fn reset_of_value() {
        let r = go(delimit(|| GITree::nat(3)));
        assert_eq!(final_nat(&r), Some(3));
        assert_eq!(r.state.cont_stack_len(), Some(0));
    }

    #[test]
    fn k_twice() {
        let body = || {
            natop(
                BinOp::Add,
                GITree::nat(1),
                shift_pop(|k| call(k.clone(), call(k, GITree::nat(10)))),
            )
        };
        let r = go(delimit(body));
        assert_eq!(final_nat(&r), Some(12));
        assert_eq!(r.state.cont_stack_len(), Some(0));
    }

    #[test]
    fn discarded_continuation() {
        let body = || natop(BinOp::Add, GITree::nat(1), shift_pop(|_| GITree::nat(5)));
        let r = go(natop(BinOp::Add, GITree::nat(100), delimit(body)));
        assert_eq!(final_nat(&r), Some(105));
        assert_eq!(r.state.cont_stack_len(), Some(0));
    }
}
