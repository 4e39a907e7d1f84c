//! Undelimited continuations.

use std::rc::Rc;

use crate::engine::{OpSig, Reified, Reifier, SubState};
use crate::later::Later;
use crate::ops::unreachable_cont;
use crate::tree::{Cont, EffVal, FunBody, GITree, KFn, OpId, Tag};

pub const FAMILY: &str = "cc";
pub const CALLCC: OpId = OpId::new(FAMILY, "callcc");
pub const THROW: OpId = OpId::new(FAMILY, "throw");

pub struct CallCc;

impl Reifier for CallCc {
    fn family(&self) -> &'static str {
        FAMILY
    }

    fn signature(&self) -> Vec<OpSig> {
        vec![
            OpSig { op: CALLCC, input: Tag::Control, output: Tag::Tree },
            OpSig {
                op: THROW,
                input: Tag::Tuple(vec![Tag::Tree, Tag::LaterFun]),
                output: Tag::Empty,
            },
        ]
    }

    fn initial(&self) -> SubState {
        SubState::Unit
    }

    fn step(&self, op: OpId, input: &EffVal, state: &SubState, k: &Cont) -> Option<Reified> {
        match op.name {
            "callcc" => {
                let EffVal::Control(f) = input else {
                    return None;
                };
                let kk = k.clone();
                let kappa: KFn = Rc::new(move |l| kk(EffVal::Tree(l)));
                Some(Reified::new(k(EffVal::Tree(f(kappa))), state.clone()))
            }
            "throw" => {
                let a = input.item(0)?.as_tree()?.clone();
                let EffVal::LaterFun(f) = input.item(1)? else {
                    return None;
                };
                let f = f.clone();
                Some(Reified::new(
                    Later::new(move || (f.force())(a.force())),
                    state.clone(),
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

/// Capture the current continuation and hand it to `f`.
pub fn callcc(f: impl Fn(KFn) -> Later<GITree> + 'static) -> GITree {
    GITree::vis(CALLCC, EffVal::Control(Rc::new(f)), Tag::Tree, Rc::new(expect_tree))
}

/// Abort to the function `f` with argument `a`.
pub fn throw(a: Later<GITree>, f: Later<FunBody>) -> GITree {
    GITree::vis(
        THROW,
        EffVal::tuple(vec![EffVal::Tree(a), EffVal::LaterFun(f)]),
        Tag::Empty,
        unreachable_cont(),
    )
}

/// A captured continuation as a first-class function.
pub fn cont_value(k: KFn) -> GITree {
    GITree::fun(move |y| GITree::Tau(k(Later::now(y))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::combine;
    use crate::ops::{get_fun, get_val, natop, BinOp};
    use crate::sched::{final_nat, run, SchedulerPolicy};

    fn go(t: GITree) -> Option<u64> {
        let fx = combine(vec![crate::effects::callcc()]).unwrap();
        final_nat(&run(t, &fx, 100, &SchedulerPolicy::RoundRobin))
    }

    fn thrower(v: u64) -> impl Fn(KFn) -> Later<GITree> {
        move |k| {
            let kv = cont_value(k);
            Later::now(get_fun(kv, move |f| throw(Later::now(GITree::nat(v)), f)))
        }
    }

    #[test]
    fn unused_continuation_is_transparent() {
        let t = natop(BinOp::Add, GITree::nat(1), callcc(|_| Later::now(GITree::nat(2))));
        assert_eq!(go(t), Some(3));
    }

    #[test]
    fn throw_discards_local_context() {
        let inner = natop(BinOp::Add, GITree::nat(100), get_val(GITree::nat(0), |_| GITree::nat(0)));
        let t = natop(
            BinOp::Add,
            GITree::nat(1),
            callcc(move |k| {
                let kv = cont_value(k);
                let inner = inner.clone();
                Later::now(natop(
                    BinOp::Add,
                    inner,
                    get_fun(kv, |f| throw(Later::now(GITree::nat(10)), f)),
                ))
            }),
        );
        assert_eq!(go(t), Some(11));
    }

    #[test]
    fn plain_thrower() {
        assert_eq!(go(natop(BinOp::Add, GITree::nat(5), callcc(thrower(2)))), Some(7));
    }
}
