//! Thread creation.

use std::rc::Rc;

use crate::engine::{OpSig, Reified, Reifier, SubState};
use crate::later::Later;
use crate::tree::{Cont, EffVal, GITree, OpId, Tag};

pub const FAMILY: &str = "fork";
pub const FORK: OpId = OpId::new(FAMILY, "fork");

pub struct Fork;

impl Reifier for Fork {
    fn family(&self) -> &'static str {
        FAMILY
    }

    fn signature(&self) -> Vec<OpSig> {
        vec![OpSig { op: FORK, input: Tag::Tree, output: Tag::Unit }]
    }

    fn initial(&self) -> SubState {
        SubState::Unit
    }

    fn step(&self, _op: OpId, input: &EffVal, state: &SubState, k: &Cont) -> Option<Reified> {
        let child = input.as_tree()?.clone();
        let mut r = Reified::new(k(EffVal::Unit), state.clone());
        r.spawned.push(child);
        Some(r)
    }
}

/// Spawn `a` as a new thread and continue with `()`.
pub fn fork(a: GITree) -> GITree {
    GITree::vis(
        FORK,
        EffVal::Tree(Later::now(a)),
        Tag::Unit,
        Rc::new(|_| Later::now(GITree::unit())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::combine;
    use crate::ops::seq;
    use crate::sched::{run, SchedulerPolicy};

    #[test]
    fn fork_spawns_one_thread() {
        let fx = combine(vec![crate::effects::fork()]).unwrap();
        let r = run(seq(fork(GITree::nat(1)), || GITree::nat(2)), &fx, 10, &SchedulerPolicy::RoundRobin);
        assert_eq!(r.outcome.value().unwrap().as_u64(), Some(2));
        assert!(r.trace.iter().any(|e| e.kind == "spawn" && e.count == Some(1)));
        assert_eq!(r.pool.len(), 2);
    }
}
