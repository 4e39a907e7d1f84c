//! Higher-order store and the generic atomic read-modify-write effect.

use std::rc::Rc;

use crate::engine::{Heap, OpSig, Reified, Reifier, SubState};
use crate::later::Later;
use crate::ops::{natop, BinOp};
use crate::tree::{AtomicFn, Cont, EffVal, GITree, Ground, OpId, Tag};

pub const FAMILY: &str = "store";
pub const ALLOC: OpId = OpId::new(FAMILY, "alloc");
pub const READ: OpId = OpId::new(FAMILY, "read");
pub const WRITE: OpId = OpId::new(FAMILY, "write");
pub const DEALLOC: OpId = OpId::new(FAMILY, "dealloc");
pub const ATOMIC: OpId = OpId::new(FAMILY, "atomic");

pub struct Store;

impl Reifier for Store {
    fn family(&self) -> &'static str {
        FAMILY
    }

    fn signature(&self) -> Vec<OpSig> {
        vec![
            OpSig { op: ALLOC, input: Tag::Tree, output: Tag::Ground },
            OpSig { op: READ, input: Tag::Ground, output: Tag::Tree },
            OpSig {
                op: WRITE,
                input: Tag::Tuple(vec![Tag::Ground, Tag::Tree]),
                output: Tag::Unit,
            },
            OpSig { op: DEALLOC, input: Tag::Ground, output: Tag::Unit },
            OpSig {
                op: ATOMIC,
                input: Tag::Tuple(vec![Tag::Ground, Tag::Atomic]),
                output: Tag::Tree,
            },
        ]
    }

    fn initial(&self) -> SubState {
        SubState::Heap(Rc::new(Heap::default()))
    }

    fn step(&self, op: OpId, input: &EffVal, state: &SubState, k: &Cont) -> Option<Reified> {
        let SubState::Heap(heap) = state else {
            return None;
        };
        match op.name {
            "alloc" => {
                let v = input.as_tree()?.clone();
                let mut h = (**heap).clone();
                let l = h.alloc(v);
                Some(Reified::new(k(EffVal::loc(l)), SubState::Heap(Rc::new(h))))
            }
            "read" => {
                let v = heap.get(input.as_loc()?)?.clone();
                Some(Reified::new(k(EffVal::Tree(v)), state.clone()))
            }
            "write" => {
                let l = input.item(0)?.as_loc()?;
                let v = input.item(1)?.as_tree()?.clone();
                heap.get(l)?;
                let mut h = (**heap).clone();
                h.cells.insert(l, v);
                Some(Reified::new(k(EffVal::Unit), SubState::Heap(Rc::new(h))))
            }
            "dealloc" => {
                let l = input.as_loc()?;
                heap.get(l)?;
                let mut h = (**heap).clone();
                h.cells.remove(&l);
                Some(Reified::new(k(EffVal::Unit), SubState::Heap(Rc::new(h))))
            }
            "atomic" => {
                let l = input.item(0)?.as_loc()?;
                let EffVal::Atomic(f) = input.item(1)? else {
                    return None;
                };
                let old = heap.get(l)?.force();
                let (r, new) = f(old)?;
                let mut h = (**heap).clone();
                h.cells.insert(l, Later::now(new));
                Some(Reified::new(
                    k(EffVal::Tree(Later::now(r))),
                    SubState::Heap(Rc::new(h)),
                ))
            }
            _ => None,
        }
    }
}

fn expect_loc(o: EffVal) -> usize {
    o.as_loc().expect("alloc returns a location")
}

fn expect_tree(o: EffVal) -> Later<GITree> {
    match o {
        EffVal::Tree(t) => t,
        _ => Later::now(GITree::runtime_err()),
    }
}

/// `ALLOC(α, k)`.
pub fn alloc(a: GITree, k: impl Fn(usize) -> GITree + 'static) -> GITree {
    GITree::vis(
        ALLOC,
        EffVal::Tree(Later::now(a)),
        Tag::Ground,
        Rc::new(move |o| Later::now(k(expect_loc(o)))),
    )
}

/// `READ(ℓ)`.
pub fn read(l: usize) -> GITree {
    GITree::vis(READ, EffVal::loc(l), Tag::Tree, Rc::new(expect_tree))
}

/// `WRITE(ℓ, α)`.
pub fn write(l: usize, a: GITree) -> GITree {
    GITree::vis(
        WRITE,
        EffVal::tuple(vec![EffVal::loc(l), EffVal::Tree(Later::now(a))]),
        Tag::Unit,
        Rc::new(|_| Later::now(GITree::unit())),
    )
}

/// `DEALLOC(ℓ)`.
pub fn dealloc(l: usize) -> GITree {
    GITree::vis(
        DEALLOC,
        EffVal::loc(l),
        Tag::Unit,
        Rc::new(|_| Later::now(GITree::unit())),
    )
}

/// Generic atomic modification of `ℓ`.
pub fn atomic(l: usize, f: AtomicFn) -> GITree {
    GITree::vis(
        ATOMIC,
        EffVal::tuple(vec![EffVal::loc(l), EffVal::Atomic(f)]),
        Tag::Tree,
        Rc::new(expect_tree),
    )
}

/// Swap in `w`, return the old contents.
pub fn xchg(l: usize, w: GITree) -> GITree {
    atomic(l, Rc::new(move |x| Some((x, w.clone()))))
}

/// Compare-and-swap on ground contents. Returns `Ret 1` on success.
pub fn cas(l: usize, expected: GITree, new: GITree) -> GITree {
    atomic(
        l,
        Rc::new(move |x| {
            let same = x.as_ground()?.try_eq(expected.as_ground()?)?;
            if same {
                Some((GITree::nat(1), new.clone()))
            } else {
                Some((GITree::nat(0), x))
            }
        }),
    )
}

/// Fetch-and-add.
pub fn faa(l: usize, n: u64) -> GITree {
    atomic(
        l,
        Rc::new(move |x| Some((x.clone(), natop(BinOp::Add, x, GITree::nat(n))))),
    )
}

/// Location payload of a value, if any.
pub fn loc_of(g: &Ground) -> Option<usize> {
    g.as_loc()
}
