//! Depth-bounded observational comparison of trees.

use std::rc::Rc;

use crate::later::Later;
use crate::tree::{EffVal, GITree, Ground, KFn, Tag};

/// Tau peeling bound per level in step-insensitive mode.
pub const TAU_BUDGET: usize = 10_000;

pub const DEFAULT_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Probe {
    pub depth: usize,
    /// Ignore finite runs of silent steps.
    pub step_insensitive: bool,
}

impl Probe {
    pub fn strict(depth: usize) -> Self {
        Probe { depth, step_insensitive: false }
    }

    pub fn weak(depth: usize) -> Self {
        Probe { depth, step_insensitive: true }
    }

    pub fn default_strict() -> Self {
        Probe::strict(DEFAULT_DEPTH)
    }

    fn deeper(self) -> Option<Probe> {
        self.depth.checked_sub(1).map(|depth| Probe { depth, ..self })
    }
}

/// Values fed to functions and continuations while probing.
pub fn probe_values() -> Vec<GITree> {
    vec![GITree::nat(0), GITree::nat(1), GITree::nat(3), GITree::unit()]
}

fn probe_outputs(tag: &Tag) -> Vec<EffVal> {
    match tag {
        Tag::Empty => Vec::new(),
        Tag::Unit => vec![EffVal::Unit],
        Tag::Ground => vec![
            EffVal::Ground(Ground::nat(0)),
            EffVal::Ground(Ground::nat(2)),
            EffVal::loc(0),
            EffVal::loc(1),
        ],
        Tag::Tree => probe_values()
            .into_iter()
            .map(|p| EffVal::Tree(Later::now(p)))
            .collect(),
        Tag::Name => vec![EffVal::Name("A".into())],
        _ => Vec::new(),
    }
}

/// `true` when no difference is observable within the probe depth.
pub fn bisim_probe(a: &GITree, b: &GITree, p: Probe) -> bool {
    let (a, b) = if p.step_insensitive {
        (a.skip_taus(TAU_BUDGET).0, b.skip_taus(TAU_BUDGET).0)
    } else {
        (a.clone(), b.clone())
    };
    if p.depth == 0 {
        return true;
    }
    let Some(q) = p.deeper() else { return true };
    match (&a, &b) {
        (GITree::Ret(x), GITree::Ret(y)) => ground_eq(x, y, q),
        (GITree::Err(x), GITree::Err(y)) => x == y,
        (GITree::Fun(f), GITree::Fun(g)) => {
            let (f, g) = (f.force(), g.force());
            probe_values().into_iter().all(|v| bisim_probe(&f(v.clone()), &g(v), q))
        }
        (GITree::Tau(x), GITree::Tau(y)) => bisim_probe(&x.force(), &y.force(), q),
        (GITree::Vis(x), GITree::Vis(y)) => {
            x.op == y.op
                && x.out == y.out
                && input_eq(&x.input, &y.input, q)
                && probe_outputs(&x.out)
                    .into_iter()
                    .all(|o| bisim_probe(&(x.cont)(o.clone()).force(), &(y.cont)(o).force(), q))
        }
        _ => false,
    }
}

fn ground_eq(x: &Ground, y: &Ground, p: Probe) -> bool {
    match (x, y) {
        (Ground::Pair(a1, a2), Ground::Pair(b1, b2)) => {
            bisim_probe(a1, b1, p) && bisim_probe(a2, b2, p)
        }
        _ => x.try_eq(y) == Some(true),
    }
}

fn kfn_eq(f: &KFn, g: &KFn, p: Probe) -> bool {
    probe_values().into_iter().all(|v| {
        bisim_probe(&f(Later::now(v.clone())).force(), &g(Later::now(v)).force(), p)
    })
}

fn input_eq(a: &EffVal, b: &EffVal, p: Probe) -> bool {
    match (a, b) {
        (EffVal::Unit, EffVal::Unit) => true,
        (EffVal::Ground(x), EffVal::Ground(y)) => ground_eq(x, y, p),
        (EffVal::Name(x), EffVal::Name(y)) => x == y,
        (EffVal::Tree(x), EffVal::Tree(y)) => bisim_probe(&x.force(), &y.force(), p),
        (EffVal::Cont(f), EffVal::Cont(g)) => kfn_eq(f, g, p),
        (EffVal::LaterFun(f), EffVal::LaterFun(g)) => {
            let (f, g) = (f.force(), g.force());
            probe_values().into_iter().all(|v| bisim_probe(&f(v.clone()), &g(v), p))
        }
        (EffVal::Control(f), EffVal::Control(g)) => {
            let id: KFn = Rc::new(|l| l);
            bisim_probe(&f(id.clone()).force(), &g(id).force(), p)
        }
        (EffVal::Atomic(f), EffVal::Atomic(g)) => probe_values().into_iter().all(|v| {
            match (f(v.clone()), g(v)) {
                (Some((r1, n1)), Some((r2, n2))) => {
                    bisim_probe(&r1, &r2, p) && bisim_probe(&n1, &n2, p)
                }
                (None, None) => true,
                _ => false,
            }
        }),
        (EffVal::Tuple(xs), EffVal::Tuple(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| input_eq(x, y, p))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{app, natop, BinOp};

    #[test]
    fn ticks_matter_only_when_strict() {
        let a = GITree::nat(2);
        let b = GITree::tick(GITree::tick(GITree::nat(2)));
        assert!(!bisim_probe(&a, &b, Probe::strict(4)));
        assert!(bisim_probe(&a, &b, Probe::weak(4)));
    }

    #[test]
    fn functions_compared_pointwise() {
        let f = GITree::fun(|x| natop(BinOp::Add, x, GITree::nat(0)));
        let g = GITree::fun(|x| natop(BinOp::Sub, x, GITree::nat(0)));
        let h = GITree::fun(|_| GITree::nat(0));
        assert!(bisim_probe(&f, &g, Probe::strict(3)));
        assert!(!bisim_probe(&f, &h, Probe::strict(3)));
    }

    #[test]
    fn app_is_one_tick() {
        let t = app(GITree::fun(|x| x), GITree::nat(1));
        assert!(bisim_probe(&t, &GITree::tick(GITree::nat(1)), Probe::strict(4)));
    }

    #[test]
    fn depth_zero_accepts_anything() {
        assert!(bisim_probe(&GITree::nat(0), &GITree::nat(1), Probe::strict(0)));
    }

    #[test]
    fn errors_compare_by_kind() {
        let lin = GITree::err(crate::tree::ErrorKind::Lin);
        assert!(bisim_probe(&lin, &lin.clone(), Probe::strict(2)));
        assert!(!bisim_probe(&lin, &GITree::runtime_err(), Probe::strict(2)));
    }
}
