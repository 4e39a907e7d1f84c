//! Evaluation-context homomorphisms as first-class values.

use std::fmt;
use std::rc::Rc;

use crate::bisim::{bisim_probe, Probe};
use crate::effects::delim;
use crate::later::Later;
use crate::ops::{apply_value, app, get_fun_rc, get_ret_rc, get_val, get_val_rc, natop, BinOp, FunFn, RetFn, ValFn};
use crate::tree::{GITree, KFn};

#[derive(Clone)]
pub enum Hom {
    Id,
    /// `outer ∘ inner`.
    Compose(Rc<Hom>, Rc<Hom>),
    /// `APP(□, v)` with `v` already a value.
    AppFunHole(GITree),
    /// `APP(f, □)`.
    AppArgHole(GITree),
    GetVal(ValFn),
    GetFun(FunFn),
    GetRet(RetFn),
    /// `natop(op, □, v)`.
    NatOpLeft(BinOp, GITree),
    /// `natop(op, α, □)`.
    NatOpRight(BinOp, GITree),
    /// `get_val(□, POP)` of the delimited-control family.
    PopPrime,
}

impl fmt::Debug for Hom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hom::Id => f.write_str("id"),
            Hom::Compose(a, b) => write!(f, "{a:?} ∘ {b:?}"),
            Hom::AppFunHole(v) => write!(f, "APP(□, {})", v.render_value()),
            Hom::AppArgHole(_) => f.write_str("APP(f, □)"),
            Hom::GetVal(_) => f.write_str("get_val(□, ..)"),
            Hom::GetFun(_) => f.write_str("get_fun(□, ..)"),
            Hom::GetRet(_) => f.write_str("get_ret(□, ..)"),
            Hom::NatOpLeft(op, v) => write!(f, "(□ {op} {})", v.render_value()),
            Hom::NatOpRight(op, _) => write!(f, "(α {op} □)"),
            Hom::PopPrime => f.write_str("POP′"),
        }
    }
}

impl Hom {
    pub fn compose(outer: Hom, inner: Hom) -> Hom {
        match (&outer, &inner) {
            (Hom::Id, _) => inner,
            (_, Hom::Id) => outer,
            _ => Hom::Compose(Rc::new(outer), Rc::new(inner)),
        }
    }

    /// `self ∘ inner`.
    pub fn then_inside(self, inner: Hom) -> Hom {
        Hom::compose(self, inner)
    }

    pub fn apply(&self, t: GITree) -> GITree {
        match self {
            Hom::Id => t,
            Hom::Compose(o, i) => o.apply(i.apply(t)),
            Hom::AppFunHole(v) => {
                let v = v.clone();
                get_val(t, move |f| apply_value(f, v.clone()))
            }
            Hom::AppArgHole(f) => app(f.clone(), t),
            Hom::GetVal(f) => get_val_rc(t, f.clone()),
            Hom::GetFun(f) => get_fun_rc(t, f.clone()),
            Hom::GetRet(f) => get_ret_rc(t, f.clone()),
            Hom::NatOpLeft(op, v) => natop(*op, t, v.clone()),
            Hom::NatOpRight(op, a) => natop(*op, a.clone(), t),
            Hom::PopPrime => delim::pop_prime(t),
        }
    }

    /// The homomorphism as a continuation on delayed trees.
    pub fn to_kfn(&self) -> KFn {
        let h = self.clone();
        Rc::new(move |l: Later<GITree>| {
            let h = h.clone();
            l.map(move |t| h.apply(t))
        })
    }

    /// Check the homomorphism equations on `t` up to the probe depth:
    /// commuting with Tick, with Vis continuations and fixing errors.
    pub fn respects(&self, t: &GITree, p: Probe) -> bool {
        self.equations(t, p).iter().all(|b| *b)
    }

    /// The tick, error and vis equations separately.
    pub fn equations(&self, t: &GITree, p: Probe) -> [bool; 3] {
        let tick = bisim_probe(
            &self.apply(GITree::tick(t.clone())),
            &GITree::tick(self.apply(t.clone())),
            p,
        );
        let err = matches!(
            self.apply(GITree::runtime_err()),
            GITree::Err(crate::tree::ErrorKind::RunTime)
        );
        let vis = match t {
            GITree::Vis(v) => {
                let h = self.clone();
                let inner = v.cont.clone();
                let pushed = GITree::vis(
                    v.op,
                    v.input.clone(),
                    v.out.clone(),
                    Rc::new(move |o| {
                        let h = h.clone();
                        inner(o).map(move |x| h.apply(x))
                    }),
                );
                bisim_probe(&self.apply(t.clone()), &pushed, p)
            }
            _ => true,
        };
        [tick, err, vis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::store;

    fn sample_homs() -> Vec<Hom> {
        vec![
            Hom::Id,
            Hom::AppFunHole(GITree::nat(2)),
            Hom::AppArgHole(GITree::fun(|x| x)),
            Hom::NatOpLeft(BinOp::Add, GITree::nat(1)),
            Hom::NatOpRight(BinOp::Sub, GITree::nat(9)),
            Hom::GetRet(Rc::new(GITree::Ret)),
            Hom::PopPrime,
            Hom::compose(Hom::NatOpLeft(BinOp::Add, GITree::nat(1)), Hom::PopPrime),
        ]
    }

    #[test]
    fn all_samples_are_homomorphisms() {
        let t = store::read(0);
        for h in sample_homs() {
            assert!(h.respects(&t, Probe::strict(4)), "{h:?}");
            assert!(h.respects(&GITree::nat(1), Probe::strict(4)), "{h:?}");
        }
    }

    #[test]
    fn composition_applies_inner_first() {
        let h = Hom::compose(
            Hom::NatOpLeft(BinOp::Sub, GITree::nat(1)),
            Hom::NatOpLeft(BinOp::Add, GITree::nat(10)),
        );
        assert_eq!(h.apply(GITree::nat(5)).as_u64(), Some(14));
    }

    #[test]
    fn id_is_unit_for_compose() {
        assert!(matches!(Hom::compose(Hom::Id, Hom::PopPrime), Hom::PopPrime));
        assert!(matches!(Hom::compose(Hom::PopPrime, Hom::Id), Hom::PopPrime));
    }
}
