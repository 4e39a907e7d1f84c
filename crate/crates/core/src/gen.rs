//! Seeded, type-directed program generator for every object language.
//!
//! Sizes count AST nodes and are upper bounds. Recursion only appears in the
//! bounded shape `(rec f n = if n then E + f (n - 1) else E2) c`.

use std::rc::Rc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lang::syntax::{nat, var, Expr, Lang, Name, E};
use crate::lang::{parse, typecheck};
use crate::ops::BinOp;

/// Smallest budget the bounded recursion shape fits in.
const REC_MIN: usize = 13;
const MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no well-typed {lang} program of size {size} after {attempts} attempts")]
pub struct GenError {
    pub lang: &'static str,
    pub size: usize,
    pub attempts: usize,
}

/// One program; retries internally until the result typechecks and survives
/// a print/parse round trip.
pub fn generate(lang: Lang, size: usize, seed: u64) -> Result<E, GenError> {
    let mut g = Gen::new(lang, seed);
    g.program(size)
}

/// `count` programs from one seed.
pub fn generate_many(lang: Lang, count: usize, size: usize, seed: u64) -> Result<Vec<E>, GenError> {
    let mut g = Gen::new(lang, seed);
    (0..count).map(|_| g.program(size)).collect()
}

/// Typechecks and reparses to itself.
pub fn is_valid(lang: Lang, e: &E) -> bool {
    typecheck(lang, e).is_ok() && parse(lang, &e.to_string()).is_ok_and(|p| p == *e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VT {
    Nat,
    Fun,
    Cont,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AT {
    Nat,
    Bool,
    Ref,
}

type Scope = Vec<(Name, VT)>;
type Avail = Vec<(Name, AT)>;

#[derive(Clone, Copy)]
enum Pick {
    Lit,
    Var,
    Bin,
    If,
    LetNat,
    LetFun,
    CallFun,
    Rec,
    Callcc,
    Throw,
    Try,
    Raise,
    Reset,
    Shift,
    ContApp,
}

pub struct Gen {
    rng: ChaCha8Rng,
    lang: Lang,
    fresh: usize,
}

fn rc(e: Expr) -> E {
    Rc::new(e)
}

fn app(f: E, a: E) -> E {
    rc(Expr::App(f, a))
}

fn lam(x: &Name, b: E) -> E {
    rc(Expr::Lam(x.clone(), b))
}

impl Gen {
    pub fn new(lang: Lang, seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            lang,
            fresh: 0,
        }
    }

    pub fn program(&mut self, size: usize) -> Result<E, GenError> {
        let size = size.max(1);
        for _ in 0..MAX_ATTEMPTS {
            self.fresh = 0;
            let e = self.top(size);
            if e.size() <= size && e.is_closed() && is_valid(self.lang, &e) {
                return Ok(e);
            }
        }
        Err(GenError {
            lang: self.lang.name(),
            size,
            attempts: MAX_ATTEMPTS,
        })
    }

    fn top(&mut self, size: usize) -> E {
        match self.lang {
            Lang::Exc if size > 5 => {
                let body = self.nat(size - 4, &mut Vec::new());
                let h = self.name("h");
                let inner = rc(Expr::Try(body, "A".into(), h.clone(), var(&h)));
                let h2 = self.name("h");
                rc(Expr::Try(inner, "B".into(), h2.clone(), var(&h2)))
            }
            Lang::Aff => self.aff(AT::Nat, size, &mut Vec::new()),
            Lang::Embed => self.emb_nat(size, &mut Vec::new()),
            _ => self.nat(size, &mut Vec::new()),
        }
    }

    fn name(&mut self, base: &str) -> Name {
        self.fresh += 1;
        format!("{base}{}", self.fresh).into()
    }

    fn lit(&mut self) -> E {
        nat(self.rng.random_range(0..=5))
    }

    /// Random composition of `total` into `parts` positive pieces.
    fn split(&mut self, total: usize, parts: usize) -> Vec<usize> {
        debug_assert!(total >= parts);
        let mut out = vec![1; parts];
        for _ in 0..total - parts {
            let i = self.rng.random_range(0..parts);
            out[i] += 1;
        }
        out
    }

    fn pick_var<T: Copy + PartialEq>(&mut self, vars: &[(Name, T)], t: T) -> Option<Name> {
        let c: Vec<&Name> = vars.iter().filter(|(_, u)| *u == t).map(|(x, _)| x).collect();
        if c.is_empty() {
            None
        } else {
            Some(c[self.rng.random_range(0..c.len())].clone())
        }
    }

    fn binop(&mut self) -> BinOp {
        if self.rng.random_bool(0.6) {
            BinOp::Add
        } else {
            BinOp::Sub
        }
    }

    // cc, exc and delim: every expression has type nat, every function
    // nat -> nat and every continuation expects a nat.

    fn choices(&self, budget: usize, s: &Scope) -> Vec<(Pick, u32)> {
        let has = |t: VT| s.iter().any(|(_, u)| *u == t);
        let mut v = vec![(Pick::Lit, 1), (Pick::Bin, 4), (Pick::If, 2), (Pick::LetNat, 2)];
        if has(VT::Nat) {
            v.push((Pick::Var, 2));
        }
        if budget >= 5 {
            v.push((Pick::LetFun, 1));
        }
        if has(VT::Fun) {
            v.push((Pick::CallFun, 3));
        }
        if budget >= REC_MIN {
            v.push((Pick::Rec, 1));
        }
        match self.lang {
            Lang::Cc => {
                v.push((Pick::Callcc, 6));
                if has(VT::Cont) {
                    v.push((Pick::Throw, 8));
                }
            }
            Lang::Exc => {
                v.push((Pick::Try, 3));
                v.push((Pick::Raise, 2));
            }
            Lang::Delim | Lang::Embed => {
                v.push((Pick::Reset, 2));
                v.push((Pick::Shift, 3));
                if has(VT::Cont) {
                    v.push((Pick::ContApp, 5));
                }
            }
            Lang::Aff => {}
        }
        v.retain(|(p, _)| budget >= min_cost(*p));
        v
    }

    fn leaf(&mut self, s: &Scope) -> E {
        match self.pick_var(s, VT::Nat) {
            Some(x) if self.rng.random_bool(0.6) => var(&x),
            _ => self.lit(),
        }
    }

    fn nat(&mut self, budget: usize, s: &mut Scope) -> E {
        if budget <= 1 {
            return self.leaf(s);
        }
        let opts = self.choices(budget, s);
        let w = WeightedIndex::new(opts.iter().map(|(_, w)| *w)).expect("weights are positive");
        let pick = opts[w.sample(&mut self.rng)].0;
        match pick {
            Pick::Lit => self.lit(),
            Pick::Var => var(&self.pick_var(s, VT::Nat).expect("offered only with a nat in scope")),
            Pick::Bin => {
                let p = self.split(budget - 1, 2);
                let op = self.binop();
                let (a, b) = (self.nat(p[0], s), self.nat(p[1], s));
                rc(Expr::BinOp(op, a, b))
            }
            Pick::If => {
                let p = self.split(budget - 1, 3);
                let c = self.nat(p[0], s);
                let t = self.nat(p[1], s);
                let e = self.nat(p[2], s);
                rc(Expr::If(c, t, e))
            }
            Pick::LetNat => {
                let p = self.split(budget - 2, 2);
                let x = self.name("x");
                let a = self.nat(p[1], s);
                let b = self.under(s, &x, VT::Nat, |g, s| g.nat(p[0], s));
                app(lam(&x, b), a)
            }
            Pick::LetFun => {
                let p = self.split(budget - 3, 2);
                let (f, x) = (self.name("f"), self.name("x"));
                let fb = self.under(s, &x, VT::Nat, |g, s| g.nat(p[1], s));
                let b = self.under(s, &f, VT::Fun, |g, s| g.nat(p[0], s));
                app(lam(&f, b), lam(&x, fb))
            }
            Pick::CallFun => {
                let f = self.pick_var(s, VT::Fun).expect("offered only with a function in scope");
                app(var(&f), self.nat(budget - 2, s))
            }
            Pick::Rec => self.rec(budget, s),
            Pick::Callcc => {
                let k = self.name("k");
                let b = self.under(s, &k, VT::Cont, |g, s| g.nat(budget - 1, s));
                rc(Expr::Callcc(k, b))
            }
            Pick::Throw => {
                let k = self.pick_var(s, VT::Cont).expect("offered only with a continuation in scope");
                rc(Expr::Throw(self.nat(budget - 2, s), var(&k)))
            }
            Pick::Try => {
                let p = self.split(budget - 1, 2);
                let exc = self.exc_name();
                let h = self.name("h");
                let body = self.nat(p[0], s);
                let handler = self.under(s, &h, VT::Nat, |g, s| g.nat(p[1], s));
                rc(Expr::Try(body, exc, h, handler))
            }
            Pick::Raise => {
                let exc = self.exc_name();
                rc(Expr::Raise(exc, self.nat(budget - 1, s)))
            }
            Pick::Reset => rc(Expr::Reset(self.nat(budget - 1, s))),
            Pick::Shift => {
                let k = self.name("k");
                let b = self.under(s, &k, VT::Cont, |g, s| g.nat(budget - 1, s));
                rc(Expr::Shift(k, b))
            }
            Pick::ContApp => {
                let k = self.pick_var(s, VT::Cont).expect("offered only with a continuation in scope");
                rc(Expr::ContApp(var(&k), self.nat(budget - 2, s)))
            }
        }
    }

    fn exc_name(&mut self) -> Name {
        if self.rng.random_bool(0.5) { "A" } else { "B" }.into()
    }

    fn under<T>(&mut self, s: &mut Scope, x: &Name, t: VT, f: impl FnOnce(&mut Gen, &mut Scope) -> T) -> T {
        s.push((x.clone(), t));
        let r = f(self, s);
        s.pop();
        r
    }

    fn rec(&mut self, budget: usize, s: &mut Scope) -> E {
        let p = self.split(budget - (REC_MIN - 2), 2);
        let (f, n) = (self.name("f"), self.name("n"));
        let step = self.under(s, &n, VT::Nat, |g, s| g.nat(p[0], s));
        let base = self.under(s, &n, VT::Nat, |g, s| g.nat(p[1], s));
        let call = app(var(&f), rc(Expr::BinOp(BinOp::Sub, var(&n), nat(1))));
        let body = rc(Expr::If(var(&n), rc(Expr::BinOp(BinOp::Add, step, call)), base));
        let c = self.rng.random_range(0..=3);
        app(rc(Expr::Rec(f, n, body)), nat(c))
    }

    // embed: nat, ref nat and unit, with closed pure delimited blocks.

    fn emb_nat(&mut self, budget: usize, s: &mut Avail) -> E {
        if budget <= 1 {
            return match self.pick_var(s, AT::Nat) {
                Some(x) if self.rng.random_bool(0.6) => var(&x),
                _ => self.lit(),
            };
        }
        let has_ref = s.iter().any(|(_, t)| *t == AT::Ref);
        let mut opts: Vec<(u8, u32)> = vec![(0, 1), (1, 3), (2, 1), (3, 3), (4, 4)];
        if has_ref {
            opts.push((5, 3));
            if budget >= 6 {
                opts.push((6, 3));
            }
        }
        if budget < 5 {
            opts.retain(|(k, _)| *k != 3);
        }
        if budget < 4 {
            opts.retain(|(k, _)| !matches!(k, 2 | 4));
        }
        if budget < 3 {
            opts.retain(|(k, _)| *k != 1);
        }
        let w = WeightedIndex::new(opts.iter().map(|(_, w)| *w)).expect("weights are positive");
        match opts[w.sample(&mut self.rng)].0 {
            1 => {
                let p = self.split(budget - 1, 2);
                let op = self.binop();
                let (a, b) = (self.emb_nat(p[0], s), self.emb_nat(p[1], s));
                rc(Expr::BinOp(op, a, b))
            }
            2 => {
                let p = self.split(budget - 1, 3);
                let c = self.emb_nat(p[0], s);
                let t = self.emb_nat(p[1], s);
                let e = self.emb_nat(p[2], s);
                rc(Expr::If(c, t, e))
            }
            3 => {
                let p = self.split(budget - 3, 2);
                let r = self.name("r");
                let init = self.emb_nat(p[1], s);
                s.push((r.clone(), AT::Ref));
                let b = self.emb_nat(p[0], s);
                s.pop();
                app(lam(&r, b), rc(Expr::Alloc(init)))
            }
            4 => {
                let mut g = Gen::new(Lang::Delim, self.rng.random());
                let inner = g.nat(budget - 2, &mut Vec::new());
                rc(Expr::Embed(rc(Expr::Reset(inner))))
            }
            5 => {
                let r = self.pick_var(s, AT::Ref).expect("offered only with a reference in scope");
                rc(Expr::Deref(var(&r)))
            }
            6 => {
                let p = self.split(budget - 4, 2);
                let r = self.pick_var(s, AT::Ref).expect("offered only with a reference in scope");
                let v = self.emb_nat(p[1], s);
                let b = self.emb_nat(p[0], s);
                app(lam(&"_".into(), b), rc(Expr::Assign(var(&r), v)))
            }
            _ => self.lit(),
        }
    }

    // aff: variables in `avail` are consumed when used.

    fn take(&mut self, avail: &mut Avail, t: AT) -> Option<Name> {
        let x = self.pick_var(avail, t)?;
        avail.retain(|(y, _)| *y != x);
        Some(x)
    }

    fn aff(&mut self, t: AT, budget: usize, avail: &mut Avail) -> E {
        match t {
            AT::Nat => self.aff_nat(budget, avail),
            AT::Bool => match self.take_sometimes(avail, AT::Bool) {
                Some(x) => var(&x),
                None => rc(Expr::Bool(self.rng.random_bool(0.5))),
            },
            AT::Ref => {
                let x = if budget < 2 { self.take(avail, AT::Ref) } else { self.take_sometimes(avail, AT::Ref) };
                match x {
                    Some(x) => var(&x),
                    None => rc(Expr::Alloc(self.aff_nat(budget.saturating_sub(1).max(1), avail))),
                }
            }
        }
    }

    fn take_sometimes(&mut self, avail: &mut Avail, t: AT) -> Option<Name> {
        if self.rng.random_bool(0.7) {
            self.take(avail, t)
        } else {
            None
        }
    }

    fn aff_nat(&mut self, budget: usize, avail: &mut Avail) -> E {
        if budget <= 1 {
            return match self.take_sometimes(avail, AT::Nat) {
                Some(x) => var(&x),
                None => self.lit(),
            };
        }
        let mut opts: Vec<(u8, u32)> = vec![(0, 1)];
        if budget >= 3 {
            opts.push((1, 4));
        }
        if budget >= 4 {
            opts.extend([(2, 2), (3, 3)]);
        }
        if budget >= 5 {
            opts.push((5, 2));
        }
        if budget >= 7 {
            opts.push((4, 3));
        }
        if budget >= 4 {
            opts.push((6, 2));
        }
        let w = WeightedIndex::new(opts.iter().map(|(_, w)| *w)).expect("weights are positive");
        match opts[w.sample(&mut self.rng)].0 {
            1 => {
                let p = self.split(budget - 1, 2);
                let op = self.binop();
                let b = self.aff_nat(p[1], avail);
                let a = self.aff_nat(p[0], avail);
                rc(Expr::BinOp(op, a, b))
            }
            2 => {
                let p = self.split(budget - 2, 2);
                let c = self.aff(AT::Bool, 1, avail);
                let mut left = avail.clone();
                let mut right = avail.clone();
                let t = self.aff_nat(p[0], &mut left);
                let e = self.aff_nat(p[1], &mut right);
                avail.retain(|v| left.contains(v) && right.contains(v));
                rc(Expr::If(c, t, e))
            }
            3 => {
                let p = self.split(budget - 2, 2);
                let n = if p[1] >= 2 { 3 } else { 2 };
                let ty = [AT::Nat, AT::Bool, AT::Ref][self.rng.random_range(0..n)];
                let x = self.name("x");
                let arg = self.aff(ty, p[1], avail);
                avail.push((x.clone(), ty));
                let b = self.aff_nat(p[0], avail);
                avail.retain(|(y, _)| *y != x);
                app(lam(&x, b), arg)
            }
            4 => {
                let p = self.split(budget - 4, 3);
                let (a, r) = (self.name("a"), self.name("r"));
                let v = self.aff_nat(p[2], avail);
                let l = self.aff(AT::Ref, p[1] + 1, avail);
                avail.push((a.clone(), AT::Nat));
                avail.push((r.clone(), AT::Ref));
                let b = self.aff_nat(p[0], avail);
                avail.retain(|(y, _)| *y != a && *y != r);
                rc(Expr::LetPair(a, r, rc(Expr::Replace(l, v)), b))
            }
            5 => {
                let p = self.split(budget - 2, 3);
                let (a, b) = (self.name("a"), self.name("b"));
                let rhs = self.aff_nat(p[2], avail);
                let lhs = self.aff_nat(p[1], avail);
                avail.push((a.clone(), AT::Nat));
                avail.push((b.clone(), AT::Nat));
                let body = self.aff_nat(p[0], avail);
                avail.retain(|(y, _)| *y != a && *y != b);
                rc(Expr::LetPair(a, b, rc(Expr::Pair(lhs, rhs)), body))
            }
            6 => {
                let p = self.split(budget - 1, 2);
                let child = self.aff_unit(p[0], avail);
                let rest = self.aff_nat(p[1], avail);
                rc(Expr::Fork(child, rest))
            }
            _ => match self.take_sometimes(avail, AT::Nat) {
                Some(x) => var(&x),
                None => self.lit(),
            },
        }
    }

    fn aff_unit(&mut self, budget: usize, avail: &mut Avail) -> E {
        if budget >= 3 && self.rng.random_bool(0.4) {
            return rc(Expr::Dealloc(self.aff(AT::Ref, budget - 1, avail)));
        }
        if budget >= 6 && self.rng.random_bool(0.5) {
            let p = self.split(budget - 4, 2);
            let v = self.aff_nat(p[1], avail);
            let l = self.aff(AT::Ref, p[0] + 1, avail);
            let w: Name = "_".into();
            return rc(Expr::LetPair(w.clone(), w, rc(Expr::Replace(l, v)), rc(Expr::Unit)));
        }
        rc(Expr::Unit)
    }
}

fn min_cost(p: Pick) -> usize {
    match p {
        Pick::Lit | Pick::Var => 1,
        Pick::Callcc | Pick::Raise | Pick::Reset | Pick::Shift => 2,
        Pick::Bin | Pick::Throw | Pick::Try | Pick::ContApp | Pick::CallFun => 3,
        Pick::If | Pick::LetNat => 4,
        Pick::LetFun => 5,
        Pick::Rec => REC_MIN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        for lang in Lang::ALL {
            let a = generate_many(lang, 10, 20, 7).unwrap();
            let b = generate_many(lang, 10, 20, 7).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sizes_are_bounded() {
        for lang in Lang::ALL {
            for size in [1, 2, 5, 20, 40] {
                for e in generate_many(lang, 30, size, size as u64).unwrap() {
                    assert!(e.size() <= size.max(1), "{lang:?} {e}");
                }
            }
        }
    }

    #[test]
    fn exc_programs_handle_both_names() {
        for e in generate_many(Lang::Exc, 20, 20, 3).unwrap() {
            let s = e.to_string();
            assert!(s.starts_with("try try"), "{s}");
        }
    }

    #[test]
    fn control_density_in_cc() {
        let mut control = 0;
        let mut total = 0;
        for e in generate_many(Lang::Cc, 1000, 20, 11).unwrap() {
            control += e.count(&|x| matches!(x, Expr::Callcc(..) | Expr::Throw(..)));
            total += e.size();
        }
        let ratio = control as f64 / total as f64;
        assert!(ratio >= 0.2, "{ratio}");
    }

    #[test]
    fn recursion_only_in_bounded_shape() {
        for lang in [Lang::Cc, Lang::Exc, Lang::Delim] {
            for e in generate_many(lang, 200, 30, 5).unwrap() {
                let recs = e.count(&|x| matches!(x, Expr::Rec(..)));
                let shaped = e.count(&|x| match x {
                    Expr::App(f, c) => matches!((&**f, &**c), (Expr::Rec(..), Expr::Nat(_))),
                    _ => false,
                });
                assert_eq!(recs, shaped, "{e}");
            }
        }
    }
}
