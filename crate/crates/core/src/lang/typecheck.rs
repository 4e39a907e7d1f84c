//! Type inference for the five languages.

use std::collections::BTreeSet;

use super::syntax::{Expr, Lang, Name, E};
use super::types::{Ctx, Ty, TypeError, Unifier, T};

/// Infer the type of a closed program. Leftover variables default to `nat`.
pub fn typecheck(lang: Lang, e: &E) -> Result<T, TypeError> {
    match lang {
        Lang::Cc | Lang::Exc | Lang::Embed => {
            let mut s = Simple { u: Unifier::default(), lang };
            let t = s.infer(&Ctx::default(), e)?;
            Ok(s.u.finish(&t))
        }
        Lang::Delim => {
            let mut d = Delim::default();
            let (t, a, b) = d.infer(&Ctx::default(), e)?;
            d.u.unify("program", &a, &b)?;
            Ok(d.u.finish(&t))
        }
        Lang::Aff => {
            let mut a = Aff::default();
            let (t, _) = a.infer(&Ctx::default(), e)?;
            Ok(a.u.finish(&t))
        }
    }
}

/// `∅ ⊢ₚ e : τ` in the delimited-control system.
pub fn typecheck_delim_pure(e: &E) -> Result<T, TypeError> {
    let mut d = Delim::default();
    match d.pure(&Ctx::default(), e)? {
        Some(t) => Ok(d.u.finish(&t)),
        None => Err(TypeError::other("pure", format!("`{e}` is not a pure expression"))),
    }
}

fn unsupported(lang: Lang, e: &Expr) -> TypeError {
    TypeError::other("syntax", format!("`{e}` is not typeable in {lang}"))
}

/// Simply typed core shared by cc, exc and embed.
struct Simple {
    u: Unifier,
    lang: Lang,
}

impl Simple {
    fn infer(&mut self, g: &Ctx, e: &E) -> Result<T, TypeError> {
        Ok(match &**e {
            Expr::Nat(_) => Ty::nat(),
            Expr::Unit if self.lang == Lang::Embed => Ty::unit(),
            Expr::Var(x) => g.lookup(x).cloned().ok_or_else(|| TypeError::Unbound(x.to_string()))?,
            Expr::Lam(x, b) => {
                let a = self.u.fresh();
                let r = self.infer(&g.with(x, a.clone()), b)?;
                Ty::arrow(a, r)
            }
            Expr::Rec(f, x, b) => {
                let (a, r) = (self.u.fresh(), self.u.fresh());
                let g2 = g.with(f, Ty::arrow(a.clone(), r.clone())).with(x, a.clone());
                let rb = self.infer(&g2, b)?;
                self.u.unify("rec", &r, &rb)?;
                Ty::arrow(a, r)
            }
            Expr::App(f, a) => {
                let ta = self.infer(g, a)?;
                let tf = self.infer(g, f)?;
                let r = self.u.fresh();
                self.u.unify("app", &tf, &Ty::arrow(ta, r.clone()))?;
                r
            }
            Expr::BinOp(_, a, b) => {
                let tb = self.infer(g, b)?;
                self.u.unify("natop", &tb, &Ty::nat())?;
                let ta = self.infer(g, a)?;
                self.u.unify("natop", &ta, &Ty::nat())?;
                Ty::nat()
            }
            Expr::If(c, t, f) => {
                let tc = self.infer(g, c)?;
                self.u.unify("if", &tc, &Ty::nat())?;
                let tt = self.infer(g, t)?;
                let tf = self.infer(g, f)?;
                self.u.unify("if", &tt, &tf)?;
                tt
            }
            Expr::Callcc(k, b) if self.lang == Lang::Cc => {
                let t = self.u.fresh();
                let tb = self.infer(&g.with(k, Ty::cont(t.clone())), b)?;
                self.u.unify("callcc", &t, &tb)?;
                t
            }
            Expr::Throw(v, k) if self.lang == Lang::Cc => {
                let tv = self.infer(g, v)?;
                let tk = self.infer(g, k)?;
                self.u.unify("throw", &tk, &Ty::cont(tv))?;
                self.u.fresh()
            }
            Expr::Try(body, _, h, handler) if self.lang == Lang::Exc => {
                let tb = self.infer(g, body)?;
                let th = self.infer(&g.with(h, Ty::nat()), handler)?;
                self.u.unify("try", &tb, &th)?;
                tb
            }
            Expr::Raise(_, v) if self.lang == Lang::Exc => {
                let tv = self.infer(g, v)?;
                self.u.unify("raise", &tv, &Ty::nat())?;
                self.u.fresh()
            }
            Expr::Embed(b) if self.lang == Lang::Embed => {
                if !b.is_closed() {
                    return Err(TypeError::other("embed", "embedded term must be closed"));
                }
                let t = typecheck_delim_pure(b)?;
                let mut probe = Unifier::default();
                probe.unify("embed", &t, &Ty::nat())?;
                Ty::nat()
            }
            Expr::Alloc(a) if self.lang == Lang::Embed => Ty::reference(self.infer(g, a)?),
            Expr::Deref(a) => {
                let ta = self.infer(g, a)?;
                let t = self.u.fresh();
                self.u.unify("deref", &ta, &Ty::reference(t.clone()))?;
                t
            }
            Expr::Assign(l, r) => {
                let tr = self.infer(g, r)?;
                let tl = self.infer(g, l)?;
                self.u.unify("assign", &tl, &Ty::reference(tr))?;
                Ty::unit()
            }
            Expr::Loc(_) if self.lang == Lang::Embed => Ty::reference(self.u.fresh()),
            other => return Err(unsupported(self.lang, other)),
        })
    }
}

/// Answer-type-threading system. A judgment `(τ, α, β)` reads: plugged into a
/// context taking τ to α, the whole has type β.
#[derive(Default)]
struct Delim {
    u: Unifier,
}

impl Delim {
    fn pure(&mut self, g: &Ctx, e: &E) -> Result<Option<T>, TypeError> {
        Ok(Some(match &**e {
            Expr::Nat(_) => Ty::nat(),
            Expr::IsPrime => {
                let b = self.u.fresh();
                Ty::darrow(Ty::nat(), b.clone(), Ty::nat(), b)
            }
            Expr::Var(x) => g.lookup(x).cloned().ok_or_else(|| TypeError::Unbound(x.to_string()))?,
            Expr::Lam(x, b) => {
                let s = self.u.fresh();
                let (t, a, bt) = self.infer(&g.with(x, s.clone()), b)?;
                Ty::darrow(s, a, t, bt)
            }
            Expr::Rec(f, x, b) => {
                let (s, a, t, bt) = (self.u.fresh(), self.u.fresh(), self.u.fresh(), self.u.fresh());
                let ft = Ty::darrow(s.clone(), a.clone(), t.clone(), bt.clone());
                let (t2, a2, b2) = self.infer(&g.with(f, ft.clone()).with(x, s), b)?;
                self.u.unify("rec", &t, &t2)?;
                self.u.unify("rec", &a, &a2)?;
                self.u.unify("rec", &bt, &b2)?;
                ft
            }
            Expr::Reset(b) => {
                let (t, a, s) = self.infer(g, b)?;
                self.u.unify("reset", &t, &a)?;
                s
            }
            _ => return Ok(None),
        }))
    }

    fn infer(&mut self, g: &Ctx, e: &E) -> Result<(T, T, T), TypeError> {
        if let Some(t) = self.pure(g, e)? {
            let a = self.u.fresh();
            return Ok((t, a.clone(), a));
        }
        Ok(match &**e {
            Expr::App(f, x) => {
                // argument first: x : σ (γ, δ), f : σ/α → τ/β (β, γ)
                let (s, gm, dl) = self.infer(g, x)?;
                let (tf, b, gm2) = self.infer(g, f)?;
                self.u.unify("app", &gm, &gm2)?;
                let (a, t) = (self.u.fresh(), self.u.fresh());
                self.u.unify("app", &tf, &Ty::darrow(s, a.clone(), t.clone(), b))?;
                (t, a, dl)
            }
            Expr::BinOp(_, l, r) => {
                let (tl, a, b) = self.infer(g, l)?;
                let (tr, b2, s) = self.infer(g, r)?;
                self.u.unify("natop", &tl, &Ty::nat())?;
                self.u.unify("natop", &tr, &Ty::nat())?;
                self.u.unify("natop", &b, &b2)?;
                (Ty::nat(), a, s)
            }
            Expr::If(c, t, f) => {
                let (tc, b, a) = self.infer(g, c)?;
                self.u.unify("if", &tc, &Ty::nat())?;
                let (tt, s, b1) = self.infer(g, t)?;
                let (tf, s2, b2) = self.infer(g, f)?;
                for (x, y) in [(&tt, &tf), (&s, &s2), (&b1, &b2), (&b, &b1)] {
                    self.u.unify("if", x, y)?;
                }
                (tt, s, a)
            }
            Expr::Shift(k, b) => {
                let (t, a) = (self.u.fresh(), self.u.fresh());
                let (s, s2, bt) = self.infer(&g.with(k, Ty::dcont(t.clone(), a.clone())), b)?;
                self.u.unify("shift", &s, &s2)?;
                (t, a, bt)
            }
            Expr::ContApp(k, x) => {
                let (t, dl, b) = self.infer(g, x)?;
                let (tk, s, dl2) = self.infer(g, k)?;
                self.u.unify("contapp", &dl, &dl2)?;
                let a = self.u.fresh();
                self.u.unify("contapp", &tk, &Ty::dcont(t, a.clone()))?;
                (a, s, b)
            }
            other => return Err(unsupported(Lang::Delim, other)),
        })
    }
}

/// Affine system: each judgment also reports the variables it consumed.
#[derive(Default)]
struct Aff {
    u: Unifier,
}

type Used = BTreeSet<Name>;

fn disjoint(a: &Used, b: &Used) -> Result<(), TypeError> {
    match a.intersection(b).next() {
        Some(x) => Err(TypeError::Reused(x.to_string())),
        None => Ok(()),
    }
}

fn join(mut a: Used, b: Used) -> Result<Used, TypeError> {
    disjoint(&a, &b)?;
    a.extend(b);
    Ok(a)
}

fn without(mut u: Used, names: &[&Name]) -> Used {
    for n in names {
        u.remove(*n);
    }
    u
}

impl Aff {
    fn infer(&mut self, g: &Ctx, e: &E) -> Result<(T, Used), TypeError> {
        Ok(match &**e {
            Expr::Nat(_) => (Ty::nat(), Used::new()),
            Expr::Bool(_) => (Ty::bool(), Used::new()),
            Expr::Unit => (Ty::unit(), Used::new()),
            Expr::Var(x) => {
                let t = g.lookup(x).cloned().ok_or_else(|| TypeError::Unbound(x.to_string()))?;
                (t, [x.clone()].into())
            }
            Expr::Lam(x, b) => {
                let s = self.u.fresh();
                let (t, used) = self.infer(&g.with(x, s.clone()), b)?;
                (Ty::arrow(s, t), without(used, &[x]))
            }
            Expr::App(f, a) => {
                let (ta, ua) = self.infer(g, a)?;
                let (tf, uf) = self.infer(g, f)?;
                let r = self.u.fresh();
                self.u.unify("app", &tf, &Ty::arrow(ta, r.clone()))?;
                (r, join(uf, ua)?)
            }
            Expr::Pair(a, b) => {
                let (tb, ub) = self.infer(g, b)?;
                let (ta, ua) = self.infer(g, a)?;
                (Ty::tensor(ta, tb), join(ua, ub)?)
            }
            Expr::LetPair(x, y, a, b) => {
                if x == y && &**x != "_" {
                    return Err(TypeError::other("let-pair", format!("`{x}` bound twice")));
                }
                let (ta, ua) = self.infer(g, a)?;
                let (s1, s2) = (self.u.fresh(), self.u.fresh());
                self.u.unify("let-pair", &ta, &Ty::tensor(s1.clone(), s2.clone()))?;
                let (tb, ub) = self.infer(&g.with(x, s1).with(y, s2), b)?;
                (tb, join(ua, without(ub, &[x, y]))?)
            }
            Expr::Alloc(a) => {
                let (t, u) = self.infer(g, a)?;
                (Ty::reference(t), u)
            }
            Expr::Dealloc(a) => {
                let (t, u) = self.infer(g, a)?;
                let s = self.u.fresh();
                self.u.unify("dealloc", &t, &Ty::reference(s))?;
                (Ty::unit(), u)
            }
            Expr::Replace(l, v) => {
                let (tv, uv) = self.infer(g, v)?;
                let (tl, ul) = self.infer(g, l)?;
                let old = self.u.fresh();
                self.u.unify("replace", &tl, &Ty::reference(old.clone()))?;
                (Ty::tensor(old, Ty::reference(tv)), join(ul, uv)?)
            }
            Expr::Fork(a, b) => {
                let (ta, ua) = self.infer(g, a)?;
                self.u.unify("fork", &ta, &Ty::unit())?;
                let (tb, ub) = self.infer(g, b)?;
                (tb, join(ua, ub)?)
            }
            Expr::BinOp(_, a, b) => {
                let (tb, ub) = self.infer(g, b)?;
                let (ta, ua) = self.infer(g, a)?;
                self.u.unify("natop", &ta, &Ty::nat())?;
                self.u.unify("natop", &tb, &Ty::nat())?;
                (Ty::nat(), join(ua, ub)?)
            }
            Expr::If(c, t, f) => {
                let (tc, uc) = self.infer(g, c)?;
                self.u.unify("if", &tc, &Ty::bool())?;
                let (tt, ut) = self.infer(g, t)?;
                let (tf, uf) = self.infer(g, f)?;
                self.u.unify("if", &tt, &tf)?;
                let mut branches = ut;
                branches.extend(uf);
                (tt, join(uc, branches)?)
            }
            other => return Err(unsupported(Lang::Aff, other)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse;

    fn ty(lang: Lang, src: &str) -> Result<String, TypeError> {
        typecheck(lang, &parse(lang, src).unwrap()).map(|t| t.to_string())
    }

    #[test]
    fn cc_rules() {
        assert_eq!(ty(Lang::Cc, "callcc k. 5").unwrap(), "nat");
        assert_eq!(ty(Lang::Cc, "1 + callcc k. throw 41 to k").unwrap(), "nat");
        assert!(ty(Lang::Cc, "throw 1 to 2").is_err());
        assert!(matches!(ty(Lang::Cc, "x"), Err(TypeError::Unbound(_))));
    }

    #[test]
    fn exc_rules() {
        assert_eq!(ty(Lang::Exc, "try (fun x -> raise A x) 5 catch A with h. h + 1").unwrap(), "nat");
        assert!(ty(Lang::Exc, "try 1 catch A with h. fun x -> x").is_err());
    }

    #[test]
    fn delim_rules() {
        assert_eq!(ty(Lang::Delim, "reset (1 + shift k. k (k 10))").unwrap(), "nat");
        assert_eq!(ty(Lang::Delim, "10 + reset (2 + shift k. 100)").unwrap(), "nat");
        assert!(ty(Lang::Delim, "shift k. k").is_err());
        assert!(ty(Lang::Delim, "reset (1 + shift k. k @ fun x -> x)").is_err());
        assert_eq!(ty(Lang::Delim, "reset (1 + shift k. fun x -> x)").unwrap(), "nat/nat -> nat/nat");
    }

    #[test]
    fn answer_type_modification() {
        // the body's context answers nat -> nat, the shift changes it
        assert_eq!(
            ty(Lang::Delim, "reset ((rec f x = (fun b -> b) (shift k. x - 1)) 2)").unwrap(),
            "nat"
        );
    }

    #[test]
    fn embed_rules() {
        assert_eq!(ty(Lang::Embed, "embed { < 1 + shift k. k 1 > }").unwrap(), "nat");
        assert!(ty(Lang::Embed, "embed { shift k. 5 }").is_err());
        assert_eq!(ty(Lang::Embed, "alloc 1").unwrap(), "ref nat");
        assert!(ty(Lang::Embed, "reset 1").is_err());
    }

    #[test]
    fn affine_rules() {
        assert_eq!(ty(Lang::Aff, "(fun x -> x) 1").unwrap(), "nat");
        assert!(matches!(ty(Lang::Aff, "(fun x -> (x, x)) 5"), Err(TypeError::Reused(_))));
        assert_eq!(ty(Lang::Aff, "fork { dealloc (alloc 1) }; 5").unwrap(), "nat");
        assert_eq!(ty(Lang::Aff, "replace(alloc 1, true)").unwrap(), "nat * ref bool");
        assert_eq!(ty(Lang::Aff, "fun x -> if true then x else x").unwrap(), "nat -> nat");
        assert!(ty(Lang::Aff, "fun x -> if x then x else false").is_err());
        assert_eq!(ty(Lang::Aff, "let (_, _) = (1, 2) in ()").unwrap(), "unit");
    }
}
