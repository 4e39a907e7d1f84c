//! Substitution of closed values. Since the substituted value has no free
//! variables, stopping at shadowing binders is enough to avoid capture.

use std::rc::Rc;

use super::syntax::{Expr, Name, E};

pub fn subst(e: &E, x: &str, v: &E) -> E {
    debug_assert!(v.is_closed(), "substituting an open term");
    go(e, x, v)
}

/// Substitute several names at once, left to right.
pub fn subst_many(e: &E, binds: &[(&Name, &E)]) -> E {
    binds.iter().fold(e.clone(), |acc, (x, v)| subst(&acc, x, v))
}

fn go(e: &E, x: &str, v: &E) -> E {
    let s = |c: &E| go(c, x, v);
    let under = |y: &Name, b: &E| if &**y == x { b.clone() } else { go(b, x, v) };
    let out = match &**e {
        Expr::Var(y) if &**y == x => return v.clone(),
        Expr::Nat(_) | Expr::Bool(_) | Expr::Unit | Expr::Var(_) | Expr::Cont(_) | Expr::Loc(_) | Expr::IsPrime => {
            return e.clone()
        }
        Expr::Lam(y, b) => Expr::Lam(y.clone(), under(y, b)),
        Expr::Rec(f, y, b) => {
            let b2 = if &**f == x || &**y == x { b.clone() } else { s(b) };
            Expr::Rec(f.clone(), y.clone(), b2)
        }
        Expr::Callcc(k, b) => Expr::Callcc(k.clone(), under(k, b)),
        Expr::Shift(k, b) => Expr::Shift(k.clone(), under(k, b)),
        Expr::Try(a, exc, h, b) => Expr::Try(s(a), exc.clone(), h.clone(), under(h, b)),
        Expr::LetPair(y, z, a, b) => {
            let b2 = if &**y == x || &**z == x { b.clone() } else { s(b) };
            Expr::LetPair(y.clone(), z.clone(), s(a), b2)
        }
        Expr::App(a, b) => Expr::App(s(a), s(b)),
        Expr::BinOp(op, a, b) => Expr::BinOp(*op, s(a), s(b)),
        Expr::If(a, b, c) => Expr::If(s(a), s(b), s(c)),
        Expr::Throw(a, b) => Expr::Throw(s(a), s(b)),
        Expr::Raise(n, a) => Expr::Raise(n.clone(), s(a)),
        Expr::Reset(a) => Expr::Reset(s(a)),
        Expr::ContApp(a, b) => Expr::ContApp(s(a), s(b)),
        Expr::Embed(a) => Expr::Embed(s(a)),
        Expr::Alloc(a) => Expr::Alloc(s(a)),
        Expr::Deref(a) => Expr::Deref(s(a)),
        Expr::Assign(a, b) => Expr::Assign(s(a), s(b)),
        Expr::Pair(a, b) => Expr::Pair(s(a), s(b)),
        Expr::Replace(a, b) => Expr::Replace(s(a), s(b)),
        Expr::Dealloc(a) => Expr::Dealloc(s(a)),
        Expr::Fork(a, b) => Expr::Fork(s(a), s(b)),
    };
    Rc::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse;
    use crate::lang::syntax::{nat, Lang};

    #[test]
    fn stops_at_shadowing() {
        let e = parse(Lang::Cc, "x + (fun x -> x) x").unwrap();
        let r = subst(&e, "x", &nat(4));
        assert_eq!(r.to_string(), "4 + (fun x -> x) 4");
    }

    #[test]
    fn rec_binds_both() {
        let e = parse(Lang::Cc, "rec f n = f n + g").unwrap();
        assert_eq!(subst(&e, "f", &nat(1)), e);
        assert_eq!(subst(&e, "g", &nat(1)).to_string(), "rec f n = f n + 1");
    }
}
