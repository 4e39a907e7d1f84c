//! Denotations of all five languages as trees.

use std::rc::Rc;

use super::syntax::{Expr, Frame, Lang, Name, E};
use crate::effects::{callcc, delim, exc, fork, store};
use crate::engine::Handler;
use crate::hom::Hom;
use crate::later::Later;
use crate::ops::{app, get_fun, get_ret, get_val, if_nz, is_prime, lift_k, natop, seq};
use crate::tree::{ErrorKind, GITree, Ground};

/// Semantic environment; later bindings shadow earlier ones.
#[derive(Clone, Default)]
pub struct Env {
    vars: Rc<Vec<(Name, GITree)>>,
}

impl Env {
    pub fn lookup(&self, x: &str) -> Option<&GITree> {
        self.vars.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn with(&self, x: &Name, t: GITree) -> Env {
        if &**x == "_" {
            return self.clone();
        }
        let mut v = (*self.vars).clone();
        v.push((x.clone(), t));
        Env { vars: Rc::new(v) }
    }
}

pub fn denote_closed(lang: Lang, e: &E) -> GITree {
    denote(lang, e, &Env::default())
}

fn bool_tree(b: bool) -> GITree {
    GITree::nat(u64::from(b))
}

/// `Thunk(α)`: a single-use function returning `α`; a second call is `Err Lin`.
pub fn thunk(a: GITree) -> GITree {
    store::alloc(GITree::nat(0), move |l| {
        let a = a.clone();
        GITree::fun(move |_| {
            let a = a.clone();
            if_nz(
                store::xchg(l, GITree::nat(1)),
                || GITree::err(ErrorKind::Lin),
                move || a.clone(),
            )
        })
    })
}

/// `Force(α) = APP(α, Ret 0)`.
pub fn force(a: GITree) -> GITree {
    app(a, GITree::nat(0))
}

fn proj(p: &GITree, i: usize) -> GITree {
    match p {
        GITree::Ret(Ground::Pair(a, b)) => {
            if i == 0 {
                (**a).clone()
            } else {
                (**b).clone()
            }
        }
        _ => GITree::runtime_err(),
    }
}

fn loc_or_err(g: &Ground, f: impl FnOnce(usize) -> GITree) -> GITree {
    match g.as_loc() {
        Some(l) => f(l),
        None => GITree::runtime_err(),
    }
}

fn rec_value(lang: Lang, f: Name, x: Name, body: E, env: Env) -> GITree {
    GITree::fun(move |a| {
        let me = rec_value(lang, f.clone(), x.clone(), body.clone(), env.clone());
        let me = if lang == Lang::Aff { GITree::fun(move |_| me.clone()) } else { me };
        denote(lang, &body, &env.with(&f, me).with(&x, a))
    })
}

pub fn denote(lang: Lang, e: &E, env: &Env) -> GITree {
    let d = |x: &E| denote(lang, x, env);
    match &**e {
        Expr::Nat(n) => GITree::big(n.clone()),
        Expr::Bool(b) => bool_tree(*b),
        Expr::Unit => GITree::unit(),
        Expr::Loc(l) => GITree::loc(*l),
        Expr::IsPrime => GITree::fun(|a| {
            get_ret(a, |g| match g.as_nat() {
                Some(n) => GITree::nat(is_prime(n)),
                None => GITree::runtime_err(),
            })
        }),
        Expr::Var(x) => match env.lookup(x) {
            Some(t) if lang == Lang::Aff => force(t.clone()),
            Some(t) => t.clone(),
            None => GITree::runtime_err(),
        },
        Expr::Lam(x, b) => {
            let (x, b, env) = (x.clone(), b.clone(), env.clone());
            GITree::fun(move |a| denote(lang, &b, &env.with(&x, a)))
        }
        Expr::Rec(f, x, b) => rec_value(lang, f.clone(), x.clone(), b.clone(), env.clone()),
        Expr::App(f, a) if lang == Lang::Aff => {
            let tf = d(f);
            get_val(d(a), move |x| app(tf.clone(), thunk(x)))
        }
        Expr::App(f, a) => app(d(f), d(a)),
        Expr::BinOp(op, a, b) => natop(*op, d(a), d(b)),
        Expr::If(c, t, f) => {
            let (t, f, env2, env3) = (t.clone(), f.clone(), env.clone(), env.clone());
            if_nz(d(c), move || denote(lang, &t, &env2), move || denote(lang, &f, &env3))
        }
        Expr::Callcc(k, b) => {
            let (k, b, env) = (k.clone(), b.clone(), env.clone());
            callcc::callcc(move |kappa| {
                let env = env.with(&k, callcc::cont_value(kappa));
                let b = b.clone();
                Later::new(move || denote(lang, &b, &env))
            })
        }
        Expr::Throw(v, k) => {
            let tk = d(k);
            get_val(d(v), move |x| {
                get_fun(tk.clone(), move |f| callcc::throw(Later::now(x.clone()), f))
            })
        }
        Expr::Try(body, name, h, handler) => {
            let (body, h, handler, env, env2) =
                (body.clone(), h.clone(), handler.clone(), env.clone(), env.clone());
            exc::catch(
                name,
                move || denote(lang, &body, &env),
                move |v| denote(lang, &handler, &env2.with(&h, v)),
            )
        }
        Expr::Raise(name, v) => {
            let name = name.clone();
            get_val(d(v), move |x| exc::throw(&name, x))
        }
        Expr::Reset(b) => {
            let (b, env) = (b.clone(), env.clone());
            delim::delimit(move || denote(lang, &b, &env))
        }
        Expr::Shift(k, b) => {
            let (k, b, env) = (k.clone(), b.clone(), env.clone());
            delim::shift_pop(move |kv| denote(lang, &b, &env.with(&k, kv)))
        }
        Expr::ContApp(k, v) => {
            let tk = d(k);
            get_val(d(v), move |x| {
                get_fun(tk.clone(), move |y| delim::appcont(Later::now(x.clone()), y))
            })
        }
        Expr::Embed(b) => {
            let b = b.clone();
            delim::delimit(move || denote_closed(Lang::Delim, &b))
        }
        Expr::Alloc(a) => get_val(d(a), |x| store::alloc(x, GITree::loc)),
        Expr::Deref(a) => get_ret(d(a), |g| loc_or_err(&g, store::read)),
        Expr::Assign(l, r) => {
            let tl = d(l);
            get_val(d(r), move |x| {
                get_ret(tl.clone(), move |g| loc_or_err(&g, |y| store::write(y, x.clone())))
            })
        }
        Expr::Pair(a, b) => {
            let ta = d(a);
            get_val(d(b), move |y| get_val(ta.clone(), move |x| GITree::pair(x, y.clone())))
        }
        Expr::LetPair(x, y, a, b) => {
            let (x, y, b, env) = (x.clone(), y.clone(), b.clone(), env.clone());
            get_val(d(a), move |p| {
                let (x, y, b, env, p2) = (x.clone(), y.clone(), b.clone(), env.clone(), p.clone());
                get_val(thunk(proj(&p, 0)), move |t1| {
                    let (x, y, b, env) = (x.clone(), y.clone(), b.clone(), env.clone());
                    get_val(thunk(proj(&p2, 1)), move |t2| {
                        denote(lang, &b, &env.with(&x, t1.clone()).with(&y, t2))
                    })
                })
            })
        }
        Expr::Replace(l, v) => {
            let tl = d(l);
            get_val(d(v), move |y| {
                get_ret(tl.clone(), move |g| {
                    let y = y.clone();
                    loc_or_err(&g, move |l| {
                        get_val(store::xchg(l, y), move |x| GITree::pair(x, GITree::loc(l)))
                    })
                })
            })
        }
        Expr::Dealloc(a) => get_ret(d(a), |g| loc_or_err(&g, store::dealloc)),
        Expr::Fork(a, b) => {
            let (b, env) = (b.clone(), env.clone());
            seq(fork::fork(d(a)), move || denote(lang, &b, &env))
        }
        Expr::Cont(k) => {
            let h = ctx_hom(lang, k);
            if lang == Lang::Delim {
                GITree::fun(move |x| GITree::tick(delim::pop_prime(h.apply(x))))
            } else {
                let kf = h.to_kfn();
                GITree::fun(move |x| GITree::Tau(kf(Later::now(x))))
            }
        }
    }
}

/// Denotation of one frame as a homomorphism. Frame contents are closed.
pub fn frame_hom(lang: Lang, f: &Frame) -> Hom {
    let d = |x: &E| denote_closed(lang, x);
    match f {
        Frame::AppArg(g) => Hom::AppArgHole(d(g)),
        Frame::AppFun(v) => Hom::AppFunHole(d(v)),
        Frame::BinR(op, l) => Hom::NatOpRight(*op, d(l)),
        Frame::BinL(op, r) => Hom::NatOpLeft(*op, d(r)),
        Frame::IfC(t, e) => {
            let (t, e) = (t.clone(), e.clone());
            Hom::GetVal(Rc::new(move |c| {
                let (t, e) = (t.clone(), e.clone());
                if_nz(c, move || denote_closed(lang, &t), move || denote_closed(lang, &e))
            }))
        }
        Frame::ThrowV(k) => {
            let tk = d(k);
            Hom::GetVal(Rc::new(move |x| {
                get_fun(tk.clone(), move |f| callcc::throw(Later::now(x.clone()), f))
            }))
        }
        Frame::ThrowK(v) => {
            let tv = d(v);
            Hom::GetFun(Rc::new(move |f| callcc::throw(Later::now(tv.clone()), f)))
        }
        Frame::RaiseC(name) => {
            let name = name.clone();
            Hom::GetVal(Rc::new(move |x| exc::throw(&name, x)))
        }
        Frame::ContAppArg(k) => {
            let tk = d(k);
            Hom::GetVal(Rc::new(move |x| {
                get_fun(tk.clone(), move |y| delim::appcont(Later::now(x.clone()), y))
            }))
        }
        Frame::ContAppFun(v) => {
            let tv = d(v);
            Hom::GetFun(Rc::new(move |y| delim::appcont(Later::now(tv.clone()), y)))
        }
        Frame::TryC(..) => panic!("handler frames carry state; use exc_ctx"),
    }
}

/// `⟦K⟧` for contexts without handler frames.
pub fn ctx_hom(lang: Lang, k: &[Frame]) -> Hom {
    k.iter().fold(Hom::Id, |h, f| Hom::compose(h, frame_hom(lang, f)))
}

/// `⟦K⟧` for the exceptions language: the homomorphism up to the innermost
/// handler, and the handler stack the outer frames install.
pub fn exc_ctx(k: &[Frame]) -> (Hom, Vec<Handler>) {
    let mut hom = Hom::Id;
    let mut stack = Vec::new();
    for f in k {
        match f {
            Frame::TryC(name, h, body) => {
                let (h, body) = (h.clone(), body.clone());
                stack.push(Handler {
                    exc: name.clone(),
                    handler: lift_k(move |v| denote(Lang::Exc, &body, &Env::default().with(&h, v))),
                    saved: hom.to_kfn(),
                });
                hom = Hom::GetVal(Rc::new(exc::pop));
            }
            other => hom = Hom::compose(hom, frame_hom(Lang::Exc, other)),
        }
    }
    (hom, stack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{combine, Effects};
    use crate::lang::parser::parse;
    use crate::sched::{final_nat, run, Outcome, SchedulerPolicy};

    fn effects(lang: Lang) -> Effects {
        let fx = match lang {
            Lang::Cc => vec![crate::effects::callcc()],
            Lang::Exc => vec![crate::effects::exc()],
            Lang::Delim => vec![crate::effects::delim()],
            Lang::Embed => vec![crate::effects::delim(), crate::effects::store()],
            Lang::Aff => vec![crate::effects::store(), crate::effects::fork()],
        };
        combine(fx).unwrap()
    }

    fn go(lang: Lang, src: &str) -> crate::sched::Run {
        let e = parse(lang, src).unwrap();
        let mut t = denote_closed(lang, &e);
        if lang == Lang::Delim {
            t = delim::pop_prime(t);
        }
        run(t, &effects(lang), 10_000, &SchedulerPolicy::RoundRobin)
    }

    #[test]
    fn corpus_values() {
        assert_eq!(final_nat(&go(Lang::Cc, "1 + callcc k. throw 41 to k")), Some(42));
        assert_eq!(final_nat(&go(Lang::Cc, "(rec f n = if n then n + f (n - 1) else 0) 4")), Some(10));
        assert_eq!(final_nat(&go(Lang::Exc, "try (fun x -> raise A x) 5 catch A with h. h + 1")), Some(6));
        assert_eq!(final_nat(&go(Lang::Delim, "reset (1 + shift k. k (k 10))")), Some(12));
        assert_eq!(final_nat(&go(Lang::Delim, "10 + reset (2 + shift k. 100)")), Some(110));
        assert_eq!(final_nat(&go(Lang::Embed, "embed { < 1 + shift k. k 1 > }")), Some(2));
        assert_eq!(final_nat(&go(Lang::Aff, "let (a, b) = (1, 2) in a")), Some(1));
    }

    #[test]
    fn uncaught_exception() {
        assert!(matches!(go(Lang::Exc, "raise A 5").outcome, Outcome::Error(ErrorKind::RunTime)));
    }

    #[test]
    fn thunk_is_single_use() {
        let fx = effects(Lang::Aff);
        let once = get_val(thunk(GITree::nat(9)), force);
        assert_eq!(final_nat(&run(once, &fx, 100, &SchedulerPolicy::RoundRobin)), Some(9));
        let twice = get_val(thunk(GITree::nat(9)), |t| seq(force(t.clone()), move || force(t.clone())));
        let r = run(twice, &fx, 100, &SchedulerPolicy::RoundRobin);
        assert!(matches!(r.outcome, Outcome::Error(ErrorKind::Lin)));
    }

    #[test]
    fn double_use_is_lin() {
        let r = go(Lang::Aff, "(fun x -> (x, x)) 5");
        assert!(matches!(r.outcome, Outcome::Error(ErrorKind::Lin)));
    }

    #[test]
    fn stack_restored() {
        let r = go(Lang::Delim, "reset (1 + shift k. k (k 10))");
        assert_eq!(r.state.cont_stack_len(), Some(0));
    }
}
