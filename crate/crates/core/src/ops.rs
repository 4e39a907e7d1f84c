//! Sequencing and application combinators.

use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::later::Later;
use crate::tree::{is_zero, ErrorKind, FunBody, GITree, Ground, VisNode};

pub type ValFn = Rc<dyn Fn(GITree) -> GITree>;
pub type FunFn = Rc<dyn Fn(Later<FunBody>) -> GITree>;
pub type RetFn = Rc<dyn Fn(Ground) -> GITree>;

/// Rebuild a tree by pushing `on_value` under every Tau and Vis.
fn lift(a: GITree, on_value: ValFn) -> GITree {
    match a {
        GITree::Ret(_) | GITree::Fun(_) => on_value(a),
        GITree::Err(e) => GITree::Err(e),
        GITree::Tau(t) => GITree::Tau(Later::new(move || lift(t.force(), on_value))),
        GITree::Vis(v) => {
            let inner = Rc::clone(&v.cont);
            GITree::Vis(Rc::new(VisNode {
                op: v.op,
                input: v.input.clone(),
                out: v.out.clone(),
                cont: Rc::new(move |o| {
                    let next = inner(o);
                    let f = on_value.clone();
                    Later::new(move || lift(next.force(), f))
                }),
            }))
        }
    }
}

pub fn is_prime(n: &BigUint) -> u64 {
    let two = BigUint::from(2u32);
    if *n < two {
        return 0;
    }
    let mut d = two;
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            return 0;
        }
        d += 1u32;
    }
    1
}

pub fn get_val(a: GITree, f: impl Fn(GITree) -> GITree + 'static) -> GITree {
    lift(a, Rc::new(f))
}

pub fn get_val_rc(a: GITree, f: ValFn) -> GITree {
    lift(a, f)
}

pub fn get_fun(a: GITree, f: impl Fn(Later<FunBody>) -> GITree + 'static) -> GITree {
    get_fun_rc(a, Rc::new(f))
}

pub fn get_fun_rc(a: GITree, f: FunFn) -> GITree {
    lift(
        a,
        Rc::new(move |v| match v {
            GITree::Fun(g) => f(g),
            _ => GITree::runtime_err(),
        }),
    )
}

pub fn get_ret(a: GITree, f: impl Fn(Ground) -> GITree + 'static) -> GITree {
    get_ret_rc(a, Rc::new(f))
}

pub fn get_ret_rc(a: GITree, f: RetFn) -> GITree {
    lift(
        a,
        Rc::new(move |v| match v {
            GITree::Ret(g) => f(g),
            _ => GITree::runtime_err(),
        }),
    )
}

/// Apply a function value; `Tick(g v)` for `Fun`, a runtime error otherwise.
pub fn apply_value(f: GITree, arg: GITree) -> GITree {
    match f {
        GITree::Fun(g) => GITree::Tau(Later::new(move || (g.force())(arg))),
        GITree::Err(e) => GITree::Err(e),
        _ => GITree::runtime_err(),
    }
}

/// Call-by-value application. The argument is evaluated first.
pub fn app(f: GITree, a: GITree) -> GITree {
    get_val(a, move |av| {
        get_val(f.clone(), move |fv| apply_value(fv, av.clone()))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
}

impl BinOp {
    pub fn eval(self, a: &BigUint, b: &BigUint) -> BigUint {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => {
                if a >= b {
                    a - b
                } else {
                    BigUint::default()
                }
            }
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

fn natop_values(op: BinOp, a: &GITree, b: &GITree) -> GITree {
    match (a.as_nat(), b.as_nat()) {
        (Some(x), Some(y)) => GITree::big(op.eval(x, y)),
        _ => GITree::runtime_err(),
    }
}

/// Lift a binary operation on naturals. `b` is evaluated before `a`.
pub fn natop(op: BinOp, a: GITree, b: GITree) -> GITree {
    get_val(b, move |bv| {
        get_val(a.clone(), move |av| natop_values(op, &av, &bv))
    })
}

/// Branch on a natural: nonzero takes `then`.
pub fn if_nz(
    c: GITree,
    then: impl Fn() -> GITree + 'static,
    els: impl Fn() -> GITree + 'static,
) -> GITree {
    get_ret(c, move |g| match g {
        Ground::Nat(_) if !is_zero(&g) => then(),
        Ground::Nat(_) => els(),
        _ => GITree::runtime_err(),
    })
}

/// `IF` on already built branches.
pub fn if_trees(c: GITree, then: GITree, els: GITree) -> GITree {
    if_nz(c, move || then.clone(), move || els.clone())
}

/// `a ; b`.
pub fn seq(a: GITree, b: impl Fn() -> GITree + 'static) -> GITree {
    get_val(a, move |_| b())
}

/// Wrap a tree transformer as a continuation on delayed trees.
pub fn lift_k(f: impl Fn(GITree) -> GITree + 'static) -> crate::tree::KFn {
    let f = Rc::new(f);
    Rc::new(move |l: Later<GITree>| {
        let f = f.clone();
        l.map(move |t| f(t))
    })
}

/// An error leaf used by ops whose output arity is empty.
pub fn unreachable_cont() -> crate::tree::Cont {
    Rc::new(|_| Later::now(GITree::Err(ErrorKind::Custom("resumed empty arity".into()))))
}
