//! Types for all five languages and a unification engine.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

pub type T = Rc<Ty>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Nat,
    Bool,
    Unit,
    Var(u32),
    /// Plain or affine function.
    Arrow(T, T),
    /// `σ/α → τ/β`
    DArrow { arg: T, ans_in: T, res: T, ans_out: T },
    /// Undelimited continuation expecting a value of the given type.
    Cont(T),
    /// `cont(τ, α)`
    DCont(T, T),
    Ref(T),
    Tensor(T, T),
}

impl Ty {
    pub fn nat() -> T {
        Rc::new(Ty::Nat)
    }

    pub fn bool() -> T {
        Rc::new(Ty::Bool)
    }

    pub fn unit() -> T {
        Rc::new(Ty::Unit)
    }

    pub fn arrow(a: T, b: T) -> T {
        Rc::new(Ty::Arrow(a, b))
    }

    pub fn darrow(arg: T, ans_in: T, res: T, ans_out: T) -> T {
        Rc::new(Ty::DArrow { arg, ans_in, res, ans_out })
    }

    pub fn cont(a: T) -> T {
        Rc::new(Ty::Cont(a))
    }

    pub fn dcont(a: T, b: T) -> T {
        Rc::new(Ty::DCont(a, b))
    }

    pub fn reference(a: T) -> T {
        Rc::new(Ty::Ref(a))
    }

    pub fn tensor(a: T, b: T) -> T {
        Rc::new(Ty::Tensor(a, b))
    }

    fn atomic(&self) -> bool {
        matches!(self, Ty::Nat | Ty::Bool | Ty::Unit | Ty::Var(_))
    }

    /// Contains a continuation type somewhere.
    pub fn mentions_cont(&self) -> bool {
        match self {
            Ty::Cont(_) | Ty::DCont(..) => true,
            Ty::Nat | Ty::Bool | Ty::Unit | Ty::Var(_) => false,
            Ty::Arrow(a, b) | Ty::Tensor(a, b) => a.mentions_cont() || b.mentions_cont(),
            Ty::DArrow { arg, ans_in, res, ans_out } => {
                arg.mentions_cont() || ans_in.mentions_cont() || res.mentions_cont() || ans_out.mentions_cont()
            }
            Ty::Ref(a) => a.mentions_cont(),
        }
    }
}

struct Paren<'a>(&'a Ty);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.atomic() || matches!(self.0, Ty::Cont(_) | Ty::DCont(..) | Ty::Ref(_)) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Nat => f.write_str("nat"),
            Ty::Bool => f.write_str("bool"),
            Ty::Unit => f.write_str("unit"),
            Ty::Var(v) => write!(f, "'t{v}"),
            Ty::Arrow(a, b) => write!(f, "{} -> {}", Paren(a), b),
            Ty::DArrow { arg, ans_in, res, ans_out } => {
                write!(f, "{}/{} -> {}/{}", Paren(arg), Paren(ans_in), Paren(res), Paren(ans_out))
            }
            Ty::Cont(a) => write!(f, "cont {}", Paren(a)),
            Ty::DCont(a, b) => write!(f, "cont({a}, {b})"),
            Ty::Ref(a) => write!(f, "ref {}", Paren(a)),
            Ty::Tensor(a, b) => write!(f, "{} * {}", Paren(a), Paren(b)),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("[{rule}] cannot unify {left} with {right}")]
    Mismatch { rule: &'static str, left: String, right: String },
    #[error("[{rule}] infinite type {var} ~ {ty}")]
    Occurs { rule: &'static str, var: String, ty: String },
    #[error("[var] unbound variable `{0}`")]
    Unbound(String),
    #[error("[affine] variable `{0}` used more than once")]
    Reused(String),
    #[error("[{rule}] {msg}")]
    Other { rule: &'static str, msg: String },
}

impl TypeError {
    pub fn other(rule: &'static str, msg: impl Into<String>) -> Self {
        TypeError::Other { rule, msg: msg.into() }
    }
}

/// Substitution over type variables with path-resolving lookup.
#[derive(Default)]
pub struct Unifier {
    slots: Vec<Option<T>>,
}

impl Unifier {
    pub fn fresh(&mut self) -> T {
        self.slots.push(None);
        Rc::new(Ty::Var((self.slots.len() - 1) as u32))
    }

    fn shallow(&self, t: &T) -> T {
        let mut cur = t.clone();
        while let Ty::Var(v) = &*cur {
            match &self.slots[*v as usize] {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    /// Fully substitute.
    pub fn resolve(&self, t: &T) -> T {
        let t = self.shallow(t);
        let r = |x: &T| self.resolve(x);
        match &*t {
            Ty::Nat | Ty::Bool | Ty::Unit | Ty::Var(_) => t.clone(),
            Ty::Arrow(a, b) => Ty::arrow(r(a), r(b)),
            Ty::DArrow { arg, ans_in, res, ans_out } => Ty::darrow(r(arg), r(ans_in), r(res), r(ans_out)),
            Ty::Cont(a) => Ty::cont(r(a)),
            Ty::DCont(a, b) => Ty::dcont(r(a), r(b)),
            Ty::Ref(a) => Ty::reference(r(a)),
            Ty::Tensor(a, b) => Ty::tensor(r(a), r(b)),
        }
    }

    /// Resolve and default remaining variables to `nat`.
    pub fn finish(&self, t: &T) -> T {
        fn default(t: &T) -> T {
            match &**t {
                Ty::Var(_) => Ty::nat(),
                Ty::Nat | Ty::Bool | Ty::Unit => t.clone(),
                Ty::Arrow(a, b) => Ty::arrow(default(a), default(b)),
                Ty::DArrow { arg, ans_in, res, ans_out } => {
                    Ty::darrow(default(arg), default(ans_in), default(res), default(ans_out))
                }
                Ty::Cont(a) => Ty::cont(default(a)),
                Ty::DCont(a, b) => Ty::dcont(default(a), default(b)),
                Ty::Ref(a) => Ty::reference(default(a)),
                Ty::Tensor(a, b) => Ty::tensor(default(a), default(b)),
            }
        }
        default(&self.resolve(t))
    }

    fn occurs(&self, v: u32, t: &T) -> bool {
        let t = self.shallow(t);
        match &*t {
            Ty::Var(w) => *w == v,
            Ty::Nat | Ty::Bool | Ty::Unit => false,
            Ty::Arrow(a, b) | Ty::Tensor(a, b) | Ty::DCont(a, b) => self.occurs(v, a) || self.occurs(v, b),
            Ty::DArrow { arg, ans_in, res, ans_out } => {
                [arg, ans_in, res, ans_out].into_iter().any(|x| self.occurs(v, x))
            }
            Ty::Cont(a) | Ty::Ref(a) => self.occurs(v, a),
        }
    }

    pub fn unify(&mut self, rule: &'static str, a: &T, b: &T) -> Result<(), TypeError> {
        let (a, b) = (self.shallow(a), self.shallow(b));
        let mismatch = |u: &Unifier| TypeError::Mismatch {
            rule,
            left: u.resolve(&a).to_string(),
            right: u.resolve(&b).to_string(),
        };
        match (&*a, &*b) {
            (Ty::Var(x), Ty::Var(y)) if x == y => Ok(()),
            (Ty::Var(x), _) => self.bind(rule, *x, &b),
            (_, Ty::Var(y)) => self.bind(rule, *y, &a),
            (Ty::Nat, Ty::Nat) | (Ty::Bool, Ty::Bool) | (Ty::Unit, Ty::Unit) => Ok(()),
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2))
            | (Ty::Tensor(a1, b1), Ty::Tensor(a2, b2))
            | (Ty::DCont(a1, b1), Ty::DCont(a2, b2)) => {
                self.unify(rule, a1, a2)?;
                self.unify(rule, b1, b2)
            }
            (Ty::Cont(x), Ty::Cont(y)) | (Ty::Ref(x), Ty::Ref(y)) => self.unify(rule, x, y),
            (
                Ty::DArrow { arg: a1, ans_in: b1, res: c1, ans_out: d1 },
                Ty::DArrow { arg: a2, ans_in: b2, res: c2, ans_out: d2 },
            ) => {
                self.unify(rule, a1, a2)?;
                self.unify(rule, b1, b2)?;
                self.unify(rule, c1, c2)?;
                self.unify(rule, d1, d2)
            }
            _ => Err(mismatch(self)),
        }
    }

    fn bind(&mut self, rule: &'static str, v: u32, t: &T) -> Result<(), TypeError> {
        if self.occurs(v, t) {
            return Err(TypeError::Occurs {
                rule,
                var: format!("'t{v}"),
                ty: self.resolve(t).to_string(),
            });
        }
        self.slots[v as usize] = Some(t.clone());
        Ok(())
    }
}

/// Typing context as a scoped list; later entries shadow earlier ones.
#[derive(Clone, Default)]
pub struct Ctx {
    vars: Vec<(Rc<str>, T)>,
}

impl Ctx {
    pub fn lookup(&self, x: &str) -> Option<&T> {
        self.vars.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn with(&self, x: &Rc<str>, t: T) -> Ctx {
        let mut c = self.clone();
        if &**x != "_" {
            c.vars.push((x.clone(), t));
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unify_binds_and_resolves() {
        let mut u = Unifier::default();
        let a = u.fresh();
        u.unify("t", &Ty::arrow(a.clone(), Ty::nat()), &Ty::arrow(Ty::bool(), Ty::nat())).unwrap();
        assert_eq!(*u.resolve(&a), Ty::Bool);
    }

    #[test]
    fn occurs_check() {
        let mut u = Unifier::default();
        let a = u.fresh();
        assert!(matches!(
            u.unify("t", &a, &Ty::arrow(a.clone(), Ty::nat())),
            Err(TypeError::Occurs { .. })
        ));
    }

    #[test]
    fn display() {
        let t = Ty::darrow(Ty::nat(), Ty::nat(), Ty::arrow(Ty::nat(), Ty::nat()), Ty::nat());
        assert_eq!(t.to_string(), "nat/nat -> (nat -> nat)/nat");
    }
}
