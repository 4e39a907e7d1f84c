//! Recursive-descent parser for the concrete syntax.
//!
//! Prefix forms (`fun`, `rec`, `callcc`, `shift`, `try`, `let`, `if`, `fork`,
//! `throw`, `raise`) extend as far right as possible. Binary operators, from
//! loosest: `:=`/`<-`, `@` (right-associative), `+`/`-`, application.

use std::rc::Rc;

use thiserror::Error;

use super::lexer::{lex, Pos, Tok};
use super::syntax::{Expr, Lang, Name, E};
use crate::ops::BinOp;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

pub fn parse(lang: Lang, src: &str) -> Result<E, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, lang };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(resolve(lang, &e))
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    lang: Lang,
}

fn allowed(lang: Lang, what: &str) -> bool {
    use Lang::*;
    match what {
        "callcc" | "throw" => lang == Cc,
        "try" | "raise" => lang == Exc,
        "reset" | "shift" | "<" | "@" => matches!(lang, Delim | Embed),
        "isprime" => lang == Delim,
        "embed" | "!" | ":=" => lang == Embed,
        "alloc" => matches!(lang, Embed | Aff),
        "()" => matches!(lang, Embed | Aff),
        "true" | "false" | "let" | "replace" | "dealloc" | "fork" | "<-" | "pair" => lang == Aff,
        _ => true,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn gate(&self, what: &str) -> Result<(), ParseError> {
        if allowed(self.lang, what) {
            Ok(())
        } else {
            self.err(format!("`{what}` is not part of {}", self.lang))
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == s)
    }

    fn sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn kw(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s.into())
            }
            t => self.err(format!("expected identifier, found {t}")),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => self.err(format!("unexpected {t}")),
        }
    }

    fn starts_prefix(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Kw("fun" | "rec" | "callcc" | "shift" | "try" | "let" | "if" | "fork" | "throw" | "raise")
        )
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Ident(_) => true,
            Tok::Sym(s) => matches!(*s, "(" | "<" | "!"),
            Tok::Kw(k) => matches!(*k, "true" | "false" | "embed" | "replace" | "alloc" | "dealloc" | "reset" | "isprime"),
            Tok::Eof => false,
        }
    }

    fn expr(&mut self) -> Result<E, ParseError> {
        if self.starts_prefix() {
            self.prefix()
        } else {
            self.assign()
        }
    }

    fn prefix(&mut self) -> Result<E, ParseError> {
        let Tok::Kw(k) = self.peek().clone() else {
            unreachable!("checked by starts_prefix")
        };
        self.gate(k)?;
        self.bump();
        let e = match k {
            "fun" => {
                let x = self.ident()?;
                self.sym("->")?;
                Expr::Lam(x, self.expr()?)
            }
            "rec" => {
                let f = self.ident()?;
                let x = self.ident()?;
                self.sym("=")?;
                Expr::Rec(f, x, self.expr()?)
            }
            "callcc" | "shift" => {
                let x = self.ident()?;
                self.sym(".")?;
                let b = self.expr()?;
                if k == "callcc" {
                    Expr::Callcc(x, b)
                } else {
                    Expr::Shift(x, b)
                }
            }
            "try" => {
                let body = self.expr()?;
                self.kw("catch")?;
                let exc = self.ident()?;
                self.kw("with")?;
                let h = self.ident()?;
                self.sym(".")?;
                Expr::Try(body, exc, h, self.expr()?)
            }
            "raise" => {
                let exc = self.ident()?;
                Expr::Raise(exc, self.expr()?)
            }
            "throw" => {
                let v = self.expr()?;
                self.kw("to")?;
                Expr::Throw(v, self.expr()?)
            }
            "let" => {
                self.sym("(")?;
                let a = self.ident()?;
                self.sym(",")?;
                let b = self.ident()?;
                self.sym(")")?;
                self.sym("=")?;
                let e1 = self.expr()?;
                self.kw("in")?;
                Expr::LetPair(a, b, e1, self.expr()?)
            }
            "if" => {
                let c = self.expr()?;
                self.kw("then")?;
                let t = self.expr()?;
                self.kw("else")?;
                Expr::If(c, t, self.expr()?)
            }
            "fork" => {
                self.sym("{")?;
                let a = self.expr()?;
                self.sym("}")?;
                self.sym(";")?;
                Expr::Fork(a, self.expr()?)
            }
            _ => unreachable!(),
        };
        Ok(Rc::new(e))
    }

    fn operand(&mut self, level: fn(&mut Parser) -> Result<E, ParseError>) -> Result<E, ParseError> {
        if self.starts_prefix() {
            self.prefix()
        } else {
            level(self)
        }
    }

    fn assign(&mut self) -> Result<E, ParseError> {
        let l = self.contapp()?;
        if self.is_sym(":=") {
            self.gate(":=")?;
            self.bump();
            let r = self.operand(Parser::contapp)?;
            return Ok(Rc::new(Expr::Assign(l, r)));
        }
        if self.is_sym("<-") {
            self.gate("<-")?;
            self.bump();
            let r = self.operand(Parser::contapp)?;
            return Ok(store_sugar(l, r));
        }
        Ok(l)
    }

    fn contapp(&mut self) -> Result<E, ParseError> {
        let l = self.addsub()?;
        if self.is_sym("@") {
            self.gate("@")?;
            self.bump();
            let r = self.operand(Parser::contapp)?;
            return Ok(Rc::new(Expr::ContApp(l, r)));
        }
        Ok(l)
    }

    fn addsub(&mut self) -> Result<E, ParseError> {
        let mut l = self.app()?;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                return Ok(l);
            };
            self.bump();
            let r = self.operand(Parser::app)?;
            l = Rc::new(Expr::BinOp(op, l, r));
        }
    }

    fn app(&mut self) -> Result<E, ParseError> {
        let mut f = self.headed()?;
        while self.starts_atom() {
            let a = self.headed()?;
            f = Rc::new(Expr::App(f, a));
        }
        Ok(f)
    }

    /// An atom, or `alloc`/`dealloc`/`reset` applied to one.
    fn headed(&mut self) -> Result<E, ParseError> {
        for k in ["alloc", "dealloc", "reset"] {
            if self.is_kw(k) {
                self.gate(k)?;
                self.bump();
                let a = self.atom()?;
                return Ok(Rc::new(match k {
                    "alloc" => Expr::Alloc(a),
                    "dealloc" => Expr::Dealloc(a),
                    _ => Expr::Reset(a),
                }));
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<E, ParseError> {
        let e = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Expr::Nat(n)
            }
            Tok::Ident(x) => {
                self.bump();
                Expr::Var(x.into())
            }
            Tok::Kw("isprime") => {
                self.gate("isprime")?;
                self.bump();
                Expr::IsPrime
            }
            Tok::Kw(b @ ("true" | "false")) => {
                self.gate(b)?;
                self.bump();
                Expr::Bool(b == "true")
            }
            Tok::Kw("embed") => {
                self.gate("embed")?;
                self.bump();
                self.sym("{")?;
                let outer = std::mem::replace(&mut self.lang, Lang::Delim);
                let body = self.expr();
                self.lang = outer;
                let body = body?;
                self.sym("}")?;
                Expr::Embed(resolve(Lang::Delim, &body))
            }
            Tok::Kw("replace") => {
                self.gate("replace")?;
                self.bump();
                self.sym("(")?;
                let a = self.expr()?;
                self.sym(",")?;
                let b = self.expr()?;
                self.sym(")")?;
                Expr::Replace(a, b)
            }
            Tok::Sym("!") => {
                self.gate("!")?;
                self.bump();
                Expr::Deref(self.atom()?)
            }
            Tok::Sym("<") => {
                self.gate("<")?;
                self.bump();
                let b = self.expr()?;
                self.sym(">")?;
                Expr::Reset(b)
            }
            Tok::Sym("(") => {
                self.bump();
                if self.is_sym(")") {
                    self.gate("()")?;
                    self.bump();
                    Expr::Unit
                } else {
                    let a = self.expr()?;
                    if self.is_sym(",") {
                        self.gate("pair")?;
                        self.bump();
                        let b = self.expr()?;
                        self.sym(")")?;
                        Expr::Pair(a, b)
                    } else {
                        self.sym(")")?;
                        return Ok(a);
                    }
                }
            }
            t => return self.err(format!("expected an expression, found {t}")),
        };
        Ok(Rc::new(e))
    }
}

/// `l <- r` is `let (_, _) = replace(l, r) in ()`.
fn store_sugar(l: E, r: E) -> E {
    Rc::new(Expr::LetPair(
        "_".into(),
        "_".into(),
        Rc::new(Expr::Replace(l, r)),
        Rc::new(Expr::Unit),
    ))
}

/// In the delimited-control language, applying a `shift`-bound name is
/// continuation application.
fn resolve(lang: Lang, e: &E) -> E {
    if matches!(lang, Lang::Delim | Lang::Embed) {
        resolve_conts(e, &mut Vec::new())
    } else {
        e.clone()
    }
}

fn resolve_conts(e: &E, scope: &mut Vec<(Name, bool)>) -> E {
    let is_cont = |scope: &Vec<(Name, bool)>, x: &Name| {
        scope.iter().rev().find(|(y, _)| y == x).is_some_and(|(_, c)| *c)
    };
    let bind = |names: &[(&Name, bool)], body: &E, scope: &mut Vec<(Name, bool)>| {
        let n = scope.len();
        scope.extend(names.iter().map(|(x, c)| ((*x).clone(), *c)));
        let r = resolve_conts(body, scope);
        scope.truncate(n);
        r
    };
    let out = match &**e {
        Expr::App(f, a) => {
            let a2 = resolve_conts(a, scope);
            match &**f {
                Expr::Var(k) if is_cont(scope, k) => Expr::ContApp(f.clone(), a2),
                _ => Expr::App(resolve_conts(f, scope), a2),
            }
        }
        Expr::Lam(x, b) => Expr::Lam(x.clone(), bind(&[(x, false)], b, scope)),
        Expr::Rec(f, x, b) => Expr::Rec(f.clone(), x.clone(), bind(&[(f, false), (x, false)], b, scope)),
        Expr::Shift(k, b) => Expr::Shift(k.clone(), bind(&[(k, true)], b, scope)),
        Expr::BinOp(op, a, b) => Expr::BinOp(*op, resolve_conts(a, scope), resolve_conts(b, scope)),
        Expr::If(a, b, c) => Expr::If(
            resolve_conts(a, scope),
            resolve_conts(b, scope),
            resolve_conts(c, scope),
        ),
        Expr::Reset(b) => Expr::Reset(resolve_conts(b, scope)),
        Expr::Alloc(b) => Expr::Alloc(resolve_conts(b, scope)),
        Expr::Deref(b) => Expr::Deref(resolve_conts(b, scope)),
        Expr::Assign(a, b) => Expr::Assign(resolve_conts(a, scope), resolve_conts(b, scope)),
        Expr::ContApp(a, b) => Expr::ContApp(resolve_conts(a, scope), resolve_conts(b, scope)),
        _ => return e.clone(),
    };
    Rc::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::syntax::nat;

    #[test]
    fn callcc_throw() {
        let e = parse(Lang::Cc, "callcc k. throw 41 to k").unwrap();
        let Expr::Callcc(k, body) = &*e else { panic!() };
        assert_eq!(&**k, "k");
        assert!(matches!(&**body, Expr::Throw(..)));
    }

    #[test]
    fn shift_bound_application_is_cont_app() {
        let e = parse(Lang::Delim, "reset (1 + shift k. k (k 10))").unwrap();
        let Expr::Reset(b) = &*e else { panic!() };
        let Expr::BinOp(BinOp::Add, _, s) = &**b else { panic!() };
        let Expr::Shift(_, body) = &**s else { panic!() };
        let Expr::ContApp(_, inner) = &**body else { panic!("{body:?}") };
        assert!(matches!(&**inner, Expr::ContApp(..)));
    }

    #[test]
    fn shadowing_cancels_cont_app() {
        let e = parse(Lang::Delim, "< shift k. (fun k -> k 1) (fun z -> z) >").unwrap();
        assert_eq!(e.count(&|x| matches!(x, Expr::ContApp(..))), 0);
    }

    #[test]
    fn fork_sugar() {
        let e = parse(Lang::Aff, "fork { l <- r } ; 5").unwrap();
        let Expr::Fork(a, b) = &*e else { panic!() };
        assert!(matches!(&**a, Expr::LetPair(..)));
        assert_eq!(*b, nat(5));
    }

    #[test]
    fn precedence() {
        let e = parse(Lang::Cc, "f 1 + 2 - g 3").unwrap();
        let Expr::BinOp(BinOp::Sub, l, r) = &*e else { panic!() };
        assert!(matches!(&**l, Expr::BinOp(BinOp::Add, ..)));
        assert!(matches!(&**r, Expr::App(..)));
    }

    #[test]
    fn prefix_extends_right() {
        let e = parse(Lang::Cc, "1 + fun x -> x + 2").unwrap();
        let Expr::BinOp(_, _, r) = &*e else { panic!() };
        assert!(matches!(&**r, Expr::Lam(..)));
    }

    #[test]
    fn feature_gating() {
        let err = parse(Lang::Delim, "callcc k. 1").unwrap_err();
        assert!(err.msg.contains("callcc"));
        assert_eq!(err.pos, Pos { line: 1, col: 1 });
    }

    #[test]
    fn error_position() {
        let err = parse(Lang::Cc, "1 +\n  )").unwrap_err();
        assert_eq!(err.to_string().split(':').take(2).collect::<Vec<_>>(), ["2", "3"]);
    }

    #[test]
    fn embed_body_is_delim() {
        let e = parse(Lang::Embed, "embed { <1 + shift k. k 1> } + !x").unwrap();
        assert_eq!(e.count(&|x| matches!(x, Expr::ContApp(..))), 1);
    }
}
