//! Small-step oracles for the control languages. All three evaluate
//! application and arithmetic right to left, like the denotations.

pub mod cc;
pub mod delim;
pub mod exc;

use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;

use crate::lang::syntax::{Expr, Lang, E};
use crate::ops::is_prime;

pub enum Step<C> {
    Next(C),
    Done(E),
    Stuck(String),
}

pub trait Machine {
    type Config: Clone + fmt::Display;
    fn inject(e: &E) -> Self::Config;
    fn step(c: &Self::Config) -> Step<Self::Config>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MachineOutcome {
    Terminal(E),
    Timeout,
    Stuck(String),
}

impl MachineOutcome {
    pub fn nat(&self) -> Option<&BigUint> {
        match self {
            MachineOutcome::Terminal(e) => match &**e {
                Expr::Nat(n) => Some(n),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn report(&self) -> String {
        match self {
            MachineOutcome::Terminal(e) => match &**e {
                Expr::Nat(n) => format!("VALUE {n}"),
                Expr::Unit => "VALUE ()".into(),
                _ => "VALUE <fun>".into(),
            },
            MachineOutcome::Timeout => "TIMEOUT".into(),
            MachineOutcome::Stuck(_) => "STUCK".into(),
        }
    }
}

pub struct MachineRun<C> {
    pub outcome: MachineOutcome,
    pub steps: u64,
    /// Visited configurations, initial one first. Empty unless recorded.
    pub configs: Vec<C>,
}

pub fn machine_run<M: Machine>(start: M::Config, max_steps: u64, record: bool) -> MachineRun<M::Config> {
    let mut cur = start;
    let mut configs = Vec::new();
    let mut steps = 0;
    loop {
        if record {
            configs.push(cur.clone());
        }
        match M::step(&cur) {
            Step::Done(v) => {
                return MachineRun { outcome: MachineOutcome::Terminal(v), steps, configs };
            }
            Step::Stuck(why) => {
                return MachineRun { outcome: MachineOutcome::Stuck(why), steps, configs };
            }
            Step::Next(c) => {
                if steps == max_steps {
                    return MachineRun { outcome: MachineOutcome::Timeout, steps, configs };
                }
                steps += 1;
                cur = c;
            }
        }
    }
}

/// Run the machine for `lang` from an initial term.
pub fn run_machine(lang: Lang, e: &E, max_steps: u64) -> Option<(MachineOutcome, u64, Vec<String>)> {
    fn go<M: Machine>(e: &E, n: u64) -> (MachineOutcome, u64, Vec<String>) {
        let r = machine_run::<M>(M::inject(e), n, true);
        (r.outcome, r.steps, r.configs.iter().map(|c| c.to_string()).collect())
    }
    match lang {
        Lang::Cc => Some(go::<cc::CcMachine>(e, max_steps)),
        Lang::Exc => Some(go::<exc::ExcMachine>(e, max_steps)),
        Lang::Delim => Some(go::<delim::DelimMachine>(e, max_steps)),
        _ => None,
    }
}

/// JSON lines for a machine trace.
pub fn trace_jsonl(configs: &[String]) -> String {
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let v = serde_json::json!({ "step": i, "kind": "machine-step", "config": c });
            format!("{v}\n")
        })
        .collect()
}

pub(crate) fn delta(op: crate::ops::BinOp, a: &E, b: &E) -> Option<E> {
    match (&**a, &**b) {
        (Expr::Nat(x), Expr::Nat(y)) => Some(std::rc::Rc::new(Expr::Nat(op.eval(x, y)))),
        _ => None,
    }
}

pub(crate) fn truthy(e: &E) -> Option<bool> {
    match &**e {
        Expr::Nat(n) => Some(*n != BigUint::default()),
        _ => None,
    }
}

/// β-reduction of a function value applied to a value.
pub(crate) fn beta(f: &E, v: &E) -> Option<E> {
    use crate::lang::subst::subst;
    match &**f {
        Expr::Lam(x, b) => Some(subst(b, x, v)),
        Expr::Rec(g, x, b) => Some(subst(&subst(b, g, f), x, v)),
        Expr::IsPrime => match &**v {
            Expr::Nat(n) => Some(Rc::new(Expr::Nat(is_prime(n).into()))),
            _ => None,
        },
        _ => None,
    }
}
