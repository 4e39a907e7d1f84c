//! Glue for running programs: effects per language, top-level wrapping,
//! denotation vs machine comparison, and the per-step soundness check.

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use crate::engine::{combine, CompositeState, Effects, Event, Heap, SubState};
use crate::effects::{self, delim, store};
use crate::hom::Hom;
use crate::later::Later;
use crate::lang::denote::{ctx_hom, denote, denote_closed, exc_ctx, Env};
use crate::lang::syntax::{Expr, Lang, E};
use crate::machine::delim::{DelimConfig, DelimMachine};
use crate::machine::exc::{ExcConfig, ExcMachine};
use crate::machine::{machine_run, Machine, MachineOutcome};
use crate::ops::{app, get_ret, get_val, natop, seq, BinOp};
use crate::sched::{explore, run, run_from, ExploreError, Outcome, Run, SchedulerPolicy, Stop};
use crate::tree::{GITree, KFn};

/// Machine steps allowed per unit of denotational fuel.
pub const MACHINE_FUEL_FACTOR: u64 = 20;

pub fn effects_for(lang: Lang) -> Effects {
    let fx = match lang {
        Lang::Cc => vec![effects::callcc()],
        Lang::Exc => vec![effects::exc()],
        Lang::Delim => vec![effects::delim()],
        Lang::Embed => vec![effects::delim(), effects::store()],
        Lang::Aff => vec![effects::store(), effects::fork()],
    };
    combine(fx).expect("language effect families are disjoint")
}

/// The tree a whole program runs as. Delimited programs end with `POP′`.
pub fn program_tree(lang: Lang, e: &E) -> GITree {
    let t = denote_closed(lang, e);
    if lang == Lang::Delim {
        delim::pop_prime(t)
    } else {
        t
    }
}

pub fn run_program(lang: Lang, e: &E, fuel: u64, policy: &SchedulerPolicy) -> Run {
    run(program_tree(lang, e), &effects_for(lang), fuel, policy)
}

/// Outcome of either evaluator with failures merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Nat(String),
    Unit,
    Function,
    Failed,
    Timeout,
}

impl Verdict {
    pub fn of_outcome(o: &Outcome) -> Verdict {
        match o {
            Outcome::FinalValue(GITree::Fun(_)) => Verdict::Function,
            Outcome::FinalValue(v) => match v.as_ground() {
                Some(crate::tree::Ground::Unit) => Verdict::Unit,
                _ => Verdict::Nat(v.render_value()),
            },
            Outcome::Error(_) | Outcome::Stuck(_) => Verdict::Failed,
            Outcome::Timeout => Verdict::Timeout,
        }
    }

    pub fn of_machine(o: &MachineOutcome) -> Verdict {
        match o {
            MachineOutcome::Terminal(e) => match &**e {
                Expr::Nat(n) => Verdict::Nat(n.to_string()),
                Expr::Unit => Verdict::Unit,
                _ => Verdict::Function,
            },
            MachineOutcome::Stuck(_) => Verdict::Failed,
            MachineOutcome::Timeout => Verdict::Timeout,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiffReport {
    Agree(String),
    Disagree { denote: String, machine: String },
    BothTimeout,
    BothStuck,
}

impl DiffReport {
    pub fn is_agreement(&self) -> bool {
        !matches!(self, DiffReport::Disagree { .. })
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffReport::Agree(v) => write!(f, "AGREE({v})"),
            DiffReport::Disagree { denote, machine } => {
                write!(f, "DISAGREE denote={denote} machine={machine}")
            }
            DiffReport::BothTimeout => f.write_str("BOTH-TIMEOUT"),
            DiffReport::BothStuck => f.write_str("BOTH-STUCK"),
        }
    }
}

/// Compare the denotation with the machine. `None` if `lang` has no machine.
pub fn diff(lang: Lang, e: &E, fuel: u64) -> Option<DiffReport> {
    diff_with(lang, e, fuel, &effects_for(lang))
}

/// `diff` against an arbitrary set of reifiers.
pub fn diff_with(lang: Lang, e: &E, fuel: u64, fx: &Effects) -> Option<DiffReport> {
    if !lang.has_machine() {
        return None;
    }
    let r = run(program_tree(lang, e), fx, fuel, &SchedulerPolicy::RoundRobin);
    let (m, _, _) = crate::machine::run_machine(lang, e, fuel.saturating_mul(MACHINE_FUEL_FACTOR))?;
    let (dv, mv) = (Verdict::of_outcome(&r.outcome), Verdict::of_machine(&m));
    Some(match (&dv, &mv) {
        (Verdict::Timeout, Verdict::Timeout) => DiffReport::BothTimeout,
        (Verdict::Failed, Verdict::Failed) => DiffReport::BothStuck,
        (Verdict::Nat(a), Verdict::Nat(b)) if a == b => DiffReport::Agree(a.clone()),
        (Verdict::Unit, Verdict::Unit) => DiffReport::Agree("()".into()),
        (Verdict::Function, Verdict::Function) => DiffReport::Agree("<fun>".into()),
        _ => DiffReport::Disagree {
            denote: r.outcome.report(),
            machine: m.report(),
        },
    })
}

/// Cell filled with whatever the outermost `(fun x -> ..) a` binds to `x`.
pub type Watch = Rc<RefCell<Option<GITree>>>;

/// Like `program_tree`, but records the value bound to `x` by the spine of
/// top-level `(fun x -> body) arg` applications. `None` if no such binder.
pub fn program_tree_watching(lang: Lang, e: &E, x: &str) -> Option<(GITree, Watch)> {
    fn go(lang: Lang, e: &E, env: &Env, x: &str, cell: &Watch) -> Option<GITree> {
        let Expr::App(f, a) = &**e else { return None };
        let Expr::Lam(y, body) = &**f else { return None };
        if lang == Lang::Aff {
            return None;
        }
        let hit = &**y == x;
        if !hit {
            // the binder must be further down the body
            go(lang, body, &env.with(y, GITree::unit()), x, cell)?;
        }
        let arg = denote(lang, a, env);
        let (y, body, env, cell, x) = (y.clone(), body.clone(), env.clone(), cell.clone(), x.to_string());
        let f = GITree::fun(move |v| {
            let env = env.with(&y, v.clone());
            if hit {
                *cell.borrow_mut() = Some(v);
                denote(lang, &body, &env)
            } else {
                go(lang, &body, &env, &x, &cell).expect("binder found on the first pass")
            }
        });
        Some(app(f, arg))
    }
    let cell: Watch = Rc::new(RefCell::new(None));
    let t = go(lang, e, &Env::default(), x, &cell)?;
    let t = if lang == Lang::Delim { delim::pop_prime(t) } else { t };
    Some((t, cell))
}

/// Denotation of an exceptions-machine configuration with its handler stack.
pub fn denote_exc_config(c: &ExcConfig) -> (GITree, CompositeState) {
    let mut sigma = effects_for(Lang::Exc).initial_state();
    let t = match c {
        ExcConfig::Term(e) | ExcConfig::Ret(e) => denote_closed(Lang::Exc, e),
        ExcConfig::Eval(e, k) | ExcConfig::Cont(k, e) => {
            let (hom, stack) = exc_ctx(k);
            sigma.set(effects::exc::FAMILY, SubState::Handlers(Rc::new(stack)));
            hom.apply(denote_closed(Lang::Exc, e))
        }
    };
    (t, sigma)
}

fn meta_kfn(k: &[crate::lang::syntax::Frame]) -> KFn {
    Hom::compose(Hom::PopPrime, ctx_hom(Lang::Delim, k)).to_kfn()
}

/// Denotation of a delimited-control configuration with its continuation stack.
pub fn denote_delim_config(c: &DelimConfig) -> (GITree, CompositeState) {
    let mut sigma = effects_for(Lang::Delim).initial_state();
    let mut set_mk = |mk: &crate::machine::delim::MetaK| {
        let ks: Vec<KFn> = mk.iter().map(|k| meta_kfn(k)).collect();
        sigma.set(delim::FAMILY, SubState::Conts(Rc::new(ks)));
    };
    let t = match c {
        DelimConfig::Term(e) => delim::pop_prime(denote_closed(Lang::Delim, e)),
        DelimConfig::Ret(v) => denote_closed(Lang::Delim, v),
        DelimConfig::Eval(e, k, mk) | DelimConfig::Cont(k, e, mk) => {
            set_mk(mk);
            delim::pop_prime(ctx_hom(Lang::Delim, k).apply(denote_closed(Lang::Delim, e)))
        }
        DelimConfig::MCont(mk, v) => {
            set_mk(mk);
            delim::pop_prime(denote_closed(Lang::Delim, v))
        }
    };
    (t, sigma)
}

fn stack_depth(lang: Lang, s: &CompositeState) -> usize {
    match lang {
        Lang::Exc => s.handler_depth().unwrap_or(0),
        _ => s.cont_stack_len().unwrap_or(0),
    }
}

fn event_key(e: &Event) -> (Option<String>, Option<serde_json::Value>) {
    (e.op.clone(), e.input.clone())
}

/// Soundness of one machine transition: both configurations must reach the
/// same verdict, the successor's effects must be a suffix of the
/// predecessor's, and both runs must end with equal stack depths.
pub fn check_step(lang: Lang, before: (GITree, CompositeState), after: (GITree, CompositeState), fuel: u64) -> Result<(), String> {
    let fx = effects_for(lang);
    let p = SchedulerPolicy::RoundRobin;
    let r0 = run_from(before.0, &fx, before.1, fuel, &p);
    let r1 = run_from(after.0, &fx, after.1, fuel, &p);
    let (v0, v1) = (Verdict::of_outcome(&r0.outcome), Verdict::of_outcome(&r1.outcome));
    if v0 == Verdict::Timeout && v1 == Verdict::Timeout {
        return Ok(());
    }
    if v0 != v1 {
        return Err(format!("outcomes differ: {} vs {}", r0.outcome.report(), r1.outcome.report()));
    }
    let e0: Vec<_> = r0.effect_events().into_iter().map(event_key).collect();
    let e1: Vec<_> = r1.effect_events().into_iter().map(event_key).collect();
    if !e0.ends_with(&e1) {
        return Err(format!("effect trace of successor ({}) is not a suffix ({})", e1.len(), e0.len()));
    }
    let (d0, d1) = (stack_depth(lang, &r0.state), stack_depth(lang, &r1.state));
    if d0 != d1 {
        return Err(format!("final stack depths differ: {d0} vs {d1}"));
    }
    Ok(())
}

/// Every transition of the machine run for `e` whose index satisfies `pick`.
/// Returns the number of transitions checked.
pub fn check_run_soundness(lang: Lang, e: &E, max_steps: u64, fuel: u64, pick: &mut dyn FnMut(usize) -> bool) -> Result<usize, String> {
    fn go<M: Machine>(
        lang: Lang,
        e: &E,
        max_steps: u64,
        fuel: u64,
        pick: &mut dyn FnMut(usize) -> bool,
        den: fn(&M::Config) -> (GITree, CompositeState),
    ) -> Result<usize, String> {
        let r = machine_run::<M>(M::inject(e), max_steps, true);
        let mut checked = 0;
        for (i, w) in r.configs.windows(2).enumerate() {
            if !pick(i) {
                continue;
            }
            check_step(lang, den(&w[0]), den(&w[1]), fuel)
                .map_err(|m| format!("step {i}: {} -> {}: {m}", w[0], w[1]))?;
            checked += 1;
        }
        Ok(checked)
    }
    match lang {
        Lang::Exc => go::<ExcMachine>(lang, e, max_steps, fuel, pick, denote_exc_config),
        Lang::Delim => go::<DelimMachine>(lang, e, max_steps, fuel, pick, denote_delim_config),
        _ => Err(format!("no configuration semantics for {}", lang.name())),
    }
}

/// Two threads incrementing location `0` (initially `0`), either with
/// fetch-and-add or with a separate read and write. Every interleaving of
/// visible steps.
pub fn increment_race(atomic: bool) -> Result<Vec<Run>, ExploreError> {
    let fx = effects_for(Lang::Aff);
    let mut sigma = fx.initial_state();
    let mut h = Heap::default();
    h.alloc(Later::now(GITree::nat(0)));
    sigma.set(store::FAMILY, SubState::Heap(Rc::new(h)));
    let thread = || {
        if atomic {
            store::faa(0, 1)
        } else {
            get_val(store::read(0), |v| store::write(0, natop(BinOp::Add, v, GITree::nat(1))))
        }
    };
    explore(vec![thread(), thread()], &fx, sigma, 64, Stop::AllThreads, true)
}

/// Final contents of location `l`, if it holds a small natural.
pub fn cell_nat(r: &Run, l: usize) -> Option<u64> {
    r.state.heap()?.get(l)?.force().as_u64()
}

/// `APPCONT′(READ ℓ, κ)`.
fn resume_with_cell(x: usize, k: &KFn) -> GITree {
    delim::appcont_k(store::read(x), k.clone())
}

/// The store-and-control example as a literal tree: a function of a
/// location `y` that adds the contents of a fresh counter to `y`, twice,
/// bumping the counter between the two resumptions.
pub fn prog_tree() -> GITree {
    GITree::fun(|y| {
        store::alloc(GITree::nat(1), move |x| {
            let y = y.clone();
            let n = delim::shift(move |k| {
                Later::new(move || {
                    let k2 = k.clone();
                    delim::pop_prime(seq(resume_with_cell(x, &k), move || {
                        let k3 = k2.clone();
                        get_val(natop(BinOp::Add, store::read(x), GITree::nat(1)), move |m| {
                            let k4 = k3.clone();
                            seq(store::write(x, m), move || resume_with_cell(x, &k4))
                        })
                    }))
                })
            });
            get_val(n, move |n| {
                get_ret(y.clone(), move |l| match l.as_loc() {
                    Some(l) => get_val(natop(BinOp::Add, store::read(l), n.clone()), move |p| store::write(l, p)),
                    None => GITree::runtime_err(),
                })
            })
        })
    })
}

/// Run `prog` on a location initialised to `n`. The location is `0`.
pub fn run_prog(n: u64, fuel: u64) -> Run {
    let fx = effects_for(Lang::Embed);
    let mut sigma = fx.initial_state();
    let mut h = Heap::default();
    let y = h.alloc(Later::now(GITree::nat(n)));
    sigma.set(store::FAMILY, SubState::Heap(Rc::new(h)));
    let body = delim::pop_prime(app(prog_tree(), GITree::loc(y)));
    let t = delim::reset(Later::now(body));
    run_from(t, &fx, sigma, fuel, &SchedulerPolicy::RoundRobin)
}
