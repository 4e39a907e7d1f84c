//! Executable equational laws: sequencing, application, homomorphisms and
//! one-step reification rules. Each check compares both sides up to a
//! bounded strict probe.

use std::rc::Rc;

use crate::bisim::{bisim_probe, Probe};
use crate::effects::{self, callcc, delim, exc, fork, store};
use crate::engine::{combine, istep, CompositeState, Effects, Heap, StepResult, SubState};
use crate::hom::Hom;
use crate::later::Later;
use crate::ops::{app, get_fun, get_ret, get_val, lift_k, natop, BinOp};
use crate::sched::{final_nat, run, run_from, Outcome, SchedulerPolicy};
use crate::tree::{ErrorKind, GITree, KFn};

#[derive(Clone, Debug)]
pub struct LawCheck {
    pub group: &'static str,
    pub name: String,
    pub holds: bool,
}

struct Book {
    group: &'static str,
    out: Vec<LawCheck>,
}

impl Book {
    fn check(&mut self, name: impl Into<String>, holds: bool) {
        self.out.push(LawCheck { group: self.group, name: name.into(), holds });
    }

    fn same(&mut self, name: impl Into<String>, a: &GITree, b: &GITree) {
        let holds = bisim_probe(a, b, Probe::default_strict());
        self.check(name, holds);
    }
}

fn values() -> Vec<(&'static str, GITree)> {
    vec![
        ("Ret 2", GITree::nat(2)),
        ("Ret ()", GITree::unit()),
        ("Fun id", GITree::fun(|x| x)),
    ]
}

type ValF = Rc<dyn Fn(GITree) -> GITree>;

fn conts() -> Vec<(&'static str, ValF)> {
    vec![
        ("const 5", Rc::new(|_| GITree::nat(5))),
        ("tick", Rc::new(GITree::tick)),
        ("read", Rc::new(|v| get_val(store::read(0), move |_| v.clone()))),
    ]
}

fn visible() -> Vec<(&'static str, GITree)> {
    vec![
        ("read 0", store::read(0)),
        ("write 0", store::write(0, GITree::nat(1))),
    ]
}

fn gv(a: GITree, f: &ValF) -> GITree {
    let f = f.clone();
    get_val(a, move |v| f(v))
}

/// Vis node with `g` pushed under its continuation.
fn under(t: &GITree, g: ValF) -> GITree {
    let GITree::Vis(v) = t else { unreachable!("visible samples are Vis") };
    let k = v.cont.clone();
    GITree::vis(
        v.op,
        v.input.clone(),
        v.out.clone(),
        Rc::new(move |o| {
            let g = g.clone();
            k(o).map(move |x| g(x))
        }),
    )
}

fn get_val_laws(b: &mut Book) {
    for (vn, v) in values() {
        for (fname, f) in conts() {
            b.same(format!("getval({vn}, {fname}) = f({vn})"), &gv(v.clone(), &f), &f(v.clone()));
        }
    }
    for e in [ErrorKind::RunTime, ErrorKind::Lin] {
        for (fname, f) in conts() {
            let lhs = gv(GITree::Err(e.clone()), &f);
            b.check(format!("getval(Err {e}, {fname}) = Err"), matches!(lhs, GITree::Err(ref x) if *x == e));
        }
    }
    for (fname, f) in conts() {
        let t = GITree::nat(3);
        let f2 = f.clone();
        let tau = GITree::tau(Later::new(move || GITree::nat(3)));
        b.same(
            format!("getval(Tau, {fname}) = Tau(getval)"),
            &gv(tau, &f),
            &GITree::tau(Later::new(move || gv(GITree::nat(3), &f2))),
        );
        b.same(
            format!("getval(Tick, {fname}) = Tick(getval)"),
            &gv(GITree::tick(t.clone()), &f),
            &GITree::tick(gv(t, &f)),
        );
        for (vn, vis) in visible() {
            let f3 = f.clone();
            b.same(
                format!("getval({vn}, {fname}) pushes under k"),
                &gv(vis.clone(), &f),
                &under(&vis, Rc::new(move |x| gv(x, &f3))),
            );
        }
    }
}

type Meta = Rc<dyn Fn(GITree) -> GITree>;

fn app_laws(b: &mut Book) {
    let fns: Vec<(&str, GITree, Meta)> = vec![
        ("id", GITree::fun(|x| x), Rc::new(|x| x)),
        ("succ", GITree::fun(|x| natop(BinOp::Add, x, GITree::nat(1))), Rc::new(|x| natop(BinOp::Add, x, GITree::nat(1)))),
    ];
    for (name, f, g) in &fns {
        for (vn, v) in [("Ret 4", GITree::nat(4)), ("Ret 0", GITree::nat(0))] {
            b.same(format!("APP(Fun {name}, Tick {vn}) = Tick APP"), &app(f.clone(), GITree::tick(v.clone())), &GITree::tick(app(f.clone(), v.clone())));
            b.same(format!("APP(Tick Fun {name}, {vn}) = Tick APP"), &app(GITree::tick(f.clone()), v.clone()), &GITree::tick(app(f.clone(), v.clone())));
            b.same(format!("APP(Fun {name}, {vn}) = Tick(g v)"), &app(f.clone(), v.clone()), &GITree::tick(g(v.clone())));
        }
        for (visn, vis) in visible() {
            let f2 = f.clone();
            b.same(
                format!("APP(Fun {name}, {visn}) pushes under k"),
                &app(f.clone(), vis.clone()),
                &under(&vis, Rc::new(move |y| app(f2.clone(), y))),
            );
        }
    }
    for (visn, vis) in visible() {
        let fv = GITree::fun(|x| x);
        let reads = get_val(vis.clone(), move |_| fv.clone());
        let w = GITree::nat(6);
        let w2 = w.clone();
        b.same(
            format!("APP({visn} ; Fun, v) pushes under k"),
            &app(reads.clone(), w.clone()),
            &under(&reads, Rc::new(move |y| app(y, w2.clone()))),
        );
    }
    for (n, f) in [("Ret 1", GITree::nat(1)), ("Ret ()", GITree::unit())] {
        b.check(
            format!("APP({n}, Ret 2) = Err RunTime"),
            matches!(app(f, GITree::nat(2)), GITree::Err(ErrorKind::RunTime)),
        );
    }
}

/// One instance of every homomorphism constructor.
pub fn hom_samples() -> Vec<(&'static str, Hom)> {
    vec![
        ("id", Hom::Id),
        ("compose", Hom::compose(Hom::NatOpLeft(BinOp::Add, GITree::nat(1)), Hom::NatOpRight(BinOp::Sub, GITree::nat(9)))),
        ("app-fun-hole", Hom::AppFunHole(GITree::nat(2))),
        ("app-arg-hole", Hom::AppArgHole(GITree::fun(|x| x))),
        ("get-val", Hom::GetVal(Rc::new(|v| natop(BinOp::Add, v, GITree::nat(1))))),
        ("get-fun", Hom::GetFun(Rc::new(|f| app(GITree::Fun(f), GITree::nat(3))))),
        ("get-ret", Hom::GetRet(Rc::new(GITree::Ret))),
        ("natop-left", Hom::NatOpLeft(BinOp::Add, GITree::nat(1))),
        ("natop-right", Hom::NatOpRight(BinOp::Sub, GITree::nat(9))),
        ("pop-prime", Hom::PopPrime),
    ]
}

fn hom_laws(b: &mut Book) {
    let p = Probe::default_strict();
    for (name, h) in hom_samples() {
        let [_, err, _] = h.equations(&GITree::nat(1), p);
        b.check(format!("{name}: fixes Err"), err);
        let [tick, _, _] = h.equations(&GITree::nat(4), p);
        b.check(format!("{name}: commutes with Tick"), tick);
        let [_, _, vis] = h.equations(&store::read(0), p);
        b.check(format!("{name}: commutes with Vis"), vis);
    }
}

/// One reification step. A successful step is a tick before the successor.
fn step1(fx: &Effects, t: &GITree, sigma: &CompositeState) -> Option<(GITree, CompositeState, usize)> {
    match istep(fx, t, sigma) {
        StepResult::Stepped { next: GITree::Tau(next), state, spawned, .. } => Some((next.force(), state, spawned.len())),
        _ => None,
    }
}

fn fx(rs: Vec<Rc<dyn crate::engine::Reifier>>) -> Effects {
    combine(rs).expect("disjoint families")
}

fn heap_with(vals: &[u64]) -> CompositeState {
    let mut h = Heap::default();
    for v in vals {
        h.alloc(Later::now(GITree::nat(*v)));
    }
    let mut s = CompositeState::default();
    s.set(store::FAMILY, SubState::Heap(Rc::new(h)));
    s
}

fn cell(s: &CompositeState, l: usize) -> Option<u64> {
    s.heap()?.get(l)?.force().as_u64()
}

fn store_rules(b: &mut Book) {
    let f = fx(vec![effects::store()]);
    let empty = f.initial_state();
    let r = step1(&f, &store::alloc(GITree::nat(4), GITree::loc), &empty);
    b.check(
        "alloc returns a fresh location and stores the value",
        r.is_some_and(|(n, s, _)| n.as_ground().and_then(|g| g.as_loc()) == Some(0) && cell(&s, 0) == Some(4)),
    );
    let r = step1(&f, &store::read(0), &heap_with(&[7]));
    b.check("read returns the contents", r.is_some_and(|(n, s, _)| n.as_u64() == Some(7) && cell(&s, 0) == Some(7)));
    let r = step1(&f, &store::write(0, GITree::nat(9)), &heap_with(&[7]));
    b.check("write replaces the contents", r.is_some_and(|(n, s, _)| n.render_value() == "()" && cell(&s, 0) == Some(9)));
    let r = step1(&f, &store::dealloc(0), &heap_with(&[7]));
    b.check("dealloc removes the cell", r.is_some_and(|(_, s, _)| s.heap().is_some_and(|h| h.get(0).is_none())));
    b.check(
        "read of a missing cell is a runtime error",
        matches!(istep(&f, &store::read(3), &empty), StepResult::Stepped { next: GITree::Err(ErrorKind::RunTime), .. }),
    );
    let r = step1(&f, &store::xchg(0, GITree::nat(1)), &heap_with(&[5]));
    b.check("xchg returns old, stores new", r.is_some_and(|(n, s, _)| n.as_u64() == Some(5) && cell(&s, 0) == Some(1)));
    let r = step1(&f, &store::faa(0, 3), &heap_with(&[5]));
    b.check("faa returns old, adds", r.is_some_and(|(n, s, _)| n.as_u64() == Some(5) && cell(&s, 0) == Some(8)));
    let r = step1(&f, &store::cas(0, GITree::nat(5), GITree::nat(2)), &heap_with(&[5]));
    b.check("cas succeeds on match", r.is_some_and(|(n, s, _)| n.as_u64() == Some(1) && cell(&s, 0) == Some(2)));
    let r = step1(&f, &store::cas(0, GITree::nat(4), GITree::nat(2)), &heap_with(&[5]));
    b.check("cas fails on mismatch", r.is_some_and(|(n, s, _)| n.as_u64() == Some(0) && cell(&s, 0) == Some(5)));
}

fn cc_rules(b: &mut Book) {
    let f = fx(vec![effects::callcc()]);
    let rr = SchedulerPolicy::RoundRobin;
    let plain = natop(BinOp::Add, callcc::callcc(|_| Later::now(GITree::nat(3))), GITree::nat(1));
    b.check("callcc body returns into the context", final_nat(&run(plain, &f, 100, &rr)) == Some(4));
    let jump = natop(
        BinOp::Add,
        callcc::callcc(|k| {
            let kv = callcc::cont_value(k);
            Later::now(natop(BinOp::Add, GITree::nat(100), get_fun(kv, |g| callcc::throw(Later::now(GITree::nat(5)), g))))
        }),
        GITree::nat(1),
    );
    b.check("throw discards the current context", final_nat(&run(jump, &f, 100, &rr)) == Some(6));
    let twice = callcc::callcc(|k| {
        let kv = callcc::cont_value(k);
        Later::now(get_fun(kv, |g| callcc::throw(Later::now(GITree::nat(2)), g)))
    });
    b.check("throw to the top continuation yields the value", final_nat(&run(twice, &f, 100, &rr)) == Some(2));
}

fn exc_rules(b: &mut Book) {
    let f = fx(vec![effects::exc()]);
    let rr = SchedulerPolicy::RoundRobin;
    let s0 = f.initial_state();
    let h: KFn = lift_k(|v| natop(BinOp::Add, v, GITree::nat(10)));
    let r = step1(&f, &exc::reg("A", h, Later::now(GITree::nat(1))), &s0);
    b.check("register pushes a handler and runs the body", r.is_some_and(|(n, s, _)| n.as_u64() == Some(1) && s.handler_depth() == Some(1)));
    let r = step1(&f, &exc::pop(GITree::nat(3)), &s0);
    b.check("pop on an empty stack continues", r.is_some_and(|(n, s, _)| n.as_u64() == Some(3) && s.handler_depth() == Some(0)));
    let caught = exc::catch("A", || natop(BinOp::Add, GITree::nat(1), exc::throw("A", GITree::nat(2))), |v| natop(BinOp::Add, v, GITree::nat(10)));
    let r = run(caught, &f, 100, &rr);
    b.check("throw runs the handler in the saved context", final_nat(&r) == Some(12) && r.state.handler_depth() == Some(0));
    let nested = exc::catch(
        "A",
        || exc::catch("A", || exc::throw("A", GITree::nat(1)), |v| natop(BinOp::Add, v, GITree::nat(20))),
        |v| natop(BinOp::Add, v, GITree::nat(30)),
    );
    b.check("nearest handler wins", final_nat(&run(nested, &f, 100, &rr)) == Some(21));
    let skip = exc::catch(
        "B",
        || exc::catch("A", || exc::throw("B", GITree::nat(1)), |v| v),
        |v| natop(BinOp::Add, v, GITree::nat(40)),
    );
    b.check("handlers for other names are skipped", final_nat(&run(skip, &f, 100, &rr)) == Some(41));
    let r = run(exc::throw("A", GITree::nat(1)), &f, 100, &rr);
    b.check("throw with no handler is a runtime error", matches!(r.outcome, Outcome::Error(ErrorKind::RunTime)));
}

fn conts_state(n: usize) -> CompositeState {
    let mut s = CompositeState::default();
    let ks: Vec<KFn> = (0..n).map(|i| lift_k(move |v| natop(BinOp::Add, v, GITree::nat(100 * (i as u64 + 1))))).collect();
    s.set(delim::FAMILY, SubState::Conts(Rc::new(ks)));
    s
}

fn delim_rules(b: &mut Book) {
    let f = fx(vec![effects::delim()]);
    let s0 = f.initial_state();
    let r = step1(&f, &delim::reset(Later::now(GITree::nat(1))), &s0);
    b.check("reset pushes the continuation", r.is_some_and(|(n, s, _)| n.as_u64() == Some(1) && s.cont_stack_len() == Some(1)));
    let r = step1(&f, &delim::pop(GITree::nat(2)), &s0);
    b.check("pop on an empty stack continues", r.is_some_and(|(n, s, _)| n.as_u64() == Some(2) && s.cont_stack_len() == Some(0)));
    let r = step1(&f, &delim::pop(GITree::nat(2)), &conts_state(2));
    b.check("pop resumes the top continuation", r.is_some_and(|(n, s, _)| n.as_u64() == Some(202) && s.cont_stack_len() == Some(1)));
    let r = step1(&f, &natop(BinOp::Add, delim::shift(|_| Later::now(GITree::nat(7))), GITree::nat(1)), &conts_state(1));
    b.check("shift drops the context", r.is_some_and(|(n, s, _)| n.as_u64() == Some(7) && s.cont_stack_len() == Some(1)));
    let body: crate::tree::FunBody = Rc::new(|x| natop(BinOp::Add, x, GITree::nat(1)));
    let r = step1(&f, &delim::appcont(Later::now(GITree::nat(4)), Later::now(body)), &s0);
    b.check("appcont pushes the caller and applies", r.is_some_and(|(n, s, _)| n.as_u64() == Some(5) && s.cont_stack_len() == Some(1)));
    let rr = SchedulerPolicy::RoundRobin;
    let prog = natop(BinOp::Add, GITree::nat(10), delim::delimit(|| natop(BinOp::Add, GITree::nat(2), delim::shift_pop(|_| GITree::nat(100)))));
    let r = run_from(prog, &f, s0, 100, &rr);
    b.check("aborting shift returns through reset", final_nat(&r) == Some(110) && r.state.cont_stack_len() == Some(0));
}

fn fork_rules(b: &mut Book) {
    let f = fx(vec![effects::fork()]);
    let r = step1(&f, &fork::fork(GITree::nat(1)), &f.initial_state());
    b.check("fork spawns one thread and returns unit", r.is_some_and(|(n, _, k)| n.render_value() == "()" && k == 1));
}

fn reify_rules(b: &mut Book) {
    store_rules(b);
    cc_rules(b);
    exc_rules(b);
    delim_rules(b);
    fork_rules(b);
}

fn extra_combinators(b: &mut Book) {
    b.check("get_ret on Fun is a runtime error", matches!(get_ret(GITree::fun(|x| x), GITree::Ret), GITree::Err(ErrorKind::RunTime)));
    b.check("get_fun on Ret is a runtime error", matches!(get_fun(GITree::nat(1), GITree::Fun), GITree::Err(ErrorKind::RunTime)));
    b.check(
        "natop absorbs errors",
        matches!(natop(BinOp::Add, GITree::Err(ErrorKind::Lin), GITree::nat(1)), GITree::Err(ErrorKind::Lin)),
    );
    b.check("natop subtraction truncates", natop(BinOp::Sub, GITree::nat(2), GITree::nat(5)).as_u64() == Some(0));
}

/// Every law instance, grouped.
pub fn check_all() -> Vec<LawCheck> {
    let mut out = Vec::new();
    type Group = (&'static str, fn(&mut Book));
    let groups: [Group; 5] = [
        ("get_val", get_val_laws),
        ("app", app_laws),
        ("hom", hom_laws),
        ("reify", reify_rules),
        ("combinators", extra_combinators),
    ];
    for (group, f) in groups {
        let mut b = Book { group, out: Vec::new() };
        f(&mut b);
        out.extend(b.out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_law_holds() {
        let all = check_all();
        let bad: Vec<_> = all.iter().filter(|c| !c.holds).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert!(all.len() >= 60, "{}", all.len());
    }
}
