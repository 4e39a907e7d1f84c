//! Scheduling policies and the fuel-bounded run loop.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{
    istep, CompositeState, Effects, Event, StepKind, StepResult, StuckReason,
};
use crate::tree::{ErrorKind, GITree};

pub const EXHAUSTIVE_MAX_THREADS: usize = 3;
pub const EXHAUSTIVE_MAX_FUEL: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchedulerPolicy {
    RoundRobin,
    Random(u64),
    /// Every choice sequence. With `collapse_silent`, threads whose head is a
    /// silent step are advanced without branching.
    Exhaustive { collapse_silent: bool },
}

impl fmt::Display for SchedulerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulerPolicy::RoundRobin => f.write_str("rr"),
            SchedulerPolicy::Random(s) => write!(f, "rand:{s}"),
            SchedulerPolicy::Exhaustive { collapse_silent: false } => f.write_str("exhaustive"),
            SchedulerPolicy::Exhaustive { collapse_silent: true } => f.write_str("exhaustive-visible"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown scheduler `{0}` (expected rr, rand:SEED, exhaustive or exhaustive-visible)")]
pub struct BadPolicy(String);

impl FromStr for SchedulerPolicy {
    type Err = BadPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rr" | "round-robin" => Ok(SchedulerPolicy::RoundRobin),
            "exhaustive" => Ok(SchedulerPolicy::Exhaustive { collapse_silent: false }),
            "exhaustive-visible" => Ok(SchedulerPolicy::Exhaustive { collapse_silent: true }),
            _ => s
                .strip_prefix("rand:")
                .and_then(|n| n.parse().ok())
                .map(SchedulerPolicy::Random)
                .ok_or_else(|| BadPolicy(s.to_string())),
        }
    }
}

/// Scheduler view of one thread.
#[derive(Clone, Copy, Debug)]
pub struct ThreadView {
    pub index: usize,
    pub silent: bool,
}

/// Picks the next thread among runnable ones.
pub trait Scheduler {
    fn choose(&mut self, runnable: &[ThreadView]) -> usize;
}

#[derive(Default)]
pub struct RoundRobin {
    last: Option<usize>,
}

impl Scheduler for RoundRobin {
    fn choose(&mut self, runnable: &[ThreadView]) -> usize {
        let pick = match self.last {
            None => runnable[0].index,
            Some(l) => runnable
                .iter()
                .find(|t| t.index > l)
                .unwrap_or(&runnable[0])
                .index,
        };
        self.last = Some(pick);
        pick
    }
}

pub struct RandomSched {
    rng: ChaCha8Rng,
}

impl RandomSched {
    pub fn new(seed: u64) -> Self {
        RandomSched {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Scheduler for RandomSched {
    fn choose(&mut self, runnable: &[ThreadView]) -> usize {
        runnable[self.rng.random_range(0..runnable.len())].index
    }
}

/// Replays a choice prefix, then always takes the first option, recording
/// the branching factor of every decision.
pub struct Replay {
    prefix: Vec<usize>,
    pos: usize,
    collapse_silent: bool,
    pub decisions: Vec<(usize, usize)>,
}

impl Replay {
    pub fn new(prefix: Vec<usize>, collapse_silent: bool) -> Self {
        Replay {
            prefix,
            pos: 0,
            collapse_silent,
            decisions: Vec::new(),
        }
    }
}

impl Scheduler for Replay {
    fn choose(&mut self, runnable: &[ThreadView]) -> usize {
        if self.collapse_silent {
            if let Some(t) = runnable.iter().find(|t| t.silent) {
                return t.index;
            }
        }
        if runnable.len() == 1 {
            return runnable[0].index;
        }
        let c = self.prefix.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        self.decisions.push((c, runnable.len()));
        runnable[c].index
    }
}

/// When a run counts as finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// Thread 0 is a value.
    Main,
    /// Every thread is a value.
    AllThreads,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    FinalValue(GITree),
    Error(ErrorKind),
    Timeout,
    Stuck(String),
}

impl Outcome {
    /// One-line report used by the CLI.
    pub fn report(&self) -> String {
        match self {
            Outcome::FinalValue(v) => format!("VALUE {}", v.render_value()),
            Outcome::Error(k) => format!("ERROR {k}"),
            Outcome::Timeout => "TIMEOUT".into(),
            Outcome::Stuck(_) => "STUCK".into(),
        }
    }

    pub fn value(&self) -> Option<&GITree> {
        match self {
            Outcome::FinalValue(v) => Some(v),
            _ => None,
        }
    }

    /// Equality on observable results; `None` if function values are compared.
    pub fn observably_eq(&self, other: &Outcome) -> Option<bool> {
        match (self, other) {
            (Outcome::FinalValue(a), Outcome::FinalValue(b)) => match (a, b) {
                (GITree::Ret(x), GITree::Ret(y)) => x.try_eq(y),
                (GITree::Fun(_), GITree::Fun(_)) => None,
                _ => Some(false),
            },
            (Outcome::Error(a), Outcome::Error(b)) => Some(a == b),
            (Outcome::Timeout, Outcome::Timeout) => Some(true),
            (Outcome::Stuck(_), Outcome::Stuck(_)) => Some(true),
            _ => Some(false),
        }
    }
}

/// Result of a run with its final pool, state and trace.
#[derive(Clone, Debug)]
pub struct Run {
    pub outcome: Outcome,
    pub state: CompositeState,
    pub pool: Vec<GITree>,
    pub trace: Vec<Event>,
    pub steps: u64,
}

impl Run {
    pub fn effect_events(&self) -> Vec<&Event> {
        self.trace.iter().filter(|e| e.is_effect()).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExploreError {
    #[error("exhaustive exploration limited to {max} threads, pool reached {got}")]
    TooManyThreads { max: usize, got: usize },
    #[error("exhaustive exploration limited to fuel {max}, got {got}")]
    TooMuchFuel { max: u64, got: u64 },
}

/// Drive a pool with an explicit scheduler.
pub fn run_pool_with(
    effects: &Effects,
    mut pool: Vec<GITree>,
    mut sigma: CompositeState,
    fuel: u64,
    stop: Stop,
    sched: &mut dyn Scheduler,
) -> Run {
    let mut trace = Vec::new();
    let mut steps = 0u64;
    let finish = |outcome, sigma, pool, trace, steps| Run {
        outcome,
        state: sigma,
        pool,
        trace,
        steps,
    };
    loop {
        if let Some(GITree::Err(e)) = pool.iter().find(|t| matches!(t, GITree::Err(_))) {
            let e = e.clone();
            return finish(Outcome::Error(e), sigma, pool, trace, steps);
        }
        let done = match stop {
            Stop::Main => pool[0].is_value(),
            Stop::AllThreads => pool.iter().all(GITree::is_value),
        };
        if done {
            let v = pool[0].clone();
            return finish(Outcome::FinalValue(v), sigma, pool, trace, steps);
        }
        let runnable: Vec<ThreadView> = pool
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, GITree::Tau(_) | GITree::Vis(_)))
            .map(|(index, t)| ThreadView {
                index,
                silent: matches!(t, GITree::Tau(_)),
            })
            .collect();
        if runnable.is_empty() {
            return finish(
                Outcome::Stuck("no runnable thread".into()),
                sigma,
                pool,
                trace,
                steps,
            );
        }
        if steps >= fuel {
            return finish(Outcome::Timeout, sigma, pool, trace, steps);
        }
        let choice = sched.choose(&runnable);
        let (next, state, spawned, kind) = match istep(effects, &pool[choice], &sigma) {
            StepResult::Stuck(StuckReason::Error(e)) => {
                return finish(Outcome::Error(e), sigma, pool, trace, steps)
            }
            StepResult::Stuck(r) => {
                return finish(Outcome::Stuck(r.to_string()), sigma, pool, trace, steps)
            }
            StepResult::Value(_) => unreachable!("values are not runnable"),
            StepResult::Stepped {
                next,
                state,
                spawned,
                kind,
            } => (next, state, spawned, kind),
        };
        match kind {
            StepKind::Tau => trace.push(Event {
                step: steps,
                thread: choice,
                kind: "tau",
                op: None,
                input: None,
                count: None,
            }),
            StepKind::Effect { op, input } => {
                trace.push(Event {
                    step: steps,
                    thread: choice,
                    kind: "effect",
                    op: Some(op.to_string()),
                    input: Some(input),
                    count: None,
                });
                if !spawned.is_empty() {
                    trace.push(Event {
                        step: steps,
                        thread: choice,
                        kind: "spawn",
                        op: None,
                        input: None,
                        count: Some(spawned.len()),
                    });
                }
            }
        }
        pool[choice] = next;
        pool.extend(spawned);
        sigma = state;
        steps += 1;
    }
}

/// Run a single tree from the initial state of `effects`.
pub fn run(a: GITree, effects: &Effects, fuel: u64, policy: &SchedulerPolicy) -> Run {
    run_from(a, effects, effects.initial_state(), fuel, policy)
}

/// Run a single tree from a given state. Exhaustive policy replays the first branch.
pub fn run_from(
    a: GITree,
    effects: &Effects,
    sigma: CompositeState,
    fuel: u64,
    policy: &SchedulerPolicy,
) -> Run {
    run_pool(vec![a], effects, sigma, fuel, Stop::Main, policy)
}

pub fn run_pool(
    pool: Vec<GITree>,
    effects: &Effects,
    sigma: CompositeState,
    fuel: u64,
    stop: Stop,
    policy: &SchedulerPolicy,
) -> Run {
    match policy {
        SchedulerPolicy::RoundRobin => {
            run_pool_with(effects, pool, sigma, fuel, stop, &mut RoundRobin::default())
        }
        SchedulerPolicy::Random(seed) => {
            run_pool_with(effects, pool, sigma, fuel, stop, &mut RandomSched::new(*seed))
        }
        SchedulerPolicy::Exhaustive { collapse_silent } => run_pool_with(
            effects,
            pool,
            sigma,
            fuel,
            stop,
            &mut Replay::new(Vec::new(), *collapse_silent),
        ),
    }
}

/// Depth-first enumeration of every choice sequence.
pub fn explore(
    pool: Vec<GITree>,
    effects: &Effects,
    sigma: CompositeState,
    fuel: u64,
    stop: Stop,
    collapse_silent: bool,
) -> Result<Vec<Run>, ExploreError> {
    if fuel > EXHAUSTIVE_MAX_FUEL {
        return Err(ExploreError::TooMuchFuel {
            max: EXHAUSTIVE_MAX_FUEL,
            got: fuel,
        });
    }
    let mut runs = Vec::new();
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut replay = Replay::new(prefix.clone(), collapse_silent);
        let r = run_pool_with(effects, pool.clone(), sigma.clone(), fuel, stop, &mut replay);
        if r.pool.len() > EXHAUSTIVE_MAX_THREADS {
            return Err(ExploreError::TooManyThreads {
                max: EXHAUSTIVE_MAX_THREADS,
                got: r.pool.len(),
            });
        }
        runs.push(r);
        let mut d = replay.decisions;
        loop {
            match d.pop() {
                None => return Ok(runs),
                Some((c, n)) if c + 1 < n => {
                    prefix = d.iter().map(|(c, _)| *c).collect();
                    prefix.push(c + 1);
                    break;
                }
                Some(_) => {}
            }
        }
    }
}

/// Convenience: the value of thread 0 as a small natural.
pub fn final_nat(r: &Run) -> Option<u64> {
    r.outcome.value().and_then(GITree::as_u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::later::Later;

    fn ticks(k: usize, v: GITree) -> GITree {
        (0..k).fold(v, |t, _| GITree::tick(t))
    }

    fn omega() -> GITree {
        GITree::Tau(Later::new(omega))
    }

    fn views(n: usize) -> Vec<ThreadView> {
        (0..n)
            .map(|index| ThreadView {
                index,
                silent: true,
            })
            .collect()
    }

    #[test]
    fn value_needs_no_fuel() {
        let r = run(GITree::nat(5), &Effects::none(), 0, &SchedulerPolicy::RoundRobin);
        assert_eq!(final_nat(&r), Some(5));
        assert!(r.trace.is_empty());
    }

    #[test]
    fn k_ticks_take_k_steps() {
        let r = run(ticks(7, GITree::nat(5)), &Effects::none(), 7, &SchedulerPolicy::RoundRobin);
        assert_eq!(final_nat(&r), Some(5));
        assert_eq!(r.trace.iter().filter(|e| e.kind == "tau").count(), 7);
        let short = run(ticks(7, GITree::nat(5)), &Effects::none(), 6, &SchedulerPolicy::RoundRobin);
        assert!(matches!(short.outcome, Outcome::Timeout));
    }

    #[test]
    fn omega_times_out() {
        let r = run(omega(), &Effects::none(), 100, &SchedulerPolicy::RoundRobin);
        assert!(matches!(r.outcome, Outcome::Timeout));
        assert_eq!(r.steps, 100);
    }

    #[test]
    fn round_robin_alternates() {
        let mut rr = RoundRobin::default();
        let picks: Vec<usize> = (0..4).map(|_| rr.choose(&views(2))).collect();
        assert_eq!(picks, vec![0, 1, 0, 1]);
    }

    #[test]
    fn random_is_reproducible() {
        let mut a = RandomSched::new(9);
        let mut b = RandomSched::new(9);
        let xs: Vec<usize> = (0..32).map(|_| a.choose(&views(3))).collect();
        let ys: Vec<usize> = (0..32).map(|_| b.choose(&views(3))).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn exhaustive_two_by_two_is_six() {
        let pool = vec![ticks(2, GITree::nat(0)), ticks(2, GITree::nat(1))];
        let fx = Effects::none();
        let runs = explore(pool, &fx, fx.initial_state(), 10, Stop::AllThreads, false).unwrap();
        assert_eq!(runs.len(), 6);
        let mut orders: Vec<Vec<usize>> =
            runs.iter().map(|r| r.trace.iter().map(|e| e.thread).collect()).collect();
        orders.sort();
        orders.dedup();
        assert_eq!(orders.len(), 6);
    }

    #[test]
    fn exhaustive_refuses_big_fuel() {
        let fx = Effects::none();
        let e = explore(vec![GITree::nat(0)], &fx, fx.initial_state(), 65, Stop::Main, false);
        assert!(matches!(e, Err(ExploreError::TooMuchFuel { .. })));
    }

    #[test]
    fn policies_parse() {
        assert_eq!("rr".parse::<SchedulerPolicy>().unwrap(), SchedulerPolicy::RoundRobin);
        assert_eq!("rand:7".parse::<SchedulerPolicy>().unwrap(), SchedulerPolicy::Random(7));
        assert!("rand:x".parse::<SchedulerPolicy>().is_err());
    }
}
