//! One PASS/FAIL line per acceptance criterion.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gitree::gen::generate_many;
use gitree::harness::{cell_nat, check_run_soundness, diff, increment_race, run_prog, run_program, DiffReport};
use gitree::lang::{parse, typecheck, Lang};
use gitree::laws::check_all;
use gitree::{Outcome, SchedulerPolicy};

const FUEL: u64 = 10_000;
const LAW_MIN: usize = 60;
const LAW_BUDGET: Duration = Duration::from_secs(5);
const PROGRAMS_PER_LANG: usize = 100;
const GEN_SIZE: usize = 20;
const SOUNDNESS_MIN: usize = 500;
const RACE_MAX_RUNS: usize = 20;
const RACE_BUDGET: Duration = Duration::from_secs(1);
const AFF_PROGRAMS: usize = 50;
const REPEATS: usize = 10;

const HAND: &[(Lang, &str, u64)] = &[
    (Lang::Cc, "1 + callcc k. throw 41 to k", 42),
    (Lang::Delim, "reset (1 + shift k. k (k 10))", 12),
    (Lang::Delim, "10 + reset (2 + shift k. 100)", 110),
    (Lang::Exc, "try (try raise B 1 catch A with x. x + 10) catch B with y. y + 100", 101),
    (Lang::Exc, "try (try raise A 1 catch A with x. x + 10) catch A with y. y + 100", 11),
];

const STEP_CORPUS: &[(Lang, &str)] = &[
    (Lang::Exc, "try 1 + raise A 11 catch A with x. x + 1"),
    (Lang::Exc, "try (try raise B 1 catch A with x. x + 10) catch B with y. y + 100"),
    (Lang::Exc, "(try 2 catch A with x. x) + (try raise A 3 catch A with y. y + y)"),
    (Lang::Delim, "reset (1 + shift k. k (k 10))"),
    (Lang::Delim, "10 + reset (2 + shift k. 100)"),
    (Lang::Delim, "reset ((shift k. k 1) + (shift j. j 10))"),
];

const DELIM_CORPUS: &[(Lang, &str)] = &[
    (Lang::Delim, "reset (1 + shift k. k (k 10))"),
    (Lang::Delim, "10 + reset (2 + shift k. 100)"),
    (Lang::Delim, "reset (1 + reset (2 + shift k. k (k 3)))"),
    (Lang::Delim, "(fun f -> f (f 1)) (fun x -> reset (x + shift k. k (k 1)))"),
    (Lang::Embed, "(fun r -> (fun u -> !r) (r := !r + embed { reset (1 + shift k. k (k 10)) })) (alloc 3)"),
    (Lang::Embed, "embed { < 10 + < 2 + shift k. 100 > > }"),
];

const FORKING: &str = "(fun r -> fork { dealloc (alloc 1) }; fork { () }; !r) (alloc 6)";

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gitree-rt"))
}

fn example(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(rel)
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn laws() -> Result<String, String> {
    let t = Instant::now();
    let checks = check_all();
    let elapsed = t.elapsed();
    let failed: Vec<String> = checks.iter().filter(|c| !c.holds).map(|c| format!("{}/{}", c.group, c.name)).collect();
    if !failed.is_empty() {
        return Err(format!("failing: {}", failed.join(", ")));
    }
    if checks.len() < LAW_MIN {
        return Err(format!("only {} checks", checks.len()));
    }
    if elapsed >= LAW_BUDGET {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} laws hold in {elapsed:.2?}", checks.len()))
}

fn adequacy() -> Result<String, String> {
    for (lang, src, want) in HAND {
        let e = parse(*lang, src).map_err(|e| e.to_string())?;
        let rep = diff(*lang, &e, FUEL).unwrap().to_string();
        if rep != format!("AGREE({want})") {
            return Err(format!("{src}: {rep}"));
        }
    }
    let mut agree = 0;
    for lang in [Lang::Cc, Lang::Exc, Lang::Delim] {
        for e in generate_many(lang, PROGRAMS_PER_LANG, GEN_SIZE, 2024).map_err(|e| e.to_string())? {
            let rep = diff(lang, &e, FUEL).unwrap();
            if !rep.is_agreement() {
                return Err(format!("{e}: {rep}"));
            }
            agree += matches!(rep, DiffReport::Agree(_)) as usize;
        }
    }
    Ok(format!("{} hand programs, {} generated, {agree} agree on a value", HAND.len(), 3 * PROGRAMS_PER_LANG))
}

fn soundness() -> Result<String, String> {
    let mut n = 0;
    for (lang, src) in STEP_CORPUS {
        let e = parse(*lang, src).map_err(|e| e.to_string())?;
        n += check_run_soundness(*lang, &e, FUEL, FUEL, &mut |_| true).map_err(|m| format!("{src}: {m}"))?;
    }
    for lang in [Lang::Exc, Lang::Delim] {
        for e in generate_many(lang, 40, 14, 77).map_err(|e| e.to_string())? {
            n += check_run_soundness(lang, &e, 2_000, FUEL, &mut |i| i % 3 == 0).map_err(|m| format!("{e}: {m}"))?;
        }
    }
    if n < SOUNDNESS_MIN {
        return Err(format!("only {n} steps sampled"));
    }
    Ok(format!("{n} steps sound"))
}

fn prog() -> Result<String, String> {
    for n in [0, 1, 5] {
        let r = run_prog(n, FUEL);
        if !matches!(r.outcome, Outcome::FinalValue(_)) {
            return Err(format!("n = {n}: {}", r.outcome.report()));
        }
        if cell_nat(&r, 0) != Some(n + 3) {
            return Err(format!("n = {n}: y = {:?}", cell_nat(&r, 0)));
        }
        if r.state.cont_stack_len() != Some(0) {
            return Err(format!("n = {n}: stack {:?}", r.state.cont_stack_len()));
        }
    }
    Ok("y = n + 3 for n in 0, 1, 5".into())
}

fn atomicity() -> Result<String, String> {
    let t = Instant::now();
    let faa = increment_race(true).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    if faa.is_empty() || faa.len() > RACE_MAX_RUNS || elapsed >= RACE_BUDGET {
        return Err(format!("{} interleavings in {elapsed:?}", faa.len()));
    }
    if let Some(r) = faa.iter().find(|r| cell_nat(r, 0) != Some(2)) {
        return Err(format!("FAA ended with {:?}", cell_nat(r, 0)));
    }
    let rw = increment_race(false).map_err(|e| e.to_string())?;
    if rw.len() > RACE_MAX_RUNS || !rw.iter().any(|r| cell_nat(r, 0) == Some(1)) {
        return Err("read/write race never loses an update".into());
    }
    Ok(format!("{} FAA interleavings all end at 2", faa.len()))
}

fn affine() -> Result<String, String> {
    let mut policies = vec![SchedulerPolicy::RoundRobin];
    policies.extend((1..=5).map(SchedulerPolicy::Random));
    let progs = generate_many(Lang::Aff, AFF_PROGRAMS, GEN_SIZE, 31).map_err(|e| e.to_string())?;
    for e in &progs {
        typecheck(Lang::Aff, e).map_err(|err| format!("{e}: {err}"))?;
        for p in &policies {
            let r = run_program(Lang::Aff, e, FUEL, p);
            if !matches!(r.outcome, Outcome::FinalValue(_) | Outcome::Timeout) {
                return Err(format!("{e} under {p}: {}", r.outcome.report()));
            }
        }
    }
    let file = example("aff/double_use.aff");
    for _ in 0..3 {
        let out = exe().arg("run").arg(&file).arg("--no-typecheck").output().unwrap();
        let text = String::from_utf8_lossy(&out.stdout);
        if text.trim() != "ERROR Lin" || out.status.code() != Some(4) {
            return Err(format!("double use printed {text:?}"));
        }
    }
    Ok(format!("{} programs x {} schedules, double use gives ERROR Lin", progs.len(), policies.len()))
}

fn brackets() -> Result<String, String> {
    let mut runs = Vec::new();
    for (lang, src) in DELIM_CORPUS {
        runs.push((*lang, parse(*lang, src).map_err(|e| format!("{src}: {e}"))?));
    }
    for lang in [Lang::Delim, Lang::Embed] {
        runs.extend(generate_many(lang, PROGRAMS_PER_LANG, GEN_SIZE, 5).map_err(|e| e.to_string())?.into_iter().map(|e| (lang, e)));
    }
    let mut finished = 0;
    for (lang, e) in &runs {
        let r = run_program(*lang, e, FUEL, &SchedulerPolicy::RoundRobin);
        if let Outcome::FinalValue(_) = r.outcome {
            finished += 1;
            if r.state.cont_stack_len() != Some(0) {
                return Err(format!("{e}: stack {:?}", r.state.cont_stack_len()));
            }
        }
    }
    if finished < DELIM_CORPUS.len() {
        return Err(format!("only {finished} runs finished"));
    }
    Ok(format!("{finished} terminating runs end with an empty stack"))
}

fn capture(args: &[&str], trace: Option<&PathBuf>) -> Vec<u8> {
    let mut c = exe();
    c.args(args);
    if let Some(t) = trace {
        c.arg("--trace").arg(t);
    }
    let out = c.output().unwrap();
    let mut bytes = out.stdout;
    bytes.extend(out.status.code().unwrap_or(-1).to_string().bytes());
    if let Some(t) = trace {
        bytes.extend(std::fs::read(t).unwrap_or_default());
        let _ = std::fs::remove_file(t);
    }
    bytes
}

fn determinism() -> Result<String, String> {
    let forking = scratch("forking.aff");
    std::fs::write(&forking, FORKING).unwrap();
    let forking = forking.to_str().unwrap().to_owned();
    let k_twice = example("delim/k_twice.dl").to_str().unwrap().to_owned();
    let prog = example("ffi/prog_fig.emb").to_str().unwrap().to_owned();
    let trace = scratch("trace.jsonl");
    let cases: Vec<(Vec<&str>, bool)> = vec![
        (vec!["run", &k_twice], true),
        (vec!["run", &k_twice, "--mode", "machine"], true),
        (vec!["run", &prog, "--inspect-heap", "y"], true),
        (vec!["run", &forking, "--sched", "rand:7"], true),
        (vec!["run", &forking, "--sched", "rand:8"], true),
        (vec!["diff", "--lang", "delim", "--count", "20", "--seed", "3"], false),
        (vec!["diff", "--lang", "exc", "--count", "20", "--seed", "4"], false),
    ];
    for (args, traced) in &cases {
        let t = traced.then_some(&trace);
        let first = capture(args, t);
        if first.is_empty() {
            return Err(format!("{args:?} printed nothing"));
        }
        for _ in 1..REPEATS {
            if capture(args, t) != first {
                return Err(format!("{args:?} differs between invocations"));
            }
        }
    }
    Ok(format!("{} invocations x {REPEATS} repeats byte-identical", cases.len()))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Result<String, String>);
    let criteria: [Criterion; 8] = [
        ("equational laws", laws),
        ("adequacy differential", adequacy),
        ("step soundness", soundness),
        ("prog reproduction", prog),
        ("concurrency atomicity", atomicity),
        ("affine type safety", affine),
        ("delimiter brackets", brackets),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS criterion {}: {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
