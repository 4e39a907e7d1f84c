//! `gitree-rt`: run, compare, generate and typecheck object-language programs.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gitree::engine::trace_to_jsonl;
use gitree::gen::Gen;
use gitree::harness::{diff, effects_for, program_tree, program_tree_watching, DiffReport};
use gitree::lang::syntax::E;
use gitree::lang::{parse, typecheck, Lang};
use gitree::machine::{run_machine, trace_jsonl, MachineOutcome};
use gitree::sched::{explore, run_from, Stop, EXHAUSTIVE_MAX_FUEL};
use gitree::{GITree, Outcome, SchedulerPolicy};

use config::FileConfig;

const DEFAULT_FUEL: u64 = 10_000;
const PRAGMA: &str = "# gitree: no-typecheck";

const EXIT_VALUE: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_TYPE: u8 = 3;
const EXIT_RUNTIME: u8 = 4;
const EXIT_NO_VALUE: u8 = 5;

#[derive(Parser)]
#[command(name = "gitree-rt", version, about = "Run and cross-check programs over guarded interaction trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a program and print its outcome.
    Run(RunArgs),
    /// Compare the denotation with the abstract machine.
    Diff(DiffArgs),
    /// Print generated well-typed programs.
    Fuzz(FuzzArgs),
    /// Print the type of a program.
    Typecheck(TypecheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Denote,
    Machine,
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long)]
    lang: Option<Lang>,
    #[arg(long)]
    fuel: Option<u64>,
    /// rr, rand:SEED, exhaustive or exhaustive-visible
    #[arg(long)]
    sched: Option<SchedulerPolicy>,
    /// Write a JSON-lines event trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    no_typecheck: bool,
    /// Print the final heap cell bound to this variable.
    #[arg(long, value_name = "VAR")]
    inspect_heap: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Args)]
struct DiffArgs {
    /// Program to compare; without it, generated programs are compared.
    file: Option<PathBuf>,
    #[arg(long)]
    lang: Option<Lang>,
    #[arg(long)]
    fuel: Option<u64>,
    #[arg(long)]
    no_typecheck: bool,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    size: usize,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long)]
    lang: Lang,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    size: usize,
    /// Also write each program to its own file in this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TypecheckArgs {
    file: PathBuf,
    #[arg(long)]
    lang: Option<Lang>,
}

/// Failure that maps to a specific exit status.
struct Exit(u8);

struct Source {
    lang: Lang,
    text: String,
}

impl Source {
    fn load(path: &Path, lang: Option<Lang>) -> anyhow::Result<Source> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let lang = match lang {
            Some(l) => l,
            None => path
                .extension()
                .and_then(|e| e.to_str())
                .and_then(Lang::from_extension)
                .ok_or_else(|| anyhow!("cannot infer language of {}; pass --lang", path.display()))?,
        };
        Ok(Source { lang, text })
    }

    fn pragma_off(&self) -> bool {
        self.text.lines().any(|l| l.trim() == PRAGMA)
    }

    /// Parse, then typecheck unless disabled.
    fn program(&self, check: bool) -> Result<E, Exit> {
        let e = parse(self.lang, &self.text).map_err(|err| {
            eprintln!("parse error: {err}");
            Exit(EXIT_PARSE)
        })?;
        if check && !self.pragma_off() {
            typecheck(self.lang, &e).map_err(|err| {
                eprintln!("type error: {err}");
                Exit(EXIT_TYPE)
            })?;
        }
        Ok(e)
    }
}

fn lang_of(flag: Option<Lang>, cfg: &Option<String>) -> anyhow::Result<Option<Lang>> {
    match (flag, cfg) {
        (Some(l), _) => Ok(Some(l)),
        (None, Some(s)) => Ok(Some(s.parse()?)),
        (None, None) => Ok(None),
    }
}

fn outcome_exit(o: &Outcome) -> u8 {
    match o {
        Outcome::FinalValue(_) => EXIT_VALUE,
        Outcome::Error(_) => EXIT_RUNTIME,
        Outcome::Timeout | Outcome::Stuck(_) => EXIT_NO_VALUE,
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(a: RunArgs) -> anyhow::Result<u8> {
    let cfg = FileConfig::load(a.config.as_deref())?;
    let src = Source::load(&a.file, lang_of(a.lang, &cfg.lang)?)?;
    let fuel = a.fuel.or(cfg.fuel);
    let sched = match (a.sched, &cfg.sched) {
        (Some(s), _) => s,
        (None, Some(s)) => s.parse()?,
        (None, None) => SchedulerPolicy::RoundRobin,
    };
    let mode = match (a.mode, &cfg.mode) {
        (Some(m), _) => m,
        (None, Some(m)) => Mode::from_str(m, true).map_err(|e| anyhow!(e))?,
        (None, None) => Mode::Denote,
    };
    let trace = a.trace.or(cfg.trace);
    let check = !(a.no_typecheck || cfg.no_typecheck.unwrap_or(false));
    let e = match src.program(check) {
        Ok(e) => e,
        Err(Exit(code)) => return Ok(code),
    };
    let lang = src.lang;

    if mode == Mode::Machine {
        let (out, _, configs) = run_machine(lang, &e, fuel.unwrap_or(DEFAULT_FUEL))
            .ok_or_else(|| anyhow!("no abstract machine for {}", lang.name()))?;
        println!("{}", out.report());
        if let Some(p) = trace {
            write_file(&p, &trace_jsonl(&configs))?;
        }
        return Ok(match out {
            MachineOutcome::Terminal(_) => EXIT_VALUE,
            _ => EXIT_NO_VALUE,
        });
    }

    let (tree, watch) = match &a.inspect_heap {
        Some(x) => {
            let (t, w) = program_tree_watching(lang, &e, x)
                .ok_or_else(|| anyhow!("no top-level binder `{x}` to inspect"))?;
            (t, Some(w))
        }
        None => (program_tree(lang, &e), None),
    };
    let fx = effects_for(lang);

    if let SchedulerPolicy::Exhaustive { collapse_silent } = sched {
        let fuel = fuel.unwrap_or(EXHAUSTIVE_MAX_FUEL);
        let runs = explore(vec![tree], &fx, fx.initial_state(), fuel, Stop::Main, collapse_silent)?;
        let mut seen: Vec<String> = Vec::new();
        for r in &runs {
            let rep = r.outcome.report();
            if !seen.contains(&rep) {
                seen.push(rep);
            }
        }
        eprintln!("{} interleavings", runs.len());
        for s in &seen {
            println!("{s}");
        }
        if let Some(p) = trace {
            let all: String = runs.iter().map(|r| trace_to_jsonl(&r.trace)).collect();
            write_file(&p, &all)?;
        }
        return Ok(runs.iter().map(|r| outcome_exit(&r.outcome)).max().unwrap_or(EXIT_VALUE));
    }

    let r = run_from(tree, &fx, fx.initial_state(), fuel.unwrap_or(DEFAULT_FUEL), &sched);
    println!("{}", r.outcome.report());
    if let (Some(x), Some(w)) = (&a.inspect_heap, watch) {
        println!("{}", show_binding(x, w.borrow().as_ref(), &r.state));
    }
    if let Some(p) = trace {
        write_file(&p, &trace_to_jsonl(&r.trace))?;
    }
    Ok(outcome_exit(&r.outcome))
}

fn show_binding(x: &str, v: Option<&GITree>, state: &gitree::CompositeState) -> String {
    let Some(v) = v else {
        return format!("{x} unbound");
    };
    let loc = v.as_ground().and_then(|g| g.as_loc());
    match (loc, state.heap()) {
        (Some(l), Some(h)) => match h.get(l) {
            Some(cell) => format!("{x} = {}", cell.force().render_value()),
            None => format!("{x} = <freed loc {l}>"),
        },
        _ => format!("{x} = {}", v.render_value()),
    }
}

fn cmd_diff(a: DiffArgs) -> anyhow::Result<u8> {
    let cfg = FileConfig::load(a.config.as_deref())?;
    let fuel = a.fuel.or(cfg.fuel).unwrap_or(DEFAULT_FUEL);
    let lang = lang_of(a.lang, &cfg.lang)?;
    let mut out = std::io::stdout().lock();
    if let Some(path) = &a.file {
        let src = Source::load(path, lang)?;
        let check = !(a.no_typecheck || cfg.no_typecheck.unwrap_or(false));
        let e = match src.program(check) {
            Ok(e) => e,
            Err(Exit(code)) => return Ok(code),
        };
        let rep = diff(src.lang, &e, fuel).ok_or_else(|| anyhow!("no abstract machine for {}", src.lang.name()))?;
        writeln!(out, "{rep}")?;
        return Ok(if rep.is_agreement() { EXIT_VALUE } else { EXIT_USAGE });
    }
    let lang = lang.ok_or_else(|| anyhow!("pass a file or --lang"))?;
    if !lang.has_machine() {
        bail!("no abstract machine for {}", lang.name());
    }
    let mut g = Gen::new(lang, a.seed);
    let (mut agree, mut disagree, mut timeout, mut stuck) = (0, 0, 0, 0);
    for i in 0..a.count {
        let e = g.program(a.size)?;
        let rep = diff(lang, &e, fuel).expect("language has a machine");
        match rep {
            DiffReport::Agree(_) => agree += 1,
            DiffReport::Disagree { .. } => disagree += 1,
            DiffReport::BothTimeout => timeout += 1,
            DiffReport::BothStuck => stuck += 1,
        }
        writeln!(out, "{i}\t{rep}\t{e}")?;
    }
    writeln!(out, "agree {agree}, disagree {disagree}, both-timeout {timeout}, both-stuck {stuck}")?;
    Ok(if disagree == 0 { EXIT_VALUE } else { EXIT_USAGE })
}

fn cmd_fuzz(a: FuzzArgs) -> anyhow::Result<u8> {
    let mut g = Gen::new(a.lang, a.seed);
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut out = std::io::stdout().lock();
    for i in 0..a.count {
        let e = g.program(a.size)?;
        writeln!(out, "{e}")?;
        if let Some(dir) = &a.out {
            write_file(&dir.join(format!("gen_{i:04}.{}", a.lang.extension())), &format!("{e}\n"))?;
        }
    }
    Ok(EXIT_VALUE)
}

fn cmd_typecheck(a: TypecheckArgs) -> anyhow::Result<u8> {
    let src = Source::load(&a.file, a.lang)?;
    let e = match parse(src.lang, &src.text) {
        Ok(e) => e,
        Err(err) => {
            eprintln!("parse error: {err}");
            return Ok(EXIT_PARSE);
        }
    };
    match typecheck(src.lang, &e) {
        Ok(t) => {
            println!("{t}");
            Ok(EXIT_VALUE)
        }
        Err(err) => {
            println!("type error: {err}");
            Ok(EXIT_TYPE)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Diff(a) => cmd_diff(a),
        Cmd::Fuzz(a) => cmd_fuzz(a),
        Cmd::Typecheck(a) => cmd_typecheck(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
