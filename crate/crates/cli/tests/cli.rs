use std::path::PathBuf;
use std::process::{Command, Output};

fn exe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gitree-rt")).args(args).output().unwrap()
}

fn example(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(rel).to_str().unwrap().to_owned()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn examples() {
    let o = exe(&["run", &example("delim/k_twice.dl")]);
    assert_eq!(stdout(&o), "VALUE 12\n");
    assert_eq!(o.status.code(), Some(0));

    let o = exe(&["run", &example("ffi/prog_fig.emb"), "--inspect-heap", "y"]);
    assert_eq!(stdout(&o), "VALUE ()\ny = 8\n");

    let o = exe(&["run", &example("aff/double_use.aff"), "--no-typecheck"]);
    assert_eq!(stdout(&o), "ERROR Lin\n");
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn exit_codes() {
    assert_eq!(exe(&["run", &example("aff/double_use.aff")]).status.code(), Some(3));
    assert_eq!(exe(&["run", &scratch("bad.cc", "1 +")]).status.code(), Some(2));
    let diverge = scratch("loop.cc", "(rec f n = f n) 1");
    let o = exe(&["run", &diverge, "--fuel", "50"]);
    assert_eq!(stdout(&o), "TIMEOUT\n");
    assert_eq!(o.status.code(), Some(5));
    let o = exe(&["diff", &diverge, "--fuel", "50"]);
    assert_eq!(stdout(&o), "BOTH-TIMEOUT\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(exe(&["run", &scratch("raise.exc", "raise A 1")]).status.code(), Some(4));
    assert_eq!(exe(&["run", "/nonexistent/x.cc"]).status.code(), Some(1));
}

#[test]
fn machine_mode() {
    let o = exe(&["run", &example("delim/k_twice.dl"), "--mode", "machine"]);
    assert_eq!(stdout(&o), "VALUE 12\n");
    let o = exe(&["run", &example("aff/double_use.aff"), "--mode", "machine", "--no-typecheck"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file() {
    let prog = scratch("plain.txt", "try 1 + raise A 11 catch A with x. x + 1");
    let cfg = scratch("gitree.toml", "lang = \"exc\"\nfuel = 500\n");
    let o = exe(&["run", &prog, "--config", &cfg]);
    assert_eq!(stdout(&o), "VALUE 12\n");
    let cfg = scratch("bad.toml", "colour = \"red\"\n");
    assert_eq!(exe(&["run", &prog, "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn trace_is_jsonl() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("k.jsonl");
    exe(&["run", &example("delim/k_twice.dl"), "--trace", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() > 0);
    assert!(text.lines().all(|l| l.starts_with('{') && l.ends_with('}')));
}

#[test]
fn diff_generated() {
    let o = exe(&["diff", "--lang", "cc", "--count", "10", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().last().unwrap().starts_with("agree "));
    assert_eq!(exe(&["diff", "--lang", "aff"]).status.code(), Some(1));
}

#[test]
fn fuzz_writes_files() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("fuzz_out");
    let _ = std::fs::remove_dir_all(&dir);
    let o = exe(&["fuzz", "--lang", "delim", "--count", "3", "--seed", "1", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let printed = stdout(&o);
    assert_eq!(printed.lines().count(), 3);
    let first = std::fs::read_to_string(dir.join("gen_0000.dl")).unwrap();
    assert_eq!(first.trim(), printed.lines().next().unwrap());
    let again = exe(&["fuzz", "--lang", "delim", "--count", "3", "--seed", "1"]);
    assert_eq!(stdout(&again), printed);
}

#[test]
fn typecheck_prints_type() {
    let o = exe(&["typecheck", &example("delim/k_twice.dl")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "nat");
    assert_eq!(exe(&["typecheck", &example("aff/double_use.aff")]).status.code(), Some(3));
}

#[test]
fn exhaustive_schedule() {
    let prog = scratch("two.aff", "(fun r -> fork { () }; 4) (alloc 2)");
    let o = exe(&["run", &prog, "--sched", "exhaustive"]);
    assert_eq!(stdout(&o), "VALUE 4\n");
}
