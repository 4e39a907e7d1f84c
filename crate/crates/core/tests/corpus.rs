//! Hand corpus with expected results worked out by hand and confirmed on the
//! abstract machines before freezing.

use gitree::harness::{diff, run_program};
use gitree::lang::{parse, typecheck, Lang};
use gitree::machine::run_machine;
use gitree::SchedulerPolicy;

const FUEL: u64 = 10_000;

const CONTROL: &[(Lang, &str, u64)] = &[
    (Lang::Cc, "1 + callcc k. throw 41 to k", 42),
    (Lang::Cc, "callcc k. 5", 5),
    (Lang::Cc, "10 + callcc k. (throw 1 to k) + 100", 11),
    (Lang::Cc, "(fun f -> f 3) (fun x -> callcc k. x + throw x to k)", 3),
    (Lang::Cc, "(rec f n = if n then n + f (n - 1) else 0) 4", 10),
    (Lang::Cc, "callcc k. (fun x -> 7) (throw 2 to k)", 2),
    (Lang::Cc, "3 - 5", 0),
    (Lang::Exc, "try 1 + raise A 11 catch A with x. x + 1", 12),
    (Lang::Exc, "try (try raise A 1 catch A with x. x + 10) catch A with y. y + 100", 11),
    (Lang::Exc, "try (try raise B 1 catch A with x. x + 10) catch B with y. y + 100", 101),
    (Lang::Exc, "(try 2 catch A with x. x) + (try raise A 3 catch A with y. y + y)", 8),
    (Lang::Exc, "try (fun x -> raise A x) 5 catch A with e. e - 1", 4),
    (Lang::Exc, "try (try 1 catch A with x. x) + raise A 2 catch A with z. z + 40", 42),
    (Lang::Delim, "reset (1 + shift k. k (k 10))", 12),
    (Lang::Delim, "10 + reset (2 + shift k. 100)", 110),
    (Lang::Delim, "reset (5 + shift k. 1 + k 2)", 8),
    (Lang::Delim, "reset (1 + reset (2 + shift k. k (k 3)))", 8),
    (Lang::Delim, "(fun f -> f (f 1)) (fun x -> reset (x + shift k. k (k 1)))", 7),
    (Lang::Delim, "reset ((shift k. k 1) + (shift j. j 10))", 11),
    (Lang::Delim, "reset ((rec f x = isprime (shift k. x - 1)) 2)", 1),
    (Lang::Delim, "isprime 7 + isprime 9", 1),
    (Lang::Delim, "reset (10 + isprime (shift k. k 13))", 11),
];

#[test]
fn denotation_matches_expected() {
    for (lang, src, want) in CONTROL {
        let e = parse(*lang, src).unwrap();
        typecheck(*lang, &e).unwrap_or_else(|err| panic!("{src}: {err}"));
        let r = run_program(*lang, &e, FUEL, &SchedulerPolicy::RoundRobin);
        assert_eq!(r.outcome.report(), format!("VALUE {want}"), "{src}");
        if *lang == Lang::Delim {
            assert_eq!(r.state.cont_stack_len(), Some(0), "{src}");
        }
        if *lang == Lang::Exc {
            assert_eq!(r.state.handler_depth(), Some(0), "{src}");
        }
    }
}

#[test]
fn machines_match_expected() {
    for (lang, src, want) in CONTROL {
        let e = parse(*lang, src).unwrap();
        let (out, _, _) = run_machine(*lang, &e, FUEL).unwrap();
        assert_eq!(out.report(), format!("VALUE {want}"), "{src}");
        assert_eq!(diff(*lang, &e, FUEL).unwrap().to_string(), format!("AGREE({want})"));
    }
}

#[test]
fn store_languages() {
    let cases: &[(Lang, &str, &str)] = &[
        (Lang::Embed, "(fun r -> (fun u -> !r) (r := !r + embed { reset (1 + shift k. k (k 10)) })) (alloc 3)", "VALUE 15"),
        (Lang::Embed, "embed { < 10 + < 2 + shift k. 100 > > }", "VALUE 110"),
        (Lang::Embed, "(fun r -> !r + !r) (alloc 4)", "VALUE 8"),
        (Lang::Aff, "(fun x -> x + 1) 4", "VALUE 5"),
        (Lang::Aff, "let (a, b) = (1, 2) in a - b", "VALUE 0"),
        (Lang::Aff, "(fun r -> let (v, r2) = replace(r, 9) in (fun u -> v) (dealloc r2)) (alloc 4)", "VALUE 4"),
        (Lang::Aff, "fork { () }; 3", "VALUE 3"),
        (Lang::Aff, "(fun b -> if b then 1 else 2) false", "VALUE 2"),
    ];
    for (lang, src, want) in cases {
        let e = parse(*lang, src).unwrap();
        typecheck(*lang, &e).unwrap_or_else(|err| panic!("{src}: {err}"));
        let r = run_program(*lang, &e, FUEL, &SchedulerPolicy::RoundRobin);
        assert_eq!(r.outcome.report(), *want, "{src}");
        if *lang == Lang::Embed {
            assert_eq!(r.state.cont_stack_len(), Some(0), "{src}");
        }
    }
}

#[test]
fn double_use_is_a_linearity_error() {
    let e = parse(Lang::Aff, "(fun x -> (x, x)) 5").unwrap();
    assert!(typecheck(Lang::Aff, &e).is_err());
    for p in [SchedulerPolicy::RoundRobin, SchedulerPolicy::Random(3)] {
        assert_eq!(run_program(Lang::Aff, &e, FUEL, &p).outcome.report(), "ERROR Lin");
    }
}

#[test]
fn uncaught_exception_fails_on_both_sides() {
    let e = parse(Lang::Exc, "1 + raise B 2").unwrap();
    assert_eq!(run_program(Lang::Exc, &e, FUEL, &SchedulerPolicy::RoundRobin).outcome.report(), "ERROR RunTime");
    assert_eq!(diff(Lang::Exc, &e, FUEL).unwrap().to_string(), "BOTH-STUCK");
}

#[test]
fn divergence_times_out_on_both_sides() {
    let e = parse(Lang::Delim, "(rec f n = f n) 1").unwrap();
    assert_eq!(diff(Lang::Delim, &e, 500).unwrap().to_string(), "BOTH-TIMEOUT");
}
