//! Benchmark fixtures.

use gitree::gen::generate_many;
use gitree::lang::syntax::E;
use gitree::lang::{parse, Lang};

pub const FUEL: u64 = 10_000;

/// A counting loop of `n` iterations in the given control language.
pub fn countdown(lang: Lang, n: u64) -> E {
    parse(lang, &format!("(rec f n = if n then 1 + f (n - 1) else 0) {n}")).expect("fixture parses")
}

/// Shift inside a deep reset nest.
pub fn nested_resets(depth: usize) -> E {
    let mut src = "shift k. k (k 1)".to_string();
    for _ in 0..depth {
        src = format!("reset (1 + {src})");
    }
    parse(Lang::Delim, &src).expect("fixture parses")
}

pub fn corpus(lang: Lang, count: usize) -> Vec<E> {
    generate_many(lang, count, 20, 11).expect("generator succeeds")
}
