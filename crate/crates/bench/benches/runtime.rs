use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gitree::harness::{diff, run_program};
use gitree::lang::Lang;
use gitree::laws::check_all;
use gitree::machine::run_machine;
use gitree::SchedulerPolicy;
use gitree_bench::{corpus, countdown, nested_resets, FUEL};

fn loops(c: &mut Criterion) {
    let mut g = c.benchmark_group("countdown");
    for lang in [Lang::Cc, Lang::Exc, Lang::Delim] {
        let e = countdown(lang, 50);
        g.bench_with_input(BenchmarkId::new("denote", lang.name()), &e, |b, e| {
            b.iter(|| run_program(lang, e, FUEL, &SchedulerPolicy::RoundRobin))
        });
        g.bench_with_input(BenchmarkId::new("machine", lang.name()), &e, |b, e| b.iter(|| run_machine(lang, e, FUEL)));
    }
    g.finish();
}

fn resets(c: &mut Criterion) {
    let e = nested_resets(20);
    c.bench_function("nested_resets/20", |b| b.iter(|| run_program(Lang::Delim, &e, FUEL, &SchedulerPolicy::RoundRobin)));
}

fn differential(c: &mut Criterion) {
    let progs = corpus(Lang::Delim, 20);
    c.bench_function("diff/delim x20", |b| {
        b.iter(|| progs.iter().filter(|e| diff(Lang::Delim, e, FUEL).is_some_and(|r| r.is_agreement())).count())
    });
}

fn laws(c: &mut Criterion) {
    c.bench_function("laws", |b| b.iter(check_all));
}

criterion_group!(benches, loops, resets, differential, laws);
criterion_main!(benches);
