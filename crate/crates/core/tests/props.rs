use proptest::prelude::*;

use gitree::bisim::{bisim_probe, Probe};
use gitree::gen::{generate, is_valid};
use gitree::harness::run_program;
use gitree::lang::denote::{ctx_hom, denote_closed};
use gitree::lang::syntax::plug;
use gitree::lang::{parse, Lang};
use gitree::laws::hom_samples;
use gitree::machine::cc::{decompose, CcMachine};
use gitree::machine::{machine_run, Machine};
use gitree::ops::{natop, BinOp};
use gitree::{GITree, SchedulerPolicy};

fn lang() -> impl Strategy<Value = Lang> {
    prop::sample::select(Lang::ALL.to_vec())
}

/// Small trees built from values, ticks, arithmetic and a store read.
fn tree() -> impl Strategy<Value = GITree> {
    let leaf = prop_oneof![
        (0u64..6).prop_map(GITree::nat),
        Just(GITree::unit()),
        Just(GITree::runtime_err()),
        Just(gitree::effects::store::read(0)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(GITree::tick),
            (inner.clone(), inner).prop_map(|(a, b)| natop(BinOp::Add, a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_programs_are_valid(l in lang(), seed in any::<u64>(), size in 1usize..30) {
        let e = generate(l, size, seed).unwrap();
        prop_assert!(is_valid(l, &e));
        prop_assert!(e.size() <= size);
        prop_assert!(e.is_closed());
    }

    #[test]
    fn printing_round_trips(l in lang(), seed in any::<u64>()) {
        let e = generate(l, 25, seed).unwrap();
        let text = e.to_string();
        prop_assert_eq!(parse(l, &text).unwrap(), e.clone());
        prop_assert_eq!(parse(l, &text).unwrap().to_string(), text);
    }

    #[test]
    fn generation_is_deterministic(l in lang(), seed in any::<u64>()) {
        prop_assert_eq!(generate(l, 20, seed).unwrap(), generate(l, 20, seed).unwrap());
    }

    #[test]
    fn homomorphisms_respect_the_laws(t in tree(), i in 0usize..10) {
        let (name, h) = hom_samples().swap_remove(i);
        prop_assert!(h.respects(&t, Probe::strict(4)), "{}", name);
    }

    #[test]
    fn cc_contexts_are_compositional(seed in any::<u64>()) {
        let e = generate(Lang::Cc, 20, seed).unwrap();
        let run = machine_run::<CcMachine>(CcMachine::inject(&e), 200, true);
        for c in run.configs.iter().take(30) {
            let Some((k, r)) = decompose(c) else { continue };
            let whole = denote_closed(Lang::Cc, &plug(&k, r.clone()));
            let split = ctx_hom(Lang::Cc, &k).apply(denote_closed(Lang::Cc, &r));
            prop_assert!(bisim_probe(&whole, &split, Probe::weak(4)), "{} at {}", e, c);
        }
    }

    #[test]
    fn runs_are_reproducible(l in lang(), seed in any::<u64>(), sched in 0u64..4) {
        let e = generate(l, 20, seed).unwrap();
        let p = if sched == 0 { SchedulerPolicy::RoundRobin } else { SchedulerPolicy::Random(sched) };
        let a = run_program(l, &e, 2_000, &p);
        let b = run_program(l, &e, 2_000, &p);
        prop_assert_eq!(a.outcome.report(), b.outcome.report());
        prop_assert_eq!(a.trace, b.trace);
    }
}
