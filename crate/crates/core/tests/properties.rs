mod common;

use cetana_core::contemplative::{detect_loop, first_repeat, ResetConfig};
use cetana_core::dynamics::{extend, run, step};
use cetana_core::memory::{AssocMemory, MemoryParams};
use cetana_core::rng::RandomnessSource;
use cetana_core::runner::{prepare, simulate, RunOptions};
use cetana_core::scenario::Scenario;
use common::*;
use proptest::prelude::*;
use rand::Rng;

const LOOP_RESET: &str = include_str!("../../../scenarios/loop_reset.scn");

fn naive_first_repeat(s: &[u8]) -> Option<(usize, usize)> {
    (0..s.len()).find_map(|j| (0..j).find(|&i| s[i] == s[j]).map(|i| (i, j - i)))
}

proptest! {
    #[test]
    fn first_repeat_matches_pairwise_scan(s in prop::collection::vec(0u8..12, 0..40)) {
        prop_assert_eq!(first_repeat(&s), naive_first_repeat(&s));
    }

    #[test]
    fn memory_stays_within_capacity(
        capacity in 1usize..10,
        ops in prop::collection::vec((0u8..15, 0u8..15, any::<bool>()), 1..400),
    ) {
        let mut mem = AssocMemory::new(MemoryParams { capacity, reliability: 0.5, activation: 1 })
            .unwrap();
        let mut rng = RandomnessSource::new(capacity as u64);
        for (t, (cue, target, observe)) in ops.into_iter().enumerate() {
            let (cue, target) = (format!("p{cue}"), format!("p{target}"));
            if observe {
                mem.observe_pair(&cue, &target, t as i64);
            } else {
                mem.recall(&cue, &mut rng, t as i64);
            }
            prop_assert!(mem.len() <= capacity);
        }
    }

    #[test]
    fn decompose_recompose_is_identity(seed in any::<u64>(), t in -1000i64..1000) {
        let c = random_ceta(&mut rng(seed), t);
        prop_assert_eq!(cetana_core::model::Ceta::recompose(t, c.decompose()), c);
    }
}

fn plain_setup(index: u64) -> Option<cetana_core::scenario::Setup> {
    let mut s = random_scenario(&mut rng(index), index as usize);
    s.partner.is_none().then(|| {
        s.mindfulness.enabled = false;
        s.concentration = None;
        s.reset = None;
        s.build().unwrap()
    })
}

#[test]
fn step_is_a_function_of_its_inputs() {
    for i in 0..40 {
        let Some(setup) = plain_setup(i) else {
            continue;
        };
        let rng = RandomnessSource::new(i);
        let (mut a, mut b) = (setup.agent.clone(), setup.agent.clone());
        let first = step(&setup.c0, &setup.w0, &rng, &mut a, &setup.world).unwrap();
        let second = step(&setup.c0, &setup.w0, &rng, &mut b, &setup.world).unwrap();
        assert_eq!(first, second, "scenario {i}");
        assert_eq!(a.memory, b.memory, "scenario {i}");
    }
}

#[test]
fn shorter_runs_are_prefixes() {
    let mut r = rng(77);
    for i in 0..40 {
        let Some(setup) = plain_setup(i) else {
            continue;
        };
        let n = r.gen_range(2..60);
        let m = r.gen_range(0..n);
        let long = run(
            &mut setup.agent.clone(),
            &setup.world,
            setup.c0.clone(),
            setup.w0.clone(),
            i,
            n,
        )
        .unwrap();
        let short = run(
            &mut setup.agent.clone(),
            &setup.world,
            setup.c0.clone(),
            setup.w0.clone(),
            i,
            m,
        )
        .unwrap();
        assert_eq!(long.prefix(m + 1), short, "scenario {i}");
    }
}

#[test]
fn extending_continues_the_same_run() {
    for i in 0..40 {
        let Some(setup) = plain_setup(i) else {
            continue;
        };
        let mut agent = setup.agent.clone();
        let whole = run(
            &mut agent,
            &setup.world,
            setup.c0.clone(),
            setup.w0.clone(),
            i,
            30,
        )
        .unwrap();
        let mut agent = setup.agent.clone();
        let mut tr = run(
            &mut agent,
            &setup.world,
            setup.c0.clone(),
            setup.w0.clone(),
            i,
            12,
        )
        .unwrap();
        extend(&mut tr, &mut agent, &setup.world, 18, &mut []).unwrap();
        assert_eq!(tr, whole, "scenario {i}");
    }
}

#[test]
fn loop_report_points_at_a_repeat() {
    let mut r = rng(5);
    for _ in 0..200 {
        let table: Vec<usize> = {
            let n = r.gen_range(1..20);
            (0..n).map(|_| r.gen_range(0..n)).collect()
        };
        let mut agent = table_agent(table.clone());
        let w = cetana_core::dynamics::registry::builtin_world(
            "grid",
            &cetana_core::dynamics::Params::new()
                .with("width", 1)
                .with("height", 1),
        )
        .unwrap();
        let c0 = cetana_core::model::Ceta::default();
        let tr = run(&mut agent, &w, c0, w.initial.clone(), 0, table.len()).unwrap();
        let minds = tr.mind_states();
        let lp = detect_loop(&minds).expect("pigeonhole");
        let k = lp.start as usize;
        assert_eq!(minds[k], minds[k + lp.period]);
        assert_eq!(minds[k], lp.witness);
    }
}

#[test]
fn single_cycle_reset_fires_on_the_first_repeat() {
    let mut s = Scenario::parse(LOOP_RESET).unwrap();
    s.reset = Some(ResetConfig {
        cycles: 1,
        coverage: 1.0,
    });
    let sim = simulate(&prepare(&s.to_text(), &RunOptions::default()).unwrap()).unwrap();
    let lp = sim.loop_report.unwrap();
    let ev = sim.reset.unwrap();
    assert_eq!(ev.tick, lp.start + lp.period as i64);
    assert_eq!(sim.trace.at(ev.tick).unwrap().ceta, ev.ceta);
}
