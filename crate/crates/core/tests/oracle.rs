use std::path::Path;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tiospec::analysis::{reach_bot, replays_to_bot, DEFAULT_BUDGET};
use tiospec::constraint::{ClockConstraint as CC, Q};
use tiospec::gen::{random_tioa, GenConfig};
use tiospec::operators::{compose, Operator};
use tiospec::oracle::{
    check_structure, determinize_explicit, digitize, extract_triple_traces, reach_bot_digitized, tt_parallel,
    tt_refines, Bounds, TraceStructure,
};
use tiospec::syntax::parse_tioa;
use tiospec::tioa::{Edge, Location, Tioa};

fn load(name: &str) -> Tioa {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name);
    parse_tioa(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn traces(a: &Tioa, b: &Bounds) -> TraceStructure {
    extract_triple_traces(&determinize_explicit(&digitize(a, b)), b)
}

/// Accepts every output of `a` at any time and never emits anything.
fn inert_environment(a: &Tioa) -> Tioa {
    let mut e = Tioa::new("E");
    e.inputs = a.outputs.clone();
    e.locations.push(Location::new("e"));
    for act in &a.outputs {
        e.edges.push(Edge { source: 0, guard: CC::True, action: act.clone(), resets: vec![], target: 0 });
    }
    e
}

#[test]
fn product_reaches_bot_on_the_grid() {
    let p = load("scheduler_par_controller.tioa");
    let b = Bounds::unit(20, 5);
    let v = reach_bot_digitized(&digitize(&p, &b), &b);
    assert!(v.fails());
    let w = v.witness.unwrap();
    assert!(replays_to_bot(&p, &w), "{w}");
    assert_eq!(reach_bot(&p, DEFAULT_BUDGET).outcome, v.outcome);
}

#[test]
fn half_grid_is_not_exact() {
    let s = load("scheduler.tioa");
    let b = Bounds::new(Q::new(1, 2), Q::from_integer(4), 2);
    let t = extract_triple_traces(&digitize(&s, &b), &b);
    assert!(!t.exact);
    assert!(check_structure(&t, 100_000).unwrap().is_empty());
}

#[test]
fn examples_give_well_formed_structures() {
    let b = Bounds::unit(6, 3);
    for f in ["scheduler.tioa", "controller.tioa", "scheduler_par_controller.tioa"] {
        let t = traces(&load(f), &b);
        assert_eq!(check_structure(&t, 200_000).unwrap(), Vec::<String>::new(), "{f}");
    }
}

#[test]
fn parallel_formula_on_the_examples() {
    let b = Bounds::unit(6, 3);
    let (s, c) = (load("scheduler.tioa"), load("controller.tioa"));
    let f = tt_parallel(&traces(&s, &b), &traces(&c, &b)).unwrap();
    let p = traces(&compose(Operator::Parallel, &s, &c).unwrap(), &b);
    assert!(f.same_traces(&p));
    assert_eq!(tt_refines(&p, &p).unwrap(), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inert_environment_preserves_bot_freedom(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_tioa(&mut rng, "P", &GenConfig::new(&["a"], &["b", "c"]));
        let e = inert_environment(&a);
        let closed = compose(Operator::Parallel, &a, &e).unwrap();
        prop_assert_eq!(reach_bot(&closed, DEFAULT_BUDGET).outcome, reach_bot(&a, DEFAULT_BUDGET).outcome);
        let b = Bounds::unit(8, 4);
        let o = reach_bot_digitized(&digitize(&closed, &b), &b);
        prop_assert_eq!(o.outcome, reach_bot(&a, DEFAULT_BUDGET).outcome);
    }
}
