//! Digitized linear-time semantics: explicit-state transition systems at a
//! fixed time granularity, bounded by a time horizon and an action depth.

mod formulas;
mod traces;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::analysis::{Outcome, Stats, Verdict};
use crate::constraint::Q;
use crate::operators::Class;
use crate::semantics::{concrete_action, concrete_delay, concrete_init, ConcreteState, Step};
use crate::tioa::Tioa;
use crate::word::TimedWord;

pub use formulas::{tt_conjunction, tt_disjunction, tt_mirror, tt_parallel, tt_quotient, tt_quotient_via_mirror};
pub use traces::{check_structure, extract_triple_traces, tt_refines, Materialized, TraceStructure};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("trace structures have different bounds")]
    BoundMismatch,
    #[error("alphabets are not composable")]
    Alphabet,
    #[error("left operand does not dominate the right one")]
    NotDominated,
    #[error("more than {0} words; use smaller bounds")]
    TooLarge(usize),
}

/// Granularity, time horizon and action depth of a digitization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub delta: Q,
    pub horizon: Q,
    pub depth: usize,
}

impl Bounds {
    pub fn new(delta: Q, horizon: Q, depth: usize) -> Self {
        assert!(delta > Q::zero(), "granularity must be positive");
        Bounds { delta, horizon, depth }
    }

    /// Unit granularity with integer horizon.
    pub fn unit(horizon: i64, depth: usize) -> Self {
        Bounds::new(Q::one(), Q::from_integer(horizon), depth)
    }

    /// Number of δ-steps that fit in the horizon.
    pub fn ticks(&self) -> usize {
        (self.horizon / self.delta).floor().to_integer().max(0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Tick,
    Action(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub target: usize,
    /// Added by ⊥/⊤-completion rather than taken along an edge or a delay.
    pub completion: bool,
}

pub const BOT: usize = 0;
pub const TOP: usize = 1;

/// Explicit transition system over grid valuations. State `BOT` is ⊥ and
/// state `TOP` is ⊤; every state is a set of concrete states (a singleton
/// unless determinized).
#[derive(Debug, Clone)]
pub struct Digitized {
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub delta: Q,
    pub horizon: Q,
    pub states: Vec<BTreeSet<ConcreteState>>,
    pub initial: usize,
    pub transitions: Vec<BTreeMap<Label, Vec<Transition>>>,
    /// Closed constraints at unit granularity: the grid is exact.
    pub exact: bool,
}

impl Digitized {
    pub fn labels(&self) -> Vec<Label> {
        let mut out = vec![Label::Tick];
        out.extend(self.inputs.iter().chain(&self.outputs).cloned().map(Label::Action));
        out
    }

    pub fn class(&self, s: usize) -> Class {
        match s {
            BOT => Class::Bot,
            TOP => Class::Top,
            _ => Class::Plain,
        }
    }

    pub fn successors(&self, s: usize, l: &Label) -> &[Transition] {
        self.transitions[s].get(l).map_or(&[], Vec::as_slice)
    }

    pub fn is_deterministic(&self) -> bool {
        self.transitions.iter().all(|m| m.values().all(|ts| ts.len() <= 1))
    }

    fn with_sinks(a_inputs: &BTreeSet<String>, a_outputs: &BTreeSet<String>, delta: Q, horizon: Q, exact: bool) -> Self {
        let mut d = Digitized {
            inputs: a_inputs.clone(),
            outputs: a_outputs.clone(),
            delta,
            horizon,
            states: vec![[ConcreteState::Bot].into(), [ConcreteState::Top].into()],
            initial: BOT,
            transitions: vec![BTreeMap::new(), BTreeMap::new()],
            exact,
        };
        for l in d.labels() {
            d.transitions[BOT].insert(l, vec![Transition { target: BOT, completion: false }]);
        }
        d.transitions[TOP].insert(Label::Tick, vec![Transition { target: TOP, completion: false }]);
        d
    }
}

/// Explicit-state image of the concrete semantics at grid valuations.
pub fn digitize(a: &Tioa, bounds: &Bounds) -> Digitized {
    let exact = bounds.delta == Q::one() && a.is_closed();
    let mut d = Digitized::with_sinks(&a.inputs, &a.outputs, bounds.delta, bounds.horizon, exact);
    let mut index: HashMap<ConcreteState, usize> = HashMap::new();
    index.insert(ConcreteState::Bot, BOT);
    index.insert(ConcreteState::Top, TOP);
    let mut queue = VecDeque::new();
    let mut intern = |s: ConcreteState, d: &mut Digitized, queue: &mut VecDeque<usize>| -> usize {
        if let Some(&i) = index.get(&s) {
            return i;
        }
        let i = d.states.len();
        index.insert(s.clone(), i);
        d.states.push([s].into());
        d.transitions.push(BTreeMap::new());
        queue.push_back(i);
        i
    };
    d.initial = intern(concrete_init(a), &mut d, &mut queue);
    let labels = d.labels();
    while let Some(i) = queue.pop_front() {
        let s = d.states[i].iter().next().unwrap().clone();
        let ConcreteState::Plain { valuation, .. } = &s else { continue };
        for l in &labels {
            let succ: Vec<(ConcreteState, Step)> = match l {
                Label::Action(act) => concrete_action(a, &s, act),
                Label::Tick => {
                    if valuation.values().iter().any(|v| *v + bounds.delta > bounds.horizon) {
                        continue;
                    }
                    vec![concrete_delay(a, &s, bounds.delta)]
                }
            };
            let mut ts: Vec<Transition> = succ
                .into_iter()
                .map(|(t, step)| Transition { target: intern(t, &mut d, &mut queue), completion: step == Step::Completion })
                .collect();
            ts.sort();
            ts.dedup();
            d.transitions[i].insert(l.clone(), ts);
        }
    }
    d
}

/// Subset reduction: ⊥ absorbs, ⊤ is dropped from any other subset.
fn reduce(mut s: BTreeSet<usize>) -> BTreeSet<usize> {
    if s.contains(&BOT) {
        return [BOT].into();
    }
    if s.len() > 1 {
        s.remove(&TOP);
    }
    s
}

/// Subset construction with the ⊥/⊤ reduction rules.
pub fn determinize_explicit(d: &Digitized) -> Digitized {
    let mut out = Digitized::with_sinks(&d.inputs, &d.outputs, d.delta, d.horizon, d.exact);
    let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    index.insert([BOT].into(), BOT);
    index.insert([TOP].into(), TOP);
    let mut subsets: Vec<BTreeSet<usize>> = vec![[BOT].into(), [TOP].into()];
    let mut queue = VecDeque::new();
    let root = reduce([d.initial].into());
    let mut intern = |s: BTreeSet<usize>, out: &mut Digitized, subsets: &mut Vec<BTreeSet<usize>>, queue: &mut VecDeque<usize>| -> usize {
        if let Some(&i) = index.get(&s) {
            return i;
        }
        let i = out.states.len();
        out.states.push(s.iter().flat_map(|&m| d.states[m].iter().cloned()).collect());
        out.transitions.push(BTreeMap::new());
        index.insert(s.clone(), i);
        subsets.push(s);
        queue.push_back(i);
        i
    };
    out.initial = intern(root, &mut out, &mut subsets, &mut queue);
    let labels = d.labels();
    while let Some(i) = queue.pop_front() {
        for l in &labels {
            let mut next = BTreeSet::new();
            let mut completion = true;
            for &m in &subsets[i] {
                for t in d.successors(m, l) {
                    next.insert(t.target);
                    completion &= t.completion;
                }
            }
            if next.is_empty() {
                continue;
            }
            let target = intern(reduce(next), &mut out, &mut subsets, &mut queue);
            out.transitions[i].insert(l.clone(), vec![Transition { target, completion }]);
        }
    }
    out
}

/// Breadth-first search for ⊥ within the bounds, ignoring the implicit
/// ⊥-completion of inputs. Returns a shortest witness.
pub fn reach_bot_digitized(d: &Digitized, bounds: &Bounds) -> Verdict {
    let ticks = bounds.ticks();
    let mut stats = Stats::default();
    let done = |outcome, witness, stats| Verdict { outcome, witness, stats, oracle_backed: true };
    if d.initial == BOT {
        return done(Outcome::Fails, Some(TimedWord::empty()), stats);
    }
    let mut seen: HashMap<(usize, usize, usize), ()> = HashMap::new();
    let mut nodes: Vec<(usize, usize, usize, Option<(usize, Label)>)> = vec![(d.initial, 0, 0, None)];
    seen.insert((d.initial, 0, 0), ());
    let mut queue: VecDeque<usize> = [0].into();
    let labels = d.labels();
    while let Some(n) = queue.pop_front() {
        let (s, t, k, _) = nodes[n].clone();
        stats.states += 1;
        stats.depth = stats.depth.max(k);
        for l in &labels {
            let (t2, k2) = match l {
                Label::Tick if t < ticks => (t + 1, k),
                Label::Action(_) if k < bounds.depth => (t, k + 1),
                _ => continue,
            };
            for tr in d.successors(s, l) {
                if tr.target == BOT {
                    let implicit = tr.completion && matches!(l, Label::Action(a) if d.inputs.contains(a));
                    if implicit {
                        continue;
                    }
                    nodes.push((BOT, t2, k2, Some((n, l.clone()))));
                    return done(Outcome::Fails, Some(word_of(&nodes, nodes.len() - 1, d.delta)), stats);
                }
                if seen.insert((tr.target, t2, k2), ()).is_none() {
                    nodes.push((tr.target, t2, k2, Some((n, l.clone()))));
                    queue.push_back(nodes.len() - 1);
                }
            }
        }
    }
    done(Outcome::Holds, None, stats)
}

fn word_of(nodes: &[(usize, usize, usize, Option<(usize, Label)>)], mut n: usize, delta: Q) -> TimedWord {
    let mut labels = Vec::new();
    while let Some((p, l)) = &nodes[n].3 {
        labels.push(l.clone());
        n = *p;
    }
    let mut w = TimedWord::empty();
    for l in labels.into_iter().rev() {
        match l {
            Label::Tick => w.push_delay(delta),
            Label::Action(a) => w.push_action(a),
        }
    }
    w
}

/// Refinement decided by triple-trace containment on determinized
/// digitizations.
pub fn refines_digitized(spec: &Tioa, imp: &Tioa, bounds: &Bounds) -> Verdict {
    let ts = extract_triple_traces(&determinize_explicit(&digitize(spec, bounds)), bounds);
    let ti = extract_triple_traces(&determinize_explicit(&digitize(imp, bounds)), bounds);
    let witness = tt_refines(&ts, &ti).expect("same bounds");
    Verdict {
        outcome: if witness.is_some() { Outcome::Fails } else { Outcome::Holds },
        witness,
        stats: Stats { states: ts.len() + ti.len(), depth: bounds.depth },
        oracle_backed: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ClockConstraint as CC;
    use crate::tioa::{Edge, Location};

    fn guard_at_one() -> Tioa {
        let mut a = Tioa::new("g");
        a.clocks = vec!["x".into()];
        a.outputs.insert("a".into());
        a.locations.push(Location::new("l0"));
        a.locations.push(Location::new("l1"));
        a.edges.push(Edge { source: 0, guard: CC::eq(0, 1), action: "a".into(), resets: vec![], target: 1 });
        a
    }

    #[test]
    fn classify_matches_class_of() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut cfg = crate::gen::GenConfig::new(&["a"], &["b"]);
        cfg.deterministic = false;
        let b = Bounds::unit(4, 3);
        for i in 0..40 {
            let a = crate::gen::random_tioa(&mut rng, &format!("c{i}"), &cfg);
            let ts = extract_triple_traces(&digitize(&a, &b), &b);
            let all = ts.classify(100_000).unwrap();
            assert_eq!(all.len(), ts.universe(100_000).unwrap().len());
            for (w, c) in all {
                assert_eq!(c, ts.class_of(&w), "{w}");
            }
        }
    }

    #[test]
    fn guard_fires_exactly_at_one() {
        let a = guard_at_one();
        let d = digitize(&a, &Bounds::unit(3, 2));
        let fires: Vec<usize> = (0..d.states.len())
            .filter(|&s| {
                d.successors(s, &Label::Action("a".into())).iter().any(|t| !t.completion && d.class(t.target) == Class::Plain)
            })
            .collect();
        assert_eq!(fires.len(), 1);
        let s = d.states[fires[0]].iter().next().unwrap();
        let ConcreteState::Plain { location: 0, valuation } = s else { panic!("{s:?}") };
        assert_eq!(valuation.get(0), Q::one());
    }

    #[test]
    fn deterministic_systems_are_fixed_points() {
        let d = digitize(&guard_at_one(), &Bounds::unit(4, 3));
        assert!(d.is_deterministic());
        let e = determinize_explicit(&d);
        assert_eq!(e.states.len(), d.states.len());
        assert_eq!(e.transitions.iter().map(BTreeMap::len).sum::<usize>(), d.transitions.iter().map(BTreeMap::len).sum::<usize>());
    }

    #[test]
    fn subsets_with_bot_collapse() {
        assert_eq!(reduce([BOT, 5].into()), [BOT].into());
        assert_eq!(reduce([TOP, 5].into()), [5].into());
        assert_eq!(reduce([TOP].into()), [TOP].into());
    }
}
