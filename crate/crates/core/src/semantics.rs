//! Symbolic and concrete timed transition semantics with implicit
//! ⊥/⊤-completion.

use num_traits::Zero;
use thiserror::Error;

use crate::constraint::{ClockConstraint, ClockValuation, Q};
use crate::federation::Federation;
use crate::tioa::Tioa;
use crate::zone::Zone;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("action `{0}` is not in the alphabet")]
    UnknownAction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemState {
    Bot,
    Top,
    Plain { location: usize, zone: Zone },
}

impl SemState {
    pub fn is_bot(&self) -> bool {
        matches!(self, SemState::Bot)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, SemState::Top)
    }
}

/// How a successor came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// Along a declared edge.
    Edge(usize),
    /// Implicit completion of a disabled action.
    Completion,
    /// A delay.
    Delay,
    /// Self-loop of a sink state.
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Successor {
    pub state: SemState,
    /// For actions: the source valuations taking this step. For delays: the
    /// valuations reached.
    pub zone: Zone,
    pub step: Step,
}

/// Region algebra of one location.
#[derive(Debug, Clone)]
pub struct LocationRegions {
    pub invariant: Federation,
    pub co_invariant: Federation,
    /// `Inv ∧ coInv`.
    pub plain: Federation,
    /// `Inv ∧ ¬coInv`: entering here is an error.
    pub error: Federation,
    /// `¬Inv`: entering here is magic.
    pub magic: Federation,
}

/// A TIOA with precomputed regions, exposing its timed transition system.
#[derive(Debug, Clone)]
pub struct SymbolicTiots<'a> {
    pub tioa: &'a Tioa,
    pub regions: Vec<LocationRegions>,
    pub guards: Vec<Federation>,
}

impl<'a> SymbolicTiots<'a> {
    pub fn new(tioa: &'a Tioa) -> Self {
        let n = tioa.clock_count();
        let regions = tioa
            .locations
            .iter()
            .map(|l| {
                let invariant = Federation::from_constraint(n, &l.invariant);
                let co_invariant = Federation::from_constraint(n, &l.co_invariant);
                let plain = invariant.intersect(&co_invariant).reduce();
                let error = invariant.subtract(&co_invariant).reduce();
                let magic = invariant.complement().reduce();
                LocationRegions { invariant, co_invariant, plain, error, magic }
            })
            .collect();
        let guards = tioa.edges.iter().map(|e| Federation::from_constraint(n, &e.guard)).collect();
        SymbolicTiots { tioa, regions, guards }
    }

    pub fn clocks(&self) -> usize {
        self.tioa.clock_count()
    }

    pub fn init_state(&self) -> SemState {
        let zero = Zone::zero(self.clocks());
        let r = &self.regions[self.tioa.initial];
        if !r.invariant.contains(&ClockValuation::zero(self.clocks())) {
            SemState::Top
        } else if !r.co_invariant.contains(&ClockValuation::zero(self.clocks())) {
            SemState::Bot
        } else {
            SemState::Plain { location: self.tioa.initial, zone: zero }
        }
    }

    /// Split entry valuations of `loc` into plain, error and magic states.
    fn classify_entry(&self, loc: usize, post: &Zone, preimage: impl Fn(&Federation) -> Federation, source: &Zone, step: Step, out: &mut Vec<Successor>) {
        let r = &self.regions[loc];
        for z in Federation::from_zone(post.clone()).intersect(&r.plain).zones() {
            for g in preimage(&Federation::from_zone(z.clone())).intersect_zone(source).zones() {
                out.push(Successor { state: SemState::Plain { location: loc, zone: z.clone() }, zone: g.clone(), step });
            }
        }
        for (region, state) in [(&r.error, SemState::Bot), (&r.magic, SemState::Top)] {
            let hit = Federation::from_zone(post.clone()).intersect(region);
            if hit.is_empty() {
                continue;
            }
            for g in preimage(&hit).intersect_zone(source).zones() {
                out.push(Successor { state: state.clone(), zone: g.clone(), step });
            }
        }
    }

    pub fn succ_action(&self, s: &SemState, act: &str) -> Result<Vec<Successor>, SemanticsError> {
        if !self.tioa.is_input(act) && !self.tioa.is_output(act) {
            return Err(SemanticsError::UnknownAction(act.to_string()));
        }
        let n = self.clocks();
        let (loc, zone) = match s {
            SemState::Bot => {
                return Ok(vec![Successor { state: SemState::Bot, zone: Zone::universe(n), step: Step::Sink }]);
            }
            SemState::Top => return Ok(Vec::new()),
            SemState::Plain { location, zone } => (*location, zone),
        };
        let source = Federation::from_zone(zone.clone()).intersect(&self.regions[loc].plain);
        let mut out = Vec::new();
        let mut enabled = Federation::empty(n);
        for (i, e) in self.tioa.edges_from(loc, act) {
            let g = source.intersect(&self.guards[i]);
            enabled = enabled.union(&g);
            for gz in g.zones() {
                let post = gz.reset(&e.resets);
                let rs = e.resets.clone();
                self.classify_entry(e.target, &post, |f| f.reset_preimage(&rs), gz, Step::Edge(i), &mut out);
            }
        }
        let disabled = source.subtract(&enabled);
        let sink = if self.tioa.is_input(act) { SemState::Bot } else { SemState::Top };
        for z in disabled.zones() {
            out.push(Successor { state: sink.clone(), zone: z.clone(), step: Step::Completion });
        }
        Ok(out)
    }

    /// Delay successors; the zones partition the valuations reachable by
    /// some positive delay.
    pub fn succ_delay(&self, s: &SemState) -> Vec<Successor> {
        let n = self.clocks();
        let (loc, zone) = match s {
            SemState::Bot | SemState::Top => {
                return vec![Successor { state: s.clone(), zone: Zone::universe(n), step: Step::Sink }];
            }
            SemState::Plain { location, zone } => (*location, zone),
        };
        let r = &self.regions[loc];
        let future = Federation::from_zone(zone.future());
        let bot = future.intersect(&r.error.intersect(&future).future());
        let plain = future.intersect(&r.plain).subtract(&bot);
        let top = future.subtract(&bot).subtract(&plain);
        let mut out = Vec::new();
        for z in plain.zones() {
            out.push(Successor { state: SemState::Plain { location: loc, zone: z.clone() }, zone: z.clone(), step: Step::Delay });
        }
        for z in bot.zones() {
            out.push(Successor { state: SemState::Bot, zone: z.clone(), step: Step::Delay });
        }
        for z in top.zones() {
            out.push(Successor { state: SemState::Top, zone: z.clone(), step: Step::Completion });
        }
        out
    }

    /// Every valuation of the state is semi-⊤: it cannot avoid ⊤ by its own
    /// outputs and some delay leads to ⊤.
    pub fn is_semi_top(&self, s: &SemState) -> bool {
        let (loc, zone) = match s {
            SemState::Plain { location, zone } => (*location, zone),
            _ => return false,
        };
        let r = &self.regions[loc];
        let closure = Federation::from_zone(zone.future()).intersect(&r.plain);
        for (i, e) in self.tioa.edges.iter().enumerate() {
            if e.source != loc || !self.tioa.is_output(&e.action) {
                continue;
            }
            let post = closure.intersect(&self.guards[i]).reset(&e.resets);
            if !post.is_subset(&self.regions[e.target].magic) {
                return false;
            }
        }
        let top: Federation = Federation::from_zones(
            self.clocks(),
            self.succ_delay(s).into_iter().filter(|x| x.state.is_top()).map(|x| x.zone),
        );
        Federation::from_zone(zone.clone()).is_subset(&top.past())
    }
}

/// A single state of the concrete transition system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConcreteState {
    Bot,
    Top,
    Plain { location: usize, valuation: ClockValuation },
}

fn plain_at(a: &Tioa, loc: usize, t: &ClockValuation) -> bool {
    let l = &a.locations[loc];
    l.invariant.eval(t) && l.co_invariant.eval(t)
}

fn error_at(a: &Tioa, loc: usize, t: &ClockValuation) -> bool {
    let l = &a.locations[loc];
    l.invariant.eval(t) && !l.co_invariant.eval(t)
}

/// Whether `t + δ` satisfies `p` for some `δ ∈ (0, d]`. Membership of a
/// constraint along a ray only changes where a clock crosses a constant.
pub fn exists_on_ray(cc: &ClockConstraint, t: &ClockValuation, d: Q, p: impl Fn(&ClockValuation) -> bool) -> bool {
    let mut cuts: Vec<Q> = Vec::new();
    for a in cc.atoms() {
        if a.right.is_none() {
            let b = Q::from_integer(a.constant) - t.get(a.left);
            if b > Q::zero() && b < d {
                cuts.push(b);
            }
        }
    }
    cuts.push(d);
    cuts.sort();
    cuts.dedup();
    let mut prev = Q::zero();
    for c in cuts {
        let mid = (prev + c) / Q::from_integer(2);
        if p(&t.delay(mid)) || p(&t.delay(c)) {
            return true;
        }
        prev = c;
    }
    false
}

pub fn concrete_init(a: &Tioa) -> ConcreteState {
    let l = &a.locations[a.initial];
    let zero = ClockValuation::zero(a.clock_count());
    if !l.invariant.eval(&zero) {
        ConcreteState::Top
    } else if !l.co_invariant.eval(&zero) {
        ConcreteState::Bot
    } else {
        ConcreteState::Plain { location: a.initial, valuation: zero }
    }
}

fn classify_concrete(a: &Tioa, loc: usize, t: ClockValuation) -> ConcreteState {
    let l = &a.locations[loc];
    if !l.invariant.eval(&t) {
        ConcreteState::Top
    } else if !l.co_invariant.eval(&t) {
        ConcreteState::Bot
    } else {
        ConcreteState::Plain { location: loc, valuation: t }
    }
}

/// All action successors of a concrete state, with the step taken.
pub fn concrete_action(a: &Tioa, s: &ConcreteState, act: &str) -> Vec<(ConcreteState, Step)> {
    match s {
        ConcreteState::Bot => vec![(ConcreteState::Bot, Step::Sink)],
        ConcreteState::Top => Vec::new(),
        ConcreteState::Plain { location, valuation } => {
            let mut out = Vec::new();
            if !plain_at(a, *location, valuation) {
                return out;
            }
            for (i, e) in a.edges_from(*location, act) {
                if e.guard.eval(valuation) {
                    out.push((classify_concrete(a, e.target, valuation.reset(&e.resets)), Step::Edge(i)));
                }
            }
            if out.is_empty() {
                if a.is_input(act) {
                    out.push((ConcreteState::Bot, Step::Completion));
                } else if a.is_output(act) {
                    out.push((ConcreteState::Top, Step::Completion));
                }
            }
            out
        }
    }
}

/// The unique successor after delaying `d > 0`, and whether it came from
/// completion.
pub fn concrete_delay(a: &Tioa, s: &ConcreteState, d: Q) -> (ConcreteState, Step) {
    match s {
        ConcreteState::Bot | ConcreteState::Top => (s.clone(), Step::Sink),
        ConcreteState::Plain { location, valuation } => {
            let l = &a.locations[*location];
            let scan = ClockConstraint::and([l.invariant.clone(), l.co_invariant.clone()]);
            if exists_on_ray(&scan, valuation, d, |v| error_at(a, *location, v)) {
                return (ConcreteState::Bot, Step::Delay);
            }
            let next = valuation.delay(d);
            if plain_at(a, *location, &next) {
                (ConcreteState::Plain { location: *location, valuation: next }, Step::Delay)
            } else {
                (ConcreteState::Top, Step::Completion)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ClockConstraint as CC;
    use crate::tioa::{Edge, Location};
    use proptest::prelude::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn controller_like() -> Tioa {
        // 0 --print?--> 1 (y reset), 1 coinv y<=10, 1 --printed!--> 0
        let mut a = Tioa::new("c");
        a.clocks = vec!["y".into()];
        a.inputs.insert("print".into());
        a.outputs.insert("printed".into());
        a.locations.push(Location::new("idle"));
        a.locations.push(Location { name: "busy".into(), invariant: CC::True, co_invariant: CC::le(0, 10) });
        a.edges.push(Edge { source: 0, guard: CC::True, action: "print".into(), resets: vec![0], target: 1 });
        a.edges.push(Edge { source: 1, guard: CC::le(0, 10), action: "printed".into(), resets: vec![], target: 0 });
        a
    }

    #[test]
    fn init_cases() {
        let mut a = controller_like();
        let s = SymbolicTiots::new(&a);
        assert!(matches!(s.init_state(), SemState::Plain { location: 0, .. }));
        a.locations[0].invariant = CC::False;
        assert_eq!(SymbolicTiots::new(&a).init_state(), SemState::Top);
        a.locations[0].invariant = CC::True;
        a.locations[0].co_invariant = CC::False;
        assert_eq!(SymbolicTiots::new(&a).init_state(), SemState::Bot);
    }

    #[test]
    fn sinks() {
        let a = controller_like();
        let s = SymbolicTiots::new(&a);
        let b = s.succ_action(&SemState::Bot, "printed").unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].state.is_bot());
        assert!(s.succ_action(&SemState::Top, "print").unwrap().is_empty());
        assert!(s.succ_delay(&SemState::Top).iter().all(|x| x.state.is_top()));
        assert_eq!(s.succ_action(&SemState::Top, "zzz"), Err(SemanticsError::UnknownAction("zzz".into())));
    }

    #[test]
    fn timeout_and_completion() {
        let a = controller_like();
        let s = SymbolicTiots::new(&a);
        let init = s.init_state();
        let d = s.succ_delay(&init);
        assert!(d.iter().all(|x| matches!(x.state, SemState::Plain { location: 0, .. })));
        // print? from idle enters busy with y=0.
        let p = s.succ_action(&init, "print").unwrap();
        assert_eq!(p.len(), 1);
        let busy = p[0].state.clone();
        // printed! from idle is disabled: completion to ⊤.
        let out = s.succ_action(&init, "printed").unwrap();
        assert!(out.iter().all(|x| x.state.is_top() && x.step == Step::Completion));
        // In busy, delaying past y=10 times out.
        let d = s.succ_delay(&busy);
        let bot: Vec<_> = d.iter().filter(|x| x.state.is_bot()).collect();
        assert_eq!(bot.len(), 1);
        assert!(bot[0].zone.contains(&ClockValuation::new(vec![Q::new(21, 2)])));
        assert!(!bot[0].zone.contains(&ClockValuation::from_integers(&[10])));
        assert!(!s.is_semi_top(&busy));
    }

    #[test]
    fn semi_top_without_outputs() {
        let mut a = Tioa::new("s");
        a.clocks = vec!["x".into()];
        a.inputs.insert("a".into());
        a.locations.push(Location { name: "l".into(), invariant: CC::le(0, 5), co_invariant: CC::True });
        let s = SymbolicTiots::new(&a);
        assert!(s.is_semi_top(&s.init_state()));
    }

    proptest! {
        // Symbolic successors agree with concrete ones at sampled valuations.
        #[test]
        fn symbolic_matches_concrete(y in 0i64..24, half in proptest::bool::ANY, d in 1i64..30) {
            let a = controller_like();
            let s = SymbolicTiots::new(&a);
            let yv = if half { Q::new(2 * y + 1, 2) } else { q(y) };
            let t = ClockValuation::new(vec![yv]);
            let sym = SemState::Plain { location: 1, zone: Zone::zero(1) };
            let conc = ConcreteState::Plain { location: 1, valuation: ClockValuation::zero(1) };
            // delay to t
            if yv > Q::zero() {
                let (c, _) = concrete_delay(&a, &conc, yv);
                let hits: Vec<_> = s.succ_delay(&sym).into_iter().filter(|x| x.zone.contains(&t)).collect();
                prop_assert_eq!(hits.len(), 1);
                let expect = match &c {
                    ConcreteState::Bot => hits[0].state.is_bot(),
                    ConcreteState::Top => hits[0].state.is_top(),
                    ConcreteState::Plain { .. } => matches!(hits[0].state, SemState::Plain { .. }),
                };
                prop_assert!(expect);
            }
            // time additivity of the concrete stepper
            let dd = Q::new(d, 3);
            let (one, _) = concrete_delay(&a, &conc, yv + dd);
            let (mid, _) = concrete_delay(&a, &conc, yv.max(Q::new(1, 7)));
            let (two, _) = concrete_delay(&a, &mid, dd);
            if yv > Q::zero() {
                prop_assert_eq!(one, two);
            }
        }
    }
}
