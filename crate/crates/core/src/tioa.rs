//! Timed I/O automata with invariants and co-invariants.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::constraint::{Clock, ClockConstraint};
use crate::federation::Federation;
use crate::zone::Zone;

/// Name used for the ⊥ sink location in derived automata.
pub const BOT_LOCATION: &str = "BOT";
/// Name used for the ⊤ sink location in derived automata.
pub const TOP_LOCATION: &str = "TOP";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
    pub co_invariant: ClockConstraint,
}

impl Location {
    pub fn new(name: impl Into<String>) -> Self {
        Location {
            name: name.into(),
            invariant: ClockConstraint::True,
            co_invariant: ClockConstraint::True,
        }
    }

    /// A location entered only as ⊥: time may pass, the co-invariant never holds.
    pub fn bot_sink() -> Self {
        Location {
            name: BOT_LOCATION.into(),
            invariant: ClockConstraint::True,
            co_invariant: ClockConstraint::False,
        }
    }

    /// A location entered only as ⊤: the invariant never holds.
    pub fn top_sink() -> Self {
        Location {
            name: TOP_LOCATION.into(),
            invariant: ClockConstraint::False,
            co_invariant: ClockConstraint::True,
        }
    }

    pub fn is_bot_sink(&self) -> bool {
        self.invariant == ClockConstraint::True && self.co_invariant == ClockConstraint::False
    }

    pub fn is_top_sink(&self) -> bool {
        self.invariant == ClockConstraint::False
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub guard: ClockConstraint,
    pub action: String,
    pub resets: Vec<Clock>,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tioa {
    pub name: String,
    pub clocks: Vec<String>,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub locations: Vec<Location>,
    pub initial: usize,
    pub edges: Vec<Edge>,
    /// Produced by a composition operator: invariants need not be
    /// downward-closed, only delay-monotone.
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    AlphabetOverlap { action: String },
    NegativeConstant { context: String, constant: i64 },
    NotDownwardClosed { location: String, constraint: &'static str },
    NotDelayMonotone { location: String },
    UndeclaredClock { context: String, clock: usize },
    UnknownInitial { index: usize },
    UnknownLocation { edge: usize, index: usize },
    UnknownAction { edge: usize, action: String },
    NoLocations,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AlphabetOverlap { action } => {
                write!(f, "alphabet overlap: `{action}` is both an input and an output")
            }
            Violation::NegativeConstant { context, constant } => {
                write!(f, "non-natural constant {constant} in {context}")
            }
            Violation::NotDownwardClosed { location, constraint } => {
                write!(f, "{constraint} not downward-closed at location `{location}`")
            }
            Violation::NotDelayMonotone { location } => {
                write!(f, "plain region of location `{location}` is not closed under delay predecessors")
            }
            Violation::UndeclaredClock { context, clock } => {
                write!(f, "undeclared clock #{clock} in {context}")
            }
            Violation::UnknownInitial { index } => write!(f, "unknown initial location #{index}"),
            Violation::UnknownLocation { edge, index } => {
                write!(f, "edge {edge} refers to unknown location #{index}")
            }
            Violation::UnknownAction { edge, action } => {
                write!(f, "edge {edge} uses action `{action}` outside the alphabet")
            }
            Violation::NoLocations => write!(f, "automaton has no locations"),
        }
    }
}

impl Tioa {
    pub fn new(name: impl Into<String>) -> Self {
        Tioa {
            name: name.into(),
            clocks: Vec::new(),
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
            locations: Vec::new(),
            initial: 0,
            edges: Vec::new(),
            derived: false,
        }
    }

    pub fn clock_count(&self) -> usize {
        self.clocks.len()
    }

    pub fn alphabet(&self) -> BTreeSet<String> {
        self.inputs.union(&self.outputs).cloned().collect()
    }

    pub fn is_input(&self, action: &str) -> bool {
        self.inputs.contains(action)
    }

    pub fn is_output(&self, action: &str) -> bool {
        self.outputs.contains(action)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn clock_index(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c == name)
    }

    pub fn edges_from<'a>(&'a self, loc: usize, action: &'a str) -> impl Iterator<Item = (usize, &'a Edge)> + 'a {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == loc && e.action == action)
    }

    pub fn constraints(&self) -> impl Iterator<Item = &ClockConstraint> {
        self.locations
            .iter()
            .flat_map(|l| [&l.invariant, &l.co_invariant])
            .chain(self.edges.iter().map(|e| &e.guard))
    }

    /// Largest constant per clock (at least 0).
    pub fn max_constants(&self) -> Vec<i64> {
        let mut m = vec![0; self.clock_count()];
        for cc in self.constraints() {
            cc.max_constants(self.clock_count(), &mut m);
        }
        m
    }

    /// Only non-strict constraints after negation normal form.
    pub fn is_closed(&self) -> bool {
        self.constraints().all(ClockConstraint::is_closed)
    }

    pub fn has_diagonals(&self) -> bool {
        self.constraints().any(ClockConstraint::has_diagonal)
    }

    /// Well-formedness report; empty iff the automaton is well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for a in self.inputs.intersection(&self.outputs) {
            out.push(Violation::AlphabetOverlap { action: a.clone() });
        }
        if self.locations.is_empty() {
            out.push(Violation::NoLocations);
        } else if self.initial >= self.locations.len() {
            out.push(Violation::UnknownInitial { index: self.initial });
        }
        let n = self.clock_count();
        let check_cc = |cc: &ClockConstraint, context: String, out: &mut Vec<Violation>| {
            let mut ok = true;
            for a in cc.atoms() {
                if a.constant < 0 {
                    out.push(Violation::NegativeConstant { context: context.clone(), constant: a.constant });
                }
                for c in std::iter::once(a.left).chain(a.right) {
                    if c >= n {
                        out.push(Violation::UndeclaredClock { context: context.clone(), clock: c });
                        ok = false;
                    }
                }
            }
            ok
        };
        for l in &self.locations {
            let inv_ok = check_cc(&l.invariant, format!("invariant of `{}`", l.name), &mut out);
            let co_ok = check_cc(&l.co_invariant, format!("co-invariant of `{}`", l.name), &mut out);
            if !(inv_ok && co_ok) {
                continue;
            }
            let inv = Federation::from_constraint(n, &l.invariant);
            let co = Federation::from_constraint(n, &l.co_invariant);
            if self.derived {
                let plain = inv.intersect(&co);
                if !plain.complement().future().intersect(&plain).is_empty() {
                    out.push(Violation::NotDelayMonotone { location: l.name.clone() });
                }
            } else {
                if !is_downward_closed(&inv) {
                    out.push(Violation::NotDownwardClosed { location: l.name.clone(), constraint: "invariant" });
                }
                if !is_downward_closed(&co) {
                    out.push(Violation::NotDownwardClosed { location: l.name.clone(), constraint: "co-invariant" });
                }
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            for idx in [e.source, e.target] {
                if idx >= self.locations.len() {
                    out.push(Violation::UnknownLocation { edge: i, index: idx });
                }
            }
            if !self.inputs.contains(&e.action) && !self.outputs.contains(&e.action) {
                out.push(Violation::UnknownAction { edge: i, action: e.action.clone() });
            }
            check_cc(&e.guard, format!("guard of edge {i}"), &mut out);
            for &c in &e.resets {
                if c >= n {
                    out.push(Violation::UndeclaredClock { context: format!("reset of edge {i}"), clock: c });
                }
            }
        }
        out
    }
}

/// Downward closure of a zone: only its single-clock upper bounds.
fn downward_closure(z: &Zone) -> Zone {
    let mut d = Zone::universe(z.clocks());
    for i in 1..z.dim() {
        d.tighten(i, 0, z.get(i, 0));
    }
    d.close();
    d
}

/// A federation is downward-closed iff it contains the downward closure of
/// each of its zones.
pub fn is_downward_closed(f: &Federation) -> bool {
    let closure = Federation::from_zones(f.clocks(), f.zones().iter().map(downward_closure));
    closure.is_subset(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{ClockConstraint as CC, ClockValuation, Q};
    use proptest::prelude::*;

    fn one_location(inv: CC, coinv: CC) -> Tioa {
        let mut a = Tioa::new("t");
        a.clocks = vec!["x".into()];
        a.inputs.insert("a".into());
        a.locations.push(Location { name: "l".into(), invariant: inv, co_invariant: coinv });
        a
    }

    #[test]
    fn co_invariant_lower_bound_rejected() {
        let a = one_location(CC::True, CC::ge(0, 3));
        let v = a.validate();
        assert!(v.iter().any(|v| matches!(v, Violation::NotDownwardClosed { constraint: "co-invariant", .. })), "{v:?}");
    }

    #[test]
    fn overlap_rejected() {
        let mut a = one_location(CC::True, CC::True);
        a.outputs.insert("a".into());
        assert_eq!(a.validate(), vec![Violation::AlphabetOverlap { action: "a".into() }]);
    }

    #[test]
    fn unknown_initial_and_clock() {
        let mut a = one_location(CC::le(3, 2), CC::True);
        a.initial = 4;
        let v = a.validate();
        assert!(v.contains(&Violation::UnknownInitial { index: 4 }));
        assert!(v.iter().any(|v| matches!(v, Violation::UndeclaredClock { clock: 3, .. })));
    }

    #[test]
    fn downward_closed_unions() {
        // x<=1 || (x>=1 && x<=3) is x<=3.
        let cc = CC::or([CC::le(0, 1), CC::and([CC::ge(0, 1), CC::le(0, 3)])]);
        assert!(is_downward_closed(&Federation::from_constraint(1, &cc)));
        let diag = CC::diff(0, 1, crate::constraint::Rel::Le, 1);
        assert!(!is_downward_closed(&Federation::from_constraint(2, &diag)));
    }

    fn arb_cc() -> impl Strategy<Value = CC> {
        let atom = (0usize..2, 0usize..5, 0i64..4).prop_map(|(x, r, c)| {
            let rel = [
                crate::constraint::Rel::Lt,
                crate::constraint::Rel::Le,
                crate::constraint::Rel::Eq,
                crate::constraint::Rel::Ge,
                crate::constraint::Rel::Gt,
            ][r];
            CC::atom(x, rel, c)
        });
        atom.prop_recursive(2, 8, 3, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 1..3).prop_map(CC::And),
                proptest::collection::vec(inner, 1..3).prop_map(CC::Or),
            ]
        })
    }

    proptest! {
        // The checker accepts exactly constraints closed under pointwise
        // smaller valuations: sample pairs t' <= t on a half-integer grid.
        #[test]
        fn downward_closed_checker_matches_sampling(cc in arb_cc()) {
            let fed = Federation::from_constraint(2, &cc);
            let mut sampled_dc = true;
            let grid: Vec<Q> = (0..10).map(|k| Q::new(k, 2)).collect();
            'outer: for &a in &grid {
                for &b in &grid {
                    let t = ClockValuation::new(vec![a, b]);
                    if !cc.eval(&t) { continue; }
                    for &a2 in grid.iter().filter(|&&v| v <= a) {
                        for &b2 in grid.iter().filter(|&&v| v <= b) {
                            if !cc.eval(&ClockValuation::new(vec![a2, b2])) {
                                sampled_dc = false;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            prop_assert_eq!(is_downward_closed(&fed), sampled_dc);
        }
    }
}
