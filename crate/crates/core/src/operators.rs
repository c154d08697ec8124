//! Parallel composition, conjunction, disjunction, quotient and mirror as
//! product automata with explicit ⊥/⊤ sink locations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constraint::{Clock, ClockConstraint, ClockValuation};
use crate::federation::Federation;
use crate::semantics::SymbolicTiots;
use crate::tioa::{Edge, Location, Tioa, BOT_LOCATION, TOP_LOCATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    Parallel,
    Conjunction,
    Disjunction,
    Quotient,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::Parallel, Operator::Conjunction, Operator::Disjunction, Operator::Quotient];

    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Parallel => "par",
            Operator::Conjunction => "and",
            Operator::Disjunction => "or",
            Operator::Quotient => "quot",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Coarse state class of one operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Top,
    Plain,
    Bot,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Top, Class::Plain, Class::Bot];
}

/// Combined state: a sink, a pair, or a single surviving operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolved {
    Top,
    Bot,
    Pair,
    /// Only the left operand continues.
    Left,
    /// Only the right operand continues.
    Right,
}

/// State combination table for `s0 ⊗ s1`.
pub fn resolve(op: Operator, s0: Class, s1: Class) -> Resolved {
    use Class::*;
    match op {
        Operator::Parallel => match (s0, s1) {
            (Top, _) | (_, Top) => Resolved::Top,
            (Bot, _) | (_, Bot) => Resolved::Bot,
            _ => Resolved::Pair,
        },
        Operator::Conjunction => match (s0, s1) {
            (Top, _) | (_, Top) => Resolved::Top,
            (Bot, Bot) => Resolved::Bot,
            (Bot, Plain) => Resolved::Right,
            (Plain, Bot) => Resolved::Left,
            _ => Resolved::Pair,
        },
        Operator::Disjunction => match (s0, s1) {
            (Bot, _) | (_, Bot) => Resolved::Bot,
            (Top, Top) => Resolved::Top,
            (Top, Plain) => Resolved::Right,
            (Plain, Top) => Resolved::Left,
            _ => Resolved::Pair,
        },
        Operator::Quotient => match (s0, s1) {
            (_, Top) | (Bot, _) => Resolved::Bot,
            (_, Bot) | (Top, _) => Resolved::Top,
            _ => Resolved::Pair,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NondeterminismWitness {
    pub location: String,
    pub action: String,
    pub edges: (usize, usize),
    pub valuation: Vec<String>,
}

impl fmt::Display for NondeterminismWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "edges {} and {} on `{}` from `{}` overlap at ({})",
            self.edges.0,
            self.edges.1,
            self.action,
            self.location,
            self.valuation.join(", ")
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OperatorError {
    #[error("not composable: outputs {0:?} are shared")]
    OutputOverlap(Vec<String>),
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("left operand does not dominate the right operand")]
    NotDominated,
    #[error("operand `{name}` is nondeterministic: {witness}")]
    Nondeterministic { name: String, witness: NondeterminismWitness },
}

/// Whether same-action edges from each location have disjoint enabling
/// regions.
pub fn check_deterministic(a: &Tioa) -> Result<(), NondeterminismWitness> {
    let sym = SymbolicTiots::new(a);
    for (l, loc) in a.locations.iter().enumerate() {
        let plain = &sym.regions[l].plain;
        let out: Vec<usize> = (0..a.edges.len()).filter(|&i| a.edges[i].source == l).collect();
        for (k, &i) in out.iter().enumerate() {
            for &j in &out[k + 1..] {
                if a.edges[i].action != a.edges[j].action {
                    continue;
                }
                let both = plain.intersect(&sym.guards[i]).intersect(&sym.guards[j]);
                if let Some(z) = both.zones().first() {
                    let t = z.sample().expect("non-empty zone");
                    return Err(NondeterminismWitness {
                        location: loc.name.clone(),
                        action: a.edges[i].action.clone(),
                        edges: (i, j),
                        valuation: valuation_strings(a, &t),
                    });
                }
            }
        }
    }
    Ok(())
}

fn valuation_strings(a: &Tioa, t: &ClockValuation) -> Vec<String> {
    a.clocks.iter().zip(t.values()).map(|(c, v)| format!("{c}={v}")).collect()
}

/// Regions of one operand location, embedded in the joint clock space.
struct LocRegions {
    plain: Federation,
    error: Federation,
    magic: Federation,
    /// Valuations reached by delay after a time-out.
    delay_bot: Federation,
    /// Valuations reached by delay past the invariant.
    delay_top: Federation,
}

struct Operand<'a> {
    tioa: &'a Tioa,
    offset: usize,
    regions: Vec<LocRegions>,
    guards: Vec<Federation>,
}

impl<'a> Operand<'a> {
    fn new(tioa: &'a Tioa, total: usize, offset: usize) -> Self {
        let sym = SymbolicTiots::new(tioa);
        let regions = sym
            .regions
            .iter()
            .map(|r| {
                let delay_bot = r.error.future().reduce();
                let delay_top = r.plain.union(&delay_bot).complement().reduce();
                let e = |f: &Federation| f.embed(total, offset);
                LocRegions {
                    plain: e(&r.plain),
                    error: e(&r.error),
                    magic: e(&r.magic),
                    delay_bot: e(&delay_bot),
                    delay_top: e(&delay_top),
                }
            })
            .collect();
        let guards = sym.guards.iter().map(|g| g.embed(total, offset)).collect();
        Operand { tioa, offset, regions, guards }
    }

    fn cc(&self, c: &ClockConstraint) -> ClockConstraint {
        let off = self.offset;
        c.map_clocks(&|x| x + off)
    }

    fn resets(&self, rs: &[Clock]) -> Vec<Clock> {
        rs.iter().map(|c| c + self.offset).collect()
    }

    fn delay_region(&self, loc: usize, c: Class) -> &Federation {
        let r = &self.regions[loc];
        match c {
            Class::Plain => &r.plain,
            Class::Bot => &r.delay_bot,
            Class::Top => &r.delay_top,
        }
    }

    fn init_class(&self) -> Class {
        let l = &self.tioa.locations[self.tioa.initial];
        let zero = ClockValuation::zero(self.tioa.clock_count());
        if !l.invariant.eval(&zero) {
            Class::Top
        } else if !l.co_invariant.eval(&zero) {
            Class::Bot
        } else {
            Class::Plain
        }
    }

    /// Completed moves on `action` from plain valuations of `loc`.
    fn moves(&self, loc: usize, action: &str, total: usize) -> Vec<Move> {
        let plain = &self.regions[loc].plain;
        let mut out = Vec::new();
        let mut enabled = Federation::empty(total);
        let mut enabled_cc = Vec::new();
        for (i, e) in self.tioa.edges_from(loc, action) {
            let guard = plain.intersect(&self.guards[i]);
            enabled = enabled.union(&guard);
            enabled_cc.push(self.cc(&e.guard));
            let resets = self.resets(&e.resets);
            let t = &self.regions[e.target];
            let entries = vec![
                Entry { class: Class::Plain, pre: t.plain.reset_preimage(&resets), target: Some(e.target) },
                Entry { class: Class::Bot, pre: t.error.reset_preimage(&resets), target: None },
                Entry { class: Class::Top, pre: t.magic.reset_preimage(&resets), target: None },
            ];
            out.push(Move { guard, cc: self.cc(&e.guard), resets, entries, sink: false });
        }
        let sink = if self.tioa.is_input(action) { Class::Bot } else { Class::Top };
        out.push(Move {
            guard: plain.subtract(&enabled),
            cc: ClockConstraint::or(enabled_cc).negate(),
            resets: Vec::new(),
            entries: vec![Entry { class: sink, pre: Federation::universe(total), target: None }],
            sink: true,
        });
        out
    }
}

struct Entry {
    class: Class,
    pre: Federation,
    target: Option<usize>,
}

struct Move {
    guard: Federation,
    cc: ClockConstraint,
    resets: Vec<Clock>,
    entries: Vec<Entry>,
    sink: bool,
}

impl Move {
    fn stay(loc: usize, total: usize) -> Move {
        Move {
            guard: Federation::universe(total),
            cc: ClockConstraint::True,
            resets: Vec::new(),
            entries: vec![Entry { class: Class::Plain, pre: Federation::universe(total), target: Some(loc) }],
            sink: false,
        }
    }

    fn dead(class: Class, total: usize) -> Move {
        Move {
            guard: Federation::universe(total),
            cc: ClockConstraint::True,
            resets: Vec::new(),
            entries: vec![Entry { class, pre: Federation::universe(total), target: None }],
            sink: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Pair(usize, usize),
    Left(usize),
    Right(usize),
    Bot,
    Top,
}

struct Builder {
    out: Tioa,
    index: BTreeMap<Key, usize>,
    queue: VecDeque<Key>,
    names: BTreeSet<String>,
}

impl Builder {
    fn new(out: Tioa) -> Self {
        Builder { out, index: BTreeMap::new(), queue: VecDeque::new(), names: BTreeSet::new() }
    }

    fn unique(&mut self, mut name: String) -> String {
        while self.names.contains(&name) {
            name.push('\'');
        }
        self.names.insert(name.clone());
        name
    }

    /// Location index for `key`, created with a placeholder on first use.
    fn location(&mut self, key: Key, name: impl FnOnce() -> String) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let loc = match key {
            Key::Bot => Location::bot_sink(),
            Key::Top => Location::top_sink(),
            _ => Location::new(name()),
        };
        let name = self.unique(loc.name.clone());
        let i = self.out.locations.len();
        self.out.locations.push(Location { name, ..loc });
        self.index.insert(key, i);
        if !matches!(key, Key::Bot | Key::Top) {
            self.queue.push_back(key);
        }
        i
    }

    /// Add an edge whose exact enabling region is `guard`, printing
    /// `candidate` when it agrees with `guard` on `within`.
    fn edge(&mut self, source: usize, guard: &Federation, candidate: ClockConstraint, within: &Federation, action: &str, resets: Vec<Clock>, target: usize) {
        if guard.is_empty() {
            return;
        }
        let n = guard.clocks();
        let cand = Federation::from_constraint(n, &candidate).intersect(within);
        let exact = guard.intersect(within);
        let guard_cc = if cand.equals(&exact) { candidate } else { exact.to_constraint() };
        let mut resets = resets;
        resets.sort();
        resets.dedup();
        self.out.edges.push(Edge { source, guard: guard_cc, action: action.to_string(), resets, target });
    }
}

fn joint_clocks(a0: &Tioa, a1: &Tioa) -> Vec<String> {
    let clash = a0.clocks.iter().any(|c| a1.clocks.contains(c));
    if !clash {
        return a0.clocks.iter().chain(&a1.clocks).cloned().collect();
    }
    let (p0, p1) = if a0.name != a1.name { (a0.name.clone(), a1.name.clone()) } else { ("l".into(), "r".into()) };
    a0.clocks
        .iter()
        .map(|c| format!("{p0}.{c}"))
        .chain(a1.clocks.iter().map(|c| format!("{p1}.{c}")))
        .collect()
}

fn alphabet(op: Operator, a0: &Tioa, a1: &Tioa) -> Result<(BTreeSet<String>, BTreeSet<String>), OperatorError> {
    match op {
        Operator::Parallel => {
            let shared: Vec<String> = a0.outputs.intersection(&a1.outputs).cloned().collect();
            if !shared.is_empty() {
                return Err(OperatorError::OutputOverlap(shared));
            }
            let outputs: BTreeSet<String> = a0.outputs.union(&a1.outputs).cloned().collect();
            let inputs = a0.inputs.union(&a1.inputs).filter(|a| !outputs.contains(*a)).cloned().collect();
            Ok((inputs, outputs))
        }
        Operator::Conjunction | Operator::Disjunction => {
            if a0.inputs != a1.inputs || a0.outputs != a1.outputs {
                return Err(OperatorError::AlphabetMismatch);
            }
            Ok((a0.inputs.clone(), a0.outputs.clone()))
        }
        Operator::Quotient => {
            if !a1.alphabet().is_subset(&a0.alphabet()) || !a1.outputs.is_subset(&a0.outputs) {
                return Err(OperatorError::NotDominated);
            }
            if let Err(witness) = check_deterministic(a1) {
                return Err(OperatorError::Nondeterministic { name: a1.name.clone(), witness });
            }
            let inputs = a0.inputs.union(&a1.outputs).cloned().collect();
            let outputs = a0.outputs.difference(&a1.outputs).cloned().collect();
            Ok((inputs, outputs))
        }
    }
}

/// `a0 ⊗ a1` as an automaton over the joint clocks.
pub fn compose(op: Operator, a0: &Tioa, a1: &Tioa) -> Result<Tioa, OperatorError> {
    let (inputs, outputs) = alphabet(op, a0, a1)?;
    // Parallel composition of ordinary automata stays an ordinary automaton.
    let simple = op == Operator::Parallel && !a0.derived && !a1.derived;
    let name = format!("{}_{}_{}", a0.name, op, a1.name);
    Ok(product(op, simple, name, a0, a1, inputs, outputs))
}

/// Synchronized product of the completed operands, combining their states
/// by `op`. With `simple`, pair locations use the conjunction of the
/// operand invariants and co-invariants. Input edges into ⊥ and output
/// edges into ⊤ are left to the implicit completion of the result.
fn product(
    op: Operator,
    simple: bool,
    name: String,
    a0: &Tioa,
    a1: &Tioa,
    inputs: BTreeSet<String>,
    outputs: BTreeSet<String>,
) -> Tioa {
    let n0 = a0.clock_count();
    let total = n0 + a1.clock_count();
    let left = Operand::new(a0, total, 0);
    let right = Operand::new(a1, total, n0);
    let mut out = Tioa::new(name);
    out.clocks = joint_clocks(a0, a1);
    out.inputs = inputs;
    out.outputs = outputs;
    out.derived = !simple;
    let mut b = Builder::new(out);

    let name = |key: Key| match key {
        Key::Pair(l0, l1) => format!("{}.{}", a0.locations[l0].name, a1.locations[l1].name),
        Key::Left(l0) => format!("{}._", a0.locations[l0].name),
        Key::Right(l1) => format!("_.{}", a1.locations[l1].name),
        Key::Bot => "BOT".into(),
        Key::Top => "TOP".into(),
    };
    let key_of = |r: Resolved, t0: Option<usize>, t1: Option<usize>| match r {
        Resolved::Bot => Key::Bot,
        Resolved::Top => Key::Top,
        Resolved::Pair => Key::Pair(t0.expect("plain left"), t1.expect("plain right")),
        Resolved::Left => Key::Left(t0.expect("plain left")),
        Resolved::Right => Key::Right(t1.expect("plain right")),
    };

    let init = key_of(
        resolve(op, left.init_class(), right.init_class()),
        Some(a0.initial),
        Some(a1.initial),
    );
    b.out.initial = b.location(init, || name(init));

    let actions: Vec<String> = a0.alphabet().union(&a1.alphabet()).cloned().collect();
    while let Some(key) = b.queue.pop_front() {
        let src = b.index[&key];
        match key {
            Key::Left(l0) => copy_location(&mut b, &left, l0, src, Key::Left, &name),
            Key::Right(l1) => copy_location(&mut b, &right, l1, src, Key::Right, &name),
            Key::Pair(l0, l1) => {
                // Delay regions of the pair, by operand class.
                let mut modes = Vec::new();
                let mut bot = Federation::empty(total);
                let mut top = Federation::empty(total);
                for c0 in Class::ALL {
                    for c1 in Class::ALL {
                        let region = left.delay_region(l0, c0).intersect(right.delay_region(l1, c1));
                        match resolve(op, c0, c1) {
                            Resolved::Bot => bot = bot.union(&region),
                            Resolved::Top => top = top.union(&region),
                            r => modes.push((c0, c1, r, region)),
                        }
                    }
                }
                let loc0 = &a0.locations[l0];
                let loc1 = &a1.locations[l1];
                let plain;
                if simple {
                    let inv = ClockConstraint::and([left.cc(&loc0.invariant), right.cc(&loc1.invariant)]);
                    let coinv = ClockConstraint::and([left.cc(&loc0.co_invariant), right.cc(&loc1.co_invariant)]);
                    plain = Federation::from_constraint(total, &ClockConstraint::and([inv.clone(), coinv.clone()]));
                    b.out.locations[src].invariant = inv;
                    b.out.locations[src].co_invariant = coinv;
                } else {
                    let (bot, top) = (bot.reduce(), top.reduce());
                    let bot_first = bot.subtract(&top.future()).future().reduce();
                    let top_first = top.subtract(&bot.future()).future().reduce();
                    plain = bot_first.union(&top_first).complement().reduce();
                    b.out.locations[src].invariant = top_first.complement().reduce().to_constraint();
                    b.out.locations[src].co_invariant = bot_first.complement().reduce().to_constraint();
                }
                for action in &actions {
                    for (c0, c1, r, region) in &modes {
                        let (m0, m1): (Vec<Move>, Vec<Move>) = match r {
                            Resolved::Pair => {
                                let in0 = a0.alphabet().contains(action);
                                let in1 = a1.alphabet().contains(action);
                                (
                                    if in0 { left.moves(l0, action, total) } else { vec![Move::stay(l0, total)] },
                                    if in1 { right.moves(l1, action, total) } else { vec![Move::stay(l1, total)] },
                                )
                            }
                            Resolved::Left => (left.moves(l0, action, total), vec![Move::dead(*c1, total)]),
                            Resolved::Right => (vec![Move::dead(*c0, total)], right.moves(l1, action, total)),
                            _ => unreachable!(),
                        };
                        for x in &m0 {
                            for y in &m1 {
                                let guard = region.intersect(&x.guard).intersect(&y.guard);
                                if guard.is_empty() {
                                    continue;
                                }
                                let cc = ClockConstraint::and([x.cc.clone(), y.cc.clone()]);
                                let resets: Vec<Clock> = x.resets.iter().chain(&y.resets).copied().collect();
                                if simple && !x.sink && !y.sink {
                                    let t0 = x.entries[0].target;
                                    let t1 = y.entries[0].target;
                                    let k = Key::Pair(t0.unwrap(), t1.unwrap());
                                    let dst = b.location(k, || name(k));
                                    b.edge(src, &guard, cc, &plain, action, resets, dst);
                                    continue;
                                }
                                let mut by_dest: BTreeMap<Key, Federation> = BTreeMap::new();
                                for e0 in &x.entries {
                                    for e1 in &y.entries {
                                        let piece = guard.intersect(&e0.pre).intersect(&e1.pre);
                                        if piece.is_empty() {
                                            continue;
                                        }
                                        let k = key_of(resolve(op, e0.class, e1.class), e0.target, e1.target);
                                        let acc = by_dest.entry(k).or_insert_with(|| Federation::empty(total));
                                        *acc = acc.union(&piece);
                                    }
                                }
                                for (k, g) in by_dest {
                                    let implicit = match k {
                                        Key::Bot => b.out.inputs.contains(action),
                                        Key::Top => b.out.outputs.contains(action),
                                        _ => false,
                                    };
                                    if implicit {
                                        continue;
                                    }
                                    let dst = b.location(k, || name(k));
                                    let rs = if matches!(k, Key::Bot | Key::Top) { Vec::new() } else { resets.clone() };
                                    b.edge(src, &g, cc.clone(), &plain, action, rs, dst);
                                }
                            }
                        }
                    }
                }
            }
            Key::Bot | Key::Top => unreachable!(),
        }
    }
    b.out
}

/// A single surviving operand continues unchanged.
fn copy_location(b: &mut Builder, op: &Operand, l: usize, src: usize, wrap: fn(usize) -> Key, name: &dyn Fn(Key) -> String) {
    let loc = &op.tioa.locations[l];
    b.out.locations[src].invariant = op.cc(&loc.invariant);
    b.out.locations[src].co_invariant = op.cc(&loc.co_invariant);
    for e in op.tioa.edges.iter().filter(|e| e.source == l) {
        let k = wrap(e.target);
        let dst = b.location(k, || name(k));
        b.out.edges.push(Edge {
            source: src,
            guard: op.cc(&e.guard),
            action: e.action.clone(),
            resets: op.resets(&e.resets),
            target: dst,
        });
    }
}

pub fn compose_parallel(a0: &Tioa, a1: &Tioa) -> Result<Tioa, OperatorError> {
    compose(Operator::Parallel, a0, a1)
}

pub fn compose_conjunction(a0: &Tioa, a1: &Tioa) -> Result<Tioa, OperatorError> {
    compose(Operator::Conjunction, a0, a1)
}

pub fn compose_disjunction(a0: &Tioa, a1: &Tioa) -> Result<Tioa, OperatorError> {
    compose(Operator::Disjunction, a0, a1)
}

pub fn compose_quotient(a0: &Tioa, a1: &Tioa) -> Result<Tioa, OperatorError> {
    compose(Operator::Quotient, a0, a1)
}

/// Swap inputs with outputs and ⊥ with ⊤. The operand must be deterministic.
pub fn mirror(a: &Tioa) -> Result<Tioa, OperatorError> {
    if let Err(witness) = check_deterministic(a) {
        return Err(OperatorError::Nondeterministic { name: a.name.clone(), witness });
    }
    let n = a.clock_count();
    let op = Operand::new(a, n, 0);
    let mut out = Tioa::new(format!("{}_mirror", a.name));
    out.clocks = a.clocks.clone();
    out.inputs = a.outputs.clone();
    out.outputs = a.inputs.clone();
    out.derived = true;
    let mut sinks = Vec::new();
    for (l, loc) in a.locations.iter().enumerate() {
        let r = &op.regions[l];
        // Sinks swap roles, and names.
        let name = if loc.is_top_sink() {
            sinks.push((Key::Bot, l));
            BOT_LOCATION.to_string()
        } else if loc.is_bot_sink() {
            sinks.push((Key::Top, l));
            TOP_LOCATION.to_string()
        } else {
            loc.name.clone()
        };
        out.locations.push(Location {
            name,
            invariant: r.delay_bot.complement().to_constraint(),
            co_invariant: r.delay_top.complement().to_constraint(),
        });
    }
    let mut b = Builder::new(out);
    b.names = b.out.locations.iter().map(|l| l.name.clone()).collect();
    for (k, l) in sinks {
        b.index.entry(k).or_insert(l);
    }
    b.out.initial = match op.init_class() {
        Class::Plain => a.initial,
        Class::Bot => b.location(Key::Top, String::new),
        Class::Top => b.location(Key::Bot, String::new),
    };
    for (i, e) in a.edges.iter().enumerate() {
        let plain = &op.regions[e.source].plain;
        let guard = plain.intersect(&op.guards[i]);
        let t = &op.regions[e.target];
        let pieces = [
            (t.plain.reset_preimage(&e.resets), None),
            (t.error.reset_preimage(&e.resets), Some(Key::Top)),
            (t.magic.reset_preimage(&e.resets), Some(Key::Bot)),
        ];
        for (pre, sink) in pieces {
            let g = guard.intersect(&pre);
            let (dst, rs) = match sink {
                None => (e.target, e.resets.clone()),
                Some(k) => (b.location(k, String::new), Vec::new()),
            };
            b.edge(e.source, &g, e.guard.clone(), plain, &e.action, rs, dst);
        }
    }
    Ok(b.out)
}

/// Quotient as the mirror of the mirrored dividend composed with the divisor.
pub fn quotient_via_mirror(a0: &Tioa, a1: &Tioa) -> Result<Tioa, OperatorError> {
    alphabet(Operator::Quotient, a0, a1)?;
    let m = mirror(a0)?;
    mirror(&compose_parallel(&m, a1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ClockConstraint as CC;

    #[test]
    fn table_entries() {
        use Class::*;
        use Operator::*;
        // Rows are the right operand, columns the left: (⊤, p0, ⊥).
        let expect = |op, row: Class, cols: [Resolved; 3]| {
            for (c, r) in [Top, Plain, Bot].into_iter().zip(cols) {
                assert_eq!(resolve(op, c, row), r, "{op:?} s0={c:?} s1={row:?}");
            }
        };
        use Resolved as R;
        expect(Parallel, Top, [R::Top, R::Top, R::Top]);
        expect(Parallel, Plain, [R::Top, R::Pair, R::Bot]);
        expect(Parallel, Bot, [R::Top, R::Bot, R::Bot]);
        expect(Conjunction, Top, [R::Top, R::Top, R::Top]);
        expect(Conjunction, Plain, [R::Top, R::Pair, R::Right]);
        expect(Conjunction, Bot, [R::Top, R::Left, R::Bot]);
        expect(Disjunction, Top, [R::Top, R::Left, R::Bot]);
        expect(Disjunction, Plain, [R::Right, R::Pair, R::Bot]);
        expect(Disjunction, Bot, [R::Bot, R::Bot, R::Bot]);
        expect(Quotient, Top, [R::Bot, R::Bot, R::Bot]);
        expect(Quotient, Plain, [R::Top, R::Pair, R::Bot]);
        expect(Quotient, Bot, [R::Top, R::Top, R::Bot]);
    }

    fn one_clock(name: &str) -> Tioa {
        let mut a = Tioa::new(name);
        a.clocks = vec!["x".into()];
        a.inputs.insert("a".into());
        a.locations.push(Location::new("l"));
        a
    }

    #[test]
    fn boundary_overlap_is_nondeterministic() {
        let mut a = one_clock("n");
        for g in [CC::le(0, 5), CC::ge(0, 5)] {
            a.edges.push(Edge { source: 0, guard: g, action: "a".into(), resets: vec![], target: 0 });
        }
        let w = check_deterministic(&a).unwrap_err();
        assert_eq!(w.valuation, vec!["x=5".to_string()]);
        a.edges[1].guard = CC::atom(0, crate::constraint::Rel::Gt, 5);
        assert!(check_deterministic(&a).is_ok());
    }

    #[test]
    fn composability_errors() {
        let mut a = one_clock("p");
        let mut b = one_clock("q");
        a.outputs.insert("o".into());
        b.outputs.insert("o".into());
        assert_eq!(compose_parallel(&a, &b), Err(OperatorError::OutputOverlap(vec!["o".into()])));
        b.outputs.clear();
        assert_eq!(compose_conjunction(&a, &b), Err(OperatorError::AlphabetMismatch));
        b.outputs.insert("z".into());
        assert_eq!(compose_quotient(&a, &b), Err(OperatorError::NotDominated));
    }

    #[test]
    fn clashing_clocks_are_renamed() {
        let a = one_clock("p");
        let b = one_clock("q");
        let c = compose_parallel(&a, &b).unwrap();
        assert_eq!(c.clocks, vec!["p.x".to_string(), "q.x".to_string()]);
        assert!(c.validate().is_empty(), "{:?}", c.validate());
    }
}
