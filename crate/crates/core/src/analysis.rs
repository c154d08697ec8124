//! ⊥-reachability, refinement and equivalence over zone graphs.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constraint::{Clock, ClockValuation, Q};
use crate::federation::Federation;
use crate::operators::{self, Class, Resolved};
use crate::oracle::{self, Bounds};
use crate::semantics::{concrete_action, concrete_delay, concrete_init, ConcreteState, SemState, Step, SymbolicTiots};
use crate::tioa::Tioa;
use crate::word::{Letter, TimedWord};
use crate::zone::{self, Raw, Zone};

pub const DEFAULT_BUDGET: usize = 200_000;

/// Exploration budget, and the digitization used when an operand is
/// nondeterministic.
#[derive(Debug, Clone)]
pub struct Config {
    pub budget: usize,
    pub bounds: Bounds,
}

impl Default for Config {
    fn default() -> Self {
        Config { budget: DEFAULT_BUDGET, bounds: Bounds::unit(12, 4) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    Fails,
    BoundExceeded,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub states: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<TimedWord>,
    pub stats: Stats,
    /// Decided on the digitized semantics rather than symbolically.
    pub oracle_backed: bool,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.outcome {
            Outcome::Holds => write!(f, "holds")?,
            Outcome::Fails => write!(f, "fails")?,
            Outcome::BoundExceeded => write!(f, "bound exceeded")?,
        }
        if let Some(w) = &self.witness {
            write!(f, "; witness {w}")?;
        }
        write!(f, " ({} states, depth {})", self.stats.states, self.stats.depth)?;
        if self.oracle_backed {
            write!(f, " [digitized]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("witness does not replay: {0}")]
    BadWitness(TimedWord),
}

/// Extrapolation that stays exact in the presence of diagonal constraints:
/// zones are split along every diagonal of the automaton first, and each
/// piece keeps its side of every diagonal after widening.
struct Normalizer {
    max: Vec<i64>,
    diagonals: Vec<(usize, usize, Raw)>,
}

impl Normalizer {
    fn new(a: &Tioa) -> Self {
        Self::joint(&[a])
    }

    /// Over the concatenated clocks of `parts`.
    fn joint(parts: &[&Tioa]) -> Self {
        let mut diagonals = BTreeSet::new();
        let mut max = Vec::new();
        for a in parts {
            let offset = max.len();
            max.extend(a.max_constants());
            for cc in a.constraints() {
                for at in cc.atoms() {
                    let Some(r) = at.right else { continue };
                    let (l, r, c) = (at.left + 1 + offset, r + 1 + offset, at.constant);
                    use crate::constraint::Rel::*;
                    match at.rel {
                        Le => {
                            diagonals.insert((l, r, zone::le(c)));
                        }
                        Lt => {
                            diagonals.insert((l, r, zone::lt(c)));
                        }
                        Ge => {
                            diagonals.insert((r, l, zone::le(-c)));
                        }
                        Gt => {
                            diagonals.insert((r, l, zone::lt(-c)));
                        }
                        Eq => {
                            diagonals.insert((l, r, zone::le(c)));
                            diagonals.insert((r, l, zone::le(-c)));
                        }
                    }
                }
            }
        }
        Normalizer { max, diagonals: diagonals.into_iter().collect() }
    }

    fn normalize(&self, z: &Zone) -> Vec<Zone> {
        let mut pieces: Vec<(Zone, Vec<(usize, usize, Raw)>)> = vec![(z.clone(), Vec::new())];
        for &(i, j, r) in &self.diagonals {
            let mut next = Vec::new();
            for (p, sides) in pieces {
                for (a, b, bound) in [(i, j, r), (j, i, zone::negate(r))] {
                    let q = p.constrain(a, b, bound);
                    if !q.is_empty() {
                        let mut s = sides.clone();
                        s.push((a, b, bound));
                        next.push((q, s));
                    }
                }
            }
            pieces = next;
        }
        pieces
            .into_iter()
            .map(|(p, sides)| {
                let mut w = p.extrapolate(&self.max);
                for (a, b, bound) in sides {
                    w = w.constrain(a, b, bound);
                }
                w
            })
            .filter(|w| !w.is_empty())
            .collect()
    }
}

/// How a ⊥-reaching path ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Final {
    Edge(usize),
    Timeout,
}

struct Node {
    loc: usize,
    zone: Zone,
    parent: Option<usize>,
    via: Option<usize>,
    depth: usize,
}

/// Is ⊥ reachable without relying on the implicit ⊥-completion of inputs?
pub fn reach_bot(a: &Tioa, budget: usize) -> Verdict {
    let sym = SymbolicTiots::new(a);
    let norm = Normalizer::new(a);
    let mut stats = Stats::default();
    let verdict = |outcome, witness, stats| Verdict { outcome, witness, stats, oracle_backed: false };
    let init = match sym.init_state() {
        SemState::Bot => return verdict(Outcome::Fails, Some(TimedWord::empty()), stats),
        SemState::Top => return verdict(Outcome::Holds, None, stats),
        s => s,
    };
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashMap<usize, Vec<Zone>> = HashMap::new();
    let mut queue = VecDeque::new();

    // Close an entry state under delay; returns a ⊥ ending if time-outs occur.
    let mut enter = |state: &SemState, parent: Option<usize>, via: Option<usize>, nodes: &mut Vec<Node>, queue: &mut VecDeque<usize>| -> Option<(Option<usize>, Option<usize>, Final)> {
        let SemState::Plain { location, .. } = state else { unreachable!() };
        let depth = parent.map_or(0, |p| nodes[p].depth + 1);
        let mut timeout = false;
        for s in sym.succ_delay(state) {
            match s.state {
                SemState::Bot => timeout = true,
                SemState::Top => {}
                SemState::Plain { zone, .. } => {
                    for z in norm.normalize(&zone) {
                        let known = seen.entry(*location).or_default();
                        if known.iter().any(|k| k.includes(&z)) {
                            continue;
                        }
                        known.retain(|k| !z.includes(k));
                        known.push(z.clone());
                        nodes.push(Node { loc: *location, zone: z, parent, via, depth });
                        queue.push_back(nodes.len() - 1);
                    }
                }
            }
        }
        timeout.then_some((parent, via, Final::Timeout))
    };

    let mut found = enter(&init, None, None, &mut nodes, &mut queue);
    while found.is_none() {
        let Some(n) = queue.pop_front() else { break };
        stats.states += 1;
        stats.depth = stats.depth.max(nodes[n].depth);
        if stats.states > budget {
            return verdict(Outcome::BoundExceeded, None, stats);
        }
        let state = SemState::Plain { location: nodes[n].loc, zone: nodes[n].zone.clone() };
        let actions: BTreeSet<String> = a.alphabet();
        'actions: for act in &actions {
            for s in sym.succ_action(&state, act).expect("action in alphabet") {
                let Step::Edge(i) = s.step else { continue };
                match s.state {
                    SemState::Bot => {
                        found = Some((Some(n), None, Final::Edge(i)));
                        break 'actions;
                    }
                    SemState::Top => {}
                    next @ SemState::Plain { .. } => {
                        if let Some(f) = enter(&next, Some(n), Some(i), &mut nodes, &mut queue) {
                            found = Some(f);
                            break 'actions;
                        }
                    }
                }
            }
        }
    }
    let Some((last, via, fin)) = found else {
        return verdict(Outcome::Holds, None, stats);
    };
    let mut edges = Vec::new();
    if let Some(v) = via {
        edges.push(v);
    }
    let mut cur = last;
    while let Some(c) = cur {
        if let Some(v) = nodes[c].via {
            edges.push(v);
        }
        cur = nodes[c].parent;
    }
    edges.reverse();
    // A time-out right after entering through `via` ends at the entered state.
    let word = concretize(a, &sym, &edges, fin);
    verdict(Outcome::Fails, Some(word), stats)
}

/// Valuations reachable after delaying from `entry` without leaving the
/// plain region.
fn close(sym: &SymbolicTiots, loc: usize, entry: &Federation) -> Federation {
    let r = &sym.regions[loc];
    let fut = entry.future();
    let bot = r.error.intersect(&fut).future();
    fut.intersect(&r.plain).subtract(&bot)
}

/// Smallest representative delay taking `t` into `f`.
fn delay_into(t: &ClockValuation, f: &Federation) -> Option<Q> {
    f.zones().iter().filter_map(|z| z.delay_window(t)).map(|w| w.pick()).min()
}

/// A concrete timed word following `edges` (with delays in between) and
/// ending with `fin`.
fn concretize(a: &Tioa, sym: &SymbolicTiots, edges: &[usize], fin: Final) -> TimedWord {
    let n = a.clock_count();
    let zero = Federation::from_zone(Zone::zero(n));
    // Exact forward sets: entries and their delay closures.
    let mut entries = vec![zero.clone()];
    let mut closed = vec![close(sym, a.initial, &zero)];
    let mut locs = vec![a.initial];
    for &e in edges {
        let edge = &a.edges[e];
        let src = closed.last().unwrap().intersect(&sym.guards[e]);
        let entry = src.reset(&edge.resets).intersect(&sym.regions[edge.target].plain);
        closed.push(close(sym, edge.target, &entry));
        entries.push(entry);
        locs.push(edge.target);
    }
    let k = edges.len();
    let last_loc = locs[k];
    let target = match fin {
        Final::Edge(i) => {
            let e = &a.edges[i];
            closed[k].intersect(&sym.guards[i]).intersect(&sym.regions[e.target].error.reset_preimage(&e.resets))
        }
        Final::Timeout => closed[k].intersect(&sym.regions[last_loc].error.past()),
    };
    // Backward: valuations of each closure that can still complete the path.
    let mut good = vec![Federation::empty(n); k + 1];
    good[k] = target;
    for j in (1..=k).rev() {
        let e = &a.edges[edges[j - 1]];
        let entry_good = entries[j].intersect(&good[j].past());
        good[j - 1] = closed[j - 1].intersect(&sym.guards[edges[j - 1]]).intersect(&entry_good.reset_preimage(&e.resets));
    }
    let mut word = TimedWord::empty();
    let mut t = ClockValuation::zero(n);
    for j in 0..=k {
        let d = delay_into(&t, &good[j]).expect("witness path is feasible");
        word.push_delay(d);
        t = t.delay(d);
        if j < k {
            let e = &a.edges[edges[j]];
            word.push_action(e.action.clone());
            t = t.reset(&e.resets);
        }
    }
    match fin {
        Final::Edge(i) => word.push_action(a.edges[i].action.clone()),
        Final::Timeout => {
            let d = delay_into(&t, &sym.regions[last_loc].error).expect("time-out is reachable");
            word.push_delay(d);
        }
    }
    word
}

/// Concrete states reachable by reading `w`.
pub fn replay(a: &Tioa, w: &TimedWord) -> BTreeSet<ConcreteState> {
    let mut cur: BTreeSet<ConcreteState> = [concrete_init(a)].into();
    for l in w.letters() {
        cur = cur
            .iter()
            .flat_map(|s| match l {
                Letter::Action(act) => concrete_action(a, s, act).into_iter().map(|(s, _)| s).collect::<Vec<_>>(),
                Letter::Delay(d) => vec![concrete_delay(a, s, *d).0],
            })
            .collect();
    }
    cur
}

/// Class reached by a deterministic automaton after `w`, or `None` if `w`
/// is not a trace.
pub fn replay_class(a: &Tioa, w: &TimedWord) -> Option<Class> {
    let states = replay(a, w);
    let s = states.iter().next()?;
    Some(match s {
        ConcreteState::Bot => Class::Bot,
        ConcreteState::Top => Class::Top,
        ConcreteState::Plain { .. } => Class::Plain,
    })
}

/// Outcome of pairing a specification state with an implementation state
/// during refinement checking: ⊥ marks a violation, ⊤ a pruned branch.
fn refinement_table(spec: Class, imp: Class) -> Resolved {
    use Class::*;
    match (spec, imp) {
        (Plain, Bot) | (Top, Bot) | (Top, Plain) => Resolved::Bot,
        (Bot, _) | (_, Top) => Resolved::Top,
        (Plain, Plain) => Resolved::Pair,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MoveKind {
    Edge(usize),
    Completion,
}

/// One operand of a refinement check, with its regions embedded into the
/// joint clock space.
struct Side<'a> {
    a: &'a Tioa,
    invariant: Vec<Federation>,
    co_invariant: Vec<Federation>,
    guards: Vec<Federation>,
    resets: Vec<Vec<Clock>>,
}

impl<'a> Side<'a> {
    fn new(a: &'a Tioa, total: usize, offset: usize) -> Self {
        let n = a.clock_count();
        let embed = |cc| Federation::from_constraint(n, cc).embed(total, offset);
        Side {
            a,
            invariant: a.locations.iter().map(|l| embed(&l.invariant)).collect(),
            co_invariant: a.locations.iter().map(|l| embed(&l.co_invariant)).collect(),
            guards: a.edges.iter().map(|e| embed(&e.guard)).collect(),
            resets: a.edges.iter().map(|e| e.resets.iter().map(|c| c + offset).collect()).collect(),
        }
    }

    fn entry_class(&self, loc: usize, t: &ClockValuation) -> Class {
        if !self.invariant[loc].contains(t) {
            Class::Top
        } else if !self.co_invariant[loc].contains(t) {
            Class::Bot
        } else {
            Class::Plain
        }
    }

    /// Plain, ⊥ and ⊤ delay classes of `f`, a set closed under delay from
    /// plain entry points.
    fn delay_classes(&self, loc: usize, f: &Federation) -> [Federation; 3] {
        let inv = f.intersect(&self.invariant[loc]);
        let plain = inv.intersect(&self.co_invariant[loc]);
        let bot = f.intersect(&inv.subtract(&self.co_invariant[loc]).future());
        let top = f.subtract(&plain).subtract(&bot);
        [plain, bot, top]
    }

    /// Moves on `act` from `src`, each with the class entered and the source
    /// valuations taking it.
    fn moves(&self, loc: usize, act: &str, src: &Federation) -> Vec<(MoveKind, Class, Federation)> {
        let mut out = Vec::new();
        let mut enabled = Federation::empty(src.clocks());
        for (i, e) in self.a.edges_from(loc, act) {
            let g = src.intersect(&self.guards[i]);
            if g.is_empty() {
                continue;
            }
            enabled = enabled.union(&g);
            let rs = &self.resets[i];
            let post = g.reset(rs);
            let inv = post.intersect(&self.invariant[e.target]);
            let plain = inv.intersect(&self.co_invariant[e.target]);
            let err = inv.subtract(&self.co_invariant[e.target]);
            let magic = post.subtract(&inv);
            for (class, x) in [(Class::Plain, plain), (Class::Bot, err), (Class::Top, magic)] {
                if x.is_empty() {
                    continue;
                }
                let pre = x.reset_preimage(rs).intersect(&g);
                if !pre.is_empty() {
                    out.push((MoveKind::Edge(i), class, pre));
                }
            }
        }
        let disabled = src.subtract(&enabled);
        if !disabled.is_empty() {
            let class = if self.a.is_input(act) { Class::Bot } else { Class::Top };
            out.push((MoveKind::Completion, class, disabled));
        }
        out
    }

    fn target(&self, kind: MoveKind) -> usize {
        match kind {
            MoveKind::Edge(i) => self.a.edges[i].target,
            MoveKind::Completion => unreachable!("completions end in a sink"),
        }
    }

    fn move_resets(&self, kind: MoveKind) -> &[Clock] {
        match kind {
            MoveKind::Edge(i) => &self.resets[i],
            MoveKind::Completion => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PairMove {
    action: String,
    spec: (MoveKind, Class),
    imp: (MoveKind, Class),
}

/// The synchronous product of a specification and an implementation,
/// explored without building it.
struct RefinementPair<'a> {
    spec: Side<'a>,
    imp: Side<'a>,
    clocks: usize,
}

impl<'a> RefinementPair<'a> {
    fn new(spec: &'a Tioa, imp: &'a Tioa) -> Self {
        let clocks = spec.clock_count() + imp.clock_count();
        RefinementPair { spec: Side::new(spec, clocks, 0), imp: Side::new(imp, clocks, spec.clock_count()), clocks }
    }

    /// Valuations reachable by delaying from `entry` while both sides stay
    /// plain, and those where a delay first meets a violation.
    fn delay(&self, (ls, li): (usize, usize), entry: &Federation) -> (Federation, Federation) {
        let f = entry.future();
        let [sp, sb, st] = self.spec.delay_classes(ls, &f);
        let [ip, ib, it] = self.imp.delay_classes(li, &f);
        let bot = sp.union(&st).intersect(&ib).union(&st.intersect(&ip));
        let top = sb.union(&it);
        let bot_first = bot.subtract(&top.future());
        let plain = sp.intersect(&ip).subtract(&bot.union(&top).future());
        (plain, bot_first)
    }

    fn moves(&self, (ls, li): (usize, usize), act: &str, src: &Federation) -> Vec<(PairMove, Federation)> {
        let ms = self.spec.moves(ls, act, src);
        let mi = self.imp.moves(li, act, src);
        let mut out = Vec::new();
        for (ks, cs, rs) in &ms {
            for (ki, ci, ri) in &mi {
                let g = rs.intersect(ri);
                if !g.is_empty() {
                    out.push((PairMove { action: act.to_string(), spec: (*ks, *cs), imp: (*ki, *ci) }, g));
                }
            }
        }
        out
    }

    fn region(&self, locs: (usize, usize), m: &PairMove, src: &Federation) -> Federation {
        self.moves(locs, &m.action, src)
            .into_iter()
            .find(|(k, _)| k == m)
            .map_or_else(|| Federation::empty(self.clocks), |(_, g)| g)
    }

    fn resets(&self, m: &PairMove) -> Vec<Clock> {
        let mut rs = self.spec.move_resets(m.spec.0).to_vec();
        rs.extend_from_slice(self.imp.move_resets(m.imp.0));
        rs
    }

    fn targets(&self, m: &PairMove) -> (usize, usize) {
        (self.spec.target(m.spec.0), self.imp.target(m.imp.0))
    }

    /// A timed word along `path` from the initial pair, ending with `fin`
    /// (an action move, or a delay into a violation).
    fn concretize(&self, init: (usize, usize), path: &[PairMove], fin: Option<&PairMove>) -> TimedWord {
        let n = self.clocks;
        let zero = Federation::from_zone(Zone::zero(n));
        let mut locs = vec![init];
        let mut entries = vec![zero.clone()];
        let mut closed = vec![self.delay(init, &zero).0];
        for m in path {
            let j = locs.len() - 1;
            let entry = self.region(locs[j], m, &closed[j]).reset(&self.resets(m));
            let next = self.targets(m);
            closed.push(self.delay(next, &entry).0);
            entries.push(entry);
            locs.push(next);
        }
        let k = path.len();
        let bot_first = self.delay(locs[k], &entries[k]).1;
        let target = match fin {
            Some(m) => self.region(locs[k], m, &closed[k]),
            None => closed[k].intersect(&bot_first.past()),
        };
        let mut good = vec![Federation::empty(n); k + 1];
        good[k] = target;
        for j in (1..=k).rev() {
            let m = &path[j - 1];
            let entry_good = entries[j].intersect(&good[j].past());
            good[j - 1] = self.region(locs[j - 1], m, &closed[j - 1]).intersect(&entry_good.reset_preimage(&self.resets(m)));
        }
        let mut word = TimedWord::empty();
        let mut t = ClockValuation::zero(n);
        for j in 0..=k {
            let d = delay_into(&t, &good[j]).expect("witness path is feasible");
            word.push_delay(d);
            t = t.delay(d);
            if j < k {
                word.push_action(path[j].action.clone());
                t = t.reset(&self.resets(&path[j]));
            }
        }
        match fin {
            Some(m) => word.push_action(m.action.clone()),
            None => word.push_delay(delay_into(&t, &bot_first).expect("violation is reachable")),
        }
        word
    }
}

struct PairNode {
    locs: (usize, usize),
    zone: Zone,
    parent: Option<usize>,
    via: Option<PairMove>,
    depth: usize,
}

/// Searches the pair for a reachable violation; both operands must be
/// deterministic.
fn refinement_search(spec: &Tioa, imp: &Tioa, budget: usize) -> Verdict {
    let pair = RefinementPair::new(spec, imp);
    let norm = Normalizer::joint(&[spec, imp]);
    let mut stats = Stats::default();
    let verdict = |outcome, witness, stats| Verdict { outcome, witness, stats, oracle_backed: false };
    let init = (spec.initial, imp.initial);
    let origin = ClockValuation::zero(pair.clocks);
    match refinement_table(pair.spec.entry_class(init.0, &origin), pair.imp.entry_class(init.1, &origin)) {
        Resolved::Bot => return verdict(Outcome::Fails, Some(TimedWord::empty()), stats),
        Resolved::Top => return verdict(Outcome::Holds, None, stats),
        _ => {}
    }
    let mut nodes: Vec<PairNode> = Vec::new();
    let mut seen: HashMap<(usize, usize), Vec<Zone>> = HashMap::new();
    let mut queue = VecDeque::new();
    // Closes an entry under delay; true when a delay reaches a violation.
    let mut enter = |locs: (usize, usize), entry: &Federation, parent: Option<usize>, via: Option<PairMove>, nodes: &mut Vec<PairNode>, queue: &mut VecDeque<usize>| -> bool {
        let depth = parent.map_or(0, |p| nodes[p].depth + 1);
        let (plain, bot_first) = pair.delay(locs, entry);
        if !bot_first.is_empty() {
            return true;
        }
        for z in plain.zones() {
            for z in norm.normalize(z) {
                let known = seen.entry(locs).or_default();
                if known.iter().any(|k| k.includes(&z)) {
                    continue;
                }
                known.retain(|k| !z.includes(k));
                known.push(z.clone());
                nodes.push(PairNode { locs, zone: z, parent, via: via.clone(), depth });
                queue.push_back(nodes.len() - 1);
            }
        }
        false
    };
    let zero = Federation::from_zone(Zone::zero(pair.clocks));
    // The node reached last, the move into it, and the violating move.
    let mut found: Option<(Option<usize>, Option<PairMove>, Option<PairMove>)> = None;
    if enter(init, &zero, None, None, &mut nodes, &mut queue) {
        found = Some((None, None, None));
    }
    let actions = spec.alphabet();
    while found.is_none() {
        let Some(n) = queue.pop_front() else { break };
        stats.states += 1;
        stats.depth = stats.depth.max(nodes[n].depth);
        if stats.states > budget {
            return verdict(Outcome::BoundExceeded, None, stats);
        }
        let locs = nodes[n].locs;
        let src = Federation::from_zone(nodes[n].zone.clone());
        'actions: for act in &actions {
            for (m, g) in pair.moves(locs, act, &src) {
                match refinement_table(m.spec.1, m.imp.1) {
                    Resolved::Bot => {
                        found = Some((Some(n), None, Some(m)));
                        break 'actions;
                    }
                    Resolved::Pair => {
                        let entry = g.reset(&pair.resets(&m));
                        if enter(pair.targets(&m), &entry, Some(n), Some(m.clone()), &mut nodes, &mut queue) {
                            found = Some((Some(n), Some(m), None));
                            break 'actions;
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    let Some((last, via, fin)) = found else {
        return verdict(Outcome::Holds, None, stats);
    };
    let mut path: Vec<PairMove> = via.into_iter().collect();
    let mut cur = last;
    while let Some(c) = cur {
        if let Some(m) = &nodes[c].via {
            path.push(m.clone());
        }
        cur = nodes[c].parent;
    }
    path.reverse();
    let word = pair.concretize(init, &path, fin.as_ref());
    verdict(Outcome::Fails, Some(word), stats)
}

fn is_violation(spec: Option<Class>, imp: Option<Class>) -> bool {
    matches!(
        (spec, imp),
        (Some(Class::Plain), Some(Class::Bot)) | (Some(Class::Top), Some(Class::Bot)) | (Some(Class::Top), Some(Class::Plain))
    ) || (spec.is_none() && imp.is_some())
}

/// Does `imp` refine `spec` (`spec ⊑ imp`)?
pub fn refines(spec: &Tioa, imp: &Tioa, config: &Config) -> Result<Verdict, AnalysisError> {
    if spec.inputs != imp.inputs || spec.outputs != imp.outputs {
        return Err(AnalysisError::AlphabetMismatch);
    }
    if operators::check_deterministic(spec).is_err() || operators::check_deterministic(imp).is_err() {
        return Ok(oracle::refines_digitized(spec, imp, &config.bounds));
    }
    let v = refinement_search(spec, imp, config.budget);
    if let Some(w) = &v.witness {
        if !is_violation(replay_class(spec, w), replay_class(imp, w)) {
            return Err(AnalysisError::BadWitness(w.clone()));
        }
    }
    Ok(v)
}

/// Mutual refinement.
pub fn equivalent(a: &Tioa, b: &Tioa, config: &Config) -> Result<Verdict, AnalysisError> {
    let ab = refines(a, b, config)?;
    if !ab.holds() {
        return Ok(ab);
    }
    let ba = refines(b, a, config)?;
    if !ba.holds() {
        return Ok(ba);
    }
    Ok(Verdict {
        outcome: Outcome::Holds,
        witness: None,
        stats: Stats { states: ab.stats.states + ba.stats.states, depth: ab.stats.depth.max(ba.stats.depth) },
        oracle_backed: ab.oracle_backed || ba.oracle_backed,
    })
}

/// Whether `w` leads `a` to ⊥ along some run.
pub fn replays_to_bot(a: &Tioa, w: &TimedWord) -> bool {
    replay(a, w).contains(&ConcreteState::Bot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ClockConstraint as CC;
    use crate::tioa::{Edge, Location};

    fn controller() -> Tioa {
        let mut a = Tioa::new("c");
        a.clocks = vec!["y".into()];
        a.inputs.insert("go".into());
        a.outputs.insert("done".into());
        a.locations.push(Location::new("idle"));
        a.locations.push(Location { name: "busy".into(), invariant: CC::True, co_invariant: CC::le(0, 10) });
        a.edges.push(Edge { source: 0, guard: CC::True, action: "go".into(), resets: vec![0], target: 1 });
        a.edges.push(Edge { source: 1, guard: CC::True, action: "go".into(), resets: vec![], target: 0 });
        a
    }

    #[test]
    fn timeout_is_found_and_replays() {
        let a = controller();
        let v = reach_bot(&a, DEFAULT_BUDGET);
        assert!(v.fails());
        let w = v.witness.unwrap();
        assert!(replays_to_bot(&a, &w), "{w}");
        assert_eq!(w.action_count(), 1);
    }

    #[test]
    fn input_completion_is_not_an_error() {
        let mut a = controller();
        a.locations[1].co_invariant = CC::True;
        a.edges.pop();
        assert!(reach_bot(&a, DEFAULT_BUDGET).holds());
    }

    #[test]
    fn reflexive() {
        let a = controller();
        assert!(refines(&a, &a, &Config::default()).unwrap().holds());
    }

    #[test]
    fn tighter_timeout_is_not_a_refinement() {
        let spec = controller();
        let mut imp = controller();
        imp.locations[1].co_invariant = CC::le(0, 5);
        let v = refines(&spec, &imp, &Config::default()).unwrap();
        assert!(v.fails());
        let w = v.witness.unwrap();
        assert_eq!(replay_class(&imp, &w), Some(Class::Bot));
        assert_eq!(replay_class(&spec, &w), Some(Class::Plain));
        // The other direction holds: a later time-out is more permissive.
        assert!(refines(&imp, &spec, &Config::default()).unwrap().holds());
    }
}
