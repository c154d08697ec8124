//! Strategies over digitized systems, and the game a component plays
//! against its environment with a coin breaking ties.
//!
//! A delay move is a single grid step. Strategies are truncated at a fixed
//! number of moves; plain nodes at that depth form the frontier and propose
//! nothing. All closures are taken inside finite enumerated universes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::Outcome;
use crate::constraint::Q;
use crate::operators::{self, resolve, Class, Operator, Resolved};
use crate::oracle::{self, Bounds, Digitized, Label, Transition, BOT, TOP};
use crate::tioa::Tioa;
use crate::word::TimedWord;

pub const DEFAULT_STRATEGY_BUDGET: usize = 50_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("more than {0} strategies")]
    Budget(usize),
    #[error("strategies are not affine")]
    NotAffine,
    #[error("alphabets do not fit")]
    Alphabet,
    #[error("system must be deterministic")]
    Nondeterministic,
    #[error(transparent)]
    Operator(#[from] operators::OperatorError),
}

/// A node of a strategy tree. Children are keyed by the letter taken.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub class: Class,
    pub children: BTreeMap<Label, Node>,
}

impl Node {
    fn leaf(class: Class) -> Self {
        Node { class, children: BTreeMap::new() }
    }
}

/// A deterministic tree offering every input and one component move at
/// each plain node. Equality is equality of trees, i.e. isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub delta: Q,
    pub depth: usize,
    pub root: Node,
}

fn label_name(l: &Label) -> String {
    match l {
        Label::Tick => "δ".into(),
        Label::Action(a) => a.clone(),
    }
}

fn class_name(c: Class) -> &'static str {
    match c {
        Class::Top => "top",
        Class::Plain => "plain",
        Class::Bot => "bot",
    }
}

impl Strategy {
    fn same_alphabet(&self, other: &Strategy) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs && self.delta == other.delta && self.depth == other.depth
    }

    /// The component move at `n`, or `None` at the frontier and at sinks.
    pub fn move_of(&self, n: &Node) -> Option<Label> {
        if n.class != Class::Plain {
            return None;
        }
        n.children.keys().find(|l| !matches!(l, Label::Action(a) if self.inputs.contains(a))).cloned()
    }

    pub fn node_at(&self, path: &[Label]) -> Option<&Node> {
        let mut n = &self.root;
        for l in path {
            n = n.children.get(l)?;
        }
        Some(n)
    }

    pub fn move_at(&self, path: &[Label]) -> Option<Label> {
        self.move_of(self.node_at(path)?)
    }

    pub fn class_at(&self, path: &[Label]) -> Option<Class> {
        self.node_at(path).map(|n| n.class)
    }

    /// Every node with the letters leading to it, in depth-first order.
    pub fn nodes(&self) -> Vec<(Vec<Label>, &Node)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), &self.root)];
        while let Some((p, n)) = stack.pop() {
            for (l, c) in n.children.iter().rev() {
                let mut q = p.clone();
                q.push(l.clone());
                stack.push((q, c));
            }
            out.push((p, n));
        }
        out
    }

    /// The timed word spelled by `path`.
    pub fn word(&self, path: &[Label]) -> TimedWord {
        let mut w = TimedWord::empty();
        for l in path {
            match l {
                Label::Tick => w.push_delay(self.delta),
                Label::Action(a) => w.push_action(a.clone()),
            }
        }
        w
    }

    /// Violations of the tree and move conditions.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (p, n) in self.nodes() {
            let at = self.word(&p);
            match n.class {
                Class::Bot | Class::Top if !n.children.is_empty() => out.push(format!("sink with children at {at}")),
                Class::Plain if p.len() < self.depth => {
                    for i in &self.inputs {
                        if !n.children.contains_key(&Label::Action(i.clone())) {
                            out.push(format!("input {i} missing at {at}"));
                        }
                    }
                    let moves = n.children.len() - self.inputs.iter().filter(|i| n.children.contains_key(&Label::Action((*i).clone()))).count();
                    if moves != 1 {
                        out.push(format!("{moves} component moves at {at}"));
                    }
                    for l in n.children.keys() {
                        if let Label::Action(a) = l {
                            if !self.inputs.contains(a) && !self.outputs.contains(a) {
                                out.push(format!("unknown action {a} at {at}"));
                            }
                        }
                    }
                }
                Class::Plain if p.len() > self.depth || (p.len() == self.depth && !n.children.is_empty()) => {
                    out.push(format!("node beyond depth at {at}"));
                }
                _ => {}
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        fn node(n: &Node) -> Value {
            let children: serde_json::Map<String, Value> = n.children.iter().map(|(l, c)| (label_name(l), node(c))).collect();
            if children.is_empty() {
                json!({ "class": class_name(n.class) })
            } else {
                json!({ "class": class_name(n.class), "children": children })
            }
        }
        json!({
            "inputs": self.inputs,
            "outputs": self.outputs,
            "delta": self.delta.to_string(),
            "depth": self.depth,
            "root": node(&self.root),
        })
    }
}

type Memo = HashMap<(usize, usize), Rc<Vec<Node>>>;

/// All combinations of one option per slot.
fn product<K: Clone + Ord>(slots: &[(K, Rc<Vec<Node>>)], budget: usize) -> Result<Vec<BTreeMap<K, Node>>, GameError> {
    let mut out = vec![BTreeMap::new()];
    for (k, opts) in slots {
        if out.len().saturating_mul(opts.len()) > budget {
            return Err(GameError::Budget(budget));
        }
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for m in &out {
            for o in opts.iter() {
                let mut m = m.clone();
                m.insert(k.clone(), o.clone());
                next.push(m);
            }
        }
        out = next;
    }
    Ok(out)
}

fn unfold(d: &Digitized, s: usize, remaining: usize, memo: &mut Memo, budget: usize) -> Result<Rc<Vec<Node>>, GameError> {
    if let Some(r) = memo.get(&(s, remaining)) {
        return Ok(r.clone());
    }
    let result = match d.class(s) {
        c @ (Class::Bot | Class::Top) => vec![Node::leaf(c)],
        Class::Plain if remaining == 0 => vec![Node::leaf(Class::Plain)],
        Class::Plain => {
            let options = |l: &Label, memo: &mut Memo| -> Result<Rc<Vec<Node>>, GameError> {
                let mut set = BTreeSet::new();
                for t in d.successors(s, l) {
                    set.extend(unfold(d, t.target, remaining - 1, memo, budget)?.iter().cloned());
                }
                Ok(Rc::new(set.into_iter().collect()))
            };
            let mut inputs = Vec::new();
            for i in &d.inputs {
                let l = Label::Action(i.clone());
                let mut opts = options(&l, memo)?;
                if opts.is_empty() {
                    opts = Rc::new(vec![Node::leaf(Class::Bot)]);
                }
                inputs.push((l, opts));
            }
            let moves = std::iter::once(Label::Tick).chain(d.outputs.iter().cloned().map(Label::Action));
            let mut out = BTreeSet::new();
            for m in moves {
                let opts = options(&m, memo)?;
                if opts.is_empty() {
                    continue;
                }
                let mut slots = inputs.clone();
                slots.push((m, opts));
                for children in product(&slots, budget)? {
                    out.insert(Node { class: Class::Plain, children });
                    if out.len() > budget {
                        return Err(GameError::Budget(budget));
                    }
                }
            }
            if out.is_empty() {
                out.insert(Node::leaf(Class::Plain));
            }
            out.into_iter().collect()
        }
    };
    let r = Rc::new(result);
    memo.insert((s, remaining), r.clone());
    Ok(r)
}

/// Every strategy contained in the completed system `d`, up to `depth`
/// moves, one per isomorphism class.
pub fn enumerate_strategies(d: &Digitized, depth: usize, budget: usize) -> Result<BTreeSet<Strategy>, GameError> {
    let mut memo = Memo::new();
    let roots = unfold(d, d.initial, depth, &mut memo, budget)?;
    Ok(roots
        .iter()
        .map(|root| Strategy { inputs: d.inputs.clone(), outputs: d.outputs.clone(), delta: d.delta, depth, root: root.clone() })
        .collect())
}

/// Unit-step digitization deep enough for strategies of `depth` moves.
pub fn game_bounds(depth: usize) -> Bounds {
    Bounds::unit(depth as i64, depth)
}

pub fn strategies_of(a: &Tioa, depth: usize, budget: usize) -> Result<BTreeSet<Strategy>, GameError> {
    enumerate_strategies(&oracle::digitize(a, &game_bounds(depth)), depth, budget)
}

/// Equal traces lead to equal moves.
pub fn is_affine(g1: &Strategy, g2: &Strategy) -> bool {
    fn go(g1: &Strategy, a: &Node, g2: &Strategy, b: &Node) -> bool {
        if a.class != Class::Plain || b.class != Class::Plain {
            return true;
        }
        g1.move_of(a) == g2.move_of(b)
            && a.children.iter().all(|(l, ca)| b.children.get(l).is_none_or(|cb| go(g1, ca, g2, cb)))
    }
    g1.same_alphabet(g2) && go(g1, &g1.root, g2, &g2.root)
}

/// Whether walking `g` along `path` meets a node of class `c` (⊤ persists
/// under delays, ⊥ under everything).
fn reaches_on_prefix(g: &Strategy, path: &[Label], c: Class) -> bool {
    let mut n = &g.root;
    for l in path {
        if n.class == c {
            return true;
        }
        match n.children.get(l) {
            Some(next) => n = next,
            None if n.class == Class::Bot => return false,
            None if n.class == Class::Top && *l == Label::Tick => {}
            None => return false,
        }
    }
    n.class == c
}

/// `g1 ≼ g2`: `g1` reaches ⊥ no later and ⊤ no earlier than `g2`.
pub fn more_aggressive(g1: &Strategy, g2: &Strategy) -> Result<bool, GameError> {
    if !is_affine(g1, g2) {
        return Err(GameError::NotAffine);
    }
    let bot_ok = g2.nodes().iter().filter(|(_, n)| n.class == Class::Bot).all(|(p, _)| reaches_on_prefix(g1, p, Class::Bot));
    let top_ok = g1.nodes().iter().filter(|(_, n)| n.class == Class::Top).all(|(p, _)| reaches_on_prefix(g2, p, Class::Top));
    Ok(bot_ok && top_ok)
}

fn join(op: Operator, a: &Node, b: &Node) -> Node {
    match resolve(op, a.class, b.class) {
        Resolved::Bot => Node::leaf(Class::Bot),
        Resolved::Top => Node::leaf(Class::Top),
        Resolved::Left => a.clone(),
        Resolved::Right => b.clone(),
        Resolved::Pair => Node {
            class: Class::Plain,
            children: a.children.iter().filter_map(|(l, ca)| b.children.get(l).map(|cb| (l.clone(), join(op, ca, cb)))).collect(),
        },
    }
}

/// `g1 + g2`, the node-wise disjunction of affine strategies.
pub fn strategy_disjunction(g1: &Strategy, g2: &Strategy) -> Result<Strategy, GameError> {
    if !is_affine(g1, g2) {
        return Err(GameError::NotAffine);
    }
    Ok(Strategy { root: join(Operator::Disjunction, &g1.root, &g2.root), ..g1.clone() })
}

/// `g1 & g2`, the node-wise conjunction of affine strategies.
pub fn strategy_conjunction(g1: &Strategy, g2: &Strategy) -> Result<Strategy, GameError> {
    if !is_affine(g1, g2) {
        return Err(GameError::NotAffine);
    }
    Ok(Strategy { root: join(Operator::Conjunction, &g1.root, &g2.root), ..g1.clone() })
}

/// Least superset closed under `+` of affine pairs.
pub fn disjunction_closure(s: &BTreeSet<Strategy>, budget: usize) -> Result<BTreeSet<Strategy>, GameError> {
    let mut all: Vec<Strategy> = s.iter().cloned().collect();
    let mut set = s.clone();
    let mut i = 0;
    while i < all.len() {
        for j in 0..i {
            if !is_affine(&all[i], &all[j]) {
                continue;
            }
            let g = strategy_disjunction(&all[i], &all[j])?;
            if set.insert(g.clone()) {
                all.push(g);
                if all.len() > budget {
                    return Err(GameError::Budget(budget));
                }
            }
        }
        i += 1;
    }
    Ok(set)
}

/// Members of `universe` that some member of `s` is more aggressive than.
pub fn upward_closure(s: &BTreeSet<Strategy>, universe: &BTreeSet<Strategy>) -> BTreeSet<Strategy> {
    universe
        .iter()
        .filter(|u| s.contains(*u) || s.iter().any(|g| is_affine(g, u) && more_aggressive(g, u) == Ok(true)))
        .cloned()
        .collect()
}

/// `[P]+` relative to `universe`: upward closure, then disjunction closure.
pub fn semantics_within(stg: &BTreeSet<Strategy>, universe: &BTreeSet<Strategy>, budget: usize) -> Result<BTreeSet<Strategy>, GameError> {
    disjunction_closure(&upward_closure(stg, universe), budget)
}

/// A coin: which proposed action prevails at a tie, by the trace so far.
/// `false` favours the first strategy of a composition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CoinStrategy {
    pub table: BTreeMap<TimedWord, bool>,
    pub default: bool,
}

impl CoinStrategy {
    pub fn constant(b: bool) -> Self {
        CoinStrategy { table: BTreeMap::new(), default: b }
    }

    pub fn toss(&self, w: &TimedWord) -> bool {
        self.table.get(w).copied().unwrap_or(self.default)
    }
}

struct Composer<'a> {
    g0: &'a Strategy,
    g1: &'a Strategy,
    inputs: BTreeSet<String>,
    outputs: BTreeSet<String>,
    depth: usize,
    budget: usize,
}

impl<'a> Composer<'a> {
    fn new(g0: &'a Strategy, g1: &'a Strategy, budget: usize) -> Result<Self, GameError> {
        if !g0.outputs.is_disjoint(&g1.outputs) || g0.delta != g1.delta {
            return Err(GameError::Alphabet);
        }
        let outputs: BTreeSet<String> = g0.outputs.union(&g1.outputs).cloned().collect();
        let inputs = g0.inputs.union(&g1.inputs).filter(|a| !outputs.contains(*a)).cloned().collect();
        Ok(Composer { g0, g1, inputs, outputs, depth: g0.depth.max(g1.depth), budget })
    }

    fn knows(g: &Strategy, l: &Label) -> bool {
        match l {
            Label::Tick => true,
            Label::Action(a) => g.inputs.contains(a) || g.outputs.contains(a),
        }
    }

    /// The pair of nodes after `l`, or `None` when a side is truncated.
    fn step<'n>(&self, a: &'n Node, b: &'n Node, l: &Label) -> Option<(&'n Node, &'n Node)> {
        let a2 = if Self::knows(self.g0, l) { a.children.get(l)? } else { a };
        let b2 = if Self::knows(self.g1, l) { b.children.get(l)? } else { b };
        Some((a2, b2))
    }

    /// All composite trees from `(a, b)`, one per way of resolving the ties
    /// met; `coin` fixes the ties instead when given.
    fn go(&self, a: &Node, b: &Node, path: &mut Vec<Label>, coin: Option<&CoinStrategy>) -> Result<Vec<Node>, GameError> {
        match resolve(Operator::Parallel, a.class, b.class) {
            Resolved::Bot => return Ok(vec![Node::leaf(Class::Bot)]),
            Resolved::Top => return Ok(vec![Node::leaf(Class::Top)]),
            _ => {}
        }
        let (m0, m1) = (self.g0.move_of(a), self.g1.move_of(b));
        let (Some(m0), Some(m1)) = (m0, m1) else { return Ok(vec![Node::leaf(Class::Plain)]) };
        if path.len() >= self.depth {
            return Ok(vec![Node::leaf(Class::Plain)]);
        }
        let prevailing: Vec<Label> = match (&m0, &m1) {
            (Label::Tick, Label::Tick) => vec![Label::Tick],
            (Label::Action(_), Label::Tick) => vec![m0.clone()],
            (Label::Tick, Label::Action(_)) => vec![m1.clone()],
            _ => match coin {
                Some(h) => vec![if h.toss(&self.g0.word(path)) { m1.clone() } else { m0.clone() }],
                None => vec![m0.clone(), m1.clone()],
            },
        };
        let mut input_slots = Vec::new();
        for i in &self.inputs {
            let l = Label::Action(i.clone());
            input_slots.push((l.clone(), Rc::new(self.child(a, b, &l, path, coin)?)));
        }
        let mut out = Vec::new();
        for m in prevailing {
            let mut slots = input_slots.clone();
            slots.push((m.clone(), Rc::new(self.child(a, b, &m, path, coin)?)));
            for children in product(&slots, self.budget)? {
                out.push(Node { class: Class::Plain, children });
            }
        }
        Ok(out)
    }

    fn child(&self, a: &Node, b: &Node, l: &Label, path: &mut Vec<Label>, coin: Option<&CoinStrategy>) -> Result<Vec<Node>, GameError> {
        let Some((a2, b2)) = self.step(a, b, l) else { return Ok(vec![Node::leaf(Class::Plain)]) };
        path.push(l.clone());
        let r = self.go(a2, b2, path, coin);
        path.pop();
        r
    }

    fn wrap(&self, root: Node) -> Strategy {
        Strategy { inputs: self.inputs.clone(), outputs: self.outputs.clone(), delta: self.g0.delta, depth: self.depth, root }
    }
}

/// `g0 ∥h g1`: a tree for open alphabets, a simple path for complementary
/// ones. Truncated at the larger depth.
pub fn compose_strategies(g0: &Strategy, g1: &Strategy, h: &CoinStrategy) -> Result<Strategy, GameError> {
    let c = Composer::new(g0, g1, DEFAULT_STRATEGY_BUDGET)?;
    let mut roots = c.go(&g0.root, &g1.root, &mut Vec::new(), Some(h))?;
    Ok(c.wrap(roots.pop().expect("a fixed coin yields one tree")))
}

/// `g0 ∥h g1` for every coin `h`.
pub fn compose_all_coins(g0: &Strategy, g1: &Strategy, budget: usize) -> Result<BTreeSet<Strategy>, GameError> {
    let c = Composer::new(g0, g1, budget)?;
    Ok(c.go(&g0.root, &g1.root, &mut Vec::new(), None)?.into_iter().map(|r| c.wrap(r)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    Bot,
    Top,
    Frontier,
}

/// One play of a component against its environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Play {
    pub word: TimedWord,
    pub terminal: Terminal,
}

/// Plays `gc` against `ge`, whose inputs are the outputs of `gc` and vice
/// versa.
pub fn play(gc: &Strategy, ge: &Strategy, h: &CoinStrategy) -> Result<Play, GameError> {
    if gc.inputs != ge.outputs || gc.outputs != ge.inputs {
        return Err(GameError::Alphabet);
    }
    let g = compose_strategies(gc, ge, h)?;
    let mut path = Vec::new();
    let mut n = &g.root;
    while let Some((l, c)) = n.children.iter().next() {
        path.push(l.clone());
        n = c;
    }
    let terminal = match n.class {
        Class::Bot => Terminal::Bot,
        Class::Top => Terminal::Top,
        Class::Plain => Terminal::Frontier,
    };
    Ok(Play { word: g.word(&path), terminal })
}

pub fn is_bot_free(g: &Strategy) -> bool {
    g.nodes().iter().all(|(_, n)| n.class != Class::Bot)
}

/// Words of the composition of `g0` with `g1` where both propose actions.
fn tie_points(g0: &Strategy, g1: &Strategy) -> Result<BTreeSet<TimedWord>, GameError> {
    let c = Composer::new(g0, g1, DEFAULT_STRATEGY_BUDGET)?;
    let mut out = BTreeSet::new();
    let mut stack = vec![(&g0.root, &g1.root, Vec::new())];
    while let Some((a, b, path)) = stack.pop() {
        if resolve(Operator::Parallel, a.class, b.class) != Resolved::Pair || path.len() >= c.depth {
            continue;
        }
        let (Some(m0), Some(m1)) = (g0.move_of(a), g1.move_of(b)) else { continue };
        if m0 != Label::Tick && m1 != Label::Tick {
            out.insert(g0.word(&path));
        }
        let labels = c.inputs.iter().cloned().map(Label::Action).chain([m0, m1]);
        for l in labels {
            if let Some((a2, b2)) = c.step(a, b, &l) {
                let mut p = path.clone();
                p.push(l);
                stack.push((a2, b2, p));
            }
        }
    }
    Ok(out)
}

/// Every coin distinguishable on `points`.
fn coins(points: &BTreeSet<TimedWord>, limit: usize) -> Vec<CoinStrategy> {
    let points: Vec<&TimedWord> = points.iter().take(limit).collect();
    (0..1u64 << points.len())
        .map(|bits| CoinStrategy { table: points.iter().enumerate().map(|(i, w)| ((*w).clone(), bits >> i & 1 == 1)).collect(), default: false })
        .collect()
}

/// Mirror of a deterministic digitized system: inputs and outputs swap, and
/// so do ⊥ and ⊤.
pub fn mirror_digitized(d: &Digitized) -> Result<Digitized, GameError> {
    if !d.is_deterministic() {
        return Err(GameError::Nondeterministic);
    }
    let swap = |s: usize| match s {
        BOT => TOP,
        TOP => BOT,
        s => s,
    };
    let mut out = d.clone();
    out.inputs = d.outputs.clone();
    out.outputs = d.inputs.clone();
    out.initial = swap(d.initial);
    for (s, m) in d.transitions.iter().enumerate().skip(2) {
        out.transitions[s] = m.iter().map(|(l, ts)| (l.clone(), ts.iter().map(|t| Transition { target: swap(t.target), ..*t }).collect())).collect();
    }
    out.transitions[BOT] = d.labels().into_iter().map(|l| (l, vec![Transition { target: BOT, completion: false }])).collect();
    out.transitions[TOP] = [(Label::Tick, vec![Transition { target: TOP, completion: false }])].into();
    Ok(out)
}

/// Does every word of at most `depth` letters respect `spec ⊑ imp`?
pub fn refines_within(spec: &Tioa, imp: &Tioa, depth: usize) -> bool {
    let b = game_bounds(depth);
    let s = oracle::determinize_explicit(&oracle::digitize(spec, &b));
    let i = oracle::determinize_explicit(&oracle::digitize(imp, &b));
    let mut stack = vec![(s.initial, i.initial, 0)];
    while let Some((ps, pi, k)) = stack.pop() {
        match (s.class(ps), i.class(pi)) {
            (Class::Plain, Class::Bot) | (Class::Top, Class::Bot) | (Class::Top, Class::Plain) => return false,
            (Class::Bot, _) | (_, Class::Top) => continue,
            _ => {}
        }
        if k == depth {
            continue;
        }
        for l in i.labels() {
            let Some(ti) = i.successors(pi, &l).first() else { continue };
            match s.successors(ps, &l).first() {
                Some(ts) => stack.push((ts.target, ti.target, k + 1)),
                None => return false,
            }
        }
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaResult {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
    /// A strategy on which the two sides differ.
    pub counterexample: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub depth: usize,
    pub results: Vec<LemmaResult>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|r| r.outcome == Outcome::Holds)
    }

    pub fn get(&self, name: &str) -> Option<&LemmaResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

fn holds(b: bool) -> Outcome {
    if b {
        Outcome::Holds
    } else {
        Outcome::Fails
    }
}

/// A lemma whose universe outgrows the budget is reported, not failed.
fn bounded(name: &str, r: Result<LemmaResult, GameError>) -> Result<LemmaResult, GameError> {
    match r {
        Err(GameError::Budget(n)) => Ok(LemmaResult {
            name: name.into(),
            outcome: Outcome::BoundExceeded,
            detail: format!("more than {n} strategies"),
            counterexample: None,
        }),
        r => r,
    }
}

fn compare(name: &str, lhs: &BTreeSet<Strategy>, rhs: &BTreeSet<Strategy>) -> LemmaResult {
    let diff = lhs.symmetric_difference(rhs).next();
    LemmaResult {
        name: name.into(),
        outcome: if diff.is_none() { Outcome::Holds } else { Outcome::Fails },
        detail: format!("{} vs {} strategies", lhs.len(), rhs.len()),
        counterexample: diff.map(Strategy::to_json),
    }
}

fn union<'a>(sets: impl IntoIterator<Item = &'a BTreeSet<Strategy>>) -> BTreeSet<Strategy> {
    sets.into_iter().flatten().cloned().collect()
}

/// Bounded checks of the strategy-semantics results on `p` and `q`; only
/// the results whose alphabet conditions `p` and `q` meet are reported.
pub fn check_lemmas(p: &Tioa, q: &Tioa, depth: usize, budget: usize) -> Result<LemmaReport, GameError> {
    let mut results = Vec::new();
    let sp = strategies_of(p, depth, budget)?;
    let sq = strategies_of(q, depth, budget)?;
    if p.inputs == q.inputs && p.outputs == q.outputs {
        results.push(bounded("theorem-1", theorem_1(p, q, &sp, &sq, depth, budget))?);
        results.push(bounded("lemma-1", lemma_1(&sp, q, depth, budget))?);
        for (op, name) in [(Operator::Disjunction, "lemma-3"), (Operator::Conjunction, "lemma-4")] {
            if let Ok(r) = operators::compose(op, p, q) {
                results.push(bounded(name, lattice_lemma(op, name, &sp, &sq, &r, depth, budget))?);
            }
        }
        if let Ok(mp) = operators::mirror(p) {
            results.push(bounded("lemma-6", lemma_6(p, &mp, q, depth, budget))?);
        }
    }
    if p.outputs.is_disjoint(&q.outputs) {
        if let Ok(r) = operators::compose(Operator::Parallel, p, q) {
            results.push(bounded("lemma-2", lemma_2(&sp, &sq, &r, depth, budget))?);
        }
    }
    if let Ok(r) = operators::compose(Operator::Quotient, p, q) {
        results.push(bounded("lemma-5", lemma_5(&sp, &sq, &r, depth, budget))?);
    }
    Ok(LemmaReport { depth, results })
}

/// Refinement on bounded words agrees with containment of the closed
/// strategy sets, in both directions.
fn theorem_1(p: &Tioa, q: &Tioa, sp: &BTreeSet<Strategy>, sq: &BTreeSet<Strategy>, depth: usize, budget: usize) -> Result<LemmaResult, GameError> {
    let u = disjunction_closure(&union([sp, sq]), budget)?;
    let (semp, semq) = (semantics_within(sp, &u, budget)?, semantics_within(sq, &u, budget)?);
    let mut ok = true;
    let mut detail = Vec::new();
    let mut counterexample = None;
    for (a, b, sa, sb, name) in [(p, q, &semp, &semq, "p ⊑ q"), (q, p, &semq, &semp, "q ⊑ p")] {
        let by_traces = refines_within(a, b, depth);
        let missing = sb.difference(sa).next();
        if by_traces != missing.is_none() {
            ok = false;
            counterexample = counterexample.or(missing.map(Strategy::to_json));
        }
        detail.push(format!("{name}: traces {by_traces}, strategies {}", missing.is_none()));
    }
    Ok(LemmaResult { name: "theorem-1".into(), outcome: holds(ok), detail: detail.join("; "), counterexample })
}

fn lattice_lemma(op: Operator, name: &str, sp: &BTreeSet<Strategy>, sq: &BTreeSet<Strategy>, r: &Tioa, depth: usize, budget: usize) -> Result<LemmaResult, GameError> {
    let sr = strategies_of(r, depth, budget)?;
    let u = disjunction_closure(&union([sp, sq, &sr]), budget)?;
    let semr = semantics_within(&sr, &u, budget)?;
    let (semp, semq) = (semantics_within(sp, &u, budget)?, semantics_within(sq, &u, budget)?);
    let rhs = if op == Operator::Disjunction {
        disjunction_closure(&union([&semp, &semq]), budget)?
    } else {
        semp.intersection(&semq).cloned().collect()
    };
    Ok(compare(name, &semr, &rhs))
}

/// Affine strategies of `p` are jointly ⊥-free against an environment iff
/// their disjunction is, for every environment drawn from the mirror of `q`
/// and every coin.
fn lemma_1(sp: &BTreeSet<Strategy>, q: &Tioa, depth: usize, budget: usize) -> Result<LemmaResult, GameError> {
    let dq = oracle::determinize_explicit(&oracle::digitize(q, &game_bounds(depth)));
    let envs = enumerate_strategies(&mirror_digitized(&dq)?, depth, budget)?;
    let all: Vec<&Strategy> = sp.iter().collect();
    let mut checked = 0;
    for (i, g0) in all.iter().enumerate() {
        for g1 in &all[i..] {
            if !is_affine(g0, g1) {
                continue;
            }
            let sum = strategy_disjunction(g0, g1)?;
            for e in &envs {
                let mut points = tie_points(g0, e)?;
                points.extend(tie_points(g1, e)?);
                points.extend(tie_points(&sum, e)?);
                for h in coins(&points, 10) {
                    checked += 1;
                    let both = is_bot_free(&compose_strategies(g0, e, &h)?) && is_bot_free(&compose_strategies(g1, e, &h)?);
                    let joint = is_bot_free(&compose_strategies(&sum, e, &h)?);
                    if both != joint {
                        return Ok(LemmaResult {
                            name: "lemma-1".into(),
                            outcome: Outcome::Fails,
                            detail: format!("separately ⊥-free {both}, disjunction ⊥-free {joint}"),
                            counterexample: Some(json!({ "g0": g0.to_json(), "g1": g1.to_json(), "environment": e.to_json(), "coin": h })),
                        });
                    }
                }
            }
            if checked > budget {
                return Err(GameError::Budget(budget));
            }
        }
    }
    Ok(LemmaResult { name: "lemma-1".into(), outcome: Outcome::Holds, detail: format!("{checked} plays"), counterexample: None })
}

fn lemma_2(sp: &BTreeSet<Strategy>, sq: &BTreeSet<Strategy>, r: &Tioa, depth: usize, budget: usize) -> Result<LemmaResult, GameError> {
    let sr = strategies_of(r, depth, budget)?;
    let semp = semantics_within(sp, &disjunction_closure(sp, budget)?, budget)?;
    let semq = semantics_within(sq, &disjunction_closure(sq, budget)?, budget)?;
    let mut composed = BTreeSet::new();
    for g in &semp {
        for h in &semq {
            composed.extend(compose_all_coins(g, h, budget)?);
            if composed.len() > budget {
                return Err(GameError::Budget(budget));
            }
        }
    }
    let u = disjunction_closure(&union([&sr, &composed]), budget)?;
    let lhs = semantics_within(&sr, &u, budget)?;
    let rhs = upward_closure(&composed, &u);
    Ok(compare("lemma-2", &lhs, &rhs))
}

fn lemma_5(sp: &BTreeSet<Strategy>, sq: &BTreeSet<Strategy>, r: &Tioa, depth: usize, budget: usize) -> Result<LemmaResult, GameError> {
    let sr = strategies_of(r, depth, budget)?;
    let mut composed = BTreeSet::new();
    for g in &sr {
        for h in sq {
            composed.extend(compose_all_coins(g, h, budget)?);
        }
    }
    let up = disjunction_closure(&union([sp, &composed]), budget)?;
    let semp = semantics_within(sp, &up, budget)?;
    let ur = disjunction_closure(&sr, budget)?;
    let lhs = semantics_within(&sr, &ur, budget)?;
    let mut rhs = BTreeSet::new();
    for g in &ur {
        let mut ok = true;
        for h in sq {
            if !compose_all_coins(g, h, budget)?.iter().all(|c| semp.contains(c)) {
                ok = false;
                break;
            }
        }
        if ok {
            rhs.insert(g.clone());
        }
    }
    Ok(compare("lemma-5", &lhs, &rhs))
}

fn lemma_6(p: &Tioa, mp: &Tioa, q: &Tioa, depth: usize, budget: usize) -> Result<LemmaResult, GameError> {
    let sp = strategies_of(p, depth, budget)?;
    let smp = strategies_of(mp, depth, budget)?;
    let mut universe = smp.clone();
    if let Ok(mq) = operators::mirror(q) {
        universe.extend(strategies_of(&mq, depth, budget)?);
    }
    let u = disjunction_closure(&universe, budget)?;
    let lhs = semantics_within(&smp, &u, budget)?;
    let up = disjunction_closure(&sp, budget)?;
    let semp = semantics_within(&sp, &up, budget)?;
    let mut rhs = BTreeSet::new();
    for g in &u {
        let mut ok = true;
        for h in &semp {
            if !compose_all_coins(g, h, budget)?.iter().all(is_bot_free) {
                ok = false;
                break;
            }
        }
        if ok {
            rhs.insert(g.clone());
        }
    }
    Ok(compare("lemma-6", &lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ClockConstraint as CC;
    use crate::tioa::{Edge, Location};

    /// Untimed systems: time may not pass anywhere.
    fn untimed(name: &str, locs: &[&str], edges: &[(usize, &str, usize)]) -> Tioa {
        let mut a = Tioa::new(name);
        a.clocks = vec!["x".into()];
        a.inputs = ["e", "f"].iter().map(|s| s.to_string()).collect();
        a.outputs = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        for l in locs {
            a.locations.push(Location { name: l.to_string(), invariant: CC::le(0, 0), co_invariant: CC::True });
        }
        for &(s, act, t) in edges {
            a.edges.push(Edge { source: s, guard: CC::True, action: act.into(), resets: vec![], target: t });
        }
        a
    }

    fn branching_p() -> Tioa {
        untimed(
            "P",
            &["p0", "p1", "p2", "p3", "p4", "p5", "p6"],
            &[(0, "a", 1), (0, "a", 2), (1, "e", 3), (1, "b", 5), (1, "c", 6), (2, "f", 4)],
        )
    }

    fn branching_q() -> Tioa {
        untimed("Q", &["q0", "q1", "q5", "q6"], &[(0, "a", 1), (1, "b", 2), (1, "c", 3)])
    }

    fn act(s: &str) -> Label {
        Label::Action(s.into())
    }

    /// The strategy whose moves are `moves` along their paths and a delay
    /// everywhere else.
    fn pick<'a>(set: &'a BTreeSet<Strategy>, moves: &[(&[&str], &str)], plain: &[&[&str]]) -> Vec<&'a Strategy> {
        let path = |p: &[&str]| p.iter().map(|s| act(s)).collect::<Vec<_>>();
        set.iter()
            .filter(|g| {
                g.nodes().iter().all(|(p, n)| {
                    let expected = moves.iter().find(|(mp, _)| path(mp) == *p).map_or(Label::Tick, |(_, m)| act(m));
                    g.move_of(n).is_none_or(|m| m == expected)
                }) && plain.iter().all(|p| g.class_at(&path(p)) == Some(Class::Plain))
                    && moves.iter().all(|(p, _)| g.class_at(&path(p)) == Some(Class::Plain))
            })
            .collect()
    }

    #[test]
    fn strategy_example() {
        let sp = strategies_of(&branching_p(), 3, DEFAULT_STRATEGY_BUDGET).unwrap();
        let sq = strategies_of(&branching_q(), 3, DEFAULT_STRATEGY_BUDGET).unwrap();
        assert!(sp.iter().chain(&sq).all(|g| g.check().is_empty()));
        let ab: &[(&[&str], &str)] = &[(&[], "a"), (&["a"], "b")];
        let ac: &[(&[&str], &str)] = &[(&[], "a"), (&["a"], "c")];
        let s1 = pick(&sp, ab, &[&["a", "e"]]);
        let s2 = pick(&sp, ac, &[&["a", "e"]]);
        let s3 = pick(&sp, ab, &[&["a", "f"]]);
        let s4 = pick(&sp, ac, &[&["a", "f"]]);
        let a = pick(&sq, ab, &[]);
        let b = pick(&sq, ac, &[]);
        assert_eq!((s1.len(), s2.len(), s3.len(), s4.len(), a.len(), b.len()), (1, 1, 1, 1, 1, 1));
        assert_eq!(s3[0].class_at(&[act("a"), act("b")]), Some(Class::Top));
        assert_eq!(&strategy_disjunction(s2[0], s4[0]).unwrap(), b[0]);
        let (s1, s3, a) = (s1[0], s3[0], a[0]);
        assert!(is_affine(s1, s3) && is_affine(s1, a) && is_affine(s3, a));
        assert!(!is_affine(s1, s2[0]));
        assert_eq!(&strategy_disjunction(s1, s3).unwrap(), a);
        assert!(more_aggressive(a, s1).unwrap() && more_aggressive(a, s3).unwrap());
        assert!(!more_aggressive(s1, a).unwrap());
        assert!(!sp.contains(a) && !sp.contains(b[0]));
    }

    #[test]
    fn strategy_example_theorem_one() {
        let report = check_lemmas(&branching_p(), &branching_q(), 3, DEFAULT_STRATEGY_BUDGET).unwrap();
        let t = report.get("theorem-1").unwrap();
        assert_eq!(t.outcome, Outcome::Holds, "{}", t.detail);
        assert_eq!(report.get("lemma-3").unwrap().outcome, Outcome::Holds);
        assert_eq!(report.get("lemma-5").unwrap().outcome, Outcome::Holds);
    }

    #[test]
    fn closure_basics() {
        let sq = strategies_of(&branching_q(), 2, DEFAULT_STRATEGY_BUDGET).unwrap();
        let one: BTreeSet<Strategy> = sq.iter().take(1).cloned().collect();
        assert_eq!(disjunction_closure(&one, 100).unwrap(), one);
        let c = disjunction_closure(&sq, 1000).unwrap();
        assert_eq!(disjunction_closure(&c, 1000).unwrap(), c);
        for g in &sq {
            assert!(is_affine(g, g) && more_aggressive(g, g).unwrap());
            assert_eq!(&strategy_disjunction(g, g).unwrap(), g);
        }
    }

    #[test]
    fn action_beats_delay_and_plays_stop_at_sinks() {
        let sp = strategies_of(&branching_q(), 2, DEFAULT_STRATEGY_BUDGET).unwrap();
        let env = untimed("E", &["e0"], &[]);
        let mut env = env;
        std::mem::swap(&mut env.inputs, &mut env.outputs);
        env.locations[0].invariant = CC::True;
        let se = strategies_of(&env, 2, DEFAULT_STRATEGY_BUDGET).unwrap();
        let waiting = se.iter().find(|g| g.move_at(&[]) == Some(Label::Tick)).unwrap();
        let sending = pick(&sp, &[(&[], "a")], &[]);
        let p = play(sending[0], waiting, &CoinStrategy::constant(false)).unwrap();
        assert_eq!(p.word.letters()[0], crate::word::Letter::Action("a".into()));
        assert_ne!(p.terminal, Terminal::Frontier);
    }
}
