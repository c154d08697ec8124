//! Triple-trace structures over the digitized word universe.
//!
//! A structure is stored as the tree of words whose strict prefixes are all
//! plain, each labelled with its class. Error words implicitly carry all
//! their extensions and magic words all their time-extensions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{reduce, Bounds, Digitized, Label, OracleError};
use crate::constraint::Q;
use crate::operators::Class;
use crate::word::{Letter, TimedWord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStructure {
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub bounds: Bounds,
    pub exact: bool,
    nodes: BTreeMap<TimedWord, Class>,
}

/// One δ-step of a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Unit<'a> {
    Tick,
    Action(&'a str),
}

pub(crate) fn units<'a>(w: &'a TimedWord, delta: Q) -> Vec<Unit<'a>> {
    let mut out = Vec::new();
    for l in w.letters() {
        match l {
            Letter::Action(a) => out.push(Unit::Action(a)),
            Letter::Delay(d) => {
                let k = *d / delta;
                assert!(k.is_integer(), "delay {d} is off the grid");
                out.extend(std::iter::repeat_n(Unit::Tick, k.to_integer() as usize));
            }
        }
    }
    out
}

/// The longest strict grid prefix.
pub(crate) fn grid_parent(w: &TimedWord, delta: Q) -> Option<TimedWord> {
    match w.last()? {
        Letter::Action(_) => w.parent(),
        Letter::Delay(d) => {
            let mut p = w.parent().unwrap();
            p.push_delay(*d - delta);
            Some(p)
        }
    }
}

/// Build a structure by expanding plain words. `class` is
/// called on words whose strict prefixes are all plain.
pub(crate) fn unfold<S: Clone>(
    inputs: &BTreeSet<String>,
    outputs: &BTreeSet<String>,
    bounds: &Bounds,
    exact: bool,
    root: S,
    succ: impl Fn(&S, &Label) -> S,
    class: impl Fn(&TimedWord, &S) -> Option<Class>,
) -> TraceStructure {
    let ticks = bounds.ticks();
    let labels: Vec<Label> =
        std::iter::once(Label::Tick).chain(inputs.iter().chain(outputs).cloned().map(Label::Action)).collect();
    let mut nodes = BTreeMap::new();
    let mut stack = vec![(TimedWord::empty(), root, 0usize)];
    while let Some((w, s, t)) = stack.pop() {
        let Some(c) = class(&w, &s) else { continue };
        nodes.insert(w.clone(), c);
        if c != Class::Plain {
            continue;
        }
        for l in &labels {
            match l {
                Label::Tick if t < ticks => stack.push((w.with_delay(bounds.delta), succ(&s, l), t + 1)),
                Label::Action(a) if w.action_count() < bounds.depth => stack.push((w.with_action(a), succ(&s, l), t)),
                _ => {}
            }
        }
    }
    TraceStructure { inputs: inputs.clone(), outputs: outputs.clone(), bounds: bounds.clone(), exact, nodes }
}

/// Unfold a digitized system by its reduced subset semantics.
pub fn extract_triple_traces(d: &Digitized, bounds: &Bounds) -> TraceStructure {
    assert_eq!(d.delta, bounds.delta, "granularity mismatch");
    let root: BTreeSet<usize> = reduce([d.initial].into());
    unfold(
        &d.inputs,
        &d.outputs,
        bounds,
        d.exact,
        root,
        |s, l| reduce(s.iter().flat_map(|&m| d.successors(m, l).iter().map(|t| t.target)).collect()),
        |_, s| {
            if s.is_empty() {
                None
            } else if s.len() == 1 && s.contains(&super::BOT) {
                Some(Class::Bot)
            } else if s.len() == 1 && s.contains(&super::TOP) {
                Some(Class::Top)
            } else {
                Some(Class::Plain)
            }
        },
    )
}

impl TraceStructure {
    pub fn alphabet(&self) -> BTreeSet<String> {
        self.inputs.union(&self.outputs).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Equal alphabets, bounds and trace sets.
    pub fn same_traces(&self, other: &TraceStructure) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs && self.bounds == other.bounds && self.nodes == other.nodes
    }

    /// Words whose strict prefixes are all plain, with their classes.
    pub fn nodes(&self) -> &BTreeMap<TimedWord, Class> {
        &self.nodes
    }

    /// Whether `w` lies inside the bounded word universe.
    pub fn in_universe(&self, w: &TimedWord) -> bool {
        w.action_count() <= self.bounds.depth
            && w.length() <= self.bounds.horizon
            && (w.length() / self.bounds.delta).is_integer()
            && w.letters().iter().all(|l| match l {
                Letter::Action(a) => self.inputs.contains(a) || self.outputs.contains(a),
                Letter::Delay(d) => (*d / self.bounds.delta).is_integer(),
            })
    }

    /// The class a word reaches, or `None` if it is not a trace.
    pub fn class_of(&self, w: &TimedWord) -> Option<Class> {
        let mut cur = TimedWord::empty();
        let mut magic = false;
        for u in units(w, self.bounds.delta) {
            if magic {
                if u == Unit::Tick {
                    continue;
                }
                return None;
            }
            match self.nodes.get(&cur)? {
                Class::Bot => return Some(Class::Bot),
                Class::Top if u == Unit::Tick => magic = true,
                Class::Top => return None,
                Class::Plain => match u {
                    Unit::Tick => cur.push_delay(self.bounds.delta),
                    Unit::Action(a) => cur.push_action(a),
                },
            }
        }
        if magic {
            return Some(Class::Top);
        }
        self.nodes.get(&cur).copied()
    }

    pub fn in_tt(&self, w: &TimedWord) -> bool {
        self.class_of(w).is_some()
    }

    pub fn in_tr(&self, w: &TimedWord) -> bool {
        matches!(self.class_of(w), Some(Class::Plain | Class::Bot))
    }

    pub fn in_te(&self, w: &TimedWord) -> bool {
        self.class_of(w) == Some(Class::Bot)
    }

    /// The same structure with inputs and outputs swapped and every class
    /// mapped through `f`.
    pub(crate) fn relabel(&self, f: impl Fn(Class) -> Class) -> TraceStructure {
        TraceStructure {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
            bounds: self.bounds.clone(),
            exact: self.exact,
            nodes: self.nodes.iter().map(|(w, c)| (w.clone(), f(*c))).collect(),
        }
    }

    /// Every word of the bounded universe, shortest first.
    pub fn universe(&self, limit: usize) -> Result<Vec<TimedWord>, OracleError> {
        Ok(self.tree(limit)?.into_iter().map(|n| n.word).collect())
    }

    /// Every word of the bounded universe with its class, shortest first.
    pub fn classify(&self, limit: usize) -> Result<Vec<(TimedWord, Option<Class>)>, OracleError> {
        Ok(self.tree(limit)?.into_iter().map(|n| (n.word, n.class)).collect())
    }

    /// The universe as a tree in breadth-first order. Classes are
    /// propagated from parent to child, so each word costs one lookup.
    fn tree(&self, limit: usize) -> Result<Vec<UniverseNode>, OracleError> {
        #[derive(Clone, Copy)]
        enum At {
            Node(Class),
            AfterBot,
            AfterTop,
            Out,
        }
        let class = |at: At| match at {
            At::Node(c) => Some(c),
            At::AfterBot => Some(Class::Bot),
            At::AfterTop => Some(Class::Top),
            At::Out => None,
        };
        let ticks = self.bounds.ticks();
        let alphabet = self.alphabet();
        let root = self.nodes.get(&TimedWord::empty()).map_or(At::Out, |c| At::Node(*c));
        let mut state = vec![(root, 0usize)];
        let mut out = vec![UniverseNode { word: TimedWord::empty(), class: class(root), parent: None, time: false }];
        let mut i = 0;
        while i < out.len() {
            let (at, t) = state[i];
            let child = |x: &TimedWord, time: bool| match at {
                At::Node(Class::Plain) => self.nodes.get(x).map_or(At::Out, |c| At::Node(*c)),
                At::Node(Class::Bot) | At::AfterBot => At::AfterBot,
                At::Node(Class::Top) | At::AfterTop if time => At::AfterTop,
                _ => At::Out,
            };
            let mut next = Vec::new();
            if t < ticks {
                next.push((out[i].word.with_delay(self.bounds.delta), true, t + 1));
            }
            if out[i].word.action_count() < self.bounds.depth {
                next.extend(alphabet.iter().map(|a| (out[i].word.with_action(a), false, t)));
            }
            for (x, time, t) in next {
                let c = child(&x, time);
                state.push((c, t));
                out.push(UniverseNode { word: x, class: class(c), parent: Some(i), time });
            }
            if out.len() > limit {
                return Err(OracleError::TooLarge(limit));
            }
            i += 1;
        }
        Ok(out)
    }

    /// The three trace sets written out in full.
    pub fn materialize(&self, limit: usize) -> Result<Materialized, OracleError> {
        let mut m = Materialized::default();
        for (w, c) in self.classify(limit)? {
            match c {
                Some(Class::Bot) => {
                    m.te.insert(w.clone());
                    m.tr.insert(w.clone());
                    m.tt.insert(w);
                }
                Some(Class::Plain) => {
                    m.tr.insert(w.clone());
                    m.tt.insert(w);
                }
                Some(Class::Top) => {
                    m.tt.insert(w);
                }
                None => {}
            }
        }
        Ok(m)
    }

    pub fn to_json(&self, limit: usize) -> Result<serde_json::Value, OracleError> {
        let m = self.materialize(limit)?;
        let num = |q: Q| {
            if q.is_integer() {
                serde_json::json!(q.to_integer())
            } else {
                serde_json::json!(*q.numer() as f64 / *q.denom() as f64)
            }
        };
        Ok(serde_json::json!({
            "alphabet": { "inputs": self.inputs, "outputs": self.outputs },
            "delta": num(self.bounds.delta),
            "depth": self.bounds.depth,
            "horizon": num(self.bounds.horizon),
            "exact": self.exact,
            "tt": m.tt,
            "tr": m.tr,
            "te": m.te,
        }))
    }
}

/// Explicit trace sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Materialized {
    pub tt: BTreeSet<TimedWord>,
    pub tr: BTreeSet<TimedWord>,
    pub te: BTreeSet<TimedWord>,
}

/// `spec ⊑ imp` by containment of all three sets; returns a word in a set
/// of `imp` but not in the matching set of `spec`.
pub fn tt_refines(spec: &TraceStructure, imp: &TraceStructure) -> Result<Option<TimedWord>, OracleError> {
    if spec.bounds != imp.bounds {
        return Err(OracleError::BoundMismatch);
    }
    if spec.inputs != imp.inputs || spec.outputs != imp.outputs {
        return Err(OracleError::Alphabet);
    }
    // A first violation extends a word that is plain on both sides, so it is
    // a node of `imp`.
    let mut words: Vec<&TimedWord> = imp.nodes.keys().collect();
    words.sort_by_key(|w| (w.action_count(), w.length(), (*w).clone()));
    for w in words {
        let (s, i) = (spec.class_of(w), imp.class_of(w));
        let bad = match i {
            None => false,
            Some(Class::Bot) => s != Some(Class::Bot),
            Some(Class::Plain) => !matches!(s, Some(Class::Plain | Class::Bot)),
            Some(Class::Top) => s.is_none(),
        };
        if bad {
            return Ok(Some(w.clone()));
        }
    }
    Ok(None)
}

struct UniverseNode {
    word: TimedWord,
    class: Option<Class>,
    parent: Option<usize>,
    /// Reached from the parent by a δ-step.
    time: bool,
}

/// Violations of the closure properties of triple-trace structures, checked
/// on explicit sets over the bounded universe.
pub fn check_structure(s: &TraceStructure, limit: usize) -> Result<Vec<String>, OracleError> {
    let nodes = s.tree(limit)?;
    let mut children = vec![Vec::new(); nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        if let Some(p) = n.parent {
            children[p].push(i);
        }
    }
    let tt = |i: usize| nodes[i].class.is_some();
    let tr = |i: usize| matches!(nodes[i].class, Some(Class::Plain | Class::Bot));
    let te = |i: usize| nodes[i].class == Some(Class::Bot);
    let magic = |i: usize| tt(i) && !tr(i);
    let word = |i: usize| &nodes[i].word;
    let mut out = Vec::new();
    if !(0..nodes.len()).any(tt) {
        out.push("TT is empty".to_string());
    }
    if (0..nodes.len()).any(|i| (te(i) && !tr(i)) || (tr(i) && !tt(i))) {
        out.push("TE ⊆ TR ⊆ TT fails".to_string());
    }
    for i in (0..nodes.len()).filter(|&i| tt(i)) {
        if let Some(p) = nodes[i].parent {
            if !tt(p) {
                out.push(format!("TT not prefix-closed at {}", word(i)));
            }
            if tr(i) && !tr(p) {
                out.push(format!("TR not prefix-closed at {}", word(i)));
            }
        }
        for &x in &children[i] {
            let is_time = nodes[x].time;
            if te(i) && !te(x) {
                out.push(format!("TE not extension-closed at {}", word(x)));
            }
            if !magic(i) && !tt(x) {
                out.push(format!("TR not fully branching at {}", word(x)));
            }
            if magic(i) && is_time && !magic(x) {
                out.push(format!("TT \\ TR not time-extension closed at {}", word(x)));
            }
            if magic(i) && !is_time && magic(x) {
                out.push(format!("magic traces {} and {} differ by an action", word(i), word(x)));
            }
        }
    }
    for i in (0..nodes.len()).filter(|&i| !tt(i)) {
        let mut p = Some(i);
        let mut covered = false;
        while let Some(q) = p {
            if te(q) || magic(q) {
                covered = true;
                break;
            }
            p = nodes[q].parent;
        }
        if !covered {
            out.push(format!("{} is neither a trace nor beyond an error or magic trace", word(i)));
        }
    }
    Ok(out)
}
