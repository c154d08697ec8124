//! Graphviz export.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::constraint::ClockConstraint;
use crate::federation::Federation;
use crate::tioa::Tioa;

#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions {
    /// Draw the implicit completion: dashed edges into ⊥ for disabled
    /// inputs and into ⊤ for disabled outputs.
    pub completion: bool,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Escaped label lines joined by Graphviz newlines.
fn lines(parts: &[String]) -> String {
    parts.iter().map(|p| escape(p)).collect::<Vec<_>>().join("\\n")
}

fn node_id(i: usize) -> String {
    format!("n{i}")
}

pub fn to_dot(a: &Tioa, opts: DotOptions) -> String {
    let mut out = String::new();
    let cc = |c: &ClockConstraint| c.display(&a.clocks).to_string();
    writeln!(out, "digraph \"{}\" {{", escape(&a.name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=ellipse];").unwrap();
    writeln!(out, "  init [shape=point];").unwrap();
    for (i, l) in a.locations.iter().enumerate() {
        let attrs = if l.is_top_sink() {
            format!("label=\"⊤ {}\", shape=box, style=filled, fillcolor=palegreen", escape(&l.name))
        } else if l.is_bot_sink() {
            format!("label=\"⊥ {}\", shape=box, style=filled, fillcolor=lightpink", escape(&l.name))
        } else {
            let mut label = escape(&l.name);
            if l.invariant != ClockConstraint::True {
                label.push_str(&format!("\\ninv: {}", escape(&cc(&l.invariant))));
            }
            if l.co_invariant != ClockConstraint::True {
                label.push_str(&format!("\\ncoinv: {}", escape(&cc(&l.co_invariant))));
            }
            format!("label=\"{label}\"")
        };
        writeln!(out, "  {} [{attrs}];", node_id(i)).unwrap();
    }
    if !a.locations.is_empty() {
        writeln!(out, "  init -> {};", node_id(a.initial)).unwrap();
    }
    for e in &a.edges {
        let mark = if a.is_input(&e.action) { "?" } else { "!" };
        let mut label = vec![format!("{}{mark}", e.action)];
        if e.guard != ClockConstraint::True {
            label.push(cc(&e.guard));
        }
        if !e.resets.is_empty() {
            let rs: Vec<&str> = e.resets.iter().map(|&c| a.clocks[c].as_str()).collect();
            label.push(format!("{{{}}}:=0", rs.join(",")));
        }
        writeln!(out, "  {} -> {} [label=\"{}\"];", node_id(e.source), node_id(e.target), lines(&label)).unwrap();
    }
    if opts.completion {
        completion(a, &mut out);
    }
    out.push_str("}\n");
    out
}

fn completion(a: &Tioa, out: &mut String) {
    let n = a.clock_count();
    let mut used = BTreeSet::new();
    let mut edges = Vec::new();
    for (i, l) in a.locations.iter().enumerate() {
        if l.is_bot_sink() || l.is_top_sink() {
            continue;
        }
        let plain = Federation::from_constraint(n, &l.invariant)
            .intersect(&Federation::from_constraint(n, &l.co_invariant));
        for act in a.alphabet() {
            let enabled = a
                .edges_from(i, &act)
                .fold(Federation::empty(n), |f, (_, e)| f.union(&Federation::from_constraint(n, &e.guard)));
            let rest = plain.subtract(&enabled).reduce();
            if rest.is_empty() {
                continue;
            }
            let (sink, mark) = if a.is_input(&act) { ("bot", "?") } else { ("top", "!") };
            used.insert(sink);
            let guard = rest.to_constraint();
            let mut label = vec![format!("{act}{mark}")];
            if guard != ClockConstraint::True {
                label.push(guard.display(&a.clocks).to_string());
            }
            edges.push(format!("  {} -> {sink} [style=dashed, label=\"{}\"];", node_id(i), lines(&label)));
        }
    }
    if used.contains("bot") {
        out.push_str("  bot [label=\"⊥\", shape=box, style=filled, fillcolor=lightpink];\n");
    }
    if used.contains("top") {
        out.push_str("  top [label=\"⊤\", shape=box, style=filled, fillcolor=palegreen];\n");
    }
    for l in edges {
        out.push_str(&l);
        out.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_tioa;

    #[test]
    fn scheduler_dot() {
        let a = parse_tioa(
            "automaton S { clocks x; inputs finish; outputs start;
               location A init inv: x<=100 { on start reset {x} goto B; }
               location B { on finish guard: x>=5 && x<=8 reset {x} goto A; } }",
        )
        .unwrap();
        let plain = to_dot(&a, DotOptions::default());
        assert!(plain.starts_with("digraph \"S\" {"));
        assert!(plain.contains("n0 [label=\"A\\ninv: x<=100\"];"));
        assert!(plain.contains("n1 -> n0 [label=\"finish?\\nx>=5 && x<=8\\n{x}:=0\"];"));
        assert!(!plain.contains("bot"));
        let full = to_dot(&a, DotOptions { completion: true });
        assert!(full.contains("n1 -> bot [style=dashed"), "{full}");
        assert!(full.contains("n0 -> bot [style=dashed, label=\"finish?"));
        assert!(full.contains("n1 -> top [style=dashed, label=\"start!\"]"));
    }
}
