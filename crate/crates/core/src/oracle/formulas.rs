//! The operators computed directly on trace structures.
//!
//! Each formula gives the class of a word of the composite universe; the
//! result is unfolded from the empty word, so formulas are only consulted on
//! words whose strict prefixes are plain in the result.

use std::collections::BTreeSet;

use super::traces::{grid_parent, unfold, TraceStructure};
use super::OracleError;
use crate::operators::Class;
use crate::word::TimedWord;

fn same_bounds(t0: &TraceStructure, t1: &TraceStructure) -> Result<(), OracleError> {
    if t0.bounds != t1.bounds {
        return Err(OracleError::BoundMismatch);
    }
    Ok(())
}

fn build(
    t0: &TraceStructure,
    t1: &TraceStructure,
    inputs: BTreeSet<String>,
    outputs: BTreeSet<String>,
    class: impl Fn(&TimedWord) -> Option<Class>,
) -> TraceStructure {
    unfold(&inputs, &outputs, &t0.bounds, t0.exact && t1.exact, (), |_, _| (), |w, _| class(w))
}

fn is_tr(c: Option<Class>) -> bool {
    matches!(c, Some(Class::Plain | Class::Bot))
}

/// Every strict prefix of `w` is plain in `t`.
fn strict_prefixes_plain(t: &TraceStructure, w: &TimedWord) -> bool {
    grid_parent(w, t.bounds.delta).is_none_or(|p| t.class_of(&p) == Some(Class::Plain))
}

pub fn tt_parallel(t0: &TraceStructure, t1: &TraceStructure) -> Result<TraceStructure, OracleError> {
    same_bounds(t0, t1)?;
    if !t0.outputs.is_disjoint(&t1.outputs) {
        return Err(OracleError::Alphabet);
    }
    let outputs: BTreeSet<String> = t0.outputs.union(&t1.outputs).cloned().collect();
    let inputs = t0.inputs.union(&t1.inputs).filter(|a| !outputs.contains(*a)).cloned().collect();
    let (a0, a1) = (t0.alphabet(), t1.alphabet());
    Ok(build(t0, t1, inputs, outputs, |tt| {
        let (p0, p1) = (tt.project(&a0), tt.project(&a1));
        let (c0, c1) = (t0.class_of(&p0), t1.class_of(&p1));
        if (c0 == Some(Class::Bot) && is_tr(c1)) || (c1 == Some(Class::Bot) && is_tr(c0)) {
            Some(Class::Bot)
        } else if c0 == Some(Class::Plain) && c1 == Some(Class::Plain) {
            Some(Class::Plain)
        } else if (c0 == Some(Class::Top) && strict_prefixes_plain(t1, &p1))
            || (c1 == Some(Class::Top) && strict_prefixes_plain(t0, &p0))
        {
            Some(Class::Top)
        } else {
            None
        }
    }))
}

fn same_alphabet(t0: &TraceStructure, t1: &TraceStructure) -> Result<(), OracleError> {
    same_bounds(t0, t1)?;
    if t0.inputs != t1.inputs || t0.outputs != t1.outputs {
        return Err(OracleError::Alphabet);
    }
    Ok(())
}

pub fn tt_disjunction(t0: &TraceStructure, t1: &TraceStructure) -> Result<TraceStructure, OracleError> {
    same_alphabet(t0, t1)?;
    Ok(build(t0, t1, t0.inputs.clone(), t0.outputs.clone(), |tt| {
        let (c0, c1) = (t0.class_of(tt), t1.class_of(tt));
        // Beyond a magic trace means some prefix was magic.
        let magic_prefix = |c: Option<Class>| matches!(c, Some(Class::Top) | None);
        if c0 == Some(Class::Bot) || c1 == Some(Class::Bot) {
            Some(Class::Bot)
        } else if is_tr(c0) || is_tr(c1) {
            Some(Class::Plain)
        } else if (c0 == Some(Class::Top) && magic_prefix(c1)) || (c1 == Some(Class::Top) && magic_prefix(c0)) {
            Some(Class::Top)
        } else {
            None
        }
    }))
}

pub fn tt_conjunction(t0: &TraceStructure, t1: &TraceStructure) -> Result<TraceStructure, OracleError> {
    same_alphabet(t0, t1)?;
    Ok(build(t0, t1, t0.inputs.clone(), t0.outputs.clone(), |tt| {
        let (c0, c1) = (t0.class_of(tt), t1.class_of(tt));
        let parent = grid_parent(tt, t0.bounds.delta);
        let prefixes_tr = |t: &TraceStructure| parent.as_ref().is_none_or(|p| is_tr(t.class_of(p)));
        if c0 == Some(Class::Bot) && c1 == Some(Class::Bot) {
            Some(Class::Bot)
        } else if is_tr(c0) && is_tr(c1) {
            Some(Class::Plain)
        } else if (c0 == Some(Class::Top) && prefixes_tr(t1)) || (c1 == Some(Class::Top) && prefixes_tr(t0)) {
            Some(Class::Top)
        } else {
            None
        }
    }))
}

pub fn tt_quotient(t0: &TraceStructure, t1: &TraceStructure) -> Result<TraceStructure, OracleError> {
    same_bounds(t0, t1)?;
    if !t1.alphabet().is_subset(&t0.alphabet()) || !t1.outputs.is_subset(&t0.outputs) {
        return Err(OracleError::NotDominated);
    }
    let inputs = t0.inputs.union(&t1.outputs).cloned().collect();
    let outputs = t0.outputs.difference(&t1.outputs).cloned().collect();
    let a1 = t1.alphabet();
    Ok(build(t0, t1, inputs, outputs, |tt| {
        let c0 = t0.class_of(tt);
        let c1 = t1.class_of(&tt.project(&a1));
        let parent = grid_parent(tt, t0.bounds.delta);
        let no_prefix_te1 = parent.as_ref().is_none_or(|p| t1.class_of(&p.project(&a1)) != Some(Class::Bot));
        // A strict prefix is magic in t0 iff the parent is magic or beyond one.
        let no_prefix_tm0 = parent.as_ref().is_none_or(|p| matches!(t0.class_of(p), Some(Class::Plain | Class::Bot)));
        if (c0 == Some(Class::Bot) && no_prefix_te1) || (c1 == Some(Class::Top) && no_prefix_tm0) {
            Some(Class::Bot)
        } else if c0 == Some(Class::Plain) && c1 == Some(Class::Plain) {
            Some(Class::Plain)
        } else if (c0 == Some(Class::Top) && is_tr(c1)) || (c1 == Some(Class::Bot) && c0 != Some(Class::Bot)) {
            Some(Class::Top)
        } else {
            None
        }
    }))
}

/// Swap inputs with outputs and error traces with magic traces.
pub fn tt_mirror(t: &TraceStructure) -> TraceStructure {
    t.relabel(|c| match c {
        Class::Bot => Class::Top,
        Class::Top => Class::Bot,
        Class::Plain => Class::Plain,
    })
}

/// Quotient as the mirror of the mirrored dividend composed with the
/// divisor.
pub fn tt_quotient_via_mirror(t0: &TraceStructure, t1: &TraceStructure) -> Result<TraceStructure, OracleError> {
    if !t1.alphabet().is_subset(&t0.alphabet()) || !t1.outputs.is_subset(&t0.outputs) {
        return Err(OracleError::NotDominated);
    }
    Ok(tt_mirror(&tt_parallel(&tt_mirror(t0), t1)?))
}
