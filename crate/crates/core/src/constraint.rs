//! Clock constraints and clock valuations.
//!
//! A [`ClockConstraint`] is a boolean combination of atoms `x ⋈ d` and
//! `x - y ⋈ d` over clocks identified by index into the owning automaton's
//! clock list. Valuations use exact rationals.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational used for valuations and delays.
pub type Q = Ratio<i64>;

/// Index of a clock in the automaton's clock list.
pub type Clock = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn holds(self, lhs: Q, rhs: Q) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "==",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }
}

/// `left ⋈ constant` or `left - right ⋈ constant`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub left: Clock,
    pub right: Option<Clock>,
    pub rel: Rel,
    pub constant: i64,
}

impl Atom {
    pub fn eval(&self, t: &ClockValuation) -> bool {
        let lhs = match self.right {
            Some(r) => t.get(self.left) - t.get(r),
            None => t.get(self.left),
        };
        self.rel.holds(lhs, Q::from_integer(self.constant))
    }

    /// The complement of the atom as a disjunction-free constraint where
    /// possible (`=` negates to a disjunction).
    pub fn negate(&self) -> ClockConstraint {
        let mk = |rel| ClockConstraint::Atom(Atom { rel, ..self.clone() });
        match self.rel {
            Rel::Lt => mk(Rel::Ge),
            Rel::Le => mk(Rel::Gt),
            Rel::Ge => mk(Rel::Lt),
            Rel::Gt => mk(Rel::Le),
            Rel::Eq => ClockConstraint::Or(vec![mk(Rel::Lt), mk(Rel::Gt)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[derive(Default)]
pub enum ClockConstraint {
    #[default]
    True,
    False,
    Atom(Atom),
    And(Vec<ClockConstraint>),
    Or(Vec<ClockConstraint>),
    Not(Box<ClockConstraint>),
}

use ClockConstraint as CC;


impl ClockConstraint {
    pub fn atom(left: Clock, rel: Rel, constant: i64) -> Self {
        CC::Atom(Atom { left, right: None, rel, constant })
    }

    pub fn diff(left: Clock, right: Clock, rel: Rel, constant: i64) -> Self {
        CC::Atom(Atom { left, right: Some(right), rel, constant })
    }

    pub fn le(x: Clock, c: i64) -> Self {
        Self::atom(x, Rel::Le, c)
    }

    pub fn ge(x: Clock, c: i64) -> Self {
        Self::atom(x, Rel::Ge, c)
    }

    pub fn eq(x: Clock, c: i64) -> Self {
        Self::atom(x, Rel::Eq, c)
    }

    pub fn and(parts: impl IntoIterator<Item = ClockConstraint>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                CC::True => {}
                CC::False => return CC::False,
                CC::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => CC::True,
            1 => out.pop().unwrap(),
            _ => CC::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = ClockConstraint>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                CC::False => {}
                CC::True => return CC::True,
                CC::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => CC::False,
            1 => out.pop().unwrap(),
            _ => CC::Or(out),
        }
    }

    pub fn negate(self) -> Self {
        match self {
            CC::True => CC::False,
            CC::False => CC::True,
            CC::Not(inner) => *inner,
            other => CC::Not(Box::new(other)),
        }
    }

    pub fn eval(&self, t: &ClockValuation) -> bool {
        match self {
            CC::True => true,
            CC::False => false,
            CC::Atom(a) => a.eval(t),
            CC::And(ps) => ps.iter().all(|p| p.eval(t)),
            CC::Or(ps) => ps.iter().any(|p| p.eval(t)),
            CC::Not(p) => !p.eval(t),
        }
    }

    /// Negation normal form: negations pushed onto atoms and eliminated.
    pub fn nnf(&self) -> ClockConstraint {
        self.nnf_inner(false)
    }

    fn nnf_inner(&self, neg: bool) -> ClockConstraint {
        match (self, neg) {
            (CC::True, false) | (CC::False, true) => CC::True,
            (CC::True, true) | (CC::False, false) => CC::False,
            (CC::Atom(a), false) => CC::Atom(a.clone()),
            (CC::Atom(a), true) => a.negate(),
            (CC::And(ps), false) | (CC::Or(ps), true) => {
                CC::and(ps.iter().map(|p| p.nnf_inner(neg)))
            }
            (CC::Or(ps), false) | (CC::And(ps), true) => {
                CC::or(ps.iter().map(|p| p.nnf_inner(neg)))
            }
            (CC::Not(p), n) => p.nnf_inner(!n),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            CC::Atom(a) => out.push(a),
            CC::And(ps) | CC::Or(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
            CC::Not(p) => p.collect_atoms(out),
            CC::True | CC::False => {}
        }
    }

    /// True when the constraint, in negation normal form, uses only
    /// non-strict relations.
    pub fn is_closed(&self) -> bool {
        self.nnf().atoms().iter().all(|a| !a.rel.is_strict())
    }

    pub fn has_diagonal(&self) -> bool {
        self.atoms().iter().any(|a| a.right.is_some())
    }

    /// Apply a clock index mapping.
    pub fn map_clocks(&self, f: &impl Fn(Clock) -> Clock) -> ClockConstraint {
        match self {
            CC::True => CC::True,
            CC::False => CC::False,
            CC::Atom(a) => CC::Atom(Atom {
                left: f(a.left),
                right: a.right.map(f),
                rel: a.rel,
                constant: a.constant,
            }),
            CC::And(ps) => CC::And(ps.iter().map(|p| p.map_clocks(f)).collect()),
            CC::Or(ps) => CC::Or(ps.iter().map(|p| p.map_clocks(f)).collect()),
            CC::Not(p) => CC::Not(Box::new(p.map_clocks(f))),
        }
    }

    /// Largest constant compared against each clock (absolute value for
    /// diagonals, which bound both clocks).
    pub fn max_constants(&self, clocks: usize, into: &mut [i64]) {
        debug_assert!(into.len() >= clocks);
        for a in self.atoms() {
            let c = a.constant.abs();
            into[a.left] = into[a.left].max(c);
            if let Some(r) = a.right {
                into[r] = into[r].max(c);
            }
        }
    }

    /// Render with the given clock names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> DisplayConstraint<'a> {
        DisplayConstraint { cc: self, names }
    }
}

pub struct DisplayConstraint<'a> {
    cc: &'a ClockConstraint,
    names: &'a [String],
}

impl DisplayConstraint<'_> {
    fn write(&self, cc: &ClockConstraint, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let name = |c: Clock| {
            self.names.get(c).cloned().unwrap_or_else(|| format!("#{c}"))
        };
        match cc {
            CC::True => write!(f, "true"),
            CC::False => write!(f, "false"),
            CC::Atom(a) => match a.right {
                None => write!(f, "{}{}{}", name(a.left), a.rel.symbol(), a.constant),
                Some(r) => write!(f, "{}-{}{}{}", name(a.left), name(r), a.rel.symbol(), a.constant),
            },
            CC::And(ps) => {
                if prec > 2 {
                    write!(f, "(")?;
                }
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, " && ")?;
                    }
                    self.write(p, f, 3)?;
                }
                if prec > 2 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            CC::Or(ps) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, " || ")?;
                    }
                    self.write(p, f, 2)?;
                }
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            CC::Not(p) => {
                write!(f, "!")?;
                self.write(p, f, 4)
            }
        }
    }
}

impl fmt::Display for DisplayConstraint<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.cc, f, 0)
    }
}

/// Total map from clocks to non-negative rationals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockValuation(Vec<Q>);

impl ClockValuation {
    pub fn zero(clocks: usize) -> Self {
        ClockValuation(vec![Q::zero(); clocks])
    }

    pub fn new(values: Vec<Q>) -> Self {
        assert!(values.iter().all(|v| !v.is_negative()), "clock values must be non-negative");
        ClockValuation(values)
    }

    pub fn from_integers(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| Q::from_integer(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, c: Clock) -> Q {
        self.0[c]
    }

    pub fn values(&self) -> &[Q] {
        &self.0
    }

    /// `t + d`.
    pub fn delay(&self, d: Q) -> Self {
        assert!(!d.is_negative(), "delays are non-negative");
        ClockValuation(self.0.iter().map(|v| v + d).collect())
    }

    /// `t[rs ↦ 0]`.
    pub fn reset(&self, rs: &[Clock]) -> Self {
        let mut out = self.0.clone();
        for &c in rs {
            out[c] = Q::zero();
        }
        ClockValuation(out)
    }

    /// Concatenate with the valuation of another clock set (`t0 ⊎ t1`).
    pub fn join(&self, other: &ClockValuation) -> Self {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        ClockValuation(out)
    }

    pub fn slice(&self, from: usize, len: usize) -> Self {
        ClockValuation(self.0[from..from + len].to_vec())
    }
}

impl fmt::Display for ClockValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn eval_simple_guards() {
        let x = 0;
        let t0 = ClockValuation::zero(1);
        assert!(CC::le(x, 100).eval(&t0));
        let finish = CC::and([CC::ge(x, 5), CC::le(x, 8)]);
        assert!(!finish.eval(&ClockValuation::from_integers(&[4])));
        assert!(finish.eval(&ClockValuation::from_integers(&[5])));
        assert!(finish.eval(&ClockValuation::from_integers(&[8])));
    }

    #[test]
    fn delay_is_exact() {
        let t = ClockValuation::new(vec![q(141, 100)]);
        assert_eq!(t.delay(q(33, 100)), ClockValuation::new(vec![q(174, 100)]));
        let t = ClockValuation::zero(2).delay(q(5, 2));
        assert_eq!(t.values(), &[q(5, 2), q(5, 2)]);
    }

    #[test]
    fn reset_behaviour() {
        let t = ClockValuation::from_integers(&[7, 3]);
        assert_eq!(t.reset(&[]), t);
        assert_eq!(t.reset(&[0]), ClockValuation::from_integers(&[0, 3]));
    }

    #[test]
    fn nnf_pushes_negation() {
        let cc = CC::Not(Box::new(CC::and([CC::ge(0, 5), CC::le(0, 8)])));
        let n = cc.nnf();
        assert_eq!(n, CC::or([CC::atom(0, Rel::Lt, 5), CC::atom(0, Rel::Gt, 8)]));
        assert!(!CC::Not(Box::new(CC::le(0, 3))).is_closed());
        assert!(CC::eq(0, 2).is_closed());
    }

    #[test]
    fn negated_equality_is_disjunction() {
        let n = CC::Not(Box::new(CC::eq(0, 2))).nnf();
        for (v, expect) in [(1, true), (2, false), (3, true)] {
            assert_eq!(n.eval(&ClockValuation::from_integers(&[v])), expect);
        }
    }

    #[test]
    fn display_round_trip_shape() {
        let names = vec!["x".to_string(), "y".to_string()];
        let cc = CC::or([CC::and([CC::ge(0, 5), CC::le(0, 8)]), CC::diff(0, 1, Rel::Lt, 2)]);
        assert_eq!(cc.display(&names).to_string(), "x>=5 && x<=8 || x-y<2");
    }
}
