//! Timed words: alternating positive delays and actions.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::constraint::Q;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Delay(Q),
    Action(String),
}

/// A canonical timed word: delays are positive and never adjacent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimedWord(Vec<Letter>);

impl TimedWord {
    pub fn empty() -> Self {
        TimedWord(Vec::new())
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = TimedWord::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        match l {
            Letter::Delay(d) => self.push_delay(d),
            Letter::Action(a) => self.0.push(Letter::Action(a)),
        }
    }

    /// Append a delay, coalescing with a trailing delay. Zero is a no-op.
    pub fn push_delay(&mut self, d: Q) {
        assert!(d >= Q::zero(), "negative delay");
        if d.is_zero() {
            return;
        }
        if let Some(Letter::Delay(last)) = self.0.last_mut() {
            *last += d;
        } else {
            self.0.push(Letter::Delay(d));
        }
    }

    pub fn push_action(&mut self, a: impl Into<String>) {
        self.0.push(Letter::Action(a.into()));
    }

    pub fn with_delay(&self, d: Q) -> Self {
        let mut w = self.clone();
        w.push_delay(d);
        w
    }

    pub fn with_action(&self, a: &str) -> Self {
        let mut w = self.clone();
        w.push_action(a);
        w
    }

    pub fn concat(&self, other: &TimedWord) -> TimedWord {
        let mut w = self.clone();
        for l in &other.0 {
            w.push(l.clone());
        }
        w
    }

    /// Drop actions outside `keep`, coalescing the delays around them.
    pub fn project(&self, keep: &BTreeSet<String>) -> TimedWord {
        TimedWord::from_letters(
            self.0
                .iter()
                .filter(|l| match l {
                    Letter::Action(a) => keep.contains(a),
                    Letter::Delay(_) => true,
                })
                .cloned(),
        )
    }

    /// Total elapsed time.
    pub fn length(&self) -> Q {
        self.0
            .iter()
            .map(|l| match l {
                Letter::Delay(d) => *d,
                Letter::Action(_) => Q::zero(),
            })
            .sum()
    }

    pub fn action_count(&self) -> usize {
        self.0.iter().filter(|l| matches!(l, Letter::Action(_))).count()
    }

    pub fn last(&self) -> Option<&Letter> {
        self.0.last()
    }

    /// `self ≤ other`: `other = self ⌢ u` for some word `u`.
    pub fn is_prefix_of(&self, other: &TimedWord) -> bool {
        let n = self.0.len();
        if n == 0 {
            return true;
        }
        if n > other.0.len() || self.0[..n - 1] != other.0[..n - 1] {
            return false;
        }
        match (&self.0[n - 1], &other.0[n - 1]) {
            (Letter::Delay(a), Letter::Delay(b)) => a <= b,
            (a, b) => a == b,
        }
    }

    /// Prefixes ending at a letter boundary, shortest first, excluding
    /// `self`.
    pub fn strict_letter_prefixes(&self) -> impl Iterator<Item = TimedWord> + '_ {
        (0..self.0.len()).map(move |k| TimedWord(self.0[..k].to_vec()))
    }

    /// Remove the last letter.
    pub fn parent(&self) -> Option<TimedWord> {
        if self.0.is_empty() {
            None
        } else {
            Some(TimedWord(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for TimedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| match l {
                Letter::Delay(d) => fmt_q(d),
                Letter::Action(a) => a.clone(),
            })
            .collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

impl Serialize for TimedWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for l in &self.0 {
            match l {
                Letter::Action(a) => seq.serialize_element(a)?,
                Letter::Delay(d) if d.is_integer() => seq.serialize_element(&d.to_integer())?,
                Letter::Delay(d) => seq.serialize_element(&d.to_f64().unwrap_or(f64::NAN))?,
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for TimedWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
        let mut w = TimedWord::empty();
        for v in raw {
            match v {
                serde_json::Value::String(a) => w.push_action(a),
                serde_json::Value::Number(n) => {
                    let q = if let Some(i) = n.as_i64() {
                        Q::from_integer(i)
                    } else {
                        let f = n.as_f64().ok_or_else(|| de::Error::custom("bad number"))?;
                        Q::approximate_float(f).ok_or_else(|| de::Error::custom("bad delay"))?
                    };
                    if q <= Q::zero() {
                        return Err(de::Error::custom("delays must be positive"));
                    }
                    w.push_delay(q);
                }
                _ => return Err(de::Error::custom("expected a number or an action")),
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn d(n: i64, den: i64) -> Letter {
        Letter::Delay(q(n, den))
    }

    fn a(s: &str) -> Letter {
        Letter::Action(s.into())
    }

    #[test]
    fn concat_coalesces() {
        let w = TimedWord::from_letters([a("a"), d(141, 100)]);
        let v = TimedWord::from_letters([d(33, 100), a("b"), d(31415, 10000)]);
        let expect = TimedWord::from_letters([a("a"), d(174, 100), a("b"), d(31415, 10000)]);
        assert_eq!(w.concat(&v), expect);
        assert_eq!(w.concat(&TimedWord::empty()), w);
    }

    #[test]
    fn project_coalesces() {
        let w = TimedWord::from_letters([d(33, 100), a("a"), d(141, 100), a("b")]);
        let keep: BTreeSet<String> = ["b".to_string()].into();
        assert_eq!(w.project(&keep), TimedWord::from_letters([d(174, 100), a("b")]));
    }

    #[test]
    fn prefixes() {
        let w = TimedWord::from_letters([a("a"), d(3, 1)]);
        assert!(TimedWord::from_letters([a("a"), d(1, 1)]).is_prefix_of(&w));
        assert!(!TimedWord::from_letters([a("a"), d(4, 1)]).is_prefix_of(&w));
        assert!(TimedWord::from_letters([d(1, 2)]).is_prefix_of(&TimedWord::from_letters([d(1, 1), a("a")])));
    }

    #[test]
    fn json_round_trip() {
        let w = TimedWord::from_letters([d(1, 2), a("a"), d(3, 1)]);
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"[0.5,"a",3]"#);
        assert_eq!(serde_json::from_str::<TimedWord>(&s).unwrap(), w);
    }

    fn arb_word() -> impl Strategy<Value = TimedWord> {
        proptest::collection::vec(
            prop_oneof![
                (1i64..20, 1i64..4).prop_map(|(n, den)| d(n, den)),
                prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(a),
            ],
            0..8,
        )
        .prop_map(TimedWord::from_letters)
    }

    proptest! {
        #[test]
        fn canonical(w in arb_word()) {
            for pair in w.letters().windows(2) {
                prop_assert!(!matches!(pair, [Letter::Delay(_), Letter::Delay(_)]));
            }
        }

        #[test]
        fn concat_associative(x in arb_word(), y in arb_word(), z in arb_word()) {
            prop_assert_eq!(x.concat(&y).concat(&z), x.concat(&y.concat(&z)));
            prop_assert_eq!(x.concat(&y).length(), x.length() + y.length());
        }

        #[test]
        fn projection_keeps_length(w in arb_word()) {
            let keep: BTreeSet<String> = ["a".to_string()].into();
            prop_assert_eq!(w.project(&keep).length(), w.length());
            let all: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
            prop_assert_eq!(w.project(&all), w.clone());
        }
    }
}
