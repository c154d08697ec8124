//! Difference-bound matrices.
//!
//! Index 0 is the reference clock; automaton clock `k` lives at index
//! `k + 1`. Entry `(i, j)` bounds `x_i - x_j`. Bounds are encoded as a single
//! integer: `2c + 1` for `≤ c`, `2c` for `< c`, and [`INF`] for no bound, so
//! that numeric order coincides with tightness.

use std::fmt;

use num_traits::Zero;

use crate::constraint::{Atom, Clock, ClockConstraint, ClockValuation, Rel, Q};

pub type Raw = i64;

pub const INF: Raw = i64::MAX;
pub const LE_ZERO: Raw = 1;

pub fn le(c: i64) -> Raw {
    2 * c + 1
}

pub fn lt(c: i64) -> Raw {
    2 * c
}

pub fn bound_value(r: Raw) -> i64 {
    r >> 1
}

pub fn is_strict(r: Raw) -> bool {
    r & 1 == 0
}

/// Complement of `x_i - x_j ≺ c`, expressed as a bound on `x_j - x_i`.
pub fn negate(r: Raw) -> Raw {
    debug_assert!(r != INF);
    1 - r
}

pub fn add(a: Raw, b: Raw) -> Raw {
    if a == INF || b == INF {
        INF
    } else {
        (bound_value(a) + bound_value(b)) * 2 + (a & b & 1)
    }
}

fn bound_holds(r: Raw, value: Q) -> bool {
    if r == INF {
        return true;
    }
    let c = Q::from_integer(bound_value(r));
    if is_strict(r) {
        value < c
    } else {
        value <= c
    }
}

/// A canonical (shortest-path closed) DBM, or the empty zone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Zone {
    dim: usize,
    m: Vec<Raw>,
    empty: bool,
}

impl Zone {
    /// All non-negative valuations over `clocks` clocks.
    pub fn universe(clocks: usize) -> Self {
        let dim = clocks + 1;
        let mut m = vec![INF; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = LE_ZERO;
            m[i] = LE_ZERO; // x_0 - x_i <= 0
        }
        Zone { dim, m, empty: false }
    }

    /// The single zero valuation.
    pub fn zero(clocks: usize) -> Self {
        let dim = clocks + 1;
        Zone { dim, m: vec![LE_ZERO; dim * dim], empty: false }
    }

    pub fn empty(clocks: usize) -> Self {
        let mut z = Self::universe(clocks);
        z.empty = true;
        z
    }

    /// Zone of a conjunction of atoms.
    pub fn from_atoms<'a>(clocks: usize, atoms: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut z = Self::universe(clocks);
        for a in atoms {
            z.tighten_atom(a);
        }
        z.close();
        z
    }

    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Raw {
        self.m[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, r: Raw) {
        self.m[i * self.dim + j] = r;
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Tighten entry `(i, j)` without re-closing.
    pub fn tighten(&mut self, i: usize, j: usize, r: Raw) {
        if r < self.get(i, j) {
            self.set(i, j, r);
        }
    }

    fn tighten_atom(&mut self, a: &Atom) {
        let x = a.left + 1;
        let y = a.right.map(|r| r + 1).unwrap_or(0);
        let c = a.constant;
        match a.rel {
            Rel::Le => self.tighten(x, y, le(c)),
            Rel::Lt => self.tighten(x, y, lt(c)),
            Rel::Ge => self.tighten(y, x, le(-c)),
            Rel::Gt => self.tighten(y, x, lt(-c)),
            Rel::Eq => {
                self.tighten(x, y, le(c));
                self.tighten(y, x, le(-c));
            }
        }
    }

    /// Floyd–Warshall closure; sets the empty flag on a negative cycle.
    pub fn close(&mut self) {
        if self.empty {
            return;
        }
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.m[i * n + k];
                if ik == INF {
                    continue;
                }
                for j in 0..n {
                    let cand = add(ik, self.m[k * n + j]);
                    if cand < self.m[i * n + j] {
                        self.m[i * n + j] = cand;
                    }
                }
            }
            if (0..n).any(|i| self.m[i * n + i] < LE_ZERO) {
                self.empty = true;
                return;
            }
        }
        if (0..n).any(|i| self.m[i * n + i] < LE_ZERO) {
            self.empty = true;
        }
    }

    /// Restrict to `x_i - x_j ≺ r` and re-close.
    pub fn constrain(&self, i: usize, j: usize, r: Raw) -> Self {
        let mut z = self.clone();
        if z.empty || r >= z.get(i, j) {
            return z;
        }
        z.set(i, j, r);
        z.close();
        z
    }

    pub fn intersect(&self, other: &Zone) -> Zone {
        assert_eq!(self.dim, other.dim, "zone dimension mismatch");
        if self.empty || other.empty {
            return Zone::empty(self.clocks());
        }
        let mut z = self.clone();
        let mut changed = false;
        for (a, &b) in z.m.iter_mut().zip(&other.m) {
            if b < *a {
                *a = b;
                changed = true;
            }
        }
        if changed {
            z.close();
        }
        z
    }

    /// Delay successors: upper bounds on single clocks removed.
    pub fn future(&self) -> Zone {
        let mut z = self.clone();
        if z.empty {
            return z;
        }
        for i in 1..self.dim {
            z.set(i, 0, INF);
        }
        z
    }

    /// Delay predecessors.
    pub fn past(&self) -> Zone {
        let mut z = self.clone();
        if z.empty {
            return z;
        }
        let n = self.dim;
        for j in 1..n {
            let mut b = LE_ZERO;
            for i in 1..n {
                b = b.min(self.get(i, j));
            }
            z.set(0, j, b);
        }
        z.close();
        z
    }

    /// Image under `t[rs ↦ 0]`.
    pub fn reset(&self, rs: &[Clock]) -> Zone {
        let mut z = self.clone();
        if z.empty {
            return z;
        }
        let n = self.dim;
        for &c in rs {
            let x = c + 1;
            for j in 0..n {
                let v0j = z.get(0, j);
                let vj0 = z.get(j, 0);
                z.set(x, j, v0j);
                z.set(j, x, vj0);
            }
            z.set(x, x, LE_ZERO);
        }
        z
    }

    /// Remove all constraints on the given clocks (keeping `x ≥ 0`).
    pub fn free(&self, rs: &[Clock]) -> Zone {
        let mut z = self.clone();
        if z.empty {
            return z;
        }
        let n = self.dim;
        for &c in rs {
            let x = c + 1;
            for j in 0..n {
                if j != x {
                    z.set(x, j, INF);
                    let vj0 = z.get(j, 0);
                    z.set(j, x, vj0);
                }
            }
            z.set(0, x, LE_ZERO);
        }
        z.close();
        z
    }

    /// Pre-image under `t[rs ↦ 0]`: all `t` whose reset lands in `self`.
    pub fn reset_preimage(&self, rs: &[Clock]) -> Zone {
        let mut z = self.clone();
        for &c in rs {
            z = z.constrain(c + 1, 0, LE_ZERO);
        }
        z.free(rs)
    }

    /// `self ⊇ other`.
    pub fn includes(&self, other: &Zone) -> bool {
        assert_eq!(self.dim, other.dim);
        if other.empty {
            return true;
        }
        if self.empty {
            return false;
        }
        self.m.iter().zip(&other.m).all(|(a, b)| b <= a)
    }

    /// Smallest zone containing both.
    pub fn hull(&self, other: &Zone) -> Zone {
        if self.empty {
            return other.clone();
        }
        if other.empty {
            return self.clone();
        }
        let m = self.m.iter().zip(&other.m).map(|(a, b)| *a.max(b)).collect();
        Zone { dim: self.dim, m, empty: false }
    }

    pub fn contains(&self, t: &ClockValuation) -> bool {
        if self.empty {
            return false;
        }
        assert_eq!(t.len() + 1, self.dim);
        let val = |i: usize| if i == 0 { Q::zero() } else { t.get(i - 1) };
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && !bound_holds(self.get(i, j), val(i) - val(j)) {
                    return false;
                }
            }
        }
        true
    }

    /// Some valuation in the zone, preferring the smallest attainable values.
    pub fn sample(&self) -> Option<ClockValuation> {
        if self.empty {
            return None;
        }
        let mut vals = vec![Q::zero()];
        for i in 1..self.dim {
            let (mut lo, mut lo_strict) = (Q::zero(), false);
            let mut hi: Option<(Q, bool)> = None;
            for (j, &vj) in vals.iter().enumerate() {
                let down = self.get(j, i);
                if down != INF {
                    let c = vj - Q::from_integer(bound_value(down));
                    if c > lo || (c == lo && is_strict(down)) {
                        lo = c;
                        lo_strict = is_strict(down);
                    }
                }
                let up = self.get(i, j);
                if up != INF {
                    let c = vj + Q::from_integer(bound_value(up));
                    match hi {
                        Some((h, hs)) if h < c || (h == c && hs) => {}
                        _ => hi = Some((c, is_strict(up))),
                    }
                }
            }
            let v = if !lo_strict {
                lo
            } else {
                match hi {
                    Some((h, _)) => (lo + h) / Q::from_integer(2),
                    None => lo + Q::from_integer(1),
                }
            };
            vals.push(v);
        }
        Some(ClockValuation::new(vals[1..].to_vec()))
    }

    /// Classic maximal-constant extrapolation (`Extra_M`).
    pub fn extrapolate(&self, max: &[i64]) -> Zone {
        let mut z = self.clone();
        if z.empty {
            return z;
        }
        let n = self.dim;
        let bound = |i: usize| if i == 0 { 0 } else { max[i - 1] };
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let r = z.get(i, j);
                if r == INF {
                    continue;
                }
                if r > le(bound(i)) {
                    z.set(i, j, INF);
                    changed = true;
                } else if r < lt(-bound(j)) {
                    z.set(i, j, lt(-bound(j)));
                    changed = true;
                }
            }
        }
        if changed {
            z.close();
        }
        z
    }

    /// Embed into a larger clock space, placing this zone's clocks at
    /// `offset..offset+clocks` and leaving the others unconstrained.
    pub fn embed(&self, total_clocks: usize, offset: usize) -> Zone {
        if self.empty {
            return Zone::empty(total_clocks);
        }
        let mut z = Zone::universe(total_clocks);
        let map = |i: usize| if i == 0 { 0 } else { i + offset };
        for i in 0..self.dim {
            for j in 0..self.dim {
                z.tighten(map(i), map(j), self.get(i, j));
            }
        }
        z.close();
        z
    }

    /// Project onto clocks `offset..offset+clocks`.
    pub fn project(&self, offset: usize, clocks: usize) -> Zone {
        if self.empty {
            return Zone::empty(clocks);
        }
        let mut z = Zone::universe(clocks);
        let map = |i: usize| if i == 0 { 0 } else { i + offset };
        for i in 0..=clocks {
            for j in 0..=clocks {
                z.set(i, j, self.get(map(i), map(j)));
            }
        }
        z
    }

    /// The set `{d ≥ 0 : t + d ∈ self}` as an interval, or `None` if empty.
    pub fn delay_window(&self, t: &ClockValuation) -> Option<DelayWindow> {
        if self.empty {
            return None;
        }
        // Diagonals are invariant under delay.
        for i in 1..self.dim {
            for j in 1..self.dim {
                if i != j && !bound_holds(self.get(i, j), t.get(i - 1) - t.get(j - 1)) {
                    return None;
                }
            }
        }
        let mut w = DelayWindow { lo: Q::zero(), lo_strict: false, hi: None };
        for i in 1..self.dim {
            let v = t.get(i - 1);
            // upper: v + d ≺ c
            let up = self.get(i, 0);
            if up != INF {
                let c = Q::from_integer(bound_value(up)) - v;
                let strict = is_strict(up);
                match w.hi {
                    Some((h, hs)) if h < c || (h == c && hs) => {}
                    _ => w.hi = Some((c, strict)),
                }
            }
            // lower: -(v + d) ≺ c  =>  d ≻ -c - v
            let lo = self.get(0, i);
            if lo != INF {
                let c = -Q::from_integer(bound_value(lo)) - v;
                let strict = is_strict(lo);
                if c > w.lo || (c == w.lo && strict) {
                    w.lo = c;
                    w.lo_strict = strict;
                }
            }
        }
        if w.lo < Q::zero() {
            w.lo = Q::zero();
            w.lo_strict = false;
        }
        match w.hi {
            Some((h, hs)) if h < w.lo || (h == w.lo && (hs || w.lo_strict)) => None,
            _ => Some(w),
        }
    }

    /// Entries `(i, j)` of a minimal set of bounds that, together with
    /// non-negativity of the clocks, define the zone.
    pub fn minimal_bounds(&self) -> Vec<(usize, usize)> {
        if self.empty {
            return Vec::new();
        }
        let n = self.dim;
        // Indices joined by a zero-weight cycle move in lockstep.
        let mut rep: Vec<usize> = (0..n).collect();
        for i in 0..n {
            if rep[i] != i {
                continue;
            }
            for j in i + 1..n {
                if rep[j] == j && add(self.get(i, j), self.get(j, i)) == LE_ZERO {
                    rep[j] = i;
                }
            }
        }
        let mut keep = Vec::new();
        for i in 0..n {
            if rep[i] != i {
                continue;
            }
            let class: Vec<usize> = (0..n).filter(|&j| rep[j] == i).collect();
            if class.len() > 1 {
                for k in 0..class.len() {
                    keep.push((class[k], class[(k + 1) % class.len()]));
                }
            }
        }
        let reps: Vec<usize> = (0..n).filter(|&i| rep[i] == i).collect();
        for &i in &reps {
            for &j in &reps {
                let r = self.get(i, j);
                if i == j || r == INF {
                    continue;
                }
                let implied = reps.iter().any(|&k| k != i && k != j && add(self.get(i, k), self.get(k, j)) <= r);
                if !implied {
                    keep.push((i, j));
                }
            }
        }
        // Lower bounds of zero come with the clock domain.
        keep.retain(|&(i, j)| !(i == 0 && self.get(i, j) == LE_ZERO));
        keep
    }

    /// The conjunction of the zone's non-redundant bounds.
    pub fn to_constraint(&self) -> ClockConstraint {
        if self.empty {
            return ClockConstraint::False;
        }
        let keep = self.minimal_bounds();
        let mut parts = Vec::new();
        let mut done = vec![false; keep.len()];
        for (k, &(i, j)) in keep.iter().enumerate() {
            if done[k] {
                continue;
            }
            done[k] = true;
            let r = self.get(i, j);
            // Pair opposite non-strict bounds into an equality.
            if let Some(k2) = keep.iter().position(|&e| e == (j, i)) {
                if !done[k2] && !is_strict(r) && !is_strict(self.get(j, i))
                    && bound_value(r) == -bound_value(self.get(j, i))
                {
                    done[k2] = true;
                    parts.push(bound_atom(i, j, r, true));
                    continue;
                }
            }
            parts.push(bound_atom(i, j, r, false));
        }
        ClockConstraint::and(parts)
    }
}

/// Atom for `x_i - x_j ≺ r` with non-negative constant where possible.
fn bound_atom(i: usize, j: usize, r: Raw, equality: bool) -> ClockConstraint {
    let c = bound_value(r);
    let strict = is_strict(r);
    let (upper, lower) = if strict { (Rel::Lt, Rel::Gt) } else { (Rel::Le, Rel::Ge) };
    let clk = |k: usize| k - 1;
    match (i, j) {
        (0, j) => {
            // -x_j ≺ c  =>  x_j ≻ -c
            let rel = if equality { Rel::Eq } else { lower };
            ClockConstraint::atom(clk(j), rel, -c)
        }
        (i, 0) => ClockConstraint::atom(clk(i), if equality { Rel::Eq } else { upper }, c),
        (i, j) => {
            if equality {
                if c >= 0 {
                    ClockConstraint::diff(clk(i), clk(j), Rel::Eq, c)
                } else {
                    ClockConstraint::diff(clk(j), clk(i), Rel::Eq, -c)
                }
            } else if c >= 0 {
                ClockConstraint::diff(clk(i), clk(j), upper, c)
            } else {
                ClockConstraint::diff(clk(j), clk(i), lower, -c)
            }
        }
    }
}

/// Interval of admissible delays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayWindow {
    pub lo: Q,
    pub lo_strict: bool,
    /// Upper end and strictness; `None` for unbounded.
    pub hi: Option<(Q, bool)>,
}

impl DelayWindow {
    /// A canonical representative: the lower end when attainable, otherwise
    /// a midpoint (or `lo + 1` for unbounded windows).
    pub fn pick(&self) -> Q {
        if !self.lo_strict {
            return self.lo;
        }
        match self.hi {
            Some((h, _)) => (self.lo + h) / Q::from_integer(2),
            None => self.lo + Q::from_integer(1),
        }
    }

    pub fn contains(&self, d: Q) -> bool {
        let lo_ok = if self.lo_strict { d > self.lo } else { d >= self.lo };
        let hi_ok = match self.hi {
            None => true,
            Some((h, true)) => d < h,
            Some((h, false)) => d <= h,
        };
        lo_ok && hi_ok
    }
}

impl fmt::Debug for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "Zone(empty)");
        }
        let names: Vec<String> = (0..self.clocks()).map(|i| format!("c{i}")).collect();
        write!(f, "Zone({})", self.to_constraint().display(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ClockConstraint as CC;

    fn zone_of(clocks: usize, cc: &CC) -> Zone {
        match cc {
            CC::True => Zone::universe(clocks),
            CC::And(ps) => {
                let atoms: Vec<&Atom> = ps
                    .iter()
                    .map(|p| match p {
                        CC::Atom(a) => a,
                        _ => panic!("conjunction of atoms expected"),
                    })
                    .collect();
                Zone::from_atoms(clocks, atoms)
            }
            CC::Atom(a) => Zone::from_atoms(clocks, [a]),
            _ => panic!("conjunctive constraint expected"),
        }
    }

    #[test]
    fn conjoin_with_universe_is_identity() {
        let z = zone_of(2, &CC::and([CC::le(0, 8), CC::diff(0, 1, Rel::Le, 1)]));
        assert_eq!(z.intersect(&Zone::universe(2)), z);
    }

    #[test]
    fn conjoin_finish_guard() {
        let a = zone_of(1, &CC::le(0, 8));
        let b = zone_of(1, &CC::ge(0, 5));
        let z = a.intersect(&b);
        let names = vec!["x".to_string()];
        assert_eq!(z.to_constraint().display(&names).to_string(), "x>=5 && x<=8");
        assert!(zone_of(1, &CC::le(0, 2)).intersect(&zone_of(1, &CC::ge(0, 3))).is_empty());
    }

    #[test]
    fn future_of_origin_is_diagonal() {
        let f = Zone::zero(2).future();
        let expect = zone_of(2, &CC::diff(0, 1, Rel::Eq, 0));
        assert_eq!(f, expect);
        assert_eq!(f.future(), f);
    }

    #[test]
    fn future_keeps_diagonals() {
        let z = zone_of(2, &CC::and([CC::le(0, 8), CC::diff(0, 1, Rel::Le, 1)]));
        assert_eq!(z.future(), zone_of(2, &CC::diff(0, 1, Rel::Le, 1)));
    }

    #[test]
    fn reset_of_interval() {
        let z = zone_of(2, &CC::and([CC::ge(0, 5), CC::le(0, 8)]));
        let r = z.reset(&[0]);
        assert_eq!(r, zone_of(2, &CC::eq(0, 0)));
        assert_eq!(z.reset(&[]), z);
    }

    #[test]
    fn extrapolation_widens_large_bounds() {
        let z = zone_of(1, &CC::and([CC::ge(0, 7), CC::le(0, 9)]));
        let e = z.extrapolate(&[3]);
        assert!(e.includes(&z));
        assert!(e.contains(&ClockValuation::from_integers(&[100])));
        assert!(!e.contains(&ClockValuation::from_integers(&[3])));
    }

    #[test]
    fn delay_window_bounds() {
        let z = zone_of(1, &CC::and([CC::atom(0, Rel::Gt, 2), CC::le(0, 5)]));
        let w = z.delay_window(&ClockValuation::from_integers(&[1])).unwrap();
        assert_eq!(w.lo, Q::from_integer(1));
        assert!(w.lo_strict);
        assert_eq!(w.hi, Some((Q::from_integer(4), false)));
        assert!(z.contains(&ClockValuation::from_integers(&[1]).delay(w.pick())));
        assert!(z.delay_window(&ClockValuation::from_integers(&[6])).is_none());
    }
}
