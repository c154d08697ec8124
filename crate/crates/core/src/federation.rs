//! Finite unions of zones.
//!
//! Boolean clock constraints normalize to federations; complement and
//! subtraction make the ⊥/⊤ region algebra of the semantics computable.

use std::fmt;

use crate::constraint::{Clock, ClockConstraint, ClockValuation};
use crate::zone::{self, Zone};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Federation {
    clocks: usize,
    zones: Vec<Zone>,
}

impl Federation {
    pub fn empty(clocks: usize) -> Self {
        Federation { clocks, zones: Vec::new() }
    }

    pub fn universe(clocks: usize) -> Self {
        Federation::from_zone(Zone::universe(clocks))
    }

    pub fn from_zone(z: Zone) -> Self {
        let clocks = z.clocks();
        let zones = if z.is_empty() { Vec::new() } else { vec![z] };
        Federation { clocks, zones }
    }

    pub fn from_zones(clocks: usize, zones: impl IntoIterator<Item = Zone>) -> Self {
        let mut f = Federation::empty(clocks);
        for z in zones {
            f.add(z);
        }
        f
    }

    /// Normalize a boolean constraint to a union of zones (DNF over atoms).
    pub fn from_constraint(clocks: usize, cc: &ClockConstraint) -> Self {
        Self::build(clocks, &cc.nnf())
    }

    fn build(clocks: usize, cc: &ClockConstraint) -> Self {
        match cc {
            ClockConstraint::True => Federation::universe(clocks),
            ClockConstraint::False => Federation::empty(clocks),
            ClockConstraint::Atom(a) => Federation::from_zone(Zone::from_atoms(clocks, [a])),
            ClockConstraint::And(ps) => {
                let mut acc = Federation::universe(clocks);
                for p in ps {
                    acc = acc.intersect(&Self::build(clocks, p));
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            ClockConstraint::Or(ps) => {
                let mut acc = Federation::empty(clocks);
                for p in ps {
                    acc = acc.union(&Self::build(clocks, p));
                }
                acc
            }
            ClockConstraint::Not(_) => unreachable!("constraint not in negation normal form"),
        }
    }

    pub fn clocks(&self) -> usize {
        self.clocks
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    /// Add a zone, dropping it if subsumed and dropping zones it subsumes.
    pub fn add(&mut self, z: Zone) {
        if z.is_empty() || self.zones.iter().any(|w| w.includes(&z)) {
            return;
        }
        self.zones.retain(|w| !z.includes(w));
        self.zones.push(z);
    }

    pub fn union(&self, other: &Federation) -> Federation {
        let mut f = self.clone();
        for z in &other.zones {
            f.add(z.clone());
        }
        f
    }

    pub fn intersect(&self, other: &Federation) -> Federation {
        let mut f = Federation::empty(self.clocks);
        for a in &self.zones {
            for b in &other.zones {
                f.add(a.intersect(b));
            }
        }
        f
    }

    pub fn intersect_zone(&self, z: &Zone) -> Federation {
        let mut f = Federation::empty(self.clocks);
        for a in &self.zones {
            f.add(a.intersect(z));
        }
        f
    }

    /// `z \ w` as disjoint zones.
    fn zone_minus(z: &Zone, w: &Zone) -> Vec<Zone> {
        if z.intersect(w).is_empty() {
            return vec![z.clone()];
        }
        let mut out = Vec::new();
        let mut rest = z.clone();
        for (i, j) in w.minimal_bounds() {
            let r = w.get(i, j);
            if r >= rest.get(i, j) {
                continue;
            }
            let outside = rest.constrain(j, i, zone::negate(r));
            if !outside.is_empty() {
                out.push(outside);
            }
            rest = rest.constrain(i, j, r);
            if rest.is_empty() {
                return out;
            }
        }
        out
    }

    pub fn subtract_zone(&self, w: &Zone) -> Federation {
        let mut f = Federation::empty(self.clocks);
        for z in &self.zones {
            for piece in Self::zone_minus(z, w) {
                f.add(piece);
            }
        }
        f
    }

    pub fn subtract(&self, other: &Federation) -> Federation {
        let mut acc = self.clone();
        for w in &other.zones {
            if acc.is_empty() {
                break;
            }
            acc = acc.subtract_zone(w);
        }
        acc
    }

    /// Merge pairs of zones whose union is convex.
    pub fn reduce(&self) -> Federation {
        let mut zones = self.zones.clone();
        let mut i = 0;
        while i < zones.len() {
            let mut j = i + 1;
            while j < zones.len() {
                let h = zones[i].hull(&zones[j]);
                let rest = Self::zone_minus(&h, &zones[i]);
                if rest.iter().all(|r| Self::zone_minus(r, &zones[j]).is_empty()) {
                    zones[i] = h;
                    zones.swap_remove(j);
                    j = i + 1;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        let mut f = Federation::empty(self.clocks);
        for z in zones {
            f.add(z);
        }
        f
    }

    pub fn complement(&self) -> Federation {
        Federation::universe(self.clocks).subtract(self)
    }

    pub fn is_subset(&self, other: &Federation) -> bool {
        self.subtract(other).is_empty()
    }

    pub fn equals(&self, other: &Federation) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    pub fn map(&self, f: impl Fn(&Zone) -> Zone) -> Federation {
        let mut out = Federation::empty(self.clocks);
        for z in &self.zones {
            out.add(f(z));
        }
        out
    }

    pub fn future(&self) -> Federation {
        self.map(Zone::future)
    }

    pub fn past(&self) -> Federation {
        self.map(Zone::past)
    }

    pub fn reset(&self, rs: &[Clock]) -> Federation {
        self.map(|z| z.reset(rs))
    }

    pub fn reset_preimage(&self, rs: &[Clock]) -> Federation {
        self.map(|z| z.reset_preimage(rs))
    }

    pub fn extrapolate(&self, max: &[i64]) -> Federation {
        self.map(|z| z.extrapolate(max))
    }

    pub fn embed(&self, total: usize, offset: usize) -> Federation {
        let mut out = Federation::empty(total);
        for z in &self.zones {
            out.add(z.embed(total, offset));
        }
        out
    }

    pub fn contains(&self, t: &ClockValuation) -> bool {
        self.zones.iter().any(|z| z.contains(t))
    }

    pub fn to_constraint(&self) -> ClockConstraint {
        if self.zones.len() == 1 && self.zones[0] == Zone::universe(self.clocks) {
            return ClockConstraint::True;
        }
        ClockConstraint::or(self.zones.iter().map(Zone::to_constraint))
    }
}

impl fmt::Debug for Federation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.clocks).map(|i| format!("c{i}")).collect();
        write!(f, "Fed({})", self.to_constraint().display(&names))
    }
}
