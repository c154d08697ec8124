//! Random small automata with closed, diagonal-free constraints.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::constraint::{ClockConstraint as CC, Rel};
use crate::tioa::{Edge, Location, Tioa};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_locations: usize,
    pub max_clocks: usize,
    pub max_constant: i64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// At most one edge per location and action.
    pub deterministic: bool,
    /// Probability that a location has an edge for a given action.
    pub edge_probability: f64,
    /// Probability of a bound on the invariant or co-invariant.
    pub bound_probability: f64,
}

impl GenConfig {
    pub fn new(inputs: &[&str], outputs: &[&str]) -> Self {
        GenConfig {
            max_locations: 3,
            max_clocks: 2,
            max_constant: 3,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            deterministic: true,
            edge_probability: 0.6,
            bound_probability: 0.35,
        }
    }
}

fn bound(rng: &mut impl Rng, clocks: usize, cfg: &GenConfig) -> CC {
    if rng.gen_bool(cfg.bound_probability) {
        CC::le(rng.gen_range(0..clocks), rng.gen_range(1..=cfg.max_constant))
    } else {
        CC::True
    }
}

fn guard(rng: &mut impl Rng, clocks: usize, cfg: &GenConfig) -> CC {
    let n = rng.gen_range(0..=2);
    CC::and((0..n).map(|_| {
        let rel = *[Rel::Le, Rel::Ge, Rel::Eq].choose(rng).unwrap();
        CC::atom(rng.gen_range(0..clocks), rel, rng.gen_range(0..=cfg.max_constant))
    }))
}

pub fn random_tioa(rng: &mut impl Rng, name: &str, cfg: &GenConfig) -> Tioa {
    let mut a = Tioa::new(name);
    let clocks = rng.gen_range(1..=cfg.max_clocks);
    a.clocks = ["x", "y", "z"].iter().take(clocks).map(|s| s.to_string()).collect();
    a.inputs = cfg.inputs.iter().cloned().collect();
    a.outputs = cfg.outputs.iter().cloned().collect();
    let n = rng.gen_range(1..=cfg.max_locations);
    for i in 0..n {
        let mut l = Location::new(format!("l{i}"));
        l.invariant = bound(rng, clocks, cfg);
        l.co_invariant = bound(rng, clocks, cfg);
        a.locations.push(l);
    }
    let actions: Vec<String> = cfg.inputs.iter().chain(&cfg.outputs).cloned().collect();
    for src in 0..n {
        for act in &actions {
            if !rng.gen_bool(cfg.edge_probability) {
                continue;
            }
            let count = if cfg.deterministic { 1 } else { rng.gen_range(1..=2) };
            for _ in 0..count {
                let resets = (0..clocks).filter(|_| rng.gen_bool(0.4)).collect();
                a.edges.push(Edge {
                    source: src,
                    guard: guard(rng, clocks, cfg),
                    action: act.clone(),
                    resets,
                    target: rng.gen_range(0..n),
                });
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::check_deterministic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_automata_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = GenConfig::new(&["a"], &["b"]);
        for i in 0..200 {
            let a = random_tioa(&mut rng, &format!("r{i}"), &cfg);
            assert!(a.validate().is_empty(), "{:?}", a.validate());
            assert!(a.is_closed() && !a.has_diagonals());
            let _ = check_deterministic(&a);
        }
    }
}
