//! Seeded generators for the randomized batteries.

use std::sync::Arc;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::family::IncreasingFamily;
use crate::graph::WeightedGraph;
use crate::pipeline::{self, GuardMode, PipelineInstance};
use crate::rational::{self, Probability, Rational};
use crate::singleton::SingletonInstance;
use crate::star_forest::Tr2Instance;
use crate::subset::Subset;

/// A proper family on `n <= max_n` elements with 1 to 8 generators.
pub fn random_family<R: Rng>(rng: &mut R, max_n: usize) -> IncreasingFamily {
    let n = rng.gen_range(1..=max_n.max(1));
    let count = rng.gen_range(1..=8);
    let full = Subset::full(n).bits();
    let sets: Vec<Subset> = (0..count)
        .map(|_| {
            // Small generators keep the thresholds away from 0 and 1.
            let size = rng.gen_range(1..=n.min(4));
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            Subset(idx[..size].iter().fold(0u64, |a, &v| a | 1 << v) & full)
        })
        .collect();
    IncreasingFamily::new(n, sets).expect("generators are nonempty")
}

/// Random simple graph `G(n, q)`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, q: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(q) {
                edges.push((a, b));
            }
        }
    }
    WeightedGraph::unweighted(n, &edges).expect("simple")
}

/// `n <= 16`, weights `a/b` with `a <= 20`, `b <= 8` (some zero),
/// `J in [6, 64]` with denominator up to 4, and `J p = r/16` with `1 <= r <= 16`.
pub fn random_singleton<R: Rng>(rng: &mut R) -> SingletonInstance {
    let n = rng.gen_range(2..=16);
    let mut zeta: Vec<Rational> = (0..n)
        .map(|_| if rng.gen_bool(0.1) { Rational::zero() } else { rational::rat(rng.gen_range(1..=20), rng.gen_range(1..=8)) })
        .collect();
    if zeta.iter().all(Zero::is_zero) {
        zeta[0] = rational::int(1);
    }
    let j = rational::rat(rng.gen_range(24..=256), 4);
    let jp = rational::rat(rng.gen_range(1..=16), 16);
    let p = Probability::new(&jp / &j).expect("J p <= 1 and J >= 6");
    SingletonInstance::new(zeta, p, j).expect("J > 2e")
}

/// A graph on 9 to 14 vertices with at least 32 edges and parameters with
/// `T = 32`, `J >= 8e`, `|G| p^2 <= mu` and `c = T/(mu J^2) >= 64e/J`.
pub fn random_tr2<R: Rng>(rng: &mut R) -> Tr2Instance {
    let n = rng.gen_range(9..=14);
    let graph = loop {
        let q = rng.gen_range(0.55..1.0);
        let g = random_graph(rng, n, q);
        if g.edge_count() >= 32 {
            break g;
        }
    };
    let e_up = rational::e_upper();
    let t = rational::int(32);
    let j = rational::from_u64(rng.gen_range(22..=80));
    let edges = rational::from_u64(graph.edge_count() as u64);
    // |G| p^2 <= T/(64 e J) for p = 1/d with d^2 >= 64 e J |G| / T; also J p <= 1.
    let need = rational::int(64) * &e_up * &j * &edges / &t;
    let mut d = rational::ceil(&rational::sqrt_floor_dyadic(&need, 8)).max(rational::ceil(&j));
    while rational::pow(&Rational::from_integer(d.clone()), 2) < need {
        d += 1;
    }
    let d = d * rng.gen_range(1..=3);
    let p = Probability::new(Rational::from_integer(1.into()) / Rational::from_integer(d)).expect("p <= 1");
    let lo = &edges * p.value() * p.value();
    let hi = &t / (rational::int(64) * &e_up * &j);
    let mu = match rng.gen_range(0..3) {
        0 => lo,
        1 => hi,
        _ => (lo + hi) / rational::int(2),
    };
    Tr2Instance::new(Arc::new(graph), p, j, mu, t).expect("T >= 32 is valid")
}

/// Positive weights `a/b` with `a, b <= 16`, about 10% zero weights.
pub fn random_weighted_graph<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> WeightedGraph {
    loop {
        let n = rng.gen_range(min_n..=max_n);
        let q = rng.gen_range(0.3..0.9);
        let g = random_graph(rng, n, q);
        if g.edge_count() == 0 {
            continue;
        }
        let w: Vec<Rational> = (0..g.edge_count())
            .map(|_| if rng.gen_bool(0.1) { Rational::zero() } else { rational::rat(rng.gen_range(1..=16), rng.gen_range(1..=16)) })
            .collect();
        if w.iter().all(Zero::is_zero) {
            continue;
        }
        return g.with_weights(w);
    }
}

/// Smallest integer `R` passing the theorem guard `R' >= 4096 e`.
pub fn theorem_r() -> Rational {
    rational::int(15747)
}

/// A weighted-pipeline instance on at most 12 vertices. `R` sits at the
/// theorem guard or, in reduced mode, in `[32, 96]`; `p = x/R'` with
/// `x = r/16`, `1 <= r <= 20`, so a few instances have `R' p > 1`.
pub fn random_pipeline<R: Rng>(rng: &mut R, mode: GuardMode) -> Result<PipelineInstance> {
    let g = random_weighted_graph(rng, 3, 12);
    let r = match mode {
        GuardMode::Theorem => theorem_r(),
        GuardMode::Reduced => rational::from_u64(rng.gen_range(32..=96)),
    };
    let r_prime = pipeline::reduced_r(&r);
    let x = rational::rat(rng.gen_range(1..=20), 16);
    let p = Probability::new((x / r_prime).min(rational::int(1)))?;
    PipelineInstance::new(g, p, r, mode)
}
