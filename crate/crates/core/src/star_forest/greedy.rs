//! Greedy extraction of good stars and witness selection.

use serde::Serialize;

use super::family::Star;
use super::schedule::Schedule;
use crate::graph::WeightedGraph;
use crate::subset::Subset;

/// One greedy step: the star `(center, leaves)` with `d = |leaves|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Extraction {
    pub center: usize,
    pub leaves: Subset,
    pub d: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub steps: Vec<Extraction>,
    pub residual: Subset,
}

impl Decomposition {
    pub fn sum_d_squared(&self) -> u64 {
        self.steps.iter().map(|s| s.d * s.d).sum()
    }
}

/// Repeatedly removes a largest good star `(v, N(v) ∩ U_j)` from the
/// current set, smallest center first among ties. `thresholds[v]` is
/// `ceil(J d_v p / 4)` with `d_v` the degree in the whole graph.
pub fn greedy_decompose(graph: &WeightedGraph, thresholds: &[u64], u: Subset) -> Decomposition {
    let mut rest = u;
    let mut steps = Vec::new();
    loop {
        let mut best: Option<(usize, Subset)> = None;
        for v in rest.iter() {
            let s = graph.neighbors(v).intersection(rest);
            if (s.len() as u64) < thresholds[v] {
                continue;
            }
            if best.is_none_or(|(_, b)| s.len() > b.len()) {
                best = Some((v, s));
            }
        }
        let Some((center, leaves)) = best else { break };
        steps.push(Extraction { center, leaves, d: leaves.len() as u64 });
        rest = rest.difference(leaves.with(center));
    }
    Decomposition { steps, residual: rest }
}

/// Bucket index of a step with `d` leaves: `i < k` for `d` in
/// `[2^(i-1), 2^i)`, and `k` for `d >= 2^(k-1)`. Steps with `d = 0` have none.
pub fn bucket_of(d: u64, k: u32) -> Option<u32> {
    if d == 0 {
        return None;
    }
    let i = 64 - d.leading_zeros();
    Some(i.min(k))
}

/// `|B_i|` for `i` in `1..=k` (index 0 unused).
pub fn bucket_sizes(dec: &Decomposition, k: u32) -> Vec<u64> {
    let mut sizes = vec![0u64; k as usize + 1];
    for s in &dec.steps {
        if let Some(i) = bucket_of(s.d, k) {
            sizes[i as usize] += 1;
        }
    }
    sizes
}

/// Premise of the bucket argument: `|B_k| >= 1` or `sum_{i<k} |B_i| 4^i >= T_0 / 2`.
pub fn dichotomy_premise(sizes: &[u64], k: u32, t0: u64) -> bool {
    let k = k as usize;
    if sizes[k] >= 1 {
        return true;
    }
    let s: u128 = (1..k).map(|i| sizes[i] as u128 * (1u128 << (2 * i))).sum();
    s >= (t0 as u128).div_ceil(2)
}

/// The first level `i` with `|B_i| >= b_i`.
pub fn qualifying_level(sizes: &[u64], schedule: &Schedule) -> Option<usize> {
    schedule.levels.iter().position(|lv| sizes[lv.i as usize] >= lv.b)
}

/// Witness from the first `b_i` steps of bucket `i`, each trimmed to its
/// `L_i^v` smallest-index leaves. `special_size(v)` gives `L_i^v`.
pub fn witness_from(dec: &Decomposition, k: u32, level: u32, b: u64, special_size: impl Fn(usize) -> u64) -> Option<Vec<Star>> {
    let mut stars = Vec::with_capacity(b as usize);
    for s in dec.steps.iter().filter(|s| bucket_of(s.d, k) == Some(level)).take(b as usize) {
        let want = special_size(s.center) as usize;
        if s.leaves.len() < want {
            return None;
        }
        let leaves: Subset = s.leaves.iter().take(want).collect();
        stars.push(Star { center: s.center, leaves });
    }
    (stars.len() as u64 == b).then_some(stars)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_has_no_steps() {
        let g = WeightedGraph::unweighted(3, &[(0, 1)]).unwrap();
        let dec = greedy_decompose(&g, &[1, 1, 1], Subset::EMPTY);
        assert!(dec.steps.is_empty());
    }

    #[test]
    fn single_star_is_taken_whole() {
        let edges: Vec<_> = (1..6).map(|v| (0, v)).collect();
        let g = WeightedGraph::unweighted(6, &edges).unwrap();
        let dec = greedy_decompose(&g, &[2, 1, 1, 1, 1, 1], Subset::full(6));
        assert_eq!(dec.steps, vec![Extraction { center: 0, leaves: Subset(0b111110), d: 5 }]);
        assert_eq!(dec.residual, Subset::EMPTY);
    }

    #[test]
    fn buckets() {
        assert_eq!(bucket_of(0, 3), None);
        assert_eq!(bucket_of(1, 3), Some(1));
        assert_eq!(bucket_of(2, 3), Some(2));
        assert_eq!(bucket_of(3, 3), Some(2));
        assert_eq!(bucket_of(4, 3), Some(3));
        assert_eq!(bucket_of(100, 3), Some(3));
        assert_eq!(bucket_of(100, 1), Some(1));
    }

    #[test]
    fn ties_prefer_smallest_center() {
        // Two disjoint edges: both endpoints of each have one neighbour.
        let g = WeightedGraph::unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        let dec = greedy_decompose(&g, &[1; 4], Subset::full(4));
        assert_eq!(dec.steps.iter().map(|s| s.center).collect::<Vec<_>>(), vec![0, 2]);
    }
}
