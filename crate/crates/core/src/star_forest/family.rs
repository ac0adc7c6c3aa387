//! The families `gamma(b, L)` of vertex-disjoint unions of `b` L-special stars.
//!
//! These families are never materialized as lists. Membership and search
//! are decided by backtracking, and the cost is either enumerated (small
//! graphs) or bounded by an elementary symmetric sum.

use std::collections::HashSet;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;
use crate::rational::{self, Probability, Rational};
use crate::subset::Subset;

/// A star `(center, leaves)` with `leaves ⊆ N(center)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Star {
    pub center: usize,
    pub leaves: Subset,
}

impl Star {
    pub fn vertices(&self) -> Subset {
        self.leaves.with(self.center)
    }
}

/// `ceil(J d_v p / 4)` per vertex: a star `(v, S)` is good iff `|S|` reaches it.
pub fn good_thresholds(graph: &WeightedGraph, j: &Rational, p: &Rational) -> Vec<u64> {
    let jp4 = j * p / rational::int(4);
    (0..graph.n())
        .map(|v| {
            let x = &jp4 * rational::from_u64(graph.degree(v) as u64);
            rational::ceil(&x).try_into().unwrap_or(u64::MAX)
        })
        .collect()
}

/// One part `gamma(b, L)` of a star-forest cover.
#[derive(Clone, Debug, PartialEq)]
pub struct StarForestPart {
    pub graph: Arc<WeightedGraph>,
    pub b: u64,
    pub l: u64,
    pub j: Rational,
    pub p: Probability,
    thresholds: Vec<u64>,
}

impl StarForestPart {
    pub fn new(graph: Arc<WeightedGraph>, b: u64, l: u64, j: Rational, p: Probability) -> Self {
        assert!(b >= 1 && l >= 1, "gamma(b, L) needs positive b and L");
        let thresholds = good_thresholds(&graph, &j, p.value());
        StarForestPart { graph, b, l, j, p, thresholds }
    }

    /// `L^v = max{L, ceil(J d_v p / 4)}`.
    pub fn special_size(&self, v: usize) -> u64 {
        self.l.max(self.thresholds[v])
    }

    pub fn is_special(&self, star: &Star) -> bool {
        star.center < self.graph.n()
            && !star.leaves.contains(star.center)
            && star.leaves.is_subset_of(self.graph.neighbors(star.center))
            && star.leaves.len() as u64 == self.special_size(star.center)
    }

    /// Checks a proposed decomposition: `b` pairwise disjoint L-special stars.
    pub fn is_valid_forest(&self, stars: &[Star]) -> bool {
        if stars.len() as u64 != self.b {
            return false;
        }
        let mut used = Subset::EMPTY;
        for s in stars {
            if !self.is_special(s) || !s.vertices().intersection(used).is_empty() {
                return false;
            }
            used = used.union(s.vertices());
        }
        true
    }

    /// Decides `w ∈ gamma(b, L)` by searching for a decomposition of `w`.
    pub fn decompose_member(&self, w: Subset) -> Option<Vec<Star>> {
        let mut acc = Vec::new();
        self.decompose(w, &mut acc).then_some(acc)
    }

    fn decompose(&self, rest: Subset, acc: &mut Vec<Star>) -> bool {
        let Some(x) = rest.first() else {
            return acc.len() as u64 == self.b;
        };
        if acc.len() as u64 >= self.b {
            return false;
        }
        // x is either a center or a leaf of some center y inside `rest`.
        let mut centers: Vec<usize> = vec![x];
        centers.extend(self.graph.neighbors(x).intersection(rest).iter());
        for c in centers {
            let size = self.special_size(c) as usize;
            let pool = self.graph.neighbors(c).intersection(rest);
            let (fixed, free) = if c == x { (Subset::EMPTY, pool) } else { (Subset::singleton(x), pool.without(x)) };
            if fixed.len() > size || free.len() + fixed.len() < size {
                continue;
            }
            for extra in free.combinations(size - fixed.len()) {
                let star = Star { center: c, leaves: extra.union(fixed) };
                acc.push(star);
                if self.decompose(rest.difference(star.vertices()), acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }

    /// Some member of `gamma(b, L)` inside `u`, with its decomposition.
    pub fn find_inside(&self, u: Subset) -> Option<Vec<Star>> {
        let mut acc = Vec::new();
        self.search(u, 0, &mut acc).then_some(acc)
    }

    fn search(&self, avail: Subset, from: usize, acc: &mut Vec<Star>) -> bool {
        let need = self.b - acc.len() as u64;
        if need == 0 {
            return true;
        }
        if (avail.len() as u64) < need * (self.l + 1) {
            return false;
        }
        for v in avail.iter().filter(|&v| v >= from) {
            let size = self.special_size(v) as usize;
            let pool = self.graph.neighbors(v).intersection(avail);
            if pool.len() < size {
                continue;
            }
            for leaves in pool.combinations(size) {
                let star = Star { center: v, leaves };
                acc.push(star);
                if self.search(avail.difference(star.vertices()), v + 1, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }

    /// All members, each listed once.
    pub fn members(&self) -> HashSet<Subset> {
        let mut out = HashSet::new();
        self.collect(self.graph.vertices(), 0, 0, Subset::EMPTY, &mut out);
        out
    }

    fn collect(&self, avail: Subset, from: usize, placed: u64, acc: Subset, out: &mut HashSet<Subset>) {
        if placed == self.b {
            out.insert(acc);
            return;
        }
        for v in avail.iter().filter(|&v| v >= from) {
            let size = self.special_size(v) as usize;
            let pool = self.graph.neighbors(v).intersection(avail);
            if pool.len() < size {
                continue;
            }
            for leaves in pool.combinations(size) {
                let star = Star { center: v, leaves };
                self.collect(avail.difference(star.vertices()), v + 1, placed + 1, acc.union(star.vertices()), out);
            }
        }
    }

    /// Exact `C(gamma(b, L)) = sum_W p^|W|` by enumeration.
    pub fn enumerated_cost(&self, p: &Rational) -> Rational {
        let pw = rational::powers(p, self.graph.n());
        self.members().iter().fold(Rational::zero(), |acc, w| acc + &pw[w.len()])
    }

    /// `q_v = p (e d_v p / L^v)^(L^v)`, with `e` rounded up since `q_v`
    /// must dominate the cost of the L-special stars at `v`.
    pub fn star_weights(&self, p: &Rational) -> Vec<Rational> {
        let e = rational::e_upper();
        (0..self.graph.n())
            .map(|v| {
                let lv = self.special_size(v);
                let base = &e * rational::from_u64(self.graph.degree(v) as u64) * p / rational::from_u64(lv);
                p * rational::pow(&base, lv)
            })
            .collect()
    }

    /// `e_b(q)`: the elementary symmetric sum of degree `b` of the star weights.
    pub fn symmetric_bound(&self, p: &Rational) -> Rational {
        elementary_symmetric(&self.star_weights(p), self.b)
    }
}

/// `e_k(x) = sum over k-subsets B of prod_{v in B} x_v`, by the usual DP.
pub fn elementary_symmetric(xs: &[Rational], k: u64) -> Rational {
    if k as usize > xs.len() {
        return Rational::zero();
    }
    let k = k as usize;
    let mut dp = vec![Rational::zero(); k + 1];
    dp[0] = rational::int(1);
    for (seen, x) in xs.iter().enumerate() {
        for j in (1..=k.min(seen + 1)).rev() {
            let add = &dp[j - 1] * x;
            dp[j] += add;
        }
    }
    dp[k].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn part(g: WeightedGraph, b: u64, l: u64) -> StarForestPart {
        StarForestPart::new(Arc::new(g), b, l, int(1), Probability::ratio(1, 100).unwrap())
    }

    fn brute_esym(xs: &[Rational], k: usize) -> Rational {
        let n = xs.len();
        (0u64..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| Subset(m).iter().fold(int(1), |a, v| a * &xs[v]))
            .fold(int(0), |a, b| a + b)
    }

    #[test]
    fn symmetric_dp_matches_subset_sum() {
        let xs = vec![rat(1, 2), rat(1, 3), int(2), rat(5, 7), int(0)];
        for k in 0..=6 {
            assert_eq!(elementary_symmetric(&xs, k as u64), if k <= 5 { brute_esym(&xs, k) } else { int(0) });
        }
    }

    #[test]
    fn matching_members_of_a_path() {
        // Path 0-1-2-3: gamma(2, 1) is the single perfect matching {01, 23}.
        let g = WeightedGraph::unweighted(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let f = part(g, 2, 1);
        let members = f.members();
        assert_eq!(members.len(), 1);
        assert!(members.contains(&Subset::full(4)));
        assert!(f.decompose_member(Subset::full(4)).is_some());
        assert!(f.find_inside(Subset::from_indices(4, &[0, 1, 2]).unwrap()).is_none());
        let p = rat(1, 2);
        assert_eq!(f.enumerated_cost(&p), rat(1, 16));
    }

    #[test]
    fn special_size_uses_full_degree() {
        // Star K_{1,8} centred at 0; J p / 4 = 1/4 so ceil(8/4) = 2 at the centre.
        let edges: Vec<_> = (1..9).map(|v| (0, v)).collect();
        let g = Arc::new(WeightedGraph::unweighted(9, &edges).unwrap());
        let f = StarForestPart::new(g, 1, 1, int(1), Probability::one());
        assert_eq!(f.special_size(0), 2);
        assert_eq!(f.special_size(3), 1);
        let star = Star { center: 0, leaves: Subset::from_indices(9, &[1, 2]).unwrap() };
        assert!(f.is_special(&star));
        assert!(!f.is_special(&Star { center: 0, leaves: Subset::singleton(1) }));
    }

    #[test]
    fn search_and_membership_agree_with_enumeration() {
        let g = WeightedGraph::unweighted(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]).unwrap();
        for (b, l) in [(1, 1), (2, 1), (1, 2), (3, 1), (2, 2)] {
            let f = part(g.clone(), b, l);
            let members = f.members();
            for bits in 0u64..1 << 6 {
                let u = Subset(bits);
                assert_eq!(f.decompose_member(u).is_some(), members.contains(&u), "b={b} l={l} u={u:?}");
                let inside = members.iter().any(|w| w.is_subset_of(u));
                let found = f.find_inside(u);
                assert_eq!(found.is_some(), inside);
                if let Some(stars) = found {
                    assert!(f.is_valid_forest(&stars));
                }
            }
        }
    }
}
