//! Star-forest covers of unweighted graphs.
//!
//! Given `G` with `|G| p^2 <= mu`, the target family is
//! `{U : |G[U]| >= max{T_0, J |D(U)| p}}`. Its cover is the union of the
//! families `gamma(b_i, L_i)` of a [`Schedule`]; for any target `U`, a
//! greedy decomposition of `U` into good stars exhibits a member.

mod cost;
mod family;
mod greedy;
mod schedule;

use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

pub use cost::{cost_chain, CostChain, LevelChain, Link};
pub use family::{elementary_symmetric, good_thresholds, Star, StarForestPart};
pub use greedy::{
    bucket_of, bucket_sizes, dichotomy_premise, greedy_decompose, qualifying_level, witness_from, Decomposition,
    Extraction,
};
pub use schedule::{build_schedule, reduce_t, Level, Reduction, Schedule, MAX_K};

use crate::cover::{Cover, CoverPart};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rational::{self, Probability, Rational};
use crate::subset::Subset;
use crate::sweep::Sweeper;

#[derive(Clone, Debug)]
pub struct Tr2Instance {
    graph: Arc<WeightedGraph>,
    p: Probability,
    j: Rational,
    mu: Rational,
    t: Rational,
    thresholds: Vec<u64>,
    reduction: Reduction,
}

/// Which hypotheses of the covering theorem an instance satisfies. Each
/// comparison uses the upper bound for `e`, so `true` is a proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Tr2Conditions {
    /// `|G| p^2 <= mu`.
    pub density: bool,
    /// `J >= 8e`.
    pub j_large: bool,
    /// `c = T/(mu J^2) >= 256e/J`.
    pub c_general: bool,
    /// `c_0 = T_0/(mu J^2) >= 64e/J`, for the reduced target.
    pub c_reduced: bool,
}

impl Tr2Conditions {
    /// What the construction at `T_0` needs.
    pub fn reduced_ok(&self) -> bool {
        self.density && self.j_large && self.c_reduced
    }
}

/// A member of the cover inside a target set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tr2Witness {
    Edge { u: usize, v: usize },
    Forest { level: u32, b: u64, #[serde(rename = "L")] l: u64, stars: Vec<Star> },
}

impl Tr2Witness {
    pub fn vertices(&self) -> Subset {
        match self {
            Tr2Witness::Edge { u, v } => Subset::singleton(*u).with(*v),
            Tr2Witness::Forest { stars, .. } => stars.iter().fold(Subset::EMPTY, |a, s| a.union(s.vertices())),
        }
    }
}

/// Everything checked for one target set.
#[derive(Clone, Debug, Serialize)]
pub struct TargetCheck {
    pub u: Subset,
    pub decomposition: Option<Decomposition>,
    pub sum_d_squared_ok: bool,
    pub dichotomy_ok: bool,
    pub witness: Option<Tr2Witness>,
    pub witness_ok: bool,
}

impl TargetCheck {
    pub fn passed(&self) -> bool {
        self.sum_d_squared_ok && self.dichotomy_ok && self.witness_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tr2Verification {
    pub subsets_checked: u64,
    pub targets: u64,
    pub failures: u64,
    pub first_failure: Option<TargetCheck>,
}

impl Tr2Verification {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl Tr2Instance {
    pub fn new(graph: Arc<WeightedGraph>, p: Probability, j: Rational, mu: Rational, t: Rational) -> Result<Self> {
        if !(j > Rational::zero()) || !(mu > Rational::zero()) {
            return Err(Error::Guard("J and mu must be positive".into()));
        }
        let reduction = reduce_t(&t)?;
        let thresholds = good_thresholds(&graph, &j, p.value());
        Ok(Tr2Instance { graph, p, j, mu, t, thresholds, reduction })
    }

    pub fn graph(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn p(&self) -> &Probability {
        &self.p
    }

    pub fn j(&self) -> &Rational {
        &self.j
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn reduction(&self) -> Reduction {
        self.reduction
    }

    /// `ceil(J d_v p / 4)` per vertex.
    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    pub fn schedule(&self) -> Option<Schedule> {
        match self.reduction {
            Reduction::TrivialEdges => None,
            Reduction::Reduced { k, .. } => Some(build_schedule(k).expect("k from reduce_t is in range")),
        }
    }

    /// The size threshold actually used: `T` itself when `T < 32`, else `T_0`.
    pub fn effective_t(&self) -> Rational {
        match self.reduction {
            Reduction::TrivialEdges => self.t.clone(),
            Reduction::Reduced { t0, .. } => rational::from_u64(t0),
        }
    }

    /// `T_0 > |G|`: no vertex set spans `T_0` edges.
    pub fn target_is_empty(&self) -> bool {
        self.effective_t() > rational::from_u64(self.graph.edge_count() as u64)
    }

    pub fn conditions(&self) -> Tr2Conditions {
        let e = rational::e_upper();
        let g = rational::from_u64(self.graph.edge_count() as u64);
        let p2 = self.p.value() * self.p.value();
        let jj = &self.j * &self.j;
        let c = &self.t / (&self.mu * &jj);
        let c0 = match self.reduction {
            Reduction::Reduced { t0, .. } => Some(rational::from_u64(t0) / (&self.mu * &jj)),
            Reduction::TrivialEdges => None,
        };
        Tr2Conditions {
            density: g * p2 <= self.mu,
            j_large: self.j >= rational::int(8) * &e,
            c_general: c >= rational::int(256) * &e / &self.j,
            c_reduced: c0.is_some_and(|c0| c0 >= rational::int(64) * &e / &self.j),
        }
    }

    /// Membership in `{U : |G[U]| >= max{T_eff, J |D(U)| p}}`.
    pub fn is_target(&self, u: Subset) -> bool {
        let inside = rational::from_u64(self.graph.induced_edges(u) as u64);
        let boundary = rational::from_u64(self.graph.twice_boundary_count(u) as u64) / rational::int(2);
        inside >= self.effective_t() && inside >= &self.j * boundary * self.p.value()
    }

    /// The same predicate in integer arithmetic.
    pub fn target_predicate(&self) -> impl Fn(Subset) -> bool + Send + Sync + '_ {
        let jp = &self.j * self.p.value();
        let t = rational::ceil(&self.effective_t());
        let fast = (u128::try_from(jp.numer().clone()), u128::try_from(jp.denom().clone()), u64::try_from(t));
        move |u: Subset| match &fast {
            (Ok(num), Ok(den), Ok(t)) => {
                let inside = self.graph.induced_edges(u) as u128;
                // |G[U]| >= J p |D(U)| with 2|D(U)| = twice_boundary_count.
                inside >= *t as u128 && 2 * inside * den >= num * self.graph.twice_boundary_count(u) as u128
            }
            _ => self.is_target(u),
        }
    }

    /// The star-forest parts `gamma(b_i, L_i)`, one per level.
    pub fn parts(&self) -> Vec<StarForestPart> {
        self.schedule()
            .map(|s| {
                s.levels
                    .iter()
                    .map(|lv| StarForestPart::new(self.graph.clone(), lv.b, lv.l, self.j.clone(), self.p.clone()))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// The cover: the edge list when `T < 32`, nothing when the target is
    /// empty, and the star-forest levels otherwise.
    pub fn cover(&self) -> Cover {
        if self.target_is_empty() {
            return Cover::empty();
        }
        match self.reduction {
            Reduction::TrivialEdges => {
                Cover::new(vec![CoverPart::explicit((0..self.graph.edge_count()).map(|e| self.graph.edge_set(e)))])
            }
            Reduction::Reduced { .. } => Cover::new(self.parts().into_iter().map(CoverPart::StarForestFamily).collect()),
        }
    }

    pub fn cost_chain(&self) -> Option<CostChain> {
        let schedule = self.schedule()?;
        if self.target_is_empty() {
            return None;
        }
        Some(cost_chain(&self.parts(), &schedule, &self.mu, schedule.t0))
    }

    pub fn decompose(&self, u: Subset) -> Decomposition {
        greedy_decompose(&self.graph, &self.thresholds, u)
    }

    /// Finds the cover member inside `u` that the greedy argument produces.
    pub fn find_witness(&self, u: Subset) -> Option<Tr2Witness> {
        match self.reduction {
            Reduction::TrivialEdges => self
                .graph
                .edges()
                .iter()
                .find(|&&(a, b)| u.contains(a) && u.contains(b))
                .map(|&(u, v)| Tr2Witness::Edge { u, v }),
            Reduction::Reduced { k, .. } => {
                let schedule = self.schedule()?;
                let dec = self.decompose(u);
                self.witness_for(&dec, &schedule, k)
            }
        }
    }

    fn witness_for(&self, dec: &Decomposition, schedule: &Schedule, k: u32) -> Option<Tr2Witness> {
        let sizes = bucket_sizes(dec, k);
        let idx = qualifying_level(&sizes, schedule)?;
        let lv = &schedule.levels[idx];
        let stars = witness_from(dec, k, lv.i, lv.b, |v| lv.l.max(self.thresholds[v]))
            .expect("bucket stars have at least L_i^v leaves");
        Some(Tr2Witness::Forest { level: lv.i, b: lv.b, l: lv.l, stars })
    }

    /// Independent check that `w` is a member of the cover inside `u`.
    pub fn witness_is_valid(&self, u: Subset, w: &Tr2Witness) -> bool {
        if !w.vertices().is_subset_of(u) {
            return false;
        }
        match w {
            Tr2Witness::Edge { u: a, v: b } => {
                matches!(self.reduction, Reduction::TrivialEdges) && self.graph.neighbors(*a).contains(*b)
            }
            Tr2Witness::Forest { level, b, l, stars } => {
                let Some(schedule) = self.schedule() else { return false };
                let Some(lv) = schedule.levels.iter().find(|lv| lv.i == *level) else { return false };
                if lv.b != *b || lv.l != *l {
                    return false;
                }
                let part = StarForestPart::new(self.graph.clone(), *b, *l, self.j.clone(), self.p.clone());
                part.is_valid_forest(stars)
            }
        }
    }

    /// Runs the decomposition argument on one target set.
    pub fn check_target(&self, u: Subset) -> TargetCheck {
        match self.reduction {
            Reduction::TrivialEdges => {
                let witness = self.find_witness(u);
                let witness_ok = witness.as_ref().is_some_and(|w| self.witness_is_valid(u, w));
                TargetCheck { u, decomposition: None, sum_d_squared_ok: true, dichotomy_ok: true, witness, witness_ok }
            }
            Reduction::Reduced { k, t0 } => {
                let schedule = self.schedule().expect("reduced instance has a schedule");
                let dec = self.decompose(u);
                let inside = self.graph.induced_edges(u) as u64;
                let sum_d_squared_ok = 2 * dec.sum_d_squared() >= inside;
                let sizes = bucket_sizes(&dec, k);
                let dichotomy_ok = dichotomy_premise(&sizes, k, t0) && qualifying_level(&sizes, &schedule).is_some();
                let witness = self.witness_for(&dec, &schedule, k);
                let witness_ok = witness.as_ref().is_some_and(|w| self.witness_is_valid(u, w));
                TargetCheck { u, decomposition: Some(dec), sum_d_squared_ok, dichotomy_ok, witness, witness_ok }
            }
        }
    }

    /// Exhaustive run of [`Self::check_target`] over every target `U ⊆ V`.
    pub fn verify(&self, sweeper: &Sweeper) -> Result<Tr2Verification> {
        let target = self.target_predicate();
        let out = sweeper.sweep(self.graph.n(), crate::cover::MAX_VERIFY, |u| {
            target(u).then(|| self.check_target(u).passed())
        })?;
        Ok(Tr2Verification {
            subsets_checked: out.visited,
            targets: out.targets,
            failures: out.failures,
            first_failure: out.first_failure.map(|u| self.check_target(u)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn k4_disjoint() -> Arc<WeightedGraph> {
        Arc::new(WeightedGraph::unweighted(8, &[(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap())
    }

    #[test]
    fn four_matching_edges_form_a_level_one_witness_at_k2() {
        let g = k4_disjoint();
        let thresholds = vec![1u64; 8];
        let dec = greedy_decompose(&g, &thresholds, Subset::full(8));
        assert_eq!(dec.steps.len(), 4);
        assert!(dec.steps.iter().all(|s| s.d == 1));
        let schedule = build_schedule(2).unwrap();
        let sizes = bucket_sizes(&dec, 2);
        assert_eq!(qualifying_level(&sizes, &schedule), Some(0));
        let stars = witness_from(&dec, 2, 1, 4, |_| 1).unwrap();
        let part = StarForestPart::new(g, 4, 1, int(1), Probability::ratio(1, 100).unwrap());
        assert!(part.is_valid_forest(&stars));
        assert!(part.decompose_member(Subset::full(8)).is_some());
    }

    #[test]
    fn thresholds_use_full_graph_degree() {
        // Centre 0 has degree 8 in G; inside U = {0,1,2} it has degree 2.
        // With J p / 4 = 1/2 the star needs ceil(8/2) = 4 leaves, so (0, {1,2}) is not good.
        let edges: Vec<_> = (1..9).map(|v| (0, v)).collect();
        let g = Arc::new(WeightedGraph::unweighted(9, &edges).unwrap());
        let inst = Tr2Instance::new(g, Probability::ratio(1, 2).unwrap(), int(4), int(100), int(40)).unwrap();
        assert_eq!(inst.thresholds()[0], 4);
        let dec = inst.decompose(Subset::from_indices(9, &[0, 1, 2]).unwrap());
        assert!(dec.steps.iter().all(|s| s.center != 0));
        let dec = inst.decompose(Subset::from_indices(9, &[0, 1, 2, 3, 4]).unwrap());
        assert_eq!(dec.steps[0].center, 0);
    }

    #[test]
    fn dense_graph_meeting_conditions_verifies() {
        // K_9 has 36 edges; T = 32 gives k = 1, T_0 = 32.
        let mut edges = Vec::new();
        for a in 0..9 {
            for b in a + 1..9 {
                edges.push((a, b));
            }
        }
        let g = Arc::new(WeightedGraph::unweighted(9, &edges).unwrap());
        let j = int(22);
        let p = Probability::ratio(1, 100).unwrap();
        let mu = rat(36, 10000);
        let inst = Tr2Instance::new(g, p, j, mu, int(32)).unwrap();
        let cond = inst.conditions();
        assert!(cond.density && cond.j_large);
        let r = inst.verify(&Sweeper::default()).unwrap();
        assert!(r.passed(), "{:?}", r.first_failure);
        assert!(r.targets > 0);
        let cover = inst.cover();
        let cov = cover.verify_coverage(9, inst.target_predicate(), &Sweeper::default()).unwrap();
        assert!(cov.verified);
        let chain = inst.cost_chain().unwrap();
        assert!(chain.holds(), "{:?}", chain.failed_links());
    }

    #[test]
    fn trivial_edges_below_32() {
        let g = Arc::new(WeightedGraph::unweighted(4, &[(0, 1), (1, 2), (2, 3)]).unwrap());
        let inst = Tr2Instance::new(g, Probability::ratio(1, 10).unwrap(), int(22), int(1), int(2)).unwrap();
        assert_eq!(inst.reduction(), Reduction::TrivialEdges);
        assert!(inst.verify(&Sweeper::default()).unwrap().passed());
        assert_eq!(inst.cover().parts.len(), 1);
    }
}
