//! Built-in instances: small families and graphs, the star-union example
//! showing that the `D(U)` side condition cannot be dropped, and the
//! singleton example on which the `1/J` dependence is attained.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{FamilyFile, IncreasingFamily};
use crate::graph::{GraphFile, WeightedGraph};
use crate::rational::{self, Probability, Rational, RationalValue};
use crate::singleton::{build_singleton_cover, SingletonInstance};
use crate::solvers::{min_fractional_cost, min_integral_cost};
use crate::subset::{Subset, MAX_EXHAUSTIVE};

pub fn path(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    WeightedGraph::unweighted(n, &edges).expect("path is simple")
}

pub fn cycle(n: usize) -> WeightedGraph {
    let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    if n >= 3 {
        edges.push((n - 1, 0));
    }
    WeightedGraph::unweighted(n, &edges).expect("cycle is simple")
}

/// `K_{1,m}` with center 0.
pub fn star(m: usize) -> WeightedGraph {
    let edges: Vec<_> = (1..=m).map(|v| (0, v)).collect();
    WeightedGraph::unweighted(m + 1, &edges).expect("star is simple")
}

pub fn complete(n: usize) -> WeightedGraph {
    clique_union(&[n])
}

/// Disjoint cliques on consecutive vertex blocks.
pub fn clique_union(sizes: &[usize]) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut base = 0;
    for &s in sizes {
        for a in 0..s {
            for b in a + 1..s {
                edges.push((base + a, base + b));
            }
        }
        base += s;
    }
    WeightedGraph::unweighted(base, &edges).expect("cliques are simple")
}

/// Disjoint copies of `K_{1,m}`; copy `c` has center `c (m+1)`.
pub fn star_union(copies: usize, m: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for c in 0..copies {
        let base = c * (m + 1);
        edges.extend((1..=m).map(|l| (base, base + l)));
    }
    WeightedGraph::unweighted(copies * (m + 1), &edges).expect("star union is simple")
}

/// Graphs with `n <= 12` used as a regression battery, some with
/// non-uniform weights.
pub fn graph_battery() -> Vec<(String, WeightedGraph)> {
    let mut out = vec![
        ("path-6".to_string(), path(6)),
        ("path-12".to_string(), path(12)),
        ("cycle-9".to_string(), cycle(9)),
        ("star-8".to_string(), star(8)),
        ("star-11".to_string(), star(11)),
        ("complete-6".to_string(), complete(6)),
        ("cliques-4-4-4".to_string(), clique_union(&[4, 4, 4])),
        ("cliques-5-3-2".to_string(), clique_union(&[5, 3, 2])),
        ("stars-2x5".to_string(), star_union(2, 5)),
    ];
    let p = path(10);
    let w: Vec<Rational> = (0..p.edge_count()).map(|e| rational::rat(1, 1 + e as i64)).collect();
    out.push(("path-10-harmonic".to_string(), p.with_weights(w)));
    let k = complete(7);
    let w: Vec<Rational> = (0..k.edge_count()).map(|e| rational::pow2(-((e % 5) as i64))).collect();
    out.push(("complete-7-dyadic".to_string(), k.with_weights(w)));
    let c = clique_union(&[4, 4, 3]);
    let w: Vec<Rational> = c.edges().iter().map(|&(a, _)| if a < 4 { rational::int(3) } else { rational::rat(1, 5) }).collect();
    out.push(("cliques-4-4-3-mixed".to_string(), c.with_weights(w)));
    out
}

/// Small families with known thresholds.
pub fn family_battery() -> Vec<(String, IncreasingFamily)> {
    let f = |n: usize, lists: &[&[usize]]| {
        IncreasingFamily::from_index_lists(n, &lists.iter().map(|l| l.to_vec()).collect::<Vec<_>>()).expect("valid family")
    };
    vec![
        ("single-vertex".into(), f(1, &[&[0]])),
        ("single-pair".into(), f(2, &[&[0, 1]])),
        ("two-singletons".into(), f(2, &[&[0], &[1]])),
        ("triangle-pairs".into(), f(3, &[&[0, 1], &[0, 2], &[1, 2]])),
        ("mixed".into(), f(4, &[&[0], &[1, 2, 3]])),
        ("perfect-matchings-4".into(), f(4, &[&[0, 1], &[2, 3]])),
    ]
}

/// Which increasing family the star-union example is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StarUnionTarget {
    /// `<{U : |G[U]| >= T}>`.
    AtLeastT,
    /// `<{U : G[U] is K_{1,T}}>`: a center and `T` of its leaves.
    StarCopies,
}

/// `(Kp)^-1` disjoint copies of `K_{1,m}` with `T = m p = K mu`, where
/// `mu = |G| p^2`. Every cover of the targets costs at least `1/K`,
/// whatever `m` is; the centers alone cost exactly `1/K`.
#[derive(Clone, Debug)]
pub struct StarUnionFixture {
    pub k: u64,
    pub p: Probability,
    pub m: u64,
    pub copies: u64,
    pub t: u64,
    pub graph: WeightedGraph,
}

impl StarUnionFixture {
    pub fn new(k: u64, p: Probability, m: u64) -> Result<Self> {
        let kp = rational::from_u64(k) * p.value();
        if kp.is_zero() || !kp.recip().is_integer() {
            return Err(Error::Guard("(K p)^-1 must be a positive integer".into()));
        }
        let t = rational::from_u64(m) * p.value();
        if !t.is_integer() || t.is_zero() {
            return Err(Error::Guard("m p must be a positive integer".into()));
        }
        let copies: u64 = kp.recip().to_integer().try_into().map_err(|_| Error::Guard("too many copies".into()))?;
        let n = copies.checked_mul(m + 1).filter(|&n| n as usize <= MAX_EXHAUSTIVE);
        let Some(_) = n else {
            return Err(Error::EnumerationCap { n: (copies.saturating_mul(m + 1)) as usize, cap: MAX_EXHAUSTIVE });
        };
        let graph = star_union(copies as usize, m as usize);
        Ok(StarUnionFixture { k, p, m, copies, t: t.to_integer().try_into().expect("T fits"), graph })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// `mu = |G| p^2`.
    pub fn mu(&self) -> Rational {
        rational::from_u64(self.graph.edge_count() as u64) * self.p.value() * self.p.value()
    }

    pub fn centers(&self) -> Vec<Subset> {
        (0..self.copies as usize).map(|c| Subset::singleton(c * (self.m as usize + 1))).collect()
    }

    /// `copies * p = 1/K`.
    pub fn center_cost(&self) -> Rational {
        rational::from_u64(self.copies) * self.p.value()
    }

    pub fn family(&self, target: StarUnionTarget) -> Result<IncreasingFamily> {
        let n = self.n();
        let t = self.t as usize;
        let mut sets = Vec::new();
        match target {
            StarUnionTarget::AtLeastT => {
                // Minimal sets: removing any vertex drops the edge count below T.
                for bits in 0..1u64 << n {
                    let u = Subset(bits);
                    if self.graph.induced_edges(u) >= t && u.iter().all(|v| self.graph.induced_edges(u.without(v)) < t) {
                        sets.push(u);
                    }
                }
            }
            StarUnionTarget::StarCopies => {
                for c in self.centers() {
                    let center = c.first().expect("center");
                    for leaves in self.graph.neighbors(center).combinations(t) {
                        sets.push(leaves.with(center));
                    }
                }
            }
        }
        IncreasingFamily::new(n, sets)
    }

    /// Exact minimum cover cost of the chosen family, against `1/K`.
    pub fn evaluate(&self, target: StarUnionTarget) -> Result<NecessityReport> {
        let fam = self.family(target)?;
        let integral = min_integral_cost(&fam, &self.p)?;
        let fractional = min_fractional_cost(&fam, &self.p)?;
        let one_over_k = rational::rat(1, self.k as i64);
        let centers = self.centers();
        let centers_cover = fam.minimal_sets().iter().all(|s| centers.iter().any(|c| c.is_subset_of(*s)));
        Ok(NecessityReport {
            k: self.k,
            p: self.p.value().clone(),
            m: self.m,
            copies: self.copies,
            n: self.n(),
            t: self.t,
            mu: self.mu(),
            target,
            minimal_sets: fam.minimal_sets().len(),
            min_cover_cost: integral.optimum.clone(),
            fractional_cost: fractional.optimum,
            center_cost: self.center_cost(),
            centers_cover,
            one_over_k: one_over_k.clone(),
            at_least_one_over_k: integral.optimum >= one_over_k,
            side_condition_targets: self.side_condition_targets(),
            nodes: integral.nodes,
        })
    }

    /// Number of `U` with `|G[U]| >= max{T, J |D(U)| p}` at the smallest
    /// admissible `J = 8e`.
    pub fn side_condition_targets(&self) -> u64 {
        let j = rational::int(8) * rational::e_upper();
        let jp = &j * self.p.value();
        let t = self.t as usize;
        (0..1u64 << self.n())
            .map(Subset)
            .filter(|&u| {
                let inside = self.graph.induced_edges(u);
                let half_boundary = rational::from_u64(self.graph.twice_boundary_count(u) as u64) / rational::int(2);
                inside >= t && rational::from_u64(inside as u64) >= &jp * half_boundary
            })
            .count() as u64
    }

    pub fn to_fixture(&self, name: &str) -> Fixture {
        Fixture {
            name: name.into(),
            description: format!(
                "{} disjoint copies of K_1,{} with p = {}, T = m p = {}; covers of the targets cost at least 1/K = 1/{}",
                self.copies, self.m, self.p, self.t, self.k
            ),
            data: FixtureData::StarUnion {
                k: self.k,
                p: self.p.clone(),
                m: self.m,
                copies: self.copies,
                t: self.t,
                graph: self.graph.to_file(),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NecessityReport {
    pub k: u64,
    #[serde(with = "rational::serde_rational")]
    pub p: Rational,
    pub m: u64,
    pub copies: u64,
    pub n: usize,
    pub t: u64,
    #[serde(with = "rational::serde_rational")]
    pub mu: Rational,
    pub target: StarUnionTarget,
    pub minimal_sets: usize,
    #[serde(with = "rational::serde_rational")]
    pub min_cover_cost: Rational,
    #[serde(with = "rational::serde_rational")]
    pub fractional_cost: Rational,
    #[serde(with = "rational::serde_rational")]
    pub center_cost: Rational,
    pub centers_cover: bool,
    #[serde(with = "rational::serde_rational")]
    pub one_over_k: Rational,
    pub at_least_one_over_k: bool,
    /// Targets left once `J |D(U)| p <= |G[U]|` is also required.
    pub side_condition_targets: u64,
    pub nodes: u64,
}

/// `|V| = J`, `p = J^-2`, `zeta = 1`: the target is every nonempty set, so
/// any cover contains all singletons and costs `J p = 1/J`.
#[derive(Clone, Debug, Serialize)]
pub struct SingletonOptimality {
    pub j: u64,
    #[serde(with = "rational::serde_rational")]
    pub p: Rational,
    #[serde(with = "rational::serde_rational")]
    pub min_cost: Rational,
    #[serde(with = "rational::serde_rational")]
    pub construction_cost: Rational,
    #[serde(with = "rational::serde_rational")]
    pub bound: Rational,
}

pub fn singleton_optimality(j: u64) -> Result<SingletonOptimality> {
    if j == 0 || j as usize > MAX_EXHAUSTIVE {
        return Err(Error::EnumerationCap { n: j as usize, cap: MAX_EXHAUSTIVE });
    }
    let p = Probability::new(rational::rat(1, (j * j) as i64))?;
    let jr = rational::from_u64(j);
    let inst = SingletonInstance::new(vec![Rational::one(); j as usize], p.clone(), jr.clone())?;
    let cover = build_singleton_cover(&inst);
    Ok(SingletonOptimality {
        j,
        min_cost: jr * p.value(),
        p: p.into_inner(),
        construction_cost: cover.cost.best().clone(),
        bound: cover.bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    #[serde(flatten)]
    pub data: FixtureData,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixtureData {
    Family { family: FamilyFile },
    Graph { graph: GraphFile },
    Singleton {
        zeta: Vec<RationalValue>,
        p: Probability,
        #[serde(rename = "J", with = "rational::serde_rational")]
        j: Rational,
    },
    StarUnion { k: u64, p: Probability, m: u64, copies: u64, t: u64, graph: GraphFile },
}

/// Default star-union example: two copies of `K_{1,6}` at `p = 1/2`, `K = 1`.
pub fn default_star_union() -> StarUnionFixture {
    StarUnionFixture::new(1, Probability::ratio(1, 2).expect("1/2"), 6).expect("valid fixture")
}

/// Every built-in instance, in a fixed order.
pub fn all_fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    for (name, fam) in family_battery() {
        out.push(Fixture {
            name: format!("family/{name}"),
            description: format!("increasing family on {} elements", fam.n()),
            data: FixtureData::Family { family: FamilyFile::from(&fam) },
        });
    }
    for (name, g) in graph_battery() {
        out.push(Fixture {
            name: format!("graph/{name}"),
            description: format!("graph with {} vertices and {} edges", g.n(), g.edge_count()),
            data: FixtureData::Graph { graph: g.to_file() },
        });
    }
    for j in [8u64, 12, 16] {
        out.push(Fixture {
            name: format!("singleton/optimality-J{j}"),
            description: format!("|V| = J = {j}, p = J^-2, unit weights: every cover costs 1/J"),
            data: FixtureData::Singleton {
                zeta: vec![RationalValue(Rational::one()); j as usize],
                p: Probability::new(rational::rat(1, (j * j) as i64)).expect("probability"),
                j: rational::from_u64(j),
            },
        });
    }
    for (name, f) in necessity_fixtures() {
        out.push(f.to_fixture(&name));
    }
    out
}

/// The star-union examples shipped as fixtures.
pub fn necessity_fixtures() -> Vec<(String, StarUnionFixture)> {
    let k2 = StarUnionFixture::new(2, Probability::ratio(1, 2).expect("1/2"), 6).expect("valid fixture");
    vec![("necessity/star-union-K1-m6".into(), default_star_union()), ("necessity/star-union-K2-m6".into(), k2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn shapes() {
        assert_eq!(path(5).edge_count(), 4);
        assert_eq!(cycle(5).edge_count(), 5);
        assert_eq!(star(4).degree(0), 4);
        assert_eq!(clique_union(&[3, 4]).edge_count(), 3 + 6);
        let s = star_union(2, 3);
        assert_eq!((s.n(), s.edge_count(), s.degree(4)), (8, 6, 3));
    }

    #[test]
    fn star_union_parameters() {
        let f = default_star_union();
        assert_eq!((f.copies, f.t, f.n()), (2, 3, 14));
        assert_eq!(f.mu(), rat(3, 1));
        assert_eq!(f.center_cost(), rat(1, 1));
        assert!(StarUnionFixture::new(3, Probability::ratio(1, 2).unwrap(), 6).is_err());
        assert!(StarUnionFixture::new(1, Probability::ratio(1, 2).unwrap(), 5).is_err());
    }

    #[test]
    fn small_star_union_costs_one_over_k() {
        let f = StarUnionFixture::new(1, Probability::ratio(1, 2).unwrap(), 2).unwrap();
        for target in [StarUnionTarget::AtLeastT, StarUnionTarget::StarCopies] {
            let r = f.evaluate(target).unwrap();
            assert!(r.centers_cover);
            assert_eq!(r.min_cover_cost, rat(1, 1));
            assert!(r.at_least_one_over_k);
            assert_eq!(r.side_condition_targets, 0);
        }
    }

    #[test]
    fn singleton_optimality_is_one_over_j() {
        let s = singleton_optimality(8).unwrap();
        assert_eq!(s.min_cost, rat(1, 8));
        assert!(s.construction_cost >= s.min_cost);
        assert!(s.construction_cost < s.bound);
    }

    #[test]
    fn fixtures_serialize() {
        let all = all_fixtures();
        let text = serde_json::to_string(&all).unwrap();
        assert!(text.contains("\"kind\":\"star_union\""));
        assert!(all.iter().all(|f| !f.name.is_empty()));
    }
}
