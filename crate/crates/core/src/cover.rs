//! Covers: hybrids of explicit subset lists and implicit generator families.
//!
//! A cover `G` covers a target collection when every target set contains a
//! member of `G`. Each part knows its cost `sum_{S in part} p^|S|` (exactly
//! or as an upper bound) and can produce a member inside a given set.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphFile, WeightedGraph};
use crate::rational::{self, Probability, Rational};
use crate::star_forest::{Star, StarForestPart};
use crate::subset::Subset;
use crate::sweep::{SweepOutcome, Sweeper};

/// Largest ground set for exhaustive coverage verification.
pub const MAX_VERIFY: usize = 20;

/// Largest graph for which star-forest costs are enumerated exactly.
pub const MAX_ENUMERATE: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum CoverPart {
    /// An explicit list of sets, sorted and without duplicates.
    ExplicitList(Vec<Subset>),
    /// `union_{1 <= k <= kmax} binom(order[..min(a k, n)], k)` with `n = order.len()`.
    PrefixBinomial { order: Vec<usize>, a: u64, kmax: u64 },
    StarForestFamily(StarForestPart),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMethod {
    Enumeration,
    ClosedForm,
    SymmetricDp,
    AnalyticBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    #[serde(with = "rational::serde_rational_opt")]
    pub exact: Option<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub upper_bound: Rational,
    pub method: CostMethod,
}

impl CostReport {
    pub fn exact(value: Rational, method: CostMethod) -> Self {
        CostReport { upper_bound: value.clone(), exact: Some(value), method }
    }

    pub fn bound(upper_bound: Rational, method: CostMethod) -> Self {
        CostReport { exact: None, upper_bound, method }
    }

    /// The tightest known upper bound: the exact value when present.
    pub fn best(&self) -> &Rational {
        self.exact.as_ref().unwrap_or(&self.upper_bound)
    }
}

impl CoverPart {
    pub fn explicit(sets: impl IntoIterator<Item = Subset>) -> Self {
        let mut sets: Vec<Subset> = sets.into_iter().collect();
        sets.sort();
        sets.dedup();
        CoverPart::ExplicitList(sets)
    }

    /// `binom(min(a k, n), k)`-prefix part; `kmax` is clamped to `n`.
    pub fn prefix_binomial(order: Vec<usize>, a: u64, kmax: u64) -> Self {
        assert!(a >= 1, "prefix step must be positive");
        let kmax = kmax.min(order.len() as u64);
        CoverPart::PrefixBinomial { order, a, kmax }
    }

    pub fn cost(&self, p: &Probability) -> CostReport {
        let p = p.value();
        match self {
            CoverPart::ExplicitList(sets) => {
                let total = sets.iter().fold(Rational::zero(), |acc, s| acc + rational::pow(p, s.len() as u64));
                CostReport::exact(total, CostMethod::Enumeration)
            }
            CoverPart::PrefixBinomial { order, a, kmax } => {
                CostReport::exact(prefix_binomial_cost(order.len() as u64, *a, *kmax, p), CostMethod::ClosedForm)
            }
            CoverPart::StarForestFamily(f) => {
                if f.graph.n() <= MAX_ENUMERATE {
                    CostReport::exact(f.enumerated_cost(p), CostMethod::Enumeration)
                } else {
                    CostReport::bound(f.symmetric_bound(p), CostMethod::SymmetricDp)
                }
            }
        }
    }

    /// A member of this part contained in `u`, if any.
    pub fn find_member_inside(&self, u: Subset) -> Option<Subset> {
        match self {
            CoverPart::ExplicitList(sets) => sets.iter().copied().find(|s| s.is_subset_of(u)),
            CoverPart::PrefixBinomial { order, a, kmax } => prefix_witness(order, *a, *kmax, u).map(|(_, w)| w),
            CoverPart::StarForestFamily(f) => {
                f.find_inside(u).map(|stars| stars.iter().fold(Subset::EMPTY, |acc, s| acc.union(s.vertices())))
            }
        }
    }

    /// Independent membership test, used to re-check witnesses.
    pub fn is_member(&self, w: Subset) -> bool {
        match self {
            CoverPart::ExplicitList(sets) => sets.binary_search(&w).is_ok(),
            CoverPart::PrefixBinomial { order, a, kmax } => {
                let k = w.len() as u64;
                if k == 0 || k > *kmax {
                    return false;
                }
                let len = (a * k).min(order.len() as u64) as usize;
                let prefix: Subset = order[..len].iter().copied().collect();
                w.is_subset_of(prefix)
            }
            CoverPart::StarForestFamily(f) => f.decompose_member(w).is_some(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CoverPart::ExplicitList(_) => "explicit",
            CoverPart::PrefixBinomial { .. } => "prefix_binomial",
            CoverPart::StarForestFamily(_) => "star_forest",
        }
    }
}

/// `sum_{k=1}^{kmax} binom(min(a k, n), k) p^k`.
pub fn prefix_binomial_cost(n: u64, a: u64, kmax: u64, p: &Rational) -> Rational {
    let mut total = Rational::zero();
    let mut pk = Rational::one();
    for k in 1..=kmax.min(n) {
        pk *= p;
        let c = rational::binomial((a * k).min(n), k);
        total += rational::from_biguint(c) * &pk;
    }
    total
}

/// Smallest `k` with `|u ∩ order[..min(a k, n)]| >= k`, together with the
/// first `k` vertices of that intersection (in `order`).
pub fn prefix_witness(order: &[usize], a: u64, kmax: u64, u: Subset) -> Option<(u64, Subset)> {
    let n = order.len() as u64;
    for k in 1..=kmax.min(n) {
        let len = (a * k).min(n) as usize;
        let hits: Vec<usize> = order[..len].iter().copied().filter(|&v| u.contains(v)).collect();
        if hits.len() as u64 >= k {
            return Some((k, hits[..k as usize].iter().copied().collect()));
        }
    }
    None
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Cover {
    pub parts: Vec<CoverPart>,
}

/// A member of a cover inside a target set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub part: usize,
    pub member: Subset,
}

impl Cover {
    pub fn new(parts: Vec<CoverPart>) -> Self {
        Cover { parts }
    }

    pub fn empty() -> Self {
        Cover::default()
    }

    pub fn push(&mut self, part: CoverPart) {
        self.parts.push(part);
    }

    pub fn part_costs(&self, p: &Probability) -> Vec<CostReport> {
        self.parts.iter().map(|part| part.cost(p)).collect()
    }

    /// Total cost: exact if every part is exact, otherwise the sum of the
    /// best known upper bounds.
    pub fn cost(&self, p: &Probability) -> CostReport {
        let reports = self.part_costs(p);
        let upper = reports.iter().fold(Rational::zero(), |acc, r| acc + r.best());
        let all_exact = reports.iter().all(|r| r.exact.is_some());
        let method = if all_exact && reports.iter().all(|r| r.method == CostMethod::ClosedForm) {
            CostMethod::ClosedForm
        } else if all_exact {
            CostMethod::Enumeration
        } else {
            CostMethod::SymmetricDp
        };
        if all_exact {
            CostReport::exact(upper, method)
        } else {
            CostReport::bound(upper, method)
        }
    }

    pub fn find_member_inside(&self, u: Subset) -> Option<Witness> {
        self.parts
            .iter()
            .enumerate()
            .find_map(|(part, p)| p.find_member_inside(u).map(|member| Witness { part, member }))
    }

    /// A witness inside `u` that has also passed the independent membership check.
    pub fn checked_witness(&self, u: Subset) -> Option<Witness> {
        self.find_member_inside(u)
            .filter(|w| w.member.is_subset_of(u) && self.parts[w.part].is_member(w.member))
    }

    /// Exhaustive check that every `u ⊆ [n]` with `target(u)` contains a member.
    pub fn verify_coverage<F>(&self, n: usize, target: F, sweeper: &Sweeper) -> Result<CoverageReport>
    where
        F: Fn(Subset) -> bool + Sync,
    {
        let outcome = sweeper.sweep(n, MAX_VERIFY, |u| target(u).then(|| self.checked_witness(u).is_some()))?;
        Ok(CoverageReport::from(outcome))
    }

    /// Sampled audit over `samples` uniform subsets of `[n]`. Not a proof.
    pub fn audit_coverage<F>(&self, n: usize, target: F, samples: u64, seed: u64) -> Result<AuditReport>
    where
        F: Fn(Subset) -> bool,
    {
        if n > crate::subset::MAX_GROUND_SET {
            return Err(Error::GroundSetTooLarge(n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = Subset::full(n).bits();
        let mut report = AuditReport { samples, targets: 0, failures: 0, first_failure: None };
        for _ in 0..samples {
            let u = Subset(rng.gen::<u64>() & mask);
            if !target(u) {
                continue;
            }
            report.targets += 1;
            if self.checked_witness(u).is_none() {
                report.failures += 1;
                report.first_failure.get_or_insert(u);
            }
        }
        Ok(report)
    }

    /// `true` iff the total cost (upper bound where not exact) is at most 1/2.
    pub fn smallness_check(&self, p: &Probability) -> bool {
        *self.cost(p).best() <= rational::rat(1, 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub verified: bool,
    pub subsets_checked: u64,
    pub targets: u64,
    pub failures: u64,
    /// Smallest failing bitmask.
    pub first_counterexample: Option<Subset>,
}

impl From<SweepOutcome> for CoverageReport {
    fn from(o: SweepOutcome) -> Self {
        CoverageReport {
            verified: o.passed(),
            subsets_checked: o.visited,
            targets: o.targets,
            failures: o.failures,
            first_counterexample: o.first_failure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub samples: u64,
    pub targets: u64,
    pub failures: u64,
    pub first_failure: Option<Subset>,
}

/// Wire form of a cover part.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CoverPartFile {
    Explicit {
        sets: Vec<Subset>,
    },
    PrefixBinomial {
        order: Vec<usize>,
        a: u64,
        kmax: u64,
    },
    StarForest {
        graph: GraphFile,
        b: u64,
        #[serde(rename = "L")]
        l: u64,
        #[serde(rename = "J", with = "rational::serde_rational")]
        j: Rational,
        p: Probability,
    },
}

impl From<&CoverPart> for CoverPartFile {
    fn from(part: &CoverPart) -> Self {
        match part {
            CoverPart::ExplicitList(sets) => CoverPartFile::Explicit { sets: sets.clone() },
            CoverPart::PrefixBinomial { order, a, kmax } => {
                CoverPartFile::PrefixBinomial { order: order.clone(), a: *a, kmax: *kmax }
            }
            CoverPart::StarForestFamily(f) => CoverPartFile::StarForest {
                graph: f.graph.to_file(),
                b: f.b,
                l: f.l,
                j: f.j.clone(),
                p: f.p.clone(),
            },
        }
    }
}

impl TryFrom<&CoverPartFile> for CoverPart {
    type Error = Error;

    fn try_from(f: &CoverPartFile) -> Result<Self> {
        Ok(match f {
            CoverPartFile::Explicit { sets } => CoverPart::explicit(sets.iter().copied()),
            CoverPartFile::PrefixBinomial { order, a, kmax } => {
                let mut seen = Subset::EMPTY;
                for &v in order {
                    if v >= crate::subset::MAX_GROUND_SET || seen.contains(v) {
                        return Err(Error::Format(format!("prefix order has a repeated or out-of-range vertex {v}")));
                    }
                    seen = seen.with(v);
                }
                if *a == 0 {
                    return Err(Error::Format("prefix step a must be positive".into()));
                }
                CoverPart::prefix_binomial(order.clone(), *a, *kmax)
            }
            CoverPartFile::StarForest { graph, b, l, j, p } => {
                if *b == 0 || *l == 0 {
                    return Err(Error::Format("star-forest b and L must be positive".into()));
                }
                let g = WeightedGraph::try_from(graph)?;
                CoverPart::StarForestFamily(StarForestPart::new(Arc::new(g), *b, *l, j.clone(), p.clone()))
            }
        })
    }
}

impl Serialize for Cover {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<CoverPartFile> = self.parts.iter().map(CoverPartFile::from).collect();
        parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cover {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let files = Vec::<CoverPartFile>::deserialize(d)?;
        let parts = files.iter().map(CoverPart::try_from).collect::<Result<Vec<_>>>();
        parts.map(Cover::new).map_err(serde::de::Error::custom)
    }
}

/// Stars of a star-forest witness, for reports.
pub fn star_forest_witness(part: &CoverPart, u: Subset) -> Option<Vec<Star>> {
    match part {
        CoverPart::StarForestFamily(f) => f.find_inside(u),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn s(v: &[usize]) -> Subset {
        Subset::from_indices(8, v).unwrap()
    }

    #[test]
    fn explicit_cost_examples() {
        let half = Probability::ratio(1, 2).unwrap();
        let part = CoverPart::explicit([s(&[0]), s(&[1, 2])]);
        assert_eq!(part.cost(&half).exact, Some(rat(3, 4)));
        assert_eq!(CoverPart::explicit([]).cost(&half).upper_bound, int(0));
    }

    #[test]
    fn prefix_cost_matches_member_enumeration() {
        // a = 2, n = 4, p = 1/4: 2/4 + 6/16 + 4/64 + 1/256.
        let p = Probability::ratio(1, 4).unwrap();
        let part = CoverPart::prefix_binomial(vec![0, 1, 2, 3], 2, 4);
        let expected = rat(2, 4) + rat(6, 16) + rat(4, 64) + rat(1, 256);
        assert_eq!(part.cost(&p).exact, Some(expected.clone()));
        let enumerated = (1u64..16)
            .map(Subset)
            .filter(|&w| part.is_member(w))
            .fold(int(0), |acc, w| acc + rational::pow(p.value(), w.len() as u64));
        assert_eq!(enumerated, expected);
    }

    #[test]
    fn smallness_boundaries() {
        let one = Cover::new(vec![CoverPart::explicit([s(&[0])])]);
        assert!(one.smallness_check(&Probability::ratio(1, 2).unwrap()));
        assert!(!one.smallness_check(&Probability::ratio(51, 100).unwrap()));
        let empty_set = Cover::new(vec![CoverPart::explicit([Subset::EMPTY])]);
        assert!(!empty_set.smallness_check(&Probability::ratio(1, 10).unwrap()));
    }

    #[test]
    fn coverage_examples() {
        let sweeper = Sweeper::default();
        let c = Cover::new(vec![CoverPart::explicit([s(&[0])])]);
        assert!(c.verify_coverage(3, |u| u.contains(0), &sweeper).unwrap().verified);
        let c = Cover::new(vec![CoverPart::explicit([s(&[0, 1])])]);
        let r = c.verify_coverage(3, |u| u.len() >= 2, &sweeper).unwrap();
        assert!(!r.verified);
        // Bitmask order: {0,2} = 0b101 precedes {1,2} = 0b110.
        assert_eq!(r.first_counterexample, Some(s(&[0, 2])));
        assert!(c.verify_coverage(21, |_| true, &sweeper).is_err());
    }

    #[test]
    fn prefix_witness_examples() {
        assert_eq!(prefix_witness(&[0, 1, 2], 1, 3, s(&[0])), Some((1, s(&[0]))));
        assert_eq!(prefix_witness(&[0, 1, 2], 1, 3, Subset::EMPTY), None);
        // order 3,1,0,2 with a = 2: k = 1 needs u ∩ {3,1}; k = 2 needs 2 of {3,1,0,2}.
        assert_eq!(prefix_witness(&[3, 1, 0, 2], 2, 4, s(&[0, 2])), Some((2, s(&[0, 2]))));
    }

    #[test]
    fn cover_round_trips_through_json() {
        let g = Arc::new(WeightedGraph::unweighted(4, &[(0, 1), (2, 3)]).unwrap());
        let p = Probability::ratio(1, 3).unwrap();
        let cover = Cover::new(vec![
            CoverPart::explicit([s(&[1, 2]), s(&[0])]),
            CoverPart::prefix_binomial(vec![2, 0, 1], 2, 3),
            CoverPart::StarForestFamily(StarForestPart::new(g, 2, 1, rat(7, 2), p)),
        ]);
        let text = serde_json::to_string(&cover).unwrap();
        let back: Cover = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cover);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
