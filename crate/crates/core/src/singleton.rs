//! Covers of `{U : zeta(U) >= J zeta(V) p}` for vertex weights `zeta`.
//!
//! Sort the vertices by non-increasing weight and put `a = ceil(1/(J p))`.
//! If `U` had fewer than `k` vertices among the first `a k` for every `k`,
//! its weight would be below `J zeta(V) p`; so the `k`-subsets of the first
//! `a k` vertices, over all `k`, cover the target. Their cost is
//! `sum_k binom(a k, k) p^k <= sum_k (e a p)^k`, and `e a p < 2e/J`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cover::{prefix_binomial_cost, prefix_witness, CostMethod, CostReport, Cover, CoverPart};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rational::{self, Probability, Rational};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingletonInstance {
    zeta: Vec<Rational>,
    p: Probability,
    j: Rational,
}

impl SingletonInstance {
    /// Requires `zeta >= 0` not identically zero, `p > 0` and `J > 2e`.
    pub fn new(zeta: Vec<Rational>, p: Probability, j: Rational) -> Result<Self> {
        if zeta.len() > crate::subset::MAX_GROUND_SET {
            return Err(Error::GroundSetTooLarge(zeta.len()));
        }
        if zeta.iter().any(|z| z.is_negative()) {
            return Err(Error::Guard("vertex weights must be nonnegative".into()));
        }
        if zeta.iter().all(|z| z.is_zero()) {
            return Err(Error::ZeroWeights);
        }
        if p.value().is_zero() {
            return Err(Error::Guard("p must be positive (at p = 0 every set, even the empty one, is a target)".into()));
        }
        // The construction needs J > 2e; the guard uses an upper bound for e.
        if j <= rational::int(2) * rational::e_upper() {
            return Err(Error::Guard(format!("J = {} must exceed 2e", rational::format_rational(&j))));
        }
        Ok(SingletonInstance { zeta, p, j })
    }

    /// `zeta(v) = lambda(D({v}))`, half the weight of the edges at `v`.
    pub fn from_graph(g: &WeightedGraph, p: Probability, j: Rational) -> Result<Self> {
        let half = rational::rat(1, 2);
        Self::new((0..g.n()).map(|v| g.incident_weight(v) * &half).collect(), p, j)
    }

    pub fn n(&self) -> usize {
        self.zeta.len()
    }

    pub fn zeta(&self) -> &[Rational] {
        &self.zeta
    }

    pub fn p(&self) -> &Probability {
        &self.p
    }

    pub fn j(&self) -> &Rational {
        &self.j
    }

    pub fn total(&self) -> Rational {
        self.zeta.iter().fold(Rational::zero(), |a, z| a + z)
    }

    /// `J zeta(V) p`.
    pub fn threshold(&self) -> Rational {
        &self.j * self.total() * self.p.value()
    }

    pub fn weight(&self, u: Subset) -> Rational {
        u.iter().fold(Rational::zero(), |a, v| a + &self.zeta[v])
    }

    pub fn is_target(&self, u: Subset) -> bool {
        self.weight(u) >= self.threshold()
    }

    /// Target predicate in integer arithmetic, for exhaustive sweeps.
    pub fn target_predicate(&self) -> Box<dyn Fn(Subset) -> bool + Send + Sync> {
        let den = rational::common_denominator(&self.zeta);
        let scaled: Option<Vec<u64>> = self
            .zeta
            .iter()
            .map(|z| u64::try_from((z * Rational::from_integer(den.clone())).to_integer()).ok())
            .collect();
        if let Some(w) = scaled {
            let sum: u128 = w.iter().map(|&x| x as u128).sum();
            let t = rational::ceil(&(&self.j * self.p.value() * Rational::from_integer(sum.into())));
            if let Ok(t) = u128::try_from(t) {
                return Box::new(move |u: Subset| u.iter().map(|v| w[v] as u128).sum::<u128>() >= t);
            }
        }
        let this = self.clone();
        Box::new(move |u| this.is_target(u))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingletonCover {
    /// Positive-weight vertices by non-increasing weight, ties by index.
    pub order: Vec<usize>,
    pub a: u64,
    pub kmax: u64,
    /// `J p > 1`: the target is empty and so is the cover.
    pub degenerate: bool,
    #[serde(skip)]
    pub cover: Cover,
    pub cost: CostReport,
    /// `sum_{k>=1} (e a p)^k` with `e` rounded up, when `e a p < 1`.
    #[serde(with = "rational::serde_rational_opt")]
    pub geometric_bound: Option<Rational>,
    /// `2e/(J - 2e)` with `e` rounded down, so that `cost < bound` implies
    /// the inequality for the true `e`.
    #[serde(with = "rational::serde_rational")]
    pub bound: Rational,
}

impl SingletonCover {
    pub fn within_bound(&self) -> bool {
        *self.cost.best() < self.bound
    }

    pub fn witness(&self, u: Subset) -> Option<(u64, Subset)> {
        singleton_witness(&self.order, self.a, self.kmax, u)
    }
}

/// `2e/(J - 2e)` evaluated with the lower rational bound for `e`.
pub fn singleton_bound(j: &Rational) -> Rational {
    let two_e = rational::int(2) * rational::e_lower();
    &two_e / (j - &two_e)
}

pub fn build_singleton_cover(inst: &SingletonInstance) -> SingletonCover {
    let p = inst.p.value();
    let bound = singleton_bound(&inst.j);
    let jp = &inst.j * p;
    if jp > Rational::one() {
        return SingletonCover {
            order: Vec::new(),
            a: 1,
            kmax: 0,
            degenerate: true,
            cover: Cover::empty(),
            cost: CostReport::exact(Rational::zero(), CostMethod::ClosedForm),
            geometric_bound: Some(Rational::zero()),
            bound,
        };
    }
    let mut order: Vec<usize> = (0..inst.n()).filter(|&v| inst.zeta[v].is_positive()).collect();
    order.sort_by(|&x, &y| inst.zeta[y].cmp(&inst.zeta[x]).then(x.cmp(&y)));
    let a: u64 = rational::ceil(&(Rational::one() / &jp)).try_into().expect("a = ceil(1/(Jp)) fits in u64");
    let kmax = order.len() as u64;
    let exact = prefix_binomial_cost(kmax, a, kmax, p);
    let eap = rational::e_upper() * rational::from_u64(a) * p;
    let geometric_bound = (eap < Rational::one()).then(|| &eap / (Rational::one() - &eap));
    let cost = CostReport::exact(exact, CostMethod::ClosedForm);
    SingletonCover {
        cover: Cover::new(vec![CoverPart::prefix_binomial(order.clone(), a, kmax)]),
        order,
        a,
        kmax,
        degenerate: false,
        cost,
        geometric_bound,
        bound,
    }
}

/// Smallest `k >= 1` with `|u ∩ order[..min(a k, n)]| >= k`, with a
/// `k`-subset of that intersection.
pub fn singleton_witness(order: &[usize], a: u64, kmax: u64, u: Subset) -> Option<(u64, Subset)> {
    prefix_witness(order, a, kmax, u)
}
