//! The expectation threshold `q` and the fractional expectation threshold `q_f`.
//!
//! `F` is weakly p-small when some `lambda >= 0` on subsets satisfies
//! `sum_{S ⊆ M} lambda_S >= 1` for every minimal set `M` and
//! `sum_S lambda_S p^|S| <= 1/2`; it is p-small when `lambda` can be taken
//! 0/1. Both minimum costs are computed exactly and come with certificates.
//!
//! Candidate support. Only nonempty subsets of minimal sets can help, and
//! the solvers go one step further: a set `S` can always be replaced by the
//! intersection of all minimal sets containing it, which lies in exactly
//! the same minimal sets and is no more expensive. So it suffices to search
//! over nonempty intersections of minimal sets. The cap on candidates is
//! still applied to the unreduced count.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyFile, IncreasingFamily, Interval};
use crate::lp::CoveringLp;
use crate::rational::{self, Probability, Rational, RationalValue};
use crate::subset::{Subset, MAX_EXHAUSTIVE};

/// Limit on the number of distinct nonempty subsets of minimal sets.
pub const CANDIDATE_CAP: usize = 1 << 16;

/// Above this many (reduced) candidates the LP is solved in `f64` and the
/// solution repaired into an exact certificate.
pub const EXACT_LP_LIMIT: usize = 4096;

const MAX_PIVOTS: usize = 1_000_000;
const MAX_NODES: u64 = 50_000_000;

/// Default bisection tolerance `2^-30`.
pub fn default_tolerance() -> Rational {
    rational::pow2(-30)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidates {
    /// Distinct nonempty subsets of minimal sets.
    pub unreduced: usize,
    /// Nonempty intersections of minimal sets, sorted by bitmask.
    pub sets: Vec<Subset>,
}

pub fn candidates(fam: &IncreasingFamily) -> Result<Candidates> {
    let cap = CANDIDATE_CAP;
    let mut all: HashSet<Subset> = HashSet::new();
    for m in fam.minimal_sets() {
        if m.len() > 16 {
            return Err(Error::CandidateCap { cap });
        }
        for s in m.subsets().filter(|s| !s.is_empty()) {
            all.insert(s);
            if all.len() > cap {
                return Err(Error::CandidateCap { cap });
            }
        }
    }
    let mut closed: BTreeSet<Subset> = fam.minimal_sets().iter().copied().collect();
    let mut frontier: Vec<Subset> = closed.iter().copied().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for c in &frontier {
            for m in fam.minimal_sets() {
                let x = c.intersection(*m);
                if !x.is_empty() && closed.insert(x) {
                    next.push(x);
                }
            }
        }
        frontier = next;
    }
    Ok(Candidates { unreduced: all.len(), sets: closed.into_iter().collect() })
}

/// Covering-LP rows: for each minimal set, the candidates inside it.
fn rows(fam: &IncreasingFamily, cands: &[Subset]) -> Vec<Vec<usize>> {
    fam.minimal_sets()
        .iter()
        .map(|m| (0..cands.len()).filter(|&j| cands[j].is_subset_of(*m)).collect())
        .collect()
}

/// A weak-smallness witness: nonnegative weights on subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalCertificate {
    pub p: Probability,
    /// `(S, lambda_S)` with `lambda_S > 0`, sorted by bitmask.
    pub lambda: Vec<(Subset, Rational)>,
}

impl FractionalCertificate {
    /// `sum_S lambda_S p^|S|`.
    pub fn cost(&self) -> Rational {
        let p = self.p.value();
        self.lambda.iter().fold(Rational::zero(), |acc, (s, l)| acc + l * rational::pow(p, s.len() as u64))
    }

    /// Checks feasibility exactly and returns the cost.
    pub fn verify(&self, fam: &IncreasingFamily) -> Result<Rational> {
        for (s, l) in &self.lambda {
            if l.is_negative() {
                return Err(Error::Certificate(format!("negative weight on {s:?}")));
            }
            if !s.fits(fam.n()) {
                return Err(Error::Certificate(format!("set {s:?} is outside the ground set")));
            }
        }
        for m in fam.minimal_sets() {
            let load = self
                .lambda
                .iter()
                .filter(|(s, _)| s.is_subset_of(*m))
                .fold(Rational::zero(), |acc, (_, l)| acc + l);
            if load < Rational::one() {
                return Err(Error::Certificate(format!("minimal set {m:?} carries weight {}", rational::format_rational(&load))));
            }
        }
        Ok(self.cost())
    }
}

/// A smallness witness: a cover of the minimal sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralCertificate {
    pub p: Probability,
    /// Sorted by bitmask.
    pub cover: Vec<Subset>,
}

impl IntegralCertificate {
    pub fn cost(&self) -> Rational {
        let p = self.p.value();
        self.cover.iter().fold(Rational::zero(), |acc, s| acc + rational::pow(p, s.len() as u64))
    }

    pub fn verify(&self, fam: &IncreasingFamily) -> Result<Rational> {
        if let Some(s) = self.cover.iter().find(|s| !s.fits(fam.n())) {
            return Err(Error::Certificate(format!("set {s:?} is outside the ground set")));
        }
        if let Some(m) = fam.minimal_sets().iter().find(|m| !self.cover.iter().any(|s| s.is_subset_of(**m))) {
            return Err(Error::Certificate(format!("minimal set {m:?} contains no cover member")));
        }
        Ok(self.cost())
    }
}

#[derive(Clone, Debug)]
pub struct FractionalSolution {
    /// The LP optimum when `exact`, otherwise the cost of the repaired certificate.
    pub optimum: Rational,
    pub certificate: FractionalCertificate,
    /// Optimal duals, one per minimal set (exact mode only).
    pub dual: Option<Vec<Rational>>,
    pub exact: bool,
    pub candidates: Candidates,
}

/// Minimum of `sum lambda_S p^|S|` over fractional covers.
pub fn min_fractional_cost(fam: &IncreasingFamily, p: &Probability) -> Result<FractionalSolution> {
    let cands = candidates(fam)?;
    let rows = rows(fam, &cands.sets);
    let pw = rational::powers(p.value(), fam.n());
    if cands.sets.len() <= EXACT_LP_LIMIT {
        let lp = CoveringLp { costs: cands.sets.iter().map(|s| pw[s.len()].clone()).collect(), rows };
        let sol = lp.solve(MAX_PIVOTS)?;
        let lambda = cands
            .sets
            .iter()
            .zip(sol.primal)
            .filter(|(_, x)| x.is_positive())
            .map(|(s, x)| (*s, x))
            .collect();
        let certificate = FractionalCertificate { p: p.clone(), lambda };
        let cost = certificate.verify(fam)?;
        if cost != sol.objective {
            return Err(Error::Internal("LP objective disagrees with its certificate".into()));
        }
        return Ok(FractionalSolution { optimum: cost, certificate, dual: Some(sol.dual), exact: true, candidates: cands });
    }
    let lp = CoveringLp { costs: cands.sets.iter().map(|s| rational::to_f64(&pw[s.len()])).collect(), rows };
    let sol = lp.solve(MAX_PIVOTS)?;
    let certificate = repair(fam, p, &cands.sets, &sol.primal)?;
    let cost = certificate.verify(fam)?;
    Ok(FractionalSolution { optimum: cost, certificate, dual: None, exact: false, candidates: cands })
}

/// Turns a floating-point LP solution into an exactly feasible certificate:
/// scale by `1 + 2^-20`, then by the inverse of the smallest row load if
/// some row is still short.
fn repair(fam: &IncreasingFamily, p: &Probability, cands: &[Subset], x: &[f64]) -> Result<FractionalCertificate> {
    let bump = Rational::one() + rational::pow2(-20);
    let mut lambda: Vec<(Subset, Rational)> = cands
        .iter()
        .zip(x)
        .filter(|(_, &v)| v > 0.0)
        .map(|(s, &v)| (*s, rational::from_f64_dyadic(v, 60) * &bump))
        .filter(|(_, v)| v.is_positive())
        .collect();
    let min_load = fam
        .minimal_sets()
        .iter()
        .map(|m| lambda.iter().filter(|(s, _)| s.is_subset_of(*m)).fold(Rational::zero(), |a, (_, l)| a + l))
        .min()
        .unwrap_or_else(Rational::one);
    if !min_load.is_positive() {
        return Err(Error::Internal("floating-point LP left a minimal set uncovered".into()));
    }
    if min_load < Rational::one() {
        let f = Rational::one() / min_load;
        for (_, l) in lambda.iter_mut() {
            *l *= &f;
        }
    }
    Ok(FractionalCertificate { p: p.clone(), lambda })
}

/// Dual feasibility: `sum_{M ⊇ S} y_M <= p^|S|` for every candidate `S`,
/// with `y >= 0`; then `sum y` is a lower bound on every fractional cover.
pub fn dual_lower_bound(fam: &IncreasingFamily, p: &Probability, dual: &[Rational]) -> Result<Rational> {
    if dual.len() != fam.minimal_sets().len() || dual.iter().any(|y| y.is_negative()) {
        return Err(Error::Certificate("dual vector has the wrong length or a negative entry".into()));
    }
    let cands = candidates(fam)?;
    for s in &cands.sets {
        let load = fam
            .minimal_sets()
            .iter()
            .zip(dual)
            .filter(|(m, _)| s.is_subset_of(**m))
            .fold(Rational::zero(), |a, (_, y)| a + y);
        if load > rational::pow(p.value(), s.len() as u64) {
            return Err(Error::Certificate(format!("dual constraint violated at {s:?}")));
        }
    }
    Ok(dual.iter().fold(Rational::zero(), |a, y| a + y))
}

#[derive(Clone, Debug)]
pub struct IntegralSolution {
    pub optimum: Rational,
    pub certificate: IntegralCertificate,
    /// The exact LP bound at the root, when computed.
    pub lp_bound: Option<Rational>,
    pub nodes: u64,
}

/// Minimum of `sum_{S in G} p^|S|` over covers `G` of the minimal sets.
pub fn min_integral_cost(fam: &IncreasingFamily, p: &Probability) -> Result<IntegralSolution> {
    let mut bb = BranchAndBound::new(fam, p, None)?;
    bb.run()?;
    bb.into_solution()
}

/// Some cover of cost at most `budget`, or `None` if none exists.
pub fn integral_cover_within(fam: &IncreasingFamily, p: &Probability, budget: &Rational) -> Result<Option<IntegralCertificate>> {
    let mut bb = BranchAndBound::new(fam, p, Some(budget.clone()))?;
    bb.run()?;
    let sol = bb.into_solution()?;
    Ok((sol.optimum <= *budget).then_some(sol.certificate))
}

struct BranchAndBound<'a> {
    fam: &'a IncreasingFamily,
    p: Probability,
    cands: Vec<Subset>,
    cost: Vec<Rational>,
    cost_f: Vec<f64>,
    /// Rows (minimal-set indices) covered by each candidate.
    covers: Vec<Vec<usize>>,
    /// Candidates inside each row, in branching order.
    row_cands: Vec<Vec<usize>>,
    budget: Option<Rational>,
    best: Option<(Rational, Vec<usize>)>,
    best_f: f64,
    root_lp: Option<Rational>,
    nodes: u64,
}

impl<'a> BranchAndBound<'a> {
    fn new(fam: &'a IncreasingFamily, p: &Probability, budget: Option<Rational>) -> Result<Self> {
        let mut cands = candidates(fam)?.sets;
        let pw = rational::powers(p.value(), fam.n());
        let coverage = |s: &Subset| fam.minimal_sets().iter().filter(|m| s.is_subset_of(**m)).count() as u64;
        // Cost per covered row, then bitmask.
        cands.sort_by(|a, b| {
            let lhs = &pw[a.len()] * rational::from_u64(coverage(b));
            let rhs = &pw[b.len()] * rational::from_u64(coverage(a));
            lhs.cmp(&rhs).then(a.cmp(b))
        });
        let cost: Vec<Rational> = cands.iter().map(|s| pw[s.len()].clone()).collect();
        let cost_f = cost.iter().map(rational::to_f64).collect();
        let mins = fam.minimal_sets();
        let covers: Vec<Vec<usize>> =
            cands.iter().map(|s| (0..mins.len()).filter(|&r| s.is_subset_of(mins[r])).collect()).collect();
        let mut row_cands = vec![Vec::new(); mins.len()];
        for (j, rs) in covers.iter().enumerate() {
            for &r in rs {
                row_cands[r].push(j);
            }
        }
        Ok(BranchAndBound {
            fam,
            p: p.clone(),
            cands,
            cost,
            cost_f,
            covers,
            row_cands,
            budget,
            best: None,
            best_f: f64::INFINITY,
            root_lp: None,
            nodes: 0,
        })
    }

    fn done(&self) -> bool {
        match (&self.best, &self.budget, &self.root_lp) {
            (Some((c, _)), Some(b), _) if c <= b => true,
            (Some((c, _)), _, Some(lb)) => c == lb,
            _ => false,
        }
    }

    fn offer(&mut self, cost: Rational, chosen: &[usize]) {
        if self.best.as_ref().is_none_or(|(c, _)| cost < *c) {
            self.best_f = rational::to_f64(&cost);
            self.best = Some((cost, chosen.to_vec()));
        }
    }

    fn run(&mut self) -> Result<()> {
        let m = self.fam.minimal_sets().len();
        self.greedy();
        if self.done() {
            return Ok(());
        }
        if self.cands.len() <= EXACT_LP_LIMIT {
            let lp = CoveringLp { costs: self.cost.clone(), rows: self.row_cands.clone() };
            let lb = lp.solve(MAX_PIVOTS)?.objective;
            if let Some(b) = &self.budget {
                if lb > *b {
                    return Ok(());
                }
            }
            self.root_lp = Some(lb);
            if self.done() {
                return Ok(());
            }
        }
        let mut state = Node {
            hits: vec![0u32; m],
            uncovered: m,
            excluded: vec![false; self.cands.len()],
            chosen: Vec::new(),
            cost: Rational::zero(),
            cost_f: 0.0,
        };
        self.search(&mut state)
    }

    fn greedy(&mut self) {
        let m = self.fam.minimal_sets().len();
        let mut covered = vec![false; m];
        let mut left = m;
        let mut chosen = Vec::new();
        let mut cost = Rational::zero();
        while left > 0 {
            // Cheapest cost per newly covered row; the candidate order breaks ties.
            let mut pick: Option<(usize, usize)> = None;
            for j in 0..self.cands.len() {
                let new = self.covers[j].iter().filter(|&&r| !covered[r]).count();
                if new == 0 {
                    continue;
                }
                let better = match pick {
                    None => true,
                    Some((bj, bn)) => {
                        let lhs = &self.cost[j] * rational::from_u64(bn as u64);
                        let rhs = &self.cost[bj] * rational::from_u64(new as u64);
                        lhs < rhs
                    }
                };
                if better {
                    pick = Some((j, new));
                }
            }
            let Some((j, _)) = pick else { return };
            for &r in &self.covers[j] {
                if !covered[r] {
                    covered[r] = true;
                    left -= 1;
                }
            }
            cost += &self.cost[j];
            chosen.push(j);
        }
        self.offer(cost, &chosen);
    }

    /// Whether a node with lower bound `lb` (floating point) may be dropped.
    fn prunable(&self, lb: f64) -> bool {
        let margin = 1e-9 * lb.abs().max(self.best_f.abs()) + f64::MIN_POSITIVE;
        if lb > self.best_f + margin {
            return true;
        }
        match &self.budget {
            Some(b) => lb > rational::to_f64(b) + margin,
            None => false,
        }
    }

    fn search(&mut self, node: &mut Node) -> Result<()> {
        self.nodes += 1;
        if self.nodes > MAX_NODES {
            return Err(Error::Internal(format!("branch and bound exceeded {MAX_NODES} nodes")));
        }
        if node.uncovered == 0 {
            let cost = node.cost.clone();
            let chosen = node.chosen.clone();
            self.offer(cost, &chosen);
            return Ok(());
        }
        if self.best.as_ref().is_some_and(|(c, _)| node.cost >= *c) || self.prunable(node.cost_f) {
            return Ok(());
        }
        let open: Vec<usize> = (0..node.hits.len()).filter(|&r| node.hits[r] == 0).collect();
        let available = |r: usize| self.row_cands[r].iter().filter(|&&j| !node.excluded[j]).count();
        let Some(&row) = open.iter().min_by_key(|&&r| (available(r), r)) else { return Ok(()) };
        if available(row) == 0 {
            return Ok(());
        }
        if let Some(lb) = self.node_bound(node, &open) {
            if self.prunable(node.cost_f + lb) {
                return Ok(());
            }
        } else {
            return Ok(());
        }
        let branch: Vec<usize> = self.row_cands[row].iter().copied().filter(|&j| !node.excluded[j]).collect();
        let mut excluded_here = Vec::new();
        for j in branch {
            node.apply(j, &self.covers[j], &self.cost[j], self.cost_f[j]);
            self.search(node)?;
            node.undo(j, &self.covers[j], &self.cost[j], self.cost_f[j]);
            if self.done() {
                break;
            }
            node.excluded[j] = true;
            excluded_here.push(j);
        }
        for j in excluded_here {
            node.excluded[j] = false;
        }
        Ok(())
    }

    /// Floating-point LP bound on the cost of covering the open rows, or
    /// `None` when some open row has no available candidate.
    fn node_bound(&self, node: &Node, open: &[usize]) -> Option<f64> {
        let mut index = vec![usize::MAX; self.cands.len()];
        let mut costs = Vec::new();
        let mut rows = Vec::with_capacity(open.len());
        for &r in open {
            let mut row = Vec::new();
            for &j in &self.row_cands[r] {
                if node.excluded[j] {
                    continue;
                }
                if index[j] == usize::MAX {
                    index[j] = costs.len();
                    costs.push(self.cost_f[j]);
                }
                row.push(index[j]);
            }
            if row.is_empty() {
                return None;
            }
            rows.push(row);
        }
        // Normalize so the simplex tolerances see values of order one.
        let scale = costs.iter().cloned().fold(0.0f64, f64::max);
        if scale <= 0.0 {
            return Some(0.0);
        }
        let lp = CoveringLp { costs: costs.iter().map(|c| c / scale).collect(), rows };
        match lp.solve(MAX_PIVOTS) {
            Ok(sol) => Some((sol.objective * scale * (1.0 - 1e-9)).max(0.0)),
            Err(_) => Some(0.0),
        }
    }

    fn into_solution(self) -> Result<IntegralSolution> {
        let (optimum, chosen) = self.best.ok_or(Error::Infeasible)?;
        let mut cover: Vec<Subset> = chosen.iter().map(|&j| self.cands[j]).collect();
        cover.sort();
        let certificate = IntegralCertificate { p: self.p, cover };
        let cost = certificate.verify(self.fam)?;
        if cost != optimum {
            return Err(Error::Internal("cover cost disagrees with its certificate".into()));
        }
        Ok(IntegralSolution { optimum, certificate, lp_bound: self.root_lp, nodes: self.nodes })
    }
}

struct Node {
    hits: Vec<u32>,
    uncovered: usize,
    excluded: Vec<bool>,
    chosen: Vec<usize>,
    cost: Rational,
    cost_f: f64,
}

impl Node {
    fn apply(&mut self, j: usize, rows: &[usize], c: &Rational, cf: f64) {
        for &r in rows {
            if self.hits[r] == 0 {
                self.uncovered -= 1;
            }
            self.hits[r] += 1;
        }
        self.chosen.push(j);
        self.cost += c;
        self.cost_f += cf;
    }

    fn undo(&mut self, j: usize, rows: &[usize], c: &Rational, cf: f64) {
        for &r in rows {
            self.hits[r] -= 1;
            if self.hits[r] == 0 {
                self.uncovered += 1;
            }
        }
        let last = self.chosen.pop();
        debug_assert_eq!(last, Some(j));
        self.cost -= c;
        self.cost_f -= cf;
    }
}

/// Bisection on a monotone predicate over `[0, 1]`: the returned interval
/// has `feasible(lo)` and, unless `lo = hi = 1`, not `feasible(hi)`.
fn bisect<C>(tol: &Rational, mut feasible: impl FnMut(&Probability) -> Result<Option<C>>) -> Result<(Interval, C)> {
    if !tol.is_positive() {
        return Err(Error::Guard("tolerance must be positive".into()));
    }
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    let mut cert = feasible(&Probability::zero())?.ok_or_else(|| Error::Internal("not small at p = 0".into()))?;
    if let Some(c) = feasible(&Probability::one())? {
        return Ok((Interval { lo: hi.clone(), hi }, c));
    }
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / rational::int(2);
        match feasible(&Probability::new(mid.clone())?)? {
            Some(c) => {
                lo = mid;
                cert = c;
            }
            None => hi = mid,
        }
    }
    Ok((Interval { lo, hi }, cert))
}

#[derive(Clone, Debug)]
pub struct Threshold<C> {
    pub interval: Interval,
    /// Certificate at `interval.lo`.
    pub certificate: C,
}

/// Brackets `q_f(F)`; the certificate proves weak smallness at the lower end.
pub fn q_f(fam: &IncreasingFamily, tol: &Rational) -> Result<Threshold<FractionalCertificate>> {
    let half = rational::rat(1, 2);
    let (interval, certificate) = bisect(tol, |p| {
        let sol = min_fractional_cost(fam, p)?;
        Ok((sol.optimum <= half).then_some(sol.certificate))
    })?;
    Ok(Threshold { interval, certificate })
}

/// Brackets `q(F)`; the certificate proves smallness at the lower end.
pub fn q_threshold(fam: &IncreasingFamily, tol: &Rational) -> Result<Threshold<IntegralCertificate>> {
    let half = rational::rat(1, 2);
    let (interval, certificate) = bisect(tol, |p| integral_cover_within(fam, p, &half))?;
    Ok(Threshold { interval, certificate })
}

/// The terms of `mu_p(F) <= sum_{F} mu_p(F) sum_{S ⊆ F} lambda_S
/// <= sum_S lambda_S p^|S|`, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainTerms {
    pub mu: Rational,
    pub weighted_mu: Rational,
    pub lambda_cost: Rational,
}

impl ChainTerms {
    pub fn holds(&self) -> bool {
        self.mu <= self.weighted_mu && self.weighted_mu <= self.lambda_cost
    }
}

pub fn chain_terms(fam: &IncreasingFamily, cert: &FractionalCertificate) -> Result<ChainTerms> {
    cert.verify(fam)?;
    let n = fam.n();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::EnumerationCap { n, cap: MAX_EXHAUSTIVE });
    }
    let mut by_size = vec![Rational::zero(); n + 1];
    let mut counts = vec![0u64; n + 1];
    for bits in 0..1u64 << n {
        let u = Subset(bits);
        if !fam.contains(u) {
            continue;
        }
        counts[u.len()] += 1;
        for (s, l) in &cert.lambda {
            if s.is_subset_of(u) {
                by_size[u.len()] += l;
            }
        }
    }
    let p = cert.p.value();
    let q = Rational::one() - p;
    let pp = rational::powers(p, n);
    let qp = rational::powers(&q, n);
    let weighted_mu = (0..=n).fold(Rational::zero(), |acc, k| acc + &by_size[k] * &pp[k] * &qp[n - k]);
    Ok(ChainTerms { mu: crate::family::mu_from_profile(&counts, p), weighted_mu, lambda_cost: cert.cost() })
}

/// All three thresholds of one family, checked against `q <= q_f <= p_c`.
#[derive(Clone, Debug)]
pub struct ThresholdChain {
    pub p_c: Interval,
    pub q_f: Threshold<FractionalCertificate>,
    pub q: Threshold<IntegralCertificate>,
    pub terms: ChainTerms,
    /// Lower ends ordered up to `tol` and upper ends by `interval_le`.
    pub ordered: bool,
    pub widths_ok: bool,
}

impl ThresholdChain {
    pub fn holds(&self) -> bool {
        self.ordered && self.widths_ok && self.terms.holds() && self.terms.lambda_cost <= rational::rat(1, 2)
    }

    /// The `q_f` and `q` certificates, with the family recorded.
    pub fn certificates(&self, fam: &IncreasingFamily) -> Vec<CertificateDocument> {
        vec![
            CertificateDocument { certificate: Certificate::Fractional(self.q_f.certificate.clone()), family: Some(fam.clone()) },
            CertificateDocument { certificate: Certificate::Integral(self.q.certificate.clone()), family: Some(fam.clone()) },
        ]
    }
}

pub fn threshold_chain(fam: &IncreasingFamily, tol: &Rational) -> Result<ThresholdChain> {
    let p_c = fam.p_c(tol)?;
    let q_f = q_f(fam, tol)?;
    let q = q_threshold(fam, tol)?;
    let lo_ok = q.interval.lo <= &q_f.interval.lo + tol && q_f.interval.lo <= &p_c.hi + tol;
    let hi_ok = interval_le(&q.interval, &q_f.interval, tol) && interval_le(&q_f.interval, &p_c, tol);
    let widths_ok = [&p_c, &q.interval, &q_f.interval].iter().all(|iv| iv.width() <= *tol);
    let terms = chain_terms(fam, &q_f.certificate)?;
    Ok(ThresholdChain { p_c, q_f, q, terms, ordered: lo_ok && hi_ok, widths_ok })
}

/// On-disk certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Fractional(FractionalCertificate),
    Integral(IntegralCertificate),
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    p: Probability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<(Subset, RationalValue)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cover: Option<Vec<Subset>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<FamilyFile>,
}

/// A certificate together with the family it refers to, if recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateDocument {
    pub certificate: Certificate,
    pub family: Option<IncreasingFamily>,
}

impl Certificate {
    pub fn p(&self) -> &Probability {
        match self {
            Certificate::Fractional(c) => &c.p,
            Certificate::Integral(c) => &c.p,
        }
    }

    pub fn verify(&self, fam: &IncreasingFamily) -> Result<Rational> {
        match self {
            Certificate::Fractional(c) => c.verify(fam),
            Certificate::Integral(c) => c.verify(fam),
        }
    }
}

impl CertificateDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut file = CertificateFile {
            p: self.certificate.p().clone(),
            lambda: None,
            cover: None,
            family: self.family.as_ref().map(FamilyFile::from),
        };
        match &self.certificate {
            Certificate::Fractional(c) => {
                file.lambda = Some(c.lambda.iter().map(|(s, l)| (*s, RationalValue(l.clone()))).collect())
            }
            Certificate::Integral(c) => file.cover = Some(c.cover.clone()),
        }
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CertificateFile = serde_json::from_str(text)?;
        let certificate = match (file.lambda, file.cover) {
            (Some(lambda), None) => Certificate::Fractional(FractionalCertificate {
                p: file.p,
                lambda: lambda.into_iter().map(|(s, l)| (s, l.0)).collect(),
            }),
            (None, Some(cover)) => Certificate::Integral(IntegralCertificate { p: file.p, cover }),
            _ => return Err(Error::Format("certificate needs exactly one of \"lambda\" or \"cover\"".into())),
        };
        let family = file.family.as_ref().map(IncreasingFamily::try_from).transpose()?;
        Ok(CertificateDocument { certificate, family })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    /// Re-serializing the parsed file reproduces it byte for byte.
    pub bit_exact: bool,
    #[serde(with = "rational::serde_rational_opt")]
    pub cost: Option<Rational>,
    pub verified: bool,
    pub reason: Option<String>,
}

/// Reads a certificate and re-verifies it against `fam` (or the family
/// recorded in the file).
pub fn replay(path: &Path, fam: Option<&IncreasingFamily>) -> Result<ReplayReport> {
    let text = fs::read_to_string(path)?;
    let doc = CertificateDocument::from_json(&text)?;
    let bit_exact = doc.to_json()? == text;
    let fam = fam.or(doc.family.as_ref()).ok_or_else(|| Error::Format("no family given or recorded".into()))?;
    let half = rational::rat(1, 2);
    Ok(match doc.certificate.verify(fam) {
        Ok(cost) => {
            let small = cost <= half;
            ReplayReport {
                bit_exact,
                verified: small && bit_exact,
                reason: (!small).then(|| "cost exceeds 1/2".to_string()),
                cost: Some(cost),
            }
        }
        Err(e) => ReplayReport { bit_exact, cost: None, verified: false, reason: Some(e.to_string()) },
    })
}

/// Orders two intervals' upper ends with a tolerance: `a.hi <= b.hi + tol`.
pub fn interval_le(a: &Interval, b: &Interval, tol: &Rational) -> bool {
    a.hi.cmp(&(&b.hi + tol)) != Ordering::Greater
}
