//! Covers of `U_0 = {U : lambda(G[U]) >= R^2 lambda(G) p^2}` for weighted graphs.
//!
//! The weights are scaled to maximum 1 and rounded down to powers of two,
//! and `R` is replaced by `R' <= R / sqrt(2)`; the rounded family contains
//! the original one. The cover then has three kinds of pieces:
//!
//! * a singleton prefix cover of `{U : lambda'(D(U)) >= R' w p}`;
//! * for each dyadic class `G_i` with `T_i = 1`, the edges of `G_i`;
//! * for each class with `T_i > 1`, a star-forest cover of `G_i` with
//!   `J = R'/2`, `mu = 2^alpha`, `T = T_i`.
//!
//! Classes are placed in an array by `alpha` (`E_i = |G_i| p^2` lies in
//! `(2^(alpha-1), 2^alpha]`) and `beta` (rank within the column), and
//! `T_i = max{c*_beta 2^(alpha-1), 1}` with `c*_beta = (3/2)^(beta-1) R'^2 / 16`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cover::{CostReport, Cover, CoverPart};
use crate::error::{Error, Result};
use crate::graph::{DyadicRounding, WeightedGraph};
use crate::rational::{self, Probability, Rational};
use crate::singleton::{build_singleton_cover, SingletonCover, SingletonInstance};
use crate::star_forest::{Reduction, Tr2Instance};
use crate::subset::Subset;
use crate::sweep::Sweeper;

/// Largest graph for exhaustive pipeline verification.
pub const MAX_PIPELINE_VERIFY: usize = 12;

/// Binary digits kept when taking `R' = sqrt(R^2/2)`, rounded down.
const SQRT_BITS: u32 = 32;

/// `R' = sqrt(R^2/2)` rounded down to a dyadic rational.
pub fn reduced_r(r: &Rational) -> Rational {
    rational::sqrt_floor_dyadic(&(r * r / rational::int(2)), SQRT_BITS)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    /// `R' >= 4096 e`: every cost cap is asserted.
    Theorem,
    /// `R >= 32`: coverage is still checked, cost caps are only reported.
    Reduced,
}

#[derive(Clone, Debug)]
pub struct PipelineInstance {
    graph: WeightedGraph,
    p: Probability,
    r: Rational,
    mode: GuardMode,
    rounding: DyadicRounding,
    r_prime: Rational,
}

impl PipelineInstance {
    pub fn new(graph: WeightedGraph, p: Probability, r: Rational, mode: GuardMode) -> Result<Self> {
        if p.value().is_zero() {
            return Err(Error::Guard("p must be positive (at p = 0 every vertex set is a target)".into()));
        }
        let rounding = graph.round_down_dyadic()?;
        let r_prime = reduced_r(&r);
        match mode {
            GuardMode::Theorem => {
                let guard = rational::int(4096) * rational::e_upper();
                if r_prime < guard {
                    return Err(Error::Guard(format!(
                        "R' = {} is below 4096e; use R >= 4096 sqrt(2) e or the reduced guard",
                        rational::to_f64(&r_prime)
                    )));
                }
            }
            GuardMode::Reduced => {
                if r < rational::int(32) {
                    return Err(Error::Guard("reduced guard needs R >= 32".into()));
                }
            }
        }
        Ok(PipelineInstance { graph, p, r, mode, rounding, r_prime })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn rounded(&self) -> &WeightedGraph {
        &self.rounding.rounded
    }

    pub fn rounding(&self) -> &DyadicRounding {
        &self.rounding
    }

    pub fn p(&self) -> &Probability {
        &self.p
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn r_prime(&self) -> &Rational {
        &self.r_prime
    }

    pub fn mode(&self) -> GuardMode {
        self.mode
    }

    /// `R^2 lambda(G) p^2`, on the input scale.
    pub fn original_threshold(&self) -> Rational {
        let p = self.p.value();
        &self.r * &self.r * self.graph.total_weight() * p * p
    }

    /// `R'^2 lambda'(G) p^2`.
    pub fn rounded_threshold(&self) -> Rational {
        let p = self.p.value();
        &self.r_prime * &self.r_prime * self.rounded().total_weight() * p * p
    }

    /// `R' lambda'(G) p`: the singleton piece covers `lambda'(D(U))` at least this.
    pub fn boundary_threshold(&self) -> Rational {
        &self.r_prime * self.rounded().total_weight() * self.p.value()
    }

    pub fn in_original_target(&self, u: Subset) -> bool {
        self.graph.induced_weight(u) >= self.original_threshold()
    }

    pub fn in_rounded_target(&self, u: Subset) -> bool {
        self.rounded().induced_weight(u) >= self.rounded_threshold()
    }

    /// `R' p > 1`: the rounded target is empty.
    pub fn is_degenerate(&self) -> bool {
        &self.r_prime * self.p.value() > Rational::one()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    /// `T = 1`: the edges of the class.
    Edges,
    /// `T > 1`: a star-forest cover (itself possibly the edge list when `T < 32`).
    StarForest,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassPlan {
    pub i: u32,
    pub edges: usize,
    #[serde(with = "rational::serde_rational")]
    pub theta: Rational,
    /// `E_i = |G_i| p^2`.
    #[serde(with = "rational::serde_rational")]
    pub e: Rational,
    pub alpha: i64,
    pub beta: u32,
    #[serde(with = "rational::serde_rational")]
    pub c_star: Rational,
    /// `T_(alpha, beta)`.
    #[serde(with = "rational::serde_rational")]
    pub t: Rational,
    /// `y_i = theta_i 2^alpha / p^2`.
    #[serde(with = "rational::serde_rational")]
    pub y: Rational,
    pub kind: PieceKind,
}

/// The `(alpha, beta)` array for the classes of `lambda'`.
pub fn class_plans(decomp: &crate::graph::DyadicDecomposition, p: &Rational, r_prime: &Rational) -> Vec<ClassPlan> {
    let p2 = p * p;
    let mut column_rank: BTreeMap<i64, u32> = BTreeMap::new();
    let mut plans = Vec::new();
    // BTreeMap iteration visits classes by increasing i, which is the row order.
    for (&i, members) in &decomp.classes {
        let e = rational::from_u64(members.len() as u64) * &p2;
        let alpha = rational::ceil_log2(&e);
        let rank = column_rank.entry(alpha).or_insert(0);
        *rank += 1;
        let beta = *rank;
        let c_star = c_star(beta, r_prime);
        let t = (&c_star * rational::pow2(alpha - 1)).max(Rational::one());
        let theta = crate::graph::DyadicDecomposition::theta(i);
        let y = &theta * rational::pow2(alpha) / &p2;
        let kind = if t == Rational::one() { PieceKind::Edges } else { PieceKind::StarForest };
        plans.push(ClassPlan { i, edges: members.len(), theta, e, alpha, beta, c_star, t, y, kind });
    }
    plans
}

/// `c*_beta = (3/2)^(beta-1) R'^2 / 16`.
pub fn c_star(beta: u32, r_prime: &Rational) -> Rational {
    rational::pow(&rational::rat(3, 2), beta as u64 - 1) * r_prime * r_prime / rational::int(16)
}

/// `y*_(beta+1) <= y*_beta / 2` for every row.
pub fn column_halving(plans: &[ClassPlan]) -> bool {
    let mut rows: BTreeMap<u32, Rational> = BTreeMap::new();
    for pl in plans {
        *rows.entry(pl.beta).or_insert_with(Rational::zero) += &pl.y;
    }
    let ys: Vec<&Rational> = rows.values().collect();
    ys.windows(2).all(|w| w[1] * rational::int(2) <= *w[0])
}

/// One class piece of the cover.
#[derive(Clone, Debug)]
pub struct ClassPiece {
    pub plan: ClassPlan,
    /// `G_i` as an unweighted graph on the full vertex set.
    pub graph: Arc<WeightedGraph>,
    /// The star-forest instance, for `T > 1`.
    pub instance: Option<Tr2Instance>,
    pub cover: Cover,
    pub cost: CostReport,
    /// `s` with `T in (2^s, 2^(s+1)]`, for `T > 1`.
    pub s: Option<i64>,
    /// `32 c^-1 f(s)` rounded down, for `T > 1` when `J_1 >= 4`.
    pub cap: Option<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Subtotal {
    #[serde(with = "rational::serde_rational")]
    pub cost: Rational,
    #[serde(with = "rational::serde_rational_opt")]
    pub cap: Option<Rational>,
    /// `None` when the cap is not asserted (reduced guard) or unavailable.
    pub within_cap: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StarForestSubtotal {
    #[serde(flatten)]
    pub subtotal: Subtotal,
    /// Last `s` included in the truncated sum `sum_s 768 f(s)`.
    pub truncation_index: Option<i64>,
    /// Upper bound on the omitted terms.
    #[serde(with = "rational::serde_rational_opt")]
    pub tail_bound: Option<Rational>,
    /// Pieces whose cost exceeds their own `32 c^-1 f(s)`.
    pub pieces_over_cap: Vec<u32>,
    /// Pieces violating `|G_i| p^2 <= mu`, `J >= 8e` or `c >= 256e/J` (theorem guard only).
    pub preconditions_failed: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Subtotals {
    pub singleton: Subtotal,
    pub edges: Subtotal,
    pub star_forest: StarForestSubtotal,
}

impl Subtotals {
    pub fn all_within_caps(&self) -> bool {
        self.singleton.within_cap != Some(false)
            && self.edges.within_cap != Some(false)
            && self.star_forest.subtotal.within_cap != Some(false)
            && self.star_forest.pieces_over_cap.is_empty()
            && self.star_forest.preconditions_failed.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct WeightedCover {
    pub instance: PipelineInstance,
    pub singleton: Option<SingletonCover>,
    pub classes: Vec<ClassPiece>,
    pub column_halving: bool,
    pub subtotals: Subtotals,
}

/// Builds the cover and its cost accounting.
pub fn build_weighted_cover(inst: &PipelineInstance) -> Result<WeightedCover> {
    let p = inst.p.value();
    let r1 = inst.r_prime.clone();
    let theorem = inst.mode == GuardMode::Theorem;
    let zero = Rational::zero();

    if inst.is_degenerate() {
        let empty = Subtotal { cost: zero.clone(), cap: None, within_cap: Some(true) };
        return Ok(WeightedCover {
            instance: inst.clone(),
            singleton: None,
            classes: Vec::new(),
            column_halving: true,
            subtotals: Subtotals {
                singleton: empty.clone(),
                edges: empty.clone(),
                star_forest: StarForestSubtotal {
                    subtotal: empty,
                    truncation_index: None,
                    tail_bound: None,
                    pieces_over_cap: Vec::new(),
                    preconditions_failed: Vec::new(),
                },
            },
        });
    }

    let sing_inst = SingletonInstance::from_graph(inst.rounded(), inst.p.clone(), r1.clone())?;
    let singleton = build_singleton_cover(&sing_inst);
    let singleton_total = Subtotal {
        cost: singleton.cost.best().clone(),
        cap: Some(singleton.bound.clone()),
        within_cap: theorem.then(|| singleton.within_bound()),
    };

    let plans = class_plans(&inst.rounding.decomposition, p, &r1);
    let halving = column_halving(&plans);
    let j = &r1 / rational::int(2);
    // J_1 = J/(8e) with e rounded down: a larger J_1 gives smaller caps.
    let j1 = &j / (rational::int(8) * rational::e_lower());
    let caps_available = j1 >= rational::int(4);

    let mut classes = Vec::new();
    let mut edge_cost = zero.clone();
    let mut forest_cost = zero.clone();
    let mut over_cap = Vec::new();
    let mut preconditions_failed = Vec::new();
    let mut max_s: Option<i64> = None;
    for plan in plans {
        let ids = &inst.rounding.decomposition.classes[&plan.i];
        let gi = Arc::new(inst.graph.edge_subgraph(ids));
        match plan.kind {
            PieceKind::Edges => {
                let cover = Cover::new(vec![CoverPart::explicit((0..gi.edge_count()).map(|e| gi.edge_set(e)))]);
                let cost = cover.cost(&inst.p);
                edge_cost += cost.best();
                classes.push(ClassPiece { plan, graph: gi, instance: None, cover, cost, s: None, cap: None });
            }
            PieceKind::StarForest => {
                let mu = rational::pow2(plan.alpha);
                let tr2 = Tr2Instance::new(gi.clone(), inst.p.clone(), j.clone(), mu, plan.t.clone())?;
                let cond = tr2.conditions();
                if theorem && !(cond.density && cond.j_large && cond.c_general) {
                    preconditions_failed.push(plan.i);
                }
                let cover = tr2.cover();
                let cost = cover.cost(&inst.p);
                let s = rational::ceil_log2(&plan.t) - 1;
                max_s = Some(max_s.map_or(s, |m| m.max(s)));
                let cap = caps_available.then(|| {
                    // c = T/(mu J^2) = (3/2)^(beta-1)/8, so 32/c = 256 (2/3)^(beta-1).
                    let c_inv32 = rational::int(256) * rational::pow(&rational::rat(2, 3), plan.beta as u64 - 1);
                    c_inv32 * f_lower(&j1, s)
                });
                if let Some(cap) = &cap {
                    if theorem && cost.best() > cap {
                        over_cap.push(plan.i);
                    }
                }
                forest_cost += cost.best();
                classes.push(ClassPiece { plan, graph: gi, instance: Some(tr2), cover, cost, s: Some(s), cap });
            }
        }
    }

    let edge_cap = rational::int(192) / (&r1 * &r1);
    let edges = Subtotal { within_cap: theorem.then(|| edge_cost <= edge_cap), cost: edge_cost, cap: Some(edge_cap) };

    let (forest_cap, truncation_index, tail_bound) = if caps_available {
        let (sum, last, tail) = truncated_f_sum(&j, max_s.unwrap_or(0));
        (Some(sum), Some(last), Some(tail))
    } else {
        (None, None, None)
    };
    let star_forest = StarForestSubtotal {
        subtotal: Subtotal {
            within_cap: if theorem { forest_cap.as_ref().map(|cap| forest_cost <= *cap) } else { None },
            cost: forest_cost,
            cap: forest_cap,
        },
        truncation_index,
        tail_bound,
        pieces_over_cap: over_cap,
        preconditions_failed,
    };

    Ok(WeightedCover {
        instance: inst.clone(),
        singleton: Some(singleton),
        classes,
        column_halving: halving,
        subtotals: Subtotals { singleton: singleton_total, edges, star_forest },
    })
}

/// Smallest integer `x >= 2^(s/2 - 4)`, and largest integer `x <= 2^(s/2 - 4)`
/// (at least 1), for `s >= 0`.
fn exponent_bounds(s: i64) -> (u64, u64) {
    // 2^(s/2 - 4) = sqrt(2^(s - 8)).
    if s < 8 {
        return (1, 1);
    }
    let sq: u128 = 1u128 << (s - 8).min(120);
    let lo = (sq as f64).sqrt() as u128;
    let mut lo = lo.saturating_sub(2);
    while (lo + 1) * (lo + 1) <= sq {
        lo += 1;
    }
    let hi = if lo * lo == sq { lo } else { lo + 1 };
    (hi as u64, lo.max(1) as u64)
}

/// A lower bound on `f(s) = min{J_1^-2, J_1^(-2^(s/2-4))}` given a lower
/// bound's worth of `J_1 >= 1` (larger `J_1` and larger exponent only shrink it).
fn f_lower(j1_high: &Rational, s: i64) -> Rational {
    let (ceil_exp, _) = exponent_bounds(s.max(0));
    rational::pow(j1_high, ceil_exp.max(2)).recip()
}

/// An upper bound on `f(s)` from `J_1` with `e` rounded up and the floor exponent.
fn f_upper(j: &Rational, s: i64) -> Rational {
    let j1_low = j / (rational::int(8) * rational::e_upper());
    let (_, floor_exp) = exponent_bounds(s.max(0));
    rational::pow(&j1_low, floor_exp.max(2)).recip()
}

/// `sum_{s=0}^{S} 768 f(s)` from lower bounds, where `S >= min_last` is the
/// first index whose term is below `2^-80` of the running total; also the
/// index `S` and a bound `2 * 768 f(S+1)` on the omitted tail.
fn truncated_f_sum(j: &Rational, min_last: i64) -> (Rational, i64, Rational) {
    let j1_high = j / (rational::int(8) * rational::e_lower());
    let coef = rational::int(768);
    let eps = rational::pow2(-80);
    let mut total = Rational::zero();
    let mut s = 0i64;
    loop {
        let term = &coef * f_lower(&j1_high, s);
        let small = term < &eps * &total;
        total += term;
        if small && s >= min_last {
            break;
        }
        s += 1;
    }
    let tail = rational::int(2) * &coef * f_upper(j, s + 1);
    (total, s, tail)
}

impl WeightedCover {
    /// All pieces as one cover: the singleton part first, then class pieces.
    pub fn cover(&self) -> Cover {
        let mut parts = Vec::new();
        if let Some(s) = &self.singleton {
            parts.extend(s.cover.parts.iter().cloned());
        }
        for c in &self.classes {
            parts.extend(c.cover.parts.iter().cloned());
        }
        Cover::new(parts)
    }

    pub fn total_cost(&self) -> Rational {
        let st = &self.subtotals;
        &st.singleton.cost + &st.edges.cost + &st.star_forest.subtotal.cost
    }

    pub fn diagnostics(&self, u: Subset) -> Result<Diagnostics> {
        diagnostics(self, u)
    }

    /// Checks one set of the rounded target: finds a witness through the
    /// singleton piece or through the class that the heavy-class argument
    /// selects, then re-checks it independently.
    pub fn check(&self, u: Subset) -> UnitCheck {
        let inst = &self.instance;
        let mut out = UnitCheck { u, route: Route::None, witness: None, claim_ok: true, ok: false, reason: None };
        if !inst.in_rounded_target(u) {
            out.ok = true;
            return out;
        }
        let Some(sing) = &self.singleton else {
            out.reason = Some("target is nonempty although R' p > 1".into());
            return out;
        };
        if inst.rounded().boundary_weight(u) >= inst.boundary_threshold() {
            out.route = Route::Singleton;
            match sing.witness(u) {
                Some((_, w)) if w.is_subset_of(u) && sing.cover.parts.first().is_some_and(|part| part.is_member(w)) => {
                    out.witness = Some(w);
                    out.ok = true;
                }
                _ => out.reason = Some("singleton piece has no member inside".into()),
            }
            return out;
        }
        let diag = match diagnostics(self, u) {
            Ok(d) => d,
            Err(e) => {
                out.reason = Some(e.to_string());
                return out;
            }
        };
        out.claim_ok = diag.claim_holds();
        let Some(i) = diag.heavy_class else {
            out.reason = Some("no heavy class".into());
            out.claim_ok = false;
            return out;
        };
        out.route = Route::Class(i);
        let piece = self.classes.iter().find(|c| c.plan.i == i).expect("heavy class has a piece");
        let found = match &piece.instance {
            None => piece.cover.checked_witness(u).map(|w| w.member),
            Some(tr2) => {
                if !tr2.is_target(u) {
                    out.reason = Some(format!("U is not a star-forest target of class {i}"));
                    return out;
                }
                tr2.find_witness(u).filter(|w| tr2.witness_is_valid(u, w)).map(|w| w.vertices())
            }
        };
        match found {
            Some(w) => {
                out.witness = Some(w);
                out.ok = out.claim_ok;
                if !out.claim_ok {
                    out.reason = Some("heavy-class inequalities failed".into());
                }
            }
            None => out.reason = Some(format!("class {i} piece has no member inside")),
        }
        out
    }

    /// Exhaustive verification over all `U ⊆ V` (`n <= 12`).
    pub fn verify(&self, sweeper: &Sweeper) -> Result<PipelineVerification> {
        let inst = &self.instance;
        let n = inst.graph.n();
        let containment = sweeper.sweep(n, MAX_PIPELINE_VERIFY, |u| {
            inst.in_original_target(u).then(|| inst.in_rounded_target(u))
        })?;
        let coverage = sweeper.sweep(n, MAX_PIPELINE_VERIFY, |u| inst.in_rounded_target(u).then(|| self.check(u).ok))?;
        Ok(PipelineVerification {
            mode: "exhaustive".into(),
            subsets_checked: coverage.visited,
            original_targets: containment.targets,
            containment_failures: containment.failures,
            targets: coverage.targets,
            failures: coverage.failures,
            first_failure: coverage.first_failure.map(|u| self.check(u)),
            caps_ok: self.cost_caps_ok(),
        })
    }

    /// Sampled audit over uniform random subsets. Not a proof.
    pub fn audit(&self, samples: u64, seed: u64) -> PipelineVerification {
        let inst = &self.instance;
        let mask = Subset::full(inst.graph.n()).bits();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = PipelineVerification {
            mode: format!("sampled:{samples}:{seed}"),
            subsets_checked: samples,
            original_targets: 0,
            containment_failures: 0,
            targets: 0,
            failures: 0,
            first_failure: None,
            caps_ok: self.cost_caps_ok(),
        };
        for _ in 0..samples {
            let u = Subset(rng.gen::<u64>() & mask);
            if inst.in_original_target(u) {
                v.original_targets += 1;
                if !inst.in_rounded_target(u) {
                    v.containment_failures += 1;
                }
            }
            if inst.in_rounded_target(u) {
                v.targets += 1;
                let c = self.check(u);
                if !c.ok {
                    v.failures += 1;
                    if v.first_failure.is_none() {
                        v.first_failure = Some(c);
                    }
                }
            }
        }
        v
    }

    /// Column halving plus every asserted cost cap.
    pub fn cost_caps_ok(&self) -> bool {
        self.column_halving && self.subtotals.all_within_caps()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    None,
    Singleton,
    Class(u32),
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitCheck {
    pub u: Subset,
    pub route: Route,
    pub witness: Option<Subset>,
    pub claim_ok: bool,
    pub ok: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineVerification {
    pub mode: String,
    pub subsets_checked: u64,
    /// Sets in the original `U_0`.
    pub original_targets: u64,
    /// Original targets missing from the rounded family.
    pub containment_failures: u64,
    /// Sets in the rounded family, each of which needs a witness.
    pub targets: u64,
    pub failures: u64,
    pub first_failure: Option<UnitCheck>,
    pub caps_ok: bool,
}

impl PipelineVerification {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.containment_failures == 0
    }
}

/// Per-class quantities for a set `U`.
#[derive(Clone, Debug, Serialize)]
pub struct ClassDiagnostics {
    pub i: u32,
    /// `L_i = |D_i(U)| / (|G_i| p)`.
    #[serde(with = "rational::serde_rational")]
    pub l: Rational,
    /// `K_i = |G_i[U]| / (|D_i(U)| p)`, when `|D_i(U)| > 0`.
    #[serde(with = "rational::serde_rational_opt")]
    pub k: Option<Rational>,
    /// `K_i L_i = |G_i[U]| / E_i`.
    #[serde(with = "rational::serde_rational")]
    pub kl: Rational,
    #[serde(with = "rational::serde_rational")]
    pub c: Rational,
    #[serde(with = "rational::serde_rational")]
    pub w: Rational,
    pub in_i: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub u: Subset,
    /// `L = lambda'(D(U)) / (w p)`.
    #[serde(with = "rational::serde_rational")]
    pub l: Rational,
    /// `K = lambda'(G[U]) / (lambda'(D(U)) p)`, when `lambda'(D(U)) > 0`.
    #[serde(with = "rational::serde_rational_opt")]
    pub k: Option<Rational>,
    pub classes: Vec<ClassDiagnostics>,
    /// `U` lies in the rounded target but not in the singleton piece's target.
    pub in_u_star: bool,
    /// `sum_i L_i w_i = L w`.
    pub split_l_ok: bool,
    /// `sum_i K_i L_i w_i = lambda'(G[U]) / p^2`.
    pub split_kl_ok: bool,
    #[serde(with = "rational::serde_rational")]
    pub sum_c_w: Rational,
    #[serde(with = "rational::serde_rational")]
    pub half_r2_w: Rational,
    #[serde(with = "rational::serde_rational")]
    pub sum_kl_w: Rational,
    /// First `i in I(U)` with `K_i L_i > c_i`.
    pub heavy_class: Option<u32>,
}

impl Diagnostics {
    /// For `U` in `U*`: `sum_I c_i w_i < R'^2 w / 2 < sum_I K_i L_i w_i` and a
    /// heavy class exists. Outside `U*` only the split identities are required.
    pub fn claim_holds(&self) -> bool {
        let identities = self.split_l_ok && self.split_kl_ok;
        if !self.in_u_star {
            return identities;
        }
        identities && self.sum_c_w < self.half_r2_w && self.half_r2_w < self.sum_kl_w && self.heavy_class.is_some()
    }
}

pub fn diagnostics(wc: &WeightedCover, u: Subset) -> Result<Diagnostics> {
    let inst = &wc.instance;
    let p = inst.p.value();
    let g = inst.rounded();
    let w = g.total_weight();
    if w.is_zero() {
        return Err(Error::ZeroWeights);
    }
    let boundary = g.boundary_weight(u);
    let inside = g.induced_weight(u);
    let l = &boundary / (&w * p);
    let k = (!boundary.is_zero()).then(|| &inside / (&boundary * p));
    let half_r = &inst.r_prime / rational::int(2);
    let mut classes = Vec::new();
    let mut sum_lw = Rational::zero();
    let mut sum_klw_all = Rational::zero();
    let mut sum_c_w = Rational::zero();
    let mut sum_kl_w = Rational::zero();
    let mut heavy = None;
    for piece in &wc.classes {
        let pl = &piece.plan;
        let gi = &piece.graph;
        let size = rational::from_u64(pl.edges as u64);
        let d_i = rational::from_u64(gi.twice_boundary_count(u) as u64) / rational::int(2);
        let g_i = rational::from_u64(gi.induced_edges(u) as u64);
        let l_i = &d_i / (&size * p);
        let k_i = (!d_i.is_zero()).then(|| &g_i / (&d_i * p));
        let kl = &g_i / &pl.e;
        let w_i = &pl.theta * &size;
        let in_i = k_i.as_ref().is_some_and(|k| *k > half_r);
        sum_lw += &l_i * &w_i;
        sum_klw_all += &kl * &w_i;
        if in_i {
            sum_c_w += &pl.c_star * &w_i;
            sum_kl_w += &kl * &w_i;
            if heavy.is_none() && kl > pl.c_star {
                heavy = Some(pl.i);
            }
        }
        classes.push(ClassDiagnostics { i: pl.i, l: l_i, k: k_i, kl, c: pl.c_star.clone(), w: w_i, in_i });
    }
    let in_u_star = inst.in_rounded_target(u) && boundary < inst.boundary_threshold();
    let half_r2_w = &inst.r_prime * &inst.r_prime * &w / rational::int(2);
    Ok(Diagnostics {
        u,
        split_l_ok: sum_lw == &l * &w,
        split_kl_ok: sum_klw_all == &inside / (p * p),
        l,
        k,
        classes,
        in_u_star,
        sum_c_w,
        half_r2_w,
        sum_kl_w,
        heavy_class: heavy,
    })
}

/// Serializable summary of a built cover.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub mode: GuardMode,
    pub n: usize,
    pub edges: usize,
    #[serde(with = "rational::serde_rational")]
    pub p: Rational,
    #[serde(with = "rational::serde_rational")]
    pub r: Rational,
    #[serde(with = "rational::serde_rational")]
    pub r_prime: Rational,
    /// Factor applied to the input weights before rounding.
    #[serde(with = "rational::serde_rational")]
    pub scale: Rational,
    /// `R^2 lambda(G) p^2` on the input scale.
    #[serde(with = "rational::serde_rational")]
    pub original_threshold: Rational,
    /// `R'^2 lambda'(G) p^2` in rounded units, and the same mapped back to the input scale.
    #[serde(with = "rational::serde_rational")]
    pub rounded_threshold: Rational,
    #[serde(with = "rational::serde_rational")]
    pub rounded_threshold_input_scale: Rational,
    pub degenerate: bool,
    pub singleton: Option<SingletonCover>,
    pub classes: Vec<ClassReport>,
    pub column_halving: bool,
    pub subtotals: Subtotals,
    #[serde(with = "rational::serde_rational")]
    pub total_cost: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    #[serde(flatten)]
    pub plan: ClassPlan,
    pub reduction: Option<Reduction>,
    pub cost: CostReport,
    pub s: Option<i64>,
    #[serde(with = "rational::serde_rational_opt")]
    pub cap: Option<Rational>,
}

impl WeightedCover {
    pub fn report(&self) -> PipelineReport {
        let inst = &self.instance;
        PipelineReport {
            mode: inst.mode,
            n: inst.graph.n(),
            edges: inst.graph.edge_count(),
            p: inst.p.value().clone(),
            r: inst.r.clone(),
            r_prime: inst.r_prime.clone(),
            scale: inst.rounding.scale.clone(),
            original_threshold: inst.original_threshold(),
            rounded_threshold: inst.rounded_threshold(),
            rounded_threshold_input_scale: inst.rounded_threshold() / &inst.rounding.scale,
            degenerate: inst.is_degenerate(),
            singleton: self.singleton.clone(),
            classes: self
                .classes
                .iter()
                .map(|c| ClassReport {
                    plan: c.plan.clone(),
                    reduction: c.instance.as_ref().map(|t| t.reduction()),
                    cost: c.cost.clone(),
                    s: c.s,
                    cap: c.cap.clone(),
                })
                .collect(),
            column_halving: self.column_halving,
            subtotals: self.subtotals.clone(),
            total_cost: self.total_cost(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn theorem_r() -> Rational {
        // 4096 sqrt(2) e < 15747.
        int(15747)
    }

    #[test]
    fn exponent_bounds_bracket_the_power() {
        for s in 0..60i64 {
            let x = 2f64.powf(s as f64 / 2.0 - 4.0);
            let (hi, lo) = exponent_bounds(s);
            assert!(hi as f64 >= x - 1e-9 && (lo as f64) <= x.max(1.0) + 1e-9, "s={s}");
        }
        assert_eq!(exponent_bounds(12), (4, 4));
        assert_eq!(exponent_bounds(13), (6, 5));
    }

    #[test]
    fn guards() {
        let g = WeightedGraph::unweighted(2, &[(0, 1)]).unwrap();
        let p = Probability::ratio(1, 100000).unwrap();
        assert!(PipelineInstance::new(g.clone(), p.clone(), int(1000), GuardMode::Theorem).is_err());
        assert!(PipelineInstance::new(g.clone(), p.clone(), theorem_r(), GuardMode::Theorem).is_ok());
        assert!(PipelineInstance::new(g.clone(), Probability::zero(), theorem_r(), GuardMode::Theorem).is_err());
        assert!(PipelineInstance::new(g.clone(), p.clone(), int(31), GuardMode::Reduced).is_err());
        let zero = WeightedGraph::new(2, vec![(0, 1, int(0))]).unwrap();
        assert!(matches!(PipelineInstance::new(zero, p, theorem_r(), GuardMode::Theorem), Err(Error::ZeroWeights)));
    }

    #[test]
    fn single_edge_graph() {
        let g = WeightedGraph::unweighted(2, &[(0, 1)]).unwrap();
        let r = theorem_r();
        let inst = PipelineInstance::new(g, Probability::ratio(1, 20000).unwrap(), r, GuardMode::Theorem).unwrap();
        let wc = build_weighted_cover(&inst).unwrap();
        assert_eq!(wc.classes.len(), 1);
        assert_eq!(wc.classes[0].plan.i, 1);
        assert!(wc.cost_caps_ok());
        let v = wc.verify(&Sweeper::default()).unwrap();
        assert!(v.passed(), "{:?}", v.first_failure);
    }

    #[test]
    fn constant_weights_have_one_class() {
        let g = WeightedGraph::new(4, vec![(0, 1, rat(3, 7)), (1, 2, rat(3, 7)), (2, 3, rat(3, 7))]).unwrap();
        let inst = PipelineInstance::new(g, Probability::ratio(1, 64).unwrap(), int(40), GuardMode::Reduced).unwrap();
        let wc = build_weighted_cover(&inst).unwrap();
        assert_eq!(wc.classes.len(), 1);
        assert_eq!(wc.classes[0].plan.beta, 1);
        assert!(wc.verify(&Sweeper::default()).unwrap().passed());
    }

    #[test]
    fn large_p_is_degenerate() {
        let g = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = PipelineInstance::new(g, Probability::ratio(1, 2).unwrap(), int(64), GuardMode::Reduced).unwrap();
        assert!(inst.is_degenerate());
        let wc = build_weighted_cover(&inst).unwrap();
        assert!(wc.cover().parts.is_empty());
        let v = wc.verify(&Sweeper::default()).unwrap();
        assert_eq!(v.targets, 0);
        assert!(v.passed());
    }

    #[test]
    fn mixed_weights_verify_in_reduced_mode() {
        let g = WeightedGraph::new(
            6,
            vec![
                (0, 1, int(1)),
                (1, 2, rat(1, 3)),
                (2, 3, rat(1, 3)),
                (3, 4, rat(1, 9)),
                (4, 5, rat(1, 9)),
                (5, 0, rat(1, 9)),
                (0, 3, rat(2, 3)),
            ],
        )
        .unwrap();
        let mut class_routes = 0;
        for den in [40, 60, 90, 200] {
            let inst = PipelineInstance::new(g.clone(), Probability::ratio(1, den).unwrap(), int(32), GuardMode::Reduced).unwrap();
            let wc = build_weighted_cover(&inst).unwrap();
            assert!(wc.column_halving);
            let v = wc.verify(&Sweeper::default()).unwrap();
            assert!(v.passed(), "p=1/{den}: {:?}", v.first_failure);
            for bits in 0..64u64 {
                let c = wc.check(Subset(bits));
                if let Route::Class(_) = c.route {
                    class_routes += 1;
                    assert!(wc.diagnostics(Subset(bits)).unwrap().in_u_star);
                }
            }
        }
        assert!(class_routes > 0);
    }
}
