//! The chain of cost bounds for a star-forest cover.
//!
//! For each level `(b, L)`:
//!
//! ```text
//! C(b, L) <= e_b(q) <= (e phi / b)^b <= (e phi* / b)^b <= [c/4 J_1^(L+1)]^-b
//! ```
//!
//! with `q_v = p (e d_v p / L^v)^(L^v)`, `phi = sum_v q_v`,
//! `phi* = 2 mu (e/L)(4e/J)^(L-1)` and `J_1 = J/(8e)`; then the level bounds
//! sum to at most `sum_i [c J_1^(L_i+1)/4]^-(2^(k-i)) <= 8 c^-1 J_1^(-2^(k-1)-1)`.
//! Every `e` here is the upper rational bound, so each quantity dominates
//! its real-valued counterpart and the links are exact consequences of one
//! another.

use num_traits::Zero;
use serde::Serialize;

use super::family::{elementary_symmetric, StarForestPart};
use super::schedule::Schedule;
use crate::cover::MAX_ENUMERATE;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct LevelChain {
    pub i: u32,
    pub b: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(with = "rational::serde_rational_opt")]
    pub enumerated: Option<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub symmetric: Rational,
    #[serde(with = "rational::serde_rational")]
    pub phi: Rational,
    #[serde(with = "rational::serde_rational")]
    pub am_gm: Rational,
    #[serde(with = "rational::serde_rational")]
    pub phi_bound: Rational,
    #[serde(with = "rational::serde_rational")]
    pub analytic: Rational,
    #[serde(with = "rational::serde_rational")]
    pub closed: Rational,
    #[serde(with = "rational::serde_rational")]
    pub geometric: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct Link {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CostChain {
    #[serde(with = "rational::serde_rational")]
    pub c: Rational,
    #[serde(with = "rational::serde_rational")]
    pub j1: Rational,
    pub levels: Vec<LevelChain>,
    #[serde(with = "rational::serde_rational")]
    pub closed_sum: Rational,
    #[serde(with = "rational::serde_rational")]
    pub geometric_sum: Rational,
    #[serde(with = "rational::serde_rational")]
    pub total_bound: Rational,
    pub links: Vec<Link>,
}

impl CostChain {
    pub fn holds(&self) -> bool {
        self.links.iter().all(|l| l.holds)
    }

    pub fn failed_links(&self) -> Vec<&str> {
        self.links.iter().filter(|l| !l.holds).map(|l| l.name.as_str()).collect()
    }

    /// The best available bound on the whole cover's cost.
    pub fn cover_cost(&self) -> Rational {
        self.levels.iter().fold(Rational::zero(), |acc, lv| acc + lv.enumerated.as_ref().unwrap_or(&lv.symmetric))
    }
}

/// `mu` is the density parameter, `t0` the reduced target size; the parts
/// must be the levels of `schedule` in order.
pub fn cost_chain(parts: &[StarForestPart], schedule: &Schedule, mu: &Rational, t0: u64) -> CostChain {
    let e = rational::e_upper();
    let first = &parts[0];
    let (p, j) = (first.p.value().clone(), first.j.clone());
    let c = rational::from_u64(t0) / (mu * &j * &j);
    let j1 = &j / (rational::int(8) * &e);
    let four = rational::int(4);
    let mut links = Vec::new();
    let mut levels = Vec::new();
    let mut closed_sum = Rational::zero();
    let mut geometric_sum = Rational::zero();
    for (part, lv) in parts.iter().zip(&schedule.levels) {
        let (b, l) = (lv.b, lv.l);
        let q = part.star_weights(&p);
        let symmetric = elementary_symmetric(&q, b);
        let enumerated = (part.graph.n() <= MAX_ENUMERATE).then(|| part.enumerated_cost(&p));
        let phi = q.iter().fold(Rational::zero(), |a, x| a + x);
        let bq = rational::from_u64(b);
        let am_gm = rational::pow(&(&e * &phi / &bq), b);
        let phi_bound = rational::int(2) * mu * &e / rational::from_u64(l) * rational::pow(&(&four * &e / &j), l - 1);
        let analytic = rational::pow(&(&e * &phi_bound / &bq), b);
        let base = &c / &four * rational::pow(&j1, l + 1);
        let closed = rational::pow(&base, b).recip();
        let geometric = rational::pow(&base, 1u64 << (schedule.k - lv.i)).recip();
        let mut link = |name: String, holds: bool| links.push(Link { name, holds });
        if let Some(x) = &enumerated {
            link(format!("level {}: enumerated <= e_b(q)", lv.i), *x <= symmetric);
        }
        link(format!("level {}: e_b(q) <= (e phi/b)^b", lv.i), symmetric <= am_gm);
        link(format!("level {}: phi <= 2 mu (e/L)(4e/J)^(L-1)", lv.i), phi <= phi_bound);
        link(format!("level {}: (e phi/b)^b <= (e phi*/b)^b", lv.i), am_gm <= analytic);
        link(format!("level {}: (e phi*/b)^b <= [c/4 J_1^(L+1)]^-b", lv.i), analytic <= closed);
        closed_sum += &closed;
        geometric_sum += &geometric;
        levels.push(LevelChain {
            i: lv.i,
            b,
            l,
            enumerated,
            symmetric,
            phi,
            am_gm,
            phi_bound,
            analytic,
            closed,
            geometric,
        });
    }
    let total_bound = rational::int(8) / &c / rational::pow(&j1, (1u64 << (schedule.k - 1)) + 1);
    links.push(Link { name: "sum of level bounds <= geometric sum".into(), holds: closed_sum <= geometric_sum });
    links.push(Link { name: "geometric sum <= 8 c^-1 J_1^(-2^(k-1)-1)".into(), holds: geometric_sum <= total_bound });
    CostChain { c, j1, levels, closed_sum, geometric_sum, total_bound, links }
}
