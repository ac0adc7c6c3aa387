//! The levels `(b_i, L_i)` used for a target size `T_0 = 2^(2k+3)`.

use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Largest supported `k`, so that `T_0 = 2^(2k+3)` fits in a `u64`.
pub const MAX_K: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reduction {
    /// `T < 32`: the edge set itself is the cover.
    TrivialEdges,
    Reduced { k: u32, t0: u64 },
}

/// Replaces `T` by the largest `2^(2k+3) <= T` with `k >= 1`.
pub fn reduce_t(t: &Rational) -> Result<Reduction> {
    if *t <= rational::int(0) {
        return Err(Error::Guard("T must be positive".into()));
    }
    if *t < rational::int(32) {
        return Ok(Reduction::TrivialEdges);
    }
    let mut k = 1u32;
    while k < MAX_K && rational::pow2(2 * (k as i64 + 1) + 3) <= *t {
        k += 1;
    }
    if k == MAX_K && rational::pow2(2 * (MAX_K as i64 + 1) + 3) <= *t {
        return Err(Error::Guard(format!("T exceeds 2^{}", 2 * MAX_K + 5)));
    }
    Ok(Reduction::Reduced { k, t0: 1u64 << (2 * k + 3) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    pub i: u32,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(with = "rational::serde_rational")]
    pub delta: Rational,
    pub b: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub k: u32,
    pub t0: u64,
    pub levels: Vec<Level>,
}

/// `L_i = 2^(i-1)`, `delta_i = max{2^-(i+2), 2^(i-k-3)}`,
/// `b_i = delta_i 4^-i T_0 = max{2^(2k+1-3i), 2^(k-i)}` for `i` in `1..=k`.
pub fn build_schedule(k: u32) -> Result<Schedule> {
    if k == 0 || k > MAX_K {
        return Err(Error::Guard(format!("schedule needs 1 <= k <= {MAX_K}")));
    }
    let t0 = 1u64 << (2 * k + 3);
    let ki = k as i64;
    let levels = (1..=k)
        .map(|i| {
            let ii = i as i64;
            let delta = rational::pow2(-(ii + 2)).max(rational::pow2(ii - ki - 3));
            let b = &delta * rational::pow2(-2 * ii) * rational::from_u64(t0);
            assert!(b.is_integer(), "b_{i} is not an integer");
            Level { i, l: 1 << (i - 1), delta, b: b.to_integer().try_into().expect("b_i fits in u64") }
        })
        .collect();
    let s = Schedule { k, t0, levels };
    s.check()?;
    Ok(s)
}

impl Schedule {
    /// Re-derives every arithmetic property of the schedule.
    pub fn check(&self) -> Result<()> {
        let k = self.k as i64;
        let fail = |what: &str| Err(Error::Internal(format!("schedule k = {}: {what}", self.k)));
        let mut sum = Rational::from_integer(0.into());
        for lv in &self.levels {
            let i = lv.i as i64;
            let closed = (2 * k + 1 - 3 * i).max(k - i);
            if lv.b != 1u64 << closed {
                return fail("b_i differs from max{2^(2k+1-3i), 2^(k-i)}");
            }
            if lv.delta < Rational::one() / rational::from_u64(8 * lv.l) {
                return fail("delta_i < 1/(8 L_i)");
            }
            if lv.b < 1u64 << (k - i) {
                return fail("b_i < 2^(k-i)");
            }
            // 2^(L+4) delta >= L. Capping the exponent keeps the power small; the
            // capped value still dominates every L <= 2^29.
            let lhs = rational::pow2(lv.l.min(4096) as i64 + 4) * &lv.delta;
            if lhs < rational::from_u64(lv.l) {
                return fail("2^(L+4) delta < L");
            }
            sum += &lv.delta;
        }
        if sum > rational::rat(1, 2) {
            return fail("sum of delta_i exceeds 1/2");
        }
        if self.levels.last().map(|l| l.b) != Some(1) {
            return fail("b_k != 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce_t(&rational::int(31)).unwrap(), Reduction::TrivialEdges);
        assert_eq!(reduce_t(&rational::int(32)).unwrap(), Reduction::Reduced { k: 1, t0: 32 });
        assert_eq!(reduce_t(&rational::int(1000)).unwrap(), Reduction::Reduced { k: 3, t0: 512 });
        assert_eq!(reduce_t(&rat(255, 2)).unwrap(), Reduction::Reduced { k: 1, t0: 32 });
        assert!(reduce_t(&rational::int(0)).is_err());
    }

    #[test]
    fn reduce_matches_scan() {
        for t in 32u64..5000 {
            let k = (1..=10).filter(|&k| 1u64 << (2 * k + 3) <= t).max().unwrap();
            assert_eq!(reduce_t(&rational::from_u64(t)).unwrap(), Reduction::Reduced { k, t0: 1 << (2 * k + 3) });
        }
    }

    #[test]
    fn small_schedules() {
        let s = build_schedule(2).unwrap();
        assert_eq!(s.levels.iter().map(|l| l.l).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(s.levels.iter().map(|l| l.delta.clone()).collect::<Vec<_>>(), vec![rat(1, 8), rat(1, 8)]);
        assert_eq!(s.levels.iter().map(|l| l.b).collect::<Vec<_>>(), vec![4, 1]);
        let s = build_schedule(1).unwrap();
        assert_eq!((s.levels[0].l, s.levels[0].delta.clone(), s.levels[0].b), (1, rat(1, 8), 1));
        assert!(build_schedule(0).is_err());
    }
}
