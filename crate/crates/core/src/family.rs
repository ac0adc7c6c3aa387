//! Increasing families, the product measure `mu_p`, and the threshold `p_c`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Probability, Rational};
use crate::subset::{Subset, MAX_EXHAUSTIVE, MAX_GROUND_SET};

/// The increasing family generated by an antichain of minimal sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncreasingFamily {
    n: usize,
    minimal: Vec<Subset>,
}

impl IncreasingFamily {
    /// Builds `<generators>` over `[n]`. Generators containing another
    /// generator are discarded, so the stored list is an antichain sorted by
    /// bitmask. The family must be proper: at least one generator, none empty.
    pub fn new(n: usize, generators: impl IntoIterator<Item = Subset>) -> Result<Self> {
        if n > MAX_GROUND_SET {
            return Err(Error::GroundSetTooLarge(n));
        }
        let mut sets: Vec<Subset> = generators.into_iter().collect();
        for s in &sets {
            if !s.fits(n) {
                let element = s.iter().find(|&v| v >= n).unwrap_or(n);
                return Err(Error::ElementOutOfRange { element, n });
            }
        }
        if sets.is_empty() {
            return Err(Error::ImproperFamily("no minimal sets (family is empty)"));
        }
        if sets.iter().any(|s| s.is_empty()) {
            return Err(Error::ImproperFamily("empty minimal set (family is the whole power set)"));
        }
        sets.sort_by_key(|s| (s.len(), s.bits()));
        sets.dedup();
        let mut minimal: Vec<Subset> = Vec::with_capacity(sets.len());
        for s in sets {
            if !minimal.iter().any(|m| m.is_subset_of(s)) {
                minimal.push(s);
            }
        }
        minimal.sort();
        Ok(IncreasingFamily { n, minimal })
    }

    pub fn from_index_lists(n: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let sets = lists.iter().map(|l| Subset::from_indices(n, l)).collect::<Result<Vec<_>>>()?;
        Self::new(n, sets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn minimal_sets(&self) -> &[Subset] {
        &self.minimal
    }

    /// Membership in the generated family: some minimal set lies inside `u`.
    pub fn contains(&self, u: Subset) -> bool {
        self.minimal.iter().any(|m| m.is_subset_of(u))
    }

    /// Membership with a ground-set check.
    pub fn contains_checked(&self, n: usize, u: Subset) -> Result<bool> {
        if n != self.n {
            return Err(Error::GroundSetMismatch { expected: self.n, found: n });
        }
        if !u.fits(n) {
            return Err(Error::ElementOutOfRange { element: u.iter().last().unwrap_or(n), n });
        }
        Ok(self.contains(u))
    }

    /// Number of members of each cardinality, by exhaustive enumeration.
    pub fn size_profile(&self) -> Result<Vec<u64>> {
        if self.n > MAX_EXHAUSTIVE {
            return Err(Error::EnumerationCap { n: self.n, cap: MAX_EXHAUSTIVE });
        }
        let mut counts = vec![0u64; self.n + 1];
        for bits in 0..1u64 << self.n {
            let u = Subset(bits);
            if self.contains(u) {
                counts[u.len()] += 1;
            }
        }
        Ok(counts)
    }

    /// Exact `mu_p(F) = sum_{S in F} p^|S| (1-p)^(n-|S|)`.
    pub fn mu_p_exact(&self, p: &Probability) -> Result<Rational> {
        let profile = self.size_profile()?;
        Ok(mu_from_profile(&profile, p.value()))
    }

    /// Monte Carlo estimate of `mu_p(F)` from `samples` independent draws.
    pub fn mu_p_montecarlo(&self, p: &Probability, seed: u64, samples: u64) -> MonteCarloEstimate {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pf = p.to_f64();
        let mut hits = 0u64;
        for _ in 0..samples {
            let mut bits = 0u64;
            for v in 0..self.n {
                if rng.gen::<f64>() < pf {
                    bits |= 1 << v;
                }
            }
            if self.contains(Subset(bits)) {
                hits += 1;
            }
        }
        MonteCarloEstimate::from_counts(hits, samples)
    }

    pub fn mu_p(&self, p: &Probability, mode: MeasureMode) -> Result<Measure> {
        match mode {
            MeasureMode::Exact => self.mu_p_exact(p).map(Measure::Exact),
            MeasureMode::MonteCarlo { seed, samples } => Ok(Measure::Estimate(self.mu_p_montecarlo(p, seed, samples))),
        }
    }

    /// Brackets the unique `p` with `mu_p(F) = 1/2` to width `tol`.
    pub fn p_c(&self, tol: &Rational) -> Result<Interval> {
        if *tol <= Rational::zero() {
            return Err(Error::Guard("tolerance must be positive".into()));
        }
        let profile = self.size_profile()?;
        let half = rational::rat(1, 2);
        let mut lo = Rational::zero();
        let mut hi = Rational::one();
        while &hi - &lo > *tol {
            let mid = (&lo + &hi) / rational::int(2);
            if mu_from_profile(&profile, &mid) <= half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Return the tightest bracket: a midpoint that hits 1/2 exactly closes it.
        if mu_from_profile(&profile, &lo) == half {
            hi = lo.clone();
        }
        Ok(Interval { lo, hi })
    }
}

/// `sum_k counts[k] p^k (1-p)^(n-k)`.
pub fn mu_from_profile(counts: &[u64], p: &Rational) -> Rational {
    let n = counts.len() - 1;
    let q = Rational::one() - p;
    let pp = rational::powers(p, n);
    let qp = rational::powers(&q, n);
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| rational::from_u64(c) * &pp[k] * &qp[n - k])
        .fold(Rational::zero(), |a, b| a + b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    Exact,
    MonteCarlo { seed: u64, samples: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Exact(Rational),
    Estimate(MonteCarloEstimate),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl MonteCarloEstimate {
    fn from_counts(hits: u64, samples: u64) -> Self {
        if samples == 0 {
            return MonteCarloEstimate { mean: f64::NAN, std_error: f64::NAN, samples };
        }
        let mean = hits as f64 / samples as f64;
        let std_error = (mean * (1.0 - mean) / samples as f64).sqrt();
        MonteCarloEstimate { mean, std_error, samples }
    }
}

/// A closed bracketing interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rational::serde_rational")]
    pub lo: Rational,
    #[serde(with = "rational::serde_rational")]
    pub hi: Rational,
}

impl Interval {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        rational::to_f64(&self.lo) <= x && x <= rational::to_f64(&self.hi)
    }
}

/// On-disk family: `{"n": int, "minimal_sets": [[int, ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    pub n: usize,
    pub minimal_sets: Vec<Vec<usize>>,
}

impl From<&IncreasingFamily> for FamilyFile {
    fn from(f: &IncreasingFamily) -> Self {
        FamilyFile { n: f.n, minimal_sets: f.minimal.iter().map(|s| s.to_indices()).collect() }
    }
}

impl TryFrom<&FamilyFile> for IncreasingFamily {
    type Error = Error;

    fn try_from(f: &FamilyFile) -> Result<Self> {
        IncreasingFamily::from_index_lists(f.n, &f.minimal_sets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn fam(n: usize, sets: &[&[usize]]) -> IncreasingFamily {
        IncreasingFamily::from_index_lists(n, &sets.iter().map(|s| s.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn contains_examples() {
        // Vertices {1,2,3} map to indices {0,1,2}.
        let f = fam(3, &[&[0, 1]]);
        assert!(f.contains(Subset::from_indices(3, &[0, 1, 2]).unwrap()));
        assert!(!f.contains(Subset::from_indices(3, &[0, 2]).unwrap()));
        let g = fam(3, &[&[0], &[1, 2]]);
        assert!(g.contains(Subset::from_indices(3, &[1, 2]).unwrap()));
        assert!(g.contains_checked(4, Subset(1)).is_err());
    }

    #[test]
    fn antichain_normalization() {
        let f = fam(4, &[&[0, 1], &[0], &[0, 1, 2], &[2, 3], &[2, 3]]);
        assert_eq!(f.minimal_sets(), &[Subset::from_indices(4, &[0]).unwrap(), Subset::from_indices(4, &[2, 3]).unwrap()]);
    }

    #[test]
    fn improper_families_rejected() {
        assert!(IncreasingFamily::new(3, Vec::new()).is_err());
        assert!(IncreasingFamily::new(3, vec![Subset::EMPTY]).is_err());
        assert!(IncreasingFamily::new(65, vec![Subset(1)]).is_err());
        assert!(IncreasingFamily::new(2, vec![Subset(0b100)]).is_err());
    }

    #[test]
    fn mu_p_examples() {
        let half = Probability::ratio(1, 2).unwrap();
        assert_eq!(fam(1, &[&[0]]).mu_p_exact(&half).unwrap(), rat(1, 2));
        assert_eq!(fam(2, &[&[0, 1]]).mu_p_exact(&half).unwrap(), rat(1, 4));
        let third = Probability::ratio(1, 3).unwrap();
        assert_eq!(fam(2, &[&[0], &[1]]).mu_p_exact(&third).unwrap(), rat(5, 9));
    }

    #[test]
    fn exact_mode_capped() {
        let f = IncreasingFamily::new(30, vec![Subset(1)]).unwrap();
        assert!(matches!(f.mu_p_exact(&Probability::zero()), Err(Error::EnumerationCap { .. })));
    }

    #[test]
    fn p_c_examples() {
        let tol = rational::pow2(-40);
        let a = fam(1, &[&[0]]).p_c(&tol).unwrap();
        assert!(a.lo <= rat(1, 2) && rat(1, 2) <= a.hi);
        let b = fam(2, &[&[0, 1]]).p_c(&tol).unwrap();
        assert!(b.width() <= tol);
        assert!(b.contains(std::f64::consts::FRAC_1_SQRT_2));
        let c = fam(2, &[&[0], &[1]]).p_c(&tol).unwrap();
        assert!(c.contains(1.0 - std::f64::consts::FRAC_1_SQRT_2));
        let half = rat(1, 2);
        let profile = fam(2, &[&[0], &[1]]).size_profile().unwrap();
        assert!(mu_from_profile(&profile, &c.lo) <= half && mu_from_profile(&profile, &c.hi) >= half);
    }

    #[test]
    fn montecarlo_is_seeded() {
        let f = fam(3, &[&[0, 1], &[2]]);
        let p = Probability::ratio(1, 2).unwrap();
        assert_eq!(f.mu_p_montecarlo(&p, 9, 1000), f.mu_p_montecarlo(&p, 9, 1000));
    }
}
