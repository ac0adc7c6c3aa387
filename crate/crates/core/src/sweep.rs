//! Deterministic parallel sweeps over the `2^n` subsets of a ground set.
//!
//! Results never depend on the worker count: counts are sums and the
//! reported failure is always the numerically smallest failing bitmask.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::subset::Subset;

const CHUNK: u64 = 1 << 12;

/// Worker configuration for exhaustive sweeps.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sweeper {
    /// `None` uses rayon's global pool.
    pub workers: Option<usize>,
}

impl Sweeper {
    pub fn with_workers(workers: usize) -> Self {
        Sweeper { workers: Some(workers.max(1)) }
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match self.workers {
            None => f(),
            Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
        }
    }

    /// Classifies every subset of `[n]`.
    ///
    /// `check(u)` returns `None` when `u` is outside the target,
    /// `Some(true)` when it is a target that passes, `Some(false)` on failure.
    pub fn sweep<F>(&self, n: usize, cap: usize, check: F) -> Result<SweepOutcome>
    where
        F: Fn(Subset) -> Option<bool> + Sync,
    {
        if n > cap {
            return Err(Error::EnumerationCap { n, cap });
        }
        let total = 1u64 << n;
        let chunks = total.div_ceil(CHUNK);
        let run = || {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut out = SweepOutcome::default();
                    let end = ((c + 1) * CHUNK).min(total);
                    for bits in c * CHUNK..end {
                        out.visited += 1;
                        match check(Subset(bits)) {
                            None => {}
                            Some(true) => out.targets += 1,
                            Some(false) => {
                                out.targets += 1;
                                out.failures += 1;
                                if out.first_failure.is_none() {
                                    out.first_failure = Some(Subset(bits));
                                }
                            }
                        }
                    }
                    out
                })
                .reduce(SweepOutcome::default, SweepOutcome::merge)
        };
        Ok(self.install(run))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub visited: u64,
    pub targets: u64,
    pub failures: u64,
    pub first_failure: Option<Subset>,
}

impl SweepOutcome {
    fn merge(a: SweepOutcome, b: SweepOutcome) -> SweepOutcome {
        let first_failure = match (a.first_failure, b.first_failure) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        SweepOutcome {
            visited: a.visited + b.visited,
            targets: a.targets + b.targets,
            failures: a.failures + b.failures,
            first_failure,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_is_independent_of_workers() {
        let check = |u: Subset| (u.len() >= 3).then(|| u.bits() % 7 != 3);
        let one = Sweeper::with_workers(1).sweep(14, 24, check).unwrap();
        let many = Sweeper::with_workers(4).sweep(14, 24, check).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.visited, 1 << 14);
        let expected = (0u64..1 << 14).find(|&b| b.count_ones() >= 3 && b % 7 == 3).map(Subset);
        assert_eq!(one.first_failure, expected);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(Sweeper::default().sweep(21, 20, |_| None).is_err());
    }
}
