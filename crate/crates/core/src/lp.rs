//! Dense dual simplex for covering programs
//!
//! ```text
//! minimize  c·x   subject to  A x >= 1,  x >= 0
//! ```
//!
//! with `A` a 0/1 matrix and `c >= 0`. The all-slack basis is dual feasible
//! because `c >= 0`, so no phase one is needed. Pivoting follows Bland's
//! smallest-index rule, which rules out cycling. The solver is generic over
//! the scalar so that the same code runs in exact rationals and, for large
//! instances, in `f64`.

use std::ops::{Add, Div, Mul, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub trait LpScalar:
    Clone + PartialOrd + Zero + One + for<'a> Add<&'a Self, Output = Self> + for<'a> Sub<&'a Self, Output = Self>
where
    for<'a> &'a Self: Mul<&'a Self, Output = Self> + Div<&'a Self, Output = Self>,
{
    fn is_neg(&self) -> bool;
    fn is_nonzero(&self) -> bool;
}

impl LpScalar for Rational {
    fn is_neg(&self) -> bool {
        self.is_negative()
    }

    fn is_nonzero(&self) -> bool {
        !self.is_zero()
    }
}

const F64_EPS: f64 = 1e-11;

impl LpScalar for f64 {
    fn is_neg(&self) -> bool {
        *self < -F64_EPS
    }

    fn is_nonzero(&self) -> bool {
        self.abs() > F64_EPS
    }
}

/// A covering program: `rows[r]` lists the columns with a 1 in row `r`.
#[derive(Clone, Debug)]
pub struct CoveringLp<T> {
    pub costs: Vec<T>,
    pub rows: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub objective: T,
    /// Primal values, one per column.
    pub primal: Vec<T>,
    /// Dual values, one per row; `sum(dual)` equals the objective.
    pub dual: Vec<T>,
    pub pivots: usize,
}

impl<T> CoveringLp<T>
where
    T: LpScalar,
    for<'a> &'a T: Mul<&'a T, Output = T> + Div<&'a T, Output = T>,
{
    pub fn solve(&self, max_pivots: usize) -> Result<LpSolution<T>> {
        let m = self.rows.len();
        let n = self.costs.len();
        let width = n + m;
        // Constraint r as  -A_r x + s_r = -1.
        let mut tab: Vec<Vec<T>> = vec![vec![T::zero(); width]; m];
        for (r, cols) in self.rows.iter().enumerate() {
            for &c in cols {
                tab[r][c] = T::zero() - &T::one();
            }
            tab[r][n + r] = T::one();
        }
        let mut rhs: Vec<T> = vec![T::zero() - &T::one(); m];
        let mut reduced: Vec<T> = self.costs.clone();
        reduced.extend(std::iter::repeat_with(T::zero).take(m));
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut pivots = 0;

        loop {
            // Leaving row: infeasible basic variable of smallest index.
            let leave = (0..m).filter(|&r| rhs[r].is_neg()).min_by_key(|&r| basis[r]);
            let Some(r) = leave else { break };
            // Entering column: min ratio d_j / -a_rj over a_rj < 0, ties by index.
            let mut enter: Option<(usize, T)> = None;
            for j in 0..width {
                if !tab[r][j].is_neg() {
                    continue;
                }
                let neg = T::zero() - &tab[r][j];
                let ratio = &reduced[j] / &neg;
                match &enter {
                    Some((_, best)) if ratio >= *best => {}
                    _ => enter = Some((j, ratio)),
                }
            }
            let Some((j, _)) = enter else { return Err(Error::Infeasible) };
            if pivots >= max_pivots {
                return Err(Error::Internal(format!("simplex exceeded {max_pivots} pivots")));
            }
            pivot(&mut tab, &mut rhs, &mut reduced, r, j);
            basis[r] = j;
            pivots += 1;
        }

        let mut primal = vec![T::zero(); n];
        for (r, &b) in basis.iter().enumerate() {
            if b < n {
                primal[b] = rhs[r].clone();
            }
        }
        let dual: Vec<T> = reduced[n..].to_vec();
        let objective = primal.iter().zip(&self.costs).fold(T::zero(), |acc, (x, c)| acc + &(x * c));
        Ok(LpSolution { objective, primal, dual, pivots })
    }
}

fn pivot<T>(tab: &mut [Vec<T>], rhs: &mut [T], reduced: &mut [T], r: usize, j: usize)
where
    T: LpScalar,
    for<'a> &'a T: Mul<&'a T, Output = T> + Div<&'a T, Output = T>,
{
    let piv = tab[r][j].clone();
    for x in tab[r].iter_mut() {
        if x.is_nonzero() {
            *x = &*x / &piv;
        }
    }
    rhs[r] = &rhs[r] / &piv;
    let support: Vec<usize> = (0..tab[r].len()).filter(|&c| tab[r][c].is_nonzero()).collect();
    let pivot_row = tab[r].clone();
    let pivot_rhs = rhs[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || !row[j].is_nonzero() {
            continue;
        }
        let f = row[j].clone();
        for &c in &support {
            row[c] = row[c].clone() - &(&f * &pivot_row[c]);
        }
        row[j] = T::zero();
        rhs[i] = rhs[i].clone() - &(&f * &pivot_rhs);
    }
    if reduced[j].is_nonzero() {
        let f = reduced[j].clone();
        for &c in &support {
            reduced[c] = reduced[c].clone() - &(&f * &pivot_row[c]);
        }
        reduced[j] = T::zero();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn single_row_picks_cheapest_column() {
        let lp = CoveringLp { costs: vec![rat(1, 2), rat(1, 2), rat(1, 4)], rows: vec![vec![0, 2]] };
        let s = lp.solve(100).unwrap();
        assert_eq!(s.objective, rat(1, 4));
        assert_eq!(s.primal, vec![int(0), int(0), int(1)]);
        assert_eq!(s.dual, vec![rat(1, 4)]);
    }

    #[test]
    fn triangle_fractional_cover_is_half_integral() {
        // Rows: the three edges of a triangle; columns: the three vertices at cost 1.
        let lp = CoveringLp { costs: vec![int(1); 3], rows: vec![vec![0, 1], vec![1, 2], vec![0, 2]] };
        let s = lp.solve(100).unwrap();
        assert_eq!(s.objective, rat(3, 2));
        let dual_sum = s.dual.iter().fold(Rational::zero(), |a, b| a + b);
        assert_eq!(dual_sum, rat(3, 2));
    }

    #[test]
    fn float_agrees_with_exact() {
        let rows = vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![3]];
        let exact = CoveringLp { costs: vec![int(1), int(2), int(1), rat(1, 3)], rows: rows.clone() }.solve(100).unwrap();
        let float = CoveringLp { costs: vec![1.0, 2.0, 1.0, 1.0 / 3.0], rows }.solve(100).unwrap();
        assert!((crate::rational::to_f64(&exact.objective) - float.objective).abs() < 1e-9);
    }

    #[test]
    fn empty_row_is_infeasible() {
        let lp = CoveringLp { costs: vec![int(1)], rows: vec![vec![]] };
        assert!(matches!(lp.solve(10), Err(Error::Infeasible)));
    }
}
