//! Dense two-phase simplex for small equality-form problems
//! (find x ≥ 0 with Ax = b, optionally minimizing c·x).
//!
//! Generic over the scalar so the same code runs in f64 with a pivot
//! tolerance and in exact rational arithmetic for adversarial queries.
//! Bland's rule breaks degenerate ties, which guarantees termination.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Field operations the tableau needs, plus a notion of "negligible" that is
/// a tolerance for floats and exact zero for rationals.
pub trait LpScalar: Clone + PartialEq + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn is_negligible(&self) -> bool;
}

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_negligible(&self) -> bool {
        f64::abs(*self) <= 1e-9
    }
}

impl LpScalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }
    fn from_f64(x: f64) -> Self {
        // every finite f64 is an exact dyadic rational
        BigRational::from_float(x).expect("finite input")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

#[derive(Debug, Clone)]
pub enum Feasibility<T> {
    Feasible { x: Vec<T> },
    /// Either an inconsistent row surfaced during elimination or a positive
    /// phase-1 optimum; `residual` is that objective value.
    Infeasible { residual: T },
}

/// Row-reduce the augmented system, dropping redundant rows. Returns the
/// independent rows or an inconsistency residual.
fn eliminate_redundant_rows<T: LpScalar>(
    a: &[Vec<T>],
    b: &[T],
) -> Result<(Vec<Vec<T>>, Vec<T>), T> {
    let m = a.len();
    let n = if m > 0 { a[0].len() } else { 0 };
    let mut rows: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_row = 0usize;
    for col in 0..n {
        if pivot_row >= m {
            break;
        }
        // partial pivot by largest magnitude
        let mut best = pivot_row;
        for r in pivot_row..m {
            if rows[r][col].abs() > rows[best][col].abs() {
                best = r;
            }
        }
        if rows[best][col].is_negligible() {
            continue;
        }
        rows.swap(pivot_row, best);
        let piv = rows[pivot_row][col].clone();
        for j in col..=n {
            rows[pivot_row][j] = rows[pivot_row][j].div(&piv);
        }
        for r in 0..m {
            if r != pivot_row && !rows[r][col].is_negligible() {
                let factor = rows[r][col].clone();
                for j in col..=n {
                    let delta = factor.mul(&rows[pivot_row][j]);
                    rows[r][j] = rows[r][j].sub(&delta);
                }
            }
        }
        pivot_row += 1;
    }

    let mut out_a = Vec::new();
    let mut out_b = Vec::new();
    for row in rows {
        let structural_zero = row[..n].iter().all(|v| v.is_negligible());
        if structural_zero {
            if !row[n].is_negligible() {
                return Err(row[n].abs());
            }
            continue; // redundant
        }
        out_a.push(row[..n].to_vec());
        out_b.push(row[n].clone());
    }
    Ok((out_a, out_b))
}

struct Tableau<T> {
    /// m × (n_total + 1); last column is the rhs.
    rows: Vec<Vec<T>>,
    /// Reduced-cost row; `neg_objective` is its rhs cell, holding the
    /// negated objective value so the whole row transforms uniformly.
    cost: Vec<T>,
    neg_objective: T,
    basis: Vec<usize>,
    n_total: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn objective(&self) -> T {
        self.neg_objective.neg()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.div(&piv);
        }
        let pivot_row = self.rows[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_negligible() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for j in 0..=self.n_total {
                let delta = factor.mul(&pivot_row[j]);
                self.rows[r][j] = self.rows[r][j].sub(&delta);
            }
        }
        if !self.cost[col].is_negligible() {
            let factor = self.cost[col].clone();
            for j in 0..self.n_total {
                let delta = factor.mul(&pivot_row[j]);
                self.cost[j] = self.cost[j].sub(&delta);
            }
            let delta = factor.mul(&pivot_row[self.n_total]);
            self.neg_objective = self.neg_objective.sub(&delta);
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering = smallest column with negative reduced cost,
    /// leaving = smallest basic index among minimum-ratio rows.
    fn run(&mut self) {
        loop {
            let entering = (0..self.n_total)
                .find(|&j| self.cost[j] < T::zero() && !self.cost[j].is_negligible());
            let Some(col) = entering else { break };
            let mut leaving: Option<usize> = None;
            let mut best_ratio: Option<T> = None;
            for r in 0..self.rows.len() {
                let coeff = &self.rows[r][col];
                if *coeff > T::zero() && !coeff.is_negligible() {
                    let ratio = self.rows[r][self.n_total].div(coeff);
                    let better = match &best_ratio {
                        None => true,
                        Some(best) => {
                            ratio < *best
                                || (ratio == *best
                                    && self.basis[r] < self.basis[leaving.unwrap()])
                        }
                    };
                    if better {
                        best_ratio = Some(ratio);
                        leaving = Some(r);
                    }
                }
            }
            let Some(row) = leaving else { break }; // unbounded; cannot happen in phase 1
            self.pivot(row, col);
            // keep the rhs non-negative against float drift
            for r in 0..self.rows.len() {
                if self.rows[r][self.n_total] < T::zero()
                    && self.rows[r][self.n_total].is_negligible()
                {
                    self.rows[r][self.n_total] = T::zero();
                }
            }
        }
    }
}

/// Two-phase solve of: find x ≥ 0 with Ax = b minimizing c·x (pass zeros for
/// pure feasibility). Redundant rows are eliminated before phase 1.
pub fn solve_equality<T: LpScalar>(
    a: &[Vec<T>],
    b: &[T],
    objective: Option<&[T]>,
) -> Feasibility<T> {
    let n = if a.is_empty() { 0 } else { a[0].len() };
    let (mut a, mut b) = match eliminate_redundant_rows(a, b) {
        Ok(pair) => pair,
        Err(residual) => return Feasibility::Infeasible { residual },
    };
    let m = a.len();
    for r in 0..m {
        if b[r] < T::zero() {
            for v in a[r].iter_mut() {
                *v = v.neg();
            }
            b[r] = b[r].neg();
        }
    }

    // phase 1: artificial columns n..n+m with unit cost
    let n_total = n + m;
    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        let mut row: Vec<T> = Vec::with_capacity(n_total + 1);
        row.extend(a[r].iter().cloned());
        for k in 0..m {
            row.push(if k == r { T::one() } else { T::zero() });
        }
        row.push(b[r].clone());
        rows.push(row);
    }
    // reduced costs for basis = artificials: structural j gets −Σ_i a_ij,
    // and the objective starts at Σ_i b_i
    let mut cost = vec![T::zero(); n_total];
    let mut neg_obj = T::zero();
    for j in 0..n {
        let mut s = T::zero();
        for r in 0..m {
            s = s.add(&rows[r][j]);
        }
        cost[j] = s.neg();
    }
    for r in 0..m {
        neg_obj = neg_obj.sub(&rows[r][n_total]);
    }
    let mut tab = Tableau {
        rows,
        cost,
        neg_objective: neg_obj,
        basis: (n..n_total).collect(),
        n_total,
    };
    tab.run();

    if !tab.objective().is_negligible() {
        return Feasibility::Infeasible {
            residual: tab.objective().abs(),
        };
    }

    // drive leftover artificials out of the basis
    let mut drop_rows = Vec::new();
    for r in 0..tab.rows.len() {
        if tab.basis[r] >= n {
            let col = (0..n).find(|&j| !tab.rows[r][j].is_negligible());
            match col {
                Some(j) => tab.pivot(r, j),
                None => drop_rows.push(r),
            }
        }
    }
    for &r in drop_rows.iter().rev() {
        tab.rows.remove(r);
        tab.basis.remove(r);
    }

    // phase 2 over the structural columns
    if let Some(c) = objective {
        let mut cost = vec![T::zero(); tab.n_total];
        let mut neg_obj = T::zero();
        cost[..n].clone_from_slice(c);
        // price out the current basis
        for r in 0..tab.rows.len() {
            let basic = tab.basis[r];
            if basic < n && !cost[basic].is_negligible() {
                let factor = cost[basic].clone();
                let row = tab.rows[r].clone();
                for j in 0..tab.n_total {
                    let delta = factor.mul(&row[j]);
                    cost[j] = cost[j].sub(&delta);
                }
                let delta = factor.mul(&row[tab.n_total]);
                neg_obj = neg_obj.sub(&delta);
            }
        }
        // forbid artificials from re-entering
        for j in n..tab.n_total {
            cost[j] = T::one();
        }
        tab.cost = cost;
        tab.neg_objective = neg_obj;
        tab.run();
    }

    let mut x = vec![T::zero(); n];
    for (r, &basic) in tab.basis.iter().enumerate() {
        if basic < n {
            let v = tab.rows[r][tab.n_total].clone();
            x[basic] = if v < T::zero() && v.is_negligible() {
                T::zero()
            } else {
                v
            };
        }
    }
    Feasibility::Feasible { x }
}
