//! Exact rational linear programming: a dense two-phase simplex with Bland's
//! rule (guaranteed termination, no floating point) plus a Fourier–Motzkin
//! feasibility fallback used for cross-checking small systems.
//!
//! Variables are free; all structure lives in the constraints. Infeasible
//! systems come back with a Farkas certificate over the original constraints.

#![allow(clippy::needless_range_loop)] // in-place pivot kernels

use crate::linalg::vec_dot;
use crate::rat::Rat;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub rel: Rel,
    pub rhs: Rat,
}

impl Constraint {
    pub fn le(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint { coeffs, rel: Rel::Le, rhs }
    }
    pub fn ge(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint { coeffs, rel: Rel::Ge, rhs }
    }
    pub fn eq(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint { coeffs, rel: Rel::Eq, rhs }
    }
}

#[derive(Clone, Debug)]
pub enum LpResult {
    Optimal { point: Vec<Rat>, value: Rat },
    /// Multipliers over the original constraints proving infeasibility:
    /// nonnegative on `Le` rows, nonpositive on `Ge` rows, free on `Eq` rows,
    /// with `sum m_i a_i = 0` and `sum m_i b_i < 0`.
    Infeasible { farkas: Vec<Rat> },
    Unbounded,
}

struct Tableau {
    // rows x cols of constraint data, kept with an identity in the basis columns
    a: Vec<Vec<Rat>>,
    b: Vec<Rat>,
    cost: Vec<Rat>,
    cost_value: Rat,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.a[row][col].recip();
        for x in self.a[row].iter_mut() {
            *x *= &inv;
        }
        self.b[row] *= &inv;
        for i in 0..self.a.len() {
            if i != row && !self.a[i][col].is_zero() {
                let f = self.a[i][col].clone();
                for j in 0..self.a[i].len() {
                    let t = &self.a[i][j] - &f * &self.a[row][j];
                    self.a[i][j] = t;
                }
                let t = &self.b[i] - &f * &self.b[row];
                self.b[i] = t;
            }
        }
        if !self.cost[col].is_zero() {
            let f = self.cost[col].clone();
            for j in 0..self.cost.len() {
                let t = &self.cost[j] - &f * &self.a[row][j];
                self.cost[j] = t;
            }
            let t = &self.cost_value - &f * &self.b[row];
            self.cost_value = t;
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule to optimality. Returns false on unboundedness.
    fn solve(&mut self) -> bool {
        loop {
            let Some(col) = (0..self.cost.len()).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<usize> = None;
            let mut best: Option<Rat> = None;
            for i in 0..self.a.len() {
                if self.a[i][col].is_positive() {
                    let ratio = &self.b[i] / &self.a[i][col];
                    let better = match &best {
                        None => true,
                        Some(r) => {
                            ratio < *r
                                || (ratio == *r
                                    && self.basis[i] < self.basis[leave.unwrap()])
                        }
                    };
                    if better {
                        best = Some(ratio);
                        leave = Some(i);
                    }
                }
            }
            match leave {
                Some(row) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Minimizes `objective . x` subject to the constraints, over free variables.
pub fn minimize(objective: &[Rat], constraints: &[Constraint]) -> LpResult {
    let n = objective.len();
    let m = constraints.len();
    // Normalize rows to rhs >= 0; remember flips.
    let mut flip = vec![false; m];
    let mut rows: Vec<(Vec<Rat>, Rel, Rat)> = Vec::with_capacity(m);
    for (i, c) in constraints.iter().enumerate() {
        assert_eq!(c.coeffs.len(), n, "constraint arity mismatch");
        if c.rhs.is_negative() {
            flip[i] = true;
            let rel = match c.rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
            rows.push((c.coeffs.iter().map(|x| -x).collect(), rel, -&c.rhs));
        } else {
            rows.push((c.coeffs.clone(), c.rel, c.rhs.clone()));
        }
    }
    // Columns: x+ (n), x- (n), slack/surplus (per Le/Ge), artificial (per Ge/Eq).
    let mut slack_col = vec![usize::MAX; m];
    let mut art_col = vec![usize::MAX; m];
    let mut ncols = 2 * n;
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        match rel {
            Rel::Le | Rel::Ge => {
                slack_col[i] = ncols;
                ncols += 1;
            }
            Rel::Eq => {}
        }
    }
    let art_base = ncols;
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        match rel {
            Rel::Ge | Rel::Eq => {
                art_col[i] = ncols;
                ncols += 1;
            }
            Rel::Le => {}
        }
    }

    let mut a = vec![vec![Rat::zero(); ncols]; m];
    let mut b = vec![Rat::zero(); m];
    let mut basis = vec![0usize; m];
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        for j in 0..n {
            a[i][j] = coeffs[j].clone();
            a[i][n + j] = -&coeffs[j];
        }
        match rel {
            Rel::Le => {
                a[i][slack_col[i]] = Rat::one();
                basis[i] = slack_col[i];
            }
            Rel::Ge => {
                a[i][slack_col[i]] = -Rat::one();
                a[i][art_col[i]] = Rat::one();
                basis[i] = art_col[i];
            }
            Rel::Eq => {
                a[i][art_col[i]] = Rat::one();
                basis[i] = art_col[i];
            }
        }
        b[i] = rhs.clone();
    }

    // Phase I: minimize the sum of artificials.
    let mut cost = vec![Rat::zero(); ncols];
    for j in art_base..ncols {
        cost[j] = Rat::one();
    }
    let mut cost_value = Rat::zero();
    // Price out the initial basis (artificial columns have cost 1).
    for i in 0..m {
        if basis[i] >= art_base {
            for j in 0..ncols {
                let t = &cost[j] - &a[i][j];
                cost[j] = t;
            }
            let t = &cost_value - &b[i];
            cost_value = t;
        }
    }
    let mut t = Tableau { a, b, cost, cost_value, basis };
    let bounded = t.solve();
    assert!(bounded, "phase I objective is bounded below by zero");
    // Phase-I optimum is -cost_value (we maintain cost_value = -objective).
    let phase1 = -t.cost_value.clone();
    if phase1.is_positive() {
        // Infeasible: read duals off the reduced costs of the initial basis
        // columns. For row i with initial column j0: y_i = c_j0 - rbar_j0.
        let mut farkas = vec![Rat::zero(); m];
        for i in 0..m {
            let (j0, c0) = if art_col[i] != usize::MAX {
                (art_col[i], Rat::one())
            } else {
                (slack_col[i], Rat::zero())
            };
            let mut y = &c0 - &t.cost[j0];
            // Initial column was -1 for Ge surplus? No: the Ge rows' initial
            // basis is the artificial (+1); Le rows use the +1 slack. Either
            // way the initial basic column is +1, so y needs no sign fix here.
            if flip[i] {
                y = -y;
            }
            farkas[i] = y;
        }
        // Orient: Farkas for the original system means sum m_i b_i < 0.
        let total: Rat = constraints
            .iter()
            .zip(&farkas)
            .map(|(c, y)| &c.rhs * y)
            .fold(Rat::zero(), |acc, v| acc + v);
        let farkas = if total.is_negative() {
            farkas
        } else {
            farkas.into_iter().map(|y| -y).collect()
        };
        debug_assert!(verify_farkas(constraints, &farkas));
        return LpResult::Infeasible { farkas };
    }

    // Drive any basic artificials (at level zero) out of the basis, drop the
    // rows that stay artificial (they are redundant), then discard the
    // artificial columns entirely so phase II cannot touch them.
    for i in 0..m {
        if t.basis[i] >= art_base {
            if let Some(col) = (0..art_base).find(|&j| !t.a[i][j].is_zero()) {
                t.pivot(i, col);
            }
        }
    }
    let keep: Vec<usize> = (0..m).filter(|&i| t.basis[i] < art_base).collect();
    debug_assert!((0..m).all(|i| keep.contains(&i) || t.b[i].is_zero()));
    t.a = keep.iter().map(|&i| t.a[i][..art_base].to_vec()).collect();
    t.b = keep.iter().map(|&i| t.b[i].clone()).collect();
    t.basis = keep.iter().map(|&i| t.basis[i]).collect();

    // Phase II.
    let mut cost = vec![Rat::zero(); art_base];
    for j in 0..n {
        cost[j] = objective[j].clone();
        cost[n + j] = -&objective[j];
    }
    let mut cost_value = Rat::zero();
    for i in 0..t.a.len() {
        let bj = t.basis[i];
        if !cost[bj].is_zero() {
            let f = cost[bj].clone();
            for j in 0..cost.len() {
                let v = &cost[j] - &f * &t.a[i][j];
                cost[j] = v;
            }
            let v = &cost_value - &f * &t.b[i];
            cost_value = v;
        }
    }
    t.cost = cost;
    t.cost_value = cost_value;
    if !t.solve() {
        return LpResult::Unbounded;
    }
    let mut x = vec![Rat::zero(); n];
    for i in 0..t.a.len() {
        let bj = t.basis[i];
        if bj < n {
            x[bj] += &t.b[i];
        } else if bj < 2 * n {
            x[bj - n] -= &t.b[i];
        }
    }
    let value = vec_dot(objective, &x);
    LpResult::Optimal { point: x, value }
}

/// A feasible point of the system, or a Farkas certificate of infeasibility.
pub fn feasible_point(constraints: &[Constraint]) -> Result<Vec<Rat>, Vec<Rat>> {
    let n = constraints.first().map(|c| c.coeffs.len()).unwrap_or(0);
    match minimize(&vec![Rat::zero(); n], constraints) {
        LpResult::Optimal { point, .. } => Ok(point),
        LpResult::Infeasible { farkas } => Err(farkas),
        LpResult::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// Checks a Farkas certificate against the original constraints.
pub fn verify_farkas(constraints: &[Constraint], mult: &[Rat]) -> bool {
    if constraints.len() != mult.len() || constraints.is_empty() {
        return false;
    }
    let n = constraints[0].coeffs.len();
    for (c, y) in constraints.iter().zip(mult) {
        match c.rel {
            Rel::Le if y.is_negative() => return false,
            Rel::Ge if y.is_positive() => return false,
            _ => {}
        }
    }
    let mut combo = vec![Rat::zero(); n];
    let mut rhs = Rat::zero();
    for (c, y) in constraints.iter().zip(mult) {
        for j in 0..n {
            combo[j] += &c.coeffs[j] * y;
        }
        rhs += &c.rhs * y;
    }
    combo.iter().all(Rat::is_zero) && rhs.is_negative()
}

/// Fourier–Motzkin feasibility for small systems (cross-check only).
/// Panics above 12 variables.
pub fn fourier_motzkin_feasible(constraints: &[Constraint]) -> bool {
    let n = constraints.first().map(|c| c.coeffs.len()).unwrap_or(0);
    assert!(n <= 12, "fourier-motzkin fallback is limited to 12 variables");
    // Express everything as coeffs . x <= rhs.
    let mut ineqs: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for c in constraints {
        match c.rel {
            Rel::Le => ineqs.push((c.coeffs.clone(), c.rhs.clone())),
            Rel::Ge => ineqs.push((c.coeffs.iter().map(|x| -x).collect(), -&c.rhs)),
            Rel::Eq => {
                ineqs.push((c.coeffs.clone(), c.rhs.clone()));
                ineqs.push((c.coeffs.iter().map(|x| -x).collect(), -&c.rhs));
            }
        }
    }
    for var in (0..n).rev() {
        let (zero, nonzero): (Vec<_>, Vec<_>) =
            ineqs.into_iter().partition(|(a, _)| a[var].is_zero());
        let mut next = zero;
        let (pos, neg): (Vec<_>, Vec<_>) =
            nonzero.into_iter().partition(|(a, _)| a[var].is_positive());
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                // Scale so the `var` coefficients cancel.
                let sp = ap[var].recip();
                let sn = -an[var].recip();
                let mut row = vec![Rat::zero(); n];
                for j in 0..n {
                    row[j] = &ap[j] * &sp + &an[j] * &sn;
                }
                let rhs = bp * &sp + bn * &sn;
                next.push((row, rhs));
            }
        }
        assert!(next.len() <= 200_000, "fourier-motzkin blow-up");
        ineqs = next;
    }
    ineqs.iter().all(|(_, rhs)| !rhs.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    #[test]
    fn optimizes_a_small_lp() {
        // min -x - y  s.t. x + y <= 4, x <= 3, y <= 2
        let cons = vec![
            Constraint::le(vec![rat(1), rat(1)], rat(4)),
            Constraint::le(vec![rat(1), rat(0)], rat(3)),
            Constraint::le(vec![rat(0), rat(1)], rat(2)),
            Constraint::ge(vec![rat(1), rat(0)], rat(0)),
            Constraint::ge(vec![rat(0), rat(1)], rat(0)),
        ];
        match minimize(&[rat(-1), rat(-1)], &cons) {
            LpResult::Optimal { value, .. } => assert_eq!(value, rat(-4)),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn detects_unbounded() {
        let cons = vec![Constraint::ge(vec![rat(1)], rat(0))];
        match minimize(&[rat(-1)], &cons) {
            LpResult::Unbounded => {}
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_with_verified_farkas() {
        // x >= 1, x <= 0 is infeasible.
        let cons = vec![
            Constraint::ge(vec![rat(1)], rat(1)),
            Constraint::le(vec![rat(1)], rat(0)),
        ];
        match minimize(&[rat(0)], &cons) {
            LpResult::Infeasible { farkas } => assert!(verify_farkas(&cons, &farkas)),
            other => panic!("expected infeasible, got {other:?}"),
        }
        // Equality chain: x = 1, x = 2.
        let cons = vec![
            Constraint::eq(vec![rat(1)], rat(1)),
            Constraint::eq(vec![rat(1)], rat(2)),
        ];
        match minimize(&[rat(0)], &cons) {
            LpResult::Infeasible { farkas } => assert!(verify_farkas(&cons, &farkas)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_and_free_variables() {
        // x <= -3 with x free; optimum of min x is unbounded, max x is -3.
        let cons = vec![Constraint::le(vec![rat(1)], rat(-3))];
        match minimize(&[rat(-1)], &cons) {
            LpResult::Optimal { point, value } => {
                assert_eq!(value, rat(3));
                assert_eq!(point[0], rat(-3));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn simplex_agrees_with_fourier_motzkin() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=6);
            let cons: Vec<Constraint> = (0..m)
                .map(|_| {
                    let coeffs: Vec<Rat> =
                        (0..n).map(|_| ratio(rng.gen_range(-3..=3), 1)).collect();
                    let rhs = ratio(rng.gen_range(-4..=4), 1);
                    match rng.gen_range(0..3) {
                        0 => Constraint::le(coeffs, rhs),
                        1 => Constraint::ge(coeffs, rhs),
                        _ => Constraint::eq(coeffs, rhs),
                    }
                })
                .collect();
            let simplex_feasible = feasible_point(&cons).is_ok();
            assert_eq!(
                simplex_feasible,
                fourier_motzkin_feasible(&cons),
                "disagreement on {cons:?}"
            );
            if let Err(farkas) = feasible_point(&cons) {
                assert!(verify_farkas(&cons, &farkas));
            }
        }
    }
}
