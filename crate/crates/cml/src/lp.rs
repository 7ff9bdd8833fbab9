//! Exact linear programming over rationals: a dense two-phase simplex with
//! Bland's rule. Problem sizes here are tiny (dozens of variables and
//! constraints), so a straightforward tableau beats anything fancier, and
//! exact arithmetic is what makes strict-inequality reasoning sound.

use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    /// Sparse (variable, coefficient) pairs; variables are implicitly >= 0.
    pub coeffs: Vec<(usize, Rat)>,
    pub cmp: Cmp,
    pub rhs: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Infeasible,
    Unbounded,
    Optimal { value: Rat, point: Vec<Rat> },
}

struct Tableau {
    /// Constraint rows, each of width `cols + 1` (last entry is the rhs).
    rows: Vec<Vec<Rat>>,
    /// Objective row: `value = obj[cols] - sum obj[j] * x_j` over nonbasics.
    obj: Vec<Rat>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let factor = self.rows[row][col].clone();
        debug_assert!(!factor.is_zero());
        for v in self.rows[row].iter_mut() {
            *v = &*v / &factor;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let mult = other[col].clone();
            for (v, p) in other.iter_mut().zip(&pivot_row) {
                *v = &*v - &(&mult * p);
            }
        }
        if !self.obj[col].is_zero() {
            let mult = self.obj[col].clone();
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v = &*v - &(&mult * p);
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule iteration until optimal or unbounded. `allowed` masks the
    /// columns that may enter the basis.
    fn run(&mut self, allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.cols)
                .find(|&j| allowed[j] && self.obj[j].is_negative());
            let Some(col) = entering else {
                return true; // optimal
            };
            let mut leaving: Option<(usize, Rat)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][self.cols] / a;
                match &leaving {
                    None => leaving = Some((r, ratio)),
                    Some((best_r, best)) => {
                        // Ties break toward the smallest basic index (Bland).
                        if ratio < *best
                            || (ratio == *best && self.basis[r] < self.basis[*best_r])
                        {
                            leaving = Some((r, ratio));
                        }
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return false, // unbounded in this column
            }
        }
    }
}

/// Maximize a linear objective subject to constraints, all variables >= 0.
pub fn maximize(
    num_vars: usize,
    objective: &[(usize, Rat)],
    constraints: &[Constraint],
) -> LpResult {
    let m = constraints.len();
    // Column layout: structural vars, then one slack/surplus per inequality,
    // then one artificial per row that needs one.
    let mut n_slack = 0;
    for c in constraints {
        if c.cmp != Cmp::Eq {
            n_slack += 1;
        }
    }
    let cols = num_vars + n_slack + m; // upper bound; artificial count <= m
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut artificial_cols = Vec::new();
    let mut next_slack = num_vars;
    let mut next_artificial = num_vars + n_slack;

    for c in constraints {
        let mut row = vec![Rat::zero(); cols + 1];
        for (j, coeff) in &c.coeffs {
            assert!(*j < num_vars, "coefficient on undeclared variable");
            row[*j] = &row[*j] + coeff;
        }
        row[cols] = c.rhs.clone();
        let mut cmp = c.cmp;
        if row[cols].is_negative() {
            for v in row.iter_mut() {
                *v = -&*v;
            }
            cmp = match cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
        match cmp {
            Cmp::Le => {
                row[next_slack] = Rat::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Cmp::Ge => {
                row[next_slack] = -Rat::one();
                next_slack += 1;
                row[next_artificial] = Rat::one();
                basis.push(next_artificial);
                artificial_cols.push(next_artificial);
                next_artificial += 1;
            }
            Cmp::Eq => {
                row[next_artificial] = Rat::one();
                basis.push(next_artificial);
                artificial_cols.push(next_artificial);
                next_artificial += 1;
            }
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: vec![Rat::zero(); cols + 1],
        basis,
        cols,
    };

    // Phase 1: maximize minus the sum of artificials.
    if !artificial_cols.is_empty() {
        for &j in &artificial_cols {
            t.obj[j] = Rat::one();
        }
        // Reduce basic artificial columns out of the objective row.
        for r in 0..t.rows.len() {
            if artificial_cols.contains(&t.basis[r]) {
                let row = t.rows[r].clone();
                for (v, p) in t.obj.iter_mut().zip(&row) {
                    *v = &*v - p;
                }
            }
        }
        let allowed = vec![true; cols];
        t.run(&allowed);
        if !t.obj[cols].is_zero() {
            return LpResult::Infeasible;
        }
        // Degenerate basic artificials: pivot them out where possible.
        for r in 0..t.rows.len() {
            if artificial_cols.contains(&t.basis[r]) {
                if let Some(col) =
                    (0..num_vars + n_slack).find(|&j| !t.rows[r][j].is_zero())
                {
                    t.pivot(r, col);
                }
            }
        }
    }

    // Phase 2: the real objective, artificial columns banned.
    t.obj = vec![Rat::zero(); cols + 1];
    for (j, coeff) in objective {
        assert!(*j < num_vars);
        t.obj[*j] = &t.obj[*j] - coeff;
    }
    for r in 0..t.rows.len() {
        let b = t.basis[r];
        if !t.obj[b].is_zero() {
            let mult = t.obj[b].clone();
            let row = t.rows[r].clone();
            for (v, p) in t.obj.iter_mut().zip(&row) {
                *v = &*v - &(&mult * p);
            }
        }
    }
    let mut allowed = vec![true; cols];
    for &j in &artificial_cols {
        allowed[j] = false;
    }
    if !t.run(&allowed) {
        return LpResult::Unbounded;
    }

    let mut point = vec![Rat::zero(); num_vars];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < num_vars {
            point[b] = t.rows[r][t.cols].clone();
        }
    }
    LpResult::Optimal {
        value: t.obj[t.cols].clone(),
        point,
    }
}

/// Feasibility check: any point satisfying the constraints, or `None`.
pub fn feasible_point(num_vars: usize, constraints: &[Constraint]) -> Option<Vec<Rat>> {
    match maximize(num_vars, &[], constraints) {
        LpResult::Optimal { point, .. } => Some(point),
        LpResult::Infeasible => None,
        LpResult::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}
