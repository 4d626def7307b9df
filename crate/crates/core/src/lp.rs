//! Linear programming over exact rationals.
//!
//! A small two-phase primal simplex on a dense tableau. Bland's rule picks
//! both the entering and leaving variable, which rules out cycling, and all
//! pivoting is exact, so the reported optimum is the true rational optimum.
//! Built for the desk-scale programs this crate assembles (tens of rows);
//! no attempt at sparse or revised formulations.

use crate::rat::Rat;
use num::traits::Zero;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub relation: Relation,
    pub rhs: Rat,
}

/// `minimize objective . x` subject to the constraints; variables with
/// `nonneg[i]` set are bounded below by zero, the rest are free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rat>,
    pub constraints: Vec<Constraint>,
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub x: Vec<Rat>,
    pub objective: Rat,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("program is infeasible")]
    Infeasible,
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("constraint {index} has {got} coefficients, expected {expected}")]
    BadShape { index: usize, got: usize, expected: usize },
}

/// Solves `lp` to its exact rational minimum.
pub fn solve_min(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let nvars = lp.objective.len();
    assert_eq!(lp.nonneg.len(), nvars, "nonneg flags must cover every variable");
    for (index, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != nvars {
            return Err(LpError::BadShape { index, got: c.coeffs.len(), expected: nvars });
        }
    }

    let rows = presolve(&lp.constraints)?;

    // Column layout: each nonnegative variable gets one column, each free
    // variable a positive and a negative column (x = x+ - x-).
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(nvars);
    let mut ncols = 0;
    for &nn in &lp.nonneg {
        if nn {
            var_cols.push((ncols, None));
            ncols += 1;
        } else {
            var_cols.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }

    // Build equality rows with nonnegative right-hand sides; slack columns
    // for Le rows double as the starting basis, Ge and Eq rows take an
    // artificial variable.
    let mut tableau: Vec<Vec<Rat>> = Vec::with_capacity(rows.len());
    let mut slack_rows: Vec<usize> = Vec::new();
    let mut needs_artificial: Vec<usize> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let mut flip = false;
        let mut rel = row.relation;
        let mut rhs = row.rhs.clone();
        if rhs < Rat::zero() {
            flip = true;
            rhs = -rhs;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        let mut t_row: Vec<Rat> = Vec::with_capacity(ncols + 1);
        let mut expanded = vec![Rat::zero(); ncols];
        for (v, coeff) in row.coeffs.iter().enumerate() {
            let value = if flip { -coeff } else { coeff.clone() };
            let (pos, neg) = var_cols[v];
            expanded[pos] = value.clone();
            if let Some(neg) = neg {
                expanded[neg] = -value;
            }
        }
        t_row.extend(expanded);
        t_row.push(rhs);
        tableau.push(t_row);
        match rel {
            Relation::Le => slack_rows.push(r),
            Relation::Ge => {
                slack_rows.push(r);
                needs_artificial.push(r);
            }
            Relation::Eq => needs_artificial.push(r),
        }
    }

    // Append slack/surplus columns.
    let mut basis: Vec<usize> = vec![usize::MAX; tableau.len()];
    let mut col = ncols;
    for &r in &slack_rows {
        let sign = match rows[r].relation_normalized() {
            Relation::Le => Rat::from_integer(1.into()),
            Relation::Ge => -Rat::from_integer(1.into()),
            Relation::Eq => unreachable!(),
        };
        for (rr, row) in tableau.iter_mut().enumerate() {
            row.insert(row.len() - 1, if rr == r { sign.clone() } else { Rat::zero() });
        }
        if sign > Rat::zero() {
            basis[r] = col;
        }
        col += 1;
    }
    let ncols_with_slack = col;

    // Append artificial columns for rows still lacking a basic variable.
    let mut artificial_cols: Vec<usize> = Vec::new();
    for &r in &needs_artificial {
        for (rr, row) in tableau.iter_mut().enumerate() {
            let v = if rr == r { Rat::from_integer(1.into()) } else { Rat::zero() };
            row.insert(row.len() - 1, v);
        }
        basis[r] = col;
        artificial_cols.push(col);
        col += 1;
    }
    let total_cols = col;
    debug_assert!(basis.iter().all(|&b| b != usize::MAX));

    // Phase 1: minimize the sum of artificials.
    if !artificial_cols.is_empty() {
        let mut cost = vec![Rat::zero(); total_cols + 1];
        for &a in &artificial_cols {
            cost[a] = Rat::from_integer(1.into());
        }
        // Reduce against the starting basis (artificials are basic).
        for (r, &b) in basis.iter().enumerate() {
            if artificial_cols.contains(&b) {
                let row = tableau[r].clone();
                for (j, entry) in row.iter().enumerate() {
                    cost[j] -= entry;
                }
            }
        }
        run_simplex(&mut tableau, &mut basis, &mut cost, total_cols)?;
        let phase1_value = -cost[total_cols].clone();
        if !phase1_value.is_zero() {
            return Err(LpError::Infeasible);
        }
        // Pivot surviving artificials out of the basis; rows that cannot
        // pivot are redundant and get dropped.
        let mut r = 0;
        while r < tableau.len() {
            if artificial_cols.contains(&basis[r]) {
                let pivot_col = (0..ncols_with_slack).find(|&j| !tableau[r][j].is_zero());
                match pivot_col {
                    Some(j) => pivot(&mut tableau, &mut basis, &mut cost, r, j),
                    None => {
                        tableau.remove(r);
                        basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    // Drop artificial columns entirely (they are rightmost, before rhs).
    let keep = ncols_with_slack;
    for row in &mut tableau {
        let rhs = row.pop().unwrap();
        row.truncate(keep);
        row.push(rhs);
    }

    // Phase 2: original objective over the expanded columns.
    let mut cost = vec![Rat::zero(); keep + 1];
    for (v, obj) in lp.objective.iter().enumerate() {
        let (pos, neg) = var_cols[v];
        cost[pos] = obj.clone();
        if let Some(neg) = neg {
            cost[neg] = -obj.clone();
        }
    }
    // Reduce against the current basis.
    for (r, &b) in basis.iter().enumerate() {
        if !cost[b].is_zero() {
            let factor = cost[b].clone();
            let row = tableau[r].clone();
            for (j, entry) in row.iter().enumerate() {
                cost[j] -= &factor * entry;
            }
        }
    }
    run_simplex(&mut tableau, &mut basis, &mut cost, keep)?;

    // Read off the solution.
    let mut col_value = vec![Rat::zero(); keep];
    for (r, &b) in basis.iter().enumerate() {
        col_value[b] = tableau[r].last().unwrap().clone();
    }
    let x: Vec<Rat> = var_cols
        .iter()
        .map(|&(pos, neg)| match neg {
            None => col_value[pos].clone(),
            Some(neg) => &col_value[pos] - &col_value[neg],
        })
        .collect();
    let objective = -cost[keep].clone();
    Ok(LpSolution { x, objective })
}

/// One simplex run with Bland's rule. `width` is the number of structural
/// columns (rhs sits at index `width`). The cost row's last entry holds the
/// negated objective value throughout.
fn run_simplex(
    tableau: &mut Vec<Vec<Rat>>,
    basis: &mut [usize],
    cost: &mut Vec<Rat>,
    width: usize,
) -> Result<(), LpError> {
    loop {
        // Bland: entering column = smallest index with negative reduced cost.
        let entering = (0..width).find(|&j| cost[j] < Rat::zero());
        let Some(entering) = entering else {
            return Ok(());
        };
        // Leaving row: minimum ratio, ties by smallest basis variable.
        let mut leave: Option<(Rat, usize)> = None;
        for (r, row) in tableau.iter().enumerate() {
            if row[entering] <= Rat::zero() {
                continue;
            }
            let ratio = row.last().unwrap() / &row[entering];
            let replace = match &leave {
                None => true,
                Some((best, row_best)) => {
                    ratio < *best || (ratio == *best && basis[r] < basis[*row_best])
                }
            };
            if replace {
                leave = Some((ratio, r));
            }
        }
        let Some((_, leaving_row)) = leave else {
            return Err(LpError::Unbounded);
        };
        pivot(tableau, basis, cost, leaving_row, entering);
    }
}

fn pivot(
    tableau: &mut [Vec<Rat>],
    basis: &mut [usize],
    cost: &mut [Rat],
    row: usize,
    col: usize,
) {
    let p = tableau[row][col].clone();
    for entry in tableau[row].iter_mut() {
        *entry /= &p;
    }
    let pivot_row = tableau[row].clone();
    for (r, other) in tableau.iter_mut().enumerate() {
        if r == row || other[col].is_zero() {
            continue;
        }
        let factor = other[col].clone();
        for (j, entry) in other.iter_mut().enumerate() {
            *entry -= &factor * &pivot_row[j];
        }
    }
    if !cost[col].is_zero() {
        let factor = cost[col].clone();
        for (j, entry) in cost.iter_mut().enumerate() {
            *entry -= &factor * &pivot_row[j];
        }
    }
    basis[row] = col;
}

/// Presolved row with a normalized relation (needed again when assigning
/// slack signs after right-hand-side normalization).
#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<Rat>,
    relation: Relation,
    rhs: Rat,
}

impl Row {
    fn relation_normalized(&self) -> Relation {
        if self.rhs < Rat::zero() {
            match self.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            }
        } else {
            self.relation
        }
    }
}

/// Collapses duplicate-coefficient rows (keep the binding right-hand side)
/// and settles trivially constant rows. The feasible set is unchanged; the
/// tableau just stops carrying copies of the same halfspace.
fn presolve(constraints: &[Constraint]) -> Result<Vec<Row>, LpError> {
    let mut best: HashMap<(Vec<Rat>, Relation, Option<Rat>), Rat> = HashMap::new();
    let mut order: Vec<(Vec<Rat>, Relation, Option<Rat>)> = Vec::new();
    for c in constraints {
        if c.coeffs.iter().all(Zero::is_zero) {
            let satisfied = match c.relation {
                Relation::Le => c.rhs >= Rat::zero(),
                Relation::Ge => c.rhs <= Rat::zero(),
                Relation::Eq => c.rhs.is_zero(),
            };
            if satisfied {
                continue;
            }
            return Err(LpError::Infeasible);
        }
        // Eq rows keep their rhs in the key so distinct ones all survive.
        let key = match c.relation {
            Relation::Eq => (c.coeffs.clone(), c.relation, Some(c.rhs.clone())),
            _ => (c.coeffs.clone(), c.relation, None),
        };
        match best.get_mut(&key) {
            None => {
                best.insert(key.clone(), c.rhs.clone());
                order.push(key);
            }
            Some(rhs) => {
                let binding = match c.relation {
                    Relation::Le => c.rhs < *rhs,
                    Relation::Ge => c.rhs > *rhs,
                    Relation::Eq => false,
                };
                if binding {
                    *rhs = c.rhs.clone();
                }
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let rhs = best[&key].clone();
            Row { coeffs: key.0, relation: key.1, rhs }
        })
        .collect())
}
