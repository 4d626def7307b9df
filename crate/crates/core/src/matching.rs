//! Bipartite matching over exact rational weights.
//!
//! [`max_weight_perfect_matching`] is the Hungarian algorithm with row and
//! column potentials, run on exact rationals so optimality certificates are
//! never lost to rounding; cost is `O(d^3)` arithmetic operations.
//! [`max_cardinality_matching`] is plain augmenting-path search, used by the
//! verifiers. Both scan in fixed ascending order, so ties break
//! deterministically.

use crate::rat::Rat;
use num::traits::Zero;

/// Maximum-weight perfect matching of a square matrix; `weights[i][j]` is the
/// weight of assigning row `i` to column `j` (negative weights are fine).
/// Returns the column assigned to each row.
pub fn max_weight_perfect_matching(weights: &[Vec<Rat>]) -> Vec<usize> {
    let d = weights.len();
    for row in weights {
        assert_eq!(row.len(), d, "weight matrix must be square");
    }
    if d == 0 {
        return Vec::new();
    }
    // Minimize negated weights. Potentials keep every reduced cost
    // `cost[i][j] - u[i] - v[j]` nonnegative on scanned edges.
    let cost = |i: usize, j: usize| -> Rat { -&weights[i][j] };
    let mut u = vec![Rat::zero(); d];
    let mut v = vec![Rat::zero(); d];
    let mut match_col: Vec<Option<usize>> = vec![None; d];

    for start in 0..d {
        // Grow an alternating tree from `start` until a free column appears,
        // maintaining for each unreached column its minimum slack into the
        // tree and the tree column that achieved it.
        let mut used = vec![false; d];
        let mut min_slack: Vec<Option<Rat>> = vec![None; d];
        let mut parent_col: Vec<Option<usize>> = vec![None; d];
        let mut cur_row = start;
        let mut cur_col: Option<usize> = None;
        let free_col;
        loop {
            let mut best: Option<(Rat, usize)> = None;
            for j in 0..d {
                if used[j] {
                    continue;
                }
                let slack = cost(cur_row, j) - &u[cur_row] - &v[j];
                let improves = match &min_slack[j] {
                    None => true,
                    Some(m) => slack < *m,
                };
                if improves {
                    min_slack[j] = Some(slack);
                    parent_col[j] = cur_col;
                }
                let current = min_slack[j].as_ref().unwrap();
                let take = match &best {
                    None => true,
                    Some((b, _)) => current < b,
                };
                if take {
                    best = Some((current.clone(), j));
                }
            }
            let (delta, next_col) = best.expect("tree cannot exhaust columns before a free one");
            u[start] += &delta;
            for j in 0..d {
                if used[j] {
                    u[match_col[j].unwrap()] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = &mut min_slack[j] {
                    *m -= &delta;
                }
            }
            used[next_col] = true;
            match match_col[next_col] {
                Some(r) => {
                    cur_row = r;
                    cur_col = Some(next_col);
                }
                None => {
                    free_col = next_col;
                    break;
                }
            }
        }
        // Flip the alternating path back to the start row.
        let mut j = free_col;
        loop {
            match parent_col[j] {
                Some(prev) => {
                    match_col[j] = match_col[prev];
                    j = prev;
                }
                None => {
                    match_col[j] = Some(start);
                    break;
                }
            }
        }
    }

    let mut assignment = vec![0; d];
    for j in 0..d {
        assignment[match_col[j].expect("matching is perfect")] = j;
    }
    assignment
}

/// Maximum-cardinality matching of a boolean adjacency matrix (rows by
/// columns, not necessarily square). Returns the column matched to each row.
pub fn max_cardinality_matching(adj: &[Vec<bool>]) -> Vec<Option<usize>> {
    let rows = adj.len();
    let cols = adj.first().map_or(0, Vec::len);
    let mut col_match: Vec<Option<usize>> = vec![None; cols];

    fn augment(
        row: usize,
        adj: &[Vec<bool>],
        visited: &mut [bool],
        col_match: &mut [Option<usize>],
    ) -> bool {
        for (c, &edge) in adj[row].iter().enumerate() {
            if !edge || visited[c] {
                continue;
            }
            visited[c] = true;
            let free = match col_match[c] {
                None => true,
                Some(other) => augment(other, adj, visited, col_match),
            };
            if free {
                col_match[c] = Some(row);
                return true;
            }
        }
        false
    }

    for row in 0..rows {
        let mut visited = vec![false; cols];
        augment(row, adj, &mut visited, &mut col_match);
    }

    let mut row_match = vec![None; rows];
    for (c, r) in col_match.iter().enumerate() {
        if let Some(r) = r {
            row_match[*r] = Some(c);
        }
    }
    row_match
}
