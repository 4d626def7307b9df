//! Secretive rent division under quasilinear utilities.
//!
//! `n` housemates split `n` rooms and a total rent; agent `n-1` is absent.
//! The solver fixes, for every room `k` the absent agent might take, a
//! max-weight perfect matching of the known agents onto the other rooms,
//! then prices all rooms with one linear program that makes every matched
//! room a favorite room for its agent simultaneously across all `k`. The
//! LP is always feasible, and its minimum-total-rent optimum is returned.

use crate::instance::{BijectionFamily, PriceVector, RentInstance};
use crate::lp::{solve_min, Constraint, LinearProgram, LpError, Relation};
use crate::matching::max_weight_perfect_matching;
use crate::rat::{rat, Rat};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RentError {
    /// The simultaneous-envy LP failed; cannot happen for well-formed
    /// instances and signals an internal invariant violation.
    #[error("pricing program failed: {0}")]
    Pricing(LpError),
    /// No room is weakly worst for every agent under every matching; cannot
    /// happen for matchings produced by this module.
    #[error("no universally despised room")]
    NoDespisedRoom,
}

/// Secretive rent solution: nonnegative prices, one matching per room the
/// absent agent might take, and the minimized total rent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RentSolution {
    pub prices: PriceVector,
    pub bijections: BijectionFamily,
    pub total_rent: Rat,
}

/// For each room `k`, computes the maximum-weight perfect matching of the
/// `n-1` known agents onto the rooms other than `k`, under base values.
pub fn compute_room_removal_matchings(inst: &RentInstance) -> BijectionFamily {
    let n = inst.n;
    let mut pi = Vec::with_capacity(n);
    for k in 0..n {
        let rooms: Vec<usize> = (0..n).filter(|&r| r != k).collect();
        let weights: Vec<Vec<Rat>> = inst
            .base_values
            .iter()
            .map(|row| rooms.iter().map(|&r| row[r].clone()).collect())
            .collect();
        let assignment = max_weight_perfect_matching(&weights);
        pi.push(assignment.into_iter().map(|c| rooms[c]).collect());
    }
    BijectionFamily { pi }
}

/// Assembles the pricing program: minimize total rent subject to, for every
/// agent `a`, choice `k`, and room `r`,
/// `B[a][pi_k(a)] - x[pi_k(a)] >= B[a][r] - x[r]`, with `x >= 0`.
/// All `(n-1) * n * n` rows are emitted as-is; the solver's presolve is the
/// place for dropping duplicates.
pub fn build_envy_lp(inst: &RentInstance, family: &BijectionFamily) -> LinearProgram {
    let n = inst.n;
    let mut constraints = Vec::with_capacity((n - 1) * n * n);
    for a in 0..n - 1 {
        for k in 0..n {
            let matched = family.pi[k][a];
            for r in 0..n {
                // x_r - x_matched >= B[a][r] - B[a][matched]
                let mut coeffs = vec![rat(0); n];
                coeffs[r] += rat(1);
                coeffs[matched] -= rat(1);
                let rhs = &inst.base_values[a][r] - &inst.base_values[a][matched];
                constraints.push(Constraint { coeffs, relation: Relation::Ge, rhs });
            }
        }
    }
    LinearProgram {
        objective: vec![rat(1); n],
        constraints,
        nonneg: vec![true; n],
    }
}

/// Runs the full pipeline: matchings, pricing LP, minimum-total-rent prices.
pub fn solve_secretive_rent(inst: &RentInstance) -> Result<RentSolution, RentError> {
    let bijections = compute_room_removal_matchings(inst);
    let lp = build_envy_lp(inst, &bijections);
    let sol = solve_min(&lp).map_err(RentError::Pricing)?;
    Ok(RentSolution {
        prices: PriceVector { prices: sol.x },
        bijections,
        total_rent: sol.objective,
    })
}

/// Finds the smallest-index room that is weakly despised by every agent
/// under every matching in the family: `B[a][pi_k(a)] >= B[a][rho]` for all
/// `a` and `k`. Such a room always exists for matchings produced by
/// [`compute_room_removal_matchings`].
pub fn find_despised_room(inst: &RentInstance, family: &BijectionFamily) -> Result<usize, RentError> {
    let n = inst.n;
    'rooms: for rho in 0..n {
        for (a, row) in inst.base_values.iter().enumerate() {
            for pi_k in &family.pi {
                if row[pi_k[a]] < row[rho] {
                    continue 'rooms;
                }
            }
        }
        return Ok(rho);
    }
    Err(RentError::NoDespisedRoom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: Vec<Vec<i64>>) -> RentInstance {
        RentInstance::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(rat).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_agents_worked_example() {
        // One known agent valuing the rooms at 10 and 0.
        let i = inst(vec![vec![10, 0]]);
        let fam = compute_room_removal_matchings(&i);
        assert_eq!(fam.pi[0], vec![1]);
        assert_eq!(fam.pi[1], vec![0]);

        let sol = solve_secretive_rent(&i).unwrap();
        assert_eq!(sol.prices.prices, vec![rat(10), rat(0)]);
        assert_eq!(sol.total_rent, rat(10));

        // Room 1 is the one the agent never prefers to a matched room.
        assert_eq!(find_despised_room(&i, &fam).unwrap(), 1);
    }

    #[test]
    fn prices_make_every_matched_room_a_favorite() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(2..=5);
            let i = inst(
                (0..n - 1)
                    .map(|_| (0..n).map(|_| rng.gen_range(0..=100)).collect())
                    .collect(),
            );
            let sol = solve_secretive_rent(&i).unwrap();
            let p = &sol.prices.prices;
            for price in p {
                assert!(*price >= rat(0));
            }
            for a in 0..n - 1 {
                for k in 0..n {
                    let matched = sol.bijections.pi[k][a];
                    let own = &i.base_values[a][matched] - &p[matched];
                    for r in 0..n {
                        let other = &i.base_values[a][r] - &p[r];
                        assert!(own >= other, "agent {a} envies room {r} when absent takes {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn negative_base_values_are_legal() {
        let i = inst(vec![vec![-5, 3, 0], vec![2, -1, 4]]);
        let sol = solve_secretive_rent(&i).unwrap();
        assert_eq!(sol.prices.prices.len(), 3);
        let fam = compute_room_removal_matchings(&i);
        find_despised_room(&i, &fam).unwrap();
    }

    #[test]
    fn despised_room_exists_across_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(2..=5);
            let i = inst(
                (0..n - 1)
                    .map(|_| (0..n).map(|_| rng.gen_range(-20..=20)).collect())
                    .collect(),
            );
            let fam = compute_room_removal_matchings(&i);
            find_despised_room(&i, &fam).unwrap();
        }
    }
}
