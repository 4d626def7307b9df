//! Shared problem and solution types.
//!
//! Conventions used across the crate: an instance has `n >= 2` agents, the
//! last agent (index `n-1`) is the absent one and contributes no data, so
//! instances carry `n-1` rows. Bundles, rooms, and goods are 0-based. A
//! "secretive" solution is a partition into `n` parts plus one bijection per
//! possible choice `k` of the absent agent, mapping the `n-1` known agents
//! onto the parts other than `k`.

use crate::oracle::{full_set, set_len, GoodSet, OracleError, ValuationOracle, MAX_GOODS};
use crate::rat::Rat;
use num::traits::Zero;
use rand::{Rng, SeedableRng};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("need at least 2 agents, got {got}")]
    TooFewAgents { got: usize },
    #[error("expected {expected} agent rows (one per known agent), got {got}")]
    BadAgentRows { expected: usize, got: usize },
    #[error("agent {agent} row has {got} entries, expected {expected}")]
    BadRowLength { agent: usize, got: usize, expected: usize },
    #[error("agent {agent}: {source}")]
    BadOracle { agent: usize, source: OracleError },
    #[error("instance has {got} goods, more than the supported {max}")]
    TooManyGoods { got: usize, max: usize },
}

/// Rent-division instance: `base_values[a][r]` is known agent `a`'s value for
/// room `r`. Values may be negative; rows are `n-1` by `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RentInstance {
    pub n: usize,
    pub base_values: Vec<Vec<Rat>>,
}

impl RentInstance {
    pub fn new(base_values: Vec<Vec<Rat>>) -> Result<Self, InstanceError> {
        let n = base_values.len() + 1;
        if n < 2 {
            return Err(InstanceError::TooFewAgents { got: n });
        }
        for (agent, row) in base_values.iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::BadRowLength { agent, got: row.len(), expected: n });
            }
        }
        Ok(RentInstance { n, base_values })
    }
}

/// Indivisible-goods instance: one valuation oracle per known agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodsInstance {
    pub n: usize,
    pub m: usize,
    pub valuations: Vec<ValuationOracle>,
}

/// Exhaustive-validation threshold: oracles over at most this many goods are
/// checked on every subset, larger ones by deterministic sampling.
const EXHAUSTIVE_CHECK_GOODS: usize = 12;

impl GoodsInstance {
    /// Builds and validates an instance with `n` agents (so `valuations` must
    /// have `n-1` entries) over `m` goods. Each oracle is checked for shape,
    /// nonnegativity, and monotonicity: exhaustively when `m` is small,
    /// otherwise on a deterministic sample of subset pairs.
    pub fn new(n: usize, m: usize, valuations: Vec<ValuationOracle>) -> Result<Self, InstanceError> {
        if n < 2 {
            return Err(InstanceError::TooFewAgents { got: n });
        }
        if m > MAX_GOODS {
            return Err(InstanceError::TooManyGoods { got: m, max: MAX_GOODS });
        }
        if valuations.len() != n - 1 {
            return Err(InstanceError::BadAgentRows { expected: n - 1, got: valuations.len() });
        }
        for (agent, oracle) in valuations.iter().enumerate() {
            let wrap = |source| InstanceError::BadOracle { agent, source };
            oracle.validate(m).map_err(wrap)?;
            if m <= EXHAUSTIVE_CHECK_GOODS {
                crate::oracle::check_monotone_nonnegative(oracle, m).map_err(wrap)?;
            } else {
                sample_monotone_nonnegative(oracle, m).map_err(wrap)?;
            }
        }
        Ok(GoodsInstance { n, m, valuations })
    }

    pub fn eval(&self, agent: usize, set: GoodSet) -> Rat {
        crate::oracle::oracle_eval(&self.valuations[agent], set)
    }
}

/// Spot-checks nonnegativity and one-good monotonicity on pseudo-random
/// subsets; the seed is fixed so validation is reproducible.
fn sample_monotone_nonnegative(oracle: &ValuationOracle, m: usize) -> Result<(), OracleError> {
    use crate::oracle::{oracle_eval, set_iter, set_remove};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6f7261636c65);
    let mask = full_set(m);
    if !oracle_eval(oracle, 0).is_zero() {
        return Err(OracleError::NonzeroEmptySet);
    }
    for _ in 0..256 {
        let set = (rng.gen::<u128>() & mask) as GoodSet;
        let v = oracle_eval(oracle, set);
        if v < Rat::zero() {
            return Err(OracleError::NegativeValue { set });
        }
        for g in set_iter(set) {
            if oracle_eval(oracle, set_remove(set, g)) > v {
                return Err(OracleError::NotMonotone { set, good: g });
            }
        }
    }
    Ok(())
}

/// Partition of the goods into `n` ordered bundles (empty bundles are legal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub bundles: Vec<GoodSet>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition has {got} bundles, expected {expected}")]
    BadBundleCount { got: usize, expected: usize },
    #[error("bundles {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("bundles cover {got} goods, expected all {expected}")]
    Incomplete { got: usize, expected: usize },
}

impl Partition {
    /// Validates disjointness and that the bundles cover exactly goods `0..m`.
    pub fn new(n: usize, m: usize, bundles: Vec<GoodSet>) -> Result<Self, PartitionError> {
        if bundles.len() != n {
            return Err(PartitionError::BadBundleCount { got: bundles.len(), expected: n });
        }
        let mut seen: GoodSet = 0;
        for (i, b) in bundles.iter().enumerate() {
            if seen & b != 0 {
                let overlap = seen & b;
                let first = bundles
                    .iter()
                    .position(|earlier| earlier & overlap != 0)
                    .unwrap_or(0);
                return Err(PartitionError::Overlap { first, second: i });
            }
            seen |= b;
        }
        if seen != full_set(m) {
            return Err(PartitionError::Incomplete { got: set_len(seen), expected: m });
        }
        Ok(Partition { bundles })
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }
}

/// Per-agent backup pointer `sigma` with `sigma[a] > a`: if the absent agent
/// takes agent `a`'s own part, `a` can fall back to part `sigma[a]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackupMap {
    pub sigma: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackupError {
    #[error("backup pointer of agent {agent} is {target}, must lie in {agent}+1..{n}")]
    NotForward { agent: usize, target: usize, n: usize },
}

impl BackupMap {
    /// `sigma` has one entry per known agent; entry `a` must point strictly
    /// forward to a part index in `a+1..n`.
    pub fn new(sigma: Vec<usize>, n: usize) -> Result<Self, BackupError> {
        for (agent, &target) in sigma.iter().enumerate() {
            if target <= agent || target >= n {
                return Err(BackupError::NotForward { agent, target, n });
            }
        }
        Ok(BackupMap { sigma })
    }
}

/// One bijection per choice `k` of the absent agent: `pi[k][a]` is the part
/// assigned to known agent `a` when the absent agent takes part `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BijectionFamily {
    pub pi: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BijectionError {
    #[error("family has {got} bijections, expected {expected}")]
    BadCount { got: usize, expected: usize },
    #[error("bijection for choice {k} maps {got} agents, expected {expected}")]
    BadLength { k: usize, got: usize, expected: usize },
    #[error("bijection for choice {k} assigns part {part} to agent {agent}, which is out of range or taken")]
    NotInjective { k: usize, agent: usize, part: usize },
}

impl BijectionFamily {
    /// Validates that for every `k`, the map sends the `n-1` known agents
    /// injectively onto parts other than `k`.
    pub fn new(pi: Vec<Vec<usize>>) -> Result<Self, BijectionError> {
        let n = pi.len();
        for (k, map) in pi.iter().enumerate() {
            if map.len() != n - 1 {
                return Err(BijectionError::BadLength { k, got: map.len(), expected: n - 1 });
            }
            let mut used = vec![false; n];
            for (agent, &part) in map.iter().enumerate() {
                if part >= n || part == k || used[part] {
                    return Err(BijectionError::NotInjective { k, agent, part });
                }
                used[part] = true;
            }
        }
        Ok(BijectionFamily { pi })
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }
}

/// Room prices; the rent solver returns nonnegative prices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceVector {
    pub prices: Vec<Rat>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn rent_instance_shape() {
        let inst = RentInstance::new(vec![vec![rat(10), rat(0)]]).unwrap();
        assert_eq!(inst.n, 2);
        assert!(RentInstance::new(vec![]).is_err());
        assert!(RentInstance::new(vec![vec![rat(1)]]).is_err());
    }

    #[test]
    fn goods_instance_checks_oracles() {
        let ok = GoodsInstance::new(
            2,
            2,
            vec![ValuationOracle::Additive { weights: vec![rat(1), rat(2)] }],
        );
        assert!(ok.is_ok());

        let bad = GoodsInstance::new(
            2,
            2,
            vec![ValuationOracle::Table { values: vec![rat(0), rat(3), rat(1), rat(1)] }],
        );
        assert!(matches!(bad, Err(InstanceError::BadOracle { .. })));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(2, 3, vec![0b101, 0b010]).is_ok());
        assert!(matches!(
            Partition::new(2, 3, vec![0b101, 0b110]),
            Err(PartitionError::Overlap { .. })
        ));
        assert!(matches!(
            Partition::new(2, 3, vec![0b100, 0b010]),
            Err(PartitionError::Incomplete { .. })
        ));
    }

    #[test]
    fn bijection_family_validation() {
        // n = 2: choice 0 sends the agent to part 1 and vice versa.
        assert!(BijectionFamily::new(vec![vec![1], vec![0]]).is_ok());
        assert!(BijectionFamily::new(vec![vec![0], vec![0]]).is_err());
        // Duplicate target.
        assert!(BijectionFamily::new(vec![vec![1, 1, 2], vec![0, 2, 2], vec![0, 1, 1]]).is_err());
    }

    #[test]
    fn backup_map_must_point_forward() {
        assert!(BackupMap::new(vec![2, 2], 3).is_ok());
        assert!(BackupMap::new(vec![0, 2], 3).is_err());
        assert!(BackupMap::new(vec![2, 3], 3).is_err());
    }
}
