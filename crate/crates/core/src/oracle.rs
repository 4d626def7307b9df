//! Valuation oracles over indivisible goods.
//!
//! Goods are indices `0..m` and subsets are `u128` bitmasks ([`GoodSet`]),
//! which caps instances at [`MAX_GOODS`] goods. Every oracle kind evaluates
//! subsets exactly; solvers only ever see valuations through [`oracle_eval`].

use crate::rat::{rat, Rat};
use num::traits::Zero;
use thiserror::Error;

/// Subset of goods as a bitmask; bit `g` set means good `g` is in the set.
pub type GoodSet = u128;

/// Hard cap on goods per instance, fixed by the `GoodSet` representation.
pub const MAX_GOODS: usize = 128;

/// Explicit tables are bounded separately: a table stores `2^m` entries.
pub const MAX_TABLE_GOODS: usize = 20;

pub fn empty_set() -> GoodSet {
    0
}

pub fn full_set(m: usize) -> GoodSet {
    assert!(m <= MAX_GOODS);
    if m == MAX_GOODS {
        !0
    } else {
        (1u128 << m) - 1
    }
}

pub fn singleton(g: usize) -> GoodSet {
    1u128 << g
}

pub fn set_contains(set: GoodSet, g: usize) -> bool {
    set & singleton(g) != 0
}

pub fn set_insert(set: GoodSet, g: usize) -> GoodSet {
    set | singleton(g)
}

pub fn set_remove(set: GoodSet, g: usize) -> GoodSet {
    set & !singleton(g)
}

pub fn set_len(set: GoodSet) -> usize {
    set.count_ones() as usize
}

/// Iterates the members of `set` in ascending order.
pub fn set_iter(set: GoodSet) -> impl Iterator<Item = usize> {
    let mut rest = set;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let g = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(g)
        }
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {got} goods, more than the supported {max}")]
    TooManyGoods { got: usize, max: usize },
    #[error("explicit table has {got} entries, expected 2^{goods}")]
    BadTableSize { got: usize, goods: usize },
    #[error("additive oracle has {got} weights, expected {expected}")]
    BadWeightCount { got: usize, expected: usize },
    #[error("coverage oracle covers unknown universe element {element}")]
    BadCoverElement { element: usize },
    #[error("surrogate special good {special} is out of range for {goods} goods")]
    BadSpecialGood { special: usize, goods: usize },
    #[error("surrogate cap must be positive")]
    NonPositiveCap,
    #[error("oracle takes a negative value on {set:#x}")]
    NegativeValue { set: GoodSet },
    #[error("oracle value of the empty set is nonzero")]
    NonzeroEmptySet,
    #[error("oracle is not monotone: dropping good {good} from {set:#x} raises the value")]
    NotMonotone { set: GoodSet, good: usize },
}

/// A set valuation, evaluated exactly.
///
/// `Additive` and `Coverage` are submodular by construction; `Table` holds
/// arbitrary normalized monotone data; `Surrogate` caps the marginal of one
/// special good of its base oracle (used by the maximin-share pipeline, which
/// needs the capped version to stay monotone and submodular).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuationOracle {
    Additive { weights: Vec<Rat> },
    Table { values: Vec<Rat> },
    Coverage { element_weights: Vec<Rat>, covers: Vec<Vec<usize>> },
    Surrogate { base: Box<ValuationOracle>, special: usize, cap: Rat },
}

impl ValuationOracle {
    /// Number of goods the oracle is defined over.
    pub fn num_goods(&self) -> usize {
        match self {
            ValuationOracle::Additive { weights } => weights.len(),
            ValuationOracle::Table { values } => {
                debug_assert!(values.len().is_power_of_two());
                values.len().trailing_zeros() as usize
            }
            ValuationOracle::Coverage { covers, .. } => covers.len(),
            ValuationOracle::Surrogate { base, .. } => base.num_goods(),
        }
    }

    /// Structural checks against an expected good count: shapes, ranges,
    /// nonnegative weights, table normalization (`v(empty) = 0`) and table
    /// monotonicity. Exhaustive for tables (their data is explicit anyway);
    /// `Additive` and `Coverage` are monotone by construction.
    pub fn validate(&self, m: usize) -> Result<(), OracleError> {
        if m > MAX_GOODS {
            return Err(OracleError::TooManyGoods { got: m, max: MAX_GOODS });
        }
        match self {
            ValuationOracle::Additive { weights } => {
                if weights.len() != m {
                    return Err(OracleError::BadWeightCount { got: weights.len(), expected: m });
                }
                for (g, w) in weights.iter().enumerate() {
                    if w < &Rat::zero() {
                        return Err(OracleError::NegativeValue { set: singleton(g) });
                    }
                }
            }
            ValuationOracle::Table { values } => {
                if m > MAX_TABLE_GOODS {
                    return Err(OracleError::TooManyGoods { got: m, max: MAX_TABLE_GOODS });
                }
                if values.len() != 1usize << m {
                    return Err(OracleError::BadTableSize { got: values.len(), goods: m });
                }
                if !values[0].is_zero() {
                    return Err(OracleError::NonzeroEmptySet);
                }
                for (set, v) in values.iter().enumerate() {
                    if v < &Rat::zero() {
                        return Err(OracleError::NegativeValue { set: set as GoodSet });
                    }
                    for g in 0..m {
                        if set & (1 << g) != 0 && values[set ^ (1 << g)] > *v {
                            return Err(OracleError::NotMonotone { set: set as GoodSet, good: g });
                        }
                    }
                }
            }
            ValuationOracle::Coverage { element_weights, covers } => {
                if covers.len() != m {
                    return Err(OracleError::BadWeightCount { got: covers.len(), expected: m });
                }
                for (e, w) in element_weights.iter().enumerate() {
                    if w < &Rat::zero() {
                        return Err(OracleError::NegativeValue { set: singleton(e.min(MAX_GOODS - 1)) });
                    }
                }
                for cover in covers {
                    for &e in cover {
                        if e >= element_weights.len() {
                            return Err(OracleError::BadCoverElement { element: e });
                        }
                    }
                }
            }
            ValuationOracle::Surrogate { base, special, cap } => {
                base.validate(m)?;
                if *special >= m {
                    return Err(OracleError::BadSpecialGood { special: *special, goods: m });
                }
                if cap <= &Rat::zero() {
                    return Err(OracleError::NonPositiveCap);
                }
            }
        }
        Ok(())
    }
}

/// Evaluates `oracle` on a subset of goods.
///
/// The surrogate caps the marginal its special good adds on top of the rest
/// of the set: for `ghat` in `S` it returns
/// `v(S \ ghat) + min(cap, v(S) - v(S \ ghat))`, i.e.
/// `min(v(S), v(S \ ghat) + cap)`; other sets evaluate through unchanged.
pub fn oracle_eval(oracle: &ValuationOracle, set: GoodSet) -> Rat {
    match oracle {
        ValuationOracle::Additive { weights } => {
            let mut total = Rat::zero();
            for g in set_iter(set) {
                total += &weights[g];
            }
            total
        }
        ValuationOracle::Table { values } => values[set as usize].clone(),
        ValuationOracle::Coverage { element_weights, covers } => {
            let mut covered = vec![false; element_weights.len()];
            for g in set_iter(set) {
                for &e in &covers[g] {
                    covered[e] = true;
                }
            }
            let mut total = Rat::zero();
            for (e, hit) in covered.iter().enumerate() {
                if *hit {
                    total += &element_weights[e];
                }
            }
            total
        }
        ValuationOracle::Surrogate { base, special, cap } => {
            if !set_contains(set, *special) {
                return oracle_eval(base, set);
            }
            let with = oracle_eval(base, set);
            let without = oracle_eval(base, set_remove(set, *special));
            let capped = &without + cap;
            if with <= capped {
                with
            } else {
                capped
            }
        }
    }
}

/// Exhaustively checks nonnegativity and monotonicity over all `2^m` subsets.
/// Cost is `O(2^m * m)` evaluations; callers gate on small `m`.
pub fn check_monotone_nonnegative(oracle: &ValuationOracle, m: usize) -> Result<(), OracleError> {
    if !oracle_eval(oracle, empty_set()).is_zero() {
        return Err(OracleError::NonzeroEmptySet);
    }
    for set in 0..(1u128 << m) {
        let v = oracle_eval(oracle, set);
        if v < rat(0) {
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

/// Exhaustively checks submodularity: for every pair of subsets `A`, `B`,
/// `v(A) + v(B) >= v(A | B) + v(A & B)`. Cost is `O(4^m)` evaluations;
/// callers gate on small `m`. Returns a violating pair when one exists.
pub fn check_submodular(oracle: &ValuationOracle, m: usize) -> Result<(), (GoodSet, GoodSet)> {
    let table: Vec<Rat> = (0..(1u128 << m)).map(|s| oracle_eval(oracle, s)).collect();
    for a in 0..(1usize << m) {
        for b in 0..a {
            let lhs = &table[a] + &table[b];
            let rhs = &table[a | b] + &table[a & b];
            if lhs < rhs {
                return Err((a as GoodSet, b as GoodSet));
            }
        }
    }
    Ok(())
}
