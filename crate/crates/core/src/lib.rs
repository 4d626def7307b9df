//! Fair division that survives one absent agent.
//!
//! Solvers in this crate produce solutions for `n` agents using data from
//! only `n - 1` of them: the last agent's preferences are unknown, yet
//! whichever part that agent later picks, the remaining parts can be
//! reassigned to the known agents without losing the fairness guarantee.
//! Each solver therefore returns a partition together with one bijection per
//! possible choice of the absent agent (usually compressed into a backup map
//! `sigma`, see [`backup::backup_to_bijections`]).
//!
//! Problem settings:
//! - [`rent`]: rooms and rent under quasilinear utilities (envy-free prices).
//! - [`ef1`]: indivisible goods, envy-free up to one good.
//! - [`cake`]: a divisible interval queried through evaluate/cut oracles,
//!   with exact proportional and epsilon-envy-free solvers.
//! - [`mms`]: indivisible goods with maximin-share guarantees (1/19 for
//!   submodular valuations, 1/2 for additive ones).
//!
//! [`verify`] re-checks any claimed solution from scratch through a fairness
//! graph and bipartite matchings, independently of the solver paths. All
//! arithmetic is exact ([`rat::Rat`]); nothing here rounds.

pub mod backup;
pub mod cake;
pub mod ef1;
pub mod instance;
pub mod lp;
pub mod matching;
pub mod mms;
pub mod oracle;
pub mod rat;
pub mod rent;
pub mod selftest;
pub mod verify;

pub use backup::backup_to_bijections;
pub use instance::{
    BackupMap, BijectionFamily, GoodsInstance, InstanceError, Partition, PriceVector, RentInstance,
};
pub use oracle::{oracle_eval, GoodSet, ValuationOracle};
pub use rat::{parse_rat, rat, ratq, Rat};
