//! Secretive EF1 allocation of indivisible goods.
//!
//! Goods are inserted one at a time. After each insertion the partial
//! partition carries, for every bundle `k` the absent agent might take, a
//! max-weight perfect matching of the known agents onto the other bundles
//! in which every matched edge satisfies EF1. The insertion target is a
//! bundle that every agent weakly dis-prefers to its matched bundle under
//! all those matchings, which keeps the matchings EF1 after the bundle
//! grows. Non-EF1 edges carry a penalty weight low enough that a max-weight
//! matching never uses one when an all-EF1 matching exists.

use std::collections::HashMap;

use crate::backup::backup_to_bijections;
use crate::instance::{BackupMap, BijectionFamily, GoodsInstance, Partition};
use crate::matching::max_weight_perfect_matching;
use crate::oracle::{empty_set, set_insert, set_iter, set_remove, GoodSet};
use crate::rat::{rat, Rat};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Ef1Error {
    /// A max-weight matching used a non-EF1 edge; impossible when an
    /// all-EF1 perfect matching exists, so this signals a broken invariant.
    #[error("matching for choice {k} at iteration {iteration} uses a non-EF1 edge")]
    NonEf1Matching { iteration: usize, k: usize },
    /// No bundle is weakly despised by every agent under every matching;
    /// impossible for max-weight all-EF1 families.
    #[error("no universally despised bundle")]
    NoDespisedBundle,
}

/// Bipartite graph over the current partial allocation: one row per known
/// agent, one column per bundle. EF1 edges weigh the agent's bundle value;
/// the rest get a penalty that no all-EF1 matching can be beaten by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ef1Graph {
    pub weights: Vec<Vec<Rat>>,
    pub ef1_flags: Vec<Vec<bool>>,
}

/// Final partition plus one all-EF1 matching per choice of the absent agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ef1Solution {
    pub partition: Partition,
    pub bijections: BijectionFamily,
}

/// Memoized bundle values keyed by (agent, bundle bitmask). Bundles only
/// grow, so entries stay valid for the whole run.
struct BundleCache {
    values: HashMap<(usize, GoodSet), Rat>,
}

impl BundleCache {
    fn new() -> Self {
        BundleCache { values: HashMap::new() }
    }

    fn eval(&mut self, inst: &GoodsInstance, agent: usize, set: GoodSet) -> Rat {
        if let Some(v) = self.values.get(&(agent, set)) {
            return v.clone();
        }
        let v = inst.eval(agent, set);
        self.values.insert((agent, set), v.clone());
        v
    }
}

/// EF1 test for agent `a` holding bundle `i`: toward every other nonempty
/// bundle there is one good whose removal kills the envy. Empty bundles are
/// never envied.
fn ef1_edge_masks(
    inst: &GoodsInstance,
    cache: &mut BundleCache,
    a: usize,
    i: usize,
    bundles: &[GoodSet],
) -> bool {
    let own = cache.eval(inst, a, bundles[i]);
    for (j, &other) in bundles.iter().enumerate() {
        if j == i || other == empty_set() {
            continue;
        }
        let fine = set_iter(other)
            .any(|g| own >= cache.eval(inst, a, set_remove(other, g)));
        if !fine {
            return false;
        }
    }
    true
}

/// Public EF1 edge test over a complete partition.
pub fn is_ef1_edge(a: usize, i: usize, p: &Partition, inst: &GoodsInstance) -> bool {
    let mut cache = BundleCache::new();
    ef1_edge_masks(inst, &mut cache, a, i, &p.bundles)
}

fn build_graph(
    inst: &GoodsInstance,
    cache: &mut BundleCache,
    bundles: &[GoodSet],
    penalty: &Rat,
) -> Ef1Graph {
    let n = inst.n;
    let mut weights = Vec::with_capacity(n - 1);
    let mut ef1_flags = Vec::with_capacity(n - 1);
    for a in 0..n - 1 {
        let mut wrow = Vec::with_capacity(n);
        let mut frow = Vec::with_capacity(n);
        for i in 0..n {
            let flag = ef1_edge_masks(inst, cache, a, i, bundles);
            wrow.push(if flag { cache.eval(inst, a, bundles[i]) } else { penalty.clone() });
            frow.push(flag);
        }
        weights.push(wrow);
        ef1_flags.push(frow);
    }
    Ef1Graph { weights, ef1_flags }
}

/// One max-weight perfect matching per deleted column `k`, with every
/// matched edge required to be EF1.
fn matchings_for_graph(graph: &Ef1Graph, iteration: usize) -> Result<BijectionFamily, Ef1Error> {
    let n = graph.weights[0].len();
    let mut pi = Vec::with_capacity(n);
    for k in 0..n {
        let cols: Vec<usize> = (0..n).filter(|&i| i != k).collect();
        let sub: Vec<Vec<Rat>> = graph
            .weights
            .iter()
            .map(|row| cols.iter().map(|&i| row[i].clone()).collect())
            .collect();
        let assignment = max_weight_perfect_matching(&sub);
        let mapped: Vec<usize> = assignment.into_iter().map(|c| cols[c]).collect();
        for (a, &i) in mapped.iter().enumerate() {
            if !graph.ef1_flags[a][i] {
                return Err(Ef1Error::NonEf1Matching { iteration, k });
            }
        }
        pi.push(mapped);
    }
    Ok(BijectionFamily { pi })
}

fn despised_bundle_masks(
    inst: &GoodsInstance,
    cache: &mut BundleCache,
    bundles: &[GoodSet],
    family: &BijectionFamily,
) -> Result<usize, Ef1Error> {
    let n = bundles.len();
    'candidates: for rho in 0..n {
        for a in 0..n - 1 {
            let toward = cache.eval(inst, a, bundles[rho]);
            for pi_k in &family.pi {
                if cache.eval(inst, a, bundles[pi_k[a]]) < toward {
                    continue 'candidates;
                }
            }
        }
        return Ok(rho);
    }
    Err(Ef1Error::NoDespisedBundle)
}

/// Smallest-index bundle that every agent weakly dis-prefers to its matched
/// bundle under every matching in the family.
pub fn find_despised_bundle(
    p: &Partition,
    inst: &GoodsInstance,
    family: &BijectionFamily,
) -> Result<usize, Ef1Error> {
    let mut cache = BundleCache::new();
    despised_bundle_masks(inst, &mut cache, &p.bundles, family)
}

/// Runs the insertion loop over all goods in ascending index order and
/// returns the final partition with the final round's matchings, which stay
/// EF1 because the last good lands in a universally despised bundle.
pub fn allocate_secretive_ef1(inst: &GoodsInstance) -> Result<Ef1Solution, Ef1Error> {
    let n = inst.n;
    let m = inst.m;
    let mut cache = BundleCache::new();

    if m == 0 {
        // Nothing to allocate: all bundles are empty and any bijection
        // family is EF1. Use the one induced by the next-agent backup map.
        let sigma = BackupMap::new((1..n).collect(), n).expect("valid backup map");
        let partition = Partition::new(n, 0, vec![empty_set(); n]).expect("empty partition");
        return Ok(Ef1Solution {
            partition,
            bijections: backup_to_bijections(&sigma, n),
        });
    }

    // Any matching with a penalty edge scores below every all-EF1 matching:
    // at most m-1 goods are placed when a matching is computed, so at most
    // m-1 bundles are nonempty and the EF1 edges in a matching sum to at
    // most (m-1) * max, while the penalty alone is -m * max.
    let max_value = (0..n - 1)
        .map(|a| cache.eval(inst, a, crate::oracle::full_set(m)))
        .max()
        .expect("at least one agent");
    let penalty = -rat(m as i64) * &max_value;

    let mut bundles = vec![empty_set(); n];
    let mut family = None;
    for good in 0..m {
        let graph = build_graph(inst, &mut cache, &bundles, &penalty);
        let round = matchings_for_graph(&graph, good)?;
        let rho = despised_bundle_masks(inst, &mut cache, &bundles, &round)?;
        bundles[rho] = set_insert(bundles[rho], good);
        family = Some(round);
    }

    let partition = Partition::new(n, m, bundles).expect("loop places every good once");
    let bijections = family.expect("m >= 1 ran at least one round");
    debug_assert!((0..n).all(|k| {
        (0..n - 1).all(|a| is_ef1_edge(a, bijections.pi[k][a], &partition, inst))
    }));
    Ok(Ef1Solution { partition, bijections })
}
