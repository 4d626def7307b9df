//! Cake cutting with exact piecewise-constant valuations.
//!
//! The cake is the interval [0,1]. Each known agent's valuation is a
//! nonnegative piecewise-constant density integrating to exactly 1, so
//! every Robertson-Webb query (Eval and Cut) has an exact rational answer.
//! Two solvers live here: a Dubins-Spanier moving knife that produces a
//! secretive proportional contiguous partition, and a sweep that chops the
//! cake into pieces worth at most ε to everyone and hands them to the EF1
//! allocator, yielding a secretive ε-envy-free division.

use crate::backup::backup_to_bijections;
use crate::ef1::{allocate_secretive_ef1, Ef1Error};
use crate::instance::{BackupMap, BijectionFamily, GoodsInstance};
use crate::oracle::{set_iter, ValuationOracle, MAX_GOODS};
use crate::rat::{rat, ratq, Rat};
use num::traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CakeError {
    #[error("expected {densities} densities for {breakpoints} breakpoints")]
    BadShape { breakpoints: usize, densities: usize },
    #[error("breakpoints must strictly increase from 0 to 1")]
    BadBreakpoints,
    #[error("density {index} is negative")]
    NegativeDensity { index: usize },
    #[error("total value is {got}, expected exactly 1")]
    BadTotal { got: Rat },
    #[error("need at least 2 agents, got {got}")]
    TooFewAgents { got: usize },
    #[error("expected {expected} known-agent valuations, got {got}")]
    BadAgentRows { expected: usize, got: usize },
    #[error("query interval must satisfy 0 <= x1 <= x2 <= 1")]
    OutOfRange,
    #[error("lambda must lie in (0, 1]")]
    InvalidLambda,
    #[error("epsilon must lie in (0, 1]")]
    InvalidEpsilon,
    #[error("sweep produced more than {max} pieces")]
    TooManyPieces { max: usize },
    #[error("partition has {got} bundles, expected {expected}")]
    BadBundleCount { got: usize, expected: usize },
    #[error("interval endpoints must satisfy 0 <= lo <= hi <= 1")]
    BadInterval,
    #[error("intervals overlap on positive measure")]
    OverlappingIntervals,
    #[error("intervals cover total measure {got}, expected exactly 1")]
    BadCoverage { got: Rat },
    #[error("piece allocation failed: {0}")]
    PieceAllocation(Ef1Error),
}

/// Piecewise-constant density over [0,1]: `densities[i]` holds on
/// `[breakpoints[i], breakpoints[i+1]]`, and the total integral is exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CakeValuation {
    breakpoints: Vec<Rat>,
    densities: Vec<Rat>,
}

impl CakeValuation {
    pub fn new(breakpoints: Vec<Rat>, densities: Vec<Rat>) -> Result<Self, CakeError> {
        if breakpoints.len() != densities.len() + 1 {
            return Err(CakeError::BadShape {
                breakpoints: breakpoints.len(),
                densities: densities.len(),
            });
        }
        if breakpoints.first() != Some(&rat(0)) || breakpoints.last() != Some(&rat(1)) {
            return Err(CakeError::BadBreakpoints);
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CakeError::BadBreakpoints);
        }
        if let Some(index) = densities.iter().position(|d| d < &rat(0)) {
            return Err(CakeError::NegativeDensity { index });
        }
        let v = CakeValuation { breakpoints, densities };
        let total = integral(&v, &rat(0), &rat(1));
        if total != rat(1) {
            return Err(CakeError::BadTotal { got: total });
        }
        Ok(v)
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Rat] {
        &self.densities
    }
}

/// Cake instance with one secretive agent: `n` agents total, valuations for
/// the `n-1` known ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CakeInstance {
    pub n: usize,
    valuations: Vec<CakeValuation>,
}

impl CakeInstance {
    pub fn new(n: usize, valuations: Vec<CakeValuation>) -> Result<Self, CakeError> {
        if n < 2 {
            return Err(CakeError::TooFewAgents { got: n });
        }
        if valuations.len() != n - 1 {
            return Err(CakeError::BadAgentRows { expected: n - 1, got: valuations.len() });
        }
        Ok(CakeInstance { n, valuations })
    }

    pub fn valuation(&self, agent: usize) -> &CakeValuation {
        &self.valuations[agent]
    }
}

/// Closed subinterval of the cake.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

/// Bundles of interior-disjoint intervals covering [0,1] up to measure zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CakePartition {
    pub bundles: Vec<Vec<Interval>>,
}

impl CakePartition {
    /// Validates endpoint ranges, pairwise interior-disjointness, and that
    /// the total measure is exactly 1 (which, inside [0,1], means the
    /// bundles cover the whole cake up to measure zero).
    pub fn new(n: usize, bundles: Vec<Vec<Interval>>) -> Result<Self, CakeError> {
        if bundles.len() != n {
            return Err(CakeError::BadBundleCount { got: bundles.len(), expected: n });
        }
        let mut spans: Vec<&Interval> = Vec::new();
        for bundle in &bundles {
            for iv in bundle {
                if iv.lo < rat(0) || iv.lo > iv.hi || iv.hi > rat(1) {
                    return Err(CakeError::BadInterval);
                }
                if iv.lo < iv.hi {
                    spans.push(iv);
                }
            }
        }
        spans.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut total = rat(0);
        for pair in spans.windows(2) {
            if pair[0].hi > pair[1].lo {
                return Err(CakeError::OverlappingIntervals);
            }
        }
        for iv in &spans {
            total += &iv.hi - &iv.lo;
        }
        if total != rat(1) {
            return Err(CakeError::BadCoverage { got: total });
        }
        Ok(CakePartition { bundles })
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }
}

fn check_interval(x1: &Rat, x2: &Rat) -> Result<(), CakeError> {
    if *x1 < rat(0) || x1 > x2 || *x2 > rat(1) {
        return Err(CakeError::OutOfRange);
    }
    Ok(())
}

/// Exact integral of the density over [x1, x2]; assumes a valid range.
fn integral(v: &CakeValuation, x1: &Rat, x2: &Rat) -> Rat {
    let mut total = rat(0);
    for (seg, d) in v.densities.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let l = (&v.breakpoints[seg]).max(x1);
        let r = (&v.breakpoints[seg + 1]).min(x2);
        if l < r {
            total += d * (r - l);
        }
    }
    total
}

/// Robertson-Webb Eval: the agent's exact value of [x1, x2].
pub fn eval_query(v: &CakeValuation, x1: &Rat, x2: &Rat) -> Result<Rat, CakeError> {
    check_interval(x1, x2)?;
    Ok(integral(v, x1, x2))
}

/// Robertson-Webb Cut: the smallest x in [x1, x2] with
/// v([x1, x]) = lambda * v([x1, x2]). A zero-value interval yields x1.
pub fn cut_query(v: &CakeValuation, x1: &Rat, x2: &Rat, lambda: &Rat) -> Result<Rat, CakeError> {
    check_interval(x1, x2)?;
    if *lambda <= rat(0) || *lambda > rat(1) {
        return Err(CakeError::InvalidLambda);
    }
    let total = integral(v, x1, x2);
    if total.is_zero() {
        return Ok(x1.clone());
    }
    let target = lambda * &total;
    let mut acc = rat(0);
    for (seg, d) in v.densities.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let l = (&v.breakpoints[seg]).max(x1).clone();
        let r = (&v.breakpoints[seg + 1]).min(x2).clone();
        if l >= r {
            continue;
        }
        let mass = d * (&r - &l);
        if &acc + &mass >= target {
            // The cumulative value reaches the target inside this segment;
            // constant density makes the crossing point linear.
            return Ok(&l + (&target - &acc) / d);
        }
        acc += mass;
    }
    unreachable!("cumulative value reaches lambda * total inside a positive-density segment");
}

/// Total value of a bundle of intervals; assumes endpoints inside [0,1].
pub fn bundle_value(v: &CakeValuation, intervals: &[Interval]) -> Rat {
    intervals.iter().map(|iv| integral(v, &iv.lo, &iv.hi)).sum()
}

/// Counts of Robertson-Webb queries issued by a solver run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub evals: usize,
    pub cuts: usize,
}

impl QueryStats {
    pub fn total(&self) -> usize {
        self.evals + self.cuts
    }
}

struct QueryEngine<'a> {
    inst: &'a CakeInstance,
    stats: QueryStats,
}

impl<'a> QueryEngine<'a> {
    fn new(inst: &'a CakeInstance) -> Self {
        QueryEngine { inst, stats: QueryStats::default() }
    }

    fn eval(&mut self, agent: usize, x1: &Rat, x2: &Rat) -> Rat {
        self.stats.evals += 1;
        eval_query(self.inst.valuation(agent), x1, x2).expect("valid query range")
    }

    fn cut(&mut self, agent: usize, x1: &Rat, x2: &Rat, lambda: &Rat) -> Rat {
        self.stats.cuts += 1;
        cut_query(self.inst.valuation(agent), x1, x2, lambda).expect("valid cut query")
    }
}

/// Secretive proportional division as returned by the moving knife.
///
/// `partition` lists the contiguous pieces left to right; piece `i` belongs
/// to the agent who made the `i`-th cut, recorded in `agent_order` (the last
/// piece is matched through the bijections only). `sigma` is the backup map
/// in cut-order labels, while `bijections` is already remapped so that row
/// `pi[k][a]` is the piece of *original* agent `a` when the absent agent
/// takes piece `k`.
#[derive(Debug, Clone)]
pub struct ProportionalSolution {
    pub partition: CakePartition,
    pub sigma: BackupMap,
    pub agent_order: Vec<usize>,
    pub bijections: BijectionFamily,
    pub stats: QueryStats,
}

/// Dubins-Spanier moving knife with threshold 1/n: each round every
/// remaining agent reports where the running piece reaches value exactly
/// 1/n, the smallest cut wins (ties to the smallest agent index), and the
/// winner exits with that piece. The backup map sends each cut-order agent
/// to the first later piece worth at least 1/n to them, which exists by an
/// averaging argument over the unclaimed pieces.
pub fn secretive_proportional(inst: &CakeInstance) -> ProportionalSolution {
    let n = inst.n;
    let mut engine = QueryEngine::new(inst);
    let threshold = ratq(1, n as i64);
    let one = rat(1);

    let mut remaining: Vec<usize> = (0..n - 1).collect();
    let mut pieces: Vec<Interval> = Vec::with_capacity(n);
    let mut agent_order: Vec<usize> = Vec::with_capacity(n - 1);
    let mut s = rat(0);
    for _ in 0..n - 1 {
        let mut winner: Option<(Rat, usize)> = None;
        for &a in &remaining {
            let rest = engine.eval(a, &s, &one);
            debug_assert!(
                rest >= threshold,
                "remaining agents always value the rest of the cake at least 1/n"
            );
            let lambda = &threshold / &rest;
            let x = engine.cut(a, &s, &one, &lambda);
            let better = match &winner {
                None => true,
                Some((best, _)) => x < *best,
            };
            if better {
                winner = Some((x, a));
            }
        }
        let (x, a) = winner.expect("at least one remaining agent");
        pieces.push(Interval { lo: s.clone(), hi: x.clone() });
        agent_order.push(a);
        remaining.retain(|&b| b != a);
        s = x;
    }
    pieces.push(Interval { lo: s, hi: one });

    // Backup map in cut-order labels: sigma(i) is the first later piece the
    // i-th cutter values at least 1/n.
    let mut sigma = Vec::with_capacity(n - 1);
    for (i, &a) in agent_order.iter().enumerate() {
        let next = (i + 1..n)
            .find(|&j| engine.eval(a, &pieces[j].lo, &pieces[j].hi) >= threshold)
            .expect("a later piece worth at least 1/n exists by averaging");
        sigma.push(next);
    }
    let sigma = BackupMap::new(sigma, n).expect("backup indices increase");

    let in_cut_order = backup_to_bijections(&sigma, n);
    let mut pi = vec![vec![0; n - 1]; n];
    for k in 0..n {
        for (i, &a) in agent_order.iter().enumerate() {
            pi[k][a] = in_cut_order.pi[k][i];
        }
    }
    let bijections = BijectionFamily::new(pi).expect("remapped rows stay bijective");

    let partition = CakePartition {
        bundles: pieces.into_iter().map(|p| vec![p]).collect(),
    };
    ProportionalSolution { partition, sigma, agent_order, bijections, stats: engine.stats }
}

/// Secretive ε-envy-free division: the crumb pieces, the bundles they were
/// grouped into, and one matching per choice of the absent agent.
#[derive(Debug, Clone)]
pub struct EpsEfSolution {
    pub partition: CakePartition,
    pub bijections: BijectionFamily,
    pub pieces: Vec<Interval>,
    pub stats: QueryStats,
}

/// Sweeps the knife from 0, cutting whenever some known agent's value of
/// the running piece reaches ε, so every piece is worth at most ε to every
/// agent. The pieces then become indivisible goods with induced additive
/// valuations, the EF1 allocator groups them, and removing one good changes
/// a bundle by at most ε — so the EF1 guarantee becomes ε-envy-freeness.
pub fn eps_ef_partition(inst: &CakeInstance, eps: &Rat) -> Result<EpsEfSolution, CakeError> {
    if *eps <= rat(0) || *eps > rat(1) {
        return Err(CakeError::InvalidEpsilon);
    }
    let n = inst.n;
    let mut engine = QueryEngine::new(inst);
    let one = rat(1);

    let mut pieces: Vec<Interval> = Vec::new();
    let mut s = rat(0);
    loop {
        let mut best: Option<Rat> = None;
        for a in 0..n - 1 {
            let rest = engine.eval(a, &s, &one);
            if rest < *eps {
                continue;
            }
            let lambda = eps / &rest;
            let x = engine.cut(a, &s, &one, &lambda);
            if best.as_ref().map_or(true, |b| x < *b) {
                best = Some(x);
            }
        }
        match best {
            Some(x) => {
                pieces.push(Interval { lo: s.clone(), hi: x.clone() });
                s = x;
            }
            None => {
                // Nobody reaches eps on the remainder; it becomes the last
                // piece unless a cut already landed exactly on 1.
                if s < one {
                    pieces.push(Interval { lo: s, hi: one.clone() });
                }
                break;
            }
        }
        if pieces.len() > MAX_GOODS {
            return Err(CakeError::TooManyPieces { max: MAX_GOODS });
        }
    }

    let m = pieces.len();
    let oracles: Vec<ValuationOracle> = (0..n - 1)
        .map(|a| ValuationOracle::Additive {
            weights: pieces.iter().map(|p| engine.eval(a, &p.lo, &p.hi)).collect(),
        })
        .collect();
    let goods = GoodsInstance::new(n, m, oracles).expect("piece values form a valid instance");
    let ef1 = allocate_secretive_ef1(&goods).map_err(CakeError::PieceAllocation)?;

    let bundles: Vec<Vec<Interval>> = ef1
        .partition
        .bundles
        .iter()
        .map(|&mask| set_iter(mask).map(|g| pieces[g].clone()).collect())
        .collect();
    Ok(EpsEfSolution {
        partition: CakePartition { bundles },
        bijections: ef1.bijections,
        pieces,
        stats: engine.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn uniform() -> CakeValuation {
        CakeValuation::new(vec![rat(0), rat(1)], vec![rat(1)]).unwrap()
    }

    fn front_loaded() -> CakeValuation {
        // Density 2 on [0,1/2], 0 on [1/2,1].
        CakeValuation::new(vec![rat(0), ratq(1, 2), rat(1)], vec![rat(2), rat(0)]).unwrap()
    }

    fn random_valuation(rng: &mut impl Rng) -> CakeValuation {
        loop {
            let segs = rng.gen_range(1..=4);
            let mut cuts: Vec<Rat> = (0..segs - 1)
                .map(|_| ratq(rng.gen_range(1..24), 24))
                .collect();
            cuts.sort();
            cuts.dedup();
            let mut breakpoints = vec![rat(0)];
            breakpoints.extend(cuts);
            breakpoints.push(rat(1));
            let densities: Vec<Rat> = (0..breakpoints.len() - 1)
                .map(|_| rat(rng.gen_range(0..=5)))
                .collect();
            let raw = CakeValuation { breakpoints: breakpoints.clone(), densities };
            let total = integral(&raw, &rat(0), &rat(1));
            if total.is_zero() {
                continue;
            }
            let scaled = raw.densities.iter().map(|d| d / &total).collect();
            return CakeValuation::new(breakpoints, scaled).unwrap();
        }
    }

    #[test]
    fn eval_matches_hand_integrals() {
        let u = uniform();
        assert_eq!(eval_query(&u, &rat(0), &rat(1)).unwrap(), rat(1));
        assert_eq!(eval_query(&u, &ratq(1, 4), &ratq(3, 4)).unwrap(), ratq(1, 2));
        let f = front_loaded();
        assert_eq!(eval_query(&f, &ratq(1, 4), &rat(1)).unwrap(), ratq(1, 2));
    }

    #[test]
    fn cut_matches_hand_answers() {
        let u = uniform();
        assert_eq!(cut_query(&u, &rat(0), &rat(1), &ratq(1, 3)).unwrap(), ratq(1, 3));
        let f = front_loaded();
        assert_eq!(cut_query(&f, &rat(0), &rat(1), &ratq(1, 2)).unwrap(), ratq(1, 4));
        // Zero-value interval: degenerate convention returns the left end.
        assert_eq!(cut_query(&f, &ratq(1, 2), &rat(1), &ratq(1, 2)).unwrap(), ratq(1, 2));
    }

    #[test]
    fn cut_returns_smallest_point_across_zero_density_gaps() {
        // Density 2 on [0,1/4] and [3/4,1], zero between; half the value is
        // reached exactly at 1/4, not anywhere inside the dead zone.
        let v = CakeValuation::new(
            vec![rat(0), ratq(1, 4), ratq(3, 4), rat(1)],
            vec![rat(2), rat(0), rat(2)],
        )
        .unwrap();
        assert_eq!(cut_query(&v, &rat(0), &rat(1), &ratq(1, 2)).unwrap(), ratq(1, 4));
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert_eq!(
            CakeValuation::new(vec![rat(0), rat(1)], vec![rat(2)]).unwrap_err(),
            CakeError::BadTotal { got: rat(2) }
        );
        assert!(matches!(
            CakeValuation::new(vec![rat(0), ratq(1, 2)], vec![rat(1)]).unwrap_err(),
            CakeError::BadBreakpoints
        ));
        assert!(matches!(
            CakeValuation::new(vec![rat(0), rat(1)], vec![rat(-1)]).unwrap_err(),
            CakeError::NegativeDensity { index: 0 }
        ));
        assert!(matches!(
            eval_query(&uniform(), &ratq(1, 2), &ratq(1, 4)).unwrap_err(),
            CakeError::OutOfRange
        ));
        assert!(matches!(
            cut_query(&uniform(), &rat(0), &rat(1), &rat(2)).unwrap_err(),
            CakeError::InvalidLambda
        ));
    }

    #[test]
    fn cut_eval_consistency_on_random_valuations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let v = random_valuation(&mut rng);
            let a = ratq(rng.gen_range(0..12), 12);
            let b = ratq(rng.gen_range(0..=12), 12);
            let (x1, x2) = if a <= b { (a, b) } else { (b, a) };
            let lambda = ratq(rng.gen_range(1..=8), 8);
            let x = cut_query(&v, &x1, &x2, &lambda).unwrap();
            assert!(x1 <= x && x <= x2);
            let want = &lambda * eval_query(&v, &x1, &x2).unwrap();
            assert_eq!(eval_query(&v, &x1, &x).unwrap(), want);
        }
    }

    #[test]
    fn proportional_uniform_three_agents() {
        let inst = CakeInstance::new(3, vec![uniform(), uniform()]).unwrap();
        let sol = secretive_proportional(&inst);
        let flat: Vec<&Interval> = sol.partition.bundles.iter().map(|b| &b[0]).collect();
        assert_eq!(flat[0], &Interval { lo: rat(0), hi: ratq(1, 3) });
        assert_eq!(flat[1], &Interval { lo: ratq(1, 3), hi: ratq(2, 3) });
        assert_eq!(flat[2], &Interval { lo: ratq(2, 3), hi: rat(1) });
        assert_eq!(sol.sigma.sigma, vec![1, 2]);
        assert_eq!(sol.agent_order, vec![0, 1]);
    }

    #[test]
    fn proportional_front_loaded_two_agents() {
        let inst = CakeInstance::new(2, vec![front_loaded()]).unwrap();
        let sol = secretive_proportional(&inst);
        // Value 1/2 is reached where 2x = 1/2, i.e. at x = 1/4.
        assert_eq!(sol.partition.bundles[0][0], Interval { lo: rat(0), hi: ratq(1, 4) });
        // The known agent's own piece is worth exactly 1/2 to them.
        assert_eq!(bundle_value(inst.valuation(0), &sol.partition.bundles[0]), ratq(1, 2));
    }

    #[test]
    fn proportional_invariants_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let n = rng.gen_range(2..=5);
            let vals = (0..n - 1).map(|_| random_valuation(&mut rng)).collect();
            let inst = CakeInstance::new(n, vals).unwrap();
            let sol = secretive_proportional(&inst);
            let threshold = ratq(1, n as i64);

            for (i, &a) in sol.agent_order.iter().enumerate() {
                let v = inst.valuation(a);
                // Own piece worth exactly 1/n; earlier pieces never more.
                assert_eq!(bundle_value(v, &sol.partition.bundles[i]), threshold);
                for k in 0..i {
                    assert!(bundle_value(v, &sol.partition.bundles[k]) <= threshold);
                }
            }
            for k in 0..n {
                for a in 0..n - 1 {
                    let part = sol.bijections.pi[k][a];
                    assert_ne!(part, k);
                    assert!(
                        bundle_value(inst.valuation(a), &sol.partition.bundles[part])
                            >= threshold
                    );
                }
            }
            assert!(sol.stats.total() <= 2 * n * n, "query budget exceeded");
        }
    }

    #[test]
    fn eps_ef_uniform_half() {
        let inst = CakeInstance::new(2, vec![uniform()]).unwrap();
        let sol = eps_ef_partition(&inst, &ratq(1, 2)).unwrap();
        assert_eq!(
            sol.pieces,
            vec![
                Interval { lo: rat(0), hi: ratq(1, 2) },
                Interval { lo: ratq(1, 2), hi: rat(1) },
            ]
        );
    }

    #[test]
    fn eps_one_keeps_single_piece() {
        let inst = CakeInstance::new(2, vec![uniform()]).unwrap();
        let sol = eps_ef_partition(&inst, &rat(1)).unwrap();
        assert_eq!(sol.pieces.len(), 1);
        // One bundle holds the whole cake, the other is empty; envy is at
        // most 1 either way.
        for k in 0..2 {
            let own = bundle_value(inst.valuation(0), &sol.partition.bundles[sol.bijections.pi[k][0]]);
            for b in 0..2 {
                let other = bundle_value(inst.valuation(0), &sol.partition.bundles[b]);
                assert!(&own >= &(other - rat(1)));
            }
        }
    }

    #[test]
    fn eps_ef_property_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        for _ in 0..25 {
            let n = rng.gen_range(2..=4);
            let vals: Vec<CakeValuation> =
                (0..n - 1).map(|_| random_valuation(&mut rng)).collect();
            let inst = CakeInstance::new(n, vals).unwrap();
            let eps = if rng.gen_bool(0.5) { ratq(1, 4) } else { ratq(1, 8) };
            let sol = eps_ef_partition(&inst, &eps).unwrap();

            let max_pieces = (n - 1) * 8 + 1;
            assert!(sol.pieces.len() <= max_pieces);
            for a in 0..n - 1 {
                let v = inst.valuation(a);
                for p in &sol.pieces {
                    assert!(integral(v, &p.lo, &p.hi) <= eps, "piece worth more than eps");
                }
                for k in 0..n {
                    let own = bundle_value(v, &sol.partition.bundles[sol.bijections.pi[k][a]]);
                    for b in 0..n {
                        let other = bundle_value(v, &sol.partition.bundles[b]);
                        assert!(own >= other - &eps, "eps-envy violated");
                    }
                }
            }
        }
    }

    #[test]
    fn eps_out_of_range_is_rejected() {
        let inst = CakeInstance::new(2, vec![uniform()]).unwrap();
        assert!(matches!(
            eps_ef_partition(&inst, &rat(0)).unwrap_err(),
            CakeError::InvalidEpsilon
        ));
        assert!(matches!(
            eps_ef_partition(&inst, &rat(2)).unwrap_err(),
            CakeError::InvalidEpsilon
        ));
    }

    #[test]
    fn partition_validation_catches_overlap_and_gaps() {
        let ok = CakePartition::new(
            2,
            vec![
                vec![Interval { lo: rat(0), hi: ratq(1, 2) }],
                vec![Interval { lo: ratq(1, 2), hi: rat(1) }],
            ],
        );
        assert!(ok.is_ok());
        assert!(matches!(
            CakePartition::new(
                2,
                vec![
                    vec![Interval { lo: rat(0), hi: ratq(3, 4) }],
                    vec![Interval { lo: ratq(1, 2), hi: rat(1) }],
                ],
            )
            .unwrap_err(),
            CakeError::OverlappingIntervals
        ));
        assert!(matches!(
            CakePartition::new(
                2,
                vec![
                    vec![Interval { lo: rat(0), hi: ratq(1, 4) }],
                    vec![Interval { lo: ratq(1, 2), hi: rat(1) }],
                ],
            )
            .unwrap_err(),
            CakeError::BadCoverage { .. }
        ));
    }
}
