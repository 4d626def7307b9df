//! The acceptance suite: eleven self-contained checks, each pitting a solver
//! against an independent oracle or a directly evaluated fairness predicate
//! on seeded random instances. The CLI `selftest` subcommand and the
//! `acceptance` integration test both run these and print one line per
//! criterion.
//!
//! Oracles used here are deliberately separate from the solver code paths:
//! linear-program optima are cross-checked by enumerating basic feasible
//! points, secretiveness verdicts by enumerating agent subsets, and maximin
//! bounds by the brute-force share oracle.

use std::collections::HashMap;
use std::time::Instant;

use crate::cake::{
    bundle_value, eps_ef_partition, secretive_proportional, CakeInstance, CakeValuation,
};
use crate::ef1::allocate_secretive_ef1;
use crate::instance::{GoodsInstance, RentInstance};
use crate::lp::{solve_min, LinearProgram, Relation};
use crate::mms::{brute_force_mms, exact_thresholds, threshold_search, ThresholdMode};
use crate::oracle::{
    check_monotone_nonnegative, check_submodular, full_set, oracle_eval, set_iter, set_remove,
    singleton, GoodSet, ValuationOracle,
};
use crate::rat::{rat, ratq, Rat};
use crate::rent::{compute_room_removal_matchings, find_despised_room, solve_secretive_rent};
use crate::verify::{
    check_secretive, verify_secretive_ef1, verify_secretive_mms, verify_secretive_rent,
    FairnessGraph,
};
use num::traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used by the acceptance test target; `selftest --seed` overrides it.
pub const DEFAULT_SELFTEST_SEED: u64 = 177_817;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CriterionReport {
    /// The one formatted line the suite prints per criterion.
    pub fn line(&self) -> String {
        format!(
            "criterion {:02} {}: {} ({})",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn rng_for(seed: u64, criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(criterion.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

fn random_rent_instance(rng: &mut ChaCha8Rng) -> RentInstance {
    let n = rng.gen_range(2..=5);
    let base = (0..n - 1)
        .map(|_| (0..n).map(|_| rat(rng.gen_range(0..=100))).collect())
        .collect();
    RentInstance::new(base).expect("generated rent instance is valid")
}

fn budget_additive_table(weights: &[i64], budget: i64) -> ValuationOracle {
    let m = weights.len();
    let values = (0u128..(1 << m))
        .map(|set| {
            let mut total = rat(0);
            for g in set_iter(set) {
                total += rat(weights[g]);
            }
            let cap = rat(budget);
            if total > cap { cap } else { total }
        })
        .collect();
    ValuationOracle::Table { values }
}

/// Additive, budget-additive (explicit table), or coverage oracle — all
/// monotone, nonnegative, and submodular.
fn random_submodular_oracle(rng: &mut ChaCha8Rng, m: usize) -> ValuationOracle {
    match rng.gen_range(0..3) {
        0 => ValuationOracle::Additive {
            weights: (0..m).map(|_| rat(rng.gen_range(0..=9))).collect(),
        },
        1 => {
            let weights: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=9)).collect();
            let total: i64 = weights.iter().sum();
            let budget = rng.gen_range(1..=total.max(1));
            budget_additive_table(&weights, budget)
        }
        _ => {
            let elems = rng.gen_range(1..=7);
            let element_weights = (0..elems).map(|_| rat(rng.gen_range(0..=6))).collect();
            let covers = (0..m)
                .map(|_| (0..elems).filter(|_| rng.gen_range(0..3) == 0).collect())
                .collect();
            ValuationOracle::Coverage { element_weights, covers }
        }
    }
}

fn random_goods_instance(
    rng: &mut ChaCha8Rng,
    n_hi: usize,
    m_hi: usize,
) -> GoodsInstance {
    let n = rng.gen_range(2..=n_hi);
    let m = rng.gen_range(0..=m_hi);
    let oracles = (0..n - 1).map(|_| random_submodular_oracle(rng, m)).collect();
    GoodsInstance::new(n, m, oracles).expect("generated goods instance is valid")
}

/// Piecewise-constant valuation on uniform breakpoints, normalized to total
/// value exactly one.
fn random_cake_valuation(rng: &mut ChaCha8Rng) -> CakeValuation {
    loop {
        let k = rng.gen_range(1..=4);
        let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=9)).collect();
        let total: i64 = raw.iter().sum();
        if total == 0 {
            continue;
        }
        let breakpoints = (0..=k).map(|i| ratq(i as i64, k as i64)).collect();
        let densities = raw
            .iter()
            .map(|&d| rat(d) * rat(k as i64) / rat(total))
            .collect();
        return CakeValuation::new(breakpoints, densities)
            .expect("normalized valuation is valid");
    }
}

fn random_cake_instance(rng: &mut ChaCha8Rng, n: usize) -> CakeInstance {
    let valuations = (0..n - 1).map(|_| random_cake_valuation(rng)).collect();
    CakeInstance::new(n, valuations).expect("generated cake instance is valid")
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Exact Gaussian elimination; `None` when the system is singular.
fn solve_square_system(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &a[col][col];
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
            let delta = &factor * &b[col];
            b[r] -= delta;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if left == 0 {
            f(cur);
            return;
        }
        for i in start..=n - left {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, f);
            cur.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), f);
    }
}

/// Reference optimum for the pricing programs: enumerate every basic point
/// (each choice of `dim` tight constraints), keep the feasible ones, and
/// minimize the objective over them. Valid because the feasible region is
/// pointed (all variables are nonnegative) and the objective is bounded
/// below, so some vertex attains the optimum. Duplicate constraint rows are
/// merged to their tightest right-hand side first.
fn vertex_enumeration_min(lp: &LinearProgram) -> Option<Rat> {
    let dim = lp.objective.len();
    assert!(lp.nonneg.iter().all(|&b| b), "oracle expects nonnegative variables");
    let mut tight: HashMap<Vec<Rat>, Rat> = HashMap::new();
    for c in &lp.constraints {
        assert!(matches!(c.relation, Relation::Ge), "oracle expects >= rows");
        tight
            .entry(c.coeffs.clone())
            .and_modify(|rhs| {
                if c.rhs > *rhs {
                    *rhs = c.rhs.clone();
                }
            })
            .or_insert_with(|| c.rhs.clone());
    }
    for i in 0..dim {
        let mut unit = vec![rat(0); dim];
        unit[i] = rat(1);
        tight.entry(unit).or_insert_with(|| rat(0));
    }
    let rows: Vec<(Vec<Rat>, Rat)> = tight.into_iter().collect();
    let mut best: Option<Rat> = None;
    for_each_combination(rows.len(), dim, &mut |combo| {
        let a: Vec<Vec<Rat>> = combo.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Rat> = combo.iter().map(|&i| rows[i].1.clone()).collect();
        let Some(x) = solve_square_system(a, b) else {
            return;
        };
        let feasible = rows.iter().all(|(coeffs, rhs)| {
            let mut dot = rat(0);
            for (c, xi) in coeffs.iter().zip(&x) {
                dot += c * xi;
            }
            dot >= *rhs
        });
        if !feasible {
            return;
        }
        let mut obj = rat(0);
        for (c, xi) in lp.objective.iter().zip(&x) {
            obj += c * xi;
        }
        if best.as_ref().map_or(true, |b| &obj < b) {
            best = Some(obj);
        }
    });
    best
}

/// Reference secretiveness decision: every nonempty agent subset must see
/// strictly more acceptable bundles than it has members.
fn hall_plus_one_holds(edges: &[Vec<bool>], n: usize) -> bool {
    let rows = edges.len();
    for subset in 1u32..(1 << rows) {
        let mut neighborhood = 0u32;
        let mut size = 0;
        for (a, row) in edges.iter().enumerate() {
            if subset & (1 << a) == 0 {
                continue;
            }
            size += 1;
            for i in 0..n {
                if row[i] {
                    neighborhood |= 1 << i;
                }
            }
        }
        if (neighborhood.count_ones() as usize) < size + 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// 500 random pricing instances: the computed prices must pass the
/// independent first-choice check for every possible room the absent agent
/// takes, in under 30 seconds.
pub fn criterion_rent(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 1);
    let start = Instant::now();
    let total = 500;
    let mut verified = 0;
    for _ in 0..total {
        let inst = random_rent_instance(&mut rng);
        let ok = solve_secretive_rent(&inst)
            .map(|sol| verify_secretive_rent(&inst, &sol.prices).ok)
            .unwrap_or(false);
        if ok {
            verified += 1;
        }
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs_f64() < 30.0;
    CriterionReport {
        id: 1,
        name: "secretive-rent",
        pass: verified == total && within_budget,
        detail: format!("{verified}/{total} verified in {:.2}s (budget 30s)", elapsed.as_secs_f64()),
    }
}

/// For every generated pricing program with at most four rooms, the simplex
/// optimum must equal the minimum over enumerated basic feasible points.
pub fn criterion_lp_optimum(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 1); // same stream as the rent criterion
    let mut checked = 0;
    let mut matched = 0;
    for _ in 0..500 {
        let inst = random_rent_instance(&mut rng);
        if inst.n > 4 {
            continue;
        }
        checked += 1;
        let family = compute_room_removal_matchings(&inst);
        let lp = crate::rent::build_envy_lp(&inst, &family);
        let solver = solve_min(&lp).map(|s| s.objective);
        let oracle = vertex_enumeration_min(&lp);
        if let (Ok(a), Some(b)) = (solver, oracle) {
            if a == b {
                matched += 1;
            }
        }
    }
    CriterionReport {
        id: 2,
        name: "lp-vertex-equality",
        pass: checked > 0 && matched == checked,
        detail: format!("{matched}/{checked} optima equal the enumeration oracle"),
    }
}

/// Every pricing run must expose a room no agent prefers, and every
/// iteration of the goods allocator a bundle no agent envies; neither scan
/// may ever come up empty.
pub fn criterion_despised_exists(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 1);
    let mut rent_ok = 0;
    let rent_total = 500;
    for _ in 0..rent_total {
        let inst = random_rent_instance(&mut rng);
        let family = compute_room_removal_matchings(&inst);
        if find_despised_room(&inst, &family).is_ok() {
            rent_ok += 1;
        }
    }
    let mut rng = rng_for(seed, 4); // same stream as the EF1 criterion
    let mut ef1_ok = 0;
    let ef1_total = 300;
    for _ in 0..ef1_total {
        let inst = random_goods_instance(&mut rng, 5, 12);
        // Any missing despised bundle in any iteration surfaces as an error.
        if allocate_secretive_ef1(&inst).is_ok() {
            ef1_ok += 1;
        }
    }
    CriterionReport {
        id: 3,
        name: "despised-existence",
        pass: rent_ok == rent_total && ef1_ok == ef1_total,
        detail: format!(
            "{rent_ok}/{rent_total} rent scans, {ef1_ok}/{ef1_total} allocation runs found one"
        ),
    }
}

/// 300 random goods instances over mixed oracle kinds: the allocation must
/// pass the independent envy-up-to-one-good check, in under 60 seconds.
pub fn criterion_ef1(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 4);
    let start = Instant::now();
    let total = 300;
    let mut verified = 0;
    for _ in 0..total {
        let inst = random_goods_instance(&mut rng, 5, 12);
        let ok = allocate_secretive_ef1(&inst)
            .map(|sol| verify_secretive_ef1(&inst, &sol.partition).ok)
            .unwrap_or(false);
        if ok {
            verified += 1;
        }
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs_f64() < 60.0;
    CriterionReport {
        id: 4,
        name: "secretive-ef1",
        pass: verified == total && within_budget,
        detail: format!("{verified}/{total} verified in {:.2}s (budget 60s)", elapsed.as_secs_f64()),
    }
}

/// 200 random cake instances: every agent must value its piece at exactly
/// one n-th or more under every choice of the absent agent, and every piece
/// must be one contiguous interval.
pub fn criterion_proportional_cake(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 5);
    let total = 200;
    let mut verified = 0;
    for _ in 0..total {
        let n = rng.gen_range(2..=6);
        let inst = random_cake_instance(&mut rng, n);
        let sol = secretive_proportional(&inst);
        let share = ratq(1, n as i64);
        let contiguous = sol.partition.bundles.iter().all(|b| b.len() == 1);
        let mut fair = true;
        for k in 0..n {
            for a in 0..n - 1 {
                let piece = &sol.partition.bundles[sol.bijections.pi[k][a]];
                if bundle_value(inst.valuation(a), piece) < share {
                    fair = false;
                }
                if sol.bijections.pi[k][a] == k {
                    fair = false;
                }
            }
        }
        if contiguous && fair {
            verified += 1;
        }
    }
    CriterionReport {
        id: 5,
        name: "proportional-cake",
        pass: verified == total,
        detail: format!("{verified}/{total} exact shares with contiguous pieces"),
    }
}

/// 100 random cake instances at envy bounds 1/4 and 1/8: envy of every
/// agent toward every bundle stays within the bound for every choice of the
/// absent agent, and the piece count stays within its ceiling, in under 60
/// seconds.
pub fn criterion_eps_envy_cake(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 6);
    let start = Instant::now();
    let total = 100;
    let mut verified = 0;
    for trial in 0..total {
        let n = rng.gen_range(2..=4);
        let inst = random_cake_instance(&mut rng, n);
        let eps = if trial % 2 == 0 { ratq(1, 4) } else { ratq(1, 8) };
        let Ok(sol) = eps_ef_partition(&inst, &eps) else {
            continue;
        };
        let piece_cap = (rat((n - 1) as i64) / &eps).ceil() + rat(1);
        let mut ok = rat(sol.pieces.len() as i64) <= piece_cap;
        for k in 0..n {
            for a in 0..n - 1 {
                let own = bundle_value(
                    inst.valuation(a),
                    &sol.partition.bundles[sol.bijections.pi[k][a]],
                );
                for b in 0..n {
                    let other = bundle_value(inst.valuation(a), &sol.partition.bundles[b]);
                    if &own + &eps < other {
                        ok = false;
                    }
                }
            }
        }
        if ok {
            verified += 1;
        }
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs_f64() < 60.0;
    CriterionReport {
        id: 6,
        name: "eps-envy-cake",
        pass: verified == total && within_budget,
        detail: format!(
            "{verified}/{total} within envy and piece bounds in {:.2}s (budget 60s)",
            elapsed.as_secs_f64()
        ),
    }
}

/// 50 random submodular bases: capping the marginal of the single high-value
/// good must preserve monotonicity, nonnegativity, and submodularity,
/// checked exhaustively over all subset pairs.
pub fn criterion_surrogate_preservation(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 7);
    let target = 50;
    let mut checked = 0;
    let mut clean = 0;
    while checked < target {
        let m = rng.gen_range(2..=10);
        let base = random_submodular_oracle(&mut rng, m);
        let singles: Vec<Rat> = (0..m).map(|g| oracle_eval(&base, singleton(g))).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| singles[a].cmp(&singles[b]));
        let top = order[m - 1];
        let second = order[m - 2];
        // A valid cap sits strictly between the two largest singleton
        // values, so exactly one good exceeds it.
        if singles[top] == singles[second] || singles[top].is_zero() {
            continue;
        }
        let cap = (&singles[top] + &singles[second]) / rat(2);
        let wrapped = ValuationOracle::Surrogate { base: Box::new(base), special: top, cap };
        checked += 1;
        if check_monotone_nonnegative(&wrapped, m).is_ok() && check_submodular(&wrapped, m).is_ok()
        {
            clean += 1;
        }
    }
    CriterionReport {
        id: 7,
        name: "surrogate-preservation",
        pass: clean == target,
        detail: format!("{clean}/{target} capped oracles stay monotone submodular"),
    }
}

/// Replicates the solver's reservation pass: agents with two goods above the
/// cap reserve one, leaving each remaining agent at most one high good.
fn reservation_pass(
    inst: &GoodsInstance,
    thresholds: &[Rat],
) -> (Vec<usize>, GoodSet) {
    let n = inst.n;
    let mut in_pool = vec![true; n - 1];
    let mut remaining = full_set(inst.m);
    loop {
        let mut pick = None;
        'agents: for a in 0..n - 1 {
            if !in_pool[a] {
                continue;
            }
            let cap = &thresholds[a] / rat(19);
            let mut first = None;
            for g in set_iter(remaining) {
                if inst.eval(a, singleton(g)) >= cap {
                    match first {
                        None => first = Some(g),
                        Some(f) => {
                            pick = Some((a, f));
                            break 'agents;
                        }
                    }
                }
            }
        }
        match pick {
            Some((a, g)) => {
                in_pool[a] = false;
                remaining = set_remove(remaining, g);
            }
            None => break,
        }
    }
    ((0..n - 1).filter(|&a| in_pool[a]).collect(), remaining)
}

/// The capped maximin share must stay within a 9/19 factor. The literal
/// hypothesis — a positive cap with exactly one good above it, at most the
/// true share over two or more parts — forces degenerate instances at this
/// size (subadditivity bounds any bundle avoiding the high good by `(m-1)`
/// small singleton values, so a nonzero share would need 20+ goods); those
/// degenerate cases are still checked, and the bound is additionally
/// exercised on every surrogate the allocation pipeline actually builds,
/// where the guarantee takes the form "capped share over the remaining
/// goods and pool is at least 9/19 of the threshold".
pub fn criterion_surrogate_share_bound(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 8);
    let target = 50;
    let mut literal = 0;
    let mut literal_ok = 0;
    let mut attempts = 0;
    while literal < target && attempts < 100_000 {
        attempts += 1;
        let m = rng.gen_range(1..=8);
        let parts = rng.gen_range(2..=4);
        let base = random_submodular_oracle(&mut rng, m);
        let mu = brute_force_mms(&base, full_set(m), parts).expect("within budget");
        let tau = &mu * ratq(rng.gen_range(0..=8), 8);
        let kappa = &tau / rat(19);
        let highs: Vec<usize> = (0..m)
            .filter(|&g| oracle_eval(&base, singleton(g)) >= kappa)
            .collect();
        if highs.len() != 1 {
            continue;
        }
        literal += 1;
        let wrapped = ValuationOracle::Surrogate {
            base: Box::new(base),
            special: highs[0],
            cap: kappa,
        };
        let mu_hat = brute_force_mms(&wrapped, full_set(m), parts).expect("within budget");
        if mu_hat >= ratq(9, 19) * &mu {
            literal_ok += 1;
        }
    }

    // Pipeline form: exact thresholds, then the reservation pass. At these
    // sizes the capped branch is provably unreachable — any agent with a
    // positive share holds at least one good above the cap in each part of
    // its own share-optimal partition (subadditivity), giving it more
    // disjoint high goods than reservations can consume; the pass therefore
    // reserves it, and every agent left in the pool carries a zero
    // threshold. That dead-branch fact is asserted outright, and should a
    // capped valuation ever arise anyway, its 9/19 bound is checked too.
    let mut pool_agents = 0;
    let mut pool_zero = 0;
    let mut pipeline = 0;
    let mut pipeline_ok = 0;
    for _ in 0..50 {
        let inst = random_goods_instance(&mut rng, 4, 8);
        let thresholds = exact_thresholds(&inst).expect("within budget");
        let (pool, remaining) = reservation_pass(&inst, &thresholds);
        if pool.is_empty() {
            continue;
        }
        for &a in &pool {
            pool_agents += 1;
            let cap = &thresholds[a] / rat(19);
            if cap.is_zero() {
                pool_zero += 1;
                continue;
            }
            let highs: Vec<usize> = set_iter(remaining)
                .filter(|&g| inst.eval(a, singleton(g)) >= cap)
                .collect();
            if highs.len() != 1 {
                continue;
            }
            let wrapped = ValuationOracle::Surrogate {
                base: Box::new(inst.valuations[a].clone()),
                special: highs[0],
                cap,
            };
            pipeline += 1;
            let mu_hat = brute_force_mms(&wrapped, remaining, pool.len())
                .expect("within budget");
            if mu_hat >= ratq(9, 19) * &thresholds[a] {
                pipeline_ok += 1;
            }
        }
    }
    CriterionReport {
        id: 8,
        name: "surrogate-share-bound",
        pass: literal == target
            && literal_ok == literal
            && pool_zero == pool_agents
            && pipeline_ok == pipeline,
        detail: format!(
            "{literal_ok}/{literal} hypothesis-satisfying instances hold the 9/19 bound \
             (degenerate by construction at enumerable sizes); capped branch confirmed \
             unreachable at exact thresholds ({pool_zero}/{pool_agents} pool agents \
             zero-threshold, {pipeline_ok}/{pipeline} stray capped cases checked)"
        ),
    }
}

/// 100 submodular instances in exact-threshold mode: the allocation must
/// pass the independent share check at ratio 1/19 against brute-force
/// shares, with zero flags raised at exact thresholds, in under 5 minutes.
pub fn criterion_mms_nineteenth(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 9);
    let start = Instant::now();
    let total = 100;
    let mut verified = 0;
    let mut flags = 0;
    for _ in 0..total {
        let inst = random_goods_instance(&mut rng, 4, 9);
        match threshold_search(&inst, ThresholdMode::Exact) {
            Ok(sol) => {
                let verdict = verify_secretive_mms(&inst, &sol.partition, &ratq(1, 19))
                    .expect("within budget");
                if verdict.ok {
                    verified += 1;
                }
            }
            Err(crate::mms::MmsError::FlaggedAgent(_)) => flags += 1,
            Err(e) => panic!("unexpected solver error: {e}"),
        }
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs_f64() < 300.0;
    CriterionReport {
        id: 9,
        name: "mms-nineteenth",
        pass: verified == total && flags == 0 && within_budget,
        detail: format!(
            "{verified}/{total} verified, {flags} flags at exact thresholds, {:.2}s (budget 300s)",
            elapsed.as_secs_f64()
        ),
    }
}

/// 200 additive instances: the half-share allocation must pass the
/// independent check at ratio 1/2 against brute-force shares; the knife
/// loop's internal bound (no cut bundle exceeds a remaining agent's
/// threshold) is asserted during every run.
pub fn criterion_mms_half_additive(seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, 10);
    let total = 200;
    let mut verified = 0;
    for _ in 0..total {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(0..=10);
        let oracles = (0..n - 1)
            .map(|_| ValuationOracle::Additive {
                weights: (0..m).map(|_| rat(rng.gen_range(0..=9))).collect(),
            })
            .collect();
        let inst = GoodsInstance::new(n, m, oracles).expect("valid instance");
        let thresholds = exact_thresholds(&inst).expect("within budget");
        let ok = crate::mms::additive_half_mms(&inst, &thresholds)
            .map(|sol| {
                verify_secretive_mms(&inst, &sol.partition, &ratq(1, 2))
                    .expect("within budget")
                    .ok
            })
            .unwrap_or(false);
        if ok {
            verified += 1;
        }
    }
    CriterionReport {
        id: 10,
        name: "mms-half-additive",
        pass: verified == total,
        detail: format!("{verified}/{total} verified at exact thresholds"),
    }
}

/// The matching-based secretiveness check must agree with exhaustive subset
/// enumeration on every fairness graph with up to six bundles: all graphs
/// outright up to five, and all graphs up to agent relabeling at six (both
/// procedures are invariant under permuting agents, so one representative
/// per multiset of agent rows covers the full space).
pub fn criterion_framework_equivalence() -> CriterionReport {
    let start = Instant::now();
    let mut checked: u64 = 0;
    let mut agreed: u64 = 0;

    for n in 2..=5usize {
        let rows = n - 1;
        let cells = rows * n;
        for code in 0u64..(1 << cells) {
            let edges: Vec<Vec<bool>> = (0..rows)
                .map(|a| (0..n).map(|i| code >> (a * n + i) & 1 == 1).collect())
                .collect();
            checked += 1;
            let fast = check_secretive(&FairnessGraph::new(edges.clone())).ok;
            if fast == hall_plus_one_holds(&edges, n) {
                agreed += 1;
            }
        }
    }

    // n = 6: five agent rows over 64 possible row masks, one representative
    // per nondecreasing row sequence.
    let n = 6usize;
    let row_bools: Vec<Vec<bool>> =
        (0u32..64).map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect()).collect();
    let mut stack = [0u32; 5];
    #[allow(clippy::needless_range_loop)]
    for r0 in 0..64u32 {
        stack[0] = r0;
        for r1 in r0..64 {
            stack[1] = r1;
            for r2 in r1..64 {
                stack[2] = r2;
                for r3 in r2..64 {
                    stack[3] = r3;
                    for r4 in r3..64 {
                        stack[4] = r4;
                        let edges: Vec<Vec<bool>> =
                            stack.iter().map(|&mask| row_bools[mask as usize].clone()).collect();
                        checked += 1;
                        let fast = check_secretive(&FairnessGraph::new(edges.clone())).ok;
                        if fast == hall_plus_one_holds(&edges, n) {
                            agreed += 1;
                        }
                    }
                }
            }
        }
    }

    let elapsed = start.elapsed();
    CriterionReport {
        id: 11,
        name: "framework-equivalence",
        pass: agreed == checked,
        detail: format!("{agreed}/{checked} graphs agree in {:.2}s", elapsed.as_secs_f64()),
    }
}

/// Runs all eleven criteria in order.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    vec![
        criterion_rent(seed),
        criterion_lp_optimum(seed),
        criterion_despised_exists(seed),
        criterion_ef1(seed),
        criterion_proportional_cake(seed),
        criterion_eps_envy_cake(seed),
        criterion_surrogate_preservation(seed),
        criterion_surrogate_share_bound(seed),
        criterion_mms_nineteenth(seed),
        criterion_mms_half_additive(seed),
        criterion_framework_equivalence(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_oracle_solves_a_small_program() {
        // minimize x + y  s.t.  x + y >= 3, x - y >= 1, x, y >= 0:
        // optimum at (2, 1) with objective 3.
        let lp = LinearProgram {
            objective: vec![rat(1), rat(1)],
            constraints: vec![
                crate::lp::Constraint {
                    coeffs: vec![rat(1), rat(1)],
                    relation: Relation::Ge,
                    rhs: rat(3),
                },
                crate::lp::Constraint {
                    coeffs: vec![rat(1), rat(-1)],
                    relation: Relation::Ge,
                    rhs: rat(1),
                },
            ],
            nonneg: vec![true, true],
        };
        assert_eq!(vertex_enumeration_min(&lp), Some(rat(3)));
        assert_eq!(solve_min(&lp).unwrap().objective, rat(3));
    }

    #[test]
    fn gaussian_solver_handles_singular_systems() {
        let a = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert!(solve_square_system(a, vec![rat(1), rat(2)]).is_none());
        let a = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
        let x = solve_square_system(a, vec![rat(5), rat(7)]).unwrap();
        assert_eq!(x, vec![rat(7), rat(5)]);
    }

    #[test]
    fn generators_produce_valid_instances() {
        let mut rng = rng_for(3, 99);
        for _ in 0..20 {
            let inst = random_goods_instance(&mut rng, 5, 12);
            assert!(inst.n >= 2 && inst.m <= 12);
            let cake = random_cake_instance(&mut rng, 3);
            assert_eq!(cake.n, 3);
            let rent = random_rent_instance(&mut rng);
            assert!(rent.n >= 2 && rent.n <= 5);
        }
    }

    #[test]
    fn hall_reference_matches_tiny_cases() {
        assert!(hall_plus_one_holds(&[vec![true, true]], 2));
        assert!(!hall_plus_one_holds(&[vec![false, true]], 2));
    }

    #[test]
    fn reservation_pass_mirrors_two_high_goods_rule() {
        let inst = GoodsInstance::new(
            2,
            3,
            vec![ValuationOracle::Additive { weights: vec![rat(19), rat(19), rat(1)] }],
        )
        .unwrap();
        let (pool, remaining) = reservation_pass(&inst, &[rat(19)]);
        assert!(pool.is_empty());
        assert_eq!(remaining, full_set(3) & !singleton(0));
    }
}
