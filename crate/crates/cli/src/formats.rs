//! JSON wire formats for instances and solutions. Rationals are exact:
//! encoded as JSON integers when the denominator is one and the numerator
//! fits, and as `"p/q"` strings otherwise; both forms parse. The schemas
//! are documented in `docs/formats.md`.

use std::fmt;

use fairdiv::cake::{CakeInstance, CakePartition, CakeValuation, Interval};
use fairdiv::instance::{GoodsInstance, Partition, PriceVector, RentInstance};
use fairdiv::oracle::{singleton, GoodSet, ValuationOracle};
use fairdiv::rat::{format_rat, parse_rat, Rat};
use num::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational with the integer-or-string JSON encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonRat(pub Rat);

impl Serialize for JsonRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(i) = self.0.numer().to_i64() {
                return s.serialize_i64(i);
            }
        }
        s.serialize_str(&format_rat(&self.0))
    }
}

struct JsonRatVisitor;

impl Visitor<'_> for JsonRatVisitor {
    type Value = JsonRat;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a \"p/q\" rational string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonRat, E> {
        Ok(JsonRat(fairdiv::rat::rat(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonRat, E> {
        i64::try_from(v)
            .map(|i| JsonRat(fairdiv::rat::rat(i)))
            .map_err(|_| E::custom(format!("integer {v} out of range")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<JsonRat, E> {
        parse_rat(v).map(JsonRat).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for JsonRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(JsonRatVisitor)
    }
}

fn to_json_rats(rs: &[Rat]) -> Vec<JsonRat> {
    rs.iter().cloned().map(JsonRat).collect()
}

/// A cake interval on the wire: the two-element array `[lo, hi]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonInterval(pub JsonRat, pub JsonRat);

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleSpec {
    Additive {
        weights: Vec<JsonRat>,
    },
    Table {
        values: Vec<JsonRat>,
    },
    Coverage {
        element_weights: Vec<JsonRat>,
        covers: Vec<Vec<usize>>,
    },
    Surrogate {
        base: Box<OracleSpec>,
        special: usize,
        cap: JsonRat,
    },
}

impl OracleSpec {
    fn build(self) -> ValuationOracle {
        match self {
            OracleSpec::Additive { weights } => ValuationOracle::Additive {
                weights: weights.into_iter().map(|r| r.0).collect(),
            },
            OracleSpec::Table { values } => ValuationOracle::Table {
                values: values.into_iter().map(|r| r.0).collect(),
            },
            OracleSpec::Coverage { element_weights, covers } => ValuationOracle::Coverage {
                element_weights: element_weights.into_iter().map(|r| r.0).collect(),
                covers,
            },
            OracleSpec::Surrogate { base, special, cap } => ValuationOracle::Surrogate {
                base: Box::new(base.build()),
                special,
                cap: cap.0,
            },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CakeValuationSpec {
    pub breakpoints: Vec<JsonRat>,
    pub densities: Vec<JsonRat>,
}

/// Top-level instance file: `type` selects the problem family, `n` counts
/// all agents including the absent one, and valuations list the `n-1` known
/// agents.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceFile {
    Rent {
        n: usize,
        base_values: Vec<Vec<JsonRat>>,
    },
    Goods {
        n: usize,
        m: usize,
        valuations: Vec<OracleSpec>,
    },
    Cake {
        n: usize,
        valuations: Vec<CakeValuationSpec>,
    },
}

pub enum LoadedInstance {
    Rent(RentInstance),
    Goods(GoodsInstance),
    Cake(CakeInstance),
}

impl LoadedInstance {
    pub fn type_name(&self) -> &'static str {
        match self {
            LoadedInstance::Rent(_) => "rent",
            LoadedInstance::Goods(_) => "goods",
            LoadedInstance::Cake(_) => "cake",
        }
    }
}

impl InstanceFile {
    /// Validates every core invariant (shapes, monotone tables, normalized
    /// cake densities) and produces the typed instance.
    pub fn build(self) -> Result<LoadedInstance, String> {
        match self {
            InstanceFile::Rent { n, base_values } => {
                if base_values.len() + 1 != n {
                    return Err(format!(
                        "field \"n\" is {n} but \"base_values\" has {} rows (need n-1)",
                        base_values.len()
                    ));
                }
                let rows = base_values
                    .into_iter()
                    .map(|row| row.into_iter().map(|r| r.0).collect())
                    .collect();
                RentInstance::new(rows)
                    .map(LoadedInstance::Rent)
                    .map_err(|e| format!("field \"base_values\": {e}"))
            }
            InstanceFile::Goods { n, m, valuations } => {
                let oracles = valuations.into_iter().map(OracleSpec::build).collect();
                GoodsInstance::new(n, m, oracles)
                    .map(LoadedInstance::Goods)
                    .map_err(|e| format!("field \"valuations\": {e}"))
            }
            InstanceFile::Cake { n, valuations } => {
                if valuations.len() + 1 != n {
                    return Err(format!(
                        "field \"n\" is {n} but \"valuations\" has {} entries (need n-1)",
                        valuations.len()
                    ));
                }
                let mut built = Vec::with_capacity(valuations.len());
                for (agent, spec) in valuations.into_iter().enumerate() {
                    let breakpoints = spec.breakpoints.into_iter().map(|r| r.0).collect();
                    let densities = spec.densities.into_iter().map(|r| r.0).collect();
                    built.push(
                        CakeValuation::new(breakpoints, densities)
                            .map_err(|e| format!("field \"valuations[{agent}]\": {e}"))?,
                    );
                }
                CakeInstance::new(n, built)
                    .map(LoadedInstance::Cake)
                    .map_err(|e| format!("field \"valuations\": {e}"))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Solutions
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    /// Minimized total rent, equal to the sum of prices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_objective: Option<JsonRat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_queries: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut_queries: Option<usize>,
    /// Envy bound the partition was computed for.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<JsonRat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub piece_count: Option<usize>,
    /// Approximation factor against maximin shares.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<JsonRat>,
    /// Per-agent share thresholds the run certified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<JsonRat>>,
}

impl Meta {
    pub fn is_empty(&self) -> bool {
        self.lp_objective.is_none()
            && self.eval_queries.is_none()
            && self.cut_queries.is_none()
            && self.eps.is_none()
            && self.piece_count.is_none()
            && self.ratio.is_none()
            && self.thresholds.is_none()
    }
}

/// Solver output. `kind` names the concept; exactly one of `prices`,
/// `bundles`, or `intervals` is present; `bijections[k][a]` is the room or
/// bundle agent `a` takes when the absent agent picks `k`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub kind: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prices: Option<Vec<JsonRat>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_rent: Option<JsonRat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bundles: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<Vec<JsonInterval>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_order: Option<Vec<usize>>,
    pub bijections: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Meta::is_empty")]
    pub meta: Meta,
}

fn bundle_indices(set: GoodSet) -> Vec<usize> {
    fairdiv::oracle::set_iter(set).collect()
}

fn interval_lists(p: &CakePartition) -> Vec<Vec<JsonInterval>> {
    p.bundles
        .iter()
        .map(|b| {
            b.iter()
                .map(|iv| JsonInterval(JsonRat(iv.lo.clone()), JsonRat(iv.hi.clone())))
                .collect()
        })
        .collect()
}

impl SolutionFile {
    pub fn from_rent(inst: &RentInstance, sol: &fairdiv::rent::RentSolution) -> Self {
        SolutionFile {
            kind: "rent".into(),
            n: inst.n,
            m: None,
            prices: Some(to_json_rats(&sol.prices.prices)),
            total_rent: Some(JsonRat(sol.total_rent.clone())),
            bundles: None,
            intervals: None,
            sigma: None,
            agent_order: None,
            bijections: sol.bijections.pi.clone(),
            meta: Meta {
                lp_objective: Some(JsonRat(sol.total_rent.clone())),
                ..Meta::default()
            },
        }
    }

    pub fn from_ef1(inst: &GoodsInstance, sol: &fairdiv::ef1::Ef1Solution) -> Self {
        SolutionFile {
            kind: "ef1".into(),
            n: inst.n,
            m: Some(inst.m),
            prices: None,
            total_rent: None,
            bundles: Some(sol.partition.bundles.iter().map(|&b| bundle_indices(b)).collect()),
            intervals: None,
            sigma: None,
            agent_order: None,
            bijections: sol.bijections.pi.clone(),
            meta: Meta::default(),
        }
    }

    pub fn from_proportional(inst: &CakeInstance, sol: &fairdiv::cake::ProportionalSolution) -> Self {
        SolutionFile {
            kind: "cake-prop".into(),
            n: inst.n,
            m: None,
            prices: None,
            total_rent: None,
            bundles: None,
            intervals: Some(interval_lists(&sol.partition)),
            sigma: Some(sol.sigma.sigma.clone()),
            agent_order: Some(sol.agent_order.clone()),
            bijections: sol.bijections.pi.clone(),
            meta: Meta {
                eval_queries: Some(sol.stats.evals),
                cut_queries: Some(sol.stats.cuts),
                ..Meta::default()
            },
        }
    }

    pub fn from_eps_ef(inst: &CakeInstance, eps: &Rat, sol: &fairdiv::cake::EpsEfSolution) -> Self {
        SolutionFile {
            kind: "cake-ef".into(),
            n: inst.n,
            m: None,
            prices: None,
            total_rent: None,
            bundles: None,
            intervals: Some(interval_lists(&sol.partition)),
            sigma: None,
            agent_order: None,
            bijections: sol.bijections.pi.clone(),
            meta: Meta {
                eval_queries: Some(sol.stats.evals),
                cut_queries: Some(sol.stats.cuts),
                eps: Some(JsonRat(eps.clone())),
                piece_count: Some(sol.pieces.len()),
                ..Meta::default()
            },
        }
    }

    pub fn from_mms(inst: &GoodsInstance, sol: &fairdiv::mms::MmsSolution) -> Self {
        SolutionFile {
            kind: "mms".into(),
            n: inst.n,
            m: Some(inst.m),
            prices: None,
            total_rent: None,
            bundles: Some(sol.partition.bundles.iter().map(|&b| bundle_indices(b)).collect()),
            intervals: None,
            sigma: Some(sol.sigma.sigma.clone()),
            agent_order: Some(sol.agent_order.clone()),
            bijections: sol.bijections.pi.clone(),
            meta: Meta {
                ratio: Some(JsonRat(sol.ratio.clone())),
                thresholds: Some(to_json_rats(&sol.thresholds)),
                ..Meta::default()
            },
        }
    }

    // -- Extractors used by `verify` ------------------------------------

    pub fn price_vector(&self) -> Result<PriceVector, String> {
        let prices = self.prices.as_ref().ok_or("solution is missing \"prices\"")?;
        Ok(PriceVector { prices: prices.iter().map(|r| r.0.clone()).collect() })
    }

    pub fn goods_partition(&self, m: usize) -> Result<Partition, String> {
        let bundles = self.bundles.as_ref().ok_or("solution is missing \"bundles\"")?;
        let mut sets = Vec::with_capacity(bundles.len());
        for (i, bundle) in bundles.iter().enumerate() {
            let mut set = fairdiv::oracle::empty_set();
            for &g in bundle {
                if g >= m {
                    return Err(format!("bundle {i} lists good {g}, but m is {m}"));
                }
                set |= singleton(g);
            }
            sets.push(set);
        }
        Partition::new(self.n, m, sets).map_err(|e| format!("field \"bundles\": {e}"))
    }

    pub fn cake_partition(&self) -> Result<CakePartition, String> {
        let lists = self.intervals.as_ref().ok_or("solution is missing \"intervals\"")?;
        let bundles = lists
            .iter()
            .map(|l| {
                l.iter()
                    .map(|iv| Interval { lo: iv.0 .0.clone(), hi: iv.1 .0.clone() })
                    .collect()
            })
            .collect();
        CakePartition::new(self.n, bundles).map_err(|e| format!("field \"intervals\": {e}"))
    }
}
