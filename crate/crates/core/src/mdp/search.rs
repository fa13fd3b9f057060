use std::collections::HashMap;

use thiserror::Error;

use super::eval::{expected_reward_stream, EvalError, DEFAULT_HORIZON};
use super::strategy::{MarkovRule, PureSchedule};
use super::Mdp;
use crate::charge::{CValue, ChargeExpr};
use crate::stream::RationalStream;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("enumeration would visit {count} schedules, above the cap of {cap}")]
    BudgetExceeded { count: u128, cap: u128 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_period: usize,
    pub max_preperiod: usize,
    /// Upper bound on the raw number of `(preperiod, period, rule)` triples.
    pub cap: u128,
    pub horizon: usize,
}

impl SearchConfig {
    pub fn new(max_period: usize, max_preperiod: usize) -> Self {
        Self {
            max_period,
            max_preperiod,
            cap: 1 << 22,
            horizon: DEFAULT_HORIZON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranked {
    pub schedule: PureSchedule,
    pub value: CValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// Best first: larger guaranteed (minimum-candidate) value, then the
    /// lexicographically smaller schedule.
    pub ranking: Vec<Ranked>,
}

impl SearchResult {
    pub fn best(&self) -> &Ranked {
        &self.ranking[0]
    }
}

/// Raw number of rule tables with `preperiod ≤ max_preperiod`, `1 ≤ period ≤ max_period`.
pub fn raw_count(mdp: &Mdp, max_period: usize, max_preperiod: usize) -> u128 {
    let per_phase: u128 = mdp.pure_policy_count();
    let mut total: u128 = 0;
    for l in 0..=max_preperiod {
        for q in 1..=max_period {
            let mut c: u128 = 1;
            for _ in 0..l + q {
                c = c.saturating_mul(per_phase);
            }
            total = total.saturating_add(c);
        }
    }
    total
}

/// Every canonical pure periodic Markov schedule within the bounds, each
/// exactly once, ordered by preperiod, then period, then rule table.
pub fn enumerate_pure_periodic(
    mdp: &Mdp,
    max_period: usize,
    max_preperiod: usize,
) -> impl Iterator<Item = PureSchedule> + '_ {
    let policies: Vec<Vec<usize>> = mdp.pure_policies().collect();
    let per_phase = policies.len();
    (0..=max_preperiod).flat_map(move |l| {
        let policies = policies.clone();
        (1..=max_period).flat_map(move |q| {
            let policies = policies.clone();
            let phases = l + q;
            let mut digits = vec![0usize; phases];
            let mut done = false;
            std::iter::from_fn(move || loop {
                if done {
                    return None;
                }
                let choices: Vec<Vec<usize>> =
                    digits.iter().map(|&d| policies[d].clone()).collect();
                // odometer with the last phase varying fastest
                let mut i = phases;
                loop {
                    if i == 0 {
                        done = true;
                        break;
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < per_phase {
                        break;
                    }
                    digits[i] = 0;
                }
                let schedule = PureSchedule::canonical(l, choices);
                if schedule.preperiod() == l && schedule.period() == q {
                    return Some(schedule);
                }
            })
        })
    })
}

/// Exhaustive search over pure periodic Markov schedules; a lower bound on
/// the value `sup_σ u_μ(σ)`.
pub fn best_periodic(
    mdp: &Mdp,
    mu: &ChargeExpr,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    let count = raw_count(mdp, config.max_period, config.max_preperiod);
    if count > config.cap {
        return Err(SearchError::BudgetExceeded {
            count,
            cap: config.cap,
        });
    }
    let mut cache: HashMap<RationalStream, CValue> = HashMap::new();
    let mut ranking = Vec::new();
    for schedule in enumerate_pure_periodic(mdp, config.max_period, config.max_preperiod) {
        let stream = expected_reward_stream(mdp, &schedule, config.horizon)?;
        let value = match cache.get(&stream) {
            Some(v) => v.clone(),
            None => {
                let v = mu.integrate(&stream).map_err(EvalError::from)?;
                cache.insert(stream, v.clone());
                v
            }
        };
        ranking.push(Ranked { schedule, value });
    }
    ranking.sort_by(|a, b| {
        b.value
            .min()
            .cmp(a.value.min())
            .then_with(|| a.schedule.cmp(&b.schedule))
    });
    Ok(SearchResult { ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::MdpBuilder;
    use crate::rational::{int, ratio};

    fn even_or_odd() -> Mdp {
        let mut b = MdpBuilder::new();
        b.initial("1")
            .goto("1", "T", int(1), "2")
            .goto("1", "B", int(0), "3")
            .goto("2", "C", int(0), "1")
            .goto("3", "C", int(1), "1");
        b.build().unwrap()
    }

    #[test]
    fn enumeration_visits_each_canonical_schedule_once() {
        let mdp = even_or_odd();
        let all: Vec<_> = enumerate_pure_periodic(&mdp, 4, 2).collect();
        let unique: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), unique.len());
        // period exactly q with preperiod 0: primitive binary necklaces-with-offset, i.e. sequences of
        // minimal period q; there are 2, 2, 6, 12 for q = 1..4
        let pure_periodic = all.iter().filter(|s| s.preperiod() == 0).count();
        assert_eq!(pure_periodic, 2 + 2 + 6 + 12);
        assert!(all.iter().all(|s| s.preperiod() <= 2 && s.period() <= 4));
    }

    #[test]
    fn enumeration_count_matches_distinct_sequences() {
        // distinct binary sequences with preperiod ≤ 8 and period ≤ 8, counted by
        // brute force over their first 40 terms
        assert_eq!(enumerate_pure_periodic(&even_or_odd(), 8, 8).count(), 120_832);
        assert_eq!(raw_count(&even_or_odd(), 8, 8), 260_610);
    }

    #[test]
    fn frequency_value_is_one_half_everywhere() {
        let mdp = even_or_odd();
        let result = best_periodic(&mdp, &ChargeExpr::Frequency, &SearchConfig::new(4, 2)).unwrap();
        assert!(result
            .ranking
            .iter()
            .all(|r| r.value == CValue::Exact(ratio(1, 2))));
        // all tie; the lexicographically first schedule wins
        assert_eq!(
            result.best().schedule,
            PureSchedule::stationary(vec![0, 0, 0])
        );
    }

    #[test]
    fn budget_is_enforced() {
        let mdp = even_or_odd();
        let mut config = SearchConfig::new(8, 8);
        config.cap = 1000;
        assert!(matches!(
            best_periodic(&mdp, &ChargeExpr::Frequency, &config),
            Err(SearchError::BudgetExceeded { cap: 1000, .. })
        ));
    }
}
