use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::Mdp;
use crate::rational::{render, Rational};
use crate::stream::canonical_cycle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("expected rules for {expected} states, got {got}")]
    StateCount { expected: usize, got: usize },
    #[error("state `{state}` has {expected} actions but the rule lists {got}")]
    ActionCount {
        state: String,
        expected: usize,
        got: usize,
    },
    #[error("action index {index} out of range in state `{state}`")]
    ActionIndex { state: String, index: usize },
    #[error("distribution in state `{state}` sums to {sum}")]
    NotADistribution { state: String, sum: String },
    #[error("negative probability in state `{0}`")]
    Negative(String),
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("expected {expected} phases, got {got}")]
    PhaseCount { expected: usize, got: usize },
}

/// How a strategy picks actions in one state at one phase.
#[derive(Debug, Clone, Copy)]
pub enum Choice<'a> {
    Pure(usize),
    Mixed(&'a [Rational]),
}

/// A Markov strategy whose rule depends on the stage only through a phase:
/// stages `1..=L` have their own phases, after which `q` phases repeat.
pub trait MarkovRule {
    fn preperiod(&self) -> usize;
    fn period(&self) -> usize;
    fn choice(&self, phase: usize, state: usize) -> Choice<'_>;

    /// Zero-based phase index of stage `t ≥ 1`.
    fn phase(&self, t: usize) -> usize {
        let l = self.preperiod();
        if t <= l {
            t - 1
        } else {
            l + (t - l - 1) % self.period()
        }
    }
}

fn check_distribution(mdp: &Mdp, s: usize, probs: &[Rational]) -> Result<(), StrategyError> {
    let state = mdp.state_id(s).to_string();
    if probs.len() != mdp.actions(s).len() {
        return Err(StrategyError::ActionCount {
            state,
            expected: mdp.actions(s).len(),
            got: probs.len(),
        });
    }
    if probs.iter().any(|p| p.is_negative()) {
        return Err(StrategyError::Negative(state));
    }
    let sum: Rational = probs.iter().sum();
    if !sum.is_one() {
        return Err(StrategyError::NotADistribution {
            state,
            sum: render(&sum),
        });
    }
    Ok(())
}

fn point_mass(len: usize, at: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); len];
    v[at] = Rational::one();
    v
}

fn pure_index(probs: &[Rational]) -> Option<usize> {
    let mut nonzero = probs.iter().enumerate().filter(|(_, p)| !p.is_zero());
    match (nonzero.next(), nonzero.next()) {
        (Some((a, _)), None) => Some(a),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StationaryStrategy {
    probs: Vec<Vec<Rational>>,
}

impl StationaryStrategy {
    pub fn new(mdp: &Mdp, probs: Vec<Vec<Rational>>) -> Result<Self, StrategyError> {
        if probs.len() != mdp.num_states() {
            return Err(StrategyError::StateCount {
                expected: mdp.num_states(),
                got: probs.len(),
            });
        }
        for (s, p) in probs.iter().enumerate() {
            check_distribution(mdp, s, p)?;
        }
        Ok(Self { probs })
    }

    pub fn pure(mdp: &Mdp, choice: &[usize]) -> Result<Self, StrategyError> {
        if choice.len() != mdp.num_states() {
            return Err(StrategyError::StateCount {
                expected: mdp.num_states(),
                got: choice.len(),
            });
        }
        let probs = choice
            .iter()
            .enumerate()
            .map(|(s, &a)| {
                let n = mdp.actions(s).len();
                if a >= n {
                    Err(StrategyError::ActionIndex {
                        state: mdp.state_id(s).to_string(),
                        index: a,
                    })
                } else {
                    Ok(point_mass(n, a))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { probs })
    }

    pub fn probs(&self, s: usize) -> &[Rational] {
        &self.probs[s]
    }

    pub fn is_pure(&self) -> bool {
        self.pure_choice().is_some()
    }

    /// The chosen action per state, if every state is deterministic.
    pub fn pure_choice(&self) -> Option<Vec<usize>> {
        self.probs.iter().map(|p| pure_index(p)).collect()
    }
}

impl MarkovRule for StationaryStrategy {
    fn preperiod(&self) -> usize {
        0
    }

    fn period(&self) -> usize {
        1
    }

    fn choice(&self, _phase: usize, state: usize) -> Choice<'_> {
        Choice::Mixed(&self.probs[state])
    }
}

/// Periodic Markov strategy with explicit probability vectors, indexed
/// `[phase][state][action]`. Canonical: minimal period, then minimal preperiod.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicMarkovStrategy {
    preperiod: usize,
    period: usize,
    rules: Vec<Vec<Vec<Rational>>>,
}

impl PeriodicMarkovStrategy {
    pub fn new(
        mdp: &Mdp,
        preperiod: usize,
        period: usize,
        rules: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self, StrategyError> {
        if period == 0 {
            return Err(StrategyError::ZeroPeriod);
        }
        if rules.len() != preperiod + period {
            return Err(StrategyError::PhaseCount {
                expected: preperiod + period,
                got: rules.len(),
            });
        }
        for phase in &rules {
            if phase.len() != mdp.num_states() {
                return Err(StrategyError::StateCount {
                    expected: mdp.num_states(),
                    got: phase.len(),
                });
            }
            for (s, p) in phase.iter().enumerate() {
                check_distribution(mdp, s, p)?;
            }
        }
        let mut rules = rules;
        let cycle = rules.split_off(preperiod);
        let (pre, cycle) = canonical_cycle(rules, cycle);
        let preperiod = pre.len();
        let period = cycle.len();
        let mut rules = pre;
        rules.extend(cycle);
        Ok(Self {
            preperiod,
            period,
            rules,
        })
    }

    pub fn from_stationary(sigma: &StationaryStrategy) -> Self {
        Self {
            preperiod: 0,
            period: 1,
            rules: vec![sigma.probs.clone()],
        }
    }

    pub fn rule(&self, phase: usize, state: usize) -> &[Rational] {
        &self.rules[phase][state]
    }

    pub fn is_pure(&self) -> bool {
        self.to_pure().is_some()
    }

    pub fn to_pure(&self) -> Option<PureSchedule> {
        let choices = self
            .rules
            .iter()
            .map(|phase| {
                phase
                    .iter()
                    .map(|p| pure_index(p))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(PureSchedule {
            preperiod: self.preperiod,
            period: self.period,
            choices,
        })
    }
}

impl MarkovRule for PeriodicMarkovStrategy {
    fn preperiod(&self) -> usize {
        self.preperiod
    }

    fn period(&self) -> usize {
        self.period
    }

    fn choice(&self, phase: usize, state: usize) -> Choice<'_> {
        Choice::Mixed(&self.rules[phase][state])
    }
}

/// Compact pure periodic Markov strategy: one action index per
/// `(phase, state)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PureSchedule {
    preperiod: usize,
    period: usize,
    choices: Vec<Vec<usize>>,
}

impl PureSchedule {
    /// Canonicalizes; `choices` lists `preperiod + period` phases.
    pub fn new(
        mdp: &Mdp,
        preperiod: usize,
        period: usize,
        choices: Vec<Vec<usize>>,
    ) -> Result<Self, StrategyError> {
        if period == 0 {
            return Err(StrategyError::ZeroPeriod);
        }
        if choices.len() != preperiod + period {
            return Err(StrategyError::PhaseCount {
                expected: preperiod + period,
                got: choices.len(),
            });
        }
        for phase in &choices {
            if phase.len() != mdp.num_states() {
                return Err(StrategyError::StateCount {
                    expected: mdp.num_states(),
                    got: phase.len(),
                });
            }
            for (s, &a) in phase.iter().enumerate() {
                if a >= mdp.actions(s).len() {
                    return Err(StrategyError::ActionIndex {
                        state: mdp.state_id(s).to_string(),
                        index: a,
                    });
                }
            }
        }
        Ok(Self::canonical(preperiod, choices))
    }

    pub(crate) fn canonical(preperiod: usize, mut choices: Vec<Vec<usize>>) -> Self {
        let cycle = choices.split_off(preperiod);
        let (pre, cycle) = canonical_cycle(choices, cycle);
        let preperiod = pre.len();
        let period = cycle.len();
        let mut choices = pre;
        choices.extend(cycle);
        Self {
            preperiod,
            period,
            choices,
        }
    }

    /// Stationary pure strategy as a schedule.
    pub fn stationary(choice: Vec<usize>) -> Self {
        Self {
            preperiod: 0,
            period: 1,
            choices: vec![choice],
        }
    }

    pub fn action(&self, phase: usize, state: usize) -> usize {
        self.choices[phase][state]
    }

    pub fn phases(&self) -> &[Vec<usize>] {
        &self.choices
    }

    pub fn to_strategy(&self, mdp: &Mdp) -> PeriodicMarkovStrategy {
        let rules = self
            .choices
            .iter()
            .map(|phase| {
                phase
                    .iter()
                    .enumerate()
                    .map(|(s, &a)| point_mass(mdp.actions(s).len(), a))
                    .collect()
            })
            .collect();
        PeriodicMarkovStrategy {
            preperiod: self.preperiod,
            period: self.period,
            rules,
        }
    }
}

impl MarkovRule for PureSchedule {
    fn preperiod(&self) -> usize {
        self.preperiod
    }

    fn period(&self) -> usize {
        self.period
    }

    fn choice(&self, phase: usize, state: usize) -> Choice<'_> {
        Choice::Pure(self.choices[phase][state])
    }
}

/// Any strategy the evaluator can run exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Stationary(StationaryStrategy),
    Periodic(PeriodicMarkovStrategy),
}

impl MarkovRule for Strategy {
    fn preperiod(&self) -> usize {
        match self {
            Strategy::Stationary(s) => s.preperiod(),
            Strategy::Periodic(p) => p.preperiod(),
        }
    }

    fn period(&self) -> usize {
        match self {
            Strategy::Stationary(s) => s.period(),
            Strategy::Periodic(p) => p.period(),
        }
    }

    fn choice(&self, phase: usize, state: usize) -> Choice<'_> {
        match self {
            Strategy::Stationary(s) => s.choice(phase, state),
            Strategy::Periodic(p) => p.choice(phase, state),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::MdpBuilder;
    use crate::rational::{int, ratio};

    fn two_state() -> Mdp {
        let mut b = MdpBuilder::new();
        b.initial("1")
            .goto("1", "T", int(1), "1")
            .goto("1", "B", int(0), "2")
            .goto("2", "C", ratio(3, 2), "2");
        b.build().unwrap()
    }

    #[test]
    fn schedules_canonicalize() {
        let mdp = two_state();
        // T,T then (B) forever; written with a redundant preperiod entry and doubled cycle
        let s = PureSchedule::new(
            &mdp,
            3,
            2,
            vec![vec![0, 0], vec![0, 0], vec![1, 0], vec![1, 0], vec![1, 0]],
        )
        .unwrap();
        assert_eq!((s.preperiod(), s.period()), (2, 1));
        assert_eq!(s.phase(1), 0);
        assert_eq!(s.phase(9), 2);
    }

    #[test]
    fn rejects_bad_rules() {
        let mdp = two_state();
        assert!(matches!(
            StationaryStrategy::new(&mdp, vec![vec![ratio(1, 2), ratio(1, 3)], vec![int(1)]]),
            Err(StrategyError::NotADistribution { .. })
        ));
        assert!(matches!(
            StationaryStrategy::pure(&mdp, &[2, 0]),
            Err(StrategyError::ActionIndex { .. })
        ));
        assert!(matches!(
            PeriodicMarkovStrategy::new(&mdp, 0, 0, vec![]),
            Err(StrategyError::ZeroPeriod)
        ));
    }

    #[test]
    fn purity() {
        let mdp = two_state();
        let mixed =
            StationaryStrategy::new(&mdp, vec![vec![ratio(1, 2), ratio(1, 2)], vec![int(1)]])
                .unwrap();
        assert!(!mixed.is_pure());
        let pure = StationaryStrategy::pure(&mdp, &[1, 0]).unwrap();
        assert_eq!(pure.pure_choice(), Some(vec![1, 0]));
        let p = PeriodicMarkovStrategy::from_stationary(&pure);
        assert_eq!(p.to_pure(), Some(PureSchedule::stationary(vec![1, 0])));
    }
}
