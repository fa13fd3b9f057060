//! Finite MDPs with exact rational rewards and transition probabilities.

mod eval;
pub mod format;
mod search;
mod strategy;

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{render, Rational};

pub use eval::{expected_reward_stream, payoff, EvalError, DEFAULT_HORIZON};
pub use search::{
    best_periodic, enumerate_pure_periodic, Ranked, SearchConfig, SearchError, SearchResult,
};
pub use strategy::{
    Choice, MarkovRule, PeriodicMarkovStrategy, PureSchedule, StationaryStrategy, Strategy,
    StrategyError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub id: String,
    pub reward: Rational,
    /// Dense distribution over the states of the owning MDP.
    pub transition: Vec<Rational>,
}

/// A validated MDP. Built through [`MdpBuilder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdp {
    state_ids: Vec<String>,
    initial: usize,
    actions: Vec<Vec<Action>>,
}

impl Mdp {
    pub fn num_states(&self) -> usize {
        self.state_ids.len()
    }

    pub fn state_id(&self, s: usize) -> &str {
        &self.state_ids[s]
    }

    pub fn state_ids(&self) -> &[String] {
        &self.state_ids
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.state_ids.iter().position(|s| s == id)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn actions(&self, s: usize) -> &[Action] {
        &self.actions[s]
    }

    pub fn action_index(&self, s: usize, id: &str) -> Option<usize> {
        self.actions[s].iter().position(|a| a.id == id)
    }

    /// Every transition row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.actions
            .iter()
            .flatten()
            .all(|a| a.transition.iter().filter(|p| !p.is_zero()).count() == 1)
    }

    /// Smallest and largest one-step reward.
    pub fn reward_bounds(&self) -> (Rational, Rational) {
        let mut rewards = self.actions.iter().flatten().map(|a| &a.reward);
        let first = rewards.next().expect("validated MDPs have actions").clone();
        rewards.fold((first.clone(), first), |(lo, hi), r| {
            (lo.min(r.clone()), hi.max(r.clone()))
        })
    }

    /// Number of pure stationary policies.
    pub fn pure_policy_count(&self) -> u128 {
        self.actions.iter().map(|a| a.len() as u128).product()
    }

    /// All pure stationary choices in lexicographic order (first state varies slowest).
    pub fn pure_policies(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let radix: Vec<usize> = self.actions.iter().map(Vec::len).collect();
        let total = self.pure_policy_count() as usize;
        (0..total).map(move |mut code| {
            let mut choice = vec![0; radix.len()];
            for s in (0..radix.len()).rev() {
                choice[s] = code % radix[s];
                code /= radix[s];
            }
            choice
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("the MDP has no states")]
    NoStates,
    #[error("no initial state declared")]
    NoInitial,
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("state `{state}` declares action `{action}` twice")]
    DuplicateAction { state: String, action: String },
    #[error("unknown state `{id}` referenced by {context}")]
    UnknownState { id: String, context: String },
    #[error("state `{0}` has no actions")]
    MissingAction(String),
    #[error("transition row of ({state}, {action}) sums to {sum}, not 1")]
    RowSumError {
        state: String,
        action: String,
        sum: String,
    },
    #[error("negative probability {value} in ({state}, {action}) towards `{target}`")]
    NegativeProbability {
        state: String,
        action: String,
        target: String,
        value: String,
    },
}

/// Every invariant violation found, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

#[derive(Debug, Clone)]
struct DraftAction {
    id: String,
    reward: Rational,
    transition: Vec<(String, Rational)>,
}

/// String-keyed MDP description; `build` resolves and validates it.
#[derive(Debug, Clone, Default)]
pub struct MdpBuilder {
    initial: Option<String>,
    states: Vec<(String, Vec<DraftAction>)>,
}

impl MdpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn initial(&mut self, id: impl Into<String>) -> &mut Self {
        self.initial = Some(id.into());
        self
    }

    /// Declares a state; actions may be added before or after.
    pub fn state(&mut self, id: impl Into<String>) -> &mut Self {
        self.states.push((id.into(), Vec::new()));
        self
    }

    /// Adds an action to the most recently declared state with that id.
    pub fn action(
        &mut self,
        state: &str,
        id: impl Into<String>,
        reward: Rational,
        transition: Vec<(String, Rational)>,
    ) -> &mut Self {
        let action = DraftAction {
            id: id.into(),
            reward,
            transition,
        };
        match self.states.iter_mut().rev().find(|(s, _)| s == state) {
            Some((_, actions)) => actions.push(action),
            None => self.states.push((state.to_string(), vec![action])),
        }
        self
    }

    /// Deterministic action moving to `target`.
    pub fn goto(
        &mut self,
        state: &str,
        id: impl Into<String>,
        reward: Rational,
        target: &str,
    ) -> &mut Self {
        self.action(
            state,
            id,
            reward,
            vec![(target.to_string(), Rational::one())],
        )
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        self.resolve().map(|_| ())
    }

    pub fn build(&self) -> Result<Mdp, ValidationReport> {
        self.resolve()
    }

    fn resolve(&self) -> Result<Mdp, ValidationReport> {
        let mut violations = Vec::new();
        if self.states.is_empty() {
            violations.push(Violation::NoStates);
        }
        let mut index = HashMap::new();
        for (i, (id, _)) in self.states.iter().enumerate() {
            if index.insert(id.as_str(), i).is_some() {
                violations.push(Violation::DuplicateState(id.clone()));
            }
        }
        let initial = match &self.initial {
            None => {
                violations.push(Violation::NoInitial);
                None
            }
            Some(id) => {
                let found = index.get(id.as_str()).copied();
                if found.is_none() {
                    violations.push(Violation::UnknownState {
                        id: id.clone(),
                        context: "initial".into(),
                    });
                }
                found
            }
        };
        let n = self.states.len();
        let mut actions = Vec::with_capacity(n);
        for (state, drafts) in &self.states {
            if drafts.is_empty() {
                violations.push(Violation::MissingAction(state.clone()));
            }
            let mut resolved = Vec::with_capacity(drafts.len());
            for (k, draft) in drafts.iter().enumerate() {
                if drafts[..k].iter().any(|d| d.id == draft.id) {
                    violations.push(Violation::DuplicateAction {
                        state: state.clone(),
                        action: draft.id.clone(),
                    });
                }
                let mut row = vec![Rational::zero(); n];
                let mut sum = Rational::zero();
                for (target, p) in &draft.transition {
                    if p.is_negative() {
                        violations.push(Violation::NegativeProbability {
                            state: state.clone(),
                            action: draft.id.clone(),
                            target: target.clone(),
                            value: render(p),
                        });
                    }
                    sum += p;
                    match index.get(target.as_str()) {
                        Some(&z) => row[z] += p,
                        None => violations.push(Violation::UnknownState {
                            id: target.clone(),
                            context: format!("({state}, {})", draft.id),
                        }),
                    }
                }
                if !sum.is_one() {
                    violations.push(Violation::RowSumError {
                        state: state.clone(),
                        action: draft.id.clone(),
                        sum: render(&sum),
                    });
                }
                resolved.push(Action {
                    id: draft.id.clone(),
                    reward: draft.reward.clone(),
                    transition: row,
                });
            }
            actions.push(resolved);
        }
        if !violations.is_empty() {
            return Err(ValidationReport { violations });
        }
        Ok(Mdp {
            state_ids: self.states.iter().map(|(s, _)| s.clone()).collect(),
            initial: initial.expect("checked above"),
            actions,
        })
    }
}
