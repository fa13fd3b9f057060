use std::collections::HashMap;

use num_traits::Zero;
use thiserror::Error;

use super::strategy::{Choice, MarkovRule};
use super::Mdp;
use crate::charge::{CValue, ChargeError, ChargeExpr};
use crate::rational::Rational;
use crate::stream::RationalStream;

pub const DEFAULT_HORIZON: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("state distribution did not recur within {0} stages")]
    CycleNotFound(usize),
    #[error(transparent)]
    Charge(#[from] ChargeError),
}

/// Expected stage rewards `t ↦ 𝔼[r_t]` under a periodic Markov rule.
///
/// The state distribution is propagated exactly; the stream is closed off as
/// soon as a `(cyclic phase, distribution)` pair repeats.
pub fn expected_reward_stream<R: MarkovRule + ?Sized>(
    mdp: &Mdp,
    rule: &R,
    max_horizon: usize,
) -> Result<RationalStream, EvalError> {
    let n = mdp.num_states();
    let mut dist = vec![Rational::zero(); n];
    dist[mdp.initial()] = Rational::from_integer(1.into());
    let mut rewards: Vec<Rational> = Vec::new();
    let mut seen: HashMap<(usize, Vec<Rational>), usize> = HashMap::new();
    let preperiod = rule.preperiod();
    let mut t = 1;
    loop {
        let phase = rule.phase(t);
        if t > preperiod {
            match seen.entry((phase, dist.clone())) {
                std::collections::hash_map::Entry::Occupied(first) => {
                    let start = *first.get();
                    let cycle = rewards.split_off(start - 1);
                    return Ok(RationalStream::new(rewards, cycle).expect("cycle is nonempty"));
                }
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(t);
                }
            }
        }
        if t > max_horizon {
            return Err(EvalError::CycleNotFound(max_horizon));
        }
        let (reward, next) = step(mdp, rule, phase, &dist);
        rewards.push(reward);
        dist = next;
        t += 1;
    }
}

fn step<R: MarkovRule + ?Sized>(
    mdp: &Mdp,
    rule: &R,
    phase: usize,
    dist: &[Rational],
) -> (Rational, Vec<Rational>) {
    let mut reward = Rational::zero();
    let mut next = vec![Rational::zero(); dist.len()];
    let mut apply = |weight: &Rational, a: usize, s: usize| {
        let action = &mdp.actions(s)[a];
        reward += weight * &action.reward;
        for (z, p) in action.transition.iter().enumerate() {
            if !p.is_zero() {
                next[z] += weight * p;
            }
        }
    };
    for (s, mass) in dist.iter().enumerate() {
        if mass.is_zero() {
            continue;
        }
        match rule.choice(phase, s) {
            Choice::Pure(a) => apply(mass, a, s),
            Choice::Mixed(probs) => {
                for (a, p) in probs.iter().enumerate() {
                    if !p.is_zero() {
                        apply(&(mass * p), a, s);
                    }
                }
            }
        }
    }
    (reward, next)
}

/// `∫ 𝔼[r_t] μ(dt)`.
pub fn payoff<R: MarkovRule + ?Sized>(
    mdp: &Mdp,
    rule: &R,
    mu: &ChargeExpr,
    max_horizon: usize,
) -> Result<CValue, EvalError> {
    let stream = expected_reward_stream(mdp, rule, max_horizon)?;
    Ok(mu.integrate(&stream)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{MdpBuilder, PureSchedule, StationaryStrategy};
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

    fn stationary_q(mdp: &Mdp, q: Rational) -> StationaryStrategy {
        let rest = int(1) - &q;
        StationaryStrategy::new(mdp, vec![vec![q, rest], vec![int(1)], vec![int(1)]]).unwrap()
    }

    #[test]
    fn always_top_alternates() {
        let mdp = even_or_odd();
        let s = expected_reward_stream(&mdp, &PureSchedule::stationary(vec![0, 0, 0]), 64).unwrap();
        assert_eq!(s.preperiod(), &[] as &[Rational]);
        assert_eq!(s.cycle(), &[int(1), int(0)]);
    }

    #[test]
    fn randomized_stationary_matches_hand_iteration() {
        let mdp = even_or_odd();
        let q = ratio(1, 3);
        let s = expected_reward_stream(&mdp, &stationary_q(&mdp, q.clone()), 64).unwrap();
        // stages 1..4 by hand: q, 1 − q, q, 1 − q
        let hand = [q.clone(), int(1) - &q, q.clone(), int(1) - &q];
        for (t, v) in hand.iter().enumerate() {
            assert_eq!(s.at(t + 1), v);
        }
        assert_eq!(s.cycle().len(), 2);
    }

    #[test]
    fn stochastic_chain_without_recurrence() {
        // the distribution converges to (1/2, 1/2) but never reaches it exactly
        let mut b = MdpBuilder::new();
        b.initial("a")
            .action(
                "a",
                "x",
                int(1),
                vec![("a".into(), ratio(1, 3)), ("b".into(), ratio(2, 3))],
            )
            .action(
                "b",
                "y",
                int(0),
                vec![("a".into(), ratio(2, 3)), ("b".into(), ratio(1, 3))],
            );
        let mdp = b.build().unwrap();
        let err =
            expected_reward_stream(&mdp, &PureSchedule::stationary(vec![0, 0]), 50).unwrap_err();
        assert_eq!(err, EvalError::CycleNotFound(50));
    }

    #[test]
    fn distribution_mass_is_conserved() {
        let mut b = MdpBuilder::new();
        b.initial("a")
            .action(
                "a",
                "x",
                int(1),
                vec![("a".into(), ratio(1, 2)), ("b".into(), ratio(1, 2))],
            )
            .goto("b", "y", int(0), "b");
        let mdp = b.build().unwrap();
        let rule = PureSchedule::stationary(vec![0, 0]);
        let mut dist = vec![int(1), int(0)];
        for t in 1..20 {
            let (_, next) = step(&mdp, &rule, rule.phase(t), &dist);
            assert_eq!(next.iter().sum::<Rational>(), int(1));
            dist = next;
        }
    }

    #[test]
    fn sigma_three_payoff() {
        let mdp = even_or_odd();
        let mu = crate::syntax::parse_charge("mix(1/2:restrict(frequency, odds), 1/2:dyadiclimit)")
            .unwrap();
        // B in state 1 at phase 7 of 8, T elsewhere
        let choices = (1..=8).map(|ph| vec![usize::from(ph == 7), 0, 0]).collect();
        let sigma3 = PureSchedule::new(&mdp, 0, 8, choices).unwrap();
        assert_eq!(
            payoff(&mdp, &sigma3, &mu, DEFAULT_HORIZON).unwrap(),
            CValue::Exact(ratio(7, 8))
        );
        let half = payoff(&mdp, &stationary_q(&mdp, ratio(1, 3)), &mu, DEFAULT_HORIZON).unwrap();
        assert_eq!(half, CValue::Exact(ratio(1, 2)));
    }
}
