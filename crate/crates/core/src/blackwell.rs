//! Blackwell-optimal pure stationary policies by symbolic policy iteration.
//!
//! Values are rational functions of the discount factor `b`; policies are
//! compared on a left neighbourhood of `b = 1` with [`RationalFunction::sign_near_one`].

use num_traits::{One, Zero};
use thiserror::Error;

use crate::mdp::{Mdp, StationaryStrategy};
use crate::poly::{Polynomial, RationalFunction, Sign};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlackwellError {
    #[error("(1 - b)·v has a pole at b = 1 in state `{0}`")]
    PoleAtOne(String),
}

fn discount() -> RationalFunction {
    RationalFunction::from_poly(Polynomial::var())
}

/// Solves `A x = y` over the field of rational functions. `A` must be
/// nonsingular.
fn solve(mut a: Vec<Vec<RationalFunction>>, mut y: Vec<RationalFunction>) -> Vec<RationalFunction> {
    let n = y.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("singular system");
        a.swap(col, pivot);
        y.swap(col, pivot);
        let inv = &RationalFunction::one() / &a[col][col];
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            let pivot_row = a[col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = &*x - &(&factor * p);
            }
            let delta = &factor * &y[col];
            y[r] = &y[r] - &delta;
        }
    }
    (0..n).map(|i| &y[i] / &a[i][i]).collect()
}

/// `v_π(b)` per state: the solution of `v = r_π + b·P_π·v`.
///
/// Mixed strategies are accepted; `r_π` and `P_π` are then the averaged
/// rewards and transitions.
pub fn discounted_value(mdp: &Mdp, pi: &StationaryStrategy) -> Vec<RationalFunction> {
    let n = mdp.num_states();
    let b = discount();
    let mut a = vec![vec![RationalFunction::zero(); n]; n];
    let mut y = vec![RationalFunction::zero(); n];
    for s in 0..n {
        let mut reward = Rational::zero();
        let mut row = vec![Rational::zero(); n];
        for (action, p) in mdp.actions(s).iter().zip(pi.probs(s)) {
            if p.is_zero() {
                continue;
            }
            reward += p * &action.reward;
            for (z, q) in action.transition.iter().enumerate() {
                row[z] += p * q;
            }
        }
        y[s] = RationalFunction::constant(reward);
        for z in 0..n {
            let identity = if z == s {
                RationalFunction::one()
            } else {
                RationalFunction::zero()
            };
            a[s][z] = &identity - &(&b * &RationalFunction::constant(row[z].clone()));
        }
    }
    solve(a, y)
}

/// `r(s,a) + b·Σ_z P(z|s,a)·v(z)`.
pub fn action_value(mdp: &Mdp, s: usize, a: usize, v: &[RationalFunction]) -> RationalFunction {
    let action = &mdp.actions(s)[a];
    let mut expected = RationalFunction::zero();
    for (z, p) in action.transition.iter().enumerate() {
        if !p.is_zero() {
            expected = &expected + &(&RationalFunction::constant(p.clone()) * &v[z]);
        }
    }
    &RationalFunction::constant(action.reward.clone()) + &(&discount() * &expected)
}

/// Policy iteration from the all-first-action policy. Every state with an
/// improving action switches to its lowest-indexed one simultaneously.
pub fn blackwell_policy(mdp: &Mdp) -> StationaryStrategy {
    let mut choice = vec![0usize; mdp.num_states()];
    loop {
        let pi = StationaryStrategy::pure(mdp, &choice).expect("indices in range");
        let v = discounted_value(mdp, &pi);
        let mut improved = false;
        for s in 0..mdp.num_states() {
            let better = (0..mdp.actions(s).len()).find(|&a| {
                a != choice[s]
                    && (&action_value(mdp, s, a, &v) - &v[s]).sign_near_one() == Sign::Positive
            });
            if let Some(a) = better {
                choice[s] = a;
                improved = true;
            }
        }
        if !improved {
            return pi;
        }
    }
}

/// `lim_{b→1⁻} (1 − b)·v_π(b)` per state.
pub fn average_value(mdp: &Mdp, pi: &StationaryStrategy) -> Result<Vec<Rational>, BlackwellError> {
    let one_minus_b =
        RationalFunction::from_poly(Polynomial::new(vec![Rational::one(), -Rational::one()]));
    discounted_value(mdp, pi)
        .iter()
        .enumerate()
        .map(|(s, v)| {
            (&one_minus_b * v)
                .eval(&Rational::one())
                .ok_or_else(|| BlackwellError::PoleAtOne(mdp.state_id(s).to_string()))
        })
        .collect()
}
