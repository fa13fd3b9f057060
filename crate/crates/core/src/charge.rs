//! Charges (finitely additive probabilities on ℕ) and integration of
//! eventually periodic streams against them.
//!
//! Every charge here is evaluated only on the algebra of eventually periodic
//! sets, where the frequency charge is just natural density.
//!
//! The dyadic limit is an accumulation point of the charges
//! `μₙ(W) = 2ⁿ·φ(W ∩ {k·2ⁿ})` and is not pinned down uniquely. For a stream
//! `f` the sequence `n ↦ μₙ(f)` is eventually periodic; we compute it exactly
//! and report the values of its eventual cycle, which are exactly its
//! accumulation points. Each query is answered on its own: no claim is made
//! that a single accumulation point realizes candidates of different
//! queries simultaneously.
//!
//! For eventually periodic streams the cycle has length one: once `2ⁿ`
//! absorbs the power of two in the period, `k·2ⁿ` sweeps the same residues
//! uniformly for every larger `n`. Every value computed here is exact.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{powu, render, Rational};
use crate::sets::EventuallyPeriodicSet;
use crate::stream::RationalStream;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChargeError {
    #[error("geometric discount {0} must lie strictly between 0 and 1")]
    InvalidDiscount(String),
    #[error("point masses live on stages ≥ 1")]
    ZeroStage,
    #[error("a mixture needs at least one component")]
    EmptyMix,
    #[error("mixture weights must be positive, got {0}")]
    NonPositiveWeight(String),
    #[error("mixture weights sum to {0}, not 1")]
    WeightSum(String),
    #[error("cannot condition on {set}: base charge gives it {value}")]
    IllFormedRestrict { set: String, value: String },
    #[error("conditioning a charge whose value is ambiguous ({0})")]
    AmbiguousBase(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChargeExpr {
    /// Natural density.
    Frequency,
    /// Stage `t` has mass `(1 − β)·β^(t−1)`.
    Geometric(Rational),
    PointMass(usize),
    /// `W ↦ base(W ∩ A) / base(A)`.
    Restrict(Box<ChargeExpr>, EventuallyPeriodicSet),
    /// An accumulation point of `μₙ(W) = 2ⁿ·φ(W ∩ {k·2ⁿ})`.
    DyadicLimit,
    /// Convex combination; weights are positive and sum to 1.
    Mix(Vec<(Rational, ChargeExpr)>),
}

/// The value of a charge on a query: a single number, or the finite set of
/// values reachable by different accumulation-point selections.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CValue {
    Exact(Rational),
    /// Always at least two candidates.
    Ambiguous(BTreeSet<Rational>),
}

impl CValue {
    /// Collapses a one-element candidate set to `Exact`. Panics on an empty set.
    pub fn from_candidates(candidates: BTreeSet<Rational>) -> Self {
        assert!(
            !candidates.is_empty(),
            "a value needs at least one candidate"
        );
        if candidates.len() == 1 {
            CValue::Exact(candidates.into_iter().next().unwrap())
        } else {
            CValue::Ambiguous(candidates)
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            CValue::Exact(q) => Some(q),
            CValue::Ambiguous(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CValue::Exact(_))
    }

    pub fn candidates(&self) -> Box<dyn Iterator<Item = &Rational> + '_> {
        match self {
            CValue::Exact(q) => Box::new(std::iter::once(q)),
            CValue::Ambiguous(set) => Box::new(set.iter()),
        }
    }

    pub fn min(&self) -> &Rational {
        self.candidates().min().expect("nonempty")
    }

    pub fn max(&self) -> &Rational {
        self.candidates().max().expect("nonempty")
    }

    pub fn scale(&self, w: &Rational) -> Self {
        Self::from_candidates(self.candidates().map(|c| c * w).collect())
    }

    /// Sum over independent selections (Minkowski sum of candidate sets).
    pub fn plus(&self, other: &Self) -> Self {
        Self::from_candidates(
            self.candidates()
                .flat_map(|a| other.candidates().map(move |b| a + b))
                .collect(),
        )
    }
}

impl fmt::Display for CValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CValue::Exact(q) => f.write_str(&render(q)),
            CValue::Ambiguous(set) => {
                let items: Vec<String> = set.iter().map(render).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

impl ChargeExpr {
    pub fn geometric(beta: Rational) -> Result<Self, ChargeError> {
        let c = ChargeExpr::Geometric(beta);
        c.validate()?;
        Ok(c)
    }

    pub fn point_mass(t: usize) -> Result<Self, ChargeError> {
        let c = ChargeExpr::PointMass(t);
        c.validate()?;
        Ok(c)
    }

    pub fn restrict(base: ChargeExpr, set: EventuallyPeriodicSet) -> Result<Self, ChargeError> {
        let c = ChargeExpr::Restrict(Box::new(base), set);
        c.validate()?;
        Ok(c)
    }

    pub fn mix(parts: Vec<(Rational, ChargeExpr)>) -> Result<Self, ChargeError> {
        let c = ChargeExpr::Mix(parts);
        c.validate()?;
        Ok(c)
    }

    /// Checks every well-formedness rule, recursively.
    pub fn validate(&self) -> Result<(), ChargeError> {
        match self {
            ChargeExpr::Frequency | ChargeExpr::DyadicLimit => Ok(()),
            ChargeExpr::Geometric(beta) => {
                if beta.is_positive() && *beta < Rational::one() {
                    Ok(())
                } else {
                    Err(ChargeError::InvalidDiscount(render(beta)))
                }
            }
            ChargeExpr::PointMass(t) => {
                if *t >= 1 {
                    Ok(())
                } else {
                    Err(ChargeError::ZeroStage)
                }
            }
            ChargeExpr::Restrict(base, set) => {
                base.validate()?;
                base.conditioning_mass(set).map(|_| ())
            }
            ChargeExpr::Mix(parts) => {
                if parts.is_empty() {
                    return Err(ChargeError::EmptyMix);
                }
                let mut total = Rational::zero();
                for (w, c) in parts {
                    if !w.is_positive() {
                        return Err(ChargeError::NonPositiveWeight(render(w)));
                    }
                    c.validate()?;
                    total += w;
                }
                if total.is_one() {
                    Ok(())
                } else {
                    Err(ChargeError::WeightSum(render(&total)))
                }
            }
        }
    }

    /// `base(A)` for a conditional charge; must be an exact positive number.
    fn conditioning_mass(&self, set: &EventuallyPeriodicSet) -> Result<Rational, ChargeError> {
        let mass = self.value(set)?;
        match mass.exact() {
            Some(q) if q.is_positive() => Ok(q.clone()),
            _ => Err(ChargeError::IllFormedRestrict {
                set: set.to_string(),
                value: mass.to_string(),
            }),
        }
    }

    /// Assigns zero to every singleton.
    pub fn is_diffuse(&self) -> bool {
        match self {
            ChargeExpr::Frequency | ChargeExpr::DyadicLimit => true,
            ChargeExpr::Geometric(_) | ChargeExpr::PointMass(_) => false,
            ChargeExpr::Restrict(base, _) => base.is_diffuse(),
            ChargeExpr::Mix(parts) => parts.iter().all(|(_, c)| c.is_diffuse()),
        }
    }

    pub fn contains_dyadic_limit(&self) -> bool {
        match self {
            ChargeExpr::DyadicLimit => true,
            ChargeExpr::Restrict(base, _) => base.contains_dyadic_limit(),
            ChargeExpr::Mix(parts) => parts.iter().any(|(_, c)| c.contains_dyadic_limit()),
            _ => false,
        }
    }

    /// The charge of a set.
    pub fn value(&self, set: &EventuallyPeriodicSet) -> Result<CValue, ChargeError> {
        Ok(match self {
            ChargeExpr::Frequency => CValue::Exact(set.density()),
            ChargeExpr::Geometric(beta) => CValue::Exact(geometric_mass(beta, set)),
            ChargeExpr::PointMass(t) => CValue::Exact(if set.contains(*t) {
                Rational::one()
            } else {
                Rational::zero()
            }),
            ChargeExpr::Restrict(base, cond) => {
                let mass = base.conditioning_mass(cond)?;
                let inside = base.value(&set.intersect(cond))?;
                match inside {
                    CValue::Exact(q) => CValue::Exact(q / mass),
                    amb => return Err(ChargeError::AmbiguousBase(amb.to_string())),
                }
            }
            ChargeExpr::DyadicLimit => dyadic_value(&RationalStream::indicator(set)),
            ChargeExpr::Mix(parts) => {
                let mut acc = CValue::Exact(Rational::zero());
                for (w, c) in parts {
                    acc = acc.plus(&c.value(set)?.scale(w));
                }
                acc
            }
        })
    }

    /// `∫ f dμ` for an eventually periodic bounded stream.
    pub fn integrate(&self, f: &RationalStream) -> Result<CValue, ChargeError> {
        Ok(match self {
            ChargeExpr::Frequency | ChargeExpr::Geometric(_) | ChargeExpr::PointMass(_) => {
                // simple function over the level sets
                let mut total = Rational::zero();
                for (c, level) in f.level_sets() {
                    if c.is_zero() {
                        continue;
                    }
                    let mass = self.value(&level)?;
                    total += c * mass.exact().expect("countably additive parts are exact");
                }
                CValue::Exact(total)
            }
            ChargeExpr::Restrict(base, cond) => {
                let mass = base.conditioning_mass(cond)?;
                match base.integrate(&f.restrict(cond))? {
                    CValue::Exact(q) => CValue::Exact(q / mass),
                    amb => return Err(ChargeError::AmbiguousBase(amb.to_string())),
                }
            }
            ChargeExpr::DyadicLimit => dyadic_value(f),
            ChargeExpr::Mix(parts) => {
                let mut acc = CValue::Exact(Rational::zero());
                for (w, c) in parts {
                    acc = acc.plus(&c.integrate(f)?.scale(w));
                }
                acc
            }
        })
    }

    /// Whether the value on `set` sits between the lower and upper
    /// asymptotic frequencies; both equal the density on this algebra.
    pub fn sandwich_check(&self, set: &EventuallyPeriodicSet) -> Result<bool, ChargeError> {
        let density = set.density();
        Ok(self.value(set)?.candidates().all(|c| *c == density))
    }
}

/// `Σ_{t∈S} (1 − β)·β^(t−1)` in closed form.
fn geometric_mass(beta: &Rational, set: &EventuallyPeriodicSet) -> Rational {
    let one = Rational::one();
    let weight = |t: usize| (&one - beta) * powu(beta, t - 1);
    let m = set.preperiod();
    let p = set.period();
    let head: Rational = (1..=m).filter(|&t| set.contains(t)).map(weight).sum();
    let block: Rational = (m + 1..=m + p)
        .filter(|&t| set.contains(t))
        .map(weight)
        .sum();
    head + block / (&one - powu(beta, p))
}

/// The sequence `n ↦ μₙ(f)` for `n ≥ 1`, as an eventually periodic stream
/// indexed by `n`.
///
/// `μₙ(f)` is the Cesàro mean of `k ↦ f(k·2ⁿ)`. Contracting by 2 maps the
/// finite set of canonical streams derived from `f` into itself, so the
/// sequence of contracted streams repeats exactly.
pub fn dyadic_sequence(f: &RationalStream) -> RationalStream {
    let mut seen: HashMap<RationalStream, usize> = HashMap::new();
    let mut values = Vec::new();
    let mut current = f.contract(2);
    loop {
        if let Some(&first) = seen.get(&current) {
            let cycle = values.split_off(first);
            return RationalStream::new(values, cycle).expect("cycle is nonempty");
        }
        seen.insert(current.clone(), values.len());
        values.push(current.cycle_mean());
        current = current.contract(2);
    }
}

fn dyadic_value(f: &RationalStream) -> CValue {
    CValue::from_candidates(dyadic_sequence(f).cycle().iter().cloned().collect())
}

/// The Cesàro mean of `n ↦ μₙ(f)`: the value of the one accumulation point
/// obtained by averaging the `μₙ` with a frequency charge over `n`.
pub fn dyadic_average(f: &RationalStream) -> Rational {
    dyadic_sequence(f).cycle_mean()
}

/// Renders in the charge expression grammar.
impl fmt::Display for ChargeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChargeExpr::Frequency => f.write_str("frequency"),
            ChargeExpr::Geometric(beta) => write!(f, "geometric({})", render(beta)),
            ChargeExpr::PointMass(t) => write!(f, "pointmass({t})"),
            ChargeExpr::Restrict(base, set) => write!(f, "restrict({base}, {set})"),
            ChargeExpr::DyadicLimit => f.write_str("dyadiclimit"),
            ChargeExpr::Mix(parts) => {
                let items: Vec<String> = parts
                    .iter()
                    .map(|(w, c)| format!("{}:{}", render(w), c))
                    .collect();
                write!(f, "mix({})", items.join(", "))
            }
        }
    }
}
