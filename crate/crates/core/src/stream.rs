//! Eventually periodic sequences of exact rationals, indexed by stage `t ≥ 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::rational::{render, Rational};
use crate::sets::EventuallyPeriodicSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("a stream needs a nonempty cycle")]
pub struct EmptyCycle;

/// `preperiod` is played once, then `cycle` repeats forever.
///
/// Canonical: the cycle is of minimal length and the preperiod is as short
/// as possible given that cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalStream {
    preperiod: Vec<Rational>,
    cycle: Vec<Rational>,
}

impl RationalStream {
    pub fn new(preperiod: Vec<Rational>, cycle: Vec<Rational>) -> Result<Self, EmptyCycle> {
        if cycle.is_empty() {
            return Err(EmptyCycle);
        }
        Ok(Self::canonical(preperiod, cycle))
    }

    pub fn constant(value: Rational) -> Self {
        Self::canonical(Vec::new(), vec![value])
    }

    /// 1 on members of `set`, 0 elsewhere.
    pub fn indicator(set: &EventuallyPeriodicSet) -> Self {
        Self::from_fn(set.preperiod(), set.period(), |t| {
            if set.contains(t) {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        })
    }

    /// Tabulates `value` assuming it is periodic with `cycle_len` for `t > preperiod_len`.
    pub fn from_fn(
        preperiod_len: usize,
        cycle_len: usize,
        value: impl Fn(usize) -> Rational,
    ) -> Self {
        assert!(cycle_len >= 1);
        let preperiod = (1..=preperiod_len).map(&value).collect();
        let cycle = (preperiod_len + 1..=preperiod_len + cycle_len)
            .map(&value)
            .collect();
        Self::canonical(preperiod, cycle)
    }

    fn canonical(preperiod: Vec<Rational>, cycle: Vec<Rational>) -> Self {
        let (preperiod, cycle) = canonical_cycle(preperiod, cycle);
        Self { preperiod, cycle }
    }

    pub fn preperiod(&self) -> &[Rational] {
        &self.preperiod
    }

    pub fn cycle(&self) -> &[Rational] {
        &self.cycle
    }

    /// Value at stage `t ≥ 1`. Panics on `t == 0`.
    pub fn at(&self, t: usize) -> &Rational {
        assert!(t >= 1, "stages start at 1");
        let m = self.preperiod.len();
        if t <= m {
            &self.preperiod[t - 1]
        } else {
            &self.cycle[(t - m - 1) % self.cycle.len()]
        }
    }

    /// Average over one cycle, i.e. the Cesàro limit of the stream.
    pub fn cycle_mean(&self) -> Rational {
        let sum: Rational = self.cycle.iter().sum();
        sum / Rational::from_integer(BigInt::from(self.cycle.len()))
    }

    pub fn min(&self) -> &Rational {
        self.preperiod
            .iter()
            .chain(&self.cycle)
            .min()
            .expect("cycle is nonempty")
    }

    pub fn max(&self) -> &Rational {
        self.preperiod
            .iter()
            .chain(&self.cycle)
            .max()
            .expect("cycle is nonempty")
    }

    /// Each distinct value with the set of stages where it occurs. The sets
    /// partition ℕ.
    pub fn level_sets(&self) -> Vec<(Rational, EventuallyPeriodicSet)> {
        let mut values: BTreeMap<&Rational, ()> = BTreeMap::new();
        for v in self.preperiod.iter().chain(&self.cycle) {
            values.insert(v, ());
        }
        let m = self.preperiod.len();
        let p = self.cycle.len();
        values
            .into_keys()
            .map(|c| {
                // tail membership keyed on absolute residue: stage t > m maps to cycle[(t - m - 1) % p]
                let set = EventuallyPeriodicSet::from_fn(m, p, |t| self.at(t) == c);
                (c.clone(), set)
            })
            .collect()
    }

    /// Stages where the stream is strictly above `threshold`.
    pub fn stages_above(&self, threshold: &Rational) -> EventuallyPeriodicSet {
        EventuallyPeriodicSet::from_fn(self.preperiod.len(), self.cycle.len(), |t| {
            self.at(t) > threshold
        })
    }

    /// Pointwise combination of two streams.
    pub fn zip_with(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let m = self.preperiod.len().max(other.preperiod.len());
        let p = num_integer::lcm(self.cycle.len(), other.cycle.len());
        Self::from_fn(m, p, |t| op(self.at(t), other.at(t)))
    }

    pub fn map(&self, op: impl Fn(&Rational) -> Rational) -> Self {
        Self::from_fn(self.preperiod.len(), self.cycle.len(), |t| op(self.at(t)))
    }

    /// Zero outside `set`.
    pub fn restrict(&self, set: &EventuallyPeriodicSet) -> Self {
        let m = self.preperiod.len().max(set.preperiod());
        let p = num_integer::lcm(self.cycle.len(), set.period());
        Self::from_fn(m, p, |t| {
            if set.contains(t) {
                self.at(t).clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// `k ↦ f(k·d)`. Panics if `d == 0`.
    pub fn contract(&self, d: usize) -> Self {
        assert!(d >= 1);
        Self::from_fn(self.preperiod.len() / d, self.cycle.len(), |k| {
            self.at(k * d).clone()
        })
    }

    /// Pointwise `≤`, checked on the preperiods plus one common cycle.
    pub fn le(&self, other: &Self) -> bool {
        let m = self.preperiod.len().max(other.preperiod.len());
        let p = num_integer::lcm(self.cycle.len(), other.cycle.len());
        (1..=m + p).all(|t| self.at(t) <= other.at(t))
    }
}

/// Shrinks `(preperiod, cycle)` to the minimal cycle, then absorbs trailing
/// preperiod entries that already agree with that cycle.
pub(crate) fn canonical_cycle<T: PartialEq>(
    mut preperiod: Vec<T>,
    mut cycle: Vec<T>,
) -> (Vec<T>, Vec<T>) {
    let len = cycle.len();
    let minimal = (1..=len)
        .filter(|d| len.is_multiple_of(*d))
        .find(|&d| (0..len).all(|i| cycle[i] == cycle[i % d]))
        .unwrap_or(len);
    cycle.truncate(minimal);
    while preperiod
        .last()
        .is_some_and(|last| *last == cycle[minimal - 1])
    {
        preperiod.pop();
        cycle.rotate_right(1);
    }
    (preperiod, cycle)
}

/// Renders as the stream literal `stream([pre];[cycle])`.
impl fmt::Display for RationalStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Rational]| v.iter().map(render).collect::<Vec<_>>().join(",");
        write!(
            f,
            "stream([{}];[{}])",
            join(&self.preperiod),
            join(&self.cycle)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        let s = RationalStream::new(vec![int(1), int(0)], vec![int(1), int(0), int(1), int(0)])
            .unwrap();
        assert!(s.preperiod().is_empty());
        assert_eq!(s.cycle(), &[int(1), int(0)]);
        let s = RationalStream::new(vec![int(0), int(3)], vec![int(2), int(3)]).unwrap();
        assert_eq!(s.preperiod(), &[int(0)]);
        assert_eq!(s.cycle(), &[int(3), int(2)]);
        assert_eq!(RationalStream::new(vec![], vec![]), Err(EmptyCycle));
    }

    #[test]
    fn indexing() {
        let s = RationalStream::new(vec![int(0)], vec![ratio(3, 2)]).unwrap();
        assert_eq!(s.at(1), &int(0));
        assert_eq!(s.at(50), &ratio(3, 2));
        assert_eq!(s.cycle_mean(), ratio(3, 2));
    }

    #[test]
    fn level_sets_partition() {
        let s = RationalStream::new(vec![int(5)], vec![int(1), int(0), int(0)]).unwrap();
        let levels = s.level_sets();
        assert_eq!(levels.len(), 3);
        for t in 1..40 {
            let hits: Vec<_> = levels.iter().filter(|(_, set)| set.contains(t)).collect();
            assert_eq!(hits.len(), 1);
            assert_eq!(&hits[0].0, s.at(t));
        }
    }

    #[test]
    fn display() {
        let s = RationalStream::new(vec![int(0)], vec![ratio(3, 2)]).unwrap();
        assert_eq!(s.to_string(), "stream([0];[3/2])");
    }

    fn arb_stream() -> impl Strategy<Value = RationalStream> {
        let q = (-3i64..4, 1i64..4).prop_map(|(n, d)| ratio(n, d));
        (
            prop::collection::vec(q.clone(), 0..5),
            prop::collection::vec(q, 1..7),
        )
            .prop_map(|(p, c)| RationalStream::new(p, c).unwrap())
    }

    proptest! {
        #[test]
        fn canonical_preserves_values(pre in prop::collection::vec(0i64..3, 0..5), cyc in prop::collection::vec(0i64..3, 1..7)) {
            let raw_pre: Vec<_> = pre.iter().map(|&v| int(v)).collect();
            let raw_cyc: Vec<_> = cyc.iter().map(|&v| int(v)).collect();
            let s = RationalStream::new(raw_pre.clone(), raw_cyc.clone()).unwrap();
            for t in 1..=pre.len() + 3 * cyc.len() {
                let expect = if t <= pre.len() { &raw_pre[t - 1] } else { &raw_cyc[(t - pre.len() - 1) % cyc.len()] };
                prop_assert_eq!(s.at(t), expect);
            }
            prop_assert_eq!(RationalStream::new(s.preperiod().to_vec(), s.cycle().to_vec()).unwrap(), s);
        }

        #[test]
        fn contract_semantics(s in arb_stream(), d in 1usize..6) {
            let c = s.contract(d);
            for k in 1..30 {
                prop_assert_eq!(c.at(k), s.at(k * d));
            }
        }
    }
}
