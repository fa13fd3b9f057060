//! Eventually periodic subsets of ℕ = {1, 2, …}.
//!
//! A set is stored as a finite prefix of membership bits followed by a
//! periodic tail. Tail membership for `n` is keyed on the absolute residue
//! `n mod period`, which keeps shifts and contractions closed-form.
//!
//! Every constructor returns the canonical form: the period is minimal and,
//! given that period, the prefix is as short as possible. Structural
//! equality is therefore set equality.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("residue {residue} is out of range for period {period}")]
    ResidueOutOfRange { residue: usize, period: usize },
    #[error("0 is not a natural number here; stages start at 1")]
    ZeroIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventuallyPeriodicSet {
    /// Bit `i` is membership of the integer `i + 1`.
    prefix: Vec<bool>,
    period: usize,
    /// Indexed by `n mod period` for every `n > prefix.len()`.
    residues: Vec<bool>,
}

impl EventuallyPeriodicSet {
    /// Builds a set from its raw description and canonicalizes it.
    ///
    /// `prefix_bits[i]` is membership of `i + 1`; every `n > prefix_bits.len()`
    /// is a member iff `n mod period` is listed in `residues`.
    pub fn make(prefix_bits: &[bool], period: usize, residues: &[usize]) -> Result<Self, SetError> {
        if period == 0 {
            return Err(SetError::ZeroPeriod);
        }
        let mut tail = vec![false; period];
        for &r in residues {
            if r >= period {
                return Err(SetError::ResidueOutOfRange { residue: r, period });
            }
            tail[r] = true;
        }
        Ok(Self::canonical(prefix_bits.to_vec(), tail))
    }

    /// Tabulates a membership predicate that is periodic with `period`
    /// (keyed on `n mod period`) for every `n > prefix_len`.
    pub fn from_fn(prefix_len: usize, period: usize, member: impl Fn(usize) -> bool) -> Self {
        assert!(period >= 1, "period must be at least 1");
        let prefix = (1..=prefix_len).map(&member).collect();
        let first = prefix_len + 1;
        let tail = (0..period)
            .map(|r| {
                // smallest n > prefix_len with n ≡ r (mod period)
                let n = first + (r + period - first % period) % period;
                member(n)
            })
            .collect();
        Self::canonical(prefix, tail)
    }

    fn canonical(mut prefix: Vec<bool>, mut residues: Vec<bool>) -> Self {
        let period = residues.len();
        let minimal = divisors(period)
            .into_iter()
            .find(|&d| (0..period).all(|i| residues[i] == residues[i % d]))
            .unwrap_or(period);
        residues.truncate(minimal);
        while let Some(&last) = prefix.last() {
            if last == residues[prefix.len() % minimal] {
                prefix.pop();
            } else {
                break;
            }
        }
        Self {
            prefix,
            period: minimal,
            residues,
        }
    }

    pub fn empty() -> Self {
        Self::canonical(Vec::new(), vec![false])
    }

    pub fn all() -> Self {
        Self::canonical(Vec::new(), vec![true])
    }

    pub fn odds() -> Self {
        Self::canonical(Vec::new(), vec![false, true])
    }

    pub fn evens() -> Self {
        Self::canonical(Vec::new(), vec![true, false])
    }

    /// `{d, 2d, 3d, …}`. Panics if `d == 0`.
    pub fn multiples(d: usize) -> Self {
        assert!(d >= 1, "multiples(0) is undefined");
        Self::from_fn(0, d, |n| n % d == 0)
    }

    /// `{a, a + d, a + 2d, …}`. Panics if `a == 0` or `d == 0`.
    pub fn arithmetic(a: usize, d: usize) -> Self {
        assert!(a >= 1 && d >= 1, "ap(a, d) needs a ≥ 1 and d ≥ 1");
        Self::from_fn(a - 1, d, |n| n >= a && (n - a).is_multiple_of(d))
    }

    /// The single stage `{t}`.
    pub fn singleton(t: usize) -> Self {
        assert!(t >= 1, "stages start at 1");
        Self::from_fn(t, 1, |n| n == t)
    }

    /// Length of the canonical prefix (the preperiod).
    pub fn preperiod(&self) -> usize {
        self.prefix.len()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Residues `r` with `n ≡ r (mod period)` ⇒ `n` is a member, for `n` past the preperiod.
    pub fn residues(&self) -> impl Iterator<Item = usize> + '_ {
        self.residues
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(r, _)| r)
    }

    pub fn prefix_bits(&self) -> &[bool] {
        &self.prefix
    }

    pub fn member(&self, n: usize) -> Result<bool, SetError> {
        if n == 0 {
            return Err(SetError::ZeroIndex);
        }
        Ok(self.contains(n))
    }

    /// Membership for `n ≥ 1`; `0` is never a member.
    pub fn contains(&self, n: usize) -> bool {
        if n == 0 {
            false
        } else if n <= self.prefix.len() {
            self.prefix[n - 1]
        } else {
            self.residues[n % self.period]
        }
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.residues.iter().all(|b| !b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    /// Members in `1..=horizon`, in increasing order.
    pub fn members_up_to(&self, horizon: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=horizon).filter(move |&n| self.contains(n))
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        let prefix_len = self.preperiod().max(other.preperiod());
        let period = self.period.lcm(&other.period);
        Self::from_fn(prefix_len, period, |n| {
            op(self.contains(n), other.contains(n))
        })
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        Self::from_fn(self.preperiod(), self.period, |n| !self.contains(n))
    }

    /// `{n + k : n ∈ S, n + k ≥ 1}`.
    pub fn shift(&self, k: i64) -> Self {
        let m = self.preperiod();
        if k >= 0 {
            let k = k as usize;
            Self::from_fn(m + k, self.period, |n| n > k && self.contains(n - k))
        } else {
            let j = k.unsigned_abs() as usize;
            Self::from_fn(m.saturating_sub(j), self.period, |n| self.contains(n + j))
        }
    }

    /// `{k ≥ 1 : k·d ∈ S}`. Panics if `d == 0`.
    pub fn contract(&self, d: usize) -> Self {
        assert!(d >= 1, "contraction factor must be at least 1");
        Self::from_fn(self.preperiod() / d, self.period, |k| self.contains(k * d))
    }

    /// Natural density `lim |{1..n} ∩ S| / n`, which always exists here.
    pub fn density(&self) -> Rational {
        let count = self.residues.iter().filter(|b| **b).count();
        Rational::new(BigInt::from(count), BigInt::from(self.period))
    }
}

fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Renders in the set expression grammar; the output re-parses to an equal set.
impl fmt::Display for EventuallyPeriodicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("empty");
        }
        if self.prefix.is_empty() {
            if *self == Self::all() {
                return f.write_str("nat");
            }
            if *self == Self::odds() {
                return f.write_str("odds");
            }
            if *self == Self::evens() {
                return f.write_str("evens");
            }
            if self.residues().eq([0]) {
                return write!(f, "multiples({})", self.period);
            }
        }
        let mut terms = Vec::new();
        // maximal runs of members inside the prefix become intervals
        let m = self.prefix.len();
        let mut n = 1;
        while n <= m {
            if self.prefix[n - 1] {
                let start = n;
                while n <= m && self.prefix[n - 1] {
                    n += 1;
                }
                terms.push(format!("ap({start},1) & !ap({n},1)"));
            } else {
                n += 1;
            }
        }
        let first = m + 1;
        for r in self.residues() {
            let n = first + (r + self.period - first % self.period) % self.period;
            terms.push(format!("ap({n},{})", self.period));
        }
        f.write_str(&terms.join(" | "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    type Set = EventuallyPeriodicSet;

    fn agree_up_to(a: &Set, b: &Set, horizon: usize) -> bool {
        (1..=horizon).all(|n| a.contains(n) == b.contains(n))
    }

    fn horizon(sets: &[&Set]) -> usize {
        let period = sets.iter().fold(1usize, |acc, s| acc.lcm(&s.period()));
        let pre: usize = sets.iter().map(|s| s.preperiod()).sum();
        4 * period + pre + 2
    }

    #[test]
    fn make_canonicalizes() {
        let odds = Set::make(&[], 2, &[1]).unwrap();
        assert_eq!(odds, Set::odds());
        assert_eq!((odds.preperiod(), odds.period()), (0, 2));
        assert_eq!(
            Set::make(&[true, false, true], 2, &[1]).unwrap(),
            Set::odds()
        );
        assert_eq!(Set::make(&[], 4, &[1, 3]).unwrap().period(), 2);
    }

    #[test]
    fn make_rejects_bad_input() {
        assert_eq!(
            Set::make(&[], 2, &[2]),
            Err(SetError::ResidueOutOfRange {
                residue: 2,
                period: 2
            })
        );
        assert_eq!(Set::make(&[], 0, &[]), Err(SetError::ZeroPeriod));
    }

    #[test]
    fn arithmetic_progression_of_predecessors() {
        let e3 = Set::arithmetic(7, 8);
        assert_eq!(
            e3.members_up_to(40).collect::<Vec<_>>(),
            vec![7, 15, 23, 31, 39]
        );
        assert_eq!(e3.member(15), Ok(true));
        assert_eq!(e3.preperiod(), 0);
    }

    #[test]
    fn membership() {
        assert_eq!(Set::odds().member(3), Ok(true));
        assert_eq!(Set::multiples(4).member(6), Ok(false));
        assert_eq!(Set::odds().member(0), Err(SetError::ZeroIndex));
    }

    #[test]
    fn boolean_examples() {
        assert_eq!(Set::odds().union(&Set::evens()), Set::all());
        assert_eq!(
            Set::multiples(2).intersect(&Set::multiples(4)),
            Set::multiples(4)
        );
        let d = Set::odds().difference(&Set::arithmetic(7, 8));
        for n in 1..=64 {
            assert_eq!(d.contains(n), n % 2 == 1 && n % 8 != 7, "n = {n}");
        }
        assert_eq!(d.density(), ratio(1, 2) - ratio(1, 8));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(Set::odds().shift(1), Set::evens());
        assert_eq!(Set::multiples(4).shift(-1), Set::arithmetic(3, 4));
        assert_eq!(Set::empty().shift(5), Set::empty());
        assert_eq!(
            Set::all().shift(2).members_up_to(4).collect::<Vec<_>>(),
            vec![3, 4]
        );
        assert_eq!(Set::singleton(3).shift(-5), Set::empty());
    }

    #[test]
    fn contract_examples() {
        assert_eq!(Set::multiples(4).contract(2), Set::multiples(2));
        assert_eq!(Set::odds().contract(2), Set::empty());
        let c = Set::arithmetic(8, 16).contract(8);
        for k in 1..=64 {
            assert_eq!(c.contains(k), Set::arithmetic(8, 16).contains(8 * k));
        }
        assert_eq!(c, Set::odds());
    }

    #[test]
    fn densities() {
        assert_eq!(Set::odds().density(), ratio(1, 2));
        assert_eq!(Set::multiples(8).density(), ratio(1, 8));
        assert_eq!(Set::all().density(), ratio(1, 1));
        assert_eq!(Set::singleton(9).density(), ratio(0, 1));
    }

    #[test]
    fn display_names() {
        assert_eq!(Set::odds().to_string(), "odds");
        assert_eq!(Set::multiples(8).to_string(), "multiples(8)");
        assert_eq!(Set::arithmetic(7, 8).to_string(), "ap(7,8)");
        assert_eq!(Set::singleton(2).to_string(), "ap(2,1) & !ap(3,1)");
    }

    pub(crate) fn arb_set() -> impl Strategy<Value = Set> {
        (prop::collection::vec(any::<bool>(), 0..6), 1usize..=8)
            .prop_flat_map(|(prefix, period)| {
                (
                    Just(prefix),
                    Just(period),
                    prop::collection::vec(any::<bool>(), period),
                )
            })
            .prop_map(|(prefix, period, bits)| {
                let residues: Vec<usize> = (0..period).filter(|&r| bits[r]).collect();
                Set::make(&prefix, period, &residues).unwrap()
            })
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent(s in arb_set()) {
            let residues: Vec<usize> = s.residues().collect();
            let again = Set::make(s.prefix_bits(), s.period(), &residues).unwrap();
            prop_assert_eq!(&again, &s);
        }

        #[test]
        fn equality_matches_membership(a in arb_set(), b in arb_set()) {
            let h = a.preperiod() + b.preperiod() + 2 * a.period().lcm(&b.period());
            prop_assert_eq!(a == b, agree_up_to(&a, &b, h));
        }

        #[test]
        fn boolean_laws(a in arb_set(), b in arb_set(), c in arb_set()) {
            let h = horizon(&[&a, &b, &c]);
            prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
            prop_assert_eq!(a.intersect(&b.union(&c)), a.intersect(&b).union(&a.intersect(&c)));
            prop_assert_eq!(a.union(&b).complement(), a.complement().intersect(&b.complement()));
            prop_assert_eq!(a.complement().complement(), a.clone());
            let u = a.union(&b);
            let i = a.intersect(&b);
            let d = a.difference(&b);
            for n in 1..=h {
                prop_assert_eq!(u.contains(n), a.contains(n) || b.contains(n));
                prop_assert_eq!(i.contains(n), a.contains(n) && b.contains(n));
                prop_assert_eq!(d.contains(n), a.contains(n) && !b.contains(n));
            }
        }

        #[test]
        fn density_is_additive(a in arb_set(), b in arb_set()) {
            let b = b.difference(&a);
            prop_assert_eq!(a.union(&b).density(), a.density() + b.density());
        }

        #[test]
        fn shift_semantics_and_invariance(a in arb_set(), k in -6i64..12) {
            let s = a.shift(k);
            for n in 1..=horizon(&[&a]) + 12 {
                let src = n as i64 - k;
                prop_assert_eq!(s.contains(n), src >= 1 && a.contains(src as usize));
            }
            if k >= 0 {
                prop_assert_eq!(s.density(), a.density());
            }
        }

        #[test]
        fn contract_semantics(a in arb_set(), d in 1usize..9) {
            let c = a.contract(d);
            for k in 1..=horizon(&[&a]) {
                prop_assert_eq!(c.contains(k), a.contains(k * d));
            }
            let scaled = a.intersect(&Set::multiples(d)).density() * Rational::from_integer(d.into());
            prop_assert_eq!(c.density(), scaled);
        }

        #[test]
        fn density_matches_counting(a in arb_set()) {
            let n = 100_000usize;
            let count = a.members_up_to(n).count() as f64;
            let exact = crate::rational::to_f64(&a.density());
            prop_assert!((count / n as f64 - exact).abs() <= 2.0 * a.period() as f64 / n as f64 + a.preperiod() as f64 / n as f64);
        }
    }
}
