//! Reconstructions of the worked examples and verifiers for their
//! closed-form values.
//!
//! Stage sets used throughout: `E₀` = odd stages, `Eₙ` = multiples of `2ⁿ`,
//! `Eₙ⁻ = Eₙ − 1`.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::blackwell::{average_value, blackwell_policy};
use crate::charge::{dyadic_sequence, CValue, ChargeExpr};
use crate::mdp::{
    best_periodic, enumerate_pure_periodic, expected_reward_stream, EvalError, MarkovRule, Mdp,
    MdpBuilder, PeriodicMarkovStrategy, PureSchedule, SearchConfig, StationaryStrategy,
    DEFAULT_HORIZON,
};
use crate::rational::{int, inv_pow2, ratio, render, Rational};
use crate::sets::EventuallyPeriodicSet as Set;
use crate::stream::RationalStream;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// A number printed in the source text.
    Published,
    /// A closed form or independent computation.
    ClosedForm,
    /// Holds by construction.
    Definition,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Published => "published",
            Source::ClosedForm => "closed-form",
            Source::Definition => "definition",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expected {
    Equals(CValue),
    /// Every candidate strictly below the bound.
    Below(Rational),
    Holds,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Equals(v) => write!(f, "{v}"),
            Expected::Below(b) => write!(f, "<{}", render(b)),
            Expected::Holds => f.write_str("true"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub case: String,
    pub description: String,
    pub expected: Expected,
    pub source: Source,
    pub got: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub rows: Vec<Row>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn equals(
        &mut self,
        case: impl Into<String>,
        description: impl Into<String>,
        source: Source,
        expected: CValue,
        got: &CValue,
    ) {
        let pass = &expected == got;
        self.rows.push(Row {
            case: case.into(),
            description: description.into(),
            expected: Expected::Equals(expected),
            source,
            got: got.to_string(),
            pass,
        });
    }

    pub fn below(
        &mut self,
        case: impl Into<String>,
        description: impl Into<String>,
        source: Source,
        bound: Rational,
        got: &CValue,
    ) {
        let pass = got.max() < &bound;
        self.rows.push(Row {
            case: case.into(),
            description: description.into(),
            expected: Expected::Below(bound),
            source,
            got: got.to_string(),
            pass,
        });
    }

    pub fn holds(
        &mut self,
        case: impl Into<String>,
        description: impl Into<String>,
        source: Source,
        ok: bool,
    ) {
        self.rows.push(Row {
            case: case.into(),
            description: description.into(),
            expected: Expected::Holds,
            source,
            got: ok.to_string(),
            pass: ok,
        });
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.rows.extend(other.rows);
    }

    /// One `CASE <id> EXPECT <v> GOT <v> <PASS|FAIL>` line per row.
    pub fn case_lines(&self) -> String {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "CASE {} EXPECT {} GOT {} {}\n",
                    r.case,
                    r.expected,
                    r.got,
                    if r.pass { "PASS" } else { "FAIL" }
                )
            })
            .collect()
    }

    /// Aligned human-readable table.
    pub fn table(&self) -> String {
        let headers = ["case", "description", "expected", "source", "got", "result"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.case.clone(),
                    r.description.clone(),
                    r.expected.to_string(),
                    r.source.to_string(),
                    r.got.clone(),
                    if r.pass { "pass" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        let mut widths = headers.map(|h| h.chars().count());
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: &[String]| {
            let padded: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            format!("{}\n", padded.join("  ").trim_end())
        };
        let mut out = line(&headers.map(String::from));
        out.push_str(&line(&widths.map(|w| "-".repeat(w))));
        for row in &cells {
            out.push_str(&line(row));
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{} rows, {} failed: {}\n",
            self.rows.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// State 1: `T` (reward 1, to 2) and `B` (reward 0, to 3). States 2 and 3
/// return to 1 with rewards 0 and 1.
pub fn build_even_or_odd() -> Mdp {
    let mut b = MdpBuilder::new();
    b.initial("1")
        .goto("1", "T", int(1), "2")
        .goto("1", "B", int(0), "3")
        .goto("2", "C", int(0), "1")
        .goto("3", "C", int(1), "1");
    b.build().expect("well-formed")
}

/// `μ₀ = Restrict(Frequency, E₀)`.
pub fn mu_zero() -> ChargeExpr {
    ChargeExpr::restrict(ChargeExpr::Frequency, Set::odds()).expect("odds have positive density")
}

/// `½μ₀ + ½μ*`.
pub fn build_mu() -> ChargeExpr {
    ChargeExpr::mix(vec![
        (ratio(1, 2), mu_zero()),
        (ratio(1, 2), ChargeExpr::DyadicLimit),
    ])
    .expect("valid weights")
}

pub fn e_n(n: u32) -> Set {
    Set::multiples(1 << n)
}

pub fn e_n_minus(n: u32) -> Set {
    Set::arithmetic((1 << n) - 1, 1 << n)
}

/// Period `2ⁿ`; `B` in state 1 at phase `2ⁿ − 1`, `T` elsewhere.
pub fn sigma_schedule(n: u32) -> PureSchedule {
    let period = 1usize << n;
    let choices = (1..=period)
        .map(|phase| vec![usize::from(phase == period - 1), 0, 0])
        .collect();
    PureSchedule::new(&build_even_or_odd(), 0, period, choices).expect("in range")
}

pub fn sigma_strategy(n: u32) -> PeriodicMarkovStrategy {
    sigma_schedule(n).to_strategy(&build_even_or_odd())
}

/// Plays `T` with probability `q` in state 1.
pub fn stationary_q(mdp: &Mdp, q: &Rational) -> StationaryStrategy {
    let mut probs: Vec<Vec<Rational>> = (0..mdp.num_states())
        .map(|s| {
            let mut v = vec![Rational::zero(); mdp.actions(s).len()];
            v[0] = Rational::one();
            v
        })
        .collect();
    probs[0] = vec![q.clone(), Rational::one() - q];
    StationaryStrategy::new(mdp, probs).expect("q in [0, 1]")
}

fn horizon_for(rule: &impl MarkovRule) -> usize {
    DEFAULT_HORIZON.max(2 * (rule.preperiod() + rule.period()) + 8)
}

pub fn verify_claim1(n_max: u32) -> VerificationReport {
    let mdp = build_even_or_odd();
    let mu = build_mu();
    let mu0 = mu_zero();
    let mut report = VerificationReport::new();
    for n in 1..=n_max {
        let sigma = sigma_schedule(n);
        let stream =
            expected_reward_stream(&mdp, &sigma, horizon_for(&sigma)).expect("σₙ is periodic");
        let got = mu.integrate(&stream).expect("well-formed charge");
        report.equals(
            format!("claim1.n{n}.payoff"),
            format!("payoff of sigma_{n} under mu"),
            Source::Published,
            CValue::Exact(int(1) - inv_pow2(n)),
            &got,
        );
        let away = Set::odds().difference(&e_n_minus(n));
        report.equals(
            format!("claim1.n{n}.mu0"),
            format!("mu0(E0 \\ E{n}-)"),
            Source::ClosedForm,
            CValue::Exact(int(1) - inv_pow2(n - 1)),
            &mu0.value(&away).expect("diffuse base"),
        );
        report.equals(
            format!("claim1.n{n}.dyadic"),
            format!("mu*(E{n})"),
            Source::Published,
            CValue::Exact(int(1)),
            &ChargeExpr::DyadicLimit
                .value(&e_n(n))
                .expect("no conditioning"),
        );
        let ones = stream.stages_above(&ratio(1, 2));
        report.holds(
            format!("claim1.n{n}.reward_set"),
            format!("reward-1 stages of sigma_{n} = (E0 \\ E{n}-) | E{n}"),
            Source::Published,
            ones == away.union(&e_n(n)),
        );
    }
    report
}

/// Per-stream findings of the Claim 2 argument.
struct Probe {
    payoff: CValue,
    lemma: bool,
    dichotomy: bool,
}

fn probe_stream(stream: &RationalStream, mu: &ChargeExpr, mu0: &ChargeExpr) -> Probe {
    let payoff = mu.integrate(stream).expect("well-formed charge");
    let w = stream.stages_above(&ratio(1, 2));
    let outside = Set::odds().difference(&w);
    let lemma = (1..=8).all(|n| w.intersect(&e_n(n)).shift(-1).is_subset(&outside));
    let indicator = RationalStream::indicator(&w);
    let mu_n = dyadic_sequence(&indicator);
    let dichotomy = if mu_n.max().is_zero() {
        ChargeExpr::DyadicLimit
            .value(&w)
            .expect("no conditioning")
            .candidates()
            .all(Zero::is_zero)
    } else {
        mu0.value(&w).expect("diffuse base").max() < &int(1)
    };
    Probe {
        payoff,
        lemma,
        dichotomy,
    }
}

/// The Claim 2 argument applied to one strategy on the even-or-odd MDP.
pub fn claim2_probe<R: MarkovRule>(
    sigma: &R,
    label: &str,
) -> Result<VerificationReport, EvalError> {
    let mdp = build_even_or_odd();
    let stream = expected_reward_stream(&mdp, sigma, horizon_for(sigma))?;
    let p = probe_stream(&stream, &build_mu(), &mu_zero());
    let mut report = VerificationReport::new();
    report.below(
        format!("claim2.{label}.payoff"),
        format!("payoff of {label} under mu"),
        Source::Published,
        int(1),
        &p.payoff,
    );
    report.holds(
        format!("claim2.{label}.shift"),
        "(W & En) - 1 within E0 \\ W, n <= 8",
        Source::Published,
        p.lemma,
    );
    report.holds(
        format!("claim2.{label}.dichotomy"),
        "mu_n(W) > 0 forces mu0(W) < 1, else mu*(W) = 0",
        Source::Published,
        p.dichotomy,
    );
    Ok(report)
}

/// Every pure periodic schedule within the bounds, deduplicated by reward
/// stream, plus stationary `q ∈ {0, 1/8, …, 1}`.
pub fn claim2_sweep(max_period: usize, max_preperiod: usize) -> VerificationReport {
    let mdp = build_even_or_odd();
    let mu = build_mu();
    let mu0 = mu_zero();
    let mut seen: HashSet<RationalStream> = HashSet::new();
    let mut schedules = 0usize;
    let mut best = CValue::Exact(Rational::zero());
    let mut worst_best = Rational::zero();
    let (mut lemma, mut dichotomy) = (true, true);
    for schedule in enumerate_pure_periodic(&mdp, max_period, max_preperiod) {
        schedules += 1;
        let stream = expected_reward_stream(&mdp, &schedule, horizon_for(&schedule))
            .expect("pure schedules recur");
        if seen.contains(&stream) {
            continue;
        }
        let p = probe_stream(&stream, &mu, &mu0);
        if p.payoff.max() > &worst_best {
            worst_best = p.payoff.max().clone();
            best = p.payoff.clone();
        }
        lemma &= p.lemma;
        dichotomy &= p.dichotomy;
        seen.insert(stream);
    }
    let mut report = VerificationReport::new();
    let scope = format!("{schedules} schedules, {} distinct streams, period <= {max_period}, preperiod <= {max_preperiod}", seen.len());
    report.below(
        "claim2.sweep.payoff",
        format!("best payoff over {scope}"),
        Source::Published,
        int(1),
        &best,
    );
    report.holds(
        "claim2.sweep.shift",
        format!("shift lemma over {scope}"),
        Source::Published,
        lemma,
    );
    report.holds(
        "claim2.sweep.dichotomy",
        format!("dichotomy over {scope}"),
        Source::Published,
        dichotomy,
    );

    let mut best = CValue::Exact(Rational::zero());
    let (mut lemma, mut dichotomy) = (true, true);
    for k in 0..=8 {
        let q = ratio(k, 8);
        let stream = expected_reward_stream(&mdp, &stationary_q(&mdp, &q), DEFAULT_HORIZON)
            .expect("period 2");
        let p = probe_stream(&stream, &mu, &mu0);
        if p.payoff.max() > best.max() {
            best = p.payoff;
        }
        lemma &= p.lemma;
        dichotomy &= p.dichotomy;
    }
    report.below(
        "claim2.stationary.payoff",
        "best payoff over stationary q in {0, 1/8, .., 1}",
        Source::Published,
        int(1),
        &best,
    );
    report.holds(
        "claim2.stationary.shift",
        "shift lemma over stationary q",
        Source::Published,
        lemma,
    );
    report.holds(
        "claim2.stationary.dichotomy",
        "dichotomy over stationary q",
        Source::Published,
        dichotomy,
    );
    report
}

/// `Q = {4n − 3} ∪ {4n}`.
pub fn example3_set() -> Set {
    Set::arithmetic(1, 4).union(&Set::multiples(4))
}

pub fn example3_charge() -> ChargeExpr {
    ChargeExpr::restrict(ChargeExpr::Frequency, example3_set()).expect("Q has density 1/2")
}

/// Period 4: `T` at phase 1 and `B` at phase 3 in state 1.
pub fn alternating_schedule() -> PureSchedule {
    let choices = (1..=4)
        .map(|phase| vec![usize::from(phase == 3), 0, 0])
        .collect();
    PureSchedule::new(&build_even_or_odd(), 0, 4, choices).expect("in range")
}

pub fn verify_example3() -> VerificationReport {
    let mdp = build_even_or_odd();
    let mu = example3_charge();
    let mut report = VerificationReport::new();
    let value = |s: &Set| mu.value(s).expect("diffuse base");
    report.equals(
        "example3.first",
        "mu'({4n-3})",
        Source::Published,
        CValue::Exact(ratio(1, 2)),
        &value(&Set::arithmetic(1, 4)),
    );
    report.equals(
        "example3.last",
        "mu'({4n})",
        Source::Published,
        CValue::Exact(ratio(1, 2)),
        &value(&Set::multiples(4)),
    );
    report.equals(
        "example3.q",
        "mu'(Q)",
        Source::Published,
        CValue::Exact(int(1)),
        &value(&example3_set()),
    );
    report.holds(
        "example3.diffuse",
        "mu' is diffuse",
        Source::Definition,
        mu.is_diffuse(),
    );
    let alt = alternating_schedule();
    let stream = expected_reward_stream(&mdp, &alt, DEFAULT_HORIZON).expect("period 4");
    report.equals(
        "example3.alternating",
        "payoff of the alternating strategy",
        Source::Published,
        CValue::Exact(int(1)),
        &mu.integrate(&stream).expect("well-formed"),
    );
    for k in 0..=8 {
        let q = ratio(k, 8);
        let stream = expected_reward_stream(&mdp, &stationary_q(&mdp, &q), DEFAULT_HORIZON)
            .expect("period 2");
        report.equals(
            format!("example3.stationary.q{k}_8"),
            format!("payoff of stationary q = {}", render(&q)),
            Source::Published,
            CValue::Exact(ratio(1, 2)),
            &mu.integrate(&stream).expect("well-formed"),
        );
    }
    report
}

/// State 1: `T` (reward 1, stay) and `B` (reward 0, to 2). State 2 pays 3/2
/// forever.
pub fn build_example4() -> Mdp {
    let mut b = MdpBuilder::new();
    b.initial("1")
        .goto("1", "T", int(1), "1")
        .goto("1", "B", int(0), "2")
        .goto("2", "C", ratio(3, 2), "2");
    b.build().expect("well-formed")
}

/// `½·Geometric(½) + ½·Frequency`.
pub fn example4_charge() -> ChargeExpr {
    let geo = ChargeExpr::geometric(ratio(1, 2)).expect("discount in (0, 1)");
    ChargeExpr::mix(vec![
        (ratio(1, 2), geo),
        (ratio(1, 2), ChargeExpr::Frequency),
    ])
    .expect("valid weights")
}

/// `Bⁿ`: `T` before stage `n`, `B` at stage `n`.
pub fn b_schedule(n: usize) -> PureSchedule {
    assert!(n >= 1);
    let mut choices = vec![vec![0, 0]; n - 1];
    choices.push(vec![1, 0]);
    PureSchedule::new(&build_example4(), n - 1, 1, choices).expect("in range")
}

pub fn t_forever() -> PureSchedule {
    PureSchedule::stationary(vec![0, 0])
}

/// `u(Bⁿ) = 5/4 − 2^−(n+2)`.
pub fn example4_closed_form(n: usize) -> Rational {
    ratio(5, 4) - inv_pow2(n as u32 + 2)
}

pub fn verify_example4(n_max: usize) -> VerificationReport {
    let mdp = build_example4();
    let mu = example4_charge();
    let payoff = |s: &PureSchedule| {
        let stream = expected_reward_stream(&mdp, s, horizon_for(s)).expect("eventually constant");
        mu.integrate(&stream).expect("well-formed")
    };
    let mut report = VerificationReport::new();
    report.equals(
        "example4.t_forever",
        "u(T^inf)",
        Source::Published,
        CValue::Exact(int(1)),
        &payoff(&t_forever()),
    );
    let mut previous: Option<CValue> = None;
    for n in 1..=n_max {
        let got = payoff(&b_schedule(n));
        let source = if n == 1 {
            Source::Published
        } else {
            Source::ClosedForm
        };
        report.equals(
            format!("example4.b{n}"),
            format!("u(B^{n})"),
            source,
            CValue::Exact(example4_closed_form(n)),
            &got,
        );
        if let Some(prev) = previous {
            let diff = match (prev.exact(), got.exact()) {
                (Some(a), Some(b)) => CValue::Exact(a - b),
                _ => CValue::Exact(int(1)),
            };
            report.equals(
                format!("example4.step{}", n - 1),
                format!("u(B^{}) - u(B^{n})", n - 1),
                Source::Published,
                CValue::Exact(-inv_pow2(n as u32 + 2)),
                &diff,
            );
        }
        previous = Some(got);
    }
    let config = SearchConfig::new(4, 4);
    let search = best_periodic(&mdp, &mu, &config).expect("small search");
    let best = &search.best().value;
    report.below(
        "example4.search.bound",
        "best payoff, period <= 4, preperiod <= 4",
        Source::Published,
        ratio(5, 4),
        best,
    );
    report.equals(
        "example4.search.best",
        "best payoff, period <= 4, preperiod <= 4, attained by B^8",
        Source::ClosedForm,
        CValue::Exact(example4_closed_form(8)),
        best,
    );
    report
}

/// Blackwell policies of both MDPs and their behaviour under charges that
/// do and do not satisfy the sandwich condition.
pub fn verify_blackwell() -> VerificationReport {
    let mut report = VerificationReport::new();
    let eo = build_even_or_odd();
    let pi = blackwell_policy(&eo);
    report.holds(
        "blackwell.even_or_odd.policy",
        "Blackwell policy plays T",
        Source::ClosedForm,
        pi.pure_choice() == Some(vec![0, 0, 0]),
    );
    let avg = average_value(&eo, &pi).expect("stochastic rows");
    report.equals(
        "blackwell.even_or_odd.average",
        "average value at state 1",
        Source::Published,
        CValue::Exact(ratio(1, 2)),
        &CValue::Exact(avg[0].clone()),
    );
    let stream = expected_reward_stream(&eo, &pi, DEFAULT_HORIZON).expect("period 2");
    let under_mu = build_mu().integrate(&stream).expect("well-formed");
    report.equals(
        "blackwell.even_or_odd.mu",
        "payoff of the Blackwell policy under mu",
        Source::ClosedForm,
        CValue::Exact(ratio(1, 2)),
        &under_mu,
    );
    report.holds(
        "blackwell.even_or_odd.sandwich",
        "mu violates the sandwich condition on multiples(4)",
        Source::Published,
        !build_mu()
            .sandwich_check(&Set::multiples(4))
            .expect("well-formed"),
    );
    let ex4 = build_example4();
    let pi = blackwell_policy(&ex4);
    report.holds(
        "blackwell.example4.policy",
        "Blackwell policy plays B",
        Source::ClosedForm,
        pi.pure_choice() == Some(vec![1, 0]),
    );
    let avg = average_value(&ex4, &pi).expect("stochastic rows");
    report.equals(
        "blackwell.example4.average",
        "average value at state 1",
        Source::ClosedForm,
        CValue::Exact(ratio(3, 2)),
        &CValue::Exact(avg[0].clone()),
    );
    report
}

/// Claim 1, the Claim 2 sweep (period and preperiod up to 8), Example 3,
/// Example 4 and the Blackwell cases, merged in that order.
pub fn verify_all(n_max: u32) -> VerificationReport {
    let mut report = verify_claim1(n_max);
    report.extend(claim2_sweep(8, 8));
    report.extend(verify_example3());
    report.extend(verify_example4(n_max as usize));
    report.extend(verify_blackwell());
    report
}
