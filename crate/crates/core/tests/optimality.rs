use charged_mdp::blackwell::{average_value, blackwell_policy};
use charged_mdp::charge::{CValue, ChargeExpr};
use charged_mdp::mdp::{
    best_periodic, expected_reward_stream, payoff, Mdp, MdpBuilder, SearchConfig, DEFAULT_HORIZON,
};
use charged_mdp::rational::{ratio, Rational};
use charged_mdp::suite;
use proptest::prelude::*;

fn frequency_best(mdp: &Mdp, max_period: usize, max_preperiod: usize) -> Rational {
    let result = best_periodic(
        mdp,
        &ChargeExpr::Frequency,
        &SearchConfig::new(max_period, max_preperiod),
    )
    .unwrap();
    result.best().value.exact().unwrap().clone()
}

fn blackwell_frequency_payoff(mdp: &Mdp) -> Rational {
    let pi = blackwell_policy(mdp);
    match payoff(mdp, &pi, &ChargeExpr::Frequency, DEFAULT_HORIZON).unwrap() {
        CValue::Exact(v) => v,
        other => panic!("frequency payoff is ambiguous: {other}"),
    }
}

#[test]
fn blackwell_policy_is_frequency_optimal_on_named_mdps() {
    let eo = suite::build_even_or_odd();
    assert_eq!(blackwell_frequency_payoff(&eo), frequency_best(&eo, 4, 2));
    let ex4 = suite::build_example4();
    assert_eq!(blackwell_frequency_payoff(&ex4), frequency_best(&ex4, 4, 2));
    assert_eq!(blackwell_frequency_payoff(&ex4), ratio(3, 2));
}

#[test]
fn blackwell_policy_is_not_optimal_without_the_sandwich_condition() {
    let eo = suite::build_even_or_odd();
    let pi = blackwell_policy(&eo);
    let got = payoff(&eo, &pi, &suite::build_mu(), DEFAULT_HORIZON).unwrap();
    assert_eq!(got, CValue::Exact(ratio(1, 2)));
    assert!(!suite::build_mu()
        .sandwich_check(&charged_mdp::EventuallyPeriodicSet::multiples(4))
        .unwrap());
}

#[test]
fn search_finds_sigma_three() {
    let eo = suite::build_even_or_odd();
    let result = best_periodic(&eo, &suite::build_mu(), &SearchConfig::new(8, 0)).unwrap();
    assert_eq!(result.best().value, CValue::Exact(ratio(7, 8)));
    assert_eq!(result.best().schedule, suite::sigma_schedule(3));
}

#[test]
fn search_finds_waiting_strategies() {
    let ex4 = suite::build_example4();
    let mu = suite::example4_charge();
    // preperiod L with period 1 reaches B^(L+1)
    let result = best_periodic(&ex4, &mu, &SearchConfig::new(1, 3)).unwrap();
    assert_eq!(result.best().schedule, suite::b_schedule(4));
    assert_eq!(
        result.best().value,
        CValue::Exact(ratio(5, 4) - ratio(1, 64))
    );
    let result = best_periodic(&ex4, &mu, &SearchConfig::new(1, 4)).unwrap();
    assert_eq!(result.best().schedule, suite::b_schedule(5));
}

#[test]
fn search_value_is_monotone_in_bounds() {
    let ex4 = suite::build_example4();
    let mu = suite::example4_charge();
    let mut previous: Option<Rational> = None;
    for bound in 1..=4 {
        for (q, l) in [(bound, bound - 1), (bound, bound)] {
            let v = best_periodic(&ex4, &mu, &SearchConfig::new(q, l))
                .unwrap()
                .best()
                .value
                .min()
                .clone();
            if let Some(p) = &previous {
                assert!(&v >= p);
            }
            previous = Some(v);
        }
    }
}

fn deterministic_mdp() -> impl Strategy<Value = Mdp> {
    let action = (-4i64..=4, 0usize..3);
    prop::collection::vec(prop::collection::vec(action, 2), 3).prop_map(|states| {
        let mut b = MdpBuilder::new();
        b.initial("0");
        for (s, actions) in states.into_iter().enumerate() {
            for (a, (reward, target)) in actions.into_iter().enumerate() {
                b.goto(
                    &s.to_string(),
                    format!("a{a}"),
                    ratio(reward, 2),
                    &target.to_string(),
                );
            }
        }
        b.build().unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blackwell_policy_matches_periodic_search(mdp in deterministic_mdp()) {
        prop_assert_eq!(blackwell_frequency_payoff(&mdp), frequency_best(&mdp, 4, 0));
    }

    #[test]
    fn average_value_is_the_cycle_mean(mdp in deterministic_mdp()) {
        for choice in mdp.pure_policies() {
            let pi = charged_mdp::mdp::StationaryStrategy::pure(&mdp, &choice).unwrap();
            let stream = expected_reward_stream(&mdp, &pi, DEFAULT_HORIZON).unwrap();
            prop_assert_eq!(&average_value(&mdp, &pi).unwrap()[mdp.initial()], &stream.cycle_mean());
        }
    }
}
