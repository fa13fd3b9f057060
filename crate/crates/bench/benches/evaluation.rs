use std::hint::black_box;

use charged_mdp::blackwell::blackwell_policy;
use charged_mdp::mdp::{expected_reward_stream, MdpBuilder, DEFAULT_HORIZON};
use charged_mdp::rational::{int, ratio};
use charged_mdp::{parse_stream, suite, ChargeExpr};
use criterion::{criterion_group, criterion_main, Criterion};

fn dyadic(c: &mut Criterion) {
    let f = parse_stream("stream([1, 0, 2];[1, 0, 0, 1, 1/2, 0, 0, 1, 0, 1, 1, 0])").unwrap();
    c.bench_function("dyadic limit of a period-12 stream", |b| {
        b.iter(|| ChargeExpr::DyadicLimit.integrate(black_box(&f)).unwrap())
    });
    let mu = suite::build_mu();
    c.bench_function("mixture integral of sigma_10", |b| {
        let mdp = suite::build_even_or_odd();
        let stream =
            expected_reward_stream(&mdp, &suite::sigma_schedule(10), DEFAULT_HORIZON).unwrap();
        b.iter(|| mu.integrate(black_box(&stream)).unwrap())
    });
}

fn streams(c: &mut Criterion) {
    let mdp = suite::build_even_or_odd();
    let sigma = suite::sigma_schedule(10);
    c.bench_function("reward stream of sigma_10", |b| {
        b.iter(|| expected_reward_stream(&mdp, black_box(&sigma), DEFAULT_HORIZON).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("claim 2 sweep");
    group.sample_size(10);
    group.bench_function("period and preperiod up to 4", |b| {
        b.iter(|| suite::claim2_sweep(4, 4))
    });
    group.finish();
}

fn blackwell(c: &mut Criterion) {
    let mut b = MdpBuilder::new();
    b.initial("0");
    for s in 0..4 {
        for a in 0..3 {
            let dist = (0..4)
                .filter(|z| (s + a + z) % 3 != 0)
                .map(|z| (z.to_string(), int(1)))
                .collect::<Vec<_>>();
            let n = dist.len() as i64;
            let dist = dist.into_iter().map(|(z, _)| (z, ratio(1, n))).collect();
            b.action(
                &s.to_string(),
                format!("a{a}"),
                ratio((s * 3 + a) as i64 % 5 - 2, 3),
                dist,
            );
        }
    }
    let mdp = b.build().unwrap();
    c.bench_function("Blackwell policy, 4 states x 3 actions", |bench| {
        bench.iter(|| blackwell_policy(black_box(&mdp)))
    });
}

criterion_group!(benches, dyadic, streams, sweep, blackwell);
criterion_main!(benches);
