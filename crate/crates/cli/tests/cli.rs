use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charged-mdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn density_of_odds() {
    let o = run(&["density", "odds"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1/2\n");
    // `&` binds tighter than `|`
    assert_eq!(
        stdout(&run(&["density", "ap(3,7) | ap(5,7) & !evens"])),
        "3/14\n"
    );
}

#[test]
fn dyadic_limit_of_multiples_of_eight() {
    let o = run(&["charge-eval", "dyadiclimit", "multiples(8)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
    let o = run(&[
        "charge-eval",
        "mix(1/2:geometric(1/2), 1/2:pointmass(1))",
        "ap(1,1) & !ap(2,1)",
    ]);
    assert_eq!(stdout(&o), "3/4\n");
}

#[test]
fn integrate_streams() {
    let o = run(&["integrate", "frequency", "stream([5];[1, 0])"]);
    assert_eq!(stdout(&o), "1/2\n");
    let o = run(&["integrate", "geometric(1/2)", "stream([];[1, 0])"]);
    assert_eq!(stdout(&o), "2/3\n");
}

#[test]
fn mdp_eval_reproduces_payoffs() {
    let mu = "mix(1/2:restrict(frequency, odds), 1/2:dyadiclimit)";
    let o = run(&[
        "mdp-eval",
        "--mdp",
        &data("even_or_odd.mdp"),
        "--strategy",
        &data("sigma3.strategy"),
        "--charge",
        mu,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "7/8\n");
    let mu_prime = "restrict(frequency, ap(1,4) | ap(4,4))";
    for (strategy, value) in [
        ("alternating.strategy", "1\n"),
        ("quarter.strategy", "1/2\n"),
    ] {
        let o = run(&[
            "mdp-eval",
            "--mdp",
            &data("even_or_odd.mdp"),
            "--strategy",
            &data(strategy),
            "--charge",
            mu_prime,
        ]);
        assert_eq!(stdout(&o), value);
    }
}

#[test]
fn blackwell_report() {
    let o = run(&["blackwell", "--mdp", &data("even_or_odd.mdp")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.starts_with("policy stationary { 1: T 2: C 3: C }\n"),
        "{text}"
    );
    assert!(
        text.contains("state 1 value (-1)/(-1 + b^2) average 1/2\n"),
        "{text}"
    );
    let o = run(&["blackwell", "--mdp", &data("example4.mdp")]);
    let text = stdout(&o);
    assert!(
        text.starts_with("policy stationary { 1: B 2: C }\n"),
        "{text}"
    );
    assert!(text.contains("average 3/2"));
}

#[test]
fn search_finds_sigma_three_and_its_output_reparses() {
    let mu = "mix(1/2:restrict(frequency, odds), 1/2:dyadiclimit)";
    let o = run(&[
        "search",
        "--mdp",
        &data("even_or_odd.mdp"),
        "--charge",
        mu,
        "--max-period",
        "8",
        "--max-preperiod",
        "0",
        "--top",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert_eq!(
        first,
        "best periodic preperiod=0 period=8 { phase 7 state 1: B } value 7/8"
    );
    assert_eq!(text.lines().count(), 5);

    let strategy = first
        .strip_prefix("best ")
        .and_then(|s| s.split(" value ").next())
        .unwrap();
    let path = std::env::temp_dir().join(format!("charged-mdp-{}.strategy", std::process::id()));
    std::fs::write(&path, strategy).unwrap();
    let o = run(&[
        "mdp-eval",
        "--mdp",
        &data("even_or_odd.mdp"),
        "--strategy",
        path.to_str().unwrap(),
        "--charge",
        mu,
    ]);
    std::fs::remove_file(&path).ok();
    assert_eq!(stdout(&o), "7/8\n");
}

#[test]
fn parse_errors_exit_two_with_positions() {
    let o = run(&["density", "ap(1,"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: set:1:6: "), "{}", stderr(&o));

    let o = run(&["charge-eval", "geometric(2)", "odds"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("charge:1:"), "{}", stderr(&o));

    let path = data("bad_reward.mdp");
    let o = run(&["blackwell", "--mdp", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains(&format!("{path}:4:19: ")),
        "{}",
        stderr(&o)
    );

    let o = run(&["density", "odds", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluation_failures_exit_one() {
    let quarter = data("quarter.strategy");
    let o = run(&[
        "mdp-eval",
        "--mdp",
        &data("stochastic.mdp"),
        "--strategy",
        &quarter,
        "--charge",
        "frequency",
    ]);
    // the strategy names a state the MDP lacks
    assert_eq!(o.status.code(), Some(2));

    let path = std::env::temp_dir().join(format!("charged-mdp-{}-x.strategy", std::process::id()));
    std::fs::write(&path, "stationary { a: x }").unwrap();
    let o = run(&[
        "mdp-eval",
        "--mdp",
        &data("stochastic.mdp"),
        "--strategy",
        path.to_str().unwrap(),
        "--charge",
        "frequency",
        "--horizon",
        "50",
    ]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("did not recur within 50 stages"));
}

#[test]
fn verify_all_passes_and_is_deterministic() {
    let a = run(&["paper", "verify-all", "--nmax", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let text = stdout(&a);
    assert!(text.contains("CASE claim1.n3.payoff EXPECT 7/8 GOT 7/8 PASS\n"));
    assert!(text.contains("CASE example4.b1 EXPECT 9/8 GOT 9/8 PASS\n"));
    assert!(!text.contains(" FAIL\n"));
    let b = run(&["paper", "verify-all", "--nmax", "4"]);
    assert_eq!(a.stdout, b.stdout);
}
