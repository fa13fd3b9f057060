//! `charged-mdp`: exact evaluation of MDPs under aggregation charges.
//!
//! Exit codes: 0 on success, 1 on a failed verification or evaluation, 2 on
//! malformed input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use charged_mdp::blackwell::{average_value, blackwell_policy, discounted_value};
use charged_mdp::mdp::format::{
    parse_mdp, parse_strategy, render_schedule, render_stationary, FormatError,
};
use charged_mdp::mdp::{best_periodic, payoff, Mdp, SearchConfig, DEFAULT_HORIZON};
use charged_mdp::rational::render;
use charged_mdp::{parse_charge, parse_set, parse_stream, suite, ChargeExpr, ParseError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "charged-mdp",
    version,
    about = "Exact MDP evaluation under finitely additive charges"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Natural density of a set expression.
    Density { set: String },
    /// Value of a charge on a set.
    ChargeEval { charge: String, set: String },
    /// Integral of a stream literal against a charge.
    Integrate { charge: String, stream: String },
    /// Payoff of a strategy under a charge.
    MdpEval {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        charge: String,
        /// Stage budget for the state distribution to recur.
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
    },
    /// Blackwell-optimal pure stationary policy with its values.
    Blackwell {
        #[arg(long)]
        mdp: PathBuf,
    },
    /// Exhaustive search over pure periodic Markov strategies.
    Search {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        charge: String,
        #[arg(long)]
        max_period: usize,
        #[arg(long)]
        max_preperiod: usize,
        /// Ranking rows to print; 0 prints all.
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Largest number of raw rule tables to enumerate.
        #[arg(long, default_value_t = 1 << 22)]
        cap: u128,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
    },
    /// Reconstructions of the worked examples.
    Paper {
        #[command(subcommand)]
        command: PaperCommand,
    },
}

#[derive(Subcommand)]
enum PaperCommand {
    /// Run every verifier and print the merged report.
    VerifyAll {
        #[arg(long, default_value_t = 12)]
        nmax: u32,
    },
}

enum Failure {
    Input(String),
    Run(String),
}

impl Failure {
    fn parse(source: &str, e: &ParseError) -> Self {
        Failure::Input(format!("{source}:{e}"))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn format_failure(path: &Path, e: FormatError) -> Failure {
    match e {
        FormatError::Parse(p) => Failure::parse(&path.display().to_string(), &p),
        other => Failure::Input(format!("{}: {other}", path.display())),
    }
}

fn load_mdp(path: &Path) -> Result<Mdp, Failure> {
    parse_mdp(&read(path)?).map_err(|e| format_failure(path, e))
}

fn charge_arg(text: &str) -> Result<ChargeExpr, Failure> {
    parse_charge(text).map_err(|e| Failure::parse("charge", &e))
}

fn run(cli: Cli) -> Result<(String, bool), Failure> {
    let mut out = String::new();
    match cli.command {
        Command::Density { set } => {
            let s = parse_set(&set).map_err(|e| Failure::parse("set", &e))?;
            writeln!(out, "{}", render(&s.density())).unwrap();
        }
        Command::ChargeEval { charge, set } => {
            let mu = charge_arg(&charge)?;
            let s = parse_set(&set).map_err(|e| Failure::parse("set", &e))?;
            let v = mu.value(&s).map_err(|e| Failure::Run(e.to_string()))?;
            writeln!(out, "{v}").unwrap();
        }
        Command::Integrate { charge, stream } => {
            let mu = charge_arg(&charge)?;
            let f = parse_stream(&stream).map_err(|e| Failure::parse("stream", &e))?;
            let v = mu.integrate(&f).map_err(|e| Failure::Run(e.to_string()))?;
            writeln!(out, "{v}").unwrap();
        }
        Command::MdpEval {
            mdp,
            strategy,
            charge,
            horizon,
        } => {
            let mu = charge_arg(&charge)?;
            let model = load_mdp(&mdp)?;
            let sigma = parse_strategy(&model, &read(&strategy)?)
                .map_err(|e| format_failure(&strategy, e))?;
            let v =
                payoff(&model, &sigma, &mu, horizon).map_err(|e| Failure::Run(e.to_string()))?;
            writeln!(out, "{v}").unwrap();
        }
        Command::Blackwell { mdp } => {
            let model = load_mdp(&mdp)?;
            let pi = blackwell_policy(&model);
            let values = discounted_value(&model, &pi);
            let averages = average_value(&model, &pi).map_err(|e| Failure::Run(e.to_string()))?;
            writeln!(out, "policy {}", render_stationary(&model, &pi)).unwrap();
            for s in 0..model.num_states() {
                writeln!(
                    out,
                    "state {} value {} average {}",
                    model.state_id(s),
                    values[s],
                    render(&averages[s])
                )
                .unwrap();
            }
        }
        Command::Search {
            mdp,
            charge,
            max_period,
            max_preperiod,
            top,
            cap,
            horizon,
        } => {
            let mu = charge_arg(&charge)?;
            let model = load_mdp(&mdp)?;
            if max_period == 0 {
                return Err(Failure::Input("--max-period must be at least 1".into()));
            }
            let config = SearchConfig {
                max_period,
                max_preperiod,
                cap,
                horizon,
            };
            let result =
                best_periodic(&model, &mu, &config).map_err(|e| Failure::Run(e.to_string()))?;
            let best = result.best();
            writeln!(
                out,
                "best {} value {}",
                render_schedule(&model, &best.schedule),
                best.value
            )
            .unwrap();
            let shown = if top == 0 {
                result.ranking.len()
            } else {
                top.min(result.ranking.len())
            };
            writeln!(
                out,
                "ranking {} of {} schedules",
                shown,
                result.ranking.len()
            )
            .unwrap();
            for (i, r) in result.ranking.iter().take(shown).enumerate() {
                writeln!(
                    out,
                    "{:>4}  {}  {}",
                    i + 1,
                    r.value,
                    render_schedule(&model, &r.schedule)
                )
                .unwrap();
            }
        }
        Command::Paper {
            command: PaperCommand::VerifyAll { nmax },
        } => {
            if nmax == 0 {
                return Err(Failure::Input("--nmax must be at least 1".into()));
            }
            let report = suite::verify_all(nmax);
            out.push_str(&report.table());
            out.push('\n');
            out.push_str(&report.case_lines());
            return Ok((out, report.pass()));
        }
    }
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, pass)) => {
            print!("{out}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
