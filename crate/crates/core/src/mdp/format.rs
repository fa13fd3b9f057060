//! Line-oriented text formats for MDPs and strategies.
//!
//! ```text
//! mdp
//! initial <state>
//! state <state>
//!   action <id> reward <rational> goto <state>
//!   action <id> reward <rational> dist <state>:<rational> [<state>:<rational> ...]
//!
//! stationary { <state>: <action>[:<rational>] ... }
//! periodic preperiod=<L> period=<q> { phase <k> state <s>: <action>[:<rational>] ... }
//! ```
//!
//! `#` starts a comment anywhere. Omitted strategy entries play the state's
//! first action. Phases are numbered from 1.

use thiserror::Error;

use super::strategy::{
    MarkovRule, PeriodicMarkovStrategy, PureSchedule, StationaryStrategy, Strategy, StrategyError,
};
use super::{Mdp, MdpBuilder, ValidationReport};
use crate::rational::{parse_rational, render, Rational};
use crate::syntax::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid MDP:\n{0}")]
    Invalid(#[from] ValidationReport),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

#[derive(Debug, Clone)]
struct Word<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Word<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

/// Whitespace-separated words with comments removed; `{` and `}` are always
/// words of their own.
fn words(text: &str) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("");
        let mut start: Option<usize> = None;
        let word = |s: usize, e: usize| Word {
            text: &line[s..e],
            line: i + 1,
            column: line[..s].chars().count() + 1,
        };
        for (pos, c) in line.char_indices() {
            if c.is_whitespace() || c == '{' || c == '}' {
                if let Some(s) = start.take() {
                    out.push(word(s, pos));
                }
                if c == '{' || c == '}' {
                    out.push(word(pos, pos + 1));
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if let Some(s) = start {
            out.push(word(s, line.len()));
        }
    }
    out
}

fn end_of(text: &str) -> ParseError {
    let lines: Vec<&str> = text.lines().collect();
    ParseError {
        line: lines.len().max(1),
        column: lines.last().map_or(0, |l| l.chars().count()) + 1,
        message: "unexpected end of input".into(),
    }
}

fn rational_at(w: &Word<'_>, text: &str) -> Result<Rational, ParseError> {
    parse_rational(text).ok_or_else(|| w.error(format!("`{text}` is not a rational number")))
}

pub fn parse_mdp(text: &str) -> Result<Mdp, FormatError> {
    let mut builder = MdpBuilder::new();
    let mut current: Option<String> = None;
    let mut saw_header = false;
    let all = words(text);
    let mut lines: Vec<Vec<Word<'_>>> = Vec::new();
    for w in all {
        match lines.last_mut() {
            Some(l) if l[0].line == w.line => l.push(w),
            _ => lines.push(vec![w]),
        }
    }
    for line in &lines {
        let head = &line[0];
        let expect_len = |n: usize| -> Result<(), ParseError> {
            if line.len() == n {
                Ok(())
            } else if line.len() > n {
                Err(line[n].error(format!("unexpected `{}`", line[n].text)))
            } else {
                let last = line.last().unwrap();
                Err(ParseError {
                    line: last.line,
                    column: last.column + last.text.chars().count(),
                    message: format!("`{}` line is incomplete", head.text),
                })
            }
        };
        match head.text {
            "mdp" if !saw_header => {
                expect_len(1)?;
                saw_header = true;
            }
            _ if !saw_header => return Err(head.error("expected `mdp` header").into()),
            "initial" => {
                expect_len(2)?;
                builder.initial(line[1].text);
            }
            "state" => {
                expect_len(2)?;
                builder.state(line[1].text);
                current = Some(line[1].text.to_string());
            }
            "action" => {
                let state = current
                    .clone()
                    .ok_or_else(|| head.error("`action` before any `state`"))?;
                if line.len() < 6 {
                    expect_len(6)?;
                }
                if line[2].text != "reward" {
                    return Err(line[2].error("expected `reward`").into());
                }
                let reward = rational_at(&line[3], line[3].text)?;
                let dist = match line[4].text {
                    "goto" => {
                        expect_len(6)?;
                        vec![(line[5].text.to_string(), Rational::from_integer(1.into()))]
                    }
                    "dist" => line[5..]
                        .iter()
                        .map(|w| {
                            let (target, p) = w
                                .text
                                .split_once(':')
                                .ok_or_else(|| w.error("expected <state>:<probability>"))?;
                            Ok((target.to_string(), rational_at(w, p)?))
                        })
                        .collect::<Result<Vec<_>, ParseError>>()?,
                    _ => return Err(line[4].error("expected `goto` or `dist`").into()),
                };
                builder.action(&state, line[1].text, reward, dist);
            }
            other => return Err(head.error(format!("unknown directive `{other}`")).into()),
        }
    }
    if !saw_header {
        return Err(end_of(text).into());
    }
    Ok(builder.build()?)
}

/// Renders an MDP in the text format.
pub fn render_mdp(mdp: &Mdp) -> String {
    let mut out = String::from("mdp\n");
    out.push_str(&format!("initial {}\n", mdp.state_id(mdp.initial())));
    for s in 0..mdp.num_states() {
        out.push_str(&format!("state {}\n", mdp.state_id(s)));
        for a in mdp.actions(s) {
            let targets: Vec<(usize, &Rational)> = a
                .transition
                .iter()
                .enumerate()
                .filter(|(_, p)| !num_traits::Zero::is_zero(*p))
                .collect();
            if targets.len() == 1 && num_traits::One::is_one(targets[0].1) {
                out.push_str(&format!(
                    "  action {} reward {} goto {}\n",
                    a.id,
                    render(&a.reward),
                    mdp.state_id(targets[0].0)
                ));
            } else {
                let dist: Vec<String> = targets
                    .iter()
                    .map(|(z, p)| format!("{}:{}", mdp.state_id(*z), render(p)))
                    .collect();
                out.push_str(&format!(
                    "  action {} reward {} dist {}\n",
                    a.id,
                    render(&a.reward),
                    dist.join(" ")
                ));
            }
        }
    }
    out
}

/// One `<state>: <action>[:<rational>] ...` entry, resolved to a distribution.
fn parse_entry<'a>(
    mdp: &Mdp,
    words: &[Word<'a>],
    pos: &mut usize,
    text: &str,
) -> Result<(usize, Vec<Rational>), ParseError> {
    let header = words.get(*pos).ok_or_else(|| end_of(text))?;
    let state_id = header
        .text
        .strip_suffix(':')
        .ok_or_else(|| header.error(format!("expected `<state>:`, found `{}`", header.text)))?;
    let s = mdp
        .state_index(state_id)
        .ok_or_else(|| header.error(format!("unknown state `{state_id}`")))?;
    *pos += 1;
    let n = mdp.actions(s).len();
    let mut probs = vec![Rational::from_integer(0.into()); n];
    let mut pure: Option<usize> = None;
    let mut weighted = false;
    let mut any = false;
    while let Some(w) = words.get(*pos) {
        if w.text == "}" || w.text.ends_with(':') || w.text == "phase" {
            break;
        }
        let (id, p) = match w.text.split_once(':') {
            Some((id, p)) => (id, Some(rational_at(w, p)?)),
            None => (w.text, None),
        };
        let a = mdp
            .action_index(s, id)
            .ok_or_else(|| w.error(format!("state `{state_id}` has no action `{id}`")))?;
        match p {
            Some(p) => {
                if pure.is_some() {
                    return Err(w.error("cannot mix a bare action with weighted actions"));
                }
                weighted = true;
                probs[a] += p;
            }
            None => {
                if weighted || pure.is_some() {
                    return Err(w.error("a bare action must be the only one listed"));
                }
                pure = Some(a);
                probs[a] = Rational::from_integer(1.into());
            }
        }
        any = true;
        *pos += 1;
    }
    if !any {
        return Err(header.error(format!("no action given for state `{state_id}`")));
    }
    Ok((s, probs))
}

fn first_actions(mdp: &Mdp) -> Vec<Vec<Rational>> {
    (0..mdp.num_states())
        .map(|s| {
            let mut v = vec![Rational::from_integer(0.into()); mdp.actions(s).len()];
            v[0] = Rational::from_integer(1.into());
            v
        })
        .collect()
}

fn keyed_number(w: Option<&Word<'_>>, key: &str, text: &str) -> Result<usize, ParseError> {
    let w = w.ok_or_else(|| end_of(text))?;
    w.text
        .strip_prefix(key)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| w.error(format!("expected `{key}=<number>`")))
}

fn expect_word(
    words: &[Word<'_>],
    pos: &mut usize,
    want: &str,
    text: &str,
) -> Result<(), ParseError> {
    let w = words.get(*pos).ok_or_else(|| end_of(text))?;
    if w.text != want {
        return Err(w.error(format!("expected `{want}`, found `{}`", w.text)));
    }
    *pos += 1;
    Ok(())
}

pub fn parse_strategy(mdp: &Mdp, text: &str) -> Result<Strategy, FormatError> {
    let ws = words(text);
    let mut pos = 0;
    let head = ws.first().ok_or_else(|| end_of(text))?;
    match head.text {
        "stationary" => {
            pos += 1;
            expect_word(&ws, &mut pos, "{", text)?;
            let mut probs = first_actions(mdp);
            while ws.get(pos).is_some_and(|w| w.text != "}") {
                let (s, p) = parse_entry(mdp, &ws, &mut pos, text)?;
                probs[s] = p;
            }
            expect_word(&ws, &mut pos, "}", text)?;
            if let Some(w) = ws.get(pos) {
                return Err(w.error("unexpected text after strategy").into());
            }
            Ok(Strategy::Stationary(StationaryStrategy::new(mdp, probs)?))
        }
        "periodic" => {
            let preperiod = keyed_number(ws.get(1), "preperiod", text)?;
            let period = keyed_number(ws.get(2), "period", text)?;
            if period == 0 {
                return Err(ws[2].error("period must be at least 1").into());
            }
            pos = 3;
            expect_word(&ws, &mut pos, "{", text)?;
            let phases = preperiod + period;
            let mut rules = vec![first_actions(mdp); phases];
            while ws.get(pos).is_some_and(|w| w.text != "}") {
                expect_word(&ws, &mut pos, "phase", text)?;
                let w = ws.get(pos).ok_or_else(|| end_of(text))?;
                let k: usize = w
                    .text
                    .parse()
                    .map_err(|_| w.error("expected a phase number"))?;
                if k == 0 || k > phases {
                    return Err(w.error(format!("phase must lie in 1..={phases}")).into());
                }
                pos += 1;
                expect_word(&ws, &mut pos, "state", text)?;
                let (s, p) = parse_entry(mdp, &ws, &mut pos, text)?;
                rules[k - 1][s] = p;
            }
            expect_word(&ws, &mut pos, "}", text)?;
            if let Some(w) = ws.get(pos) {
                return Err(w.error("unexpected text after strategy").into());
            }
            Ok(Strategy::Periodic(PeriodicMarkovStrategy::new(
                mdp, preperiod, period, rules,
            )?))
        }
        other => Err(head
            .error(format!(
                "expected `stationary` or `periodic`, found `{other}`"
            ))
            .into()),
    }
}

fn render_dist(mdp: &Mdp, s: usize, probs: &[Rational]) -> String {
    let nonzero: Vec<(usize, &Rational)> = probs
        .iter()
        .enumerate()
        .filter(|(_, p)| !num_traits::Zero::is_zero(*p))
        .collect();
    if nonzero.len() == 1 {
        mdp.actions(s)[nonzero[0].0].id.clone()
    } else {
        nonzero
            .iter()
            .map(|(a, p)| format!("{}:{}", mdp.actions(s)[*a].id, render(p)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn render_stationary(mdp: &Mdp, sigma: &StationaryStrategy) -> String {
    let entries: Vec<String> = (0..mdp.num_states())
        .map(|s| {
            format!(
                "{}: {}",
                mdp.state_id(s),
                render_dist(mdp, s, sigma.probs(s))
            )
        })
        .collect();
    format!("stationary {{ {} }}", entries.join(" "))
}

/// Lists only entries that differ from the default first action.
pub fn render_periodic(mdp: &Mdp, sigma: &PeriodicMarkovStrategy) -> String {
    let mut entries = Vec::new();
    for phase in 0..sigma.preperiod() + sigma.period() {
        for s in 0..mdp.num_states() {
            let probs = sigma.rule(phase, s);
            let is_default = num_traits::One::is_one(&probs[0]);
            if !is_default {
                entries.push(format!(
                    "phase {} state {}: {}",
                    phase + 1,
                    mdp.state_id(s),
                    render_dist(mdp, s, probs)
                ));
            }
        }
    }
    if entries.is_empty() {
        format!(
            "periodic preperiod={} period={} {{ }}",
            sigma.preperiod(),
            sigma.period()
        )
    } else {
        format!(
            "periodic preperiod={} period={} {{ {} }}",
            sigma.preperiod(),
            sigma.period(),
            entries.join(" ")
        )
    }
}

pub fn render_schedule(mdp: &Mdp, schedule: &PureSchedule) -> String {
    render_periodic(mdp, &schedule.to_strategy(mdp))
}

pub fn render_strategy(mdp: &Mdp, sigma: &Strategy) -> String {
    match sigma {
        Strategy::Stationary(s) => render_stationary(mdp, s),
        Strategy::Periodic(p) => render_periodic(mdp, p),
    }
}
