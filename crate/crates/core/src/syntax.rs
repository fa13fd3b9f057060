//! Recursive-descent parsers for the set, charge, and stream expression
//! languages. Whitespace is insignificant and `#` starts a comment that runs
//! to the end of the line.
//!
//! ```text
//! set     := or
//! or      := and ("|" and)*
//! and     := not ("&" not)*
//! not     := "!" not | atom
//! atom    := "odds" | "evens" | "nat" | "empty" | "multiples(" nat ")"
//!          | "ap(" nat "," nat ")" | "shift(" set "," int ")"
//!          | "contract(" set "," nat ")" | "(" set ")"
//! charge  := "frequency" | "geometric(" rational ")" | "pointmass(" nat ")"
//!          | "restrict(" charge "," set ")" | "dyadiclimit"
//!          | "mix(" rational ":" charge ("," rational ":" charge)* ")"
//! stream  := "stream([" rationals? "];[" rationals "])"
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::charge::ChargeExpr;
use crate::rational::Rational;
use crate::sets::EventuallyPeriodicSet;
use crate::stream::RationalStream;

/// Largest period, shift, or progression start accepted from text.
pub const MAX_PARAMETER: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Num(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_whitespace() {
            bump(&mut chars);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while chars
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
            {
                word.push(bump(&mut chars));
            }
            out.push(Spanned {
                tok: Tok::Word(word),
                line: l,
                column: col,
            });
        } else if c.is_ascii_digit() {
            let mut num = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                num.push(bump(&mut chars));
            }
            out.push(Spanned {
                tok: Tok::Num(num),
                line: l,
                column: col,
            });
        } else if "()[],;:|&!/-".contains(c) {
            bump(&mut chars);
            out.push(Spanned {
                tok: Tok::Sym(c),
                line: l,
                column: col,
            });
        } else {
            return Err(ParseError {
                line: l,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: &Spanned, message: impl Into<String>) -> ParseError {
        ParseError {
            line: at.line,
            column: at.column,
            message: message.into(),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        self.error_at(&self.toks[self.pos], message)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{c}`, found {}", self.peek())))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.error_here(format!("unexpected {} after expression", self.peek())))
        }
    }

    fn nat(&mut self) -> Result<usize, ParseError> {
        let at = self.next();
        match &at.tok {
            Tok::Num(n) => match n.parse::<usize>() {
                Ok(v) if v <= MAX_PARAMETER => Ok(v),
                _ => Err(self.error_at(&at, format!("{n} exceeds the limit {MAX_PARAMETER}"))),
            },
            other => Err(self.error_at(&at, format!("expected a natural number, found {other}"))),
        }
    }

    fn positive(&mut self, what: &str) -> Result<usize, ParseError> {
        let at = self.toks[self.pos].clone();
        let v = self.nat()?;
        if v == 0 {
            return Err(self.error_at(&at, format!("{what} must be at least 1")));
        }
        Ok(v)
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat_sym('-');
        let v = self.nat()? as i64;
        Ok(if negative { -v } else { v })
    }

    fn big_int(&mut self) -> Result<BigInt, ParseError> {
        let negative = self.eat_sym('-');
        let at = self.next();
        let v: BigInt = match &at.tok {
            Tok::Num(n) => n.parse().expect("lexer only yields digits"),
            other => return Err(self.error_at(&at, format!("expected a number, found {other}"))),
        };
        Ok(if negative { -v } else { v })
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let num = self.big_int()?;
        if self.eat_sym('/') {
            let at = self.toks[self.pos].clone();
            let den = match &at.tok {
                Tok::Num(n) => n.parse::<BigInt>().expect("digits"),
                other => {
                    return Err(self.error_at(&at, format!("expected a denominator, found {other}")))
                }
            };
            self.next();
            if den.is_zero() {
                return Err(self.error_at(&at, "zero denominator"));
            }
            Ok(Rational::new(num, den))
        } else {
            Ok(Rational::from_integer(num))
        }
    }

    fn set(&mut self) -> Result<EventuallyPeriodicSet, ParseError> {
        let mut acc = self.set_and()?;
        while self.eat_sym('|') {
            acc = acc.union(&self.set_and()?);
        }
        Ok(acc)
    }

    fn set_and(&mut self) -> Result<EventuallyPeriodicSet, ParseError> {
        let mut acc = self.set_not()?;
        while self.eat_sym('&') {
            acc = acc.intersect(&self.set_not()?);
        }
        Ok(acc)
    }

    fn set_not(&mut self) -> Result<EventuallyPeriodicSet, ParseError> {
        if self.eat_sym('!') {
            Ok(self.set_not()?.complement())
        } else {
            self.set_atom()
        }
    }

    fn set_atom(&mut self) -> Result<EventuallyPeriodicSet, ParseError> {
        if self.eat_sym('(') {
            let s = self.set()?;
            self.expect_sym(')')?;
            return Ok(s);
        }
        let at = self.next();
        let word = match &at.tok {
            Tok::Word(w) => w.clone(),
            other => return Err(self.error_at(&at, format!("expected a set, found {other}"))),
        };
        type Set = EventuallyPeriodicSet;
        Ok(match word.as_str() {
            "odds" => Set::odds(),
            "evens" => Set::evens(),
            "nat" => Set::all(),
            "empty" => Set::empty(),
            "multiples" => {
                self.expect_sym('(')?;
                let d = self.positive("multiples(d) needs d")?;
                self.expect_sym(')')?;
                Set::multiples(d)
            }
            "ap" => {
                self.expect_sym('(')?;
                let a = self.positive("ap(a, d) needs a")?;
                self.expect_sym(',')?;
                let d = self.positive("ap(a, d) needs d")?;
                self.expect_sym(')')?;
                Set::arithmetic(a, d)
            }
            "shift" => {
                self.expect_sym('(')?;
                let s = self.set()?;
                self.expect_sym(',')?;
                let k = self.int()?;
                self.expect_sym(')')?;
                s.shift(k)
            }
            "contract" => {
                self.expect_sym('(')?;
                let s = self.set()?;
                self.expect_sym(',')?;
                let d = self.positive("contraction factor")?;
                self.expect_sym(')')?;
                s.contract(d)
            }
            _ => return Err(self.error_at(&at, format!("unknown set `{word}`"))),
        })
    }

    fn charge(&mut self) -> Result<ChargeExpr, ParseError> {
        let at = self.next();
        let word = match &at.tok {
            Tok::Word(w) => w.clone(),
            other => return Err(self.error_at(&at, format!("expected a charge, found {other}"))),
        };
        let built = match word.as_str() {
            "frequency" => Ok(ChargeExpr::Frequency),
            "dyadiclimit" => Ok(ChargeExpr::DyadicLimit),
            "geometric" => {
                self.expect_sym('(')?;
                let beta = self.rational()?;
                self.expect_sym(')')?;
                ChargeExpr::geometric(beta)
            }
            "pointmass" => {
                self.expect_sym('(')?;
                let t = self.positive("pointmass(t) needs t")?;
                self.expect_sym(')')?;
                ChargeExpr::point_mass(t)
            }
            "restrict" => {
                self.expect_sym('(')?;
                let base = self.charge()?;
                self.expect_sym(',')?;
                let set = self.set()?;
                self.expect_sym(')')?;
                ChargeExpr::restrict(base, set)
            }
            "mix" => {
                self.expect_sym('(')?;
                let mut parts = Vec::new();
                loop {
                    let w = self.rational()?;
                    self.expect_sym(':')?;
                    parts.push((w, self.charge()?));
                    if !self.eat_sym(',') {
                        break;
                    }
                }
                self.expect_sym(')')?;
                ChargeExpr::mix(parts)
            }
            _ => return Err(self.error_at(&at, format!("unknown charge `{word}`"))),
        };
        built.map_err(|e| self.error_at(&at, e.to_string()))
    }

    fn rational_list(&mut self) -> Result<Vec<Rational>, ParseError> {
        self.expect_sym('[')?;
        let mut out = Vec::new();
        if !self.eat_sym(']') {
            loop {
                out.push(self.rational()?);
                if !self.eat_sym(',') {
                    break;
                }
            }
            self.expect_sym(']')?;
        }
        Ok(out)
    }

    fn stream(&mut self) -> Result<RationalStream, ParseError> {
        let at = self.next();
        if at.tok != Tok::Word("stream".into()) {
            return Err(self.error_at(&at, format!("expected `stream`, found {}", at.tok)));
        }
        self.expect_sym('(')?;
        let pre = self.rational_list()?;
        self.expect_sym(';')?;
        let cycle_at = self.toks[self.pos].clone();
        let cycle = self.rational_list()?;
        self.expect_sym(')')?;
        RationalStream::new(pre, cycle).map_err(|e| self.error_at(&cycle_at, e.to_string()))
    }
}

pub fn parse_set(text: &str) -> Result<EventuallyPeriodicSet, ParseError> {
    let mut p = Parser::new(text)?;
    let s = p.set()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_charge(text: &str) -> Result<ChargeExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let c = p.charge()?;
    p.finish()?;
    Ok(c)
}

pub fn parse_stream(text: &str) -> Result<RationalStream, ParseError> {
    let mut p = Parser::new(text)?;
    let s = p.stream()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_rational(text: &str) -> Result<Rational, ParseError> {
    let mut p = Parser::new(text)?;
    let q = p.rational()?;
    p.finish()?;
    Ok(q)
}

/// `usize` view of a small nonnegative rational integer, if it is one.
pub fn as_index(q: &Rational) -> Option<usize> {
    if q.is_integer() {
        q.numer().to_usize()
    } else {
        None
    }
}
