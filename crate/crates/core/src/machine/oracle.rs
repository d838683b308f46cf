//! Oracles: total binary sequences behind a budgeted query interface.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::eval::{eval, EvalError, Outcome};
use super::numbering::GoedelCode;
use super::sexpr::ParseError;
use crate::nat::{unpair, Nat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Bit(bool),
    /// The oracle's own approximation ran out of budget.
    Unknown,
}

impl Answer {
    pub fn bit(self) -> Option<bool> {
        match self {
            Answer::Bit(b) => Some(b),
            Answer::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    Constant(bool),
    Cycle(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Oracle {
    Explicit {
        prefix: Vec<bool>,
        tail: Tail,
    },
    /// The sequence computed by a program relative to the all-zero oracle.
    FromProgram(GoedelCode),
    Join(Arc<Oracle>, Arc<Oracle>),
    /// `⟨i, j⟩ ↦ F(⟨j, i⟩)`, with `F` evaluated against `base`.
    BigJoin {
        family: GoedelCode,
        base: Arc<Oracle>,
    },
    /// `n ↦ reducer(n)` relative to `base`.
    Virtual {
        reducer: GoedelCode,
        base: Arc<Oracle>,
    },
}

static ZEROS: Oracle = Oracle::Explicit {
    prefix: Vec::new(),
    tail: Tail::Constant(false),
};

impl Oracle {
    /// The empty oracle: every query answers 0.
    pub fn zeros() -> Oracle {
        ZEROS.clone()
    }

    pub fn zeros_ref() -> &'static Oracle {
        &ZEROS
    }

    pub fn explicit(prefix: Vec<bool>, default: bool) -> Oracle {
        Oracle::Explicit {
            prefix,
            tail: Tail::Constant(default),
        }
    }

    /// `prefix` followed by `cycle` repeated forever; an empty cycle means zeros.
    pub fn periodic(prefix: Vec<bool>, cycle: Vec<bool>) -> Oracle {
        let tail = if cycle.is_empty() {
            Tail::Constant(false)
        } else {
            Tail::Cycle(cycle)
        };
        Oracle::Explicit { prefix, tail }
    }

    pub fn from_program(code: GoedelCode) -> Oracle {
        Oracle::FromProgram(code)
    }

    pub fn join(left: Oracle, right: Oracle) -> Oracle {
        Oracle::Join(Arc::new(left), Arc::new(right))
    }

    pub fn big_join(family: GoedelCode, base: Oracle) -> Oracle {
        Oracle::BigJoin {
            family,
            base: Arc::new(base),
        }
    }

    pub fn virtualize(reducer: GoedelCode, base: Oracle) -> Oracle {
        Oracle::Virtual {
            reducer,
            base: Arc::new(base),
        }
    }

    /// Answers query `index`, spending at most `budget` evaluation steps.
    /// Returns the answer together with the steps actually spent.
    pub fn query(&self, index: &Nat, budget: u64) -> Result<(Answer, u64), EvalError> {
        match self {
            Oracle::Explicit { prefix, tail } => {
                Ok((Answer::Bit(explicit_bit(prefix, tail, index)), 0))
            }
            Oracle::FromProgram(code) => derived(code, index, index, &ZEROS, budget),
            Oracle::Join(left, right) => {
                let (half, odd) = index.div_rem_small(2);
                if odd == 0 {
                    left.query(&half, budget)
                } else {
                    right.query(&half, budget)
                }
            }
            Oracle::BigJoin { family, base } => {
                let (row, column) = unpair(index);
                let arg = crate::nat::pair(&column, &row);
                derived(family, &arg, index, base, budget)
            }
            Oracle::Virtual { reducer, base } => derived(reducer, index, index, base, budget),
        }
    }

    /// Bit `index`, or `None` when `budget` does not suffice.
    pub fn bit(&self, index: u64, budget: u64) -> Result<Option<bool>, EvalError> {
        Ok(self.query(&Nat::from(index), budget)?.0.bit())
    }

    /// The first `len` answers, each with its own budget.
    pub fn prefix(&self, len: u64, budget: u64) -> Result<Vec<Answer>, EvalError> {
        (0..len)
            .map(|n| Ok(self.query(&Nat::from(n), budget)?.0))
            .collect()
    }

    /// Bits of an oracle that never needs budget (explicit sequences and
    /// joins of them).
    pub fn is_explicit(&self) -> bool {
        match self {
            Oracle::Explicit { .. } => true,
            Oracle::Join(l, r) => l.is_explicit() && r.is_explicit(),
            _ => false,
        }
    }
}

fn explicit_bit(prefix: &[bool], tail: &Tail, index: &Nat) -> bool {
    if let Some(i) = index.to_usize().filter(|i| *i < prefix.len()) {
        return prefix[i];
    }
    match tail {
        Tail::Constant(b) => *b,
        Tail::Cycle(cycle) => {
            let offset = index.monus(&Nat::from(prefix.len()));
            let (_, r) = offset.div_rem_small(cycle.len() as u64);
            cycle[r as usize]
        }
    }
}

fn derived(
    code: &GoedelCode,
    arg: &Nat,
    index: &Nat,
    base: &Oracle,
    budget: u64,
) -> Result<(Answer, u64), EvalError> {
    match eval(code, arg, base, budget)? {
        Outcome::Halted { value, steps } => match value.to_u64() {
            Some(0) => Ok((Answer::Bit(false), steps)),
            Some(1) => Ok((Answer::Bit(true), steps)),
            _ => Err(EvalError::NotABit {
                index: index.clone(),
                value,
            }),
        },
        Outcome::FuelExhausted => Ok((Answer::Unknown, budget)),
    }
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// Same grammar as [`FromStr`].
impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oracle::Explicit { prefix, tail } => match tail {
                Tail::Constant(false) => write!(f, "bits:{}", bit_string(prefix)),
                Tail::Constant(true) => write!(f, "bits:{}+1*", bit_string(prefix)),
                Tail::Cycle(c) if prefix.is_empty() => write!(f, "bits:{}*", bit_string(c)),
                Tail::Cycle(c) => write!(f, "bits:{}+{}*", bit_string(prefix), bit_string(c)),
            },
            Oracle::FromProgram(code) => write!(f, "prog:{code}"),
            Oracle::Join(l, r) => write!(f, "join({l},{r})"),
            Oracle::BigJoin { family, base } => write!(f, "bigjoin({family},{base})"),
            Oracle::Virtual { reducer, base } => write!(f, "virtual({reducer},{base})"),
        }
    }
}

/// Oracle descriptions:
///
/// - `bits:P`: the bits `P`, then zeros
/// - `bits:P*`: `P` repeated forever
/// - `bits:P+C*`: `P`, then `C` repeated forever
/// - `prog:S`: the program `S` (s-expression or code) under the empty oracle
/// - `join(A,B)`, `bigjoin(S,A)`, `virtual(S,A)`
impl FromStr for Oracle {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_at(s, 0)
    }
}

fn parse_bits(text: &str, at: usize) -> Result<Vec<bool>, ParseError> {
    text.char_indices()
        .map(|(i, c)| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(ParseError {
                position: at + i,
                message: format!("expected a bit, found {c:?}"),
            }),
        })
        .collect()
}

fn split_args(body: &str, at: usize) -> Result<(&str, usize, &str, usize), ParseError> {
    let mut depth = 0i32;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Ok((&body[..i], at, &body[i + 1..], at + i + 1)),
            _ => {}
        }
    }
    Err(ParseError {
        position: at + body.len(),
        message: "expected two comma-separated arguments".into(),
    })
}

fn parse_at(raw: &str, at: usize) -> Result<Oracle, ParseError> {
    let lead = raw.len() - raw.trim_start().len();
    let s = raw.trim();
    let at = at + lead;
    if let Some(body) = s.strip_prefix("bits:") {
        let base = at + 5;
        return Ok(match body.strip_suffix('*') {
            None => Oracle::explicit(parse_bits(body, base)?, false),
            Some(inner) => match inner.split_once('+') {
                Some((p, c)) => {
                    let cycle = parse_bits(c, base + p.len() + 1)?;
                    if cycle.is_empty() {
                        return Err(ParseError {
                            position: base + p.len() + 1,
                            message: "empty cycle".into(),
                        });
                    }
                    Oracle::periodic(parse_bits(p, base)?, cycle)
                }
                None => {
                    let cycle = parse_bits(inner, base)?;
                    if cycle.is_empty() {
                        return Err(ParseError {
                            position: base,
                            message: "empty cycle".into(),
                        });
                    }
                    Oracle::periodic(Vec::new(), cycle)
                }
            },
        });
    }
    if let Some(body) = s.strip_prefix("prog:") {
        return parse_code(body, at + 5).map(Oracle::FromProgram);
    }
    for (head, kind) in [("join(", 0), ("bigjoin(", 1), ("virtual(", 2)] {
        if let Some(rest) = s.strip_prefix(head) {
            let body = rest.strip_suffix(')').ok_or_else(|| ParseError {
                position: at + s.len(),
                message: "missing ')'".into(),
            })?;
            let (a, a_at, b, b_at) = split_args(body, at + head.len())?;
            return Ok(match kind {
                0 => Oracle::join(parse_at(a, a_at)?, parse_at(b, b_at)?),
                1 => Oracle::big_join(parse_code(a, a_at)?, parse_at(b, b_at)?),
                _ => Oracle::virtualize(parse_code(a, a_at)?, parse_at(b, b_at)?),
            });
        }
    }
    Err(ParseError {
        position: at,
        message: "expected bits:, prog:, join(, bigjoin( or virtual(".into(),
    })
}

fn parse_code(text: &str, at: usize) -> Result<GoedelCode, ParseError> {
    text.parse::<GoedelCode>().map_err(|e| ParseError {
        position: at + e.position,
        message: e.message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::program::build::*;

    fn bits(x: &Oracle, n: u64) -> Vec<bool> {
        x.prefix(n, 10_000)
            .unwrap()
            .into_iter()
            .map(|a| a.bit().unwrap())
            .collect()
    }

    fn parse_bitstr(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn explicit_tails() {
        let x: Oracle = "bits:1010*".parse().unwrap();
        assert_eq!(bits(&x, 8), parse_bitstr("10101010"));
        let y: Oracle = "bits:11".parse().unwrap();
        assert_eq!(bits(&y, 5), parse_bitstr("11000"));
        let z: Oracle = "bits:0+10*".parse().unwrap();
        assert_eq!(bits(&z, 6), parse_bitstr("010101"));
    }

    #[test]
    fn join_interleaves() {
        let x: Oracle = "bits:10*".parse().unwrap();
        let j = Oracle::join(x.clone(), Oracle::zeros());
        assert_eq!(bits(&j, 6), parse_bitstr("100010"));
        let xx = Oracle::join(x.clone(), x.clone());
        for n in 0..10 {
            assert_eq!(xx.bit(2 * n, 1).unwrap(), x.bit(n, 1).unwrap());
            assert_eq!(xx.bit(2 * n + 1, 1).unwrap(), x.bit(n, 1).unwrap());
        }
        assert_eq!(j.bit(7, 1).unwrap(), Oracle::zeros().bit(3, 1).unwrap());
    }

    #[test]
    fn big_join_reads_columns() {
        let zero_family = GoedelCode::new(konst(0u64));
        let bj = Oracle::big_join(zero_family, Oracle::zeros());
        assert!(bits(&bj, 20).iter().all(|b| !b));
        // F(⟨n, i⟩) = n mod 2, so column j is constantly j mod 2
        let parity_family = GoedelCode::new(comp(parity(), fst(id())));
        let bj = Oracle::big_join(parity_family, Oracle::zeros());
        assert_eq!(crate::nat::pair(&0u64.into(), &1u64.into()), 2u64);
        assert_eq!(bj.bit(2, 10_000).unwrap(), Some(true));
    }

    #[test]
    fn non_bits_are_contract_violations() {
        let bad = Oracle::from_program(GoedelCode::new(konst(2u64)));
        let err = bad.query(&Nat::from(3u64), 100).unwrap_err();
        assert_eq!(
            err,
            EvalError::NotABit {
                index: 3u64.into(),
                value: 2u64.into()
            }
        );
        let slow = Oracle::from_program(GoedelCode::new(mu(konst(1u64))));
        assert_eq!(slow.query(&Nat::ZERO, 100).unwrap().0, Answer::Unknown);
    }

    #[test]
    fn from_program_reads_the_empty_oracle() {
        let x = Oracle::from_program(GoedelCode::new(if_zero(query(id()), parity(), konst(5u64))));
        assert_eq!(bits(&x, 6), parse_bitstr("010101"));
    }

    #[test]
    fn text_round_trip() {
        for text in [
            "bits:",
            "bits:1101",
            "bits:10*",
            "bits:0+1*",
            "bits:01+110*",
            "prog:(query id)",
            "join(bits:1*,prog:(ifzero id (const 1) (const 0)))",
            "virtual((query succ),join(bits:1*,bits:0*))",
            "bigjoin((comp (const 0) id),bits:1*)",
        ] {
            let x: Oracle = text.parse().unwrap();
            let again: Oracle = x.to_string().parse().unwrap();
            assert_eq!(again, x, "{text}");
        }
    }

    #[test]
    fn spec_parse_errors() {
        assert_eq!("bits:10x".parse::<Oracle>().unwrap_err().position, 7);
        assert_eq!("prog:(query".parse::<Oracle>().unwrap_err().position, 11);
        assert_eq!(
            "join(bits:1,bits:2)"
                .parse::<Oracle>()
                .unwrap_err()
                .position,
            17
        );
        assert_eq!("tape:1".parse::<Oracle>().unwrap_err().position, 0);
        assert!("bits:*".parse::<Oracle>().is_err());
    }
}
