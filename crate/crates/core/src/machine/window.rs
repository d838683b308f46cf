//! Finite observation windows and three-valued verdicts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::{eval, EvalError, Outcome};
use super::numbering::GoedelCode;
use super::oracle::Oracle;
use crate::nat::Nat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationWindow {
    inputs: u64,
    fuel: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("window bounds must be at least 1 (got inputs {inputs}, fuel {fuel})")]
pub struct WindowError {
    pub inputs: u64,
    pub fuel: u64,
}

impl ObservationWindow {
    pub const DEFAULT: ObservationWindow = ObservationWindow {
        inputs: 32,
        fuel: 200_000,
    };

    pub fn new(inputs: u64, fuel: u64) -> Result<Self, WindowError> {
        if inputs == 0 || fuel == 0 {
            return Err(WindowError { inputs, fuel });
        }
        Ok(ObservationWindow { inputs, fuel })
    }

    pub fn inputs(&self) -> u64 {
        self.inputs
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    pub fn with_fuel(self, fuel: u64) -> Self {
        ObservationWindow {
            fuel: fuel.max(1),
            ..self
        }
    }
}

impl Default for ObservationWindow {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "inputs")]
pub enum TriVerdict {
    Holds,
    FailsWithWitness(Vec<u64>),
    Unknown(Vec<u64>),
}

/// The per-input result feeding a [`TriVerdict`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Pass,
    Fail,
    Unresolved,
}

impl TriVerdict {
    /// Failures take precedence over unresolved inputs.
    pub fn from_checks(checks: impl IntoIterator<Item = (u64, Check)>) -> TriVerdict {
        let mut failed = Vec::new();
        let mut open = Vec::new();
        for (n, check) in checks {
            match check {
                Check::Pass => {}
                Check::Fail => failed.push(n),
                Check::Unresolved => open.push(n),
            }
        }
        if !failed.is_empty() {
            TriVerdict::FailsWithWitness(failed)
        } else if !open.is_empty() {
            TriVerdict::Unknown(open)
        } else {
            TriVerdict::Holds
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, TriVerdict::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, TriVerdict::FailsWithWitness(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, TriVerdict::Unknown(_))
    }

    pub fn witnesses(&self) -> &[u64] {
        match self {
            TriVerdict::Holds => &[],
            TriVerdict::FailsWithWitness(w) | TriVerdict::Unknown(w) => w,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TriVerdict::Holds => "Holds",
            TriVerdict::FailsWithWitness(_) => "Fails",
            TriVerdict::Unknown(_) => "Unknown",
        }
    }

    /// Conjunction: fails if either fails, holds if both hold.
    pub fn and(self, other: TriVerdict) -> TriVerdict {
        match (self, other) {
            (TriVerdict::FailsWithWitness(mut a), TriVerdict::FailsWithWitness(b)) => {
                a.extend(b);
                a.sort_unstable();
                a.dedup();
                TriVerdict::FailsWithWitness(a)
            }
            (f @ TriVerdict::FailsWithWitness(_), _) | (_, f @ TriVerdict::FailsWithWitness(_)) => {
                f
            }
            (TriVerdict::Unknown(mut a), TriVerdict::Unknown(b)) => {
                a.extend(b);
                a.sort_unstable();
                a.dedup();
                TriVerdict::Unknown(a)
            }
            (u @ TriVerdict::Unknown(_), _) | (_, u @ TriVerdict::Unknown(_)) => u,
            _ => TriVerdict::Holds,
        }
    }
}

/// Compares two outcomes: only two halts with different values fail.
pub fn compare(a: &Outcome, b: &Outcome) -> Check {
    match (a.value(), b.value()) {
        (Some(u), Some(v)) if u == v => Check::Pass,
        (Some(_), Some(_)) => Check::Fail,
        _ => Check::Unresolved,
    }
}

pub fn kleene_eq(
    i: &GoedelCode,
    j: &GoedelCode,
    x: &Oracle,
    w: ObservationWindow,
) -> Result<TriVerdict, EvalError> {
    let mut checks = Vec::with_capacity(w.inputs() as usize);
    for n in 0..w.inputs() {
        let input = Nat::from(n);
        let a = eval(i, &input, x, w.fuel())?;
        let b = eval(j, &input, x, w.fuel())?;
        checks.push((n, compare(&a, &b)));
    }
    Ok(TriVerdict::from_checks(checks))
}
