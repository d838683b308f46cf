//! Interleaved evaluation of several computations.

use super::eval::{EvalError, Machine, Status};
use super::numbering::GoedelCode;
use super::oracle::Oracle;
use crate::nat::Nat;

#[derive(Debug, Clone)]
pub struct Task<'o> {
    pub code: GoedelCode,
    pub input: Nat,
    pub oracle: &'o Oracle,
}

impl<'o> Task<'o> {
    pub fn new(code: GoedelCode, input: impl Into<Nat>, oracle: &'o Oracle) -> Self {
        Task {
            code,
            input: input.into(),
            oracle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DovetailOutcome {
    Halted { task: usize, value: Nat, steps: u64 },
    FuelExhausted,
}

/// The task halting in the fewest of its own steps, ties to the lowest
/// index. `fuel` bounds the total steps spent across all tasks.
pub fn dovetail(tasks: &[Task<'_>], fuel: u64) -> Result<DovetailOutcome, EvalError> {
    dovetail_until(tasks, fuel, |_, _| true)
}

/// Like [`dovetail`], but a halt only counts if `accept(task, value)`.
/// Rejected halts retire their task.
pub fn dovetail_until(
    tasks: &[Task<'_>],
    fuel: u64,
    mut accept: impl FnMut(usize, &Nat) -> bool,
) -> Result<DovetailOutcome, EvalError> {
    let mut machines: Vec<Option<Machine<'_>>> = tasks
        .iter()
        .map(|t| {
            Some(Machine::new(
                t.code.program().clone(),
                t.input.clone(),
                t.oracle,
                fuel,
            ))
        })
        .collect();
    let mut total = 0u64;
    let mut best: Option<(u64, usize, Nat)> = None;
    loop {
        // A paused machine is about to spend a step, so it cannot beat a
        // halt recorded at or below its current count.
        let next = machines
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|m| (m.used(), i)))
            .filter(|(used, _)| best.as_ref().map_or(true, |(s, _, _)| used < s))
            .min();
        let Some((used, i)) = next else { break };
        if total >= fuel {
            break;
        }
        let machine = machines[i].as_mut().expect("live");
        let status = machine.run(used + 1)?;
        total += machine.used() - used;
        match status {
            Status::Paused => {}
            Status::Halted { value, steps } => {
                if accept(i, &value)
                    && best
                        .as_ref()
                        .map_or(true, |(s, j, _)| (steps, i) < (*s, *j))
                {
                    best = Some((steps, i, value));
                }
                machines[i] = None;
            }
            Status::Exhausted => machines[i] = None,
        }
    }
    Ok(match best {
        Some((steps, task, value)) => DovetailOutcome::Halted { task, value, steps },
        None => DovetailOutcome::FuelExhausted,
    })
}
