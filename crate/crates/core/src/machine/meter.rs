//! Per-thread count of evaluation steps spent by outermost evaluations.
//!
//! Nested evaluations (oracle programs run on behalf of a query) are
//! already charged to the machine that issued the query, so only depth-0
//! runs add to the count. Use [`par_map`] for parallel work so the steps
//! done on worker threads land on the calling thread.

use std::cell::Cell;

use rayon::prelude::*;

thread_local! {
    static SPENT: Cell<u64> = const { Cell::new(0) };
    static DEPTH: Cell<u32> = const { Cell::new(0) };
}

/// Steps charged to this thread so far.
pub fn spent() -> u64 {
    SPENT.with(Cell::get)
}

fn set(v: u64) {
    SPENT.with(|s| s.set(v));
}

pub(crate) struct Scope {
    outermost: bool,
}

impl Scope {
    pub(crate) fn enter() -> Scope {
        let depth = DEPTH.with(|d| {
            let v = d.get();
            d.set(v + 1);
            v
        });
        Scope {
            outermost: depth == 0,
        }
    }

    pub(crate) fn charge(&self, steps: u64) {
        if self.outermost {
            set(spent().saturating_add(steps));
        }
    }
}

impl Drop for Scope {
    fn drop(&mut self) {
        DEPTH.with(|d| d.set(d.get() - 1));
    }
}

/// Runs `f` and returns its result with the steps it spent.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = spent();
    let out = f();
    let used = spent() - before;
    set(before);
    (out, used)
}

/// Order-preserving parallel map whose step count is charged to the caller.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let before = spent();
    let (out, used): (Vec<R>, Vec<u64>) = items.par_iter().map(|t| measure(|| f(t))).unzip();
    set(before + used.iter().sum::<u64>());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::build::*;
    use crate::machine::{eval_program, Oracle};
    use crate::nat::Nat;

    #[test]
    fn counts_outermost_steps_only() {
        let x = Oracle::from_program(crate::machine::GoedelCode::new(comp(pred(), succ())));
        let (out, used) = measure(|| eval_program(&query(id()), &Nat::ZERO, &x, 1000).unwrap());
        assert_eq!(out.steps(), Some(used));
    }

    #[test]
    fn parallel_steps_come_home() {
        let items: Vec<u64> = (0..64).collect();
        let (_, used) = measure(|| {
            par_map(&items, |n| {
                eval_program(&konst(*n), &Nat::ZERO, &Oracle::zeros(), 10).unwrap()
            })
        });
        assert_eq!(used, 64);
    }
}
