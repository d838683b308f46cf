//! Oracle programs, their numbering, and fuel-bounded evaluation.

pub mod dovetail;
pub mod eval;
pub mod meter;
pub mod numbering;
pub mod oracle;
pub mod program;
pub mod quote;
pub mod sexpr;
pub mod window;

pub use dovetail::{dovetail, dovetail_until, DovetailOutcome, Task};
pub use eval::{eval, eval_program, EvalError, Machine, Outcome, Status};
pub use numbering::{decode, encode, CodeTooLarge, GoedelCode};
pub use oracle::{Answer, Oracle, Tail};
pub use program::{build, Prog, Program, Tag};
pub use sexpr::ParseError;
pub use window::{kleene_eq, Check, ObservationWindow, TriVerdict};

/// `(x ⊕ y)(2n) = x(n)`, `(x ⊕ y)(2n + 1) = y(n)`.
pub fn join(x: Oracle, y: Oracle) -> Oracle {
    Oracle::join(x, y)
}

/// `⟨i, j⟩ ↦` bit `i` of column `j`, where column `j` at row `i` is
/// `family(⟨j, i⟩)` relative to `x`.
pub fn big_join(family: GoedelCode, x: Oracle) -> Oracle {
    Oracle::big_join(family, x)
}
