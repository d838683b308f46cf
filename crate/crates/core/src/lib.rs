//! Oracle-relative computability at desk scale: programs with oracle
//! access, index algebra on their codes, uniformity-function transformers,
//! and reductions between equivalence relations on indices.

pub mod ceer;
pub mod harness;
pub mod index_algebra;
pub mod machine;
pub mod martin;
pub mod nat;

pub use nat::Nat;
