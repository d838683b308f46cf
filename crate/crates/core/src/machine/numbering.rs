//! Bijective Gödel numbering of programs.
//!
//! Codes 0, 1, 2, 3 are `Id`, `Succ`, `Pred`, `Half`. Every other code `n`
//! splits as `n − 4 = 12·payload + tag`, where the payload is the constant itself for
//! `Const`, the child code for unary nodes, `⟨p, q⟩` for binary nodes and
//! `⟨c, ⟨t, e⟩⟩` for `IfZero`. Every natural decodes, and decoding inverts
//! encoding, so there are no invalid codes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use super::program::{Prog, Program, Tag};
use super::sexpr::{self, ParseError};
use crate::nat::{pair, unpair, Nat};

/// Tags in payload order; a node's numeric tag is its position here.
pub(crate) const COMPOUND_TAGS: [Tag; 12] = [
    Tag::Const,
    Tag::Query,
    Tag::Fst,
    Tag::Snd,
    Tag::MuSearch,
    Tag::PairMk,
    Tag::Comp,
    Tag::Add,
    Tag::Monus,
    Tag::WithOracle,
    Tag::Interp,
    Tag::IfZero,
];

pub(crate) const NULLARY: u64 = 4;
pub(crate) const RADIX: u64 = COMPOUND_TAGS.len() as u64;

/// Numeric offset such that `code = offset(tag) + RADIX · payload`.
pub(crate) fn offset(tag: Tag) -> u64 {
    match tag {
        Tag::Id => 0,
        Tag::Succ => 1,
        Tag::Pred => 2,
        Tag::Half => 3,
        _ => {
            NULLARY
                + COMPOUND_TAGS
                    .iter()
                    .position(|t| *t == tag)
                    .expect("compound tag") as u64
        }
    }
}

/// Codes above this many bits are never materialized.
pub const MAX_CODE_BITS: f64 = (1u64 << 22) as f64;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("code would need about {estimated_bits:.0} bits, above the {limit:.0}-bit materialization limit")]
pub struct CodeTooLarge {
    pub estimated_bits: f64,
    pub limit: f64,
}

/// Combines child codes into the payload of a node.
pub(crate) fn payload_of(children: &[Nat]) -> Nat {
    match children {
        [p] => p.clone(),
        [p, q] => pair(p, q),
        [c, t, e] => pair(c, &pair(t, e)),
        _ => unreachable!("payload arity"),
    }
}

pub fn encode(program: &Program) -> Nat {
    enum Step<'a> {
        Visit(&'a Program),
        Build(&'a Program),
    }
    // Builders share subterms, so memoize on node identity.
    let mut memo: HashMap<*const Program, Nat> = HashMap::new();
    let mut work = vec![Step::Visit(program)];
    let mut values: Vec<Nat> = Vec::new();
    while let Some(step) = work.pop() {
        match step {
            Step::Visit(p) => {
                if let Some(v) = memo.get(&(p as *const Program)) {
                    values.push(v.clone());
                    continue;
                }
                match p {
                    Program::Id | Program::Succ | Program::Pred | Program::Half => {
                        values.push(Nat::from(offset(p.tag())))
                    }
                    Program::Const(k) => {
                        values.push(k.mul_small(RADIX).add(&Nat::from(offset(Tag::Const))));
                    }
                    _ => {
                        work.push(Step::Build(p));
                        for kid in p.children().into_iter().rev() {
                            work.push(Step::Visit(kid));
                        }
                    }
                }
            }
            Step::Build(p) => {
                let kids = values.split_off(values.len() - p.tag().arity());
                let code = payload_of(&kids)
                    .mul_small(RADIX)
                    .add(&Nat::from(offset(p.tag())));
                memo.insert(p as *const Program, code.clone());
                values.push(code);
            }
        }
    }
    values.pop().expect("one value")
}

pub fn decode(code: &Nat) -> Program {
    enum Step {
        Visit(Nat),
        Build(Tag),
    }
    let mut work = vec![Step::Visit(code.clone())];
    let mut built: Vec<Prog> = Vec::new();
    while let Some(step) = work.pop() {
        match step {
            Step::Visit(n) => {
                if let Some(small) = n.to_u64().filter(|v| *v < NULLARY) {
                    built.push(Arc::new(match small {
                        0 => Program::Id,
                        1 => Program::Succ,
                        2 => Program::Pred,
                        _ => Program::Half,
                    }));
                    continue;
                }
                let (payload, tag_index) = n.monus(&Nat::from(NULLARY)).div_rem_small(RADIX);
                let tag = COMPOUND_TAGS[tag_index as usize];
                match tag.arity() {
                    0 => built.push(Arc::new(Program::Const(payload))),
                    1 => {
                        work.push(Step::Build(tag));
                        work.push(Step::Visit(payload));
                    }
                    2 => {
                        let (p, q) = unpair(&payload);
                        work.push(Step::Build(tag));
                        work.push(Step::Visit(q));
                        work.push(Step::Visit(p));
                    }
                    _ => {
                        let (c, rest) = unpair(&payload);
                        let (t, e) = unpair(&rest);
                        work.push(Step::Build(tag));
                        work.push(Step::Visit(e));
                        work.push(Step::Visit(t));
                        work.push(Step::Visit(c));
                    }
                }
            }
            Step::Build(tag) => {
                let kids = built.split_off(built.len() - tag.arity());
                built.push(Arc::new(Program::from_parts(tag, kids)));
            }
        }
    }
    let root = built.pop().expect("one program");
    Arc::try_unwrap(root).unwrap_or_else(|shared| (*shared).clone())
}

/// Approximate `log2(code + 1)` without materializing the code.
pub fn estimated_bits(program: &Program) -> f64 {
    fn log_add(a: f64, b: f64) -> f64 {
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        hi + (1.0 + (lo - hi).exp2()).log2()
    }
    fn node(offset: u64, payload_log: f64) -> f64 {
        log_add(
            (RADIX as f64).log2() + payload_log,
            (offset as f64 + 1.0).log2(),
        )
    }
    fn pair_log(a: f64, b: f64) -> f64 {
        // ⟨a, b⟩ + 1 ≈ (a + b + 1)² / 2
        2.0 * log_add(log_add(a, b), 0.0) - 1.0
    }
    fn go(p: &Program, memo: &mut HashMap<*const Program, f64>) -> f64 {
        if let Some(v) = memo.get(&(p as *const Program)) {
            return *v;
        }
        let v = match p {
            Program::Id | Program::Succ | Program::Pred | Program::Half => {
                ((offset(p.tag()) + 1) as f64).log2()
            }
            Program::Const(k) => node(offset(Tag::Const), (k.bits() as f64).max(0.0)),
            _ => {
                let kids: Vec<f64> = p.children().into_iter().map(|c| go(c, memo)).collect();
                let payload = match kids.as_slice() {
                    [a] => *a,
                    [a, b] => pair_log(*a, *b),
                    [a, b, c] => pair_log(*a, pair_log(*b, *c)),
                    _ => unreachable!(),
                };
                node(offset(p.tag()), payload)
            }
        };
        memo.insert(p as *const Program, v);
        v
    }
    go(program, &mut HashMap::new())
}

/// A program index. Structural equality coincides with numeric equality
/// because the numbering is a bijection; the number itself is computed on
/// demand since codes of composed programs grow doubly exponentially with
/// nesting depth.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GoedelCode(Prog);

impl GoedelCode {
    pub fn new(program: Prog) -> Self {
        GoedelCode(program)
    }

    pub fn from_nat(code: &Nat) -> Self {
        GoedelCode(Arc::new(decode(code)))
    }

    pub fn program(&self) -> &Prog {
        &self.0
    }

    pub fn into_program(self) -> Prog {
        self.0
    }

    pub fn estimated_bits(&self) -> f64 {
        estimated_bits(&self.0)
    }

    pub fn to_nat(&self) -> Result<Nat, CodeTooLarge> {
        let estimated_bits = self.estimated_bits();
        if estimated_bits > MAX_CODE_BITS {
            return Err(CodeTooLarge {
                estimated_bits,
                limit: MAX_CODE_BITS,
            });
        }
        Ok(encode(&self.0))
    }

    /// The code as a number when it is small enough to print.
    pub fn nat_if_small(&self, max_bits: f64) -> Option<Nat> {
        (self.estimated_bits() <= max_bits).then(|| encode(&self.0))
    }
}

impl From<Prog> for GoedelCode {
    fn from(p: Prog) -> Self {
        GoedelCode(p)
    }
}

impl From<Program> for GoedelCode {
    fn from(p: Program) -> Self {
        GoedelCode(Arc::new(p))
    }
}

impl From<u64> for GoedelCode {
    fn from(n: u64) -> Self {
        GoedelCode::from_nat(&Nat::from(n))
    }
}

impl fmt::Display for GoedelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sexpr::print(&self.0))
    }
}

impl fmt::Debug for GoedelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GoedelCode({self})")
    }
}

/// Accepts either a bare numeral (a code) or an s-expression.
impl FromStr for GoedelCode {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        sexpr::parse(s).map(GoedelCode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::program::build::pair;
    use crate::machine::program::build::*;

    #[test]
    fn smallest_codes() {
        assert_eq!(decode(&0u64.into()), Program::Id);
        assert_eq!(decode(&1u64.into()), Program::Succ);
        assert_eq!(decode(&2u64.into()), Program::Pred);
        assert_eq!(decode(&3u64.into()), Program::Half);
        assert_eq!(decode(&4u64.into()), Program::Const(Nat::ZERO));
        assert_eq!(decode(&5u64.into()), Program::Query(id()));
        assert_eq!(decode(&16u64.into()), Program::Const(Nat::ONE));
    }

    #[test]
    fn hand_computed_codes() {
        // Const(0) = 4 + 12·0
        assert_eq!(encode(&konst(0u64)), 4u64);
        // Query(Succ) = 5 + 12·1
        assert_eq!(encode(&query(succ())), 17u64);
        // PairMk(Id, Id) = 9 + 12·⟨0, 0⟩
        assert_eq!(encode(&pair(id(), id())), 9u64);
        // IfZero(Query Id, Const 1, Const 0) = 15 + 12·⟨5, ⟨16, 4⟩⟩
        //   ⟨16, 4⟩ = 210 + 4 = 214, ⟨5, 214⟩ = 24090 + 214 = 24304
        assert_eq!(encode(&complement()), 15u64 + 12 * 24304);
    }

    #[test]
    fn offsets_are_distinct() {
        let mut seen: Vec<u64> = Tag::ALL.iter().map(|t| offset(*t)).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn bit_estimate_tracks_reality() {
        let p = with_oracle(complement(), if_zero(id(), konst(0u64), query(pred())));
        let exact = encode(&p).bits() as f64;
        let est = estimated_bits(&p);
        assert!(
            est >= exact - 1.0 && est <= 1.2 * exact + 4.0,
            "exact {exact} est {est}"
        );
    }

    #[test]
    fn enormous_codes_are_refused() {
        let mut p = complement();
        for _ in 0..40 {
            p = with_oracle(complement(), p);
        }
        assert!(GoedelCode::new(p).to_nat().is_err());
    }
}
