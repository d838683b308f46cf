//! Oracle program syntax.
//!
//! Every node denotes a partial function ℕ → ℕ relative to an oracle. The
//! nullary nodes act on the current input; compound nodes evaluate their
//! children on the same input unless stated otherwise.

use std::sync::{Arc, OnceLock};

use crate::nat::Nat;

pub type Prog = Arc<Program>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Program {
    /// Constant function.
    Const(Nat),
    /// Identity on the input.
    Id,
    Succ,
    /// Truncated predecessor.
    Pred,
    /// `⌊n / 2⌋`.
    Half,
    /// `⟨p(n), q(n)⟩`.
    PairMk(Prog, Prog),
    Fst(Prog),
    Snd(Prog),
    IfZero(Prog, Prog, Prog),
    /// `outer(inner(n))`.
    Comp(Prog, Prog),
    /// Least `k` with `body(⟨k, n⟩) = 0`.
    MuSearch(Prog),
    /// Oracle value at index `p(n)`.
    Query(Prog),
    /// Runs `body` with each oracle query `q` answered by `lens(q)`, the
    /// lens itself running against the surrounding oracle.
    WithOracle(Prog, Prog),
    /// Runs the program coded by `code(n)` on `arg(n)`, surrounding oracle.
    Interp(Prog, Prog),
    Add(Prog, Prog),
    /// Truncated subtraction.
    Monus(Prog, Prog),
}

/// Constructor discriminant, shared by the numbering and the quoting layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Id,
    Succ,
    Pred,
    Half,
    Const,
    Query,
    Fst,
    Snd,
    MuSearch,
    PairMk,
    Comp,
    Add,
    Monus,
    WithOracle,
    Interp,
    IfZero,
}

impl Tag {
    pub fn arity(self) -> usize {
        match self {
            Tag::Id | Tag::Succ | Tag::Pred | Tag::Half | Tag::Const => 0,
            Tag::Query | Tag::Fst | Tag::Snd | Tag::MuSearch => 1,
            Tag::PairMk | Tag::Comp | Tag::Add | Tag::Monus | Tag::WithOracle | Tag::Interp => 2,
            Tag::IfZero => 3,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Tag::Id => "id",
            Tag::Succ => "succ",
            Tag::Pred => "pred",
            Tag::Half => "half",
            Tag::Const => "const",
            Tag::Query => "query",
            Tag::Fst => "fst",
            Tag::Snd => "snd",
            Tag::MuSearch => "mu",
            Tag::PairMk => "pair",
            Tag::Comp => "comp",
            Tag::Add => "add",
            Tag::Monus => "monus",
            Tag::WithOracle => "withoracle",
            Tag::Interp => "interp",
            Tag::IfZero => "ifzero",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Tag> {
        Tag::ALL.iter().copied().find(|t| t.keyword() == word)
    }

    pub const ALL: [Tag; 16] = [
        Tag::Id,
        Tag::Succ,
        Tag::Pred,
        Tag::Half,
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
}

impl Program {
    pub fn tag(&self) -> Tag {
        match self {
            Program::Const(_) => Tag::Const,
            Program::Id => Tag::Id,
            Program::Succ => Tag::Succ,
            Program::Pred => Tag::Pred,
            Program::Half => Tag::Half,
            Program::PairMk(..) => Tag::PairMk,
            Program::Fst(_) => Tag::Fst,
            Program::Snd(_) => Tag::Snd,
            Program::IfZero(..) => Tag::IfZero,
            Program::Comp(..) => Tag::Comp,
            Program::MuSearch(_) => Tag::MuSearch,
            Program::Query(_) => Tag::Query,
            Program::WithOracle(..) => Tag::WithOracle,
            Program::Interp(..) => Tag::Interp,
            Program::Add(..) => Tag::Add,
            Program::Monus(..) => Tag::Monus,
        }
    }

    /// Children in syntactic order.
    pub fn children(&self) -> Vec<&Prog> {
        match self {
            Program::Const(_) | Program::Id | Program::Succ | Program::Pred | Program::Half => {
                vec![]
            }
            Program::Fst(p) | Program::Snd(p) | Program::MuSearch(p) | Program::Query(p) => vec![p],
            Program::PairMk(p, q)
            | Program::Comp(p, q)
            | Program::WithOracle(p, q)
            | Program::Interp(p, q)
            | Program::Add(p, q)
            | Program::Monus(p, q) => vec![p, q],
            Program::IfZero(c, t, e) => vec![c, t, e],
        }
    }

    /// Rebuilds a compound node from its tag and children.
    ///
    /// Panics if `children.len()` does not match the tag arity or the tag is
    /// `Const` (which carries a value, not children).
    pub fn from_parts(tag: Tag, mut children: Vec<Prog>) -> Program {
        assert_eq!(children.len(), tag.arity(), "wrong arity for {tag:?}");
        let mut next = || children.remove(0);
        match tag {
            Tag::Id => Program::Id,
            Tag::Succ => Program::Succ,
            Tag::Pred => Program::Pred,
            Tag::Half => Program::Half,
            Tag::Const => panic!("Const carries a value"),
            Tag::Query => Program::Query(next()),
            Tag::Fst => Program::Fst(next()),
            Tag::Snd => Program::Snd(next()),
            Tag::MuSearch => Program::MuSearch(next()),
            Tag::PairMk => Program::PairMk(next(), next()),
            Tag::Comp => Program::Comp(next(), next()),
            Tag::Add => Program::Add(next(), next()),
            Tag::Monus => Program::Monus(next(), next()),
            Tag::WithOracle => Program::WithOracle(next(), next()),
            Tag::Interp => Program::Interp(next(), next()),
            Tag::IfZero => Program::IfZero(next(), next(), next()),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        let mut count = 0;
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            count += 1;
            stack.extend(p.children().into_iter().map(|c| &**c));
        }
        count
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self, 1usize)];
        while let Some((p, d)) = stack.pop() {
            best = best.max(d);
            stack.extend(p.children().into_iter().map(|c| (&**c, d + 1)));
        }
        best
    }

    /// Whether `needle` occurs as a subterm.
    pub fn contains(&self, needle: &Program) -> bool {
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            if p == needle {
                return true;
            }
            stack.extend(p.children().into_iter().map(|c| &**c));
        }
        false
    }

    fn take_children(&mut self, out: &mut Vec<Prog>) {
        let leaf = leaf();
        let mut grab = |slot: &mut Prog| out.push(std::mem::replace(slot, leaf.clone()));
        match self {
            Program::Const(_) | Program::Id | Program::Succ | Program::Pred | Program::Half => {}
            Program::Fst(p) | Program::Snd(p) | Program::MuSearch(p) | Program::Query(p) => grab(p),
            Program::PairMk(p, q)
            | Program::Comp(p, q)
            | Program::WithOracle(p, q)
            | Program::Interp(p, q)
            | Program::Add(p, q)
            | Program::Monus(p, q) => {
                grab(p);
                grab(q);
            }
            Program::IfZero(c, t, e) => {
                grab(c);
                grab(t);
                grab(e);
            }
        }
    }
}

fn leaf() -> &'static Prog {
    static LEAF: OnceLock<Prog> = OnceLock::new();
    LEAF.get_or_init(|| Arc::new(Program::Id))
}

// Decoded run-time codes can be arbitrarily deep; dropping them must not
// recurse on the call stack.
impl Drop for Program {
    fn drop(&mut self) {
        let mut pending = Vec::new();
        self.take_children(&mut pending);
        while let Some(child) = pending.pop() {
            if let Ok(mut owned) = Arc::try_unwrap(child) {
                owned.take_children(&mut pending);
            }
        }
    }
}

/// Smart constructors and small derived programs.
pub mod build {
    use super::*;

    pub fn konst(k: impl Into<Nat>) -> Prog {
        Arc::new(Program::Const(k.into()))
    }

    pub fn id() -> Prog {
        Arc::new(Program::Id)
    }

    pub fn succ() -> Prog {
        Arc::new(Program::Succ)
    }

    pub fn pred() -> Prog {
        Arc::new(Program::Pred)
    }

    pub fn pair(p: Prog, q: Prog) -> Prog {
        Arc::new(Program::PairMk(p, q))
    }

    pub fn fst(p: Prog) -> Prog {
        Arc::new(Program::Fst(p))
    }

    pub fn snd(p: Prog) -> Prog {
        Arc::new(Program::Snd(p))
    }

    pub fn if_zero(cond: Prog, then: Prog, otherwise: Prog) -> Prog {
        Arc::new(Program::IfZero(cond, then, otherwise))
    }

    pub fn comp(outer: Prog, inner: Prog) -> Prog {
        Arc::new(Program::Comp(outer, inner))
    }

    pub fn mu(body: Prog) -> Prog {
        Arc::new(Program::MuSearch(body))
    }

    pub fn query(index: Prog) -> Prog {
        Arc::new(Program::Query(index))
    }

    pub fn with_oracle(body: Prog, lens: Prog) -> Prog {
        Arc::new(Program::WithOracle(body, lens))
    }

    pub fn interp(code: Prog, arg: Prog) -> Prog {
        Arc::new(Program::Interp(code, arg))
    }

    pub fn add(p: Prog, q: Prog) -> Prog {
        Arc::new(Program::Add(p, q))
    }

    pub fn monus(p: Prog, q: Prog) -> Prog {
        Arc::new(Program::Monus(p, q))
    }

    /// Zero iff `p(n) = q(n)`.
    pub fn distance(p: Prog, q: Prog) -> Prog {
        add(monus(p.clone(), q.clone()), monus(q, p))
    }

    /// `1` if `p(n) = 0`, else `0`.
    pub fn not_zero(p: Prog) -> Prog {
        if_zero(p, konst(1u64), konst(0u64))
    }

    pub fn half() -> Prog {
        Arc::new(Program::Half)
    }

    /// `n mod 2`.
    pub fn parity() -> Prog {
        monus(id(), add(half(), half()))
    }

    /// `k · n` by shift-and-add on the input.
    pub fn times(k: u64) -> Prog {
        match k {
            0 => konst(0u64),
            1 => id(),
            _ if k % 2 == 0 => comp(add(id(), id()), times(k / 2)),
            _ => add(id(), times(k - 1)),
        }
    }

    /// `p(n) + c`.
    pub fn plus_const(p: Prog, c: impl Into<Nat>) -> Prog {
        add(p, konst(c))
    }

    /// The oracle itself, `n ↦ x(n)`.
    pub fn identity_reduction() -> Prog {
        query(id())
    }

    /// `n ↦ 1 − x(n)`.
    pub fn complement() -> Prog {
        not_zero(query(id()))
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    #[test]
    fn size_and_depth() {
        let p = if_zero(query(id()), konst(1u64), konst(0u64));
        assert_eq!(p.size(), 5);
        assert_eq!(p.depth(), 3);
        assert!(p.contains(&Program::Query(id())));
        assert!(!p.contains(&Program::Succ));
    }

    #[test]
    fn parts_round_trip() {
        for tag in Tag::ALL {
            if tag == Tag::Const {
                continue;
            }
            let kids: Vec<Prog> = (0..tag.arity()).map(|i| konst(i as u64)).collect();
            let p = Program::from_parts(tag, kids.clone());
            assert_eq!(p.tag(), tag);
            assert_eq!(p.children().into_iter().cloned().collect::<Vec<_>>(), kids);
            assert_eq!(Tag::from_keyword(tag.keyword()), Some(tag));
        }
    }

    #[test]
    fn deep_chain_drops_without_overflow() {
        let mut p = id();
        for _ in 0..500_000 {
            p = fst(p);
        }
        assert_eq!(p.tag(), Tag::Fst);
        drop(p);
    }
}
