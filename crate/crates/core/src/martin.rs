//! Uniformity functions as index words, and recovering `x` from `f(x)`
//! for a non-constant uniformly invariant `f`.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::index_algebra::{
    fixed_indices, lift_join, lift_template, prepend, sstar, star, FixedIndices, IndexPair,
};
use crate::machine::build::*;
use crate::machine::quote::{with_oracle_t, Template};
use crate::machine::window::Check;
use crate::machine::{
    encode, eval, EvalError, GoedelCode, ObservationWindow, Oracle, Prog, Tag, TriVerdict,
};
use crate::nat::{pair as pair_nat, Nat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MartinError {
    #[error("uniformity table has no entry for {0}")]
    MissingEntry(String),
    #[error("the decoder needs a computable uniformity function, but the table is finite")]
    NotComputable,
    #[error("f looks constant at this scale: f(x) and f(z) agree on the first {0} digits")]
    LooksConstant(u64),
    #[error("x and z agree on the first {0} digits")]
    SameOracle(u64),
    #[error("digit {0} could not be resolved within the fuel bound")]
    Unresolved(u64),
    #[error("index {0} is too large to use as a word exponent")]
    ExponentTooLarge(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Concrete invariant functions together with a uniformity function.
#[derive(Debug, Clone, PartialEq)]
pub enum CertifiedFamily {
    Identity,
    /// `f(x) = 1 ⌢ x`
    PrependOne,
    /// `f(x) = x ⊕ y`
    JoinWith(Oracle),
}

impl CertifiedFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CertifiedFamily::Identity => "identity",
            CertifiedFamily::PrependOne => "prepend-1",
            CertifiedFamily::JoinWith(_) => "join-with-y",
        }
    }

    pub fn apply(&self, x: &Oracle) -> Oracle {
        match self {
            CertifiedFamily::Identity => x.clone(),
            CertifiedFamily::PrependOne => prepend(vec![true], x.clone()),
            CertifiedFamily::JoinWith(y) => Oracle::join(x.clone(), y.clone()),
        }
    }

    /// `u(e)` for the order-preserving reading: `u(e) ⊙ f(x) = f(e ⊙ x)`.
    pub fn uop(&self, e: &GoedelCode) -> GoedelCode {
        match self {
            CertifiedFamily::Identity => e.clone(),
            CertifiedFamily::PrependOne => {
                let f = fixed_indices();
                star(&f.c, &star(e, &f.m))
            }
            CertifiedFamily::JoinWith(_) => lift_join(e),
        }
    }

    /// `u(i, j)` for the invariant reading.
    pub fn uti(&self, p: &IndexPair) -> IndexPair {
        match self {
            CertifiedFamily::Identity => p.clone(),
            CertifiedFamily::PrependOne => {
                let f = fixed_indices();
                let cm = IndexPair::new(f.c.clone(), f.m.clone());
                sstar(&cm, &sstar(p, &cm.swap()))
            }
            CertifiedFamily::JoinWith(_) => IndexPair::new(lift_join(&p.fwd), lift_join(&p.bwd)),
        }
    }

    /// Given a program computing codes of pairs `n ↦ ⟨fwd, bwd⟩`, a program
    /// computing the code of the forward component of `u` at that pair.
    pub fn quote_fwd(&self, pairs: Prog) -> Prog {
        let fwd = Template::hole(comp(fst(id()), pairs));
        match self {
            CertifiedFamily::Identity => fwd.quote(),
            CertifiedFamily::PrependOne => {
                let f = fixed_indices();
                with_oracle_t(
                    Template::lit(f.c.program().clone()),
                    with_oracle_t(fwd, Template::lit(f.m.program().clone())),
                )
                .quote()
            }
            CertifiedFamily::JoinWith(_) => lift_template(fwd).quote(),
        }
    }

    pub fn table(&self) -> UniformityTable {
        UniformityTable {
            provenance: self.name().to_string(),
            rule: Some(self.clone()),
            pairs: HashMap::new(),
            codes: HashMap::new(),
        }
    }
}

/// A uniformity function: explicit entries, optionally backed by a
/// computable rule for everything else.
#[derive(Debug, Clone)]
pub struct UniformityTable {
    pub provenance: String,
    rule: Option<CertifiedFamily>,
    pairs: HashMap<IndexPair, IndexPair>,
    codes: HashMap<GoedelCode, GoedelCode>,
}

impl UniformityTable {
    pub fn finite(provenance: impl Into<String>) -> Self {
        UniformityTable {
            provenance: provenance.into(),
            rule: None,
            pairs: HashMap::new(),
            codes: HashMap::new(),
        }
    }

    pub fn insert_pair(&mut self, from: IndexPair, to: IndexPair) {
        self.pairs.insert(from, to);
    }

    pub fn insert_code(&mut self, from: GoedelCode, to: GoedelCode) {
        self.codes.insert(from, to);
    }

    pub fn rule(&self) -> Option<&CertifiedFamily> {
        self.rule.as_ref()
    }

    pub fn pair(&self, p: &IndexPair) -> Result<IndexPair, MartinError> {
        if let Some(q) = self.pairs.get(p) {
            return Ok(q.clone());
        }
        self.rule
            .as_ref()
            .map(|r| r.uti(p))
            .ok_or_else(|| MartinError::MissingEntry(p.to_string()))
    }

    pub fn code(&self, e: &GoedelCode) -> Result<GoedelCode, MartinError> {
        if let Some(q) = self.codes.get(e) {
            return Ok(q.clone());
        }
        self.rule
            .as_ref()
            .map(|r| r.uop(e))
            .ok_or_else(|| MartinError::MissingEntry(e.to_string()))
    }
}

/// `u_a * u_b^e * u_c`, folded right to left.
pub fn uop_word(u_a: &GoedelCode, u_b: &GoedelCode, u_c: &GoedelCode, e: u64) -> GoedelCode {
    let mut acc = u_c.clone();
    for _ in 0..e {
        acc = star(u_b, &acc);
    }
    star(u_a, &acc)
}

/// `v(e)` for the table's order-preserving reading.
pub fn uop_for(
    u: &UniformityTable,
    fixed: &FixedIndices,
    e: u64,
) -> Result<GoedelCode, MartinError> {
    Ok(uop_word(
        &u.code(&fixed.a)?,
        &u.code(&fixed.b)?,
        &u.code(&fixed.c)?,
        e,
    ))
}

/// The factors of `v(i, j)`, leftmost first.
pub fn uti_factors(
    u: &UniformityTable,
    fixed: &FixedIndices,
    i: u64,
    j: u64,
) -> Result<Vec<IndexPair>, MartinError> {
    let p = |f: &GoedelCode, b: &GoedelCode| u.pair(&IndexPair::new(f.clone(), b.clone()));
    let (mc, mb, dd, bm, cm) = (
        p(&fixed.m, &fixed.c)?,
        p(&fixed.m, &fixed.b)?,
        p(&fixed.d, &fixed.d)?,
        p(&fixed.b, &fixed.m)?,
        p(&fixed.c, &fixed.m)?,
    );
    let rep = |q: &IndexPair, k: u64| std::iter::repeat(q.clone()).take(k as usize);
    let mut word = vec![mc.clone()];
    word.extend(rep(&mb, i));
    word.push(mc);
    word.extend(rep(&mb, j));
    word.push(dd);
    word.extend(rep(&bm, i));
    word.push(cm.clone());
    word.extend(rep(&bm, j));
    word.push(cm);
    Ok(word)
}

/// `v(i, j)`: the word above folded with `^s*`.
pub fn uti_word(
    u: &UniformityTable,
    fixed: &FixedIndices,
    i: u64,
    j: u64,
) -> Result<IndexPair, MartinError> {
    let mut word = uti_factors(u, fixed, i, j)?;
    let mut acc = word.pop().expect("nonempty word");
    while let Some(next) = word.pop() {
        acc = sstar(&next, &acc);
    }
    Ok(acc)
}

fn small_code(code: &GoedelCode) -> Result<u64, MartinError> {
    code.nat_if_small(64.0)
        .and_then(|n| n.to_u64())
        .ok_or_else(|| MartinError::ExponentTooLarge(code.to_string()))
}

fn compare_bits(lhs: Option<u64>, rhs: Option<bool>) -> Check {
    match (lhs, rhs) {
        (Some(a), Some(b)) if a == u64::from(b) => Check::Pass,
        (Some(_), Some(_)) => Check::Fail,
        _ => Check::Unresolved,
    }
}

/// Does `code ⊙ source` reproduce `target` on the window?
pub fn reproduces(
    code: &GoedelCode,
    source: &Oracle,
    target: &Oracle,
    w: ObservationWindow,
) -> Result<TriVerdict, EvalError> {
    let mut checks = Vec::new();
    for n in 0..w.inputs() {
        let lhs = eval(code, &Nat::from(n), source, w.fuel())?;
        let rhs = target.bit(n, w.fuel())?;
        checks.push((
            n,
            compare_bits(lhs.value().map(|v| v.to_u64().unwrap_or(u64::MAX)), rhs),
        ));
    }
    Ok(TriVerdict::from_checks(checks))
}

/// `v(e) ⊙ f(x) ≃ f(e ⊙ x)` on the window.
pub fn check_uop(
    family: &CertifiedFamily,
    e: u64,
    x: &Oracle,
    w: ObservationWindow,
) -> Result<TriVerdict, MartinError> {
    let fixed = fixed_indices();
    let v = uop_for(&family.table(), &fixed, e)?;
    let image = family.apply(&Oracle::virtualize(GoedelCode::from(e), x.clone()));
    Ok(reproduces(&v, &family.apply(x), &image, w)?)
}

/// `v(i, j) ^s⊙ f(x) ≃ f((i, j) ^s⊙ x)` on the window, both legs.
pub fn check_uti(
    family: &CertifiedFamily,
    p: &IndexPair,
    x: &Oracle,
    w: ObservationWindow,
) -> Result<TriVerdict, MartinError> {
    let fixed = fixed_indices();
    let v = uti_word(
        &family.table(),
        &fixed,
        small_code(&p.fwd)?,
        small_code(&p.bwd)?,
    )?;
    let y = Oracle::virtualize(p.fwd.clone(), x.clone());
    let (fx, fy) = (family.apply(x), family.apply(&y));
    let forward = reproduces(&v.fwd, &fx, &fy, w)?;
    let backward = reproduces(&v.bwd, &fy, &fx, w)?;
    Ok(forward.and(backward))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lmc1Witness {
    pub z_idx: GoedelCode,
    pub e_bridge: GoedelCode,
    pub k: u64,
    pub fx_at_k: bool,
    pub n0: u64,
    pub r_builder: GoedelCode,
    pub t_builder: GoedelCode,
}

fn first_difference(
    a: &Oracle,
    b: &Oracle,
    w: ObservationWindow,
) -> Result<Option<(u64, bool)>, MartinError> {
    for n in 0..w.inputs() {
        let (p, q) = (a.bit(n, w.fuel())?, b.bit(n, w.fuel())?);
        match (p, q) {
            (Some(p), Some(q)) if p != q => return Ok(Some((n, p))),
            (Some(_), Some(_)) => {}
            _ => return Err(MartinError::Unresolved(n)),
        }
    }
    Ok(None)
}

/// `n ↦ code of (if x(n) = 0 then z_idx else id)`.
pub fn r_builder(z_idx: &GoedelCode) -> Prog {
    Template::node(
        Tag::IfZero,
        vec![
            Template::node(Tag::Query, vec![Template::ConstOf(id())]),
            Template::lit(z_idx.program().clone()),
            Template::lit(identity_reduction()),
        ],
    )
    .quote()
}

pub fn build_lmc1_witness(
    x: &Oracle,
    z_idx: &GoedelCode,
    z_inv_idx: &GoedelCode,
    fx: &Oracle,
    fz: &Oracle,
    w: ObservationWindow,
) -> Result<Lmc1Witness, MartinError> {
    let n = w.inputs();
    let (k, fx_at_k) = first_difference(fx, fz, w)?.ok_or(MartinError::LooksConstant(n))?;
    let z = Oracle::virtualize(z_idx.clone(), x.clone());
    let (n0, x_at_n0) = first_difference(x, &z, w)?.ok_or(MartinError::SameOracle(n))?;
    let e_bridge = if_zero(
        distance(query(konst(n0)), konst(u64::from(x_at_n0))),
        identity_reduction(),
        z_inv_idx.program().clone(),
    );
    let r = r_builder(z_idx);
    let t = pair(r.clone(), konst(encode(&e_bridge)));
    Ok(Lmc1Witness {
        z_idx: z_idx.clone(),
        e_bridge: GoedelCode::new(e_bridge),
        k,
        fx_at_k,
        n0,
        r_builder: GoedelCode::new(r),
        t_builder: GoedelCode::new(t),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decoding {
    /// `None` where the bit could not be resolved within the fuel bound.
    pub bits: Vec<Option<bool>>,
    #[serde(serialize_with = "as_text")]
    pub reduction: GoedelCode,
}

fn as_text<S: serde::Serializer>(code: &GoedelCode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&code.to_string())
}

impl Decoding {
    pub fn complete(&self) -> Option<Vec<bool>> {
        self.bits.iter().copied().collect()
    }
}

impl fmt::Display for Decoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(match b {
                Some(true) => "1",
                Some(false) => "0",
                None => "?",
            })?;
        }
        Ok(())
    }
}

/// The join of the columns `f(t(n) ^s⊙ x)`, read off `f(x)`.
pub fn column_join(u: &UniformityTable, witness: &Lmc1Witness) -> Result<GoedelCode, MartinError> {
    let rule = u.rule().ok_or(MartinError::NotComputable)?;
    let fwd = rule.quote_fwd(witness.t_builder.program().clone());
    Ok(crate::index_algebra::uniform_join(&GoedelCode::new(fwd)))
}

pub fn lmc1_decode(
    fx: &Oracle,
    u: &UniformityTable,
    witness: &Lmc1Witness,
    w: ObservationWindow,
) -> Result<Decoding, MartinError> {
    let join = column_join(u, witness)?;
    let row = comp(join.program().clone(), pair(konst(witness.k), id()));
    let reduction = if witness.fx_at_k { row } else { not_zero(row) };
    let k = Nat::from(witness.k);
    let mut bits = Vec::with_capacity(w.inputs() as usize);
    for n in 0..w.inputs() {
        let out = eval(&join, &pair_nat(&k, &Nat::from(n)), fx, w.fuel())?;
        bits.push(out.value().map(|v| *v == u64::from(witness.fx_at_k)));
    }
    Ok(Decoding {
        bits,
        reduction: GoedelCode::new(reduction),
    })
}
