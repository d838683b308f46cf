//! Computable operations on program codes.

use serde::{Deserialize, Serialize};

use crate::machine::build::*;
use crate::machine::quote::{shifted_query_t, with_oracle_t, Template};
use crate::machine::window::Check;
use crate::machine::{
    eval, EvalError, GoedelCode, ObservationWindow, Oracle, Outcome, Prog, TriVerdict,
};
use crate::nat::Nat;

/// A pair of codes read as "forward, backward".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexPair {
    pub fwd: GoedelCode,
    pub bwd: GoedelCode,
}

impl IndexPair {
    pub fn new(fwd: impl Into<GoedelCode>, bwd: impl Into<GoedelCode>) -> Self {
        IndexPair {
            fwd: fwd.into(),
            bwd: bwd.into(),
        }
    }

    pub fn swap(&self) -> IndexPair {
        IndexPair {
            fwd: self.bwd.clone(),
            bwd: self.fwd.clone(),
        }
    }
}

impl std::fmt::Display for IndexPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.fwd, self.bwd)
    }
}

impl Serialize for IndexPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.fwd.to_string(), self.bwd.to_string()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (f, b) = <(String, String)>::deserialize(d)?;
        let parse = |t: &str| t.parse::<GoedelCode>().map_err(serde::de::Error::custom);
        Ok(IndexPair {
            fwd: parse(&f)?,
            bwd: parse(&b)?,
        })
    }
}

/// `φ_{star(i, j)}^x = φ_i^{φ_j^x}`.
pub fn star(i: &GoedelCode, j: &GoedelCode) -> GoedelCode {
    GoedelCode::new(with_oracle(i.program().clone(), j.program().clone()))
}

/// `(i, j) ^s* (k, l) = (i * k, l * j)`.
pub fn sstar(p: &IndexPair, q: &IndexPair) -> IndexPair {
    IndexPair {
        fwd: star(&p.fwd, &q.fwd),
        bwd: star(&q.bwd, &p.bwd),
    }
}

fn bit_check(outcome: &Outcome) -> Check {
    match outcome.value().map(Nat::to_u64) {
        Some(Some(0 | 1)) => Check::Pass,
        Some(_) => Check::Fail,
        None => Check::Unresolved,
    }
}

/// Is `φ_e^x` a binary sequence on the window?
pub fn odot_check(
    e: &GoedelCode,
    x: &Oracle,
    w: ObservationWindow,
) -> Result<TriVerdict, EvalError> {
    let mut checks = Vec::new();
    for n in 0..w.inputs() {
        checks.push((n, bit_check(&eval(e, &Nat::from(n), x, w.fuel())?)));
    }
    Ok(TriVerdict::from_checks(checks))
}

/// Is `x ≡_T φ_fwd^x` via `p` on the window? The backward leg runs against
/// the forward image as a virtual oracle.
pub fn sodot_check(
    p: &IndexPair,
    x: &Oracle,
    w: ObservationWindow,
) -> Result<TriVerdict, EvalError> {
    let forward = odot_check(&p.fwd, x, w)?;
    let round = star(&p.bwd, &p.fwd);
    let mut checks = Vec::new();
    for n in 0..w.inputs() {
        let back = eval(&round, &Nat::from(n), x, w.fuel())?;
        let check = match (back.value(), x.bit(n, w.fuel())?) {
            (Some(v), Some(b)) if *v == u64::from(b) => Check::Pass,
            (Some(_), Some(_)) => Check::Fail,
            _ => Check::Unresolved,
        };
        checks.push((n, check));
    }
    Ok(forward.and(TriVerdict::from_checks(checks)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedIndices {
    pub a: GoedelCode,
    pub b: GoedelCode,
    pub c: GoedelCode,
    pub d: GoedelCode,
    pub m: GoedelCode,
    pub id_code: GoedelCode,
}

/// Least `k` with `x(k) = 1`.
pub fn first_one() -> Prog {
    mu(not_zero(query(fst(id()))))
}

/// Least `k > p(input)` with `x(k) = 1`; the search body sees
/// `⟨k, input⟩`, so `p` is applied to `snd`.
fn next_one_after(p: Prog) -> Prog {
    let k = fst(id());
    let floor = comp(p, snd(id()));
    mu(add(monus(succ_of(floor), k.clone()), not_zero(query(k))))
}

fn succ_of(p: Prog) -> Prog {
    comp(succ(), p)
}

/// `n ↦ φ_e^x(n)` on oracles `0^e 1 ⌢ x`.
fn index_a() -> Prog {
    let e = first_one();
    let code = with_oracle_t(Template::hole(e.clone()), shifted_query_t(succ_of(e))).quote();
    interp(code, id())
}

/// On `0^i 1 0^j 1 ⌢ x`, outputs `0^j 1 0^i 1 ⌢ φ_i^x`.
fn index_d() -> Prog {
    // stage 1: n ↦ ⟨i, n⟩
    // stage 2: ⟨i, n⟩ ↦ ⟨⟨i, n⟩, s⟩ with s the position of the second 1
    // stage 3: the output bit
    let i = fst(fst(id()));
    let n = snd(fst(id()));
    let s = snd(id());
    let j = monus(monus(s.clone(), i.clone()), konst(1u64));
    let block = if_zero(
        distance(n.clone(), j),
        konst(1u64),
        if_zero(distance(n.clone(), s.clone()), konst(1u64), konst(0u64)),
    );
    let tail_code = with_oracle_t(Template::hole(i), shifted_query_t(succ_of(s.clone()))).quote();
    let tail = interp(tail_code, monus(n.clone(), succ_of(s.clone())));
    let stage3 = if_zero(monus(n, s), block, tail);
    let stage2 = comp(stage3, pair(id(), next_one_after(fst(id()))));
    comp(stage2, pair(first_one(), id()))
}

pub fn fixed_indices() -> FixedIndices {
    FixedIndices {
        a: GoedelCode::new(index_a()),
        b: GoedelCode::new(if_zero(id(), konst(0u64), query(pred()))),
        c: GoedelCode::new(if_zero(id(), konst(1u64), query(pred()))),
        d: GoedelCode::new(index_d()),
        m: GoedelCode::new(query(succ())),
        id_code: GoedelCode::new(identity_reduction()),
    }
}

/// Fuel multiplier for running a fixed index against the computation it
/// simulates.
const SIMULATION_FACTOR: u64 = 8;

/// `φ_code^x(n) = want(n)` for `n < N`, skipping positions where `want`
/// is unknown.
fn follows(
    code: &GoedelCode,
    x: &Oracle,
    w: ObservationWindow,
    fuel: u64,
    mut want: impl FnMut(u64) -> Result<Option<Nat>, EvalError>,
) -> Result<TriVerdict, EvalError> {
    let mut checks = Vec::with_capacity(w.inputs() as usize);
    for n in 0..w.inputs() {
        let check = match want(n)? {
            None => Check::Unresolved,
            Some(v) => match eval(code, &Nat::from(n), x, fuel)?.value() {
                Some(got) if *got == v => Check::Pass,
                Some(_) => Check::Fail,
                None => Check::Unresolved,
            },
        };
        checks.push((n, check));
    }
    Ok(TriVerdict::from_checks(checks))
}

fn bit_at(x: &Oracle, n: u64, w: ObservationWindow) -> Result<Option<Nat>, EvalError> {
    Ok(x.bit(n, w.fuel())?.map(|b| Nat::from(u64::from(b))))
}

/// `φ_b^x = 0 ⌢ x`.
pub fn check_b(f: &FixedIndices, x: &Oracle, w: ObservationWindow) -> Result<TriVerdict, EvalError> {
    follows(&f.b, x, w, w.fuel(), |n| if n == 0 { Ok(Some(Nat::ZERO)) } else { bit_at(x, n - 1, w) })
}

/// `φ_c^x = 1 ⌢ x`.
pub fn check_c(f: &FixedIndices, x: &Oracle, w: ObservationWindow) -> Result<TriVerdict, EvalError> {
    follows(&f.c, x, w, w.fuel(), |n| if n == 0 { Ok(Some(Nat::ONE)) } else { bit_at(x, n - 1, w) })
}

/// `φ_m^x(n) = x(n + 1)`.
pub fn check_m(f: &FixedIndices, x: &Oracle, w: ObservationWindow) -> Result<TriVerdict, EvalError> {
    follows(&f.m, x, w, w.fuel(), |n| bit_at(x, n + 1, w))
}

/// `φ_a^{0^e 1 ⌢ x} = φ_e^x`, at positions where `φ_e^x` halts.
pub fn check_a(f: &FixedIndices, e: u64, x: &Oracle, w: ObservationWindow) -> Result<TriVerdict, EvalError> {
    let padded = pad_with_index(e, x.clone());
    let e = GoedelCode::from(e);
    follows(&f.a, &padded, w, SIMULATION_FACTOR * w.fuel(), |n| {
        Ok(eval(&e, &Nat::from(n), x, w.fuel())?.value().cloned())
    })
}

/// `φ_d^{0^i 1 0^j 1 ⌢ x} = 0^j 1 0^i 1 ⌢ φ_i^x`.
pub fn check_d(f: &FixedIndices, i: u64, j: u64, x: &Oracle, w: ObservationWindow) -> Result<TriVerdict, EvalError> {
    let mut prefix = vec![false; i as usize];
    prefix.push(true);
    prefix.extend(std::iter::repeat(false).take(j as usize));
    prefix.push(true);
    let input = prepend(prefix, x.clone());
    let code = GoedelCode::from(i);
    follows(&f.d, &input, w, SIMULATION_FACTOR * w.fuel(), |n| {
        Ok(match n {
            _ if n == j || n == i + j + 1 => Some(Nat::ONE),
            _ if n < i + j + 1 => Some(Nat::ZERO),
            _ => eval(&code, &Nat::from(n - i - j - 2), x, w.fuel())?.value().cloned(),
        })
    })
}

/// `J` with `φ_J^x(⟨i, j⟩) ≃ φ_{t(j)}^x(i)`, where `t` is computed under
/// the empty oracle.
pub fn uniform_join(t: &GoedelCode) -> GoedelCode {
    let column = with_oracle(comp(t.program().clone(), snd(id())), konst(0u64));
    GoedelCode::new(interp(column, fst(id())))
}

/// `u(i)` with `u(i) ⊙ (z₁ ⊕ z₃) = (i ⊙ z₁) ⊕ z₃`.
pub fn lift_join(i: &GoedelCode) -> GoedelCode {
    GoedelCode::new(lift_program(i.program().clone()))
}

pub(crate) fn lift_program(i: Prog) -> Prog {
    let even = comp(with_oracle(i, query(add(id(), id()))), half());
    if_zero(parity(), even, query(id()))
}

/// The template `lift_program(·)` around a computed code.
pub(crate) fn lift_template(inner: Template) -> Template {
    use crate::machine::Tag;
    let even = Template::node(
        Tag::Comp,
        vec![
            with_oracle_t(inner, Template::lit(query(add(id(), id())))),
            Template::lit(half()),
        ],
    );
    Template::node(
        Tag::IfZero,
        vec![Template::lit(parity()), even, Template::lit(query(id()))],
    )
}

/// `0^e 1 ⌢ x`.
pub fn pad_with_index(e: u64, x: Oracle) -> Oracle {
    let mut prefix = vec![false; e as usize];
    prefix.push(true);
    prepend(prefix, x)
}

/// `prefix ⌢ x`.
pub fn prepend(prefix: Vec<bool>, x: Oracle) -> Oracle {
    // n ↦ prefix(n) for n < len, else x(n − len)
    let len = prefix.len() as u64;
    if let Oracle::Explicit { prefix: rest, tail } = &x {
        let mut all = prefix;
        all.extend(rest.iter().copied());
        return Oracle::Explicit {
            prefix: all,
            tail: tail.clone(),
        };
    }
    let mut reader = query(monus(id(), konst(len)));
    for (pos, bit) in prefix.iter().enumerate().rev() {
        reader = if_zero(
            distance(id(), konst(pos as u64)),
            konst(u64::from(*bit)),
            reader,
        );
    }
    Oracle::virtualize(GoedelCode::new(reader), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::eval_program;

    fn w(n: u64) -> ObservationWindow {
        ObservationWindow::new(n, 200_000).unwrap()
    }

    fn bits_of(code: &GoedelCode, x: &Oracle, n: u64) -> Vec<Option<u64>> {
        (0..n)
            .map(|k| {
                eval(code, &Nat::from(k), x, 200_000)
                    .unwrap()
                    .value()
                    .and_then(Nat::to_u64)
            })
            .collect()
    }

    fn oracle_bits(x: &Oracle, n: u64) -> Vec<Option<u64>> {
        (0..n)
            .map(|k| x.bit(k, 200_000).unwrap().map(u64::from))
            .collect()
    }

    fn x1() -> Oracle {
        "bits:1101001+10*".parse().unwrap()
    }

    #[test]
    fn star_with_identity_is_neutral() {
        let f = fixed_indices();
        let j = GoedelCode::new(complement());
        let v = crate::machine::kleene_eq(&star(&f.id_code, &j), &j, &x1(), w(32)).unwrap();
        assert!(!v.fails());
        assert!(v.holds());
    }

    #[test]
    fn double_shift() {
        let f = fixed_indices();
        let mm = star(&f.m, &f.m);
        let x = x1();
        let got = bits_of(&mm, &x, 20);
        let want: Vec<_> = (0..20)
            .map(|k| x.bit(k + 2, 1).unwrap().map(u64::from))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn star_matches_two_stage_evaluation() {
        let i = GoedelCode::new(pair(query(id()), query(succ())));
        let j = GoedelCode::new(complement());
        let x = x1();
        let virt = Oracle::virtualize(j.clone(), x.clone());
        for n in 0..16u64 {
            let one = eval(&star(&i, &j), &n.into(), &x, 10_000).unwrap();
            let two = eval(&i, &n.into(), &virt, 10_000).unwrap();
            assert_eq!(one.value(), two.value());
        }
    }

    #[test]
    fn sstar_components() {
        let f = fixed_indices();
        let p = IndexPair::new(f.c.clone(), f.m.clone());
        let q = IndexPair::new(f.m.clone(), f.c.clone());
        let r = sstar(&p, &q);
        assert_eq!(r.fwd, star(&f.c, &f.m));
        assert_eq!(r.bwd, star(&f.c, &f.m));
        // forward: 1 ⌢ (x shifted by one)
        let x = x1();
        let got = bits_of(&r.fwd, &x, 32);
        let mut want = vec![Some(1)];
        want.extend((1..32).map(|k| x.bit(k, 1).unwrap().map(u64::from)));
        assert_eq!(got, want);
        let id = IndexPair::new(f.id_code.clone(), f.id_code.clone());
        assert!(sodot_check(&sstar(&id, &p), &x, w(32)).unwrap().holds());
    }

    #[test]
    fn odot_examples() {
        let f = fixed_indices();
        let x = x1();
        assert_eq!(
            odot_check(&f.id_code, &x, w(32)).unwrap(),
            TriVerdict::Holds
        );
        let two = GoedelCode::new(konst(2u64));
        assert!(odot_check(&two, &x, w(4)).unwrap().witnesses().contains(&0));
        let never = GoedelCode::new(mu(konst(1u64)));
        assert!(odot_check(&never, &x, w(4)).unwrap().is_unknown());
    }

    #[test]
    fn sodot_examples() {
        let f = fixed_indices();
        let x = x1();
        let idp = IndexPair::new(f.id_code.clone(), f.id_code.clone());
        assert_eq!(sodot_check(&idp, &x, w(32)).unwrap(), TriVerdict::Holds);
        let cm = IndexPair::new(f.c.clone(), f.m.clone());
        assert_eq!(sodot_check(&cm, &x, w(32)).unwrap(), TriVerdict::Holds);
        let ones: Oracle = "bits:1*".parse().unwrap();
        let bb = IndexPair::new(f.b.clone(), f.b.clone());
        let v = sodot_check(&bb, &ones, w(8)).unwrap();
        assert!(v.fails());
        assert!(v.witnesses().contains(&1));
    }

    #[test]
    fn b_c_m_identities() {
        let f = fixed_indices();
        let x = x1();
        let xb = oracle_bits(&x, 32);
        let b = bits_of(&f.b, &x, 33);
        let c = bits_of(&f.c, &x, 33);
        assert_eq!(b[0], Some(0));
        assert_eq!(c[0], Some(1));
        assert_eq!(&b[1..], &xb[..]);
        assert_eq!(&c[1..], &xb[..]);
        let m = bits_of(&f.m, &x, 31);
        assert_eq!(&m[..], &xb[1..]);
    }

    #[test]
    fn a_runs_the_encoded_program() {
        let f = fixed_indices();
        let x = x1();
        for e in 0..=8u64 {
            let padded = pad_with_index(e, x.clone());
            let ec = GoedelCode::from(e);
            for n in 0..12u64 {
                let direct = eval(&ec, &n.into(), &x, 10_000).unwrap();
                if let Some(v) = direct.value() {
                    let via_a = eval(&f.a, &n.into(), &padded, 200_000).unwrap();
                    assert_eq!(via_a.value(), Some(v), "e = {e}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn d_swaps_blocks_and_applies_i() {
        let f = fixed_indices();
        let x = x1();
        for (i, j) in [(5u64, 0u64), (5, 3), (17, 5), (29, 2)] {
            let mut prefix = vec![false; i as usize];
            prefix.push(true);
            prefix.extend(std::iter::repeat(false).take(j as usize));
            prefix.push(true);
            let input = prepend(prefix, x.clone());
            let got = bits_of(&f.d, &input, 32 + i + j);
            let mut want: Vec<Option<u64>> = vec![Some(0); j as usize];
            want.push(Some(1));
            want.extend(std::iter::repeat(Some(0)).take(i as usize));
            want.push(Some(1));
            want.extend(bits_of(&GoedelCode::from(i), &x, 30));
            want.truncate(got.len());
            assert_eq!(got, want, "i = {i}, j = {j}");
        }
    }

    #[test]
    fn identity_checks_hold() {
        let f = fixed_indices();
        let x = x1();
        assert!(check_b(&f, &x, w(32)).unwrap().holds());
        assert!(check_c(&f, &x, w(32)).unwrap().holds());
        assert!(check_m(&f, &x, w(32)).unwrap().holds());
        for e in 0..=8u64 {
            assert!(!check_a(&f, e, &x, w(16)).unwrap().fails(), "e = {e}");
        }
        assert!(check_a(&f, 5, &x, w(32)).unwrap().holds());
        assert!(check_d(&f, 17, 2, &x, w(32)).unwrap().holds());
        // b is not c
        assert!(follows(&f.b, &x, w(4), 100, |_| Ok(Some(Nat::ONE))).unwrap().fails());
    }

    #[test]
    fn uniform_join_constant_family() {
        let f = fixed_indices();
        let t = GoedelCode::new(konst(crate::machine::encode(f.id_code.program())));
        let j = uniform_join(&t);
        let x = x1();
        for i in 0..6u64 {
            for col in 0..6u64 {
                let z = crate::nat::pair(&i.into(), &col.into());
                let v = eval(&j, &z, &x, 100_000).unwrap();
                assert_eq!(
                    v.value().and_then(Nat::to_u64),
                    x.bit(i, 1).unwrap().map(u64::from)
                );
            }
        }
        // ⟨0, 1⟩ = 2
        let v = eval_program(j.program(), &2u64.into(), &x, 100_000).unwrap();
        assert_eq!(
            v.value().and_then(Nat::to_u64),
            x.bit(0, 1).unwrap().map(u64::from)
        );
    }

    #[test]
    fn lift_join_examples() {
        let f = fixed_indices();
        let z: Oracle = "bits:0110101+1101*".parse().unwrap();
        let wo: Oracle = "bits:001*".parse().unwrap();
        let zw = Oracle::join(z.clone(), wo.clone());
        assert_eq!(
            bits_of(&lift_join(&f.id_code), &zw, 32),
            oracle_bits(&zw, 32)
        );
        let shifted = Oracle::join(Oracle::virtualize(f.m.clone(), z.clone()), wo.clone());
        assert_eq!(
            bits_of(&lift_join(&f.m), &zw, 32),
            oracle_bits(&shifted, 32)
        );
        assert_ne!(lift_join(&f.m), lift_join(&f.id_code));
    }

    #[test]
    fn lift_template_matches_lift() {
        let t = lift_template(Template::hole(id())).quote();
        for code in [0u64, 5, 17, 66] {
            let got = eval_program(&t, &code.into(), &Oracle::zeros(), 100_000).unwrap();
            let want = crate::machine::encode(lift_join(&GoedelCode::from(code)).program());
            assert_eq!(got.value(), Some(&want));
        }
    }
}
