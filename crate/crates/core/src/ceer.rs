//! Equivalence relations on indices: `i ≈ j` iff `φ_i^x = φ_j^x`, its
//! domain variant, and the reductions between them.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::index_algebra::star;
use crate::machine::build::*;
use crate::machine::meter::par_map;
use crate::machine::quote::{with_oracle_t, Template};
use crate::machine::window::{compare, Check};
use crate::machine::{
    dovetail_until, eval, kleene_eq, CodeTooLarge, DovetailOutcome, EvalError, GoedelCode,
    ObservationWindow, Oracle, Outcome, Tag, Task, TriVerdict,
};
use crate::nat::{pair as pair_nat, Nat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CeerError {
    #[error("no disagreement at this scale between the images of the two indices")]
    NoDisagreement,
    #[error("contract violation at bit {n}: {detail}")]
    ContractViolation { n: u64, detail: String },
    #[error("reduction program did not produce a code for {0}")]
    ReductionDiverged(String),
    #[error(transparent)]
    CodeTooLarge(#[from] CodeTooLarge),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `≈` on indices, observed through a window.
#[derive(Debug, Clone)]
pub struct BoundedEqRel {
    pub x: Oracle,
    pub window: ObservationWindow,
}

impl BoundedEqRel {
    pub fn relate(&self, i: &GoedelCode, j: &GoedelCode) -> Result<TriVerdict, EvalError> {
        kleene_eq(i, j, &self.x, self.window)
    }
}

pub fn approx_rel(x: Oracle, w: ObservationWindow) -> BoundedEqRel {
    BoundedEqRel { x, window: w }
}

/// `i ↦ i * k`, a reduction from `≈^x` to `≈^y` when `x = φ_k^y`.
pub fn forward_reduce(i: &GoedelCode, k: &GoedelCode) -> GoedelCode {
    star(i, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub k: u64,
    pub m: Nat,
    pub side: Side,
}

/// First input where both programs halt with different values. Inputs are
/// scanned at doubling fuel levels up to the window's bound; `m` is the
/// value of whichever side halted in fewer steps, ties to the left.
pub fn find_disagreement(
    va: &GoedelCode,
    vb: &GoedelCode,
    y: &Oracle,
    w: ObservationWindow,
) -> Result<Disagreement, CeerError> {
    let mut fuel = 64u64.min(w.fuel());
    loop {
        for k in 0..w.inputs() {
            let input = Nat::from(k);
            let a = eval(va, &input, y, fuel)?;
            let b = eval(vb, &input, y, fuel)?;
            if let (
                Outcome::Halted { value: u, steps: s },
                Outcome::Halted { value: v, steps: t },
            ) = (&a, &b)
            {
                if u != v {
                    let (m, side) = if s <= t {
                        (u.clone(), Side::Left)
                    } else {
                        (v.clone(), Side::Right)
                    };
                    return Ok(Disagreement { k, m, side });
                }
            }
        }
        if fuel >= w.fuel() {
            return Err(CeerError::NoDisagreement);
        }
        fuel = (fuel * 2).min(w.fuel());
    }
}

/// `φ_{r(2n)} = a` if `x(n) = 1`, `b` otherwise; `r(2n + 1)` swaps them.
pub fn build_r_pair(a: &GoedelCode, b: &GoedelCode, n: u64) -> (GoedelCode, GoedelCode) {
    let bit = query(konst(n));
    let (a, b) = (a.program().clone(), b.program().clone());
    (
        GoedelCode::new(if_zero(bit.clone(), b.clone(), a.clone())),
        GoedelCode::new(if_zero(bit, a, b)),
    )
}

/// A total map on codes, itself given by a program run under the empty oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionWitness {
    pub v_code: GoedelCode,
}

const REDUCTION_FUEL: u64 = 10_000_000;

impl ReductionWitness {
    /// `v(i) = i * k`.
    pub fn star_with(k: &GoedelCode) -> Self {
        let body = with_oracle_t(Template::hole(id()), Template::lit(k.program().clone()));
        ReductionWitness {
            v_code: GoedelCode::new(body.quote()),
        }
    }

    pub fn apply(&self, i: &GoedelCode) -> Result<GoedelCode, CeerError> {
        let out = eval(
            &self.v_code,
            &i.to_nat()?,
            Oracle::zeros_ref(),
            REDUCTION_FUEL,
        )?;
        match out.value() {
            Some(code) => Ok(GoedelCode::from_nat(code)),
            None => Err(CeerError::ReductionDiverged(i.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReduDecoding {
    pub disagreement: Disagreement,
    pub bits: Vec<Option<bool>>,
    #[serde(serialize_with = "as_text")]
    pub reduction: GoedelCode,
}

fn as_text<S: serde::Serializer>(code: &GoedelCode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&code.to_string())
}

impl ReduDecoding {
    pub fn complete(&self) -> Option<Vec<bool>> {
        self.bits.iter().copied().collect()
    }
}

/// Recovers `x` from `y` given a reduction `v` from `≈^x` to `≈^y` and two
/// indices `a ≉^x b`.
pub fn redu_decode(
    y: &Oracle,
    v: &ReductionWitness,
    a: &GoedelCode,
    b: &GoedelCode,
    w: ObservationWindow,
) -> Result<ReduDecoding, CeerError> {
    let dis = find_disagreement(&v.apply(a)?, &v.apply(b)?, y, w)?;
    let k = Nat::from(dis.k);
    let flip = dis.side == Side::Right;
    let mut bits = Vec::with_capacity(w.inputs() as usize);
    for n in 0..w.inputs() {
        let (r0, r1) = build_r_pair(a, b, n);
        let (t0, t1) = (v.apply(&r0)?, v.apply(&r1)?);
        let tasks = [Task::new(t0, k.clone(), y), Task::new(t1, k.clone(), y)];
        let found = dovetail_until(&tasks, 2 * w.fuel(), |_, value| *value == dis.m)?;
        let bit = match found {
            DovetailOutcome::Halted { task, .. } => {
                let other = &tasks[1 - task];
                if eval(&other.code, &k, y, w.fuel())?.value() == Some(&dis.m) {
                    return Err(CeerError::ContractViolation {
                        n,
                        detail: format!("both images output {} at input {}", dis.m, dis.k),
                    });
                }
                Some((task == 0) != flip)
            }
            DovetailOutcome::FuelExhausted => None,
        };
        bits.push(bit);
    }
    Ok(ReduDecoding {
        reduction: decoded_reduction(v, a, b, &dis),
        disagreement: dis,
        bits,
    })
}

/// `n ↦ [φ_{v(r(2n))}^y(k) = m]`, oriented by the side that produced `m`.
/// Both images halt at `k`, so running the first one alone terminates.
fn decoded_reduction(
    v: &ReductionWitness,
    a: &GoedelCode,
    b: &GoedelCode,
    dis: &Disagreement,
) -> GoedelCode {
    let r_even = Template::node(
        Tag::IfZero,
        vec![
            Template::node(Tag::Query, vec![Template::ConstOf(id())]),
            Template::lit(b.program().clone()),
            Template::lit(a.program().clone()),
        ],
    )
    .quote();
    let image = with_oracle(comp(v.v_code.program().clone(), r_even), konst(0u64));
    let run = interp(image, konst(dis.k));
    let (hit, miss) = match dis.side {
        Side::Left => (1u64, 0u64),
        Side::Right => (0, 1),
    };
    GoedelCode::new(if_zero(
        distance(run, konst(dis.m.clone())),
        konst(hit),
        konst(miss),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CeDomain {
    pub members: BTreeSet<u64>,
    pub incomplete: bool,
}

/// `{ n < N : φ_e^x(n) halts within the fuel bound }`.
pub fn ce_dom(e: &GoedelCode, x: &Oracle, w: ObservationWindow) -> Result<CeDomain, EvalError> {
    let mut members = BTreeSet::new();
    let mut incomplete = false;
    for n in 0..w.inputs() {
        if eval(e, &Nat::from(n), x, w.fuel())?.is_halted() {
            members.insert(n);
        } else {
            incomplete = true;
        }
    }
    Ok(CeDomain {
        members,
        incomplete,
    })
}

/// Halts on `⟨n, v⟩` iff `φ_i(n) = v`.
pub fn to_ce(i: &GoedelCode) -> GoedelCode {
    let matches = distance(comp(i.program().clone(), fst(id())), snd(id()));
    GoedelCode::new(if_zero(matches, konst(0u64), mu(konst(1u64))))
}

/// `n ↦ 0` on the domain of `φ_i`, divergent elsewhere.
pub fn from_ce(i: &GoedelCode) -> GoedelCode {
    GoedelCode::new(comp(konst(0u64), i.program().clone()))
}

/// How much more fuel a one-sided halt is given before the other side is
/// taken to diverge.
pub const STAGE_FACTOR: u64 = 8;

/// Stage comparison of two programs on explicit inputs: values must agree
/// where both halt, and a halt on one side only is a difference once the
/// other side has also failed at `STAGE_FACTOR` times the fuel.
pub fn staged_eq(
    i: &GoedelCode,
    j: &GoedelCode,
    x: &Oracle,
    inputs: &[Nat],
    w: ObservationWindow,
) -> Result<TriVerdict, EvalError> {
    staged(i, j, x, inputs, w, false)
}

/// Stage comparison of domains: `W_i` and `W_j` restricted to `probes`.
pub fn ce_relate(
    i: &GoedelCode,
    j: &GoedelCode,
    x: &Oracle,
    probes: &[Nat],
    w: ObservationWindow,
) -> Result<TriVerdict, EvalError> {
    staged(i, j, x, probes, w, true)
}

fn staged(
    i: &GoedelCode,
    j: &GoedelCode,
    x: &Oracle,
    inputs: &[Nat],
    w: ObservationWindow,
    domain_only: bool,
) -> Result<TriVerdict, EvalError> {
    let mut checks = Vec::with_capacity(inputs.len());
    for (pos, input) in inputs.iter().enumerate() {
        let a = eval(i, input, x, w.fuel())?;
        let b = eval(j, input, x, w.fuel())?;
        let check = match (a.is_halted(), b.is_halted()) {
            (true, true) if domain_only => Check::Pass,
            (true, true) => compare(&a, &b),
            (false, false) => Check::Pass,
            (true, false) | (false, true) => {
                let slow = if a.is_halted() { j } else { i };
                let again = eval(slow, input, x, STAGE_FACTOR * w.fuel())?;
                if again.is_halted() {
                    Check::Unresolved
                } else {
                    Check::Fail
                }
            }
        };
        checks.push((pos as u64, check));
    }
    Ok(TriVerdict::from_checks(checks))
}

/// Probe points for comparing `W_{to_ce(i)}` with `W_{to_ce(j)}`: the graph
/// points of both programs on the window plus `⟨n, 0⟩` and `⟨n, 1⟩`.
pub fn graph_probes(
    i: &GoedelCode,
    j: &GoedelCode,
    x: &Oracle,
    w: ObservationWindow,
) -> Result<Vec<Nat>, EvalError> {
    let mut probes = BTreeSet::new();
    for n in 0..w.inputs() {
        let input = Nat::from(n);
        probes.insert(pair_nat(&input, &Nat::ZERO));
        probes.insert(pair_nat(&input, &Nat::ONE));
        for code in [i, j] {
            if let Some(v) = eval(code, &input, x, w.fuel())?.value() {
                probes.insert(pair_nat(&input, v));
            }
        }
    }
    Ok(probes.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BridgeRecord {
    pub approx: TriVerdict,
    pub ce: TriVerdict,
    pub round_trip: TriVerdict,
}

fn decision(v: &TriVerdict) -> Option<bool> {
    match v {
        TriVerdict::Holds => Some(true),
        TriVerdict::FailsWithWitness(_) => Some(false),
        TriVerdict::Unknown(_) => None,
    }
}

/// `a` decided but `b` not the same, or the two decided oppositely. The
/// later stage may decide more than the earlier one, since it runs with more
/// fuel.
fn conflicts(a: &TriVerdict, b: &TriVerdict) -> bool {
    match (decision(a), decision(b)) {
        (Some(p), Some(q)) => p != q,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

impl BridgeRecord {
    /// `i ≈ j`, `to_ce(i) =ce to_ce(j)` and `from_ce(to_ce(i)) ≈ from_ce(to_ce(j))`
    /// must make the same decisions.
    pub fn violation(&self) -> bool {
        conflicts(&self.approx, &self.ce) || conflicts(&self.ce, &self.round_trip)
    }
}

pub fn bridge_check(
    i: &GoedelCode,
    j: &GoedelCode,
    x: &Oracle,
    w: ObservationWindow,
) -> Result<BridgeRecord, EvalError> {
    let approx = kleene_eq(i, j, x, w)?;
    let probes = graph_probes(i, j, x, w)?;
    let (ci, cj) = (to_ce(i), to_ce(j));
    let ce = ce_relate(&ci, &cj, x, &probes, w)?;
    let round_trip = staged_eq(&from_ce(&ci), &from_ce(&cj), x, &probes, w)?;
    Ok(BridgeRecord {
        approx,
        ce,
        round_trip,
    })
}

/// Outcomes of every code on every window input.
pub fn outcome_table(
    codes: &[GoedelCode],
    x: &Oracle,
    w: ObservationWindow,
) -> Result<Vec<Vec<Outcome>>, EvalError> {
    par_map(codes, |c| {
        (0..w.inputs())
            .map(|n| eval(c, &Nat::from(n), x, w.fuel()))
            .collect()
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForwardRecord {
    pub i: usize,
    pub j: usize,
    pub source: TriVerdict,
    pub image: TriVerdict,
}

impl ForwardRecord {
    pub fn violation(&self) -> bool {
        conflicts(&self.source, &self.image) || conflicts(&self.image, &self.source)
    }
}

/// Compares `≈^x` on all pairs of `codes` with `≈^y` on their images
/// `i * k`. Images run with `scale` times the window fuel, and only on
/// inputs where both sources halted; elsewhere they are left unresolved.
pub fn forward_preservation(
    codes: &[GoedelCode],
    k: &GoedelCode,
    x: &Oracle,
    y: &Oracle,
    w: ObservationWindow,
    scale: u64,
) -> Result<Vec<ForwardRecord>, EvalError> {
    let source = outcome_table(codes, x, w)?;
    let images: Vec<GoedelCode> = codes.iter().map(|c| forward_reduce(c, k)).collect();
    let image_fuel = w.fuel().saturating_mul(scale);
    let jobs: Vec<(&GoedelCode, &Vec<Outcome>)> = images.iter().zip(&source).collect();
    let image: Vec<Vec<Option<Outcome>>> = par_map(&jobs, |(code, src)| {
        src.iter()
            .enumerate()
            .map(|(n, o)| match o {
                Outcome::Halted { .. } => eval(code, &Nat::from(n as u64), y, image_fuel).map(Some),
                Outcome::FuelExhausted => Ok(None),
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    for i in 0..codes.len() {
        for j in i + 1..codes.len() {
            let src = TriVerdict::from_checks(
                (0..w.inputs())
                    .map(|n| (n, compare(&source[i][n as usize], &source[j][n as usize]))),
            );
            let img = TriVerdict::from_checks((0..w.inputs()).map(|n| {
                let check = match (&image[i][n as usize], &image[j][n as usize]) {
                    (Some(a), Some(b)) => compare(a, b),
                    _ => Check::Unresolved,
                };
                (n, check)
            }));
            records.push(ForwardRecord {
                i,
                j,
                source: src,
                image: img,
            });
        }
    }
    Ok(records)
}
