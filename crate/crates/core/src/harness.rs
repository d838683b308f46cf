//! Named property suites, sample generators, the two end-to-end demos, and
//! the line-delimited report format.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::ceer::{bridge_check, forward_preservation, redu_decode, CeerError, ReductionWitness, STAGE_FACTOR};
use crate::index_algebra::{
    check_a, check_b, check_c, check_d, check_m, fixed_indices, lift_join, odot_check, sodot_check, star, uniform_join,
    IndexPair,
};
use crate::machine::build::*;
use crate::machine::meter::{measure, par_map};
use crate::machine::quote::{shifted_query_t, Template};
use crate::machine::sexpr::print;
use crate::machine::{
    eval, kleene_eq, EvalError, GoedelCode, ObservationWindow, Oracle, Outcome, Prog, Program, Tag, TriVerdict,
};
use crate::martin::{build_lmc1_witness, check_uop, check_uti, lmc1_decode, reproduces, CertifiedFamily, MartinError};
use crate::nat::{unpair, Nat};

pub const SUITES: [&str; 7] = ["fixed-indices", "star-laws", "join-laws", "comvar", "lmc1", "redu", "ceer-bridge"];

pub const SCHEMA: &str = "v1";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown suite `{0}`; valid suites are: {list}", list = SUITES.join(", "))]
    UnknownSuite(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Martin(#[from] MartinError),
    #[error(transparent)]
    Ceer(#[from] CeerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub window: ObservationWindow,
    pub seed: u64,
    /// Used in place of random oracles when set.
    pub oracle: Option<Oracle>,
    pub report_path: Option<PathBuf>,
    /// Overrides the per-suite sample counts.
    pub samples: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { window: ObservationWindow::DEFAULT, seed: 0, oracle: None, report_path: None, samples: None }
    }
}

impl RunConfig {
    fn count(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn oracle(&self, rng: &mut ChaCha8Rng) -> Oracle {
        match &self.oracle {
            Some(x) => x.clone(),
            None => random_oracle(rng),
        }
    }

    /// The flags that reproduce this configuration.
    pub fn describe(&self) -> String {
        let mut s = format!("--window {} --fuel {} --seed {}", self.window.inputs(), self.window.fuel(), self.seed);
        if let Some(x) = &self.oracle {
            write!(s, " --oracle {x}").unwrap();
        }
        if let Some(n) = self.samples {
            write!(s, " --samples {n}").unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
    ContractViolation,
}

impl From<&TriVerdict> for Verdict {
    fn from(v: &TriVerdict) -> Self {
        match v {
            TriVerdict::Holds => Verdict::Holds,
            TriVerdict::FailsWithWitness(_) => Verdict::Fails,
            TriVerdict::Unknown(_) => Verdict::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<u64>>,
    /// Evaluation steps spent on the check.
    pub elapsed: u64,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub holds: usize,
    pub fails: usize,
    pub unknown: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    records: Vec<Record>,
}

impl Report {
    pub fn new(command: impl Into<String>, mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        Report { command: command.into(), records }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Records whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.name.starts_with(prefix))
    }

    pub fn summary(&self) -> Summary {
        let count = |v: Verdict| self.records.iter().filter(|r| r.verdict == v).count();
        Summary {
            records: self.records.len(),
            holds: count(Verdict::Holds),
            fails: count(Verdict::Fails),
            unknown: count(Verdict::Unknown),
            violations: count(Verdict::ContractViolation),
        }
    }

    pub fn passed(&self) -> bool {
        let s = self.summary();
        s.fails == 0 && s.violations == 0
    }

    /// Header line, one line per record, summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let head = json!({ "schema": SCHEMA, "command": self.command });
        writeln!(out, "{head}").unwrap();
        for r in &self.records {
            writeln!(out, "{}", serde_json::to_string(r).expect("records serialize")).unwrap();
        }
        writeln!(out, "{}", json!({ "summary": self.summary() })).unwrap();
        out
    }
}

/// A computable oracle: usually periodic with a short preperiod and a
/// non-constant period, sometimes the parity of a random total program.
pub fn random_oracle(rng: &mut impl Rng) -> Oracle {
    if rng.gen_range(0..4) == 0 {
        let p = random_program_with(rng, 5, false);
        return Oracle::from_program(GoedelCode::new(comp(parity(), p)));
    }
    let prefix = (0..rng.gen_range(0..=10)).map(|_| rng.gen()).collect();
    let mut cycle: Vec<bool> = (0..rng.gen_range(2..=6)).map(|_| rng.gen()).collect();
    if cycle.iter().all(|b| *b == cycle[0]) {
        cycle[0] = !cycle[0];
    }
    Oracle::periodic(prefix, cycle)
}

/// A random program of about `size` nodes, biased toward terminating
/// shapes: searches and interpretation are rare.
pub fn random_program(rng: &mut impl Rng, size: u32) -> Prog {
    random_program_with(rng, size, true)
}

/// Without `partial`, no searches or interpretation, so the program is total
/// on every oracle.
pub fn random_program_with(rng: &mut impl Rng, size: u32, partial: bool) -> Prog {
    if size <= 1 {
        return match rng.gen_range(0..7) {
            0 => id(),
            1 => succ(),
            2 => pred(),
            3 => half(),
            4 => konst(rng.gen_range(0..4u64)),
            5 => query(id()),
            _ => query(konst(rng.gen_range(0..8u64))),
        };
    }
    let rest = size - 1;
    let left = rest / 2;
    let sub = |rng: &mut _, n| random_program_with(rng, n, partial);
    match rng.gen_range(0..if partial { 20 } else { 18 }) {
        0..=3 => comp(sub(rng, left), sub(rng, rest - left)),
        4 | 5 => pair(sub(rng, left), sub(rng, rest - left)),
        6 | 7 => add(sub(rng, left), sub(rng, rest - left)),
        8 => monus(sub(rng, left), sub(rng, rest - left)),
        9..=11 => {
            let third = rest / 3;
            if_zero(sub(rng, third), sub(rng, third), sub(rng, rest - 2 * third))
        }
        12 | 13 => query(sub(rng, rest)),
        14 => fst(sub(rng, rest)),
        15 => snd(sub(rng, rest)),
        16 | 17 => with_oracle(sub(rng, left), not_zero(sub(rng, rest - left))),
        18 => mu(sub(rng, rest)),
        _ => interp(konst(rng.gen_range(0..70u64)), sub(rng, rest)),
    }
}

/// A random syntax tree over every constructor, with constants of any
/// width up to 128 bits.
pub fn random_ast(rng: &mut impl Rng, size: u32) -> Prog {
    let tag = if size <= 1 {
        [Tag::Id, Tag::Succ, Tag::Pred, Tag::Half, Tag::Const][rng.gen_range(0..5)]
    } else {
        Tag::ALL[rng.gen_range(0..Tag::ALL.len())]
    };
    let kids: Vec<Prog> = match tag.arity() {
        0 => Vec::new(),
        n => {
            let budget = size.saturating_sub(1).max(n as u32);
            (0..n).map(|_| random_ast(rng, budget / n as u32)).collect()
        }
    };
    if tag == Tag::Const {
        let bits = rng.gen_range(0..=128u32);
        let v: u128 = if bits == 0 { 0 } else { rng.gen::<u128>() >> (128 - bits) };
        return konst(Nat::from_big(v.into()));
    }
    std::sync::Arc::new(Program::from_parts(tag, kids))
}

/// The bits `x(0), …, x(len − 1)`, or `None` if one is unresolved.
pub fn prefix_bits(x: &Oracle, len: u64, fuel: u64) -> Result<Option<Vec<bool>>, EvalError> {
    (0..len).map(|n| x.bit(n, fuel)).collect::<Result<Vec<_>, _>>().map(|v| v.into_iter().collect())
}

fn bit_string(bits: &[Option<bool>]) -> String {
    bits.iter()
        .map(|b| match b {
            Some(true) => '1',
            Some(false) => '0',
            None => '?',
        })
        .collect()
}

struct Finding {
    verdict: Verdict,
    witness: Option<Vec<u64>>,
    detail: Value,
}

impl Finding {
    fn tri(v: &TriVerdict, detail: Value) -> Self {
        let w = v.witnesses();
        Finding { verdict: v.into(), witness: (!w.is_empty()).then(|| w.to_vec()), detail }
    }

    fn plain(verdict: Verdict, detail: Value) -> Self {
        Finding { verdict, witness: None, detail }
    }
}

fn run_checks<T: Sync>(
    jobs: &[(String, T)],
    check: impl Fn(&T) -> Result<Finding, HarnessError> + Sync,
) -> Result<Vec<Record>, HarnessError> {
    par_map(jobs, |(name, job)| {
        let (found, elapsed) = measure(|| check(job));
        found.map(|f| Record { name: name.clone(), verdict: f.verdict, witness: f.witness, elapsed, detail: f.detail })
    })
    .into_iter()
    .collect()
}

pub fn verify(suite: &str, cfg: &RunConfig) -> Result<Report, HarnessError> {
    let records = match suite {
        "fixed-indices" => fixed_indices_suite(cfg)?,
        "star-laws" => star_laws_suite(cfg)?,
        "join-laws" => join_laws_suite(cfg)?,
        "comvar" => comvar_suite(cfg)?,
        "lmc1" => lmc1_suite(cfg)?,
        "redu" => redu_suite(cfg)?,
        "ceer-bridge" => ceer_bridge_suite(cfg)?,
        other => return Err(HarnessError::UnknownSuite(other.to_string())),
    };
    Ok(Report::new(format!("verify {suite} {}", cfg.describe()), records))
}

enum FixedJob {
    B(Oracle),
    C(Oracle),
    M(Oracle),
    A(u64, Oracle),
    D(u64, u64, Oracle),
}

const SMALL_BIT_CODES: [u64; 9] = [4, 5, 16, 17, 29, 41, 53, 65, 66];

fn fixed_indices_suite(cfg: &RunConfig) -> Result<Vec<Record>, HarnessError> {
    let mut rng = cfg.rng(1);
    let mut jobs = Vec::new();
    for s in 0..cfg.count(50) {
        let x = cfg.oracle(&mut rng);
        jobs.push((format!("b/{s:03}"), FixedJob::B(x.clone())));
        jobs.push((format!("c/{s:03}"), FixedJob::C(x.clone())));
        jobs.push((format!("m/{s:03}"), FixedJob::M(x.clone())));
        for e in 0..=8 {
            jobs.push((format!("a/{s:03}/e{e}"), FixedJob::A(e, x.clone())));
        }
        let i = SMALL_BIT_CODES[rng.gen_range(0..SMALL_BIT_CODES.len())];
        let j = rng.gen_range(0..=4);
        jobs.push((format!("d/{s:03}"), FixedJob::D(i, j, x)));
    }
    let f = fixed_indices();
    let w = cfg.window;
    run_checks(&jobs, |job| {
        let (v, detail) = match job {
            FixedJob::B(x) => (check_b(&f, x, w)?, json!({ "x": x.to_string() })),
            FixedJob::C(x) => (check_c(&f, x, w)?, json!({ "x": x.to_string() })),
            FixedJob::M(x) => (check_m(&f, x, w)?, json!({ "x": x.to_string() })),
            FixedJob::A(e, x) => (check_a(&f, *e, x, w)?, json!({ "x": x.to_string(), "e": e })),
            FixedJob::D(i, j, x) => (check_d(&f, *i, *j, x, w)?, json!({ "x": x.to_string(), "i": i, "j": j })),
        };
        Ok(Finding::tri(&v, detail))
    })
}

enum LawJob {
    Compose { i: Prog, j: Prog, x: Oracle, n: u64 },
    Assoc { i: Prog, j: Prog, k: Prog, x: Oracle },
}

fn value_or_stop(r: Result<Outcome, EvalError>) -> Option<Nat> {
    r.ok().and_then(|o| o.value().cloned())
}

fn star_laws_suite(cfg: &RunConfig) -> Result<Vec<Record>, HarnessError> {
    let mut rng = cfg.rng(2);
    let w = cfg.window;
    let check = |job: &LawJob| -> Result<Finding, HarnessError> {
        match job {
            LawJob::Compose { i, j, x, n } => {
                let (ic, jc) = (GoedelCode::new(i.clone()), GoedelCode::new(j.clone()));
                let input = Nat::from(*n);
                let composed = value_or_stop(eval(&star(&ic, &jc), &input, x, w.fuel()));
                let staged = value_or_stop(eval(&ic, &input, &Oracle::virtualize(jc, x.clone()), w.fuel()));
                let verdict = match (&composed, &staged) {
                    (Some(a), Some(b)) if a == b => Verdict::Holds,
                    (Some(_), Some(_)) => Verdict::Fails,
                    _ => Verdict::Unknown,
                };
                let detail = json!({
                    "i": print(i), "j": print(j), "x": x.to_string(), "n": n,
                    "composed": composed.map(|v| v.to_string()), "staged": staged.map(|v| v.to_string()),
                });
                Ok(Finding { verdict, witness: (verdict == Verdict::Fails).then(|| vec![*n]), detail })
            }
            LawJob::Assoc { i, j, k, x } => {
                let (ic, jc, kc) = (GoedelCode::new(i.clone()), GoedelCode::new(j.clone()), GoedelCode::new(k.clone()));
                let left = star(&star(&ic, &jc), &kc);
                let right = star(&ic, &star(&jc, &kc));
                let v = kleene_eq(&left, &right, x, w)?;
                Ok(Finding::tri(&v, json!({ "i": print(i), "j": print(j), "k": print(k), "x": x.to_string() })))
            }
        }
    };
    // composition samples are drawn in batches until enough of them halt
    let target = cfg.count(500);
    let mut records = Vec::new();
    let mut halted = 0;
    let mut drawn = 0;
    while halted < target && drawn < 20 * target.max(1) {
        let batch: Vec<(String, LawJob)> = (0..100.min(20 * target.max(1) - drawn))
            .map(|b| {
                let job = LawJob::Compose {
                    i: random_program(&mut rng, 6),
                    j: not_zero(random_program(&mut rng, 4)),
                    x: cfg.oracle(&mut rng),
                    n: rng.gen_range(0..w.inputs()),
                };
                (format!("compose/{:05}", drawn + b), job)
            })
            .collect();
        drawn += batch.len();
        for r in run_checks(&batch, check)? {
            if r.verdict != Verdict::Unknown {
                halted += 1;
            }
            if halted <= target || r.verdict != Verdict::Holds {
                records.push(r);
            }
        }
    }
    let assoc: Vec<(String, LawJob)> = (0..cfg.count(200))
        .map(|s| {
            let job = LawJob::Assoc {
                i: random_program(&mut rng, 5),
                j: not_zero(random_program(&mut rng, 3)),
                k: not_zero(random_program(&mut rng, 3)),
                x: cfg.oracle(&mut rng),
            };
            (format!("assoc/{s:03}"), job)
        })
        .collect();
    records.extend(run_checks(&assoc, check)?);
    Ok(records)
}

/// Column programs for the join checks: `n ↦` a code.
pub fn join_families() -> Vec<(&'static str, GoedelCode)> {
    let shifted = shifted_query_t(id()).quote();
    let selector = Template::node(
        Tag::IfZero,
        vec![
            Template::node(Tag::Query, vec![Template::ConstOf(id())]),
            Template::lit(konst(0u64)),
            Template::lit(complement()),
        ],
    )
    .quote();
    vec![
        ("constant", GoedelCode::new(konst(crate::machine::encode(&identity_reduction())))),
        ("shifted", GoedelCode::new(shifted)),
        ("selector", GoedelCode::new(selector)),
    ]
}

enum JoinJob {
    Uniform { family: GoedelCode, x: Oracle },
    Lift { i: u64, z: Oracle, y: Oracle },
}

fn join_laws_suite(cfg: &RunConfig) -> Result<Vec<Record>, HarnessError> {
    let mut rng = cfg.rng(3);
    let w = cfg.window;
    let mut jobs = Vec::new();
    for s in 0..cfg.count(4) {
        let x = cfg.oracle(&mut rng);
        for (name, t) in join_families() {
            jobs.push((format!("join/{name}/{s:03}"), JoinJob::Uniform { family: t, x: x.clone() }));
        }
        let i = SMALL_BIT_CODES[rng.gen_range(0..SMALL_BIT_CODES.len())];
        jobs.push((format!("lift/{s:03}"), JoinJob::Lift { i, z: x, y: random_oracle(&mut rng) }));
    }
    run_checks(&jobs, |job| {
        let (v, detail) = match job {
            JoinJob::Uniform { family, x } => {
                let v = uniform_join_agrees(family, x, w)?;
                (v, json!({ "x": x.to_string(), "family": family.to_string() }))
            }
            JoinJob::Lift { i, z, y } => {
                let zy = Oracle::join(z.clone(), y.clone());
                let want = Oracle::join(Oracle::virtualize(GoedelCode::from(*i), z.clone()), y.clone());
                let lifted = lift_join(&GoedelCode::from(*i));
                let mut checks = Vec::new();
                for n in 0..w.inputs() {
                    let got = eval(&lifted, &Nat::from(n), &zy, w.fuel())?;
                    let expect = want.bit(n, w.fuel())?.map(|b| Nat::from(u64::from(b)));
                    checks.push((n, compare_value(got.value(), expect.as_ref())));
                }
                let v = TriVerdict::from_checks(checks);
                (v, json!({ "i": i, "z": z.to_string(), "y": y.to_string() }))
            }
        };
        Ok(Finding::tri(&v, detail))
    })
}

fn compare_value(a: Option<&Nat>, b: Option<&Nat>) -> crate::machine::Check {
    use crate::machine::Check;
    match (a, b) {
        (Some(u), Some(v)) if u == v => Check::Pass,
        (Some(_), Some(_)) => Check::Fail,
        _ => Check::Unresolved,
    }
}

/// Compares `uniform_join(t)` at every position below `N` with the
/// `big_join` oracle and with running column `t(j)` natively.
pub fn uniform_join_agrees(t: &GoedelCode, x: &Oracle, w: ObservationWindow) -> Result<TriVerdict, EvalError> {
    let joined = uniform_join(t);
    let direct_family = GoedelCode::new(interp(comp(with_oracle(t.program().clone(), konst(0u64)), fst(id())), snd(id())));
    let direct = Oracle::big_join(direct_family, x.clone());
    let mut checks = Vec::new();
    for z in 0..w.inputs() {
        let (row, column) = unpair(&Nat::from(z));
        let got = eval(&joined, &Nat::from(z), x, w.fuel())?;
        let via_oracle = direct.bit(z, w.fuel())?.map(|b| Nat::from(u64::from(b)));
        let native = match eval(t, &column, Oracle::zeros_ref(), w.fuel())?.value() {
            Some(code) => eval(&GoedelCode::from_nat(code), &row, x, w.fuel())?.value().cloned(),
            None => None,
        };
        let check = match (compare_value(got.value(), via_oracle.as_ref()), compare_value(got.value(), native.as_ref())) {
            (crate::machine::Check::Fail, _) | (_, crate::machine::Check::Fail) => crate::machine::Check::Fail,
            (crate::machine::Check::Pass, crate::machine::Check::Pass) => crate::machine::Check::Pass,
            _ => crate::machine::Check::Unresolved,
        };
        checks.push((z, check));
    }
    Ok(TriVerdict::from_checks(checks))
}

/// The three certified families, with the join partner drawn from `rng`.
pub fn certified_families(rng: &mut impl Rng) -> Vec<CertifiedFamily> {
    vec![CertifiedFamily::Identity, CertifiedFamily::PrependOne, CertifiedFamily::JoinWith(random_oracle(rng))]
}

/// Small pairs realizing `x ≡ φ_fwd^x` on many oracles. `(17, 29)` only
/// works when `x(0) = x(1)`.
pub const UTI_POOL: [(u64, u64); 5] = [(5, 5), (29, 17), (17, 29), (5, 66), (66, 5)];

/// Exponents below this bound are drawn for the order-preserving words.
pub const UOP_RANGE: u64 = 70;

enum ComvarJob {
    Uop(usize, u64, Oracle),
    Uti(usize, IndexPair, Oracle),
}

fn comvar_suite(cfg: &RunConfig) -> Result<Vec<Record>, HarnessError> {
    let mut rng = cfg.rng(4);
    let w = cfg.window;
    let families = certified_families(&mut rng);
    let quick = w.with_fuel(2_000);
    let mut jobs = Vec::new();
    for (fi, fam) in families.iter().enumerate() {
        for s in 0..cfg.count(100) {
            let x = cfg.oracle(&mut rng);
            let e = loop {
                let e = rng.gen_range(0..UOP_RANGE);
                if odot_check(&GoedelCode::from(e), &x, quick)?.holds() {
                    break e;
                }
            };
            jobs.push((format!("uop/{}/{s:03}", fam.name()), ComvarJob::Uop(fi, e, x)));
        }
        for s in 0..cfg.count(100) {
            let x = cfg.oracle(&mut rng);
            let p = loop {
                let (i, j) = UTI_POOL[rng.gen_range(0..UTI_POOL.len())];
                let p = IndexPair::new(GoedelCode::from(i), GoedelCode::from(j));
                if sodot_check(&p, &x, quick)?.holds() {
                    break p;
                }
            };
            jobs.push((format!("uti/{}/{s:03}", fam.name()), ComvarJob::Uti(fi, p, x)));
        }
    }
    run_checks(&jobs, |job| match job {
        ComvarJob::Uop(fi, e, x) => {
            let v = check_uop(&families[*fi], *e, x, w)?;
            Ok(Finding::tri(&v, json!({ "e": e, "x": x.to_string() })))
        }
        ComvarJob::Uti(fi, p, x) => {
            let v = check_uti(&families[*fi], p, x, w)?;
            Ok(Finding::tri(&v, json!({ "pair": p, "x": x.to_string() })))
        }
    })
}

/// Result of one decoder round trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTrip {
    pub k: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<crate::ceer::Side>,
    #[serde(rename = "recoveredBits")]
    pub recovered_bits: String,
    #[serde(rename = "expectedBits")]
    pub expected_bits: String,
    #[serde(rename = "reductionCode")]
    pub reduction_code: String,
    /// Every bit recovered correctly and the reduction code re-derives them.
    pub verified: bool,
}

impl RoundTrip {
    fn verdict(&self) -> Verdict {
        if self.verified {
            Verdict::Holds
        } else if self.recovered_bits.chars().zip(self.expected_bits.chars()).any(|(a, b)| a != '?' && b != '?' && a != b) {
            Verdict::Fails
        } else {
            Verdict::Unknown
        }
    }

    /// The record detail, without the (long) reduction code.
    fn finding(&self, x: &Oracle) -> Finding {
        let mut detail = serde_json::to_value(self).expect("round trip serializes");
        let fields = detail.as_object_mut().expect("object");
        fields.remove("reductionCode");
        fields.insert("x".into(), Value::String(x.to_string()));
        let verdict = self.verdict();
        Finding { verdict, witness: None, detail }
    }
}

/// Full lmc1 round trip on `x` with `z` the complement of `x`.
pub fn demo_lmc1(x: &Oracle, family: &CertifiedFamily, w: ObservationWindow) -> Result<RoundTrip, HarnessError> {
    let zc = GoedelCode::new(complement());
    let z = Oracle::virtualize(zc.clone(), x.clone());
    let (fx, fz) = (family.apply(x), family.apply(&z));
    let wit = build_lmc1_witness(x, &zc, &zc, &fx, &fz, w)?;
    let out = lmc1_decode(&fx, &family.table(), &wit, w)?;
    let expected: Vec<Option<bool>> = (0..w.inputs()).map(|n| x.bit(n, w.fuel())).collect::<Result<_, _>>()?;
    let rederived = reproduces(&out.reduction, &fx, x, w)?;
    Ok(RoundTrip {
        k: wit.k,
        n0: Some(wit.n0),
        m: None,
        side: None,
        verified: out.bits == expected && rederived.holds(),
        recovered_bits: bit_string(&out.bits),
        expected_bits: bit_string(&expected),
        reduction_code: out.reduction.to_string(),
    })
}

/// Full redu round trip: recovers `x` from `y` through `v = · * k` with
/// the distinguishing pair `a`, `b`.
pub fn demo_redu(
    x: &Oracle,
    y: &Oracle,
    k: &GoedelCode,
    a: &GoedelCode,
    b: &GoedelCode,
    w: ObservationWindow,
) -> Result<RoundTrip, HarnessError> {
    let v = ReductionWitness::star_with(k);
    let out = redu_decode(y, &v, a, b, w)?;
    let expected: Vec<Option<bool>> = (0..w.inputs()).map(|n| x.bit(n, w.fuel())).collect::<Result<_, _>>()?;
    let mut rederived = true;
    for n in 0..w.inputs() {
        let got = eval(&out.reduction, &Nat::from(n), y, w.fuel())?;
        let want = expected[n as usize].map(|b| Nat::from(u64::from(b)));
        rederived &= want.is_some() && got.value() == want.as_ref();
    }
    Ok(RoundTrip {
        k: out.disagreement.k,
        n0: None,
        m: Some(out.disagreement.m.to_string()),
        side: Some(out.disagreement.side),
        verified: out.bits == expected && rederived,
        recovered_bits: bit_string(&out.bits),
        expected_bits: bit_string(&expected),
        reduction_code: out.reduction.to_string(),
    })
}

fn aggregate(name: &str, trips: &[&Record]) -> Record {
    let verified = trips.iter().all(|r| r.verdict == Verdict::Holds);
    let verdict = if verified {
        Verdict::Holds
    } else if trips.iter().any(|r| matches!(r.verdict, Verdict::Fails | Verdict::ContractViolation)) {
        Verdict::Fails
    } else {
        Verdict::Unknown
    };
    Record {
        name: name.to_string(),
        verdict,
        witness: None,
        elapsed: trips.iter().map(|r| r.elapsed).sum(),
        detail: json!({ "verified": verified, "instances": trips.len() }),
    }
}

fn lmc1_suite(cfg: &RunConfig) -> Result<Vec<Record>, HarnessError> {
    let mut rng = cfg.rng(5);
    let w = cfg.window;
    let families = [CertifiedFamily::Identity, CertifiedFamily::PrependOne];
    let mut jobs = Vec::new();
    for s in 0..cfg.count(20) {
        let x = cfg.oracle(&mut rng);
        for (fi, fam) in families.iter().enumerate() {
            jobs.push((format!("lmc1/{}/{s:03}", fam.name()), (fi, x.clone())));
        }
    }
    let mut records = run_checks(&jobs, |(fi, x)| match demo_lmc1(x, &families[*fi], w) {
        Ok(trip) => Ok(trip.finding(x)),
        Err(HarnessError::Martin(e)) => Ok(Finding::plain(Verdict::Fails, json!({ "error": e.to_string(), "x": x.to_string() }))),
        Err(e) => Err(e),
    })?;
    let trips: Vec<&Record> = records.iter().collect();
    let total = aggregate("roundtrip-bits", &trips);
    records.push(total);
    Ok(records)
}

/// `y` and `k` for redu instance `s`: even instances use `y = x` with the
/// identity reduction, odd ones hide `x` in the even bits of `x ⊕ noise`.
pub fn redu_instance(s: usize, x: &Oracle, rng: &mut impl Rng) -> (Oracle, GoedelCode) {
    if s % 2 == 0 {
        (x.clone(), GoedelCode::new(identity_reduction()))
    } else {
        let noise = random_oracle(rng);
        (Oracle::join(x.clone(), noise), GoedelCode::new(query(add(id(), id()))))
    }
}

/// Number of codes whose pairs the forward check compares.
pub const FORWARD_CODES: u64 = 50;

enum ReduJob {
    Forward(Oracle, Oracle, GoedelCode),
    Decode(Oracle, Oracle, GoedelCode),
}

fn redu_suite(cfg: &RunConfig) -> Result<Vec<Record>, HarnessError> {
    let mut rng = cfg.rng(6);
    let w = cfg.window;
    let codes: Vec<GoedelCode> = (0..FORWARD_CODES).map(GoedelCode::from).collect();
    let mut jobs = Vec::new();
    for s in 0..cfg.count(20) {
        let x = cfg.oracle(&mut rng);
        let (y, k) = redu_instance(s, &x, &mut rng);
        jobs.push((format!("redu/forward/{s:03}"), ReduJob::Forward(x.clone(), y.clone(), k.clone())));
        jobs.push((format!("redu/decode/{s:03}"), ReduJob::Decode(x, y, k)));
    }
    let (a, b) = (GoedelCode::new(konst(0u64)), GoedelCode::new(konst(1u64)));
    let mut records = run_checks(&jobs, |job| match job {
        ReduJob::Forward(x, y, k) => {
            let recs = forward_preservation(&codes, k, x, y, w, STAGE_FACTOR)?;
            let decided = recs.iter().filter(|r| !r.source.is_unknown()).count();
            let bad: Vec<String> =
                recs.iter().filter(|r| r.violation()).take(5).map(|r| format!("({}, {})", r.i, r.j)).collect();
            let verdict = if bad.is_empty() { Verdict::Holds } else { Verdict::Fails };
            let detail = json!({
                "x": x.to_string(), "y": y.to_string(), "k": k.to_string(),
                "pairs": recs.len(), "decided": decided, "violations": bad,
            });
            Ok(Finding::plain(verdict, detail))
        }
        ReduJob::Decode(x, y, k) => match demo_redu(x, y, k, &a, &b, w) {
            Ok(trip) => Ok(trip.finding(x)),
            Err(HarnessError::Ceer(e @ CeerError::ContractViolation { .. })) => {
                Ok(Finding::plain(Verdict::ContractViolation, json!({ "error": e.to_string() })))
            }
            Err(HarnessError::Ceer(e)) => Ok(Finding::plain(Verdict::Fails, json!({ "error": e.to_string() }))),
            Err(e) => Err(e),
        },
    })?;
    let trips: Vec<&Record> = records.iter().filter(|r| r.name.starts_with("redu/decode/")).collect();
    let total = aggregate("roundtrip-bits", &trips);
    records.push(total);
    Ok(records)
}

/// A pair of programs for the bridge check: either independent, or the
/// second a rewrite of the first that computes the same function.
pub fn bridge_pair(rng: &mut impl Rng) -> (Prog, Prog) {
    let partial = rng.gen_range(0..4) == 0;
    let i = random_program_with(rng, 5, partial);
    let j = match rng.gen_range(0..4) {
        0 => comp(pred(), comp(succ(), i.clone())),
        1 => add(i.clone(), konst(0u64)),
        2 => comp(succ(), i.clone()),
        _ => random_program_with(rng, 5, partial),
    };
    (i, j)
}

fn ceer_bridge_suite(cfg: &RunConfig) -> Result<Vec<Record>, HarnessError> {
    let mut rng = cfg.rng(7);
    let w = cfg.window;
    let jobs: Vec<(String, (Prog, Prog, Oracle))> = (0..cfg.count(100))
        .map(|s| {
            let (i, j) = bridge_pair(&mut rng);
            (format!("bridge/{s:03}"), (i, j, cfg.oracle(&mut rng)))
        })
        .collect();
    run_checks(&jobs, |(i, j, x)| {
        let rec = bridge_check(&GoedelCode::new(i.clone()), &GoedelCode::new(j.clone()), x, w)?;
        let verdict = if rec.violation() { Verdict::Fails } else { Verdict::Holds };
        let detail = json!({
            "i": print(i), "j": print(j), "x": x.to_string(),
            "approx": rec.approx.label(), "ce": rec.ce.label(), "roundTrip": rec.round_trip.label(),
        });
        Ok(Finding::plain(verdict, detail))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig { window: ObservationWindow::new(8, 20_000).unwrap(), samples: Some(2), ..RunConfig::default() }
    }

    #[test]
    fn unknown_suite_lists_the_valid_ones() {
        let err = verify("bogus", &RunConfig::default()).unwrap_err();
        let msg = err.to_string();
        for s in SUITES {
            assert!(msg.contains(s), "{msg}");
        }
    }

    #[test]
    fn every_suite_runs_small() {
        for s in SUITES {
            let r = verify(s, &small()).unwrap();
            assert!(r.passed(), "{s}: {}", r.render());
            let sum = r.summary();
            assert_eq!(sum.records, sum.holds + sum.fails + sum.unknown + sum.violations);
        }
    }

    #[test]
    fn reports_are_sorted_and_versioned() {
        let r = verify("fixed-indices", &small()).unwrap();
        let names: Vec<&str> = r.records().iter().map(|r| r.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        let text = r.render();
        let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["schema"], "v1");
        let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        assert_eq!(last["summary"]["records"], r.records().len());
    }

    #[test]
    fn given_oracle_replaces_random_ones() {
        let cfg = RunConfig { oracle: Some("bits:1*".parse().unwrap()), ..small() };
        let r = verify("fixed-indices", &cfg).unwrap();
        assert!(r.records().iter().all(|rec| rec.detail["x"] == "bits:1*"));
        assert!(r.command.contains("--oracle bits:1*"));
    }

    #[test]
    fn random_ast_covers_every_constructor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..500 {
            seen.insert(random_ast(&mut rng, 4).tag());
        }
        assert_eq!(seen.len(), Tag::ALL.len());
    }

    #[test]
    fn demo_lmc1_on_a_fixed_oracle() {
        let x: Oracle = "bits:0110*".parse().unwrap();
        let trip = demo_lmc1(&x, &CertifiedFamily::PrependOne, ObservationWindow::DEFAULT).unwrap();
        assert!(trip.verified);
        assert_eq!(trip.recovered_bits, "0110".repeat(8));
    }
}
