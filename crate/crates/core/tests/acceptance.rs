//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relcomp::harness::{random_ast, verify, Record, Report, RunConfig, Verdict, SUITES};
use relcomp::machine::{decode, encode, Program};
use relcomp::Nat;

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn suite(name: &str) -> Report {
    verify(name, &RunConfig::default()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn count(records: &[&Record], v: Verdict) -> usize {
    records.iter().filter(|r| r.verdict == v).count()
}

fn numbering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad_trees = 0;
    for _ in 0..10_000 {
        let size = rng.gen_range(1..=30);
        let p = random_ast(&mut rng, size);
        if decode(&encode(&p)) != *p {
            bad_trees += 1;
        }
    }
    let bad_codes = (0..10_000u64).filter(|n| encode(&decode(&Nat::from(*n))) != *n).count();
    let all_codes_distinct = {
        let progs: std::collections::HashSet<Program> = (0..10_000u64).map(|n| decode(&Nat::from(n))).collect();
        progs.len() == 10_000
    };
    outcome(
        bad_trees == 0 && bad_codes == 0 && all_codes_distinct,
        format!("decode(encode(p)) failed on {bad_trees}/10000 trees, encode(decode(n)) on {bad_codes}/10000 codes"),
    )
}

fn composition() -> Outcome {
    let r = suite("star-laws");
    let compose: Vec<&Record> = r.group("compose/").collect();
    let assoc: Vec<&Record> = r.group("assoc/").collect();
    let halted = compose.iter().filter(|c| c.verdict != Verdict::Unknown).count();
    let compose_fails = count(&compose, Verdict::Fails);
    let assoc_fails = count(&assoc, Verdict::Fails);
    outcome(
        halted >= 500 && compose_fails == 0 && assoc.len() == 200 && assoc_fails == 0,
        format!(
            "{halted} halting composition samples with {compose_fails} disagreements; \
             associativity: {assoc_fails} Fails over {} triples ({} Holds)",
            assoc.len(),
            count(&assoc, Verdict::Holds)
        ),
    )
}

fn fixed() -> Outcome {
    let r = suite("fixed-indices");
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["b", "c", "m", "d"] {
        let prefix = format!("{name}/");
        let recs: Vec<&Record> = r.group(&prefix).collect();
        let holds = count(&recs, Verdict::Holds);
        pass &= recs.len() == 50 && holds == 50;
        parts.push(format!("{name} {holds}/{}", recs.len()));
    }
    let a: Vec<&Record> = r.group("a/").collect();
    let a_fails = count(&a, Verdict::Fails);
    pass &= a.len() == 50 * 9 && a_fails == 0;
    parts.push(format!(
        "a {} Holds, {} partial (diverging e), {a_fails} Fails over {} (oracle, e <= 8)",
        count(&a, Verdict::Holds),
        count(&a, Verdict::Unknown),
        a.len()
    ));
    outcome(pass, parts.join("; "))
}

fn joins() -> Outcome {
    let r = suite("join-laws");
    let joins: Vec<&Record> = r.group("join/").collect();
    let families: std::collections::BTreeSet<&str> = joins.iter().map(|j| j.name.split('/').nth(1).unwrap()).collect();
    let mismatches = count(&joins, Verdict::Fails);
    let holds = count(&joins, Verdict::Holds);
    outcome(
        families.len() == 3 && mismatches == 0 && holds == joins.len(),
        format!("{} families, {holds}/{} checks of 32 positions agree, {mismatches} mismatches", families.len(), joins.len()),
    )
}

fn words() -> Outcome {
    let r = suite("comvar");
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in ["uop", "uti"] {
        for family in ["identity", "prepend-1", "join-with-y"] {
            let prefix = format!("{kind}/{family}/");
            let recs: Vec<&Record> = r.group(&prefix).collect();
            let (fails, unknown) = (count(&recs, Verdict::Fails), count(&recs, Verdict::Unknown));
            pass &= recs.len() == 100 && fails == 0 && unknown * 20 < recs.len();
            parts.push(format!("{kind}/{family} {fails}F {unknown}U of {}", recs.len()));
        }
    }
    outcome(pass, parts.join(", "))
}

fn round_trips(r: &Report, prefix: &str, want: usize) -> (bool, String) {
    let recs: Vec<&Record> = r.group(prefix).collect();
    let exact = count(&recs, Verdict::Holds);
    let total = r.record("roundtrip-bits").map(|t| t.detail["verified"] == true).unwrap_or(false);
    (recs.len() == want && exact == want && total, format!("{exact}/{} instances recover all 32 bits and verify", recs.len()))
}

fn lmc1() -> Outcome {
    let (pass, text) = round_trips(&suite("lmc1"), "lmc1/", 40);
    outcome(pass, format!("{text} (20 oracles x identity, prepend-1)"))
}

fn redu() -> Outcome {
    let r = suite("redu");
    let forward: Vec<&Record> = r.group("redu/forward/").collect();
    let clean = count(&forward, Verdict::Holds);
    let decided: u64 = forward.iter().map(|f| f.detail["decided"].as_u64().unwrap_or(0)).sum();
    let (decode_ok, decode_text) = round_trips(&r, "redu/decode/", 20);
    outcome(
        forward.len() == 20 && clean == 20 && decode_ok,
        format!("forward: {clean}/20 instances without violations ({decided} decided pairs); decode: {decode_text}"),
    )
}

fn bridge() -> Outcome {
    let r = suite("ceer-bridge");
    let recs: Vec<&Record> = r.group("bridge/").collect();
    let violations = count(&recs, Verdict::Fails);
    let decided = recs.iter().filter(|b| b.detail["approx"] != "Unknown").count();
    outcome(
        recs.len() == 100 && violations == 0,
        format!("{violations} violations over {} pairs ({decided} with a decided verdict)", recs.len()),
    )
}

fn determinism() -> Outcome {
    let cfg = RunConfig { seed: 42, samples: Some(3), ..RunConfig::default() };
    let mut differing = Vec::new();
    for s in SUITES {
        let first = verify(s, &cfg).unwrap().render();
        let second = verify(s, &cfg).unwrap().render();
        if first != second {
            differing.push(s);
        }
    }
    outcome(differing.is_empty(), format!("{} suites rendered twice, differing: {differing:?}", SUITES.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("numbering bijection", numbering),
        ("composition law and associativity", composition),
        ("fixed indices a, b, c, d, m", fixed),
        ("uniform join vs big join", joins),
        ("uniformity words", words),
        ("lmc1 round trip", lmc1),
        ("redu round trip", redu),
        ("ceer bridge", bridge),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {} ({:.1}s)", n + 1, o.summary, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
