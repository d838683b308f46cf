use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use relcomp::harness::{self, RunConfig, SUITES};
use relcomp::index_algebra::{odot_check, sodot_check, sstar, star, IndexPair};
use relcomp::machine::numbering::MAX_CODE_BITS;
use relcomp::machine::{eval, GoedelCode, ObservationWindow, Oracle, Outcome};
use relcomp::martin::CertifiedFamily;
use relcomp::Nat;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FUEL: u8 = 3;

#[derive(Parser)]
#[command(name = "relcomp", version, about = "Run oracle programs, check index identities, and decode reductions")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Options {
    /// Number of inputs observed
    #[arg(long, global = true, default_value_t = 32, value_name = "N")]
    window: u64,
    /// Evaluation steps per run
    #[arg(long, global = true, default_value_t = 200_000, value_name = "B")]
    fuel: u64,
    #[arg(long, global = true, default_value_t = 0, value_name = "S")]
    seed: u64,
    /// bits:P | bits:P* | bits:P+C* | prog:S | join(A,B) | ...
    #[arg(long, global = true, value_name = "SPEC")]
    oracle: Option<String>,
    /// Also write the output to this file
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    /// Override the per-suite sample counts
    #[arg(long, global = true, value_name = "K")]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a program (code or s-expression) on one input
    Eval {
        code: String,
        input: String,
        /// Same as --oracle
        #[arg(value_name = "ORACLE")]
        oracle_arg: Option<String>,
        /// Same as --fuel
        #[arg(value_name = "FUEL")]
        fuel_arg: Option<u64>,
    },
    /// `I * J`, or `(I, J) s* (K, L)` with --with
    Compose {
        left: String,
        right: String,
        #[arg(long, num_args = 2, value_names = ["K", "L"])]
        with: Option<Vec<String>>,
    },
    /// Run a property suite and print its report
    Verify { suite: String },
    /// Recover x from f(x) for a certified f, with z the complement of x
    DemoLmc1 {
        /// identity | prepend-1 | join-with:SPEC
        #[arg(long, default_value = "identity")]
        family: String,
    },
    /// Recover x from y through the reduction i -> i * k
    DemoRedu {
        /// The oracle reduced to; defaults to x itself
        #[arg(long, value_name = "SPEC")]
        y: Option<String>,
        #[arg(long, default_value = "(query id)")]
        k: String,
        #[arg(long, default_value = "(const 0)")]
        a: String,
        #[arg(long, default_value = "(const 1)")]
        b: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, message: message.to_string() }
}

fn failed(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_FAILED, message: message.to_string() }
}

fn parse_code(what: &str, text: &str) -> Result<GoedelCode, Failure> {
    text.parse().map_err(|e| usage(format!("{what}: {e}")))
}

fn parse_oracle(text: &str) -> Result<Oracle, Failure> {
    text.parse().map_err(|e| usage(format!("oracle: {e}")))
}

fn oracle_or(opts: &Options, default: &str) -> Result<Oracle, Failure> {
    parse_oracle(opts.oracle.as_deref().unwrap_or(default))
}

fn window(opts: &Options) -> Result<ObservationWindow, Failure> {
    ObservationWindow::new(opts.window, opts.fuel).map_err(usage)
}

fn code_json(code: &GoedelCode) -> Value {
    json!({
        "program": code.to_string(),
        "code": code.nat_if_small(MAX_CODE_BITS).map(|n| n.to_string()),
    })
}

fn emit(opts: &Options, text: &str) -> Result<(), Failure> {
    print!("{text}");
    if let Some(path) = &opts.report {
        std::fs::write(path, text).map_err(|e| failed(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

fn parse_family(text: &str) -> Result<CertifiedFamily, Failure> {
    match text {
        "identity" => Ok(CertifiedFamily::Identity),
        "prepend-1" => Ok(CertifiedFamily::PrependOne),
        _ => match text.strip_prefix("join-with:") {
            Some(spec) => Ok(CertifiedFamily::JoinWith(parse_oracle(spec)?)),
            None => Err(usage(format!("unknown family `{text}`; expected identity, prepend-1 or join-with:SPEC"))),
        },
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let opts = &cli.opts;
    match cli.command {
        Command::Eval { code, input, oracle_arg, fuel_arg } => {
            let program = parse_code("code", &code)?;
            let input: Nat = input.parse().map_err(|e| usage(format!("input: {e}")))?;
            let x = match oracle_arg.as_deref().or(opts.oracle.as_deref()) {
                Some(spec) => parse_oracle(spec)?,
                None => Oracle::zeros(),
            };
            let fuel = fuel_arg.unwrap_or(opts.fuel);
            let out = eval(&program, &input, &x, fuel).map_err(failed)?;
            let text = match (&out, opts.json) {
                (Outcome::Halted { value, steps }, true) => format!("{}\n", json!({ "value": value.to_string(), "steps": steps })),
                (Outcome::Halted { value, steps }, false) => format!("value {value}\nsteps {steps}\n"),
                (Outcome::FuelExhausted, true) => format!("{}\n", json!({ "outcome": "FUEL-EXHAUSTED", "fuel": fuel })),
                (Outcome::FuelExhausted, false) => format!("FUEL-EXHAUSTED after {fuel} steps\n"),
            };
            emit(opts, &text)?;
            Ok(if out.is_halted() { 0 } else { EXIT_FUEL })
        }
        Command::Compose { left, right, with } => {
            let (i, j) = (parse_code("left", &left)?, parse_code("right", &right)?);
            let x = opts.oracle.as_deref().map(parse_oracle).transpose()?;
            let w = window(opts)?;
            let (mut doc, verdict) = match with {
                None => {
                    let s = star(&i, &j);
                    let v = x.as_ref().map(|x| odot_check(&s, x, w)).transpose().map_err(failed)?;
                    (json!({ "star": code_json(&s) }), v)
                }
                Some(kl) => {
                    let (k, l) = (parse_code("K", &kl[0])?, parse_code("L", &kl[1])?);
                    let p = sstar(&IndexPair::new(i, j), &IndexPair::new(k, l));
                    let v = x.as_ref().map(|x| sodot_check(&p, x, w)).transpose().map_err(failed)?;
                    (json!({ "sstar": { "fwd": code_json(&p.fwd), "bwd": code_json(&p.bwd) } }), v)
                }
            };
            let fails = verdict.as_ref().is_some_and(|v| v.fails());
            if let Some(v) = verdict {
                doc["verdict"] = serde_json::to_value(&v).expect("verdict serializes");
            }
            emit(opts, &format!("{doc}\n"))?;
            Ok(if fails { EXIT_FAILED } else { 0 })
        }
        Command::Verify { suite } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(usage(format!("unknown suite `{suite}`; valid suites are: {}", SUITES.join(", "))));
            }
            let cfg = RunConfig {
                window: window(opts)?,
                seed: opts.seed,
                oracle: opts.oracle.as_deref().map(parse_oracle).transpose()?,
                report_path: opts.report.clone(),
                samples: opts.samples,
            };
            let report = harness::verify(&suite, &cfg).map_err(failed)?;
            emit(opts, &report.render())?;
            Ok(if report.passed() { 0 } else { EXIT_FAILED })
        }
        Command::DemoLmc1 { family } => {
            let family = parse_family(&family)?;
            let x = oracle_or(opts, "bits:0110100+110*")?;
            let trip = harness::demo_lmc1(&x, &family, window(opts)?).map_err(failed)?;
            let doc = json!({
                "k": trip.k, "n0": trip.n0, "recoveredBits": trip.recovered_bits,
                "reductionCode": trip.reduction_code, "verified": trip.verified,
            });
            emit(opts, &format!("{doc}\n"))?;
            Ok(if trip.verified { 0 } else { EXIT_FAILED })
        }
        Command::DemoRedu { y, k, a, b } => {
            let x = oracle_or(opts, "bits:0110100+110*")?;
            let y = match y {
                Some(spec) => parse_oracle(&spec)?,
                None => x.clone(),
            };
            let (k, a, b) = (parse_code("k", &k)?, parse_code("a", &a)?, parse_code("b", &b)?);
            let trip = harness::demo_redu(&x, &y, &k, &a, &b, window(opts)?).map_err(failed)?;
            let doc = json!({
                "k": trip.k, "m": trip.m, "side": trip.side, "recoveredBits": trip.recovered_bits,
                "reductionCode": trip.reduction_code, "verified": trip.verified,
            });
            emit(opts, &format!("{doc}\n"))?;
            Ok(if trip.verified { 0 } else { EXIT_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("relcomp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
