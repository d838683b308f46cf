//! Fuel-bounded universal evaluator.
//!
//! The evaluator is an explicit-stack machine, so evaluation depth never
//! touches the host call stack and a computation can be paused and resumed
//! (see [`Machine::run`]), which is what dovetailing needs.
//!
//! Fuel: one unit per node visit, one per oracle query (plus whatever the
//! oracle itself spends), one per `Interp` dispatch. Values wider than a
//! machine word additionally cost one unit per 64 bits when they are
//! produced or dispatched, which bounds the memory any single call can use.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use super::meter;
use super::numbering::{decode, GoedelCode};
use super::oracle::{Answer, Oracle};
use super::program::{Prog, Program};
use crate::nat::{pair, unpair, Nat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Halted { value: Nat, steps: u64 },
    FuelExhausted,
}

impl Outcome {
    pub fn value(&self) -> Option<&Nat> {
        match self {
            Outcome::Halted { value, .. } => Some(value),
            Outcome::FuelExhausted => None,
        }
    }

    pub fn steps(&self) -> Option<u64> {
        match self {
            Outcome::Halted { steps, .. } => Some(*steps),
            Outcome::FuelExhausted => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, Outcome::Halted { .. })
    }
}

/// A base oracle broke its contract. Distinct from running out of fuel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("oracle produced {value} at index {index}, which is not a bit")]
    NotABit { index: Nat, value: Nat },
}

pub fn eval(
    code: &GoedelCode,
    input: &Nat,
    oracle: &Oracle,
    fuel: u64,
) -> Result<Outcome, EvalError> {
    eval_program(code.program(), input, oracle, fuel)
}

pub fn eval_program(
    program: &Prog,
    input: &Nat,
    oracle: &Oracle,
    fuel: u64,
) -> Result<Outcome, EvalError> {
    let mut machine = Machine::new(program.clone(), input.clone(), oracle, fuel);
    Ok(match machine.run(fuel)? {
        Status::Halted { value, steps } => Outcome::Halted { value, steps },
        Status::Exhausted | Status::Paused => Outcome::FuelExhausted,
    })
}

enum OracleCtx<'o> {
    Base(&'o Oracle),
    Lens {
        lens: Prog,
        parent: Rc<OracleCtx<'o>>,
    },
}

#[derive(Clone, Copy)]
enum BinOp {
    Pair,
    Add,
    Monus,
}

impl BinOp {
    fn apply(self, left: &Nat, right: &Nat) -> Nat {
        match self {
            BinOp::Pair => pair(left, right),
            BinOp::Add => left.add(right),
            BinOp::Monus => left.monus(right),
        }
    }
}

enum Frame<'o> {
    BinLeft {
        op: BinOp,
        right: Prog,
        input: Nat,
        ctx: Rc<OracleCtx<'o>>,
    },
    BinRight {
        op: BinOp,
        left: Nat,
    },
    Fst,
    Snd,
    Branch {
        then: Prog,
        otherwise: Prog,
        input: Nat,
        ctx: Rc<OracleCtx<'o>>,
    },
    Then {
        outer: Prog,
        ctx: Rc<OracleCtx<'o>>,
    },
    Mu {
        body: Prog,
        input: Nat,
        ctx: Rc<OracleCtx<'o>>,
        candidate: Nat,
    },
    QueryAt {
        ctx: Rc<OracleCtx<'o>>,
    },
    InterpCode {
        arg: Prog,
        input: Nat,
        ctx: Rc<OracleCtx<'o>>,
    },
    InterpArg {
        code: Nat,
        ctx: Rc<OracleCtx<'o>>,
    },
}

enum Control<'o> {
    Eval(Prog, Nat, Rc<OracleCtx<'o>>),
    Return(Nat),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Halted {
        value: Nat,
        steps: u64,
    },
    /// Stopped at the requested step count; the next action consumes fuel.
    Paused,
    Exhausted,
}

pub struct Machine<'o> {
    control: Option<Control<'o>>,
    stack: Vec<Frame<'o>>,
    used: u64,
    limit: u64,
    decoded: HashMap<Nat, Prog>,
    finished: Option<Status>,
}

fn wide_cost(value: &Nat) -> u64 {
    value.bits() / 64
}

impl<'o> Machine<'o> {
    pub fn new(program: Prog, input: Nat, oracle: &'o Oracle, limit: u64) -> Self {
        Machine {
            control: Some(Control::Eval(
                program,
                input,
                Rc::new(OracleCtx::Base(oracle)),
            )),
            stack: Vec::new(),
            used: 0,
            limit,
            decoded: HashMap::new(),
            finished: None,
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    fn exhaust(&mut self) -> Status {
        self.used = self.limit;
        self.control = None;
        self.stack.clear();
        self.finished = Some(Status::Exhausted);
        Status::Exhausted
    }

    fn charge(&mut self, cost: u64) -> bool {
        match self.used.checked_add(cost) {
            Some(total) if total <= self.limit => {
                self.used = total;
                true
            }
            _ => false,
        }
    }

    /// Runs until the machine halts, exhausts its limit, or is about to
    /// spend fuel beyond `until` steps.
    pub fn run(&mut self, until: u64) -> Result<Status, EvalError> {
        let scope = meter::Scope::enter();
        let before = self.used;
        let status = self.step_until(until);
        scope.charge(self.used - before);
        status
    }

    fn step_until(&mut self, until: u64) -> Result<Status, EvalError> {
        if let Some(done) = &self.finished {
            return Ok(done.clone());
        }
        loop {
            let control = self.control.take().expect("live machine has control");
            match control {
                Control::Eval(program, input, ctx) => {
                    if self.used >= until && until < self.limit {
                        self.control = Some(Control::Eval(program, input, ctx));
                        return Ok(Status::Paused);
                    }
                    if !self.charge(1) {
                        return Ok(self.exhaust());
                    }
                    if let Some(status) = self.enter(program, input, ctx) {
                        return Ok(status);
                    }
                }
                Control::Return(value) => match self.stack.pop() {
                    None => {
                        let status = Status::Halted {
                            value,
                            steps: self.used,
                        };
                        self.finished = Some(status.clone());
                        return Ok(status);
                    }
                    Some(frame) => {
                        if let Some(status) = self.resume(frame, value)? {
                            return Ok(status);
                        }
                    }
                },
            }
        }
    }

    fn produce(&mut self, value: Nat) -> Option<Status> {
        if !self.charge(wide_cost(&value)) {
            return Some(self.exhaust());
        }
        self.control = Some(Control::Return(value));
        None
    }

    fn enter(&mut self, program: Prog, input: Nat, ctx: Rc<OracleCtx<'o>>) -> Option<Status> {
        let next = match &*program {
            Program::Const(k) => return self.produce(k.clone()),
            Program::Id => Control::Return(input),
            Program::Succ => return self.produce(input.succ()),
            Program::Pred => Control::Return(input.pred()),
            Program::Half => Control::Return(input.div_rem_small(2).0),
            Program::PairMk(p, q) => self.binary(BinOp::Pair, p, q, input, ctx),
            Program::Add(p, q) => self.binary(BinOp::Add, p, q, input, ctx),
            Program::Monus(p, q) => self.binary(BinOp::Monus, p, q, input, ctx),
            Program::Fst(p) => {
                self.stack.push(Frame::Fst);
                Control::Eval(p.clone(), input, ctx)
            }
            Program::Snd(p) => {
                self.stack.push(Frame::Snd);
                Control::Eval(p.clone(), input, ctx)
            }
            Program::IfZero(c, t, e) => {
                self.stack.push(Frame::Branch {
                    then: t.clone(),
                    otherwise: e.clone(),
                    input: input.clone(),
                    ctx: ctx.clone(),
                });
                Control::Eval(c.clone(), input, ctx)
            }
            Program::Comp(outer, inner) => {
                self.stack.push(Frame::Then {
                    outer: outer.clone(),
                    ctx: ctx.clone(),
                });
                Control::Eval(inner.clone(), input, ctx)
            }
            Program::MuSearch(body) => {
                // A constant body is either found at once or never.
                if let Program::Const(k) = &**body {
                    if k.is_zero() {
                        Control::Return(Nat::ZERO)
                    } else {
                        return Some(self.exhaust());
                    }
                } else {
                    let first = pair(&Nat::ZERO, &input);
                    self.stack.push(Frame::Mu {
                        body: body.clone(),
                        input,
                        ctx: ctx.clone(),
                        candidate: Nat::ZERO,
                    });
                    Control::Eval(body.clone(), first, ctx)
                }
            }
            Program::Query(p) => {
                self.stack.push(Frame::QueryAt { ctx: ctx.clone() });
                Control::Eval(p.clone(), input, ctx)
            }
            Program::WithOracle(body, lens) => {
                let inner = Rc::new(OracleCtx::Lens {
                    lens: lens.clone(),
                    parent: ctx,
                });
                Control::Eval(body.clone(), input, inner)
            }
            Program::Interp(code, arg) => {
                self.stack.push(Frame::InterpCode {
                    arg: arg.clone(),
                    input: input.clone(),
                    ctx: ctx.clone(),
                });
                Control::Eval(code.clone(), input, ctx)
            }
        };
        self.control = Some(next);
        None
    }

    fn binary(
        &mut self,
        op: BinOp,
        p: &Prog,
        q: &Prog,
        input: Nat,
        ctx: Rc<OracleCtx<'o>>,
    ) -> Control<'o> {
        self.stack.push(Frame::BinLeft {
            op,
            right: q.clone(),
            input: input.clone(),
            ctx: ctx.clone(),
        });
        Control::Eval(p.clone(), input, ctx)
    }

    fn resume(&mut self, frame: Frame<'o>, value: Nat) -> Result<Option<Status>, EvalError> {
        let next = match frame {
            Frame::BinLeft {
                op,
                right,
                input,
                ctx,
            } => {
                self.stack.push(Frame::BinRight { op, left: value });
                Control::Eval(right, input, ctx)
            }
            Frame::BinRight { op, left } => return Ok(self.produce(op.apply(&left, &value))),
            Frame::Fst => Control::Return(unpair(&value).0),
            Frame::Snd => Control::Return(unpair(&value).1),
            Frame::Branch {
                then,
                otherwise,
                input,
                ctx,
            } => {
                let chosen = if value.is_zero() { then } else { otherwise };
                Control::Eval(chosen, input, ctx)
            }
            Frame::Then { outer, ctx } => Control::Eval(outer, value, ctx),
            Frame::Mu {
                body,
                input,
                ctx,
                candidate,
            } => {
                if value.is_zero() {
                    Control::Return(candidate)
                } else {
                    let candidate = candidate.succ();
                    let arg = pair(&candidate, &input);
                    self.stack.push(Frame::Mu {
                        body: body.clone(),
                        input,
                        ctx: ctx.clone(),
                        candidate,
                    });
                    Control::Eval(body, arg, ctx)
                }
            }
            Frame::QueryAt { ctx } => {
                if !self.charge(1) {
                    return Ok(Some(self.exhaust()));
                }
                match &*ctx {
                    OracleCtx::Base(oracle) => {
                        let budget = self.limit - self.used;
                        let (answer, spent) = oracle.query(&value, budget)?;
                        self.used += spent.min(budget);
                        match answer {
                            Answer::Bit(bit) => Control::Return(Nat::from(u64::from(bit))),
                            Answer::Unknown => return Ok(Some(self.exhaust())),
                        }
                    }
                    OracleCtx::Lens { lens, parent } => {
                        Control::Eval(lens.clone(), value, parent.clone())
                    }
                }
            }
            Frame::InterpCode { arg, input, ctx } => {
                self.stack.push(Frame::InterpArg {
                    code: value,
                    ctx: ctx.clone(),
                });
                Control::Eval(arg, input, ctx)
            }
            Frame::InterpArg { code, ctx } => {
                if !self.charge(1 + wide_cost(&code)) {
                    return Ok(Some(self.exhaust()));
                }
                let program = self
                    .decoded
                    .entry(code)
                    .or_insert_with_key(|code| std::sync::Arc::new(decode(code)))
                    .clone();
                Control::Eval(program, value, ctx)
            }
        };
        self.control = Some(next);
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::numbering::encode;
    use crate::machine::program::build::pair;
    use crate::machine::program::build::*;

    fn run(p: &Prog, n: u64, x: &Oracle, fuel: u64) -> Outcome {
        eval_program(p, &Nat::from(n), x, fuel).unwrap()
    }

    fn alternating() -> Oracle {
        Oracle::periodic(vec![], vec![true, false])
    }

    #[test]
    fn constant_program() {
        let out = run(&konst(7u64), 5, &Oracle::zeros(), 100);
        assert_eq!(out.value(), Some(&Nat::from(7u64)));
        assert_eq!(out.steps(), Some(1));
    }

    #[test]
    fn query_reads_the_oracle() {
        assert_eq!(
            run(&query(id()), 3, &alternating(), 100).value(),
            Some(&Nat::ZERO)
        );
        assert_eq!(
            run(&query(id()), 2, &alternating(), 100).value(),
            Some(&Nat::ONE)
        );
    }

    #[test]
    fn empty_search_never_halts() {
        for fuel in [1, 10, 1000, 100_000] {
            assert_eq!(
                run(&mu(konst(1u64)), 0, &Oracle::zeros(), fuel),
                Outcome::FuelExhausted
            );
        }
        // also without the constant-body shortcut
        assert_eq!(
            run(&mu(succ()), 0, &Oracle::zeros(), 5000),
            Outcome::FuelExhausted
        );
    }

    #[test]
    fn search_finds_least_witness() {
        // least k with 7 ∸ k = 0
        let body = monus(konst(7u64), fst(id()));
        assert_eq!(
            run(&mu(body), 0, &Oracle::zeros(), 1000).value(),
            Some(&Nat::from(7u64))
        );
    }

    #[test]
    fn arithmetic_helpers() {
        for n in 0..20u64 {
            let x = Oracle::zeros();
            assert_eq!(run(&half(), n, &x, 10_000).value(), Some(&Nat::from(n / 2)));
            assert_eq!(
                run(&parity(), n, &x, 10_000).value(),
                Some(&Nat::from(n % 2))
            );
            assert_eq!(
                run(&times(12), n, &x, 10_000).value(),
                Some(&Nat::from(12 * n))
            );
            let d = distance(id(), konst(5u64));
            assert_eq!(run(&d, n, &x, 100).value().unwrap().is_zero(), n == 5);
        }
    }

    #[test]
    fn with_oracle_rewires_queries() {
        // body reads index n, lens maps it to x(n + 2)
        let p = with_oracle(query(id()), query(add(id(), konst(2u64))));
        let x = Oracle::explicit(vec![false, false, true, false, true], false);
        assert_eq!(run(&p, 0, &x, 100).value(), Some(&Nat::ONE));
        assert_eq!(run(&p, 1, &x, 100).value(), Some(&Nat::ZERO));
        assert_eq!(run(&p, 2, &x, 100).value(), Some(&Nat::ONE));
    }

    #[test]
    fn lens_values_pass_through_unchanged() {
        let p = with_oracle(query(id()), add(id(), konst(10u64)));
        assert_eq!(
            run(&p, 3, &Oracle::zeros(), 100).value(),
            Some(&Nat::from(13u64))
        );
    }

    #[test]
    fn interp_dispatches_on_codes() {
        let code = encode(&succ());
        let p = interp(konst(code), id());
        assert_eq!(
            run(&p, 41, &Oracle::zeros(), 100).value(),
            Some(&Nat::from(42u64))
        );
        let q = interp(konst(encode(&query(id()))), konst(2u64));
        assert_eq!(run(&q, 0, &alternating(), 100).value(), Some(&Nat::ONE));
    }

    #[test]
    fn fuel_is_exact_for_a_composite() {
        let p = pair(succ(), query(id()));
        // pair, succ, query, id, plus one unit for the query itself
        let out = run(&p, 0, &alternating(), 5);
        assert_eq!(out.steps(), Some(5));
        assert_eq!(run(&p, 0, &alternating(), 4), Outcome::FuelExhausted);
        assert_eq!(run(&p, 0, &alternating(), 1), Outcome::FuelExhausted);
        assert_eq!(run(&p, 0, &alternating(), 0), Outcome::FuelExhausted);
    }

    #[test]
    fn deep_self_application_stays_on_the_heap() {
        // P(⟨self, k⟩) = if k = 0 then 0 else self(⟨self, k − 1⟩)
        let recurse = interp(fst(id()), pair(fst(id()), comp(pred(), snd(id()))));
        let p = if_zero(snd(id()), konst(0u64), recurse);
        let code = encode(&p);
        let input = crate::nat::pair(&code, &Nat::from(20_000u64));
        let out = eval_program(&p, &input, &Oracle::zeros(), 10_000_000).unwrap();
        assert_eq!(out.value(), Some(&Nat::ZERO));
    }

    #[test]
    fn pause_and_resume_match_a_single_run() {
        let p = mu(monus(konst(30u64), fst(id())));
        let x = Oracle::zeros();
        let whole = run(&p, 0, &x, 10_000);
        let mut m = Machine::new(p.clone(), Nat::ZERO, &x, 10_000);
        let mut target = 0;
        let status = loop {
            target += 3;
            match m.run(target).unwrap() {
                Status::Paused => assert!(m.used() >= target),
                other => break other,
            }
        };
        assert_eq!(
            status,
            Status::Halted {
                value: whole.value().unwrap().clone(),
                steps: whole.steps().unwrap()
            }
        );
    }
}
