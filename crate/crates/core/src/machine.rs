// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic oracle machines, step budgets, monotonicity
//! constraints on query sequences, and transcript capture.
//!
//! A machine is represented by a pure step function from (input,
//! answers-so-far) to its next event.  Replaying the step function
//! over a growing answer prefix reconstructs the whole computation,
//! which keeps every machine trivially resumable and lets wrappers
//! look at the query history without extra bookkeeping.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::backends::OracleHandle;
use crate::bitcodec::BitString;

/// What a machine does next: ask a query or halt with a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Query(BitString),
    Halt(bool),
}

/// Query budget n^i + i in the input length n.  Only queries are
/// charged; halting is free.  The empty input is billed as length 1
/// so that constant-query machines stay runnable on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepBudget {
    pub exponent: u32,
}

impl StepBudget {
    pub fn new(exponent: u32) -> Self {
        StepBudget { exponent }
    }

    pub fn limit(&self, input_len: usize) -> u64 {
        (input_len.max(1) as u64)
            .saturating_pow(self.exponent)
            .saturating_add(self.exponent as u64)
    }
}

type StepFn = dyn Fn(&BitString, &[bool]) -> Event + Send + Sync;

/// A deterministic oracle machine.
#[derive(Clone)]
pub struct OracleMachine {
    pub name: String,
    pub budget: StepBudget,
    step: Arc<StepFn>,
}

impl OracleMachine {
    pub fn new(
        name: &str,
        exponent: u32,
        step: impl Fn(&BitString, &[bool]) -> Event + Send + Sync + 'static,
    ) -> Self {
        OracleMachine {
            name: name.to_owned(),
            budget: StepBudget::new(exponent),
            step: Arc::new(step),
        }
    }

    /// The event following the given answer history.
    pub fn next_event(&self, input: &BitString, answers: &[bool]) -> Event {
        (self.step)(input, answers)
    }

    /// Replays the machine over an answer prefix: the queries it asks
    /// while consuming those answers, and its verdict if it halts
    /// before using them all up.
    pub fn replay(&self, input: &BitString, answers: &[bool]) -> (Vec<BitString>, Option<bool>) {
        let mut queries = Vec::new();
        for k in 0..=answers.len() {
            match self.next_event(input, &answers[..k]) {
                Event::Query(q) => {
                    if k == answers.len() {
                        // Next query is pending; no answer for it yet.
                        break;
                    }
                    queries.push(q);
                }
                Event::Halt(v) => return (queries, Some(v)),
            }
        }
        (queries, None)
    }
}

impl core::fmt::Debug for OracleMachine {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "OracleMachine({}, n^{}+{})", self.name, self.budget.exponent, self.budget.exponent)
    }
}

/// The eight built-in monotonicity disciplines plus custom ones.
///
/// Each discipline is a predicate over (input, query sequence); the
/// empty sequence is always allowed.  The strict variants compare the
/// input length against the first query as well.
#[derive(Clone)]
pub enum ConstraintKind {
    /// |q1| < |q2| < ...
    Li,
    /// |q1| > |q2| > ...
    Ld,
    /// |q1| >= |q2| >= ...
    Lni,
    /// |q1| <= |q2| <= ...
    Lnd,
    /// |x| < |q1| < |q2| < ...
    SLi,
    /// |x| > |q1| > |q2| > ...
    SLd,
    /// |x| >= |q1| >= |q2| >= ...
    SLni,
    /// |x| <= |q1| <= |q2| <= ...
    SLnd,
    Custom(CustomConstraint),
}

type AllowsFn = dyn Fn(&BitString, &[BitString]) -> bool + Send + Sync;

#[derive(Clone)]
pub struct CustomConstraint {
    pub name: String,
    /// Declared by the caller; custom predicates are opaque, so
    /// prefix-closure cannot be checked and is taken on trust.
    pub prefix_closed: bool,
    allows: Arc<AllowsFn>,
}

impl CustomConstraint {
    pub fn new(
        name: &str,
        prefix_closed: bool,
        allows: impl Fn(&BitString, &[BitString]) -> bool + Send + Sync + 'static,
    ) -> Self {
        CustomConstraint {
            name: name.to_owned(),
            prefix_closed,
            allows: Arc::new(allows),
        }
    }
}

impl ConstraintKind {
    pub const BUILT_INS: [&'static str; 8] =
        ["li", "ld", "lni", "lnd", "s-li", "s-ld", "s-lni", "s-lnd"];

    pub fn by_name(name: &str) -> Option<ConstraintKind> {
        Some(match name {
            "li" => ConstraintKind::Li,
            "ld" => ConstraintKind::Ld,
            "lni" => ConstraintKind::Lni,
            "lnd" => ConstraintKind::Lnd,
            "s-li" => ConstraintKind::SLi,
            "s-ld" => ConstraintKind::SLd,
            "s-lni" => ConstraintKind::SLni,
            "s-lnd" => ConstraintKind::SLnd,
            _ => return None,
        })
    }

    pub fn name(&self) -> &str {
        match self {
            ConstraintKind::Li => "li",
            ConstraintKind::Ld => "ld",
            ConstraintKind::Lni => "lni",
            ConstraintKind::Lnd => "lnd",
            ConstraintKind::SLi => "s-li",
            ConstraintKind::SLd => "s-ld",
            ConstraintKind::SLni => "s-lni",
            ConstraintKind::SLnd => "s-lnd",
            ConstraintKind::Custom(c) => &c.name,
        }
    }

    /// All eight built-ins are prefix-closed; custom kinds carry a flag.
    pub fn prefix_closed(&self) -> bool {
        match self {
            ConstraintKind::Custom(c) => c.prefix_closed,
            _ => true,
        }
    }

    /// Is the whole query sequence legal for this input?  The empty
    /// sequence is always legal.
    pub fn allows(&self, input: &BitString, queries: &[BitString]) -> bool {
        if queries.is_empty() {
            return true;
        }
        let n = input.len();
        let lens: Vec<usize> = queries.iter().map(|q| q.len()).collect();
        let chain = |ok: &dyn Fn(usize, usize) -> bool| lens.windows(2).all(|w| ok(w[0], w[1]));
        match self {
            ConstraintKind::Li => chain(&|a, b| a < b),
            ConstraintKind::Ld => chain(&|a, b| a > b),
            ConstraintKind::Lni => chain(&|a, b| a >= b),
            ConstraintKind::Lnd => chain(&|a, b| a <= b),
            ConstraintKind::SLi => n < lens[0] && chain(&|a, b| a < b),
            ConstraintKind::SLd => n > lens[0] && chain(&|a, b| a > b),
            ConstraintKind::SLni => n >= lens[0] && chain(&|a, b| a >= b),
            ConstraintKind::SLnd => n <= lens[0] && chain(&|a, b| a <= b),
            ConstraintKind::Custom(c) => (c.allows)(input, queries),
        }
    }
}

impl core::fmt::Debug for ConstraintKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "ConstraintKind({})", self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accept,
    Reject,
    /// An about-to-be-asked query would have broken the constraint.
    ConstraintViolation,
    /// The machine tried to ask more queries than its budget allows.
    BudgetExceeded,
}

/// Full record of one constrained run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryTranscript {
    pub input: BitString,
    /// Queries actually asked, with the oracle's answers.
    pub events: Vec<(BitString, bool)>,
    pub outcome: Outcome,
    /// Number of queries charged against the budget.
    pub steps: u64,
    /// For violation/budget outcomes: the 1-based index of the event
    /// that was refused.
    pub violation_index: Option<usize>,
}

impl QueryTranscript {
    pub fn queries(&self) -> Vec<BitString> {
        self.events.iter().map(|(q, _)| q.clone()).collect()
    }
}

/// Runs a machine to completion against an oracle, optionally policing
/// a constraint.  The offending query of a violation is *not* recorded
/// as an event: the run stops just before it would have been asked.
pub fn run(
    m: &OracleMachine,
    oracle: &OracleHandle,
    input: &BitString,
    constraint: Option<&ConstraintKind>,
) -> QueryTranscript {
    let limit = m.budget.limit(input.len());
    let mut answers: Vec<bool> = Vec::new();
    let mut events: Vec<(BitString, bool)> = Vec::new();
    let mut queries: Vec<BitString> = Vec::new();
    loop {
        match m.next_event(input, &answers) {
            Event::Halt(v) => {
                return QueryTranscript {
                    input: input.clone(),
                    events,
                    outcome: if v { Outcome::Accept } else { Outcome::Reject },
                    steps: answers.len() as u64,
                    violation_index: None,
                }
            }
            Event::Query(q) => {
                if answers.len() as u64 >= limit {
                    return QueryTranscript {
                        input: input.clone(),
                        events,
                        outcome: Outcome::BudgetExceeded,
                        steps: answers.len() as u64,
                        violation_index: Some(answers.len() + 1),
                    };
                }
                if let Some(c) = constraint {
                    queries.push(q.clone());
                    if !c.allows(input, &queries) {
                        return QueryTranscript {
                            input: input.clone(),
                            events,
                            outcome: Outcome::ConstraintViolation,
                            steps: answers.len() as u64,
                            violation_index: Some(answers.len() + 1),
                        };
                    }
                }
                let a = oracle.decide(&q);
                events.push((q, a));
                answers.push(a);
            }
        }
    }
}

/// Does the machine obey the discipline on every given input against
/// this oracle?  Budget overruns count as failures.
pub fn has_query_property(
    m: &OracleMachine,
    oracle: &OracleHandle,
    constraint: &ConstraintKind,
    inputs: &[BitString],
) -> bool {
    inputs.iter().all(|x| {
        let t = run(m, oracle, x, Some(constraint));
        matches!(t.outcome, Outcome::Accept | Outcome::Reject)
    })
}

/// A k-ary boolean connective given by its output column.  Row order
/// is the usual one: inputs read as a binary number, false = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    pub arity: u32,
    pub outputs: Vec<bool>,
}

impl TruthTable {
    pub fn new(arity: u32, outputs: Vec<bool>) -> Self {
        assert_eq!(outputs.len(), 1usize << arity, "output column size");
        TruthTable { arity, outputs }
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        assert_eq!(inputs.len(), self.arity as usize);
        let mut idx = 0usize;
        for &b in inputs {
            idx = (idx << 1) | (b as usize);
        }
        self.outputs[idx]
    }

    /// All 2^(2^arity) tables of the given arity.
    pub fn all_of_arity(arity: u32) -> Vec<TruthTable> {
        let rows = 1usize << arity;
        (0..(1u64 << rows))
            .map(|mask| {
                TruthTable::new(arity, (0..rows).map(|r| (mask >> r) & 1 == 1).collect())
            })
            .collect()
    }
}

type GeneratorFn = dyn Fn(&BitString) -> Vec<BitString> + Send + Sync;
type EvaluatorFn = dyn Fn(&BitString, &[bool]) -> bool + Send + Sync;

/// A nonadaptive machine: the query list depends only on the input,
/// and the verdict only on input and answer vector.  When
/// `fixed_table` is present the evaluator is exactly that connective
/// applied to the answers.
#[derive(Clone)]
pub struct TruthTableMachine {
    pub name: String,
    pub budget: StepBudget,
    generator: Arc<GeneratorFn>,
    evaluator: Arc<EvaluatorFn>,
    pub fixed_table: Option<TruthTable>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MachineError {
    BudgetExceeded { asked: u64, limit: u64 },
    /// A fixed-table machine generated a query list whose length is
    /// not the table's arity.
    ArityMismatch { expected: u32, got: usize },
}

impl core::fmt::Display for MachineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MachineError::BudgetExceeded { asked, limit } => {
                write!(f, "budget exceeded: {asked} queries against a limit of {limit}")
            }
            MachineError::ArityMismatch { expected, got } => {
                write!(f, "fixed connective has arity {expected} but {got} queries were generated")
            }
        }
    }
}

impl TruthTableMachine {
    pub fn new(
        name: &str,
        exponent: u32,
        generator: impl Fn(&BitString) -> Vec<BitString> + Send + Sync + 'static,
        evaluator: impl Fn(&BitString, &[bool]) -> bool + Send + Sync + 'static,
    ) -> Self {
        TruthTableMachine {
            name: name.to_owned(),
            budget: StepBudget::new(exponent),
            generator: Arc::new(generator),
            evaluator: Arc::new(evaluator),
            fixed_table: None,
        }
    }

    /// A machine whose verdict is `table` applied to the answers.
    pub fn with_fixed_table(
        name: &str,
        exponent: u32,
        generator: impl Fn(&BitString) -> Vec<BitString> + Send + Sync + 'static,
        table: TruthTable,
    ) -> Self {
        let t = table.clone();
        TruthTableMachine {
            name: name.to_owned(),
            budget: StepBudget::new(exponent),
            generator: Arc::new(generator),
            evaluator: Arc::new(move |_x, answers| t.eval(answers)),
            fixed_table: Some(table),
        }
    }

    pub fn queries(&self, input: &BitString) -> Vec<BitString> {
        (self.generator)(input)
    }

    pub fn evaluate(&self, input: &BitString, answers: &[bool]) -> bool {
        (self.evaluator)(input, answers)
    }

    /// Generates, asks, and evaluates in one go.
    pub fn run_tt(
        &self,
        oracle: &OracleHandle,
        input: &BitString,
    ) -> Result<TtRun, MachineError> {
        let queries = self.queries(input);
        let limit = self.budget.limit(input.len());
        if queries.len() as u64 > limit {
            return Err(MachineError::BudgetExceeded {
                asked: queries.len() as u64,
                limit,
            });
        }
        if let Some(t) = &self.fixed_table {
            if queries.len() != t.arity as usize {
                return Err(MachineError::ArityMismatch {
                    expected: t.arity,
                    got: queries.len(),
                });
            }
        }
        let answers: Vec<bool> = queries.iter().map(|q| oracle.decide(q)).collect();
        let verdict = self.evaluate(input, &answers);
        Ok(TtRun {
            queries,
            answers,
            verdict,
        })
    }
}

impl core::fmt::Debug for TruthTableMachine {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "TruthTableMachine({})", self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtRun {
    pub queries: Vec<BitString>,
    pub answers: Vec<bool>,
    pub verdict: bool,
}

pub mod catalog {
    //! Named built-in machines used by the CLI, the diagonalization
    //! drivers, and the test suites.

    use super::*;

    /// If the input is 0^n, queries 0^n then 1^n and accepts iff the
    /// answers differ; rejects anything else outright.
    pub fn xor_probe() -> OracleMachine {
        OracleMachine::new("xor-probe", 1, |x, answers| {
            if !x.is_all_zeros() {
                return Event::Halt(false);
            }
            match answers {
                [] => Event::Query(BitString::zeros(x.len())),
                [_] => Event::Query(BitString::ones(x.len())),
                [a, b, ..] => Event::Halt(a != b),
            }
        })
    }

    /// Zero-query acceptor.
    pub fn always_accept() -> OracleMachine {
        OracleMachine::new("always-accept", 1, |_x, _a| Event::Halt(true))
    }

    /// Zero-query rejector.
    pub fn always_reject() -> OracleMachine {
        OracleMachine::new("always-reject", 1, |_x, _a| Event::Halt(false))
    }

    /// Queries the input itself and echoes the answer.
    pub fn member_probe() -> OracleMachine {
        OracleMachine::new("member-probe", 1, |x, answers| match answers {
            [] => Event::Query(x.clone()),
            [a, ..] => Event::Halt(*a),
        })
    }

    /// Queries 0^(n+1) and echoes the answer.
    pub fn succ_probe() -> OracleMachine {
        OracleMachine::new("succ-probe", 1, |x, answers| match answers {
            [] => Event::Query(BitString::zeros(x.len() + 1)),
            [a, ..] => Event::Halt(*a),
        })
    }

    /// Queries "0" then "1" (regardless of input) and accepts iff the
    /// answers differ.  A handy nonadaptive base machine.
    pub fn parity_pair() -> OracleMachine {
        OracleMachine::new("parity-pair", 1, |_x, answers| match answers {
            [] => Event::Query(BitString::from("0")),
            [_] => Event::Query(BitString::from("1")),
            [a, b, ..] => Event::Halt(a != b),
        })
    }

    /// Adaptive probe: asks "0"; on yes asks "00", on no asks "1";
    /// echoes the second answer.
    pub fn chain_probe() -> OracleMachine {
        OracleMachine::new("chain-probe", 1, |_x, answers| match answers {
            [] => Event::Query(BitString::from("0")),
            [true] => Event::Query(BitString::from("00")),
            [false] => Event::Query(BitString::from("1")),
            [_, b, ..] => Event::Halt(*b),
        })
    }

    /// Strictly length-decreasing sweep.  On input 0^n with n = 4^k
    /// (k >= 1): queries 0^(n-1) down to 0^(3n/4), then the string
    /// 0^(n/4) b1..b_(n/4) built from those answers, and echoes the
    /// final answer.  Rejects all other inputs without querying.
    pub fn sweep_down() -> OracleMachine {
        OracleMachine::new("sweep-down", 1, |x, answers| {
            let n = x.len();
            if !x.is_all_zeros() || !is_power_of(n, 4) || n < 4 {
                return Event::Halt(false);
            }
            let probes = n / 4; // lengths n-1 .. 3n/4
            let k = answers.len();
            if k < probes {
                Event::Query(BitString::zeros(n - 1 - k))
            } else if k == probes {
                let mut q = BitString::zeros(n / 4);
                for &a in answers {
                    q.push(a);
                }
                Event::Query(q)
            } else {
                Event::Halt(answers[probes])
            }
        })
    }

    /// Strictly length-increasing mirror sweep.  On input 0^n with
    /// n = 8^k (k >= 1): queries 0^(n+1) up to 0^(9n/8), then
    /// 0^(9n/8) b1..b_(n/8), echoing the final answer.
    pub fn mirror_up() -> OracleMachine {
        OracleMachine::new("mirror-up", 2, |x, answers| {
            let n = x.len();
            if !x.is_all_zeros() || !is_power_of(n, 8) || n < 8 {
                return Event::Halt(false);
            }
            let probes = n / 8;
            let k = answers.len();
            if k < probes {
                Event::Query(BitString::zeros(n + 1 + k))
            } else if k == probes {
                let mut q = BitString::zeros(n + n / 8);
                for &a in answers {
                    q.push(a);
                }
                Event::Query(q)
            } else {
                Event::Halt(answers[probes])
            }
        })
    }

    /// Strictly length-decreasing mirror sweep: queries 0^(n-1) down
    /// to 0^(7n/8), then 0^(5n/8) b1..b_(n/8).
    pub fn mirror_down() -> OracleMachine {
        OracleMachine::new("mirror-down", 1, |x, answers| {
            let n = x.len();
            if !x.is_all_zeros() || !is_power_of(n, 8) || n < 8 {
                return Event::Halt(false);
            }
            let probes = n / 8;
            let k = answers.len();
            if k < probes {
                Event::Query(BitString::zeros(n - 1 - k))
            } else if k == probes {
                let mut q = BitString::zeros(5 * n / 8);
                for &a in answers {
                    q.push(a);
                }
                Event::Query(q)
            } else {
                Event::Halt(answers[probes])
            }
        })
    }

    fn is_power_of(mut n: usize, base: usize) -> bool {
        if n < base {
            return false;
        }
        while n % base == 0 {
            n /= base;
        }
        n == 1
    }

    /// The named adaptive machines, in a stable order.
    pub fn all() -> Vec<OracleMachine> {
        alloc::vec![
            xor_probe(),
            always_accept(),
            always_reject(),
            member_probe(),
            succ_probe(),
            parity_pair(),
            chain_probe(),
            sweep_down(),
            mirror_up(),
            mirror_down(),
        ]
    }

    pub fn by_name(name: &str) -> Option<OracleMachine> {
        all().into_iter().find(|m| m.name == name)
    }

    /// Named nonadaptive machines.
    pub fn tt_all() -> Vec<TruthTableMachine> {
        alloc::vec![
            // Parity of (0^n, 1^n); the canonical essential 2-ary table.
            TruthTableMachine::with_fixed_table(
                "tt-parity-pair",
                1,
                |x| alloc::vec![BitString::zeros(x.len()), BitString::ones(x.len())],
                TruthTable::new(2, alloc::vec![false, true, true, false]),
            ),
            // Asks (0^n, 1^n) but the verdict only tracks the first answer.
            TruthTableMachine::with_fixed_table(
                "tt-first-of-pair",
                1,
                |x| alloc::vec![BitString::zeros(x.len()), BitString::ones(x.len())],
                TruthTable::new(2, alloc::vec![false, false, true, true]),
            ),
            // Asks nothing; rejects.
            TruthTableMachine::new("tt-empty", 1, |_x| Vec::new(), |_x, _a| false),
            // Echoes membership of 0^(n+1).
            TruthTableMachine::new(
                "tt-succ",
                1,
                |x| alloc::vec![BitString::zeros(x.len() + 1)],
                |_x, a| a[0],
            ),
        ]
    }

    pub fn tt_by_name(name: &str) -> Option<TruthTableMachine> {
        tt_all().into_iter().find(|m| m.name == name)
    }
}
