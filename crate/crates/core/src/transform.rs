// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Mechanical reduction rewriters.
//!
//! Given a tight padding for the oracle language, any machine can be
//! rewritten so its query lengths strictly increase past the input
//! length, or strictly decrease, without changing the language it
//! decides against that oracle: each raw query is padded into a
//! pre-planned length window, and the windows are laid out so the
//! discipline holds against *every* oracle (window positions never
//! depend on answers).
//!
//! Two further rewriters re-code queries instead of padding them: one
//! sends every query to a fixed length over a rank-coded copy of the
//! oracle, the other exploits a sparse rank-coded oracle to answer
//! all but (at most) one query locally.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use crate::backends::OracleHandle;
use crate::bitcodec::BitString;
use crate::machine::{Event, OracleMachine, TruthTable, TruthTableMachine};
use crate::padding::{iterate_pad_to_window, Poly, TightPadding};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformError {
    /// The connective genuinely depends on two or more queries; no
    /// single-query equivalent exists.
    EssentialTable,
    /// The shortcut needs a machine with a declared fixed connective.
    NoFixedTable,
    /// The length sequence must be strictly increasing.
    LengthsNotIncreasing,
}

impl core::fmt::Display for TransformError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TransformError::EssentialTable => write!(f, "connective depends on several queries"),
            TransformError::NoFixedTable => write!(f, "machine has no fixed connective"),
            TransformError::LengthsNotIncreasing => {
                write!(f, "length sequence must strictly increase")
            }
        }
    }
}

/// Rewrites a machine so its query lengths strictly increase and all
/// exceed p(|x|) >= |x| (so the strong increasing discipline holds
/// against every oracle).  `sigma` must be a tight padding for the
/// oracle language; `p` must bound the raw query lengths of `m` and
/// satisfy p(n) >= n.
pub fn to_query_increasing(
    m: &OracleMachine,
    sigma: &TightPadding,
    p: &Poly,
) -> OracleMachine {
    let inner = m.clone();
    let sigma = sigma.clone();
    let p = p.clone();
    OracleMachine::new(
        &alloc::format!("{}[{}-increasing]", m.name, sigma.name),
        m.budget.exponent,
        move |x, answers| {
            let cap = p.eval(x.len() as u64);
            assert!(cap >= x.len() as u64, "window polynomial must dominate n");
            let mut floor = cap;
            for k in 0..=answers.len() {
                match inner.next_event(x, &answers[..k]) {
                    Event::Halt(v) => return Event::Halt(v),
                    Event::Query(q) => {
                        assert!(
                            q.len() as u64 <= cap,
                            "raw query outruns the declared budget polynomial"
                        );
                        let padded = iterate_pad_to_window(&sigma, &q, floor)
                            .expect("window floor dominates every raw query");
                        if k == answers.len() {
                            return Event::Query(padded);
                        }
                        floor = padded.len() as u64;
                    }
                }
            }
            unreachable!("replay covers the full answer history")
        },
    )
}

/// Rewrites a machine so its query lengths strictly decrease: with
/// P = p(|x|) and slack k, the i-th query (1-based) lands in the
/// window (P + (P-i)(k+1), P + (P-i)(k+1) + k].  Consecutive windows
/// are disjoint and descend, so the decreasing discipline holds
/// against every oracle.  The machine may ask at most P queries.
pub fn to_query_decreasing(
    m: &OracleMachine,
    sigma: &TightPadding,
    p: &Poly,
) -> OracleMachine {
    let inner = m.clone();
    let sigma = sigma.clone();
    let p = p.clone();
    OracleMachine::new(
        &alloc::format!("{}[{}-decreasing]", m.name, sigma.name),
        m.budget.exponent,
        move |x, answers| {
            let big_p = p.eval(x.len() as u64).max(1);
            let slack = sigma.slack;
            for k in 0..=answers.len() {
                match inner.next_event(x, &answers[..k]) {
                    Event::Halt(v) => return Event::Halt(v),
                    Event::Query(q) => {
                        let i = k as u64 + 1;
                        assert!(
                            i <= big_p && q.len() as u64 <= big_p,
                            "machine outran the declared budget polynomial"
                        );
                        let floor = big_p + (big_p - i) * (slack + 1);
                        let padded = iterate_pad_to_window(&sigma, &q, floor)
                            .expect("window floor dominates every raw query");
                        if k == answers.len() {
                            return Event::Query(padded);
                        }
                    }
                }
            }
            unreachable!("replay covers the full answer history")
        },
    )
}

/// The i-th descending window for P and slack k, for tests and
/// documentation: (floor, floor + k].
pub fn descending_window(big_p: u64, slack: u64, i: u64) -> (u64, u64) {
    let floor = big_p + (big_p - i) * (slack + 1);
    (floor, floor + slack)
}

/// The rank-coded copy of a language: x is in the copy iff x is
/// nonempty, its rank-at-length r is at most 2^|x| - 1, and the
/// global rank-r string is in the original.
pub fn rank_coded_oracle(name: &str, inner: &OracleHandle) -> OracleHandle {
    let inner = inner.clone();
    OracleHandle::from_fn(name, move |x| {
        if x.is_empty() {
            return false;
        }
        let r = x.rank_at_length();
        r <= (1u128 << x.len().min(126)) - 1 && inner.decide(&BitString::lex_unrank(r))
    })
}

/// An oracle/machine pair produced by `to_equal_length`.
pub struct EqualLengthReduction {
    pub z: OracleHandle,
    pub machine: OracleMachine,
}

/// Rewrites a machine over b into one over the rank-coded copy of b
/// whose queries all have length exactly q(|x|) + 1.  `q` must bound
/// the raw query lengths; `non_member` witnesses that b is not all of
/// Σ* (the construction needs room at every length).
pub fn to_equal_length(
    m: &OracleMachine,
    b: &OracleHandle,
    q: &Poly,
    non_member: &BitString,
) -> EqualLengthReduction {
    assert!(
        !b.decide(non_member),
        "non_member must lie outside the oracle language"
    );
    let z = rank_coded_oracle("rank-coded", b);
    let inner = m.clone();
    let q = q.clone();
    let machine = OracleMachine::new(
        &alloc::format!("{}[equal-length]", m.name),
        m.budget.exponent,
        move |x, answers| {
            let bound = q.eval(x.len() as u64);
            let target = (bound + 1) as usize;
            assert!(target <= 126, "rank arithmetic capped at length 126");
            for k in 0..=answers.len() {
                match inner.next_event(x, &answers[..k]) {
                    Event::Halt(v) => return Event::Halt(v),
                    Event::Query(w) => {
                        assert!(
                            w.len() as u64 <= bound,
                            "raw query outruns the declared budget polynomial"
                        );
                        if k == answers.len() {
                            return Event::Query(BitString::at_length_with_rank(
                                target,
                                w.lex_rank(),
                            ));
                        }
                    }
                }
            }
            unreachable!("replay covers the full answer history")
        },
    );
    EqualLengthReduction { z, machine }
}

/// A strictly increasing length sequence with a descriptive name; the
/// intended instances are extremely widely spaced (towers), but any
/// strictly increasing values work at desk scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideSpacedLengths {
    pub name: String,
    values: Vec<u64>,
}

impl WideSpacedLengths {
    pub fn new(name: &str, values: Vec<u64>) -> Result<Self, TransformError> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TransformError::LengthsNotIncreasing);
        }
        Ok(WideSpacedLengths {
            name: name.to_owned(),
            values,
        })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

/// A sparse rank-coded oracle: support lengths plus the membership
/// handle.
#[derive(Clone)]
pub struct SparseOracle {
    pub handle: OracleHandle,
    /// The lengths {p(m) + 1 : m in the configured sequence} at which
    /// the oracle may have members.
    pub support: Vec<u64>,
}

/// Encodes b into an oracle that is empty except at the lengths
/// p(m) + 1 for m in `lengths`; at such a length the rank-r string
/// (r <= 2^len - 1) is a member iff the global rank-r string is in b.
pub fn sparse_encode(b: &OracleHandle, p: &Poly, lengths: &WideSpacedLengths) -> SparseOracle {
    let support: Vec<u64> = lengths.values().iter().map(|&m| p.eval(m) + 1).collect();
    let inner = rank_coded_oracle("sparse", b);
    let sup = support.clone();
    let handle = OracleHandle::from_fn("sparse", move |x| {
        sup.contains(&(x.len() as u64)) && inner.decide(x)
    });
    SparseOracle { handle, support }
}

/// Rewrites a machine over a sparse oracle into one that forwards at
/// most one query: queries at unsupported lengths are answered "no"
/// locally, queries below the cutoff length k = max{l in support :
/// l <= q(|x|)} are decided locally (lengths above `brute_cap` are a
/// resource error), and the first query of length exactly k is
/// forwarded.  Any later length-k query is also decided locally, so
/// at most one query ever reaches the oracle.
pub fn one_query_transform(
    m0: &OracleMachine,
    c: &SparseOracle,
    q: &Poly,
    brute_cap: u64,
) -> OracleMachine {
    let inner = m0.clone();
    let handle = c.handle.clone();
    let support = c.support.clone();
    let q = q.clone();
    OracleMachine::new(
        &alloc::format!("{}[one-query]", m0.name),
        m0.budget.exponent,
        move |x, answers| {
            let cutoff = support
                .iter()
                .copied()
                .filter(|&l| l <= q.eval(x.len() as u64))
                .max();
            let mut inner_answers: Vec<bool> = Vec::new();
            let mut used = 0usize; // oracle answers consumed
            let mut forwarded = false;
            loop {
                match inner.next_event(x, &inner_answers) {
                    Event::Halt(v) => return Event::Halt(v),
                    Event::Query(qr) => {
                        let l = qr.len() as u64;
                        if Some(l) == cutoff && !forwarded {
                            if used == answers.len() {
                                return Event::Query(qr);
                            }
                            inner_answers.push(answers[used]);
                            used += 1;
                            forwarded = true;
                        } else {
                            // Local answer.  Unsupported lengths are
                            // definitionally empty; supported ones are
                            // brute-forced within the cap.
                            let a = if support.contains(&l) {
                                assert!(
                                    l <= brute_cap,
                                    "local decision above the brute-force cap"
                                );
                                handle.decide(&qr)
                            } else {
                                false
                            };
                            inner_answers.push(a);
                        }
                    }
                }
            }
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegeneracyClass {
    /// Output independent of every input.
    CompletelyDegenerate,
    /// Output depends on exactly one input.
    AlmostCompletelyDegenerate,
    Essential,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectiveClass {
    pub table: TruthTable,
    pub class: DegeneracyClass,
    /// 0-based input positions the output genuinely depends on.
    pub depends_on: Vec<u32>,
}

/// Classifies a connective by which inputs its output depends on.
pub fn classify_connective(table: &TruthTable) -> ConnectiveClass {
    let arity = table.arity as usize;
    let rows = 1usize << arity;
    let mut depends_on = Vec::new();
    for i in 0..arity {
        let flip = 1usize << (arity - 1 - i);
        if (0..rows).any(|r| table.outputs[r] != table.outputs[r ^ flip]) {
            depends_on.push(i as u32);
        }
    }
    let class = match depends_on.len() {
        0 => DegeneracyClass::CompletelyDegenerate,
        1 => DegeneracyClass::AlmostCompletelyDegenerate,
        _ => DegeneracyClass::Essential,
    };
    ConnectiveClass {
        table: table.clone(),
        class,
        depends_on,
    }
}

/// Collapses a fixed-connective machine with a (almost-)completely
/// degenerate table into an adaptive machine asking at most one
/// query, equal as a language acceptor on every oracle.
pub fn degenerate_ftt_to_monotonic(
    t: &TruthTableMachine,
) -> Result<OracleMachine, TransformError> {
    let Some(table) = t.fixed_table.clone() else {
        return Err(TransformError::NoFixedTable);
    };
    let cls = classify_connective(&table);
    match cls.class {
        DegeneracyClass::Essential => Err(TransformError::EssentialTable),
        DegeneracyClass::CompletelyDegenerate => {
            let v = table.outputs[0];
            Ok(OracleMachine::new(
                &alloc::format!("{}[constant]", t.name),
                t.budget.exponent,
                move |_x, _a| Event::Halt(v),
            ))
        }
        DegeneracyClass::AlmostCompletelyDegenerate => {
            let j = cls.depends_on[0] as usize;
            let inner = t.clone();
            // The output as a function of input j alone (all other
            // inputs are irrelevant; fix them false).
            let arity = table.arity as usize;
            let at = |b: bool| {
                let mut inputs = alloc::vec![false; arity];
                inputs[j] = b;
                table.eval(&inputs)
            };
            let (on_false, on_true) = (at(false), at(true));
            Ok(OracleMachine::new(
                &alloc::format!("{}[projected]", t.name),
                t.budget.exponent,
                move |x, answers| match answers {
                    [] => {
                        let qs = inner.queries(x);
                        assert!(
                            qs.len() > j,
                            "generator must produce at least arity queries"
                        );
                        Event::Query(qs[j].clone())
                    }
                    [a, ..] => Event::Halt(if *a { on_true } else { on_false }),
                },
            ))
        }
    }
}
