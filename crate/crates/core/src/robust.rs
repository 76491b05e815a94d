// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Wrappers that force constraint compliance on arbitrary machines.
//!
//! The prefix-checked wrapper vets every query before asking it and
//! halts (rejecting) just before the first illegal one; it never
//! changes the behavior of a machine that was compliant to begin with.
//! It requires a prefix-closed discipline, since withholding the bad
//! query must leave the already-asked prefix legal.
//!
//! The escape-routed wrapper handles disciplines where stopping cold
//! is itself illegal: before asking any query it confirms that some
//! short legal continuation ("escape route") would remain afterwards,
//! and when the underlying machine finishes -- or gets stuck -- the
//! wrapper walks such a route to end the transcript legally.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bitcodec::{self, BitString};
use crate::machine::{ConstraintKind, Event, OracleMachine};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RobustError {
    /// The prefix-checked wrapper only works for prefix-closed
    /// disciplines.
    NotPrefixClosed { constraint: String },
    /// The exhaustive route search examined `cap` candidate
    /// extensions without finishing.
    SearchCapExceeded { cap: u64 },
}

impl core::fmt::Display for RobustError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RobustError::NotPrefixClosed { constraint } => {
                write!(f, "constraint {constraint} is not declared prefix-closed")
            }
            RobustError::SearchCapExceeded { cap } => {
                write!(f, "escape-route search cap {cap} exceeded")
            }
        }
    }
}

/// Wraps a machine so that it obeys `constraint` on every oracle and
/// input: the wrapper echoes the machine's queries until one would be
/// illegal, and rejects instead of asking it.  On compliant runs the
/// wrapper is extensionally identical to the machine.
pub fn wrap_prefix_checked(
    m: &OracleMachine,
    constraint: &ConstraintKind,
) -> Result<OracleMachine, RobustError> {
    if !constraint.prefix_closed() {
        return Err(RobustError::NotPrefixClosed {
            constraint: String::from(constraint.name()),
        });
    }
    let inner = m.clone();
    let c = constraint.clone();
    let wrapped = OracleMachine::new(
        &alloc::format!("{}[{}-checked]", m.name, constraint.name()),
        m.budget.exponent,
        move |x, answers| {
            // The wrapper asks exactly the queries the inner machine
            // asked, so the answer history maps through unchanged.
            let (mut queries, _) = inner.replay(x, answers);
            match inner.next_event(x, answers) {
                Event::Halt(v) => Event::Halt(v),
                Event::Query(q) => {
                    queries.push(q.clone());
                    if c.allows(x, &queries) {
                        Event::Query(q)
                    } else {
                        Event::Halt(false)
                    }
                }
            }
        },
    );
    Ok(wrapped)
}

/// A legal continuation: appending these queries to the current
/// sequence lands back inside the constraint.  Each query has length
/// at most `bound`, and there are at most `bound` of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeRoute {
    pub extension: Vec<BitString>,
    pub bound: u64,
}

/// Finds the canonical escape route for (input, prefix): the fewest
/// queries, ties broken by shortlex order query by query.  For
/// prefix-closed disciplines this is analytic (the empty route exists
/// iff the prefix itself is legal); otherwise the search enumerates
/// every candidate extension and `cap` bounds the number examined.
pub fn find_escape_route(
    constraint: &ConstraintKind,
    input: &BitString,
    prefix: &[BitString],
    bound: u64,
    cap: u64,
) -> Result<Option<EscapeRoute>, RobustError> {
    if constraint.prefix_closed() {
        // Legal extensions of an illegal prefix would contradict
        // prefix-closure, and the empty extension works otherwise.
        return Ok(if constraint.allows(input, prefix) {
            Some(EscapeRoute {
                extension: Vec::new(),
                bound,
            })
        } else {
            None
        });
    }
    let candidates = bitcodec::strings_up_to(bound.min(16) as usize);
    let mut examined = 0u64;
    // Tuples of t queries, t ascending; within a t, candidate indices
    // in shortlex order per position, earlier positions most
    // significant.  That makes the first hit canonical.
    for t in 0..=bound as usize {
        let mut idx = alloc::vec![0usize; t];
        loop {
            examined += 1;
            if examined > cap {
                return Err(RobustError::SearchCapExceeded { cap });
            }
            let mut seq = prefix.to_vec();
            seq.extend(idx.iter().map(|&i| candidates[i].clone()));
            if constraint.allows(input, &seq) {
                return Ok(Some(EscapeRoute {
                    extension: idx.iter().map(|&i| candidates[i].clone()).collect(),
                    bound,
                }));
            }
            // Advance the odometer, last position fastest.
            let mut pos = t;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < candidates.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if t == 0 || (pos == 0 && idx[0] == 0) {
                break;
            }
        }
    }
    Ok(None)
}

/// Wraps a machine so that every run ends with a legal transcript,
/// using escape routes of size `route_bound(|x|)`:
///
/// * before forwarding a query, the wrapper confirms a route would
///   still exist afterwards; if not, it walks the canonical route for
///   the current prefix (ignoring the answers) and rejects;
/// * when the machine halts, the wrapper walks the canonical route
///   for the asked prefix and only then emits the verdict.
///
/// A search-cap overrun inside the route finder surfaces as an error
/// at wrap time probes cannot detect, so the wrapper takes the cap as
/// a parameter and the caller sizes it to the discipline; the route
/// walker panics if the cap trips mid-run, which exhaustive fixtures
/// in the test suite are sized never to do.
pub fn wrap_escape_routed(
    m: &OracleMachine,
    constraint: &ConstraintKind,
    route_bound: crate::padding::Poly,
    cap: u64,
) -> OracleMachine {
    let inner = m.clone();
    let c = constraint.clone();
    let wrapped = OracleMachine::new(
        &alloc::format!("{}[{}-routed]", m.name, constraint.name()),
        m.budget.exponent + 1,
        move |x, answers| {
            let r = route_bound.eval(x.len() as u64);
            let route = |prefix: &[BitString]| -> Option<EscapeRoute> {
                find_escape_route(&c, x, prefix, r, cap)
                    .expect("escape-route search cap sized for the discipline")
            };
            // Re-simulate the wrapper's own history to find its state.
            let mut asked: Vec<BitString> = Vec::new();
            let mut used = 0usize; // answers consumed so far
            loop {
                match inner.next_event(x, &answers[..used.min(answers.len())]) {
                    Event::Halt(v) => {
                        // Walk the final route, then emit the verdict.
                        let ext = route(&asked)
                            .expect("a route existed before every asked query")
                            .extension;
                        let walked = answers.len() - used;
                        if walked < ext.len() {
                            return Event::Query(ext[walked].clone());
                        }
                        return Event::Halt(v);
                    }
                    Event::Query(q) => {
                        let mut with_q = asked.clone();
                        with_q.push(q.clone());
                        if route(&with_q).is_some() {
                            if used == answers.len() {
                                return Event::Query(q);
                            }
                            asked.push(q);
                            used += 1;
                        } else {
                            // No way forward: walk the recovery route
                            // for the current prefix and reject.
                            let ext = route(&asked)
                                .expect("a route existed before every asked query")
                                .extension;
                            let walked = answers.len() - used;
                            if walked < ext.len() {
                                return Event::Query(ext[walked].clone());
                            }
                            return Event::Halt(false);
                        }
                    }
                }
            }
        },
    );
    wrapped
}
