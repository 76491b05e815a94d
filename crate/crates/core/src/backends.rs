// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Oracle backends: membership handles, staged (extend-only) oracles,
//! brute-force deciders for the NP fixtures, nondeterministic
//! machines with witness enumeration, and the cylinder construction
//! with its self-witnessing lift.
//!
//! All searches here are exhaustive and capped; blowing a cap is a
//! first-class error, never a silent wrong answer.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::bitcodec::{self, BitString};
use crate::encodings::{Graph, ThreeCnf};
use crate::padding::{Poly, SPadding};

type DecideFn = dyn Fn(&BitString) -> bool + Send + Sync;

/// A total membership test for some language.
#[derive(Clone)]
pub struct OracleHandle {
    pub name: String,
    decide: Arc<DecideFn>,
}

impl OracleHandle {
    pub fn from_fn(
        name: &str,
        decide: impl Fn(&BitString) -> bool + Send + Sync + 'static,
    ) -> Self {
        OracleHandle {
            name: name.to_owned(),
            decide: Arc::new(decide),
        }
    }

    pub fn finite(members: BTreeSet<BitString>) -> Self {
        OracleHandle::from_fn("finite", move |x| members.contains(x))
    }

    pub fn empty() -> Self {
        OracleHandle::from_fn("empty", |_| false)
    }

    pub fn decide(&self, x: &BitString) -> bool {
        (self.decide)(x)
    }
}

impl core::fmt::Debug for OracleHandle {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "OracleHandle({})", self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendError {
    /// An exhaustive search would exceed its cap.
    ResourceCap { what: &'static str, cap: u64 },
    /// The staged oracle was asked to add a string at or below its
    /// watermark, or to lower the watermark.
    StagingViolation { detail: &'static str },
    /// The lift construction needs a padding with a full inverse.
    NeedsFullInverse,
}

impl core::fmt::Display for BackendError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BackendError::ResourceCap { what, cap } => {
                write!(f, "search cap exceeded in {what} (cap {cap})")
            }
            BackendError::StagingViolation { detail } => write!(f, "staging violation: {detail}"),
            BackendError::NeedsFullInverse => {
                write!(f, "construction requires a fully invertible padding")
            }
        }
    }
}

/// Deterministic pseudo-random oracle from a seed: each string of
/// length at most `max_len` is a member with probability one half,
/// decided by a splitmix64 hash of (seed, rank).  Longer strings are
/// non-members, so the handle stays total and cheap.
pub fn seeded_oracle(seed: u64, max_len: usize) -> OracleHandle {
    OracleHandle::from_fn("seeded", move |x| {
        if x.len() > max_len {
            return false;
        }
        let r = x.lex_rank() as u64;
        splitmix64(seed ^ r.wrapping_mul(0x9e3779b97f4a7c15)) & 1 == 1
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A finite oracle under construction: membership may only ever be
/// added above the watermark, so decisions at or below it are frozen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagedOracle {
    members: BTreeSet<BitString>,
    watermark: u64,
}

impl StagedOracle {
    pub fn new() -> Self {
        StagedOracle {
            members: BTreeSet::new(),
            watermark: 0,
        }
    }

    pub fn with_members(members: BTreeSet<BitString>, watermark: u64) -> Result<Self, BackendError> {
        if members.iter().any(|m| (m.len() as u64) > watermark) {
            return Err(BackendError::StagingViolation {
                detail: "member above watermark",
            });
        }
        Ok(StagedOracle { members, watermark })
    }

    pub fn members(&self) -> &BTreeSet<BitString> {
        &self.members
    }

    pub fn watermark(&self) -> u64 {
        self.watermark
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.members.contains(x)
    }

    /// Adds members (all strictly longer than the current watermark)
    /// and optionally raises the watermark.  Members longer than the
    /// new watermark are permitted: they are pending additions that a
    /// later `extend` may freeze by raising the watermark past them.
    pub fn extend(
        &self,
        new_members: &[BitString],
        new_watermark: u64,
    ) -> Result<StagedOracle, BackendError> {
        if new_watermark < self.watermark {
            return Err(BackendError::StagingViolation {
                detail: "watermark may not decrease",
            });
        }
        for m in new_members {
            if (m.len() as u64) <= self.watermark {
                return Err(BackendError::StagingViolation {
                    detail: "new member at or below the old watermark",
                });
            }
        }
        let mut members = self.members.clone();
        members.extend(new_members.iter().cloned());
        Ok(StagedOracle {
            members,
            watermark: new_watermark,
        })
    }

    /// Immutable snapshot as a plain membership handle.
    pub fn handle(&self) -> OracleHandle {
        let members = self.members.clone();
        OracleHandle::from_fn("staged", move |x| members.contains(x))
    }
}

impl Default for StagedOracle {
    fn default() -> Self {
        Self::new()
    }
}

/// Exhaustive satisfiability check; capped at 20 distinct variables.
pub fn sat3_decide(f: &ThreeCnf) -> Result<bool, BackendError> {
    let vars = f.variables();
    if vars.len() > 20 {
        return Err(BackendError::ResourceCap {
            what: "3-SAT assignment enumeration",
            cap: 20,
        });
    }
    for mask in 0u64..(1u64 << vars.len()) {
        let assignment = |v: u64| {
            let i = vars.binary_search(&v).expect("assignment over formula vars");
            (mask >> i) & 1 == 1
        };
        if f.is_satisfied_by(&assignment) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exhaustive m-clique check; capped at 16 vertices.
pub fn clique_decide(g: &Graph, m: u64) -> Result<bool, BackendError> {
    if m == 0 {
        return Ok(true);
    }
    if m > g.n() {
        return Ok(false);
    }
    if g.n() > 16 {
        return Err(BackendError::ResourceCap {
            what: "clique subset enumeration",
            cap: 16,
        });
    }
    let n = g.n() as u32;
    for mask in 0u32..(1u32 << n) {
        if u64::from(mask.count_ones()) != m {
            continue;
        }
        let verts: Vec<u64> = (0..n)
            .filter(|i| (mask >> i) & 1 == 1)
            .map(|i| (i + 1) as u64)
            .collect();
        let clique = verts
            .iter()
            .enumerate()
            .all(|(i, &a)| verts[i + 1..].iter().all(|&b| g.has_edge(a, b)));
        if clique {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The language of encoded satisfiable 3-CNF formulas.  Panics if an
/// instance blows the brute-force cap; callers control instance size.
pub fn sat3_oracle() -> OracleHandle {
    OracleHandle::from_fn("3sat", |x| {
        match crate::encodings::decode_formula(x) {
            Ok(f) => sat3_decide(&f).expect("3-SAT instance within brute-force cap"),
            Err(_) => false,
        }
    })
}

/// The language of pairs (encoded graph, numeral m) such that the
/// graph has an m-clique.
pub fn clique_oracle() -> OracleHandle {
    OracleHandle::from_fn("clique", |x| {
        let Ok((g_enc, m_bits)) = bitcodec::unpair(x) else {
            return false;
        };
        let Ok(g) = crate::encodings::decode_graph(&g_enc) else {
            return false;
        };
        let Ok(m) = m_bits.numeral_value() else {
            return false;
        };
        if m > u64::MAX as u128 {
            return false;
        }
        clique_decide(&g, m as u64).expect("clique instance within brute-force cap")
    })
}

type CheckFn = dyn Fn(&BitString, &BitString) -> bool + Send + Sync;
type PoolFn = dyn Fn(&BitString, u64) -> Result<Vec<BitString>, BackendError> + Send + Sync;

/// A nondeterministic machine in guess-and-check form: it accepts x
/// iff some witness w with |w| <= guess_bound(|x|) passes the check.
///
/// `pool` optionally narrows the candidate witnesses that need to be
/// examined; every candidate is still verified by the check, so a
/// pool can only affect completeness, and the constructions here only
/// install pools that provably cover all witnesses.  Without a pool,
/// candidates are enumerated blindly up to the length bound.
#[derive(Clone)]
pub struct NondetMachine {
    pub name: String,
    pub guess_bound: Poly,
    check: Arc<CheckFn>,
    pool: Option<Arc<PoolFn>>,
}

impl NondetMachine {
    pub fn new(
        name: &str,
        guess_bound: Poly,
        check: impl Fn(&BitString, &BitString) -> bool + Send + Sync + 'static,
    ) -> Self {
        NondetMachine {
            name: name.to_owned(),
            guess_bound,
            check: Arc::new(check),
            pool: None,
        }
    }

    pub fn with_pool(
        mut self,
        pool: impl Fn(&BitString, u64) -> Result<Vec<BitString>, BackendError> + Send + Sync + 'static,
    ) -> Self {
        self.pool = Some(Arc::new(pool));
        self
    }

    pub fn check(&self, x: &BitString, w: &BitString) -> bool {
        let bound = self.guess_bound.eval(x.len() as u64);
        (w.len() as u64) <= bound && (self.check)(x, w)
    }

    /// All accepting witnesses, in shortlex order.  `cap` bounds the
    /// number of candidates examined.
    pub fn witnesses(&self, x: &BitString, cap: u64) -> Result<Vec<BitString>, BackendError> {
        let bound = self.guess_bound.eval(x.len() as u64);
        let candidates: Vec<BitString> = match &self.pool {
            Some(pool) => {
                let mut c = pool(x, cap)?;
                c.sort();
                c.dedup();
                c
            }
            None => {
                if bound >= 62 || (1u64 << (bound + 1)) - 1 > cap {
                    return Err(BackendError::ResourceCap {
                        what: "blind witness enumeration",
                        cap,
                    });
                }
                bitcodec::strings_up_to(bound as usize)
            }
        };
        Ok(candidates
            .into_iter()
            .filter(|w| self.check(x, w))
            .collect())
    }

    pub fn accepts(&self, x: &BitString, cap: u64) -> Result<bool, BackendError> {
        Ok(!self.witnesses(x, cap)?.is_empty())
    }

    pub fn count_accepting(&self, x: &BitString, cap: u64) -> Result<u64, BackendError> {
        Ok(self.witnesses(x, cap)?.len() as u64)
    }
}

impl core::fmt::Debug for NondetMachine {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "NondetMachine({})", self.name)
    }
}

/// Guess-and-check machine for encoded satisfiable 3-CNF formulas:
/// the witness is one bit per distinct variable, ascending.
pub fn sat3_nondet() -> NondetMachine {
    NondetMachine::new("3sat-guess", Poly::identity(), |x, w| {
        let Ok(f) = crate::encodings::decode_formula(x) else {
            return false;
        };
        let vars = f.variables();
        if w.len() != vars.len() {
            return false;
        }
        let bits = w.bits();
        f.is_satisfied_by(&|v| {
            let i = vars.binary_search(&v).expect("var in formula");
            bits[i]
        })
    })
    // One guessed bit per distinct variable, in ascending variable
    // order; far smaller than enumerating every string up to |x|.
    .with_pool(|x, cap| {
        let Ok(f) = crate::encodings::decode_formula(x) else {
            return Ok(Vec::new());
        };
        let k = f.variables().len();
        if k >= 62 || (1u64 << k) > cap {
            return Err(BackendError::ResourceCap {
                what: "assignment enumeration",
                cap,
            });
        }
        Ok(bitcodec::strings_of_length(k))
    })
}

/// Builds a cylinder over `a`: a language l many-one equivalent to a
/// together with a fully invertible, length-increasing combining
/// function s such that x is in l iff s(x, y) is in l for every y.
///
/// l is the set of pair codes whose first component is in a.  On a
/// pair-code input x = (u, v) the combiner keeps u up front and tucks
/// (v, x, y) inside; on any other input it dispatches to the
/// non-member witness with (x, y) inside.  The inner tuple arity
/// (3 vs 2) separates the branches, which is what makes the full
/// inverse total.
pub fn make_cylinder(a: &OracleHandle, non_member: &BitString) -> (OracleHandle, SPadding) {
    assert!(
        !a.decide(non_member),
        "non_member must lie outside the base language"
    );
    let a2 = a.clone();
    let l = OracleHandle::from_fn("cylinder", move |x| match bitcodec::unpair(x) {
        Ok((u, _v)) => a2.decide(&u),
        Err(_) => false,
    });

    let nm = non_member.clone();
    let map = move |x: &BitString, y: &BitString| -> BitString {
        match bitcodec::unpair(x) {
            Ok((u, v)) => bitcodec::pair(
                &u,
                &bitcodec::multi_pair(&[v, x.clone(), y.clone()]),
            ),
            Err(_) => bitcodec::pair(&nm, &bitcodec::multi_pair(&[x.clone(), y.clone()])),
        }
    };

    let nm2 = non_member.clone();
    let full_inverse = move |z: &BitString| -> Option<(BitString, BitString)> {
        let (u, w) = bitcodec::unpair(z).ok()?;
        let parts = bitcodec::multi_unpair(&w).ok()?;
        match parts.as_slice() {
            [v, x, y] => {
                // First branch: the embedded x must really be (u, v).
                (*x == bitcodec::pair(&u, v)).then(|| (x.clone(), y.clone()))
            }
            [x, y] => {
                // Second branch: dispatched via the non-member, and
                // only fires for non-pair-code x.
                if u != nm2 || bitcodec::unpair(x).is_ok() {
                    return None;
                }
                Some((x.clone(), y.clone()))
            }
            _ => None,
        }
    };

    // |s(x, y)| <= 6(|x| + |y|) + 12 + 2|non_member| on either branch,
    // and |x| + |y| <= |s(x, y)| always, so honesty is the identity.
    let expansion = Poly::new(alloc::vec![12 + 2 * non_member.len() as u64, 6]);
    let s = SPadding::new(
        "cylinder-combiner",
        Poly::new(alloc::vec![0, 1]),
        expansion,
        map,
    )
    .with_full_inverse(full_inverse);
    (l, s)
}

/// Turns a guess-and-check machine for a language into one for the
/// same language whose accepting witnesses each carry the input back
/// out: the lifted machine guesses w of length at most q(|x| + p(|x|))
/// and accepts only when w = s(x, w') for a witness w' (|w'| <= p(|x|))
/// of the original machine.  Requires s fully invertible.  `p` bounds
/// the original machine's guesses and `q` bounds the combiner's
/// output growth.
pub fn self_witnessing_lift(
    n: &NondetMachine,
    s: &SPadding,
    p: &Poly,
    q: &Poly,
) -> Result<NondetMachine, BackendError> {
    if !s.has_full_inverse() {
        return Err(BackendError::NeedsFullInverse);
    }
    let p = p.clone();
    // |s(x, w')| <= q(|x| + p(|x|)).
    let bound = q.compose_sum(&Poly::identity(), &p);
    let s_check = s.clone();
    let inner = n.clone();
    let p_check = p.clone();
    let check = move |x: &BitString, w: &BitString| -> bool {
        let Some((x2, w2)) = s_check.invert(w) else {
            return false;
        };
        x2 == *x && (w2.len() as u64) <= p_check.eval(x.len() as u64) && inner.check(x, &w2)
    };
    let s_pool = s.clone();
    let inner_pool = n.clone();
    let pool = move |x: &BitString, cap: u64| -> Result<Vec<BitString>, BackendError> {
        // Every lifted witness is s(x, w') for an inner witness w',
        // so mapping the inner witness set through s covers them all.
        Ok(inner_pool
            .witnesses(x, cap)?
            .iter()
            .map(|w2| s_pool.apply(x, w2))
            .collect())
    };
    Ok(NondetMachine::new(
        &alloc::format!("{}[self-witnessing]", n.name),
        bound,
        check,
    )
    .with_pool(pool))
}
