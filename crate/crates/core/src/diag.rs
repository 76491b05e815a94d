// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Finite, verifiable diagonalization stages.
//!
//! Each stage engine picks a fresh diagonal length `n`, runs one machine
//! on `0^n` against the staged oracle, and either exhibits a verdict
//! disagreement with the matching test language or catches the machine
//! breaking the query discipline the stage polices.  The outcome is a
//! [`StageCertificate`] that anyone can re-check later, because the
//! stage freezes every string it made relevant under the oracle's
//! watermark before handing the oracle to the next stage.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::backends::{BackendError, OracleHandle, StagedOracle};
use crate::bitcodec::BitString;
use crate::machine::{run, OracleMachine, Outcome, TruthTableMachine};

/// Oracle-parameterized test languages.  Each decider consults the
/// supplied oracle only at the positions its defining formula names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestLanguageKind {
    /// `{0^i  :  (0^i ∈ D) ⊕ (1^i ∈ D)}`
    XorPair,
    /// `{0^{4^k}  :  k ≥ 1  ∧  (μ1(k) ∈ D) ⊕ (μ2(k) ∈ D)}` where
    /// `μ1(k) = 0^{n/4} χ_D(0^{n-1}) … χ_D(0^{3n/4})` and
    /// `μ2(k) = 0^{5n/4} χ_D(0^{n+1}) … χ_D(0^{5n/4})` for `n = 4^k`.
    DoubleSweep,
    /// `{0^{8^k}  :  k ≥ 1  ∧  0^{5n/8} χ_D(0^{n-1}) … χ_D(0^{7n/8}) ∈ D}`
    Mirror,
    /// `{0^{4^k}  :  k ≥ 1  ∧  0^{n/4} χ_D(0^{n-1}) … χ_D(0^{3n/4}) ∈ D}`
    SweepDown,
    /// `{0^{4^k}  :  k ≥ 1  ∧  0^{5n/4} χ_D(0^{n+1}) … χ_D(0^{5n/4}) ∈ D}`
    SweepUp,
    /// `{0^{4i}  :  i ≥ 1  ∧  0^{4i+1} ∈ D}`
    ShiftUp4k1,
    /// `{0^{4i+3}  :  i ≥ 1  ∧  (0^{4i+2} ∈ D) ⊕ (1^{4i+2} ∈ D)}`
    Xor4k2,
    /// `{0^{4i+3}  :  i ≥ 1  ∧  0^{4i+2} ∈ D}`
    ShiftDown4k2,
    /// `{0^{4i}  :  i ≥ 1  ∧  (0^{4i+1} ∈ D) ⊕ (1^{4i+1} ∈ D)}`
    Xor4k1,
}

impl TestLanguageKind {
    pub const ALL: [TestLanguageKind; 9] = [
        TestLanguageKind::XorPair,
        TestLanguageKind::DoubleSweep,
        TestLanguageKind::Mirror,
        TestLanguageKind::SweepDown,
        TestLanguageKind::SweepUp,
        TestLanguageKind::ShiftUp4k1,
        TestLanguageKind::Xor4k2,
        TestLanguageKind::ShiftDown4k2,
        TestLanguageKind::Xor4k1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestLanguageKind::XorPair => "xor-pair",
            TestLanguageKind::DoubleSweep => "double-sweep",
            TestLanguageKind::Mirror => "mirror",
            TestLanguageKind::SweepDown => "sweep-down",
            TestLanguageKind::SweepUp => "sweep-up",
            TestLanguageKind::ShiftUp4k1 => "shift-up-4k1",
            TestLanguageKind::Xor4k2 => "xor-4k2",
            TestLanguageKind::ShiftDown4k2 => "shift-down-4k2",
            TestLanguageKind::Xor4k1 => "xor-4k1",
        }
    }

    pub fn by_name(name: &str) -> Option<TestLanguageKind> {
        TestLanguageKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

/// `base^k = n` for some `k ≥ 1`?
fn exact_power(n: usize, base: usize) -> bool {
    let mut v = base;
    while v < n {
        v *= base;
    }
    v == n && n >= base
}

/// `0^pad` followed by the oracle's characteristic bits at
/// `0^{start}, 0^{start+step}, …` (`count` of them; `step` is ±1).
fn chi_word(d: &OracleHandle, pad: usize, start: usize, step: isize, count: usize) -> BitString {
    let mut bits = vec![false; pad];
    let mut len = start as isize;
    for _ in 0..count {
        bits.push(d.decide(&BitString::zeros(len as usize)));
        len += step;
    }
    BitString::from_bits(bits)
}

/// Membership of `x` in the test language defined from oracle `d`.
pub fn test_language_decide(kind: TestLanguageKind, d: &OracleHandle, x: &BitString) -> bool {
    if !x.is_all_zeros() {
        return false;
    }
    let n = x.len();
    match kind {
        TestLanguageKind::XorPair => {
            d.decide(&BitString::zeros(n)) ^ d.decide(&BitString::ones(n))
        }
        TestLanguageKind::DoubleSweep => {
            if !exact_power(n, 4) {
                return false;
            }
            let mu1 = chi_word(d, n / 4, n - 1, -1, n / 4);
            let mu2 = chi_word(d, 5 * n / 4, n + 1, 1, n / 4);
            d.decide(&mu1) ^ d.decide(&mu2)
        }
        TestLanguageKind::Mirror => {
            if !exact_power(n, 8) {
                return false;
            }
            d.decide(&chi_word(d, 5 * n / 8, n - 1, -1, n / 8))
        }
        TestLanguageKind::SweepDown => {
            if !exact_power(n, 4) {
                return false;
            }
            d.decide(&chi_word(d, n / 4, n - 1, -1, n / 4))
        }
        TestLanguageKind::SweepUp => {
            if !exact_power(n, 4) {
                return false;
            }
            d.decide(&chi_word(d, 5 * n / 4, n + 1, 1, n / 4))
        }
        TestLanguageKind::ShiftUp4k1 => {
            n >= 4 && n % 4 == 0 && d.decide(&BitString::zeros(n + 1))
        }
        TestLanguageKind::Xor4k2 => {
            n >= 7
                && n % 4 == 3
                && (d.decide(&BitString::zeros(n - 1)) ^ d.decide(&BitString::ones(n - 1)))
        }
        TestLanguageKind::ShiftDown4k2 => {
            n >= 7 && n % 4 == 3 && d.decide(&BitString::zeros(n - 1))
        }
        TestLanguageKind::Xor4k1 => {
            n >= 4
                && n % 4 == 0
                && (d.decide(&BitString::zeros(n + 1)) ^ d.decide(&BitString::ones(n + 1)))
        }
    }
}

/// A machine submitted to a stage: either adaptive or truth-table.
#[derive(Clone, Debug)]
pub enum StageMachine {
    Adaptive(OracleMachine),
    TruthTable(TruthTableMachine),
}

impl StageMachine {
    pub fn name(&self) -> &str {
        match self {
            StageMachine::Adaptive(m) => &m.name,
            StageMachine::TruthTable(m) => &m.name,
        }
    }

    pub fn exponent(&self) -> u32 {
        match self {
            StageMachine::Adaptive(m) => m.budget.exponent,
            StageMachine::TruthTable(m) => m.budget.exponent,
        }
    }

    fn limit(&self, n: usize) -> u64 {
        match self {
            StageMachine::Adaptive(m) => m.budget.limit(n),
            StageMachine::TruthTable(m) => m.budget.limit(n),
        }
    }
}

/// Which discipline a single stage polices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageKind {
    /// Diagonal against increasing/decreasing machines via the xor-pair
    /// language: the two probes `0^n` and `1^n` share a length.
    SameLengthPair,
    /// Diagonal against truth-table machines via the mirror language,
    /// keeping the mirrored membership promise `χ(0^{n-j}) = χ(0^{n+j})`.
    MirrorPromise,
    /// Diagonal against nondecreasing machines via the sweep-down
    /// language: the assembled short query arrives after long ones.
    SweepDown,
    /// Odd interleaved stage: a strong-nonincreasing machine may never
    /// ask `0^{n+1}` on input `0^n`.
    ShiftUpOdd,
    /// Even interleaved stage: a decreasing machine may not ask both
    /// `0^{n-1}` and `1^{n-1}` on input `0^n`.
    XorPairEven,
}

impl StageKind {
    /// The test language this stage's disagreement cases are measured
    /// against.
    pub fn language(&self) -> TestLanguageKind {
        match self {
            StageKind::SameLengthPair => TestLanguageKind::XorPair,
            StageKind::MirrorPromise => TestLanguageKind::Mirror,
            StageKind::SweepDown => TestLanguageKind::SweepDown,
            StageKind::ShiftUpOdd => TestLanguageKind::ShiftUp4k1,
            StageKind::XorPairEven => TestLanguageKind::Xor4k2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StageKind::SameLengthPair => "same-length-pair",
            StageKind::MirrorPromise => "mirror-promise",
            StageKind::SweepDown => "sweep-down",
            StageKind::ShiftUpOdd => "shift-up-odd",
            StageKind::XorPairEven => "xor-pair-even",
        }
    }
}

/// A whole construction: a fixed stage kind repeated per machine, or
/// the interleaved odd/even pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstructionKind {
    SameLengthPair,
    MirrorPromise,
    SweepDown,
    Interleaved,
}

impl ConstructionKind {
    /// Stage kind for the 1-based stage index.
    pub fn stage_kind(&self, stage: u32) -> StageKind {
        match self {
            ConstructionKind::SameLengthPair => StageKind::SameLengthPair,
            ConstructionKind::MirrorPromise => StageKind::MirrorPromise,
            ConstructionKind::SweepDown => StageKind::SweepDown,
            ConstructionKind::Interleaved => {
                if stage % 2 == 1 {
                    StageKind::ShiftUpOdd
                } else {
                    StageKind::XorPairEven
                }
            }
        }
    }
}

/// How a stage discharged its obligation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    /// The machine accepts but the diagonal input is outside the test
    /// language.
    DisagreementAccept,
    /// The machine rejects but the diagonal input is inside the test
    /// language.
    DisagreementReject,
    /// The machine asked a query pattern the policed discipline forbids.
    ConstraintViolation,
}

impl CaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::DisagreementAccept => "disagreement-accept",
            CaseTag::DisagreementReject => "disagreement-reject",
            CaseTag::ConstraintViolation => "constraint-violation",
        }
    }

    pub fn by_name(name: &str) -> Option<CaseTag> {
        match name {
            "disagreement-accept" => Some(CaseTag::DisagreementAccept),
            "disagreement-reject" => Some(CaseTag::DisagreementReject),
            "constraint-violation" => Some(CaseTag::ConstraintViolation),
            _ => None,
        }
    }
}

/// Replayable record of one stage's achievement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageCertificate {
    pub kind: StageKind,
    /// 1-based stage index within its construction.
    pub stage: u32,
    pub machine: String,
    pub exponent: u32,
    /// The diagonal length: the stage ran the machine on `0^n`.
    pub n: usize,
    pub case: CaseTag,
    /// Every string added to the oracle during this stage.
    pub added: Vec<BitString>,
    /// The first-gap string, for the stages that select one.
    pub alpha: Option<BitString>,
    /// Everything this stage relied on sits at or below this length.
    pub watermark_after: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagError {
    /// No diagonal length satisfies the stage's side conditions under
    /// the cap.
    NoFeasibleN { kind: StageKind, cap: usize },
    /// The machine exhausted its query budget on the diagonal input.
    BudgetExceeded { machine: String, n: usize },
    /// The stage needs the other machine shape (truth-table stages
    /// refuse adaptive machines).
    WrongMachineShape { kind: StageKind, machine: String },
    Staging(BackendError),
}

impl core::fmt::Display for DiagError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DiagError::NoFeasibleN { kind, cap } => {
                write!(f, "no feasible diagonal length for {} under cap {}", kind.name(), cap)
            }
            DiagError::BudgetExceeded { machine, n } => {
                write!(f, "machine {} exceeded its budget on 0^{}", machine, n)
            }
            DiagError::WrongMachineShape { kind, machine } => {
                write!(f, "stage {} cannot run machine {}", kind.name(), machine)
            }
            DiagError::Staging(e) => write!(f, "staging: {}", e),
        }
    }
}

impl From<BackendError> for DiagError {
    fn from(e: BackendError) -> Self {
        DiagError::Staging(e)
    }
}

/// `2^k`, saturating, for feasibility side conditions.
fn pow2(k: usize) -> u64 {
    if k >= 63 {
        u64::MAX
    } else {
        1u64 << k
    }
}

/// Smallest diagonal length satisfying the stage's side conditions:
/// above the already-relevant region, of the right arithmetic shape,
/// and (for the sweep stages) with budget strictly below the number of
/// candidate gap strings.
pub fn select_diagonal_length(
    kind: StageKind,
    exponent: u32,
    watermark: u64,
    cap: usize,
) -> Option<usize> {
    let budget = |n: usize| {
        (n as u64)
            .saturating_pow(exponent)
            .saturating_add(exponent as u64)
    };
    match kind {
        StageKind::SameLengthPair => {
            let n = core::cmp::max(watermark as usize + 1, 1);
            (n <= cap).then_some(n)
        }
        StageKind::SweepDown => {
            let mut n = 4usize;
            loop {
                if n > cap {
                    return None;
                }
                if budget(n) < pow2(n / 4) && watermark < (n / 2) as u64 {
                    return Some(n);
                }
                n = n.checked_mul(4)?;
            }
        }
        StageKind::MirrorPromise => {
            let mut n = 8usize;
            loop {
                if n > cap {
                    return None;
                }
                if budget(n) < pow2(n / 8) && watermark < (3 * n / 4) as u64 {
                    return Some(n);
                }
                n = n.checked_mul(8)?;
            }
        }
        StageKind::ShiftUpOdd => {
            let mut n = 4usize;
            while n as u64 <= watermark {
                n += 4;
            }
            (n <= cap).then_some(n)
        }
        StageKind::XorPairEven => {
            // Stronger than "no string of length n or longer is
            // relevant": the probes sit at length n-1, so they must
            // themselves be fresh (watermark < n-1).
            let mut n = 7usize;
            while (n - 1) as u64 <= watermark {
                n += 4;
            }
            (n <= cap).then_some(n)
        }
    }
}

/// One observed run: the query list in order, the verdict, and the
/// longest query length.
struct Observed {
    queries: Vec<BitString>,
    verdict: bool,
    longest: u64,
}

fn observe(m: &StageMachine, h: &OracleHandle, input: &BitString) -> Result<Observed, DiagError> {
    let budget_err = || DiagError::BudgetExceeded {
        machine: String::from(m.name()),
        n: input.len(),
    };
    match m {
        StageMachine::Adaptive(om) => {
            let t = run(om, h, input, None);
            let verdict = match t.outcome {
                Outcome::Accept => true,
                Outcome::Reject => false,
                _ => return Err(budget_err()),
            };
            let queries = t.queries();
            let longest = queries.iter().map(|q| q.len() as u64).max().unwrap_or(0);
            Ok(Observed { queries, verdict, longest })
        }
        StageMachine::TruthTable(tm) => {
            let r = tm.run_tt(h, input).map_err(|_| budget_err())?;
            let longest = r.queries.iter().map(|q| q.len() as u64).max().unwrap_or(0);
            Ok(Observed {
                queries: r.queries,
                verdict: r.verdict,
                longest,
            })
        }
    }
}

/// If `q` is `0^pad` followed by `width` arbitrary bits, the numeric
/// value of those bits (MSB first).  `None` when the shape does not
/// match or a set bit sits beyond `u64` range (such a value can never
/// collide with a first-gap candidate, which is at most the budget).
fn gap_candidate_value(q: &BitString, pad: usize, width: usize) -> Option<u64> {
    if q.len() != pad + width || q.bits()[..pad].iter().any(|&b| b) {
        return None;
    }
    let suffix = &q.bits()[pad..];
    let mut v: u64 = 0;
    for &b in suffix {
        if v > (u64::MAX >> 1) {
            return None;
        }
        v = (v << 1) | b as u64;
    }
    Some(v)
}

/// Width-`width` bit string with numeric value `v`, MSB first.
fn value_bits(v: u64, width: usize) -> BitString {
    let mut bits = vec![false; width];
    for i in 0..width.min(64) {
        bits[width - 1 - i] = (v >> i) & 1 == 1;
    }
    BitString::from_bits(bits)
}

/// Lexicographically smallest width-`width` string whose value is not
/// excluded.  First-gap scan: at most `|excluded| + 1` candidates.
fn first_gap(excluded: &BTreeSet<u64>, width: usize) -> BitString {
    let mut v = 0u64;
    while excluded.contains(&v) {
        v += 1;
    }
    debug_assert!(width >= 64 || v < (1u64 << width));
    value_bits(v, width)
}

/// Runs one diagonalization stage: picks the diagonal length, runs the
/// machine, extends the oracle exactly as the stage prescribes, and
/// freezes everything made relevant under the new watermark.
pub fn run_diag_stage(
    kind: StageKind,
    m: &StageMachine,
    o: &StagedOracle,
    stage: u32,
    cap: usize,
) -> Result<(StagedOracle, StageCertificate), DiagError> {
    if matches!(kind, StageKind::MirrorPromise) && !matches!(m, StageMachine::TruthTable(_)) {
        return Err(DiagError::WrongMachineShape {
            kind,
            machine: String::from(m.name()),
        });
    }
    let w = o.watermark();
    let n = select_diagonal_length(kind, m.exponent(), w, cap)
        .ok_or(DiagError::NoFeasibleN { kind, cap })?;
    let input = BitString::zeros(n);
    let limit = m.limit(n);

    // Everything the stage touches must end up frozen: the budget
    // region, the probe positions this stage's language reads, the
    // longest query actually asked, and every string added.
    let mut relevant = limit.max(w);
    let probe_floor: u64 = match kind {
        StageKind::SameLengthPair => n as u64,
        StageKind::MirrorPromise => (5 * n / 4) as u64,
        StageKind::SweepDown => (n - 1) as u64,
        StageKind::ShiftUpOdd => (n + 1) as u64,
        StageKind::XorPairEven => (n - 1) as u64,
    };
    relevant = relevant.max(probe_floor);

    let mut added: Vec<BitString> = Vec::new();
    let mut alpha: Option<BitString> = None;

    let (case, oracle) = match kind {
        StageKind::SameLengthPair => {
            let obs = observe(m, &o.handle(), &input)?;
            relevant = relevant.max(obs.longest);
            let q0 = BitString::zeros(n);
            let q1 = BitString::ones(n);
            let has0 = obs.queries.contains(&q0);
            let has1 = obs.queries.contains(&q1);
            if obs.verdict {
                (CaseTag::DisagreementAccept, o.clone())
            } else if has0 && has1 {
                (CaseTag::ConstraintViolation, o.clone())
            } else {
                // Put in whichever probe the machine never saw; the
                // xor flips to "in" while the run is undisturbed.
                added.push(if has0 { q1 } else { q0 });
                (CaseTag::DisagreementReject, o.extend(&added, w)?)
            }
        }
        StageKind::MirrorPromise => {
            let obs = observe(m, &o.handle(), &input)?;
            relevant = relevant.max(obs.longest);
            let width = n / 8;
            let excluded: BTreeSet<u64> = obs
                .queries
                .iter()
                .filter_map(|q| {
                    gap_candidate_value(q, 5 * n / 8, width)
                        .or_else(|| gap_candidate_value(q, 9 * n / 8, width))
                })
                .collect();
            let a = first_gap(&excluded, width);
            // Fix the swept positions per the gap string's bits, in
            // mirrored pairs so the promise χ(0^{n-j}) = χ(0^{n+j})
            // stays intact.
            for (j, &bit) in a.bits().iter().enumerate() {
                if bit {
                    added.push(BitString::zeros(n - 1 - j));
                    added.push(BitString::zeros(n + 1 + j));
                }
            }
            let primed = o.extend(&added, w)?;
            let obs2 = observe(m, &primed.handle(), &input)?;
            relevant = relevant.max(obs2.longest);
            let case = if obs2.verdict {
                CaseTag::DisagreementAccept
            } else {
                // Add both coding strings together, keeping the
                // two-sided promise.
                let lo = BitString::zeros(5 * n / 8).concat(&a);
                let hi = BitString::zeros(9 * n / 8).concat(&a);
                added.push(lo);
                added.push(hi);
                CaseTag::DisagreementReject
            };
            alpha = Some(a);
            let with_targets = o.extend(&added, w)?;
            (case, with_targets)
        }
        StageKind::SweepDown => {
            let obs = observe(m, &o.handle(), &input)?;
            relevant = relevant.max(obs.longest);
            let width = n / 4;
            // First query longer than n/2, if any; the gap scan only
            // looks at queries up to and including that point.
            let gamma_idx = obs.queries.iter().position(|q| q.len() > n / 2);
            let scan = match gamma_idx {
                Some(g) => &obs.queries[..=g],
                None => &obs.queries[..],
            };
            let excluded: BTreeSet<u64> = scan
                .iter()
                .filter_map(|q| gap_candidate_value(q, n / 4, width))
                .collect();
            let a = first_gap(&excluded, width);
            for (j, &bit) in a.bits().iter().enumerate() {
                if bit {
                    added.push(BitString::zeros(n - 1 - j));
                }
            }
            let primed = o.extend(&added, w)?;
            let obs2 = observe(m, &primed.handle(), &input)?;
            relevant = relevant.max(obs2.longest);
            let target = BitString::zeros(n / 4).concat(&a);
            alpha = Some(a);
            if gamma_idx.is_some() && obs2.queries.contains(&target) {
                // The machine assembled the short coding string only
                // after asking something longer: a length decrease.
                (CaseTag::ConstraintViolation, primed)
            } else if obs2.verdict {
                (CaseTag::DisagreementAccept, primed)
            } else {
                added.push(target);
                (CaseTag::DisagreementReject, o.extend(&added, w)?)
            }
        }
        StageKind::ShiftUpOdd => {
            let obs = observe(m, &o.handle(), &input)?;
            relevant = relevant.max(obs.longest);
            let probe = BitString::zeros(n + 1);
            if obs.queries.contains(&probe) {
                (CaseTag::ConstraintViolation, o.clone())
            } else if obs.verdict {
                (CaseTag::DisagreementAccept, o.clone())
            } else {
                added.push(probe);
                (CaseTag::DisagreementReject, o.extend(&added, w)?)
            }
        }
        StageKind::XorPairEven => {
            let obs = observe(m, &o.handle(), &input)?;
            relevant = relevant.max(obs.longest);
            let q0 = BitString::zeros(n - 1);
            let q1 = BitString::ones(n - 1);
            let has0 = obs.queries.contains(&q0);
            let has1 = obs.queries.contains(&q1);
            if has0 && has1 {
                (CaseTag::ConstraintViolation, o.clone())
            } else if obs.verdict {
                (CaseTag::DisagreementAccept, o.clone())
            } else {
                added.push(if has0 { q1 } else { q0 });
                (CaseTag::DisagreementReject, o.extend(&added, w)?)
            }
        }
    };

    for s in &added {
        relevant = relevant.max(s.len() as u64);
    }
    let frozen = oracle.extend(&[], relevant)?;
    let cert = StageCertificate {
        kind,
        stage,
        machine: String::from(m.name()),
        exponent: m.exponent(),
        n,
        case,
        added,
        alpha,
        watermark_after: relevant,
    };
    Ok((frozen, cert))
}

/// Re-checks a certificate against a (possibly later) frozen oracle:
/// disagreement cases are re-run and compared against the test
/// language; violation cases must reproduce the claimed illegal
/// query pattern.
pub fn verify_certificate(cert: &StageCertificate, m: &StageMachine, o: &StagedOracle) -> bool {
    if o.watermark() < cert.watermark_after || m.name() != cert.machine {
        return false;
    }
    let input = BitString::zeros(cert.n);
    let h = o.handle();
    let obs = match observe(m, &h, &input) {
        Ok(obs) => obs,
        Err(_) => return false,
    };
    match cert.case {
        CaseTag::DisagreementAccept => {
            obs.verdict && !test_language_decide(cert.kind.language(), &h, &input)
        }
        CaseTag::DisagreementReject => {
            !obs.verdict && test_language_decide(cert.kind.language(), &h, &input)
        }
        CaseTag::ConstraintViolation => {
            let n = cert.n;
            match cert.kind {
                StageKind::SameLengthPair => {
                    obs.queries.contains(&BitString::zeros(n))
                        && obs.queries.contains(&BitString::ones(n))
                }
                StageKind::SweepDown => {
                    let Some(a) = &cert.alpha else { return false };
                    let target = BitString::zeros(n / 4).concat(a);
                    // Short-after-long: the assembled n/2-length coding
                    // string shows up after a query longer than n/2.
                    match obs.queries.iter().position(|q| q.len() > n / 2) {
                        Some(g) => obs.queries[g + 1..].contains(&target),
                        None => false,
                    }
                }
                StageKind::ShiftUpOdd => obs.queries.contains(&BitString::zeros(n + 1)),
                StageKind::XorPairEven => {
                    obs.queries.contains(&BitString::zeros(n - 1))
                        && obs.queries.contains(&BitString::ones(n - 1))
                }
                // Truth-table stages have no violation case.
                StageKind::MirrorPromise => false,
            }
        }
    }
}

/// Runs one stage per machine, feeding each stage the previous stage's
/// frozen oracle.  The interleaved construction alternates the odd and
/// even stage kinds by 1-based stage index.
pub fn run_construction(
    kind: ConstructionKind,
    machines: &[StageMachine],
    cap: usize,
) -> Result<(StagedOracle, Vec<StageCertificate>), DiagError> {
    let mut oracle = StagedOracle::new();
    let mut certs = Vec::with_capacity(machines.len());
    for (i, m) in machines.iter().enumerate() {
        let stage = (i + 1) as u32;
        let (next, cert) = run_diag_stage(kind.stage_kind(stage), m, &oracle, stage, cap)?;
        oracle = next;
        certs.push(cert);
    }
    Ok((oracle, certs))
}

/// Checks the mirrored membership promise around every eighth-power
/// length up to the oracle's watermark: `χ(0^{n-j}) = χ(0^{n+j})` for
/// `1 ≤ j ≤ n/8`, and the two coding strings agree.
pub fn mirror_promises_hold(o: &StagedOracle) -> bool {
    let h = o.handle();
    let mut n = 8usize;
    while (n as u64) <= o.watermark() {
        for j in 1..=n / 8 {
            if h.decide(&BitString::zeros(n - j)) != h.decide(&BitString::zeros(n + j)) {
                return false;
            }
        }
        let word = chi_word(&h, 5 * n / 8, n - 1, -1, n / 8);
        let mirrored = chi_word(&h, 9 * n / 8, n + 1, 1, n / 8);
        if h.decide(&word) != h.decide(&mirrored) {
            return false;
        }
        match n.checked_mul(8) {
            Some(next) => n = next,
            None => break,
        }
    }
    true
}
