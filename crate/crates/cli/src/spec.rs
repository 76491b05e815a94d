// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! JSON schemas for oracles, machines, paddings, transcripts, and
//! stage certificates, plus their resolution into live objects.

use serde::{Deserialize, Serialize};

use qmt_core::backends::{clique_oracle, make_cylinder, sat3_oracle, seeded_oracle, OracleHandle};
use qmt_core::bitcodec::BitString;
use qmt_core::diag::{CaseTag, ConstructionKind, StageCertificate, StageMachine};
use qmt_core::machine::{catalog, Outcome, QueryTranscript};
use qmt_core::padding::{make_tight_equivalent, pad_3sat, pad_clique, Poly, TightPadding};
use qmt_core::transform::{
    one_query_transform, rank_coded_oracle, sparse_encode, to_equal_length, to_query_decreasing,
    to_query_increasing, WideSpacedLengths,
};

/// A user-facing failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

pub fn malformed(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        code: EXIT_MALFORMED,
    }
}

pub fn resource(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        code: EXIT_RESOURCE,
    }
}

pub fn parse_bits(s: &str) -> Result<BitString, CliError> {
    BitString::parse(s).map_err(|_| malformed(format!("not a bit string: {s:?}")))
}

/// Kind-tagged oracle generator spec.  A bare `{"members": [...]}`
/// object is accepted as shorthand for the finite kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleSpec {
    Finite {
        members: Vec<String>,
    },
    #[serde(rename = "3sat")]
    Sat3,
    Clique,
    Seeded {
        seed: u64,
        #[serde(default = "default_max_len", rename = "maxLen")]
        max_len: usize,
    },
    TightEquiv {
        inner: Box<OracleSpec>,
        nonmember: String,
    },
    RankCoded {
        inner: Box<OracleSpec>,
    },
    Sparse {
        inner: Box<OracleSpec>,
        p: Vec<u64>,
        lengths: Vec<u64>,
    },
    Cylinder {
        inner: Box<OracleSpec>,
        nonmember: String,
    },
}

fn default_max_len() -> usize {
    16
}

impl OracleSpec {
    pub fn from_value(mut v: serde_json::Value) -> Result<OracleSpec, CliError> {
        if let Some(obj) = v.as_object_mut() {
            if !obj.contains_key("kind") && obj.contains_key("members") {
                obj.insert("kind".into(), "finite".into());
            }
        }
        serde_json::from_value(v).map_err(|e| malformed(format!("bad oracle spec: {e}")))
    }

    pub fn resolve(&self) -> Result<OracleHandle, CliError> {
        match self {
            OracleSpec::Finite { members } => {
                let set = members
                    .iter()
                    .map(|m| parse_bits(m))
                    .collect::<Result<_, _>>()?;
                Ok(OracleHandle::finite(set))
            }
            OracleSpec::Sat3 => Ok(sat3_oracle()),
            OracleSpec::Clique => Ok(clique_oracle()),
            OracleSpec::Seeded { seed, max_len } => Ok(seeded_oracle(*seed, *max_len)),
            OracleSpec::TightEquiv { inner, nonmember } => {
                let a = inner.resolve()?;
                let nm = parse_bits(nonmember)?;
                if a.decide(&nm) {
                    return Err(malformed("nonmember lies inside the base language"));
                }
                Ok(make_tight_equivalent(&a, &nm).b)
            }
            OracleSpec::RankCoded { inner } => {
                Ok(rank_coded_oracle("rank-coded", &inner.resolve()?))
            }
            OracleSpec::Sparse { inner, p, lengths } => {
                let b = inner.resolve()?;
                let lengths = WideSpacedLengths::new("configured", lengths.clone())
                    .map_err(|e| malformed(format!("{e}")))?;
                Ok(sparse_encode(&b, &Poly::new(p.clone()), &lengths).handle)
            }
            OracleSpec::Cylinder { inner, nonmember } => {
                let a = inner.resolve()?;
                let nm = parse_bits(nonmember)?;
                if a.decide(&nm) {
                    return Err(malformed("nonmember lies inside the base language"));
                }
                Ok(make_cylinder(&a, &nm).0)
            }
        }
    }
}

/// Padding selector: a named built-in or the rank-shift padding of a
/// tight-equivalent copy built from an oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PaddingSpec {
    Named(String),
    SigmaB {
        oracle: OracleSpec,
        nonmember: String,
    },
}

impl PaddingSpec {
    pub fn resolve(&self) -> Result<TightPadding, CliError> {
        match self {
            PaddingSpec::Named(name) => match name.as_str() {
                "3sat" => Ok(pad_3sat()),
                "clique" => Ok(pad_clique()),
                other => Err(malformed(format!("unknown padding: {other:?}"))),
            },
            PaddingSpec::SigmaB { oracle, nonmember } => {
                let a = oracle.resolve()?;
                let nm = parse_bits(nonmember)?;
                if a.decide(&nm) {
                    return Err(malformed("nonmember lies inside the base language"));
                }
                Ok(make_tight_equivalent(&a, &nm).sigma_b)
            }
        }
    }
}

/// Kind-tagged machine spec: a catalog name or a transformer applied
/// to another machine spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MachineSpec {
    Catalog {
        name: String,
    },
    Increasing {
        machine: Box<MachineSpec>,
        padding: PaddingSpec,
        p: Vec<u64>,
    },
    Decreasing {
        machine: Box<MachineSpec>,
        padding: PaddingSpec,
        p: Vec<u64>,
    },
    EqualLength {
        machine: Box<MachineSpec>,
        oracle: OracleSpec,
        q: Vec<u64>,
        nonmember: String,
    },
    OneQuery {
        machine: Box<MachineSpec>,
        oracle: OracleSpec,
        p: Vec<u64>,
        lengths: Vec<u64>,
        q: Vec<u64>,
        #[serde(rename = "bruteCap")]
        brute_cap: u64,
    },
}

impl MachineSpec {
    pub fn from_value(v: serde_json::Value) -> Result<MachineSpec, CliError> {
        serde_json::from_value(v).map_err(|e| malformed(format!("bad machine spec: {e}")))
    }

    fn resolve_adaptive(&self) -> Result<qmt_core::machine::OracleMachine, CliError> {
        match self.resolve()? {
            StageMachine::Adaptive(m) => Ok(m),
            StageMachine::TruthTable(m) => Err(malformed(format!(
                "machine {} is a truth-table machine; this transformer needs an adaptive one",
                m.name
            ))),
        }
    }

    pub fn resolve(&self) -> Result<StageMachine, CliError> {
        match self {
            MachineSpec::Catalog { name } => lookup_machine(name),
            MachineSpec::Increasing { machine, padding, p } => Ok(StageMachine::Adaptive(
                to_query_increasing(&machine.resolve_adaptive()?, &padding.resolve()?, &Poly::new(p.clone())),
            )),
            MachineSpec::Decreasing { machine, padding, p } => Ok(StageMachine::Adaptive(
                to_query_decreasing(&machine.resolve_adaptive()?, &padding.resolve()?, &Poly::new(p.clone())),
            )),
            MachineSpec::EqualLength {
                machine,
                oracle,
                q,
                nonmember,
            } => {
                let b = oracle.resolve()?;
                let nm = parse_bits(nonmember)?;
                if b.decide(&nm) {
                    return Err(malformed("nonmember lies inside the oracle language"));
                }
                let red = to_equal_length(&machine.resolve_adaptive()?, &b, &Poly::new(q.clone()), &nm);
                Ok(StageMachine::Adaptive(red.machine))
            }
            MachineSpec::OneQuery {
                machine,
                oracle,
                p,
                lengths,
                q,
                brute_cap,
            } => {
                let b = oracle.resolve()?;
                let lengths = WideSpacedLengths::new("configured", lengths.clone())
                    .map_err(|e| malformed(format!("{e}")))?;
                let sparse = sparse_encode(&b, &Poly::new(p.clone()), &lengths);
                Ok(StageMachine::Adaptive(one_query_transform(
                    &machine.resolve_adaptive()?,
                    &sparse,
                    &Poly::new(q.clone()),
                    *brute_cap,
                )))
            }
        }
    }

    /// The oracle the resolved machine expects to be run against, when
    /// the transform changes it (equal-length and one-query do).
    pub fn derived_oracle(&self) -> Option<OracleSpec> {
        match self {
            MachineSpec::EqualLength { oracle, .. } => Some(OracleSpec::RankCoded {
                inner: Box::new(oracle.clone()),
            }),
            MachineSpec::OneQuery {
                oracle, p, lengths, ..
            } => Some(OracleSpec::Sparse {
                inner: Box::new(oracle.clone()),
                p: p.clone(),
                lengths: lengths.clone(),
            }),
            _ => None,
        }
    }
}

pub fn lookup_machine(name: &str) -> Result<StageMachine, CliError> {
    if let Some(m) = catalog::by_name(name) {
        return Ok(StageMachine::Adaptive(m));
    }
    if let Some(m) = catalog::tt_by_name(name) {
        return Ok(StageMachine::TruthTable(m));
    }
    Err(malformed(format!("unknown machine: {name:?}")))
}

/// Transcript wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TranscriptJson {
    pub input: String,
    pub events: Vec<EventJson>,
    pub outcome: String,
    pub steps: u64,
    #[serde(rename = "violationIndex", skip_serializing_if = "Option::is_none")]
    pub violation_index: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EventJson {
    pub q: String,
    pub a: bool,
}

pub fn outcome_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Accept => "accept",
        Outcome::Reject => "reject",
        Outcome::ConstraintViolation => "violation",
        Outcome::BudgetExceeded => "budget",
    }
}

pub fn outcome_exit(o: &Outcome) -> i32 {
    match o {
        Outcome::Accept => EXIT_OK,
        Outcome::Reject => EXIT_REJECT,
        Outcome::ConstraintViolation => EXIT_VIOLATION,
        Outcome::BudgetExceeded => EXIT_RESOURCE,
    }
}

pub fn transcript_to_json(t: &QueryTranscript) -> TranscriptJson {
    TranscriptJson {
        input: t.input.to_string(),
        events: t
            .events
            .iter()
            .map(|(q, a)| EventJson {
                q: q.to_string(),
                a: *a,
            })
            .collect(),
        outcome: outcome_name(&t.outcome).to_string(),
        steps: t.steps,
        violation_index: t.violation_index,
    }
}

pub fn transcript_from_json(t: &TranscriptJson) -> Result<(BitString, Vec<BitString>), CliError> {
    let input = parse_bits(&t.input)?;
    let queries = t
        .events
        .iter()
        .map(|e| parse_bits(&e.q))
        .collect::<Result<_, _>>()?;
    Ok((input, queries))
}

/// Construction names as the CLI spells them.
pub fn construction_by_name(name: &str) -> Option<ConstructionKind> {
    match name {
        "thm4.4" => Some(ConstructionKind::SameLengthPair),
        "thm4.7" => Some(ConstructionKind::MirrorPromise),
        "thm4.9" => Some(ConstructionKind::SweepDown),
        "thm4.13" => Some(ConstructionKind::Interleaved),
        _ => None,
    }
}

pub fn construction_name(kind: ConstructionKind) -> &'static str {
    match kind {
        ConstructionKind::SameLengthPair => "thm4.4",
        ConstructionKind::MirrorPromise => "thm4.7",
        ConstructionKind::SweepDown => "thm4.9",
        ConstructionKind::Interleaved => "thm4.13",
    }
}

/// Stage certificate wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub construction: String,
    pub stage: u32,
    pub machine: String,
    pub exponent: u32,
    pub n: usize,
    pub case: String,
    pub added: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(rename = "watermarkAfter")]
    pub watermark_after: u64,
}

pub fn certificate_to_json(kind: ConstructionKind, c: &StageCertificate) -> CertificateJson {
    CertificateJson {
        construction: construction_name(kind).to_string(),
        stage: c.stage,
        machine: c.machine.clone(),
        exponent: c.exponent,
        n: c.n,
        case: c.case.name().to_string(),
        added: c.added.iter().map(|s| s.to_string()).collect(),
        alpha: c.alpha.as_ref().map(|s| s.to_string()),
        watermark_after: c.watermark_after,
    }
}

pub fn certificate_from_json(j: &CertificateJson) -> Result<(ConstructionKind, StageCertificate), CliError> {
    let kind = construction_by_name(&j.construction)
        .ok_or_else(|| malformed(format!("unknown construction: {:?}", j.construction)))?;
    let case = CaseTag::by_name(&j.case)
        .ok_or_else(|| malformed(format!("unknown case tag: {:?}", j.case)))?;
    let added = j
        .added
        .iter()
        .map(|s| parse_bits(s))
        .collect::<Result<_, _>>()?;
    let alpha = j.alpha.as_ref().map(|s| parse_bits(s)).transpose()?;
    Ok((
        kind,
        StageCertificate {
            kind: kind.stage_kind(j.stage),
            stage: j.stage,
            machine: j.machine.clone(),
            exponent: j.exponent,
            n: j.n,
            case,
            added,
            alpha,
            watermark_after: j.watermark_after,
        },
    ))
}

/// Staged-oracle wire format for `diag`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StagedOracleJson {
    pub members: Vec<String>,
    pub watermark: u64,
}

/// Formula wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormulaJson {
    pub clauses: Vec<[LiteralJson; 3]>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LiteralJson {
    pub v: u64,
    #[serde(default)]
    pub neg: bool,
}

/// Graph wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: u64,
    pub edges: Vec<[u64; 2]>,
}
