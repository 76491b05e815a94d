// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! `qmt`: command-line front end for the query-monotonic reduction
//! toolkit.  Every command prints JSON on standard output; exit codes
//! are 0 success/accept, 1 reject, 2 malformed input, 3 constraint
//! violation, 4 resource cap exceeded.

mod spec;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmt_core::backends::{BackendError, OracleHandle, StagedOracle};
use qmt_core::bitcodec::BitString;
use qmt_core::diag::{run_construction, verify_certificate, DiagError, StageMachine};
use qmt_core::encodings::{
    decode_formula, decode_graph, encode_formula, encode_graph, Graph, Literal, ThreeCnf,
};
use qmt_core::machine::{run, ConstraintKind};
use qmt_core::robust::{find_escape_route, RobustError};

use spec::{
    certificate_from_json, certificate_to_json, construction_by_name, malformed, outcome_exit,
    parse_bits, resource, transcript_from_json, transcript_to_json, CertificateJson, CliError,
    FormulaJson, GraphJson, LiteralJson, MachineSpec, OracleSpec, PaddingSpec, StagedOracleJson,
    TranscriptJson, EXIT_OK, EXIT_REJECT,
};

#[derive(Parser)]
#[command(
    name = "qmt",
    version,
    about = "Simulate step-bounded oracle machines under query-monotonicity disciplines"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translate formula/graph JSON into its bit-string code
    Encode(EncodeArgs),
    /// Translate a bit-string code back into formula/graph JSON
    Decode(DecodeArgs),
    /// Apply a tight padding, or emit a derived-oracle generator spec
    Pad(PadArgs),
    /// Run a machine against an oracle, optionally policing a discipline
    Run(RunArgs),
    /// Check a transcript against a discipline, or search escape routes
    Check(CheckArgs),
    /// Rewrite a machine into a query-disciplined form
    Transform(TransformArgs),
    /// Run or verify diagonalization stages
    Diag(DiagArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CodecKind {
    Formula,
    Graph,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(value_enum)]
    what: CodecKind,
    /// JSON file to read (defaults to standard input)
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(value_enum)]
    what: CodecKind,
    /// The bit-string code
    #[arg(long)]
    input: String,
}

#[derive(Args)]
struct PadArgs {
    /// 3sat | clique | tight-equiv
    which: String,
    /// Input bit string (3sat/clique)
    #[arg(long)]
    input: Option<String>,
    /// Base oracle spec file (tight-equiv)
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// A string outside the base language (tight-equiv)
    #[arg(long)]
    nonmember: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    /// Catalog machine name
    #[arg(long, conflicts_with = "machine_file")]
    machine: Option<String>,
    /// Machine spec JSON file (as emitted by `transform`)
    #[arg(long)]
    machine_file: Option<PathBuf>,
    /// Oracle spec JSON file
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Pseudorandom oracle seed (alternative to --oracle)
    #[arg(long, conflicts_with = "oracle")]
    seed: Option<u64>,
    /// Length cutoff for the seeded oracle
    #[arg(long, default_value_t = 16)]
    max_len: usize,
    /// Input bit string
    #[arg(long)]
    input: String,
    /// Discipline to police (li, ld, lni, lnd, s-li, s-ld, s-lni, s-lnd)
    #[arg(long)]
    constraint: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// constraint | escape
    which: String,
    /// Discipline name
    #[arg(long)]
    kind: String,
    /// Transcript JSON file (constraint)
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Input bit string (escape)
    #[arg(long)]
    input: Option<String>,
    /// Comma-separated already-asked queries (escape)
    #[arg(long, default_value = "")]
    prefix: String,
    /// Escape-route length/count bound r (escape)
    #[arg(long, default_value_t = 4)]
    bound: u64,
    /// Search cap on candidate extensions (escape)
    #[arg(long, default_value_t = 1 << 20)]
    cap: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Increasing,
    Decreasing,
    EqualLength,
    OneQuery,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(value_enum)]
    which: TransformKind,
    /// Base catalog machine name
    #[arg(long)]
    machine: String,
    /// Padding for increasing/decreasing: 3sat | clique | sigma-b
    #[arg(long)]
    padding: Option<String>,
    /// Oracle spec file (sigma-b padding base, equal-length b, one-query b)
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// A string outside the relevant language
    #[arg(long)]
    nonmember: Option<String>,
    /// Comma-separated coefficients (constant first) of the window
    /// polynomial p
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated coefficients of the length-bound polynomial q
    #[arg(long)]
    q: Option<String>,
    /// Comma-separated support sequence (one-query)
    #[arg(long)]
    lengths: Option<String>,
    /// Local brute-force length cap (one-query)
    #[arg(long, default_value_t = 64)]
    brute_cap: u64,
}

#[derive(Args)]
struct DiagArgs {
    /// run | verify
    which: String,
    /// thm4.4 | thm4.7 | thm4.9 | thm4.13 (run)
    #[arg(long)]
    construction: Option<String>,
    /// Comma-separated catalog machine names (run)
    #[arg(long)]
    machines: Option<String>,
    /// Diagonal length cap per stage (run)
    #[arg(long, default_value_t = 1 << 16)]
    cap: usize,
    /// Certificates JSON file (verify)
    #[arg(long)]
    certs: Option<PathBuf>,
    /// Frozen staged-oracle JSON file (verify)
    #[arg(long)]
    oracle: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Encode(a) => cmd_encode(a),
        Cmd::Decode(a) => cmd_decode(a),
        Cmd::Pad(a) => cmd_pad(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Transform(a) => cmd_transform(a),
        Cmd::Diag(a) => cmd_diag(a),
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn read_json(path: &PathBuf) -> Result<serde_json::Value, CliError> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn read_stdin() -> Result<String, CliError> {
    use std::io::Read;
    let mut buf = String::new();
    std::io::stdin()
        .read_to_string(&mut buf)
        .map_err(|e| malformed(format!("stdin: {e}")))?;
    Ok(buf)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_encode(a: EncodeArgs) -> Result<i32, CliError> {
    let text = match &a.file {
        Some(p) => read_file(p)?,
        None => read_stdin()?,
    };
    let bits = match a.what {
        CodecKind::Formula => {
            let f: FormulaJson =
                serde_json::from_str(&text).map_err(|e| malformed(format!("bad formula: {e}")))?;
            let clauses = f
                .clauses
                .iter()
                .map(|c| {
                    c.map(|l| {
                        if l.neg {
                            Literal::neg(l.v)
                        } else {
                            Literal::pos(l.v)
                        }
                    })
                })
                .collect();
            let f = ThreeCnf::new(clauses).map_err(|e| malformed(format!("{e}")))?;
            encode_formula(&f)
        }
        CodecKind::Graph => {
            let g: GraphJson =
                serde_json::from_str(&text).map_err(|e| malformed(format!("bad graph: {e}")))?;
            let g = Graph::new(g.n, g.edges.iter().map(|e| (e[0], e[1])).collect())
                .map_err(|e| malformed(format!("{e}")))?;
            encode_graph(&g)
        }
    };
    print_json(&bits.to_string());
    Ok(EXIT_OK)
}

fn cmd_decode(a: DecodeArgs) -> Result<i32, CliError> {
    let bits = parse_bits(&a.input)?;
    match a.what {
        CodecKind::Formula => {
            let f = decode_formula(&bits).map_err(|e| malformed(format!("{e:?}")))?;
            let j = FormulaJson {
                clauses: f
                    .clauses()
                    .iter()
                    .map(|c| {
                        c.map(|l| LiteralJson {
                            v: l.var,
                            neg: l.negated,
                        })
                    })
                    .collect(),
            };
            print_json(&j);
        }
        CodecKind::Graph => {
            let g = decode_graph(&bits).map_err(|e| malformed(format!("{e:?}")))?;
            let j = GraphJson {
                n: g.n(),
                edges: g.edges().iter().map(|&(k, l)| [k, l]).collect(),
            };
            print_json(&j);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_pad(a: PadArgs) -> Result<i32, CliError> {
    match a.which.as_str() {
        "3sat" | "clique" => {
            let input = a
                .input
                .as_deref()
                .ok_or_else(|| malformed("--input is required"))?;
            let x = parse_bits(input)?;
            let sigma = PaddingSpec::Named(a.which.clone()).resolve()?;
            print_json(&sigma.apply(&x).to_string());
            Ok(EXIT_OK)
        }
        "tight-equiv" => {
            let path = a
                .oracle
                .as_ref()
                .ok_or_else(|| malformed("--oracle is required"))?;
            let nonmember = a
                .nonmember
                .as_deref()
                .ok_or_else(|| malformed("--nonmember is required"))?;
            let inner = OracleSpec::from_value(read_json(path)?)?;
            let spec = OracleSpec::TightEquiv {
                inner: Box::new(inner),
                nonmember: nonmember.to_string(),
            };
            spec.resolve()?; // validate before emitting
            print_json(&spec);
            Ok(EXIT_OK)
        }
        other => Err(malformed(format!("unknown padding: {other:?}"))),
    }
}

fn load_oracle(
    oracle: &Option<PathBuf>,
    seed: Option<u64>,
    max_len: usize,
) -> Result<OracleHandle, CliError> {
    if let Some(seed) = seed {
        return Ok(qmt_core::backends::seeded_oracle(seed, max_len));
    }
    let path = oracle
        .as_ref()
        .ok_or_else(|| malformed("an oracle is required: pass --oracle or --seed"))?;
    let value = read_json(path)?;
    // A staged-oracle file (members + watermark) also works as a
    // plain membership oracle.
    OracleSpec::from_value(value)?.resolve()
}

fn cmd_run(a: RunArgs) -> Result<i32, CliError> {
    let (machine, derived): (StageMachine, Option<OracleSpec>) = match (&a.machine, &a.machine_file)
    {
        (Some(name), None) => (spec::lookup_machine(name)?, None),
        (None, Some(path)) => {
            let mut value = read_json(path)?;
            // Accept both a bare machine spec and the {machine, oracle}
            // bundle that `transform` emits.
            let mut derived = None;
            if let Some(obj) = value.as_object_mut() {
                if let Some(mv) = obj.remove("machine") {
                    if let Some(ov) = obj.remove("oracle") {
                        if !ov.is_null() {
                            derived = Some(OracleSpec::from_value(ov)?);
                        }
                    }
                    value = mv;
                }
            }
            (MachineSpec::from_value(value)?.resolve()?, derived)
        }
        _ => return Err(malformed("pass exactly one of --machine or --machine-file")),
    };
    let oracle = match (&a.oracle, a.seed) {
        (None, None) => match derived {
            Some(spec) => spec.resolve()?,
            None => return Err(malformed("an oracle is required: pass --oracle or --seed")),
        },
        _ => load_oracle(&a.oracle, a.seed, a.max_len)?,
    };
    let input = parse_bits(&a.input)?;
    let constraint = a
        .constraint
        .as_deref()
        .map(|name| {
            ConstraintKind::by_name(name).ok_or_else(|| malformed(format!("unknown discipline: {name:?}")))
        })
        .transpose()?;

    match machine {
        StageMachine::Adaptive(m) => {
            let t = run(&m, &oracle, &input, constraint.as_ref());
            print_json(&transcript_to_json(&t));
            Ok(outcome_exit(&t.outcome))
        }
        StageMachine::TruthTable(m) => {
            // Truth-table runs synthesize the same transcript shape.
            match m.run_tt(&oracle, &input) {
                Ok(r) => {
                    let events: Vec<spec::EventJson> = r
                        .queries
                        .iter()
                        .zip(&r.answers)
                        .map(|(q, &ans)| spec::EventJson {
                            q: q.to_string(),
                            a: ans,
                        })
                        .collect();
                    let steps = events.len() as u64;
                    let outcome = if r.verdict { "accept" } else { "reject" };
                    print_json(&TranscriptJson {
                        input: input.to_string(),
                        events,
                        outcome: outcome.to_string(),
                        steps,
                        violation_index: None,
                    });
                    Ok(if r.verdict { EXIT_OK } else { EXIT_REJECT })
                }
                Err(e) => Err(resource(format!("{e}"))),
            }
        }
    }
}

fn cmd_check(a: CheckArgs) -> Result<i32, CliError> {
    let kind = ConstraintKind::by_name(&a.kind)
        .ok_or_else(|| malformed(format!("unknown discipline: {:?}", a.kind)))?;
    match a.which.as_str() {
        "constraint" => {
            let path = a
                .transcript
                .as_ref()
                .ok_or_else(|| malformed("--transcript is required"))?;
            let t: TranscriptJson = serde_json::from_value(read_json(path)?)
                .map_err(|e| malformed(format!("bad transcript: {e}")))?;
            let (input, queries) = transcript_from_json(&t)?;
            let allowed = kind.allows(&input, &queries);
            print_json(&serde_json::json!({ "allowed": allowed }));
            Ok(EXIT_OK)
        }
        "escape" => {
            let input = parse_bits(a.input.as_deref().unwrap_or(""))?;
            let prefix: Vec<BitString> = a
                .prefix
                .split(',')
                .filter(|s| !s.is_empty())
                .map(parse_bits)
                .collect::<Result<_, _>>()?;
            match find_escape_route(&kind, &input, &prefix, a.bound, a.cap) {
                Ok(route) => {
                    let json = serde_json::json!({
                        "route": route.as_ref().map(|r| {
                            r.extension.iter().map(|q| q.to_string()).collect::<Vec<_>>()
                        }),
                        "bound": a.bound,
                    });
                    print_json(&json);
                    Ok(if route.is_some() { EXIT_OK } else { EXIT_REJECT })
                }
                Err(RobustError::SearchCapExceeded { cap }) => {
                    Err(resource(format!("escape-route search cap {cap} exceeded")))
                }
                Err(e) => Err(malformed(format!("{e}"))),
            }
        }
        other => Err(malformed(format!("unknown check: {other:?}"))),
    }
}

fn parse_coeffs(s: &Option<String>, flag: &str) -> Result<Vec<u64>, CliError> {
    let s = s
        .as_deref()
        .ok_or_else(|| malformed(format!("--{flag} is required")))?;
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<u64>()
                .map_err(|_| malformed(format!("bad --{flag} entry: {c:?}")))
        })
        .collect()
}

fn cmd_transform(a: TransformArgs) -> Result<i32, CliError> {
    let base = Box::new(MachineSpec::Catalog {
        name: a.machine.clone(),
    });
    let padding_spec = |a: &TransformArgs| -> Result<PaddingSpec, CliError> {
        match a.padding.as_deref() {
            Some("sigma-b") => {
                let path = a
                    .oracle
                    .as_ref()
                    .ok_or_else(|| malformed("--oracle is required for sigma-b"))?;
                Ok(PaddingSpec::SigmaB {
                    oracle: OracleSpec::from_value(read_json(path)?)?,
                    nonmember: a
                        .nonmember
                        .clone()
                        .ok_or_else(|| malformed("--nonmember is required for sigma-b"))?,
                })
            }
            Some(name) => Ok(PaddingSpec::Named(name.to_string())),
            None => Err(malformed("--padding is required")),
        }
    };
    let oracle_spec = |a: &TransformArgs| -> Result<OracleSpec, CliError> {
        let path = a
            .oracle
            .as_ref()
            .ok_or_else(|| malformed("--oracle is required"))?;
        OracleSpec::from_value(read_json(path)?)
    };
    let machine = match a.which {
        TransformKind::Increasing => MachineSpec::Increasing {
            machine: base,
            padding: padding_spec(&a)?,
            p: parse_coeffs(&a.p, "p")?,
        },
        TransformKind::Decreasing => MachineSpec::Decreasing {
            machine: base,
            padding: padding_spec(&a)?,
            p: parse_coeffs(&a.p, "p")?,
        },
        TransformKind::EqualLength => MachineSpec::EqualLength {
            machine: base,
            oracle: oracle_spec(&a)?,
            q: parse_coeffs(&a.q, "q")?,
            nonmember: a
                .nonmember
                .clone()
                .ok_or_else(|| malformed("--nonmember is required"))?,
        },
        TransformKind::OneQuery => MachineSpec::OneQuery {
            machine: base,
            oracle: oracle_spec(&a)?,
            p: parse_coeffs(&a.p, "p")?,
            lengths: parse_coeffs(&a.lengths, "lengths")?,
            q: parse_coeffs(&a.q, "q")?,
            brute_cap: a.brute_cap,
        },
    };
    machine.resolve()?; // validate before emitting
    let bundle = serde_json::json!({
        "machine": machine,
        "oracle": machine.derived_oracle(),
    });
    print_json(&bundle);
    Ok(EXIT_OK)
}

fn diag_error(e: DiagError) -> CliError {
    match e {
        DiagError::NoFeasibleN { .. } | DiagError::BudgetExceeded { .. } => {
            resource(format!("{e}"))
        }
        DiagError::WrongMachineShape { .. } => malformed(format!("{e}")),
        DiagError::Staging(BackendError::ResourceCap { .. }) => resource(format!("{e}")),
        DiagError::Staging(_) => malformed(format!("{e}")),
    }
}

fn cmd_diag(a: DiagArgs) -> Result<i32, CliError> {
    match a.which.as_str() {
        "run" => {
            let name = a
                .construction
                .as_deref()
                .ok_or_else(|| malformed("--construction is required"))?;
            let kind = construction_by_name(name)
                .ok_or_else(|| malformed(format!("unknown construction: {name:?}")))?;
            let machines: Vec<StageMachine> = a
                .machines
                .as_deref()
                .ok_or_else(|| malformed("--machines is required"))?
                .split(',')
                .filter(|s| !s.is_empty())
                .map(spec::lookup_machine)
                .collect::<Result<_, _>>()?;
            let (oracle, certs) = run_construction(kind, &machines, a.cap).map_err(diag_error)?;
            let json = serde_json::json!({
                "construction": name,
                "certificates": certs
                    .iter()
                    .map(|c| certificate_to_json(kind, c))
                    .collect::<Vec<_>>(),
                "oracle": StagedOracleJson {
                    members: oracle.members().iter().map(|m| m.to_string()).collect(),
                    watermark: oracle.watermark(),
                },
            });
            print_json(&json);
            Ok(EXIT_OK)
        }
        "verify" => {
            let certs_path = a
                .certs
                .as_ref()
                .ok_or_else(|| malformed("--certs is required"))?;
            let oracle_path = a
                .oracle
                .as_ref()
                .ok_or_else(|| malformed("--oracle is required"))?;
            let mut certs_value = read_json(certs_path)?;
            if let Some(obj) = certs_value.as_object_mut() {
                if let Some(inner) = obj.remove("certificates") {
                    certs_value = inner;
                }
            }
            let certs: Vec<CertificateJson> = serde_json::from_value(certs_value)
                .map_err(|e| malformed(format!("bad certificates: {e}")))?;
            let oj: StagedOracleJson = serde_json::from_value(read_json(oracle_path)?)
                .map_err(|e| malformed(format!("bad oracle: {e}")))?;
            let members = oj
                .members
                .iter()
                .map(|m| parse_bits(m))
                .collect::<Result<_, _>>()?;
            let oracle = StagedOracle::with_members(members, oj.watermark)
                .map_err(|e| malformed(format!("{e}")))?;
            let mut all_ok = true;
            let mut results = Vec::new();
            for cj in &certs {
                let (_, cert) = certificate_from_json(cj)?;
                let machine = spec::lookup_machine(&cert.machine)?;
                let ok = verify_certificate(&cert, &machine, &oracle);
                all_ok &= ok;
                results.push(serde_json::json!({
                    "stage": cert.stage,
                    "machine": cert.machine,
                    "ok": ok,
                }));
            }
            print_json(&serde_json::json!({ "results": results }));
            Ok(if all_ok { EXIT_OK } else { EXIT_REJECT })
        }
        other => Err(malformed(format!("unknown diag command: {other:?}"))),
    }
}
