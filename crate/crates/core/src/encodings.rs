// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Canonical bit-string encodings of 3-CNF formulas and graphs.
//!
//! A literal over variable v (1-based) is encoded as a sign bit (1 for
//! positive, 0 for negated) followed by the rank-v string in shortlex
//! order.  A formula is the tuple code of its 3m literal strings in
//! clause order.  A graph on n vertices is the tuple code of the
//! rank-n string followed by one pair code per edge, with edges given
//! as (k, l), k < l, in strictly increasing canonical order.

use alloc::vec::Vec;

use crate::bitcodec::{self, BitString, CodecError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    /// 1-based variable index.
    pub var: u64,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: u64) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: u64) -> Self {
        Literal { var, negated: true }
    }
}

/// A 3-CNF formula: a sequence of clauses of exactly three literals.
/// The empty formula is allowed (and vacuously satisfiable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeCnf {
    clauses: Vec<[Literal; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingError {
    /// Variable indices must be >= 1.
    BadVariable,
    /// Vertex labels must lie in 1..=n and edges must satisfy k < l.
    BadEdge,
    /// Graphs must have at least one vertex.
    EmptyGraph,
}

impl core::fmt::Display for EncodingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EncodingError::BadVariable => write!(f, "variable indices are 1-based"),
            EncodingError::BadEdge => write!(f, "edge endpoints must satisfy 1 <= k < l <= n"),
            EncodingError::EmptyGraph => write!(f, "graphs need at least one vertex"),
        }
    }
}

impl ThreeCnf {
    pub fn new(clauses: Vec<[Literal; 3]>) -> Result<Self, EncodingError> {
        if clauses.iter().flatten().any(|l| l.var == 0) {
            return Err(EncodingError::BadVariable);
        }
        Ok(ThreeCnf { clauses })
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// Distinct variables, ascending.
    pub fn variables(&self) -> Vec<u64> {
        let mut vars: Vec<u64> = self.clauses.iter().flatten().map(|l| l.var).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn is_satisfied_by(&self, assignment: &dyn Fn(u64) -> bool) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| assignment(l.var) != l.negated))
    }
}

fn encode_literal(l: &Literal) -> BitString {
    let mut s = BitString::new();
    s.push(!l.negated);
    s.concat(&BitString::lex_unrank(l.var as u128))
}

fn decode_literal(s: &BitString) -> Result<Literal, CodecError> {
    if s.is_empty() {
        return Err(CodecError::NotAnEncoding);
    }
    let negated = !s.bit_at(1).unwrap();
    let rest = BitString::from_bits(s.bits()[1..].to_vec());
    let var = rest.lex_rank();
    if var > u64::MAX as u128 {
        return Err(CodecError::TooLong);
    }
    Ok(Literal {
        var: var as u64,
        negated,
    })
}

/// Tuple code of the formula's 3m literal strings.
pub fn encode_formula(f: &ThreeCnf) -> BitString {
    let parts: Vec<BitString> = f
        .clauses
        .iter()
        .flatten()
        .map(encode_literal)
        .collect();
    bitcodec::multi_pair(&parts)
}

/// Strict decoder: the component count must be a multiple of three and
/// every component must be a literal encoding.
pub fn decode_formula(s: &BitString) -> Result<ThreeCnf, CodecError> {
    let parts = bitcodec::multi_unpair(s)?;
    if parts.len() % 3 != 0 {
        return Err(CodecError::NotAnEncoding);
    }
    let lits: Vec<Literal> = parts
        .iter()
        .map(decode_literal)
        .collect::<Result<_, _>>()?;
    let clauses = lits.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok(ThreeCnf { clauses })
}

/// An undirected graph on vertices 1..=n with edge set stored in
/// canonical (k, l), k < l, sorted order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: u64,
    edges: Vec<(u64, u64)>,
}

impl Graph {
    pub fn new(n: u64, mut edges: Vec<(u64, u64)>) -> Result<Self, EncodingError> {
        if n == 0 {
            return Err(EncodingError::EmptyGraph);
        }
        edges.sort_unstable();
        edges.dedup();
        for &(k, l) in &edges {
            if k == 0 || k >= l || l > n {
                return Err(EncodingError::BadEdge);
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn edges(&self) -> &[(u64, u64)] {
        &self.edges
    }

    pub fn has_edge(&self, k: u64, l: u64) -> bool {
        let (a, b) = if k < l { (k, l) } else { (l, k) };
        self.edges.binary_search(&(a, b)).is_ok()
    }

    /// Same edges, vertex count raised to 2n+1 (the extra vertices are
    /// isolated).
    pub fn with_isolated_padding(&self) -> Graph {
        Graph {
            n: 2 * self.n + 1,
            edges: self.edges.clone(),
        }
    }
}

/// Tuple code of the rank-n string followed by one pair code per edge.
pub fn encode_graph(g: &Graph) -> BitString {
    let mut parts: Vec<BitString> = Vec::with_capacity(1 + g.edges.len());
    parts.push(BitString::lex_unrank(g.n as u128));
    for &(k, l) in &g.edges {
        parts.push(bitcodec::pair(
            &BitString::lex_unrank(k as u128),
            &BitString::lex_unrank(l as u128),
        ));
    }
    bitcodec::multi_pair(&parts)
}

/// Strict decoder: rejects out-of-range labels, k >= l, duplicates,
/// and edges out of canonical order.
pub fn decode_graph(s: &BitString) -> Result<Graph, CodecError> {
    let parts = bitcodec::multi_unpair(s)?;
    let (head, rest) = parts.split_first().ok_or(CodecError::NotAnEncoding)?;
    let n = head.lex_rank();
    if n > u64::MAX as u128 {
        return Err(CodecError::TooLong);
    }
    let n = n as u64;
    let mut edges: Vec<(u64, u64)> = Vec::with_capacity(rest.len());
    for w in rest {
        let (a, b) = bitcodec::unpair(w)?;
        let k = a.lex_rank() as u64;
        let l = b.lex_rank() as u64;
        if k >= l || l > n {
            return Err(CodecError::NotAnEncoding);
        }
        if let Some(&last) = edges.last() {
            if last >= (k, l) {
                return Err(CodecError::NotAnEncoding);
            }
        }
        edges.push((k, l));
    }
    Ok(Graph { n, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        BitString::from(s)
    }

    #[test]
    fn literal_encoding_frozen_values() {
        // x1 -> "1" + rank-1 string (empty) = "1"; clause encoding below.
        let f = ThreeCnf::new(vec![[Literal::pos(1), Literal::neg(1), Literal::pos(1)]]).unwrap();
        assert_eq!(encode_formula(&f), bs("110111001101"));
    }

    #[test]
    fn clause_with_three_variables() {
        // (x1 or x2 or not x3): literals "1", "10", "01".
        let f = ThreeCnf::new(vec![[Literal::pos(1), Literal::pos(2), Literal::neg(3)]]).unwrap();
        assert_eq!(encode_formula(&f), bs("1101110100110001"));
    }

    #[test]
    fn formula_round_trip() {
        let cases = vec![
            ThreeCnf::new(vec![]).unwrap(),
            ThreeCnf::new(vec![[Literal::pos(1), Literal::neg(2), Literal::pos(7)]]).unwrap(),
            ThreeCnf::new(vec![
                [Literal::neg(4), Literal::neg(4), Literal::pos(4)],
                [Literal::pos(2), Literal::pos(3), Literal::neg(1)],
            ])
            .unwrap(),
        ];
        for f in cases {
            assert_eq!(decode_formula(&encode_formula(&f)), Ok(f));
        }
    }

    #[test]
    fn formula_decoder_is_strict() {
        // Wrong component count.
        let one_lit = bitcodec::multi_pair(&[bs("1")]);
        assert!(decode_formula(&one_lit).is_err());
        // Empty component is not a literal.
        let empty_lit = bitcodec::multi_pair(&[bs(""), bs("1"), bs("1")]);
        assert!(decode_formula(&empty_lit).is_err());
        // Not a tuple code at all.
        assert!(decode_formula(&bs("10")).is_err());
        assert!(decode_formula(&bs("1")).is_err());
    }

    #[test]
    fn graph_encoding_frozen_value() {
        // Two vertices, one edge: outer tuple of "0" and pair(e, "0").
        let g = Graph::new(2, vec![(1, 2)]).unwrap();
        let enc = encode_graph(&g);
        assert_eq!(enc.len(), 18);
        assert_eq!(decode_graph(&enc), Ok(g));
    }

    #[test]
    fn graph_round_trip() {
        let cases = vec![
            Graph::new(1, vec![]).unwrap(),
            Graph::new(4, vec![(1, 2), (2, 3), (1, 4)]).unwrap(),
            Graph::new(5, vec![(1, 2), (1, 3), (2, 3), (4, 5)]).unwrap(),
        ];
        for g in cases {
            assert_eq!(decode_graph(&encode_graph(&g)), Ok(g));
        }
    }

    #[test]
    fn graph_decoder_is_strict() {
        // Label out of range.
        let bad = bitcodec::multi_pair(&[
            BitString::lex_unrank(2),
            bitcodec::pair(&BitString::lex_unrank(1), &BitString::lex_unrank(3)),
        ]);
        assert!(decode_graph(&bad).is_err());
        // k >= l.
        let bad = bitcodec::multi_pair(&[
            BitString::lex_unrank(3),
            bitcodec::pair(&BitString::lex_unrank(2), &BitString::lex_unrank(2)),
        ]);
        assert!(decode_graph(&bad).is_err());
        // Edges out of canonical order.
        let bad = bitcodec::multi_pair(&[
            BitString::lex_unrank(3),
            bitcodec::pair(&BitString::lex_unrank(2), &BitString::lex_unrank(3)),
            bitcodec::pair(&BitString::lex_unrank(1), &BitString::lex_unrank(2)),
        ]);
        assert!(decode_graph(&bad).is_err());
        // Empty tuple has no vertex-count component.
        assert!(decode_graph(&bs("")).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert_eq!(
            ThreeCnf::new(vec![[Literal::pos(0), Literal::pos(1), Literal::pos(1)]]),
            Err(EncodingError::BadVariable)
        );
        assert_eq!(Graph::new(0, vec![]), Err(EncodingError::EmptyGraph));
        assert_eq!(Graph::new(3, vec![(2, 2)]), Err(EncodingError::BadEdge));
        assert_eq!(Graph::new(3, vec![(1, 4)]), Err(EncodingError::BadEdge));
    }

    #[test]
    fn isolated_padding_keeps_edges() {
        let g = Graph::new(3, vec![(1, 2)]).unwrap();
        let p = g.with_isolated_padding();
        assert_eq!(p.n(), 7);
        assert_eq!(p.edges(), g.edges());
    }

    #[test]
    fn satisfaction() {
        let f = ThreeCnf::new(vec![
            [Literal::pos(1), Literal::pos(2), Literal::pos(3)],
            [Literal::neg(1), Literal::neg(2), Literal::neg(3)],
        ])
        .unwrap();
        assert!(f.is_satisfied_by(&|v| v == 1));
        assert!(!f.is_satisfied_by(&|_| true));
    }
}
