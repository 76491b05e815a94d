// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Length-increasing paddings.
//!
//! A *tight* padding raises the length of every string by at least 1
//! and at most a fixed slack k while preserving membership in its
//! target language.  Iterating a tight padding therefore lets a query
//! be steered into any length window (floor, floor + k] above it.
//!
//! A *combining* padding s(x, y) folds an arbitrary second argument
//! into a string that is in the target language iff x is.  The
//! normalization below upgrades any such padding to one whose second
//! argument can be recovered, and from there to a single-argument
//! injective padding.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::backends::OracleHandle;
use crate::bitcodec::{self, BitString};
use crate::encodings::{self, Literal};

/// A polynomial with non-negative integer coefficients, evaluated with
/// saturating arithmetic.  `coeffs[i]` multiplies n^i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: u64) -> Self {
        Poly::new(alloc::vec![c])
    }

    pub fn identity() -> Self {
        Poly::new(alloc::vec![0, 1])
    }

    /// n^e + e, matching the step-budget shape.
    pub fn budget(e: u32) -> Self {
        let mut coeffs = alloc::vec![0u64; e as usize + 1];
        coeffs[0] = e as u64;
        coeffs[e as usize] = coeffs[e as usize].saturating_add(1);
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn eval(&self, n: u64) -> u64 {
        let mut acc: u64 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.saturating_mul(n).saturating_add(c);
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                self.coeffs
                    .get(i)
                    .copied()
                    .unwrap_or(0)
                    .saturating_add(other.coeffs.get(i).copied().unwrap_or(0))
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::new(Vec::new());
        }
        let mut coeffs = alloc::vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].saturating_add(a.saturating_mul(b));
            }
        }
        Poly::new(coeffs)
    }

    /// self(other(n)), symbolically.
    pub fn compose(&self, other: &Poly) -> Poly {
        let mut acc = Poly::new(Vec::new());
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(other).add(&Poly::constant(c));
        }
        acc
    }

    /// self(a(n) + b(n)).
    pub fn compose_sum(&self, a: &Poly, b: &Poly) -> Poly {
        self.compose(&a.add(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PaddingError {
    /// The query is already longer than the requested window floor.
    WindowUnreachable { query_len: u64, floor: u64 },
    /// A padding precondition q(|x|) >= |x| failed for this input.
    HonestyViolated { input_len: u64, bound: u64 },
    /// The input is too long for the rank arithmetic this map uses.
    TooLong,
}

impl core::fmt::Display for PaddingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PaddingError::WindowUnreachable { query_len, floor } => {
                write!(f, "query of length {query_len} already exceeds window floor {floor}")
            }
            PaddingError::HonestyViolated { input_len, bound } => {
                write!(f, "honesty bound {bound} below input length {input_len}")
            }
            PaddingError::TooLong => write!(f, "input too long for rank arithmetic"),
        }
    }
}

type Map1 = dyn Fn(&BitString) -> BitString + Send + Sync;
type Map2 = dyn Fn(&BitString, &BitString) -> BitString + Send + Sync;
type Inv = dyn Fn(&BitString) -> Option<(BitString, BitString)> + Send + Sync;

/// An injective, membership-preserving padding that lengthens every
/// string by at least 1 and at most `slack`.
#[derive(Clone)]
pub struct TightPadding {
    pub name: String,
    pub slack: u64,
    map: Arc<Map1>,
}

impl TightPadding {
    pub fn new(
        name: &str,
        slack: u64,
        map: impl Fn(&BitString) -> BitString + Send + Sync + 'static,
    ) -> Self {
        TightPadding {
            name: name.to_owned(),
            slack,
            map: Arc::new(map),
        }
    }

    pub fn apply(&self, x: &BitString) -> BitString {
        (self.map)(x)
    }
}

impl core::fmt::Debug for TightPadding {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "TightPadding({}, slack {})", self.name, self.slack)
    }
}

/// Tight padding for the encoded-satisfiable-3-CNF language.  A
/// well-formed encoding gains the tautologous clause (x1 or not-x1 or
/// x1), +12 bits; anything else is prefixed with the non-codeword
/// block "10", +2 bits.
pub fn pad_3sat() -> TightPadding {
    TightPadding::new("3sat", 12, |x| match encodings::decode_formula(x) {
        Ok(f) => {
            let mut clauses = f.clauses().to_vec();
            clauses.push([Literal::pos(1), Literal::neg(1), Literal::pos(1)]);
            encodings::encode_formula(&encodings::ThreeCnf::new(clauses).unwrap())
        }
        Err(_) => BitString::from("10").concat(x),
    })
}

/// Tight padding for the clique language over (graph, numeral) pairs.
/// A valid instance has its graph padded with isolated vertices up to
/// 2n+1, +4 bits; anything else is prefixed with "10", +2 bits.
pub fn pad_clique() -> TightPadding {
    TightPadding::new("clique", 4, |x| {
        let parsed = bitcodec::unpair(x).ok().and_then(|(g_enc, m_bits)| {
            let g = encodings::decode_graph(&g_enc).ok()?;
            m_bits.numeral_value().ok()?;
            Some((g, m_bits))
        });
        match parsed {
            Some((g, m_bits)) => bitcodec::pair(
                &encodings::encode_graph(&g.with_isolated_padding()),
                &m_bits,
            ),
            None => BitString::from("10").concat(x),
        }
    })
}

/// Iterates a tight padding until the result is strictly longer than
/// `floor`; the result then lies in (floor, floor + slack].
pub fn iterate_pad_to_window(
    pad: &TightPadding,
    query: &BitString,
    floor: u64,
) -> Result<BitString, PaddingError> {
    if query.len() as u64 > floor {
        return Err(PaddingError::WindowUnreachable {
            query_len: query.len() as u64,
            floor,
        });
    }
    let mut q = query.clone();
    while q.len() as u64 <= floor {
        let next = pad.apply(&q);
        assert!(
            next.len() > q.len() && (next.len() - q.len()) as u64 <= pad.slack,
            "padding {} must add between 1 and {} bits",
            pad.name,
            pad.slack
        );
        q = next;
    }
    Ok(q)
}

/// A two-argument combining padding s with x in S iff s(x, y) in S.
///
/// `honesty`: |x| + |y| <= honesty(|s(x, y)|).
/// `expansion`: |s(x, y)| <= expansion(|x| + |y|).
#[derive(Clone)]
pub struct SPadding {
    pub name: String,
    pub honesty: Poly,
    pub expansion: Poly,
    map: Arc<Map2>,
    full_inverse: Option<Arc<Inv>>,
}

impl SPadding {
    pub fn new(
        name: &str,
        honesty: Poly,
        expansion: Poly,
        map: impl Fn(&BitString, &BitString) -> BitString + Send + Sync + 'static,
    ) -> Self {
        SPadding {
            name: name.to_owned(),
            honesty,
            expansion,
            map: Arc::new(map),
            full_inverse: None,
        }
    }

    pub fn with_full_inverse(
        mut self,
        inv: impl Fn(&BitString) -> Option<(BitString, BitString)> + Send + Sync + 'static,
    ) -> Self {
        self.full_inverse = Some(Arc::new(inv));
        self
    }

    pub fn has_full_inverse(&self) -> bool {
        self.full_inverse.is_some()
    }

    pub fn apply(&self, x: &BitString, y: &BitString) -> BitString {
        (self.map)(x, y)
    }

    /// Recovers (x, y) from s(x, y); None off the image.
    pub fn invert(&self, z: &BitString) -> Option<(BitString, BitString)> {
        self.full_inverse.as_ref().and_then(|inv| inv(z))
    }

    /// Recovers y from s(x, y) given x.
    pub fn invert_second(&self, x: &BitString, z: &BitString) -> Option<BitString> {
        let (x2, y) = self.invert(z)?;
        (x2 == *x).then_some(y)
    }
}

impl core::fmt::Debug for SPadding {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "SPadding({})", self.name)
    }
}

/// Normalizes a combining padding: the result tucks x itself and a
/// long zero block inside the second argument, so that (a) the output
/// is always longer than q(|x|), and (b) both arguments can be
/// recovered.  If s lacks a full inverse the normalized inverse
/// searches for x exhaustively (shortlex, at most `search_cap`
/// candidates) and verifies each candidate by re-applying the map, so
/// it can refuse (None) but never lie.
pub fn normalize_s_padding(s: &SPadding, q: &Poly, search_cap: u64) -> SPadding {
    let q_map = q.clone();
    let s_map = s.clone();
    let wrap = move |x: &BitString, y: &BitString| -> BitString {
        let zeros = BitString::zeros(q_map.eval(x.len() as u64) as usize + 1);
        let inner = bitcodec::pair(x, &bitcodec::pair(y, &zeros));
        s_map.apply(x, &inner)
    };

    let q_inv = q.clone();
    let parse_inner = move |x: &BitString, w: &BitString| -> Option<BitString> {
        let (x2, rest) = bitcodec::unpair(w).ok()?;
        if x2 != *x {
            return None;
        }
        let (y, zeros) = bitcodec::unpair(&rest).ok()?;
        let want = q_inv.eval(x.len() as u64) as usize + 1;
        (zeros.is_all_zeros() && zeros.len() == want).then_some(y)
    };

    let s_inv = s.clone();
    let wrap_for_check = {
        let q2 = q.clone();
        let s2 = s.clone();
        move |x: &BitString, y: &BitString| -> BitString {
            let zeros = BitString::zeros(q2.eval(x.len() as u64) as usize + 1);
            s2.apply(x, &bitcodec::pair(x, &bitcodec::pair(y, &zeros)))
        }
    };
    let parse2 = parse_inner.clone();
    let full_inverse = move |z: &BitString| -> Option<(BitString, BitString)> {
        if s_inv.has_full_inverse() {
            let (x, w) = s_inv.invert(z)?;
            let y = parse2(&x, &w)?;
            return Some((x, y));
        }
        // No inverse on s: exhaustive (x, y) search, verified by
        // re-applying the map, so a hit is always genuine and a miss
        // within the cap is a genuine miss.  |x| and |y| cannot
        // exceed |z| because the wrapped encoding embeds both.
        let mut tried = 0u64;
        for x in bitcodec::strings_up_to(z.len().min(16)) {
            for y in bitcodec::strings_up_to(z.len().min(16)) {
                tried += 1;
                if tried > search_cap {
                    return None;
                }
                if wrap_for_check(&x, &y) == *z {
                    return Some((x, y));
                }
            }
        }
        None
    };

    // Inner tuple: 2(2 + |x| + 2(2 + |y| + q(|x|) + 1)) bits.
    let inner_len = Poly::new(alloc::vec![16, 2])
        .add(&Poly::new(alloc::vec![0, 4]))
        .add(&q.mul(&Poly::constant(4)));
    let expansion = s.expansion.compose(&Poly::identity().add(&inner_len));
    SPadding {
        name: alloc::format!("{}[normalized]", s.name),
        honesty: s.honesty.clone(),
        expansion,
        map: Arc::new(wrap),
        full_inverse: Some(Arc::new(full_inverse)),
    }
}

/// A single-argument injective padding derived from a normalized
/// combining padding: z(x) = s(x, 0^(q(|x|) - |x|)).
#[derive(Clone)]
pub struct ZPadding {
    pub name: String,
    q: Poly,
    s: SPadding,
}

/// Derives the single-argument padding of a normalized combining
/// padding.  Inputs with q(|x|) < |x| are rejected at application
/// time.
pub fn z_from_s(s: &SPadding, q: &Poly) -> ZPadding {
    ZPadding {
        name: alloc::format!("z[{}]", s.name),
        q: q.clone(),
        s: s.clone(),
    }
}

impl ZPadding {
    pub fn apply(&self, x: &BitString) -> Result<BitString, PaddingError> {
        let bound = self.q.eval(x.len() as u64);
        if bound < x.len() as u64 {
            return Err(PaddingError::HonestyViolated {
                input_len: x.len() as u64,
                bound,
            });
        }
        Ok(self
            .s
            .apply(x, &BitString::zeros((bound - x.len() as u64) as usize)))
    }

    pub fn invert(&self, z: &BitString) -> Option<BitString> {
        let (x, y) = self.s.invert(z)?;
        let bound = self.q.eval(x.len() as u64);
        (bound >= x.len() as u64
            && y.is_all_zeros()
            && y.len() as u64 == bound - x.len() as u64)
            .then_some(x)
    }
}

impl core::fmt::Debug for ZPadding {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "ZPadding({})", self.name)
    }
}

/// The rank-shift equivalent of an arbitrary language, together with
/// a slack-1 tight padding for it.
///
/// b contains x iff x is nonempty, its rank among strings of its own
/// length is r <= 2^|x| - 1, and the global rank-r string is in a.
/// The all-ones string of each length (rank 2^|x|) is never in b,
/// which is exactly the room the padding uses.
#[derive(Clone)]
pub struct TightEquivalent {
    pub b: OracleHandle,
    pub sigma_b: TightPadding,
    a_to_b: Arc<Map1>,
    b_to_a: Arc<Map1>,
}

impl TightEquivalent {
    pub fn a_to_b(&self, x: &BitString) -> BitString {
        (self.a_to_b)(x)
    }

    pub fn b_to_a(&self, y: &BitString) -> BitString {
        (self.b_to_a)(y)
    }
}

pub fn make_tight_equivalent(a: &OracleHandle, non_member: &BitString) -> TightEquivalent {
    assert!(
        !a.decide(non_member),
        "non_member must lie outside the base language"
    );
    let a1 = a.clone();
    let b = OracleHandle::from_fn("rank-shift", move |x| {
        if x.is_empty() {
            return false;
        }
        let r = x.rank_at_length();
        r <= (1u128 << x.len()) - 1 && a1.decide(&BitString::lex_unrank(r))
    });

    // All-ones strings go up as all-ones; everything else keeps its
    // rank-at-length one length up.  Both branches stay outside /
    // inside b respectively, so membership is preserved with slack 1.
    let sigma_b = TightPadding::new("rank-shift", 1, |x| {
        if x.is_all_ones() {
            BitString::ones(x.len() + 1)
        } else {
            BitString::at_length_with_rank(x.len() + 1, x.rank_at_length())
        }
    });

    let a_to_b = |x: &BitString| BitString::at_length_with_rank(x.len() + 1, x.lex_rank());
    let nm = non_member.clone();
    let b_to_a = move |y: &BitString| {
        if y.is_all_ones() {
            // Covers the empty string and every rank-2^|y| string.
            nm.clone()
        } else {
            BitString::lex_unrank(y.rank_at_length())
        }
    };

    TightEquivalent {
        b,
        sigma_b,
        a_to_b: Arc::new(a_to_b),
        b_to_a: Arc::new(b_to_a),
    }
}

/// A language many-one equivalent to a that provably has *no* tight
/// padding: its members live only at perfect-square lengths, so every
/// length-increasing membership-preserving map must jump a gap.
#[derive(Clone)]
pub struct NonTightEquivalent {
    pub b: OracleHandle,
    a_to_b: Arc<Map1>,
    b_to_a: Arc<Map1>,
}

impl NonTightEquivalent {
    pub fn a_to_b(&self, x: &BitString) -> BitString {
        (self.a_to_b)(x)
    }

    pub fn b_to_a(&self, y: &BitString) -> BitString {
        (self.b_to_a)(y)
    }
}

fn perfect_square_root(n: u64) -> Option<u64> {
    // Integer Newton iteration; f64::sqrt is unavailable without std.
    if n == 0 {
        return Some(0);
    }
    let mut r = n;
    let mut next = (r + 1) / 2;
    while next < r {
        r = next;
        next = (r + n / r) / 2;
    }
    (r * r == n).then_some(r)
}

/// `a_is_finite` selects the construction.  Finite case: b is simply
/// the set of all strings of perfect-square length.  Infinite case:
/// the string of length n*n with rank-at-length r encodes membership
/// of the length-n, rank-r string.  `member` and `non_member` are
/// fixed witnesses inside and outside a.
pub fn make_non_tight_equivalent(
    a: &OracleHandle,
    a_is_finite: bool,
    member: &BitString,
    non_member: &BitString,
) -> NonTightEquivalent {
    assert!(a.decide(member), "member must lie inside the base language");
    assert!(
        !a.decide(non_member),
        "non_member must lie outside the base language"
    );
    if a_is_finite {
        let a1 = a.clone();
        let b = OracleHandle::from_fn("square-lengths", |x| {
            perfect_square_root(x.len() as u64).is_some()
        });
        let a_to_b = move |x: &BitString| {
            if a1.decide(x) {
                BitString::new() // length 0 = 0^2, in b
            } else {
                BitString::from("00") // length 2, not a square
            }
        };
        let m = member.clone();
        let nm = non_member.clone();
        let b_to_a = move |y: &BitString| {
            if perfect_square_root(y.len() as u64).is_some() {
                m.clone()
            } else {
                nm.clone()
            }
        };
        NonTightEquivalent {
            b,
            a_to_b: Arc::new(a_to_b),
            b_to_a: Arc::new(b_to_a),
        }
    } else {
        let a1 = a.clone();
        let b = OracleHandle::from_fn("square-coded", move |x| {
            let Some(n) = perfect_square_root(x.len() as u64) else {
                return false;
            };
            if n > 64 {
                return false; // out of rank-arithmetic range
            }
            let r = x.rank_at_length();
            r <= (1u128 << n) && a1.decide(&BitString::at_length_with_rank(n as usize, r))
        });
        let a_to_b = |x: &BitString| {
            assert!(x.len() <= 11, "square-coded map capped at length 11");
            BitString::at_length_with_rank(x.len() * x.len(), x.rank_at_length())
        };
        let nm = non_member.clone();
        let b_to_a = move |y: &BitString| {
            let Some(n) = perfect_square_root(y.len() as u64) else {
                return nm.clone();
            };
            if n > 64 {
                return nm.clone();
            }
            let r = y.rank_at_length();
            if r <= (1u128 << n) {
                BitString::at_length_with_rank(n as usize, r)
            } else {
                nm.clone()
            }
        };
        NonTightEquivalent {
            b,
            a_to_b: Arc::new(a_to_b),
            b_to_a: Arc::new(b_to_a),
        }
    }
}
