//! Truncated formal power series in noncommuting variables z1..zn with a
//! central parameter t, over exact rationals.
//!
//! A series is stored as a map from words in the letters to dense
//! polynomials in t. Everything is truncated: words longer than the z-degree
//! cap and t-powers above the t-order cap are dropped on the spot, so all
//! operations are exact in the quotient ring. In commutative mode words are
//! kept sorted, which identifies them with monomials.
//!
//! The text grammar is
//!
//! ```text
//! series ::= term (('+'|'-') term)*
//! term   ::= coeff? ('*'? factor)*
//! factor ::= 't' ('^' nat)? | var ('^' nat)?
//! coeff  ::= int ('/' nat)?
//! var    ::= 'z' nat
//! ```
//!
//! with variable powers expanding to repeated letters in noncommutative
//! mode. Printing always writes explicit coefficients and compresses letter
//! runs, so output re-parses to the same series under the same truncation.
//!
//! A formal automorphism is the data F = z - sum_m t^m H_[m](z) with t-free
//! homogeneous-in-t pieces H_[m] whose z-order is at least a floor alpha of
//! 1 or more; its compositional inverse is computed by the fixed-point
//! iteration M <- H_t(z + M), which stabilizes within the t cap.

use crate::{format_q, parse_q, qi, Q};
use num::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Letters index into the variable list, 0-based.
pub type Word = Vec<u16>;

/// Ring caps shared by all operands of an operation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncationSpec {
    /// Number of z variables.
    pub vars: usize,
    /// Words longer than this are dropped.
    pub z_degree: usize,
    /// Powers of t above this are dropped.
    pub t_order: usize,
    /// Sorted words, i.e. ordinary polynomials in commuting variables.
    pub commutative: bool,
}

impl TruncationSpec {
    pub fn new(vars: usize, z_degree: usize, t_order: usize, commutative: bool) -> Self {
        TruncationSpec { vars, z_degree, t_order, commutative }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error("series parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("incompatible truncation specs: {0}")]
    Incompatible(String),
    #[error("substitution not defined: {0}")]
    BadSubstitution(String),
    #[error("invalid map data: {0}")]
    BadMap(String),
}

/// Truncated series. Equal values have equal normalized storage, so
/// structural equality is equality in the quotient ring.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NCSeries {
    trunc: TruncationSpec,
    terms: BTreeMap<Word, Vec<Q>>,
}

fn trim_tpoly(v: &mut Vec<Q>) {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
}

impl NCSeries {
    pub fn zero(trunc: &TruncationSpec) -> Self {
        NCSeries { trunc: trunc.clone(), terms: BTreeMap::new() }
    }

    pub fn one(trunc: &TruncationSpec) -> Self {
        let mut s = NCSeries::zero(trunc);
        s.add_term(Vec::new(), 0, qi(1));
        s
    }

    /// The variable z_{i+1} (0-based index).
    pub fn var(trunc: &TruncationSpec, i: usize) -> Self {
        assert!(i < trunc.vars, "variable index out of range");
        let mut s = NCSeries::zero(trunc);
        s.add_term(vec![i as u16], 0, qi(1));
        s
    }

    /// The parameter t.
    pub fn t(trunc: &TruncationSpec) -> Self {
        let mut s = NCSeries::zero(trunc);
        s.add_term(Vec::new(), 1, qi(1));
        s
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds c * t^tpow * word, dropping anything beyond the caps and
    /// sorting the word in commutative mode.
    pub fn add_term(&mut self, mut word: Word, tpow: usize, c: Q) {
        if c.is_zero() || tpow > self.trunc.t_order || word.len() > self.trunc.z_degree {
            return;
        }
        debug_assert!(word.iter().all(|&l| (l as usize) < self.trunc.vars));
        if self.trunc.commutative {
            word.sort_unstable();
        }
        let poly = self.terms.entry(word.clone()).or_default();
        if poly.len() <= tpow {
            poly.resize(tpow + 1, qi(0));
        }
        poly[tpow] += c;
        trim_tpoly(poly);
        if poly.is_empty() {
            self.terms.remove(&word);
        }
    }

    /// Coefficient of t^tpow * word.
    pub fn coeff(&self, word: &[u16], tpow: usize) -> Q {
        let mut w = word.to_vec();
        if self.trunc.commutative {
            w.sort_unstable();
        }
        self.terms
            .get(&w)
            .and_then(|p| p.get(tpow))
            .cloned()
            .unwrap_or_else(|| qi(0))
    }

    /// Iterates (word, t-power, coefficient) over all stored terms.
    pub fn iter_terms(&self) -> impl Iterator<Item = (&Word, usize, &Q)> {
        self.terms.iter().flat_map(|(w, poly)| {
            poly.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(k, c)| (w, k, c))
        })
    }

    fn check_compatible(&self, other: &NCSeries) {
        assert_eq!(self.trunc, other.trunc, "mixed truncation specs");
    }

    pub fn add(&self, other: &NCSeries) -> NCSeries {
        self.check_compatible(other);
        let mut out = self.clone();
        for (w, k, c) in other.iter_terms() {
            out.add_term(w.clone(), k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &NCSeries) -> NCSeries {
        self.add(&other.scale(&qi(-1)))
    }

    pub fn neg(&self) -> NCSeries {
        self.scale(&qi(-1))
    }

    pub fn scale(&self, c: &Q) -> NCSeries {
        let mut out = NCSeries::zero(&self.trunc);
        if c.is_zero() {
            return out;
        }
        for (w, k, a) in self.iter_terms() {
            out.add_term(w.clone(), k, a * c);
        }
        out
    }

    /// Multiplies by t^k.
    pub fn mul_t(&self, k: usize) -> NCSeries {
        let mut out = NCSeries::zero(&self.trunc);
        for (w, p, a) in self.iter_terms() {
            if p + k <= self.trunc.t_order {
                out.add_term(w.clone(), p + k, a.clone());
            }
        }
        out
    }

    /// Word concatenation (sorted merge in commutative mode) with t-degrees
    /// adding; everything beyond the caps is dropped.
    pub fn mul(&self, other: &NCSeries) -> NCSeries {
        self.check_compatible(other);
        let mut out = NCSeries::zero(&self.trunc);
        for (wa, pa) in &self.terms {
            for (wb, pb) in &other.terms {
                if wa.len() + wb.len() > self.trunc.z_degree {
                    continue;
                }
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                for (i, ca) in pa.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    for (j, cb) in pb.iter().enumerate() {
                        if i + j > self.trunc.t_order {
                            break;
                        }
                        if !cb.is_zero() {
                            out.add_term(w.clone(), i + j, ca * cb);
                        }
                    }
                }
            }
        }
        out
    }

    /// The t-free series of coefficients of t^k.
    pub fn t_coefficient(&self, k: usize) -> NCSeries {
        let mut out = NCSeries::zero(&self.trunc);
        for (w, poly) in &self.terms {
            if let Some(c) = poly.get(k) {
                out.add_term(w.clone(), 0, c.clone());
            }
        }
        out
    }

    /// d/dt. The top t coefficient of the result would need data beyond the
    /// cap, so the result is only meaningful to order t_order - 1.
    pub fn derivative_t(&self) -> NCSeries {
        let mut out = NCSeries::zero(&self.trunc);
        for (w, poly) in &self.terms {
            for (k, c) in poly.iter().enumerate().skip(1) {
                out.add_term(w.clone(), k - 1, c * qi(k as i64));
            }
        }
        out
    }

    pub fn is_t_free(&self) -> bool {
        self.terms.values().all(|p| p.len() <= 1)
    }

    /// Smallest word length with a nonzero coefficient.
    pub fn z_order(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.len()).min()
    }

    /// Replaces letter i by images[i]; t maps to t. Every image term must
    /// have z-degree at least 1, which keeps truncation exact.
    pub fn substitute(&self, images: &[NCSeries]) -> Result<NCSeries, SeriesError> {
        if images.len() != self.trunc.vars {
            return Err(SeriesError::BadSubstitution(format!(
                "expected {} images, got {}",
                self.trunc.vars,
                images.len()
            )));
        }
        for (i, im) in images.iter().enumerate() {
            if im.trunc != self.trunc {
                return Err(SeriesError::Incompatible(format!("image {} has a different spec", i)));
            }
            if im.terms.keys().any(|w| w.is_empty()) {
                return Err(SeriesError::BadSubstitution(format!(
                    "image of z{} has a term of z-degree 0",
                    i + 1
                )));
            }
        }
        let mut out = NCSeries::zero(&self.trunc);
        for (w, poly) in &self.terms {
            let mut prod = NCSeries::one(&self.trunc);
            for &letter in w {
                prod = prod.mul(&images[letter as usize]);
                if prod.is_zero() {
                    break;
                }
            }
            for (k, c) in poly.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                out = out.add(&prod.mul_t(k).scale(c));
            }
        }
        Ok(out)
    }

    /// Parses the series grammar under the given caps; out-of-cap literals
    /// are truncated away like any other operation.
    pub fn parse(trunc: &TruncationSpec, input: &str) -> Result<NCSeries, SeriesError> {
        SeriesParser { bytes: input.as_bytes(), pos: 0, trunc }.series()
    }
}

/// Terms sorted by t-power, then word length, then word; letter runs are
/// compressed to powers.
impl fmt::Display for NCSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut flat: Vec<(usize, &Word, &Q)> = Vec::new();
        for (w, k, c) in self.iter_terms() {
            flat.push((k, w, c));
        }
        flat.sort_by(|a, b| (a.0, a.1.len(), a.1).cmp(&(b.0, b.1.len(), b.1)));
        if flat.is_empty() {
            return write!(f, "0");
        }
        for (idx, (k, w, c)) in flat.iter().enumerate() {
            let mag = if *c < &qi(0) { -(*c).clone() } else { (*c).clone() };
            if idx == 0 {
                if *c < &qi(0) {
                    write!(f, "-")?;
                }
            } else if *c < &qi(0) {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_q(&mag))?;
            if *k == 1 {
                write!(f, "*t")?;
            } else if *k > 1 {
                write!(f, "*t^{}", k)?;
            }
            let mut i = 0;
            while i < w.len() {
                let mut j = i;
                while j < w.len() && w[j] == w[i] {
                    j += 1;
                }
                if j - i == 1 {
                    write!(f, "*z{}", w[i] + 1)?;
                } else {
                    write!(f, "*z{}^{}", w[i] + 1, j - i)?;
                }
                i = j;
            }
        }
        Ok(())
    }
}

struct SeriesParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    trunc: &'a TruncationSpec,
}

impl<'a> SeriesParser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, SeriesError> {
        Err(SeriesError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn nat(&mut self) -> Result<usize, SeriesError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<usize>()
            .map_err(|_| SeriesError::Parse { pos: start, msg: "number out of range".into() })
    }

    fn series(&mut self) -> Result<NCSeries, SeriesError> {
        let mut out = NCSeries::zero(self.trunc);
        self.skip_ws();
        if self.pos == self.bytes.len() {
            return self.err("empty series");
        }
        let mut sign = qi(1);
        if self.peek() == Some(b'-') {
            sign = qi(-1);
            self.pos += 1;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        loop {
            let (word, tpow, coeff) = self.term()?;
            out.add_term(word, tpow, coeff * &sign);
            self.skip_ws();
            match self.peek() {
                None => return Ok(out),
                Some(b'+') => {
                    sign = qi(1);
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = qi(-1);
                    self.pos += 1;
                }
                _ => return self.err("expected '+', '-' or end of input"),
            }
        }
    }

    fn term(&mut self) -> Result<(Word, usize, Q), SeriesError> {
        self.skip_ws();
        let mut coeff = qi(1);
        let mut have_any = false;
        if self.peek().map_or(false, |b| b.is_ascii_digit()) {
            let start = self.pos;
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'/')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
            coeff = match parse_q(text) {
                Some(c) => c,
                None => return Err(SeriesError::Parse { pos: start, msg: "bad coefficient".into() }),
            };
            have_any = true;
        }
        let mut word = Word::new();
        let mut tpow = 0usize;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                self.skip_ws();
            }
            match self.peek() {
                Some(b't') => {
                    self.pos += 1;
                    let e = self.exponent()?;
                    tpow += e;
                    have_any = true;
                }
                Some(b'z') => {
                    self.pos += 1;
                    let start = self.pos;
                    let idx = self.nat()?;
                    if idx == 0 || idx > self.trunc.vars {
                        return Err(SeriesError::Parse {
                            pos: start,
                            msg: format!("variable z{} out of range", idx),
                        });
                    }
                    let e = self.exponent()?;
                    for _ in 0..e {
                        word.push((idx - 1) as u16);
                    }
                    have_any = true;
                }
                _ => break,
            }
        }
        if !have_any {
            return self.err("expected a term");
        }
        Ok((word, tpow, coeff))
    }

    fn exponent(&mut self) -> Result<usize, SeriesError> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.nat()
        } else {
            Ok(1)
        }
    }
}

/// A tuple of series, one per variable; the value of a map z -> F(z).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesVector {
    trunc: TruncationSpec,
    comps: Vec<NCSeries>,
}

impl SeriesVector {
    pub fn new(trunc: &TruncationSpec, comps: Vec<NCSeries>) -> Self {
        assert_eq!(comps.len(), trunc.vars, "one component per variable");
        for c in &comps {
            assert_eq!(c.trunc(), trunc, "component spec mismatch");
        }
        SeriesVector { trunc: trunc.clone(), comps }
    }

    pub fn zero(trunc: &TruncationSpec) -> Self {
        SeriesVector::new(trunc, (0..trunc.vars).map(|_| NCSeries::zero(trunc)).collect())
    }

    /// The identity map z.
    pub fn identity(trunc: &TruncationSpec) -> Self {
        SeriesVector::new(trunc, (0..trunc.vars).map(|i| NCSeries::var(trunc, i)).collect())
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn comps(&self) -> &[NCSeries] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &NCSeries {
        &self.comps[i]
    }

    pub fn add(&self, other: &SeriesVector) -> SeriesVector {
        SeriesVector::new(
            &self.trunc,
            self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect(),
        )
    }

    pub fn sub(&self, other: &SeriesVector) -> SeriesVector {
        SeriesVector::new(
            &self.trunc,
            self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect(),
        )
    }

    pub fn scale(&self, c: &Q) -> SeriesVector {
        SeriesVector::new(&self.trunc, self.comps.iter().map(|a| a.scale(c)).collect())
    }

    pub fn mul_t(&self, k: usize) -> SeriesVector {
        SeriesVector::new(&self.trunc, self.comps.iter().map(|a| a.mul_t(k)).collect())
    }

    pub fn derivative_t(&self) -> SeriesVector {
        SeriesVector::new(&self.trunc, self.comps.iter().map(|a| a.derivative_t()).collect())
    }

    pub fn t_coefficient(&self, k: usize) -> SeriesVector {
        SeriesVector::new(&self.trunc, self.comps.iter().map(|a| a.t_coefficient(k)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Composition self(inner): substitutes inner into every component.
    pub fn compose(&self, inner: &SeriesVector) -> Result<SeriesVector, SeriesError> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.substitute(&inner.comps))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SeriesVector::new(&self.trunc, comps))
    }
}

#[derive(Serialize, Deserialize)]
struct TruncRepr {
    t_order: usize,
    z_degree: usize,
}

#[derive(Serialize, Deserialize)]
struct HEntryRepr {
    m: u32,
    component: usize,
    series: String,
}

#[derive(Serialize, Deserialize)]
struct MapFileRepr {
    vars: Vec<String>,
    commutative: bool,
    alpha: usize,
    truncation: TruncRepr,
    #[serde(rename = "H")]
    h: Vec<HEntryRepr>,
}

/// A formal automorphism F = z - sum over m of t^m H_[m](z): the H pieces
/// are t-free, supported on weights m >= 1, and each nonzero term has
/// z-degree at least alpha >= 1.
#[derive(Clone, Debug)]
pub struct Automorphism {
    trunc: TruncationSpec,
    alpha: usize,
    h: BTreeMap<u32, SeriesVector>,
}

impl Automorphism {
    pub fn new(
        trunc: &TruncationSpec,
        alpha: usize,
        h: BTreeMap<u32, SeriesVector>,
    ) -> Result<Self, SeriesError> {
        if alpha < 1 {
            return Err(SeriesError::BadMap("alpha must be at least 1".into()));
        }
        for (&m, hv) in &h {
            if m == 0 {
                return Err(SeriesError::BadMap("weights must be positive".into()));
            }
            if hv.trunc() != trunc {
                return Err(SeriesError::BadMap(format!("H[{}] has a different spec", m)));
            }
            for (i, c) in hv.comps().iter().enumerate() {
                if !c.is_t_free() {
                    return Err(SeriesError::BadMap(format!(
                        "H[{}] component {} must be t-free",
                        m,
                        i + 1
                    )));
                }
                if let Some(ord) = c.z_order() {
                    if ord < alpha {
                        return Err(SeriesError::BadMap(format!(
                            "H[{}] component {} has z-order {} below alpha {}",
                            m,
                            i + 1,
                            ord,
                            alpha
                        )));
                    }
                }
            }
        }
        let mut h = h;
        h.retain(|_, hv| !hv.is_zero());
        Ok(Automorphism { trunc: trunc.clone(), alpha, h })
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// The weights m with H_[m] nonzero, ascending.
    pub fn weights(&self) -> Vec<u32> {
        self.h.keys().copied().collect()
    }

    pub fn h_piece(&self, m: u32) -> Option<&SeriesVector> {
        self.h.get(&m)
    }

    /// H_t(z) = sum over m of t^m H_[m].
    pub fn h_total(&self) -> SeriesVector {
        let mut acc = SeriesVector::zero(&self.trunc);
        for (&m, hv) in &self.h {
            acc = acc.add(&hv.mul_t(m as usize));
        }
        acc
    }

    /// F = z - H_t(z).
    pub fn f(&self) -> SeriesVector {
        SeriesVector::identity(&self.trunc).sub(&self.h_total())
    }

    /// Compositional inverse G with F(G) = G(F) = z, by iterating
    /// M <- H_t(z + M); G = z + M. The iteration gains one t-order per pass.
    pub fn fixed_point_inverse(&self) -> Result<SeriesVector, SeriesError> {
        let ident = SeriesVector::identity(&self.trunc);
        let h = self.h_total();
        let mut m = SeriesVector::zero(&self.trunc);
        for _ in 0..=self.trunc.t_order + 1 {
            let next = h.compose(&ident.add(&m))?;
            if next == m {
                return Ok(ident.add(&m));
            }
            m = next;
        }
        Err(SeriesError::BadSubstitution(
            "fixed-point iteration did not stabilize within the t cap".into(),
        ))
    }

    /// Reads the JSON map format: variable names must be z1..zn in order.
    pub fn from_json(input: &str) -> Result<Self, SeriesError> {
        let repr: MapFileRepr =
            serde_json::from_str(input).map_err(|e| SeriesError::BadMap(e.to_string()))?;
        for (i, name) in repr.vars.iter().enumerate() {
            if *name != format!("z{}", i + 1) {
                return Err(SeriesError::BadMap(format!(
                    "variable {} must be named z{}",
                    i + 1,
                    i + 1
                )));
            }
        }
        let trunc = TruncationSpec::new(
            repr.vars.len(),
            repr.truncation.z_degree,
            repr.truncation.t_order,
            repr.commutative,
        );
        let mut pieces: BTreeMap<u32, Vec<NCSeries>> = BTreeMap::new();
        for entry in &repr.h {
            if entry.component == 0 || entry.component > trunc.vars {
                return Err(SeriesError::BadMap(format!(
                    "component {} out of range",
                    entry.component
                )));
            }
            let series = NCSeries::parse(&trunc, &entry.series)?;
            let slot = pieces
                .entry(entry.m)
                .or_insert_with(|| (0..trunc.vars).map(|_| NCSeries::zero(&trunc)).collect());
            slot[entry.component - 1] = slot[entry.component - 1].add(&series);
        }
        let h = pieces
            .into_iter()
            .map(|(m, comps)| (m, SeriesVector::new(&trunc, comps)))
            .collect();
        Automorphism::new(&trunc, repr.alpha, h)
    }

    /// Writes the JSON map format with one entry per nonzero H component.
    pub fn to_json(&self) -> String {
        let repr = MapFileRepr {
            vars: (1..=self.trunc.vars).map(|i| format!("z{}", i)).collect(),
            commutative: self.trunc.commutative,
            alpha: self.alpha,
            truncation: TruncRepr { t_order: self.trunc.t_order, z_degree: self.trunc.z_degree },
            h: self
                .h
                .iter()
                .flat_map(|(&m, hv)| {
                    hv.comps().iter().enumerate().filter(|(_, s)| !s.is_zero()).map(
                        move |(i, s)| HEntryRepr {
                            m,
                            component: i + 1,
                            series: s.to_string(),
                        },
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&repr).expect("map serialization")
    }
}

/// Seeded random automorphism for stress tests: each weight gets H pieces
/// with `terms_per` random t-free terms per component, word lengths between
/// alpha and alpha + 2, small nonzero integer coefficients.
pub fn random_automorphism(
    seed: u64,
    trunc: &TruncationSpec,
    weights: &[u32],
    terms_per: usize,
    alpha: usize,
) -> Automorphism {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let max_len = trunc.z_degree.min(alpha + 2);
    let mut h = BTreeMap::new();
    for &m in weights {
        let comps = (0..trunc.vars)
            .map(|_| {
                let mut s = NCSeries::zero(trunc);
                for _ in 0..terms_per {
                    let len = rng.gen_range(alpha..=max_len.max(alpha));
                    let word: Word = (0..len).map(|_| rng.gen_range(0..trunc.vars) as u16).collect();
                    let c = loop {
                        let c = rng.gen_range(-3i64..=3);
                        if c != 0 {
                            break c;
                        }
                    };
                    s.add_term(word, 0, qi(c));
                }
                s
            })
            .collect();
        h.insert(m, SeriesVector::new(trunc, comps));
    }
    Automorphism::new(trunc, alpha, h).expect("random pieces satisfy the invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;
    use proptest::prelude::*;

    fn spec() -> TruncationSpec {
        TruncationSpec::new(2, 6, 6, false)
    }

    fn cspec() -> TruncationSpec {
        TruncationSpec::new(1, 10, 8, true)
    }

    fn p(tr: &TruncationSpec, s: &str) -> NCSeries {
        NCSeries::parse(tr, s).unwrap()
    }

    #[test]
    fn parse_basready_forms() {
        let tr = spec();
        assert_eq!(p(&tr, "z1"), NCSeries::var(&tr, 0));
        assert_eq!(p(&tr, "1*z1"), NCSeries::var(&tr, 0));
        assert_eq!(p(&tr, "t"), NCSeries::t(&tr));
        assert_eq!(p(&tr, "0"), NCSeries::zero(&tr));
        assert_eq!(p(&tr, "2/4"), NCSeries::one(&tr).scale(&q(1, 2)));
        // Powers expand to repeated letters; '*' is optional.
        assert_eq!(p(&tr, "z1^2 z2"), p(&tr, "z1*z1*z2"));
        assert_eq!(p(&tr, "3 t^2 z2"), p(&tr, "3*t*t*z2"));
        assert_eq!(p(&tr, "z1 - z1"), NCSeries::zero(&tr));
        assert_eq!(p(&tr, "-z1 + 2*z1"), NCSeries::var(&tr, 0));
    }

    #[test]
    fn parse_rejects_garbage() {
        let tr = spec();
        for s in ["", "z0", "z3", "q", "1 +", "z1 ^", "1//2", "*", "z1 z"] {
            assert!(NCSeries::parse(&tr, s).is_err(), "accepted {:?}", s);
        }
    }

    #[test]
    fn noncommutative_order_matters() {
        let tr = spec();
        assert_ne!(p(&tr, "z1*z2"), p(&tr, "z2*z1"));
        let a = NCSeries::var(&tr, 0);
        let b = NCSeries::var(&tr, 1);
        assert_ne!(a.mul(&b), b.mul(&a));
        assert_eq!(a.mul(&b), p(&tr, "z1*z2"));
    }

    #[test]
    fn commutative_mode_sorts_words() {
        let tr = TruncationSpec::new(2, 6, 6, true);
        assert_eq!(p(&tr, "z2*z1"), p(&tr, "z1*z2"));
        let a = NCSeries::var(&tr, 0);
        let b = NCSeries::var(&tr, 1);
        assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn truncation_drops_high_terms() {
        let tr = TruncationSpec::new(1, 3, 2, false);
        let z = NCSeries::var(&tr, 0);
        let z2 = z.mul(&z);
        let z4 = z2.mul(&z2);
        assert!(z4.is_zero());
        let t3 = NCSeries::t(&tr).mul(&NCSeries::t(&tr)).mul(&NCSeries::t(&tr));
        assert!(t3.is_zero());
        assert!(p(&tr, "z1^4 + t^3").is_zero());
    }

    #[test]
    fn display_roundtrips() {
        let tr = spec();
        for s in [
            "1 + 2*z1 - 1/2*z1*z2 + 3*t^2*z2^2",
            "-z1",
            "t",
            "z1^3",
            "1/3*t*z1*z2*z1",
        ] {
            let x = p(&tr, s);
            assert_eq!(p(&tr, &x.to_string()), x, "roundtrip {:?}", s);
        }
        assert_eq!(p(&tr, "z1 - z1").to_string(), "0");
        assert_eq!(p(&tr, "z2*z2 - t").to_string(), "1*z2^2 - 1*t");
    }

    #[test]
    fn substitution_matches_hand_expansion() {
        // u = z^2 under z -> z + z^2 gives z^2 + 2 z^3 + z^4 (commutative).
        let tr = cspec();
        let u = p(&tr, "z1^2");
        let img = p(&tr, "z1 + z1^2");
        let got = u.substitute(std::slice::from_ref(&img)).unwrap();
        assert_eq!(got, p(&tr, "z1^2 + 2*z1^3 + z1^4"));
        // Noncommutative: u = z1*z2 under z1 -> z2, z2 -> z1*z1.
        let tr = spec();
        let u = p(&tr, "z1*z2");
        let got = u
            .substitute(&[p(&tr, "z2"), p(&tr, "z1*z1")])
            .unwrap();
        assert_eq!(got, p(&tr, "z2*z1*z1"));
    }

    #[test]
    fn substitution_rejects_constant_terms() {
        let tr = cspec();
        let u = p(&tr, "z1");
        assert!(u.substitute(&[p(&tr, "1 + z1")]).is_err());
        assert!(u.substitute(&[p(&tr, "t + z1")]).is_err());
        assert!(u.substitute(&[p(&tr, "t*z1")]).is_ok());
    }

    #[test]
    fn derivative_and_slices() {
        let tr = cspec();
        let x = p(&tr, "z1 + 3*t^2*z1^2 + t*z1");
        assert_eq!(x.derivative_t(), p(&tr, "z1 + 6*t*z1^2"));
        assert_eq!(x.t_coefficient(2), p(&tr, "3*z1^2"));
        assert_eq!(x.t_coefficient(0), p(&tr, "z1"));
        assert!(x.t_coefficient(2).is_t_free());
        assert_eq!(x.z_order(), Some(1));
    }

    fn catalan_auto() -> Automorphism {
        // F = z - t z^2 in one commuting variable.
        let tr = cspec();
        let h1 = SeriesVector::new(&tr, vec![p(&tr, "z1^2")]);
        Automorphism::new(&tr, 1, [(1u32, h1)].into_iter().collect()).unwrap()
    }

    #[test]
    fn automorphism_validation() {
        let tr = cspec();
        let bad_t = SeriesVector::new(&tr, vec![p(&tr, "t*z1^2")]);
        assert!(Automorphism::new(&tr, 1, [(1u32, bad_t)].into_iter().collect()).is_err());
        let const_term = SeriesVector::new(&tr, vec![p(&tr, "1 + z1^2")]);
        assert!(Automorphism::new(&tr, 1, [(1u32, const_term)].into_iter().collect()).is_err());
        let low_order = SeriesVector::new(&tr, vec![p(&tr, "z1")]);
        assert!(Automorphism::new(&tr, 2, [(1u32, low_order)].into_iter().collect()).is_err());
        let zero_weight = SeriesVector::new(&tr, vec![p(&tr, "z1^2")]);
        assert!(Automorphism::new(&tr, 1, [(0u32, zero_weight)].into_iter().collect()).is_err());
    }

    #[test]
    fn fixed_point_inverse_is_catalan() {
        // G = z + t z^2 + 2 t^2 z^3 + 5 t^3 z^4 + 14 t^4 z^5 + ...
        let auto = catalan_auto();
        let g = auto.fixed_point_inverse().unwrap();
        let catalan = [1i64, 1, 2, 5, 14, 42, 132, 429];
        for (k, &c) in catalan.iter().enumerate().take(8) {
            let word = vec![0u16; k + 1];
            assert_eq!(g.comp(0).coeff(&word, k), qi(c), "t^{}", k);
        }
        // Both compositions give the identity.
        let f = auto.f();
        let ident = SeriesVector::identity(auto.trunc());
        assert_eq!(f.compose(&g).unwrap(), ident);
        assert_eq!(g.compose(&f).unwrap(), ident);
    }

    #[test]
    fn two_variable_inverse_composes_to_identity() {
        // F1 = z1 - t z2 z1, F2 = z2 - t^2 z1^2 (noncommutative).
        let tr = TruncationSpec::new(2, 8, 6, false);
        let h1 = SeriesVector::new(&tr, vec![p(&tr, "z2*z1"), p(&tr, "0")]);
        let h2 = SeriesVector::new(&tr, vec![p(&tr, "0"), p(&tr, "z1^2")]);
        let auto =
            Automorphism::new(&tr, 1, [(1u32, h1), (2u32, h2)].into_iter().collect()).unwrap();
        let g = auto.fixed_point_inverse().unwrap();
        let ident = SeriesVector::identity(&tr);
        assert_eq!(auto.f().compose(&g).unwrap(), ident);
        assert_eq!(g.compose(&auto.f()).unwrap(), ident);
        assert_ne!(g, ident);
    }

    #[test]
    fn map_file_roundtrip() {
        let auto = catalan_auto();
        let json = auto.to_json();
        let back = Automorphism::from_json(&json).unwrap();
        assert_eq!(back.f(), auto.f());
        assert_eq!(back.alpha(), auto.alpha());
        assert_eq!(back.weights(), auto.weights());
    }

    #[test]
    fn map_file_rejects_bad_data() {
        assert!(Automorphism::from_json("{}").is_err());
        let bad_vars = r#"{"vars":["x"],"commutative":true,"alpha":1,
            "truncation":{"t_order":4,"z_degree":5},
            "H":[{"m":1,"component":1,"series":"z1^2"}]}"#;
        assert!(Automorphism::from_json(bad_vars).is_err());
        let bad_comp = r#"{"vars":["z1"],"commutative":true,"alpha":1,
            "truncation":{"t_order":4,"z_degree":5},
            "H":[{"m":1,"component":2,"series":"z1^2"}]}"#;
        assert!(Automorphism::from_json(bad_comp).is_err());
    }

    proptest! {
        #[test]
        fn ring_laws(
            xs in prop::collection::vec((0usize..6, 0usize..3, -4i64..=4), 1..6),
            ys in prop::collection::vec((0usize..6, 0usize..3, -4i64..=4), 1..6),
            zs in prop::collection::vec((0usize..6, 0usize..3, -4i64..=4), 1..6),
        ) {
            let tr = TruncationSpec::new(2, 5, 4, false);
            let build = |data: &[(usize, usize, i64)]| {
                let words: [&[u16]; 6] = [&[], &[0], &[1], &[0, 1], &[1, 0], &[0, 0]];
                let mut s = NCSeries::zero(&tr);
                for &(w, k, c) in data {
                    s.add_term(words[w].to_vec(), k, qi(c));
                }
                s
            };
            let a = build(&xs);
            let b = build(&ys);
            let c = build(&zs);
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&NCSeries::one(&tr)), a.clone());
            prop_assert_eq!(a.sub(&a), NCSeries::zero(&tr));
            // Display roundtrip on arbitrary series.
            prop_assert_eq!(NCSeries::parse(&tr, &a.to_string()).unwrap(), a);
        }
    }
}
