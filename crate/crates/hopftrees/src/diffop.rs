//! Differential operators on truncated series, and the tree calculus they
//! generate.
//!
//! A derivation [u d/dz] sends z_i to u_i and obeys the word Leibniz rule:
//! one letter at a time is replaced by its image. The grafting operator
//! B+(d_1, ..., d_m) freezes the Leibniz rule: it replaces m distinct letter
//! positions simultaneously, one per derivation, summed over all injective
//! assignments (zero on words shorter than m). Operators compose, combine
//! linearly with rational t-polynomial scalars, and act on series and on
//! series vectors componentwise.
//!
//! Coefficient series of derivations must have z-order at least 1; this
//! keeps every operator exact on the truncated ring.
//!
//! On top of this the module builds, for a formal automorphism
//! F = z - H_t(z):
//!
//! * the substitution expansions f(t), g(t) with f(-t) u = u(F_t) and
//!   g(t) u = u(G_t), as operator t-series with t-free coefficients, plus
//!   d(t) = log g(t) and the derivation series h, m with g' = g h = m g;
//! * the tree series P_T (replace the root piece H and graft upward) with
//!   the normalization by tree symmetry;
//! * tree expansions of the inverse, the D-Log, the formal s-flow and
//!   integer powers of F;
//! * the separating automorphism of a tree, whose P series vanishes on
//!   every other tree up to the truncation weight.

use crate::hopf_ck::CKVector;
use crate::hopf_gl::GLVector;
use crate::ncseries::{Automorphism, NCSeries, SeriesError, SeriesVector, TruncationSpec, Word};
use crate::orderpoly::{tree_order_polynomial, varphi, SPoly};
use crate::trees::{Tree, TreeEnumerator};
use crate::{qi, Q};
use num::Zero;
use std::collections::{BTreeMap, HashMap};

/// A derivation [u d/dz]: z_i maps to u_i, extended by the Leibniz rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    coeffs: SeriesVector,
}

impl Derivation {
    /// Every nonzero coefficient component must have z-order >= 1.
    pub fn new(coeffs: SeriesVector) -> Self {
        for (i, c) in coeffs.comps().iter().enumerate() {
            assert!(
                c.z_order().map_or(true, |o| o >= 1),
                "derivation coefficient {} has a z-degree-0 term",
                i + 1
            );
        }
        Derivation { coeffs }
    }

    pub fn coeffs(&self) -> &SeriesVector {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    /// Leibniz action: sum over letter positions of the word with that
    /// letter replaced by its image series.
    pub fn apply(&self, x: &NCSeries) -> NCSeries {
        let tr = x.trunc().clone();
        let mut out = NCSeries::zero(&tr);
        for (w, k, c) in x.iter_terms() {
            for p in 0..w.len() {
                let image = self.coeffs.comp(w[p] as usize);
                for (uw, uk, uc) in image.iter_terms() {
                    if k + uk > tr.t_order || w.len() - 1 + uw.len() > tr.z_degree {
                        continue;
                    }
                    let mut nw = Word::with_capacity(w.len() - 1 + uw.len());
                    nw.extend_from_slice(&w[..p]);
                    nw.extend_from_slice(uw);
                    nw.extend_from_slice(&w[p + 1..]);
                    out.add_term(nw, k + uk, c * uc);
                }
            }
        }
        out
    }
}

/// Rational polynomial in t used as an operator scalar, ascending powers.
pub type TScalar = Vec<Q>;

fn tscalar_one() -> TScalar {
    vec![qi(1)]
}

/// Operators generated by derivations under grafting, composition and
/// t-polynomial linear combination.
#[derive(Clone, Debug)]
pub enum DiffOperator {
    Identity,
    Deriv(Derivation),
    /// Frozen simultaneous replacement; `BPlus(vec![])` is the identity.
    BPlus(Vec<Derivation>),
    /// Right-to-left application: `Compose([a, b])` acts as a after b.
    Compose(Vec<DiffOperator>),
    /// Sum of scaled operators; the empty sum is the zero operator.
    LinComb(Vec<(TScalar, DiffOperator)>),
}

impl DiffOperator {
    pub fn zero() -> Self {
        DiffOperator::LinComb(Vec::new())
    }

    pub fn scaled(self, c: Q) -> Self {
        DiffOperator::LinComb(vec![(vec![c], self)])
    }

    pub fn sum(ops: Vec<DiffOperator>) -> Self {
        DiffOperator::LinComb(ops.into_iter().map(|o| (tscalar_one(), o)).collect())
    }

    /// Applies the operator to a series.
    pub fn apply(&self, x: &NCSeries) -> NCSeries {
        match self {
            DiffOperator::Identity => x.clone(),
            DiffOperator::Deriv(d) => d.apply(x),
            DiffOperator::BPlus(ds) => bplus_apply(ds, x),
            DiffOperator::Compose(ops) => {
                let mut acc = x.clone();
                for op in ops.iter().rev() {
                    acc = op.apply(&acc);
                }
                acc
            }
            DiffOperator::LinComb(terms) => {
                let mut out = NCSeries::zero(x.trunc());
                for (scalar, op) in terms {
                    let applied = op.apply(x);
                    for (j, c) in scalar.iter().enumerate() {
                        if !c.is_zero() {
                            out = out.add(&applied.mul_t(j).scale(c));
                        }
                    }
                }
                out
            }
        }
    }

    /// Componentwise action on a series vector.
    pub fn apply_vec(&self, v: &SeriesVector) -> SeriesVector {
        SeriesVector::new(v.trunc(), v.comps().iter().map(|c| self.apply(c)).collect())
    }
}

/// B+(d_1..d_m) on a series: on each word, sum over injective assignments
/// of the m derivations to distinct letter positions, replacing all chosen
/// letters at once.
pub fn bplus_apply(ds: &[Derivation], x: &NCSeries) -> NCSeries {
    let tr = x.trunc().clone();
    let m = ds.len();
    if m == 0 {
        return x.clone();
    }
    let mut out = NCSeries::zero(&tr);
    // Walk the word left to right at the term level, branching on keeping
    // the letter versus assigning an unused derivation and splicing in one
    // term of its image.
    struct Walk<'a> {
        ds: &'a [Derivation],
        w: &'a [u16],
        tr: &'a TruncationSpec,
        out: &'a mut NCSeries,
    }
    impl Walk<'_> {
        fn rec(&mut self, pos: usize, used: u32, word: &mut Word, tpow: usize, coeff: &Q) {
            let m = self.ds.len();
            // Every remaining source position yields at least one letter.
            if word.len() + (self.w.len() - pos) > self.tr.z_degree || tpow > self.tr.t_order {
                return;
            }
            if pos == self.w.len() {
                if used.count_ones() as usize == m {
                    self.out.add_term(word.clone(), tpow, coeff.clone());
                }
                return;
            }
            let remaining = self.w.len() - pos;
            let unassigned = m - used.count_ones() as usize;
            if unassigned > remaining {
                return;
            }
            let letter = self.w[pos];
            word.push(letter);
            self.rec(pos + 1, used, word, tpow, coeff);
            word.pop();
            for i in 0..m {
                if used & (1 << i) != 0 {
                    continue;
                }
                let image = self.ds[i].coeffs().comp(letter as usize);
                for (uw, uk, uc) in image.iter_terms() {
                    let saved = word.len();
                    word.extend_from_slice(uw);
                    self.rec(pos + 1, used | (1 << i), word, tpow + uk, &(coeff * uc));
                    word.truncate(saved);
                }
            }
        }
    }
    for (w, k, c) in x.iter_terms() {
        if w.len() < m {
            continue;
        }
        let mut walk = Walk { ds, w, tr: &tr, out: &mut out };
        walk.rec(0, 0, &mut Word::new(), k, c);
    }
    out
}

/// Applies an operator to every coefficient component of a derivation,
/// yielding the collapsed derivation.
pub fn collapse(op: &DiffOperator, d: &Derivation) -> Derivation {
    Derivation::new(op.apply_vec(d.coeffs()))
}

/// All words of length 0..=max_len over the spec's variables.
pub fn words_up_to(trunc: &TruncationSpec, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::new()];
    let mut layer = vec![Word::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for v in 0..trunc.vars {
                let mut nw = w.clone();
                nw.push(v as u16);
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Operator equality as equal action on all words up to the given length.
pub fn op_eq_on_words(
    a: &DiffOperator,
    b: &DiffOperator,
    trunc: &TruncationSpec,
    max_len: usize,
) -> bool {
    for w in words_up_to(trunc, max_len) {
        let mut mono = NCSeries::zero(trunc);
        mono.add_term(w, 0, qi(1));
        if a.apply(&mono) != b.apply(&mono) {
            return false;
        }
    }
    true
}

/// Operator-valued t-series: coefficient p acts as the t^p part and is kept
/// t-free by construction everywhere in this module.
#[derive(Clone, Debug)]
pub struct OpSeries {
    trunc: TruncationSpec,
    coeffs: Vec<DiffOperator>,
}

impl OpSeries {
    pub fn new(trunc: &TruncationSpec, mut coeffs: Vec<DiffOperator>) -> Self {
        coeffs.resize_with(trunc.t_order + 1, DiffOperator::zero);
        OpSeries { trunc: trunc.clone(), coeffs }
    }

    pub fn zero(trunc: &TruncationSpec) -> Self {
        OpSeries::new(trunc, Vec::new())
    }

    pub fn one(trunc: &TruncationSpec) -> Self {
        OpSeries::new(trunc, vec![DiffOperator::Identity])
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    /// The t-free operator multiplying t^p.
    pub fn coeff(&self, p: usize) -> &DiffOperator {
        &self.coeffs[p]
    }

    /// Splits a series vector by t-power into a derivation-coefficient
    /// operator series: t^p picks up [a_(p) d/dz].
    pub fn from_derivation_series(a: &SeriesVector) -> Self {
        let trunc = a.trunc().clone();
        let coeffs = (0..=trunc.t_order)
            .map(|p| {
                let slice = a.t_coefficient(p);
                if slice.is_zero() {
                    DiffOperator::zero()
                } else {
                    DiffOperator::Deriv(Derivation::new(slice))
                }
            })
            .collect();
        OpSeries::new(&trunc, coeffs)
    }

    pub fn add(&self, other: &OpSeries) -> OpSeries {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| DiffOperator::sum(vec![a.clone(), b.clone()]))
            .collect();
        OpSeries::new(&self.trunc, coeffs)
    }

    pub fn sub(&self, other: &OpSeries) -> OpSeries {
        self.add(&other.scale(&qi(-1)))
    }

    pub fn scale(&self, c: &Q) -> OpSeries {
        let coeffs = self.coeffs.iter().map(|a| a.clone().scaled(c.clone())).collect();
        OpSeries::new(&self.trunc, coeffs)
    }

    /// Cauchy product; composition pairs the coefficient operators.
    pub fn mul(&self, other: &OpSeries) -> OpSeries {
        let n = self.trunc.t_order;
        let mut coeffs = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let mut terms = Vec::new();
            for i in 0..=p {
                terms.push(DiffOperator::Compose(vec![
                    self.coeffs[i].clone(),
                    other.coeffs[p - i].clone(),
                ]));
            }
            coeffs.push(DiffOperator::sum(terms));
        }
        OpSeries::new(&self.trunc, coeffs)
    }

    /// Substitutes -t for t.
    pub fn flip_t(&self) -> OpSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(p, a)| {
                if p % 2 == 1 {
                    a.clone().scaled(qi(-1))
                } else {
                    a.clone()
                }
            })
            .collect();
        OpSeries::new(&self.trunc, coeffs)
    }

    /// d/dt; the top coefficient is lost to truncation, so results are
    /// meaningful to order t_order - 1.
    pub fn derivative_t(&self) -> OpSeries {
        let mut coeffs = Vec::new();
        for p in 1..self.coeffs.len() {
            coeffs.push(self.coeffs[p].clone().scaled(qi(p as i64)));
        }
        OpSeries::new(&self.trunc, coeffs)
    }

    /// exp of a series with zero constant term.
    pub fn exp(&self) -> OpSeries {
        let mut out = OpSeries::one(&self.trunc);
        let mut term = OpSeries::one(&self.trunc);
        for k in 1..=self.trunc.t_order {
            term = term.mul(self).scale(&Q::new(1.into(), k.into()));
            out = out.add(&term);
        }
        out
    }

    /// log of a series with identity constant term.
    pub fn log(&self) -> OpSeries {
        let x = self.sub(&OpSeries::one(&self.trunc));
        let mut out = OpSeries::zero(&self.trunc);
        let mut power = OpSeries::one(&self.trunc);
        for k in 1..=self.trunc.t_order {
            power = power.mul(&x);
            let sign = if k % 2 == 1 { qi(1) } else { qi(-1) };
            out = out.add(&power.scale(&(sign / qi(k as i64))));
        }
        out
    }

    /// Full action including the t-powers.
    pub fn apply(&self, x: &NCSeries) -> NCSeries {
        let mut out = NCSeries::zero(&self.trunc);
        for (p, op) in self.coeffs.iter().enumerate() {
            out = out.add(&op.apply(x).mul_t(p));
        }
        out
    }

    pub fn apply_vec(&self, v: &SeriesVector) -> SeriesVector {
        SeriesVector::new(v.trunc(), v.comps().iter().map(|c| self.apply(c)).collect())
    }

    /// Equality as equal action on all words up to the given length.
    pub fn eq_by_action(&self, other: &OpSeries, max_len: usize) -> bool {
        for w in words_up_to(&self.trunc, max_len) {
            let mut mono = NCSeries::zero(&self.trunc);
            mono.add_term(w, 0, qi(1));
            if self.apply(&mono) != other.apply(&mono) {
                return false;
            }
        }
        true
    }
}

fn compositions(total: u32, parts: &[u32]) -> Vec<Vec<u32>> {
    // Ordered compositions of `total` with parts from the given set.
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(total: u32, parts: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if total == 0 {
            out.push(cur.clone());
            return;
        }
        for &p in parts {
            if p <= total {
                cur.push(p);
                rec(total - p, parts, cur, out);
                cur.pop();
            }
        }
    }
    rec(total, parts, &mut cur, &mut out);
    out
}

/// The substitution expansions of an automorphism: returns (f, g, d) with
/// f(-t) u = u(F_t), g(t) u = u(G_t) and d = log g, all with t-free
/// coefficient operators.
pub fn operator_fg(auto: &Automorphism) -> Result<(OpSeries, OpSeries, OpSeries), SeriesError> {
    let trunc = auto.trunc().clone();
    let n = trunc.t_order as u32;
    let weights = auto.weights();

    // f_p = sum over compositions p = m_1 + ... + m_k with parts in the
    // weight support of (-1)^{k+p} / k! B+([H_{m_1} d], ..., [H_{m_k} d]).
    let mut f_coeffs = vec![DiffOperator::Identity];
    for p in 1..=n {
        let mut terms = Vec::new();
        for comp in compositions(p, &weights) {
            let k = comp.len();
            let mut fact = qi(1);
            for i in 1..=k as i64 {
                fact *= qi(i);
            }
            let sign = if (k as u32 + p) % 2 == 0 { qi(1) } else { qi(-1) };
            let ds = comp
                .iter()
                .map(|&m| Derivation::new(auto.h_piece(m).unwrap().clone()))
                .collect();
            terms.push(DiffOperator::BPlus(ds).scaled(sign / fact));
        }
        f_coeffs.push(DiffOperator::sum(terms));
    }
    let f = OpSeries::new(&trunc, f_coeffs);

    // g_p likewise over all positive compositions, from the t-slices of
    // M = G - z with no sign.
    let g_inv = auto.fixed_point_inverse()?;
    let m_series = g_inv.sub(&SeriesVector::identity(&trunc));
    let mut m_slices: BTreeMap<u32, Derivation> = BTreeMap::new();
    for p in 1..=n {
        let slice = m_series.t_coefficient(p as usize);
        if !slice.is_zero() {
            m_slices.insert(p, Derivation::new(slice));
        }
    }
    let m_weights: Vec<u32> = m_slices.keys().copied().collect();
    let mut g_coeffs = vec![DiffOperator::Identity];
    for p in 1..=n {
        let mut terms = Vec::new();
        for comp in compositions(p, &m_weights) {
            let k = comp.len();
            let mut fact = qi(1);
            for i in 1..=k as i64 {
                fact *= qi(i);
            }
            let ds = comp.iter().map(|&q| m_slices[&q].clone()).collect();
            terms.push(DiffOperator::BPlus(ds).scaled(qi(1) / fact));
        }
        g_coeffs.push(DiffOperator::sum(terms));
    }
    let g = OpSeries::new(&trunc, g_coeffs);

    let d = g.log();
    Ok((f, g, d))
}

/// The derivation series h and m with g' = g h and g' = m g: h comes from
/// (dM/dt)(F_t) and m from (dH_t/dt)(G_t), split by t-power.
pub fn ncs_h_m(auto: &Automorphism) -> Result<(OpSeries, OpSeries), SeriesError> {
    let trunc = auto.trunc().clone();
    let f = auto.f();
    let g = auto.fixed_point_inverse()?;
    let m_series = g.sub(&SeriesVector::identity(&trunc));
    let h_raw = m_series.derivative_t().compose(&f)?;
    let m_raw = auto.h_total().derivative_t().compose(&g)?;
    Ok((OpSeries::from_derivation_series(&h_raw), OpSeries::from_derivation_series(&m_raw)))
}

/// Tree calculus over a fixed automorphism: P series per tree, the grafted
/// operators D, and the expansions built from them. Caches P by tree.
pub struct TreeCalculus<'a> {
    auto: &'a Automorphism,
    p_cache: HashMap<Tree, SeriesVector>,
}

impl<'a> TreeCalculus<'a> {
    pub fn new(auto: &'a Automorphism) -> Self {
        TreeCalculus { auto, p_cache: HashMap::new() }
    }

    pub fn auto(&self) -> &Automorphism {
        self.auto
    }

    /// P_T: the root label picks the piece H_[m]; the branches act on it as
    /// grafted derivations. Zero when any label misses the support.
    pub fn p_tree(&mut self, t: &Tree) -> SeriesVector {
        if let Some(v) = self.p_cache.get(t) {
            return v.clone();
        }
        let trunc = self.auto.trunc();
        let value = match self.auto.h_piece(t.label()) {
            None => SeriesVector::zero(trunc),
            Some(h) => {
                let h = h.clone();
                let ds: Vec<Derivation> = t
                    .children()
                    .iter()
                    .map(|c| Derivation::new(self.p_tree(c)))
                    .collect();
                DiffOperator::BPlus(ds).apply_vec(&h)
            }
        };
        self.p_cache.insert(t.clone(), value.clone());
        value
    }

    /// P_T divided by the symmetry count of T.
    pub fn p_tree_normalized(&mut self, t: &Tree) -> SeriesVector {
        let aut = Q::from_integer(t.aut_order().into());
        self.p_tree(t).scale(&(qi(1) / aut))
    }

    /// D_T for a root-0 tree: grafting of the branch P derivations; the
    /// bare root gives the identity.
    pub fn d_tree(&mut self, t: &Tree) -> DiffOperator {
        assert_eq!(t.label(), 0, "operator trees carry root label 0");
        if t.branch_count() == 0 {
            return DiffOperator::Identity;
        }
        let ds = t
            .children()
            .iter()
            .map(|c| Derivation::new(self.p_tree(c)))
            .collect();
        DiffOperator::BPlus(ds)
    }

    /// The algebra map from root-0 tree combinations to operators.
    pub fn operator_of(&mut self, x: &GLVector) -> DiffOperator {
        let mut terms = Vec::new();
        for (t, c) in x.terms() {
            terms.push((vec![c.clone()], self.d_tree(t)));
        }
        DiffOperator::LinComb(terms)
    }

    /// The linear map sending a combination of single trees to the sum of
    /// its P series.
    pub fn series_of(&mut self, x: &CKVector) -> SeriesVector {
        let mut acc = SeriesVector::zero(self.auto.trunc());
        for (forest, c) in x.terms() {
            assert_eq!(forest.len(), 1, "P series are indexed by single trees");
            acc = acc.add(&self.p_tree(&forest[0]).scale(c));
        }
        acc
    }

    fn enumerator(&self) -> Option<TreeEnumerator> {
        let weights = self.auto.weights();
        if weights.is_empty() {
            return None;
        }
        Some(
            TreeEnumerator::new(&weights, self.auto.trunc().t_order as u64)
                .expect("weights are positive"),
        )
    }

    /// Tree expansion of the inverse: z plus, for every tree of weight up
    /// to the t cap over the weight support, t^{|T|} P_T / aut(T).
    pub fn tree_inverse(&mut self) -> SeriesVector {
        let trunc = self.auto.trunc().clone();
        let mut acc = SeriesVector::identity(&trunc);
        if let Some(e) = self.enumerator() {
            for t in e.trees_up_to(trunc.t_order as u64) {
                let term = self.p_tree_normalized(&t).mul_t(t.weight() as usize);
                acc = acc.add(&term);
            }
        }
        acc
    }

    /// D-Log coefficient series: a = - sum over trees of t^{|T|} varphi(T)
    /// P_T / aut(T), so that exp([a d/dz]) z = F_t.
    pub fn d_log(&mut self) -> SeriesVector {
        let trunc = self.auto.trunc().clone();
        let mut acc = SeriesVector::zero(&trunc);
        if let Some(e) = self.enumerator() {
            for t in e.trees_up_to(trunc.t_order as u64) {
                let phi = varphi(&t);
                if phi.is_zero() {
                    continue;
                }
                let term = self.p_tree_normalized(&t).mul_t(t.weight() as usize);
                acc = acc.add(&term.scale(&phi));
            }
        }
        acc.scale(&qi(-1))
    }

    /// Coefficients of powers of the flow parameter s: the formal flow is
    /// z + sum over trees of t^{|T|} Omega(T, -s) P_T / aut(T), with
    /// flow(1) = F, flow(-1) the inverse and flow(0) = z.
    pub fn flow_coefficients(&mut self) -> Vec<SeriesVector> {
        let trunc = self.auto.trunc().clone();
        let mut powers: Vec<SeriesVector> = Vec::new();
        powers.push(SeriesVector::identity(&trunc));
        if let Some(e) = self.enumerator() {
            for t in e.trees_up_to(trunc.t_order as u64) {
                let omega_neg: SPoly = tree_order_polynomial(&t).reflect();
                let term = self.p_tree_normalized(&t).mul_t(t.weight() as usize);
                for k in 0..=omega_neg.degree().unwrap_or(0) {
                    let c = omega_neg.coeff(k);
                    if c.is_zero() {
                        continue;
                    }
                    while powers.len() <= k {
                        powers.push(SeriesVector::zero(&trunc));
                    }
                    powers[k] = powers[k].add(&term.scale(&c));
                }
            }
        }
        powers
    }

    /// The flow evaluated at a rational parameter.
    pub fn flow(&mut self, s: &Q) -> SeriesVector {
        let coeffs = self.flow_coefficients();
        let mut acc = SeriesVector::zero(self.auto.trunc());
        let mut power = qi(1);
        for c in coeffs {
            acc = acc.add(&c.scale(&power));
            power *= s;
        }
        acc
    }

    /// The m-th compositional power as the flow at s = m (m may be
    /// negative; m = 0 is the identity).
    pub fn mth_power(&mut self, m: i64) -> SeriesVector {
        self.flow(&qi(m))
    }
}

/// Builds the separating automorphism of a tree: v(T) + 1 variables, one
/// per vertex in breadth-first order plus a padding variable. The piece
/// H_[m], at the component of an m-labeled vertex, collects that vertex's
/// child edge variables (the padding power for leaves), padded to uniform
/// degree d = max(alpha, largest child count); all other components vanish.
/// The P series of the result is nonzero at T and vanishes at every other
/// enumerated tree of weight at least |T|, up to truncation weight |T| + 2.
pub fn separating_automorphism(t: &Tree, alpha: usize) -> Automorphism {
    assert!(alpha >= 1, "alpha must be at least 1");
    let n = t.vertices() as usize;
    let vars = n + 1;
    // Breadth-first vertex order: index 0 is the root, edges are named by
    // the child's index.
    let mut order: Vec<Tree> = Vec::new();
    let mut children_of: Vec<Vec<usize>> = Vec::new();
    let mut queue: std::collections::VecDeque<(Tree, usize)> = std::collections::VecDeque::new();
    order.push(t.clone());
    children_of.push(Vec::new());
    queue.push_back((t.clone(), 0));
    while let Some((node, idx)) = queue.pop_front() {
        for c in node.children() {
            let ci = order.len();
            order.push(c.clone());
            children_of.push(Vec::new());
            children_of[idx].push(ci);
            queue.push_back((c.clone(), ci));
        }
    }
    let d = order
        .iter()
        .map(|v| v.branch_count())
        .max()
        .unwrap_or(0)
        .max(alpha);
    let labels: Vec<u32> = {
        let mut ls: Vec<u32> = order.iter().map(|v| v.label()).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    };
    let weight = t.weight() as usize;
    let t_order = weight + 2;
    let z_degree = d + (t_order.saturating_sub(1)) * d.saturating_sub(1).max(1) + 1;
    let trunc = TruncationSpec::new(vars, z_degree, t_order, false);
    let pad = n; // 0-based index of the padding variable z_{n+1}

    let mut h: BTreeMap<u32, SeriesVector> = BTreeMap::new();
    for &m in &labels {
        let mut comps: Vec<NCSeries> = (0..vars).map(|_| NCSeries::zero(&trunc)).collect();
        for (i, v) in order.iter().enumerate() {
            if v.label() != m {
                continue;
            }
            let mut word: Word = children_of[i].iter().map(|&ci| ci as u16).collect();
            while word.len() < d {
                word.push(pad as u16);
            }
            comps[i].add_term(word, 0, qi(1));
        }
        h.insert(m, SeriesVector::new(&trunc, comps));
    }
    Automorphism::new(&trunc, alpha, h).expect("construction satisfies the invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf_gl::{gl_act_on_tree, gl_product, GLVector};
    use crate::ncseries::random_automorphism;
    use crate::q;
    use crate::trees::parse_tree;
    use itertools::Itertools;

    fn tr1() -> TruncationSpec {
        TruncationSpec::new(1, 10, 8, true)
    }

    fn p(tr: &TruncationSpec, s: &str) -> NCSeries {
        NCSeries::parse(tr, s).unwrap()
    }

    fn catalan() -> Automorphism {
        let tr = tr1();
        let h1 = SeriesVector::new(&tr, vec![p(&tr, "z1^2")]);
        Automorphism::new(&tr, 1, [(1u32, h1)].into_iter().collect()).unwrap()
    }

    fn tree(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    // Independent oracle for B+: enumerate ordered selections of m distinct
    // positions with itertools and splice term by term.
    fn bplus_oracle(ds: &[Derivation], x: &NCSeries) -> NCSeries {
        let tr = x.trunc().clone();
        let mut out = NCSeries::zero(&tr);
        for (w, k, c) in x.iter_terms() {
            for positions in (0..w.len()).permutations(ds.len()) {
                let mut images: Vec<NCSeries> = Vec::new();
                for (i, &pos) in positions.iter().enumerate() {
                    images.push(ds[i].coeffs().comp(w[pos] as usize).clone());
                }
                // Rebuild the word as a product of letters and images.
                let mut acc = NCSeries::one(&tr);
                for (pos, &letter) in w.iter().enumerate() {
                    match positions.iter().position(|&p| p == pos) {
                        Some(i) => acc = acc.mul(&images[i]),
                        None => acc = acc.mul(&NCSeries::var(&tr, letter as usize)),
                    }
                }
                out = out.add(&acc.mul_t(k).scale(c));
            }
        }
        out
    }

    #[test]
    fn derivation_leibniz_on_words() {
        let tr = TruncationSpec::new(2, 8, 4, false);
        let d = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z2*z2"), p(&tr, "z1")]));
        // [u d](z1 z2) = u1 z2 + z1 u2.
        let got = d.apply(&p(&tr, "z1*z2"));
        assert_eq!(got, p(&tr, "z2*z2*z2 + z1*z1"));
        // Leibniz: d(xy) = d(x)y + x d(y).
        let x = p(&tr, "z1*z2 + 2*z2");
        let y = p(&tr, "z2*z1");
        assert_eq!(
            d.apply(&x.mul(&y)),
            d.apply(&x).mul(&y).add(&x.mul(&d.apply(&y)))
        );
    }

    #[test]
    fn bplus_matches_oracle() {
        let tr = TruncationSpec::new(2, 8, 4, false);
        let d1 = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z2*z2"), p(&tr, "z1")]));
        let d2 = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z1*z2"), p(&tr, "0")]));
        let d3 = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "t*z2"), p(&tr, "z2")]));
        let inputs = [
            p(&tr, "z1"),
            p(&tr, "z1*z2"),
            p(&tr, "z2*z1*z1 - 3*z2^2"),
            p(&tr, "1 + t*z1*z2*z1"),
        ];
        for x in &inputs {
            for ds in [
                vec![d1.clone()],
                vec![d1.clone(), d2.clone()],
                vec![d2.clone(), d3.clone()],
                vec![d1.clone(), d2.clone(), d3.clone()],
            ] {
                assert_eq!(bplus_apply(&ds, x), bplus_oracle(&ds, x));
            }
        }
    }

    #[test]
    fn bplus_is_symmetric_and_vanishes_on_short_words() {
        let tr = TruncationSpec::new(2, 8, 4, false);
        let d1 = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z2*z2"), p(&tr, "z1")]));
        let d2 = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z1*z2"), p(&tr, "0")]));
        let x = p(&tr, "z1*z2*z1");
        assert_eq!(
            bplus_apply(&[d1.clone(), d2.clone()], &x),
            bplus_apply(&[d2.clone(), d1.clone()], &x)
        );
        // Three derivations on a length-2 word give zero.
        let short = p(&tr, "z1*z2");
        assert!(bplus_apply(&[d1.clone(), d2.clone(), d1], &short).is_zero());
        // B+ of one derivation is the derivation.
        let one = bplus_apply(&[d2.clone()], &x);
        assert_eq!(one, d2.apply(&x));
    }

    #[test]
    fn compose_by_collapse_identity() {
        // xi . B+(d_1..d_m) = B+(xi, d_1..d_m) + sum_i B+(.., xi > d_i, ..).
        let tr = TruncationSpec::new(2, 7, 3, false);
        let xi = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z2*z1"), p(&tr, "z1*z1")]));
        let d1 = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z1*z2"), p(&tr, "z2")]));
        let d2 = Derivation::new(SeriesVector::new(&tr, vec![p(&tr, "z2^2"), p(&tr, "0")]));
        for ds in [vec![d1.clone()], vec![d1.clone(), d2.clone()]] {
            let lhs = DiffOperator::Compose(vec![
                DiffOperator::Deriv(xi.clone()),
                DiffOperator::BPlus(ds.clone()),
            ]);
            let mut terms = Vec::new();
            let mut with_xi = ds.clone();
            with_xi.push(xi.clone());
            terms.push(DiffOperator::BPlus(with_xi));
            for i in 0..ds.len() {
                let mut collapsed = ds.clone();
                collapsed[i] = collapse(&DiffOperator::Deriv(xi.clone()), &ds[i]);
                terms.push(DiffOperator::BPlus(collapsed));
            }
            let rhs = DiffOperator::sum(terms);
            assert!(op_eq_on_words(&lhs, &rhs, &tr, 4));
        }
    }

    #[test]
    fn p_tree_catalan_values() {
        let auto = catalan();
        let mut calc = TreeCalculus::new(&auto);
        let tr = auto.trunc().clone();
        assert_eq!(calc.p_tree(&tree("(1)")).comp(0), &p(&tr, "z1^2"));
        assert_eq!(calc.p_tree(&tree("(1 (1))")).comp(0), &p(&tr, "2*z1^3"));
        assert_eq!(calc.p_tree(&tree("(1 (1 (1)))")).comp(0), &p(&tr, "4*z1^4"));
        assert_eq!(calc.p_tree(&tree("(1 (1) (1))")).comp(0), &p(&tr, "2*z1^4"));
        // Labels outside the support kill the series.
        assert!(calc.p_tree(&tree("(2)")).is_zero());
        assert!(calc.p_tree(&tree("(1 (2))")).is_zero());
    }

    #[test]
    fn grafted_operator_action_reads_off_p() {
        // D_S applied to H_[m] is P of S with its root relabeled m.
        let tr = TruncationSpec::new(2, 6, 4, false);
        let auto = random_automorphism(7, &tr, &[1, 2], 2, 1);
        let mut calc = TreeCalculus::new(&auto);
        for s in ["(0)", "(0 (1))", "(0 (1) (2))", "(0 (2 (1)))"] {
            let s = tree(s);
            for &m in &auto.weights() {
                let op = calc.d_tree(&s);
                let got = op.apply_vec(auto.h_piece(m).unwrap());
                let want = calc.p_tree(&s.relabel_root(m));
                assert_eq!(got, want, "tree {} m {}", s, m);
            }
        }
    }

    #[test]
    fn tree_inverse_matches_fixed_point() {
        let auto = catalan();
        let mut calc = TreeCalculus::new(&auto);
        assert_eq!(calc.tree_inverse(), auto.fixed_point_inverse().unwrap());

        let tr = TruncationSpec::new(2, 7, 5, false);
        let auto = random_automorphism(11, &tr, &[1, 2], 2, 1);
        let mut calc = TreeCalculus::new(&auto);
        assert_eq!(calc.tree_inverse(), auto.fixed_point_inverse().unwrap());
    }

    #[test]
    fn dlog_catalan_low_orders() {
        // a = -t z^2 - t^2 z^3 + O(t^3).
        let auto = catalan();
        let mut calc = TreeCalculus::new(&auto);
        let a = calc.d_log();
        let tr = auto.trunc().clone();
        assert_eq!(a.comp(0).t_coefficient(1), p(&tr, "-z1^2").t_coefficient(0));
        let t2 = a.comp(0).t_coefficient(2);
        assert_eq!(t2, p(&tr, "-z1^3"));
    }

    #[test]
    fn dlog_exponentiates_to_f() {
        for (seed, vars) in [(3u64, 1), (5, 2)] {
            let tr = TruncationSpec::new(vars, 7, 4, vars == 1);
            let auto = random_automorphism(seed, &tr, &[1, 2], 2, 1);
            let mut calc = TreeCalculus::new(&auto);
            let a = calc.d_log();
            let l = OpSeries::from_derivation_series(&a);
            let ident = SeriesVector::identity(&tr);
            assert_eq!(l.exp().apply_vec(&ident), auto.f(), "seed {}", seed);
        }
    }

    #[test]
    fn flow_endpoints() {
        let tr = TruncationSpec::new(2, 7, 4, false);
        let auto = random_automorphism(13, &tr, &[1, 2], 2, 1);
        let mut calc = TreeCalculus::new(&auto);
        let ident = SeriesVector::identity(&tr);
        assert_eq!(calc.flow(&qi(0)), ident);
        assert_eq!(calc.flow(&qi(1)), auto.f());
        assert_eq!(calc.flow(&qi(-1)), auto.fixed_point_inverse().unwrap());
    }

    #[test]
    fn powers_compose() {
        let auto = catalan();
        let mut calc = TreeCalculus::new(&auto);
        let f = auto.f();
        let f2 = f.compose(&f).unwrap();
        let f3 = f2.compose(&f).unwrap();
        assert_eq!(calc.mth_power(2), f2);
        assert_eq!(calc.mth_power(3), f3);
        let g = auto.fixed_point_inverse().unwrap();
        assert_eq!(calc.mth_power(-2), g.compose(&g).unwrap());
        assert_eq!(calc.mth_power(0), SeriesVector::identity(auto.trunc()));
    }

    #[test]
    fn half_flow_squares_to_f() {
        let auto = catalan();
        let mut calc = TreeCalculus::new(&auto);
        let half = calc.flow(&q(1, 2));
        assert_eq!(half.compose(&half).unwrap(), auto.f());
    }

    #[test]
    fn operator_f_substitutes() {
        // f(-t) z = F and g(t) z = G, and f(-t) g(t) = 1 by action.
        for (seed, vars) in [(17u64, 1), (19, 2)] {
            let tr = TruncationSpec::new(vars, 6, 4, vars == 1);
            let auto = random_automorphism(seed, &tr, &[1, 2], 1, 1);
            let (f, g, d) = operator_fg(&auto).unwrap();
            let ident = SeriesVector::identity(&tr);
            assert_eq!(f.flip_t().apply_vec(&ident), auto.f(), "seed {}", seed);
            assert_eq!(g.apply_vec(&ident), auto.fixed_point_inverse().unwrap());
            let prod = f.flip_t().mul(&g);
            assert!(prod.eq_by_action(&OpSeries::one(&tr), 3), "seed {}", seed);
            let prod = g.mul(&f.flip_t());
            assert!(prod.eq_by_action(&OpSeries::one(&tr), 3), "seed {}", seed);
            // exp d = g.
            assert!(d.exp().eq_by_action(&g, 3), "seed {}", seed);
        }
    }

    #[test]
    fn operator_f_substitution_full_action() {
        // f(-t) u = u(F) for nontrivial u, not just the identity vector.
        let tr = tr1();
        let auto = catalan();
        let (f, _, _) = operator_fg(&auto).unwrap();
        let u = p(&tr, "z1^3 - 2*z1");
        let expected = u
            .substitute(std::slice::from_ref(auto.f().comp(0)))
            .unwrap();
        assert_eq!(f.flip_t().apply(&u), expected);
    }

    #[test]
    fn graded_f_raises_degree() {
        // With H_[m] homogeneous of z-degree m + 1, the t^m coefficient of
        // f raises word length by exactly m.
        let tr = TruncationSpec::new(1, 12, 6, true);
        let h1 = SeriesVector::new(&tr, vec![p(&tr, "z1^2")]);
        let h2 = SeriesVector::new(&tr, vec![p(&tr, "2*z1^3")]);
        let auto =
            Automorphism::new(&tr, 1, [(1u32, h1), (2u32, h2)].into_iter().collect()).unwrap();
        let (f, _, _) = operator_fg(&auto).unwrap();
        for m in 0..=4usize {
            for len in 1..=4usize {
                let mut mono = NCSeries::zero(&tr);
                mono.add_term(vec![0; len], 0, qi(1));
                let image = f.coeff(m).apply(&mono);
                for (w, _, _) in image.iter_terms() {
                    assert_eq!(w.len(), len + m, "m={} len={}", m, len);
                }
            }
        }
    }

    #[test]
    fn ue3_ue4_by_action() {
        // g' = g h and g' = m g, to order t_order - 1.
        let tr = TruncationSpec::new(2, 5, 4, false);
        let auto = random_automorphism(23, &tr, &[1, 2], 1, 1);
        let (_, g, _) = operator_fg(&auto).unwrap();
        let (h, m) = ncs_h_m(&auto).unwrap();
        let lhs = g.derivative_t();
        let rhs_h = g.mul(&h);
        let rhs_m = m.mul(&g);
        for w in words_up_to(&tr, 3) {
            let mut mono = NCSeries::zero(&tr);
            mono.add_term(w, 0, qi(1));
            let l = lhs.apply(&mono);
            let rh = rhs_h.apply(&mono);
            let rm = rhs_m.apply(&mono);
            for k in 0..tr.t_order {
                assert_eq!(l.t_coefficient(k), rh.t_coefficient(k), "h at t^{}", k);
                assert_eq!(l.t_coefficient(k), rm.t_coefficient(k), "m at t^{}", k);
            }
        }
    }

    #[test]
    fn action_intertwines_with_grafting() {
        // A(S) P_T = sum of P over S acting on T, for the module action.
        let tr = TruncationSpec::new(2, 5, 4, false);
        let auto = random_automorphism(29, &tr, &[1, 2], 1, 1);
        let mut calc = TreeCalculus::new(&auto);
        let e = TreeEnumerator::new(&[1, 2], 3).unwrap();
        for s in e.grafted_up_to(3) {
            let vs = GLVector::from_tree(s.clone());
            for t in e.trees_up_to(3) {
                let op = calc.operator_of(&vs);
                let lhs = op.apply_vec(&calc.p_tree(&t));
                let rhs = calc.series_of(&gl_act_on_tree(&vs, &t));
                assert_eq!(lhs, rhs, "S {} T {}", s, t);
            }
        }
    }

    #[test]
    fn operator_of_is_algebra_map() {
        // A(x y) = A(x) A(y) as operators, on low-degree words.
        let tr = TruncationSpec::new(2, 5, 4, false);
        let auto = random_automorphism(31, &tr, &[1, 2], 1, 1);
        let mut calc = TreeCalculus::new(&auto);
        let e = TreeEnumerator::new(&[1, 2], 2).unwrap();
        for a in e.grafted_up_to(2) {
            for b in e.grafted_up_to(2) {
                let va = GLVector::from_tree(a.clone());
                let vb = GLVector::from_tree(b.clone());
                let lhs = calc.operator_of(&gl_product(&va, &vb));
                let oa = calc.operator_of(&va);
                let ob = calc.operator_of(&vb);
                let rhs = DiffOperator::Compose(vec![oa, ob]);
                assert!(op_eq_on_words(&lhs, &rhs, &tr, 3), "{} {}", a, b);
            }
        }
    }

    #[test]
    fn separating_automorphism_shape() {
        let t = tree("(1)");
        let auto = separating_automorphism(&t, 1);
        assert_eq!(auto.trunc().vars, 2);
        let h1 = auto.h_piece(1).unwrap();
        let tr = auto.trunc().clone();
        assert_eq!(h1.comp(0), &p(&tr, "z2"));
        assert!(h1.comp(1).is_zero());
        let mut calc = TreeCalculus::new(&auto);
        let pt = calc.p_tree(&t);
        assert_eq!(pt.comp(0), &p(&tr, "z2"));
        assert!(pt.comp(1).is_zero());

        let ch = tree("(1 (1))");
        let auto = separating_automorphism(&ch, 1);
        let tr = auto.trunc().clone();
        let h1 = auto.h_piece(1).unwrap();
        assert_eq!(h1.comp(0), &p(&tr, "z2"));
        assert_eq!(h1.comp(1), &p(&tr, "z3"));
        assert!(h1.comp(2).is_zero());
        let mut calc = TreeCalculus::new(&auto);
        let pt = calc.p_tree(&ch);
        assert_eq!(pt.comp(0), &p(&tr, "z3"));
        assert!(pt.comp(1).is_zero());
    }

    #[test]
    fn separating_automorphism_separates() {
        for s in ["(1)", "(1 (1))", "(1 (1) (1))", "(1 (1 (1)))", "(2 (1) (1))", "(1 (2))"] {
            let t = tree(s);
            let auto = separating_automorphism(&t, 1);
            let mut calc = TreeCalculus::new(&auto);
            assert!(!calc.p_tree(&t).is_zero(), "P_T vanished for {}", s);
            let e = TreeEnumerator::new(&auto.weights(), auto.trunc().t_order as u64).unwrap();
            for other in e.trees_up_to(auto.trunc().t_order as u64) {
                if other == t || other.weight() < t.weight() {
                    continue;
                }
                assert!(calc.p_tree(&other).is_zero(), "P nonzero at {} for {}", other, s);
            }
        }
    }
}
