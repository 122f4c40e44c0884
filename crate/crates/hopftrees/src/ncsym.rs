//! Noncommutative symmetric functions and NCS systems.
//!
//! NSym is the free associative algebra on generators L1, L2, ... graded by
//! weight (the subscript sum). The complete, power-sum and related bases
//! are solved order by order from the defining series equations rather than
//! through closed formulas:
//!
//! * UE-1: lambda(-t) sigma(t) = 1 yields S;
//! * the formal logarithm of sigma(t) yields Phi;
//! * UE-3: d sigma/dt = sigma psi yields Psi;
//! * UE-4: d sigma/dt = xi sigma yields Xi.
//!
//! An NCS system packages five t-series (f, g, d, h, m) over any host
//! algebra; `verify_ncs` checks the five equations order by order through
//! a small host interface, so the same verifier runs over NSym, over the
//! Grossman-Larson algebra, and over differential operators.
//!
//! The tree system has f supported on shrubs with sign (-1)^(o(T)+|T|),
//! g over all grafted trees, d over primitives weighted by theta, h over
//! chains weighted by the leaf label and m over primitives weighted by the
//! root-child label, each tree divided by its symmetry count. The
//! specializations send L_m to the t^m coefficient of the respective f
//! series; their compatibility with the operator realization is checked by
//! `verify_cd2`, and the rank test `injectivity_rank` exhibits the word
//! basis of weight m mapping to independent tree combinations.

use crate::diffop::{ncs_h_m, op_eq_on_words, operator_fg, DiffOperator, OpSeries, TreeCalculus};
use crate::hopf_gl::{gl_product, GLVector};
use crate::ncseries::Automorphism;
use crate::orderpoly::ThetaTable;
use crate::trees::{
    is_grafted_chain, is_grafted_primitive, is_grafted_shrub, path_leaf_label, Tree,
    TreeEnumerator, TreesError,
};
use crate::{format_q, qi, Q};
use num::Zero;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// A word in the generators; entry k stands for L_k, so entries are >= 1.
pub type LWord = Vec<u32>;

fn lword_weight(w: &[u32]) -> u32 {
    w.iter().sum()
}

/// An element of NSym: a finite rational combination of generator words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NSym {
    terms: BTreeMap<LWord, Q>,
}

impl NSym {
    pub fn zero() -> Self {
        NSym::default()
    }

    pub fn one() -> Self {
        let mut x = NSym::default();
        x.add_term(Vec::new(), qi(1));
        x
    }

    /// The generator L_m.
    pub fn gen(m: u32) -> Self {
        assert!(m >= 1, "generators are indexed from 1");
        let mut x = NSym::default();
        x.add_term(vec![m], qi(1));
        x
    }

    pub fn from_word(w: LWord) -> Self {
        assert!(w.iter().all(|&k| k >= 1), "letters are indexed from 1");
        let mut x = NSym::default();
        x.add_term(w, qi(1));
        x
    }

    pub fn add_term(&mut self, w: LWord, c: Q) {
        let entry = self.terms.entry(w).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &[u32]) -> Q {
        self.terms.get(w).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LWord, &Q)> {
        self.terms.iter()
    }

    /// The largest word weight with a nonzero coefficient.
    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|w| lword_weight(w)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &NSym) -> NSym {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &NSym) -> NSym {
        self.add(&other.scale(&qi(-1)))
    }

    pub fn scale(&self, c: &Q) -> NSym {
        if c.is_zero() {
            return NSym::zero();
        }
        NSym {
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        }
    }

    /// Concatenation product, extended bilinearly.
    pub fn mul(&self, other: &NSym) -> NSym {
        let mut out = NSym::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(w, c1 * c2);
            }
        }
        out
    }

    /// The weight-m homogeneous component.
    pub fn component(&self, m: u32) -> NSym {
        NSym {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| lword_weight(w) == m)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }
}

fn format_lword(w: &[u32]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.iter().map(|k| format!("L{}", k)).collect::<Vec<_>>().join(".")
}

impl fmt::Display for NSym {
    /// Rational-weighted generator words, e.g. `1*L1.L1 - 1*L2`, ordered by
    /// weight and then lexicographically.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&LWord> = self.terms.keys().collect();
        keys.sort_by_key(|w| (lword_weight(w), (*w).clone()));
        for (i, w) in keys.iter().enumerate() {
            let c = &self.terms[*w];
            let mag = if *c < Q::zero() { format_q(&-c.clone()) } else { format_q(c) };
            if i == 0 {
                if *c < Q::zero() {
                    write!(f, "-")?;
                }
            } else if *c < Q::zero() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", mag, format_lword(w))?;
        }
        Ok(())
    }
}

/// An element of NSym tensor NSym, for the coproduct.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NSymTensor {
    terms: BTreeMap<(LWord, LWord), Q>,
}

impl NSymTensor {
    pub fn zero() -> Self {
        NSymTensor::default()
    }

    pub fn from_pair(l: &NSym, r: &NSym) -> Self {
        let mut out = NSymTensor::default();
        for (wl, cl) in l.terms() {
            for (wr, cr) in r.terms() {
                out.add_term(wl.clone(), wr.clone(), cl * cr);
            }
        }
        out
    }

    pub fn add_term(&mut self, l: LWord, r: LWord, c: Q) {
        let entry = self.terms.entry((l, r)).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &NSymTensor) -> NSymTensor {
        let mut out = self.clone();
        for ((l, r), c) in &other.terms {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &NSymTensor) -> NSymTensor {
        let mut out = self.clone();
        for ((l, r), c) in &other.terms {
            out.add_term(l.clone(), r.clone(), -c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Componentwise product.
    pub fn mul(&self, other: &NSymTensor) -> NSymTensor {
        let mut out = NSymTensor::default();
        for ((l1, r1), c1) in &self.terms {
            for ((l2, r2), c2) in &other.terms {
                let mut l = l1.clone();
                l.extend_from_slice(l2);
                let mut r = r1.clone();
                r.extend_from_slice(r2);
                out.add_term(l, r, c1 * c2);
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(LWord, LWord), &Q)> {
        self.terms.iter()
    }
}

/// The divided-power coproduct: L_m splits as the sum of L_i tensor L_j
/// over i + j = m with L_0 the empty word, extended as an algebra map.
pub fn nsym_coproduct(x: &NSym) -> NSymTensor {
    let mut out = NSymTensor::zero();
    for (w, c) in x.terms() {
        let mut acc = NSymTensor::from_pair(&NSym::one(), &NSym::one());
        for &m in w {
            let mut letter = NSymTensor::zero();
            for i in 0..=m {
                let l = if i == 0 { Vec::new() } else { vec![i] };
                let r = if i == m { Vec::new() } else { vec![m - i] };
                letter.add_term(l, r, qi(1));
            }
            acc = acc.mul(&letter);
        }
        for ((l, r), v) in acc.terms.iter() {
            out.add_term(l.clone(), r.clone(), v * c);
        }
    }
    out
}

pub fn nsym_counit(x: &NSym) -> Q {
    x.coeff(&[])
}

/// The antipode: on generators S(L_m) = -L_m - sum of S(L_i) L_{m-i},
/// extended as an algebra antihomomorphism.
pub fn nsym_antipode(x: &NSym) -> NSym {
    let maxw = x.max_weight();
    // s_gen[m] = S(L_m), built upward.
    let mut s_gen: Vec<NSym> = vec![NSym::zero(); maxw as usize + 1];
    for m in 1..=maxw {
        let mut acc = NSym::gen(m).scale(&qi(-1));
        for i in 1..m {
            acc = acc.sub(&s_gen[i as usize].mul(&NSym::gen(m - i)));
        }
        s_gen[m as usize] = acc;
    }
    let mut out = NSym::zero();
    for (w, c) in x.terms() {
        let mut acc = NSym::one();
        for &m in w.iter().rev() {
            acc = acc.mul(&s_gen[m as usize]);
        }
        out = out.add(&acc.scale(c));
    }
    out
}

/// The solved basis tables up to a weight cap: index m holds the weight-m
/// element; S starts at the unit, the other three at zero.
pub struct Bases {
    pub max_weight: usize,
    pub s: Vec<NSym>,
    pub phi: Vec<NSym>,
    pub psi: Vec<NSym>,
    pub xi: Vec<NSym>,
}

/// Solves S, Phi, Psi, Xi from the unit equations order by order.
pub fn solve_bases(max_weight: usize) -> Bases {
    let n = max_weight;
    let mut s = vec![NSym::one()];
    for m in 1..=n {
        // lambda(-t) sigma(t) = 1: S_m = sum (-1)^(i+1) L_i S_{m-i}.
        let mut acc = NSym::zero();
        for i in 1..=m {
            let sign = if i % 2 == 1 { qi(1) } else { qi(-1) };
            acc = acc.add(&NSym::gen(i as u32).mul(&s[m - i]).scale(&sign));
        }
        s.push(acc);
    }
    // Phi_m / m = [t^m] log sigma(t); multiply back by m.
    let mut phi = vec![NSym::zero()];
    for m in 1..=n {
        let mut acc = NSym::zero();
        for k in 1..=m {
            let sign = if k % 2 == 1 { qi(1) } else { qi(-1) };
            let mut comp_sum = NSym::zero();
            for comp in compositions_all(m, k) {
                let mut prod = NSym::one();
                for p in comp {
                    prod = prod.mul(&s[p]);
                }
                comp_sum = comp_sum.add(&prod);
            }
            acc = acc.add(&comp_sum.scale(&(sign / qi(k as i64))));
        }
        phi.push(acc.scale(&qi(m as i64)));
    }
    // d sigma/dt = sigma psi: Psi_m = m S_m - sum S_i Psi_{m-i}.
    let mut psi = vec![NSym::zero()];
    for m in 1..=n {
        let mut acc = s[m].scale(&qi(m as i64));
        for i in 1..m {
            acc = acc.sub(&s[i].mul(&psi[m - i]));
        }
        psi.push(acc);
    }
    // d sigma/dt = xi sigma: Xi_m = m S_m - sum Xi_{m-i} S_i.
    let mut xi = vec![NSym::zero()];
    for m in 1..=n {
        let mut acc = s[m].scale(&qi(m as i64));
        for i in 1..m {
            acc = acc.sub(&xi[m - i].mul(&s[i]));
        }
        xi.push(acc);
    }
    Bases { max_weight: n, s, phi, psi, xi }
}

/// Ordered compositions of `total` into exactly `parts` positive parts.
fn compositions_all(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for p in 1..=total.saturating_sub(parts - 1) {
            cur.push(p);
            rec(total - p, parts - 1, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, &mut cur, &mut out);
    out
}

/// Host interface the NCS verifier needs: a unital algebra over the
/// rationals with an equality test (possibly truncation- or action-based).
pub trait NcsHost {
    type Elem: Clone;
    fn unit(&self) -> Self::Elem;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, c: &Q, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
}

/// Five t-series with coefficients in a host algebra; index is the t-power.
/// f, g, d run to the system's order N; h and m need entries only up to
/// N - 1 since they are compared against the derivative of g.
#[derive(Clone, Debug)]
pub struct NcsTuple<E> {
    pub f: Vec<E>,
    pub g: Vec<E>,
    pub d: Vec<E>,
    pub h: Vec<E>,
    pub m: Vec<E>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationReport {
    pub name: String,
    pub passed: bool,
    /// Highest t-order actually checked.
    pub checked_to: usize,
    pub first_failure: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NcsReport {
    pub equations: Vec<EquationReport>,
}

impl NcsReport {
    pub fn all_passed(&self) -> bool {
        self.equations.iter().all(|e| e.passed)
    }
}

/// Checks the five unit equations to order n (UE-3 and UE-4 to n - 1,
/// where the derivative of g is still determined).
pub fn verify_ncs<H: NcsHost>(host: &H, tuple: &NcsTuple<H::Elem>, n: usize) -> NcsReport {
    let mut equations = Vec::new();
    let fg_cap = n.min(tuple.f.len().saturating_sub(1)).min(tuple.g.len().saturating_sub(1));

    // UE-0: f(0) = 1.
    let ue0 = host.eq(&tuple.f[0], &host.unit());
    equations.push(EquationReport {
        name: "UE-0".into(),
        passed: ue0,
        checked_to: 0,
        first_failure: if ue0 { None } else { Some(0) },
    });

    // UE-1: f(-t) g(t) = g(t) f(-t) = 1.
    let mut first = None;
    for p in 0..=fg_cap {
        let mut left = host.zero();
        let mut right = host.zero();
        for i in 0..=p {
            let sign = if i % 2 == 0 { qi(1) } else { qi(-1) };
            let fg = host.mul(&tuple.f[i], &tuple.g[p - i]);
            left = host.add(&left, &host.scale(&sign, &fg));
            let gf = host.mul(&tuple.g[p - i], &tuple.f[i]);
            right = host.add(&right, &host.scale(&sign, &gf));
        }
        let want = if p == 0 { host.unit() } else { host.zero() };
        if !(host.eq(&left, &want) && host.eq(&right, &want)) {
            first = Some(p);
            break;
        }
    }
    equations.push(EquationReport {
        name: "UE-1".into(),
        passed: first.is_none(),
        checked_to: fg_cap,
        first_failure: first,
    });

    // UE-2: exp(d(t)) = g(t); requires d(0) = 0.
    let d_cap = n.min(tuple.d.len().saturating_sub(1)).min(tuple.g.len().saturating_sub(1));
    let mut first = if host.eq(&tuple.d[0], &host.zero()) { None } else { Some(0) };
    if first.is_none() {
        'outer: for p in 0..=d_cap {
            let mut e = if p == 0 { host.unit() } else { host.zero() };
            for k in 1..=p {
                let mut fact = qi(1);
                for i in 1..=k as i64 {
                    fact *= qi(i);
                }
                for comp in compositions_all(p, k) {
                    let mut prod = host.unit();
                    for part in comp {
                        prod = host.mul(&prod, &tuple.d[part]);
                    }
                    e = host.add(&e, &host.scale(&(qi(1) / fact.clone()), &prod));
                }
            }
            if !host.eq(&e, &tuple.g[p]) {
                first = Some(p);
                break 'outer;
            }
        }
    }
    equations.push(EquationReport {
        name: "UE-2".into(),
        passed: first.is_none(),
        checked_to: d_cap,
        first_failure: first,
    });

    // UE-3: dg/dt = g h, and UE-4: dg/dt = m g, both to order n - 1.
    for (name, series, left_factor) in [("UE-3", &tuple.h, true), ("UE-4", &tuple.m, false)] {
        let cap = n
            .saturating_sub(1)
            .min(tuple.g.len().saturating_sub(2))
            .min(series.len().saturating_sub(1));
        let mut first = None;
        for p in 0..=cap {
            let lhs = host.scale(&qi(p as i64 + 1), &tuple.g[p + 1]);
            let mut rhs = host.zero();
            for i in 0..=p {
                let term = if left_factor {
                    host.mul(&tuple.g[i], &series[p - i])
                } else {
                    host.mul(&series[p - i], &tuple.g[i])
                };
                rhs = host.add(&rhs, &term);
            }
            if !host.eq(&lhs, &rhs) {
                first = Some(p);
                break;
            }
        }
        equations.push(EquationReport {
            name: name.into(),
            passed: first.is_none(),
            checked_to: cap,
            first_failure: first,
        });
    }

    NcsReport { equations }
}

/// NSym as a verification host.
pub struct NSymHost;

impl NcsHost for NSymHost {
    type Elem = NSym;
    fn unit(&self) -> NSym {
        NSym::one()
    }
    fn zero(&self) -> NSym {
        NSym::zero()
    }
    fn add(&self, a: &NSym, b: &NSym) -> NSym {
        a.add(b)
    }
    fn scale(&self, c: &Q, a: &NSym) -> NSym {
        a.scale(c)
    }
    fn mul(&self, a: &NSym, b: &NSym) -> NSym {
        a.mul(b)
    }
    fn eq(&self, a: &NSym, b: &NSym) -> bool {
        a == b
    }
}

/// The Grossman-Larson algebra as a verification host.
pub struct GlHost;

impl NcsHost for GlHost {
    type Elem = GLVector;
    fn unit(&self) -> GLVector {
        GLVector::from_tree(Tree::leaf(0))
    }
    fn zero(&self) -> GLVector {
        GLVector::zero()
    }
    fn add(&self, a: &GLVector, b: &GLVector) -> GLVector {
        a.add(b)
    }
    fn scale(&self, c: &Q, a: &GLVector) -> GLVector {
        a.scale(c)
    }
    fn mul(&self, a: &GLVector, b: &GLVector) -> GLVector {
        gl_product(a, b)
    }
    fn eq(&self, a: &GLVector, b: &GLVector) -> bool {
        a == b
    }
}

/// Differential operators as a verification host; equality is action
/// equality on all words up to `max_word_len`.
pub struct OpHost {
    pub trunc: crate::ncseries::TruncationSpec,
    pub max_word_len: usize,
}

impl NcsHost for OpHost {
    type Elem = DiffOperator;
    fn unit(&self) -> DiffOperator {
        DiffOperator::Identity
    }
    fn zero(&self) -> DiffOperator {
        DiffOperator::zero()
    }
    fn add(&self, a: &DiffOperator, b: &DiffOperator) -> DiffOperator {
        DiffOperator::sum(vec![a.clone(), b.clone()])
    }
    fn scale(&self, c: &Q, a: &DiffOperator) -> DiffOperator {
        a.clone().scaled(c.clone())
    }
    fn mul(&self, a: &DiffOperator, b: &DiffOperator) -> DiffOperator {
        DiffOperator::Compose(vec![a.clone(), b.clone()])
    }
    fn eq(&self, a: &DiffOperator, b: &DiffOperator) -> bool {
        op_eq_on_words(a, b, &self.trunc, self.max_word_len)
    }
}

/// The NSym system: f = lambda, g = sigma, d from Phi, h from Psi shifted
/// by one, m from Xi shifted by one.
pub fn nsym_tuple(n: usize) -> NcsTuple<NSym> {
    let bases = solve_bases(n);
    let mut f = vec![NSym::one()];
    for m in 1..=n {
        f.push(NSym::gen(m as u32));
    }
    let g = bases.s.clone();
    let mut d = vec![NSym::zero()];
    for m in 1..=n {
        d.push(bases.phi[m].scale(&(qi(1) / qi(m as i64))));
    }
    let h = (0..n).map(|k| bases.psi[k + 1].clone()).collect();
    let m = (0..n).map(|k| bases.xi[k + 1].clone()).collect();
    NcsTuple { f, g, d, h, m }
}

/// The leaf weight of a chain, zero on every other tree.
pub fn beta(t: &Tree) -> u32 {
    if is_grafted_chain(t) {
        path_leaf_label(t).unwrap_or(0)
    } else {
        0
    }
}

/// The root-child weight of a primitive, zero on every other tree.
pub fn gamma(t: &Tree) -> u32 {
    if is_grafted_primitive(t) {
        t.children()[0].label()
    } else {
        0
    }
}

/// The tree NCS system over the grafted trees with branch labels in
/// `weights`, to order n.
pub fn omega_trees(weights: &[u32], n: usize) -> Result<NcsTuple<GLVector>, TreesError> {
    let e = TreeEnumerator::new(weights, n as u64)?;
    let unit = GLVector::from_tree(Tree::leaf(0));
    let mut theta = ThetaTable::new();

    let normalized = |t: &Tree| -> GLVector {
        let aut = Q::from_integer(t.aut_order().into());
        GLVector::from_tree(t.clone()).scale(&(qi(1) / aut))
    };

    let mut f = vec![unit.clone()];
    let mut g = vec![unit.clone()];
    let mut d = vec![GLVector::zero()];
    for p in 1..=n {
        let mut fp = GLVector::zero();
        let mut gp = GLVector::zero();
        let mut dp = GLVector::zero();
        for t in e.grafted_of_weight(p as u64) {
            let v = normalized(&t);
            gp = gp.add(&v);
            if is_grafted_shrub(&t) {
                let sign = if (t.branch_count() + p) % 2 == 0 { qi(1) } else { qi(-1) };
                fp = fp.add(&v.scale(&sign));
            }
            if is_grafted_primitive(&t) {
                let th = theta.theta(&t);
                if !th.is_zero() {
                    dp = dp.add(&v.scale(&th));
                }
            }
        }
        f.push(fp);
        g.push(gp);
        d.push(dp);
    }
    let mut h = Vec::new();
    let mut m = Vec::new();
    for k in 0..n {
        let mut hk = GLVector::zero();
        let mut mk = GLVector::zero();
        for t in e.grafted_of_weight(k as u64 + 1) {
            if is_grafted_chain(&t) {
                hk = hk.add(&normalized(&t).scale(&qi(beta(&t) as i64)));
            }
            if is_grafted_primitive(&t) {
                let c = gamma(&t);
                if c > 0 {
                    mk = mk.add(&normalized(&t).scale(&qi(c as i64)));
                }
            }
        }
        h.push(hk);
        m.push(mk);
    }
    Ok(NcsTuple { f, g, d, h, m })
}

/// The tree specialization: L_m maps to the t^m coefficient of the tree
/// system's f series, extended multiplicatively and linearly. Errors when
/// the element's weight exceeds the cap.
pub fn specialize_t(weights: &[u32], x: &NSym, n: usize) -> Result<GLVector, String> {
    if x.max_weight() as usize > n {
        return Err(format!(
            "element weight {} exceeds the cap {}",
            x.max_weight(),
            n
        ));
    }
    let omega = omega_trees(weights, n).map_err(|e| e.to_string())?;
    let mut out = GLVector::zero();
    for (w, c) in x.terms() {
        let mut acc = GLVector::from_tree(Tree::leaf(0));
        for &m in w {
            acc = gl_product(&acc, &omega.f[m as usize]);
        }
        out = out.add(&acc.scale(c));
    }
    Ok(out)
}

/// The operator specialization: L_m maps to the t^m coefficient of the
/// substitution expansion f of the automorphism.
pub fn specialize_s(auto: &Automorphism, x: &NSym) -> Result<DiffOperator, String> {
    let cap = auto.trunc().t_order;
    if x.max_weight() as usize > cap {
        return Err(format!(
            "element weight {} exceeds the t cap {}",
            x.max_weight(),
            cap
        ));
    }
    let (f, _, _) = operator_fg(auto).map_err(|e| e.to_string())?;
    let mut terms = Vec::new();
    for (w, c) in x.terms() {
        let ops: Vec<DiffOperator> = w.iter().map(|&m| f.coeff(m as usize).clone()).collect();
        let op = if ops.is_empty() {
            DiffOperator::Identity
        } else {
            DiffOperator::Compose(ops)
        };
        terms.push((vec![c.clone()], op));
    }
    Ok(DiffOperator::LinComb(terms))
}

/// The substitution system of an automorphism as a verifiable tuple of
/// t-coefficient operators. h and m stop one order short: they compare
/// against the t-derivative of g, which loses the top coefficient.
pub fn operator_tuple(auto: &Automorphism) -> Result<NcsTuple<DiffOperator>, String> {
    let (f, g, d) = operator_fg(auto).map_err(|e| e.to_string())?;
    let (h, m) = ncs_h_m(auto).map_err(|e| e.to_string())?;
    let n = auto.trunc().t_order;
    let take = |s: &OpSeries, count: usize| -> Vec<DiffOperator> {
        (0..count).map(|p| s.coeff(p).clone()).collect()
    };
    Ok(NcsTuple {
        f: take(&f, n + 1),
        g: take(&g, n + 1),
        d: take(&d, n + 1),
        h: take(&h, n),
        m: take(&m, n),
    })
}

/// A flat list of named pass/fail checks.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub checks: Vec<(String, bool)>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Checks that the two specializations agree through the operator
/// realization: S(L_m) = A(T(L_m)) as operators, for m up to max_weight.
/// Operator equality is action equality on words up to max_word_len.
pub fn verify_cd2(
    auto: &Automorphism,
    max_weight: usize,
    max_word_len: usize,
) -> Result<CheckReport, String> {
    let weights = auto.weights();
    let cap = max_weight.min(auto.trunc().t_order);
    let mut calc = TreeCalculus::new(auto);
    let mut checks = Vec::new();
    for m in 1..=cap {
        let lhs = specialize_s(auto, &NSym::gen(m as u32))?;
        let tree_side = specialize_t(&weights, &NSym::gen(m as u32), m)?;
        let rhs = calc.operator_of(&tree_side);
        let ok = op_eq_on_words(&lhs, &rhs, auto.trunc(), max_word_len);
        checks.push((format!("weight {}", m), ok));
    }
    Ok(CheckReport { checks })
}

/// Exact rank of a rational matrix by Gaussian elimination.
fn matrix_rank(mut rows: Vec<Vec<Q>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let lead = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &lead;
            for c in col..cols {
                let delta = &factor * &rows[rank][c];
                rows[r][c] -= delta;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of the tree specialization on the weight-m word basis of NSym,
/// over the label set {1, ..., m}; the expected value is 2^(m-1).
pub fn injectivity_rank(m: usize) -> Result<(usize, usize), String> {
    assert!((1..=5).contains(&m), "rank test is sized for weights 1 to 5");
    let weights: Vec<u32> = (1..=m as u32).collect();
    let omega = omega_trees(&weights, m).map_err(|e| e.to_string())?;
    let e = TreeEnumerator::new(&weights, m as u64).map_err(|e| e.to_string())?;
    let basis: Vec<Tree> = e.grafted_of_weight(m as u64);
    let index: BTreeMap<&Tree, usize> =
        basis.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut rows = Vec::new();
    for comp in compositions_of(m) {
        let mut acc = GLVector::from_tree(Tree::leaf(0));
        for part in comp {
            acc = gl_product(&acc, &omega.f[part]);
        }
        let mut row = vec![Q::zero(); basis.len()];
        for (t, c) in acc.terms() {
            row[index[t]] = c.clone();
        }
        rows.push(row);
    }
    Ok((matrix_rank(rows), 1 << (m - 1)))
}

/// Ordered compositions of m into positive parts, all lengths.
fn compositions_of(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 1..=m {
        out.extend(compositions_all(m, k));
    }
    out
}
