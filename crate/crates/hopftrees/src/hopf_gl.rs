//! The grafting Hopf algebra on root-0 trees.
//!
//! Basis elements are trees whose root carries label 0; the bare root is the
//! unit. The product T*S attaches the branches of T at vertices of S in all
//! v(S)^{o(T)} ways and sums the results. The coproduct splits the branch
//! multiset over all 2^{o(T)} index subsets, grafting each side back on a
//! fresh root; it is cocommutative. Grading is by weight (the 0 root adds
//! nothing).
//!
//! Attaching below the root of an ordinary labeled tree instead gives the
//! natural module action on the span of such trees; see [`gl_act_on_tree`].

use crate::hopf_ck::{format_terms, CKVector};
use crate::trees::{b_plus, edge_addresses, Tree};
use crate::{qi, Q};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Finite linear combination of root-0 trees.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GLVector {
    terms: BTreeMap<Tree, Q>,
}

impl GLVector {
    pub fn zero() -> Self {
        GLVector::default()
    }

    /// The bare root, the algebra unit.
    pub fn one() -> Self {
        GLVector::from_tree(Tree::leaf(0))
    }

    pub fn from_tree(t: Tree) -> Self {
        let mut v = GLVector::zero();
        v.add_term(t, qi(1));
        v
    }

    pub fn add_term(&mut self, t: Tree, c: Q) {
        debug_assert_eq!(t.label(), 0, "grafting algebra trees have root label 0");
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(t.clone()).or_insert_with(|| qi(0));
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&t);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, t: &Tree) -> Q {
        self.terms.get(t).cloned().unwrap_or_else(|| qi(0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Tree, &Q)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &GLVector) -> GLVector {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &GLVector) -> GLVector {
        self.add(&other.scale(&qi(-1)))
    }

    pub fn scale(&self, c: &Q) -> GLVector {
        let mut out = GLVector::zero();
        for (t, a) in &self.terms {
            out.add_term(t.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, other: &GLVector) -> GLVector {
        gl_product(self, other)
    }
}

impl fmt::Display for GLVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_terms(f, self.terms.iter().map(|(t, c)| (t.to_string(), c)))
    }
}

/// Linear combination of tree tensor tree (both root 0).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GLTensor {
    terms: BTreeMap<(Tree, Tree), Q>,
}

impl GLTensor {
    pub fn zero() -> Self {
        GLTensor::default()
    }

    pub fn add_term(&mut self, l: Tree, r: Tree, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = (l, r);
        let entry = self.terms.entry(key.clone()).or_insert_with(|| qi(0));
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &GLTensor) -> GLTensor {
        let mut out = self.clone();
        for ((l, r), c) in &other.terms {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> GLTensor {
        let mut out = GLTensor::zero();
        for ((l, r), a) in &self.terms {
            out.add_term(l.clone(), r.clone(), a * c);
        }
        out
    }

    /// Componentwise product of tensors.
    pub fn mul(&self, other: &GLTensor) -> GLTensor {
        let mut out = GLTensor::zero();
        for ((la, ra), ca) in &self.terms {
            for ((lb, rb), cb) in &other.terms {
                for (l, cl) in gl_mul_trees(la, lb).terms() {
                    for (r, cr) in gl_mul_trees(ra, rb).terms() {
                        out.add_term(l.clone(), r.clone(), ca * cb * cl * cr);
                    }
                }
            }
        }
        out
    }

    pub fn coeff(&self, l: &Tree, r: &Tree) -> Q {
        self.terms
            .get(&(l.clone(), r.clone()))
            .cloned()
            .unwrap_or_else(|| qi(0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Tree, Tree), &Q)> {
        self.terms.iter()
    }

    /// Swaps the two legs.
    pub fn flip(&self) -> GLTensor {
        let mut out = GLTensor::zero();
        for ((l, r), c) in &self.terms {
            out.add_term(r.clone(), l.clone(), c.clone());
        }
        out
    }
}

impl fmt::Display for GLTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_terms(
            f,
            self.terms
                .iter()
                .map(|((l, r), c)| (format!("[{} | {}]", l, r), c)),
        )
    }
}

// Mutable tree shape for grafting; converted back through Tree::new so the
// result is canonical.
#[derive(Clone)]
struct Raw {
    label: u32,
    children: Vec<Raw>,
}

fn to_raw(t: &Tree) -> Raw {
    Raw { label: t.label(), children: t.children().iter().map(to_raw).collect() }
}

fn to_tree(r: &Raw) -> Tree {
    Tree::new(r.label, r.children.iter().map(to_tree).collect())
}

fn node_at<'a>(r: &'a mut Raw, addr: &[usize]) -> &'a mut Raw {
    let mut cur = r;
    for &i in addr {
        cur = &mut cur.children[i];
    }
    cur
}

/// Attaches the branches of `a` (its root is discarded) at vertices of `b`
/// in every possible way; `b` keeps its own root label. Results come with
/// multiplicity as a linear combination of single trees.
fn attach_branches(a: &Tree, b: &Tree) -> Vec<Tree> {
    let branches = a.children();
    let m = branches.len();
    if m == 0 {
        return vec![b.clone()];
    }
    let mut vaddrs = vec![Vec::new()];
    vaddrs.extend(edge_addresses(b));
    let n = vaddrs.len();
    let mut out = Vec::new();
    let mut digits = vec![0usize; m];
    loop {
        let mut raw = to_raw(b);
        for (k, &d) in digits.iter().enumerate() {
            node_at(&mut raw, &vaddrs[d]).children.push(to_raw(&branches[k]));
        }
        out.push(to_tree(&raw));
        let mut i = 0;
        loop {
            if i == m {
                return out;
            }
            digits[i] += 1;
            if digits[i] < n {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn gl_mul_trees(a: &Tree, b: &Tree) -> GLVector {
    let mut out = GLVector::zero();
    for t in attach_branches(a, b) {
        out.add_term(t, qi(1));
    }
    out
}

/// Grafting product, extended bilinearly.
pub fn gl_product(x: &GLVector, y: &GLVector) -> GLVector {
    let mut out = GLVector::zero();
    for (a, ca) in x.terms() {
        for (b, cb) in y.terms() {
            out = out.add(&gl_mul_trees(a, b).scale(&(ca * cb)));
        }
    }
    out
}

fn tree_coproduct(t: &Tree) -> GLTensor {
    let branches = t.children();
    let m = branches.len();
    let mut out = GLTensor::zero();
    for mask in 0u64..(1u64 << m) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (i, b) in branches.iter().enumerate() {
            if mask & (1 << i) != 0 {
                left.push(b.clone());
            } else {
                right.push(b.clone());
            }
        }
        out.add_term(b_plus(&left, 0), b_plus(&right, 0), qi(1));
    }
    out
}

/// Coproduct: splits the branch multiset over all index subsets.
pub fn gl_coproduct(x: &GLVector) -> GLTensor {
    let mut out = GLTensor::zero();
    for (t, c) in x.terms() {
        out = out.add(&tree_coproduct(t).scale(c));
    }
    out
}

/// Coefficient of the bare root.
pub fn gl_counit(x: &GLVector) -> Q {
    x.coeff(&Tree::leaf(0))
}

fn tree_antipode(t: &Tree) -> GLVector {
    let branches = t.children();
    let m = branches.len();
    if m == 0 {
        return GLVector::one();
    }
    // S(T) = -T - sum over proper nonempty branch subsets I of
    // S(B+(T_I)) * B+(T_rest).
    let mut out = GLVector::from_tree(t.clone()).scale(&qi(-1));
    for mask in 1u64..(1u64 << m) - 1 {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (i, b) in branches.iter().enumerate() {
            if mask & (1 << i) != 0 {
                left.push(b.clone());
            } else {
                right.push(b.clone());
            }
        }
        let s_left = tree_antipode(&b_plus(&left, 0));
        out = out.sub(&gl_product(&s_left, &GLVector::from_tree(b_plus(&right, 0))));
    }
    out
}

/// Antipode.
pub fn gl_antipode(x: &GLVector) -> GLVector {
    let mut out = GLVector::zero();
    for (t, c) in x.terms() {
        out = out.add(&tree_antipode(t).scale(c));
    }
    out
}

/// True when the coproduct is x tensor unit + unit tensor x.
pub fn is_primitive(x: &GLVector) -> bool {
    let mut expected = GLTensor::zero();
    let one = Tree::leaf(0);
    for (t, c) in x.terms() {
        expected.add_term(t.clone(), one.clone(), c.clone());
        expected.add_term(one.clone(), t.clone(), c.clone());
    }
    gl_coproduct(x) == expected
}

/// Module action on the span of ordinary labeled trees: attaches the
/// branches of each root-0 tree in `x` below vertices of `t`, which keeps
/// its root label. Returns single-tree forests.
pub fn gl_act_on_tree(x: &GLVector, t: &Tree) -> CKVector {
    let mut out = CKVector::zero();
    for (a, c) in x.terms() {
        for r in attach_branches(a, t) {
            out.add_term(vec![r], c.clone());
        }
    }
    out
}

/// Extends the action linearly over single-tree forests.
pub fn gl_act(x: &GLVector, v: &CKVector) -> CKVector {
    let mut out = CKVector::zero();
    for (forest, c) in v.terms() {
        assert_eq!(forest.len(), 1, "the action is defined on single trees");
        out = out.add(&gl_act_on_tree(x, &forest[0]).scale(c));
    }
    out
}

/// Runs the Hopf axiom suite on the grafted-tree basis with branch labels
/// in `weights`, bounding every product and coproduct input by total
/// weight `max_weight`. Returns named pass/fail entries; all arithmetic is
/// exact, so a failed entry is a genuine counterexample.
pub fn gl_axiom_checks(
    weights: &[crate::trees::Label],
    max_weight: u64,
) -> Result<Vec<(String, bool)>, crate::trees::TreesError> {
    let e = crate::trees::TreeEnumerator::new(weights, max_weight)?;
    let basis = e.grafted_up_to(max_weight);
    let unit = GLVector::one();
    let mut checks = Vec::new();

    let mut unit_ok = true;
    let mut assoc_ok = true;
    let mut bialg_ok = true;
    for a in &basis {
        let va = GLVector::from_tree(a.clone());
        unit_ok &= gl_product(&unit, &va) == va && gl_product(&va, &unit) == va;
        for b in &basis {
            if a.weight() + b.weight() > max_weight {
                continue;
            }
            let vb = GLVector::from_tree(b.clone());
            let ab = gl_product(&va, &vb);
            bialg_ok &= gl_coproduct(&ab) == gl_coproduct(&va).mul(&gl_coproduct(&vb));
            bialg_ok &= gl_counit(&ab) == gl_counit(&va) * gl_counit(&vb);
            for c in &basis {
                if a.weight() + b.weight() + c.weight() > max_weight {
                    continue;
                }
                let vc = GLVector::from_tree(c.clone());
                assoc_ok &= gl_product(&ab, &vc) == gl_product(&va, &gl_product(&vb, &vc));
            }
        }
    }
    checks.push(("unit".to_string(), unit_ok));
    checks.push(("associativity".to_string(), assoc_ok));
    checks.push(("bialgebra compatibility".to_string(), bialg_ok));

    let mut coassoc_ok = true;
    let mut counit_ok = true;
    let mut antipode_ok = true;
    let mut cocomm_ok = true;
    for t in &basis {
        let vt = GLVector::from_tree(t.clone());
        let d = gl_coproduct(&vt);
        cocomm_ok &= d.flip() == d;
        // Coassociativity via triple maps.
        let mut left: BTreeMap<(Tree, Tree, Tree), Q> = BTreeMap::new();
        let mut right: BTreeMap<(Tree, Tree, Tree), Q> = BTreeMap::new();
        for ((l, r), c) in d.terms() {
            for ((l2, r2), c2) in gl_coproduct(&GLVector::from_tree(l.clone())).terms() {
                let e = left.entry((l2.clone(), r2.clone(), r.clone())).or_insert_with(Q::zero);
                *e += c * c2;
            }
            for ((l2, r2), c2) in gl_coproduct(&GLVector::from_tree(r.clone())).terms() {
                let e = right.entry((l.clone(), l2.clone(), r2.clone())).or_insert_with(Q::zero);
                *e += c * c2;
            }
        }
        left.retain(|_, v| !v.is_zero());
        right.retain(|_, v| !v.is_zero());
        coassoc_ok &= left == right;
        // Counit and antipode convolution laws.
        let mut eps_id = GLVector::zero();
        let mut id_eps = GLVector::zero();
        let mut conv_l = GLVector::zero();
        let mut conv_r = GLVector::zero();
        for ((l, r), c) in d.terms() {
            let vl = GLVector::from_tree(l.clone());
            let vr = GLVector::from_tree(r.clone());
            eps_id = eps_id.add(&vr.scale(&(c * gl_counit(&vl))));
            id_eps = id_eps.add(&vl.scale(&(c * gl_counit(&vr))));
            conv_l = conv_l.add(&gl_product(&gl_antipode(&vl), &vr).scale(c));
            conv_r = conv_r.add(&gl_product(&vl, &gl_antipode(&vr)).scale(c));
        }
        counit_ok &= eps_id == vt && id_eps == vt;
        let want = unit.scale(&gl_counit(&vt));
        antipode_ok &= conv_l == want && conv_r == want;
    }
    checks.push(("coassociativity".to_string(), coassoc_ok));
    checks.push(("cocommutativity".to_string(), cocomm_ok));
    checks.push(("counit".to_string(), counit_ok));
    checks.push(("antipode convolution".to_string(), antipode_ok));
    Ok(checks)
}
