//! The commutative Hopf algebra of rooted forests.
//!
//! Basis elements are forests (canonical multisets of trees); the product is
//! multiset union with the empty forest as unit. The coproduct of a tree is
//! the sum over admissible cuts of pruned-forest tensor remainder, plus the
//! tree tensor empty; on forests it extends multiplicatively. The antipode
//! follows the usual recursion over nonempty cuts. Everything is graded by
//! total weight.
//!
//! The pairing with the grafting algebra on root-0 trees lives here too:
//! a root-0 tree T pairs with a forest F to aut(T) when T = B+(F), else 0.

use crate::hopf_gl::GLVector;
use crate::trees::{admissible_cuts, b_plus, canonical_forest, format_forest, Tree};
use crate::{format_q, qi, Q};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Finite linear combination of forests over the rationals.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CKVector {
    terms: BTreeMap<Vec<Tree>, Q>,
}

impl CKVector {
    pub fn zero() -> Self {
        CKVector::default()
    }

    /// The empty forest, the algebra unit.
    pub fn one() -> Self {
        CKVector::from_forest(Vec::new())
    }

    pub fn from_forest(f: Vec<Tree>) -> Self {
        let mut v = CKVector::zero();
        v.add_term(f, qi(1));
        v
    }

    pub fn from_tree(t: Tree) -> Self {
        CKVector::from_forest(vec![t])
    }

    /// Adds c * F; the forest is canonicalized and zero terms are dropped.
    pub fn add_term(&mut self, forest: Vec<Tree>, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = canonical_forest(forest);
        let entry = self.terms.entry(key).or_insert_with(|| qi(0));
        *entry += c;
        if entry.is_zero() {
            let key: Vec<Vec<Tree>> = self
                .terms
                .iter()
                .filter(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, forest: &[Tree]) -> Q {
        self.terms.get(forest).cloned().unwrap_or_else(|| qi(0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Tree>, &Q)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &CKVector) -> CKVector {
        let mut out = self.clone();
        for (f, c) in &other.terms {
            out.add_term(f.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CKVector) -> CKVector {
        self.add(&other.scale(&qi(-1)))
    }

    pub fn scale(&self, c: &Q) -> CKVector {
        let mut out = CKVector::zero();
        for (f, a) in &self.terms {
            out.add_term(f.clone(), a * c);
        }
        out
    }

    /// Multiset union of forests, extended bilinearly.
    pub fn mul(&self, other: &CKVector) -> CKVector {
        let mut out = CKVector::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &other.terms {
                let mut f = fa.clone();
                f.extend(fb.iter().cloned());
                out.add_term(f, ca * cb);
            }
        }
        out
    }
}

/// `c1*F1 + c2*F2` with the empty forest printed as `1`.
impl fmt::Display for CKVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_terms(f, self.terms.iter().map(|(k, c)| (forest_label(k), c)))
    }
}

fn forest_label(forest: &[Tree]) -> String {
    if forest.is_empty() {
        "1".to_string()
    } else {
        format_forest(forest)
    }
}

pub(crate) fn format_terms<'a, I>(f: &mut fmt::Formatter<'_>, terms: I) -> fmt::Result
where
    I: Iterator<Item = (String, &'a Q)>,
{
    let mut first = true;
    for (label, c) in terms {
        let mag = if c < &qi(0) { -c.clone() } else { c.clone() };
        if first {
            if c < &qi(0) {
                write!(f, "-")?;
            }
            first = false;
        } else if c < &qi(0) {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        write!(f, "{}*{}", format_q(&mag), label)?;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Linear combination of forest tensor forest.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CKTensor {
    terms: BTreeMap<(Vec<Tree>, Vec<Tree>), Q>,
}

impl CKTensor {
    pub fn zero() -> Self {
        CKTensor::default()
    }

    pub fn add_term(&mut self, left: Vec<Tree>, right: Vec<Tree>, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = (canonical_forest(left), canonical_forest(right));
        let entry = self.terms.entry(key.clone()).or_insert_with(|| qi(0));
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &CKTensor) -> CKTensor {
        let mut out = self.clone();
        for ((l, r), c) in &other.terms {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> CKTensor {
        let mut out = CKTensor::zero();
        for ((l, r), a) in &self.terms {
            out.add_term(l.clone(), r.clone(), a * c);
        }
        out
    }

    /// Componentwise product of tensors.
    pub fn mul(&self, other: &CKTensor) -> CKTensor {
        let mut out = CKTensor::zero();
        for ((la, ra), ca) in &self.terms {
            for ((lb, rb), cb) in &other.terms {
                let mut l = la.clone();
                l.extend(lb.iter().cloned());
                let mut r = ra.clone();
                r.extend(rb.iter().cloned());
                out.add_term(l, r, ca * cb);
            }
        }
        out
    }

    pub fn coeff(&self, left: &[Tree], right: &[Tree]) -> Q {
        self.terms
            .get(&(left.to_vec(), right.to_vec()))
            .cloned()
            .unwrap_or_else(|| qi(0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<Tree>, Vec<Tree>), &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `c*[F1 | F2]` terms joined with signs.
impl fmt::Display for CKTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_terms(
            f,
            self.terms
                .iter()
                .map(|((l, r), c)| (format!("[{} | {}]", forest_label(l), forest_label(r)), c)),
        )
    }
}

/// Product in the forest algebra.
pub fn ck_product(a: &CKVector, b: &CKVector) -> CKVector {
    a.mul(b)
}

fn tree_coproduct(t: &Tree) -> CKTensor {
    let mut out = CKTensor::zero();
    out.add_term(vec![t.clone()], Vec::new(), qi(1));
    for cut in admissible_cuts(t) {
        out.add_term(cut.pruned, vec![cut.remainder], qi(1));
    }
    out
}

/// Coproduct: cuts on trees, multiplicative on forests, linear overall.
pub fn ck_coproduct(x: &CKVector) -> CKTensor {
    let mut out = CKTensor::zero();
    for (forest, c) in x.terms() {
        let mut acc = CKTensor::zero();
        acc.add_term(Vec::new(), Vec::new(), qi(1));
        for t in forest {
            acc = acc.mul(&tree_coproduct(t));
        }
        out = out.add(&acc.scale(c));
    }
    out
}

/// Coefficient of the empty forest.
pub fn ck_counit(x: &CKVector) -> Q {
    x.coeff(&[])
}

fn tree_antipode(t: &Tree) -> CKVector {
    // S(T) = -T - sum over nonempty cuts of S(pruned) * remainder.
    let mut out = CKVector::from_tree(t.clone()).scale(&qi(-1));
    for cut in admissible_cuts(t) {
        if cut.edges.is_empty() {
            continue;
        }
        let s_pruned = forest_antipode(&cut.pruned);
        let term = s_pruned.mul(&CKVector::from_tree(cut.remainder));
        out = out.sub(&term);
    }
    out
}

fn forest_antipode(forest: &[Tree]) -> CKVector {
    let mut acc = CKVector::one();
    for t in forest {
        acc = acc.mul(&tree_antipode(t));
    }
    acc
}

/// Antipode, multiplicative over forests.
pub fn ck_antipode(x: &CKVector) -> CKVector {
    let mut out = CKVector::zero();
    for (forest, c) in x.terms() {
        out = out.add(&forest_antipode(forest).scale(c));
    }
    out
}

/// Pairing of a root-0 tree combination with a forest combination:
/// <T, F> = aut(T) when T = B+(F), else 0, extended bilinearly.
pub fn pairing(x: &GLVector, c: &CKVector) -> Q {
    let mut total = qi(0);
    for (t, a) in x.terms() {
        for (forest, b) in c.terms() {
            if *t == b_plus(forest, 0) {
                let aut = Q::from_integer(t.aut_order().into());
                total += a * b * aut;
            }
        }
    }
    total
}

/// Runs the Hopf axiom suite on the forest basis with labels in `weights`,
/// bounding inputs by total weight. Returns named pass/fail entries.
pub fn ck_axiom_checks(
    weights: &[crate::trees::Label],
    max_weight: u64,
) -> Result<Vec<(String, bool)>, crate::trees::TreesError> {
    let e = crate::trees::TreeEnumerator::new(weights, max_weight)?;
    let basis: Vec<Vec<Tree>> = (0..=max_weight)
        .flat_map(|w| e.forests_of_weight(w).to_vec())
        .collect();
    let forest_weight = |f: &[Tree]| f.iter().map(|t| t.weight()).sum::<u64>();
    let unit = CKVector::one();
    let mut checks = Vec::new();

    let mut unit_ok = true;
    let mut assoc_ok = true;
    let mut comm_ok = true;
    let mut bialg_ok = true;
    for a in &basis {
        let va = CKVector::from_forest(a.clone());
        unit_ok &= ck_product(&unit, &va) == va && ck_product(&va, &unit) == va;
        for b in &basis {
            if forest_weight(a) + forest_weight(b) > max_weight {
                continue;
            }
            let vb = CKVector::from_forest(b.clone());
            let ab = ck_product(&va, &vb);
            comm_ok &= ab == ck_product(&vb, &va);
            bialg_ok &= ck_coproduct(&ab) == ck_coproduct(&va).mul(&ck_coproduct(&vb));
            bialg_ok &= ck_counit(&ab) == ck_counit(&va) * ck_counit(&vb);
            for c in &basis {
                if forest_weight(a) + forest_weight(b) + forest_weight(c) > max_weight {
                    continue;
                }
                let vc = CKVector::from_forest(c.clone());
                assoc_ok &= ck_product(&ab, &vc) == ck_product(&va, &ck_product(&vb, &vc));
            }
        }
    }
    checks.push(("unit".to_string(), unit_ok));
    checks.push(("associativity".to_string(), assoc_ok));
    checks.push(("commutativity".to_string(), comm_ok));
    checks.push(("bialgebra compatibility".to_string(), bialg_ok));

    let mut coassoc_ok = true;
    let mut counit_ok = true;
    let mut antipode_ok = true;
    for f in &basis {
        let vf = CKVector::from_forest(f.clone());
        let d = ck_coproduct(&vf);
        // Coassociativity via triple maps.
        let mut left: BTreeMap<(Vec<Tree>, Vec<Tree>, Vec<Tree>), Q> = BTreeMap::new();
        let mut right: BTreeMap<(Vec<Tree>, Vec<Tree>, Vec<Tree>), Q> = BTreeMap::new();
        for ((l, r), c) in d.terms() {
            for ((l2, r2), c2) in ck_coproduct(&CKVector::from_forest(l.clone())).terms() {
                let e = left.entry((l2.clone(), r2.clone(), r.clone())).or_insert_with(Q::zero);
                *e += c * c2;
            }
            for ((l2, r2), c2) in ck_coproduct(&CKVector::from_forest(r.clone())).terms() {
                let e = right.entry((l.clone(), l2.clone(), r2.clone())).or_insert_with(Q::zero);
                *e += c * c2;
            }
        }
        left.retain(|_, v| !v.is_zero());
        right.retain(|_, v| !v.is_zero());
        coassoc_ok &= left == right;
        // Counit and antipode convolution laws.
        let mut eps_id = CKVector::zero();
        let mut id_eps = CKVector::zero();
        let mut conv_l = CKVector::zero();
        let mut conv_r = CKVector::zero();
        for ((l, r), c) in d.terms() {
            let vl = CKVector::from_forest(l.clone());
            let vr = CKVector::from_forest(r.clone());
            eps_id = eps_id.add(&vr.scale(&(c * ck_counit(&vl))));
            id_eps = id_eps.add(&vl.scale(&(c * ck_counit(&vr))));
            conv_l = conv_l.add(&ck_product(&ck_antipode(&vl), &vr).scale(c));
            conv_r = conv_r.add(&ck_product(&vl, &ck_antipode(&vr)).scale(c));
        }
        counit_ok &= eps_id == vf && id_eps == vf;
        let want = unit.scale(&ck_counit(&vf));
        antipode_ok &= conv_l == want && conv_r == want;
    }
    checks.push(("coassociativity".to_string(), coassoc_ok));
    checks.push(("counit".to_string(), counit_ok));
    checks.push(("antipode convolution".to_string(), antipode_ok));
    Ok(checks)
}

/// Checks that the pairing turns the grafting product into the forest
/// coproduct and the grafting coproduct into the forest product, on all
/// basis elements within the weight cap.
pub fn pairing_duality_checks(
    weights: &[crate::trees::Label],
    max_weight: u64,
) -> Result<Vec<(String, bool)>, crate::trees::TreesError> {
    let e = crate::trees::TreeEnumerator::new(weights, max_weight)?;
    let grafted = e.grafted_up_to(max_weight);
    let forests: Vec<Vec<Tree>> = (0..=max_weight)
        .flat_map(|w| e.forests_of_weight(w).to_vec())
        .collect();
    let forest_weight = |f: &[Tree]| f.iter().map(|t| t.weight()).sum::<u64>();
    let mut checks = Vec::new();

    // <x y, F> = sum over the coproduct of F of <x, F'> <y, F''>.
    let mut product_ok = true;
    for x in &grafted {
        let vx = GLVector::from_tree(x.clone());
        for y in &grafted {
            if x.weight() + y.weight() > max_weight {
                continue;
            }
            let vy = GLVector::from_tree(y.clone());
            let xy = crate::hopf_gl::gl_product(&vx, &vy);
            for f in &forests {
                let vf = CKVector::from_forest(f.clone());
                let lhs = pairing(&xy, &vf);
                let mut rhs = qi(0);
                for ((l, r), c) in ck_coproduct(&vf).terms() {
                    rhs += c
                        * pairing(&vx, &CKVector::from_forest(l.clone()))
                        * pairing(&vy, &CKVector::from_forest(r.clone()));
                }
                product_ok &= lhs == rhs;
            }
        }
    }
    checks.push(("product against coproduct".to_string(), product_ok));

    // <x, F G> = sum over the coproduct of x of <x', F> <x'', G>.
    let mut coproduct_ok = true;
    for x in &grafted {
        let vx = GLVector::from_tree(x.clone());
        let dx = crate::hopf_gl::gl_coproduct(&vx);
        for f in &forests {
            let vf = CKVector::from_forest(f.clone());
            for g in &forests {
                if forest_weight(f) + forest_weight(g) > max_weight {
                    continue;
                }
                let vg = CKVector::from_forest(g.clone());
                let lhs = pairing(&vx, &ck_product(&vf, &vg));
                let mut rhs = qi(0);
                for ((l, r), c) in dx.terms() {
                    rhs += c
                        * pairing(&GLVector::from_tree(l.clone()), &vf)
                        * pairing(&GLVector::from_tree(r.clone()), &vg);
                }
                coproduct_ok &= lhs == rhs;
            }
        }
    }
    checks.push(("coproduct against product".to_string(), coproduct_ok));

    // Units and counits correspond under the pairing.
    let mut unit_ok = true;
    for f in &forests {
        let vf = CKVector::from_forest(f.clone());
        unit_ok &= pairing(&GLVector::one(), &vf) == ck_counit(&vf);
    }
    for x in &grafted {
        let vx = GLVector::from_tree(x.clone());
        unit_ok &= pairing(&vx, &CKVector::one()) == crate::hopf_gl::gl_counit(&vx);
    }
    checks.push(("unit against counit".to_string(), unit_ok));
    Ok(checks)
}
