//! Order polynomials of tree posets.
//!
//! A rooted tree is a poset with the root as unique minimum; a forest is the
//! disjoint union. The order polynomial of a forest F counts order-preserving
//! maps from F into the chain 1 < 2 < ... < s; it is a polynomial in s of
//! degree v(F), computed here exactly by counting at v(F)+1 integer points
//! and interpolating. Labels play no role in any of this.
//!
//! The strict variant counts maps that are strictly increasing along edges.
//! Reciprocity ties the two: strict(F, s) = (-1)^{v(F)} weak(F, -s).
//!
//! For a root-0 tree T, theta(T) is the coefficient of s in the order
//! polynomial of its branch forest when T has exactly one branch, and 0
//! otherwise (also 0 for the bare root). For an ordinary tree T, varphi(T)
//! is the coefficient of s in its own order polynomial; grafting a fresh
//! root turns one into the other.

use crate::trees::{descending_cut_chains, b_plus, CutKind, Tree};
use crate::{format_q, qi, Q};
use num::{BigInt, Zero};
use std::collections::HashMap;
use std::fmt;

/// Dense polynomial in the chain-length variable s, ascending coefficients
/// with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SPoly {
    coeffs: Vec<Q>,
}

impl SPoly {
    pub fn zero() -> Self {
        SPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Q) -> Self {
        SPoly::from_coeffs(vec![c])
    }

    /// The variable s itself.
    pub fn s() -> Self {
        SPoly::from_coeffs(vec![qi(0), qi(1)])
    }

    pub fn from_coeffs(coeffs: Vec<Q>) -> Self {
        let mut p = SPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of s^k.
    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(|| qi(0))
    }

    pub fn add(&self, other: &SPoly) -> SPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        SPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &SPoly) -> SPoly {
        self.add(&other.scale(&qi(-1)))
    }

    pub fn scale(&self, c: &Q) -> SPoly {
        SPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &SPoly) -> SPoly {
        if self.is_zero() || other.is_zero() {
            return SPoly::zero();
        }
        let mut coeffs = vec![qi(0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        SPoly::from_coeffs(coeffs)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = qi(0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// p(s + a).
    pub fn shift(&self, a: &Q) -> SPoly {
        // Horner in the shifted variable: acc <- acc * (s + a) + c_k.
        let mut acc = SPoly::zero();
        let lin = SPoly::from_coeffs(vec![a.clone(), qi(1)]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&SPoly::constant(c.clone()));
        }
        acc
    }

    /// p(-s).
    pub fn reflect(&self) -> SPoly {
        SPoly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    /// Backward difference p(s) - p(s-1).
    pub fn nabla(&self) -> SPoly {
        self.sub(&self.shift(&qi(-1)))
    }
}

/// Descending powers, every coefficient explicit: `1/2*s^2 + 1/2*s`, `0`.
impl fmt::Display for SPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
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
            match k {
                0 => write!(f, "{}", format_q(&mag))?,
                1 => write!(f, "{}*s", format_q(&mag))?,
                _ => write!(f, "{}*s^{}", format_q(&mag), k)?,
            }
        }
        Ok(())
    }
}

/// Interpolates the unique polynomial through the given points (distinct x).
pub fn lagrange(points: &[(Q, Q)]) -> SPoly {
    let mut total = SPoly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut basis = SPoly::constant(qi(1));
        let mut denom = qi(1);
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&SPoly::from_coeffs(vec![-xj.clone(), qi(1)]));
            denom *= xi - xj;
        }
        total = total.add(&basis.scale(&(yi / denom)));
    }
    total
}

fn count_tree(t: &Tree, s: u64, strict: bool, memo: &mut HashMap<(Tree, u64), BigInt>) -> BigInt {
    if s == 0 {
        return BigInt::zero();
    }
    if let Some(v) = memo.get(&(t.clone(), s)) {
        return v.clone();
    }
    // Root takes value j; children map into the s-j+1 (weak) or s-j
    // (strict) values above it.
    let mut total = BigInt::zero();
    for j in 1..=s {
        let room = if strict { s - j } else { s - j + 1 };
        let mut prod = BigInt::from(1);
        for c in t.children() {
            prod *= count_tree(c, room, strict, memo);
            if prod.is_zero() {
                break;
            }
        }
        total += prod;
    }
    memo.insert((t.clone(), s), total.clone());
    total
}

/// Number of order-preserving maps from the forest poset into a chain of
/// length s (weakly increasing away from the roots).
pub fn count_weak_maps(forest: &[Tree], s: u64) -> BigInt {
    let mut memo = HashMap::new();
    let mut prod = BigInt::from(1);
    for t in forest {
        prod *= count_tree(t, s, false, &mut memo);
    }
    prod
}

/// Strictly increasing along every edge.
pub fn count_strict_maps(forest: &[Tree], s: u64) -> BigInt {
    let mut memo = HashMap::new();
    let mut prod = BigInt::from(1);
    for t in forest {
        prod *= count_tree(t, s, true, &mut memo);
    }
    prod
}

/// Order polynomial of the forest: degree v(F), matches the weak map counts
/// at every nonnegative integer.
pub fn order_polynomial(forest: &[Tree]) -> SPoly {
    let v: u64 = forest.iter().map(|t| t.vertices()).sum();
    let points: Vec<(Q, Q)> = (0..=v)
        .map(|s| (qi(s as i64), Q::from_integer(count_weak_maps(forest, s))))
        .collect();
    lagrange(&points)
}

/// Strict order polynomial of the forest.
pub fn strict_order_polynomial(forest: &[Tree]) -> SPoly {
    let v: u64 = forest.iter().map(|t| t.vertices()).sum();
    let points: Vec<(Q, Q)> = (0..=v)
        .map(|s| (qi(s as i64), Q::from_integer(count_strict_maps(forest, s))))
        .collect();
    lagrange(&points)
}

/// Order polynomial of a single tree.
pub fn tree_order_polynomial(t: &Tree) -> SPoly {
    order_polynomial(std::slice::from_ref(t))
}

/// theta of a root-0 tree: coefficient of s in the order polynomial of the
/// unique branch when there is exactly one, else 0.
pub fn theta(t: &Tree) -> Q {
    if t.branch_count() != 1 {
        return qi(0);
    }
    tree_order_polynomial(&t.children()[0]).coeff(1)
}

/// varphi of a tree: coefficient of s in its order polynomial. Equals theta
/// of the tree grafted below a fresh root.
pub fn varphi(t: &Tree) -> Q {
    tree_order_polynomial(t).coeff(1)
}

/// Shared memo for theta over canonical trees.
#[derive(Default)]
pub struct ThetaTable {
    memo: HashMap<Tree, Q>,
}

impl ThetaTable {
    pub fn new() -> Self {
        ThetaTable::default()
    }

    pub fn theta(&mut self, t: &Tree) -> Q {
        if let Some(v) = self.memo.get(t) {
            return v.clone();
        }
        let v = theta(t);
        self.memo.insert(t.clone(), v.clone());
        v
    }

    pub fn varphi(&mut self, t: &Tree) -> Q {
        self.theta(&b_plus(std::slice::from_ref(t), 0))
    }
}

/// theta by its recursion instead of via the order polynomial: for a root-0
/// tree with one branch and v >= 3 vertices,
/// theta(T) = 1 - sum over m >= 2 of (1/m!) times the sum over descending
/// chains of m-1 single-edge cuts of the product of theta over the grafted
/// pieces and theta of the final remainder.
pub fn theta_recursive(t: &Tree) -> Q {
    if t.branch_count() != 1 {
        return qi(0);
    }
    if t.vertices() == 2 {
        return qi(1);
    }
    let mut total = qi(1);
    let mut factorial = qi(1);
    for m in 2..=t.vertices() {
        factorial *= qi(m as i64);
        let mut inner = qi(0);
        for chain in descending_cut_chains(t, (m - 1) as usize, CutKind::SingleEdge, false) {
            // Take the remainder first: when it is the bare root its theta
            // is 0 and the term dies, which also keeps the recursion off
            // the root-edge piece (that piece is the whole tree again).
            let mut prod = theta_recursive(&chain.remainder);
            if prod.is_zero() {
                continue;
            }
            for pruned in &chain.pruned {
                // A single-edge cut prunes exactly one subtree.
                prod *= theta_recursive(&b_plus(pruned, 0));
            }
            inner += prod;
        }
        total -= inner / factorial.clone();
    }
    total
}

/// Backward difference of the order polynomial of a root-0 tree, expanded
/// through theta: nabla Omega(T, s) = theta(T) s + sum_{k>=2} (s^k/k!) times
/// the chain sums of theta over grafted pieces and the remainder.
pub fn nabla_theta_expansion(t: &Tree) -> SPoly {
    let mut table = ThetaTable::new();
    let mut out = SPoly::s().scale(&table.theta(t));
    let mut factorial = qi(1);
    for k in 2..=t.vertices() as usize {
        factorial *= qi(k as i64);
        let mut inner = qi(0);
        for chain in descending_cut_chains(t, k - 1, CutKind::SingleEdge, false) {
            let mut prod = table.theta(&chain.remainder);
            for pruned in &chain.pruned {
                prod *= table.theta(&b_plus(pruned, 0));
            }
            inner += prod;
        }
        let mut mono = vec![qi(0); k + 1];
        mono[k] = inner / factorial.clone();
        out = out.add(&SPoly::from_coeffs(mono));
    }
    out
}
