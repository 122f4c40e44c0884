//! Labeled rooted trees in canonical form.
//!
//! A tree carries a nonnegative integer label on every vertex. The weight
//! |T| is the sum of all labels and v(T) is the vertex count. Trees are
//! canonical by construction: [`Tree::new`] sorts children ascending under
//! the total order (weight, vertex count, label, children lexicographic),
//! so structural equality is isomorphism of labeled rooted trees.
//!
//! Edges are identified by the address of their lower vertex (the path of
//! child indices from the root). An admissible cut is an antichain of edges;
//! removing it splits the tree into the pruned forest (subtrees hanging
//! below the cut) and the remainder (the part containing the root).
//!
//! Tree literals use the grammar `tree ::= '(' label tree* ')'` and a forest
//! is a whitespace-separated sequence of trees.

use num::BigUint;
use std::fmt;

/// Vertex label. Weight-set members are positive; the extra root used by
/// grafting carries label 0.
pub type Label = u32;

/// Path of child indices from the root to a vertex. The root is `[]`; an
/// edge is named by the address of its lower (non-root) vertex.
pub type Address = Vec<usize>;

/// Errors from parsing and tree surgery.
#[derive(Debug, thiserror::Error)]
pub enum TreesError {
    #[error("tree parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid weight set: {0}")]
    InvalidWeights(String),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
}

/// A labeled rooted tree in canonical form. Children are stored sorted, so
/// equal values are exactly isomorphic trees.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tree {
    label: Label,
    children: Vec<Tree>,
    weight: u64,
    vertices: u64,
}

impl Tree {
    /// Builds a tree from a label and any child order; children are sorted
    /// into canonical order here, which canonicalizes bottom-up built trees.
    pub fn new(label: Label, mut children: Vec<Tree>) -> Self {
        children.sort();
        let weight = label as u64 + children.iter().map(|c| c.weight).sum::<u64>();
        let vertices = 1 + children.iter().map(|c| c.vertices).sum::<u64>();
        Tree { label, children, weight, vertices }
    }

    /// Single vertex.
    pub fn leaf(label: Label) -> Self {
        Tree::new(label, Vec::new())
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    /// |T|: sum of all vertex labels.
    pub fn weight(&self) -> u64 {
        self.weight
    }

    /// v(T): number of vertices.
    pub fn vertices(&self) -> u64 {
        self.vertices
    }

    /// o(T): number of root children.
    pub fn branch_count(&self) -> usize {
        self.children.len()
    }

    /// Length of a longest root-to-leaf path, 0 for a single vertex.
    pub fn height(&self) -> u64 {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// Same shape with the root label replaced.
    pub fn relabel_root(&self, label: Label) -> Tree {
        Tree::new(label, self.children.clone())
    }

    /// B-: the forest of root branches.
    pub fn b_minus(&self) -> Vec<Tree> {
        self.children.clone()
    }

    /// Order of the automorphism group: product over maximal runs of equal
    /// children of mult! * aut(child)^mult.
    pub fn aut_order(&self) -> BigUint {
        let mut total = BigUint::from(1u32);
        let mut i = 0;
        while i < self.children.len() {
            let mut j = i;
            while j < self.children.len() && self.children[j] == self.children[i] {
                j += 1;
            }
            let mult = (j - i) as u64;
            for k in 1..=mult {
                total *= BigUint::from(k);
            }
            let child_aut = self.children[i].aut_order();
            for _ in 0..mult {
                total *= &child_aut;
            }
            i = j;
        }
        total
    }

    /// True when every vertex has at most one child (a single path).
    pub fn is_path(&self) -> bool {
        match self.children.len() {
            0 => true,
            1 => self.children[0].is_path(),
            _ => false,
        }
    }
}

/// Canonical total order: weight, then vertex count, then label, then
/// children lexicographically.
impl Ord for Tree {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight
            .cmp(&other.weight)
            .then(self.vertices.cmp(&other.vertices))
            .then(self.label.cmp(&other.label))
            .then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        for c in &self.children {
            write!(f, " {}", c)?;
        }
        write!(f, ")")
    }
}

/// B+: grafts a forest onto a fresh root.
pub fn b_plus(forest: &[Tree], label: Label) -> Tree {
    Tree::new(label, forest.to_vec())
}

/// Sorts a forest into canonical (ascending) order.
pub fn canonical_forest(mut forest: Vec<Tree>) -> Vec<Tree> {
    forest.sort();
    forest
}

/// Isomorphism of labeled rooted trees is equality of canonical forms.
pub fn isomorphic(a: &Tree, b: &Tree) -> bool {
    a == b
}

/// Renders a forest as space-separated tree literals; empty forest is ``.
pub fn format_forest(forest: &[Tree]) -> String {
    forest.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser { bytes: s.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T, TreesError> {
        Err(TreesError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn label(&mut self) -> Result<Label, TreesError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a label");
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match text.parse::<Label>() {
            Ok(v) => Ok(v),
            Err(_) => self.err("label out of range"),
        }
    }

    fn tree(&mut self) -> Result<Tree, TreesError> {
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return self.err("expected '('");
        }
        self.pos += 1;
        self.skip_ws();
        let label = self.label()?;
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    return Ok(Tree::new(label, children));
                }
                Some(b'(') => children.push(self.tree()?),
                _ => return self.err("expected a subtree or ')'"),
            }
        }
    }
}

/// Parses a single tree literal `(label tree*)`; the result is canonical.
pub fn parse_tree(s: &str) -> Result<Tree, TreesError> {
    let mut p = Parser::new(s);
    let t = p.tree()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return p.err("trailing input after tree");
    }
    Ok(t)
}

/// Parses a whitespace-separated forest; the result is sorted canonical.
pub fn parse_forest(s: &str) -> Result<Vec<Tree>, TreesError> {
    let mut p = Parser::new(s);
    let mut forest = Vec::new();
    loop {
        p.skip_ws();
        if p.pos == p.bytes.len() {
            break;
        }
        forest.push(p.tree()?);
    }
    Ok(canonical_forest(forest))
}

/// Addresses of all edges (equivalently of all non-root vertices), preorder.
pub fn edge_addresses(t: &Tree) -> Vec<Address> {
    fn walk(t: &Tree, addr: &mut Address, out: &mut Vec<Address>) {
        for (i, c) in t.children().iter().enumerate() {
            addr.push(i);
            out.push(addr.clone());
            walk(c, addr, out);
            addr.pop();
        }
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

/// One admissible cut: the antichain of removed edges, the pruned forest
/// below the cut and the remainder containing the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub edges: Vec<Address>,
    pub pruned: Vec<Tree>,
    pub remainder: Tree,
}

/// All admissible cuts of `t`, including the empty cut (whose remainder is
/// `t` itself). The full-tree term of a coproduct is not a cut here.
pub fn admissible_cuts(t: &Tree) -> Vec<Cut> {
    // Cuts of a subtree, remainder rooted at the subtree root. Per child:
    // either cut its edge or keep it and cut inside it independently.
    fn rec(t: &Tree, addr: &mut Address) -> Vec<(Vec<Address>, Vec<Tree>)> {
        // Pairs (cut edges, pruned forest); the remainder is rebuilt by the
        // caller from what is left, so track kept children per combination.
        let mut acc: Vec<(Vec<Address>, Vec<Tree>, Vec<Tree>)> =
            vec![(Vec::new(), Vec::new(), Vec::new())];
        for (i, c) in t.children().iter().enumerate() {
            addr.push(i);
            let mut options: Vec<(Vec<Address>, Vec<Tree>, Option<Tree>)> =
                vec![(vec![addr.clone()], vec![c.clone()], None)];
            for (es, pr) in rec(c, addr) {
                let kept = rebuild(c, &es, addr);
                options.push((es, pr, Some(kept)));
            }
            addr.pop();
            let mut next = Vec::new();
            for (es0, pr0, kept0) in &acc {
                for (es1, pr1, kept1) in &options {
                    let mut es = es0.clone();
                    es.extend(es1.iter().cloned());
                    let mut pr = pr0.clone();
                    pr.extend(pr1.iter().cloned());
                    let mut kept = kept0.clone();
                    if let Some(k) = kept1 {
                        kept.push(k.clone());
                    }
                    next.push((es, pr, kept));
                }
            }
            acc = next;
        }
        acc.into_iter().map(|(es, pr, _)| (es, pr)).collect()
    }
    // rec enumerates the cut sets; rebuilding remainders via split_at keeps
    // the two code paths honest with each other.
    let mut out = Vec::new();
    for (mut es, _) in rec(t, &mut Vec::new()) {
        es.sort();
        let (pruned, remainder) = split_at(t, &es).expect("enumerated cut is valid");
        out.push(Cut { edges: es, pruned, remainder });
    }
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    out
}

fn rebuild(t: &Tree, cut: &[Address], addr: &Address) -> Tree {
    // Remainder of the subtree at `addr` after removing `cut` edges below it.
    let mut kept = Vec::new();
    for (i, c) in t.children().iter().enumerate() {
        let mut a = addr.clone();
        a.push(i);
        if cut.contains(&a) {
            continue;
        }
        kept.push(rebuild(c, cut, &a));
    }
    Tree::new(t.label(), kept)
}

/// Splits `t` along an antichain of edge addresses. Returns the pruned
/// forest (canonical) and the remainder. Rejects invalid addresses, the
/// root address, duplicates and non-antichains.
pub fn split_at(t: &Tree, cut: &[Address]) -> Result<(Vec<Tree>, Tree), TreesError> {
    for e in cut {
        if e.is_empty() {
            return Err(TreesError::InvalidCut("the root is not an edge".into()));
        }
        if vertex_at(t, e).is_none() {
            return Err(TreesError::InvalidCut(format!("no vertex at address {:?}", e)));
        }
    }
    for (i, a) in cut.iter().enumerate() {
        for (j, b) in cut.iter().enumerate() {
            if i != j && a.len() <= b.len() && &b[..a.len()] == a.as_slice() {
                return Err(TreesError::InvalidCut(format!(
                    "edges {:?} and {:?} are comparable",
                    a, b
                )));
            }
        }
    }
    fn walk(t: &Tree, cut: &[Address], addr: &mut Address, pruned: &mut Vec<Tree>) -> Tree {
        let mut kept = Vec::new();
        for (i, c) in t.children().iter().enumerate() {
            addr.push(i);
            if cut.iter().any(|e| e == addr) {
                pruned.push(c.clone());
            } else {
                kept.push(walk(c, cut, addr, pruned));
            }
            addr.pop();
        }
        Tree::new(t.label(), kept)
    }
    let mut pruned = Vec::new();
    let remainder = walk(t, cut, &mut Vec::new(), &mut pruned);
    Ok((canonical_forest(pruned), remainder))
}

/// Which cuts a chain step may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutKind {
    /// Any admissible cut.
    Admissible,
    /// Exactly one edge.
    SingleEdge,
}

/// A descending chain of cuts: step i is a cut of the remainder left by
/// step i-1. `cuts[i]` uses addresses local to that step's input tree,
/// `pruned[i]` is the forest removed at step i, and `remainder` is what is
/// left after the last step.
#[derive(Clone, Debug)]
pub struct CutChain {
    pub cuts: Vec<Vec<Address>>,
    pub pruned: Vec<Vec<Tree>>,
    pub remainder: Tree,
}

/// All descending chains of `len` cuts on `t`. With `CutKind::Admissible`
/// the empty cut is included only when `allow_empty` is set; single-edge
/// chains are nonempty by definition.
pub fn descending_cut_chains(
    t: &Tree,
    len: usize,
    kind: CutKind,
    allow_empty: bool,
) -> Vec<CutChain> {
    if len == 0 {
        return vec![CutChain { cuts: Vec::new(), pruned: Vec::new(), remainder: t.clone() }];
    }
    let steps: Vec<(Vec<Address>, Vec<Tree>, Tree)> = match kind {
        CutKind::Admissible => admissible_cuts(t)
            .into_iter()
            .filter(|c| allow_empty || !c.edges.is_empty())
            .map(|c| (c.edges, c.pruned, c.remainder))
            .collect(),
        CutKind::SingleEdge => edge_addresses(t)
            .into_iter()
            .map(|e| {
                let (pruned, remainder) = split_at(t, std::slice::from_ref(&e)).unwrap();
                (vec![e], pruned, remainder)
            })
            .collect(),
    };
    let mut out = Vec::new();
    for (es, pr, rem) in steps {
        for tail in descending_cut_chains(&rem, len - 1, kind, allow_empty) {
            let mut cuts = vec![es.clone()];
            cuts.extend(tail.cuts);
            let mut pruned = vec![pr.clone()];
            pruned.extend(tail.pruned);
            out.push(CutChain { cuts, pruned, remainder: tail.remainder });
        }
    }
    out
}

fn vertex_at<'a>(t: &'a Tree, addr: &[usize]) -> Option<&'a Tree> {
    let mut cur = t;
    for &i in addr {
        cur = cur.children().get(i)?;
    }
    Some(cur)
}

/// Enumerates trees with labels from a fixed weight set, and the matching
/// forests, up to a weight bound. Lists are canonical and sorted; trees of
/// weight w appear in `trees_of_weight(w)` ascending.
pub struct TreeEnumerator {
    weights: Vec<Label>,
    max_weight: u64,
    trees: Vec<Vec<Tree>>,
    forests: Vec<Vec<Vec<Tree>>>,
}

impl TreeEnumerator {
    /// Builds all trees and forests of weight up to `max_weight` over the
    /// weight set `weights` (positive, deduplicated here).
    pub fn new(weights: &[Label], max_weight: u64) -> Result<Self, TreesError> {
        let mut ws: Vec<Label> = weights.to_vec();
        ws.sort_unstable();
        ws.dedup();
        if ws.is_empty() {
            return Err(TreesError::InvalidWeights("weight set is empty".into()));
        }
        if ws[0] == 0 {
            return Err(TreesError::InvalidWeights("weights must be positive".into()));
        }
        let mut e = TreeEnumerator {
            weights: ws,
            max_weight,
            trees: vec![Vec::new()],
            forests: vec![vec![Vec::new()]],
        };
        for w in 1..=max_weight {
            e.build_weight(w);
        }
        Ok(e)
    }

    fn build_weight(&mut self, w: u64) {
        // Trees of weight w: a root label m from the weight set over a
        // forest of weight w - m. Forests of weight w then use all trees of
        // weight <= w, so build trees first.
        let mut level = Vec::new();
        for &m in &self.weights {
            let m64 = m as u64;
            if m64 > w {
                break;
            }
            for forest in &self.forests[(w - m64) as usize] {
                level.push(b_plus(forest, m));
            }
        }
        level.sort();
        level.dedup();
        self.trees.push(level);

        let flat: Vec<&Tree> = (1..=w as usize).flat_map(|v| self.trees[v].iter()).collect();
        // Multisets as nondecreasing index sequences; `flat` is ascending in
        // the canonical order because weight is its leading key.
        fn rec(flat: &[&Tree], target: u64, start: usize, cur: &mut Vec<Tree>, out: &mut Vec<Vec<Tree>>) {
            if target == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..flat.len() {
                let w = flat[i].weight();
                if w > target {
                    break;
                }
                cur.push(flat[i].clone());
                rec(flat, target - w, i, cur, out);
                cur.pop();
            }
        }
        let mut forests = Vec::new();
        rec(&flat, w, 0, &mut Vec::new(), &mut forests);
        self.forests.push(forests);
    }

    pub fn weights(&self) -> &[Label] {
        &self.weights
    }

    pub fn max_weight(&self) -> u64 {
        self.max_weight
    }

    /// Trees of exactly this weight, canonical ascending.
    pub fn trees_of_weight(&self, w: u64) -> &[Tree] {
        assert!(w <= self.max_weight, "weight beyond enumeration bound");
        &self.trees[w as usize]
    }

    /// Trees of weights 1..=maxw, ascending by weight then canonical order.
    pub fn trees_up_to(&self, maxw: u64) -> Vec<Tree> {
        (1..=maxw).flat_map(|w| self.trees_of_weight(w).iter().cloned()).collect()
    }

    /// Forests of exactly this weight (weight 0 is the empty forest).
    pub fn forests_of_weight(&self, w: u64) -> &[Vec<Tree>] {
        assert!(w <= self.max_weight, "weight beyond enumeration bound");
        &self.forests[w as usize]
    }

    /// Root-0 trees of this weight: B+ of every forest of the same weight.
    /// Weight 0 yields the bare extra root.
    pub fn grafted_of_weight(&self, w: u64) -> Vec<Tree> {
        let mut out: Vec<Tree> =
            self.forests_of_weight(w).iter().map(|f| b_plus(f, 0)).collect();
        out.sort();
        out
    }

    /// Root-0 trees of weights 0..=maxw.
    pub fn grafted_up_to(&self, maxw: u64) -> Vec<Tree> {
        (0..=maxw).flat_map(|w| self.grafted_of_weight(w)).collect()
    }
}

/// Root-0 tree with exactly one root branch: B+ of a single tree.
pub fn is_grafted_primitive(t: &Tree) -> bool {
    t.label() == 0 && t.branch_count() == 1
}

/// Root-0 tree of height at most 1 (the bare root counts).
pub fn is_grafted_shrub(t: &Tree) -> bool {
    t.label() == 0 && t.height() <= 1
}

/// Root-0 single path (the bare root counts).
pub fn is_grafted_chain(t: &Tree) -> bool {
    t.label() == 0 && t.is_path()
}

/// Label of the unique leaf of a path tree.
pub fn path_leaf_label(t: &Tree) -> Option<Label> {
    if !t.is_path() {
        return None;
    }
    let mut cur = t;
    while let Some(c) = cur.children().first() {
        cur = c;
    }
    Some(cur.label())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    // Raw trees keep insertion order so canonicalization has work to do.
    #[derive(Clone, Debug)]
    struct Raw {
        label: Label,
        children: Vec<Raw>,
    }

    fn canon(r: &Raw) -> Tree {
        Tree::new(r.label, r.children.iter().map(canon).collect())
    }

    // Independent isomorphism oracle: recursive backtracking over child
    // matchings, never looking at the canonical order.
    fn iso_oracle(a: &Raw, b: &Raw) -> bool {
        if a.label != b.label || a.children.len() != b.children.len() {
            return false;
        }
        fn matching(xs: &[Raw], ys: &mut Vec<&Raw>) -> bool {
            if xs.is_empty() {
                return true;
            }
            for i in 0..ys.len() {
                if iso_oracle(&xs[0], ys[i]) {
                    let y = ys.remove(i);
                    if matching(&xs[1..], ys) {
                        ys.insert(i, y);
                        return true;
                    }
                    ys.insert(i, y);
                }
            }
            false
        }
        matching(&a.children, &mut b.children.iter().collect())
    }

    // Independent automorphism oracle: count root-fixing, parent- and
    // label-preserving vertex permutations.
    fn aut_oracle(t: &Tree) -> u64 {
        let mut labels = Vec::new();
        let mut parents = Vec::new();
        fn flatten(t: &Tree, parent: usize, labels: &mut Vec<Label>, parents: &mut Vec<usize>) {
            labels.push(t.label());
            parents.push(parent);
            let me = labels.len() - 1;
            for c in t.children() {
                flatten(c, me, labels, parents);
            }
        }
        flatten(t, usize::MAX, &mut labels, &mut parents);
        let n = labels.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut count = 0u64;
        fn heap(k: usize, perm: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
            if k <= 1 {
                f(perm);
                return;
            }
            for i in 0..k {
                heap(k - 1, perm, f);
                if k % 2 == 0 {
                    perm.swap(i, k - 1);
                } else {
                    perm.swap(0, k - 1);
                }
            }
        }
        heap(n, &mut perm, &mut |p: &[usize]| {
            if p[0] != 0 {
                return;
            }
            for v in 0..n {
                if labels[p[v]] != labels[v] {
                    return;
                }
                if v > 0 && p[parents[v]] != parents[p[v]] {
                    return;
                }
            }
            count += 1;
        });
        count
    }

    // Independent tree generator: all parent arrays with parent[i] < i,
    // all label assignments, deduplicated by canonical form.
    fn brute_trees(weights: &[Label], max_weight: u64) -> BTreeSet<Tree> {
        let max_v = max_weight as usize; // labels are >= 1
        let mut out = BTreeSet::new();
        for v in 1..=max_v {
            let mut parents = vec![0usize; v];
            loop {
                let mut labels = vec![0usize; v];
                loop {
                    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); v];
                    for i in 1..v {
                        kids[parents[i]].push(i);
                    }
                    fn build(i: usize, kids: &[Vec<usize>], labels: &[usize], ws: &[Label]) -> Tree {
                        Tree::new(
                            ws[labels[i]],
                            kids[i].iter().map(|&c| build(c, kids, labels, ws)).collect(),
                        )
                    }
                    let t = build(0, &kids, &labels, weights);
                    if t.weight() <= max_weight {
                        out.insert(t);
                    }
                    let mut i = 0;
                    loop {
                        if i == v {
                            break;
                        }
                        labels[i] += 1;
                        if labels[i] < weights.len() {
                            break;
                        }
                        labels[i] = 0;
                        i += 1;
                    }
                    if i == v {
                        break;
                    }
                }
                let mut i = 1;
                loop {
                    if i >= v {
                        break;
                    }
                    parents[i] += 1;
                    if parents[i] < i {
                        break;
                    }
                    parents[i] = 0;
                    i += 1;
                }
                if i >= v {
                    break;
                }
            }
        }
        out
    }

    fn t(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    #[test]
    fn parse_and_print_roundtrip() {
        for s in ["(1)", "(0)", "(2 (1) (1))", "(1 (1) (2 (1)))", "(0 (1 (1)))"] {
            assert_eq!(t(s).to_string(), s);
        }
        // Non-canonical input prints canonically.
        assert_eq!(t("(1 (2) (1))").to_string(), "(1 (1) (2))");
        assert_eq!(
            t("( 1 ( 1 )\n (1))").to_string(),
            "(1 (1) (1))"
        );
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "(", "()", "(1", "(1))", "1", "(1 2)", "(1 (2) x"] {
            assert!(parse_tree(s).is_err(), "accepted {:?}", s);
        }
    }

    #[test]
    fn weight_and_vertices() {
        let x = t("(2 (1) (3 (1)))");
        assert_eq!(x.weight(), 7);
        assert_eq!(x.vertices(), 4);
        assert_eq!(x.height(), 2);
        assert_eq!(x.branch_count(), 2);
    }

    #[test]
    fn aut_order_matches_brute_force() {
        for s in [
            "(1)",
            "(1 (1) (1))",
            "(1 (1) (1) (1))",
            "(1 (1 (1)) (1 (1)))",
            "(1 (1) (1 (1)))",
            "(1 (2) (2) (1))",
            "(0 (1 (1)) (1 (1)) (1))",
        ] {
            let x = t(s);
            assert_eq!(x.aut_order(), BigUint::from(aut_oracle(&x)), "tree {}", s);
        }
    }

    #[test]
    fn enumeration_counts_unlabeled() {
        // Rooted unlabeled trees on 1..7 vertices.
        let e = TreeEnumerator::new(&[1], 7).unwrap();
        let counts: Vec<usize> = (1..=7).map(|w| e.trees_of_weight(w).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20, 48]);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for (weights, maxw) in [(vec![1], 6u64), (vec![1, 2], 5), (vec![2, 3], 7)] {
            let e = TreeEnumerator::new(&weights, maxw).unwrap();
            let brute = brute_trees(&weights, maxw);
            let mine: BTreeSet<Tree> = e.trees_up_to(maxw).into_iter().collect();
            assert_eq!(mine, brute, "weights {:?}", weights);
            assert_eq!(e.trees_up_to(maxw).len(), mine.len(), "no duplicates");
        }
    }

    #[test]
    fn forests_partition_by_root() {
        // B+ is a bijection from weight-w forests onto weight-(w+m) trees
        // with root label m, for every m in the weight set.
        let e = TreeEnumerator::new(&[1, 2], 6).unwrap();
        for w in 1..=6u64 {
            let by_root: usize = [1u32, 2]
                .iter()
                .filter(|&&m| (m as u64) <= w)
                .map(|&m| e.forests_of_weight(w - m as u64).len())
                .sum();
            assert_eq!(e.trees_of_weight(w).len(), by_root);
        }
    }

    #[test]
    fn grafted_trees_have_root_zero() {
        let e = TreeEnumerator::new(&[1], 4).unwrap();
        assert_eq!(e.grafted_of_weight(0), vec![t("(0)")]);
        for w in 0..=4u64 {
            for x in e.grafted_of_weight(w) {
                assert_eq!(x.label(), 0);
                assert_eq!(x.weight(), w);
            }
        }
        // Same count as forests.
        assert_eq!(e.grafted_of_weight(4).len(), e.forests_of_weight(4).len());
    }

    #[test]
    fn cuts_of_small_trees() {
        // Single vertex: only the empty cut.
        let cuts = admissible_cuts(&t("(1)"));
        assert_eq!(cuts.len(), 1);
        assert!(cuts[0].edges.is_empty());

        // 2-chain: empty cut and the one edge.
        let cuts = admissible_cuts(&t("(1 (2))"));
        assert_eq!(cuts.len(), 2);
        assert_eq!(cuts[1].pruned, vec![t("(2)")]);
        assert_eq!(cuts[1].remainder, t("(1)"));

        // 3-chain: empty, top edge, bottom edge; the two edges are
        // comparable so never together.
        let ch3 = t("(1 (2 (3)))");
        let cuts = admissible_cuts(&ch3);
        assert_eq!(cuts.len(), 3);

        // Cherry: empty, left, right, both.
        let cherry = t("(1 (2) (3))");
        let cuts = admissible_cuts(&cherry);
        assert_eq!(cuts.len(), 4);
        let both: Vec<_> = cuts.iter().filter(|c| c.edges.len() == 2).collect();
        assert_eq!(both.len(), 1);
        assert_eq!(both[0].pruned, vec![t("(2)"), t("(3)")]);
        assert_eq!(both[0].remainder, t("(1)"));
    }

    #[test]
    fn split_rejects_bad_cuts() {
        let ch3 = t("(1 (2 (3)))");
        assert!(split_at(&ch3, &[vec![0], vec![0, 0]]).is_err(), "comparable edges");
        assert!(split_at(&ch3, &[vec![]]).is_err(), "root is not an edge");
        assert!(split_at(&ch3, &[vec![5]]).is_err(), "missing vertex");
        assert!(split_at(&ch3, &[vec![0], vec![0]]).is_err(), "duplicate edge");
    }

    #[test]
    fn single_edge_chains_on_paths() {
        // On the 3-chain only bottom-then-top survives two steps.
        let ch3 = t("(1 (1 (1)))");
        let chains = descending_cut_chains(&ch3, 2, CutKind::SingleEdge, false);
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].pruned[0], vec![t("(1)")]);
        assert_eq!(chains[0].pruned[1], vec![t("(1)")]);
        assert_eq!(chains[0].remainder, t("(1)"));
        // Chains may step upward: cutting a leaf then an edge above it.
        let y = t("(1 (1 (1) (1)))");
        let chains = descending_cut_chains(&y, 2, CutKind::SingleEdge, false);
        // Step 1 has 3 edges; remainders have 2, 2, 2 edges minus pruned
        // parts: (root edge -> 0 edges), (leaf -> 2 edges), (leaf -> 2).
        assert_eq!(chains.len(), 4);
    }

    #[test]
    fn admissible_chains_count_with_empty_steps() {
        let ch2 = t("(1 (1))");
        // Cuts: empty or the edge. Chains of length 2 allowing empties:
        // (empty, empty), (empty, edge), (edge, empty). After the edge the
        // remainder has no edges, so (edge, edge) is impossible.
        let chains = descending_cut_chains(&ch2, 2, CutKind::Admissible, true);
        assert_eq!(chains.len(), 3);
        let chains = descending_cut_chains(&ch2, 2, CutKind::Admissible, false);
        assert_eq!(chains.len(), 0);
    }

    fn arb_raw() -> impl Strategy<Value = Raw> {
        let leaf = (0u32..3).prop_map(|label| Raw { label, children: Vec::new() });
        leaf.prop_recursive(3, 10, 3, |inner| {
            ((0u32..3), prop::collection::vec(inner, 0..3))
                .prop_map(|(label, children)| Raw { label, children })
        })
    }

    proptest! {
        #[test]
        fn canonical_equality_is_isomorphism(a in arb_raw(), b in arb_raw()) {
            prop_assert_eq!(canon(&a) == canon(&b), iso_oracle(&a, &b));
        }

        #[test]
        fn shuffled_children_canonicalize_equal(a in arb_raw(), seed in 0u64..1000) {
            fn shuffle(r: &Raw, seed: &mut u64) -> Raw {
                let mut children: Vec<Raw> = r.children.iter().map(|c| shuffle(c, seed)).collect();
                for i in (1..children.len()).rev() {
                    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let j = (*seed >> 33) as usize % (i + 1);
                    children.swap(i, j);
                }
                Raw { label: r.label, children }
            }
            let mut s = seed;
            let shuffled = shuffle(&a, &mut s);
            prop_assert_eq!(canon(&a), canon(&shuffled));
        }

        #[test]
        fn display_roundtrips(a in arb_raw()) {
            let x = canon(&a);
            prop_assert_eq!(parse_tree(&x.to_string()).unwrap(), x);
        }

        #[test]
        fn cut_count_matches_subset_filter(a in arb_raw()) {
            let x = canon(&a);
            let edges = edge_addresses(&x);
            prop_assume!(edges.len() <= 10);
            // Oracle: filter all subsets for the antichain property.
            let mut oracle = 0usize;
            for mask in 0u32..(1 << edges.len()) {
                let chosen: Vec<&Address> = edges.iter().enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, e)| e)
                    .collect();
                let antichain = chosen.iter().enumerate().all(|(i, a)| {
                    chosen.iter().enumerate().all(|(j, b)| {
                        i == j || a.len() > b.len() || b[..a.len()] != a[..]
                    })
                });
                if antichain {
                    oracle += 1;
                }
            }
            let cuts = admissible_cuts(&x);
            prop_assert_eq!(cuts.len(), oracle);
            // Weight is conserved by every split.
            for c in &cuts {
                let pw: u64 = c.pruned.iter().map(|p| p.weight()).sum();
                prop_assert_eq!(pw + c.remainder.weight(), x.weight());
            }
        }

        #[test]
        fn aut_order_property(a in arb_raw()) {
            let x = canon(&a);
            prop_assume!(x.vertices() <= 7);
            prop_assert_eq!(x.aut_order(), BigUint::from(aut_oracle(&x)));
        }
    }

    #[test]
    fn path_helpers() {
        assert!(t("(0 (1 (2)))").is_path());
        assert!(!t("(0 (1) (2))").is_path());
        assert_eq!(path_leaf_label(&t("(0 (1 (2)))")), Some(2));
        assert_eq!(path_leaf_label(&t("(0)")), Some(0));
        assert_eq!(path_leaf_label(&t("(0 (1) (1))")), None);
        assert!(is_grafted_shrub(&t("(0)")));
        assert!(is_grafted_shrub(&t("(0 (1) (2))")));
        assert!(!is_grafted_shrub(&t("(0 (1 (1)))")));
        assert!(!is_grafted_shrub(&t("(1 (1))")));
        assert!(is_grafted_primitive(&t("(0 (3 (1) (2)))")));
        assert!(!is_grafted_primitive(&t("(0 (1) (1))")));
        assert!(is_grafted_chain(&t("(0 (1 (1)))")));
        assert!(!is_grafted_chain(&t("(0 (1) (1))")));
    }
}
