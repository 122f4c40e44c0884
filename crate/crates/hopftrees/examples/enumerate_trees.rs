//! Enumerate labeled rooted trees, inspect automorphism orders, and list
//! the admissible cuts of a tree.
//!
//! Run with: cargo run --example enumerate_trees

use hopftrees::trees::{admissible_cuts, format_forest, parse_tree, TreeEnumerator};

fn main() {
    // Over a single label the counts match the unlabeled rooted trees.
    let e = TreeEnumerator::new(&[1], 6).unwrap();
    println!("rooted trees with every vertex labeled 1:");
    for w in 1..=6 {
        let level = e.trees_of_weight(w);
        println!("  weight {}: {} trees", w, level.len());
    }
    println!("  the trees of weight 3:");
    for t in e.trees_of_weight(3) {
        println!("    {}  (aut order {})", t, t.aut_order());
    }

    // Labels multiply the counts but not the shapes.
    let e2 = TreeEnumerator::new(&[1, 2], 3).unwrap();
    println!("over labels {{1, 2}} there are {} trees of weight 3", e2.trees_of_weight(3).len());

    // Grafted trees (root labeled 0, labels elsewhere) index the series
    // calculus; weight counts only the labeled vertices.
    println!("grafted trees of weight 3 over {{1}}:");
    for t in e.grafted_of_weight(3) {
        println!("  {}", t);
    }

    // An admissible cut severs edges so that no two lie on a root path.
    let t = parse_tree("(1 (1) (1 (1)))").unwrap();
    println!("admissible cuts of {}:", t);
    for cut in admissible_cuts(&t) {
        println!(
            "  cut {} edge(s): pruned [{}], remainder {}",
            cut.edges.len(),
            format_forest(&cut.pruned),
            cut.remainder
        );
    }
}
