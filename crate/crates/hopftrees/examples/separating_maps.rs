//! Every labeled rooted tree T has a polynomial automorphism tailored to
//! it: the tree expansion of that map is nonzero on T but vanishes on any
//! other tree of the same or larger weight.
//!
//! Run with: cargo run --example separating_maps

use hopftrees::diffop::{separating_automorphism, TreeCalculus};
use hopftrees::trees::{parse_tree, TreeEnumerator};

fn main() {
    let t = parse_tree("(1 (1) (2))").unwrap();
    let auto = separating_automorphism(&t, 1);
    println!("separating map for {}:", t);
    println!("  {} variables, truncation at t^{} and z-degree {}",
        auto.trunc().vars, auto.trunc().t_order, auto.trunc().z_degree);
    for m in auto.weights() {
        let h = auto.h_piece(m).unwrap();
        for (i, c) in h.comps().iter().enumerate() {
            if !c.is_zero() {
                println!("  H_[{}] component {}: {}", m, i + 1, c);
            }
        }
    }

    // P is the tree expansion attached to the map. It detects T and kills
    // every other tree that is at least as heavy.
    let mut calc = TreeCalculus::new(&auto);
    let own = calc.p_tree(&t);
    let idx = own.comps().iter().position(|c| !c.is_zero()).unwrap();
    println!("P_T component {} = {}", idx + 1, own.comp(idx));

    let e = TreeEnumerator::new(&[1, 2], 4).unwrap();
    let mut killed = 0;
    for other in e.trees_up_to(4) {
        if other == t || other.weight() < t.weight() {
            continue;
        }
        assert!(calc.p_tree(&other).is_zero(), "P should vanish on {}", other);
        killed += 1;
    }
    println!(
        "P vanishes on all {} enumerated trees of weight at least {} other than T",
        killed,
        t.weight()
    );
}
