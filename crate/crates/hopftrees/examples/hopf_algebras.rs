//! The two Hopf algebras on labeled rooted trees and the pairing that
//! makes them dual: the grafting algebra on grafted trees and the
//! cut-based algebra on forests.
//!
//! Run with: cargo run --example hopf_algebras

use hopftrees::hopf_ck::{ck_antipode, ck_coproduct, ck_product, pairing, CKVector};
use hopftrees::hopf_gl::{
    gl_antipode, gl_coproduct, gl_product, is_primitive, GLVector,
};
use hopftrees::trees::{parse_forest, parse_tree};
use hopftrees::format_q;

fn main() {
    // Grafted trees (root labeled 0) multiply by attaching the branches of
    // the left factor to vertices of the right factor in all ways.
    let a = GLVector::from_tree(parse_tree("(0 (1))").unwrap());
    let b = GLVector::from_tree(parse_tree("(0 (2))").unwrap());
    println!("grafting product:");
    println!("  [{}] * [{}] = {}", "(0 (1))", "(0 (2))", gl_product(&a, &b));
    println!("  [{}] * [{}] = {}", "(0 (2))", "(0 (1))", gl_product(&b, &a));

    // The coproduct distributes branches over the two tensor legs; trees
    // with a single branch are primitive.
    let shrub = GLVector::from_tree(parse_tree("(0 (1) (1))").unwrap());
    println!("coproduct of (0 (1) (1)): {}", gl_coproduct(&shrub));
    println!("  (0 (1 (1))) primitive? {}", is_primitive(&GLVector::from_tree(
        parse_tree("(0 (1 (1)))").unwrap())));
    println!("  (0 (1) (1)) primitive? {}", is_primitive(&shrub));
    println!("antipode of (0 (1) (1)): {}", gl_antipode(&shrub));

    // Forests multiply by disjoint union; the coproduct sums over
    // admissible cuts.
    let f = CKVector::from_forest(parse_forest("(1 (1))").unwrap());
    let g = CKVector::from_forest(parse_forest("(1)").unwrap());
    println!("forest product: {}", ck_product(&f, &g));
    println!("forest coproduct of (1 (1)): {}", ck_coproduct(&f));
    println!("forest antipode of (1 (1)): {}", ck_antipode(&f));

    // The pairing couples a grafted tree with a forest; it vanishes unless
    // the forest is the tree's branch list, and then picks up the
    // automorphism order.
    let x = GLVector::from_tree(parse_tree("(0 (1) (1))").unwrap());
    for fs in ["(1) (1)", "(1 (1))", "(1)"] {
        let c = CKVector::from_forest(parse_forest(fs).unwrap());
        println!("<(0 (1) (1)), {}> = {}", fs, format_q(&pairing(&x, &c)));
    }
}
