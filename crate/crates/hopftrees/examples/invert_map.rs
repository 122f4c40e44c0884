//! Invert a formal automorphism F = z - H(z) two independent ways: the
//! closed tree expansion and fixed-point iteration. On the quadratic
//! one-variable map the coefficients are the Catalan numbers.
//!
//! Run with: cargo run --example invert_map

use hopftrees::diffop::TreeCalculus;
use hopftrees::ncseries::{
    random_automorphism, Automorphism, NCSeries, SeriesVector, TruncationSpec,
};
use std::collections::BTreeMap;

fn main() {
    // F(z) = z - t z^2, truncated at t^6 and z^8.
    let tr = TruncationSpec::new(1, 8, 6, true);
    let h = SeriesVector::new(&tr, vec![NCSeries::parse(&tr, "z1^2").unwrap()]);
    let auto = Automorphism::new(&tr, 1, BTreeMap::from([(1, h)])).unwrap();
    println!("F(z) = {}", auto.f().comp(0));

    let mut calc = TreeCalculus::new(&auto);
    let tree_inverse = calc.tree_inverse();
    let fixed = auto.fixed_point_inverse().unwrap();
    println!("inverse by tree expansion:");
    println!("  {}", tree_inverse.comp(0));
    println!("backends agree: {}", tree_inverse == fixed);
    let check = auto.f().compose(&tree_inverse).unwrap();
    println!("F(inverse(z)) = {}", check.comp(0));

    // The same machinery runs on noncommuting variables; the inverse of a
    // two-variable map keeps track of word order.
    let tr2 = TruncationSpec::new(2, 5, 3, false);
    let auto2 = random_automorphism(7, &tr2, &[1, 2], 2, 1);
    println!("a random two-variable map with weights {:?}:", auto2.weights());
    for (i, c) in auto2.f().comps().iter().enumerate() {
        println!("  F_{} = {}", i + 1, c);
    }
    let inv2 = TreeCalculus::new(&auto2).tree_inverse();
    println!("its inverse:");
    for (i, c) in inv2.comps().iter().enumerate() {
        println!("  G_{} = {}", i + 1, c);
    }
    assert_eq!(inv2, auto2.fixed_point_inverse().unwrap());
}
