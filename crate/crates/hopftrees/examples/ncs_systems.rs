//! Two realizations of the same five-part system of series equations: one
//! with coefficients in the grafting algebra of trees, one with
//! coefficients acting as differential operators. Both are checked by the
//! shared verifier.
//!
//! Run with: cargo run --example ncs_systems

use hopftrees::ncseries::{random_automorphism, TruncationSpec};
use hopftrees::ncsym::{omega_trees, operator_tuple, verify_ncs, GlHost, OpHost};

fn main() {
    // The tree-valued system over label set {1}, to order t^4.
    let tuple = omega_trees(&[1], 4).unwrap();
    println!("tree-valued system, low components:");
    println!("  f_1 = {}", tuple.f[1]);
    println!("  f_2 = {}", tuple.f[2]);
    println!("  g_2 = {}", tuple.g[2]);
    println!("  d_2 = {}", tuple.d[2]);
    println!("  h_1 = {}", tuple.h[1]);
    println!("  m_1 = {}", tuple.m[1]);

    let report = verify_ncs(&GlHost, &tuple, 4);
    println!("equation checks:");
    for eq in &report.equations {
        println!("  {:<28} {} (to order {})", eq.name,
            if eq.passed { "pass" } else { "FAIL" }, eq.checked_to);
    }
    assert!(report.all_passed());

    // The same equations hold for the operator family attached to a random
    // two-variable automorphism, tested by action on short words.
    let tr = TruncationSpec::new(2, 6, 4, false);
    let auto = random_automorphism(11, &tr, &[1, 2], 1, 1);
    let ops = operator_tuple(&auto).unwrap();
    let host = OpHost { trunc: tr, max_word_len: 3 };
    let report = verify_ncs(&host, &ops, 4);
    println!("operator-valued system for a random map:");
    for eq in &report.equations {
        println!("  {:<28} {} (to order {})", eq.name,
            if eq.passed { "pass" } else { "FAIL" }, eq.checked_to);
    }
    assert!(report.all_passed());
}
