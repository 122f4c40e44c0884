//! The differential log of a formal automorphism and the one-parameter
//! flow it generates: F at s = 1, the inverse at s = -1, functional square
//! roots at s = 1/2, and integer powers by composition.
//!
//! Run with: cargo run --example dlog_and_flow

use hopftrees::diffop::{OpSeries, TreeCalculus};
use hopftrees::ncseries::{Automorphism, NCSeries, SeriesVector, TruncationSpec};
use hopftrees::{q, qi};
use std::collections::BTreeMap;

fn main() {
    let tr = TruncationSpec::new(1, 7, 5, true);
    let h = SeriesVector::new(&tr, vec![NCSeries::parse(&tr, "z1^2").unwrap()]);
    let auto = Automorphism::new(&tr, 1, BTreeMap::from([(1, h)])).unwrap();
    let mut calc = TreeCalculus::new(&auto);

    // a(t) is the coefficient of the derivation whose exponential carries
    // z to F(z).
    let a = calc.d_log();
    println!("D-Log of F(z) = z - t z^2:");
    println!("  a = {}", a.comp(0));
    let ident = SeriesVector::identity(&tr);
    let exp = OpSeries::from_derivation_series(&a).exp();
    println!("  exp([a d/dz]) z = F(z): {}", exp.apply_vec(&ident) == auto.f());

    // The flow interpolates: s = 0 is the identity, s = 1 is F, s = -1 is
    // the compositional inverse, and the group law holds in s.
    println!("flow endpoints:");
    println!("  flow(0) = z: {}", calc.flow(&qi(0)) == ident);
    println!("  flow(1) = F: {}", calc.flow(&qi(1)) == auto.f());
    println!(
        "  flow(-1) = inverse: {}",
        calc.flow(&qi(-1)) == auto.fixed_point_inverse().unwrap()
    );

    // A functional square root of F.
    let half = calc.flow(&q(1, 2));
    println!("flow(1/2) = {}", half.comp(0));
    println!("  its square is F: {}", half.compose(&half).unwrap() == auto.f());

    // Integer powers agree with iterated composition.
    let f = auto.f();
    let ff = f.compose(&f).unwrap();
    println!("mth_power(2) = F o F: {}", calc.mth_power(2) == ff);
    println!("F o F = {}", ff.comp(0));
}
