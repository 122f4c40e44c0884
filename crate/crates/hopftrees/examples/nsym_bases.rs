//! Noncommutative symmetric functions from scratch: the complete, power
//! sum, and two Eulerian-type bases solved out of their defining series
//! equations, the Hopf structure, and the map into trees.
//!
//! Run with: cargo run --example nsym_bases

use hopftrees::ncsym::{
    injectivity_rank, nsym_antipode, nsym_coproduct, solve_bases, specialize_t, NSym,
};

fn main() {
    let b = solve_bases(4);
    println!("bases in the elementary generators L1, L2, ...:");
    for m in 2..=4usize {
        println!("  S_{}   = {}", m, b.s[m]);
        println!("  Phi_{} = {}", m, b.phi[m]);
        println!("  Psi_{} = {}", m, b.psi[m]);
        println!("  Xi_{}  = {}", m, b.xi[m]);
    }

    // Hopf structure: the coproduct is divided-power on each generator,
    // the power sums come out primitive, and the antipode on S returns the
    // elementary generator up to sign.
    println!("coproduct of L2: {}", tensor_string(&nsym_coproduct(&NSym::gen(2))));
    println!("coproduct of Psi_3 minus its primitive part is zero: {}",
        is_primitive(&b.psi[3]));
    println!("antipode of S_3: {}", nsym_antipode(&b.s[3]));

    // Specializing L_m to the tree side sends each basis to the matching
    // component of the tree-valued system.
    let image = specialize_t(&[1], &b.psi[2], 3).unwrap();
    println!("tree image of Psi_2 over labels {{1}}: {}", image);

    // The specialization is injective in each weight: its matrix on the
    // 2^(m-1) words of weight m has full rank.
    for m in 1..=4 {
        let (rank, dim) = injectivity_rank(m).unwrap();
        println!("weight {}: rank {} of {}", m, rank, dim);
    }
}

fn word_string(w: &[u32]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.iter().map(|m| format!("L{}", m)).collect::<Vec<_>>().join(".")
}

fn tensor_string(x: &hopftrees::ncsym::NSymTensor) -> String {
    x.terms()
        .map(|((l, r), c)| {
            format!("{}*({} x {})", hopftrees::format_q(c), word_string(l), word_string(r))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn is_primitive(x: &NSym) -> bool {
    use hopftrees::ncsym::NSymTensor;
    let prim = NSymTensor::from_pair(x, &NSym::one()).add(&NSymTensor::from_pair(&NSym::one(), x));
    nsym_coproduct(x) == prim
}
