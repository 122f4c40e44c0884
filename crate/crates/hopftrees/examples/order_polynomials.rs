//! Order polynomials of tree posets: counting monotone maps, the
//! strict/weak reciprocity, and the theta coefficients.
//!
//! Run with: cargo run --example order_polynomials

use hopftrees::orderpoly::{
    count_weak_maps, order_polynomial, strict_order_polynomial, theta, tree_order_polynomial,
    varphi,
};
use hopftrees::trees::{parse_forest, parse_tree};
use hopftrees::qi;

fn main() {
    // Omega(T, s) counts weakly order-preserving maps from the poset of T
    // into a chain with s elements; it is a polynomial in s.
    let chain = parse_tree("(1 (1))").unwrap();
    let p = tree_order_polynomial(&chain);
    println!("Omega({}, s) = {}", chain, p);
    for s in 1..=4u64 {
        println!(
            "  s = {}: polynomial gives {}, direct count gives {}",
            s,
            p.eval(&qi(s as i64)),
            count_weak_maps(std::slice::from_ref(&chain), s)
        );
    }

    // A bushier example, and the forest version.
    let v = parse_tree("(1 (1) (1))").unwrap();
    println!("Omega({}, s) = {}", v, tree_order_polynomial(&v));
    let forest = parse_forest("(1) (1 (1))").unwrap();
    println!("for the forest of both components, Omega = {}", order_polynomial(&forest));

    // Reciprocity: the strict count is the weak count at -s, up to the
    // parity of the vertex count.
    let strict = strict_order_polynomial(std::slice::from_ref(&v));
    let sign = if v.vertices() % 2 == 0 { qi(1) } else { qi(-1) };
    let reflected = tree_order_polynomial(&v).reflect().scale(&sign);
    println!("strict Omega({}, s) = {}", v, strict);
    println!("  reflected weak form = {}", reflected);
    assert_eq!(strict, reflected);

    // The difference operator peels the root off a grafted tree.
    let grafted = parse_tree("(0 (1 (1)))").unwrap();
    let nabla = tree_order_polynomial(&grafted).nabla();
    println!("nabla Omega({}, s) = {}", grafted, nabla);
    println!("  order polynomial of the root-removed forest = {}",
        order_polynomial(grafted.children()));

    // theta is the leading datum of the order polynomial; varphi rescales
    // it by the automorphism order.
    for s in ["(0 (1))", "(0 (1 (1)))", "(0 (1) (1))"] {
        let t = parse_tree(s).unwrap();
        println!("theta({}) = {},  varphi = {}", t, hopftrees::format_q(&theta(&t)),
            hopftrees::format_q(&varphi(&t)));
    }
}
