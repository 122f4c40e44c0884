//! Exact computer algebra for labeled rooted trees.
//!
//! The crate implements, over arbitrary-precision rationals:
//!
//! * canonical labeled rooted trees and forests, admissible cuts and
//!   descending cut chains ([`trees`]);
//! * order polynomials of tree posets, strict variants, reciprocity and the
//!   theta/varphi coefficients ([`orderpoly`]);
//! * the Connes-Kreimer Hopf algebra on forests and the Grossman-Larson Hopf
//!   algebra on rooted trees, plus the pairing between them ([`hopf_ck`],
//!   [`hopf_gl`]);
//! * truncated noncommutative formal power series in z variables with a
//!   central parameter t, formal automorphisms F_t = z - H_t(z), and their
//!   fixed-point inverses ([`ncseries`]);
//! * differential operators built from derivations by the grafting operator
//!   B+, operator-valued t-series, exp/log, tree series P_T, tree expansions
//!   of inverses, D-Logs, formal flows and m-th powers ([`diffop`]);
//! * noncommutative symmetric functions: the bases S, Phi, Psi, Xi solved
//!   from the Lambda generators, the Hopf structure, abstract NCS systems and
//!   their verification, the tree-land and operator-land specializations, and
//!   the injectivity rank of the S basis images ([`ncsym`]);
//! * a command line front end over all of the above ([`cli`]).
//!
//! All arithmetic is exact; nothing here uses floating point.

pub mod cli;
pub mod diffop;
pub mod hopf_ck;
pub mod hopf_gl;
pub mod ncseries;
pub mod ncsym;
pub mod orderpoly;
pub mod trees;

use num::BigRational;

/// Exact rational scalar used throughout the crate.
pub type Q = BigRational;

/// Rational n/d. Panics if d = 0.
pub fn q(n: i64, d: i64) -> Q {
    assert!(d != 0, "zero denominator");
    Q::new(n.into(), d.into())
}

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Renders a rational without a superfluous denominator: `3`, `-1/2`.
pub fn format_q(x: &Q) -> String {
    if x.denom() == &num::BigInt::from(1) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `int` or `int/nat` into a rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<num::BigInt>().ok().map(Q::from_integer),
        Some((n, d)) => {
            let n = n.trim().parse::<num::BigInt>().ok()?;
            let d = d.trim().parse::<num::BigInt>().ok()?;
            if d <= num::BigInt::from(0) {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_formatting_roundtrips() {
        for s in ["0", "3", "-3", "1/2", "-7/3"] {
            let x = parse_q(s).unwrap();
            assert_eq!(format_q(&x), s);
        }
        assert_eq!(format_q(&parse_q("2/4").unwrap()), "1/2");
        assert!(parse_q("1/0").is_none());
        assert!(parse_q("1/-2").is_none());
        assert!(parse_q("x").is_none());
    }
}
