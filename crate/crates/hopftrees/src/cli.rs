//! Command line front end.
//!
//! Every successful invocation prints one JSON document to stdout:
//! `{"status": "ok"|"fail", "timing_ms": N, "payload": {...}}`. The timing
//! field sits outside the payload so identical invocations produce byte
//! identical payloads; every rational inside the payload is a string, never
//! a float. Exit codes: 0 when the command succeeds, 1 when a verification
//! suite or an oracle comparison fails, 2 on usage or parse errors (which
//! report to stderr instead).

use crate::diffop::{separating_automorphism, TreeCalculus};
use crate::hopf_ck::{
    ck_antipode, ck_axiom_checks, ck_coproduct, ck_product, pairing, pairing_duality_checks,
    CKVector,
};
use crate::hopf_gl::{gl_antipode, gl_axiom_checks, gl_coproduct, gl_product, GLVector};
use crate::ncseries::{Automorphism, SeriesVector, Word};
use crate::ncsym::{
    injectivity_rank, omega_trees, operator_tuple, verify_cd2, verify_ncs, GlHost, NcsReport,
    OpHost,
};
use crate::orderpoly::{order_polynomial, strict_order_polynomial, theta, varphi, SPoly};
use crate::trees::{
    admissible_cuts, format_forest, parse_forest, parse_tree, Tree, TreeEnumerator,
};
use crate::{format_q, parse_q, qi, Q};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "hopftrees",
    version,
    about = "Exact computer algebra for labeled rooted trees: Hopf algebras, \
             order polynomials, formal inverses, flows and noncommutative \
             symmetric functions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate trees by weight or list admissible cuts.
    Trees {
        #[command(subcommand)]
        cmd: TreesCmd,
    },
    /// Order polynomial of a forest literal such as "(1 (1))".
    Orderpoly {
        /// Count strictly order-preserving maps instead of weak ones.
        #[arg(long)]
        strict: bool,
        forest: String,
    },
    /// Theta and varphi coefficients of a tree.
    Theta { tree: String },
    /// Product, coproduct or antipode in a chosen Hopf algebra.
    Hopf {
        #[command(subcommand)]
        cmd: HopfCmd,
    },
    /// Pairing of a grafting element with a forest element.
    Pairing { gl: String, ck: String },
    /// Compositional inverse of a map file, by choice of backend.
    Invert {
        #[arg(long)]
        map: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Differential-operator logarithm of a map: dlog F = [a(t) d/dz].
    Dlog {
        #[arg(long)]
        map: String,
    },
    /// Formal flow of a map at a rational time, or symbolically in s.
    Flow {
        #[arg(long)]
        map: String,
        /// A rational like 1/2 or -2, or the literal letter s.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// m-th compositional power of a map (m may be negative).
    Power {
        #[arg(long)]
        map: String,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
    },
    /// Automorphism whose tree coefficient separates the given tree.
    Separating {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        alpha: usize,
    },
    /// Verification suites; exit code 1 when a suite fails.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum TreesCmd {
    /// All trees with vertex labels from the set, by total weight.
    Enum {
        /// Comma-separated positive labels, e.g. 1,2.
        #[arg(long, value_delimiter = ',', required = true)]
        labels: Vec<u32>,
        #[arg(long)]
        max_weight: u64,
    },
    /// Admissible cuts of a tree literal.
    Cuts { tree: String },
}

#[derive(Subcommand)]
enum HopfCmd {
    Product {
        #[arg(long, value_enum)]
        algebra: Algebra,
        /// Two or more elements; trees for gl, forests for ck.
        #[arg(required = true, num_args = 2..)]
        elements: Vec<String>,
    },
    Coproduct {
        #[arg(long, value_enum)]
        algebra: Algebra,
        element: String,
    },
    Antipode {
        #[arg(long, value_enum)]
        algebra: Algebra,
        element: String,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Check the five unit equations for a tree or map system.
    Ncs {
        #[arg(long, value_enum)]
        source: NcsSource,
        /// Label set for the trees source, e.g. 1,2.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<u32>>,
        /// Map file for the map source.
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        order: usize,
    },
    /// Hopf axiom suite plus the duality pairing checks.
    Hopf {
        #[arg(long, value_enum)]
        algebra: Algebra,
        #[arg(long)]
        max_weight: u64,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        labels: Vec<u32>,
    },
    /// Specialization compatibility through the operator realization.
    Cd2 {
        #[arg(long)]
        map: String,
        #[arg(long)]
        max_weight: usize,
    },
    /// Rank of the tree specialization on each word-basis weight.
    Inject {
        #[arg(long)]
        max_weight: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algebra {
    Gl,
    Ck,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Tree,
    Fixedpoint,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum NcsSource {
    Trees,
    Map,
}

/// Entry point for the binary; reads std::env::args.
pub fn run() -> i32 {
    run_from(std::env::args().collect())
}

/// Runs one invocation and returns the exit code.
pub fn run_from(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    match dispatch(cli.cmd) {
        Ok((payload, passed)) => {
            let doc = json!({
                "status": if passed { "ok" } else { "fail" },
                "timing_ms": start.elapsed().as_millis() as u64,
                "payload": payload,
            });
            let text = serde_json::to_string_pretty(&doc).expect("report serialization");
            // A closed pipe downstream is not our error; swallow it.
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{}", text);
            if passed {
                0
            } else {
                1
            }
        }
        Err(msg) => {
            eprintln!("error: {}", msg);
            2
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(Value, bool), String> {
    match cmd {
        Cmd::Trees { cmd } => trees_cmd(cmd),
        Cmd::Orderpoly { strict, forest } => orderpoly_cmd(strict, &forest),
        Cmd::Theta { tree } => theta_cmd(&tree),
        Cmd::Hopf { cmd } => hopf_cmd(cmd),
        Cmd::Pairing { gl, ck } => pairing_cmd(&gl, &ck),
        Cmd::Invert { map, method } => invert_cmd(&map, method),
        Cmd::Dlog { map } => dlog_cmd(&map),
        Cmd::Flow { map, s } => flow_cmd(&map, &s),
        Cmd::Power { map, m } => power_cmd(&map, m),
        Cmd::Separating { tree, alpha } => separating_cmd(&tree, alpha),
        Cmd::Verify { cmd } => verify_cmd(cmd),
    }
}

fn read_map(path: &str) -> Result<Automorphism, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))?;
    Automorphism::from_json(&text).map_err(|e| e.to_string())
}

fn components_value(v: &SeriesVector) -> Value {
    Value::Array(v.comps().iter().map(|s| Value::String(s.to_string())).collect())
}

fn parse_gl(s: &str) -> Result<GLVector, String> {
    let t = parse_tree(s).map_err(|e| e.to_string())?;
    if t.label() != 0 {
        return Err(format!(
            "grafting elements are trees with root label 0, got root {}",
            t.label()
        ));
    }
    Ok(GLVector::from_tree(t))
}

fn parse_ck(s: &str) -> Result<CKVector, String> {
    Ok(CKVector::from_forest(parse_forest(s).map_err(|e| e.to_string())?))
}

fn checks_value(checks: &[(String, bool)]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|(name, ok)| json!({"check": name, "passed": ok}))
            .collect(),
    )
}

fn word_string(w: &[u16]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    let mut out = String::new();
    let mut i = 0;
    while i < w.len() {
        let mut j = i;
        while j < w.len() && w[j] == w[i] {
            j += 1;
        }
        if !out.is_empty() {
            out.push('*');
        }
        if j - i == 1 {
            out += &format!("z{}", w[i] + 1);
        } else {
            out += &format!("z{}^{}", w[i] + 1, j - i);
        }
        i = j;
    }
    out
}

/// First coefficient where the two vectors disagree, in deterministic
/// component/word/t-power order.
fn first_series_difference(a: &SeriesVector, b: &SeriesVector) -> Option<Value> {
    for (i, (sa, sb)) in a.comps().iter().zip(b.comps().iter()).enumerate() {
        let mut table: BTreeMap<(Word, usize), (Q, Q)> = BTreeMap::new();
        for (w, k, c) in sa.iter_terms() {
            table.entry((w.clone(), k)).or_insert_with(|| (qi(0), qi(0))).0 = c.clone();
        }
        for (w, k, c) in sb.iter_terms() {
            table.entry((w.clone(), k)).or_insert_with(|| (qi(0), qi(0))).1 = c.clone();
        }
        for ((w, k), (ca, cb)) in table {
            if ca != cb {
                return Some(json!({
                    "component": i + 1,
                    "monomial": word_string(&w),
                    "t_power": k,
                    "tree": format_q(&ca),
                    "fixedpoint": format_q(&cb),
                }));
            }
        }
    }
    None
}

fn spoly_value(p: &SPoly) -> Value {
    let degree = p.degree();
    let coeffs: Vec<Value> = (0..=degree.unwrap_or(0))
        .map(|k| Value::String(format_q(&p.coeff(k))))
        .collect();
    json!({
        "polynomial": p.to_string(),
        "degree": degree,
        "coefficients_ascending": coeffs,
    })
}

fn trees_cmd(cmd: TreesCmd) -> Result<(Value, bool), String> {
    match cmd {
        TreesCmd::Enum { labels, max_weight } => {
            let e = TreeEnumerator::new(&labels, max_weight).map_err(|e| e.to_string())?;
            let mut by_weight = Vec::new();
            let mut total = 0usize;
            for w in 1..=max_weight {
                let ts = e.trees_of_weight(w);
                total += ts.len();
                by_weight.push(json!({
                    "weight": w,
                    "count": ts.len(),
                    "trees": ts.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                }));
            }
            let payload = json!({
                "labels": labels,
                "max_weight": max_weight,
                "by_weight": by_weight,
                "total": total,
            });
            Ok((payload, true))
        }
        TreesCmd::Cuts { tree } => {
            let t = parse_tree(&tree).map_err(|e| e.to_string())?;
            let cuts: Vec<Value> = admissible_cuts(&t)
                .into_iter()
                .map(|c| {
                    json!({
                        "edges": c.edges,
                        "pruned": format_forest(&c.pruned),
                        "remainder": c.remainder.to_string(),
                    })
                })
                .collect();
            let payload = json!({
                "tree": t.to_string(),
                "count": cuts.len(),
                "cuts": cuts,
            });
            Ok((payload, true))
        }
    }
}

fn orderpoly_cmd(strict: bool, forest: &str) -> Result<(Value, bool), String> {
    let f = parse_forest(forest).map_err(|e| e.to_string())?;
    let p = if strict { strict_order_polynomial(&f) } else { order_polynomial(&f) };
    let mut payload = spoly_value(&p);
    payload["forest"] = Value::String(format_forest(&f));
    payload["strict"] = Value::Bool(strict);
    Ok((payload, true))
}

fn theta_cmd(tree: &str) -> Result<(Value, bool), String> {
    let t = parse_tree(tree).map_err(|e| e.to_string())?;
    let payload = json!({
        "tree": t.to_string(),
        "theta": format_q(&theta(&t)),
        "varphi": format_q(&varphi(&t)),
    });
    Ok((payload, true))
}

fn hopf_cmd(cmd: HopfCmd) -> Result<(Value, bool), String> {
    let payload = match cmd {
        HopfCmd::Product { algebra, elements } => {
            let result = match algebra {
                Algebra::Gl => {
                    let parsed: Vec<GLVector> =
                        elements.iter().map(|s| parse_gl(s)).collect::<Result<_, _>>()?;
                    parsed
                        .into_iter()
                        .reduce(|a, b| gl_product(&a, &b))
                        .expect("at least two elements")
                        .to_string()
                }
                Algebra::Ck => {
                    let parsed: Vec<CKVector> =
                        elements.iter().map(|s| parse_ck(s)).collect::<Result<_, _>>()?;
                    parsed
                        .into_iter()
                        .reduce(|a, b| ck_product(&a, &b))
                        .expect("at least two elements")
                        .to_string()
                }
            };
            json!({
                "algebra": algebra_name(algebra),
                "operation": "product",
                "inputs": elements,
                "result": result,
            })
        }
        HopfCmd::Coproduct { algebra, element } => {
            let result = match algebra {
                Algebra::Gl => gl_coproduct(&parse_gl(&element)?).to_string(),
                Algebra::Ck => ck_coproduct(&parse_ck(&element)?).to_string(),
            };
            json!({
                "algebra": algebra_name(algebra),
                "operation": "coproduct",
                "inputs": [element],
                "result": result,
            })
        }
        HopfCmd::Antipode { algebra, element } => {
            let result = match algebra {
                Algebra::Gl => gl_antipode(&parse_gl(&element)?).to_string(),
                Algebra::Ck => ck_antipode(&parse_ck(&element)?).to_string(),
            };
            json!({
                "algebra": algebra_name(algebra),
                "operation": "antipode",
                "inputs": [element],
                "result": result,
            })
        }
    };
    Ok((payload, true))
}

fn algebra_name(a: Algebra) -> &'static str {
    match a {
        Algebra::Gl => "gl",
        Algebra::Ck => "ck",
    }
}

fn pairing_cmd(gl: &str, ck: &str) -> Result<(Value, bool), String> {
    let x = parse_gl(gl)?;
    let c = parse_ck(ck)?;
    let payload = json!({
        "gl": gl,
        "ck": ck,
        "value": format_q(&pairing(&x, &c)),
    });
    Ok((payload, true))
}

fn invert_cmd(map: &str, method: Method) -> Result<(Value, bool), String> {
    let auto = read_map(map)?;
    match method {
        Method::Tree => {
            let inv = TreeCalculus::new(&auto).tree_inverse();
            Ok((
                json!({"map": map, "method": "tree", "components": components_value(&inv)}),
                true,
            ))
        }
        Method::Fixedpoint => {
            let inv = auto.fixed_point_inverse().map_err(|e| e.to_string())?;
            Ok((
                json!({"map": map, "method": "fixedpoint", "components": components_value(&inv)}),
                true,
            ))
        }
        Method::Both => {
            let tree_inv = TreeCalculus::new(&auto).tree_inverse();
            let fixed_inv = auto.fixed_point_inverse().map_err(|e| e.to_string())?;
            let diff = first_series_difference(&tree_inv, &fixed_inv);
            let agree = diff.is_none();
            let payload = json!({
                "map": map,
                "method": "both",
                "components": components_value(&tree_inv),
                "agreement": agree,
                "first_difference": diff,
            });
            Ok((payload, agree))
        }
    }
}

fn dlog_cmd(map: &str) -> Result<(Value, bool), String> {
    let auto = read_map(map)?;
    let a = TreeCalculus::new(&auto).d_log();
    Ok((json!({"map": map, "components": components_value(&a)}), true))
}

fn flow_cmd(map: &str, s: &str) -> Result<(Value, bool), String> {
    let auto = read_map(map)?;
    let mut calc = TreeCalculus::new(&auto);
    if s.trim() == "s" {
        let powers = calc.flow_coefficients();
        let by_power: Vec<Value> = powers
            .iter()
            .enumerate()
            .map(|(k, v)| json!({"s_power": k, "components": components_value(v)}))
            .collect();
        return Ok((json!({"map": map, "s": "s", "by_s_power": by_power}), true));
    }
    let sq = parse_q(s).ok_or_else(|| format!("cannot parse --s value '{}'", s))?;
    let v = calc.flow(&sq);
    Ok((
        json!({"map": map, "s": format_q(&sq), "components": components_value(&v)}),
        true,
    ))
}

fn power_cmd(map: &str, m: i64) -> Result<(Value, bool), String> {
    let auto = read_map(map)?;
    let v = TreeCalculus::new(&auto).mth_power(m);
    Ok((json!({"map": map, "m": m, "components": components_value(&v)}), true))
}

fn separating_cmd(tree: &str, alpha: usize) -> Result<(Value, bool), String> {
    let t = parse_tree(tree).map_err(|e| e.to_string())?;
    fn has_zero_label(t: &Tree) -> bool {
        t.label() == 0 || t.children().iter().any(has_zero_label)
    }
    if has_zero_label(&t) {
        return Err("separating trees need every vertex label positive".to_string());
    }
    if alpha < 1 {
        return Err("alpha must be at least 1".to_string());
    }
    let auto = separating_automorphism(&t, alpha);
    let map_doc: Value =
        serde_json::from_str(&auto.to_json()).expect("map serialization round-trip");
    let p = TreeCalculus::new(&auto).p_tree(&t);
    let payload = json!({
        "tree": t.to_string(),
        "alpha": alpha,
        "map": map_doc,
        "p_tree_components": components_value(&p),
    });
    Ok((payload, true))
}

fn ncs_report_value(report: &NcsReport) -> Value {
    let equations: Vec<Value> = report
        .equations
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "passed": e.passed,
                "checked_to": e.checked_to,
                "first_failure": e.first_failure,
            })
        })
        .collect();
    json!({"equations": equations, "all_passed": report.all_passed()})
}

fn verify_cmd(cmd: VerifyCmd) -> Result<(Value, bool), String> {
    match cmd {
        VerifyCmd::Ncs { source, labels, map, order } => match source {
            NcsSource::Trees => {
                let labels = labels.ok_or("the trees source needs --labels")?;
                let tuple = omega_trees(&labels, order).map_err(|e| e.to_string())?;
                let report = verify_ncs(&GlHost, &tuple, order);
                let ok = report.all_passed();
                let mut payload = ncs_report_value(&report);
                payload["source"] = json!("trees");
                payload["labels"] = json!(labels);
                payload["order"] = json!(order);
                Ok((payload, ok))
            }
            NcsSource::Map => {
                let map = map.ok_or("the map source needs --map")?;
                let auto = read_map(&map)?;
                let tuple = operator_tuple(&auto)?;
                let host = OpHost { trunc: auto.trunc().clone(), max_word_len: 3 };
                let report = verify_ncs(&host, &tuple, order);
                let ok = report.all_passed();
                let mut payload = ncs_report_value(&report);
                payload["source"] = json!("map");
                payload["map"] = json!(map);
                payload["order"] = json!(order);
                Ok((payload, ok))
            }
        },
        VerifyCmd::Hopf { algebra, max_weight, labels } => {
            let mut checks = match algebra {
                Algebra::Gl => gl_axiom_checks(&labels, max_weight).map_err(|e| e.to_string())?,
                Algebra::Ck => ck_axiom_checks(&labels, max_weight).map_err(|e| e.to_string())?,
            };
            for (name, ok) in pairing_duality_checks(&labels, max_weight).map_err(|e| e.to_string())? {
                checks.push((format!("pairing: {}", name), ok));
            }
            let ok = checks.iter().all(|(_, p)| *p);
            let payload = json!({
                "algebra": algebra_name(algebra),
                "labels": labels,
                "max_weight": max_weight,
                "checks": checks_value(&checks),
                "all_passed": ok,
            });
            Ok((payload, ok))
        }
        VerifyCmd::Cd2 { map, max_weight } => {
            let auto = read_map(&map)?;
            let report = verify_cd2(&auto, max_weight, 3)?;
            let ok = report.all_passed();
            let payload = json!({
                "map": map,
                "max_weight": max_weight,
                "checks": checks_value(&report.checks),
                "all_passed": ok,
            });
            Ok((payload, ok))
        }
        VerifyCmd::Inject { max_weight } => {
            if !(1..=5).contains(&max_weight) {
                return Err("--max-weight must be between 1 and 5".to_string());
            }
            let mut rows = Vec::new();
            let mut ok = true;
            for m in 1..=max_weight {
                let (rank, expected) = injectivity_rank(m)?;
                ok &= rank == expected;
                rows.push(json!({"weight": m, "rank": rank, "expected": expected}));
            }
            let payload = json!({"max_weight": max_weight, "ranks": rows, "all_passed": ok});
            Ok((payload, ok))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_strings() {
        assert_eq!(word_string(&[]), "1");
        assert_eq!(word_string(&[0, 0]), "z1^2");
        assert_eq!(word_string(&[0, 1, 1, 0]), "z1*z2^2*z1");
    }

    #[test]
    fn difference_finder() {
        use crate::ncseries::{NCSeries, TruncationSpec};
        let tr = TruncationSpec::new(2, 4, 3, false);
        let a = SeriesVector::new(
            &tr,
            vec![NCSeries::parse(&tr, "z1 + t*z2").unwrap(), NCSeries::parse(&tr, "z2").unwrap()],
        );
        let b = SeriesVector::new(
            &tr,
            vec![
                NCSeries::parse(&tr, "z1 + 2*t*z2").unwrap(),
                NCSeries::parse(&tr, "z2").unwrap(),
            ],
        );
        assert!(first_series_difference(&a, &a).is_none());
        let d = first_series_difference(&a, &b).unwrap();
        assert_eq!(d["component"], 1);
        assert_eq!(d["monomial"], "z2");
        assert_eq!(d["t_power"], 1);
        assert_eq!(d["tree"], "1");
        assert_eq!(d["fixedpoint"], "2");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(vec!["hopftrees".into(), "no-such-command".into()]), 2);
        assert_eq!(
            run_from(vec!["hopftrees".into(), "orderpoly".into(), "(1 (".into()]),
            2
        );
    }

    #[test]
    fn happy_paths_exit_zero() {
        assert_eq!(
            run_from(vec![
                "hopftrees".into(),
                "orderpoly".into(),
                "(1 (1))".into(),
            ]),
            0
        );
        assert_eq!(
            run_from(vec![
                "hopftrees".into(),
                "trees".into(),
                "enum".into(),
                "--labels".into(),
                "1".into(),
                "--max-weight".into(),
                "4".into(),
            ]),
            0
        );
        assert_eq!(
            run_from(vec![
                "hopftrees".into(),
                "verify".into(),
                "ncs".into(),
                "--source".into(),
                "trees".into(),
                "--labels".into(),
                "1".into(),
                "--order".into(),
                "3".into(),
            ]),
            0
        );
    }
}
