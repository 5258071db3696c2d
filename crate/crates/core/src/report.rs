//! JSON and CSV documents emitted by the command-line tool.
//!
//! Every document carries the tool version and vectorization convention.
//! Objects are key-sorted and floats are printed with shortest round-trip
//! formatting, so identical inputs give byte-identical files.

use serde_json::{json, Map, Value};

use crate::checks::{self, CheckResult, Comparison};
use crate::densela::ComplexMatrix;
use crate::error::{Error, Result};
use crate::lindblad::build_lindblad;
use crate::model::{matrix_to_json, InteractionModel};
use crate::perturb::{
    critical_heisenberg_generator, critical_schrodinger_generator, gamma0_sharp, gamma_beta, gamma_beta_sharp,
    gamma_w_heisenberg, gamma_w_schrodinger,
};
use crate::regimes::ConvergenceReport;
use crate::{TOOL_VERSION, VEC_CONVENTION};

/// A named output file and its contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub file_name: String,
    pub contents: String,
}

/// Finite floats as numbers, others as the strings "inf", "-inf", "nan".
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn metadata(model: &InteractionModel, tau: Option<f64>, warnings: &[String]) -> Value {
    let mut m = Map::new();
    m.insert("tool_version".into(), json!(TOOL_VERSION));
    m.insert("vec_convention".into(), json!(VEC_CONVENTION));
    m.insert("beta".into(), model.beta.to_json());
    m.insert("d".into(), json!(model.d));
    m.insert("n".into(), json!(model.n));
    if let Some(t) = tau {
        m.insert("tau".into(), number(t));
    }
    m.insert("warnings".into(), json!(warnings));
    Value::Object(m)
}

/// Pretty-printed JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializing a JSON value cannot fail");
    s.push('\n');
    s
}

fn matrix_doc(name: &str, kind: &str, m: &ComplexMatrix, meta: Value) -> Document {
    let doc = json!({
        "generator": name,
        "kind": kind,
        "rows": m.rows(),
        "cols": m.cols(),
        "matrix": matrix_to_json(m),
        "metadata": meta,
    });
    Document { file_name: format!("{name}.json"), contents: render(&doc) }
}

fn qubit_cross_check(model: &InteractionModel, tau: f64) -> std::result::Result<Value, String> {
    let results = checks::qubit_suite(model, tau).map_err(|e| e.to_string())?;
    let (worst_name, worst) = worst_residual(&results);
    Ok(json!({
        "pass": results.iter().all(|c| c.pass),
        "checks": results.len(),
        "worst": worst_name,
        "worst_value": number(worst),
    }))
}

/// Name and value of the check with the largest residual among the
/// `AtMost` checks that ran.
pub fn worst_residual(results: &[CheckResult]) -> (String, f64) {
    let failing: Vec<_> = results.iter().filter(|c| !c.pass).collect();
    let pool: Vec<&CheckResult> = if failing.is_empty() {
        results
            .iter()
            .filter(|c| {
                c.comparison == Comparison::AtMost && c.note.as_deref().is_none_or(|n| !n.starts_with("skipped"))
            })
            .collect()
    } else {
        failing
    };
    pool.iter().map(|c| (c.name.clone(), c.value)).fold((String::new(), f64::NEG_INFINITY), |acc, x| {
        if x.1 > acc.1 {
            x
        } else {
            acc
        }
    })
}

/// One document per effective generator. Cluster degeneracies do not abort:
/// the affected generator is omitted and the reason lands in the warnings of
/// every document.
pub fn generator_documents(model: &InteractionModel, tau: f64, cluster_tol: f64) -> Result<Vec<Document>> {
    let mut warnings = Vec::new();
    let mut soft = |name: &str, r: Result<ComplexMatrix>| -> Result<Option<ComplexMatrix>> {
        match r {
            Ok(m) => Ok(Some(m)),
            Err(e @ (Error::UnresolvedClusters { .. } | Error::Precondition(_))) => {
                warnings.push(format!("{name} omitted: {e}"));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let gw = soft("gamma_w", gamma_w_schrodinger(model, tau, cluster_tol))?;
    let g0 = soft("gamma0_sharp", gamma0_sharp(model, cluster_tol))?;
    let gwb = soft("gamma_w_beta", gamma_w_heisenberg(model, tau, cluster_tol).map(|s| s.matrix().clone()))?;
    let gbs = soft("gamma_beta_sharp", gamma_beta_sharp(model, cluster_tol).map(|s| s.matrix().clone()))?;

    let mut qubit_meta = None;
    if model.d == 1 && model.n == 1 {
        match qubit_cross_check(model, tau) {
            Ok(v) => qubit_meta = Some(v),
            Err(e) => warnings.push(format!("qubit cross-check not run: {e}")),
        }
    }

    let meta = || metadata(model, Some(tau), &warnings);
    let mut docs = Vec::new();
    if let Some(m) = gw {
        docs.push(matrix_doc("gamma_w", "schrodinger", &m, meta()));
    }
    if let Some(m) = g0 {
        docs.push(matrix_doc("gamma0_sharp", "schrodinger", &m, meta()));
    }
    if let Some(m) = gwb {
        let mut md = meta();
        if let Some(q) = &qubit_meta {
            md["qubit_cross_check"] = q.clone();
        }
        docs.push(matrix_doc("gamma_w_beta", "heisenberg_superoperator", &m, md));
    }
    docs.push(matrix_doc("gamma_beta", "heisenberg_superoperator", gamma_beta(model).matrix(), meta()));
    if let Some(m) = gbs {
        docs.push(matrix_doc("gamma_beta_sharp", "heisenberg_superoperator", &m, meta()));
    }
    docs.push(matrix_doc("critical_schrodinger", "schrodinger", &critical_schrodinger_generator(model), meta()));
    docs.push(matrix_doc(
        "critical_heisenberg",
        "heisenberg_superoperator",
        critical_heisenberg_generator(model).matrix(),
        meta(),
    ));

    let lind = build_lindblad(model);
    let jumps = json!({
        "generator": "lindblad_jumps",
        "hamiltonian": matrix_to_json(&model.h0),
        "jumps": lind.jumps.iter().map(matrix_to_json).collect::<Vec<_>>(),
        "metadata": meta(),
    });
    docs.push(Document { file_name: "lindblad_jumps.json".into(), contents: render(&jumps) });
    Ok(docs)
}

pub fn check_json(c: &CheckResult) -> Value {
    json!({
        "name": c.name,
        "value": number(c.value),
        "threshold": number(c.threshold),
        "comparison": match c.comparison { Comparison::AtMost => "at_most", Comparison::AtLeast => "at_least" },
        "pass": c.pass,
        "note": c.note,
    })
}

pub fn checks_document(model: &InteractionModel, tau: f64, suite: &str, results: &[CheckResult]) -> Value {
    json!({
        "suite": suite,
        "pass": results.iter().all(|c| c.pass),
        "checks": results.iter().map(check_json).collect::<Vec<_>>(),
        "metadata": metadata(model, Some(tau), &[]),
    })
}

pub const CSV_HEADER: &str = "regime,t,tau,lambda,k,error_schrodinger,error_heisenberg";

/// Sweep table: a `#` line with version and convention, then the header.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut s = format!("# {TOOL_VERSION}; {VEC_CONVENTION}\n{CSV_HEADER}\n");
    for p in &report.points {
        s.push_str(&format!(
            "{},{},{},{},{},{:e},{:e}\n",
            p.regime.as_str(),
            p.t,
            p.tau,
            p.lambda,
            p.k,
            p.error_schrodinger,
            p.error_heisenberg
        ));
    }
    s
}

fn track_json(fit: &crate::regimes::TrackFit) -> Value {
    json!({
        "order": fit.order.map(number),
        "exact": fit.exact,
        "monotone": fit.monotone,
        "pass": fit.pass,
    })
}

pub fn convergence_summary(model: &InteractionModel, report: &ConvergenceReport) -> Value {
    let exact = report.schrodinger.exact && report.heisenberg.exact;
    let (lo, hi) = report.regime.window();
    json!({
        "regime": report.regime.as_str(),
        "fitted_order": report.fitted_order.map(number),
        "theoretical_order": number(report.theoretical_order),
        "pass": report.pass,
        "status": if exact { "exact" } else if report.pass { "converged" } else { "failed" },
        "order_window": [number(lo), hi.map(number)],
        "small_parameter": report.regime.small_parameter(),
        "schrodinger": track_json(&report.schrodinger),
        "heisenberg": track_json(&report.heisenberg),
        "diagnostics": report.diagnostics,
        "metadata": metadata(model, None, &[]),
    })
}
