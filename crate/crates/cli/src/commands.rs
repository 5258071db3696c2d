use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use riq::checks::{identity_suite, qubit_suite, CheckResult, SuiteConfig};
use riq::densela::DEFAULT_CLUSTER_TOL;
use riq::regimes::{
    continuous_experiment, critical_experiment, regime2_experiment, regime2_schedule, tau_schedule,
    weak_limit_experiment, weak_schedule, ConvergenceReport, ExperimentOptions, RegimeKind,
};
use riq::report::{self, Document};
use riq::Error;

use crate::config::{self, RunConfig};
use crate::Common;

pub const DEFAULT_TAU: f64 = 1.0;
pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_KS: [u64; 3] = [64, 256, 1024];
pub const DEFAULT_VALIDATE_LAMBDA: f64 = 0.3;
pub const DEFAULT_REGIME2_LAMBDA: f64 = 1.0;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidField { .. }
            | Error::Schedule(_)
            | Error::Precondition(_)
            | Error::NotHermitian { .. }
            | Error::Dimension(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome = Result<ExitCode, Failure>;

fn load(c: &Common) -> Result<RunConfig, Failure> {
    let env = std::env::var("RIQ_SEED").ok();
    Ok(config::load(c.config.as_deref(), c.dims, c.seed, env.as_deref())?)
}

fn positive(name: &str, value: f64) -> Result<f64, Failure> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("invalid field `{name}`: must be positive, got {value}")))
    }
}

fn resolve(flag: Option<f64>, file: Option<f64>, default: f64, name: &str) -> Result<f64, Failure> {
    positive(name, flag.or(file).unwrap_or(default))
}

/// Writes the documents into `out` (created if missing) or, without a
/// directory, prints them to stdout in order.
fn emit(out: Option<&Path>, docs: &[Document]) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
            for d in docs {
                let path = dir.join(&d.file_name);
                std::fs::write(&path, &d.contents)
                    .map_err(|e| Failure { code: 1, message: format!("cannot write {}: {e}", path.display()) })?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for d in docs {
                let _ = stdout.write_all(d.contents.as_bytes());
            }
        }
    }
    Ok(())
}

fn note(out: Option<&Path>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn check_lines(out: Option<&Path>, results: &[CheckResult]) {
    for c in results {
        let status = if c.pass { "ok  " } else { "FAIL" };
        let detail = c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
        note(out, &format!("{status} {:<48} {:>12.3e}{detail}", c.name, c.value));
    }
}

pub fn validate(c: &Common) -> Outcome {
    let cfg = load(c)?;
    let tau = resolve(c.tau, cfg.params.tau, DEFAULT_TAU, "tau")?;
    let lambda = resolve(c.lambda, cfg.params.lambda, DEFAULT_VALIDATE_LAMBDA, "lambda")?;
    let cluster_tol = resolve(c.tol, cfg.params.tol, DEFAULT_CLUSTER_TOL, "tol")?;
    let suite = SuiteConfig { tau, lambda, seed: cfg.seed, cluster_tol, ..SuiteConfig::default() };
    let results = identity_suite(&cfg.model, &suite)?;
    let doc = report::checks_document(&cfg.model, tau, "validate", &results);
    emit(c.out.as_deref(), &[Document { file_name: "validate.json".into(), contents: report::render(&doc) }])?;
    check_lines(c.out.as_deref(), &results);
    finish(c.out.as_deref(), &results)
}

fn finish(out: Option<&Path>, results: &[CheckResult]) -> Outcome {
    if results.iter().all(|r| r.pass) {
        note(out, "all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        let (name, value) = report::worst_residual(results);
        eprintln!("riq: check failed; worst residual {name} = {value:.3e}");
        Ok(ExitCode::from(1))
    }
}

pub fn generators(c: &Common) -> Outcome {
    let out = c.out.as_deref().ok_or_else(|| usage("generators needs --out DIR"))?;
    let cfg = load(c)?;
    let tau = resolve(c.tau, cfg.params.tau, DEFAULT_TAU, "tau")?;
    let cluster_tol = resolve(c.tol, cfg.params.tol, DEFAULT_CLUSTER_TOL, "tol")?;
    let docs = report::generator_documents(&cfg.model, tau, cluster_tol)?;
    emit(Some(out), &docs)?;
    for d in &docs {
        println!("wrote {}", out.join(&d.file_name).display());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn converge(c: &Common, regime: RegimeKind, t_flag: Option<f64>, ks_flag: Option<Vec<u64>>) -> Outcome {
    let cfg = load(c)?;
    let t = resolve(t_flag, cfg.params.t, DEFAULT_T, "t")?;
    let ks = ks_flag.or_else(|| cfg.params.k_list.clone()).unwrap_or_else(|| DEFAULT_KS.to_vec());
    if ks.len() < 2 {
        return Err(usage("invalid field `k_list`: at least two step counts are needed for an order fit"));
    }
    let cluster_tol = resolve(c.tol, cfg.params.tol, DEFAULT_CLUSTER_TOL, "tol")?;
    let opts = ExperimentOptions { cluster_tol, ..ExperimentOptions::default() };
    let model = &cfg.model;

    // Schedules are validated in full before any evolution is computed.
    let report: ConvergenceReport = match regime {
        RegimeKind::Weak => {
            let tau = resolve(c.tau, cfg.params.tau, DEFAULT_TAU, "tau")?;
            weak_schedule(t, &ks)?;
            weak_limit_experiment(model, tau, t, &ks, &opts)?
        }
        RegimeKind::Regime2 => {
            let lambda = resolve(c.lambda, cfg.params.lambda, DEFAULT_REGIME2_LAMBDA, "lambda")?;
            let schedule = regime2_schedule(t, lambda, &ks)?;
            regime2_experiment(model, t, &schedule, &opts)?
        }
        RegimeKind::Critical => critical_experiment(model, t, &tau_schedule(t, &ks)?, &opts)?,
        RegimeKind::Continuous => continuous_experiment(model, t, &tau_schedule(t, &ks)?, &opts)?,
    };

    let stem = format!("converge_{}", regime.as_str());
    let docs = [
        Document { file_name: format!("{stem}.csv"), contents: report::convergence_csv(&report) },
        Document {
            file_name: format!("{stem}.json"),
            contents: report::render(&report::convergence_summary(model, &report)),
        },
    ];
    emit(c.out.as_deref(), &docs)?;
    let order = report.fitted_order.map_or("exact".to_string(), |o| format!("{o:.4}"));
    for d in &report.diagnostics {
        note(c.out.as_deref(), &format!("note: {d}"));
    }
    if report.pass {
        note(c.out.as_deref(), &format!("{regime}: pass, fitted order {order}"));
        Ok(ExitCode::SUCCESS)
    } else {
        let (lo, hi) = regime.window();
        let window = hi.map_or(format!(">= {lo}"), |h| format!("[{lo}, {h}]"));
        eprintln!("riq: {regime} failed: fitted order {order}, expected {window} with monotone errors");
        Ok(ExitCode::from(1))
    }
}

pub fn qubit(c: &Common) -> Outcome {
    let cfg = load(c)?;
    if cfg.model.d != 1 || cfg.model.n != 1 {
        return Err(usage(format!(
            "the qubit suite needs d = 1 and n = 1, got d = {} and n = {}",
            cfg.model.d, cfg.model.n
        )));
    }
    let tau = resolve(c.tau, cfg.params.tau, DEFAULT_TAU, "tau")?;
    let results = qubit_suite(&cfg.model, tau)?;
    let doc = report::checks_document(&cfg.model, tau, "qubit", &results);
    emit(c.out.as_deref(), &[Document { file_name: "qubit.json".into(), contents: report::render(&doc) }])?;
    check_lines(c.out.as_deref(), &results);
    finish(c.out.as_deref(), &results)
}
