//! WebAssembly entry points for the static demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string; the `*_json`
//! functions hold the logic and are what the native tests exercise.

use riq::densela::{eigenvalues_general, ComplexMatrix, DEFAULT_CLUSTER_TOL};
use riq::lindblad::build_lindblad;
use riq::model::{one_step_unitary, InteractionModel};
use riq::perturb::{critical_heisenberg_generator, gamma_beta, gamma_beta_sharp, gamma_w_heisenberg};
use riq::qubit::QubitModel;
use riq::reduced::heisenberg_map;
use riq::regimes::{weak_limit_experiment, ExperimentOptions};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Upper bound on plotted samples per curve.
pub const MAX_SAMPLES: usize = 400;
const MAX_DIM: usize = 4;

fn positive(name: &str, x: f64) -> Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{name} must be positive, got {x}"))
    }
}

fn dims(d: u32, n: u32) -> Result<(usize, usize), String> {
    let (d, n) = (d as usize, n as usize);
    if d == 0 || n == 0 || d > MAX_DIM || n > MAX_DIM {
        return Err(format!("d and n must lie in 1..={MAX_DIM}"));
    }
    Ok((d, n))
}

/// ⟨σ_z⟩ for a seeded qubit started in its excited level: the chain with
/// λ = 1/√τ against the critical-regime Lindblad semigroup.
pub fn critical_trajectory_json(seed: u64, tau: f64, t_max: f64) -> Result<String, String> {
    positive("tau", tau)?;
    positive("t_max", t_max)?;
    let k = (t_max / tau).round();
    if !(1.0..=1e6).contains(&k) {
        return Err(format!("t_max/tau = {k} steps is outside 1..=1e6"));
    }
    let k = k as usize;
    let qm = QubitModel::seeded(seed);
    let model = qm.to_model().map_err(|e| e.to_string())?;
    let u = one_step_unitary(&model, tau.sqrt().recip(), tau).map_err(|e| e.to_string())?;
    let step = heisenberg_map(&u, &model.gibbs(), model.layout()).map_err(|e| e.to_string())?;
    let limit = build_lindblad(&model).generator().exp(tau).map_err(|e| e.to_string())?;

    let sigma_z = ComplexMatrix::from_real_diag(&[-1.0, 1.0]);
    let stride = k.div_ceil(MAX_SAMPLES).max(1);
    let (mut chain, mut semi) = (sigma_z.clone(), sigma_z);
    let mut times = vec![0.0];
    let mut discrete = vec![chain[(1, 1)].re];
    let mut lindblad = vec![semi[(1, 1)].re];
    for j in 1..=k {
        chain = step.apply(&chain);
        semi = limit.apply(&semi);
        if j % stride == 0 || j == k {
            times.push(j as f64 * tau);
            discrete.push(chain[(1, 1)].re);
            lindblad.push(semi[(1, 1)].re);
        }
    }
    let gap = discrete.iter().zip(&lindblad).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(json!({
        "epsilon": qm.epsilon,
        "delta": qm.delta,
        "beta": model.beta.to_json(),
        "steps": k,
        "times": times,
        "discrete": discrete,
        "lindblad": lindblad,
        "max_gap": gap,
    })
    .to_string())
}

/// Weak-coupling sweep over k ∈ {16, 64, 256, 1024}.
pub fn weak_convergence_json(seed: u64, d: u32, n: u32, tau: f64) -> Result<String, String> {
    let (d, n) = dims(d, n)?;
    positive("tau", tau)?;
    let model = InteractionModel::seeded(seed, d, n);
    let r = weak_limit_experiment(&model, tau, 1.0, &[16, 64, 256, 1024], &ExperimentOptions::default())
        .map_err(|e| e.to_string())?;
    let points: Vec<_> = r
        .points
        .iter()
        .map(|p| json!({"lambda": p.lambda, "k": p.k, "schrodinger": p.error_schrodinger, "heisenberg": p.error_heisenberg}))
        .collect();
    Ok(json!({
        "points": points,
        "fitted_order": r.fitted_order,
        "theoretical_order": r.theoretical_order,
        "pass": r.pass,
        "diagnostics": r.diagnostics,
    })
    .to_string())
}

/// Eigenvalues of one of the Heisenberg-picture generators.
pub fn generator_spectrum_json(seed: u64, d: u32, n: u32, tau: f64, which: &str) -> Result<String, String> {
    let (d, n) = dims(d, n)?;
    positive("tau", tau)?;
    let model = InteractionModel::seeded(seed, d, n);
    let op = match which {
        "weak" => gamma_w_heisenberg(&model, tau, DEFAULT_CLUSTER_TOL).map_err(|e| e.to_string())?,
        "thermal" => gamma_beta(&model),
        "thermal_averaged" => gamma_beta_sharp(&model, DEFAULT_CLUSTER_TOL).map_err(|e| e.to_string())?,
        "critical" => critical_heisenberg_generator(&model),
        other => return Err(format!("unknown generator '{other}'")),
    };
    let mut ev = eigenvalues_general(op.matrix()).map_err(|e| e.to_string())?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let pairs: Vec<[f64; 2]> = ev.iter().map(|z| [z.re, z.im]).collect();
    Ok(json!({"generator": which, "dim": model.system_dim(), "eigenvalues": pairs}).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = criticalTrajectory)]
pub fn critical_trajectory(seed: u32, tau: f64, t_max: f64) -> Result<String, JsError> {
    js(critical_trajectory_json(seed.into(), tau, t_max))
}

#[wasm_bindgen(js_name = weakConvergence)]
pub fn weak_convergence(seed: u32, d: u32, n: u32, tau: f64) -> Result<String, JsError> {
    js(weak_convergence_json(seed.into(), d, n, tau))
}

#[wasm_bindgen(js_name = generatorSpectrum)]
pub fn generator_spectrum(seed: u32, d: u32, n: u32, tau: f64, which: &str) -> Result<String, JsError> {
    js(generator_spectrum_json(seed.into(), d, n, tau, which))
}
