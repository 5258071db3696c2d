//! Convergence harness: iterate the reduced one-step maps along integer
//! schedules and measure the distance to each effective semigroup.
//!
//! Errors are uniform in time: for a schedule point with k steps the reported
//! error is the largest operator-norm distance over the intermediate times
//! j·t/k, j = 1…k.

use std::fmt;
use std::str::FromStr;

use crate::densela::{expm, expm_hermitian, op_norm, ComplexMatrix, DEFAULT_CLUSTER_TOL, I};
use crate::error::{Error, Result};
use crate::model::{one_step_unitary, InteractionModel};
use crate::perturb::{
    critical_heisenberg_generator, critical_schrodinger_generator, free_rotation, gamma0_sharp, gamma_beta_sharp,
    gamma_w_heisenberg, gamma_w_schrodinger, sharp_superop, ProjectorFamily,
};
use crate::reduced::{heisenberg_map, schrodinger_block, SuperOperator};

/// Errors at or below this are treated as roundoff; a track whose errors are
/// all this small is reported as exact and no order is fitted.
pub const EXACT_THRESHOLD: f64 = 1e-11;

/// The weak-coupling asymptotics need λ² well below the smallest separation
/// between distinct free-rotation phases; below this ratio a diagnostic is
/// emitted.
const NEAR_RESONANCE_FACTOR: f64 = 100.0;

/// Relative slack accepted when checking that a schedule's step count is an
/// integer.
const INTEGER_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegimeKind {
    Weak,
    Regime2,
    Critical,
    Continuous,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 4] = [Self::Weak, Self::Regime2, Self::Critical, Self::Continuous];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Weak => "weak",
            Self::Regime2 => "regime2",
            Self::Critical => "critical",
            Self::Continuous => "continuous",
        }
    }

    /// Expected log-log slope of the error in the schedule's small parameter.
    pub fn theoretical_order(self) -> f64 {
        match self {
            Self::Weak => 2.0,
            _ => 1.0,
        }
    }

    /// Accepted range for the fitted slope.
    pub fn window(self) -> (f64, Option<f64>) {
        match self {
            Self::Weak => (1.5, Some(2.5)),
            Self::Regime2 => (0.7, Some(1.3)),
            Self::Critical | Self::Continuous => (0.7, None),
        }
    }

    /// Name of the parameter the order is fitted against.
    pub fn small_parameter(self) -> &'static str {
        match self {
            Self::Weak => "lambda",
            _ => "tau",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidField { field: "regime".into(), message: format!("unknown regime '{s}'") })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergencePoint {
    pub regime: RegimeKind,
    pub t: f64,
    pub tau: f64,
    pub lambda: f64,
    pub k: u64,
    pub error_schrodinger: f64,
    pub error_heisenberg: f64,
    /// Final-time error of the Heisenberg track on the run's fixed observable.
    pub error_observable: f64,
    /// ‖M − M^#‖ for the final renormalized Heisenberg map M, averaged over
    /// the Bohr-frequency family of h₀.
    pub off_block_heisenberg: f64,
}

impl ConvergencePoint {
    pub fn small_parameter(&self) -> f64 {
        match self.regime {
            RegimeKind::Weak => self.lambda,
            _ => self.tau,
        }
    }
}

/// Fit of one error track against the small parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackFit {
    pub order: Option<f64>,
    pub exact: bool,
    pub monotone: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub regime: RegimeKind,
    pub points: Vec<ConvergencePoint>,
    /// Slope of the pointwise maximum of both tracks; `None` when exact.
    pub fitted_order: Option<f64>,
    pub theoretical_order: f64,
    pub schrodinger: TrackFit,
    pub heisenberg: TrackFit,
    pub pass: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    pub cluster_tol: f64,
    /// Observable used for the pointwise Heisenberg error; identity if unset.
    pub observable: Option<ComplexMatrix>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self { cluster_tol: DEFAULT_CLUSTER_TOL, observable: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub used: usize,
    pub excluded: Vec<String>,
}

/// Least-squares slope of log(error) against log(parameter). Non-positive or
/// non-finite errors are dropped and listed in `excluded`.
pub fn fit_order(samples: &[(f64, f64)]) -> Result<FitResult> {
    let mut excluded = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &(p, e)) in samples.iter().enumerate() {
        if !(p > 0.0 && p.is_finite()) {
            excluded.push(format!("point {i}: parameter {p} is not positive"));
        } else if !(e > 0.0 && e.is_finite()) {
            excluded.push(format!("point {i}: error {e} is not positive"));
        } else {
            xs.push(p.ln());
            ys.push(e.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("all parameters are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(FitResult { slope: sxy / sxx, used: xs.len(), excluded })
}

/// Errors ordered from coarsest to finest parameter: the finest must beat the
/// coarsest and at most one consecutive pair may fail to decrease.
pub fn monotone_trend(coarse_to_fine: &[f64]) -> bool {
    if coarse_to_fine.len() < 2 {
        return true;
    }
    let violations = coarse_to_fine.windows(2).filter(|w| w[1] >= w[0]).count();
    coarse_to_fine[coarse_to_fine.len() - 1] < coarse_to_fine[0] && violations <= 1
}

fn integer_steps(value: f64, what: &str) -> Result<u64> {
    let k = value.round();
    if !value.is_finite() || k < 1.0 || (value - k).abs() > INTEGER_SLACK * k.max(1.0) {
        return Err(Error::Schedule(format!("{what} = {value} is not a positive integer")));
    }
    Ok(k as u64)
}

fn check_positive(value: f64, field: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidField { field: field.into(), message: format!("must be positive, got {value}") })
    }
}

/// (λ, k) with λ = √(t/k).
pub fn weak_schedule(t: f64, ks: &[u64]) -> Result<Vec<(f64, u64)>> {
    check_positive(t, "t")?;
    ks.iter()
        .map(|&k| {
            if k == 0 {
                return Err(Error::Schedule("k must be positive".into()));
            }
            let lambda = (t / k as f64).sqrt();
            let check = integer_steps(t / (lambda * lambda), "t/lambda^2")?;
            if check != k {
                return Err(Error::Schedule(format!("t/lambda^2 rounds to {check}, expected {k}")));
            }
            Ok((lambda, k))
        })
        .collect()
}

/// (τ, λ) pairs with λ fixed and τ = √(t/k)/λ.
pub fn regime2_schedule(t: f64, lambda: f64, ks: &[u64]) -> Result<Vec<(f64, f64)>> {
    check_positive(t, "t")?;
    check_positive(lambda, "lambda")?;
    ks.iter()
        .map(|&k| {
            if k == 0 {
                return Err(Error::Schedule("k must be positive".into()));
            }
            Ok(((t / k as f64).sqrt() / lambda, lambda))
        })
        .collect()
}

/// τ = t/k.
pub fn tau_schedule(t: f64, ks: &[u64]) -> Result<Vec<f64>> {
    check_positive(t, "t")?;
    ks.iter()
        .map(|&k| if k == 0 { Err(Error::Schedule("k must be positive".into())) } else { Ok(t / k as f64) })
        .collect()
}

/// One schedule point's discrete and limiting dynamics.
struct PointSetup {
    k: u64,
    a: ComplexMatrix,
    renorm_s: Option<ComplexMatrix>,
    limit_s: ComplexMatrix,
    map_h: ComplexMatrix,
    renorm_h: Option<ComplexMatrix>,
    limit_h: ComplexMatrix,
}

struct PointErrors {
    schrodinger: f64,
    heisenberg: f64,
    final_map: SuperOperator,
    final_limit: SuperOperator,
}

fn iterate(setup: &PointSetup) -> Result<PointErrors> {
    let ds = setup.a.rows();
    let dh = setup.map_h.rows();
    let mut a_pow = ComplexMatrix::identity(ds);
    let mut r_pow = ComplexMatrix::identity(ds);
    let mut lim_s = ComplexMatrix::identity(ds);
    let mut m_pow = ComplexMatrix::identity(dh);
    let mut rh_pow = ComplexMatrix::identity(dh);
    let mut lim_h = ComplexMatrix::identity(dh);
    let (mut es, mut eh) = (0.0f64, 0.0f64);
    let mut final_map = ComplexMatrix::identity(dh);
    for _ in 0..setup.k {
        a_pow = setup.a.matmul(&a_pow);
        lim_s = setup.limit_s.matmul(&lim_s);
        m_pow = setup.map_h.matmul(&m_pow);
        lim_h = setup.limit_h.matmul(&lim_h);
        let disc_s = match &setup.renorm_s {
            Some(r) => {
                r_pow = r.matmul(&r_pow);
                r_pow.matmul(&a_pow)
            }
            None => a_pow.clone(),
        };
        final_map = match &setup.renorm_h {
            Some(r) => {
                rh_pow = r.matmul(&rh_pow);
                rh_pow.matmul(&m_pow)
            }
            None => m_pow.clone(),
        };
        es = es.max(op_norm(&(&disc_s - &lim_s)));
        eh = eh.max(op_norm(&(&final_map - &lim_h)));
    }
    Ok(PointErrors {
        schrodinger: es,
        heisenberg: eh,
        final_map: SuperOperator::from_matrix(final_map)?,
        final_limit: SuperOperator::from_matrix(lim_h)?,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish_point(
    model: &InteractionModel,
    regime: RegimeKind,
    t: f64,
    tau: f64,
    lambda: f64,
    setup: PointSetup,
    opts: &ExperimentOptions,
    bohr: &ProjectorFamily,
) -> Result<ConvergencePoint> {
    let errs = iterate(&setup)?;
    let b = opts.observable.clone().unwrap_or_else(|| ComplexMatrix::identity(model.system_dim()));
    let error_observable = op_norm(&(&errs.final_map.apply(&b) - &errs.final_limit.apply(&b)));
    let off = errs.final_map.matrix() - sharp_superop(&errs.final_map, bohr)?.matrix();
    Ok(ConvergencePoint {
        regime,
        t,
        tau,
        lambda,
        k: setup.k,
        error_schrodinger: errs.schrodinger,
        error_heisenberg: errs.heisenberg,
        error_observable,
        off_block_heisenberg: op_norm(&off),
    })
}

fn discrete_maps(model: &InteractionModel, lambda: f64, tau: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let u = one_step_unitary(model, lambda, tau)?;
    let layout = model.layout();
    let a = schrodinger_block(&u, layout)?;
    let m = heisenberg_map(&u, &model.gibbs(), layout)?;
    Ok((a, m.matrix().clone()))
}

fn fit_track(regime: RegimeKind, params: &[f64], errors: &[f64], name: &str, diags: &mut Vec<String>) -> TrackFit {
    if errors.iter().all(|&e| e <= EXACT_THRESHOLD) {
        return TrackFit { order: None, exact: true, monotone: true, pass: true };
    }
    let mut idx: Vec<usize> = (0..params.len()).collect();
    idx.sort_by(|&a, &b| params[b].total_cmp(&params[a]));
    let ordered: Vec<f64> = idx.iter().map(|&i| errors[i]).collect();
    let monotone = monotone_trend(&ordered);
    if !monotone {
        diags.push(format!("{name}: errors do not decrease towards the finest parameter"));
    }
    let samples: Vec<(f64, f64)> = params.iter().copied().zip(errors.iter().copied()).collect();
    let order = match fit_order(&samples) {
        Ok(fit) => {
            diags.extend(fit.excluded.into_iter().map(|e| format!("{name}: {e}")));
            Some(fit.slope)
        }
        Err(e) => {
            diags.push(format!("{name}: {e}"));
            None
        }
    };
    let (lo, hi) = regime.window();
    let in_window = order.is_some_and(|o| o >= lo && hi.is_none_or(|h| o <= h));
    if let (Some(o), false) = (order, in_window) {
        let hi = hi.map_or("inf".to_string(), |h| h.to_string());
        diags.push(format!("{name}: fitted order {o:.4} outside [{lo}, {hi}]"));
    }
    TrackFit { order, exact: false, monotone, pass: monotone && in_window }
}

fn assemble(regime: RegimeKind, points: Vec<ConvergencePoint>, mut diagnostics: Vec<String>) -> ConvergenceReport {
    let params: Vec<f64> = points.iter().map(ConvergencePoint::small_parameter).collect();
    let es: Vec<f64> = points.iter().map(|p| p.error_schrodinger).collect();
    let eh: Vec<f64> = points.iter().map(|p| p.error_heisenberg).collect();
    let schrodinger = fit_track(regime, &params, &es, "schrodinger", &mut diagnostics);
    let heisenberg = fit_track(regime, &params, &eh, "heisenberg", &mut diagnostics);
    let fitted_order = if schrodinger.exact && heisenberg.exact {
        None
    } else {
        let env: Vec<(f64, f64)> = params.iter().zip(es.iter().zip(&eh)).map(|(&p, (&a, &b))| (p, a.max(b))).collect();
        fit_order(&env).ok().map(|f| f.slope)
    };
    let pass = schrodinger.pass && heisenberg.pass;
    ConvergenceReport {
        regime,
        points,
        fitted_order,
        theoretical_order: regime.theoretical_order(),
        schrodinger,
        heisenberg,
        pass,
        diagnostics,
    }
}

fn bohr_family(model: &InteractionModel, opts: &ExperimentOptions) -> Result<ProjectorFamily> {
    ProjectorFamily::commutator(&model.h0, opts.cluster_tol)
}

/// τ fixed, λ = √(t/k): e^{ikτh₀}A^k against e^{tΓʷ(τ)} and
/// 𝒰₀₀(0)^{−k}𝒰_β^k against e^{tΓʷ_β}.
pub fn weak_limit_experiment(
    model: &InteractionModel,
    tau: f64,
    t: f64,
    ks: &[u64],
    opts: &ExperimentOptions,
) -> Result<ConvergenceReport> {
    weak_run(model, tau, t, ks, opts, true)
}

/// The weak-coupling experiment with the free-evolution renormalization
/// removed. For a model whose limit does not commute with the free dynamics
/// the errors should stall rather than converge.
pub fn weak_unrenormalized_experiment(
    model: &InteractionModel,
    tau: f64,
    t: f64,
    ks: &[u64],
    opts: &ExperimentOptions,
) -> Result<ConvergenceReport> {
    weak_run(model, tau, t, ks, opts, false)
}

fn weak_run(
    model: &InteractionModel,
    tau: f64,
    t: f64,
    ks: &[u64],
    opts: &ExperimentOptions,
    renormalize: bool,
) -> Result<ConvergenceReport> {
    check_positive(tau, "tau")?;
    let schedule = weak_schedule(t, ks)?;
    let gs = gamma_w_schrodinger(model, tau, opts.cluster_tol)?;
    let gh = gamma_w_heisenberg(model, tau, opts.cluster_tol)?;
    let bohr = bohr_family(model, opts)?;
    let mut points = Vec::with_capacity(schedule.len());
    for (lambda, k) in schedule {
        let (a, m) = discrete_maps(model, lambda, tau)?;
        let dt = t / k as f64;
        let setup = PointSetup {
            k,
            a,
            renorm_s: renormalize.then(|| expm_hermitian(&model.h0, I * tau)).transpose()?,
            limit_s: expm(&gs.scale_real(dt))?,
            map_h: m,
            renorm_h: renormalize.then(|| free_rotation(model, -tau).map(|s| s.matrix().clone())).transpose()?,
            limit_h: gh.exp(dt)?.matrix().clone(),
        };
        points.push(finish_point(model, RegimeKind::Weak, t, tau, lambda, setup, opts, &bohr)?);
    }
    let mut diags = Vec::new();
    let sep = ProjectorFamily::rotation(&model.h0, tau, opts.cluster_tol)?.min_separation();
    let finest = ks.iter().max().map_or(0.0, |&k| t / k as f64);
    if sep.is_finite() && finest > sep / NEAR_RESONANCE_FACTOR {
        diags.push(format!(
            "distinct free-rotation phases are {sep:.3e} apart; lambda^2 = {finest:.3e} at the finest point is not small against it, expect a preasymptotic slope"
        ));
    }
    if !renormalize {
        diags.push("free-evolution renormalization disabled".into());
    }
    Ok(assemble(RegimeKind::Weak, points, diags))
}

/// k = t/(λτ)² with renormalization, against e^{tΓ₀^#} and e^{tΓ_β^#}.
pub fn regime2_experiment(
    model: &InteractionModel,
    t: f64,
    schedule: &[(f64, f64)],
    opts: &ExperimentOptions,
) -> Result<ConvergenceReport> {
    check_positive(t, "t")?;
    let gs = gamma0_sharp(model, opts.cluster_tol)?;
    let gh = gamma_beta_sharp(model, opts.cluster_tol)?;
    let bohr = bohr_family(model, opts)?;
    let mut points = Vec::with_capacity(schedule.len());
    for &(tau, lambda) in schedule {
        check_positive(tau, "tau")?;
        check_positive(lambda, "lambda")?;
        let k = integer_steps(t / (lambda * tau).powi(2), "t/(lambda tau)^2")?;
        let (a, m) = discrete_maps(model, lambda, tau)?;
        let dt = t / k as f64;
        let setup = PointSetup {
            k,
            a,
            renorm_s: Some(expm_hermitian(&model.h0, I * tau)?),
            limit_s: expm(&gs.scale_real(dt))?,
            map_h: m,
            renorm_h: Some(free_rotation(model, -tau)?.matrix().clone()),
            limit_h: gh.exp(dt)?.matrix().clone(),
        };
        points.push(finish_point(model, RegimeKind::Regime2, t, tau, lambda, setup, opts, &bohr)?);
    }
    Ok(assemble(RegimeKind::Regime2, points, Vec::new()))
}

/// λ = 1/√τ, k = t/τ, no renormalization.
pub fn critical_experiment(
    model: &InteractionModel,
    t: f64,
    taus: &[f64],
    opts: &ExperimentOptions,
) -> Result<ConvergenceReport> {
    check_positive(t, "t")?;
    let gs = critical_schrodinger_generator(model);
    let gh = critical_heisenberg_generator(model);
    let bohr = bohr_family(model, opts)?;
    let mut points = Vec::with_capacity(taus.len());
    for &tau in taus {
        check_positive(tau, "tau")?;
        let k = integer_steps(t / tau, "t/tau")?;
        let lambda = 1.0 / tau.sqrt();
        let (a, m) = discrete_maps(model, lambda, tau)?;
        let dt = t / k as f64;
        let setup = PointSetup {
            k,
            a,
            renorm_s: None,
            limit_s: expm(&gs.scale_real(dt))?,
            map_h: m,
            renorm_h: None,
            limit_h: gh.exp(dt)?.matrix().clone(),
        };
        points.push(finish_point(model, RegimeKind::Critical, t, tau, lambda, setup, opts, &bohr)?);
    }
    Ok(assemble(RegimeKind::Critical, points, Vec::new()))
}

/// λ = 1, k = t/τ, against the free evolutions e^{−ith₀} and e^{it[h₀,·]}.
pub fn continuous_experiment(
    model: &InteractionModel,
    t: f64,
    taus: &[f64],
    opts: &ExperimentOptions,
) -> Result<ConvergenceReport> {
    check_positive(t, "t")?;
    let bohr = bohr_family(model, opts)?;
    let mut points = Vec::with_capacity(taus.len());
    for &tau in taus {
        check_positive(tau, "tau")?;
        let k = integer_steps(t / tau, "t/tau")?;
        let (a, m) = discrete_maps(model, 1.0, tau)?;
        let dt = t / k as f64;
        let setup = PointSetup {
            k,
            a,
            renorm_s: None,
            limit_s: expm_hermitian(&model.h0, -I * dt)?,
            map_h: m,
            renorm_h: None,
            limit_h: free_rotation(model, dt)?.matrix().clone(),
        };
        points.push(finish_point(model, RegimeKind::Continuous, t, tau, 1.0, setup, opts, &bohr)?);
    }
    Ok(assemble(RegimeKind::Continuous, points, Vec::new()))
}
