//! Closed forms for a qubit system coupled to a two-level chain site.
//!
//! Conventions: h₀ = εσ_z with σ_z = diag(−1, 1), σ₋ = |0⟩⟨1|, σ₊ = |1⟩⟨0|.
//! The free Heisenberg rotation B ↦ e^{iτh₀}Be^{−iτh₀} has eigenvectors
//! Î = I/√2 and σ̂_z = σ_z/√2 (eigenvalue 1), σ₋ (e^{−2iτε}) and σ₊ (e^{2iτε}).
//! Everything here is built from scalar integrals and does not call the
//! generic F/G machinery, so the two can be compared.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::densela::{
    eigenvalues_general, eigenvector_for, eigh, vec, ComplexMatrix, SpectralDecomposition, C64, DEFAULT_CLUSTER_TOL, I,
    ONE, ZERO,
};
use crate::error::{Error, Result};
use crate::model::{gibbs_weights, one_step_unitary, InteractionModel, InverseTemperature};
use crate::reduced::{heisenberg_map, SuperOperator};

/// Phases closer than this multiple of the clustering tolerance, but not
/// merged, are treated as unresolvable.
const RESOLUTION_FACTOR: f64 = 1e3;

/// Below this |ατ| the scalar integrals switch to their Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct QubitModel {
    pub epsilon: f64,
    pub delta: f64,
    /// Entries (a, b, c, d) of V = [[a, b], [c, d]].
    pub v: [C64; 4],
    pub beta: InverseTemperature,
}

impl QubitModel {
    pub fn coupling(&self) -> ComplexMatrix {
        ComplexMatrix::new(2, 2, self.v.to_vec()).expect("2x2")
    }

    pub fn h0(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[-self.epsilon, self.epsilon])
    }

    fn levels(&self) -> [f64; 2] {
        [-self.epsilon, self.epsilon]
    }

    pub fn to_model(&self) -> Result<InteractionModel> {
        InteractionModel::new(self.h0(), vec![self.delta], vec![self.coupling()], self.beta)
    }

    /// Reads ε, δ, β and V from a general model with d = n = 1 whose h₀ is
    /// diagonal with entries (−ε, ε).
    pub fn from_model(model: &InteractionModel) -> Result<Self> {
        if model.system_dim() != 2 || model.n != 1 {
            return Err(Error::Precondition(
                "the qubit closed forms need a two-level system and one excited site level".into(),
            ));
        }
        let h = &model.h0;
        let eps = h[(1, 1)].re;
        if h[(0, 1)].norm() > 1e-12 || (h[(0, 0)].re + eps).abs() > 1e-12 {
            return Err(Error::Precondition("h0 must be diag(-epsilon, epsilon)".into()));
        }
        let v = &model.couplings[0];
        Ok(Self {
            epsilon: eps,
            delta: model.delta[0],
            v: [v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]],
            beta: model.beta,
        })
    }

    /// Brings a general d = n = 1 model to the form h₀ = εσ_z by diagonalizing
    /// h₀ and dropping its trace (which only contributes a global phase).
    /// Returns the qubit model and the unitary U with h₀ = U (εσ_z + c) U†.
    pub fn canonical(model: &InteractionModel) -> Result<(Self, ComplexMatrix)> {
        if model.system_dim() != 2 || model.n != 1 {
            return Err(Error::Precondition(
                "the qubit closed forms need a two-level system and one excited site level".into(),
            ));
        }
        let (e, u) = eigh(&model.h0)?;
        let v = u.adjoint().matmul(&model.couplings[0]).matmul(&u);
        let qm = Self {
            epsilon: 0.5 * (e[1] - e[0]),
            delta: model.delta[0],
            v: [v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]],
            beta: model.beta,
        };
        Ok((qm, u))
    }

    /// ε, δ ∈ [0.5, 2), Gaussian V at scale 0.5, β ∈ [0.3, 2).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = std::array::from_fn(|_| crate::densela::random::random_complex(rng).scale(0.5));
        Self {
            epsilon: rng.random_range(0.5..2.0),
            delta: rng.random_range(0.5..2.0),
            v,
            beta: InverseTemperature::Finite(rng.random_range(0.3..2.0)),
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Thermal weight e^{−βδ} of the excited site level relative to the ground level.
    fn excited_weight(&self) -> f64 {
        gibbs_weights(self.beta, &[self.delta]).relative(1)
    }

    fn partition(&self) -> f64 {
        1.0 / gibbs_weights(self.beta, &[self.delta]).inverse_partition()
    }
}

/// ∫₀^τ e^{isα} ds.
fn phase_integral(tau: f64, alpha: f64) -> C64 {
    let x = 0.5 * tau * alpha;
    let sinc = if x.abs() < SERIES_CUTOFF { 1.0 - x * x / 6.0 + x.powi(4) / 120.0 } else { x.sin() / x };
    (I * x).exp() * (tau * sinc)
}

/// ∫₀^τ ds ∫₀^s du e^{iα(s−u)} = (1 + iατ − e^{iατ})/α².
fn double_integral(tau: f64, alpha: f64) -> C64 {
    let x = I * (alpha * tau);
    if (alpha * tau).abs() < SERIES_CUTOFF {
        // τ² Σ_{k≥2} x^{k−2}/k!
        let mut term = C64::new(0.5, 0.0);
        let mut sum = term;
        for k in 3..12 {
            term *= x / k as f64;
            sum += term;
        }
        sum * (tau * tau)
    } else {
        (ONE + x - x.exp()) / (alpha * alpha)
    }
}

/// Ground-to-excited block of the first-order coefficient:
/// F_{ij} = −i e^{−iτ(E_i+δ)} V_{ij} ∫₀^τ e^{is(E_i+δ−E_j)} ds.
pub fn f10_closed(qm: &QubitModel, tau: f64) -> ComplexMatrix {
    let e = qm.levels();
    let v = qm.coupling();
    ComplexMatrix::from_fn(2, 2, |i, j| {
        let shifted = e[i] + qm.delta;
        -I * (-I * (tau * shifted)).exp() * v[(i, j)] * phase_integral(tau, shifted - e[j])
    })
}

/// Excited-to-ground block: F_{ij} = −i e^{−iτE_i} (V†)_{ij} ∫₀^τ e^{is(E_i−E_j−δ)} ds.
pub fn f01_closed(qm: &QubitModel, tau: f64) -> ComplexMatrix {
    let e = qm.levels();
    let vd = qm.coupling().adjoint();
    ComplexMatrix::from_fn(2, 2, |i, j| {
        -I * (-I * (tau * e[i])).exp() * vd[(i, j)] * phase_integral(tau, e[i] - e[j] - qm.delta)
    })
}

/// Diagonals of the ground and excited blocks of the second-order coefficient.
fn g_diagonals(qm: &QubitModel, tau: f64) -> ([C64; 2], [C64; 2]) {
    let e = qm.levels();
    let v = qm.coupling();
    let g00 = std::array::from_fn(|i| {
        let s: C64 = (0..2).map(|k| double_integral(tau, e[i] - e[k] - qm.delta) * v[(k, i)].norm_sqr()).sum();
        -(-I * (tau * e[i])).exp() * s
    });
    let g11 = std::array::from_fn(|i| {
        let s: C64 = (0..2).map(|k| double_integral(tau, e[i] + qm.delta - e[k]) * v[(i, k)].norm_sqr()).sum();
        -(-I * (tau * (e[i] + qm.delta))).exp() * s
    });
    (g00, g11)
}

/// ‖F^{OD}‖² of the ground-to-excited block: the squared moduli of its
/// off-diagonal entries.
pub fn off_diagonal_weight(qm: &QubitModel, tau: f64) -> f64 {
    let f = f10_closed(qm, tau);
    f[(0, 1)].norm_sqr() + f[(1, 0)].norm_sqr()
}

/// Compression of the unnormalized second-order coefficient T_β to
/// span{Î, σ̂_z}, entries ⟨x̂_i, T_β x̂_j⟩. The first column vanishes because
/// T_β(I) = 0.
pub fn tbeta_restricted(qm: &QubitModel, tau: f64) -> [[f64; 2]; 2] {
    let f = f10_closed(qm, tau);
    let w = qm.excited_weight();
    let (up, down) = (f[(1, 0)].norm_sqr(), f[(0, 1)].norm_sqr());
    let mu = (1.0 - w) * (up - down);
    let nu = -(1.0 + w) * (up + down);
    [[0.0, mu], [0.0, nu]]
}

/// Tr(σ₊ T_β(σ₋)) and Tr(σ₋ T_β(σ₊)), unnormalized. These are complex
/// conjugates of each other; both are computed independently.
pub fn rotating_traces(qm: &QubitModel, tau: f64) -> (C64, C64) {
    let (eps, del) = (qm.epsilon, qm.delta);
    let f10 = f10_closed(qm, tau);
    let f01 = f01_closed(qm, tau);
    let (g0, g1) = g_diagonals(qm, tau);
    let w = qm.excited_weight();
    let ph = |x: f64| (I * (tau * x)).exp();
    let minus = g0[0].conj() * ph(-eps)
        + ph(-eps) * g0[1]
        + f10[(0, 0)].conj() * f10[(1, 1)]
        + (f01[(0, 0)].conj() * f01[(1, 1)] + g1[0].conj() * ph(-eps - del) + ph(del - eps) * g1[1]) * w;
    let plus = g0[1].conj() * ph(eps)
        + ph(eps) * g0[0]
        + f10[(1, 1)].conj() * f10[(0, 0)]
        + (f01[(1, 1)].conj() * f01[(0, 0)] + g1[1].conj() * ph(eps - del) + ph(eps + del) * g1[0]) * w;
    (minus, plus)
}

/// Tr(σ₊ T_β(σ₊)) and Tr(σ₋ T_β(σ₋)), unnormalized. These couple σ₋ and σ₊
/// only when their rotation phases coincide.
fn cross_traces(qm: &QubitModel, tau: f64) -> (C64, C64) {
    let f10 = f10_closed(qm, tau);
    let f01 = f01_closed(qm, tau);
    let w = qm.excited_weight();
    let pp = f10[(1, 0)].conj() * f10[(0, 1)] + f01[(1, 0)].conj() * f01[(0, 1)] * w;
    let mm = f10[(0, 1)].conj() * f10[(1, 0)] + f01[(0, 1)].conj() * f01[(1, 0)] * w;
    (pp, mm)
}

/// Which of the rotation phases coincide at this ετ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseStructure {
    /// 1, e^{−2iτε}, e^{2iτε} all distinct.
    Generic,
    /// e^{−2iτε} = e^{2iτε} = −1 (ετ ≡ π/2 mod π).
    RotatingMerged,
    /// e^{±2iτε} = 1 (ετ ∈ πℤ).
    AllMerged,
}

fn phase_structure(qm: &QubitModel, tau: f64, tol: f64) -> Result<PhaseStructure> {
    let x = qm.epsilon * tau;
    let floor = RESOLUTION_FACTOR * tol.max(1e-15);
    // |e^{2ix} − 1| = 2|sin x|, |e^{2ix} − e^{−2ix}| = 2|sin 2x|
    let (gap_one, gap_pair) = (2.0 * x.sin().abs(), 2.0 * (2.0 * x).sin().abs());
    if gap_one <= tol {
        return Ok(PhaseStructure::AllMerged);
    }
    if gap_one < floor {
        return Err(Error::UnresolvedClusters { separation: gap_one, tolerance: tol });
    }
    if gap_pair <= tol {
        return Ok(PhaseStructure::RotatingMerged);
    }
    if gap_pair < floor {
        return Err(Error::UnresolvedClusters { separation: gap_pair, tolerance: tol });
    }
    Ok(PhaseStructure::Generic)
}

fn require_off_pi(qm: &QubitModel, tau: f64, tol: f64) -> Result<PhaseStructure> {
    match phase_structure(qm, tau, tol)? {
        PhaseStructure::AllMerged => Err(Error::Precondition(format!(
            "epsilon*tau = {} is a multiple of pi; the rotation phases collapse",
            qm.epsilon * tau
        ))),
        s => Ok(s),
    }
}

/// vec of Î, σ̂_z, σ₋, σ₊ (orthonormal in the Hilbert–Schmidt product).
pub fn operator_basis() -> [ComplexMatrix; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let m = |entries: [f64; 4]| {
        let op = ComplexMatrix::from_fn(2, 2, |i, j| C64::new(entries[2 * i + j], 0.0));
        ComplexMatrix::new(4, 1, vec(&op)).expect("column")
    };
    [m([r, 0.0, 0.0, r]), m([-r, 0.0, 0.0, r]), m([0.0, 1.0, 0.0, 0.0]), m([0.0, 0.0, 1.0, 0.0])]
}

fn outer(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    x.matmul(&y.adjoint())
}

#[derive(Clone, Debug)]
pub struct UZeroSpectrum {
    /// Eigenvalues on Î, σ̂_z, σ₋, σ₊.
    pub eigenvalues: [C64; 4],
    /// Clustered eigenprojectors on column-stacked operators.
    pub decomposition: SpectralDecomposition,
    pub structure: PhaseStructure,
}

/// Spectrum of the free rotation 𝒰₀₀(0): B ↦ e^{iτh₀}Be^{−iτh₀}.
pub fn uzero_spectrum(qm: &QubitModel, tau: f64) -> Result<UZeroSpectrum> {
    let tol = DEFAULT_CLUSTER_TOL;
    let structure = phase_structure(qm, tau, tol)?;
    let rot = (I * (2.0 * tau * qm.epsilon)).exp();
    let eigenvalues = [ONE, ONE, rot.conj(), rot];
    let b = operator_basis();
    let p: Vec<ComplexMatrix> = b.iter().map(|x| outer(x, x)).collect();
    let (values, projectors) = match structure {
        PhaseStructure::Generic => (vec![ONE, rot.conj(), rot], vec![&p[0] + &p[1], p[2].clone(), p[3].clone()]),
        PhaseStructure::RotatingMerged => (vec![ONE, C64::new(-1.0, 0.0)], vec![&p[0] + &p[1], &p[2] + &p[3]]),
        PhaseStructure::AllMerged => (vec![ONE], vec![ComplexMatrix::identity(4)]),
    };
    Ok(UZeroSpectrum {
        eigenvalues,
        decomposition: SpectralDecomposition { eigenvalues: values, projectors, cluster_tolerance: tol },
        structure,
    })
}

/// λ² coefficients of the four eigenvalue branches of 𝒰_β(λ,τ), normalized
/// by the partition function: (0, ν/Z, Tr(σ₊T_βσ₋)/Z, Tr(σ₋T_βσ₊)/Z) on
/// the branches through Π₁(0), …, Π₄(0).
pub fn predicted_coefficients(qm: &QubitModel, tau: f64) -> [C64; 4] {
    let z = qm.partition();
    let t = tbeta_restricted(qm, tau);
    let (minus, plus) = rotating_traces(qm, tau);
    [ZERO, C64::new(t[1][1] / z, 0.0), minus / z, plus / z]
}

/// Zeroth-order spectral projectors Π₁(0), …, Π₄(0) of the perturbed
/// branches. Inside the eigenvalue-1 space the perturbation selects the
/// (non-orthogonal) eigenprojectors of [[0, μ], [0, ν]].
pub fn zeroth_order_projectors(qm: &QubitModel, tau: f64) -> Result<[ComplexMatrix; 4]> {
    let t = tbeta_restricted(qm, tau);
    let (mu, nu) = (t[0][1], t[1][1]);
    let scale = f10_closed(qm, tau).frobenius_norm().powi(2);
    if nu.abs() <= 1e-14 + 1e-10 * scale {
        return Err(Error::DegenerateCoupling(format!(
            "the diagonal-coherence rate {nu:.3e} vanishes (V has no off-diagonal coupling at this tau); the first two branches are not separated at order lambda^2"
        )));
    }
    let [id, sz, sm, sp] = operator_basis();
    let ratio = C64::new(mu / nu, 0.0);
    let p2 = outer(&(&sz + &id.scale(ratio)), &sz);
    let p1 = outer(&id, &(&id - &sz.scale(ratio)));
    Ok([p1, p2, outer(&sm, &sm), outer(&sp, &sp)])
}

/// Γʷ_β from its spectral form over Π₁(0), …, Π₄(0), including the σ₋/σ₊
/// coupling when their rotation phases coincide.
pub fn qubit_gamma_w_beta(qm: &QubitModel, tau: f64) -> Result<SuperOperator> {
    let structure = require_off_pi(qm, tau, DEFAULT_CLUSTER_TOL)?;
    let z = qm.partition();
    let t = tbeta_restricted(qm, tau);
    let (minus, plus) = rotating_traces(qm, tau);
    let rot = (I * (2.0 * tau * qm.epsilon)).exp();
    let [id, sz, sm, sp] = operator_basis();
    let mut m = outer(&id, &sz).scale_real(t[0][1] / z);
    m += &outer(&sz, &sz).scale_real(t[1][1] / z);
    m += &outer(&sm, &sm).scale(rot * minus / z);
    m += &outer(&sp, &sp).scale(rot.conj() * plus / z);
    if structure == PhaseStructure::RotatingMerged {
        let (pp, mm) = cross_traces(qm, tau);
        m += &outer(&sm, &sp).scale(rot * pp / z);
        m += &outer(&sp, &sm).scale(rot.conj() * mm / z);
    }
    SuperOperator::from_matrix(m)
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub unperturbed: C64,
    pub predicted: C64,
    pub fitted: C64,
    /// |fitted − predicted| / max(|predicted|, scale), with scale the largest
    /// predicted coefficient.
    pub relative_error: f64,
    /// Eigenvalue along the schedule.
    pub values: Vec<C64>,
    /// ‖Π(λ) − Π(0)‖_F at the smallest λ.
    pub projector_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct PerturbedEigensystem {
    pub lambdas: Vec<f64>,
    pub branches: Vec<Branch>,
    pub diagnostics: Vec<String>,
}

/// Minimum ratio between the best and second-best branch assignment scores.
const ASSIGNMENT_MARGIN: f64 = 1.5;

fn spectral_projectors(m: &ComplexMatrix) -> Result<Vec<(C64, ComplexMatrix)>> {
    let values = eigenvalues_general(m)?;
    let adj = m.adjoint();
    values
        .into_iter()
        .map(|v| {
            let r = ComplexMatrix::new(m.rows(), 1, eigenvector_for(m, v)?)?;
            let l = ComplexMatrix::new(m.rows(), 1, eigenvector_for(&adj, v.conj())?)?;
            let norm = l.adjoint().matmul(&r)[(0, 0)];
            if norm.norm() < 1e-10 {
                return Err(Error::AmbiguousBranches(format!("eigenvalue {v} is defective or repeated")));
            }
            Ok((v, outer(&r, &l).scale(ONE / norm)))
        })
        .collect()
}

fn overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.matmul(b).trace().norm()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Matches numerical eigenpairs to reference projectors by maximal total
/// overlap; `perm[i]` is the eigenpair assigned to reference i.
fn assign(reference: &[ComplexMatrix], found: &[(C64, ComplexMatrix)]) -> Result<Vec<usize>> {
    let mut scored: Vec<(f64, Vec<usize>)> = permutations(reference.len())
        .into_iter()
        .map(|p| (p.iter().enumerate().map(|(i, &j)| overlap(&reference[i], &found[j].1)).sum(), p))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (best, second) = (scored[0].0, scored.get(1).map_or(0.0, |s| s.0));
    if best < ASSIGNMENT_MARGIN * second.max(0.0) && best - second < 0.5 {
        return Err(Error::AmbiguousBranches(format!(
            "best branch assignment scores {best:.4}, runner-up {second:.4}"
        )));
    }
    Ok(scored.swap_remove(0).1)
}

/// Diagonalizes 𝒰_β(λ,τ) along the λ schedule, tracks the four branches by
/// projector overlap (starting from Π(0)) and fits the λ² coefficient of
/// each branch.
pub fn perturbed_eigensystem(qm: &QubitModel, tau: f64, lambdas: &[f64]) -> Result<PerturbedEigensystem> {
    if require_off_pi(qm, tau, DEFAULT_CLUSTER_TOL)? == PhaseStructure::RotatingMerged {
        return Err(Error::AmbiguousBranches(
            "e^{2i tau epsilon} = e^{-2i tau epsilon}: the rotating branches share an unperturbed eigenvalue".into(),
        ));
    }
    if lambdas.len() < 2 || lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InsufficientData { needed: 2, got: lambdas.iter().filter(|&&l| l > 0.0).count() });
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let model = qm.to_model()?;
    let unperturbed = uzero_spectrum(qm, tau)?.eigenvalues;
    let predicted = predicted_coefficients(qm, tau);
    let p0 = zeroth_order_projectors(qm, tau)?;
    let mut reference: Vec<ComplexMatrix> = p0.to_vec();
    let mut values: [Vec<C64>; 4] = std::array::from_fn(|_| Vec::with_capacity(sorted.len()));
    let mut deviation = [0.0; 4];
    for (step, &lambda) in sorted.iter().enumerate() {
        let u = one_step_unitary(&model, lambda, tau)?;
        let map = heisenberg_map(&u, &model.gibbs(), model.layout())?;
        let found = spectral_projectors(map.matrix())?;
        let perm = assign(&reference, &found)?;
        for (i, &j) in perm.iter().enumerate() {
            values[i].push(found[j].0);
            if step == 0 {
                deviation[i] = (&found[j].1 - &p0[i]).frobenius_norm();
            }
            reference[i] = found[j].1.clone();
        }
    }
    let scale = predicted.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let branches = (0..4)
        .map(|i| {
            // (u(λ) − u(0))/λ² = c + d λ², least squares in λ²
            let xs: Vec<f64> = sorted.iter().map(|l| l * l).collect();
            let ys: Vec<C64> = values[i].iter().zip(&xs).map(|(v, x)| (v - unperturbed[i]) / *x).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<C64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let sxy: C64 = xs.iter().zip(&ys).map(|(x, y)| (y - my) * (x - mx)).sum();
            let fitted = my - sxy / sxx * mx;
            let relative_error = (fitted - predicted[i]).norm() / predicted[i].norm().max(scale);
            Branch {
                unperturbed: unperturbed[i],
                predicted: predicted[i],
                fitted,
                relative_error,
                values: values[i].clone(),
                projector_deviation: deviation[i],
            }
        })
        .collect();
    Ok(PerturbedEigensystem { lambdas: sorted, branches, diagnostics: Vec::new() })
}
