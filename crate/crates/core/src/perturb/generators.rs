//! Effective generators of the weak-coupling, small-τ and critical limits.

use super::fg::{compute_fg, FGPair};
use super::oscillatory::double_phase_integral;
use super::sharp::{sharp, sharp_superop, ProjectorFamily};
use crate::densela::{eigh, expm_hermitian, ComplexMatrix, I};
use crate::error::{Error, Result};
use crate::model::{GibbsWeights, InteractionModel};
use crate::reduced::SuperOperator;

/// Γʷ(τ) = (e^{iτh₀} G₀₀(τ))^# over the clustered eigenprojectors of e^{−iτh₀}.
pub fn gamma_w_schrodinger(model: &InteractionModel, tau: f64, tol: f64) -> Result<ComplexMatrix> {
    let family = ProjectorFamily::free_evolution(&model.h0, tau, tol)?;
    family.ensure_resolved()?;
    let fg = compute_fg(model, tau)?;
    let g00 = fg.g_block(model.layout(), 0, 0);
    let k = expm_hermitian(&model.h0, I * tau)?.matmul(&g00);
    sharp(&k, &family)
}

/// Γʷ(τ) from the double-integral formula
/// −Σ_{j,m} P_j V_m† [∫₀^τ ds ∫₀^s dt e^{−it(h₀+δ_m−E_j)}] V_m P_j.
/// Requires the clusters of e^{−iτh₀} to be the eigenspaces of h₀.
pub fn gamma_w_double_integral(model: &InteractionModel, tau: f64, tol: f64) -> Result<ComplexMatrix> {
    let circle = ProjectorFamily::free_evolution(&model.h0, tau, tol)?;
    circle.ensure_resolved()?;
    let line = ProjectorFamily::hamiltonian(&model.h0, tol)?;
    if circle.len() != line.len() {
        return Err(Error::Precondition(
            "distinct levels of h0 share a phase e^{-i tau E}; the double-integral route needs unmerged eigenspaces"
                .into(),
        ));
    }
    let (levels, vecs) = eigh(&model.h0)?;
    let dim = model.system_dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (pj, ej) in line.projectors.iter().zip(&line.labels) {
        for (v, &delta) in model.couplings.iter().zip(&model.delta) {
            let mut inner = ComplexMatrix::zeros(dim, dim);
            for (c, &ec) in levels.iter().enumerate() {
                let col = vecs.column(c);
                let weight = double_phase_integral(tau, ec + delta - ej.re);
                inner += &ComplexMatrix::from_fn(dim, dim, |r, s| col[r] * col[s].conj() * weight);
            }
            out -= &pj.matmul(&v.adjoint()).matmul(&inner).matmul(v).matmul(pj);
        }
    }
    Ok(out)
}

/// −½ Σ_m V_m† V_m.
pub fn gamma0(model: &InteractionModel) -> ComplexMatrix {
    let dim = model.system_dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for v in &model.couplings {
        out -= &v.adjoint().matmul(v).scale_real(0.5);
    }
    out
}

/// Γ₀^# over the eigenprojectors of h₀.
pub fn gamma0_sharp(model: &InteractionModel, tol: f64) -> Result<ComplexMatrix> {
    let family = ProjectorFamily::hamiltonian(&model.h0, tol)?;
    sharp(&gamma0(model), &family)
}

/// e^{iτH₀} G_P(τ)^# / τ², the generator of the two-parameter regime.
pub fn regime_a_generator(model: &InteractionModel, tau: f64, tol: f64) -> Result<ComplexMatrix> {
    if tau == 0.0 {
        return Err(Error::Precondition("tau must be nonzero".into()));
    }
    Ok(gamma_w_schrodinger(model, tau, tol)?.scale_real(1.0 / (tau * tau)))
}

/// Second-order coefficient T_β of 𝒰_β(λ,τ) = 𝒰₀₀(0) + λ² T_β / Z + O(λ⁴),
/// assembled from the blocks of F and G. Thermal factors enter as e^{−βδ_m}
/// (zero for excited levels at zero temperature).
pub fn t_beta(model: &InteractionModel, tau: f64) -> Result<SuperOperator> {
    let fg = compute_fg(model, tau)?;
    t_beta_from(model, &fg, &model.gibbs())
}

pub(crate) fn t_beta_from(model: &InteractionModel, fg: &FGPair, gibbs: &GibbsWeights) -> Result<SuperOperator> {
    let lay = model.layout();
    let tau = fg.tau;
    let dim = model.system_dim();
    let mut out = SuperOperator::zero(dim);
    let diag_term = |g: &ComplexMatrix, h: &ComplexMatrix| -> Result<SuperOperator> {
        let free = expm_hermitian(h, -I * tau)?;
        // G† B e^{−iτH} + e^{iτH} B G
        Ok(&SuperOperator::sandwich(&g.adjoint(), &free) + &SuperOperator::sandwich(&free.adjoint(), g))
    };
    out = &out + &diag_term(&fg.g_block(lay, 0, 0), &model.h0)?;
    for m in 1..=model.n {
        let w = gibbs.relative(m);
        let f_down = fg.f_block(lay, m, 0);
        out = &out + &SuperOperator::conjugation(&f_down);
        if w != 0.0 {
            let f_up = fg.f_block(lay, 0, m);
            let h_m = &model.h0 + &ComplexMatrix::identity(dim).scale_real(model.delta[m - 1]);
            let inner = &SuperOperator::conjugation(&f_up) + &diag_term(&fg.g_block(lay, m, m), &h_m)?;
            out = &out + &inner.scale_real(w);
        }
    }
    Ok(out)
}

/// B ↦ e^{iτh₀} B e^{−iτh₀}, the uncoupled reduced Heisenberg step.
pub fn free_rotation(model: &InteractionModel, tau: f64) -> Result<SuperOperator> {
    Ok(SuperOperator::conjugation(&expm_hermitian(&model.h0, -I * tau)?))
}

/// Γʷ_β = Z^{-1} (𝒰₀₀(0)^{-1} T_β)^# over the eigenprojectors of 𝒰₀₀(0).
pub fn gamma_w_heisenberg(model: &InteractionModel, tau: f64, tol: f64) -> Result<SuperOperator> {
    let family = ProjectorFamily::rotation(&model.h0, tau, tol)?;
    family.ensure_resolved()?;
    let t = t_beta(model, tau)?;
    let undo = free_rotation(model, -tau)?;
    let avg = sharp_superop(&undo.compose(&t), &family)?;
    Ok(avg.scale_real(model.gibbs().inverse_partition()))
}

/// Thermal dissipator
/// Z^{-1} Σ_m [e^{−βδ_m}(V_m B V_m† − ½{V_mV_m†, B}) + V_m† B V_m − ½{V_m†V_m, B}].
pub fn gamma_beta(model: &InteractionModel) -> SuperOperator {
    let gibbs = model.gibbs();
    let dim = model.system_dim();
    let mut out = SuperOperator::zero(dim);
    for (m, v) in model.couplings.iter().enumerate() {
        let w = gibbs.relative(m + 1);
        if w != 0.0 {
            out = &out + &heisenberg_dissipator(v).scale_real(w);
        }
        out = &out + &heisenberg_dissipator(&v.adjoint());
    }
    out.scale_real(gibbs.inverse_partition())
}

/// B ↦ L B L† − ½{L L†, B}.
pub fn heisenberg_dissipator(l: &ComplexMatrix) -> SuperOperator {
    let id = ComplexMatrix::identity(l.rows());
    let llh = l.matmul(&l.adjoint()).scale_real(0.5);
    let jump = SuperOperator::sandwich(l, &l.adjoint());
    let anti = &SuperOperator::sandwich(&llh, &id) + &SuperOperator::sandwich(&id, &llh);
    &jump - &anti
}

/// Γ_β^# over the eigenprojectors of [h₀, ·].
pub fn gamma_beta_sharp(model: &InteractionModel, tol: f64) -> Result<SuperOperator> {
    let family = ProjectorFamily::commutator(&model.h0, tol)?;
    sharp_superop(&gamma_beta(model), &family)
}

/// −(i h₀ + ½ Σ V_m† V_m), the critical-regime Schrödinger generator.
pub fn critical_schrodinger_generator(model: &InteractionModel) -> ComplexMatrix {
    &gamma0(model) - &model.h0.scale(I)
}

/// i[h₀, ·] + Γ_β, the critical-regime Heisenberg generator.
pub fn critical_heisenberg_generator(model: &InteractionModel) -> SuperOperator {
    &SuperOperator::hamiltonian(&model.h0) + &gamma_beta(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::random::random_matrix;
    use crate::densela::{op_norm, ComplexMatrix};
    use crate::model::InverseTemperature;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-9;

    fn model(seed: u64, d: usize, n: usize) -> InteractionModel {
        InteractionModel::random(&mut ChaCha8Rng::seed_from_u64(seed), d, n)
    }

    #[test]
    fn two_routes_for_weak_generator_agree() {
        for seed in 0..5 {
            let m = model(seed, 2, 2);
            let a = gamma_w_schrodinger(&m, 1.0, TOL).unwrap();
            let b = gamma_w_double_integral(&m, 1.0, TOL).unwrap();
            assert!((&a - &b).max_abs() < 1e-10, "seed {seed}: {}", (&a - &b).max_abs());
        }
    }

    #[test]
    fn weak_generator_is_dissipative_and_block_diagonal() {
        let m = model(7, 2, 1);
        let tau = 1.0;
        let g = gamma_w_schrodinger(&m, tau, TOL).unwrap();
        for t in [0.5, 1.0, 5.0] {
            let e = crate::densela::expm(&g.scale_real(t)).unwrap();
            assert!(op_norm(&e) <= 1.0 + 1e-9);
        }
        let fam = ProjectorFamily::free_evolution(&m.h0, tau, TOL).unwrap();
        for (j, pj) in fam.projectors.iter().enumerate() {
            for (k, pk) in fam.projectors.iter().enumerate() {
                if j != k {
                    assert!(pj.matmul(&g).matmul(pk).max_abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn gamma0_examples() {
        let h0 = ComplexMatrix::from_real_diag(&[-1.0, 1.0]);
        let m = InteractionModel::new(
            h0.clone(),
            vec![1.0],
            vec![ComplexMatrix::identity(2)],
            InverseTemperature::Finite(1.0),
        )
        .unwrap();
        let g = gamma0_sharp(&m, TOL).unwrap();
        assert!((&g + &ComplexMatrix::identity(2).scale_real(0.5)).max_abs() < 1e-15);
        // lowering operator |ω⟩⟨x| in the basis (ω, x)
        let lower = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let m = InteractionModel::new(h0, vec![1.0], vec![lower], InverseTemperature::Finite(1.0)).unwrap();
        let g = gamma0_sharp(&m, TOL).unwrap();
        assert!((&g - &ComplexMatrix::from_real_diag(&[0.0, -0.5])).max_abs() < 1e-15);
    }

    #[test]
    fn regime_a_is_scaled_weak_generator() {
        let m = model(8, 1, 2);
        let tau = 0.3;
        let a = regime_a_generator(&m, tau, TOL).unwrap();
        let b = gamma_w_schrodinger(&m, tau, TOL).unwrap().scale_real(1.0 / (tau * tau));
        assert!((&a - &b).max_abs() < 1e-12);
        assert_eq!(regime_a_generator(&m.uncoupled(), tau, TOL).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn t_beta_annihilates_identity_and_is_symmetric() {
        let m = model(9, 2, 2);
        let t = t_beta(&m, 0.8).unwrap();
        assert!(t.apply(&ComplexMatrix::identity(3)).max_abs() < 1e-11);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let b = random_matrix(&mut rng, 3, 3, 1.0);
            let lhs = b.matmul(&t.apply(&b.adjoint())).trace();
            let rhs = b.adjoint().matmul(&t.apply(&b)).trace().conj();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn t_beta_is_second_order_in_tau() {
        let m = model(11, 1, 1);
        let r = t_beta(&m, 0.05).unwrap().norm() / t_beta(&m, 0.1).unwrap().norm();
        assert!(r > 0.25 / 1.5 && r < 0.25 * 1.5, "{r}");
    }

    #[test]
    fn weak_heisenberg_generator_commutes_with_rotation() {
        let m = model(12, 2, 2);
        let g = gamma_w_heisenberg(&m, 1.0, TOL).unwrap();
        let rot = free_rotation(&m, 1.0).unwrap();
        assert!(g.commutator(&rot).norm() < 1e-10);
        assert!(g.apply(&ComplexMatrix::identity(3)).max_abs() < 1e-11);
        let gd = g.dual();
        for i in 0..3 {
            for j in 0..3 {
                let mut e = ComplexMatrix::zeros(3, 3);
                e[(i, j)] = crate::densela::ONE;
                assert!(gd.apply(&e).trace().norm() < 1e-11);
            }
        }
        for t in [0.5, 1.0, 5.0] {
            let e = g.exp(t).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            for _ in 0..10 {
                let b = random_matrix(&mut rng, 3, 3, 1.0);
                assert!(op_norm(&e.apply(&b)) <= op_norm(&b) * (1.0 + 1e-8));
            }
        }
        assert_eq!(gamma_w_heisenberg(&m.uncoupled(), 1.0, TOL).unwrap().norm(), 0.0);
    }

    #[test]
    fn dissipator_properties() {
        let m = model(14, 2, 2);
        let g = gamma_beta(&m);
        assert!(g.apply(&ComplexMatrix::identity(3)).max_abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let b = random_matrix(&mut rng, 3, 3, 1.0);
        assert!((&g.apply(&b.adjoint()) - &g.apply(&b).adjoint()).max_abs() < 1e-12);
        assert_eq!(gamma_beta(&m.uncoupled()).norm(), 0.0);
    }

    #[test]
    fn zero_temperature_dissipator_keeps_emission_terms_only() {
        let mut m = model(16, 1, 2);
        m.beta = InverseTemperature::Infinite;
        let mut want = SuperOperator::zero(2);
        for v in &m.couplings {
            want = &want + &heisenberg_dissipator(&v.adjoint());
        }
        assert!((gamma_beta(&m).matrix() - want.matrix()).max_abs() < 1e-15);
    }
}
