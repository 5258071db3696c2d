//! Critical-regime Lindblad generator, its semigroup and complete-positivity
//! certificates.

use crate::densela::{eigh, kron, ComplexMatrix, ONE};
use crate::error::Result;
use crate::model::{InteractionModel, InverseTemperature};
use crate::perturb::heisenberg_dissipator;
use crate::reduced::SuperOperator;

/// i[h₀, ·] plus a dissipator Σ_j (L_j B L_j† − ½{L_j L_j†, B}), in the
/// Heisenberg picture.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    pub hamiltonian_part: SuperOperator,
    pub dissipator: SuperOperator,
    pub jumps: Vec<ComplexMatrix>,
}

impl LindbladGenerator {
    pub fn from_parts(h: &ComplexMatrix, jumps: Vec<ComplexMatrix>) -> Self {
        let dim = h.rows();
        let dissipator = jumps.iter().fold(SuperOperator::zero(dim), |acc, l| &acc + &heisenberg_dissipator(l));
        Self { hamiltonian_part: SuperOperator::hamiltonian(h), dissipator, jumps }
    }

    pub fn generator(&self) -> SuperOperator {
        &self.hamiltonian_part + &self.dissipator
    }
}

/// Jump operators √p_j V_j (absorption, weighted by the excited-level
/// population) followed by √p₀ V_j† (emission), j = 1…n.
pub fn build_lindblad(model: &InteractionModel) -> LindbladGenerator {
    let gibbs = model.gibbs();
    let mut jumps: Vec<ComplexMatrix> =
        model.couplings.iter().enumerate().map(|(j, v)| v.scale_real(gibbs.p[j + 1].sqrt())).collect();
    jumps.extend(model.couplings.iter().map(|v| v.adjoint().scale_real(gibbs.p[0].sqrt())));
    LindbladGenerator::from_parts(&model.h0, jumps)
}

/// e^{t L}.
pub fn semigroup(gen: &LindbladGenerator, t: f64) -> Result<SuperOperator> {
    gen.generator().exp(t)
}

/// Σ_ij E_ij ⊗ Φ(E_ij).
pub fn choi(map: &SuperOperator) -> ComplexMatrix {
    let d = map.dim();
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, j)] = ONE;
            out += &kron(&e, &map.apply(&e));
        }
    }
    out
}

/// Smallest eigenvalue of the (Hermitian part of the) Choi matrix.
pub fn choi_min_eigenvalue(map: &SuperOperator) -> Result<f64> {
    let c = choi(map);
    let herm = ComplexMatrix::from_fn(c.rows(), c.cols(), |i, j| (c[(i, j)] + c[(j, i)].conj()) * 0.5);
    Ok(eigh(&herm)?.0[0])
}

/// A zero-temperature repeated-interaction model whose critical-regime
/// generator is i[h, ·] + Σ_j (L_j B L_j† − ½{L_j L_j†, B}): one site level
/// per jump with coupling V_j = L_j†.
pub fn synthesize_model(h: &ComplexMatrix, jumps: &[ComplexMatrix]) -> Result<InteractionModel> {
    InteractionModel::new(
        h.clone(),
        vec![1.0; jumps.len()],
        jumps.iter().map(ComplexMatrix::adjoint).collect(),
        InverseTemperature::Infinite,
    )
}
