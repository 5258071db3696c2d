use super::oscillatory::{ordered_phase_integral, phase_integral};
use crate::densela::{eigh, expm, op_norm, ComplexMatrix, C64, I};
use crate::error::Result;
use crate::model::{build_one_site, BlockLayout, InteractionModel};

/// First- and second-order coefficients of e^{−iτ(H₀+λW)} in λ on the
/// one-site space.
#[derive(Clone, Debug)]
pub struct FGPair {
    pub f: ComplexMatrix,
    pub g: ComplexMatrix,
    pub tau: f64,
}

impl FGPair {
    pub fn f_block(&self, layout: BlockLayout, m: usize, mp: usize) -> ComplexMatrix {
        layout.block(&self.f, m, mp)
    }

    pub fn g_block(&self, layout: BlockLayout, m: usize, mp: usize) -> ComplexMatrix {
        layout.block(&self.g, m, mp)
    }
}

/// F(τ) and G(τ) from closed-form oscillatory integrals in the eigenbasis of
/// the uncoupled one-site Hamiltonian.
pub fn compute_fg(model: &InteractionModel, tau: f64) -> Result<FGPair> {
    let ops = build_one_site(model);
    let (eps, s) = eigh(&ops.h_free)?;
    let dim = eps.len();
    let wt = s.adjoint().matmul(&ops.interaction).matmul(&s);
    let phase: Vec<C64> = eps.iter().map(|&e| (-I * (tau * e)).exp()).collect();

    let f = ComplexMatrix::from_fn(dim, dim, |p, q| {
        if wt[(p, q)] == C64::new(0.0, 0.0) {
            return C64::new(0.0, 0.0);
        }
        -I * phase[p] * wt[(p, q)] * phase_integral(tau, eps[p] - eps[q])
    });
    let g = ComplexMatrix::from_fn(dim, dim, |p, q| {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..dim {
            let c = wt[(p, r)] * wt[(r, q)];
            if c != C64::new(0.0, 0.0) {
                acc += c * ordered_phase_integral(tau, eps[p] - eps[r], eps[r] - eps[q]);
            }
        }
        -phase[p] * acc
    });
    let back = |m: &ComplexMatrix| s.matmul(m).matmul(&s.adjoint());
    Ok(FGPair { f: back(&f), g: back(&g), tau })
}

/// Remainders of the second-order expansion of the one-site propagator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionResiduals {
    /// ‖e^{−iτH(λ)} − e^{−iτH₀} − λF − λ²G‖.
    pub full: f64,
    /// The same remainder compressed to the ground block.
    pub compressed: f64,
}

pub fn verify_expansion(model: &InteractionModel, lambda: f64, tau: f64) -> Result<ExpansionResiduals> {
    let ops = build_one_site(model);
    let fg = compute_fg(model, tau)?;
    let exact = expm(&ops.hamiltonian(lambda).scale(-I * tau))?;
    let free = expm(&ops.h_free.scale(-I * tau))?;
    let mut r = &exact - &free;
    r -= &fg.f.scale_real(lambda);
    r -= &fg.g.scale_real(lambda * lambda);
    let compressed = op_norm(&ops.layout.block(&r, 0, 0));
    Ok(ExpansionResiduals { full: op_norm(&r), compressed })
}
