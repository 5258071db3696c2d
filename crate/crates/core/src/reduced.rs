//! Exact discrete dynamics: reduced Schrödinger and Heisenberg maps on the
//! system, their duals, and a full tensor-chain oracle.

use crate::densela::{expm, kron, op_norm, unvec, vec, ComplexMatrix, C64, I};
use crate::error::{Error, Result};
use crate::model::{BlockLayout, GibbsWeights, InteractionModel};

/// Largest full-chain dimension the oracle accepts.
pub const CHAIN_DIM_LIMIT: usize = 4096;

/// Linear map on system operators, stored as a matrix acting on
/// column-stacked operators.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    matrix: ComplexMatrix,
    dim: usize,
}

impl SuperOperator {
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.ensure_square()?;
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n {
            return Err(Error::NotPerfectSquare(n));
        }
        Ok(Self { matrix, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim * dim), dim }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim * dim, dim * dim), dim }
    }

    /// B ↦ X B Y.
    pub fn sandwich(x: &ComplexMatrix, y: &ComplexMatrix) -> Self {
        Self { matrix: kron(&y.transpose(), x), dim: x.rows() }
    }

    /// B ↦ X† B X.
    pub fn conjugation(x: &ComplexMatrix) -> Self {
        Self::sandwich(&x.adjoint(), x)
    }

    /// B ↦ i[h, B].
    pub fn hamiltonian(h: &ComplexMatrix) -> Self {
        let id = ComplexMatrix::identity(h.rows());
        let left = Self::sandwich(h, &id);
        let right = Self::sandwich(&id, h);
        (&left - &right).scale(I)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Side length of the operators the map acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.dim);
        unvec(&self.matrix.mul_vec(&vec(b))).expect("square operand")
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.matmul(&other.matrix), dim: self.dim }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { matrix: self.matrix.scale(s), dim: self.dim }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale_real(s), dim: self.dim }
    }

    pub fn pow(&self, k: u64) -> Self {
        Self { matrix: self.matrix.pow(k), dim: self.dim }
    }

    /// exp(t·self).
    pub fn exp(&self, t: f64) -> Result<Self> {
        Ok(Self { matrix: expm(&self.matrix.scale_real(t))?, dim: self.dim })
    }

    /// Adjoint with respect to ⟨A|B⟩ = tr(A†B); maps observables to states.
    pub fn dual(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), dim: self.dim }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.commutator(&other.matrix), dim: self.dim }
    }

    /// Operator norm of the representing matrix.
    pub fn norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    /// ‖Φ(I) − I‖.
    pub fn unital_residual(&self) -> f64 {
        let id = ComplexMatrix::identity(self.dim);
        op_norm(&(&self.apply(&id) - &id))
    }

    /// max over matrix units E_ij of |tr Φ(E_ij) − tr E_ij|.
    pub fn trace_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut e = ComplexMatrix::zeros(self.dim, self.dim);
                e[(i, j)] = C64::new(1.0, 0.0);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.apply(&e).trace() - want).norm());
            }
        }
        worst
    }
}

impl std::ops::Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator { matrix: &self.matrix + &rhs.matrix, dim: self.dim }
    }
}

impl std::ops::Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator { matrix: &self.matrix - &rhs.matrix, dim: self.dim }
    }
}

/// Dual map with respect to the Hilbert–Schmidt pairing.
pub fn dual(map: &SuperOperator) -> SuperOperator {
    map.dual()
}

/// The (n+1)² system-space blocks U_{m,m'} of a one-site operator.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub layout: BlockLayout,
    blocks: Vec<ComplexMatrix>,
}

impl BlockDecomposition {
    pub fn new(op: &ComplexMatrix, layout: BlockLayout) -> Result<Self> {
        if op.rows() != layout.total_dim() || op.cols() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "one-site operator must be {0}x{0}, got {1}x{2}",
                layout.total_dim(),
                op.rows(),
                op.cols()
            )));
        }
        let q = layout.site_dim;
        let blocks = (0..q * q).map(|k| layout.block(op, k / q, k % q)).collect();
        Ok(Self { layout, blocks })
    }

    pub fn get(&self, m: usize, mp: usize) -> &ComplexMatrix {
        &self.blocks[m * self.layout.site_dim + mp]
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        let q = self.layout.site_dim;
        let mut out = ComplexMatrix::zeros(self.layout.total_dim(), self.layout.total_dim());
        for m in 0..q {
            for mp in 0..q {
                self.layout.place(&mut out, m, mp, self.get(m, mp));
            }
        }
        out
    }
}

/// A = U_{0,0}, the reduced one-step Schrödinger evolution.
pub fn schrodinger_block(u: &ComplexMatrix, layout: BlockLayout) -> Result<ComplexMatrix> {
    Ok(BlockDecomposition::new(u, layout)?.get(0, 0).clone())
}

/// B ↦ Σ_{l,m} p_m U_{l,m}† B U_{l,m}, the reduced one-step Heisenberg map.
pub fn heisenberg_map(u: &ComplexMatrix, weights: &GibbsWeights, layout: BlockLayout) -> Result<SuperOperator> {
    if weights.p.len() != layout.site_dim {
        return Err(Error::Dimension(format!("{} weights for {} site levels", weights.p.len(), layout.site_dim)));
    }
    let blocks = BlockDecomposition::new(u, layout)?;
    let mut out = SuperOperator::zero(layout.system_dim);
    for m in 0..layout.site_dim {
        if weights.p[m] == 0.0 {
            continue;
        }
        for l in 0..layout.site_dim {
            let term = SuperOperator::conjugation(blocks.get(l, m)).scale_real(weights.p[m]);
            out = &out + &term;
        }
    }
    Ok(out)
}

/// Dimension of the system plus k chain sites.
pub fn chain_dim(model: &InteractionModel, k: usize) -> Option<usize> {
    let mut dim = model.system_dim();
    for _ in 0..k {
        dim = dim.checked_mul(model.site_dim())?;
    }
    Some(dim)
}

/// Propagator of one interaction step on system ⊗ site (system-major), by
/// Padé exponentiation of h₀ ⊗ I + I ⊗ diag(0, δ) + λ Σ_m (V_m† ⊗ |0⟩⟨m| + V_m ⊗ |m⟩⟨0|).
fn local_gate(model: &InteractionModel, lambda: f64, tau: f64) -> Result<ComplexMatrix> {
    let q = model.site_dim();
    let id = |n: usize| ComplexMatrix::identity(n);
    let energies: Vec<f64> = std::iter::once(0.0).chain(model.delta.iter().copied()).collect();
    let mut h = &kron(&model.h0, &id(q)) + &kron(&id(model.system_dim()), &ComplexMatrix::from_real_diag(&energies));
    for (m, v) in model.couplings.iter().enumerate() {
        let mut lower = ComplexMatrix::zeros(q, q);
        lower[(0, m + 1)] = C64::new(1.0, 0.0);
        let term = &kron(&v.adjoint(), &lower) + &kron(v, &lower.adjoint());
        h += &term.scale_real(lambda);
    }
    expm(&h.scale(-I * tau))
}

/// U(k,0) = U_k⋯U₁ on system ⊗ site₁ ⊗ … ⊗ site_k. Step j evolves the
/// system and site j with the coupled Hamiltonian while every other site
/// only picks up its free phase; both factors commute, so each step is the
/// local gate on (system, site j) times a diagonal phase.
pub fn full_chain_unitary(model: &InteractionModel, lambda: f64, tau: f64, k: usize) -> Result<ComplexMatrix> {
    let dim = chain_dim(model, k)
        .filter(|&d| d <= CHAIN_DIM_LIMIT)
        .ok_or(Error::ChainTooLarge { dim: chain_dim(model, k).unwrap_or(usize::MAX), limit: CHAIN_DIM_LIMIT })?;
    let s = model.system_dim();
    let q = model.site_dim();
    let chain = dim / s;
    let gate = local_gate(model, lambda, tau)?;
    let energies: Vec<f64> = std::iter::once(0.0).chain(model.delta.iter().copied()).collect();
    // site l occupies digit l of the chain index, most significant first
    let digit = |c: usize, l: usize| (c / q.pow((k - l - 1) as u32)) % q;

    let mut u = ComplexMatrix::identity(dim);
    let mut buf = vec![C64::new(0.0, 0.0); s * q];
    for j in 0..k {
        let stride = q.pow((k - j - 1) as u32);
        let mut next = ComplexMatrix::zeros(dim, dim);
        for c in 0..chain {
            if digit(c, j) != 0 {
                continue;
            }
            let idle: f64 = (0..k).filter(|&l| l != j).map(|l| energies[digit(c, l)]).sum();
            let phase = (-I * (tau * idle)).exp();
            let rows: Vec<usize> = (0..s).flat_map(|a| (0..q).map(move |m| a * chain + c + m * stride)).collect();
            for col in 0..dim {
                for (slot, &r) in buf.iter_mut().zip(&rows) {
                    *slot = u[(r, col)];
                }
                for (out_idx, &r) in rows.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (g, x) in gate.row(out_idx).iter().zip(&buf) {
                        acc += g * x;
                    }
                    next[(r, col)] = acc * phase;
                }
            }
        }
        u = next;
    }
    Ok(u)
}

/// P U(k,0) P on the system, computed on the full chain.
pub fn full_chain_schrodinger(model: &InteractionModel, lambda: f64, tau: f64, k: usize) -> Result<ComplexMatrix> {
    let u = full_chain_unitary(model, lambda, tau, k)?;
    let s = model.system_dim();
    let chain = u.rows() / s;
    Ok(ComplexMatrix::from_fn(s, s, |i, j| u[(i * chain, j * chain)]))
}

/// Thermal partial trace of U(k,0)† (B ⊗ I) U(k,0) over the k chain sites:
/// Σ_c w_c ⟨U(i,c)| B ⊗ I |U(j,c)⟩ with w_c the product of site weights.
pub fn full_chain_oracle(
    model: &InteractionModel,
    lambda: f64,
    tau: f64,
    k: usize,
    b: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let s = model.system_dim();
    if b.rows() != s || b.cols() != s {
        return Err(Error::Dimension(format!("observable must be {s}x{s}")));
    }
    let u = full_chain_unitary(model, lambda, tau, k)?;
    let chain = u.rows() / s;
    let p = model.gibbs().p;
    let q = model.site_dim();
    let mut out = ComplexMatrix::zeros(s, s);
    for c in 0..chain {
        let mut w = 1.0;
        let mut idx = c;
        for _ in 0..k {
            w *= p[idx % q];
            idx /= q;
        }
        if w == 0.0 {
            continue;
        }
        // columns U|j, c⟩ and (B ⊗ I) U|j, c⟩
        let cols: Vec<Vec<C64>> = (0..s).map(|j| u.column(j * chain + c)).collect();
        let lifted: Vec<Vec<C64>> = cols
            .iter()
            .map(|v| {
                let mut y = vec![C64::new(0.0, 0.0); v.len()];
                for a in 0..s {
                    for bb in 0..s {
                        let coef = b[(a, bb)];
                        if coef == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for r in 0..chain {
                            y[a * chain + r] += coef * v[bb * chain + r];
                        }
                    }
                }
                y
            })
            .collect();
        for i in 0..s {
            for j in 0..s {
                let dot: C64 = cols[i].iter().zip(&lifted[j]).map(|(x, y)| x.conj() * y).sum();
                out[(i, j)] += dot * w;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::random::{random_density, random_matrix};
    use crate::densela::{eigh, expm_hermitian};
    use crate::model::one_step_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn sandwich_matches_vec_identity() {
        let mut r = rng(1);
        let (a, x, b) =
            (random_matrix(&mut r, 2, 2, 1.0), random_matrix(&mut r, 2, 2, 1.0), random_matrix(&mut r, 2, 2, 1.0));
        let lhs = a.matmul(&x).matmul(&b);
        let rhs = SuperOperator::sandwich(&a, &b).apply(&x);
        assert!((&lhs - &rhs).max_abs() < 1e-13);
        let v = vec(&lhs);
        let w = kron(&b.transpose(), &a).mul_vec(&vec(&x));
        assert!(v.iter().zip(&w).all(|(p, q)| (p - q).norm() < 1e-13));
    }

    #[test]
    fn uncoupled_heisenberg_map_is_rotation() {
        let mut r = rng(2);
        let m = InteractionModel::random(&mut r, 2, 1);
        let tau = 0.9;
        let u = one_step_unitary(&m, 0.0, tau).unwrap();
        let map = heisenberg_map(&u, &m.gibbs(), m.layout()).unwrap();
        let rot = expm_hermitian(&m.h0, -I * tau).unwrap();
        let want = SuperOperator::conjugation(&rot);
        assert!((map.matrix() - want.matrix()).max_abs() < 1e-12);
        let a = schrodinger_block(&u, m.layout()).unwrap();
        assert!((&a - &rot).max_abs() < 1e-12);
    }

    #[test]
    fn heisenberg_map_is_unital_hermitian_preserving_and_contractive() {
        let mut r = rng(3);
        for _ in 0..5 {
            let m = InteractionModel::random(&mut r, 2, 2);
            let u = one_step_unitary(&m, 0.8, 1.1).unwrap();
            let map = heisenberg_map(&u, &m.gibbs(), m.layout()).unwrap();
            assert!(map.unital_residual() < 1e-10);
            for _ in 0..5 {
                let b = random_matrix(&mut r, 3, 3, 1.0);
                let lhs = map.apply(&b.adjoint());
                let rhs = map.apply(&b).adjoint();
                assert!((&lhs - &rhs).max_abs() < 1e-12);
                assert!(op_norm(&map.apply(&b)) <= op_norm(&b) * (1.0 + 1e-12));
                let rho = random_density(&mut r, 3);
                let (ev, _) = eigh(&map.apply(&rho)).unwrap();
                assert!(ev[0] >= -1e-10);
            }
            assert!(map.dual().trace_residual() < 1e-10);
        }
    }

    #[test]
    fn block_decomposition_round_trip() {
        let mut r = rng(4);
        let m = InteractionModel::random(&mut r, 1, 2);
        let u = one_step_unitary(&m, 0.5, 0.7).unwrap();
        let blocks = BlockDecomposition::new(&u, m.layout()).unwrap();
        assert!((&blocks.reassemble() - &u).max_abs() < 1e-13);
        assert!(op_norm(blocks.get(0, 0)) <= 1.0 + 1e-12);
    }

    #[test]
    fn oracle_single_step_matches_block_formula() {
        let mut r = rng(5);
        let m = InteractionModel::random(&mut r, 1, 1);
        let (lam, tau) = (0.7, 0.9);
        let u = one_step_unitary(&m, lam, tau).unwrap();
        let map = heisenberg_map(&u, &m.gibbs(), m.layout()).unwrap();
        let b = random_matrix(&mut r, 2, 2, 1.0);
        let oracle = full_chain_oracle(&m, lam, tau, 1, &b).unwrap();
        assert!((&oracle - &map.apply(&b)).max_abs() < 1e-12);
    }

    #[test]
    fn oracle_unital_and_free() {
        let mut r = rng(6);
        let m = InteractionModel::random(&mut r, 1, 2);
        let id = ComplexMatrix::identity(2);
        assert!((&full_chain_oracle(&m, 0.6, 0.5, 3, &id).unwrap() - &id).max_abs() < 1e-12);
        let b = random_matrix(&mut r, 2, 2, 1.0);
        let k = 3;
        let tau = 0.4;
        let free = full_chain_oracle(&m, 0.0, tau, k, &b).unwrap();
        let rot = expm_hermitian(&m.h0, -I * (k as f64 * tau)).unwrap();
        let want = rot.adjoint().matmul(&b).matmul(&rot);
        assert!((&free - &want).max_abs() < 1e-12);
    }

    #[test]
    fn oracle_guard() {
        let mut r = rng(7);
        let m = InteractionModel::random(&mut r, 1, 3);
        let err = full_chain_schrodinger(&m, 1.0, 1.0, 6).unwrap_err();
        assert!(matches!(err, Error::ChainTooLarge { dim: 8192, .. }));
    }

    #[test]
    fn dual_of_unitary_conjugation() {
        let mut r = rng(8);
        let h = crate::densela::random::random_hermitian(&mut r, 3, 1.0);
        let u = expm_hermitian(&h, -I).unwrap();
        let phi = SuperOperator::sandwich(&u, &u.adjoint());
        let dual_want = SuperOperator::sandwich(&u.adjoint(), &u);
        assert!((phi.dual().matrix() - dual_want.matrix()).max_abs() < 1e-13);
        assert_eq!(SuperOperator::identity(3).dual(), SuperOperator::identity(3));
    }
}
