//! Spectral averaging K ↦ Σ_j P_j K P_j over a complete orthogonal family.

use crate::densela::{cluster_eigenpairs, eigh, kron, ComplexMatrix, SpectralDecomposition, C64, I};
use crate::error::{Error, Result};
use crate::reduced::SuperOperator;

const FAMILY_TOL: f64 = 1e-10;

/// Distinct cluster labels closer than this multiple of the clustering
/// tolerance are reported as unresolved.
const RESOLUTION_FACTOR: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    pub projectors: Vec<ComplexMatrix>,
    pub labels: Vec<C64>,
    pub cluster_tolerance: f64,
}

impl ProjectorFamily {
    /// Validates completeness and mutual orthogonality.
    pub fn new(projectors: Vec<ComplexMatrix>, labels: Vec<C64>, cluster_tolerance: f64) -> Result<Self> {
        let fam = Self { projectors, labels, cluster_tolerance };
        let s = fam.as_spectral();
        let residual = s.completeness_residual().max(s.orthogonality_residual());
        if residual > FAMILY_TOL {
            return Err(Error::IncompleteFamily { residual });
        }
        Ok(fam)
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            projectors: vec![ComplexMatrix::identity(dim)],
            labels: vec![C64::new(1.0, 0.0)],
            cluster_tolerance: 0.0,
        }
    }

    fn from_spectral(s: SpectralDecomposition) -> Self {
        Self { projectors: s.projectors, labels: s.eigenvalues, cluster_tolerance: s.cluster_tolerance }
    }

    fn as_spectral(&self) -> SpectralDecomposition {
        SpectralDecomposition {
            eigenvalues: self.labels.clone(),
            projectors: self.projectors.clone(),
            cluster_tolerance: self.cluster_tolerance,
        }
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, |p| p.rows())
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// Eigenprojectors of h (clustered on the real line).
    pub fn hamiltonian(h: &ComplexMatrix, tol: f64) -> Result<Self> {
        let (e, v) = eigh(h)?;
        let labels: Vec<C64> = e.iter().map(|&x| C64::new(x, 0.0)).collect();
        Ok(Self::from_spectral(cluster_eigenpairs(&labels, &v, tol)))
    }

    /// Eigenprojectors of e^{−iτh}, clustered on the unit circle.
    pub fn free_evolution(h: &ComplexMatrix, tau: f64, tol: f64) -> Result<Self> {
        let (e, v) = eigh(h)?;
        let labels: Vec<C64> = e.iter().map(|&x| (-I * (tau * x)).exp()).collect();
        Ok(Self::from_spectral(cluster_eigenpairs(&labels, &v, tol)))
    }

    /// Eigenprojectors of the observable rotation B ↦ e^{iτh} B e^{−iτh} on
    /// column-stacked operators, clustered by e^{iτ(E_a − E_b)}.
    pub fn rotation(h: &ComplexMatrix, tau: f64, tol: f64) -> Result<Self> {
        Self::operator_pairs(h, tol, |ea, eb| (I * (tau * (ea - eb))).exp())
    }

    /// Eigenprojectors of B ↦ [h, B] on column-stacked operators, clustered by
    /// the Bohr frequency E_a − E_b.
    pub fn commutator(h: &ComplexMatrix, tol: f64) -> Result<Self> {
        Self::operator_pairs(h, tol, |ea, eb| C64::new(ea - eb, 0.0))
    }

    fn operator_pairs(h: &ComplexMatrix, tol: f64, label: impl Fn(f64, f64) -> C64) -> Result<Self> {
        let (e, v) = eigh(h)?;
        let d = e.len();
        // vec(|a⟩⟨b|) = conj(b) ⊗ a
        let mut labels = Vec::with_capacity(d * d);
        let mut vecs = ComplexMatrix::zeros(d * d, d * d);
        for b in 0..d {
            let vb = ComplexMatrix::new(d, 1, v.column(b)).expect("column").conj();
            for a in 0..d {
                let va = ComplexMatrix::new(d, 1, v.column(a)).expect("column");
                let col = kron(&vb, &va);
                let idx = b * d + a;
                for r in 0..d * d {
                    vecs[(r, idx)] = col[(r, 0)];
                }
                labels.push(label(e[a], e[b]));
            }
        }
        Ok(Self::from_spectral(cluster_eigenpairs(&labels, &vecs, tol)))
    }

    /// Smallest distance between labels of distinct clusters.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (j, a) in self.labels.iter().enumerate() {
            for b in &self.labels[j + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// Fails when two distinct clusters are too close to be told apart at the
    /// clustering tolerance.
    pub fn ensure_resolved(&self) -> Result<()> {
        let sep = self.min_separation();
        let floor = RESOLUTION_FACTOR * self.cluster_tolerance.max(1e-15);
        if sep < floor {
            return Err(Error::UnresolvedClusters { separation: sep, tolerance: self.cluster_tolerance });
        }
        Ok(())
    }

    fn check_complete(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::Dimension(format!("family acts on dimension {}, operand has {dim}", self.dim())));
        }
        let residual = self.as_spectral().completeness_residual();
        if residual > FAMILY_TOL {
            return Err(Error::IncompleteFamily { residual });
        }
        Ok(())
    }
}

/// K^# = Σ_j P_j K P_j.
pub fn sharp(k: &ComplexMatrix, family: &ProjectorFamily) -> Result<ComplexMatrix> {
    let n = k.ensure_square()?;
    family.check_complete(n)?;
    let mut out = ComplexMatrix::zeros(n, n);
    for p in &family.projectors {
        out += &p.matmul(k).matmul(p);
    }
    Ok(out)
}

/// Averaging of a superoperator over a family of projectors acting on
/// column-stacked operators.
pub fn sharp_superop(k: &SuperOperator, family: &ProjectorFamily) -> Result<SuperOperator> {
    SuperOperator::from_matrix(sharp(k.matrix(), family)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AverageKernel {
    /// (1/T) ∫₀ᵀ f(s) ds.
    Cesaro,
    /// ∫₀ᵀ w(s) f(s) ds with the tent w(s) = (2/T)(1 − |2s/T − 1|): a
    /// length-T/2 Cesàro window convolved with itself. Off-diagonal terms
    /// decay like 1/(ωT)² instead of 1/(ωT).
    Fejer,
}

/// Time average of s ↦ e^{ish} K e^{−ish} over [0, T] by the composite
/// trapezoid rule with `steps` panels (rounded up to even so the tent's apex
/// is a node), evaluated entrywise in the eigenbasis
/// of h.
pub fn time_average(
    k: &ComplexMatrix,
    h: &ComplexMatrix,
    horizon: f64,
    kernel: AverageKernel,
    steps: usize,
) -> Result<ComplexMatrix> {
    let n = k.ensure_square()?;
    if h.rows() != n || h.cols() != n {
        return Err(Error::Dimension(format!("h must be {n}x{n}")));
    }
    if horizon.is_nan() || horizon <= 0.0 || steps == 0 {
        return Err(Error::Precondition("time average needs a positive horizon and at least one panel".into()));
    }
    let steps = steps + steps % 2;
    let (e, v) = eigh(h)?;
    let kt = v.adjoint().matmul(k).matmul(&v);
    let dt = horizon / steps as f64;
    let weight = |s: f64| match kernel {
        AverageKernel::Cesaro => 1.0 / horizon,
        AverageKernel::Fejer => 2.0 * (1.0 - (2.0 * s / horizon - 1.0).abs()) / horizon,
    };
    let avg = ComplexMatrix::from_fn(n, n, |a, b| {
        let omega = e[a] - e[b];
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..=steps {
            let s = j as f64 * dt;
            let end = if j == 0 || j == steps { 0.5 } else { 1.0 };
            acc += (I * (omega * s)).exp() * (end * weight(s));
        }
        kt[(a, b)] * acc * dt
    });
    Ok(v.matmul(&avg).matmul(&v.adjoint()))
}

/// The operator J = Σ α_jk P_j R P_k with α_jk = (E_j − E_k)/(e^{−iE_j} − e^{−iE_k})
/// for j ≠ k and α_jj = i e^{iE_j}, where h = Σ E_j P_j has distinct e^{−iE_j}.
/// It satisfies R + i e^{−ih} ∫₀¹ e^{ish} J e^{−ish} ds = 0.
#[allow(dead_code)]
pub(crate) fn j_operator(decomp: &SpectralDecomposition, r: &ComplexMatrix) -> ComplexMatrix {
    let n = r.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, pj) in decomp.projectors.iter().enumerate() {
        let ej = decomp.eigenvalues[j].re;
        for (k, pk) in decomp.projectors.iter().enumerate() {
            let ek = decomp.eigenvalues[k].re;
            let alpha =
                if j == k { I * (I * ej).exp() } else { C64::new(ej - ek, 0.0) / ((-I * ej).exp() - (-I * ek).exp()) };
            out += &pj.matmul(r).matmul(pk).scale(alpha);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::random::{random_hermitian, random_matrix};
    use crate::densela::{expm_hermitian, hermitian_eig};
    use crate::perturb::quadrature::QuadratureRule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_family_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_matrix(&mut rng, 3, 3, 1.0);
        assert_eq!(sharp(&k, &ProjectorFamily::trivial(3)).unwrap(), k);
    }

    #[test]
    fn rank_one_family_keeps_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = random_matrix(&mut rng, 3, 3, 1.0);
        let fam = ProjectorFamily::hamiltonian(&ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0]), 1e-9).unwrap();
        let got = sharp(&k, &fam).unwrap();
        let want = ComplexMatrix::from_fn(3, 3, |i, j| if i == j { k[(i, j)] } else { C64::new(0.0, 0.0) });
        assert!((&got - &want).max_abs() < 1e-15);
    }

    #[test]
    fn incomplete_family_rejected() {
        let p = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(
            ProjectorFamily::new(vec![p], vec![C64::new(1.0, 0.0)], 0.0),
            Err(Error::IncompleteFamily { .. })
        ));
    }

    #[test]
    fn rotation_family_diagonalizes_the_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 3, 1.0);
        let tau = 0.7;
        let fam = ProjectorFamily::rotation(&h, tau, 1e-9).unwrap();
        let u = expm_hermitian(&h, -I * tau).unwrap();
        let rot = SuperOperator::conjugation(&u);
        let recon =
            fam.projectors.iter().zip(&fam.labels).fold(ComplexMatrix::zeros(9, 9), |acc, (p, l)| &acc + &p.scale(*l));
        assert!((&recon - rot.matrix()).max_abs() < 1e-12);
        // the identity direction carries label 1 with multiplicity d
        let ones =
            fam.labels.iter().zip(&fam.projectors).find(|(l, _)| (**l - C64::new(1.0, 0.0)).norm() < 1e-9).unwrap();
        assert!((ones.1.trace().re - 3.0).abs() < 1e-10);
    }

    #[test]
    fn unresolved_clusters_reported() {
        let h = ComplexMatrix::from_real_diag(&[0.0, 1e-8]);
        let fam = ProjectorFamily::hamiltonian(&h, 1e-9).unwrap();
        assert!(matches!(fam.ensure_resolved(), Err(Error::UnresolvedClusters { .. })));
        let fam = ProjectorFamily::hamiltonian(&h, 1e-7).unwrap();
        assert_eq!(fam.len(), 1);
    }

    #[test]
    fn time_average_recovers_sharp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 3, 1.0);
        let k = random_matrix(&mut rng, 3, 3, 1.0);
        let fam = ProjectorFamily::hamiltonian(&h, 1e-9).unwrap();
        let target = sharp(&k, &fam).unwrap();
        let (e, _) = eigh(&h).unwrap();
        let gap = e.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let spread = e[2] - e[0];
        let horizon = 1e4 / gap;
        let steps = (40.0 * spread * horizon) as usize;
        let fejer = time_average(&k, &h, horizon, AverageKernel::Fejer, steps).unwrap();
        assert!((&fejer - &target).max_abs() <= 1e-6, "{} gap {gap} spread {spread}", (&fejer - &target).max_abs());
        // the plain mean converges only like 1/(gap T)
        let cesaro = time_average(&k, &h, horizon, AverageKernel::Cesaro, steps).unwrap();
        let err = (&cesaro - &target).max_abs();
        assert!(err < 1e-3 && err > 1e-7, "{err}");
    }

    #[test]
    fn j_operator_cancels_remainder() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 3, 1.0);
        let decomp = hermitian_eig(&h, 1e-9).unwrap();
        let r = random_matrix(&mut rng, 3, 3, 1.0);
        let j = j_operator(&decomp, &r);
        let mut avg = ComplexMatrix::zeros(3, 3);
        for (s, w) in (QuadratureRule { panels: 40, order: 8 }).nodes(0.0, 1.0) {
            let e = expm_hermitian(&h, I * s).unwrap();
            avg += &e.matmul(&j).matmul(&e.adjoint()).scale_real(w);
        }
        let total = &r + &expm_hermitian(&h, -I).unwrap().matmul(&avg).scale(I);
        assert!(total.max_abs() < 1e-12, "{}", total.max_abs());
    }
}
