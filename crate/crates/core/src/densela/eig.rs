use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Default absolute tolerance for merging nearly equal eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;

/// Relative Hermiticity tolerance applied to inputs of [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues with their orthogonal eigenprojectors.
///
/// Eigenvalues of Hermitian inputs are real (stored with zero imaginary part);
/// families built from unitaries carry unit-modulus eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub projectors: Vec<ComplexMatrix>,
    pub cluster_tolerance: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, |p| p.rows())
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// Σ_j E_j P_j.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for (e, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out += &p.scale(*e);
        }
        out
    }

    /// ‖Σ_j P_j − I‖_F.
    pub fn completeness_residual(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.dim(), self.dim());
        for p in &self.projectors {
            s += p;
        }
        (&s - &ComplexMatrix::identity(self.dim())).frobenius_norm()
    }

    /// max_{j,k} ‖P_j P_k − δ_jk P_j‖_F.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, pj) in self.projectors.iter().enumerate() {
            for (k, pk) in self.projectors.iter().enumerate() {
                let prod = pj.matmul(pk);
                let r = if j == k { (&prod - pj).frobenius_norm() } else { prod.frobenius_norm() };
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// Eigenvalues (ascending) and unitary eigenvector matrix (columns) of a
/// Hermitian matrix by cyclic complex Jacobi rotations.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.ensure_square()?;
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    // symmetrize so rotations act on an exactly Hermitian matrix
    let mut a: Vec<C64> = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5).into_data();
    let mut v = ComplexMatrix::identity(n).into_data();
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = (1e-13 * norm).powi(2);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if off <= target || norm == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a[p * n + q];
                let r = z.norm();
                if r == 0.0 || r < 1e-300 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ph = (z / r).conj();
                let (rpp, rpq, rqp, rqq) = (C64::new(c, 0.0), C64::new(s, 0.0), ph * (-s), ph * c);
                for k in 0..n {
                    let x = a[k * n + p];
                    let y = a[k * n + q];
                    a[k * n + p] = x * rpp + y * rqp;
                    a[k * n + q] = x * rpq + y * rqq;
                }
                for k in 0..n {
                    let x = a[p * n + k];
                    let y = a[q * n + k];
                    a[p * n + k] = rpp.conj() * x + rqp.conj() * y;
                    a[q * n + k] = rpq.conj() * x + rqq.conj() * y;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = C64::new(app - t * r, 0.0);
                a[q * n + q] = C64::new(aqq + t * r, 0.0);
                for k in 0..n {
                    let x = v[k * n + p];
                    let y = v[k * n + q];
                    v[k * n + p] = x * rpp + y * rqp;
                    v[k * n + q] = x * rpq + y * rqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    Ok((values, vecs))
}

/// Groups eigenpairs whose values lie within `tol` of each other (single
/// linkage) and returns one projector per group. Groups are ordered by their
/// first member; the group eigenvalue is the member mean.
pub fn cluster_eigenpairs(values: &[C64], vectors: &ComplexMatrix, tol: f64) -> SpectralDecomposition {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_slot[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    let dim = vectors.rows();
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&i| values[i]).sum::<C64>() / g.len() as f64;
        let p =
            ComplexMatrix::from_fn(dim, dim, |r, c| g.iter().map(|&k| vectors[(r, k)] * vectors[(c, k)].conj()).sum());
        eigenvalues.push(mean);
        projectors.push(p);
    }
    SpectralDecomposition { eigenvalues, projectors, cluster_tolerance: tol }
}

/// Spectral decomposition of a Hermitian matrix with eigenvalues closer than
/// `cluster_tol` merged into a single projector.
pub fn hermitian_eig(m: &ComplexMatrix, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if cluster_tol.is_nan() || cluster_tol < 0.0 {
        return Err(Error::Precondition("cluster tolerance must be nonnegative".into()));
    }
    let (values, vecs) = eigh(m)?;
    let vals: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
    Ok(cluster_eigenpairs(&vals, &vecs, cluster_tol))
}

/// Largest singular value, computed exactly from the Hermitian eigenproblem of
/// the smaller Gram matrix.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let a = m.scale_real(1.0 / scale);
    let gram = if a.rows() <= a.cols() { a.matmul(&a.adjoint()) } else { a.adjoint().matmul(&a) };
    let gram = ComplexMatrix::from_fn(gram.rows(), gram.cols(), |i, j| (gram[(i, j)] + gram[(j, i)].conj()) * 0.5);
    let (values, _) = eigh(&gram).expect("Gram matrix is Hermitian");
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt() * scale
}

/// Eigenvalues of a general square complex matrix: Householder reduction to
/// Hessenberg form followed by single-shift complex QR iterations.
pub fn eigenvalues_general(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.ensure_square()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(m);
    let mut out = vec![ZERO; n];
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let limit = 100 * n.max(4);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            let s = if s == 0.0 { h.max_abs() } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > limit {
            return Err(Error::NoConvergence(total));
        }
        let mu = if iter.is_multiple_of(11) {
            h[(hi, hi)] + h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            for j in k..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c.conj() * a + s.conj() * b;
                h[(k + 1, j)] = -s * a + c * b;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hi) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s;
                h[(i, k + 1)] = -a * s.conj() + b * c.conj();
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    out[0] = h[(0, 0)];
    Ok(out)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x.clone();
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // A ← (I − 2vv†) A
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * a[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= *vi * dot * 2.0;
            }
        }
        // A ← A (I − 2vv†)
        for i in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vi)| a[(i, k + 1 + t)] * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
    a
}

/// Right eigenvector for an (approximate) eigenvalue by inverse iteration.
pub fn eigenvector_for(m: &ComplexMatrix, value: C64) -> Result<Vec<C64>> {
    let n = m.ensure_square()?;
    let scale = m.max_abs().max(1.0);
    let shift = value + C64::new(1e-11, 1e-11) * scale;
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64)).collect();
    for _ in 0..4 {
        let rhs = ComplexMatrix::new(n, 1, x.clone())?;
        let y = match shifted.solve(&rhs) {
            Ok(y) => y.into_data(),
            Err(Error::Singular) => {
                for i in 0..n {
                    shifted[(i, i)] += C64::new(1e-9, 0.0) * scale;
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let nrm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::Singular);
        }
        x = y.iter().map(|z| z / nrm).collect();
    }
    Ok(x)
}
