use super::eig::eigh;
use super::matrix::{ComplexMatrix, C64};
use crate::error::Result;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring around a degree-13 Padé
/// approximant.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.ensure_square()?;
    let norm = m.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m.scale_real(0.5f64.powi(s));
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = &PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> ComplexMatrix {
        let mut t = a6.scale_real(c6);
        t += &a4.scale_real(c4);
        t += &a2.scale_real(c2);
        t += &id.scale_real(c0);
        t
    };
    let mut inner_u = a6.scale_real(b[13]);
    inner_u += &a4.scale_real(b[11]);
    inner_u += &a2.scale_real(b[9]);
    let mut u = a6.matmul(&inner_u);
    u += &lin(b[7], b[5], b[3], b[1]);
    let u = a.matmul(&u);
    let mut inner_v = a6.scale_real(b[12]);
    inner_v += &a4.scale_real(b[10]);
    inner_v += &a2.scale_real(b[8]);
    let mut v = a6.matmul(&inner_v);
    v += &lin(b[6], b[4], b[2], b[0]);
    let mut r = (&v - &u).solve(&(&v + &u))?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// exp(z·H) for Hermitian H through its eigendecomposition.
pub fn expm_hermitian(h: &ComplexMatrix, z: C64) -> Result<ComplexMatrix> {
    let (values, vecs) = eigh(h)?;
    let n = values.len();
    let phases: Vec<C64> = values.iter().map(|&e| (z * e).exp()).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| vecs[(i, k)] * phases[k] * vecs[(j, k)].conj()).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::matrix::{I, ONE};
    use crate::densela::random::{random_hermitian, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(expm(&ComplexMatrix::zeros(3, 3)).unwrap(), ComplexMatrix::identity(3));
    }

    #[test]
    fn exp_of_imaginary_diagonal() {
        let (t1, t2) = (0.7, -2.3);
        let m = ComplexMatrix::from_diag(&[I * t1, I * t2]);
        let e = expm(&m).unwrap();
        let want = ComplexMatrix::from_diag(&[(I * t1).exp(), (I * t2).exp()]);
        assert!((&e - &want).max_abs() < 1e-14);
    }

    #[test]
    fn pade_matches_eigen_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for tau in [0.1, 1.0, 7.5] {
            let h = random_hermitian(&mut rng, 5, 2.0);
            let a = expm(&h.scale(-I * tau)).unwrap();
            let b = expm_hermitian(&h, -I * tau).unwrap();
            assert!((&a - &b).max_abs() < 1e-11, "tau {tau}");
        }
    }

    #[test]
    fn exp_times_exp_neg_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_matrix(&mut rng, 6, 6, 3.0);
        let p = expm(&m).unwrap().matmul(&expm(&m.scale(-ONE)).unwrap());
        assert!((&p - &ComplexMatrix::identity(6)).max_abs() < 1e-10);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let n = ComplexMatrix::from_real(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let e = expm(&n).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[1.0, 3.0, 0.0, 1.0]);
        assert!((&e - &want).max_abs() < 1e-14);
    }
}
