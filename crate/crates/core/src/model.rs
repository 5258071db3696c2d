//! The repeated-interaction model: system Hamiltonian, chain-site level
//! energies, couplings, the one-site operators and the thermal weights.
//!
//! One-site basis: index `m·(d+1) + i` for system level `i` and site level
//! `m`, so the block with the site in its ground level comes first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::densela::{expm_hermitian, kron, random, ComplexMatrix, C64, I};
use crate::error::{Error, Result};

/// Inverse temperature of the chain; zero temperature is a flag rather than a
/// large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InverseTemperature {
    Finite(f64),
    Infinite,
}

impl InverseTemperature {
    pub fn is_infinite(self) -> bool {
        matches!(self, InverseTemperature::Infinite)
    }

    pub fn to_json(self) -> Value {
        match self {
            InverseTemperature::Finite(b) => json!(b),
            InverseTemperature::Infinite => json!("inf"),
        }
    }
}

impl std::fmt::Display for InverseTemperature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InverseTemperature::Finite(b) => write!(f, "{b}"),
            InverseTemperature::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InteractionModel {
    /// Number of excited system levels; the system space is ℂ^{d+1}.
    pub d: usize,
    /// Number of excited site levels; each site space is ℂ^{n+1}.
    pub n: usize,
    pub h0: ComplexMatrix,
    /// Site level energies δ₁…δ_n (the ground level sits at 0).
    pub delta: Vec<f64>,
    /// Coupling operators V₁…V_n on the system.
    pub couplings: Vec<ComplexMatrix>,
    pub beta: InverseTemperature,
}

impl InteractionModel {
    pub fn new(
        h0: ComplexMatrix,
        delta: Vec<f64>,
        couplings: Vec<ComplexMatrix>,
        beta: InverseTemperature,
    ) -> Result<Self> {
        if !h0.is_square() || h0.rows() < 2 {
            return Err(Error::field(
                "h0",
                format!("must be square with at least 2 levels, got {}x{}", h0.rows(), h0.cols()),
            ));
        }
        let d = h0.rows() - 1;
        let dev = h0.hermitian_deviation();
        if dev > 1e-12 {
            return Err(Error::field("h0", format!("not Hermitian (relative deviation {dev:.3e})")));
        }
        if h0.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::field("h0", "entries must be finite"));
        }
        let n = delta.len();
        if n == 0 {
            return Err(Error::field("delta", "at least one excited site level is required"));
        }
        if delta.iter().any(|x| !x.is_finite()) {
            return Err(Error::field("delta", "energies must be finite"));
        }
        if couplings.len() != n {
            return Err(Error::field("V", format!("expected {n} coupling operators, got {}", couplings.len())));
        }
        for (j, v) in couplings.iter().enumerate() {
            if v.rows() != d + 1 || v.cols() != d + 1 {
                return Err(Error::field(
                    format!("V[{j}]"),
                    format!("must be {0}x{0}, got {1}x{2}", d + 1, v.rows(), v.cols()),
                ));
            }
            if v.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::field(format!("V[{j}]"), "entries must be finite"));
            }
        }
        if let InverseTemperature::Finite(b) = beta {
            if b.is_nan() || b < 0.0 || !b.is_finite() {
                return Err(Error::field("beta", "must be a nonnegative real or \"inf\""));
            }
        }
        Ok(Self { d, n, h0, delta, couplings, beta })
    }

    pub fn system_dim(&self) -> usize {
        self.d + 1
    }

    pub fn site_dim(&self) -> usize {
        self.n + 1
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout { system_dim: self.d + 1, site_dim: self.n + 1 }
    }

    pub fn gibbs(&self) -> GibbsWeights {
        gibbs_weights(self.beta, &self.delta)
    }

    /// Same model with every coupling set to zero.
    pub fn uncoupled(&self) -> Self {
        let zero = ComplexMatrix::zeros(self.d + 1, self.d + 1);
        Self { couplings: vec![zero; self.n], ..self.clone() }
    }

    /// Random model: Gaussian Hermitian h₀ and couplings, site energies in
    /// [0.5, 2], inverse temperature in [0.3, 2].
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> Self {
        let h0 = random::random_hermitian(rng, d + 1, 1.0);
        let delta = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let couplings = (0..n).map(|_| random::random_matrix(rng, d + 1, d + 1, 0.5)).collect();
        let beta = InverseTemperature::Finite(rng.random_range(0.3..2.0));
        Self::new(h0, delta, couplings, beta).expect("sampled model is valid")
    }

    /// [`InteractionModel::random`] driven by a ChaCha8 stream for `seed`.
    pub fn seeded(seed: u64, d: usize, n: usize) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed), d, n)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::field("<root>", e.to_string()))?;
        Self::from_json(&v)
    }

    /// Parses the model schema `{"d","n","h0","delta","V","beta"}` with complex
    /// entries written as `[re, im]`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::field("<root>", "expected a JSON object"))?;
        let d = get_count(obj, "d")?;
        let n = get_count(obj, "n")?;
        if d < 1 {
            return Err(Error::field("d", "must be at least 1"));
        }
        if n < 1 {
            return Err(Error::field("n", "must be at least 1"));
        }
        let h0 = parse_matrix(obj.get("h0"), "h0", d + 1)?;
        let delta = obj
            .get("delta")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::field("delta", "expected an array of reals"))?
            .iter()
            .enumerate()
            .map(|(j, x)| x.as_f64().ok_or_else(|| Error::field(format!("delta[{j}]"), "expected a real number")))
            .collect::<Result<Vec<f64>>>()?;
        if delta.len() != n {
            return Err(Error::field("delta", format!("expected {n} entries, got {}", delta.len())));
        }
        let vs =
            obj.get("V").and_then(Value::as_array).ok_or_else(|| Error::field("V", "expected an array of matrices"))?;
        if vs.len() != n {
            return Err(Error::field("V", format!("expected {n} matrices, got {}", vs.len())));
        }
        let couplings = vs
            .iter()
            .enumerate()
            .map(|(j, m)| parse_matrix(Some(m), &format!("V[{j}]"), d + 1))
            .collect::<Result<Vec<_>>>()?;
        let beta = match obj.get("beta") {
            Some(Value::String(s)) if s.eq_ignore_ascii_case("inf") => InverseTemperature::Infinite,
            Some(Value::Number(x)) => InverseTemperature::Finite(x.as_f64().unwrap_or(f64::NAN)),
            _ => return Err(Error::field("beta", "expected a nonnegative real or \"inf\"")),
        };
        Self::new(h0, delta, couplings, beta)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "n": self.n,
            "h0": matrix_to_json(&self.h0),
            "delta": self.delta,
            "V": self.couplings.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "beta": self.beta.to_json(),
        })
    }
}

fn get_count(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::field(key, "expected a nonnegative integer"))
}

/// Matrix as nested rows of `[re, im]` pairs.
pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(|z| json!([z.re, z.im])).collect())).collect())
}

/// Parses nested rows of `[re, im]` pairs (a bare real is accepted as a real
/// entry) into a `dim`×`dim` matrix.
pub fn parse_matrix(v: Option<&Value>, field: &str, dim: usize) -> Result<ComplexMatrix> {
    let rows = v.and_then(Value::as_array).ok_or_else(|| Error::field(field, "expected an array of rows"))?;
    if rows.len() != dim {
        return Err(Error::field(field, format!("expected {dim} rows, got {}", rows.len())));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::field(format!("{field}[{i}]"), "expected an array"))?;
        if row.len() != dim {
            return Err(Error::field(format!("{field}[{i}]"), format!("expected {dim} entries, got {}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            data.push(parse_complex(z).ok_or_else(|| Error::field(format!("{field}[{i}][{j}]"), "expected [re, im]"))?);
        }
    }
    ComplexMatrix::new(dim, dim, data)
}

fn parse_complex(v: &Value) -> Option<C64> {
    match v {
        Value::Number(x) => x.as_f64().map(|re| C64::new(re, 0.0)),
        Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
        _ => None,
    }
}

/// Index arithmetic of the one-site space ℂ^{d+1} ⊗ ℂ^{n+1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub system_dim: usize,
    pub site_dim: usize,
}

impl BlockLayout {
    pub fn total_dim(&self) -> usize {
        self.system_dim * self.site_dim
    }

    /// Flattened index of (system level `i`, site level `m`).
    pub fn index(&self, i: usize, m: usize) -> usize {
        m * self.system_dim + i
    }

    /// Block (m, m') of a one-site operator, a system-space matrix.
    pub fn block(&self, op: &ComplexMatrix, m: usize, mp: usize) -> ComplexMatrix {
        let s = self.system_dim;
        op.submatrix(m * s, mp * s, s, s)
    }

    /// Embeds a system operator into block (m, m').
    pub fn place(&self, op: &mut ComplexMatrix, m: usize, mp: usize, block: &ComplexMatrix) {
        let s = self.system_dim;
        op.set_submatrix(m * s, mp * s, block);
    }

    /// Projector onto the block where the site is in its ground level.
    pub fn ground_projector(&self) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.total_dim(), self.total_dim());
        self.place(&mut p, 0, 0, &ComplexMatrix::identity(self.system_dim));
        p
    }
}

/// Uncoupled one-site Hamiltonian and interaction.
#[derive(Clone, Debug)]
pub struct OneSiteOperators {
    pub h_free: ComplexMatrix,
    pub interaction: ComplexMatrix,
    pub layout: BlockLayout,
}

impl OneSiteOperators {
    pub fn hamiltonian(&self, lambda: f64) -> ComplexMatrix {
        &self.h_free + &self.interaction.scale_real(lambda)
    }
}

/// `h_free = I ⊗ h₀ + diag(0, δ₁…δ_n) ⊗ I` and the interaction whose only
/// nonzero blocks are (0, m) = V_m† and (m, 0) = V_m.
pub fn build_one_site(model: &InteractionModel) -> OneSiteOperators {
    let layout = model.layout();
    let site_energies: Vec<f64> = std::iter::once(0.0).chain(model.delta.iter().copied()).collect();
    let h_free = &kron(&ComplexMatrix::identity(layout.site_dim), &model.h0)
        + &kron(&ComplexMatrix::from_real_diag(&site_energies), &ComplexMatrix::identity(layout.system_dim));
    let mut w = ComplexMatrix::zeros(layout.total_dim(), layout.total_dim());
    for (m, v) in model.couplings.iter().enumerate() {
        layout.place(&mut w, 0, m + 1, &v.adjoint());
        layout.place(&mut w, m + 1, 0, v);
    }
    OneSiteOperators { h_free, interaction: w, layout }
}

/// Thermal weights of the site levels.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsWeights {
    /// p₀…p_n, summing to one.
    pub p: Vec<f64>,
    /// Partition value Σ_m e^{−βδ_m}; equal to 1 at zero temperature.
    pub z: f64,
}

impl GibbsWeights {
    /// e^{−βδ_m} = p_m / p₀ (zero for excited levels at zero temperature).
    pub fn relative(&self, m: usize) -> f64 {
        self.p[m] / self.p[0]
    }

    /// 1/Z = p₀.
    pub fn inverse_partition(&self) -> f64 {
        self.p[0]
    }
}

/// p_m = e^{−βδ_m}/Z with δ₀ = 0; β = ∞ gives the vacuum weights (1, 0, …, 0).
pub fn gibbs_weights(beta: InverseTemperature, delta: &[f64]) -> GibbsWeights {
    let n = delta.len();
    match beta {
        InverseTemperature::Infinite => {
            let mut p = vec![0.0; n + 1];
            p[0] = 1.0;
            GibbsWeights { p, z: 1.0 }
        }
        InverseTemperature::Finite(b) => {
            let exps: Vec<f64> = std::iter::once(0.0).chain(delta.iter().map(|&x| -b * x)).collect();
            let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = exps.iter().map(|e| (e - top).exp()).sum();
            let log_z = top + s.ln();
            let p = exps.iter().map(|e| (e - log_z).exp()).collect();
            GibbsWeights { p, z: log_z.exp() }
        }
    }
}

/// U = exp(−iτ(H_free + λW)) on the one-site space.
pub fn one_step_unitary(model: &InteractionModel, lambda: f64, tau: f64) -> Result<ComplexMatrix> {
    let ops = build_one_site(model);
    expm_hermitian(&ops.hamiltonian(lambda), -I * tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::{expm, op_norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit_model(eps: f64, delta: f64, v: [C64; 4]) -> InteractionModel {
        let h0 = ComplexMatrix::from_real_diag(&[-eps, eps]);
        let v = ComplexMatrix::new(2, 2, v.to_vec()).unwrap();
        InteractionModel::new(h0, vec![delta], vec![v], InverseTemperature::Finite(1.0)).unwrap()
    }

    #[test]
    fn qubit_hamiltonian_layout() {
        let (eps, delta, lam) = (0.7, 1.3, 0.4);
        let v = [C64::new(1.0, 0.5), C64::new(-0.2, 0.0), C64::new(0.3, 0.1), C64::new(0.0, 2.0)];
        let m = qubit_model(eps, delta, v);
        let h = build_one_site(&m).hamiltonian(lam);
        let vm = ComplexMatrix::new(2, 2, v.to_vec()).unwrap();
        let sz = ComplexMatrix::from_real_diag(&[-eps, eps]);
        let mut want = ComplexMatrix::zeros(4, 4);
        want.set_submatrix(0, 0, &sz);
        want.set_submatrix(0, 2, &vm.adjoint().scale_real(lam));
        want.set_submatrix(2, 0, &vm.scale_real(lam));
        want.set_submatrix(2, 2, &(&sz + &ComplexMatrix::identity(2).scale_real(delta)));
        assert!((&h - &want).max_abs() < 1e-15);
        assert_eq!(m.layout().index(1, 1), 3);
    }

    #[test]
    fn zero_coupling_gives_zero_interaction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = InteractionModel::random(&mut rng, 2, 2).uncoupled();
        assert_eq!(build_one_site(&m).interaction.max_abs(), 0.0);
    }

    #[test]
    fn interaction_is_block_off_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = InteractionModel::random(&mut rng, 2, 3);
        let ops = build_one_site(&m);
        let p = ops.layout.ground_projector();
        let q = &ComplexMatrix::identity(p.rows()) - &p;
        assert!(p.matmul(&ops.interaction).matmul(&p).max_abs() < 1e-13);
        assert!(q.matmul(&ops.interaction).matmul(&q).max_abs() < 1e-13);
        for mm in 0..=m.n {
            let want = &m.h0 + &ComplexMatrix::identity(3).scale_real(if mm == 0 { 0.0 } else { m.delta[mm - 1] });
            assert!((&ops.layout.block(&ops.h_free, mm, mm) - &want).max_abs() < 1e-15);
            for mp in 0..=m.n {
                if mm != mp {
                    assert_eq!(ops.layout.block(&ops.h_free, mm, mp).max_abs(), 0.0);
                }
            }
        }
    }

    #[test]
    fn gibbs_examples() {
        let g = gibbs_weights(InverseTemperature::Finite(0.0), &[1.0, 5.0]);
        assert!(g.p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        let g = gibbs_weights(InverseTemperature::Infinite, &[1.0, 2.0]);
        assert_eq!(g.p, vec![1.0, 0.0, 0.0]);
        let g = gibbs_weights(InverseTemperature::Finite(2f64.ln()), &[1.0]);
        assert!((g.p[0] - 2.0 / 3.0).abs() < 1e-15 && (g.p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.z - 1.5).abs() < 1e-14);
    }

    #[test]
    fn gibbs_survives_large_negative_energies() {
        let g = gibbs_weights(InverseTemperature::Finite(50.0), &[-30.0, 1.0]);
        assert!((g.p.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(g.p.iter().all(|x| x.is_finite() && *x >= 0.0));
    }

    #[test]
    fn uncoupled_unitary_is_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = InteractionModel::random(&mut rng, 1, 2);
        let tau = 0.8;
        let u = one_step_unitary(&m, 0.0, tau).unwrap();
        let lay = m.layout();
        for mm in 0..=m.n {
            let e = if mm == 0 { 0.0 } else { m.delta[mm - 1] };
            let h = &m.h0 + &ComplexMatrix::identity(2).scale_real(e);
            let want = expm(&h.scale(-I * tau)).unwrap();
            assert!((&lay.block(&u, mm, mm) - &want).max_abs() < 1e-12);
        }
        let p = lay.ground_projector();
        assert!(u.commutator(&p).max_abs() < 1e-12);
        assert!((&one_step_unitary(&m, 0.7, 0.0).unwrap() - &ComplexMatrix::identity(6)).max_abs() < 1e-14);
    }

    #[test]
    fn coupled_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = InteractionModel::random(&mut rng, 2, 2);
        let u = one_step_unitary(&m, 0.9, 1.3).unwrap();
        let e = &u.adjoint().matmul(&u) - &ComplexMatrix::identity(9);
        assert!(op_norm(&e) < 1e-10);
    }

    #[test]
    fn json_round_trip_and_field_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = InteractionModel::random(&mut rng, 1, 2);
        let back = InteractionModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back.h0, m.h0);
        assert_eq!(back.couplings, m.couplings);
        assert_eq!(back.delta, m.delta);

        let mut v = m.to_json();
        v["h0"][0][1] = json!([0.5, 0.0]);
        v["h0"][1][0] = json!([0.0, 0.0]);
        let err = InteractionModel::from_json(&v).unwrap_err();
        assert!(matches!(err, Error::InvalidField { ref field, .. } if field == "h0"), "{err}");

        let mut v = m.to_json();
        v["beta"] = json!("hot");
        assert!(
            matches!(InteractionModel::from_json(&v), Err(Error::InvalidField { ref field, .. }) if field == "beta")
        );

        let mut v = m.to_json();
        v["V"][1][0][0] = json!("x");
        assert!(
            matches!(InteractionModel::from_json(&v), Err(Error::InvalidField { ref field, .. }) if field == "V[1][0][0]")
        );

        let mut v = m.to_json();
        v["beta"] = json!("inf");
        assert!(InteractionModel::from_json(&v).unwrap().beta.is_infinite());
    }
}
