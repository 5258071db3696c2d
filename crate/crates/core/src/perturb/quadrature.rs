//! Composite Gauss–Legendre quadrature of the defining time integrals of F
//! and G, used as an independent check of the closed forms.

use super::fg::FGPair;
use crate::densela::{eigh, ComplexMatrix, C64, I};
use crate::error::Result;
use crate::model::{build_one_site, InteractionModel};

/// Nodes and weights of the m-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 {
                1.0
            } else if m == 1 {
                x
            } else {
                p1
            };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule: `panels` equal panels, each with an `order`-point rule.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub panels: usize,
    pub order: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self { panels: 2000, order: 4 }
    }
}

impl QuadratureRule {
    /// Nodes and weights on [a, b].
    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(self.order);
        let h = (b - a) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.order);
        for p in 0..self.panels {
            let left = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                out.push((left + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
            }
        }
        out
    }
}

/// F and G by direct quadrature of
/// F = −i e^{−iτH₀} ∫₀^τ W(s) ds and G = −e^{−iτH₀} ∫₀^τ ds₁ W(s₁) ∫₀^{s₁} W(s₂) ds₂,
/// W(s) = e^{isH₀} W e^{−isH₀}.
pub fn fg_by_quadrature(model: &InteractionModel, tau: f64, rule: &QuadratureRule) -> Result<FGPair> {
    let ops = build_one_site(model);
    let (eps, s) = eigh(&ops.h_free)?;
    let dim = eps.len();
    let wt = s.adjoint().matmul(&ops.interaction).matmul(&s);
    let w_at = |t: f64| ComplexMatrix::from_fn(dim, dim, |p, q| wt[(p, q)] * (I * (t * (eps[p] - eps[q]))).exp());

    let (gx, gw) = gauss_legendre(rule.order);
    let h = tau / rule.panels as f64;
    let mut f_int = ComplexMatrix::zeros(dim, dim);
    let mut g_int = ComplexMatrix::zeros(dim, dim);
    for p in 0..rule.panels {
        let left = p as f64 * h;
        let panel_start = f_int.clone();
        for (xi, wi) in gx.iter().zip(&gw) {
            let s1 = left + 0.5 * h * (xi + 1.0);
            let w1 = w_at(s1);
            // ∫₀^{s₁} W = completed panels + partial panel [left, s₁]
            let mut inner = panel_start.clone();
            let sub = s1 - left;
            for (yj, vj) in gx.iter().zip(&gw) {
                let s2 = left + 0.5 * sub * (yj + 1.0);
                inner += &w_at(s2).scale_real(0.5 * sub * vj);
            }
            g_int += &w1.matmul(&inner).scale_real(0.5 * h * wi);
        }
        for (xi, wi) in gx.iter().zip(&gw) {
            f_int += &w_at(left + 0.5 * h * (xi + 1.0)).scale_real(0.5 * h * wi);
        }
    }
    let prefactor = |m: &ComplexMatrix, c: C64| {
        ComplexMatrix::from_fn(dim, dim, |p, q| m[(p, q)] * c * (-I * (tau * eps[p])).exp())
    };
    let f = prefactor(&f_int, -I);
    let g = prefactor(&g_int, C64::new(-1.0, 0.0));
    let back = |m: &ComplexMatrix| s.matmul(m).matmul(&s.adjoint());
    Ok(FGPair { f: back(&f), g: back(&g), tau })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rules_integrate_polynomials() {
        for m in 1..=8 {
            let (x, w) = gauss_legendre(m);
            for deg in 0..(2 * m) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "m {m} deg {deg}");
            }
        }
    }

    #[test]
    fn composite_rule_integrates_oscillation() {
        let rule = QuadratureRule { panels: 50, order: 4 };
        let got: C64 = rule.nodes(0.0, 3.0).iter().map(|&(t, w)| (I * 5.0 * t).exp() * w).sum();
        let want = ((I * 15.0).exp() - 1.0) / (I * 5.0);
        assert!((got - want).norm() < 1e-12);
    }
}
