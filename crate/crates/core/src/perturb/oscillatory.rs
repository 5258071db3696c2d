//! Oscillatory integrals over simplices, written as divided differences of
//! the exponential so that coinciding frequencies need no special casing.

use crate::densela::C64;

/// Below this spread of the nodes the divided differences switch to their
/// Taylor series.
const SERIES_RADIUS: f64 = 0.1;
const SERIES_TERMS: usize = 18;

/// (e^z − 1)/z, entire.
fn exprel(z: C64) -> C64 {
    if z.norm() < SERIES_RADIUS {
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..SERIES_TERMS {
            term *= z / (k as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// First divided difference exp[a, b].
pub fn dd1(a: C64, b: C64) -> C64 {
    a.exp() * exprel(b - a)
}

/// Second divided difference exp[z₀, z₁, z₂].
pub fn dd2(z0: C64, z1: C64, z2: C64) -> C64 {
    let pts = [z0, z1, z2];
    let pairs = [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)];
    let (i, j, mid) = pairs
        .iter()
        .copied()
        .max_by(|x, y| (pts[x.0] - pts[x.1]).norm().total_cmp(&(pts[y.0] - pts[y.1]).norm()))
        .expect("three pairs");
    let spread = (pts[i] - pts[j]).norm();
    if spread < SERIES_RADIUS {
        // exp[z] = e^c Σ_k h_k(z − c)/(k+2)!, h_k the complete homogeneous polynomials
        let c = (z0 + z1 + z2) / 3.0;
        let y = [z0 - c, z1 - c, z2 - c];
        let mut h1 = C64::new(1.0, 0.0);
        let mut h2 = h1;
        let mut h3 = h1;
        let mut fact = 2.0;
        let mut sum = h3 / fact;
        for k in 1..SERIES_TERMS {
            h1 *= y[0];
            h2 = h1 + y[1] * h2;
            h3 = h2 + y[2] * h3;
            fact *= k as f64 + 2.0;
            sum += h3 / fact;
        }
        c.exp() * sum
    } else {
        (dd1(pts[mid], pts[j]) - dd1(pts[i], pts[mid])) / (pts[j] - pts[i])
    }
}

/// ∫₀^τ e^{isα} ds.
pub fn phase_integral(tau: f64, alpha: f64) -> C64 {
    dd1(C64::new(0.0, 0.0), C64::new(0.0, tau * alpha)) * tau
}

/// ∫₀^τ ds₁ ∫₀^{s₁} ds₂ e^{is₁α} e^{is₂γ}.
pub fn ordered_phase_integral(tau: f64, alpha: f64, gamma: f64) -> C64 {
    dd2(C64::new(0.0, 0.0), C64::new(0.0, tau * alpha), C64::new(0.0, tau * (alpha + gamma))) * (tau * tau)
}

/// ∫₀^τ ds ∫₀^s dt e^{−itα}, evaluated from its closed form
/// (1 − e^{−iτα})/α² − iτ/α with the removable singularity at α = 0 handled
/// by the power series τ² Σ_k (−iατ)^k/(k+2)!.
pub fn double_phase_integral(tau: f64, alpha: f64) -> C64 {
    let x = alpha * tau;
    if x.abs() < 1e-2 {
        let z = C64::new(0.0, -x);
        let mut term = C64::new(0.5, 0.0);
        let mut sum = term;
        for k in 1..SERIES_TERMS {
            term *= z / (k as f64 + 2.0);
            sum += term;
        }
        sum * tau * tau
    } else {
        let e = C64::new(0.0, -x).exp();
        (C64::new(1.0, 0.0) - e) / (alpha * alpha) - C64::new(0.0, tau / alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_difference_limits() {
        let z = C64::new(0.3, -0.2);
        assert!((dd1(z, z) - z.exp()).norm() < 1e-15);
        let (a, b) = (C64::new(0.0, 1.0), C64::new(0.0, 2.5));
        assert!((dd1(a, b) - (b.exp() - a.exp()) / (b - a)).norm() < 1e-15);
    }

    #[test]
    fn second_difference_is_continuous_across_series_switch() {
        let base = C64::new(0.0, 0.7);
        for eps in [0.0999, 0.1001, 0.2, 1e-9] {
            let pts = [base, base + C64::new(0.0, eps), base + C64::new(0.0, eps / 3.0)];
            let got = dd2(pts[0], pts[1], pts[2]);
            // reference by nested first differences in extended form
            let want = if eps > 1e-3 {
                (dd1(pts[2], pts[1]) - dd1(pts[0], pts[2])) / (pts[1] - pts[0])
            } else {
                base.exp() * 0.5 * (1.0 + (pts[0] + pts[1] + pts[2] - base * 3.0) / 3.0)
            };
            assert!((got - want).norm() < 1e-12, "eps {eps}: {got} vs {want}");
        }
        let z = C64::new(0.2, 0.1);
        assert!((dd2(z, z, z) - z.exp() * 0.5).norm() < 1e-15);
    }

    #[test]
    fn remark_closed_form_at_zero_and_away() {
        let tau = 1.7;
        assert!((double_phase_integral(tau, 0.0) - C64::new(tau * tau / 2.0, 0.0)).norm() < 1e-15);
        let alpha = 0.9;
        let want =
            (C64::new(1.0, 0.0) - C64::new(0.0, -tau * alpha).exp()) / (alpha * alpha) - C64::new(0.0, tau / alpha);
        assert!((double_phase_integral(tau, alpha) - want).norm() < 1e-14);
        // continuity across the series threshold
        let a = 1e-2 / tau;
        let l = double_phase_integral(tau, a * (1.0 - 1e-9));
        let r = double_phase_integral(tau, a * (1.0 + 1e-9));
        assert!((l - r).norm() < 1e-9);
    }

    #[test]
    fn ordered_integral_reduces_to_remark_form() {
        // ∫₀^τ ds₁ ∫₀^{s₁} ds₂ e^{i(s₁−s₂)(−α)} equals the double phase integral
        let (tau, alpha) = (1.3, 2.1);
        let got = ordered_phase_integral(tau, -alpha, alpha);
        assert!((got - double_phase_integral(tau, alpha)).norm() < 1e-14);
    }

    #[test]
    fn phase_integral_values() {
        assert!((phase_integral(2.0, 0.0) - C64::new(2.0, 0.0)).norm() < 1e-15);
        let (tau, a) = (1.1, 3.0);
        let want = (C64::new(0.0, tau * a).exp() - 1.0) / C64::new(0.0, a);
        assert!((phase_integral(tau, a) - want).norm() < 1e-15);
    }
}
