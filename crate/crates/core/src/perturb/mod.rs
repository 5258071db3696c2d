//! Perturbative objects of the one-site propagator and the effective
//! generators built from them.

mod fg;
mod generators;
mod oscillatory;
mod quadrature;
mod sharp;

pub use fg::{compute_fg, verify_expansion, ExpansionResiduals, FGPair};
pub use generators::{
    critical_heisenberg_generator, critical_schrodinger_generator, free_rotation, gamma0, gamma0_sharp, gamma_beta,
    gamma_beta_sharp, gamma_w_double_integral, gamma_w_heisenberg, gamma_w_schrodinger, heisenberg_dissipator,
    regime_a_generator, t_beta,
};
pub use oscillatory::{dd1, dd2, double_phase_integral, ordered_phase_integral, phase_integral};
pub use quadrature::{fg_by_quadrature, gauss_legendre, QuadratureRule};
pub use sharp::{sharp, sharp_superop, time_average, AverageKernel, ProjectorFamily};
