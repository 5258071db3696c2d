use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riq::checks::{identity_suite, qubit_suite, SuiteConfig};
use riq::densela::random::random_hermitian;
use riq::densela::{expm, kron, op_norm, ComplexMatrix, C64, I};
use riq::model::InteractionModel;
use riq::reduced::{full_chain_oracle, full_chain_schrodinger};
use riq::regimes::{critical_experiment, tau_schedule, ExperimentOptions};
use riq::report::{convergence_csv, convergence_summary, generator_documents, render};

/// Full-chain Hamiltonian of step j, built densely in system ⊗ site₁ ⊗ … ⊗ site_k.
fn dense_step(m: &InteractionModel, lambda: f64, k: usize, j: usize) -> ComplexMatrix {
    let q = m.site_dim();
    let id = ComplexMatrix::identity;
    let idle = id(q);
    let embed = |sys: &ComplexMatrix, site: &ComplexMatrix, at: usize| {
        let mut out = sys.clone();
        for l in 0..k {
            out = kron(&out, if l == at { site } else { &idle });
        }
        out
    };
    let energies: Vec<f64> = std::iter::once(0.0).chain(m.delta.iter().copied()).collect();
    let number = ComplexMatrix::from_real_diag(&energies);
    let mut h = embed(&m.h0, &id(q), 0);
    for l in 0..k {
        h += &embed(&id(m.system_dim()), &number, l);
    }
    for (i, v) in m.couplings.iter().enumerate() {
        let mut lower = ComplexMatrix::zeros(q, q);
        lower[(0, i + 1)] = C64::new(1.0, 0.0);
        h += &embed(&v.adjoint(), &lower, j).scale_real(lambda);
        h += &embed(v, &lower.adjoint(), j).scale_real(lambda);
    }
    h
}

fn brute_force(
    m: &InteractionModel,
    lambda: f64,
    tau: f64,
    k: usize,
    b: &ComplexMatrix,
) -> (ComplexMatrix, ComplexMatrix) {
    let mut u = ComplexMatrix::identity(m.system_dim() * m.site_dim().pow(k as u32));
    for j in 0..k {
        u = expm(&dense_step(m, lambda, k, j).scale(-I * tau)).unwrap().matmul(&u);
    }
    let chain = u.rows() / m.system_dim();
    let s = m.system_dim();
    let a = ComplexMatrix::from_fn(s, s, |i, j| u[(i * chain, j * chain)]);
    let lifted = u.adjoint().matmul(&kron(b, &ComplexMatrix::identity(chain))).matmul(&u);
    let p = m.gibbs().p;
    let q = m.site_dim();
    let reduced = ComplexMatrix::from_fn(s, s, |i, j| {
        (0..chain)
            .map(|c| {
                let w: f64 = (0..k).map(|l| p[(c / q.pow(l as u32)) % q]).product();
                lifted[(i * chain + c, j * chain + c)] * w
            })
            .sum()
    });
    (a, reduced)
}

#[test]
fn factorized_chain_matches_dense_chain() {
    for (seed, d, n, k) in [(1, 1, 1, 3), (2, 2, 1, 2), (3, 1, 2, 2)] {
        let m = InteractionModel::random(&mut ChaCha8Rng::seed_from_u64(seed), d, n);
        let b = random_hermitian(&mut ChaCha8Rng::seed_from_u64(seed + 100), d + 1, 1.0);
        let (a, reduced) = brute_force(&m, 0.7, 0.9, k, &b);
        assert!(op_norm(&(&full_chain_schrodinger(&m, 0.7, 0.9, k).unwrap() - &a)) < 1e-11);
        assert!(op_norm(&(&full_chain_oracle(&m, 0.7, 0.9, k, &b).unwrap() - &reduced)) < 1e-11);
    }
}

#[test]
fn seeded_models_pass_identity_suite() {
    for (seed, d, n) in [(11, 1, 1), (12, 2, 1), (13, 1, 2)] {
        let m = InteractionModel::random(&mut ChaCha8Rng::seed_from_u64(seed), d, n);
        let checks = identity_suite(&m, &SuiteConfig { seed, ..SuiteConfig::default() }).unwrap();
        let bad: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        assert!(bad.is_empty(), "seed {seed}: {bad:?}");
    }
}

#[test]
fn qubit_suite_after_basis_change() {
    let mut m = InteractionModel::random(&mut ChaCha8Rng::seed_from_u64(21), 1, 1);
    let u = expm(&random_hermitian(&mut ChaCha8Rng::seed_from_u64(22), 2, 1.0).scale(I)).unwrap();
    m.h0 = u.matmul(&m.h0).matmul(&u.adjoint());
    m.couplings[0] = u.matmul(&m.couplings[0]).matmul(&u.adjoint());
    let checks = qubit_suite(&m, 0.8).unwrap();
    assert!(checks.iter().all(|c| c.pass), "{checks:?}");
}

#[test]
fn reports_are_reproducible() {
    let run = || {
        let m = InteractionModel::random(&mut ChaCha8Rng::seed_from_u64(5), 1, 2);
        let taus = tau_schedule(1.0, &[16, 32, 64]).unwrap();
        let r = critical_experiment(&m, 1.0, &taus, &ExperimentOptions::default()).unwrap();
        let mut out = convergence_csv(&r);
        out.push_str(&render(&convergence_summary(&m, &r)));
        for d in generator_documents(&m, 1.0, 1e-9).unwrap() {
            out.push_str(&d.contents);
        }
        out
    };
    assert_eq!(run(), run());
}
