use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riq::densela::random::{random_hermitian, random_matrix};
use riq::densela::{kron, unvec, vec, ComplexMatrix};
use riq::lindblad::{choi_min_eigenvalue, semigroup, LindbladGenerator};
use riq::model::{one_step_unitary, InteractionModel};
use riq::perturb::{sharp, ProjectorFamily};
use riq::reduced::{heisenberg_map, schrodinger_block, SuperOperator};
use riq::regimes::fit_order;

fn model(seed: u64, d: usize, n: usize) -> InteractionModel {
    InteractionModel::random(&mut ChaCha8Rng::seed_from_u64(seed), d, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vec_matches_kron_convention(seed in 0u64..1000, n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, n, 1.0);
        let x = random_matrix(&mut rng, n, n, 1.0);
        let b = random_matrix(&mut rng, n, n, 1.0);
        let lhs = vec(&a.matmul(&x).matmul(&b));
        let rhs = kron(&b.transpose(), &a).mul_vec(&vec(&x));
        let diff = lhs.iter().zip(&rhs).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12);
        prop_assert_eq!(unvec(&vec(&x)).unwrap(), x);
    }

    #[test]
    fn heisenberg_step_is_unital_and_contractive(
        seed in 0u64..1000, d in 1usize..3, n in 1usize..3, lambda in 0.0f64..2.0, tau in 0.05f64..3.0,
    ) {
        let m = model(seed, d, n);
        let u = one_step_unitary(&m, lambda, tau).unwrap();
        let map = heisenberg_map(&u, &m.gibbs(), m.layout()).unwrap();
        prop_assert!(map.unital_residual() < 1e-11);
        prop_assert!(map.dual().trace_residual() < 1e-11);
        prop_assert!(choi_min_eigenvalue(&map).unwrap() > -1e-11);
        let a = schrodinger_block(&u, m.layout()).unwrap();
        prop_assert!(riq::densela::op_norm(&a) <= 1.0 + 1e-12);
    }

    #[test]
    fn spectral_average_is_idempotent_and_commutes(seed in 0u64..1000, dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, dim, 1.0);
        let k = random_matrix(&mut rng, dim, dim, 1.0);
        let fam = ProjectorFamily::hamiltonian(&h, 1e-9).unwrap();
        let once = sharp(&k, &fam).unwrap();
        let twice = sharp(&once, &fam).unwrap();
        prop_assert!((&once - &twice).max_abs() < 1e-12);
        prop_assert!(once.commutator(&h).max_abs() < 1e-10);
    }

    #[test]
    fn lindblad_semigroup_is_completely_positive(seed in 0u64..1000, dim in 2usize..4, jumps in 1usize..3, t in 0.01f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, dim, 1.0);
        let ls: Vec<ComplexMatrix> = (0..jumps).map(|_| random_matrix(&mut rng, dim, dim, 0.8)).collect();
        let s = semigroup(&LindbladGenerator::from_parts(&h, ls), t).unwrap();
        prop_assert!(s.unital_residual() < 1e-9);
        prop_assert!(choi_min_eigenvalue(&s.dual()).unwrap() > -1e-9);
    }

    #[test]
    fn order_fit_recovers_power_laws(c in 0.01f64..100.0, p in 0.5f64..4.0) {
        let samples: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&x| (x, c * f64::powf(x, p))).collect();
        prop_assert!((fit_order(&samples).unwrap().slope - p).abs() < 1e-9);
    }

    #[test]
    fn superoperator_exp_matches_conjugation(seed in 0u64..1000, t in -2.0f64..2.0) {
        let h = random_hermitian(&mut ChaCha8Rng::seed_from_u64(seed), 3, 1.0);
        let e = SuperOperator::hamiltonian(&h).exp(t).unwrap();
        let u = riq::densela::expm_hermitian(&h, riq::densela::I * (-t)).unwrap();
        prop_assert!((e.matrix() - SuperOperator::conjugation(&u).matrix()).max_abs() < 1e-11);
    }
}
