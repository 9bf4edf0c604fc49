use devcorr::correlations::{classical_mi_expansion, mutual_information_expansion, quantum_correlation_q};
use devcorr::state::{DeviationMatrix, Mat4};
use devcorr::OptimizerConfig;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::brute_force_k;

fn random_deviation(rng: &mut ChaCha8Rng) -> DeviationMatrix {
    let m = Mat4::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    DeviationMatrix::project(&m)
}

#[test]
fn generic_states_reach_the_grid_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let opt = OptimizerConfig::default();
    for _ in 0..8 {
        let d = random_deviation(&mut rng);
        let r = quantum_correlation_q(&d, &opt).unwrap();
        let grid = brute_force_k(&d, 36);
        assert!(grid <= r.classical_k + 1e-6, "grid {grid} above optimizer {}", r.classical_k);
        // The reported basis attains the reported value.
        let at_basis = classical_mi_expansion(&d, &r.optimal_basis);
        assert!((at_basis - r.classical_k).abs() < 1e-12);
        assert!(r.classical_k <= mutual_information_expansion(&d) + 1e-9);
    }
}

#[test]
fn result_does_not_depend_on_parallelism() {
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    let d = random_deviation(&mut rng);
    let serial = OptimizerConfig { parallel: false, ..OptimizerConfig::default() };
    let a = quantum_correlation_q(&d, &serial).unwrap();
    let b = quantum_correlation_q(&d, &OptimizerConfig::default()).unwrap();
    assert_eq!(a.classical_k.to_bits(), b.classical_k.to_bits());
    assert_eq!(a.optimal_basis, b.optimal_basis);
}
