//! Property tests for the lattice and observable invariants.

use proptest::prelude::*;

use ising_ring::lattice::{
    bubble_decomposition, classical_energy, enumerate_basis, magnetization_of, ModelParams,
    SpinConfig,
};
use ising_ring::observables::{
    blockade_density, blockade_density_spin_form, bubble_density, lambda_profile,
};

fn arb_config() -> impl Strategy<Value = SpinConfig> {
    (3usize..=16).prop_flat_map(|n| {
        (Just(n), 0u64..(1u64 << n))
            .prop_map(|(n, bits)| SpinConfig::new(n, bits).expect("valid config"))
    })
}

proptest! {
    #[test]
    fn run_lengths_sum_to_down_count(config in arb_config()) {
        let d = bubble_decomposition(&config);
        prop_assert_eq!(d.total_down(), config.down_count());
    }

    #[test]
    fn decomposition_rotates_with_the_ring(config in arb_config(), k in 0usize..16) {
        // the all-down wrapping run has no delimiter to anchor its start
        prop_assume!(config.down_count() < config.n_sites());
        let n = config.n_sites();
        let rotated = bubble_decomposition(&config.rotated(k));
        let mut expect: Vec<(usize, usize)> = bubble_decomposition(&config)
            .runs
            .iter()
            .map(|r| ((r.start + k) % n, r.len))
            .collect();
        expect.sort();
        let mut got: Vec<(usize, usize)> = rotated.runs.iter().map(|r| (r.start, r.len)).collect();
        got.sort();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn magnetization_identity(config in arb_config()) {
        let m = magnetization_of(&config);
        let down = config.down_count() as f64;
        let n = config.n_sites() as f64;
        prop_assert!((m - (1.0 - 2.0 * down / n)).abs() < 1e-12);
    }

    #[test]
    fn energy_even_under_global_flip_with_field_flip(
        config in arb_config(),
        h_z in -2.0f64..2.0,
    ) {
        let n = config.n_sites();
        let plus = ModelParams::new(n, 1.0, 0.0, h_z).unwrap();
        let minus = ModelParams::new(n, 1.0, 0.0, -h_z).unwrap();
        let e1 = classical_energy(&config, &plus);
        let e2 = classical_energy(&config.flipped_all(), &minus);
        prop_assert!((e1 - e2).abs() < 1e-10);
    }

    #[test]
    fn lambda_weighted_sum_counts_downs(config in arb_config()) {
        // excluding the wrapping all-down case, Σ n·λₙ·N = #↓
        prop_assume!(config.down_count() < config.n_sites());
        let n = config.n_sites();
        // runs as long as N-1 exist, so tally the full profile
        let lam = lambda_profile(&config, n - 1);
        let total: f64 = lam
            .iter()
            .enumerate()
            .map(|(i, l)| (i + 1) as f64 * l * n as f64)
            .sum();
        prop_assert!((total - config.down_count() as f64).abs() < 1e-9);
    }

    #[test]
    fn observables_cyclically_invariant(config in arb_config(), k in 0usize..16) {
        let r = config.rotated(k);
        prop_assert_eq!(blockade_density(&config), blockade_density(&r));
        let n_max = config.n_sites() - 2;
        for nb in 1..=n_max.min(4) {
            prop_assert_eq!(
                bubble_density(&config, nb).unwrap(),
                bubble_density(&r, nb).unwrap()
            );
        }
    }

    #[test]
    fn blockade_spin_identity(config in arb_config()) {
        let a = blockade_density(&config);
        let b = blockade_density_spin_form(&config);
        prop_assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn basis_enumeration_is_exhaustive_and_ordered() {
    for n in [3usize, 5, 8] {
        let basis = enumerate_basis(n).unwrap();
        assert_eq!(basis.len(), 1 << n);
        for (i, c) in basis.iter().enumerate() {
            assert_eq!(c.index(), i);
        }
    }
}
