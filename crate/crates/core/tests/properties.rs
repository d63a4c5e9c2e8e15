mod common;

use common::{mps_invariants, ttn_invariants, Ledger};
use proptest::prelude::*;

use subfid::fidelity::{half_system_fidelity, window_fidelity};
use subfid::harness::{load_network, save_network, Network};
use subfid::mps::random_mps;
use subfid::oracle::{mps_to_statevector, reduced_density_matrix, uhlmann_exact};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mps_fidelities_satisfy_invariants(seed in any::<u64>()) {
        let mut ledger = Ledger::default();
        mps_invariants(seed, &mut ledger);
        ledger.assert_clean();
    }

    #[test]
    fn branch_fidelities_satisfy_invariants(seed in any::<u64>()) {
        let mut ledger = Ledger::default();
        ttn_invariants(seed, &mut ledger);
        ledger.assert_clean();
    }

    #[test]
    fn window_matches_dense_uhlmann(seed in any::<u64>(), chi in 1usize..=5, s in 0usize..4, len in 1usize..4) {
        let l = 8;
        let e = (s + len).min(l);
        let a = random_mps(l, 2, chi, seed).unwrap();
        let b = random_mps(l, 2, chi, seed.wrapping_add(1)).unwrap();
        let (va, vb) = (mps_to_statevector(&a).unwrap(), mps_to_statevector(&b).unwrap());
        let oracle = uhlmann_exact(
            &reduced_density_matrix(&va, l, 2, s, e).unwrap(),
            &reduced_density_matrix(&vb, l, 2, s, e).unwrap(),
        ).unwrap();
        prop_assert!((window_fidelity(&a, &b, s, e).unwrap().value - oracle).abs() <= 1e-8);
    }

    #[test]
    fn half_system_value_is_sum_of_spectrum(seed in any::<u64>(), cut in 1usize..8) {
        let a = random_mps(8, 2, 4, seed).unwrap();
        let b = random_mps(8, 2, 3, seed ^ 1).unwrap();
        let r = half_system_fidelity(&a, &b, cut, cut % 2 == 0).unwrap();
        prop_assert!((r.value - r.singular_spectrum.iter().sum::<f64>()).abs() <= 1e-12);
        prop_assert!(r.singular_spectrum.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn containers_round_trip(seed in any::<u64>(), l in 2usize..10, chi in 1usize..6) {
        let dir = tempfile::tempdir().unwrap();
        let psi = random_mps(l, 2, chi, seed).unwrap();
        save_network(&dir.path().join("s"), &Network::Mps(psi.clone())).unwrap();
        match load_network(&dir.path().join("s")).unwrap() {
            Network::Mps(back) => prop_assert_eq!(back, psi),
            Network::Ttn(_) => prop_assert!(false, "kind changed"),
        }
    }
}
