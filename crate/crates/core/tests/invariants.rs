use std::f64::consts::PI;

use holonomic_core::random::haar_unitary;
use holonomic_core::synthesis::{
    length_from_spectrum, synthesize, synthesize_with, SynthesisOptions,
};
use holonomic_core::{StiefelFrame, UnitaryGate};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gate(seed: u64, k: usize) -> UnitaryGate {
    UnitaryGate::new(haar_unitary(&mut ChaCha8Rng::seed_from_u64(seed), k)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesized_controllers_reach_the_gate(seed in any::<u64>(), k in 1usize..=5) {
        let report = synthesize(&gate(seed, k)).unwrap();
        prop_assert!(report.closure_error <= 1e-9);
        prop_assert!(report.holonomy_error <= 1e-9);
        let c = &report.controller;
        let v0 = StiefelFrame::canonical(c.ambient_dim(), c.gate_dim());
        prop_assert!(c.constraint_residual(&v0) <= 1e-10);
    }

    #[test]
    fn phases_do_not_change_the_gate_or_length(
        seed in any::<u64>(),
        phases in proptest::collection::vec(-PI..PI, 3),
    ) {
        let g = gate(seed, 3);
        let plain = synthesize(&g).unwrap();
        let options = SynthesisOptions { phases: Some(phases), ..Default::default() };
        let phased = synthesize_with(&g, &options).unwrap();
        prop_assert!(phased.holonomy_error <= 1e-9);
        prop_assert!((phased.length - plain.length).abs() <= 1e-12);
    }

    #[test]
    fn length_is_bounded_by_pi_sqrt_k(seed in any::<u64>(), k in 1usize..=5) {
        let report = synthesize(&gate(seed, k)).unwrap();
        prop_assert!(report.length <= PI * (k as f64).sqrt() + 1e-12);
        prop_assert!((report.length - length_from_spectrum(&report.spectrum.gammas)).abs() <= 1e-12);
    }
}
