//! Property tests for the spectral and information-gain invariants.

use proptest::prelude::*;
use rand::SeedableRng;

use entest::gain::average_gain;
use entest::povm::{povm_gain, AbstractPovm};
use entest::prior::PriorDensity;
use entest::reparam::{reparametrized_gain, ParamMap};
use entest::spectrum::Spectrum;

proptest! {
    /// Block weights are a probability distribution for any N and b.
    #[test]
    fn weights_resolve_unity_and_stay_nonnegative(n in 1u32..=120, b in 0.0f64..=1.0) {
        let spec = Spectrum::new(n).unwrap();
        let mut total = 0.0;
        for block in spec.blocks() {
            let w = block.weight(b);
            prop_assert!(w >= 0.0, "negative weight at n={} b={}", n, b);
            total += w;
        }
        prop_assert!((total - 1.0).abs() < 1e-12, "sum {} at n={} b={}", total, n, b);
    }

    /// Eigenvalues never exceed the top block's and stay in [0, 1].
    #[test]
    fn eigenvalues_are_probabilities(n in 1u32..=60, b in 0.0f64..=1.0) {
        let spec = Spectrum::new(n).unwrap();
        for block in spec.blocks() {
            let lam = block.eigenvalue(b);
            prop_assert!((0.0..=1.0).contains(&lam));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// No strategy beats the projective bound (random block splits).
    #[test]
    fn random_povms_respect_the_bound(
        n in 2u32..=4,
        outcomes in 1usize..=6,
        seed in 0u64..1024,
    ) {
        let spec = Spectrum::new(n).unwrap();
        let prior = PriorDensity::quadratic();
        let bound = average_gain(&spec, &prior).unwrap().average_gain_bits;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let povm = AbstractPovm::random(&spec, outcomes, &mut rng);
        let gain = povm_gain(&povm, &spec, &prior).unwrap();
        prop_assert!(gain <= bound + 1e-9, "gain {} bound {}", gain, bound);
        prop_assert!(gain >= -1e-12);
    }

    /// Splitting an outcome proportionally never changes the gain.
    #[test]
    fn proportional_refinement_is_informationless(
        row in 0usize..=1,
        t in 0.01f64..=0.99,
    ) {
        let spec = Spectrum::new(3).unwrap();
        let prior = PriorDensity::quadratic();
        let base = AbstractPovm::optimal_projective(&spec);
        let refined = base.refine_proportionally(row, t).unwrap();
        let g0 = povm_gain(&base, &spec, &prior).unwrap();
        let g1 = povm_gain(&refined, &spec, &prior).unwrap();
        prop_assert!((g0 - g1).abs() < 1e-10, "{} vs {}", g0, g1);
    }

    /// The gain is invariant under power-law relabelings of the parameter.
    /// Exponents above 3 would push the quadratic prior into an integrable
    /// endpoint singularity of the transformed density, outside the
    /// quadrature's design envelope, so the property stops at 2.5.
    #[test]
    fn power_maps_leave_the_gain_unchanged(
        n in 2u32..=6,
        exponent in 0.25f64..=2.5,
    ) {
        let spec = Spectrum::new(n).unwrap();
        let prior = PriorDensity::quadratic();
        let direct = average_gain(&spec, &prior).unwrap().average_gain_bits;
        let map = ParamMap::with_derivative(
            move |b: f64| b.powf(exponent),
            move |b: f64| exponent * b.powf(exponent - 1.0),
        );
        let re = reparametrized_gain(&spec, &prior, &map).unwrap();
        prop_assert!((re - direct).abs() < 1e-8, "{} vs {}", re, direct);
    }
}

/// Computed regression, not a theorem: the optimal gain increases with the
/// number of copies over the tabulated range.
#[test]
fn gain_is_monotone_in_copy_count_up_to_21() {
    let prior = PriorDensity::quadratic();
    let mut prev = -1.0;
    for n in 1..=21u32 {
        let gain = average_gain(&Spectrum::new(n).unwrap(), &prior)
            .unwrap()
            .average_gain_bits;
        assert!(
            gain >= prev - 1e-12,
            "gain dropped from {prev} to {gain} at n={n}"
        );
        prev = gain;
    }
}
