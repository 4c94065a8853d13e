use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vcausal_core::geometry::{hi_hrep, NsSampler};
use vcausal_core::inequalities::{evaluate, evaluate_i, functional_s};
use vcausal_core::optimizer::{measurements_from_bases, random_bases};
use vcausal_core::quantum::{behavior_from_quantum, ComplexVector};
use vcausal_core::scalar::int;
use vcausal_core::{DeterministicStrategy, Rational, Scenario};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn identity_holds_on_nonsignaling_samples(seed in any::<u64>()) {
        let s = Scenario::tripartite_2_333_2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = NsSampler::new(&s).sample(&mut rng);
        prop_assert_eq!(p.nonsignaling_deficit(), int(0));
        let f = functional_s();
        prop_assert_eq!(evaluate_i(&p).unwrap() - evaluate(&f, &p).unwrap(), int(2));
    }

    #[test]
    fn deterministic_points_respect_the_bound(k in 0usize..432) {
        let s = Scenario::tripartite_2_333_2();
        let d = &DeterministicStrategy::enumerate(&s)[k];
        let b = d.behavior::<Rational>(&s);
        prop_assert!(evaluate(&functional_s(), &b).unwrap() >= int(-2));
        prop_assert!(hi_hrep(&s, 1).unwrap().contains(b.table()));
    }

    #[test]
    fn random_quantum_points_are_nonsignaling(seed in any::<u64>()) {
        let f = functional_s();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parties = measurements_from_bases(&random_bases(&f, &mut rng).unwrap()).unwrap();
        let amps: Vec<_> = (0..12)
            .map(|k| num::complex::Complex64::new(((seed >> (k % 60)) & 7) as f64 - 3.0, k as f64 - 5.5))
            .collect();
        let psi = ComplexVector::new(amps).normalized().unwrap();
        let q = behavior_from_quantum(&psi, &parties).unwrap();
        prop_assert!(q.nonsignaling_deficit() < 1e-12);
        let total: f64 = q.table().iter().sum();
        prop_assert!((total - 12.0).abs() < 1e-9);
    }
}
