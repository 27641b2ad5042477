mod common;

use common::{brute_force_choices, independently_valid, perturb, perturbation};
use cyclic_order::conics::{Case, Stratum};
use cyclic_order::fibers::{enumerate_choices, fiber, marked_fiber_of_stratum, MarkedFiber, Orbit};
use proptest::prelude::*;

#[test]
fn oracle_matches_on_all_strata() {
    for case in Case::ALL {
        let f = marked_fiber_of_stratum(&Stratum::canonical(case));
        assert_eq!(enumerate_choices(&f), brute_force_choices(&f), "{case}");
    }
}

#[test]
fn count_factorization() {
    for case in Case::ALL {
        let s = Stratum::canonical(case);
        let f = marked_fiber_of_stratum(&s);
        let extras = if f.singular { 2 } else { 0 };
        assert_eq!(fiber(&f, &s).len(), 2 * enumerate_choices(&f).len() + extras);
    }
}

fn raw_orbit() -> impl Strategy<Value = Orbit> {
    (0u32..=4, any::<bool>(), any::<bool>()).prop_map(|(m, fixed, node)| Orbit {
        id: 0,
        multiplicity: m,
        sigma_fixed: fixed,
        at_node: node,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn perturbed_fibers_rejected_or_matched(singular in any::<bool>(), raw in prop::collection::vec(raw_orbit(), 1..5)) {
        let orbits: Vec<Orbit> = raw.into_iter().enumerate().map(|(i, o)| Orbit { id: i, ..o }).collect();
        match MarkedFiber::new(singular, orbits.clone()) {
            Ok(f) => {
                prop_assert!(independently_valid(singular, &orbits));
                prop_assert_eq!(enumerate_choices(&f), brute_force_choices(&f));
            }
            Err(_) => prop_assert!(!independently_valid(singular, &orbits)),
        }
    }

    #[test]
    fn stratum_perturbations_rejected_or_matched(case in 0usize..8, edits in prop::collection::vec(perturbation(), 0..3)) {
        let base = marked_fiber_of_stratum(&Stratum::canonical(Case::ALL[case]));
        let (singular, orbits) = perturb(base.singular, base.orbits().to_vec(), &edits);
        match MarkedFiber::new(singular, orbits.clone()) {
            Ok(f) => {
                prop_assert!(independently_valid(singular, &orbits));
                prop_assert_eq!(enumerate_choices(&f), brute_force_choices(&f));
            }
            Err(_) => prop_assert!(!independently_valid(singular, &orbits)),
        }
    }
}
