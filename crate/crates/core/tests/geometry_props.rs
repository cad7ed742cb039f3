use mirror_morse::lagrangian::{
    hom_indices, minus_grad, FactorGeometry, Magnitude, MultiIndex, PairPotential,
};
use mirror_morse::polytope::{segment_contains, Location, ProductPolytope, RationalPoint};
use num_rational::Rational64;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

/// A rational point of the closed simplex of dimension `n`, with
/// denominators up to 12.
fn simplex_point(n: usize) -> impl Strategy<Value = RationalPoint> {
    (proptest::collection::vec(0i64..=24, n + 1), 1i64..=12).prop_map(move |(weights, den)| {
        let total: i64 = weights.iter().sum::<i64>().max(1);
        // barycentric weights scaled to sum 2, then rounded down to the grid
        RationalPoint(
            weights[..n]
                .iter()
                .map(|&w| Rational64::new(2 * w * den / total, den))
                .collect(),
        )
    })
}

/// `(a, b, I)` with `a < b`, `b − a ≤ 4` and admissible `I`.
fn pair(n: usize) -> impl Strategy<Value = (i64, i64, MultiIndex)> {
    (0i64..=3, 1i64..=4).prop_flat_map(move |(a, d)| {
        let gens = hom_indices(a, a + d, n);
        (Just(a), Just(a + d), 0..gens.len())
            .prop_map(move |(a, b, k)| (a, b, gens[k].index.clone()))
    })
}

proptest! {
    #[test]
    fn classification_ignores_coordinate_order(x in simplex_point(3), perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let p = ProductPolytope::projective_space(3).unwrap();
        let permuted = RationalPoint(perm.iter().map(|&i| x.coords()[i]).collect());
        let kind = |loc: Location| match loc {
            Location::Interior => 0,
            Location::Boundary(_) => 1,
            Location::Outside => 2,
        };
        prop_assert_eq!(kind(p.classify(&x).unwrap()), kind(p.classify(&permuted).unwrap()));
    }

    #[test]
    fn segments_contain_their_endpoints(a in simplex_point(2), b in simplex_point(2)) {
        prop_assert!(segment_contains(&a, &b, &a).unwrap());
        prop_assert!(segment_contains(&a, &b, &b).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn magnitude_peaks_only_at_base_point(n in 1usize..=3, seed in any::<u64>()) {
        let mut runner = proptest::test_runner::TestRunner::new_with_rng(
            ProptestConfig::default(),
            proptest::test_runner::TestRng::from_seed(
                proptest::test_runner::RngAlgorithm::ChaCha,
                &{
                    let mut s = [0u8; 32];
                    s[..8].copy_from_slice(&seed.to_le_bytes());
                    s
                },
            ),
        );
        let (a, b, index) = pair(n).new_tree(&mut runner).unwrap().current();
        let x = simplex_point(n).new_tree(&mut runner).unwrap().current();
        let pot = PairPotential::new(a, b, index.clone()).unwrap();
        let one = mirror_morse::PosExact::one();
        match pot.magnitude_at(&x).unwrap() {
            Magnitude::Zero => prop_assert!(&x != pot.base_point()),
            Magnitude::Positive(m) => {
                prop_assert!(m <= one);
                prop_assert_eq!(m == one, &x == pot.base_point());
            }
        }
        let grad = minus_grad(a, b, &index, &x);
        prop_assert_eq!(grad.iter().all(Rational64::is_zero), &x == pot.base_point());
    }
}

#[test]
fn whole_factor_exactly_for_equal_labels() {
    for n in 1..=3 {
        for a in 0..=3 {
            for b in 0..=4 {
                for g in hom_indices(a, b, n) {
                    let whole = matches!(g.geometry, FactorGeometry::WholeFactor);
                    assert_eq!(whole, a == b);
                    if whole {
                        assert!(g.index.is_zero());
                    }
                }
            }
        }
    }
}
