//! Randomized cross-route properties. Every property pits two independent
//! implementations against each other; none of them compares a function
//! with itself.

use apstats_core::{
    census_bruteforce, census_fast, centred_product_expectation, count_aps, count_in_subset,
    count_naive, enumerate_aps, exact_joint_moment, explore, positional_sum, rat, rat_pow,
    sample_subset, Progression, Rat,
};
use num_traits::One;
use proptest::prelude::*;

fn progression_in(n: u64, max_len: u32) -> impl Strategy<Value = Progression> {
    (3..=max_len).prop_flat_map(move |len| {
        let max_d = (n - 1) / (len as u64 - 1);
        (1..=max_d).prop_flat_map(move |d| {
            let max_start = n - (len as u64 - 1) * d;
            (1..=max_start).prop_map(move |s| Progression::new(s, d, len).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn count_matches_enumeration(n in 3u64..150, ell in 3u32..9) {
        prop_assume!(ell as u64 <= n);
        let count = count_aps(n, ell).unwrap();
        let listed = enumerate_aps(n, ell).unwrap();
        prop_assert_eq!(count, listed.len() as i128);
        // listing is strictly sorted, so it is duplicate-free
        prop_assert!(listed.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn census_routes_agree(n in 6u64..30, ell in 3u32..7, ell_prime in 3u32..7) {
        prop_assume!(ell_prime <= ell && ell as u64 <= n);
        let fast = census_fast(n, ell, ell_prime).unwrap();
        let brute = census_bruteforce(n, ell, ell_prime).unwrap();
        prop_assert_eq!(fast.counts, brute.counts);
    }

    #[test]
    fn census_identities(n in 3u64..250, ell in 3u32..8, ell_prime in 3u32..8) {
        prop_assume!(ell_prime <= ell && ell as u64 <= n);
        let census = census_fast(n, ell, ell_prime).unwrap();
        prop_assert!(census.counts.iter().all(|&c| c >= 0));
        let pairs = count_aps(n, ell).unwrap() * count_aps(n, ell_prime).unwrap();
        prop_assert_eq!(census.total(), pairs);
        prop_assert_eq!(census.weighted_sum(), positional_sum(n, ell, ell_prime).unwrap());
    }

    #[test]
    fn exploration_is_permutation_invariant(
        tuple in proptest::collection::vec(progression_in(40, 5), 1..6),
        shift in 0usize..8,
    ) {
        // explore wants lengths from {ell1, ell2}: drop length-4 members
        // and run with the pair (5, 3)
        let tuple: Vec<Progression> =
            tuple.into_iter().filter(|t| t.length != 4).collect();
        prop_assume!(!tuple.is_empty());
        let base = explore(&tuple, 5, 3).unwrap();
        let k = tuple.len();
        let rotated: Vec<Progression> =
            (0..k).map(|i| tuple[(i + shift) % k]).collect();
        let reversed: Vec<Progression> = tuple.iter().rev().copied().collect();
        prop_assert_eq!(&explore(&rotated, 5, 3).unwrap(), &base);
        prop_assert_eq!(&explore(&reversed, 5, 3).unwrap(), &base);
        // zero count equals component count
        let zeros = base.t.iter().filter(|&&t| t == 0).count();
        prop_assert_eq!(zeros, base.component_count());
    }

    #[test]
    fn centred_pair_rule(
        a in progression_in(40, 6),
        b in progression_in(40, 6),
        num in 1i64..8,
    ) {
        let p = rat(num, 8);
        let shared = a.elements().filter(|&e| b.contains(e)).count() as u32;
        let want = if shared == 0 {
            Rat::from_integer(0.into())
        } else {
            rat_pow(&p, a.length + b.length - shared) - rat_pow(&p, a.length + b.length)
        };
        prop_assert_eq!(centred_product_expectation(&[a, b], &p).unwrap(), want);
    }

    #[test]
    fn sampling_is_reproducible(n in 1u64..300, seed: u64, p in 0.0f64..=1.0) {
        let first = sample_subset(n, p, seed).unwrap();
        let second = sample_subset(n, p, seed).unwrap();
        prop_assert_eq!(first.elements(), second.elements());
    }

    #[test]
    fn subset_counts_agree_with_naive(n in 3u64..100, seed: u64, p in 0.0f64..=1.0) {
        let mask = sample_subset(n, p, seed).unwrap();
        for ell in [3u32, 4, 5] {
            if (ell as u64) > n {
                continue;
            }
            prop_assert_eq!(
                count_in_subset(&mask, ell).unwrap(),
                count_naive(&mask, ell).unwrap()
            );
        }
    }

    #[test]
    fn unit_direction_second_moment_is_one(n in 6u64..11, num in 1i64..8) {
        let p = rat(num, 8);
        let m = exact_joint_moment(n, 3, 3, &p, 2, &rat(1, 1), &rat(0, 1)).unwrap();
        prop_assert_eq!(m.total.as_exact(), Some(&Rat::one()));
    }
}
