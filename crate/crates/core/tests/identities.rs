//! Counting identities, checked exactly over random domains.

use ladprob::exactmath::alpha;
use ladprob::model_m1::{beta, delta_coeff, gamma_coeff, lambda_coeff, rho_groups, rho_total};
use ladprob::model_m2::{bracket_coefficient, rho_groups_m2, M2Analysis};
use ladprob::{big_binomial, DomainSpec};
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = DomainSpec> {
    (0u32..=3, 0u32..=4).prop_map(|(y, z)| DomainSpec::new(y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alpha_partitions_all_subsets(s in spec(), n in 0u64..=14) {
        let lhs: BigUint = (0..=n).map(|k| big_binomial(&s.d_y(), k) * alpha(k, n, s.z_attrs)).sum();
        prop_assert_eq!(lhs, big_binomial(&s.d_x(), n));
    }

    #[test]
    fn beta_sums_to_rho(s in spec(), n in 1u64..=14) {
        let total: BigUint = (0..=n).map(|k| beta(k, n, s)).sum();
        prop_assert_eq!(total, rho_total(n, s).unwrap());
    }

    #[test]
    fn group_split_plus_one_group_labelings_is_rho(s in spec(), n in 2u64..=12) {
        let split: BigUint = (1..n).map(|n1| rho_groups(n1, n - n1, s)).sum();
        let one_group = big_binomial(&s.d_x(), n) * 2u32;
        prop_assert_eq!(split + one_group, rho_total(n, s).unwrap());
    }

    #[test]
    fn lambda_plus_one_group_terms_is_beta(s in spec(), (n, k) in (2u64..=10).prop_flat_map(|n| (Just(n), 1..=n))) {
        let split: BigUint = (1..k).map(|k1| lambda_coeff(k1, k - k1, n, s)).sum();
        let one_group = big_binomial(&s.d_y(), k) * alpha(k, n, s.z_attrs) * 2u32;
        prop_assert_eq!(split + one_group, beta(k, n, s));
    }

    #[test]
    fn gamma_and_delta_refine_rho(s in spec(), n1 in 1u64..=7, n2 in 1u64..=7) {
        let rho = rho_groups(n1, n2, s);
        let gammas: BigUint = (0..=n1 + n2).map(|k| gamma_coeff(k, n1, n2, s)).sum();
        prop_assert_eq!(gammas, rho);
        for k in 0..=n1 + n2 {
            let deltas: BigUint = (0..=k).map(|k1| delta_coeff(k1, k - k1, n1, n2, s)).sum();
            prop_assert_eq!(deltas, gamma_coeff(k, n1, n2, s));
        }
    }

    #[test]
    fn delta_over_splits_is_lambda(s in spec(), n in 2u64..=9, k1 in 1u64..=5, k2 in 1u64..=5) {
        let split: BigUint = (1..n).map(|n1| delta_coeff(k1, k2, n1, n - n1, s)).sum();
        prop_assert_eq!(split, lambda_coeff(k1, k2, n, s));
    }

    #[test]
    fn m2_distribution_is_normalized(s in spec(), n1 in 1u64..=8, n2 in 1u64..=8) {
        let rho = rho_groups_m2(n1, n2, s);
        prop_assume!(!rho.is_zero());
        let m2 = M2Analysis::new(n1, n2, s).unwrap();
        let total: BigUint = (0..=m2.max_intersection()).map(|u| m2.count_eq(u).unwrap()).sum();
        prop_assert_eq!(&total, &rho);
        // no shared projection is exactly the M1 event
        prop_assert_eq!(m2.count_eq(0).unwrap(), rho_groups(n1, n2, s));
        let d_y = s.d_y_u64().unwrap();
        prop_assert!(m2.prob_at_most(d_y).unwrap().as_ratio().is_one());
        let mut cumulative = BigUint::zero();
        for t in 0..=m2.max_intersection() {
            cumulative += m2.count_eq(t).unwrap();
            let p = m2.prob_at_most(t).unwrap();
            prop_assert_eq!(p.as_ratio(), &Ratio::new(cumulative.clone(), rho.clone()));
        }
    }

    #[test]
    fn bracket_matches_direct_sum((d, t, v) in (1u64..=64).prop_flat_map(|d| (Just(d), 0..=d)).prop_flat_map(|(d, t)| (Just(d), Just(t), 0..=t))) {
        let mut direct = BigInt::zero();
        for u in v..=t {
            let term = BigInt::from(big_binomial(&BigUint::from(d), u) * big_binomial(&BigUint::from(u), v));
            if (u - v) % 2 == 0 { direct += term } else { direct -= term }
        }
        prop_assert_eq!(bracket_coefficient(&BigUint::from(d), v, t), direct);
    }
}
