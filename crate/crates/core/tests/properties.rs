use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsg_core::dkk::{averaging_projection, imp_estimate_check, DkkSpec, OrderedPartition};
use tsg_core::finvec::{int, rat};
use tsg_core::greedy::{almost_greedy_gap, cond_params, BasisHandle, CondMode};
use tsg_core::haar::{haar_expansion, haar_function_l1, lp_norm_pc, DyadicInterval};
use tsg_core::hierarchy::{fgh_eval, iterate_fn};
use tsg_core::spaces::{norm, SpaceHandle};
use tsg_core::tsirelson::{tsirelson_norm, NormTable};
use tsg_core::{FinVec, GrowthFunction, Rational};

fn rational_vec(max_index: usize) -> impl Strategy<Value = FinVec<Rational>> {
    proptest::collection::btree_map(1..=max_index, (-12i64..=12, 1i64..=6), 0..=max_index).prop_map(|m| {
        FinVec::from_entries(m.into_iter().filter(|(_, (a, _))| *a != 0).map(|(i, (a, b))| (i, rat(a, b)))).unwrap()
    })
}

fn interval() -> impl Strategy<Value = DyadicInterval> {
    (1u32..=5).prop_flat_map(|n| (Just(n), 0u64..(1u64 << (n - 1)))).prop_map(|(n, k)| DyadicInterval::new(n, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_point_within_n_rounds(f in rational_vec(14)) {
        let t = NormTable::build(&f);
        prop_assert!(t.level_count() <= t.max_index() + 1);
        prop_assert_eq!(t.norm(), tsirelson_norm(&f));
    }

    #[test]
    fn haar_functions_orthogonal(i in interval(), j in interval()) {
        prop_assume!(i != j);
        let (a, b) = (haar_function_l1(i).unwrap(), haar_function_l1(j).unwrap());
        prop_assert!(a.inner_exact(&b).unwrap().is_zero());
    }

    #[test]
    fn haar_indicator_sums_in_l2(set in proptest::collection::btree_set(interval(), 1..12)) {
        let coeffs: Vec<(DyadicInterval, f64)> = set.iter().map(|i| (*i, 1.0)).collect();
        let f = haar_expansion(&coeffs, 2.0).unwrap();
        let m = set.len() as f64;
        prop_assert!((lp_norm_pc(&f, 2.0).unwrap() - m.sqrt()).abs() < 1e-12 * m.sqrt());
    }

    #[test]
    fn haar_indicator_bracket_in_lp(set in proptest::collection::btree_set(interval(), 1..12), p in prop_oneof![Just(1.5), Just(3.0)]) {
        let coeffs: Vec<(DyadicInterval, f64)> = set.iter().map(|i| (*i, 1.0)).collect();
        let f = haar_expansion(&coeffs, p).unwrap();
        let r = lp_norm_pc(&f, p).unwrap() / (set.len() as f64).powf(1.0 / p);
        prop_assert!((0.5..=2.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn almost_greedy_numerator_contracts(f in rational_vec(10), m in 0usize..5) {
        let b = BasisHandle::new(SpaceHandle::Tsirelson).unwrap();
        let g = almost_greedy_gap(&b, &f, m).unwrap();
        prop_assert!(g.numerator <= norm(&SpaceHandle::Tsirelson, &f).unwrap());
    }

    #[test]
    fn projection_identities_exact(f in rational_vec(31), blocks in 1usize..6) {
        let sigma = OrderedPartition::geometric(blocks);
        let f = f.restrict(|j| j <= sigma.cumulative(blocks));
        let (p, q) = averaging_projection(&sigma, &f).unwrap();
        let (pp, qp) = averaging_projection(&sigma, &p).unwrap();
        prop_assert_eq!(pp, p.clone());
        prop_assert!(qp.is_zero());
        prop_assert_eq!(p.add(&q), f);
    }

    #[test]
    fn improvement_estimate(coeffs in proptest::collection::vec(-1.0f64..1.0, 15), mask in any::<u16>(), s in 1.0f64..2.0) {
        let spec = DkkSpec::new(SpaceHandle::lp(2.0).unwrap(), SpaceHandle::lp(2.0).unwrap(), OrderedPartition::geometric(4)).unwrap();
        let f = FinVec::from_entries(coeffs.iter().enumerate().map(|(i, c)| (i + 1, *c))).unwrap();
        let a: Vec<usize> = (1..=15).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        prop_assert!(imp_estimate_check(&spec, &f, &a, s).unwrap().holds);
    }

    #[test]
    fn iterates_gain_per_step(c in 1u64..4, d in 0u64..3, j in 1u64..=10, m in 0u64..=6, extra in 0u64..=6) {
        let n = (m + extra).min(6);
        let f = GrowthFunction::sum(GrowthFunction::product(GrowthFunction::Const(c), GrowthFunction::Identity), GrowthFunction::Const(d));
        let k = c + d;
        let hi = iterate_fn(&f, n, j).unwrap();
        let lo = iterate_fn(&f, m, j).unwrap();
        prop_assert!(hi >= lo + BigUint::from((k - 1) * (n - m)));
    }
}

#[test]
fn hierarchy_levels_start_at_two_and_increase() {
    for n in 1..=4u32 {
        assert_eq!(fgh_eval(n, 1).unwrap(), BigUint::from(2u32));
        let mut prev = BigUint::zero();
        for j in 1..=12u64 {
            let Ok(v) = fgh_eval(n, j) else { break };
            assert!(v > prev, "F_{n}({j})");
            prev = v;
        }
    }
}

#[test]
fn reduced_conditionality_below_full() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bases = [
        BasisHandle::new(SpaceHandle::Tsirelson).unwrap(),
        BasisHandle::new(SpaceHandle::rotated(0.5, 30).unwrap()).unwrap(),
        BasisHandle::new(SpaceHandle::rotated(0.7, 30).unwrap()).unwrap(),
    ];
    for b in &bases {
        for mode in [CondMode::Exhaustive, CondMode::Witness] {
            for m in 1..=5 {
                let c = cond_params(b, m, mode, &mut rng).unwrap();
                assert!(c.k_tilde.to_f64() <= c.k.to_f64() * (1.0 + 1e-12), "m = {m}: {} > {}", c.k_tilde, c.k);
            }
        }
    }
}

#[test]
fn sandwich_on_signed_inputs() {
    let f = FinVec::from_entries([(2, int(-3)), (5, rat(7, 2)), (9, int(1))]).unwrap();
    let v = tsirelson_norm(&f);
    let sup = f.iter().map(|(_, q)| q.abs()).max().unwrap();
    assert!(sup <= v && v <= f.l1_norm());
}
