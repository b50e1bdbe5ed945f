//! Cross-checks of the fast coinvariant path against brute-force oracles.

use std::sync::Arc;

use proptest::prelude::*;

use iwasawa_coinv::coinvariants::{Coinvariants, CyclicModule, GModule};
use iwasawa_coinv::congruence::{LevelContext, SubgroupSpec};
use iwasawa_coinv::group::FiniteGroup;
use iwasawa_coinv::linalg::rank_of;

fn group(p: u64, n: u32) -> Arc<FiniteGroup> {
    Arc::new(FiniteGroup::new(p, n, 1, 1, 1 << 20).unwrap())
}

// dim M - rank of {(g - 1) e_i : g in T, all i}, using every element of T.
fn brute_coinvariant_dim(m: &GModule, elements: &[usize], p: u32) -> usize {
    let n = m.dim();
    let mut rows = Vec::new();
    for &g in elements {
        let a = m.matrix(g).unwrap().minus_identity();
        for i in 0..n {
            let c = a.column(i);
            if c.iter().any(|&x| x != 0) {
                rows.push(c);
            }
        }
    }
    n - rank_of(p, n, rows)
}

fn specs(n: u32) -> Vec<SubgroupSpec> {
    let mut v = Vec::new();
    for k in 1..n {
        v.extend([
            SubgroupSpec::G { k },
            SubgroupSpec::H { k },
            SubgroupSpec::T { k },
        ]);
        for j in 0..k {
            v.push(SubgroupSpec::Tlj { l: k, j });
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_path_matches_brute_force(seed in any::<u64>(), which in 0usize..2) {
        let (p, n) = [(3u64, 2u32), (2, 3)][which];
        let g = group(p, n);
        let m = CyclicModule::random(g.clone(), seed);
        let explicit = m.to_explicit().unwrap();
        prop_assert_eq!(m.module_dim().unwrap(), explicit.dim());
        for spec in specs(n) {
            let sub = g.spec_subgroup(spec).unwrap();
            let brute = brute_coinvariant_dim(&explicit, &sub.elements, p as u32);
            prop_assert_eq!(m.coinvariant_dim(&sub).unwrap(), brute, "{}", spec);
        }
    }

    #[test]
    fn coinvariants_shrink_along_inclusions(seed in any::<u64>()) {
        let g = group(3, 3);
        let m = CyclicModule::random(g.clone(), seed);
        for l in 1..3u32 {
            for j in 1..l {
                let small = g.spec_subgroup(SubgroupSpec::Tlj { l, j: j - 1 }).unwrap();
                let big = g.spec_subgroup(SubgroupSpec::Tlj { l, j }).unwrap();
                prop_assert!(m.coinvariant_dim(&big).unwrap() <= m.coinvariant_dim(&small).unwrap());
            }
        }
    }
}

#[test]
fn realized_orders_match_index_formulas() {
    for (p, n) in [(2u64, 4u32), (3, 3), (5, 2)] {
        let g = group(p, n);
        let ctx = LevelContext::new(p, n).unwrap();
        for spec in specs(n) {
            let sub = g.spec_subgroup(spec).unwrap();
            assert_eq!(
                sub.order() as u64,
                spec.expected_order(&ctx),
                "{spec} at p={p} N={n}"
            );
        }
    }
}

#[test]
fn regular_module_coinvariants_are_coset_counts() {
    let g = group(3, 3);
    let m = CyclicModule::regular(g.clone());
    for spec in specs(3) {
        let sub = g.spec_subgroup(spec).unwrap();
        assert_eq!(m.coinvariant_dim(&sub).unwrap(), g.order() / sub.order());
    }
    let t = CyclicModule::trivial(g.clone());
    assert_eq!(t.coinvariant_dim(&g.trivial()).unwrap(), 1);
}
