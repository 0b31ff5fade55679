use approbust::constructions::{
    count_perfect_matchings, matching_to_sav_counting, sav_add_witness, sav_remove_witness,
    thiele_witness, x3c_to_thiele, BipartiteGraph, X3CInstance,
};
use approbust::perturbation::{displacement, OpType};
use approbust::rules::{winners, RuleSpec, ThieleVector, WinnerSet, DEFAULT_CAP};
use approbust::{Committee, Rational};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = BipartiteGraph> {
    (2usize..=3).prop_flat_map(|n| {
        proptest::collection::btree_set((0..n, 0..n), 0..=n * n)
            .prop_map(move |edges| BipartiteGraph::new(n, n, edges.into_iter().collect()).unwrap())
    })
}

proptest! {
    #[test]
    fn matching_gadget_scores(g in graph_strategy(), remove in any::<bool>()) {
        let op = if remove { OpType::Remove } else { OpType::Add };
        let n = g.left();
        let bundle = matching_to_sav_counting(&g, op).unwrap();
        prop_assert!(bundle.audit());
        let size = if remove { n * n } else { n };
        let scores = bundle.election.sav_scores();
        let two = Rational::from_integer(2.into());
        let dummy = Rational::new(1.into(), size.into());
        for (c, s) in scores.iter().enumerate() {
            if c < 2 * n {
                prop_assert_eq!(s, &two);
            } else {
                prop_assert_eq!(s, &dummy);
            }
        }
        let per = if remove { n * n - 2 } else { bundle.election.num_candidates() - 2 * n - (n - 2) };
        let want = count_perfect_matchings(&g).unwrap() * num_traits::pow(num_bigint::BigUint::from(per), n);
        prop_assert_eq!(bundle.expected_count, Some(want));
    }
}

#[test]
fn sav_witnesses_displace_everyone() {
    for k in 2..=4 {
        for g in [sav_add_witness(k).unwrap(), sav_remove_witness(k).unwrap()] {
            let d = displacement(&g.election, k, &RuleSpec::Sav, &g.operation.unwrap(), DEFAULT_CAP).unwrap();
            assert_eq!(d, k);
        }
    }
}

#[test]
fn thiele_witness_max_scores() {
    for k in 2..=4 {
        let g = thiele_witness(k, OpType::Add).unwrap();
        for w in [ThieleVector::cc(k), ThieleVector::pav(k)] {
            let rule = RuleSpec::Thiele(w);
            let d = displacement(&g.election, k, &rule, &g.operation.unwrap(), DEFAULT_CAP).unwrap();
            assert_eq!(d, k);
        }
    }
}

#[test]
fn x3c_baseline_is_b_for_several_weights() {
    let inst = X3CInstance::new(6, vec![[0, 1, 2], [2, 3, 4], [3, 4, 5], [1, 2, 3]]).unwrap();
    for (num, den) in [(1, 2), (1, 3), (0, 1)] {
        let alpha = Rational::new(num.into(), den.into());
        let g = x3c_to_thiele(&inst, &alpha, OpType::Add).unwrap();
        let w = ThieleVector::new(vec![Rational::from_integer(1.into()), alpha]).unwrap();
        let set = winners(&g.election, 2, &RuleSpec::Thiele(w), DEFAULT_CAP).unwrap();
        assert_eq!(set, WinnerSet::single(Committee::new(vec![4, 5], 6).unwrap()));
    }
}
