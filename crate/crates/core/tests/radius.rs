use approbust::perturbation::OpType;
use approbust::radius::{av_radius, oracle_radius, sav_radius, RadiusOutcome};
use approbust::rules::{RuleSpec, DEFAULT_CAP};
use approbust::Election;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_election(rng: &mut ChaCha8Rng, max_m: usize, max_n: usize) -> Election {
    let m = rng.gen_range(2..=max_m);
    let n = rng.gen_range(0..=max_n);
    let ballots = (0..n)
        .map(|_| (0..m).filter(|_| rng.gen_bool(0.5)).collect())
        .collect();
    Election::new(m, ballots).unwrap()
}

#[test]
fn sav_radius_matches_oracle_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let e = random_election(&mut rng, 5, 4);
        for k in 1..e.num_candidates() {
            for op in OpType::ALL {
                let fast = sav_radius(&e, k, op).unwrap();
                let slow = oracle_radius(&e, k, &RuleSpec::Sav, op, 4, DEFAULT_CAP)
                    .unwrap()
                    .outcome;
                assert_eq!(fast, slow, "{e:?} k={k} {op}");
            }
        }
    }
}

#[test]
fn av_radius_matches_oracle_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let e = random_election(&mut rng, 4, 3);
        for k in 1..e.num_candidates() {
            for op in OpType::ALL {
                let fast = av_radius(&e, k, op).unwrap();
                let slow = oracle_radius(&e, k, &RuleSpec::Av, op, 4, DEFAULT_CAP)
                    .unwrap()
                    .outcome;
                assert_eq!(fast, slow, "{e:?} k={k} {op}");
            }
        }
    }
}

fn election_strategy() -> impl Strategy<Value = Election> {
    (2usize..=4, 0usize..=3).prop_flat_map(|(m, n)| {
        proptest::collection::vec(proptest::collection::btree_set(0..m, 0..=m), n).prop_map(
            move |sets| Election::new(m, sets.into_iter().map(|s| s.into_iter().collect()).collect()).unwrap(),
        )
    })
}

proptest! {
    #[test]
    fn decision_is_monotone_in_budget(e in election_strategy(), k_seed in 0usize..8, budget in 0usize..5) {
        let k = 1 + k_seed % (e.num_candidates() - 1);
        for op in OpType::ALL {
            let r = av_radius(&e, k, op).unwrap();
            if let RadiusOutcome::Finite(x) = r {
                prop_assert!(x >= 1);
                if x <= budget {
                    prop_assert!(x <= budget + 1);
                }
            }
            let oracle = oracle_radius(&e, k, &RuleSpec::Av, op, budget, DEFAULT_CAP).unwrap();
            if let Some(w) = oracle.witness {
                prop_assert_eq!(oracle.outcome, RadiusOutcome::Finite(w.len()));
                prop_assert!(w.len() <= budget);
            }
        }
    }
}
