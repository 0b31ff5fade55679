use approbust::counting::{av_count_unchanged, oracle_count_unchanged, slot_count, AvCountDp};
use approbust::perturbation::OpType;
use approbust::rules::{RuleSpec, DEFAULT_CAP};
use approbust::Election;

fn all_elections(m: usize, n: usize) -> impl Iterator<Item = Election> {
    (0u32..1 << (m * n)).map(move |bits| {
        let ballots = (0..n)
            .map(|v| (0..m).filter(|c| bits >> (v * m + c) & 1 == 1).collect())
            .collect();
        Election::new(m, ballots).unwrap()
    })
}

#[test]
fn dp_matches_oracle_exhaustively_small() {
    for m in 1..=3 {
        for n in 0..=2 {
            for e in all_elections(m, n) {
                for k in 1..=m {
                    for op in [OpType::Add, OpType::Remove] {
                        for b in 0..=slot_count(&e, op).min(3) {
                            let dp = av_count_unchanged(&e, k, op, b).unwrap();
                            let oracle =
                                oracle_count_unchanged(&e, k, &RuleSpec::Av, op, b, DEFAULT_CAP)
                                    .unwrap();
                            assert_eq!(dp, oracle, "{e:?} k={k} {op} b={b}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn f_is_monotone() {
    let e = Election::new(3, vec![vec![0], vec![0, 1], vec![]]).unwrap();
    for op in [OpType::Add, OpType::Remove] {
        let dp = AvCountDp::new(&e, 1, op, 2).unwrap();
        for l in 0..=3 {
            for u in 0..=3 {
                assert!(dp.f(l + 1, u) <= dp.f(l, u));
                assert!(dp.f(l, u) <= dp.f(l, u + 1));
            }
        }
    }
}
