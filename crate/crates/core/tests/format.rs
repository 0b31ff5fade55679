use approbust::format::{parse_election, serialize_election};
use approbust::Election;
use proptest::prelude::*;

fn election_strategy() -> impl Strategy<Value = Election> {
    (1usize..=6, 0usize..=5, any::<bool>()).prop_flat_map(|(m, n, with_order)| {
        (
            proptest::collection::vec(proptest::collection::btree_set(0..m, 0..=m), n),
            Just((0..m).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(move |(sets, order)| {
                let e = Election::new(m, sets.into_iter().map(|s| s.into_iter().collect()).collect()).unwrap();
                if with_order {
                    e.with_tie_break(order).unwrap()
                } else {
                    e
                }
            })
    })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(e in election_strategy()) {
        let text = serialize_election(&e);
        let back = parse_election(&text).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(serialize_election(&back), text);
    }

    #[test]
    fn comments_and_voter_order_do_not_matter(e in election_strategy()) {
        let mut lines: Vec<String> = serialize_election(&e).lines().map(String::from).collect();
        let tail = if e.tie_break().is_some() { lines.pop() } else { None };
        let header = lines.remove(0);
        lines.reverse();
        let mut text = format!("# shuffled\n{header}   # header\n\n");
        for l in lines {
            text.push_str(&l);
            text.push('\n');
        }
        if let Some(t) = tail {
            text.push_str(&t);
        }
        prop_assert_eq!(parse_election(&text).unwrap(), e);
    }
}
