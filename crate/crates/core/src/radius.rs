//! Robustness radius: the fewest operations of one type that change the
//! winner family.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::ops::{Add, Sub};

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::election::{rational, Election};
use crate::error::Result;
use crate::perturbation::{apply_in_place, feasible_operations, OpType, Operation};
use crate::rules::{winner_sets_equal, winners, winners_separable, RuleSpec, WinnerSet};

/// Result of a radius computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "value", rename_all = "snake_case")]
pub enum RadiusOutcome {
    /// The minimum number of operations.
    Finite(usize),
    /// No sequence of operations of this type changes the winners.
    Impossible,
    /// Search stopped at this budget without a change.
    ExceedsBound(usize),
}

impl RadiusOutcome {
    pub fn finite(&self) -> Option<usize> {
        match self {
            RadiusOutcome::Finite(r) => Some(*r),
            _ => None,
        }
    }
}

impl fmt::Display for RadiusOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusOutcome::Finite(r) => write!(f, "{r}"),
            RadiusOutcome::Impossible => write!(f, "impossible"),
            RadiusOutcome::ExceedsBound(b) => write!(f, "> {b}"),
        }
    }
}

/// Exact AV radius from the sorted approval scores.
pub fn av_radius(election: &Election, k: usize, op_type: OpType) -> Result<RadiusOutcome> {
    election.check_committee_size(k)?;
    let m = election.num_candidates();
    if k == m {
        return Ok(RadiusOutcome::Impossible);
    }
    let n = election.num_voters() as u64;
    let mut z = election.approval_scores();
    z.sort_unstable_by(|a, b| b.cmp(a));
    let (zk, zk1) = (z[k - 1], z[k]);
    let gap = (zk - zk1) as usize;
    let outcome = match op_type {
        OpType::Add => {
            if zk > zk1 {
                RadiusOutcome::Finite(gap)
            } else if zk < n {
                RadiusOutcome::Finite(1)
            } else {
                // everyone at the top is approved by all voters; the best
                // candidate below n has to climb all the way up
                let t = z.iter().take_while(|&&s| s == n).count();
                if t == m {
                    RadiusOutcome::Impossible
                } else {
                    RadiusOutcome::Finite((n - z[t]) as usize)
                }
            }
        }
        OpType::Remove => {
            if zk > zk1 {
                RadiusOutcome::Finite(gap)
            } else if zk1 > 0 {
                RadiusOutcome::Finite(1)
            } else {
                match z[..k].iter().filter(|&&s| s > 0).min() {
                    Some(&s) => RadiusOutcome::Finite(s as usize),
                    None => RadiusOutcome::Impossible,
                }
            }
        }
        OpType::Swap => {
            if zk > zk1 {
                RadiusOutcome::Finite(gap.div_ceil(2))
            } else if has_partial_voter(election) {
                RadiusOutcome::Finite(1)
            } else {
                RadiusOutcome::Impossible
            }
        }
    };
    Ok(outcome)
}

fn has_partial_voter(election: &Election) -> bool {
    let m = election.num_candidates();
    election
        .ballots()
        .iter()
        .any(|b| !b.is_empty() && b.len() < m)
}

/// Exact SAV radius.
pub fn sav_radius(election: &Election, k: usize, op_type: OpType) -> Result<RadiusOutcome> {
    sav_radius_impl(election, k, op_type, false)
}

fn sav_radius_impl(
    election: &Election,
    k: usize,
    op_type: OpType,
    force_rational: bool,
) -> Result<RadiusOutcome> {
    election.check_committee_size(k)?;
    let m = election.num_candidates();
    if k == m {
        return Ok(RadiusOutcome::Impossible);
    }
    match winners_separable(election, k, true)? {
        WinnerSet::Threshold { forced, pool, .. } => {
            Ok(sav_tied_radius(election, op_type, &forced, &pool))
        }
        WinnerSet::Explicit(list) => {
            let winners = list[0].members().to_vec();
            // all quantities are multiples of 1/lcm(1..=m)
            let mut scale: i128 = 1;
            let mut fits = !force_rational;
            for d in (1..=m as i128).take_while(|_| fits) {
                match scale.checked_mul(d / scale.gcd(&d)) {
                    Some(s) if s.checked_mul(4 * election.num_voters() as i128 + 4).is_some() => {
                        scale = s
                    }
                    _ => {
                        fits = false;
                        break;
                    }
                }
            }
            let best = if fits {
                sav_unique_radius(election, op_type, &winners, &|d: usize| scale / d as i128)
            } else {
                sav_unique_radius(election, op_type, &winners, &|d: usize| {
                    rational(1, d as i64)
                })
            };
            Ok(best.map_or(RadiusOutcome::Impossible, RadiusOutcome::Finite))
        }
    }
}

/// Tied family: one operation on a pool candidate suffices when available.
fn sav_tied_radius(
    election: &Election,
    op_type: OpType,
    forced: &[usize],
    pool: &[usize],
) -> RadiusOutcome {
    let n = election.num_voters() as u64;
    let app = election.approval_scores();
    match op_type {
        OpType::Add => {
            if pool.iter().any(|&p| app[p] < n) {
                return RadiusOutcome::Finite(1);
            }
            // every voter approves every pool candidate, so pool members
            // stay tied and a loser must be approved by everyone to join
            let mut in_family = vec![false; election.num_candidates()];
            for &c in forced.iter().chain(pool) {
                in_family[c] = true;
            }
            (0..election.num_candidates())
                .filter(|&c| !in_family[c])
                .map(|c| (n - app[c]) as usize)
                .min()
                .map_or(RadiusOutcome::Impossible, RadiusOutcome::Finite)
        }
        OpType::Remove => {
            if pool.iter().any(|&p| app[p] > 0) {
                return RadiusOutcome::Finite(1);
            }
            forced
                .iter()
                .map(|&f| app[f] as usize)
                .min()
                .map_or(RadiusOutcome::Impossible, RadiusOutcome::Finite)
        }
        OpType::Swap => {
            if has_partial_voter(election) {
                RadiusOutcome::Finite(1)
            } else {
                RadiusOutcome::Impossible
            }
        }
    }
}

/// Unique winning committee: the cheapest pair `(x, y)` with `x` winning and
/// `y` losing for which `y` can catch up with `x`. `frac(d)` is `1/d` in the
/// chosen number type.
fn sav_unique_radius<T, F>(
    election: &Election,
    op_type: OpType,
    winners: &[usize],
    frac: &F,
) -> Option<usize>
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
    F: Fn(usize) -> T,
{
    let m = election.num_candidates();
    let mut score = vec![T::zero(); m];
    for ballot in election.ballots() {
        if ballot.is_empty() {
            continue;
        }
        let share = frac(ballot.len());
        for &c in ballot {
            score[c] = score[c].clone() + share.clone();
        }
    }
    let mut is_winner = vec![false; m];
    for &x in winners {
        is_winner[x] = true;
    }
    let mut best: Option<usize> = None;
    for &x in winners {
        for y in (0..m).filter(|&y| !is_winner[y]) {
            let delta = score[x].clone() - score[y].clone();
            let cost = match op_type {
                OpType::Add => sav_pair_add(election, x, y, delta, frac),
                OpType::Swap => sav_pair_swap(election, x, y, delta, frac),
                OpType::Remove => sav_pair_remove(election, x, y, delta, frac, best),
            };
            if let Some(c) = cost {
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
    }
    best
}

/// Fewest of the `gains` (taken largest first) whose sum reaches `delta`.
fn take_largest<T>(mut gains: Vec<T>, delta: T) -> Option<usize>
where
    T: Clone + Ord + Zero + Sub<Output = T>,
{
    let mut rest = delta;
    if rest <= T::zero() {
        return Some(0);
    }
    gains.sort_unstable_by(|a, b| b.cmp(a));
    for (i, g) in gains.into_iter().enumerate() {
        if g <= T::zero() {
            break;
        }
        rest = rest - g;
        if rest <= T::zero() {
            return Some(i + 1);
        }
    }
    None
}

fn sav_pair_add<T, F>(election: &Election, x: usize, y: usize, delta: T, frac: &F) -> Option<usize>
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
    F: Fn(usize) -> T,
{
    // approving y: y gains 1/(a+1); if x is approved it drops 1/a - 1/(a+1)
    let gains = election
        .ballots()
        .iter()
        .filter(|b| b.binary_search(&y).is_err())
        .map(|b| {
            let a = b.len();
            if b.binary_search(&x).is_ok() {
                frac(a)
            } else {
                frac(a + 1)
            }
        })
        .collect();
    take_largest(gains, delta)
}

fn sav_pair_swap<T, F>(election: &Election, x: usize, y: usize, delta: T, frac: &F) -> Option<usize>
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
    F: Fn(usize) -> T,
{
    let m = election.num_candidates();
    let gains = election
        .ballots()
        .iter()
        .filter_map(|b| {
            let a = b.len();
            match (b.binary_search(&x).is_ok(), b.binary_search(&y).is_ok()) {
                // move x to y
                (true, false) => Some(frac(a) + frac(a)),
                // move x elsewhere
                (true, true) if a < m => Some(frac(a)),
                // move something else to y
                (false, false) if a >= 1 => Some(frac(a)),
                _ => None,
            }
        })
        .collect();
    take_largest(gains, delta)
}

/// Remove: guess how many voters lose `x` among those approving only `x`
/// (iii) and among those approving both (iv), lowest ballot size first; then
/// shrink ballots of `y`-only voters (ii), always the currently smallest one.
fn sav_pair_remove<T, F>(
    election: &Election,
    x: usize,
    y: usize,
    delta: T,
    frac: &F,
    bound: Option<usize>,
) -> Option<usize>
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
    F: Fn(usize) -> T,
{
    let mut only_y = Vec::new();
    let mut only_x = Vec::new();
    let mut both = Vec::new();
    for b in election.ballots() {
        match (b.binary_search(&x).is_ok(), b.binary_search(&y).is_ok()) {
            (false, true) => only_y.push(b.len()),
            (true, false) => only_x.push(b.len()),
            (true, true) => both.push(b.len()),
            (false, false) => {}
        }
    }
    only_x.sort_unstable();
    both.sort_unstable();
    let mut best = bound;
    let mut gain4 = T::zero();
    for b4 in 0..=both.len() {
        if b4 > 0 {
            gain4 = gain4 + frac(both[b4 - 1] - 1);
        }
        let mut gain3 = T::zero();
        for b3 in 0..=only_x.len() {
            if b3 > 0 {
                gain3 = gain3 + frac(only_x[b3 - 1]);
            }
            let used = b3 + b4;
            if best.is_some_and(|b| used >= b) {
                break;
            }
            let mut rest = delta.clone() - gain3.clone() - gain4.clone();
            let mut steps = 0;
            if rest > T::zero() {
                let mut heap: BinaryHeap<Reverse<usize>> = only_y
                    .iter()
                    .copied()
                    .chain(both[..b4].iter().map(|a| a - 1))
                    .filter(|&a| a >= 2)
                    .map(Reverse)
                    .collect();
                while rest > T::zero() {
                    if best.is_some_and(|b| used + steps + 1 >= b) {
                        break;
                    }
                    let Some(Reverse(a)) = heap.pop() else { break };
                    // removing a non-y approval: 1/(a-1) - 1/a
                    rest = rest - (frac(a - 1) - frac(a));
                    steps += 1;
                    if a - 1 >= 2 {
                        heap.push(Reverse(a - 1));
                    }
                }
            }
            if rest <= T::zero() {
                best = Some(best.map_or(used + steps, |b| b.min(used + steps)));
            }
        }
    }
    best.filter(|&b| bound.map_or(true, |old| b < old))
}

/// Result of the breadth-first oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRadius {
    pub outcome: RadiusOutcome,
    /// A shortest operation sequence that changes the winners.
    pub witness: Option<Vec<Operation>>,
    /// Number of distinct elections visited.
    pub states: usize,
}

/// Breadth-first search over elections reachable with at most `max_budget`
/// operations. Elections are deduplicated, so additions and removals are
/// explored as sets and swaps as sequences up to their effect.
pub fn oracle_radius(
    election: &Election,
    k: usize,
    rule: &RuleSpec,
    op_type: OpType,
    max_budget: usize,
    limit: u64,
) -> Result<OracleRadius> {
    election.check_committee_size(k)?;
    let base = winners(election, k, rule, limit)?;
    let mut states: Vec<(Election, Option<(usize, Operation)>)> = vec![(election.clone(), None)];
    let mut seen: HashMap<Election, usize> = HashMap::new();
    seen.insert(election.clone(), 0);
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    let mut exhausted = true;
    while let Some((idx, depth)) = queue.pop_front() {
        if depth == max_budget {
            // an unseen election one more move away means the search was cut short
            if exhausted {
                let here = &states[idx].0;
                for op in feasible_operations(here, op_type) {
                    let mut next = here.clone();
                    apply_in_place(&mut next, &op)?;
                    if !seen.contains_key(&next) {
                        exhausted = false;
                        break;
                    }
                }
            }
            continue;
        }
        let current = states[idx].0.clone();
        for op in feasible_operations(&current, op_type) {
            let mut next = current.clone();
            apply_in_place(&mut next, &op)?;
            if seen.contains_key(&next) {
                continue;
            }
            let changed = !winner_sets_equal(&winners(&next, k, rule, limit)?, &base);
            let next_idx = states.len();
            seen.insert(next.clone(), next_idx);
            states.push((next, Some((idx, op))));
            if changed {
                let mut witness = Vec::new();
                let mut at = next_idx;
                while let Some((parent, op)) = states[at].1 {
                    witness.push(op);
                    at = parent;
                }
                witness.reverse();
                return Ok(OracleRadius {
                    outcome: RadiusOutcome::Finite(depth + 1),
                    witness: Some(witness),
                    states: states.len(),
                });
            }
            queue.push_back((next_idx, depth + 1));
        }
    }
    Ok(OracleRadius {
        outcome: if exhausted {
            RadiusOutcome::Impossible
        } else {
            RadiusOutcome::ExceedsBound(max_budget)
        },
        witness: None,
        states: states.len(),
    })
}

/// Whether at most `budget` operations can change the winners. AV and SAV
/// use the exact algorithms; other rules run the oracle up to `budget`.
pub fn radius_decision(
    election: &Election,
    k: usize,
    rule: &RuleSpec,
    op_type: OpType,
    budget: usize,
    limit: u64,
) -> Result<bool> {
    let outcome = match rule {
        RuleSpec::Av => av_radius(election, k, op_type)?,
        RuleSpec::Sav => sav_radius(election, k, op_type)?,
        _ => oracle_radius(election, k, rule, op_type, budget, limit)?.outcome,
    };
    Ok(matches!(outcome, RadiusOutcome::Finite(r) if r <= budget))
}

/// Radius with the exact algorithm when one exists, else the oracle.
pub fn radius(
    election: &Election,
    k: usize,
    rule: &RuleSpec,
    op_type: OpType,
    max_budget: usize,
    limit: u64,
) -> Result<RadiusOutcome> {
    match rule {
        RuleSpec::Av => av_radius(election, k, op_type),
        RuleSpec::Sav => sav_radius(election, k, op_type),
        _ => Ok(oracle_radius(election, k, rule, op_type, max_budget, limit)?.outcome),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::apply_sequence;
    use crate::rules::DEFAULT_CAP;

    fn oracle(e: &Election, k: usize, rule: &RuleSpec, op: OpType, b: usize) -> RadiusOutcome {
        oracle_radius(e, k, rule, op, b, DEFAULT_CAP).unwrap().outcome
    }

    #[test]
    fn av_gap_add() {
        // five voters, app = (4, 2)
        let e = Election::new(
            2,
            vec![vec![0, 1], vec![0, 1], vec![0], vec![0], vec![]],
        )
        .unwrap();
        assert_eq!(av_radius(&e, 1, OpType::Add).unwrap(), RadiusOutcome::Finite(2));
        assert_eq!(oracle(&e, 1, &RuleSpec::Av, OpType::Add, 4), RadiusOutcome::Finite(2));
        assert!(radius_decision(&e, 1, &RuleSpec::Av, OpType::Add, 2, DEFAULT_CAP).unwrap());
        assert!(!radius_decision(&e, 1, &RuleSpec::Av, OpType::Add, 1, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn av_tied_and_saturated() {
        let tied = Election::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert_eq!(av_radius(&tied, 1, OpType::Add).unwrap(), RadiusOutcome::Finite(1));
        let full = Election::new(3, vec![vec![0, 1, 2]; 2]).unwrap();
        assert_eq!(av_radius(&full, 1, OpType::Add).unwrap(), RadiusOutcome::Impossible);
        assert_eq!(oracle(&full, 1, &RuleSpec::Av, OpType::Add, 4), RadiusOutcome::Impossible);
        assert!(!radius_decision(&full, 1, &RuleSpec::Av, OpType::Add, 1000, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn budget_zero_never_changes() {
        let e = Election::new(3, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(oracle(&e, 1, &RuleSpec::Av, OpType::Add, 0), RadiusOutcome::ExceedsBound(0));
        assert!(!radius_decision(&e, 1, &RuleSpec::Av, OpType::Add, 0, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn sav_witnesses_have_radius_one() {
        let add = Election::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(sav_radius(&add, 3, OpType::Add).unwrap(), RadiusOutcome::Finite(1));
        let full_or_empty = Election::new(3, vec![vec![0, 1, 2], vec![]]).unwrap();
        assert_eq!(
            sav_radius(&full_or_empty, 1, OpType::Swap).unwrap(),
            RadiusOutcome::Impossible
        );
    }

    #[test]
    fn sav_tied_add_when_pool_is_saturated() {
        // both tied winners are approved by everyone; c must be approved twice
        let e = Election::new(3, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(sav_radius(&e, 1, OpType::Add).unwrap(), RadiusOutcome::Finite(2));
        assert_eq!(oracle(&e, 1, &RuleSpec::Sav, OpType::Add, 4), RadiusOutcome::Finite(2));
    }

    #[test]
    fn oracle_witness_replays() {
        let e = Election::new(3, vec![vec![0, 1], vec![0], vec![0, 2]]).unwrap();
        for op in OpType::ALL {
            let r = oracle_radius(&e, 1, &RuleSpec::Sav, op, 4, DEFAULT_CAP).unwrap();
            if let Some(w) = r.witness {
                let after = apply_sequence(&e, &w).unwrap();
                assert_ne!(
                    winners(&after, 1, &RuleSpec::Sav, DEFAULT_CAP).unwrap(),
                    winners(&e, 1, &RuleSpec::Sav, DEFAULT_CAP).unwrap()
                );
                assert_eq!(r.outcome, RadiusOutcome::Finite(w.len()));
            }
        }
    }

    #[test]
    fn scaled_and_rational_sav_agree() {
        let e = Election::new(
            4,
            vec![vec![0, 1, 2], vec![0, 3], vec![1], vec![0, 1, 2, 3]],
        )
        .unwrap();
        for op in OpType::ALL {
            for k in 1..4 {
                assert_eq!(
                    sav_radius(&e, k, op).unwrap(),
                    sav_radius_impl(&e, k, op, true).unwrap()
                );
            }
        }
    }

    #[test]
    fn outcome_json_shape() {
        assert_eq!(
            serde_json::to_string(&RadiusOutcome::Finite(2)).unwrap(),
            r#"{"outcome":"finite","value":2}"#
        );
        assert_eq!(
            serde_json::to_string(&RadiusOutcome::Impossible).unwrap(),
            r#"{"outcome":"impossible"}"#
        );
    }
}
