//! Counting the sets of `B` added (or removed) approvals that leave the
//! winner family unchanged.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, pascal, Combinations};
use crate::election::{Election, Rational};
use crate::error::{Error, Result};
use crate::perturbation::{apply_in_place, feasible_operations, OpType, Operation};
use crate::rules::{winner_sets_equal, winners, RuleSpec};

/// `unchanged` of the `total` possible `B`-subsets keep the winners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountOutcome {
    pub unchanged: BigUint,
    pub total: BigUint,
}

impl CountOutcome {
    /// `unchanged / total`; `total` is at least one by construction.
    pub fn probability(&self) -> Rational {
        Rational::new(
            BigInt::from(self.unchanged.clone()),
            BigInt::from(self.total.clone()),
        )
    }

    pub fn changed(&self) -> BigUint {
        &self.total - &self.unchanged
    }
}

/// Counting method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Dp,
    Oracle,
}

fn check_op(op_type: OpType) -> Result<()> {
    if op_type == OpType::Swap {
        Err(Error::Unsupported(
            "counting is defined for additions and removals only".into(),
        ))
    } else {
        Ok(())
    }
}

/// Number of feasible cells for the operation type.
pub fn slot_count(election: &Election, op_type: OpType) -> usize {
    let approvals: usize = election.ballots().iter().map(Vec::len).sum();
    match op_type {
        OpType::Add => election.num_voters() * election.num_candidates() - approvals,
        OpType::Remove => approvals,
        OpType::Swap => feasible_operations(election, OpType::Swap).len(),
    }
}

fn total_count(election: &Election, op_type: OpType, budget: usize) -> Result<BigUint> {
    let slots = slot_count(election, op_type);
    if budget > slots {
        return Err(Error::BudgetExceedsSlots { budget, slots });
    }
    Ok(binomial(slots as u64, budget as u64))
}

/// Dynamic program over candidates sorted by score.
///
/// Final scores are bounded per candidate; `h(j, b)` counts the ways to
/// spread `b` changes over the first `j` candidates within their bounds,
/// where `d` changes to candidate `c_j` can be placed in
/// `C(slots_j, d)` ways (`slots_j = n − z_j` for additions, `z_j` for
/// removals).
#[derive(Clone, Debug)]
pub struct AvCountDp {
    n: usize,
    k: usize,
    budget: usize,
    adding: bool,
    /// Approval scores, nonincreasing.
    z: Vec<usize>,
    binom: Vec<Vec<BigUint>>,
}

/// Inclusive final-score interval; `None` when empty.
type Range = Option<(usize, usize)>;

impl AvCountDp {
    pub fn new(election: &Election, k: usize, op_type: OpType, budget: usize) -> Result<Self> {
        check_op(op_type)?;
        election.check_committee_size(k)?;
        let n = election.num_voters();
        let mut z: Vec<usize> = election
            .approval_scores()
            .into_iter()
            .map(|s| s as usize)
            .collect();
        z.sort_unstable_by(|a, b| b.cmp(a));
        Ok(AvCountDp {
            n,
            k,
            budget,
            adding: op_type == OpType::Add,
            z,
            binom: pascal(n, n),
        })
    }

    fn slots(&self, j: usize) -> usize {
        if self.adding {
            self.n - self.z[j]
        } else {
            self.z[j]
        }
    }

    /// Admissible change counts `d` for candidate `j` with final score in `range`.
    fn change_bounds(&self, j: usize, range: Range) -> Option<(usize, usize)> {
        let (lo, hi) = range?;
        let z = self.z[j];
        let (a, b) = if self.adding {
            // additions only raise the score, up to n
            (lo.saturating_sub(z), hi.min(self.n).checked_sub(z)?)
        } else {
            // removals only lower it, down to 0
            (z.checked_sub(hi.min(z))?, z.checked_sub(lo)?)
        };
        (a <= b && a <= self.slots(j)).then_some((a, b.min(self.slots(j))))
    }

    /// `h(m, B)` for per-candidate final-score ranges.
    pub fn h(&self, ranges: &[Range]) -> BigUint {
        let mut row = vec![BigUint::zero(); self.budget + 1];
        row[0] = BigUint::from(1u32);
        for (j, range) in ranges.iter().enumerate() {
            let Some((a, b)) = self.change_bounds(j, *range) else {
                return BigUint::zero();
            };
            let slots = self.slots(j);
            let mut next = vec![BigUint::zero(); self.budget + 1];
            for (spent, ways) in row.iter().enumerate() {
                if ways.is_zero() {
                    continue;
                }
                for d in a..=b.min(self.budget - spent) {
                    next[spent + d] += ways * &self.binom[slots][d];
                }
            }
            row = next;
        }
        row.swap_remove(self.budget)
    }

    fn ranges(&self, winners: Range, pool: Range, losers: Range, s: usize, t: usize) -> Vec<Range> {
        (0..self.z.len())
            .map(|j| {
                if j < s {
                    winners
                } else if j <= t {
                    pool
                } else {
                    losers
                }
            })
            .collect()
    }

    /// Positions of the first and last candidate tied with `c_k`.
    fn tied_block(&self) -> (usize, usize) {
        let zk = self.z[self.k - 1];
        let s = self.z.iter().position(|&v| v == zk).unwrap();
        let t = self.z.iter().rposition(|&v| v == zk).unwrap();
        (s, t)
    }

    pub fn is_unique(&self) -> bool {
        self.k == self.z.len() || self.z[self.k - 1] > self.z[self.k]
    }

    /// `f(ℓ, u)`: the `k` winners end with at least `ℓ` approvals and the rest
    /// with at most `u`.
    pub fn f(&self, l: usize, u: usize) -> BigUint {
        if l > self.n {
            return BigUint::zero();
        }
        let ranges = self.ranges(Some((l, self.n)), None, Some((0, u)), self.k, self.k - 1);
        self.h(&ranges)
    }

    /// `g(ℓ, u) = f(ℓ, u) − f(ℓ + 1, u)`: additionally some winner ends at
    /// exactly `ℓ`.
    pub fn g(&self, l: usize, u: usize) -> BigUint {
        self.f(l, u) - self.f(l + 1, u)
    }

    /// `g` computed directly by tracking whether some winner hit `ℓ`.
    pub fn g_direct(&self, l: usize, u: usize) -> BigUint {
        if l > self.n {
            return BigUint::zero();
        }
        // state: (changes spent, some winner ends exactly at l)
        let mut row = vec![[BigUint::zero(), BigUint::zero()]; self.budget + 1];
        row[0][0] = BigUint::from(1u32);
        for j in 0..self.z.len() {
            let winner = j < self.k;
            let range = if winner { Some((l, self.n)) } else { Some((0, u)) };
            let Some((a, b)) = self.change_bounds(j, range) else {
                return BigUint::zero();
            };
            let slots = self.slots(j);
            let mut next = vec![[BigUint::zero(), BigUint::zero()]; self.budget + 1];
            for spent in 0..=self.budget {
                for flag in 0..2 {
                    if row[spent][flag].is_zero() {
                        continue;
                    }
                    for d in a..=b.min(self.budget - spent) {
                        let end = if self.adding { self.z[j] + d } else { self.z[j] - d };
                        let hit = usize::from(flag == 1 || (winner && end == l));
                        let add = &row[spent][flag] * &self.binom[slots][d];
                        next[spent + d][hit] += add;
                    }
                }
            }
            row = next;
        }
        row[self.budget][1].clone()
    }

    /// `g'(ℓ, q, u)`: candidates above the tied block end with at least `ℓ`
    /// (some exactly `ℓ`), the tied block with exactly `q`, the rest with at
    /// most `u` (`None` forbids any remaining candidate).
    pub fn g_prime(&self, l: usize, q: usize, u: Option<usize>) -> BigUint {
        let (s, t) = self.tied_block();
        let f = |lo: usize| {
            if lo > self.n {
                return BigUint::zero();
            }
            let losers = u.map(|u| (0, u));
            self.h(&self.ranges(Some((lo, self.n)), Some((q, q)), losers, s, t))
        };
        f(l) - f(l + 1)
    }

    /// Tied block exactly `q`, rest at most `u`; no candidates above the block.
    fn block_only(&self, q: usize, u: Option<usize>) -> BigUint {
        let (s, t) = self.tied_block();
        debug_assert_eq!(s, 0);
        self.h(&self.ranges(None, Some((q, q)), u.map(|u| (0, u)), s, t))
    }

    /// The number of unchanged outcomes.
    pub fn unchanged(&self) -> BigUint {
        let m = self.z.len();
        if self.k == m {
            // every outcome keeps the single full committee
            return self.h(&vec![Some((0, self.n)); m]);
        }
        if self.is_unique() {
            return (1..=self.n).map(|l| self.g(l, l - 1)).sum();
        }
        let (s, _) = self.tied_block();
        let below = |q: usize| q.checked_sub(1);
        if s == 0 {
            (0..=self.n).map(|q| self.block_only(q, below(q))).sum()
        } else {
            let mut total = BigUint::zero();
            for l in 1..=self.n {
                for q in 0..l {
                    total += self.g_prime(l, q, below(q));
                }
            }
            total
        }
    }
}

/// Exact AV count by dynamic programming.
pub fn av_count_unchanged(
    election: &Election,
    k: usize,
    op_type: OpType,
    budget: usize,
) -> Result<CountOutcome> {
    check_op(op_type)?;
    let total = total_count(election, op_type, budget)?;
    let dp = AvCountDp::new(election, k, op_type, budget)?;
    Ok(CountOutcome {
        unchanged: dp.unchanged(),
        total,
    })
}

/// Counts by enumerating every `B`-subset of feasible cells.
pub fn oracle_count_unchanged(
    election: &Election,
    k: usize,
    rule: &RuleSpec,
    op_type: OpType,
    budget: usize,
    limit: u64,
) -> Result<CountOutcome> {
    check_op(op_type)?;
    election.check_committee_size(k)?;
    let total = total_count(election, op_type, budget)?;
    if total > BigUint::from(limit) {
        return Err(Error::cap("perturbation sets", total.to_string(), limit));
    }
    let cells: Vec<Operation> = feasible_operations(election, op_type);
    let base = winners(election, k, rule, limit)?;
    let mut unchanged: u64 = 0;
    let mut scratch = election.clone();
    for pick in Combinations::new(cells.len(), budget) {
        for &i in &pick {
            apply_in_place(&mut scratch, &cells[i])?;
        }
        if winner_sets_equal(&winners(&scratch, k, rule, limit)?, &base) {
            unchanged += 1;
        }
        for &i in &pick {
            apply_in_place(&mut scratch, &cells[i].inverse())?;
        }
    }
    Ok(CountOutcome {
        unchanged: BigUint::from(unchanged),
        total,
    })
}

/// `X / Y` by the chosen method; the dynamic program only exists for AV.
pub fn unchanged_probability(
    election: &Election,
    k: usize,
    rule: &RuleSpec,
    op_type: OpType,
    budget: usize,
    method: CountMethod,
    limit: u64,
) -> Result<Rational> {
    let outcome = match method {
        CountMethod::Dp => {
            if *rule != RuleSpec::Av {
                return Err(Error::Unsupported(format!(
                    "the counting dynamic program is only available for av, not {}",
                    rule.name()
                )));
            }
            av_count_unchanged(election, k, op_type, budget)?
        }
        CountMethod::Oracle => oracle_count_unchanged(election, k, rule, op_type, budget, limit)?,
    };
    Ok(outcome.probability())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::rational;
    use crate::rules::DEFAULT_CAP;

    fn two_c1_voters() -> Election {
        Election::new(3, vec![vec![0], vec![0]]).unwrap()
    }

    #[test]
    fn zero_budget_counts_one() {
        let e = two_c1_voters();
        for op in [OpType::Add, OpType::Remove] {
            let c = av_count_unchanged(&e, 1, op, 0).unwrap();
            assert_eq!((c.unchanged, c.total), (1u32.into(), 1u32.into()));
        }
    }

    #[test]
    fn small_add_examples() {
        let e = two_c1_voters();
        let one = av_count_unchanged(&e, 1, OpType::Add, 1).unwrap();
        assert_eq!((one.unchanged.clone(), one.total.clone()), (4u32.into(), 4u32.into()));
        assert_eq!(one.probability(), rational(1, 1));
        let two = av_count_unchanged(&e, 1, OpType::Add, 2).unwrap();
        assert_eq!((two.unchanged.clone(), two.total.clone()), (4u32.into(), 6u32.into()));
        assert_eq!(two.probability(), rational(2, 3));
        let oracle = oracle_count_unchanged(&e, 1, &RuleSpec::Av, OpType::Add, 2, DEFAULT_CAP).unwrap();
        assert_eq!(oracle, two);
    }

    #[test]
    fn g_matches_direct_flag_dp() {
        let e = Election::new(4, vec![vec![0, 1], vec![0], vec![0, 2], vec![1]]).unwrap();
        for op in [OpType::Add, OpType::Remove] {
            for b in 0..=3 {
                let dp = AvCountDp::new(&e, 1, op, b).unwrap();
                for l in 0..=4 {
                    for u in 0..=4 {
                        assert_eq!(dp.g(l, u), dp.g_direct(l, u), "{op} b={b} l={l} u={u}");
                    }
                }
            }
        }
    }

    #[test]
    fn budget_beyond_slots_and_swap_rejected() {
        let e = two_c1_voters();
        assert!(matches!(
            av_count_unchanged(&e, 1, OpType::Remove, 3),
            Err(Error::BudgetExceedsSlots { budget: 3, slots: 2 })
        ));
        assert!(matches!(
            av_count_unchanged(&e, 1, OpType::Swap, 1),
            Err(Error::Unsupported(_))
        ));
        assert!(unchanged_probability(
            &e,
            1,
            &RuleSpec::Sav,
            OpType::Add,
            1,
            CountMethod::Dp,
            DEFAULT_CAP
        )
        .is_err());
    }
}
