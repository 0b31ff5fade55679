//! Add / Remove / Swap operations and robustness levels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::election::{Committee, Election};
use crate::error::{Error, Result};
use crate::rules::{winner_sets_equal, winners, RuleSpec, WinnerSet};

/// Kind of perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpType {
    Add,
    Remove,
    Swap,
}

impl OpType {
    pub const ALL: [OpType; 3] = [OpType::Add, OpType::Remove, OpType::Swap];

    pub fn name(self) -> &'static str {
        match self {
            OpType::Add => "add",
            OpType::Remove => "remove",
            OpType::Swap => "swap",
        }
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "add" => Ok(OpType::Add),
            "remove" => Ok(OpType::Remove),
            "swap" => Ok(OpType::Swap),
            other => Err(Error::InvalidInstance(format!("unknown operation '{other}'"))),
        }
    }
}

/// A single atomic change to one ballot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Operation {
    Add { voter: usize, candidate: usize },
    Remove { voter: usize, candidate: usize },
    Swap { voter: usize, from: usize, to: usize },
}

impl Operation {
    pub fn op_type(&self) -> OpType {
        match self {
            Operation::Add { .. } => OpType::Add,
            Operation::Remove { .. } => OpType::Remove,
            Operation::Swap { .. } => OpType::Swap,
        }
    }

    pub fn voter(&self) -> usize {
        match *self {
            Operation::Add { voter, .. }
            | Operation::Remove { voter, .. }
            | Operation::Swap { voter, .. } => voter,
        }
    }

    /// The operation undoing this one.
    pub fn inverse(&self) -> Operation {
        match *self {
            Operation::Add { voter, candidate } => Operation::Remove { voter, candidate },
            Operation::Remove { voter, candidate } => Operation::Add { voter, candidate },
            Operation::Swap { voter, from, to } => Operation::Swap {
                voter,
                from: to,
                to: from,
            },
        }
    }

    /// Whether the operation can be applied to `election`.
    pub fn is_feasible(&self, election: &Election) -> bool {
        self.check(election).is_ok()
    }

    fn check(&self, election: &Election) -> Result<()> {
        let voter = self.voter();
        election.check_voter(voter)?;
        let infeasible = |reason: String| {
            Err(Error::InfeasibleOperation {
                op: self.to_string(),
                position: None,
                reason,
            })
        };
        match *self {
            Operation::Add { candidate, .. } => {
                election.check_candidate(candidate)?;
                if election.approves(voter, candidate) {
                    return infeasible(format!("voter {voter} already approves {candidate}"));
                }
            }
            Operation::Remove { candidate, .. } => {
                election.check_candidate(candidate)?;
                if !election.approves(voter, candidate) {
                    return infeasible(format!("voter {voter} does not approve {candidate}"));
                }
            }
            Operation::Swap { from, to, .. } => {
                election.check_candidate(from)?;
                election.check_candidate(to)?;
                if from == to {
                    return infeasible("swap between identical candidates".into());
                }
                if !election.approves(voter, from) {
                    return infeasible(format!("voter {voter} does not approve {from}"));
                }
                if election.approves(voter, to) {
                    return infeasible(format!("voter {voter} already approves {to}"));
                }
            }
        }
        Ok(())
    }

    /// The ballot of `self.voter()` after applying the operation, assuming feasibility.
    pub fn updated_ballot(&self, ballot: &[usize]) -> Vec<usize> {
        let mut out = ballot.to_vec();
        let (drop, add) = match *self {
            Operation::Add { candidate, .. } => (None, Some(candidate)),
            Operation::Remove { candidate, .. } => (Some(candidate), None),
            Operation::Swap { from, to, .. } => (Some(from), Some(to)),
        };
        if let Some(c) = drop {
            out.retain(|&x| x != c);
        }
        if let Some(c) = add {
            let pos = out.partition_point(|&x| x < c);
            out.insert(pos, c);
        }
        out
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Add { voter, candidate } => write!(f, "add(v{voter},c{candidate})"),
            Operation::Remove { voter, candidate } => write!(f, "remove(v{voter},c{candidate})"),
            Operation::Swap { voter, from, to } => write!(f, "swap(v{voter},c{from},c{to})"),
        }
    }
}

pub(crate) fn apply_in_place(election: &mut Election, op: &Operation) -> Result<()> {
    op.check(election)?;
    match *op {
        Operation::Add { voter, candidate } => {
            election.insert_approval(voter, candidate);
        }
        Operation::Remove { voter, candidate } => {
            election.remove_approval(voter, candidate);
        }
        Operation::Swap { voter, from, to } => {
            election.remove_approval(voter, from);
            election.insert_approval(voter, to);
        }
    }
    Ok(())
}

/// A copy of `election` with `op` applied.
pub fn apply(election: &Election, op: &Operation) -> Result<Election> {
    let mut out = election.clone();
    apply_in_place(&mut out, op)?;
    Ok(out)
}

/// Applies `ops` left to right; the error names the first infeasible position.
pub fn apply_sequence(election: &Election, ops: &[Operation]) -> Result<Election> {
    let mut out = election.clone();
    for (i, op) in ops.iter().enumerate() {
        apply_in_place(&mut out, op).map_err(|e| match e {
            Error::InfeasibleOperation { op, reason, .. } => Error::InfeasibleOperation {
                op,
                position: Some(i),
                reason,
            },
            other => other,
        })?;
    }
    Ok(out)
}

/// Every feasible operation of the given type, ordered by voter then candidate.
pub fn feasible_operations(election: &Election, op_type: OpType) -> Vec<Operation> {
    let m = election.num_candidates();
    let mut ops = Vec::new();
    for (voter, ballot) in election.ballots().iter().enumerate() {
        let mut approved = vec![false; m];
        for &c in ballot {
            approved[c] = true;
        }
        match op_type {
            OpType::Add => ops.extend(
                (0..m)
                    .filter(|&c| !approved[c])
                    .map(|candidate| Operation::Add { voter, candidate }),
            ),
            OpType::Remove => ops.extend(
                ballot
                    .iter()
                    .map(|&candidate| Operation::Remove { voter, candidate }),
            ),
            OpType::Swap => {
                for &from in ballot {
                    ops.extend(
                        (0..m)
                            .filter(|&c| !approved[c])
                            .map(|to| Operation::Swap { voter, from, to }),
                    );
                }
            }
        }
    }
    ops
}

/// `max_{W' ∈ family} |W ∩ W'|` without expanding threshold families.
fn best_overlap(committee: &Committee, family: &WinnerSet) -> usize {
    match family {
        WinnerSet::Explicit(list) => list.iter().map(|w| committee.overlap(w)).max().unwrap_or(0),
        WinnerSet::Threshold {
            forced,
            pool,
            slots,
        } => {
            let in_forced = forced.iter().filter(|&&c| committee.contains(c)).count();
            let in_pool = pool.iter().filter(|&&c| committee.contains(c)).count();
            in_forced + in_pool.min(*slots)
        }
    }
}

/// `max_{W ∈ before} min_{W' ∈ after} (k − |W ∩ W'|)`.
pub fn family_displacement(before: &WinnerSet, after: &WinnerSet, limit: u64) -> Result<usize> {
    if winner_sets_equal(before, after) {
        return Ok(0);
    }
    let k = before.k();
    let worst_overlap = match before {
        WinnerSet::Explicit(list) => list
            .iter()
            .map(|w| best_overlap(w, after))
            .min()
            .unwrap_or(k),
        WinnerSet::Threshold {
            forced,
            pool,
            slots,
        } => match after {
            WinnerSet::Threshold {
                forced: f2,
                pool: p2,
                slots: s2,
            } => {
                // W = forced ∪ R with R ⊆ pool, |R| = slots; classify pool
                // members by where they sit in the new family.
                let base_f = forced.iter().filter(|c| f2.binary_search(c).is_ok()).count();
                let base_p = forced.iter().filter(|c| p2.binary_search(c).is_ok()).count();
                let pool_f = pool.iter().filter(|c| f2.binary_search(c).is_ok()).count();
                let pool_p = pool.iter().filter(|c| p2.binary_search(c).is_ok()).count();
                let pool_o = pool.len() - pool_f - pool_p;
                let mut best = usize::MAX;
                for a in 0..=pool_f.min(*slots) {
                    for b in 0..=pool_p.min(slots - a) {
                        if slots - a - b > pool_o {
                            continue;
                        }
                        best = best.min(base_f + a + (base_p + b).min(*s2));
                    }
                }
                best
            }
            WinnerSet::Explicit(_) => before
                .expand(limit)?
                .iter()
                .map(|w| best_overlap(w, after))
                .min()
                .unwrap_or(k),
        },
    };
    Ok(k - worst_overlap)
}

/// Displacement caused by a single operation.
pub fn displacement(
    election: &Election,
    k: usize,
    rule: &RuleSpec,
    op: &Operation,
    limit: u64,
) -> Result<usize> {
    let after = apply(election, op)?;
    let before = winners(election, k, rule, limit)?;
    let after = winners(&after, k, rule, limit)?;
    family_displacement(&before, &after, limit)
}

/// The worst displacement over all feasible operations of one type, with an
/// operation attaining it (`None` when no operation is feasible or none
/// changes the outcome).
pub fn empirical_robustness_level(
    election: &Election,
    k: usize,
    rule: &RuleSpec,
    op_type: OpType,
    limit: u64,
) -> Result<(usize, Option<Operation>)> {
    let before = winners(election, k, rule, limit)?;
    let mut best = (0, None);
    let mut scratch = election.clone();
    for op in feasible_operations(election, op_type) {
        apply_in_place(&mut scratch, &op)?;
        let after = winners(&scratch, k, rule, limit)?;
        apply_in_place(&mut scratch, &op.inverse())?;
        let d = family_displacement(&before, &after, limit)?;
        if d > best.0 {
            best = (d, Some(op));
            if d == k {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{ThieleVector, DEFAULT_CAP};

    fn two_voters() -> Election {
        Election::new(3, vec![vec![0, 1], vec![0]]).unwrap()
    }

    #[test]
    fn swap_reproduces_matrix_example() {
        let after = apply(&two_voters(), &Operation::Swap { voter: 0, from: 1, to: 2 }).unwrap();
        assert_eq!(after, Election::new(3, vec![vec![0, 2], vec![0]]).unwrap());
    }

    #[test]
    fn add_then_remove_is_identity() {
        let e = two_voters();
        let op = Operation::Add { voter: 1, candidate: 2 };
        let back = apply(&apply(&e, &op).unwrap(), &op.inverse()).unwrap();
        assert_eq!(back, e);
        let err = apply(&e, &Operation::Add { voter: 0, candidate: 0 }).unwrap_err();
        assert!(matches!(err, Error::InfeasibleOperation { .. }));
    }

    #[test]
    fn sequences() {
        let e = two_voters();
        assert_eq!(apply_sequence(&e, &[]).unwrap(), e);
        let two = [
            Operation::Add { voter: 1, candidate: 1 },
            Operation::Swap { voter: 1, from: 1, to: 2 },
        ];
        assert_eq!(
            apply_sequence(&e, &two).unwrap(),
            apply(&e, &Operation::Add { voter: 1, candidate: 2 }).unwrap()
        );
        let bad = [
            Operation::Remove { voter: 1, candidate: 0 },
            Operation::Remove { voter: 1, candidate: 0 },
        ];
        assert!(matches!(
            apply_sequence(&e, &bad),
            Err(Error::InfeasibleOperation { position: Some(1), .. })
        ));
    }

    #[test]
    fn feasible_counts() {
        let e = two_voters();
        assert_eq!(feasible_operations(&e, OpType::Add).len(), 3);
        assert_eq!(feasible_operations(&e, OpType::Remove).len(), 3);
        assert_eq!(feasible_operations(&e, OpType::Swap).len(), 2 + 2);
        let full = Election::new(2, vec![vec![0, 1]; 3]).unwrap();
        assert!(feasible_operations(&full, OpType::Add).is_empty());
        assert!(feasible_operations(&full, OpType::Swap).is_empty());
        let empty = Election::new(2, vec![vec![]; 3]).unwrap();
        assert!(feasible_operations(&empty, OpType::Remove).is_empty());
    }

    #[test]
    fn sav_add_witness_displaces_whole_committee() {
        let e = Election::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let op = Operation::Add { voter: 0, candidate: 3 };
        assert_eq!(displacement(&e, 3, &RuleSpec::Sav, &op, DEFAULT_CAP).unwrap(), 3);
    }

    #[test]
    fn strict_gap_op_on_loser_displaces_nothing() {
        // scores 3, 3, 0: k = 2, adding to the loser still leaves a gap of 2
        let e = Election::new(3, vec![vec![0, 1]; 3]).unwrap();
        let op = Operation::Add { voter: 0, candidate: 2 };
        assert_eq!(displacement(&e, 2, &RuleSpec::Av, &op, DEFAULT_CAP).unwrap(), 0);
    }

    #[test]
    fn compact_displacement_matches_expansion() {
        let before = WinnerSet::threshold(vec![0], vec![1, 2, 3, 4], 2).unwrap();
        let after = WinnerSet::threshold(vec![3], vec![0, 5, 6], 2).unwrap();
        let explicit_after = WinnerSet::explicit(after.expand(100).unwrap()).unwrap();
        let explicit_before = WinnerSet::explicit(before.expand(100).unwrap()).unwrap();
        let d = family_displacement(&before, &after, 100).unwrap();
        assert_eq!(d, family_displacement(&explicit_before, &explicit_after, 100).unwrap());
        assert_eq!(d, family_displacement(&before, &explicit_after, 100).unwrap());
        assert_eq!(d, family_displacement(&explicit_before, &after, 100).unwrap());
    }

    #[test]
    fn level_of_greedy_grid() {
        let k = 3;
        let mut ballots = Vec::new();
        for i in 0..k {
            for j in 0..k {
                ballots.push(vec![i, k + j]);
            }
        }
        ballots.push(vec![]);
        let order: Vec<usize> = (k..2 * k).chain(0..k).collect();
        let e = Election::new(2 * k, ballots).unwrap().with_tie_break(order).unwrap();
        let rule = RuleSpec::GreedyThiele(ThieleVector::cc(k));
        let (level, op) = empirical_robustness_level(&e, k, &rule, OpType::Add, DEFAULT_CAP).unwrap();
        assert_eq!(level, k);
        assert!(op.is_some());
    }
}
