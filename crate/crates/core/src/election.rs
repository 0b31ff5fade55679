//! Approval elections, committees and exact score arithmetic.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rules::ThieleVector;

/// Exact, arbitrary-precision rational number in canonical form.
pub type Rational = BigRational;

pub(crate) fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn integer(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// An approval election: `m` candidates, an ordered list of voters (each an
/// approval set), and an optional tie-breaking order over the candidates.
///
/// Candidates and voters are 0-based indices. Approval sets are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Election {
    num_candidates: usize,
    ballots: Vec<Vec<usize>>,
    tie_break: Option<Vec<usize>>,
}

impl Election {
    /// Builds an election, sorting each approval set.
    ///
    /// Rejects `m = 0`, out-of-range candidates and duplicated approvals.
    pub fn new(num_candidates: usize, ballots: Vec<Vec<usize>>) -> Result<Self> {
        if num_candidates == 0 {
            return Err(Error::InvalidElection(
                "an election needs at least one candidate".into(),
            ));
        }
        let mut ballots = ballots;
        for (voter, ballot) in ballots.iter_mut().enumerate() {
            ballot.sort_unstable();
            if let Some(&c) = ballot.iter().find(|&&c| c >= num_candidates) {
                return Err(Error::CandidateOutOfRange {
                    index: c,
                    num_candidates,
                });
            }
            if ballot.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidElection(format!(
                    "voter {voter} approves a candidate twice"
                )));
            }
        }
        Ok(Election {
            num_candidates,
            ballots,
            tie_break: None,
        })
    }

    /// Attaches a tie-breaking order (most preferred first).
    pub fn with_tie_break(mut self, order: Vec<usize>) -> Result<Self> {
        validate_permutation(&order, self.num_candidates)?;
        self.tie_break = Some(order);
        Ok(self)
    }

    /// Drops any explicit tie-breaking order.
    pub fn without_tie_break(mut self) -> Self {
        self.tie_break = None;
        self
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn num_voters(&self) -> usize {
        self.ballots.len()
    }

    pub fn ballots(&self) -> &[Vec<usize>] {
        &self.ballots
    }

    pub fn ballot(&self, voter: usize) -> Result<&[usize]> {
        self.ballots
            .get(voter)
            .map(Vec::as_slice)
            .ok_or(Error::VoterOutOfRange {
                index: voter,
                num_voters: self.ballots.len(),
            })
    }

    pub fn approves(&self, voter: usize, candidate: usize) -> bool {
        self.ballots
            .get(voter)
            .is_some_and(|b| b.binary_search(&candidate).is_ok())
    }

    /// The explicit tie-breaking order, if one was given.
    pub fn tie_break(&self) -> Option<&[usize]> {
        self.tie_break.as_deref()
    }

    /// The effective tie-breaking order; ascending indices by default.
    pub fn tie_break_order(&self) -> Vec<usize> {
        match &self.tie_break {
            Some(order) => order.clone(),
            None => (0..self.num_candidates).collect(),
        }
    }

    /// `ranks[c]` is the position of `c` in the effective tie-breaking order.
    pub fn tie_break_ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.num_candidates];
        for (pos, c) in self.tie_break_order().into_iter().enumerate() {
            ranks[c] = pos;
        }
        ranks
    }

    pub(crate) fn check_candidate(&self, c: usize) -> Result<()> {
        if c < self.num_candidates {
            Ok(())
        } else {
            Err(Error::CandidateOutOfRange {
                index: c,
                num_candidates: self.num_candidates,
            })
        }
    }

    pub(crate) fn check_voter(&self, v: usize) -> Result<()> {
        if v < self.ballots.len() {
            Ok(())
        } else {
            Err(Error::VoterOutOfRange {
                index: v,
                num_voters: self.ballots.len(),
            })
        }
    }

    pub(crate) fn check_committee_size(&self, k: usize) -> Result<()> {
        if k >= 1 && k <= self.num_candidates {
            Ok(())
        } else {
            Err(Error::CommitteeSize {
                k,
                num_candidates: self.num_candidates,
            })
        }
    }

    /// Adds `candidate` to the approval set of `voter`; returns false if it
    /// was already there.
    pub(crate) fn insert_approval(&mut self, voter: usize, candidate: usize) -> bool {
        let ballot = &mut self.ballots[voter];
        match ballot.binary_search(&candidate) {
            Ok(_) => false,
            Err(pos) => {
                ballot.insert(pos, candidate);
                true
            }
        }
    }

    pub(crate) fn remove_approval(&mut self, voter: usize, candidate: usize) -> bool {
        let ballot = &mut self.ballots[voter];
        match ballot.binary_search(&candidate) {
            Ok(pos) => {
                ballot.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// `app_E(c)`: the number of voters approving `c`.
    pub fn approval_score(&self, c: usize) -> Result<u64> {
        self.check_candidate(c)?;
        Ok(self
            .ballots
            .iter()
            .filter(|b| b.binary_search(&c).is_ok())
            .count() as u64)
    }

    pub fn approval_scores(&self) -> Vec<u64> {
        let mut scores = vec![0u64; self.num_candidates];
        for ballot in &self.ballots {
            for &c in ballot {
                scores[c] += 1;
            }
        }
        scores
    }

    /// SAV score `sum_{v approves c} 1/|A(v)|`.
    pub fn sav_score(&self, c: usize) -> Result<Rational> {
        self.check_candidate(c)?;
        let mut total = Rational::zero();
        for ballot in &self.ballots {
            if ballot.binary_search(&c).is_ok() {
                total += rational(1, ballot.len() as i64);
            }
        }
        Ok(total)
    }

    pub fn sav_scores(&self) -> Vec<Rational> {
        // Group voters by ballot size so each size costs one division.
        let mut per_size: HashMap<usize, Vec<u64>> = HashMap::new();
        for ballot in &self.ballots {
            if ballot.is_empty() {
                continue;
            }
            let counts = per_size
                .entry(ballot.len())
                .or_insert_with(|| vec![0; self.num_candidates]);
            for &c in ballot {
                counts[c] += 1;
            }
        }
        let mut scores = vec![Rational::zero(); self.num_candidates];
        for (size, counts) in per_size {
            for (c, &cnt) in counts.iter().enumerate() {
                if cnt > 0 {
                    scores[c] += Rational::new(BigInt::from(cnt), BigInt::from(size));
                }
            }
        }
        scores
    }

    /// SAV scores multiplied by the lcm of the ballot sizes, as exact integers.
    ///
    /// Returns `None` when the scaled values do not fit in `u128`; the order of
    /// the scaled scores is the order of the SAV scores.
    pub(crate) fn sav_scaled_scores(&self) -> Option<Vec<u128>> {
        let mut lcm: u128 = 1;
        let mut seen = vec![false; self.num_candidates + 1];
        for ballot in &self.ballots {
            let size = ballot.len();
            if size > 0 && !seen[size] {
                seen[size] = true;
                let g = lcm.gcd(&(size as u128));
                lcm = lcm.checked_mul(size as u128 / g)?;
            }
        }
        let mut scores = vec![0u128; self.num_candidates];
        for ballot in &self.ballots {
            if ballot.is_empty() {
                continue;
            }
            let share = lcm / ballot.len() as u128;
            for &c in ballot {
                scores[c] = scores[c].checked_add(share)?;
            }
        }
        Some(scores)
    }

    /// Score of `committee` under the given scoring function.
    pub fn committee_score(&self, scoring: &Scoring, committee: &Committee) -> Result<Rational> {
        for &c in committee.members() {
            self.check_candidate(c)?;
        }
        match scoring {
            Scoring::Av => {
                let scores = self.approval_scores();
                Ok(integer(committee.members().iter().map(|&c| scores[c]).sum()))
            }
            Scoring::Sav => {
                let scores = self.sav_scores();
                Ok(committee
                    .members()
                    .iter()
                    .fold(Rational::zero(), |acc, &c| acc + &scores[c]))
            }
            Scoring::Thiele(weights) => {
                if weights.len() != committee.len() {
                    return Err(Error::WeightLength {
                        len: weights.len(),
                        k: committee.len(),
                    });
                }
                let prefix = weights.prefix_sums();
                let mut hist = vec![0u64; committee.len() + 1];
                for ballot in &self.ballots {
                    let hits = ballot.iter().filter(|c| committee.contains(**c)).count();
                    hist[hits] += 1;
                }
                Ok(hist
                    .iter()
                    .zip(prefix.iter())
                    .filter(|(&h, _)| h > 0)
                    .fold(Rational::zero(), |acc, (&h, p)| acc + p * integer(h)))
            }
        }
    }

    /// The 0/1 approval matrix, row per voter.
    pub fn matrix(&self) -> Vec<Vec<bool>> {
        self.ballots
            .iter()
            .map(|b| {
                let mut row = vec![false; self.num_candidates];
                for &c in b {
                    row[c] = true;
                }
                row
            })
            .collect()
    }
}

pub(crate) fn validate_permutation(order: &[usize], m: usize) -> Result<()> {
    if order.len() != m {
        return Err(Error::InvalidElection(format!(
            "tie-breaking order lists {} candidates, expected {m}",
            order.len()
        )));
    }
    let mut seen = vec![false; m];
    for &c in order {
        if c >= m {
            return Err(Error::CandidateOutOfRange {
                index: c,
                num_candidates: m,
            });
        }
        if std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidElection(format!(
                "candidate {c} appears twice in the tie-breaking order"
            )));
        }
    }
    Ok(())
}

/// Committee scoring functions with additive or Thiele semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scoring {
    Av,
    Sav,
    Thiele(ThieleVector),
}

/// A sorted set of distinct candidate indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Committee(Vec<usize>);

impl Committee {
    /// Builds a committee over `num_candidates` candidates.
    pub fn new(members: Vec<usize>, num_candidates: usize) -> Result<Self> {
        let mut members = members;
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCommittee("duplicate member".into()));
        }
        if let Some(&c) = members.last() {
            if c >= num_candidates {
                return Err(Error::CandidateOutOfRange {
                    index: c,
                    num_candidates,
                });
            }
        }
        Ok(Committee(members))
    }

    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Committee(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: usize) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    /// `|self ∩ other|`.
    pub fn overlap(&self, other: &Committee) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// Renders the before/after approval matrix of two elections over the same
/// voters and candidates: `∘` approved in both, `−` only before, `+` only
/// after, blank otherwise.
pub fn render_diff_matrix(before: &Election, after: &Election) -> Result<String> {
    if before.num_candidates != after.num_candidates || before.num_voters() != after.num_voters() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{} (voters x candidates)",
            before.num_voters(),
            before.num_candidates,
            after.num_voters(),
            after.num_candidates
        )));
    }
    let m = before.num_candidates;
    let col_labels: Vec<String> = (0..m).map(|c| format!("c{c}")).collect();
    let row_labels: Vec<String> = (0..before.num_voters()).map(|v| format!("v{v}")).collect();
    let row_width = row_labels.iter().map(String::len).max().unwrap_or(1).max(1);
    let col_width = col_labels.iter().map(String::len).max().unwrap_or(1);

    let mut out = String::new();
    let mut header = format!("{:row_width$} |", "");
    for label in &col_labels {
        header.push_str(&format!(" {label:>col_width$}"));
    }
    out.push_str(header.trim_end());
    out.push('\n');
    for (v, label) in row_labels.iter().enumerate() {
        let mut line = format!("{label:row_width$} |");
        for c in 0..m {
            let symbol = match (before.approves(v, c), after.approves(v, c)) {
                (true, true) => "∘",
                (true, false) => "−",
                (false, true) => "+",
                (false, false) => " ",
            };
            line.push_str(&format!(" {symbol:>col_width$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// The diff-matrix symbol for one cell.
pub fn diff_symbol(before: bool, after: bool) -> char {
    match (before, after) {
        (true, true) => '∘',
        (true, false) => '−',
        (false, true) => '+',
        (false, false) => ' ',
    }
}
