//! Winner computation for AV, SAV, Thiele, greedy Thiele and Phragmén.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinatorics::{binomial, Combinations};
use crate::election::{integer, rational, Committee, Election, Rational};
use crate::error::{Error, Result};

/// Default bound on the number of committees any single call may enumerate.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Thiele weight vector `ω_1..ω_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThieleVector {
    weights: Vec<Rational>,
    unit_decreasing: bool,
}

impl ThieleVector {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("weight vector is empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| w < &&Rational::zero()) {
            return Err(Error::InvalidWeights(format!("negative weight {w}")));
        }
        let unit_decreasing = weights[0].is_one()
            && weights.get(1).map_or(true, |w2| w2 < &weights[0])
            && weights.windows(2).skip(1).all(|w| w[0] >= w[1]);
        Ok(ThieleVector {
            weights,
            unit_decreasing,
        })
    }

    /// `(1, 1, ..., 1)`: Thiele form of AV.
    pub fn av(k: usize) -> Self {
        Self::new(vec![Rational::one(); k.max(1)]).expect("valid weights")
    }

    /// `(1, 0, ..., 0)`.
    pub fn cc(k: usize) -> Self {
        let mut w = vec![Rational::zero(); k.max(1)];
        w[0] = Rational::one();
        Self::new(w).expect("valid weights")
    }

    /// `(1, 1/2, ..., 1/k)`.
    pub fn pav(k: usize) -> Self {
        Self::new((1..=k.max(1)).map(|i| rational(1, i as i64)).collect()).expect("valid weights")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// `ω_1 = 1 > ω_2 ≥ ω_3 ≥ ... ≥ ω_k`.
    pub fn is_unit_decreasing(&self) -> bool {
        self.unit_decreasing
    }

    /// `p[h] = ω_1 + ... + ω_h`, with `p[0] = 0`.
    pub fn prefix_sums(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.weights.len() + 1);
        out.push(Rational::zero());
        for w in &self.weights {
            let next = out.last().unwrap() + w;
            out.push(next);
        }
        out
    }

    fn check_len(&self, k: usize) -> Result<()> {
        if self.weights.len() == k {
            Ok(())
        } else {
            Err(Error::WeightLength {
                len: self.weights.len(),
                k,
            })
        }
    }
}

/// A nonempty family of size-`k` committees.
///
/// `Threshold` means "`forced` plus any `slots` members of `pool`" and is only
/// produced with `1 <= slots < |pool|`, so two normalized thresholds denote the
/// same family exactly when their fields are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WinnerSet {
    Threshold {
        forced: Vec<usize>,
        pool: Vec<usize>,
        slots: usize,
    },
    Explicit(Vec<Committee>),
}

impl WinnerSet {
    /// Normalizing constructor for the threshold form.
    pub fn threshold(mut forced: Vec<usize>, mut pool: Vec<usize>, slots: usize) -> Result<Self> {
        forced.sort_unstable();
        pool.sort_unstable();
        if forced.iter().any(|c| pool.binary_search(c).is_ok()) {
            return Err(Error::InvalidCommittee("forced and pool overlap".into()));
        }
        if slots > pool.len() {
            return Err(Error::InvalidCommittee(format!(
                "{slots} slots but pool has {} candidates",
                pool.len()
            )));
        }
        if slots == 0 || slots == pool.len() {
            let mut all = forced;
            if slots > 0 {
                all.extend(pool);
                all.sort_unstable();
            }
            if all.is_empty() {
                return Err(Error::InvalidCommittee("empty committee".into()));
            }
            return Ok(WinnerSet::Explicit(vec![Committee::from_sorted(all)]));
        }
        Ok(WinnerSet::Threshold {
            forced,
            pool,
            slots,
        })
    }

    /// Builds an explicit family, sorting and deduplicating.
    pub fn explicit(mut committees: Vec<Committee>) -> Result<Self> {
        committees.sort();
        committees.dedup();
        let Some(k) = committees.first().map(Committee::len) else {
            return Err(Error::InvalidCommittee("empty winner family".into()));
        };
        if committees.iter().any(|c| c.len() != k) {
            return Err(Error::InvalidCommittee("mixed committee sizes".into()));
        }
        Ok(WinnerSet::Explicit(committees))
    }

    pub fn single(committee: Committee) -> Self {
        WinnerSet::Explicit(vec![committee])
    }

    /// Committee size.
    pub fn k(&self) -> usize {
        match self {
            WinnerSet::Threshold { forced, slots, .. } => forced.len() + slots,
            WinnerSet::Explicit(list) => list[0].len(),
        }
    }

    /// Number of committees in the family.
    pub fn count(&self) -> BigUint {
        match self {
            WinnerSet::Threshold { pool, slots, .. } => binomial(pool.len() as u64, *slots as u64),
            WinnerSet::Explicit(list) => BigUint::from(list.len()),
        }
    }

    pub fn is_unique(&self) -> bool {
        matches!(self, WinnerSet::Explicit(list) if list.len() == 1)
    }

    /// The only committee, when the family is a singleton.
    pub fn unique(&self) -> Option<&Committee> {
        match self {
            WinnerSet::Explicit(list) if list.len() == 1 => Some(&list[0]),
            _ => None,
        }
    }

    pub fn contains(&self, committee: &Committee) -> bool {
        match self {
            WinnerSet::Threshold {
                forced,
                pool,
                slots,
            } => {
                committee.len() == forced.len() + slots
                    && forced.iter().all(|&c| committee.contains(c))
                    && committee
                        .members()
                        .iter()
                        .all(|c| forced.binary_search(c).is_ok() || pool.binary_search(c).is_ok())
            }
            WinnerSet::Explicit(list) => list.binary_search(committee).is_ok(),
        }
    }

    /// All committees in lexicographic order; errors if there are more than `limit`.
    pub fn expand(&self, limit: u64) -> Result<Vec<Committee>> {
        match self {
            WinnerSet::Explicit(list) => Ok(list.clone()),
            WinnerSet::Threshold {
                forced,
                pool,
                slots,
            } => {
                let total = self.count();
                if total > BigUint::from(limit) {
                    return Err(Error::cap("committees in the winner family", total.to_string(), limit));
                }
                let mut out = Vec::with_capacity(total.to_usize().unwrap_or(0));
                for pick in Combinations::new(pool.len(), *slots) {
                    let mut members = forced.clone();
                    members.extend(pick.iter().map(|&i| pool[i]));
                    members.sort_unstable();
                    out.push(Committee::from_sorted(members));
                }
                out.sort();
                Ok(out)
            }
        }
    }
}

impl fmt::Display for WinnerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WinnerSet::Threshold {
                forced,
                pool,
                slots,
            } => write!(
                f,
                "{} + {slots} of {}",
                Committee::from_sorted(forced.clone()),
                Committee::from_sorted(pool.clone())
            ),
            WinnerSet::Explicit(list) => {
                for (i, c) in list.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

/// True iff both families denote the same set of committees.
///
/// Normalized thresholds are canonical, and a threshold family equals an
/// explicit list iff the sizes match and every listed committee belongs to
/// it, so no expansion is needed.
pub fn winner_sets_equal(a: &WinnerSet, b: &WinnerSet) -> bool {
    match (a, b) {
        (WinnerSet::Explicit(x), WinnerSet::Explicit(y)) => x == y,
        (WinnerSet::Threshold { .. }, WinnerSet::Threshold { .. }) => a == b,
        (t @ WinnerSet::Threshold { .. }, WinnerSet::Explicit(list))
        | (WinnerSet::Explicit(list), t @ WinnerSet::Threshold { .. }) => {
            t.count() == BigUint::from(list.len()) && list.iter().all(|c| t.contains(c))
        }
    }
}

/// The seven rules, with Thiele and greedy Thiele parameterized by `ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleSpec {
    Av,
    Sav,
    Thiele(ThieleVector),
    GreedyThiele(ThieleVector),
    Phragmen,
}

impl RuleSpec {
    /// Parses a preset name (`av`, `sav`, `cc`, `pav`, `greedy-cc`,
    /// `greedy-pav`, `phragmen`) for committee size `k`.
    pub fn from_name(name: &str, k: usize) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "av" => RuleSpec::Av,
            "sav" => RuleSpec::Sav,
            "cc" => RuleSpec::Thiele(ThieleVector::cc(k)),
            "pav" => RuleSpec::Thiele(ThieleVector::pav(k)),
            "greedy-cc" | "greedycc" => RuleSpec::GreedyThiele(ThieleVector::cc(k)),
            "greedy-pav" | "greedypav" => RuleSpec::GreedyThiele(ThieleVector::pav(k)),
            "phragmen" => RuleSpec::Phragmen,
            other => {
                return Err(Error::InvalidInstance(format!("unknown rule '{other}'")));
            }
        })
    }

    /// Short name; Thiele variants report `cc`/`pav` when the weights match.
    pub fn name(&self) -> String {
        let thiele_name = |w: &ThieleVector| {
            let k = w.len();
            if *w == ThieleVector::cc(k) {
                "cc".to_string()
            } else if *w == ThieleVector::pav(k) {
                "pav".to_string()
            } else if *w == ThieleVector::av(k) {
                "thiele-av".to_string()
            } else {
                "thiele".to_string()
            }
        };
        match self {
            RuleSpec::Av => "av".into(),
            RuleSpec::Sav => "sav".into(),
            RuleSpec::Thiele(w) => thiele_name(w),
            RuleSpec::GreedyThiele(w) => format!("greedy-{}", thiele_name(w)),
            RuleSpec::Phragmen => "phragmen".into(),
        }
    }

    /// Sequential rules always output exactly one committee.
    pub fn is_resolute(&self) -> bool {
        matches!(self, RuleSpec::GreedyThiele(_) | RuleSpec::Phragmen)
    }
}

fn threshold_family<T: Ord + Clone>(scores: &[T], k: usize) -> Result<WinnerSet> {
    let mut sorted: Vec<&T> = scores.iter().collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let kth = sorted[k - 1];
    let forced: Vec<usize> = (0..scores.len()).filter(|&c| &scores[c] > kth).collect();
    let pool: Vec<usize> = (0..scores.len()).filter(|&c| &scores[c] == kth).collect();
    let slots = k - forced.len();
    WinnerSet::threshold(forced, pool, slots)
}

/// AV or SAV winners in threshold form.
pub fn winners_separable(election: &Election, k: usize, sav: bool) -> Result<WinnerSet> {
    election.check_committee_size(k)?;
    if !sav {
        return threshold_family(&election.approval_scores(), k);
    }
    match election.sav_scaled_scores() {
        Some(scaled) => threshold_family(&scaled, k),
        None => threshold_family(&election.sav_scores(), k),
    }
}

/// Thiele score of every ballot histogram entry; `hits` indexes `prefix`.
fn thiele_score_with(
    ballots: &[(Vec<usize>, u64)],
    member: &[bool],
    prefix: &[Rational],
    k: usize,
) -> Rational {
    let mut hist = vec![0u64; k + 1];
    for (ballot, count) in ballots {
        let hits = ballot.iter().filter(|&&c| member[c]).count();
        hist[hits] += count;
    }
    hist.iter()
        .enumerate()
        .filter(|(h, &n)| *h > 0 && n > 0)
        .fold(Rational::zero(), |acc, (h, &n)| acc + &prefix[h] * integer(n))
}

/// All Thiele-optimal committees by exhaustive enumeration.
pub fn winners_thiele(
    election: &Election,
    k: usize,
    weights: &ThieleVector,
    limit: u64,
) -> Result<WinnerSet> {
    election.check_committee_size(k)?;
    weights.check_len(k)?;
    let m = election.num_candidates();
    let total = binomial(m as u64, k as u64);
    if total > BigUint::from(limit) {
        return Err(Error::cap("candidate committees", total.to_string(), limit));
    }
    let grouped = BallotProfile::from_election(election).groups;
    let prefix = weights.prefix_sums();
    let mut best: Option<Rational> = None;
    let mut winners = Vec::new();
    let mut member = vec![false; m];
    for pick in Combinations::new(m, k) {
        member.iter_mut().for_each(|x| *x = false);
        for &c in &pick {
            member[c] = true;
        }
        let score = thiele_score_with(&grouped, &member, &prefix, k);
        match best.as_ref().map(|b| score.cmp(b)) {
            Some(std::cmp::Ordering::Less) => {}
            Some(std::cmp::Ordering::Equal) => winners.push(Committee::from_sorted(pick)),
            _ => {
                best = Some(score);
                winners.clear();
                winners.push(Committee::from_sorted(pick));
            }
        }
    }
    WinnerSet::explicit(winners)
}

/// An election with identical ballots merged, used by the sequential rules.
///
/// Groups are keyed by ballot so that large gadget elections with many copies
/// of a few ballots run quickly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallotProfile {
    num_candidates: usize,
    groups: Vec<(Vec<usize>, u64)>,
    index: HashMap<Vec<usize>, usize>,
    tie_break: Vec<usize>,
}

impl BallotProfile {
    pub fn from_election(election: &Election) -> Self {
        let mut profile = BallotProfile {
            num_candidates: election.num_candidates(),
            groups: Vec::new(),
            index: HashMap::new(),
            tie_break: election.tie_break_order(),
        };
        for ballot in election.ballots() {
            profile.add_ballot(ballot.clone());
        }
        profile
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn num_voters(&self) -> u64 {
        self.groups.iter().map(|(_, n)| n).sum()
    }

    /// Distinct ballots with multiplicities, in first-seen order.
    pub fn groups(&self) -> impl Iterator<Item = (&[usize], u64)> {
        self.groups
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|(b, n)| (b.as_slice(), *n))
    }

    pub fn tie_break_order(&self) -> &[usize] {
        &self.tie_break
    }

    fn add_ballot(&mut self, ballot: Vec<usize>) {
        match self.index.get(&ballot) {
            Some(&i) => self.groups[i].1 += 1,
            None => {
                self.index.insert(ballot.clone(), self.groups.len());
                self.groups.push((ballot, 1));
            }
        }
    }

    /// Replaces one voter's ballot `old` by `new` (both sorted).
    pub fn replace_ballot(&mut self, old: &[usize], new: Vec<usize>) -> Result<()> {
        let Some(&i) = self.index.get(old) else {
            return Err(Error::InvalidElection(
                "no voter casts the ballot being replaced".into(),
            ));
        };
        if self.groups[i].1 == 0 {
            return Err(Error::InvalidElection(
                "no voter casts the ballot being replaced".into(),
            ));
        }
        if let Some(&c) = new.iter().find(|&&c| c >= self.num_candidates) {
            return Err(Error::CandidateOutOfRange {
                index: c,
                num_candidates: self.num_candidates,
            });
        }
        self.groups[i].1 -= 1;
        self.add_ballot(new);
        Ok(())
    }

    fn tie_ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.num_candidates];
        for (pos, &c) in self.tie_break.iter().enumerate() {
            ranks[c] = pos;
        }
        ranks
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k >= 1 && k <= self.num_candidates {
            Ok(())
        } else {
            Err(Error::CommitteeSize {
                k,
                num_candidates: self.num_candidates,
            })
        }
    }
}

/// Greedy Thiele on a grouped profile; returns candidates in selection order.
pub fn greedy_thiele_profile(
    profile: &BallotProfile,
    k: usize,
    weights: &ThieleVector,
) -> Result<Vec<usize>> {
    profile.check_k(k)?;
    weights.check_len(k)?;
    let m = profile.num_candidates;
    let ranks = profile.tie_ranks();
    let mut chosen = vec![false; m];
    let mut order = Vec::with_capacity(k);
    let groups: Vec<(&[usize], u64)> = profile.groups().collect();
    let mut hits = vec![0usize; groups.len()];
    for _ in 0..k {
        // per candidate, how many supporters already have h committee members
        let mut tally = vec![vec![0u64; k]; m];
        for (g, (ballot, count)) in groups.iter().enumerate() {
            for &c in *ballot {
                if !chosen[c] {
                    tally[c][hits[g]] += count;
                }
            }
        }
        let mut best: Option<(Rational, usize)> = None;
        for c in (0..m).filter(|&c| !chosen[c]) {
            let gain = tally[c]
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .fold(Rational::zero(), |acc, (h, &n)| {
                    acc + &weights.weights()[h] * integer(n)
                });
            let better = match &best {
                None => true,
                Some((b, bc)) => gain > *b || (gain == *b && ranks[c] < ranks[*bc]),
            };
            if better {
                best = Some((gain, c));
            }
        }
        let (_, pick) = best.expect("fewer than k candidates remain");
        chosen[pick] = true;
        order.push(pick);
        for (g, (ballot, _)) in groups.iter().enumerate() {
            if ballot.binary_search(&pick).is_ok() {
                hits[g] += 1;
            }
        }
    }
    Ok(order)
}

/// Greedy Thiele committee with ties broken by the election's order.
pub fn greedy_thiele(election: &Election, k: usize, weights: &ThieleVector) -> Result<Committee> {
    election.check_committee_size(k)?;
    let order = greedy_thiele_profile(&BallotProfile::from_election(election), k, weights)?;
    Committee::new(order, election.num_candidates())
}

/// One Phragmén purchase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Purchase {
    pub candidate: usize,
    /// Exact time of purchase; `None` for zero-support fill-ins.
    pub time: Option<Rational>,
}

/// Phragmén's sequential rule on a grouped profile, with purchase times.
///
/// Each group tracks the time its voters last paid; at time `τ` a voter holds
/// `τ - last_paid`. Supporters of `c` can afford it at
/// `τ_c = (1 + Σ count·last_paid) / |V(c)|`.
pub fn phragmen_profile(profile: &BallotProfile, k: usize) -> Result<Vec<Purchase>> {
    profile.check_k(k)?;
    let m = profile.num_candidates;
    let ranks = profile.tie_ranks();
    let groups: Vec<(&[usize], u64)> = profile.groups().collect();
    let mut last_paid = vec![Rational::zero(); groups.len()];
    let mut elected = vec![false; m];
    let mut purchases = Vec::with_capacity(k);
    while purchases.len() < k {
        let mut support = vec![0u64; m];
        let mut paid = vec![Rational::zero(); m];
        for (g, (ballot, count)) in groups.iter().enumerate() {
            for &c in *ballot {
                if !elected[c] {
                    support[c] += count;
                    if !last_paid[g].is_zero() {
                        paid[c] += &last_paid[g] * integer(*count);
                    }
                }
            }
        }
        let mut best: Option<(Rational, usize)> = None;
        for c in (0..m).filter(|&c| !elected[c] && support[c] > 0) {
            let tau = (Rational::one() + &paid[c]) / integer(support[c]);
            let better = match &best {
                None => true,
                Some((b, bc)) => tau < *b || (tau == *b && ranks[c] < ranks[*bc]),
            };
            if better {
                best = Some((tau, c));
            }
        }
        match best {
            Some((tau, c)) => {
                elected[c] = true;
                for (g, (ballot, _)) in groups.iter().enumerate() {
                    if ballot.binary_search(&c).is_ok() {
                        last_paid[g] = tau.clone();
                    }
                }
                purchases.push(Purchase {
                    candidate: c,
                    time: Some(tau),
                });
            }
            None => {
                for &c in &profile.tie_break {
                    if purchases.len() == k {
                        break;
                    }
                    if !elected[c] {
                        elected[c] = true;
                        purchases.push(Purchase {
                            candidate: c,
                            time: None,
                        });
                    }
                }
            }
        }
    }
    Ok(purchases)
}

/// Phragmén purchases in order, with exact times.
pub fn phragmen_with_times(election: &Election, k: usize) -> Result<Vec<Purchase>> {
    election.check_committee_size(k)?;
    phragmen_profile(&BallotProfile::from_election(election), k)
}

/// Phragmén committee.
pub fn phragmen(election: &Election, k: usize) -> Result<Committee> {
    let purchases = phragmen_with_times(election, k)?;
    Committee::new(
        purchases.into_iter().map(|p| p.candidate).collect(),
        election.num_candidates(),
    )
}

/// Winner family of any rule. `limit` bounds Thiele enumeration.
pub fn winners(election: &Election, k: usize, rule: &RuleSpec, limit: u64) -> Result<WinnerSet> {
    match rule {
        RuleSpec::Av => winners_separable(election, k, false),
        RuleSpec::Sav => winners_separable(election, k, true),
        RuleSpec::Thiele(w) => winners_thiele(election, k, w, limit),
        RuleSpec::GreedyThiele(w) => Ok(WinnerSet::single(greedy_thiele(election, k, w)?)),
        RuleSpec::Phragmen => Ok(WinnerSet::single(phragmen(election, k)?)),
    }
}

/// Winner family of a sequential rule computed on a grouped profile.
pub fn winners_profile(profile: &BallotProfile, k: usize, rule: &RuleSpec) -> Result<Committee> {
    let order = match rule {
        RuleSpec::GreedyThiele(w) => greedy_thiele_profile(profile, k, w)?,
        RuleSpec::Phragmen => phragmen_profile(profile, k)?
            .into_iter()
            .map(|p| p.candidate)
            .collect(),
        other => {
            return Err(Error::Unsupported(format!(
                "grouped profiles only run sequential rules, not {}",
                other.name()
            )))
        }
    };
    Committee::new(order, profile.num_candidates)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Voters `v_{i,j}` approve `{a_i, b_j}`; `a_i = i`, `b_j = k + j`.
    fn grid(k: usize, extra: Vec<usize>) -> Election {
        let mut ballots = Vec::new();
        for i in 0..k {
            for j in 0..k {
                ballots.push(vec![i, k + j]);
            }
        }
        ballots.push(extra);
        let order: Vec<usize> = (k..2 * k).chain(0..k).collect();
        Election::new(2 * k, ballots)
            .unwrap()
            .with_tie_break(order)
            .unwrap()
    }

    fn block(range: std::ops::Range<usize>) -> Committee {
        Committee::new(range.collect(), 100).unwrap()
    }

    fn brute_force_av(e: &Election, k: usize) -> Vec<Committee> {
        let scores = e.approval_scores();
        let mut best = 0;
        let mut out = Vec::new();
        for pick in Combinations::new(e.num_candidates(), k) {
            let s: u64 = pick.iter().map(|&c| scores[c]).sum();
            if s > best || out.is_empty() {
                best = s;
                out.clear();
            }
            if s == best {
                out.push(Committee::from_sorted(pick));
            }
        }
        out
    }

    #[test]
    fn unit_decreasing_flag() {
        assert!(ThieleVector::cc(3).is_unit_decreasing());
        assert!(ThieleVector::pav(3).is_unit_decreasing());
        assert!(!ThieleVector::av(3).is_unit_decreasing());
        assert!(ThieleVector::cc(1).is_unit_decreasing());
        let half = ThieleVector::new(vec![rational(1, 2), rational(1, 3)]).unwrap();
        assert!(!half.is_unit_decreasing());
        assert!(ThieleVector::new(vec![rational(-1, 2)]).is_err());
        let bumpy = ThieleVector::new(vec![integer(1), rational(1, 3), rational(1, 2)]).unwrap();
        assert!(!bumpy.is_unit_decreasing());
    }

    #[test]
    fn separable_single_winner() {
        let e = Election::new(3, vec![vec![0, 1], vec![0]]).unwrap();
        let w = winners_separable(&e, 1, false).unwrap();
        assert_eq!(w, WinnerSet::single(Committee::new(vec![0], 3).unwrap()));
        assert_eq!(w.expand(10).unwrap(), brute_force_av(&e, 1));
    }

    #[test]
    fn separable_total_tie() {
        let e = Election::new(4, vec![vec![], vec![]]).unwrap();
        let w = winners_separable(&e, 2, false).unwrap();
        assert_eq!(
            w,
            WinnerSet::Threshold {
                forced: vec![],
                pool: vec![0, 1, 2, 3],
                slots: 2
            }
        );
        assert_eq!(w.count(), BigUint::from(6u32));
    }

    #[test]
    fn sav_add_witness_family() {
        // v1 approves A = {0,1,2}, v2 approves B = {3,4,5}
        let e = Election::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let before = winners_separable(&e, 3, true).unwrap();
        assert_eq!(before.count(), BigUint::from(20u32));
        let after = Election::new(6, vec![vec![0, 1, 2, 3], vec![3, 4, 5]]).unwrap();
        let after = winners_separable(&after, 3, true).unwrap();
        assert_eq!(after, WinnerSet::single(block(3..6)));
        assert!(!winner_sets_equal(&before, &after));
    }

    #[test]
    fn threshold_equals_matching_explicit() {
        let t = WinnerSet::threshold(vec![], vec![0, 1, 2], 2).unwrap();
        let e = WinnerSet::explicit(vec![
            Committee::new(vec![0, 1], 3).unwrap(),
            Committee::new(vec![0, 2], 3).unwrap(),
            Committee::new(vec![1, 2], 3).unwrap(),
        ])
        .unwrap();
        assert!(winner_sets_equal(&t, &e));
        assert!(winner_sets_equal(&e, &t));
        let partial = WinnerSet::explicit(vec![
            Committee::new(vec![0, 1], 3).unwrap(),
            Committee::new(vec![0, 2], 3).unwrap(),
        ])
        .unwrap();
        assert!(!winner_sets_equal(&t, &partial));
        assert!(t.expand(2).is_err());
    }

    #[test]
    fn pav_grid_scores() {
        let k = 3;
        let e = grid(k, vec![]);
        let w = winners_thiele(&e, k, &ThieleVector::pav(k), DEFAULT_CAP).unwrap();
        assert!(w.contains(&block(k..2 * k)));
        let score = e
            .committee_score(
                &crate::election::Scoring::Thiele(ThieleVector::pav(k)),
                &block(k..2 * k),
            )
            .unwrap();
        assert_eq!(score, integer(9));
        let after = grid(k, vec![0]);
        let w = winners_thiele(&after, k, &ThieleVector::pav(k), DEFAULT_CAP).unwrap();
        assert_eq!(w, WinnerSet::single(block(0..k)));
    }

    #[test]
    fn thiele_full_committee_and_cap() {
        let e = Election::new(3, vec![vec![0]]).unwrap();
        let w = winners_thiele(&e, 3, &ThieleVector::pav(3), 10).unwrap();
        assert_eq!(w, WinnerSet::single(block(0..3)));
        let big = Election::new(30, vec![]).unwrap();
        let err = winners_thiele(&big, 15, &ThieleVector::cc(15), 1000).unwrap_err();
        assert!(err.is_cap_exceeded());
    }

    #[test]
    fn greedy_and_phragmen_on_grid() {
        for k in 2..=5 {
            let e = grid(k, vec![]);
            let e2 = grid(k, vec![0]);
            for w in [ThieleVector::cc(k), ThieleVector::pav(k)] {
                assert_eq!(greedy_thiele(&e, k, &w).unwrap(), block(k..2 * k));
                assert_eq!(greedy_thiele(&e2, k, &w).unwrap(), block(0..k));
            }
            let p = phragmen_with_times(&e, k).unwrap();
            assert_eq!(p[0].candidate, k);
            assert_eq!(p[0].time, Some(rational(1, k as i64)));
            assert_eq!(phragmen(&e, k).unwrap(), block(k..2 * k));
            let p2 = phragmen_with_times(&e2, k).unwrap();
            assert_eq!(p2[0].candidate, 0);
            assert_eq!(p2[0].time, Some(rational(1, k as i64 + 1)));
            assert_eq!(phragmen(&e2, k).unwrap(), block(0..k));
        }
    }

    #[test]
    fn greedy_cc_cover_then_tie_break() {
        // candidate 2 covers everyone; then CC gains are all zero
        let e = Election::new(4, vec![vec![0, 2], vec![1, 2], vec![2, 3]]).unwrap();
        let order = greedy_thiele_profile(
            &BallotProfile::from_election(&e),
            2,
            &ThieleVector::cc(2),
        )
        .unwrap();
        assert_eq!(order, vec![2, 0]);
    }

    #[test]
    fn phragmen_empty_ballots_fill_by_order() {
        let e = Election::new(4, vec![vec![], vec![]])
            .unwrap()
            .with_tie_break(vec![3, 1, 0, 2])
            .unwrap();
        assert_eq!(phragmen(&e, 2).unwrap(), Committee::new(vec![1, 3], 4).unwrap());
    }

    #[test]
    fn profile_replace_matches_rebuild() {
        let e = Election::new(3, vec![vec![0], vec![0], vec![1, 2]]).unwrap();
        let mut p = BallotProfile::from_election(&e);
        p.replace_ballot(&[0], vec![0, 2]).unwrap();
        let e2 = Election::new(3, vec![vec![0, 2], vec![0], vec![1, 2]]).unwrap();
        let rule = RuleSpec::GreedyThiele(ThieleVector::pav(2));
        assert_eq!(
            winners_profile(&p, 2, &rule).unwrap(),
            winners(&e2, 2, &rule, 10).unwrap().unique().unwrap().clone()
        );
        assert!(p.replace_ballot(&[2], vec![]).is_err());
    }

    #[test]
    fn rule_names_round_trip() {
        for name in ["av", "sav", "cc", "pav", "greedy-cc", "greedy-pav", "phragmen"] {
            assert_eq!(RuleSpec::from_name(name, 3).unwrap().name(), name);
        }
        assert!(RuleSpec::from_name("borda", 3).is_err());
    }
}
