//! Witness elections for robustness levels, hardness gadgets, and the
//! brute-force combinatorial oracles used to check them.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::combinatorics::Combinations;
use crate::election::{integer, Election, Rational};
use crate::error::{Error, Result};
use crate::perturbation::{OpType, Operation};
use crate::rules::{phragmen_profile, greedy_thiele_profile, BallotProfile, ThieleVector};

/// Default bound on the number of voters a gadget builder may materialize.
pub const DEFAULT_VOTER_LIMIT: u64 = 2_000_000;

/// Exact cover by 3-sets: a universe `0..3k` and a family of 3-element sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct X3CInstance {
    universe: usize,
    sets: Vec<[usize; 3]>,
}

impl X3CInstance {
    pub fn new(universe: usize, sets: Vec<[usize; 3]>) -> Result<Self> {
        if universe == 0 || universe % 3 != 0 {
            return Err(Error::InvalidInstance(format!(
                "universe size {universe} is not a positive multiple of 3"
            )));
        }
        let mut sorted = Vec::with_capacity(sets.len());
        for (i, set) in sets.into_iter().enumerate() {
            let mut s = set;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] {
                return Err(Error::InvalidInstance(format!(
                    "set {i} repeats an element"
                )));
            }
            if s[2] >= universe {
                return Err(Error::InvalidInstance(format!(
                    "set {i} mentions element {} outside the universe",
                    s[2]
                )));
            }
            sorted.push(s);
        }
        Ok(X3CInstance {
            universe,
            sets: sorted,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Number of sets in a cover.
    pub fn cover_size(&self) -> usize {
        self.universe / 3
    }

    pub fn sets(&self) -> &[[usize; 3]] {
        &self.sets
    }

    /// Indices of the sets containing `element`.
    pub fn containing(&self, element: usize) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&i| self.sets[i].contains(&element))
            .collect()
    }
}

/// X3C instance with `3n` sets where every element lies in exactly three sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RX3CInstance(X3CInstance);

impl RX3CInstance {
    pub fn new(universe: usize, sets: Vec<[usize; 3]>) -> Result<Self> {
        let inner = X3CInstance::new(universe, sets)?;
        if inner.sets.len() != universe {
            return Err(Error::InvalidInstance(format!(
                "{} sets for a universe of {universe} elements",
                inner.sets.len()
            )));
        }
        let mut degree = vec![0usize; universe];
        for set in &inner.sets {
            for &e in set {
                degree[e] += 1;
            }
        }
        if let Some(e) = degree.iter().position(|&d| d != 3) {
            return Err(Error::InvalidInstance(format!(
                "element {e} lies in {} sets instead of 3",
                degree[e]
            )));
        }
        Ok(RX3CInstance(inner))
    }

    /// `n`: the universe has `3n` elements.
    pub fn n(&self) -> usize {
        self.0.universe / 3
    }

    pub fn as_x3c(&self) -> &X3CInstance {
        &self.0
    }
}

/// Bipartite graph with `left` and `right` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut sorted = edges;
        for &(u, v) in &sorted {
            if u >= left || v >= right {
                return Err(Error::InvalidInstance(format!(
                    "edge ({u}, {v}) has an endpoint out of range"
                )));
            }
        }
        let len = sorted.len();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != len {
            return Err(Error::InvalidInstance("duplicate edge".into()));
        }
        Ok(BipartiteGraph {
            left,
            right,
            edges: sorted,
        })
    }

    /// The 4-cycle `l0 - r0 - l1 - r1 - l0`.
    pub fn four_cycle() -> Self {
        Self::new(2, 2, vec![(0, 0), (0, 1), (1, 0), (1, 1)]).expect("valid graph")
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// One block of consecutive voters in a generated election.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoterGroup {
    pub label: String,
    /// Size required by the construction.
    pub expected: u64,
    /// Size actually emitted.
    pub actual: u64,
}

/// A generated election together with everything needed to check it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetBundle {
    pub election: Election,
    pub k: usize,
    pub budget: usize,
    pub op_type: OpType,
    /// An operation demonstrating the intended effect, when there is one.
    pub operation: Option<Operation>,
    pub expected: String,
    pub provenance: String,
    pub groups: Vec<VoterGroup>,
    pub candidate_labels: Vec<String>,
    pub parameters: Vec<(String, String)>,
    /// Magnitude parameters were overridden.
    pub non_canonical: bool,
    /// The baseline already selects `p`, so a reduction would output the
    /// fixed yes-instance instead of this election.
    pub shortcut: Option<Election>,
    pub expected_count: Option<BigUint>,
    pub count_formula: Option<String>,
}

impl GadgetBundle {
    /// Every voter group has exactly the required size.
    pub fn audit(&self) -> bool {
        self.groups.iter().all(|g| g.expected == g.actual)
            && self.groups.iter().map(|g| g.actual).sum::<u64>()
                == self.election.num_voters() as u64
    }

    /// Index of the candidate with this label.
    pub fn candidate(&self, label: &str) -> Option<usize> {
        self.candidate_labels.iter().position(|l| l == label)
    }

    /// Voter range of the group with this label.
    pub fn group_range(&self, label: &str) -> Option<std::ops::Range<usize>> {
        let mut start = 0usize;
        for g in &self.groups {
            if g.label == label {
                return Some(start..start + g.actual as usize);
            }
            start += g.actual as usize;
        }
        None
    }
}

/// Accumulates voter groups while building a gadget.
struct Builder {
    ballots: Vec<Vec<usize>>,
    groups: Vec<VoterGroup>,
    limit: u64,
}

impl Builder {
    fn new(limit: u64) -> Self {
        Builder {
            ballots: Vec::new(),
            groups: Vec::new(),
            limit,
        }
    }

    fn reserve(&self, extra: u64) -> Result<()> {
        let total = self.ballots.len() as u64 + extra;
        if total > self.limit {
            return Err(Error::TooLarge(format!(
                "gadget needs more than {} voters",
                self.limit
            )));
        }
        Ok(())
    }

    /// Emits a group; `expected` is the closed-form size it must match.
    fn group(
        &mut self,
        label: impl Into<String>,
        expected: u64,
        ballots: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<()> {
        self.reserve(expected)?;
        let before = self.ballots.len();
        for b in ballots {
            self.ballots.push(b);
            if self.ballots.len() as u64 > self.limit {
                return Err(Error::TooLarge(format!(
                    "gadget needs more than {} voters",
                    self.limit
                )));
            }
        }
        self.groups.push(VoterGroup {
            label: label.into(),
            expected,
            actual: (self.ballots.len() - before) as u64,
        });
        Ok(())
    }

    fn repeat(
        &mut self,
        label: impl Into<String>,
        expected: u64,
        count: u64,
        ballot: Vec<usize>,
    ) -> Result<()> {
        self.reserve(count)?;
        self.group(label, expected, (0..count).map(|_| ballot.clone()))
    }
}

fn bundle(
    election: Election,
    k: usize,
    budget: usize,
    op_type: OpType,
    provenance: &str,
    expected: &str,
) -> GadgetBundle {
    GadgetBundle {
        election,
        k,
        budget,
        op_type,
        operation: None,
        expected: expected.to_string(),
        provenance: provenance.to_string(),
        groups: Vec::new(),
        candidate_labels: Vec::new(),
        parameters: Vec::new(),
        non_canonical: false,
        shortcut: None,
        expected_count: None,
        count_formula: None,
    }
}

fn labels(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

fn check_witness_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::InvalidInstance(format!(
            "witness elections need k >= 2, got {k}"
        )))
    } else {
        Ok(())
    }
}

/// SAV add witness: `v1` approves `A`, `v2` approves `B`; adding `b1` to
/// `v1` makes `B` the unique winner.
pub fn sav_add_witness(k: usize) -> Result<GadgetBundle> {
    check_witness_k(k)?;
    let a: Vec<usize> = (0..k).collect();
    let b: Vec<usize> = (k..2 * k).collect();
    let election = Election::new(2 * k, vec![a, b])?;
    let mut out = bundle(
        election,
        k,
        1,
        OpType::Add,
        "SAV add-robustness witness",
        "every size-k committee ties; after the addition B is the unique winner",
    );
    out.operation = Some(Operation::Add {
        voter: 0,
        candidate: k,
    });
    out.candidate_labels = labels("a", k).chain(labels("b", k)).collect();
    out.groups = vec![
        VoterGroup {
            label: "v1".into(),
            expected: 1,
            actual: 1,
        },
        VoterGroup {
            label: "v2".into(),
            expected: 1,
            actual: 1,
        },
    ];
    Ok(out)
}

/// SAV remove witness over `{s} ∪ A ∪ B ∪ C ∪ D` with `|A| = k`,
/// `|B| = k − 1`, `|C| = |D| = k + 3`; removing `s` from `v1` leaves `A` as
/// the unique winner.
pub fn sav_remove_witness(k: usize) -> Result<GadgetBundle> {
    check_witness_k(k)?;
    let s = 0;
    let a: Vec<usize> = (1..=k).collect();
    let b: Vec<usize> = (k + 1..2 * k).collect();
    let c: Vec<usize> = (2 * k..3 * k + 3).collect();
    let d: Vec<usize> = (3 * k + 3..4 * k + 6).collect();
    let m = 4 * k + 6;
    let v1: Vec<usize> = std::iter::once(s).chain(a.iter().copied()).collect();
    let v2: Vec<usize> = b.iter().chain(&c).copied().collect();
    let v3: Vec<usize> = b.iter().chain(&d).copied().collect();
    let election = Election::new(m, vec![v1, v2, v3])?;
    let mut out = bundle(
        election,
        k,
        1,
        OpType::Remove,
        "SAV remove-robustness witness",
        "B plus s is among the winners; after the removal A is the unique winner",
    );
    out.operation = Some(Operation::Remove {
        voter: 0,
        candidate: s,
    });
    out.candidate_labels = std::iter::once("s".to_string())
        .chain(labels("a", k))
        .chain(labels("b", k - 1))
        .chain(labels("c", k + 3))
        .chain(labels("d", k + 3))
        .collect();
    out.groups = ["v1", "v2", "v3"]
        .iter()
        .map(|l| VoterGroup {
            label: l.to_string(),
            expected: 1,
            actual: 1,
        })
        .collect();
    Ok(out)
}

/// The grid election: `v^s` first, then `v_{i,j}` approving `{a_i, b_j}`.
/// Candidates are `a_1..a_k` then `b_1..b_k`; ties are broken
/// `b_1 ≻ … ≻ b_k ≻ a_1 ≻ … ≻ a_k`.
pub fn thiele_witness(k: usize, op_type: OpType) -> Result<GadgetBundle> {
    check_witness_k(k)?;
    let (a1, b1) = (0, k);
    let (special, operation) = match op_type {
        OpType::Add => (
            vec![],
            Operation::Add {
                voter: 0,
                candidate: a1,
            },
        ),
        OpType::Remove => (
            vec![a1, b1],
            Operation::Remove {
                voter: 0,
                candidate: b1,
            },
        ),
        OpType::Swap => (
            vec![b1],
            Operation::Swap {
                voter: 0,
                from: b1,
                to: a1,
            },
        ),
    };
    let mut b = Builder::new(u64::MAX);
    b.group("v^s", 1, [special])?;
    let grid = (0..k).flat_map(|i| (0..k).map(move |j| vec![i, k + j]));
    b.group("v_ij", (k * k) as u64, grid)?;
    let order: Vec<usize> = (k..2 * k).chain(0..k).collect();
    let election = Election::new(2 * k, b.ballots)?.with_tie_break(order)?;
    let mut out = bundle(
        election,
        k,
        1,
        op_type,
        "unit-decreasing Thiele robustness-level witness (also greedy Thiele and Phragmen)",
        "B wins before the operation; A is the unique winner after it",
    );
    out.groups = b.groups;
    out.operation = Some(operation);
    out.candidate_labels = labels("a", k).chain(labels("b", k)).collect();
    Ok(out)
}

/// `⌈3 / (1 − α)⌉`.
pub fn x3c_ell(alpha: &Rational) -> Result<u64> {
    if alpha < &Rational::zero() || alpha >= &Rational::one() {
        return Err(Error::InvalidInstance(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    let value = integer(3) / (Rational::one() - alpha);
    value
        .ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::TooLarge("ell does not fit in 64 bits".into()))
}

/// Gadget for unit-decreasing Thiele rules with `ω_2 = α`: element voters,
/// the mutual exclusion block `W`, the balancing block `W^a`, and control
/// voters `Z` (two for swaps, one otherwise). Candidates are the set
/// candidates `a_1..a_m` followed by `b_1..b_k`.
pub fn x3c_to_thiele(inst: &X3CInstance, alpha: &Rational, op_type: OpType) -> Result<GadgetBundle> {
    x3c_to_thiele_with(inst, alpha, op_type, DEFAULT_VOTER_LIMIT)
}

pub fn x3c_to_thiele_with(
    inst: &X3CInstance,
    alpha: &Rational,
    op_type: OpType,
    voter_limit: u64,
) -> Result<GadgetBundle> {
    let ell = x3c_ell(alpha)?;
    let m = inst.sets.len();
    let k = inst.cover_size();
    if m < k {
        return Err(Error::InvalidInstance(format!(
            "{m} sets cannot cover a universe of {} elements",
            inst.universe
        )));
    }
    let a = |i: usize| i;
    let b = |j: usize| m + j;
    let mut builder = Builder::new(voter_limit);
    let elements = (0..inst.universe).map(|e| {
        let mut ballot: Vec<usize> = inst.containing(e).into_iter().map(a).collect();
        ballot.push(b(e / 3));
        ballot
    });
    builder.group("element voters", (3 * k) as u64, elements)?;
    builder.reserve((m * k) as u64 * ell)?;
    let w = (0..m).flat_map(|i| (0..k).flat_map(move |j| (0..ell).map(move |_| vec![a(i), b(j)])));
    builder.group("W", (m * k) as u64 * ell, w)?;
    builder.reserve((m * (m - k)) as u64 * ell)?;
    let wa = (0..m).flat_map(|i| (0..m - k).flat_map(move |_| (0..ell).map(move |_| vec![a(i)])));
    builder.group("W^a", (m * (m - k)) as u64 * ell, wa)?;
    let z_count = if op_type == OpType::Swap { 2 } else { 1 };
    builder.repeat("Z", z_count, z_count, vec![b(0)])?;

    let first_z = builder.ballots.len() - z_count as usize;
    let election = Election::new(m + k, builder.ballots)?;
    let cover = solve_exact_cover(inst)?;
    let operation = cover.as_ref().map(|c| {
        let target = a(c[0]);
        match op_type {
            OpType::Swap => Operation::Swap {
                voter: first_z + 1,
                from: b(0),
                to: target,
            },
            OpType::Add => Operation::Add {
                voter: first_z,
                candidate: target,
            },
            OpType::Remove => Operation::Remove {
                voter: first_z,
                candidate: b(0),
            },
        }
    });
    let mut out = bundle(
        election,
        k,
        1,
        op_type,
        "unit-decreasing Thiele radius hardness (exact cover by 3-sets)",
        "B is the unique winner; one operation changes the winners iff an exact cover exists",
    );
    out.groups = builder.groups;
    out.operation = operation;
    out.candidate_labels = labels("a", m).chain(labels("b", k)).collect();
    out.parameters = vec![
        ("alpha".into(), alpha.to_string()),
        ("ell".into(), ell.to_string()),
        ("cover_exists".into(), cover.is_some().to_string()),
    ];
    Ok(out)
}

/// Which greedy Thiele rule a gadget targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyKind {
    Cc,
    Pav,
}

impl GreedyKind {
    pub fn weights(self, k: usize) -> ThieleVector {
        match self {
            GreedyKind::Cc => ThieleVector::cc(k),
            GreedyKind::Pav => ThieleVector::pav(k),
        }
    }
}

/// Appends the operation-specific tail: `n` empty voters (add), `3n`
/// single-set voters (remove) or `n` voters each with a private dummy
/// (swap). Returns the budget and number of dummy candidates.
fn reduction_tail(builder: &mut Builder, n: usize, op_type: OpType, dummy_start: usize) -> Result<(usize, usize)> {
    match op_type {
        OpType::Add => {
            builder.repeat("empty voters", n as u64, n as u64, vec![])?;
            Ok((n, 0))
        }
        OpType::Remove => {
            builder.group("single-set voters", (3 * n) as u64, (0..3 * n).map(|i| vec![i]))?;
            Ok((2 * n, 0))
        }
        OpType::Swap => {
            builder.group("dummy voters", n as u64, (0..n).map(|i| vec![dummy_start + i]))?;
            Ok((n, n))
        }
    }
}

/// The fixed yes-instance the reductions output when the baseline already
/// selects `p`: one voter, two candidates, `k = 1`, budget 1.
pub fn canonical_yes_instance(op_type: OpType) -> Election {
    let ballot = match op_type {
        OpType::Add => vec![],
        OpType::Remove => vec![1],
        OpType::Swap => vec![0],
    };
    Election::new(2, vec![ballot]).expect("valid election")
}

fn parse_overrides(
    canonical: (u64, u64),
    overrides: Option<(u64, u64)>,
) -> (u64, u64, bool) {
    match overrides {
        Some(pair) if pair != canonical => (pair.0, pair.1, true),
        _ => (canonical.0, canonical.1, false),
    }
}

/// GreedyCC / GreedyPAV gadget. Candidates: `S_1..S_3n`, `p`, `d`, then any
/// dummies. Canonical magnitudes are `T = 10n⁵`, `t = 10n³`.
pub fn rx3c_to_greedy(
    inst: &RX3CInstance,
    kind: GreedyKind,
    op_type: OpType,
    overrides: Option<(u64, u64)>,
) -> Result<GadgetBundle> {
    rx3c_to_greedy_with(inst, kind, op_type, overrides, DEFAULT_VOTER_LIMIT)
}

pub fn rx3c_to_greedy_with(
    inst: &RX3CInstance,
    kind: GreedyKind,
    op_type: OpType,
    overrides: Option<(u64, u64)>,
    voter_limit: u64,
) -> Result<GadgetBundle> {
    let n = inst.n();
    let nn = n as u64;
    let (big_t, small_t, non_canonical) =
        parse_overrides((10 * nn.pow(5), 10 * nn.pow(3)), overrides);
    if kind == GreedyKind::Pav && ((nn * big_t) % 2 != 0 || (3 * nn * small_t) % 2 != 0) {
        return Err(Error::InvalidInstance(
            "nT and 3nt must be even for the GreedyPAV gadget".into(),
        ));
    }
    let sets = 3 * n;
    let (p, d) = (sets, sets + 1);
    let mut b = Builder::new(voter_limit);
    for i in 0..sets {
        b.repeat(format!("S{} voters", i + 1), big_t, big_t, vec![i])?;
    }
    let pairs = (sets * (sets - 1) / 2) as u64;
    b.reserve(pairs * big_t)?;
    let pair_ballots = Combinations::new(sets, 2).flat_map(|pair| (0..big_t).map(move |_| pair.clone()));
    b.group("set-pair voters", pairs * big_t, pair_ballots)?;
    let pd = match kind {
        GreedyKind::Cc => 2 * nn * big_t + 4 * nn * small_t,
        GreedyKind::Pav => 2 * nn * big_t + nn * big_t / 2 + 4 * nn * small_t,
    };
    b.repeat("p/d voters", pd, pd, vec![p, d])?;
    b.reserve(3 * nn * small_t)?;
    let x3c = inst.as_x3c();
    let universe = (0..x3c.universe).flat_map(|e| {
        let mut ballot = x3c.containing(e);
        ballot.push(d);
        (0..small_t).map(move |_| ballot.clone())
    });
    b.group("universe voters", 3 * nn * small_t, universe)?;
    if kind == GreedyKind::Pav {
        let count = 3 * nn * small_t / 2;
        b.repeat("p voters", count, count, vec![p])?;
    }
    let (budget, dummies) = reduction_tail(&mut b, n, op_type, sets + 2)?;
    let m = sets + 2 + dummies;
    let order: Vec<usize> = (0..m).collect();
    let election = Election::new(m, b.ballots)?.with_tie_break(order)?;
    let k = sets + 1;
    let committee = greedy_thiele_profile(&BallotProfile::from_election(&election), k, &kind.weights(k))?;
    let (name, provenance) = match kind {
        GreedyKind::Cc => ("GreedyCC", "GreedyCC radius hardness (restricted exact cover by 3-sets)"),
        GreedyKind::Pav => ("GreedyPAV", "GreedyPAV radius hardness (restricted exact cover by 3-sets)"),
    };
    let mut out = bundle(
        election,
        k,
        budget,
        op_type,
        provenance,
        &format!("{name} selects every set candidate plus d unless its first n picks form an exact cover"),
    );
    out.groups = b.groups;
    out.candidate_labels = labels("S", sets)
        .chain(["p".to_string(), "d".to_string()])
        .chain(labels("x", dummies))
        .collect();
    out.parameters = vec![
        ("T".into(), big_t.to_string()),
        ("t".into(), small_t.to_string()),
        ("n".into(), n.to_string()),
    ];
    out.non_canonical = non_canonical;
    if committee.contains(&p) {
        out.shortcut = Some(canonical_yes_instance(op_type));
    }
    Ok(out)
}

/// Phragmén gadget with `T = 900n¹²`, `t = 30n⁵`. Candidates: `S_1..S_3n`,
/// `p`, `d`, then any dummies; ties `S_1 ≻ … ≻ S_3n ≻ d ≻ p`.
pub fn rx3c_to_phragmen(
    inst: &RX3CInstance,
    op_type: OpType,
    overrides: Option<(u64, u64)>,
    voter_limit: u64,
) -> Result<GadgetBundle> {
    let n = inst.n();
    let nn = n as u64;
    let canonical = (
        900u64.checked_mul(nn.checked_pow(12).unwrap_or(u64::MAX)),
        30 * nn.pow(5),
    );
    let Some(canonical_t) = canonical.0 else {
        return Err(Error::TooLarge(format!("T = 900n^12 overflows for n = {n}")));
    };
    let (big_t, small_t, non_canonical) = parse_overrides((canonical_t, canonical.1), overrides);
    if small_t % (6 * nn) != 0 {
        return Err(Error::InvalidInstance("t must be divisible by 6n".into()));
    }
    let t2 = small_t
        .checked_mul(small_t)
        .ok_or_else(|| Error::TooLarge("t^2 overflows".into()))?;
    let sets = 3 * n;
    let (p, d) = (sets, sets + 1);
    let mut b = Builder::new(voter_limit);
    for i in 0..sets {
        b.repeat(format!("S{} voters", i + 1), big_t, big_t, vec![i])?;
    }
    let x3c = inst.as_x3c();
    let with_d = small_t / (3 * nn);
    b.reserve(3 * nn * t2)?;
    let universe = (0..x3c.universe).flat_map(|e| {
        let base = x3c.containing(e);
        let mut plus_d = base.clone();
        plus_d.push(d);
        (0..t2).map(move |i| if i < with_d { plus_d.clone() } else { base.clone() })
    });
    b.group("universe voters", 3 * nn * t2, universe)?;
    let pd = big_t + 3 * t2 - 2 * small_t;
    b.repeat("p/d voters", pd, pd, vec![p, d])?;
    let p_only = small_t / (6 * nn);
    b.repeat("p voters", p_only, p_only, vec![p])?;
    let (budget, dummies) = reduction_tail(&mut b, n, op_type, sets + 2)?;
    let m = sets + 2 + dummies;
    let order: Vec<usize> = (0..sets).chain([d, p]).chain(sets + 2..m).collect();
    let election = Election::new(m, b.ballots)?.with_tie_break(order)?;
    let k = sets + 1;
    let committee = phragmen_profile(&BallotProfile::from_election(&election), k)?;
    let mut out = bundle(
        election,
        k,
        budget,
        op_type,
        "Phragmen radius hardness (restricted exact cover by 3-sets)",
        "Phragmen selects every set candidate plus d unless the purchases at time A form an exact cover",
    );
    out.groups = b.groups;
    out.candidate_labels = labels("S", sets)
        .chain(["p".to_string(), "d".to_string()])
        .chain(labels("x", dummies))
        .collect();
    out.parameters = vec![
        ("T".into(), big_t.to_string()),
        ("t".into(), small_t.to_string()),
        ("n".into(), n.to_string()),
    ];
    out.non_canonical = non_canonical;
    if committee.iter().any(|purchase| purchase.candidate == p) {
        out.shortcut = Some(canonical_yes_instance(op_type));
    }
    Ok(out)
}

/// Closed-form time points of the Phragmén gadget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhragmenTimepoints {
    pub big_t: BigInt,
    pub small_t: BigInt,
    /// First purchase: `1 / (T + 3t²)`.
    pub a: Rational,
    /// `p/d` voters alone can pay: `1 / (T + 3t² − 2t)`.
    pub b_pd: Rational,
    /// `p` affordable: `1 / (T + 3t² − 2t + t/6n)`.
    pub b_p: Rational,
    /// `d` affordable when a `d`-universe block kept its money:
    /// `1 / (T + 3t² − 2t + t/3n)`.
    pub b_d: Rational,
    /// Earliest purchase of a set candidate missed at `A`: `A + A²t²`.
    pub c: Rational,
    /// All set candidates affordable: `1 / T`.
    pub d: Rational,
    /// Money of `d`'s supporters at `B_p` after an exact cover at `A`.
    pub x: Rational,
}

impl PhragmenTimepoints {
    pub fn ordering_holds(&self) -> bool {
        self.a < self.b_pd && self.b_pd < self.c && self.c < self.d
    }

    pub fn d_before_p(&self) -> bool {
        self.b_d < self.b_p
    }

    pub fn money_bound_holds(&self) -> bool {
        self.x < Rational::one()
    }
}

pub fn phragmen_reduction_timepoints(n: u64) -> Result<PhragmenTimepoints> {
    if n == 0 {
        return Err(Error::InvalidInstance("n must be positive".into()));
    }
    let nb = BigInt::from(n);
    let big_t = BigInt::from(900u32) * Pow::pow(&nb, 12u32);
    let small_t = BigInt::from(30u32) * Pow::pow(&nb, 5u32);
    let t = Rational::from_integer(small_t.clone());
    let m = Rational::from_integer(&big_t + BigInt::from(3u32) * &small_t * &small_t);
    let two_t = &t * integer(2);
    let six_n = integer(6 * n);
    let three_n = integer(3 * n);
    let a = m.recip();
    let b_pd = (&m - &two_t).recip();
    let b_p = (&m - &two_t + &t / &six_n).recip();
    let b_d = (&m - &two_t + &t / &three_n).recip();
    let c = &a + &a * &a * &t * &t;
    let d = Rational::from_integer(big_t.clone()).recip();
    let x = (&m - &two_t) * &b_p + &t * (&b_p - &a);
    Ok(PhragmenTimepoints {
        big_t,
        small_t,
        a,
        b_pd,
        b_p,
        b_d,
        c,
        d,
        x,
    })
}

/// SAV counting gadget: edge voters approve both endpoints plus dummies,
/// filler voters top every vertex candidate up to SAV score 2. In add mode
/// ballots have `n` approvals; in remove mode `n²`. Vertex candidates are
/// left `0..n`, right `n..2n`; dummies follow, private to each voter.
pub fn matching_to_sav_counting(graph: &BipartiteGraph, op_type: OpType) -> Result<GadgetBundle> {
    if graph.left != graph.right {
        return Err(Error::InvalidInstance(format!(
            "unbalanced graph: {} left and {} right vertices",
            graph.left, graph.right
        )));
    }
    let n = graph.left;
    if n < 2 {
        return Err(Error::InvalidInstance("the gadget needs n >= 2".into()));
    }
    let size = match op_type {
        OpType::Add => n,
        OpType::Remove => n * n,
        OpType::Swap => {
            return Err(Error::Unsupported(
                "the matching gadget counts additions or removals".into(),
            ))
        }
    };
    let mut degree = vec![0usize; 2 * n];
    for &(u, v) in &graph.edges {
        degree[u] += 1;
        degree[n + v] += 1;
    }
    if let Some(x) = degree.iter().position(|&deg| deg > 2 * size) {
        return Err(Error::InvalidInstance(format!(
            "vertex {x} has too many edges for the gadget"
        )));
    }
    let mut next_dummy = 2 * n;
    let mut fresh = |count: usize| {
        let out: Vec<usize> = (next_dummy..next_dummy + count).collect();
        next_dummy += count;
        out
    };
    let mut b = Builder::new(DEFAULT_VOTER_LIMIT);
    let mut edge_ballots = Vec::new();
    for &(u, v) in &graph.edges {
        let mut ballot = vec![u, n + v];
        ballot.extend(fresh(size - 2));
        edge_ballots.push(ballot);
    }
    b.group("edge voters", graph.edges.len() as u64, edge_ballots)?;
    let mut filler = Vec::new();
    for (x, deg) in degree.iter().enumerate() {
        for _ in 0..2 * size - deg {
            let mut ballot = vec![x];
            ballot.extend(fresh(size - 1));
            filler.push(ballot);
        }
    }
    let filler_expected: u64 = degree.iter().map(|deg| (2 * size - deg) as u64).sum();
    b.group("filler voters", filler_expected, filler)?;
    let m = next_dummy;
    let dummies = m - 2 * n;
    let election = Election::new(m, b.ballots)?;
    let matchings = count_perfect_matchings(graph)?;
    let (per_matching, formula) = match op_type {
        OpType::Add => (dummies - (n - 2), "M * (|D| - (n - 2))^n"),
        _ => (n * n - 2, "M * (n^2 - 2)^n"),
    };
    let expected = &matchings * Pow::pow(BigUint::from(per_matching), n as u32);
    let mut out = bundle(
        election,
        1,
        n,
        op_type,
        "SAV counting hardness (perfect matchings)",
        "the winners are exactly the singletons of vertex candidates",
    );
    out.groups = b.groups;
    out.candidate_labels = labels("u", n)
        .chain(labels("v", n))
        .chain(labels("x", dummies))
        .collect();
    out.parameters = vec![
        ("n".into(), n.to_string()),
        ("dummies".into(), dummies.to_string()),
        ("matchings".into(), matchings.to_string()),
    ];
    out.expected_count = Some(expected);
    out.count_formula = Some(formula.into());
    Ok(out)
}

/// Some exact cover (sorted set indices), by backtracking on the smallest
/// uncovered element.
pub fn solve_exact_cover(inst: &X3CInstance) -> Result<Option<Vec<usize>>> {
    if inst.universe > 128 {
        return Err(Error::TooLarge(format!(
            "universe of {} elements",
            inst.universe
        )));
    }
    let masks: Vec<u128> = inst
        .sets
        .iter()
        .map(|s| s.iter().fold(0u128, |acc, &e| acc | 1 << e))
        .collect();
    let full: u128 = if inst.universe == 128 {
        u128::MAX
    } else {
        (1u128 << inst.universe) - 1
    };
    let mut by_element: Vec<Vec<usize>> = vec![Vec::new(); inst.universe];
    for (i, s) in inst.sets.iter().enumerate() {
        for &e in s {
            by_element[e].push(i);
        }
    }
    fn search(
        covered: u128,
        full: u128,
        masks: &[u128],
        by_element: &[Vec<usize>],
        chosen: &mut Vec<usize>,
    ) -> bool {
        if covered == full {
            return true;
        }
        let e = (!covered).trailing_zeros() as usize;
        for &i in &by_element[e] {
            if masks[i] & covered == 0 {
                chosen.push(i);
                if search(covered | masks[i], full, masks, by_element, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if search(0, full, &masks, &by_element, &mut chosen) {
        chosen.sort_unstable();
        Ok(Some(chosen))
    } else {
        Ok(None)
    }
}

/// Number of perfect matchings, by dynamic programming over subsets of
/// right vertices.
pub fn count_perfect_matchings(graph: &BipartiteGraph) -> Result<BigUint> {
    if graph.left != graph.right {
        return Ok(BigUint::zero());
    }
    let n = graph.left;
    if n > 24 {
        return Err(Error::TooLarge(format!("{n} vertices per side")));
    }
    let mut adj = vec![0u32; n];
    for &(u, v) in &graph.edges {
        adj[u] |= 1 << v;
    }
    // ways[mask]: matchings of the first popcount(mask) left vertices onto mask
    let mut ways = vec![BigUint::zero(); 1 << n];
    ways[0] = BigUint::one();
    for mask in 0usize..1 << n {
        if ways[mask].is_zero() {
            continue;
        }
        let u = mask.count_ones() as usize;
        if u == n {
            continue;
        }
        let mut free = adj[u] as usize & !mask;
        while free != 0 {
            let bit = free & free.wrapping_neg();
            let add = ways[mask].clone();
            ways[mask | bit] += add;
            free &= free - 1;
        }
    }
    Ok(ways[(1 << n) - 1].clone())
}

/// The first RX3C instance on `3n` elements (sets in lexicographic order of
/// their index tuples) that has no exact cover. Sets are distinct.
pub fn find_rx3c_without_cover(n: usize) -> Result<Option<RX3CInstance>> {
    if n == 0 || n > 2 {
        return Err(Error::TooLarge(format!(
            "exhaustive search is only run for n <= 2, got {n}"
        )));
    }
    let universe = 3 * n;
    let triples: Vec<[usize; 3]> = Combinations::new(universe, 3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    for pick in Combinations::new(triples.len(), universe) {
        let mut degree = vec![0usize; universe];
        for &i in &pick {
            for &e in &triples[i] {
                degree[e] += 1;
            }
        }
        if degree.iter().any(|&d| d != 3) {
            continue;
        }
        let sets: Vec<[usize; 3]> = pick.iter().map(|&i| triples[i]).collect();
        let inst = RX3CInstance::new(universe, sets)?;
        if solve_exact_cover(inst.as_x3c())?.is_none() {
            return Ok(Some(inst));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::rational;

    fn small_cover() -> X3CInstance {
        X3CInstance::new(
            6,
            vec![[0, 1, 2], [2, 3, 4], [3, 4, 5], [1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn exact_cover_examples() {
        assert_eq!(solve_exact_cover(&small_cover()).unwrap(), Some(vec![0, 2]));
        let shared = X3CInstance::new(6, vec![[0, 1, 2], [0, 3, 4], [0, 4, 5]]).unwrap();
        assert_eq!(solve_exact_cover(&shared).unwrap(), None);
        let trivial = RX3CInstance::new(3, vec![[0, 1, 2]; 3]).unwrap();
        assert_eq!(solve_exact_cover(trivial.as_x3c()).unwrap(), Some(vec![0]));
    }

    #[test]
    fn matchings_by_permutation_enumeration() {
        let brute = |g: &BipartiteGraph| -> u64 {
            let n = g.left();
            let mut count = 0;
            let mut perm: Vec<usize> = (0..n).collect();
            // Heap's algorithm over all permutations
            fn heap(k: usize, perm: &mut Vec<usize>, g: &BipartiteGraph, count: &mut u64) {
                if k <= 1 {
                    if perm.iter().enumerate().all(|(u, &v)| g.edges().contains(&(u, v))) {
                        *count += 1;
                    }
                    return;
                }
                for i in 0..k {
                    heap(k - 1, perm, g, count);
                    if k % 2 == 0 {
                        perm.swap(i, k - 1);
                    } else {
                        perm.swap(0, k - 1);
                    }
                }
            }
            heap(n, &mut perm, g, &mut count);
            count
        };
        let k33 = BipartiteGraph::new(
            3,
            3,
            (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).collect(),
        )
        .unwrap();
        assert_eq!(count_perfect_matchings(&k33).unwrap(), BigUint::from(6u32));
        assert_eq!(brute(&k33), 6);
        let c4 = BipartiteGraph::four_cycle();
        assert_eq!(count_perfect_matchings(&c4).unwrap(), BigUint::from(2u32));
        assert_eq!(brute(&c4), 2);
        let empty = BipartiteGraph::new(3, 3, vec![]).unwrap();
        assert_eq!(count_perfect_matchings(&empty).unwrap(), BigUint::zero());
        let path = BipartiteGraph::new(3, 3, vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0), (2, 1)]).unwrap();
        assert_eq!(count_perfect_matchings(&path).unwrap(), BigUint::from(brute(&path)));
    }

    #[test]
    fn small_gadget_shape() {
        let g = x3c_to_thiele(&small_cover(), &rational(1, 2), OpType::Swap).unwrap();
        assert_eq!(g.election.num_candidates(), 6);
        assert_eq!(g.election.num_voters(), 104);
        assert!(g.audit());
        assert_eq!(g.election.ballot(1).unwrap(), &[0, 3, 4]);
        assert_eq!(g.election.ballot(5).unwrap(), &[2, 5]);
        let one_z = x3c_to_thiele(&small_cover(), &rational(1, 2), OpType::Add).unwrap();
        assert_eq!(one_z.election.num_voters(), 103);
        assert_eq!(x3c_ell(&rational(0, 1)).unwrap(), 3);
        assert!(x3c_ell(&rational(1, 1)).is_err());
    }

    #[test]
    fn greedy_cc_cardinalities_n1() {
        let inst = RX3CInstance::new(3, vec![[0, 1, 2]; 3]).unwrap();
        let g = rx3c_to_greedy(&inst, GreedyKind::Cc, OpType::Add, None).unwrap();
        // 3nT + C(3n,2)T + (2nT+4nt) + 3nt + n with T = t = 10
        assert_eq!(g.election.num_voters(), 30 + 30 + 60 + 30 + 1);
        assert!(g.audit());
        assert!(!g.non_canonical);
        let remove = rx3c_to_greedy(&inst, GreedyKind::Cc, OpType::Remove, None).unwrap();
        assert_eq!((remove.budget, remove.election.num_voters()), (2, 153));
        let swap = rx3c_to_greedy(&inst, GreedyKind::Pav, OpType::Swap, None).unwrap();
        assert_eq!(swap.election.num_candidates(), 6);
        assert_eq!(swap.budget, 1);
    }

    #[test]
    fn timepoints_small_n() {
        let tp = phragmen_reduction_timepoints(1).unwrap();
        assert_eq!(tp.a, rational(1, 3600));
        assert_eq!(tp.d, rational(1, 900));
        for n in 1..=5 {
            let tp = phragmen_reduction_timepoints(n).unwrap();
            assert!(tp.ordering_holds() && tp.d_before_p() && tp.money_bound_holds());
            assert!(tp.a < tp.d);
        }
    }

    #[test]
    fn matching_gadget_shapes() {
        let add = matching_to_sav_counting(&BipartiteGraph::four_cycle(), OpType::Add).unwrap();
        assert_eq!(add.election.num_voters(), 12);
        assert_eq!(add.election.num_candidates(), 12);
        assert_eq!(add.expected_count, Some(BigUint::from(128u32)));
        let scores = add.election.sav_scores();
        assert!(scores[..4].iter().all(|s| *s == integer(2)));
        assert!(scores[4..].iter().all(|s| *s == rational(1, 2)));
        let remove = matching_to_sav_counting(&BipartiteGraph::four_cycle(), OpType::Remove).unwrap();
        assert_eq!(remove.election.num_voters(), 28);
        assert_eq!(remove.election.num_candidates(), 84);
        assert_eq!(remove.expected_count, Some(BigUint::from(8u32)));
        let lonely = BipartiteGraph::new(2, 2, vec![(0, 0), (0, 1)]).unwrap();
        let g = matching_to_sav_counting(&lonely, OpType::Add).unwrap();
        assert_eq!(g.expected_count, Some(BigUint::zero()));
        assert!(matching_to_sav_counting(&BipartiteGraph::new(2, 3, vec![]).unwrap(), OpType::Add).is_err());
    }

    #[test]
    fn no_cover_fixture_exists_for_n2() {
        let inst = find_rx3c_without_cover(2).unwrap().expect("fixture");
        assert!(solve_exact_cover(inst.as_x3c()).unwrap().is_none());
        assert!(find_rx3c_without_cover(1).unwrap().is_none());
    }
}
