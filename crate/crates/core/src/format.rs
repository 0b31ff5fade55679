//! Plain-text formats for elections, exact cover instances and bipartite
//! graphs.
//!
//! Elections:
//!
//! ```text
//! # comment
//! m 3 n 2
//! 0: 0 1
//! 1:
//! tiebreak: 2 0 1
//! ```
//!
//! Exact cover instances use `universe <3k>` followed by `set <a> <b> <c>`
//! lines; graphs use `left <n>`, `right <n>` and `edge <u> <v>` lines.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::constructions::{BipartiteGraph, X3CInstance};
use crate::election::Election;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn number<T: FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("expected {what}, found '{token}'")))
}

fn numbers(rest: &str, line: usize) -> Result<Vec<usize>> {
    rest.split_whitespace()
        .map(|t| number(t, line, "a non-negative integer"))
        .collect()
}

/// `<keyword> <int>` pairs in a fixed order, e.g. `m 3 n 2`.
fn header(line: &str, line_no: usize, keys: &[&str]) -> Result<Vec<usize>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 2 * keys.len() {
        return Err(parse_err(
            line_no,
            format!("expected '{}'", keys.iter().map(|k| format!("{k} <int>")).collect::<Vec<_>>().join(" ")),
        ));
    }
    keys.iter()
        .enumerate()
        .map(|(i, key)| {
            if tokens[2 * i] != *key {
                return Err(parse_err(
                    line_no,
                    format!("expected '{key}', found '{}'", tokens[2 * i]),
                ));
            }
            number(tokens[2 * i + 1], line_no, "an integer")
        })
        .collect()
}

/// Parses the election format.
pub fn parse_election(text: &str) -> Result<Election> {
    let mut lines = significant_lines(text);
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing 'm <int> n <int>' header"))?;
    let dims = header(first, first_no, &["m", "n"])?;
    let (m, n) = (dims[0], dims[1]);
    let mut ballots: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut tie_break = None;
    let mut last_line = first_no;
    for (line_no, line) in lines {
        last_line = line_no;
        if tie_break.is_some() {
            return Err(parse_err(line_no, "nothing may follow the tiebreak line"));
        }
        let Some((head, rest)) = line.split_once(':') else {
            return Err(parse_err(line_no, "expected '<voter>: <candidates>'"));
        };
        let head = head.trim();
        if head == "tiebreak" {
            let order = numbers(rest, line_no)?;
            tie_break = Some((line_no, order));
            continue;
        }
        let voter: usize = number(head, line_no, "a voter index")?;
        if voter >= n {
            return Err(parse_err(
                line_no,
                format!("voter {voter} out of range for {n} voters"),
            ));
        }
        if ballots[voter].is_some() {
            return Err(parse_err(line_no, format!("duplicate line for voter {voter}")));
        }
        let ballot = numbers(rest, line_no)?;
        if let Some(&c) = ballot.iter().find(|&&c| c >= m) {
            return Err(parse_err(
                line_no,
                format!("candidate {c} out of range for {m} candidates"),
            ));
        }
        if ballot.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(line_no, "candidate indices must be strictly increasing"));
        }
        ballots[voter] = Some(ballot);
    }
    let present = ballots.iter().filter(|b| b.is_some()).count();
    if present != n {
        return Err(parse_err(
            last_line,
            format!("expected {n} voter lines, found {present}"),
        ));
    }
    let election = Election::new(m, ballots.into_iter().flatten().collect())
        .map_err(|e| parse_err(first_no, e.to_string()))?;
    match tie_break {
        Some((line_no, order)) => election
            .with_tie_break(order)
            .map_err(|e| parse_err(line_no, e.to_string())),
        None => Ok(election),
    }
}

/// Canonical text form; `parse_election` inverts it.
pub fn serialize_election(election: &Election) -> String {
    let mut out = format!("m {} n {}\n", election.num_candidates(), election.num_voters());
    for (v, ballot) in election.ballots().iter().enumerate() {
        let _ = write!(out, "{v}:");
        for c in ballot {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
    if let Some(order) = election.tie_break() {
        out.push_str("tiebreak:");
        for c in order {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
    out
}

/// Parses `universe <3k>` followed by `set <a> <b> <c>` lines.
pub fn parse_x3c(text: &str) -> Result<X3CInstance> {
    let mut lines = significant_lines(text);
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing 'universe <int>' line"))?;
    let universe = header(first, first_no, &["universe"])?[0];
    let mut sets = Vec::new();
    for (line_no, line) in lines {
        let rest = line
            .strip_prefix("set")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| parse_err(line_no, "expected 'set <a> <b> <c>'"))?;
        let elems = numbers(rest, line_no)?;
        let [a, b, c] = elems[..] else {
            return Err(parse_err(line_no, "a set has exactly three elements"));
        };
        sets.push([a, b, c]);
    }
    X3CInstance::new(universe, sets)
}

pub fn serialize_x3c(inst: &X3CInstance) -> String {
    let mut out = format!("universe {}\n", inst.universe());
    for [a, b, c] in inst.sets() {
        let _ = writeln!(out, "set {a} {b} {c}");
    }
    out
}

/// Parses `left <n>`, `right <n>`, then `edge <u> <v>` lines.
pub fn parse_graph(text: &str) -> Result<BipartiteGraph> {
    let mut lines = significant_lines(text);
    let mut side = |key: &str| -> Result<usize> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| parse_err(1, format!("missing '{key} <int>' line")))?;
        Ok(header(line, no, &[key])?[0])
    };
    let left = side("left")?;
    let right = side("right")?;
    let mut edges = Vec::new();
    for (line_no, line) in lines {
        let rest = line
            .strip_prefix("edge")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| parse_err(line_no, "expected 'edge <u> <v>'"))?;
        let ends = numbers(rest, line_no)?;
        let [u, v] = ends[..] else {
            return Err(parse_err(line_no, "an edge has exactly two endpoints"));
        };
        edges.push((u, v));
    }
    BipartiteGraph::new(left, right, edges)
}

pub fn serialize_graph(graph: &BipartiteGraph) -> String {
    let mut out = format!("left {}\nright {}\n", graph.left(), graph.right());
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "edge {u} {v}");
    }
    out
}
