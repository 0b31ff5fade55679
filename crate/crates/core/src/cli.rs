//! Request handling shared by the command-line tool and the C bindings.

use std::fs;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::constructions::{
    matching_to_sav_counting, rx3c_to_greedy_with, rx3c_to_phragmen, sav_add_witness,
    sav_remove_witness, thiele_witness, x3c_to_thiele_with, GadgetBundle, GreedyKind,
    RX3CInstance, DEFAULT_VOTER_LIMIT,
};
use crate::counting::{av_count_unchanged, oracle_count_unchanged, CountOutcome};
use crate::election::{render_diff_matrix, Election, Rational};
use crate::error::{Error, Result};
use crate::format::{parse_election, parse_graph, parse_x3c, serialize_election};
use crate::perturbation::{empirical_robustness_level, OpType};
use crate::radius::{av_radius, oracle_radius, sav_radius};
use crate::rules::{winners, RuleSpec, ThieleVector, WinnerSet, DEFAULT_CAP};

/// Environment variable holding the default enumeration cap.
pub const CAP_ENV: &str = "APPROBUST_CAP";

/// Search depth used by the radius oracle when no budget is given.
pub const DEFAULT_ORACLE_BUDGET: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Winners,
    Radius,
    Count,
    Level,
    Witness,
    Reduce,
    Diff,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Polynomial algorithm or dynamic program.
    #[default]
    Exact,
    /// Brute-force search.
    Oracle,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

/// Everything a single run needs. Inputs come either from `inputs` (file
/// paths) or inline in `election` / `instance`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunRequest {
    pub command: Command,
    pub rule: String,
    /// Explicit Thiele weights as rational strings; overrides the preset.
    pub weights: Option<Vec<String>>,
    pub k: Option<usize>,
    pub op: Option<OpType>,
    pub budget: Option<usize>,
    pub method: Method,
    pub cap: u64,
    pub inputs: Vec<String>,
    pub election: Option<String>,
    pub instance: Option<String>,
    /// Witness or gadget name.
    pub which: Option<String>,
    pub alpha: Option<String>,
    /// `(T, t)` for the sequential-rule gadgets.
    pub overrides: Option<(u64, u64)>,
    pub voter_limit: Option<u64>,
    pub expand: bool,
    pub format: OutputFormat,
}

impl Default for RunRequest {
    fn default() -> Self {
        RunRequest {
            command: Command::Winners,
            rule: "av".into(),
            weights: None,
            k: None,
            op: None,
            budget: None,
            method: Method::Exact,
            cap: DEFAULT_CAP,
            inputs: Vec::new(),
            election: None,
            instance: None,
            which: None,
            alpha: None,
            overrides: None,
            voter_limit: None,
            expand: false,
            format: OutputFormat::Json,
        }
    }
}

fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidInstance(message.into())
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_string(),
        message: e.to_string(),
    })
}

impl RunRequest {
    fn k(&self) -> Result<usize> {
        self.k.ok_or_else(|| invalid("--k is required"))
    }

    fn op(&self) -> Result<OpType> {
        self.op.ok_or_else(|| invalid("--op is required"))
    }

    fn rule(&self, k: usize) -> Result<RuleSpec> {
        let Some(weights) = &self.weights else {
            return RuleSpec::from_name(&self.rule, k);
        };
        let parsed = weights
            .iter()
            .map(|w| w.trim().parse::<Rational>().map_err(|_| Error::InvalidWeights(format!("'{w}' is not a rational"))))
            .collect::<Result<Vec<_>>>()?;
        let w = ThieleVector::new(parsed)?;
        match self.rule.to_ascii_lowercase().as_str() {
            "thiele" => Ok(RuleSpec::Thiele(w)),
            "greedy-thiele" => Ok(RuleSpec::GreedyThiele(w)),
            other => Err(invalid(format!(
                "weights need rule 'thiele' or 'greedy-thiele', not '{other}'"
            ))),
        }
    }

    /// The `index`-th election: inline text first, then input files.
    fn election_at(&self, index: usize) -> Result<Election> {
        let inline: Vec<&String> = self.election.iter().collect();
        if let Some(text) = inline.get(index) {
            return parse_election(text);
        }
        let path = self
            .inputs
            .get(index - inline.len())
            .ok_or_else(|| invalid("missing election input"))?;
        parse_election(&read(path)?).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{path}: {message}"),
            },
            other => other,
        })
    }

    fn instance_text(&self) -> Result<String> {
        match (&self.instance, self.inputs.first()) {
            (Some(text), _) => Ok(text.clone()),
            (None, Some(path)) => read(path),
            (None, None) => Err(invalid("missing instance input")),
        }
    }
}

fn committee_list(members: &[usize]) -> Value {
    json!(members)
}

pub fn winner_set_json(set: &WinnerSet) -> Value {
    match set {
        WinnerSet::Threshold {
            forced,
            pool,
            slots,
        } => json!({
            "form": "threshold",
            "forced": forced,
            "pool": pool,
            "slots": slots,
        }),
        WinnerSet::Explicit(list) => json!({
            "form": "explicit",
            "committees": list.iter().map(|c| committee_list(c.members())).collect::<Vec<_>>(),
        }),
    }
}

fn count_json(outcome: &CountOutcome) -> Value {
    json!({
        "unchanged": outcome.unchanged.to_string(),
        "changed": outcome.changed().to_string(),
        "total": outcome.total.to_string(),
        "probability": outcome.probability().to_string(),
    })
}

fn winners_provenance(rule: &RuleSpec) -> &'static str {
    match rule {
        RuleSpec::Av => "approval-score threshold",
        RuleSpec::Sav => "satisfaction-score threshold",
        RuleSpec::Thiele(_) => "enumeration of all committees",
        RuleSpec::GreedyThiele(_) => "greedy marginal-score selection",
        RuleSpec::Phragmen => "sequential Phragmen with exact rationals",
    }
}

/// Result envelope with the fields every response carries.
fn envelope(rule: Option<&RuleSpec>, k: Option<usize>, op: Option<OpType>, method: &str, provenance: &str) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("rule".into(), rule.map_or(Value::Null, |r| r.name().into()));
    out.insert("k".into(), k.map_or(Value::Null, Value::from));
    out.insert("op".into(), op.map_or(Value::Null, |o| o.name().into()));
    out.insert("method".into(), method.into());
    out.insert("provenance".into(), provenance.into());
    out
}

fn merge(mut base: Map<String, Value>, extra: Value) -> Value {
    if let Value::Object(fields) = extra {
        base.extend(fields);
    }
    Value::Object(base)
}

fn bundle_json(bundle: &GadgetBundle) -> Value {
    let params: Map<String, Value> = bundle
        .parameters
        .iter()
        .map(|(k, v)| (k.clone(), Value::from(v.clone())))
        .collect();
    json!({
        "budget": bundle.budget,
        "operation": bundle.operation,
        "expected": bundle.expected,
        "candidates": bundle.candidate_labels,
        "groups": bundle.groups.iter().map(|g| json!({
            "label": g.label,
            "expected": g.expected,
            "actual": g.actual,
        })).collect::<Vec<_>>(),
        "audit_passed": bundle.audit(),
        "parameters": params,
        "non_canonical_parameters": bundle.non_canonical,
        "shortcut": bundle.shortcut.as_ref().map(serialize_election),
        "expected_count": bundle.expected_count.as_ref().map(|c| c.to_string()),
        "count_formula": bundle.count_formula,
        "num_candidates": bundle.election.num_candidates(),
        "num_voters": bundle.election.num_voters(),
        "election": serialize_election(&bundle.election),
    })
}

fn witness(req: &RunRequest) -> Result<(GadgetBundle, Option<RuleSpec>)> {
    let k = req.k()?;
    let which = req.which.as_deref().ok_or_else(|| invalid("--which is required"))?;
    Ok(match which {
        "sav-add" => (sav_add_witness(k)?, Some(RuleSpec::Sav)),
        "sav-remove" => (sav_remove_witness(k)?, Some(RuleSpec::Sav)),
        "thiele-add" => (thiele_witness(k, OpType::Add)?, None),
        "thiele-remove" => (thiele_witness(k, OpType::Remove)?, None),
        "thiele-swap" => (thiele_witness(k, OpType::Swap)?, None),
        other => return Err(invalid(format!("unknown witness '{other}'"))),
    })
}

fn reduce(req: &RunRequest) -> Result<(GadgetBundle, Option<RuleSpec>)> {
    let which = req.which.as_deref().ok_or_else(|| invalid("--which is required"))?;
    let op = req.op()?;
    let text = req.instance_text()?;
    let limit = req.voter_limit.unwrap_or(DEFAULT_VOTER_LIMIT);
    let rx3c = |text: &str| -> Result<RX3CInstance> {
        let x = parse_x3c(text)?;
        RX3CInstance::new(x.universe(), x.sets().to_vec())
    };
    Ok(match which {
        "x3c-thiele" => {
            let alpha: Rational = req
                .alpha
                .as_deref()
                .unwrap_or("1/2")
                .parse()
                .map_err(|_| invalid("alpha must be a rational such as 1/2"))?;
            let bundle = x3c_to_thiele_with(&parse_x3c(&text)?, &alpha, op, limit)?;
            (bundle, None)
        }
        "greedy-cc" | "greedy-pav" => {
            let kind = if which == "greedy-cc" { GreedyKind::Cc } else { GreedyKind::Pav };
            let bundle = rx3c_to_greedy_with(&rx3c(&text)?, kind, op, req.overrides, limit)?;
            let rule = RuleSpec::GreedyThiele(kind.weights(bundle.k));
            (bundle, Some(rule))
        }
        "phragmen" => (
            rx3c_to_phragmen(&rx3c(&text)?, op, req.overrides, limit)?,
            Some(RuleSpec::Phragmen),
        ),
        "matching" => (
            matching_to_sav_counting(&parse_graph(&text)?, op)?,
            Some(RuleSpec::Sav),
        ),
        other => return Err(invalid(format!("unknown gadget '{other}'"))),
    })
}

/// Runs a request against its declared inputs.
pub fn run(req: &RunRequest) -> Result<Value> {
    match req.command {
        Command::Witness | Command::Reduce => {
            let (bundle, rule) = if req.command == Command::Witness {
                witness(req)?
            } else {
                reduce(req)?
            };
            let head = envelope(
                rule.as_ref(),
                Some(bundle.k),
                Some(bundle.op_type),
                "construction",
                &bundle.provenance,
            );
            Ok(merge(head, bundle_json(&bundle)))
        }
        Command::Diff => {
            let before = req.election_at(0)?;
            let after = req.election_at(1)?;
            let head = envelope(None, None, None, "exact", "cell-by-cell comparison");
            Ok(merge(head, json!({ "matrix": render_diff_matrix(&before, &after)? })))
        }
        _ => run_on(req, &req.election_at(0)?),
    }
}

/// Runs an election-based request (`winners`, `radius`, `count`, `level`)
/// on an already parsed election.
pub fn run_on(req: &RunRequest, election: &Election) -> Result<Value> {
    let k = req.k()?;
    let rule = req.rule(k)?;
    election.check_committee_size(k)?;
    match req.command {
        Command::Winners => {
            let set = winners(election, k, &rule, req.cap)?;
            let head = envelope(Some(&rule), Some(k), None, "exact", winners_provenance(&rule));
            let mut body = json!({
                "winners": winner_set_json(&set),
                "count": set.count().to_string(),
            });
            if req.expand {
                let list: Vec<Value> = set
                    .expand(req.cap)?
                    .iter()
                    .map(|c| committee_list(c.members()))
                    .collect();
                body["expanded"] = Value::from(list);
            }
            Ok(merge(head, body))
        }
        Command::Radius => {
            let op = req.op()?;
            match req.method {
                Method::Exact => {
                    let (outcome, provenance) = match rule {
                        RuleSpec::Av => (av_radius(election, k, op)?, "approval-score case analysis"),
                        RuleSpec::Sav => (sav_radius(election, k, op)?, "satisfaction-score greedy"),
                        _ => {
                            return Err(Error::Unsupported(format!(
                                "no polynomial radius algorithm for {}; use --method oracle",
                                rule.name()
                            )))
                        }
                    };
                    let head = envelope(Some(&rule), Some(k), Some(op), "exact", provenance);
                    Ok(merge(head, serde_json::to_value(outcome).expect("serializable")))
                }
                Method::Oracle => {
                    let budget = req.budget.unwrap_or(DEFAULT_ORACLE_BUDGET);
                    let found = oracle_radius(election, k, &rule, op, budget, req.cap)?;
                    let head = envelope(
                        Some(&rule),
                        Some(k),
                        Some(op),
                        "oracle",
                        "breadth-first search over perturbed elections",
                    );
                    let mut body = serde_json::to_value(found.outcome).expect("serializable");
                    body["witness"] = serde_json::to_value(&found.witness).expect("serializable");
                    body["states"] = found.states.into();
                    body["max_budget"] = budget.into();
                    Ok(merge(head, body))
                }
            }
        }
        Command::Count => {
            let op = req.op()?;
            let budget = req.budget.ok_or_else(|| invalid("--budget is required"))?;
            let (outcome, provenance) = match req.method {
                Method::Exact => {
                    if rule != RuleSpec::Av {
                        return Err(Error::Unsupported(format!(
                            "the counting dynamic program is only available for av, not {}",
                            rule.name()
                        )));
                    }
                    (av_count_unchanged(election, k, op, budget)?, "approval counting dynamic program")
                }
                Method::Oracle => (
                    oracle_count_unchanged(election, k, &rule, op, budget, req.cap)?,
                    "enumeration of perturbation sets",
                ),
            };
            let mut head = envelope(Some(&rule), Some(k), Some(op), req.method.name(), provenance);
            head.insert("budget".into(), budget.into());
            Ok(merge(head, count_json(&outcome)))
        }
        Command::Level => {
            let op = req.op()?;
            let (level, argmax) = empirical_robustness_level(election, k, &rule, op, req.cap)?;
            let head = envelope(
                Some(&rule),
                Some(k),
                Some(op),
                "oracle",
                "exhaustive single-operation search",
            );
            Ok(merge(head, json!({ "level": level, "operation": argmax })))
        }
        other => Err(invalid(format!("{other:?} does not take a single election"))),
    }
}

/// Machine-readable error body and the process exit code.
pub fn error_report(err: &Error) -> (Value, i32) {
    let (kind, code) = if err.is_cap_exceeded() {
        ("cap_exceeded", 3)
    } else {
        ("validation", 2)
    };
    (json!({ "error": { "kind": kind, "message": err.to_string() } }), code)
}

/// Renders a result for `--format text`.
pub fn render_text(command: Command, result: &Value) -> String {
    match command {
        Command::Witness | Command::Reduce => result["election"].as_str().unwrap_or_default().to_string(),
        Command::Diff => format!("{}\n", result["matrix"].as_str().unwrap_or_default()),
        _ => {
            let mut out = String::new();
            if let Value::Object(fields) = result {
                for (key, value) in fields {
                    let shown = match value {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{key}: {shown}\n"));
                }
            }
            out
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "approbust", version, about = "Winners and robustness of approval-based committee elections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Rule: av, sav, cc, pav, greedy-cc, greedy-pav, phragmen, thiele, greedy-thiele.
    #[arg(long, default_value = "av")]
    pub rule: String,
    /// Comma-separated Thiele weights, e.g. 1,1/2,1/3.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<String>>,
    #[arg(long)]
    pub k: usize,
    /// Enumeration cap.
    #[arg(long, env = CAP_ENV, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Election file.
    pub input: String,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Winning committees.
    Winners {
        #[command(flatten)]
        common: Common,
        /// Also list every winning committee.
        #[arg(long)]
        expand: bool,
    },
    /// Smallest number of operations that changes the winners.
    Radius {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: OpType,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Search depth for the oracle.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Number of budget-sized perturbation sets that keep the winners.
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: OpType,
        #[arg(long)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
    },
    /// Worst committee displacement over single operations.
    Level {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: OpType,
    },
    /// Emit a witness election.
    Witness {
        /// sav-add, sav-remove, thiele-add, thiele-remove or thiele-swap.
        #[arg(long)]
        which: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Build a hardness gadget from an instance file.
    Reduce {
        /// x3c-thiele, greedy-cc, greedy-pav, phragmen or matching.
        #[arg(long)]
        which: String,
        #[arg(long)]
        op: OpType,
        /// Second Thiele weight for x3c-thiele.
        #[arg(long)]
        alpha: Option<String>,
        /// Override T (non-canonical).
        #[arg(long = "big-t", requires = "small_t")]
        big_t: Option<u64>,
        /// Override t (non-canonical).
        #[arg(long = "small-t", requires = "big_t")]
        small_t: Option<u64>,
        #[arg(long)]
        voter_limit: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Instance file (X3C or graph format).
        input: String,
    },
    /// Render the difference between two elections.
    Diff {
        before: String,
        after: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
}

impl CliCommand {
    pub fn into_request(self) -> RunRequest {
        let mut req = RunRequest::default();
        let common = |req: &mut RunRequest, c: Common| {
            req.rule = c.rule;
            req.weights = c.weights;
            req.k = Some(c.k);
            req.cap = c.cap;
            req.format = c.format;
            req.inputs = vec![c.input];
        };
        match self {
            CliCommand::Winners { common: c, expand } => {
                req.command = Command::Winners;
                common(&mut req, c);
                req.expand = expand;
            }
            CliCommand::Radius {
                common: c,
                op,
                method,
                budget,
            } => {
                req.command = Command::Radius;
                common(&mut req, c);
                req.op = Some(op);
                req.method = method;
                req.budget = budget;
            }
            CliCommand::Count {
                common: c,
                op,
                budget,
                method,
            } => {
                req.command = Command::Count;
                common(&mut req, c);
                req.op = Some(op);
                req.budget = Some(budget);
                req.method = method;
            }
            CliCommand::Level { common: c, op } => {
                req.command = Command::Level;
                common(&mut req, c);
                req.op = Some(op);
                req.method = Method::Oracle;
            }
            CliCommand::Witness { which, k, format } => {
                req.command = Command::Witness;
                req.which = Some(which);
                req.k = Some(k);
                req.format = format;
            }
            CliCommand::Reduce {
                which,
                op,
                alpha,
                big_t,
                small_t,
                voter_limit,
                format,
                input,
            } => {
                req.command = Command::Reduce;
                req.which = Some(which);
                req.op = Some(op);
                req.alpha = alpha;
                req.overrides = big_t.zip(small_t);
                req.voter_limit = voter_limit;
                req.format = format;
                req.inputs = vec![input];
            }
            CliCommand::Diff {
                before,
                after,
                format,
            } => {
                req.command = Command::Diff;
                req.inputs = vec![before, after];
                req.format = format;
            }
        }
        req
    }
}

/// Parses arguments, runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let req = cli.command.into_request();
    match run(&req) {
        Ok(result) => {
            match req.format {
                OutputFormat::Json => println!("{result}"),
                OutputFormat::Text => print!("{}", render_text(req.command, &result)),
            }
            0
        }
        Err(err) => {
            let (body, code) = error_report(&err);
            println!("{body}");
            code
        }
    }
}
