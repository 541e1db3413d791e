//! On-disk formats: networks, STNs, HyTNs and strategies, all as JSON.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use cstn_core::network::{ConstraintSpec, NodeSpec, StnArc};
use cstn_core::strategy::{ExecStrategy, PiExecStrategy, Time};
use cstn_core::{parse_label, Cstn, Hytn, Stn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default)]
    pub letters: Vec<String>,
    pub nodes: Vec<NodeEntry>,
    #[serde(default)]
    pub constraints: Vec<ConstraintEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub name: String,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observes: Option<String>,
}

/// `v − u ≤ w` under `label`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub u: String,
    pub v: String,
    pub w: i64,
    #[serde(default)]
    pub label: String,
}

impl NetworkFile {
    pub fn from_cstn(g: &Cstn) -> Self {
        Self {
            letters: g.letters().to_vec(),
            nodes: g
                .nodes()
                .iter()
                .enumerate()
                .map(|(v, n)| NodeEntry {
                    name: n.name.clone(),
                    label: n.label.to_string(),
                    observes: g.observed_letter(v).map(|p| g.letters()[p].clone()),
                })
                .collect(),
            constraints: g
                .constraints()
                .iter()
                .map(|c| ConstraintEntry {
                    u: g.node_name(c.u).to_string(),
                    v: g.node_name(c.v).to_string(),
                    w: c.w,
                    label: c.label.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_cstn(&self) -> Result<Cstn> {
        let label = |text: &str| parse_label(text).with_context(|| format!("label `{text}`"));
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(NodeSpec {
                    name: n.name.clone(),
                    label: label(&n.label)?,
                    observes: n.observes.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                Ok(ConstraintSpec {
                    u: c.u.clone(),
                    v: c.v.clone(),
                    w: c.w,
                    label: label(&c.label)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cstn::new(self.letters.clone(), nodes, constraints)?)
    }
}

pub fn load_network(path: &Path) -> Result<Cstn> {
    read_json::<NetworkFile>(path)?
        .to_cstn()
        .with_context(|| format!("building network from {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StnFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<StnConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StnConstraint {
    pub u: String,
    pub v: String,
    pub w: i64,
}

impl StnFile {
    pub fn from_stn(g: &Stn) -> Self {
        Self {
            nodes: g.nodes.clone(),
            constraints: g
                .named_arcs()
                .map(|(u, v, w)| StnConstraint {
                    u: u.into(),
                    v: v.into(),
                    w,
                })
                .collect(),
        }
    }

    pub fn to_stn(&self) -> Result<Stn> {
        let index = name_index(&self.nodes)?;
        let id = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| anyhow!("unknown node `{n}`"))
        };
        let arcs = self
            .constraints
            .iter()
            .map(|c| {
                Ok(StnArc {
                    u: id(&c.u)?,
                    v: id(&c.v)?,
                    w: c.w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Stn {
            nodes: self.nodes.clone(),
            arcs,
        })
    }
}

fn name_index(nodes: &[String]) -> Result<HashMap<&str, usize>> {
    let mut index = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if index.insert(n.as_str(), i).is_some() {
            bail!("duplicate node `{n}`");
        }
    }
    Ok(index)
}

/// Each hyperarc requires `t(tail) ≥ min over heads of (t(node) − w)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HytnFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub hyperarcs: Vec<HyperarcEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperarcEntry {
    pub tail: String,
    pub heads: Vec<HeadEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadEntry {
    pub node: String,
    pub w: i64,
}

impl HytnFile {
    pub fn to_hytn(&self) -> Result<Hytn> {
        let arcs: Vec<(&str, Vec<(&str, i128)>)> = self
            .hyperarcs
            .iter()
            .map(|a| {
                let heads = a.heads.iter().map(|h| (h.node.as_str(), h.w as i128));
                (a.tail.as_str(), heads.collect())
            })
            .collect();
        let nodes: Vec<&str> = self.nodes.iter().map(String::as_str).collect();
        Ok(Hytn::from_named(&nodes, &arcs)?)
    }
}

/// A time: a JSON integer, or a string `"n"` / `"n/d"` for rationals and large values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeValue {
    Int(i64),
    Text(String),
}

impl TimeValue {
    pub fn from_time(t: Time) -> Self {
        match i64::try_from(*t.numer()) {
            Ok(n) if t.is_integer() => TimeValue::Int(n),
            _ => TimeValue::Text(t.to_string()),
        }
    }

    pub fn to_time(&self) -> Result<Time> {
        match self {
            TimeValue::Int(n) => Ok(Time::from_integer(*n as i128)),
            TimeValue::Text(s) => s.trim().parse().map_err(|e| anyhow!("bad time `{s}`: {e}")),
        }
    }
}

impl std::fmt::Display for TimeValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeValue::Int(n) => write!(f, "{n}"),
            TimeValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub times: BTreeMap<String, TimeValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<BTreeMap<String, u32>>,
}

/// Keyed by the scenario's label, e.g. `"a & !b & !c"`; `""` when there are no letters.
pub type StrategyFile = BTreeMap<String, ScenarioEntry>;

pub fn strategy_file(
    g: &Cstn,
    times: &[Vec<Option<Time>>],
    positions: Option<&[Vec<Option<u32>>]>,
) -> StrategyFile {
    g.scenarios()
        .map(|s| {
            let row = &times[s.index()];
            let named = |v: usize| g.node_name(v).to_string();
            let times = (0..g.node_count())
                .filter_map(|v| row[v].map(|t| (named(v), TimeValue::from_time(t))))
                .collect();
            let positions = positions.map(|p| {
                (0..g.node_count())
                    .filter_map(|v| p[s.index()][v].map(|k| (named(v), k)))
                    .collect()
            });
            (
                g.scenario_label(s).to_string(),
                ScenarioEntry { times, positions },
            )
        })
        .collect()
}

pub fn es_file(g: &Cstn, sigma: &ExecStrategy) -> StrategyFile {
    strategy_file(g, &sigma.times, None)
}

pub fn pi_es_file(g: &Cstn, sigma: &PiExecStrategy) -> StrategyFile {
    strategy_file(g, &sigma.times, Some(&sigma.positions))
}

/// `[scenario index][node]`, as in [`PiExecStrategy::positions`].
pub type Positions = Vec<Vec<Option<u32>>>;

/// Times and, when any scenario lists them, positions. Scenarios missing from the file
/// stay empty and are left to the validators to reject.
pub fn parse_strategy(g: &Cstn, file: &StrategyFile) -> Result<(ExecStrategy, Option<Positions>)> {
    let mut sigma = ExecStrategy::empty_for(g);
    let with_positions = file.values().any(|e| e.positions.is_some());
    let mut positions = vec![vec![None; g.node_count()]; g.scenario_count()];
    let mut seen = vec![false; g.scenario_count()];
    let node = |n: &str| g.node_id(n).ok_or_else(|| anyhow!("unknown node `{n}`"));
    for (key, entry) in file {
        let label = parse_label(key).with_context(|| format!("scenario `{key}`"))?;
        let s = g
            .scenario_from_label(&label)
            .ok_or_else(|| anyhow!("`{key}` is not a complete scenario"))?;
        if std::mem::replace(&mut seen[s.index()], true) {
            bail!("scenario `{key}` listed twice");
        }
        for (name, t) in &entry.times {
            sigma.set(s, node(name)?, t.to_time()?);
        }
        for (name, &k) in entry.positions.iter().flatten() {
            positions[s.index()][node(name)?] = Some(k);
        }
    }
    Ok((sigma, with_positions.then_some(positions)))
}

pub fn load_strategy(g: &Cstn, path: &Path) -> Result<(ExecStrategy, Option<Positions>)> {
    parse_strategy(g, &read_json(path)?)
        .with_context(|| format!("reading strategy {}", path.display()))
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}
