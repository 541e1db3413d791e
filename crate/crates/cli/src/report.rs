use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::files::{StrategyFile, TimeValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    /// One time per node, for STN and HyTN schedules.
    Schedule(BTreeMap<String, TimeValue>),
    Strategy(StrategyFile),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub verdict: Verdict,
    pub property: &'static str,
    pub parameters: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Payload>,
    pub witnesses: Vec<String>,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn new(property: &'static str) -> Self {
        Self {
            verdict: Verdict::Invalid,
            property,
            parameters: BTreeMap::new(),
            strategy: None,
            witnesses: Vec::new(),
            elapsed_ms: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let verdict = match self.verdict {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Invalid => "invalid",
        };
        let mut out = format!("{}: {verdict}\n", self.property);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  {k} = {v}");
        }
        match &self.strategy {
            Some(Payload::Schedule(times)) => {
                let _ = writeln!(out, "schedule: {}", join_times(times, None));
            }
            Some(Payload::Strategy(file)) => {
                out.push_str("strategy:\n");
                for (scenario, entry) in file {
                    let name = if scenario.is_empty() { "λ" } else { scenario };
                    let times = join_times(&entry.times, entry.positions.as_ref());
                    let _ = writeln!(out, "  [{name}] {times}");
                }
            }
            None => {}
        }
        for w in &self.witnesses {
            let _ = writeln!(out, "  - {w}");
        }
        let _ = writeln!(out, "elapsed: {:.3} ms", self.elapsed_ms);
        out
    }
}

fn join_times(times: &BTreeMap<String, TimeValue>, pos: Option<&BTreeMap<String, u32>>) -> String {
    let mut items: Vec<(&String, &TimeValue)> = times.iter().collect();
    if let Some(pos) = pos {
        items.sort_by_key(|(n, _)| pos.get(*n).copied().unwrap_or(u32::MAX));
    }
    items
        .into_iter()
        .map(|(n, t)| match pos.and_then(|p| p.get(n)) {
            Some(k) => format!("{n}={t} (#{k})"),
            None => format!("{n}={t}"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}
