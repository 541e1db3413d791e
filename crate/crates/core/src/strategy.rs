//! Execution strategies and their brute-force validators.
//!
//! Validators enumerate every scenario pair and every event; they are the ground truth
//! behind every positive answer, so they do nothing clever.

use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

use crate::network::{difference_set, label_text, Cstn, NodeId, ValidationReport};
use crate::scenario::{PartialScenario, Scenario};

/// Exact time value.
pub type Time = Ratio<i128>;

pub fn int_time(x: i128) -> Time {
    Time::from_integer(x)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("strategy has {got} scenarios, network has {expected}")]
    ScenarioCount { expected: usize, got: usize },
    #[error(
        "schedule of scenario {scenario} does not match the nodes present in it (node {node})"
    )]
    Domain { scenario: usize, node: usize },
    #[error("positions of scenario {scenario} are not a bijection onto 1..=k")]
    MalformedPositions { scenario: usize },
}

/// `σ(s)` for every scenario, indexed `[scenario index][node]`. `None` marks nodes absent
/// from the scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecStrategy {
    pub times: Vec<Vec<Option<Time>>>,
}

impl ExecStrategy {
    /// An all-absent strategy of the right shape for `g`.
    pub fn empty_for(g: &Cstn) -> Self {
        Self {
            times: vec![vec![None; g.node_count()]; g.scenario_count()],
        }
    }

    pub fn time(&self, s: Scenario, v: NodeId) -> Option<Time> {
        self.times[s.index()][v]
    }

    pub fn set(&mut self, s: Scenario, v: NodeId, t: Time) {
        self.times[s.index()][v] = Some(t);
    }

    pub fn is_integral(&self) -> bool {
        self.times
            .iter()
            .flatten()
            .flatten()
            .all(|t| t.is_integer())
    }

    /// Adds `d` to every time.
    pub fn shifted(&self, d: Time) -> Self {
        Self {
            times: self
                .times
                .iter()
                .map(|row| row.iter().map(|t| t.map(|t| t + d)).collect())
                .collect(),
        }
    }

    fn check_domain(&self, g: &Cstn) -> Result<(), StrategyError> {
        check_domain(g, &self.times)
    }
}

fn check_domain(g: &Cstn, times: &[Vec<Option<Time>>]) -> Result<(), StrategyError> {
    if times.len() != g.scenario_count() {
        return Err(StrategyError::ScenarioCount {
            expected: g.scenario_count(),
            got: times.len(),
        });
    }
    for s in g.scenarios() {
        let row = &times[s.index()];
        if row.len() != g.node_count() {
            return Err(StrategyError::Domain {
                scenario: s.index(),
                node: row.len().min(g.node_count()),
            });
        }
        for (v, t) in row.iter().enumerate() {
            if t.is_some() != g.node_present(v, s) {
                return Err(StrategyError::Domain {
                    scenario: s.index(),
                    node: v,
                });
            }
        }
    }
    Ok(())
}

/// A strategy that also fixes the order of observations. Positions are stored for
/// observation nodes only; every other present node sits at `|OV| + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiExecStrategy {
    pub times: Vec<Vec<Option<Time>>>,
    pub positions: Vec<Vec<Option<u32>>>,
}

impl PiExecStrategy {
    pub fn time(&self, s: Scenario, v: NodeId) -> Option<Time> {
        self.times[s.index()][v]
    }

    /// `[σ(s)]^π_v`, with the `|OV| + 1` convention for non-observation nodes.
    pub fn position(&self, g: &Cstn, s: Scenario, v: NodeId) -> Option<u32> {
        if g.is_observation(v) {
            self.positions[s.index()][v]
        } else if g.node_present(v, s) {
            Some(g.observation_count() as u32 + 1)
        } else {
            None
        }
    }

    pub fn timing(&self) -> ExecStrategy {
        ExecStrategy {
            times: self.times.clone(),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.times
            .iter()
            .flatten()
            .flatten()
            .all(|t| t.is_integer())
    }

    fn check_domain(&self, g: &Cstn) -> Result<(), StrategyError> {
        check_domain(g, &self.times)?;
        if self.positions.len() != g.scenario_count() {
            return Err(StrategyError::ScenarioCount {
                expected: g.scenario_count(),
                got: self.positions.len(),
            });
        }
        for s in g.scenarios() {
            let row = &self.positions[s.index()];
            let bad = StrategyError::MalformedPositions {
                scenario: s.index(),
            };
            if row.len() != g.node_count() {
                return Err(bad);
            }
            let present: Vec<NodeId> = g
                .present_nodes(s)
                .filter(|&v| g.is_observation(v))
                .collect();
            let mut seen = vec![false; present.len()];
            for (v, p) in row.iter().enumerate() {
                let should = g.is_observation(v) && g.node_present(v, s);
                match (should, p) {
                    (false, None) => {}
                    (true, Some(p)) if (1..=present.len() as u32).contains(p) => {
                        if std::mem::replace(&mut seen[*p as usize - 1], true) {
                            return Err(bad);
                        }
                    }
                    _ => return Err(bad),
                }
            }
        }
        Ok(())
    }
}

/// `Hst(τ, s, σ)`: observations made strictly before `τ`.
pub fn history(g: &Cstn, sigma: &ExecStrategy, s: Scenario, tau: Time) -> PartialScenario {
    let mut h = PartialScenario::empty(g.letters().len());
    for p in 0..g.letters().len() {
        if let Some(t) = sigma.time(s, g.observer(p)) {
            if t < tau {
                h = h.assign(p, s.value(p));
            }
        }
    }
    h
}

/// `π-Hst(τ, ψ, s, σ)`: observations at time `≤ τ` and position `< ψ`.
pub fn pi_history(
    g: &Cstn,
    sigma: &PiExecStrategy,
    s: Scenario,
    tau: Time,
    psi: u32,
) -> PartialScenario {
    let mut h = PartialScenario::empty(g.letters().len());
    for p in 0..g.letters().len() {
        let o = g.observer(p);
        if let (Some(t), Some(pos)) = (sigma.time(s, o), sigma.positions[s.index()][o]) {
            if t <= tau && pos < psi {
                h = h.assign(p, s.value(p));
            }
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Viability,
    Dynamic,
    Epsilon(Time),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyViolation {
    /// `σ(s)` breaks an active constraint.
    Infeasible {
        scenario: Scenario,
        constraint: usize,
    },
    /// `Con(Hst(τ, s1), s2)` holds but `[σ(s2)]_v ≠ τ`.
    NotDynamic {
        s1: Scenario,
        s2: Scenario,
        node: NodeId,
        time: Time,
        history: PartialScenario,
    },
    /// `H_ε(s1; s2; u)` fails.
    EpsilonViolated {
        s1: Scenario,
        s2: Scenario,
        node: NodeId,
    },
    /// Observation `first` runs strictly before `second` but has a larger position.
    Incoherent {
        scenario: Scenario,
        first: NodeId,
        second: NodeId,
    },
    /// `Con(π-Hst(τ, ψ, s1), s2)` holds but `v` differs in `s2`.
    NotPiDynamic {
        s1: Scenario,
        s2: Scenario,
        node: NodeId,
        time: Time,
        position: u32,
        history: PartialScenario,
    },
    /// No observation holds position 1 in every scenario.
    NoCommonFirstObservation,
}

fn time_text(t: &Time) -> String {
    if t.is_integer() {
        t.numer().to_string()
    } else {
        format!("{}/{}", t.numer(), t.denom())
    }
}

fn partial_text(g: &Cstn, h: PartialScenario) -> String {
    if h.is_empty() {
        return "∅".into();
    }
    h.iter()
        .map(|(p, b)| format!("{}↦{}", g.letters()[p], u8::from(b)))
        .collect::<Vec<_>>()
        .join(", ")
}

impl StrategyViolation {
    pub fn describe(&self, g: &Cstn) -> String {
        let sc = |s: &Scenario| format!("[{}]", label_text(&g.scenario_label(*s)));
        match self {
            StrategyViolation::Infeasible {
                scenario,
                constraint,
            } => {
                let c = &g.constraints()[*constraint];
                format!(
                    "scenario {}: {} − {} ≤ {} violated",
                    sc(scenario),
                    g.node_name(c.v),
                    g.node_name(c.u),
                    c.w
                )
            }
            StrategyViolation::NotDynamic {
                s1,
                s2,
                node,
                time,
                history,
            } => format!(
                "{} runs at {} in {} with history {{{}}} consistent with {}, where it runs elsewhere",
                g.node_name(*node),
                time_text(time),
                sc(s1),
                partial_text(g, *history),
                sc(s2)
            ),
            StrategyViolation::EpsilonViolated { s1, s2, node } => format!(
                "H_ε({}; {}; {}) violated",
                sc(s1),
                sc(s2),
                g.node_name(*node)
            ),
            StrategyViolation::Incoherent {
                scenario,
                first,
                second,
            } => format!(
                "scenario {}: {} runs before {} but has a later position",
                sc(scenario),
                g.node_name(*first),
                g.node_name(*second)
            ),
            StrategyViolation::NotPiDynamic {
                s1,
                s2,
                node,
                time,
                position,
                history,
            } => format!(
                "{} runs at ({}, #{}) in {} with π-history {{{}}} consistent with {}, where it differs",
                g.node_name(*node),
                time_text(time),
                position,
                sc(s1),
                partial_text(g, *history),
                sc(s2)
            ),
            StrategyViolation::NoCommonFirstObservation => {
                "no observation is executed first in every scenario".into()
            }
        }
    }
}

fn viability(
    g: &Cstn,
    times: &[Vec<Option<Time>>],
    report: &mut ValidationReport<StrategyViolation>,
) {
    for s in g.scenarios() {
        let row = &times[s.index()];
        for (ci, c) in g.constraints().iter().enumerate() {
            if !g.constraint_active(ci, s) {
                continue;
            }
            let (Some(tu), Some(tv)) = (row[c.u], row[c.v]) else {
                continue;
            };
            if tv - tu > int_time(c.w as i128) {
                report.push(StrategyViolation::Infeasible {
                    scenario: s,
                    constraint: ci,
                });
            }
        }
    }
}

/// Checks one property of an execution strategy and lists every violation.
pub fn validate_es(
    g: &Cstn,
    sigma: &ExecStrategy,
    mode: &Mode,
) -> Result<ValidationReport<StrategyViolation>, StrategyError> {
    sigma.check_domain(g)?;
    let mut report = ValidationReport::default();
    match mode {
        Mode::Viability => viability(g, &sigma.times, &mut report),
        Mode::Dynamic => {
            for s1 in g.scenarios() {
                for v in g.present_nodes(s1) {
                    let tau = sigma.time(s1, v).expect("domain checked");
                    let h = history(g, sigma, s1, tau);
                    for s2 in g.scenarios() {
                        if s2 == s1 || !h.consistent_with(s2) {
                            continue;
                        }
                        match sigma.time(s2, v) {
                            Some(t) if t != tau => report.push(StrategyViolation::NotDynamic {
                                s1,
                                s2,
                                node: v,
                                time: tau,
                                history: h,
                            }),
                            _ => {}
                        }
                    }
                }
            }
        }
        Mode::Epsilon(eps) => {
            for s1 in g.scenarios() {
                for s2 in g.scenarios() {
                    if s1 == s2 {
                        continue;
                    }
                    let delta = difference_set(g, s1, s2);
                    for u in g.present_nodes(s1) {
                        let Some(t2) = sigma.time(s2, u) else {
                            continue;
                        };
                        let t1 = sigma.time(s1, u).expect("domain checked");
                        let ok = t1 >= t2
                            || delta
                                .iter()
                                .any(|&v| t1 >= sigma.time(s1, v).expect("observer present") + eps);
                        if !ok {
                            report.push(StrategyViolation::EpsilonViolated { s1, s2, node: u });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Checks coherence, viability, π-dynamicity and the common-first-observation property
/// of a π-execution strategy.
pub fn validate_pi_es(
    g: &Cstn,
    sigma: &PiExecStrategy,
) -> Result<ValidationReport<StrategyViolation>, StrategyError> {
    sigma.check_domain(g)?;
    let mut report = ValidationReport::default();

    for s in g.scenarios() {
        let obs: Vec<NodeId> = g
            .present_nodes(s)
            .filter(|&v| g.is_observation(v))
            .collect();
        for &a in &obs {
            for &b in &obs {
                if sigma.time(s, a) < sigma.time(s, b)
                    && sigma.positions[s.index()][a] > sigma.positions[s.index()][b]
                {
                    report.push(StrategyViolation::Incoherent {
                        scenario: s,
                        first: a,
                        second: b,
                    });
                }
            }
        }
    }

    viability(g, &sigma.times, &mut report);

    for s1 in g.scenarios() {
        for v in g.present_nodes(s1) {
            let tau = sigma.time(s1, v).expect("domain checked");
            let psi = sigma.position(g, s1, v).expect("domain checked");
            let h = pi_history(g, sigma, s1, tau, psi);
            for s2 in g.scenarios() {
                if s2 == s1 || !h.consistent_with(s2) || !g.node_present(v, s2) {
                    continue;
                }
                if sigma.time(s2, v) != Some(tau) || sigma.position(g, s2, v) != Some(psi) {
                    report.push(StrategyViolation::NotPiDynamic {
                        s1,
                        s2,
                        node: v,
                        time: tau,
                        position: psi,
                        history: h,
                    });
                }
            }
        }
    }

    if g.observation_count() > 0 {
        let common = (0..g.observation_count()).any(|p| {
            let o = g.observer(p);
            g.scenarios()
                .all(|s| sigma.positions[s.index()][o] == Some(1))
        });
        if !common {
            report.push(StrategyViolation::NoCommonFirstObservation);
        }
    }
    Ok(report)
}

/// Times relative to the earliest one, so that the minimum is zero.
pub(crate) fn normalize(times: &mut [Vec<Option<Time>>]) {
    let min = times.iter().flatten().flatten().min().copied();
    if let Some(m) = min {
        if !m.is_zero() {
            for t in times.iter_mut().flatten().flatten() {
                *t -= m;
            }
        }
    }
}
