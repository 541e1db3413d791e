//! ε-dynamic consistency via the hyperarc encoding over the expansion, and dynamic
//! consistency through the threshold `ε̂ = 1/(|Σ_P|·|V|)`.

use num_traits::Signed;
use thiserror::Error;

use crate::hytn::{solve_hytn, Hytn, HytnError, HytnOutcome};
use crate::network::{
    difference_set, expand, label_text, wd_check, Cstn, ScenarioNode, ValidationReport, WdViolation,
};
use crate::strategy::{validate_es, ExecStrategy, Mode, StrategyError, StrategyViolation, Time};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DcError {
    #[error("network is not well-defined ({} violations)", .0.len())]
    NotWellDefined(ValidationReport<WdViolation>),
    #[error("epsilon must be nonnegative")]
    NegativeEpsilon,
    #[error("weights overflow after scaling")]
    Overflow,
    #[error(transparent)]
    Hytn(#[from] HytnError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("self-check failed: extracted strategy violates {}", .0.join("; "))]
    SelfCheck(Vec<String>),
}

/// The HyTN whose feasible schedules are the viable ε-dynamic strategies, in time units
/// multiplied by `scale`.
#[derive(Debug, Clone)]
pub struct EpsHytnEncoding {
    pub hytn: Hytn,
    pub scale: i128,
    /// `origin[i]` is the scenario-node behind HyTN node `i`.
    pub origin: Vec<ScenarioNode>,
    pub eps: Time,
}

impl EpsHytnEncoding {
    /// `σ(s)_v = φ(v_s) / scale`.
    pub fn strategy(&self, g: &Cstn, phi: &[i128]) -> ExecStrategy {
        let mut sigma = ExecStrategy::empty_for(g);
        for (i, sn) in self.origin.iter().enumerate() {
            sigma.set(sn.scenario, sn.node, Time::new(phi[i], self.scale));
        }
        sigma
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DcOutcome {
    Yes(ExecStrategy),
    /// Scenario-nodes the solver could lift without bound.
    No {
        certificate: Vec<ScenarioNode>,
    },
}

impl DcOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, DcOutcome::Yes(_))
    }

    pub fn strategy(&self) -> Option<&ExecStrategy> {
        match self {
            DcOutcome::Yes(s) => Some(s),
            DcOutcome::No { .. } => None,
        }
    }
}

pub(crate) fn require_wd(g: &Cstn) -> Result<(), DcError> {
    let report = wd_check(g);
    if report.is_ok() {
        Ok(())
    } else {
        Err(DcError::NotWellDefined(report))
    }
}

pub(crate) fn node_name(g: &Cstn, sn: ScenarioNode) -> String {
    format!(
        "{}@[{}]",
        g.node_name(sn.node),
        label_text(&g.scenario_label(sn.scenario))
    )
}

pub fn build_eps_hytn(g: &Cstn, eps: Time) -> Result<EpsHytnEncoding, DcError> {
    require_wd(g)?;
    build_unchecked(g, eps)
}

fn build_unchecked(g: &Cstn, eps: Time) -> Result<EpsHytnEncoding, DcError> {
    if eps.is_negative() {
        return Err(DcError::NegativeEpsilon);
    }
    let q = *eps.denom();
    let p = *eps.numer();
    let ex = expand(g);
    let mut h = Hytn::new();
    for &sn in &ex.nodes {
        h.add_node(node_name(g, sn));
    }
    for &(u, v, w) in &ex.arcs {
        if u == v {
            continue;
        }
        let w = (w as i128).checked_mul(q).ok_or(DcError::Overflow)?;
        h.add_standard(u, v, w)?;
    }
    for s1 in g.scenarios() {
        for s2 in g.scenarios() {
            if s1 == s2 {
                continue;
            }
            let delta = difference_set(g, s1, s2);
            for u in g.present_nodes(s1) {
                let Some(u2) = ex.node_index(u, s2) else {
                    continue;
                };
                let u1 = ex.node_index(u, s1).expect("present");
                let mut heads = vec![(u2, 0)];
                let mut tautology = false;
                for &v in &delta {
                    if v == u {
                        // u ≥ u + ε: useless head for ε > 0, satisfied outright for ε = 0
                        tautology |= p == 0;
                        continue;
                    }
                    heads.push((ex.node_index(v, s1).expect("observer present"), -p));
                }
                if !tautology {
                    h.add_hyperarc(u1, heads)?;
                }
            }
        }
    }
    Ok(EpsHytnEncoding {
        hytn: h,
        scale: q,
        origin: ex.nodes,
        eps,
    })
}

fn self_check(g: &Cstn, sigma: &ExecStrategy, modes: &[Mode]) -> Result<(), DcError> {
    let mut problems = Vec::new();
    for mode in modes {
        let report: ValidationReport<StrategyViolation> = validate_es(g, sigma, mode)?;
        problems.extend(report.violations.iter().map(|v| v.describe(g)));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(DcError::SelfCheck(problems))
    }
}

pub fn check_eps_dc(g: &Cstn, eps: Time) -> Result<DcOutcome, DcError> {
    require_wd(g)?;
    check_eps_dc_unchecked(g, eps)
}

pub(crate) fn check_eps_dc_unchecked(g: &Cstn, eps: Time) -> Result<DcOutcome, DcError> {
    let enc = build_unchecked(g, eps)?;
    match solve_hytn(&enc.hytn)? {
        HytnOutcome::Inconsistent { certificate } => Ok(DcOutcome::No {
            certificate: certificate.into_iter().map(|i| enc.origin[i]).collect(),
        }),
        HytnOutcome::Feasible(phi) => {
            let sigma = enc.strategy(g, &phi.times);
            self_check(g, &sigma, &[Mode::Viability, Mode::Epsilon(eps)])?;
            Ok(DcOutcome::Yes(sigma))
        }
    }
}

/// `ε̂ = 1/(|Σ_P|·|V|)`; `None` for a network without nodes.
pub fn eps_hat(g: &Cstn) -> Option<Time> {
    let d = (g.scenario_count() * g.node_count()) as i128;
    (d > 0).then(|| Time::new(1, d))
}

pub fn check_dc(g: &Cstn) -> Result<DcOutcome, DcError> {
    require_wd(g)?;
    check_dc_unchecked(g)
}

pub(crate) fn check_dc_unchecked(g: &Cstn) -> Result<DcOutcome, DcError> {
    let Some(eps) = eps_hat(g) else {
        return Ok(DcOutcome::Yes(ExecStrategy::empty_for(g)));
    };
    let out = check_eps_dc_unchecked(g, eps)?;
    if let DcOutcome::Yes(sigma) = &out {
        self_check(g, sigma, &[Mode::Dynamic])?;
    }
    Ok(out)
}
