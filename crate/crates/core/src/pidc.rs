//! π-DC through the relaxed network: `Γ` is π-DC exactly when the relaxation `Γ'_γ`,
//! with every weight `δ` raised to `δ + |V|·γ` and `γ = 1/(|Σ_P|·|V|² + 1)`, is DC.
//! A dynamic strategy of the relaxation is shifted by a suitable `η` and floored to an
//! integral π-execution strategy of `Γ`.
//!
//! Everything is exact. The relaxation is kept in integer form by multiplying all time
//! units by `D = 1/γ`, so an original weight `δ` becomes `D·δ + |V|`.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::dc::{check_dc_unchecked, require_wd, DcError, DcOutcome};
use crate::network::{Cstn, NodeId, ScenarioNode};
use crate::strategy::{validate_pi_es, ExecStrategy, PiExecStrategy, StrategyError, Time};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PiDcError {
    #[error(transparent)]
    Dc(#[from] DcError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("weights overflow in the relaxed network")]
    Overflow,
    #[error("internal error: no admissible shift in [0, 1)")]
    NoAdmissibleShift,
    #[error("self-check failed: rounded strategy violates {}", .0.join("; "))]
    SelfCheck(Vec<String>),
}

/// `Γ'_γ` in units of `γ`.
#[derive(Debug, Clone)]
pub struct RelaxedCstn {
    pub cstn: Cstn,
    /// `D = 1/γ`; one original time unit is `D` relaxed units.
    pub scale: i128,
    pub gamma: Time,
}

impl RelaxedCstn {
    /// `|V|·γ`, the width of each forbidden chunk below an integer.
    pub fn chunk(&self) -> Time {
        self.gamma * Time::from_integer(self.cstn.node_count() as i128)
    }
}

pub fn relax_cstn(g: &Cstn) -> Result<RelaxedCstn, PiDcError> {
    require_wd(g)?;
    relax_unchecked(g)
}

fn relax_unchecked(g: &Cstn) -> Result<RelaxedCstn, PiDcError> {
    let n = g.node_count() as i64;
    let d = (g.scenario_count() as i64)
        .checked_mul(n)
        .and_then(|x| x.checked_mul(n))
        .and_then(|x| x.checked_add(1))
        .ok_or(PiDcError::Overflow)?;
    let cstn = g
        .with_weights(|w| w.checked_mul(d)?.checked_add(n))
        .ok_or(PiDcError::Overflow)?;
    Ok(RelaxedCstn {
        cstn,
        scale: d as i128,
        gamma: Time::new(1, d as i128),
    })
}

fn frac(x: Time) -> Time {
    x - x.floor()
}

/// Whether shifting every value down by `eta` keeps all fractional parts at least
/// `chunk` away from the integer below them.
pub fn eta_admissible(values: &[Time], eta: Time, chunk: Time) -> bool {
    values.iter().all(|&x| frac(x - eta) >= chunk)
}

/// Times of `sigma_prime` (relaxed units) converted to original units.
fn unscaled_values(sigma_prime: &ExecStrategy, relaxed: &RelaxedCstn) -> Vec<Time> {
    let d = Time::from_integer(relaxed.scale);
    sigma_prime
        .times
        .iter()
        .flatten()
        .flatten()
        .map(|&t| t / d)
        .collect()
}

/// Smallest `η = j·γ` in `[0, 1)` such that no shifted value `x − η` falls in
/// `[k, k + |V|·γ)` for an integer `k`. Values and `η` are in original time units.
pub fn select_eta(sigma_prime: &ExecStrategy, relaxed: &RelaxedCstn) -> Result<Time, PiDcError> {
    let values = unscaled_values(sigma_prime, relaxed);
    let chunk = relaxed.chunk();
    (0..relaxed.scale)
        .map(|j| relaxed.gamma * Time::from_integer(j))
        .find(|&eta| eta_admissible(&values, eta, chunk))
        .ok_or(PiDcError::NoAdmissibleShift)
}

/// Shifts by `-η`, floors onto the original integer grid, and numbers the observations
/// of each scenario by their shifted relaxed time. Exact ties go to the observation with
/// the shorter label, then to the smaller name.
///
/// The relaxation lets an observation node labelled with `q` run up to `|V|·γ` before
/// `O_q`; both land on the same integer, and there `O_q` must still come first. Within
/// one integer time, positions are therefore a stable topological order of the relaxed
/// order under "`O_q` before every observation whose label mentions `q`".
pub fn round_to_pi_es(
    sigma_prime: &ExecStrategy,
    eta: Time,
    relaxed: &RelaxedCstn,
    g: &Cstn,
) -> PiExecStrategy {
    let d = Time::from_integer(relaxed.scale);
    let mut times = vec![vec![None; g.node_count()]; g.scenario_count()];
    let mut positions = vec![vec![None; g.node_count()]; g.scenario_count()];
    for s in g.scenarios() {
        let shifted: Vec<Option<Time>> = (0..g.node_count())
            .map(|v| sigma_prime.time(s, v).map(|t| t / d - eta))
            .collect();
        for (v, x) in shifted.iter().enumerate() {
            times[s.index()][v] = x.map(|x| x.floor());
        }
        let mut obs: Vec<NodeId> = g
            .present_nodes(s)
            .filter(|&v| g.is_observation(v))
            .collect();
        obs.sort_by(|&a, &b| {
            shifted[a]
                .cmp(&shifted[b])
                .then(g.nodes()[a].label.len().cmp(&g.nodes()[b].label.len()))
                .then(g.node_name(a).cmp(g.node_name(b)))
        });
        let obs = dependency_order(g, obs, |v| times[s.index()][v]);
        for (i, v) in obs.into_iter().enumerate() {
            positions[s.index()][v] = Some(i as u32 + 1);
        }
    }
    crate::strategy::normalize(&mut times);
    PiExecStrategy { times, positions }
}

fn dependency_order(
    g: &Cstn,
    order: Vec<NodeId>,
    time: impl Fn(NodeId) -> Option<Time>,
) -> Vec<NodeId> {
    let needs = |a: NodeId, b: NodeId| {
        // a must wait for b
        time(a) == time(b)
            && g.nodes()[a]
                .label
                .mentions(&g.letters()[g.observed_letter(b).unwrap()])
    };
    let mut rest = order;
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let i = (0..rest.len())
            .find(|&i| !rest.iter().any(|&b| b != rest[i] && needs(rest[i], b)))
            .unwrap_or(0);
        out.push(rest.remove(i));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PiDcOutcome {
    Yes(PiExecStrategy),
    /// Certificate of the relaxed network's DC check.
    No {
        certificate: Vec<ScenarioNode>,
    },
}

impl PiDcOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, PiDcOutcome::Yes(_))
    }

    pub fn strategy(&self) -> Option<&PiExecStrategy> {
        match self {
            PiDcOutcome::Yes(s) => Some(s),
            PiDcOutcome::No { .. } => None,
        }
    }
}

/// Parameters of one π-DC run, for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiDcParams {
    pub gamma: Time,
    pub scale: i128,
    pub eps_hat: Option<Time>,
    pub eta: Option<Time>,
}

pub fn check_pi_dc(g: &Cstn) -> Result<PiDcOutcome, PiDcError> {
    check_pi_dc_with_params(g).map(|(out, _)| out)
}

pub fn check_pi_dc_with_params(g: &Cstn) -> Result<(PiDcOutcome, PiDcParams), PiDcError> {
    require_wd(g)?;
    let relaxed = relax_unchecked(g)?;
    let mut params = PiDcParams {
        gamma: relaxed.gamma,
        scale: relaxed.scale,
        eps_hat: crate::dc::eps_hat(&relaxed.cstn),
        eta: None,
    };
    // the relaxed network breaks the zero-weight observation-arc rule by design, so the
    // well-definedness check is skipped here
    let sigma_prime = match check_dc_unchecked(&relaxed.cstn)? {
        DcOutcome::No { certificate } => return Ok((PiDcOutcome::No { certificate }, params)),
        DcOutcome::Yes(s) => s,
    };
    let eta = select_eta(&sigma_prime, &relaxed)?;
    debug_assert!(eta >= Time::zero() && eta < Time::one());
    params.eta = Some(eta);
    let sigma = round_to_pi_es(&sigma_prime, eta, &relaxed, g);
    let report = validate_pi_es(g, &sigma)?;
    if !report.is_ok() {
        return Err(PiDcError::SelfCheck(
            report.violations.iter().map(|v| v.describe(g)).collect(),
        ));
    }
    Ok((PiDcOutcome::Yes(sigma), params))
}
