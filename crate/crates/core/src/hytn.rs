//! Hyper temporal networks and a progress-measure lifting solver.
//!
//! A hyperarc with tail `t` and heads `{v: w_v}` requires
//! `φ(t) ≥ min_v (φ(v) − w_v)`. A standard arc `v − u ≤ w` is the single-head
//! hyperarc with tail `u` and head `{v: w}`.
//!
//! The solver starts every value at 0 (or at a caller-supplied start vector) and raises
//! violated tails to the minimum they need, so it computes the least fixpoint above the
//! start. Every lift is at least one unit. A node whose value passes the bound
//! `B = Σ_t max(0, max −w over hyperarcs with tail t)` can be lifted forever and is
//! marked as unbounded; unbounded nodes form the inconsistency certificate.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::network::Stn;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HytnError {
    #[error("hyperarc {0} has no heads")]
    EmptyHeads(usize),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("hyperarc {0} has its tail among its heads")]
    TailInHeads(usize),
    #[error("hyperarc {arc} lists head `{node}` twice")]
    DuplicateHead { arc: usize, node: String },
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("start vector must have one nonnegative value per node")]
    BadStart,
    #[error("arithmetic overflow while solving")]
    Overflow,
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperarc {
    pub tail: usize,
    pub heads: Vec<(usize, i128)>,
}

impl Hyperarc {
    /// `|A| = |H_A ∪ {t_A}|`.
    pub fn size(&self) -> usize {
        self.heads.len() + 1
    }

    fn satisfied_by(&self, times: &[i128]) -> bool {
        self.heads.iter().any(|&(v, w)| {
            times[v]
                .checked_sub(w)
                .is_some_and(|x| times[self.tail] >= x)
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hytn {
    nodes: Vec<String>,
    arcs: Vec<Hyperarc>,
}

impl Hytn {
    pub fn new() -> Self {
        Self::default()
    }

    /// A network with `n` anonymous nodes named by their index.
    pub fn with_nodes(n: usize) -> Self {
        Self {
            nodes: (0..n).map(|i| i.to_string()).collect(),
            arcs: Vec::new(),
        }
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> usize {
        self.nodes.push(name.into());
        self.nodes.len() - 1
    }

    pub fn add_hyperarc(
        &mut self,
        tail: usize,
        heads: Vec<(usize, i128)>,
    ) -> Result<usize, HytnError> {
        let idx = self.arcs.len();
        let n = self.nodes.len();
        if heads.is_empty() {
            return Err(HytnError::EmptyHeads(idx));
        }
        if tail >= n {
            return Err(HytnError::UnknownNode(tail.to_string()));
        }
        for (i, &(v, _)) in heads.iter().enumerate() {
            if v >= n {
                return Err(HytnError::UnknownNode(v.to_string()));
            }
            if v == tail {
                return Err(HytnError::TailInHeads(idx));
            }
            if heads[..i].iter().any(|&(x, _)| x == v) {
                return Err(HytnError::DuplicateHead {
                    arc: idx,
                    node: self.nodes[v].clone(),
                });
            }
        }
        self.arcs.push(Hyperarc { tail, heads });
        Ok(idx)
    }

    /// Adds `v − u ≤ w` as a single-head hyperarc. Self-loops are rejected.
    pub fn add_standard(&mut self, u: usize, v: usize, w: i128) -> Result<usize, HytnError> {
        self.add_hyperarc(u, vec![(v, w)])
    }

    /// Builds a network from node names and `(tail, [(head, w)])` hyperarcs given by name.
    pub fn from_named<S: AsRef<str>>(
        nodes: &[S],
        arcs: &[(S, Vec<(S, i128)>)],
    ) -> Result<Self, HytnError> {
        let mut h = Hytn::new();
        let mut index = HashMap::new();
        for n in nodes {
            let name = n.as_ref();
            if index.insert(name.to_string(), h.add_node(name)).is_some() {
                return Err(HytnError::DuplicateNode(name.to_string()));
            }
        }
        let id = |s: &S| {
            index
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| HytnError::UnknownNode(s.as_ref().to_string()))
        };
        for (tail, heads) in arcs {
            let t = id(tail)?;
            let heads = heads
                .iter()
                .map(|(v, w)| Ok((id(v)?, *w)))
                .collect::<Result<Vec<_>, HytnError>>()?;
            h.add_hyperarc(t, heads)?;
        }
        Ok(h)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn hyperarcs(&self) -> &[Hyperarc] {
        &self.arcs
    }

    /// `m_A = Σ |A|`.
    pub fn size(&self) -> usize {
        self.arcs.iter().map(Hyperarc::size).sum()
    }

    /// `W = max |w_A(v)|`.
    pub fn max_abs_weight(&self) -> i128 {
        self.arcs
            .iter()
            .flat_map(|a| a.heads.iter().map(|&(_, w)| w.abs()))
            .max()
            .unwrap_or(0)
    }

    /// The bound `(|V| + |A|)·W` on feasible values, or `None` on overflow.
    pub fn value_bound(&self) -> Option<i128> {
        let count = i128::try_from(self.nodes.len() + self.arcs.len()).ok()?;
        count.checked_mul(self.max_abs_weight())
    }

    /// Checks every hyperarc against `times`; returns the indices of violated ones.
    pub fn violations(&self, times: &[i128]) -> Vec<usize> {
        self.arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.satisfied_by(times))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub times: Vec<i128>,
}

impl Schedule {
    pub fn time(&self, v: usize) -> i128 {
        self.times[v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HytnOutcome {
    Feasible(Schedule),
    /// Nodes whose value could be lifted past the bound; never empty.
    Inconsistent {
        certificate: Vec<usize>,
    },
}

impl HytnOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, HytnOutcome::Feasible(_))
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        match self {
            HytnOutcome::Feasible(s) => Some(s),
            HytnOutcome::Inconsistent { .. } => None,
        }
    }
}

const TOP: i128 = i128::MAX;

pub fn solve_hytn(h: &Hytn) -> Result<HytnOutcome, HytnError> {
    solve_hytn_from(h, &vec![0; h.node_count()])
}

/// Least fixpoint at or above `start`. With a start of all zeros this is
/// [`solve_hytn`].
pub fn solve_hytn_from(h: &Hytn, start: &[i128]) -> Result<HytnOutcome, HytnError> {
    let n = h.node_count();
    if start.len() != n || start.iter().any(|&x| x < 0) {
        return Err(HytnError::BadStart);
    }

    let mut by_tail: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut by_head: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut gain = vec![0i128; n];
    for (i, a) in h.arcs.iter().enumerate() {
        by_tail[a.tail].push(i);
        for &(v, w) in &a.heads {
            by_head[v].push(a.tail);
            let g = w.checked_neg().ok_or(HytnError::Overflow)?.max(0);
            gain[a.tail] = gain[a.tail].max(g);
        }
    }
    for tails in &mut by_head {
        tails.sort_unstable();
        tails.dedup();
    }
    let start_max = start.iter().copied().max().unwrap_or(0);
    let bound = gain
        .iter()
        .try_fold(start_max, |acc, &g| acc.checked_add(g))
        .ok_or(HytnError::Overflow)?;

    let mut phi = start.to_vec();
    let mut queued = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).collect();

    while let Some(t) = queue.pop_front() {
        queued[t] = false;
        if phi[t] == TOP {
            continue;
        }
        let mut need = phi[t];
        for &ai in &by_tail[t] {
            let mut lo = TOP;
            for &(v, w) in &h.arcs[ai].heads {
                let x = if phi[v] == TOP {
                    TOP
                } else {
                    phi[v].checked_sub(w).ok_or(HytnError::Overflow)?
                };
                lo = lo.min(x);
            }
            need = need.max(lo);
        }
        if need <= phi[t] {
            continue;
        }
        phi[t] = if need > bound { TOP } else { need };
        for &u in &by_head[t] {
            if !queued[u] && phi[u] != TOP {
                queued[u] = true;
                queue.push_back(u);
            }
        }
    }

    let certificate: Vec<usize> = (0..n).filter(|&v| phi[v] == TOP).collect();
    if !certificate.is_empty() {
        return Ok(HytnOutcome::Inconsistent { certificate });
    }
    if let Some(&bad) = h.violations(&phi).first() {
        return Err(HytnError::Internal(format!(
            "lifting stopped with hyperarc {bad} violated"
        )));
    }
    Ok(HytnOutcome::Feasible(Schedule { times: phi }))
}

/// Consistency of a simple temporal network via the HyTN solver. A negative
/// self-loop is reported as an immediate inconsistency at its node; non-negative
/// self-loops are vacuous.
pub fn stn_consistency(g: &Stn) -> Result<HytnOutcome, HytnError> {
    let mut h = Hytn {
        nodes: g.nodes.clone(),
        arcs: Vec::with_capacity(g.arcs.len()),
    };
    for a in &g.arcs {
        if a.u >= g.nodes.len() || a.v >= g.nodes.len() {
            return Err(HytnError::UnknownNode(a.u.max(a.v).to_string()));
        }
        if a.u == a.v {
            if a.w < 0 {
                return Ok(HytnOutcome::Inconsistent {
                    certificate: vec![a.u],
                });
            }
            continue;
        }
        h.add_standard(a.u, a.v, a.w as i128)?;
    }
    solve_hytn(&h)
}
