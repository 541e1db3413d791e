//! The conditional network model, its well-definedness rules, scenario restriction
//! and expansion.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::label::{parse_label, Label, LabelError};
use crate::scenario::{all_scenarios, letter_bit, LabelMask, Scenario, MAX_LETTERS};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate letter `{0}`")]
    DuplicateLetter(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letter `{0}` has no observation node")]
    Unobserved(String),
    #[error("letter `{letter}` is observed by both `{first}` and `{second}`")]
    ObservedTwice {
        letter: String,
        first: String,
        second: String,
    },
    #[error("constraint {0} is a self-loop with negative weight")]
    NegativeSelfLoop(usize),
    #[error("too many letters ({0}, limit {MAX_LETTERS})")]
    TooManyLetters(usize),
    #[error("invalid label `{text}`: {source}")]
    Label { text: String, source: LabelError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub label: Label,
}

/// `⟨v − u ≤ w, label⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledConstraint {
    pub u: NodeId,
    pub v: NodeId,
    pub w: i64,
    pub label: Label,
}

/// Node description used to build a [`Cstn`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub name: String,
    pub label: Label,
    pub observes: Option<String>,
}

/// Constraint description used to build a [`Cstn`]; endpoints are node names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub u: String,
    pub v: String,
    pub w: i64,
    pub label: Label,
}

/// A conditional simple temporal network.
///
/// Immutable once built. Letters are kept sorted by name; scenario bit layouts and
/// the lexicographic scenario order are derived from that order.
#[derive(Debug, Clone)]
pub struct Cstn {
    letters: Vec<String>,
    nodes: Vec<Node>,
    observers: Vec<NodeId>,
    observed: Vec<Option<usize>>,
    constraints: Vec<LabelledConstraint>,
    node_masks: Vec<LabelMask>,
    constraint_masks: Vec<LabelMask>,
}

impl Cstn {
    pub fn builder() -> CstnBuilder {
        CstnBuilder::default()
    }

    pub fn new(
        letters: Vec<String>,
        nodes: Vec<NodeSpec>,
        constraints: Vec<ConstraintSpec>,
    ) -> Result<Self, ModelError> {
        let mut letters = letters;
        letters.sort();
        if let Some(w) = letters.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateLetter(w[0].clone()));
        }
        if letters.len() > MAX_LETTERS {
            return Err(ModelError::TooManyLetters(letters.len()));
        }
        let letter_index: HashMap<&str, usize> = letters
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();

        let mut node_index = HashMap::new();
        let mut observers: Vec<Option<NodeId>> = vec![None; letters.len()];
        let mut observed = Vec::with_capacity(nodes.len());
        let mut out_nodes = Vec::with_capacity(nodes.len());
        for (id, spec) in nodes.into_iter().enumerate() {
            if node_index.insert(spec.name.clone(), id).is_some() {
                return Err(ModelError::DuplicateNode(spec.name));
            }
            let obs = match &spec.observes {
                None => None,
                Some(p) => {
                    let &li = letter_index
                        .get(p.as_str())
                        .ok_or_else(|| ModelError::UnknownLetter(p.clone()))?;
                    if let Some(first) = observers[li] {
                        return Err(ModelError::ObservedTwice {
                            letter: p.clone(),
                            first: out_nodes
                                .get(first)
                                .map(|n: &Node| n.name.clone())
                                .unwrap_or_default(),
                            second: spec.name.clone(),
                        });
                    }
                    observers[li] = Some(id);
                    Some(li)
                }
            };
            observed.push(obs);
            out_nodes.push(Node {
                name: spec.name,
                label: spec.label,
            });
        }
        let observers = observers
            .into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| ModelError::Unobserved(letters[i].clone())))
            .collect::<Result<Vec<_>, _>>()?;

        let mut out_constraints = Vec::with_capacity(constraints.len());
        for (i, c) in constraints.into_iter().enumerate() {
            let u = *node_index
                .get(&c.u)
                .ok_or_else(|| ModelError::UnknownNode(c.u.clone()))?;
            let v = *node_index
                .get(&c.v)
                .ok_or_else(|| ModelError::UnknownNode(c.v.clone()))?;
            if u == v && c.w < 0 {
                return Err(ModelError::NegativeSelfLoop(i));
            }
            out_constraints.push(LabelledConstraint {
                u,
                v,
                w: c.w,
                label: c.label,
            });
        }

        let width = letters.len();
        let compile = |label: &Label| -> Result<LabelMask, ModelError> {
            let mut m = LabelMask::default();
            for (letter, sign) in label.literals() {
                let &li = letter_index
                    .get(letter)
                    .ok_or_else(|| ModelError::UnknownLetter(letter.to_string()))?;
                let bit = letter_bit(li, width);
                if sign {
                    m.pos |= bit;
                } else {
                    m.neg |= bit;
                }
            }
            Ok(m)
        };
        let node_masks = out_nodes
            .iter()
            .map(|n| compile(&n.label))
            .collect::<Result<Vec<_>, _>>()?;
        let constraint_masks = out_constraints
            .iter()
            .map(|c| compile(&c.label))
            .collect::<Result<Vec<_>, _>>()?;

        Ok(Self {
            letters,
            nodes: out_nodes,
            observers,
            observed,
            constraints: out_constraints,
            node_masks,
            constraint_masks,
        })
    }

    /// Same structure, different constraint weights.
    pub(crate) fn with_weights(&self, f: impl Fn(i64) -> Option<i64>) -> Option<Self> {
        let mut out = self.clone();
        for c in &mut out.constraints {
            c.w = f(c.w)?;
        }
        Some(out)
    }

    /// Letter names, sorted.
    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.letters.binary_search_by(|l| l.as_str().cmp(name)).ok()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.nodes[v].name
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn constraints(&self) -> &[LabelledConstraint] {
        &self.constraints
    }

    /// The observation node `O_p` of letter `p`.
    pub fn observer(&self, letter: usize) -> NodeId {
        self.observers[letter]
    }

    /// The letter observed at `v`, if `v` is an observation node.
    pub fn observed_letter(&self, v: NodeId) -> Option<usize> {
        self.observed[v]
    }

    pub fn is_observation(&self, v: NodeId) -> bool {
        self.observed[v].is_some()
    }

    pub fn observation_count(&self) -> usize {
        self.observers.len()
    }

    pub fn scenario_count(&self) -> usize {
        1 << self.letters.len()
    }

    /// `Σ_P` in lexicographic order.
    pub fn scenarios(&self) -> impl Iterator<Item = Scenario> {
        all_scenarios(self.letters.len())
    }

    pub fn scenario(&self, index: usize) -> Scenario {
        Scenario::from_index(index, self.letters.len())
    }

    /// `v ∈ V⁺_s`.
    pub fn node_present(&self, v: NodeId, s: Scenario) -> bool {
        self.node_masks[v].satisfied_by(s)
    }

    pub fn constraint_active(&self, c: usize, s: Scenario) -> bool {
        self.constraint_masks[c].satisfied_by(s)
    }

    /// `V⁺_s` in node order.
    pub fn present_nodes(&self, s: Scenario) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(move |&v| self.node_present(v, s))
    }

    /// Bit mask (scenario layout) of the letters whose observation node is in `V⁺_s`.
    pub(crate) fn observed_letters(&self, s: Scenario) -> u32 {
        let width = self.letters.len();
        let mut mask = 0;
        for (p, &o) in self.observers.iter().enumerate() {
            if self.node_present(o, s) {
                mask |= letter_bit(p, width);
            }
        }
        mask
    }

    /// The label `ℓ_s` describing a complete scenario.
    pub fn scenario_label(&self, s: Scenario) -> Label {
        Label::from_literals(
            self.letters
                .iter()
                .enumerate()
                .map(|(i, l)| (l.clone(), s.value(i))),
        )
        .expect("scenario labels are satisfiable")
    }

    /// Inverse of [`Cstn::scenario_label`]: the label must mention every letter.
    pub fn scenario_from_label(&self, label: &Label) -> Option<Scenario> {
        if label.len() != self.letters.len() {
            return None;
        }
        let mut values = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            values.push(label.sign(l)?);
        }
        Some(Scenario::from_values(&values))
    }

    /// Evaluates a label (over this network's letters) under a scenario.
    pub fn eval_label(&self, label: &Label, s: Scenario) -> bool {
        label.eval(|name| self.letter_index(name).map(|i| s.value(i)))
    }

    pub(crate) fn node_mask(&self, v: NodeId) -> LabelMask {
        self.node_masks[v]
    }

    pub(crate) fn constraint_mask(&self, c: usize) -> LabelMask {
        self.constraint_masks[c]
    }

    /// Largest absolute constraint weight.
    pub fn max_abs_weight(&self) -> i64 {
        self.constraints
            .iter()
            .map(|c| c.w.abs())
            .max()
            .unwrap_or(0)
    }
}

/// Convenience builder taking names and label text.
#[derive(Debug, Default, Clone)]
pub struct CstnBuilder {
    letters: Vec<String>,
    nodes: Vec<(String, String, Option<String>)>,
    constraints: Vec<(String, String, i64, String)>,
}

impl CstnBuilder {
    pub fn letter(mut self, name: &str) -> Self {
        self.letters.push(name.to_string());
        self
    }

    pub fn node(mut self, name: &str, label: &str) -> Self {
        self.nodes.push((name.into(), label.into(), None));
        self
    }

    pub fn observation(mut self, name: &str, label: &str, letter: &str) -> Self {
        self.nodes
            .push((name.into(), label.into(), Some(letter.to_string())));
        self
    }

    /// Adds `⟨v − u ≤ w, label⟩`.
    pub fn constraint(mut self, u: &str, v: &str, w: i64, label: &str) -> Self {
        self.constraints.push((u.into(), v.into(), w, label.into()));
        self
    }

    pub fn build(self) -> Result<Cstn, ModelError> {
        let parse =
            |text: String| parse_label(&text).map_err(|source| ModelError::Label { text, source });
        let nodes = self
            .nodes
            .into_iter()
            .map(|(name, label, observes)| {
                Ok(NodeSpec {
                    name,
                    label: parse(label)?,
                    observes,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let constraints = self
            .constraints
            .into_iter()
            .map(|(u, v, w, label)| {
                Ok(ConstraintSpec {
                    u,
                    v,
                    w,
                    label: parse(label)?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Cstn::new(self.letters, nodes, constraints)
    }
}

/// A list of violations; empty means the checked property holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport<V> {
    pub violations: Vec<V>,
}

impl<V> Default for ValidationReport<V> {
    fn default() -> Self {
        Self {
            violations: Vec::new(),
        }
    }
}

impl<V> ValidationReport<V> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: V) {
        self.violations.push(v);
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A breach of the well-definedness rules WD1–WD3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WdViolation {
    /// WD1: the constraint label does not subsume the label of one endpoint.
    EndpointNotSubsumed { constraint: usize, endpoint: NodeId },
    /// WD2: `L(u)` mentions `p` but does not subsume `L(O_p)`.
    NodeLabelNotSubsumed { node: NodeId, letter: usize },
    /// WD2: `L(u)` mentions `p` but `⟨O_p − u ≤ 0, L(u)⟩` is missing.
    MissingObservationArc { node: NodeId, letter: usize },
    /// WD3: the constraint label mentions `p` but does not subsume `L(O_p)`.
    ConstraintLabelNotSubsumed { constraint: usize, letter: usize },
}

impl WdViolation {
    pub fn describe(&self, g: &Cstn) -> String {
        let c = |i: usize| {
            let c = &g.constraints()[i];
            format!(
                "⟨{} − {} ≤ {}, {}⟩",
                g.node_name(c.v),
                g.node_name(c.u),
                c.w,
                label_text(&c.label)
            )
        };
        match *self {
            WdViolation::EndpointNotSubsumed {
                constraint,
                endpoint,
            } => format!(
                "WD1: label of {} does not subsume L({})",
                c(constraint),
                g.node_name(endpoint)
            ),
            WdViolation::NodeLabelNotSubsumed { node, letter } => format!(
                "WD2: L({}) mentions {} but does not subsume L({})",
                g.node_name(node),
                g.letters()[letter],
                g.node_name(g.observer(letter))
            ),
            WdViolation::MissingObservationArc { node, letter } => format!(
                "WD2: missing ⟨{} − {} ≤ 0, L({})⟩",
                g.node_name(g.observer(letter)),
                g.node_name(node),
                g.node_name(node)
            ),
            WdViolation::ConstraintLabelNotSubsumed { constraint, letter } => format!(
                "WD3: label of {} mentions {} but does not subsume L({})",
                c(constraint),
                g.letters()[letter],
                g.node_name(g.observer(letter))
            ),
        }
    }
}

pub(crate) fn label_text(l: &Label) -> String {
    if l.is_empty() {
        "λ".into()
    } else {
        l.to_string()
    }
}

/// Checks WD1–WD3 and reports every violation.
///
/// The WD2 arc requirement accepts any constraint `⟨O_p − u ≤ w, ℓ⟩` with `w ≤ 0` and
/// `Sub(L(u), ℓ)`, since such a constraint implies the required one. For `u = O_p` the
/// required arc is a tautology and is not looked for.
pub fn wd_check(g: &Cstn) -> ValidationReport<WdViolation> {
    let mut report = ValidationReport::default();
    let width = g.letters().len();

    for (ci, c) in g.constraints().iter().enumerate() {
        let m = g.constraint_mask(ci);
        for endpoint in [c.u, c.v] {
            if !m.subsumes(g.node_mask(endpoint)) {
                report.push(WdViolation::EndpointNotSubsumed {
                    constraint: ci,
                    endpoint,
                });
            }
            if c.u == c.v {
                break;
            }
        }
    }

    for u in 0..g.node_count() {
        let m = g.node_mask(u);
        for p in 0..width {
            if m.letters() & letter_bit(p, width) == 0 {
                continue;
            }
            let op = g.observer(p);
            if !m.subsumes(g.node_mask(op)) {
                report.push(WdViolation::NodeLabelNotSubsumed { node: u, letter: p });
            }
            if op == u {
                continue;
            }
            let has_arc = g.constraints().iter().enumerate().any(|(ci, c)| {
                c.u == u && c.v == op && c.w <= 0 && m.subsumes(g.constraint_mask(ci))
            });
            if !has_arc {
                report.push(WdViolation::MissingObservationArc { node: u, letter: p });
            }
        }
    }

    for ci in 0..g.constraints().len() {
        let m = g.constraint_mask(ci);
        for p in 0..width {
            if m.letters() & letter_bit(p, width) != 0 && !m.subsumes(g.node_mask(g.observer(p))) {
                report.push(WdViolation::ConstraintLabelNotSubsumed {
                    constraint: ci,
                    letter: p,
                });
            }
        }
    }
    report
}

/// A simple temporal network; arcs `(u, v, w)` mean `v − u ≤ w`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stn {
    pub nodes: Vec<String>,
    pub arcs: Vec<StnArc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StnArc {
    pub u: usize,
    pub v: usize,
    pub w: i64,
}

impl Stn {
    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Arcs as `(u name, v name, w)` triples.
    pub fn named_arcs(&self) -> impl Iterator<Item = (&str, &str, i64)> + '_ {
        self.arcs
            .iter()
            .map(|a| (self.nodes[a.u].as_str(), self.nodes[a.v].as_str(), a.w))
    }
}

/// The restriction `Γ⁺_s = ⟨V⁺_s, A⁺_s⟩`. `A⁺_s` is a set of triples: constraints that
/// project onto the same `(u, v, w)` appear once.
pub fn restrict(g: &Cstn, s: Scenario) -> Stn {
    let mut local = vec![usize::MAX; g.node_count()];
    let mut nodes = Vec::new();
    for v in g.present_nodes(s) {
        local[v] = nodes.len();
        nodes.push(g.node_name(v).to_string());
    }
    let mut seen = HashSet::new();
    let mut arcs = Vec::new();
    for (ci, c) in g.constraints().iter().enumerate() {
        if !g.constraint_active(ci, s) {
            continue;
        }
        let arc = StnArc {
            u: local[c.u],
            v: local[c.v],
            w: c.w,
        };
        debug_assert!(arc.u != usize::MAX && arc.v != usize::MAX, "WD1 violated");
        if seen.insert(arc) {
            arcs.push(arc);
        }
    }
    Stn { nodes, arcs }
}

/// Scenario-node of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScenarioNode {
    pub node: NodeId,
    pub scenario: Scenario,
}

/// The expansion `⟨V^Ex, Λ^Ex⟩`: one copy of `Γ⁺_s` per scenario.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub nodes: Vec<ScenarioNode>,
    /// `(u, v, w)` over expansion-node indices, meaning `v − u ≤ w`.
    pub arcs: Vec<(usize, usize, i64)>,
    index: Vec<Vec<Option<usize>>>,
}

impl Expansion {
    /// Index of `v_s`, if `v ∈ V⁺_s`.
    pub fn node_index(&self, v: NodeId, s: Scenario) -> Option<usize> {
        self.index[s.index()][v]
    }
}

pub fn expand(g: &Cstn) -> Expansion {
    let mut nodes = Vec::new();
    let mut index = vec![vec![None; g.node_count()]; g.scenario_count()];
    let mut arcs = Vec::new();
    for s in g.scenarios() {
        for v in g.present_nodes(s) {
            index[s.index()][v] = Some(nodes.len());
            nodes.push(ScenarioNode {
                node: v,
                scenario: s,
            });
        }
        let mut seen = HashSet::new();
        for (ci, c) in g.constraints().iter().enumerate() {
            if !g.constraint_active(ci, s) || !seen.insert((c.u, c.v, c.w)) {
                continue;
            }
            let (Some(u), Some(v)) = (index[s.index()][c.u], index[s.index()][c.v]) else {
                continue;
            };
            arcs.push((u, v, c.w));
        }
    }
    Expansion { nodes, arcs, index }
}

/// `Δ(s1; s2) = {O_p ∈ OV⁺_{s1} | s1(p) ≠ s2(p)}`, in letter order.
pub fn difference_set(g: &Cstn, s1: Scenario, s2: Scenario) -> Vec<NodeId> {
    let diff = s1.disagreement(s2);
    let width = g.letters().len();
    (0..width)
        .filter(|&p| diff & letter_bit(p, width) != 0)
        .map(|p| g.observer(p))
        .filter(|&o| g.node_present(o, s1))
        .collect()
}

impl fmt::Display for Cstn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "letters: {}", self.letters.join(", "))?;
        for (v, n) in self.nodes.iter().enumerate() {
            write!(f, "node {} [{}]", n.name, label_text(&n.label))?;
            if let Some(p) = self.observed[v] {
                write!(f, " observes {}", self.letters[p])?;
            }
            writeln!(f)?;
        }
        for c in &self.constraints {
            writeln!(
                f,
                "{} − {} ≤ {} [{}]",
                self.nodes[c.v].name,
                self.nodes[c.u].name,
                c.w,
                label_text(&c.label)
            )?;
        }
        Ok(())
    }
}
