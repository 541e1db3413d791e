//! Observation-order trees and the exhaustive π-DC decision procedure.
//!
//! A tree node carries a letter; its bit-0 and bit-1 children say which letter is
//! observed next once the node's letter is known. A missing child means that no further
//! observation happens on that branch, which lets trees follow networks whose
//! observation nodes are only present in some scenarios.
//!
//! Textual form: `*` is the empty tree, a bare name is a leaf, `p(l, r)` has bit-0
//! subtree `l` and bit-1 subtree `r`, and `_` marks a missing child.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dc::{node_name, require_wd, DcError};
use crate::hytn::{solve_hytn, Hytn, HytnError, HytnOutcome};
use crate::network::{difference_set, expand, Cstn, ScenarioNode};
use crate::scenario::{letter_bit, PartialScenario, Scenario};
use crate::strategy::{int_time, validate_pi_es, PiExecStrategy, StrategyError};

/// Default bound on `|P|` for enumeration.
pub const DEFAULT_MAX_LETTERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PsTreeError {
    #[error("tree syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("tree uses unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letter `{0}` occurs twice on one path")]
    RepeatedLetter(String),
    #[error("tree is not coherent with the network")]
    Incoherent,
    #[error("network has {letters} letters, enumeration is capped at {cap}")]
    CapExceeded { letters: usize, cap: usize },
    #[error(transparent)]
    Dc(#[from] DcError),
    #[error(transparent)]
    Hytn(#[from] HytnError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("self-check failed: tree strategy violates {}", .0.join("; "))]
    SelfCheck(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PsNode {
    pub letter: String,
    /// Indexed by bit.
    pub children: [Option<Box<PsNode>>; 2],
}

impl PsNode {
    pub fn leaf(letter: impl Into<String>) -> Self {
        Self {
            letter: letter.into(),
            children: [None, None],
        }
    }

    pub fn with_children(
        letter: impl Into<String>,
        zero: Option<PsNode>,
        one: Option<PsNode>,
    ) -> Self {
        Self {
            letter: letter.into(),
            children: [zero.map(Box::new), one.map(Box::new)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PsTree {
    pub root: Option<PsNode>,
}

impl PsTree {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        fn count(n: &PsNode) -> usize {
            1 + n.children.iter().flatten().map(|c| count(c)).sum::<usize>()
        }
        self.root.as_ref().map_or(0, count)
    }

    /// Letters observed in scenario `s`, in order, as letter indices of `g`.
    pub fn path(&self, g: &Cstn, s: Scenario) -> Result<Vec<usize>, PsTreeError> {
        let mut out = Vec::new();
        let mut cur = self.root.as_ref();
        while let Some(n) = cur {
            let p = letter_of(g, n)?;
            out.push(p);
            cur = n.children[s.value(p) as usize].as_deref();
        }
        Ok(out)
    }

    fn check_structure(&self, g: &Cstn) -> Result<(), PsTreeError> {
        fn walk(g: &Cstn, n: &PsNode, used: u32) -> Result<(), PsTreeError> {
            let p = letter_of(g, n)?;
            let bit = letter_bit(p, g.letters().len());
            if used & bit != 0 {
                return Err(PsTreeError::RepeatedLetter(n.letter.clone()));
            }
            for c in n.children.iter().flatten() {
                walk(g, c, used | bit)?;
            }
            Ok(())
        }
        match &self.root {
            Some(r) => walk(g, r, 0),
            None => Ok(()),
        }
    }
}

fn letter_of(g: &Cstn, n: &PsNode) -> Result<usize, PsTreeError> {
    g.letter_index(&n.letter)
        .ok_or_else(|| PsTreeError::UnknownLetter(n.letter.clone()))
}

impl fmt::Display for PsNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.letter)?;
        if self.children.iter().all(Option::is_none) {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, c) in self.children.iter().enumerate() {
            if i == 1 {
                f.write_str(", ")?;
            }
            match c {
                Some(c) => write!(f, "{c}")?,
                None => f.write_str("_")?,
            }
        }
        f.write_str(")")
    }
}

impl fmt::Display for PsTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.root {
            Some(r) => write!(f, "{r}"),
            None => f.write_str("*"),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> PsTreeError {
        PsTreeError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), PsTreeError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn name(&mut self) -> Result<String, PsTreeError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected a letter name")),
        }
        let end = chars
            .find(|&(_, c)| !(c.is_alphanumeric() || c == '_' || c == '\''))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Ok(rest[..end].to_string())
    }

    fn child(&mut self) -> Result<Option<PsNode>, PsTreeError> {
        if self.peek() == Some('_') {
            let save = self.pos;
            self.pos += 1;
            // `_` alone is a missing child; `_x` is a letter name
            if self.text[self.pos..]
                .chars()
                .next()
                .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '\'')
            {
                self.pos = save;
            } else {
                return Ok(None);
            }
        }
        self.node().map(Some)
    }

    fn node(&mut self) -> Result<PsNode, PsTreeError> {
        let letter = self.name()?;
        if self.peek() != Some('(') {
            return Ok(PsNode::leaf(letter));
        }
        self.expect('(')?;
        let zero = self.child()?;
        self.expect(',')?;
        let one = self.child()?;
        self.expect(')')?;
        Ok(PsNode::with_children(letter, zero, one))
    }
}

impl FromStr for PsTree {
    type Err = PsTreeError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { text, pos: 0 };
        let tree = if p.peek() == Some('*') {
            p.pos += 1;
            PsTree::empty()
        } else {
            PsTree {
                root: Some(p.node()?),
            }
        };
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(tree)
    }
}

/// Letter mask (scenario layout) of the observation nodes present in `s`.
fn present_letters(g: &Cstn, s: Scenario) -> u32 {
    g.observed_letters(s)
}

/// Every branch that ends leaves exactly the observations of each scenario it covers
/// on its path.
pub fn check_coherence(t: &PsTree, g: &Cstn) -> Result<bool, PsTreeError> {
    t.check_structure(g)?;
    let width = g.letters().len();
    fn branch_ok(g: &Cstn, rho: PartialScenario, used: u32) -> bool {
        rho.completions().all(|s| present_letters(g, s) == used)
    }
    fn walk(g: &Cstn, n: &PsNode, rho: PartialScenario, used: u32) -> Result<bool, PsTreeError> {
        let p = letter_of(g, n)?;
        let used = used | letter_bit(p, g.letters().len());
        for b in [false, true] {
            let rho = rho.assign(p, b);
            let ok = match &n.children[b as usize] {
                Some(c) => walk(g, c, rho, used)?,
                None => branch_ok(g, rho, used),
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
    let rho = PartialScenario::empty(width);
    match &t.root {
        Some(r) => walk(g, r, rho, 0),
        None => Ok(branch_ok(g, rho, 0)),
    }
}

/// The HyTN whose feasible schedules are the viable π-dynamic strategies following a
/// given tree.
#[derive(Debug, Clone)]
pub struct PiHytnEncoding {
    pub hytn: Hytn,
    pub origin: Vec<ScenarioNode>,
}

/// Expansion, one hyperarc per scenario pair and non-observation event, then for every
/// tree node `x` reached under the partial scenario `ρ_x`: child observations not before
/// `O_{p_x}` and `O_{p_x}` at one common time across all completions of `ρ_x`.
///
/// The equality arcs are added at leaves too: without them the last observation of a
/// branch could be scheduled differently in scenarios it cannot tell apart.
pub fn construct_pi_hytn(g: &Cstn, t: &PsTree) -> Result<PiHytnEncoding, PsTreeError> {
    require_wd(g)?;
    if !check_coherence(t, g)? {
        return Err(PsTreeError::Incoherent);
    }
    let ex = expand(g);
    let mut h = Hytn::new();
    for &sn in &ex.nodes {
        h.add_node(node_name(g, sn));
    }
    for &(u, v, w) in &ex.arcs {
        if u != v {
            h.add_standard(u, v, w as i128)?;
        }
    }
    for s1 in g.scenarios() {
        for s2 in g.scenarios() {
            if s1 == s2 {
                continue;
            }
            let delta = difference_set(g, s1, s2);
            for u in g.present_nodes(s1).filter(|&u| !g.is_observation(u)) {
                let Some(u2) = ex.node_index(u, s2) else {
                    continue;
                };
                let mut heads = vec![(u2, 0)];
                heads.extend(
                    delta
                        .iter()
                        .map(|&v| (ex.node_index(v, s1).expect("observer present"), 0)),
                );
                h.add_hyperarc(ex.node_index(u, s1).expect("present"), heads)?;
            }
        }
    }

    fn tree_arcs(
        g: &Cstn,
        ex: &crate::network::Expansion,
        h: &mut Hytn,
        n: &PsNode,
        rho: PartialScenario,
    ) -> Result<(), PsTreeError> {
        let p = letter_of(g, n)?;
        let o = g.observer(p);
        let scen: Vec<Scenario> = rho.completions().collect();
        let at = |v: usize, s: Scenario| ex.node_index(v, s).expect("coherent tree");
        for &s in &scen {
            if let Some(c) = &n.children[s.value(p) as usize] {
                let oc = g.observer(letter_of(g, c)?);
                h.add_standard(at(oc, s), at(o, s), 0)?;
            }
        }
        for &s1 in &scen {
            for &s2 in &scen {
                if s1 != s2 {
                    h.add_standard(at(o, s1), at(o, s2), 0)?;
                }
            }
        }
        for b in [false, true] {
            if let Some(c) = &n.children[b as usize] {
                tree_arcs(g, ex, h, c, rho.assign(p, b))?;
            }
        }
        Ok(())
    }
    if let Some(r) = &t.root {
        tree_arcs(g, &ex, &mut h, r, PartialScenario::empty(g.letters().len()))?;
    }
    Ok(PiHytnEncoding {
        hytn: h,
        origin: ex.nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeOutcome {
    Yes(PiExecStrategy),
    No { certificate: Vec<ScenarioNode> },
}

impl TreeOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, TreeOutcome::Yes(_))
    }
}

pub fn check_pi_dc_on_tree(g: &Cstn, t: &PsTree) -> Result<TreeOutcome, PsTreeError> {
    let enc = construct_pi_hytn(g, t)?;
    let phi = match solve_hytn(&enc.hytn)? {
        HytnOutcome::Inconsistent { certificate } => {
            return Ok(TreeOutcome::No {
                certificate: certificate.into_iter().map(|i| enc.origin[i]).collect(),
            })
        }
        HytnOutcome::Feasible(phi) => phi,
    };
    let mut times = vec![vec![None; g.node_count()]; g.scenario_count()];
    for (i, sn) in enc.origin.iter().enumerate() {
        times[sn.scenario.index()][sn.node] = Some(int_time(phi.times[i]));
    }
    let mut positions = vec![vec![None; g.node_count()]; g.scenario_count()];
    for s in g.scenarios() {
        for (i, p) in t.path(g, s)?.into_iter().enumerate() {
            positions[s.index()][g.observer(p)] = Some(i as u32 + 1);
        }
    }
    let sigma = PiExecStrategy { times, positions };
    let report = validate_pi_es(g, &sigma)?;
    if !report.is_ok() {
        return Err(PsTreeError::SelfCheck(
            report.violations.iter().map(|v| v.describe(g)).collect(),
        ));
    }
    Ok(TreeOutcome::Yes(sigma))
}

/// All trees coherent with `g`, each once. At every choice point letters are tried in
/// name order, and for a fixed letter the bit-0 subtree varies slowest.
pub fn enumerate_c_ps_trees(g: &Cstn, max_letters: usize) -> Result<Vec<PsTree>, PsTreeError> {
    let width = g.letters().len();
    if width > max_letters {
        return Err(PsTreeError::CapExceeded {
            letters: width,
            cap: max_letters,
        });
    }
    fn gen(g: &Cstn, rho: PartialScenario, used: u32) -> Vec<Option<PsNode>> {
        let width = g.letters().len();
        let completions: Vec<Scenario> = rho.completions().collect();
        let mut out = Vec::new();
        if completions.iter().all(|&s| present_letters(g, s) == used) {
            out.push(None);
        }
        for q in 0..width {
            let bit = letter_bit(q, width);
            if used & bit != 0
                || !completions
                    .iter()
                    .all(|&s| present_letters(g, s) & bit != 0)
            {
                continue;
            }
            let zeros = gen(g, rho.assign(q, false), used | bit);
            let ones = gen(g, rho.assign(q, true), used | bit);
            for z in &zeros {
                for o in &ones {
                    out.push(Some(PsNode::with_children(
                        g.letters()[q].clone(),
                        z.clone(),
                        o.clone(),
                    )));
                }
            }
        }
        out
    }
    Ok(gen(g, PartialScenario::empty(width), 0)
        .into_iter()
        .map(|root| PsTree { root })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExhaustiveOutcome {
    Yes {
        strategy: PiExecStrategy,
        tree: PsTree,
    },
    /// Every coherent tree was refuted.
    No { trees: usize },
}

impl ExhaustiveOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, ExhaustiveOutcome::Yes { .. })
    }
}

/// π-DC by trying every coherent tree in enumeration order; the first feasible one is
/// the witness.
pub fn check_pi_dc_exhaustive(
    g: &Cstn,
    max_letters: usize,
) -> Result<ExhaustiveOutcome, PsTreeError> {
    require_wd(g)?;
    let trees = enumerate_c_ps_trees(g, max_letters)?;
    let count = trees.len();
    for tree in trees {
        if let TreeOutcome::Yes(strategy) = check_pi_dc_on_tree(g, &tree)? {
            return Ok(ExhaustiveOutcome::Yes { strategy, tree });
        }
    }
    Ok(ExhaustiveOutcome::No { trees: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gamma_box, gamma_pi};

    #[test]
    fn text_round_trip() {
        for text in ["*", "p", "a(b(c, c), c(b, b))", "p(_, q)", "a(_x, _)"] {
            let t: PsTree = text.parse().unwrap();
            assert_eq!(t.to_string(), text);
        }
        assert_eq!("p(_, _)".parse::<PsTree>().unwrap().to_string(), "p");
        assert!("p(q)".parse::<PsTree>().is_err());
        assert!("p q".parse::<PsTree>().is_err());
    }

    #[test]
    fn coherence_examples() {
        let pi = gamma_pi();
        assert!(check_coherence(&"p".parse().unwrap(), &pi).unwrap());
        let b = gamma_box();
        assert!(!check_coherence(&"a".parse().unwrap(), &b).unwrap());
        assert!(check_coherence(&"a(b(c, c), c(b, b))".parse().unwrap(), &b).unwrap());
        assert!(check_coherence(&"c(a(b, b), b(a, a))".parse().unwrap(), &b).unwrap());
        assert!(!check_coherence(&PsTree::empty(), &b).unwrap());
        assert!(matches!(
            check_coherence(&"a(a, b)".parse().unwrap(), &b),
            Err(PsTreeError::RepeatedLetter(_))
        ));
        assert!(matches!(
            check_coherence(&"z".parse().unwrap(), &b),
            Err(PsTreeError::UnknownLetter(_))
        ));
    }

    #[test]
    fn gamma_pi_single_tree() {
        let g = gamma_pi();
        let trees = enumerate_c_ps_trees(&g, DEFAULT_MAX_LETTERS).unwrap();
        assert_eq!(trees.len(), 1);
        let enc = construct_pi_hytn(&g, &trees[0]).unwrap();
        // C' arcs in both directions between the two copies of O_p, no B' arcs
        let o: Vec<usize> = enc
            .origin
            .iter()
            .enumerate()
            .filter(|(_, sn)| sn.node == 0)
            .map(|(i, _)| i)
            .collect();
        let eq_arcs = enc
            .hytn
            .hyperarcs()
            .iter()
            .filter(|a| o.contains(&a.tail) && a.heads.len() == 1 && o.contains(&a.heads[0].0))
            .count();
        assert_eq!(eq_arcs, 2);
        assert!(check_pi_dc_on_tree(&g, &trees[0]).unwrap().is_yes());
    }

    #[test]
    fn gamma_box_all_trees_refuted() {
        let g = gamma_box();
        let trees = enumerate_c_ps_trees(&g, DEFAULT_MAX_LETTERS).unwrap();
        assert_eq!(trees.len(), 12);
        for t in &trees {
            assert!(!check_pi_dc_on_tree(&g, t).unwrap().is_yes(), "{t}");
        }
    }

    #[test]
    fn cap() {
        assert!(matches!(
            enumerate_c_ps_trees(&gamma_box(), 2),
            Err(PsTreeError::CapExceeded { .. })
        ));
    }
}
