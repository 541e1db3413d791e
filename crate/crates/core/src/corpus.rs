//! The two example networks, their hand-written strategies, and seeded random instance
//! generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::label::Label;
use crate::network::{wd_check, ConstraintSpec, Cstn, NodeSpec, Stn, StnArc};
use crate::strategy::{int_time, ExecStrategy, PiExecStrategy};

/// Example network with three letters that is 0-DC but neither DC nor π-DC.
pub fn gamma_box() -> Cstn {
    Cstn::builder()
        .letter("a")
        .letter("b")
        .letter("c")
        .node("⊥", "")
        .node("⊤", "")
        .observation("A", "", "a")
        .observation("B", "", "b")
        .observation("C", "", "c")
        .constraint("⊥", "⊤", 1, "")
        .constraint("⊤", "⊥", -1, "")
        .constraint("A", "⊤", 0, "b & !c")
        .constraint("B", "⊤", 0, "a & c")
        .constraint("C", "⊤", 0, "!a & !b")
        .constraint("A", "⊥", 0, "")
        .constraint("⊥", "A", 0, "!b")
        .constraint("⊥", "A", 0, "c")
        .constraint("B", "⊥", 0, "")
        .constraint("⊥", "B", 0, "!a")
        .constraint("⊥", "B", 0, "!c")
        .constraint("C", "⊥", 0, "")
        .constraint("⊥", "C", 0, "a")
        .constraint("⊥", "C", 0, "b")
        .build()
        .expect("static network")
}

/// Example network with one letter that is π-DC but not DC.
pub fn gamma_pi() -> Cstn {
    Cstn::builder()
        .letter("p")
        .observation("O_p", "", "p")
        .node("X", "")
        .node("⊤", "")
        .constraint("O_p", "⊤", 1, "")
        .constraint("⊤", "O_p", -1, "")
        .constraint("O_p", "X", 0, "p")
        .constraint("X", "⊤", 0, "!p")
        .build()
        .expect("static network")
}

/// The 0-dynamic strategy for [`gamma_box`]: `A` waits until 1 exactly when `b ∧ ¬c`,
/// `B` when `a ∧ c`, `C` when `¬a ∧ ¬b`.
pub fn sigma_box() -> ExecStrategy {
    let g = gamma_box();
    let mut sigma = ExecStrategy::empty_for(&g);
    let id = |n: &str| g.node_id(n).expect("node");
    for s in g.scenarios() {
        let (a, b, c) = (s.value(0), s.value(1), s.value(2));
        let t = |late: bool| int_time(late as i128);
        sigma.set(s, id("⊥"), int_time(0));
        sigma.set(s, id("⊤"), int_time(1));
        sigma.set(s, id("A"), t(b && !c));
        sigma.set(s, id("B"), t(a && c));
        sigma.set(s, id("C"), t(!a && !b));
    }
    sigma
}

/// The π-dynamic strategy for [`gamma_pi`]: observe `p` first at 0, run `X` at once if
/// `p` holds and at 1 otherwise.
pub fn sigma_pi() -> PiExecStrategy {
    let g = gamma_pi();
    let (o, x, top) = (
        g.node_id("O_p").unwrap(),
        g.node_id("X").unwrap(),
        g.node_id("⊤").unwrap(),
    );
    let mut times = vec![vec![None; 3]; 2];
    let mut positions = vec![vec![None; 3]; 2];
    for s in g.scenarios() {
        let row = &mut times[s.index()];
        row[o] = Some(int_time(0));
        row[x] = Some(int_time(if s.value(0) { 0 } else { 1 }));
        row[top] = Some(int_time(1));
        positions[s.index()][o] = Some(1);
    }
    PiExecStrategy { times, positions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub max_letters: usize,
    pub max_nodes: usize,
    pub max_weight: i64,
    pub max_constraints: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            max_letters: 2,
            max_nodes: 5,
            max_weight: 3,
            max_constraints: 8,
        }
    }
}

const LETTERS: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

fn close(label: &Label, obs_labels: &[Label]) -> Option<Label> {
    let mut out = label.clone();
    loop {
        let mut next = out.clone();
        for (i, l) in obs_labels.iter().enumerate() {
            if out.mentions(LETTERS[i]) {
                next = next.conjoin(l)?;
            }
        }
        if next == out {
            return Some(out);
        }
        out = next;
    }
}

fn random_label(rng: &mut ChaCha8Rng, letters: usize, density: f64) -> Label {
    let mut l = Label::empty();
    for name in LETTERS.iter().take(letters) {
        if rng.gen_bool(density) {
            l = l
                .conjoin(&Label::literal(*name, rng.gen_bool(0.5)))
                .expect("fresh letter");
        }
    }
    l
}

/// A seeded random well-defined network. Observation nodes are either unlabelled or
/// labelled by a literal of an earlier letter; every label is closed under the
/// observation labels of the letters it mentions and the required observation arcs are
/// added, so the result always passes [`wd_check`].
pub fn random_cstn(seed: u64, params: RandomParams) -> Cstn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_letters = params.max_letters.min(LETTERS.len());
    loop {
        if let Some(g) = try_random_cstn(&mut rng, max_letters, params) {
            return g;
        }
    }
}

fn try_random_cstn(rng: &mut ChaCha8Rng, max_letters: usize, params: RandomParams) -> Option<Cstn> {
    let nl = rng.gen_range(0..=max_letters);
    let nv = rng.gen_range(nl.max(1)..=params.max_nodes.max(nl).max(1));
    let w = params.max_weight;

    let mut obs_labels: Vec<Label> = Vec::new();
    for i in 0..nl {
        let l = if i > 0 && rng.gen_bool(0.3) {
            let j = rng.gen_range(0..i);
            Label::literal(LETTERS[j], rng.gen_bool(0.5)).conjoin(&obs_labels[j])?
        } else {
            Label::empty()
        };
        obs_labels.push(l);
    }

    let mut nodes = Vec::new();
    let mut labels = Vec::new();
    for (i, l) in obs_labels.iter().enumerate() {
        nodes.push(NodeSpec {
            name: format!("O_{}", LETTERS[i]),
            label: l.clone(),
            observes: Some(LETTERS[i].to_string()),
        });
        labels.push(l.clone());
    }
    for k in nl..nv {
        let raw = random_label(rng, nl, 0.2);
        let l = close(&raw, &obs_labels).unwrap_or_default();
        nodes.push(NodeSpec {
            name: format!("X{}", k - nl + 1),
            label: l.clone(),
            observes: None,
        });
        labels.push(l);
    }

    let mut constraints = Vec::new();
    for (u, l) in labels.iter().enumerate() {
        for (i, name) in LETTERS.iter().enumerate().take(nl) {
            if l.mentions(name) && nodes[u].observes.as_deref() != Some(name) {
                constraints.push(ConstraintSpec {
                    u: nodes[u].name.clone(),
                    v: nodes[i].name.clone(),
                    w: if rng.gen_bool(0.8) {
                        0
                    } else {
                        -rng.gen_range(0..=w)
                    },
                    label: l.clone(),
                });
            }
        }
    }

    let m = rng.gen_range(0..=params.max_constraints);
    let ids: Vec<usize> = (0..nv).collect();
    for _ in 0..m {
        if nv < 2 {
            break;
        }
        let pair: Vec<&usize> = ids.choose_multiple(rng, 2).collect();
        let (u, v) = (*pair[0], *pair[1]);
        let raw = random_label(rng, nl, 0.25);
        let Some(l) = raw
            .conjoin(&labels[u])
            .and_then(|l| l.conjoin(&labels[v]))
            .and_then(|l| close(&l, &obs_labels))
        else {
            continue;
        };
        constraints.push(ConstraintSpec {
            u: nodes[u].name.clone(),
            v: nodes[v].name.clone(),
            w: rng.gen_range(-w..=w),
            label: l,
        });
    }

    let letters = LETTERS[..nl].iter().map(|s| s.to_string()).collect();
    let g = Cstn::new(letters, nodes, constraints).ok()?;
    wd_check(&g).is_ok().then_some(g)
}

/// A seeded random simple temporal network with at most `max_nodes` nodes and weights in
/// `[-max_weight, max_weight]`. About half of the instances are built around a hidden
/// schedule so that both verdicts occur often.
pub fn random_stn(seed: u64, max_nodes: usize, max_weight: i64) -> Stn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_nodes.max(1));
    let m = rng.gen_range(0..=3 * n);
    let planted = rng.gen_bool(0.5);
    let hidden: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_weight)).collect();
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let w = if planted {
            let slack = rng.gen_range(0..=2);
            (hidden[v] - hidden[u] + slack).clamp(-max_weight, max_weight)
        } else {
            rng.gen_range(-max_weight..=max_weight)
        };
        arcs.push(StnArc { u, v, w });
    }
    Stn {
        nodes: (0..n).map(|i| format!("v{i}")).collect(),
        arcs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_are_well_defined() {
        assert!(wd_check(&gamma_box()).is_ok());
        assert!(wd_check(&gamma_pi()).is_ok());
    }

    #[test]
    fn generator_is_deterministic() {
        let a = random_cstn(7, RandomParams::default());
        let b = random_cstn(7, RandomParams::default());
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(random_stn(3, 50, 20), random_stn(3, 50, 20));
    }

    #[test]
    fn generator_respects_bounds() {
        let p = RandomParams::default();
        for seed in 0..200 {
            let g = random_cstn(seed, p);
            assert!(g.letters().len() <= p.max_letters);
            assert!(g.node_count() <= p.max_nodes);
            assert!(g.max_abs_weight() <= p.max_weight);
            assert!(wd_check(&g).is_ok());
        }
    }
}
