//! Propositional labels: conjunctions of literals over the letters of a network.
//!
//! Concrete syntax: `label := "" | literal ("&" literal)*`, `literal := ["!"] name`.
//! Whitespace is ignored. The empty label (written as the empty string) is satisfied
//! by every scenario.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsatisfiable label: letter `{0}` appears with both signs")]
    Unsatisfiable(String),
}

/// A satisfiable conjunction of literals, keyed by letter name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    literals: BTreeMap<String, bool>,
}

impl Label {
    /// The empty label λ.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn literal(letter: impl Into<String>, positive: bool) -> Self {
        let mut literals = BTreeMap::new();
        literals.insert(letter.into(), positive);
        Self { literals }
    }

    /// Builds a label from `(letter, positive)` pairs, rejecting contradictory pairs.
    pub fn from_literals<I, S>(literals: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        let mut out = Label::empty();
        for (letter, sign) in literals {
            out.insert(letter.into(), sign)?;
        }
        Ok(out)
    }

    fn insert(&mut self, letter: String, sign: bool) -> Result<(), LabelError> {
        match self.literals.get(&letter) {
            Some(&prev) if prev != sign => Err(LabelError::Unsatisfiable(letter)),
            Some(_) => Ok(()),
            None => {
                self.literals.insert(letter, sign);
                Ok(())
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    /// Literals in letter-name order.
    pub fn literals(&self) -> impl Iterator<Item = (&str, bool)> + '_ {
        self.literals.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn letters(&self) -> impl Iterator<Item = &str> + '_ {
        self.literals.keys().map(String::as_str)
    }

    pub fn sign(&self, letter: &str) -> Option<bool> {
        self.literals.get(letter).copied()
    }

    pub fn mentions(&self, letter: &str) -> bool {
        self.literals.contains_key(letter)
    }

    /// `Con(self, other)`: the conjunction is satisfiable.
    pub fn consistent_with(&self, other: &Label) -> bool {
        self.literals
            .iter()
            .all(|(k, v)| other.literals.get(k).is_none_or(|w| w == v))
    }

    /// `Sub(self, other)`: `self ⇒ other`, i.e. every literal of `other` occurs in `self`.
    pub fn subsumes(&self, other: &Label) -> bool {
        other
            .literals
            .iter()
            .all(|(k, v)| self.literals.get(k) == Some(v))
    }

    /// The conjunction `self ∧ other`, or `None` when it is unsatisfiable.
    pub fn conjoin(&self, other: &Label) -> Option<Label> {
        let mut out = self.clone();
        for (k, &v) in &other.literals {
            out.insert(k.clone(), v).ok()?;
        }
        Some(out)
    }

    /// Truth value under an assignment; letters the assignment does not cover make the
    /// label false.
    pub fn eval<F>(&self, assignment: F) -> bool
    where
        F: Fn(&str) -> Option<bool>,
    {
        self.literals.iter().all(|(k, &v)| assignment(k) == Some(v))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &v) in &self.literals {
            if !first {
                f.write_str(" & ")?;
            }
            first = false;
            if !v {
                f.write_str("!")?;
            }
            f.write_str(k)?;
        }
        Ok(())
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Parses the textual form of a label. Blank text yields λ.
pub fn parse_label(text: &str) -> Result<Label, LabelError> {
    let mut label = Label::empty();
    let mut chars = text.char_indices().peekable();
    let skip_ws = |chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>| {
        while chars.peek().is_some_and(|(_, c)| c.is_whitespace()) {
            chars.next();
        }
    };

    skip_ws(&mut chars);
    if chars.peek().is_none() {
        return Ok(label);
    }
    loop {
        skip_ws(&mut chars);
        let mut positive = true;
        if let Some(&(_, '!')) = chars.peek() {
            positive = false;
            chars.next();
            skip_ws(&mut chars);
        }
        let (start, first) = match chars.next() {
            Some((i, c)) if is_name_start(c) => (i, c),
            Some((i, c)) => {
                return Err(LabelError::Syntax {
                    pos: i,
                    msg: format!("expected a letter name, found `{c}`"),
                })
            }
            None => {
                return Err(LabelError::Syntax {
                    pos: text.len(),
                    msg: "expected a letter name, found end of input".into(),
                })
            }
        };
        let mut end = start + first.len_utf8();
        while let Some(&(i, c)) = chars.peek() {
            if !is_name_char(c) {
                break;
            }
            end = i + c.len_utf8();
            chars.next();
        }
        label.insert(text[start..end].to_string(), positive)?;

        skip_ws(&mut chars);
        match chars.next() {
            None => return Ok(label),
            Some((_, '&')) => continue,
            Some((i, c)) => {
                return Err(LabelError::Syntax {
                    pos: i,
                    msg: format!("expected `&` or end of input, found `{c}`"),
                })
            }
        }
    }
}

/// `(Con(l1, l2), Sub(l1, l2))`.
pub fn label_logic(l1: &Label, l2: &Label) -> (bool, bool) {
    (l1.consistent_with(l2), l1.subsumes(l2))
}
