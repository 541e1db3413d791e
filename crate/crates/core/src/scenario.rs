//! Complete and partial truth assignments over the letters of a network.
//!
//! Letters are indexed by their position in the network's name-sorted letter list.
//! A complete scenario over `width` letters is stored as a bit string whose most
//! significant bit is letter 0, so the numeric value of the bits is exactly the
//! scenario's rank in lexicographic order (bit 0 before bit 1).

use std::fmt;

/// Hard limit on the number of letters: scenarios are enumerated exhaustively.
pub const MAX_LETTERS: usize = 20;

#[inline]
pub(crate) fn letter_bit(letter: usize, width: usize) -> u32 {
    debug_assert!(letter < width);
    1 << (width - 1 - letter)
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    bits: u32,
    width: u8,
}

impl Scenario {
    pub fn from_index(index: usize, width: usize) -> Self {
        assert!(width <= MAX_LETTERS && index < (1usize << width));
        Self {
            bits: index as u32,
            width: width as u8,
        }
    }

    /// Scenario from explicit truth values, letter 0 first.
    pub fn from_values(values: &[bool]) -> Self {
        let width = values.len();
        let mut bits = 0;
        for (i, &b) in values.iter().enumerate() {
            if b {
                bits |= letter_bit(i, width);
            }
        }
        Self {
            bits,
            width: width as u8,
        }
    }

    /// Lexicographic rank; also the index used by strategies.
    pub fn index(self) -> usize {
        self.bits as usize
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    pub(crate) fn bits(self) -> u32 {
        self.bits
    }

    pub fn value(self, letter: usize) -> bool {
        self.bits & letter_bit(letter, self.width()) != 0
    }

    pub fn with(self, letter: usize, value: bool) -> Self {
        let bit = letter_bit(letter, self.width());
        let bits = if value {
            self.bits | bit
        } else {
            self.bits & !bit
        };
        Self { bits, ..self }
    }

    /// Bit mask of the letters on which `self` and `other` disagree.
    pub(crate) fn disagreement(self, other: Scenario) -> u32 {
        self.bits ^ other.bits
    }

    pub fn values(self) -> impl Iterator<Item = bool> {
        (0..self.width()).map(move |i| self.value(i))
    }
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Scenario(")?;
        for b in self.values() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

/// All complete scenarios over `width` letters in lexicographic order.
pub fn all_scenarios(width: usize) -> impl Iterator<Item = Scenario> {
    assert!(width <= MAX_LETTERS);
    (0..1usize << width).map(move |i| Scenario::from_index(i, width))
}

/// Truth assignment over a subset of the letters.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Default)]
pub struct PartialScenario {
    assigned: u32,
    values: u32,
    width: u8,
}

impl PartialScenario {
    pub fn empty(width: usize) -> Self {
        Self {
            assigned: 0,
            values: 0,
            width: width as u8,
        }
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    pub fn assign(self, letter: usize, value: bool) -> Self {
        let bit = letter_bit(letter, self.width());
        Self {
            assigned: self.assigned | bit,
            values: if value {
                self.values | bit
            } else {
                self.values & !bit
            },
            width: self.width,
        }
    }

    pub fn get(self, letter: usize) -> Option<bool> {
        let bit = letter_bit(letter, self.width());
        (self.assigned & bit != 0).then_some(self.values & bit != 0)
    }

    pub fn is_empty(self) -> bool {
        self.assigned == 0
    }

    pub fn len(self) -> usize {
        self.assigned.count_ones() as usize
    }

    /// Assigned letters with their values, in letter order.
    pub fn iter(self) -> impl Iterator<Item = (usize, bool)> {
        (0..self.width()).filter_map(move |i| self.get(i).map(|v| (i, v)))
    }

    /// `Con(self, s)` for a complete scenario `s`: the two agree wherever `self` is defined.
    pub fn consistent_with(self, s: Scenario) -> bool {
        (s.bits() ^ self.values) & self.assigned == 0
    }

    /// `self ⊆ other` as sets of literals.
    pub fn is_subset_of(self, other: PartialScenario) -> bool {
        self.assigned & !other.assigned == 0 && (self.values ^ other.values) & self.assigned == 0
    }

    /// All complete scenarios that extend `self`, in lexicographic order.
    pub fn completions(self) -> impl Iterator<Item = Scenario> {
        all_scenarios(self.width()).filter(move |&s| self.consistent_with(s))
    }
}

impl fmt::Debug for PartialScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Partial(")?;
        for i in 0..self.width() {
            f.write_str(match self.get(i) {
                Some(true) => "1",
                Some(false) => "0",
                None => "*",
            })?;
        }
        f.write_str(")")
    }
}

/// Compiled label: bit masks of positive and negative letters, same bit layout as
/// [`Scenario`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct LabelMask {
    pub pos: u32,
    pub neg: u32,
}

impl LabelMask {
    #[inline]
    pub fn satisfied_by(self, s: Scenario) -> bool {
        s.bits() & self.pos == self.pos && s.bits() & self.neg == 0
    }

    pub fn letters(self) -> u32 {
        self.pos | self.neg
    }

    pub fn subsumes(self, other: LabelMask) -> bool {
        other.pos & !self.pos == 0 && other.neg & !self.neg == 0
    }
}
