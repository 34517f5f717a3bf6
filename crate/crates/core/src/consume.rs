//! Replace-once token consumption shared by the matcher and the term usage
//! metric.
//!
//! A consumed token is not shifted out of the sequence: its slot is emptied
//! and acts as a barrier, so a later search can never match across the hole
//! a previous match left behind.

use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkingTokens<'a> {
    slots: Vec<Option<&'a str>>,
}

impl<'a> WorkingTokens<'a> {
    pub fn new<S: AsRef<str>>(tokens: &'a [S]) -> Self {
        WorkingTokens {
            slots: tokens.iter().map(|t| Some(t.as_ref())).collect(),
        }
    }

    /// Start of the leftmost run of live tokens equal to `needle`.
    pub fn find<S: AsRef<str>>(&self, needle: &[S]) -> Option<usize> {
        if needle.is_empty() || needle.len() > self.slots.len() {
            return None;
        }
        self.slots.windows(needle.len()).position(|w| {
            w.iter()
                .zip(needle)
                .all(|(slot, n)| *slot == Some(n.as_ref()))
        })
    }

    /// Finds and empties the leftmost occurrence of `needle`, returning the
    /// positions it occupied.
    pub fn consume<S: AsRef<str>>(&mut self, needle: &[S]) -> Option<Range<usize>> {
        let start = self.find(needle)?;
        let range = start..start + needle.len();
        self.consume_range(range.clone());
        Some(range)
    }

    pub fn consume_range(&mut self, range: Range<usize>) {
        for slot in &mut self.slots[range] {
            *slot = None;
        }
    }

    pub fn contains<S: AsRef<str>>(&self, needle: &[S]) -> bool {
        self.find(needle).is_some()
    }

    /// Remaining live tokens in order.
    pub fn live(&self) -> impl Iterator<Item = &'a str> + '_ {
        self.slots.iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}
