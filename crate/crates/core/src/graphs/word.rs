//! Reduced words with shared prefixes.
//!
//! A word is a linked list from its last letter back to the identity, so
//! right multiplication by a generator (one random-walk step on a tree-like
//! Cayley graph) costs O(1) regardless of the word length. Each node caches
//! the length and a polynomial hash of the whole word.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

const HASH_MUL: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Default)]
pub struct Word(Option<Arc<Node>>);

struct Node {
    parent: Word,
    letter: u8,
    len: u32,
    hash: u64,
}

impl Drop for Node {
    // Iterative teardown; long walks would otherwise recurse once per letter.
    fn drop(&mut self) {
        let mut next = self.parent.0.take();
        while let Some(arc) = next {
            match Arc::try_unwrap(arc) {
                Ok(mut node) => next = node.parent.0.take(),
                Err(_) => break,
            }
        }
    }
}

impl Word {
    pub fn identity() -> Self {
        Word(None)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_none()
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |n| n.len as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.as_ref().map(|n| n.letter)
    }

    /// The word with its last letter removed.
    pub fn prefix(&self) -> Option<&Word> {
        self.0.as_ref().map(|n| &n.parent)
    }

    fn hash_value(&self) -> u64 {
        self.0.as_ref().map_or(0, |n| n.hash)
    }

    /// Appends `letter` without reduction. Callers keep words reduced.
    pub fn push(&self, letter: u8) -> Word {
        let hash = self.hash_value().wrapping_mul(HASH_MUL).wrapping_add(u64::from(letter) + 1);
        Word(Some(Arc::new(Node { parent: self.clone(), letter, len: self.len() as u32 + 1, hash })))
    }

    /// Right multiplication by a generator whose inverse letter is `inverse`.
    pub fn mul_letter(&self, letter: u8, inverse: u8) -> Word {
        match &self.0 {
            Some(node) if node.letter == inverse => node.parent.clone(),
            _ => self.push(letter),
        }
    }

    /// Letters from first to last.
    pub fn letters(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        let mut cur = self;
        while let Some(node) = &cur.0 {
            out.push(node.letter);
            cur = &node.parent;
        }
        out.reverse();
        out
    }

    pub fn from_letters(letters: &[u8]) -> Word {
        letters.iter().fold(Word::identity(), |w, &l| w.push(l))
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        let (mut a, mut b) = (self, other);
        loop {
            match (&a.0, &b.0) {
                (None, None) => return true,
                (Some(x), Some(y)) => {
                    if Arc::ptr_eq(x, y) {
                        return true;
                    }
                    if x.len != y.len || x.hash != y.hash || x.letter != y.letter {
                        return false;
                    }
                    a = &x.parent;
                    b = &y.parent;
                }
                _ => return false,
            }
        }
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u32(self.len() as u32);
        state.write_u64(self.hash_value());
    }
}

/// Shortlex order: shorter words first, then lexicographic by letter byte.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.len().cmp(&other.len()).then_with(|| self.letters().cmp(&other.letters()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("e");
        }
        for l in self.letters() {
            write!(f, "{}", l as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::hash_map::DefaultHasher;

    fn hash_of(w: &Word) -> u64 {
        let mut h = DefaultHasher::new();
        w.hash(&mut h);
        h.finish()
    }

    #[test]
    fn independently_built_words_are_equal() {
        let a = Word::from_letters(b"abAB");
        let b = Word::identity().push(b'a').push(b'b').push(b'A').push(b'B');
        assert_eq!(a, b);
        assert_eq!(hash_of(&a), hash_of(&b));
        assert_ne!(a, Word::from_letters(b"abAb"));
    }

    #[test]
    fn cancellation_returns_prefix() {
        let w = Word::from_letters(b"ab");
        let back = w.mul_letter(b'B', b'b');
        assert_eq!(back, Word::from_letters(b"a"));
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn shortlex_order() {
        let mut ws = [Word::from_letters(b"ba"), Word::identity(), Word::from_letters(b"b"), Word::from_letters(b"ab")];
        ws.sort();
        let shown: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, ["e", "b", "ab", "ba"]);
    }

    #[test]
    fn long_words_drop_without_overflow() {
        let mut w = Word::identity();
        for i in 0..2_000_000u32 {
            w = w.push(if i % 2 == 0 { b'a' } else { b'b' });
        }
        assert_eq!(w.len(), 2_000_000);
        drop(w);
    }
}
