//! Free group arithmetic on reduced words.
//!
//! Letters are encoded as integers in `[0, 2r)`: letter `2k` is the k-th free
//! generator and `2k + 1` its inverse. The textual form uses a lowercase letter
//! for a generator and the uppercase letter for its inverse, so `"abA"` is
//! `a b a^-1` and the empty string is the identity.

use std::fmt;
use std::ops::Mul;

use thiserror::Error;

/// Rank limit imposed by the one-character-per-letter text format.
pub const MAX_RANK: usize = 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("rank must be in 1..={MAX_RANK}, got {0}")]
    InvalidRank(usize),
    #[error("letter index {index} out of range for rank {rank}")]
    LetterOutOfRange { index: usize, rank: usize },
    #[error("character {0:?} is not a letter of the rank-{1} alphabet")]
    BadCharacter(char, usize),
    #[error("word {0:?} is not freely reduced")]
    NotReduced(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
}

/// Rank `r` of a free group `F_r`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rank(u8);

impl Rank {
    pub fn new(rank: usize) -> Result<Self, WordError> {
        if (1..=MAX_RANK).contains(&rank) {
            Ok(Rank(rank as u8))
        } else {
            Err(WordError::InvalidRank(rank))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Size `2r` of the symmetric generating set.
    pub fn alphabet_size(self) -> usize {
        2 * self.get()
    }

    pub fn letters(self) -> impl Iterator<Item = Letter> + Clone {
        (0..self.alphabet_size() as u8).map(Letter)
    }

    pub fn letter(self, index: usize) -> Result<Letter, WordError> {
        if index < self.alphabet_size() {
            Ok(Letter(index as u8))
        } else {
            Err(WordError::LetterOutOfRange { index, rank: self.get() })
        }
    }

    /// The k-th free generator `a_k`.
    pub fn generator(self, k: usize) -> Result<Letter, WordError> {
        self.letter(2 * k)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// Index `k` of the generator this letter is `a_k` or `a_k^-1` of.
    pub fn generator_index(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator_index() as u8) as char
    }

    pub fn from_char(c: char, rank: Rank) -> Result<Letter, WordError> {
        let (k, inv) = match c {
            'a'..='z' => (c as usize - 'a' as usize, 0),
            'A'..='Z' => (c as usize - 'A' as usize, 1),
            _ => return Err(WordError::BadCharacter(c, rank.get())),
        };
        if k >= rank.get() {
            return Err(WordError::BadCharacter(c, rank.get()));
        }
        Ok(Letter((2 * k + inv) as u8))
    }
}

/// A freely reduced word, i.e. an element of `F_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord {
    rank: Rank,
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity(rank: Rank) -> Self {
        Self { rank, letters: Vec::new() }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(rank: Rank, raw: &[Letter]) -> Result<Self, WordError> {
        let mut letters: Vec<Letter> = Vec::with_capacity(raw.len());
        for &l in raw {
            if l.index() >= rank.alphabet_size() {
                return Err(WordError::LetterOutOfRange { index: l.index(), rank: rank.get() });
            }
            if letters.last() == Some(&l.inverse()) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok(Self { rank, letters })
    }

    /// Reduces a sequence of raw letter indices.
    pub fn reduce_indices(rank: Rank, raw: &[usize]) -> Result<Self, WordError> {
        let letters = raw.iter().map(|&i| rank.letter(i)).collect::<Result<Vec<_>, _>>()?;
        Self::reduce(rank, &letters)
    }

    /// Accepts a letter sequence only if it is already reduced.
    pub fn from_reduced(rank: Rank, letters: Vec<Letter>) -> Result<Self, WordError> {
        if let Some(l) = letters.iter().find(|l| l.index() >= rank.alphabet_size()) {
            return Err(WordError::LetterOutOfRange { index: l.index(), rank: rank.get() });
        }
        if letters.windows(2).any(|w| w[1] == w[0].inverse()) {
            return Err(WordError::NotReduced(letters.iter().map(|l| l.to_char()).collect()));
        }
        Ok(Self { rank, letters })
    }

    pub fn letter(rank: Rank, l: Letter) -> Self {
        Self { rank, letters: vec![l] }
    }

    /// Parses the text format; the input must already be reduced so that
    /// printing the result gives back the same string.
    pub fn parse(rank: Rank, text: &str) -> Result<Self, WordError> {
        let letters = text.chars().map(|c| Letter::from_char(c, rank)).collect::<Result<Vec<_>, _>>()?;
        Self::from_reduced(rank, letters)
    }

    /// Parses the text format and reduces it.
    pub fn parse_reducing(rank: Rank, text: &str) -> Result<Self, WordError> {
        let letters = text.chars().map(|c| Letter::from_char(c, rank)).collect::<Result<Vec<_>, _>>()?;
        Self::reduce(rank, &letters)
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Word length `d_F(e, w)`.
    pub fn word_length(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, other: &ReducedWord) -> Result<ReducedWord, WordError> {
        if self.rank != other.rank {
            return Err(WordError::RankMismatch(self.rank.get(), other.rank.get()));
        }
        let common =
            self.letters.iter().rev().zip(other.letters.iter()).take_while(|(a, b)| b.inverse() == **a).count();
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len() - 2 * common);
        letters.extend_from_slice(&self.letters[..self.letters.len() - common]);
        letters.extend_from_slice(&other.letters[common..]);
        Ok(ReducedWord { rank: self.rank, letters })
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord { rank: self.rank, letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Right multiplication by a single letter.
    pub fn times_letter(&self, l: Letter) -> ReducedWord {
        let mut letters = self.letters.clone();
        if letters.last() == Some(&l.inverse()) {
            letters.pop();
        } else {
            letters.push(l);
        }
        ReducedWord { rank: self.rank, letters }
    }

    /// The prefix of the first `k` letters (saturating).
    pub fn prefix(&self, k: usize) -> ReducedWord {
        ReducedWord { rank: self.rank, letters: self.letters[..k.min(self.letters.len())].to_vec() }
    }

    /// Left-invariant word metric `d_F(u, v) = |u^-1 v|`.
    pub fn distance(&self, other: &ReducedWord) -> Result<usize, WordError> {
        Ok(self.inverse().multiply(other)?.word_length())
    }
}

/// Panics on rank mismatch; use [`ReducedWord::multiply`] for a checked product.
impl Mul for &ReducedWord {
    type Output = ReducedWord;

    fn mul(self, rhs: &ReducedWord) -> ReducedWord {
        self.multiply(rhs).expect("multiplying words of different rank")
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// All reduced words of length exactly `n`, in lexicographic letter order.
pub fn sphere(rank: Rank, n: usize) -> Vec<ReducedWord> {
    let mut layer = vec![ReducedWord::identity(rank)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(layer.len() * (rank.alphabet_size() - 1).max(1));
        for w in &layer {
            for l in rank.letters() {
                if w.letters.last() != Some(&l.inverse()) {
                    let mut letters = w.letters.clone();
                    letters.push(l);
                    next.push(ReducedWord { rank, letters });
                }
            }
        }
        layer = next;
    }
    layer
}

/// Number of elements of the sphere of radius `n`: `2r (2r-1)^(n-1)`.
pub fn sphere_size(rank: Rank, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    let k = rank.alphabet_size() as u128;
    k * (k - 1).pow(n as u32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(r2(), s).unwrap()
    }

    /// Independent reduction: repeatedly delete the leftmost cancelling pair.
    fn reduce_by_rewriting(raw: &[usize]) -> Vec<usize> {
        let mut v = raw.to_vec();
        loop {
            match v.windows(2).position(|p| p[0] ^ 1 == p[1]) {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return v,
            }
        }
    }

    #[test]
    fn letter_pairing() {
        for l in r2().letters() {
            assert_eq!(l.inverse().inverse(), l);
            assert_ne!(l.inverse(), l);
        }
        assert_eq!(Letter::from_char('B', r2()).unwrap().index(), 3);
        assert!(Letter::from_char('c', r2()).is_err());
        assert!(Rank::new(0).is_err());
        assert!(Rank::new(27).is_err());
    }

    #[test]
    fn reduction_examples() {
        let r = r2();
        assert_eq!(ReducedWord::reduce_indices(r, &[0, 1, 2]).unwrap(), w("b"));
        assert_eq!(ReducedWord::reduce_indices(r, &[]).unwrap(), ReducedWord::identity(r));
        assert_eq!(ReducedWord::reduce_indices(r, &[0, 2, 3, 0]).unwrap(), w("aa"));
        assert_eq!(ReducedWord::reduce_indices(r, &[4]), Err(WordError::LetterOutOfRange { index: 4, rank: 2 }));
    }

    #[test]
    fn reduction_matches_rewriting_on_all_short_words() {
        let r = r2();
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..6 {
            let mut next = Vec::new();
            for v in &words {
                for l in 0..4 {
                    let mut u = v.clone();
                    u.push(l);
                    next.push(u);
                }
            }
            for v in &next {
                let reduced = ReducedWord::reduce_indices(r, v).unwrap();
                let expected: Vec<usize> = reduce_by_rewriting(v);
                let got: Vec<usize> = reduced.letters().iter().map(|l| l.index()).collect();
                assert_eq!(got, expected, "{v:?}");
                // idempotent
                assert_eq!(ReducedWord::reduce(r, reduced.letters()).unwrap(), reduced);
            }
            words = next;
        }
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(&w("ab") * &w("Ba"), w("aa"));
        assert_eq!(&w("abA") * &ReducedWord::identity(r2()), w("abA"));
        assert_eq!(w("ab").inverse(), w("BA"));
        assert_eq!(ReducedWord::identity(r2()).inverse(), ReducedWord::identity(r2()));
        assert_eq!(ReducedWord::identity(r2()).word_length(), 0);
        assert_eq!(w("aba").word_length(), 3);
        let r3 = Rank::new(3).unwrap();
        assert_eq!(w("a").multiply(&ReducedWord::identity(r3)), Err(WordError::RankMismatch(2, 3)));
    }

    #[test]
    fn text_round_trip_and_strictness() {
        for s in ["", "a", "abA", "BBaab"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!(matches!(ReducedWord::parse(r2(), "aA"), Err(WordError::NotReduced(_))));
        assert_eq!(ReducedWord::parse_reducing(r2(), "aAb").unwrap(), w("b"));
        assert!(ReducedWord::parse(r2(), "x").is_err());
    }

    #[test]
    fn sphere_counts() {
        let r = r2();
        for n in 0..6 {
            let s = sphere(r, n);
            assert_eq!(s.len() as u128, sphere_size(r, n));
            assert!(s.iter().all(|g| g.word_length() == n));
        }
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec(0usize..4, 0..=max_len)
            .prop_map(|raw| ReducedWord::reduce_indices(Rank::new(2).unwrap(), &raw).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn associativity(u in arb_word(20), v in arb_word(20), x in arb_word(20)) {
            prop_assert_eq!(&(&u * &v) * &x, &u * &(&v * &x));
        }
    }

    proptest! {
        #[test]
        fn confluence(u in arb_word(20), v in arb_word(20)) {
            let mut cat = u.letters().to_vec();
            cat.extend_from_slice(v.letters());
            let uv = &u * &v;
            prop_assert_eq!(ReducedWord::reduce(u.rank(), &cat).unwrap(), uv.clone());
            let diff = (u.word_length() + v.word_length()) as i64 - uv.word_length() as i64;
            prop_assert!(diff >= 0 && diff % 2 == 0);
        }

        #[test]
        fn group_axioms(u in arb_word(20)) {
            let e = ReducedWord::identity(u.rank());
            prop_assert_eq!(&u * &u.inverse(), e.clone());
            prop_assert_eq!(&u.inverse() * &u, e.clone());
            prop_assert_eq!(&e * &u, u.clone());
            prop_assert_eq!(u.inverse().inverse(), u.clone());
            prop_assert_eq!(u.inverse().word_length(), u.word_length());
        }

        #[test]
        fn metric_axioms(u in arb_word(12), v in arb_word(12), x in arb_word(12)) {
            let d = |a: &ReducedWord, b: &ReducedWord| a.distance(b).unwrap();
            prop_assert_eq!(d(&u, &u), 0);
            prop_assert_eq!(d(&u, &v), d(&v, &u));
            prop_assert!(d(&u, &x) <= d(&u, &v) + d(&v, &x));
            if u != v { prop_assert!(d(&u, &v) > 0); }
        }

        #[test]
        fn prefixes_reduced_and_growing(u in arb_word(30)) {
            for k in 0..=u.word_length() {
                let p = u.prefix(k);
                prop_assert_eq!(p.word_length(), k);
                prop_assert!(ReducedWord::from_reduced(p.rank(), p.letters().to_vec()).is_ok());
            }
        }

        #[test]
        fn print_parse_round_trip(u in arb_word(30)) {
            prop_assert_eq!(ReducedWord::parse(u.rank(), &u.to_string()).unwrap(), u);
        }
    }
}
