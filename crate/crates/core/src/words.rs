//! Words over a signed alphabet and the combinatorics of free groups that
//! does not need graphs: free reduction, cyclic normal forms, roots of
//! proper powers and periodic overlaps.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator together with a sign. Stored as a nonzero integer: `g + 1`
/// for the generator `g`, `-(g + 1)` for its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: u32, inverse: bool) -> Self {
        let v = generator as i32 + 1;
        Letter(if inverse { -v } else { v })
    }

    pub fn pos(generator: u32) -> Self {
        Self::new(generator, false)
    }

    pub fn neg(generator: u32) -> Self {
        Self::new(generator, true)
    }

    pub fn generator(self) -> u32 {
        self.0.unsigned_abs() - 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Position in the order `a < a' < b < b' < ...` used for every
    /// length-lexicographic search.
    pub fn rank(self) -> u32 {
        self.generator() * 2 + self.is_inverse() as u32
    }

    pub fn from_rank(rank: u32) -> Self {
        Self::new(rank / 2, rank % 2 == 1)
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

/// A finite sequence of letters. Nothing forces it to be reduced; most
/// constructors in the crate hand out reduced words and say so.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        FreeWord(letters)
    }

    pub fn empty() -> Self {
        FreeWord(Vec::new())
    }

    /// Reduced word built from letters.
    pub fn reduced_from(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    pub fn letter(generator: u32) -> Self {
        FreeWord(vec![Letter::pos(generator)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn reduce(&self) -> FreeWord {
        Self::reduced_from(self.0.iter().copied())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&f), Some(&l)) => self.0.len() == 1 || f != l.inverse(),
                _ => true,
            }
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FreeWord(v)
    }

    /// Product in the free group (reduced).
    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        Self::reduced_from(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn pow(&self, n: usize) -> FreeWord {
        FreeWord(
            self.0
                .iter()
                .copied()
                .cycle()
                .take(self.0.len() * n)
                .collect(),
        )
    }

    /// `self` rotated left by `k` positions.
    pub fn rotate(&self, k: usize) -> FreeWord {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        FreeWord(v)
    }

    /// Writes a reduced word as `c · core · c⁻¹` with `core` cyclically reduced.
    pub fn cyclic_reduction(&self) -> (FreeWord, FreeWord) {
        let w = self.reduce();
        let v = &w.0;
        let mut i = 0;
        while i < v.len() / 2 && v[i] == v[v.len() - 1 - i].inverse() {
            i += 1;
        }
        (
            FreeWord(v[..i].to_vec()),
            FreeWord(v[i..v.len() - i].to_vec()),
        )
    }

    /// Lexicographically least rotation (the canonical representative of
    /// the cyclic word).
    pub fn least_rotation(&self) -> FreeWord {
        let n = self.0.len();
        if n == 0 {
            return self.clone();
        }
        // Booth's algorithm.
        let s: Vec<u32> = self
            .0
            .iter()
            .chain(self.0.iter())
            .map(|l| l.rank())
            .collect();
        let mut f = vec![usize::MAX; 2 * n];
        let mut k = 0usize;
        for j in 1..2 * n {
            let sj = s[j];
            let mut i = f[j - k - 1];
            while i != usize::MAX && sj != s[k + i + 1] {
                if sj < s[k + i + 1] {
                    k = j - i - 1;
                }
                i = f[i];
            }
            if i == usize::MAX && sj != s[k] {
                if sj < s[k] {
                    k = j;
                }
                f[j - k] = usize::MAX;
            } else {
                f[j - k] = if i == usize::MAX { 0 } else { i + 1 };
            }
        }
        self.rotate(k)
    }

    /// `Some((root, d))` with `self = root^d`, `d ≥ 2` maximal; `None` when
    /// the word is primitive.
    pub fn is_proper_power(&self) -> Result<Option<(FreeWord, usize)>> {
        if self.0.is_empty() {
            return Err(Error::EmptyWord);
        }
        if !self.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced(format!("{:?}", self.0)));
        }
        Ok(self.root_and_exponent_raw())
    }

    /// Shortest `u` with `self = u^d`, without the reducedness checks.
    pub(crate) fn root_and_exponent_raw(&self) -> Option<(FreeWord, usize)> {
        let n = self.0.len();
        if n < 2 {
            return None;
        }
        let pi = prefix_function(&self.0);
        let p = n - pi[n - 1];
        if p < n && n % p == 0 {
            Some((FreeWord(self.0[..p].to_vec()), n / p))
        } else {
            None
        }
    }

    /// Primitive root of a cyclically reduced word (the word itself if primitive).
    pub fn root(&self) -> (FreeWord, usize) {
        self.root_and_exponent_raw()
            .unwrap_or_else(|| (self.clone(), 1))
    }

    /// Largest `|v| - |u|` over subwords `v = u^m`, `m ≥ 2`, of the cyclic
    /// word, where subwords have length at most `|w|`.
    pub fn max_periodic_overlap(&self) -> usize {
        let n = self.0.len();
        let mut best = 0;
        let doubled: Vec<Letter> = self.0.iter().chain(self.0.iter()).copied().collect();
        for start in 0..n {
            let pi = prefix_function(&doubled[start..start + n]);
            for len in 2..=n {
                let period = len - pi[len - 1];
                if period < len && len % period == 0 {
                    best = best.max(len - period);
                }
            }
        }
        best
    }

    pub fn uses_generator(&self, generator: u32) -> bool {
        self.0.iter().any(|l| l.generator() == generator)
    }

    /// Deletes every letter whose generator satisfies `erase`, then reduces.
    pub fn erase_generators(&self, erase: impl Fn(u32) -> bool) -> FreeWord {
        Self::reduced_from(self.0.iter().copied().filter(|l| !erase(l.generator())))
    }

    /// Compares in length-lexicographic order.
    pub fn shortlex_cmp(&self, other: &FreeWord) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl From<Vec<Letter>> for FreeWord {
    fn from(v: Vec<Letter>) -> Self {
        FreeWord(v)
    }
}

/// Knuth–Morris–Pratt failure function: `pi[i]` is the length of the
/// longest proper border of `s[..=i]`.
pub fn prefix_function<T: PartialEq>(s: &[T]) -> Vec<usize> {
    let mut pi = vec![0usize; s.len()];
    for i in 1..s.len() {
        let mut k = pi[i - 1];
        while k > 0 && s[i] != s[k] {
            k = pi[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        pi[i] = k;
    }
    pi
}

/// Every reduced word of length exactly `len` over `rank` generators, in
/// length-lexicographic order.
pub fn reduced_words_of_length(rank: u32, len: usize) -> Vec<FreeWord> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(rank: u32, len: usize, cur: &mut Vec<Letter>, out: &mut Vec<FreeWord>) {
        if cur.len() == len {
            out.push(FreeWord(cur.clone()));
            return;
        }
        for r in 0..2 * rank {
            let l = Letter::from_rank(r);
            if cur.last() == Some(&l.inverse()) {
                continue;
            }
            cur.push(l);
            rec(rank, len, cur, out);
            cur.pop();
        }
    }
    rec(rank, len, &mut cur, &mut out);
    out
}

/// Every reduced word of length `≤ max_len`, shortlex ordered.
pub fn reduced_words_up_to(rank: u32, max_len: usize) -> Vec<FreeWord> {
    (0..=max_len)
        .flat_map(|l| reduced_words_of_length(rank, l))
        .collect()
}

/// Reduced words of length `1..=max_len` over `rank` generators, lazily and
/// in length-lexicographic order.
pub fn shortlex_words(rank: u32, max_len: usize) -> impl Iterator<Item = FreeWord> {
    let mut cur: Vec<u32> = Vec::new();
    std::iter::from_fn(move || {
        if rank == 0 {
            return None;
        }
        if !next_reduced(&mut cur, rank) {
            if cur.len() >= max_len {
                return None;
            }
            cur = vec![0; cur.len() + 1];
        }
        Some(FreeWord(
            cur.iter().map(|&r| Letter::from_rank(r)).collect(),
        ))
    })
}

/// Advances `cur` (letter ranks) to the next reduced word of its length.
fn next_reduced(cur: &mut [u32], rank: u32) -> bool {
    let ok = |prev: Option<u32>, r: u32| {
        prev.map_or(true, |p| {
            Letter::from_rank(p).inverse() != Letter::from_rank(r)
        })
    };
    for pos in (0..cur.len()).rev() {
        let prev = pos.checked_sub(1).map(|q| cur[q]);
        if let Some(r) = (cur[pos] + 1..2 * rank).find(|&r| ok(prev, r)) {
            cur[pos] = r;
            for q in pos + 1..cur.len() {
                cur[q] = (0..2 * rank).find(|&r| ok(Some(cur[q - 1]), r)).unwrap();
            }
            return true;
        }
    }
    false
}

/// Generator names. Words print as whitespace-separated names with a
/// trailing `'` on inverse letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains('\'') || n.chars().any(char::is_whitespace) || n == "," {
                return Err(Error::InvalidArgument(format!("bad generator name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidArgument(format!("duplicate generator `{n}`")));
            }
        }
        Ok(Alphabet { names })
    }

    /// `a, b, c, …` for small ranks, `g0, g1, …` beyond 26.
    pub fn standard(rank: usize) -> Self {
        let names = (0..rank)
            .map(|i| {
                if rank <= 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("g{i}")
                }
            })
            .collect();
        Alphabet { names }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, generator: u32) -> &str {
        &self.names[generator as usize]
    }

    pub fn index(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn push(&mut self, name: String) -> Result<u32> {
        if self.index(&name).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate generator `{name}`"
            )));
        }
        self.names.push(name);
        Ok(self.names.len() as u32 - 1)
    }

    pub fn parse_letter(&self, token: &str) -> Result<Letter> {
        let (name, inv) = match token.strip_suffix('\'') {
            Some(n) => (n, true),
            None => (token, false),
        };
        let g = self
            .index(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        Ok(Letter::new(g, inv))
    }

    /// Parses `a b a'` style text. `1` or an empty string is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<FreeWord> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(FreeWord::empty());
        }
        text.split_whitespace()
            .map(|t| self.parse_letter(t))
            .collect::<Result<Vec<_>>>()
            .map(FreeWord)
    }

    pub fn format_letter(&self, l: Letter) -> String {
        let n = self.name(l.generator());
        if l.is_inverse() {
            format!("{n}'")
        } else {
            n.to_string()
        }
    }

    pub fn format_word(&self, w: &FreeWord) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|&l| self.format_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alpha = Alphabet::standard(
            self.0
                .iter()
                .map(|l| l.generator() as usize + 1)
                .max()
                .unwrap_or(0)
                .max(1),
        );
        write!(f, "{}", alpha.format_word(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> FreeWord {
        Alphabet::standard(3).parse_word(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("a a' b").reduce(), w("b"));
        assert_eq!(w("a b a b").reduce(), w("a b a b"));
        assert!(w("a b b' a'").reduce().is_empty());
    }

    #[test]
    fn proper_power_examples() {
        assert_eq!(w("a b a b").is_proper_power().unwrap(), Some((w("a b"), 2)));
        assert_eq!(w("a b a").is_proper_power().unwrap(), None);
        assert_eq!(
            w("a a a a a a").is_proper_power().unwrap(),
            Some((w("a"), 6))
        );
        assert!(matches!(
            w("a b a'").is_proper_power(),
            Err(Error::NotCyclicallyReduced(_))
        ));
        assert_eq!(FreeWord::empty().is_proper_power(), Err(Error::EmptyWord));
    }

    #[test]
    fn periodic_overlap_examples() {
        assert_eq!(w("b a a a a b").max_periodic_overlap(), 3);
        assert_eq!(w("a b").max_periodic_overlap(), 0);
        assert_eq!(w("a b a b a b").max_periodic_overlap(), 4);
        // abab²ab³: the cyclic word b b b a a b a b b contains b⁴ across the seam.
        let v = w("a b a b b a b b b");
        assert_eq!(v.max_periodic_overlap(), brute_periodic_overlap(&v));
    }

    #[test]
    fn cyclic_reduction_and_rotation() {
        let (c, core) = w("a b c b' a'").cyclic_reduction();
        assert_eq!(c, w("a b"));
        assert_eq!(core, w("c"));
        assert_eq!(w("b a b").least_rotation(), w("a b b"));
        assert_eq!(w("c a b").least_rotation(), w("a b c"));
    }

    #[test]
    fn alphabet_round_trip() {
        let a = Alphabet::new(vec!["x1".into(), "x2".into()]).unwrap();
        let word = a.parse_word("x1 x2' x1").unwrap();
        assert_eq!(a.format_word(&word), "x1 x2' x1");
        assert!(a.parse_word("y").is_err());
        assert!(Alphabet::new(vec!["a".into(), "a".into()]).is_err());
    }

    /// O(n³) oracle: every cyclic subword, every period.
    pub(crate) fn brute_periodic_overlap(word: &FreeWord) -> usize {
        let n = word.len();
        let l = word.letters();
        let mut best = 0;
        for start in 0..n {
            for len in 2..=n {
                let v: Vec<Letter> = (0..len).map(|k| l[(start + k) % n]).collect();
                for p in 1..len {
                    if len % p == 0 && (p..len).all(|k| v[k] == v[k - p]) {
                        best = best.max(len - p);
                    }
                }
            }
        }
        best
    }

    /// Exhaustive divisor check.
    fn brute_power(word: &FreeWord) -> Option<(FreeWord, usize)> {
        let n = word.len();
        let l = word.letters();
        (1..n)
            .filter(|p| n % p == 0 && (*p..n).all(|k| l[k] == l[k - p]))
            .map(|p| (FreeWord::new(l[..p].to_vec()), n / p))
            .next()
    }

    #[test]
    fn proper_power_agrees_with_divisor_check_exhaustively() {
        for len in 1..=12 {
            for word in reduced_words_of_length(2, len) {
                if !word.is_cyclically_reduced() {
                    continue;
                }
                assert_eq!(
                    word.is_proper_power().unwrap(),
                    brute_power(&word),
                    "{word}"
                );
            }
        }
    }

    fn arb_word(rank: u32, max_len: usize) -> impl Strategy<Value = FreeWord> {
        proptest::collection::vec((0..rank, any::<bool>()), 0..max_len)
            .prop_map(|v| FreeWord::new(v.into_iter().map(|(g, i)| Letter::new(g, i)).collect()))
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent_and_shrinks(word in arb_word(3, 40)) {
            let r = word.reduce();
            prop_assert!(r.len() <= word.len());
            prop_assert!(r.is_reduced());
            prop_assert_eq!(r.reduce(), r.clone());
            prop_assert!(word.mul(&word.inverse()).is_empty());
        }

        #[test]
        fn periodic_overlap_matches_brute_force(word in arb_word(2, 14)) {
            let r = word.reduce();
            prop_assert_eq!(r.max_periodic_overlap(), brute_periodic_overlap(&r));
        }

        #[test]
        fn least_rotation_is_rotation_invariant(word in arb_word(3, 20), k in 0usize..20) {
            prop_assert_eq!(word.rotate(k).least_rotation(), word.least_rotation());
        }
    }
}
