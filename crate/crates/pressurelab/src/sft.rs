//! Subshifts of finite type: alphabet, transition matrix, admissible words,
//! primitivity and bridging words.
//!
//! Symbols are 0-based in memory. All text I/O (word strings, config keys,
//! CSV) is 1-based, matching the usual convention for symbolic spaces.

use std::fmt;

use crate::error::{Error, Result};

/// A one-sided subshift of finite type over `{1, …, m}` with a 0/1
/// transition matrix. Construction rejects alphabets with dead symbols
/// (all-zero rows or columns), which would break word-count identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubshiftSpec {
    m: usize,
    adj: Vec<bool>, // row-major m×m, adj[i*m+j] = transition i→j allowed
}

impl SubshiftSpec {
    pub fn new(m: usize, adjacency: &[Vec<u8>]) -> Result<Self> {
        if m < 2 {
            return Err(Error::Input(format!(
                "alphabet size m={m} must be at least 2"
            )));
        }
        if m > 255 {
            return Err(Error::Input(format!("alphabet size m={m} exceeds 255")));
        }
        if adjacency.len() != m {
            return Err(Error::Input(format!(
                "adjacency has {} rows, expected {m}",
                adjacency.len()
            )));
        }
        let mut adj = vec![false; m * m];
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Input(format!(
                    "adjacency row {} has {} entries, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &e) in row.iter().enumerate() {
                match e {
                    0 => {}
                    1 => adj[i * m + j] = true,
                    other => {
                        return Err(Error::Input(format!(
                            "adjacency[{}][{}] = {other}, entries must be 0 or 1",
                            i + 1,
                            j + 1
                        )))
                    }
                }
            }
        }
        for i in 0..m {
            if (0..m).all(|j| !adj[i * m + j]) {
                return Err(Error::Input(format!(
                    "symbol {} has no outgoing transition",
                    i + 1
                )));
            }
            if (0..m).all(|j| !adj[j * m + i]) {
                return Err(Error::Input(format!(
                    "symbol {} has no incoming transition",
                    i + 1
                )));
            }
        }
        Ok(SubshiftSpec { m, adj })
    }

    /// The full shift on `m` symbols (every transition allowed).
    pub fn full_shift(m: usize) -> Result<Self> {
        Self::new(m, &vec![vec![1u8; m]; m])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn allowed(&self, from: u8, to: u8) -> bool {
        self.adj[from as usize * self.m + to as usize]
    }

    pub fn is_full_shift(&self) -> bool {
        self.adj.iter().all(|&x| x)
    }

    /// Symbols that may follow `s`.
    pub fn successors(&self, s: u8) -> impl Iterator<Item = u8> + '_ {
        let base = s as usize * self.m;
        (0..self.m as u8).filter(move |&j| self.adj[base + j as usize])
    }

    /// Primitivity of the transition matrix: the least `p` with `A^p > 0`,
    /// searched up to the Wielandt bound `(m−1)² + 1` (exhaustive).
    pub fn is_primitive(&self) -> (bool, Option<usize>) {
        let m = self.m;
        let bound = (m - 1) * (m - 1) + 1;
        let mut power = self.adj.clone();
        for p in 1..=bound {
            if p > 1 {
                power = bool_mat_mul(&power, &self.adj, m);
            }
            if power.iter().all(|&x| x) {
                return (true, Some(p));
            }
        }
        (false, None)
    }

    /// `|Σ_{A,n}| = 1ᵀ A^{n−1} 1`, saturating at `u64::MAX`.
    pub fn word_count(&self, n: usize) -> Result<u64> {
        if n == 0 {
            return Err(Error::Input("word length n must be at least 1".into()));
        }
        let m = self.m;
        let mut counts = vec![1u64; m]; // words of length 1 ending at each symbol
        for _ in 1..n {
            let mut next = vec![0u64; m];
            for i in 0..m {
                if counts[i] == 0 {
                    continue;
                }
                for j in 0..m {
                    if self.adj[i * m + j] {
                        next[j] = next[j].saturating_add(counts[i]);
                    }
                }
            }
            counts = next;
        }
        Ok(counts.iter().fold(0u64, |a, &c| a.saturating_add(c)))
    }

    /// Number of admissible continuations of length `len` after symbol `s`
    /// (`len = 0` counts one, the empty continuation).
    pub(crate) fn continuation_counts(&self, max_len: usize) -> Vec<Vec<u64>> {
        let m = self.m;
        let mut table = vec![vec![0u64; max_len + 1]; m];
        for row in table.iter_mut() {
            row[0] = 1;
        }
        for len in 1..=max_len {
            for s in 0..m {
                let mut acc = 0u64;
                for j in 0..m {
                    if self.adj[s * m + j] {
                        acc = acc.saturating_add(table[j][len - 1]);
                    }
                }
                table[s][len] = acc;
            }
        }
        table
    }

    /// Whether `word` is admissible. Out-of-range symbols are an error,
    /// not merely inadmissible.
    pub fn is_admissible(&self, word: &Word) -> Result<bool> {
        for &s in word.symbols() {
            if s as usize >= self.m {
                return Err(Error::Input(format!(
                    "symbol {} out of range for alphabet of size {}",
                    s + 1,
                    self.m
                )));
            }
        }
        Ok(word.symbols().windows(2).all(|w| self.allowed(w[0], w[1])))
    }

    /// Lexicographic stream over `Σ_{A,n}`.
    pub fn words(&self, n: usize) -> Result<WordIter<'_>> {
        if n == 0 {
            return Err(Error::Input("word length n must be at least 1".into()));
        }
        Ok(WordIter::new(self, &[], n))
    }

    /// Lexicographic stream over the words of length `n` extending `prefix`.
    /// Streams for distinct prefixes partition `Σ_{A,n}`, so consumers can
    /// fan out by first symbol.
    pub fn words_with_prefix(&self, prefix: &Word, n: usize) -> Result<WordIter<'_>> {
        if n == 0 {
            return Err(Error::Input("word length n must be at least 1".into()));
        }
        if prefix.len() > n {
            return Err(Error::Input(format!(
                "prefix of length {} longer than requested n={n}",
                prefix.len()
            )));
        }
        if !self.is_admissible(prefix)? {
            return Err(Error::Input(format!("prefix {prefix} is not admissible")));
        }
        Ok(WordIter::new(self, prefix.symbols(), n))
    }

    /// All bridges `K` with `1 ≤ |K| ≤ r` such that `iKj` is admissible,
    /// ordered by length then lexicographically.
    pub fn bridges(&self, i: u8, j: u8, r: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        for len in 1..=r {
            self.collect_bridges(i, j, len, &mut cur, &mut out);
        }
        out
    }

    fn collect_bridges(
        &self,
        last: u8,
        target: u8,
        remaining: usize,
        cur: &mut Vec<u8>,
        out: &mut Vec<Word>,
    ) {
        if remaining == 0 {
            if self.allowed(last, target) {
                out.push(Word(cur.clone()));
            }
            return;
        }
        for s in self.successors(last) {
            cur.push(s);
            self.collect_bridges(s, target, remaining - 1, cur, out);
            cur.pop();
        }
    }
}

fn bool_mat_mul(a: &[bool], b: &[bool], m: usize) -> Vec<bool> {
    let mut out = vec![false; m * m];
    for i in 0..m {
        for k in 0..m {
            if a[i * m + k] {
                for j in 0..m {
                    if b[k * m + j] {
                        out[i * m + j] = true;
                    }
                }
            }
        }
    }
    out
}

/// A finite word over the alphabet, stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn from_symbols0(symbols: Vec<u8>) -> Word {
        Word(symbols)
    }

    /// Build from 1-based symbols.
    pub fn from_symbols1(symbols: &[usize]) -> Result<Word> {
        let mut v = Vec::with_capacity(symbols.len());
        for &s in symbols {
            if s == 0 || s > 256 {
                return Err(Error::Input(format!("symbol {s} out of range (1-based)")));
            }
            v.push((s - 1) as u8);
        }
        Ok(Word(v))
    }

    /// Parse a 1-based word string: plain digits (`"121"`) for alphabets up
    /// to 9 symbols, or dot-separated numbers (`"12.3.1"`) beyond that.
    pub fn parse(s: &str) -> Result<Word> {
        if s.is_empty() {
            return Err(Error::Input("empty word string".into()));
        }
        let symbols: Vec<usize> = if s.contains('.') {
            s.split('.')
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Input(format!("bad symbol '{t}' in word '{s}'")))
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .filter(|&d| d > 0)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::Input(format!("bad digit '{c}' in word '{s}'")))
                })
                .collect::<Result<_>>()?
        };
        Word::from_symbols1(&symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 9) {
            for &s in &self.0 {
                write!(f, "{}", s + 1)?;
            }
        } else {
            let parts: Vec<String> = self
                .0
                .iter()
                .map(|&s| (s as usize + 1).to_string())
                .collect();
            write!(f, "{}", parts.join("."))?;
        }
        Ok(())
    }
}

/// Restartable lexicographic iterator over admissible words of fixed length.
pub struct WordIter<'a> {
    spec: &'a SubshiftSpec,
    n: usize,
    fixed: usize,
    cur: Vec<u8>,
    started: bool,
    done: bool,
}

impl<'a> WordIter<'a> {
    fn new(spec: &'a SubshiftSpec, prefix: &[u8], n: usize) -> Self {
        WordIter {
            spec,
            n,
            fixed: prefix.len(),
            cur: prefix.to_vec(),
            started: false,
            done: false,
        }
    }

    /// Extend `cur` (currently of length ≥ fixed) to the smallest admissible
    /// completion of length n. Always succeeds because no symbol is dead.
    fn fill_smallest(&mut self) {
        while self.cur.len() < self.n {
            let next = match self.cur.last() {
                None => 0u8,
                Some(&last) => self.spec.successors(last).next().expect("no dead symbols"),
            };
            self.cur.push(next);
        }
    }
}

impl Iterator for WordIter<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill_smallest();
            return Some(Word(self.cur.clone()));
        }
        // Advance the rightmost position that still has a larger admissible
        // symbol, then refill the tail with the smallest completion.
        let mut pos = self.n;
        loop {
            if pos == self.fixed {
                self.done = true;
                return None;
            }
            pos -= 1;
            let prev = if pos == 0 {
                None
            } else {
                Some(self.cur[pos - 1])
            };
            let bumped = ((self.cur[pos] + 1)..self.spec.m() as u8)
                .find(|&t| prev.is_none_or(|p| self.spec.allowed(p, t)));
            if let Some(t) = bumped {
                self.cur[pos] = t;
                self.cur.truncate(pos + 1);
                self.fill_smallest();
                return Some(Word(self.cur.clone()));
            }
        }
    }
}
