//! Reduced words in the free group `F<s1, ..., sn>`.
//!
//! A [`Letter`] is a signed generator index: `+i` is `s_i`, `-i` its formal
//! inverse. Text I/O writes `s1..s26` as `a..z` and the inverses as `A..Z`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or formal inverse of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn new(value: i32, rank: usize) -> Result<Self> {
        if value == 0 || value.unsigned_abs() as usize > rank {
            return Err(Error::LetterOutOfRange { letter: value as i64, rank });
        }
        Ok(Letter(value))
    }

    /// The generator `s_index` (1-based).
    pub fn generator(index: usize) -> Self {
        assert!(index >= 1, "generator indices start at 1");
        Letter(index as i32)
    }

    pub fn value(self) -> i32 {
        self.0
    }

    /// 1-based generator index.
    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Position in the order `a < A < b < B < ...`. This is also the id of
    /// the oriented petal of the standard rose that the letter labels.
    pub fn key(self) -> usize {
        2 * (self.index() - 1) + usize::from(self.0 < 0)
    }

    pub fn from_key(key: usize) -> Self {
        let index = (key / 2 + 1) as i32;
        if key.is_multiple_of(2) {
            Letter(index)
        } else {
            Letter(-index)
        }
    }

    pub fn to_char(self) -> Option<char> {
        let i = self.index();
        if i > 26 {
            return None;
        }
        let base = if self.is_positive() { b'a' } else { b'A' };
        Some((base + (i - 1) as u8) as char)
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Letter((c as u8 - b'a' + 1) as i32)),
            'A'..='Z' => Some(Letter(-((c as u8 - b'A' + 1) as i32))),
            _ => None,
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_char() {
            Some(c) => write!(f, "{c}"),
            None if self.is_positive() => write!(f, "<s{}>", self.index()),
            None => write!(f, "<S{}>", self.index()),
        }
    }
}

/// A reduced word, i.e. an element of `F_n`. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

fn check_rank(rank: usize) -> Result<()> {
    if rank == 0 {
        Err(Error::ZeroRank)
    } else {
        Ok(())
    }
}

/// Free reduction with a stack; the result does not depend on the order in
/// which cancelling pairs are removed.
fn reduce_letters(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for x in letters {
        if out.last() == Some(&x.inverse()) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        Word { rank, letters: Vec::new() }
    }

    /// Reduce a raw sequence of signed generator indices.
    pub fn reduce(raw: &[i32], rank: usize) -> Result<Self> {
        check_rank(rank)?;
        let letters = raw
            .iter()
            .map(|&v| Letter::new(v, rank))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word { rank, letters: reduce_letters(letters) })
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>, rank: usize) -> Result<Self> {
        check_rank(rank)?;
        let letters: Vec<Letter> = letters.into_iter().collect();
        if let Some(bad) = letters.iter().find(|l| l.index() > rank) {
            return Err(Error::LetterOutOfRange { letter: bad.value() as i64, rank });
        }
        Ok(Word { rank, letters: reduce_letters(letters) })
    }

    pub fn generator(index: usize, rank: usize) -> Result<Self> {
        Self::reduce(&[index as i32], rank)
    }

    /// Parse text such as `"aBc"` or `"a^-2 b^3"`.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        check_rank(rank)?;
        let letters = parse_letters(text)?;
        Self::from_letters(letters, rank).map_err(|e| match e {
            Error::LetterOutOfRange { .. } => Error::Parse {
                input: text.to_string(),
                reason: format!("letter out of range for rank {rank}"),
            },
            other => other,
        })
    }

    /// Parse text and infer the rank from the highest generator used (at
    /// least 1).
    pub fn parse_infer(text: &str) -> Result<Self> {
        let letters = parse_letters(text)?;
        let rank = letters.iter().map(|l| l.index()).max().unwrap_or(1);
        Self::from_letters(letters, rank)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Re-read this word in a free group of larger (or equal) rank.
    pub fn with_rank(&self, rank: usize) -> Result<Self> {
        Self::from_letters(self.letters.iter().copied(), rank)
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(Word {
            rank: self.rank,
            letters: reduce_letters(self.letters.iter().chain(other.letters.iter()).copied()),
        })
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let n = exponent.unsigned_abs() as usize;
        Word {
            rank: self.rank,
            letters: reduce_letters(std::iter::repeat_n(base.letters.iter().copied(), n).flatten()),
        }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&first), Some(&last)) => first != last.inverse() || self.letters.len() == 1,
            _ => true,
        }
    }

    /// Split `w = g h g^-1` with no cancellation at the junctions and `h`
    /// cyclically reduced. The core is `None` iff `w` is the identity.
    pub fn cyclic_reduce(&self) -> (Word, Option<CyclicWord>) {
        let n = self.letters.len();
        let mut peel = 0;
        while 2 * peel + 1 < n && self.letters[peel] == self.letters[n - 1 - peel].inverse() {
            peel += 1;
        }
        let conjugator = Word { rank: self.rank, letters: self.letters[..peel].to_vec() };
        if n == 0 {
            return (conjugator, None);
        }
        let core = &self.letters[peel..n - peel];
        (conjugator, Some(CyclicWord::from_reduced(core, self.rank)))
    }

    /// The conjugacy class of a nonidentity word.
    pub fn conjugacy_class(&self) -> Option<CyclicWord> {
        self.cyclic_reduce().1
    }

    pub fn abelianize(&self) -> AbelianVector {
        let mut coords = vec![0i64; self.rank];
        for l in &self.letters {
            coords[l.index() - 1] += if l.is_positive() { 1 } else { -1 };
        }
        AbelianVector(coords)
    }
}

fn parse_letters(text: &str) -> Result<Vec<Letter>> {
    let err = |reason: &str| Error::Parse { input: text.to_string(), reason: reason.to_string() };
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let letter = Letter::from_char(c).ok_or_else(|| err(&format!("unexpected character {c:?}")))?;
        i += 1;
        if i < chars.len() && chars[i] == '^' {
            i += 1;
            let start = i;
            if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let exp: String = chars[start..i].iter().collect();
            let exp: i64 = exp.parse().map_err(|_| err("bad exponent"))?;
            if exp.unsigned_abs() > 1_000_000 {
                return Err(err("exponent too large"));
            }
            let l = if exp < 0 { letter.inverse() } else { letter };
            out.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
        } else {
            out.push(letter);
        }
    }
    Ok(out)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse_infer(s)
    }
}

/// Index of the lexicographically least rotation.
pub(crate) fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        match s[(i + k) % n].cmp(&s[(j + k) % n]) {
            Ordering::Equal => k += 1,
            Ordering::Greater => {
                i += k + 1;
                if i <= j {
                    i = j + 1;
                }
                k = 0;
            }
            Ordering::Less => {
                j += k + 1;
                if j <= i {
                    j = i + 1;
                }
                k = 0;
            }
        }
    }
    i.min(j)
}

/// A nontrivial conjugacy class, stored as its least cyclically reduced
/// rotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicWord {
    rank: usize,
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// From a nonempty cyclically reduced letter sequence.
    pub fn new(letters: Vec<Letter>, rank: usize) -> Result<Self> {
        let w = Word::from_letters(letters.iter().copied(), rank)?;
        if w.letters != letters || w.is_empty() || !w.is_cyclically_reduced() {
            return Err(Error::NotACircuit("letters must be nonempty and cyclically reduced".into()));
        }
        Ok(Self::from_reduced(&letters, rank))
    }

    fn from_reduced(letters: &[Letter], rank: usize) -> Self {
        let r = least_rotation(letters);
        let mut rotated = letters[r..].to_vec();
        rotated.extend_from_slice(&letters[..r]);
        CyclicWord { rank, letters: rotated }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word { rank: self.rank, letters: self.letters.clone() }
    }

    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.letters.iter().rev().map(|l| l.inverse()).collect();
        Self::from_reduced(&inv, self.rank)
    }

    /// `(root, power)` with `self = root^power` and `root` not a proper
    /// power.
    pub fn extract_root(&self) -> (CyclicWord, usize) {
        let n = self.letters.len();
        for period in 1..=n {
            if !n.is_multiple_of(period) {
                continue;
            }
            if (0..n).all(|i| self.letters[i] == self.letters[(i + period) % n]) {
                let root = Self::from_reduced(&self.letters[..period], self.rank);
                return (root, n / period);
            }
        }
        unreachable!("the full length is always a period")
    }

    pub fn is_root_free(&self) -> bool {
        self.extract_root().1 == 1
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_word(), f)
    }
}

pub fn are_conjugate(u: &Word, v: &Word) -> Result<bool> {
    if u.rank() != v.rank() {
        return Err(Error::RankMismatch { left: u.rank(), right: v.rank() });
    }
    Ok(u.conjugacy_class() == v.conjugacy_class())
}

/// Image of a word in `Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbelianVector(pub Vec<i64>);

impl AbelianVector {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// gcd of the entries; 0 for the zero vector.
    pub fn content(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &x| g.gcd(&x))
    }

    pub fn is_basis_element(&self) -> bool {
        self.content() == 1
    }
}

impl std::ops::Add for &AbelianVector {
    type Output = AbelianVector;

    fn add(self, rhs: &AbelianVector) -> AbelianVector {
        AbelianVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// Invariant factors of an integer matrix (Smith normal form diagonal,
/// nonzero entries only).
pub fn invariant_factors(rows: &[Vec<i64>]) -> Vec<i128> {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let nrows = m.len();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut factors = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut pivot = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 && pivot.is_none_or(|(pi, pj): (usize, usize)| x.abs() < m[pi][pj].abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = m[t][t];
            let mut dirty = false;
            for i in t + 1..nrows {
                let q = m[i][t] / p;
                if q != 0 {
                    for j in t..ncols {
                        m[i][j] -= q * m[t][j];
                    }
                }
                if m[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..ncols {
                let q = m[t][j] / p;
                if q != 0 {
                    for row in m.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if m[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                // the pivot must divide the rest of the block
                let bad = (t + 1..nrows)
                    .flat_map(|i| (t + 1..ncols).map(move |j| (i, j)))
                    .find(|&(i, j)| m[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..ncols {
                            let add = m[i][j];
                            m[t][j] += add;
                        }
                        continue;
                    }
                }
            }
            // move the smallest nonzero entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t..nrows {
                if m[i][t] != 0 && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..ncols {
                if m[t][j] != 0 && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                m.swap(t, best.0);
            }
            if best.1 != t {
                for row in m.iter_mut() {
                    row.swap(t, best.1);
                }
            }
        }
        factors.push(m[t][t].abs());
        t += 1;
    }
    factors
}

/// Whether the vectors extend to a basis of `Z^n`.
pub fn abelian_partial_basis(vectors: &[AbelianVector]) -> bool {
    let Some(first) = vectors.first() else { return true };
    let n = first.rank();
    if vectors.iter().any(|v| v.rank() != n) || vectors.len() > n {
        return false;
    }
    let rows: Vec<Vec<i64>> = vectors.iter().map(|v| v.0.clone()).collect();
    let factors = invariant_factors(&rows);
    factors.len() == vectors.len() && factors.iter().all(|&d| d == 1)
}

/// Elementary (Nielsen) automorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NielsenKind {
    /// `s_i -> s_i s_j`
    TransvectionRight,
    /// `s_i -> s_i s_j^-1`
    TransvectionRightInverse,
    /// `s_i -> s_j s_i`
    TransvectionLeft,
    /// `s_i -> s_j^-1 s_i`
    TransvectionLeftInverse,
    /// `s_i <-> s_j`
    Transposition,
    /// `s_i -> s_i^-1`
    Inversion,
}

impl NielsenKind {
    pub const ALL: [NielsenKind; 6] = [
        NielsenKind::TransvectionRight,
        NielsenKind::TransvectionRightInverse,
        NielsenKind::TransvectionLeft,
        NielsenKind::TransvectionLeftInverse,
        NielsenKind::Transposition,
        NielsenKind::Inversion,
    ];
}

/// An endomorphism of `F_n`, given by the images of the generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Endomorphism {
    rank: usize,
    images: Vec<Word>,
}

impl Endomorphism {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        let rank = images.len();
        check_rank(rank)?;
        if let Some(bad) = images.iter().find(|w| w.rank() != rank) {
            return Err(Error::RankMismatch { left: rank, right: bad.rank() });
        }
        Ok(Endomorphism { rank, images })
    }

    pub fn identity(rank: usize) -> Self {
        let images = (1..=rank).map(|i| Word { rank, letters: vec![Letter::generator(i)] }).collect();
        Endomorphism { rank, images }
    }

    /// Parse comma-separated images, e.g. `"aabababaaba,aabaaba"`. The rank
    /// is the number of images.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        let rank = parts.len();
        let images = parts.iter().map(|p| Word::parse(p, rank)).collect::<Result<Vec<_>>>()?;
        Self::new(images)
    }

    pub fn nielsen(kind: NielsenKind, i: usize, j: usize, rank: usize) -> Result<Self> {
        check_rank(rank)?;
        if i == 0 || i > rank {
            return Err(Error::IndexOutOfRange { index: i, rank });
        }
        let needs_j = kind != NielsenKind::Inversion;
        if needs_j && (j == 0 || j > rank) {
            return Err(Error::IndexOutOfRange { index: j, rank });
        }
        if needs_j && i == j {
            return Err(Error::SameIndex);
        }
        let mut e = Self::identity(rank);
        let si = Letter::generator(i);
        let word = |ls: &[Letter]| Word { rank, letters: ls.to_vec() };
        match kind {
            NielsenKind::TransvectionRight => e.images[i - 1] = word(&[si, Letter::generator(j)]),
            NielsenKind::TransvectionRightInverse => {
                e.images[i - 1] = word(&[si, Letter::generator(j).inverse()])
            }
            NielsenKind::TransvectionLeft => e.images[i - 1] = word(&[Letter::generator(j), si]),
            NielsenKind::TransvectionLeftInverse => {
                e.images[i - 1] = word(&[Letter::generator(j).inverse(), si])
            }
            NielsenKind::Transposition => e.images.swap(i - 1, j - 1),
            NielsenKind::Inversion => e.images[i - 1] = word(&[si.inverse()]),
        }
        Ok(e)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch { left: self.rank, right: w.rank() });
        }
        let letters = w.letters().iter().flat_map(|l| {
            let img = &self.images[l.index() - 1];
            let forward = l.is_positive();
            let n = img.letters.len();
            (0..n).map(move |k| if forward { img.letters[k] } else { img.letters[n - 1 - k].inverse() })
        });
        Ok(Word { rank: self.rank, letters: reduce_letters(letters) })
    }

    /// `self ∘ inner`: first apply `inner`, then `self`.
    pub fn compose(&self, inner: &Endomorphism) -> Result<Endomorphism> {
        if self.rank != inner.rank {
            return Err(Error::RankMismatch { left: self.rank, right: inner.rank });
        }
        let images = inner.images.iter().map(|w| self.apply(w)).collect::<Result<Vec<_>>>()?;
        Ok(Endomorphism { rank: self.rank, images })
    }

    /// Rows are the abelianized images of the generators.
    pub fn abelian_matrix(&self) -> Vec<Vec<i64>> {
        self.images.iter().map(|w| w.abelianize().0).collect()
    }
}

impl fmt::Display for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}
