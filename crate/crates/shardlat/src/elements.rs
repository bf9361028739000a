//! Group elements of types `A_{n-1}`, `B_n`, `D_n` with descent statistics.
//!
//! Canonical storage is always the short word `w(1..n)`. Long and forked
//! forms are derived views so that equality and hashing stay trivial. Type-D
//! elements are stored as the even-signed representative; the fork over the
//! sign of `w(1)` is a presentation device handled by the block machinery.

use crate::{Error, Result, ENUM_CAP};
use std::fmt;

/// The three classical Coxeter families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum CoxType {
    A,
    B,
    D,
}

impl CoxType {
    /// Smallest supported degree.
    pub fn min_n(self) -> usize {
        match self {
            CoxType::A | CoxType::B => 1,
            CoxType::D => 2,
        }
    }

    /// Rank of the ambient reflection group: the maximal descent count.
    pub fn rank_max(self, n: usize) -> usize {
        match self {
            CoxType::A => n - 1,
            CoxType::B | CoxType::D => n,
        }
    }

    /// Group order, for cap checks and sanity tests.
    pub fn order(self, n: usize) -> u128 {
        let fact: u128 = (1..=n as u128).product();
        match self {
            CoxType::A => fact,
            CoxType::B => (1u128 << n) * fact,
            CoxType::D => (1u128 << (n - 1)) * fact,
        }
    }
}

impl fmt::Display for CoxType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoxType::A => write!(f, "A"),
            CoxType::B => write!(f, "B"),
            CoxType::D => write!(f, "D"),
        }
    }
}

impl std::str::FromStr for CoxType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(CoxType::A),
            "B" | "b" => Ok(CoxType::B),
            "D" | "d" => Ok(CoxType::D),
            other => Err(Error::Parse(format!("unknown type {other:?}"))),
        }
    }
}

/// A permutation of `{1..n}` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermA {
    word: Vec<i32>,
}

/// A signed permutation: `|word|` is a bijection on `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermB {
    word: Vec<i32>,
}

/// An even-signed permutation (type `D_n` canonical representative).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermD {
    word: Vec<i32>,
}

fn check_abs_bijection(word: &[i32]) -> Result<()> {
    let n = word.len();
    let mut seen = vec![false; n + 1];
    for &x in word {
        let a = x.unsigned_abs() as usize;
        if a == 0 || a > n || seen[a] {
            return Err(Error::Malformed(format!(
                "word {word:?} is not a (signed) bijection on 1..{n}"
            )));
        }
        seen[a] = true;
    }
    Ok(())
}

impl PermA {
    pub fn new(word: Vec<i32>) -> Result<Self> {
        check_abs_bijection(&word)?;
        if word.iter().any(|&x| x < 0) {
            return Err(Error::Malformed(format!("type A word {word:?} has signs")));
        }
        Ok(PermA { word })
    }

    pub fn identity(n: usize) -> Self {
        PermA {
            word: (1..=n as i32).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    pub fn word(&self) -> &[i32] {
        &self.word
    }

    /// Number of positions `i ≥ 1` with `w(i) > w(i+1)`.
    pub fn descents(&self) -> usize {
        self.word.windows(2).filter(|p| p[0] > p[1]).count()
    }

    /// Position (1-based) of letter `j`.
    pub fn position_of(&self, j: i32) -> usize {
        1 + self.word.iter().position(|&x| x == j).expect("letter")
    }

    pub fn reversed(&self) -> Self {
        let mut word = self.word.clone();
        word.reverse();
        PermA { word }
    }
}

impl PermB {
    pub fn new(word: Vec<i32>) -> Result<Self> {
        check_abs_bijection(&word)?;
        Ok(PermB { word })
    }

    pub fn identity(n: usize) -> Self {
        PermB {
            word: (1..=n as i32).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    pub fn word(&self) -> &[i32] {
        &self.word
    }

    /// Long form `w(-n), …, w(-1), 0, w(1), …, w(n)`, antisymmetric by
    /// construction.
    pub fn long_form(&self) -> Vec<i32> {
        let mut long = Vec::with_capacity(2 * self.word.len() + 1);
        long.extend(self.word.iter().rev().map(|x| -x));
        long.push(0);
        long.extend(&self.word);
        long
    }

    /// Descents at positions `i ≥ 0`, counting `w(0) = 0 > w(1)`.
    pub fn descents(&self) -> usize {
        let head = usize::from(self.word[0] < 0);
        head + self.word.windows(2).filter(|p| p[0] > p[1]).count()
    }

    pub fn negated(&self) -> Self {
        PermB {
            word: self.word.iter().map(|x| -x).collect(),
        }
    }
}

impl PermD {
    pub fn new(word: Vec<i32>) -> Result<Self> {
        check_abs_bijection(&word)?;
        if word.len() < 2 {
            return Err(Error::Malformed("type D needs n >= 2".into()));
        }
        if word.iter().filter(|&&x| x < 0).count() % 2 != 0 {
            return Err(Error::Malformed(format!(
                "type D word {word:?} has an odd number of signs"
            )));
        }
        Ok(PermD { word })
    }

    /// Canonicalize an arbitrary signed word by flipping the sign of `w(1)`
    /// if needed; the fork makes the two signings the same element.
    pub fn from_fork(mut word: Vec<i32>) -> Result<Self> {
        check_abs_bijection(&word)?;
        if word.iter().filter(|&&x| x < 0).count() % 2 != 0 {
            word[0] = -word[0];
        }
        PermD::new(word)
    }

    pub fn identity(n: usize) -> Self {
        PermD {
            word: (1..=n as i32).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    pub fn word(&self) -> &[i32] {
        &self.word
    }

    /// The forked center value `|w(1)|`.
    pub fn fork(&self) -> i32 {
        self.word[0].abs()
    }

    /// Descents at positions `i ≥ -1`: the usual descents of `w(1)…w(n)`
    /// plus one more when `w(-1) > w(2)`.
    pub fn descents(&self) -> usize {
        let head = usize::from(-self.word[0] > self.word[1]);
        head + self.word.windows(2).filter(|p| p[0] > p[1]).count()
    }

    /// Negation of every letter; stays in `D_n` exactly when `n` is even.
    pub fn negated(&self) -> Result<Self> {
        PermD::from_fork(self.word.iter().map(|x| -x).collect())
    }
}

/// A group element of any classical type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    A(PermA),
    B(PermB),
    D(PermD),
}

impl Element {
    pub fn ctype(&self) -> CoxType {
        match self {
            Element::A(_) => CoxType::A,
            Element::B(_) => CoxType::B,
            Element::D(_) => CoxType::D,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Element::A(w) => w.n(),
            Element::B(w) => w.n(),
            Element::D(w) => w.n(),
        }
    }

    pub fn word(&self) -> &[i32] {
        match self {
            Element::A(w) => w.word(),
            Element::B(w) => w.word(),
            Element::D(w) => w.word(),
        }
    }

    pub fn identity(ctype: CoxType, n: usize) -> Element {
        match ctype {
            CoxType::A => Element::A(PermA::identity(n)),
            CoxType::B => Element::B(PermB::identity(n)),
            CoxType::D => Element::D(PermD::identity(n)),
        }
    }

    /// `d(w)`, `d_B(w)` or `d_D(w)` per the type's convention.
    pub fn descents(&self) -> usize {
        match self {
            Element::A(w) => w.descents(),
            Element::B(w) => w.descents(),
            Element::D(w) => w.descents(),
        }
    }

    /// Parse from CSV word, a bare digit word (type A), or a CSV word whose
    /// first entry is `±k` (type D fork notation).
    pub fn parse(ctype: CoxType, s: &str) -> Result<Element> {
        let s = s.trim();
        let word: Vec<i32> = if s.contains(',') {
            s.split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    if let Some(rest) = tok.strip_prefix('±').or_else(|| tok.strip_prefix("+-")) {
                        if ctype != CoxType::D {
                            return Err(Error::Parse("fork entry only valid for type D".into()));
                        }
                        rest.parse::<i32>()
                            .map_err(|e| Error::Parse(format!("bad entry {tok:?}: {e}")))
                    } else {
                        tok.parse::<i32>()
                            .map_err(|e| Error::Parse(format!("bad entry {tok:?}: {e}")))
                    }
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as i32)
                        .ok_or_else(|| Error::Parse(format!("bad digit {c:?} in {s:?}")))
                })
                .collect::<Result<_>>()?
        };
        match ctype {
            CoxType::A => Ok(Element::A(PermA::new(word)?)),
            CoxType::B => Ok(Element::B(PermB::new(word)?)),
            CoxType::D => Ok(Element::D(PermD::from_fork(word)?)),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = self.word();
        for (i, x) in word.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

fn permutations_lex(n: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n + 1];
    fn rec(n: usize, current: &mut Vec<i32>, used: &mut [bool], out: &mut Vec<Vec<i32>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for v in 1..=n {
            if !used[v] {
                used[v] = true;
                current.push(v as i32);
                rec(n, current, used, out);
                current.pop();
                used[v] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}

/// All group elements in lexicographic order of the stored word, with sign
/// ordering `-n < … < -1 < 1 < … < n` (plain integer order).
pub fn enumerate(ctype: CoxType, n: usize) -> Result<Vec<Element>> {
    if n < ctype.min_n() {
        return Err(Error::UnsupportedRank {
            ctype,
            n,
            reason: format!("minimum is {}", ctype.min_n()),
        });
    }
    let order = ctype.order(n);
    if order > ENUM_CAP as u128 {
        return Err(Error::CapExceeded {
            requested: order as usize,
            cap: ENUM_CAP,
        });
    }
    let mut out: Vec<Element> = Vec::with_capacity(order as usize);
    match ctype {
        CoxType::A => {
            for word in permutations_lex(n) {
                out.push(Element::A(PermA { word }));
            }
        }
        CoxType::B | CoxType::D => {
            for base in permutations_lex(n) {
                for mask in 0u32..(1 << n) {
                    let word: Vec<i32> = base
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| if mask >> i & 1 == 1 { -x } else { x })
                        .collect();
                    if ctype == CoxType::D && mask.count_ones() % 2 != 0 {
                        continue;
                    }
                    out.push(match ctype {
                        CoxType::B => Element::B(PermB { word }),
                        _ => Element::D(PermD { word }),
                    });
                }
            }
            out.sort_by(|a, b| a.word().cmp(b.word()));
        }
    }
    debug_assert_eq!(out.len() as u128, order);
    Ok(out)
}

/// The elements with exactly one descent; these index the shards.
pub fn one_descent_elements(ctype: CoxType, n: usize) -> Result<Vec<Element>> {
    Ok(enumerate(ctype, n)?
        .into_iter()
        .filter(|e| e.descents() == 1)
        .collect())
}

/// Histogram of descent counts, indexed by descent number.
pub fn descent_histogram(ctype: CoxType, n: usize) -> Result<Vec<u64>> {
    let mut hist = vec![0u64; ctype.rank_max(n) + 1];
    for e in enumerate(ctype, n)? {
        hist[e.descents()] += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Element {
        Element::parse(CoxType::A, s).unwrap()
    }

    #[test]
    fn descent_examples_from_worked_cases() {
        // 283964517 has four descents
        assert_eq!(a("283964517").descents(), 4);
        // B word (-1, 2, -4, -5, 3) has three, counting 0 > w(1)
        let b = Element::parse(CoxType::B, "-1,2,-4,-5,3").unwrap();
        assert_eq!(b.descents(), 3);
        // D fork {4,-4}, w(2..5) = (-5,-1,-3,2) has three
        let d = Element::parse(CoxType::D, "±4,-5,-1,-3,2").unwrap();
        assert_eq!(d.descents(), 3);
        assert_eq!(d.word(), &[-4, -5, -1, -3, 2]);
        for t in [CoxType::A, CoxType::B] {
            assert_eq!(Element::identity(t, 4).descents(), 0);
        }
        assert_eq!(Element::identity(CoxType::D, 4).descents(), 0);
    }

    #[test]
    fn enumerate_sizes() {
        assert_eq!(enumerate(CoxType::A, 4).unwrap().len(), 24);
        assert_eq!(enumerate(CoxType::B, 3).unwrap().len(), 48);
        assert_eq!(enumerate(CoxType::D, 4).unwrap().len(), 192);
        assert!(matches!(
            enumerate(CoxType::B, 9),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            enumerate(CoxType::D, 1),
            Err(Error::UnsupportedRank { .. })
        ));
    }

    #[test]
    fn one_descent_counts_match_closed_formulas() {
        // 2^n - n - 1
        for n in 1..=8usize {
            let expect = (1usize << n) - n - 1;
            assert_eq!(one_descent_elements(CoxType::A, n).unwrap().len(), expect);
        }
        // 3^n - n - 1
        for n in 1..=6usize {
            let expect = 3usize.pow(n as u32) - n - 1;
            assert_eq!(one_descent_elements(CoxType::B, n).unwrap().len(), expect);
        }
        // 3^n - n 2^{n-1} - n - 1
        for n in 2..=6usize {
            let expect = 3usize.pow(n as u32) - n * (1 << (n - 1)) - n - 1;
            assert_eq!(one_descent_elements(CoxType::D, n).unwrap().len(), expect);
        }
        assert_eq!(one_descent_elements(CoxType::D, 4).unwrap().len(), 44);
    }

    #[test]
    fn reversal_complements_descents() {
        for e in enumerate(CoxType::A, 6).unwrap() {
            if let Element::A(w) = &e {
                assert_eq!(w.descents() + w.reversed().descents(), 5);
            }
        }
    }

    #[test]
    fn descent_histograms_are_symmetric() {
        for (t, n) in [(CoxType::A, 6), (CoxType::B, 4), (CoxType::D, 4)] {
            let h = descent_histogram(t, n).unwrap();
            let mut r = h.clone();
            r.reverse();
            assert_eq!(h, r, "type {t} n={n}");
        }
    }

    #[test]
    fn parse_accepts_digit_words_and_csv() {
        assert_eq!(a("283964517"), a("2,8,3,9,6,4,5,1,7"));
        assert_eq!(a("283964517").to_string(), "2,8,3,9,6,4,5,1,7");
        // fork entry: sign of w(1) resolved by evenness
        let d1 = Element::parse(CoxType::D, "±4,-5,-1,-3,2").unwrap();
        let d2 = Element::parse(CoxType::D, "4,-5,-1,-3,2").unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn enumeration_is_sorted_and_deterministic() {
        let d = enumerate(CoxType::D, 3).unwrap();
        let mut s = d.clone();
        s.sort_by(|x, y| x.word().cmp(y.word()));
        assert_eq!(d, s);
        assert_eq!(d.len(), 24);
    }
}
