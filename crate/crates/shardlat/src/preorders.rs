//! Block decompositions of (signed, forked) permutations and the shard
//! intersection order.
//!
//! A word is cut at its ascents into maximal decreasing runs; the runs are
//! the blocks of the pre-order. Two blocks are directly comparable when a
//! horizontal line meets both value intervals in the drawn array, the
//! word-left block being smaller, and the pre-order is the transitive
//! closure of that relation. Type D draws the word forked: the sign of
//! `w(1)` is unresolved, the center column carries `{w(1), -w(1)}`, and the
//! two central blocks of a forked decomposition are never comparable.
//!
//! The order `u ≤ v` is refinement of blocks plus consistency of sides, as
//! read off the arrays. Joins are computed by constraint closure over the
//! cone systems and validated by round-trip.

use crate::cones::{close_system, ConeSystem};
use crate::elements::{CoxType, Element, PermA, PermB, PermD};
use crate::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Which side of a block a letter lies on, in the drawn array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Comparability of two blocks in the pre-order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparability {
    Less,
    Greater,
    Incomparable,
}

/// A maximal decreasing run together with its column range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Letters in word order (strictly decreasing).
    pub letters: Vec<i32>,
    pub col_lo: i32,
    pub col_hi: i32,
}

impl Block {
    pub fn min(&self) -> i32 {
        *self.letters.last().unwrap()
    }
    pub fn max(&self) -> i32 {
        self.letters[0]
    }
    fn span_intersects(&self, other: &Block) -> bool {
        self.min().max(other.min()) <= self.max().min(other.max())
    }
}

/// Center structure of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Center {
    /// Type A: no distinguished center.
    None,
    /// Index of the block containing 0 (type B) or of the self-negated zero
    /// block (type D).
    Zero(usize),
    /// Type D forked center: index of `d_{-1}`; `d_1` follows it.
    Fork(usize),
}

/// The (signed / forked) permutation pre-order of an element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPreorder {
    pub ctype: CoxType,
    pub n: usize,
    /// Blocks in word order, left to right.
    pub blocks: Vec<Block>,
    pub center: Center,
    /// Letter -> block position, indexed by [`letter_id`].
    letter_block: Vec<u16>,
    /// Letter -> column, indexed by [`letter_id`].
    letter_col: Vec<i32>,
    descents: usize,
}

/// Dense index for a letter of the given type's alphabet.
pub(crate) fn letter_id(ctype: CoxType, n: usize, letter: i32) -> usize {
    match ctype {
        CoxType::A => (letter - 1) as usize,
        CoxType::B => (letter + n as i32) as usize,
        CoxType::D => {
            if letter < 0 {
                (letter + n as i32) as usize
            } else {
                (letter + n as i32 - 1) as usize
            }
        }
    }
}

/// All letters of the type's alphabet, ascending.
pub(crate) fn alphabet(ctype: CoxType, n: usize) -> Vec<i32> {
    let ni = n as i32;
    match ctype {
        CoxType::A => (1..=ni).collect(),
        CoxType::B => (-ni..=ni).collect(),
        CoxType::D => (-ni..=ni).filter(|&x| x != 0).collect(),
    }
}

fn split_runs(seq: &[i32]) -> Vec<(usize, usize)> {
    // half-open index ranges of maximal decreasing runs
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..seq.len() {
        if seq[i - 1] < seq[i] {
            out.push((start, i));
            start = i;
        }
    }
    if !seq.is_empty() {
        out.push((start, seq.len()));
    }
    out
}

/// Decompose an element into its block pre-order.
pub fn blocks_of(e: &Element) -> BlockPreorder {
    let (blocks, center) = match e {
        Element::A(w) => {
            let word = w.word();
            let blocks = split_runs(word)
                .into_iter()
                .map(|(s, t)| Block {
                    letters: word[s..t].to_vec(),
                    col_lo: s as i32 + 1,
                    col_hi: t as i32,
                })
                .collect();
            (blocks, Center::None)
        }
        Element::B(w) => {
            let long = w.long_form();
            let ni = w.n() as i32;
            let blocks: Vec<Block> = split_runs(&long)
                .into_iter()
                .map(|(s, t)| Block {
                    letters: long[s..t].to_vec(),
                    col_lo: s as i32 - ni,
                    col_hi: t as i32 - 1 - ni,
                })
                .collect();
            let z = blocks.iter().position(|b| b.letters.contains(&0)).unwrap();
            (blocks, Center::Zero(z))
        }
        Element::D(w) => blocks_of_d(w),
    };
    BlockPreorder::assemble(e.ctype(), e.n(), blocks, center, e.descents())
}

fn blocks_of_d(w: &PermD) -> (Vec<Block>, Center) {
    let word = w.word();
    let n = word.len();
    let a = w.fork();
    // right-hand letters w(2..n) sit at columns 1..n-1
    let right = &word[1..];

    let mut right_blocks: Vec<Block> = Vec::new();
    let center;
    let rest_from; // index into `right` where ordinary right blocks start
    if n >= 2 && -word[1] > a {
        // both forked chains descend through the center: single zero block
        let mut m = 1; // length of the decreasing run w(2) > w(3) > ...
        while m < right.len() && right[m - 1] > right[m] {
            m += 1;
        }
        let tail: Vec<i32> = right[..m].to_vec();
        let mut letters: Vec<i32> = tail.iter().rev().map(|x| -x).collect();
        letters.push(a);
        letters.push(-a);
        letters.extend(&tail);
        right_blocks.push(Block {
            letters,
            col_lo: -(m as i32),
            col_hi: m as i32,
        });
        center = Center::Zero(0);
        rest_from = m;
    } else {
        // forked center: d_1 starts at the top fork letter and runs right
        let mut m = 0;
        if !right.is_empty() && a > right[0] {
            m = 1;
            while m < right.len() && right[m - 1] > right[m] {
                m += 1;
            }
        }
        let mut d1 = vec![a];
        d1.extend(&right[..m]);
        let d_neg: Vec<i32> = d1.iter().rev().map(|x| -x).collect();
        right_blocks.push(Block {
            letters: d_neg,
            col_lo: -(m as i32),
            col_hi: 0,
        });
        right_blocks.push(Block {
            letters: d1,
            col_lo: 0,
            col_hi: m as i32,
        });
        center = Center::Fork(0);
        rest_from = m;
    }

    for (s, t) in split_runs(&right[rest_from..]) {
        let (s, t) = (s + rest_from, t + rest_from);
        right_blocks.push(Block {
            letters: right[s..t].to_vec(),
            col_lo: s as i32 + 1,
            col_hi: t as i32,
        });
    }

    // mirror the strictly-right blocks onto the left
    let skip = match center {
        Center::Zero(_) => 1,
        _ => 2,
    };
    let mut blocks: Vec<Block> = right_blocks[skip..]
        .iter()
        .rev()
        .map(|b| Block {
            letters: b.letters.iter().rev().map(|x| -x).collect(),
            col_lo: -b.col_hi,
            col_hi: -b.col_lo,
        })
        .collect();
    let offset = blocks.len();
    blocks.extend(right_blocks);
    let center = match center {
        Center::Zero(i) => Center::Zero(i + offset),
        Center::Fork(i) => Center::Fork(i + offset),
        Center::None => Center::None,
    };
    (blocks, center)
}

impl BlockPreorder {
    fn assemble(
        ctype: CoxType,
        n: usize,
        blocks: Vec<Block>,
        center: Center,
        descents: usize,
    ) -> Self {
        let universe = alphabet(ctype, n).len();
        let mut letter_block = vec![u16::MAX; universe];
        let mut letter_col = vec![0i32; universe];
        for (pos, b) in blocks.iter().enumerate() {
            // the center column of a forked pair holds two letters
            for (off, &l) in b.letters.iter().enumerate() {
                let id = letter_id(ctype, n, l);
                letter_block[id] = pos as u16;
                letter_col[id] = b.col_lo + off as i32;
            }
        }
        BlockPreorder {
            ctype,
            n,
            blocks,
            center,
            letter_block,
            letter_col,
            descents,
        }
    }

    pub fn descents(&self) -> usize {
        self.descents
    }

    /// Block position holding a letter.
    pub fn block_of_letter(&self, letter: i32) -> usize {
        self.letter_block[letter_id(self.ctype, self.n, letter)] as usize
    }

    /// Paper-style index of the block at a word position (`1..k` for type A,
    /// `-k..k` around the center for B/D).
    pub fn paper_index(&self, pos: usize) -> isize {
        match self.center {
            Center::None => pos as isize + 1,
            Center::Zero(z) => pos as isize - z as isize,
            Center::Fork(f) => {
                if pos <= f {
                    pos as isize - f as isize - 1
                } else {
                    pos as isize - f as isize
                }
            }
        }
    }

    /// Word position of a paper-style block index.
    pub fn position_of_index(&self, idx: isize) -> Option<usize> {
        let pos = match self.center {
            Center::None => idx - 1,
            Center::Zero(z) => idx + z as isize,
            Center::Fork(f) => {
                if idx == 0 {
                    return None;
                } else if idx < 0 {
                    idx + f as isize + 1
                } else {
                    idx + f as isize
                }
            }
        };
        (0..self.blocks.len() as isize)
            .contains(&pos)
            .then_some(pos as usize)
    }

    /// Largest block index `k`; for B/D this is the corank `n - d(w)`.
    pub fn corank(&self) -> usize {
        match self.center {
            Center::None => self.blocks.len(),
            Center::Zero(z) => self.blocks.len() - 1 - z,
            Center::Fork(f) => self.blocks.len() - 2 - f,
        }
    }

    fn is_center_pair(&self, p: usize, q: usize) -> bool {
        match self.center {
            Center::Fork(f) => (p == f && q == f + 1) || (p == f + 1 && q == f),
            _ => false,
        }
    }

    /// Side of `letter` relative to the block at `pos`, or `None` when the
    /// letter's block is `pos` itself or its forked partner.
    pub fn side_of(&self, letter: i32, pos: usize) -> Option<Side> {
        let kb = self.block_of_letter(letter);
        if kb == pos || self.is_center_pair(kb, pos) {
            return None;
        }
        let col = self.letter_col[letter_id(self.ctype, self.n, letter)];
        if col < self.blocks[pos].col_lo {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        }
    }

    /// Side constraints of the cone: `(letter, block position, side)` for
    /// every letter strictly inside a block's value interval.
    pub fn side_constraints(&self) -> Vec<(i32, usize, Side)> {
        let mut out = Vec::new();
        for (pos, b) in self.blocks.iter().enumerate() {
            for k in (b.min() + 1)..b.max() {
                if self.ctype == CoxType::D && k == 0 {
                    continue;
                }
                if self.block_of_letter(k) == pos {
                    continue;
                }
                if let Some(side) = self.side_of(k, pos) {
                    out.push((k, pos, side));
                }
            }
        }
        out
    }

    /// Direct comparability edges (word-left block less), as a relation
    /// matrix before transitive closure.
    fn direct_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..self.blocks.len() {
            for q in (p + 1)..self.blocks.len() {
                if self.is_center_pair(p, q) {
                    continue;
                }
                if self.blocks[p].span_intersects(&self.blocks[q]) {
                    out.push((p, q));
                }
            }
        }
        out
    }

    /// Pre-order comparability of the blocks at word positions `p`, `q`:
    /// the transitive closure of the horizontal-line relation.
    pub fn comparable_positions(&self, p: usize, q: usize) -> Comparability {
        if p == q {
            return Comparability::Incomparable;
        }
        let k = self.blocks.len();
        let mut reach = vec![false; k * k];
        for (a, b) in self.direct_edges() {
            reach[a * k + b] = true;
        }
        // Floyd-Warshall; block counts are tiny
        for m in 0..k {
            for a in 0..k {
                if reach[a * k + m] {
                    for b in 0..k {
                        if reach[m * k + b] {
                            reach[a * k + b] = true;
                        }
                    }
                }
            }
        }
        if reach[p * k + q] {
            Comparability::Less
        } else if reach[q * k + p] {
            Comparability::Greater
        } else {
            Comparability::Incomparable
        }
    }

    /// Comparability by paper-style block indices.
    pub fn comparable(&self, i: isize, j: isize) -> Result<Comparability> {
        let p = self
            .position_of_index(i)
            .ok_or_else(|| Error::Mismatch(format!("no block with index {i}")))?;
        let q = self
            .position_of_index(j)
            .ok_or_else(|| Error::Mismatch(format!("no block with index {j}")))?;
        Ok(self.comparable_positions(p, q))
    }

    /// Reconstruct the element from the blocks (round-trip check).
    pub fn to_element(&self) -> Result<Element> {
        match self.ctype {
            CoxType::A => {
                let word: Vec<i32> = self
                    .blocks
                    .iter()
                    .flat_map(|b| b.letters.iter().copied())
                    .collect();
                Ok(Element::A(PermA::new(word)?))
            }
            CoxType::B => {
                let long: Vec<i32> = self
                    .blocks
                    .iter()
                    .flat_map(|b| b.letters.iter().copied())
                    .collect();
                let zero_at = long.iter().position(|&x| x == 0).unwrap();
                if zero_at != self.n {
                    return Err(Error::Malformed("zero off-center".into()));
                }
                Ok(Element::B(PermB::new(long[self.n + 1..].to_vec())?))
            }
            CoxType::D => {
                // short word: top fork letter, then the letters at columns >= 1
                let mut word = Vec::with_capacity(self.n);
                match self.center {
                    Center::Zero(z) => {
                        let b = &self.blocks[z];
                        let half = b.letters.len() / 2;
                        word.push(b.letters[half - 1]);
                        word.extend(&b.letters[half + 1..]);
                        for blk in &self.blocks[z + 1..] {
                            word.extend(&blk.letters);
                        }
                    }
                    Center::Fork(f) => {
                        word.extend(&self.blocks[f + 1].letters);
                        for blk in &self.blocks[f + 2..] {
                            word.extend(&blk.letters);
                        }
                    }
                    Center::None => unreachable!(),
                }
                Ok(Element::D(PermD::from_fork(word)?))
            }
        }
    }

    fn fmt_block(&self, b: &Block, f: &mut fmt::Formatter<'_>, fork_first: bool) -> fmt::Result {
        let digits = self.ctype == CoxType::A && self.n <= 9;
        for (i, &l) in b.letters.iter().enumerate() {
            if i > 0 && !digits {
                write!(f, ",")?;
            }
            if i == 0 && fork_first {
                write!(f, "±")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Display for BlockPreorder {
    /// Bar notation: `2|83|964|51|7`, `-3|5,4,-2|1,0,-1|2,-4,-5|3`; for a
    /// type-D fork the top center letter is prefixed with `±`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, b) in self.blocks.iter().enumerate() {
            if pos > 0 {
                write!(f, "|")?;
            }
            match self.center {
                Center::Zero(z) if pos == z && self.ctype == CoxType::D => {
                    // render "5,±4,-5" style: skip the lower fork letter
                    let half = b.letters.len() / 2;
                    for (i, &l) in b.letters.iter().enumerate() {
                        if i == half {
                            continue;
                        }
                        if i > 0 && !(i == half + 1 && half == 0) {
                            write!(f, ",")?;
                        }
                        if i == half - 1 {
                            write!(f, "±")?;
                        }
                        write!(f, "{l}")?;
                    }
                }
                Center::Fork(fk) if pos == fk + 1 => self.fmt_block(b, f, true)?,
                _ => self.fmt_block(b, f, false)?,
            }
        }
        Ok(())
    }
}

/// `u ≤ v` in the shard intersection order: refinement plus side
/// consistency.
pub fn leq(u: &Element, v: &Element) -> Result<bool> {
    if u.ctype() != v.ctype() || u.n() != v.n() {
        return Err(Error::Mismatch(format!(
            "cannot compare {}({}) with {}({})",
            u.ctype(),
            u.n(),
            v.ctype(),
            v.n()
        )));
    }
    Ok(leq_pre(&blocks_of(u), &blocks_of(v)))
}

/// Order test on precomputed pre-orders (hot path for poset construction).
pub fn leq_pre(u: &BlockPreorder, v: &BlockPreorder) -> bool {
    if u.blocks.len() < v.blocks.len() {
        return false;
    }
    // refinement: every u-block inside a single v-block
    for b in &u.blocks {
        let vb = v.block_of_letter(b.letters[0]);
        if b
            .letters
            .iter()
            .any(|&l| v.block_of_letter(l) != vb)
        {
            return false;
        }
    }
    // consistency: every side constraint of u survives in v
    for (k, pos, side) in u.side_constraints() {
        let vb = v.block_of_letter(u.blocks[pos].letters[0]);
        if v.block_of_letter(k) == vb {
            continue;
        }
        match v.side_of(k, vb) {
            Some(s) if s == side => {}
            _ => return false,
        }
    }
    true
}

/// Cover test: `u ⋖ v` iff `u ≤ v` and the descent count steps by one.
pub fn is_cover(u: &Element, v: &Element) -> Result<bool> {
    Ok(u.descents() + 1 == v.descents() && leq(u, v)?)
}

/// Least upper bound by constraint closure of the two cone systems.
///
/// For types A and B the word is read off the closed system directly; for
/// type D the closed system is matched against the cone table of `D_n`.
/// Either way the result is validated by round-trip before returning.
pub fn join_direct(u: &Element, v: &Element) -> Result<Element> {
    if u.ctype() != v.ctype() || u.n() != v.n() {
        return Err(Error::Mismatch("join of mismatched elements".into()));
    }
    let (ctype, n) = (u.ctype(), u.n());
    let mut sys = ConeSystem::of(u);
    sys.absorb(&ConeSystem::of(v));
    let closure = close_system(&sys);
    let w = match ctype {
        CoxType::A | CoxType::B => read_off_word(ctype, n, &closure)?,
        CoxType::D => {
            let table = cone_table(ctype, n)?;
            table
                .get(&closure.fingerprint())
                .cloned()
                .ok_or_else(|| Error::JoinFailed(format!("no D element for join of {u} and {v}")))?
        }
    };
    // the closed system must be exactly the cone of the result
    if close_system(&ConeSystem::of(&w)).fingerprint() != closure.fingerprint() {
        return Err(Error::JoinFailed(format!("round-trip mismatch for {u} v {v}")));
    }
    Ok(w)
}

/// Reconstruct the unique word whose pre-order matches a closed system
/// (types A and B). Classes are emitted greedily: among the classes with no
/// unplaced predecessor, the one with the smallest maximum letter comes
/// first.
pub(crate) fn read_off_word(
    ctype: CoxType,
    n: usize,
    closure: &crate::cones::Closure,
) -> Result<Element> {
    let classes = closure.letter_classes();
    let k = classes.len();
    let le = |a: usize, b: usize| closure.class_le(&classes[a], &classes[b]);
    let mut placed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let mut pick = usize::MAX;
        for c in 0..k {
            if placed[c] {
                continue;
            }
            let blocked = (0..k).any(|d| d != c && !placed[d] && le(d, c));
            if blocked {
                continue;
            }
            if pick == usize::MAX
                || classes[c].iter().max() < classes[pick].iter().max()
            {
                pick = c;
            }
        }
        if pick == usize::MAX {
            return Err(Error::JoinFailed("cycle among classes".into()));
        }
        placed[pick] = true;
        order.push(pick);
    }
    let mut word: Vec<i32> = Vec::new();
    for c in order {
        let mut letters = classes[c].clone();
        letters.sort_unstable_by(|a, b| b.cmp(a));
        word.extend(letters);
    }
    match ctype {
        CoxType::A => Ok(Element::A(PermA::new(word)?)),
        CoxType::B => {
            let mid = word
                .iter()
                .position(|&x| x == 0)
                .ok_or_else(|| Error::JoinFailed("no zero letter".into()))?;
            if mid != n || word.iter().rev().zip(&word).any(|(a, b)| *a != -*b) {
                return Err(Error::JoinFailed("long word is not antisymmetric".into()));
            }
            Ok(Element::B(PermB::new(word[n + 1..].to_vec())?))
        }
        CoxType::D => unreachable!(),
    }
}

type ConeTable = Arc<HashMap<Vec<u8>, Element>>;

fn cone_table(ctype: CoxType, n: usize) -> Result<ConeTable> {
    static TABLES: OnceLock<Mutex<HashMap<(CoxType, usize), ConeTable>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().unwrap().get(&(ctype, n)) {
        return Ok(t.clone());
    }
    let elements = crate::elements::enumerate(ctype, n)?;
    let mut map = HashMap::with_capacity(elements.len());
    for e in elements {
        let fp = close_system(&ConeSystem::of(&e)).fingerprint();
        map.insert(fp, e);
    }
    let arc = Arc::new(map);
    tables
        .lock()
        .unwrap()
        .insert((ctype, n), arc.clone());
    Ok(arc)
}
