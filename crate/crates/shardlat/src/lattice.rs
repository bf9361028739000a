//! Generic finite graded poset machinery: construction, covers, Möbius,
//! chains, lattice checks, products, and symmetric boolean decompositions.
//!
//! The relation is stored as a dense bit matrix, which keeps every query
//! O(1) and bounds memory predictably; construction refuses inputs past the
//! configured cap.

use crate::elements::{CoxType, Element};
use crate::par;
use crate::preorders::{blocks_of, leq_pre};
use crate::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;

/// Dense square bit matrix.
#[derive(Clone)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn from_rows(n: usize, rows: Vec<Vec<u64>>) -> Self {
        let words = n.div_ceil(64);
        let mut bits = Vec::with_capacity(n * words);
        for r in rows {
            debug_assert_eq!(r.len(), words);
            bits.extend(r);
        }
        BitMatrix { n, words, bits }
    }

    pub fn transpose(&self) -> Self {
        let mut t = BitMatrix::new(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    t.set(j, i);
                }
            }
        }
        t
    }
}

fn row_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn row_and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &bits)| {
        let mut b = bits;
        std::iter::from_fn(move || {
            if b == 0 {
                None
            } else {
                let t = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(w * 64 + t)
            }
        })
    })
}

/// A finite graded poset with a unique minimum.
pub struct Poset<T> {
    elements: Vec<T>,
    display: Vec<String>,
    up: BitMatrix,
    down: BitMatrix,
    covers_up: Vec<Vec<u32>>,
    covers_dn: Vec<Vec<u32>>,
    rank: Vec<u32>,
    rank_max: usize,
    min_idx: usize,
}

/// Outcome of a lattice check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeCheck {
    Lattice,
    /// A pair with no unique minimal upper bound or maximal lower bound.
    Witness { a: usize, b: usize, join: bool },
}

impl<T: Sync + Send> Poset<T> {
    /// Materialize a poset from a pure order predicate. Fails if the
    /// relation is not a partial order, the poset is not graded, or the
    /// minimum is not unique.
    pub fn build(
        elements: Vec<T>,
        display: Vec<String>,
        leq_fn: impl Fn(&T, &T) -> bool + Sync,
    ) -> Result<Poset<T>> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::NotAPartialOrder("empty element list".into()));
        }
        let cap = crate::poset_cap();
        if n > cap {
            return Err(Error::CapExceeded {
                requested: n,
                cap,
            });
        }
        let words = n.div_ceil(64);
        let rows: Vec<Vec<u64>> = par::map_indexed(n, |i| {
            let mut row = vec![0u64; words];
            for j in 0..n {
                if leq_fn(&elements[i], &elements[j]) {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        });
        let up = BitMatrix::from_rows(n, rows);
        Self::from_relation(elements, display, up)
    }

    fn from_relation(elements: Vec<T>, display: Vec<String>, up: BitMatrix) -> Result<Poset<T>> {
        let n = elements.len();
        // reflexive, antisymmetric, transitive
        for i in 0..n {
            if !up.get(i, i) {
                return Err(Error::NotAPartialOrder(format!(
                    "not reflexive at {}",
                    display[i]
                )));
            }
        }
        let checks: Vec<Option<String>> = par::map_indexed(n, |i| {
            for j in iter_bits(up.row(i)) {
                if i != j && up.get(j, i) {
                    return Some(format!(
                        "antisymmetry fails at {} / {}",
                        display[i], display[j]
                    ));
                }
                if !row_subset(up.row(j), up.row(i)) {
                    return Some(format!(
                        "transitivity fails at {} <= {}",
                        display[i], display[j]
                    ));
                }
            }
            None
        });
        if let Some(msg) = checks.into_iter().flatten().next() {
            return Err(Error::NotAPartialOrder(msg));
        }
        let down = up.transpose();
        let minima: Vec<usize> = (0..n)
            .filter(|&i| row_and_popcount(down.row(i), down.row(i)) == 1)
            .collect();
        if minima.len() != 1 {
            return Err(Error::NotGraded(format!(
                "{} minimal elements",
                minima.len()
            )));
        }
        let min_idx = minima[0];

        // covers: u < v with nothing strictly between
        let covers_up: Vec<Vec<u32>> = par::map_indexed(n, |u| {
            let mut out = Vec::new();
            for v in iter_bits(up.row(u)) {
                if v != u && row_and_popcount(up.row(u), down.row(v)) == 2 {
                    out.push(v as u32);
                }
            }
            out
        });
        let mut covers_dn: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, ups) in covers_up.iter().enumerate() {
            for &v in ups {
                covers_dn[v as usize].push(u as u32);
            }
        }

        // rank by longest path from the minimum, then check every cover
        // steps by exactly one
        let mut rank = vec![u32::MAX; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| row_and_popcount(down.row(i), down.row(i)));
        for &v in &order {
            rank[v] = if v == min_idx {
                0
            } else {
                let r = covers_dn[v]
                    .iter()
                    .map(|&u| rank[u as usize])
                    .max()
                    .ok_or_else(|| {
                        Error::NotGraded(format!("{} unreachable from minimum", v))
                    })?;
                if r == u32::MAX {
                    return Err(Error::NotGraded("cover order broken".into()));
                }
                r + 1
            };
        }
        for (u, ups) in covers_up.iter().enumerate() {
            for &v in ups {
                if rank[v as usize] != rank[u] + 1 {
                    return Err(Error::NotGraded(format!(
                        "cover {} -> {} jumps rank {} -> {}",
                        u,
                        v,
                        rank[u],
                        rank[v as usize]
                    )));
                }
            }
        }
        // cross-check the rank-difference-1 characterization of covers
        for u in 0..n {
            let filtered = iter_bits(up.row(u))
                .filter(|&v| v != u && rank[v] == rank[u] + 1)
                .count();
            if filtered != covers_up[u].len() {
                return Err(Error::NotGraded(format!(
                    "transitive reduction disagrees with rank filter at {}",
                    display[u]
                )));
            }
        }
        let rank_max = rank.iter().copied().max().unwrap() as usize;
        Ok(Poset {
            elements,
            display,
            up,
            down,
            covers_up,
            covers_dn,
            rank,
            rank_max,
            min_idx,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &T {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn display(&self, i: usize) -> &str {
        &self.display[i]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up.get(i, j)
    }

    pub fn rank(&self, i: usize) -> usize {
        self.rank[i] as usize
    }

    pub fn rank_max(&self) -> usize {
        self.rank_max
    }

    pub fn min_index(&self) -> usize {
        self.min_idx
    }

    /// Index of the unique maximum, if there is one.
    pub fn max_index(&self) -> Option<usize> {
        let tops: Vec<usize> = (0..self.len())
            .filter(|&i| self.covers_up[i].is_empty())
            .collect();
        (tops.len() == 1).then(|| tops[0])
    }

    pub fn covers_up(&self, i: usize) -> &[u32] {
        &self.covers_up[i]
    }

    pub fn covers_down(&self, i: usize) -> &[u32] {
        &self.covers_dn[i]
    }

    /// All cover pairs `(lo, hi)`, sorted.
    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, ups) in self.covers_up.iter().enumerate() {
            for &v in ups {
                out.push((u, v as usize));
            }
        }
        out.sort_unstable();
        out
    }

    /// Histogram of ranks.
    pub fn rank_histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.rank_max + 1];
        for &r in &self.rank {
            h[r as usize] += 1;
        }
        h
    }

    /// Elements of the closed interval `[u, v]`.
    pub fn interval(&self, u: usize, v: usize) -> Vec<usize> {
        iter_bits(self.up.row(u))
            .filter(|&z| self.up.get(z, v))
            .collect()
    }

    /// Möbius function by the interval recursion, `μ(u,u) = 1`.
    pub fn mobius(&self, u: usize, v: usize) -> Result<i64> {
        if !self.leq(u, v) {
            return Err(Error::NotComparable(format!(
                "{} is not below {}",
                self.display[u], self.display[v]
            )));
        }
        let mut zs = self.interval(u, v);
        zs.sort_by_key(|&z| self.rank[z]);
        let mut mu = vec![0i64; zs.len()];
        for (i, &z) in zs.iter().enumerate() {
            if z == u {
                mu[i] = 1;
                continue;
            }
            let mut s = 0i64;
            for (j, &y) in zs.iter().enumerate().take(i) {
                if self.up.get(y, z) && y != z {
                    s += mu[j];
                }
            }
            mu[i] = -s;
        }
        Ok(mu[zs.len() - 1])
    }

    /// All saturated chains from `u` to `v`, in depth-first cover order.
    pub fn maximal_chains(&self, u: usize, v: usize, cap: u64) -> Result<Vec<Vec<usize>>> {
        if !self.leq(u, v) {
            return Err(Error::NotComparable(format!(
                "{} is not below {}",
                self.display[u], self.display[v]
            )));
        }
        let mut out = Vec::new();
        let mut chain = vec![u];
        self.chains_rec(u, v, &mut chain, &mut out, cap)?;
        Ok(out)
    }

    fn chains_rec(
        &self,
        z: usize,
        v: usize,
        chain: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: u64,
    ) -> Result<()> {
        if z == v {
            if out.len() as u64 >= cap {
                return Err(Error::ChainCapExceeded {
                    cap,
                    lo: self.display[chain[0]].clone(),
                    hi: self.display[v].clone(),
                });
            }
            out.push(chain.clone());
            return Ok(());
        }
        for &w in &self.covers_up[z] {
            let w = w as usize;
            if self.up.get(w, v) {
                chain.push(w);
                self.chains_rec(w, v, chain, out, cap)?;
                chain.pop();
            }
        }
        Ok(())
    }

    /// Least upper bound of a pair, if it exists.
    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        let words = self.up.words;
        let ups: Vec<u64> = (0..words)
            .map(|w| self.up.row(a)[w] & self.up.row(b)[w])
            .collect();
        let mut best: Option<usize> = None;
        for z in iter_bits(&ups) {
            if best.is_none_or(|m| self.rank[z] < self.rank[m]) {
                best = Some(z);
            }
        }
        let m = best?;
        row_subset(&ups, self.up.row(m)).then_some(m)
    }

    /// Greatest lower bound of a pair, if it exists.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let words = self.down.words;
        let downs: Vec<u64> = (0..words)
            .map(|w| self.down.row(a)[w] & self.down.row(b)[w])
            .collect();
        let mut best: Option<usize> = None;
        for z in iter_bits(&downs) {
            if best.is_none_or(|m| self.rank[z] > self.rank[m]) {
                best = Some(z);
            }
        }
        let m = best?;
        row_subset(&downs, self.down.row(m)).then_some(m)
    }

    /// Check that every pair has a join and a meet.
    pub fn lattice_check(&self) -> LatticeCheck {
        let n = self.len();
        let bad = par::map_indexed(n, |a| {
            for b in (a + 1)..n {
                if self.join(a, b).is_none() {
                    return Some(LatticeCheck::Witness { a, b, join: true });
                }
                if self.meet(a, b).is_none() {
                    return Some(LatticeCheck::Witness {
                        a,
                        b,
                        join: false,
                    });
                }
            }
            None
        });
        bad.into_iter()
            .flatten()
            .next()
            .unwrap_or(LatticeCheck::Lattice)
    }

    /// Componentwise product order; ranks add.
    pub fn product<U: Sync + Send + Clone>(&self, other: &Poset<U>) -> Poset<(T, U)>
    where
        T: Clone,
    {
        let (np, nq) = (self.len(), other.len());
        let n = np * nq;
        let mut elements = Vec::with_capacity(n);
        let mut display = Vec::with_capacity(n);
        for i in 0..np {
            for j in 0..nq {
                elements.push((self.elements[i].clone(), other.elements[j].clone()));
                display.push(format!("({},{})", self.display[i], other.display[j]));
            }
        }
        let mut up = BitMatrix::new(n);
        for i in 0..np {
            for j in 0..nq {
                for k in iter_bits(self.up.row(i)) {
                    for l in iter_bits(other.up.row(j)) {
                        up.set(i * nq + j, k * nq + l);
                    }
                }
            }
        }
        Poset::from_relation(elements, display, up).expect("product of graded posets")
    }

    /// Structured JSON export, bit-exact deterministic.
    pub fn to_json(&self, type_label: &str, n: usize) -> String {
        #[derive(Serialize)]
        struct PosetJson<'a> {
            #[serde(rename = "type")]
            type_label: &'a str,
            n: usize,
            elements: &'a [String],
            rank: Vec<usize>,
            covers: Vec<(usize, usize)>,
        }
        serde_json::to_string_pretty(&PosetJson {
            type_label,
            n,
            elements: &self.display,
            rank: self.rank.iter().map(|&r| r as usize).collect(),
            covers: self.cover_pairs(),
        })
        .expect("serializable")
    }

    /// Hasse diagram in DOT with rank layering.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{");
        let _ = writeln!(s, "  rankdir=BT;");
        let _ = writeln!(s, "  node [shape=box, fontname=\"monospace\"];");
        for r in 0..=self.rank_max {
            let layer: Vec<usize> = (0..self.len()).filter(|&i| self.rank(i) == r).collect();
            if layer.is_empty() {
                continue;
            }
            let _ = write!(s, "  {{ rank=same;");
            for i in layer {
                let _ = write!(s, " v{} [label=\"{}\"];", i, self.display[i]);
            }
            let _ = writeln!(s, " }}");
        }
        for (u, v) in self.cover_pairs() {
            let _ = writeln!(s, "  v{u} -> v{v};");
        }
        let _ = writeln!(s, "}}");
        s
    }
}

/// Build the shard intersection order `(W, ≤)` for a classical type.
pub fn shard_poset(ctype: CoxType, n: usize) -> Result<Poset<Element>> {
    let elements = crate::elements::enumerate(ctype, n)?;
    let cap = crate::poset_cap();
    if elements.len() > cap {
        return Err(Error::CapExceeded {
            requested: elements.len(),
            cap,
        });
    }
    let pres: Vec<_> = par::map_slice(&elements, blocks_of);
    let display: Vec<String> = elements.iter().map(|e| e.to_string()).collect();
    let n_el = elements.len();
    let words = n_el.div_ceil(64);
    let rows: Vec<Vec<u64>> = par::map_indexed(n_el, |i| {
        let mut row = vec![0u64; words];
        for j in 0..n_el {
            if leq_pre(&pres[i], &pres[j]) {
                row[j / 64] |= 1 << (j % 64);
            }
        }
        row
    });
    let up = BitMatrix::from_rows(n_el, rows);
    Poset::from_relation(elements, display, up)
}

/// One boolean class of a symmetric boolean decomposition: `members[J]` is
/// the element reached from the base by flipping the coordinates in the
/// bitmask `J`.
#[derive(Debug, Clone)]
pub struct SbdClass {
    pub base: usize,
    pub dim: usize,
    pub members: Vec<usize>,
}

/// A symmetric boolean decomposition of a graded poset.
#[derive(Debug, Clone)]
pub struct Sbd {
    pub classes: Vec<SbdClass>,
}

/// Verification report for a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct SbdReport {
    pub ok: bool,
    pub violations: Vec<String>,
    /// `gamma[j]` = number of classes of size `2^{rank_max - 2j}`.
    pub gamma: Vec<u64>,
    /// Whether `J ⊆ K  ⟺  member(J) ≤ member(K)` held in every class
    /// (stronger than the decomposition requires).
    pub embedding_iff: bool,
}

/// Check a claimed symmetric boolean decomposition: partition, rank
/// offsets, cover preservation of single-coordinate steps, and the subset
/// order embedding.
pub fn verify_sbd<T: Sync + Send>(p: &Poset<T>, sbd: &Sbd) -> SbdReport {
    let mut violations = Vec::new();
    let mut seen = vec![false; p.len()];
    let rank_max = p.rank_max();
    let mut gamma = vec![0u64; rank_max / 2 + 1];
    let mut embedding_iff = true;

    for (ci, class) in sbd.classes.iter().enumerate() {
        let m = class.dim;
        if class.members.len() != 1 << m {
            violations.push(format!("class {ci}: {} members for dim {m}", class.members.len()));
            continue;
        }
        if class.members[0] != class.base {
            violations.push(format!("class {ci}: members[0] is not the base"));
        }
        let j = p.rank(class.base);
        if rank_max < 2 * j || rank_max - 2 * j != m {
            violations.push(format!(
                "class {ci}: dim {m} not centered (base rank {j}, poset rank {rank_max})"
            ));
        } else {
            gamma[j] += 1;
        }
        for (mask, &e) in class.members.iter().enumerate() {
            if seen[e] {
                violations.push(format!("element {} in two classes", p.display(e)));
            }
            seen[e] = true;
            if p.rank(e) != j + (mask as u32).count_ones() as usize {
                violations.push(format!(
                    "class {ci}: member {} has rank {} at mask weight {}",
                    p.display(e),
                    p.rank(e),
                    (mask as u32).count_ones()
                ));
            }
            for x in 0..m {
                if mask & (1 << x) == 0 {
                    let f = class.members[mask | (1 << x)];
                    if !p.covers_up(e).contains(&(f as u32)) {
                        violations.push(format!(
                            "class {ci}: step {} -> {} is not a cover",
                            p.display(e),
                            p.display(f)
                        ));
                    }
                }
            }
        }
        'outer: for (ma, &ea) in class.members.iter().enumerate() {
            for (mb, &eb) in class.members.iter().enumerate() {
                let subset = ma & !mb == 0;
                if subset != p.leq(ea, eb) {
                    embedding_iff = false;
                    if subset {
                        // subset order must embed; the converse may fail
                        violations.push(format!(
                            "class {ci}: {} not below {} despite subset masks",
                            p.display(ea),
                            p.display(eb)
                        ));
                        break 'outer;
                    }
                }
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        violations.push(format!("element {} not covered", p.display(missing)));
    }

    // the gamma identity must hold exactly when the checks above pass
    if violations.is_empty() {
        let hist = p.rank_histogram();
        let mut poly = vec![0i64; rank_max + 1];
        for (j, &g) in gamma.iter().enumerate() {
            if g == 0 {
                continue;
            }
            let m = rank_max - 2 * j;
            for (i, c) in binomial_row(m).into_iter().enumerate() {
                poly[j + i] += g as i64 * c as i64;
            }
        }
        if poly.iter().zip(&hist).any(|(&a, &b)| a != b as i64) {
            violations.push(format!("gamma identity fails: {poly:?} vs {hist:?}"));
        }
    }

    SbdReport {
        ok: violations.is_empty(),
        violations,
        gamma,
        embedding_iff,
    }
}

fn binomial_row(m: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..m {
        let mut next = vec![1u64];
        for w in row.windows(2) {
            next.push(w[0] + w[1]);
        }
        next.push(1);
        row = next;
    }
    row
}

/// Product decomposition of a product poset (class sizes multiply).
pub fn product_sbd(sp: &Sbd, sq: &Sbd, q_len: usize) -> Sbd {
    let mut classes = Vec::with_capacity(sp.classes.len() * sq.classes.len());
    for cp in &sp.classes {
        for cq in &sq.classes {
            let dim = cp.dim + cq.dim;
            let mut members = Vec::with_capacity(1 << dim);
            for mask in 0..(1usize << dim) {
                let jp = mask & ((1 << cp.dim) - 1);
                let jq = mask >> cp.dim;
                members.push(cp.members[jp] * q_len + cq.members[jq]);
            }
            classes.push(SbdClass {
                base: cp.base * q_len + cq.base,
                dim,
                members,
            });
        }
    }
    Sbd { classes }
}

/// Result of an exhaustive decomposition search.
#[derive(Debug)]
pub enum SbdSearch {
    Found(Sbd),
    None,
    BudgetExceeded,
}

/// Backtracking search for a symmetric boolean decomposition. Exhaustive
/// when it terminates within the node budget; intended for small posets and
/// exploratory runs.
pub fn find_sbd<T: Sync + Send>(p: &Poset<T>, budget: u64) -> SbdSearch {
    let mut st = SbdState {
        used: vec![false; p.len()],
        classes: Vec::new(),
        nodes: 0,
        budget,
    };
    match place_next(p, &mut st) {
        Some(true) => SbdSearch::Found(Sbd {
            classes: st.classes,
        }),
        Some(false) => SbdSearch::None,
        None => SbdSearch::BudgetExceeded,
    }
}

struct SbdState {
    used: Vec<bool>,
    classes: Vec<SbdClass>,
    nodes: u64,
    budget: u64,
}

// The minimal unused element (by rank, then index) must be the base of its
// class: class members strictly above the base rank are heavier.
fn place_next<T: Sync + Send>(p: &Poset<T>, st: &mut SbdState) -> Option<bool> {
    st.nodes += 1;
    if st.nodes > st.budget {
        return None;
    }
    let Some(base) = (0..p.len())
        .filter(|&i| !st.used[i])
        .min_by_key(|&i| (p.rank(i), i))
    else {
        return Some(true);
    };
    let j = p.rank(base);
    if p.rank_max() < 2 * j {
        return Some(false);
    }
    let m = p.rank_max() - 2 * j;
    let mut members = vec![usize::MAX; 1 << m];
    members[0] = base;
    st.used[base] = true;
    let out = fill_mask(p, st, &mut members, m, 1);
    if out != Some(true) {
        st.used[base] = false;
    }
    out
}

// Assign members[mask] in increasing mask order; every one-bit-lower member
// already exists and must be covered by the candidate.
fn fill_mask<T: Sync + Send>(
    p: &Poset<T>,
    st: &mut SbdState,
    members: &mut Vec<usize>,
    m: usize,
    mask: usize,
) -> Option<bool> {
    if mask == 1usize << m {
        st.classes.push(SbdClass {
            base: members[0],
            dim: m,
            members: members.clone(),
        });
        let out = place_next(p, st);
        if out != Some(true) {
            st.classes.pop();
        }
        return out;
    }
    st.nodes += 1;
    if st.nodes > st.budget {
        return None;
    }
    let lows: Vec<usize> = (0..m)
        .filter(|&x| mask & (1 << x) != 0)
        .map(|x| members[mask & !(1 << x)])
        .collect();
    'cand: for &c in p.covers_up(lows[0]) {
        let c = c as usize;
        if st.used[c] {
            continue;
        }
        // canonical coordinate labeling: singleton members increase
        if mask.count_ones() == 1 {
            let x = mask.trailing_zeros() as usize;
            if (0..x).any(|y| members[1 << y] > c) {
                continue;
            }
        }
        for &l in &lows[1..] {
            if !p.covers_up(l).contains(&(c as u32)) {
                continue 'cand;
            }
        }
        members[mask] = c;
        st.used[c] = true;
        let out = fill_mask(p, st, members, m, mask + 1);
        if out != Some(false) {
            return out;
        }
        st.used[c] = false;
        members[mask] = usize::MAX;
    }
    Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_poset(len: usize) -> Poset<usize> {
        Poset::build(
            (0..len).collect(),
            (0..len).map(|i| i.to_string()).collect(),
            |a, b| a <= b,
        )
        .unwrap()
    }

    fn boolean_cube(bits: usize) -> Poset<usize> {
        Poset::build(
            (0..1usize << bits).collect(),
            (0..1usize << bits).map(|i| format!("{i:b}")).collect(),
            |a, b| a & !b == 0,
        )
        .unwrap()
    }

    #[test]
    fn build_s4_profile() {
        let p = shard_poset(CoxType::A, 4).unwrap();
        assert_eq!(p.len(), 24);
        assert_eq!(p.rank_histogram(), vec![1, 11, 11, 1]);
        for i in 0..p.len() {
            assert_eq!(p.rank(i), p.element(i).descents());
        }
    }

    #[test]
    fn build_b3_profile() {
        let p = shard_poset(CoxType::B, 3).unwrap();
        assert_eq!(p.len(), 48);
        assert_eq!(p.rank_histogram(), vec![1, 23, 23, 1]);
    }

    #[test]
    fn trivial_poset() {
        let p = chain_poset(1);
        assert_eq!(p.len(), 1);
        assert_eq!(p.rank_max(), 0);
        assert_eq!(p.mobius(0, 0).unwrap(), 1);
    }

    #[test]
    fn mobius_values() {
        let two_chain = chain_poset(2);
        assert_eq!(two_chain.mobius(0, 1).unwrap(), -1);
        let s4 = shard_poset(CoxType::A, 4).unwrap();
        let (lo, hi) = (s4.min_index(), s4.max_index().unwrap());
        assert_eq!(s4.mobius(lo, hi).unwrap().abs(), 13);
        let s3 = shard_poset(CoxType::A, 3).unwrap();
        assert_eq!(
            s3.mobius(s3.min_index(), s3.max_index().unwrap())
                .unwrap()
                .abs(),
            3
        );
        assert!(s4.mobius(hi, lo).is_err());
    }

    #[test]
    fn mobius_sums_to_zero_on_intervals() {
        let p = shard_poset(CoxType::A, 4).unwrap();
        let lo = p.min_index();
        for v in 0..p.len() {
            if v == lo {
                continue;
            }
            let total: i64 = p
                .interval(lo, v)
                .into_iter()
                .map(|z| p.mobius(lo, z).unwrap())
                .sum();
            assert_eq!(total, 0);
        }
    }

    #[test]
    fn chains_and_interval_counts() {
        let p = shard_poset(CoxType::A, 3).unwrap();
        let (lo, hi) = (p.min_index(), p.max_index().unwrap());
        assert_eq!(p.maximal_chains(lo, lo, 10).unwrap(), vec![vec![lo]]);
        let chains = p.maximal_chains(lo, hi, 1000).unwrap();
        assert_eq!(chains.len(), 4);
        assert!(matches!(
            p.maximal_chains(lo, hi, 2),
            Err(Error::ChainCapExceeded { .. })
        ));
    }

    #[test]
    fn lattice_checks() {
        assert_eq!(
            shard_poset(CoxType::A, 4).unwrap().lattice_check(),
            LatticeCheck::Lattice
        );
        assert_eq!(boolean_cube(3).lattice_check(), LatticeCheck::Lattice);
        // two maximal elements over a shared bottom: no join
        let bowtie = Poset::build(
            vec![0usize, 1, 2, 3],
            vec!["0".into(), "a".into(), "b".into(), "c".into()],
            |&a, &b| a == b || (a == 0 && b > 0) || (a == 1 && b >= 2),
        );
        // 0 < a < b, 0 < a < c: b and c are incomparable maxima
        let bowtie = bowtie.unwrap();
        assert!(matches!(
            bowtie.lattice_check(),
            LatticeCheck::Witness { join: true, .. }
        ));
    }

    #[test]
    fn product_profiles_convolve() {
        let s3 = shard_poset(CoxType::A, 3).unwrap();
        let prod = s3.product(&s3);
        assert_eq!(prod.len(), 36);
        // (1,4,1) * (1,4,1) = (1,8,18,8,1)
        assert_eq!(prod.rank_histogram(), vec![1, 8, 18, 8, 1]);
        let single = chain_poset(1);
        let same = s3.product(&single);
        assert_eq!(same.rank_histogram(), s3.rank_histogram());
        let b1 = boolean_cube(1);
        let b2 = b1.product(&b1);
        assert_eq!(b2.rank_histogram(), vec![1, 2, 1]);
        assert_eq!(b2.lattice_check(), LatticeCheck::Lattice);
    }

    fn fig_sbd_poset(drop_edge: bool) -> Poset<usize> {
        // rank 3 poset with four atoms and four coatoms; `drop_edge`
        // removes b2 > a2 making the bold classes the only candidates
        let mut pairs = vec![
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (9, 5),
            (9, 6),
            (9, 7),
            (1, 5),
            (1, 6),
            (2, 5),
            (2, 7),
            (3, 6),
            (3, 7),
            (3, 8),
            (4, 7),
            (4, 8),
        ];
        if !drop_edge {
            pairs.push((2, 6));
        }
        // indices: 0 bottom, 1-4 atoms, 5-8 coatoms, 9 top; edge list is
        // (lower, upper) except (9, x) which is (upper, lower)
        let mut rel = vec![[false; 10]; 10];
        for i in 0..10 {
            rel[i][i] = true;
        }
        for (a, b) in pairs {
            let (lo, hi) = if a == 9 { (b, a) } else { (a, b) };
            rel[lo][hi] = true;
        }
        // transitive closure
        for m in 0..10 {
            for i in 0..10 {
                if rel[i][m] {
                    for j in 0..10 {
                        if rel[m][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        Poset::build(
            (0..10).collect(),
            (0..10).map(|i| i.to_string()).collect(),
            |&a, &b| rel[a][b],
        )
        .unwrap()
    }

    #[test]
    fn verify_sbd_on_figure_shapes() {
        // bold classes: a B_3 on {0,1,2,3,5,6,7,9} plus the pair {4,8}
        let p = fig_sbd_poset(false);
        let sbd = Sbd {
            classes: vec![
                SbdClass {
                    base: 0,
                    dim: 3,
                    members: vec![0, 1, 2, 3, 5, 6, 7, 9],
                },
                SbdClass {
                    base: 4,
                    dim: 1,
                    members: vec![4, 8],
                },
            ],
        };
        let report = verify_sbd(&p, &sbd);
        assert!(report.ok, "{:?}", report.violations);
        assert_eq!(report.gamma, vec![1, 1]);
        // the extra relation b2 > a2 breaks the iff-embedding but not the
        // decomposition
        assert!(!report.embedding_iff);
    }

    #[test]
    fn sbd_search_finds_and_refutes() {
        let p = fig_sbd_poset(false);
        assert!(matches!(find_sbd(&p, 1_000_000), SbdSearch::Found(_)));
        // rank-3 diamond with doubled middle: gamma_1 = -1, no SBD exists
        let d = Poset::build(
            vec![0usize, 1, 2, 3, 4, 5],
            (0..6).map(|i| i.to_string()).collect(),
            |&a, &b| {
                a == b
                    || a == 0
                    || b == 5
                    || ((a == 1 || a == 2) && (b == 3 || b == 4))
            },
        )
        .unwrap();
        assert_eq!(d.rank_histogram(), vec![1, 2, 2, 1]);
        assert!(matches!(find_sbd(&d, 1_000_000), SbdSearch::None));
    }

    #[test]
    fn single_chain_sbd() {
        let p = chain_poset(2);
        let sbd = Sbd {
            classes: vec![SbdClass {
                base: 0,
                dim: 1,
                members: vec![0, 1],
            }],
        };
        let report = verify_sbd(&p, &sbd);
        assert!(report.ok);
        assert_eq!(report.gamma, vec![1]);
    }

    #[test]
    fn product_sbd_of_cubes() {
        let b1 = boolean_cube(1);
        let sbd1 = Sbd {
            classes: vec![SbdClass {
                base: 0,
                dim: 1,
                members: vec![0, 1],
            }],
        };
        let prod = b1.product(&b1);
        let sbd = product_sbd(&sbd1, &sbd1, b1.len());
        let report = verify_sbd(&prod, &sbd);
        assert!(report.ok, "{:?}", report.violations);
        assert_eq!(sbd.classes.len(), 1);
        assert_eq!(sbd.classes[0].members.len(), 4);
    }

    #[test]
    fn json_and_dot_exports() {
        let p = shard_poset(CoxType::A, 3).unwrap();
        let json = p.to_json("A", 3);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["elements"].as_array().unwrap().len(), 6);
        assert_eq!(parsed["covers"].as_array().unwrap().len(), 8);
        let dot = p.to_dot("s3");
        assert_eq!(dot.matches(" -> ").count(), 8);
        assert_eq!(dot, p.to_dot("s3"));
    }
}
