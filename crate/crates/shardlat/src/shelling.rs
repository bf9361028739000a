//! EL-labelings of the shard intersection orders and their mechanical
//! verification: unique weakly rising chains, lexicographic minimality, and
//! Möbius/falling-chain duality.
//!
//! Covers are labeled by the position of the merged pair of blocks. In type
//! A this is the 1-based index of the rightmost merged block; in type B the
//! larger absolute block index; in type D a merge across the center
//! ("negative" merge) is pushed past all positive positions by adding the
//! corank of the lower element.

use crate::elements::{CoxType, Element};
use crate::lattice::Poset;
use crate::par;
use crate::preorders::{blocks_of, is_cover, BlockPreorder, Center};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;

/// A pair of blocks of `u` whose union lies in a single block of `v`,
/// normalized so the mirror pair is reported once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MergingPair {
    pub lo: isize,
    pub hi: isize,
    pub position: usize,
}

fn canonical_pair(a: isize, b: isize) -> (isize, isize) {
    debug_assert_ne!(a, b);
    // mirror so the index of largest absolute value is positive, then order
    // by absolute value
    let heavy = if a.abs() >= b.abs() { a } else { b };
    let (a, b) = if heavy < 0 { (-a, -b) } else { (a, b) };
    if a.abs() > b.abs() || (a.abs() == b.abs() && a > b) {
        (b, a)
    } else {
        (a, b)
    }
}

fn pair_position(ctype: CoxType, lo: isize, hi: isize, corank: usize) -> usize {
    match ctype {
        CoxType::A | CoxType::B => hi as usize,
        CoxType::D => {
            if lo < 0 {
                hi as usize + corank
            } else {
                hi as usize
            }
        }
    }
}

/// All merging pairs of `u` with respect to `v ≥ u`.
pub fn merging_pairs(u: &Element, v: &Element) -> Result<Vec<MergingPair>> {
    if !crate::preorders::leq(u, v)? {
        return Err(Error::NotComparable(format!("{u} is not below {v}")));
    }
    let (pu, pv) = (blocks_of(u), blocks_of(v));
    Ok(merging_pairs_pre(&pu, &pv))
}

pub(crate) fn merging_pairs_pre(pu: &BlockPreorder, pv: &BlockPreorder) -> Vec<MergingPair> {
    let vsets: Vec<std::collections::BTreeSet<i32>> = pv
        .blocks
        .iter()
        .map(|b| b.letters.iter().copied().collect())
        .collect();
    let is_surviving = |b: &crate::preorders::Block| {
        let set: std::collections::BTreeSet<i32> = b.letters.iter().copied().collect();
        vsets.contains(&set)
    };
    let merging: Vec<usize> = (0..pu.blocks.len())
        .filter(|&p| !is_surviving(&pu.blocks[p]))
        .collect();
    let has_zero_block = matches!(pu.center, Center::Zero(_));
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (ai, &p) in merging.iter().enumerate() {
        for &q in &merging[ai + 1..] {
            let vp = pv.block_of_letter(pu.blocks[p].letters[0]);
            let vq = pv.block_of_letter(pu.blocks[q].letters[0]);
            if vp != vq {
                continue;
            }
            let (mut lo, hi) = canonical_pair(pu.paper_index(p), pu.paper_index(q));
            if lo == -hi && has_zero_block {
                // the symmetric pair drags the zero block along; identify
                // with the (0, hi) merge
                lo = 0;
            }
            if seen.insert((lo, hi)) {
                out.push(MergingPair {
                    lo,
                    hi,
                    position: pair_position(pu.ctype, lo, hi, pu.corank()),
                });
            }
        }
    }
    out.sort();
    out
}

/// Label of a cover `u ⋖ w`: the position of the unique merged pair.
pub fn edge_label(u: &Element, w: &Element) -> Result<u64> {
    if !is_cover(u, w)? {
        return Err(Error::NotComparable(format!("{w} does not cover {u}")));
    }
    edge_label_pre(&blocks_of(u), &blocks_of(w))
}

pub(crate) fn edge_label_pre(pu: &BlockPreorder, pw: &BlockPreorder) -> Result<u64> {
    let usets: Vec<std::collections::BTreeSet<i32>> = pu
        .blocks
        .iter()
        .map(|b| b.letters.iter().copied().collect())
        .collect();
    // blocks of w that are not blocks of u, with the u-blocks inside them
    let mut merges: Vec<Vec<isize>> = Vec::new();
    for wb in &pw.blocks {
        let set: std::collections::BTreeSet<i32> = wb.letters.iter().copied().collect();
        if usets.contains(&set) {
            continue;
        }
        let mut inside = Vec::new();
        for (p, uset) in usets.iter().enumerate() {
            if uset.is_subset(&set) {
                inside.push(pu.paper_index(p));
            }
        }
        merges.push(inside);
    }
    let corank = pu.corank();
    let label = match (pu.ctype, merges.as_slice()) {
        // one new block from exactly two old ones
        (CoxType::A, [pair]) if pair.len() == 2 => {
            pair_position(CoxType::A, pair[0].min(pair[1]), pair[0].max(pair[1]), 0)
        }
        // mirror pair of new blocks
        (CoxType::B | CoxType::D, [m1, m2]) if m1.len() == 2 && m2.len() == 2 => {
            let (lo, hi) = canonical_pair(m1[0], m1[1]);
            pair_position(pu.ctype, lo, hi, corank)
        }
        // single self-symmetric new block
        (CoxType::B | CoxType::D, [m]) => {
            let hi = m.iter().map(|i| i.abs()).max().unwrap();
            let zero_involved = m.contains(&0);
            match (m.len(), zero_involved) {
                // d_{-j} ∪ d_0 ∪ d_j: a positive merge at position j
                (3, true) => pair_position(pu.ctype, 0, hi, corank),
                // forked pair or cross-center merge: negative
                (2, false) | (4, false) => pair_position(pu.ctype, -1, hi, corank),
                _ => {
                    return Err(Error::Mismatch(format!(
                        "cover merges {} blocks into the center",
                        m.len()
                    )))
                }
            }
        }
        _ => {
            return Err(Error::Mismatch(format!(
                "cover produces {} merged groups",
                merges.len()
            )))
        }
    };
    Ok(label as u64)
}

/// Per-interval verification data.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalData {
    pub lo: usize,
    pub hi: usize,
    pub rising_count: u64,
    pub rising_labels: Vec<u64>,
    pub lex_min_labels: Vec<u64>,
    pub lex_min_multiplicity: u64,
    pub falling: u64,
    pub mobius: i64,
}

/// Aggregate verification report.
#[derive(Debug, Clone, Serialize)]
pub struct ElReport {
    pub ok: bool,
    pub intervals: u64,
    pub violations: Vec<String>,
    /// Labels of the unique rising chain of `[0̂, 1̂]`, when the poset is
    /// bounded and verification succeeded there.
    pub bottom_top_labels: Option<Vec<u64>>,
}

/// A shard poset together with its cover labeling.
pub struct Shelling<'a> {
    poset: &'a Poset<Element>,
    pres: Vec<BlockPreorder>,
    /// labels[u][k] labels the cover u ⋖ covers_up(u)[k]
    labels: Vec<Vec<u64>>,
}

impl<'a> Shelling<'a> {
    pub fn new(poset: &'a Poset<Element>) -> Result<Shelling<'a>> {
        let pres: Vec<BlockPreorder> = par::map_slice(poset.elements(), blocks_of);
        let labels: Vec<Vec<u64>> = par::map_indexed(poset.len(), |u| {
            poset
                .covers_up(u)
                .iter()
                .map(|&w| edge_label_pre(&pres[u], &pres[w as usize]))
                .collect::<Result<Vec<u64>>>()
        })
        .into_iter()
        .collect::<Result<_>>()?;
        Ok(Shelling {
            poset,
            pres,
            labels,
        })
    }

    pub fn label(&self, u: usize, w: usize) -> Option<u64> {
        self.poset
            .covers_up(u)
            .iter()
            .position(|&x| x as usize == w)
            .map(|k| self.labels[u][k])
    }

    fn interval_covers(&self, z: usize, hi: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.poset
            .covers_up(z)
            .iter()
            .zip(&self.labels[z])
            .filter(move |(&w, _)| self.poset.leq(w as usize, hi))
            .map(|(&w, &l)| (w as usize, l))
    }

    fn count_rising(&self, z: usize, hi: usize, last: u64, first: &mut Vec<u64>, cap: u64) -> u64 {
        if z == hi {
            return 1;
        }
        let mut total = 0;
        for (w, l) in self.interval_covers(z, hi) {
            if l < last {
                continue;
            }
            if total == 0 {
                first.push(l);
            }
            let sub = self.count_rising(w, hi, l, first, cap - total);
            if sub == 0 && total == 0 {
                first.pop();
            }
            total += sub;
            if total >= cap {
                break;
            }
        }
        total
    }

    fn count_falling(&self, z: usize, hi: usize, last: u64) -> u64 {
        if z == hi {
            return 1;
        }
        let mut total = 0;
        for (w, l) in self.interval_covers(z, hi) {
            if l >= last {
                continue;
            }
            total += self.count_falling(w, hi, l);
        }
        total
    }

    fn lex_min(
        &self,
        z: usize,
        hi: usize,
        memo: &mut HashMap<usize, (Vec<u64>, u64)>,
    ) -> (Vec<u64>, u64) {
        if z == hi {
            return (Vec::new(), 1);
        }
        if let Some(v) = memo.get(&z) {
            return v.clone();
        }
        let mut best: Option<(Vec<u64>, u64)> = None;
        for (w, l) in self.interval_covers(z, hi) {
            let (suffix, mult) = self.lex_min(w, hi, memo);
            let mut cand = Vec::with_capacity(suffix.len() + 1);
            cand.push(l);
            cand.extend(&suffix);
            match &mut best {
                None => best = Some((cand, mult)),
                Some((b, m)) => match cand.cmp(b) {
                    std::cmp::Ordering::Less => best = Some((cand, mult)),
                    std::cmp::Ordering::Equal => *m += mult,
                    std::cmp::Ordering::Greater => {}
                },
            }
        }
        let out = best.expect("nonempty interval");
        memo.insert(z, out.clone());
        out
    }

    /// Verify one interval and return its data.
    pub fn interval_data(&self, lo: usize, hi: usize) -> Result<IntervalData> {
        if !self.poset.leq(lo, hi) {
            return Err(Error::NotComparable(format!(
                "{} is not below {}",
                self.poset.display(lo),
                self.poset.display(hi)
            )));
        }
        let mut rising_labels = Vec::new();
        let rising_count = self.count_rising(lo, hi, 0, &mut rising_labels, u64::MAX);
        let falling = self.count_falling(lo, hi, u64::MAX);
        let mut memo = HashMap::new();
        let (lex_min_labels, lex_min_multiplicity) = self.lex_min(lo, hi, &mut memo);
        let mobius = self.poset.mobius(lo, hi)?;
        Ok(IntervalData {
            lo,
            hi,
            rising_count,
            rising_labels,
            lex_min_labels,
            lex_min_multiplicity,
            falling,
            mobius,
        })
    }

    /// Number of maximal chains of `[lo, hi]` with strictly decreasing
    /// labels.
    pub fn falling_chains(&self, lo: usize, hi: usize) -> Result<u64> {
        if !self.poset.leq(lo, hi) {
            return Err(Error::NotComparable(format!(
                "{} is not below {}",
                self.poset.display(lo),
                self.poset.display(hi)
            )));
        }
        Ok(self.count_falling(lo, hi, u64::MAX))
    }

    fn check_interval(&self, lo: usize, hi: usize) -> Vec<String> {
        let mut violations = Vec::new();
        let d = match self.interval_data(lo, hi) {
            Ok(d) => d,
            Err(e) => return vec![format!("interval error: {e}")],
        };
        let name = format!(
            "[{}, {}]",
            self.poset.display(lo),
            self.poset.display(hi)
        );
        if d.rising_count != 1 {
            violations.push(format!("{name}: {} rising chains", d.rising_count));
        }
        if d.rising_labels != d.lex_min_labels {
            violations.push(format!(
                "{name}: rising chain {:?} is not lex-first {:?}",
                d.rising_labels, d.lex_min_labels
            ));
        }
        if d.lex_min_multiplicity != 1 {
            violations.push(format!(
                "{name}: lex-first chain realized {} times",
                d.lex_min_multiplicity
            ));
        }
        if d.falling != d.mobius.unsigned_abs() {
            violations.push(format!(
                "{name}: {} falling chains vs |mu| = {}",
                d.falling,
                d.mobius.unsigned_abs()
            ));
        }
        if lo != hi {
            // the greedy law: the minimal merging-pair position is realized
            // by a cover, uniquely
            let pairs = merging_pairs_pre(&self.pres[lo], &self.pres[hi]);
            let min_pair = pairs.iter().map(|p| p.position as u64).min();
            let cover_labels: Vec<u64> =
                self.interval_covers(lo, hi).map(|(_, l)| l).collect();
            let min_label = cover_labels.iter().copied().min();
            if min_pair != min_label {
                violations.push(format!(
                    "{name}: minimal pair position {min_pair:?} vs minimal cover label {min_label:?}"
                ));
            }
            if let Some(ml) = min_label {
                if cover_labels.iter().filter(|&&l| l == ml).count() != 1 {
                    violations.push(format!("{name}: minimal cover label {ml} not unique"));
                }
            }
        }
        violations
    }

    /// Verify the EL property on every interval.
    pub fn verify(&self) -> ElReport {
        let n = self.poset.len();
        let per_lo: Vec<(u64, Vec<String>)> = par::map_indexed(n, |lo| {
            let mut count = 0;
            let mut violations = Vec::new();
            for hi in 0..n {
                if self.poset.leq(lo, hi) {
                    count += 1;
                    violations.extend(self.check_interval(lo, hi));
                }
            }
            (count, violations)
        });
        let intervals = per_lo.iter().map(|(c, _)| c).sum();
        let violations: Vec<String> = per_lo.into_iter().flat_map(|(_, v)| v).collect();
        let bottom_top_labels = self.poset.max_index().and_then(|top| {
            self.interval_data(self.poset.min_index(), top)
                .ok()
                .map(|d| d.rising_labels)
        });
        ElReport {
            ok: violations.is_empty(),
            intervals,
            violations,
            bottom_top_labels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::shard_poset;

    fn a(s: &str) -> Element {
        Element::parse(CoxType::A, s).unwrap()
    }
    fn b(s: &str) -> Element {
        Element::parse(CoxType::B, s).unwrap()
    }
    fn d(s: &str) -> Element {
        Element::parse(CoxType::D, s).unwrap()
    }

    #[test]
    fn merging_pairs_worked_example_a() {
        let u = a("31246785");
        let v = a("76854312");
        assert_eq!(blocks_of(&v).to_string(), "76|85431|2");
        let mut positions: Vec<usize> = merging_pairs(&u, &v)
            .unwrap()
            .iter()
            .map(|p| p.position)
            .collect();
        positions.sort_unstable();
        assert_eq!(positions, vec![3, 5, 6, 6]);
        assert!(merging_pairs(&u, &u).unwrap().is_empty());
    }

    #[test]
    fn merging_pairs_worked_example_b() {
        let u = b("-1,2,3,5,4");
        let v = b("-1,3,2,-4,-5");
        assert_eq!(blocks_of(&v).to_string(), "5,4,-2,-3|1,0,-1|3,2,-4,-5");
        let mut positions: Vec<usize> = merging_pairs(&u, &v)
            .unwrap()
            .iter()
            .map(|p| p.position)
            .collect();
        positions.sort_unstable();
        assert_eq!(positions, vec![2, 3, 3]);
    }

    #[test]
    fn edge_labels_worked_examples() {
        assert_eq!(edge_label(&a("31246785"), &a("31247685")).unwrap(), 5);
        // B cover from the signed example: merged pair (d_{-1}, d_3)
        assert_eq!(edge_label(&b("-1,2,3,5,4"), &b("-1,2,-4,-5,3")).unwrap(), 3);
        // D positive merge labeled 3, negative merge labeled 2 + |u| = 5
        let u = d("±5,-4,-1,-3,2");
        let pos = d("±5,2,-4,-1,-3");
        assert_eq!(edge_label(&u, &pos).unwrap(), 3);
        let neg = d("±4,-1,-3,-5,2");
        assert_eq!(edge_label(&u, &neg).unwrap(), 5);
    }

    #[test]
    fn el_property_s4() {
        let p = shard_poset(CoxType::A, 4).unwrap();
        let sh = Shelling::new(&p).unwrap();
        let report = sh.verify();
        assert!(report.ok, "{:?}", report.violations);
        let top = p.max_index().unwrap();
        assert_eq!(
            sh.falling_chains(p.min_index(), top).unwrap(),
            p.mobius(p.min_index(), top).unwrap().unsigned_abs()
        );
    }

    #[test]
    fn el_property_b2_and_d3() {
        for (t, n) in [(CoxType::B, 2), (CoxType::D, 3)] {
            let p = shard_poset(t, n).unwrap();
            let report = Shelling::new(&p).unwrap().verify();
            assert!(report.ok, "type {t}: {:?}", report.violations);
        }
    }

    #[test]
    fn d4_bottom_top_rising_chain_labels() {
        let p = shard_poset(CoxType::D, 4).unwrap();
        let report = Shelling::new(&p).unwrap().verify();
        assert!(report.ok, "{:?}", report.violations.first());
        assert_eq!(report.bottom_top_labels, Some(vec![2, 2, 2, 2]));
    }

    #[test]
    fn falling_chain_counts_match_a003319() {
        let s3 = shard_poset(CoxType::A, 3).unwrap();
        let sh = Shelling::new(&s3).unwrap();
        assert_eq!(
            sh.falling_chains(s3.min_index(), s3.max_index().unwrap())
                .unwrap(),
            3
        );
        let s4 = shard_poset(CoxType::A, 4).unwrap();
        let sh = Shelling::new(&s4).unwrap();
        assert_eq!(
            sh.falling_chains(s4.min_index(), s4.max_index().unwrap())
                .unwrap(),
            13
        );
    }
}
