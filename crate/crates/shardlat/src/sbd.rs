//! Valley hopping on `S_n`, hop classes, the symmetric boolean
//! decomposition of the shard intersection order, and its restriction to
//! the noncrossing partition lattice.
//!
//! A letter is free when it is neither a peak nor a valley under the
//! boundary convention `w(0) = w(n+1) = ∞`. Hopping moves a free letter
//! across the adjacent valley to the nearest slope of the same height;
//! hops commute and square to the identity, so each class is a boolean
//! algebra indexed by subsets of the free letters of its descent-minimal
//! representative.

use crate::elements::{enumerate, CoxType, Element, PermA};
use crate::lattice::{Poset, Sbd, SbdClass};
use crate::preorders::blocks_of;
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

const INF: i32 = i32::MAX;

fn at(word: &[i32], pos: usize) -> i32 {
    // 1-based with ∞ sentinels at 0 and n+1
    if pos == 0 || pos == word.len() + 1 {
        INF
    } else {
        word[pos - 1]
    }
}

/// Letters that are neither peaks nor valleys, ascending.
pub fn free_letters(w: &PermA) -> Vec<i32> {
    let word = w.word();
    let mut out: Vec<i32> = (1..=word.len())
        .filter(|&i| {
            let (p, x, q) = (at(word, i - 1), at(word, i), at(word, i + 1));
            let peak = p < x && x > q;
            let valley = p > x && x < q;
            !peak && !valley
        })
        .map(|i| word[i - 1])
        .collect();
    out.sort_unstable();
    out
}

/// Move the free letter `j` across the adjacent valley.
pub fn hop(w: &PermA, j: i32) -> Result<PermA> {
    let word = w.word();
    let n = word.len();
    let i = 1 + word
        .iter()
        .position(|&x| x == j)
        .ok_or_else(|| Error::Mismatch(format!("no letter {j}")))?;
    let (p, q) = (at(word, i - 1), at(word, i + 1));
    let mut out: Vec<i32> = Vec::with_capacity(n);
    if p > j && j > q {
        // downslope: reinsert to the right, before the next ascent past j
        let k = (i + 1..=n)
            .find(|&k| at(word, k) < j && j < at(word, k + 1))
            .ok_or_else(|| Error::Mismatch(format!("letter {j} is not free")))?;
        out.extend(&word[..i - 1]);
        out.extend(&word[i..k]);
        out.push(j);
        out.extend(&word[k..]);
    } else if p < j && j < q {
        // upslope: reinsert to the left, after the previous descent past j
        let k = (1..i)
            .rev()
            .find(|&k| at(word, k - 1) > j && j > at(word, k))
            .ok_or_else(|| Error::Mismatch(format!("letter {j} is not free")))?;
        out.extend(&word[..k - 1]);
        out.push(j);
        out.extend(&word[k - 1..i - 1]);
        out.extend(&word[i..]);
    } else {
        return Err(Error::Mismatch(format!("letter {j} is not free")));
    }
    PermA::new(out)
}

/// Apply hops for every letter of `set` (hops commute).
pub fn hop_set(w: &PermA, set: &[i32]) -> Result<PermA> {
    let mut out = w.clone();
    for &j in set {
        out = hop(&out, j)?;
    }
    Ok(out)
}

/// A hop-equivalence class: descent-minimal representative, its free
/// letters, and all members indexed by subsets of the free letters.
#[derive(Debug, Clone)]
pub struct HopClass {
    pub rep: PermA,
    pub free: Vec<i32>,
    /// `members[mask]` applies the hops for the letters selected by `mask`
    /// (bit `b` = `free[b]`); `members[0]` is the representative.
    pub members: Vec<PermA>,
}

/// The hop class of any permutation.
pub fn hop_class(w: &PermA) -> Result<HopClass> {
    // the representative hops every downslope letter to an upslope
    let word = w.word();
    let down: Vec<i32> = (1..=word.len())
        .filter(|&i| at(word, i - 1) > at(word, i) && at(word, i) > at(word, i + 1))
        .map(|i| word[i - 1])
        .collect();
    let rep = hop_set(w, &down)?;
    let free = free_letters(&rep);
    let mut members = Vec::with_capacity(1 << free.len());
    for mask in 0usize..1 << free.len() {
        let set: Vec<i32> = free
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &j)| j)
            .collect();
        members.push(hop_set(&rep, &set)?);
    }
    Ok(HopClass { rep, free, members })
}

/// All hop classes of `S_n`, ordered by representative word.
pub fn hop_classes(n: usize) -> Result<Vec<HopClass>> {
    let mut classes = Vec::new();
    for e in enumerate(CoxType::A, n)? {
        let Element::A(w) = e else { unreachable!() };
        let class = hop_class(&w)?;
        if class.rep == w {
            classes.push(class);
        }
    }
    Ok(classes)
}

/// `gamma[j]` = number of hop classes with `n - 1 - 2j` free letters. The
/// identity `Σ_w t^{d(w)} = Σ_j gamma[j] t^j (1+t)^{n-1-2j}` holds exactly.
pub fn gamma_vector(n: usize) -> Result<Vec<u64>> {
    let mut gamma = vec![0u64; (n + 1) / 2];
    if n == 0 {
        return Ok(gamma);
    }
    for class in hop_classes(n)? {
        let j = (n - 1 - class.free.len()) / 2;
        gamma[j] += 1;
    }
    Ok(gamma)
}

/// The decomposition of `(S_n, ≤)` into hop classes, as indices of a built
/// shard poset of type A.
pub fn sbd_of_symmetric_group(poset: &Poset<Element>) -> Result<Sbd> {
    let index: HashMap<&Element, usize> = poset
        .elements()
        .iter()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    let n = poset.element(0).n();
    let classes = hop_classes(n)?
        .into_iter()
        .map(|c| {
            let members: Vec<usize> = c
                .members
                .iter()
                .map(|m| index[&Element::A(m.clone())])
                .collect();
            SbdClass {
                base: members[0],
                dim: c.free.len(),
                members,
            }
        })
        .collect();
    Ok(Sbd { classes })
}

/// No indices `i < j < k` with `w(k) < w(i) < w(j)`.
pub fn is_231_avoiding(w: &PermA) -> bool {
    let word = w.word();
    let n = word.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if word[j] <= word[i] {
                continue;
            }
            for k in (j + 1)..n {
                if word[k] < word[i] {
                    return false;
                }
            }
        }
    }
    true
}

/// A noncrossing partition of `{1..n}`: blocks ascending, ordered by
/// minimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NoncrossingPartition {
    n: usize,
    blocks: Vec<Vec<i32>>,
}

impl NoncrossingPartition {
    pub fn new(n: usize, mut blocks: Vec<Vec<i32>>) -> Result<Self> {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        let mut seen = vec![false; n + 1];
        for b in &blocks {
            for &x in b {
                if x < 1 || x as usize > n || seen[x as usize] {
                    return Err(Error::Malformed(format!("bad partition of 1..{n}")));
                }
                seen[x as usize] = true;
            }
        }
        if seen[1..].iter().any(|&s| !s) {
            return Err(Error::Malformed("partition misses letters".into()));
        }
        let p = NoncrossingPartition { n, blocks };
        match p.crossing_witness() {
            None => Ok(p),
            Some((a, b, c, d)) => Err(Error::Malformed(format!(
                "crossing pairs ({a},{c}) and ({b},{d})"
            ))),
        }
    }

    fn crossing_witness(&self) -> Option<(i32, i32, i32, i32)> {
        for (bi, b1) in self.blocks.iter().enumerate() {
            for b2 in &self.blocks[bi + 1..] {
                for i in 0..b1.len() {
                    for &a in &b1[i + 1..] {
                        let a0 = b1[i];
                        for j in 0..b2.len() {
                            for &c in &b2[j + 1..] {
                                let c0 = b2[j];
                                // a0 < c0 < a < c or c0 < a0 < c < a
                                if a0 < c0 && c0 < a && a < c {
                                    return Some((a0, c0, a, c));
                                }
                                if c0 < a0 && a0 < c && c < a {
                                    return Some((c0, a0, c, a));
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<i32>] {
        &self.blocks
    }

    /// Rank in the refinement lattice: `n - #blocks`, matching the descent
    /// count of the permutation whose runs are the blocks.
    pub fn rank(&self) -> usize {
        self.n - self.blocks.len()
    }

    /// Does every block of `self` sit inside a block of `other`?
    pub fn refines(&self, other: &NoncrossingPartition) -> bool {
        if self.n != other.n {
            return false;
        }
        let mut owner = vec![0usize; self.n + 1];
        for (bi, b) in other.blocks.iter().enumerate() {
            for &x in b {
                owner[x as usize] = bi;
            }
        }
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&x| owner[x as usize] == owner[b[0] as usize]))
    }
}

impl fmt::Display for NoncrossingPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            for (k, x) in b.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

/// Decreasing runs of a 231-avoiding permutation, as a noncrossing
/// partition.
pub fn phi(w: &PermA) -> Result<NoncrossingPartition> {
    if !is_231_avoiding(w) {
        return Err(Error::Malformed(format!(
            "{:?} contains the pattern 231",
            w.word()
        )));
    }
    let p = blocks_of(&Element::A(w.clone()));
    NoncrossingPartition::new(w.n(), p.blocks.into_iter().map(|b| b.letters).collect())
}

/// Blocks listed decreasingly, ordered by minima.
pub fn phi_inv(p: &NoncrossingPartition) -> Result<PermA> {
    let mut word = Vec::with_capacity(p.n);
    for b in &p.blocks {
        word.extend(b.iter().rev());
    }
    let w = PermA::new(word)?;
    debug_assert!(is_231_avoiding(&w));
    Ok(w)
}

/// All noncrossing partitions of `{1..n}`, sorted.
pub fn enumerate_nc(n: usize) -> Vec<NoncrossingPartition> {
    // restricted-growth enumeration of set partitions, filtered
    let mut out = Vec::new();
    let mut assign = vec![0usize; n];
    fn rec(n: usize, i: usize, max: usize, assign: &mut Vec<usize>, out: &mut Vec<Vec<Vec<i32>>>) {
        if i == n {
            let blocks_count = max;
            let mut blocks: Vec<Vec<i32>> = vec![Vec::new(); blocks_count];
            for (pos, &b) in assign.iter().enumerate() {
                blocks[b].push(pos as i32 + 1);
            }
            out.push(blocks);
            return;
        }
        for b in 0..=max {
            assign[i] = b;
            rec(n, i + 1, max.max(b + 1), assign, out);
        }
    }
    let mut raw = Vec::new();
    if n > 0 {
        rec(n, 0, 0, &mut assign, &mut raw);
    }
    for blocks in raw {
        if let Ok(p) = NoncrossingPartition::new(n, blocks) {
            out.push(p);
        }
    }
    out.sort();
    out
}

/// The refinement lattice `NC(n)`, built independently of the shard order.
pub fn nc_poset(n: usize) -> Result<Poset<NoncrossingPartition>> {
    let parts = enumerate_nc(n);
    let display = parts.iter().map(|p| p.to_string()).collect();
    Poset::build(parts, display, |a, b| a.refines(b))
}

/// The restriction of the hop-class decomposition to `NC(n)`, as classes of
/// the refinement poset. Classes whose representative avoids 231 stay
/// entirely inside the avoiders; their φ-images tile `NC(n)`.
pub fn sbd_of_nc(n: usize, nc: &Poset<NoncrossingPartition>) -> Result<Sbd> {
    let index: HashMap<&NoncrossingPartition, usize> = nc
        .elements()
        .iter()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    let mut classes = Vec::new();
    for class in hop_classes(n)? {
        if !is_231_avoiding(&class.rep) {
            continue;
        }
        let members = class
            .members
            .iter()
            .map(|m| {
                let img = phi(m)?;
                index
                    .get(&img)
                    .copied()
                    .ok_or_else(|| Error::Malformed(format!("{img} missing from NC({n})")))
            })
            .collect::<Result<Vec<usize>>>()?;
        classes.push(SbdClass {
            base: members[0],
            dim: class.free.len(),
            members,
        });
    }
    Ok(Sbd { classes })
}

/// Report for the noncrossing restriction checks.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NcReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Check Prop. "sub" at one degree: hop classes are 231-closed, φ is an
/// order isomorphism onto the refinement lattice, and the induced subposet
/// is closed under ambient joins and meets.
pub fn verify_nc_sublattice(n: usize, shard: &Poset<Element>) -> Result<NcReport> {
    let mut violations = Vec::new();

    // hop classes never mix avoiders with non-avoiders
    for class in hop_classes(n)? {
        let statuses: BTreeSet<bool> = class.members.iter().map(is_231_avoiding).collect();
        if statuses.len() != 1 {
            violations.push(format!(
                "hop class of {:?} mixes avoiders and non-avoiders",
                class.rep.word()
            ));
        }
    }

    let avoiders: Vec<usize> = (0..shard.len())
        .filter(|&i| {
            let Element::A(w) = shard.element(i) else {
                unreachable!()
            };
            is_231_avoiding(w)
        })
        .collect();
    let images: HashMap<usize, NoncrossingPartition> = avoiders
        .iter()
        .map(|&i| {
            let Element::A(w) = shard.element(i) else {
                unreachable!()
            };
            Ok((i, phi(w)?))
        })
        .collect::<Result<_>>()?;

    // order isomorphism with refinement, and rank law
    for &i in &avoiders {
        if shard.rank(i) != images[&i].rank() {
            violations.push(format!("rank law fails at {}", shard.display(i)));
        }
        for &j in &avoiders {
            if shard.leq(i, j) != images[&i].refines(&images[&j]) {
                violations.push(format!(
                    "phi is not an order isomorphism at ({}, {})",
                    shard.display(i),
                    shard.display(j)
                ));
            }
        }
    }

    // sublattice: ambient joins and meets of avoiders stay avoiders
    for (ai, &i) in avoiders.iter().enumerate() {
        for &j in &avoiders[ai..] {
            for z in [shard.join(i, j), shard.meet(i, j)] {
                match z {
                    Some(z) => {
                        let Element::A(w) = shard.element(z) else {
                            unreachable!()
                        };
                        if !is_231_avoiding(w) {
                            violations.push(format!(
                                "bound of {} and {} leaves the avoiders",
                                shard.display(i),
                                shard.display(j)
                            ));
                        }
                    }
                    None => violations.push(format!(
                        "no bound for {} and {}",
                        shard.display(i),
                        shard.display(j)
                    )),
                }
            }
        }
    }

    Ok(NcReport {
        ok: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{shard_poset, verify_sbd};

    fn pa(s: &str) -> PermA {
        match Element::parse(CoxType::A, s).unwrap() {
            Element::A(w) => w,
            _ => unreachable!(),
        }
    }

    #[test]
    fn free_letters_examples() {
        let mut expect = vec![8, 6, 4, 3, 5, 9];
        expect.sort_unstable();
        assert_eq!(free_letters(&pa("862741359")), expect);
        // identity: everything but the single valley 1
        assert_eq!(free_letters(&PermA::identity(5)), vec![2, 3, 4, 5]);
        assert_eq!(free_letters(&pa("213")), vec![2, 3]);
        // 231: 2 and 1 are valleys, 3 is a peak
        assert_eq!(free_letters(&pa("231")), Vec::<i32>::new());
    }

    #[test]
    fn hop_is_an_involution_and_commutes() {
        for n in 1..=6usize {
            for e in enumerate(CoxType::A, n).unwrap() {
                let Element::A(w) = e else { unreachable!() };
                let free = free_letters(&w);
                for &j in &free {
                    let h = hop(&w, j).unwrap();
                    assert_eq!(hop(&h, j).unwrap(), w, "H_{j} not an involution");
                    assert_eq!(free_letters(&h), free, "free letters change");
                    for &l in &free {
                        if l != j {
                            assert_eq!(
                                hop(&hop(&w, j).unwrap(), l).unwrap(),
                                hop(&hop(&w, l).unwrap(), j).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hop_class_of_identity_4() {
        let class = hop_class(&PermA::identity(4)).unwrap();
        let words: BTreeSet<String> = class
            .members
            .iter()
            .map(|m| blocks_of(&Element::A(m.clone())).to_string())
            .collect();
        let expect: BTreeSet<String> = [
            "1|2|3|4", "21|3|4", "31|2|4", "41|2|3", "321|4", "421|3", "431|2", "4321",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        assert_eq!(words, expect);
    }

    #[test]
    fn classes_partition_and_have_boolean_sizes() {
        for n in 1..=7usize {
            let classes = hop_classes(n).unwrap();
            let mut all: Vec<PermA> = Vec::new();
            for c in &classes {
                // size 2^{n-1-2r} with r peaks of the representative
                let word = c.rep.word();
                let peaks = (1..=n)
                    .filter(|&i| at(word, i - 1) < at(word, i) && at(word, i) > at(word, i + 1))
                    .count();
                assert_eq!(c.members.len(), 1 << (n - 1 - 2 * peaks));
                assert_eq!(c.free.len(), n - 1 - 2 * peaks);
                for (mask, m) in c.members.iter().enumerate() {
                    assert_eq!(
                        m.descents(),
                        c.rep.descents() + (mask as u32).count_ones() as usize
                    );
                }
                all.extend(c.members.iter().cloned());
            }
            all.sort();
            all.dedup();
            assert_eq!(all.len(), enumerate(CoxType::A, n).unwrap().len());
        }
    }

    #[test]
    fn gamma_identity_holds() {
        for n in 1..=8usize {
            let gamma = gamma_vector(n).unwrap();
            let hist = crate::elements::descent_histogram(CoxType::A, n).unwrap();
            let mut poly = vec![0i64; n];
            for (j, &g) in gamma.iter().enumerate() {
                let m = n - 1 - 2 * j;
                let mut row = vec![1i64];
                for _ in 0..m {
                    let mut next = vec![1i64];
                    for w in row.windows(2) {
                        next.push(w[0] + w[1]);
                    }
                    next.push(1);
                    row = next;
                }
                for (i, c) in row.into_iter().enumerate() {
                    poly[j + i] += g as i64 * c;
                }
            }
            assert_eq!(
                poly,
                hist.iter().map(|&h| h as i64).collect::<Vec<_>>(),
                "gamma identity fails at n = {n}"
            );
        }
        assert_eq!(gamma_vector(4).unwrap(), vec![1, 8]);
    }

    #[test]
    fn sbd_of_s4_verifies() {
        let p = shard_poset(CoxType::A, 4).unwrap();
        let sbd = sbd_of_symmetric_group(&p).unwrap();
        assert_eq!(sbd.classes.len(), 9);
        let report = verify_sbd(&p, &sbd);
        assert!(report.ok, "{:?}", report.violations);
        assert!(report.embedding_iff);
        assert_eq!(report.gamma, vec![1, 8]);
    }

    #[test]
    fn subset_order_embeds_iff() {
        // Lemma "boole", both directions, via the verifier's iff flag
        for n in 1..=6usize {
            let p = shard_poset(CoxType::A, n).unwrap();
            let sbd = sbd_of_symmetric_group(&p).unwrap();
            let report = verify_sbd(&p, &sbd);
            assert!(report.ok && report.embedding_iff, "n = {n}");
        }
    }

    #[test]
    fn avoiding_examples() {
        assert!(is_231_avoiding(&pa("51243")));
        assert!(!is_231_avoiding(&pa("31524")));
        assert!(is_231_avoiding(&PermA::identity(6)));
    }

    #[test]
    fn phi_worked_examples() {
        let img = phi(&pa("421376598")).unwrap();
        assert_eq!(img.to_string(), "1,2,4|3|5,6,7|8,9");
        let p = NoncrossingPartition::new(
            9,
            vec![vec![1, 7, 9], vec![2, 3], vec![4, 6], vec![5], vec![8]],
        )
        .unwrap();
        assert_eq!(phi_inv(&p).unwrap().word(), &[9, 7, 1, 3, 2, 6, 4, 5, 8]);
        let id = phi(&PermA::identity(4)).unwrap();
        assert_eq!(id.blocks().len(), 4);
    }

    #[test]
    fn phi_roundtrip() {
        for n in 1..=7usize {
            for p in enumerate_nc(n) {
                assert_eq!(phi(&phi_inv(&p).unwrap()).unwrap(), p);
            }
        }
    }

    #[test]
    fn crossing_detection() {
        assert!(NoncrossingPartition::new(5, vec![vec![1, 5], vec![2], vec![3, 4]]).is_ok());
        assert!(NoncrossingPartition::new(5, vec![vec![1, 3], vec![2, 5], vec![4]]).is_err());
    }

    #[test]
    fn nc_counts_are_catalan() {
        // 1, 2, 5, 14, 42, 132
        for (n, catalan) in [(2, 2), (3, 5), (4, 14), (5, 42), (6, 132)] {
            assert_eq!(enumerate_nc(n).len(), catalan);
        }
    }

    #[test]
    fn nc4_poset_profile_and_sbd() {
        let nc = nc_poset(4).unwrap();
        assert_eq!(nc.rank_histogram(), vec![1, 6, 6, 1]);
        let sbd = sbd_of_nc(4, &nc).unwrap();
        let report = verify_sbd(&nc, &sbd);
        assert!(report.ok, "{:?}", report.violations);
        assert_eq!(report.gamma, vec![1, 3]);
    }

    #[test]
    fn nc_sublattice_small() {
        for n in 2..=5usize {
            let shard = shard_poset(CoxType::A, n).unwrap();
            let report = verify_nc_sublattice(n, &shard).unwrap();
            assert!(report.ok, "n = {n}: {:?}", report.violations.first());
        }
    }

    #[test]
    fn maximal_class_differs_from_simion_ullman() {
        // our maximal boolean class of NC(4)
        let class = hop_class(&PermA::identity(4)).unwrap();
        let ours: BTreeSet<String> = class
            .members
            .iter()
            .map(|m| phi(m).unwrap().to_string())
            .collect();
        let expected: BTreeSet<String> = [
            "1|2|3|4",
            "1,2|3|4",
            "1,3|2|4",
            "1,4|2|3",
            "1,2,3|4",
            "1,2,4|3",
            "1,3,4|2",
            "1,2,3,4",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        assert_eq!(ours, expected);
        let simion_ullman: BTreeSet<String> = [
            "1|2|3|4",
            "1,2|3|4",
            "1|2,3|4",
            "1|2|3,4",
            "1,2,3|4",
            "1,2|3,4",
            "1|2,3,4",
            "1,2,3,4",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        assert_ne!(ours, simion_ullman);
    }
}
