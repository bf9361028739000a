//! Shard enumeration from the cutting-relation case analysis, the bijection
//! with one-descent elements, and decomposition of cones into shards.
//!
//! A shard lives on a hyperplane `x_i = x_j` (or `x_i = -x_j`) and is carved
//! out by one sign choice per cutting index. The case analysis is hard-coded
//! per type; validity of a descriptor is enforced constructively and
//! double-checked by the collapse test in [`shard_to_element`].

use crate::cones::{close_system, cone_contains, ConeSystem};
use crate::elements::{CoxType, Element};
use crate::preorders::{blocks_of, read_off_word};
use crate::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Defining hyperplane of a shard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hyperplane {
    /// `x_i = x_j`, `0 ≤ i < j`; `i = 0` (type B) means `x_j = 0`.
    Diff(i32, i32),
    /// `x_i = -x_j`, `1 ≤ i < j`.
    Sum(i32, i32),
}

/// Sign choice for one cutting index, relative to the equality class `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SideChoice {
    /// `x_k ≤ E`
    KBelow,
    /// `E ≤ x_k`
    KAbove,
    /// `-x_k ≤ E`
    NegKBelow,
    /// `E ≤ -x_k`
    NegKAbove,
    /// `-E ≤ ±x_k ≤ E` (the index joins the zero side)
    Squeezed,
}

impl SideChoice {
    fn token(self) -> &'static str {
        match self {
            SideChoice::KBelow => "L",
            SideChoice::KAbove => "R",
            SideChoice::NegKBelow => "-L",
            SideChoice::NegKAbove => "-R",
            SideChoice::Squeezed => "Z",
        }
    }
}

/// A shard of the arrangement, given by its hyperplane and sign choices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShardDescriptor {
    pub ctype: CoxType,
    pub n: usize,
    pub hyperplane: Hyperplane,
    /// One choice per cutting index, keyed by the index, ascending.
    pub sign_choices: Vec<(i32, SideChoice)>,
    /// Global sign of the class `x_i = -x_j` where the case analysis fixes
    /// one (`true` = nonnegative).
    pub sign: Option<bool>,
    /// Smallest element of the zero block (type D `Sum` shards only).
    pub zero_block_min: Option<i32>,
}

impl fmt::Display for ShardDescriptor {
    /// Report form, e.g. `A:H(4,9)[8:L,5:R,6:R,7:R]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = match self.hyperplane {
            Hyperplane::Diff(i, j) => (i, j),
            Hyperplane::Sum(i, j) => (i, -j),
        };
        write!(f, "{}:H({},{})[", self.ctype, i, j)?;
        let mut first = true;
        if let Some(s) = self.sign {
            write!(f, "{}", if s { "+" } else { "-" })?;
            first = false;
        }
        if let Some(h) = self.zero_block_min {
            write!(f, "{}z={}", if first { "" } else { "," }, h)?;
            first = false;
        }
        for &(k, c) in &self.sign_choices {
            write!(f, "{}{}:{}", if first { "" } else { "," }, k, c.token())?;
            first = false;
        }
        write!(f, "]")
    }
}

impl ShardDescriptor {
    /// The constraint system the descriptor carves out of its hyperplane.
    pub fn cone(&self) -> ConeSystem {
        let mut eqs: Vec<(i32, i32)> = Vec::new();
        let mut ineqs: Vec<(i32, i32)> = Vec::new();
        // E is represented by the letter e below; constraints are generated
        // for the nonnegative orientation and mirrored at the end if needed
        let e = match self.hyperplane {
            Hyperplane::Diff(i, j) => {
                if i == 0 {
                    eqs.push((0, j));
                } else {
                    eqs.push((i, j));
                }
                if i == 0 { j } else { i }
            }
            Hyperplane::Sum(i, j) => {
                eqs.push((i, -j));
                i
            }
        };
        if self.sign == Some(true) {
            ineqs.push((0, e));
        }
        if let Some(h) = self.zero_block_min {
            ineqs.push((h, e));
            ineqs.push((-h, e));
        }
        for &(k, choice) in &self.sign_choices {
            match choice {
                SideChoice::KBelow => ineqs.push((k, e)),
                SideChoice::KAbove => ineqs.push((e, k)),
                SideChoice::NegKBelow => ineqs.push((-k, e)),
                SideChoice::NegKAbove => ineqs.push((e, -k)),
                SideChoice::Squeezed => {
                    ineqs.push((k, e));
                    ineqs.push((-k, e));
                }
            }
        }
        if self.sign == Some(false) {
            // global reflection: the class is nonpositive instead
            for eq in &mut eqs {
                *eq = (-eq.0, -eq.1);
            }
            for iq in &mut ineqs {
                *iq = (-iq.1, -iq.0);
            }
        }
        if self.ctype != CoxType::A {
            let mirror_eq: Vec<_> = eqs.iter().map(|&(a, b)| (-a, -b)).collect();
            let mirror_iq: Vec<_> = ineqs.iter().map(|&(a, b)| (-b, -a)).collect();
            eqs.extend(mirror_eq);
            ineqs.extend(mirror_iq);
        }
        ConeSystem {
            ctype: self.ctype,
            n: self.n,
            equalities: eqs,
            inequalities: ineqs,
        }
    }
}

fn choice_products(slots: Vec<(i32, Vec<SideChoice>)>) -> Vec<Vec<(i32, SideChoice)>> {
    let mut out: Vec<Vec<(i32, SideChoice)>> = vec![Vec::new()];
    for (k, options) in slots {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &opt in &options {
                let mut row = prefix.clone();
                row.push((k, opt));
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// All shards of the arrangement, in deterministic order by hyperplane and
/// choice vector.
pub fn enumerate_shards(ctype: CoxType, n: usize) -> Result<Vec<ShardDescriptor>> {
    if n < ctype.min_n() {
        return Err(Error::UnsupportedRank {
            ctype,
            n,
            reason: format!("minimum is {}", ctype.min_n()),
        });
    }
    let ni = n as i32;
    let mut out = Vec::new();
    let two = vec![SideChoice::KBelow, SideChoice::KAbove];
    let neg_two = vec![SideChoice::NegKBelow, SideChoice::NegKAbove];
    let three = vec![
        SideChoice::KAbove,
        SideChoice::Squeezed,
        SideChoice::NegKAbove,
    ];

    // x_i = x_j hyperplanes (all types; i = 0 only in type B)
    let diff_lo = if ctype == CoxType::B { 0 } else { 1 };
    for i in diff_lo..=ni {
        for j in (i + 1)..=ni {
            let slots = ((i + 1)..j).map(|k| (k, two.clone())).collect();
            for sign_choices in choice_products(slots) {
                out.push(ShardDescriptor {
                    ctype,
                    n,
                    hyperplane: Hyperplane::Diff(i, j),
                    sign_choices,
                    sign: None,
                    zero_block_min: None,
                });
            }
        }
    }
    if ctype == CoxType::A {
        return Ok(out);
    }

    // x_i = -x_j hyperplanes
    for i in 1..=ni {
        for j in (i + 1)..=ni {
            let inner: Vec<(i32, Vec<SideChoice>)> =
                ((i + 1)..j).map(|k| (k, neg_two.clone())).collect();
            match ctype {
                CoxType::B => {
                    for sign in [true, false] {
                        let mut slots: Vec<(i32, Vec<SideChoice>)> =
                            (1..i).map(|k| (k, three.clone())).collect();
                        slots.extend(inner.iter().cloned());
                        for sign_choices in choice_products(slots) {
                            out.push(ShardDescriptor {
                                ctype,
                                n,
                                hyperplane: Hyperplane::Sum(i, j),
                                sign_choices,
                                sign: Some(sign),
                                zero_block_min: None,
                            });
                        }
                    }
                }
                CoxType::D => {
                    // empty zero block: unsigned, two aligned choices below i
                    let mut slots: Vec<(i32, Vec<SideChoice>)> = (1..i)
                        .map(|k| (k, vec![SideChoice::KBelow, SideChoice::NegKBelow]))
                        .collect();
                    slots.extend(inner.iter().cloned());
                    for sign_choices in choice_products(slots) {
                        out.push(ShardDescriptor {
                            ctype,
                            n,
                            hyperplane: Hyperplane::Sum(i, j),
                            sign_choices,
                            sign: None,
                            zero_block_min: None,
                        });
                    }
                    // nonempty zero block with smallest element h
                    for h in 1..i {
                        for sign in [true, false] {
                            let mut slots: Vec<(i32, Vec<SideChoice>)> =
                                (1..h).map(|g| (g, neg_two_outer())).collect();
                            slots.extend(((h + 1)..i).map(|k| (k, three.clone())));
                            slots.extend(inner.iter().cloned());
                            for sign_choices in choice_products(slots) {
                                out.push(ShardDescriptor {
                                    ctype,
                                    n,
                                    hyperplane: Hyperplane::Sum(i, j),
                                    sign_choices,
                                    sign: Some(sign),
                                    zero_block_min: Some(h),
                                });
                            }
                        }
                    }
                }
                CoxType::A => unreachable!(),
            }
        }
    }
    Ok(out)
}

// below a nonempty zero block each index has one letter above E and the
// other below -E
fn neg_two_outer() -> Vec<SideChoice> {
    vec![SideChoice::KAbove, SideChoice::NegKAbove]
}

/// Number of shards on one hyperplane, for count cross-checks.
pub fn shards_on_hyperplane(ctype: CoxType, n: usize, h: Hyperplane) -> Result<usize> {
    Ok(enumerate_shards(ctype, n)?
        .into_iter()
        .filter(|s| s.hyperplane == h)
        .count())
}

/// The unique one-descent element whose cone equals the descriptor's
/// constraint system.
pub fn shard_to_element(s: &ShardDescriptor) -> Result<Element> {
    let sys = s.cone();
    let closure = close_system(&sys);
    let e = match s.ctype {
        CoxType::A | CoxType::B => read_off_word(s.ctype, s.n, &closure)
            .map_err(|err| Error::InvalidDescriptor(format!("{s}: {err}")))?,
        CoxType::D => element_by_cone(s.ctype, s.n, &closure.fingerprint())
            .ok_or_else(|| Error::InvalidDescriptor(format!("{s}: no matching element")))?,
    };
    // collapse test: the element must be an atom with exactly this cone
    if e.descents() != 1
        || close_system(&ConeSystem::of(&e)).fingerprint() != closure.fingerprint()
    {
        return Err(Error::InvalidDescriptor(format!(
            "{s}: constraint system collapses"
        )));
    }
    Ok(e)
}

type FpTable = Arc<HashMap<Vec<u8>, Element>>;

fn element_by_cone(ctype: CoxType, n: usize, fp: &[u8]) -> Option<Element> {
    static TABLES: OnceLock<Mutex<HashMap<(CoxType, usize), FpTable>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let table = {
        let mut guard = tables.lock().unwrap();
        if let Some(t) = guard.get(&(ctype, n)) {
            t.clone()
        } else {
            let mut map = HashMap::new();
            for e in crate::elements::enumerate(ctype, n).ok()? {
                map.insert(close_system(&ConeSystem::of(&e)).fingerprint(), e);
            }
            let arc: FpTable = Arc::new(map);
            guard.insert((ctype, n), arc.clone());
            arc
        }
    };
    table.get(fp).cloned()
}

/// Shards whose intersection recovers `C(w)`.
///
/// Type A uses the explicit per-pair construction (one shard for each pair
/// of letters lying in a common decreasing run); types B and D take the
/// atoms below `w`, which the graded atomic order guarantees is enough.
/// Neither set is claimed minimal.
pub fn decompose_into_shards(w: &Element) -> Result<Vec<ShardDescriptor>> {
    match w {
        Element::A(p) => {
            let word = p.word();
            let preorder = blocks_of(w);
            let mut out = Vec::new();
            for block in &preorder.blocks {
                for (bi, &hi) in block.letters.iter().enumerate() {
                    for &lo in &block.letters[bi + 1..] {
                        let hi_pos = p.position_of(hi);
                        let mut sign_choices = Vec::new();
                        for k in (lo + 1)..hi {
                            let k_pos = 1 + word.iter().position(|&x| x == k).unwrap();
                            sign_choices.push((
                                k,
                                if k_pos < hi_pos {
                                    SideChoice::KBelow
                                } else {
                                    SideChoice::KAbove
                                },
                            ));
                        }
                        out.push(ShardDescriptor {
                            ctype: CoxType::A,
                            n: p.n(),
                            hyperplane: Hyperplane::Diff(lo, hi),
                            sign_choices,
                            sign: None,
                            zero_block_min: None,
                        });
                    }
                }
            }
            Ok(out)
        }
        Element::B(_) | Element::D(_) => {
            let atoms = crate::elements::one_descent_elements(w.ctype(), w.n())?;
            let outer = ConeSystem::of(w);
            let mut out = Vec::new();
            for a in atoms {
                // a ≤ w iff C(w) ⊆ C(a)
                if cone_contains(&ConeSystem::of(&a), &outer)? {
                    out.push(descriptor_of_atom(&a)?);
                }
            }
            Ok(out)
        }
    }
}

fn descriptor_of_atom(a: &Element) -> Result<ShardDescriptor> {
    static TABLES: OnceLock<Mutex<HashMap<(CoxType, usize), Arc<HashMap<Vec<u8>, ShardDescriptor>>>>> =
        OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (a.ctype(), a.n());
    let table = {
        let mut guard = tables.lock().unwrap();
        if let Some(t) = guard.get(&key) {
            t.clone()
        } else {
            let mut map = HashMap::new();
            for s in enumerate_shards(a.ctype(), a.n())? {
                map.insert(close_system(&s.cone()).fingerprint(), s);
            }
            let arc = Arc::new(map);
            guard.insert(key, arc.clone());
            arc
        }
    };
    table
        .get(&close_system(&ConeSystem::of(a)).fingerprint())
        .cloned()
        .ok_or_else(|| Error::InvalidDescriptor(format!("{a} is not a shard")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{enumerate, one_descent_elements};
    use crate::preorders::{blocks_of, join_direct};
    use std::collections::HashSet;

    #[test]
    fn shard_counts_match_formulas() {
        for n in 1..=6usize {
            assert_eq!(
                enumerate_shards(CoxType::A, n).unwrap().len(),
                (1usize << n) - n - 1
            );
            assert_eq!(
                enumerate_shards(CoxType::B, n).unwrap().len(),
                3usize.pow(n as u32) - n - 1
            );
        }
        for n in 2..=6usize {
            assert_eq!(
                enumerate_shards(CoxType::D, n).unwrap().len(),
                3usize.pow(n as u32) - n * (1 << (n - 1)) - n - 1
            );
        }
    }

    #[test]
    fn per_hyperplane_counts() {
        assert_eq!(
            shards_on_hyperplane(CoxType::A, 4, Hyperplane::Diff(1, 4)).unwrap(),
            4
        );
        // 2^{j-i} 3^{i-1} = 2 * 3 = 6
        assert_eq!(
            shards_on_hyperplane(CoxType::B, 3, Hyperplane::Sum(2, 3)).unwrap(),
            6
        );
        // 2^{j-i} 3^{i-1} - 2^{j-2} = 6 - 2 = 4
        assert_eq!(
            shards_on_hyperplane(CoxType::D, 4, Hyperplane::Sum(2, 3)).unwrap(),
            4
        );
    }

    #[test]
    fn shard_elements_are_the_one_descent_elements() {
        for (t, n) in [
            (CoxType::A, 5),
            (CoxType::B, 4),
            (CoxType::D, 4),
            (CoxType::D, 2),
        ] {
            let shards = enumerate_shards(t, n).unwrap();
            let mut image = HashSet::new();
            for s in &shards {
                let e = shard_to_element(s).unwrap();
                assert_eq!(e.descents(), 1, "{s}");
                assert!(image.insert(e), "collision at {s}");
            }
            let atoms: HashSet<Element> =
                one_descent_elements(t, n).unwrap().into_iter().collect();
            assert_eq!(image, atoms, "type {t} n={n}");
        }
    }

    #[test]
    fn worked_shard_words() {
        // hyperplane (4,9), 8 left, 5/6/7 right
        let s = ShardDescriptor {
            ctype: CoxType::A,
            n: 9,
            hyperplane: Hyperplane::Diff(4, 9),
            sign_choices: vec![
                (5, SideChoice::KAbove),
                (6, SideChoice::KAbove),
                (7, SideChoice::KAbove),
                (8, SideChoice::KBelow),
            ],
            sign: None,
            zero_block_min: None,
        };
        let e = shard_to_element(&s).unwrap();
        assert_eq!(blocks_of(&e).to_string(), "1|2|3|8|94|5|6|7");
        assert_eq!(s.to_string(), "A:H(4,9)[5:R,6:R,7:R,8:L]");

        // the shard 31|2|4|5|6|7|8|9: hyperplane (1,3), 2 right
        let s = ShardDescriptor {
            ctype: CoxType::A,
            n: 9,
            hyperplane: Hyperplane::Diff(1, 3),
            sign_choices: vec![(2, SideChoice::KAbove)],
            sign: None,
            zero_block_min: None,
        };
        assert_eq!(
            blocks_of(&shard_to_element(&s).unwrap()).to_string(),
            "31|2|4|5|6|7|8|9"
        );
    }

    #[test]
    fn decomposition_reproduces_worked_example() {
        let w = Element::parse(CoxType::A, "283964517").unwrap();
        let shards = decompose_into_shards(&w).unwrap();
        let words: Vec<String> = shards
            .iter()
            .map(|s| blocks_of(&shard_to_element(s).unwrap()).to_string())
            .collect();
        assert_eq!(
            words,
            vec![
                "1|2|83|4|5|6|7|9",
                "1|2|3|4|5|8|96|7",
                "1|2|3|8|94|5|6|7",
                "1|2|3|64|5|7|8|9",
                "2|3|4|51|6|7|8|9",
            ]
        );
    }

    #[test]
    fn decomposition_joins_back() {
        for (t, n) in [(CoxType::A, 5), (CoxType::B, 3), (CoxType::D, 3)] {
            for w in enumerate(t, n).unwrap() {
                let shards = decompose_into_shards(&w).unwrap();
                if w.descents() == 0 {
                    assert!(shards.is_empty());
                    continue;
                }
                if w.descents() == 1 {
                    assert_eq!(shards.len(), 1);
                    assert_eq!(shard_to_element(&shards[0]).unwrap(), w);
                }
                let mut acc = Element::identity(t, n);
                for s in &shards {
                    acc = join_direct(&acc, &shard_to_element(s).unwrap()).unwrap();
                }
                assert_eq!(acc, w, "join of shards fails for {w}");
            }
        }
    }
}
