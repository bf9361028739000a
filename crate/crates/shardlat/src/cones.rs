//! Exact geometric semantics: the cone `C(w)` as a coordinate constraint
//! system, with containment decided by closure instead of linear
//! programming.
//!
//! Every constraint is `x_a = x_b` or `x_a ≤ x_b` where `a`, `b` range over
//! signed letters (`x_{-i} = -x_i`, `x_0 = 0`). Implication then reduces to
//! reachability in a signed digraph: merge strongly connected classes, pin
//! self-negated classes to zero, and add `x ≤ 0` whenever `x ≤ -x` is
//! forced. No floating point anywhere.

use crate::elements::{CoxType, Element};
use crate::preorders::{alphabet, blocks_of, letter_id, Side};
use crate::{Error, Result};
use std::fmt::Write as _;

/// Equality and inequality constraints defining a cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSystem {
    pub ctype: CoxType,
    pub n: usize,
    /// Pairs `(a, b)` with `x_a = x_b`.
    pub equalities: Vec<(i32, i32)>,
    /// Pairs `(a, b)` with `x_a ≤ x_b`.
    pub inequalities: Vec<(i32, i32)>,
}

impl ConeSystem {
    /// The cone of an element, read off its block pre-order. Blocks give
    /// equalities; letters strictly inside a block's value interval give
    /// side inequalities. For B/D the system carries its negation mirror.
    pub fn of(e: &Element) -> ConeSystem {
        let p = blocks_of(e);
        let signed = e.ctype() != CoxType::A;
        let mut equalities = Vec::new();
        let mut inequalities = Vec::new();
        for b in &p.blocks {
            for w in b.letters.windows(2) {
                equalities.push((w[0], w[1]));
                if signed {
                    equalities.push((-w[0], -w[1]));
                }
            }
        }
        for (k, pos, side) in p.side_constraints() {
            let rep = p.blocks[pos].letters[0];
            let (a, b) = match side {
                Side::Left => (k, rep),
                Side::Right => (rep, k),
            };
            inequalities.push((a, b));
            if signed {
                inequalities.push((-b, -a));
            }
        }
        ConeSystem {
            ctype: e.ctype(),
            n: e.n(),
            equalities,
            inequalities,
        }
    }

    /// Empty system (the whole space).
    pub fn full(ctype: CoxType, n: usize) -> ConeSystem {
        ConeSystem {
            ctype,
            n,
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    /// Add all constraints of another system (cone intersection).
    pub fn absorb(&mut self, other: &ConeSystem) {
        self.equalities.extend(&other.equalities);
        self.inequalities.extend(&other.inequalities);
    }

    /// Dimension of the affine span of the closed system.
    pub fn dim(&self) -> usize {
        close_system(self).dim()
    }
}

/// `C(inner) ⊆ C(outer)`: every constraint of the outer system is implied
/// by the closure of the inner one.
pub fn cone_contains(outer: &ConeSystem, inner: &ConeSystem) -> Result<bool> {
    if outer.ctype != inner.ctype || outer.n != inner.n {
        return Err(Error::Mismatch("cone systems of different shape".into()));
    }
    let cl = close_system(inner);
    for &(a, b) in &outer.equalities {
        if !cl.eq_letters(a, b) {
            return Ok(false);
        }
    }
    for &(a, b) in &outer.inequalities {
        if !cl.le_letters(a, b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closed form of a constraint system: equality classes plus a transitively
/// closed `≤` relation between them.
#[derive(Debug, Clone)]
pub struct Closure {
    ctype: CoxType,
    n: usize,
    /// node -> canonical class representative (smallest node id)
    class: Vec<u32>,
    /// dense class index per node
    dense: Vec<u32>,
    reps: Vec<u32>,
    /// |reps| x |reps| reachability, reflexive
    reach: Vec<bool>,
}

struct Universe {
    ctype: CoxType,
    n: usize,
    nodes: usize,
    zero: Option<usize>,
}

impl Universe {
    fn new(ctype: CoxType, n: usize) -> Universe {
        let (nodes, zero) = match ctype {
            CoxType::A => (n, None),
            CoxType::B => (2 * n + 1, Some(n)), // letter 0
            CoxType::D => (2 * n + 1, Some(2 * n)), // virtual zero
        };
        Universe {
            ctype,
            n,
            nodes,
            zero,
        }
    }

    fn node(&self, letter: i32) -> usize {
        letter_id(self.ctype, self.n, letter)
    }

    fn neg(&self, node: usize) -> usize {
        match self.ctype {
            CoxType::A => node,
            CoxType::B => 2 * self.n - node,
            CoxType::D => {
                if Some(node) == self.zero {
                    node
                } else {
                    2 * self.n - 1 - node
                }
            }
        }
    }
}

fn find(parent: &mut [u32], x: usize) -> usize {
    let mut r = x;
    while parent[r] as usize != r {
        r = parent[r] as usize;
    }
    let mut c = x;
    while parent[c] as usize != c {
        let nxt = parent[c] as usize;
        parent[c] = r as u32;
        c = nxt;
    }
    r
}

fn union(parent: &mut [u32], a: usize, b: usize) -> bool {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra == rb {
        return false;
    }
    // keep the smaller id as representative
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi] = lo as u32;
    true
}

/// Compute the closure of a constraint system.
pub fn close_system(sys: &ConeSystem) -> Closure {
    let uni = Universe::new(sys.ctype, sys.n);
    let nv = uni.nodes;
    let signed = sys.ctype != CoxType::A;
    let mut parent: Vec<u32> = (0..nv as u32).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for &(a, b) in &sys.equalities {
        union(&mut parent, uni.node(a), uni.node(b));
        if signed {
            union(
                &mut parent,
                uni.neg(uni.node(a)),
                uni.neg(uni.node(b)),
            );
        }
    }
    for &(a, b) in &sys.inequalities {
        let (na, nb) = (uni.node(a), uni.node(b));
        edges.push((na, nb));
        if signed {
            edges.push((uni.neg(nb), uni.neg(na)));
        }
    }

    // closure loop: SCC collapse, zero pinning, sign squeeze
    loop {
        let mut reach = vec![false; nv * nv];
        for i in 0..nv {
            let r = find(&mut parent, i);
            reach[r * nv + r] = true;
        }
        for &(a, b) in &edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            reach[ra * nv + rb] = true;
        }
        for m in 0..nv {
            for i in 0..nv {
                if reach[i * nv + m] {
                    for j in 0..nv {
                        if reach[m * nv + j] {
                            reach[i * nv + j] = true;
                        }
                    }
                }
            }
        }
        let mut changed = false;
        for i in 0..nv {
            for j in (i + 1)..nv {
                if reach[i * nv + j] && reach[j * nv + i] {
                    changed |= union(&mut parent, i, j);
                }
            }
        }
        if signed {
            let zero = uni.zero.unwrap();
            for i in 0..nv {
                let r = find(&mut parent, i);
                let rn = find(&mut parent, uni.neg(r));
                if r == rn {
                    changed |= union(&mut parent, r, zero);
                } else if reach[r * nv + rn] && !reach[r * nv + find(&mut parent, zero)] {
                    // x ≤ -x forces x ≤ 0
                    edges.push((r, zero));
                    changed = true;
                }
            }
        }
        if !changed {
            // finalize: dense class indexing and rep-level reachability
            let mut reps: Vec<u32> = (0..nv)
                .filter(|&i| find(&mut parent, i) == i)
                .map(|i| i as u32)
                .collect();
            reps.sort_unstable();
            let mut dense = vec![u32::MAX; nv];
            for (d, &r) in reps.iter().enumerate() {
                dense[r as usize] = d as u32;
            }
            let k = reps.len();
            let mut class = vec![0u32; nv];
            let mut rreach = vec![false; k * k];
            for i in 0..nv {
                let r = find(&mut parent, i);
                class[i] = r as u32;
                dense[i] = dense[r];
            }
            for d in 0..k {
                rreach[d * k + d] = true;
            }
            for i in 0..nv {
                for j in 0..nv {
                    if reach[i * nv + j] {
                        let (di, dj) = (dense[i] as usize, dense[j] as usize);
                        rreach[di * k + dj] = true;
                    }
                }
            }
            return Closure {
                ctype: sys.ctype,
                n: sys.n,
                class,
                dense,
                reps,
                reach: rreach,
            };
        }
    }
}

impl Closure {
    fn uni(&self) -> Universe {
        Universe::new(self.ctype, self.n)
    }

    /// Is `x_a ≤ x_b` implied?
    pub fn le_letters(&self, a: i32, b: i32) -> bool {
        let uni = self.uni();
        let (da, db) = (
            self.dense[uni.node(a)] as usize,
            self.dense[uni.node(b)] as usize,
        );
        self.reach[da * self.reps.len() + db]
    }

    /// Is `x_a = x_b` implied?
    pub fn eq_letters(&self, a: i32, b: i32) -> bool {
        let uni = self.uni();
        self.class[uni.node(a)] == self.class[uni.node(b)]
    }

    /// Equality classes restricted to actual letters, each ascending,
    /// ordered by smallest letter-id.
    pub fn letter_classes(&self) -> Vec<Vec<i32>> {
        let uni = self.uni();
        let mut by_rep: Vec<Vec<i32>> = vec![Vec::new(); self.reps.len()];
        for l in alphabet(self.ctype, self.n) {
            by_rep[self.dense[uni.node(l)] as usize].push(l);
        }
        by_rep.retain(|c| !c.is_empty());
        by_rep
    }

    /// `≤` between the classes of two letters.
    pub fn class_le(&self, ca: &[i32], cb: &[i32]) -> bool {
        self.le_letters(ca[0], cb[0])
    }

    /// Canonical relation table over letters; equal iff the closed systems
    /// agree. Two bits per ordered letter pair.
    pub fn fingerprint(&self) -> Vec<u8> {
        let letters = alphabet(self.ctype, self.n);
        let mut out = Vec::with_capacity(letters.len() * (letters.len() + 1) / 2);
        for (i, &a) in letters.iter().enumerate() {
            for &b in &letters[i + 1..] {
                out.push(u8::from(self.le_letters(a, b)) | (u8::from(self.le_letters(b, a)) << 1));
            }
        }
        out
    }

    /// Dimension of the affine span: one parameter per equality class
    /// (type A, minus one for the ambient sum-zero relation), or one per
    /// `{C, -C}` pair of non-pinned classes (B/D).
    pub fn dim(&self) -> usize {
        let classes = self.letter_classes();
        match self.ctype {
            CoxType::A => classes.len() - 1,
            CoxType::B | CoxType::D => {
                let uni = self.uni();
                classes
                    .iter()
                    .filter(|c| {
                        let node = uni.node(c[0]);
                        self.class[node] != self.class[uni.neg(node)]
                    })
                    .count()
                    / 2
            }
        }
    }

    /// Debug rendering as chained relations between classes, one line per
    /// covering relation of the class order.
    pub fn render(&self) -> String {
        let classes = self.letter_classes();
        let k = classes.len();
        let fmt_class = |c: &[i32]| {
            let mut s = String::new();
            for (i, l) in c.iter().enumerate() {
                if i > 0 {
                    s.push('=');
                }
                let _ = write!(s, "x{l}");
            }
            s
        };
        let lt = |i: usize, j: usize| i != j && self.class_le(&classes[i], &classes[j]);
        let mut lines = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if lt(i, j) && !(0..k).any(|m| lt(i, m) && lt(m, j)) {
                    lines.push(format!("{} <= {}", fmt_class(&classes[i]), fmt_class(&classes[j])));
                }
            }
        }
        if lines.is_empty() {
            classes.iter().map(|c| fmt_class(c)).collect::<Vec<_>>().join("; ")
        } else {
            lines.join("; ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::enumerate;
    use crate::preorders::leq;

    fn a(s: &str) -> Element {
        Element::parse(CoxType::A, s).unwrap()
    }
    fn b(s: &str) -> Element {
        Element::parse(CoxType::B, s).unwrap()
    }

    #[test]
    fn cone_of_signed_worked_example() {
        // long form -3|5,4,-2|1,0,-1|2,-4,-5|3
        let cl = close_system(&ConeSystem::of(&b("-1,2,-4,-5,3")));
        assert!(cl.eq_letters(1, 0));
        assert!(cl.eq_letters(2, -4));
        assert!(cl.eq_letters(2, -5));
        assert!(cl.le_letters(-3, 2));
        assert!(cl.le_letters(0, 2));
        assert!(!cl.eq_letters(3, 2));
        assert_eq!(cl.dim(), 2);
    }

    #[test]
    fn cone_of_extremes() {
        let id = ConeSystem::of(&Element::identity(CoxType::A, 9));
        assert!(id.equalities.is_empty() && id.inequalities.is_empty());
        assert_eq!(id.dim(), 8);
        let w0 = ConeSystem::of(&a("987654321"));
        let cl = close_system(&w0);
        assert!(cl.eq_letters(1, 9));
        assert_eq!(cl.dim(), 0);
    }

    #[test]
    fn cone_dim_matches_descents() {
        assert_eq!(ConeSystem::of(&a("283964517")).dim(), 4);
        for (t, n) in [(CoxType::A, 5), (CoxType::B, 3), (CoxType::D, 4)] {
            for e in enumerate(t, n).unwrap() {
                assert_eq!(
                    e.descents(),
                    t.rank_max(n) - ConeSystem::of(&e).dim(),
                    "dimension law fails for {e}"
                );
            }
        }
    }

    #[test]
    fn containment_worked_examples() {
        let u = ConeSystem::of(&a("12573468"));
        let v = ConeSystem::of(&a("25734861"));
        let w = ConeSystem::of(&a("12547368"));
        assert!(cone_contains(&u, &v).unwrap());
        assert!(!cone_contains(&w, &u).unwrap());
        let id = ConeSystem::of(&Element::identity(CoxType::A, 8));
        for sys in [&u, &v, &w] {
            assert!(cone_contains(&id, sys).unwrap());
        }
    }

    #[test]
    fn oracle_equivalence_small() {
        for (t, n) in [(CoxType::A, 4), (CoxType::B, 2), (CoxType::D, 3)] {
            let els = enumerate(t, n).unwrap();
            let cones: Vec<ConeSystem> = els.iter().map(ConeSystem::of).collect();
            for (i, u) in els.iter().enumerate() {
                for (j, v) in els.iter().enumerate() {
                    assert_eq!(
                        leq(u, v).unwrap(),
                        cone_contains(&cones[i], &cones[j]).unwrap(),
                        "oracle mismatch at {u} vs {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn join_cone_is_closure_of_union() {
        use crate::preorders::join_direct;
        let els = enumerate(CoxType::A, 4).unwrap();
        for u in &els {
            for v in &els {
                let j = join_direct(u, v).unwrap();
                let mut sys = ConeSystem::of(u);
                sys.absorb(&ConeSystem::of(v));
                assert_eq!(
                    close_system(&sys).fingerprint(),
                    close_system(&ConeSystem::of(&j)).fingerprint()
                );
            }
        }
    }

    #[test]
    fn render_is_deterministic() {
        let cl = close_system(&ConeSystem::of(&a("283964517")));
        let r = cl.render();
        assert!(r.contains("x8"));
        assert_eq!(r, close_system(&ConeSystem::of(&a("283964517"))).render());
    }
}
