//! Exact counting and enumeration of independent sets.
//!
//! Two independent routes are kept side by side: a two-state tree DP over
//! size-indexed polynomials with arbitrary-precision coefficients, and a
//! brute-force enumerator. Star sizes grow exponentially with the tree
//! height, so all DP counts are `BigUint`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::set::VertexSet;
use crate::tree::{Topology, VertexId};

/// Size-indexed counts: coefficient `k` is the number of independent sets of
/// size `k` under the query's constraints. Trailing zero coefficients are
/// trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountPolynomial {
    coeffs: Vec<BigUint>,
}

impl CountPolynomial {
    pub fn zero() -> Self {
        CountPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        CountPolynomial {
            coeffs: vec![BigUint::from(1u32)],
        }
    }

    fn from_coeffs(mut coeffs: Vec<BigUint>) -> Self {
        while coeffs.last().is_some_and(|c| c == &BigUint::ZERO) {
            coeffs.pop();
        }
        CountPolynomial { coeffs }
    }

    pub fn coeff(&self, k: usize) -> BigUint {
        self.coeffs.get(k).cloned().unwrap_or(BigUint::ZERO)
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Largest size with a nonzero count; 0 for the zero polynomial.
    pub fn max_size(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + other.coeff(k));
        }
        CountPolynomial::from_coeffs(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return CountPolynomial::zero();
        }
        let mut out = vec![BigUint::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == BigUint::ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CountPolynomial::from_coeffs(out)
    }

    /// Multiplies by x: shifts every count up one size.
    fn shift_up(&self) -> Self {
        if self.coeffs.is_empty() {
            return CountPolynomial::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(BigUint::ZERO);
        out.extend(self.coeffs.iter().cloned());
        CountPolynomial { coeffs: out }
    }
}

/// Per-vertex constraint for the DP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VertexConstraint {
    #[default]
    Free,
    /// The vertex must be in every counted set.
    Forced,
    /// The vertex may not be in any counted set.
    Forbidden,
}

/// Two-state DP over a tree or forest: for each vertex, polynomials counting
/// the independent sets of its subtree with the vertex in or out. Constraints
/// zero out one of the two states at the constrained vertex.
pub fn constrained_profile<H: Topology>(
    host: &H,
    constraint: impl Fn(VertexId) -> VertexConstraint,
) -> CountPolynomial {
    let n = host.vertex_count();
    let mut state: Vec<Option<(CountPolynomial, CountPolynomial)>> = vec![None; n];
    let mut total = CountPolynomial::one();
    for &root in host.roots() {
        // iterative post-order; parsed trees can be long paths
        let mut stack = vec![(root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if !expanded {
                stack.push((v, true));
                for &c in host.children(v) {
                    stack.push((c, false));
                }
                continue;
            }
            let mut with_v = CountPolynomial::one();
            let mut without_v = CountPolynomial::one();
            for &c in host.children(v) {
                let (c_in, c_out) = state[c].take().expect("post-order");
                with_v = with_v.mul(&c_out);
                without_v = without_v.mul(&c_in.add(&c_out));
            }
            let mut with_v = with_v.shift_up();
            match constraint(v) {
                VertexConstraint::Free => {}
                VertexConstraint::Forced => without_v = CountPolynomial::zero(),
                VertexConstraint::Forbidden => with_v = CountPolynomial::zero(),
            }
            state[v] = Some((with_v, without_v));
        }
        let (r_in, r_out) = state[root].take().unwrap();
        total = total.mul(&r_in.add(&r_out));
    }
    total
}

/// Counts of independent sets by size, optionally forcing one vertex in and
/// forbidding a set of vertices.
pub fn independence_profile<H: Topology>(
    host: &H,
    forced: Option<VertexId>,
    forbidden: Option<&VertexSet>,
) -> Result<CountPolynomial> {
    if let Some(v) = forced {
        host.check_vertex(v)?;
        if forbidden.is_some_and(|f| f.contains(v)) {
            return Err(Error::pre(format!(
                "forced vertex {v} is also forbidden"
            )));
        }
    }
    Ok(constrained_profile(host, |v| {
        if forced == Some(v) {
            VertexConstraint::Forced
        } else if forbidden.is_some_and(|f| f.contains(v)) {
            VertexConstraint::Forbidden
        } else {
            VertexConstraint::Free
        }
    }))
}

/// The size of the star at `v` for size `k`: the number of independent sets
/// of size `k` containing `v`.
pub fn count_star<H: Topology>(host: &H, v: VertexId, k: usize) -> Result<BigUint> {
    host.check_vertex(v)?;
    Ok(constrained_profile(host, |x| {
        if x == v {
            VertexConstraint::Forced
        } else {
            VertexConstraint::Free
        }
    })
    .coeff(k))
}

/// Sizes of the three classes splitting the stars at `v` and `leaf`:
/// sets containing `v` but not `leaf`, `leaf` but not `v`, and both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSizes {
    pub a: BigUint,
    pub b: BigUint,
    pub c: BigUint,
}

pub fn count_classes<H: Topology>(
    host: &H,
    v: VertexId,
    leaf: VertexId,
    k: usize,
) -> Result<ClassSizes> {
    host.check_vertex(v)?;
    host.check_vertex(leaf)?;
    if v == leaf {
        return Err(Error::pre("class decomposition requires v != leaf"));
    }
    let query = |inside: VertexId, outside: VertexId| {
        constrained_profile(host, |x| {
            if x == inside {
                VertexConstraint::Forced
            } else if x == outside {
                VertexConstraint::Forbidden
            } else {
                VertexConstraint::Free
            }
        })
        .coeff(k)
    };
    let a = query(v, leaf);
    let b = query(leaf, v);
    let c = constrained_profile(host, |x| {
        if x == v || x == leaf {
            VertexConstraint::Forced
        } else {
            VertexConstraint::Free
        }
    })
    .coeff(k);
    Ok(ClassSizes { a, b, c })
}

/// Visits every independent set of size exactly `k` that contains all of
/// `forced` and none of `forbidden`, in lexicographic order of the sorted id
/// lists. The callback receives a scratch set that must not be retained.
pub fn for_each_independent_set<H: Topology>(
    host: &H,
    k: usize,
    forced: &[VertexId],
    forbidden: &[VertexId],
    mut f: impl FnMut(&VertexSet),
) -> Result<()> {
    let n = host.vertex_count();
    for &v in forced.iter().chain(forbidden) {
        host.check_vertex(v)?;
    }
    let mut blocked = VertexSet::new(n);
    let mut current = VertexSet::new(n);
    for &v in forced {
        if blocked.contains(v) || current.contains(v) {
            return Err(Error::pre(format!(
                "forced vertices are not independent (vertex {v})"
            )));
        }
        current.insert(v);
        for w in host.neighbors(v) {
            blocked.insert(w);
        }
    }
    for &v in forbidden {
        if current.contains(v) {
            return Err(Error::pre(format!(
                "vertex {v} is both forced and forbidden"
            )));
        }
        blocked.insert(v);
    }
    if current.len() > k {
        return Ok(());
    }
    let need = k - current.len();

    fn rec<H: Topology>(
        host: &H,
        from: VertexId,
        need: usize,
        current: &mut VertexSet,
        blocked: &VertexSet,
        f: &mut impl FnMut(&VertexSet),
    ) {
        if need == 0 {
            f(current);
            return;
        }
        let n = host.vertex_count();
        for v in from..n {
            if blocked.contains(v) || current.contains(v) {
                continue;
            }
            if host.neighbors(v).iter().any(|&w| current.contains(w)) {
                continue;
            }
            current.insert(v);
            rec(host, v + 1, need - 1, current, blocked, f);
            current.remove(v);
        }
    }

    if need == 0 {
        f(&current);
        return Ok(());
    }
    rec(host, 0, need, &mut current, &blocked, &mut f);
    Ok(())
}

/// Visits every independent set of any size that contains all of `forced`
/// and none of `forbidden` — the forced set itself included — each exactly
/// once, in lexicographic order. One traversal covers what a size-by-size
/// scan would visit many times over.
pub fn for_each_independent_set_all_sizes<H: Topology>(
    host: &H,
    forced: &[VertexId],
    forbidden: &[VertexId],
    mut f: impl FnMut(&VertexSet),
) -> Result<()> {
    let n = host.vertex_count();
    for &v in forced.iter().chain(forbidden) {
        host.check_vertex(v)?;
    }
    let mut blocked = VertexSet::new(n);
    let mut current = VertexSet::new(n);
    for &v in forced {
        if blocked.contains(v) || current.contains(v) {
            return Err(Error::pre(format!(
                "forced vertices are not independent (vertex {v})"
            )));
        }
        current.insert(v);
        for w in host.neighbors(v) {
            blocked.insert(w);
        }
    }
    for &v in forbidden {
        if current.contains(v) {
            return Err(Error::pre(format!(
                "vertex {v} is both forced and forbidden"
            )));
        }
        blocked.insert(v);
    }

    fn rec<H: Topology>(
        host: &H,
        from: VertexId,
        current: &mut VertexSet,
        blocked: &VertexSet,
        f: &mut impl FnMut(&VertexSet),
    ) {
        let n = host.vertex_count();
        for v in from..n {
            if blocked.contains(v) || current.contains(v) {
                continue;
            }
            if host.neighbors(v).iter().any(|&w| current.contains(w)) {
                continue;
            }
            current.insert(v);
            f(current);
            rec(host, v + 1, current, blocked, f);
            current.remove(v);
        }
    }

    f(&current);
    rec(host, 0, &mut current, &blocked, &mut f);
    Ok(())
}

/// All independent sets of size exactly `k`, materialized, in lexicographic
/// order of the sorted id lists.
pub fn enumerate_independent_sets<H: Topology>(host: &H, k: usize) -> Vec<VertexSet> {
    let mut out = Vec::new();
    for_each_independent_set(host, k, &[], &[], |s| out.push(s.clone()))
        .expect("no constraints");
    out
}

/// Brute-force counts of independent sets by size, by direct traversal of
/// the whole family. Limited to hosts with at most 64 vertices; this is the
/// enumeration-side oracle for the DP.
pub fn brute_force_profile<H: Topology>(host: &H) -> Result<Vec<u64>> {
    let n = host.vertex_count();
    if n > 64 {
        return Err(Error::Unsupported(format!(
            "brute-force counting supports at most 64 vertices, got {n}"
        )));
    }
    let mut neigh = vec![0u64; n];
    for v in 0..n {
        for w in host.neighbors(v) {
            neigh[v] |= 1 << w;
        }
    }
    let mut counts = vec![0u64; n + 1];
    counts[0] = 1;
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    fn rec(neigh: &[u64], avail: u64, size: usize, counts: &mut [u64]) {
        let mut m = avail;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            counts[size + 1] += 1;
            let above = if v + 1 >= 64 { 0 } else { u64::MAX << (v + 1) };
            let next = avail & above & !neigh[v];
            if next != 0 {
                rec(neigh, next, size + 1, counts);
            }
        }
    }

    rec(&neigh, full, 0, &mut counts);
    while counts.last() == Some(&0) {
        counts.pop();
    }
    Ok(counts)
}

/// Checks that no two members of `set` are adjacent in `host`.
pub fn is_independent<H: Topology>(host: &H, set: &VertexSet) -> bool {
    set.iter().all(|v| {
        host.children(v).iter().all(|&c| !set.contains(c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{parse_tree, RootedTree};

    fn poly_u64(p: &CountPolynomial) -> Vec<u64> {
        p.coeffs()
            .iter()
            .map(|c| {
                let d = c.to_u64_digits();
                assert!(d.len() <= 1);
                d.first().copied().unwrap_or(0)
            })
            .collect()
    }

    #[test]
    fn profile_of_perfect_2_2() {
        let t = RootedTree::perfect(2, 2).unwrap();
        let p = independence_profile(&t, None, None).unwrap();
        assert_eq!(poly_u64(&p), vec![1, 3, 1]);
    }

    #[test]
    fn profile_forced_root_of_perfect_2_2() {
        let t = RootedTree::perfect(2, 2).unwrap();
        let p = independence_profile(&t, Some(0), None).unwrap();
        assert_eq!(poly_u64(&p), vec![0, 1]);
        assert_eq!(p.coeff(2), BigUint::ZERO);
    }

    #[test]
    fn profile_of_single_vertex() {
        let t = RootedTree::perfect(2, 1).unwrap();
        let p = independence_profile(&t, None, None).unwrap();
        assert_eq!(poly_u64(&p), vec![1, 1]);
    }

    #[test]
    fn enumerate_perfect_2_2_pairs() {
        let t = RootedTree::perfect(2, 2).unwrap();
        let sets = enumerate_independent_sets(&t, 2);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].to_vec(), vec![1, 2]);
    }

    #[test]
    fn enumerate_size_zero_is_the_empty_set() {
        let t = parse_tree("4\n-1 0 0 1\n").unwrap();
        let sets = enumerate_independent_sets(&t, 0);
        assert_eq!(sets.len(), 1);
        assert!(sets[0].is_empty());
    }

    #[test]
    fn enumerate_perfect_2_3_quadruples() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let sets = enumerate_independent_sets(&t, 4);
        let lists: Vec<Vec<usize>> = sets.iter().map(|s| s.to_vec()).collect();
        assert_eq!(
            lists,
            vec![
                vec![0, 3, 4, 5],
                vec![0, 3, 4, 6],
                vec![0, 3, 5, 6],
                vec![0, 4, 5, 6],
                vec![3, 4, 5, 6],
            ]
        );
    }

    #[test]
    fn star_counts_on_small_perfect_trees() {
        let t = RootedTree::perfect(2, 2).unwrap();
        assert_eq!(count_star(&t, 1, 2).unwrap(), BigUint::from(1u32));
        assert_eq!(count_star(&t, 0, 2).unwrap(), BigUint::ZERO);

        let t = RootedTree::perfect(2, 3).unwrap();
        assert_eq!(count_star(&t, 3, 2).unwrap(), BigUint::from(5u32));
        assert_eq!(count_star(&t, 0, 2).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn every_singleton_star_is_one() {
        for text in ["perfect:2:3", "perfect:3:2", "5\n-1 0 1 2 3\n"] {
            let t = parse_tree(text).unwrap();
            for v in 0..t.vertex_count() {
                assert_eq!(count_star(&t, v, 1).unwrap(), BigUint::from(1u32));
            }
        }
    }

    #[test]
    fn class_sizes_match_hand_counts() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let cs = count_classes(&t, 0, 3, 2).unwrap();
        assert_eq!(
            (cs.a, cs.b, cs.c),
            (BigUint::from(3u32), BigUint::from(4u32), BigUint::from(1u32))
        );

        let t = RootedTree::perfect(2, 2).unwrap();
        let cs = count_classes(&t, 0, 1, 2).unwrap();
        assert_eq!(
            (cs.a, cs.b, cs.c),
            (BigUint::ZERO, BigUint::from(1u32), BigUint::ZERO)
        );
        // adjacent centres can never co-occur
        assert_eq!(count_classes(&t, 0, 1, 2).unwrap().c, BigUint::ZERO);
    }

    #[test]
    fn count_classes_rejects_equal_vertices() {
        let t = RootedTree::perfect(2, 2).unwrap();
        assert!(count_classes(&t, 1, 1, 2).is_err());
    }

    #[test]
    fn class_decomposition_identity() {
        let t = RootedTree::perfect(3, 3).unwrap();
        let leaf = t.leftmost_leaf();
        for v in 0..t.vertex_count() {
            if v == leaf {
                continue;
            }
            for k in 0..=5 {
                let cs = count_classes(&t, v, leaf, k).unwrap();
                assert_eq!(&cs.a + &cs.c, count_star(&t, v, k).unwrap());
                assert_eq!(&cs.b + &cs.c, count_star(&t, leaf, k).unwrap());
            }
        }
    }

    #[test]
    fn dp_matches_brute_force_on_small_trees() {
        for text in [
            "perfect:2:2",
            "perfect:2:3",
            "perfect:2:4",
            "perfect:3:2",
            "perfect:3:3",
            "1\n-1\n",
            "2\n-1 0\n",
            "9\n-1 0 0 1 1 2 2 3 3\n",
            "12\n-1 0 1 2 3 4 5 6 7 8 9 10\n",
        ] {
            let t = parse_tree(text).unwrap();
            let dp = independence_profile(&t, None, None).unwrap();
            let brute = brute_force_profile(&t).unwrap();
            assert_eq!(dp.coeffs().len(), brute.len(), "{text}");
            for (k, &b) in brute.iter().enumerate() {
                assert_eq!(dp.coeff(k), BigUint::from(b), "{text} k={k}");
            }
        }
    }

    #[test]
    fn enumeration_count_matches_profile() {
        let t = RootedTree::perfect(2, 4).unwrap();
        let p = independence_profile(&t, None, None).unwrap();
        for k in 0..=p.max_size() + 1 {
            let sets = enumerate_independent_sets(&t, k);
            assert!(sets.iter().all(|s| is_independent(&t, s)));
            assert_eq!(BigUint::from(sets.len()), p.coeff(k));
        }
    }

    #[test]
    fn level_symmetry_on_perfect_trees() {
        for (r, h) in [(2usize, 4usize), (3, 3)] {
            let t = RootedTree::perfect(r, h).unwrap();
            for k in 1..=4 {
                for v in 0..t.vertex_count() {
                    for w in 0..t.vertex_count() {
                        if t.depth(v) == t.depth(w) {
                            assert_eq!(
                                count_star(&t, v, k).unwrap(),
                                count_star(&t, w, k).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn forced_and_forbidden_constraints() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let leaf = 3;
        let mut forb = VertexSet::new(7);
        forb.insert(leaf);
        let a = independence_profile(&t, Some(0), Some(&forb)).unwrap();
        assert_eq!(a.coeff(2), BigUint::from(3u32));
        assert!(independence_profile(&t, Some(leaf), Some(&forb)).is_err());
    }
}
