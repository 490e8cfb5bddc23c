//! Forests of perfect trees: the leaf that maximizes star sizes, and the
//! leaf-to-leaf transfer maps comparing stars across components.

use std::cmp::Reverse;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::count;
use crate::error::{Error, Result};
use crate::inject::{finish_class_checked, MapOptions, MapReport, Run, TraceAction, TraceEvent};
use crate::set::VertexSet;
use crate::tree::{parse_tree_blocks, RootedTree, Topology, VertexId};

/// An ordered collection of rooted trees over one global id space: the tree
/// at index `i` occupies ids `offsets[i] .. offsets[i] + n_i`.
#[derive(Debug, Clone)]
pub struct Forest {
    trees: Vec<RootedTree>,
    offsets: Vec<usize>,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<usize>,
    roots: Vec<VertexId>,
    component: Vec<usize>,
}

impl Topology for Forest {
    fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }
}

impl Forest {
    pub fn new(trees: Vec<RootedTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::pre("a forest needs at least one component"));
        }
        let total: usize = trees.iter().map(|t| t.vertex_count()).sum();
        let mut offsets = Vec::with_capacity(trees.len());
        let mut parent = Vec::with_capacity(total);
        let mut children = Vec::with_capacity(total);
        let mut depth = Vec::with_capacity(total);
        let mut roots = Vec::with_capacity(trees.len());
        let mut component = Vec::with_capacity(total);
        let mut off = 0;
        for (i, t) in trees.iter().enumerate() {
            offsets.push(off);
            roots.push(off + t.root());
            for v in 0..t.vertex_count() {
                parent.push(t.parent(v).map(|p| p + off));
                children.push(t.children(v).iter().map(|c| c + off).collect());
                depth.push(t.depth(v));
                component.push(i);
            }
            off += t.vertex_count();
        }
        Ok(Forest {
            trees,
            offsets,
            parent,
            children,
            depth,
            roots,
            component,
        })
    }

    pub fn component_count(&self) -> usize {
        self.trees.len()
    }

    pub fn tree(&self, i: usize) -> &RootedTree {
        &self.trees[i]
    }

    pub fn trees(&self) -> &[RootedTree] {
        &self.trees
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn global_id(&self, component: usize, local: VertexId) -> Result<VertexId> {
        if component >= self.trees.len() || local >= self.trees[component].vertex_count() {
            return Err(Error::VertexRange(local));
        }
        Ok(self.offsets[component] + local)
    }

    /// Component index and local id of a global vertex.
    pub fn locate(&self, v: VertexId) -> Result<(usize, VertexId)> {
        self.check_vertex(v)?;
        let c = self.component[v];
        Ok((c, v - self.offsets[c]))
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v]
    }

    /// Global id of the leftmost leaf of component `i`.
    pub fn leftmost_leaf_of(&self, i: usize) -> VertexId {
        self.offsets[i] + self.trees[i].leftmost_leaf()
    }

    pub fn serialize(&self) -> String {
        let blocks: Vec<String> = self.trees.iter().map(|t| t.serialize()).collect();
        blocks.join("\n")
    }
}

/// Parses a forest file: tree blocks separated by blank lines, each block a
/// two-line tree or a `perfect:<r>:<h>` shorthand; `#` lines are ignored.
/// Global ids follow cumulative offsets in file order.
pub fn parse_forest(text: &str) -> Result<Forest> {
    Forest::new(parse_tree_blocks(text)?)
}

/// Which branch of the selection rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// All eligible level counts even: the tallest component wins.
    AllEvenTallest,
    /// The component with the smallest odd level count wins.
    ShortestOdd,
}

impl std::fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionRule::AllEvenTallest => "all-even-tallest",
            SelectionRule::ShortestOdd => "shortest-odd",
        })
    }
}

/// The chosen star centre: a leaf whose star is maximal over all vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafSelection {
    pub tree_index: usize,
    pub leaf: VertexId,
    pub rule: SelectionRule,
}

/// Picks a leaf with a maximum-sized star for every k, over a forest of
/// perfect trees: among the components of maximum arity, the one with the
/// smallest odd level count if any level count is odd, otherwise the
/// tallest. Ties break to the lowest component index; within a component the
/// leftmost leaf is returned.
///
/// A one-vertex component is a perfect tree of every arity, so it is always
/// eligible (and, having one level, always wins through the odd rule).
pub fn best_leaf(forest: &Forest) -> Result<LeafSelection> {
    let shapes: Vec<_> = forest
        .trees()
        .iter()
        .map(|t| t.require_shape())
        .collect::<Result<Vec<_>>>()?;
    let finite_max = shapes
        .iter()
        .filter(|s| s.levels >= 2)
        .map(|s| s.arity)
        .max();
    let eligible: Vec<usize> = (0..shapes.len())
        .filter(|&i| shapes[i].levels == 1 || Some(shapes[i].arity) == finite_max)
        .collect();

    let odd_pick = eligible
        .iter()
        .copied()
        .filter(|&i| shapes[i].levels % 2 == 1)
        .min_by_key(|&i| (shapes[i].levels, i));
    let (tree_index, rule) = match odd_pick {
        Some(i) => (i, SelectionRule::ShortestOdd),
        None => {
            let i = eligible
                .iter()
                .copied()
                .max_by_key(|&i| (shapes[i].levels, Reverse(i)))
                .expect("forest is nonempty");
            (i, SelectionRule::AllEvenTallest)
        }
    };
    Ok(LeafSelection {
        tree_index,
        leaf: forest.leftmost_leaf_of(tree_index),
        rule,
    })
}

/// Star size in a forest: independent sets of size `k` containing the global
/// vertex `v`. The component holding `v` contributes its forced profile, all
/// others their plain profiles.
pub fn forest_count_star(forest: &Forest, v: VertexId, k: usize) -> Result<BigUint> {
    count::count_star(forest, v, k)
}

/// Class decomposition across a forest, for global vertices `v` and `leaf`.
pub fn forest_count_classes(
    forest: &Forest,
    v: VertexId,
    leaf: VertexId,
    k: usize,
) -> Result<count::ClassSizes> {
    count::count_classes(forest, v, leaf, k)
}

fn require_leftmost_leaf(forest: &Forest, v: VertexId, what: &str) -> Result<usize> {
    let (comp, _) = forest.locate(v)?;
    if forest.leftmost_leaf_of(comp) != v {
        return Err(Error::pre(format!(
            "{what}: vertex {v} is not the leftmost leaf of component {comp}"
        )));
    }
    Ok(comp)
}

/// Moves a star member at a leaf of a lower-arity perfect component to one
/// at a leaf of a higher-arity component: swap the leaves, shift a parent
/// conflict across, and relocate displaced siblings into the wider tree's
/// spare child positions. Size-preserving and injective for fixed leaves.
pub fn arity_map(
    forest: &Forest,
    l1: VertexId,
    l2: VertexId,
    set: &VertexSet,
    opts: &MapOptions,
) -> Result<MapReport> {
    let c1 = require_leftmost_leaf(forest, l1, "arity transfer")?;
    let c2 = require_leftmost_leaf(forest, l2, "arity transfer")?;
    if c1 == c2 {
        return Err(Error::pre(
            "arity transfer: the leaves must lie in distinct components",
        ));
    }
    let s1 = forest.tree(c1).require_shape()?;
    let s2 = forest.tree(c2).require_shape()?;
    if s1.levels < 2 || s2.levels < 2 {
        return Err(Error::pre(
            "arity transfer: both components need at least two levels",
        ));
    }
    let (r1, r2) = (s1.arity, s2.arity);
    if r1 >= r2 {
        return Err(Error::pre(format!(
            "arity transfer requires the first component's arity to be smaller, got {r1} >= {r2}"
        )));
    }
    super::inject::require_class(forest, set, l1, l2, "arity transfer input")?;

    let mut run = Run::new(set, opts);
    let p1 = forest.parent(l1).expect("leaf of a 2+ level tree");
    let p2 = forest.parent(l2).expect("leaf of a 2+ level tree");

    run.transfer(l1, l2, 0)?;
    run.event(
        TraceEvent::new(0, Some(l1), Some(l2), TraceAction::Swap, &run.set),
        Vec::new(),
        Vec::new(),
    );

    if run.set.contains(p2) {
        run.transfer(p2, p1, 1)?;
        run.event(
            TraceEvent::new(1, Some(p2), Some(p1), TraceAction::PrimaryShift, &run.set),
            Vec::new(),
            Vec::new(),
        );
        let kids1 = forest.children(p1);
        let kids2 = forest.children(p2);
        let mut step = 2;
        for i in 1..r1 {
            if run.set.contains(kids1[i]) {
                run.transfer(kids1[i], kids2[i], step)?;
                run.event(
                    TraceEvent::new(
                        step,
                        Some(kids1[i]),
                        Some(kids2[i]),
                        TraceAction::SecondaryShift,
                        &run.set,
                    ),
                    Vec::new(),
                    Vec::new(),
                );
                step += 1;
            }
        }
        // a grandparent conflict moves into the spare child slot that only
        // the wider tree has; absent for two-level components
        if let Some(pp1) = forest.parent(p1) {
            if run.set.contains(pp1) {
                run.transfer(pp1, kids2[r1], step)?;
                run.event(
                    TraceEvent::new(
                        step,
                        Some(pp1),
                        Some(kids2[r1]),
                        TraceAction::SecondaryShift,
                        &run.set,
                    ),
                    Vec::new(),
                    Vec::new(),
                );
            }
        }
    }
    finish_class_checked(forest, run, set.len(), l2, l1, "arity transfer")
}

/// An injective homomorphism of the shorter component into the taller one
/// that matches plane positions and sends leftmost leaf to leftmost leaf,
/// together with the involution swapping each vertex with its image.
#[derive(Debug, Clone)]
pub struct Embedding {
    forward: Vec<Option<VertexId>>,
    mirror: Vec<Option<VertexId>>,
}

impl Embedding {
    /// Embeds component `c1` into component `c2` of equal arity and more
    /// levels, anchored so that the leftmost leaf of `c1` maps to the
    /// leftmost leaf of `c2`.
    pub fn between(forest: &Forest, c1: usize, c2: usize) -> Result<Embedding> {
        let s1 = forest.tree(c1).require_shape()?;
        let s2 = forest.tree(c2).require_shape()?;
        if s1.arity != s2.arity && s1.levels >= 2 {
            return Err(Error::pre(format!(
                "embedding requires equal arity, got {} and {}",
                s1.arity, s2.arity
            )));
        }
        if s1.levels >= s2.levels {
            return Err(Error::pre(format!(
                "embedding requires strictly fewer levels, got {} and {}",
                s1.levels, s2.levels
            )));
        }
        let n = forest.vertex_count();
        let mut forward = vec![None; n];
        let mut mirror = vec![None; n];
        let l2 = forest.leftmost_leaf_of(c2);
        let mut anchor = l2;
        for _ in 1..s1.levels {
            anchor = forest.parent(anchor).expect("taller component");
        }
        let root1 = forest.roots()[c1];
        let mut stack = vec![(root1, anchor)];
        while let Some((x, y)) = stack.pop() {
            forward[x] = Some(y);
            mirror[x] = Some(y);
            mirror[y] = Some(x);
            let cx = forest.children(x);
            let cy = forest.children(y);
            if !cx.is_empty() {
                debug_assert_eq!(cx.len(), cy.len());
                for (a, b) in cx.iter().zip(cy) {
                    stack.push((*a, *b));
                }
            }
        }
        let emb = Embedding { forward, mirror };
        debug_assert_eq!(emb.forward(forest.leftmost_leaf_of(c1)), Some(l2));
        Ok(emb)
    }

    pub fn forward(&self, v: VertexId) -> Option<VertexId> {
        self.forward[v]
    }

    /// The involution: image of `v` if `v` is in the shorter component, the
    /// preimage if `v` is in the embedded copy, `None` outside both.
    pub fn mirror(&self, v: VertexId) -> Option<VertexId> {
        self.mirror[v]
    }
}

/// Transfer between leaves of two equal-arity perfect components with
/// different level counts. With an even shorter component the input holds
/// `l1` (shorter side) and the output holds `l2`; with an odd one the
/// direction reverses: the input holds `l2` and the output holds `l1`.
/// Size-preserving and injective for fixed leaves.
pub fn level_map(
    forest: &Forest,
    l1: VertexId,
    l2: VertexId,
    set: &VertexSet,
    opts: &MapOptions,
) -> Result<MapReport> {
    let c1 = require_leftmost_leaf(forest, l1, "level transfer")?;
    let c2 = require_leftmost_leaf(forest, l2, "level transfer")?;
    if c1 == c2 {
        return Err(Error::pre(
            "level transfer: the leaves must lie in distinct components",
        ));
    }
    let s1 = forest.tree(c1).require_shape()?;
    let s2 = forest.tree(c2).require_shape()?;
    if s1.levels < 2 || s2.levels < 2 {
        return Err(Error::pre(
            "level transfer: both components need at least two levels",
        ));
    }
    if s1.arity != s2.arity {
        return Err(Error::pre(format!(
            "level transfer requires equal arity, got {} and {}",
            s1.arity, s2.arity
        )));
    }
    if s1.levels >= s2.levels {
        return Err(Error::pre(format!(
            "level transfer requires the first component to be shorter, got {} >= {}",
            s1.levels, s2.levels
        )));
    }
    let emb = Embedding::between(forest, c1, c2)?;
    let short_even = s1.levels % 2 == 0;
    let (from, to) = if short_even { (l1, l2) } else { (l2, l1) };
    super::inject::require_class(forest, set, from, to, "level transfer input")?;

    let mut run = Run::new(set, opts);
    run.transfer(from, to, 0)?;
    run.event(
        TraceEvent::new(0, Some(from), Some(to), TraceAction::Swap, &run.set),
        Vec::new(),
        Vec::new(),
    );

    // conflicts can only arise next to the newly added leaf, so its parent
    // heads the source queue; the removed leaf's parent mirrors it
    let s0 = forest.parent(to).expect("leaf of a 2+ level tree");
    let t0 = forest.parent(from).expect("leaf of a 2+ level tree");
    let mut q_s = std::collections::VecDeque::from([s0]);
    let mut q_t = std::collections::VecDeque::from([t0]);
    let mut visited = VertexSet::from_ids(forest.vertex_count(), &[l1, l2, s0, t0]);
    let mut iteration: u64 = 0;

    loop {
        iteration += 1;
        if run.opts.monitor {
            if q_s.len() != q_t.len() {
                return Err(Error::monitor(
                    "level-queue-sizes",
                    iteration,
                    format!("{} vs {}", q_s.len(), q_t.len()),
                ));
            }
            for (a, b) in q_s.iter().zip(q_t.iter()) {
                if emb.mirror(*a) != Some(*b) {
                    return Err(Error::monitor(
                        "level-pairing",
                        iteration,
                        format!("queued pair {a},{b} is not mirror-matched"),
                    ));
                }
                if run.set.contains(*b) {
                    return Err(Error::monitor(
                        "level-target-clear",
                        iteration,
                        format!("queued target {b} is in the set"),
                    ));
                }
            }
        }
        let Some(s) = q_s.pop_front() else {
            run.event(
                TraceEvent::new(iteration, None, None, TraceAction::Terminate, &run.set),
                Vec::new(),
                Vec::new(),
            );
            break;
        };
        let t_expected = q_t.pop_front().expect("queues move in lockstep");
        let target = emb.mirror(s).ok_or_else(|| {
            Error::monitor(
                "level-mirror-domain",
                iteration,
                format!("vertex {s} has no mirror image"),
            )
        })?;
        if target != t_expected {
            return Err(Error::monitor(
                "level-pairing",
                iteration,
                format!("dequeued pair {s},{t_expected} but mirror is {target}"),
            ));
        }
        if !run.set.contains(s) {
            run.event(
                TraceEvent::new(iteration, Some(s), Some(target), TraceAction::Skip, &run.set),
                Vec::new(),
                Vec::new(),
            );
            continue;
        }
        run.transfer(s, target, iteration)?;
        let mut enq_s = Vec::new();
        let mut enq_t = Vec::new();
        // every unvisited neighbour of the just-filled vertex becomes a
        // source, paired with its mirror; parent first, then children
        let mut expand = |w: VertexId| -> Result<()> {
            if visited.contains(w) {
                return Ok(());
            }
            let mw = emb.mirror(w).ok_or_else(|| {
                Error::monitor(
                    "level-mirror-domain",
                    iteration,
                    format!("neighbour {w} has no mirror image"),
                )
            })?;
            if visited.contains(mw) {
                return Err(Error::monitor(
                    "level-pairing",
                    iteration,
                    format!("mirror {mw} of fresh vertex {w} was already visited"),
                ));
            }
            visited.insert(w);
            visited.insert(mw);
            q_s.push_back(w);
            q_t.push_back(mw);
            enq_s.push(w);
            enq_t.push(mw);
            Ok(())
        };
        if let Some(p) = forest.parent(target) {
            expand(p)?;
        }
        for &c in forest.children(target) {
            expand(c)?;
        }
        run.event(
            TraceEvent::new(iteration, Some(s), Some(target), TraceAction::Swap, &run.set),
            enq_s,
            enq_t,
        );
    }
    finish_class_checked(forest, run, set.len(), to, from, "level transfer")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forest_of(specs: &[(usize, usize)]) -> Forest {
        Forest::new(
            specs
                .iter()
                .map(|&(r, h)| RootedTree::perfect(r, h).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn opts() -> MapOptions {
        MapOptions {
            trace: false,
            monitor: true,
        }
    }

    #[test]
    fn parse_forest_blocks_and_offsets() {
        let f = parse_forest("3\n-1 0 0\n\nperfect:2:2\n").unwrap();
        assert_eq!(f.component_count(), 2);
        assert_eq!(f.offset(1), 3);
        assert_eq!(f.locate(4).unwrap(), (1, 1));
        assert_eq!(f.roots(), &[0, 3]);
    }

    #[test]
    fn serialize_roundtrip() {
        let f = forest_of(&[(2, 2), (3, 2)]);
        let back = parse_forest(&f.serialize()).unwrap();
        assert_eq!(back.component_count(), 2);
        assert_eq!(back.vertex_count(), f.vertex_count());
    }

    #[test]
    fn best_leaf_prefers_arity_then_tallest_even() {
        let f = forest_of(&[(2, 3), (3, 2), (3, 4)]);
        let sel = best_leaf(&f).unwrap();
        assert_eq!(sel.tree_index, 2);
        assert_eq!(sel.rule, SelectionRule::AllEvenTallest);
        assert_eq!(sel.leaf, f.leftmost_leaf_of(2));
    }

    #[test]
    fn best_leaf_prefers_minimal_odd_levels() {
        let f = forest_of(&[(3, 3), (3, 4)]);
        let sel = best_leaf(&f).unwrap();
        assert_eq!(sel.tree_index, 0);
        assert_eq!(sel.rule, SelectionRule::ShortestOdd);
    }

    #[test]
    fn best_leaf_single_component() {
        let f = forest_of(&[(2, 2)]);
        let sel = best_leaf(&f).unwrap();
        assert_eq!((sel.tree_index, sel.leaf), (0, 1));
    }

    #[test]
    fn best_leaf_rejects_non_perfect_components() {
        let t = crate::tree::parse_tree("4\n-1 0 0 1\n").unwrap();
        let f = Forest::new(vec![t]).unwrap();
        assert!(best_leaf(&f).is_err());
    }

    #[test]
    fn one_vertex_component_always_wins() {
        let f = Forest::new(vec![
            RootedTree::perfect(2, 1).unwrap(),
            RootedTree::perfect(3, 2).unwrap(),
        ])
        .unwrap();
        let sel = best_leaf(&f).unwrap();
        assert_eq!(sel.tree_index, 0);
        assert_eq!(sel.rule, SelectionRule::ShortestOdd);
        // the isolated vertex's star dominates every other star
        for k in 1..=3 {
            let best = forest_count_star(&f, sel.leaf, k).unwrap();
            for v in 0..f.vertex_count() {
                assert!(forest_count_star(&f, v, k).unwrap() <= best);
            }
        }
    }

    #[test]
    fn forest_star_counts() {
        let f = forest_of(&[(2, 2), (2, 2)]);
        assert_eq!(forest_count_star(&f, 1, 2).unwrap(), BigUint::from(4u32));
        for v in 0..f.vertex_count() {
            assert_eq!(forest_count_star(&f, v, 1).unwrap(), BigUint::from(1u32));
        }
    }

    #[test]
    fn lower_arity_leaf_star_is_dominated() {
        let f = forest_of(&[(2, 2), (3, 2)]);
        let l1 = f.leftmost_leaf_of(0);
        let l2 = f.leftmost_leaf_of(1);
        for k in 1..=4 {
            assert!(
                forest_count_star(&f, l1, k).unwrap() <= forest_count_star(&f, l2, k).unwrap()
            );
        }
    }

    #[test]
    fn arity_map_worked_examples() {
        // components: 2-ary (ids 0,1,2) and 3-ary (ids 3,4,5,6)
        let f = forest_of(&[(2, 2), (3, 2)]);
        let (l1, l2) = (1, 4);

        let out = arity_map(&f, l1, l2, &VertexSet::from_ids(7, &[1, 3]), &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![0, 4]);

        let out = arity_map(&f, l1, l2, &VertexSet::from_ids(7, &[1, 2]), &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![2, 4]);

        let out = arity_map(&f, l1, l2, &VertexSet::from_ids(7, &[1]), &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![4]);
    }

    #[test]
    fn arity_map_rejects_wrong_order_and_class() {
        let f = forest_of(&[(2, 2), (3, 2)]);
        assert!(arity_map(&f, 4, 1, &VertexSet::from_ids(7, &[4]), &opts()).is_err());
        assert!(arity_map(&f, 1, 4, &VertexSet::from_ids(7, &[4]), &opts()).is_err());
        // not the leftmost leaf
        assert!(arity_map(&f, 2, 4, &VertexSet::from_ids(7, &[2]), &opts()).is_err());
    }

    #[test]
    fn arity_map_grandparent_relocation() {
        // 3 levels vs 2 levels is not allowed (leaf parent depth differs is
        // fine; heights may differ for the arity rule): use (2,3) vs (3,3)
        let f = forest_of(&[(2, 3), (3, 3)]);
        let l1 = f.leftmost_leaf_of(0); // 3
        let l2 = f.leftmost_leaf_of(1); // 7 + 4 = 11
        // grandparent of l1 (the 2-ary root) conflicts after the shift
        let set = VertexSet::from_ids(f.vertex_count(), &[l1, 0, f.parent(l2).unwrap()]);
        let out = arity_map(&f, l1, l2, &set, &opts()).unwrap();
        let p1 = f.parent(l1).unwrap();
        let spare = f.children(f.parent(l2).unwrap())[2];
        assert_eq!(out.set.to_vec(), {
            let mut v = vec![p1, spare, l2];
            v.sort_unstable();
            v
        });
    }

    #[test]
    fn embedding_is_a_leaf_anchored_homomorphism() {
        let f = forest_of(&[(2, 2), (2, 3)]);
        let emb = Embedding::between(&f, 0, 1).unwrap();
        assert_eq!(emb.forward(f.leftmost_leaf_of(0)), Some(f.leftmost_leaf_of(1)));
        for v in 0..3 {
            let img = emb.forward(v).unwrap();
            if let Some(p) = f.parent(v) {
                assert_eq!(f.parent(img), emb.forward(p));
            }
            assert_eq!(emb.mirror(img), Some(v));
            assert_eq!(emb.mirror(v), Some(img));
        }
    }

    #[test]
    fn level_map_worked_examples() {
        // even shorter component: perfect(2,2) + perfect(2,3)
        let f = forest_of(&[(2, 2), (2, 3)]);
        let (l1, l2) = (1, f.leftmost_leaf_of(1));
        assert_eq!(l2, 6);

        let out = level_map(&f, l1, l2, &VertexSet::from_ids(10, &[1, 4]), &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![0, 6]);

        let out = level_map(&f, l1, l2, &VertexSet::from_ids(10, &[1, 2]), &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![2, 6]);

        // odd shorter component maps the other way
        let f = forest_of(&[(2, 3), (2, 4)]);
        let (l1, l2) = (3, f.leftmost_leaf_of(1));
        assert_eq!(l2, 14);
        let out = level_map(
            &f,
            l1,
            l2,
            &VertexSet::from_ids(f.vertex_count(), &[l2]),
            &opts(),
        )
        .unwrap();
        assert_eq!(out.set.to_vec(), vec![3]);
    }

    #[test]
    fn level_map_rejects_mismatches() {
        let f = forest_of(&[(2, 2), (3, 3)]);
        assert!(level_map(&f, 1, f.leftmost_leaf_of(1), &VertexSet::from_ids(16, &[1]), &opts()).is_err());
        let f = forest_of(&[(2, 3), (2, 2)]);
        assert!(level_map(&f, 3, 8, &VertexSet::from_ids(10, &[3]), &opts()).is_err());
    }
}
