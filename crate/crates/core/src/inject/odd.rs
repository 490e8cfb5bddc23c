//! Odd-distance star transfer: a synchronized breadth-first pass matching
//! conflicts near the leaf with free positions near the vacated vertex. Two
//! regions grow around the endpoints; each dequeued source is paired with a
//! target in the opposite region.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::set::VertexSet;
use crate::tree::{RootedTree, Topology, VertexId};

use super::{finish_class_checked, require_class, MapOptions, MapReport, Run, TraceAction, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    /// Grown from the leaf end.
    Leaf,
    /// Grown from the vacated vertex.
    Vacated,
}

struct Queues {
    q_s: VecDeque<VertexId>,
    q_t: VecDeque<VertexId>,
    in_s: VertexSet,
    in_t: VertexSet,
    ever: VertexSet,
    region: Vec<Option<Region>>,
}

impl Queues {
    fn push(&mut self, source_side: bool, x: VertexId, region: Region, iteration: u64) -> Result<()> {
        if !self.ever.insert(x) {
            return Err(Error::monitor(
                "odd-queue-once",
                iteration,
                format!("vertex {x} enqueued twice"),
            ));
        }
        if self.region[x].is_some() {
            return Err(Error::monitor(
                "odd-region-overlap",
                iteration,
                format!("fresh queue entry {x} already belongs to a region"),
            ));
        }
        self.region[x] = Some(region);
        if source_side {
            self.in_s.insert(x);
            self.q_s.push_back(x);
        } else {
            self.in_t.insert(x);
            self.q_t.push_back(x);
        }
        Ok(())
    }
}

/// Transfers an independent set containing `v` (an ancestor of the leftmost
/// leaf at odd distance) to one containing the leaf instead.
pub fn phi_odd(
    tree: &RootedTree,
    v: VertexId,
    set: &VertexSet,
    opts: &MapOptions,
) -> Result<MapReport> {
    tree.check_vertex(v)?;
    let shape = tree.require_shape()?;
    let path = tree.leftmost_path(v)?;
    let leaf = *path.last().unwrap();
    let dist = path.len() - 1;
    if dist % 2 != 1 {
        return Err(Error::pre(format!(
            "odd transfer requires an odd distance to the leaf, got {dist}"
        )));
    }
    require_class(tree, set, v, leaf, "odd transfer input")?;
    let n = tree.vertex_count();
    let r = shape.arity;
    debug_assert!(r >= 2, "odd distance implies at least two levels");

    let path_set = VertexSet::from_ids(n, &path);
    let dist_leaf = distances_from(tree, leaf);

    let mut run = Run::new(set, opts);
    run.transfer(v, leaf, 0)?;
    run.event(
        TraceEvent::new(0, Some(v), Some(leaf), TraceAction::Swap, &run.set),
        Vec::new(),
        Vec::new(),
    );

    let p_leaf = tree.parent(leaf).expect("leaf below v");
    let c2v = tree.children(v)[1];
    let mut queues = Queues {
        q_s: VecDeque::new(),
        q_t: VecDeque::new(),
        in_s: VertexSet::new(n),
        in_t: VertexSet::new(n),
        ever: VertexSet::new(n),
        region: vec![None; n],
    };
    queues.region[v] = Some(Region::Vacated);
    queues.region[leaf] = Some(Region::Leaf);
    // the degenerate distance-1 case puts the vacated vertex itself at the
    // queue head; it keeps its region and is exempt from the fresh-entry rule
    queues.ever.insert(p_leaf);
    if p_leaf != v {
        queues.region[p_leaf] = Some(Region::Leaf);
    }
    queues.in_s.insert(p_leaf);
    queues.q_s.push_back(p_leaf);
    queues.push(false, c2v, Region::Vacated, 0)?;

    let degenerate = p_leaf == v;
    let mut iteration: u64 = 0;

    loop {
        iteration += 1;
        if opts.monitor {
            check_invariants(
                tree, &run, &queues, &path_set, &dist_leaf, set.len(), degenerate, iteration,
            )?;
        }
        let Some(s) = queues.q_s.pop_front() else {
            run.event(
                TraceEvent::new(iteration, None, None, TraceAction::Terminate, &run.set),
                Vec::new(),
                Vec::new(),
            );
            break;
        };
        let t = queues.q_t.pop_front().ok_or_else(|| {
            Error::monitor("odd-queue-sizes", iteration, "target queue empty early")
        })?;
        queues.in_s.remove(s);
        queues.in_t.remove(t);

        if !run.set.contains(s) {
            run.event(
                TraceEvent::new(iteration, Some(s), Some(t), TraceAction::Skip, &run.set),
                Vec::new(),
                Vec::new(),
            );
            continue;
        }

        // the dequeued source has exactly one conflicting neighbour, either
        // its first child or its parent
        let conflicts = tree
            .neighbors(s)
            .into_iter()
            .filter(|&x| run.set.contains(x))
            .count();
        if conflicts != 1 {
            return Err(Error::monitor(
                "odd-conflict-unique",
                iteration,
                format!("source {s} has {conflicts} conflicting neighbours"),
            ));
        }
        let first_child = tree.children(s).first().copied();
        let below = first_child.is_some_and(|c| run.set.contains(c));
        if !below && !tree.parent(s).is_some_and(|p| run.set.contains(p)) {
            return Err(Error::monitor(
                "odd-conflict-unique",
                iteration,
                format!("conflict at {s} is neither its first child nor its parent"),
            ));
        }

        run.transfer(s, t, iteration)?;
        let mut enq_s = Vec::new();
        let mut enq_t = Vec::new();
        let region_s = queues.region[s];
        let region_t = queues.region[t];
        let expand = !tree.children(t).is_empty();
        if expand && tree.children(s).len() != r {
            return Err(Error::monitor(
                "odd-expansion",
                iteration,
                format!("source {s} is a leaf but expansion is due"),
            ));
        }

        if below {
            // conflict below: the source sits on the path in the leaf
            // region, the target in the vacated one
            if region_s != Some(Region::Leaf) || !path_set.contains(s) {
                return Err(Error::monitor(
                    "odd-case-dispatch",
                    iteration,
                    format!("child conflict at {s} off the leaf-region path"),
                ));
            }
            if region_t != Some(Region::Vacated) {
                return Err(Error::monitor(
                    "odd-pair-regions",
                    iteration,
                    format!("target {t} not in the vacated region"),
                ));
            }
            if expand {
                for m in 1..r {
                    push_pair(&mut queues, tree.children(t)[m], Region::Vacated,
                              tree.children(s)[m], Region::Leaf,
                              &mut enq_s, &mut enq_t, iteration)?;
                }
                let p_s = tree.parent(s).filter(|&p| p != v).ok_or_else(|| {
                    Error::monitor(
                        "odd-case-dispatch",
                        iteration,
                        format!("path source {s} has no usable parent"),
                    )
                })?;
                // parent of the source joins the targets, first child of the
                // target joins the sources
                queues.push(false, p_s, Region::Leaf, iteration)?;
                enq_t.push(p_s);
                queues.push(true, tree.children(t)[0], Region::Vacated, iteration)?;
                enq_s.push(tree.children(t)[0]);
            }
        } else if region_s == Some(Region::Leaf) {
            // conflict above, still in the leaf region
            if region_t != Some(Region::Vacated) {
                return Err(Error::monitor(
                    "odd-pair-regions",
                    iteration,
                    format!("target {t} not in the vacated region"),
                ));
            }
            if expand {
                for m in 0..r {
                    push_pair(&mut queues, tree.children(t)[m], Region::Vacated,
                              tree.children(s)[m], Region::Leaf,
                              &mut enq_s, &mut enq_t, iteration)?;
                }
            }
        } else {
            // source in the vacated region; its conflict is its parent
            if region_s != Some(Region::Vacated) {
                return Err(Error::monitor(
                    "odd-case-dispatch",
                    iteration,
                    format!("source {s} has no region"),
                ));
            }
            if region_t != Some(Region::Leaf) {
                return Err(Error::monitor(
                    "odd-pair-regions",
                    iteration,
                    format!("target {t} not in the leaf region"),
                ));
            }
            if expand {
                for m in 1..r {
                    push_pair(&mut queues, tree.children(t)[m], Region::Leaf,
                              tree.children(s)[m], Region::Vacated,
                              &mut enq_s, &mut enq_t, iteration)?;
                }
                if path_set.contains(t) {
                    let p_t = tree.parent(t).ok_or_else(|| {
                        Error::monitor(
                            "odd-case-dispatch",
                            iteration,
                            format!("path target {t} has no parent"),
                        )
                    })?;
                    // the walk up the path stops at the vacated vertex
                    if p_t != v {
                        queues.push(true, p_t, Region::Leaf, iteration)?;
                        enq_s.push(p_t);
                        queues.push(false, tree.children(s)[0], Region::Vacated, iteration)?;
                        enq_t.push(tree.children(s)[0]);
                    }
                } else {
                    queues.push(true, tree.children(t)[0], Region::Leaf, iteration)?;
                    enq_s.push(tree.children(t)[0]);
                    queues.push(false, tree.children(s)[0], Region::Vacated, iteration)?;
                    enq_t.push(tree.children(s)[0]);
                }
            }
        }
        run.event(
            TraceEvent::new(iteration, Some(s), Some(t), TraceAction::Swap, &run.set),
            enq_s,
            enq_t,
        );
    }
    finish_class_checked(tree, run, set.len(), leaf, v, "odd transfer")
}

#[allow(clippy::too_many_arguments)]
fn push_pair(
    queues: &mut Queues,
    to_s: VertexId,
    to_s_region: Region,
    to_t: VertexId,
    to_t_region: Region,
    enq_s: &mut Vec<VertexId>,
    enq_t: &mut Vec<VertexId>,
    iteration: u64,
) -> Result<()> {
    queues.push(true, to_s, to_s_region, iteration)?;
    enq_s.push(to_s);
    queues.push(false, to_t, to_t_region, iteration)?;
    enq_t.push(to_t);
    Ok(())
}

fn distances_from(tree: &RootedTree, start: VertexId) -> Vec<usize> {
    let n = tree.vertex_count();
    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for y in tree.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

#[allow(clippy::too_many_arguments)]
fn check_invariants(
    tree: &RootedTree,
    run: &Run,
    queues: &Queues,
    path_set: &VertexSet,
    dist_leaf: &[usize],
    total: usize,
    degenerate: bool,
    iteration: u64,
) -> Result<()> {
    let fail = |name: &'static str, detail: String| Err(Error::monitor(name, iteration, detail));
    let n = tree.vertex_count();

    if queues.q_s.len() != queues.q_t.len() {
        return fail(
            "odd-queue-sizes",
            format!("{} vs {}", queues.q_s.len(), queues.q_t.len()),
        );
    }
    if run.set.len() != total {
        return fail("odd-queue-sizes", format!("set size drifted to {}", run.set.len()));
    }

    // the two regions are disjoint connected subtrees, and queue members are
    // unmodified leaves of their region
    for region in [Region::Leaf, Region::Vacated] {
        let members: Vec<VertexId> = (0..n).filter(|&x| queues.region[x] == Some(region)).collect();
        if !induced_connected(tree, &members, &queues.region, region) {
            return fail("odd-region-subtrees", format!("{region:?} region disconnected"));
        }
    }
    for x in queues.q_s.iter().chain(queues.q_t.iter()) {
        let Some(region) = queues.region[*x] else {
            return fail("odd-region-subtrees", format!("queued vertex {x} has no region"));
        };
        let induced = tree
            .neighbors(*x)
            .into_iter()
            .filter(|&y| queues.region[y] == Some(region))
            .count();
        if induced > 1 {
            return fail(
                "odd-region-subtrees",
                format!("queue member {x} is interior to its region"),
            );
        }
        if run.modified.contains(*x) && !(degenerate && queues.region[*x] == Some(Region::Vacated)) {
            return fail("odd-region-subtrees", format!("queue member {x} already modified"));
        }
    }

    // every conflicting edge is covered by a queued source, and a queued
    // source that is itself in the set conflicts with exactly one neighbour:
    // its first child (leaf region, on the path) or its parent
    for x in 0..n {
        if !run.set.contains(x) {
            continue;
        }
        if let Some(p) = tree.parent(x) {
            if run.set.contains(p) && !queues.in_s.contains(x) && !queues.in_s.contains(p) {
                return fail(
                    "odd-conflict-cover",
                    format!("edge {p}-{x} not covered by the source queue"),
                );
            }
        }
    }
    for x in queues.q_s.iter().copied() {
        if !run.set.contains(x) {
            continue;
        }
        let hits: Vec<VertexId> = tree
            .neighbors(x)
            .into_iter()
            .filter(|&y| run.set.contains(y))
            .collect();
        if hits.len() != 1 {
            return fail(
                "odd-conflict-unique",
                format!("queued source {x} has {} conflicts", hits.len()),
            );
        }
        let first_child = tree.children(x).first().copied();
        let is_below = Some(hits[0]) == first_child;
        let is_above = Some(hits[0]) == tree.parent(x);
        if !is_below && !is_above {
            return fail(
                "odd-conflict-unique",
                format!("conflict of {x} at {}", hits[0]),
            );
        }
        let on_leaf_path = queues.region[x] == Some(Region::Leaf) && path_set.contains(x);
        if is_below != on_leaf_path {
            return fail(
                "odd-conflict-unique",
                format!("conflict direction at {x} disagrees with its region"),
            );
        }
    }

    // targets stay clear of the set
    for x in queues.q_t.iter() {
        if run.set.contains(*x) {
            return fail("odd-target-clear", format!("target {x} is in the set"));
        }
    }

    // sources sit at odd distance from the leaf, targets at even distance
    for x in queues.q_s.iter() {
        if dist_leaf[*x] % 2 == 0 {
            return fail("odd-parity", format!("source {x} at even distance from the leaf"));
        }
    }
    for x in queues.q_t.iter() {
        if dist_leaf[*x] % 2 == 1 {
            return fail("odd-parity", format!("target {x} at odd distance from the leaf"));
        }
    }

    // the front pair straddles the two regions; in the degenerate
    // distance-1 case the vacated vertex itself heads the source queue
    if let (Some(&s), Some(&t)) = (queues.q_s.front(), queues.q_t.front()) {
        if queues.region[s] == queues.region[t] && !(degenerate && run.modified.contains(s)) {
            return fail("odd-pair-regions", format!("front pair {s},{t} in one region"));
        }
    }
    Ok(())
}

fn induced_connected(
    tree: &RootedTree,
    members: &[VertexId],
    region: &[Option<Region>],
    which: Region,
) -> bool {
    let Some(&start) = members.first() else {
        return true;
    };
    let mut seen = VertexSet::new(tree.vertex_count());
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        for y in tree.neighbors(x) {
            if region[y] == Some(which) && seen.insert(y) {
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    reached == members.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::is_independent;

    fn opts() -> MapOptions {
        MapOptions {
            trace: true,
            monitor: true,
        }
    }

    #[test]
    fn child_conflict_swaps_into_the_sibling_subtree() {
        let t = RootedTree::perfect(2, 4).unwrap();
        let set = VertexSet::from_ids(15, &[0, 3]);
        let out = phi_odd(&t, 0, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![2, 7]);
    }

    #[test]
    fn second_swap_hits_the_vacated_region_case() {
        let t = RootedTree::perfect(2, 4).unwrap();
        let set = VertexSet::from_ids(15, &[0, 3, 5]);
        let out = phi_odd(&t, 0, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![1, 2, 7]);
    }

    #[test]
    fn degenerate_distance_one() {
        let t = RootedTree::perfect(2, 2).unwrap();
        let set = VertexSet::from_ids(3, &[0]);
        let out = phi_odd(&t, 0, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![1]);

        // distance one from deeper vertices too
        let t = RootedTree::perfect(2, 3).unwrap();
        let set = VertexSet::from_ids(7, &[1, 5]);
        let out = phi_odd(&t, 1, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![3, 5]);
    }

    #[test]
    fn rejects_even_distance() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let set = VertexSet::from_ids(7, &[0]);
        assert!(phi_odd(&t, 0, &set, &opts()).is_err());
    }

    #[test]
    fn exhaustive_validity_on_perfect_2_4() {
        let t = RootedTree::perfect(2, 4).unwrap();
        let leaf = 7;
        for v in [0usize, 3] {
            for k in 1..=6 {
                crate::count::for_each_independent_set(&t, k, &[v], &[leaf], |set| {
                    let out = phi_odd(&t, v, set, &opts()).unwrap();
                    assert_eq!(out.set.len(), k);
                    assert!(is_independent(&t, &out.set));
                    assert!(out.set.contains(leaf) && !out.set.contains(v));
                    for x in 0..15 {
                        if !out.touched.contains(x) {
                            assert_eq!(set.contains(x), out.set.contains(x));
                        }
                    }
                })
                .unwrap();
            }
        }
    }

    #[test]
    fn exhaustive_injectivity_on_perfect_3_2() {
        let t = RootedTree::perfect(3, 2).unwrap();
        for k in 1..=3 {
            let mut images = Vec::new();
            crate::count::for_each_independent_set(&t, k, &[0], &[1], |set| {
                images.push(phi_odd(&t, 0, set, &opts()).unwrap().set.as_key());
            })
            .unwrap();
            let total = images.len();
            images.sort_unstable();
            images.dedup();
            assert_eq!(images.len(), total);
        }
    }
}
