//! Even-distance star transfer: two pointers walk the leftmost path toward
//! each other, shifting membership upward two steps per round and handing
//! sibling-subtree conflicts to the alternating swap.

use crate::error::{Error, Result};
use crate::set::VertexSet;
use crate::tree::{RootedTree, Topology, VertexId};

use super::cas::cas_on_subtrees;
use super::{finish_class_checked, require_class, MapOptions, MapReport, Run, TraceAction, TraceEvent};

/// Transfers an independent set containing `v` (an ancestor of the leftmost
/// leaf at even distance at least 2) to one containing the leaf instead.
pub fn phi_even(
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
    if dist % 2 != 0 || dist < 2 {
        return Err(Error::pre(format!(
            "even transfer requires an even distance of at least 2 to the leaf, got {dist}"
        )));
    }
    require_class(tree, set, v, leaf, "even transfer input")?;
    let r = shape.arity;

    let mut run = Run::new(set, opts);
    run.transfer(v, leaf, 0)?;
    run.event(
        TraceEvent::new(0, Some(v), Some(leaf), TraceAction::Swap, &run.set),
        Vec::new(),
        Vec::new(),
    );

    let mut allowed = VertexSet::from_ids(tree.vertex_count(), &[v, leaf]);
    let mut d_cur = tree.parent(leaf).expect("leaf below v");
    let mut u_cur = tree.children(v)[0];
    let mut prev: Option<(VertexId, VertexId)> = None;
    let mut iteration: u64 = 0;

    loop {
        iteration += 1;
        if opts.monitor {
            check_invariants(tree, &run, d_cur, u_cur, prev, &allowed, set.len(), iteration)?;
        }
        if !run.set.contains(d_cur) {
            run.event(
                TraceEvent::new(iteration, None, None, TraceAction::Terminate, &run.set),
                Vec::new(),
                Vec::new(),
            );
            break;
        }

        // the lower pointer's membership moves to the upper pointer
        if run.set.contains(u_cur) {
            return Err(Error::monitor(
                "even-upper-clear",
                iteration,
                format!("upper pointer {u_cur} already in the set"),
            ));
        }
        run.transfer(d_cur, u_cur, iteration)?;
        allowed.insert(d_cur);
        allowed.insert(u_cur);
        run.event(
            TraceEvent::new(iteration, Some(d_cur), Some(u_cur), TraceAction::PrimaryShift, &run.set),
            Vec::new(),
            Vec::new(),
        );

        // the off-path sibling subtrees of both pointers are now in play
        for m in 1..r {
            for x in tree.subtree_vertices(tree.children(d_cur)[m]) {
                allowed.insert(x);
            }
            for x in tree.subtree_vertices(tree.children(u_cur)[m]) {
                allowed.insert(x);
            }
        }

        // resolve each sibling conflict by swapping the occupied subtree
        // under the upper pointer with the freed one under the lower pointer
        for m in 1..r {
            let cu = tree.children(u_cur)[m];
            let cd = tree.children(d_cur)[m];
            if !run.set.contains(cu) {
                continue;
            }
            // role check: the freed side must be the odd, strictly lower one
            let lv_d = shape.levels - tree.depth(cd);
            let lv_u = shape.levels - tree.depth(cu);
            if lv_d % 2 == 0 || lv_u <= lv_d {
                return Err(Error::monitor(
                    "even-subcall-roles",
                    iteration,
                    format!("subtree levels {lv_d} (lower) vs {lv_u} (upper)"),
                ));
            }
            if run.set.contains(cd) {
                return Err(Error::monitor(
                    "even-subcall-roles",
                    iteration,
                    format!("freed subtree root {cd} is occupied"),
                ));
            }
            run.event(
                TraceEvent::new(iteration, Some(cu), Some(cd), TraceAction::CasCall, &run.set),
                Vec::new(),
                Vec::new(),
            );
            cas_on_subtrees(tree, cd, cu, &mut run)?;
        }

        // the upper pointer's first child may now conflict; push it to the
        // lower pointer's freed parent
        let c1u = tree.children(u_cur)[0];
        if !run.set.contains(c1u) {
            run.event(
                TraceEvent::new(iteration, None, None, TraceAction::Terminate, &run.set),
                Vec::new(),
                Vec::new(),
            );
            break;
        }
        let pd = tree.parent(d_cur).expect("lower pointer sits below v");
        if c1u == pd {
            return Err(Error::monitor(
                "even-secondary",
                iteration,
                format!("pointers met at {pd} with an unresolved conflict"),
            ));
        }
        run.transfer(c1u, pd, iteration)?;
        allowed.insert(c1u);
        allowed.insert(pd);
        run.event(
            TraceEvent::new(iteration, Some(c1u), Some(pd), TraceAction::SecondaryShift, &run.set),
            Vec::new(),
            Vec::new(),
        );

        prev = Some((d_cur, u_cur));
        d_cur = tree.parent(pd).ok_or_else(|| {
            Error::monitor("even-pointer-recurrence", iteration, "lower pointer left the tree")
        })?;
        u_cur = tree.children(c1u).first().copied().ok_or_else(|| {
            Error::monitor("even-pointer-recurrence", iteration, "upper pointer hit a leaf")
        })?;
    }
    finish_class_checked(tree, run, set.len(), leaf, v, "even transfer")
}

#[allow(clippy::too_many_arguments)]
fn check_invariants(
    tree: &RootedTree,
    run: &Run,
    d_cur: VertexId,
    u_cur: VertexId,
    prev: Option<(VertexId, VertexId)>,
    allowed: &VertexSet,
    total: usize,
    iteration: u64,
) -> Result<()> {
    let fail = |name: &'static str, detail: String| Err(Error::monitor(name, iteration, detail));

    if run.set.len() != total {
        return fail("even-size", format!("set size drifted to {}", run.set.len()));
    }

    // pointer recurrence: two steps up, two first-child steps down, closing
    // the gap by exactly four per completed round
    if let Some((dp, up)) = prev {
        let want_d = tree.parent(dp).and_then(|x| tree.parent(x));
        if want_d != Some(d_cur) {
            return fail("even-pointer-recurrence", format!("lower pointer at {d_cur}"));
        }
        let want_u = tree
            .children(up)
            .first()
            .and_then(|&x| tree.children(x).first().copied());
        if want_u != Some(u_cur) {
            return fail("even-pointer-recurrence", format!("upper pointer at {u_cur}"));
        }
        let gap_prev = tree.depth(dp) - tree.depth(up);
        let gap_now = tree.depth(d_cur) - tree.depth(u_cur);
        if gap_prev != gap_now + 4 {
            return fail(
                "even-pointer-recurrence",
                format!("gap went from {gap_prev} to {gap_now}"),
            );
        }
    }
    if !tree.is_ancestor_or_self(u_cur, d_cur) {
        return fail(
            "even-pointer-order",
            format!("lower pointer {d_cur} is not under upper pointer {u_cur}"),
        );
    }

    // the upper pointer and its parent stay clear until the shift
    if run.set.contains(u_cur) {
        return fail("even-upper-clear", format!("upper pointer {u_cur} in the set"));
    }
    if let Some(p) = tree.parent(u_cur) {
        if run.set.contains(p) {
            return fail("even-upper-clear", format!("parent {p} of the upper pointer in the set"));
        }
    }

    // only the initial pair, processed pointers, their off-path sibling
    // subtrees, and completed shift endpoints may have been modified
    if !run.modified.is_subset(allowed) {
        let stray = run.modified.iter().find(|&v| !allowed.contains(v)).unwrap();
        return fail("even-modified-region", format!("vertex {stray} modified out of region"));
    }

    // the working set is independent except for at most the one edge from
    // the lower pointer to its first child
    for x in 0..tree.vertex_count() {
        if !run.set.contains(x) {
            continue;
        }
        if let Some(p) = tree.parent(x) {
            if run.set.contains(p) && !(p == d_cur && x == tree.children(d_cur)[0]) {
                return fail("even-near-independent", format!("unexpected edge {p}-{x}"));
            }
        }
    }
    Ok(())
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
    fn immediate_termination_when_the_leaf_parent_is_free() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let set = VertexSet::from_ids(7, &[0, 4]);
        let out = phi_even(&t, 0, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![3, 4]);
    }

    #[test]
    fn single_round_path_shift() {
        let t = RootedTree::perfect(2, 5).unwrap();
        let set = VertexSet::from_ids(31, &[0, 7]);
        let out = phi_even(&t, 0, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![1, 15]);
    }

    #[test]
    fn sibling_conflict_resolved_by_subtree_swap() {
        let t = RootedTree::perfect(2, 5).unwrap();
        let set = VertexSet::from_ids(31, &[0, 7, 4]);
        let out = phi_even(&t, 0, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![1, 15, 16]);
        let actions: Vec<TraceAction> = out.trace.iter().map(|e| e.action).collect();
        assert!(actions.contains(&TraceAction::CasCall));
    }

    #[test]
    fn two_round_run_with_secondary_shift() {
        let t = RootedTree::perfect(2, 7).unwrap();
        let set = VertexSet::from_ids(127, &[0, 31, 3]);
        let out = phi_even(&t, 0, &set, &opts()).unwrap();
        assert_eq!(out.set.to_vec(), vec![1, 15, 63]);
        let actions: Vec<TraceAction> = out.trace.iter().map(|e| e.action).collect();
        assert!(actions.contains(&TraceAction::SecondaryShift));
    }

    #[test]
    fn rejects_odd_distance_and_bad_class() {
        let t = RootedTree::perfect(2, 4).unwrap();
        let set = VertexSet::from_ids(15, &[0, 4]);
        assert!(phi_even(&t, 0, &set, &opts()).is_err()); // distance 3 is odd

        let t = RootedTree::perfect(2, 3).unwrap();
        let set = VertexSet::from_ids(7, &[0, 3]);
        assert!(phi_even(&t, 0, &set, &opts()).is_err()); // leaf in the set
        let set = VertexSet::from_ids(7, &[1]);
        assert!(phi_even(&t, 0, &set, &opts()).is_err()); // v not in the set
    }

    #[test]
    fn exhaustive_validity_on_perfect_2_5() {
        let t = RootedTree::perfect(2, 5).unwrap();
        let leaf = 15;
        for k in 1..=6 {
            crate::count::for_each_independent_set(&t, k, &[0], &[leaf], |set| {
                let out = phi_even(&t, 0, set, &opts()).unwrap();
                assert_eq!(out.set.len(), k);
                assert!(is_independent(&t, &out.set));
                assert!(out.set.contains(leaf) && !out.set.contains(0));
                for v in 0..31 {
                    if !out.touched.contains(v) {
                        assert_eq!(set.contains(v), out.set.contains(v));
                    }
                }
            })
            .unwrap();
        }
    }
}
