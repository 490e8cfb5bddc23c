//! The conditional alternating swap: transfers set membership from the root
//! of a taller perfect tree to the root of a lower one (with an odd number of
//! levels), resolving conflicts level by level through two synchronized
//! queues that alternate between the two trees.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::set::VertexSet;
use crate::tree::{RootedTree, Topology, VertexId};

use super::{MapOptions, MapReport, Run, TraceAction, TraceEvent};

/// The two subtrees a swap run works over, with structural metadata.
struct Scope {
    d_root: VertexId,
    u_root: VertexId,
    arity: usize,
    d_levels: usize,
    scope: Vec<VertexId>,
    in_scope: VertexSet,
    /// Distance to the own subtree root; meaningful only inside the scope.
    dist: Vec<usize>,
    d_side: VertexSet,
}

impl Scope {
    fn build<H: Topology>(host: &H, d_root: VertexId, u_root: VertexId) -> Result<Self> {
        let n = host.vertex_count();
        let mut dist = vec![0usize; n];
        let mut in_scope = VertexSet::new(n);
        let mut d_side = VertexSet::new(n);
        let mut scope = Vec::new();

        let mut walk = |root: VertexId, mark_d: bool| -> Result<(usize, usize)> {
            host.check_vertex(root)?;
            let mut levels = 1;
            let mut stack = vec![root];
            dist[root] = 0;
            while let Some(v) = stack.pop() {
                if !in_scope.insert(v) {
                    return Err(Error::pre(format!(
                        "swap subtrees overlap at vertex {v}"
                    )));
                }
                if mark_d {
                    d_side.insert(v);
                }
                scope.push(v);
                for &c in host.children(v) {
                    dist[c] = dist[v] + 1;
                    levels = levels.max(dist[c] + 1);
                    stack.push(c);
                }
            }
            let arity = host.children(root).len();
            Ok((levels, arity))
        };

        let (d_levels, d_arity) = walk(d_root, true)?;
        let (u_levels, u_arity) = walk(u_root, false)?;

        if d_levels % 2 == 0 {
            return Err(Error::pre(format!(
                "swap requires an odd level count on the lower tree, got {d_levels}"
            )));
        }
        if u_levels <= d_levels {
            return Err(Error::pre(format!(
                "swap requires the upper tree to have more levels ({u_levels} <= {d_levels})"
            )));
        }
        if d_levels > 1 && d_arity != u_arity {
            return Err(Error::pre(format!(
                "swap requires equal arity, got {d_arity} and {u_arity}"
            )));
        }
        let arity = u_arity;

        // both sides must be perfect: uniform leaf depth, uniform arity
        for &v in &scope {
            let levels = if d_side.contains(v) { d_levels } else { u_levels };
            let c = host.children(v).len();
            if c == 0 {
                if dist[v] != levels - 1 {
                    return Err(Error::pre(format!(
                        "swap subtree is not perfect: leaf {v} at distance {}",
                        dist[v]
                    )));
                }
            } else if c != arity {
                return Err(Error::pre(format!(
                    "swap subtree is not perfect: vertex {v} has {c} children"
                )));
            }
        }

        Ok(Scope {
            d_root,
            u_root,
            arity,
            d_levels,
            scope,
            in_scope,
            dist,
            d_side,
        })
    }

    fn parent_within<H: Topology>(&self, host: &H, v: VertexId) -> Option<VertexId> {
        if v == self.d_root || v == self.u_root {
            None
        } else {
            host.parent(v)
        }
    }

    fn is_d_side_leaf(&self, v: VertexId) -> bool {
        self.d_side.contains(v) && self.dist[v] == self.d_levels - 1
    }
}

struct Queues {
    q_s: VecDeque<VertexId>,
    q_t: VecDeque<VertexId>,
    in_s: VertexSet,
    in_t: VertexSet,
    ever: VertexSet,
}

impl Queues {
    fn new(n: usize, s0: VertexId, t0: VertexId) -> Self {
        let mut q = Queues {
            q_s: VecDeque::new(),
            q_t: VecDeque::new(),
            in_s: VertexSet::new(n),
            in_t: VertexSet::new(n),
            ever: VertexSet::new(n),
        };
        q.push_s(s0, 0).unwrap();
        q.push_t(t0, 0).unwrap();
        q
    }

    fn push_s(&mut self, v: VertexId, iteration: u64) -> Result<()> {
        if !self.ever.insert(v) {
            return Err(Error::monitor(
                "cas-queue-once",
                iteration,
                format!("vertex {v} enqueued twice"),
            ));
        }
        self.in_s.insert(v);
        self.q_s.push_back(v);
        Ok(())
    }

    fn push_t(&mut self, v: VertexId, iteration: u64) -> Result<()> {
        if !self.ever.insert(v) {
            return Err(Error::monitor(
                "cas-queue-once",
                iteration,
                format!("vertex {v} enqueued twice"),
            ));
        }
        self.in_t.insert(v);
        self.q_t.push_back(v);
        Ok(())
    }
}

/// Swap between the roots of two disjoint perfect trees, presented as one
/// two-component forest with the lower tree first. The input set must
/// contain the upper root and avoid the lower root; the output contains the
/// lower root, avoids the upper one, and has the same size.
pub fn cas(
    lower: &RootedTree,
    upper: &RootedTree,
    set: &VertexSet,
    opts: &MapOptions,
) -> Result<MapReport> {
    lower.require_shape()?;
    upper.require_shape()?;
    let pair = Forest::new(vec![lower.clone(), upper.clone()])?;
    let d_root = pair.global_id(0, lower.root())?;
    let u_root = pair.global_id(1, upper.root())?;
    super::require_class(&pair, set, u_root, d_root, "swap input")?;
    let mut run = Run::new(set, opts);
    cas_on_subtrees(&pair, d_root, u_root, &mut run)?;
    Ok(run.finish())
}

/// Runs the swap over the subtrees of `host` rooted at `d_root` and
/// `u_root`, mutating `run.set` in place. Used directly by the even-distance
/// transfer for its per-sibling sub-calls.
pub(crate) fn cas_on_subtrees<H: Topology>(
    host: &H,
    d_root: VertexId,
    u_root: VertexId,
    run: &mut Run,
) -> Result<()> {
    let scope = Scope::build(host, d_root, u_root)?;
    if !run.set.contains(u_root) {
        return Err(Error::pre(format!(
            "swap requires the upper root {u_root} in the set"
        )));
    }
    if run.set.contains(d_root) {
        return Err(Error::pre(format!(
            "swap requires the lower root {d_root} outside the set"
        )));
    }
    for &v in &scope.scope {
        if run.set.contains(v) {
            for &c in host.children(v) {
                if run.set.contains(c) {
                    return Err(Error::pre(format!(
                        "swap input is not independent: edge {v}-{c}"
                    )));
                }
            }
        }
    }

    let total = run.set.len();
    let mut queues = Queues::new(run.set.capacity(), u_root, d_root);
    let mut local_modified = VertexSet::new(run.set.capacity());
    let mut iteration: u64 = 0;

    loop {
        iteration += 1;
        if run.opts.monitor {
            check_invariants(host, &scope, &queues, &run.set, &local_modified, total, iteration)?;
        }
        let Some(s) = queues.q_s.pop_front() else {
            run.event(
                TraceEvent::new(iteration, None, None, TraceAction::Terminate, &run.set),
                Vec::new(),
                Vec::new(),
            );
            return Ok(());
        };
        let t = queues.q_t.pop_front().ok_or_else(|| {
            Error::monitor("cas-queue-sizes", iteration, "target queue empty early")
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

        run.transfer(s, t, iteration)?;
        local_modified.insert(s);
        local_modified.insert(t);

        let mut enq_s = Vec::new();
        let mut enq_t = Vec::new();
        if scope.d_side.contains(s) == scope.d_side.contains(t) {
            return Err(Error::monitor(
                "cas-pair-alignment",
                iteration,
                format!("dequeued pair {s},{t} on the same side"),
            ));
        }
        if !scope.is_d_side_leaf(t) {
            // both must be internal in their own subtrees
            if host.children(s).len() != scope.arity || host.children(t).len() != scope.arity {
                return Err(Error::monitor(
                    "cas-expansion",
                    iteration,
                    format!("dequeued pair {s},{t} not both internal"),
                ));
            }
            for j in 0..scope.arity {
                let cs = host.children(s)[j];
                let ct = host.children(t)[j];
                queues.push_t(cs, iteration)?;
                queues.push_s(ct, iteration)?;
                enq_t.push(cs);
                enq_s.push(ct);
            }
        }
        run.event(
            TraceEvent::new(iteration, Some(s), Some(t), TraceAction::Swap, &run.set),
            enq_s,
            enq_t,
        );
    }
}

fn check_invariants<H: Topology>(
    host: &H,
    scope: &Scope,
    queues: &Queues,
    set: &VertexSet,
    local_modified: &VertexSet,
    total: usize,
    iteration: u64,
) -> Result<()> {
    let fail = |name: &'static str, detail: String| Err(Error::monitor(name, iteration, detail));

    // queue sizes match and the set never changes size
    if queues.q_s.len() != queues.q_t.len() {
        return fail(
            "cas-queue-sizes",
            format!("{} vs {}", queues.q_s.len(), queues.q_t.len()),
        );
    }
    if set.len() != total {
        return fail("cas-queue-sizes", format!("set size drifted to {}", set.len()));
    }

    // everything ever queued forms two root-anchored subtrees, and current
    // queue members are unvisited leaves of that region
    for v in queues.ever.iter() {
        if !scope.in_scope.contains(v) {
            return fail("cas-visited-region", format!("vertex {v} outside the scope"));
        }
        if let Some(p) = scope.parent_within(host, v) {
            if !queues.ever.contains(p) {
                return fail(
                    "cas-visited-region",
                    format!("queued vertex {v} with unqueued parent {p}"),
                );
            }
        }
    }
    for x in queues.q_s.iter().chain(queues.q_t.iter()) {
        if host.children(*x).iter().any(|c| queues.ever.contains(*c)) {
            return fail(
                "cas-visited-region",
                format!("queue member {x} is not a leaf of the visited region"),
            );
        }
        if local_modified.contains(*x) {
            return fail("cas-visited-region", format!("queue member {x} already modified"));
        }
    }

    // a conflict edge always has its child endpoint in the source queue
    for &v in &scope.scope {
        if set.contains(v) {
            if let Some(p) = scope.parent_within(host, v) {
                if set.contains(p) && !queues.in_s.contains(v) {
                    return fail(
                        "cas-conflict-cover",
                        format!("conflict edge {p}-{v} not covered by the source queue"),
                    );
                }
            }
        }
    }

    // target queue members and their parents are clear of the set
    for x in queues.q_t.iter() {
        if set.contains(*x) {
            return fail("cas-target-clear", format!("target {x} is in the set"));
        }
        if let Some(p) = scope.parent_within(host, *x) {
            if set.contains(p) {
                return fail(
                    "cas-target-clear",
                    format!("parent {p} of target {x} is in the set"),
                );
            }
        }
    }

    // on the lower side, sources sit at odd depth and targets at even depth
    for x in queues.q_s.iter() {
        if scope.d_side.contains(*x) && scope.dist[*x] % 2 == 0 {
            return fail("cas-parity", format!("source {x} at even depth in the lower tree"));
        }
    }
    for x in queues.q_t.iter() {
        if scope.d_side.contains(*x) && scope.dist[*x] % 2 == 1 {
            return fail("cas-parity", format!("target {x} at odd depth in the lower tree"));
        }
    }

    // the front pair straddles the two trees at equal depth
    if let (Some(&s), Some(&t)) = (queues.q_s.front(), queues.q_t.front()) {
        if scope.d_side.contains(s) == scope.d_side.contains(t) {
            return fail("cas-pair-alignment", format!("front pair {s},{t} on the same side"));
        }
        if scope.dist[s] != scope.dist[t] {
            return fail(
                "cas-pair-alignment",
                format!(
                    "front pair depths differ: {} vs {}",
                    scope.dist[s], scope.dist[t]
                ),
            );
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

    /// Lower tree: 3 levels (ids 0..=6); upper tree: 4 levels (ids 7..=21).
    fn figure_pair() -> (RootedTree, RootedTree) {
        (
            RootedTree::perfect(2, 3).unwrap(),
            RootedTree::perfect(2, 4).unwrap(),
        )
    }

    #[test]
    fn worked_example_swap_sequence() {
        let (lower, upper) = figure_pair();
        // upper-tree vertices are offset by 7
        let set = VertexSet::from_ids(22, &[1, 5, 7, 10, 11, 18, 19, 20, 21]);
        let report = cas(&lower, &upper, &set, &opts()).unwrap();
        assert_eq!(report.set.to_vec(), vec![0, 3, 4, 5, 8, 18, 19, 20, 21]);

        let swaps: Vec<(usize, usize)> = report
            .trace
            .iter()
            .filter(|e| e.action == TraceAction::Swap)
            .map(|e| (e.s.unwrap(), e.t.unwrap()))
            .collect();
        assert_eq!(swaps, vec![(7, 0), (1, 8), (10, 3), (11, 4)]);
        let skips: Vec<usize> = report
            .trace
            .iter()
            .filter(|e| e.action == TraceAction::Skip)
            .map(|e| e.s.unwrap())
            .collect();
        assert_eq!(skips, vec![2]);
    }

    #[test]
    fn lone_root_moves_down() {
        let (lower, upper) = figure_pair();
        let set = VertexSet::from_ids(22, &[7]);
        let report = cas(&lower, &upper, &set, &opts()).unwrap();
        assert_eq!(report.set.to_vec(), vec![0]);
        // one swap, then both dequeued children pairs are absent
        let actions: Vec<TraceAction> = report.trace.iter().map(|e| e.action).collect();
        assert_eq!(
            actions,
            vec![
                TraceAction::Swap,
                TraceAction::Skip,
                TraceAction::Skip,
                TraceAction::Terminate
            ]
        );
    }

    #[test]
    fn rejects_lower_root_in_set() {
        let (lower, upper) = figure_pair();
        let set = VertexSet::from_ids(22, &[0, 7]);
        let err = cas(&lower, &upper, &set, &opts()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }

    #[test]
    fn rejects_even_level_lower_tree() {
        let lower = RootedTree::perfect(2, 2).unwrap();
        let upper = RootedTree::perfect(2, 3).unwrap();
        let set = VertexSet::from_ids(10, &[3]);
        assert!(cas(&lower, &upper, &set, &opts()).is_err());
    }

    #[test]
    fn rejects_arity_mismatch_and_height_order() {
        let e = cas(
            &RootedTree::perfect(3, 3).unwrap(),
            &RootedTree::perfect(2, 4).unwrap(),
            &VertexSet::from_ids(28, &[13]),
            &opts(),
        );
        assert!(e.is_err());
        let e = cas(
            &RootedTree::perfect(2, 3).unwrap(),
            &RootedTree::perfect(2, 3).unwrap(),
            &VertexSet::from_ids(14, &[7]),
            &opts(),
        );
        assert!(e.is_err());
    }

    #[test]
    fn single_vertex_lower_tree_works() {
        let lower = RootedTree::perfect(2, 1).unwrap();
        let upper = RootedTree::perfect(2, 2).unwrap();
        // ids: lower = {0}, upper = {1, 2, 3}
        let set = VertexSet::from_ids(4, &[1]);
        let report = cas(&lower, &upper, &set, &opts()).unwrap();
        assert_eq!(report.set.to_vec(), vec![0]);
    }

    #[test]
    fn exhaustive_size_validity_and_untouched_region() {
        let (lower, upper) = figure_pair();
        let pair = Forest::new(vec![lower.clone(), upper.clone()]).unwrap();
        let n = pair.vertex_count();
        let u_root = 7;
        for k in 1..=8 {
            crate::count::for_each_independent_set(&pair, k, &[u_root], &[0], |set| {
                let report = cas(&lower, &upper, set, &opts()).unwrap();
                assert_eq!(report.set.len(), k);
                assert!(is_independent(&pair, &report.set));
                assert!(report.set.contains(0));
                assert!(!report.set.contains(u_root));
                for v in 0..n {
                    if !report.touched.contains(v) {
                        assert_eq!(set.contains(v), report.set.contains(v));
                    }
                }
            })
            .unwrap();
        }
    }

    #[test]
    fn exhaustive_injectivity_on_the_worked_pair() {
        let (lower, upper) = figure_pair();
        let pair = Forest::new(vec![lower.clone(), upper.clone()]).unwrap();
        for k in 1..=9 {
            let mut images: Vec<u128> = Vec::new();
            crate::count::for_each_independent_set(&pair, k, &[7], &[0], |set| {
                let report = cas(&lower, &upper, set, &opts()).unwrap();
                images.push(report.set.as_key());
            })
            .unwrap();
            let total = images.len();
            images.sort_unstable();
            images.dedup();
            assert_eq!(images.len(), total, "collision at k={k}");
        }
    }
}
