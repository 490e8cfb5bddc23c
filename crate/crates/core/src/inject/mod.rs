//! Star-transfer procedures: size-preserving injections that move an
//! independent set's membership of one distinguished vertex to another,
//! resolving conflicts by cascading swaps.
//!
//! Every procedure can run with per-iteration invariant monitoring (on in
//! tests, off for bulk sweeps) and can record a structured step trace.

mod cas;
mod even;
mod odd;

pub use cas::cas;
pub use even::phi_even;
pub use odd::phi_odd;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::VertexSet;
use crate::tree::{RootedTree, Topology, VertexId};

/// Run controls for the transfer procedures.
#[derive(Debug, Clone, Copy, Default)]
pub struct MapOptions {
    /// Record one [`TraceEvent`] per step.
    pub trace: bool,
    /// Check the loop invariants at every iteration boundary. O(n) per
    /// iteration; leave off for bulk verification runs.
    pub monitor: bool,
}

impl MapOptions {
    pub fn monitored() -> Self {
        MapOptions {
            trace: false,
            monitor: true,
        }
    }
}

/// What a step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceAction {
    Swap,
    Skip,
    Terminate,
    PrimaryShift,
    CasCall,
    SecondaryShift,
}

/// One step record. Replaying the records (remove `s`, insert `t` on every
/// set-changing action) reproduces the output set from the input set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub iteration: u64,
    pub s: Option<VertexId>,
    pub t: Option<VertexId>,
    pub action: TraceAction,
    pub enqueued_s: Vec<VertexId>,
    pub enqueued_t: Vec<VertexId>,
    pub set_after: Vec<VertexId>,
}

impl TraceEvent {
    pub(crate) fn new(
        iteration: u64,
        s: Option<VertexId>,
        t: Option<VertexId>,
        action: TraceAction,
        set: &VertexSet,
    ) -> Self {
        TraceEvent {
            iteration,
            s,
            t,
            action,
            enqueued_s: Vec::new(),
            enqueued_t: Vec::new(),
            set_after: set.to_vec(),
        }
    }

    /// Whether replaying this event moves membership from `s` to `t`.
    pub fn changes_set(&self) -> bool {
        matches!(
            self.action,
            TraceAction::Swap | TraceAction::PrimaryShift | TraceAction::SecondaryShift
        )
    }

    /// Newline-free JSON wire form; one record per line in trace streams.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace events serialize")
    }
}

/// Renders a trace as newline-delimited JSON records.
pub fn trace_to_jsonl(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_json());
        out.push('\n');
    }
    out
}

/// Result of one transfer: the output set, the step trace (empty unless
/// requested), and every vertex whose membership was modified.
#[derive(Debug, Clone)]
pub struct MapReport {
    pub set: VertexSet,
    pub trace: Vec<TraceEvent>,
    pub touched: VertexSet,
}

/// Shared mutable state threaded through the engines.
pub(crate) struct Run<'a> {
    pub set: VertexSet,
    pub touched: VertexSet,
    pub trace: Vec<TraceEvent>,
    pub opts: &'a MapOptions,
    /// Vertices modified so far; each may be modified at most once.
    pub modified: VertexSet,
}

impl<'a> Run<'a> {
    pub fn new(set: &VertexSet, opts: &'a MapOptions) -> Self {
        let n = set.capacity();
        Run {
            set: set.clone(),
            touched: VertexSet::new(n),
            trace: Vec::new(),
            opts,
            modified: VertexSet::new(n),
        }
    }

    /// Moves membership from `s` to `t`, enforcing that neither vertex was
    /// modified before and that the move is a real transfer.
    pub fn transfer(&mut self, s: VertexId, t: VertexId, iteration: u64) -> Result<()> {
        for v in [s, t] {
            if self.modified.contains(v) {
                return Err(Error::monitor(
                    "modify-once",
                    iteration,
                    format!("vertex {v} modified twice"),
                ));
            }
            self.modified.insert(v);
            self.touched.insert(v);
        }
        if !self.set.remove(s) {
            return Err(Error::monitor(
                "transfer-source",
                iteration,
                format!("vertex {s} not in the working set"),
            ));
        }
        if !self.set.insert(t) {
            return Err(Error::monitor(
                "transfer-target",
                iteration,
                format!("vertex {t} already in the working set"),
            ));
        }
        Ok(())
    }

    pub fn event(&mut self, mut e: TraceEvent, enq_s: Vec<VertexId>, enq_t: Vec<VertexId>) {
        if self.opts.trace {
            e.enqueued_s = enq_s;
            e.enqueued_t = enq_t;
            self.trace.push(e);
        }
    }

    pub fn finish(self) -> MapReport {
        MapReport {
            set: self.set,
            trace: self.trace,
            touched: self.touched,
        }
    }
}

/// Checks that `set` is an independent set of `host` that contains `inside`
/// and avoids `outside`; `what` names the checked family in errors.
pub(crate) fn require_class<H: Topology>(
    host: &H,
    set: &VertexSet,
    inside: VertexId,
    outside: VertexId,
    what: &str,
) -> Result<()> {
    if set.capacity() != host.vertex_count() {
        return Err(Error::pre(format!(
            "set capacity {} does not match the host's {} vertices",
            set.capacity(),
            host.vertex_count()
        )));
    }
    if !crate::count::is_independent(host, set) {
        return Err(Error::pre(format!("{what}: the input set is not independent")));
    }
    if !set.contains(inside) {
        return Err(Error::pre(format!(
            "{what}: vertex {inside} must be in the input set"
        )));
    }
    if set.contains(outside) {
        return Err(Error::pre(format!(
            "{what}: vertex {outside} must not be in the input set"
        )));
    }
    Ok(())
}

/// Output contract shared by the transfer procedures: size preserved,
/// independent, `inside` gained, `outside` dropped. Violations indicate a
/// bug in the procedure and surface as monitor errors.
pub(crate) fn finish_class_checked<H: Topology>(
    host: &H,
    run: Run,
    size: usize,
    inside: VertexId,
    outside: VertexId,
    what: &str,
) -> Result<MapReport> {
    let report = run.finish();
    let ok = report.set.len() == size
        && report.set.contains(inside)
        && !report.set.contains(outside)
        && crate::count::is_independent(host, &report.set);
    if !ok {
        return Err(Error::monitor(
            "output-class",
            0,
            format!("{what} produced an invalid output {:?}", report.set),
        ));
    }
    Ok(report)
}

/// Transfers a star member at `v` to one at the leftmost leaf: dispatches on
/// the parity of the distance from `v` to the leaf. `v` must lie on the
/// leftmost path; the input set must contain `v` and avoid the leaf.
pub fn map_star(
    tree: &RootedTree,
    v: VertexId,
    set: &VertexSet,
    opts: &MapOptions,
) -> Result<MapReport> {
    tree.check_vertex(v)?;
    tree.require_shape()?;
    let leaf = tree.leftmost_leaf();
    if v == leaf {
        return Err(Error::pre(
            "map_star: v equals the leftmost leaf; the mapped family is undefined",
        ));
    }
    let path = tree.leftmost_path(v)?;
    let dist = path.len() - 1;
    if dist % 2 == 0 {
        phi_even(tree, v, set, opts)
    } else {
        phi_odd(tree, v, set, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::VertexSet;
    use crate::tree::RootedTree;

    fn ids(report: &MapReport) -> Vec<usize> {
        report.set.to_vec()
    }

    #[test]
    fn map_star_dispatches_by_parity() {
        let opts = MapOptions::monitored();

        // even distance: 4 levels below the root of perfect(2,5)
        let t = RootedTree::perfect(2, 5).unwrap();
        let set = VertexSet::from_ids(31, &[0, 7]);
        assert_eq!(ids(&map_star(&t, 0, &set, &opts).unwrap()), vec![1, 15]);

        // odd distance: root of perfect(2,4)
        let t = RootedTree::perfect(2, 4).unwrap();
        let set = VertexSet::from_ids(15, &[0, 3]);
        assert_eq!(ids(&map_star(&t, 0, &set, &opts).unwrap()), vec![2, 7]);
    }

    #[test]
    fn map_star_on_singletons_yields_the_leaf() {
        let opts = MapOptions::monitored();
        for (r, h) in [(2usize, 3usize), (2, 4), (3, 3), (4, 2)] {
            let t = RootedTree::perfect(r, h).unwrap();
            for &v in &t.leftmost_path(0).unwrap() {
                if v == t.leftmost_leaf() {
                    continue;
                }
                let set = VertexSet::from_ids(t.vertex_count(), &[v]);
                let out = map_star(&t, v, &set, &opts).unwrap();
                assert_eq!(ids(&out), vec![t.leftmost_leaf()]);
            }
        }
    }

    #[test]
    fn map_star_rejects_the_leaf_itself() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let set = VertexSet::from_ids(7, &[3]);
        assert!(map_star(&t, 3, &set, &MapOptions::default()).is_err());
    }

    #[test]
    fn map_star_rejects_vertices_off_the_leftmost_path() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let set = VertexSet::from_ids(7, &[2]);
        assert!(map_star(&t, 2, &set, &MapOptions::default()).is_err());
    }

    #[test]
    fn trace_replay_reproduces_the_output() {
        let t = RootedTree::perfect(2, 5).unwrap();
        let opts = MapOptions {
            trace: true,
            monitor: true,
        };
        let input = VertexSet::from_ids(31, &[0, 7, 4]);
        let report = map_star(&t, 0, &input, &opts).unwrap();
        let mut replay = input.clone();
        for e in &report.trace {
            if e.changes_set() {
                assert!(replay.remove(e.s.unwrap()));
                assert!(replay.insert(e.t.unwrap()));
                assert_eq!(replay.to_vec(), e.set_after);
            }
        }
        assert_eq!(replay, report.set);
    }
}
