//! Desk-scale exhaustive verification: transfer-map injectivity, leaf
//! maximality of star sizes on perfect trees and forests, and the
//! leaf-maximality sweep over all small unlabeled trees plus the spider and
//! caterpillar families.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::canon::{canonical_code, enumerate_unlabeled_trees_parallel};
use crate::count::{constrained_profile, CountPolynomial, VertexConstraint};
use crate::error::{Error, Result};
use crate::forest::{arity_map, best_leaf, level_map, Embedding, Forest};
use crate::inject::{map_star, MapOptions, MapReport};
use crate::set::VertexSet;
use crate::tree::{RootedTree, Topology, VertexId};

/// Outcome of one verification run. Failures carry an independently
/// re-checkable witness. The elapsed time is diagnostic only and never part
/// of the serialized record.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub instance: String,
    pub passed: bool,
    /// Instances examined (sets mapped, (vertex, k) pairs compared, ...).
    pub checked: u64,
    pub witness: Option<Witness>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Verdict {
    fn pass(check: &str, instance: String, checked: u64, started: Instant) -> Self {
        Verdict {
            check: check.into(),
            instance,
            passed: true,
            checked,
            witness: None,
            elapsed: started.elapsed(),
        }
    }

    fn fail(check: &str, instance: String, checked: u64, witness: Witness, started: Instant) -> Self {
        Verdict {
            check: check.into(),
            instance,
            passed: false,
            checked,
            witness: Some(witness),
            elapsed: started.elapsed(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts serialize")
    }
}

/// A failure exhibit: everything needed to reproduce the violation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    /// One of `star-exceeds-leaf`, `map-collision`, `map-failure`.
    pub kind: String,
    /// Serialized host (tree or forest text form).
    pub host: String,
    /// Which transfer map, for map witnesses: `star`, `arity`, `level`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<VertexId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf: Option<VertexId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub sets: Vec<Vec<VertexId>>,
    pub detail: String,
}

impl Witness {
    /// Re-runs the witnessed computation in isolation; true means the
    /// failure reproduces.
    pub fn recheck(&self) -> Result<bool> {
        let forest = crate::forest::parse_forest(&self.host)?;
        match self.kind.as_str() {
            "star-exceeds-leaf" => {
                let (v, leaf, k) = (
                    self.vertex.ok_or_else(|| Error::pre("witness needs a vertex"))?,
                    self.leaf.ok_or_else(|| Error::pre("witness needs a leaf"))?,
                    self.k.ok_or_else(|| Error::pre("witness needs k"))?,
                );
                let star = crate::forest::forest_count_star(&forest, v, k)?;
                let leaf_star = crate::forest::forest_count_star(&forest, leaf, k)?;
                Ok(star > leaf_star)
            }
            "map-collision" => {
                if self.sets.len() != 2 || self.sets[0] == self.sets[1] {
                    return Ok(false);
                }
                let a = self.run_map(&forest, &self.sets[0])?;
                let b = self.run_map(&forest, &self.sets[1])?;
                Ok(a.set == b.set)
            }
            "map-failure" => {
                let input = self.sets.first().ok_or_else(|| Error::pre("witness needs a set"))?;
                Ok(self.run_map(&forest, input).is_err())
            }
            other => Err(Error::pre(format!("unknown witness kind `{other}`"))),
        }
    }

    fn run_map(&self, forest: &Forest, ids: &[VertexId]) -> Result<MapReport> {
        let set = VertexSet::from_ids(forest.vertex_count(), ids);
        let opts = MapOptions::monitored();
        match self.map.as_deref() {
            Some("arity") => arity_map(
                forest,
                self.vertex.unwrap_or_default(),
                self.leaf.unwrap_or_default(),
                &set,
                &opts,
            ),
            Some("level") => level_map(
                forest,
                self.vertex.unwrap_or_default(),
                self.leaf.unwrap_or_default(),
                &set,
                &opts,
            ),
            _ => {
                if forest.component_count() != 1 {
                    return Err(Error::pre("star witness host must be a single tree"));
                }
                map_star(
                    forest.tree(0),
                    self.vertex.ok_or_else(|| Error::pre("witness needs a vertex"))?,
                    &set,
                    &opts,
                )
            }
        }
    }
}

fn tree_label(tree: &RootedTree) -> String {
    match tree.shape() {
        Some(s) if s.levels >= 2 => format!("perfect:{}:{}", s.arity, s.levels),
        Some(_) => "perfect:2:1".to_string(),
        None => format!("tree(n={})", tree.vertex_count()),
    }
}

fn forest_label(forest: &Forest) -> String {
    let parts: Vec<String> = forest.trees().iter().map(tree_label).collect();
    parts.join(" + ")
}

fn set_from_key(n: usize, key: u128) -> Vec<VertexId> {
    (0..n).filter(|&v| key >> v & 1 == 1).collect()
}

/// Maps every member of the source family through `map`, checking outputs
/// and collecting collision evidence.
struct InjectivityProbe<'a> {
    images: Vec<(u128, u128)>,
    failure: Option<Witness>,
    host_text: String,
    map_name: &'a str,
    vertex: Option<VertexId>,
    leaf: Option<VertexId>,
    k: Option<usize>,
}

impl<'a> InjectivityProbe<'a> {
    fn new(host_text: String, map_name: &'a str) -> Self {
        InjectivityProbe {
            images: Vec::new(),
            failure: None,
            host_text,
            map_name,
            vertex: None,
            leaf: None,
            k: None,
        }
    }

    fn record(&mut self, input: &VertexSet, outcome: Result<MapReport>) {
        if self.failure.is_some() {
            return;
        }
        match outcome {
            Ok(report) => self.images.push((report.set.as_key(), input.as_key())),
            Err(e) => {
                self.failure = Some(Witness {
                    kind: "map-failure".to_string(),
                    host: self.host_text.clone(),
                    map: Some(self.map_name.into()),
                    vertex: self.vertex,
                    leaf: self.leaf,
                    k: self.k,
                    sets: vec![input.to_vec()],
                    detail: e.to_string(),
                });
            }
        }
    }

    /// Distinctness scan; returns a collision witness if any.
    fn collision(&mut self, n: usize) -> Option<Witness> {
        if let Some(w) = self.failure.take() {
            return Some(w);
        }
        self.images.sort_unstable();
        for pair in self.images.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Some(Witness {
                    kind: "map-collision".to_string(),
                    host: self.host_text.clone(),
                    map: Some(self.map_name.into()),
                    vertex: self.vertex,
                    leaf: self.leaf,
                    k: self.k,
                    sets: vec![set_from_key(n, pair[0].1), set_from_key(n, pair[1].1)],
                    detail: format!("both map to {:?}", set_from_key(n, pair[0].0)),
                });
            }
        }
        None
    }
}

/// Exhaustively maps the full source family at `v` (all sets of size `k`
/// containing `v` and avoiding the leftmost leaf) and verifies that the
/// outputs are valid, land in the target family, and are pairwise distinct.
/// Monitoring is on for every mapped set.
pub fn check_injection_exhaustive(tree: &RootedTree, v: VertexId, k: usize) -> Result<Verdict> {
    check_injection_exhaustive_with(tree, v, k, &MapOptions::monitored())
}

/// [`check_injection_exhaustive`] with caller-chosen run controls, for bulk
/// sweeps that turn the per-iteration monitors off.
pub fn check_injection_exhaustive_with(
    tree: &RootedTree,
    v: VertexId,
    k: usize,
    opts: &MapOptions,
) -> Result<Verdict> {
    let started = Instant::now();
    tree.require_shape()?;
    let path = tree.leftmost_path(v)?;
    let leaf = *path.last().unwrap();
    let instance = format!("{} v={v} k={k}", tree_label(tree));
    if v == leaf {
        return Ok(Verdict::pass("injection", instance, 0, started));
    }
    let mut probe = InjectivityProbe::new(tree.serialize(), "star");
    probe.vertex = Some(v);
    probe.leaf = Some(leaf);
    probe.k = Some(k);
    let mut checked = 0u64;
    crate::count::for_each_independent_set(tree, k, &[v], &[leaf], |set| {
        checked += 1;
        let outcome = map_star(tree, v, set, &opts);
        probe.record(set, outcome);
    })?;
    match probe.collision(tree.vertex_count()) {
        Some(w) => Ok(Verdict::fail("injection", instance, checked, w, started)),
        None => Ok(Verdict::pass("injection", instance, checked, started)),
    }
}

/// Exhaustive injectivity at `v` across every size at once: one traversal
/// of all source-family members (any size), with per-size distinctness of
/// the outputs. Size preservation makes this equivalent to running the
/// per-size check for each k, at a fraction of the enumeration cost.
pub fn check_injection_sweep(
    tree: &RootedTree,
    v: VertexId,
    opts: &MapOptions,
) -> Result<Verdict> {
    let started = Instant::now();
    tree.require_shape()?;
    let path = tree.leftmost_path(v)?;
    let leaf = *path.last().unwrap();
    let instance = format!("{} v={v} all k", tree_label(tree));
    if v == leaf {
        return Ok(Verdict::pass("injection", instance, 0, started));
    }
    let mut probe = InjectivityProbe::new(tree.serialize(), "star");
    probe.vertex = Some(v);
    probe.leaf = Some(leaf);
    let mut images: Vec<(u32, u128, u128)> = Vec::new();
    let mut failure: Option<Witness> = None;
    let mut checked = 0u64;
    crate::count::for_each_independent_set_all_sizes(tree, &[v], &[leaf], |set| {
        if failure.is_some() {
            return;
        }
        checked += 1;
        match map_star(tree, v, set, opts) {
            Ok(report) => images.push((set.len() as u32, report.set.as_key(), set.as_key())),
            Err(e) => {
                failure = Some(Witness {
                    kind: "map-failure".to_string(),
                    host: tree.serialize(),
                    map: Some("star".to_string()),
                    vertex: Some(v),
                    leaf: Some(leaf),
                    k: Some(set.len()),
                    sets: vec![set.to_vec()],
                    detail: e.to_string(),
                });
            }
        }
    })?;
    if let Some(w) = failure {
        return Ok(Verdict::fail("injection", instance, checked, w, started));
    }
    images.sort_unstable();
    for pair in images.windows(2) {
        if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
            let n = tree.vertex_count();
            let witness = Witness {
                kind: "map-collision".to_string(),
                host: tree.serialize(),
                map: Some("star".to_string()),
                vertex: Some(v),
                leaf: Some(leaf),
                k: Some(pair[0].0 as usize),
                sets: vec![set_from_key(n, pair[0].2), set_from_key(n, pair[1].2)],
                detail: format!("both map to {:?}", set_from_key(n, pair[0].1)),
            };
            return Ok(Verdict::fail("injection", instance, checked, witness, started));
        }
    }
    Ok(Verdict::pass("injection", instance, checked, started))
}

/// Leaf maximality on one perfect tree: for every vertex and every feasible
/// size, the star at the leftmost leaf is at least as large.
pub fn check_theorem_main(tree: &RootedTree) -> Result<Verdict> {
    let started = Instant::now();
    tree.require_shape()?;
    let instance = tree_label(tree);
    let leaf = tree.leftmost_leaf();
    let n = tree.vertex_count();
    let alpha = constrained_profile(tree, |_| VertexConstraint::Free).max_size();
    let star = |v: VertexId| {
        constrained_profile(tree, |x| {
            if x == v {
                VertexConstraint::Forced
            } else {
                VertexConstraint::Free
            }
        })
    };
    let leaf_profile = star(leaf);
    let mut checked = 0u64;
    for v in 0..n {
        let profile = star(v);
        for k in 1..=alpha {
            checked += 1;
            if profile.coeff(k) > leaf_profile.coeff(k) {
                let witness = Witness {
                    kind: "star-exceeds-leaf".to_string(),
                    host: tree.serialize(),
                    map: None,
                    vertex: Some(v),
                    leaf: Some(leaf),
                    k: Some(k),
                    sets: Vec::new(),
                    detail: format!(
                        "star {} at vertex {v} exceeds leaf star {}",
                        profile.coeff(k),
                        leaf_profile.coeff(k)
                    ),
                };
                return Ok(Verdict::fail("theorem-main", instance, checked, witness, started));
            }
        }
    }
    Ok(Verdict::pass("theorem-main", instance, checked, started))
}

mod serde_big {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-size leaf-maximality report for one tree: the maximum star over all
/// vertices against the maximum star over the free leaves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HkReport {
    /// Canonical code of the tree, as a parenthesis string.
    pub tree: String,
    pub n: usize,
    pub k: usize,
    pub max_star_vertex: VertexId,
    #[serde(with = "serde_big")]
    pub max_star_value: BigUint,
    #[serde(with = "serde_big")]
    pub best_leaf_value: BigUint,
    pub is_k_hk: bool,
}

impl HkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Leaf-maximality status of an arbitrary tree for each size from 1 up to
/// the smaller of `k_max` and the independence number. Sizes beyond the
/// independence number hold vacuously and are not reported.
pub fn check_hk(tree: &RootedTree, k_max: usize) -> Result<Vec<HkReport>> {
    let n = tree.vertex_count();
    let code = canonical_code(tree).to_string();
    let alpha = constrained_profile(tree, |_| VertexConstraint::Free).max_size();
    let top = k_max.min(alpha);
    let profiles: Vec<CountPolynomial> = (0..n)
        .map(|v| {
            constrained_profile(tree, |x| {
                if x == v {
                    VertexConstraint::Forced
                } else {
                    VertexConstraint::Free
                }
            })
        })
        .collect();
    let mut out = Vec::with_capacity(top);
    for k in 1..=top {
        let mut max_vertex = 0;
        let mut max_value = BigUint::ZERO;
        let mut best_leaf_value = BigUint::ZERO;
        for v in 0..n {
            let value = profiles[v].coeff(k);
            if value > max_value {
                max_value = value.clone();
                max_vertex = v;
            }
            if tree.is_free_leaf(v) && value > best_leaf_value {
                best_leaf_value = value;
            }
        }
        out.push(HkReport {
            tree: code.clone(),
            n,
            k,
            max_star_vertex: max_vertex,
            is_k_hk: best_leaf_value == max_value,
            max_star_value: max_value,
            best_leaf_value,
        });
    }
    Ok(out)
}

/// Leaf maximality over a forest of perfect trees: the selected leaf's star
/// dominates every vertex's star for every feasible size.
pub fn check_forest_theorem(forest: &Forest) -> Result<Verdict> {
    let started = Instant::now();
    let instance = forest_label(forest);
    let selection = best_leaf(forest)?;
    let profiles = forest_star_profiles(forest);
    let alpha = constrained_profile(forest, |_| VertexConstraint::Free).max_size();
    let best = &profiles[selection.leaf];
    let mut checked = 0u64;
    for v in 0..forest.vertex_count() {
        for k in 1..=alpha {
            checked += 1;
            if profiles[v].coeff(k) > best.coeff(k) {
                let witness = Witness {
                    kind: "star-exceeds-leaf".to_string(),
                    host: forest.serialize(),
                    map: None,
                    vertex: Some(v),
                    leaf: Some(selection.leaf),
                    k: Some(k),
                    sets: Vec::new(),
                    detail: format!(
                        "star {} at vertex {v} exceeds the selected leaf's {}",
                        profiles[v].coeff(k),
                        best.coeff(k)
                    ),
                };
                return Ok(Verdict::fail("theorem-forest", instance, checked, witness, started));
            }
        }
    }
    Ok(Verdict::pass("theorem-forest", instance, checked, started))
}

/// Forced profile of every global vertex, assembled from per-component
/// profiles: the vertex's component contributes its forced profile, the
/// others their plain profiles, combined by convolution.
pub fn forest_star_profiles(forest: &Forest) -> Vec<CountPolynomial> {
    let m = forest.component_count();
    let plain: Vec<CountPolynomial> = (0..m)
        .map(|i| constrained_profile(forest.tree(i), |_| VertexConstraint::Free))
        .collect();
    let mut prefix = vec![CountPolynomial::one(); m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i].mul(&plain[i]);
    }
    let mut suffix = vec![CountPolynomial::one(); m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1].mul(&plain[i]);
    }
    let mut out = Vec::with_capacity(forest.vertex_count());
    for i in 0..m {
        let rest = prefix[i].mul(&suffix[i + 1]);
        let tree = forest.tree(i);
        for local in 0..tree.vertex_count() {
            let forced = constrained_profile(tree, |x| {
                if x == local {
                    VertexConstraint::Forced
                } else {
                    VertexConstraint::Free
                }
            });
            out.push(forced.mul(&rest));
        }
    }
    out
}

/// Which leaf-comparison map applies to a pair of perfect components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLemma {
    /// Differing arity, smaller first.
    Arity,
    /// Equal arity, fewer levels first; the even/odd direction follows the
    /// shorter component's parity.
    Level,
}

pub fn classify_pair(forest: &Forest, c1: usize, c2: usize) -> Result<Option<PairLemma>> {
    let s1 = forest.tree(c1).require_shape()?;
    let s2 = forest.tree(c2).require_shape()?;
    if s1.levels < 2 || s2.levels < 2 {
        return Ok(None);
    }
    if s1.arity < s2.arity {
        return Ok(Some(PairLemma::Arity));
    }
    if s1.arity == s2.arity && s1.levels < s2.levels {
        return Ok(Some(PairLemma::Level));
    }
    Ok(None)
}

/// Exhaustive injectivity of the applicable leaf-comparison map between two
/// components of `forest`, plus the per-size class inequality it implies.
///
/// The maps read and write only a bounded region `M` (asserted on every
/// run via the touched-vertex record): the two leaf neighbourhoods for the
/// arity map, the embedded copy and its preimage for the level map.
/// Members of the source family split as (pattern inside M) + (rest outside
/// M), and the rest passes through unchanged, so mapping every pattern —
/// every family member contained in M — decides injectivity for the whole
/// family at every size.
pub fn check_forest_injection(forest: &Forest, c1: usize, c2: usize) -> Result<Verdict> {
    let started = Instant::now();
    let lemma = classify_pair(forest, c1, c2)?.ok_or_else(|| {
        Error::pre(format!(
            "components {c1} and {c2} meet neither comparison hypothesis"
        ))
    })?;
    let n = forest.vertex_count();
    let l1 = forest.leftmost_leaf_of(c1);
    let l2 = forest.leftmost_leaf_of(c2);
    let instance = format!("{} l1={l1} l2={l2}", forest_label(forest));
    let opts = MapOptions::monitored();

    // the region the map may touch, and the transfer direction
    let (region, from, to, map_name): (Vec<VertexId>, VertexId, VertexId, &str) = match lemma {
        PairLemma::Arity => {
            let r1 = forest.tree(c1).require_shape()?.arity;
            let p1 = forest.parent(l1).unwrap();
            let p2 = forest.parent(l2).unwrap();
            let mut m = vec![l1, p1, l2, p2];
            m.extend_from_slice(&forest.children(p1)[1..r1]);
            m.extend_from_slice(&forest.children(p2)[1..=r1]);
            if let Some(pp1) = forest.parent(p1) {
                m.push(pp1);
            }
            (m, l1, l2, "arity")
        }
        PairLemma::Level => {
            let emb = Embedding::between(forest, c1, c2)?;
            let m: Vec<VertexId> = (0..n).filter(|&v| emb.mirror(v).is_some()).collect();
            let short_even = forest.tree(c1).require_shape()?.levels % 2 == 0;
            if short_even {
                (m, l1, l2, "level")
            } else {
                (m, l2, l1, "level")
            }
        }
    };
    let region_set = VertexSet::from_ids(n, &region);
    let outside: Vec<VertexId> = (0..n).filter(|&v| !region_set.contains(v)).collect();
    let mut forbidden = outside.clone();
    forbidden.push(to);

    let mut probe = InjectivityProbe::new(forest.serialize(), map_name);
    probe.vertex = Some(l1);
    probe.leaf = Some(l2);
    let mut checked = 0u64;
    for k in 1..=region.len() {
        crate::count::for_each_independent_set(forest, k, &[from], &forbidden, |set| {
            checked += 1;
            let outcome = match lemma {
                PairLemma::Arity => arity_map(forest, l1, l2, set, &opts),
                PairLemma::Level => level_map(forest, l1, l2, set, &opts),
            };
            let outcome = outcome.and_then(|report| {
                if report.touched.is_subset(&region_set) {
                    Ok(report)
                } else {
                    Err(Error::monitor(
                        "map-region",
                        0,
                        "map touched a vertex outside its declared region",
                    ))
                }
            });
            probe.record(set, outcome);
        })?;
    }
    if let Some(w) = probe.collision(n) {
        return Ok(Verdict::fail("lemma-injection", instance, checked, w, started));
    }

    // class-size inequality for every size, from the counting side
    let class = |inside: VertexId, avoid: VertexId| {
        constrained_profile(forest, |x| {
            if x == inside {
                VertexConstraint::Forced
            } else if x == avoid {
                VertexConstraint::Forbidden
            } else {
                VertexConstraint::Free
            }
        })
    };
    let source = class(from, to);
    let target = class(to, from);
    let alpha = constrained_profile(forest, |_| VertexConstraint::Free).max_size();
    for k in 1..=alpha {
        checked += 1;
        if source.coeff(k) > target.coeff(k) {
            let witness = Witness {
                kind: "star-exceeds-leaf".to_string(),
                host: forest.serialize(),
                map: Some(map_name.into()),
                vertex: Some(from),
                leaf: Some(to),
                k: Some(k),
                sets: Vec::new(),
                detail: format!(
                    "source family {} larger than target family {}",
                    source.coeff(k),
                    target.coeff(k)
                ),
            };
            return Ok(Verdict::fail("lemma-injection", instance, checked, witness, started));
        }
    }
    Ok(Verdict::pass("lemma-injection", instance, checked, started))
}

/// A spider: one centre with paths of the given lengths attached. Rooted at
/// the centre.
pub fn spider(legs: &[usize]) -> Result<RootedTree> {
    if legs.is_empty() || legs.contains(&0) {
        return Err(Error::pre("spider legs must be nonempty and positive"));
    }
    let n = 1 + legs.iter().sum::<usize>();
    let mut parents = vec![None; n];
    let mut next = 1;
    for &len in legs {
        let mut prev = 0;
        for _ in 0..len {
            parents[next] = Some(prev);
            prev = next;
            next += 1;
        }
    }
    RootedTree::from_parents(&parents)
}

/// A caterpillar: a spine path with `legs[i]` pendant leaves on the `i`-th
/// spine vertex. Rooted at the first spine vertex.
pub fn caterpillar(spine: usize, legs: &[usize]) -> Result<RootedTree> {
    if spine == 0 {
        return Err(Error::pre("caterpillar spine must be nonempty"));
    }
    if legs.len() != spine {
        return Err(Error::pre(format!(
            "expected {spine} leg counts, got {}",
            legs.len()
        )));
    }
    let n = spine + legs.iter().sum::<usize>();
    let mut parents = vec![None; n];
    for i in 1..spine {
        parents[i] = Some(i - 1);
    }
    let mut next = spine;
    for (i, &count) in legs.iter().enumerate() {
        for _ in 0..count {
            parents[next] = Some(i);
            next += 1;
        }
    }
    RootedTree::from_parents(&parents)
}

/// Runs `f` over the items with a fixed-size worker pool, preserving the
/// input order in the output. Workers share only the immutable items.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    workers: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut results: Vec<Option<R>> = Vec::with_capacity(items.len());
    results.resize_with(items.len(), || None);
    std::thread::scope(|scope| {
        let (tx, rx) = std::sync::mpsc::channel::<(usize, R)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let f = &f;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                if tx.send((i, f(&items[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            results[i] = Some(r);
        }
    });
    results.into_iter().map(|r| r.expect("every item processed")).collect()
}

/// Leaf-maximality sweep over one representative per isomorphism class of
/// trees with up to `n_max` vertices, distributed over `workers` tasks.
/// Reports are ordered by (n, enumeration order, k) regardless of
/// scheduling.
pub fn sweep_hk_trees(n_max: usize, k_max: usize, workers: usize) -> Result<Vec<HkReport>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        let trees = enumerate_unlabeled_trees_parallel(n, n_max, workers)?;
        let reports = parallel_map(&trees, workers, |t| check_hk(t, k_max));
        for r in reports {
            out.extend(r?);
        }
    }
    Ok(out)
}

/// All spiders with up to `n_max` vertices, one per leg-multiset, in
/// deterministic order.
pub fn all_spiders(n_max: usize) -> Vec<RootedTree> {
    let mut out = Vec::new();
    let mut legs = Vec::new();
    for total in 1..n_max {
        descending_partitions(total, total, &mut legs, &mut |legs| {
            out.push(spider(legs).expect("valid legs"));
        });
    }
    out
}

fn descending_partitions(
    remaining: usize,
    max_part: usize,
    prefix: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if remaining == 0 {
        emit(prefix);
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        prefix.push(part);
        descending_partitions(remaining - part, part, prefix, emit);
        prefix.pop();
    }
}

/// All caterpillars with up to `n_max` vertices, one per (spine, legs)
/// tuple, deduplicated by canonical code, in deterministic order.
pub fn all_caterpillars(n_max: usize) -> Vec<RootedTree> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for spine in 1..=n_max {
        let budget = n_max - spine;
        let mut legs = vec![0usize; spine];
        loop {
            if legs.iter().sum::<usize>() <= budget {
                let t = caterpillar(spine, &legs).expect("valid legs");
                if seen.insert(canonical_code(&t)) {
                    out.push(t);
                }
            }
            // odometer over leg counts, bounded by the remaining budget
            let mut i = spine;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                legs[i] += 1;
                if legs.iter().sum::<usize>() <= budget {
                    break;
                }
                legs[i] = 0;
                if i == 0 {
                    break;
                }
            }
            if legs.iter().all(|&l| l == 0) {
                break;
            }
        }
    }
    out
}

/// Leaf-maximality of every spider and caterpillar with up to `n_max`
/// vertices, for every feasible size.
pub fn sweep_hk_families(n_max: usize, workers: usize) -> Result<Vec<HkReport>> {
    let mut families = all_spiders(n_max);
    families.extend(all_caterpillars(n_max));
    let reports = parallel_map(&families, workers, |t| check_hk(t, usize::MAX));
    let mut out = Vec::new();
    for r in reports {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injection_check_passes_on_small_instances() {
        let t = RootedTree::perfect(2, 4).unwrap();
        let v = check_injection_exhaustive(&t, 0, 3).unwrap();
        assert!(v.passed, "{:?}", v.witness);
        assert!(v.checked > 0);

        let t = RootedTree::perfect(3, 3).unwrap();
        let v = check_injection_exhaustive(&t, 0, 2).unwrap();
        assert!(v.passed);
    }

    #[test]
    fn injection_check_vacuous_on_empty_family() {
        let t = RootedTree::perfect(2, 3).unwrap();
        // size 5 sets containing the root: none exist
        let v = check_injection_exhaustive(&t, 0, 5).unwrap();
        assert!(v.passed);
        assert_eq!(v.checked, 0);
    }

    #[test]
    fn theorem_main_passes_on_small_perfect_trees() {
        for (r, h) in [(2usize, 4usize), (3, 3), (2, 1)] {
            let t = RootedTree::perfect(r, h).unwrap();
            let v = check_theorem_main(&t).unwrap();
            assert!(v.passed, "perfect({r},{h})");
        }
    }

    #[test]
    fn hk_reports_on_perfect_and_path_trees() {
        let t = RootedTree::perfect(2, 3).unwrap();
        for report in check_hk(&t, usize::MAX).unwrap() {
            assert!(report.is_k_hk, "k={}", report.k);
        }
        // a path on four vertices is a caterpillar and leaf-maximal
        let path = crate::tree::parse_tree("4\n-1 0 1 2\n").unwrap();
        for report in check_hk(&path, usize::MAX).unwrap() {
            assert!(report.is_k_hk);
        }
        // sizes beyond the independence number are not reported
        let reports = check_hk(&path, 10).unwrap();
        assert_eq!(reports.last().unwrap().k, 2);
    }

    #[test]
    fn forest_theorem_passes_on_mixed_forests() {
        for specs in [
            vec![(2usize, 2usize), (2, 3)],
            vec![(3, 2), (2, 4)],
            vec![(2, 2)],
            vec![(2, 3), (3, 2), (3, 4)],
        ] {
            let forest = Forest::new(
                specs
                    .iter()
                    .map(|&(r, h)| RootedTree::perfect(r, h).unwrap())
                    .collect(),
            )
            .unwrap();
            let v = check_forest_theorem(&forest).unwrap();
            assert!(v.passed, "{specs:?}: {:?}", v.witness);
        }
    }

    #[test]
    fn forest_injection_checks_both_lemmas() {
        let forest = Forest::new(vec![
            RootedTree::perfect(2, 2).unwrap(),
            RootedTree::perfect(3, 2).unwrap(),
        ])
        .unwrap();
        assert_eq!(classify_pair(&forest, 0, 1).unwrap(), Some(PairLemma::Arity));
        let v = check_forest_injection(&forest, 0, 1).unwrap();
        assert!(v.passed, "{:?}", v.witness);

        let forest = Forest::new(vec![
            RootedTree::perfect(2, 2).unwrap(),
            RootedTree::perfect(2, 3).unwrap(),
        ])
        .unwrap();
        assert_eq!(classify_pair(&forest, 0, 1).unwrap(), Some(PairLemma::Level));
        let v = check_forest_injection(&forest, 0, 1).unwrap();
        assert!(v.passed, "{:?}", v.witness);

        // odd shorter component: the map runs from the taller tree's leaf
        let forest = Forest::new(vec![
            RootedTree::perfect(2, 3).unwrap(),
            RootedTree::perfect(2, 4).unwrap(),
        ])
        .unwrap();
        let v = check_forest_injection(&forest, 0, 1).unwrap();
        assert!(v.passed, "{:?}", v.witness);
    }

    #[test]
    fn family_generators_match_hand_counts() {
        let star4 = spider(&[1, 1, 1]).unwrap();
        assert_eq!(star4.vertex_count(), 4);
        assert_eq!(star4.children(0).len(), 3);

        let path5 = spider(&[2, 2]).unwrap();
        assert_eq!(path5.vertex_count(), 5);
        let path_code = canonical_code(&crate::tree::parse_tree("5\n-1 0 1 2 3\n").unwrap());
        assert_eq!(canonical_code(&path5), path_code);

        let cat = caterpillar(3, &[1, 0, 1]).unwrap();
        assert_eq!(cat.vertex_count(), 5);

        assert!(spider(&[]).is_err());
        assert!(spider(&[0, 1]).is_err());
        assert!(caterpillar(0, &[]).is_err());
        assert!(caterpillar(2, &[1]).is_err());
    }

    #[test]
    fn family_sweeps_are_all_leaf_maximal_at_small_scale() {
        for report in sweep_hk_families(8, 2).unwrap() {
            assert!(report.is_k_hk, "{}", report.to_json());
        }
    }

    #[test]
    fn tree_sweep_small() {
        let reports = sweep_hk_trees(7, 4, 3).unwrap();
        assert!(reports.iter().all(|r| r.is_k_hk));
        // same outcome regardless of worker count
        let seq = sweep_hk_trees(7, 4, 1).unwrap();
        assert_eq!(reports.len(), seq.len());
        for (a, b) in reports.iter().zip(&seq) {
            assert_eq!(a.to_json(), b.to_json());
        }
    }

    #[test]
    fn bogus_witnesses_do_not_reproduce() {
        let t = RootedTree::perfect(2, 3).unwrap();
        let w = Witness {
            kind: "star-exceeds-leaf".to_string(),
            host: t.serialize(),
            map: None,
            vertex: Some(0),
            leaf: Some(3),
            k: Some(2),
            sets: Vec::new(),
            detail: String::new(),
        };
        assert!(!w.recheck().unwrap());

        let w = Witness {
            kind: "map-collision".to_string(),
            host: t.serialize(),
            map: Some("star".to_string()),
            vertex: Some(0),
            leaf: Some(3),
            k: Some(2),
            sets: vec![vec![0, 4], vec![0, 5]],
            detail: String::new(),
        };
        assert!(!w.recheck().unwrap());
    }

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let out = parallel_map(&items, 4, |&x| x * x);
        assert_eq!(out, items.iter().map(|&x| x * x).collect::<Vec<_>>());
    }
}
