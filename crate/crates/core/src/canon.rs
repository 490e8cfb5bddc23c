//! Canonical forms and generation of unlabeled trees.
//!
//! The canonical code is the classic bottom-up encoding of the free tree
//! rooted at its center (for bicentral trees, the smaller of the two codes),
//! so two trees have equal codes exactly when they are isomorphic as free
//! trees. Unlabeled enumeration walks every Prüfer sequence and keeps the
//! first representative of each code; the inner loop runs a packed,
//! allocation-free variant of the same encoding.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::tree::{RootedTree, Topology, VertexId};

/// Default cap on the vertex count for unlabeled enumeration: `n^(n-2)`
/// labelled trees are walked, which stays desk-scale up to 10.
pub const TREE_ENUM_CAP: usize = 10;

/// Canonical encoding of an unlabeled free tree. Equal codes iff isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    /// The code as a parenthesis string.
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("codes are ASCII")
    }
}

impl std::fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn free_adjacency(t: &RootedTree) -> Vec<Vec<VertexId>> {
    let n = t.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = t.parent(v) {
            adj[v].push(p);
            adj[p].push(v);
        }
    }
    adj
}

/// Centers of a free tree: the one or two vertices left after repeatedly
/// peeling all leaves.
fn centers(adj: &[Vec<VertexId>]) -> Vec<VertexId> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<VertexId> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    loop {
        if remaining <= 2 {
            let mut out = layer;
            out.sort_unstable();
            return out;
        }
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            degree[v] = 0;
            for &w in &adj[v] {
                if degree[w] > 0 {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
}

fn rooted_code(adj: &[Vec<VertexId>], v: VertexId, parent: Option<VertexId>) -> Vec<u8> {
    let mut child_codes: Vec<Vec<u8>> = adj[v]
        .iter()
        .filter(|&&w| Some(w) != parent)
        .map(|&w| rooted_code(adj, w, Some(v)))
        .collect();
    child_codes.sort();
    let mut out = Vec::with_capacity(2 + child_codes.iter().map(Vec::len).sum::<usize>());
    out.push(b'(');
    for c in child_codes {
        out.extend_from_slice(&c);
    }
    out.push(b')');
    out
}

/// Canonical code of the free tree underlying `t`; invariant under any
/// relabeling and any choice of root.
pub fn canonical_code(t: &RootedTree) -> CanonicalCode {
    let adj = free_adjacency(t);
    let code = centers(&adj)
        .into_iter()
        .map(|c| rooted_code(&adj, c, None))
        .min()
        .expect("tree is nonempty");
    CanonicalCode(code)
}

/// Decodes a Prüfer sequence over `n = seq.len() + 2` labels into a tree
/// rooted at vertex 0.
pub fn tree_from_pruefer(seq: &[VertexId]) -> Result<RootedTree> {
    let n = seq.len() + 2;
    let mut scratch = PrueferScratch::new(n);
    for &a in seq {
        if a >= n {
            return Err(Error::pre(format!(
                "sequence entry {a} out of range for {n} labels"
            )));
        }
    }
    let edges = scratch.decode(seq);
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    rooted_at_zero(&adj)
}

fn rooted_at_zero(adj: &[Vec<VertexId>]) -> Result<RootedTree> {
    let n = adj.len();
    let mut parents: Vec<Option<VertexId>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parents[w] = Some(v);
                queue.push_back(w);
            }
        }
    }
    RootedTree::from_parents(&parents)
}

/// Reusable buffers for decoding many Prüfer sequences of the same length.
struct PrueferScratch {
    n: usize,
    degree: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl PrueferScratch {
    fn new(n: usize) -> Self {
        assert!(n >= 2);
        PrueferScratch {
            n,
            degree: vec![0; n],
            edges: Vec::with_capacity(n - 1),
        }
    }

    fn decode(&mut self, seq: &[VertexId]) -> &[(u32, u32)] {
        let n = self.n;
        debug_assert_eq!(seq.len() + 2, n);
        self.degree.fill(1);
        self.edges.clear();
        for &a in seq {
            self.degree[a] += 1;
        }
        let mut ptr = (0..n).find(|&v| self.degree[v] == 1).unwrap();
        let mut leaf = ptr;
        for &a in seq {
            self.edges.push((leaf as u32, a as u32));
            self.degree[a] -= 1;
            if self.degree[a] == 1 && a < ptr {
                leaf = a;
            } else {
                ptr += 1;
                while self.degree[ptr] != 1 {
                    ptr += 1;
                }
                leaf = ptr;
            }
        }
        self.edges.push((leaf as u32, n as u32 - 1));
        &self.edges
    }
}

/// Packed canonical code for trees with at most 16 vertices: the parenthesis
/// string as bits (1 = open), rooted at the free-tree center. Matches the
/// byte-level [`canonical_code`] partition; used as the hot dedup key.
struct PackedCoder {
    n: usize,
    nbr: [[u8; 16]; 16],
    deg: [u8; 16],
}

impl PackedCoder {
    fn new(n: usize) -> Self {
        assert!(n <= 16);
        PackedCoder {
            n,
            nbr: [[0; 16]; 16],
            deg: [0; 16],
        }
    }

    fn key(&mut self, edges: &[(u32, u32)]) -> u64 {
        let n = self.n;
        self.deg[..n].fill(0);
        for &(u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            self.nbr[u][self.deg[u] as usize] = v as u8;
            self.nbr[v][self.deg[v] as usize] = u as u8;
            self.deg[u] += 1;
            self.deg[v] += 1;
        }
        // peel to the center
        let mut live = self.deg;
        let mut remaining = n;
        let mut layer = [0u8; 16];
        let mut layer_len = 0;
        for v in 0..n {
            if live[v] <= 1 {
                layer[layer_len] = v as u8;
                layer_len += 1;
            }
        }
        while remaining > 2 {
            remaining -= layer_len;
            let prev = layer;
            let prev_len = layer_len;
            layer_len = 0;
            for &v in &prev[..prev_len] {
                let v = v as usize;
                live[v] = 0;
                for i in 0..self.deg[v] as usize {
                    let w = self.nbr[v][i] as usize;
                    if live[w] > 0 {
                        live[w] -= 1;
                        if live[w] == 1 {
                            layer[layer_len] = w as u8;
                            layer_len += 1;
                        }
                    }
                }
            }
        }
        let mut best = u64::MAX;
        for &c in &layer[..layer_len] {
            let (bits, _) = self.code_at(c as usize, usize::MAX);
            best = best.min(bits);
        }
        best
    }

    fn code_at(&self, v: usize, parent: usize) -> (u64, u8) {
        let mut child: [(u64, u8); 16] = [(0, 0); 16];
        let mut m = 0;
        for i in 0..self.deg[v] as usize {
            let w = self.nbr[v][i] as usize;
            if w != parent {
                child[m] = self.code_at(w, v);
                m += 1;
            }
        }
        child[..m].sort_unstable_by_key(|&(bits, len)| (len, bits));
        let mut bits = 1u64;
        let mut len = 1u8;
        for &(cb, cl) in &child[..m] {
            bits = bits << cl | cb;
            len += cl;
        }
        (bits << 1, len + 1)
    }
}

/// Walks the Prüfer sequences of `n` labels with first symbol in
/// `first_lo..first_hi` in lexicographic order, keeping the first labelled
/// representative of each isomorphism class. Returned in first-occurrence
/// order as (packed code, tree).
fn unlabeled_trees_in_range(
    n: usize,
    first_lo: usize,
    first_hi: usize,
) -> Vec<(u64, RootedTree)> {
    debug_assert!((3..=16).contains(&n));
    let len = n - 2;
    let mut seq = vec![0usize; len];
    seq[0] = first_lo;
    let mut scratch = PrueferScratch::new(n);
    let mut coder = PackedCoder::new(n);
    let mut seen: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    loop {
        let key = {
            let edges = scratch.decode(&seq);
            coder.key(edges)
        };
        if seen.insert(key) {
            let edges = scratch.decode(&seq);
            let mut adj = vec![Vec::new(); n];
            for &(u, v) in edges {
                adj[u as usize].push(v as usize);
                adj[v as usize].push(u as usize);
            }
            out.push((key, rooted_at_zero(&adj).expect("decoded trees are valid")));
        }
        // lexicographic odometer, most significant digit first
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            seq[i] += 1;
            let limit = if i == 0 { first_hi } else { n };
            if seq[i] < limit {
                break;
            }
            seq[i] = 0;
            if i == 0 {
                return out;
            }
        }
    }
}

/// One rooted representative per isomorphism class of free trees on `n`
/// vertices, in first-occurrence order of the lexicographic Prüfer walk.
pub fn enumerate_unlabeled_trees(n: usize) -> Result<Vec<RootedTree>> {
    enumerate_unlabeled_trees_capped(n, TREE_ENUM_CAP)
}

pub fn enumerate_unlabeled_trees_capped(n: usize, cap: usize) -> Result<Vec<RootedTree>> {
    check_enum_args(n, cap)?;
    if n <= 2 {
        return small_trees(n);
    }
    Ok(unlabeled_trees_in_range(n, 0, n)
        .into_iter()
        .map(|(_, t)| t)
        .collect())
}

/// Parallel variant used by the sweeps: splits the walk on the first Prüfer
/// symbol and merges chunks in order, so the result is identical to
/// [`enumerate_unlabeled_trees`] regardless of worker count.
pub fn enumerate_unlabeled_trees_parallel(
    n: usize,
    cap: usize,
    workers: usize,
) -> Result<Vec<RootedTree>> {
    check_enum_args(n, cap)?;
    if n <= 2 {
        return small_trees(n);
    }
    let workers = workers.clamp(1, n);
    if workers == 1 || n < 6 {
        return enumerate_unlabeled_trees_capped(n, cap);
    }
    let mut bounds = Vec::with_capacity(workers + 1);
    for w in 0..=workers {
        bounds.push(w * n / workers);
    }
    let chunks: Vec<Vec<(u64, RootedTree)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (lo, hi) = (bounds[w], bounds[w + 1]);
                scope.spawn(move || unlabeled_trees_in_range(n, lo, hi))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for chunk in chunks {
        for (key, tree) in chunk {
            if seen.insert(key) {
                out.push(tree);
            }
        }
    }
    Ok(out)
}

fn check_enum_args(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::pre("vertex count must be at least 1"));
    }
    if n > cap {
        return Err(Error::Unsupported(format!(
            "enumeration of trees on {n} vertices exceeds the cap of {cap}"
        )));
    }
    if n > 16 {
        return Err(Error::Unsupported(
            "enumeration supports at most 16 vertices".to_string(),
        ));
    }
    Ok(())
}

fn small_trees(n: usize) -> Result<Vec<RootedTree>> {
    let parents: &[Option<usize>] = match n {
        1 => &[None],
        2 => &[None, Some(0)],
        _ => unreachable!(),
    };
    Ok(vec![RootedTree::from_parents(parents)?])
}
