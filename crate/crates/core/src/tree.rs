//! Rooted plane trees: construction, navigation, text format, perfect shapes.
//!
//! Trees are immutable after construction. Child lists are kept in ascending
//! id order, which is the plane (left-to-right) order everywhere in this
//! crate; for perfect trees built by [`RootedTree::perfect`] the ids are
//! level-order, so the children of vertex `i` are `r*i + 1 ..= r*i + r`.

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Shape metadata of a perfect `r`-ary tree with `levels` levels: all leaves
/// at depth `levels - 1`, every internal vertex with exactly `arity` children.
///
/// A single vertex (`levels == 1`) is a perfect tree of every arity; the
/// stored `arity` is whatever the constructor was given and carries no
/// structural information in that case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfectShape {
    pub arity: usize,
    pub levels: usize,
}

impl PerfectShape {
    pub fn vertex_count(&self) -> usize {
        if self.levels == 1 {
            1
        } else {
            (self.arity.pow(self.levels as u32) - 1) / (self.arity - 1)
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.arity.pow(self.levels as u32 - 1)
    }
}

/// Navigation shared by trees and forests: a set of rooted plane trees over
/// dense vertex ids.
pub trait Topology {
    fn vertex_count(&self) -> usize;
    fn roots(&self) -> &[VertexId];
    fn parent(&self, v: VertexId) -> Option<VertexId>;
    /// Children in plane order (ascending id).
    fn children(&self, v: VertexId) -> &[VertexId];

    fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.children(v).len() + 1);
        if let Some(p) = self.parent(v) {
            out.push(p);
        }
        out.extend_from_slice(self.children(v));
        out
    }

    fn degree(&self, v: VertexId) -> usize {
        self.children(v).len() + usize::from(self.parent(v).is_some())
    }

    /// Leaf of the underlying free tree: degree at most one. A root with a
    /// single child counts, the root of a perfect tree with `r >= 2` does not.
    fn is_free_leaf(&self, v: VertexId) -> bool {
        self.degree(v) <= 1
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexRange(v))
        }
    }
}

/// An ordered (plane) rooted tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<usize>,
    root: VertexId,
    shape: Option<PerfectShape>,
}

impl Topology for RootedTree {
    fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    fn roots(&self) -> &[VertexId] {
        std::slice::from_ref(&self.root)
    }

    fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }
}

impl RootedTree {
    /// Builds a tree from a parent array (`None` marks the root), validating
    /// that it describes exactly one connected acyclic rooted tree.
    pub fn from_parents(parents: &[Option<VertexId>]) -> Result<Self> {
        Self::from_parents_at_line(parents, 0)
    }

    fn from_parents_at_line(parents: &[Option<VertexId>], line: usize) -> Result<Self> {
        let n = parents.len();
        let perr = |msg: String| Error::Parse { line, msg };
        if n == 0 {
            return Err(perr("empty tree".to_string()));
        }
        let mut root = None;
        for (v, &p) in parents.iter().enumerate() {
            match p {
                None => {
                    if let Some(r) = root {
                        return Err(perr(format!("multiple roots: {r} and {v}")));
                    }
                    root = Some(v);
                }
                Some(p) => {
                    if p >= n {
                        return Err(perr(format!("vertex {v}: parent {p} out of range")));
                    }
                    if p == v {
                        return Err(perr(format!("vertex {v} is its own parent")));
                    }
                }
            }
        }
        let root = root.ok_or_else(|| perr("no root (no -1 entry)".to_string()))?;

        let mut children = vec![Vec::new(); n];
        for (v, &p) in parents.iter().enumerate() {
            if let Some(p) = p {
                children[p].push(v);
            }
        }
        // ids ascend during construction, so child lists are already sorted

        // depths via BFS from the root; any unreached vertex sits on a cycle
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut seen = 1;
        while let Some(v) = queue.pop_front() {
            for &c in &children[v] {
                depth[c] = depth[v] + 1;
                seen += 1;
                queue.push_back(c);
            }
        }
        if seen != n {
            let stray = (0..n).find(|&v| depth[v] == usize::MAX).unwrap();
            return Err(perr(format!(
                "vertex {stray} unreachable from root {root} (cycle in parent array)"
            )));
        }

        let mut tree = RootedTree {
            parent: parents.to_vec(),
            children,
            depth,
            root,
            shape: None,
        };
        tree.shape = tree.detect_perfect();
        Ok(tree)
    }

    /// The perfect `r`-ary tree with `h` levels in level-order indexing:
    /// the root is 0 and the children of vertex `i` are `r*i + 1 ..= r*i + r`.
    pub fn perfect(r: usize, h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::Shape("level count must be at least 1".to_string()));
        }
        if h == 1 {
            return Ok(RootedTree {
                parent: vec![None],
                children: vec![Vec::new()],
                depth: vec![0],
                root: 0,
                shape: Some(PerfectShape { arity: r, levels: 1 }),
            });
        }
        if r < 2 {
            return Err(Error::Shape(format!(
                "arity must be at least 2 for {h} levels, got {r}"
            )));
        }
        let mut n: usize = 0;
        let mut level = 1usize;
        for _ in 0..h {
            n = n
                .checked_add(level)
                .ok_or_else(|| Error::Unsupported("perfect tree too large".to_string()))?;
            level = level
                .checked_mul(r)
                .ok_or_else(|| Error::Unsupported("perfect tree too large".to_string()))?;
        }
        if n > 1 << 24 {
            return Err(Error::Unsupported(format!(
                "perfect tree with {n} vertices exceeds the desk-scale cap"
            )));
        }

        let internal = (n - r.pow(h as u32 - 1)) as usize;
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![0usize; n];
        for i in 0..internal {
            let first = r * i + 1;
            children[i] = (first..first + r).collect();
            for c in first..first + r {
                parent[c] = Some(i);
                depth[c] = depth[i] + 1;
            }
        }
        // fix depths level by level (children were filled in id order, so
        // depth[i] was already final when its children were assigned)
        Ok(RootedTree {
            parent,
            children,
            depth,
            root: 0,
            shape: Some(PerfectShape { arity: r, levels: h }),
        })
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v]
    }

    pub fn shape(&self) -> Option<PerfectShape> {
        self.shape
    }

    pub fn is_plane_leaf(&self, v: VertexId) -> bool {
        self.children[v].is_empty()
    }

    /// Requires shape metadata; errors otherwise.
    pub fn require_shape(&self) -> Result<PerfectShape> {
        self.shape
            .ok_or_else(|| Error::Shape("tree is not a perfect r-ary tree".to_string()))
    }

    fn detect_perfect(&self) -> Option<PerfectShape> {
        let n = self.vertex_count();
        if n == 1 {
            return Some(PerfectShape { arity: 2, levels: 1 });
        }
        let leaf_depth = self
            .children
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_empty())
            .map(|(v, _)| self.depth[v])
            .max()?;
        let arity = self.children[self.root].len();
        if arity < 2 {
            return None;
        }
        for v in 0..n {
            let c = self.children[v].len();
            if c == 0 {
                if self.depth[v] != leaf_depth {
                    return None;
                }
            } else if c != arity {
                return None;
            }
        }
        Some(PerfectShape {
            arity,
            levels: leaf_depth + 1,
        })
    }

    /// The leaf reached from `v` by always taking the first child.
    pub fn leftmost_leaf_under(&self, v: VertexId) -> VertexId {
        let mut cur = v;
        while let Some(&c) = self.children[cur].first() {
            cur = c;
        }
        cur
    }

    pub fn leftmost_leaf(&self) -> VertexId {
        self.leftmost_leaf_under(self.root)
    }

    /// The path from `v` down to the leftmost leaf of the tree. `v` must be
    /// an ancestor of that leaf (equivalently, lie on the first-child chain
    /// from the root), and the tree must be perfect.
    pub fn leftmost_path(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        self.require_shape()?;
        let leaf = self.leftmost_leaf();
        let mut path = vec![leaf];
        let mut cur = leaf;
        while cur != v {
            match self.parent[cur] {
                Some(p) => {
                    path.push(p);
                    cur = p;
                }
                None => {
                    return Err(Error::pre(format!(
                        "vertex {v} is not an ancestor of the leftmost leaf {leaf}"
                    )))
                }
            }
        }
        path.reverse();
        Ok(path)
    }

    /// True if `a` is an ancestor of `d` or equal to it.
    pub fn is_ancestor_or_self(&self, a: VertexId, d: VertexId) -> bool {
        let mut cur = d;
        while self.depth[cur] > self.depth[a] {
            cur = self.parent[cur].unwrap();
        }
        cur == a
    }

    /// All vertices of the subtree rooted at `v`, in DFS (plane) order.
    pub fn subtree_vertices(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            for &c in self.children[x].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Number of levels of the subtree rooted at `v` in a perfect tree.
    pub fn subtree_levels(&self, v: VertexId) -> Result<usize> {
        let shape = self.require_shape()?;
        Ok(shape.levels - self.depth[v])
    }

    /// Parent-array text form: vertex count on the first line, then the
    /// parent of each vertex with the root marked -1.
    pub fn serialize(&self) -> String {
        let parents: Vec<String> = self
            .parent
            .iter()
            .map(|p| p.map_or_else(|| "-1".to_string(), |p| p.to_string()))
            .collect();
        format!("{}\n{}\n", self.vertex_count(), parents.join(" "))
    }

    pub fn parents(&self) -> &[Option<VertexId>] {
        &self.parent
    }

    /// Applies a relabeling permutation: vertex `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[VertexId]) -> Result<Self> {
        let n = self.vertex_count();
        assert_eq!(perm.len(), n);
        let mut parents = vec![None; n];
        for v in 0..n {
            parents[perm[v]] = self.parent[v].map(|p| perm[p]);
        }
        RootedTree::from_parents(&parents)
    }
}

/// Parses the tree text format, or the `perfect:<r>:<h>` shorthand.
///
/// Format: the first data line holds the vertex count `n`, the second holds
/// `n` whitespace-separated parent ids with the root marked -1. Lines
/// starting with `#` are ignored.
pub fn parse_tree(text: &str) -> Result<RootedTree> {
    if let Some(t) = parse_shorthand(text.trim())? {
        return Ok(t);
    }
    let mut lines = data_lines(text);
    let (n_line, n_text) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty input".to_string() })?;
    let n = parse_count(n_line, n_text)?;
    let (p_line, p_text) = lines.next().ok_or_else(|| Error::Parse {
        line: n_line + 1,
        msg: "missing parent line".to_string(),
    })?;
    if let Some((extra_line, extra)) = lines.next() {
        if !extra.trim().is_empty() {
            return Err(Error::Parse {
                line: extra_line,
                msg: "trailing content after parent line".to_string(),
            });
        }
    }
    let parents = parse_parent_line(p_line, p_text, n)?;
    RootedTree::from_parents_at_line(&parents, p_line)
}

pub(crate) fn parse_shorthand(text: &str) -> Result<Option<RootedTree>> {
    let Some(rest) = text.strip_prefix("perfect:") else {
        return Ok(None);
    };
    let mut it = rest.split(':');
    let (r, h) = match (it.next(), it.next(), it.next()) {
        (Some(r), Some(h), None) => (r, h),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("malformed shorthand `perfect:{rest}`, expected perfect:<r>:<h>"),
            })
        }
    };
    let r: usize = r.parse().map_err(|_| Error::Parse {
        line: 1,
        msg: format!("malformed arity `{r}`"),
    })?;
    let h: usize = h.parse().map_err(|_| Error::Parse {
        line: 1,
        msg: format!("malformed level count `{h}`"),
    })?;
    RootedTree::perfect(r, h).map(Some)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty())
}

fn parse_count(line: usize, text: &str) -> Result<usize> {
    text.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("malformed vertex count `{}`", text.trim()),
    })
}

fn parse_parent_line(line: usize, text: &str, n: usize) -> Result<Vec<Option<VertexId>>> {
    let mut parents = Vec::with_capacity(n);
    for tok in text.split_whitespace() {
        if tok == "-1" {
            parents.push(None);
        } else {
            let p: usize = tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("malformed parent id `{tok}`"),
            })?;
            parents.push(Some(p));
        }
    }
    if parents.len() != n {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} parent entries, found {}", parents.len()),
        });
    }
    Ok(parents)
}

/// Reads the blocks of a forest file: blocks separated by blank lines, each
/// block either a two-line tree or a `perfect:<r>:<h>` shorthand line.
pub(crate) fn parse_tree_blocks(text: &str) -> Result<Vec<RootedTree>> {
    let mut trees = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let flush = |block: &mut Vec<(usize, &str)>, trees: &mut Vec<RootedTree>| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let first = block[0];
        if first.1.trim().starts_with("perfect:") {
            if block.len() > 1 {
                return Err(Error::Parse {
                    line: block[1].0,
                    msg: "unexpected content after shorthand block".to_string(),
                });
            }
            trees.push(parse_shorthand(first.1.trim())?.unwrap());
        } else {
            let n = parse_count(first.0, first.1)?;
            if block.len() != 2 {
                return Err(Error::Parse {
                    line: first.0,
                    msg: format!("tree block must be two lines, found {}", block.len()),
                });
            }
            let parents = parse_parent_line(block[1].0, block[1].1, n)?;
            trees.push(RootedTree::from_parents_at_line(&parents, block[1].0)?);
        }
        block.clear();
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim_start().starts_with('#') {
            continue;
        }
        if raw.trim().is_empty() {
            flush(&mut block, &mut trees)?;
        } else {
            block.push((line, raw));
        }
    }
    flush(&mut block, &mut trees)?;
    if trees.is_empty() {
        return Err(Error::Parse { line: 1, msg: "empty input".to_string() });
    }
    Ok(trees)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_2_3_has_seven_vertices_four_leaves_at_depth_2() {
        let t = RootedTree::perfect(2, 3).unwrap();
        assert_eq!(t.vertex_count(), 7);
        let leaves: Vec<_> = (0..7).filter(|&v| t.is_plane_leaf(v)).collect();
        assert_eq!(leaves, vec![3, 4, 5, 6]);
        assert!(leaves.iter().all(|&v| t.depth(v) == 2));
        assert_eq!(t.shape(), Some(PerfectShape { arity: 2, levels: 3 }));
    }

    #[test]
    fn perfect_3_2_has_four_vertices_three_leaves() {
        let t = RootedTree::perfect(3, 2).unwrap();
        assert_eq!(t.vertex_count(), 4);
        assert_eq!((0..4).filter(|&v| t.is_plane_leaf(v)).count(), 3);
    }

    #[test]
    fn perfect_degenerate_single_vertex() {
        let t = RootedTree::perfect(2, 1).unwrap();
        assert_eq!(t.vertex_count(), 1);
        assert!(t.is_plane_leaf(0));
        assert_eq!(t.root(), 0);
    }

    #[test]
    fn perfect_rejects_bad_parameters() {
        assert!(RootedTree::perfect(1, 3).is_err());
        assert!(RootedTree::perfect(0, 2).is_err());
        assert!(RootedTree::perfect(2, 0).is_err());
    }

    #[test]
    fn perfect_shape_counts() {
        for (r, h) in [(2, 2), (2, 5), (3, 3), (4, 2)] {
            let t = RootedTree::perfect(r, h).unwrap();
            let shape = t.shape().unwrap();
            assert_eq!(t.vertex_count(), shape.vertex_count());
            let leaves = (0..t.vertex_count())
                .filter(|&v| t.is_plane_leaf(v))
                .count();
            assert_eq!(leaves, shape.leaf_count());
            for v in 0..t.vertex_count() {
                if t.is_plane_leaf(v) {
                    assert_eq!(t.depth(v), h - 1);
                } else {
                    assert_eq!(t.children(v).len(), r);
                }
            }
        }
    }

    #[test]
    fn parse_star_on_three_vertices() {
        let t = parse_tree("3\n-1 0 0\n").unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(t.children(0), &[1, 2]);
    }

    #[test]
    fn parse_shorthand_matches_builder() {
        let a = parse_tree("perfect:2:4").unwrap();
        let b = RootedTree::perfect(2, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.vertex_count(), 15);
    }

    #[test]
    fn parse_length_mismatch_is_an_error() {
        let err = parse_tree("3\n-1 0 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn parse_rejects_cycles_and_multiple_roots() {
        assert!(parse_tree("2\n-1 -1\n").is_err());
        assert!(parse_tree("3\n-1 2 1\n").is_err());
        assert!(parse_tree("2\n-1 5\n").is_err());
        assert!(parse_tree("2\n-1 x\n").is_err());
    }

    #[test]
    fn comments_are_ignored() {
        let t = parse_tree("# a star\n3\n# parents follow\n-1 0 0\n").unwrap();
        assert_eq!(t.vertex_count(), 3);
    }

    #[test]
    fn leftmost_paths() {
        let t = RootedTree::perfect(2, 3).unwrap();
        assert_eq!(t.leftmost_path(0).unwrap(), vec![0, 1, 3]);
        assert_eq!(t.leftmost_path(3).unwrap(), vec![3]);
        assert!(t.leftmost_path(2).is_err());

        let t = RootedTree::perfect(2, 4).unwrap();
        assert_eq!(t.leftmost_path(0).unwrap(), vec![0, 1, 3, 7]);
    }

    #[test]
    fn leftmost_path_length_and_endpoint() {
        for (r, h) in [(2usize, 4usize), (3, 3), (4, 2)] {
            let t = RootedTree::perfect(r, h).unwrap();
            let path = t.leftmost_path(0).unwrap();
            assert_eq!(path.len(), h);
            let expect = (r.pow(h as u32 - 1) - 1) / (r - 1);
            assert_eq!(*path.last().unwrap(), expect);
        }
    }

    #[test]
    fn serialize_parse_roundtrip() {
        let t = RootedTree::perfect(3, 2).unwrap();
        let back = parse_tree(&t.serialize()).unwrap();
        assert_eq!(t.parents(), back.parents());
    }

    #[test]
    fn detect_perfect_on_parsed_tree() {
        let t = parse_tree("7\n-1 0 0 1 1 2 2\n").unwrap();
        assert_eq!(t.shape(), Some(PerfectShape { arity: 2, levels: 3 }));
        let t = parse_tree("4\n-1 0 0 1\n").unwrap();
        assert_eq!(t.shape(), None);
    }
}
