//! Uniform random discrete trees and the edge-cutting procedure that
//! isolates the root.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::analytics::rayleigh_cdf;
use crate::error::{invalid, Error, Result};
use crate::par;
use crate::rng::{make_stream, RandomStream};
use crate::stats::{ks_test, mean_and_stderr, variance, StatReport};

/// A rooted tree stored as a parent array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteTree {
    parent: Vec<Option<usize>>,
    root: usize,
}

impl DiscreteTree {
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(invalid(format!("expected exactly one root, found {}", roots.len())));
        }
        let tree = Self { parent, root: roots[0] };
        // every vertex must reach the root within n steps
        for v in 0..n {
            let mut cur = v;
            for _ in 0..=n {
                match tree.parent[cur] {
                    None => break,
                    Some(p) if p < n => cur = p,
                    Some(p) => return Err(invalid(format!("parent {p} out of range"))),
                }
            }
            if cur != tree.root {
                return Err(invalid(format!("vertex {v} is on a cycle")));
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn n_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn n_edges(&self) -> usize {
        self.parent.len() - 1
    }

    /// Children lists in compressed form: `(offsets, flat)`.
    fn children(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.parent.len();
        let mut offsets = vec![0usize; n + 1];
        for p in self.parent.iter().flatten() {
            offsets[p + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut flat = vec![0usize; n.saturating_sub(1)];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                flat[fill[p]] = v;
                fill[p] += 1;
            }
        }
        (offsets, flat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutResult {
    pub n_edges: usize,
    pub cuts: usize,
}

/// Uniform rooted labelled tree with `n_edges` edges.
pub fn sample_cayley(n_edges: usize, stream: &mut RandomStream) -> Result<DiscreteTree> {
    if n_edges < 1 {
        return Err(invalid("Cayley tree needs at least one edge"));
    }
    let n = n_edges + 1;
    let code: Vec<usize> = (0..n.saturating_sub(2)).map(|_| stream.next_index(n)).collect();
    let edges = prufer_decode(&code, n);
    let root = stream.next_index(n);
    Ok(orient(&edges, n, root))
}

/// Edges of the labelled tree on `n` vertices with Prüfer code `code`.
pub fn prufer_decode(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    debug_assert_eq!(code.len() + 2, n);
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let Reverse(leaf) = leaves.pop().expect("a Prüfer code always leaves a leaf");
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.push(Reverse(c));
        }
    }
    let Reverse(u) = leaves.pop().expect("two vertices remain");
    let Reverse(v) = leaves.pop().expect("two vertices remain");
    edges.push((u, v));
    edges
}

fn orient(edges: &[(usize, usize)], n: usize, root: usize) -> DiscreteTree {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(u);
                stack.push(w);
            }
        }
    }
    DiscreteTree { parent, root }
}

/// Uniform rooted planar binary tree with `n_leaves` leaves (Rémy's
/// algorithm). Children are stored left-to-right.
#[derive(Debug, Clone)]
pub struct PlanarBinaryTree {
    /// `children[v]` is `None` for leaves.
    pub children: Vec<Option<[usize; 2]>>,
    pub parent: Vec<Option<usize>>,
    pub root: usize,
}

impl PlanarBinaryTree {
    pub fn to_discrete(&self) -> DiscreteTree {
        DiscreteTree {
            parent: self.parent.clone(),
            root: self.root,
        }
    }
}

pub fn sample_planar_binary(n_leaves: usize, stream: &mut RandomStream) -> Result<PlanarBinaryTree> {
    if n_leaves < 1 {
        return Err(invalid("binary tree needs at least one leaf"));
    }
    let mut t = PlanarBinaryTree {
        children: vec![None],
        parent: vec![None],
        root: 0,
    };
    for _ in 1..n_leaves {
        let x = stream.next_index(t.children.len());
        let leaf_left = stream.next_index(2) == 0;
        let y = t.children.len();
        let z = y + 1;
        let kids = if leaf_left { [z, x] } else { [x, z] };
        t.children.push(Some(kids));
        t.children.push(None);
        let px = t.parent[x];
        t.parent.push(px);
        t.parent.push(Some(y));
        match px {
            None => t.root = y,
            Some(p) => {
                let slot = t.children[p].as_mut().expect("parents are internal");
                let side = if slot[0] == x { 0 } else { 1 };
                slot[side] = y;
            }
        }
        t.parent[x] = Some(y);
    }
    Ok(t)
}

/// Uniform rooted planar binary tree as a parent array.
pub fn sample_binary(n_leaves: usize, stream: &mut RandomStream) -> Result<DiscreteTree> {
    sample_planar_binary(n_leaves, stream).map(|t| t.to_discrete())
}

/// Cuts uniformly chosen edges of the root component until the root is
/// isolated.
pub fn cut_to_root(tree: &DiscreteTree, stream: &mut RandomStream) -> CutResult {
    cut_with(tree, |alive| stream.next_index(alive))
}

/// The cutting loop with an explicit chooser: `pick(k)` returns an index in
/// `0..k` into the current alive-edge list.
pub fn cut_with(tree: &DiscreteTree, mut pick: impl FnMut(usize) -> usize) -> CutResult {
    let n = tree.n_vertices();
    let (offsets, flat) = tree.children();
    // an edge is named by its lower endpoint
    let mut alive: Vec<usize> = (0..n).filter(|&v| v != tree.root).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in alive.iter().enumerate() {
        pos[v] = i;
    }
    let mut stack = Vec::new();
    let mut cuts = 0;
    while !alive.is_empty() {
        let chosen = alive[pick(alive.len())];
        cuts += 1;
        stack.push(chosen);
        while let Some(v) = stack.pop() {
            let i = pos[v];
            if i == usize::MAX {
                // discarded by an earlier cut, together with its subtree
                continue;
            }
            let last = *alive.last().expect("v is alive");
            alive.swap_remove(i);
            if last != v {
                pos[last] = i;
            }
            pos[v] = usize::MAX;
            stack.extend_from_slice(&flat[offsets[v]..offsets[v + 1]]);
        }
    }
    CutResult {
        n_edges: tree.n_edges(),
        cuts,
    }
}

/// Cutting driven by fixed marks: edges (named by their lower endpoint)
/// are cut in increasing order of `marks[v]`, skipping discarded ones. An
/// edge gets cut iff its mark is below every mark above it on the root
/// path, so this only needs one pass. The root's mark is ignored.
pub fn cut_by_marks(tree: &DiscreteTree, marks: &[f64]) -> Result<CutResult> {
    let n = tree.n_vertices();
    if marks.len() != n {
        return Err(Error::LengthMismatch(marks.len(), n));
    }
    let (offsets, flat) = tree.children();
    let mut cuts = 0;
    let mut stack = vec![(tree.root, f64::INFINITY)];
    while let Some((v, above)) = stack.pop() {
        let below = if v == tree.root {
            above
        } else if marks[v] < above {
            cuts += 1;
            marks[v]
        } else {
            above
        };
        stack.extend(flat[offsets[v]..offsets[v + 1]].iter().map(|&c| (c, below)));
    }
    Ok(CutResult {
        n_edges: tree.n_edges(),
        cuts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cayley,
    Binary,
}

impl Family {
    /// Number of edges of a tree of the given `size` parameter.
    pub fn n_edges(self, size: usize) -> usize {
        match self {
            Family::Cayley => size,
            Family::Binary => 2 * size.saturating_sub(1),
        }
    }

    pub fn sample(self, size: usize, stream: &mut RandomStream) -> Result<DiscreteTree> {
        match self {
            Family::Cayley => sample_cayley(size, stream),
            Family::Binary => sample_binary(size, stream),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Cayley => "cayley",
            Family::Binary => "binary",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cayley" => Ok(Family::Cayley),
            "binary" => Ok(Family::Binary),
            other => Err(Error::Parse(format!("unknown tree family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CuttingReport {
    pub family: Family,
    pub n_edges: usize,
    pub cuts: Vec<usize>,
    /// `E[X]/√n` with stderr.
    pub scaled_mean: StatReport,
    /// `Var(X)/n`.
    pub scaled_variance: StatReport,
    /// KS of `X/√n` against Rayleigh.
    pub ks: StatReport,
}

pub fn cutting_moments(family: Family, size: usize, replicates: usize, seed: u64) -> Result<CuttingReport> {
    if replicates < 1000 {
        return Err(Error::TooFewSamples {
            needed: 1000,
            got: replicates,
        });
    }
    let n_edges = family.n_edges(size);
    if n_edges < 1 {
        return Err(invalid(format!("{family} tree of size {size} has no edges")));
    }
    let cuts = par::try_map_replicates(replicates as u64, |r| {
        let mut s = make_stream(seed, r);
        let tree = family.sample(size, &mut s)?;
        Ok(cut_to_root(&tree, &mut s).cuts)
    })?;
    let root_n = (n_edges as f64).sqrt();
    let scaled: Vec<f64> = cuts.iter().map(|&c| c as f64 / root_n).collect();
    let (m, se) = mean_and_stderr(&scaled);
    let var = variance(&scaled);
    // stderr of a sample variance via the fourth central moment
    let m4 = scaled.iter().map(|x| (x - m).powi(4)).sum::<f64>() / scaled.len() as f64;
    let var_se = ((m4 - var * var) / scaled.len() as f64).max(0.0).sqrt();
    let mut ks = ks_test(&scaled, rayleigh_cdf)?;
    ks.name = format!("{family}_ks_rayleigh");
    Ok(CuttingReport {
        family,
        n_edges,
        scaled_mean: StatReport::estimate(format!("{family}_mean_over_sqrt_n"), m, se).with_pass(true),
        scaled_variance: StatReport::estimate(format!("{family}_var_over_n"), var, var_se).with_pass(true),
        ks: ks.note("n_edges", n_edges),
        cuts,
    })
}

/// Exact `E[cuts]` for a uniform rooted Cayley tree with `n_edges` edges.
///
/// An edge is cut iff it carries the first mark on its root path, so
/// `E[cuts] = n_edges · E[1/d]` where `d` is the depth of a uniform
/// non-root vertex, `P(d = k) = (k+1)(n−2)!/((n−1−k)! nᵏ)` on `n` vertices.
pub fn cayley_expected_cuts(n_edges: usize) -> Result<f64> {
    if n_edges < 1 {
        return Err(invalid("Cayley tree needs at least one edge"));
    }
    let n = (n_edges + 1) as f64;
    let mut p = 2.0 / n;
    let mut acc = 0.0;
    for k in 1..=n_edges {
        acc += p / k as f64;
        let kf = k as f64;
        p *= (kf + 2.0) / (kf + 1.0) * (n - 1.0 - kf) / n;
    }
    Ok(n_edges as f64 * acc)
}

/// Exact `E[cuts]` by recursion over root components. Exponential in the
/// number of vertices; meant for trees with at most a dozen or so vertices.
pub fn exact_expected_cuts(tree: &DiscreteTree) -> Result<f64> {
    let n = tree.n_vertices();
    if n > 20 {
        return Err(invalid(format!(
            "exhaustive enumeration limited to 20 vertices, got {n}"
        )));
    }
    // subtree[v]: bitmask of v and its descendants
    let mut subtree: Vec<u32> = (0..n).map(|v| 1u32 << v).collect();
    for v in 0..n {
        let mut cur = tree.parent[v];
        while let Some(p) = cur {
            subtree[p] |= 1 << v;
            cur = tree.parent[p];
        }
    }
    let mut memo = std::collections::HashMap::new();
    Ok(expected_from(subtree[tree.root], tree.root, &subtree, &mut memo))
}

fn expected_from(component: u32, root: usize, subtree: &[u32], memo: &mut std::collections::HashMap<u32, f64>) -> f64 {
    if component == 1 << root {
        return 0.0;
    }
    if let Some(&v) = memo.get(&component) {
        return v;
    }
    let edges: Vec<usize> = (0..subtree.len())
        .filter(|&v| v != root && component & (1 << v) != 0)
        .collect();
    let total: f64 = edges
        .iter()
        .map(|&v| expected_from(component & !subtree[v], root, subtree, memo))
        .sum();
    let value = 1.0 + total / edges.len() as f64;
    memo.insert(component, value);
    value
}

/// Every rooted labelled tree on `n_vertices` vertices.
pub fn all_rooted_labelled_trees(n_vertices: usize) -> Vec<DiscreteTree> {
    let mut out = Vec::new();
    if n_vertices == 0 {
        return out;
    }
    let others = n_vertices - 1;
    let combos = n_vertices.pow(others as u32);
    for root in 0..n_vertices {
        for code in 0..combos {
            let mut parent = vec![None; n_vertices];
            let mut c = code;
            for v in (0..n_vertices).filter(|&v| v != root) {
                parent[v] = Some(c % n_vertices);
                c /= n_vertices;
            }
            if parent.iter().enumerate().any(|(v, p)| *p == Some(v)) {
                continue;
            }
            if let Ok(t) = DiscreteTree::from_parents(parent) {
                out.push(t);
            }
        }
    }
    out
}
