//! Tree topologies as sets of pairwise compatible splits.
//!
//! A [`Topology`] with `p` splits is a `p`-dimensional face of tree space;
//! the empty topology is the star tree (the cone point) and a topology with
//! `n - 3` splits is a binary tree, i.e. a top-dimensional orthant.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::split::{are_compatible, leaves_of, LeafCount, Permutation, Split};

/// Default limit on the number of items any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "TopologyRepr", into = "TopologyRepr")]
pub struct Topology {
    n: LeafCount,
    splits: BTreeSet<Split>,
}

impl Topology {
    /// Validates and builds a topology from its splits.
    pub fn new(splits: impl IntoIterator<Item = Split>, n: LeafCount) -> Result<Self> {
        let splits: BTreeSet<Split> = splits.into_iter().collect();
        if let Some(s) = splits.iter().find(|s| s.n() != n) {
            return Err(Error::LeafCountMismatch(n.get(), s.n().get()));
        }
        let max = n.get() - 3;
        if splits.len() > max {
            return Err(Error::TooManySplits {
                count: splits.len(),
                max,
            });
        }
        for (a, b) in splits.iter().tuple_combinations() {
            if !are_compatible(a, b)? {
                return Err(Error::IncompatiblePair(*a, *b));
            }
        }
        Ok(Topology { n, splits })
    }

    /// The star tree with no internal edges.
    pub fn cone(n: LeafCount) -> Self {
        Topology {
            n,
            splits: BTreeSet::new(),
        }
    }

    pub(crate) fn from_trusted(splits: BTreeSet<Split>, n: LeafCount) -> Self {
        debug_assert!(splits.len() <= n.get() - 3);
        Topology { n, splits }
    }

    #[inline]
    pub fn n(&self) -> LeafCount {
        self.n
    }

    /// Number of internal edges.
    #[inline]
    pub fn p(&self) -> usize {
        self.splits.len()
    }

    pub fn splits(&self) -> impl ExactSizeIterator<Item = &Split> + '_ {
        self.splits.iter()
    }

    pub fn split_set(&self) -> &BTreeSet<Split> {
        &self.splits
    }

    pub fn contains(&self, s: &Split) -> bool {
        self.splits.contains(s)
    }

    pub fn is_binary(&self) -> bool {
        self.p() == self.n.get() - 3
    }

    pub fn is_cone_point(&self) -> bool {
        self.splits.is_empty()
    }

    /// Whether every split of `self` also appears in `other`.
    pub fn is_face_of(&self, other: &Topology) -> bool {
        self.n == other.n && self.splits.is_subset(&other.splits)
    }

    pub fn permuted(&self, sigma: &Permutation) -> Result<Topology> {
        let splits = self
            .splits
            .iter()
            .map(|s| s.permuted(sigma))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Topology { n: self.n, splits })
    }
}

#[derive(Serialize, Deserialize)]
struct TopologyRepr {
    n: usize,
    splits: Vec<Vec<usize>>,
}

impl TryFrom<TopologyRepr> for Topology {
    type Error = Error;

    fn try_from(r: TopologyRepr) -> Result<Self> {
        let n = LeafCount::new(r.n)?;
        let splits = r
            .splits
            .iter()
            .map(|side| Split::new(side, n))
            .collect::<Result<Vec<_>>>()?;
        Topology::new(splits, n)
    }
}

impl From<Topology> for TopologyRepr {
    fn from(t: Topology) -> Self {
        TopologyRepr {
            n: t.n.get(),
            splits: t.splits.iter().map(Split::side).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Leaves attached directly to this node.
    pub leaves: Vec<usize>,
    /// Indices into [`InternalTree::edges`].
    pub edges: Vec<usize>,
}

impl TreeNode {
    pub fn degree(&self) -> usize {
        self.leaves.len() + self.edges.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub split: Split,
}

impl TreeEdge {
    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// The unrooted tree realizing a topology, restricted to its internal
/// nodes: `p + 1` nodes joined by `p` edges, with every leaf hanging off
/// exactly one node.
#[derive(Clone, Debug)]
pub struct InternalTree {
    n: LeafCount,
    nodes: Vec<TreeNode>,
    edges: Vec<TreeEdge>,
    leaf_node: Vec<usize>,
}

impl InternalTree {
    pub fn n(&self) -> LeafCount {
        self.n
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    /// Node the given leaf is attached to.
    pub fn leaf_node(&self, leaf: usize) -> usize {
        self.leaf_node[leaf - 1]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.nodes.iter().map(TreeNode::degree).collect()
    }

    /// Leaves reachable from `from` without crossing edge `edge`.
    fn leaves_beyond(&self, from: usize, edge: usize) -> u64 {
        let mut mask = 0u64;
        let mut stack = vec![(from, edge)];
        while let Some((node, via)) = stack.pop() {
            for &l in &self.nodes[node].leaves {
                mask |= 1 << (l - 1);
            }
            for &e in &self.nodes[node].edges {
                if e != via {
                    stack.push((self.edges[e].other(node), e));
                }
            }
        }
        mask
    }

    /// Leaf set of each block around `node`: single leaves, and for every
    /// incident edge the leaves on its far side.
    pub fn node_blocks(&self, node: usize) -> Vec<u64> {
        let y = &self.nodes[node];
        let mut blocks: Vec<u64> = y.leaves.iter().map(|&l| 1u64 << (l - 1)).collect();
        for &e in &y.edges {
            blocks.push(self.leaves_beyond(self.edges[e].other(node), e));
        }
        blocks
    }

    /// Splits obtained by cutting each internal edge, recomputed from the
    /// tree structure rather than from the edge labels.
    pub fn induced_splits(&self) -> Result<BTreeSet<Split>> {
        (0..self.edges.len())
            .map(|e| Split::from_mask(self.leaves_beyond(self.edges[e].b, e), self.n))
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph tree {\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  y{i} [shape=point, xlabel=\"d={}\"];", node.degree());
        }
        for leaf in 1..=self.n.get() {
            let _ = writeln!(out, "  l{leaf} [label=\"{leaf}\", shape=plaintext];");
            let _ = writeln!(out, "  l{leaf} -- y{};", self.leaf_node(leaf));
        }
        for e in &self.edges {
            let _ = writeln!(out, "  y{} -- y{} [label=\"{}\"];", e.a, e.b, e.split);
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the unique tree whose internal edges induce exactly `t`'s splits.
///
/// Splits are inserted into the star tree by increasing side size. Canonical
/// sides of compatible splits are nested or disjoint, so when a split is
/// inserted every leaf and subtree on its side still hangs off node 0, and
/// the insertion moves them onto a new node.
pub fn reconstruct_tree(t: &Topology) -> InternalTree {
    let n = t.n();
    let mut nodes = vec![TreeNode {
        leaves: (1..=n.get()).collect(),
        edges: Vec::new(),
    }];
    let mut edges: Vec<TreeEdge> = Vec::new();
    let mut leaf_node = vec![0usize; n.get()];

    let mut ordered: Vec<Split> = t.splits().copied().collect();
    ordered.sort_by_key(|s| s.size());

    for split in ordered {
        let side = split.mask();
        let j = nodes.len();
        let (moved_leaves, kept_leaves): (Vec<usize>, Vec<usize>) = nodes[0]
            .leaves
            .iter()
            .partition(|&&l| side & (1 << (l - 1)) != 0);
        let (moved_edges, kept_edges): (Vec<usize>, Vec<usize>) = nodes[0]
            .edges
            .iter()
            .partition(|&&e| edges[e].split.mask() & !side == 0);
        for &l in &moved_leaves {
            leaf_node[l - 1] = j;
        }
        for &e in &moved_edges {
            edges[e].a = j;
        }
        let new_edge = edges.len();
        edges.push(TreeEdge { a: 0, b: j, split });
        nodes[0].leaves = kept_leaves;
        nodes[0].edges = kept_edges;
        nodes[0].edges.push(new_edge);
        let mut child_edges = moved_edges;
        child_edges.push(new_edge);
        nodes.push(TreeNode {
            leaves: moved_leaves,
            edges: child_edges,
        });
    }

    InternalTree {
        n,
        nodes,
        edges,
        leaf_node,
    }
}

/// Internal node degrees, largest first.
pub fn degree_sequence(t: &Topology) -> Vec<usize> {
    let mut d = reconstruct_tree(t).degrees();
    d.sort_unstable_by(|a, b| b.cmp(a));
    d
}

/// `m!! = m (m - 2) ⋯ 1` for odd `m >= -1`, with `(-1)!! = 1`.
pub fn double_factorial(m: i64) -> Result<BigUint> {
    if m < -1 || m % 2 == 0 {
        return Err(Error::NegativeOrEven(m));
    }
    let mut acc = BigUint::one();
    let mut k = m;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    Ok(acc)
}

/// Number of binary trees on `d` labelled leaves, `(2d - 5)!!`.
pub fn binary_topology_count(n: LeafCount) -> BigUint {
    double_factorial(2 * n.get() as i64 - 5).expect("odd and >= -1 for n >= 3")
}

/// `s(F)`: the number of binary topologies whose split set contains `t`'s,
/// as the product of `(2d - 5)!!` over internal node degrees.
pub fn count_refining_orthants(t: &Topology) -> BigUint {
    reconstruct_tree(t)
        .degrees()
        .into_iter()
        .map(|d| double_factorial(2 * d as i64 - 5).expect("internal degrees are >= 3"))
        .product()
}

fn check_cap(count: &BigUint, cap: u64) -> Result<()> {
    match count.to_u64() {
        Some(c) if c <= cap => Ok(()),
        _ => Err(Error::EnumerationTooLarge {
            count: count.to_string(),
            cap,
        }),
    }
}

/// All binary topologies refining `t`, built by choosing a binary
/// resolution of every internal node independently.
pub fn enumerate_binary_refinements(t: &Topology) -> Result<Vec<Topology>> {
    enumerate_binary_refinements_capped(t, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_binary_refinements_capped(t: &Topology, cap: u64) -> Result<Vec<Topology>> {
    let tree = reconstruct_tree(t);
    let n = t.n();

    // Per node: each binary resolution of its star, as the leaf masks of the
    // new splits it introduces.
    let mut per_node: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut total = BigUint::one();
    for node in 0..tree.nodes().len() {
        let blocks = tree.node_blocks(node);
        let d = LeafCount::new(blocks.len()).expect("internal degrees are in 3..=n");
        total *= binary_topology_count(d);
        check_cap(&total, cap)?;
        let options = enumerate_binary_topologies_capped(d, cap)?
            .map(|local| {
                local
                    .splits()
                    .map(|s| leaves_of(s.mask()).fold(0u64, |m, block| m | blocks[block - 1]))
                    .collect::<Vec<u64>>()
            })
            .collect::<Vec<_>>();
        per_node.push(options);
    }

    let mut out = Vec::new();
    for choice in per_node.iter().multi_cartesian_product() {
        let mut splits = t.split_set().clone();
        for masks in choice {
            for &m in masks {
                splits.insert(Split::from_mask(m, n)?);
            }
        }
        out.push(Topology::from_trusted(splits, n));
    }
    Ok(out)
}

/// Iterator over all `(2n - 5)!!` binary topologies on `n` leaves.
///
/// Trees are grown by stepwise leaf insertion: leaf `k` is attached to each
/// of the `2k - 5` edges of every tree on `k - 1` leaves, so every binary
/// tree appears exactly once.
pub struct BinaryTopologies {
    n: LeafCount,
    stack: Vec<Frame>,
    star_pending: bool,
}

struct Frame {
    edges: Vec<(u16, u16)>,
    next_leaf: u16,
    next_edge: usize,
}

pub fn enumerate_binary_topologies(n: LeafCount) -> Result<BinaryTopologies> {
    enumerate_binary_topologies_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_binary_topologies_capped(n: LeafCount, cap: u64) -> Result<BinaryTopologies> {
    check_cap(&binary_topology_count(n), cap)?;
    let size = n.get() as u16;
    // leaves 1..n are node ids 0..n-1; internal nodes start at id n
    let first = vec![(0, size), (1, size), (2, size)];
    Ok(BinaryTopologies {
        n,
        stack: if n.get() > 3 {
            vec![Frame {
                edges: first,
                next_leaf: 3,
                next_edge: 0,
            }]
        } else {
            Vec::new()
        },
        star_pending: n.get() == 3,
    })
}

impl Iterator for BinaryTopologies {
    type Item = Topology;

    fn next(&mut self) -> Option<Topology> {
        if self.star_pending {
            self.star_pending = false;
            return Some(Topology::cone(self.n));
        }
        let size = self.n.get() as u16;
        while let Some(frame) = self.stack.last_mut() {
            if frame.next_edge == frame.edges.len() {
                self.stack.pop();
                continue;
            }
            let e = frame.next_edge;
            frame.next_edge += 1;
            let leaf = frame.next_leaf;
            let edges = insert_leaf(&frame.edges, e, leaf, size + leaf - 2);
            if leaf + 1 == size {
                return Some(topology_of_binary_tree(&edges, self.n));
            }
            self.stack.push(Frame {
                edges,
                next_leaf: leaf + 1,
                next_edge: 0,
            });
        }
        None
    }
}

fn insert_leaf(edges: &[(u16, u16)], at: usize, leaf: u16, new_node: u16) -> Vec<(u16, u16)> {
    let mut out = edges.to_vec();
    let (u, v) = out[at];
    out[at] = (u, new_node);
    out.push((v, new_node));
    out.push((leaf, new_node));
    out
}

/// Splits of a tree given as an edge list where node ids `< n` are leaves.
fn topology_of_binary_tree(edges: &[(u16, u16)], n: LeafCount) -> Topology {
    let size = n.get() as u16;
    let node_count = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0) as usize + 1;
    let mut adj: Vec<Vec<u16>> = vec![Vec::new(); node_count];
    for &(u, v) in edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut splits = BTreeSet::new();
    for &(u, v) in edges {
        if u < size || v < size {
            continue;
        }
        let mut mask = 0u64;
        let mut stack = vec![(v, u)];
        while let Some((node, parent)) = stack.pop() {
            if node < size {
                mask |= 1 << node;
                continue;
            }
            for &next in &adj[node as usize] {
                if next != parent {
                    stack.push((next, node));
                }
            }
        }
        splits.insert(Split::from_mask(mask, n).expect("internal edge of a binary tree"));
    }
    Topology::from_trusted(splits, n)
}

/// A uniformly random binary topology, by inserting each leaf on a
/// uniformly chosen edge.
pub fn random_binary_topology<R: Rng + ?Sized>(n: LeafCount, rng: &mut R) -> Topology {
    let size = n.get() as u16;
    let mut edges = vec![(0, size), (1, size), (2, size)];
    for leaf in 3..size {
        let at = rng.gen_range(0..edges.len());
        edges = insert_leaf(&edges, at, leaf, size + leaf - 2);
    }
    topology_of_binary_tree(&edges, n)
}

/// A random face: a random binary topology with each split kept with
/// probability one half.
pub fn random_face<R: Rng + ?Sized>(n: LeafCount, rng: &mut R) -> Topology {
    let full = random_binary_topology(n, rng);
    let kept = full
        .splits()
        .filter(|_| rng.gen_bool(0.5))
        .copied()
        .collect();
    Topology::from_trusted(kept, n)
}

/// Every face of every binary topology on `n` leaves, without repeats.
pub fn enumerate_faces(n: LeafCount) -> Result<BTreeSet<Topology>> {
    let mut faces = BTreeSet::new();
    for binary in enumerate_binary_topologies(n)? {
        let splits: Vec<Split> = binary.splits().copied().collect();
        for subset in splits.iter().powerset() {
            faces.insert(Topology::from_trusted(
                subset.into_iter().copied().collect(),
                n,
            ));
        }
    }
    Ok(faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lc(n: usize) -> LeafCount {
        LeafCount::new(n).unwrap()
    }

    fn topo(sides: &[&[usize]], n: usize) -> Topology {
        let n = lc(n);
        Topology::new(sides.iter().map(|s| Split::new(s, n).unwrap()), n).unwrap()
    }

    #[test]
    fn make_topology_examples() {
        let cone = Topology::new([], lc(5)).unwrap();
        assert_eq!(cone.p(), 0);
        assert!(cone.is_cone_point());
        assert_eq!(topo(&[&[1, 2], &[1, 2, 3]], 6).p(), 2);

        let n = lc(6);
        let a = Split::new(&[1, 2], n).unwrap();
        let b = Split::new(&[2, 3], n).unwrap();
        assert_eq!(Topology::new([a, b], n), Err(Error::IncompatiblePair(a, b)));
    }

    #[test]
    fn make_topology_rejects_too_many_and_mismatched() {
        let n = lc(5);
        let s: Vec<Split> = [[1, 2], [3, 4], [1, 3]]
            .iter()
            .map(|x| Split::new(x, n).unwrap())
            .collect();
        assert_eq!(
            Topology::new(s, n),
            Err(Error::TooManySplits { count: 3, max: 2 })
        );
        let other = Split::new(&[1, 2], lc(6)).unwrap();
        assert_eq!(
            Topology::new([other], n),
            Err(Error::LeafCountMismatch(5, 6))
        );
    }

    #[test]
    fn reconstruct_examples() {
        let star = reconstruct_tree(&Topology::cone(lc(6)));
        assert_eq!(star.degrees(), vec![6]);

        let one = reconstruct_tree(&topo(&[&[1, 2]], 6));
        assert_eq!(one.nodes().len(), 2);
        let mut d = one.degrees();
        d.sort();
        assert_eq!(d, vec![3, 5]);
        assert_eq!(one.leaf_node(1), one.leaf_node(2));
        assert_ne!(one.leaf_node(1), one.leaf_node(3));

        let bin = reconstruct_tree(&topo(&[&[1, 2], &[1, 2, 3], &[5, 6]], 6));
        assert_eq!(bin.nodes().len(), 4);
        assert!(bin.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn reconstruct_with_half_size_split() {
        let t = topo(&[&[1, 2], &[1, 2, 3], &[4, 5]], 6);
        let tree = reconstruct_tree(&t);
        assert_eq!(tree.induced_splits().unwrap(), *t.split_set());
        assert!(tree.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn degree_sequence_examples() {
        assert_eq!(degree_sequence(&Topology::cone(lc(6))), vec![6]);
        assert_eq!(degree_sequence(&topo(&[&[1, 2]], 6)), vec![5, 3]);
        assert_eq!(degree_sequence(&topo(&[&[1, 2]], 7)), vec![6, 3]);
    }

    #[test]
    fn double_factorial_examples() {
        assert_eq!(double_factorial(-1).unwrap(), BigUint::one());
        assert_eq!(double_factorial(1).unwrap(), BigUint::one());
        assert_eq!(double_factorial(5).unwrap(), BigUint::from(15u32));
        assert_eq!(double_factorial(11).unwrap(), BigUint::from(10395u32));
        assert_eq!(double_factorial(4), Err(Error::NegativeOrEven(4)));
        assert_eq!(double_factorial(-3), Err(Error::NegativeOrEven(-3)));
    }

    #[test]
    fn refining_orthant_examples() {
        let bin = topo(&[&[1, 2], &[1, 2, 3], &[5, 6]], 6);
        assert_eq!(count_refining_orthants(&bin), BigUint::one());
        assert_eq!(
            count_refining_orthants(&Topology::cone(lc(6))),
            BigUint::from(105u32)
        );
        assert_eq!(
            count_refining_orthants(&topo(&[&[1, 2]], 6)),
            BigUint::from(15u32)
        );
    }

    #[test]
    fn refinement_examples() {
        let bin = topo(&[&[1, 2], &[1, 2, 3], &[5, 6]], 6);
        assert_eq!(enumerate_binary_refinements(&bin).unwrap(), vec![bin]);

        let cone5 = enumerate_binary_refinements(&Topology::cone(lc(5))).unwrap();
        assert_eq!(cone5.len(), 15);
        assert_eq!(cone5.iter().collect::<BTreeSet<_>>().len(), 15);

        let one = topo(&[&[1, 2]], 5);
        let refs = enumerate_binary_refinements(&one).unwrap();
        let expected: BTreeSet<Topology> = [
            topo(&[&[1, 2], &[3, 4]], 5),
            topo(&[&[1, 2], &[3, 5]], 5),
            topo(&[&[1, 2], &[4, 5]], 5),
        ]
        .into_iter()
        .collect();
        assert_eq!(refs.into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn binary_counts() {
        let expected = [(3, 1), (4, 3), (5, 15), (6, 105), (7, 945), (8, 10395)];
        for (n, count) in expected {
            let all: Vec<Topology> = enumerate_binary_topologies(lc(n)).unwrap().collect();
            assert_eq!(all.len(), count, "n = {n}");
            assert!(all.iter().all(Topology::is_binary));
            assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), count);
        }
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_binary_topologies(lc(11)),
            Err(Error::EnumerationTooLarge {
                cap: DEFAULT_ENUMERATION_CAP,
                ..
            })
        ));
        assert!(enumerate_binary_topologies(lc(10)).is_ok());
        assert!(enumerate_binary_topologies_capped(lc(6), 104).is_err());
        assert!(enumerate_binary_refinements_capped(&Topology::cone(lc(6)), 100).is_err());
    }

    #[test]
    fn is_binary_examples() {
        assert!(!Topology::cone(lc(5)).is_binary());
        assert!(!topo(&[&[1, 2], &[1, 2, 3]], 6).is_binary());
        assert!(topo(&[&[1, 2], &[1, 2, 3], &[5, 6]], 6).is_binary());
    }

    #[test]
    fn reconstruction_round_trip_and_degree_sum() {
        for n in 4..=7 {
            for face in enumerate_faces(lc(n)).unwrap() {
                let tree = reconstruct_tree(&face);
                assert_eq!(tree.induced_splits().unwrap(), *face.split_set());
                let labels: BTreeSet<Split> = tree.edges().iter().map(|e| e.split).collect();
                assert_eq!(labels, *face.split_set());
                let degrees = tree.degrees();
                assert_eq!(degrees.len(), face.p() + 1);
                assert!(degrees.iter().all(|&d| d >= 3));
                let excess: usize = degrees.iter().map(|d| d - 3).sum();
                assert_eq!(excess, n - face.p() - 3);
            }
        }
    }

    /// Refinements counted by filtering the full enumeration, independent of
    /// both the product formula and the per-node construction.
    fn filtered_refinements(t: &Topology) -> BTreeSet<Topology> {
        enumerate_binary_topologies(t.n())
            .unwrap()
            .filter(|b| t.is_face_of(b))
            .collect()
    }

    #[test]
    fn refinement_oracle_exhaustive_small() {
        for n in 4..=6 {
            for face in enumerate_faces(lc(n)).unwrap() {
                let built: BTreeSet<Topology> = enumerate_binary_refinements(&face)
                    .unwrap()
                    .into_iter()
                    .collect();
                let filtered = filtered_refinements(&face);
                assert_eq!(built, filtered);
                assert_eq!(
                    count_refining_orthants(&face),
                    BigUint::from(filtered.len())
                );
            }
        }
    }

    #[test]
    fn refinement_oracle_random_n7() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let face = random_face(lc(7), &mut rng);
            let built = enumerate_binary_refinements(&face).unwrap();
            assert_eq!(count_refining_orthants(&face), BigUint::from(built.len()));
            assert_eq!(
                built.into_iter().collect::<BTreeSet<_>>(),
                filtered_refinements(&face)
            );
        }
    }

    #[test]
    fn s_f_maximality_and_strictness() {
        for n in 4..=7 {
            let faces = enumerate_faces(lc(n)).unwrap();
            for p in 0..=n - 3 {
                let max_value = double_factorial(2 * (n - p) as i64 - 5).unwrap();
                let mut best = BigUint::from(0u32);
                for face in faces.iter().filter(|f| f.p() == p) {
                    let s = count_refining_orthants(face);
                    let degrees = degree_sequence(face);
                    let extremal = degrees[0] == n - p && degrees[1..].iter().all(|&d| d == 3);
                    assert_eq!(s == max_value, extremal, "n={n} p={p} {degrees:?}");
                    assert!(s <= max_value);
                    if p < n - 3 {
                        assert!(s > BigUint::from(1u64 << (n - 3 - p)));
                    }
                    best = best.max(s);
                }
                assert_eq!(best, max_value);
            }
        }
    }

    #[test]
    fn degree_sequence_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 5..=8 {
            let n = lc(n);
            for _ in 0..50 {
                let face = random_face(n, &mut rng);
                let mut images: Vec<usize> = (1..=n.get()).collect();
                rand::seq::SliceRandom::shuffle(images.as_mut_slice(), &mut rng);
                let sigma = Permutation::new(images).unwrap();
                let moved = face.permuted(&sigma).unwrap();
                assert_eq!(degree_sequence(&moved), degree_sequence(&face));
            }
        }
    }

    #[test]
    fn random_binary_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = random_binary_topology(lc(12), &mut rng);
            assert!(t.is_binary());
            Topology::new(t.splits().copied(), t.n()).unwrap();
        }
    }

    #[test]
    fn json_shape() {
        let t = topo(&[&[3, 4, 5, 6], &[1, 2, 3]], 6);
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(text, r#"{"n":6,"splits":[[1,2],[1,2,3]]}"#);
        let back: Topology = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Topology>(r#"{"n":6,"splits":[[1,2],[2,3]]}"#).is_err());
    }

    #[test]
    fn dot_export_mentions_every_leaf() {
        let dot = reconstruct_tree(&topo(&[&[1, 2]], 5)).to_dot();
        assert!(dot.starts_with("graph tree {"));
        for leaf in 1..=5 {
            assert!(dot.contains(&format!("l{leaf} -- y")));
        }
        assert!(dot.contains("1,2|3,4,5"));
    }
}
