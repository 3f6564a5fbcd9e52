//! The link graph: one vertex per split, one edge per compatible pair.
//!
//! Its cliques are the faces of the link complex (which is flag), so only
//! the 1-skeleton is stored. This module also carries the searches used to
//! check the graph's structure: its Kneser layers, their maximum independent
//! sets, and the full automorphism group.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::split::{
    apply_permutation, are_compatible, enumerate_splits, LeafCount, Permutation, Split,
};

/// Largest leaf count for which the full link graph is built.
pub const MAX_LINK_LEAVES: usize = 12;

#[derive(Clone, Debug)]
pub struct LinkGraph {
    n: LeafCount,
    vertices: Vec<Split>,
    index: HashMap<Split, usize>,
    neighbors: Vec<Vec<usize>>,
    matrix: Vec<bool>,
}

/// Builds the link graph on all splits of `n` leaves, for `3 <= n <= 12`.
pub fn build_link_graph(n: LeafCount) -> Result<LinkGraph> {
    if n.get() > MAX_LINK_LEAVES {
        return Err(Error::TooLarge(format!(
            "link graph for n = {n} (limit {MAX_LINK_LEAVES})"
        )));
    }
    Ok(LinkGraph::on_vertices(n, enumerate_splits(n)))
}

impl LinkGraph {
    fn on_vertices(n: LeafCount, vertices: Vec<Split>) -> Self {
        let count = vertices.len();
        let mut matrix = vec![false; count * count];
        let mut neighbors = vec![Vec::new(); count];
        for i in 0..count {
            for j in i + 1..count {
                if are_compatible(&vertices[i], &vertices[j]).expect("same leaf count") {
                    matrix[i * count + j] = true;
                    matrix[j * count + i] = true;
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        let index = vertices.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        LinkGraph {
            n,
            vertices,
            index,
            neighbors,
            matrix,
        }
    }

    /// Induced subgraph on the vertices satisfying `keep`.
    pub fn induced(&self, keep: impl Fn(&Split) -> bool) -> LinkGraph {
        let kept = self.vertices.iter().filter(|s| keep(s)).copied().collect();
        LinkGraph::on_vertices(self.n, kept)
    }

    pub fn n(&self) -> LeafCount {
        self.n
    }

    pub fn vertices(&self) -> &[Split] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn index_of(&self, s: &Split) -> Option<usize> {
        self.index.get(s).copied()
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.matrix[i * self.vertices.len() + j]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Whether every vertex degree matches [`degree_formula`].
    pub fn degrees_match_formula(&self) -> bool {
        (0..self.vertex_count()).all(|i| {
            degree_formula(self.n, self.vertices[i].size()).ok() == Some(self.degree(i) as u64)
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph link {\n");
        for (i, s) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{s}\"];");
        }
        for (i, j) in self.edges() {
            let _ = writeln!(out, "  v{i} -- v{j};");
        }
        out.push_str("}\n");
        out
    }

    fn require(&self, v: &Split) -> Result<usize> {
        self.index_of(v).ok_or(Error::VertexNotFound(*v))
    }

    fn neighbors_of_size(&self, v: &Split, size: usize) -> Result<BTreeSet<Split>> {
        let i = self.require(v)?;
        Ok(self.neighbors[i]
            .iter()
            .map(|&j| self.vertices[j])
            .filter(|w| w.size() == size)
            .collect())
    }
}

/// Degree of a vertex of part size `k`: `2^k + 2^(n-k) - n - 4`.
pub fn degree_formula(n: LeafCount, k: usize) -> Result<u64> {
    let n = n.get();
    if k < 2 || 2 * k > n {
        return Err(Error::KOutOfRange { n, k });
    }
    Ok((1u64 << k) + (1u64 << (n - k)) - n as u64 - 4)
}

/// The layer `G_k`: the induced subgraph on splits with side size `k`.
///
/// For `2k < n` this is the Kneser graph `KG(n, k)`; for `2k = n` it is
/// edgeless.
pub fn kneser_subgraph(g: &LinkGraph, k: usize) -> Result<LinkGraph> {
    let n = g.n().get();
    if k < 2 || 2 * k > n {
        return Err(Error::KOutOfRange { n, k });
    }
    Ok(g.induced(|s| s.size() == k))
}

/// The `n` star families `{v in G_k : i in P_v}`, for `i = 1..=n`.
pub fn ekr_independent_sets(g: &LinkGraph, k: usize) -> Result<Vec<Vec<Split>>> {
    let n = g.n().get();
    if k < 2 || 2 * k >= n {
        return Err(Error::KOutOfRange { n, k });
    }
    Ok((1..=n)
        .map(|i| {
            g.vertices()
                .iter()
                .filter(|s| s.size() == k && s.contains(i))
                .copied()
                .collect()
        })
        .collect())
}

/// `N(P_v)^{+1}`: neighbours of `v` whose side is one larger.
pub fn upward_neighbors(g: &LinkGraph, v: &Split) -> Result<BTreeSet<Split>> {
    g.neighbors_of_size(v, v.size() + 1)
}

/// `N(P_v)^{-1}`: neighbours of `v` whose side is one smaller.
pub fn downward_neighbors(g: &LinkGraph, v: &Split) -> Result<BTreeSet<Split>> {
    g.neighbors_of_size(v, v.size() - 1)
}

pub const DEFAULT_MIS_VERTEX_CAP: usize = 25;

/// Every independent set of maximum size, by exact branch and bound.
pub fn maximum_independent_sets(g: &LinkGraph) -> Result<Vec<Vec<Split>>> {
    maximum_independent_sets_capped(g, DEFAULT_MIS_VERTEX_CAP)
}

/// As [`maximum_independent_sets`] with an explicit vertex limit (at most 64).
pub fn maximum_independent_sets_capped(g: &LinkGraph, cap: usize) -> Result<Vec<Vec<Split>>> {
    let count = g.vertex_count();
    if count > cap.min(64) {
        return Err(Error::TooLarge(format!(
            "independent set search on {count} vertices (limit {})",
            cap.min(64)
        )));
    }
    let nbr: Vec<u64> = (0..count)
        .map(|i| g.neighbors(i).iter().fold(0u64, |m, &j| m | 1 << j))
        .collect();
    let all = if count == 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    };

    let mut search = MisSearch {
        nbr: &nbr,
        best: greedy_independent(&nbr, all).count_ones(),
        found: Vec::new(),
    };
    search.run(0, all);

    let mut sets: Vec<Vec<Split>> = search
        .found
        .into_iter()
        .map(|m| {
            (0..count)
                .filter(|&i| m >> i & 1 == 1)
                .map(|i| g.vertices()[i])
                .collect()
        })
        .collect();
    sets.sort();
    Ok(sets)
}

fn greedy_independent(nbr: &[u64], all: u64) -> u64 {
    let mut chosen = 0u64;
    let mut cand = all;
    while cand != 0 {
        let v = (0..nbr.len())
            .filter(|&i| cand >> i & 1 == 1)
            .min_by_key(|&i| (nbr[i] & cand).count_ones())
            .expect("cand is nonempty");
        chosen |= 1 << v;
        cand &= !(nbr[v] | 1 << v);
    }
    chosen
}

struct MisSearch<'a> {
    nbr: &'a [u64],
    best: u32,
    found: Vec<u64>,
}

impl MisSearch<'_> {
    fn run(&mut self, chosen: u64, cand: u64) {
        let size = chosen.count_ones();
        if cand == 0 {
            if size > self.best {
                self.best = size;
                self.found.clear();
            }
            if size == self.best {
                self.found.push(chosen);
            }
            return;
        }
        if size + self.clique_cover_bound(cand) < self.best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let bit = 1u64 << v;
        self.run(chosen | bit, cand & !(self.nbr[v] | bit));
        self.run(chosen, cand & !bit);
    }

    /// An independent set meets each clique of a clique cover at most once.
    fn clique_cover_bound(&self, cand: u64) -> u32 {
        let mut rest = cand;
        let mut cliques = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let mut common = self.nbr[v] & rest;
            rest &= !(1u64 << v);
            while common != 0 {
                let w = common.trailing_zeros() as usize;
                rest &= !(1u64 << w);
                common &= self.nbr[w] & !(1u64 << w);
            }
            cliques += 1;
        }
        cliques
    }
}

/// A permutation of a graph's vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexMap(pub Vec<usize>);

impl VertexMap {
    pub fn identity(len: usize) -> Self {
        VertexMap((0..len).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &VertexMap) -> VertexMap {
        VertexMap(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn is_automorphism_of(&self, g: &LinkGraph) -> bool {
        let count = g.vertex_count();
        if self.0.len() != count {
            return false;
        }
        let mut seen = vec![false; count];
        for &v in &self.0 {
            if v >= count || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        (0..count).all(|i| (0..count).all(|j| g.adjacent(i, j) == g.adjacent(self.0[i], self.0[j])))
    }
}

/// The vertex map `v ↦ σ(v)` induced by a leaf relabelling.
pub fn permutation_to_automorphism(sigma: &Permutation, g: &LinkGraph) -> Result<VertexMap> {
    if sigma.n() != g.n() {
        return Err(Error::LeafCountMismatch(sigma.n().get(), g.n().get()));
    }
    g.vertices()
        .iter()
        .map(|v| {
            let image = apply_permutation(sigma, v)?;
            g.require(&image)
        })
        .collect::<Result<Vec<_>>>()
        .map(VertexMap)
}

#[derive(Clone, Copy, Debug)]
pub struct AutSearchOptions {
    pub max_vertices: usize,
    /// Maximum number of candidate assignments tried.
    pub node_budget: u64,
    /// Elements are kept only while the group is at most this large.
    pub element_cap: usize,
}

impl Default for AutSearchOptions {
    fn default() -> Self {
        AutSearchOptions {
            max_vertices: 60,
            node_budget: 200_000_000,
            element_cap: 100_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismGroup {
    pub order: u64,
    pub generators: Vec<VertexMap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<VertexMap>>,
}

pub fn brute_force_automorphisms(g: &LinkGraph) -> Result<AutomorphismGroup> {
    brute_force_automorphisms_with(g, AutSearchOptions::default())
}

/// Full automorphism group by backtracking.
///
/// Vertices are partitioned by the signature (degree, sorted neighbour
/// degrees) and only mapped within their class. They are assigned in an
/// order that keeps each new vertex adjacent to as many assigned ones as
/// possible, and every partial map is checked against all earlier
/// assignments.
pub fn brute_force_automorphisms_with(
    g: &LinkGraph,
    opts: AutSearchOptions,
) -> Result<AutomorphismGroup> {
    let count = g.vertex_count();
    if count > opts.max_vertices {
        return Err(Error::TooLarge(format!(
            "automorphism search on {count} vertices (limit {})",
            opts.max_vertices
        )));
    }

    let signature: Vec<(usize, Vec<usize>)> = (0..count)
        .map(|i| {
            let mut nd: Vec<usize> = g.neighbors(i).iter().map(|&j| g.degree(j)).collect();
            nd.sort_unstable();
            (g.degree(i), nd)
        })
        .collect();
    let candidates: Vec<Vec<usize>> = (0..count)
        .map(|i| {
            (0..count)
                .filter(|&j| signature[j] == signature[i])
                .collect()
        })
        .collect();

    let order = assignment_order(g);
    let mut search = AutSearch {
        g,
        order: &order,
        candidates: &candidates,
        image: vec![usize::MAX; count],
        used: vec![false; count],
        nodes: 0,
        budget: opts.node_budget,
        found: 0,
        element_cap: opts.element_cap,
        elements: Vec::new(),
    };
    search.extend(0)?;

    let AutSearch {
        found, elements, ..
    } = search;
    let complete = found as usize == elements.len();
    let generators = greedy_generators(&elements);
    Ok(AutomorphismGroup {
        order: found,
        generators,
        elements: complete.then_some(elements),
    })
}

fn assignment_order(g: &LinkGraph) -> Vec<usize> {
    let count = g.vertex_count();
    let mut placed = vec![false; count];
    let mut links = vec![0usize; count];
    let mut order = Vec::with_capacity(count);
    for _ in 0..count {
        let next = (0..count)
            .filter(|&i| !placed[i])
            .max_by_key(|&i| (links[i], g.degree(i), std::cmp::Reverse(i)))
            .expect("unplaced vertex remains");
        placed[next] = true;
        order.push(next);
        for &j in g.neighbors(next) {
            links[j] += 1;
        }
    }
    order
}

struct AutSearch<'a> {
    g: &'a LinkGraph,
    order: &'a [usize],
    candidates: &'a [Vec<usize>],
    image: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
    budget: u64,
    found: u64,
    element_cap: usize,
    elements: Vec<VertexMap>,
}

impl AutSearch<'_> {
    fn extend(&mut self, depth: usize) -> Result<()> {
        if depth == self.order.len() {
            self.found += 1;
            if self.elements.len() < self.element_cap {
                self.elements.push(VertexMap(self.image.clone()));
            }
            return Ok(());
        }
        let v = self.order[depth];
        for &w in &self.candidates[v] {
            if self.used[w] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::SearchBudgetExceeded(self.budget));
            }
            let consistent = self.order[..depth]
                .iter()
                .all(|&u| self.g.adjacent(u, v) == self.g.adjacent(self.image[u], w));
            if !consistent {
                continue;
            }
            self.image[v] = w;
            self.used[w] = true;
            self.extend(depth + 1)?;
            self.used[w] = false;
            self.image[v] = usize::MAX;
        }
        Ok(())
    }
}

/// Picks elements not yet generated until the generated subgroup covers
/// all of `elements`.
fn greedy_generators(elements: &[VertexMap]) -> Vec<VertexMap> {
    let Some(first) = elements.first() else {
        return Vec::new();
    };
    let mut group: HashSet<VertexMap> = HashSet::from([VertexMap::identity(first.0.len())]);
    let mut generators = Vec::new();
    for e in elements {
        if group.contains(e) {
            continue;
        }
        generators.push(e.clone());
        let mut frontier: Vec<VertexMap> = group.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for gen in &generators {
                let y = gen.compose(&x);
                if group.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
    }
    generators
}

/// All cliques with exactly `size` vertices, as sorted index lists.
pub fn cliques_of_size(g: &LinkGraph, size: usize) -> Vec<Vec<usize>> {
    fn grow(
        g: &LinkGraph,
        size: usize,
        current: &mut Vec<usize>,
        cand: &[usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for (pos, &v) in cand.iter().enumerate() {
            let next: Vec<usize> = cand[pos + 1..]
                .iter()
                .copied()
                .filter(|&w| g.adjacent(v, w))
                .collect();
            if current.len() + 1 + next.len() < size {
                continue;
            }
            current.push(v);
            grow(g, size, current, &next, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if size == 0 {
        out.push(Vec::new());
        return out;
    }
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    grow(g, size, &mut Vec::new(), &all, &mut out);
    out
}

/// Summary of a link graph, with automorphism data when it was computed.
#[derive(Clone, Debug, Serialize)]
pub struct LinkReport {
    pub n: usize,
    pub vertices: usize,
    pub edges: usize,
    pub degrees_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aut_order: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<VertexMap>>,
}

impl LinkReport {
    pub fn new(g: &LinkGraph, aut: Option<&AutomorphismGroup>) -> Self {
        LinkReport {
            n: g.n().get(),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            degrees_ok: g.degrees_match_formula(),
            aut_order: aut.map(|a| a.order),
            generators: aut.map(|a| a.generators.clone()),
        }
    }
}
