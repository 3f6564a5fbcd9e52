//! Newick input and output.
//!
//! Accepted grammar:
//!
//! ```text
//! tree    := subtree ";"
//! subtree := "(" subtree ("," subtree)* ")" [label] [":" number]
//!          | label [":" number]
//! ```
//!
//! Whitespace may appear between tokens. Quoted labels and bracketed
//! comments are rejected. Rooted input is unrooted by suppressing a root of
//! degree two; any other node with fewer than three neighbours is an error.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::measure::TreePoint;
use crate::split::{LeafCount, Split};
use crate::topology::reconstruct_tree;

/// Length given to internal edges written without one.
pub const DEFAULT_INTERNAL_LENGTH: f64 = 1.0;

const MAX_DEPTH: usize = 512;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewickNode {
    pub children: Vec<NewickNode>,
    pub label: Option<String>,
    pub length: Option<f64>,
}

impl NewickNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn collect_leaf_labels<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(self.label.as_deref().unwrap_or_default());
        }
        for c in &self.children {
            c.collect_leaf_labels(out);
        }
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn subtree(&mut self, depth: usize) -> Result<NewickNode> {
        if depth > MAX_DEPTH {
            return self.syntax("nesting too deep");
        }
        self.skip_ws();
        let mut node = NewickNode::default();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            node.children.push(self.subtree(depth + 1)?);
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        node.children.push(self.subtree(depth + 1)?);
                    }
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.syntax("expected ',' or ')'"),
                }
            }
            node.label = self.label()?;
        } else {
            node.label = self.label()?;
            if node.label.is_none() {
                return self.syntax("expected a leaf label or '('");
            }
        }
        node.length = self.length()?;
        Ok(node)
    }

    fn label(&mut self) -> Result<Option<String>> {
        self.skip_ws();
        match self.peek() {
            Some(b'\'') | Some(b'"') => return self.syntax("quoted labels are not supported"),
            Some(b'[') => return self.syntax("comments are not supported"),
            _ => {}
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || b"(),:;[]'\"".contains(&c) {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        match std::str::from_utf8(&self.text[start..self.pos]) {
            Ok(s) => Ok(Some(s.to_owned())),
            Err(_) => self.syntax("label is not valid UTF-8"),
        }
    }

    fn length(&mut self) -> Result<Option<f64>> {
        self.skip_ws();
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            return Err(Error::NegativeLength(start));
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || b".eE+-".contains(&c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let token = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii");
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => {
                self.pos = start;
                self.syntax("expected a nonnegative number after ':'")
            }
        }
    }
}

/// Parses one `;`-terminated Newick statement into its node structure.
pub fn parse_newick_node(text: &str) -> Result<NewickNode> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let root = p.subtree(0)?;
    p.skip_ws();
    if p.peek() != Some(b';') {
        return p.syntax("expected ';'");
    }
    p.pos += 1;
    p.skip_ws();
    if p.pos != p.text.len() {
        return p.syntax("unexpected text after ';'");
    }
    Ok(root)
}

/// Bijection from leaf names to `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    names: HashMap<String, usize>,
}

impl LabelMap {
    pub fn new(pairs: impl IntoIterator<Item = (String, usize)>) -> Result<Self> {
        let names: HashMap<String, usize> = pairs.into_iter().collect();
        let n = names.len();
        let targets: HashSet<usize> = names.values().copied().collect();
        if targets.len() != n || !targets.iter().all(|&i| (1..=n).contains(&i)) {
            return Err(Error::InvalidLabelMap(format!(
                "indices must cover 1..={n} exactly once"
            )));
        }
        Ok(LabelMap { names })
    }

    /// Sorted names get `1, 2, …` in lexicographic order.
    pub fn lexicographic<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut sorted: Vec<&str> = names.iter().map(AsRef::as_ref).collect();
        sorted.sort_unstable();
        LabelMap::new(
            sorted
                .into_iter()
                .enumerate()
                .map(|(i, s)| (s.to_owned(), i + 1)),
        )
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }
}

fn resolve_labels(labels: &[&str], map: Option<&LabelMap>) -> Result<Vec<usize>> {
    let mut seen = HashSet::new();
    for &l in labels {
        if !seen.insert(l) {
            return Err(Error::DuplicateLeaf(l.to_owned()));
        }
    }
    let n = labels.len();
    if let Some(map) = map {
        if map.len() != n {
            return Err(Error::InvalidLabelMap(format!(
                "map has {} names but the tree has {n} leaves",
                map.len()
            )));
        }
        return labels
            .iter()
            .map(|&l| map.get(l).ok_or_else(|| Error::UnknownLabel(l.to_owned())))
            .collect();
    }
    let numeric: Vec<Option<usize>> = labels.iter().map(|l| l.parse::<usize>().ok()).collect();
    if numeric
        .iter()
        .all(|v| matches!(v, Some(i) if (1..=n).contains(i)))
    {
        let indices: Vec<usize> = numeric.into_iter().map(Option::unwrap).collect();
        let mut hit = vec![false; n + 1];
        for (&i, &l) in indices.iter().zip(labels) {
            if std::mem::replace(&mut hit[i], true) {
                return Err(Error::DuplicateLeaf(l.to_owned()));
            }
        }
        return Ok(indices);
    }
    if numeric.iter().any(Option::is_some) {
        return Err(Error::AmbiguousLabels);
    }
    let map = LabelMap::lexicographic(labels)?;
    Ok(labels
        .iter()
        .map(|&l| map.get(l).expect("built from these labels"))
        .collect())
}

#[derive(Clone, Debug)]
struct UNode {
    leaf: Option<usize>,
    adj: Vec<(usize, Option<f64>)>,
}

/// An unrooted tree with leaves labelled `1..=n` and every internal node of
/// degree at least three.
#[derive(Clone, Debug)]
pub struct UnrootedTree {
    n: LeafCount,
    nodes: Vec<UNode>,
}

impl UnrootedTree {
    /// Unroots a parsed tree, resolving leaf names through `map` (or the
    /// default numeric / lexicographic rule).
    pub fn from_newick(root: &NewickNode, map: Option<&LabelMap>) -> Result<Self> {
        let mut labels = Vec::new();
        root.collect_leaf_labels(&mut labels);
        let indices = resolve_labels(&labels, map)?;
        let n = LeafCount::new(labels.len())?;

        let mut nodes: Vec<UNode> = Vec::new();
        let mut next_leaf = indices.into_iter();
        build_nodes(root, None, &mut nodes, &mut next_leaf)?;

        let root_degree = nodes[0].adj.len();
        if nodes[0].leaf.is_none() && root_degree < 3 {
            if root_degree < 2 {
                return Err(Error::DegreeTwoInternal);
            }
            let (a, la) = nodes[0].adj[0];
            let (b, lb) = nodes[0].adj[1];
            let merged = match (la, lb) {
                (None, None) => None,
                (x, y) => Some(x.unwrap_or(0.0) + y.unwrap_or(0.0)),
            };
            nodes[0].adj.clear();
            for (x, y) in [(a, b), (b, a)] {
                for entry in nodes[x].adj.iter_mut() {
                    if entry.0 == 0 {
                        *entry = (y, merged);
                    }
                }
            }
        }
        Ok(UnrootedTree { n, nodes })
    }

    pub fn n(&self) -> LeafCount {
        self.n
    }

    fn live_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].adj.is_empty())
    }

    fn leaves_beyond(&self, from: usize, parent: usize) -> u64 {
        let mut mask = 0u64;
        let mut stack = vec![(from, parent)];
        while let Some((node, par)) = stack.pop() {
            if let Some(l) = self.nodes[node].leaf {
                mask |= 1 << (l - 1);
            }
            for &(next, _) in &self.nodes[node].adj {
                if next != par {
                    stack.push((next, node));
                }
            }
        }
        mask
    }

    /// Pendant edge length of each leaf, where one was given.
    pub fn leaf_lengths(&self) -> BTreeMap<usize, f64> {
        self.live_nodes()
            .filter_map(|i| {
                let node = &self.nodes[i];
                match (node.leaf, node.adj.first()) {
                    (Some(l), Some(&(_, Some(len)))) => Some((l, len)),
                    _ => None,
                }
            })
            .collect()
    }
}

fn build_nodes(
    node: &NewickNode,
    parent: Option<(usize, Option<f64>)>,
    nodes: &mut Vec<UNode>,
    leaves: &mut impl Iterator<Item = usize>,
) -> Result<usize> {
    let id = nodes.len();
    let leaf = if node.is_leaf() { leaves.next() } else { None };
    nodes.push(UNode {
        leaf,
        adj: Vec::new(),
    });
    if let Some((p, len)) = parent {
        nodes[id].adj.push((p, len));
        nodes[p].adj.push((id, len));
    }
    if !node.is_leaf() && parent.is_some() && node.children.len() < 2 {
        return Err(Error::DegreeTwoInternal);
    }
    for child in &node.children {
        build_nodes(child, Some((id, child.length)), nodes, leaves)?;
    }
    Ok(id)
}

/// One `(split, length)` per internal edge. Edges written without a length
/// get [`DEFAULT_INTERNAL_LENGTH`].
pub fn splits_from_tree(tree: &UnrootedTree) -> Result<Vec<(Split, f64)>> {
    let mut out = Vec::new();
    for u in tree.live_nodes() {
        if tree.nodes[u].leaf.is_some() {
            continue;
        }
        for &(v, len) in &tree.nodes[u].adj {
            if v > u && tree.nodes[v].leaf.is_none() {
                let side = tree.leaves_beyond(v, u);
                out.push((
                    Split::from_mask(side, tree.n)?,
                    len.unwrap_or(DEFAULT_INTERNAL_LENGTH),
                ));
            }
        }
    }
    out.sort_by_key(|&(s, _)| s);
    Ok(out)
}

/// Parses a Newick statement into a point of tree space. Zero-length
/// internal edges are contracted.
pub fn parse_newick(text: &str, map: Option<&LabelMap>) -> Result<TreePoint> {
    let root = parse_newick_node(text)?;
    let tree = UnrootedTree::from_newick(&root, map)?;
    let edges = splits_from_tree(&tree)?
        .into_iter()
        .filter(|&(_, len)| len > 0.0);
    let point = TreePoint::from_edges(tree.n(), edges)?;
    let leaf_lengths = tree.leaf_lengths();
    if leaf_lengths.is_empty() {
        Ok(point)
    } else {
        point.with_leaf_lengths(leaf_lengths)
    }
}

/// Parses one tree per line, skipping blank lines and lines starting with `#`.
pub fn parse_newick_lines(text: &str, map: Option<&LabelMap>) -> Result<Vec<TreePoint>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse_newick(l, map))
        .collect()
}

/// Canonical Newick form: rooted at the node holding leaf 1, children
/// ordered by their smallest leaf, lengths in shortest round-trip decimal.
pub fn to_newick(x: &TreePoint) -> String {
    let tree = reconstruct_tree(x.topology());
    let leaf_len = |l: usize| x.leaf_lengths().and_then(|m| m.get(&l).copied());

    // (smallest leaf, rendered text) for the subtree at `node`, entered via `via`
    fn render(
        tree: &crate::topology::InternalTree,
        x: &TreePoint,
        leaf_len: &dyn Fn(usize) -> Option<f64>,
        node: usize,
        via: Option<usize>,
    ) -> (usize, String) {
        let mut parts: Vec<(usize, String)> = Vec::new();
        for &l in &tree.nodes()[node].leaves {
            let mut s = l.to_string();
            if let Some(len) = leaf_len(l) {
                let _ = write!(s, ":{len}");
            }
            parts.push((l, s));
        }
        for &e in &tree.nodes()[node].edges {
            if Some(e) == via {
                continue;
            }
            let edge = tree.edges()[e];
            let (min, mut s) = render(tree, x, leaf_len, edge.other(node), Some(e));
            let len = x.length(&edge.split).expect("every split has a length");
            let _ = write!(s, ":{len}");
            parts.push((min, s));
        }
        parts.sort_by_key(|p| p.0);
        let min = parts[0].0;
        (
            min,
            format!(
                "({})",
                parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join(",")
            ),
        )
    }

    let (_, body) = render(&tree, x, &leaf_len, tree.leaf_node(1), None);
    body + ";"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::Permutation;
    use crate::topology::{enumerate_binary_topologies, Topology};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const REFERENCE_TREE: &str = "((1:1,6:1):0.25,((2:1,3:1):0.3,(4:1,5:1):0.45));";

    fn lc(n: usize) -> LeafCount {
        LeafCount::new(n).unwrap()
    }

    fn sp(side: &[usize], n: usize) -> Split {
        Split::new(side, lc(n)).unwrap()
    }

    fn sides(x: &TreePoint) -> Vec<(Vec<usize>, f64)> {
        x.lengths().iter().map(|(s, &l)| (s.side(), l)).collect()
    }

    #[test]
    fn parse_reference_tree() {
        let x = parse_newick(REFERENCE_TREE, None).unwrap();
        assert_eq!(x.n().get(), 6);
        assert_eq!(
            sides(&x),
            vec![(vec![1, 6], 0.25), (vec![2, 3], 0.3), (vec![4, 5], 0.45)]
        );
        assert!(x.topology().is_binary());
        let leaves = x.leaf_lengths().unwrap();
        assert_eq!(leaves.len(), 6);
        assert!(leaves.values().all(|&l| l == 1.0));
    }

    #[test]
    fn parse_star_and_zero_edges() {
        let star = parse_newick("(1,2,3,4,5);", None).unwrap();
        assert!(star.topology().is_cone_point());
        assert_eq!(star.n().get(), 5);
        assert!(star.leaf_lengths().is_none());
        let zero = parse_newick("((1,2):0.0,3,4,5);", None).unwrap();
        assert!(zero.topology().is_cone_point());
    }

    #[test]
    fn caterpillar_splits() {
        let root = parse_newick_node("((((1,2):0.1,3):0.2,4):0.3,5,6);").unwrap();
        let tree = UnrootedTree::from_newick(&root, None).unwrap();
        let got: Vec<Vec<usize>> = splits_from_tree(&tree)
            .unwrap()
            .iter()
            .map(|(s, _)| s.side())
            .collect();
        assert_eq!(got, vec![vec![1, 2], vec![5, 6], vec![1, 2, 3]]);
        // {1,2,3,4} is canonically {5,6}
        assert_eq!(sp(&[1, 2, 3, 4], 6), sp(&[5, 6], 6));
    }

    #[test]
    fn missing_internal_lengths_default() {
        let x = parse_newick("((1,2),3,(4,5));", None).unwrap();
        assert_eq!(x.length(&sp(&[1, 2], 5)), Some(DEFAULT_INTERNAL_LENGTH));
        assert_eq!(x.length(&sp(&[4, 5], 5)), Some(DEFAULT_INTERNAL_LENGTH));
    }

    #[test]
    fn root_suppression_sums_lengths() {
        let x = parse_newick("((1,2):0.5,(3,(4,5):0.2):0.25);", None).unwrap();
        assert_eq!(x.length(&sp(&[1, 2], 5)), Some(0.75));
        assert_eq!(x.length(&sp(&[4, 5], 5)), Some(0.2));
        // leaf directly under a degree-two root
        let y = parse_newick("(1:0.5,(2,3,(4,5):0.1):0.25);", None).unwrap();
        assert_eq!(sides(&y), vec![(vec![4, 5], 0.1)]);
        assert_eq!(y.leaf_lengths().unwrap().get(&1), Some(&0.75));
    }

    #[test]
    fn whitespace_and_internal_labels() {
        let x = parse_newick(" ( (1 , 2) inner : 0.5 , 3 ,\n 4 ) root ;\n", None).unwrap();
        assert_eq!(sides(&x), vec![(vec![1, 2], 0.5)]);
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "(1,2,3)",
            "(1,2,3);x",
            "(1,2,,3);",
            "(1,2,3;",
            "(1,'2',3);",
            "(1,2,3)[comment];",
            "(1,2:abc,3);",
            "();",
            "",
        ] {
            assert!(
                matches!(parse_newick(bad, None), Err(Error::Syntax { .. })),
                "{bad:?} -> {:?}",
                parse_newick(bad, None)
            );
        }
        assert_eq!(
            parse_newick("(1,2,3", None),
            Err(Error::Syntax {
                position: 6,
                message: "expected ',' or ')'".into()
            })
        );
    }

    #[test]
    fn semantic_errors() {
        assert_eq!(
            parse_newick("(1,2,1);", None),
            Err(Error::DuplicateLeaf("1".into()))
        );
        assert_eq!(
            parse_newick("(a,b,a);", None),
            Err(Error::DuplicateLeaf("a".into()))
        );
        assert_eq!(
            parse_newick("(1,2:-1,3);", None),
            Err(Error::NegativeLength(5))
        );
        assert_eq!(
            parse_newick("((1,2,3),(4),5);", None),
            Err(Error::DegreeTwoInternal)
        );
        assert_eq!(
            parse_newick("((1,2,3,4));", None),
            Err(Error::DegreeTwoInternal)
        );
        assert_eq!(
            parse_newick("(1,2);", None),
            Err(Error::InvalidLeafCount(2))
        );
        assert_eq!(parse_newick("(1,a,3);", None), Err(Error::AmbiguousLabels));
        assert_eq!(parse_newick("(1,2,30);", None), Err(Error::AmbiguousLabels));
    }

    #[test]
    fn label_resolution() {
        let x = parse_newick("((b,a):0.5,c,d);", None).unwrap();
        assert_eq!(sides(&x), vec![(vec![1, 2], 0.5)]);

        // ten leaves with numeric names must not be sorted as text
        let text = "((10,2):1,1,3,4,5,6,7,8,9);";
        let y = parse_newick(text, None).unwrap();
        assert_eq!(sides(&y), vec![(vec![2, 10], 1.0)]);

        let map = LabelMap::new([
            ("x".to_string(), 3),
            ("y".to_string(), 1),
            ("z".to_string(), 2),
            ("w".to_string(), 4),
        ])
        .unwrap();
        let z = parse_newick("((x,w):1,y,z);", Some(&map)).unwrap();
        assert_eq!(sides(&z), vec![(vec![1, 2], 1.0)]);
        assert_eq!(
            parse_newick("((x,q):1,y,z);", Some(&map)),
            Err(Error::UnknownLabel("q".into()))
        );
        assert!(matches!(
            parse_newick("((x,w):1,y,z,v);", Some(&map)),
            Err(Error::InvalidLabelMap(_))
        ));
        assert!(LabelMap::new([("a".to_string(), 1), ("b".to_string(), 3)]).is_err());
    }

    #[test]
    fn to_newick_examples() {
        assert_eq!(to_newick(&TreePoint::cone_point(lc(4))), "(1,2,3,4);");
        let x = parse_newick(REFERENCE_TREE, None).unwrap();
        let text = to_newick(&x);
        assert_eq!(text, "(1:1,((2:1,3:1):0.3,(4:1,5:1):0.45):0.25,6:1);");
        assert_eq!(parse_newick(&text, None).unwrap(), x);
    }

    #[test]
    fn to_newick_is_permutation_consistent() {
        let x = parse_newick(REFERENCE_TREE, None).unwrap();
        for sigma in Permutation::all(lc(6)).step_by(7) {
            let moved = x.permuted(&sigma).unwrap();
            let back = parse_newick(&to_newick(&moved), None).unwrap();
            assert_eq!(back, moved);
            for (s, &l) in x.lengths() {
                assert_eq!(back.length(&s.permuted(&sigma).unwrap()), Some(l));
            }
        }
    }

    #[test]
    fn round_trip_binary_topologies() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 4..=6 {
            for t in enumerate_binary_topologies(lc(n)).unwrap() {
                let edges: Vec<(Split, f64)> =
                    t.splits().map(|s| (*s, 1.0 - rng.gen::<f64>())).collect();
                let x = TreePoint::from_edges(lc(n), edges).unwrap();
                let back = parse_newick(&to_newick(&x), None).unwrap();
                assert_eq!(back, x);
                assert_eq!(back.topology().p(), n - 3);
            }
        }
    }

    #[test]
    fn parses_lines_skipping_comments() {
        let text = "# two trees\n(1,2,3,4);\n\n((1,2):1,3,4,5);\n";
        let trees = parse_newick_lines(text, None).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(
            trees[1].topology(),
            &Topology::new([sp(&[1, 2], 5)], lc(5)).unwrap()
        );
    }
}
