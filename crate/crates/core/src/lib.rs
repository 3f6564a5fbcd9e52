//! Combinatorics and local geometry of the Billera–Holmes–Vogtmann space of
//! phylogenetic trees on `n` labelled leaves.
//!
//! * [`split`]: leaf bipartitions, compatibility, leaf relabelling.
//! * [`topology`]: compatible split sets, tree reconstruction, orthant counts.
//! * [`link`]: the link graph, its Kneser layers and automorphisms.
//! * [`measure`]: tree points, small-ball volumes, distance bounds.
//! * [`newick`]: Newick parsing and canonical output.

pub mod error;
pub mod link;
pub mod measure;
pub mod newick;
pub mod split;
pub mod topology;

pub use error::{Error, Result};
pub use link::{
    brute_force_automorphisms, build_link_graph, degree_formula, downward_neighbors,
    ekr_independent_sets, kneser_subgraph, maximum_independent_sets, permutation_to_automorphism,
    upward_neighbors, AutomorphismGroup, LinkGraph, VertexMap,
};
pub use measure::{
    ball_volume, ball_volume_bounds, distance_upper_bound, euclidean_ball_volume, is_cone_point,
    same_orthant_distance, BallVolume, TreePoint,
};
pub use newick::{parse_newick, splits_from_tree, to_newick, LabelMap, NewickNode};
pub use split::{
    apply_permutation, are_compatible, compatible_by_containment, enumerate_splits, LeafCount,
    Permutation, Split, MAX_LEAVES,
};
pub use topology::{
    count_refining_orthants, degree_sequence, double_factorial, enumerate_binary_refinements,
    enumerate_binary_topologies, reconstruct_tree, InternalTree, Topology,
};
