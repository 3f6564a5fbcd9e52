//! Points of tree space, small-ball volumes and distance bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::split::{are_compatible, LeafCount, Permutation, Split};
use crate::topology::{count_refining_orthants, double_factorial, Topology};

/// A tree with positive internal edge lengths.
///
/// Leaf edge lengths may be carried along as metadata; they take no part in
/// coordinates, norms or distances, which live on the internal edges only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreePointRepr", into = "TreePointRepr")]
pub struct TreePoint {
    topology: Topology,
    lengths: BTreeMap<Split, f64>,
    leaf_lengths: Option<BTreeMap<usize, f64>>,
}

fn check_length(len: f64) -> Result<f64> {
    if len > 0.0 && len.is_finite() {
        Ok(len)
    } else {
        Err(Error::InvalidLength(len))
    }
}

impl TreePoint {
    pub fn new(topology: Topology, lengths: BTreeMap<Split, f64>) -> Result<Self> {
        if lengths.len() != topology.p() || !lengths.keys().all(|s| topology.contains(s)) {
            return Err(Error::LengthKeysMismatch);
        }
        for &len in lengths.values() {
            check_length(len)?;
        }
        Ok(TreePoint {
            topology,
            lengths,
            leaf_lengths: None,
        })
    }

    /// Builds the topology from `(split, length)` pairs.
    pub fn from_edges(n: LeafCount, edges: impl IntoIterator<Item = (Split, f64)>) -> Result<Self> {
        let lengths: BTreeMap<Split, f64> = edges.into_iter().collect();
        let topology = Topology::new(lengths.keys().copied(), n)?;
        TreePoint::new(topology, lengths)
    }

    /// Every internal edge gets the same length.
    pub fn uniform(topology: Topology, length: f64) -> Result<Self> {
        let lengths = topology.splits().map(|s| (*s, length)).collect();
        TreePoint::new(topology, lengths)
    }

    pub fn cone_point(n: LeafCount) -> Self {
        TreePoint {
            topology: Topology::cone(n),
            lengths: BTreeMap::new(),
            leaf_lengths: None,
        }
    }

    /// Attaches pendant edge lengths, keyed by leaf.
    pub fn with_leaf_lengths(mut self, leaf_lengths: BTreeMap<usize, f64>) -> Result<Self> {
        let n = self.n().get();
        for (&leaf, &len) in &leaf_lengths {
            if leaf == 0 || leaf > n {
                return Err(Error::LeafOutOfRange { leaf, n });
            }
            if !(len >= 0.0 && len.is_finite()) {
                return Err(Error::InvalidLength(len));
            }
        }
        self.leaf_lengths = Some(leaf_lengths);
        Ok(self)
    }

    pub fn n(&self) -> LeafCount {
        self.topology.n()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn lengths(&self) -> &BTreeMap<Split, f64> {
        &self.lengths
    }

    pub fn length(&self, s: &Split) -> Option<f64> {
        self.lengths.get(s).copied()
    }

    pub fn leaf_lengths(&self) -> Option<&BTreeMap<usize, f64>> {
        self.leaf_lengths.as_ref()
    }

    pub fn min_edge(&self) -> Option<f64> {
        self.lengths.values().copied().reduce(f64::min)
    }

    /// Euclidean norm of the internal edge lengths: the distance to the cone point.
    pub fn norm(&self) -> f64 {
        self.lengths.values().map(|l| l * l).sum::<f64>().sqrt()
    }

    /// Whether the point lies on the unit sphere around the cone point.
    pub fn is_on_unit_sphere(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Relabels leaves by `sigma`.
    pub fn permuted(&self, sigma: &Permutation) -> Result<TreePoint> {
        let lengths = self
            .lengths
            .iter()
            .map(|(s, &l)| Ok((s.permuted(sigma)?, l)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let leaf_lengths = self
            .leaf_lengths
            .as_ref()
            .map(|m| m.iter().map(|(&leaf, &l)| (sigma.image(leaf), l)).collect());
        Ok(TreePoint {
            topology: self.topology.permuted(sigma)?,
            lengths,
            leaf_lengths,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    side: Vec<usize>,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct LeafLengthRepr {
    leaf: usize,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct TreePointRepr {
    n: usize,
    edges: Vec<EdgeRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leaf_lengths: Option<Vec<LeafLengthRepr>>,
}

impl TryFrom<TreePointRepr> for TreePoint {
    type Error = Error;

    fn try_from(r: TreePointRepr) -> Result<Self> {
        let n = LeafCount::new(r.n)?;
        let edges = r
            .edges
            .iter()
            .map(|e| Ok((Split::new(&e.side, n)?, e.length)))
            .collect::<Result<Vec<_>>>()?;
        let point = TreePoint::from_edges(n, edges)?;
        match r.leaf_lengths {
            Some(leaves) => {
                point.with_leaf_lengths(leaves.into_iter().map(|l| (l.leaf, l.length)).collect())
            }
            None => Ok(point),
        }
    }
}

impl From<TreePoint> for TreePointRepr {
    fn from(x: TreePoint) -> Self {
        TreePointRepr {
            n: x.n().get(),
            edges: x
                .lengths
                .iter()
                .map(|(s, &length)| EdgeRepr {
                    side: s.side(),
                    length,
                })
                .collect(),
            leaf_lengths: x.leaf_lengths.map(|m| {
                m.into_iter()
                    .map(|(leaf, length)| LeafLengthRepr { leaf, length })
                    .collect()
            }),
        }
    }
}

/// Volume of the Euclidean ball of radius `eps` in `R^m`,
/// `π^(m/2) ε^m / Γ(m/2 + 1)`.
pub fn euclidean_ball_volume(m: usize, eps: f64) -> Result<f64> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::NonpositiveRadius(eps));
    }
    // unit-ball volumes via V_m = V_{m-2} · 2π / m, exact at every integer m
    let mut unit = if m.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if m.is_multiple_of(2) { 2 } else { 3 };
    while k <= m {
        unit *= 2.0 * PI / k as f64;
        k += 2;
    }
    Ok(unit * eps.powi(m as i32))
}

/// `s(F) / 2^(n-3-p)` as an exact fraction.
pub fn ball_coefficient(t: &Topology) -> BigRational {
    let codim = t.n().orthant_dim() - t.p();
    BigRational::new(
        BigInt::from(count_refining_orthants(t)),
        BigInt::one() << codim,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallVolume {
    pub value: f64,
    pub n: usize,
    pub p: usize,
    #[serde(serialize_with = "serialize_biguint")]
    pub s_f: BigUint,
    pub epsilon: f64,
    #[serde(skip)]
    pub coefficient: BigRational,
}

fn serialize_biguint<S: serde::Serializer>(
    v: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(small) => s.serialize_u64(small),
        None => s.serialize_str(&v.to_string()),
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// Volume of the `eps`-ball around `x`, valid while `eps` is below every
/// internal edge length of `x`.
pub fn ball_volume(x: &TreePoint, eps: f64) -> Result<BallVolume> {
    let base = euclidean_ball_volume(x.n().orthant_dim(), eps)?;
    if let Some(min_edge) = x.min_edge() {
        if eps >= min_edge {
            return Err(Error::EpsilonTooLarge {
                epsilon: eps,
                min_edge,
            });
        }
    }
    let t = x.topology();
    let coefficient = ball_coefficient(t);
    Ok(BallVolume {
        value: rational_to_f64(&coefficient) * base,
        n: t.n().get(),
        p: t.p(),
        s_f: count_refining_orthants(t),
        epsilon: eps,
        coefficient,
    })
}

/// Exact coefficients of the lower and upper volume bounds for a point
/// with `p` internal edges: `1` and `(2n - 2p - 5)!! 2^p / 2^(n-3)`.
pub fn ball_bound_coefficients(n: LeafCount, p: usize) -> Result<(BigRational, BigRational)> {
    let dim = n.orthant_dim();
    if p > dim {
        return Err(Error::POutOfRange { n: n.get(), p });
    }
    let df = double_factorial(2 * (n.get() - p) as i64 - 5).expect("n - p >= 3");
    let upper = BigRational::new(BigInt::from(df) << p, BigInt::one() << dim);
    Ok((BigRational::one(), upper))
}

pub fn ball_volume_bounds(n: LeafCount, p: usize, eps: f64) -> Result<(f64, f64)> {
    let (lower, upper) = ball_bound_coefficients(n, p)?;
    let base = euclidean_ball_volume(n.orthant_dim(), eps)?;
    Ok((
        rational_to_f64(&lower) * base,
        rational_to_f64(&upper) * base,
    ))
}

pub fn is_cone_point(x: &TreePoint) -> bool {
    x.topology().is_cone_point()
}

fn require_same_n(a: &TreePoint, b: &TreePoint) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::LeafCountMismatch(a.n().get(), b.n().get()));
    }
    Ok(())
}

/// Length of the straight segment from `a` to `b` when both lie in one
/// closed orthant, i.e. when all their splits are pairwise compatible.
/// `None` when no orthant contains both.
pub fn same_orthant_distance(a: &TreePoint, b: &TreePoint) -> Result<Option<f64>> {
    require_same_n(a, b)?;
    for s in a.lengths.keys() {
        for t in b.lengths.keys() {
            if !are_compatible(s, t)? {
                return Ok(None);
            }
        }
    }
    let mut union: BTreeMap<Split, (f64, f64)> = BTreeMap::new();
    for (s, &l) in &a.lengths {
        union.entry(*s).or_default().0 = l;
    }
    for (s, &l) in &b.lengths {
        union.entry(*s).or_default().1 = l;
    }
    Ok(Some(
        union
            .values()
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
    ))
}

/// Length of the path `a → c → b` through the cone point.
pub fn cone_path_length(a: &TreePoint, b: &TreePoint) -> Result<f64> {
    require_same_n(a, b)?;
    Ok(a.norm() + b.norm())
}

/// An upper bound on the geodesic distance: the shorter of the in-orthant
/// segment (when one exists) and the cone path. Exact whenever `a` and `b`
/// share a closed orthant.
pub fn distance_upper_bound(a: &TreePoint, b: &TreePoint) -> Result<f64> {
    let cone = cone_path_length(a, b)?;
    Ok(match same_orthant_distance(a, b)? {
        Some(d) => d.min(cone),
        None => cone,
    })
}
