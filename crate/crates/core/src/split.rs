//! Leaf bipartitions (splits) of the leaf set `{1, …, n}`.
//!
//! A split is stored as a bitmask of its canonical side: the smaller side,
//! or for an even `n` with equal halves, the half containing leaf 1. Leaf
//! `i` lives in bit `i - 1`, so at most 64 leaves are supported.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_LEAVES: usize = 64;

/// Number of leaves `n`, with `3 <= n <= 64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafCount(u8);

impl LeafCount {
    pub fn new(n: usize) -> Result<Self> {
        if (3..=MAX_LEAVES).contains(&n) {
            Ok(LeafCount(n as u8))
        } else {
            Err(Error::InvalidLeafCount(n))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Mask with one bit per leaf.
    #[inline]
    pub fn full_mask(self) -> u64 {
        full_mask(self.get())
    }

    /// Dimension `n - 3` of a top-dimensional orthant.
    pub fn orthant_dim(self) -> usize {
        self.get() - 3
    }
}

impl fmt::Display for LeafCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn leaves_of(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i + 1)
        }
    })
}

/// A bipartition `P | P^c` of the leaves with both sides of size at least 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SplitRepr", into = "SplitRepr")]
pub struct Split {
    side: u64,
    n: LeafCount,
}

impl Split {
    /// Builds the canonical split for `subset` (either side may be given).
    pub fn new(subset: &[usize], n: LeafCount) -> Result<Self> {
        let mut mask = 0u64;
        for &leaf in subset {
            if leaf == 0 || leaf > n.get() {
                return Err(Error::LeafOutOfRange { leaf, n: n.get() });
            }
            mask |= 1 << (leaf - 1);
        }
        Split::from_mask(mask, n)
    }

    /// Builds the canonical split from a bitmask of one side.
    pub fn from_mask(mask: u64, n: LeafCount) -> Result<Self> {
        let full = n.full_mask();
        if mask & !full != 0 {
            let leaf = 64 - (mask & !full).leading_zeros() as usize;
            return Err(Error::LeafOutOfRange { leaf, n: n.get() });
        }
        let size = mask.count_ones() as usize;
        if size < 2 || n.get() - size < 2 {
            return Err(Error::SubsetTooSmall { size, n: n.get() });
        }
        Ok(Split {
            side: canonical_side(mask, n),
            n,
        })
    }

    #[inline]
    pub fn n(&self) -> LeafCount {
        self.n
    }

    /// Bitmask of the canonical side.
    #[inline]
    pub fn mask(&self) -> u64 {
        self.side
    }

    #[inline]
    pub fn complement_mask(&self) -> u64 {
        !self.side & self.n.full_mask()
    }

    /// `|P_v|`, the size of the canonical side.
    #[inline]
    pub fn size(&self) -> usize {
        self.side.count_ones() as usize
    }

    pub fn side(&self) -> Vec<usize> {
        leaves_of(self.side).collect()
    }

    pub fn complement(&self) -> Vec<usize> {
        leaves_of(self.complement_mask()).collect()
    }

    #[inline]
    pub fn contains(&self, leaf: usize) -> bool {
        leaf >= 1 && leaf <= self.n.get() && self.side & (1 << (leaf - 1)) != 0
    }

    /// Whether `mask` is one of the two sides of this split.
    pub fn separates(&self, mask: u64) -> bool {
        mask == self.side || mask == self.complement_mask()
    }

    /// Compatibility with another split on the same leaf set.
    pub fn compatible_with(&self, other: &Split) -> Result<bool> {
        are_compatible(self, other)
    }

    pub fn permuted(&self, sigma: &Permutation) -> Result<Split> {
        apply_permutation(sigma, self)
    }
}

fn canonical_side(mask: u64, n: LeafCount) -> u64 {
    let comp = !mask & n.full_mask();
    let (a, b) = (mask.count_ones(), comp.count_ones());
    match a.cmp(&b) {
        Ordering::Less => mask,
        Ordering::Greater => comp,
        Ordering::Equal => {
            if mask & 1 != 0 {
                mask
            } else {
                comp
            }
        }
    }
}

/// Ordered by side size, then lexicographically by sorted side.
impl Ord for Split {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.size().cmp(&other.size()))
            .then_with(|| {
                let diff = self.side ^ other.side;
                if diff == 0 {
                    Ordering::Equal
                } else if self.side & (diff & diff.wrapping_neg()) != 0 {
                    // the set holding the lowest differing leaf sorts first
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            })
    }
}

impl PartialOrd for Split {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}",
            leaves_of(self.side).join(","),
            leaves_of(self.complement_mask()).join(",")
        )
    }
}

#[derive(Serialize, Deserialize)]
struct SplitRepr {
    n: usize,
    side: Vec<usize>,
}

impl TryFrom<SplitRepr> for Split {
    type Error = Error;

    fn try_from(r: SplitRepr) -> Result<Self> {
        Split::new(&r.side, LeafCount::new(r.n)?)
    }
}

impl From<Split> for SplitRepr {
    fn from(s: Split) -> Self {
        SplitRepr {
            n: s.n.get(),
            side: s.side(),
        }
    }
}

/// Compatibility: at least one of `A∩B`, `A∩B^c`, `A^c∩B`, `A^c∩B^c` is empty.
pub fn are_compatible(a: &Split, b: &Split) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::LeafCountMismatch(a.n.get(), b.n.get()));
    }
    let (x, xc) = (a.side, a.complement_mask());
    let (y, yc) = (b.side, b.complement_mask());
    Ok(x & y == 0 || x & yc == 0 || xc & y == 0 || xc & yc == 0)
}

/// Compatibility through canonical sides: with `|A| <= |B|`, the splits are
/// compatible iff `A∩B = ∅`, `A ⊆ B`, `A ⊆ B^c` or `B^c ⊆ A`.
///
/// Agrees with [`are_compatible`]; kept separate so the two forms can be
/// checked against each other.
pub fn compatible_by_containment(a: &Split, b: &Split) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::LeafCountMismatch(a.n.get(), b.n.get()));
    }
    let (small, large) = if a.size() <= b.size() { (a, b) } else { (b, a) };
    let (s, l, lc) = (small.side, large.side, large.complement_mask());
    Ok(s & l == 0 || s & !l == 0 || s & !lc == 0 || lc & !s == 0)
}

/// All canonical splits of `n` leaves, ordered by size then lexicographically.
pub fn enumerate_splits(n: LeafCount) -> Vec<Split> {
    let mut out = Vec::new();
    for k in 2..=n.get() / 2 {
        for combo in (1..=n.get()).combinations(k) {
            let mask = combo.iter().fold(0u64, |m, &i| m | 1 << (i - 1));
            if 2 * k == n.get() && mask & 1 == 0 {
                continue;
            }
            out.push(Split { side: mask, n });
        }
    }
    out
}

/// A bijection of `{1, …, n}`, stored as its list of images.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    /// `images[i - 1]` is the image of leaf `i`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        LeafCount::new(n)?;
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(Error::NotAPermutation(n));
            }
            seen[v] = true;
        }
        Ok(Permutation {
            images: images.into_iter().map(|v| v as u8).collect(),
        })
    }

    pub fn identity(n: LeafCount) -> Self {
        Permutation {
            images: (1..=n.get() as u8).collect(),
        }
    }

    /// Swaps leaves `a` and `b`.
    pub fn transposition(n: LeafCount, a: usize, b: usize) -> Result<Self> {
        let mut images: Vec<usize> = (1..=n.get()).collect();
        for leaf in [a, b] {
            if leaf == 0 || leaf > n.get() {
                return Err(Error::LeafOutOfRange { leaf, n: n.get() });
            }
        }
        images.swap(a - 1, b - 1);
        Permutation::new(images)
    }

    /// All `n!` permutations in lexicographic order of their image lists.
    pub fn all(n: LeafCount) -> impl Iterator<Item = Permutation> {
        (1..=n.get() as u8)
            .permutations(n.get())
            .map(|images| Permutation { images })
    }

    pub fn n(&self) -> LeafCount {
        LeafCount(self.images.len() as u8)
    }

    #[inline]
    pub fn image(&self, leaf: usize) -> usize {
        self.images[leaf - 1] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v as usize).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.images.len() != other.images.len() {
            return Err(Error::LeafCountMismatch(
                self.images.len(),
                other.images.len(),
            ));
        }
        Ok(Permutation {
            images: other
                .images
                .iter()
                .map(|&i| self.images[i as usize - 1])
                .collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u8; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v as usize - 1] = i as u8 + 1;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &v)| v as usize == i + 1)
    }

    /// Image of a leaf bitmask.
    pub fn apply_mask(&self, mask: u64) -> u64 {
        leaves_of(mask).fold(0u64, |m, i| m | 1 << (self.image(i) - 1))
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images()
    }
}

/// `σ(s)`, re-canonicalized.
pub fn apply_permutation(sigma: &Permutation, s: &Split) -> Result<Split> {
    if sigma.n() != s.n {
        return Err(Error::LeafCountMismatch(sigma.n().get(), s.n.get()));
    }
    Ok(Split {
        side: canonical_side(sigma.apply_mask(s.side), s.n),
        n: s.n,
    })
}
