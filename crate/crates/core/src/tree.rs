//! The rooted half-tree, potentials on it, and dense matrix oracles.
//!
//! Vertices are addressed by their path from the root `O`: each step picks
//! child `0` or `1`. The deleted third edge at the root is never
//! represented, so the root has two neighbours and every other vertex has
//! three (one parent, two children).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Complex64, Error, Result};

/// Deepest level an address can name.
pub const MAX_DEPTH: u32 = 62;

/// Largest dense matrix dimension [`finite_tree_matrix`] will build by
/// default (depth 11). Each matrix of this size takes ~134 MB.
pub const DENSE_DIM_LIMIT: usize = 4095;

/// Largest number of vertices enumerated when materializing potentials.
pub const ENUMERATION_LIMIT: usize = 1 << 22;

/// A vertex of the half-tree, stored as a depth plus the path bits.
///
/// The first step from the root is the most significant of the `depth`
/// low bits, so ordering by `(depth, bits)` is breadth-first order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VertexAddress {
    depth: u32,
    bits: u64,
}

impl VertexAddress {
    pub const ROOT: VertexAddress = VertexAddress { depth: 0, bits: 0 };

    pub fn from_path(path: &[u8]) -> Result<Self> {
        if path.len() > MAX_DEPTH as usize {
            return Err(Error::InvalidArgument(format!(
                "address deeper than {MAX_DEPTH}"
            )));
        }
        let mut bits = 0u64;
        for &step in path {
            if step > 1 {
                return Err(Error::InvalidArgument(format!(
                    "path step {step} is not 0 or 1"
                )));
            }
            bits = (bits << 1) | u64::from(step);
        }
        Ok(Self {
            depth: path.len() as u32,
            bits,
        })
    }

    /// Address at `depth` whose path, read as a binary number, is `index`.
    pub fn at_level(depth: u32, index: u64) -> Self {
        debug_assert!(depth <= MAX_DEPTH && index < (1u64 << depth));
        Self { depth, bits: index }
    }

    /// Distance `|x - O|` to the root.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Position within its level, in `0..2^depth`.
    pub fn level_index(&self) -> u64 {
        self.bits
    }

    /// Index in breadth-first order over the whole tree.
    pub fn bfs_index(&self) -> u64 {
        (1u64 << self.depth) - 1 + self.bits
    }

    pub fn child(&self, c: u8) -> Self {
        debug_assert!(c <= 1);
        Self {
            depth: self.depth + 1,
            bits: (self.bits << 1) | u64::from(c),
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.depth > 0).then(|| Self {
            depth: self.depth - 1,
            bits: self.bits >> 1,
        })
    }

    /// The path steps from the root, first step first.
    pub fn path(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.depth)
            .rev()
            .map(move |shift| ((self.bits >> shift) & 1) as u8)
    }

    /// Step `i` of the path (0 is the step out of the root).
    pub fn step(&self, i: u32) -> u8 {
        ((self.bits >> (self.depth - 1 - i)) & 1) as u8
    }

    /// Exchange child labels `0 ↔ 1` at every vertex.
    pub fn mirrored(&self) -> Self {
        let mask = if self.depth == 0 {
            0
        } else {
            u64::MAX >> (64 - self.depth)
        };
        Self {
            depth: self.depth,
            bits: !self.bits & mask,
        }
    }

    /// Whether `self` lies in the subtree rooted at `ancestor`.
    pub fn descends_from(&self, ancestor: &VertexAddress) -> bool {
        self.depth >= ancestor.depth && self.bits >> (self.depth - ancestor.depth) == ancestor.bits
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("O")?;
        for step in self.path() {
            f.write_str(if step == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for VertexAddress {
    type Err = Error;

    /// Accepts `""`/`"O"` for the root and strings like `"O01"` or `"01"`.
    fn from_str(s: &str) -> Result<Self> {
        let digits = s.strip_prefix('O').unwrap_or(s);
        let path: Vec<u8> = digits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidArgument(format!(
                    "bad character {other:?} in vertex address {s:?}"
                ))),
            })
            .collect::<Result<_>>()?;
        Self::from_path(&path)
    }
}

/// All addresses at distance `n` from the root, in breadth-first order.
pub fn level(n: u32) -> impl Iterator<Item = VertexAddress> {
    (0..1u64 << n).map(move |i| VertexAddress::at_level(n, i))
}

/// All addresses with depth `≤ depth`, in breadth-first order.
pub fn ball(depth: u32) -> impl Iterator<Item = VertexAddress> {
    (0..=depth).flat_map(level)
}

fn ball_size(depth: u32) -> Result<usize> {
    if depth > MAX_DEPTH {
        return Err(Error::Resource(format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    let size = (1u128 << (depth + 1)) - 1;
    if size > ENUMERATION_LIMIT as u128 {
        return Err(Error::Resource(format!(
            "ball of radius {depth} has {size} vertices (limit {ENUMERATION_LIMIT})"
        )));
    }
    Ok(size as usize)
}

/// A per-level sequence: either explicit values or `a·(n+1)^(-p)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Profile {
    Levels(Vec<f64>),
    PowerLaw { amplitude: f64, exponent: f64 },
}

impl Profile {
    pub fn at(&self, n: u32) -> f64 {
        match self {
            Profile::Levels(v) => v.get(n as usize).copied().unwrap_or(0.0),
            Profile::PowerLaw { amplitude, exponent } => {
                amplitude * (f64::from(n) + 1.0).powf(-exponent)
            }
        }
    }

    /// Last level with a nonzero value, `None` when the tail never ends.
    /// An identically zero profile has radius 0.
    pub fn radius(&self) -> Option<u32> {
        match self {
            Profile::Levels(v) => Some(
                v.iter()
                    .rposition(|&x| x != 0.0)
                    .map(|i| i as u32)
                    .unwrap_or(0),
            ),
            Profile::PowerLaw { amplitude, .. } if *amplitude == 0.0 => Some(0),
            Profile::PowerLaw { .. } => None,
        }
    }

    fn sup(&self) -> f64 {
        match self {
            Profile::Levels(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Profile::PowerLaw {
                amplitude,
                exponent,
            } => {
                if *exponent >= 0.0 {
                    amplitude.abs()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile::Levels(v) => v.iter().all(|x| x.is_finite()),
            Profile::PowerLaw {
                amplitude,
                exponent,
            } => amplitude.is_finite() && exponent.is_finite() && *exponent >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "profile values must be finite and power-law exponents nonnegative".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PotentialKind {
    FiniteTable,
    SphericallySymmetric,
    SeededRandom,
}

/// A real potential on the half-tree.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TreePotential {
    /// Explicit values; absent vertices carry 0. Zero entries are never stored.
    Table(BTreeMap<VertexAddress, f64>),
    /// `V(x) = q_{|x-O|}`.
    Radial(Profile),
    /// `V(x) = envelope(|x-O|)·u(x)` with `u(x)` uniform on `[-1, 1)`, drawn
    /// from a ChaCha8 stream keyed by `seed` at the vertex's BFS index.
    Random { seed: u64, envelope: Profile },
}

impl TreePotential {
    pub fn zero() -> Self {
        TreePotential::Table(BTreeMap::new())
    }

    pub fn single_site(v: f64) -> Self {
        Self::table([(VertexAddress::ROOT, v)]).expect("finite value")
    }

    pub fn table(entries: impl IntoIterator<Item = (VertexAddress, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (addr, v) in entries {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite potential value at {addr}"
                )));
            }
            if v != 0.0 {
                map.insert(addr, v);
            } else {
                map.remove(&addr);
            }
        }
        Ok(TreePotential::Table(map))
    }

    pub fn radial(profile: Profile) -> Result<Self> {
        profile.validate()?;
        Ok(TreePotential::Radial(profile))
    }

    pub fn random(seed: u64, envelope: Profile) -> Result<Self> {
        envelope.validate()?;
        Ok(TreePotential::Random { seed, envelope })
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            TreePotential::Table(_) => PotentialKind::FiniteTable,
            TreePotential::Radial(_) => PotentialKind::SphericallySymmetric,
            TreePotential::Random { .. } => PotentialKind::SeededRandom,
        }
    }

    pub fn value(&self, x: &VertexAddress) -> f64 {
        match self {
            TreePotential::Table(map) => map.get(x).copied().unwrap_or(0.0),
            TreePotential::Radial(p) => p.at(x.depth()),
            TreePotential::Random { seed, envelope } => {
                let amplitude = envelope.at(x.depth());
                if amplitude == 0.0 {
                    return 0.0;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(2 * u128::from(x.bfs_index()));
                amplitude * unit_uniform(rng.next_u64())
            }
        }
    }

    /// Largest distance from the root carrying a nonzero value; `None` when
    /// the support is unbounded.
    pub fn support_radius(&self) -> Option<u32> {
        match self {
            TreePotential::Table(map) => Some(map.keys().map(|a| a.depth()).max().unwrap_or(0)),
            TreePotential::Radial(p) => p.radius(),
            TreePotential::Random { envelope, .. } => envelope.radius(),
        }
    }

    /// `sup |V|`. Exact for finite support; for unbounded random potentials
    /// this is the envelope bound.
    pub fn sup_norm(&self) -> f64 {
        match self {
            TreePotential::Table(map) => map.values().fold(0.0, |m, v| m.max(v.abs())),
            TreePotential::Radial(p) => p.sup(),
            TreePotential::Random { envelope, .. } => match envelope.radius() {
                Some(r) => self
                    .sites_within(r)
                    .map(|s| s.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())))
                    .unwrap_or_else(|_| envelope.sup()),
                None => envelope.sup(),
            },
        }
    }

    /// Nonzero values at depth `≤ radius`, in breadth-first order.
    pub fn sites_within(&self, radius: u32) -> Result<Vec<(VertexAddress, f64)>> {
        match self {
            TreePotential::Table(map) => Ok(map
                .iter()
                .filter(|(a, _)| a.depth() <= radius)
                .map(|(a, v)| (*a, *v))
                .collect()),
            TreePotential::Radial(p) => {
                ball_size(radius)?;
                Ok(ball(radius)
                    .filter_map(|a| {
                        let v = p.at(a.depth());
                        (v != 0.0).then_some((a, v))
                    })
                    .collect())
            }
            TreePotential::Random { seed, envelope } => {
                ball_size(radius)?;
                // BFS order matches the stream order, so one generator suffices.
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(ball(radius)
                    .filter_map(|a| {
                        let u = unit_uniform(rng.next_u64());
                        let v = envelope.at(a.depth()) * u;
                        (v != 0.0).then_some((a, v))
                    })
                    .collect())
            }
        }
    }

    /// All nonzero sites; fails for unbounded support.
    pub fn sites(&self) -> Result<Vec<(VertexAddress, f64)>> {
        let r = self.support_radius().ok_or(Error::UnboundedSupport)?;
        self.sites_within(r)
    }

    /// The same potential with child labels exchanged at every vertex.
    pub fn mirrored(&self) -> Result<Self> {
        match self {
            TreePotential::Radial(_) => Ok(self.clone()),
            _ => Self::table(self.sites()?.into_iter().map(|(a, v)| (a.mirrored(), v))),
        }
    }
}

pub(crate) fn unit_uniform(raw: u64) -> f64 {
    // 53 random mantissa bits mapped to [-1, 1).
    (raw >> 11) as f64 * (1.0 / (1u64 << 52) as f64) - 1.0
}

/// `Σ_{n ≤ depth} 2^{-n} Σ_{|x-O| = n} V(x)²`, exact.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedNorm {
    pub value: f64,
    pub depth_evaluated: u32,
}

pub fn weighted_l2(potential: &TreePotential, depth: u32) -> Result<WeightedNorm> {
    let value = match potential {
        // 2^n vertices per level cancel the weight.
        TreePotential::Radial(p) => (0..=depth).map(|n| p.at(n).powi(2)).sum(),
        _ => {
            let mut per_level = alloc::vec![0.0f64; depth as usize + 1];
            for (a, v) in potential.sites_within(depth)? {
                per_level[a.depth() as usize] += v * v;
            }
            per_level
                .iter()
                .enumerate()
                .map(|(n, s)| s * 0.5f64.powi(n as i32))
                .sum()
        }
    };
    Ok(WeightedNorm {
        value,
        depth_evaluated: depth,
    })
}

/// Restriction of `potential` to the ball `|x - O| ≤ k`, as a finite table.
pub fn truncate(potential: &TreePotential, k: u32) -> Result<TreePotential> {
    TreePotential::table(potential.sites_within(k)?)
}

/// `adjacency + diag(V)` on the depth-truncated half-tree, vertices in BFS
/// order; dimension `2^(depth+1) - 1`.
pub fn finite_tree_matrix(potential: &TreePotential, depth: u32) -> Result<DMatrix<f64>> {
    finite_tree_matrix_with_limit(potential, depth, DENSE_DIM_LIMIT)
}

pub fn finite_tree_matrix_with_limit(
    potential: &TreePotential,
    depth: u32,
    max_dim: usize,
) -> Result<DMatrix<f64>> {
    let dim = ball_size(depth).map_err(|_| too_big(depth, max_dim))?;
    if dim > max_dim {
        return Err(too_big(depth, max_dim));
    }
    let mut h = DMatrix::zeros(dim, dim);
    for (a, v) in potential.sites_within(depth)? {
        let i = a.bfs_index() as usize;
        h[(i, i)] = v;
    }
    for a in ball(depth).skip(1) {
        let i = a.bfs_index() as usize;
        let p = a.parent().expect("non-root").bfs_index() as usize;
        h[(i, p)] = 1.0;
        h[(p, i)] = 1.0;
    }
    Ok(h)
}

fn too_big(depth: u32, max_dim: usize) -> Error {
    Error::Resource(format!(
        "tree matrix of depth {depth} exceeds dimension limit {max_dim}"
    ))
}

/// The finite-tree matrix restricted to the invariant subspace containing
/// `δ_O`: explicit vertices out to the support radius `R`, and below each
/// level-`R` vertex a chain of normalized level-uniform states coupled by
/// `√2`. Index 0 is the root. Dimension `2^(R+1) - 1 + 2^R·(depth - R)`.
///
/// Same root resolvent as [`finite_tree_matrix`], at a size that stays
/// small for deep truncations.
pub fn reduced_tree_matrix(potential: &TreePotential, depth: u32) -> Result<DMatrix<f64>> {
    let radius = potential
        .support_radius()
        .ok_or(Error::UnboundedSupport)?
        .min(depth);
    let ball_dim = ball_size(radius)?;
    let chain = (depth - radius) as usize;
    let leaves = 1usize << radius;
    let dim = ball_dim + leaves * chain;
    if dim > ENUMERATION_LIMIT || dim.saturating_mul(dim) > 1 << 28 {
        return Err(Error::Resource(format!(
            "reduced tree matrix of dimension {dim} is too large"
        )));
    }
    let mut h = DMatrix::zeros(dim, dim);
    for (a, v) in potential.sites_within(radius)? {
        let i = a.bfs_index() as usize;
        h[(i, i)] = v;
    }
    for a in ball(radius).skip(1) {
        let i = a.bfs_index() as usize;
        let p = a.parent().expect("non-root").bfs_index() as usize;
        h[(i, p)] = 1.0;
        h[(p, i)] = 1.0;
    }
    let s2 = core::f64::consts::SQRT_2;
    for (leaf, a) in level(radius).enumerate() {
        let mut prev = a.bfs_index() as usize;
        for k in 0..chain {
            let idx = ball_dim + leaf * chain + k;
            h[(idx, prev)] = s2;
            h[(prev, idx)] = s2;
            prev = idx;
        }
    }
    Ok(h)
}

/// Eigenvalues of a symmetric tree matrix paired with the weight
/// `|ψ(O)|²` of the normalized eigenvector at the root (index 0).
pub fn root_spectral_weights(h: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    let eig = SymmetricEigen::try_new(h.clone(), 1e-14, 10_000).ok_or(Error::Eigen)?;
    let mut out: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &e)| (e, eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// `((H - λ)⁻¹ δ_O, δ_O)` for a dense tree matrix with the root at index 0,
/// by LU solve.
pub fn root_resolvent(h: &DMatrix<f64>, lambda: Complex64) -> Result<Complex64> {
    let n = h.nrows();
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
        Complex64::new(h[(i, j)], 0.0) - d
    });
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = shifted
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Domain(format!("lambda = {lambda} is an eigenvalue")))?;
    Ok(x[0])
}

/// `"O01"`-style rendering of a table, for diagnostics.
pub fn describe(potential: &TreePotential) -> String {
    match potential {
        TreePotential::Table(map) if map.is_empty() => String::from("zero"),
        TreePotential::Table(map) => {
            let parts: Vec<String> = map.iter().map(|(a, v)| format!("{a}={v}")).collect();
            parts.join(",")
        }
        TreePotential::Radial(p) => format!("radial({p:?})"),
        TreePotential::Random { seed, envelope } => format!("random(seed={seed}, {envelope:?})"),
    }
}
