//! Diagonal Green's functions on the half-tree.
//!
//! For a finitely supported potential the root m-function obeys
//!
//! ```text
//! m(λ) = -1 / (m₁(λ) + m₂(λ) - V(O) + λ)
//! ```
//!
//! where `m₁, m₂` are the m-functions of the two child subtrees. Below the
//! support every subtree is free and contributes
//! `m₀(λ) = (-λ + √(λ² - 8)) / 4`, the fixed point of `m₀ = -1/(2m₀ + λ)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::tree::{TreePotential, VertexAddress};
use crate::{Error, Result, BAND_EDGE};

const SQRT2: f64 = core::f64::consts::SQRT_2;

/// Where an m-function is evaluated.
///
/// Off-band points are any `λ` outside the closed segment `[-2√2, 2√2]`,
/// including the lower half-plane (needed by the disk map). Boundary points
/// are real `λ` in the band, evaluated as the limit from `ℂ⁺`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralPoint {
    lambda: Complex64,
    boundary: bool,
}

impl SpectralPoint {
    pub fn off_band(lambda: Complex64) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite lambda {lambda}")));
        }
        if lambda.im == 0.0 {
            if lambda.re.abs() == BAND_EDGE {
                return Err(Error::BranchPoint(lambda.re));
            }
            if lambda.re.abs() < BAND_EDGE {
                return Err(Error::Domain(format!(
                    "lambda = {} lies on the band; use a boundary point",
                    lambda.re
                )));
            }
        }
        Ok(Self {
            lambda,
            boundary: false,
        })
    }

    /// Real `λ` off the band.
    pub fn real(lambda: f64) -> Result<Self> {
        Self::off_band(Complex64::new(lambda, 0.0))
    }

    /// `λ + i0` for `λ` in the closed band.
    pub fn boundary(lambda: f64) -> Result<Self> {
        if !(lambda.abs() <= BAND_EDGE) {
            return Err(Error::Domain(format!(
                "boundary point {lambda} is outside the band"
            )));
        }
        Ok(Self {
            lambda: Complex64::new(lambda, 0.0),
            boundary: true,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn is_boundary(&self) -> bool {
        self.boundary
    }

    fn is_real_off_band(&self) -> bool {
        !self.boundary && self.lambda.im == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MValue {
    pub value: Complex64,
    pub point: SpectralPoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensitySample {
    pub lambda: f64,
    pub density: f64,
}

/// One of the two subtrees hanging off the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Rooted at `O₁`, path step `0`.
    First,
    /// Rooted at `O₂`, path step `1`.
    Second,
}

impl Branch {
    fn step(self) -> usize {
        match self {
            Branch::First => 0,
            Branch::Second => 1,
        }
    }
}

/// `λ·√(1 - 8/λ²)` with the principal root: analytic off the band and
/// asymptotic to `λ`.
pub fn band_root(lambda: Complex64) -> Complex64 {
    lambda * (Complex64::new(1.0, 0.0) - 8.0 / (lambda * lambda)).sqrt()
}

fn free_value(lambda: Complex64, boundary: bool) -> Complex64 {
    if boundary {
        let x = lambda.re;
        let gap = ((BAND_EDGE - x) * (BAND_EDGE + x)).max(0.0);
        Complex64::new(-x, gap.sqrt()) / 4.0
    } else {
        (-lambda + band_root(lambda)) / 4.0
    }
}

fn free_real(lambda: f64) -> f64 {
    (-lambda + lambda * (1.0 - 8.0 / (lambda * lambda)).sqrt()) / 4.0
}

/// The free m-function `m₀`.
pub fn m_free(point: SpectralPoint) -> MValue {
    MValue {
        value: free_value(point.lambda, point.boundary),
        point,
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Free,
    Node(usize),
}

#[derive(Clone, Debug)]
struct Node {
    potential: f64,
    kids: [Slot; 2],
}

/// All Green's-function values produced by one sweep of the recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    /// `m` at the root.
    pub m: Complex64,
    /// `M = m₁ + m₂ - V(O) + λ`.
    pub big_m: Complex64,
    /// `[m₁, m₂]`.
    pub branches: [Complex64; 2],
}

/// Real-axis analogue of [`Sweep`] for off-band `λ`; infinities mark poles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealSweep {
    pub m: f64,
    pub big_m: f64,
    pub branches: [f64; 2],
}

/// The recursion compiled for one finitely supported potential.
///
/// Only ancestors of support vertices are stored; every other subtree is
/// free and short-circuits to `m₀`. Radial potentials compile to a chain
/// whose two children share one node, so each level is evaluated once.
#[derive(Clone, Debug)]
pub struct GreenFunction {
    // Parents precede children, so a reverse scan is a post-order sweep.
    nodes: Vec<Node>,
    root_potential: f64,
}

impl GreenFunction {
    pub fn new(potential: &TreePotential) -> Result<Self> {
        let radius = potential.support_radius().ok_or(Error::UnboundedSupport)?;
        let mut nodes = vec![Node {
            potential: 0.0,
            kids: [Slot::Free, Slot::Free],
        }];
        match potential {
            TreePotential::Radial(profile) => {
                nodes[0].potential = profile.at(0);
                for n in 1..=radius {
                    let idx = nodes.len();
                    nodes[idx - 1].kids = [Slot::Node(idx), Slot::Node(idx)];
                    nodes.push(Node {
                        potential: profile.at(n),
                        kids: [Slot::Free, Slot::Free],
                    });
                }
            }
            _ => {
                for (addr, v) in potential.sites()? {
                    let mut cur = 0;
                    for i in 0..addr.depth() {
                        let step = addr.step(i) as usize;
                        cur = match nodes[cur].kids[step] {
                            Slot::Node(j) => j,
                            Slot::Free => {
                                let j = nodes.len();
                                nodes.push(Node {
                                    potential: 0.0,
                                    kids: [Slot::Free, Slot::Free],
                                });
                                nodes[cur].kids[step] = Slot::Node(j);
                                j
                            }
                        };
                    }
                    nodes[cur].potential = v;
                }
            }
        }
        let root_potential = nodes[0].potential;
        Ok(Self {
            nodes,
            root_potential,
        })
    }

    /// `V(O)`.
    pub fn root_potential(&self) -> f64 {
        self.root_potential
    }

    /// Number of non-free vertices in the compiled recursion.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Evaluate the recursion at an off-band or boundary point.
    pub fn sweep(&self, point: SpectralPoint) -> Result<Sweep> {
        if point.is_real_off_band() {
            let r = self.sweep_real(point.lambda.re)?;
            if !r.m.is_finite() {
                return Err(Error::PoleHit(point.lambda.re));
            }
            let c = |x: f64| Complex64::new(x, 0.0);
            return Ok(Sweep {
                m: c(r.m),
                big_m: c(r.big_m),
                branches: [c(r.branches[0]), c(r.branches[1])],
            });
        }
        let lambda = point.lambda;
        let free = free_value(lambda, point.boundary);
        let mut values = vec![Complex64::new(0.0, 0.0); self.nodes.len()];
        let mut root_denominator = Complex64::new(0.0, 0.0);
        for (i, node) in self.nodes.iter().enumerate().rev() {
            let kid = |s: Slot| match s {
                Slot::Free => free,
                Slot::Node(j) => values[j],
            };
            let denom = kid(node.kids[0]) + kid(node.kids[1]) - node.potential + lambda;
            if i == 0 {
                root_denominator = denom;
            }
            values[i] = -denom.inv();
        }
        let root = &self.nodes[0];
        let branch = |s: Slot| match s {
            Slot::Free => free,
            Slot::Node(j) => values[j],
        };
        Ok(Sweep {
            m: values[0],
            big_m: root_denominator,
            branches: [branch(root.kids[0]), branch(root.kids[1])],
        })
    }

    /// Real arithmetic for real `λ` off the band. A vanishing denominator
    /// yields an infinite value, which the parent turns into `-0`.
    pub fn sweep_real(&self, lambda: f64) -> Result<RealSweep> {
        if !(lambda.abs() > BAND_EDGE) || !lambda.is_finite() {
            return Err(if lambda.abs() == BAND_EDGE {
                Error::BranchPoint(lambda)
            } else {
                Error::Domain(format!("real lambda {lambda} is not off the band"))
            });
        }
        let free = free_real(lambda);
        let mut values = vec![0.0f64; self.nodes.len()];
        let mut root_denominator = 0.0;
        for (i, node) in self.nodes.iter().enumerate().rev() {
            let kid = |s: Slot| match s {
                Slot::Free => free,
                Slot::Node(j) => values[j],
            };
            let denom = kid(node.kids[0]) + kid(node.kids[1]) - node.potential + lambda;
            if i == 0 {
                root_denominator = denom;
            }
            values[i] = -1.0 / denom;
        }
        let root = &self.nodes[0];
        let branch = |s: Slot| match s {
            Slot::Free => free,
            Slot::Node(j) => values[j],
        };
        Ok(RealSweep {
            m: values[0],
            big_m: root_denominator,
            branches: [branch(root.kids[0]), branch(root.kids[1])],
        })
    }

    pub fn m_root(&self, point: SpectralPoint) -> Result<MValue> {
        Ok(MValue {
            value: self.sweep(point)?.m,
            point,
        })
    }

    pub fn branch_m(&self, child: Branch, point: SpectralPoint) -> Result<MValue> {
        Ok(MValue {
            value: self.sweep(point)?.branches[child.step()],
            point,
        })
    }

    pub fn big_m(&self, point: SpectralPoint) -> Result<Complex64> {
        Ok(self.sweep(point)?.big_m)
    }

    /// `σ'_O(λ) = Im m(λ + i0) / π` for `λ` inside the open band.
    pub fn density(&self, lambda: f64) -> Result<DensitySample> {
        let point = open_band_point(lambda)?;
        let m = self.sweep(point)?.m;
        Ok(DensitySample {
            lambda,
            density: m.im / core::f64::consts::PI,
        })
    }
}

fn open_band_point(lambda: f64) -> Result<SpectralPoint> {
    if lambda.abs() == BAND_EDGE {
        return Err(Error::BranchPoint(lambda));
    }
    if !(lambda.abs() < BAND_EDGE) {
        return Err(Error::Domain(format!("lambda = {lambda} is outside the band")));
    }
    SpectralPoint::boundary(lambda)
}

pub fn m_root(potential: &TreePotential, point: SpectralPoint) -> Result<MValue> {
    GreenFunction::new(potential)?.m_root(point)
}

pub fn branch_m(potential: &TreePotential, child: Branch, point: SpectralPoint) -> Result<MValue> {
    GreenFunction::new(potential)?.branch_m(child, point)
}

/// `M(λ) = m₁ + m₂ - V(O) + λ`, so that `m·M = -1`.
pub fn big_m(potential: &TreePotential, point: SpectralPoint) -> Result<Complex64> {
    GreenFunction::new(potential)?.big_m(point)
}

pub fn density(potential: &TreePotential, lambda: f64) -> Result<DensitySample> {
    GreenFunction::new(potential)?.density(lambda)
}

/// Coefficients of `m(λ) = -[c₁λ⁻¹ + c₂λ⁻² + c₃λ⁻³ + O(λ⁻⁴)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymptoticCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Largest change when the sample heights are doubled.
    pub residual: f64,
}

/// Sample heights on the imaginary axis for the large-λ fit.
pub const ASYMPTOTIC_HEIGHTS: [f64; 3] = [1.0e3, 2.0e3, 4.0e3];
pub const ASYMPTOTIC_TOL: f64 = 1e-6;

/// Fit `c₁, c₂, c₃` from `m(iy)` at `y ∈ {10³, 2·10³, 4·10³}`.
///
/// On the imaginary axis the odd and even powers of `λ⁻¹` separate into the
/// imaginary and real parts of `-m(iy)`:
///
/// ```text
/// y  · Im(-m) = -c₁ + c₃ y⁻² - c₅ y⁻⁴ + …
/// y² · Re(-m) = -c₂ + c₄ y⁻² - c₆ y⁻⁴ + …
/// ```
///
/// Each is a polynomial in `s = y⁻²`; interpolating through three heights
/// and reading off the constant and linear terms is Richardson
/// extrapolation to `s = 0`. Repeating with doubled heights gives the
/// residual.
pub fn asymptotic_coeffs(potential: &TreePotential) -> Result<AsymptoticCoefficients> {
    let g = GreenFunction::new(potential)?;
    let fit = |heights: [f64; 3]| -> Result<[f64; 3]> {
        let mut odd = Vector3::zeros();
        let mut even = Vector3::zeros();
        let mut vander = Matrix3::zeros();
        for (k, &y) in heights.iter().enumerate() {
            let m = g.m_root(SpectralPoint::off_band(Complex64::new(0.0, y))?)?.value;
            let s = 1.0 / (y * y);
            odd[k] = -y * m.im;
            even[k] = -y * y * m.re;
            vander[(k, 0)] = 1.0;
            vander[(k, 1)] = s;
            vander[(k, 2)] = s * s;
        }
        let lu = vander.lu();
        let a = lu.solve(&odd).ok_or(Error::Extrapolation {
            residual: f64::INFINITY,
            tol: ASYMPTOTIC_TOL,
        })?;
        let b = lu.solve(&even).ok_or(Error::Extrapolation {
            residual: f64::INFINITY,
            tol: ASYMPTOTIC_TOL,
        })?;
        Ok([-a[0], -b[0], a[1]])
    };
    let base = fit(ASYMPTOTIC_HEIGHTS)?;
    let doubled = fit(ASYMPTOTIC_HEIGHTS.map(|y| 2.0 * y))?;
    let residual = base
        .iter()
        .zip(&doubled)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(residual <= ASYMPTOTIC_TOL) {
        return Err(Error::Extrapolation {
            residual,
            tol: ASYMPTOTIC_TOL,
        });
    }
    Ok(AsymptoticCoefficients {
        c1: base[0],
        c2: base[1],
        c3: base[2],
        residual,
    })
}

/// The half-line Jacobi m-function with diagonal `q` and off-diagonal `√2`,
/// computed from the Weyl solution by backward transfer matrices.
///
/// Beyond the last entry the Weyl solution is `ψₙ = ζⁿ` with
/// `ζ = -√2·m₀(λ)` (the root of `√2(ζ + 1/ζ) = λ` inside the disk). Then
/// `m = ψ₀ / (√2ψ₁ + (q₀ - λ)ψ₀)`.
///
/// For a radial tree potential `V(x) = q_{|x-O|}` this equals the tree's
/// root m-function.
pub fn jacobi_m_oracle(diagonal: &[f64], point: SpectralPoint) -> Result<MValue> {
    let lambda = point.lambda;
    let zeta = -SQRT2 * free_value(lambda, point.boundary);
    let q = |n: usize| diagonal.get(n).copied().unwrap_or(0.0);
    let last = diagonal.len();
    // (ψ_n, ψ_{n+1}) starting at n = last + 1.
    let mut next = Complex64::new(1.0, 0.0);
    let mut after = zeta;
    for n in (1..=last + 1).rev() {
        let prev = ((lambda - q(n)) * next - SQRT2 * after) / SQRT2;
        after = next;
        next = prev;
        let scale = next.norm().max(after.norm());
        if scale > 1e100 {
            next /= scale;
            after /= scale;
        }
    }
    let (psi0, psi1) = (next, after);
    let denom = SQRT2 * psi1 + (q(0) - lambda) * psi0;
    if denom.norm() == 0.0 {
        return Err(Error::PoleHit(lambda.re));
    }
    Ok(MValue {
        value: psi0 / denom,
        point,
    })
}

/// Address of a branch root.
pub fn branch_root(child: Branch) -> VertexAddress {
    VertexAddress::ROOT.child(child.step() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{reduced_tree_matrix, root_resolvent, Profile};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn free_examples() {
        let at_i = m_free(SpectralPoint::off_band(c(0.0, 1.0)).unwrap()).value;
        assert!(close(at_i, c(0.0, 0.5), 1e-15));
        assert!(close(band_root(c(0.0, 1.0)), c(0.0, 3.0), 1e-15));

        let at3 = m_free(SpectralPoint::real(3.0).unwrap()).value;
        assert!(close(at3, c(-0.5, 0.0), 1e-15));
        assert!(close(-(2.0 * at3 + 3.0).inv(), at3, 1e-15));

        let centre = m_free(SpectralPoint::boundary(0.0).unwrap()).value;
        assert!(close(centre, c(0.0, 1.0 / SQRT2), 1e-15));

        assert!(matches!(
            SpectralPoint::real(BAND_EDGE),
            Err(Error::BranchPoint(_))
        ));
        assert!(matches!(SpectralPoint::real(1.0), Err(Error::Domain(_))));
        // Edges are fine with the boundary flag.
        let edge = m_free(SpectralPoint::boundary(BAND_EDGE).unwrap()).value;
        assert!(close(edge, c(-1.0 / SQRT2, 0.0), 1e-15));
    }

    #[test]
    fn free_branch_signs_on_either_side() {
        assert!(m_free(SpectralPoint::real(-3.0).unwrap()).value.re > 0.0);
        assert!(m_free(SpectralPoint::real(3.0).unwrap()).value.re < 0.0);
    }

    #[test]
    fn free_fixed_point_off_band() {
        for re in [-7.0f64, -3.0, -0.5, 0.0, 1.2, 2.9, 5.0] {
            for im in [-2.0, -1e-3, 0.0, 1e-3, 0.5, 4.0] {
                if im == 0.0 && re.abs() <= BAND_EDGE {
                    continue;
                }
                let m = m_free(SpectralPoint::off_band(c(re, im)).unwrap()).value;
                let residual = (m + (2.0 * m + c(re, im)).inv()).norm();
                assert!(residual < 1e-12, "{re} {im}: {residual}");
            }
        }
    }

    #[test]
    fn single_site_values() {
        let v1 = TreePotential::single_site(1.0);
        let i = SpectralPoint::off_band(c(0.0, 1.0)).unwrap();
        assert!(close(m_root(&v1, i).unwrap().value, c(0.2, 0.4), 1e-15));
        assert!(close(big_m(&v1, i).unwrap(), c(-1.0, 2.0), 1e-15));

        let free = TreePotential::zero();
        assert!(close(big_m(&free, i).unwrap(), c(0.0, 2.0), 1e-15));

        let far = SpectralPoint::off_band(c(0.0, 10.0)).unwrap();
        let mbig = big_m(&v1, far).unwrap();
        assert!((mbig - c(0.0, 10.0)).norm() < 1.5);

        let d = density(&v1, 0.0).unwrap().density;
        assert!((d - SQRT2 / (3.0 * core::f64::consts::PI)).abs() < 1e-15);
        assert!(matches!(density(&v1, BAND_EDGE), Err(Error::BranchPoint(_))));
        assert!(matches!(density(&v1, 3.5), Err(Error::Domain(_))));
    }

    #[test]
    fn free_density_closed_form() {
        let g = GreenFunction::new(&TreePotential::zero()).unwrap();
        for k in 0..200 {
            let x = -2.8 + 5.6 * f64::from(k) / 199.0;
            let d = g.density(x).unwrap().density;
            let exact = (8.0 - x * x).sqrt() / (4.0 * core::f64::consts::PI);
            assert!((d - exact).abs() < 1e-15);
        }
        assert!((g.density(0.0).unwrap().density - 0.2251).abs() < 1e-4);
    }

    #[test]
    fn branch_values() {
        let o1: VertexAddress = "O0".parse().unwrap();
        let p = TreePotential::table([(o1, 1.0)]).unwrap();
        let i = SpectralPoint::off_band(c(0.0, 1.0)).unwrap();
        let b1 = branch_m(&p, Branch::First, i).unwrap().value;
        let b2 = branch_m(&p, Branch::Second, i).unwrap().value;
        assert!(close(b1, c(0.2, 0.4), 1e-15));
        assert!(close(b2, c(0.0, 0.5), 1e-15));
        let g = GreenFunction::new(&p).unwrap();
        let s = g.sweep(i).unwrap();
        assert!(close(s.big_m, b1 + b2 + i.lambda(), 1e-15));
        assert!(close(s.m * s.big_m, c(-1.0, 0.0), 1e-14));
    }

    /// `((H_d - λ)⁻¹δ_O, δ_O)` on the symmetry-reduced depth-`d` tree.
    fn oracle(p: &TreePotential, depth: u32, lambda: Complex64) -> Complex64 {
        root_resolvent(&reduced_tree_matrix(p, depth).unwrap(), lambda).unwrap()
    }

    #[test]
    fn single_site_against_finite_tree() {
        let v1 = TreePotential::single_site(1.0);
        let mut prev = f64::INFINITY;
        for depth in [10, 20, 40] {
            let gap = (oracle(&v1, depth, c(0.0, 1.0)) - c(0.2, 0.4)).norm();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn oracle_gap_decays_with_depth() {
        let p = TreePotential::table([
            (VertexAddress::ROOT, 0.7),
            ("O1".parse().unwrap(), -1.3),
            ("O010".parse().unwrap(), 1.9),
        ])
        .unwrap();
        let lambda = c(1.0, 1.0);
        let exact = m_root(&p, SpectralPoint::off_band(lambda).unwrap()).unwrap().value;
        let gaps: Vec<f64> = [5, 10, 20, 43]
            .iter()
            .map(|&d| (oracle(&p, d, lambda) - exact).norm())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[3] < 1e-8, "{gaps:?}");
    }

    #[test]
    fn radial_equals_jacobi_examples() {
        let i = SpectralPoint::off_band(c(0.0, 1.0)).unwrap();
        let j = jacobi_m_oracle(&[1.0], i).unwrap().value;
        assert!(close(j, c(0.2, 0.4), 1e-15));

        let free = jacobi_m_oracle(&[], i).unwrap().value;
        assert!(close(free, c(0.0, 0.5), 1e-15));
        let free3 = jacobi_m_oracle(&[0.0, 0.0, 0.0], SpectralPoint::boundary(1.3).unwrap())
            .unwrap()
            .value;
        assert!(close(
            free3,
            m_free(SpectralPoint::boundary(1.3).unwrap()).value,
            1e-14
        ));

        let two_i = SpectralPoint::off_band(c(0.0, 2.0)).unwrap();
        let radial = TreePotential::radial(Profile::Levels(vec![1.0, 1.0])).unwrap();
        let a = m_root(&radial, two_i).unwrap().value;
        let b = jacobi_m_oracle(&[1.0, 1.0], two_i).unwrap().value;
        let o = oracle(&radial, 45, two_i.lambda());
        assert!(close(a, b, 1e-14));
        assert!(close(a, o, 1e-10));
    }

    #[test]
    fn asymptotic_examples() {
        for (v, expect) in [(0.0, [1.0, 0.0, 2.0]), (1.0, [1.0, 1.0, 3.0]), (-2.0, [1.0, -2.0, 6.0])] {
            let k = asymptotic_coeffs(&TreePotential::single_site(v)).unwrap();
            assert!((k.c1 - expect[0]).abs() < 1e-6, "{v}: {k:?}");
            assert!((k.c2 - expect[1]).abs() < 1e-6, "{v}: {k:?}");
            assert!((k.c3 - expect[2]).abs() < 1e-6, "{v}: {k:?}");
        }
    }

    #[test]
    fn unbounded_support_is_rejected() {
        let p = TreePotential::radial(Profile::PowerLaw {
            amplitude: 1.0,
            exponent: 1.0,
        })
        .unwrap();
        assert!(matches!(GreenFunction::new(&p), Err(Error::UnboundedSupport)));
    }

    #[test]
    fn real_axis_pole_is_reported() {
        // V(O) = 3 has its pole at E = 11/3 (M = √2/z - 3 vanishes at z = √2/3).
        let g = GreenFunction::new(&TreePotential::single_site(3.0)).unwrap();
        let e = 11.0 / 3.0;
        let r = g.sweep_real(e).unwrap();
        assert!(r.big_m.abs() < 1e-14);
        assert!(g.sweep_real(e - 1e-6).unwrap().m > 1e3);
        assert!(g.sweep_real(e + 1e-6).unwrap().m < -1e3);
    }

    #[test]
    fn increasing_on_real_gaps() {
        let p = TreePotential::table([
            (VertexAddress::ROOT, 3.2),
            ("O1".parse().unwrap(), -2.5),
        ])
        .unwrap();
        let g = GreenFunction::new(&p).unwrap();
        for (lo, hi) in [(-7.0, -BAND_EDGE), (BAND_EDGE, 7.0)] {
            let xs: Vec<f64> = (1..2000).map(|k| lo + (hi - lo) * f64::from(k) / 2000.0).collect();
            for w in xs.windows(2) {
                let a = g.sweep_real(w[0]).unwrap().m;
                let b = g.sweep_real(w[1]).unwrap().m;
                // A sign flip from + to - is a pole; otherwise strictly increasing.
                if !(a > 0.0 && b < 0.0) {
                    assert!(b > a, "not increasing on [{}, {}]: {a} {b}", w[0], w[1]);
                }
            }
        }
    }

    fn arb_potential() -> impl Strategy<Value = TreePotential> {
        prop::collection::vec((0u32..4, 0u64..8, -2.0f64..2.0), 0..8).prop_map(|raw| {
            TreePotential::table(
                raw.into_iter()
                    .map(|(d, i, v)| (VertexAddress::at_level(d, i % (1 << d)), v)),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn herglotz_and_conjugate_symmetry(
            p in arb_potential(),
            re in -6.0f64..6.0,
            im in 0.01f64..5.0,
        ) {
            let g = GreenFunction::new(&p).unwrap();
            let up = g.m_root(SpectralPoint::off_band(c(re, im)).unwrap()).unwrap().value;
            let down = g.m_root(SpectralPoint::off_band(c(re, -im)).unwrap()).unwrap().value;
            prop_assert!(up.im > 0.0);
            prop_assert!((down - up.conj()).norm() <= 1e-14 * (1.0 + up.norm()));
        }

        #[test]
        fn boundary_density_nonnegative(p in arb_potential(), x in -2.82f64..2.82) {
            let d = GreenFunction::new(&p).unwrap().density(x).unwrap();
            prop_assert!(d.density >= 0.0);
        }

        #[test]
        fn m_times_big_m_is_minus_one(p in arb_potential(), re in -5.0f64..5.0, im in 0.05f64..3.0) {
            let s = GreenFunction::new(&p).unwrap().sweep(SpectralPoint::off_band(c(re, im)).unwrap()).unwrap();
            prop_assert!((s.m * s.big_m + 1.0).norm() < 1e-13);
        }

        #[test]
        fn radial_matches_jacobi(
            q in prop::collection::vec(-2.0f64..2.0, 1..8),
            re in -5.0f64..5.0,
            im in 0.1f64..4.0,
        ) {
            let point = SpectralPoint::off_band(c(re, im)).unwrap();
            let radial = TreePotential::radial(Profile::Levels(q.clone())).unwrap();
            let a = m_root(&radial, point).unwrap().value;
            let b = jacobi_m_oracle(&q, point).unwrap().value;
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
