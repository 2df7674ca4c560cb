//! Rectangle-contour quadrature of resolvent integrals.
//!
//! With `R_z = (H - z)⁻¹` and the rectangle traversed counterclockwise,
//! `-(1/2πi)∮ g(z) R_z dz = Σ g(λᵢ) Pᵢ` over the enclosed eigenvalues. All
//! integrals here carry that leading minus sign, so that `M` comes out as
//! `(H - b)²P_b` and `M = M₀ + T` holds block by block.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::quad::gauss_legendre;
use crate::{Error, Result};

use super::{eigenvalues, m0_matrix, m_spectral, schatten_norm, BlockOperator};

type CMatrix = DMatrix<Complex64>;

/// Gauss–Legendre nodes per panel.
pub const GL_PANEL_NODES: usize = 16;
/// Eigenvalues closer than this to the left side abort the quadrature.
const CONTOUR_CLEARANCE: f64 = 1e-6;
/// Panel ratio of the geometric grading towards `b` on the right side.
const GRADING_RATIO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContourSpec {
    pub b_eps: f64,
    pub left: f64,
    pub half_height: f64,
    pub nodes_per_side: usize,
}

impl ContourSpec {
    /// A rectangle reaching one unit left of the lowest eigenvalue of `H` and
    /// `H₁`, with half-height `max(1, (b - left)/2)`.
    pub fn enclosing(block: &BlockOperator, b_eps: f64, nodes_per_side: usize) -> Result<Self> {
        let low = eigenvalues(&block.assemble())?[0].min(eigenvalues(block.h1())?[0]);
        let left = low.min(b_eps) - 1.0;
        let spec = Self {
            b_eps,
            left,
            half_height: ((b_eps - left) / 2.0).max(1.0),
            nodes_per_side,
        };
        spec.validate(block)?;
        Ok(spec)
    }

    /// Checks the geometry and that no eigenvalue of `H`, `H₁`, `H₂` lies on
    /// the left side, and that `σ(H₂)` stays right of `b`.
    pub fn validate(&self, block: &BlockOperator) -> Result<()> {
        if !(self.left < self.b_eps) || !(self.half_height > 0.0) || self.nodes_per_side == 0 {
            return Err(Error::InvalidArgument("degenerate contour rectangle".into()));
        }
        for spectrum in [
            eigenvalues(&block.assemble())?,
            eigenvalues(block.h1())?,
            eigenvalues(block.h2())?,
        ] {
            for &l in &spectrum {
                let distance = (l - self.left).abs();
                if distance < CONTOUR_CLEARANCE || l < self.left {
                    return Err(Error::SingularResolvent { eigenvalue: l, distance });
                }
            }
        }
        if let Some(&mu) = eigenvalues(block.h2())?.iter().find(|&&mu| mu <= self.b_eps) {
            return Err(Error::Separation(mu));
        }
        Ok(())
    }

    fn panels_per_side(&self) -> usize {
        self.nodes_per_side.div_ceil(GL_PANEL_NODES).max(2)
    }

    /// Nodes `zₖ` with weights `wₖ` (including `dz`) for the counterclockwise
    /// rectangle, so that `∮ g ≈ Σ wₖ g(zₖ)`.
    pub fn nodes(&self) -> Vec<(Complex64, Complex64)> {
        let (x, w) = gauss_legendre(GL_PANEL_NODES);
        let mut out = Vec::with_capacity(4 * self.panels_per_side() * GL_PANEL_NODES);
        let mut segment = |a: Complex64, b: Complex64| {
            let mid = (a + b) * 0.5;
            let half = (b - a) * 0.5;
            for (xi, wi) in x.iter().zip(&w) {
                out.push((mid + half * *xi, half * *wi));
            }
        };
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (l, r, h) = (self.left, self.b_eps, self.half_height);
        let p = self.panels_per_side();
        // Bottom, left to right.
        for k in 0..p {
            let t0 = l + (r - l) * k as f64 / p as f64;
            let t1 = l + (r - l) * (k + 1) as f64 / p as f64;
            segment(c(t0, -h), c(t1, -h));
        }
        // Right side, graded towards the crossing at b from both ends.
        let half = p.div_ceil(2);
        let breaks: Vec<f64> = (0..=half)
            .map(|k| if k == 0 { 0.0 } else { h * GRADING_RATIO.powi((half - k) as i32) })
            .collect();
        for k in (0..half).rev() {
            segment(c(r, -breaks[k + 1]), c(r, -breaks[k]));
        }
        for k in 0..half {
            segment(c(r, breaks[k]), c(r, breaks[k + 1]));
        }
        // Top, right to left.
        for k in 0..p {
            let t0 = r - (r - l) * k as f64 / p as f64;
            let t1 = r - (r - l) * (k + 1) as f64 / p as f64;
            segment(c(t0, h), c(t1, h));
        }
        // Left, top to bottom.
        for k in 0..p {
            let t0 = h - 2.0 * h * k as f64 / p as f64;
            let t1 = h - 2.0 * h * (k + 1) as f64 / p as f64;
            segment(c(l, t0), c(l, t1));
        }
        out
    }

    /// `-(1/2πi)∮ (z - b)² F(z) dz`, real part; `F` is evaluated once per node.
    fn integrate<F>(&self, rows: usize, cols: usize, mut f: F) -> Result<DMatrix<f64>>
    where
        F: FnMut(Complex64) -> Result<CMatrix>,
    {
        let mut acc = CMatrix::zeros(rows, cols);
        for (z, w) in self.nodes() {
            let factor = (z - self.b_eps).powi(2) * w;
            acc += f(z)? * factor;
        }
        let scale = -Complex64::new(0.0, 2.0 * core::f64::consts::PI).inv();
        Ok((acc * scale).map(|c| c.re))
    }
}

fn complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

fn resolvent(a: &CMatrix, z: Complex64) -> Result<CMatrix> {
    let n = a.nrows();
    let shifted = a - CMatrix::identity(n, n) * z;
    shifted.try_inverse().ok_or(Error::SingularResolvent {
        eigenvalue: z.re,
        distance: z.im.abs(),
    })
}

/// `M = (H - b)²P_b` by contour quadrature.
pub fn m_contour(block: &BlockOperator, contour: &ContourSpec) -> Result<DMatrix<f64>> {
    contour.validate(block)?;
    let h = complex(&block.assemble());
    contour.integrate(block.dim(), block.dim(), |z| resolvent(&h, z))
}

/// `S = -(1/2πi)∮ (z - b)² R¹_z V R²_z dz`.
pub fn s_contour(block: &BlockOperator, contour: &ContourSpec) -> Result<DMatrix<f64>> {
    contour.validate(block)?;
    let (h1, h2, v) = (complex(block.h1()), complex(block.h2()), complex(block.v()));
    contour.integrate(block.n1(), block.n2(), |z| {
        Ok(resolvent(&h1, z)? * &v * resolvent(&h2, z)?)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    pub m: DMatrix<f64>,
    pub m0: DMatrix<f64>,
    pub s: DMatrix<f64>,
    /// `M - M₀`.
    pub t: DMatrix<f64>,
    /// `[[T₁₁, T₁₂], [T₁₂ᵀ, T₂₂]]` from the contour definitions.
    pub t_assembled: DMatrix<f64>,
    pub schatten1_t: f64,
    pub schatten2_t: f64,
    /// `max |M_contour - M_spectral|`.
    pub residual_contour: f64,
    /// `max |T - T_assembled|`.
    pub residual_assembly: f64,
}

/// `M = M₀ + T`, with `T` both as the difference `M - M₀` and assembled from
/// the contour integrals of `R¹VR²VᵀA₁₁`, `R¹VR²VᵀA₁₂` and `R²VᵀR¹VA₂₂`.
pub fn t_decomposition(block: &BlockOperator, contour: &ContourSpec) -> Result<DecompositionReport> {
    contour.validate(block)?;
    let b = contour.b_eps;
    let (n1, n2) = (block.n1(), block.n2());
    let h = complex(&block.assemble());
    let (h1, h2, v) = (complex(block.h1()), complex(block.h2()), complex(block.v()));
    let vt = v.transpose();

    // One pass over the nodes fills M, T₁₁, T₁₂ and T₂₂ together.
    let n = n1 + n2;
    let mut acc = CMatrix::zeros(n, n);
    let mut t_acc = CMatrix::zeros(n, n);
    for (z, w) in contour.nodes() {
        let factor = (z - b).powi(2) * w;
        let r = resolvent(&h, z)?;
        let r1 = resolvent(&h1, z)?;
        let r2 = resolvent(&h2, z)?;
        let a11 = r.view((0, 0), (n1, n1));
        let a12 = r.view((0, n1), (n1, n2));
        let a22 = r.view((n1, n1), (n2, n2));
        let left = &r1 * &v * &r2 * &vt;
        let t11 = &left * a11;
        let t12 = &left * a12;
        let t22 = &r2 * &vt * &r1 * &v * a22;
        acc += &r * factor;
        t_acc.view_mut((0, 0), (n1, n1)).zip_apply(&t11, |a, t| *a += t * factor);
        t_acc.view_mut((0, n1), (n1, n2)).zip_apply(&t12, |a, t| *a += t * factor);
        t_acc.view_mut((n1, n1), (n2, n2)).zip_apply(&t22, |a, t| *a += t * factor);
    }
    let scale = -Complex64::new(0.0, 2.0 * core::f64::consts::PI).inv();
    let m = (acc * scale).map(|c| c.re);
    let mut t_assembled = (t_acc * scale).map(|c| c.re);
    let t12 = t_assembled.view((0, n1), (n1, n2)).transpose();
    t_assembled.view_mut((n1, 0), (n2, n1)).copy_from(&t12);

    let m0 = m0_matrix(block, b)?;
    let s = -m0.view((0, n1), (n1, n2)).into_owned();
    let t = &m - &m0;
    let residual_contour = (&m - m_spectral(block, b)?).amax();
    let residual_assembly = (&t - &t_assembled).amax();
    Ok(DecompositionReport {
        schatten1_t: schatten_norm(&t, 1.0),
        schatten2_t: schatten_norm(&t, 2.0),
        m,
        m0,
        s,
        t,
        t_assembled,
        residual_contour,
        residual_assembly,
    })
}
