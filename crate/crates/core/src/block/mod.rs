//! Dense block operators `H = [[H₁, V], [Vᵀ, H₂]]`, the regularized
//! spectral projector `M = (H - b)²P_b`, and its decomposition `M = M₀ + T`.

mod contour;
mod strip;

pub use contour::{
    m_contour, s_contour, t_decomposition, ContourSpec, DecompositionReport, GL_PANEL_NODES,
};
pub use strip::{
    free_threshold_estimate, mode_coupling, strip_matrix, StripGrid, ThresholdEstimate,
    STRIP_DIM_LIMIT,
};

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[allow(unused_imports)]
use crate::prelude::*;
use crate::tree::unit_uniform;
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    h1: DMatrix<f64>,
    h2: DMatrix<f64>,
    v: DMatrix<f64>,
}

fn check_symmetric(name: &str, a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!("{name} must be square")));
    }
    let scale = a.amax().max(1.0);
    if (a - a.transpose()).amax() > SYMMETRY_TOL * scale {
        return Err(Error::InvalidArgument(format!("{name} must be symmetric")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
    }
    Ok(())
}

impl BlockOperator {
    pub fn new(h1: DMatrix<f64>, h2: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        check_symmetric("H1", &h1)?;
        check_symmetric("H2", &h2)?;
        if v.shape() != (h1.nrows(), h2.nrows()) {
            return Err(Error::InvalidArgument(format!(
                "V is {}x{}, expected {}x{}",
                v.nrows(),
                v.ncols(),
                h1.nrows(),
                h2.nrows()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("V has non-finite entries".into()));
        }
        Ok(Self { h1, h2, v })
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    pub fn h2(&self) -> &DMatrix<f64> {
        &self.h2
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn n1(&self) -> usize {
        self.h1.nrows()
    }

    pub fn n2(&self) -> usize {
        self.h2.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n1() + self.n2()
    }

    /// Same blocks with the coupling scaled by `s`.
    pub fn with_coupling_scale(&self, s: f64) -> Self {
        Self {
            v: &self.v * s,
            ..self.clone()
        }
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let (n1, n2) = (self.n1(), self.n2());
        let mut h = DMatrix::zeros(n1 + n2, n1 + n2);
        h.view_mut((0, 0), (n1, n1)).copy_from(&self.h1);
        h.view_mut((n1, n1), (n2, n2)).copy_from(&self.h2);
        h.view_mut((0, n1), (n1, n2)).copy_from(&self.v);
        h.view_mut((n1, 0), (n2, n1)).copy_from(&self.v.transpose());
        h
    }
}

/// Eigenpairs sorted by eigenvalue.
pub(crate) fn sorted_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0).ok_or(Error::Eigen)?;
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<DVector<f64>>>(),
    );
    Ok((values, vectors))
}

pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(sorted_eigen(a)?.0)
}

/// `(A - b)² P_{(-∞, b]}` by spectral calculus for a symmetric `A`.
pub fn regularized_projector(a: &DMatrix<f64>, b_eps: f64) -> Result<DMatrix<f64>> {
    let (values, vectors) = sorted_eigen(a)?;
    let n = a.nrows();
    let mut m = DMatrix::zeros(n, n);
    for (i, &lam) in values.iter().enumerate().filter(|(_, &l)| l <= b_eps) {
        let u = vectors.column(i);
        m += u * u.transpose() * (lam - b_eps).powi(2);
    }
    Ok(m)
}

/// `M = (H - b)²P_b` from the eigendecomposition of the assembled `H`.
pub fn m_spectral(block: &BlockOperator, b_eps: f64) -> Result<DMatrix<f64>> {
    if !b_eps.is_finite() {
        return Err(Error::InvalidArgument("b_eps must be finite".into()));
    }
    regularized_projector(&block.assemble(), b_eps)
}

/// `S = Σ_{λᵢ ≤ b} (λᵢ - b)² uᵢuᵢᵀ V (H₂ - λᵢ)⁻¹` over eigenpairs of `H₁`.
pub fn s_matrix(block: &BlockOperator, b_eps: f64) -> Result<DMatrix<f64>> {
    let (values, vectors) = sorted_eigen(&block.h1)?;
    let h2_spec = eigenvalues(&block.h2)?;
    let scale = block.h2.amax().max(1.0);
    let mut s = DMatrix::zeros(block.n1(), block.n2());
    for (i, &lam) in values.iter().enumerate().filter(|(_, &l)| l <= b_eps) {
        if let Some(&mu) = h2_spec.iter().find(|&&mu| (mu - lam).abs() <= 1e-12 * scale) {
            return Err(Error::Separation(mu));
        }
        let u = vectors.column(i).into_owned();
        let shifted = &block.h2 - DMatrix::identity(block.n2(), block.n2()) * lam;
        // uᵀV(H₂ - λ)⁻¹ = ((H₂ - λ)⁻¹ Vᵀu)ᵀ by symmetry of H₂.
        let w = shifted
            .lu()
            .solve(&(block.v.transpose() * &u))
            .ok_or(Error::Separation(lam))?;
        s += (lam - b_eps).powi(2) * &u * w.transpose();
    }
    Ok(s)
}

/// `M₀ = [[(H₁ - b)²P¹, -S], [-Sᵀ, 0]]`.
///
/// The off-diagonal sign follows from `M₁₂ = -(1/2πi)∮(z - b)²A₁₂ dz` with
/// `A₁₂ = -R¹VR² + R¹VR²VᵀA₁₂`; to first order in `V` it is the divided
/// difference `-Σ(λᵢ - b)²PᵢV(H₂ - λᵢ)⁻¹`.
pub fn m0_matrix(block: &BlockOperator, b_eps: f64) -> Result<DMatrix<f64>> {
    let (n1, n2) = (block.n1(), block.n2());
    let p1 = regularized_projector(&block.h1, b_eps)?;
    let s = s_matrix(block, b_eps)?;
    let mut m0 = DMatrix::zeros(n1 + n2, n1 + n2);
    m0.view_mut((0, 0), (n1, n1)).copy_from(&p1);
    m0.view_mut((0, n1), (n1, n2)).copy_from(&(-&s));
    m0.view_mut((n1, 0), (n2, n1)).copy_from(&(-s.transpose()));
    Ok(m0)
}

/// Replace the spectrum of `H₁` above `b` by the single point `b + ε/4`.
pub fn hat_operator(block: &BlockOperator, b_eps: f64, eps: f64) -> Result<BlockOperator> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let (values, vectors) = sorted_eigen(&block.h1)?;
    if values.iter().all(|&l| l <= b_eps) {
        return Ok(block.clone());
    }
    let lifted = DVector::from_iterator(
        values.len(),
        values
            .iter()
            .map(|&l| if l <= b_eps { l } else { b_eps + eps / 4.0 }),
    );
    let mut h1 = &vectors * DMatrix::from_diagonal(&lifted) * vectors.transpose();
    h1 = (&h1 + h1.transpose()) * 0.5;
    Ok(BlockOperator {
        h1,
        ..block.clone()
    })
}

/// Max entry of `Z·Z⁻¹ - I` where `Z = [[A₁, B], [Bᵀ, A₂]]` and `Z⁻¹` is
/// assembled from the Schur complement `A₁ - B A₂⁻¹ Bᵀ`.
pub fn block_inverse_identity(a1: &DMatrix<f64>, a2: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let (n1, n2) = (a1.nrows(), a2.nrows());
    if !a1.is_square() || !a2.is_square() || b.shape() != (n1, n2) {
        return Err(Error::InvalidArgument("incompatible block shapes".into()));
    }
    let a2_inv = checked_inverse(a2)?;
    let schur = a1 - b * &a2_inv * b.transpose();
    let s_inv = checked_inverse(&schur)?;
    let upper_right = -(&s_inv * b * &a2_inv);
    let lower_left = -(&a2_inv * b.transpose() * &s_inv);
    let lower_right = &a2_inv + &a2_inv * b.transpose() * &s_inv * b * &a2_inv;

    let mut z = DMatrix::zeros(n1 + n2, n1 + n2);
    z.view_mut((0, 0), (n1, n1)).copy_from(a1);
    z.view_mut((n1, n1), (n2, n2)).copy_from(a2);
    z.view_mut((0, n1), (n1, n2)).copy_from(b);
    z.view_mut((n1, 0), (n2, n1)).copy_from(&b.transpose());
    let mut inv = DMatrix::zeros(n1 + n2, n1 + n2);
    inv.view_mut((0, 0), (n1, n1)).copy_from(&s_inv);
    inv.view_mut((0, n1), (n1, n2)).copy_from(&upper_right);
    inv.view_mut((n1, 0), (n2, n1)).copy_from(&lower_left);
    inv.view_mut((n1, n1), (n2, n2)).copy_from(&lower_right);
    Ok((z * inv - DMatrix::identity(n1 + n2, n1 + n2)).amax())
}

/// Reciprocal condition number below which a block counts as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

fn checked_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sv = a.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(rcond > SINGULAR_RCOND) {
        return Err(Error::SingularSchur(rcond));
    }
    a.clone().try_inverse().ok_or(Error::SingularSchur(rcond))
}

/// Schatten `p`-norm from the singular values (`p = 1` trace norm,
/// `p = 2` Hilbert–Schmidt).
pub fn schatten_norm(a: &DMatrix<f64>, p: f64) -> f64 {
    let sv = a.clone().singular_values();
    sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Seeded random block operator with `σ(H₁)` split around `b` and
/// `σ(H₂) ⊂ [b + gap, b + 3]`. Eigenvalues of `H₁` and of the coupled `H`
/// keep a distance of at least `gap/2` from `b`.
pub fn random_gapped_block(seed: u64, n: usize, b_eps: f64, gap: f64, coupling: f64) -> Result<BlockOperator> {
    if n == 0 || !(gap > 0.0) {
        return Err(Error::InvalidArgument("need n ≥ 1 and gap > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |lo: f64, hi: f64| lo + (hi - lo) * 0.5 * (unit_uniform(rng.next_u64()) + 1.0);
    for _ in 0..64 {
        // At least one eigenvalue of H₁ below b so M is non-trivial.
        let d1: Vec<f64> = (0..n)
            .map(|k| {
                if k == 0 || uniform(0.0, 1.0) < 0.7 {
                    uniform(b_eps - 3.0, b_eps - gap)
                } else {
                    uniform(b_eps + gap, b_eps + 3.0)
                }
            })
            .collect();
        let d2: Vec<f64> = (0..n).map(|_| uniform(b_eps + gap, b_eps + 3.0)).collect();
        let q1 = random_orthogonal(n, &mut uniform);
        let q2 = random_orthogonal(n, &mut uniform);
        let v = DMatrix::from_fn(n, n, |_, _| uniform(-coupling, coupling));
        let h1 = &q1 * DMatrix::from_diagonal(&DVector::from_vec(d1)) * q1.transpose();
        let h2 = &q2 * DMatrix::from_diagonal(&DVector::from_vec(d2)) * q2.transpose();
        let block = BlockOperator::new(
            (&h1 + h1.transpose()) * 0.5,
            (&h2 + h2.transpose()) * 0.5,
            v,
        )?;
        let spec = eigenvalues(&block.assemble())?;
        if spec.iter().all(|l| (l - b_eps).abs() >= gap / 2.0) {
            return Ok(block);
        }
    }
    Err(Error::InvalidArgument("could not draw a gapped block; lower the coupling".into()))
}

fn random_orthogonal(n: usize, uniform: &mut impl FnMut(f64, f64) -> f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| uniform(-1.0, 1.0));
    a.qr().q()
}
