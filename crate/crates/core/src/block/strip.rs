//! Finite-difference model of `-Δ + Q(x, y)` on the strip `[0, L] × [0, π]`
//! with Dirichlet walls, expanded in the transverse modes `sin(n y)`.

use alloc::format;

use nalgebra::DMatrix;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::quad::{adaptive, AdaptiveOptions};
use crate::{Error, Result};

use super::eigenvalues;

const PI: f64 = core::f64::consts::PI;
const COUPLING_TOL: f64 = 1e-12;

/// Largest strip matrix dimension `N·G` accepted.
pub const STRIP_DIM_LIMIT: usize = 4096;

/// `Q_{lj}(x) = (2/π)∫₀^π Q(x, y) sin(l y) sin(j y) dy`.
pub fn mode_coupling<Q>(q: Q, l: u32, j: u32, x: f64) -> Result<f64>
where
    Q: Fn(f64, f64) -> f64,
{
    if l == 0 || j == 0 {
        return Err(Error::InvalidArgument("mode indices start at 1".into()));
    }
    let (l, j) = (f64::from(l), f64::from(j));
    let opts = AdaptiveOptions {
        initial_panels: 16,
        ..AdaptiveOptions::default()
    };
    let r = adaptive(
        |y| Ok(q(x, y) * (l * y).sin() * (j * y).sin()),
        0.0,
        PI,
        COUPLING_TOL * PI / 2.0,
        opts,
    )?;
    Ok(2.0 * r.value / PI)
}

/// Uniform Dirichlet grid with `interior` points on `[0, length]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StripGrid {
    pub length: f64,
    pub interior: usize,
}

impl StripGrid {
    pub fn spacing(&self) -> f64 {
        self.length / (self.interior + 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing()
    }
}

/// The `N·G × N·G` matrix in mode-major order (`index = (n - 1)·G + i`):
/// diagonal blocks are the Dirichlet second difference plus `diag Q_{nn}(xᵢ)`
/// plus `n²`, off-diagonal blocks are `diag Q_{lj}(xᵢ)`.
pub fn strip_matrix<Q>(q: Q, n_modes: usize, grid: StripGrid) -> Result<DMatrix<f64>>
where
    Q: Fn(f64, f64) -> f64,
{
    let g = grid.interior;
    if n_modes == 0 || g < 3 || !(grid.length > 0.0) {
        return Err(Error::InvalidArgument(
            "need at least one mode, three interior points and L > 0".into(),
        ));
    }
    let dim = n_modes
        .checked_mul(g)
        .filter(|&d| d <= STRIP_DIM_LIMIT)
        .ok_or_else(|| Error::Resource(format!("strip matrix {n_modes}x{g} exceeds {STRIP_DIM_LIMIT}")))?;
    let h2 = grid.spacing().powi(2);
    let mut a = DMatrix::zeros(dim, dim);
    for l in 1..=n_modes {
        for j in l..=n_modes {
            for i in 0..g {
                let c = mode_coupling(&q, l as u32, j as u32, grid.point(i))?;
                let (r, s) = ((l - 1) * g + i, (j - 1) * g + i);
                a[(r, s)] += c;
                if r != s {
                    a[(s, r)] += c;
                }
            }
        }
        let base = (l - 1) * g;
        for i in 0..g {
            a[(base + i, base + i)] += 2.0 / h2 + (l * l) as f64;
            if i + 1 < g {
                a[(base + i, base + i + 1)] -= 1.0 / h2;
                a[(base + i + 1, base + i)] -= 1.0 / h2;
            }
        }
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdEstimate {
    /// Lowest eigenvalue on `[0, L]`.
    pub coarse: f64,
    /// Lowest eigenvalue on `[0, 2L]` at the same spacing.
    pub fine: f64,
    /// Richardson extrapolation `(4·fine - coarse)/3` of the `1/L²` decay.
    pub extrapolated: f64,
}

/// Bottom of the spectrum of the free strip as `L → ∞` at fixed spacing.
/// The lowest eigenvalue behaves like `1 + π²/L²`, so one Richardson step
/// in `L` recovers the channel threshold `1`.
pub fn free_threshold_estimate(spacing: f64, length: f64) -> Result<ThresholdEstimate> {
    let lowest = |len: f64| -> Result<f64> {
        let interior = (len / spacing).round() as usize - 1;
        let m = strip_matrix(|_, _| 0.0, 1, StripGrid { length: len, interior })?;
        Ok(eigenvalues(&m)?[0])
    };
    let coarse = lowest(length)?;
    let fine = lowest(2.0 * length)?;
    Ok(ThresholdEstimate {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_examples() {
        let q = |x: f64, _y: f64| 1.0 + x * x;
        for l in 1..5 {
            for j in 1..5 {
                let c = mode_coupling(q, l, j, 0.7).unwrap();
                let want = if l == j { 1.49 } else { 0.0 };
                assert!((c - want).abs() < 1e-10, "{l},{j}: {c}");
            }
        }
        let q = |x: f64, y: f64| (-x).exp() * y.cos();
        for l in 1..6 {
            for j in 1..6 {
                let c = mode_coupling(q, l, j, 0.3).unwrap();
                let want = if l.abs_diff(j) == 1 { 0.5 * (-0.3f64).exp() } else { 0.0 };
                assert!((c - want).abs() < 1e-10, "{l},{j}: {c}");
            }
        }
        assert!(mode_coupling(q, 0, 1, 0.0).is_err());
    }

    #[test]
    fn strip_matrix_structure() {
        let grid = StripGrid {
            length: 4.0,
            interior: 7,
        };
        let a = strip_matrix(|x, _| x.sin(), 3, grid).unwrap();
        assert_eq!(a.nrows(), 21);
        assert_eq!(a, a.transpose());
        // y-independent potential: no coupling between modes.
        for l in 0..3 {
            for j in 0..3 {
                if l != j {
                    assert!(a.view((l * 7, j * 7), (7, 7)).amax() < 1e-10);
                }
            }
        }
        let b = strip_matrix(|x, y| x * y.cos(), 3, grid).unwrap();
        assert!((&b - b.transpose()).amax() == 0.0);
        assert!(b.view((0, 7), (7, 7)).amax() > 0.1);
        assert!(matches!(
            strip_matrix(|_, _| 0.0, 100, StripGrid { length: 1.0, interior: 100 }),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn channel_thresholds() {
        let grid = StripGrid {
            length: 40.0,
            interior: 199,
        };
        let a = strip_matrix(|_, _| 0.0, 2, grid).unwrap();
        let e = eigenvalues(&a).unwrap();
        assert!(e[0] > 1.0 && e[0] < 1.01);
        let first_above_four = e.iter().find(|&&x| x > 4.0).unwrap();
        assert!(*first_above_four < 4.01);
    }

    #[test]
    fn threshold_extrapolates_to_one() {
        let t = free_threshold_estimate(0.1, 10.0).unwrap();
        assert!(t.coarse - 1.0 > 0.05);
        assert!((t.extrapolated - 1.0).abs() < 1e-3, "{t:?}");
    }
}
