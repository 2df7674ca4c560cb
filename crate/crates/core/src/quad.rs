//! Quadrature rules: globally adaptive Gauss–Kronrod (7/15) and
//! Gauss–Legendre nodes for the contour integrals.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Integral {
    pub value: f64,
    /// Sum of per-panel `|K15 - G7|`, a conservative error bound.
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    /// Panels the interval is split into before adapting.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            initial_panels: 8,
            max_panels: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(centre - dx)? + f(centre + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let value = k * half;
    let error = ((k - g) * half).abs();
    if !value.is_finite() {
        return Err(Error::Tolerance {
            estimate: value,
            error: f64::INFINITY,
            tol: 0.0,
        });
    }
    Ok(Panel { a, b, value, error })
}

/// `∫_a^b f` to absolute tolerance `tol`, bisecting the panel with the
/// largest error estimate until the summed estimate drops below `tol`.
pub fn adaptive<F>(mut f: F, a: f64, b: f64, tol: f64, opts: AdaptiveOptions) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) || !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(
            "quadrature needs finite limits and tol > 0".into(),
        ));
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels = Vec::with_capacity(4 * n0);
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        panels.push(kronrod(&mut f, lo, hi)?);
    }
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= tol {
            break;
        }
        if panels.len() >= opts.max_panels {
            let estimate = panels.iter().map(|p| p.value).sum();
            return Err(Error::Tolerance {
                estimate,
                error: total_err,
                tol,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Panel has shrunk to machine resolution; keep what we have.
            let estimate = panels.iter().map(|q| q.value).sum::<f64>() + p.value;
            return Err(Error::Tolerance {
                estimate,
                error: total_err,
                tol,
            });
        }
        panels.push(kronrod(&mut f, p.a, mid)?);
        panels.push(kronrod(&mut f, mid, p.b)?);
    }
    // Fixed summation order, independent of refinement history.
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Integral {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error).sum(),
        evaluations: panels.len() * 15,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..n.div_ceil(2) {
        let mut t = (pi * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    (x, w)
}

// (P_n(t), P_n'(t)) by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}
