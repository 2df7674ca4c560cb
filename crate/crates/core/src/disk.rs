//! The unit-disk picture: `λ = √2(z + 1/z)` sends `𝔻` onto the plane minus
//! the band, and `f(z) = -m(√2(z + 1/z))`, `F(z) = -M(√2(z + 1/z))`.
//!
//! The upper half-disk maps to the lower half-plane, so on the upper
//! semicircle `f(e^{iθ}) = -conj(m(2√2 cos θ + i0))`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::green::{band_root, GreenFunction, SpectralPoint};
use crate::quad::{adaptive, AdaptiveOptions};
use crate::tree::TreePotential;
use crate::{Error, Result, BAND_EDGE};

const SQRT2: f64 = core::f64::consts::SQRT_2;
const PI: f64 = core::f64::consts::PI;

/// Points further than this from the unit circle are not boundary points.
const CIRCLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiskPoint {
    pub z: Complex64,
}

impl DiskPoint {
    /// A point of the closed disk.
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.norm() <= 1.0 + CIRCLE_TOL) {
            return Err(Error::Domain(format!("|z| = {} exceeds 1", z.norm())));
        }
        Ok(Self { z })
    }

    pub fn on_circle(theta: f64) -> Self {
        Self {
            z: Complex64::from_polar(1.0, theta),
        }
    }

    pub fn is_boundary(&self) -> bool {
        (self.z.norm() - 1.0).abs() <= CIRCLE_TOL
    }
}

/// The preimage of an off-band `λ` inside the disk.
pub fn lambda_to_disk(lambda: Complex64) -> Result<DiskPoint> {
    SpectralPoint::off_band(lambda)?;
    Ok(DiskPoint {
        z: (lambda - band_root(lambda)) / (2.0 * SQRT2),
    })
}

pub fn disk_to_lambda(z: Complex64) -> Complex64 {
    SQRT2 * (z + z.inv())
}

/// Energy `√2(r + 1/r)` of a real disk radius (sign carried by `r`).
pub fn radius_to_energy(r: f64) -> f64 {
    SQRT2 * (r + 1.0 / r)
}

/// Real disk radius of an off-band energy.
pub fn energy_to_radius(e: f64) -> f64 {
    let w = e * (1.0 - 8.0 / (e * e)).sqrt();
    (e - w) / (2.0 * SQRT2)
}

fn boundary_values(g: &GreenFunction, z: Complex64) -> Result<(Complex64, Complex64)> {
    let lambda = (2.0 * SQRT2 * z.re).clamp(-BAND_EDGE, BAND_EDGE);
    let s = g.sweep(SpectralPoint::boundary(lambda)?)?;
    if z.im > 0.0 {
        Ok((-s.m.conj(), -s.big_m.conj()))
    } else {
        Ok((-s.m, -s.big_m))
    }
}

/// `f(z) = -m(√2(z + 1/z))`; `f(0) = 0` (removable point of the map).
pub fn f_eval(g: &GreenFunction, point: DiskPoint) -> Result<Complex64> {
    let z = point.z;
    if z == Complex64::new(0.0, 0.0) {
        return Ok(z);
    }
    if point.is_boundary() {
        return Ok(boundary_values(g, z)?.0);
    }
    let lambda = disk_to_lambda(z);
    if z.im == 0.0 {
        let r = g.sweep_real(lambda.re)?;
        if !r.m.is_finite() {
            return Err(Error::PoleHit(lambda.re));
        }
        return Ok(Complex64::new(-r.m, 0.0));
    }
    Ok(-g.sweep(SpectralPoint::off_band(lambda)?)?.m)
}

/// `F(z) = -M(√2(z + 1/z))`, so that `f = -1/F`.
pub fn big_f_eval(g: &GreenFunction, point: DiskPoint) -> Result<Complex64> {
    let z = point.z;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("F has a pole at z = 0".into()));
    }
    if point.is_boundary() {
        return Ok(boundary_values(g, z)?.1);
    }
    let lambda = disk_to_lambda(z);
    if z.im == 0.0 {
        let r = g.sweep_real(lambda.re)?;
        if !r.big_m.is_finite() {
            return Err(Error::PoleHit(lambda.re));
        }
        return Ok(Complex64::new(-r.big_m, 0.0));
    }
    Ok(-g.sweep(SpectralPoint::off_band(lambda)?)?.big_m)
}

/// `ln|f(e^{iθ})| = ln|m(2√2 cos θ + i0)|`, even in `θ`.
pub fn boundary_log_abs(g: &GreenFunction, theta: f64) -> Result<f64> {
    let lambda = (2.0 * SQRT2 * theta.cos()).clamp(-BAND_EDGE, BAND_EDGE);
    Ok(g.sweep(SpectralPoint::boundary(lambda)?)?.m.norm().ln())
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryLogModulus {
    /// `(θ, ln|f(e^{iθ})|)` on a grid symmetric about `θ = 0`.
    pub samples: Vec<(f64, f64)>,
}

/// `n` midpoint samples `θ_j = -π + 2π(j + ½)/n`.
pub fn boundary_log_modulus(g: &GreenFunction, n: usize) -> Result<BoundaryLogModulus> {
    let samples = (0..n)
        .map(|j| {
            let theta = -PI + 2.0 * PI * (j as f64 + 0.5) / n as f64;
            Ok((theta, boundary_log_abs(g, theta)?))
        })
        .collect::<Result<_>>()?;
    Ok(BoundaryLogModulus { samples })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TaylorCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub residual: f64,
}

pub const TAYLOR_RADIUS: f64 = 1e-2;
pub const TAYLOR_NODES: usize = 64;
pub const TAYLOR_TOL: f64 = 1e-8;

/// First three Taylor coefficients of `f` at 0 from Cauchy integrals on
/// `|z| = 10⁻²` with 64 nodes. The residual compares against a circle of
/// twice the radius and includes the (ideally zero) imaginary parts.
pub fn taylor_coeffs_f(potential: &TreePotential) -> Result<TaylorCoefficients> {
    let g = GreenFunction::new(potential)?;
    let cauchy = |r: f64| -> Result<[Complex64; 3]> {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for j in 0..TAYLOR_NODES {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / TAYLOR_NODES as f64);
            let z = w * r;
            let f = f_eval(&g, DiskPoint { z })?;
            let mut zpow = Complex64::new(1.0, 0.0);
            for a in acc.iter_mut() {
                zpow *= z;
                *a += f / zpow;
            }
        }
        Ok(acc.map(|a| a / TAYLOR_NODES as f64))
    };
    let small = cauchy(TAYLOR_RADIUS)?;
    let large = cauchy(2.0 * TAYLOR_RADIUS)?;
    let residual = small
        .iter()
        .zip(&large)
        .map(|(a, b)| (a - b).norm().max(a.im.abs()))
        .fold(0.0, f64::max);
    if !(residual <= TAYLOR_TOL) {
        return Err(Error::Extrapolation {
            residual,
            tol: TAYLOR_TOL,
        });
    }
    Ok(TaylorCoefficients {
        a1: small[0].re,
        a2: small[1].re,
        a3: small[2].re,
        residual,
    })
}

/// Real zeros and poles of `f` inside the disk, i.e. real zeros and poles
/// of `m` off the band.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroPoleData {
    /// Increasing in `(0, 1)`.
    pub zeros_pos: Vec<f64>,
    pub poles_pos: Vec<f64>,
    /// Decreasing in `(-1, 0)`.
    pub zeros_neg: Vec<f64>,
    pub poles_neg: Vec<f64>,
    pub search_tol: f64,
}

impl ZeroPoleData {
    pub fn zeros(&self) -> impl Iterator<Item = f64> + '_ {
        self.zeros_pos.iter().chain(&self.zeros_neg).copied()
    }

    pub fn poles(&self) -> impl Iterator<Item = f64> + '_ {
        self.poles_pos.iter().chain(&self.poles_neg).copied()
    }

    /// `Ẽ_k`, energies of the zeros of `m`.
    pub fn zero_energies(&self) -> Vec<f64> {
        self.zeros().map(radius_to_energy).collect()
    }

    /// `E_k`, energies of the poles of `m` (eigenvalues seen from the root).
    pub fn pole_energies(&self) -> Vec<f64> {
        self.poles().map(radius_to_energy).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros().next().is_none() && self.poles().next().is_none()
    }

    /// On each side, moving inward from infinity towards the band edge,
    /// poles and zeros alternate starting with a pole.
    pub fn interlaces(&self) -> bool {
        fn side(zeros: &[f64], poles: &[f64]) -> bool {
            let mut all: Vec<(f64, bool)> = zeros
                .iter()
                .map(|&r| (r.abs(), false))
                .chain(poles.iter().map(|&r| (r.abs(), true)))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0));
            all.windows(2).all(|w| w[0].0 < w[1].0)
                && all.iter().enumerate().all(|(i, &(_, is_pole))| is_pole == (i % 2 == 0))
        }
        let ordered = |v: &[f64], positive: bool| {
            v.iter()
                .all(|&r| if positive { r > 0.0 && r < 1.0 } else { r < 0.0 && r > -1.0 })
                && v.windows(2).all(|w| w[0].abs() < w[1].abs())
        };
        ordered(&self.zeros_pos, true)
            && ordered(&self.poles_pos, true)
            && ordered(&self.zeros_neg, false)
            && ordered(&self.poles_neg, false)
            && side(&self.zeros_pos, &self.poles_pos)
            && side(&self.zeros_neg, &self.poles_neg)
    }
}

/// Initial grid step of the sign-change scan.
pub const SCAN_STEP: f64 = 1e-2;
const SCAN_REFINEMENTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
enum EventKind {
    Zero,
    Pole,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

struct Scan {
    events: Vec<(f64, f64, EventKind)>,
    /// A same-sign cell where `m` decreased: a pole/zero pair is hiding.
    hidden: Option<f64>,
}

fn scan(g: &GreenFunction, lo: f64, hi: f64, step: f64) -> Result<Scan> {
    let cells = ((hi - lo) / step).ceil().max(1.0) as usize;
    let mut events = Vec::new();
    let mut hidden = None;
    let x_at = |k: usize| {
        if k == cells {
            hi
        } else {
            lo + (hi - lo) * k as f64 / cells as f64
        }
    };
    let mut a = x_at(0);
    let mut ma = g.sweep_real(a)?.m;
    for k in 1..=cells {
        let b = x_at(k);
        let mb = g.sweep_real(b)?.m;
        match (sign(ma), sign(mb)) {
            (-1, 1) | (-1, 0) | (0, 1) => events.push((a, b, EventKind::Zero)),
            (1, -1) => events.push((a, b, EventKind::Pole)),
            (sa, sb) if sa == sb && mb < ma && hidden.is_none() => hidden = Some(a),
            _ => {}
        }
        a = b;
        ma = mb;
    }
    Ok(Scan { events, hidden })
}

fn bisect(g: &GreenFunction, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let sa = sign(g.sweep_real(a)?.m);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            break;
        }
        if sign(g.sweep_real(mid)?.m) == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locate all real zeros and poles of `m` with `2√2 < |λ| ≤ 2√2 + sup|V| + 1`.
///
/// `m` is real and strictly increasing between its poles off the band, so a
/// sign change `- → +` brackets a zero and `+ → -` brackets a pole. The scan
/// is repeated on a 4× finer grid until both agree on the event count, then
/// each bracket is bisected to `tol`.
pub fn find_zeros_poles(potential: &TreePotential, tol: f64) -> Result<ZeroPoleData> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("search tolerance must be positive".into()));
    }
    let g = GreenFunction::new(potential)?;
    let window = BAND_EDGE + potential.sup_norm() + 1.0;
    let inner = BAND_EDGE * (1.0 + 1e-12);
    let mut data = ZeroPoleData {
        search_tol: tol,
        ..Default::default()
    };
    for (lo, hi) in [(inner, window), (-window, -inner)] {
        let mut step = SCAN_STEP;
        let mut coarse = scan(&g, lo, hi, step)?;
        let mut resolved = None;
        for _ in 0..SCAN_REFINEMENTS {
            let fine = scan(&g, lo, hi, step / 4.0)?;
            if fine.hidden.is_none()
                && coarse.hidden.is_none()
                && fine.events.len() == coarse.events.len()
            {
                resolved = Some(fine);
                break;
            }
            coarse = fine;
            step /= 4.0;
        }
        let resolved = resolved.ok_or_else(|| {
            Error::UnresolvedBracket(coarse.hidden.unwrap_or(0.5 * (lo + hi)))
        })?;
        for (a, b, kind) in resolved.events {
            let e = bisect(&g, a, b, tol)?;
            let r = energy_to_radius(e);
            let target = match (kind, e > 0.0) {
                (EventKind::Zero, true) => &mut data.zeros_pos,
                (EventKind::Pole, true) => &mut data.poles_pos,
                (EventKind::Zero, false) => &mut data.zeros_neg,
                (EventKind::Pole, false) => &mut data.poles_neg,
            };
            target.push(r);
        }
    }
    for v in [
        &mut data.zeros_pos,
        &mut data.poles_pos,
        &mut data.zeros_neg,
        &mut data.poles_neg,
    ] {
        v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    }
    Ok(data)
}

/// `B(z) = B₁(z)/B₂(z)` with factors `(|a|/a)·(a - z)/(1 - a z)` over the
/// zeros (`B₁`) and poles (`B₂`).
pub fn blaschke_eval(data: &ZeroPoleData, z: Complex64) -> Result<Complex64> {
    let factor = |a: f64| (a.abs() / a) * (a - z) / (1.0 - a * z);
    let mut b = Complex64::new(1.0, 0.0);
    for a in data.zeros() {
        b *= factor(a);
    }
    for p in data.poles() {
        let d = factor(p);
        if d.norm() < 1e-14 {
            return Err(Error::PoleEvaluation(p));
        }
        b /= d;
    }
    Ok(b)
}

/// `(1/2π)∫_{-π}^{π} (t + z)/(t - z) ln|f(t)| dθ`, folded onto `[0, π]` by
/// the evenness of `ln|f|`.
pub fn poisson_log_integral(g: &GreenFunction, z: Complex64, tol: f64) -> Result<Complex64> {
    let kernel = |theta: f64| {
        let t = Complex64::from_polar(1.0, theta);
        (t + z) / (t - z) + (t.conj() + z) / (t.conj() - z)
    };
    let opts = AdaptiveOptions::default();
    let re = adaptive(
        |th| Ok(kernel(th).re * boundary_log_abs(g, th)?),
        0.0,
        PI,
        tol,
        opts,
    )?;
    let im = adaptive(
        |th| Ok(kernel(th).im * boundary_log_abs(g, th)?),
        0.0,
        PI,
        tol,
        opts,
    )?;
    Ok(Complex64::new(re.value, im.value) / (2.0 * PI))
}

/// Max over `samples` of `|f(z) - z·B(z)·exp(P(z))|`, where `P` is the
/// Poisson integral of the boundary log-modulus. Both sides are computed
/// independently: the left by the recursion, the right from quadrature and
/// the zero/pole search.
pub fn verify_multiplicative_rep(
    potential: &TreePotential,
    samples: &[Complex64],
    tol: f64,
) -> Result<f64> {
    let g = GreenFunction::new(potential)?;
    let data = find_zeros_poles(potential, 1e-13)?;
    let mut worst = 0.0f64;
    for &z in samples {
        let point = DiskPoint::new(z)?;
        if point.is_boundary() {
            return Err(Error::Domain("samples must lie inside the disk".into()));
        }
        let lhs = f_eval(&g, point)?;
        let rhs = z * blaschke_eval(&data, z)? * poisson_log_integral(&g, z, tol)?.exp();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::VertexAddress;
    use alloc::vec;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_map_examples() {
        let z = lambda_to_disk(c(3.0, 0.0)).unwrap().z;
        assert!((z - c(1.0 / SQRT2, 0.0)).norm() < 1e-15);
        assert!((disk_to_lambda(z) - c(3.0, 0.0)).norm() < 1e-14);
        let z = lambda_to_disk(c(-3.0, 0.0)).unwrap().z;
        assert!((z - c(-1.0 / SQRT2, 0.0)).norm() < 1e-15);

        // Root of √2 z² - λ z + √2 = 0 inside the disk for λ = 10i,
        // worked by hand: z = i(10 - √108)/(2√2) = -0.138700…i.
        let z = lambda_to_disk(c(0.0, 10.0)).unwrap().z;
        let by_hand = (10.0 - 108f64.sqrt()) / (2.0 * SQRT2);
        assert!((z - c(0.0, by_hand)).norm() < 1e-15, "{z}");
        assert!((z.norm() - 0.138_700_708).abs() < 1e-9);
        assert!((disk_to_lambda(z) - c(0.0, 10.0)).norm() < 1e-13);

        assert!(lambda_to_disk(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn free_f_is_linear() {
        let g = GreenFunction::new(&TreePotential::zero()).unwrap();
        for k in 0..40 {
            let z = Complex64::from_polar(0.02 + 0.95 * f64::from(k) / 40.0, 0.37 * f64::from(k));
            let f = f_eval(&g, DiskPoint::new(z).unwrap()).unwrap();
            assert!((f - z / SQRT2).norm() < 1e-12);
        }
        for k in 0..40 {
            let p = DiskPoint::on_circle(-3.1 + 0.155 * f64::from(k));
            let f = f_eval(&g, p).unwrap();
            assert!((f - p.z / SQRT2).norm() < 1e-12);
        }
    }

    #[test]
    fn f_times_big_f_and_star_identity() {
        let p = TreePotential::table([
            (VertexAddress::ROOT, 1.0),
            ("O1".parse().unwrap(), -0.6),
        ])
        .unwrap();
        let g = GreenFunction::new(&p).unwrap();
        for k in 1..30 {
            let z = Complex64::from_polar(0.03 * f64::from(k), 0.9 + 0.2 * f64::from(k));
            let pt = DiskPoint::new(z).unwrap();
            let f = f_eval(&g, pt).unwrap();
            let big_f = big_f_eval(&g, pt).unwrap();
            assert!((f * big_f + 1.0).norm() < 1e-12);
            if z.im.abs() > 1e-3 {
                let ratio = f.im / big_f.im;
                assert!((ratio - f.norm_sqr()).abs() < 1e-10);
                assert_eq!(f.im > 0.0, z.im > 0.0);
            }
        }
    }

    #[test]
    fn f_expansion_near_origin() {
        let g = GreenFunction::new(&TreePotential::single_site(1.0)).unwrap();
        let z = c(1e-2, 2e-3);
        let f = f_eval(&g, DiskPoint::new(z).unwrap()).unwrap();
        let series = z / SQRT2 + z * z / 2.0 + z * z * z / (2.0 * SQRT2);
        assert!((f - series).norm() < 5.0 * z.norm().powi(4));
        assert_eq!(f_eval(&g, DiskPoint::new(c(0.0, 0.0)).unwrap()).unwrap(), c(0.0, 0.0));
        assert!(big_f_eval(&g, DiskPoint::new(c(0.0, 0.0)).unwrap()).is_err());
    }

    #[test]
    fn taylor_examples() {
        for (v, expect) in [
            (0.0, [1.0 / SQRT2, 0.0, 0.0]),
            (1.0, [1.0 / SQRT2, 0.5, 1.0 / (2.0 * SQRT2)]),
            (3.0, [1.0 / SQRT2, 1.5, 9.0 / (2.0 * SQRT2)]),
        ] {
            let t = taylor_coeffs_f(&TreePotential::single_site(v)).unwrap();
            for (got, want) in [t.a1, t.a2, t.a3].iter().zip(expect) {
                assert!((got - want).abs() < 1e-8, "V(O)={v}: {t:?}");
            }
        }
    }

    #[test]
    fn zero_pole_examples() {
        let free = find_zeros_poles(&TreePotential::zero(), 1e-10).unwrap();
        assert!(free.is_empty());

        let up = find_zeros_poles(&TreePotential::single_site(3.0), 1e-12).unwrap();
        assert_eq!(up.poles_pos.len(), 1);
        assert!(up.zeros_pos.is_empty() && up.zeros_neg.is_empty() && up.poles_neg.is_empty());
        // Closed form: pole at z = √2/3, E = 11/3.
        assert!((up.poles_pos[0] - SQRT2 / 3.0).abs() < 1e-11);
        assert!((up.pole_energies()[0] - 11.0 / 3.0).abs() < 1e-11);

        let down = find_zeros_poles(&TreePotential::single_site(-3.0), 1e-12).unwrap();
        assert_eq!(down.poles_neg.len(), 1);
        assert!((down.poles_neg[0] + up.poles_pos[0]).abs() < 1e-12);
        assert!(up.interlaces() && down.interlaces());
    }

    #[test]
    fn branch_pole_creates_a_zero() {
        // A strong site on O₁ gives m₁ a pole, hence a zero of m.
        let p = TreePotential::table([
            (VertexAddress::ROOT, 1.0),
            ("O0".parse().unwrap(), 4.0),
        ])
        .unwrap();
        let d = find_zeros_poles(&p, 1e-12).unwrap();
        assert_eq!(d.zeros_pos.len(), 1);
        assert_eq!(d.poles_pos.len(), 1);
        assert!(d.interlaces());
        // m₁ = -1/(2m₀ - 4 + λ) has its pole where √2/z = 4.
        let z1 = SQRT2 / 4.0;
        assert!((d.zero_energies()[0] - radius_to_energy(z1)).abs() < 1e-10);
    }

    #[test]
    fn interlacing_predicate_rejects_bad_orders() {
        let mut d = ZeroPoleData {
            poles_pos: vec![0.3, 0.7],
            zeros_pos: vec![0.5],
            ..Default::default()
        };
        assert!(d.interlaces());
        d.zeros_pos = vec![0.2];
        assert!(!d.interlaces());
        d.zeros_pos = vec![0.5, 0.6];
        assert!(!d.interlaces());
    }

    #[test]
    fn blaschke_examples() {
        let empty = ZeroPoleData::default();
        assert_eq!(blaschke_eval(&empty, c(0.3, 0.2)).unwrap(), c(1.0, 0.0));
        let zero = ZeroPoleData {
            zeros_pos: vec![0.5],
            ..Default::default()
        };
        assert!((blaschke_eval(&zero, c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        let pole = ZeroPoleData {
            poles_neg: vec![-0.5],
            ..Default::default()
        };
        assert!((blaschke_eval(&pole, c(0.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            blaschke_eval(&pole, c(-0.5, 0.0)),
            Err(Error::PoleEvaluation(_))
        ));
        // Unimodular on the circle.
        let mixed = ZeroPoleData {
            zeros_pos: vec![0.4],
            poles_pos: vec![0.2],
            poles_neg: vec![-0.6],
            ..Default::default()
        };
        let b = blaschke_eval(&mixed, Complex64::from_polar(1.0, 1.1)).unwrap();
        assert!((b.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn multiplicative_representation() {
        let ring: Vec<Complex64> = (0..8)
            .map(|k| Complex64::from_polar(0.3, 0.4 + 0.75 * f64::from(k)))
            .collect();
        let free = verify_multiplicative_rep(&TreePotential::zero(), &ring, 1e-11).unwrap();
        assert!(free < 1e-8);
        let one = verify_multiplicative_rep(&TreePotential::single_site(1.0), &ring, 1e-11).unwrap();
        assert!(one < 1e-6, "{one}");
        let three =
            verify_multiplicative_rep(&TreePotential::single_site(3.0), &ring, 1e-11).unwrap();
        assert!(three < 1e-6, "{three}");
    }

    #[test]
    fn boundary_log_modulus_is_even() {
        let p = TreePotential::table([
            (VertexAddress::ROOT, -0.8),
            ("O10".parse().unwrap(), 1.7),
        ])
        .unwrap();
        let g = GreenFunction::new(&p).unwrap();
        let b = boundary_log_modulus(&g, 64).unwrap();
        let n = b.samples.len();
        for j in 0..n {
            let (t1, v1) = b.samples[j];
            let (t2, v2) = b.samples[n - 1 - j];
            assert!((t1 + t2).abs() < 1e-14);
            assert!((v1 - v2).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn map_inversion(re in -8.0f64..8.0, im in -6.0f64..6.0) {
            prop_assume!(im.abs() > 1e-3 || re.abs() > BAND_EDGE + 1e-3);
            let lambda = c(re, im);
            let z = lambda_to_disk(lambda).unwrap().z;
            prop_assert!(z.norm() < 1.0);
            prop_assert!((disk_to_lambda(z) - lambda).norm() < 1e-12 * (1.0 + lambda.norm()));
        }

        #[test]
        fn f_sign_and_symmetry(r in 0.05f64..0.95, theta in 0.05f64..3.09, v in -2.0f64..2.0) {
            let g = GreenFunction::new(&TreePotential::single_site(v)).unwrap();
            let z = Complex64::from_polar(r, theta);
            let up = f_eval(&g, DiskPoint::new(z).unwrap()).unwrap();
            let down = f_eval(&g, DiskPoint::new(z.conj()).unwrap()).unwrap();
            prop_assert!(up.im > 0.0);
            prop_assert!(down.im < 0.0);
            prop_assert!((down - up.conj()).norm() < 1e-13);
        }
    }
}
