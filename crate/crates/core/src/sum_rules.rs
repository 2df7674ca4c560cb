//! Band quadratures and the assembled sum rules and inequalities.
//!
//! Every band integral `∫√(8-λ²) g(λ) dλ` is taken in the Chebyshev variable
//! `λ = 2√2 cos θ`, where it reads `8∫₀^π sin²θ g(2√2 cos θ) dθ`.
//! Densities enter through `πσ' = Im m(λ + i0)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::disk::{boundary_log_abs, energy_to_radius, find_zeros_poles, ZeroPoleData};
use crate::green::{GreenFunction, SpectralPoint, Sweep};
use crate::quad::{adaptive, AdaptiveOptions, Integral};
use crate::tree::{truncate, weighted_l2, TreePotential};
use crate::{Error, Result, BAND_EDGE};

const PI: f64 = core::f64::consts::PI;
const LN2: f64 = core::f64::consts::LN_2;

/// Numerical tolerances shared by the sum-rule assemblies.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Absolute tolerance of each adaptive θ-integral.
    pub quadrature: f64,
    /// Bracket width for zero/pole bisection.
    pub bisection: f64,
    /// Declared tolerance for equality reports.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-8,
            bisection: 1e-10,
            residual: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("quadrature", self.quadrature),
            ("bisection", self.bisection),
            ("residual", self.residual),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} tolerance must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RuleId {
    Eq1,
    Eq2,
    StepByStep,
    JensenSplit,
    SingleBranch,
    EntropyBound,
}

impl RuleId {
    pub const ALL: [RuleId; 6] = [
        RuleId::Eq1,
        RuleId::Eq2,
        RuleId::StepByStep,
        RuleId::JensenSplit,
        RuleId::SingleBranch,
        RuleId::EntropyBound,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RuleId::Eq1 => "eq1",
            RuleId::Eq2 => "eq2",
            RuleId::StepByStep => "step_by_step",
            RuleId::JensenSplit => "jensen_split",
            RuleId::SingleBranch => "single_branch",
            RuleId::EntropyBound => "entropy_bound",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    Equality,
    LhsGeRhs,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SumRuleReport {
    pub rule_id: RuleId,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub residual: f64,
    pub direction: Direction,
    /// `|residual|` bound for equalities, one-sided slack for inequalities.
    pub tolerance: f64,
    pub quadrature_tol: f64,
}

impl SumRuleReport {
    fn new(rule_id: RuleId, lhs: f64, rhs: f64, direction: Direction, tolerance: f64, quadrature_tol: f64) -> Self {
        Self {
            rule_id,
            lhs,
            rhs,
            residual: lhs - rhs,
            direction,
            tolerance,
            quadrature_tol,
        }
    }

    pub fn passed(&self) -> bool {
        match self.direction {
            Direction::Equality => self.residual.abs() <= self.tolerance,
            Direction::LhsGeRhs => self.residual >= -self.tolerance,
        }
    }
}

/// `(r² - r⁻²)/4 - ln r` for a disk radius `0 < |r| ≤ 1`.
pub fn y_from_radius(r: f64) -> f64 {
    let r = r.abs();
    (r * r - 1.0 / (r * r)) / 4.0 - r.ln()
}

/// The eigenvalue weight `Y(E)`; even, nonpositive, decreasing in `|E|`.
pub fn y_func(e: f64) -> Result<f64> {
    let a = e.abs();
    if a == BAND_EDGE {
        return Ok(0.0);
    }
    if !(a > BAND_EDGE) || !a.is_finite() {
        return Err(Error::Domain(format!("Y needs |E| ≥ 2√2, got {e}")));
    }
    Ok(y_from_radius(energy_to_radius(a)))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenvalueTerms {
    /// Poles of `m`.
    pub e_values: Vec<f64>,
    /// Zeros of `m`.
    pub e_tilde_values: Vec<f64>,
    pub y_e: Vec<f64>,
    pub y_e_tilde: Vec<f64>,
}

impl EigenvalueTerms {
    pub fn from_data(data: &ZeroPoleData) -> Self {
        Self {
            e_values: data.pole_energies(),
            e_tilde_values: data.zero_energies(),
            y_e: data.poles().map(y_from_radius).collect(),
            y_e_tilde: data.zeros().map(y_from_radius).collect(),
        }
    }

    pub fn sum_y_e(&self) -> f64 {
        self.y_e.iter().sum()
    }

    pub fn sum_y_e_tilde(&self) -> f64 {
        self.y_e_tilde.iter().sum()
    }
}

fn theta_integral<F>(h: F, tol: f64) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    adaptive(h, 0.0, PI, tol, AdaptiveOptions::default())
}

/// `∫_{-2√2}^{2√2} √(8-λ²) g(λ) dλ` via `λ = 2√2 cos θ`. The tolerance
/// applies to the θ-integral before the factor 8.
pub fn band_quadrature<G>(mut g: G, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let r = theta_integral(|t| Ok(t.sin().powi(2) * g(BAND_EDGE * t.cos())?), tol)?;
    Ok(8.0 * r.value)
}

fn boundary_sweep(g: &GreenFunction, theta: f64) -> Result<Sweep> {
    let lambda = (BAND_EDGE * theta.cos()).clamp(-BAND_EDGE, BAND_EDGE);
    g.sweep(SpectralPoint::boundary(lambda)?)
}

/// `∫√(8-λ²) ln(pick(sweep)) dλ` where `pick` returns a positive quantity
/// built from the boundary values at `λ`.
fn band_log_integral<P>(g: &GreenFunction, pick: P, tol: f64) -> Result<f64>
where
    P: Fn(&Sweep) -> f64,
{
    let r = theta_integral(
        |t| {
            let s = boundary_sweep(g, t)?;
            Ok(t.sin().powi(2) * pick(&s).ln())
        },
        tol,
    )?;
    Ok(8.0 * r.value)
}

/// `(1/2π)∫ln|f(e^{iθ})| dθ` for `k = 0`, `(1/π)∫ln|f(e^{iθ})| cos 2θ dθ`
/// for `k = 2`, both over the full circle.
pub fn circle_log_integral(potential: &TreePotential, weight_k: u32, tol: f64) -> Result<f64> {
    let g = GreenFunction::new(potential)?;
    match weight_k {
        0 => Ok(theta_integral(|t| boundary_log_abs(&g, t), tol)?.value / PI),
        2 => Ok(2.0 * theta_integral(|t| Ok(boundary_log_abs(&g, t)? * (2.0 * t).cos()), tol)?.value / PI),
        k => Err(Error::InvalidArgument(format!("weight k must be 0 or 2, got {k}"))),
    }
}

fn require_finite(potential: &TreePotential) -> Result<()> {
    potential.support_radius().map(|_| ()).ok_or(Error::UnboundedSupport)
}

/// Coefficient sum rules from the multiplicative representation of `f`:
/// order 0 compares the constant terms of `ln(f/z)`, order 2 the `z²` terms.
pub fn coefficient_sumrule(potential: &TreePotential, order: u32, tol: &Tolerances) -> Result<SumRuleReport> {
    require_finite(potential)?;
    tol.validate()?;
    let data = find_zeros_poles(potential, tol.bisection)?;
    let v0 = potential.value(&crate::tree::VertexAddress::ROOT);
    let (rule, lhs, rhs) = match order {
        0 => {
            let zeros: f64 = data.zeros().map(|r| r.abs().ln()).sum();
            let poles: f64 = data.poles().map(|r| r.abs().ln()).sum();
            (
                RuleId::Eq1,
                -0.5 * LN2,
                circle_log_integral(potential, 0, tol.quadrature)? + zeros - poles,
            )
        }
        2 => {
            let term = |r: f64| (r * r - 1.0 / (r * r)) / 2.0;
            let zeros: f64 = data.zeros().map(term).sum();
            let poles: f64 = data.poles().map(term).sum();
            (
                RuleId::Eq2,
                v0 * v0 / 4.0,
                circle_log_integral(potential, 2, tol.quadrature)? + zeros - poles,
            )
        }
        o => return Err(Error::InvalidArgument(format!("order must be 0 or 2, got {o}"))),
    };
    Ok(SumRuleReport::new(rule, lhs, rhs, Direction::Equality, tol.residual, tol.quadrature))
}

/// Everything the step-by-step identity is assembled from.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepByStepTerms {
    /// `(1/8π)∫√(8-λ²) ln Im m_O`.
    pub root_log: f64,
    /// `(1/8π)∫√(8-λ²) ln((Im m₁ + Im m₂)/2)`.
    pub branch_log: f64,
    pub root_potential: f64,
    pub eigenvalues: EigenvalueTerms,
}

pub fn step_by_step_terms(potential: &TreePotential, tol: &Tolerances) -> Result<StepByStepTerms> {
    require_finite(potential)?;
    tol.validate()?;
    let g = GreenFunction::new(potential)?;
    let data = find_zeros_poles(potential, tol.bisection)?;
    let root = band_log_integral(&g, |s| s.m.im, tol.quadrature)?;
    let branches = band_log_integral(&g, |s| 0.5 * (s.branches[0].im + s.branches[1].im), tol.quadrature)?;
    Ok(StepByStepTerms {
        root_log: root / (8.0 * PI),
        branch_log: branches / (8.0 * PI),
        root_potential: g.root_potential(),
        eigenvalues: EigenvalueTerms::from_data(&data),
    })
}

/// The step-by-step identity relating the root density to the averaged
/// branch densities.
pub fn step_by_step(potential: &TreePotential, tol: &Tolerances) -> Result<SumRuleReport> {
    let t = step_by_step_terms(potential, tol)?;
    let rhs = t.branch_log - t.root_potential.powi(2) / 8.0 + t.eigenvalues.sum_y_e_tilde()
        - t.eigenvalues.sum_y_e();
    Ok(SumRuleReport::new(
        RuleId::StepByStep,
        t.root_log,
        rhs,
        Direction::Equality,
        tol.residual,
        tol.quadrature,
    ))
}

/// `(1/π)∫√(8-λ²) ln Im m_O ≥ ½[(1/π)∫√(8-λ²) ln Im m₁ + (1/π)∫√(8-λ²) ln Im m₂] - V(O)²`.
pub fn jensen_split(potential: &TreePotential, tol: &Tolerances) -> Result<SumRuleReport> {
    require_finite(potential)?;
    tol.validate()?;
    let g = GreenFunction::new(potential)?;
    let lhs = band_log_integral(&g, |s| s.m.im, tol.quadrature)? / PI;
    let b1 = band_log_integral(&g, |s| s.branches[0].im, tol.quadrature)? / PI;
    let b2 = band_log_integral(&g, |s| s.branches[1].im, tol.quadrature)? / PI;
    let rhs = 0.5 * (b1 + b2) - g.root_potential().powi(2);
    Ok(SumRuleReport::new(
        RuleId::JensenSplit,
        lhs,
        rhs,
        Direction::LhsGeRhs,
        tol.quadrature,
        tol.quadrature,
    ))
}

/// `(1/π)∫√(8-λ²) ln Im m_O ≥ (1/π)∫√(8-λ²) ln(Im m₁/2) - V(O)²`.
pub fn single_branch_bound(potential: &TreePotential, tol: &Tolerances) -> Result<SumRuleReport> {
    require_finite(potential)?;
    tol.validate()?;
    let g = GreenFunction::new(potential)?;
    let lhs = band_log_integral(&g, |s| s.m.im, tol.quadrature)? / PI;
    let rhs = band_log_integral(&g, |s| 0.5 * s.branches[0].im, tol.quadrature)? / PI
        - g.root_potential().powi(2);
    Ok(SumRuleReport::new(
        RuleId::SingleBranch,
        lhs,
        rhs,
        Direction::LhsGeRhs,
        tol.quadrature,
        tol.quadrature,
    ))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelativeEntropy {
    /// `S(σ₀|σ) = ∫ ln(σ'/σ'₀) dσ₀`, or `-∞` when the density vanishes.
    pub value: f64,
    /// `(1/π)∫√(8-λ²) ln(4σ'/√(8-λ²)) dλ`, the normalization without the
    /// `π` inside the logarithm. Equals `4(S - ln π)`.
    pub unnormalized_display: f64,
    /// First energy at which `σ'` was found to vanish, if any.
    pub vanishing_at: Option<f64>,
    pub quadrature_error: f64,
}

/// Relative entropy of the free measure with respect to the root spectral
/// measure, `(1/4π)∫√(8-λ²) ln(4 Im m/√(8-λ²)) dλ`.
pub fn relative_entropy(potential: &TreePotential, tol: f64) -> Result<RelativeEntropy> {
    require_finite(potential)?;
    let g = GreenFunction::new(potential)?;
    let mut vanishing_at = None;
    // √(8-λ²) = 2√2 sin θ, so the log argument is √2 Im m / sin θ.
    let r = theta_integral(
        |t| {
            let s = boundary_sweep(&g, t)?;
            let im = s.m.im;
            if !(im > 0.0) {
                vanishing_at.get_or_insert(BAND_EDGE * t.cos());
                return Ok(0.0);
            }
            Ok(t.sin().powi(2) * (core::f64::consts::SQRT_2 * im / t.sin()).ln())
        },
        tol,
    )?;
    let value = if vanishing_at.is_some() {
        f64::NEG_INFINITY
    } else {
        2.0 * r.value / PI
    };
    Ok(RelativeEntropy {
        value,
        unnormalized_display: 4.0 * (value - PI.ln()),
        vanishing_at,
        quadrature_error: 2.0 * r.error / PI,
    })
}

/// `S(σ₀|σ⁽ᵏ⁾) ≥ -¼ Σ_{n≤k} 2⁻ⁿ Σ_{|x|=n} V(x)²` for the truncation to
/// the ball of radius `k`.
pub fn entropy_bound(potential: &TreePotential, truncation_depth: u32, tol: &Tolerances) -> Result<SumRuleReport> {
    tol.validate()?;
    let truncated = truncate(potential, truncation_depth)?;
    let s = relative_entropy(&truncated, tol.quadrature)?;
    let norm = weighted_l2(&truncated, truncation_depth)?;
    Ok(SumRuleReport::new(
        RuleId::EntropyBound,
        s.value,
        -0.25 * norm.value,
        Direction::LhsGeRhs,
        tol.quadrature,
        tol.quadrature,
    ))
}

/// Run one rule by id. `truncation_depth` is used by the entropy bound only.
pub fn evaluate(
    rule: RuleId,
    potential: &TreePotential,
    truncation_depth: u32,
    tol: &Tolerances,
) -> Result<SumRuleReport> {
    match rule {
        RuleId::Eq1 => coefficient_sumrule(potential, 0, tol),
        RuleId::Eq2 => coefficient_sumrule(potential, 2, tol),
        RuleId::StepByStep => step_by_step(potential, tol),
        RuleId::JensenSplit => jensen_split(potential, tol),
        RuleId::SingleBranch => single_branch_bound(potential, tol),
        RuleId::EntropyBound => entropy_bound(potential, truncation_depth, tol),
    }
}

/// Human-readable one-liner, used by reports.
pub fn summary(report: &SumRuleReport) -> String {
    format!(
        "{} lhs={:.12e} rhs={:.12e} residual={:.3e} {}",
        report.rule_id,
        report.lhs,
        report.rhs,
        report.residual,
        if report.passed() { "ok" } else { "FAILED" }
    )
}
