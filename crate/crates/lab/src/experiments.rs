//! The six experiment kinds. Each returns a deterministic report plus
//! plot-ready series and optional matrices.

use bethe_core::block::{
    self, free_threshold_estimate, m0_matrix, mode_coupling, random_gapped_block, s_contour,
    strip_matrix, t_decomposition, ContourSpec, StripGrid,
};
use bethe_core::disk::{
    boundary_log_modulus, find_zeros_poles, verify_multiplicative_rep, ZeroPoleData,
};
use bethe_core::green::GreenFunction;
use bethe_core::sum_rules::{
    self, relative_entropy, Direction, EigenvalueTerms, RuleId, SumRuleReport,
};
use bethe_core::tree::{
    describe, reduced_tree_matrix, root_spectral_weights, truncate, weighted_l2, TreePotential,
};
use bethe_core::{Complex64, BAND_EDGE};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind, PotentialSpec, StripPotential};
use crate::output::Series;

pub const REPORT_SCHEMA: &str = "bethe-lab.report.v1";

/// Fixed tolerances of the checks that do not depend on the config.
pub const FREE_DENSITY_TOL: f64 = 1e-10;
pub const CONTOUR_TOL: f64 = 1e-8;
pub const ASSEMBLY_TOL: f64 = 1e-7;
pub const HAT_TOL: f64 = 1e-12;
pub const SCALING_TOL: f64 = 0.1;
pub const COUPLING_TOL: f64 = 1e-10;
pub const THRESHOLD_TOL: f64 = 1e-3;
pub const ORACLE_POLE_TOL: f64 = 1e-6;
/// Oracle depth beyond the support radius for pole comparisons.
pub const ORACLE_EXTRA_DEPTH: u32 = 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<RuleId>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub direction: Direction,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    /// `|lhs - rhs| ≤ tolerance`.
    pub fn equality(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = lhs - rhs;
        Self {
            name: name.into(),
            rule_id: None,
            lhs,
            rhs,
            residual,
            direction: Direction::Equality,
            tolerance,
            passed: residual.abs() <= tolerance,
            error: None,
        }
    }

    /// `lhs ≥ rhs - tolerance`.
    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = lhs - rhs;
        Self {
            name: name.into(),
            rule_id: None,
            lhs,
            rhs,
            residual,
            direction: Direction::LhsGeRhs,
            tolerance,
            passed: residual >= -tolerance,
            error: None,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::equality(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    pub fn from_report(name: impl Into<String>, r: &SumRuleReport) -> Self {
        Self {
            name: name.into(),
            rule_id: Some(r.rule_id),
            lhs: r.lhs,
            rhs: r.rhs,
            residual: r.residual,
            direction: r.direction,
            tolerance: r.tolerance,
            passed: r.passed(),
            error: None,
        }
    }

    pub fn failed(name: impl Into<String>, rule_id: Option<RuleId>, err: impl ToString) -> Self {
        Self {
            name: name.into(),
            rule_id,
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual: f64::NAN,
            direction: Direction::Equality,
            tolerance: 0.0,
            passed: false,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub artifact_version: &'static str,
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    pub checks: Vec<Check>,
    pub data: Value,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub report: Report,
    pub series: Vec<Series>,
    pub matrices: Vec<(String, DMatrix<f64>)>,
}

type Outcome = Result<(Vec<Check>, Value, Vec<Series>, Vec<(String, DMatrix<f64>)>), bethe_core::Error>;

/// Run the configured experiment. Numeric errors become failed checks so
/// that a report is always produced.
pub fn execute(cfg: &ExperimentConfig) -> ExperimentOutput {
    let tree_experiment = matches!(
        cfg.experiment,
        ExperimentKind::DensitySweep
            | ExperimentKind::SumRules
            | ExperimentKind::EntropyBound
            | ExperimentKind::ZeroPole
    );
    let potential = if tree_experiment { Some(cfg.potential()) } else { None };
    let descriptor = match &potential {
        Some(Ok(p)) => Some(describe(p)),
        _ => None,
    };
    let outcome: Outcome = match (cfg.experiment, &potential) {
        (_, Some(Err(e))) => Err(e.clone()),
        (ExperimentKind::DensitySweep, Some(Ok(p))) => density_sweep(cfg, p),
        (ExperimentKind::SumRules, Some(Ok(p))) => sum_rules_run(cfg, p),
        (ExperimentKind::EntropyBound, Some(Ok(p))) => entropy_run(cfg, p),
        (ExperimentKind::ZeroPole, Some(Ok(p))) => zero_pole(cfg, p),
        (ExperimentKind::BlockLab, _) => block_lab(cfg),
        (ExperimentKind::StripAssembly, _) => strip_assembly(cfg),
        _ => unreachable!("tree experiments always carry a potential"),
    };
    let (checks, data, series, matrices) = outcome.unwrap_or_else(|e| {
        (vec![Check::failed(cfg.experiment.as_str(), None, e)], Value::Null, Vec::new(), Vec::new())
    });
    ExperimentOutput {
        report: Report {
            schema: REPORT_SCHEMA,
            artifact_version: env!("CARGO_PKG_VERSION"),
            experiment: cfg.experiment,
            seed: cfg.seed,
            potential: descriptor,
            checks,
            data,
        },
        series,
        matrices,
    }
}

/// `1/M'(E)`, the spectral weight of a pole `E` of `m` seen from the root.
fn point_mass(g: &GreenFunction, e: f64) -> bethe_core::Result<f64> {
    let h = 1e-6 * e.abs().max(1.0);
    let d = (g.sweep_real(e + h)?.big_m - g.sweep_real(e - h)?.big_m) / (2.0 * h);
    Ok(1.0 / d)
}

fn density_sweep(cfg: &ExperimentConfig, p: &TreePotential) -> Outcome {
    let g = GreenFunction::new(p)?;
    let n = *cfg.grids.band.get_ref();
    // Chebyshev midpoints, ascending in λ.
    let lambdas: Vec<f64> = (0..n)
        .rev()
        .map(|j| BAND_EDGE * (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
        .collect();
    let samples = lambdas
        .par_iter()
        .map(|&x| Ok((x, g.density(x)?.density)))
        .collect::<bethe_core::Result<Vec<_>>>()?;
    let free = |x: f64| (8.0 - x * x).max(0.0).sqrt() / (4.0 * std::f64::consts::PI);
    let mut series = Series::new("density", vec!["lambda", "density", "free_density"]);
    for &(x, d) in &samples {
        series.push(vec![x, d, free(x)]);
    }
    let mut checks = vec![Check::at_least(
        "density_nonnegative",
        samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min),
        0.0,
        0.0,
    )];
    if p.sup_norm() == 0.0 {
        let err = samples.iter().map(|&(x, d)| (d - free(x)).abs()).fold(0.0, f64::max);
        checks.push(Check::equality("free_density_max_error", err, 0.0, FREE_DENSITY_TOL));
    }
    let tol = cfg.tolerances();
    // ∫σ' dλ = (2√2/π)∫₀^π Im m(2√2 cos θ) sin θ dθ.
    let continuous = bethe_core::quad::adaptive(
        |t| {
            let x = BAND_EDGE * t.cos();
            Ok(g.density(x)?.density * BAND_EDGE * t.sin())
        },
        0.0,
        std::f64::consts::PI,
        tol.quadrature,
        Default::default(),
    )?
    .value;
    let mut data = json!({ "points": n, "continuous_mass": continuous });
    if p.support_radius().is_some() {
        let zp = find_zeros_poles(p, tol.bisection)?;
        let masses = zp
            .pole_energies()
            .into_iter()
            .map(|e| Ok((e, point_mass(&g, e)?)))
            .collect::<bethe_core::Result<Vec<_>>>()?;
        let total = continuous + masses.iter().map(|m| m.1).sum::<f64>();
        checks.push(Check::equality("total_mass", total, 1.0, tol.residual));
        data["point_masses"] = json!(masses
            .iter()
            .map(|(e, w)| json!({ "energy": e, "weight": w }))
            .collect::<Vec<_>>());
    }
    Ok((checks, data, vec![series], Vec::new()))
}

fn default_depths(cfg: &ExperimentConfig, p: &TreePotential) -> Vec<u32> {
    if !cfg.truncation_depths.is_empty() {
        return cfg.truncation_depths.clone();
    }
    (0..=p.support_radius().unwrap_or(4)).collect()
}

fn sum_rules_run(cfg: &ExperimentConfig, p: &TreePotential) -> Outcome {
    let tol = cfg.tolerances();
    let depth = *default_depths(cfg, p).last().unwrap_or(&0);
    let checks: Vec<Check> = cfg
        .rules()
        .par_iter()
        .map(|&rule| match sum_rules::evaluate(rule, p, depth, &tol) {
            Ok(r) => Check::from_report(rule.as_str(), &r),
            Err(e) => Check::failed(rule.as_str(), Some(rule), e),
        })
        .collect();
    let mut data = json!({ "truncation_depth": depth });
    if p.support_radius().is_some() {
        let zp = find_zeros_poles(p, tol.bisection)?;
        data["eigenvalue_terms"] = serde_json::to_value(EigenvalueTerms::from_data(&zp)).expect("serializable");
        data["interlacing"] = json!(zp.interlaces());
    }
    Ok((checks, data, Vec::new(), Vec::new()))
}

fn entropy_run(cfg: &ExperimentConfig, p: &TreePotential) -> Outcome {
    let tol = cfg.tolerances();
    let depths = default_depths(cfg, p);
    let rows = depths
        .par_iter()
        .map(|&k| {
            let t = truncate(p, k)?;
            let s = relative_entropy(&t, tol.quadrature)?;
            let bound = -0.25 * weighted_l2(&t, k)?.value;
            Ok((k, s, bound))
        })
        .collect::<bethe_core::Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut series = Series::new("entropy", vec!["depth", "entropy", "bound"]);
    let mut table = Vec::new();
    for (k, s, bound) in &rows {
        let report = SumRuleReport {
            rule_id: RuleId::EntropyBound,
            lhs: s.value,
            rhs: *bound,
            residual: s.value - bound,
            direction: Direction::LhsGeRhs,
            tolerance: tol.quadrature,
            quadrature_tol: tol.quadrature,
        };
        checks.push(Check::from_report(format!("entropy_bound_k{k}"), &report));
        series.push(vec![f64::from(*k), s.value, *bound]);
        table.push(json!({
            "depth": k,
            "entropy": s.value,
            "bound": bound,
            "unnormalized_display": s.unnormalized_display,
            "vanishing_at": s.vanishing_at,
        }));
    }
    let mut sorted = rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>();
    sorted.sort_by_key(|r| r.0);
    let slack = sorted.windows(2).map(|w| w[0].1 - w[1].1).fold(f64::INFINITY, f64::min);
    if slack.is_finite() {
        checks.push(Check::at_least("bound_monotone_in_depth", slack, 0.0, 0.0));
    }
    if let PotentialSpec::SingleSite { value } = cfg.potential {
        if value.abs() <= std::f64::consts::SQRT_2 {
            if let Some((_, s, _)) = rows.iter().find(|r| r.0 == 0) {
                checks.push(Check::equality("single_site_exact", s.value, -value * value / 4.0, tol.residual));
            }
        }
    }
    Ok((checks, json!({ "truncations": table }), vec![series], Vec::new()))
}

fn zero_pole_json(zp: &ZeroPoleData) -> Value {
    json!({
        "zeros_pos": zp.zeros_pos,
        "poles_pos": zp.poles_pos,
        "zeros_neg": zp.zeros_neg,
        "poles_neg": zp.poles_neg,
        "zero_energies": zp.zero_energies(),
        "pole_energies": zp.pole_energies(),
        "search_tol": zp.search_tol,
    })
}

fn zero_pole(cfg: &ExperimentConfig, p: &TreePotential) -> Outcome {
    let tol = cfg.tolerances();
    let radius = p.support_radius().ok_or(bethe_core::Error::UnboundedSupport)?;
    let zp = find_zeros_poles(p, tol.bisection)?;
    let terms = EigenvalueTerms::from_data(&zp);
    let mut checks = vec![
        Check::flag("interlacing", zp.interlaces()),
        Check::at_least("y_monotone", terms.sum_y_e_tilde(), terms.sum_y_e(), 1e-12),
    ];

    // Eigenvalues of the deep tree matrix that the root sees.
    let h = reduced_tree_matrix(p, radius + ORACLE_EXTRA_DEPTH)?;
    let mut oracle: Vec<f64> = root_spectral_weights(&h)?
        .into_iter()
        .filter(|&(e, w)| e.abs() > BAND_EDGE + 1e-3 && w > 1e-10)
        .map(|(e, _)| e)
        .collect();
    oracle.sort_by(f64::total_cmp);
    let mut poles: Vec<f64> = zp.pole_energies().into_iter().filter(|e| e.abs() > BAND_EDGE + 1e-3).collect();
    poles.sort_by(f64::total_cmp);
    checks.push(Check::equality("pole_count_vs_oracle", poles.len() as f64, oracle.len() as f64, 0.0));
    if poles.len() == oracle.len() {
        let worst = poles
            .iter()
            .zip(&oracle)
            .filter(|(e, _)| e.abs() > BAND_EDGE + 0.1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        checks.push(Check::equality("pole_energies_vs_oracle", worst, 0.0, ORACLE_POLE_TOL));
    }

    let samples: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(0.3, 0.4 + 0.75 * f64::from(k))).collect();
    let rep = verify_multiplicative_rep(p, &samples, tol.quadrature * 1e-2)?;
    checks.push(Check::equality("multiplicative_representation", rep, 0.0, tol.residual));

    let g = GreenFunction::new(p)?;
    let blm = boundary_log_modulus(&g, *cfg.grids.boundary.get_ref())?;
    let mut series = Series::new("boundary_log_modulus", vec!["theta", "log_modulus"]);
    for (t, v) in &blm.samples {
        series.push(vec![*t, *v]);
    }
    let data = json!({
        "zero_pole": zero_pole_json(&zp),
        "eigenvalue_terms": terms,
        "oracle_depth": radius + ORACLE_EXTRA_DEPTH,
        "oracle_eigenvalues": oracle,
    });
    Ok((checks, data, vec![series], Vec::new()))
}

fn block_lab(cfg: &ExperimentConfig) -> Outcome {
    let spec = &cfg.block;
    let per_block = (0..spec.count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let b = random_gapped_block(seed, spec.n, spec.b_eps, spec.gap, spec.coupling)?;
            let contour = ContourSpec::enclosing(&b, spec.b_eps, spec.nodes_per_side)?;
            let d = t_decomposition(&b, &contour)?;
            let s_diff = (s_contour(&b, &contour)? - &d.s).amax();
            let hat = block::hat_operator(&b, spec.b_eps, spec.eps)?;
            let hat_diff = (m0_matrix(&hat, spec.b_eps)? - &d.m0).amax();
            let ratio = |s: f64| -> bethe_core::Result<f64> {
                let bs = b.with_coupling_scale(s);
                let c = ContourSpec::enclosing(&bs, spec.b_eps, spec.nodes_per_side)?;
                Ok(t_decomposition(&bs, &c)?.schatten1_t / (s * s))
            };
            let (r0, r1) = (ratio(spec.scales[0])?, ratio(spec.scales[1])?);
            let checks = vec![
                Check::equality(format!("block{i}_m_contour_vs_spectral"), d.residual_contour, 0.0, CONTOUR_TOL),
                Check::equality(format!("block{i}_s_contour_vs_spectral"), s_diff, 0.0, CONTOUR_TOL),
                Check::equality(format!("block{i}_t_assembly"), d.residual_assembly, 0.0, ASSEMBLY_TOL),
                Check::equality(format!("block{i}_hat_m0_invariance"), hat_diff, 0.0, HAT_TOL),
                Check::equality(format!("block{i}_t_scaling_ratio"), r0 / r1, 1.0, SCALING_TOL),
                Check::at_least(format!("block{i}_schatten_order"), d.schatten1_t, d.schatten2_t, 1e-15),
            ];
            let row = json!({
                "seed": seed,
                "schatten1_t": d.schatten1_t,
                "schatten2_t": d.schatten2_t,
                "residual_contour": d.residual_contour,
                "residual_assembly": d.residual_assembly,
                "t_scaled": [r0, r1],
            });
            let matrices = if i == 0 && spec.export_matrices {
                vec![("block0_M".to_string(), d.m), ("block0_M0".to_string(), d.m0), ("block0_T".to_string(), d.t)]
            } else {
                Vec::new()
            };
            Ok((checks, row, matrices))
        })
        .collect::<bethe_core::Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut matrices = Vec::new();
    for (c, r, m) in per_block {
        checks.extend(c);
        rows.push(r);
        matrices.extend(m);
    }
    Ok((checks, json!({ "blocks": rows }), Vec::new(), matrices))
}

fn strip_assembly(cfg: &ExperimentConfig) -> Outcome {
    let spec = &cfg.strip;
    let mut couplings = Series::new("couplings", vec!["l", "j", "x", "value"]);
    let mut ortho: f64 = 0.0;
    let mut expcos: f64 = 0.0;
    for l in 1..=spec.max_mode {
        for j in 1..=spec.max_mode {
            for &x in &spec.sample_x {
                let q = |x: f64, y: f64| StripPotential::XOnly.eval(x, y);
                let want = if l == j { 1.0 + x * x } else { 0.0 };
                ortho = ortho.max((mode_coupling(q, l, j, x)? - want).abs());
                let v = mode_coupling(|x, y| StripPotential::ExpCos.eval(x, y), l, j, x)?;
                let want = if l.abs_diff(j) == 1 { 0.5 * (-x).exp() } else { 0.0 };
                expcos = expcos.max((v - want).abs());
                let v = mode_coupling(|x, y| spec.potential.eval(x, y), l, j, x)?;
                couplings.push(vec![f64::from(l), f64::from(j), x, v]);
            }
        }
    }
    let t = free_threshold_estimate(spec.threshold_spacing, spec.threshold_length)?;
    let grid = StripGrid {
        length: spec.length,
        interior: spec.interior,
    };
    let a = strip_matrix(|x, y| spec.potential.eval(x, y), spec.modes, grid)?;
    let asym = (&a - a.transpose()).amax();
    let x_only = strip_matrix(|x, y| StripPotential::XOnly.eval(x, y), spec.modes, grid)?;
    let g = spec.interior;
    let mut off_block: f64 = 0.0;
    for l in 0..spec.modes {
        for j in 0..spec.modes {
            if l != j {
                off_block = off_block.max(x_only.view((l * g, j * g), (g, g)).amax());
            }
        }
    }
    let spectrum = block::eigenvalues(&a)?;
    let checks = vec![
        Check::equality("coupling_orthogonality", ortho, 0.0, COUPLING_TOL),
        Check::equality("coupling_exp_cos", expcos, 0.0, COUPLING_TOL),
        Check::equality("threshold_extrapolation", t.extrapolated, 1.0, THRESHOLD_TOL),
        Check::equality("strip_matrix_symmetric", asym, 0.0, 0.0),
        Check::equality("y_independent_blocks_decouple", off_block, 0.0, COUPLING_TOL),
    ];
    let data = json!({
        "threshold": t,
        "dimension": a.nrows(),
        "lowest_eigenvalues": spectrum.iter().take(8).collect::<Vec<_>>(),
    });
    let mut spectrum_series = Series::new("strip_spectrum", vec!["index", "eigenvalue"]);
    for (i, e) in spectrum.iter().enumerate() {
        spectrum_series.push(vec![i as f64, *e]);
    }
    let matrices = if spec.export_matrix { vec![("strip_matrix".to_string(), a)] } else { Vec::new() };
    Ok((checks, data, vec![couplings, spectrum_series], matrices))
}
