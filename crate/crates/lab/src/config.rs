//! Experiment configuration: a single TOML file, strictly validated.
//!
//! ```toml
//! experiment = "sum_rules"
//! seed = 7
//!
//! [potential]
//! kind = "single_site"
//! value = 3.0
//!
//! [tolerances]
//! quadrature = 1e-8
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use bethe_core::sum_rules::{RuleId, Tolerances};
use bethe_core::tree::{Profile, TreePotential, VertexAddress};
use serde::{Deserialize, Serialize};
use toml::Spanned;

pub const DEFAULT_BAND_NODES: usize = 2048;
pub const DEFAULT_BOUNDARY_NODES: usize = 4096;
pub const MIN_GRID_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DensitySweep,
    SumRules,
    EntropyBound,
    ZeroPole,
    BlockLab,
    StripAssembly,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::DensitySweep => "density_sweep",
            ExperimentKind::SumRules => "sum_rules",
            ExperimentKind::EntropyBound => "entropy_bound",
            ExperimentKind::ZeroPole => "zero_pole",
            ExperimentKind::BlockLab => "block_lab",
            ExperimentKind::StripAssembly => "strip_assembly",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    SingleSite { value: f64 },
    /// Vertex addresses such as `"O"`, `"O01"`.
    Table { sites: BTreeMap<String, f64> },
    /// `V(x) = levels[|x|]`, zero beyond the last level.
    Radial { levels: Vec<f64> },
    /// `V(x) = amplitude·(|x| + 1)^(-exponent)`.
    PowerLaw { amplitude: f64, exponent: f64 },
    /// Uniform in `[-e_n, e_n)` at level `n`, seeded by the top-level seed.
    Random { envelope: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self, seed: u64) -> bethe_core::Result<TreePotential> {
        match self {
            PotentialSpec::Zero => Ok(TreePotential::zero()),
            PotentialSpec::SingleSite { value } => {
                TreePotential::table([(VertexAddress::ROOT, *value)])
            }
            PotentialSpec::Table { sites } => {
                let entries = sites
                    .iter()
                    .map(|(k, v)| Ok((k.parse::<VertexAddress>()?, *v)))
                    .collect::<bethe_core::Result<Vec<_>>>()?;
                TreePotential::table(entries)
            }
            PotentialSpec::Radial { levels } => TreePotential::radial(Profile::Levels(levels.clone())),
            PotentialSpec::PowerLaw {
                amplitude,
                exponent,
            } => TreePotential::radial(Profile::PowerLaw {
                amplitude: *amplitude,
                exponent: *exponent,
            }),
            PotentialSpec::Random { envelope } => {
                TreePotential::random(seed, Profile::Levels(envelope.clone()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    /// Band sample count for density sweeps.
    #[serde(default = "default_band")]
    pub band: Spanned<usize>,
    /// Boundary samples of `ln|f(e^{iθ})|`.
    #[serde(default = "default_boundary")]
    pub boundary: Spanned<usize>,
}

fn default_band() -> Spanned<usize> {
    Spanned::new(0..0, DEFAULT_BAND_NODES)
}

fn default_boundary() -> Spanned<usize> {
    Spanned::new(0..0, DEFAULT_BOUNDARY_NODES)
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            band: default_band(),
            boundary: default_boundary(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "default_quadrature")]
    pub quadrature: Spanned<f64>,
    #[serde(default = "default_bisection")]
    pub bisection: Spanned<f64>,
    #[serde(default = "default_residual")]
    pub residual: Spanned<f64>,
}

fn default_quadrature() -> Spanned<f64> {
    Spanned::new(0..0, Tolerances::default().quadrature)
}

fn default_bisection() -> Spanned<f64> {
    Spanned::new(0..0, Tolerances::default().bisection)
}

fn default_residual() -> Spanned<f64> {
    Spanned::new(0..0, Tolerances::default().residual)
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            quadrature: default_quadrature(),
            bisection: default_bisection(),
            residual: default_residual(),
        }
    }
}

impl ToleranceSpec {
    pub fn to_core(&self) -> Tolerances {
        Tolerances {
            quadrature: *self.quadrature.get_ref(),
            bisection: *self.bisection.get_ref(),
            residual: *self.residual.get_ref(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockSpec {
    /// Number of random block operators.
    pub count: usize,
    /// Size of each diagonal block.
    pub n: usize,
    pub b_eps: f64,
    /// Minimum distance of the relevant spectra from `b_eps`.
    pub gap: f64,
    /// Entries of `V` are uniform in `[-coupling, coupling)`.
    pub coupling: f64,
    pub nodes_per_side: usize,
    /// `ε` of the lifted operator `Ĥ₁`.
    pub eps: f64,
    /// Two coupling scales for the `‖T(sV)‖₁/s²` stability check.
    pub scales: [f64; 2],
    /// Write `M`, `M₀` and `T` of the first block.
    pub export_matrices: bool,
}

impl Default for BlockSpec {
    fn default() -> Self {
        Self {
            count: 10,
            n: 4,
            b_eps: 0.0,
            gap: 0.4,
            coupling: 0.3,
            nodes_per_side: 512,
            eps: 0.2,
            scales: [1e-2, 1e-3],
            export_matrices: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripPotential {
    Zero,
    /// `Q(x, y) = 1 + x²`, independent of `y`.
    XOnly,
    /// `Q(x, y) = e^{-x} cos y`.
    ExpCos,
}

impl StripPotential {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            StripPotential::Zero => 0.0,
            StripPotential::XOnly => 1.0 + x * x,
            StripPotential::ExpCos => (-x).exp() * y.cos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StripSpec {
    pub potential: StripPotential,
    pub modes: usize,
    pub length: f64,
    pub interior: usize,
    /// Largest mode index in the coupling tables.
    pub max_mode: u32,
    /// Points at which coupling tables are sampled.
    pub sample_x: Vec<f64>,
    /// Fixed spacing and base length of the threshold extrapolation.
    pub threshold_spacing: f64,
    pub threshold_length: f64,
    pub export_matrix: bool,
}

impl Default for StripSpec {
    fn default() -> Self {
        Self {
            potential: StripPotential::ExpCos,
            modes: 2,
            length: 10.0,
            interior: 99,
            max_mode: 5,
            sample_x: vec![0.0, 0.3, 1.0, 2.5],
            threshold_spacing: 0.1,
            threshold_length: 10.0,
            export_matrix: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Json,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    /// Truncation radii for the entropy bound; empty means `0..=R`.
    #[serde(default)]
    pub truncation_depths: Vec<u32>,
    /// Rules for `sum_rules`; empty means all six.
    #[serde(default)]
    pub rules: Vec<RuleId>,
    #[serde(default)]
    pub block: BlockSpec,
    #[serde(default)]
    pub strip: StripSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.to_core()
    }

    pub fn potential(&self) -> bethe_core::Result<TreePotential> {
        self.potential.build(self.seed)
    }

    pub fn rules(&self) -> Vec<RuleId> {
        if self.rules.is_empty() {
            RuleId::ALL.to_vec()
        } else {
            self.rules.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigError {
    /// 1-based line of the offending item, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn line_of(text: &str, span: &Range<usize>) -> Option<usize> {
    if span.is_empty() && span.start == 0 {
        return None;
    }
    let start = span.start.min(text.len());
    Some(text[..start].matches('\n').count() + 1)
}

/// Parse and fully validate a config. Every problem found is reported.
pub fn validate(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        vec![ConfigError {
            line: e.span().and_then(|s| line_of(text, &s)),
            message: e.message().to_string(),
        }]
    })?;
    let mut errors = Vec::new();
    let mut push = |span: Option<Range<usize>>, message: String| {
        errors.push(ConfigError {
            line: span.and_then(|s| line_of(text, &s)),
            message,
        })
    };

    for (name, g) in [("grids.band", &cfg.grids.band), ("grids.boundary", &cfg.grids.boundary)] {
        if *g.get_ref() < MIN_GRID_NODES {
            push(
                Some(g.span()),
                format!("{name} must be at least {MIN_GRID_NODES}, got {}", g.get_ref()),
            );
        }
    }
    for (name, t) in [
        ("tolerances.quadrature", &cfg.tolerances.quadrature),
        ("tolerances.bisection", &cfg.tolerances.bisection),
        ("tolerances.residual", &cfg.tolerances.residual),
    ] {
        let v = *t.get_ref();
        if !(v > 0.0 && v.is_finite()) {
            push(Some(t.span()), format!("{name} must be positive, got {v}"));
        }
    }
    if let Err(e) = cfg.potential() {
        push(None, format!("potential: {e}"));
    }
    let b = &cfg.block;
    if b.count == 0 || b.n == 0 {
        push(None, "block.count and block.n must be at least 1".into());
    }
    if b.nodes_per_side < 16 {
        push(None, "block.nodes_per_side must be at least 16".into());
    }
    if !(b.gap > 0.0 && b.eps > 0.0 && b.coupling >= 0.0 && b.b_eps.is_finite()) {
        push(None, "block.gap and block.eps must be positive, block.coupling nonnegative".into());
    }
    if !b.scales.iter().all(|s| *s > 0.0) {
        push(None, "block.scales must be positive".into());
    }
    let s = &cfg.strip;
    if s.modes == 0 || s.interior < 3 || s.max_mode == 0 {
        push(
            None,
            "strip.modes and strip.max_mode must be at least 1, strip.interior at least 3".into(),
        );
    }
    if !(s.length > 0.0 && s.threshold_spacing > 0.0 && s.threshold_length > s.threshold_spacing) {
        push(None, "strip lengths and spacing must be positive".into());
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}
