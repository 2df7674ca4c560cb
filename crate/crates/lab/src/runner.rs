//! Runs one experiment and writes its artifacts plus `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::experiments::{execute, ExperimentOutput, Report};
use crate::output::{matrix_bin, matrix_csv, series_csv, sha256_hex, to_json_bytes, write_file};
use crate::LabError;

pub const MANIFEST_SCHEMA: &str = "bethe-lab.manifest.v1";

/// Command-line overrides; `None` falls back to the config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentStatus {
    pub experiment: String,
    pub passed: bool,
    pub checks: usize,
    pub failed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSummary {
    /// Largest `|residual|` over equality checks.
    pub max_equality_residual: f64,
    /// Smallest `lhs - rhs` over inequality checks.
    pub min_inequality_slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub artifact_version: &'static str,
    pub config: ExperimentConfig,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub experiments: Vec<ExperimentStatus>,
    pub residual_summary: ResidualSummary,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.experiments.iter().all(|e| e.passed)
    }
}

fn status(report: &Report) -> ExperimentStatus {
    ExperimentStatus {
        experiment: report.experiment.as_str().to_string(),
        passed: report.passed(),
        checks: report.checks.len(),
        failed: report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
    }
}

fn residuals(report: &Report) -> ResidualSummary {
    use bethe_core::sum_rules::Direction;
    let mut max_eq: f64 = 0.0;
    let mut min_slack: Option<f64> = None;
    for c in &report.checks {
        match c.direction {
            Direction::Equality if c.residual.is_nan() => max_eq = f64::NAN,
            Direction::Equality => max_eq = max_eq.max(c.residual.abs()),
            Direction::LhsGeRhs => min_slack = Some(min_slack.map_or(c.residual, |s| s.min(c.residual))),
        }
    }
    ResidualSummary {
        max_equality_residual: max_eq,
        min_inequality_slack: min_slack,
    }
}

/// The report as CSV: one row per check.
fn report_csv(report: &Report) -> Vec<u8> {
    use crate::output::format_f64;
    let mut out = String::from("name,rule_id,lhs,rhs,residual,direction,tolerance,passed,error\n");
    for c in &report.checks {
        let direction = match c.direction {
            bethe_core::sum_rules::Direction::Equality => "equality",
            bethe_core::sum_rules::Direction::LhsGeRhs => "lhs_ge_rhs",
        };
        let error = c.error.as_deref().unwrap_or("").replace([',', '\n'], " ");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.name,
            c.rule_id.map_or("", |r| r.as_str()),
            format_f64(c.lhs),
            format_f64(c.rhs),
            format_f64(c.residual),
            direction,
            format_f64(c.tolerance),
            c.passed,
            error
        ));
    }
    out.into_bytes()
}

struct Writer<'a> {
    root: &'a Path,
    files: Vec<FileEntry>,
}

impl Writer<'_> {
    fn put(&mut self, name: String, bytes: &[u8]) -> Result<(), LabError> {
        let path = self.root.join(&name);
        write_file(&path, bytes).map_err(|e| LabError::io(&path, e))?;
        self.files.push(FileEntry {
            path: name,
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }
}

/// Artifact bytes for one experiment output, keyed by relative path.
pub fn artifacts(out: &ExperimentOutput, format: OutputFormat) -> Result<Vec<(String, Vec<u8>)>, LabError> {
    let mut files = Vec::new();
    match format {
        OutputFormat::Json => files.push(("report.json".to_string(), to_json_bytes(&out.report)?)),
        OutputFormat::Csv => files.push(("report.csv".to_string(), report_csv(&out.report))),
    }
    for s in &out.series {
        files.push((format!("{}.csv", s.name), series_csv(s)));
    }
    for (name, m) in &out.matrices {
        match format {
            OutputFormat::Json => files.push((format!("matrices/{name}.bmat"), matrix_bin(m))),
            OutputFormat::Csv => files.push((format!("matrices/{name}.csv"), matrix_csv(m))),
        }
    }
    Ok(files)
}

/// Execute `cfg` and write every artifact under the output directory.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest, LabError> {
    let started = Instant::now();
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let format = opts.format.unwrap_or(cfg.output.format);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let threads = pool.current_num_threads();
    let output = pool.install(|| execute(cfg));

    let mut writer = Writer {
        root: &out_dir,
        files: Vec::new(),
    };
    for (name, bytes) in artifacts(&output, format)? {
        writer.put(name, &bytes)?;
    }
    let mut manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        artifact_version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        threads,
        wall_clock_seconds: 0.0,
        experiments: vec![status(&output.report)],
        residual_summary: residuals(&output.report),
        files: writer.files,
    };
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let path = out_dir.join("manifest.json");
    write_file(&path, &to_json_bytes(&manifest)?).map_err(|e| LabError::io(&path, e))?;
    Ok(manifest)
}
