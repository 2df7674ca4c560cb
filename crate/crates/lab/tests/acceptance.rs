//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs under `cargo test`; output is always printed.

use std::f64::consts::{LN_2, PI};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use bethe_core::block::{hat_operator, m0_matrix, random_gapped_block, t_decomposition, ContourSpec};
use bethe_core::green::{asymptotic_coeffs, jacobi_m_oracle, GreenFunction, SpectralPoint};
use bethe_core::disk::find_zeros_poles;
use bethe_core::sum_rules::{self, RuleId, Tolerances};
use bethe_core::tree::{reduced_tree_matrix, root_resolvent, Profile, TreePotential};
use bethe_core::{Complex64, BAND_EDGE};
use bethe_lab::{execute, validate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn config(name: &str) -> bethe_lab::ExperimentConfig {
    let text = std::fs::read_to_string(configs_dir().join(name)).expect("shipped config");
    validate(&text).expect("valid shipped config")
}

fn free_constants() -> Outcome {
    let g = GreenFunction::new(&TreePotential::zero()).map_err(|e| e.to_string())?;
    let n = 2048;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let x = BAND_EDGE * (PI * (j as f64 + 0.5) / n as f64).cos();
        let d = g.density(x).map_err(|e| e.to_string())?.density;
        worst = worst.max((d - (8.0 - x * x).sqrt() / (4.0 * PI)).abs());
    }
    ensure(worst < 1e-10, || format!("density error {worst:e}"))?;

    let mut cfg = config("density_free.toml");
    cfg.grids.band = toml::Spanned::new(0..0, 2048);
    let report = execute(&cfg).report;
    let mass = report.checks.iter().find(|c| c.name == "total_mass").ok_or("no total_mass check")?;
    ensure((mass.lhs - 1.0).abs() < 1e-8, || format!("mass {}", mass.lhs))?;

    let eq1 = sum_rules::coefficient_sumrule(&TreePotential::zero(), 0, &Tolerances::default())
        .map_err(|e| e.to_string())?;
    let r = (eq1.lhs + 0.5 * LN_2).abs();
    ensure(r < 1e-10, || format!("eq1 free residual {r:e}"))?;
    Ok(format!("density err {worst:.1e}, mass err {:.1e}, eq1 {r:.1e}", (mass.lhs - 1.0).abs()))
}

fn recursion_vs_oracle() -> Outcome {
    let lambdas = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 3.0)];
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let radius = (seed % 4) as usize;
        let p = TreePotential::random(seed, Profile::Levels(vec![2.0; radius + 1])).map_err(|e| e.to_string())?;
        let r = p.support_radius().ok_or("unbounded")?;
        let h = reduced_tree_matrix(&p, r + 40).map_err(|e| e.to_string())?;
        let g = GreenFunction::new(&p).map_err(|e| e.to_string())?;
        for &l in &lambdas {
            let point = SpectralPoint::off_band(l).map_err(|e| e.to_string())?;
            let m = g.m_root(point).map_err(|e| e.to_string())?.value;
            let oracle = root_resolvent(&h, l).map_err(|e| e.to_string())?;
            worst = worst.max((m - oracle).norm());
        }
    }
    ensure(worst < 1e-8, || format!("max deviation {worst:e}"))?;
    Ok(format!("max |m - oracle| = {worst:.1e}"))
}

fn jacobi_equivalence() -> Outcome {
    let profiles = [
        vec![1.0],
        vec![0.5, -1.0, 2.0],
        vec![0.0, 0.0, 3.0, -0.5],
        vec![-2.0, 1.5, -1.0, 0.5, 0.25],
        vec![0.3; 9],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for levels in profiles {
        let p = TreePotential::radial(Profile::Levels(levels.clone())).map_err(|e| e.to_string())?;
        let g = GreenFunction::new(&p).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let l = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(0.05..5.0));
            let point = SpectralPoint::off_band(l).map_err(|e| e.to_string())?;
            let a = g.m_root(point).map_err(|e| e.to_string())?.value;
            let b = jacobi_m_oracle(&levels, point).map_err(|e| e.to_string())?.value;
            worst = worst.max((a - b).norm());
        }
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max |m - m_jacobi| = {worst:.1e}"))
}

fn asymptotics() -> Outcome {
    let mut worst: f64 = 0.0;
    for v in [0.0, 1.0, -2.0] {
        let c = asymptotic_coeffs(&TreePotential::single_site(v)).map_err(|e| e.to_string())?;
        let err = (c.c1 - 1.0).abs().max((c.c2 - v).abs()).max((c.c3 - 2.0 - v * v).abs());
        ensure(err < 1e-6, || format!("V = {v}: {c:?}"))?;
        worst = worst.max(err);
    }
    Ok(format!("max coefficient error {worst:.1e}"))
}

fn sum_rule_equalities() -> Outcome {
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for v in [0.5, 1.0, 3.0] {
        let p = TreePotential::single_site(v);
        ensure(find_zeros_poles(&p, tol.bisection).map_err(|e| e.to_string())?.interlaces(), || format!("V = {v}: interlacing"))?;
        for rule in [RuleId::Eq1, RuleId::Eq2, RuleId::StepByStep] {
            let r = sum_rules::evaluate(rule, &p, 0, &tol).map_err(|e| e.to_string())?;
            ensure(r.residual.abs() < 1e-6, || format!("V = {v} {rule}: residual {:e}", r.residual))?;
            worst = worst.max(r.residual.abs());
        }
    }
    Ok(format!("max residual {worst:.1e}"))
}

fn inequalities() -> Outcome {
    let tol = Tolerances::default();
    let mut slack = f64::INFINITY;
    for seed in 0..20u64 {
        let depth = (seed % 7) as usize;
        let p = TreePotential::random(seed, Profile::Levels(vec![2.0; depth + 1])).map_err(|e| e.to_string())?;
        for rule in [RuleId::JensenSplit, RuleId::SingleBranch, RuleId::EntropyBound] {
            let r = sum_rules::evaluate(rule, &p, depth as u32, &tol).map_err(|e| e.to_string())?;
            ensure(r.residual >= -1e-6, || format!("seed {seed} {rule}: lhs {} < rhs {}", r.lhs, r.rhs))?;
            slack = slack.min(r.residual);
        }
    }
    for v in [0.3, 1.0, 1.4] {
        let s = sum_rules::relative_entropy(&TreePotential::single_site(v), tol.quadrature).map_err(|e| e.to_string())?;
        ensure((s.value + v * v / 4.0).abs() < 1e-6, || format!("v = {v}: S = {}", s.value))?;
    }
    Ok(format!("min slack {slack:.1e}; single site exact"))
}

fn block_lab() -> Outcome {
    let mut worst = [0.0f64; 4];
    for seed in 0..10u64 {
        let b = random_gapped_block(seed, 4, 0.0, 0.4, 0.3).map_err(|e| e.to_string())?;
        let c = ContourSpec::enclosing(&b, 0.0, 512).map_err(|e| e.to_string())?;
        let d = t_decomposition(&b, &c).map_err(|e| e.to_string())?;
        let hat = hat_operator(&b, 0.0, 0.2).map_err(|e| e.to_string())?;
        let hat_diff = (m0_matrix(&hat, 0.0).map_err(|e| e.to_string())? - &d.m0).amax();
        let ratio = |s: f64| -> Result<f64, String> {
            let bs = b.with_coupling_scale(s);
            let c = ContourSpec::enclosing(&bs, 0.0, 512).map_err(|e| e.to_string())?;
            Ok(t_decomposition(&bs, &c).map_err(|e| e.to_string())?.schatten1_t / (s * s))
        };
        let drift = (ratio(1e-2)? / ratio(1e-3)? - 1.0).abs();
        let got = [d.residual_contour, d.residual_assembly, hat_diff, drift];
        let limits = [1e-8, 1e-7, 1e-12, 0.1];
        for k in 0..4 {
            ensure(got[k] < limits[k], || format!("seed {seed}: quantity {k} = {:e}", got[k]))?;
            worst[k] = worst[k].max(got[k]);
        }
    }
    Ok(format!(
        "contour {:.1e}, assembly {:.1e}, hat {:.1e}, scaling drift {:.1}%",
        worst[0],
        worst[1],
        worst[2],
        100.0 * worst[3]
    ))
}

fn strip() -> Outcome {
    let report = execute(&config("strip.toml")).report;
    for c in &report.checks {
        ensure(c.passed, || format!("{}: lhs {} rhs {}", c.name, c.lhs, c.rhs))?;
    }
    let t = report.checks.iter().find(|c| c.name == "threshold_extrapolation").ok_or("no threshold")?;
    Ok(format!("threshold {:.6}", t.lhs))
}

fn run_cli(cfg: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_bethe-lab"))
        .arg("run")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || format!("{} exited with {}", cfg.display(), status.status))
}

/// Every artifact except the manifest, which records wall-clock time.
fn artifacts(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "manifest.json") {
                let bytes = std::fs::read(&path).expect("artifact");
                out.push((path.strip_prefix(dir).expect("prefix").to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut configs: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.path()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    configs.sort();
    for cfg in &configs {
        let stem = cfg.file_stem().ok_or("config name")?.to_string_lossy().into_owned();
        let (a, b) = (tmp.path().join(format!("{stem}-a")), tmp.path().join(format!("{stem}-b")));
        run_cli(cfg, &a, 1)?;
        run_cli(cfg, &b, 4)?;
        let (fa, fb) = (artifacts(&a), artifacts(&b));
        ensure(!fa.is_empty() && fa == fb, || format!("{stem}: artifacts differ between runs"))?;
    }
    Ok(format!("{} configs byte-identical (1 vs 4 threads)", configs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 free-case constants", free_constants, Duration::from_secs(1)),
        ("2 recursion vs oracle", recursion_vs_oracle, Duration::from_secs(10)),
        ("3 jacobi equivalence", jacobi_equivalence, Duration::from_secs(5)),
        ("4 asymptotic coefficients", asymptotics, Duration::from_secs(5)),
        ("5 sum-rule equalities", sum_rule_equalities, Duration::from_secs(30)),
        ("6 inequalities", inequalities, Duration::from_secs(120)),
        ("7 block lab", block_lab, Duration::from_secs(60)),
        ("8 strip assembly", strip, Duration::from_secs(60)),
        ("9 determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(detail) if elapsed <= budget => format!("PASS  {name}: {detail} ({:.2}s)", elapsed.as_secs_f64()),
            Ok(detail) => format!(
                "FAIL  {name}: {detail}, but took {:.2}s (budget {}s)",
                elapsed.as_secs_f64(),
                budget.as_secs()
            ),
            Err(why) => format!("FAIL  {name}: {why}"),
        };
        if verdict.starts_with("FAIL") {
            failures += 1;
        }
        println!("{verdict}");
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
