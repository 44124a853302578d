//! The five subcommands as library functions.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::boundary::BcKind;
use crate::operator::{
    evaluate, read_checkpoint, train, write_checkpoint, Arch, Checkpoint, EpochMetrics, EvalMetrics, OperatorError,
    TrainConfig, Wiring,
};
use crate::pde::{build_dataset, read_dataset, write_dataset, Dataset, PdeError, Problem, ProblemSpec};

use super::checks::{bound_trials, BoundStats};
use super::config::{existing_file, writable_target, ExperimentConfig};
use super::verify::run_verify;
use super::HarnessError;

const DATAGEN_KEYS: &[&str] = &[
    "problem", "bc", "nu", "re", "wave_speed", "kappa", "amp", "order", "resolution", "extent", "n_data", "n_train",
    "nt", "m", "multistep", "t_final", "seed", "out",
];
const TRAIN_KEYS: &[&str] =
    &["data", "out", "epochs", "lr", "batch_size", "decay_every", "seed", "baseline", "mollifier", "modes", "width"];
const EVAL_KEYS: &[&str] = &["checkpoint", "data", "split", "out"];
const BOUNDS_KEYS: &[&str] = &["trials", "seed", "out"];
const VERIFY_KEYS: &[&str] = &["filter", "inject_fault"];

/// The "a (b)" convention: relative L2 followed by boundary L2.
pub fn paired(rel: f64, bdy: f64) -> String {
    format!("{rel} ({bdy})")
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

fn from_pde(e: PdeError) -> HarnessError {
    match e {
        PdeError::BadParam(_) | PdeError::Grid(_) | PdeError::Peclet { .. } => usage(e.to_string()),
        _ => HarnessError::Failed(e.to_string()),
    }
}

fn from_op(e: OperatorError) -> HarnessError {
    match e {
        OperatorError::Config(_)
        | OperatorError::Shape(_)
        | OperatorError::Resolution { .. }
        | OperatorError::Unsupported(_) => usage(e.to_string()),
        _ => HarnessError::Failed(e.to_string()),
    }
}

/// Dataset specification from the configuration, starting from the
/// defaults for the chosen problem.
pub fn problem_spec(cfg: &ExperimentConfig) -> Result<ProblemSpec, HarnessError> {
    let name = cfg.raw("problem").ok_or_else(|| usage("--problem is required"))?;
    let problem = Problem::parse(name).ok_or_else(|| {
        let names: Vec<_> = Problem::ALL.iter().map(|p| p.name()).collect();
        usage(format!("unknown problem {name:?} (expected one of {})", names.join(", ")))
    })?;
    if let Some(bc) = cfg.raw("bc") {
        let kind = BcKind::parse(bc).ok_or_else(|| usage(format!("unknown boundary kind {bc:?}")))?;
        if kind != problem.bc_kind() {
            return Err(usage(format!("{} uses {} conditions, not {}", problem.name(), problem.bc_kind().name(), kind.name())));
        }
    }
    let default_n = if problem.space_dims() == 1 { 128 } else { 32 };
    let n = cfg.get("resolution")?.unwrap_or(default_n);
    let mut s = ProblemSpec::standard(problem, n, cfg.flag("multistep")?);
    if let Some(v) = cfg.get::<usize>("n_data")? {
        s = s.with_size(v);
    }
    macro_rules! set {
        ($key:literal, $field:ident) => {
            if let Some(v) = cfg.get($key)? {
                s.$field = v;
            }
        };
    }
    set!("n_train", n_train);
    set!("nt", nt);
    set!("m", m);
    set!("t_final", t_final);
    set!("seed", seed);
    set!("nu", nu);
    set!("re", re);
    set!("wave_speed", c);
    set!("kappa", kappa);
    set!("amp", amp);
    set!("order", order);
    if let Some(e) = cfg.raw("extent") {
        let parts: Vec<f64> = e.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>().map_err(|_| usage(format!("bad extent {e:?}")))?;
        match parts[..] {
            [lo, hi] => s.extent = (lo, hi),
            _ => return Err(usage(format!("extent needs two numbers, got {e:?}"))),
        }
    }
    s.validate().map_err(from_pde)?;
    Ok(s)
}

pub fn cmd_datagen(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), HarnessError> {
    cfg.only(DATAGEN_KEYS)?;
    let path = cfg.require_path("out")?;
    writable_target(&path)?;
    let spec = problem_spec(cfg)?;
    let data = build_dataset(&spec).map_err(from_pde)?;
    write_dataset(&path, &data).map_err(|e| HarnessError::Io(e.to_string()))?;
    let res: Vec<f64> = (0..data.len()).filter_map(|i| data.bc_residual(i)).collect();
    writeln!(
        out,
        "wrote {}: {} {} samples (train {}, test {}), shape {:?}, M = {}, seed {}",
        path.display(),
        data.len(),
        spec.problem.name(),
        data.meta.train.len(),
        data.meta.test.len(),
        data.meta.shape,
        data.m(),
        spec.seed
    )?;
    if res.is_empty() {
        writeln!(out, "boundary residual: n/a (no simple boundary condition on the outputs)")?;
    } else {
        let max = res.iter().fold(0.0f64, |m, v| m.max(*v));
        let mean = res.iter().sum::<f64>() / res.len() as f64;
        writeln!(out, "boundary residual per sample: max {max:e}, mean {mean:e}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    problem: &'a str,
    resolution: usize,
    data_seed: u64,
    arch: &'a Arch,
    train: &'a TrainConfig,
    epochs_run: usize,
    stopped: &'a Option<String>,
    final_metrics: Option<&'a EpochMetrics>,
}

fn load_data(path: &Path) -> Result<Dataset, HarnessError> {
    existing_file(path, "dataset")?;
    read_dataset(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Architecture for a dataset: standard modes and width, wiring from its
/// boundary data.
pub fn arch_for(data: &Dataset) -> Arch {
    let spec = &data.meta.spec;
    let wiring = Wiring::from_spec(data.bc(0).unwrap_or(&spec.bc_template()));
    Arch::standard(spec.problem.space_dims(), data.m() > 1, data.m(), wiring)
}

pub fn cmd_train(cfg: &ExperimentConfig, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), HarnessError> {
    cfg.only(TRAIN_KEYS)?;
    let dir = cfg.require_path("out")?;
    writable_target(&dir)?;
    let data = load_data(&cfg.require_path("data")?)?;
    let spec = &data.meta.spec;
    let mut arch = arch_for(&data);
    arch.corrected = !cfg.flag("baseline")?;
    arch.mollifier = cfg.flag("mollifier")?;
    if let Some(m) = cfg.get("modes")? {
        arch.modes = m;
    }
    if let Some(w) = cfg.get("width")? {
        arch.width = w;
    }
    let mut tc = TrainConfig::standard(spec.problem.space_dims(), data.m() > 1);
    if let Some(v) = cfg.get("epochs")? {
        tc.epochs = v;
    }
    if let Some(v) = cfg.get("lr")? {
        tc.lr = v;
    }
    if let Some(v) = cfg.get("batch_size")? {
        tc.batch_size = v;
    }
    if let Some(v) = cfg.get("decay_every")? {
        tc.decay_every = v;
    }
    if let Some(v) = cfg.get("seed")? {
        tc.seed = v;
    }
    tc.validate().map_err(from_op)?;
    arch.validate().map_err(from_op)?;
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;

    let start = Instant::now();
    let outcome = train(arch.clone(), &tc, &data).map_err(from_op)?;
    writeln!(log, "trained {} epochs in {:.1} s", outcome.history.len(), start.elapsed().as_secs_f64())?;

    let ckpt = Checkpoint { params: outcome.params, resolution: spec.n, adam: outcome.adam };
    write_checkpoint(&dir.join("model.boonmodl"), &ckpt).map_err(|e| HarnessError::Io(e.to_string()))?;
    let mut csv = String::from("epoch,train_rel_l2,test_rel_l2,boundary_l2,lr\n");
    for e in &outcome.history {
        csv.push_str(&format!("{},{},{},{},{}\n", e.epoch, e.train_rel_l2, e.test_rel_l2, e.boundary_l2, e.lr));
    }
    write_file(&dir.join("metrics.csv"), csv.as_bytes())?;
    let summary = TrainSummary {
        problem: spec.problem.name(),
        resolution: spec.n,
        data_seed: spec.seed,
        arch: &arch,
        train: &tc,
        epochs_run: outcome.history.len(),
        stopped: &outcome.stopped,
        final_metrics: outcome.history.last(),
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_file(&dir.join("summary.json"), text.as_bytes())?;
    if let Some(reason) = &outcome.stopped {
        writeln!(out, "stopped early: {reason}")?;
    }
    if let Some(last) = outcome.history.last() {
        writeln!(
            out,
            "{} {}: train {} test {}",
            if arch.corrected { "corrected" } else { "baseline" },
            spec.problem.name(),
            last.train_rel_l2,
            paired(last.test_rel_l2, last.boundary_l2)
        )?;
    }
    writeln!(out, "wrote {}", dir.display())?;
    match outcome.stopped {
        Some(reason) => Err(HarnessError::Failed(reason)),
        None => Ok(()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn list(cfg: &ExperimentConfig, key: &str) -> Result<Vec<PathBuf>, HarnessError> {
    let raw = cfg.raw(key).ok_or_else(|| usage(format!("--{key} is required")))?;
    Ok(raw.split(',').map(|s| PathBuf::from(s.trim())).filter(|p| !p.as_os_str().is_empty()).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalRow {
    pub checkpoint: String,
    pub data: String,
    pub train_resolution: usize,
    pub test_resolution: usize,
    pub metrics: EvalMetrics,
}

/// Evaluates every checkpoint on every dataset.
pub fn cmd_eval(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Vec<EvalRow>, HarnessError> {
    cfg.only(EVAL_KEYS)?;
    let ckpts = list(cfg, "checkpoint")?;
    let datas = list(cfg, "data")?;
    for p in &ckpts {
        existing_file(p, "checkpoint")?;
    }
    for p in &datas {
        existing_file(p, "dataset")?;
    }
    if let Some(o) = cfg.path("out") {
        writable_target(&o)?;
    }
    let split = cfg.raw("split").unwrap_or("test");
    let mut rows = Vec::new();
    let loaded: Vec<Dataset> = datas.iter().map(|p| load_data(p)).collect::<Result<_, _>>()?;
    for cp in &ckpts {
        let c = read_checkpoint(cp).map_err(|e| usage(format!("{}: {e}", cp.display())))?;
        for (dp, d) in datas.iter().zip(&loaded) {
            let idx: Vec<usize> = match split {
                "test" => d.meta.test.clone(),
                "train" => d.meta.train.clone(),
                "all" => (0..d.len()).collect(),
                s => return Err(usage(format!("split must be test, train or all, got {s:?}"))),
            };
            let metrics = evaluate(&c.params, d, &idx).map_err(from_op)?;
            writeln!(
                out,
                "{} on {} (N {} -> {}): {}  max boundary residual {:e}",
                cp.display(),
                dp.display(),
                c.resolution,
                d.meta.spec.n,
                paired(metrics.rel_l2, metrics.boundary_l2),
                metrics.bc_residual
            )?;
            rows.push(EvalRow {
                checkpoint: cp.display().to_string(),
                data: dp.display().to_string(),
                train_resolution: c.resolution,
                test_resolution: d.meta.spec.n,
                metrics,
            });
        }
    }
    if rows.len() > 1 {
        writeln!(out, "\ntrain N \\ test N\t{}", loaded.iter().map(|d| d.meta.spec.n.to_string()).collect::<Vec<_>>().join("\t"))?;
        for chunk in rows.chunks(loaded.len()) {
            let cells: Vec<String> = chunk.iter().map(|r| paired(r.metrics.rel_l2, r.metrics.boundary_l2)).collect();
            writeln!(out, "{}\t{}", chunk[0].train_resolution, cells.join("\t"))?;
        }
    }
    if let Some(o) = cfg.path("out") {
        let text = serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n";
        write_file(&o, text.as_bytes())?;
    }
    Ok(rows)
}

/// Tolerance on the equality residuals reported by `bounds`.
pub const BOUND_EQUALITY_TOL: f64 = 1e-8;

pub fn cmd_bounds(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Vec<BoundStats>, HarnessError> {
    cfg.only(BOUNDS_KEYS)?;
    let trials = cfg.get("trials")?.unwrap_or(1000);
    let seed = cfg.get("seed")?.unwrap_or(0);
    if let Some(o) = cfg.path("out") {
        writable_target(&o)?;
    }
    let mut stats = Vec::new();
    writeln!(out, "family\ttrials\tmax rel residual\tviolations\tmax distance")?;
    for kind in [BcKind::Periodic, BcKind::Dirichlet, BcKind::Neumann] {
        let s = bound_trials(kind, trials, seed).map_err(|e| HarnessError::Failed(e.to_string()))?;
        writeln!(out, "{}\t{}\t{:e}\t{}\t{:e}", s.family, s.trials, s.max_rel_residual, s.violations, s.max_distance)?;
        stats.push(s);
    }
    if let Some(o) = cfg.path("out") {
        let text = serde_json::to_string_pretty(&json!({ "trials": trials, "seed": seed, "families": stats })).unwrap() + "\n";
        write_file(&o, text.as_bytes())?;
    }
    let eq_bad = stats.iter().take(2).any(|s| s.max_rel_residual > BOUND_EQUALITY_TOL);
    let ineq_bad = stats.iter().any(|s| s.violations > 0);
    if eq_bad || ineq_bad {
        return Err(HarnessError::Failed("a boundedness formula was violated".into()));
    }
    Ok(stats)
}

pub fn cmd_verify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<usize, HarnessError> {
    cfg.only(VERIFY_KEYS)?;
    run_verify(cfg.raw("filter"), cfg.flag("inject_fault")?, out)
}
