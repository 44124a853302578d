//! The `verify` suite: every property check, stopping at the first failure.

use std::io::Write;

use serde_json::json;

use crate::boundary::{BcKind, Side};
use crate::grid::{Field, Grid};
use crate::operator::gradcheck::{check_wirings, gradient_check, random_bc};
use crate::operator::{model_forward, Arch, OperatorParams, Wiring};
use crate::pde::cavity::Cavity;
use crate::pde::exact::residual_report;
use crate::pde::{build_dataset, Problem, ProblemSpec};

use super::checks::{bound_trials, call_counts, oracle_equivalence};
use super::HarnessError;

type Check = fn(bool) -> Result<String, String>;

/// Suite names in run order.
pub fn suites() -> Vec<(&'static str, Check)> {
    vec![
        ("dirichlet_oracle_equivalence", |f| oracle(BcKind::Dirichlet, f)),
        ("neumann_oracle_equivalence", |f| oracle(BcKind::Neumann, f)),
        ("periodic_oracle_equivalence", |f| oracle(BcKind::Periodic, f)),
        ("kernel_call_counts", |_| counts()),
        ("periodic_bound_equality", |_| bound(BcKind::Periodic)),
        ("dirichlet_bound_equality", |_| bound(BcKind::Dirichlet)),
        ("neumann_bound_inequality", |_| bound(BcKind::Neumann)),
        ("gradients_dirichlet", |_| gradients(BcKind::Dirichlet)),
        ("gradients_neumann", |_| gradients(BcKind::Neumann)),
        ("gradients_periodic", |_| gradients(BcKind::Periodic)),
        ("model_boundary_exactness_dirichlet", |_| exactness(BcKind::Dirichlet)),
        ("model_boundary_exactness_neumann", |_| exactness(BcKind::Neumann)),
        ("model_boundary_exactness_periodic", |_| exactness(BcKind::Periodic)),
        ("exact_solution_residuals", |_| residuals()),
        ("dataset_boundary_conditions", |_| datasets()),
        ("cavity_divergence", |_| cavity()),
    ]
}

fn oracle(kind: BcKind, fault: bool) -> Result<String, String> {
    let err = oracle_equivalence(kind, &[8, 16, 32, 64], 25, 11, fault).map_err(|e| e.to_string())?;
    let detail = format!("max relative difference {err:e} (tolerance 1e-10)");
    if err <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn counts() -> Result<String, String> {
    let c = call_counts(64, 3).map_err(|e| e.to_string())?;
    let detail = format!("dirichlet {}, neumann {}, periodic {} applies", c[0], c[1], c[2]);
    if c == [3, 3, 1] {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bound(kind: BcKind) -> Result<String, String> {
    let s = bound_trials(kind, 300, 5).map_err(|e| e.to_string())?;
    let detail = format!("{} trials, max relative residual {:e}, violations {}", s.trials, s.max_rel_residual, s.violations);
    let ok = match kind {
        BcKind::Neumann => s.violations == 0,
        _ => s.max_rel_residual <= 1e-8,
    };
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn wiring(kind: BcKind) -> Wiring {
    check_wirings().into_iter().find(|w| w.kind() == kind && !matches!(w, Wiring::Dirichlet { side: Side::Left })).unwrap()
}

fn gradients(kind: BcKind) -> Result<String, String> {
    let arch = Arch { modes: 8, width: 4, layers: 4, out_channels: 2, mollifier: false, corrected: true, wiring: wiring(kind) };
    let groups = gradient_check(arch, 32, 2, 7).map_err(|e| e.to_string())?;
    let worst = groups.iter().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error)).unwrap();
    let detail = format!("{} groups, worst {} at {:e} (tolerance 1e-5)", groups.len(), worst.group, worst.rel_error);
    if worst.rel_error <= 1e-5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exactness(kind: BcKind) -> Result<String, String> {
    use rand::SeedableRng;
    let w = wiring(kind);
    let grid = Grid::unit_1d(32).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for draw in 0..25 {
        let arch = Arch { modes: 8, width: 4, layers: 4, out_channels: 3, mollifier: draw % 2 == 0, corrected: true, wiring: w };
        let p = OperatorParams::init(arch, draw).map_err(|e| e.to_string())?;
        let u0 = Field::from_fn_1d(grid.clone(), |x| (3.0 * x + draw as f64).sin()).unwrap();
        let bc = random_bc(&w, 3, &mut rng);
        let out = model_forward(&p, &bc, &u0).map_err(|e| e.to_string())?;
        worst = worst.max(crate::pde::bc_residual_1d(&out, &bc));
    }
    let limit = if kind == BcKind::Neumann { 1e-10 } else { 0.0 };
    let detail = format!("25 random draws, max boundary residual {worst:e} (limit {limit:e})");
    if worst <= limit {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn residuals() -> Result<String, String> {
    let r = residual_report(40, 2).map_err(|e| e.to_string())?;
    let detail = format!("stokes {:e}, burgers {:e}, heat {:e}, wave {:e} (tolerance 1e-4)", r[0], r[1], r[2], r[3]);
    if r.iter().all(|&v| v < 1e-4) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn datasets() -> Result<String, String> {
    let mut worst = 0.0f64;
    for p in [Problem::StokesSecond, Problem::BurgersRiemann, Problem::BurgersPeriodic] {
        let d = build_dataset(&ProblemSpec::standard(p, 64, false).with_size(6)).map_err(|e| e.to_string())?;
        for i in 0..d.len() {
            worst = worst.max(d.bc_residual(i).unwrap_or(0.0));
        }
    }
    let detail = format!("max sample boundary residual {worst:e} (tolerance 1e-10)");
    if worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cavity() -> Result<String, String> {
    let n = 33;
    let mut c = Cavity::new(n, 100.0, 1.0).map_err(|e| e.to_string())?;
    let dt = 0.2 / (n - 1) as f64;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        worst = worst.max(c.step(dt).map_err(|e| e.to_string())?);
    }
    let detail = format!("max divergence over 20 steps {worst:e} (tolerance 1e-8)");
    if worst < 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Runs the suites whose names contain `filter`. Writes one JSON object per
/// suite. Returns the number of suites run, or [`HarnessError::Failed`] at the
/// first failure.
pub fn run_verify(filter: Option<&str>, inject_fault: bool, out: &mut dyn Write) -> Result<usize, HarnessError> {
    let selected: Vec<_> = suites().into_iter().filter(|(n, _)| filter.is_none_or(|f| n.contains(f))).collect();
    if selected.is_empty() {
        return Err(HarnessError::Usage(format!("no suite matches {:?}", filter.unwrap_or(""))));
    }
    for (name, check) in &selected {
        let result = check(inject_fault);
        let passed = result.is_ok();
        let detail = result.unwrap_or_else(|e| e);
        writeln!(out, "{}", json!({ "suite": name, "passed": passed, "detail": detail }))?;
        if !passed {
            return Err(HarnessError::Failed(format!("{name}: {detail}")));
        }
    }
    Ok(selected.len())
}
