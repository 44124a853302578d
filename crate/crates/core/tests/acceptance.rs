//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::alloc::{GlobalAlloc, Layout, System};
use std::path::Path;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use boonkit::boundary::{correct_dirichlet, correct_neumann, correct_periodic, correct_sides, fd_coefficients, BcKind, Edge, Rule};
use boonkit::harness::checks::{bound_trials, call_counts, oracle_equivalence};
use boonkit::operator::gradcheck::{check_wirings, gradient_check, random_bc};
use boonkit::operator::{evaluate, model_forward, train, Arch, OperatorParams, TrainConfig, Wiring};
use boonkit::pde::burgers::burgers_periodic_fd_solve;
use boonkit::pde::cavity::lid_cavity_solve;
use boonkit::pde::exact::residual_report;
use boonkit::pde::{bc_residual_1d, build_dataset, Problem, ProblemSpec};
use boonkit::{Field, Grid, SpectralKernel};

const ORACLE_TOL: f64 = 1e-10;
const ORACLE_SECONDS: f64 = 10.0;
const NEUMANN_EXACT_TOL: f64 = 1e-10;
const AUDIT_N: usize = 4096;
/// Peak live bytes allowed during one fast correction, in units of `N` f64s.
const AUDIT_VECTORS: usize = 64;
const BOUND_TOL: f64 = 1e-8;
const GRAD_TOL: f64 = 1e-5;
const GRAD_SECONDS: f64 = 300.0;
const PDE_RESIDUAL_TOL: f64 = 1e-4;
const OWN_BC_TOL: f64 = 1e-10;
const DIVERGENCE_TOL: f64 = 1e-8;
const TRANSFER_FACTOR: f64 = 5.0;
const TRANSFER_STENCIL_TOL: f64 = 1e-8;

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            let now = LIVE.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        LIVE.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

/// Peak bytes allocated on top of what was live before `f` ran.
fn peak_extra<T>(f: impl FnOnce() -> T) -> (T, usize) {
    let base = LIVE.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    let out = f();
    (out, PEAK.load(Ordering::SeqCst) - base)
}

type Outcome = Result<String, String>;

fn judge(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_oracle() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (i, kind) in [BcKind::Dirichlet, BcKind::Neumann, BcKind::Periodic].into_iter().enumerate() {
        let e = oracle_equivalence(kind, &[8, 16, 32, 64], 100, 100 + i as u64, false).map_err(|e| e.to_string())?;
        worst = worst.max(e);
    }
    let secs = t.elapsed().as_secs_f64();
    judge(
        worst <= ORACLE_TOL && secs < ORACLE_SECONDS,
        format!("3 kinds x 4 sizes x 100 instances, max relative difference {worst:e}, {secs:.2} s"),
    )
}

fn c2_exactness() -> Outcome {
    let grid = Grid::unit_1d(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut report = Vec::new();
    let mut ok = true;
    for wiring in check_wirings() {
        let mut worst = 0.0f64;
        for draw in 0..1000u64 {
            let arch = Arch {
                modes: 8,
                width: 4,
                layers: 4,
                out_channels: 2,
                mollifier: draw % 2 == 1,
                corrected: true,
                wiring,
            };
            let p = OperatorParams::init(arch, draw).unwrap();
            let phase = draw as f64 * 0.37;
            let u0 = Field::from_fn_1d(grid.clone(), |x| (5.0 * x + phase).sin() + 0.3 * phase.cos()).unwrap();
            let bc = random_bc(&wiring, 2, &mut rng);
            let out = model_forward(&p, &bc, &u0).map_err(|e| e.to_string())?;
            worst = worst.max(bc_residual_1d(&out, &bc));
        }
        let limit = if wiring.kind() == BcKind::Neumann { NEUMANN_EXACT_TOL } else { 0.0 };
        ok &= worst <= limit;
        report.push(format!("{wiring:?}: {worst:e}"));
    }
    judge(ok, format!("1000 draws per wiring, max boundary residual {}", report.join(", ")))
}

fn c3_complexity() -> Outcome {
    let counts = call_counts(64, 3).map_err(|e| e.to_string())?;
    let n = AUDIT_N;
    let grid = Grid::unit_1d(n).unwrap();
    let k = SpectralKernel::random(16, 1, 1, 9);
    let u0 = Field::from_fn_1d(grid.clone(), |x| (7.0 * x).cos() + x).unwrap();
    let s = fd_coefficients(2, grid.dx(0), Edge::Left).map_err(|e| e.to_string())?;
    let sr = fd_coefficients(2, grid.dx(0), Edge::Right).map_err(|e| e.to_string())?;
    let (lv, rv) = ([0.3], [0.1]);
    let mut peaks = Vec::new();
    let (r, b) = peak_extra(|| correct_dirichlet(&k, &u0, 0.5));
    r.map_err(|e| e.to_string())?;
    peaks.push(b);
    let (r, b) = peak_extra(|| correct_neumann(&k, &u0, 0.5, &s));
    r.map_err(|e| e.to_string())?;
    peaks.push(b);
    let (r, b) = peak_extra(|| correct_periodic(&k, &u0, 0.5, 0.5));
    r.map_err(|e| e.to_string())?;
    peaks.push(b);
    let (r, b) = peak_extra(|| correct_sides(&k, &u0, Some(Rule::Dirichlet(&lv)), Some(Rule::Neumann(&rv, &sr))));
    r.map_err(|e| e.to_string())?;
    peaks.push(b);
    // The allocator must notice an N x N buffer.
    let (_, dense) = peak_extra(|| vec![0.0f64; n * n].len());
    let limit = AUDIT_VECTORS * n * 8;
    let worst = *peaks.iter().max().unwrap();
    judge(
        counts == [3, 3, 1] && worst <= limit && dense >= n * n * 8,
        format!(
            "applies D/N/P = {counts:?}; peak extra bytes at N={n} (D, N, P, two-sided) = {peaks:?}, limit {limit}, an N x N buffer would be {}",
            n * n * 8
        ),
    )
}

fn c4_bounds() -> Outcome {
    let p = bound_trials(BcKind::Periodic, 1000, 41).map_err(|e| e.to_string())?;
    let d = bound_trials(BcKind::Dirichlet, 1000, 42).map_err(|e| e.to_string())?;
    let n = bound_trials(BcKind::Neumann, 1000, 43).map_err(|e| e.to_string())?;
    judge(
        p.max_rel_residual <= BOUND_TOL && d.max_rel_residual <= BOUND_TOL && n.violations == 0,
        format!(
            "periodic equality residual {:e}, dirichlet equality residual {:e}, neumann violations {} of {}",
            p.max_rel_residual, d.max_rel_residual, n.violations, n.trials
        ),
    )
}

fn c5_gradients() -> Outcome {
    let t = Instant::now();
    let mut worst = (String::new(), 0.0f64);
    for wiring in [
        Wiring::Dirichlet { side: boonkit::boundary::Side::Both },
        Wiring::Neumann { side: boonkit::boundary::Side::Both, order: 2 },
        Wiring::Periodic { alpha: 0.5, beta: 0.5 },
    ] {
        let arch = Arch { modes: 16, width: 8, layers: 4, out_channels: 1, mollifier: false, corrected: true, wiring };
        for g in gradient_check(arch, 32, 2, 5).map_err(|e| e.to_string())? {
            if g.rel_error > worst.1 {
                worst = (format!("{:?} {}", wiring.kind(), g.group), g.rel_error);
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    judge(
        worst.1 <= GRAD_TOL && secs < GRAD_SECONDS,
        format!("N=32, 16 modes, width 8, 3 wirings: worst group {} at {:e}, {secs:.1} s", worst.0, worst.1),
    )
}

fn c6_data() -> Outcome {
    let r = residual_report(40, 6).map_err(|e| e.to_string())?;
    let mut own = 0.0f64;
    for p in [Problem::StokesSecond, Problem::BurgersRiemann, Problem::BurgersPeriodic, Problem::Heat1D] {
        let mut s = ProblemSpec::standard(p, 64, false).with_size(12);
        s.seed = 6;
        let d = build_dataset(&s).map_err(|e| e.to_string())?;
        for i in 0..d.len() {
            own = own.max(d.bc_residual(i).unwrap_or(f64::INFINITY));
        }
    }
    let mut div = 0.0f64;
    for re in [10.0, 100.0] {
        let run = lid_cavity_solve(64, re, 1.0, 4, 0.2).map_err(|e| e.to_string())?;
        div = run.divergence.iter().fold(div, |m, d| m.max(*d));
    }
    let solve = |p: usize| {
        let g = Grid::unit_1d(p + 1).unwrap();
        let u0 = Field::from_fn_1d(g, |x| (2.0 * std::f64::consts::PI * x).sin() + 0.5).unwrap();
        burgers_periodic_fd_solve(&u0, 0.05, 1, 0.3, None).map(Field::into_values)
    };
    let (a, b, c) = (solve(32).map_err(|e| e.to_string())?, solve(64).map_err(|e| e.to_string())?, solve(128).map_err(|e| e.to_string())?);
    let diff = |coarse: &[f64], fine: &[f64]| {
        (coarse.iter().enumerate().map(|(i, v)| (v - fine[2 * i]).powi(2)).sum::<f64>() / coarse.len() as f64).sqrt()
    };
    let ratio = diff(&a, &b) / diff(&b, &c);
    judge(
        r.iter().all(|&v| v < PDE_RESIDUAL_TOL) && own <= OWN_BC_TOL && div < DIVERGENCE_TOL && ratio > 3.0,
        format!(
            "PDE residuals (stokes, burgers, heat, wave) {r:?}; own-BC residual {own:e}; cavity divergence at N=64 {div:e}; periodic Burgers refinement ratio {ratio:.2}"
        ),
    )
}

fn c7_training() -> Outcome {
    let t = Instant::now();
    let mut spec = ProblemSpec::standard(Problem::BurgersRiemann, 128, false).with_size(120);
    spec.nu = 0.1;
    spec.n_train = 100;
    let data = build_dataset(&spec).map_err(|e| e.to_string())?;
    let wiring = Wiring::from_spec(&spec.bc_template());
    let config = TrainConfig { epochs: 100, ..TrainConfig::standard(1, false) };
    let mut finals = Vec::new();
    let mut boon_bdy = 0.0f64;
    for corrected in [true, false] {
        let arch = Arch { corrected, ..Arch::standard(1, false, 1, wiring) };
        let out = train(arch, &config, &data).map_err(|e| e.to_string())?;
        if let Some(r) = out.stopped {
            return Err(format!("training stopped: {r}"));
        }
        if corrected {
            boon_bdy = out.history.iter().fold(0.0, |m, e| m.max(e.boundary_l2));
        }
        let last = out.history.last().unwrap();
        finals.push((last.test_rel_l2, last.boundary_l2));
    }
    let secs = t.elapsed().as_secs_f64();
    judge(
        boon_bdy == 0.0 && finals[0].0 <= finals[1].0,
        format!(
            "corrected {:e} ({:e}), baseline {:e} ({:e}); max corrected boundary L2 over epochs {boon_bdy:e}; {secs:.0} s",
            finals[0].0, finals[0].1, finals[1].0, finals[1].1
        ),
    )
}

fn c8_transfer() -> Outcome {
    let heat = |n: usize| {
        let mut s = ProblemSpec::standard(Problem::Heat1D, n, false).with_size(120);
        s.n_train = 100;
        s.seed = 8;
        build_dataset(&s)
    };
    let train_data = heat(64).map_err(|e| e.to_string())?;
    let wiring = Wiring::from_spec(&train_data.meta.spec.bc_template());
    let config = TrainConfig { epochs: 30, ..TrainConfig::standard(1, false) };
    let out = train(Arch::standard(1, false, 1, wiring), &config, &train_data).map_err(|e| e.to_string())?;
    let base = evaluate(&out.params, &train_data, &train_data.meta.test).map_err(|e| e.to_string())?;
    let mut ok = base.rel_l2.is_finite() && base.bc_residual <= TRANSFER_STENCIL_TOL;
    let mut report = vec![format!("N=64: {:e} (stencil residual {:e})", base.rel_l2, base.bc_residual)];
    for n in [128, 256] {
        let d = heat(n).map_err(|e| e.to_string())?;
        let m = evaluate(&out.params, &d, &d.meta.test).map_err(|e| e.to_string())?;
        ok &= m.rel_l2.is_finite() && m.rel_l2 < TRANSFER_FACTOR * base.rel_l2 && m.bc_residual <= TRANSFER_STENCIL_TOL;
        report.push(format!("N={n}: {:e} (stencil residual {:e})", m.rel_l2, m.bc_residual));
    }
    judge(ok, report.join("; "))
}

fn run_cli(args: &[&str], dir: &Path, threads: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_boonkit"))
        .args(args)
        .current_dir(dir)
        .env("BOONKIT_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("boonkit {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    for (tag, threads) in [("a", "1"), ("b", "2")] {
        let data = format!("data_{tag}.boondata");
        run_cli(&["datagen", "--problem=burgers_riemann", "--nu=0.1", "--resolution=64", "--n-data=30", "--seed=3", &format!("--out={data}")], d, threads)?;
        run_cli(&["train", &format!("--data={data}"), "--epochs=2", "--width=16", "--modes=8", "--seed=4", &format!("--out=run_{tag}")], d, threads)?;
    }
    let read = |p: &str| std::fs::read(d.join(p)).map_err(|e| format!("{p}: {e}"));
    let mut same = Vec::new();
    for (a, b) in [
        ("data_a.boondata", "data_b.boondata"),
        ("run_a/model.boonmodl", "run_b/model.boonmodl"),
        ("run_a/metrics.csv", "run_b/metrics.csv"),
        ("run_a/summary.json", "run_b/summary.json"),
    ] {
        same.push((a.rsplit('/').next().unwrap().to_string(), read(a)? == read(b)?));
    }
    judge(
        same.iter().all(|(_, s)| *s),
        format!("two runs (1 and 2 threads), byte-identical: {same:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("dense-oracle equivalence", c1_oracle),
        ("exact boundary satisfaction, untrained", c2_exactness),
        ("kernel-call counts and O(N) memory", c3_complexity),
        ("boundedness formulas", c4_bounds),
        ("gradient correctness", c5_gradients),
        ("data-generation fidelity", c6_data),
        ("desk-scale training ordering", c7_training),
        ("resolution transfer", c8_transfer),
        ("determinism", c9_determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("criterion {}: PASS  {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
