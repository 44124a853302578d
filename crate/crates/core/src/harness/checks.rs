//! Randomized property checks shared by `verify`, `bounds` and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{
    bound_dirichlet, bound_neumann, bound_periodic, correct, correct_dirichlet, correct_neumann, correct_periodic,
    dense_oracle, fd_coefficients, BcKind, BoundaryError, BoundarySpec, Edge, Side,
};
use crate::grid::{Field, Grid};
use crate::kernel::{DenseKernel, KernelModule};

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Random instance `i` of a boundary kind: sides and stencil orders cycle,
/// and every fifth instance has a zero input at the pivot.
fn instance(kind: BcKind, i: usize, n: usize, rng: &mut ChaCha8Rng) -> (BoundarySpec, Vec<f64>) {
    let side = [Side::Left, Side::Right, Side::Both][i % 3];
    let mut u0 = random_vec(n, rng);
    if i % 5 == 4 {
        for e in side.edges() {
            u0[e.pivot(n)] = 0.0;
        }
    }
    let val = |on: bool, rng: &mut ChaCha8Rng| if on { vec![rng.random_range(-2.0..2.0)] } else { vec![] };
    let (l, r) = (val(side.has_left(), rng), val(side.has_right(), rng));
    let spec = match kind {
        BcKind::Dirichlet => BoundarySpec::Dirichlet { side, left: l, right: r },
        BcKind::Neumann => BoundarySpec::Neumann { side, left: l, right: r, order: 1 + i % 2 },
        BcKind::Periodic => {
            let a = rng.random_range(0.05..0.95);
            BoundarySpec::Periodic { alpha: a, beta: 1.0 - a }
        }
    };
    (spec, u0)
}

/// Largest relative difference between the fast correction and the dense
/// corrected kernel over `trials` instances at each size. With `flip_row`
/// the first row of the dense left transform is negated, which must make
/// the comparison fail.
pub fn oracle_equivalence(
    kind: BcKind,
    sizes: &[usize],
    trials: usize,
    seed: u64,
    flip_row: bool,
) -> Result<f64, BoundaryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for &n in sizes {
        let grid = Grid::unit_1d(n).map_err(|e| BoundaryError::Shape(e.to_string()))?;
        for i in 0..trials {
            let k = DenseKernel::random(n, rng.random());
            let (spec, u0) = instance(kind, i, n, &mut rng);
            let u0 = Field::scalar(grid.clone(), u0).map_err(|e| BoundaryError::Shape(e.to_string()))?;
            let fast = correct(&k, &u0, &spec, 0)?;
            let mut oracle = dense_oracle(&k, &spec, &u0, 0)?;
            if flip_row && spec.side().has_left() && kind != BcKind::Periodic {
                for j in 0..n {
                    let v = oracle.matrix.get(0, j);
                    oracle.matrix.set(0, j, -v);
                }
                oracle.offset[0] = -oracle.offset[0];
            }
            let want = oracle.apply_vec(u0.values());
            let diff = norm(fast.values().iter().zip(&want).map(|(a, b)| a - b));
            worst = worst.max(diff / norm(want.iter().copied()).max(1.0));
        }
    }
    Ok(worst)
}

/// Kernel applies used by one correction of each kind.
pub fn call_counts(n: usize, seed: u64) -> Result<[u64; 3], BoundaryError> {
    let grid = Grid::unit_1d(n).map_err(|e| BoundaryError::Shape(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = Field::scalar(grid.clone(), random_vec(n, &mut rng)).map_err(|e| BoundaryError::Shape(e.to_string()))?;
    let k = DenseKernel::random(n, seed);
    correct_dirichlet(&k, &u0, 0.5)?;
    let d = k.calls();
    let s = fd_coefficients(2, grid.dx(0), Edge::Left)?;
    correct_neumann(&k, &u0, 0.5, &s)?;
    let nn = k.calls() - d;
    correct_periodic(&k, &u0, 0.5, 0.5)?;
    let p = k.calls() - d - nn;
    Ok([d, nn, p])
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundStats {
    pub family: &'static str,
    pub trials: usize,
    /// `max |bound - distance| / max(distance, 1)`.
    pub max_rel_residual: f64,
    /// Trials with `distance > bound (1 + 1e-10) + 1e-12`.
    pub violations: usize,
    pub max_distance: f64,
}

/// Compares each closed form with the directly computed `||K u0 - u~||`.
pub fn bound_trials(kind: BcKind, trials: usize, seed: u64) -> Result<BoundStats, BoundaryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = BoundStats {
        family: match kind {
            BcKind::Periodic => "periodic",
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
        },
        trials,
        max_rel_residual: 0.0,
        violations: 0,
        max_distance: 0.0,
    };
    for i in 0..trials {
        let n = [8, 16, 32, 64][i % 4];
        let grid = Grid::unit_1d(n).map_err(|e| BoundaryError::Shape(e.to_string()))?;
        let k = DenseKernel::random(n, rng.random());
        let u0 = Field::scalar(grid.clone(), random_vec(n, &mut rng)).map_err(|e| BoundaryError::Shape(e.to_string()))?;
        let u = k.mul_vec(u0.values());
        let alpha = rng.random_range(-2.0..2.0);
        let (bound, corrected) = match kind {
            BcKind::Periodic => {
                let a = rng.random_range(0.0..1.0);
                (bound_periodic(&u, a, 1.0 - a)?, correct_periodic(&k, &u0, a, 1.0 - a)?)
            }
            BcKind::Dirichlet => (bound_dirichlet(&k, u0.values(), alpha)?, correct_dirichlet(&k, &u0, alpha)?),
            BcKind::Neumann => {
                let edge = if i % 2 == 0 { Edge::Left } else { Edge::Right };
                let s = fd_coefficients(1 + (i / 2) % 2, grid.dx(0), edge)?;
                (bound_neumann(&k, u0.values(), alpha, &s)?, correct_neumann(&k, &u0, alpha, &s)?)
            }
        };
        let dist = norm(u.iter().zip(corrected.values()).map(|(a, b)| a - b));
        stats.max_distance = stats.max_distance.max(dist);
        stats.max_rel_residual = stats.max_rel_residual.max((bound - dist).abs() / dist.max(1.0));
        if dist > bound * (1.0 + 1e-10) + 1e-12 {
            stats.violations += 1;
        }
    }
    Ok(stats)
}
