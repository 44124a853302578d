//! Central finite-difference check of the analytic gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::{BoundarySpec, Side};
use crate::grid::Grid;

use super::model::{loss_and_grad, Prepared};
use super::params::{Arch, OperatorParams, Wiring};
use super::OperatorError;

/// Step used by [`gradient_check`].
pub const FD_STEP: f64 = 1e-6;

/// Worst error of one parameter group: `max |fd - analytic|` over the group
/// divided by `max |analytic|` over the group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupError {
    pub group: String,
    pub rel_error: f64,
    pub max_grad: f64,
}

/// Random boundary data for `wiring` with `m` time channels.
pub fn random_bc(wiring: &Wiring, m: usize, rng: &mut ChaCha8Rng) -> BoundarySpec {
    let mut vals = |on: bool| -> Vec<f64> { if on { (0..m).map(|_| rng.random_range(-1.0..1.0)).collect() } else { vec![] } };
    match *wiring {
        Wiring::Dirichlet { side } => {
            let (l, r) = (vals(side.has_left()), vals(side.has_right()));
            BoundarySpec::Dirichlet { side, left: l, right: r }
        }
        Wiring::Neumann { side, order } => {
            let (l, r) = (vals(side.has_left()), vals(side.has_right()));
            BoundarySpec::Neumann { side, left: l, right: r, order }
        }
        Wiring::Periodic { alpha, beta } => BoundarySpec::Periodic { alpha, beta },
    }
}

/// Parameters probed per group; larger groups are sampled at an even stride.
pub const FD_PER_GROUP: usize = 64;

/// Checks every parameter group of a randomly initialized model on `samples`
/// random input/target pairs at resolution `n`.
pub fn gradient_check(arch: Arch, n: usize, samples: usize, seed: u64) -> Result<Vec<GroupError>, OperatorError> {
    let grid = Grid::unit_1d(n).map_err(|e| OperatorError::Config(e.to_string()))?;
    let params = OperatorParams::init(arch.clone(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let m = arch.out_channels;
    let data: Vec<(Vec<f64>, Vec<f64>, BoundarySpec)> = (0..samples)
        .map(|_| {
            let u0 = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect();
            (u0, t, random_bc(&arch.wiring, m, &mut rng))
        })
        .collect();
    let view: Vec<(&[f64], &[f64], &BoundarySpec)> =
        data.iter().map(|(u, t, b)| (u.as_slice(), t.as_slice(), b)).collect();
    let loss = |p: &OperatorParams| -> Result<f64, OperatorError> {
        let prep = Prepared::new(p, &grid)?;
        let mut s = 0.0;
        for (u0, t, bc) in &view {
            let (pred, _) = prep.forward(u0, bc)?;
            s += super::model::relative_l2(&pred, t);
        }
        Ok(s / view.len() as f64)
    };
    let (_, grad) = loss_and_grad(&Prepared::new(&params, &grid)?, &view)?;
    let mut out = Vec::new();
    let mut probe = params.clone();
    for (group, range) in arch.groups() {
        let mut worst = 0.0f64;
        let scale = grad[range.clone()].iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let stride = range.len().div_ceil(FD_PER_GROUP).max(1);
        for i in range.step_by(stride) {
            let x = params.values[i];
            probe.values[i] = x + FD_STEP;
            let up = loss(&probe)?;
            probe.values[i] = x - FD_STEP;
            let down = loss(&probe)?;
            probe.values[i] = x;
            let fd = (up - down) / (2.0 * FD_STEP);
            worst = worst.max((fd - grad[i]).abs());
        }
        out.push(GroupError { group, rel_error: worst / scale.max(f64::MIN_POSITIVE), max_grad: scale });
    }
    Ok(out)
}

/// The wirings exercised by the gradient checks.
pub fn check_wirings() -> Vec<Wiring> {
    vec![
        Wiring::Dirichlet { side: Side::Left },
        Wiring::Dirichlet { side: Side::Both },
        Wiring::Neumann { side: Side::Both, order: 2 },
        Wiring::Periodic { alpha: 0.5, beta: 0.5 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_models_pass() {
        for (wiring, moll) in check_wirings().into_iter().zip([false, true, false, true]) {
            for corrected in [true, false] {
                let arch = Arch { modes: 4, width: 3, layers: 2, out_channels: 2, mollifier: moll, corrected, wiring };
                for g in gradient_check(arch, 12, 2, 1).unwrap() {
                    assert!(g.rel_error <= 1e-5, "{wiring:?} corrected={corrected} {g:?}");
                    assert!(g.max_grad > 0.0, "{g:?}");
                }
            }
        }
    }
}
