//! Mini-batch training, per-epoch metrics and evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{boundary_error, BoundarySpec};
use crate::grid::Field;
use crate::pde::{bc_residual_1d, Dataset};

use super::adam::{Adam, AdamState};
use super::model::{relative_l2, relative_l2_grad, Prepared};
use super::params::{Arch, OperatorParams};
use super::OperatorError;

/// Loss above which training stops.
pub const DIVERGENCE_LOSS: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub decay: f64,
    pub decay_every: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// 500 epochs from 1e-3, halved every 50 epochs in 1D and every 100
    /// otherwise.
    pub fn standard(space_dims: usize, multistep: bool) -> Self {
        let decay_every = if space_dims == 1 && !multistep { 50 } else { 100 };
        Self { epochs: 500, lr: 1e-3, decay: 0.5, decay_every, batch_size: 20, seed: 0 }
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr * self.decay.powi((epoch / self.decay_every.max(1)) as i32)
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if self.epochs == 0 || self.batch_size == 0 || self.decay_every == 0 {
            return Err(OperatorError::Config("epochs, batch size and decay interval must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite() && self.decay > 0.0 && self.decay <= 1.0) {
            return Err(OperatorError::Config("learning rate must be positive and decay in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_rel_l2: f64,
    pub test_rel_l2: f64,
    pub boundary_l2: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub rel_l2: f64,
    pub boundary_l2: f64,
    /// Largest violation of the prescribed boundary data by a prediction.
    pub bc_residual: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: OperatorParams,
    pub adam: AdamState,
    pub history: Vec<EpochMetrics>,
    /// Why training stopped early, if it did.
    pub stopped: Option<String>,
}

fn sample_bc(data: &Dataset, i: usize) -> Result<&BoundarySpec, OperatorError> {
    data.bc(i)
        .ok_or_else(|| OperatorError::Unsupported(format!("{} has no 1D boundary data", data.meta.spec.problem.name())))
}

fn check_data(arch: &Arch, data: &Dataset) -> Result<(), OperatorError> {
    if data.grid().dims() != 1 {
        return Err(OperatorError::Unsupported("training is implemented for 1D problems".into()));
    }
    if data.m() != arch.out_channels {
        return Err(OperatorError::Shape(format!("dataset has M = {}, model outputs {}", data.m(), arch.out_channels)));
    }
    if data.is_empty() {
        return Err(OperatorError::Config("empty dataset".into()));
    }
    sample_bc(data, 0)?;
    Ok(())
}

/// Relative L2, boundary L2 and boundary residual over `indices`.
pub fn evaluate(params: &OperatorParams, data: &Dataset, indices: &[usize]) -> Result<EvalMetrics, OperatorError> {
    check_data(&params.arch, data)?;
    let prep = Prepared::new(params, &data.grid())?;
    let preds: Vec<Field> = indices
        .par_iter()
        .map(|&i| prep.predict(data.input(i).values(), sample_bc(data, i)?))
        .collect::<Result<_, _>>()?;
    let targets: Vec<Field> = indices.iter().map(|&i| data.output(i)).collect();
    let mut rel = 0.0;
    let mut resid = 0.0f64;
    for ((p, t), &i) in preds.iter().zip(&targets).zip(indices) {
        rel += relative_l2(p.values(), t.values());
        resid = resid.max(bc_residual_1d(p, sample_bc(data, i)?));
    }
    let n = indices.len().max(1) as f64;
    let boundary_l2 = boundary_error(&preds, &targets, sample_bc(data, 0)?)?;
    Ok(EvalMetrics { rel_l2: rel / n, boundary_l2, bc_residual: resid, samples: indices.len() })
}

/// Trains from a fresh initialization seeded by `config.seed`.
///
/// Per-sample gradients are computed in parallel and summed in sample order,
/// so results do not depend on the number of threads.
pub fn train(arch: Arch, config: &TrainConfig, data: &Dataset) -> Result<TrainOutcome, OperatorError> {
    config.validate()?;
    check_data(&arch, data)?;
    let mut params = OperatorParams::init(arch, config.seed)?;
    let mut adam = AdamState::new(params.values.len());
    let opt = Adam::default();
    let grid = data.grid();
    let mut order = data.meta.train.clone();
    let mut history = Vec::with_capacity(config.epochs);
    let mut stopped = None;
    for epoch in 0..config.epochs {
        let lr = config.lr_at(epoch);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let prep = Prepared::new(&params, &grid)?;
            let grads = batch
                .par_iter()
                .map(|&i| {
                    let mut g = prep.zero_grad();
                    let (pred, trace) = prep.forward(data.input(i).values(), sample_bc(data, i)?)?;
                    let target = data.output(i);
                    prep.backward(&trace, &relative_l2_grad(&pred, target.values()), &mut g);
                    Ok(g)
                })
                .collect::<Result<Vec<_>, OperatorError>>()?;
            let mut total = prep.zero_grad();
            for g in &grads {
                total.add(g);
            }
            total.scale(1.0 / batch.len() as f64);
            let grad = prep.finish(total);
            drop(prep);
            opt.step(&mut params.values, &grad, &mut adam, lr);
        }
        if !params.is_finite() {
            stopped = Some(format!("non-finite parameters after epoch {epoch}"));
            break;
        }
        let tr = evaluate(&params, data, &data.meta.train)?;
        let te = if data.meta.test.is_empty() {
            EvalMetrics { rel_l2: 0.0, boundary_l2: 0.0, bc_residual: 0.0, samples: 0 }
        } else {
            evaluate(&params, data, &data.meta.test)?
        };
        history.push(EpochMetrics {
            epoch,
            train_rel_l2: tr.rel_l2,
            test_rel_l2: te.rel_l2,
            boundary_l2: te.boundary_l2,
            lr,
        });
        if !(tr.rel_l2 <= DIVERGENCE_LOSS) {
            stopped = Some(format!("training loss {} exceeded {DIVERGENCE_LOSS} at epoch {epoch}", tr.rel_l2));
            break;
        }
    }
    Ok(TrainOutcome { params, adam, history, stopped })
}
