//! Full operator: lift, corrected spectral layers, projection, optional
//! mollifier, output boundary assignment.

use crate::boundary::BoundarySpec;
use crate::grid::{Field, Grid};

use super::correction::{self, Plan, Tape};
use super::layers::{gelu, gelu_grad, pointwise, pointwise_backward, Spectral};
use super::params::{Layout, OperatorParams, IN_CHANNELS};
use super::OperatorError;

/// Mollifier width.
pub const MOLLIFIER_TAU: f64 = 1e-3;

/// `exp(-tau / (x (1 - x)))` scaled to one at the midpoint; zero at the ends.
pub fn mollifier(xi: f64) -> f64 {
    let d = xi * (1.0 - xi);
    if d <= 0.0 {
        0.0
    } else {
        (4.0 * MOLLIFIER_TAU - MOLLIFIER_TAU / d).exp()
    }
}

/// Parameters unpacked for one resolution, with the pivot probes computed.
pub struct Prepared<'a> {
    pub params: &'a OperatorParams,
    grid: Grid,
    n: usize,
    layout: Layout,
    plan: Plan,
    kernels: Vec<Spectral>,
    probes: Vec<Vec<Vec<f64>>>,
    xi: Vec<f64>,
    window: Option<Vec<f64>>,
}

/// Intermediate values of one forward pass.
pub struct Trace {
    input: Vec<f64>,
    vs: Vec<Vec<f64>>,
    pres: Vec<Vec<f64>>,
    tapes: Vec<Tape>,
    hpre: Vec<f64>,
    h: Vec<f64>,
}

/// Gradient of one or more samples before the probe terms are folded in.
pub struct Grad {
    pub values: Vec<f64>,
    probes: Vec<Vec<Vec<f64>>>,
}

impl Grad {
    pub fn add(&mut self, other: &Grad) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        for (pa, pb) in self.probes.iter_mut().zip(&other.probes) {
            for (a, b) in pa.iter_mut().zip(pb) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
        self.probes.iter_mut().flatten().flatten().for_each(|v| *v *= s);
    }
}

fn check(v: &[f64], stage: impl FnOnce() -> String) -> Result<(), OperatorError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OperatorError::NonFinite(stage()))
    }
}

/// Boundary values per output channel.
pub(crate) fn targets(bc: &BoundarySpec, m: usize) -> Result<Vec<(Option<f64>, Option<f64>)>, OperatorError> {
    if let Some(steps) = bc.steps() {
        if steps != m {
            return Err(OperatorError::Config(format!("boundary data has {steps} steps, model outputs {m}")));
        }
    }
    Ok((0..m).map(|t| bc.values_at(t)).collect())
}

impl<'a> Prepared<'a> {
    pub fn new(params: &'a OperatorParams, grid: &Grid) -> Result<Self, OperatorError> {
        let arch = &params.arch;
        if grid.dims() != 1 {
            return Err(OperatorError::Unsupported("the operator is implemented for 1D grids".into()));
        }
        let n = grid.len();
        if n < 2 * arch.modes {
            return Err(OperatorError::Resolution { n, modes: arch.modes });
        }
        let layout = arch.layout();
        let plan = Plan::new(&arch.wiring, arch.corrected, n, grid.dx(0))?;
        let kernels: Vec<Spectral> = layout
            .layers
            .iter()
            .map(|s| Spectral::from_flat(&params.values[s.spectral.clone()], arch.modes, arch.width))
            .collect();
        let probes = kernels.iter().map(|k| plan.probes(k, n)).collect();
        let (lo, hi) = grid.extent(0);
        let xi: Vec<f64> = grid.coords(0).iter().map(|x| (x - lo) / (hi - lo)).collect();
        let window = arch.mollifier.then(|| xi.iter().map(|&x| mollifier(x)).collect());
        Ok(Self { params, grid: grid.clone(), n, layout, plan, kernels, probes, xi, window })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn forward(&self, u0: &[f64], bc: &BoundarySpec) -> Result<(Vec<f64>, Trace), OperatorError> {
        let arch = &self.params.arch;
        let (n, c, p) = (self.n, arch.width, &self.params.values);
        if u0.len() != n {
            return Err(OperatorError::Shape(format!("input has {} points, grid has {n}", u0.len())));
        }
        let tg = if arch.corrected { targets(bc, arch.out_channels)? } else { Vec::new() };
        if arch.corrected && !arch.wiring.matches(bc) {
            return Err(OperatorError::Config("boundary data does not match the model's wiring".into()));
        }
        let mut input = u0.to_vec();
        input.extend_from_slice(&self.xi);
        let l = &self.layout;
        let mut v = pointwise(&p[l.lift_w.clone()], &p[l.lift_b.clone()], IN_CHANNELS, c, &input, n);
        let mut vs = Vec::with_capacity(arch.layers + 1);
        let mut pres = Vec::with_capacity(arch.layers);
        let mut tapes = Vec::with_capacity(arch.layers);
        for (i, s) in l.layers.iter().enumerate() {
            let (mut pre, tape) = correction::forward(&self.kernels[i], &self.plan, &self.probes[i], &v, n)?;
            let lin = pointwise(&p[s.w.clone()], &p[s.b.clone()], c, c, &v, n);
            pre.iter_mut().zip(&lin).for_each(|(a, b)| *a += b);
            check(&pre, || format!("layer {i}"))?;
            let next = pre.iter().map(|&x| gelu(x)).collect();
            vs.push(std::mem::replace(&mut v, next));
            pres.push(pre);
            tapes.push(tape);
        }
        let hd = arch.hidden();
        let hpre = pointwise(&p[l.proj1_w.clone()], &p[l.proj1_b.clone()], c, hd, &v, n);
        vs.push(v);
        let h: Vec<f64> = hpre.iter().map(|&x| gelu(x)).collect();
        let mut out = pointwise(&p[l.proj2_w.clone()], &p[l.proj2_b.clone()], hd, arch.out_channels, &h, n);
        if let Some(win) = &self.window {
            for u in out.chunks_exact_mut(n) {
                u.iter_mut().zip(win).for_each(|(a, w)| *a *= w);
            }
        }
        correction::assign(&self.plan, &mut out, n, &tg);
        check(&out, || "projection".into())?;
        Ok((out, Trace { input, vs, pres, tapes, hpre, h }))
    }

    pub fn zero_grad(&self) -> Grad {
        Grad {
            values: vec![0.0; self.params.values.len()],
            probes: self.probes.iter().map(|ps| ps.iter().map(|p| vec![0.0; p.len()]).collect()).collect(),
        }
    }

    /// Accumulates the gradient of `<g_out, forward(u0)>` into `grad`.
    pub fn backward(&self, trace: &Trace, g_out: &[f64], grad: &mut Grad) {
        let arch = &self.params.arch;
        let (n, c, p, l) = (self.n, arch.width, &self.params.values, &self.layout);
        let hd = arch.hidden();
        let gv = &mut grad.values;
        let mut g = g_out.to_vec();
        correction::assign_backward(&self.plan, &mut g, n);
        if let Some(win) = &self.window {
            for u in g.chunks_exact_mut(n) {
                u.iter_mut().zip(win).for_each(|(a, w)| *a *= w);
            }
        }
        let (gw, gb) = split(gv, &l.proj2_w, &l.proj2_b);
        let mut gh = pointwise_backward(&p[l.proj2_w.clone()], hd, arch.out_channels, &trace.h, &g, n, gw, gb);
        gh.iter_mut().zip(&trace.hpre).for_each(|(a, x)| *a *= gelu_grad(*x));
        let (gw, gb) = split(gv, &l.proj1_w, &l.proj1_b);
        let mut gvl = pointwise_backward(&p[l.proj1_w.clone()], c, hd, &trace.vs[arch.layers], &gh, n, gw, gb);
        for (i, s) in l.layers.iter().enumerate().rev() {
            gvl.iter_mut().zip(&trace.pres[i]).for_each(|(a, x)| *a *= gelu_grad(*x));
            let v = &trace.vs[i];
            let (gw, gb) = split(gv, &s.w, &s.b);
            let mut gin = pointwise_backward(&p[s.w.clone()], c, c, v, &gvl, n, gw, gb);
            let gk = &mut gv[s.spectral.clone()];
            let gk_in = correction::backward(
                &self.kernels[i],
                &self.plan,
                &self.probes[i],
                v,
                &trace.tapes[i],
                &gvl,
                n,
                gk,
                &mut grad.probes[i],
            );
            gin.iter_mut().zip(&gk_in).for_each(|(a, b)| *a += b);
            gvl = gin;
        }
        let (gw, gb) = split(gv, &l.lift_w, &l.lift_b);
        pointwise_backward(&p[l.lift_w.clone()], IN_CHANNELS, c, &trace.input, &gvl, n, gw, gb);
    }

    /// Folds the probe gradients into the multiplier gradients.
    pub fn finish(&self, mut grad: Grad) -> Vec<f64> {
        let inputs = self.plan.probe_inputs(self.params.arch.width, self.n);
        for (i, s) in self.layout.layers.iter().enumerate() {
            for (e, gp) in inputs.iter().zip(&grad.probes[i]) {
                self.kernels[i].weight_grad(e, gp, self.n, &mut grad.values[s.spectral.clone()]);
            }
        }
        grad.values
    }

    /// Prediction as an `M`-channel field.
    pub fn predict(&self, u0: &[f64], bc: &BoundarySpec) -> Result<Field, OperatorError> {
        let (out, _) = self.forward(u0, bc)?;
        Ok(Field::from_parts(self.grid.clone(), self.params.arch.out_channels, out))
    }
}

fn split<'g>(
    g: &'g mut [f64],
    w: &std::ops::Range<usize>,
    b: &std::ops::Range<usize>,
) -> (&'g mut [f64], &'g mut [f64]) {
    debug_assert_eq!(w.end, b.start);
    let (lo, hi) = g[w.start..b.end].split_at_mut(w.len());
    (lo, hi)
}

/// One forward pass on a field.
pub fn model_forward(params: &OperatorParams, bc: &BoundarySpec, u0: &Field) -> Result<Field, OperatorError> {
    if u0.channels() != 1 {
        return Err(OperatorError::Shape(format!("expected one input channel, got {}", u0.channels())));
    }
    Prepared::new(params, u0.grid())?.predict(u0.values(), bc)
}

/// Guard for the relative error denominator.
pub const REL_EPS: f64 = 1e-12;

/// `||pred - target|| / max(||target||, 1e-12)` for one sample.
pub fn relative_l2(pred: &[f64], target: &[f64]) -> f64 {
    let d: f64 = pred.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let t: f64 = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    d / t.max(REL_EPS)
}

/// Batch-averaged relative L2 error.
pub fn relative_l2_loss(pred: &[Field], target: &[Field]) -> f64 {
    assert_eq!(pred.len(), target.len(), "batch sizes differ");
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter().zip(target).map(|(p, t)| relative_l2(p.values(), t.values())).sum::<f64>() / pred.len() as f64
}

/// Gradient of [`relative_l2`] with respect to `pred`; zero where the
/// difference vanishes.
pub fn relative_l2_grad(pred: &[f64], target: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = pred.iter().zip(target).map(|(a, b)| a - b).collect();
    let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let t = target.iter().map(|v| v * v).sum::<f64>().sqrt().max(REL_EPS);
    if dn == 0.0 {
        return vec![0.0; d.len()];
    }
    d.into_iter().map(|v| v / (dn * t)).collect()
}

/// Mean relative L2 loss over samples and its exact gradient.
pub fn loss_and_grad(
    prep: &Prepared,
    samples: &[(&[f64], &[f64], &BoundarySpec)],
) -> Result<(f64, Vec<f64>), OperatorError> {
    let mut total = prep.zero_grad();
    let mut loss = 0.0;
    for (u0, target, bc) in samples {
        let (pred, trace) = prep.forward(u0, bc)?;
        loss += relative_l2(&pred, target);
        prep.backward(&trace, &relative_l2_grad(&pred, target), &mut total);
    }
    let s = 1.0 / samples.len().max(1) as f64;
    total.scale(s);
    Ok((loss * s, prep.finish(total)))
}
