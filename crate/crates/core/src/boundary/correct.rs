//! Fast-path corrections that use the kernel only through `apply`.
//!
//! One-sided Dirichlet and Neumann corrections cost three applies: the pivot
//! probe `K e_p`, `K u0`, and `K` of the eliminated input. Two-sided ones cost
//! four (one probe per side). Periodic costs one. Auxiliary memory is a
//! handful of fields the size of the input.
//!
//! With several channels every channel gets its own pivot `K(E_p)[c, p]`,
//! where `E_p` holds a one at the pivot in every channel. For one channel this
//! is exactly the scalar elimination.

use crate::grid::Field;
use crate::kernel::KernelModule;

use super::spec::{check_weights, BoundarySpec, Side};
use super::stencil::{Edge, FdStencil};
use super::BoundaryError;

/// What to enforce at one boundary point. Targets have one entry per channel,
/// or a single entry shared by all channels.
#[derive(Debug, Clone, Copy)]
pub enum Rule<'a> {
    Dirichlet(&'a [f64]),
    Neumann(&'a [f64], &'a FdStencil),
}

impl Rule<'_> {
    fn targets(&self) -> &[f64] {
        match self {
            Rule::Dirichlet(t) | Rule::Neumann(t, _) => t,
        }
    }
}

fn target(t: &[f64], c: usize) -> f64 {
    if t.len() == 1 {
        t[0]
    } else {
        t[c]
    }
}

/// Left Dirichlet correction: `out[0] = alpha` exactly.
pub fn correct_dirichlet(k: &dyn KernelModule, u0: &Field, alpha: f64) -> Result<Field, BoundaryError> {
    correct_sides(k, u0, Some(Rule::Dirichlet(&[alpha])), None)
}

/// One-sided Neumann correction on the stencil's edge.
pub fn correct_neumann(
    k: &dyn KernelModule,
    u0: &Field,
    alpha: f64,
    stencil: &FdStencil,
) -> Result<Field, BoundaryError> {
    let rule = Some(Rule::Neumann(std::slice::from_ref(&alpha), stencil));
    match stencil.edge() {
        Edge::Left => correct_sides(k, u0, rule, None),
        Edge::Right => correct_sides(k, u0, None, rule),
    }
}

/// Periodic correction: `out[0] = out[N-1] = alpha y[0] + beta y[N-1]`, `y = K u0`.
pub fn correct_periodic(k: &dyn KernelModule, u0: &Field, alpha: f64, beta: f64) -> Result<Field, BoundaryError> {
    check_weights(alpha, beta)?;
    check_input(u0)?;
    let mut out = k.apply(u0)?;
    periodic_edit(&mut out, alpha, beta);
    Ok(out)
}

pub(crate) fn periodic_edit(out: &mut Field, alpha: f64, beta: f64) {
    let n = out.points();
    for c in 0..out.channels() {
        let ch = out.channel_mut(c);
        let v = alpha * ch[0] + beta * ch[n - 1];
        ch[0] = v;
        ch[n - 1] = v;
    }
}

/// Applies `spec` using its data at time step `t`, with Neumann stencils
/// built for the field's grid spacing.
pub fn correct(k: &dyn KernelModule, u0: &Field, spec: &BoundarySpec, t: usize) -> Result<Field, BoundaryError> {
    spec.validate()?;
    if let BoundarySpec::Periodic { alpha, beta } = spec {
        return correct_periodic(k, u0, *alpha, *beta);
    }
    check_input(u0)?;
    let (l, r) = spec.values_at(t);
    let (lv, rv) = (l.map(|v| [v]), r.map(|v| [v]));
    let dx = u0.grid().dx(0);
    let ls = spec.stencil(dx, Edge::Left).transpose()?;
    let rs = spec.stencil(dx, Edge::Right).transpose()?;
    let (lr, rr) = (make_rule(lv.as_ref(), ls.as_ref()), make_rule(rv.as_ref(), rs.as_ref()));
    match spec.side() {
        Side::Left => correct_sides(k, u0, lr, None),
        Side::Right => correct_sides(k, u0, None, rr),
        Side::Both => correct_sides(k, u0, lr, rr),
    }
}

pub(crate) fn make_rule<'a>(v: Option<&'a [f64; 1]>, s: Option<&'a FdStencil>) -> Option<Rule<'a>> {
    v.map(|v| match s {
        Some(s) => Rule::Neumann(&v[..], s),
        None => Rule::Dirichlet(&v[..]),
    })
}

fn check_input(u0: &Field) -> Result<(), BoundaryError> {
    if u0.grid().dims() != 1 {
        return Err(BoundaryError::NotOneDimensional);
    }
    if !u0.is_finite() {
        return Err(BoundaryError::NonFinite);
    }
    Ok(())
}

fn check_rule(rule: &Rule, edge: Edge, n: usize, channels: usize, both: bool) -> Result<(), BoundaryError> {
    let t = rule.targets();
    if t.len() != 1 && t.len() != channels {
        return Err(BoundaryError::BadValues(format!("{} targets for {channels} channels", t.len())));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(BoundaryError::BadValues("non-finite target".into()));
    }
    if let Rule::Neumann(_, s) = rule {
        if s.edge() != edge {
            return Err(BoundaryError::StencilSide);
        }
        // With both sides constrained a stencil must not reach the opposite boundary.
        let limit = if both { n - 1 } else { n };
        if s.len() > limit {
            return Err(BoundaryError::StencilTooLong { len: s.len(), n });
        }
    }
    Ok(())
}

fn pivot_value(probe: &Field, c: usize, p: usize) -> Result<f64, BoundaryError> {
    let v = probe.channel(c)[p];
    if v == 0.0 || !v.is_finite() {
        return Err(BoundaryError::ZeroPivot { index: p, channel: c });
    }
    Ok(v)
}

/// Writes the boundary row for `rule` at `edge` into `out`.
pub(crate) fn edit(out: &mut Field, edge: Edge, rule: &Rule) {
    let n = out.points();
    let p = edge.pivot(n);
    for c in 0..out.channels() {
        let ch = out.channel_mut(c);
        match rule {
            Rule::Dirichlet(t) => ch[p] = target(t, c),
            Rule::Neumann(t, s) => ch[p] = s.solve_pivot(ch, target(t, c)),
        }
    }
}

/// Dirichlet or Neumann correction on the left, the right, or both ends.
///
/// With both ends the result is the left construction followed by the right
/// one built on the left-corrected kernel. The two orders give different
/// operators in general; this one is the reference order.
pub fn correct_sides(
    k: &dyn KernelModule,
    u0: &Field,
    left: Option<Rule>,
    right: Option<Rule>,
) -> Result<Field, BoundaryError> {
    check_input(u0)?;
    let n = u0.points();
    let ch = u0.channels();
    let both = left.is_some() && right.is_some();
    if let Some(r) = &left {
        check_rule(r, Edge::Left, n, ch, both)?;
    }
    if let Some(r) = &right {
        check_rule(r, Edge::Right, n, ch, both)?;
    }
    let grid = u0.grid().clone();
    let mut w = u0.clone();
    match (&left, &right) {
        (None, None) => return Ok(k.apply(u0)?),
        (Some(_), None) | (None, Some(_)) => {
            let edge = if left.is_some() { Edge::Left } else { Edge::Right };
            let p = edge.pivot(n);
            let probe = k.apply(&Field::impulse(grid, ch, p))?;
            let z = k.apply(u0)?;
            for c in 0..ch {
                let kpp = pivot_value(&probe, c, p)?;
                let v = u0.channel(c)[p];
                w.channel_mut(c)[p] = 2.0 * v - z.channel(c)[p] / kpp;
            }
        }
        (Some(_), Some(_)) => {
            let last = n - 1;
            let pl = k.apply(&Field::impulse(grid.clone(), ch, 0))?;
            let pr = k.apply(&Field::impulse(grid, ch, last))?;
            let z = k.apply(u0)?;
            for c in 0..ch {
                let (c0, cn, zc, vc) = (pl.channel(c), pr.channel(c), z.channel(c), u0.channel(c));
                let a = pivot_value(&pl, c, 0)?;
                let s1 = vc[0] - zc[0] / a;
                let y1n = zc[last] + s1 * c0[last];
                let k1 = cn[last] - c0[last] * cn[0] / a;
                if k1 == 0.0 || !k1.is_finite() {
                    return Err(BoundaryError::ZeroPivot { index: last, channel: c });
                }
                let y2n = 2.0 * vc[last] - y1n / k1;
                let s2 = y2n - vc[last];
                let ky2_0 = zc[0] + s2 * cn[0];
                let w0 = 2.0 * vc[0] - ky2_0 / a;
                let wc = w.channel_mut(c);
                wc[0] = w0;
                wc[last] = y2n;
            }
        }
    }
    let mut out = k.apply(&w)?;
    if let Some(r) = &left {
        edit(&mut out, Edge::Left, r);
    }
    if let Some(r) = &right {
        edit(&mut out, Edge::Right, r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::stencil::fd_coefficients;
    use crate::grid::Grid;
    use crate::kernel::{DenseKernel, SpectralKernel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(n: usize, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::scalar(Grid::unit_1d(n).unwrap(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn identity_kernel_passes_through() {
        let u0 = field(8, 1);
        let a0 = u0.values()[0];
        let out = correct_dirichlet(&DenseKernel::identity(8), &u0, a0).unwrap();
        assert_eq!(out.values(), u0.values());
        let out = correct_dirichlet(&DenseKernel::identity(8), &u0, 0.25).unwrap();
        assert_eq!(out.values()[0], 0.25);
        assert_eq!(&out.values()[1..], &u0.values()[1..]);
    }

    #[test]
    fn call_counts() {
        let u0 = field(16, 2);
        let k = DenseKernel::random(16, 3);
        correct_dirichlet(&k, &u0, 0.7).unwrap();
        assert_eq!(k.calls(), 3);
        let s = fd_coefficients(2, u0.grid().dx(0), Edge::Left).unwrap();
        correct_neumann(&k, &u0, 1.0, &s).unwrap();
        assert_eq!(k.calls(), 6);
        correct_periodic(&k, &u0, 0.5, 0.5).unwrap();
        assert_eq!(k.calls(), 7);
        correct_sides(&k, &u0, Some(Rule::Dirichlet(&[0.0])), Some(Rule::Dirichlet(&[1.0]))).unwrap();
        assert_eq!(k.calls(), 11);
    }

    #[test]
    fn neumann_stencil_holds_on_both_sides() {
        let u0 = field(12, 4);
        let k = DenseKernel::random(12, 5);
        let dx = u0.grid().dx(0);
        let sl = fd_coefficients(2, dx, Edge::Left).unwrap();
        let sr = fd_coefficients(1, dx, Edge::Right).unwrap();
        let out = correct_sides(&k, &u0, Some(Rule::Neumann(&[0.3], &sl)), Some(Rule::Neumann(&[-2.0], &sr))).unwrap();
        assert!((sl.apply(out.values()) - 0.3).abs() < 1e-10);
        assert!((sr.apply(out.values()) + 2.0).abs() < 1e-10);
    }

    #[test]
    fn multichannel_spectral_targets_are_exact() {
        let grid = Grid::unit_1d(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u0 = Field::new(grid, 3, (0..96).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let k = SpectralKernel::random(8, 3, 3, 7);
        let t = [0.1, -0.2, 0.3];
        let out = correct_sides(&k, &u0, Some(Rule::Dirichlet(&t)), Some(Rule::Dirichlet(&[5.0]))).unwrap();
        for c in 0..3 {
            assert_eq!(out.channel(c)[0], t[c]);
            assert_eq!(out.channel(c)[31], 5.0);
        }
        let out = correct_periodic(&k, &u0, 0.3, 0.7).unwrap();
        for c in 0..3 {
            assert_eq!(out.channel(c)[0], out.channel(c)[31]);
        }
    }

    #[test]
    fn errors() {
        let u0 = field(8, 0);
        let k = DenseKernel::random(8, 0);
        assert!(matches!(correct_periodic(&k, &u0, 0.5, 0.6), Err(BoundaryError::BadWeights { .. })));
        let mut z = DenseKernel::random(8, 1);
        z.set(0, 0, 0.0);
        assert_eq!(correct_dirichlet(&z, &u0, 1.0), Err(BoundaryError::ZeroPivot { index: 0, channel: 0 }));
        assert!(matches!(correct_dirichlet(&DenseKernel::identity(6), &u0, 1.0), Err(BoundaryError::Kernel(_))));
        let right = fd_coefficients(1, 0.1, Edge::Right).unwrap();
        assert_eq!(
            correct_sides(&k, &u0, Some(Rule::Neumann(&[0.0], &right)), None),
            Err(BoundaryError::StencilSide)
        );
    }
}
