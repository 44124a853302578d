//! Dense corrected kernels built as explicit matrix products `T1 K T2`
//! (Dirichlet, Neumann) and `T K` (periodic).
//!
//! The scaling `beta` of the corrected boundary row depends on the input
//! through `u0[p]`. When `u0[p] = 0` the ratio is undefined, so that row
//! becomes zero and the prescribed value moves into an additive offset; the
//! result is then affine rather than linear, and still exact.

use crate::grid::Field;
use crate::kernel::DenseKernel;

use super::correct::{make_rule, Rule};
use super::spec::{check_weights, BoundarySpec, Side};
use super::stencil::{fd_coefficients, Edge};
use super::BoundaryError;

/// `x -> matrix x + offset`.
#[derive(Debug, Clone)]
pub struct AffineKernel {
    pub matrix: DenseKernel,
    pub offset: Vec<f64>,
}

impl AffineKernel {
    fn linear(matrix: DenseKernel) -> Self {
        let n = matrix.n();
        Self { matrix, offset: vec![0.0; n] }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.matrix.mul_vec(x);
        for (v, b) in y.iter_mut().zip(&self.offset) {
            *v += b;
        }
        y
    }
}

fn identity(n: usize) -> DenseKernel {
    DenseKernel::identity(n)
}

/// Dense corrected kernel for `spec` at time step `t`, for a single-channel `u0`.
pub fn dense_oracle(k: &DenseKernel, spec: &BoundarySpec, u0: &Field, t: usize) -> Result<AffineKernel, BoundaryError> {
    spec.validate()?;
    if u0.channels() != 1 || u0.grid().dims() != 1 {
        return Err(BoundaryError::Shape("dense oracle takes one 1D channel".into()));
    }
    if let BoundarySpec::Periodic { alpha, beta } = spec {
        return periodic_oracle(k, *alpha, *beta);
    }
    let (l, r) = spec.values_at(t);
    let dx = u0.grid().dx(0);
    let ls = spec.stencil(dx, Edge::Left).transpose()?;
    let rs = spec.stencil(dx, Edge::Right).transpose()?;
    let (lv, rv) = ([l.unwrap_or(0.0)], [r.unwrap_or(0.0)]);
    let side = spec.side();
    let left = make_rule(side.has_left().then_some(&lv), ls.as_ref());
    let right = make_rule(side.has_right().then_some(&rv), rs.as_ref());
    dense_oracle_sides(k, u0.values(), left, right)
}

/// Sequential construction: left transform on `K`, then the right transform
/// on the left-corrected kernel. Rules must carry a single target.
pub fn dense_oracle_sides(
    k: &DenseKernel,
    u0: &[f64],
    left: Option<Rule>,
    right: Option<Rule>,
) -> Result<AffineKernel, BoundaryError> {
    if u0.len() != k.n() {
        return Err(BoundaryError::Shape(format!("kernel {} vs input {}", k.n(), u0.len())));
    }
    let mut acc = AffineKernel::linear(k.clone());
    if let Some(r) = left {
        acc = side_transform(&acc, u0, Edge::Left, &r)?;
    }
    if let Some(r) = right {
        acc = side_transform(&acc, u0, Edge::Right, &r)?;
    }
    Ok(acc)
}

/// `T1 (A T2 x + b) + extra`, with `T1`, `T2` built from the current matrix `A`.
fn side_transform(acc: &AffineKernel, u0: &[f64], edge: Edge, rule: &Rule) -> Result<AffineKernel, BoundaryError> {
    let a = &acc.matrix;
    let n = a.n();
    let p = edge.pivot(n);
    let kpp = a.get(p, p);
    if kpp == 0.0 || !kpp.is_finite() {
        return Err(BoundaryError::ZeroPivot { index: p, channel: 0 });
    }
    // T2: eliminates the pivot row against the remaining columns.
    let mut t2 = identity(n);
    for j in (0..n).filter(|&j| j != p) {
        t2.set(p, j, -a.get(p, j) / kpp);
    }
    let (alpha, c0) = match rule {
        Rule::Dirichlet(t) => (t[0], 1.0),
        Rule::Neumann(t, s) => (t[0], s.c0()),
    };
    let mut extra = vec![0.0; n];
    let beta = if u0[p] != 0.0 {
        alpha / (c0 * u0[p])
    } else {
        extra[p] = alpha / c0;
        0.0
    };
    // T1: rescales the pivot row; Neumann also folds in the stencil.
    let mut t1 = identity(n);
    t1.set(p, p, beta / kpp);
    if let Rule::Neumann(_, s) = rule {
        for (kk, ck) in s.coeffs().iter().enumerate().skip(1) {
            t1.set(p, edge.inward(n, kk), -ck / c0);
        }
    }
    let matrix = t1.matmul(&a.matmul(&t2));
    let mut offset = t1.mul_vec(&acc.offset);
    for (o, e) in offset.iter_mut().zip(extra) {
        *o += e;
    }
    Ok(AffineKernel { matrix, offset })
}

/// `T K` where `T` replaces rows 0 and N-1 by `alpha e_0 + beta e_{N-1}`.
pub fn periodic_oracle(k: &DenseKernel, alpha: f64, beta: f64) -> Result<AffineKernel, BoundaryError> {
    check_weights(alpha, beta)?;
    let n = k.n();
    let mut t = identity(n);
    for row in [0, n - 1] {
        t.set(row, row, 0.0);
        t.set(row, 0, alpha);
        t.set(row, n - 1, beta);
    }
    Ok(AffineKernel::linear(t.matmul(k)))
}

/// Convenience for tests and the CLI: Dirichlet oracle on the left side.
pub fn dirichlet_oracle(k: &DenseKernel, u0: &[f64], alpha: f64) -> Result<AffineKernel, BoundaryError> {
    dense_oracle_sides(k, u0, Some(Rule::Dirichlet(&[alpha])), None)
}

/// Neumann oracle on the side selected by `side` with a standard stencil.
pub fn neumann_oracle(
    k: &DenseKernel,
    u0: &[f64],
    side: Side,
    alpha: f64,
    order: usize,
    dx: f64,
) -> Result<AffineKernel, BoundaryError> {
    let sl = fd_coefficients(order, dx, Edge::Left)?;
    let sr = fd_coefficients(order, dx, Edge::Right)?;
    let a = [alpha];
    let left = side.has_left().then(|| Rule::Neumann(&a, &sl));
    let right = side.has_right().then(|| Rule::Neumann(&a, &sr));
    dense_oracle_sides(k, u0, left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::correct::{correct_neumann, correct_periodic, correct_sides};
    use crate::boundary::correct_dirichlet;
    use crate::grid::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn input(n: usize, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::scalar(Grid::unit_1d(n).unwrap(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    #[test]
    fn dirichlet_row_structure() {
        let k = DenseKernel::random(8, 1);
        let u0 = input(8, 2);
        let o = dirichlet_oracle(&k, u0.values(), 0.7).unwrap();
        let beta = 0.7 / u0.values()[0];
        assert!((o.matrix.get(0, 0) - beta).abs() < 1e-12);
        assert!(o.matrix.row(0)[1..].iter().all(|v| v.abs() < 1e-12));
        // Rows below keep column 0 and subtract the rank-one update elsewhere.
        for i in 1..8 {
            assert!((o.matrix.get(i, 0) - k.get(i, 0)).abs() < 1e-12);
            for j in 1..8 {
                let want = k.get(i, j) - k.get(i, 0) * k.get(0, j) / k.get(0, 0);
                assert!((o.matrix.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_matches_fast_path() {
        let k = DenseKernel::random(8, 3);
        let u0 = input(8, 4);
        let fast = correct_dirichlet(&k, &u0, 0.7).unwrap();
        let dense = dirichlet_oracle(&k, u0.values(), 0.7).unwrap().apply_vec(u0.values());
        assert!(close(fast.values(), &dense, 1e-10));
        assert_eq!(fast.values()[0], 0.7);
    }

    #[test]
    fn division_free_when_boundary_input_is_zero() {
        let k = DenseKernel::random(8, 5);
        let mut u0 = input(8, 6);
        u0.values_mut()[0] = 0.0;
        let o = dirichlet_oracle(&k, u0.values(), 0.4).unwrap();
        assert!(o.matrix.row(0).iter().all(|v| v.abs() < 1e-15));
        let fast = correct_dirichlet(&k, &u0, 0.4).unwrap();
        assert!(close(fast.values(), &o.apply_vec(u0.values()), 1e-10));
    }

    #[test]
    fn neumann_matches_fast_path_and_row_condition() {
        let k = DenseKernel::random(8, 7);
        let u0 = input(8, 8);
        let dx = u0.grid().dx(0);
        let s = fd_coefficients(2, dx, Edge::Left).unwrap();
        let fast = correct_neumann(&k, &u0, 2.5, &s).unwrap();
        let o = neumann_oracle(&k, u0.values(), Side::Left, 2.5, 2, dx).unwrap();
        assert!(close(fast.values(), &o.apply_vec(u0.values()), 1e-10));
        let c = s.coeffs();
        for j in 0..8 {
            let mut rhs: f64 = -(1..c.len()).map(|kk| c[kk] / c[0] * o.matrix.get(kk, j)).sum::<f64>();
            if j == 0 {
                rhs += 2.5 / (c[0] * u0.values()[0]);
            }
            assert!((o.matrix.get(0, j) - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn two_sided_matches_fast_path() {
        for seed in 0..20 {
            let n = 8 + seed as usize;
            let k = DenseKernel::random(n, 100 + seed);
            let u0 = input(n, 200 + seed);
            let fast = correct_sides(&k, &u0, Some(Rule::Dirichlet(&[0.3])), Some(Rule::Dirichlet(&[-0.1]))).unwrap();
            let dense = dense_oracle_sides(&k, u0.values(), Some(Rule::Dirichlet(&[0.3])), Some(Rule::Dirichlet(&[-0.1])))
                .unwrap()
                .apply_vec(u0.values());
            assert!(close(fast.values(), &dense, 1e-10), "seed {seed}");
            let dx = u0.grid().dx(0);
            let o = neumann_oracle(&k, u0.values(), Side::Both, 1.5, 2, dx).unwrap();
            let sl = fd_coefficients(2, dx, Edge::Left).unwrap();
            let sr = fd_coefficients(2, dx, Edge::Right).unwrap();
            let fast = correct_sides(&k, &u0, Some(Rule::Neumann(&[1.5], &sl)), Some(Rule::Neumann(&[1.5], &sr))).unwrap();
            assert!(close(fast.values(), &o.apply_vec(u0.values()), 1e-10), "neumann seed {seed}");
        }
    }

    #[test]
    fn sides_do_not_commute() {
        // Right-then-left gives a different operator than left-then-right.
        let n = 10;
        let k = DenseKernel::random(n, 9);
        let u0 = input(n, 10);
        let lr = dense_oracle_sides(&k, u0.values(), Some(Rule::Dirichlet(&[0.2])), Some(Rule::Dirichlet(&[0.4]))).unwrap();
        let right_first = side_transform(
            &AffineKernel::linear(k.clone()),
            u0.values(),
            Edge::Right,
            &Rule::Dirichlet(&[0.4]),
        )
        .unwrap();
        let rl = side_transform(&right_first, u0.values(), Edge::Left, &Rule::Dirichlet(&[0.2])).unwrap();
        let a = lr.apply_vec(u0.values());
        let b = rl.apply_vec(u0.values());
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[n - 1] - b[n - 1]).abs() < 1e-12);
        assert!(a[1..n - 1].iter().zip(&b[1..n - 1]).any(|(x, y)| (x - y).abs() > 1e-8));
    }

    #[test]
    fn periodic_structure_and_fast_path() {
        let k = DenseKernel::random(8, 11);
        let u0 = input(8, 12);
        let o = periodic_oracle(&k, 0.3, 0.7).unwrap();
        for j in 0..8 {
            let want = 0.3 * k.get(0, j) + 0.7 * k.get(7, j);
            assert!((o.matrix.get(0, j) - want).abs() < 1e-15);
            assert_eq!(o.matrix.get(0, j), o.matrix.get(7, j));
        }
        for i in 1..7 {
            assert_eq!(o.matrix.row(i), k.row(i));
        }
        let fast = correct_periodic(&k, &u0, 0.3, 0.7).unwrap();
        assert!(close(fast.values(), &o.apply_vec(u0.values()), 1e-12));
    }
}
