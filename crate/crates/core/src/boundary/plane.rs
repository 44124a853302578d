//! Corrections on 2D grids: one kernel apply, then row edits face by face in
//! the fixed order `X0, X1, Y0, Y1`.
//!
//! Each face is a set of boundary lines; the edit on a line is the 1D
//! boundary assignment. Corner points belong to two faces and keep whatever
//! the later face (a `Y` face) writes. A face with [`FaceRule::Free`] is left
//! exactly as `K u0` produced it.

use crate::grid::Field;
use crate::kernel::KernelModule;

use super::spec::check_weights;
use super::stencil::{fd_coefficients, Edge, FdStencil};
use super::BoundaryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    X0,
    X1,
    Y0,
    Y1,
}

impl Face {
    pub const ORDER: [Face; 4] = [Face::X0, Face::X1, Face::Y0, Face::Y1];

    fn axis(self) -> usize {
        match self {
            Face::X0 | Face::X1 => 0,
            Face::Y0 | Face::Y1 => 1,
        }
    }

    fn edge(self) -> Edge {
        match self {
            Face::X0 | Face::Y0 => Edge::Left,
            Face::X1 | Face::Y1 => Edge::Right,
        }
    }
}

/// Condition on one face. Neumann values are the derivative along the face's
/// axis (`u_x` on `X` faces, `u_y` on `Y` faces). Periodic must be set on both
/// faces of an axis with the same weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceRule {
    Free,
    Dirichlet(f64),
    Neumann { value: f64, order: usize },
    Periodic { alpha: f64, beta: f64 },
}

/// Flat index of the `k`-th point inward from `face` on boundary line `line`.
fn at(face: Face, nx: usize, ny: usize, line: usize, k: usize) -> usize {
    match face.axis() {
        0 => line * nx + face.edge().inward(nx, k),
        _ => face.edge().inward(ny, k) * nx + line,
    }
}

fn stencil(field: &Field, face: Face, order: usize) -> Result<FdStencil, BoundaryError> {
    fd_coefficients(order, field.grid().dx(face.axis()), face.edge())
}

fn check(rules: &[FaceRule; 4], nx: usize, ny: usize) -> Result<(), BoundaryError> {
    for (i, r) in rules.iter().enumerate() {
        match *r {
            FaceRule::Periodic { alpha, beta } => {
                check_weights(alpha, beta)?;
                if rules[i ^ 1] != *r {
                    return Err(BoundaryError::BadValues("periodic faces must come in matching pairs".into()));
                }
            }
            FaceRule::Neumann { value, order } => {
                let len = order + 1;
                let n = if i < 2 { nx } else { ny };
                if !matches!(order, 1 | 2) {
                    return Err(BoundaryError::UnsupportedOrder(order));
                }
                if len > n - 1 {
                    return Err(BoundaryError::StencilTooLong { len, n });
                }
                if !value.is_finite() {
                    return Err(BoundaryError::BadValues("non-finite face value".into()));
                }
            }
            FaceRule::Dirichlet(v) if !v.is_finite() => {
                return Err(BoundaryError::BadValues("non-finite face value".into()))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Applies the face edits to an already computed kernel output.
pub fn enforce_faces(out: &mut Field, rules: &[FaceRule; 4]) -> Result<(), BoundaryError> {
    if out.grid().dims() != 2 {
        return Err(BoundaryError::NotTwoDimensional);
    }
    let (nx, ny) = (out.grid().n(0), out.grid().n(1));
    check(rules, nx, ny)?;
    for (i, face) in Face::ORDER.iter().copied().enumerate() {
        let lines = if face.axis() == 0 { ny } else { nx };
        let st = match rules[i] {
            FaceRule::Neumann { order, .. } => Some(stencil(out, face, order)?),
            _ => None,
        };
        for c in 0..out.channels() {
            let u = out.channel_mut(c);
            for line in 0..lines {
                let p = at(face, nx, ny, line, 0);
                match rules[i] {
                    FaceRule::Free => {}
                    FaceRule::Dirichlet(v) => u[p] = v,
                    FaceRule::Neumann { value, .. } => {
                        let s = st.as_ref().unwrap();
                        let rest: f64 = s.coeffs()[1..]
                            .iter()
                            .enumerate()
                            .map(|(k, ck)| ck * u[at(face, nx, ny, line, k + 1)])
                            .sum();
                        u[p] = (value - rest) / s.c0();
                    }
                    FaceRule::Periodic { alpha, beta } => {
                        // Handled once, on the first face of the pair.
                        if face.edge() == Edge::Left {
                            let q = at(face, nx, ny, line, if face.axis() == 0 { nx - 1 } else { ny - 1 });
                            let v = alpha * u[p] + beta * u[q];
                            u[p] = v;
                            u[q] = v;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// `K u0` followed by the face edits.
pub fn correct_2d(k: &dyn KernelModule, u0: &Field, rules: &[FaceRule; 4]) -> Result<Field, BoundaryError> {
    if u0.grid().dims() != 2 {
        return Err(BoundaryError::NotTwoDimensional);
    }
    if !u0.is_finite() {
        return Err(BoundaryError::NonFinite);
    }
    check(rules, u0.grid().n(0), u0.grid().n(1))?;
    let mut out = k.apply(u0)?;
    enforce_faces(&mut out, rules)?;
    Ok(out)
}

/// Largest violation of each face's condition (order `X0, X1, Y0, Y1`).
/// Corner points are skipped unless `corners` is set.
pub fn face_residuals(f: &Field, rules: &[FaceRule; 4], corners: bool) -> Result<[f64; 4], BoundaryError> {
    if f.grid().dims() != 2 {
        return Err(BoundaryError::NotTwoDimensional);
    }
    let (nx, ny) = (f.grid().n(0), f.grid().n(1));
    check(rules, nx, ny)?;
    let mut res = [0.0f64; 4];
    for (i, face) in Face::ORDER.iter().copied().enumerate() {
        let lines = if face.axis() == 0 { ny } else { nx };
        let range = if corners { 0..lines } else { 1..lines - 1 };
        let st = match rules[i] {
            FaceRule::Neumann { order, .. } => Some(stencil(f, face, order)?),
            _ => None,
        };
        for c in 0..f.channels() {
            let u = f.channel(c);
            for line in range.clone() {
                let p = at(face, nx, ny, line, 0);
                let r = match rules[i] {
                    FaceRule::Free => 0.0,
                    FaceRule::Dirichlet(v) => u[p] - v,
                    FaceRule::Neumann { value, .. } => {
                        let s = st.as_ref().unwrap();
                        let d: f64 = s.coeffs().iter().enumerate().map(|(k, ck)| ck * u[at(face, nx, ny, line, k)]).sum();
                        d - value
                    }
                    FaceRule::Periodic { .. } => {
                        let last = if face.axis() == 0 { nx - 1 } else { ny - 1 };
                        u[at(face, nx, ny, line, 0)] - u[at(face, nx, ny, line, last)]
                    }
                };
                res[i] = res[i].max(r.abs());
            }
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernel::DenseKernel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, seed: u64) -> (DenseKernel, Field) {
        let g = Grid::unit_2d(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = Field::scalar(g, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        (DenseKernel::random(n * n, seed + 1), u0)
    }

    #[test]
    fn all_dirichlet_faces() {
        let (k, u0) = setup(6, 1);
        let rules = [FaceRule::Dirichlet(0.5); 4];
        let out = correct_2d(&k, &u0, &rules).unwrap();
        assert_eq!(face_residuals(&out, &rules, true).unwrap(), [0.0; 4]);
        assert_eq!(k.calls(), 1);
    }

    #[test]
    fn zero_neumann_faces_hold_everywhere() {
        let (k, u0) = setup(8, 2);
        let rules = [FaceRule::Neumann { value: 0.0, order: 2 }; 4];
        let out = correct_2d(&k, &u0, &rules).unwrap();
        let r = face_residuals(&out, &rules, true).unwrap();
        assert!(r.iter().all(|v| *v < 1e-10), "{r:?}");
    }

    #[test]
    fn single_face_leaves_the_rest() {
        let (k, u0) = setup(6, 3);
        let plain = k.apply(&u0).unwrap();
        let rules = [FaceRule::Dirichlet(2.0), FaceRule::Free, FaceRule::Free, FaceRule::Free];
        let out = correct_2d(&k, &u0, &rules).unwrap();
        for iy in 0..6 {
            for ix in 0..6 {
                let i = iy * 6 + ix;
                if ix == 0 {
                    assert_eq!(out.values()[i], 2.0);
                } else {
                    assert_eq!(out.values()[i], plain.values()[i]);
                }
            }
        }
    }

    #[test]
    fn periodic_pairs() {
        let (k, u0) = setup(6, 4);
        let p = FaceRule::Periodic { alpha: 0.5, beta: 0.5 };
        let rules = [p, p, FaceRule::Dirichlet(0.0), FaceRule::Dirichlet(0.0)];
        let out = correct_2d(&k, &u0, &rules).unwrap();
        let r = face_residuals(&out, &rules, false).unwrap();
        assert_eq!(r, [0.0; 4]);
        let bad = [p, FaceRule::Free, FaceRule::Free, FaceRule::Free];
        assert!(correct_2d(&k, &u0, &bad).is_err());
    }
}
