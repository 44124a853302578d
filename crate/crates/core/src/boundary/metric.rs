//! Dataset boundary error: mean over samples of the L2 norm, over boundary
//! points and time channels, of `G(pred) - G(target)`.

use crate::grid::Field;

use super::spec::BoundarySpec;
use super::stencil::Edge;
use super::BoundaryError;

/// Per-sample boundary operator values, one per (time channel, boundary point).
fn boundary_values(f: &Field, spec: &BoundarySpec) -> Result<Vec<f64>, BoundaryError> {
    let n = f.points();
    let mut out = Vec::with_capacity(2 * f.channels());
    let stencils = match spec {
        BoundarySpec::Neumann { .. } => {
            let dx = f.grid().dx(0);
            Some((spec.stencil(dx, Edge::Left).unwrap()?, spec.stencil(dx, Edge::Right).unwrap()?))
        }
        _ => None,
    };
    for c in 0..f.channels() {
        let u = f.channel(c);
        match spec {
            BoundarySpec::Periodic { .. } => out.push(u[0] - u[n - 1]),
            _ => {
                for edge in spec.side().edges() {
                    out.push(match &stencils {
                        Some((l, r)) => match edge {
                            Edge::Left => l.apply(u),
                            Edge::Right => r.apply(u),
                        },
                        None => u[edge.pivot(n)],
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Mean boundary L2 error over samples. For Dirichlet the prescribed values
/// cancel, so only the boundary samples of `pred` and `target` are compared.
pub fn boundary_error(pred: &[Field], target: &[Field], spec: &BoundarySpec) -> Result<f64, BoundaryError> {
    if pred.is_empty() {
        return Err(BoundaryError::Empty);
    }
    if pred.len() != target.len() {
        return Err(BoundaryError::Shape(format!("{} predictions vs {} targets", pred.len(), target.len())));
    }
    let mut total = 0.0;
    for (p, t) in pred.iter().zip(target) {
        if p.grid() != t.grid() || p.channels() != t.channels() {
            return Err(BoundaryError::Shape("prediction and target fields differ in shape".into()));
        }
        if p.grid().dims() != 1 {
            return Err(BoundaryError::NotOneDimensional);
        }
        let a = boundary_values(p, spec)?;
        let b = boundary_values(t, spec)?;
        total += a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    }
    Ok(total / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::spec::Side;
    use crate::grid::Grid;

    fn sample(vals: Vec<f64>) -> Field {
        Field::scalar(Grid::unit_1d(vals.len()).unwrap(), vals).unwrap()
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let f = vec![sample(vec![1.0, 2.0, 3.0, 4.0, 5.0])];
        for spec in [
            BoundarySpec::dirichlet(Side::Both, vec![0.0], vec![0.0]).unwrap(),
            BoundarySpec::neumann(Side::Left, vec![0.0], vec![], 2).unwrap(),
            BoundarySpec::periodic(0.5, 0.5).unwrap(),
        ] {
            assert_eq!(boundary_error(&f, &f, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_offset_is_reported() {
        let spec = BoundarySpec::dirichlet(Side::Left, vec![0.0], vec![]).unwrap();
        let t: Vec<Field> = (0..5).map(|i| sample(vec![i as f64, 1.0, 2.0, 3.0])).collect();
        let p: Vec<Field> = t
            .iter()
            .map(|f| {
                let mut g = f.clone();
                g.values_mut()[0] += 0.125;
                g
            })
            .collect();
        assert!((boundary_error(&p, &t, &spec).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn empty_is_an_error() {
        let spec = BoundarySpec::periodic(0.5, 0.5).unwrap();
        assert_eq!(boundary_error(&[], &[], &spec), Err(BoundaryError::Empty));
    }
}
