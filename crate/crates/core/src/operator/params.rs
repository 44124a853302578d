//! Architecture description and the flat parameter vector.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::{BcKind, BoundarySpec, Side};

use super::OperatorError;

/// Raw input channels: the initial condition and the normalized coordinate.
pub const IN_CHANNELS: usize = 2;

/// Which correction the layers and the output use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Wiring {
    Dirichlet { side: Side },
    Neumann { side: Side, order: usize },
    Periodic { alpha: f64, beta: f64 },
}

impl Wiring {
    pub fn from_spec(spec: &BoundarySpec) -> Self {
        match spec {
            BoundarySpec::Dirichlet { side, .. } => Wiring::Dirichlet { side: *side },
            BoundarySpec::Neumann { side, order, .. } => Wiring::Neumann { side: *side, order: *order },
            BoundarySpec::Periodic { alpha, beta } => Wiring::Periodic { alpha: *alpha, beta: *beta },
        }
    }

    pub fn kind(&self) -> BcKind {
        match self {
            Wiring::Dirichlet { .. } => BcKind::Dirichlet,
            Wiring::Neumann { .. } => BcKind::Neumann,
            Wiring::Periodic { .. } => BcKind::Periodic,
        }
    }

    /// Whether `spec` carries data this wiring can consume.
    pub fn matches(&self, spec: &BoundarySpec) -> bool {
        Wiring::from_spec(spec) == *self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arch {
    pub modes: usize,
    pub width: usize,
    pub layers: usize,
    /// Output time channels `M`.
    pub out_channels: usize,
    pub mollifier: bool,
    /// `false` gives the plain spectral operator (no corrections anywhere).
    pub corrected: bool,
    pub wiring: Wiring,
}

impl Arch {
    /// Modes and width by problem dimension: 1D single-step 16/64, 1D with
    /// time 12/32, 2D with time 8/20.
    pub fn standard(space_dims: usize, multistep: bool, out_channels: usize, wiring: Wiring) -> Self {
        let (modes, width) = match (space_dims, multistep) {
            (1, false) => (16, 64),
            (1, true) | (2, false) => (12, 32),
            _ => (8, 20),
        };
        Self { modes, width, layers: 4, out_channels, mollifier: false, corrected: true, wiring }
    }

    pub fn hidden(&self) -> usize {
        2 * self.width
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if self.modes == 0 || self.width == 0 || self.layers == 0 || self.out_channels == 0 {
            return Err(OperatorError::Config("modes, width, layers and outputs must be positive".into()));
        }
        if let Wiring::Periodic { alpha, beta } = self.wiring {
            crate::boundary::check_weights(alpha, beta)?;
        }
        Ok(())
    }

    /// Named parameter groups in storage order.
    pub fn groups(&self) -> Vec<(String, Range<usize>)> {
        let c = self.width;
        let mut sizes = vec![("lift.w".to_string(), c * IN_CHANNELS), ("lift.b".to_string(), c)];
        for l in 0..self.layers {
            sizes.push((format!("layer{l}.spectral"), 2 * self.modes * c * c));
            sizes.push((format!("layer{l}.w"), c * c));
            sizes.push((format!("layer{l}.b"), c));
        }
        let h = self.hidden();
        sizes.push(("proj1.w".into(), h * c));
        sizes.push(("proj1.b".into(), h));
        sizes.push(("proj2.w".into(), self.out_channels * h));
        sizes.push(("proj2.b".into(), self.out_channels));
        let mut at = 0;
        sizes
            .into_iter()
            .map(|(name, len)| {
                let r = at..at + len;
                at += len;
                (name, r)
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.groups().last().map_or(0, |(_, r)| r.end)
    }

    pub(crate) fn layout(&self) -> Layout {
        let g = self.groups();
        let r = |i: usize| g[i].1.clone();
        let layers = (0..self.layers).map(|l| LayerSlots { spectral: r(2 + 3 * l), w: r(3 + 3 * l), b: r(4 + 3 * l) }).collect();
        let p = 2 + 3 * self.layers;
        Layout { lift_w: r(0), lift_b: r(1), layers, proj1_w: r(p), proj1_b: r(p + 1), proj2_w: r(p + 2), proj2_b: r(p + 3) }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LayerSlots {
    pub spectral: Range<usize>,
    pub w: Range<usize>,
    pub b: Range<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub lift_w: Range<usize>,
    pub lift_b: Range<usize>,
    pub layers: Vec<LayerSlots>,
    pub proj1_w: Range<usize>,
    pub proj1_b: Range<usize>,
    pub proj2_w: Range<usize>,
    pub proj2_b: Range<usize>,
}

/// All trainable numbers in one vector; spectral multipliers are stored as
/// interleaved real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorParams {
    pub arch: Arch,
    pub values: Vec<f64>,
}

impl OperatorParams {
    /// Pointwise maps and biases uniform in `+-1/sqrt(fan_in)`, spectral
    /// multipliers with both parts uniform in `[0, 1/C^2)`.
    pub fn init(arch: Arch, seed: u64) -> Result<Self, OperatorError> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0.0; arch.param_count()];
        let lay = arch.layout();
        let c = arch.width;
        let mut fill = |r: Range<usize>, lo: f64, hi: f64| {
            for v in &mut values[r] {
                *v = rng.random_range(lo..hi);
            }
        };
        let k = |fan_in: usize| 1.0 / (fan_in as f64).sqrt();
        fill(lay.lift_w.clone(), -k(IN_CHANNELS), k(IN_CHANNELS));
        fill(lay.lift_b.clone(), -k(IN_CHANNELS), k(IN_CHANNELS));
        for s in &lay.layers {
            fill(s.spectral.clone(), 0.0, 1.0 / (c * c) as f64);
            fill(s.w.clone(), -k(c), k(c));
            fill(s.b.clone(), -k(c), k(c));
        }
        let h = arch.hidden();
        fill(lay.proj1_w.clone(), -k(c), k(c));
        fill(lay.proj1_b.clone(), -k(c), k(c));
        fill(lay.proj2_w.clone(), -k(h), k(h));
        fill(lay.proj2_b.clone(), -k(h), k(h));
        Ok(Self { arch, values })
    }

    pub fn from_values(arch: Arch, values: Vec<f64>) -> Result<Self, OperatorError> {
        arch.validate()?;
        if values.len() != arch.param_count() {
            return Err(OperatorError::Config(format!(
                "architecture has {} parameters, got {}",
                arch.param_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(OperatorError::NonFinite("parameters".into()));
        }
        Ok(Self { arch, values })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_tile_the_vector() {
        let a = Arch::standard(1, false, 1, Wiring::Dirichlet { side: Side::Left });
        assert_eq!((a.modes, a.width, a.layers), (16, 64, 4));
        let g = a.groups();
        assert_eq!(g.len(), 2 + 3 * 4 + 4);
        for w in g.windows(2) {
            assert_eq!(w[0].1.end, w[1].1.start);
        }
        assert_eq!(g[2].1.len(), 2 * 16 * 64 * 64);
        let p = OperatorParams::init(a.clone(), 3).unwrap();
        assert_eq!(p.values.len(), a.param_count());
        assert_eq!(p, OperatorParams::init(a, 3).unwrap());
    }
}
