use serde::{Deserialize, Serialize};

use crate::boundary::{BcKind, BoundarySpec, Side};
use crate::grid::Grid;

use super::PdeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    StokesSecond,
    BurgersRiemann,
    BurgersPeriodic,
    Heat1D,
    Wave2D,
    LidCavity,
}

impl Problem {
    pub const ALL: [Problem; 6] = [
        Problem::StokesSecond,
        Problem::BurgersRiemann,
        Problem::BurgersPeriodic,
        Problem::Heat1D,
        Problem::Wave2D,
        Problem::LidCavity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::StokesSecond => "stokes",
            Problem::BurgersRiemann => "burgers_riemann",
            Problem::BurgersPeriodic => "burgers_periodic",
            Problem::Heat1D => "heat",
            Problem::Wave2D => "wave",
            Problem::LidCavity => "lid_cavity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// On-disk tag.
    pub fn tag(self) -> u32 {
        match self {
            Problem::StokesSecond => 1,
            Problem::BurgersRiemann => 2,
            Problem::BurgersPeriodic => 3,
            Problem::Heat1D => 4,
            Problem::Wave2D => 5,
            Problem::LidCavity => 6,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.tag() == tag)
    }

    pub fn space_dims(self) -> usize {
        match self {
            Problem::Wave2D | Problem::LidCavity => 2,
            _ => 1,
        }
    }

    pub fn bc_kind(self) -> BcKind {
        match self {
            Problem::StokesSecond | Problem::BurgersRiemann | Problem::LidCavity => BcKind::Dirichlet,
            Problem::Heat1D | Problem::Wave2D => BcKind::Neumann,
            Problem::BurgersPeriodic => BcKind::Periodic,
        }
    }

    pub fn default_t_final(self) -> f64 {
        match self {
            Problem::BurgersRiemann => 1.2,
            Problem::BurgersPeriodic => 1.0,
            _ => 2.0,
        }
    }
}

/// Everything that determines a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub problem: Problem,
    /// Points per spatial dimension.
    pub n: usize,
    pub extent: (f64, f64),
    pub nt: usize,
    pub m: usize,
    pub t_final: f64,
    pub n_data: usize,
    pub n_train: usize,
    pub seed: u64,
    /// Viscosity (Stokes, Burgers).
    pub nu: f64,
    /// Reynolds number (lid cavity).
    pub re: f64,
    /// Wave speed.
    pub c: f64,
    /// Heat conductivity.
    pub kappa: f64,
    /// Amplitude `U` (Stokes plate, heat flux).
    pub amp: f64,
    /// Neumann stencil order used for boundary metadata.
    pub order: usize,
}

impl ProblemSpec {
    /// Standard sizes: 600 samples and one step for 1D problems, 1200
    /// samples and 25 of 30 steps for 2D ones. `multistep` switches a 1D
    /// problem to 1200 samples and 25 of 200 steps.
    pub fn standard(problem: Problem, n: usize, multistep: bool) -> Self {
        let (n_data, n_train, nt, m) = match (problem.space_dims(), multistep) {
            (2, _) => (1200, 1000, 30, 25),
            (_, true) => (1200, 1000, 200, 25),
            _ => (600, 500, 1, 1),
        };
        ProblemSpec {
            problem,
            n,
            extent: (0.0, 1.0),
            nt,
            m,
            t_final: problem.default_t_final(),
            n_data,
            n_train,
            seed: 0,
            nu: match problem {
                Problem::BurgersRiemann => 0.02,
                _ => 0.1,
            },
            re: 100.0,
            c: 1.0,
            kappa: 0.01,
            amp: match problem {
                Problem::Heat1D => 5.0,
                _ => 2.0,
            },
            order: 2,
        }
    }

    /// Sizes with the usual 5:1 train/test ratio.
    pub fn with_size(mut self, n_data: usize) -> Self {
        self.n_data = n_data;
        self.n_train = n_data - (n_data as f64 / 6.0).round() as usize;
        self
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        let bad = |m: String| Err(PdeError::BadParam(m));
        if self.n < 4 {
            return bad(format!("resolution {} < 4", self.n));
        }
        if self.nt == 0 || self.m == 0 || self.m > self.nt {
            return bad(format!("need 1 <= M <= N_t, got M={} N_t={}", self.m, self.nt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.n_data == 0 || self.n_train > self.n_data {
            return bad(format!("bad split {} of {}", self.n_train, self.n_data));
        }
        let positive = [("nu", self.nu), ("re", self.re), ("c", self.c), ("kappa", self.kappa)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !self.amp.is_finite() {
            return bad("amplitude must be finite".into());
        }
        if !matches!(self.order, 1 | 2) {
            return bad(format!("stencil order {} (expected 1 or 2)", self.order));
        }
        if self.problem == Problem::LidCavity && ![10.0, 100.0, 1000.0].contains(&self.re) {
            return bad(format!("Re must be one of 10, 100, 1000, got {}", self.re));
        }
        let (lo, hi) = self.extent;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return bad(format!("bad extent [{lo}, {hi}]"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, PdeError> {
        let (lo, hi) = self.extent;
        Ok(match self.problem.space_dims() {
            1 => Grid::line(self.n, lo, hi)?,
            _ => Grid::new(vec![self.n, self.n], vec![(lo, hi), (lo, hi)])?,
        })
    }

    /// Output times: the last `M` of `N_t` uniform steps on `(0, t_final]`.
    pub fn times(&self) -> Vec<f64> {
        let dt = self.t_final / self.nt as f64;
        (self.nt - self.m + 1..=self.nt).map(|j| j as f64 * dt).collect()
    }

    /// Shape of the boundary condition this problem trains with (values empty).
    pub fn bc_template(&self) -> BoundarySpec {
        match self.problem {
            Problem::StokesSecond => BoundarySpec::Dirichlet { side: Side::Left, left: vec![], right: vec![] },
            Problem::BurgersRiemann | Problem::LidCavity => {
                BoundarySpec::Dirichlet { side: Side::Both, left: vec![], right: vec![] }
            }
            Problem::Heat1D | Problem::Wave2D => {
                BoundarySpec::Neumann { side: Side::Both, left: vec![], right: vec![], order: self.order }
            }
            Problem::BurgersPeriodic => BoundarySpec::Periodic { alpha: 0.5, beta: 0.5 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_sizes() {
        let s = ProblemSpec::standard(Problem::BurgersRiemann, 128, false);
        assert_eq!((s.n_data, s.n_train, s.nt, s.m), (600, 500, 1, 1));
        let s = ProblemSpec::standard(Problem::StokesSecond, 128, true);
        assert_eq!((s.n_data, s.n_train, s.nt, s.m), (1200, 1000, 200, 25));
        let s = ProblemSpec::standard(Problem::LidCavity, 32, false);
        assert_eq!((s.n_data, s.n_train, s.nt, s.m), (1200, 1000, 30, 25));
    }

    #[test]
    fn times_are_the_last_m_steps() {
        let mut s = ProblemSpec::standard(Problem::Heat1D, 64, true);
        s.nt = 4;
        s.m = 2;
        assert_eq!(s.times(), vec![1.5, 2.0]);
    }

    #[test]
    fn tags_round_trip() {
        for p in Problem::ALL {
            assert_eq!(Problem::from_tag(p.tag()), Some(p));
            assert_eq!(Problem::parse(p.name()), Some(p));
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut s = ProblemSpec::standard(Problem::BurgersRiemann, 64, false);
        s.nu = 0.0;
        assert!(s.validate().is_err());
        let mut s = ProblemSpec::standard(Problem::LidCavity, 16, false);
        s.re = 50.0;
        assert!(s.validate().is_err());
    }
}
