use proptest::prelude::*;

use boonkit::boundary::{correct, correct_dirichlet, correct_neumann, correct_periodic, dense_oracle, fd_coefficients, BoundarySpec, Edge, Side};
use boonkit::fft::{irfft, rfft};
use boonkit::harness::ExperimentConfig;
use boonkit::operator::gradcheck::random_bc;
use boonkit::operator::{model_forward, Arch, OperatorParams, Wiring};
use boonkit::pde::{bc_residual_1d, build_dataset, io, Problem, ProblemSpec};
use boonkit::{DenseKernel, Field, Grid, SpectralKernel};
use rand::SeedableRng;

fn field(n: usize, seed: u64) -> Field {
    let g = Grid::unit_1d(n).unwrap();
    Field::from_fn_1d(g, |x| ((seed % 17) as f64 * x + 0.3).sin() + 0.1 * (seed % 5) as f64).unwrap()
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right), Just(Side::Both)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_fft_round_trips(xs in prop::collection::vec(-10.0f64..10.0, 4..200)) {
        let back = irfft(&rfft(&xs).unwrap(), xs.len()).unwrap();
        for (a, b) in xs.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_value_is_exact(n in 4usize..80, seed in any::<u64>(), alpha in -5.0f64..5.0) {
        let k = SpectralKernel::random(2, 1, 1, seed);
        let u = correct_dirichlet(&k, &field(n, seed), alpha).unwrap();
        prop_assert_eq!(u.values()[0], alpha);
    }

    #[test]
    fn neumann_stencil_is_met(n in 4usize..80, seed in any::<u64>(), alpha in -5.0f64..5.0, order in 1usize..3) {
        let k = SpectralKernel::random(2, 1, 1, seed);
        let u0 = field(n, seed);
        let s = fd_coefficients(order, u0.grid().dx(0), Edge::Left).unwrap();
        let u = correct_neumann(&k, &u0, alpha, &s).unwrap();
        let scale = 1.0 + alpha.abs() + s.apply(u.values()).abs();
        prop_assert!((s.apply(u.values()) - alpha).abs() <= 1e-10 * scale);
    }

    #[test]
    fn periodic_ends_agree(n in 4usize..80, seed in any::<u64>(), a in 0.01f64..0.99) {
        let k = SpectralKernel::random(2, 1, 1, seed);
        let u = correct_periodic(&k, &field(n, seed), a, 1.0 - a).unwrap();
        prop_assert_eq!(u.values()[0], u.values()[n - 1]);
    }

    #[test]
    fn fast_path_matches_dense_oracle(n in 4usize..24, seed in any::<u64>(), s in side(), l in -2.0f64..2.0, r in -2.0f64..2.0, neumann in any::<bool>()) {
        let k = DenseKernel::random(n, seed);
        let u0 = field(n, seed);
        let left = if s.has_left() { vec![l] } else { vec![] };
        let right = if s.has_right() { vec![r] } else { vec![] };
        let spec = if neumann {
            BoundarySpec::neumann(s, left, right, 2).unwrap()
        } else {
            BoundarySpec::dirichlet(s, left, right).unwrap()
        };
        let fast = correct(&k, &u0, &spec, 0).unwrap();
        let want = dense_oracle(&k, &spec, &u0, 0).unwrap().apply_vec(u0.values());
        let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fast.values().iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn untrained_model_meets_its_condition(seed in any::<u64>(), w in 0usize..4) {
        let wiring = [
            Wiring::Dirichlet { side: Side::Right },
            Wiring::Dirichlet { side: Side::Both },
            Wiring::Neumann { side: Side::Left, order: 1 },
            Wiring::Periodic { alpha: 0.3, beta: 0.7 },
        ][w];
        let arch = Arch { modes: 4, width: 4, layers: 2, out_channels: 2, mollifier: false, corrected: true, wiring };
        let p = OperatorParams::init(arch, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bc = random_bc(&wiring, 2, &mut rng);
        let out = model_forward(&p, &bc, &field(16, seed)).unwrap();
        let tol = if matches!(wiring, Wiring::Neumann { .. }) { 1e-10 } else { 0.0 };
        prop_assert!(bc_residual_1d(&out, &bc) <= tol);
    }

    #[test]
    fn config_merge_rejects_only_overlaps(a in prop::sample::subsequence(vec!["nu", "seed", "epochs", "lr"], 0..4),
                                          b in prop::sample::subsequence(vec!["nu", "seed", "epochs", "lr"], 0..4)) {
        let mk = |keys: &[&str]| ExperimentConfig::from_pairs(keys.iter().map(|k| (k.to_string(), "1".to_string()))).unwrap();
        let merged = ExperimentConfig::merge(mk(&a), mk(&b));
        prop_assert_eq!(merged.is_err(), a.iter().any(|k| b.contains(k)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn datasets_round_trip_bit_for_bit(seed in any::<u64>(), p in 0usize..4) {
        let problem = [Problem::StokesSecond, Problem::BurgersRiemann, Problem::BurgersPeriodic, Problem::Heat1D][p];
        let mut s = ProblemSpec::standard(problem, 33, false).with_size(3);
        s.seed = seed;
        let d = build_dataset(&s).unwrap();
        let bytes = io::to_bytes(&d);
        let back = io::from_bytes(&bytes).unwrap();
        prop_assert_eq!(io::to_bytes(&back), bytes);
        prop_assert_eq!(back, d);
    }
}
