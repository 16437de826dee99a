use proptest::prelude::*;

use subdiff::config::ProblemConfig;
use subdiff::penalty::{energy, solve_penalized, PenalizedProblem};
use subdiff::rhum::solve_rhum;
use subdiff::special::{gamma_fn, mittag_leffler};
use subdiff::spectral::{mild_solution, ControlSignal, SpectralField, TimeGrid};

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn mittag_leffler_recurrence(p in 0.2f64..1.0, q in 0.3f64..2.0, z in -30.0f64..3.0) {
        let lhs = mittag_leffler(p, q, z).unwrap();
        let rhs = 1.0 / gamma_fn(q).unwrap() + z * mittag_leffler(p, p + q, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + (z * rhs).abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn relaxation_is_monotone(p in 0.1f64..1.0, a in -40.0f64..0.0, d in 0.01f64..5.0) {
        let lo = mittag_leffler(p, 1.0, a - d).unwrap();
        let hi = mittag_leffler(p, 1.0, a).unwrap();
        prop_assert!(lo > 0.0 && lo <= hi && hi <= 1.0);
    }

    #[test]
    fn mild_solution_is_linear(
        alpha in 0.2f64..1.0,
        y in prop::collection::vec(-1.0f64..1.0, 4),
        z in prop::collection::vec(-1.0f64..1.0, 4),
        b in prop::collection::vec(-1.0f64..1.0, 4),
        c in -2.0f64..2.0,
        w in 0.5f64..6.0,
    ) {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let u = ControlSignal::from_fn(grid, |t| (w * t).sin()).unwrap();
        let v = ControlSignal::from_fn(grid, |t| t * t - 0.3).unwrap();
        let uv = ControlSignal::new(
            grid,
            u.values().iter().zip(v.values()).map(|(a, b)| c * a + b).collect(),
        ).unwrap();
        let yz = SpectralField::new(y.iter().zip(&z).map(|(a, b)| c * a + b).collect()).unwrap();
        let lhs = mild_solution(alpha, &yz, &b, &uv).unwrap();
        let t1 = mild_solution(alpha, &SpectralField::new(y.clone()).unwrap(), &b, &u).unwrap();
        let t2 = mild_solution(alpha, &SpectralField::new(z.clone()).unwrap(), &b, &v).unwrap();
        for k in 0..grid.len() {
            for i in 0..4 {
                let rhs = c * t1.states()[k].coeffs()[i] + t2.states()[k].coeffs()[i];
                let got = lhs.states()[k].coeffs()[i];
                prop_assert!((got - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn free_decay_and_mode_decoupling(alpha in 0.1f64..0.99, i in 1usize..6, amp in 0.1f64..3.0) {
        let grid = TimeGrid::new(1.5, 40).unwrap();
        let free = mild_solution(alpha, &SpectralField::unit(6, i), &[0.0; 6], &ControlSignal::zeros(grid)).unwrap();
        for w in free.states().windows(2) {
            prop_assert!(w[1].coeffs()[i - 1].abs() <= w[0].coeffs()[i - 1].abs());
        }
        let mut load = [0.0; 6];
        load[i - 1] = 1.0;
        let u = ControlSignal::from_fn(grid, |t| amp * (1.0 + t)).unwrap();
        let forced = mild_solution(alpha, &SpectralField::zeros(6), &load, &u).unwrap();
        for s in forced.states() {
            for j in (0..6).filter(|&j| j != i - 1) {
                prop_assert_eq!(s.coeffs()[j], 0.0);
            }
        }
    }

    #[test]
    fn config_round_trip(
        alpha in 0.01f64..0.99,
        horizon in 0.1f64..10.0,
        steps in 2usize..600,
        y0 in prop::collection::vec(-1e3f64..1e3, 1..12),
        zone in any::<bool>(),
        a in 0.0f64..0.5,
        width in 0.01f64..0.5,
    ) {
        let n = y0.len();
        let actuator = if zone {
            format!(r#"{{"kind": "zone", "a": {a:?}, "b": {:?}}}"#, a + width)
        } else {
            format!(r#"{{"kind": "pointwise", "b": {:?}}}"#, a + width)
        };
        let text = format!(
            r#"{{"alpha": {alpha:?}, "T": {horizon:?}, "n_modes": {n}, "n_steps": {steps},
                "y0": {y0:?}, "actuator": {actuator},
                "target": {{"kind": "modes", "indices": [{n}]}}}}"#
        );
        let cfg = ProblemConfig::from_json(&text).unwrap();
        let back = ProblemConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// The penalized problem relaxes the terminal constraint, so its cost
    /// never exceeds the constrained minimum.
    #[test]
    fn penalized_cost_is_below_rhum(
        alpha in 0.3f64..0.9,
        b in 0.1f64..0.3,
        eps in 1e-6f64..1.0,
    ) {
        let text = format!(
            r#"{{"alpha": {alpha}, "T": 1.0, "n_modes": 6, "n_steps": 48,
                "y0": [1, 0.5, 0, 0, 0, 0],
                "actuator": {{"kind": "pointwise", "b": {b}}},
                "target": {{"kind": "modes", "indices": [3, 4, 5, 6]}}}}"#
        );
        let problem = ProblemConfig::from_json(&text).unwrap().build().unwrap();
        let rhum = solve_rhum(&problem).unwrap();
        prop_assert!(rhum.distance <= 1e-8);
        let pen = solve_penalized(&PenalizedProblem::new(&problem, eps).unwrap()).unwrap();
        let j = energy(&rhum.u_star);
        prop_assert!(pen.j_eps <= j * (1.0 + 1e-9), "{} > {}", pen.j_eps, j);
    }
}
