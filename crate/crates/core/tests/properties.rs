use proptest::prelude::*;

use sis_extinction::analytic::{
    concentration_bound, exact_mean_extinction, gumbel_cdf, linear_extinction_cdf,
    mean_extinction_double_sum, ruin_escape_probability, ConcentrationInputs,
};
use sis_extinction::cli::parse_sweep;
use sis_extinction::mc::EmpiricalCdf;
use sis_extinction::model::{ode_t_of_z, ode_z, rates_logistic, ModelParams, OdeSolution};
use sis_extinction::sim::DiscreteChainParams;

/// Subcritical parameters with `N` in `1..=n_max`.
fn subcritical(n_max: u64) -> impl Strategy<Value = ModelParams> {
    (1..=n_max, 0.1f64..5.0, 0.0f64..0.98)
        .prop_map(|(n, mu, r)| ModelParams::new(n, r * mu, mu).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #[test]
    fn logistic_rates(p in subcritical(10_000), frac in 0.0f64..=1.0) {
        let x = (frac * p.n() as f64) as u64;
        let (up, down) = rates_logistic(&p, x).unwrap();
        prop_assert!(up >= 0.0 && up <= p.lambda() * x as f64);
        prop_assert_eq!(down, p.mu() * x as f64);
        prop_assert_eq!(rates_logistic(&p, p.n()).unwrap().0, 0.0);
        prop_assert!(rates_logistic(&p, p.n() + 1).is_err());
    }

    #[test]
    fn ode_is_decreasing_and_invertible(
        p in subcritical(1_000_000),
        z0 in 0.01f64..=1.0,
        t in 0.0f64..50.0,
        dt in 0.01f64..5.0,
    ) {
        let sol = OdeSolution::new(p, z0).unwrap();
        let z = ode_z(&sol, t).unwrap();
        let later = ode_z(&sol, t + dt).unwrap();
        prop_assert!(z > 0.0 && z <= z0);
        prop_assert!(later < z);
        if z > 1e-12 {
            let back = ode_t_of_z(&sol, z).unwrap();
            prop_assert!((back - t).abs() <= 1e-7 * t.max(1.0), "{} vs {}", back, t);
        }
    }

    #[test]
    fn ruin_probability_bounds(
        p in subcritical(10),
        x in 0u64..200,
        extra in 0u64..200,
    ) {
        prop_assume!(x + extra >= 1);
        let top = x + extra;
        let r = ruin_escape_probability(&p, x, top).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.probability));
        prop_assert!(r.probability <= r.geometric_bound * (1.0 + 1e-9));
        prop_assert!(r.geometric_bound <= r.exponential_bound * (1.0 + 1e-12));
        if x < top {
            let next = ruin_escape_probability(&p, x + 1, top).unwrap();
            prop_assert!(next.probability >= r.probability);
        }
    }

    #[test]
    fn concentration_is_monotone(
        alpha in 0.0f64..10.0,
        beta in 0.01f64..1e4,
        a in 0.0f64..1e3,
        da in 0.0f64..10.0,
        db in 0.0f64..10.0,
    ) {
        let b = |alpha, beta, a| {
            concentration_bound(&ConcentrationInputs::new(alpha, beta, a).unwrap()).unwrap()
        };
        let base = b(alpha, beta, a);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(b(alpha, beta, a + da) <= base);
        prop_assert!(b(alpha, beta + db, a) >= base);
    }

    #[test]
    fn exact_mean_matches_double_sum(p in subcritical(300), frac in 0.0f64..=1.0) {
        let x0 = (frac * p.n() as f64) as u64;
        let fast = exact_mean_extinction(&p, x0).unwrap();
        let slow = mean_extinction_double_sum(&p, x0).unwrap();
        prop_assert!(close(fast, slow, 1e-9), "{} vs {}", fast, slow);
        if x0 < p.n() {
            prop_assert!(exact_mean_extinction(&p, x0 + 1).unwrap() > fast);
        }
    }

    #[test]
    fn linear_cdf_is_a_distribution(
        p in subcritical(10),
        x in 0u64..5000,
        t in 0.0f64..100.0,
        dt in 0.0f64..10.0,
    ) {
        let f = linear_extinction_cdf(&p, x, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(linear_extinction_cdf(&p, x, t + dt).unwrap() >= f);
    }

    #[test]
    fn gumbel_cdf_is_monotone(w in -20.0f64..50.0, dw in 0.0f64..5.0) {
        let f = gumbel_cdf(w);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(gumbel_cdf(w + dw) >= f);
    }

    #[test]
    fn discrete_transitions_are_lazy(
        p in subcritical(100_000),
        k in 2.0f64..100.0,
        frac in 0.0f64..=1.0,
    ) {
        let d = DiscreteChainParams::new(k).unwrap();
        let x = (frac * p.n() as f64) as u64;
        let tr = d.transition(&p, x);
        prop_assert!(tr.up >= 0.0 && tr.down >= 0.0);
        prop_assert!(tr.hold >= 0.5);
        prop_assert!(close(tr.up + tr.down + tr.hold, 1.0, 1e-12));
        prop_assert!(close(tr.moving, tr.up + tr.down, 1e-12));
    }

    #[test]
    fn sweep_lists_round_trip(values in prop::collection::vec(0u64..1_000_000, 1..20)) {
        let text = values.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_sweep(&text).unwrap(), values);
    }

    #[test]
    fn sweep_ranges_expand(start in 0u64..1000, len in 0u64..100, step in 1u64..7) {
        let end = start + len;
        let got = parse_sweep(&format!("{start}:{end}:{step}")).unwrap();
        let want: Vec<u64> = (start..=end).step_by(step as usize).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn empirical_cdf_is_a_step_distribution(
        xs in prop::collection::vec(-1e3f64..1e3, 1..200),
        t in -2e3f64..2e3,
        dt in 0.0f64..100.0,
    ) {
        let cdf = EmpiricalCdf::new(&xs).unwrap();
        let f = cdf.eval(t);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(cdf.eval(t + dt) >= f);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(cdf.eval(max), 1.0);
        let below = xs.iter().filter(|&&x| x <= t).count() as f64 / xs.len() as f64;
        prop_assert_eq!(f, below);
    }
}
