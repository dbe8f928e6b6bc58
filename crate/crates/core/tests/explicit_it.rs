use carnot_ld::explicit_sim::{
    delta_s_ld, efficiency_sweep, exact_population_ode, exact_population_ode_tol,
    exact_stroke_heat, full_series_heat, heat_by_order, heat_order_ratio, sigma_ld,
    slow_driving_population, ExplicitProtocol,
};
use carnot_ld::thermo_core::{entropy, gibbs_point, HermitianOperator};
use std::f64::consts::PI;

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn series_error_scales_with_next_order() {
    let p = ExplicitProtocol::new(6, 0.1, 1.0, 201).unwrap();
    for order in 1..=3usize {
        let mut consts = Vec::new();
        for k in [10.0, 30.0, 100.0] {
            let ode = exact_population_ode(&p, k).unwrap();
            let series = slow_driving_population(&p, k, order).unwrap();
            assert!(series.warning.is_none());
            let err = sup_diff(&series.values, &ode);
            consts.push(err * k.powi(order as i32 + 1));
        }
        let (lo, hi) = consts.iter().fold((f64::MAX, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
        assert!(hi / lo < 1.2, "order {order}: {consts:?}");
        // Leading tail term of a pure cosine drive.
        let lead = 0.5 * 0.1 * PI.powi(order as i32 + 1);
        assert!((consts[2] / lead - 1.0).abs() < 0.05, "order {order}: {} vs {lead}", consts[2]);
    }
}

#[test]
fn higher_order_is_closer() {
    let p = ExplicitProtocol::new(6, 0.1, 1.0, 201).unwrap();
    let ode = exact_population_ode(&p, 30.0).unwrap();
    let e1 = sup_diff(&slow_driving_population(&p, 30.0, 1).unwrap().values, &ode);
    let e3 = sup_diff(&slow_driving_population(&p, 30.0, 3).unwrap().values, &ode);
    assert!(e3 < e1 / 50.0, "{e3} vs {e1}");
    let e2 = sup_diff(&slow_driving_population(&p, 10.0, 2).unwrap().values, &ode_at(&p, 10.0));
    assert!(e2 < 0.5 * 0.1 * PI.powi(3) / 1e3 * 1.1, "{e2}");
}

fn ode_at(p: &ExplicitProtocol, tau: f64) -> Vec<f64> {
    exact_population_ode(p, tau).unwrap()
}

#[test]
fn ode_converges_under_tolerance_refinement() {
    let p = ExplicitProtocol::new(8, 0.2, 1.0, 101).unwrap();
    let a = exact_population_ode_tol(&p, 5.0, 1e-10).unwrap();
    let b = exact_population_ode_tol(&p, 5.0, 1e-12).unwrap();
    assert!(sup_diff(&a, &b) < 1e-9);
}

#[test]
fn series_warns_outside_convergence() {
    let p = ExplicitProtocol::new(4, 0.1, 1.0, 11).unwrap();
    assert!(slow_driving_population(&p, 3.0, 2).unwrap().warning.is_some());
    assert!(slow_driving_population(&p, 1.0, 7).is_err());
}

#[test]
fn order_heats_sum_to_exact_stroke() {
    let p = ExplicitProtocol::new(4, 0.1, 1.0, 2).unwrap();
    let k = 30.0;
    let partial: f64 = (0..=6).map(|j| heat_by_order(&p, k, j).unwrap()).sum();
    let exact = exact_stroke_heat(&p, k, false).unwrap();
    assert!((partial - exact).abs() < 1e-8, "{partial} vs {exact}");
    let full = full_series_heat(&p, k, false).unwrap();
    assert!((full - exact).abs() < 1e-9, "{full} vs {exact}");
    let full_r = full_series_heat(&p, k, true).unwrap();
    let exact_r = exact_stroke_heat(&p, k, true).unwrap();
    assert!((full_r - exact_r).abs() < 1e-9, "{full_r} vs {exact_r}");
}

fn stroke_entropy(p: &ExplicitProtocol, s: f64) -> f64 {
    let levels = 1usize << p.n();
    let mut d = vec![p.gap(s); levels];
    d[0] = 0.0;
    entropy(&gibbs_point(&HermitianOperator::from_diagonal(&d).unwrap()))
}

#[test]
fn zeroth_order_heat_is_entropy_change() {
    let p = ExplicitProtocol::new(10, 0.1, 1.0, 2).unwrap();
    let q0 = heat_by_order(&p, 20.0, 0).unwrap();
    let ds = stroke_entropy(&p, 1.0) - stroke_entropy(&p, 0.0);
    assert!((q0 - ds).abs() < 1e-10, "{q0} vs {ds}");
    assert!((delta_s_ld(&p) - ds).abs() < 1e-10);
}

#[test]
fn entropy_and_dissipation_scale_with_modulation() {
    let slope = |f: &dyn Fn(f64) -> f64| {
        let (a, b) = (1e-3, 2e-3);
        (f(b) / f(a)).ln() / (b / a).ln()
    };
    let ds = |e: f64| delta_s_ld(&ExplicitProtocol::new(8, e, 1.0, 2).unwrap());
    let sg = |e: f64| sigma_ld(&ExplicitProtocol::new(8, e, 1.0, 2).unwrap());
    assert!((slope(&ds) - 1.0).abs() < 1e-3);
    assert!((slope(&sg) - 2.0).abs() < 1e-3);
}

#[test]
fn heat_series_decays_geometrically() {
    let p = ExplicitProtocol::new(6, 0.1, 1.0, 2).unwrap();
    for k in [10.0, 30.0] {
        let r = heat_order_ratio(&p, k).unwrap();
        assert!((r * k / PI - 1.0).abs() < 1e-6, "{r}");
    }
}

#[test]
fn sweep_orders_powers() {
    let engines = efficiency_sweep(&[6, 8, 10], 0.1, 0.9, 1.0).unwrap();
    for e in &engines {
        assert!(e.p_ideal > e.p_ld && e.p_ld > e.p_exact && e.p_exact > 0.0, "{e:?}");
        assert!((e.eta - e.gamma * 0.1).abs() < 1e-12);
    }
    assert!(efficiency_sweep(&[1], 0.1, 0.9, 1.0).is_err());
}
