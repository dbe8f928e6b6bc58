mod common;

use carnot_ld::bound_opt::general_figure_of_merit;
use carnot_ld::cycle_opt::{
    asymmetric_bounds, max_power_asymmetric_closed_form, power_at_efficiency_closed_form, BathPair,
};
use carnot_ld::metrics::{
    entropy_gradient, kmb_metric, lindblad_metric, multiscale_metric, ControlBasis, GeneratorModel,
    MetricRecipe,
};
use carnot_ld::protocol::{integrate_dissipation, ControlProtocol};
use carnot_ld::scaling::criticality_check;
use carnot_ld::superops::Superoperator;
use carnot_ld::thermo_core::{gibbs_point, kmb_covariance, HermitianOperator};
use common::{diagonal, hermitian, log_z_hessian, min_eigenvalue};
use proptest::prelude::*;

fn entries(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.5f64..1.5, n * n),
        prop::collection::vec(-1.5f64..1.5, n * n),
    )
}

fn basis2(n: usize) -> impl Strategy<Value = ControlBasis> {
    (entries(n), entries(n)).prop_filter_map("independent controls", move |(a, b)| {
        let ops = vec![hermitian(n, &a.0, &a.1), hermitian(n, &b.0, &b.1)];
        ControlBasis::unlabeled(ops).ok()
    })
}

fn diag_basis(n: usize, k: usize) -> impl Strategy<Value = ControlBasis> {
    prop::collection::vec(prop::collection::vec(0.0f64..2.0, n), k).prop_filter_map(
        "independent diagonal controls",
        |ds| ControlBasis::unlabeled(ds.iter().map(|d| diagonal(d)).collect()).ok(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kmb_covariance_is_symmetric_bilinear_positive(
        g in entries(3), a in entries(3), b in entries(3), c in entries(3),
        x in -2.0f64..2.0, y in -2.0f64..2.0,
    ) {
        let p = gibbs_point(&hermitian(3, &g.0, &g.1));
        let (a, b, c) = (hermitian(3, &a.0, &a.1), hermitian(3, &b.0, &b.1), hermitian(3, &c.0, &c.1));
        let ab = kmb_covariance(&p, &a, &b).unwrap();
        let ba = kmb_covariance(&p, &b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12 * (1.0 + ab.abs()));
        let mix = HermitianOperator::linear_combination(&[a.clone(), b.clone()], &[x, y]).unwrap();
        let lhs = kmb_covariance(&p, &mix, &c).unwrap();
        let rhs = x * kmb_covariance(&p, &a, &c).unwrap() + y * kmb_covariance(&p, &b, &c).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));
        prop_assert!(kmb_covariance(&p, &a, &a).unwrap() >= -1e-13);
    }

    #[test]
    fn metric_entries_follow_parameter_permutation(basis in diag_basis(4, 3), lam in prop::collection::vec(-1.0f64..1.0, 3)) {
        let perm = [2usize, 0, 1];
        let pb = basis.permuted(&perm).unwrap();
        let plam: Vec<f64> = perm.iter().map(|&i| lam[i]).collect();
        let recipe = MetricRecipe::Lindblad { model: GeneratorModel::Bosonic { ohmicity: 1.0, gamma0: 1.0, temperature: 1.0 } };
        let m = recipe.evaluate(&basis, &lam).unwrap();
        let pm = recipe.evaluate(&pb, &plam).unwrap();
        let s = entropy_gradient(&basis, &lam).unwrap();
        let ps = entropy_gradient(&pb, &plam).unwrap();
        for i in 0..3 {
            prop_assert!((ps[i] - s[perm[i]]).abs() < 1e-12);
            for j in 0..3 {
                let d = pm.matrix()[(i, j)] - m.matrix()[(perm[i], perm[j])];
                prop_assert!(d.abs() < 1e-10 * (1.0 + m.matrix().norm()));
            }
        }
    }

    #[test]
    fn power_decreases_above_curzon_ahlborn(tc in 0.05f64..0.95, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let baths = BathPair::new(1.0, tc).unwrap();
        let g0 = baths.gamma_ca();
        let (lo, hi) = (u.min(v), u.max(v));
        let g1 = g0 + (1.0 - g0) * lo;
        let g2 = g0 + (1.0 - g0) * hi;
        let p1 = power_at_efficiency_closed_form(1.0, 1.0, baths, g1);
        let p2 = power_at_efficiency_closed_form(1.0, 1.0, baths, g2);
        prop_assert!(p1 >= p2 - 1e-15);
    }

    #[test]
    fn criticality_margin_flips_under_reflection(alpha in -3.0f64..3.0, nu in 0.1f64..3.0, z in -3.0f64..3.0) {
        let v = criticality_check(alpha, nu, z);
        // Reflect (alpha_c, z nu) through alpha_c - z nu = 1.
        let zn = z * nu;
        let (alpha_r, zn_r) = (zn + 1.0, alpha - 1.0);
        let r = criticality_check(alpha_r, nu, zn_r / nu);
        prop_assert!((v.margin + r.margin).abs() < 1e-12);
        prop_assert!(v.margin == 0.0 || v.supralinear != r.supralinear);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn kmb_metric_is_log_partition_hessian(basis in basis2(3), lam in prop::collection::vec(-1.0f64..1.0, 2), tau in 0.2f64..3.0) {
        let m = kmb_metric(&basis, &lam, tau).unwrap();
        let h = log_z_hessian(basis.operators(), &lam, 1e-3);
        let scale = h.norm().max(1e-12);
        let diff = (m.matrix() / tau - &h).norm();
        prop_assert!(diff <= 1e-5 * scale, "diff {diff} scale {scale}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_are_positive_semidefinite(
        basis in basis2(3),
        diag in diag_basis(3, 2),
        lam in prop::collection::vec(-1.5f64..1.5, 2),
        taus in prop::collection::vec(0.1f64..3.0, 2),
        alpha in 0.0f64..3.0,
    ) {
        let check = |m: &nalgebra::DMatrix<f64>| min_eigenvalue(m) >= -1e-9 * (1.0 + m.norm());
        prop_assert!(check(kmb_metric(&basis, &lam, taus[0]).unwrap().matrix()));
        // Unequal timescales on strongly correlated controls give an indefinite
        // form, which is refused rather than returned.
        match multiscale_metric(&basis, &lam, &taus) {
            Ok(m) => prop_assert!(check(m.matrix())),
            Err(e) => prop_assert!(matches!(e, carnot_ld::Error::Numerical(_)), "{e}"),
        }
        let point = basis.point(&lam).unwrap();
        let l = Superoperator::bosonic(&point, alpha, 1.0, 1.0).unwrap();
        prop_assert!(check(lindblad_metric(&basis, &lam, &l).unwrap().matrix()));
        let recipe = MetricRecipe::Lindblad { model: GeneratorModel::Bosonic { ohmicity: alpha, gamma0: 1.0, temperature: 1.0 } };
        prop_assert!(check(recipe.evaluate(&diag, &lam).unwrap().matrix()));
    }
}

fn trapezoid(v: &[f64]) -> f64 {
    let h = 1.0 / (v.len() - 1) as f64;
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
}

/// Random smooth commuting protocol: `lambda(s) = a + b s + c sin(pi s)`.
fn commuting_protocol() -> impl Strategy<Value = (ControlProtocol, Vec<f64>)> {
    (
        diag_basis(3, 2),
        prop::collection::vec(-1.5f64..1.5, 6),
        prop_oneof![
            (0.2f64..3.0).prop_map(|t| MetricRecipe::Kmb { tau_eq: t }),
            prop::collection::vec(0.2f64..3.0, 2).prop_map(|taus| MetricRecipe::Multiscale { taus }),
            (0.0f64..2.0).prop_map(|a| MetricRecipe::Lindblad {
                model: GeneratorModel::Bosonic { ohmicity: a, gamma0: 1.0, temperature: 1.0 }
            }),
        ],
    )
        .prop_filter_map("valid protocol", |(basis, c, recipe)| {
            let m = 41;
            let samples: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    let s = i as f64 / (m - 1) as f64;
                    (0..2)
                        .map(|j| c[j] + c[2 + j] * s + c[4 + j] * (std::f64::consts::PI * s).sin())
                        .collect()
                })
                .collect();
            let merit: Vec<f64> = samples
                .iter()
                .map(|lam| {
                    let metric = recipe.evaluate(&basis, lam).ok()?;
                    general_figure_of_merit(&basis, lam, &metric).ok()
                })
                .collect::<Option<_>>()?;
            let p = ControlProtocol::new(basis, samples, recipe).ok()?;
            Some((p, merit))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn entropy_dissipation_tradeoff_bound((p, merit) in commuting_protocol()) {
        let d = integrate_dissipation(&p).unwrap();
        let bound = trapezoid(&merit);
        prop_assume!(d.sigma > 0.0);
        prop_assert!(d.delta_s * d.delta_s / d.sigma <= bound + 1e-8,
            "{} > {}", d.delta_s * d.delta_s / d.sigma, bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn asymmetric_power_within_bounds(
        ds in 0.01f64..10.0, sc in 0.01f64..10.0, sh in 0.01f64..10.0, tc in 0.05f64..0.99,
    ) {
        let baths = BathPair::new(1.0, tc).unwrap();
        let p = max_power_asymmetric_closed_form(ds, sc, sh, baths);
        let b = asymmetric_bounds(ds, sc, sh, baths).unwrap();
        let tol = 1e-12 * p;
        prop_assert!(b.lower <= p + tol && p <= b.upper + tol, "{} <= {} <= {}", b.lower, p, b.upper);
    }
}
