//! Randomized invariants of the Young functions, the modulars and the
//! discrete operator.

use std::sync::OnceLock;

use gfrac::orlicz::{holder_sides, luxemburg_norm_lg, luxemburg_seminorm_w_with, modular_lg};
use gfrac::solver::solve_auxiliary;
use gfrac::{Discretization, GridFunction, Mesh, OperatorConfig, YoungFunction};
use proptest::prelude::*;

const M: usize = 17;

fn families() -> Vec<YoungFunction> {
    vec![
        YoungFunction::power(4.0).unwrap(),
        YoungFunction::double_power(3.0, 4.0).unwrap(),
        YoungFunction::log_type(2.0, 2.0, 1.0).unwrap(),
    ]
}

fn discs() -> &'static Vec<Discretization> {
    static D: OnceLock<Vec<Discretization>> = OnceLock::new();
    D.get_or_init(|| {
        let mesh = Mesh::new(M).unwrap();
        families()
            .into_iter()
            .map(|yf| Discretization::new(&OperatorConfig::new(yf, 0.3).unwrap(), &mesh).unwrap())
            .collect()
    })
}

fn zero_bc(values: Vec<f64>) -> GridFunction {
    let mut v = vec![0.0];
    v.extend(values);
    v.push(0.0);
    GridFunction::new(Mesh::new(M).unwrap(), v).unwrap()
}

fn interior() -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-2.0f64..2.0, M - 2).prop_map(zero_bc)
}

fn log_t() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta2_scaling(fam in 0usize..3, t in log_t(), lam in 1.0f64..50.0) {
        let yf = &families()[fam];
        let (g, gl) = (yf.big_g(t), yf.big_g(lam * t));
        prop_assert!(lam.powf(yf.p_minus()) * g <= gl * (1.0 + 1e-9));
        prop_assert!(gl <= lam.powf(yf.p_plus()) * g * (1.0 + 1e-9));
    }

    #[test]
    fn big_g_is_convex(fam in 0usize..3, a in log_t(), b in log_t()) {
        let yf = &families()[fam];
        prop_assert!(yf.big_g(0.5 * (a + b)) <= 0.5 * (yf.big_g(a) + yf.big_g(b)) * (1.0 + 1e-12));
    }

    #[test]
    fn young_inequality(fam in 0usize..3, a in log_t(), b in log_t()) {
        let yf = &families()[fam];
        let rhs = yf.big_g(a) + yf.eval_gbar(b).unwrap();
        prop_assert!(a * b <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn modular_is_convex(fam in 0usize..3, u in interior(), v in interior()) {
        let d = &discs()[fam];
        let mid = u.axpy(1.0, &v).scaled(0.5);
        let (a, b, c) = (d.modular(&u).unwrap(), d.modular(&v).unwrap(), d.modular(&mid).unwrap());
        prop_assert!(c <= 0.5 * (a + b) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn gradient_is_monotone(fam in 0usize..3, u in interior(), v in interior()) {
        let d = &discs()[fam];
        let (gu, gv) = (d.gradient(&u).unwrap(), d.gradient(&v).unwrap());
        let pairing: f64 = (0..M).map(|k| (gu[k] - gv[k]) * (u.values()[k] - v.values()[k])).sum();
        let scale: f64 = (0..M).map(|k| (gu[k].abs() + gv[k].abs()) * (u.values()[k] - v.values()[k]).abs()).sum();
        prop_assert!(pairing >= -1e-12 * scale);
    }

    #[test]
    fn modular_is_coercive(fam in 0usize..3, u in interior(), lam in 1.0f64..20.0) {
        let d = &discs()[fam];
        let yf = &families()[fam];
        let (a, b) = (d.modular(&u).unwrap(), d.modular(&u.scaled(lam)).unwrap());
        prop_assert!(b >= lam.powf(yf.p_minus()) * a * (1.0 - 1e-9));
        prop_assert!(b <= lam.powf(yf.p_plus()) * a * (1.0 + 1e-9));
    }

    #[test]
    fn weak_form_is_linear_in_test_function(
        fam in 0usize..3, u in interior(), phi in interior(), psi in interior(), a in -3.0f64..3.0, b in -3.0f64..3.0
    ) {
        let d = &discs()[fam];
        let combo = phi.scaled(a).axpy(b, &psi);
        let lhs = d.weak_form(&u, &combo).unwrap();
        let rhs = a * d.weak_form(&u, &phi).unwrap() + b * d.weak_form(&u, &psi).unwrap();
        let scale = a.abs() * d.weak_form(&u, &phi).unwrap().abs() + b.abs() * d.weak_form(&u, &psi).unwrap().abs();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn modular_is_even_and_reflection_invariant(fam in 0usize..3, u in interior()) {
        let d = &discs()[fam];
        let neg = u.scaled(-1.0);
        prop_assert!((d.modular(&u).unwrap() - d.modular(&neg).unwrap()).abs() <= 1e-12 * d.modular(&u).unwrap());
        prop_assert!((d.modular(&u).unwrap() - d.modular(&u.reflected()).unwrap()).abs() <= 1e-12 * d.modular(&u).unwrap());
    }

    #[test]
    fn luxemburg_is_homogeneous(fam in 0usize..3, u in interior(), lam in -10.0f64..10.0) {
        prop_assume!(lam.abs() > 1e-3);
        let yf = &families()[fam];
        let a = luxemburg_norm_lg(&u, yf).unwrap();
        let b = luxemburg_norm_lg(&u.scaled(lam), yf).unwrap();
        prop_assert!((b - lam.abs() * a).abs() <= 1e-8 * b);
    }

    #[test]
    fn norm_modular_relation(fam in 0usize..3, u in interior(), lam in 0.05f64..20.0) {
        let yf = &families()[fam];
        let u = u.scaled(lam);
        let n = luxemburg_norm_lg(&u, yf).unwrap();
        let m = modular_lg(&u, yf);
        let (lo, hi) = if n <= 1.0 { (n.powf(yf.p_plus()), n.powf(yf.p_minus())) } else { (n.powf(yf.p_minus()), n.powf(yf.p_plus())) };
        prop_assert!(lo <= m * (1.0 + 1e-7) && m <= hi * (1.0 + 1e-7), "n={} m={}", n, m);
        let d = &discs()[fam];
        let nw = luxemburg_seminorm_w_with(d, &u).unwrap();
        let mw = d.modular(&u).unwrap();
        let (lo, hi) = if nw <= 1.0 { (nw.powf(yf.p_plus()), nw.powf(yf.p_minus())) } else { (nw.powf(yf.p_minus()), nw.powf(yf.p_plus())) };
        prop_assert!(lo <= mw * (1.0 + 1e-7) && mw <= hi * (1.0 + 1e-7), "nw={} mw={}", nw, mw);
    }

    #[test]
    fn orlicz_holder_inequality(fam in 0usize..3, u in interior(), v in interior()) {
        let yf = &families()[fam];
        let h = holder_sides(&u, &v, yf).unwrap();
        prop_assert!(h.product <= 2.0 * h.norm_u * h.norm_v_conj * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn comparison_of_auxiliary_solutions(
        base in prop::collection::vec(0.0f64..2.0, M),
        extra in prop::collection::vec(0.0f64..1.0, M),
        fam in 0usize..3,
    ) {
        prop_assume!(base.iter().any(|&v| v > 0.1));
        let mesh = Mesh::new(M).unwrap();
        let cfg = discs()[fam].config().clone();
        let fu = GridFunction::new(mesh.clone(), base.clone()).unwrap();
        let fv = GridFunction::new(mesh, base.iter().zip(&extra).map(|(a, b)| a + b).collect()).unwrap();
        let u = solve_auxiliary(&cfg, &fu).unwrap();
        let v = solve_auxiliary(&cfg, &fv).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            prop_assert!(*a <= b + 1e-7);
        }
        prop_assert!(u.values().iter().all(|&x| x >= -1e-12));
    }
}
