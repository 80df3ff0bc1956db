//! Independent reference computations for the discrete operator, the solver
//! and the Young-function calculus.

use gfrac::orlicz::{modular_w, poincare_ratio};
use gfrac::quad::{integrate, GaussLegendre};
use gfrac::solver;
use gfrac::verify;
use gfrac::{Discretization, GridFunction, Mesh, OperatorConfig, YoungFunction};

mod common;
use common::{coupled_newton, smoke_data};

fn p4() -> YoungFunction {
    YoungFunction::power(4.0).unwrap()
}

/// Modular of the hat `1 - |x|` for `G(t) = t^p / p`, by pieces:
/// same-side pairs in closed form, opposite-side pairs by a 64x64 block
/// Gauss rule, exterior by adaptive quadrature of the explicit formula.
fn hat_modular_reference(p: f64, s: f64) -> f64 {
    let a = p * (1.0 - s) - 1.0;
    let same = 2.0 * (2.0 / ((a + 1.0) * (a + 2.0))) / p;
    let gl = GaussLegendre::new(40);
    let k = 64;
    let mut opp = 0.0;
    for bi in 0..k {
        for bj in 0..k {
            let x0 = -1.0 + bi as f64 / k as f64;
            let y0 = bj as f64 / k as f64;
            for (x, wx) in gl.mapped(x0, x0 + 1.0 / k as f64) {
                for (y, wy) in gl.mapped(y0, y0 + 1.0 / k as f64) {
                    let d = y - x;
                    opp += wx * wy * ((x + y).abs() / d.powf(s)).powf(p) / p / d;
                }
            }
        }
    }
    let ext = 2.0 / s
        * integrate(
            |x: f64| (1.0 - x.abs()).powf(p) * ((1.0 - x).powf(-s * p) + (1.0 + x).powf(-s * p)) / (p * p),
            -1.0,
            1.0,
            1e-12,
        )
        .unwrap()
        .value;
    same + 2.0 * opp + ext
}

#[test]
fn hat_modular_matches_reference() {
    let exact = hat_modular_reference(4.0, 0.3);
    let mut errs = Vec::new();
    for m in [33, 65, 129, 257] {
        let mesh = Mesh::new(m).unwrap();
        let u = GridFunction::from_fn_zero_bc(&mesh, |x| 1.0 - x.abs()).unwrap();
        errs.push((modular_w(&u, &p4(), 0.3).unwrap() - exact).abs() / exact);
    }
    assert!(errs[0] < 0.02, "{errs:?}");
    assert!(errs[3] < 2e-4, "{errs:?}");
    for w in errs.windows(2) {
        let rate = w[0] / w[1];
        assert!(rate > 3.5 && rate < 4.5, "{errs:?}");
    }
}

#[test]
fn constant_profile_scales_with_power() {
    let mesh = Mesh::new(33).unwrap();
    let u = GridFunction::from_fn_zero_bc(&mesh, |x| (1.0 - x * x) * (1.0 + 0.5 * x)).unwrap();
    let a = modular_w(&u, &p4(), 0.3).unwrap();
    let b = modular_w(&u.scaled(3.0), &p4(), 0.3).unwrap();
    assert!((b - 81.0 * a).abs() < 1e-11 * b);
}

#[test]
fn conjugate_closed_form_for_power() {
    for p in [3.0, 4.0, 5.0] {
        let yf = YoungFunction::power(p).unwrap();
        let q = p / (p - 1.0);
        for t in [1e-3f64, 0.1, 1.0, 7.5, 1e3] {
            let want = t.powf(q) / q;
            let got = yf.eval_gbar(t).unwrap();
            assert!((got - want).abs() <= 1e-9 * want, "p={p} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn near_band_doubling_changes_little() {
    let mesh = Mesh::new(65).unwrap();
    let cfg = OperatorConfig::new(p4(), 0.3).unwrap();
    let d1 = Discretization::new(&cfg, &mesh).unwrap();
    let d2 = Discretization::new(&cfg.clone().with_near_band(2).unwrap(), &mesh).unwrap();
    for f in [|x: f64| 1.0 - x.abs(), |x: f64| 1.0 - x * x, |x: f64| (std::f64::consts::PI * x).sin()] {
        let u = GridFunction::from_fn_zero_bc(&mesh, f).unwrap();
        let (a, b) = (d1.modular(&u).unwrap(), d2.modular(&u).unwrap());
        assert!((a - b).abs() < 5e-3 * a, "{a} vs {b}");
    }
}

#[test]
fn poincare_ratio_is_bounded_and_mesh_stable() {
    let corpus: [fn(f64) -> f64; 4] = [
        |x| 1.0 - x.abs(),
        |x| 1.0 - x * x,
        |x| (std::f64::consts::PI * x).sin(),
        |x| (1.0 - x * x).powi(2) * (1.0 + x),
    ];
    let cfg = OperatorConfig::new(p4(), 0.3).unwrap();
    let coarse = Discretization::new(&cfg, &Mesh::new(33).unwrap()).unwrap();
    let fine = Discretization::new(&cfg, &Mesh::new(65).unwrap()).unwrap();
    for f in corpus {
        let a = poincare_ratio(&coarse, &GridFunction::from_fn_zero_bc(coarse.mesh(), f).unwrap()).unwrap();
        let b = poincare_ratio(&fine, &GridFunction::from_fn_zero_bc(fine.mesh(), f).unwrap()).unwrap();
        assert!(a > 0.0 && a < 1.0, "{a}");
        assert!((a - b).abs() < 0.05 * b, "{a} vs {b}");
        // power G: ratio is scale invariant
        let u = GridFunction::from_fn_zero_bc(coarse.mesh(), f).unwrap();
        let c = poincare_ratio(&coarse, &u.scaled(5.0)).unwrap();
        assert!((a - c).abs() < 1e-12 * a);
    }
}

#[test]
fn auxiliary_solution_doubles_by_homogeneity() {
    let mesh = Mesh::new(33).unwrap();
    let cfg = OperatorConfig::new(p4(), 0.3).unwrap();
    let f = GridFunction::from_fn(&mesh, |x| 1.0 + 0.5 * x.cos()).unwrap();
    let u = solver::solve_auxiliary(&cfg, &f).unwrap();
    let v = solver::solve_auxiliary(&cfg, &f.scaled(2.0)).unwrap();
    let want = u.scaled(2f64.powf(1.0 / 3.0));
    assert!(v.axpy(-1.0, &want).sup_norm() < 1e-6);
}

#[test]
fn fixed_point_matches_coupled_newton() {
    let mesh = Mesh::new(33).unwrap();
    let cfg = OperatorConfig::new(p4(), 0.3).unwrap();
    let disc = Discretization::new(&cfg, &mesh).unwrap();
    let data = smoke_data(&mesh);
    for n in [1, 4] {
        let fp = solver::fixed_point_s(&cfg, &data, n).unwrap();
        let direct = coupled_newton(&disc, &data, n);
        assert!(fp.axpy(-1.0, &direct).sup_norm() < 1e-6);
    }
}

#[test]
fn ordered_data_give_ordered_solutions() {
    let mesh = Mesh::new(33).unwrap();
    let cfg = OperatorConfig::new(YoungFunction::double_power(3.0, 4.0).unwrap(), 0.4).unwrap();
    let out = verify::check_comparison(&cfg, &mesh, 5, 7).unwrap();
    assert!(out.pass, "{out:?}");
}

#[test]
fn holder_fit_calibration() {
    let mesh = Mesh::new(257).unwrap();
    for (alpha, f) in [(0.5, (|x: f64| x.abs().sqrt()) as fn(f64) -> f64), (1.0, |x: f64| x.abs())] {
        let u = GridFunction::from_fn(&mesh, f).unwrap();
        let (a, q) = solver::holder_exponent_fit(&u);
        assert!((a - alpha).abs() < 0.05, "alpha {alpha}: fitted {a}");
        assert!(q > 0.0 && q.is_finite());
    }
    let smooth = GridFunction::from_fn(&mesh, |x| x).unwrap();
    assert!((solver::holder_exponent_fit(&smooth).0 - 1.0).abs() < 1e-9);
}
