//! Helpers shared by the integration tests.
#![allow(dead_code)]

use gfrac::solver::{Case, ProblemData};
use gfrac::{Discretization, GridFunction, Mesh};
use nalgebra::{DMatrix, DVector};

/// Newton on the full system `∇M_h(u) = w f_n (u + 1/n)^{-q}` with the
/// right-hand side differentiated in the Jacobian.
pub fn coupled_newton(disc: &Discretization, data: &ProblemData, n: u32) -> GridFunction {
    let mesh = disc.mesh();
    let m = mesh.len();
    let w = mesh.weights().to_vec();
    let inv = 1.0 / n as f64;
    let f = data.f_n(n);
    let (fv, qv) = (f.values().to_vec(), data.q.values().to_vec());
    let residual = |u: &GridFunction| -> DVector<f64> {
        let g = disc.gradient(u).unwrap();
        DVector::from_iterator(
            m - 2,
            (1..m - 1).map(|k| g[k] - w[k] * fv[k] / (u.values()[k].max(0.0) + inv).powf(qv[k])),
        )
    };
    let mut u = GridFunction::from_fn_zero_bc(mesh, |x| 0.5 * (1.0 - x * x)).unwrap();
    let mut r = residual(&u);
    for _ in 0..100 {
        if r.amax() < 1e-13 {
            break;
        }
        let mut jac: DMatrix<f64> = disc.hessian(&u).unwrap();
        for k in 1..m - 1 {
            let v = u.values()[k].max(0.0) + inv;
            jac[(k - 1, k - 1)] += w[k] * qv[k] * fv[k] * v.powf(-qv[k] - 1.0);
        }
        let step = jac.lu().solve(&r).unwrap();
        let mut t = 1.0;
        loop {
            let mut trial = u.clone();
            for k in 1..m - 1 {
                trial.values_mut()[k] -= t * step[k - 1];
            }
            let rt = residual(&trial);
            if rt.amax() < r.amax() || t < 1e-6 {
                u = trial;
                r = rt;
                break;
            }
            t *= 0.5;
        }
    }
    assert!(r.amax() < 1e-12, "coupled Newton did not converge: {}", r.amax());
    u
}

pub fn smoke_data(mesh: &Mesh) -> ProblemData {
    let f = GridFunction::from_fn(mesh, |_| 1.0).unwrap();
    let q = GridFunction::from_fn(mesh, |_| 0.5).unwrap();
    ProblemData::new(f, q, 2.0, 0.25, Case::Main1).unwrap()
}
