//! Monotone approximation of `(-Δ_g)^s u = f u^{-q(x)}` on (-1, 1).
//!
//! The bounded auxiliary problem is solved by damped Newton on the nodal
//! system `∇M_h(u) = w F`; the truncated singular problem by the fixed-point
//! map `S`; the singular problem by letting `n` grow along a schedule.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{GridFunction, Mesh};
use crate::nonlocal::{Discretization, OperatorConfig};
use crate::orlicz::luxemburg_seminorm_w_with;
use crate::young::PhiWeight;

pub const NEWTON_MAX_ITER: usize = 200;
pub const FIXED_POINT_MAX_ITER: usize = 500;
pub const FIXED_POINT_TOL: f64 = 1e-8;
pub const TOL_MONO: f64 = 1e-7;
pub const CAUCHY_TOL: f64 = 1e-6;
const LINE_SEARCH_HALVINGS: usize = 30;

/// Tolerances of the fixed-point and monotone iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    /// Outer stopping rule `‖u^{(k+1)} - u^{(k)}‖_∞ ≤ fixed_point_tol`.
    pub fixed_point_tol: f64,
    /// Inner residual tolerance factor: `‖r‖_∞ ≤ inner_tol (1 + ‖F‖_∞)`.
    pub inner_tol: f64,
    pub tol_mono: f64,
    pub cauchy_tol: f64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self { fixed_point_tol: FIXED_POINT_TOL, inner_tol: 1e-12, tol_mono: TOL_MONO, cauchy_tol: CAUCHY_TOL }
    }
}
const PICARD_AFTER: usize = 5;

/// Which boundary regime the data fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// `q ≤ 1` on the boundary strip.
    Main1,
    /// `q ≤ q*` on the boundary strip with `q* > 1`; energy measured on `Φ(u)`.
    Main2,
}

#[derive(Debug, Clone)]
pub struct ProblemData {
    pub f: GridFunction,
    pub q: GridFunction,
    pub q_star: f64,
    /// Width of the boundary strip `Ω_δ = {x : 1 - |x| < δ}`.
    pub delta: f64,
    pub case: Case,
}

impl ProblemData {
    pub fn new(f: GridFunction, q: GridFunction, q_star: f64, delta: f64, case: Case) -> Result<Self> {
        if f.len() != q.len() {
            return Err(Error::Config("f and q live on different meshes".into()));
        }
        if let Some(v) = f.values().iter().find(|&&v| v < 0.0) {
            return Err(Error::Config(format!("datum f must be nonnegative, found {v}")));
        }
        if let Some(v) = q.values().iter().find(|&&v| v < 0.0) {
            return Err(Error::Config(format!("exponent q must be nonnegative, found {v}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Config(format!("boundary strip width delta must lie in (0, 1], got {delta}")));
        }
        let mesh = f.mesh();
        let strip_max = (0..mesh.len())
            .filter(|&i| 1.0 - mesh.x(i).abs() < delta)
            .map(|i| q.values()[i])
            .fold(0.0, f64::max);
        match case {
            Case::Main1 if strip_max > 1.0 => {
                return Err(Error::Config(format!(
                    "case main1 needs q <= 1 on the boundary strip of width {delta}, found max {strip_max}"
                )))
            }
            Case::Main2 if !(q_star > 1.0) => {
                return Err(Error::Config(format!("case main2 needs q* > 1, got {q_star}")))
            }
            Case::Main2 if strip_max > q_star => {
                return Err(Error::Config(format!(
                    "case main2 needs q <= q* = {q_star} on the boundary strip of width {delta}, found max {strip_max}"
                )))
            }
            _ => {}
        }
        Ok(Self { f, q, q_star, delta, case })
    }

    pub fn mesh(&self) -> &Mesh {
        self.f.mesh()
    }

    /// `f_n = min(f, n)`.
    pub fn f_n(&self, n: u32) -> GridFunction {
        let cap = n as f64;
        self.f.map(|v| v.min(cap))
    }

    /// Frozen right-hand side `f_n / (u⁺ + 1/n)^q`.
    pub fn rhs(&self, n: u32, u: &GridFunction) -> GridFunction {
        let inv = 1.0 / n as f64;
        let cap = n as f64;
        let values = self
            .f
            .values()
            .iter()
            .zip(self.q.values())
            .zip(u.values())
            .map(|((&f, &q), &v)| f.min(cap) / (v.max(0.0) + inv).powf(q))
            .collect();
        GridFunction::new(self.mesh().clone(), values).expect("finite right-hand side")
    }
}

/// Outcome of one auxiliary solve.
#[derive(Debug, Clone)]
pub struct AuxSolve {
    pub u: GridFunction,
    pub iterations: usize,
    /// `‖r‖_∞` before each iteration and at the end.
    pub history: Vec<f64>,
    pub picard_steps: usize,
}

/// Solve `residual(u, F) = 0` with the default tolerance `1e-8 (1 + ‖F‖_∞)`.
pub fn solve_auxiliary(cfg: &OperatorConfig, rhs: &GridFunction) -> Result<GridFunction> {
    let disc = Discretization::new(cfg, rhs.mesh())?;
    let tol = 1e-8 * (1.0 + rhs.sup_norm());
    solve_auxiliary_with(&disc, rhs, None, tol).map(|s| s.u)
}

/// Damped Newton for `∇M_h(u) = w F` from `guess` (or a scaled
/// `(1 - x²)^s` profile), stopping at `‖r‖_∞ ≤ tol`.
pub fn solve_auxiliary_with(
    disc: &Discretization,
    rhs: &GridFunction,
    guess: Option<&GridFunction>,
    tol: f64,
) -> Result<AuxSolve> {
    let mesh = disc.mesh();
    if rhs.len() != mesh.len() {
        return Err(Error::Config("right-hand side lives on a different mesh".into()));
    }
    if let Some(v) = rhs.values().iter().find(|&&v| v < 0.0) {
        return Err(Error::Domain(format!("auxiliary right-hand side must be nonnegative, found {v}")));
    }
    let m = mesh.len();
    let w = mesh.weights();
    let load: Vec<f64> = (0..m).map(|k| w[k] * rhs.values()[k]).collect();
    if load[1..m - 1].iter().all(|&v| v == 0.0) {
        return Ok(AuxSolve { u: GridFunction::zeros(mesh), iterations: 0, history: vec![0.0], picard_steps: 0 });
    }

    let mut u = match guess {
        Some(g) if g.values()[1..m - 1].iter().any(|&v| v != 0.0) => {
            let mut g = g.clone();
            g.values_mut()[0] = 0.0;
            g.values_mut()[m - 1] = 0.0;
            g
        }
        _ => initial_profile(disc, &load)?,
    };

    let res_norm = |u: &GridFunction| -> Result<(Vec<f64>, f64)> {
        let grad = disc.gradient(u)?;
        let r: Vec<f64> = (1..m - 1).map(|k| grad[k] - load[k]).collect();
        let n = r.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        Ok((r, n))
    };

    let (mut r, mut norm) = res_norm(&u)?;
    let mut history = vec![norm];
    let mut failed_searches = 0;
    let mut picard_steps = 0;
    for it in 0..NEWTON_MAX_ITER {
        if norm <= tol {
            return Ok(AuxSolve { u, iterations: it, history, picard_steps });
        }
        let step = newton_direction(&disc.hessian(&u)?, &r)?;
        let mut accepted = None;
        let mut lambda = 1.0;
        for _ in 0..LINE_SEARCH_HALVINGS {
            let trial = shifted(&u, &step, -lambda)?;
            let (rt, nt) = res_norm(&trial)?;
            if nt < norm {
                accepted = Some((trial, rt, nt));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, rt, nt)) => {
                u = trial;
                r = rt;
                norm = nt;
            }
            None => {
                failed_searches += 1;
                if failed_searches >= PICARD_AFTER {
                    u = picard_step(disc, &u, &load)?;
                    picard_steps += 1;
                    let (rt, nt) = res_norm(&u)?;
                    r = rt;
                    norm = nt;
                } else {
                    // take the smallest step anyway to leave a stagnation point
                    u = shifted(&u, &step, -lambda)?;
                    let (rt, nt) = res_norm(&u)?;
                    r = rt;
                    norm = nt;
                }
            }
        }
        history.push(norm);
    }
    if norm <= tol {
        return Ok(AuxSolve { u, iterations: NEWTON_MAX_ITER, history, picard_steps });
    }
    Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, last: norm, history })
}

/// `t (1 - x²)^s` with `t` matching the load along that profile.
fn initial_profile(disc: &Discretization, load: &[f64]) -> Result<GridFunction> {
    let s = disc.config().s;
    let phi = GridFunction::from_fn_zero_bc(disc.mesh(), |x| (1.0 - x * x).powf(s))?;
    let target: f64 = load.iter().zip(phi.values()).map(|(l, p)| l * p).sum();
    let along = |t: f64| -> Result<f64> { disc.weak_form(&phi.scaled(t), &phi) };
    let (mut lo, mut hi) = (1e-8f64, 1.0f64);
    while along(hi)? < target {
        hi *= 4.0;
        if hi > 1e300 {
            return Err(Error::Numeric("initial guess bracket overflow".into()));
        }
    }
    while along(lo)? > target {
        lo *= 0.25;
        if lo < 1e-300 {
            break;
        }
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if along(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    Ok(phi.scaled((lo * hi).sqrt()))
}

fn newton_direction(jac: &DMatrix<f64>, r: &[f64]) -> Result<DVector<f64>> {
    let rhs = DVector::from_column_slice(r);
    if let Some(ch) = jac.clone().cholesky() {
        return Ok(ch.solve(&rhs));
    }
    let scale = jac.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut mu = 1e-12 * scale;
    for _ in 0..30 {
        let shifted = jac + DMatrix::identity(jac.nrows(), jac.ncols()) * mu;
        if let Some(ch) = shifted.cholesky() {
            return Ok(ch.solve(&rhs));
        }
        mu *= 10.0;
    }
    Err(Error::Numeric("Newton matrix could not be regularized to positive definite".into()))
}

/// Frozen-coefficient step `u ← A(u)^{-1} w F`.
fn picard_step(disc: &Discretization, u: &GridFunction, load: &[f64]) -> Result<GridFunction> {
    let a = disc.secant_matrix(u)?;
    let m = u.len();
    let sol = newton_direction(&a, &load[1..m - 1])?;
    let mut values = vec![0.0; m];
    values[1..m - 1].copy_from_slice(sol.as_slice());
    GridFunction::new(u.mesh().clone(), values)
}

fn shifted(u: &GridFunction, step: &DVector<f64>, lambda: f64) -> Result<GridFunction> {
    let mut values = u.values().to_vec();
    for (k, d) in step.iter().enumerate() {
        values[k + 1] += lambda * d;
    }
    GridFunction::new(u.mesh().clone(), values)
}

/// Converged fixed point of `S` for one `n`.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub u: GridFunction,
    pub iterations: usize,
    /// `‖u^{(k+1)} - u^{(k)}‖_∞` per outer step.
    pub cauchy: Vec<f64>,
    /// Right-hand side frozen at the last step.
    pub last_rhs: GridFunction,
    /// Residual of the last inner solve.
    pub residual: f64,
}

/// Iterate `u ← solve_auxiliary(f_n / (u⁺ + 1/n)^q)` from `u ≡ 0`.
pub fn fixed_point_s(cfg: &OperatorConfig, data: &ProblemData, n: u32) -> Result<GridFunction> {
    let disc = Discretization::new(cfg, data.mesh())?;
    fixed_point_s_with(&disc, data, n).map(|fp| fp.u)
}

pub fn fixed_point_s_with(disc: &Discretization, data: &ProblemData, n: u32) -> Result<FixedPoint> {
    fixed_point_s_opts(disc, data, n, &SchemeOptions::default())
}

pub fn fixed_point_s_opts(disc: &Discretization, data: &ProblemData, n: u32, opts: &SchemeOptions) -> Result<FixedPoint> {
    if n == 0 {
        return Err(Error::Config("truncation level n must be at least 1".into()));
    }
    let mesh = data.mesh();
    let mut u = GridFunction::zeros(mesh);
    let mut cauchy = Vec::new();
    let mut guess: Option<GridFunction> = None;
    for k in 1..=FIXED_POINT_MAX_ITER {
        let rhs = data.rhs(n, &u);
        // inner solves are tighter than the outer Cauchy tolerance
        let tol = opts.inner_tol * (1.0 + rhs.sup_norm());
        let inner = solve_auxiliary_with(disc, &rhs, guess.as_ref(), tol)?;
        let diff = inner.u.axpy(-1.0, &u).sup_norm();
        cauchy.push(diff);
        guess = Some(inner.u.clone());
        u = inner.u;
        if diff <= opts.fixed_point_tol {
            return Ok(FixedPoint {
                u,
                iterations: k,
                cauchy,
                last_rhs: rhs,
                residual: inner.history.last().copied().unwrap_or(0.0),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: FIXED_POINT_MAX_ITER,
        last: cauchy.last().copied().unwrap_or(f64::NAN),
        history: cauchy,
    })
}

/// Output of [`monotone_scheme`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub n_schedule: Vec<u32>,
    pub snapshots: Vec<GridFunction>,
    pub fixed_point_iterations: Vec<usize>,
    pub cauchy_histories: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub last_rhs: Vec<GridFunction>,
    /// `min` of `u_n` over the middle-half nodes.
    pub lower_bounds: Vec<f64>,
    /// `‖u_{n_{k+1}} - u_{n_k}‖_∞`.
    pub increments: Vec<f64>,
    pub converged: bool,
    pub holder: (f64, f64),
}

impl SolveReport {
    pub fn solution(&self) -> &GridFunction {
        self.snapshots.last().expect("report holds at least one snapshot")
    }
}

pub fn monotone_scheme(cfg: &OperatorConfig, data: &ProblemData, n_schedule: &[u32]) -> Result<SolveReport> {
    monotone_scheme_with(cfg, data, n_schedule, &SchemeOptions::default())
}

pub fn monotone_scheme_with(
    cfg: &OperatorConfig,
    data: &ProblemData,
    n_schedule: &[u32],
    opts: &SchemeOptions,
) -> Result<SolveReport> {
    if n_schedule.is_empty() {
        return Err(Error::Config("n_schedule must not be empty".into()));
    }
    if n_schedule.windows(2).any(|w| w[1] <= w[0]) || n_schedule[0] == 0 {
        return Err(Error::Config(format!("n_schedule must be strictly increasing positive integers, got {n_schedule:?}")));
    }
    let disc = Discretization::new(cfg, data.mesh())?;
    let middle = data.mesh().middle_half();
    let f_nonzero = data.f.values().iter().any(|&v| v > 0.0);

    let mut report = SolveReport {
        n_schedule: n_schedule.to_vec(),
        snapshots: Vec::new(),
        fixed_point_iterations: Vec::new(),
        cauchy_histories: Vec::new(),
        residuals: Vec::new(),
        last_rhs: Vec::new(),
        lower_bounds: Vec::new(),
        increments: Vec::new(),
        converged: false,
        holder: (1.0, 0.0),
    };
    for &n in n_schedule {
        let fp = fixed_point_s_opts(&disc, data, n, opts)?;
        if let Some(prev) = report.snapshots.last() {
            let prev: &GridFunction = prev;
            let worst = prev
                .values()
                .iter()
                .zip(fp.u.values())
                .enumerate()
                .map(|(i, (a, b))| (i, a - b))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            if worst.1 > opts.tol_mono {
                return Err(Error::Invariant(format!(
                    "monotonicity u_n <= u_(n+1) violated between n = {} and n = {n} at x = {:.6}: {:.12e} > {:.12e}\nprevious: {:?}\ncurrent: {:?}",
                    report.n_schedule[report.snapshots.len() - 1],
                    data.mesh().x(worst.0),
                    prev.values()[worst.0],
                    fp.u.values()[worst.0],
                    prev.values(),
                    fp.u.values()
                )));
            }
            let inc = fp.u.axpy(-1.0, prev).sup_norm();
            report.increments.push(inc);
            if inc <= opts.cauchy_tol {
                report.converged = true;
            }
        }
        let l = middle.iter().map(|&i| fp.u.values()[i]).fold(f64::INFINITY, f64::min);
        if f_nonzero && !(l > 0.0) {
            return Err(Error::Invariant(format!("interior lower bound l(K) = {l:e} is not positive at n = {n}")));
        }
        report.lower_bounds.push(l);
        report.fixed_point_iterations.push(fp.iterations);
        report.cauchy_histories.push(fp.cauchy);
        report.residuals.push(fp.residual);
        report.last_rhs.push(fp.last_rhs);
        report.snapshots.push(fp.u);
    }
    if !f_nonzero {
        report.converged = true;
    }
    report.holder = holder_exponent_fit(report.solution());
    Ok(report)
}

/// `min` over interior nodes of `(-Δ_g)^s v_α` for the tents `v_α = α(1 - |x|)`.
///
/// Fails with an invariant error when the minima are not strictly
/// increasing in `α`.
pub fn barrier_check(cfg: &OperatorConfig, mesh: &Mesh, alphas: &[f64]) -> Result<Vec<f64>> {
    let mins = barrier_minima(cfg, mesh, alphas)?;
    if let Some(k) = (1..mins.len()).find(|&k| mins[k] <= mins[k - 1]) {
        return Err(Error::Invariant(format!(
            "barrier minima are not increasing: alpha {} -> {:.6e}, alpha {} -> {:.6e} (all minima {mins:?})",
            alphas[k - 1],
            mins[k - 1],
            alphas[k],
            mins[k]
        )));
    }
    Ok(mins)
}

/// The minima of [`barrier_check`] without the monotonicity assertion.
pub fn barrier_minima(cfg: &OperatorConfig, mesh: &Mesh, alphas: &[f64]) -> Result<Vec<f64>> {
    if alphas.windows(2).any(|w| w[1] <= w[0]) || alphas.iter().any(|&a| !(a > 1.0)) {
        return Err(Error::Config(format!("barrier alphas must be increasing and > 1, got {alphas:?}")));
    }
    let disc = Discretization::new(cfg, mesh)?;
    alphas
        .iter()
        .map(|&a| {
            let v = GridFunction::from_fn_zero_bc(mesh, |x| a * (1.0 - x.abs()))?;
            Ok(disc.apply_all(&v)?[1..mesh.len() - 1].iter().copied().fold(f64::INFINITY, f64::min))
        })
        .collect()
}

/// `p⁻ α^{p⁻-1} (1-|x|)^{p⁺-1} K(x)` with
/// `K(x) = ∫_{|y|>1} G(|x-y|^{-s}) / |x-y| dy`.
pub fn barrier_lower_bound(cfg: &OperatorConfig, x: f64, alpha: f64) -> f64 {
    let yf = &cfg.yf;
    let s = cfg.s;
    let k = (yf.big_g_over_t_integral((1.0 - x).powf(-s)) + yf.big_g_over_t_integral((1.0 + x).powf(-s))) / s;
    yf.p_minus() * alpha.powf(yf.p_minus() - 1.0) * (1.0 - x.abs()).powf(yf.p_plus() - 1.0) * k
}

/// Diagnostics of the boundary-energy study.
#[derive(Debug, Clone)]
pub struct BoundaryEnergy {
    pub case: Case,
    /// Seminorm of `u_n` (main1) or `Φ(u_n)` (main2) per schedule entry.
    pub seminorms: Vec<f64>,
    pub modulars: Vec<f64>,
    /// `max / min` over the nonzero seminorms.
    pub band: f64,
    /// `r q*` (main2 only).
    pub rq_star: Option<f64>,
    pub bounded: bool,
}

pub fn boundary_energy_report(cfg: &OperatorConfig, report: &SolveReport, data: &ProblemData) -> Result<BoundaryEnergy> {
    boundary_energy_report_with(cfg, report, data, None)
}

/// As [`boundary_energy_report`] with an explicit `r` for the weight `Φ`.
pub fn boundary_energy_report_with(
    cfg: &OperatorConfig,
    report: &SolveReport,
    data: &ProblemData,
    r_override: Option<f64>,
) -> Result<BoundaryEnergy> {
    let disc = Discretization::new(cfg, data.mesh())?;
    let (fields, rq): (Vec<GridFunction>, Option<f64>) = match data.case {
        Case::Main1 => (report.snapshots.clone(), None),
        Case::Main2 => {
            let mut w = PhiWeight::new(cfg.yf.clone(), data.q_star)?;
            if let Some(r) = r_override {
                w = w.with_r(r)?;
            }
            let fields = report
                .snapshots
                .iter()
                .map(|u| u.try_map(|v| w.phi(v.max(0.0))))
                .collect::<Result<Vec<_>>>()?;
            (fields, Some(w.r() * w.q_star()))
        }
    };
    let mut seminorms = Vec::with_capacity(fields.len());
    let mut modulars = Vec::with_capacity(fields.len());
    for u in &fields {
        seminorms.push(luxemburg_seminorm_w_with(&disc, u)?);
        modulars.push(disc.modular(u)?);
    }
    let nonzero: Vec<f64> = seminorms.iter().copied().filter(|&v| v > 0.0).collect();
    let band = if nonzero.is_empty() {
        1.0
    } else {
        nonzero.iter().copied().fold(0.0, f64::max) / nonzero.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let bounded = trend_is_bounded(&seminorms);
    if !bounded {
        return Err(Error::Invariant(format!("boundary energy grows without bound along the schedule: {seminorms:?}")));
    }
    Ok(BoundaryEnergy { case: data.case, seminorms, modulars, band, rq_star: rq, bounded })
}

/// No term exceeds twice the median of the last three, unless the
/// sequence has stopped growing.
fn trend_is_bounded(seq: &[f64]) -> bool {
    if seq.len() < 3 {
        return true;
    }
    let mut last: Vec<f64> = seq[seq.len() - 3..].to_vec();
    last.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = last[1];
    let too_big = seq.iter().any(|&v| v > 2.0 * median);
    let growing = seq[seq.len() - 1] > seq[seq.len() - 2];
    !(too_big && growing)
}

/// Hölder exponent of `u` on the middle half of Ω.
///
/// The modulus of continuity `ω(d) = sup_{|x-y| ≤ d} |u(x) - u(y)|` is taken
/// over node pairs inside the window for `d = k h` up to half the window
/// width; the exponent is the least-squares slope of `log ω` against
/// `log d`, clipped to `(0, 1]`. The second value is `sup |u(x)-u(y)| / |x-y|^α̂`.
pub fn holder_exponent_fit(u: &GridFunction) -> (f64, f64) {
    let mesh = u.mesh();
    let idx = mesh.middle_half();
    let v = u.values();
    let n = idx.len();
    let mut pts = Vec::new();
    let mut osc: f64 = 0.0;
    for k in 1..=n / 2 {
        osc = osc.max((0..n - k).map(|a| (v[idx[a + k]] - v[idx[a]]).abs()).fold(0.0, f64::max));
        if osc > 0.0 {
            pts.push(((k as f64 * mesh.h()).ln(), osc.ln()));
        }
    }
    if pts.len() < 2 {
        return (1.0, 0.0);
    }
    let np = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / np;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / np;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let alpha = (sxy / sxx).clamp(f64::MIN_POSITIVE, 1.0);
    let mut quotient: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let d = mesh.x(idx[b]) - mesh.x(idx[a]);
            quotient = quotient.max((v[idx[b]] - v[idx[a]]).abs() / d.powf(alpha));
        }
    }
    (alpha, quotient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::YoungFunction;

    fn cfg() -> OperatorConfig {
        OperatorConfig::new(YoungFunction::power(4.0).unwrap(), 0.3).unwrap()
    }

    fn smoke(m: usize, f: f64, q: f64, case: Case) -> ProblemData {
        let mesh = Mesh::new(m).unwrap();
        ProblemData::new(
            GridFunction::from_fn(&mesh, |_| f).unwrap(),
            GridFunction::from_fn(&mesh, |_| q).unwrap(),
            2.0,
            0.25,
            case,
        )
        .unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mesh = Mesh::new(17).unwrap();
        let u = solve_auxiliary(&cfg(), &GridFunction::zeros(&mesh)).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
    }

    #[test]
    fn auxiliary_residual_and_sign() {
        let mesh = Mesh::new(33).unwrap();
        let f = GridFunction::from_fn(&mesh, |x| 1.0 + 0.5 * x).unwrap();
        let u = solve_auxiliary(&cfg(), &f).unwrap();
        let r = crate::nonlocal::residual(&cfg(), &u, &f).unwrap();
        assert!(r.sup_norm() <= crate::nonlocal::default_tol_res(&f));
        assert!(u.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn auxiliary_homogeneity() {
        let mesh = Mesh::new(33).unwrap();
        let one = GridFunction::from_fn(&mesh, |_| 1.0).unwrap();
        let u1 = solve_auxiliary(&cfg(), &one).unwrap();
        let u2 = solve_auxiliary(&cfg(), &one.scaled(8.0)).unwrap();
        assert!(u2.axpy(-2.0, &u1).sup_norm() < 1e-6);
    }

    #[test]
    fn data_validation() {
        let mesh = Mesh::new(17).unwrap();
        let one = GridFunction::from_fn(&mesh, |_| 1.0).unwrap();
        let q15 = GridFunction::from_fn(&mesh, |_| 1.5).unwrap();
        assert!(ProblemData::new(one.clone(), q15.clone(), 2.0, 0.25, Case::Main1).is_err());
        assert!(ProblemData::new(one.clone(), q15.clone(), 2.0, 0.25, Case::Main2).is_ok());
        assert!(ProblemData::new(one.clone(), q15.clone(), 1.2, 0.25, Case::Main2).is_err());
        assert!(ProblemData::new(one.scaled(-1.0), q15, 2.0, 0.25, Case::Main2).is_err());
    }

    #[test]
    fn zero_exponent_is_one_step() {
        let data = smoke(17, 1.0, 0.0, Case::Main1);
        let disc = Discretization::new(&cfg(), data.mesh()).unwrap();
        let fp = fixed_point_s_with(&disc, &data, 3).unwrap();
        // the second step only confirms the first
        assert_eq!(fp.iterations, 2);
        let direct = solve_auxiliary(&cfg(), &data.f_n(3)).unwrap();
        assert!(fp.u.axpy(-1.0, &direct).sup_norm() < 1e-8);
    }

    #[test]
    fn zero_datum() {
        let data = smoke(17, 0.0, 0.5, Case::Main1);
        let rep = monotone_scheme(&cfg(), &data, &[1, 2, 4]).unwrap();
        assert!(rep.converged);
        assert!(rep.snapshots.iter().all(|u| u.sup_norm() == 0.0));
        let be = boundary_energy_report(&cfg(), &rep, &data).unwrap();
        assert!(be.seminorms.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn holder_fit_examples() {
        let mesh = Mesh::new(257).unwrap();
        let lin = GridFunction::from_fn(&mesh, |x| x).unwrap();
        let (a, q) = holder_exponent_fit(&lin);
        assert!((a - 1.0).abs() < 1e-9 && q.is_finite());
        let root = GridFunction::from_fn(&mesh, |x| x.abs().sqrt()).unwrap();
        let (a, _) = holder_exponent_fit(&root);
        assert!((a - 0.5).abs() < 0.05, "{a}");
        assert_eq!(holder_exponent_fit(&GridFunction::from_fn(&mesh, |_| 3.0).unwrap()), (1.0, 0.0));
    }

    #[test]
    fn trend_rule() {
        assert!(trend_is_bounded(&[1.0, 1.5, 1.6, 1.6]));
        assert!(!trend_is_bounded(&[1.0, 2.0, 4.0, 8.0, 20.0]));
        assert!(trend_is_bounded(&[5.0, 1.0, 1.1, 1.0]));
    }
}
