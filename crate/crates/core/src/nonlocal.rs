//! Discrete fractional g-Laplacian on Ω = (-1, 1) with zero exterior data.
//!
//! The discrete Gagliardo modular is a sum of convex pair terms plus one
//! exterior term per node,
//!
//! ```text
//! M_h(u) = Σ_{i<j} Q_ij(u_i - u_j) + Σ_i D_i(u_i),
//! Q_ij(δ) = Σ_q c_q G(a_q |δ|),
//! D_i(v)  = (2 w_i / s) Σ_{ρ ∈ {1-x_i, 1+x_i}} ∫_0^{|v| ρ^{-s}} G(t)/t dt.
//! ```
//!
//! Far pairs use the trapezoid product rule (`c = 2 w_i w_j / d`,
//! `a = d^{-s}`). Pairs within `near_band` cells replace the difference
//! quotient by the chord slope and integrate the kernel over the product
//! cells exactly in the distance variable; the diagonal cells are shared
//! between the two adjacent mesh cells and use their slope. The exterior
//! integral is done in closed form through the substitution `t = |v| r^{-s}`.
//!
//! The weak form is the directional derivative of `M_h`, so the nodal
//! residual, the Newton Jacobian and the modular all come from one object
//! and inherit its monotonicity and coercivity exactly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::{GridFunction, Mesh};
use crate::quad::GaussLegendre;
use crate::young::{smoothing_beta, YoungFunction};

/// How the exterior integral beyond `|y| = R_far` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    /// Truncate at `R_far` and add the closed-form remainder (exact).
    Analytic,
    /// Truncate at `R_far` and drop the remainder.
    Zero,
}

/// Fractional order and quadrature policy of the discrete operator.
#[derive(Debug, Clone)]
pub struct OperatorConfig {
    pub s: f64,
    pub yf: YoungFunction,
    pub near_band: usize,
    pub r_far: f64,
    pub tail_mode: TailMode,
}

impl OperatorConfig {
    pub fn new(yf: YoungFunction, s: f64) -> Result<Self> {
        let cfg = Self { s, yf, near_band: 1, r_far: 100.0, tail_mode: TailMode::Analytic };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_near_band(mut self, band: usize) -> Result<Self> {
        self.near_band = band;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r_far(mut self, r_far: f64) -> Result<Self> {
        self.r_far = r_far;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tail_mode(mut self, mode: TailMode) -> Self {
        self.tail_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::Config(format!("fractional order s must lie in (0, 1), got {}", self.s)));
        }
        if !(self.r_far > 1.0) {
            return Err(Error::Config(format!("R_far must exceed 1, got {}", self.r_far)));
        }
        if self.near_band == 0 {
            return Err(Error::Config("near_band must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    i: usize,
    j: usize,
    start: usize,
    end: usize,
}

#[derive(Debug, Clone, Copy)]
struct NodeTerm {
    /// `2 w_i / s`
    scale: f64,
    /// `(1 - x_i)^{-s}`, `(1 + x_i)^{-s}`
    alpha: [f64; 2],
    /// `(R_far - x_i)^{-s}`, `(R_far + x_i)^{-s}`
    alpha_far: [f64; 2],
}

/// Assembled pair and exterior terms for one mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    cfg: OperatorConfig,
    mesh: Mesh,
    pairs: Vec<Pair>,
    /// `(c_q, a_q)` for every pair term.
    coeffs: Vec<(f64, f64)>,
    nodes: Vec<NodeTerm>,
    gl_near: GaussLegendre,
    gl_far: GaussLegendre,
}

const NEAR_POINTS: usize = 16;

impl Discretization {
    pub fn new(cfg: &OperatorConfig, mesh: &Mesh) -> Result<Self> {
        cfg.validate()?;
        let s = cfg.s;
        let h = mesh.h();
        let m = mesh.len();
        let band = cfg.near_band.min(m - 1);
        let p0 = cfg.yf.exponent_at_zero();
        let gl = GaussLegendre::new(NEAR_POINTS);
        let w = mesh.weights();

        let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
        let mut coeffs = Vec::with_capacity(m * (m - 1) / 2 + m * band * 3 * NEAR_POINTS);
        for i in 0..m {
            for j in (i + 1)..m {
                let start = coeffs.len();
                let d = (j - i) as f64 * h;
                if j - i > band {
                    coeffs.push((2.0 * w[i] * w[j] / d, d.powf(-s)));
                } else {
                    // two off-diagonal product cells, chord slope δ/d
                    let (ai, bi) = mesh.dual_cell(i);
                    let (aj, bj) = mesh.dual_cell(j);
                    let density = |r: f64| ((bi).min(bj - r) - (ai).max(aj - r)).max(0.0);
                    let mut knots = [aj - bi, aj - ai, bj - bi, bj - ai];
                    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    for k in 0..3 {
                        let (lo, hi) = (knots[k].max(0.0), knots[k + 1]);
                        if hi - lo <= 1e-15 * h {
                            continue;
                        }
                        // integrand ~ r^{p0(1-s)} when lo = 0 and density ~ r
                        let beta = if lo == 0.0 { smoothing_beta(p0 * (1.0 - s)) } else { 1.0 };
                        for (r, wq) in mapped_power(&gl, lo, hi, beta) {
                            let c = 2.0 * wq * density(r) / r;
                            if c > 0.0 {
                                coeffs.push((c, r.powf(1.0 - s) / d));
                            }
                        }
                    }
                    if j == i + 1 {
                        // diagonal cells of the two end nodes
                        for node in [i, j] {
                            let share = if node == 0 || node == m - 1 { 1.0 } else { 0.5 };
                            let (a, b) = mesh.dual_cell(node);
                            let len = b - a;
                            let beta = smoothing_beta(p0 * (1.0 - s) - 1.0);
                            for (r, wq) in mapped_power(&gl, 0.0, len, beta) {
                                let c = share * 2.0 * wq * (len - r) / r;
                                if c > 0.0 {
                                    coeffs.push((c, r.powf(1.0 - s) / h));
                                }
                            }
                        }
                    }
                }
                pairs.push(Pair { i, j, start, end: coeffs.len() });
            }
        }

        let nodes = mesh
            .nodes()
            .iter()
            .zip(w)
            .map(|(&x, &wi)| {
                let dist = [1.0 - x, 1.0 + x];
                let far = [cfg.r_far - x, cfg.r_far + x];
                NodeTerm {
                    scale: 2.0 * wi / s,
                    alpha: dist.map(|a| if a > 0.0 { a.powf(-s) } else { f64::INFINITY }),
                    alpha_far: far.map(|a| a.powf(-s)),
                }
            })
            .collect();

        Ok(Self {
            cfg: cfg.clone(),
            mesh: mesh.clone(),
            pairs,
            coeffs,
            nodes,
            gl_near: GaussLegendre::new(24),
            gl_far: GaussLegendre::new(8),
        })
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.cfg
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    fn yf(&self) -> &YoungFunction {
        &self.cfg.yf
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if u.len() != self.mesh.len() {
            return Err(Error::Config(format!(
                "grid function has {} nodes, discretization expects {}",
                u.len(),
                self.mesh.len()
            )));
        }
        Ok(())
    }

    fn check_w0(&self, u: &GridFunction, what: &str) -> Result<()> {
        self.check(u)?;
        if !u.vanishes_on_boundary() {
            return Err(Error::Domain(format!(
                "{what} needs zero boundary values (zero extension would jump): u(-1) = {}, u(1) = {}",
                u.values()[0],
                u.values()[u.len() - 1]
            )));
        }
        Ok(())
    }

    fn pair_value(&self, p: &Pair, delta: f64) -> f64 {
        let yf = self.yf();
        let d = delta.abs();
        self.coeffs[p.start..p.end].iter().map(|&(c, a)| c * yf.big_g(a * d)).sum()
    }

    fn pair_slope(&self, p: &Pair, delta: f64) -> f64 {
        let yf = self.yf();
        self.coeffs[p.start..p.end].iter().map(|&(c, a)| c * a * yf.g(a * delta)).sum()
    }

    fn pair_curvature(&self, p: &Pair, delta: f64) -> f64 {
        let yf = self.yf();
        self.coeffs[p.start..p.end].iter().map(|&(c, a)| c * a * a * yf.g_prime(a * delta)).sum()
    }

    fn pair_secant(&self, p: &Pair, delta: f64) -> f64 {
        let yf = self.yf();
        self.coeffs[p.start..p.end].iter().map(|&(c, a)| c * a * a * yf.g_over_t(a * delta)).sum()
    }

    fn far_alphas(&self, n: &NodeTerm) -> [f64; 2] {
        n.alpha_far
    }

    /// Exterior term `D_i(v)` split as (value up to `R_far`, remainder beyond).
    fn node_value(&self, n: &NodeTerm, v: f64) -> (f64, f64) {
        let yf = self.yf();
        let v = v.abs();
        if v == 0.0 {
            return (0.0, 0.0);
        }
        let mut inner = 0.0;
        let mut tail = 0.0;
        for (a, af) in n.alpha.iter().zip(self.far_alphas(n)) {
            let full = yf.big_g_over_t_integral(v * a);
            let rest = yf.big_g_over_t_integral(v * af);
            inner += full - rest;
            tail += rest;
        }
        (n.scale * inner, n.scale * tail)
    }

    fn node_slope(&self, n: &NodeTerm, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let yf = self.yf();
        let av = v.abs();
        let mut acc = 0.0;
        for (k, a) in n.alpha.iter().enumerate() {
            acc += yf.big_g(av * a) / v;
            if self.cfg.tail_mode == TailMode::Zero {
                acc -= yf.big_g(av * n.alpha_far[k]) / v;
            }
        }
        n.scale * acc
    }

    fn node_curvature(&self, n: &NodeTerm, v: f64) -> f64 {
        let yf = self.yf();
        let av = v.abs();
        let term = |a: f64| {
            let t = av * a;
            if t == 0.0 {
                return a * a * (yf.g_prime(0.0) - 0.5 * yf.g_prime(0.0));
            }
            a * a * (yf.g(t) * t - yf.big_g(t)) / (t * t)
        };
        let mut acc = 0.0;
        for (k, &a) in n.alpha.iter().enumerate() {
            acc += term(a);
            if self.cfg.tail_mode == TailMode::Zero {
                acc -= term(n.alpha_far[k]);
            }
        }
        n.scale * acc
    }

    fn node_secant(&self, n: &NodeTerm, v: f64) -> f64 {
        let yf = self.yf();
        let av = v.abs();
        let term = |a: f64| {
            let t = av * a;
            if t == 0.0 {
                return a * a * 0.5 * yf.g_prime(0.0);
            }
            a * a * yf.big_g(t) / (t * t)
        };
        let mut acc = 0.0;
        for (k, &a) in n.alpha.iter().enumerate() {
            acc += term(a);
            if self.cfg.tail_mode == TailMode::Zero {
                acc -= term(n.alpha_far[k]);
            }
        }
        n.scale * acc
    }

    /// Discrete modular over ℝ×ℝ of the zero extension.
    pub fn modular(&self, u: &GridFunction) -> Result<f64> {
        Ok(self.modular_report(u)?.value)
    }

    /// Discrete modular together with the size of the exterior remainder
    /// beyond `R_far`.
    pub fn modular_report(&self, u: &GridFunction) -> Result<ModularReport> {
        self.check_w0(u, "modular_W")?;
        let v = u.values();
        let mut value: f64 = self.pairs.iter().map(|p| self.pair_value(p, v[p.i] - v[p.j])).sum();
        let mut tail = 0.0;
        for (k, n) in self.nodes.iter().enumerate().skip(1).take(v.len() - 2) {
            let (inner, rest) = self.node_value(n, v[k]);
            value += inner;
            tail += rest;
        }
        if self.cfg.tail_mode == TailMode::Analytic {
            value += tail;
        }
        if !value.is_finite() {
            return Err(Error::Numeric("modular evaluation produced a non-finite value".into()));
        }
        let warning = value > 0.0 && tail > 0.01 * value;
        Ok(ModularReport { value, tail, tail_warning: warning })
    }

    /// Gradient of the modular: entry `k` is `weak_form(u, φ_k)` for the hat
    /// function `φ_k`.
    pub fn gradient(&self, u: &GridFunction) -> Result<Vec<f64>> {
        self.check(u)?;
        let v = u.values();
        let mut grad = vec![0.0; v.len()];
        for p in &self.pairs {
            let q = self.pair_slope(p, v[p.i] - v[p.j]);
            grad[p.i] += q;
            grad[p.j] -= q;
        }
        for (k, n) in self.nodes.iter().enumerate().skip(1).take(v.len() - 2) {
            grad[k] += self.node_slope(n, v[k]);
        }
        Ok(grad)
    }

    /// `∫∫ g((u(x)-u(y))/|x-y|^s) (φ(x)-φ(y)) |x-y|^{-1-s} dx dy` in discrete form.
    pub fn weak_form(&self, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
        self.check(phi)?;
        let grad = self.gradient(u)?;
        Ok(grad.iter().zip(phi.values()).skip(1).take(grad.len() - 2).map(|(g, p)| g * p).sum())
    }

    /// Nodal residual `r_k = weak_form(u, φ_k) - w_k rhs_k` on interior nodes.
    pub fn residual(&self, u: &GridFunction, rhs: &GridFunction) -> Result<GridFunction> {
        self.check(rhs)?;
        let grad = self.gradient(u)?;
        let w = self.mesh.weights();
        let m = grad.len();
        let values = (0..m)
            .map(|k| if k == 0 || k == m - 1 { 0.0 } else { grad[k] - w[k] * rhs.values()[k] })
            .collect();
        GridFunction::new(self.mesh.clone(), values)
    }

    /// Hessian of the modular restricted to interior nodes.
    pub fn hessian(&self, u: &GridFunction) -> Result<DMatrix<f64>> {
        self.check(u)?;
        Ok(self.assemble(u, |p, d| self.pair_curvature(p, d), |n, v| self.node_curvature(n, v)))
    }

    /// Secant matrix `A(u)` with `A(u) u = ∇M_h(u)` (frozen-coefficient
    /// linearization), restricted to interior nodes.
    pub fn secant_matrix(&self, u: &GridFunction) -> Result<DMatrix<f64>> {
        self.check(u)?;
        Ok(self.assemble(u, |p, d| self.pair_secant(p, d), |n, v| self.node_secant(n, v)))
    }

    fn assemble(
        &self,
        u: &GridFunction,
        pair: impl Fn(&Pair, f64) -> f64,
        node: impl Fn(&NodeTerm, f64) -> f64,
    ) -> DMatrix<f64> {
        let v = u.values();
        let m = v.len();
        let n = m - 2;
        let mut jac = DMatrix::zeros(n, n);
        for p in &self.pairs {
            let q = pair(p, v[p.i] - v[p.j]);
            let ii = p.i.checked_sub(1).filter(|&k| k < n);
            let jj = p.j.checked_sub(1).filter(|&k| k < n);
            if let Some(a) = ii {
                jac[(a, a)] += q;
            }
            if let Some(b) = jj {
                jac[(b, b)] += q;
            }
            if let (Some(a), Some(b)) = (ii, jj) {
                jac[(a, b)] -= q;
                jac[(b, a)] -= q;
            }
        }
        for k in 1..m - 1 {
            jac[(k - 1, k - 1)] += node(&self.nodes[k], v[k]);
        }
        jac
    }

    /// Strong form `(-Δ_g)^s u(x_i)` of the piecewise-linear interpolant at
    /// an interior node.
    pub fn apply(&self, u: &GridFunction, i: usize) -> Result<f64> {
        self.check(u)?;
        let m = self.mesh.len();
        if i == 0 || i >= m - 1 {
            return Err(Error::Domain(format!("apply is defined at interior nodes 1..{}, got {i}", m - 2)));
        }
        let yf = self.yf();
        let s = self.cfg.s;
        let h = self.mesh.h();
        let v = u.values();
        let xi = self.mesh.x(i);
        let ui = v[i];

        // adjacent cells, paired symmetrically in r = |y - x_i|
        let sl = (ui - v[i - 1]) / h;
        let sr = (v[i + 1] - ui) / h;
        let p0 = yf.exponent_at_zero();
        let e = (p0 - 1.0) * (1.0 - s) - 1.0 - s;
        let mut total = 0.0;
        if sl != sr {
            if e <= -1.0 {
                return Err(Error::Numeric(format!(
                    "strong form diverges at node {i}: slope jump with (p-1)(1-s) <= s"
                )));
            }
            let beta = smoothing_beta(e);
            for (r, wq) in mapped_power(&self.gl_near, 0.0, h, beta) {
                let t = r.powf(1.0 - s);
                total += wq * (yf.g(sl * t) - yf.g(sr * t)) * r.powf(-1.0 - s);
            }
        }

        // remaining cells
        for k in 0..m - 1 {
            if k + 1 == i || k == i {
                continue;
            }
            let (x0, x1) = (self.mesh.x(k), self.mesh.x(k + 1));
            let (u0, u1) = (v[k], v[k + 1]);
            let dist = if k > i { k - i } else { i - k - 1 };
            let gl = if dist < self.cfg.near_band { &self.gl_near } else { &self.gl_far };
            total += gl.integrate(
                |y| {
                    let uy = u0 + (u1 - u0) * (y - x0) / h;
                    let r = (y - xi).abs();
                    yf.g((ui - uy) / r.powf(s)) * r.powf(-1.0 - s)
                },
                x0,
                x1,
            );
        }

        // exterior, u(y) = 0: ∫_ρ^∞ g(u_i r^{-s}) r^{-1-s} dr = G(|u_i| ρ^{-s}) / (s u_i)
        if ui != 0.0 {
            let n = &self.nodes[i];
            for (k, a) in n.alpha.iter().enumerate() {
                total += yf.big_g(ui.abs() * a) / (s * ui);
                if self.cfg.tail_mode == TailMode::Zero {
                    total -= yf.big_g(ui.abs() * n.alpha_far[k]) / (s * ui);
                }
            }
        }
        Ok(total)
    }

    /// `apply` at every interior node (boundary entries are 0).
    pub fn apply_all(&self, u: &GridFunction) -> Result<Vec<f64>> {
        let m = self.mesh.len();
        let mut out = vec![0.0; m];
        for (i, o) in out.iter_mut().enumerate().take(m - 1).skip(1) {
            *o = self.apply(u, i)?;
        }
        Ok(out)
    }
}

/// Value of the discrete modular with the exterior remainder beyond `R_far`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularReport {
    pub value: f64,
    pub tail: f64,
    /// Remainder exceeds 1% of the value.
    pub tail_warning: bool,
}

/// Gauss–Legendre on `[lo, hi]` after `r = lo + (hi - lo) v^beta`.
fn mapped_power(gl: &GaussLegendre, lo: f64, hi: f64, beta: f64) -> Vec<(f64, f64)> {
    let len = hi - lo;
    gl.mapped(0.0, 1.0)
        .map(|(v, w)| {
            let vb1 = v.powf(beta - 1.0);
            (lo + len * vb1 * v, w * len * beta * vb1)
        })
        .collect()
}

/// Strong form at a single interior node with a fresh discretization.
pub fn apply(cfg: &OperatorConfig, u: &GridFunction, i: usize) -> Result<f64> {
    Discretization::new(cfg, u.mesh())?.apply(u, i)
}

pub fn weak_form(cfg: &OperatorConfig, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
    Discretization::new(cfg, u.mesh())?.weak_form(u, phi)
}

pub fn residual(cfg: &OperatorConfig, u: &GridFunction, rhs: &GridFunction) -> Result<GridFunction> {
    Discretization::new(cfg, u.mesh())?.residual(u, rhs)
}

/// Default residual tolerance `1e-8 (1 + ‖rhs‖_∞)`.
pub fn default_tol_res(rhs: &GridFunction) -> f64 {
    1e-8 * (1.0 + rhs.sup_norm())
}
