//! Randomized checks of the inequalities behind the existence scheme.
//!
//! Every check draws its samples from a ChaCha8 stream seeded by the
//! caller, so margins are reproducible bit for bit. Margins are
//! `RHS - LHS` style quantities (relative where noted): a check passes
//! when its worst margin is at least `-tolerance`.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{GridFunction, Mesh};
use crate::nonlocal::{Discretization, OperatorConfig};
use crate::solver::solve_auxiliary_with;
use crate::young::{default_growth_grid, default_submult_pairs, log_grid, PhiWeight, YoungFunction};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const SAMPLE_LO: f64 = 1e-3;
pub const SAMPLE_HI: f64 = 1e3;

pub const TOL_DELTA2: f64 = 1e-9;
pub const TOL_LINDQVIST: f64 = 1e-10;
pub const TOL_GDIFF: f64 = 1e-10;
pub const TOL_CONJUGATE: f64 = 1e-7;
pub const TOL_PHI: f64 = 1e-9;
pub const TOL_COMPARISON: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub samples: usize,
    pub worst_margin: f64,
    pub pass: bool,
    /// Sample at the worst margin when the check failed.
    pub offending: Option<String>,
    /// Empirical best constant where one is meaningful.
    pub best_constant: Option<f64>,
    /// Start of the range on which a threshold-type inequality holds.
    pub threshold: Option<f64>,
}

impl CheckOutcome {
    fn new(name: &str, samples: usize, worst: (f64, String), tol: f64) -> Self {
        let pass = worst.0 >= -tol;
        Self {
            name: name.to_string(),
            samples,
            worst_margin: worst.0,
            pass,
            offending: if pass { None } else { Some(worst.1) },
            best_constant: None,
            threshold: None,
        }
    }
}

/// Running minimum of margins with the sample that produced it.
struct Worst(f64, String);

impl Worst {
    fn new() -> Self {
        Self(f64::INFINITY, String::new())
    }

    fn update(&mut self, margin: f64, sample: impl FnOnce() -> String) {
        // NaN margins count as failures
        if margin < self.0 || margin.is_nan() && !self.0.is_nan() {
            self.0 = margin;
            self.1 = sample();
        }
    }

    fn get(self) -> (f64, String) {
        (if self.0.is_nan() { f64::NEG_INFINITY } else { self.0 }, self.1)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn rel(rhs: f64, lhs: f64) -> f64 {
    let scale = rhs.abs().max(lhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

/// `C_L = min(1/2, 2^{-p⁺} / (2 p⁻))`.
pub fn lindqvist_constant(yf: &YoungFunction) -> f64 {
    0.5f64.min(2f64.powf(-yf.p_plus()) / (2.0 * yf.p_minus()))
}

/// `C_E = p⁺ - 1`.
pub fn gdiff_constant(yf: &YoungFunction) -> f64 {
    yf.p_plus() - 1.0
}

/// `C_M = min(1, 1/θ₂)` with `θ₂ = sup x Φ'(x) / Φ(x)` over `grid`.
pub fn phi_mvt_constant(w: &PhiWeight, grid: &[f64]) -> Result<f64> {
    let (_, theta2) = w.theta_bounds(grid)?;
    Ok(1f64.min(1.0 / theta2))
}

/// `λ^{p⁻} G(t) ≤ G(λt) ≤ λ^{p⁺} G(t)` for `λ ≥ 1`, reversed for `λ ≤ 1`.
/// Relative margins.
pub fn check_delta2(yf: &YoungFunction, n_samples: usize, seed: u64) -> Result<CheckOutcome> {
    require_samples(n_samples)?;
    let mut rng = rng(seed);
    let (pm, pp) = (yf.p_minus(), yf.p_plus());
    let mut worst = Worst::new();
    for _ in 0..n_samples {
        let lam = log_uniform(&mut rng, SAMPLE_LO, SAMPLE_HI);
        let t = log_uniform(&mut rng, SAMPLE_LO, SAMPLE_HI);
        let g_t = yf.eval_big_g(t)?;
        let g_lt = yf.eval_big_g(lam * t)?;
        let (lo, hi) = if lam >= 1.0 {
            (lam.powf(pm) * g_t, lam.powf(pp) * g_t)
        } else {
            (lam.powf(pp) * g_t, lam.powf(pm) * g_t)
        };
        let m = rel(g_lt, lo).min(rel(hi, g_lt));
        worst.update(m, || format!("lambda={lam:.6e} t={t:.6e}"));
    }
    Ok(CheckOutcome::new("delta2", n_samples, worst.get(), TOL_DELTA2))
}

/// `(g(b) - g(a))(b - a) ≥ C_L G(|b - a|)`; absolute margins. Half the
/// pairs have `a b > 0`, half straddle 0.
pub fn check_lindqvist(yf: &YoungFunction, n_samples: usize, seed: u64) -> Result<CheckOutcome> {
    require_samples(n_samples)?;
    let mut rng = rng(seed);
    let c = lindqvist_constant(yf);
    let mut worst = Worst::new();
    let mut best = f64::INFINITY;
    for k in 0..n_samples {
        let (a, b) = signed_pair(&mut rng, k);
        let lhs = (yf.g(b) - yf.g(a)) * (b - a);
        let gd = yf.eval_big_g((b - a).abs())?;
        if gd > 0.0 {
            best = best.min(lhs / gd);
        }
        worst.update(lhs - c * gd, || format!("a={a:.6e} b={b:.6e}"));
    }
    let mut out = CheckOutcome::new("lindqvist", n_samples, worst.get(), TOL_LINDQVIST);
    out.best_constant = Some(best);
    Ok(out)
}

/// `|g(a) - g(b)| ≤ C_E |a-b| g(|a|+|b|)/(|a|+|b|) ≤ C_E g(|a|+|b|)`;
/// relative margins.
pub fn check_gdiff(yf: &YoungFunction, n_samples: usize, seed: u64) -> Result<CheckOutcome> {
    require_samples(n_samples)?;
    let mut rng = rng(seed);
    let c = gdiff_constant(yf);
    let mut worst = Worst::new();
    let mut best: f64 = 0.0;
    for k in 0..n_samples {
        let (a, b) = signed_pair(&mut rng, k);
        let lhs = (yf.g(a) - yf.g(b)).abs();
        let sum = a.abs() + b.abs();
        let (mid, top) = if sum == 0.0 { (0.0, 0.0) } else { (c * (a - b).abs() * yf.g(sum) / sum, c * yf.g(sum)) };
        if mid > 0.0 {
            best = best.max(c * lhs / mid);
        }
        let m = rel(mid, lhs).min(rel(top, mid));
        worst.update(m, || format!("a={a:.6e} b={b:.6e}"));
    }
    let mut out = CheckOutcome::new("gdiff", n_samples, worst.get(), TOL_GDIFF);
    out.best_constant = Some(best);
    Ok(out)
}

/// `(p⁻ - 1) G(t) ≤ Ḡ(g(t)) ≤ (p⁺ - 1) G(t)`; relative margins.
pub fn check_conjugate(yf: &YoungFunction, n_samples: usize, seed: u64) -> Result<CheckOutcome> {
    require_samples(n_samples)?;
    let mut rng = rng(seed);
    let mut worst = Worst::new();
    for _ in 0..n_samples {
        let t = log_uniform(&mut rng, SAMPLE_LO, SAMPLE_HI);
        let gt = yf.eval_big_g(t)?;
        let mid = yf.eval_gbar(yf.g(t))?;
        let m = rel(mid, (yf.p_minus() - 1.0) * gt).min(rel((yf.p_plus() - 1.0) * gt, mid));
        worst.update(m, || format!("t={t:.6e}"));
    }
    Ok(CheckOutcome::new("conjugate", n_samples, worst.get(), TOL_CONJUGATE))
}

/// `|Φ(x) - Φ(y)| ≥ C_M Φ'(ε) |x - y|` for `x, y ≥ 0`, `max(x, y) ≥ ε`;
/// relative margins.
pub fn check_phi_mvt(w: &PhiWeight, eps: f64, n_samples: usize, seed: u64) -> Result<CheckOutcome> {
    check_phi_mvt_with(w, eps, n_samples, seed, None)
}

/// As [`check_phi_mvt`] with an explicit constant instead of `min(1, 1/θ₂)`.
pub fn check_phi_mvt_with(
    w: &PhiWeight,
    eps: f64,
    n_samples: usize,
    seed: u64,
    constant: Option<f64>,
) -> Result<CheckOutcome> {
    require_samples(n_samples)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
    }
    let c = match constant {
        Some(c) => c,
        None => phi_mvt_constant(w, &log_grid(SAMPLE_LO * eps.min(1.0), SAMPLE_HI * eps.max(1.0), 256))?,
    };
    let dphi_eps = w.phi_prime(eps)?;
    let mut rng = rng(seed);
    let mut worst = Worst::new();
    let mut best = f64::INFINITY;
    for k in 0..n_samples {
        let big = eps * log_uniform(&mut rng, 1.0, SAMPLE_HI);
        let small = match k % 4 {
            0 => 0.0,
            1 => eps * rng.gen_range(0.0..1.0),
            _ => big * rng.gen_range(0.0..1.0),
        };
        let (x, y) = if k.is_multiple_of(2) { (big, small) } else { (small, big) };
        let lhs = (w.phi(x)? - w.phi(y)?).abs();
        let base = dphi_eps * (x - y).abs();
        if base > 0.0 {
            best = best.min(lhs / base);
        }
        worst.update(rel(lhs, c * base), || format!("x={x:.6e} y={y:.6e}"));
    }
    let mut out = CheckOutcome::new("phi_mvt", n_samples, worst.get(), TOL_PHI);
    out.best_constant = Some(best);
    Ok(out)
}

/// `t^{1/r} ≤ (2/r) Φ(t)` on a log scan of `[1, 1e6]`; reports the
/// smallest `t₀` from which the inequality holds at every later sample.
pub fn check_rpower(w: &PhiWeight, n_samples: usize) -> Result<CheckOutcome> {
    require_samples(n_samples)?;
    let r = w.r();
    let grid = log_grid(1.0, 1e6, n_samples);
    let mut margins = Vec::with_capacity(grid.len());
    for &t in &grid {
        margins.push(rel(2.0 / r * w.phi(t)?, t.powf(1.0 / r)));
    }
    let start = margins.iter().rposition(|&m| m < 0.0).map_or(0, |k| k + 1);
    let mut out = if start < grid.len() {
        let worst = margins[start..].iter().copied().fold(f64::INFINITY, f64::min);
        CheckOutcome::new("rpower", n_samples, (worst, String::new()), 0.0)
    } else {
        let last = *margins.last().unwrap();
        let mut o = CheckOutcome::new("rpower", n_samples, (last, format!("t={:.6e}", grid[grid.len() - 1])), 0.0);
        o.pass = false;
        o
    };
    out.threshold = (start < grid.len()).then(|| grid[start]);
    Ok(out)
}

/// Declared growth exponents against the empirical ones on the default grid.
pub fn check_growth(yf: &YoungFunction) -> CheckOutcome {
    let grid = default_growth_grid();
    match yf.estimate_growth_bounds(&grid) {
        Ok(b) => {
            let margin = (b.p_minus_hat - yf.p_minus()).min(yf.p_plus() - b.p_plus_hat);
            CheckOutcome::new("growth_bounds", grid.len(), (margin, String::new()), 1e-6)
        }
        Err(e) => {
            let mut o = CheckOutcome::new("growth_bounds", grid.len(), (f64::NEG_INFINITY, e.to_string()), 0.0);
            o.pass = false;
            o.offending = Some(e.to_string());
            o
        }
    }
}

/// Grid infimum of `g(t1) g(t2) / g(t1 t2)`.
pub fn check_submultiplicative(yf: &YoungFunction) -> CheckOutcome {
    let pairs = default_submult_pairs();
    match yf.submultiplicativity_constant(&pairs) {
        Ok(c) => {
            let mut o = CheckOutcome::new("submultiplicative", pairs.len(), (c, String::new()), 0.0);
            o.best_constant = Some(c);
            o
        }
        Err(e) => {
            let mut o = CheckOutcome::new("submultiplicative", pairs.len(), (0.0, e.to_string()), 0.0);
            o.pass = false;
            o.offending = Some(e.to_string());
            o
        }
    }
}

/// Solutions for random ordered right-hand sides `F_v ≥ F_u` must be
/// ordered; margin is `min_i (v_i - u_i)`.
pub fn check_comparison(cfg: &OperatorConfig, mesh: &Mesh, trials: usize, seed: u64) -> Result<CheckOutcome> {
    if trials == 0 {
        return Err(Error::Config("comparison check needs at least one trial".into()));
    }
    let disc = Discretization::new(cfg, mesh)?;
    let mut rng = rng(seed);
    let mut worst = Worst::new();
    for k in 0..trials {
        let fu = random_rhs(mesh, &mut rng)?;
        let extra = random_rhs(mesh, &mut rng)?.scaled(rng.gen_range(0.0..1.0));
        let fv = fu.axpy(1.0, &extra);
        let u = solve_auxiliary_with(&disc, &fu, None, 1e-12 * (1.0 + fu.sup_norm()))?.u;
        let v = solve_auxiliary_with(&disc, &fv, None, 1e-12 * (1.0 + fv.sup_norm()))?.u;
        let (i, m) = v
            .values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| a - b)
            .enumerate()
            .skip(1)
            .take(mesh.len() - 2)
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        worst.update(m, || format!("trial {k}, node {i}"));
    }
    Ok(CheckOutcome::new("comparison", trials, worst.get(), TOL_COMPARISON))
}

/// Nonnegative right-hand side: a positive constant plus random Gaussian bumps.
pub fn random_rhs(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    let base = rng.gen_range(0.1..1.0);
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(-0.8..0.8), rng.gen_range(0.1..0.5)))
        .collect();
    GridFunction::from_fn(mesh, |x| {
        base + bumps.iter().map(|&(a, c, w)| a * (-((x - c) / w).powi(2)).exp()).sum::<f64>()
    })
}

fn signed_pair(rng: &mut ChaCha8Rng, k: usize) -> (f64, f64) {
    let a = log_uniform(rng, SAMPLE_LO, SAMPLE_HI);
    let b = log_uniform(rng, SAMPLE_LO, SAMPLE_HI);
    let sa = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    if k.is_multiple_of(2) {
        (sa * a, sa * b)
    } else {
        (-a, b)
    }
}

fn require_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("a check needs at least one sample".into()));
    }
    Ok(())
}

/// The Young-function checks for one family, with `Φ` built from `q_star`.
pub fn young_suite(yf: &YoungFunction, q_star: f64, eps: f64, n_samples: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let w = PhiWeight::new(yf.clone(), q_star)?;
    Ok(vec![
        check_growth(yf),
        check_delta2(yf, n_samples, seed)?,
        check_lindqvist(yf, n_samples, seed)?,
        check_gdiff(yf, n_samples, seed)?,
        check_conjugate(yf, n_samples, seed)?,
        check_phi_mvt(&w, eps, n_samples, seed)?,
        check_rpower(&w, n_samples)?,
        check_submultiplicative(yf),
    ])
}

/// `name,samples,worst_margin,pass,best_constant,threshold,offending` with
/// 12 significant digits.
pub fn outcomes_csv(outcomes: &[CheckOutcome]) -> String {
    let mut s = String::from("name,samples,worst_margin,pass,best_constant,threshold,offending\n");
    for o in outcomes {
        let opt = |v: Option<f64>| v.map(fmt12).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            o.name,
            o.samples,
            fmt12(o.worst_margin),
            o.pass,
            opt(o.best_constant),
            opt(o.threshold),
            o.offending.as_deref().unwrap_or("").replace([',', '\n'], ";")
        );
    }
    s
}

/// Twelve significant digits in scientific notation.
pub fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}
