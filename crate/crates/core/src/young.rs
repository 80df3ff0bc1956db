//! Young (N-)function calculus.
//!
//! A [`YoungFunction`] is generated by its derivative `g`: `G(t) = ∫_0^t g`.
//! Everything else (inverse, conjugate, Sobolev conjugate, the boundary
//! weight `Φ`) is derived from `g` and `G` by quadrature and bracketed
//! root finding. Closed forms are used where the family has one.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_finite, Error, Result};
use crate::quad::{integrate, integrate_power_sub};

/// Relative tolerance used for quadrature of `g`, `ḡ`, `Φ'`.
const QUAD_TOL: f64 = 1e-12;
/// Relative tolerance for inverses.
pub const INVERSE_TOL: f64 = 1e-10;
const BRACKET_GROWTH: f64 = 4.0;
const OVERFLOW_GUARD: f64 = 1e300;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User supplied `g` and `g'` for a family without built-in formulas.
#[derive(Clone)]
pub struct CustomFamily {
    pub name: String,
    pub g: ScalarFn,
    pub g_prime: ScalarFn,
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `G(t) = t^p / p`.
    Power { p: f64 },
    /// `G(t) = t^p1 / p1 + t^p2 / p2`.
    DoublePower { p1: f64, p2: f64 },
    /// `g(t) = t^a log(b + c t)`.
    LogType { a: f64, b: f64, c: f64 },
    Custom(CustomFamily),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Power { p } => write!(f, "power(p={p})"),
            Family::DoublePower { p1, p2 } => write!(f, "double-power(p1={p1},p2={p2})"),
            Family::LogType { a, b, c } => write!(f, "log-type(a={a},b={b},c={c})"),
            Family::Custom(c) => write!(f, "custom({})", c.name),
        }
    }
}

/// An N-function `G` with derivative `g` and growth exponents `p⁻ ≤ p⁺`.
#[derive(Debug, Clone)]
pub struct YoungFunction {
    family: Family,
    p_minus: f64,
    p_plus: f64,
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        Self::new(Family::Power { p }, p, p)
    }

    pub fn double_power(p1: f64, p2: f64) -> Result<Self> {
        Self::new(Family::DoublePower { p1, p2 }, p1.min(p2), p1.max(p2))
    }

    /// `g(t) = t^a log(b + c t)`, with `p⁻ = 1 + a`, `p⁺ = 2 + a`.
    pub fn log_type(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::Config(format!("log-type family needs a, b, c > 0 (got a={a}, b={b}, c={c})")));
        }
        if b < 1.0 {
            // log(b) < 0 makes g negative near 0
            return Err(Error::Config(format!("log-type family needs b >= 1 so that g > 0 on (0, inf) (got b={b})")));
        }
        Self::new(Family::LogType { a, b, c }, 1.0 + a, 2.0 + a)
    }

    pub fn custom(family: CustomFamily, p_minus: f64, p_plus: f64) -> Result<Self> {
        Self::new(Family::Custom(family), p_minus, p_plus)
    }

    /// Build with explicitly declared exponents.
    ///
    /// Only `2 < p⁻ ≤ p⁺ < ∞` is enforced here; whether `g` actually obeys
    /// the declared exponents is checked by [`YoungFunction::estimate_growth_bounds`].
    pub fn new(family: Family, p_minus: f64, p_plus: f64) -> Result<Self> {
        match &family {
            Family::Power { p } if !(p.is_finite() && *p > 2.0) => {
                return Err(Error::Config(format!("power family needs p > 2 (got {p})")));
            }
            Family::DoublePower { p1, p2 } if !(p1.is_finite() && p2.is_finite() && *p1 > 2.0 && *p2 > 2.0) => {
                return Err(Error::Config(format!("double-power family needs p1, p2 > 2 (got {p1}, {p2})")));
            }
            _ => {}
        }
        if !(p_minus.is_finite() && p_plus.is_finite()) {
            return Err(Error::Config("growth exponents must be finite".into()));
        }
        if p_minus <= 2.0 {
            return Err(Error::Config(format!("p_minus must exceed 2 (got {p_minus})")));
        }
        if p_plus < p_minus {
            return Err(Error::Config(format!("p_plus ({p_plus}) must be >= p_minus ({p_minus})")));
        }
        Ok(Self { family, p_minus, p_plus })
    }

    /// Replace the declared exponents, keeping the family.
    pub fn with_declared_bounds(self, p_minus: f64, p_plus: f64) -> Result<Self> {
        Self::new(self.family, p_minus, p_plus)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// Exponent `e` with `G(t) ~ t^e` as `t → 0`.
    pub fn exponent_at_zero(&self) -> f64 {
        match &self.family {
            Family::Power { p } => *p,
            Family::DoublePower { p1, p2 } => p1.min(*p2),
            Family::LogType { a, .. } => 1.0 + a,
            Family::Custom(_) => self.p_minus,
        }
    }

    /// `g(t)` for `t ≥ 0`; negative arguments are handled by oddness.
    pub fn g(&self, t: f64) -> f64 {
        if t < 0.0 {
            return -self.g(-t);
        }
        if t == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { p } => t.powf(p - 1.0),
            Family::DoublePower { p1, p2 } => t.powf(p1 - 1.0) + t.powf(p2 - 1.0),
            Family::LogType { a, b, c } => t.powf(*a) * (b + c * t).ln(),
            Family::Custom(c) => (c.g)(t),
        }
    }

    /// Checked `g` for nonnegative finite input.
    pub fn eval_g(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::Domain(format!("eval_g expects t >= 0, got {t} (use g() for the odd extension)")));
        }
        Ok(self.g(t))
    }

    /// `g'(|t|)`; even in `t`. At `t = 0` the right limit is returned.
    pub fn g_prime(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.family {
            Family::Power { p } => {
                if t == 0.0 {
                    if *p < 2.0 + 1e-15 { 1.0 } else { 0.0 }
                } else {
                    (p - 1.0) * t.powf(p - 2.0)
                }
            }
            Family::DoublePower { p1, p2 } => {
                if t == 0.0 {
                    0.0
                } else {
                    (p1 - 1.0) * t.powf(p1 - 2.0) + (p2 - 1.0) * t.powf(p2 - 2.0)
                }
            }
            Family::LogType { a, b, c } => {
                if t == 0.0 {
                    if *a > 1.0 { 0.0 } else { b.ln() }
                } else {
                    a * t.powf(a - 1.0) * (b + c * t).ln() + c * t.powf(*a) / (b + c * t)
                }
            }
            Family::Custom(c) => (c.g_prime)(t),
        }
    }

    /// `g(t)/t` (the secant slope), with the limit `g'(0⁺)` at zero.
    pub fn g_over_t(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return self.g_prime(0.0);
        }
        match &self.family {
            Family::Power { p } => t.powf(p - 2.0),
            _ => self.g(t) / t,
        }
    }

    /// `G(|t|)`.
    pub fn big_g(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { p } => t.powf(*p) / p,
            Family::DoublePower { p1, p2 } => t.powf(*p1) / p1 + t.powf(*p2) / p2,
            _ => self.quad_big_g(t).unwrap_or(f64::NAN),
        }
    }

    fn quad_big_g(&self, t: f64) -> Result<f64> {
        integrate_from_zero(|x| Ok(self.g(x)), t, self.exponent_at_zero() - 1.0)
    }

    /// Checked `G`, reporting quadrature failures.
    pub fn eval_big_g(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::Domain(format!("eval_G expects t >= 0, got {t}")));
        }
        match &self.family {
            Family::Power { .. } | Family::DoublePower { .. } => Ok(self.big_g(t)),
            _ if t == 0.0 => Ok(0.0),
            _ => self.quad_big_g(t),
        }
    }

    /// `∫_0^T G(t)/t dt`, the primitive that appears in the exterior part of
    /// the Gagliardo modular.
    pub fn big_g_over_t_integral(&self, big_t: f64) -> f64 {
        let big_t = big_t.abs();
        if big_t == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { p } => big_t.powf(*p) / (p * p),
            Family::DoublePower { p1, p2 } => big_t.powf(*p1) / (p1 * p1) + big_t.powf(*p2) / (p2 * p2),
            _ => {
                // ∫_0^T G(t)/t dt = ∫_0^T g(τ) ln(T/τ) dτ
                let e = self.exponent_at_zero() - 1.0;
                integrate_from_zero(|x| Ok(self.g(x) * (big_t / x).ln()), big_t, e).unwrap_or(f64::NAN)
            }
        }
    }

    /// `G^{-1}(y)`: the unique `t ≥ 0` with `G(t) = y`.
    pub fn invert_big_g(&self, y: f64) -> Result<f64> {
        ensure_finite("y", y)?;
        if y < 0.0 {
            return Err(Error::Domain(format!("invert_G expects y >= 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if let Family::Power { p } = self.family {
            return Ok((p * y).powf(1.0 / p));
        }
        let tol = INVERSE_TOL * 1e-2 * y;
        bracketed_inverse(|t| self.big_g(t), |t| self.g(t), y, tol, "G")
    }

    /// Generalized inverse `ḡ(t) = sup{τ : g(τ) ≤ t}`.
    pub fn conjugate_g(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t <= 0.0 {
            return Ok(0.0);
        }
        let tol = INVERSE_TOL * 1e-3 * t;
        bracketed_inverse(|x| self.g(x), |x| self.g_prime(x), t, tol, "g")
    }

    /// Conjugate N-function `Ḡ(t) = ∫_0^t ḡ`.
    pub fn eval_gbar(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::Domain(format!("eval_Gbar expects t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        // ḡ(τ) ~ τ^{1/(p0-1)} near 0
        integrate_from_zero(|x| self.conjugate_g(x), t, 1.0 / (self.exponent_at_zero() - 1.0))
    }

    /// Inverse of the Sobolev conjugate, `G_*^{-1}(t) = ∫_0^t G^{-1}(τ) τ^{-(N+s)/N} dτ`.
    pub fn sobolev_conjugate_inv(&self, s: f64, dim: usize, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Config(format!("fractional order s must lie in (0, 1), got {s}")));
        }
        if dim == 0 {
            return Err(Error::Config("dimension N must be positive".into()));
        }
        if t < 0.0 {
            return Err(Error::Domain(format!("sobolev_conjugate_inv expects t >= 0, got {t}")));
        }
        let n = dim as f64;
        let p0 = self.exponent_at_zero();
        // G^{-1}(τ) ~ τ^{1/p0}; integrable at 0 iff 1/p0 > s/N
        let slack = 1.0 / p0 - s / n;
        if slack <= 0.0 {
            return Err(Error::Config(format!(
                "convergence condition at 0 violated: int_0^1 G^-1(tau) tau^-(N+s)/N dtau diverges since 1/p = {:.6} <= s/N = {:.6}",
                1.0 / p0,
                s / n
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let expo = (n + s) / n;
        let e = 1.0 / p0 - expo;
        integrate_from_zero(|tau| Ok(self.invert_big_g(tau)? * tau.powf(-expo)), t, e)
    }

    /// Empirical growth exponents over `grid`.
    ///
    /// Returns the inf/sup of `t g'(t)/g(t) + 1` and of `t g(t)/G(t)`; fails
    /// with [`Error::Invariant`] when either leaves the declared `[p⁻, p⁺]`
    /// by more than `1e-6`.
    pub fn estimate_growth_bounds(&self, grid: &[f64]) -> Result<GrowthBounds> {
        const SLACK: f64 = 1e-6;
        if grid.is_empty() {
            return Err(Error::Config("growth-bound grid is empty".into()));
        }
        let mut out = GrowthBounds {
            p_minus_hat: f64::INFINITY,
            p_plus_hat: f64::NEG_INFINITY,
            ratio_min: f64::INFINITY,
            ratio_max: f64::NEG_INFINITY,
            offending: Vec::new(),
        };
        for &t in grid {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("growth grid point must be positive, got {t}")));
            }
            let g = self.g(t);
            let big_g = self.eval_big_g(t)?;
            let index = t * self.g_prime(t) / g + 1.0;
            let ratio = t * g / big_g;
            out.p_minus_hat = out.p_minus_hat.min(index);
            out.p_plus_hat = out.p_plus_hat.max(index);
            out.ratio_min = out.ratio_min.min(ratio);
            out.ratio_max = out.ratio_max.max(ratio);
            let bad = |v: f64| v < self.p_minus - SLACK || v > self.p_plus + SLACK || !v.is_finite();
            if bad(index) || bad(ratio) {
                out.offending.push(t);
            }
        }
        if out.offending.is_empty() {
            Ok(out)
        } else {
            let shown: Vec<String> = out.offending.iter().take(8).map(|t| format!("{t:.6e}")).collect();
            Err(Error::Invariant(format!(
                "growth exponents outside declared [{}, {}]: t g'/g + 1 in [{:.9}, {:.9}], t g/G in [{:.9}, {:.9}]; {} offending t, first: {}",
                self.p_minus,
                self.p_plus,
                out.p_minus_hat,
                out.p_plus_hat,
                out.ratio_min,
                out.ratio_max,
                out.offending.len(),
                shown.join(", ")
            )))
        }
    }

    /// `inf g(t1) g(t2) / g(t1 t2)` over the supplied pairs.
    ///
    /// Fails when the infimum is `≤ 1e-12`: the family is then not usable on
    /// the sub-multiplicative pathway.
    pub fn submultiplicativity_constant(&self, pairs: &[(f64, f64)]) -> Result<f64> {
        let mut inf = f64::INFINITY;
        let mut at = (f64::NAN, f64::NAN);
        for &(t1, t2) in pairs {
            if !(t1 > 0.0 && t2 > 0.0) {
                return Err(Error::Domain(format!("sub-multiplicativity pairs must be positive, got ({t1}, {t2})")));
            }
            let ratio = self.g(t1) * self.g(t2) / self.g(t1 * t2);
            if ratio < inf {
                inf = ratio;
                at = (t1, t2);
            }
        }
        if inf <= 1e-12 {
            return Err(Error::Invariant(format!(
                "g is not sub-multiplicative on the grid: inf g(t1)g(t2)/g(t1 t2) = {inf:.3e} at (t1, t2) = ({:.3e}, {:.3e})",
                at.0, at.1
            )));
        }
        Ok(inf)
    }
}

/// Result of [`YoungFunction::estimate_growth_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthBounds {
    pub p_minus_hat: f64,
    pub p_plus_hat: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub offending: Vec<f64>,
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Default growth grid: 512 points over six decades.
pub fn default_growth_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 512)
}

/// Pairs on a 4-decade-per-axis log grid for the sub-multiplicativity scan.
pub fn default_submult_pairs() -> Vec<(f64, f64)> {
    let axis = log_grid(1e-2, 1e2, 41);
    axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect()
}

/// Substitution exponent that makes `x^e` polynomial after `x = v^beta`.
pub(crate) fn smoothing_beta(e: f64) -> f64 {
    if e <= -1.0 {
        return 1.0;
    }
    let k = (e + 1.0).ceil().max(1.0);
    k / (e + 1.0)
}

/// Solve `f(t) = y` for increasing `f` with derivative `df`, `f(0) = 0`.
///
/// The root is bracketed by growing the upper end by 4 until it passes `y`;
/// inside the bracket Newton steps are used when they stay inside,
/// bisection otherwise.
fn bracketed_inverse<F, D>(f: F, df: D, y: f64, tol: f64, name: &str) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < y {
        lo = hi;
        hi *= BRACKET_GROWTH;
        if hi > OVERFLOW_GUARD {
            return Err(Error::Numeric(format!("cannot bracket {name}^-1({y:e}): upper end exceeds 1e300")));
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..400 {
        let ft = f(t);
        if !ft.is_finite() {
            return Err(Error::Numeric(format!("non-finite {name}({t:e}) while inverting")));
        }
        let res = ft - y;
        if res.abs() <= tol {
            return Ok(t);
        }
        if res > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(t);
        }
        let d = df(t);
        let newton = t - res / d;
        t = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::Numeric(format!("{name}^-1({y:e}) did not converge; bracket [{lo:e}, {hi:e}]")))
}

/// The boundary weight `Φ(t) = ∫_0^t G^{-1}(G(1) τ^{q*-1}) dτ` together with
/// the exponent `r = p⁻ / (p⁻ + q* - 1)`.
#[derive(Debug, Clone)]
pub struct PhiWeight {
    base: YoungFunction,
    q_star: f64,
    r: f64,
    g_one: f64,
}

impl PhiWeight {
    pub fn new(base: YoungFunction, q_star: f64) -> Result<Self> {
        if !(q_star.is_finite() && q_star > 1.0) {
            return Err(Error::Config(format!("q_star must exceed 1, got {q_star}")));
        }
        let r = base.p_minus() / (base.p_minus() + q_star - 1.0);
        let g_one = base.eval_big_g(1.0)?;
        let w = Self { base, q_star, r, g_one };
        w.validate()?;
        Ok(w)
    }

    /// Use an explicit exponent `r` instead of `p⁻ / (p⁻ + q* - 1)`.
    pub fn with_r(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!("r must be positive, got {r}")));
        }
        self.r = r;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let rq = self.r * self.q_star;
        if rq >= self.base.p_minus() {
            return Err(Error::Config(format!(
                "hypothesis rq^* < p^- violated: r*q_star = {rq:.6} >= p_minus = {}",
                self.base.p_minus()
            )));
        }
        Ok(())
    }

    pub fn base(&self) -> &YoungFunction {
        &self.base
    }

    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `Φ'(t) = G^{-1}(G(1) t^{q*-1})`.
    pub fn phi_prime(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::Domain(format!("phi expects t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        self.base.invert_big_g(self.g_one * t.powf(self.q_star - 1.0))
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::Domain(format!("phi expects t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        // by parts in σ = Φ'(τ): Φ(t) = t Φ'(t) - ∫_0^{Φ'(t)} (G(σ)/G(1))^{1/(q*-1)} dσ
        let top = self.phi_prime(t)?;
        let k = 1.0 / (self.q_star - 1.0);
        let e = self.base.exponent_at_zero() * k;
        let rest = integrate_from_zero(|sig| Ok((self.base.eval_big_g(sig)? / self.g_one).powf(k)), top, e)?;
        Ok(t * top - rest)
    }

    /// Empirical `(inf, sup)` of `x Φ'(x) / Φ(x)` over `grid`.
    pub fn theta_bounds(&self, grid: &[f64]) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in grid {
            let v = x * self.phi_prime(x)? / self.phi(x)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    }
}

/// `∫_0^t f` with `f(x) ~ x^e` near 0, integrated relative to the scale
/// `t f(t)` so that tiny integrals keep their relative accuracy.
fn integrate_from_zero(f: impl Fn(f64) -> Result<f64>, t: f64, e: f64) -> Result<f64> {
    let ft = f(t)?;
    let scale = if ft.is_finite() && ft != 0.0 { (t * ft).abs() } else { 1.0 };
    let failure = RefCell::new(None);
    let r = integrate_power_sub(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            match f(x) {
                Ok(v) => v / scale,
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    f64::NAN
                }
            }
        },
        0.0,
        t,
        smoothing_beta(e),
        QUAD_TOL,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(r?.value * scale)
}

/// Plain integral helper used by tests and diagnostics.
pub fn integrate_g(yf: &YoungFunction, a: f64, b: f64) -> Result<f64> {
    integrate(|x| yf.g(x), a, b, QUAD_TOL).map(|r| r.value)
}
