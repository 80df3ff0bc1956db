//! Discrete Orlicz modulars and Luxemburg norms on mesh functions.

use crate::error::{Error, Result};
use crate::mesh::GridFunction;
use crate::nonlocal::{Discretization, ModularReport, OperatorConfig};
use crate::young::YoungFunction;

/// Target accuracy `|modular(u/λ) - 1|` of the Luxemburg bisection.
pub const LUX_TOL: f64 = 1e-10;
const LUX_LO: f64 = 1e-12;
const LUX_HI: f64 = 1e12;

/// `Σ_i G(|v_i|) w_i`.
pub fn modular_lg(u: &GridFunction, yf: &YoungFunction) -> f64 {
    modular_l_with(u, |t| Ok(yf.big_g(t))).expect("closed-form modular cannot fail")
}

/// `Σ_i Ψ(|v_i|) w_i` for an arbitrary N-function `Ψ`.
pub fn modular_l_with(u: &GridFunction, psi: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut acc = 0.0;
    for (v, w) in u.values().iter().zip(u.mesh().weights()) {
        if *v != 0.0 {
            acc += psi(v.abs())? * w;
        }
    }
    Ok(acc)
}

pub fn luxemburg_norm_lg(u: &GridFunction, yf: &YoungFunction) -> Result<f64> {
    luxemburg(u, |lam| Ok(modular_lg(&u.scaled(1.0 / lam), yf)))
}

/// Luxemburg norm for the Orlicz space of an arbitrary N-function `Ψ`.
pub fn luxemburg_norm_with(u: &GridFunction, psi: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    luxemburg(u, |lam| modular_l_with(&u.scaled(1.0 / lam), &psi))
}

/// Discrete Gagliardo modular over ℝ×ℝ of the zero extension, with the
/// default operator settings.
pub fn modular_w(u: &GridFunction, yf: &YoungFunction, s: f64) -> Result<f64> {
    let cfg = OperatorConfig::new(yf.clone(), s)?;
    modular_w_report(u, &cfg).map(|r| r.value)
}

/// Modular with the exterior remainder and the accuracy warning flag.
pub fn modular_w_report(u: &GridFunction, cfg: &OperatorConfig) -> Result<ModularReport> {
    Discretization::new(cfg, u.mesh())?.modular_report(u)
}

pub fn luxemburg_seminorm_w(u: &GridFunction, yf: &YoungFunction, s: f64) -> Result<f64> {
    let cfg = OperatorConfig::new(yf.clone(), s)?;
    luxemburg_seminorm_w_with(&Discretization::new(&cfg, u.mesh())?, u)
}

/// Seminorm reusing an assembled discretization.
pub fn luxemburg_seminorm_w_with(disc: &Discretization, u: &GridFunction) -> Result<f64> {
    luxemburg(u, |lam| disc.modular(&u.scaled(1.0 / lam)))
}

/// `inf { λ > 0 : modular(u/λ) ≤ 1 }` by bisection in `log λ`.
fn luxemburg(u: &GridFunction, modular_at: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    if u.values().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (LUX_LO.ln(), LUX_HI.ln());
    let m_lo = modular_at(LUX_LO)?;
    let m_hi = modular_at(LUX_HI)?;
    if !(m_lo >= 1.0 && m_hi <= 1.0) {
        return Err(Error::Numeric(format!(
            "Luxemburg bracket [{LUX_LO:e}, {LUX_HI:e}] does not contain the norm: modular {m_lo:.3e} .. {m_hi:.3e}"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..400 {
        mid = 0.5 * (lo + hi);
        let m = modular_at(mid.exp())?;
        if (m - 1.0).abs() <= LUX_TOL {
            return Ok(mid.exp());
        }
        if m > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    // modular is continuous; the bracket collapsed to machine precision
    Ok(mid.exp())
}

/// Both sides of the Orlicz Hölder inequality for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderSides {
    /// `Σ |u_i v_i| w_i`
    pub product: f64,
    pub norm_u: f64,
    /// Luxemburg norm of `v` for the conjugate function.
    pub norm_v_conj: f64,
}

impl HolderSides {
    /// Smallest constant that makes the inequality hold for this pair.
    pub fn constant(&self) -> f64 {
        let denom = self.norm_u * self.norm_v_conj;
        if denom == 0.0 {
            0.0
        } else {
            self.product / denom
        }
    }
}

pub fn holder_sides(u: &GridFunction, v: &GridFunction, yf: &YoungFunction) -> Result<HolderSides> {
    let product = u
        .values()
        .iter()
        .zip(v.values())
        .zip(u.mesh().weights())
        .map(|((a, b), w)| (a * b).abs() * w)
        .sum();
    Ok(HolderSides {
        product,
        norm_u: luxemburg_norm_lg(u, yf)?,
        norm_v_conj: luxemburg_norm_with(v, |t| yf.eval_gbar(t))?,
    })
}

/// `modular_LG(u) / modular_W(u)` for one zero-boundary function.
pub fn poincare_ratio(disc: &Discretization, u: &GridFunction) -> Result<f64> {
    let w = disc.modular(u)?;
    if w == 0.0 {
        return Err(Error::Domain("Poincaré ratio undefined for the zero function".into()));
    }
    Ok(modular_lg(u, &disc.config().yf) / w)
}
