//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (7/15) and
//! fixed Gauss–Legendre rules.
//!
//! Integrands with an algebraic endpoint singularity at the left end are
//! handled by [`integrate_power_sub`], which maps `t = a + (b - a) v^beta`
//! before integrating in `v`.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute error floor shared by every adaptive integration.
pub const ABS_FLOOR: f64 = 1e-14;

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let h = half.abs();
    Segment {
        a,
        b,
        value: res_k * half,
        err: rescale_error(err, res_abs * h, res_asc * h),
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is below
/// `max(ABS_FLOOR, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0, intervals: 0 });
    }
    let first = gk15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Numeric(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut segs = vec![first];
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let tol = ABS_FLOOR.max(rel_tol * total.abs());
        if err <= tol {
            return Ok(QuadResult { value: total, abs_err: err, intervals: segs.len() });
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "adaptive quadrature on [{a}, {b}] stopped at {} intervals: estimate {total:.6e}, error {err:.3e}, tolerance {tol:.3e}",
                segs.len()
            )));
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.err > acc.1 { (i, s.err) } else { acc });
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval cannot be split further in floating point
            return Ok(QuadResult { value: total, abs_err: err, intervals: segs.len() + 1 });
        }
        let left = gk15(&f, s.a, mid);
        let right = gk15(&f, mid, s.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::Numeric(format!("non-finite integrand near [{}, {}]", s.a, s.b)));
        }
        segs.push(left);
        segs.push(right);
    }
}

/// Integrate `f` over `[a, b]` after substituting `t = a + (b - a) v^beta`.
///
/// For `f(t) ~ (t - a)^e` near `a`, choosing `beta` with `beta (e + 1)` a
/// small positive integer turns the integrand into a polynomial-like one.
pub fn integrate_power_sub<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    beta: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    let len = b - a;
    if len == 0.0 {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0, intervals: 0 });
    }
    let g = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let vb1 = v.powf(beta - 1.0);
        f(a + len * vb1 * v) * len * beta * vb1
    };
    integrate(g, 0.0, 1.0, rel_tol)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Apply the rule on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-12).unwrap();
        let exact = (64.0 / 6.0 - 1.0 / 6.0) - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn gk_sqrt_singularity() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn power_substitution_removes_inverse_root() {
        // int_0^1 x^{-0.8} dx = 5
        let r = integrate_power_sub(|x: f64| x.powf(-0.8), 0.0, 1.0, 5.0, 1e-12).unwrap();
        assert!((r.value - 5.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn legendre_rule_exact_to_degree() {
        let gl = GaussLegendre::new(8);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let v = gl.integrate(|x| x.powi(15) + x.powi(14), -1.0, 1.0);
        assert!((v - 2.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn zero_length_interval() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-10).unwrap().value, 0.0);
    }
}
