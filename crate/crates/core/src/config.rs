//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Every key may appear
//! at most once; unknown keys are rejected. See `docs/config.md` for the
//! full schema.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{GridFunction, Mesh};
use crate::nonlocal::{OperatorConfig, TailMode};
use crate::solver::{Case, ProblemData, SchemeOptions};
use crate::young::{PhiWeight, YoungFunction};

const KEYS: &[&str] = &[
    "family",
    "p",
    "p1",
    "p2",
    "a",
    "b",
    "c",
    "p_minus",
    "p_plus",
    "s",
    "M",
    "f",
    "f_file",
    "q",
    "q_star",
    "delta",
    "case",
    "n_schedule",
    "samples",
    "eps",
    "meshes",
    "r",
    "near_band",
    "r_far",
    "tail_mode",
    "seed",
    "plot",
    "alphas",
    "tol_fixed_point",
    "tol_inner",
    "tol_mono",
    "tol_cauchy",
];

/// Nodal profile given by a whitelisted expression tag.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// `const:c`
    Const(f64),
    /// `gaussian:amp,center,width` = `amp exp(-((x-center)/width)^2)`
    Gaussian { amp: f64, center: f64, width: f64 },
    /// `bump:amp,radius` = `amp max(0, 1 - (x/radius)^2)`
    Bump { amp: f64, radius: f64 },
    /// `abs-power:amp,exp` = `amp |x|^exp`
    AbsPower { amp: f64, exp: f64 },
}

impl Expr {
    pub fn parse(key: &str, text: &str) -> Result<Self> {
        let text = text.trim();
        if let Ok(c) = text.parse::<f64>() {
            return Ok(Expr::Const(c));
        }
        let (tag, args) = text
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("{key}: expected tag:args (const, gaussian, bump, abs-power), got '{text}'")))?;
        let nums = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("{key}: '{}' is not a number", a.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        let want = |n: usize, form: &str| -> Result<()> {
            if nums.len() != n {
                return Err(Error::Config(format!("{key}: {tag} takes {n} argument(s): {form}")));
            }
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{key}: arguments must be finite")));
            }
            Ok(())
        };
        match tag.trim() {
            "const" => {
                want(1, "const:c")?;
                Ok(Expr::Const(nums[0]))
            }
            "gaussian" => {
                want(3, "gaussian:amp,center,width")?;
                if nums[2] <= 0.0 {
                    return Err(Error::Config(format!("{key}: gaussian width must be positive")));
                }
                Ok(Expr::Gaussian { amp: nums[0], center: nums[1], width: nums[2] })
            }
            "bump" => {
                want(2, "bump:amp,radius")?;
                if nums[1] <= 0.0 {
                    return Err(Error::Config(format!("{key}: bump radius must be positive")));
                }
                Ok(Expr::Bump { amp: nums[0], radius: nums[1] })
            }
            "abs-power" => {
                want(2, "abs-power:amp,exp")?;
                if nums[1] < 0.0 {
                    return Err(Error::Config(format!("{key}: abs-power exponent must be nonnegative")));
                }
                Ok(Expr::AbsPower { amp: nums[0], exp: nums[1] })
            }
            other => Err(Error::Config(format!(
                "{key}: unknown expression tag '{other}' (allowed: const, gaussian, bump, abs-power)"
            ))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Expr::Const(c) => c,
            Expr::Gaussian { amp, center, width } => amp * (-((x - center) / width).powi(2)).exp(),
            Expr::Bump { amp, radius } => amp * (1.0 - (x / radius).powi(2)).max(0.0),
            Expr::AbsPower { amp, exp } => amp * x.abs().powf(exp),
        }
    }
}

/// Source of the datum `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum Datum {
    Expr(Expr),
    /// Nodal values read from a file, one per line (or `x,value`).
    Nodal(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub yf: YoungFunction,
    pub s: f64,
    pub m: usize,
    pub f: Datum,
    pub q: Expr,
    pub q_star: f64,
    pub delta: f64,
    pub case: Case,
    pub n_schedule: Vec<u32>,
    pub samples: usize,
    pub eps: f64,
    pub meshes: Vec<usize>,
    pub r: Option<f64>,
    pub near_band: usize,
    pub r_far: f64,
    pub tail_mode: TailMode,
    pub seed: u64,
    pub plot: bool,
    pub alphas: Vec<f64>,
    pub options: SchemeOptions,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parse config text; relative `f_file` paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
            }
            if kv.insert(k.clone(), v).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let num = |k: &str, default: Option<f64>| -> Result<f64> {
            match get(k) {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Config(format!("{k}: '{v}' is not a finite number"))),
                None => default.ok_or_else(|| Error::Config(format!("missing required key '{k}'"))),
            }
        };
        let int = |k: &str, default: u64| -> Result<u64> {
            match get(k) {
                Some(v) => parse_int(v).ok_or_else(|| Error::Config(format!("{k}: '{v}' is not a nonnegative integer"))),
                None => Ok(default),
            }
        };

        let family = get("family").ok_or_else(|| Error::Config("missing required key 'family'".into()))?;
        let mut yf = match family {
            "power" => YoungFunction::power(num("p", None)?)?,
            "double-power" => YoungFunction::double_power(num("p1", None)?, num("p2", None)?)?,
            "log-type" => YoungFunction::log_type(num("a", None)?, num("b", None)?, num("c", None)?)?,
            other => {
                return Err(Error::Config(format!(
                    "family: unknown family '{other}' (allowed: power, double-power, log-type)"
                )))
            }
        };
        if get("p_minus").is_some() || get("p_plus").is_some() {
            let pm = num("p_minus", Some(yf.p_minus()))?;
            let pp = num("p_plus", Some(yf.p_plus().max(pm)))?;
            yf = yf.with_declared_bounds(pm, pp)?;
        }

        let s = num("s", Some(0.3))?;
        let m = int("M", 33)? as usize;
        Mesh::new(m)?;
        let f = match (get("f"), get("f_file")) {
            (Some(_), Some(_)) => return Err(Error::Config("give either f or f_file, not both".into())),
            (Some(e), None) => Datum::Expr(Expr::parse("f", e)?),
            (None, Some(file)) => Datum::Nodal(read_nodal(&base.join(file))?),
            (None, None) => Datum::Expr(Expr::Const(1.0)),
        };
        let q = Expr::parse("q", get("q").unwrap_or("0.5"))?;
        let q_star = num("q_star", Some(2.0))?;
        let delta = num("delta", Some(0.25))?;
        let case = match get("case").unwrap_or("main1") {
            "main1" => Case::Main1,
            "main2" => Case::Main2,
            other => return Err(Error::Config(format!("case: expected main1 or main2, got '{other}'"))),
        };
        let n_schedule = list(get("n_schedule").unwrap_or("1,2,4,8,16"), "n_schedule", |v| {
            parse_int(v).filter(|&n| n >= 1 && n <= u32::MAX as u64).map(|n| n as u32)
        })?;
        let meshes = list(get("meshes").unwrap_or("33,65,129"), "meshes", |v| parse_int(v).map(|n| n as usize))?;
        let alphas = list(get("alphas").unwrap_or("2,4,8,16"), "alphas", |v| v.parse::<f64>().ok())?;
        let r = get("r").map(|_| num("r", None)).transpose()?;
        let tail_mode = match get("tail_mode").unwrap_or("analytic") {
            "analytic" => TailMode::Analytic,
            "zero" => TailMode::Zero,
            other => return Err(Error::Config(format!("tail_mode: expected analytic or zero, got '{other}'"))),
        };
        let plot = match get("plot").unwrap_or("true") {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            other => return Err(Error::Config(format!("plot: expected true or false, got '{other}'"))),
        };
        let d = SchemeOptions::default();
        let options = SchemeOptions {
            fixed_point_tol: num("tol_fixed_point", Some(d.fixed_point_tol))?,
            inner_tol: num("tol_inner", Some(d.inner_tol))?,
            tol_mono: num("tol_mono", Some(d.tol_mono))?,
            cauchy_tol: num("tol_cauchy", Some(d.cauchy_tol))?,
        };
        if [options.fixed_point_tol, options.inner_tol, options.tol_mono, options.cauchy_tol].iter().any(|&t| t <= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }

        let cfg = Self {
            yf,
            s,
            m,
            f,
            q,
            q_star,
            delta,
            case,
            n_schedule,
            samples: int("samples", 1000)? as usize,
            eps: num("eps", Some(1.0))?,
            meshes,
            r,
            near_band: int("near_band", 1)? as usize,
            r_far: num("r_far", Some(100.0))?,
            tail_mode,
            seed: int("seed", crate::verify::DEFAULT_SEED)?,
            plot,
            alphas,
            options,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Module-level preconditions that do not depend on the mesh.
    pub fn validate(&self) -> Result<()> {
        self.operator()?;
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("n_schedule must be strictly increasing, got {:?}", self.n_schedule)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if let Datum::Nodal(v) = &self.f {
            if v.len() != self.m {
                return Err(Error::Config(format!("f_file has {} values but M = {}", v.len(), self.m)));
            }
        }
        if self.case == Case::Main2 {
            self.phi_weight()?;
        } else if let Some(r) = self.r {
            return Err(Error::Config(format!("r = {r} is only meaningful for case main2")));
        }
        self.problem(self.m)?;
        Ok(())
    }

    pub fn operator(&self) -> Result<OperatorConfig> {
        Ok(OperatorConfig::new(self.yf.clone(), self.s)?
            .with_near_band(self.near_band)?
            .with_r_far(self.r_far)?
            .with_tail_mode(self.tail_mode))
    }

    pub fn phi_weight(&self) -> Result<PhiWeight> {
        let w = PhiWeight::new(self.yf.clone(), self.q_star)?;
        match self.r {
            Some(r) => w.with_r(r),
            None => Ok(w),
        }
    }

    /// Problem data sampled on a mesh with `m` nodes.
    pub fn problem(&self, m: usize) -> Result<ProblemData> {
        let mesh = Mesh::new(m)?;
        let f = match &self.f {
            Datum::Expr(e) => GridFunction::from_fn(&mesh, |x| e.eval(x))?,
            Datum::Nodal(v) if v.len() == m => GridFunction::new(mesh.clone(), v.clone())?,
            Datum::Nodal(v) => {
                return Err(Error::Config(format!("f_file has {} values, cannot be used on a mesh of {m} nodes", v.len())))
            }
        };
        let q = GridFunction::from_fn(&mesh, |x| self.q.eval(x))?;
        ProblemData::new(f, q, self.q_star, self.delta, self.case)
    }
}

fn parse_int(v: &str) -> Option<u64> {
    let v = v.trim();
    match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => v.parse().ok(),
    }
}

fn list<T>(text: &str, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let out = text
        .split(',')
        .map(|v| parse(v.trim()).ok_or_else(|| Error::Config(format!("{key}: cannot parse entry '{}'", v.trim()))))
        .collect::<Result<Vec<T>>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("{key} must not be empty")));
    }
    Ok(out)
}

fn read_nodal(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read f_file {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            let field = l.rsplit(',').next().unwrap_or(l).trim();
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("f_file line {}: '{l}' has no finite value", i + 1)))
        })
        .collect()
}
