//! Command-line front end: `check-young`, `solve` and `convergence`.
//!
//! Exit codes: 0 success, 1 numeric or invariant failure, 2 configuration
//! error. All CSV output uses LF line endings and 12 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{Datum, RunConfig};
use crate::error::{Error, Result};
use crate::mesh::GridFunction;
use crate::nonlocal::Discretization;
use crate::orlicz::luxemburg_seminorm_w_with;
use crate::solver::{self, Case, SolveReport};
use crate::verify::{self, fmt12, CheckOutcome};

type CommandFn = fn(&RunConfig, &Path) -> Result<bool>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gfrac", version, about = "Singular fractional g-Laplacian solver and inequality checks on (-1, 1)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Young-function inequality suite and write checks.csv.
    CheckYoung(CommonArgs),
    /// Run the monotone scheme and write solution.csv and diagnostics.csv.
    Solve(CommonArgs),
    /// Solve on nested meshes and write convergence.csv.
    Convergence(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration (flat key = value file).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the SVG plot.
    #[arg(long)]
    pub no_plot: bool,
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (args, cmd): (&CommonArgs, CommandFn) = match &cli.command {
        Command::CheckYoung(a) => (a, cmd_check_young),
        Command::Solve(a) => (a, cmd_solve),
        Command::Convergence(a) => (a, cmd_convergence),
    };
    let result = load(args).and_then(|cfg| {
        std::fs::create_dir_all(&args.out)?;
        cmd(&cfg, &args.out)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NoConvergence { history, .. } = &e {
                eprintln!("residual history: {history:?}");
            }
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.no_plot {
        cfg.plot = false;
    }
    Ok(cfg)
}

fn write(out: &Path, name: &str, body: &str) -> Result<()> {
    std::fs::write(out.join(name), body)?;
    Ok(())
}

/// Writes `checks.csv`; `Ok(true)` iff every check passes.
pub fn cmd_check_young(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let outcomes = verify::young_suite(&cfg.yf, cfg.q_star, cfg.eps, cfg.samples, cfg.seed)?;
    write(out, "checks.csv", &verify::outcomes_csv(&outcomes))?;
    report_checks(&outcomes);
    Ok(outcomes.iter().all(|o| o.pass))
}

fn report_checks(outcomes: &[CheckOutcome]) {
    for o in outcomes {
        let status = if o.pass { "pass" } else { "FAIL" };
        print!("{:<18} {status}  worst margin {:+.3e}", o.name, o.worst_margin);
        match &o.offending {
            Some(s) if !o.pass => println!("  at {s}"),
            _ => println!(),
        }
    }
}

/// Checks the solver depends on; the `Φ` checks only matter for main2.
fn gate(cfg: &RunConfig) -> Result<Vec<CheckOutcome>> {
    let (yf, n, seed) = (&cfg.yf, cfg.samples, cfg.seed);
    let mut v = vec![
        verify::check_growth(yf),
        verify::check_delta2(yf, n, seed)?,
        verify::check_lindqvist(yf, n, seed)?,
        verify::check_gdiff(yf, n, seed)?,
        verify::check_conjugate(yf, n, seed)?,
    ];
    if cfg.case == Case::Main2 {
        let w = cfg.phi_weight()?;
        v.push(verify::check_phi_mvt(&w, cfg.eps, n, seed)?);
        v.push(verify::check_rpower(&w, n)?);
        v.push(verify::check_submultiplicative(yf));
    }
    Ok(v)
}

fn solve_on(cfg: &RunConfig, m: usize) -> Result<SolveReport> {
    let op = cfg.operator()?;
    let data = cfg.problem(m)?;
    solver::monotone_scheme_with(&op, &data, &cfg.n_schedule, &cfg.options)
}

/// Writes `solution.csv`, `diagnostics.csv` and optionally `solution.svg`.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let checks = gate(cfg)?;
    if checks.iter().any(|o| !o.pass) {
        write(out, "checks.csv", &verify::outcomes_csv(&checks))?;
        report_checks(&checks);
        eprintln!("error: inequality checks failed, solver not run (see checks.csv)");
        return Ok(false);
    }
    let op = cfg.operator()?;
    let data = cfg.problem(cfg.m)?;
    let report = solver::monotone_scheme_with(&op, &data, &cfg.n_schedule, &cfg.options)?;
    let energy = solver::boundary_energy_report_with(&op, &report, &data, cfg.r)?;
    let disc = Discretization::new(&op, data.mesh())?;

    write(out, "solution.csv", &solution_csv(&report))?;
    write(out, "diagnostics.csv", &diagnostics_csv(&report, &energy.modulars, &energy.seminorms))?;
    if cfg.plot {
        write(out, "solution.svg", &solution_svg(&report))?;
    }

    let u = report.solution();
    println!(
        "n = {:?}: sup u = {:.6e}, l(K) = {:.6e}, holder alpha = {:.4}, energy band {:.4}, converged = {}",
        report.n_schedule,
        u.sup_norm(),
        report.lower_bounds.last().copied().unwrap_or(0.0),
        report.holder.0,
        energy.band,
        report.converged
    );
    println!("final residual {:.3e}", report.residuals.last().copied().unwrap_or(0.0));
    // seminorm of u itself, useful for main2 where the diagnostics hold Φ(u)
    if cfg.case == Case::Main2 {
        println!("seminorm of u_n: {:.6e}", luxemburg_seminorm_w_with(&disc, u)?);
    }
    Ok(true)
}

/// Writes `convergence.csv`; `Ok(true)` iff the mesh differences do not increase.
pub fn cmd_convergence(cfg: &RunConfig, out: &Path) -> Result<bool> {
    if cfg.meshes.len() < 2 {
        return Err(Error::Config(format!("convergence needs at least two meshes, got {:?}", cfg.meshes)));
    }
    if matches!(cfg.f, Datum::Nodal(_)) {
        return Err(Error::Config("convergence needs f as an expression; f_file fixes a single mesh".into()));
    }
    for w in cfg.meshes.windows(2) {
        if w[1] != 2 * w[0] - 1 {
            return Err(Error::Config(format!("meshes must be nested (M, 2M - 1, ...), got {:?}", cfg.meshes)));
        }
    }
    let solutions = cfg
        .meshes
        .iter()
        .map(|&m| solve_on(cfg, m).map(|r| r.solution().clone()))
        .collect::<Result<Vec<GridFunction>>>()?;
    let mut csv = String::from("M_coarse,M_fine,sup_diff\n");
    let mut diffs = Vec::new();
    for (k, pair) in solutions.windows(2).enumerate() {
        let d = pair[0].sup_diff_on_shared(&pair[1]);
        diffs.push(d);
        let _ = writeln!(csv, "{},{},{}", cfg.meshes[k], cfg.meshes[k + 1], fmt12(d));
    }
    write(out, "convergence.csv", &csv)?;
    let ok = diffs.windows(2).all(|w| w[1] <= w[0]);
    for (k, d) in diffs.iter().enumerate() {
        println!("M {} -> {}: sup diff {:.6e}", cfg.meshes[k], cfg.meshes[k + 1], d);
    }
    if !ok {
        eprintln!("error: mesh differences increase: {diffs:?}");
    }
    Ok(ok)
}

/// `x,u_<n>...` with one column per schedule entry.
pub fn solution_csv(report: &SolveReport) -> String {
    let mut s = String::from("x");
    for n in &report.n_schedule {
        let _ = write!(s, ",u_{n}");
    }
    s.push('\n');
    let mesh = report.solution().mesh();
    for i in 0..mesh.len() {
        s.push_str(&fmt12(mesh.x(i)));
        for u in &report.snapshots {
            s.push(',');
            s.push_str(&fmt12(u.values()[i]));
        }
        s.push('\n');
    }
    s
}

/// One row per schedule entry. `modular_W` and `seminorm_W` refer to `u_n`
/// (main1) or `Φ(u_n)` (main2); `increment` is `‖u_n - u_prev‖_∞`.
pub fn diagnostics_csv(report: &SolveReport, modulars: &[f64], seminorms: &[f64]) -> String {
    let mut s = String::from(
        "n,fixed_point_iterations,residual,modular_W,seminorm_W,lower_bound_lK,increment,holder_alpha,holder_quotient,converged\n",
    );
    for (k, n) in report.n_schedule.iter().enumerate() {
        let (alpha, quot) = solver::holder_exponent_fit(&report.snapshots[k]);
        let inc = if k == 0 { String::new() } else { fmt12(report.increments[k - 1]) };
        let last = k + 1 == report.n_schedule.len();
        let _ = writeln!(
            s,
            "{n},{},{},{},{},{},{inc},{},{},{}",
            report.fixed_point_iterations[k],
            fmt12(report.residuals[k]),
            fmt12(modulars[k]),
            fmt12(seminorms[k]),
            fmt12(report.lower_bounds[k]),
            fmt12(alpha),
            fmt12(quot),
            last && report.converged
        );
    }
    s
}

/// Static line plot of every snapshot.
pub fn solution_svg(report: &SolveReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let top = report.snapshots.iter().map(GridFunction::sup_norm).fold(0.0, f64::max).max(1e-300);
    let px = |x: f64| PAD + (x + 1.0) / 2.0 * (W - 2.0 * PAD);
    let py = |u: f64| H - PAD - u / top * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} H{:.2} M{:.2} {:.2} V{:.2}" stroke="black" fill="none"/>"#,
        PAD,
        H - PAD,
        W - PAD,
        PAD,
        H - PAD,
        PAD
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" font-size="12">-1</text>"#, H - PAD + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">1</text>"#, W - PAD - 6.0, H - PAD + 16.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-size="12">{top:.3e}</text>"#, PAD - 6.0);
    let k = report.snapshots.len();
    for (j, u) in report.snapshots.iter().enumerate() {
        let shade = if k > 1 { 200 - (200 * j) / (k - 1) } else { 0 };
        let pts: Vec<String> = u
            .mesh()
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(&x, &v)| format!("{:.2},{:.2}", px(x), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="rgb({shade},{shade},255)"><title>n = {}</title></polyline>"#,
            pts.join(" "),
            report.n_schedule[j]
        );
    }
    s.push_str("</svg>\n");
    s
}
