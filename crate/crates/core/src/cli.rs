//! Command-line front end.
//!
//! Every subcommand writes plot-ready CSV (header row, fixed column order,
//! values as `{:.14e}`) plus, where noted, a JSON summary into the output
//! directory:
//!
//! | subcommand    | files                                                        |
//! |---------------|--------------------------------------------------------------|
//! | `flux-table`  | `flux_table.csv`: S, C, f, df_dS, df_dC, d2f_dS2, lambda_S, lambda_C |
//! | `phase-plane` | `transition.csv`: C, S_star, lambda_peak; with `--left`, `level_curve.csv`: C, S, side |
//! | `solve`       | `solve_<name>.csv`: x, S, C; `solve_<name>.json`               |
//! | `simulate`    | `simulate_<name>.csv`: t, x, S, C; `simulate_<name>.json`      |
//! | `compare`     | `compare_<name>.csv`: x, S_num, C_num, S_exact, C_exact (cell averages); `compare_<name>.json` |
//! | `scan`        | `scan_<name>.csv`: S_R, C_R, region, boundary, wave_count, waves; `scan_<name>.json` |
//!
//! Failures print one JSON record `{"error", "message", "exit_code"}` on
//! stderr and exit with a code that identifies the failure class.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, ProblemSpec, RunConfig, ScanSpec, DEFAULT_PARAMS};
use crate::flux::{FluxError, FluxModel, State, StarsFlux};
use crate::pde::{self, PdeError};
use crate::riemann::{self, RiemannError, RiemannProblem, RiemannSolution};
use crate::waves::{self, Tolerances, WaveError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_COMPUTATION: i32 = 5;
pub const EXIT_OUTPUT: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Riemann(#[from] RiemannError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Flux(_) => EXIT_VALIDATION,
            CliError::Pde(PdeError::InvalidConfig { .. }) => EXIT_VALIDATION,
            CliError::Riemann(_) | CliError::Wave(_) | CliError::Pde(_) => EXIT_COMPUTATION,
            CliError::Output { .. } => EXIT_OUTPUT,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_CONFIG => "config",
            EXIT_VALIDATION => "validation",
            EXIT_COMPUTATION => "computation",
            _ => "output",
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> serde_json::Value {
        json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() })
    }
}

#[derive(Debug, Parser)]
#[command(name = "foam-riemann", version, about = "Riemann solutions and implicit simulations for foam flow with surfactant adsorption")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Parameter-set name.
    #[arg(long, global = true)]
    pub params: Option<String>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Transition-curve membership tolerance.
    #[arg(long, global = true)]
    pub tol_transition: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Named problem from the configuration.
    #[arg(long)]
    pub problem: Option<String>,
    /// Left state `S,C` (with --right, replaces --problem).
    #[arg(long, value_parser = parse_state, requires = "right")]
    pub left: Option<State>,
    /// Right state `S,C`.
    #[arg(long, value_parser = parse_state, requires = "left")]
    pub right: Option<State>,
    /// Evaluation time.
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Number of grid cells on [0, 1].
    #[arg(long)]
    pub cells: Option<usize>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time (defaults to the problem time).
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the flux, its derivatives and both characteristic speeds.
    FluxTable {
        /// Saturation samples on [0, 1].
        #[arg(long, default_value_t = 101)]
        s_points: usize,
        /// Concentration samples on [0, 1].
        #[arg(long, default_value_t = 11)]
        c_points: usize,
    },
    /// Transition curve and, optionally, the λ_C level curve through a state.
    PhasePlane {
        /// Concentration samples on [0, 1].
        #[arg(long, default_value_t = 101)]
        c_points: usize,
        /// State `S,C` whose level curve is traced.
        #[arg(long, value_parser = parse_state)]
        left: Option<State>,
    },
    /// Solve a Riemann problem and sample its profile.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Run the implicit finite-difference solver.
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run both solvers and report L¹ differences.
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Sweep right states along a segment and report wave-pattern changes.
    Scan {
        /// Named scan from the configuration.
        #[arg(long, default_value = "contact-shock")]
        scan: String,
        /// Number of right states (overrides the configuration).
        #[arg(long)]
        points: Option<usize>,
    },
}

fn parse_state(text: &str) -> Result<State, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [s, c] = parts.as_slice() else {
        return Err(format!("expected S,C, got '{text}'"));
    };
    let s: f64 = s.parse().map_err(|e| format!("bad S '{s}': {e}"))?;
    let c: f64 = c.parse().map_err(|e| format!("bad C '{c}': {e}"))?;
    State::new(s, c).map_err(|e| e.to_string())
}

/// Fixed-width scientific notation used in every CSV.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.14e}")
}

struct Context {
    config: RunConfig,
    params_name: String,
    out: PathBuf,
    tol: Tolerances,
}

impl Context {
    fn new(global: &GlobalArgs) -> Result<Self, CliError> {
        let config = match &global.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut tol = config.tolerances;
        if let Some(t) = global.tol_transition {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(ConfigError::Invalid {
                    context: "--tol-transition".into(),
                    reason: format!("must be positive, got {t}"),
                }));
            }
            tol.transition = t;
        }
        let out = global.out.clone().unwrap_or_else(|| config.output.dir.clone());
        Ok(Context {
            params_name: global.params.clone().unwrap_or_else(|| DEFAULT_PARAMS.to_string()),
            config,
            out,
            tol,
        })
    }

    fn flux(&self, name: &str) -> Result<StarsFlux, CliError> {
        let params = self.config.params(name)?.clone();
        Ok(StarsFlux::new(params)?)
    }

    // Resolves --problem or --left/--right into a named problem.
    fn problem(&self, args: &ProblemArgs) -> Result<(String, ProblemSpec), CliError> {
        let (name, mut spec) = match (&args.problem, args.left, args.right) {
            (_, Some(l), Some(r)) => (
                "custom".to_string(),
                ProblemSpec {
                    params: self.params_name.clone(),
                    left: [l.s, l.c],
                    right: [r.s, r.c],
                    t: 1.0,
                    x_min: 0.0,
                    x_max: 1.0,
                    samples: 501,
                },
            ),
            (Some(name), _, _) => (name.clone(), self.config.problem(name)?.clone()),
            _ => return Err(CliError::Usage("give --problem NAME or --left S,C --right S,C".into())),
        };
        if let Some(t) = args.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--t must be positive, got {t}")));
            }
            spec.t = t;
        }
        Ok((name, spec))
    }

    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| output_err(path, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| output_err(path, e))?;
    w.write_record(header).map_err(|e| output_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| output_err(path, e))?;
    }
    w.flush().map_err(|e| output_err(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| output_err(path, e))?;
    }
    let file = File::create(path).map_err(|e| output_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| output_err(path, e))?;
    writeln!(w).map_err(|e| output_err(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn provenance(ctx: &Context, params_name: &str) -> Result<serde_json::Value, CliError> {
    Ok(json!({
        "version": env!("CARGO_PKG_VERSION"),
        "params_name": params_name,
        "params": ctx.config.params(params_name)?,
        "tolerances": ctx.tol,
    }))
}

fn flux_table(ctx: &Context, s_points: usize, c_points: usize) -> Result<(), CliError> {
    if s_points < 2 || c_points < 2 {
        return Err(CliError::Usage("--s-points and --c-points must be at least 2".into()));
    }
    let flux = ctx.flux(&ctx.params_name)?;
    let mut rows = Vec::with_capacity(s_points * c_points);
    for j in 0..c_points {
        let c = j as f64 / (c_points - 1) as f64;
        for i in 0..s_points {
            let u = State::new_unchecked(i as f64 / (s_points - 1) as f64, c);
            let d = flux.derivatives(u);
            let (ls, lc) = waves::eigenvalues(&flux, u);
            rows.push([u.s, u.c, flux.f(u), d.ds, d.dc, d.dss, ls, lc].map(fmt_num).to_vec());
        }
    }
    write_csv(
        &ctx.path("flux_table.csv"),
        &["S", "C", "f", "df_dS", "df_dC", "d2f_dS2", "lambda_S", "lambda_C"],
        rows,
    )
}

fn phase_plane(ctx: &Context, c_points: usize, left: Option<State>) -> Result<(), CliError> {
    if c_points < 2 {
        return Err(CliError::Usage("--c-points must be at least 2".into()));
    }
    let flux = ctx.flux(&ctx.params_name)?;
    let cs: Vec<f64> = (0..c_points).map(|j| j as f64 / (c_points - 1) as f64).collect();
    let mut rows = Vec::with_capacity(c_points);
    for &c in &cs {
        let (s, m) = waves::peak_lambda_c(&flux, c)?;
        rows.push(vec![fmt_num(c), fmt_num(s), fmt_num(m)]);
    }
    write_csv(&ctx.path("transition.csv"), &["C", "S_star", "lambda_peak"], rows)?;
    if let Some(u) = left {
        let curve = waves::gamma_curve(&flux, u);
        let mut rows = Vec::new();
        for &c in &cs {
            for p in curve.points_at(c, ctx.tol.transition)? {
                rows.push(vec![fmt_num(c), fmt_num(p.state.s), p.side.to_string()]);
            }
        }
        write_csv(&ctx.path("level_curve.csv"), &["C", "S", "side"], rows)?;
    }
    Ok(())
}

fn solution_summary(sol: &RiemannSolution) -> serde_json::Value {
    let waves: Vec<_> = sol
        .sequence
        .iter()
        .map(|w| {
            json!({
                "kind": w.kind,
                "left": w.left,
                "right": w.right,
                "v_initial": w.v_initial,
                "v_final": w.v_final,
            })
        })
        .collect();
    json!({
        "region": sol.region.base,
        "boundary": {
            "l1_l2": sol.region.l1_l2,
            "l1_l3": sol.region.l1_l3,
            "r1_r3": sol.region.r1_r3,
        },
        "left_side": sol.region.left_side,
        "construction": sol.construction,
        "left": sol.left,
        "right": sol.right,
        "waves": waves,
        "intermediates": sol.intermediates,
        "speed_span": sol.speed_span(),
        "alternate": sol.alternate.as_ref().map(|a| json!({
            "construction": a.construction,
            "waves": a.kinds(),
            "intermediates": a.intermediates,
        })),
    })
}

fn solve_problem(ctx: &Context, spec: &ProblemSpec) -> Result<(StarsFlux, RiemannSolution), CliError> {
    let flux = ctx.flux(&spec.params)?;
    let sol = RiemannProblem::new(&flux, spec.left_state(), spec.right_state())?
        .with_tolerances(ctx.tol)
        .solve()?;
    Ok((flux, sol))
}

fn solve_cmd(ctx: &Context, args: &ProblemArgs) -> Result<(), CliError> {
    let (name, spec) = ctx.problem(args)?;
    let (flux, sol) = solve_problem(ctx, &spec)?;
    let n = spec.samples;
    let rows = (0..n).map(|i| {
        let x = spec.x_min + (spec.x_max - spec.x_min) * i as f64 / (n - 1) as f64;
        let u = sol.sample(&flux, x, spec.t);
        vec![fmt_num(x), fmt_num(u.s), fmt_num(u.c)]
    });
    write_csv(&ctx.path(&format!("solve_{name}.csv")), &["x", "S", "C"], rows)?;
    let summary = json!({
        "problem": name,
        "input": spec,
        "run": provenance(ctx, &spec.params)?,
        "solution": solution_summary(&sol),
    });
    write_json(&ctx.path(&format!("solve_{name}.json")), &summary)?;
    println!("{name}: {} [{}]", sol.region.base, sol.kinds().iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "));
    Ok(())
}

fn sim_config(ctx: &Context, spec: &ProblemSpec, grid: &GridArgs) -> pde::SimConfig {
    let mut sim = ctx.config.simulation.clone();
    if let Some(n) = grid.cells {
        sim.n_cells = n;
    }
    if let Some(dt) = grid.dt {
        sim.dt = dt;
    }
    if grid.t_end.is_some() {
        sim.t_end = grid.t_end;
    }
    sim.for_problem(spec)
}

fn simulate_cmd(ctx: &Context, args: &ProblemArgs, grid: &GridArgs) -> Result<(), CliError> {
    let (name, spec) = ctx.problem(args)?;
    let flux = ctx.flux(&spec.params)?;
    let cfg = sim_config(ctx, &spec, grid);
    let num = pde::run(&cfg, &flux, &ctx.config.simulation.output_times)?;
    let mut rows = Vec::new();
    for (k, &t) in num.times.iter().enumerate() {
        for (i, &x) in num.x.iter().enumerate() {
            rows.push(vec![fmt_num(t), fmt_num(x), fmt_num(num.s[k][i]), fmt_num(num.c[k][i])]);
        }
    }
    write_csv(&ctx.path(&format!("simulate_{name}.csv")), &["t", "x", "S", "C"], rows)?;
    let meta = json!({
        "problem": name,
        "input": spec,
        "run": provenance(ctx, &spec.params)?,
        "grid": cfg,
        "times": num.times,
        "diagnostics": num.diagnostics,
    });
    write_json(&ctx.path(&format!("simulate_{name}.json")), &meta)?;
    println!("{name}: {} steps, {} Newton iterations", num.diagnostics.steps, num.diagnostics.newton_iterations);
    Ok(())
}

fn compare_cmd(ctx: &Context, args: &ProblemArgs, grid: &GridArgs) -> Result<(), CliError> {
    let (name, spec) = ctx.problem(args)?;
    let (flux, sol) = solve_problem(ctx, &spec)?;
    let cfg = sim_config(ctx, &spec, grid);
    let num = pde::run(&cfg, &flux, &[])?;
    let t = cfg.t_end;
    let (err_s, err_c) = pde::compare_l1(&num, &sol, &flux, t)?;
    let exact = pde::cell_averages(&sol, &flux, &num.x, cfg.dx(), t);
    let last = num.times.len() - 1;
    let rows = (0..num.x.len()).map(|i| {
        [num.x[i], num.s[last][i], num.c[last][i], exact.s[i], exact.c[i]]
            .map(fmt_num)
            .to_vec()
    });
    write_csv(
        &ctx.path(&format!("compare_{name}.csv")),
        &["x", "S_num", "C_num", "S_exact", "C_exact"],
        rows,
    )?;
    let report = json!({
        "problem": name,
        "input": spec,
        "run": provenance(ctx, &spec.params)?,
        "grid": cfg,
        "t": t,
        "err_S": err_s,
        "err_C": err_c,
        "waves": sol.kinds(),
        "diagnostics": num.diagnostics,
    });
    write_json(&ctx.path(&format!("compare_{name}.json")), &report)?;
    println!("{name}: errS = {err_s:.3e}, errC = {err_c:.3e}");
    Ok(())
}

fn scan_cmd(ctx: &Context, name: &str, points: Option<usize>) -> Result<(), CliError> {
    let spec: ScanSpec = ctx.config.scan(name)?.clone();
    let n = points.unwrap_or(spec.points);
    if n < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let flux = ctx.flux(&spec.params)?;
    let st = |u: [f64; 2]| State::new_unchecked(u[0], u[1]);
    let left = st(spec.left);
    let report = riemann::stability_scan(&flux, left, st(spec.from), st(spec.to), n, ctx.tol)?;
    let rows = report.points.iter().map(|p| {
        vec![
            fmt_num(p.right.s),
            fmt_num(p.right.c),
            p.region.to_string(),
            p.on_boundary.to_string(),
            p.wave_count.to_string(),
            p.kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("+"),
        ]
    });
    write_csv(
        &ctx.path(&format!("scan_{name}.csv")),
        &["S_R", "C_R", "region", "boundary", "wave_count", "waves"],
        rows,
    )?;
    let mut crossings = Vec::new();
    for c in &report.crossings {
        let (a, b) = (report.points[c.before].right, report.points[c.after].right);
        let at = riemann::refine_crossing(&flux, left, a, b, ctx.tol, 1e-12)?;
        println!(
            "{name}: wave pattern changes between S_R = {:.6} and {:.6} (refined {:.10}): [{}] -> [{}]",
            a.s,
            b.s,
            at.s,
            c.from.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "),
            c.to.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "),
        );
        crossings.push(json!({
            "between": [a, b],
            "refined": at,
            "from": c.from,
            "to": c.to,
        }));
    }
    let summary = json!({
        "scan": name,
        "input": spec,
        "points": n,
        "run": provenance(ctx, &spec.params)?,
        "crossings": crossings,
    });
    write_json(&ctx.path(&format!("scan_{name}.json")), &summary)
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let ctx = Context::new(&cli.global)?;
    ctx.config.params(&ctx.params_name)?;
    match &cli.command {
        Command::FluxTable { s_points, c_points } => flux_table(&ctx, *s_points, *c_points),
        Command::PhasePlane { c_points, left } => phase_plane(&ctx, *c_points, *left),
        Command::Solve { problem } => solve_cmd(&ctx, problem),
        Command::Simulate { problem, grid } => simulate_cmd(&ctx, problem, grid),
        Command::Compare { problem, grid } => compare_cmd(&ctx, problem, grid),
        Command::Scan { scan, points } => scan_cmd(&ctx, scan, *points),
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.record());
            return err.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            log::error!("{e}");
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
