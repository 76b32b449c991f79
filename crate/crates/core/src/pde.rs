//! Implicit finite-difference solver for the coupled system on `x ∈ [0, 1]`.
//!
//! Crank–Nicolson in time, first-order upwind in space. All characteristic
//! speeds are non-negative, so the flux through each cell face is the flux
//! of the cell on its left. The inflow face carries the flux of the
//! Dirichlet state; the outflow face carries the flux of the last cell
//! (zero-gradient, no-flow Neumann condition on the state).
//!
//! Each step solves for `(S_i, C_i)` with Newton's method. The Jacobian is
//! block lower-bidiagonal with 2×2 blocks and is solved by forward
//! substitution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxModel, State};
use crate::riemann::RiemannSolution;

/// Overshoot beyond `[0, 1]` that is clamped silently (and counted).
pub const OVERSHOOT_TOL: f64 = 1e-6;

const MAX_HALVINGS: usize = 12;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("invalid simulation setting {name} = {value}: {reason}")]
    InvalidConfig {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("Newton did not converge at t = {t} after {iterations} iterations (residual {residual:e}); try a smaller dt")]
    NewtonFailed { t: f64, iterations: usize, residual: f64 },
    #[error("{field} = {value} in cell {cell} at t = {t} leaves [0, 1] by more than the overshoot tolerance")]
    Overshoot {
        field: &'static str,
        value: f64,
        cell: usize,
        t: f64,
    },
    #[error("no recorded output at t = {t}")]
    TimeMismatch { t: f64 },
}

/// Initial water saturation and concentration profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialField {
    Uniform { state: State },
    /// `left` on `x < x0`, `right` elsewhere.
    Step { x0: f64, left: State, right: State },
}

impl InitialField {
    fn at(&self, x: f64) -> State {
        match *self {
            InitialField::Uniform { state } => state,
            InitialField::Step { x0, left, right } => {
                if x < x0 {
                    left
                } else {
                    right
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_cells: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Injected (Dirichlet) state at `x = 0`.
    pub left: State,
    pub initial: InitialField,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
}

fn default_newton_tol() -> f64 {
    1e-10
}

fn default_newton_max_iter() -> usize {
    30
}

impl SimConfig {
    pub const DEFAULT_CELLS: usize = 2000;
    pub const DEFAULT_DT: f64 = 5e-6;

    /// Riemann setup: `left` injected into a core initially at `right`.
    pub fn riemann(left: State, right: State, t_end: f64) -> Self {
        SimConfig {
            n_cells: Self::DEFAULT_CELLS,
            dt: Self::DEFAULT_DT,
            t_end,
            left,
            initial: InitialField::Uniform { state: right },
            newton_tol: default_newton_tol(),
            newton_max_iter: default_newton_max_iter(),
        }
    }

    pub fn with_grid(mut self, n_cells: usize, dt: f64) -> Self {
        self.n_cells = n_cells;
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        let bad = |name, value, reason| Err(PdeError::InvalidConfig { name, value, reason });
        if self.n_cells < 10 {
            return bad("n_cells", self.n_cells as f64, "must be at least 10");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", self.dt, "must be positive");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", self.t_end, "must be positive");
        }
        if self.newton_tol.is_nan() || self.newton_tol <= 0.0 {
            return bad("newton_tol", self.newton_tol, "must be positive");
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter", 0.0, "must be at least 1");
        }
        let states = match self.initial {
            InitialField::Uniform { state } => vec![self.left, state],
            InitialField::Step { x0, left, right } => {
                if !(0.0..=1.0).contains(&x0) {
                    return bad("initial.x0", x0, "must lie in [0, 1]");
                }
                vec![self.left, left, right]
            }
        };
        for u in states {
            if State::new(u.s, u.c).is_err() {
                return bad("state", if (0.0..=1.0).contains(&u.s) { u.c } else { u.s }, "must lie in [0, 1]");
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_cells).map(|i| (i as f64 + 0.5) * dx).collect()
    }
}

/// Saturation and concentration per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fields {
    pub s: Vec<f64>,
    pub c: Vec<f64>,
}

impl Fields {
    pub fn from_initial(config: &SimConfig) -> Self {
        let (s, c) = config
            .cell_centers()
            .into_iter()
            .map(|x| {
                let u = config.initial.at(x);
                (u.s, u.c)
            })
            .unzip();
        Fields { s, c }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Cell totals `(Σ S dx, Σ (S + A) C dx)` of the two conserved quantities.
    pub fn totals(&self, adsorption: f64, dx: f64) -> [f64; 2] {
        let mut q = [0.0; 2];
        for (s, c) in self.s.iter().zip(&self.c) {
            q[0] += s * dx;
            q[1] += (s + adsorption) * c * dx;
        }
        q
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
    pub clamped: usize,
    /// Time-averaged fluxes `[water, surfactant]` through the inflow face.
    pub inflow: [f64; 2],
    /// Time-averaged fluxes through the outflow face.
    pub outflow: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub newton_iterations: usize,
    pub max_newton_iterations: usize,
    pub max_residual: f64,
    pub clamped: usize,
    /// Time integrals of the inflow and outflow face fluxes.
    pub inflow: [f64; 2],
    pub outflow: [f64; 2],
}

impl Diagnostics {
    fn record(&mut self, stats: &StepStats, dt: f64) {
        self.steps += 1;
        self.newton_iterations += stats.iterations;
        self.max_newton_iterations = self.max_newton_iterations.max(stats.iterations);
        self.max_residual = self.max_residual.max(stats.residual);
        self.clamped += stats.clamped;
        for k in 0..2 {
            self.inflow[k] += dt * stats.inflow[k];
            self.outflow[k] += dt * stats.outflow[k];
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericalSolution {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub s: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub initial_totals: [f64; 2],
    pub diagnostics: Diagnostics,
}

impl NumericalSolution {
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&tk| (tk - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn fields_at(&self, t: f64) -> Option<Fields> {
        self.index_of(t).map(|k| Fields {
            s: self.s[k].clone(),
            c: self.c[k].clone(),
        })
    }
}

/// Flux of both equations with their derivatives in `(S, C)`.
#[derive(Debug, Clone, Copy)]
struct FaceFlux {
    f: f64,
    g: f64,
    f_s: f64,
    f_c: f64,
    g_s: f64,
    g_c: f64,
}

fn face_flux<F: FluxModel + ?Sized>(flux: &F, s: f64, c: f64) -> FaceFlux {
    let u = State::new_unchecked(s.clamp(0.0, 1.0), c.clamp(0.0, 1.0));
    let j = flux.jet(u);
    FaceFlux {
        f: j.f,
        g: j.f * u.c,
        f_s: j.ds,
        f_c: j.dc,
        g_s: j.ds * u.c,
        g_c: j.dc * u.c + j.f,
    }
}

struct Workspace {
    fl: Vec<FaceFlux>,
    r1: Vec<f64>,
    r2: Vec<f64>,
}

fn evaluate<F: FluxModel + ?Sized>(flux: &F, fields: &Fields, out: &mut [FaceFlux]) {
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = face_flux(flux, fields.s[i], fields.c[i]);
    }
}

struct Residual<'a> {
    old: &'a Fields,
    old_div: Vec<[f64; 2]>,
    inflow: FaceFlux,
    half_r: f64,
    adsorption: f64,
}

impl Residual<'_> {
    // Fills `ws.r1`, `ws.r2` from the fluxes already in `ws.fl`; returns the max-norm.
    fn fill(&self, new: &Fields, ws: &mut Workspace) -> f64 {
        let (old, a, half_r) = (self.old, self.adsorption, self.half_r);
        let mut norm: f64 = 0.0;
        for i in 0..new.len() {
            let up = if i == 0 { &self.inflow } else { &ws.fl[i - 1] };
            let here = &ws.fl[i];
            let r1 = new.s[i] - old.s[i] + half_r * (here.f - up.f + self.old_div[i][0]);
            let r2 = (new.s[i] + a) * new.c[i] - (old.s[i] + a) * old.c[i] + half_r * (here.g - up.g + self.old_div[i][1]);
            ws.r1[i] = r1;
            ws.r2[i] = r2;
            norm = norm.max(r1.abs()).max(r2.abs());
        }
        norm
    }
}

/// Advances `fields` by one Crank–Nicolson step of size `dt` starting at time `t`.
pub fn step<F: FluxModel + ?Sized>(
    fields: &Fields,
    dt: f64,
    t: f64,
    config: &SimConfig,
    flux: &F,
) -> Result<(Fields, StepStats), PdeError> {
    let mut old_fl = vec![face_flux(flux, config.left.s, config.left.c); fields.len()];
    evaluate(flux, fields, &mut old_fl);
    step_cached(fields, &mut old_fl, dt, t, config, flux)
}

// One step given the fluxes of `fields`; on success `fluxes` holds those of
// the returned fields.
fn step_cached<F: FluxModel + ?Sized>(
    fields: &Fields,
    fluxes: &mut Vec<FaceFlux>,
    dt: f64,
    t: f64,
    config: &SimConfig,
    flux: &F,
) -> Result<(Fields, StepStats), PdeError> {
    let n = fields.len();
    let a = flux.adsorption();
    let half_r = 0.5 * dt / config.dx();
    let inflow = face_flux(flux, config.left.s, config.left.c);
    let old_fl = &*fluxes;
    let res = Residual {
        old: fields,
        old_div: (0..n)
            .map(|i| {
                let up = if i == 0 { &inflow } else { &old_fl[i - 1] };
                [old_fl[i].f - up.f, old_fl[i].g - up.g]
            })
            .collect(),
        inflow,
        half_r,
        adsorption: a,
    };

    let mut ws = Workspace {
        fl: old_fl.clone(),
        r1: vec![0.0; n],
        r2: vec![0.0; n],
    };
    let mut new = fields.clone();
    let mut norm = res.fill(&new, &mut ws);
    let mut iterations = 0;
    let mut ds = vec![0.0; n];
    let mut dc = vec![0.0; n];
    let mut base = new.clone();
    while norm > config.newton_tol {
        if iterations >= config.newton_max_iter {
            return Err(PdeError::NewtonFailed {
                t: t + dt,
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        // forward substitution through the block lower-bidiagonal Jacobian
        for i in 0..n {
            let h = &ws.fl[i];
            let (s, c) = (new.s[i], new.c[i]);
            let d11 = 1.0 + half_r * h.f_s;
            let d12 = half_r * h.f_c;
            let d21 = c + half_r * h.g_s;
            let d22 = s + a + half_r * h.g_c;
            let (mut b1, mut b2) = (-ws.r1[i], -ws.r2[i]);
            if i > 0 {
                let u = &ws.fl[i - 1];
                b1 += half_r * (u.f_s * ds[i - 1] + u.f_c * dc[i - 1]);
                b2 += half_r * (u.g_s * ds[i - 1] + u.g_c * dc[i - 1]);
            }
            let det = d11 * d22 - d12 * d21;
            ds[i] = (b1 * d22 - d12 * b2) / det;
            dc[i] = (d11 * b2 - d21 * b1) / det;
        }
        base.s.copy_from_slice(&new.s);
        base.c.copy_from_slice(&new.c);
        let mut lambda = 1.0;
        let mut halvings = 0;
        loop {
            for i in 0..n {
                new.s[i] = base.s[i] + lambda * ds[i];
                new.c[i] = base.c[i] + lambda * dc[i];
            }
            evaluate(flux, &new, &mut ws.fl);
            let trial = res.fill(&new, &mut ws);
            if trial.is_finite() && (trial < norm || halvings >= MAX_HALVINGS) {
                norm = trial;
                break;
            }
            lambda *= 0.5;
            halvings += 1;
        }
        if !norm.is_finite() {
            return Err(PdeError::NewtonFailed {
                t: t + dt,
                iterations,
                residual: norm,
            });
        }
    }

    let mut clamped = 0;
    for (field, values) in [("S", &mut new.s), ("C", &mut new.c)] {
        for (cell, v) in values.iter_mut().enumerate() {
            if *v < 0.0 || *v > 1.0 {
                if *v < -OVERSHOOT_TOL || *v > 1.0 + OVERSHOOT_TOL {
                    return Err(PdeError::Overshoot {
                        field,
                        value: *v,
                        cell,
                        t: t + dt,
                    });
                }
                *v = v.clamp(0.0, 1.0);
                clamped += 1;
            }
        }
    }
    if clamped > 0 {
        evaluate(flux, &new, &mut ws.fl);
    }

    let (last_old, last_new) = (&old_fl[n - 1], &ws.fl[n - 1]);
    let stats = StepStats {
        iterations,
        residual: norm,
        clamped,
        inflow: [inflow.f, inflow.g],
        outflow: [0.5 * (last_old.f + last_new.f), 0.5 * (last_old.g + last_new.g)],
    };
    *fluxes = ws.fl;
    Ok((new, stats))
}

/// Integrates to `config.t_end`, recording the fields at each requested
/// output time in `(0, t_end]` (the final time is always recorded). Steps
/// are shortened to land exactly on output times.
pub fn run<F: FluxModel + ?Sized>(config: &SimConfig, flux: &F, output_times: &[f64]) -> Result<NumericalSolution, PdeError> {
    config.validate()?;
    let mut targets: Vec<f64> = output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < config.t_end)
        .collect();
    targets.push(config.t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let dx = config.dx();
    let mut fields = Fields::from_initial(config);
    let initial_totals = fields.totals(flux.adsorption(), dx);
    let mut out = NumericalSolution {
        x: config.cell_centers(),
        times: Vec::with_capacity(targets.len()),
        s: Vec::new(),
        c: Vec::new(),
        initial_totals,
        diagnostics: Diagnostics::default(),
    };
    let mut fluxes = vec![face_flux(flux, config.left.s, config.left.c); fields.len()];
    evaluate(flux, &fields, &mut fluxes);
    let mut t = 0.0;
    for &target in &targets {
        let n_steps = ((target - t) / config.dt - 1e-9).ceil().max(1.0) as usize;
        let dt = (target - t) / n_steps as f64;
        for k in 0..n_steps {
            let (next, stats) = step_cached(&fields, &mut fluxes, dt, t, config, flux)?;
            fields = next;
            out.diagnostics.record(&stats, dt);
            t = if k + 1 == n_steps { target } else { t + dt };
        }
        log::debug!("t = {t}: {} steps, {} Newton iterations", out.diagnostics.steps, out.diagnostics.newton_iterations);
        out.times.push(target);
        out.s.push(fields.s.clone());
        out.c.push(fields.c.clone());
    }
    Ok(out)
}

/// The analytical solution at time `t` sampled at the given cell centers.
pub fn sample_on_grid<F: FluxModel + ?Sized>(analytical: &RiemannSolution, flux: &F, x: &[f64], t: f64) -> Fields {
    let (s, c) = x
        .iter()
        .map(|&xi| {
            let u = analytical.sample(flux, xi, t);
            (u.s, u.c)
        })
        .unzip();
    Fields { s, c }
}

// Five-point Gauss–Legendre nodes and weights on [-1, 1].
const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Cell averages at time `t` of the analytical solution over cells of width
/// `dx` centered at `x`. Cells are split at every wave breakpoint, so jumps
/// and fan edges are integrated exactly and fans by Gauss–Legendre.
pub fn cell_averages<F: FluxModel + ?Sized>(analytical: &RiemannSolution, flux: &F, x: &[f64], dx: f64, t: f64) -> Fields {
    let mut kinks: Vec<f64> = analytical
        .sequence
        .iter()
        .flat_map(|w| w.breakpoints.iter().map(move |b| b.1 * t))
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let (mut s, mut c) = (Vec::with_capacity(x.len()), Vec::with_capacity(x.len()));
    for &xc in x {
        let (a, b) = (xc - 0.5 * dx, xc + 0.5 * dx);
        let mut cuts = vec![a];
        cuts.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
        cuts.push(b);
        let (mut ss, mut cc) = (0.0, 0.0);
        for p in cuts.windows(2) {
            let (mid, half) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            for (node, weight) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                let u = analytical.sample(flux, mid + half * node, t);
                ss += weight * half * u.s;
                cc += weight * half * u.c;
            }
        }
        s.push(ss / dx);
        c.push(cc / dx);
    }
    Fields { s, c }
}

/// L¹ distances `(errS, errC)` between the numerical cell values at time `t`
/// and the cell averages of the analytical solution, normalized by the
/// domain length.
pub fn compare_l1<F: FluxModel + ?Sized>(
    numerical: &NumericalSolution,
    analytical: &RiemannSolution,
    flux: &F,
    t: f64,
) -> Result<(f64, f64), PdeError> {
    let k = numerical.index_of(t).ok_or(PdeError::TimeMismatch { t })?;
    let dx = 1.0 / numerical.x.len() as f64;
    let exact = cell_averages(analytical, flux, &numerical.x, dx, t);
    let err = |num: &[f64], ana: &[f64]| num.iter().zip(ana).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx;
    Ok((err(&numerical.s[k], &exact.s), err(&numerical.c[k], &exact.c)))
}
