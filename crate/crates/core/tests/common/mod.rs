//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use foam_riemann::flux::{FluxModel, State};
use foam_riemann::roots::find_root;
use foam_riemann::waves::{self, WaveKind};
use foam_riemann::RiemannSolution;

pub fn st(s: f64, c: f64) -> State {
    State::new_unchecked(s, c)
}

/// Elementary piece of a scalar envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Fan { from: f64, to: f64 },
    Jump { from: f64, to: f64, speed: f64 },
}

/// Scalar solution from the convex (or concave) envelope of `n` samples of
/// `f(·, c)` between `s_l` and `s_r`. Hull edges joining neighbouring
/// samples are fans; longer edges are jumps. Jumps spanning at most
/// `merge` samples are absorbed into the adjacent fan.
pub fn hull_oracle<F: FluxModel + ?Sized>(flux: &F, s_l: f64, s_r: f64, c: f64, n: usize, merge: usize) -> Vec<Piece> {
    let xs: Vec<f64> = (0..n).map(|i| s_l + (s_r - s_l) * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&s| flux.f(st(s, c))).collect();
    // left turns only: the lower hull traversed rightward when S increases,
    // the upper hull traversed leftward when it decreases
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..n {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut pieces: Vec<Piece> = Vec::new();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let jump = b - a > merge;
        match (pieces.last_mut(), jump) {
            (Some(Piece::Fan { to, .. }), false) => *to = xs[b],
            (_, false) => pieces.push(Piece::Fan { from: xs[a], to: xs[b] }),
            (_, true) => {
                let speed = (ys[b] - ys[a]) / (xs[b] - xs[a]);
                pieces.push(Piece::Jump { from: xs[a], to: xs[b], speed });
            }
        }
    }
    pieces
}

/// Speed range covered by an oracle solution. Fan end speeds use the exact
/// derivative at the fan end points.
pub fn oracle_speeds<F: FluxModel + ?Sized>(flux: &F, pieces: &[Piece], c: f64) -> (f64, f64) {
    let speed = |p: &Piece, first: bool| match *p {
        Piece::Fan { from, to } => flux.df_ds(st(if first { from } else { to }, c)),
        Piece::Jump { speed, .. } => speed,
    };
    (speed(&pieces[0], true), speed(pieces.last().unwrap(), false))
}

/// Integral-form residuals of both conservation laws over
/// `[-X, X] × [0, 1]` for a solution sampled at `t = 1`. Constant states are
/// integrated exactly and fans by midpoint quadrature with `cells` cells in
/// total. Returns the residuals relative to the size of the terms.
pub fn conservation_residuals<F: FluxModel + ?Sized>(flux: &F, sol: &RiemannSolution, cells: usize) -> [f64; 2] {
    let a = flux.adsorption();
    let q = |u: State| [u.s, (u.s + a) * u.c];
    let g = |u: State| {
        let f = flux.f(u);
        [f, f * u.c]
    };
    let (ul, ur) = (sol.left, sol.right);
    let span = sol.speed_span().unwrap_or((0.0, 0.0));
    let x_max = 1.0 + span.0.abs().max(span.1.abs()) * 1.5;

    // fan intervals in ξ
    let mut fans: Vec<(f64, f64)> = Vec::new();
    for w in &sol.sequence {
        for p in w.breakpoints.windows(2) {
            if p[1].1 > p[0].1 && w.kind != WaveKind::Contact {
                fans.push((p[0].1, p[1].1));
            }
        }
    }
    let fan_width: f64 = fans.iter().map(|(a, b)| b - a).sum();

    let mut integral = [0.0; 2];
    // piecewise-constant parts: walk the sequence
    let mut x = -x_max;
    let mut state = ul;
    for w in &sol.sequence {
        let qs = q(state);
        for k in 0..2 {
            integral[k] += qs[k] * (w.v_initial - x);
        }
        x = w.v_final;
        state = w.right;
        // constant plateaus inside a wave (between equal-speed breakpoints) have zero width
    }
    let qs = q(state);
    for k in 0..2 {
        integral[k] += qs[k] * (x_max - x);
    }
    for (lo, hi) in fans {
        let m = ((cells as f64) * (hi - lo) / fan_width).ceil().max(1.0) as usize;
        let h = (hi - lo) / m as f64;
        for i in 0..m {
            let xi = lo + (i as f64 + 0.5) * h;
            let qv = q(sol.sample_xi(flux, xi));
            for k in 0..2 {
                integral[k] += qv[k] * h;
            }
        }
    }
    let (ql, qr, gl, gr) = (q(ul), q(ur), g(ul), g(ur));
    let mut rel = [0.0; 2];
    for k in 0..2 {
        let expected = x_max * (ql[k] + qr[k]) - (gr[k] - gl[k]);
        let scale = integral[k].abs().max(expected.abs()).max(gl[k].abs().max(gr[k].abs())).max(1e-12);
        rel[k] = (integral[k] - expected).abs() / scale;
    }
    rel
}

/// `C` at which the maximum of `λ_C` over `S` equals `level`, on `[lo, hi]`.
pub fn c_where_peak_equals<F: FluxModel + ?Sized>(flux: &F, level: f64, lo: f64, hi: f64) -> f64 {
    find_root(|c| waves::peak_lambda_c(flux, c).unwrap().1 - level, lo, hi, 1e-16).unwrap()
}

/// Saturation on the decreasing branch of `λ_C(·, c)` where `λ_C = level`.
pub fn right_branch_s<F: FluxModel + ?Sized>(flux: &F, level: f64, c: f64) -> f64 {
    let s_star = waves::transition_point(flux, c).unwrap();
    find_root(|s| waves::lambda_c(flux, st(s, c)) - level, s_star, 1.0, 1e-16).unwrap()
}

/// L¹ distance of two sampled profiles at `t` on `[0, x_max]`.
pub fn profile_l1<F: FluxModel + ?Sized>(flux: &F, a: &RiemannSolution, b: &RiemannSolution, t: f64, x_max: f64, n: usize) -> f64 {
    let h = x_max / n as f64;
    (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            let (ua, ub) = (a.sample(flux, x, t), b.sample(flux, x, t));
            ((ua.s - ub.s).abs() + (ua.c - ub.c).abs()) * h
        })
        .sum()
}

/// Number of monotone pieces of a profile: turning points whose excursion
/// exceeds `threshold` separate pieces.
pub fn monotone_segments(values: &[f64], threshold: f64) -> usize {
    let mut segments = 1;
    let mut direction = 0i8;
    let mut anchor = values[0];
    for &v in values {
        let d = v - anchor;
        if direction >= 0 && d < -threshold {
            if direction > 0 {
                segments += 1;
            }
            direction = -1;
            anchor = v;
        } else if direction <= 0 && d > threshold {
            if direction < 0 {
                segments += 1;
            }
            direction = 1;
            anchor = v;
        } else if (direction > 0 && v > anchor) || (direction < 0 && v < anchor) {
            anchor = v;
        }
    }
    segments
}

/// Smallest sample spacing of the envelope oracle.
pub const ORACLE_MIN_SPACING: f64 = 1e-6;

/// Compares the analytic scalar solution with the hull oracle: same piece
/// kinds in the same order, end speeds and jump speeds within `vtol`.
pub fn check_scalar_case<F: FluxModel + ?Sized>(flux: &F, s_l: f64, s_r: f64, c: f64, vtol: f64) -> Result<(), String> {
    let group = foam_riemann::solve_scalar(flux, s_l, s_r, c).map_err(|e| e.to_string())?;
    // below ~1e-6 spacing the curvature between samples sinks into roundoff
    let n = ((s_r - s_l).abs() / ORACLE_MIN_SPACING).ceil().clamp(101.0, 10_001.0) as usize;
    let oracle = hull_oracle(flux, s_l, s_r, c, n, 3);
    let h = (s_r - s_l).abs() / (n - 1) as f64;
    let kinds: Vec<WaveKind> = group.waves.iter().map(|w| w.kind).collect();
    let expected: Vec<WaveKind> = oracle
        .iter()
        .map(|p| match p {
            Piece::Fan { .. } => WaveKind::Rarefaction,
            Piece::Jump { .. } => WaveKind::Shock,
        })
        .collect();
    if kinds != expected {
        return Err(format!("({s_l}, {s_r}, C={c}): pieces {kinds:?}, oracle {expected:?}"));
    }
    let (v0, v1) = oracle_speeds(flux, &oracle, c);
    if (group.v_initial - v0).abs() > vtol || (group.v_final - v1).abs() > vtol {
        return Err(format!(
            "({s_l}, {s_r}, C={c}): speeds [{}, {}], oracle [{v0}, {v1}]",
            group.v_initial, group.v_final
        ));
    }
    for (w, p) in group.waves.iter().zip(&oracle) {
        let (from, to) = match *p {
            Piece::Fan { from, to } | Piece::Jump { from, to, .. } => (from, to),
        };
        if (w.left.s - from).abs() > 2.0 * h || (w.right.s - to).abs() > 2.0 * h {
            return Err(format!(
                "({s_l}, {s_r}, C={c}): piece {} -> {}, oracle {from} -> {to}",
                w.left.s, w.right.s
            ));
        }
        if let Piece::Jump { speed, .. } = p {
            if (w.v_initial - speed).abs() > vtol {
                return Err(format!("({s_l}, {s_r}, C={c}): jump speed {}, oracle {speed}", w.v_initial));
            }
        }
    }
    Ok(())
}

/// Pinned tolerances of the sequence checks.
pub const COMPAT_TOL: f64 = 1e-8;
pub const CONTACT_TOL: f64 = 1e-8;
pub const RH_TOL: f64 = 1e-8;
pub const CONSERVATION_TOL: f64 = 1e-4;
pub const CONSERVATION_CELLS: usize = 10_000;

/// Independent checks of a returned sequence: endpoints, adjacency,
/// compatibility, C-preservation by S-waves, λ_C-preservation and side
/// admissibility of contacts, jump conditions, Oleinik at every S-jump,
/// and the integral form of both laws.
pub fn check_solution<F: FluxModel + ?Sized>(flux: &F, sol: &RiemannSolution) -> Result<(), String> {
    let seq = &sol.sequence;
    let tag = format!("{} -> {}", sol.left, sol.right);
    if seq.is_empty() {
        return if sol.left.distance(&sol.right) <= 1e-12 {
            Ok(())
        } else {
            Err(format!("{tag}: empty sequence"))
        };
    }
    if seq[0].left.distance(&sol.left) > 1e-12 || seq[seq.len() - 1].right.distance(&sol.right) > 1e-12 {
        return Err(format!("{tag}: endpoints"));
    }
    for p in seq.windows(2) {
        if p[0].right.distance(&p[1].left) > 1e-12 {
            return Err(format!("{tag}: adjacency"));
        }
        if p[0].v_final > p[1].v_initial + COMPAT_TOL {
            return Err(format!("{tag}: compatibility {} > {}", p[0].v_final, p[1].v_initial));
        }
    }
    for w in seq {
        let jumps: Vec<(State, State, f64)> = if w.kind == WaveKind::Contact {
            let (a, b) = (waves::lambda_c(flux, w.left), waves::lambda_c(flux, w.right));
            if (a - b).abs() > CONTACT_TOL || (w.v_initial - a).abs() > CONTACT_TOL {
                return Err(format!("{tag}: contact speeds {a} {b} {}", w.v_initial));
            }
            let sides = (waves::classify(flux, w.left, 1e-9), waves::classify(flux, w.right, 1e-9));
            if matches!(sides, (waves::Region::L, waves::Region::R) | (waves::Region::R, waves::Region::L)) {
                return Err(format!("{tag}: contact sides {sides:?}"));
            }
            vec![(w.left, w.right, w.v_initial)]
        } else {
            if w.left.c != w.right.c {
                return Err(format!("{tag}: S-wave changes C"));
            }
            let c = w.left.c;
            let mut jumps = Vec::new();
            for p in w.breakpoints.windows(2) {
                if p[0].1 == p[1].1 && p[0].0 != p[1].0 {
                    jumps.push((st(p[0].0, c), st(p[1].0, c), p[0].1));
                }
            }
            for &(l, r, _) in &jumps {
                if !oleinik_holds(flux, l.s, r.s, c, 1000) {
                    return Err(format!("{tag}: Oleinik fails for {} -> {} at C = {c}", l.s, r.s));
                }
            }
            jumps
        };
        for (l, r, sigma) in jumps {
            let (r1, r2) = waves::rankine_hugoniot_residuals(flux, l, r, sigma);
            if r1.abs() > RH_TOL || r2.abs() > RH_TOL {
                return Err(format!("{tag}: jump conditions {r1:e} {r2:e} for {l} -> {r}"));
            }
        }
    }
    let res = conservation_residuals(flux, sol, CONSERVATION_CELLS);
    if res[0] > CONSERVATION_TOL || res[1] > CONSERVATION_TOL {
        return Err(format!("{tag}: integral form residuals {res:?}"));
    }
    Ok(())
}

/// Chord condition written directly: for an increasing jump the graph lies
/// on or above the chord, for a decreasing jump on or below it.
pub fn oleinik_holds<F: FluxModel + ?Sized>(flux: &F, s_l: f64, s_r: f64, c: f64, n: usize) -> bool {
    let f = |s: f64| flux.f(st(s, c));
    let (f_l, f_r) = (f(s_l), f(s_r));
    let slope = (f_r - f_l) / (s_r - s_l);
    let eps = 1e-9;
    (1..n).all(|k| {
        let s = s_l + (s_r - s_l) * k as f64 / n as f64;
        let gap = f(s) - (f_l + slope * (s - s_l));
        if s_r > s_l {
            gap >= -eps
        } else {
            gap <= eps
        }
    })
}
