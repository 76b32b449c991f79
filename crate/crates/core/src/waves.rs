//! Characteristic speeds, the transition curve and the phase-plane geometry
//! built on top of them.
//!
//! The system matrix is upper triangular, so the two speeds are read off
//! directly: `λ_S = ∂_S f` and `λ_C = f / (S + 𝒜)`. Along a line of fixed `C`,
//! `λ_C` increases up to the transition saturation `S*(C)` and decreases
//! afterwards; every level-curve query below relies on that unimodality.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxModel, State};
use crate::roots::{self, RootError, SCAN_POINTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("no transition point at C = {c}; the flux violates the S-shape assumptions")]
    NoTransition { c: f64 },
    #[error("{count} transition points at C = {c}; expected exactly one")]
    TransitionNotUnique { c: f64, count: usize },
    #[error("{count} inflection points at C = {c}; expected exactly one")]
    InflectionNotUnique { c: f64, count: usize },
    #[error("contact states have different λ_C: {left} vs {right}")]
    VelocityMismatch { left: f64, right: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Numerical tolerances used by classification and sequence checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|λ_S - λ_C|` below which a state is counted on the transition curve.
    pub transition: f64,
    /// Width of the region-boundary bands flagged as non-uniqueness loci.
    pub boundary: f64,
    /// Slack allowed in compatibility and contact-speed checks.
    pub compatibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            transition: 1e-9,
            boundary: 1e-7,
            compatibility: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Left of the transition curve, `λ_S > λ_C`.
    L,
    /// On the transition curve.
    T,
    /// Right of the transition curve, `λ_S < λ_C`.
    R,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::L => "L",
            Region::T => "T",
            Region::R => "R",
        };
        f.write_str(s)
    }
}

pub fn lambda_s<F: FluxModel + ?Sized>(flux: &F, u: State) -> f64 {
    flux.df_ds(u)
}

pub fn lambda_c<F: FluxModel + ?Sized>(flux: &F, u: State) -> f64 {
    flux.f(u) / (u.s + flux.adsorption())
}

/// `(λ_S, λ_C)` at `u`.
pub fn eigenvalues<F: FluxModel + ?Sized>(flux: &F, u: State) -> (f64, f64) {
    (lambda_s(flux, u), lambda_c(flux, u))
}

/// `λ_C` at `S = 1`, the same for every concentration.
pub fn lambda_c_at_full<F: FluxModel + ?Sized>(flux: &F) -> f64 {
    1.0 / (1.0 + flux.adsorption())
}

fn transition_gap<F: FluxModel + ?Sized>(flux: &F, s: f64, c: f64) -> f64 {
    let u = State::new_unchecked(s, c);
    lambda_c(flux, u) - lambda_s(flux, u)
}

/// The unique interior saturation where `λ_S = λ_C` at concentration `c`.
pub fn transition_point<F: FluxModel + ?Sized>(flux: &F, c: f64) -> Result<f64, WaveError> {
    // φ(0) = 0 identically, so the scan starts one grid step in.
    let h = 1.0 / (SCAN_POINTS - 1) as f64;
    let gap = |s: f64| transition_gap(flux, s, c);
    let changes = roots::sign_changes(gap, h, 1.0, SCAN_POINTS - 1);
    match changes.as_slice() {
        [] => Err(WaveError::NoTransition { c }),
        [(a, b)] => Ok(roots::find_root(gap, *a, *b, 1e-15)?),
        many => Err(WaveError::TransitionNotUnique {
            c,
            count: many.len(),
        }),
    }
}

/// `(S*(c), λ_C(S*(c), c))`: the transition point and the largest `λ_C`
/// reachable at concentration `c`.
pub fn peak_lambda_c<F: FluxModel + ?Sized>(flux: &F, c: f64) -> Result<(f64, f64), WaveError> {
    let s = transition_point(flux, c)?;
    Ok((s, lambda_c(flux, State::new_unchecked(s, c))))
}

const INFLECTION_SCAN: usize = 4096;

/// All sign changes of `∂_SS f(·, c)` on a dense interior scan, refined.
pub fn inflection_points<F: FluxModel + ?Sized>(flux: &F, c: f64) -> Result<Vec<f64>, WaveError> {
    let curvature = |s: f64| flux.d2f_ds2(State::new_unchecked(s, c));
    let delta = 1e-6;
    roots::sign_changes(curvature, delta, 1.0 - delta, INFLECTION_SCAN)
        .into_iter()
        .map(|(a, b)| roots::find_root(curvature, a, b, 1e-14).map_err(WaveError::from))
        .collect()
}

/// The single inflection point of `f(·, c)`; errors if the scan finds
/// none or several.
pub fn inflection_point<F: FluxModel + ?Sized>(flux: &F, c: f64) -> Result<f64, WaveError> {
    let pts = inflection_points(flux, c)?;
    match pts.as_slice() {
        [s] => Ok(*s),
        _ => Err(WaveError::InflectionNotUnique {
            c,
            count: pts.len(),
        }),
    }
}

/// Saturation distance from `S*` beyond which a state with nearly equal
/// speeds is still assigned to L or R.
pub const TRANSITION_SEPARATION: f64 = 1e-6;

pub fn classify<F: FluxModel + ?Sized>(flux: &F, u: State, tol: f64) -> Region {
    let (ls, lc) = eigenvalues(flux, u);
    let d = ls - lc;
    if d.abs() <= tol {
        // both speeds vanish near S = 0 without the state being near S*
        match transition_point(flux, u.c) {
            Ok(s_star) if u.s < s_star - TRANSITION_SEPARATION => Region::L,
            Ok(s_star) if u.s > s_star + TRANSITION_SEPARATION => Region::R,
            _ => Region::T,
        }
    } else if d > 0.0 {
        Region::L
    } else {
        Region::R
    }
}

/// Saturation on the other side of the transition curve with the same `λ_C`
/// as `u`. Returns `f64::INFINITY` when no such saturation exists in `[0, 1]`
/// and `S*` when `u` is itself on the transition curve.
pub fn secondary_intersection<F: FluxModel + ?Sized>(flux: &F, u: State) -> Result<f64, WaveError> {
    let (s_star, _) = peak_lambda_c(flux, u.c)?;
    if (u.s - s_star).abs() <= 1e-12 {
        return Ok(s_star);
    }
    let level = lambda_c(flux, u);
    let curve = LevelCurve::new(flux, level);
    let root = if u.s < s_star {
        curve.right_root_with(u.c, s_star)?
    } else {
        curve.left_root_with(u.c, s_star)?
    };
    Ok(root.unwrap_or(f64::INFINITY))
}

/// Level curve `Γ = { U : λ_C(U) = level }`, evaluated on demand one
/// concentration at a time.
#[derive(Debug, Clone, Copy)]
pub struct LevelCurve<'a, F: ?Sized> {
    flux: &'a F,
    level: f64,
    slack: f64,
}

/// A point of a level curve at a queried concentration, with the side of
/// the transition curve it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPoint {
    pub state: State,
    pub side: Region,
}

impl<'a, F: FluxModel + ?Sized> LevelCurve<'a, F> {
    pub fn new(flux: &'a F, level: f64) -> Self {
        LevelCurve {
            flux,
            level,
            slack: 1e-13,
        }
    }

    /// Level targets that overshoot the reachable range by at most `slack`
    /// snap to the nearest endpoint instead of reporting no root.
    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack.max(0.0);
        self
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    fn residual(&self, s: f64, c: f64) -> f64 {
        lambda_c(self.flux, State::new_unchecked(s, c)) - self.level
    }

    /// Root on the increasing branch `[0, S*(c)]`.
    pub fn left_root(&self, c: f64) -> Result<Option<f64>, WaveError> {
        let s_star = transition_point(self.flux, c)?;
        self.left_root_with(c, s_star)
    }

    /// Root on the decreasing branch `[S*(c), 1]`.
    pub fn right_root(&self, c: f64) -> Result<Option<f64>, WaveError> {
        let s_star = transition_point(self.flux, c)?;
        self.right_root_with(c, s_star)
    }

    pub(crate) fn left_root_with(&self, c: f64, s_star: f64) -> Result<Option<f64>, WaveError> {
        let top = self.residual(s_star, c);
        if top < 0.0 {
            return Ok(if top >= -self.slack { Some(s_star) } else { None });
        }
        if self.level <= 0.0 {
            return Ok(Some(0.0));
        }
        let r = roots::find_root(|s| self.residual(s, c), 0.0, s_star, 1e-15)?;
        Ok(Some(r))
    }

    pub(crate) fn right_root_with(&self, c: f64, s_star: f64) -> Result<Option<f64>, WaveError> {
        let top = self.residual(s_star, c);
        if top < 0.0 {
            return Ok(if top >= -self.slack { Some(s_star) } else { None });
        }
        let bottom = self.residual(1.0, c);
        if bottom > 0.0 {
            return Ok(if bottom <= self.slack { Some(1.0) } else { None });
        }
        let r = roots::find_root(|s| self.residual(s, c), s_star, 1.0, 1e-15)?;
        Ok(Some(r))
    }

    /// Up to two points of the curve at concentration `c`, left branch first.
    pub fn points_at(&self, c: f64, tol: f64) -> Result<Vec<LevelPoint>, WaveError> {
        let s_star = transition_point(self.flux, c)?;
        let mut out = Vec::with_capacity(2);
        let left = self.left_root_with(c, s_star)?;
        let right = self.right_root_with(c, s_star)?;
        for s in [left, right].into_iter().flatten() {
            let state = State::new_unchecked(s, c);
            let side = classify(self.flux, state, tol);
            if !out.iter().any(|p: &LevelPoint| (p.state.s - s).abs() <= 1e-12) {
                out.push(LevelPoint { state, side });
            }
        }
        Ok(out)
    }
}

/// Level curve of `λ_C` through `v`.
pub fn gamma_curve<F: FluxModel + ?Sized>(flux: &F, v: State) -> LevelCurve<'_, F> {
    LevelCurve::new(flux, lambda_c(flux, v))
}

/// Placeholder returned when a level curve never reaches the transition
/// curve inside the unit square.
pub const NO_TRANSITION_HIT: State = State::new_unchecked(1.0, 0.0);

/// Intersection of the transition curve with the level curve through `v`,
/// for `v` left of or on the transition curve. Returns [`NO_TRANSITION_HIT`]
/// when the level curve stays in the left region for every concentration.
pub fn gamma_transition_intersection<F: FluxModel + ?Sized>(
    flux: &F,
    v: State,
    tol: f64,
) -> Result<State, WaveError> {
    match classify(flux, v, tol) {
        Region::T => return Ok(v),
        Region::R => {
            return Err(WaveError::Precondition(format!(
                "state {v} is right of the transition curve"
            )))
        }
        Region::L => {}
    }
    let level = lambda_c(flux, v);
    // The peak of λ_C over S grows with C, so the crossing concentration is
    // unique when it exists and lies below C_v.
    let excess = |c: f64| match peak_lambda_c(flux, c) {
        Ok((_, m)) => m - level,
        Err(_) => f64::NAN,
    };
    let at_zero = excess(0.0);
    if at_zero > 0.0 {
        return Ok(NO_TRANSITION_HIT);
    }
    let c = if at_zero == 0.0 {
        0.0
    } else {
        roots::find_root(excess, 0.0, v.c, 1e-15)?
    };
    let s = transition_point(flux, c)?;
    Ok(State::new_unchecked(s, c))
}

/// Side-of-transition admissibility for a contact joining `left` and
/// `right`. Errors if the two states do not share `λ_C` within `tol`.
pub fn contact_admissible<F: FluxModel + ?Sized>(
    flux: &F,
    left: State,
    right: State,
    tol: f64,
) -> Result<bool, WaveError> {
    let (a, b) = (lambda_c(flux, left), lambda_c(flux, right));
    if (a - b).abs() > tol.max(1e-12) {
        return Err(WaveError::VelocityMismatch { left: a, right: b });
    }
    let sides = (classify(flux, left, tol), classify(flux, right, tol));
    Ok(matches!(
        sides,
        (Region::T, _) | (_, Region::T) | (Region::L, Region::L) | (Region::R, Region::R)
    ))
}

/// Oleinik chord condition for an `S`-shock from `s_l` to `s_r` at fixed `c`,
/// checked at `n_check - 1` evenly spaced interior saturations.
pub fn oleinik_admissible<F: FluxModel + ?Sized>(
    flux: &F,
    s_l: f64,
    s_r: f64,
    c: f64,
    n_check: usize,
) -> bool {
    if s_l == s_r {
        return true;
    }
    let f = |s: f64| flux.f(State::new_unchecked(s, c));
    let (f_l, f_r) = (f(s_l), f(s_r));
    let sigma = (f_r - f_l) / (s_r - s_l);
    let eps = 1e-9 * sigma.abs().max(1.0);
    let n = n_check.max(2);
    (1..n).all(|k| {
        let s = s_l + (s_r - s_l) * k as f64 / n as f64;
        let fs = f(s);
        (fs - f_l) / (s - s_l) >= sigma - eps && sigma + eps >= (f_r - fs) / (s_r - s)
    })
}

/// Residuals of both jump conditions for a discontinuity of speed `sigma`.
pub fn rankine_hugoniot_residuals<F: FluxModel + ?Sized>(
    flux: &F,
    left: State,
    right: State,
    sigma: f64,
) -> (f64, f64) {
    let a = flux.adsorption();
    let (f_l, f_r) = (flux.f(left), flux.f(right));
    let r1 = f_r - f_l - sigma * (right.s - left.s);
    let r2 = f_r * right.c - f_l * left.c - sigma * ((right.s + a) * right.c - (left.s + a) * left.c);
    (r1, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    Shock,
    Rarefaction,
    Composite,
    Contact,
}

impl WaveKind {
    pub fn is_s_wave(self) -> bool {
        !matches!(self, WaveKind::Contact)
    }
}

impl fmt::Display for WaveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WaveKind::Shock => "shock",
            WaveKind::Rarefaction => "rarefaction",
            WaveKind::Composite => "composite",
            WaveKind::Contact => "contact",
        };
        f.write_str(s)
    }
}

/// One elementary wave in similarity coordinates `ξ = x / t`.
///
/// `breakpoints` lists `(S, ξ)` pairs from the left state to the right one.
/// Consecutive entries with distinct speeds bound a rarefaction fan;
/// consecutive entries with equal speeds are a jump at that speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    pub v_initial: f64,
    pub v_final: f64,
    pub breakpoints: Vec<(f64, f64)>,
}

impl Wave {
    /// `S`-shock at the Buckley-Leverett speed of the chord.
    pub fn shock<F: FluxModel + ?Sized>(flux: &F, left: State, right: State) -> Self {
        let sigma = (flux.f(right) - flux.f(left)) / (right.s - left.s);
        Wave {
            kind: WaveKind::Shock,
            left,
            right,
            v_initial: sigma,
            v_final: sigma,
            breakpoints: vec![(left.s, sigma), (right.s, sigma)],
        }
    }

    pub fn rarefaction<F: FluxModel + ?Sized>(flux: &F, left: State, right: State) -> Self {
        let (v0, v1) = (flux.df_ds(left), flux.df_ds(right));
        Wave {
            kind: WaveKind::Rarefaction,
            left,
            right,
            v_initial: v0,
            v_final: v1,
            breakpoints: vec![(left.s, v0), (right.s, v1)],
        }
    }

    pub fn contact(left: State, right: State, sigma: f64) -> Self {
        Wave {
            kind: WaveKind::Contact,
            left,
            right,
            v_initial: sigma,
            v_final: sigma,
            breakpoints: vec![(left.s, sigma), (right.s, sigma)],
        }
    }

    /// Glues consecutive `S`-pieces sharing a concentration into one wave.
    /// A single piece is returned unchanged.
    pub fn composite(pieces: &[Wave]) -> Option<Self> {
        match pieces {
            [] => None,
            [one] => Some(one.clone()),
            _ => {
                let mut breakpoints: Vec<(f64, f64)> = Vec::new();
                for p in pieces {
                    for &bp in &p.breakpoints {
                        if breakpoints.last() != Some(&bp) {
                            breakpoints.push(bp);
                        }
                    }
                }
                let first = pieces.first()?;
                let last = pieces.last()?;
                Some(Wave {
                    kind: WaveKind::Composite,
                    left: first.left,
                    right: last.right,
                    v_initial: first.v_initial,
                    v_final: last.v_final,
                    breakpoints,
                })
            }
        }
    }

    pub fn is_jump(&self) -> bool {
        self.v_initial == self.v_final
    }

    /// Jump speeds inside this wave, in order.
    pub fn jump_speeds(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .filter(|w| w[0].1 == w[1].1 && w[0].0 != w[1].0)
            .map(|w| w[0].1)
            .collect()
    }

    /// State at similarity coordinate `xi`; jumps take the right-hand value
    /// when `xi` equals their speed.
    pub fn sample<F: FluxModel + ?Sized>(&self, flux: &F, xi: f64) -> State {
        if xi < self.v_initial {
            return self.left;
        }
        if xi > self.v_final || self.kind == WaveKind::Contact {
            return self.right;
        }
        let c = self.left.c;
        let mut s = self.breakpoints.first().map_or(self.left.s, |bp| bp.0);
        for w in self.breakpoints.windows(2) {
            let ((s_a, v_a), (s_b, v_b)) = (w[0], w[1]);
            if xi < v_a {
                break;
            }
            if v_a == v_b || xi >= v_b {
                s = s_b;
                continue;
            }
            s = invert_speed(flux, s_a, s_b, c, xi);
            break;
        }
        State::new_unchecked(s, c)
    }
}

/// Saturation in the fan between `s_a` and `s_b` where `λ_S = xi`; the
/// speed is monotone on the fan so the root is unique.
pub fn invert_speed<F: FluxModel + ?Sized>(flux: &F, s_a: f64, s_b: f64, c: f64, xi: f64) -> f64 {
    let g = |s: f64| flux.df_ds(State::new_unchecked(s, c)) - xi;
    match roots::find_root(g, s_a, s_b, 1e-14) {
        Ok(s) => s,
        // xi rounded just outside the fan's speed range
        Err(_) => {
            if g(s_a).abs() <= g(s_b).abs() {
                s_a
            } else {
                s_b
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{CoreyFlux, StarsFlux};

    fn stars() -> StarsFlux {
        StarsFlux::table1()
    }

    #[test]
    fn endpoint_eigenvalues() {
        let flux = stars();
        for c in [0.0, 0.3, 1.0] {
            let (ls, lc) = eigenvalues(&flux, State::new_unchecked(0.0, c));
            assert_eq!((ls, lc), (0.0, 0.0));
            let (ls, lc) = eigenvalues(&flux, State::new_unchecked(1.0, c));
            assert_eq!(ls, 0.0);
            assert!((lc - 1.0 / (1.0 + flux.adsorption())).abs() < 1e-15);
        }
        let (ls, lc) = eigenvalues(&flux, State::new_unchecked(0.4, 0.6));
        assert!(ls > 0.0 && lc > 0.0);
    }

    #[test]
    fn transition_point_is_simple_root() {
        let flux = stars();
        for i in 0..50 {
            let c = i as f64 / 49.0;
            let s = transition_point(&flux, c).unwrap();
            let gap = transition_gap(&flux, s, c);
            assert!(gap.abs() <= 1e-10, "phi = {gap} at c = {c}");
            let h = 1e-6;
            let slope = (transition_gap(&flux, s + h, c) - transition_gap(&flux, s - h, c)) / (2.0 * h);
            assert!(slope > 0.0);
            assert!(s > inflection_point(&flux, c).unwrap());
        }
    }

    #[test]
    fn tangent_through_adsorption_point() {
        let flux = stars();
        let a = flux.adsorption();
        for c in [0.0, 0.25, 0.5, 1.0] {
            let s = transition_point(&flux, c).unwrap();
            let u = State::new_unchecked(s, c);
            let slope = flux.f(u) / (s + a);
            assert!((slope - flux.df_ds(u)).abs() < 1e-8);
        }
    }

    #[test]
    fn classification_examples() {
        let flux = stars();
        let tol = Tolerances::default().transition;
        assert_eq!(classify(&flux, State::new_unchecked(1.0, 0.4), tol), Region::R);
        for c in [0.0, 0.5, 1.0] {
            let s = transition_point(&flux, c).unwrap();
            assert_eq!(classify(&flux, State::new_unchecked(s, c), tol), Region::T);
            let si = inflection_point(&flux, c).unwrap();
            assert_eq!(classify(&flux, State::new_unchecked(0.5 * si, c), tol), Region::L);
        }
    }

    #[test]
    fn secondary_intersection_cases() {
        let flux = stars();
        let c = 0.5;
        let s_star = transition_point(&flux, c).unwrap();
        assert_eq!(
            secondary_intersection(&flux, State::new_unchecked(s_star, c)).unwrap(),
            s_star
        );
        // right state: always has a partner left of S*
        let u = State::new_unchecked(0.8, c);
        let sk = secondary_intersection(&flux, u).unwrap();
        assert!(sk < s_star);
        let diff = lambda_c(&flux, State::new_unchecked(sk, c)) - lambda_c(&flux, u);
        assert!(diff.abs() < 1e-10);
        // involution
        let back = secondary_intersection(&flux, State::new_unchecked(sk, c)).unwrap();
        assert!((back - 0.8).abs() < 1e-9);
        // a left state whose λ_C is below λ_C(1, C) has no partner
        let low = State::new_unchecked(0.01, 0.0);
        assert!(lambda_c(&flux, low) < lambda_c_at_full(&flux));
        assert_eq!(secondary_intersection(&flux, low).unwrap(), f64::INFINITY);
    }

    #[test]
    fn level_curve_contains_its_seed() {
        let flux = stars();
        let v = State::new_unchecked(0.15, 0.4);
        let curve = gamma_curve(&flux, v);
        let pts = curve.points_at(0.4, 1e-9).unwrap();
        assert!(pts.iter().any(|p| (p.state.s - 0.15).abs() < 1e-12));
        assert_eq!(pts[0].side, Region::L);
        // small λ_C: the curve never leaves the left region
        let low = State::new_unchecked(0.02, 0.0);
        let curve = gamma_curve(&flux, low);
        for c in [0.0, 0.5, 1.0] {
            let pts = curve.points_at(c, 1e-9).unwrap();
            assert!(pts.iter().all(|p| p.side == Region::L));
        }
    }

    #[test]
    fn transition_intersection_cases() {
        let flux = stars();
        let tol = Tolerances::default().transition;
        let s = transition_point(&flux, 0.3).unwrap();
        let on_t = State::new_unchecked(s, 0.3);
        assert_eq!(gamma_transition_intersection(&flux, on_t, tol).unwrap(), on_t);
        let low = State::new_unchecked(0.02, 0.1);
        assert_eq!(
            gamma_transition_intersection(&flux, low, tol).unwrap(),
            NO_TRANSITION_HIT
        );
        let v = State::new_unchecked(0.15, 0.4);
        let hit = gamma_transition_intersection(&flux, v, tol).unwrap();
        let (ls, lc) = eigenvalues(&flux, hit);
        assert!((ls - lc).abs() <= 1e-8);
        assert!((lc - lambda_c(&flux, v)).abs() <= 1e-12);
        assert!(gamma_transition_intersection(&flux, State::new_unchecked(0.9, 0.4), tol).is_err());
    }

    #[test]
    fn contact_sides() {
        let flux = stars();
        let tol = 1e-9;
        let l = State::new_unchecked(0.15, 0.4);
        assert!(contact_admissible(&flux, l, l, tol).unwrap());
        let sk = secondary_intersection(&flux, l).unwrap();
        assert!(!contact_admissible(&flux, l, State::new_unchecked(sk, 0.4), tol).unwrap());
        let other = gamma_curve(&flux, l).left_root(0.7).unwrap().unwrap();
        assert!(contact_admissible(&flux, l, State::new_unchecked(other, 0.7), tol).unwrap());
        assert!(contact_admissible(&flux, l, State::new_unchecked(0.5, 0.7), tol).is_err());
    }

    #[test]
    fn oleinik_on_convex_and_concave_pieces() {
        let flux = CoreyFlux::new(0.5, 1.0, 0.5).unwrap();
        let si = inflection_point(&flux, 0.2).unwrap();
        // concave part, decreasing saturation: chord lies below the graph
        assert!(!oleinik_admissible(&flux, 0.95, si + 0.05, 0.2, 1000));
        // concave part, increasing saturation: admissible
        assert!(oleinik_admissible(&flux, si + 0.05, 0.95, 0.2, 1000));
        // convex part, decreasing saturation: admissible
        assert!(oleinik_admissible(&flux, si - 0.01, 0.01, 0.2, 1000));
        assert!(!oleinik_admissible(&flux, 0.01, si - 0.01, 0.2, 1000));
    }

    #[test]
    fn composite_sampling() {
        let flux = CoreyFlux::new(0.5, 1.0, 0.5).unwrap();
        let c = 0.0;
        let a = State::new_unchecked(0.9, c);
        let b = State::new_unchecked(0.6, c);
        let r = Wave::rarefaction(&flux, a, b);
        let xi = 0.5 * (r.v_initial + r.v_final);
        let s = r.sample(&flux, xi);
        assert!((flux.df_ds(s) - xi).abs() < 1e-8);
        assert_eq!(r.sample(&flux, r.v_initial - 1.0), a);
        assert_eq!(r.sample(&flux, r.v_final + 1.0), b);
    }
}
