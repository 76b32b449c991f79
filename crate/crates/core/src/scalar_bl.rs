//! Scalar Buckley-Leverett sub-problem at fixed concentration.
//!
//! An increasing saturation jump follows the lower convex envelope of
//! `f(·, C)`, a decreasing one the upper concave envelope. Where the envelope
//! coincides with the graph the solution is a rarefaction fan; where it is a
//! chord, a shock. With a single inflection point each envelope has at most
//! one fan and one chord, joined at a tangent point.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::flux::{FluxModel, State};
use crate::roots;
use crate::waves::{self, Wave, WaveError};

/// Saturation jumps at or below this size produce no wave.
pub const ZERO_STRENGTH: f64 = 1e-12;

/// Samples used by the discrete-hull fallback.
pub const HULL_SAMPLES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMethod {
    /// Tangent construction relying on a single inflection point.
    Analytic,
    /// Convex hull of sampled flux values, used when the inflection check fails.
    DiscreteHull,
}

/// Ordered `S`-waves between two saturations at one concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveGroup {
    pub c: f64,
    pub s_left: f64,
    pub s_right: f64,
    /// Elementary pieces (shocks and fans), left to right.
    pub waves: Vec<Wave>,
    /// Span of the group; both zero for an empty group.
    pub v_initial: f64,
    pub v_final: f64,
    pub method: EnvelopeMethod,
}

impl WaveGroup {
    fn empty(s: f64, c: f64) -> Self {
        WaveGroup {
            c,
            s_left: s,
            s_right: s,
            waves: Vec::new(),
            v_initial: 0.0,
            v_final: 0.0,
            method: EnvelopeMethod::Analytic,
        }
    }

    fn from_pieces(s_left: f64, s_right: f64, c: f64, waves: Vec<Wave>, method: EnvelopeMethod) -> Self {
        let v_initial = waves.first().map_or(0.0, |w| w.v_initial);
        let v_final = waves.last().map_or(0.0, |w| w.v_final);
        WaveGroup {
            c,
            s_left,
            s_right,
            waves,
            v_initial,
            v_final,
            method,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    /// The whole group as one wave (composite when it has several pieces).
    pub fn to_wave(&self) -> Option<Wave> {
        Wave::composite(&self.waves)
    }

    /// Saturation at similarity coordinate `xi`.
    pub fn sample<F: FluxModel + ?Sized>(&self, flux: &F, xi: f64) -> f64 {
        if self.waves.is_empty() || xi < self.v_initial {
            return self.s_left;
        }
        for w in &self.waves {
            if xi <= w.v_final {
                return w.sample(flux, xi).s;
            }
        }
        self.s_right
    }
}

/// Builds the admissible `S`-wave group from `s_l` to `s_r` at
/// concentration `c`.
pub fn solve_scalar<F: FluxModel + ?Sized>(flux: &F, s_l: f64, s_r: f64, c: f64) -> Result<WaveGroup, WaveError> {
    if (s_l - s_r).abs() <= ZERO_STRENGTH {
        return Ok(WaveGroup::empty(s_l, c));
    }
    match waves::inflection_point(flux, c) {
        Ok(si) => analytic_group(flux, s_l, s_r, c, si),
        Err(WaveError::InflectionNotUnique { count, .. }) => {
            warn!(
                "flux has {count} inflection points at C = {c}; using a {HULL_SAMPLES}-sample discrete envelope"
            );
            Ok(hull_group(flux, s_l, s_r, c, HULL_SAMPLES))
        }
        Err(e) => Err(e),
    }
}

fn analytic_group<F: FluxModel + ?Sized>(flux: &F, s_l: f64, s_r: f64, c: f64, si: f64) -> Result<WaveGroup, WaveError> {
    let at = |s: f64| State::new_unchecked(s, c);
    let f = |s: f64| flux.f(at(s));
    let df = |s: f64| flux.df_ds(at(s));
    let (left, right) = (at(s_l), at(s_r));

    let pieces = if s_l < s_r {
        // lower convex envelope: fan on the convex part, then a chord
        if s_r <= si {
            vec![Wave::rarefaction(flux, left, right)]
        } else if s_l >= si {
            vec![Wave::shock(flux, left, right)]
        } else {
            let gap = |s: f64| df(s) * (s_r - s) - (f(s_r) - f(s));
            if gap(s_l) >= 0.0 {
                vec![Wave::shock(flux, left, right)]
            } else {
                let s_t = roots::find_root(gap, s_l, si, 1e-15)?;
                split_at_tangent(flux, left, right, s_t)
            }
        }
    } else if s_r >= si {
        // upper concave envelope, entirely concave: a fan
        vec![Wave::rarefaction(flux, left, right)]
    } else if s_l <= si {
        vec![Wave::shock(flux, left, right)]
    } else {
        let gap = |s: f64| df(s) * (s - s_r) - (f(s) - f(s_r));
        if gap(s_l) >= 0.0 {
            vec![Wave::shock(flux, left, right)]
        } else {
            let s_t = roots::find_root(gap, si, s_l, 1e-15)?;
            split_at_tangent(flux, left, right, s_t)
        }
    };
    Ok(WaveGroup::from_pieces(s_l, s_r, c, pieces, EnvelopeMethod::Analytic))
}

fn split_at_tangent<F: FluxModel + ?Sized>(flux: &F, left: State, right: State, s_t: f64) -> Vec<Wave> {
    let tangent = State::new_unchecked(s_t, left.c);
    if (s_t - left.s).abs() <= ZERO_STRENGTH {
        return vec![Wave::shock(flux, left, right)];
    }
    let mut fan = Wave::rarefaction(flux, left, tangent);
    let mut shock = Wave::shock(flux, tangent, right);
    // At the tangent point the chord slope equals λ_S; pin both pieces to
    // one speed so the group is exactly continuous there.
    let sigma = fan.v_final.max(shock.v_initial);
    fan.v_final = sigma;
    if let Some(last) = fan.breakpoints.last_mut() {
        last.1 = sigma;
    }
    shock.v_initial = sigma;
    shock.v_final = sigma;
    shock.breakpoints = vec![(tangent.s, sigma), (right.s, sigma)];
    vec![fan, shock]
}

// Indices of the lower convex hull of points sorted by abscissa.
fn lower_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        while hull.len() >= 2 {
            let (o, a) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
            let b = pts[i];
            let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Envelope from a discrete hull of `n + 1` samples. Runs of hull vertices
/// that are adjacent on the grid become fans; gaps become shocks.
fn hull_group<F: FluxModel + ?Sized>(flux: &F, s_l: f64, s_r: f64, c: f64, n: usize) -> WaveGroup {
    let increasing = s_l < s_r;
    let (lo, hi) = if increasing { (s_l, s_r) } else { (s_r, s_l) };
    let sign = if increasing { 1.0 } else { -1.0 };
    let grid: Vec<f64> = (0..=n)
        .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
        .collect();
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .map(|&s| (s, sign * flux.f(State::new_unchecked(s, c))))
        .collect();
    let mut hull = lower_hull(&pts);
    if !increasing {
        hull.reverse();
    }

    let at = |k: usize| State::new_unchecked(grid[k], c);
    let mut pieces: Vec<Wave> = Vec::new();
    let mut run_start = hull[0];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.abs_diff(b) == 1 {
            continue;
        }
        if run_start != a {
            pieces.push(Wave::rarefaction(flux, at(run_start), at(a)));
        }
        pieces.push(Wave::shock(flux, at(a), at(b)));
        run_start = b;
    }
    let last = *hull.last().unwrap_or(&run_start);
    if run_start != last {
        pieces.push(Wave::rarefaction(flux, at(run_start), at(last)));
    }
    // Keep speeds non-decreasing across grid-resolution mismatches.
    let mut floor = f64::NEG_INFINITY;
    for p in &mut pieces {
        p.v_initial = p.v_initial.max(floor);
        p.v_final = p.v_final.max(p.v_initial);
        if let [first, .., last] = p.breakpoints.as_mut_slice() {
            first.1 = p.v_initial;
            last.1 = p.v_final;
        }
        floor = p.v_final;
    }
    WaveGroup::from_pieces(s_l, s_r, c, pieces, EnvelopeMethod::DiscreteHull)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{CoreyFlux, StarsFlux};
    use crate::waves::{oleinik_admissible, WaveKind};

    /// Sum of two logistic steps: three inflection points.
    struct DoubleStep;

    impl DoubleStep {
        fn g(s: f64) -> f64 {
            let a = 1.0 / (1.0 + (-40.0 * (s - 0.25)).exp());
            let b = 1.0 / (1.0 + (-40.0 * (s - 0.75)).exp());
            0.5 * (a + b)
        }
    }

    impl FluxModel for DoubleStep {
        fn f(&self, u: State) -> f64 {
            Self::g(u.s)
        }
        fn df_ds(&self, u: State) -> f64 {
            let h = 1e-6;
            (Self::g(u.s + h) - Self::g(u.s - h)) / (2.0 * h)
        }
        fn df_dc(&self, _u: State) -> f64 {
            0.0
        }
        fn d2f_ds2(&self, u: State) -> f64 {
            let h = 1e-4;
            (Self::g(u.s + h) - 2.0 * Self::g(u.s) + Self::g(u.s - h)) / (h * h)
        }
        fn adsorption(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn zero_strength_is_empty() {
        let flux = StarsFlux::table1();
        let g = solve_scalar(&flux, 0.3, 0.3, 0.5).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.sample(&flux, 10.0), 0.3);
    }

    #[test]
    fn imbibition_front_is_fan_then_shock() {
        let flux = CoreyFlux::new(0.5, 1.0, 0.5).unwrap();
        let g = solve_scalar(&flux, 1.0, 0.0, 0.0).unwrap();
        let kinds: Vec<_> = g.waves.iter().map(|w| w.kind).collect();
        assert_eq!(kinds, vec![WaveKind::Rarefaction, WaveKind::Shock]);
        let shock = &g.waves[1];
        let tangent = shock.left;
        assert!((flux.df_ds(tangent) - shock.v_initial).abs() < 1e-9);
        assert!(oleinik_admissible(&flux, shock.left.s, shock.right.s, 0.0, 10_000));
    }

    #[test]
    fn group_invariants_table1() {
        let flux = StarsFlux::table1();
        let g = solve_scalar(&flux, 1.0, 0.0, 0.5).unwrap();
        assert!(!g.is_empty());
        for pair in g.waves.windows(2) {
            assert_eq!(pair[0].right, pair[1].left);
            assert!(pair[0].v_final <= pair[1].v_initial);
        }
        for w in &g.waves {
            assert!(w.v_initial <= w.v_final);
            if w.kind == WaveKind::Shock {
                let sigma = w.v_initial;
                let r = flux.f(w.right) - flux.f(w.left) - sigma * (w.right.s - w.left.s);
                assert!(r.abs() < 1e-8);
                assert!(oleinik_admissible(&flux, w.left.s, w.right.s, 0.5, 10_000));
                assert!(flux.df_ds(w.right) <= sigma + 1e-9 && sigma <= flux.df_ds(w.left) + 1e-9);
            }
        }
    }

    #[test]
    fn sampling_inside_fan_hits_speed() {
        let flux = StarsFlux::table1();
        let g = solve_scalar(&flux, 0.9, 0.3, 0.5).unwrap();
        assert_eq!(g.waves.len(), 1);
        assert_eq!(g.waves[0].kind, WaveKind::Rarefaction);
        for k in 1..10 {
            let xi = g.v_initial + (g.v_final - g.v_initial) * k as f64 / 10.0;
            let s = g.sample(&flux, xi);
            assert!((flux.df_ds(State::new_unchecked(s, 0.5)) - xi).abs() < 1e-8);
        }
        assert_eq!(g.sample(&flux, g.v_initial - 0.1), 0.9);
        assert_eq!(g.sample(&flux, g.v_final + 0.1), 0.3);
    }

    #[test]
    fn multi_inflection_falls_back_to_hull() {
        let flux = DoubleStep;
        assert!(waves::inflection_point(&flux, 0.0).is_err());
        let g = solve_scalar(&flux, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(g.method, EnvelopeMethod::DiscreteHull);
        // fan, shock, fan, shock across the two steps
        assert!(g.waves.len() >= 3);
        for pair in g.waves.windows(2) {
            assert_eq!(pair[0].right, pair[1].left);
            assert!(pair[0].v_final <= pair[1].v_initial);
        }
        assert_eq!(g.waves.first().unwrap().left.s, 0.0);
        assert_eq!(g.waves.last().unwrap().right.s, 1.0);
    }

    #[test]
    fn composite_wave_breakpoints() {
        let flux = CoreyFlux::new(0.5, 1.0, 0.5).unwrap();
        let g = solve_scalar(&flux, 1.0, 0.0, 0.0).unwrap();
        let w = g.to_wave().unwrap();
        assert_eq!(w.kind, WaveKind::Composite);
        assert_eq!(w.breakpoints.len(), 3);
        assert_eq!(w.jump_speeds().len(), 1);
        for xi in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            assert_eq!(w.sample(&flux, xi).s, g.sample(&flux, xi));
        }
    }
}
