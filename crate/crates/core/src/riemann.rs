//! Riemann solver for the saturation/surfactant system.
//!
//! The right state is located relative to sets built from the left state:
//! three sets when `U_L` is left of (or on) the transition curve, three when
//! it is right of it. Each set has its own wave pattern:
//!
//! | pattern        | sets     | intermediate states                         |
//! |----------------|----------|---------------------------------------------|
//! | contact, S     | L1       | `U_M` on `Γ(U_L)` at `C_R`, left branch      |
//! | S, contact     | L3, R3   | `U_M` on `Γ(U_R)` at `C_L`, right branch     |
//! | S, contact, S  | R1       | `U_1 = T ∩ {C_L}`, `U_2` on `Γ(U_1)` at `C_R` |
//! | S, contact, S  | L2, R2   | `U_2 = T ∩ {C_R}`, `U_1` on `Γ(U_2)` at `C_L` |
//!
//! On the boundaries L1∩L2, L1∩L3 and R1∩R3 two patterns are compatible;
//! they differ in phase space but coincide in the x-t plane.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxError, FluxModel, State};
use crate::scalar_bl::{self, WaveGroup};
use crate::waves::{
    self, classify, lambda_c, oleinik_admissible, LevelCurve, Region, Tolerances, Wave, WaveError,
    WaveKind,
};

#[derive(Debug, Error)]
pub enum RiemannError {
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error("inconsistent construction ({construction}): {reason}")]
    Construction {
        construction: Construction,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseRegion {
    L1,
    L2,
    L3,
    R1,
    R2,
    R3,
}

impl fmt::Display for BaseRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Location of `U_R` relative to the sets generated by `U_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRegion {
    pub base: BaseRegion,
    pub l1_l2: bool,
    pub l1_l3: bool,
    pub r1_r3: bool,
    /// Side of the transition curve holding `U_L`.
    pub left_side: Region,
    /// `U_T1` (left case) or `U_T2` (right case).
    pub pivot: State,
    /// `λ_C` level separating the sets: `λ_C(U_L)` or `λ_C(U_T2)`.
    pub level: f64,
}

impl ClassificationRegion {
    pub fn on_boundary(&self) -> bool {
        self.l1_l2 || self.l1_l3 || self.r1_r3
    }
}

/// Which wave pattern produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `U_L = U_R`.
    Trivial,
    /// Equal concentrations: a single scalar wave group.
    Scalar,
    /// Contact, then an `S`-group.
    ContactThenS,
    /// `S`-group, then a contact.
    SThenContact,
    /// `S`, contact, `S` with `C_L < C_R` through `T ∩ {C = C_L}`.
    SContactSRising,
    /// `S`, contact, `S` with `C_R < C_L` through `T ∩ {C = C_R}`.
    SContactSFalling,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Construction::Trivial => "trivial",
            Construction::Scalar => "scalar",
            Construction::ContactThenS => "contact-S",
            Construction::SThenContact => "S-contact",
            Construction::SContactSRising => "S-contact-S (rising C)",
            Construction::SContactSFalling => "S-contact-S (falling C)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannSolution {
    pub left: State,
    pub right: State,
    pub sequence: Vec<Wave>,
    pub intermediates: Vec<State>,
    pub region: ClassificationRegion,
    pub construction: Construction,
    pub alternate: Option<Box<RiemannSolution>>,
}

impl RiemannSolution {
    pub fn kinds(&self) -> Vec<WaveKind> {
        self.sequence.iter().map(|w| w.kind).collect()
    }

    pub fn wave_count(&self) -> usize {
        self.sequence.len()
    }

    /// State at similarity coordinate `xi = x / t`.
    pub fn sample_xi<F: FluxModel + ?Sized>(&self, flux: &F, xi: f64) -> State {
        for w in &self.sequence {
            if xi < w.v_initial {
                return w.left;
            }
            if xi <= w.v_final {
                return w.sample(flux, xi);
            }
        }
        self.right
    }

    /// State at `(x, t)` with `t > 0`.
    pub fn sample<F: FluxModel + ?Sized>(&self, flux: &F, x: f64, t: f64) -> State {
        self.sample_xi(flux, x / t)
    }

    /// Speed span `(slowest, fastest)` of the solution; `None` when empty.
    pub fn speed_span(&self) -> Option<(f64, f64)> {
        Some((self.sequence.first()?.v_initial, self.sequence.last()?.v_final))
    }
}

/// A Riemann problem bound to a flux model and tolerance set.
#[derive(Debug, Clone, Copy)]
pub struct RiemannProblem<'a, F: ?Sized> {
    pub left: State,
    pub right: State,
    pub flux: &'a F,
    pub tol: Tolerances,
}

impl<'a, F: FluxModel + ?Sized> RiemannProblem<'a, F> {
    pub fn new(flux: &'a F, left: State, right: State) -> Result<Self, RiemannError> {
        let left = State::new(left.s, left.c)?;
        let right = State::new(right.s, right.c)?;
        Ok(RiemannProblem {
            left,
            right,
            flux,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn classify(&self) -> Result<ClassificationRegion, RiemannError> {
        classify_pair(self)
    }

    pub fn solve(&self) -> Result<RiemannSolution, RiemannError> {
        solve(self)
    }
}

/// Places `U_R` among the sets generated by `U_L`.
pub fn classify_pair<F: FluxModel + ?Sized>(problem: &RiemannProblem<'_, F>) -> Result<ClassificationRegion, RiemannError> {
    let flux = problem.flux;
    let tol = problem.tol;
    let (ul, ur) = (problem.left, problem.right);
    let left_side = classify(flux, ul, tol.transition);
    let right_side = classify(flux, ur, tol.transition);
    let lambda_r = lambda_c(flux, ur);

    if left_side != Region::R {
        let level = lambda_c(flux, ul);
        let pivot = waves::gamma_transition_intersection(flux, ul, tol.transition)?;
        let c_t1 = pivot.c;
        let reaches = pivot != waves::NO_TRANSITION_HIT;
        let base = if lambda_r >= level || (right_side == Region::L && ur.c >= c_t1) {
            BaseRegion::L1
        } else if right_side == Region::L {
            BaseRegion::L2
        } else {
            BaseRegion::L3
        };
        let l1_l2 = reaches && right_side != Region::R && (ur.c - c_t1).abs() <= tol.boundary;
        let l1_l3 = right_side != Region::L && (lambda_r - level).abs() <= tol.boundary;
        Ok(ClassificationRegion {
            base,
            l1_l2,
            l1_l3,
            r1_r3: false,
            left_side,
            pivot,
            level,
        })
    } else {
        let (s_star, level) = waves::peak_lambda_c(flux, ul.c)?;
        let pivot = State::new_unchecked(s_star, ul.c);
        let base = if lambda_r >= level || (right_side == Region::L && ur.c > ul.c) {
            BaseRegion::R1
        } else if right_side == Region::L {
            BaseRegion::R2
        } else {
            BaseRegion::R3
        };
        let r1_r3 = right_side != Region::L && (lambda_r - level).abs() <= tol.boundary;
        Ok(ClassificationRegion {
            base,
            l1_l2: false,
            l1_l3: false,
            r1_r3,
            left_side,
            pivot,
            level,
        })
    }
}

struct Builder<'p, 'a, F: ?Sized> {
    problem: &'p RiemannProblem<'a, F>,
    construction: Construction,
    waves: Vec<Wave>,
    intermediates: Vec<State>,
}

impl<'p, 'a, F: FluxModel + ?Sized> Builder<'p, 'a, F> {
    fn new(problem: &'p RiemannProblem<'a, F>, construction: Construction) -> Self {
        Builder {
            problem,
            construction,
            waves: Vec::new(),
            intermediates: Vec::new(),
        }
    }

    fn s_group(&mut self, from: State, to: State) -> Result<(), RiemannError> {
        let group: WaveGroup = scalar_bl::solve_scalar(self.problem.flux, from.s, to.s, from.c)?;
        if let Some(w) = group.to_wave() {
            self.waves.push(w);
        }
        Ok(())
    }

    fn contact(&mut self, from: State, to: State) {
        if from.distance(&to) <= scalar_bl::ZERO_STRENGTH {
            return;
        }
        let speed = 0.5 * (lambda_c(self.problem.flux, from) + lambda_c(self.problem.flux, to));
        self.waves.push(Wave::contact(from, to, speed));
    }

    fn level_root(&self, level: f64, c: f64, side: Region) -> Result<State, RiemannError> {
        let curve = LevelCurve::new(self.problem.flux, level).with_slack(self.problem.tol.boundary);
        let root = match side {
            Region::R => curve.right_root(c)?,
            _ => curve.left_root(c)?,
        };
        root.map(|s| State::new_unchecked(s, c))
            .ok_or_else(|| RiemannError::Construction {
                construction: self.construction,
                reason: format!("level λ_C = {level} has no {side}-branch point at C = {c}"),
            })
    }

    fn finish(self, region: ClassificationRegion) -> RiemannSolution {
        RiemannSolution {
            left: self.problem.left,
            right: self.problem.right,
            sequence: self.waves,
            intermediates: self.intermediates,
            region,
            construction: self.construction,
            alternate: None,
        }
    }
}

fn build<F: FluxModel + ?Sized>(
    problem: &RiemannProblem<'_, F>,
    construction: Construction,
    region: ClassificationRegion,
) -> Result<RiemannSolution, RiemannError> {
    let flux = problem.flux;
    let (ul, ur) = (problem.left, problem.right);
    let mut b = Builder::new(problem, construction);
    match construction {
        Construction::Trivial => {}
        Construction::Scalar => b.s_group(ul, ur)?,
        Construction::ContactThenS => {
            let um = b.level_root(lambda_c(flux, ul), ur.c, Region::L)?;
            b.intermediates.push(um);
            b.contact(ul, um);
            b.s_group(um, ur)?;
        }
        Construction::SThenContact => {
            let um = b.level_root(lambda_c(flux, ur), ul.c, Region::R)?;
            b.intermediates.push(um);
            b.s_group(ul, um)?;
            b.contact(um, ur);
        }
        Construction::SContactSRising => {
            let (s1, level) = waves::peak_lambda_c(flux, ul.c)?;
            let u1 = State::new_unchecked(s1, ul.c);
            let u2 = b.level_root(level, ur.c, Region::L)?;
            b.intermediates.extend([u1, u2]);
            b.s_group(ul, u1)?;
            b.contact(u1, u2);
            b.s_group(u2, ur)?;
        }
        Construction::SContactSFalling => {
            let (s2, level) = waves::peak_lambda_c(flux, ur.c)?;
            let u2 = State::new_unchecked(s2, ur.c);
            let u1 = b.level_root(level, ul.c, Region::R)?;
            b.intermediates.extend([u1, u2]);
            b.s_group(ul, u1)?;
            b.contact(u1, u2);
            b.s_group(u2, ur)?;
        }
    }
    Ok(b.finish(region))
}

fn fail(construction: Construction, reason: String) -> RiemannError {
    RiemannError::Construction {
        construction,
        reason,
    }
}

/// Post-hoc checks every returned sequence must pass: endpoint matching,
/// adjacency, compatibility of speeds, `C`-preservation by `S`-waves, equal
/// `λ_C` and same-side states across contacts, and Oleinik at every shock.
pub fn verify<F: FluxModel + ?Sized>(
    flux: &F,
    solution: &RiemannSolution,
    tol: &Tolerances,
    slack: f64,
) -> Result<(), RiemannError> {
    let kind = solution.construction;
    let seq = &solution.sequence;
    let close = |a: &State, b: &State| a.distance(b) <= 1e-12;
    match (seq.first(), seq.last()) {
        (Some(first), Some(last)) => {
            if !close(&first.left, &solution.left) || !close(&last.right, &solution.right) {
                return Err(fail(kind, "endpoint states do not match the problem".into()));
            }
        }
        _ => {
            if solution.left.distance(&solution.right) > 1e-12 {
                return Err(fail(kind, "empty sequence for distinct states".into()));
            }
        }
    }
    for pair in seq.windows(2) {
        if !close(&pair[0].right, &pair[1].left) {
            return Err(fail(kind, "adjacent waves do not share a state".into()));
        }
        if pair[0].v_final > pair[1].v_initial + slack {
            return Err(fail(
                kind,
                format!(
                    "incompatible speeds: {} wave ends at {} but {} wave starts at {}",
                    pair[0].kind, pair[0].v_final, pair[1].kind, pair[1].v_initial
                ),
            ));
        }
    }
    for w in seq {
        if w.v_initial > w.v_final {
            return Err(fail(kind, format!("{} wave has decreasing speeds", w.kind)));
        }
        if w.kind == WaveKind::Contact {
            let (a, b) = (lambda_c(flux, w.left), lambda_c(flux, w.right));
            if (a - b).abs() > slack || (w.v_initial - a).abs() > slack {
                return Err(fail(kind, format!("contact speeds differ: {a} vs {b}")));
            }
            let sides = (
                classify(flux, w.left, tol.transition),
                classify(flux, w.right, tol.transition),
            );
            if matches!(sides, (Region::L, Region::R) | (Region::R, Region::L)) {
                return Err(fail(kind, format!("contact crosses the transition curve: {sides:?}")));
            }
            if sides.0 == Region::R && waves::secondary_intersection(flux, w.left)?.is_infinite() {
                return Err(fail(kind, "contact from a right state without a partner saturation".into()));
            }
        } else {
            if w.left.c != w.right.c {
                return Err(fail(kind, "S-wave changes the concentration".into()));
            }
            let c = w.left.c;
            for pair in w.breakpoints.windows(2) {
                let ((s_a, v_a), (s_b, v_b)) = (pair[0], pair[1]);
                if v_a == v_b && s_a != s_b && !oleinik_admissible(flux, s_a, s_b, c, 256) {
                    return Err(fail(kind, format!("shock {s_a} -> {s_b} at C = {c} fails Oleinik")));
                }
            }
        }
    }
    Ok(())
}

fn construction_for(base: BaseRegion) -> Construction {
    match base {
        BaseRegion::L1 => Construction::ContactThenS,
        BaseRegion::L3 | BaseRegion::R3 => Construction::SThenContact,
        BaseRegion::R1 => Construction::SContactSRising,
        BaseRegion::L2 | BaseRegion::R2 => Construction::SContactSFalling,
    }
}

/// Constructions valid on the boundary loci flagged in `region`, other
/// than the one for its base set.
fn boundary_alternate(region: &ClassificationRegion) -> Option<Construction> {
    let primary = construction_for(region.base);
    let candidates = [
        (region.l1_l2, [Construction::ContactThenS, Construction::SContactSFalling]),
        (region.l1_l3, [Construction::ContactThenS, Construction::SThenContact]),
        (region.r1_r3, [Construction::SThenContact, Construction::SContactSRising]),
    ];
    candidates
        .iter()
        .filter(|(flag, pair)| *flag && pair.contains(&primary))
        .flat_map(|(_, pair)| pair.iter().copied())
        .find(|c| *c != primary)
}

// Compatibility slack for a construction used on a flagged boundary point
// that is only within `boundary` of the exact locus.
fn boundary_slack(problem_tol: &Tolerances, gap: f64) -> f64 {
    problem_tol.compatibility.max(1e3 * gap)
}

fn boundary_gap<F: FluxModel + ?Sized>(problem: &RiemannProblem<'_, F>, region: &ClassificationRegion) -> f64 {
    let lambda_r = lambda_c(problem.flux, problem.right);
    let mut gap: f64 = 0.0;
    if region.l1_l2 {
        gap = gap.max((problem.right.c - region.pivot.c).abs());
    }
    if region.l1_l3 || region.r1_r3 {
        gap = gap.max((lambda_r - region.level).abs());
    }
    gap
}

// Lower is preferred on non-uniqueness loci: fewer waves first, then the
// contact-first pattern.
fn preference(c: Construction) -> u8 {
    match c {
        Construction::Trivial | Construction::Scalar => 0,
        Construction::ContactThenS => 1,
        Construction::SThenContact => 2,
        Construction::SContactSFalling | Construction::SContactSRising => 3,
    }
}

/// Solves the Riemann problem.
///
/// On a flagged boundary locus both compatible constructions are built. The
/// preferred one (fewer waves, then contact first) is returned as primary
/// when it passes verification at the compatibility tolerance; otherwise the
/// construction of the base set is. The other is attached as `alternate`
/// when it verifies within a slack proportional to the distance from the
/// exact locus.
pub fn solve<F: FluxModel + ?Sized>(problem: &RiemannProblem<'_, F>) -> Result<RiemannSolution, RiemannError> {
    let flux = problem.flux;
    let tol = &problem.tol;
    let region = classify_pair(problem)?;
    let (ul, ur) = (problem.left, problem.right);
    if ul.distance(&ur) <= scalar_bl::ZERO_STRENGTH || (ul.c - ur.c).abs() <= scalar_bl::ZERO_STRENGTH {
        let kind = if ul.distance(&ur) <= scalar_bl::ZERO_STRENGTH {
            Construction::Trivial
        } else {
            Construction::Scalar
        };
        let solution = build(problem, kind, region)?;
        verify(flux, &solution, tol, tol.compatibility)?;
        return Ok(solution);
    }

    let base = construction_for(region.base);
    let Some(other) = boundary_alternate(&region) else {
        let solution = build(problem, base, region)?;
        verify(flux, &solution, tol, tol.compatibility)?;
        return Ok(solution);
    };

    let strict = |c: Construction| build(problem, c, region).and_then(|s| verify(flux, &s, tol, tol.compatibility).map(|_| s));
    let (first, second) = if preference(other) < preference(base) { (other, base) } else { (base, other) };
    let (mut primary, alt_kind) = match strict(first) {
        Ok(s) => (s, second),
        Err(e) if first != base => {
            log::debug!("preferred construction {first} rejected on the boundary: {e}");
            (strict(base)?, first)
        }
        Err(e) => return Err(e),
    };
    let slack = boundary_slack(tol, boundary_gap(problem, &region));
    match build(problem, alt_kind, region).and_then(|s| verify(flux, &s, tol, slack).map(|_| s)) {
        Ok(alt) => primary.alternate = Some(Box::new(alt)),
        Err(e) => log::debug!("boundary alternate {alt_kind} rejected: {e}"),
    }
    Ok(primary)
}

/// Both compatible sequences for a problem on a non-uniqueness locus, or
/// `None` away from the loci.
pub fn alternate_solutions<F: FluxModel + ?Sized>(
    problem: &RiemannProblem<'_, F>,
) -> Result<Option<(RiemannSolution, RiemannSolution)>, RiemannError> {
    let mut primary = solve(problem)?;
    Ok(primary.alternate.take().map(|alt| (primary, *alt)))
}

/// One sampled right state of a stability scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub right: State,
    pub region: BaseRegion,
    pub on_boundary: bool,
    pub wave_count: usize,
    pub kinds: Vec<WaveKind>,
}

/// A change of wave pattern between two consecutive scan points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub before: usize,
    pub after: usize,
    pub from: Vec<WaveKind>,
    pub to: Vec<WaveKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub left: State,
    pub points: Vec<ScanPoint>,
    pub crossings: Vec<Crossing>,
}

fn lerp(a: State, b: State, t: f64) -> State {
    State::new_unchecked(a.s + (b.s - a.s) * t, a.c + (b.c - a.c) * t)
}

fn scan_point<F: FluxModel + ?Sized>(flux: &F, left: State, right: State, tol: Tolerances) -> Result<ScanPoint, RiemannError> {
    let problem = RiemannProblem::new(flux, left, right)?.with_tolerances(tol);
    let sol = problem.solve()?;
    Ok(ScanPoint {
        right,
        region: sol.region.base,
        on_boundary: sol.region.on_boundary(),
        wave_count: sol.wave_count(),
        kinds: sol.kinds(),
    })
}

/// Classifies `n` evenly spaced right states on the segment `from..=to` and
/// reports where the wave pattern changes. Points are solved in parallel;
/// results keep segment order.
pub fn stability_scan<F: FluxModel + ?Sized>(
    flux: &F,
    left: State,
    from: State,
    to: State,
    n: usize,
    tol: Tolerances,
) -> Result<ScanReport, RiemannError> {
    let n = n.max(2);
    let points = (0..n)
        .into_par_iter()
        .map(|i| scan_point(flux, left, lerp(from, to, i as f64 / (n - 1) as f64), tol))
        .collect::<Result<Vec<_>, _>>()?;
    let crossings = points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].kinds != w[1].kinds)
        .map(|(i, w)| Crossing {
            before: i,
            after: i + 1,
            from: w[0].kinds.clone(),
            to: w[1].kinds.clone(),
        })
        .collect();
    Ok(ScanReport {
        left,
        points,
        crossings,
    })
}

/// Bisects the segment `a..b` (whose endpoints have different wave
/// patterns) down to `xtol` in the segment parameter and returns the
/// midpoint of the final bracket.
pub fn refine_crossing<F: FluxModel + ?Sized>(
    flux: &F,
    left: State,
    a: State,
    b: State,
    tol: Tolerances,
    xtol: f64,
) -> Result<State, RiemannError> {
    let kinds_a = scan_point(flux, left, a, tol)?.kinds;
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if scan_point(flux, left, lerp(a, b, mid), tol)?.kinds == kinds_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lerp(a, b, 0.5 * (lo + hi)))
}
