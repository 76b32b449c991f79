//! Fractional-flow models.
//!
//! The wave machinery only needs `f`, its first derivatives, `∂_SS f` and
//! the adsorption constant, so everything downstream is written against the
//! [`FluxModel`] trait. [`StarsFlux`] is the foam model (Corey permeabilities
//! with a mobility-reduction factor on the gas phase); [`CoreyFlux`] is a
//! foam-free synthetic S-shaped flux used to exercise the solvers on a
//! second, well-behaved model.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluxError {
    #[error("state ({s}, {c}) lies outside the unit square")]
    StateOutOfRange { s: f64, c: f64 },
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("physical {name} = {value} outside [{lo}, {hi}]")]
    PhysicalOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

/// A point `(S, C)` of the phase plane: normalized water saturation and
/// normalized surfactant concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub s: f64,
    pub c: f64,
}

impl State {
    pub fn new(s: f64, c: f64) -> Result<Self, FluxError> {
        if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&c) {
            return Err(FluxError::StateOutOfRange { s, c });
        }
        Ok(State { s, c })
    }

    /// Builds a state without range checks. Intended for values already
    /// produced inside the unit square (root solves, grids).
    pub const fn new_unchecked(s: f64, c: f64) -> Self {
        State { s, c }
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.s - other.s).abs().max((self.c - other.c).abs())
    }

    pub fn clamped(self) -> Self {
        State {
            s: self.s.clamp(0.0, 1.0),
            c: self.c.clamp(0.0, 1.0),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.s, self.c)
    }
}

/// First and second derivatives of the flux at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxDerivatives {
    pub ds: f64,
    pub dc: f64,
    pub dss: f64,
}

/// Value and first derivatives, the quantities the implicit solver needs
/// at every cell and Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxJet {
    pub f: f64,
    pub ds: f64,
    pub dc: f64,
}

/// Fractional-flow contract.
///
/// Implementations must satisfy, for every `C` in `[0, 1]`:
/// `f(0,C) = 0`, `f(1,C) = 1`, `∂_S f(0,C) = ∂_S f(1,C) = 0`,
/// `∂_S f > 0` and `∂_C f > 0` on the open interval, and `adsorption() > 0`.
pub trait FluxModel: Sync {
    fn f(&self, u: State) -> f64;
    fn df_ds(&self, u: State) -> f64;
    fn df_dc(&self, u: State) -> f64;
    fn d2f_ds2(&self, u: State) -> f64;
    fn adsorption(&self) -> f64;

    fn derivatives(&self, u: State) -> FluxDerivatives {
        FluxDerivatives {
            ds: self.df_ds(u),
            dc: self.df_dc(u),
            dss: self.d2f_ds2(u),
        }
    }

    fn jet(&self, u: State) -> FluxJet {
        FluxJet {
            f: self.f(u),
            ds: self.df_ds(u),
            dc: self.df_dc(u),
        }
    }
}

impl<T: FluxModel + ?Sized> FluxModel for &T {
    fn f(&self, u: State) -> f64 {
        (**self).f(u)
    }
    fn df_ds(&self, u: State) -> f64 {
        (**self).df_ds(u)
    }
    fn df_dc(&self, u: State) -> f64 {
        (**self).df_dc(u)
    }
    fn d2f_ds2(&self, u: State) -> f64 {
        (**self).d2f_ds2(u)
    }
    fn adsorption(&self) -> f64 {
        (**self).adsorption()
    }
    fn derivatives(&self, u: State) -> FluxDerivatives {
        (**self).derivatives(u)
    }
    fn jet(&self, u: State) -> FluxJet {
        (**self).jet(u)
    }
}

/// Foam-model parameters in the physical units of the reservoir simulator
/// (viscosities in Pa·s, densities in kg/m³, concentrations in g/L).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoamParams {
    pub krw0: f64,
    pub krg0: f64,
    pub nw: f64,
    pub ng: f64,
    pub mu_w: f64,
    pub mu_g: f64,
    pub phi: f64,
    pub rho_w: f64,
    pub rho_s: f64,
    pub fmmob: f64,
    pub fmdry: f64,
    pub epdry: f64,
    #[serde(rename = "Swc")]
    pub swc: f64,
    #[serde(rename = "Sgr")]
    pub sgr: f64,
    pub fmsurf: f64,
    pub epsurf: f64,
    #[serde(rename = "Cmax")]
    pub cmax: f64,
    #[serde(rename = "Kda")]
    pub kda: f64,
}

impl FoamParams {
    /// Reference parameter set for the surfactant-foam displacement runs.
    pub fn table1() -> Self {
        FoamParams {
            krw0: 0.302,
            krg0: 0.004,
            nw: 2.0,
            ng: 2.0,
            mu_w: 1e-3,
            mu_g: 5e-5,
            phi: 0.21,
            rho_w: 1000.0,
            rho_s: 2000.0,
            fmmob: 293.27,
            fmdry: 0.437,
            epdry: 359.33,
            swc: 0.43,
            sgr: 0.293,
            fmsurf: 2.0,
            epsurf: 1.0,
            cmax: 2.0,
            kda: 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), FluxError> {
        let positive = [
            ("krw0", self.krw0),
            ("krg0", self.krg0),
            ("mu_w", self.mu_w),
            ("mu_g", self.mu_g),
            ("rho_w", self.rho_w),
            ("rho_s", self.rho_s),
            ("fmdry", self.fmdry),
            ("epdry", self.epdry),
            ("fmsurf", self.fmsurf),
            ("epsurf", self.epsurf),
            ("Cmax", self.cmax),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(FluxError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        // fmmob = 0 and Kda = 0 are meaningful (no foam, no adsorption).
        for (name, value) in [("fmmob", self.fmmob), ("Kda", self.kda)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(FluxError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and non-negative",
                });
            }
        }
        for (name, value) in [("nw", self.nw), ("ng", self.ng)] {
            if !(value.is_finite() && value > 1.0) {
                return Err(FluxError::InvalidParameter {
                    name,
                    value,
                    reason: "Corey exponent must exceed 1 so that the flux has zero slope at S = 0 and S = 1",
                });
            }
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(FluxError::InvalidParameter {
                name: "phi",
                value: self.phi,
                reason: "porosity must lie in (0, 1)",
            });
        }
        for (name, value) in [("Swc", self.swc), ("Sgr", self.sgr)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(FluxError::InvalidParameter {
                    name,
                    value,
                    reason: "residual saturation must be non-negative",
                });
            }
        }
        if self.swc + self.sgr >= 1.0 {
            return Err(FluxError::InvalidParameter {
                name: "Swc",
                value: self.swc,
                reason: "Swc + Sgr must be below 1",
            });
        }
        Ok(())
    }

    /// Width of the mobile saturation window, `1 - Swc - Sgr`.
    pub fn mobile_window(&self) -> f64 {
        1.0 - self.swc - self.sgr
    }

    pub fn mobility_ratio(&self) -> f64 {
        self.mu_w / self.mu_g
    }

    /// Physical water saturation for a normalized saturation.
    pub fn physical_saturation(&self, s: f64) -> f64 {
        self.swc + s * self.mobile_window()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Water,
    Gas,
}

// `x^e` with the integer exponents of the default parameter set done by
// multiplication.
#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e == 2.0 {
        x * x
    } else if e == 1.0 {
        x
    } else if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// Corey relative permeability evaluated on the normalized saturation.
pub fn relative_permeability(s: f64, phase: Phase, params: &FoamParams) -> f64 {
    match phase {
        Phase::Water => params.krw0 * pow(s, params.nw),
        Phase::Gas => params.krg0 * pow(1.0 - s, params.ng),
    }
}

// Dry-out function F2 on the physical saturation and its first two
// derivatives with respect to the normalized saturation.
fn dry_out(s: f64, p: &FoamParams) -> (f64, f64, f64) {
    let w = p.mobile_window();
    let z = p.epdry * (p.physical_saturation(s) - p.fmdry);
    let q = 1.0 + z * z;
    let f2 = 0.5 + z.atan() / PI;
    let d1 = p.epdry * w / (PI * q);
    let d2 = -2.0 * z * (p.epdry * w).powi(2) / (PI * q * q);
    (f2, d1, d2)
}

// Surfactant function F1 on the physical concentration and its derivative
// with respect to the normalized concentration. At the kink Csw = fmsurf the
// derivative is the one-sided limit from below.
fn surfactant_effect(c: f64, p: &FoamParams) -> (f64, f64) {
    let cs = c * p.cmax;
    let ratio = cs / p.fmsurf;
    let value = if cs < p.fmsurf {
        pow(ratio, p.epsurf)
    } else {
        1.0
    };
    let slope = if cs <= p.fmsurf {
        if ratio == 0.0 {
            if p.epsurf == 1.0 {
                p.cmax / p.fmsurf
            } else if p.epsurf > 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            p.epsurf * pow(ratio, p.epsurf - 1.0) * p.cmax / p.fmsurf
        }
    } else {
        0.0
    };
    (value, slope)
}

/// Foam mobility-reduction factor `FM = 1 / (1 + fmmob F1 F2)`.
pub fn mobility_reduction(s: f64, c: f64, params: &FoamParams) -> f64 {
    let (f1, _) = surfactant_effect(c, params);
    let (f2, _, _) = dry_out(s, params);
    1.0 / (1.0 + params.fmmob * f1 * f2)
}

/// Water fractional flow `krw / (krw + (mu_w/mu_g) krg FM)`.
pub fn fractional_flow(s: f64, c: f64, params: &FoamParams) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let krw = relative_permeability(s, Phase::Water, params);
    let gas = params.mobility_ratio()
        * relative_permeability(s, Phase::Gas, params)
        * mobility_reduction(s, c, params);
    krw / (krw + gas)
}

struct Expansion {
    f: f64,
    ds: f64,
    dc: f64,
    dss: f64,
}

fn expand(s: f64, c: f64, p: &FoamParams, second: bool) -> Expansion {
    let m = p.mobility_ratio();
    let (f1, f1_c) = surfactant_effect(c, p);
    let (f2, f2_s, f2_ss) = dry_out(s, p);
    let a = p.fmmob * f1;
    let fm = 1.0 / (1.0 + a * f2);
    let fm_s = -a * f2_s * fm * fm;
    let fm_c = -p.fmmob * f1_c * f2 * fm * fm;

    let one_minus = 1.0 - s;
    let (krw, krw_s) = if s > 0.0 {
        let v = p.krw0 * pow(s, p.nw);
        (v, p.nw * v / s)
    } else {
        (0.0, p.krw0 * p.nw * pow(s, p.nw - 1.0))
    };
    let (krg, krg_s) = if one_minus > 0.0 {
        let v = p.krg0 * pow(one_minus, p.ng);
        (v, -p.ng * v / one_minus)
    } else {
        (0.0, -p.krg0 * p.ng * pow(one_minus, p.ng - 1.0))
    };

    let gas = m * krg * fm;
    let gas_s = m * (krg_s * fm + krg * fm_s);
    let gas_c = m * krg * fm_c;

    let denom = krw + gas;
    let numer = krw_s * gas - krw * gas_s;
    let f = krw / denom;
    let ds = numer / (denom * denom);
    let dc = -krw * gas_c / (denom * denom);

    let dss = if second {
        let krw_ss = p.krw0 * p.nw * (p.nw - 1.0) * pow(s, p.nw - 2.0);
        let krg_ss = p.krg0 * p.ng * (p.ng - 1.0) * pow(one_minus, p.ng - 2.0);
        let fm_ss = -a * f2_ss * fm * fm + 2.0 * a * a * f2_s * f2_s * fm * fm * fm;
        let gas_ss = m * (krg_ss * fm + 2.0 * krg_s * fm_s + krg * fm_ss);
        let numer_s = krw_ss * gas - krw * gas_ss;
        let denom_s = krw_s + gas_s;
        (numer_s * denom - 2.0 * numer * denom_s) / (denom * denom * denom)
    } else {
        0.0
    };
    Expansion { f, ds, dc, dss }
}

/// `(∂_S f, ∂_C f, ∂_SS f)` from the closed-form quotient-rule expressions.
/// The endpoint values of `∂_S f` and `∂_C f` are the analytic limits.
pub fn flux_derivatives(s: f64, c: f64, params: &FoamParams) -> FluxDerivatives {
    let e = expand(s, c, params, true);
    if s <= 0.0 || s >= 1.0 {
        FluxDerivatives {
            ds: 0.0,
            dc: 0.0,
            dss: e.dss,
        }
    } else {
        FluxDerivatives {
            ds: e.ds,
            dc: e.dc,
            dss: e.dss,
        }
    }
}

/// Lumped adsorption constant of the surfactant accumulation term.
pub fn adsorption_constant(params: &FoamParams) -> f64 {
    (params.swc + (1.0 - params.phi) * (params.rho_s / (params.rho_w * params.phi)) * params.kda)
        / params.mobile_window()
}

/// Maps a physical `(Sw, Csw)` pair into the normalized phase plane.
pub fn normalize_state(sw: f64, csw: f64, params: &FoamParams) -> Result<State, FluxError> {
    let (lo, hi) = (params.swc, 1.0 - params.sgr);
    if !(lo..=hi).contains(&sw) {
        return Err(FluxError::PhysicalOutOfRange {
            name: "Sw",
            value: sw,
            lo,
            hi,
        });
    }
    if !(0.0..=params.cmax).contains(&csw) {
        return Err(FluxError::PhysicalOutOfRange {
            name: "Csw",
            value: csw,
            lo: 0.0,
            hi: params.cmax,
        });
    }
    let s = ((sw - params.swc) / params.mobile_window()).clamp(0.0, 1.0);
    let c = (csw / params.cmax).clamp(0.0, 1.0);
    Ok(State { s, c })
}

/// Inverse of [`normalize_state`]: returns `(Sw, Csw)`.
pub fn denormalize_state(u: State, params: &FoamParams) -> (f64, f64) {
    (params.physical_saturation(u.s), u.c * params.cmax)
}

/// The foam fractional-flow model bound to a validated parameter set.
#[derive(Debug, Clone)]
pub struct StarsFlux {
    params: FoamParams,
    adsorption: f64,
}

impl StarsFlux {
    pub fn new(params: FoamParams) -> Result<Self, FluxError> {
        params.validate()?;
        let adsorption = adsorption_constant(&params);
        if !(adsorption.is_finite() && adsorption > 0.0) {
            return Err(FluxError::InvalidParameter {
                name: "Kda",
                value: params.kda,
                reason: "adsorption constant must be strictly positive (Swc and Kda both zero)",
            });
        }
        Ok(StarsFlux { params, adsorption })
    }

    pub fn table1() -> Self {
        Self::new(FoamParams::table1()).expect("reference parameters are valid")
    }

    pub fn params(&self) -> &FoamParams {
        &self.params
    }
}

impl FluxModel for StarsFlux {
    fn f(&self, u: State) -> f64 {
        fractional_flow(u.s, u.c, &self.params)
    }

    fn df_ds(&self, u: State) -> f64 {
        if u.s <= 0.0 || u.s >= 1.0 {
            return 0.0;
        }
        expand(u.s, u.c, &self.params, false).ds
    }

    fn df_dc(&self, u: State) -> f64 {
        if u.s <= 0.0 || u.s >= 1.0 {
            return 0.0;
        }
        expand(u.s, u.c, &self.params, false).dc
    }

    fn d2f_ds2(&self, u: State) -> f64 {
        expand(u.s, u.c, &self.params, true).dss
    }

    fn adsorption(&self) -> f64 {
        self.adsorption
    }

    fn derivatives(&self, u: State) -> FluxDerivatives {
        flux_derivatives(u.s, u.c, &self.params)
    }

    fn jet(&self, u: State) -> FluxJet {
        if u.s <= 0.0 {
            return FluxJet { f: 0.0, ds: 0.0, dc: 0.0 };
        }
        if u.s >= 1.0 {
            return FluxJet { f: 1.0, ds: 0.0, dc: 0.0 };
        }
        let e = expand(u.s, u.c, &self.params, false);
        FluxJet {
            f: e.f,
            ds: e.ds,
            dc: e.dc,
        }
    }
}

/// Foam-free quadratic Corey flux `S² / (S² + M(C) (1-S)²)` with
/// `M(C) = m0 / (1 + k C)`, which makes `f` increasing in `C`.
#[derive(Debug, Clone, Copy)]
pub struct CoreyFlux {
    pub m0: f64,
    pub k: f64,
    pub adsorption: f64,
}

impl CoreyFlux {
    pub fn new(m0: f64, k: f64, adsorption: f64) -> Result<Self, FluxError> {
        for (name, value) in [("m0", m0), ("adsorption", adsorption)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(FluxError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(FluxError::InvalidParameter {
                name: "k",
                value: k,
                reason: "must be finite and strictly positive",
            });
        }
        Ok(CoreyFlux { m0, k, adsorption })
    }

    fn ratio(&self, c: f64) -> (f64, f64) {
        let d = 1.0 + self.k * c;
        (self.m0 / d, -self.m0 * self.k / (d * d))
    }
}

impl FluxModel for CoreyFlux {
    fn f(&self, u: State) -> f64 {
        if u.s <= 0.0 {
            return 0.0;
        }
        if u.s >= 1.0 {
            return 1.0;
        }
        let (m, _) = self.ratio(u.c);
        let a = u.s * u.s;
        a / (a + m * (1.0 - u.s).powi(2))
    }

    fn df_ds(&self, u: State) -> f64 {
        if u.s <= 0.0 || u.s >= 1.0 {
            return 0.0;
        }
        let (m, _) = self.ratio(u.c);
        let s = u.s;
        let b = (1.0 - s).powi(2);
        let d = s * s + m * b;
        2.0 * m * s * (1.0 - s) / (d * d)
    }

    fn df_dc(&self, u: State) -> f64 {
        if u.s <= 0.0 || u.s >= 1.0 {
            return 0.0;
        }
        let (m, m_c) = self.ratio(u.c);
        let s = u.s;
        let b = (1.0 - s).powi(2);
        let d = s * s + m * b;
        -s * s * b * m_c / (d * d)
    }

    fn d2f_ds2(&self, u: State) -> f64 {
        let (m, _) = self.ratio(u.c);
        let s = u.s;
        let b = (1.0 - s).powi(2);
        let d = s * s + m * b;
        let d_s = 2.0 * s - 2.0 * m * (1.0 - s);
        let n = 2.0 * m * s * (1.0 - s);
        let n_s = 2.0 * m * (1.0 - 2.0 * s);
        (n_s * d - 2.0 * n * d_s) / (d * d * d)
    }

    fn adsorption(&self) -> f64 {
        self.adsorption
    }
}
