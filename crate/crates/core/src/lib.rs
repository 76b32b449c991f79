//! Exact Riemann solutions for one-dimensional two-phase foam flow with a
//! surfactant that adsorbs linearly on the rock, plus an implicit
//! finite-difference solver used to validate them.
//!
//! The unknowns are the normalized water saturation `S` and the normalized
//! surfactant concentration `C`. The model is
//!
//! ```text
//! S_t + f(S, C)_x = 0
//! ((S + A) C)_t + (f(S, C) C)_x = 0
//! ```
//!
//! with fractional flow `f` from [`flux`] and adsorption constant `A`.

pub mod cli;
pub mod config;
pub mod flux;
pub mod pde;
pub mod riemann;
pub mod roots;
pub mod scalar_bl;
pub mod waves;

pub use flux::{CoreyFlux, FluxModel, FoamParams, StarsFlux, State};
pub use riemann::{
    alternate_solutions, classify_pair, solve, stability_scan, BaseRegion, ClassificationRegion,
    Construction, RiemannError, RiemannProblem, RiemannSolution,
};
pub use scalar_bl::{solve_scalar, WaveGroup};
pub use waves::{Region, Tolerances, Wave, WaveKind};
