mod common;

use common::st;
use foam_riemann::pde::{compare_l1, run, SimConfig};
use foam_riemann::{FluxModel, RiemannProblem, StarsFlux, State};

fn drainage() -> (State, State) {
    (st(0.1, 0.05), st(0.99, 0.5))
}

#[test]
fn discrete_totals_balance_boundary_fluxes() {
    let flux = StarsFlux::table1();
    let (l, r) = drainage();
    let cfg = SimConfig::riemann(l, r, 0.2).with_grid(400, 1e-4);
    let num = run(&cfg, &flux, &[]).unwrap();
    let dx = cfg.dx();
    let a = flux.adsorption();
    let last = num.times.len() - 1;
    let s_end: f64 = num.s[last].iter().sum::<f64>() * dx;
    let c_end: f64 = num.s[last].iter().zip(&num.c[last]).map(|(s, c)| (s + a) * c).sum::<f64>() * dx;
    let d = &num.diagnostics;
    let expect = [
        num.initial_totals[0] + d.inflow[0] - d.outflow[0],
        num.initial_totals[1] + d.inflow[1] - d.outflow[1],
    ];
    assert!((s_end - expect[0]).abs() <= 1e-9, "{s_end} vs {}", expect[0]);
    assert!((c_end - expect[1]).abs() <= 1e-9, "{c_end} vs {}", expect[1]);
}

#[test]
fn constant_concentration_decouples() {
    let flux = StarsFlux::table1();
    let (l, r) = (st(0.95, 0.3), st(0.1, 0.3));
    let t = 0.2;
    let cfg = SimConfig::riemann(l, r, t).with_grid(1000, 2e-5);
    let num = run(&cfg, &flux, &[]).unwrap();
    assert!(num.c[0].iter().all(|&c| (c - 0.3).abs() <= 1e-12));
    let exact = RiemannProblem::new(&flux, l, r).unwrap().solve().unwrap();
    assert_eq!(exact.sequence.len(), 1);
    let (err_s, err_c) = compare_l1(&num, &exact, &flux, t).unwrap();
    assert!(err_s <= 5e-3, "errS {err_s}");
    assert!(err_c <= 1e-12);
}

#[test]
fn halving_the_time_step_converges() {
    let flux = StarsFlux::table1();
    let (l, r) = drainage();
    let t = 0.1;
    let runs: Vec<Vec<f64>> = [4e-5, 2e-5, 1e-5]
        .iter()
        .map(|&dt| run(&SimConfig::riemann(l, r, t).with_grid(400, dt), &flux, &[]).unwrap().s.pop().unwrap())
        .collect();
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
    let (d1, d2) = (diff(&runs[0], &runs[1]), diff(&runs[1], &runs[2]));
    assert!(d2 < 0.6 * d1, "{d1} then {d2}");
    // the time-step effect stays below the spatial error on this grid
    let exact = RiemannProblem::new(&flux, l, r).unwrap().solve().unwrap();
    let num = run(&SimConfig::riemann(l, r, t).with_grid(400, 2e-5), &flux, &[]).unwrap();
    let (err_s, _) = compare_l1(&num, &exact, &flux, t).unwrap();
    assert!(d2 < err_s, "{d2} vs spatial error {err_s}");
}

#[test]
fn refining_the_grid_reduces_the_error() {
    let flux = StarsFlux::table1();
    let (l, r) = drainage();
    let t = 0.5;
    let exact = RiemannProblem::new(&flux, l, r).unwrap().solve().unwrap();
    let errs: Vec<(f64, f64)> = [500, 1000, 2000]
        .iter()
        .map(|&n| {
            let num = run(&SimConfig::riemann(l, r, t).with_grid(n, 2e-5), &flux, &[]).unwrap();
            compare_l1(&num, &exact, &flux, t).unwrap()
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1, "{errs:?}");
    }
}
