mod common;

use foam_riemann::{CoreyFlux, StarsFlux};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn stars_flux_matches_hull_oracle() {
    let flux = StarsFlux::table1();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let failures: Vec<String> = (0..200)
        .filter_map(|_| {
            let (s_l, s_r, c) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            common::check_scalar_case(&flux, s_l, s_r, c, 1e-3).err()
        })
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn corey_flux_matches_hull_oracle() {
    let flux = CoreyFlux::new(0.5, 2.0, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let (s_l, s_r, c) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
        common::check_scalar_case(&flux, s_l, s_r, c, 1e-4).unwrap();
    }
}

#[test]
fn endpoint_states_match_hull_oracle() {
    let flux = StarsFlux::table1();
    for (s_l, s_r) in [(0.0, 1.0), (1.0, 0.0), (0.0, 0.5), (1.0, 0.3), (0.02, 0.03)] {
        for c in [0.0, 0.5, 1.0] {
            common::check_scalar_case(&flux, s_l, s_r, c, 1e-3).unwrap();
        }
    }
}

#[test]
fn sampled_groups_are_monotone_and_conservative() {
    use foam_riemann::{FluxModel, WaveKind};
    let flux = StarsFlux::table1();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let (s_l, s_r, c) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
        let group = foam_riemann::solve_scalar(&flux, s_l, s_r, c).unwrap();
        let (lo, hi) = (group.v_initial - 0.1, group.v_final + 0.1);

        let mut prev = s_l;
        for i in 0..=2000 {
            let s = group.sample(&flux, lo + (hi - lo) * i as f64 / 2000.0);
            assert!((s - prev) * (s_r - s_l) >= -1e-12, "not monotone at ({s_l}, {s_r}, {c})");
            prev = s;
        }

        // constant states exactly, fans by midpoint quadrature
        let mut integral = s_l * (group.v_initial - lo) + s_r * (hi - group.v_final);
        for w in group.waves.iter().filter(|w| w.kind == WaveKind::Rarefaction) {
            let m = 20_000;
            let h = (w.v_final - w.v_initial) / m as f64;
            integral += (0..m).map(|i| group.sample(&flux, w.v_initial + (i as f64 + 0.5) * h) * h).sum::<f64>();
        }
        let f = |s| flux.f(common::st(s, c));
        let expected = hi * s_r - lo * s_l - (f(s_r) - f(s_l));
        assert!(
            (integral - expected).abs() <= 1e-6 * expected.abs().max(1.0),
            "integral form at ({s_l}, {s_r}, {c}): {integral} vs {expected}"
        );
    }
}
