// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use zeno_core::blockade::{
    classify_regime, critical_margin, observed_regime, sign_changes, simulate_coupled,
    simulate_master_oracle, simulate_offdiag, BlockadeParams, Closure, Regime,
};
use zeno_core::ode::IntegratorConfig;

fn tight(samples: usize) -> IntegratorConfig {
    IntegratorConfig::dormand_prince(1e-12).with_samples(samples)
}

fn horizon(p: &BlockadeParams) -> f64 {
    40.0 / p.omega() + 40.0 / p.gamma
}

#[test]
fn undamped_amplitude_is_conserved() {
    let p = BlockadeParams::new(2, 3, 0.7, 0.0, 0.0);
    let period = 2.0 * PI / p.omega();
    let s = simulate_offdiag(&p, 0.5, 0.0, 10.0 * period, &tight(2001)).unwrap();
    for (t, y) in s.times.iter().zip(&s.y) {
        assert_abs_diff_eq!(*y, 0.5 * (p.omega() * t).cos(), epsilon = 1e-6);
    }
    let e = s.energy(&p);
    assert_abs_diff_eq!(e[e.len() - 1], e[0], epsilon = 1e-6 * e[0]);
}

#[test]
fn energy_never_increases() {
    for gamma in [0.3, 2.0, 9.0] {
        let p = BlockadeParams::new(1, 2, 1.1, gamma, 0.0);
        let s = simulate_offdiag(&p, 0.4, -0.3, 30.0, &tight(3000)).unwrap();
        for w in s.energy(&p).windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
        }
    }
}

#[test]
fn underdamped_changes_sign_before_decay() {
    let p = BlockadeParams::new(1, 1, 1.0, 1.0, 0.0);
    let s = simulate_offdiag(&p, 0.5, 0.0, 80.0, &tight(8000)).unwrap();
    let first = sign_changes(&s.times, &s.y, 0.5e-6)[0];
    let settled = s
        .times
        .iter()
        .zip(&s.y)
        .rev()
        .find(|(_, y)| y.abs() >= 0.5e-3)
        .map(|(t, _)| *t)
        .unwrap();
    assert!(first < settled);
}

#[test]
fn overdamped_never_changes_sign() {
    let p = BlockadeParams::new(1, 1, 1.0, 5.0, 0.0);
    let s = simulate_offdiag(&p, 0.5, 0.0, 100.0, &tight(5000)).unwrap();
    assert!(sign_changes(&s.times, &s.y, 0.5e-6).is_empty());
    assert!(s.y.iter().all(|&y| y >= -1e-12));
}

#[test]
fn coupled_pair_reduces_to_oscillator() {
    for (g, gamma) in [(1.0, 0.5), (0.4, 3.0)] {
        let p = BlockadeParams::new(2, 1, g, gamma, 0.0);
        let re0 = 0.1;
        let v0 = -p.omega() * re0;
        let a = simulate_coupled(&p, 0.3, re0, Closure::default(), 12.0, &tight(600)).unwrap();
        let b = simulate_offdiag(&p, 0.3, v0, 12.0, &tight(600)).unwrap();
        for (x, y) in a.im_rho_cf.iter().zip(&b.y) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-8);
        }
    }
}

#[test]
fn coupled_pair_without_couplings_is_constant() {
    let p = BlockadeParams::new(1, 1, 0.0, 0.0, 0.0);
    let closure = Closure {
        population_difference: 0.4,
        im_rho_lc: 0.2,
    };
    let s = simulate_coupled(&p, 0.3, -0.1, closure, 5.0, &tight(50)).unwrap();
    assert!(s.im_rho_cf.iter().all(|&v| v == 0.3));
    assert!(s.re_rho_lf.iter().all(|&v| v == -0.1));
}

#[test]
fn lossy_coherence_decays_exponentially() {
    let p = BlockadeParams::new(1, 1, 0.0, 6.0, 0.0);
    let s = simulate_coupled(&p, 0.2, 0.5, Closure::default(), 3.0, &tight(100)).unwrap();
    for (t, r) in s.times.iter().zip(&s.re_rho_lf) {
        assert_abs_diff_eq!(*r, 0.5 * (-3.0 * t).exp(), epsilon = 1e-10);
    }
}

#[test]
fn oracle_matches_reduced_equation_without_linear_coupling() {
    for (g, gamma) in [(1.0, 0.0), (1.0, 1.5), (0.5, 6.0)] {
        let p = BlockadeParams::new(1, 1, g, gamma, 0.0);
        let oracle = simulate_master_oracle(&p, 2, 10.0, 201).unwrap();
        let reduced = simulate_offdiag(&p, 0.5, 0.0, 10.0, &tight(201)).unwrap();
        for (a, b) in oracle.im_rho_cf.iter().zip(&reduced.y) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }
}

#[test]
fn oracle_preserves_trace_and_hermiticity() {
    let p = BlockadeParams::new(1, 1, 1.3, 0.7, 0.4);
    let s = simulate_master_oracle(&p, 2, 20.0, 400).unwrap();
    for (tr, h) in s.trace.iter().zip(&s.hermiticity_error) {
        assert_abs_diff_eq!(*tr, 1.0, epsilon = 1e-8);
        assert!(*h <= 1e-8);
    }
    assert_eq!(s.boundary_population, 0.0);
}

#[test]
fn oracle_examples() {
    // weak linear coupling and no loss: the coherence keeps oscillating
    let s =
        simulate_master_oracle(&BlockadeParams::new(1, 1, 1.0, 0.0, 0.01), 2, 30.0, 600).unwrap();
    let late = s.im_rho_cf[450..]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(late > 0.45);
    assert!(sign_changes(&s.times, &s.im_rho_cf, 0.5e-6).len() >= 5);

    let p = BlockadeParams::new(1, 1, 1.0, 10.0, 0.0);
    let s = simulate_master_oracle(&p, 2, horizon(&p), 2000).unwrap();
    assert_eq!(
        observed_regime(&s.times, &s.im_rho_cf, 0.5),
        Regime::Overdamped
    );

    let p = BlockadeParams::new(1, 1, 2.0, 1.0, 0.0);
    let s = simulate_master_oracle(&p, 2, horizon(&p), 2000).unwrap();
    assert_eq!(
        observed_regime(&s.times, &s.im_rho_cf, 0.5),
        Regime::Underdamped
    );
}

#[test]
fn regime_grid_agrees_with_dynamics() {
    let mut checked = 0;
    for g in [0.2, 0.5, 1.0, 2.0, 5.0] {
        for gamma in [0.1, 0.5, 2.0, 8.0, 30.0] {
            let p = BlockadeParams::new(1, 1, g, gamma, 0.0);
            if critical_margin(&p) <= 0.2 {
                continue;
            }
            let label = classify_regime(&p);
            let t_max = horizon(&p);
            let s = simulate_offdiag(&p, 0.5, 0.0, t_max, &tight(4000)).unwrap();
            assert_eq!(
                observed_regime(&s.times, &s.y, 0.5),
                label,
                "G = {g}, γ = {gamma}"
            );
            let o = simulate_master_oracle(&p, 2, t_max, 4000).unwrap();
            assert_eq!(
                observed_regime(&o.times, &o.im_rho_cf, 0.5),
                label,
                "oracle G = {g}, γ = {gamma}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 20);
}
