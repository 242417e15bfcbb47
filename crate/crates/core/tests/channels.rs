// SPDX-License-Identifier: Apache-2.0

mod common;

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use zeno_core::channels::{
    destructive_measurement, partial_dephasing, partial_destruction, phase_rotation,
    projective_measurement, walk_step, ChannelSpec, Family,
};
use zeno_core::model::eigenpair;
use zeno_core::state::SystemState;

fn lift(v: nalgebra::Vector2<f64>) -> Vector3<C64> {
    Vector3::new(C64::from(v[0]), C64::from(v[1]), C64::from(0.0))
}

/// `{Π_g + cos φ Π_e, sin φ |d⟩⟨e|}` as 3×3 Kraus operators on the full
/// matrix.
fn destruction_oracle(s: &SystemState, gamma: f64, phi: f64) -> Matrix3<C64> {
    let pair = eigenpair(gamma);
    let g = lift(pair.ground);
    let e = lift(pair.excited);
    let d = Vector3::new(C64::from(0.0), C64::from(0.0), C64::from(1.0));
    let mut k0 = g * g.adjoint() + e * e.adjoint() * C64::from(phi.cos());
    k0 += d * d.adjoint();
    let k1 = d * e.adjoint() * C64::from(phi.sin());
    let rho = s.matrix();
    k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint()
}

/// `½(U_φ ρ U_φ† + U_{−φ} ρ U_{−φ}†)` with `U_φ = e^{iφ/2}Π_g + e^{−iφ/2}Π_e`.
fn dephasing_oracle(s: &SystemState, gamma: f64, phi: f64) -> SystemState {
    let a = phase_rotation(s, gamma, phi);
    let b = phase_rotation(s, gamma, 2.0 * PI - phi);
    SystemState::from_parts(
        (a.block() + b.block()) * C64::from(0.5),
        s.destroyed_probability(),
    )
}

fn full_diff(a: &Matrix3<C64>, b: &Matrix3<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn destruction_matches_full_kraus(seed in any::<u64>(), gamma in -20.0f64..20.0, phi in 0.0f64..PI / 2.0) {
        let s = common::random_state(&mut common::rng(seed), 0.5);
        let got = partial_destruction(&s, gamma, phi).matrix();
        prop_assert!(full_diff(&got, &destruction_oracle(&s, gamma, phi)) <= 1e-12);
    }

    #[test]
    fn dephasing_matches_branch_average(seed in any::<u64>(), gamma in -20.0f64..20.0, phi in 0.0f64..PI / 2.0) {
        let s = common::random_state(&mut common::rng(seed), 0.0);
        let got = partial_dephasing(&s, gamma, phi);
        prop_assert!(common::state_diff(&got, &dephasing_oracle(&s, gamma, phi)) <= 1e-12);
    }

    #[test]
    fn every_channel_keeps_states_valid(
        seed in any::<u64>(),
        gamma in -1e3f64..1e3,
        phi in 0.0f64..(2.0 * PI - 1e-9),
        t in 0.0f64..10.0,
    ) {
        let s = common::random_state(&mut common::rng(seed), 0.4);
        let half = phi.min(PI / 2.0);
        let outs = [
            phase_rotation(&s, gamma, phi),
            walk_step(&s, gamma, t),
            projective_measurement(&s, gamma),
            partial_dephasing(&s, gamma, half),
            destructive_measurement(&s, gamma),
            partial_destruction(&s, gamma, half),
        ];
        for (i, o) in outs.iter().enumerate() {
            prop_assert!(o.validate(1e-10).is_ok(), "channel {i}");
        }
        prop_assert!((outs[0].purity() - s.purity()).abs() <= 1e-10);
        prop_assert!((outs[1].purity() - s.purity()).abs() <= 1e-10);
        prop_assert!(outs[2].purity() <= s.purity() + 1e-12);
        prop_assert!(outs[3].purity() <= s.purity() + 1e-12);
    }
}

#[test]
fn family_consistency() {
    let mut rng = common::rng(31);
    for _ in 0..200 {
        let s = common::random_state(&mut rng, 0.0);
        let gamma = rand::Rng::gen_range(&mut rng, -8.0..8.0);
        let a = partial_destruction(&s, gamma, PI / 2.0);
        assert!(common::state_diff(&a, &destructive_measurement(&s, gamma)) <= 1e-12);
        let b = partial_dephasing(&s, gamma, PI / 2.0);
        assert!(common::state_diff(&b, &projective_measurement(&s, gamma)) <= 1e-12);
        let spec = ChannelSpec::full(Family::Decoherence);
        assert_eq!(spec.apply(&s, gamma), projective_measurement(&s, gamma));
    }
    let flipped = phase_rotation(&SystemState::omega_tilde(), 0.0, PI);
    assert!((flipped.marked_probability() - 1.0).abs() <= 1e-12);
}

#[test]
fn dephasing_composes_as_cosine_power() {
    let mut rng = common::rng(32);
    let s = common::random_state(&mut rng, 0.0);
    let (gamma, phi) = (0.6, 0.4);
    let mut out = s;
    for n in 1..=12 {
        out = partial_dephasing(&out, gamma, phi);
        let direct = partial_dephasing(&s, gamma, phi.cos().powi(n).acos());
        assert!(common::state_diff(&out, &direct) <= 1e-10);
    }
}
