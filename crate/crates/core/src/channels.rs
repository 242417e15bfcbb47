// SPDX-License-Identifier: Apache-2.0

//! Discrete channels acting in the instantaneous eigenbasis.
//!
//! Every channel is parameterised by the schedule value `γ` at which it is
//! applied and, for the partial variants, by a rotation angle `φ`. With the
//! fixed-angle convention the angle relates to a physical duration `t` by
//! `φ = g(τ)·t` for phase spreading and `φ = g(τ)·t/2` for destruction.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{eigenpair, gap};
use crate::state::{SystemState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PhaseRotation,
    Decoherence,
    Destruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifestation {
    FullDiscrete,
    PartialDiscrete,
}

/// One discrete channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub family: Family,
    pub manifestation: Manifestation,
    /// Rotation angle, read only by partial channels.
    #[serde(default)]
    pub phi: f64,
    /// Ancilla rotation time of the pointer realisation of destruction.
    #[serde(default)]
    pub t_rot: Option<f64>,
}

impl ChannelSpec {
    pub fn full(family: Family) -> Self {
        Self {
            family,
            manifestation: Manifestation::FullDiscrete,
            phi: 0.0,
            t_rot: None,
        }
    }

    pub fn partial(family: Family, phi: f64) -> Self {
        Self {
            family,
            manifestation: Manifestation::PartialDiscrete,
            phi,
            t_rot: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..2.0 * PI).contains(&self.phi) {
            return Err(domain("phi", self.phi, "[0, 2π)"));
        }
        if let Some(t_rot) = self.t_rot {
            if !(t_rot >= 0.0 && t_rot.is_finite()) {
                return Err(domain("t_rot", t_rot, "[0, ∞)"));
            }
        }
        Ok(())
    }

    /// Angle actually used: full manifestations ignore `phi`.
    pub fn effective_phi(&self) -> f64 {
        match self.manifestation {
            Manifestation::PartialDiscrete => self.phi,
            Manifestation::FullDiscrete => match self.family {
                Family::PhaseRotation => PI,
                Family::Decoherence | Family::Destruction => PI / 2.0,
            },
        }
    }

    pub fn apply(&self, state: &SystemState, gamma: f64) -> SystemState {
        let phi = self.effective_phi();
        match (self.family, self.manifestation) {
            (Family::PhaseRotation, _) => phase_rotation(state, gamma, phi),
            (Family::Decoherence, Manifestation::FullDiscrete) => {
                projective_measurement(state, gamma)
            }
            (Family::Decoherence, Manifestation::PartialDiscrete) => {
                partial_dephasing(state, gamma, phi)
            }
            (Family::Destruction, Manifestation::FullDiscrete) => {
                destructive_measurement(state, gamma)
            }
            (Family::Destruction, Manifestation::PartialDiscrete) => {
                partial_destruction(state, gamma, phi)
            }
        }
    }
}

/// `Π_g` and `Π_e` at `γ`, as complex matrices.
pub fn eigenprojectors(gamma: f64) -> (Matrix2<C64>, Matrix2<C64>) {
    let pair = eigenpair(gamma);
    let g = pair.ground.map(C64::from);
    let e = pair.excited.map(C64::from);
    (g * g.transpose(), e * e.transpose())
}

/// `a Π_g + b Π_e` at `γ`.
fn eigen_diagonal(gamma: f64, a: C64, b: C64) -> Matrix2<C64> {
    let (pg, pe) = eigenprojectors(gamma);
    pg * a + pe * b
}

/// Unitary `|g⟩⟨g| + e^{iφ}|e⟩⟨e|`.
pub fn phase_rotation(state: &SystemState, gamma: f64, phi: f64) -> SystemState {
    let u = eigen_diagonal(gamma, C64::from(1.0), C64::from_polar(1.0, phi));
    state.conjugate(&u)
}

/// `exp(−i(t/2)(γZ − X))`.
pub fn walk_unitary(gamma: f64, t: f64) -> Matrix2<C64> {
    let s = gap(gamma);
    let (sin, cos) = (0.5 * s * t).sin_cos();
    let c = C64::from(cos);
    let k = C64::new(0.0, -sin / s);
    // (γZ − X)/s has entries [[γ, −1], [−1, −γ]]/s
    Matrix2::new(c + k * gamma, -k, -k, c - k * gamma)
}

/// Continuous-time walk for scaled time `t` at fixed `γ`.
pub fn walk_step(state: &SystemState, gamma: f64, t: f64) -> SystemState {
    state.conjugate(&walk_unitary(gamma, t))
}

/// `Π_g ρ Π_g + Π_e ρ Π_e`.
pub fn projective_measurement(state: &SystemState, gamma: f64) -> SystemState {
    let (pg, pe) = eigenprojectors(gamma);
    let b = state.block();
    state.with_block(pg * b * pg + pe * b * pe)
}

/// Multiplies eigenbasis coherences by `cos φ`.
pub fn partial_dephasing(state: &SystemState, gamma: f64, phi: f64) -> SystemState {
    let (pg, pe) = eigenprojectors(gamma);
    let b = state.block();
    let diag = pg * b * pg + pe * b * pe;
    let coh = pg * b * pe + pe * b * pg;
    state.with_block(diag + coh * C64::from(phi.cos()))
}

/// `Π_g ρ Π_g + |d⟩⟨e|ρ|e⟩⟨d|`, keeping any existing `|d⟩` population.
pub fn destructive_measurement(state: &SystemState, gamma: f64) -> SystemState {
    let (pg, _) = eigenprojectors(gamma);
    state.apply_kraus_with_loss(&[pg])
}

/// Kraus pair `{Π_g + cos φ Π_e, sin φ |d⟩⟨e|}`: a fraction `sin² φ` of the
/// excited population is moved to `|d⟩`.
pub fn partial_destruction(state: &SystemState, gamma: f64, phi: f64) -> SystemState {
    let k = eigen_diagonal(gamma, C64::from(1.0), C64::from(phi.cos()));
    state.apply_kraus_with_loss(&[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eigenpair;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector2;
    use proptest::prelude::*;

    fn complexify(v: Vector2<f64>) -> Vector2<C64> {
        v.map(C64::from)
    }

    fn omega() -> SystemState {
        SystemState::omega_tilde()
    }

    fn close(a: &SystemState, b: &SystemState, tol: f64) -> bool {
        (a.matrix() - b.matrix()).camax() <= tol
    }

    fn arb_state() -> impl Strategy<Value = SystemState> {
        (0.0f64..1.0, 0.0f64..PI, 0.0f64..2.0 * PI, 0.0f64..0.5).prop_map(|(r, theta, ph, dd)| {
            // mixture of a pure state and the identity, with some |d⟩ weight
            let psi = Vector2::new(
                C64::from((0.5 * theta).cos()),
                C64::from_polar((0.5 * theta).sin(), ph),
            );
            let pure = psi * psi.adjoint();
            let block = (pure * C64::from(r) + Matrix2::identity() * C64::from(0.5 * (1.0 - r)))
                * C64::from(1.0 - dd);
            SystemState::from_parts(block, dd)
        })
    }

    /// Eigenbasis components `(ρ_gg, ρ_ee, ρ_ge)`.
    fn eigen_components(s: &SystemState, gamma: f64) -> (f64, f64, C64) {
        let p = eigenpair(gamma);
        let g = complexify(p.ground);
        let e = complexify(p.excited);
        let b = s.block();
        (
            (g.adjoint() * b * g)[0].re,
            (e.adjoint() * b * e)[0].re,
            (g.adjoint() * b * e)[0],
        )
    }

    #[test]
    fn phase_flip_at_crossing_finds_marked() {
        let s = phase_rotation(&omega(), 0.0, PI);
        assert_abs_diff_eq!(s.marked_probability(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn phase_rotation_identity_cases() {
        let s = SystemState::pure(Vector2::new(C64::new(0.3, 0.2), C64::new(0.1, -0.9)));
        assert!(close(&phase_rotation(&s, 0.7, 0.0), &s, 1e-15));
        let eps = 1e-9;
        assert!(close(
            &phase_rotation(&s, 0.7, 2.0 * PI - eps),
            &s,
            10.0 * eps
        ));
    }

    #[test]
    fn walk_examples() {
        let s = walk_step(&omega(), 0.0, PI);
        assert_abs_diff_eq!(s.marked_probability(), 1.0, epsilon = 1e-12);
        let s = walk_step(&omega(), 0.0, PI / 2.0);
        assert_abs_diff_eq!(s.marked_probability(), 0.5, epsilon = 1e-12);
        assert!(close(&walk_step(&omega(), 3.0, 0.0), &omega(), 0.0));
    }

    /// Rabi formula `P = sin²(gap·t/2)/gap²` for `|ω̃⟩ → |m⟩` off resonance.
    #[test]
    fn walk_matches_rabi_formula() {
        for &(gamma, t) in &[(0.5, 1.3), (-2.0, 0.4), (7.0, 3.0)] {
            let s = gap(gamma);
            let expect = ((0.5 * s * t).sin() / s).powi(2);
            let got = walk_step(&omega(), gamma, t).marked_probability();
            assert_abs_diff_eq!(got, expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn measurement_examples() {
        let s = projective_measurement(&omega(), 0.0);
        assert_abs_diff_eq!(s.marked_probability(), 0.5, epsilon = 1e-12);
        let g = SystemState::pure_real(eigenpair(1.7).ground);
        assert!(close(&projective_measurement(&g, 1.7), &g, 1e-15));
        let twice = projective_measurement(&s, 0.0);
        assert!(close(&twice, &s, 1e-12));
    }

    #[test]
    fn partial_dephasing_examples() {
        let s = SystemState::pure(Vector2::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)));
        let gamma = -0.4;
        assert!(close(
            &partial_dephasing(&s, gamma, PI / 2.0),
            &projective_measurement(&s, gamma),
            1e-12
        ));
        assert!(close(&partial_dephasing(&s, gamma, 0.0), &s, 1e-15));
        let (_, _, before) = eigen_components(&s, gamma);
        let (_, _, after) = eigen_components(&partial_dephasing(&s, gamma, PI / 3.0), gamma);
        assert_abs_diff_eq!((after - before * 0.5).norm(), 0.0, epsilon = 1e-12);
    }

    /// Two-branch average `½U(t)ρU(t)† + ½U(−t)ρU(−t)†` with `t = φ/g`.
    #[test]
    fn partial_dephasing_matches_two_branch_average() {
        let s = SystemState::pure(Vector2::new(C64::new(0.2, 0.5), C64::new(0.8, -0.2)));
        for &(gamma, phi) in &[(0.0, 0.3), (2.5, 1.1), (-4.0, PI / 2.0)] {
            let t = phi / gap(gamma);
            let plus = walk_step(&s, gamma, t);
            let minus = walk_step(&s, gamma, -t);
            let avg = (plus.block() + minus.block()) * C64::from(0.5);
            let direct = partial_dephasing(&s, gamma, phi);
            assert!((avg - direct.block()).camax() <= 1e-12);
        }
    }

    #[test]
    fn destructive_examples() {
        let first = destructive_measurement(&omega(), 0.0);
        assert_abs_diff_eq!(first.destroyed_probability(), 0.5, epsilon = 1e-12);
        let g0 = SystemState::pure_real(eigenpair(0.0).ground);
        let conditional = first.block() * C64::from(2.0);
        assert!((conditional - g0.block()).camax() <= 1e-12);
        let second = destructive_measurement(&first, -1e8);
        assert_abs_diff_eq!(second.marked_probability(), 0.25, epsilon = 1e-6);

        let g = SystemState::pure_real(eigenpair(-0.3).ground);
        assert!(close(&destructive_measurement(&g, -0.3), &g, 1e-15));

        let s = destructive_measurement(&destructive_measurement(&omega(), 1e8), -1e8);
        assert_abs_diff_eq!(s.destroyed_probability(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn partial_destruction_examples() {
        let s = SystemState::pure(Vector2::new(C64::new(0.3, 0.4), C64::new(0.0, 0.866)));
        assert!(close(
            &partial_destruction(&s, 0.9, PI / 2.0),
            &destructive_measurement(&s, 0.9),
            1e-12
        ));
        assert!(close(&partial_destruction(&s, 0.9, 0.0), &s, 1e-15));
        let d = partial_destruction(&omega(), 0.0, PI / 4.0);
        assert_abs_diff_eq!(d.destroyed_probability(), 0.25, epsilon = 1e-12);
    }

    /// Population form `ρ_gg` fixed, `ρ_ee → cos² φ ρ_ee`, coherence `cos φ`.
    #[test]
    fn partial_destruction_eigenbasis_components() {
        let s = SystemState::pure(Vector2::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)));
        let (gamma, phi) = (1.3, 0.7);
        let (gg, ee, ge) = eigen_components(&s, gamma);
        let out = partial_destruction(&s, gamma, phi);
        let (gg2, ee2, ge2) = eigen_components(&out, gamma);
        assert_abs_diff_eq!(gg2, gg, epsilon = 1e-14);
        assert_abs_diff_eq!(ee2, ee * phi.cos().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!((ge2 - ge * phi.cos()).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            out.destroyed_probability(),
            ee * phi.sin().powi(2),
            epsilon = 1e-14
        );
    }

    #[test]
    fn spec_full_manifestations_ignore_phi() {
        let mut spec = ChannelSpec::full(Family::Decoherence);
        spec.phi = 1.0;
        let s = spec.apply(&omega(), 0.0);
        assert!(close(&s, &projective_measurement(&omega(), 0.0), 0.0));
        let flip = ChannelSpec::full(Family::PhaseRotation).apply(&omega(), 0.0);
        assert_abs_diff_eq!(flip.marked_probability(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(ChannelSpec::partial(Family::Decoherence, 7.0)
            .validate()
            .is_err());
        assert!(ChannelSpec::partial(Family::Decoherence, -0.1)
            .validate()
            .is_err());
        assert!(ChannelSpec::partial(Family::Decoherence, 1.0)
            .validate()
            .is_ok());
    }

    proptest! {
        #[test]
        fn channels_preserve_validity(s in arb_state(), gamma in -50.0f64..50.0, phi in 0.0f64..PI / 2.0) {
            let outputs = [
                phase_rotation(&s, gamma, phi),
                walk_step(&s, gamma, phi),
                projective_measurement(&s, gamma),
                partial_dephasing(&s, gamma, phi),
                destructive_measurement(&s, gamma),
                partial_destruction(&s, gamma, phi),
            ];
            for out in &outputs {
                prop_assert!(out.validate(1e-12).is_ok());
            }
            let p = s.purity();
            prop_assert!((outputs[0].purity() - p).abs() <= 1e-12);
            prop_assert!((outputs[1].purity() - p).abs() <= 1e-12);
            for out in &outputs[2..4] {
                prop_assert!(out.purity() <= p + 1e-12);
            }
            // moving weight onto an already populated |d⟩ can raise Tr ρ²
            let fresh = s.with_block(s.block() / C64::from(s.block().trace().re));
            let fresh = SystemState::from_parts(*fresh.block(), 0.0);
            let p = fresh.purity();
            prop_assert!(destructive_measurement(&fresh, gamma).purity() <= p + 1e-12);
            prop_assert!(partial_destruction(&fresh, gamma, phi).purity() <= p + 1e-12);
        }

        #[test]
        fn repeated_dephasing_compounds(s in arb_state(), gamma in -5.0f64..5.0, phi in 0.0f64..1.5, n in 1usize..20) {
            let (_, _, ge) = eigen_components(&s, gamma);
            let mut out = s;
            for _ in 0..n {
                out = partial_dephasing(&out, gamma, phi);
            }
            let (_, _, ge_n) = eigen_components(&out, gamma);
            prop_assert!((ge_n - ge * phi.cos().powi(n as i32)).norm() <= 1e-10);
        }
    }
}
