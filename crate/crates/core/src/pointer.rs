// SPDX-License-Identifier: Apache-2.0

//! Von Neumann pointer measurement with an ancilla qubit.
//!
//! The system is held in the instantaneous eigenbasis `{|g⟩, |e⟩}` at one
//! schedule value. Pointer states are exact positions, so two branches
//! interfere only when they share a position and a classical record.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::model::{eigenpair, gap};
use crate::state::{SystemState, C64};

/// Branches whose weight falls below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    fn index(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub level: Level,
    pub x: f64,
    pub a0: C64,
    pub a1: C64,
    pub amplitude: C64,
    /// Ancilla outcomes that were kept, oldest first.
    pub record: Vec<u8>,
}

impl Branch {
    pub fn weight(&self) -> f64 {
        self.amplitude.norm_sqr() * (self.a0.norm_sqr() + self.a1.norm_sqr())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BranchState {
    pub branches: Vec<Branch>,
    pub destroyed: f64,
}

impl BranchState {
    /// `c_g|g⟩ + c_e|e⟩` with the pointer at 0 and the ancilla in `|0⟩`.
    pub fn from_eigen_amplitudes(c_g: C64, c_e: C64) -> Self {
        let branches = [(Level::Ground, c_g), (Level::Excited, c_e)]
            .into_iter()
            .map(|(level, amplitude)| Branch {
                level,
                x: 0.0,
                a0: ONE,
                a1: ZERO,
                amplitude,
                record: Vec::new(),
            })
            .collect();
        let mut bs = Self {
            branches,
            destroyed: 0.0,
        };
        bs.prune();
        bs
    }

    /// Pure computational-basis state expanded in the eigenbasis at `γ`.
    pub fn from_pure(psi: &Vector2<C64>, gamma: f64) -> Self {
        let pair = eigenpair(gamma);
        let g = pair.ground.map(C64::from);
        let e = pair.excited.map(C64::from);
        Self::from_eigen_amplitudes(g.dot(psi), e.dot(psi))
    }

    /// Branch weights plus the destroyed accumulator.
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(Branch::weight).sum::<f64>() + self.destroyed
    }

    /// True when every branch sits at `x = 0` with its ancilla in `|0⟩`.
    pub fn is_reset(&self, tol: f64) -> bool {
        self.branches
            .iter()
            .all(|b| b.x.abs() <= tol && b.a1.norm() <= tol && (b.a0 - ONE).norm() <= tol)
    }

    /// Reduced system density matrix in the eigenbasis, traced over the
    /// pointer, the ancilla and the classical record.
    pub fn reduced_eigen_block(&self) -> Matrix2<C64> {
        let mut rho = Matrix2::zeros();
        for b in &self.branches {
            for c in &self.branches {
                if b.x != c.x || b.record != c.record {
                    continue;
                }
                let overlap = b.a0 * c.a0.conj() + b.a1 * c.a1.conj();
                rho[(b.level.index(), c.level.index())] +=
                    b.amplitude * c.amplitude.conj() * overlap;
            }
        }
        rho
    }

    /// Reduced state in the computational basis, with the destroyed weight
    /// on `|d⟩`.
    pub fn reduced_state(&self, gamma: f64) -> SystemState {
        let basis = eigenpair(gamma).basis().map(C64::from);
        let block = basis * self.reduced_eigen_block() * basis.adjoint();
        SystemState::from_parts(block, self.destroyed)
    }

    fn prune(&mut self) {
        self.branches.retain(|b| b.weight() >= PRUNE_THRESHOLD);
    }
}

/// Displacement magnitude `t_scale·√(γ² + 1)`.
pub fn x_mag(t_scale: f64, gamma: f64) -> f64 {
    t_scale * gap(gamma)
}

/// Displacement for a raw-units run of duration `t_scale/g_min` with gap
/// `g_min·√(γ² + 1)`.
pub fn raw_x_mag(t_scale: f64, gamma: f64, g_min: f64) -> f64 {
    (t_scale / g_min) * (g_min * gap(gamma))
}

/// Checks that a pointer of resolution `dx` can separate the two branches.
pub fn check_resolution(x_mag: f64, dx: f64) -> Result<()> {
    if x_mag >= dx {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "displacement {x_mag} is below pointer resolution {dx}"
        )))
    }
}

/// Angle per step seen by the reduced channels: `2·t_rot·t_scale·√(γ² + 1)`.
pub fn effective_phi(gamma: f64, t_scale: f64, t_rot: f64) -> f64 {
    2.0 * t_rot * x_mag(t_scale, gamma)
}

/// Shifts ground branches by `+x_mag` and excited branches by `−x_mag`.
pub fn apply_u_meas(bs: &BranchState, t_scale: f64, gamma: f64, dir: Direction) -> BranchState {
    let shift = x_mag(t_scale, gamma);
    let sign = match dir {
        Direction::Forward => 1.0,
        Direction::Inverse => -1.0,
    };
    let mut out = bs.clone();
    for b in &mut out.branches {
        let s = match b.level {
            Level::Ground => shift,
            Level::Excited => -shift,
        };
        b.x += sign * s;
    }
    out
}

/// Rotates each ancilla by `exp(−iθX)` with `θ = t_rot·(x_mag − x)`.
pub fn apply_u_rot(bs: &BranchState, t_rot: f64, x_mag: f64) -> BranchState {
    let mut out = bs.clone();
    for b in &mut out.branches {
        let (s, c) = (t_rot * (x_mag - b.x)).sin_cos();
        let mis = C64::new(0.0, -s);
        let (a0, a1) = (b.a0, b.a1);
        b.a0 = a0 * c + a1 * mis;
        b.a1 = a0 * mis + a1 * c;
    }
    out
}

/// Measures the ancilla, discarding `|1⟩` outcomes into the destroyed
/// accumulator and resetting survivors to `|0⟩`.
pub fn project_and_abort(bs: &BranchState) -> BranchState {
    let mut out = bs.clone();
    for b in &mut out.branches {
        out.destroyed += b.amplitude.norm_sqr() * b.a1.norm_sqr();
        b.amplitude *= b.a0;
        b.a0 = ONE;
        b.a1 = ZERO;
    }
    out.prune();
    out
}

/// Measures the ancilla and resets it, keeping both outcomes as separate
/// records (the operation pair `{Π₀, XΠ₁}`).
fn project_and_reset(bs: &BranchState) -> BranchState {
    let mut out = BranchState {
        branches: Vec::with_capacity(2 * bs.branches.len()),
        destroyed: bs.destroyed,
    };
    for b in &bs.branches {
        for (outcome, a) in [(0u8, b.a0), (1u8, b.a1)] {
            let mut record = b.record.clone();
            record.push(outcome);
            out.branches.push(Branch {
                level: b.level,
                x: b.x,
                a0: ONE,
                a1: ZERO,
                amplitude: b.amplitude * a,
                record,
            });
        }
    }
    out.prune();
    out
}

fn require_reset(bs: &BranchState) -> Result<()> {
    if bs.is_reset(0.0) {
        Ok(())
    } else {
        Err(Error::Precondition(
            "pointers must be at x = 0 with ancillas in |0⟩".into(),
        ))
    }
}

/// `U†_meas Π₀ U_rot U_meas`.
pub fn dissipation_step(
    bs: &BranchState,
    gamma: f64,
    t_scale: f64,
    t_rot: f64,
) -> Result<BranchState> {
    require_reset(bs)?;
    let shifted = apply_u_meas(bs, t_scale, gamma, Direction::Forward);
    let rotated = apply_u_rot(&shifted, t_rot, x_mag(t_scale, gamma));
    let kept = project_and_abort(&rotated);
    Ok(apply_u_meas(&kept, t_scale, gamma, Direction::Inverse))
}

/// As [`dissipation_step`], but the `|1⟩` outcome is reset and kept.
pub fn decoherence_alt_step(
    bs: &BranchState,
    gamma: f64,
    t_scale: f64,
    t_rot: f64,
) -> Result<BranchState> {
    require_reset(bs)?;
    let shifted = apply_u_meas(bs, t_scale, gamma, Direction::Forward);
    let rotated = apply_u_rot(&shifted, t_rot, x_mag(t_scale, gamma));
    let kept = project_and_reset(&rotated);
    Ok(apply_u_meas(&kept, t_scale, gamma, Direction::Inverse))
}

/// Kraus operators of a step, in the computational basis, read off by
/// running it on `|g⟩` and `|e⟩`.
fn extract_kraus<F>(gamma: f64, step: F) -> Result<Vec<Matrix2<C64>>>
where
    F: Fn(&BranchState) -> Result<BranchState>,
{
    let mut by_record: Vec<(Vec<u8>, Matrix2<C64>)> = Vec::new();
    for (col, (c_g, c_e)) in [(ONE, ZERO), (ZERO, ONE)].into_iter().enumerate() {
        let out = step(&BranchState::from_eigen_amplitudes(c_g, c_e))?;
        if !out.is_reset(1e-12) {
            return Err(Error::Precondition(
                "step left the pointer or ancilla entangled".into(),
            ));
        }
        for b in out.branches {
            let k = match by_record.iter_mut().find(|(r, _)| *r == b.record) {
                Some((_, k)) => k,
                None => {
                    by_record.push((b.record.clone(), Matrix2::zeros()));
                    &mut by_record.last_mut().expect("just pushed").1
                }
            };
            k[(b.level.index(), col)] += b.amplitude;
        }
    }
    let basis = eigenpair(gamma).basis().map(C64::from);
    Ok(by_record
        .into_iter()
        .map(|(_, k)| basis * k * basis.adjoint())
        .collect())
}

/// Reduced channel of [`dissipation_step`] applied to a system state.
pub fn dissipation_channel(
    state: &SystemState,
    gamma: f64,
    t_scale: f64,
    t_rot: f64,
) -> Result<SystemState> {
    let kraus = extract_kraus(gamma, |bs| dissipation_step(bs, gamma, t_scale, t_rot))?;
    Ok(state.apply_kraus_with_loss(&kraus))
}

/// Reduced channel of [`decoherence_alt_step`] applied to a system state.
pub fn decoherence_alt_channel(
    state: &SystemState,
    gamma: f64,
    t_scale: f64,
    t_rot: f64,
) -> Result<SystemState> {
    let kraus = extract_kraus(gamma, |bs| decoherence_alt_step(bs, gamma, t_scale, t_rot))?;
    Ok(state.apply_kraus_with_loss(&kraus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn single(level: Level) -> BranchState {
        match level {
            Level::Ground => BranchState::from_eigen_amplitudes(ONE, ZERO),
            Level::Excited => BranchState::from_eigen_amplitudes(ZERO, ONE),
        }
    }

    fn crossing() -> BranchState {
        let h = C64::from(0.5f64.sqrt());
        BranchState::from_eigen_amplitudes(h, h)
    }

    #[test]
    fn meas_shifts_by_gap() {
        let bs = apply_u_meas(&crossing(), 2.0, 0.0, Direction::Forward);
        let xs: Vec<_> = bs.branches.iter().map(|b| (b.level, b.x)).collect();
        assert_eq!(xs, vec![(Level::Ground, 2.0), (Level::Excited, -2.0)]);
        let back = apply_u_meas(&bs, 2.0, 0.0, Direction::Inverse);
        assert_eq!(back, crossing());
        assert_eq!(
            apply_u_meas(&crossing(), 0.0, 0.7, Direction::Forward),
            crossing()
        );
    }

    #[test]
    fn rotation_matches_closed_form() {
        let (t_scale, gamma) = (1.5, 0.4);
        let xm = x_mag(t_scale, gamma);
        let t_rot = PI / 4.0 / xm;
        let bs = apply_u_meas(&crossing(), t_scale, gamma, Direction::Forward);
        let bs = apply_u_rot(&bs, t_rot, xm);
        let g = &bs.branches[0];
        assert_abs_diff_eq!(g.a0.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.a1.norm(), 0.0, epsilon = 1e-15);
        let e = &bs.branches[1];
        assert_abs_diff_eq!(e.a0.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.a1.im, -1.0, epsilon = 1e-15);

        let bs = apply_u_rot(
            &apply_u_meas(&single(Level::Excited), t_scale, gamma, Direction::Forward),
            PI / 8.0 / xm,
            xm,
        );
        assert_abs_diff_eq!(bs.branches[0].a1.norm_sqr(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn abort_moves_product_weight() {
        let mut bs = BranchState::from_eigen_amplitudes(ZERO, C64::from(0.4f64.sqrt()));
        bs.branches[0].a0 = C64::from(0.7f64.sqrt());
        bs.branches[0].a1 = C64::new(0.0, 0.3f64.sqrt());
        let out = project_and_abort(&bs);
        assert_abs_diff_eq!(out.destroyed, 0.12, epsilon = 1e-15);
        assert_eq!(project_and_abort(&out), out);
        let clean = crossing();
        assert_eq!(project_and_abort(&clean), clean);
    }

    #[test]
    fn ground_is_untouched() {
        let out = dissipation_step(&single(Level::Ground), 0.3, 2.0, 0.2).unwrap();
        assert_eq!(out.destroyed, 0.0);
        assert_eq!(out, single(Level::Ground));
    }

    #[test]
    fn half_destroyed_at_quarter_turn() {
        let t_scale = 1.0;
        let t_rot = PI / 4.0 / x_mag(t_scale, 0.0);
        let out = dissipation_step(&crossing(), 0.0, t_scale, t_rot).unwrap();
        assert_abs_diff_eq!(out.destroyed, 0.5, epsilon = 1e-15);
        assert!(out.is_reset(0.0));
        assert_abs_diff_eq!(out.total_probability(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn precondition_enforced() {
        let bs = apply_u_meas(&crossing(), 1.0, 0.0, Direction::Forward);
        assert!(matches!(
            dissipation_step(&bs, 0.0, 1.0, 0.1),
            Err(Error::Precondition(_))
        ));
        assert!(decoherence_alt_step(&bs, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn alt_step_zero_rotation_is_identity() {
        let psi = Vector2::new(C64::new(0.6, 0.1), C64::new(-0.2, 0.768));
        let s = SystemState::pure(psi);
        let out = decoherence_alt_channel(&s, -1.3, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!((out.block() - s.block()).camax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn x_mag_is_scale_free() {
        for g_min in [1e-1, 1e-3, 1e-6] {
            assert_abs_diff_eq!(raw_x_mag(2.0, 0.5, g_min), x_mag(2.0, 0.5), epsilon = 1e-12);
        }
        assert!(check_resolution(x_mag(1.0, 0.0), 0.5).is_ok());
        assert!(check_resolution(x_mag(0.1, 0.0), 0.5).is_err());
    }
}
