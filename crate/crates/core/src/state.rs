// SPDX-License-Identifier: Apache-2.0

//! Density matrices over `{|m⟩, |ω̃⟩, |d⟩}`.
//!
//! The destroyed state `|d⟩` never acquires coherences with the two-level
//! sector, so it is stored as a third diagonal entry and the matrix is kept
//! block diagonal by construction.

use nalgebra::{Matrix2, Matrix3, Vector2};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Basis index of the marked state.
pub const MARKED: usize = 0;
/// Basis index of `|ω̃⟩`.
pub const OMEGA: usize = 1;
/// Basis index of the destroyed state.
pub const DESTROYED: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    block: Matrix2<C64>,
    destroyed: f64,
}

impl SystemState {
    /// Builds a state from its two-level block and `⟨d|ρ|d⟩`.
    ///
    /// No validation is performed; see [`SystemState::validate`].
    pub fn from_parts(block: Matrix2<C64>, destroyed: f64) -> Self {
        Self { block, destroyed }
    }

    /// Validating constructor from a full 3×3 matrix.
    pub fn from_matrix(rho: Matrix3<C64>, tol: f64) -> Result<Self> {
        for i in 0..2 {
            if rho[(i, DESTROYED)] != ZERO || rho[(DESTROYED, i)] != ZERO {
                return Err(Error::InvalidParameter(
                    "coherences with |d⟩ must vanish".into(),
                ));
            }
        }
        let block = rho.fixed_view::<2, 2>(0, 0).into_owned();
        let state = Self::from_parts(block, rho[(DESTROYED, DESTROYED)].re);
        state.validate(tol)?;
        Ok(state)
    }

    pub fn pure(psi: Vector2<C64>) -> Self {
        let norm = psi.norm();
        let psi = psi / C64::from(norm);
        Self::from_parts(psi * psi.adjoint(), 0.0)
    }

    pub fn pure_real(psi: Vector2<f64>) -> Self {
        Self::pure(psi.map(C64::from))
    }

    /// `|m⟩⟨m|`
    pub fn marked() -> Self {
        Self::pure_real(Vector2::new(1.0, 0.0))
    }

    /// `|ω̃⟩⟨ω̃|`, the start state of every protocol.
    pub fn omega_tilde() -> Self {
        Self::pure_real(Vector2::new(0.0, 1.0))
    }

    /// `|d⟩⟨d|`
    pub fn destroyed() -> Self {
        Self::from_parts(Matrix2::zeros(), 1.0)
    }

    pub fn block(&self) -> &Matrix2<C64> {
        &self.block
    }

    /// `⟨d|ρ|d⟩`
    pub fn destroyed_population(&self) -> f64 {
        self.destroyed
    }

    pub fn matrix(&self) -> Matrix3<C64> {
        let mut rho = Matrix3::zeros();
        rho.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.block);
        rho[(DESTROYED, DESTROYED)] = C64::from(self.destroyed);
        rho
    }

    /// `⟨m|ρ|m⟩`
    pub fn marked_probability(&self) -> f64 {
        self.block[(MARKED, MARKED)].re
    }

    /// `⟨ω̃|ρ|ω̃⟩`
    pub fn omega_probability(&self) -> f64 {
        self.block[(OMEGA, OMEGA)].re
    }

    pub fn destroyed_probability(&self) -> f64 {
        self.destroyed
    }

    pub fn trace(&self) -> f64 {
        self.block.trace().re + self.destroyed
    }

    /// `Tr ρ²` over all three levels.
    pub fn purity(&self) -> f64 {
        block_purity(&self.block) + self.destroyed * self.destroyed
    }

    /// `Tr ρ²` of the two-level block renormalised to unit trace.
    pub fn two_level_purity(&self) -> f64 {
        let t = self.block.trace().re;
        block_purity(&self.block) / (t * t)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.block - self.block.adjoint()).camax()
    }

    /// Eigenvalues `(λ₋, λ₊)` of the Hermitian part of the two-level block.
    pub fn block_eigenvalues(&self) -> (f64, f64) {
        let a = self.block[(0, 0)].re;
        let d = self.block[(1, 1)].re;
        let b = 0.5 * (self.block[(0, 1)] + self.block[(1, 0)].conj());
        let mean = 0.5 * (a + d);
        let radius = (0.5 * (a - d)).hypot(b.norm());
        (mean - radius, mean + radius)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.block_eigenvalues().0.min(self.destroyed)
    }

    /// Hermitian, unit trace and positive semidefinite, all to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(domain("hermiticity error", herm, "[0, tol]"));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(domain("trace", tr, "1 ± tol"));
        }
        let lmin = self.min_eigenvalue();
        if lmin < -tol {
            return Err(domain("minimum eigenvalue", lmin, "[-tol, ∞)"));
        }
        Ok(())
    }

    /// `(ρ + ρ†)/2`, rescaled to unit trace.
    pub fn renormalized(&self) -> Self {
        let block = (self.block + self.block.adjoint()) * C64::from(0.5);
        let tr = block.trace().re + self.destroyed;
        Self::from_parts(block / C64::from(tr), self.destroyed / tr)
    }

    /// Maps the two-level block through `K ρ K†` for each Kraus operator,
    /// moving the lost weight to `|d⟩`.
    pub(crate) fn apply_kraus_with_loss(&self, kraus: &[Matrix2<C64>]) -> Self {
        let before = self.block.trace().re;
        let block = kraus.iter().fold(Matrix2::zeros(), |acc, k| {
            acc + k * self.block * k.adjoint()
        });
        let after = block.trace().re;
        Self::from_parts(block, self.destroyed + (before - after))
    }

    pub(crate) fn conjugate(&self, u: &Matrix2<C64>) -> Self {
        Self::from_parts(u * self.block * u.adjoint(), self.destroyed)
    }

    pub(crate) fn with_block(&self, block: Matrix2<C64>) -> Self {
        Self::from_parts(block, self.destroyed)
    }
}

impl Default for SystemState {
    fn default() -> Self {
        Self::omega_tilde()
    }
}

fn block_purity(block: &Matrix2<C64>) -> f64 {
    (block * block).trace().re
}

/// `½(1 − √(1 − 2(1 − Tr ρ²)))`, the smallest eigenvalue of a two-level
/// density matrix with the given purity and therefore a lower bound on
/// `⟨m|ρ|m⟩`.
pub fn purity_lower_bound(tr_rho_sq: f64) -> Result<f64> {
    // rounding can push a pure state a hair above 1
    const SLACK: f64 = 1e-12;
    if !(0.5..=1.0 + SLACK).contains(&tr_rho_sq) {
        return Err(domain("Tr ρ²", tr_rho_sq, "[1/2, 1]"));
    }
    let disc = (1.0 - 2.0 * (1.0 - tr_rho_sq)).clamp(0.0, 1.0);
    Ok(0.5 * (1.0 - disc.sqrt()))
}

/// `ρ = p_ψ|ψ⟩⟨ψ| + p_m|m⟩⟨m|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmDecomposition {
    pub p_m: f64,
    pub p_psi: f64,
    pub psi: Vector2<C64>,
}

impl PmDecomposition {
    pub fn reconstruct(&self) -> Matrix2<C64> {
        let m = Matrix2::new(ONE, ZERO, ZERO, ZERO);
        self.psi * self.psi.adjoint() * C64::from(self.p_psi) + m * C64::from(self.p_m)
    }
}

/// Splits a two-level density matrix into a pure component and a `|m⟩⟨m|`
/// admixture by solving
///
/// ```text
/// ⟨m|ρ|m⟩ = p_m + p_ψ|⟨ψ|m⟩|²
/// ⟨ω̃|ρ|m⟩ = p_ψ⟨ψ|m⟩⟨ω̃|ψ⟩
/// ⟨ω̃|ρ|ω̃⟩ = p_ψ|⟨ψ|ω̃⟩|²
/// ```
///
/// whose unique solution is `p_m = det ρ / ⟨ω̃|ρ|ω̃⟩`. This is never below
/// [`purity_lower_bound`], and coincides with it for pure and maximally
/// mixed states. At `⟨ω̃|ρ|ω̃⟩ = 0` the state is `|m⟩⟨m|` and the result is
/// `p_m = 1` with `ψ = |ω̃⟩`.
pub fn decompose_pm(state: &SystemState) -> Result<PmDecomposition> {
    const TOL: f64 = 1e-12;
    if state.destroyed_population().abs() > TOL {
        return Err(Error::InvalidParameter(
            "decomposition is defined for states confined to the two-level sector".into(),
        ));
    }
    let b = state.block();
    let rho_mm = b[(MARKED, MARKED)].re;
    let rho_ww = b[(OMEGA, OMEGA)].re;
    let rho_mw = b[(MARKED, OMEGA)];
    let omega = Vector2::new(ZERO, ONE);
    if rho_ww <= TOL {
        return Ok(PmDecomposition {
            p_m: rho_mm.clamp(0.0, 1.0),
            p_psi: 1.0 - rho_mm.clamp(0.0, 1.0),
            psi: omega,
        });
    }
    let p_psi = rho_ww + rho_mw.norm_sqr() / rho_ww;
    let p_m = 1.0 - p_psi;
    let psi_w = (rho_ww / p_psi).sqrt();
    let psi_m = rho_mw / C64::from(p_psi * psi_w);
    Ok(PmDecomposition {
        p_m,
        p_psi,
        psi: Vector2::new(psi_m, C64::from(psi_w)),
    })
}
