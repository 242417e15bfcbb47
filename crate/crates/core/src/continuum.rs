// SPDX-License-Identifier: Apache-2.0

//! Continuous-time manifestations integrated in τ with an explicit
//! `t_scale` factor.
//!
//! The integrator state is the Bloch form of the two-level block plus the
//! destroyed population, `[x, y, z, tr, ρ_dd]` with
//! `ρ_block = ½(tr·I + xX + yY + zZ)`, so Hermiticity holds by construction.

use std::cell::Cell;

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::channels::{partial_dephasing, partial_destruction, Family};
use crate::error::{domain, Error, Result};
use crate::model::{gap, Schedule};
use crate::ode::{solve_linear, solve_with_propagator, IntegratorConfig, Method};
use crate::protocols::ProtocolTrace;
use crate::state::{SystemState, C64};

/// Default clipping distance from the τ endpoints.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LindbladFamily {
    AdiabaticPhase,
    Dephasing,
    Destruction,
}

/// The base rate `κ₀`, given directly or through the pulse picture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rate {
    Kappa0 {
        kappa0: f64,
    },
    /// Dephasing with Zeno time `t_z`: `κ₀ = t_z/2`.
    ZenoTime {
        t_z: f64,
    },
    /// Destruction with ancilla rotation time `t_rot`: `κ₀ = 4 t_rot² t_z`.
    Rotation {
        t_rot: f64,
        t_z: f64,
    },
}

impl Rate {
    pub fn kappa0(&self) -> f64 {
        match *self {
            Rate::Kappa0 { kappa0 } => kappa0,
            Rate::ZenoTime { t_z } => 0.5 * t_z,
            Rate::Rotation { t_rot, t_z } => 4.0 * t_rot * t_rot * t_z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladSpec {
    pub family: LindbladFamily,
    pub rate: Rate,
    pub t_scale: f64,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl LindbladSpec {
    pub fn new(family: LindbladFamily, kappa0: f64, t_scale: f64) -> Self {
        Self {
            family,
            rate: Rate::Kappa0 { kappa0 },
            t_scale,
            schedule: Schedule::Optimal,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn dephasing(kappa0: f64, t_scale: f64) -> Self {
        Self::new(LindbladFamily::Dephasing, kappa0, t_scale)
    }

    pub fn destruction(kappa0: f64, t_scale: f64) -> Self {
        Self::new(LindbladFamily::Destruction, kappa0, t_scale)
    }

    pub fn adiabatic(t_scale: f64) -> Self {
        Self::new(LindbladFamily::AdiabaticPhase, 0.0, t_scale)
    }

    pub fn kappa0(&self) -> f64 {
        self.rate.kappa0()
    }

    /// `κ(τ) = (f(τ)² + 1)κ₀`.
    pub fn kappa(&self, tau: f64) -> Result<f64> {
        Ok(gap(self.schedule.value(tau)?).powi(2) * self.kappa0())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.kappa0();
        if !(k >= 0.0 && k.is_finite()) {
            return Err(domain("kappa0", k, "[0, ∞)"));
        }
        if !(self.t_scale > 0.0 && self.t_scale.is_finite()) {
            return Err(domain("t_scale", self.t_scale, "(0, ∞)"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(domain("epsilon", self.epsilon, "(0, 1/4)"));
        }
        self.schedule.validate()
    }
}

type Bloch = [f64; 5];

fn initial_bloch() -> Bloch {
    // |ω̃⟩⟨ω̃| has z = −1
    [0.0, 0.0, -1.0, 1.0, 0.0]
}

fn bloch_to_state(y: &Bloch) -> SystemState {
    let [x, yy, z, tr, dd] = *y;
    let block = nalgebra::Matrix2::new(
        C64::from(0.5 * (tr + z)),
        C64::new(0.5 * x, -0.5 * yy),
        C64::new(0.5 * x, 0.5 * yy),
        C64::from(0.5 * (tr - z)),
    );
    SystemState::from_parts(block, dd)
}

/// Unit Bloch vector of `Z̃ = (X − γZ)/g`.
fn z_tilde_axis(gamma: f64) -> [f64; 3] {
    let g = gap(gamma);
    if gamma.is_infinite() {
        return [0.0, 0.0, -gamma.signum()];
    }
    [1.0 / g, 0.0, -gamma / g]
}

/// `A(τ)` in `dy/dτ = A(τ)·y` for the Bloch state.
fn generator(spec: &LindbladSpec, tau: f64) -> Matrix5<f64> {
    // τ stays inside [ε, 1 − ε]; a failed evaluation is impossible there
    let gamma = spec.schedule.value(tau).unwrap_or(f64::NAN);
    let t = spec.t_scale;
    let mut a = Matrix5::zeros();
    match spec.family {
        LindbladFamily::AdiabaticPhase => {
            // dr/dτ = t·(h × r), h = (−1, 0, γ)
            let h = [-1.0, 0.0, gamma];
            a[(0, 1)] = -t * h[2];
            a[(0, 2)] = t * h[1];
            a[(1, 0)] = t * h[2];
            a[(1, 2)] = -t * h[0];
            a[(2, 0)] = -t * h[1];
            a[(2, 1)] = t * h[0];
        }
        LindbladFamily::Dephasing => {
            // Z̃ρZ̃ − ρ rotates the Bloch vector onto the Z̃ axis: rate·(nnᵀ − I)
            let rate = 2.0 * t * gap(gamma).powi(2) * spec.kappa0();
            let n = z_tilde_axis(gamma);
            for i in 0..3 {
                for j in 0..3 {
                    a[(i, j)] = rate * n[i] * n[j];
                }
                a[(i, i)] -= rate;
            }
        }
        LindbladFamily::Destruction => {
            // L = |d⟩⟨e|, L†L = Π_e = ½(I − Z̃), p_e = ½(tr − n·r)
            let rate = t * gap(gamma).powi(2) * spec.kappa0();
            let n = z_tilde_axis(gamma);
            for i in 0..3 {
                a[(i, i)] = -0.5 * rate;
                a[(i, 3)] = 0.5 * rate * n[i];
                a[(3, i)] = 0.5 * rate * n[i];
                a[(4, i)] = -0.5 * rate * n[i];
            }
            a[(3, 3)] = -0.5 * rate;
            a[(4, 3)] = 0.5 * rate;
        }
    }
    a
}

/// Angle of the `Z̃` axis in the x–z plane, `n = (sin θ, 0, cos θ)`.
fn axis_angle(gamma: f64) -> f64 {
    1f64.atan2(-gamma)
}

/// Bloch state in the frame `(m, ŷ, n)` with `m = dn/dθ`, bookkeeping
/// entries untouched.
fn to_frame(theta: f64, y: &Bloch) -> Bloch {
    let (s, c) = theta.sin_cos();
    [c * y[0] - s * y[2], y[1], s * y[0] + c * y[2], y[3], y[4]]
}

fn from_frame(theta: f64, u: &Bloch) -> Bloch {
    let (s, c) = theta.sin_cos();
    [c * u[0] + s * u[2], u[1], -s * u[0] + c * u[2], u[3], u[4]]
}

/// [`generator`] seen from the frame that follows `Z̃`, without the term
/// from the frame's own rotation.
fn frame_generator(spec: &LindbladSpec, gamma: f64) -> Matrix5<f64> {
    let t = spec.t_scale;
    let mut a = Matrix5::zeros();
    match spec.family {
        LindbladFamily::AdiabaticPhase => {
            // precession about n at angular rate −t·g
            let w = t * gap(gamma);
            a[(0, 1)] = w;
            a[(1, 0)] = -w;
        }
        LindbladFamily::Dephasing => {
            let rate = 2.0 * t * gap(gamma).powi(2) * spec.kappa0();
            a[(0, 0)] = -rate;
            a[(1, 1)] = -rate;
        }
        LindbladFamily::Destruction => {
            let half = 0.5 * t * gap(gamma).powi(2) * spec.kappa0();
            for i in 0..4 {
                a[(i, i)] = -half;
            }
            a[(2, 3)] = half;
            a[(3, 2)] = half;
            a[(4, 2)] = -half;
            a[(4, 3)] = half;
        }
    }
    a
}

/// Exponential midpoint step taken in the co-rotating frame. The frame
/// turns by the exact angle increment over the step, so near the endpoints,
/// where the rates diverge but the axis turns at a bounded rate, the step
/// is limited by how fast the rate changes rather than by its size.
fn frame_step(spec: &LindbladSpec, tau: f64, h: f64, y: &Bloch) -> Bloch {
    let f = |tau: f64| spec.schedule.value(tau).unwrap_or(f64::NAN);
    let (theta0, theta1) = (axis_angle(f(tau)), axis_angle(f(tau + h)));
    let mut a = frame_generator(spec, f(tau + 0.5 * h)) * h;
    let turn = theta1 - theta0;
    a[(0, 2)] -= turn;
    a[(2, 0)] += turn;
    let u = a.exp() * Vector5::from(to_frame(theta0, y));
    from_frame(theta1, &u.into())
}

/// Largest trace drift tolerated between renormalisations.
const DRIFT_LIMIT: f64 = 1e-8;

/// Integrates `spec` from `|ω̃⟩` over `[ε, 1 − ε]` and samples the trace.
pub fn integrate(spec: &LindbladSpec, integrator: &IntegratorConfig) -> Result<ProtocolTrace> {
    spec.validate()?;
    let eps = spec.epsilon;
    let times = integrator.sample_times(eps, 1.0 - eps);
    let drift = Cell::new(0.0f64);
    let renormalize = |y: &mut Bloch| {
        let total = y[3] + y[4];
        drift.set(drift.get().max((total - 1.0).abs()));
        for v in y.iter_mut() {
            *v /= total;
        }
    };
    let solution = match integrator.method {
        Method::ExponentialMidpoint { .. } => solve_with_propagator(
            |tau, h, y| frame_step(spec, tau, h, y),
            initial_bloch(),
            &times,
            integrator,
            renormalize,
        )?,
        _ => solve_linear(
            |tau| generator(spec, tau),
            initial_bloch(),
            &times,
            integrator,
            renormalize,
        )?,
    };
    if drift.get() > DRIFT_LIMIT {
        return Err(Error::Integrator {
            at: 1.0 - eps,
            reason: format!("trace drift {:e} exceeds {DRIFT_LIMIT:e}", drift.get()),
        });
    }
    Ok(ProtocolTrace::from_samples(
        solution
            .times
            .into_iter()
            .zip(solution.states.iter().map(bloch_to_state)),
    ))
}

/// Unitary evolution under `½(f(τ)Z − X)` for total scaled time `t_scale`.
pub fn integrate_adiabatic(
    t_scale: f64,
    schedule: &Schedule,
    integrator: &IntegratorConfig,
) -> Result<ProtocolTrace> {
    let spec = LindbladSpec {
        schedule: schedule.clone(),
        ..LindbladSpec::adiabatic(t_scale)
    };
    integrate(&spec, integrator)
}

pub fn integrate_dephasing(
    spec: &LindbladSpec,
    integrator: &IntegratorConfig,
) -> Result<ProtocolTrace> {
    expect_family(spec, LindbladFamily::Dephasing)?;
    integrate(spec, integrator)
}

pub fn integrate_destruction(
    spec: &LindbladSpec,
    integrator: &IntegratorConfig,
) -> Result<ProtocolTrace> {
    expect_family(spec, LindbladFamily::Destruction)?;
    integrate(spec, integrator)
}

fn expect_family(spec: &LindbladSpec, family: LindbladFamily) -> Result<()> {
    if spec.family == family {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "expected a {family:?} spec, got {:?}",
            spec.family
        )))
    }
}

/// Outcome of [`discrete_limit_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLimit {
    pub q: usize,
    pub deviation: f64,
    pub discrete_marked: f64,
    pub discrete_destroyed: f64,
    pub lindblad_marked: f64,
    pub lindblad_destroyed: f64,
}

/// Compares a `q`-segment chain of partial channels with the Lindblad
/// integration of the same spec.
///
/// The range `[ε, 1 − ε]` is cut into `q` equal segments. Within a segment
/// the jump probability `p = Σ t·κ(τ_j)·δτ` is accumulated over `m/q` fine
/// sub-steps, and one partial channel is applied at the segment midpoint:
/// `ρ → (1 − p)ρ + pZ̃ρZ̃` for dephasing (`cos φ = 1 − 2p`) and removal of a
/// fraction `p` of the excited population for destruction (`sin² φ = p`).
/// `p` is clipped to the largest value the channel admits.
pub fn discrete_limit_check(
    spec: &LindbladSpec,
    q: usize,
    m: usize,
    integrator: &IntegratorConfig,
) -> Result<DiscreteLimit> {
    spec.validate()?;
    if q < 8 {
        return Err(domain("q", q as f64, "[8, ∞)"));
    }
    if m < q {
        return Err(Error::InvalidParameter(format!(
            "need m ≥ q fine steps, got m = {m}, q = {q}"
        )));
    }
    let family = match spec.family {
        LindbladFamily::Dephasing => Family::Decoherence,
        LindbladFamily::Destruction => Family::Destruction,
        LindbladFamily::AdiabaticPhase => {
            return Err(Error::InvalidParameter(
                "discrete limit is defined for dephasing and destruction".into(),
            ))
        }
    };
    let reference = *integrate(spec, &integrator.with_samples(2))?.final_state();

    let eps = spec.epsilon;
    let width = (1.0 - 2.0 * eps) / q as f64;
    let sub = m / q;
    let fine = width / sub as f64;
    let mut state = SystemState::omega_tilde();
    for k in 0..q {
        let start = eps + k as f64 * width;
        let mut p = 0.0;
        for j in 0..sub {
            p += spec.t_scale * spec.kappa(start + (j as f64 + 0.5) * fine)? * fine;
        }
        let gamma = spec.schedule.value(start + 0.5 * width)?;
        state = match family {
            Family::Decoherence => {
                let p = p.min(0.5);
                partial_dephasing(&state, gamma, (1.0 - 2.0 * p).acos())
            }
            _ => partial_destruction(&state, gamma, p.min(1.0).sqrt().asin()),
        };
    }
    let deviation = (state.marked_probability() - reference.marked_probability())
        .abs()
        .max((state.destroyed_probability() - reference.destroyed_probability()).abs());
    Ok(DiscreteLimit {
        q,
        deviation,
        discrete_marked: state.marked_probability(),
        discrete_destroyed: state.destroyed_probability(),
        lindblad_marked: reference.marked_probability(),
        lindblad_destroyed: reference.destroyed_probability(),
    })
}
