// SPDX-License-Identifier: Apache-2.0

//! Discrete protocols: channel sequences placed on the τ-grid and
//! multi-stage quantum walks.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{eigenprojectors, walk_step, ChannelSpec, Family, Manifestation};
use crate::error::{domain, Error, Result};
use crate::model::{tau_grid, Schedule};
use crate::state::{SystemState, C64};

/// Observables recorded after each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub tau: f64,
    pub p_marked: f64,
    pub p_destroyed: f64,
    pub purity: f64,
}

impl StepRecord {
    pub fn new(step: usize, tau: f64, state: &SystemState) -> Self {
        Self {
            step,
            tau,
            p_marked: state.marked_probability(),
            p_destroyed: state.destroyed_probability(),
            purity: state.purity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    pub records: Vec<StepRecord>,
    pub states: Vec<SystemState>,
}

impl ProtocolTrace {
    fn start(state: SystemState) -> Self {
        Self {
            records: vec![StepRecord::new(0, 0.0, &state)],
            states: vec![state],
        }
    }

    pub(crate) fn push(&mut self, tau: f64, state: SystemState) {
        let step = self.records.len();
        self.records.push(StepRecord::new(step, tau, &state));
        self.states.push(state);
    }

    pub(crate) fn from_samples(samples: impl IntoIterator<Item = (f64, SystemState)>) -> Self {
        let mut trace = Self {
            records: vec![],
            states: vec![],
        };
        for (tau, state) in samples {
            trace.push(tau, state);
        }
        trace
    }

    pub fn final_state(&self) -> &SystemState {
        self.states
            .last()
            .expect("a trace always holds its initial state")
    }

    pub fn final_record(&self) -> &StepRecord {
        self.records
            .last()
            .expect("a trace always holds its initial state")
    }
}

/// How the per-operation angle of a partial protocol is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Every operation uses `phi`.
    #[default]
    PerOperation,
    /// `phi` is the total, split evenly over the `m_ops` operations.
    FixedTotal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub family: Family,
    pub manifestation: Manifestation,
    pub m_ops: usize,
    #[serde(default)]
    pub schedule: Schedule,
    /// Total walk time when `include_walk_between` is set.
    #[serde(default)]
    pub t_scale: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub angle_mode: AngleMode,
    #[serde(default)]
    pub include_walk_between: bool,
}

impl ProtocolConfig {
    pub fn new(family: Family, manifestation: Manifestation, m_ops: usize) -> Self {
        Self {
            family,
            manifestation,
            m_ops,
            schedule: Schedule::Optimal,
            t_scale: 0.0,
            phi: 0.0,
            angle_mode: AngleMode::PerOperation,
            include_walk_between: false,
        }
    }

    pub fn full(family: Family, m_ops: usize) -> Self {
        Self::new(family, Manifestation::FullDiscrete, m_ops)
    }

    pub fn partial(family: Family, m_ops: usize, phi: f64) -> Self {
        Self {
            phi,
            ..Self::new(family, Manifestation::PartialDiscrete, m_ops)
        }
    }

    pub fn fixed_total(family: Family, m_ops: usize, phi_total: f64) -> Self {
        Self {
            angle_mode: AngleMode::FixedTotal,
            ..Self::partial(family, m_ops, phi_total)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_scale >= 0.0 && self.t_scale.is_finite()) {
            return Err(domain("t_scale", self.t_scale, "[0, ∞)"));
        }
        self.schedule.validate()?;
        self.channel().validate()
    }

    /// Angle of each individual operation.
    pub fn phi_per_op(&self) -> f64 {
        match self.angle_mode {
            AngleMode::PerOperation => self.phi,
            AngleMode::FixedTotal if self.m_ops > 0 => self.phi / self.m_ops as f64,
            AngleMode::FixedTotal => 0.0,
        }
    }

    pub fn channel(&self) -> ChannelSpec {
        ChannelSpec {
            family: self.family,
            manifestation: self.manifestation,
            phi: self.phi_per_op(),
            t_rot: None,
        }
    }
}

/// Walks of duration `t_scale/m_stage` at `γ_j = f(j/(m_stage + 1))`,
/// starting from `|ω̃⟩`.
pub fn run_multistage_walk(m_stage: usize, t_scale: f64) -> Result<ProtocolTrace> {
    run_multistage_walk_with(m_stage, t_scale, &Schedule::Optimal)
}

pub fn run_multistage_walk_with(
    m_stage: usize,
    t_scale: f64,
    schedule: &Schedule,
) -> Result<ProtocolTrace> {
    if m_stage == 0 {
        return Err(domain("m_stage", 0.0, "[1, ∞)"));
    }
    let dt = t_scale / m_stage as f64;
    let mut state = SystemState::omega_tilde();
    let mut trace = ProtocolTrace::start(state);
    for tau in tau_grid(m_stage) {
        state = walk_step(&state, schedule.value(tau)?, dt);
        trace.push(tau, state);
    }
    Ok(trace)
}

/// Applies the configured channel at each point of `tau_grid(m_ops)`.
pub fn run_operation_sequence(config: &ProtocolConfig) -> Result<ProtocolTrace> {
    config.validate()?;
    let channel = config.channel();
    let dt = if config.m_ops > 0 {
        config.t_scale / config.m_ops as f64
    } else {
        0.0
    };
    let mut state = SystemState::omega_tilde();
    let mut trace = ProtocolTrace::start(state);
    for tau in tau_grid(config.m_ops) {
        let gamma = config.schedule.value(tau)?;
        state = channel.apply(&state, gamma);
        if config.include_walk_between {
            state = walk_step(&state, gamma, dt);
        }
        trace.push(tau, state);
    }
    Ok(trace)
}

/// Protocols accepted by [`audit_scale_invariance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditProtocol {
    MultistageWalk { m_stage: usize, t_scale: f64 },
    Sequence(ProtocolConfig),
}

/// Reruns a protocol in raw units for each `g_min` and returns the largest
/// pairwise difference of the final marked and destroyed probabilities,
/// including the scaled-unit run.
pub fn audit_scale_invariance(protocol: &AuditProtocol, g_min_list: &[f64]) -> Result<f64> {
    let mut distinct = g_min_list.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two distinct g_min values".into(),
        ));
    }
    let scaled = match protocol {
        AuditProtocol::MultistageWalk { m_stage, t_scale } => {
            *run_multistage_walk(*m_stage, *t_scale)?.final_state()
        }
        AuditProtocol::Sequence(config) => *run_operation_sequence(config)?.final_state(),
    };
    let mut finals = vec![scaled];
    for &g_min in g_min_list {
        if !(g_min > 0.0 && g_min <= 1.0) {
            return Err(domain("g_min", g_min, "(0, 1]"));
        }
        finals.push(raw::run(protocol, g_min)?);
    }
    let mut worst: f64 = 0.0;
    for (i, a) in finals.iter().enumerate() {
        for b in &finals[i + 1..] {
            worst = worst
                .max((a.marked_probability() - b.marked_probability()).abs())
                .max((a.destroyed_probability() - b.destroyed_probability()).abs());
        }
    }
    Ok(worst)
}

/// Raw-unit evolution under `H = (g_min/2)(γZ − X)` with times `t/g_min`.
///
/// Deliberately independent of [`crate::model::eigenpair`]: the eigenbasis
/// and propagators are computed from the raw Hamiltonian matrix.
mod raw {
    use super::*;

    pub(super) fn hamiltonian(g_min: f64, gamma: f64) -> Matrix2<C64> {
        let h = 0.5 * g_min;
        Matrix2::new(
            C64::from(h * gamma),
            C64::from(-h),
            C64::from(-h),
            C64::from(-h * gamma),
        )
    }

    /// Eigenvalues `(E₀, E₁)` and eigenvectors of a real symmetric 2×2.
    pub(super) fn eigensystem(h: &Matrix2<C64>) -> ((f64, f64), Vector2<C64>, Vector2<C64>) {
        let a = h[(0, 0)].re;
        let d = h[(1, 1)].re;
        let b = h[(0, 1)].re;
        let mean = 0.5 * (a + d);
        let r = (0.5 * (a - d)).hypot(b);
        // rotation angle diagonalising [[a, b], [b, d]]
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        let (s, c) = theta.sin_cos();
        let upper = Vector2::new(C64::from(c), C64::from(s));
        let lower = Vector2::new(C64::from(-s), C64::from(c));
        ((mean - r, mean + r), lower, upper)
    }

    pub(super) fn propagator(h: &Matrix2<C64>, t: f64) -> Matrix2<C64> {
        let ((e0, e1), v0, v1) = eigensystem(h);
        v0 * v0.adjoint() * C64::from_polar(1.0, -e0 * t)
            + v1 * v1.adjoint() * C64::from_polar(1.0, -e1 * t)
    }

    fn conj(state: &SystemState, u: &Matrix2<C64>) -> SystemState {
        state.conjugate(u)
    }

    fn channel(spec: &ChannelSpec, state: &SystemState, g_min: f64, gamma: f64) -> SystemState {
        let h = hamiltonian(g_min, gamma);
        let ((e0, e1), v0, v1) = eigensystem(&h);
        let gap_raw = e1 - e0;
        let pg = v0 * v0.adjoint();
        let pe = v1 * v1.adjoint();
        let phi = spec.effective_phi();
        match spec.family {
            Family::PhaseRotation => {
                // evolve for the time that accrues relative phase 2π − φ
                let t = (2.0 * PI - phi) / gap_raw;
                conj(state, &propagator(&h, t))
            }
            Family::Decoherence => {
                let t = phi / gap_raw;
                let plus = conj(state, &propagator(&h, t));
                let minus = conj(state, &propagator(&h, -t));
                state.with_block((plus.block() + minus.block()) * C64::from(0.5))
            }
            Family::Destruction => {
                // ancilla rotation angle 2·t_rot·x_mag with x_mag = T·g(τ)
                let t = 1.0 / gap_raw;
                let angle = phi * gap_raw * t;
                let k = pg + pe * C64::from(angle.cos());
                state.apply_kraus_with_loss(&[k])
            }
        }
    }

    pub(super) fn run(protocol: &AuditProtocol, g_min: f64) -> Result<SystemState> {
        let mut state = SystemState::omega_tilde();
        match protocol {
            AuditProtocol::MultistageWalk { m_stage, t_scale } => {
                if *m_stage == 0 {
                    return Err(domain("m_stage", 0.0, "[1, ∞)"));
                }
                let total = t_scale / g_min;
                let dt = total / *m_stage as f64;
                for tau in tau_grid(*m_stage) {
                    let gamma = Schedule::Optimal.value(tau)?;
                    state = conj(&state, &propagator(&hamiltonian(g_min, gamma), dt));
                }
            }
            AuditProtocol::Sequence(config) => {
                config.validate()?;
                let spec = config.channel();
                let dt = if config.m_ops > 0 {
                    config.t_scale / g_min / config.m_ops as f64
                } else {
                    0.0
                };
                for tau in tau_grid(config.m_ops) {
                    let gamma = config.schedule.value(tau)?;
                    state = channel(&spec, &state, g_min, gamma);
                    if config.include_walk_between {
                        state = conj(&state, &propagator(&hamiltonian(g_min, gamma), dt));
                    }
                }
            }
        }
        Ok(state)
    }
}

/// Leaked probability `1 − p_marked` against the operation count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZenoScaling {
    pub rows: Vec<ZenoRow>,
    /// `α` in `leaked ∝ m^{−α}`, fitted over the largest decade of `m`.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoRow {
    pub m: usize,
    pub leaked: f64,
    pub p_destroyed: f64,
}

pub fn zeno_excitation_scaling(family: Family, m_list: &[usize]) -> Result<ZenoScaling> {
    if m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "m_list must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let trace = run_operation_sequence(&ProtocolConfig::full(family, m))?;
        let last = trace.final_record();
        rows.push(ZenoRow {
            m,
            leaked: 1.0 - last.p_marked,
            p_destroyed: last.p_destroyed,
        });
    }
    let exponent = match family {
        Family::PhaseRotation => None,
        _ => fit_top_decade(rows.iter().map(|r| (r.m as f64, r.leaked))),
    };
    Ok(ZenoScaling { rows, exponent })
}

/// Least-squares `α` in `y ∝ x^{−α}` over points with `x ≥ x_max/10`.
pub fn fit_top_decade(points: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let points: Vec<(f64, f64)> = points.into_iter().filter(|&(_, y)| y > 0.0).collect();
    let x_max = points.iter().map(|p| p.0).fold(f64::NAN, f64::max);
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 >= x_max / 10.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Monte Carlo unravelling of a sequence: measurement outcomes are sampled
/// instead of averaged. Returns the fraction of runs that end in `|m⟩` when
/// the final state is measured in the computational basis, and the fraction
/// that were destroyed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEstimate {
    pub runs: usize,
    pub p_marked: f64,
    pub p_destroyed: f64,
}

pub fn run_trajectories(
    config: &ProtocolConfig,
    runs: usize,
    seed: u64,
) -> Result<TrajectoryEstimate> {
    config.validate()?;
    if runs == 0 {
        return Err(domain("runs", 0.0, "[1, ∞)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channel = config.channel();
    let grid = tau_grid(config.m_ops);
    let (mut marked, mut destroyed) = (0usize, 0usize);
    'run: for _ in 0..runs {
        let mut psi = Vector2::new(C64::from(0.0), C64::from(1.0));
        for &tau in &grid {
            let gamma = config.schedule.value(tau)?;
            let (pg, pe) = eigenprojectors(gamma);
            let phi = channel.effective_phi();
            match config.family {
                Family::PhaseRotation => {
                    psi = (pg + pe * C64::from_polar(1.0, phi)) * psi;
                }
                Family::Decoherence => {
                    // random ±phi phase kick realises the dephasing average
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let u = pg * C64::from_polar(1.0, 0.5 * sign * phi)
                        + pe * C64::from_polar(1.0, -0.5 * sign * phi);
                    psi = u * psi;
                }
                Family::Destruction => {
                    let p_e = (pe * psi).norm_squared();
                    if rng.gen::<f64>() < p_e * phi.sin().powi(2) {
                        destroyed += 1;
                        continue 'run;
                    }
                    psi = (pg + pe * C64::from(phi.cos())) * psi;
                    psi /= C64::from(psi.norm());
                }
            }
            if config.include_walk_between {
                let u = crate::channels::walk_unitary(gamma, config.t_scale / config.m_ops as f64);
                psi = u * psi;
            }
        }
        if rng.gen::<f64>() < psi[0].norm_sqr() {
            marked += 1;
        }
    }
    Ok(TrajectoryEstimate {
        runs,
        p_marked: marked as f64 / runs as f64,
        p_destroyed: destroyed as f64 / runs as f64,
    })
}
