// SPDX-License-Identifier: Apache-2.0

//! The single avoided crossing model.
//!
//! Everything here works in scaled units: the minimum gap is 1 and the
//! Hamiltonian at dimensionless time τ is `H(τ) = ½(f(τ)Z − X)` in the basis
//! `{|0⟩ ≅ |m⟩, |1⟩ ≅ |ω̃⟩}`. The schedule `f` runs from `+∞` at τ = 0, where
//! the ground state is `|ω̃⟩`, to `−∞` at τ = 1, where it is `|m⟩`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

fn check_open_unit(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(domain("tau", tau, "(0, 1)"))
    }
}

/// `cot(πτ)` for τ in (0, 1).
///
/// Evaluated through `tan(π(½ − τ))` in the middle of the interval so that
/// `f(½) = 0` exactly and `f(1 − τ) = −f(τ)` holds up to the rounding of `1 − τ`.
pub fn optimal_schedule(tau: f64) -> Result<f64> {
    check_open_unit(tau)?;
    Ok(cot_pi(tau))
}

fn cot_pi(tau: f64) -> f64 {
    if tau <= 0.25 {
        1.0 / (PI * tau).tan()
    } else if tau >= 0.75 {
        -1.0 / (PI * (1.0 - tau)).tan()
    } else {
        (PI * (0.5 - tau)).tan()
    }
}

/// Optimal schedule clamped to `|f| ≤ 1/g_min`.
pub fn cutoff_schedule(tau: f64, g_min: f64) -> Result<f64> {
    check_open_unit(tau)?;
    if !(g_min > 0.0 && g_min.is_finite()) {
        return Err(domain("g_min", g_min, "(0, ∞)"));
    }
    Ok(clamp_cutoff(cot_pi(tau), g_min))
}

fn clamp_cutoff(f: f64, g_min: f64) -> f64 {
    let bound = 1.0 / g_min;
    if f.abs() < bound {
        f
    } else {
        bound.copysign(f)
    }
}

/// Scaled gap `√(γ² + 1)`.
pub fn gap(gamma: f64) -> f64 {
    gamma.hypot(1.0)
}

/// Instantaneous ground and first excited state of `½(γZ − X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub ground: Vector2<f64>,
    pub excited: Vector2<f64>,
}

impl Eigenpair {
    /// Orthogonal matrix whose columns are `|g⟩` and `|e⟩`.
    pub fn basis(&self) -> Matrix2<f64> {
        Matrix2::from_columns(&[self.ground, self.excited])
    }

    /// `Z̃ = |g⟩⟨g| − |e⟩⟨e|` in the computational basis.
    pub fn z_tilde(&self) -> Matrix2<f64> {
        self.ground * self.ground.transpose() - self.excited * self.excited.transpose()
    }
}

/// Ground state `(1, a)/𝒩` and excited state `(a, −1)/𝒩` with `a = √(γ²+1) + γ`.
///
/// For `γ < 0`, `a` is computed as `1/(√(γ²+1) − γ)` to avoid cancellation.
/// For `γ ≥ 0` both vectors are written in terms of `1/a` instead, so that
/// `γ = ±∞` give the exact limiting states.
pub fn eigenpair(gamma: f64) -> Eigenpair {
    let s = gap(gamma);
    if gamma >= 0.0 {
        let b = 1.0 / (s + gamma);
        let n = b.hypot(1.0);
        Eigenpair {
            ground: Vector2::new(b / n, 1.0 / n),
            excited: Vector2::new(1.0 / n, -b / n),
        }
    } else {
        let a = 1.0 / (s - gamma);
        let n = a.hypot(1.0);
        Eigenpair {
            ground: Vector2::new(1.0 / n, a / n),
            excited: Vector2::new(a / n, -1.0 / n),
        }
    }
}

/// Scaled Hamiltonian `½(γZ − X)`.
pub fn hamiltonian(gamma: f64) -> Matrix2<f64> {
    Matrix2::new(0.5 * gamma, -0.5, -0.5, -0.5 * gamma)
}

/// Interior τ grid `{j/(m+1) : j = 1..m}`.
pub fn tau_grid(m: usize) -> Vec<f64> {
    let denom = (m + 1) as f64;
    (1..=m).map(|j| j as f64 / denom).collect()
}

/// Tabulated schedule: linear interpolation between `(τ_k, γ_k)` knots,
/// held constant outside the first and last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct ScheduleTable {
    knots: Vec<(f64, f64)>,
}

impl ScheduleTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidParameter("schedule table is empty".into()));
        }
        for (i, &(tau, gamma)) in knots.iter().enumerate() {
            check_open_unit(tau)?;
            if !gamma.is_finite() {
                return Err(domain("gamma", gamma, "finite values"));
            }
            if i > 0 && tau <= knots[i - 1].0 {
                return Err(Error::InvalidParameter(format!(
                    "schedule table τ values must be strictly increasing (knot {i})"
                )));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn eval(&self, tau: f64) -> f64 {
        let k = &self.knots;
        let idx = k.partition_point(|&(t, _)| t <= tau);
        if idx == 0 {
            return k[0].1;
        }
        if idx == k.len() {
            return k[k.len() - 1].1;
        }
        let (t0, g0) = k[idx - 1];
        let (t1, g1) = k[idx];
        g0 + (g1 - g0) * (tau - t0) / (t1 - t0)
    }
}

impl TryFrom<Vec<(f64, f64)>> for ScheduleTable {
    type Error = Error;

    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(knots)
    }
}

impl From<ScheduleTable> for Vec<(f64, f64)> {
    fn from(table: ScheduleTable) -> Self {
        table.knots
    }
}

/// Control function `f(τ)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    #[default]
    Optimal,
    Cutoff {
        g_min: f64,
    },
    Constant {
        gamma: f64,
    },
    Table {
        knots: ScheduleTable,
    },
}

impl Schedule {
    /// `f(τ)` for τ in (0, 1).
    pub fn value(&self, tau: f64) -> Result<f64> {
        check_open_unit(tau)?;
        Ok(self.eval(tau))
    }

    /// `f(τ)` on the closed interval, with the endpoint limits of the
    /// optimal schedule taken as `±∞`.
    pub fn value_or_limit(&self, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(domain("tau", tau, "[0, 1]"));
        }
        if tau > 0.0 && tau < 1.0 {
            return Ok(self.eval(tau));
        }
        let upper = tau == 0.0;
        Ok(match self {
            Schedule::Optimal => {
                if upper {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            Schedule::Cutoff { g_min } => {
                if upper {
                    1.0 / g_min
                } else {
                    -1.0 / g_min
                }
            }
            Schedule::Constant { gamma } => *gamma,
            Schedule::Table { knots } => knots.eval(tau),
        })
    }

    fn eval(&self, tau: f64) -> f64 {
        match self {
            Schedule::Optimal => cot_pi(tau),
            Schedule::Cutoff { g_min } => clamp_cutoff(cot_pi(tau), *g_min),
            Schedule::Constant { gamma } => *gamma,
            Schedule::Table { knots } => knots.eval(tau),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Optimal => Ok(()),
            Schedule::Cutoff { g_min } if *g_min > 0.0 && g_min.is_finite() => Ok(()),
            Schedule::Cutoff { g_min } => Err(domain("g_min", *g_min, "(0, ∞)")),
            Schedule::Constant { gamma } if gamma.is_finite() => Ok(()),
            Schedule::Constant { gamma } => Err(domain("gamma", *gamma, "finite values")),
            Schedule::Table { knots } => ScheduleTable::new(knots.knots.clone()).map(|_| ()),
        }
    }
}

/// Everything the channels need to know about one point of the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub tau: f64,
    pub gamma: f64,
    pub gap: f64,
    pub ground: Vector2<f64>,
    pub excited: Vector2<f64>,
}

impl ModelPoint {
    pub fn new(schedule: &Schedule, tau: f64) -> Result<Self> {
        let gamma = schedule.value(tau)?;
        let pair = eigenpair(gamma);
        Ok(Self {
            tau,
            gamma,
            gap: gap(gamma),
            ground: pair.ground,
            excited: pair.excited,
        })
    }
}

/// Signed basis increment `δ_j = ⟨e(j/q)|g((j−1)/q)⟩`.
///
/// The endpoints τ = 0 and τ = 1 use the limiting eigenstates of the
/// schedule. With the optimal schedule the ground state turns from `|ω̃⟩`
/// towards `|m⟩`, so the increments are negative and sum to about `−π/2`.
pub fn basis_increment(schedule: &Schedule, q: usize, j: usize) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!(
            "q = {q} must be at least 2"
        )));
    }
    if j == 0 || j > q {
        return Err(Error::InvalidParameter(format!(
            "j = {j} must lie in 1..={q}"
        )));
    }
    let qf = q as f64;
    let later = eigenpair(schedule.value_or_limit(j as f64 / qf)?);
    let earlier = eigenpair(schedule.value_or_limit((j - 1) as f64 / qf)?);
    Ok(later.excited.dot(&earlier.ground))
}

/// All `q` increments of a schedule.
pub fn basis_increments(schedule: &Schedule, q: usize) -> Result<Vec<f64>> {
    (1..=q).map(|j| basis_increment(schedule, q, j)).collect()
}
