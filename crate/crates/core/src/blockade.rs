// SPDX-License-Identifier: Apache-2.0

//! Zeno blockade in a nonlinear optical cavity.
//!
//! The fibre–cavity coherence `Im ρ_cf` obeys a damped oscillator equation
//! once the linear coupling `c` is neglected. The full three-mode master
//! equation (plus the lossy mode) is available as an oracle in a truncated
//! Fock basis.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ode::{solve, IntegratorConfig};
use crate::state::C64;

/// Boundary population tolerated before the truncation is reported.
pub const LEAK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockadeParams {
    /// Photons in the control mode.
    pub m: u32,
    /// Photons in the freely propagating mode.
    pub n: u32,
    /// Nonlinear coupling rate.
    pub g: f64,
    /// Loss rate.
    pub gamma: f64,
    /// Linear fibre–cavity coupling rate.
    pub c: f64,
}

impl BlockadeParams {
    pub fn new(m: u32, n: u32, g: f64, gamma: f64, c: f64) -> Self {
        Self { m, n, g, gamma, c }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter(
                "photon counts m and n must be positive".into(),
            ));
        }
        for (name, v) in [("G", self.g), ("gamma", self.gamma), ("c", self.c)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(domain(name, v, "[0, ∞)"));
            }
        }
        Ok(())
    }

    /// `√(mn)·G`, the undamped angular frequency.
    pub fn omega(&self) -> f64 {
        (f64::from(self.m) * f64::from(self.n)).sqrt() * self.g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Underdamped => "underdamped",
            Regime::Critical => "critical",
            Regime::Overdamped => "overdamped",
        }
    }
}

/// Compares `4√(mn)G` with `γ`; equality within `10⁻¹²` relative is critical.
pub fn classify_regime(params: &BlockadeParams) -> Regime {
    let lhs = 4.0 * params.omega();
    let scale = lhs.abs().max(params.gamma.abs());
    if (lhs - params.gamma).abs() <= 1e-12 * scale {
        Regime::Critical
    } else if lhs > params.gamma {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

/// Distance from the critical boundary relative to `γ`.
pub fn critical_margin(params: &BlockadeParams) -> f64 {
    (4.0 * params.omega() - params.gamma).abs() / params.gamma
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffdiagSeries {
    pub times: Vec<f64>,
    /// `Im ρ_cf`
    pub y: Vec<f64>,
    /// `d Im ρ_cf / dt`
    pub dy: Vec<f64>,
}

impl OffdiagSeries {
    /// `½ẏ² + ½mnG²y²` at every sample.
    pub fn energy(&self, params: &BlockadeParams) -> Vec<f64> {
        let w2 = params.omega().powi(2);
        self.y
            .iter()
            .zip(&self.dy)
            .map(|(y, v)| 0.5 * v * v + 0.5 * w2 * y * y)
            .collect()
    }
}

fn check_horizon(t_max: f64) -> Result<()> {
    if t_max > 0.0 && t_max.is_finite() {
        Ok(())
    } else {
        Err(domain("t_max", t_max, "(0, ∞)"))
    }
}

/// Integrates `y'' = −mnG²y − (γ/2)y'` from `(im0, v0)`.
pub fn simulate_offdiag(
    params: &BlockadeParams,
    im0: f64,
    v0: f64,
    t_max: f64,
    integrator: &IntegratorConfig,
) -> Result<OffdiagSeries> {
    params.validate()?;
    check_horizon(t_max)?;
    let w2 = params.omega().powi(2);
    let half_gamma = 0.5 * params.gamma;
    let times = integrator.sample_times(0.0, t_max);
    let sol = solve(
        |_, s: &[f64; 2]| [s[1], -w2 * s[0] - half_gamma * s[1]],
        [im0, v0],
        &times,
        integrator,
        |_| {},
    )?;
    Ok(OffdiagSeries {
        times: sol.times,
        y: sol.states.iter().map(|s| s[0]).collect(),
        dy: sol.states.iter().map(|s| s[1]).collect(),
    })
}

/// Terms of the first-order pair that the reduced description leaves open.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Closure {
    /// `ρ_ff − ρ_cc`, held fixed.
    pub population_difference: f64,
    /// `Im ρ_lc`, held fixed.
    pub im_rho_lc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSeries {
    pub times: Vec<f64>,
    pub im_rho_cf: Vec<f64>,
    pub re_rho_lf: Vec<f64>,
}

/// Integrates the pair for `Im ρ_cf` and `Re ρ_lf` with the closure terms
/// held constant.
pub fn simulate_coupled(
    params: &BlockadeParams,
    im_rho_cf0: f64,
    re_rho_lf0: f64,
    closure: Closure,
    t_max: f64,
    integrator: &IntegratorConfig,
) -> Result<CoupledSeries> {
    params.validate()?;
    check_horizon(t_max)?;
    let w = params.omega();
    let lin = f64::from(params.n).sqrt() * params.c;
    let drive_cf = -lin * closure.population_difference;
    let drive_lf = lin * closure.im_rho_lc;
    let half_gamma = 0.5 * params.gamma;
    let times = integrator.sample_times(0.0, t_max);
    let sol = solve(
        |_, s: &[f64; 2]| [drive_cf - w * s[1], w * s[0] + drive_lf - half_gamma * s[1]],
        [im_rho_cf0, re_rho_lf0],
        &times,
        integrator,
        |_| {},
    )?;
    Ok(CoupledSeries {
        times: sol.times,
        im_rho_cf: sol.states.iter().map(|s| s[0]).collect(),
        re_rho_lf: sol.states.iter().map(|s| s[1]).collect(),
    })
}

/// Times at which `ys` changes sign, ignoring samples with
/// `|y| ≤ dead_band`. Crossings are placed by linear interpolation between
/// the two significant samples that bracket them.
pub fn sign_changes(times: &[f64], ys: &[f64], dead_band: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&t, &y) in times.iter().zip(ys) {
        if y.abs() <= dead_band {
            continue;
        }
        if let Some((t0, y0)) = last {
            if y0.signum() != y.signum() {
                out.push(t0 + (t - t0) * y0 / (y0 - y));
            }
        }
        last = Some((t, y));
    }
    out
}

/// Regime read off a trajectory: any sign change means underdamped.
pub fn observed_regime(times: &[f64], ys: &[f64], im0: f64) -> Regime {
    if sign_changes(times, ys, 1e-6 * im0.abs()).is_empty() {
        Regime::Overdamped
    } else {
        Regime::Underdamped
    }
}

/// Occupations `(f, cav, cont, loss)`.
pub type Fock = [u32; 4];

const F: usize = 0;
const CAV: usize = 1;
const CONT: usize = 2;
const LOSS: usize = 3;

/// Applies `∏ a_k^{lower} (a_k†)^{raise}`, one quantum per listed mode.
fn ladder(state: &Fock, lower: &[usize], raise: &[usize]) -> Option<(Fock, f64)> {
    let mut s = *state;
    let mut amp = 1.0;
    for &k in lower {
        if s[k] == 0 {
            return None;
        }
        amp *= f64::from(s[k]).sqrt();
        s[k] -= 1;
    }
    for &k in raise {
        s[k] += 1;
        amp *= f64::from(s[k]).sqrt();
    }
    Some((s, amp))
}

/// Hamiltonian terms as (coefficient, lowered modes, raised modes).
fn hamiltonian_terms(p: &BlockadeParams) -> [(f64, &'static [usize], &'static [usize]); 4] {
    [
        (p.c, &[F], &[CAV]),
        (p.c, &[CAV], &[F]),
        (p.g, &[CAV, CONT], &[LOSS]),
        (p.g, &[LOSS], &[CAV, CONT]),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSeries {
    pub times: Vec<f64>,
    pub im_rho_cf: Vec<f64>,
    pub re_rho_lf: Vec<f64>,
    pub trace: Vec<f64>,
    pub hermiticity_error: Vec<f64>,
    /// Largest population seen on states coupled out of the truncation.
    pub boundary_population: f64,
    /// Size of the simulated subspace.
    pub dimension: usize,
}

/// Integrates the full master equation with the loss dissipator, starting
/// from `(|f⟩ + i|c⟩)/√2` where `|f⟩ = |n, 0, m, 0⟩` and
/// `|c⟩ = |n−1, 1, m, 0⟩`. `Im ρ_cf` starts at ½.
///
/// The basis holds Fock states with total photon number at most
/// `fock_cutoff` that are reachable from the initial support; the
/// propagator is the exact exponential of the Liouvillian over one sample
/// interval.
pub fn simulate_master_oracle(
    params: &BlockadeParams,
    fock_cutoff: u32,
    t_max: f64,
    samples: usize,
) -> Result<OracleSeries> {
    params.validate()?;
    check_horizon(t_max)?;
    if samples < 2 {
        return Err(Error::InvalidParameter(
            "at least two samples are needed".into(),
        ));
    }
    let f_state: Fock = [params.n, 0, params.m, 0];
    let c_state: Fock = [params.n - 1, 1, params.m, 0];
    let l_state: Fock = [params.n - 1, 0, params.m - 1, 1];
    if f_state.iter().sum::<u32>() > fock_cutoff {
        return Err(Error::TruncationLeak {
            t: 0.0,
            population: 1.0,
        });
    }

    let terms = hamiltonian_terms(params);
    let allowed = |s: &Fock| s.iter().sum::<u32>() <= fock_cutoff;

    // breadth-first closure under H and the jump operator
    let mut index: HashMap<Fock, usize> = HashMap::new();
    let mut basis: Vec<Fock> = Vec::new();
    let mut boundary: Vec<bool> = Vec::new();
    let mut queue = VecDeque::new();
    for s in [f_state, c_state] {
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(s) {
            e.insert(basis.len());
            basis.push(s);
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        let mut leaves = false;
        let mut targets = Vec::new();
        for &(coef, lower, raise) in &terms {
            if coef == 0.0 {
                continue;
            }
            if let Some((t, _)) = ladder(&s, lower, raise) {
                if allowed(&t) {
                    targets.push(t);
                } else {
                    leaves = true;
                }
            }
        }
        if params.gamma > 0.0 {
            if let Some((t, _)) = ladder(&s, &[LOSS], &[]) {
                targets.push(t);
            }
        }
        boundary.push(leaves);
        for t in targets {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(t) {
                e.insert(basis.len());
                basis.push(t);
                queue.push_back(t);
            }
        }
    }
    // `boundary` was filled in BFS order, which matches `basis` order
    let d = basis.len();

    let mut h = DMatrix::<C64>::zeros(d, d);
    let mut a_loss = DMatrix::<C64>::zeros(d, d);
    for (j, s) in basis.iter().enumerate() {
        for &(coef, lower, raise) in &terms {
            if let Some((t, amp)) = ladder(s, lower, raise) {
                if let Some(&i) = index.get(&t) {
                    h[(i, j)] += C64::from(coef * amp);
                }
            }
        }
        if let Some((t, amp)) = ladder(s, &[LOSS], &[]) {
            if let Some(&i) = index.get(&t) {
                a_loss[(i, j)] = C64::from(amp);
            }
        }
    }

    // column-major vec: vec(AXB) = (Bᵀ ⊗ A) vec(X)
    let id = DMatrix::<C64>::identity(d, d);
    let n_loss = a_loss.adjoint() * &a_loss;
    let minus_i = C64::new(0.0, -1.0);
    let g = C64::from(params.gamma);
    let half = C64::from(0.5);
    let liouvillian = (id.kronecker(&h) - h.transpose().kronecker(&id)) * minus_i
        + (a_loss.conjugate().kronecker(&a_loss)
            - id.kronecker(&n_loss) * half
            - n_loss.transpose().kronecker(&id) * half)
            * g;
    let dt = t_max / (samples - 1) as f64;
    let step = (liouvillian * C64::from(dt)).exp();

    let amp = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut psi = DVector::<C64>::zeros(d);
    psi[index[&f_state]] = amp;
    psi[index[&c_state]] = amp * C64::i();
    let rho0 = &psi * psi.adjoint();
    let mut vec_rho = DVector::from_column_slice(rho0.as_slice());

    let (fi, ci) = (index[&f_state], index[&c_state]);
    let li = index.get(&l_state).copied();
    let mut out = OracleSeries {
        times: Vec::with_capacity(samples),
        im_rho_cf: Vec::with_capacity(samples),
        re_rho_lf: Vec::with_capacity(samples),
        trace: Vec::with_capacity(samples),
        hermiticity_error: Vec::with_capacity(samples),
        boundary_population: 0.0,
        dimension: d,
    };
    for k in 0..samples {
        if k > 0 {
            vec_rho = &step * &vec_rho;
        }
        let t = k as f64 * dt;
        let rho = DMatrix::from_column_slice(d, d, vec_rho.as_slice());
        let boundary_pop: f64 = (0..d)
            .filter(|&i| boundary[i])
            .map(|i| rho[(i, i)].re)
            .sum();
        if boundary_pop > LEAK_TOLERANCE {
            return Err(Error::TruncationLeak {
                t,
                population: boundary_pop,
            });
        }
        out.boundary_population = out.boundary_population.max(boundary_pop);
        out.times.push(t);
        out.im_rho_cf.push(rho[(ci, fi)].im);
        out.re_rho_lf.push(li.map_or(0.0, |l| rho[(l, fi)].re));
        out.trace.push(rho.trace().re);
        out.hermiticity_error.push((&rho - rho.adjoint()).camax());
    }
    Ok(out)
}
