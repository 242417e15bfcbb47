// SPDX-License-Identifier: Apache-2.0

//! Integrators for small fixed-size systems: explicit Runge–Kutta schemes
//! for general right-hand sides and an exponential midpoint rule for linear
//! ones.

use nalgebra::{DMatrix, DVector, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order scheme with a fixed total step count.
    Rk4 { steps: usize },
    /// Dormand–Prince 5(4) with step size control.
    DormandPrince {
        rtol: f64,
        atol: f64,
        max_steps: usize,
    },
    /// `y ← exp(h·A(t + h/2))·y` with step doubling and Richardson
    /// extrapolation; linear systems only.
    /// Stays stable when `A` is large but turns slowly.
    ExponentialMidpoint {
        rtol: f64,
        atol: f64,
        max_steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Steps between calls of the renormalisation hook.
    pub renormalize_every: usize,
    /// Number of evenly spaced output samples, endpoints included.
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::DormandPrince {
                rtol: 1e-9,
                atol: 1e-12,
                max_steps: 10_000_000,
            },
            renormalize_every: 1000,
            samples: 1000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(steps: usize) -> Self {
        Self {
            method: Method::Rk4 { steps },
            ..Self::default()
        }
    }

    pub fn dormand_prince(rtol: f64) -> Self {
        Self {
            method: Method::DormandPrince {
                rtol,
                atol: rtol * 1e-3,
                max_steps: 10_000_000,
            },
            ..Self::default()
        }
    }

    pub fn exponential_midpoint(rtol: f64) -> Self {
        Self {
            method: Method::ExponentialMidpoint {
                rtol,
                atol: rtol * 1e-3,
                max_steps: 10_000_000,
            },
            ..Self::default()
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4 { steps } if steps < 100 => {
                return Err(Error::InvalidParameter(format!(
                    "rk4 needs at least 100 steps, got {steps}"
                )))
            }
            Method::DormandPrince {
                rtol,
                atol,
                max_steps,
            }
            | Method::ExponentialMidpoint {
                rtol,
                atol,
                max_steps,
            } if !(rtol > 0.0 && atol > 0.0 && max_steps > 0) => {
                return Err(Error::InvalidParameter(
                    "adaptive methods need positive rtol, atol and max_steps".into(),
                ))
            }
            _ => {}
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter("need at least 2 samples".into()));
        }
        if self.renormalize_every == 0 {
            return Err(Error::InvalidParameter(
                "renormalize_every must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `samples` evenly spaced points in `[t0, t1]`.
    pub fn sample_times(&self, t0: f64, t1: f64) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    t1
                } else {
                    t0 + (t1 - t0) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Result of [`solve`]: the state at every requested output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub steps: usize,
}

fn check_outputs(outputs: &[f64]) -> Result<()> {
    let increasing = |w: &[f64]| w[1].partial_cmp(&w[0]) == Some(std::cmp::Ordering::Greater);
    if outputs.windows(2).all(increasing) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "output times must be strictly increasing".into(),
        ))
    }
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `outputs[0]` through every time in
/// `outputs` (strictly increasing). `hook` runs every `renormalize_every`
/// accepted steps and may adjust the state in place.
pub fn solve<const N: usize, F, H>(
    mut rhs: F,
    y0: [f64; N],
    outputs: &[f64],
    config: &IntegratorConfig,
    mut hook: H,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    H: FnMut(&mut [f64; N]),
{
    config.validate()?;
    check_outputs(outputs)?;
    let mut states = Vec::with_capacity(outputs.len());
    let Some(&t_start) = outputs.first() else {
        return Ok(Solution {
            times: vec![],
            states,
            steps: 0,
        });
    };
    states.push(y0);
    let span = outputs[outputs.len() - 1] - t_start;
    let mut y = y0;
    let mut steps = 0usize;
    let mut since_hook = 0usize;
    let mut after_step = |y: &mut [f64; N], t: f64, steps: &mut usize| -> Result<()> {
        *steps += 1;
        since_hook += 1;
        if since_hook >= config.renormalize_every {
            hook(y);
            since_hook = 0;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integrator {
                at: t,
                reason: "non-finite state".into(),
            });
        }
        Ok(())
    };

    match config.method {
        Method::Rk4 { steps: total } => {
            let h_nominal = span / total as f64;
            for w in outputs.windows(2) {
                let n = (((w[1] - w[0]) / h_nominal).round() as usize).max(1);
                let h = (w[1] - w[0]) / n as f64;
                for k in 0..n {
                    let t = w[0] + k as f64 * h;
                    y = rk4_step(&mut rhs, t, &y, h);
                    after_step(&mut y, t + h, &mut steps)?;
                }
                states.push(y);
            }
        }
        Method::DormandPrince {
            rtol,
            atol,
            max_steps,
        } => {
            let mut t = t_start;
            let mut h = span * 1e-6;
            let mut k1 = rhs(t, &y);
            for &target in &outputs[1..] {
                while t < target {
                    if steps >= max_steps {
                        return Err(Error::Integrator {
                            at: t,
                            reason: format!("step limit {max_steps} reached (stiffness guard)"),
                        });
                    }
                    let remaining = target - t;
                    let last = h >= remaining * (1.0 - 1e-12);
                    let h_try = if last { remaining } else { h };
                    let (y_new, k_last, err) = dopri_step(&mut rhs, t, &y, &k1, h_try, rtol, atol);
                    if !err.is_finite() {
                        h *= 0.1;
                        if h < span * 1e-300 {
                            return Err(Error::Integrator {
                                at: t,
                                reason: "step size underflow".into(),
                            });
                        }
                        continue;
                    }
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if err <= 1.0 {
                        t = if last { target } else { t + h_try };
                        y = y_new;
                        k1 = k_last;
                        let before = y;
                        after_step(&mut y, t, &mut steps)?;
                        if y != before {
                            k1 = rhs(t, &y);
                        }
                        h = if last {
                            h.max(h_try * factor)
                        } else {
                            h_try * factor
                        };
                    } else {
                        h = h_try * factor.min(1.0);
                        if h <= f64::EPSILON * t.abs().max(span) {
                            return Err(Error::Integrator {
                                at: t,
                                reason: "step size underflow".into(),
                            });
                        }
                    }
                }
                states.push(y);
            }
        }
        Method::ExponentialMidpoint { .. } => {
            return Err(Error::InvalidParameter(
                "exponential_midpoint needs solve_linear or solve_with_propagator".into(),
            ))
        }
    }
    Ok(Solution {
        times: outputs.to_vec(),
        states,
        steps,
    })
}

/// [`solve`] for `y' = A(t)·y`. Runge–Kutta methods evaluate the product;
/// the exponential midpoint rule uses `A` directly.
pub fn solve_linear<const N: usize, G, H>(
    mut generator: G,
    y0: [f64; N],
    outputs: &[f64],
    config: &IntegratorConfig,
    hook: H,
) -> Result<Solution<N>>
where
    G: FnMut(f64) -> SMatrix<f64, N, N>,
    H: FnMut(&mut [f64; N]),
{
    if !matches!(config.method, Method::ExponentialMidpoint { .. }) {
        return solve(
            |t, y| (generator(t) * SMatrix::<f64, N, 1>::from(*y)).into(),
            y0,
            outputs,
            config,
            hook,
        );
    }
    let propagate = |t: f64, h: f64, y: &[f64; N]| -> [f64; N] {
        let a = generator(t + 0.5 * h);
        let a = DMatrix::from_column_slice(N, N, a.as_slice()) * h;
        let out = a.exp() * DVector::from_column_slice(y);
        std::array::from_fn(|i| out[i])
    };
    solve_with_propagator(propagate, y0, outputs, config, hook)
}

/// Adaptive stepping with a caller-supplied one-step map
/// `propagate(t, h, y) ≈ y(t + h)`, which must be symmetric and of second
/// order (the exponential midpoint rule or a variant of it). Only
/// [`Method::ExponentialMidpoint`] is accepted.
pub fn solve_with_propagator<const N: usize, P, H>(
    mut propagate: P,
    y0: [f64; N],
    outputs: &[f64],
    config: &IntegratorConfig,
    mut hook: H,
) -> Result<Solution<N>>
where
    P: FnMut(f64, f64, &[f64; N]) -> [f64; N],
    H: FnMut(&mut [f64; N]),
{
    let Method::ExponentialMidpoint {
        rtol,
        atol,
        max_steps,
    } = config.method
    else {
        return Err(Error::InvalidParameter(
            "a propagator can only drive exponential_midpoint".into(),
        ));
    };
    config.validate()?;
    check_outputs(outputs)?;
    let mut states = Vec::with_capacity(outputs.len());
    let Some(&t_start) = outputs.first() else {
        return Ok(Solution {
            times: vec![],
            states,
            steps: 0,
        });
    };
    states.push(y0);
    let span = outputs[outputs.len() - 1] - t_start;
    let mut y = y0;
    let (mut t, mut h) = (t_start, span * 1e-4);
    let (mut steps, mut since_hook) = (0usize, 0usize);
    for &target in &outputs[1..] {
        while t < target {
            if steps >= max_steps {
                return Err(Error::Integrator {
                    at: t,
                    reason: format!("step limit {max_steps} reached"),
                });
            }
            let remaining = target - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let h_try = if last { remaining } else { h };
            let full = propagate(t, h_try, &y);
            let half = propagate(t, 0.5 * h_try, &y);
            let two = propagate(t + 0.5 * h_try, 0.5 * h_try, &half);
            // the rule is symmetric, so the local error is Ch³ + O(h⁵): the
            // halves carry a third of the gap and extrapolation removes it
            let mut acc = 0.0;
            for i in 0..N {
                let scale = atol + rtol * y[i].abs().max(two[i].abs());
                acc += ((two[i] - full[i]) / (3.0 * scale)).powi(2);
            }
            let err = (acc / N as f64).sqrt();
            if !err.is_finite() {
                h = h_try * 0.1;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + h_try };
                y = std::array::from_fn(|i| two[i] + (two[i] - full[i]) / 3.0);
                steps += 1;
                since_hook += 1;
                if since_hook >= config.renormalize_every {
                    hook(&mut y);
                    since_hook = 0;
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Integrator {
                        at: t,
                        reason: "non-finite state".into(),
                    });
                }
                h = if last {
                    h.max(h_try * factor)
                } else {
                    h_try * factor
                };
            } else {
                h = h_try * factor.min(1.0);
                if h <= f64::EPSILON * t.abs().max(span) {
                    return Err(Error::Integrator {
                        at: t,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
        states.push(y);
    }
    Ok(Solution {
        times: outputs.to_vec(),
        states,
        steps,
    })
}

fn rk4_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, &[(0.5 * h, &k1)]));
    let k3 = rhs(t + 0.5 * h, &axpy(y, &[(0.5 * h, &k2)]));
    let k4 = rhs(t + h, &axpy(y, &[(h, &k3)]));
    axpy(
        y,
        &[
            (h / 6.0, &k1),
            (h / 3.0, &k2),
            (h / 3.0, &k3),
            (h / 6.0, &k4),
        ],
    )
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[allow(clippy::too_many_arguments)]
fn dopri_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
) -> ([f64; N], [f64; N], f64)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k2 = rhs(t + C2 * h, &axpy(y, &[(h * A21, k1)]));
    let k3 = rhs(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]));
    let k4 = rhs(
        t + C4 * h,
        &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]),
    );
    let k5 = rhs(
        t + C5 * h,
        &axpy(
            y,
            &[
                (h * A51, k1),
                (h * A52, &k2),
                (h * A53, &k3),
                (h * A54, &k4),
            ],
        ),
    );
    let k6 = rhs(
        t + h,
        &axpy(
            y,
            &[
                (h * A61, k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ],
        ),
    );
    let y_new = axpy(
        y,
        &[
            (h * B1, k1),
            (h * B3, &k3),
            (h * B4, &k4),
            (h * B5, &k5),
            (h * B6, &k6),
        ],
    );
    let k7 = rhs(t + h, &y_new);
    let mut acc = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
        acc += (e / scale).powi(2);
    }
    (y_new, k7, (acc / N as f64).sqrt())
}
