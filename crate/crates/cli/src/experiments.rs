// SPDX-License-Identifier: Apache-2.0

//! Named experiments. Each one expands its grid, evaluates the points on
//! the current rayon pool and returns tables in grid order.

use std::f64::consts::PI;

use rayon::prelude::*;
use zeno_core::blockade::{
    classify_regime, critical_margin, observed_regime, simulate_offdiag, BlockadeParams,
};
use zeno_core::channels::Family;
use zeno_core::continuum::{
    integrate, integrate_adiabatic, integrate_dephasing, integrate_destruction, LindbladSpec,
};
use zeno_core::hypercube::Hypercube;
use zeno_core::model::Schedule;
use zeno_core::ode::IntegratorConfig;
use zeno_core::protocols::{
    audit_scale_invariance, run_multistage_walk, run_operation_sequence, run_trajectories,
    zeno_excitation_scaling, AuditProtocol, ProtocolConfig, ProtocolTrace,
};

use crate::config::{grid_or, param_or, ExperimentConfig, ExperimentId};
use crate::error::CliError;
use crate::table::{Cell, Table};

/// Knobs that come from the command line rather than the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
}

/// Human-readable reference for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Description {
    pub id: ExperimentId,
    pub summary: &'static str,
    /// Config keys read, with their defaults.
    pub reads: Vec<(&'static str, String)>,
    pub outputs: Vec<(String, Vec<String>)>,
}

fn powers_of_two(max_exp: u32) -> Vec<usize> {
    (0..=max_exp).map(|k| 1usize << k).collect()
}

fn default_t_scale(id: ExperimentId) -> Vec<f64> {
    match id {
        ExperimentId::Fig3 => (1..=200).map(|k| 0.1 * k as f64).collect(),
        ExperimentId::Fig6 | ExperimentId::Fig7 => vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
        _ => vec![PI / 4.0, PI / 2.0, PI, 2.0 * PI],
    }
}

fn default_m(id: ExperimentId) -> Vec<usize> {
    match id {
        ExperimentId::Fig2 => (1..=100).collect(),
        ExperimentId::Fig5 => (1..=64).collect(),
        ExperimentId::ZenoScaling => (3..=10).map(|k| 1usize << k).collect(),
        _ => powers_of_two(12),
    }
}

fn default_phi(id: ExperimentId) -> Vec<f64> {
    match id {
        ExperimentId::Fig5 => vec![
            PI / 4.0,
            PI / 2.0,
            3.0 * PI / 4.0,
            PI,
            5.0 * PI / 4.0,
            3.0 * PI / 2.0,
        ],
        _ => vec![PI / 16.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, PI / 2.0],
    }
}

const DEFAULT_KAPPA0: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
const DEFAULT_G_MIN: [f64; 3] = [1e-1, 1e-2, 1e-3];
const DEFAULT_G: [f64; 5] = [0.2, 0.5, 1.0, 2.0, 5.0];
const DEFAULT_GAMMA: [f64; 5] = [0.1, 0.5, 2.0, 8.0, 30.0];
const DEFAULT_LIMIT_M: usize = 10_000;
const DEFAULT_N_QUBITS: usize = 20;
const DEFAULT_S_POINTS: usize = 400;
const BLOCKADE_SAMPLES: usize = 4000;
const BLOCKADE_RTOL: f64 = 1e-12;
const BLOCKADE_IM0: f64 = 0.5;

fn fmt_list(v: &[f64]) -> String {
    if v.len() > 6 {
        let step = v[1] - v[0];
        if v.windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs())
        {
            return format!(
                "{}..={} in steps of {step:.6} ({} points)",
                v[0],
                v[v.len() - 1],
                v.len()
            );
        }
    }
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_ints(v: &[usize]) -> String {
    if v.len() > 6 && v.windows(2).all(|w| w[1] == w[0] + 1) {
        return format!("{}..={}", v[0], v[v.len() - 1]);
    }
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn trace_columns() -> Vec<String> {
    cols(&["step", "tau", "p_marked", "p_destroyed", "purity"])
}

fn fig10_columns(n: usize) -> Vec<String> {
    let mut c = vec!["s".to_string()];
    c.extend((0..=n).map(|k| format!("e{k}")));
    c.extend((0..=n).map(|k| format!("marked_overlap{k}")));
    c.extend((0..=n).map(|k| format!("omega_overlap{k}")));
    c
}

pub fn describe(id: ExperimentId) -> Description {
    use ExperimentId as E;
    let t = || ("grid.t_scale", fmt_list(&default_t_scale(id)));
    let m = || ("grid.m", fmt_ints(&default_m(id)));
    let phi = || ("grid.phi", fmt_list(&default_phi(id)));
    let kappa = || ("grid.kappa0", fmt_list(&DEFAULT_KAPPA0));
    let limit = || ("params.limit_m", DEFAULT_LIMIT_M.to_string());
    let name = id.as_str().replace('-', "_");
    let (summary, reads, outputs) = match id {
        E::Fig2 => (
            "multi-stage quantum walk against stage count",
            vec![t(), m(), limit()],
            vec![(
                name,
                cols(&[
                    "t_scale",
                    "m_stage",
                    "p_marked",
                    "p_destroyed",
                    "purity",
                    "adiabatic_limit",
                ]),
            )],
        ),
        E::Fig3 => (
            "adiabatic evolution against total scaled time",
            vec![
                t(),
                limit(),
                ("integrator.*", "dormand_prince, rtol 1e-9".into()),
            ],
            vec![(
                name,
                cols(&[
                    "t_scale",
                    "p_marked",
                    "p_destroyed",
                    "purity",
                    "p_marked_multistage",
                ]),
            )],
        ),
        E::Fig4 => (
            "full and fixed-total-angle dephasing and destruction sequences",
            vec![m(), ("params.phi_total", fmt_list(&[PI / 2.0]))],
            vec![(
                name,
                cols(&[
                    "m",
                    "p_marked_measurement",
                    "p_marked_destructive",
                    "p_destroyed_destructive",
                    "p_marked_dephasing_fixed_total",
                    "p_marked_destruction_fixed_total",
                    "p_destroyed_destruction_fixed_total",
                ]),
            )],
        ),
        E::Fig5 => (
            "repeated phase rotations at fixed angle",
            vec![phi(), m()],
            vec![(name, cols(&["phi", "m", "p_marked", "purity"]))],
        ),
        E::Fig6 => (
            "continuous dephasing Lindblad evolution",
            vec![
                kappa(),
                t(),
                ("integrator.*", "exponential_midpoint, rtol 1e-9".into()),
            ],
            vec![(name, cols(&["kappa0", "t_scale", "p_marked", "purity"]))],
        ),
        E::Fig7 => (
            "continuous destruction Lindblad evolution",
            vec![
                kappa(),
                t(),
                ("integrator.*", "exponential_midpoint, rtol 1e-9".into()),
            ],
            vec![(
                name,
                cols(&["kappa0", "t_scale", "p_marked", "p_destroyed", "purity"]),
            )],
        ),
        E::Fig8 => (
            "partial destruction sequences at fixed angle per operation",
            vec![phi(), m()],
            vec![(name, cols(&["phi", "m", "p_marked", "p_destroyed"]))],
        ),
        E::Fig9 => (
            "partial dephasing sequences at fixed angle per operation",
            vec![phi(), m()],
            vec![(name, cols(&["phi", "m", "p_marked", "purity"]))],
        ),
        E::Fig10 => (
            "hypercube search spectrum in the symmetric subspace",
            vec![
                ("params.n_qubits", DEFAULT_N_QUBITS.to_string()),
                ("params.s_points", DEFAULT_S_POINTS.to_string()),
                ("params.sign", "negative".into()),
                ("params.scale", "extensive".into()),
            ],
            vec![(name, fig10_columns(DEFAULT_N_QUBITS))],
        ),
        E::Invariance => (
            "raw-unit reruns across g_min, one protocol per family and variant",
            vec![("grid.g_min", fmt_list(&DEFAULT_G_MIN))],
            vec![(name, cols(&["protocol", "max_deviation"]))],
        ),
        E::ZenoScaling => (
            "leaked probability of full-discrete sequences against m",
            vec![m()],
            vec![
                (
                    name.clone(),
                    cols(&["family", "m", "leaked", "p_destroyed"]),
                ),
                (format!("{name}_fit"), cols(&["family", "exponent"])),
            ],
        ),
        E::BlockadeGrid => (
            "Zeno blockade regimes on a (G, gamma) grid",
            vec![
                ("grid.g", fmt_list(&DEFAULT_G)),
                ("grid.gamma", fmt_list(&DEFAULT_GAMMA)),
                ("params.photons_m", "1".into()),
                ("params.photons_n", "1".into()),
                ("params.c", "0".into()),
                ("params.t_max", "40/omega + 40/gamma".into()),
                (
                    "integrator.*",
                    format!("dormand_prince, rtol {BLOCKADE_RTOL:e}, samples {BLOCKADE_SAMPLES}"),
                ),
            ],
            vec![
                (
                    "blockade_grid".into(),
                    cols(&[
                        "g",
                        "gamma",
                        "omega",
                        "critical_margin",
                        "predicted_regime",
                        "observed_regime",
                    ]),
                ),
                (
                    "blockade_series".into(),
                    cols(&["g", "gamma", "t", "y", "regime"]),
                ),
            ],
        ),
        E::Custom => (
            "one protocol or Lindblad spec from the [custom] table",
            vec![
                ("custom.protocol | custom.lindblad", "required".into()),
                ("custom.trajectories", "0".into()),
                ("custom.seed", "0".into()),
                (
                    "integrator.*",
                    "dormand_prince, rtol 1e-9, samples 1000".into(),
                ),
            ],
            vec![
                (name.clone(), trace_columns()),
                (
                    format!("{name}_trajectories"),
                    cols(&[
                        "runs",
                        "seed",
                        "p_marked",
                        "p_destroyed",
                        "exact_p_marked",
                        "exact_p_destroyed",
                    ]),
                ),
            ],
        ),
    };
    Description {
        id,
        summary,
        reads,
        outputs,
    }
}

fn runtime(id: ExperimentId, point: String) -> impl FnOnce(zeno_core::Error) -> CliError {
    move |source| CliError::Runtime {
        experiment: id.as_str(),
        point,
        source,
    }
}

fn table_for(id: ExperimentId, index: usize, columns_override: Option<Vec<String>>) -> Table {
    let (name, columns) = describe(id).outputs.swap_remove(index);
    Table::new(&name, columns_override.unwrap_or(columns))
}

fn cartesian<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .collect()
}

/// Runs the configured experiment on the current rayon pool.
pub fn run(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<Table>, CliError> {
    let id = config.experiment;
    let trajectory_mode = config
        .custom
        .as_ref()
        .is_some_and(|c| c.trajectories > 0 && c.protocol.is_some());
    if options.seed.is_some() && !trajectory_mode {
        return Err(CliError::Usage(
            "--seed only applies to custom experiments with trajectories > 0".into(),
        ));
    }
    let g = &config.grid;
    let p = &config.params;
    match id {
        ExperimentId::Fig2 => {
            let t_list = grid_or(&g.t_scale, default_t_scale(id));
            let m_list = grid_or(&g.m, default_m(id));
            let limit_m = param_or(&p.limit_m, DEFAULT_LIMIT_M);
            let limits = t_list
                .par_iter()
                .map(|&t| {
                    run_multistage_walk(limit_m, t)
                        .map(|tr| tr.final_record().p_marked)
                        .map_err(runtime(id, format!("t_scale={t}, m_stage={limit_m}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let points = cartesian(&(0..t_list.len()).collect::<Vec<_>>(), &m_list);
            let rows = points
                .par_iter()
                .map(|&(ti, m)| {
                    let t = t_list[ti];
                    let r = *run_multistage_walk(m, t)
                        .map_err(runtime(id, format!("t_scale={t}, m_stage={m}")))?
                        .final_record();
                    Ok(vec![
                        t.into(),
                        m.into(),
                        r.p_marked.into(),
                        r.p_destroyed.into(),
                        r.purity.into(),
                        limits[ti].into(),
                    ])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![filled(table_for(id, 0, None), rows)])
        }
        ExperimentId::Fig3 => {
            let t_list = grid_or(&g.t_scale, default_t_scale(id));
            let limit_m = param_or(&p.limit_m, DEFAULT_LIMIT_M);
            let integ = config
                .integrator
                .build(IntegratorConfig::default().with_samples(2));
            let rows = t_list
                .par_iter()
                .map(|&t| {
                    let point = || format!("t_scale={t}");
                    let r = *integrate_adiabatic(t, &Schedule::Optimal, &integ)
                        .map_err(runtime(id, point()))?
                        .final_record();
                    let walk = run_multistage_walk(limit_m, t).map_err(runtime(id, point()))?;
                    Ok(vec![
                        t.into(),
                        r.p_marked.into(),
                        r.p_destroyed.into(),
                        r.purity.into(),
                        walk.final_record().p_marked.into(),
                    ])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![filled(table_for(id, 0, None), rows)])
        }
        ExperimentId::Fig4 => {
            let m_list = grid_or(&g.m, default_m(id));
            let phi_total = param_or(&p.phi_total, PI / 2.0);
            let rows = m_list
                .par_iter()
                .map(|&m| {
                    let run = |c: ProtocolConfig| {
                        run_operation_sequence(&c)
                            .map(|tr| *tr.final_record())
                            .map_err(runtime(id, format!("m={m}")))
                    };
                    let meas = run(ProtocolConfig::full(Family::Decoherence, m))?;
                    let dest = run(ProtocolConfig::full(Family::Destruction, m))?;
                    let deph_ft = run(ProtocolConfig::fixed_total(
                        Family::Decoherence,
                        m,
                        phi_total,
                    ))?;
                    let dest_ft = run(ProtocolConfig::fixed_total(
                        Family::Destruction,
                        m,
                        phi_total,
                    ))?;
                    Ok(vec![
                        m.into(),
                        meas.p_marked.into(),
                        dest.p_marked.into(),
                        dest.p_destroyed.into(),
                        deph_ft.p_marked.into(),
                        dest_ft.p_marked.into(),
                        dest_ft.p_destroyed.into(),
                    ])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![filled(table_for(id, 0, None), rows)])
        }
        ExperimentId::Fig5 | ExperimentId::Fig8 | ExperimentId::Fig9 => {
            let family = match id {
                ExperimentId::Fig5 => Family::PhaseRotation,
                ExperimentId::Fig8 => Family::Destruction,
                _ => Family::Decoherence,
            };
            let phi_list = grid_or(&g.phi, default_phi(id));
            let m_list = grid_or(&g.m, default_m(id));
            let rows = cartesian(&phi_list, &m_list)
                .par_iter()
                .map(|&(phi, m)| {
                    let r = *run_operation_sequence(&ProtocolConfig::partial(family, m, phi))
                        .map_err(runtime(id, format!("phi={phi}, m={m}")))?
                        .final_record();
                    let last = if family == Family::Destruction {
                        r.p_destroyed
                    } else {
                        r.purity
                    };
                    Ok(vec![phi.into(), m.into(), r.p_marked.into(), last.into()])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![filled(table_for(id, 0, None), rows)])
        }
        ExperimentId::Fig6 | ExperimentId::Fig7 => {
            let k_list = grid_or(&g.kappa0, DEFAULT_KAPPA0.to_vec());
            let t_list = grid_or(&g.t_scale, default_t_scale(id));
            let integ = config
                .integrator
                .build(IntegratorConfig::exponential_midpoint(1e-9).with_samples(2));
            let rows = cartesian(&k_list, &t_list)
                .par_iter()
                .map(|&(k, t)| {
                    let point = || format!("kappa0={k}, t_scale={t}");
                    let row = if id == ExperimentId::Fig6 {
                        let r = *integrate_dephasing(&LindbladSpec::dephasing(k, t), &integ)
                            .map_err(runtime(id, point()))?
                            .final_record();
                        vec![k.into(), t.into(), r.p_marked.into(), r.purity.into()]
                    } else {
                        let r = *integrate_destruction(&LindbladSpec::destruction(k, t), &integ)
                            .map_err(runtime(id, point()))?
                            .final_record();
                        vec![
                            k.into(),
                            t.into(),
                            r.p_marked.into(),
                            r.p_destroyed.into(),
                            r.purity.into(),
                        ]
                    };
                    Ok(row)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![filled(table_for(id, 0, None), rows)])
        }
        ExperimentId::Fig10 => {
            let n = param_or(&p.n_qubits, DEFAULT_N_QUBITS);
            let points = param_or(&p.s_points, DEFAULT_S_POINTS);
            let mut cube = Hypercube::new(n);
            if let Some(sign) = p.sign {
                cube = cube.with_sign(sign);
            }
            if let Some(scale) = p.scale {
                cube = cube.with_scale(scale);
            }
            cube.validate().map_err(runtime(id, format!("n={n}")))?;
            let rows = (0..points)
                .into_par_iter()
                .map(|i| {
                    let s = i as f64 / (points - 1) as f64;
                    let slice = cube
                        .spectrum(s)
                        .map_err(runtime(id, format!("n={n}, s={s}")))?;
                    let mut row: Vec<Cell> = vec![s.into()];
                    row.extend(slice.eigenvalues.iter().map(|&v| Cell::from(v)));
                    row.extend(slice.marked_overlap.iter().map(|&v| Cell::from(v)));
                    row.extend(slice.omega_overlap.iter().map(|&v| Cell::from(v)));
                    Ok(row)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![filled(table_for(id, 0, Some(fig10_columns(n))), rows)])
        }
        ExperimentId::Invariance => {
            let g_min = grid_or(&g.g_min, DEFAULT_G_MIN.to_vec());
            let protocols = invariance_protocols();
            let rows = protocols
                .par_iter()
                .map(|(name, protocol)| {
                    let d = audit_scale_invariance(protocol, &g_min)
                        .map_err(runtime(id, format!("protocol={name}")))?;
                    Ok(vec![Cell::from(*name), d.into()])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![filled(table_for(id, 0, None), rows)])
        }
        ExperimentId::ZenoScaling => {
            let m_list = grid_or(&g.m, default_m(id));
            let families = [
                Family::PhaseRotation,
                Family::Decoherence,
                Family::Destruction,
            ];
            let results = families
                .par_iter()
                .map(|&f| {
                    zeno_excitation_scaling(f, &m_list)
                        .map_err(runtime(id, format!("family={}", family_name(f))))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut rows = table_for(id, 0, None);
            let mut fit = table_for(id, 1, None);
            for (&f, res) in families.iter().zip(&results) {
                for r in &res.rows {
                    rows.push(vec![
                        family_name(f).into(),
                        r.m.into(),
                        r.leaked.into(),
                        r.p_destroyed.into(),
                    ]);
                }
                if let Some(alpha) = res.exponent {
                    fit.push(vec![family_name(f).into(), alpha.into()]);
                }
            }
            Ok(vec![rows, fit])
        }
        ExperimentId::BlockadeGrid => run_blockade(config),
        ExperimentId::Custom => run_custom(config, options),
    }
}

fn filled(mut table: Table, rows: Vec<Vec<Cell>>) -> Table {
    for row in rows {
        table.push(row);
    }
    table
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::PhaseRotation => "phase_rotation",
        Family::Decoherence => "decoherence",
        Family::Destruction => "destruction",
    }
}

fn invariance_protocols() -> Vec<(&'static str, AuditProtocol)> {
    vec![
        (
            "multistage_walk",
            AuditProtocol::MultistageWalk {
                m_stage: 100,
                t_scale: PI,
            },
        ),
        (
            "phase_flips",
            AuditProtocol::Sequence(ProtocolConfig::full(Family::PhaseRotation, 16)),
        ),
        (
            "measurements",
            AuditProtocol::Sequence(ProtocolConfig::full(Family::Decoherence, 100)),
        ),
        (
            "partial_dephasing",
            AuditProtocol::Sequence(ProtocolConfig::partial(Family::Decoherence, 100, PI / 4.0)),
        ),
        (
            "destructive_measurements",
            AuditProtocol::Sequence(ProtocolConfig::full(Family::Destruction, 100)),
        ),
        (
            "partial_destruction",
            AuditProtocol::Sequence(ProtocolConfig::partial(Family::Destruction, 100, PI / 4.0)),
        ),
    ]
}

fn run_blockade(config: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    let id = ExperimentId::BlockadeGrid;
    let (g, p) = (&config.grid, &config.params);
    let g_list = grid_or(&g.g, DEFAULT_G.to_vec());
    let gamma_list = grid_or(&g.gamma, DEFAULT_GAMMA.to_vec());
    let m = param_or(&p.photons_m, 1);
    let n = param_or(&p.photons_n, 1);
    let c = param_or(&p.c, 0.0);
    let t_max = p.t_max.as_ref().map(|t| *t.get_ref());
    let integ = config
        .integrator
        .build(IntegratorConfig::dormand_prince(BLOCKADE_RTOL).with_samples(BLOCKADE_SAMPLES));
    let cells = cartesian(&g_list, &gamma_list)
        .par_iter()
        .map(|&(gg, gamma)| {
            let params = BlockadeParams::new(m, n, gg, gamma, c);
            let horizon = t_max.unwrap_or_else(|| default_horizon(&params));
            let series = simulate_offdiag(&params, BLOCKADE_IM0, 0.0, horizon, &integ)
                .map_err(runtime(id, format!("g={gg}, gamma={gamma}")))?;
            Ok((params, series))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut grid = table_for(id, 0, None);
    let mut series_table = table_for(id, 1, None);
    for (params, series) in &cells {
        let predicted = classify_regime(params).as_str();
        grid.push(vec![
            params.g.into(),
            params.gamma.into(),
            params.omega().into(),
            critical_margin(params).into(),
            predicted.into(),
            observed_regime(&series.times, &series.y, BLOCKADE_IM0)
                .as_str()
                .into(),
        ]);
        for (&t, &y) in series.times.iter().zip(&series.y) {
            series_table.push(vec![
                params.g.into(),
                params.gamma.into(),
                t.into(),
                y.into(),
                predicted.into(),
            ]);
        }
    }
    Ok(vec![grid, series_table])
}

/// `40/ω + 40/γ`, dropping zero rates.
fn default_horizon(params: &BlockadeParams) -> f64 {
    let term = |rate: f64| if rate > 0.0 { 40.0 / rate } else { 0.0 };
    let t = term(params.omega()) + term(params.gamma);
    if t > 0.0 {
        t
    } else {
        40.0
    }
}

fn trace_table(name: &str, trace: &ProtocolTrace) -> Table {
    let mut table = Table::new(name, trace_columns());
    for r in &trace.records {
        table.push(vec![
            r.step.into(),
            r.tau.into(),
            r.p_marked.into(),
            r.p_destroyed.into(),
            r.purity.into(),
        ]);
    }
    table
}

fn run_custom(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<Table>, CliError> {
    let id = ExperimentId::Custom;
    let custom = config
        .custom
        .as_ref()
        .ok_or_else(|| CliError::Usage("experiment \"custom\" needs a [custom] table".into()))?;
    let desc = describe(id);
    if let Some(spec) = &custom.lindblad {
        let spec = spec.get_ref();
        let integ = config.integrator.build(IntegratorConfig::default());
        let trace = integrate(spec, &integ).map_err(runtime(
            id,
            format!(
                "lindblad kappa0={}, t_scale={}",
                spec.kappa0(),
                spec.t_scale
            ),
        ))?;
        return Ok(vec![trace_table(&desc.outputs[0].0, &trace)]);
    }
    let protocol = custom
        .protocol
        .as_ref()
        .ok_or_else(|| CliError::Usage("[custom] needs protocol or lindblad".into()))?
        .get_ref();
    let point = || format!("protocol m_ops={}", protocol.m_ops);
    let trace = run_operation_sequence(protocol).map_err(runtime(id, point()))?;
    let mut tables = vec![trace_table(&desc.outputs[0].0, &trace)];
    if custom.trajectories > 0 {
        let seed = options.seed.or(custom.seed).unwrap_or(0);
        let est =
            run_trajectories(protocol, custom.trajectories, seed).map_err(runtime(id, point()))?;
        let exact = trace.final_record();
        let mut t = table_for(id, 1, None);
        t.push(vec![
            est.runs.into(),
            seed.into(),
            est.p_marked.into(),
            est.p_destroyed.into(),
            exact.p_marked.into(),
            exact.p_destroyed.into(),
        ]);
        tables.push(t);
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn described_outputs_match_emitted_tables() {
        let mut config = ExperimentConfig::minimal(ExperimentId::Fig5);
        config.grid.m = Some(toml::Spanned::new(0..0, vec![1, 2]));
        let tables = run(&config, RunOptions::default()).unwrap();
        let desc = describe(ExperimentId::Fig5);
        assert_eq!(tables.len(), desc.outputs.len());
        assert_eq!(tables[0].header, desc.outputs[0].1);
        assert_eq!(
            tables[0].rows.len(),
            2 * default_phi(ExperimentId::Fig5).len()
        );
    }

    #[test]
    fn fig10_header_tracks_qubit_count() {
        assert_eq!(fig10_columns(20).len(), 1 + 3 * 21);
        assert_eq!(fig10_columns(3)[1..5], cols(&["e0", "e1", "e2", "e3"]));
    }

    #[test]
    fn horizon_survives_zero_rates() {
        assert_eq!(
            default_horizon(&BlockadeParams::new(1, 1, 0.0, 0.0, 0.0)),
            40.0
        );
        assert_eq!(
            default_horizon(&BlockadeParams::new(1, 1, 0.0, 2.0, 0.0)),
            20.0
        );
    }
}
