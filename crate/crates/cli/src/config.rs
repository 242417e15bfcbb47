// SPDX-License-Identifier: Apache-2.0

//! TOML experiment configuration and its validation.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Spanned;
use zeno_core::continuum::LindbladSpec;
use zeno_core::hypercube::{MarkedScale, MarkedSign, MAX_QUBITS};
use zeno_core::ode::{IntegratorConfig, Method};
use zeno_core::protocols::ProtocolConfig;

use crate::error::{CliError, ConfigIssue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Invariance,
    ZenoScaling,
    BlockadeGrid,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 13] = [
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
        ExperimentId::Fig7,
        ExperimentId::Fig8,
        ExperimentId::Fig9,
        ExperimentId::Fig10,
        ExperimentId::Invariance,
        ExperimentId::ZenoScaling,
        ExperimentId::BlockadeGrid,
        ExperimentId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
            ExperimentId::Fig7 => "fig7",
            ExperimentId::Fig8 => "fig8",
            ExperimentId::Fig9 => "fig9",
            ExperimentId::Fig10 => "fig10",
            ExperimentId::Invariance => "invariance",
            ExperimentId::ZenoScaling => "zeno-scaling",
            ExperimentId::BlockadeGrid => "blockade-grid",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sweep axes. Every field is optional; an experiment falls back to its
/// documented default for the axes it reads and ignores the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_scale: Option<Spanned<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Spanned<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Spanned<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa0: Option<Spanned<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_min: Option<Spanned<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Spanned<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Spanned<Vec<f64>>>,
}

/// Scalar settings shared by several experiments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Stage count standing in for the adiabatic limit (fig2, fig3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_m: Option<Spanned<usize>>,
    /// Total angle of the fixed-total variants (fig4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_total: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<Spanned<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_points: Option<Spanned<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<MarkedSign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<MarkedScale>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons_m: Option<Spanned<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons_n: Option<Spanned<u32>>,
    /// Linear coupling `c` of the blockade model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<Spanned<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    DormandPrince,
    Rk4,
    ExponentialMidpoint,
}

/// Integrator overrides; unset fields keep the experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Spanned<MethodName>>,
    /// Relative tolerance of the adaptive methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<Spanned<f64>>,
    /// Step count of `rk4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Spanned<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Spanned<usize>>,
}

impl IntegratorSettings {
    /// `base` with the overrides applied.
    pub fn build(&self, base: IntegratorConfig) -> IntegratorConfig {
        let base_rtol = match base.method {
            Method::DormandPrince { rtol, .. } | Method::ExponentialMidpoint { rtol, .. } => rtol,
            Method::Rk4 { .. } => 1e-9,
        };
        let rtol = param_or(&self.rtol, base_rtol);
        let method = self.method.as_ref().map(|m| *m.get_ref());
        let mut cfg = match (method, &base.method) {
            (Some(MethodName::Rk4), _) => IntegratorConfig::rk4(param_or(&self.steps, 10_000)),
            (Some(MethodName::DormandPrince), _) => IntegratorConfig::dormand_prince(rtol),
            (Some(MethodName::ExponentialMidpoint), _) => {
                IntegratorConfig::exponential_midpoint(rtol)
            }
            (None, Method::Rk4 { steps }) => IntegratorConfig::rk4(param_or(&self.steps, *steps)),
            (None, Method::DormandPrince { .. }) if self.rtol.is_some() => {
                IntegratorConfig::dormand_prince(rtol)
            }
            (None, Method::ExponentialMidpoint { .. }) if self.rtol.is_some() => {
                IntegratorConfig::exponential_midpoint(rtol)
            }
            (None, _) => base,
        };
        cfg.samples = param_or(&self.samples, base.samples);
        cfg
    }
}

/// Free-form run of a single protocol or Lindblad spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Custom {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Spanned<ProtocolConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<Spanned<LindbladSpec>>,
    /// Sampled unravellings of `protocol`; 0 keeps the ensemble-exact run.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub trajectories: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Output directory, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "is_default")]
    pub integrator: IntegratorSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<Custom>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl ExperimentConfig {
    pub fn minimal(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            output: None,
            grid: Grid::default(),
            params: Params::default(),
            integrator: IntegratorSettings::default(),
            custom: None,
        }
    }

    /// Parses and validates; on failure every problem found is reported.
    pub fn parse(source: &str, origin: &Path) -> Result<Self, CliError> {
        let locate = |span: Option<std::ops::Range<usize>>| span.map(|s| line_of(source, s.start));
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| {
            CliError::Config(vec![ConfigIssue {
                origin: origin.to_path_buf(),
                line: locate(e.span()),
                message: e.message().trim().to_string(),
            }])
        })?;
        let issues: Vec<ConfigIssue> = config
            .check()
            .into_iter()
            .map(|(span, message)| ConfigIssue {
                origin: origin.to_path_buf(),
                line: locate(span),
                message,
            })
            .collect();
        if issues.is_empty() {
            Ok(config)
        } else {
            Err(CliError::Config(issues))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(vec![ConfigIssue {
                origin: path.to_path_buf(),
                line: None,
                message: format!("cannot read config: {e}"),
            }])
        })?;
        Self::parse(&source, path)
    }

    /// Serialises back to TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("configs always serialise")
    }

    /// Range checks, each paired with the span of the offending value.
    fn check(&self) -> Vec<(Option<std::ops::Range<usize>>, String)> {
        let mut out = vec![];
        let g = &self.grid;
        check_grid(&mut out, "grid.t_scale", &g.t_scale, |v| {
            (*v > 0.0 && v.is_finite())
                .then_some(())
                .ok_or("must be positive and finite")
        });
        check_grid(&mut out, "grid.m", &g.m, |v| {
            (*v >= 1).then_some(()).ok_or("must be at least 1")
        });
        check_grid(&mut out, "grid.phi", &g.phi, |v| {
            (0.0..2.0 * PI)
                .contains(v)
                .then_some(())
                .ok_or("must lie in [0, 2π)")
        });
        check_grid(&mut out, "grid.kappa0", &g.kappa0, |v| {
            (*v >= 0.0 && v.is_finite())
                .then_some(())
                .ok_or("must be non-negative and finite")
        });
        check_grid(&mut out, "grid.g_min", &g.g_min, |v| {
            (*v > 0.0 && *v <= 1.0)
                .then_some(())
                .ok_or("must lie in (0, 1]")
        });
        check_grid(&mut out, "grid.g", &g.g, |v| {
            (*v >= 0.0 && v.is_finite())
                .then_some(())
                .ok_or("must be non-negative and finite")
        });
        check_grid(&mut out, "grid.gamma", &g.gamma, |v| {
            (*v >= 0.0 && v.is_finite())
                .then_some(())
                .ok_or("must be non-negative and finite")
        });
        if let Some(m) = &g.m {
            if m.get_ref().windows(2).any(|w| w[1] <= w[0]) {
                out.push((Some(m.span()), "grid.m must be strictly increasing".into()));
            }
        }
        if let Some(g_min) = &g.g_min {
            let mut v = g_min.get_ref().clone();
            v.sort_by(f64::total_cmp);
            v.dedup();
            if v.len() < 2 {
                out.push((
                    Some(g_min.span()),
                    "grid.g_min needs two distinct values".into(),
                ));
            }
        }

        let p = &self.params;
        check_scalar(
            &mut out,
            "params.limit_m",
            &p.limit_m,
            |v| *v >= 1,
            "must be at least 1",
        );
        check_scalar(
            &mut out,
            "params.phi_total",
            &p.phi_total,
            |v| (0.0..2.0 * PI).contains(v),
            "must lie in [0, 2π)",
        );
        check_scalar(
            &mut out,
            "params.n_qubits",
            &p.n_qubits,
            |v| (1..=MAX_QUBITS).contains(v),
            "must lie in [1, 64]",
        );
        check_scalar(
            &mut out,
            "params.s_points",
            &p.s_points,
            |v| *v >= 2,
            "must be at least 2",
        );
        check_scalar(
            &mut out,
            "params.photons_m",
            &p.photons_m,
            |v| *v >= 1,
            "must be at least 1",
        );
        check_scalar(
            &mut out,
            "params.photons_n",
            &p.photons_n,
            |v| *v >= 1,
            "must be at least 1",
        );
        check_scalar(
            &mut out,
            "params.c",
            &p.c,
            |v| *v >= 0.0 && v.is_finite(),
            "must be non-negative and finite",
        );
        check_scalar(
            &mut out,
            "params.t_max",
            &p.t_max,
            |v| *v > 0.0 && v.is_finite(),
            "must be positive and finite",
        );

        let i = &self.integrator;
        check_scalar(
            &mut out,
            "integrator.rtol",
            &i.rtol,
            |v| *v > 0.0 && *v < 1.0,
            "must lie in (0, 1)",
        );
        check_scalar(
            &mut out,
            "integrator.steps",
            &i.steps,
            |v| *v >= 100,
            "must be at least 100",
        );
        check_scalar(
            &mut out,
            "integrator.samples",
            &i.samples,
            |v| *v >= 2,
            "must be at least 2",
        );
        let method = i.method.as_ref().map(|m| *m.get_ref());
        if let (Some(steps), Some(m)) = (&i.steps, method) {
            if m != MethodName::Rk4 {
                out.push((
                    Some(steps.span()),
                    "integrator.steps is only read by method = \"rk4\"".into(),
                ));
            }
        }
        if let (Some(rtol), Some(MethodName::Rk4)) = (&i.rtol, method) {
            out.push((
                Some(rtol.span()),
                "integrator.rtol is not read by method = \"rk4\"".into(),
            ));
        }

        match (&self.custom, self.experiment) {
            (Some(custom), ExperimentId::Custom) => check_custom(&mut out, custom),
            (None, ExperimentId::Custom) => {
                out.push((None, "experiment \"custom\" needs a [custom] table".into()))
            }
            (Some(_), id) => out.push((
                None,
                format!("[custom] is only read by \"custom\", not \"{id}\""),
            )),
            (None, _) => {}
        }
        out
    }
}

fn check_custom(out: &mut Vec<(Option<std::ops::Range<usize>>, String)>, custom: &Custom) {
    match (&custom.protocol, &custom.lindblad) {
        (Some(protocol), None) => {
            if let Err(e) = protocol.get_ref().validate() {
                out.push((Some(protocol.span()), format!("custom.protocol: {e}")));
            }
        }
        (None, Some(lindblad)) => {
            if let Err(e) = lindblad.get_ref().validate() {
                out.push((Some(lindblad.span()), format!("custom.lindblad: {e}")));
            }
            if custom.trajectories > 0 {
                out.push((
                    Some(lindblad.span()),
                    "custom.trajectories needs custom.protocol".into(),
                ));
            }
        }
        (Some(_), Some(l)) => out.push((
            Some(l.span()),
            "custom.protocol and custom.lindblad are mutually exclusive".into(),
        )),
        (None, None) => out.push((None, "[custom] needs protocol or lindblad".into())),
    }
}

fn check_grid<T>(
    out: &mut Vec<(Option<std::ops::Range<usize>>, String)>,
    name: &str,
    field: &Option<Spanned<Vec<T>>>,
    valid: impl Fn(&T) -> Result<(), &'static str>,
) where
    T: fmt::Display,
{
    let Some(field) = field else { return };
    let values = field.get_ref();
    if values.is_empty() {
        out.push((Some(field.span()), format!("{name} is empty")));
    }
    for v in values {
        if let Err(why) = valid(v) {
            out.push((Some(field.span()), format!("{name}: {v} {why}")));
        }
    }
}

fn check_scalar<T>(
    out: &mut Vec<(Option<std::ops::Range<usize>>, String)>,
    name: &str,
    field: &Option<Spanned<T>>,
    valid: impl Fn(&T) -> bool,
    why: &str,
) where
    T: fmt::Display,
{
    if let Some(field) = field {
        if !valid(field.get_ref()) {
            out.push((
                Some(field.span()),
                format!("{name}: {} {why}", field.get_ref()),
            ));
        }
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Reads an optional grid, falling back to `default`.
pub fn grid_or<T: Clone>(field: &Option<Spanned<Vec<T>>>, default: Vec<T>) -> Vec<T> {
    field.as_ref().map_or(default, |f| f.get_ref().clone())
}

/// Reads an optional scalar, falling back to `default`.
pub fn param_or<T: Clone>(field: &Option<Spanned<T>>, default: T) -> T {
    field.as_ref().map_or(default, |f| f.get_ref().clone())
}
