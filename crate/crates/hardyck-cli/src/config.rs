//! Experiment configuration file (TOML).

use std::path::Path;

use hardyck::hardy_core::HardyOptions;
use hardyck::inequalities::{CheckOptions, InputFamily};
use hardyck::{
    Direction, HardyProblem64, InequalityKind, InequalitySpec64, KernelBound64, KernelVariant, PolarSpace64,
    RadialTestFunction64, WeightExpr64,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed for random test families; `--seed` replaces it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub spaces: Vec<PolarSpace64>,
    #[serde(default)]
    pub families: Vec<FamilyConfig>,
    #[serde(default)]
    pub problems: Vec<ProblemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative quadrature tolerance.
    pub quad: f64,
    /// Relative slack on the sandwich upper bound.
    pub upper_slack: f64,
    /// Relative slack on the near-extremizer lower bound.
    pub lower_slack: f64,
    /// Ratio above which a divergent B counts as confirmed.
    pub divergence_threshold: f64,
    /// Largest extremizer index tried.
    pub fk_max: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        let h = HardyOptions::<f64>::default();
        Tolerances {
            quad: h.tol,
            upper_slack: h.upper_slack,
            lower_slack: h.lower_slack,
            divergence_threshold: h.divergence_threshold,
            fk_max: h.fk_max,
        }
    }
}

impl Tolerances {
    pub fn hardy_options(&self) -> HardyOptions<f64> {
        HardyOptions {
            tol: self.quad,
            upper_slack: self.upper_slack,
            lower_slack: self.lower_slack,
            divergence_threshold: self.divergence_threshold,
            fk_max: self.fk_max,
            ..HardyOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_n: Option<usize>,
    pub levels: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let c = CheckOptions::<f64>::default();
        GridConfig { half_width: c.half_width, base_n: c.base_n, levels: c.levels }
    }
}

impl GridConfig {
    pub fn check_options(&self) -> CheckOptions<f64> {
        CheckOptions { half_width: self.half_width, base_n: self.base_n, levels: self.levels }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub json: bool,
    pub csv: bool,
    pub plotdata: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { json: true, csv: true, plotdata: true }
    }
}

/// Radial test functions for sandwich checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    /// Added to the global seed.
    #[serde(default)]
    pub seed: u64,
    /// Number of random step functions.
    #[serde(default)]
    pub random: usize,
    #[serde(default = "default_knots")]
    pub knots: usize,
    /// Radii of near-extremizers.
    #[serde(default)]
    pub near_extremizer: Vec<f64>,
    /// `[eps, R]` pairs.
    #[serde(default)]
    pub power_bump: Vec<[f64; 2]>,
    /// Explicit test functions.
    #[serde(default)]
    pub functions: Vec<RadialTestFunction64>,
}

fn default_knots() -> usize {
    7
}

impl FamilyConfig {
    /// Family used by problems that name none.
    pub fn builtin() -> Self {
        FamilyConfig {
            name: "default".into(),
            seed: 0,
            random: 6,
            knots: default_knots(),
            near_extremizer: vec![0.5, 2.0],
            power_bump: vec![[0.05, 1.0]],
            functions: vec![],
        }
    }

    pub fn resolve(&self, base_seed: u64) -> Vec<RadialTestFunction64> {
        let seed = base_seed.wrapping_add(self.seed);
        let mut out: Vec<RadialTestFunction64> = (0..self.random)
            .map(|i| RadialTestFunction64::piecewise_random(seed.wrapping_add(i as u64), self.knots))
            .collect();
        out.extend(self.near_extremizer.iter().map(|&r| RadialTestFunction64::near_extremizer(r)));
        out.extend(self.power_bump.iter().map(|&[eps, r]| RadialTestFunction64::power_bump(eps, r)));
        out.extend(self.functions.iter().cloned());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Radial two-weight Hardy inequality.
    Hardy {
        name: String,
        space: String,
        p: f64,
        q: f64,
        direction: Direction,
        phi: WeightExpr64,
        psi: WeightExpr64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        family: Option<String>,
    },
    /// One of the Sobolev-type inequalities.
    Inequality {
        name: String,
        space: String,
        spec: InequalityKind<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        char_rate: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kernel: Option<KernelVariant<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        inputs: Vec<InputFamily<f64>>,
    },
}

impl ProblemConfig {
    pub fn name(&self) -> &str {
        match self {
            ProblemConfig::Hardy { name, .. } | ProblemConfig::Inequality { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Name of the problem to vary.
    pub problem: String,
    /// Dotted path of a numeric field, e.g. `q` or `spec.q`.
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    /// Number of sampled values; `0` gives an empty sweep.
    pub steps: usize,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.check_references()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn space(&self, name: &str) -> Result<&PolarSpace64, CliError> {
        self.spaces
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CliError::Config(format!("unknown space `{name}`")))
    }

    pub fn family(&self, name: Option<&str>) -> Result<FamilyConfig, CliError> {
        match name {
            None => Ok(FamilyConfig::builtin()),
            Some(n) => self
                .families
                .iter()
                .find(|f| f.name == n)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("unknown family `{n}`"))),
        }
    }

    fn check_references(&self) -> Result<(), CliError> {
        let mut names = std::collections::BTreeSet::new();
        for pb in &self.problems {
            if !names.insert(pb.name()) {
                return Err(CliError::Config(format!("duplicate problem name `{}`", pb.name())));
            }
            match pb {
                ProblemConfig::Hardy { space, family, .. } => {
                    self.space(space)?;
                    self.family(family.as_deref())?;
                }
                ProblemConfig::Inequality { space, .. } => {
                    self.space(space)?;
                }
            }
        }
        if let Some(sw) = &self.sweep {
            if !self.problems.iter().any(|p| p.name() == sw.problem) {
                return Err(CliError::Config(format!("sweep refers to unknown problem `{}`", sw.problem)));
            }
        }
        Ok(())
    }
}

/// A problem with its space and family resolved.
pub enum Resolved {
    Hardy { problem: HardyProblem64, family: Vec<RadialTestFunction64> },
    Inequality { spec: InequalitySpec64, kernel: Option<KernelBound64>, inputs: Vec<InputFamily<f64>> },
}

pub fn resolve(cfg: &ExperimentConfig, pb: &ProblemConfig) -> Result<Resolved, CliError> {
    match pb {
        ProblemConfig::Hardy { space, p, q, direction, phi, psi, family, .. } => {
            let problem = HardyProblem64::new(cfg.space(space)?.clone(), *p, *q, *direction, *phi, *psi);
            let family = cfg.family(family.as_deref())?.resolve(cfg.seed);
            Ok(Resolved::Hardy { problem, family })
        }
        ProblemConfig::Inequality { space, spec, char_rate, kernel, inputs, .. } => {
            let mut s = InequalitySpec64::new(*spec, cfg.space(space)?.clone());
            if let Some(rate) = char_rate {
                s = s.with_char_rate(*rate);
            }
            Ok(Resolved::Inequality { spec: s, kernel: kernel.map(KernelBound64::new), inputs: inputs.clone() })
        }
    }
}

