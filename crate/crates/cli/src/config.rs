//! Experiment configuration.
//!
//! Sectioned TOML: `[model]`, `[grid]`, `[time]`, `[initial]`, `[weights]`,
//! `[scan]`. Unknown keys are errors.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use bovirial_core::dynamics::{InitialCondition, ModelSpec, RunConfig};
use bovirial_core::lab::LabConfig;
use bovirial_core::virial::{DecayFronts, OMEGA_INNER_EXPONENT};
use bovirial_core::weights::{Constant, FrontSpec, ScheduleParams, SpaceTimeWeight, TanhStep};
use bovirial_core::Grid;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub model: ModelSection,
    pub grid: Option<GridSection>,
    pub time: Option<TimeSection>,
    pub initial: Option<InitialSection>,
    pub weights: Option<WeightSection>,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "one_u32")]
    pub power: u32,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { power: 1 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "one_usize")]
    pub cadence: usize,
    /// Defaults to `2/(k+2)`.
    pub dealias: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSection {
    Zero,
    Soliton {
        #[serde(default = "one_f64")]
        speed: f64,
        #[serde(default)]
        center: f64,
    },
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    Sum {
        components: Vec<InitialSection>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightSection {
    Tanh {
        #[serde(default)]
        center: f64,
        width: f64,
        #[serde(default)]
        speed: f64,
    },
    Right {
        c0: f64,
        #[serde(default)]
        c1: f64,
    },
    Left {
        #[serde(default)]
        c1: f64,
        #[serde(default = "one_f64")]
        c2: f64,
        eta: f64,
    },
    Constant {
        #[serde(default = "one_f64")]
        value: f64,
    },
}

/// Parameters of the scans and the inequality lab. Every key is optional.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub b: f64,
    pub m: f64,
    pub q: f64,
    pub rho_sign: f64,
    pub corollary: bool,
    pub sigma: f64,
    pub delta: f64,
    /// Requested first scan time; raised to the admissible minimum.
    pub start: f64,
    /// Right front `x >= c1 + C0 t`.
    pub c0: Option<f64>,
    pub c1: f64,
    /// Left front `x <= -c1 - c2 t log^{1+eta} t`.
    pub left_c1: f64,
    pub left_c2: f64,
    pub eta: f64,
    pub p: f64,
    pub omega_c: f64,
    pub omega_gamma: f64,
    pub omega_inner_exponent: f64,
    /// Stored run directory to scan instead of a fresh run.
    pub source: Option<PathBuf>,
    pub family_size: usize,
    pub seed: u64,
    pub claim_resolution: usize,
    pub leibniz_order: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        let lab = LabConfig::default();
        ScanSection {
            b: 0.5,
            m: 0.0,
            q: 1.1,
            rho_sign: 1.0,
            corollary: false,
            sigma: 1.0,
            delta: 1.0,
            start: 10.0,
            c0: None,
            c1: 0.0,
            left_c1: 0.0,
            left_c2: 1.0,
            eta: 0.5,
            p: 2.0,
            omega_c: 1.0,
            omega_gamma: 1.0,
            omega_inner_exponent: OMEGA_INNER_EXPONENT,
            source: None,
            family_size: lab.family_size,
            seed: lab.seed,
            claim_resolution: lab.claim_resolution,
            leibniz_order: lab.leibniz_order,
        }
    }
}

fn one_u32() -> u32 {
    1
}

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

/// A parsed config together with the exact bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: Config,
    pub text: String,
    pub path: PathBuf,
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse(&text)?;
    Ok(LoadedConfig {
        config,
        text,
        path: path.to_path_buf(),
    })
}

impl Config {
    pub fn model(&self) -> Result<ModelSpec, CliError> {
        Ok(ModelSpec::new(self.model.power)?)
    }

    pub fn grid(&self) -> Result<Arc<Grid>, CliError> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [grid] section".into()))?;
        Ok(Grid::new(g.length, g.points)?)
    }

    /// Relative `file` paths resolve against `base`.
    pub fn run_config(&self, base: &Path) -> Result<RunConfig, CliError> {
        let time = self
            .time
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [time] section".into()))?;
        let initial = self
            .initial
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [initial] section".into()))?;
        let model = self.model()?;
        let mut run = RunConfig::new(model, self.grid()?, time.dt, time.t_end, initial.build(base));
        run.t_start = time.t_start;
        run.cadence = time.cadence;
        if let Some(d) = time.dealias {
            run.dealias = d;
        }
        run.validate()?;
        Ok(run)
    }

    pub fn schedule_params(&self) -> Result<ScheduleParams, CliError> {
        let s = &self.scan;
        ScheduleParams::new(s.b, s.m, s.q, s.rho_sign, s.corollary).map_err(|e| {
            let probe = ScheduleParams {
                b: s.b,
                m: s.m,
                q: s.q,
                rho_sign: s.rho_sign,
                corollary: s.corollary,
            };
            match probe.constraint_report() {
                Some(note) => CliError::Config(format!("{e}; {note}")),
                None => CliError::Config(e.to_string()),
            }
        })
    }

    /// Right front at `C0` (explicit or `suggested`) and the left front.
    pub fn fronts(&self, suggested: f64) -> Result<DecayFronts, CliError> {
        let s = &self.scan;
        Ok(DecayFronts {
            right: FrontSpec::right(s.c0.unwrap_or(suggested), s.c1)?,
            left: FrontSpec::left(s.left_c1, s.left_c2, s.eta)?,
        })
    }

    pub fn weight(&self) -> Result<Box<dyn SpaceTimeWeight>, CliError> {
        let w = self
            .weights
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [weights] section".into()))?;
        Ok(match *w {
            WeightSection::Tanh { center, width, speed } => {
                if !(width > 0.0) {
                    return Err(CliError::Config(format!("tanh width must be positive, got {width}")));
                }
                Box::new(TanhStep { center, width, speed })
            }
            WeightSection::Right { c0, c1 } => Box::new(FrontSpec::right(c0, c1)?),
            WeightSection::Left { c1, c2, eta } => Box::new(FrontSpec::left(c1, c2, eta)?),
            WeightSection::Constant { value } => Box::new(Constant(value)),
        })
    }

    pub fn lab(&self, seed: Option<u64>) -> LabConfig {
        let s = &self.scan;
        let mut lab = LabConfig {
            family_size: s.family_size,
            seed: seed.unwrap_or(s.seed),
            claim_resolution: s.claim_resolution,
            leibniz_order: s.leibniz_order,
            ..LabConfig::default()
        };
        if let Some(g) = &self.grid {
            lab.length = g.length;
            lab.points = g.points;
        }
        lab
    }
}

impl InitialSection {
    pub fn build(&self, base: &Path) -> InitialCondition {
        match self {
            InitialSection::Zero => InitialCondition::Zero,
            InitialSection::Soliton { speed, center } => InitialCondition::Soliton {
                speed: *speed,
                center: *center,
            },
            InitialSection::Gaussian { amplitude, width, center } => InitialCondition::Gaussian {
                amplitude: *amplitude,
                width: *width,
                center: *center,
            },
            InitialSection::Sum { components } => {
                InitialCondition::Sum(components.iter().map(|c| c.build(base)).collect())
            }
            InitialSection::File { path } => InitialCondition::File(base.join(path)),
        }
    }
}
