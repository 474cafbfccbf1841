//! Experiment configuration files and named presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{ChaosThresholds, DEFAULT_FRONT_THRESHOLD};
use crate::error::{Error, Result};
use crate::mps::TebdConfig;
use crate::qlif::{Engine, InitialState, TimeGrid};
use crate::spin_model::{HamiltonianSpec, Spin};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    QlifTrace,
    QlifHeatmap,
    Otoc,
    Latetime,
    InitialStateSuite,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::QlifTrace => "qlif-trace",
            ExperimentKind::QlifHeatmap => "qlif-heatmap",
            ExperimentKind::Otoc => "otoc",
            ExperimentKind::Latetime => "latetime",
            ExperimentKind::InitialStateSuite => "initial-state-suite",
        }
    }
}

/// Sites in 1-based numbering. For OTOC runs `frozen` carries `W` and
/// `obs` the `V` operators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SitesConfig {
    pub frozen: usize,
    pub obs: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    #[default]
    Neel,
    AllUp,
    Product {
        pattern: String,
    },
    /// Ground state of `model` (the run's own model when absent).
    Ground {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<HamiltonianSpec>,
    },
}

fn default_floor() -> f64 {
    1e-14
}

fn default_front_threshold() -> f64 {
    DEFAULT_FRONT_THRESHOLD
}

fn default_otoc_threshold() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Power-law window; `[t_LR(d), t_max(d)]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(f64, f64)>,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_front_threshold")]
    pub front_threshold: f64,
    #[serde(default = "default_otoc_threshold")]
    pub otoc_threshold: f64,
    #[serde(default)]
    pub chaos: ChaosThresholds,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            fit_window: None,
            floor: default_floor(),
            front_threshold: default_front_threshold(),
            otoc_threshold: default_otoc_threshold(),
            chaos: ChaosThresholds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Also run the `hz = 0` counterpart of `model`.
    #[serde(default)]
    pub compare_integrable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub model: HamiltonianSpec,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    pub sites: SitesConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub time: TimeGrid,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

fn default_engine() -> Engine {
    Engine::Ed
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(origin, e.to_string()))?;
        cfg.validate().map_err(|e| Error::config(origin, e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidRequest(format!("cannot serialize config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.time.validate()?;
        if let Engine::Mps(cfg) = &self.engine {
            cfg.validate()?;
        }
        let l = self.model.sites;
        let check = |field: &str, s: usize| -> Result<()> {
            if s == 0 || s > l {
                return Err(Error::InvalidRequest(format!(
                    "sites.{field} = {s} is outside 1..={l} (sites are 1-based)"
                )));
            }
            Ok(())
        };
        check("frozen", self.sites.frozen)?;
        if self.sites.obs.is_empty() {
            return Err(Error::InvalidRequest("sites.obs must list at least one site".into()));
        }
        for &o in &self.sites.obs {
            check("obs", o)?;
            if o == self.sites.frozen {
                return Err(Error::InvalidRequest(format!("sites.obs contains the frozen site {o}")));
            }
        }
        match &self.initial {
            InitialConfig::Product { pattern } => {
                let spins = Spin::parse_pattern(pattern)?;
                if spins.len() != l {
                    return Err(Error::InvalidRequest(format!(
                        "initial.pattern has {} spins, model has L = {l}",
                        spins.len()
                    )));
                }
            }
            InitialConfig::Ground { model: Some(spec) } => {
                spec.validate()?;
                if spec.sites != l {
                    return Err(Error::InvalidRequest(format!(
                        "initial.model has L = {}, run model has L = {l}",
                        spec.sites
                    )));
                }
            }
            _ => {}
        }
        if self.kind == ExperimentKind::Otoc && self.engine != Engine::Ed {
            return Err(Error::InvalidRequest("OTOC runs support only the ED engine".into()));
        }
        Ok(())
    }

    /// 0-based frozen site.
    pub fn frozen_site(&self) -> usize {
        self.sites.frozen - 1
    }

    /// 0-based observation sites.
    pub fn obs_sites(&self) -> Vec<usize> {
        self.sites.obs.iter().map(|s| s - 1).collect()
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        Ok(match &self.initial {
            InitialConfig::Neel => InitialState::Neel,
            InitialConfig::AllUp => InitialState::AllUp,
            InitialConfig::Product { pattern } => InitialState::Product(Spin::parse_pattern(pattern)?),
            InitialConfig::Ground { model } => InitialState::GroundState(model.unwrap_or(self.model)),
        })
    }

    /// The run's model, followed by its integrable counterpart when requested.
    pub fn labelled_models(&self) -> Vec<(&'static str, HamiltonianSpec)> {
        if !self.compare_integrable {
            return vec![("model", self.model)];
        }
        let mut out = Vec::new();
        if !self.model.is_integrable() {
            out.push(("chaotic", self.model));
        }
        out.push(("integrable", self.model.with_longitudinal(0.0)));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Paper,
    Desk,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::InvalidRequest(format!("unknown scale {other:?} (paper, desk)"))),
        }
    }
}

pub const PRESET_NAMES: [&str; 4] = ["fig1-panel", "fig2-heatmap", "fig3-suite", "fig5-latetime"];

fn mps(dt: f64, chi: usize) -> Engine {
    Engine::Mps(TebdConfig::new(dt, chi))
}

/// Configuration reproducing one figure, at full or desk size.
///
/// Desk runs use L = 12 with the ED engine, the frozen site at 4 (1-based)
/// and the largest distances that fit, except `fig5-latetime`, which keeps
/// L = 20 on the MPS engine with chi lowered to 64.
pub fn preset(name: &str, scale: Scale) -> Result<ExperimentConfig> {
    let chaotic = |l| HamiltonianSpec::chaotic(l);
    let base = |kind, model, engine, frozen, obs: Vec<usize>, step, t_max| ExperimentConfig {
        kind,
        name: format!(
            "{name}-{}",
            match scale {
                Scale::Paper => "paper",
                Scale::Desk => "desk",
            }
        ),
        note: None,
        compare_integrable: false,
        output_dir: None,
        model,
        engine,
        sites: SitesConfig { frozen, obs },
        initial: InitialConfig::Neel,
        time: TimeGrid::new(step, t_max),
        analysis: AnalysisConfig::default(),
    };
    let desk_note = |what: &str| {
        Some(format!(
            "desk scaling: L = 12 exact diagonalization, frozen site 4 (1-based); {what}"
        ))
    };
    let cfg = match (name, scale) {
        ("fig1-panel", Scale::Paper) => ExperimentConfig {
            compare_integrable: true,
            note: Some("d = 4 panel; frozen = 10 and t_max = 10 match fig2-heatmap".into()),
            ..base(ExperimentKind::QlifTrace, chaotic(30), mps(0.05, 128), 10, vec![14], 0.05, 10.0)
        },
        ("fig1-panel", Scale::Desk) => ExperimentConfig {
            compare_integrable: true,
            note: desk_note("distance d = 4 kept"),
            ..base(ExperimentKind::QlifTrace, chaotic(12), Engine::Ed, 4, vec![8], 0.02, 10.0)
        },
        ("fig2-heatmap", Scale::Paper) => ExperimentConfig {
            compare_integrable: true,
            ..base(ExperimentKind::QlifHeatmap, chaotic(30), mps(0.05, 128), 10, (11..=20).collect(), 0.05, 10.0)
        },
        ("fig2-heatmap", Scale::Desk) => ExperimentConfig {
            compare_integrable: true,
            note: desk_note("observation sites 5..10, d = 1..6"),
            ..base(ExperimentKind::QlifHeatmap, chaotic(12), Engine::Ed, 4, (5..=10).collect(), 0.02, 10.0)
        },
        ("fig3-suite", Scale::Paper) => {
            base(ExperimentKind::InitialStateSuite, chaotic(30), mps(0.05, 128), 10, vec![20], 0.05, 10.0)
        }
        ("fig3-suite", Scale::Desk) => ExperimentConfig {
            note: desk_note("observation site 7, d = 3; ground states from dense diagonalization"),
            ..base(ExperimentKind::InitialStateSuite, chaotic(12), Engine::Ed, 4, vec![7], 0.02, 10.0)
        },
        ("fig5-latetime", Scale::Paper) => ExperimentConfig {
            compare_integrable: true,
            ..base(ExperimentKind::Latetime, chaotic(20), mps(0.1, 128), 8, vec![12], 0.1, 40.0)
        },
        ("fig5-latetime", Scale::Desk) => ExperimentConfig {
            compare_integrable: true,
            note: Some("desk scaling: L = 20 kept, bond dimension lowered to 64".into()),
            ..base(ExperimentKind::Latetime, chaotic(20), mps(0.1, 64), 8, vec![12], 0.1, 40.0)
        },
        _ => {
            return Err(Error::InvalidRequest(format!(
                "unknown preset {name:?}; known presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(cfg)
}
