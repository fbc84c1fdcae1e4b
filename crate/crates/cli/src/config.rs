//! Run configuration: one TOML file plus command-line overrides (flags win).

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use momad_core::metrics::L2Protocol;
use momad_core::sim::{
    MomentumConfig, ObstacleScript, Occlusion, Planner, ProposalConfig, ScenarioKind, ScenarioSpec, SimConfig,
};
use momad_core::DistanceKind;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Uniad,
    Vad,
}

impl From<ProtocolArg> for L2Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Uniad => L2Protocol::AveragedUpTo,
            ProtocolArg::Vad => L2Protocol::AtTimestep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Hausdorff,
    Euclidean,
}

impl From<DistanceArg> for DistanceKind {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::Hausdorff => DistanceKind::Hausdorff,
            DistanceArg::Euclidean => DistanceKind::MeanEuclidean,
        }
    }
}

/// Flags shared by `run` and `compare`.
#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed to run; repeat or comma-separate for several. Replaces `seeds`.
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    #[arg(long, value_enum)]
    pub distance: Option<DistanceArg>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    pub history_depth: Option<u8>,
    /// Query-noise multiplier.
    #[arg(long)]
    pub ns: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Straight,
    ArcTurn,
    SCurve,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(rename = "type", default)]
    pub shape: Shape,
    pub radius: Option<f64>,
    /// Turn angle in degrees; positive turns left.
    pub angle_deg: Option<f64>,
    pub duration: f64,
    pub speed: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleScript>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            shape: Shape::Straight,
            radius: None,
            angle_deg: None,
            duration: 10.0,
            speed: 5.0,
            obstacles: Vec::new(),
        }
    }
}

impl ScenarioSection {
    fn kind(&self) -> CliResult<ScenarioKind> {
        let angle = self.angle_deg.map(f64::to_radians);
        match self.shape {
            Shape::Straight => {
                if self.radius.is_some() || self.angle_deg.is_some() {
                    return Err(CliError::Config(
                        "a straight scenario takes no radius or angle_deg".into(),
                    ));
                }
                Ok(ScenarioKind::Straight)
            }
            Shape::ArcTurn => Ok(ScenarioKind::ArcTurn {
                radius: self.radius.unwrap_or(20.0),
                angle: angle.unwrap_or(std::f64::consts::FRAC_PI_2),
            }),
            Shape::SCurve => Ok(ScenarioKind::SCurve {
                radius: self.radius.unwrap_or(30.0),
                angle: angle.unwrap_or(std::f64::consts::FRAC_PI_4),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerChoice {
    OneShot,
    #[default]
    Momentum,
}

/// Contents of the config file. Every key is optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub planner: PlannerChoice,
    pub distance: DistanceKind,
    pub history_depth: usize,
    pub weights_seed: u64,
    pub head_traj_scale: f64,
    pub k: usize,
    pub mode_noise: f64,
    pub jitter: f64,
    pub d_q: usize,
    pub ns: f64,
    pub n_t: usize,
    pub horizons_s: Vec<f64>,
    /// `vad` or `uniad`.
    pub protocol: String,
    pub occlusion: Option<Occlusion>,
    pub scenario: ScenarioSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        let momentum = MomentumConfig::default();
        Self {
            seeds: vec![0],
            out: PathBuf::from("out"),
            planner: PlannerChoice::default(),
            distance: momentum.distance,
            history_depth: momentum.history_depth,
            weights_seed: momentum.weights_seed,
            head_traj_scale: momentum.head_traj_scale,
            k: sim.proposals.k,
            mode_noise: sim.proposals.mode_noise,
            jitter: sim.proposals.jitter,
            d_q: sim.proposals.d_q,
            ns: sim.ns,
            n_t: sim.n_t,
            horizons_s: sim.horizons_s,
            protocol: "vad".into(),
            occlusion: None,
            scenario: ScenarioSection::default(),
        }
    }
}

/// A validated configuration ready to simulate.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub base: ScenarioSpec,
    pub sim: SimConfig,
    pub momentum: MomentumConfig,
    pub planner: Planner,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, args: &SimArgs) {
        if !args.seed.is_empty() {
            self.seeds = args.seed.clone();
        }
        if let Some(p) = args.protocol {
            self.protocol = match p {
                ProtocolArg::Uniad => "uniad",
                ProtocolArg::Vad => "vad",
            }
            .into();
        }
        if let Some(d) = args.distance {
            self.distance = d.into();
        }
        if let Some(h) = args.history_depth {
            self.history_depth = h as usize;
        }
        if let Some(ns) = args.ns {
            self.ns = ns;
        }
        if let Some(out) = &args.out {
            self.out = out.clone();
        }
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        let cfg = |e: momad_core::Error| CliError::Config(e.to_string());
        if self.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(CliError::Config(format!("seed {dup} is listed twice")));
        }
        let protocol: L2Protocol = self.protocol.parse().map_err(cfg)?;
        let sim = SimConfig {
            proposals: ProposalConfig {
                k: self.k,
                mode_noise: self.mode_noise,
                jitter: self.jitter,
                d_q: self.d_q,
            },
            n_t: self.n_t,
            ns: self.ns,
            horizons_s: self.horizons_s.clone(),
            protocol,
            occlusion: self.occlusion,
            ..SimConfig::default()
        };
        sim.validate().map_err(cfg)?;
        let momentum = MomentumConfig {
            distance: self.distance,
            history_depth: self.history_depth,
            weights_seed: self.weights_seed,
            head_traj_scale: self.head_traj_scale,
        };
        momentum.validate().map_err(cfg)?;
        let base = ScenarioSpec {
            kind: self.scenario.kind()?,
            duration: self.scenario.duration,
            speed: self.scenario.speed,
            obstacles: self.scenario.obstacles.clone(),
            seed: 0,
        };
        base.validate().map_err(cfg)?;
        let steps = base.steps();
        if steps < sim.n_t {
            return Err(CliError::Config(format!(
                "scenario provides {steps} future steps but a plan needs {}",
                sim.n_t
            )));
        }
        let planner = match self.planner {
            PlannerChoice::OneShot => Planner::OneShot,
            PlannerChoice::Momentum => Planner::Momentum(momentum),
        };
        Ok(Resolved {
            base,
            sim,
            momentum,
            planner,
            seeds: self.seeds.clone(),
            out: self.out.clone(),
        })
    }

    /// Loads the optional config file, applies flags and validates.
    pub fn from_args(args: &SimArgs) -> CliResult<Resolved> {
        let mut cfg = match &args.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(args);
        cfg.resolve()
    }
}
