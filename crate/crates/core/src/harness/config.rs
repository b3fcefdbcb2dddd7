//! Run configuration: a TOML document, optionally layered over a preset.
//!
//! Every key is optional. Keys given explicitly win over the preset's value;
//! anything still missing after merging falls back to a built-in default or
//! is reported as a configuration error.
//!
//! ```toml
//! preset = "quad8"
//! seed = 2021
//! iterations = 10000
//! stride = 10
//! output = "quad8.csv"
//! x0 = [[0.0, 0.0], ...]          # one row per node, defaults to the origin
//!
//! [graph]
//! nodes = 8
//! window = 4
//! cyclic = true
//! schedule = [[[1, 3], [5, 8]], ...] # 1-based edge lists per step
//! edge_order = [[1, 3], ...]         # optional relay layout order
//!
//! [delay]
//! uniform = 4                      # or per_edge = [{ edge = [1, 3], delay = 2 }, ...]
//!
//! [objective]
//! kind = "quadratic"               # or "sensor"
//! radius = 3.0
//! dim = 2
//! target_range = [-2.0, 2.0]
//! targets = [[...], ...]           # explicit U, overrides the generator
//! truth = 0.0                      # sensor only
//!
//! [step]
//! kind = "basic"                   # "optimal" or "custom"
//! scale = 0.2                      # defaults to R / L
//! delta = "provable"               # or "empirical"
//! delta_horizon = 2000
//! values = [...]                   # custom only
//!
//! [tolerances]
//! oracle = 1e-10
//! column_sum = 1e-12
//! conservation = 1e-9
//! ```

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::presets::{eight_node_schedule, example1_schedule, Preset};
use super::seeds::{stream, Stream};
use crate::constants::DeltaMode;
use crate::delay::DelaySpec;
use crate::dual_averaging::{EuclideanProx, StepSchedule};
use crate::error::{Error, Result};
use crate::graph::{Edge, TimeVaryingDigraph};
use crate::network::DelayedNetwork;
use crate::objective::{FeasibleSet, Objective, QuadraticObjective, SensorObjective};

pub const DEFAULT_SEED: u64 = 2021;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub delay: DelayConfig,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub step: StepConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<Vec<[usize; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_order: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDelay {
    pub edge: [usize; 2],
    pub delay: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_edge: Option<Vec<EdgeDelay>>,
}

impl DelayConfig {
    fn is_set(&self) -> bool {
        self.uniform.is_some() || self.per_edge.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Quadratic,
    Sensor,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ObjectiveKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Basic,
    Optimal,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaChoice {
    Provable,
    Empirical,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<StepKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column_sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub oracle: f64,
    pub column_sum: f64,
    pub conservation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle: 1e-10,
            column_sum: crate::matrix::COLUMN_SUM_TOL,
            conservation: 1e-9,
        }
    }
}

fn pairs(edges: &[Edge]) -> Vec<[usize; 2]> {
    edges.iter().map(|e| e.to_one_based()).collect()
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The fully spelled-out configuration of a preset.
    pub fn preset(preset: Preset) -> Self {
        let (nodes, window, schedule) = match preset {
            Preset::Example1 => (3, 3, example1_schedule()),
            Preset::Quad8 | Preset::Sensor8 => (8, 4, eight_node_schedule()),
        };
        let (tau, iterations) = match preset {
            Preset::Example1 => (2, 1000),
            _ => (4, 10_000),
        };
        let objective = match preset {
            Preset::Sensor8 => ObjectiveConfig {
                kind: Some(ObjectiveKind::Sensor),
                radius: Some(0.1),
                dim: Some(1),
                truth: Some(0.0),
                ..Default::default()
            },
            _ => ObjectiveConfig {
                kind: Some(ObjectiveKind::Quadratic),
                radius: Some(3.0),
                dim: Some(2),
                target_range: Some([-2.0, 2.0]),
                ..Default::default()
            },
        };
        RunConfig {
            preset: Some(preset),
            seed: Some(DEFAULT_SEED),
            iterations: Some(iterations),
            graph: GraphConfig {
                nodes: Some(nodes),
                window: Some(window),
                cyclic: Some(true),
                schedule: Some(schedule.iter().map(|s| pairs(s)).collect()),
                edge_order: None,
            },
            delay: DelayConfig {
                uniform: Some(tau),
                per_edge: None,
            },
            objective,
            step: StepConfig {
                kind: Some(StepKind::Basic),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    /// Layers `self` over `base`: every key set in `self` wins.
    pub fn over(self, base: RunConfig) -> RunConfig {
        let g = self.graph;
        let o = self.objective;
        let s = self.step;
        let tol = self.tolerances;
        RunConfig {
            preset: self.preset.or(base.preset),
            seed: self.seed.or(base.seed),
            iterations: self.iterations.or(base.iterations),
            stride: self.stride.or(base.stride),
            output: self.output.or(base.output),
            x0: self.x0.or(base.x0),
            graph: GraphConfig {
                nodes: g.nodes.or(base.graph.nodes),
                window: g.window.or(base.graph.window),
                cyclic: g.cyclic.or(base.graph.cyclic),
                schedule: g.schedule.or(base.graph.schedule),
                edge_order: g.edge_order.or(base.graph.edge_order),
            },
            // the two delay forms exclude each other, so they are replaced together
            delay: if self.delay.is_set() { self.delay } else { base.delay },
            objective: ObjectiveConfig {
                kind: o.kind.or(base.objective.kind),
                radius: o.radius.or(base.objective.radius),
                dim: o.dim.or(base.objective.dim),
                target_range: o.target_range.or(base.objective.target_range),
                targets: o.targets.or(base.objective.targets),
                truth: o.truth.or(base.objective.truth),
            },
            step: StepConfig {
                kind: s.kind.or(base.step.kind),
                scale: s.scale.or(base.step.scale),
                delta: s.delta.or(base.step.delta),
                delta_horizon: s.delta_horizon.or(base.step.delta_horizon),
                values: s.values.or(base.step.values),
            },
            tolerances: ToleranceConfig {
                oracle: tol.oracle.or(base.tolerances.oracle),
                column_sum: tol.column_sum.or(base.tolerances.column_sum),
                conservation: tol.conservation.or(base.tolerances.conservation),
            },
        }
    }

    /// Fills unset keys from the named preset, if any.
    pub fn with_preset_defaults(self) -> RunConfig {
        match self.preset {
            Some(p) => self.over(RunConfig::preset(p)),
            None => self,
        }
    }

    pub fn resolve(&self) -> Result<Experiment> {
        Experiment::from_config(self)
    }
}

fn to_edge(pair: [usize; 2]) -> Result<Edge> {
    Edge::one_based(pair[0], pair[1])
}

fn to_matrix(rows: &[Vec<f64>], what: &str) -> Result<Array2<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{what}: rows have different lengths")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).map_err(|e| Error::Config(format!("{what}: {e}")))
}

/// A validated, ready-to-run problem instance.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub preset: Option<Preset>,
    pub seed: u64,
    pub network: DelayedNetwork,
    pub objective: Objective,
    pub set: FeasibleSet,
    pub prox: EuclideanProx,
    pub schedule: StepSchedule,
    pub x0: Array2<f64>,
    pub iterations: usize,
    pub stride: usize,
    pub output: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub delta: DeltaMode,
}

/// Every step up to 1000 iterations, every 10th beyond.
pub fn default_stride(iterations: usize) -> usize {
    if iterations <= 1000 {
        1
    } else {
        10
    }
}

pub fn build_graph(cfg: &GraphConfig) -> Result<TimeVaryingDigraph> {
    let missing = |key: &str| Error::Config(format!("graph.{key} is required"));
    let nodes = cfg.nodes.ok_or_else(|| missing("nodes"))?;
    let window = cfg.window.ok_or_else(|| missing("window"))?;
    let schedule = cfg
        .schedule
        .as_ref()
        .ok_or_else(|| missing("schedule"))?
        .iter()
        .map(|slot| slot.iter().copied().map(to_edge).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let order = cfg
        .edge_order
        .as_ref()
        .map(|o| o.iter().copied().map(to_edge).collect::<Result<Vec<_>>>())
        .transpose()?;
    TimeVaryingDigraph::new(nodes, schedule, window, cfg.cyclic.unwrap_or(true), order)
}

pub fn build_delays(cfg: &DelayConfig, graph: &TimeVaryingDigraph) -> Result<DelaySpec> {
    match (cfg.uniform, &cfg.per_edge) {
        (Some(_), Some(_)) => Err(Error::Config(
            "delay.uniform and delay.per_edge are mutually exclusive".into(),
        )),
        (Some(tau), None) => Ok(DelaySpec::uniform(graph.union(), tau)),
        (None, Some(list)) => DelaySpec::from_pairs(
            list.iter()
                .map(|d| Ok((to_edge(d.edge)?, d.delay)))
                .collect::<Result<Vec<_>>>()?,
        ),
        (None, None) => Ok(DelaySpec::uniform(graph.union(), 0)),
    }
}

fn build_objective(cfg: &ObjectiveConfig, nodes: usize, seed: u64) -> Result<Objective> {
    match cfg.kind.unwrap_or(ObjectiveKind::Quadratic) {
        ObjectiveKind::Quadratic => {
            if let Some(rows) = &cfg.targets {
                let targets = to_matrix(rows, "objective.targets")?;
                if targets.nrows() != nodes {
                    return Err(Error::DimensionMismatch {
                        expected: nodes,
                        found: targets.nrows(),
                    });
                }
                return Ok(Objective::Quadratic(QuadraticObjective::new(targets)?));
            }
            let dim = cfg.dim.unwrap_or(2);
            let [low, high] = cfg.target_range.unwrap_or([-2.0, 2.0]);
            let mut rng = stream(seed, Stream::Targets);
            Ok(Objective::Quadratic(QuadraticObjective::random(
                nodes, dim, low, high, &mut rng,
            )?))
        }
        ObjectiveKind::Sensor => {
            if cfg.dim.is_some_and(|d| d != 1) {
                return Err(Error::Config("the sensor objective is scalar (dim = 1)".into()));
            }
            let mut rng = stream(seed, Stream::Sensors);
            Ok(Objective::Sensor(SensorObjective::random(
                nodes,
                cfg.truth.unwrap_or(0.0),
                &mut rng,
            )?))
        }
    }
}

impl Experiment {
    pub fn from_config(raw: &RunConfig) -> Result<Self> {
        let cfg = raw.clone().with_preset_defaults();
        let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
        let graph = build_graph(&cfg.graph)?;
        let delays = build_delays(&cfg.delay, &graph)?;
        let network = DelayedNetwork::new(graph, delays)?;
        let m = network.nodes();

        let objective = build_objective(&cfg.objective, m, seed)?;
        let radius = cfg.objective.radius.unwrap_or(match objective {
            Objective::Quadratic(_) => 3.0,
            Objective::Sensor(_) => 0.1,
        });
        let set = FeasibleSet::l1_ball(radius)?;
        let prox = EuclideanProx::new(set);
        let dim = objective.dim();

        let x0 = match &cfg.x0 {
            Some(rows) => {
                let x0 = to_matrix(rows, "x0")?;
                if x0.nrows() != m || x0.ncols() != dim {
                    return Err(Error::ShapeMismatch(format!(
                        "x0 is {}x{}, expected {m}x{dim}",
                        x0.nrows(),
                        x0.ncols()
                    )));
                }
                x0
            }
            None => Array2::zeros((m, dim)),
        };

        let iterations = cfg.iterations.unwrap_or(1000);
        if iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be positive".into()));
        }
        let stride = cfg.stride.unwrap_or_else(|| default_stride(iterations));
        if stride == 0 {
            return Err(Error::InvalidParameter("stride must be positive".into()));
        }

        let delta = match cfg.step.delta.unwrap_or(DeltaChoice::Provable) {
            DeltaChoice::Provable => DeltaMode::Provable,
            DeltaChoice::Empirical => {
                let horizon = cfg.step.delta_horizon.unwrap_or(2000);
                DeltaMode::Empirical(network.empirical_delta(horizon))
            }
        };
        let schedule = match cfg.step.kind.unwrap_or(StepKind::Basic) {
            StepKind::Basic => StepSchedule::basic(
                cfg.step
                    .scale
                    .unwrap_or_else(|| prox.psi_bound().sqrt() / objective.lipschitz_bound(&set)),
            )?,
            StepKind::Optimal => {
                let constants = network.constants()?;
                StepSchedule::optimal(
                    prox.psi_bound().sqrt(),
                    objective.lipschitz_bound(&set),
                    constants.gamma_with(delta),
                )?
            }
            StepKind::Custom => StepSchedule::custom(
                cfg.step
                    .values
                    .clone()
                    .ok_or_else(|| Error::Config("step.values is required for a custom schedule".into()))?,
            )?,
        };

        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            oracle: cfg.tolerances.oracle.unwrap_or(defaults.oracle),
            column_sum: cfg.tolerances.column_sum.unwrap_or(defaults.column_sum),
            conservation: cfg.tolerances.conservation.unwrap_or(defaults.conservation),
        };

        Ok(Experiment {
            preset: cfg.preset,
            seed,
            network,
            objective,
            set,
            prox,
            schedule,
            x0,
            iterations,
            stride,
            output: cfg.output,
            tolerances,
            delta,
        })
    }

    /// `R` with `psi(x) <= R^2` on the feasible set.
    pub fn radius(&self) -> f64 {
        self.prox.psi_bound().sqrt()
    }

    pub fn lipschitz(&self) -> f64 {
        self.objective.lipschitz_bound(&self.set)
    }

    /// Same instance with every delay replaced by `tau`.
    pub fn with_uniform_delay(&self, tau: usize) -> Result<Experiment> {
        let network = DelayedNetwork::uniform(self.network.graph().clone(), tau)?;
        Ok(Experiment {
            network,
            ..self.clone()
        })
    }

    /// Same instance, `iterations` steps.
    pub fn with_iterations(&self, iterations: usize) -> Experiment {
        Experiment {
            iterations,
            ..self.clone()
        }
    }

    pub fn initial_mean(&self) -> Array1<f64> {
        self.x0
            .mean_axis(ndarray::Axis(0))
            .unwrap_or_else(|| Array1::zeros(self.objective.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_round_trips_through_toml() {
        let cfg = RunConfig::preset(Preset::Quad8);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn explicit_keys_win_over_preset() {
        let cfg = RunConfig::from_toml_str("preset = \"quad8\"\n[delay]\nuniform = 8\n").unwrap();
        let exp = cfg.resolve().unwrap();
        assert_eq!(exp.network.delays().tau_max(), 8);
        assert_eq!(exp.network.nodes(), 8);
        assert_eq!(exp.iterations, 10_000);
        assert_eq!(exp.stride, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_toml_str("bogus = 1"), Err(Error::Config(_))));
    }

    #[test]
    fn missing_delay_names_edge() {
        let text = r#"
preset = "example1"
[delay]
per_edge = [{ edge = [1, 2], delay = 2 }, { edge = [2, 3], delay = 2 }]
"#;
        let err = RunConfig::from_toml_str(text).unwrap().resolve().unwrap_err();
        assert_eq!(err, Error::MissingDelay(Edge::one_based(3, 1).unwrap()));
        assert!(err.to_string().contains("(3,1)"));
    }

    #[test]
    fn seeds_drive_targets() {
        let a = RunConfig::preset(Preset::Quad8).resolve().unwrap();
        let b = RunConfig::preset(Preset::Quad8).resolve().unwrap();
        let mut c = RunConfig::preset(Preset::Quad8);
        c.seed = Some(7);
        let c = c.resolve().unwrap();
        let targets = |e: &Experiment| match &e.objective {
            Objective::Quadratic(q) => q.targets().clone(),
            _ => unreachable!(),
        };
        assert_eq!(targets(&a), targets(&b));
        assert_ne!(targets(&a), targets(&c));
    }

    #[test]
    fn stride_default_follows_horizon() {
        assert_eq!(default_stride(1000), 1);
        assert_eq!(default_stride(1001), 10);
    }
}
