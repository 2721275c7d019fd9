//! Experiment configuration.
//!
//! A config is one TOML file with the tables below. Unknown keys are rejected and
//! every table except `[model]` is optional.
//!
//! ```toml
//! [model]
//! kind = "bernoulli"            # bernoulli | finite | zfactor
//! rank = 2
//! probabilities = [0.5, 0.5]    # alphabet law, or the point law for finite models
//! generators = []               # finite: one permutation of 0..n per generator
//! weights = []                  # zfactor: one integer weight per generator
//!
//! [partition]
//! window = [""]                 # words; "" is the identity
//! labeling = "coordinate"       # coordinate | tuple | parity | table | points
//! table = []                    # table: cell of each window tuple code
//!
//! [[candidates]]                # partitions tried by rokhlin-search
//! window = ["", "a"]
//! labeling = "tuple"
//!
//! [cocycle]
//! kind = "geodesic"             # geodesic | random-walk
//! steps = { a = 0.25, A = 0.25, b = 0.25, B = 0.25 }
//!
//! [run]
//! horizon = 50
//! samples = 200
//! seed = 1
//! workers = 1
//! method = "auto"               # auto | exact | normalized-entropy | conditional-cesaro | pointwise-monte-carlo
//! bits = false
//! out_dir = "results"           # falls back to $FSMB_OUTPUT_DIR, then ./fsmb-out
//! frontier_width = 12
//! lambdas = [0.5, 1.0, 2.0, 3.0]
//! seward_set = ["", "a", "b", "ab"]
//! sphere_words = 262144         # largest sphere enumerated exactly
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use fsmb::measure::Limits;
use fsmb::words::{Rank, ReducedWord};
use fsmb::{
    ActionModel, BernoulliModel, Cocycle, FiniteModel, Labeling, MeasureEngine, Method, PartitionSpec, SkewSystem,
    StepDistribution, ZFactorModel,
};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub candidates: Vec<PartitionConfig>,
    #[serde(default)]
    pub cocycle: CocycleConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Bernoulli,
    Finite,
    Zfactor,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub rank: usize,
    pub probabilities: Vec<f64>,
    #[serde(default)]
    pub generators: Vec<Vec<usize>>,
    #[serde(default)]
    pub weights: Vec<i64>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum LabelingKind {
    #[default]
    Coordinate,
    Tuple,
    Parity,
    Table,
    Points,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default = "identity_window")]
    pub window: Vec<String>,
    #[serde(default)]
    pub labeling: LabelingKind,
    #[serde(default)]
    pub table: Vec<u32>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { window: identity_window(), labeling: LabelingKind::Coordinate, table: Vec::new() }
    }
}

fn identity_window() -> Vec<String> {
    vec![String::new()]
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CocycleKind {
    #[default]
    Geodesic,
    RandomWalk,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleConfig {
    #[serde(default)]
    pub kind: CocycleKind,
    #[serde(default)]
    pub steps: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub horizon: usize,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub method: String,
    pub bits: bool,
    pub out_dir: Option<PathBuf>,
    pub frontier_width: usize,
    pub lambdas: Vec<f64>,
    pub seward_set: Vec<String>,
    pub sphere_words: u128,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 50,
            samples: 200,
            seed: 1,
            workers: 1,
            method: "auto".into(),
            bits: false,
            out_dir: None,
            frontier_width: Limits::default().frontier_width,
            lambdas: vec![0.5, 1.0, 2.0, 3.0],
            seward_set: vec![String::new(), "a".into(), "b".into(), "ab".into()],
            sphere_words: 1 << 18,
        }
    }
}

/// Resolved estimator choice; `Auto` picks `exact` when a closed form exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Fixed(Method),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate().with_context(|| format!("validating {}", path.display()))?;
        Ok(config)
    }

    /// Schema checks that do not need the library: ranges and shapes.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        ensure!(m.rank >= 1, "model.rank must be at least 1");
        ensure!(!m.probabilities.is_empty(), "model.probabilities must be nonempty");
        match m.kind {
            ModelKind::Finite => {
                ensure!(m.generators.len() == m.rank, "model.generators needs {} permutations", m.rank);
                ensure!(m.weights.is_empty(), "model.weights only applies to zfactor models");
            }
            ModelKind::Zfactor => {
                ensure!(m.weights.len() == m.rank, "model.weights needs {} integers", m.rank);
                ensure!(m.generators.is_empty(), "model.generators only applies to finite models");
            }
            ModelKind::Bernoulli => {
                ensure!(
                    m.generators.is_empty() && m.weights.is_empty(),
                    "bernoulli models take no generators or weights"
                );
            }
        }
        for p in std::iter::once(&self.partition).chain(&self.candidates) {
            ensure!(
                p.labeling == LabelingKind::Table || p.table.is_empty(),
                "partition.table only applies to labeling = \"table\""
            );
        }
        match self.cocycle.kind {
            CocycleKind::Geodesic => {
                ensure!(self.cocycle.steps.is_empty(), "cocycle.steps only applies to random-walk")
            }
            CocycleKind::RandomWalk => ensure!(!self.cocycle.steps.is_empty(), "random-walk cocycle needs steps"),
        }
        ensure!(self.run.workers >= 1, "run.workers must be at least 1");
        ensure!(self.run.frontier_width >= 1, "run.frontier_width must be at least 1");
        self.method()?;
        Ok(())
    }

    pub fn method(&self) -> Result<MethodChoice> {
        if self.run.method == "auto" {
            return Ok(MethodChoice::Auto);
        }
        self.run.method.parse::<Method>().map(MethodChoice::Fixed).map_err(anyhow::Error::msg)
    }

    pub fn rank(&self) -> Result<Rank> {
        Ok(Rank::new(self.model.rank)?)
    }

    pub fn words(&self, texts: &[String]) -> Result<Vec<ReducedWord>> {
        let rank = self.rank()?;
        texts.iter().map(|t| ReducedWord::parse(rank, t).with_context(|| format!("word {t:?}"))).collect()
    }

    pub fn partition_spec(&self, p: &PartitionConfig) -> Result<PartitionSpec> {
        if p.labeling == LabelingKind::Points {
            ensure!(self.model.kind == ModelKind::Finite, "labeling = \"points\" needs a finite model");
            return Ok(PartitionSpec::points());
        }
        let labeling = match p.labeling {
            LabelingKind::Coordinate => Labeling::Coordinate,
            LabelingKind::Tuple => Labeling::WindowTuple,
            LabelingKind::Parity => Labeling::Parity,
            LabelingKind::Table => Labeling::Table(p.table.clone()),
            LabelingKind::Points => unreachable!(),
        };
        Ok(PartitionSpec::new(self.words(&p.window)?, labeling)?)
    }

    pub fn model(&self) -> Result<ActionModel> {
        let m = &self.model;
        let rank = self.rank()?;
        let probs = m.probabilities.clone();
        Ok(match m.kind {
            ModelKind::Bernoulli => BernoulliModel::new(rank, probs)?.into(),
            ModelKind::Finite => FiniteModel::from_generators(rank, m.generators.clone(), probs)?.into(),
            ModelKind::Zfactor => ZFactorModel::new(rank, m.weights.clone(), probs)?.into(),
        })
    }

    pub fn cocycle(&self) -> Result<Cocycle> {
        Ok(match self.cocycle.kind {
            CocycleKind::Geodesic => Cocycle::Geodesic,
            CocycleKind::RandomWalk => {
                let entries: Vec<(&str, f64)> = self.cocycle.steps.iter().map(|(w, p)| (w.as_str(), *p)).collect();
                Cocycle::RandomWalk(StepDistribution::parse(self.rank()?, &entries)?)
            }
        })
    }

    pub fn system_for(&self, partition: &PartitionConfig) -> Result<SkewSystem> {
        let limits = Limits { frontier_width: self.run.frontier_width, ..Limits::default() };
        let engine = MeasureEngine::with_limits(self.model()?, limits);
        Ok(SkewSystem::new(engine, self.partition_spec(partition)?, self.cocycle()?)?)
    }

    pub fn system(&self) -> Result<SkewSystem> {
        self.system_for(&self.partition)
    }

    pub fn candidates(&self) -> Result<Vec<PartitionSpec>> {
        if self.candidates.is_empty() {
            bail!("rokhlin-search needs at least one [[candidates]] table");
        }
        self.candidates.iter().map(|c| self.partition_spec(c)).collect()
    }
}
