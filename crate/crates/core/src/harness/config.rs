use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::Baseline;
use crate::cascade::DatasetOptions;
use crate::community::ClusterOptions;
use crate::diffusion::ModelKind;
use crate::error::{Error, Result};
use crate::graph::synthetic::SyntheticGraphConfig;
use crate::relation::TrainConfig;
use crate::seeds::Measure;

/// Graph input: files when `edges` is set, otherwise a synthetic graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub edges: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub undirected: bool,
    pub relabel: bool,
    pub synthetic: SyntheticGraphConfig,
}

/// Ground-truth diffusion model; loaded from `path` when given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub calibration: f64,
    pub path: Option<PathBuf>,
    /// Overrides the seed derived from the master seed.
    pub seed: Option<u64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Pic,
            calibration: 0.1,
            path: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Diffusion pairs to collect (N).
    pub pairs: usize,
    pub path: Option<PathBuf>,
    pub seed_fraction: f64,
    pub max_cascades: usize,
}

impl Default for DatasetSection {
    fn default() -> Self {
        let d = DatasetOptions::default();
        Self {
            pairs: 1000,
            path: None,
            seed_fraction: d.seed_fraction,
            max_cascades: d.max_cascades,
        }
    }
}

impl DatasetSection {
    pub fn options(&self) -> DatasetOptions {
        DatasetOptions {
            seed_fraction: self.seed_fraction,
            max_cascades: self.max_cascades,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    /// Cascades per repeat.
    pub replications: usize,
    pub repeats: usize,
    /// Replications per CELF marginal-gain evaluation.
    pub celf_replications: usize,
    /// RR sets for RL-RIS; 20·n·ln n when absent.
    pub rl_ris_theta: Option<usize>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            replications: 1000,
            repeats: 10,
            celf_replications: 1000,
            rl_ris_theta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub budgets: Vec<usize>,
    /// Community strategies by name: D-D, D-K, D-PR, D-C.
    pub strategies: Vec<String>,
    pub baselines: Vec<String>,
    /// Write one seed file per report cell.
    pub seed_files: bool,
    pub graph: GraphSection,
    pub model: ModelSection,
    pub dataset: DatasetSection,
    pub train: TrainConfig,
    pub cluster: ClusterOptions,
    pub evaluation: EvaluationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            budgets: vec![10],
            strategies: vec!["D-PR".into()],
            baselines: vec!["random".into()],
            seed_files: false,
            graph: GraphSection::default(),
            model: ModelSection::default(),
            dataset: DatasetSection::default(),
            train: TrainConfig::default(),
            cluster: ClusterOptions::default(),
            evaluation: EvaluationSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            self.graph.edges.as_mut(),
            self.graph.features.as_mut(),
            self.model.path.as_mut(),
            self.dataset.path.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn measures(&self) -> Result<Vec<Measure>> {
        self.strategies
            .iter()
            .map(|s| {
                Measure::from_strategy(s).ok_or_else(|| Error::Unknown {
                    kind: "strategy",
                    name: s.clone(),
                })
            })
            .collect()
    }

    pub fn baseline_kinds(&self) -> Result<Vec<Baseline>> {
        self.baselines.iter().map(|b| b.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return Err(Error::Config(
                "budgets must be a nonempty list of values >= 1".into(),
            ));
        }
        self.measures()?;
        self.baseline_kinds()?;
        for p in [
            self.graph.edges.as_ref(),
            self.graph.features.as_ref(),
            self.model.path.as_ref(),
            self.dataset.path.as_ref(),
        ]
        .into_iter()
        .flatten()
        {
            if !p.is_file() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        if self.graph.features.is_some() && self.graph.edges.is_none() {
            return Err(Error::Config("graph.features needs graph.edges".into()));
        }
        if self.evaluation.replications == 0
            || self.evaluation.repeats == 0
            || self.evaluation.celf_replications == 0
        {
            return Err(Error::Config("evaluation counts must be >= 1".into()));
        }
        if self.dataset.pairs == 0 {
            return Err(Error::Config("dataset.pairs must be >= 1".into()));
        }
        self.train.validate()
    }
}
