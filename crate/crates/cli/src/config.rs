//! Run configuration: a plain-text `key = value` file overlaid by flags.
//!
//! Keys (all optional):
//!
//! ```text
//! data = telemetry.csv        # dataset path
//! synthetic = false           # use the generated stand-in instead
//! out = out                   # output directory
//! seed = 0
//! test_fraction = 0.2
//! folds = 5
//! budget = 30
//! n_init = 5
//! xi = 0.01
//! timing = false              # fill the trace duration column
//! tune_tree = true            # also tune the single-tree space
//! label_column = label
//! exclude = ts,type           # comma list
//! missing_sentinel = -
//! label_normal = normal       # comma lists; switch to text labels
//! label_attack = attack
//! n_learners_min = 10
//! n_learners_max = 500
//! min_leaf_min = 1
//! min_leaf_max = 1000
//! learning_rate_min = 0.001
//! learning_rate_max = 1
//! max_depth_min = 1
//! max_depth_max = 100
//! synth_normal = 2487
//! synth_attack = 1110
//! synth_features = 20
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bogp_core::bayesopt::spaces::{EnsembleBounds, TreeBounds};
use bogp_core::bayesopt::{default_noise_grid, OptimizeConfig, DEFAULT_CANDIDATES};
use bogp_core::data::{parse_key_values, IngestConfig, SynthConfig};
use bogp_core::eval::TuneSettings;

use crate::Failure;

const INGEST_KEYS: [&str; 5] = [
    "label_column",
    "exclude",
    "missing_sentinel",
    "label_normal",
    "label_attack",
];

const RUN_KEYS: [&str; 22] = [
    "data",
    "synthetic",
    "out",
    "seed",
    "test_fraction",
    "folds",
    "budget",
    "n_init",
    "xi",
    "timing",
    "tune_tree",
    "n_learners_min",
    "n_learners_max",
    "min_leaf_min",
    "min_leaf_max",
    "learning_rate_min",
    "learning_rate_max",
    "max_depth_min",
    "max_depth_max",
    "synth_normal",
    "synth_attack",
    "synth_features",
];

/// Where the rows come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SynthConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Option<DataSource>,
    pub ingest: IngestConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub test_fraction: f64,
    pub folds: usize,
    pub budget: usize,
    pub n_init: usize,
    pub xi: f64,
    pub timing: bool,
    pub tune_tree: bool,
    pub ensemble_bounds: EnsembleBounds,
    pub tree_bounds: TreeBounds,
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub budget: Option<usize>,
    pub test_fraction: Option<f64>,
    pub synthetic: bool,
    pub timing: bool,
}

fn parse<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, Failure> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Failure::input(format!("config key `{key}`: cannot parse `{v}`")))
        })
        .transpose()
}

fn parse_bool(map: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>, Failure> {
    map.get(key)
        .map(|v| match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(Failure::input(format!("config key `{key}`: expected a boolean, got `{v}`"))),
        })
        .transpose()
}

impl RunConfig {
    /// Builds the configuration from an optional file plus flag overrides,
    /// then validates it.
    pub fn load(file: Option<&Path>, flags: &Overrides) -> Result<Self, Failure> {
        let map = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Failure::input(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_key_values(&text)
            }
            None => BTreeMap::new(),
        };
        let cfg = Self::from_map(&map, flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_map(map: &BTreeMap<String, String>, flags: &Overrides) -> Result<Self, Failure> {
        if let Some(unknown) = map
            .keys()
            .find(|k| !RUN_KEYS.contains(&k.as_str()) && !INGEST_KEYS.contains(&k.as_str()))
        {
            return Err(Failure::input(format!("unknown config key `{unknown}`")));
        }

        let defaults = EnsembleBounds::default();
        let ensemble_bounds = EnsembleBounds {
            n_learners: (
                parse(map, "n_learners_min")?.unwrap_or(defaults.n_learners.0),
                parse(map, "n_learners_max")?.unwrap_or(defaults.n_learners.1),
            ),
            min_leaf_size: (
                parse(map, "min_leaf_min")?.unwrap_or(defaults.min_leaf_size.0),
                parse(map, "min_leaf_max")?.unwrap_or(defaults.min_leaf_size.1),
            ),
            learning_rate: (
                parse(map, "learning_rate_min")?.unwrap_or(defaults.learning_rate.0),
                parse(map, "learning_rate_max")?.unwrap_or(defaults.learning_rate.1),
            ),
        };
        let tree_defaults = TreeBounds::default();
        let tree_bounds = TreeBounds {
            min_leaf_size: ensemble_bounds.min_leaf_size,
            max_depth: (
                parse(map, "max_depth_min")?.unwrap_or(tree_defaults.max_depth.0),
                parse(map, "max_depth_max")?.unwrap_or(tree_defaults.max_depth.1),
            ),
        };

        let seed = flags.seed.or(parse(map, "seed")?).unwrap_or(0);
        let synthetic = flags.synthetic || parse_bool(map, "synthetic")?.unwrap_or(false);
        let data = flags.data.clone().or(map.get("data").map(PathBuf::from));
        let source = if synthetic {
            let desk = SynthConfig::desk_scale(seed);
            Some(DataSource::Synthetic(SynthConfig::new(
                parse(map, "synth_normal")?.unwrap_or(desk.n_normal),
                parse(map, "synth_attack")?.unwrap_or(desk.n_attack),
                parse(map, "synth_features")?.unwrap_or(desk.n_features),
                seed,
            )))
        } else {
            data.map(DataSource::File)
        };

        Ok(Self {
            source,
            ingest: IngestConfig::from_map(map),
            out: flags
                .out
                .clone()
                .or(map.get("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            seed,
            test_fraction: flags
                .test_fraction
                .or(parse(map, "test_fraction")?)
                .unwrap_or(0.2),
            folds: flags.folds.or(parse(map, "folds")?).unwrap_or(5),
            budget: flags.budget.or(parse(map, "budget")?).unwrap_or(30),
            n_init: parse(map, "n_init")?.unwrap_or(5),
            xi: parse(map, "xi")?.unwrap_or(bogp_core::bayesopt::DEFAULT_XI),
            timing: flags.timing || parse_bool(map, "timing")?.unwrap_or(false),
            tune_tree: parse_bool(map, "tune_tree")?.unwrap_or(true),
            ensemble_bounds,
            tree_bounds,
        })
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Failure::input(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.folds < 2 {
            return Err(Failure::input(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.n_init == 0 || self.budget < self.n_init {
            return Err(Failure::input(format!(
                "need budget >= n_init >= 1, got budget {} and n_init {}",
                self.budget, self.n_init
            )));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return Err(Failure::input(format!("xi must be >= 0, got {}", self.xi)));
        }
        if let Some(DataSource::File(path)) = &self.source {
            if !path.is_file() {
                return Err(Failure::input(format!("data file not found: {}", path.display())));
            }
        }
        // bounds are checked when the search spaces are built
        self.search_check()
    }

    fn search_check(&self) -> Result<(), Failure> {
        bogp_core::bayesopt::spaces::ensemble_space(&self.ensemble_bounds)
            .and_then(|_| bogp_core::bayesopt::spaces::tree_space(&self.tree_bounds))
            .map(|_| ())
            .map_err(|e| Failure::input(format!("search bounds: {e}")))
    }

    pub fn require_source(&self) -> Result<&DataSource, Failure> {
        self.source
            .as_ref()
            .ok_or_else(|| Failure::input("no dataset: pass --data PATH or --synthetic"))
    }

    pub fn tune_settings(&self) -> TuneSettings {
        TuneSettings {
            folds: self.folds,
            cv_seed: self.seed,
            optimizer: OptimizeConfig {
                budget: self.budget,
                n_init: self.n_init,
                xi: self.xi,
                seed: self.seed,
                n_candidates: DEFAULT_CANDIDATES,
                noise_grid: default_noise_grid(),
            },
        }
    }
}
