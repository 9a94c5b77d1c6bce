//! Run configuration. Every run directory keeps the effective config it was
//! produced with as `config.toml`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geollm::dataset::{SourceKind, DEFAULT_EVAL_SIZE, DEFAULT_SUBSET_SIZES};
use geollm::label::BinningHint;
use geollm::prompt::Ablation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub task: TaskConfig,
    pub splits: SplitConfig,
    pub map: MapConfig,
    pub fewshot: FewShotConfig,
    pub ablation: AblationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub name: String,
    /// Dataset CSV, ZIP boundary JSONL or ESRI ASCII weight grid.
    pub source: Option<PathBuf>,
    pub source_kind: SourceKind,
    /// Grid the raster labels are averaged from; defaults to `source`.
    pub value_raster: Option<PathBuf>,
    pub binning: BinningHint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub val: usize,
    pub test: usize,
    pub subsets: Vec<usize>,
    /// Training subset used by exports and baselines.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    /// Place snapshot (JSONL) used for nearby places.
    pub snapshot: Option<PathBuf>,
    /// Offline address book; when absent, addresses come from Nominatim.
    pub addresses: Option<PathBuf>,
    pub nominatim_url: Option<String>,
    pub overpass_url: Option<String>,
    pub min_interval_ms: u64,
    pub max_retries: u32,
    pub overpass_radius_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FewShotConfig {
    pub k: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    /// Variant slugs, e.g. `only-coordinates`.
    pub variants: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            out: PathBuf::from("run"),
            task: TaskConfig::default(),
            splits: SplitConfig::default(),
            map: MapConfig::default(),
            fewshot: FewShotConfig::default(),
            ablation: AblationConfig::default(),
        }
    }
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            name: "Population".into(),
            source: None,
            source_kind: SourceKind::ClusterTable,
            value_raster: None,
            binning: BinningHint::Quantile,
        }
    }
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            val: DEFAULT_EVAL_SIZE,
            test: DEFAULT_EVAL_SIZE,
            subsets: DEFAULT_SUBSET_SIZES.to_vec(),
            size: 10_000,
        }
    }
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            snapshot: None,
            addresses: None,
            nominatim_url: None,
            overpass_url: None,
            min_interval_ms: 1000,
            max_retries: 3,
            overpass_radius_km: 100.0,
        }
    }
}

impl Default for FewShotConfig {
    fn default() -> Self {
        Self { k: 10, test_size: 200 }
    }
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            variants: Ablation::ALL.iter().map(|a| a.slug()).collect(),
        }
    }
}

/// Errors in the configuration itself, mapped to their own exit code.
#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn paths_mut(&mut self) -> [&mut Option<PathBuf>; 4] {
        [
            &mut self.task.source,
            &mut self.task.value_raster,
            &mut self.map.snapshot,
            &mut self.map.addresses,
        ]
    }

    /// Makes every relative input path absolute against `base`.
    pub fn resolve(&mut self, base: &Path) {
        for p in self.paths_mut().into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if self.out.is_relative() {
            self.out = base.join(&self.out);
        }
    }

    /// The copy stored in a run directory: paths inside `root` become
    /// relative to it, so two runs of the same script in different places
    /// store the same file.
    pub fn rebased(&self, root: &Path) -> Self {
        let mut c = self.clone();
        for p in c.paths_mut().into_iter().flatten() {
            if let Ok(rel) = p.strip_prefix(root) {
                *p = rel.to_path_buf();
            }
        }
        c.out = PathBuf::from(".");
        c
    }

    /// Copies input paths (and the source kind that goes with the source)
    /// that are unset here from `other`.
    pub fn fill_inputs_from(&mut self, other: &RunConfig) {
        if self.task.source.is_none() && other.task.source.is_some() {
            self.task.source = other.task.source.clone();
            self.task.source_kind = other.task.source_kind;
        }
        if self.task.value_raster.is_none() {
            self.task.value_raster = other.task.value_raster.clone();
        }
        if self.map.snapshot.is_none() {
            self.map.snapshot = other.map.snapshot.clone();
        }
        if self.map.addresses.is_none() {
            self.map.addresses = other.map.addresses.clone();
        }
    }

    pub fn ablations(&self) -> Result<Vec<Ablation>> {
        self.ablation.variants.iter().map(|s| parse_ablation(s)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.splits.subsets.is_empty() {
            bail!(ConfigError("splits.subsets is empty".into()));
        }
        if !self.splits.subsets.contains(&self.splits.size) {
            bail!(ConfigError(format!(
                "training size {} is not one of splits.subsets {:?}",
                self.splits.size, self.splits.subsets
            )));
        }
        if self.fewshot.k == 0 {
            bail!(ConfigError("fewshot.k must be positive".into()));
        }
        self.ablations()?;
        Ok(())
    }
}

pub fn parse_ablation(slug: &str) -> Result<Ablation> {
    Ablation::ALL
        .into_iter()
        .find(|a| a.slug() == slug)
        .ok_or_else(|| {
            let known: Vec<String> = Ablation::ALL.iter().map(|a| a.slug()).collect();
            ConfigError(format!("unknown ablation {slug:?} (expected one of {})", known.join(", "))).into()
        })
}
