//! Experiment configuration: a single JSON file fully determines a run.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use hsd_core::dsv::AlignParams;
use hsd_core::hier::RunMode;
use hsd_core::metrics::LatencyModel;

/// Synthetic corpus parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub docs: usize,
    /// Inclusive range of regions per page.
    #[serde(default = "default_regions")]
    pub n_regions: [usize; 2],
    /// Inclusive range of tokens per region.
    #[serde(default = "default_region_len")]
    pub region_len: [usize; 2],
    #[serde(default)]
    pub kind_mix: Option<hsd_core::doc::KindMix>,
}

fn default_regions() -> [usize; 2] {
    [2, 4]
}

fn default_region_len() -> [usize; 2] {
    [8, 20]
}

/// Target-model selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Scripted {
        #[serde(default = "default_p_top")]
        p_top: f64,
        #[serde(default = "default_resync_min")]
        resync_min: usize,
    },
    Ngram {
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

fn default_p_top() -> f64 {
    0.9
}
fn default_resync_min() -> usize {
    2
}
fn default_order() -> usize {
    3
}
fn default_delta() -> f64 {
    0.1
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Scripted { p_top: default_p_top(), resync_min: default_resync_min() }
    }
}

/// Alignment parameters shared by every cell; τ and n come from the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_max_tree")]
    pub max_tree_tokens: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
}

fn default_n() -> usize {
    3
}
fn default_max_tree() -> usize {
    256
}
fn default_max_len() -> usize {
    2048
}
fn default_depth_cap() -> usize {
    16
}

impl Default for ParamSpec {
    fn default() -> Self {
        ParamSpec {
            n: default_n(),
            max_tree_tokens: default_max_tree(),
            max_len: default_max_len(),
            depth_cap: default_depth_cap(),
        }
    }
}

impl ParamSpec {
    pub fn align_params(&self, tau: f64, n: usize) -> AlignParams<f64> {
        AlignParams {
            n,
            tau,
            max_tree_tokens: self.max_tree_tokens,
            max_len: self.max_len,
            depth_cap: self.depth_cap,
        }
    }
}

/// One noise operating point; the draw seed is derived per (doc, point).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisePoint {
    #[serde(default)]
    pub sub_rate: f64,
    #[serde(default)]
    pub del_rate: f64,
    #[serde(default)]
    pub jitter: f64,
}

/// An explicit experiment cell, overriding the mode × τ × n cross-product.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub mode: RunMode,
    pub tau: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub corpus: Option<CorpusSpec>,
    /// Document JSON files, used instead of a generated corpus.
    #[serde(default)]
    pub documents: Vec<PathBuf>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub params: ParamSpec,
    #[serde(default = "LatencyModel::default")]
    pub latency: LatencyModel<f64>,
    #[serde(default = "default_dpr")]
    pub drafts_per_region: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<RunMode>,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    /// Window sizes; empty means "use params.n".
    #[serde(default)]
    pub ns: Vec<usize>,
    #[serde(default = "default_noises")]
    pub noises: Vec<NoisePoint>,
    /// Explicit cells; when non-empty, replaces the modes × taus × ns product.
    #[serde(default)]
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_dpr() -> usize {
    1
}

fn default_modes() -> Vec<RunMode> {
    vec![RunMode::Ar, RunMode::PageOnly, RunMode::Hierarchical]
}

fn default_taus() -> Vec<f64> {
    vec![0.75]
}

fn default_noises() -> Vec<NoisePoint> {
    vec![NoisePoint { sub_rate: 0.0, del_rate: 0.0, jitter: 0.0 }]
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// The window sizes to sweep (defaulting to the base parameter).
    pub fn window_sizes(&self) -> Vec<usize> {
        if self.ns.is_empty() {
            vec![self.params.n]
        } else {
            self.ns.clone()
        }
    }

    /// The experiment cells: explicit `cells` verbatim, otherwise the
    /// modes × taus × ns cross-product with the draft-free baseline collapsed
    /// to a single cell.
    pub fn resolved_cells(&self) -> Vec<CellSpec> {
        if !self.cells.is_empty() {
            return self.cells.clone();
        }
        let mut out = Vec::new();
        if self.modes.contains(&RunMode::Ar) {
            out.push(CellSpec { mode: RunMode::Ar, tau: None, n: None });
        }
        for &mode in self.modes.iter().filter(|m| **m != RunMode::Ar) {
            for &tau in &self.taus {
                for &n in &self.window_sizes() {
                    out.push(CellSpec { mode, tau: Some(tau), n: Some(n) });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.corpus, self.documents.is_empty()) {
            (None, true) => bail!("config: one of `corpus` or `documents` is required"),
            (Some(_), false) => bail!("config: `corpus` and `documents` are mutually exclusive"),
            _ => {}
        }
        if let Some(c) = &self.corpus {
            ensure!(c.docs > 0, "config.corpus.docs: must be positive");
            ensure!(
                c.n_regions[0] >= 1 && c.n_regions[0] <= c.n_regions[1],
                "config.corpus.n_regions: invalid range [{}, {}]",
                c.n_regions[0],
                c.n_regions[1]
            );
            ensure!(
                c.region_len[0] >= 1 && c.region_len[0] <= c.region_len[1],
                "config.corpus.region_len: invalid range [{}, {}]",
                c.region_len[0],
                c.region_len[1]
            );
        }
        match &self.model {
            ModelSpec::Scripted { p_top, resync_min } => {
                ensure!(
                    *p_top > 0.0 && *p_top < 1.0,
                    "config.model.p_top: {p_top} outside (0, 1)"
                );
                ensure!(*resync_min >= 1, "config.model.resync_min: must be at least 1");
            }
            ModelSpec::Ngram { order, delta } => {
                ensure!(*order >= 1, "config.model.order: must be at least 1");
                ensure!(*delta > 0.0, "config.model.delta: must be positive");
            }
        }
        ensure!(self.drafts_per_region >= 1, "config.drafts_per_region: must be at least 1");
        ensure!(!self.noises.is_empty(), "config.noises: sweep list must be non-empty");
        for (i, p) in self.noises.iter().enumerate() {
            let unit = |x: f64| (0.0..=1.0).contains(&x);
            ensure!(
                unit(p.sub_rate) && unit(p.del_rate),
                "config.noises[{i}]: rates must lie in [0, 1]"
            );
            ensure!(p.jitter >= 0.0, "config.noises[{i}].jitter: must be non-negative");
        }
        for &tau in &self.taus {
            ensure!(tau > 0.0 && tau <= 1.0, "config.taus: {tau} outside (0, 1]");
        }
        for &n in &self.ns {
            ensure!(n >= 1, "config.ns: window size must be at least 1");
        }
        let cells = self.resolved_cells();
        ensure!(!cells.is_empty(), "config: `modes`/`cells` yield no experiment cells");
        for (i, c) in cells.iter().enumerate() {
            if c.mode != RunMode::Ar {
                let tau = c.tau.unwrap_or(1.0);
                ensure!(
                    tau > 0.0 && tau <= 1.0,
                    "config cell {i}: tau {tau} outside (0, 1]"
                );
                ensure!(c.n.map_or(true, |n| n >= 1), "config cell {i}: n must be at least 1");
            }
        }
        self.params
            .align_params(1.0, self.params.n)
            .validate()
            .map_err(|e| anyhow::anyhow!("config.params: {e}"))?;
        Ok(())
    }
}
