//! Experiment execution: corpus preparation, the job matrix, and parallel
//! page runs. Report assembly is an ordered reduction over the job list, so
//! results are independent of scheduling and `--jobs`.

use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use hsd_core::corpus::builtin_vocabulary;
use hsd_core::doc::{generate_document, Document};
use hsd_core::draft::{aggregate_page_drafts, run_pipeline, DraftSet, NoiseSpec};
use hsd_core::dsv::{spec_decode_traced, AlignParams, DecodeRun, StepDetail, StepRecord};
use hsd_core::hier::{run_page, run_stage1, PageResult, RunMode, Stage1Region};
use hsd_core::metrics::{page_metrics, speedup, RunMetrics};
use hsd_core::model::{NGramModel, ScriptedModel, TargetModel};
use hsd_core::rng::{substream, substream_seed};
use hsd_core::token::Vocabulary;

use crate::config::{CellSpec, CorpusSpec, ExperimentConfig, ModelSpec};

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// Stable name for the `idx`-th document of a seeded corpus.
pub fn corpus_doc_id(seed: u64, idx: usize) -> String {
    format!("doc_{seed:04}_{idx:03}")
}

/// Generate the corpus deterministically from the experiment seed.
pub fn build_corpus(vocab: &Vocabulary, spec: &CorpusSpec, seed: u64) -> Result<Vec<Document>> {
    use rand::Rng;
    let mix = spec.kind_mix.unwrap_or_default();
    let mut docs = Vec::with_capacity(spec.docs);
    for i in 0..spec.docs {
        let mut shape_rng = substream(seed, &format!("corpus/shape/{i}"));
        let n_regions = shape_rng.gen_range(spec.n_regions[0]..=spec.n_regions[1]);
        let doc_seed = substream_seed(seed, &format!("corpus/doc/{i}"));
        let doc = generate_document(
            vocab,
            corpus_doc_id(seed, i),
            doc_seed,
            n_regions,
            (spec.region_len[0], spec.region_len[1]),
            &mix,
        )
        .with_context(|| format!("generating corpus document {i}"))?;
        docs.push(doc);
    }
    Ok(docs)
}

// ---------------------------------------------------------------------------
// Model handle
// ---------------------------------------------------------------------------

/// The configured target model.
pub enum ModelHandle {
    Scripted(ScriptedModel<f64>),
    Ngram(NGramModel<f64>),
}

impl ModelHandle {
    pub fn build(spec: &ModelSpec, vocab: &Vocabulary, docs: &[Document]) -> Result<Self> {
        Ok(match spec {
            ModelSpec::Scripted { p_top, resync_min } => ModelHandle::Scripted(
                ScriptedModel::from_documents(docs, vocab.size(), *p_top, *resync_min)
                    .context("building scripted model")?,
            ),
            ModelSpec::Ngram { order, delta } => ModelHandle::Ngram(
                NGramModel::from_corpus(vocab, *order, *delta).context("building n-gram model")?,
            ),
        })
    }

    pub fn vocab_size(&self) -> usize {
        match self {
            ModelHandle::Scripted(m) => m.vocab_size(),
            ModelHandle::Ngram(m) => m.vocab_size(),
        }
    }

    pub fn run_page(
        &self,
        doc: &Document,
        mode: RunMode,
        noise: &NoiseSpec,
        drafts_per_region: usize,
        params: &AlignParams<f64>,
    ) -> hsd_core::Result<PageResult> {
        match self {
            ModelHandle::Scripted(m) => run_page(m, doc, mode, noise, drafts_per_region, params),
            ModelHandle::Ngram(m) => run_page(m, doc, mode, noise, drafts_per_region, params),
        }
    }

    fn stage1(
        &self,
        doc: &Document,
        drafts: &DraftSet,
        params: &AlignParams<f64>,
    ) -> hsd_core::Result<Vec<Stage1Region>> {
        match self {
            ModelHandle::Scripted(m) => run_stage1(m, doc, drafts, params),
            ModelHandle::Ngram(m) => run_stage1(m, doc, drafts, params),
        }
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One machine-readable run record (one JSON line).
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub doc_id: String,
    pub mode: RunMode,
    pub tau: Option<f64>,
    pub n: Option<usize>,
    pub sub_rate: Option<f64>,
    pub del_rate: Option<f64>,
    pub jitter: Option<f64>,
    pub noise_seed: Option<u64>,
    pub aal: f64,
    pub tokens_per_step: f64,
    pub steps: usize,
    pub modeled_decode_time: f64,
    pub modeled_full_time: f64,
    pub sr_decode: f64,
    pub sr_e2e: f64,
    /// Wall-clock duration of this page run, informational only (never part
    /// of the deterministic CSV tier).
    pub measured_wall_seconds: f64,
    pub output_tokens: usize,
    pub eos_reached: bool,
    pub text: String,
    pub draft_quality: Option<f64>,
    pub degraded_regions: usize,
    pub stage1_records: Vec<Vec<StepRecord>>,
    pub stage2_records: Vec<StepRecord>,
}

#[derive(Debug, Clone)]
pub struct JobFailure {
    pub doc_id: String,
    pub mode: RunMode,
    pub message: String,
}

pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<JobFailure>,
}

// ---------------------------------------------------------------------------
// Experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Job {
    doc_idx: usize,
    cell: CellSpec,
    noise_idx: Option<usize>,
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub vocab: Vocabulary,
    pub docs: Vec<Document>,
    pub model: ModelHandle,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let vocab = builtin_vocabulary();
        let docs = if let Some(spec) = &config.corpus {
            build_corpus(&vocab, spec, config.seed)?
        } else {
            config
                .documents
                .iter()
                .map(|p| {
                    hsd_core::doc::load_document(p, &vocab)
                        .with_context(|| format!("loading document {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?
        };
        anyhow::ensure!(!docs.is_empty(), "config: no documents to run");
        let model = ModelHandle::build(&config.model, &vocab, &docs)?;
        Ok(Experiment { config, vocab, docs, model })
    }

    pub fn doc(&self, doc_id: &str) -> Option<&Document> {
        self.docs.iter().find(|d| d.doc_id == doc_id)
    }

    fn noise_for(&self, doc: &Document, noise_idx: usize) -> NoiseSpec {
        let point = self.config.noises[noise_idx];
        NoiseSpec {
            sub_rate: point.sub_rate,
            del_rate: point.del_rate,
            jitter: point.jitter,
            // Depends only on (experiment seed, document, noise point), so
            // every cell sees identical drafts: paired comparisons.
            seed: substream_seed(self.config.seed, &format!("noise/{}/{}", doc.doc_id, noise_idx)),
        }
    }

    fn jobs(&self) -> Vec<Job> {
        let cells = self.config.resolved_cells();
        let mut jobs = Vec::new();
        for doc_idx in 0..self.docs.len() {
            for &cell in &cells {
                if cell.mode == RunMode::Ar {
                    jobs.push(Job { doc_idx, cell, noise_idx: None });
                } else {
                    for noise_idx in 0..self.config.noises.len() {
                        jobs.push(Job { doc_idx, cell, noise_idx: Some(noise_idx) });
                    }
                }
            }
        }
        jobs
    }

    /// Greedy baseline metrics per document, shared by every cell's speedup.
    fn baselines(&self) -> Vec<Result<(PageResult, RunMetrics<f64>), String>> {
        let params = self.config.params.align_params(1.0, self.config.params.n);
        self.docs
            .iter()
            .map(|doc| {
                let res = self
                    .model
                    .run_page(doc, RunMode::Ar, &NoiseSpec::noiseless(0), 1, &params)
                    .map_err(|e| format!("baseline decode failed: {e}"))?;
                let metrics = page_metrics(&res, &self.config.latency, doc.page_truth.len())
                    .map_err(|e| format!("baseline metrics failed: {e}"))?;
                Ok((res, metrics))
            })
            .collect()
    }

    fn run_job(
        &self,
        job: &Job,
        baseline: &(PageResult, RunMetrics<f64>),
    ) -> Result<RunRecord, String> {
        let doc = &self.docs[job.doc_idx];
        let tau = job.cell.tau.unwrap_or(0.75);
        let n = job.cell.n.unwrap_or(self.config.params.n);
        let params = self.config.params.align_params(tau, n);
        let noise = match job.noise_idx {
            Some(idx) => self.noise_for(doc, idx),
            None => NoiseSpec::noiseless(0),
        };

        let started = Instant::now();
        let result = if job.cell.mode == RunMode::Ar {
            baseline.0.clone()
        } else {
            self.model
                .run_page(doc, job.cell.mode, &noise, self.config.drafts_per_region, &params)
                .map_err(|e| e.to_string())?
        };
        let wall = started.elapsed().as_secs_f64();

        let mut metrics = page_metrics(&result, &self.config.latency, doc.page_truth.len())
            .map_err(|e| e.to_string())?;
        metrics.measured_decode_time = wall;
        metrics.measured_full_time = wall;
        let (sr_decode, sr_e2e) = speedup(&baseline.1, &metrics).map_err(|e| e.to_string())?;

        let point = job.noise_idx.map(|i| self.config.noises[i]);
        Ok(RunRecord {
            doc_id: doc.doc_id.clone(),
            mode: job.cell.mode,
            tau: (job.cell.mode != RunMode::Ar).then_some(tau),
            n: (job.cell.mode != RunMode::Ar).then_some(n),
            sub_rate: point.map(|p| p.sub_rate),
            del_rate: point.map(|p| p.del_rate),
            jitter: point.map(|p| p.jitter),
            noise_seed: job.noise_idx.map(|_| noise.seed),
            aal: metrics.aal,
            tokens_per_step: metrics.tokens_per_step,
            steps: metrics.steps,
            modeled_decode_time: metrics.modeled_decode_time,
            modeled_full_time: metrics.modeled_full_time,
            sr_decode,
            sr_e2e,
            measured_wall_seconds: wall,
            output_tokens: result.output.len(),
            eos_reached: result.eos_reached,
            text: self.vocab.decode(&result.output),
            draft_quality: result.draft_quality,
            degraded_regions: result.stage1.iter().filter(|r| r.degraded).count(),
            stage1_records: result.stage1.iter().map(|r| r.records.clone()).collect(),
            stage2_records: result.stage2_records,
        })
    }

    /// Execute the full matrix with up to `jobs` worker threads (0 = rayon's
    /// default). Output order is the deterministic job order regardless of
    /// thread count.
    pub fn run(&self, jobs: usize) -> Result<ExperimentOutcome> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building worker pool")?;
        let baselines = self.baselines();
        let job_list = self.jobs();
        let results: Vec<Result<RunRecord, JobFailure>> = pool.install(|| {
            job_list
                .par_iter()
                .map(|job| {
                    let doc = &self.docs[job.doc_idx];
                    let baseline = baselines[job.doc_idx].as_ref().map_err(|e| JobFailure {
                        doc_id: doc.doc_id.clone(),
                        mode: job.cell.mode,
                        message: e.clone(),
                    })?;
                    self.run_job(job, baseline).map_err(|message| JobFailure {
                        doc_id: doc.doc_id.clone(),
                        mode: job.cell.mode,
                        message,
                    })
                })
                .collect()
        });
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for r in results {
            match r {
                Ok(rec) => records.push(rec),
                Err(f) => failures.push(f),
            }
        }
        Ok(ExperimentOutcome { records, failures })
    }

    // -----------------------------------------------------------------------
    // Tracing
    // -----------------------------------------------------------------------

    /// Run one document's page pass with full step details for `hsd trace`.
    pub fn trace_doc(
        &self,
        doc_id: &str,
        mode: RunMode,
        noise_idx: usize,
        tau: f64,
    ) -> Result<TraceOutput> {
        let doc = self
            .doc(doc_id)
            .with_context(|| format!("document `{doc_id}` not found in the corpus"))?;
        anyhow::ensure!(noise_idx < self.config.noises.len(), "noise index out of range");
        anyhow::ensure!(mode != RunMode::Ar, "trace requires a draft-based mode");
        let params = self.config.params.align_params(tau, self.config.params.n);
        let noise = self.noise_for(doc, noise_idx);
        let drafts =
            run_pipeline(doc, &noise, self.config.drafts_per_region, self.model.vocab_size())?;
        let (stage1, page_drafts) = if mode == RunMode::Hierarchical {
            let stage1 = self.model.stage1(doc, &drafts, &params)?;
            let outputs: Vec<_> = stage1.iter().map(|r| r.output.clone()).collect();
            (stage1, aggregate_page_drafts(&outputs))
        } else {
            (Vec::new(), aggregate_page_drafts(&drafts.all_drafts()))
        };
        let ctx = hsd_core::model::ScoringContext::page(&doc.doc_id);
        let (run, details) = match &self.model {
            ModelHandle::Scripted(m) => {
                spec_decode_traced(m, &ctx, page_drafts.drafts(), &params)?
            }
            ModelHandle::Ngram(m) => spec_decode_traced(m, &ctx, page_drafts.drafts(), &params)?,
        };
        Ok(TraceOutput { doc_id: doc_id.to_string(), mode, tau, stage1, run, details })
    }
}

pub struct TraceOutput {
    pub doc_id: String,
    pub mode: RunMode,
    pub tau: f64,
    pub stage1: Vec<Stage1Region>,
    pub run: DecodeRun,
    pub details: Vec<StepDetail<f64>>,
}
