//! `hsd` — benchmark harness for hierarchical speculative document decoding.
//!
//! Exit codes: 0 success, 1 some runs failed, 2 configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hsd_core::corpus::builtin_vocabulary;
use hsd_core::doc::document_to_json;
use hsd_core::dsv::WalkOutcome;
use hsd_core::hier::RunMode;
use hsd_core::token::Token;

use hsd_cli::config::{CorpusSpec, ExperimentConfig};
use hsd_cli::report;
use hsd_cli::runner::{build_corpus, Experiment, TraceOutput};

#[derive(Parser)]
#[command(name = "hsd", version, about = "Hierarchical speculative decoding benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Output directory (overrides the config's `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a step-by-step verification trace for one document.
    Trace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        doc: String,
        /// `page_only` or `hierarchical`.
        #[arg(long, default_value = "hierarchical")]
        mode: String,
        /// Index into the config's noise sweep list.
        #[arg(long, default_value_t = 0)]
        noise_idx: usize,
        #[arg(long, default_value_t = 0.75)]
        tau: f64,
    },
    /// Generate a seeded document corpus as JSON files.
    GenCorpus {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        docs: usize,
        #[arg(long)]
        out: PathBuf,
        /// Inclusive regions-per-page range, e.g. `2,4`.
        #[arg(long, default_value = "2,4")]
        regions: String,
        /// Inclusive tokens-per-region range, e.g. `8,20`.
        #[arg(long, default_value = "8,20")]
        region_len: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, jobs, out } => cmd_run(&config, jobs, out),
        Command::Trace { config, doc, mode, noise_idx, tau } => {
            cmd_trace(&config, &doc, &mode, noise_idx, tau).map(|()| 0)
        }
        Command::GenCorpus { seed, docs, out, regions, region_len } => {
            cmd_gen_corpus(seed, docs, &out, &regions, &region_len).map(|()| 0)
        }
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Ok(seed) = std::env::var("HSD_SEED") {
        config.seed = seed
            .trim()
            .parse::<u64>()
            .with_context(|| format!("HSD_SEED `{seed}` is not a valid seed"))?;
    }
    Ok(config)
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(config_path: &PathBuf, jobs: usize, out: Option<PathBuf>) -> Result<u8> {
    let config = load_config(config_path)?;
    let out_dir = out
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("hsd-out"));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let experiment = Experiment::prepare(config)?;
    let outcome = experiment.run(jobs)?;

    report::write_jsonl(&out_dir.join("runs.jsonl"), &outcome.records)?;
    report::write_csv(&out_dir.join("summary.csv"), &outcome.records)?;
    report::write_summary_md(&out_dir.join("summary.md"), &outcome.records)?;

    println!(
        "wrote {} run records ({} failures) to {}",
        outcome.records.len(),
        outcome.failures.len(),
        out_dir.display()
    );
    for f in &outcome.failures {
        eprintln!("run failed: doc {} mode {}: {}", f.doc_id, f.mode.as_str(), f.message);
    }
    Ok(if outcome.failures.is_empty() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

fn parse_mode(s: &str) -> Result<RunMode> {
    match s {
        "page_only" => Ok(RunMode::PageOnly),
        "hierarchical" => Ok(RunMode::Hierarchical),
        other => anyhow::bail!("unknown mode `{other}` (expected page_only or hierarchical)"),
    }
}

fn cmd_trace(config_path: &PathBuf, doc: &str, mode: &str, noise_idx: usize, tau: f64) -> Result<()> {
    let config = load_config(config_path)?;
    let experiment = Experiment::prepare(config)?;
    let trace = experiment.trace_doc(doc, parse_mode(mode)?, noise_idx, tau)?;
    print_trace(&experiment, &trace);
    Ok(())
}

fn print_trace(experiment: &Experiment, trace: &TraceOutput) {
    let form = |t: Token| experiment.vocab.form(t).unwrap_or("?").to_string();
    let seq = |s: &hsd_core::token::TokenSeq| {
        s.iter().map(form).collect::<Vec<_>>().join(" ")
    };

    println!("doc {} mode {} tau {:.2}", trace.doc_id, trace.mode.as_str(), trace.tau);
    if !trace.stage1.is_empty() {
        println!("stage 1 ({} regions):", trace.stage1.len());
        for r in &trace.stage1 {
            println!(
                "  region {} (source {}): {} tokens in {} steps{}",
                r.region_index,
                r.source,
                r.output.len(),
                r.records.len(),
                if r.degraded { ", DEGRADED (best raw draft passed through)" } else { "" },
            );
        }
    }
    println!("stage 2 ({} steps):", trace.details.len());
    for d in &trace.details {
        println!(
            "  step {}{}: window=[{}] candidates={} tree={}",
            d.step,
            if d.anchored { " (anchored)" } else { "" },
            seq(&d.window),
            d.candidates_found,
            d.tree_tokens,
        );
        if d.candidates_found == 0 {
            println!("    no candidates, plain decode step");
        }
        for w in &d.walk {
            let ratio = w.ratio.map(|r| format!(" ratio={r:.4}")).unwrap_or_default();
            let star = w.u_star.map(form).unwrap_or_else(|| "-".into());
            let verdict = match w.outcome {
                WalkOutcome::Accepted => "accept",
                WalkOutcome::Rejected => "reject",
                WalkOutcome::Leaf => "leaf",
            };
            println!(
                "    depth {}: u*={} u^={}{} -> {}",
                w.depth,
                star,
                form(w.u_hat),
                ratio,
                verdict
            );
        }
        match d.appended {
            Some(t) => println!("    accepted {} +bonus `{}`", d.a_i, form(t)),
            None => println!("    accepted {} , end of sequence", d.a_i),
        }
    }
    println!(
        "output ({} tokens{}): {}",
        trace.run.output.len(),
        if trace.run.eos_reached { ", eos" } else { "" },
        seq(&trace.run.output)
    );
}

// ---------------------------------------------------------------------------
// gen-corpus
// ---------------------------------------------------------------------------

fn parse_range(s: &str, flag: &str) -> Result<[usize; 2]> {
    let parts: Vec<&str> = s.split(',').collect();
    anyhow::ensure!(parts.len() == 2, "--{flag} expects `lo,hi`, got `{s}`");
    let lo = parts[0].trim().parse::<usize>().with_context(|| format!("--{flag} low bound"))?;
    let hi = parts[1].trim().parse::<usize>().with_context(|| format!("--{flag} high bound"))?;
    anyhow::ensure!(lo >= 1 && lo <= hi, "--{flag}: invalid range {lo},{hi}");
    Ok([lo, hi])
}

fn cmd_gen_corpus(seed: u64, docs: usize, out: &PathBuf, regions: &str, region_len: &str) -> Result<()> {
    let spec = CorpusSpec {
        docs,
        n_regions: parse_range(regions, "regions")?,
        region_len: parse_range(region_len, "region-len")?,
        kind_mix: None,
    };
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let vocab = builtin_vocabulary();
    let generated = build_corpus(&vocab, &spec, seed)?;
    for doc in &generated {
        let path = out.join(format!("{}.json", doc.doc_id));
        std::fs::write(&path, document_to_json(doc, &vocab))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote {} documents to {}", generated.len(), out.display());
    Ok(())
}
