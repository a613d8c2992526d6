//! Report emission: JSON lines (machine), CSV (plotting) and markdown
//! (human). The CSV and markdown tiers are deterministic functions of the
//! run records; wall-clock measurements stay in the JSON tier only.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use hsd_core::hier::RunMode;

use crate::runner::RunRecord;

fn mode_rank(mode: RunMode) -> u8 {
    match mode {
        RunMode::Ar => 0,
        RunMode::PageOnly => 1,
        RunMode::Hierarchical => 2,
    }
}

fn opt_f(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_default()
}

fn opt_u(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// JSON lines
// ---------------------------------------------------------------------------

pub fn write_jsonl(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

pub const CSV_HEADER: [&str; 12] = [
    "doc_id",
    "mode",
    "tau",
    "n",
    "sub_rate",
    "del_rate",
    "jitter",
    "aal",
    "tokens_per_step",
    "steps",
    "sr_decode",
    "sr_e2e",
];

/// Render the aggregate CSV. Fixed-precision formatting keeps reruns
/// byte-identical.
pub fn csv_string(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.doc_id.clone(),
            r.mode.as_str().to_string(),
            opt_f(r.tau, 2),
            opt_u(r.n),
            opt_f(r.sub_rate, 2),
            opt_f(r.del_rate, 2),
            opt_f(r.jitter, 2),
            format!("{:.4}", r.aal),
            format!("{:.4}", r.tokens_per_step),
            r.steps.to_string(),
            format!("{:.4}", r.sr_decode),
            format!("{:.4}", r.sr_e2e),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    std::fs::write(path, csv_string(records)?)
        .with_context(|| format!("writing {}", path.display()))
}

// ---------------------------------------------------------------------------
// Markdown summary
// ---------------------------------------------------------------------------

#[derive(Default)]
struct Agg {
    pages: usize,
    aal: f64,
    tps: f64,
    sr_decode: f64,
    sr_e2e: f64,
}

/// One row per (mode, τ, n, noise point), averaged over documents.
pub fn summary_markdown(records: &[RunRecord]) -> String {
    let mut groups: BTreeMap<(u8, String, String, String), Agg> = BTreeMap::new();
    for r in records {
        let key = (
            mode_rank(r.mode),
            opt_f(r.tau, 2),
            opt_u(r.n),
            format!("{}/{}/{}", opt_f(r.sub_rate, 2), opt_f(r.del_rate, 2), opt_f(r.jitter, 2)),
        );
        let agg = groups.entry(key).or_default();
        agg.pages += 1;
        agg.aal += r.aal;
        agg.tps += r.tokens_per_step;
        agg.sr_decode += r.sr_decode;
        agg.sr_e2e += r.sr_e2e;
    }

    let mut out = String::new();
    out.push_str("# Benchmark summary\n\n");
    out.push_str("Means over documents, one row per experiment cell.\n\n");
    out.push_str("| mode | tau | n | sub_rate | del_rate | jitter | pages | AAL | tokens/step | SR_decode | SR_e2e |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
    for ((rank, tau, n, noise), agg) in &groups {
        let mode = match rank {
            0 => "ar",
            1 => "page_only",
            _ => "hierarchical",
        };
        let mut noise_parts = noise.split('/');
        let (sub, del, jit) = (
            noise_parts.next().unwrap_or(""),
            noise_parts.next().unwrap_or(""),
            noise_parts.next().unwrap_or(""),
        );
        let k = agg.pages as f64;
        out.push_str(&format!(
            "| {mode} | {tau} | {n} | {sub} | {del} | {jit} | {pages} | {aal:.3} | {tps:.3} | {srd:.3} | {sre:.3} |\n",
            tau = if tau.is_empty() { "–" } else { tau },
            n = if n.is_empty() { "–" } else { n },
            sub = if sub.is_empty() { "–" } else { sub },
            del = if del.is_empty() { "–" } else { del },
            jit = if jit.is_empty() { "–" } else { jit },
            pages = agg.pages,
            aal = agg.aal / k,
            tps = agg.tps / k,
            srd = agg.sr_decode / k,
            sre = agg.sr_e2e / k,
        ));
    }
    out
}

pub fn write_summary_md(path: &Path, records: &[RunRecord]) -> Result<()> {
    std::fs::write(path, summary_markdown(records))
        .with_context(|| format!("writing {}", path.display()))
}
