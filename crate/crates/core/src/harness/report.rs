use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cascade::seeds_hash;
use crate::error::{Error, Result};
use crate::graph::io;
use crate::harness::RunConfig;
use crate::seeds::SeedSet;

pub const CSV_HEADER: &str = "method,k,mean,std,time_ms,seeds_hash,status";

#[derive(Debug, Clone, Default, Serialize)]
pub struct DatasetStats {
    pub pairs: usize,
    pub distinct_pairs: usize,
    /// Cascades simulated to collect the pairs; 0 for a loaded dataset.
    pub cascades: usize,
    pub incomplete: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TrainingStats {
    pub epochs: usize,
    pub positives: usize,
    pub initial_loss: Option<f64>,
    pub final_loss: Option<f64>,
    /// Rank correlation of learned weights with the ground-truth edge values.
    pub weight_spearman: Option<f64>,
    pub time_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub enum CellOutcome {
    Done {
        mean: f64,
        std: f64,
        time_ms: f64,
        seeds: SeedSet,
    },
    Failed(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub method: String,
    pub k: usize,
    pub outcome: CellOutcome,
}

impl Cell {
    pub fn mean(&self) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Done { mean, .. } => Some(*mean),
            CellOutcome::Failed(_) => None,
        }
    }

    pub fn time_ms(&self) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Done { time_ms, .. } => Some(*time_ms),
            CellOutcome::Failed(_) => None,
        }
    }

    pub fn seeds(&self) -> Option<&SeedSet> {
        match &self.outcome {
            CellOutcome::Done { seeds, .. } => Some(seeds),
            CellOutcome::Failed(_) => None,
        }
    }

    fn csv_row(&self) -> String {
        match &self.outcome {
            CellOutcome::Done {
                mean,
                std,
                time_ms,
                seeds,
            } => format!(
                "{},{},{mean},{std},{time_ms:.3},{},ok",
                self.method,
                self.k,
                seeds_hash(&seeds.nodes())
            ),
            CellOutcome::Failed(reason) => format!(
                "{},{},,,,,\"failed: {}\"",
                self.method,
                self.k,
                reason.replace('"', "'")
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub version: String,
    pub nodes: usize,
    pub edges: usize,
    pub dataset: DatasetStats,
    pub training: Option<TrainingStats>,
    /// NCut of the learned-weight partition per budget.
    pub ncut: BTreeMap<usize, f64>,
    pub cells: Vec<Cell>,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

impl RunReport {
    pub fn cell(&self, method: &str, k: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.method == method && c.k == k)
    }

    /// Everything except wall-clock timings; identical for identical runs.
    pub fn body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dscom report v{}", self.version);
        let _ = writeln!(s, "master seed: {}", self.config.master_seed);
        let _ = writeln!(s, "graph: {} nodes, {} edges", self.nodes, self.edges);
        let d = &self.dataset;
        let _ = writeln!(
            s,
            "dataset: {} pairs ({} distinct) from {} cascades{}",
            d.pairs,
            d.distinct_pairs,
            d.cascades,
            if d.incomplete { ", incomplete" } else { "" }
        );
        match &self.training {
            Some(TrainingStats { error: Some(e), .. }) => {
                let _ = writeln!(s, "training: failed: {e}");
            }
            Some(t) => {
                let _ = writeln!(
                    s,
                    "training: {} epochs, {} positives, loss {} -> {}, weight spearman {}",
                    t.epochs,
                    t.positives,
                    opt(t.initial_loss),
                    opt(t.final_loss),
                    opt(t.weight_spearman)
                );
            }
            None => {
                let _ = writeln!(s, "training: skipped");
            }
        }
        for (k, v) in &self.ncut {
            let _ = writeln!(s, "ncut k={k}: {v:.6}");
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<10} {:>5} {:>12} {:>10}  seeds",
            "method", "k", "mean", "std"
        );
        for c in &self.cells {
            match &c.outcome {
                CellOutcome::Done {
                    mean, std, seeds, ..
                } => {
                    let list: Vec<String> = seeds.order().iter().map(|v| v.to_string()).collect();
                    let _ = writeln!(
                        s,
                        "{:<10} {:>5} {mean:>12.4} {std:>10.4}  {}",
                        c.method,
                        c.k,
                        list.join(" ")
                    );
                }
                CellOutcome::Failed(reason) => {
                    let _ = writeln!(s, "{:<10} {:>5} failed: {reason}", c.method, c.k);
                }
            }
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "config:");
        s.push_str(&self.config.to_toml());
        s
    }

    /// Body followed by the timings.
    pub fn summary(&self) -> String {
        let mut s = self.body();
        let _ = writeln!(s);
        let _ = writeln!(s, "timings (ms):");
        if let Some(t) = &self.training {
            let _ = writeln!(s, "  training {:.1}", t.time_ms);
        }
        for c in &self.cells {
            if let Some(t) = c.time_ms() {
                let _ = writeln!(s, "  {} k={} selection {t:.1}", c.method, c.k);
            }
        }
        s
    }

    /// One row per (method, budget) cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            s.push_str(&c.csv_row());
            s.push('\n');
        }
        s
    }
}

/// Writes `report.csv`, `summary.txt`, `report.json` and, when requested,
/// `seeds/<method>_k<k>.txt` under `dir`.
pub fn emit_report(report: &RunReport, dir: &Path, seed_files: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: PathBuf, text: &str| -> Result<()> {
        io::write(&name, text)?;
        written.push(name);
        Ok(())
    };
    put(dir.join("report.csv"), &report.to_csv())?;
    put(dir.join("summary.txt"), &report.summary())?;
    put(
        dir.join("report.json"),
        &serde_json::to_string_pretty(report)?,
    )?;
    if seed_files {
        let sd = dir.join("seeds");
        std::fs::create_dir_all(&sd).map_err(|e| Error::io(&sd, e))?;
        for c in &report.cells {
            if let Some(seeds) = c.seeds() {
                put(
                    sd.join(format!("{}_k{}.txt", c.method, c.k)),
                    &seeds.to_text(),
                )?;
            }
        }
    }
    Ok(written)
}
