//! Training metrics: one record per iteration, persisted as line-delimited
//! JSON plus a plotting-ready CSV export.
//!
//! The metrics log is part of the determinism contract (two runs with the
//! same config and seed must produce byte-identical files), so wall-clock
//! throughput goes to a separate `timings.jsonl` sidecar instead.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub iteration: u64,
    pub env_steps: u64,
    pub ep_reward: f64,
    pub ep_cost: f64,
    pub policy_loss: f64,
    pub value_loss_r: f64,
    pub value_loss_c: f64,
    pub mean_kl: f64,
    pub entropy: f64,
    pub epochs_used: u64,
    pub step_accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pid_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pid_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pid_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpo_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpo_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpo_nu_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpo_lambda_star: Option<f64>,
}

/// Steps-per-second sidecar row (not deterministic, kept out of the log).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingRecord {
    pub iteration: u64,
    pub sps: f64,
}

/// Append-only writer for one run directory.
pub struct MetricsSink {
    metrics: BufWriter<File>,
    timings: BufWriter<File>,
    pub records: Vec<MetricsRecord>,
    last_env_steps: Option<u64>,
}

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const TIMINGS_FILE: &str = "timings.jsonl";

impl MetricsSink {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            metrics: BufWriter::new(File::create(dir.join(METRICS_FILE))?),
            timings: BufWriter::new(File::create(dir.join(TIMINGS_FILE))?),
            records: Vec::new(),
            last_env_steps: None,
        })
    }

    pub fn append(&mut self, record: MetricsRecord, sps: f64) -> std::io::Result<()> {
        if let Some(prev) = self.last_env_steps {
            assert!(record.env_steps > prev, "env-step counter must strictly increase");
        }
        self.last_env_steps = Some(record.env_steps);
        serde_json::to_writer(&mut self.metrics, &record)?;
        self.metrics.write_all(b"\n")?;
        self.metrics.flush()?;
        serde_json::to_writer(
            &mut self.timings,
            &TimingRecord { iteration: record.iteration, sps },
        )?;
        self.timings.write_all(b"\n")?;
        self.timings.flush()?;
        self.records.push(record);
        Ok(())
    }
}

pub fn read_metrics(dir: &Path) -> std::io::Result<Vec<MetricsRecord>> {
    let file = File::open(dir.join(METRICS_FILE))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

const CSV_COLUMNS: [&str; 16] = [
    "iteration",
    "env_steps",
    "ep_reward",
    "ep_cost",
    "policy_loss",
    "value_loss_r",
    "value_loss_c",
    "mean_kl",
    "entropy",
    "epochs_used",
    "step_accepted",
    "lambda",
    "nu",
    "cpo_q",
    "cpo_r",
    "cpo_nu_star",
];

/// Fixed-column CSV export of a metrics log.
pub fn write_csv(records: &[MetricsRecord], path: &PathBuf) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in records {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.iteration,
            r.env_steps,
            r.ep_reward,
            r.ep_cost,
            r.policy_loss,
            r.value_loss_r,
            r.value_loss_c,
            r.mean_kl,
            r.entropy,
            r.epochs_used,
            r.step_accepted,
            opt(r.lambda),
            opt(r.nu),
            opt(r.cpo_q),
            opt(r.cpo_r),
            opt(r.cpo_nu_star),
        )?;
    }
    w.flush()
}
