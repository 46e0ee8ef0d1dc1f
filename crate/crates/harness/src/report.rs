//! Result aggregation: normalized per-environment tables with compliance
//! and best-policy marking, a MeanValue row, safety classification, and
//! plotting-ready per-iteration CSV exports.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{classify_safety_with, SafetyThresholds};
use crate::config::{AlgoId, RunConfig};
use crate::metrics::{read_metrics, write_csv, MetricsRecord};
use crate::trainer::META_FILE;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad meta.json in {0}: {1}")]
    BadMeta(PathBuf, serde_json::Error),
    #[error("no runs found under {0}")]
    NoRuns(PathBuf),
    #[error("inconsistent run set; missing: {0}")]
    MissingRuns(String),
    #[error("environment {env} has no `{reference}` reference run for normalization")]
    NoReference { env: String, reference: &'static str },
    #[error("environment {0} mixes different cost limits")]
    MixedCostLimits(String),
}

/// Final performance of one run: means over the last tenth of training.
#[derive(Debug, Clone)]
struct RunSummary {
    cfg: RunConfig,
    j_reward: f64,
    j_cost: f64,
    cost_series: Vec<f64>,
    records: Vec<MetricsRecord>,
    dir_name: String,
}

fn tail_mean(values: &[f64]) -> f64 {
    let tail = (values.len() / 10).max(1);
    let slice = &values[values.len() - tail..];
    slice.iter().sum::<f64>() / slice.len() as f64
}

fn load_runs(runs_dir: &Path) -> Result<Vec<RunSummary>, ReportError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(runs_dir)? {
        let entry = entry?;
        let dir = entry.path();
        let meta = dir.join(META_FILE);
        if !meta.is_file() {
            continue;
        }
        let cfg: RunConfig = serde_json::from_str(&fs::read_to_string(&meta)?)
            .map_err(|e| ReportError::BadMeta(meta.clone(), e))?;
        let records = read_metrics(&dir)?;
        if records.is_empty() {
            continue;
        }
        let rewards: Vec<f64> = records.iter().map(|r| r.ep_reward).collect();
        let costs: Vec<f64> = records.iter().map(|r| r.ep_cost).collect();
        out.push(RunSummary {
            j_reward: tail_mean(&rewards),
            j_cost: tail_mean(&costs),
            cost_series: costs,
            records,
            dir_name: entry.file_name().to_string_lossy().to_string(),
            cfg,
        });
    }
    if out.is_empty() {
        return Err(ReportError::NoRuns(runs_dir.to_path_buf()));
    }
    Ok(out)
}

/// One normalized table row (one algorithm on one environment, averaged
/// over seeds).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub env: String,
    pub algo: AlgoId,
    pub seeds: usize,
    pub j_reward: f64,
    pub j_cost: f64,
    pub norm_reward: f64,
    pub norm_cost: f64,
    pub compliant: bool,
    pub best: bool,
    pub strongly_unsafe: f64,
    pub strongly_safe: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub thresholds: SafetyThresholds,
    pub rows: Vec<ReportRow>,
    /// Per-algorithm means of the normalized columns across environments.
    pub mean_rows: Vec<(AlgoId, f64, f64)>,
}

/// Aggregate all runs under `runs_dir` into normalized tables. Every
/// environment needs its unconstrained reference run (`ppo`, or `mappo`
/// for multi-agent environments), and every algorithm must cover every
/// environment it appears with.
pub fn build_report(runs_dir: &Path) -> Result<Report, ReportError> {
    let runs = load_runs(runs_dir)?;
    let envs: BTreeSet<String> = runs.iter().map(|r| r.cfg.env.clone()).collect();
    let algos: BTreeSet<AlgoId> = runs.iter().map(|r| r.cfg.algo).collect();

    // consistency: every algorithm present must cover every environment
    let mut missing = Vec::new();
    for algo in &algos {
        for env in &envs {
            if !runs.iter().any(|r| r.cfg.algo == *algo && &r.cfg.env == env) {
                missing.push(format!("{algo} on {env}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(ReportError::MissingRuns(missing.join(", ")));
    }

    let thresholds = SafetyThresholds::default();
    let mut rows = Vec::new();
    for env in &envs {
        let env_runs: Vec<&RunSummary> = runs.iter().filter(|r| &r.cfg.env == env).collect();
        let cost_limit = env_runs[0].cfg.cost_limit;
        if env_runs.iter().any(|r| r.cfg.cost_limit != cost_limit) {
            return Err(ReportError::MixedCostLimits(env.clone()));
        }
        let reference_algo = if env_runs[0].cfg.algo.is_multi_agent() {
            AlgoId::Mappo
        } else {
            AlgoId::Ppo
        };
        let reference: Vec<&&RunSummary> =
            env_runs.iter().filter(|r| r.cfg.algo == reference_algo).collect();
        if reference.is_empty() {
            return Err(ReportError::NoReference {
                env: env.clone(),
                reference: reference_algo.name(),
            });
        }
        let ref_reward =
            reference.iter().map(|r| r.j_reward).sum::<f64>() / reference.len() as f64;

        for algo in &algos {
            let group: Vec<&&RunSummary> =
                env_runs.iter().filter(|r| r.cfg.algo == *algo).collect();
            if group.is_empty() {
                continue;
            }
            let j_reward = group.iter().map(|r| r.j_reward).sum::<f64>() / group.len() as f64;
            let j_cost = group.iter().map(|r| r.j_cost).sum::<f64>() / group.len() as f64;
            let norm_reward = if ref_reward == 0.0 { f64::NAN } else { j_reward / ref_reward };
            let norm_cost = j_cost / cost_limit;
            let mut strongly_unsafe = 0.0;
            let mut strongly_safe = 0.0;
            for r in &group {
                let cls = classify_safety_with(&r.cost_series, cost_limit, thresholds)
                    .expect("nonempty series");
                strongly_unsafe += cls.strongly_unsafe;
                strongly_safe += cls.strongly_safe;
            }
            rows.push(ReportRow {
                env: env.clone(),
                algo: *algo,
                seeds: group.len(),
                j_reward,
                j_cost,
                norm_reward,
                norm_cost,
                compliant: norm_cost <= 1.0,
                best: false,
                strongly_unsafe: strongly_unsafe / group.len() as f64,
                strongly_safe: strongly_safe / group.len() as f64,
            });
        }

        // best-policy marking: max normalized reward among compliant rows,
        // else the row closest to the limit from above
        let env_rows: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| &r.env == env)
            .map(|(i, _)| i)
            .collect();
        let best_idx = env_rows
            .iter()
            .copied()
            .filter(|&i| rows[i].compliant)
            .max_by(|&a, &b| rows[a].norm_reward.total_cmp(&rows[b].norm_reward))
            .or_else(|| {
                env_rows
                    .iter()
                    .copied()
                    .min_by(|&a, &b| rows[a].norm_cost.total_cmp(&rows[b].norm_cost))
            });
        if let Some(i) = best_idx {
            rows[i].best = true;
        }
    }

    let mut mean_rows = Vec::new();
    for algo in &algos {
        let group: Vec<&ReportRow> = rows.iter().filter(|r| r.algo == *algo).collect();
        let jr = group.iter().map(|r| r.norm_reward).sum::<f64>() / group.len() as f64;
        let jc = group.iter().map(|r| r.norm_cost).sum::<f64>() / group.len() as f64;
        mean_rows.push((*algo, jr, jc));
    }

    Ok(Report { thresholds, rows, mean_rows })
}

/// Build the report and write `report.md`, `report.csv` and per-run
/// iteration CSVs under `out_dir`.
pub fn emit_report(runs_dir: &Path, out_dir: &Path) -> Result<Report, ReportError> {
    let report = build_report(runs_dir)?;
    fs::create_dir_all(out_dir)?;

    let mut md = String::new();
    md.push_str("# Benchmark report\n\n");
    md.push_str(&format!(
        "Safety buckets (multiples of the cost limit): strongly safe <= {}, safe <= {}, \
         unsafe <= {}, strongly unsafe beyond.\n\n",
        report.thresholds.strongly_safe, report.thresholds.safe, report.thresholds.unsafe_to
    ));
    md.push_str(
        "Normalized reward is relative to the PPO (or MAPPO) reference; normalized cost is \
         relative to the cost limit. `[best]` marks the compliant row with the highest \
         normalized reward (or the closest-to-limit row when nothing complies).\n",
    );

    let envs: BTreeSet<&String> = report.rows.iter().map(|r| &r.env).collect();
    for env in envs {
        md.push_str(&format!("\n## {env}\n\n"));
        md.push_str("| algorithm | seeds | J^R | J^C | norm J^R | norm J^C | status |\n");
        md.push_str("|---|---|---|---|---|---|---|\n");
        for row in report.rows.iter().filter(|r| &r.env == env) {
            let status = match (row.compliant, row.best) {
                (true, true) => "compliant [best]",
                (true, false) => "compliant",
                (false, true) => "violating [best]",
                (false, false) => "violating",
            };
            md.push_str(&format!(
                "| {} | {} | {:.2} | {:.2} | {:.2} | {:.2} | {} |\n",
                row.algo, row.seeds, row.j_reward, row.j_cost, row.norm_reward, row.norm_cost,
                status
            ));
        }
    }
    md.push_str("\n## MeanValue\n\n| algorithm | norm J^R | norm J^C |\n|---|---|---|\n");
    for (algo, jr, jc) in &report.mean_rows {
        md.push_str(&format!("| {algo} | {jr:.2} | {jc:.2} |\n"));
    }
    fs::write(out_dir.join("report.md"), md)?;

    let mut csv = fs::File::create(out_dir.join("report.csv"))?;
    writeln!(
        csv,
        "env,algo,seeds,j_reward,j_cost,norm_reward,norm_cost,compliant,best,strongly_unsafe,strongly_safe"
    )?;
    for r in &report.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.env,
            r.algo,
            r.seeds,
            r.j_reward,
            r.j_cost,
            r.norm_reward,
            r.norm_cost,
            r.compliant,
            r.best,
            r.strongly_unsafe,
            r.strongly_safe
        )?;
    }

    // plotting-ready per-iteration curves
    let curves = out_dir.join("curves");
    fs::create_dir_all(&curves)?;
    for run in load_runs(runs_dir)? {
        write_csv(&run.records, &curves.join(format!("{}.csv", run.dir_name)))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricsSink;

    fn fake_run(dir: &Path, algo: AlgoId, env: &str, seed: u64, reward: f64, cost: f64) {
        let sub = dir.join(format!("{algo}_{env}_s{seed}"));
        fs::create_dir_all(&sub).unwrap();
        let mut cfg = RunConfig::for_algo(algo);
        cfg.env = env.to_string();
        cfg.seed = seed;
        fs::write(sub.join(META_FILE), serde_json::to_string(&cfg).unwrap()).unwrap();
        let mut sink = MetricsSink::create(&sub).unwrap();
        for i in 0..10u64 {
            sink.append(
                MetricsRecord {
                    iteration: i,
                    env_steps: (i + 1) * 100,
                    ep_reward: reward,
                    ep_cost: cost,
                    policy_loss: 0.0,
                    value_loss_r: 0.0,
                    value_loss_c: 0.0,
                    mean_kl: 0.0,
                    entropy: 0.0,
                    epochs_used: 1,
                    step_accepted: true,
                    lambda: None,
                    pid_p: None,
                    pid_i: None,
                    pid_d: None,
                    nu: None,
                    cpo_q: None,
                    cpo_r: None,
                    cpo_nu_star: None,
                    cpo_lambda_star: None,
                },
                100.0,
            )
            .unwrap();
        }
    }

    #[test]
    fn single_run_report_has_one_row() {
        let dir = tempfile::tempdir().unwrap();
        fake_run(dir.path(), AlgoId::Ppo, "MassVel", 0, 20.0, 100.0);
        let report = build_report(dir.path()).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.norm_reward, 1.0);
        assert_eq!(row.norm_cost, 4.0);
        assert!(!row.compliant);
        assert!(row.best); // only row: closest to the limit
        assert_eq!(report.mean_rows.len(), 1);
        assert_eq!(report.mean_rows[0].1, 1.0);
    }

    #[test]
    fn compliance_and_best_marking() {
        let dir = tempfile::tempdir().unwrap();
        fake_run(dir.path(), AlgoId::Ppo, "MassVel", 0, 30.0, 100.0);
        fake_run(dir.path(), AlgoId::PpoLag, "MassVel", 0, 12.0, 21.0); // compliant (0.84)
        fake_run(dir.path(), AlgoId::Cpo, "MassVel", 0, 15.0, 30.5); // violating (1.22)
        let report = build_report(dir.path()).unwrap();
        let lag = report.rows.iter().find(|r| r.algo == AlgoId::PpoLag).unwrap();
        assert!(lag.compliant && lag.best);
        assert!((lag.norm_cost - 0.84).abs() < 1e-12);
        let cpo = report.rows.iter().find(|r| r.algo == AlgoId::Cpo).unwrap();
        assert!(!cpo.compliant && !cpo.best);
        assert!((cpo.norm_cost - 1.22).abs() < 1e-12);
    }

    #[test]
    fn best_marking_matches_brute_force_on_synthetic_table() {
        let dir = tempfile::tempdir().unwrap();
        // nothing compliant: best = smallest normalized cost
        fake_run(dir.path(), AlgoId::Ppo, "MassVel", 0, 30.0, 100.0);
        fake_run(dir.path(), AlgoId::TrpoLag, "MassVel", 0, 20.0, 40.0);
        fake_run(dir.path(), AlgoId::Cpo, "MassVel", 0, 10.0, 26.0);
        let report = build_report(dir.path()).unwrap();
        let best: Vec<&ReportRow> = report.rows.iter().filter(|r| r.best).collect();
        assert_eq!(best.len(), 1);
        // brute force: min cost row since none compliant
        let min_cost = report
            .rows
            .iter()
            .min_by(|a, b| a.norm_cost.total_cmp(&b.norm_cost))
            .unwrap();
        assert_eq!(best[0], min_cost);
        assert_eq!(best[0].algo, AlgoId::Cpo);
    }

    #[test]
    fn missing_runs_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        fake_run(dir.path(), AlgoId::Ppo, "MassVel", 0, 30.0, 100.0);
        fake_run(dir.path(), AlgoId::PpoLag, "MassVel", 0, 12.0, 21.0);
        fake_run(dir.path(), AlgoId::Ppo, "MassRun", 0, 30.0, 100.0);
        let err = build_report(dir.path()).unwrap_err();
        match err {
            ReportError::MissingRuns(s) => assert!(s.contains("ppo_lag on MassRun"), "{s}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_reference_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        fake_run(dir.path(), AlgoId::PpoLag, "MassVel", 0, 12.0, 21.0);
        assert!(matches!(
            build_report(dir.path()),
            Err(ReportError::NoReference { .. })
        ));
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        fake_run(dir.path(), AlgoId::Ppo, "MassVel", 0, 30.0, 100.0);
        fake_run(dir.path(), AlgoId::PpoLag, "MassVel", 0, 12.0, 21.0);
        emit_report(dir.path(), out.path()).unwrap();
        assert!(out.path().join("report.md").is_file());
        assert!(out.path().join("report.csv").is_file());
        assert!(out.path().join("curves").read_dir().unwrap().count() == 2);
    }
}
