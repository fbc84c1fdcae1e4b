use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, info};
use momad_core::curation::{curate, read_samples_jsonl, write_samples_jsonl};
use momad_core::metrics::{mean, L2Protocol, MetricReport};
use momad_core::sim::{evaluate_log, run_closed_loop, Planner, ScenarioLog, ScenarioSpec, SimConfig};
use rayon::prelude::*;

use crate::config::{RunConfig, SimArgs};
use crate::error::{CliError, CliResult};

pub const DEFAULT_EPSILON: f64 = 25.0;

struct SeedRun {
    seed: u64,
    log: ScenarioLog,
    report: MetricReport,
}

/// Simulates every seed in parallel; results come back in seed-list order.
fn simulate(base: &ScenarioSpec, sim: &SimConfig, planner: &Planner, seeds: &[u64]) -> CliResult<Vec<SeedRun>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let spec = ScenarioSpec { seed, ..base.clone() };
            let (log, report) =
                run_closed_loop(&spec, sim, planner).map_err(|e| CliError::Config(format!("seed {seed}: {e}")))?;
            debug!("seed {seed}: {} frames", log.frames.len());
            Ok(SeedRun { seed, log, report })
        })
        .collect()
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(CliError::io(path))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(CliError::io(path))
}

fn aggregate(reports: &[MetricReport]) -> CliResult<MetricReport> {
    MetricReport::mean_of(reports).map_err(|e| CliError::Config(e.to_string()))
}

fn write_seed_runs(dir: &Path, runs: &[SeedRun]) -> CliResult<()> {
    create_dir(dir)?;
    for r in runs {
        write(&dir.join(format!("seed_{}.jsonl", r.seed)), &r.log.to_jsonl())?;
        write(&dir.join(format!("seed_{}.csv", r.seed)), &r.report.to_csv())?;
    }
    Ok(())
}

/// `run`: per-seed log and metrics, plus `aggregate.csv` when several seeds ran.
pub fn run(args: &SimArgs) -> CliResult<()> {
    let cfg = RunConfig::from_args(args)?;
    let runs = simulate(&cfg.base, &cfg.sim, &cfg.planner, &cfg.seeds)?;
    // Nothing is written until every seed has succeeded.
    write_seed_runs(&cfg.out, &runs)?;
    if runs.len() > 1 {
        let reports: Vec<MetricReport> = runs.iter().map(|r| r.report.clone()).collect();
        write(&cfg.out.join("aggregate.csv"), &aggregate(&reports)?.to_csv())?;
    }
    info!("wrote {} run(s) to {}", runs.len(), cfg.out.display());
    Ok(())
}

pub fn read_log(path: &Path) -> CliResult<ScenarioLog> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    ScenarioLog::from_jsonl(&text).map_err(|e| CliError::data(path, e))
}

/// `eval`: recomputes metrics from logs. Prints the report (the mean over
/// logs when several are given) as CSV on stdout; with `out`, also writes
/// `<log stem>.csv` per log and `aggregate.csv`.
pub fn eval(logs: &[PathBuf], protocol: Option<L2Protocol>, out: Option<&Path>) -> CliResult<String> {
    let mut reports = Vec::with_capacity(logs.len());
    for path in logs {
        let log = read_log(path)?;
        let protocol = protocol.unwrap_or(log.header.sim.protocol);
        let report = evaluate_log(&log, protocol).map_err(|e| CliError::data(path, e))?;
        debug!("{}: {} frames", path.display(), log.frames.len());
        reports.push(report);
    }
    let total = aggregate(&reports)?;
    if let Some(dir) = out {
        let mut stems = std::collections::HashSet::new();
        let mut files = Vec::new();
        for (path, report) in logs.iter().zip(&reports) {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| CliError::Config(format!("{}: not a file name", path.display())))?;
            if !stems.insert(stem.clone()) {
                return Err(CliError::Config(format!("two logs share the name `{stem}`")));
            }
            files.push((dir.join(format!("{stem}.csv")), report.to_csv()));
        }
        create_dir(dir)?;
        for (p, csv) in files {
            write(&p, &csv)?;
        }
        if reports.len() > 1 {
            write(&dir.join("aggregate.csv"), &total.to_csv())?;
        }
    }
    Ok(total.to_csv())
}

/// `curate`: writes `curated.jsonl` and `scenes.txt` (one scene id per line).
pub fn curate_cmd(input: &Path, epsilon: f64, out: &Path) -> CliResult<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(CliError::Config(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let text = fs::read_to_string(input).map_err(CliError::io(input))?;
    let samples = read_samples_jsonl(&text).map_err(|e| CliError::data(input, e))?;
    let kept = curate(&samples, epsilon);
    create_dir(out)?;
    write(&out.join("curated.jsonl"), &write_samples_jsonl(&kept.samples))?;
    let scenes: String = kept.scenes.iter().map(|s| format!("{s}\n")).collect();
    write(&out.join("scenes.txt"), &scenes)?;
    info!(
        "kept {}/{} samples in {} scene(s) at epsilon {epsilon}",
        kept.samples.len(),
        samples.len(),
        kept.scenes.len()
    );
    Ok(())
}

pub const PAIRED_HEADER: &str = "seed,metric,horizon_s,one_shot,momentum,delta";
pub const SUMMARY_HEADER: &str = "metric,horizon_s,n,one_shot_mean,one_shot_std,momentum_mean,momentum_std";

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs.iter().copied()).expect("non-empty");
    let ss = mean(xs.iter().map(|x| (x - m) * (x - m))).expect("non-empty") * xs.len() as f64;
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn fmt_horizon(h: Option<f64>) -> String {
    h.map(|h| format!("{h:?}")).unwrap_or_default()
}

/// Builds `paired.csv` and `summary.csv` from per-seed reports of both planners.
pub fn compare_tables(seeds: &[u64], one_shot: &[MetricReport], momentum: &[MetricReport]) -> (String, String) {
    let mut paired = format!("{PAIRED_HEADER}\n");
    for ((seed, a), b) in seeds.iter().zip(one_shot).zip(momentum) {
        for ((name, h, va), (_, _, vb)) in a.rows().into_iter().zip(b.rows()) {
            paired.push_str(&format!(
                "{seed},{name},{},{va:?},{vb:?},{:?}\n",
                fmt_horizon(h),
                vb - va
            ));
        }
    }
    let mut summary = format!("{SUMMARY_HEADER}\n");
    let n_rows = one_shot.first().map_or(0, |r| r.rows().len());
    for row in 0..n_rows {
        let (name, h, _) = one_shot[0].rows()[row];
        let col = |reports: &[MetricReport]| reports.iter().map(|r| r.rows()[row].2).collect::<Vec<f64>>();
        let (a, b) = (col(one_shot), col(momentum));
        let m = |xs: &[f64]| mean(xs.iter().copied()).unwrap_or(0.0);
        summary.push_str(&format!(
            "{name},{},{},{:?},{:?},{:?},{:?}\n",
            fmt_horizon(h),
            a.len(),
            m(&a),
            sample_std(&a),
            m(&b),
            sample_std(&b)
        ));
    }
    (paired, summary)
}

/// `compare`: runs one-shot and momentum on the same seeds. Logs go to
/// `one_shot/` and `momentum/`; tables to `paired.csv` and `summary.csv`.
pub fn compare(args: &SimArgs) -> CliResult<()> {
    let cfg = RunConfig::from_args(args)?;
    let momentum = Planner::Momentum(cfg.momentum);
    let a = simulate(&cfg.base, &cfg.sim, &Planner::OneShot, &cfg.seeds)?;
    let b = simulate(&cfg.base, &cfg.sim, &momentum, &cfg.seeds)?;
    write_seed_runs(&cfg.out.join("one_shot"), &a)?;
    write_seed_runs(&cfg.out.join("momentum"), &b)?;
    let reports = |runs: &[SeedRun]| runs.iter().map(|r| r.report.clone()).collect::<Vec<_>>();
    let (paired, summary) = compare_tables(&cfg.seeds, &reports(&a), &reports(&b));
    write(&cfg.out.join("paired.csv"), &paired)?;
    write(&cfg.out.join("summary.csv"), &summary)?;
    info!("compared {} seed(s) in {}", cfg.seeds.len(), cfg.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std_matches_hand_value() {
        // mean 5, squared deviations sum to 32, n − 1 = 7.
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert!((sample_std(&xs) - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(sample_std(&[3.0]), 0.0);
    }

    #[test]
    fn tables_pair_rows_by_seed() {
        let mut a = MetricReport::zeros(&[1.0]);
        let mut b = a.clone();
        a.tpc[0] = 1.0;
        b.tpc[0] = 0.5;
        let (paired, summary) = compare_tables(&[7], &[a], &[b]);
        assert!(paired.lines().any(|l| l == "7,tpc,1.0,1.0,0.5,-0.5"), "{paired}");
        assert!(summary.lines().any(|l| l == "tpc,1.0,1,1.0,0.0,0.5,0.0"), "{summary}");
        assert_eq!(summary.lines().count(), 1 + 5);
    }
}
