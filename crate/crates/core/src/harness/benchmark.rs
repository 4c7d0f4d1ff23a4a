//! Benchmark orchestration: run a suite of scenarios against a planner,
//! aggregate metrics, and emit a deterministic JSON report plus an aligned
//! text table. With `stable_output` set, wall-clock fields are zeroed so
//! two runs of the same deterministic configuration produce byte-identical
//! JSON.

use super::metrics::{compute_metrics, RunMetrics};
use super::presets::base_network;
use super::scenario::{apply_scenario, Scenario};
use super::HarnessError;
use crate::planner::Planner;
use crate::workflow::{run, RunStatus, WorkflowOptions};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Builds one planner instance per run so runs can execute in parallel.
pub trait PlannerFactory: Sync {
    fn planner_id(&self) -> String;
    fn make(&self) -> Box<dyn Planner>;
}

impl<F> PlannerFactory for F
where
    F: Fn() -> Box<dyn Planner> + Sync,
{
    fn planner_id(&self) -> String {
        self().id()
    }
    fn make(&self) -> Box<dyn Planner> {
        self()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    pub repetitions: usize,
    pub jobs: usize,
    pub workflow: WorkflowOptions,
    /// Zero wall-clock fields for reproducible reports.
    pub stable_output: bool,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            repetitions: 1,
            jobs: 1,
            workflow: WorkflowOptions::default(),
            stable_output: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario: String,
    pub repetition: usize,
    pub status: String,
    pub metrics: Option<RunMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub failures: usize,
    pub success_rate: f64,
    pub mean_runtime_seconds: f64,
    pub mean_iterations: f64,
    pub mean_actions: f64,
    /// Mean over runs where efficiency is defined.
    pub mean_action_efficiency: Option<f64>,
    pub mean_coordination_score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub planner: String,
    pub repetitions: usize,
    pub runs: Vec<RunRow>,
    pub aggregate: Aggregate,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn run_one(
    scenario: &Scenario,
    repetition: usize,
    factory: &dyn PlannerFactory,
    opts: &BenchmarkOptions,
) -> RunRow {
    let attempt = || -> Result<RunMetrics, HarnessError> {
        let base = base_network(&scenario.base)?;
        let net = apply_scenario(&base, scenario)?;
        let planner = factory.make();
        let result = run(&net, planner.as_ref(), &opts.workflow);
        let mut metrics = compute_metrics(&result, &result.initial_report, &net);
        if opts.stable_output {
            metrics.runtime_seconds = 0.0;
        }
        Ok(metrics)
    };
    match attempt() {
        Ok(metrics) => RunRow {
            scenario: scenario.name.clone(),
            repetition,
            status: if metrics.success {
                RunStatus::Resolved.to_string()
            } else if metrics.final_violations < metrics.initial_violations {
                "improved".to_string()
            } else {
                RunStatus::Exhausted.to_string()
            },
            metrics: Some(metrics),
            error: None,
        },
        Err(err) => RunRow {
            scenario: scenario.name.clone(),
            repetition,
            status: "error".to_string(),
            metrics: None,
            error: Some(err.to_string()),
        },
    }
}

/// Run every scenario `repetitions` times, optionally in parallel, and
/// aggregate. Per-run failures are recorded in the rows, never raised.
pub fn run_benchmark(
    suite: &[Scenario],
    factory: &dyn PlannerFactory,
    opts: &BenchmarkOptions,
) -> BenchmarkReport {
    let jobs: Vec<(usize, usize)> = (0..suite.len())
        .flat_map(|s| (0..opts.repetitions.max(1)).map(move |r| (s, r)))
        .collect();

    let rows: Vec<RunRow> = if opts.jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            jobs.par_iter()
                .map(|&(s, r)| run_one(&suite[s], r, factory, opts))
                .collect()
        })
    } else {
        jobs.iter()
            .map(|&(s, r)| run_one(&suite[s], r, factory, opts))
            .collect()
    };

    let with_metrics: Vec<&RunMetrics> = rows.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let n = with_metrics.len();
    let failures = rows.len() - n;
    let mean = |f: &dyn Fn(&RunMetrics) -> f64| -> f64 {
        if n == 0 {
            0.0
        } else {
            with_metrics.iter().map(|m| f(m)).sum::<f64>() / n as f64
        }
    };
    let efficiencies: Vec<f64> = with_metrics
        .iter()
        .filter_map(|m| m.action_efficiency)
        .collect();
    let aggregate = Aggregate {
        runs: rows.len(),
        failures,
        success_rate: if n == 0 {
            0.0
        } else {
            with_metrics.iter().filter(|m| m.success).count() as f64 / n as f64
        },
        mean_runtime_seconds: mean(&|m| m.runtime_seconds),
        mean_iterations: mean(&|m| m.iterations as f64),
        mean_actions: mean(&|m| m.total_actions as f64),
        mean_action_efficiency: if efficiencies.is_empty() {
            None
        } else {
            Some(efficiencies.iter().sum::<f64>() / efficiencies.len() as f64)
        },
        mean_coordination_score: mean(&|m| m.coordination_score),
    };

    BenchmarkReport {
        planner: factory.planner_id(),
        repetitions: opts.repetitions,
        runs: rows,
        aggregate,
    }
}

/// Aligned text table of per-run rows plus the aggregate line.
pub fn render_table(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>3} {:>10} {:>5} {:>7} {:>6} {:>6} {:>8} {:>8}",
        "scenario", "rep", "status", "iter", "actions", "viol0", "violN", "eff", "time_s"
    );
    for row in &report.runs {
        match &row.metrics {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "{:<24} {:>3} {:>10} {:>5} {:>7} {:>6} {:>6} {:>8} {:>8.3}",
                    row.scenario,
                    row.repetition,
                    row.status,
                    m.iterations,
                    m.total_actions,
                    m.initial_violations,
                    m.final_violations,
                    m.action_efficiency
                        .map(|e| format!("{e:.2}"))
                        .unwrap_or_else(|| "-".to_string()),
                    m.runtime_seconds,
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{:<24} {:>3} {:>10} error: {}",
                    row.scenario,
                    row.repetition,
                    row.status,
                    row.error.as_deref().unwrap_or("unknown")
                );
            }
        }
    }
    let a = &report.aggregate;
    let _ = writeln!(
        out,
        "aggregate: runs={} failures={} success_rate={:.1}% mean_iter={:.2} mean_actions={:.2} mean_eff={} mean_coord={:.2} mean_time={:.3}s",
        a.runs,
        a.failures,
        100.0 * a.success_rate,
        a.mean_iterations,
        a.mean_actions,
        a.mean_action_efficiency
            .map(|e| format!("{e:.2}"))
            .unwrap_or_else(|| "-".to_string()),
        a.mean_coordination_score,
        a.mean_runtime_seconds,
    );
    out
}
