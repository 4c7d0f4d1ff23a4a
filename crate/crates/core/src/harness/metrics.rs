//! Quantitative run metrics: success, action efficiency (violations
//! resolved per control action) and a coordination score (fraction of
//! accepted actions within a few hops of a violation active when their plan
//! was proposed).

use crate::model::{Network, Topology};
use crate::violations::{ViolationKind, ViolationReport};
use crate::workflow::{AttemptOutcome, ResolutionResult, RunStatus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const COORDINATION_HOPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub success: bool,
    pub iterations: usize,
    pub total_actions: usize,
    pub runtime_seconds: f64,
    /// Initial violations resolved per accepted action; absent when no
    /// actions were taken.
    pub action_efficiency: Option<f64>,
    pub coordination_score: f64,
    pub action_type_fractions: BTreeMap<String, f64>,
    pub initial_violations: usize,
    pub final_violations: usize,
}

fn violation_buses(net: &Network, report: &ViolationReport) -> Vec<String> {
    let mut seeds = Vec::new();
    for v in &report.violations {
        match v.kind {
            ViolationKind::Thermal => {
                if let Some(branch) = net.branches.get(&v.element) {
                    seeds.push(branch.from_bus.clone());
                    seeds.push(branch.to_bus.clone());
                }
            }
            _ => seeds.push(v.element.clone()),
        }
    }
    seeds
}

/// Compute metrics for a terminal run. `net` supplies the topology for
/// coordination distances; element lookups use the result's final network
/// so batteries added during the run resolve.
pub fn compute_metrics(
    result: &ResolutionResult,
    initial_report: &ViolationReport,
    net: &Network,
) -> RunMetrics {
    let success = result.status == RunStatus::Resolved;
    let total_actions = result.accepted_actions.len();

    let final_keys: std::collections::BTreeSet<_> = result
        .final_report
        .violations
        .iter()
        .map(|v| v.key())
        .collect();
    let resolved_initial = initial_report
        .violations
        .iter()
        .filter(|v| !final_keys.contains(&v.key()))
        .count();

    let action_efficiency = if total_actions > 0 {
        Some(resolved_initial as f64 / total_actions as f64)
    } else {
        None
    };

    // Coordination: physical-topology hop distance from each accepted
    // action's element to a violation active when its plan was proposed.
    let topology = Topology::of(net, false);
    let mut coordinated = 0usize;
    for accepted in &result.accepted_actions {
        let report_before = result
            .attempt_log
            .iter()
            .find(|a| a.iteration == accepted.iteration && a.outcome == AttemptOutcome::Accepted)
            .map(|a| &a.report_before);
        let Some(report_before) = report_before else { continue };
        let dist = topology.distances_from(&violation_buses(net, report_before));
        let near = accepted
            .action
            .touched_buses(&result.network)
            .iter()
            .any(|bus| dist.get(bus).map(|&d| d <= COORDINATION_HOPS).unwrap_or(false));
        if near {
            coordinated += 1;
        }
    }
    let coordination_score = if total_actions > 0 {
        coordinated as f64 / total_actions as f64
    } else {
        // No actions: vacuously coordinated.
        1.0
    };

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for accepted in &result.accepted_actions {
        *counts
            .entry(accepted.action.tool_name().to_string())
            .or_insert(0) += 1;
    }
    let action_type_fractions = counts
        .into_iter()
        .map(|(k, v)| (k, v as f64 / total_actions.max(1) as f64))
        .collect();

    RunMetrics {
        success,
        iterations: result.iterations_used,
        total_actions,
        runtime_seconds: result.wall_time_seconds,
        action_efficiency,
        coordination_score,
        action_type_fractions,
        initial_violations: initial_report.len(),
        final_violations: result.final_report.len(),
    }
}
