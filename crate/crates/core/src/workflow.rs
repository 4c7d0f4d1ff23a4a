//! The state-driven resolution loop: analyze violations, ask a planner for
//! actions, execute them on a sandboxed copy with per-action trial solves,
//! then validate the plan as a whole and either accept it or roll the
//! sandbox back to the last good snapshot. Accepted iterations strictly
//! improve (violation count, total severity), so progress is monotonic and
//! the loop always terminates within `t_max` iterations.

use crate::actions::{apply_action, undo_action, Action};
use crate::context::render_adaptive;
use crate::model::Network;
use crate::planner::{
    default_priority_policy, ActionCapabilities, AttemptSummary, ConstraintsEcho, PlanRequest,
    Planner,
};
use crate::powerflow::{solve, PowerFlowSolution, SolverOptions};
use crate::violations::{analyze, compare, ViolationReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Instant;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WorkflowOptions {
    /// Maximum planning/execution/validation iterations.
    pub t_max: usize,
    pub solver: SolverOptions,
    /// Token budget driving context mode selection.
    pub context_budget: usize,
    /// Focus radius (hops) for semantic-graph rendering and capability
    /// annotation.
    pub focus_hops: usize,
}

impl Default for WorkflowOptions {
    fn default() -> Self {
        WorkflowOptions {
            t_max: 10,
            solver: SolverOptions::default(),
            context_budget: 6000,
            focus_hops: crate::context::DEFAULT_FOCUS_HOPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Resolved,
    Exhausted,
    Failed,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RunStatus::Running => "running",
            RunStatus::Resolved => "resolved",
            RunStatus::Exhausted => "exhausted",
            RunStatus::Failed => "failed",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttemptOutcome {
    Accepted,
    RolledBack { reason: String },
    Aborted { reason: String },
}

/// Count/severity deltas of one validated plan, per Algorithm-style
/// effectiveness bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessRecord {
    pub resolved_count: usize,
    pub introduced_count: usize,
    pub actions_used: usize,
    pub per_action_type: BTreeMap<String, usize>,
}

/// Resolved/introduced bookkeeping for one plan attempt.
pub fn evaluate_effectiveness(
    before: &ViolationReport,
    after: &ViolationReport,
    actions: &[Action],
) -> EffectivenessRecord {
    let cmp = compare(before, after);
    let mut per_action_type = BTreeMap::new();
    for action in actions {
        *per_action_type
            .entry(action.tool_name().to_string())
            .or_insert(0) += 1;
    }
    EffectivenessRecord {
        resolved_count: cmp.resolved.len(),
        introduced_count: cmp.introduced.len(),
        actions_used: actions.len(),
        per_action_type,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub iteration: usize,
    pub planner_id: String,
    pub rationale: String,
    /// The plan as proposed.
    pub plan_actions: Vec<Action>,
    /// The prefix actually applied (shorter on early break or abort).
    pub applied_actions: Vec<Action>,
    pub outcome: AttemptOutcome,
    pub report_before: ViolationReport,
    pub report_after: Option<ViolationReport>,
    pub effectiveness: Option<EffectivenessRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedAction {
    pub iteration: usize,
    pub action: Action,
}

/// Live state of one resolution run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkflowState {
    pub iteration: usize,
    pub sandbox: Network,
    /// Serialized network for exact rollback.
    pub baseline_snapshot: String,
    pub current_report: ViolationReport,
    pub accepted_actions: Vec<AcceptedAction>,
    pub attempt_log: Vec<AttemptRecord>,
    pub status: RunStatus,
    pub initial_report: ViolationReport,
    pub planner_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionResult {
    pub status: RunStatus,
    pub network: Network,
    pub accepted_actions: Vec<AcceptedAction>,
    pub iterations_used: usize,
    pub wall_time_seconds: f64,
    pub explanation: String,
    pub initial_report: ViolationReport,
    pub final_report: ViolationReport,
    pub attempt_log: Vec<AttemptRecord>,
    pub planner_id: String,
}

impl ResolutionResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialization cannot fail")
    }
}

fn solve_and_analyze(
    net: &Network,
    solver: &SolverOptions,
) -> Result<(PowerFlowSolution, ViolationReport), String> {
    let sol = solve(net, solver).map_err(|e| e.to_string())?;
    if !sol.converged {
        return Err(format!(
            "power flow diverged (residual {:.3e} after {} iterations)",
            sol.max_mismatch_pu, sol.iterations
        ));
    }
    let report = analyze(net, &sol).map_err(|e| e.to_string())?;
    Ok((sol, report))
}

/// Run the resolution loop. The caller's network is never mutated; all work
/// happens on a sandboxed copy.
pub fn run(net: &Network, planner: &dyn Planner, opts: &WorkflowOptions) -> ResolutionResult {
    let started = Instant::now();
    let mut state = WorkflowState {
        iteration: 0,
        sandbox: net.clone(),
        baseline_snapshot: net.canonical_json(),
        current_report: ViolationReport::default(),
        accepted_actions: Vec::new(),
        attempt_log: Vec::new(),
        status: RunStatus::Running,
        initial_report: ViolationReport::default(),
        planner_id: planner.id(),
    };

    let (mut last_solution, initial_report) = match solve_and_analyze(&state.sandbox, &opts.solver)
    {
        Ok(pair) => pair,
        Err(reason) => {
            state.status = RunStatus::Failed;
            let explanation = format!("initial power-flow analysis failed: {reason}");
            return finish(state, ViolationReport::default(), started, explanation);
        }
    };
    state.initial_report = initial_report.clone();
    state.current_report = initial_report;

    if state.current_report.is_empty() {
        state.status = RunStatus::Resolved;
        let explanation = summarize(&state);
        return finish(state, ViolationReport::default(), started, explanation);
    }

    let mut history: Vec<AttemptSummary> = Vec::new();

    while state.iteration < opts.t_max && state.status == RunStatus::Running {
        state.iteration += 1;
        let iteration = state.iteration;

        // Representation + planning request for this iteration.
        let context = render_adaptive(
            &state.sandbox,
            &last_solution,
            &state.current_report,
            opts.context_budget,
            opts.focus_hops,
        );
        let capabilities =
            ActionCapabilities::from_network(&state.sandbox, &state.current_report, opts.focus_hops);
        let request = PlanRequest {
            context,
            available_actions: capabilities,
            constraints: ConstraintsEcho {
                t_max_remaining: opts.t_max - iteration + 1,
                priority_policy: default_priority_policy(),
            },
            history: history.clone(),
        };

        let plan = {
            let sandbox_ref = &state.sandbox;
            let solver = opts.solver;
            let mut eval = |actions: &[Action]| -> Result<ViolationReport, String> {
                let mut scratch = sandbox_ref.clone();
                crate::actions::apply_plan(&mut scratch, actions).map_err(|e| e.to_string())?;
                let (_, report) = solve_and_analyze(&scratch, &solver)?;
                Ok(report)
            };
            planner.plan(&request, &mut eval)
        };

        let plan = match plan {
            Ok(plan) => plan,
            Err(err) => {
                let reason = format!("planner error: {err}");
                state.attempt_log.push(AttemptRecord {
                    iteration,
                    planner_id: state.planner_id.clone(),
                    rationale: String::new(),
                    plan_actions: Vec::new(),
                    applied_actions: Vec::new(),
                    outcome: AttemptOutcome::Aborted { reason: reason.clone() },
                    report_before: state.current_report.clone(),
                    report_after: None,
                    effectiveness: None,
                });
                state.status = if state.accepted_actions.is_empty() {
                    RunStatus::Failed
                } else {
                    RunStatus::Exhausted
                };
                break;
            }
        };

        // Executor: proactive per-action validation and trial solves, with
        // an early break once the trial report is clean.
        let mut undo_stack = Vec::new();
        let mut applied = Vec::new();
        let mut abort_reason: Option<String> = None;
        let mut trial_solution: Option<PowerFlowSolution> = None;
        for (idx, action) in plan.actions.iter().enumerate() {
            match apply_action(&mut state.sandbox, action) {
                Err(err) => {
                    abort_reason = Some(format!("action {idx} ({}) invalid: {err}", action.describe()));
                    break;
                }
                Ok(undo) => undo_stack.push(undo),
            }
            match solve(&state.sandbox, &opts.solver) {
                Err(err) => {
                    abort_reason = Some(format!(
                        "solver failure after action {idx} ({}): {err}",
                        action.describe()
                    ));
                    break;
                }
                Ok(sol) if !sol.converged => {
                    abort_reason = Some(format!(
                        "power flow diverged after action {idx} ({})",
                        action.describe()
                    ));
                    break;
                }
                Ok(sol) => {
                    applied.push(action.clone());
                    let clean = analyze(&state.sandbox, &sol)
                        .map(|r| r.is_empty())
                        .unwrap_or(false);
                    trial_solution = Some(sol);
                    if clean {
                        break;
                    }
                }
            }
        }

        if let Some(reason) = abort_reason {
            // Whole-plan atomicity: unwind the applied prefix exactly.
            for undo in undo_stack.iter().rev() {
                undo_action(&mut state.sandbox, undo);
            }
            debug_assert_eq!(state.sandbox.canonical_json(), state.baseline_snapshot);
            history.push(AttemptSummary {
                iteration,
                summary: format!("plan aborted and rolled back: {reason}"),
            });
            state.attempt_log.push(AttemptRecord {
                iteration,
                planner_id: plan.planner_id.clone(),
                rationale: plan.rationale.clone(),
                plan_actions: plan.actions.clone(),
                applied_actions: Vec::new(),
                outcome: AttemptOutcome::RolledBack { reason },
                report_before: state.current_report.clone(),
                report_after: None,
                effectiveness: None,
            });
            continue;
        }

        // Validator: authoritative solve + analyze + comparison.
        let validation = match trial_solution {
            Some(sol) => analyze(&state.sandbox, &sol).map(|report| (sol, report)).map_err(|e| e.to_string()),
            None => solve_and_analyze(&state.sandbox, &opts.solver),
        };
        let (solution_after, report_after) = match validation {
            Ok(pair) => pair,
            Err(reason) => {
                state.sandbox = serde_json::from_str(&state.baseline_snapshot)
                    .expect("baseline snapshot deserializes");
                history.push(AttemptSummary {
                    iteration,
                    summary: format!("validation solve failed, rolled back: {reason}"),
                });
                state.attempt_log.push(AttemptRecord {
                    iteration,
                    planner_id: plan.planner_id.clone(),
                    rationale: plan.rationale.clone(),
                    plan_actions: plan.actions.clone(),
                    applied_actions: Vec::new(),
                    outcome: AttemptOutcome::RolledBack { reason },
                    report_before: state.current_report.clone(),
                    report_after: None,
                    effectiveness: None,
                });
                continue;
            }
        };

        let comparison = compare(&state.current_report, &report_after);
        let effectiveness = evaluate_effectiveness(&state.current_report, &report_after, &applied);
        if comparison.improved {
            state.attempt_log.push(AttemptRecord {
                iteration,
                planner_id: plan.planner_id.clone(),
                rationale: plan.rationale.clone(),
                plan_actions: plan.actions.clone(),
                applied_actions: applied.clone(),
                outcome: AttemptOutcome::Accepted,
                report_before: state.current_report.clone(),
                report_after: Some(report_after.clone()),
                effectiveness: Some(effectiveness),
            });
            for action in applied {
                state.accepted_actions.push(AcceptedAction { iteration, action });
            }
            state.baseline_snapshot = state.sandbox.canonical_json();
            state.current_report = report_after;
            last_solution = solution_after;
            if state.current_report.is_empty() {
                state.status = RunStatus::Resolved;
            }
        } else {
            state.sandbox = serde_json::from_str(&state.baseline_snapshot)
                .expect("baseline snapshot deserializes");
            let reason = format!(
                "validator rejected plan: {} -> {} violations (introduced {}), no improvement",
                state.current_report.len(),
                report_after.len(),
                comparison.introduced.len()
            );
            history.push(AttemptSummary {
                iteration,
                summary: format!(
                    "plan `{}` rolled back: {} resolved, {} introduced",
                    plan.actions
                        .iter()
                        .map(|a| a.describe())
                        .collect::<Vec<_>>()
                        .join(" + "),
                    comparison.resolved.len(),
                    comparison.introduced.len()
                ),
            });
            state.attempt_log.push(AttemptRecord {
                iteration,
                planner_id: plan.planner_id.clone(),
                rationale: plan.rationale.clone(),
                plan_actions: plan.actions.clone(),
                applied_actions: Vec::new(),
                outcome: AttemptOutcome::RolledBack { reason },
                report_before: state.current_report.clone(),
                report_after: Some(report_after),
                effectiveness: Some(effectiveness),
            });
        }
    }

    if state.status == RunStatus::Running {
        state.status = RunStatus::Exhausted;
    }
    let final_report = state.current_report.clone();
    let explanation = summarize(&state);
    finish(state, final_report, started, explanation)
}

fn finish(
    state: WorkflowState,
    final_report: ViolationReport,
    started: Instant,
    explanation: String,
) -> ResolutionResult {
    ResolutionResult {
        status: state.status,
        network: state.sandbox,
        accepted_actions: state.accepted_actions,
        iterations_used: state.iteration,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        explanation,
        initial_report: state.initial_report,
        final_report,
        attempt_log: state.attempt_log,
        planner_id: state.planner_id,
    }
}

/// Deterministic human-readable narrative of a terminated run: initial
/// inventory, per-iteration outcomes, final state, and a justification for
/// each accepted action via the violations resolved alongside it.
pub fn summarize(state: &WorkflowState) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "resolution summary");
    let _ = writeln!(text, "==================");
    let _ = writeln!(
        text,
        "initial state: {} (total severity {:.4})",
        state.initial_report.inventory(),
        state.initial_report.total_severity
    );

    if state.status == RunStatus::Resolved && state.attempt_log.is_empty() {
        let _ = writeln!(text, "network is healthy; no action required.");
        return text;
    }

    for attempt in &state.attempt_log {
        let _ = writeln!(
            text,
            "iteration {} [{}]: proposed {} action(s){}",
            attempt.iteration,
            attempt.planner_id,
            attempt.plan_actions.len(),
            if attempt.rationale.is_empty() {
                String::new()
            } else {
                format!(" — {}", attempt.rationale)
            }
        );
        for action in &attempt.plan_actions {
            let _ = writeln!(text, "    - {}", action.describe());
        }
        match &attempt.outcome {
            AttemptOutcome::Accepted => {
                let eff = attempt.effectiveness.as_ref();
                let _ = writeln!(
                    text,
                    "  outcome: accepted — resolved {}, introduced {}, remaining {}",
                    eff.map(|e| e.resolved_count).unwrap_or(0),
                    eff.map(|e| e.introduced_count).unwrap_or(0),
                    attempt.report_after.as_ref().map(|r| r.len()).unwrap_or(0)
                );
            }
            AttemptOutcome::RolledBack { reason } => {
                let _ = writeln!(text, "  outcome: rolled back — {reason}");
            }
            AttemptOutcome::Aborted { reason } => {
                let _ = writeln!(text, "  outcome: aborted — {reason}");
            }
        }
    }

    let _ = writeln!(
        text,
        "final status: {} after {} iteration(s); {} action(s) accepted; remaining: {}",
        state.status,
        state.iteration,
        state.accepted_actions.len(),
        state.current_report.inventory()
    );

    if !state.accepted_actions.is_empty() {
        let _ = writeln!(text, "accepted actions:");
        for (idx, accepted) in state.accepted_actions.iter().enumerate() {
            let resolved = state
                .attempt_log
                .iter()
                .find(|a| a.iteration == accepted.iteration && a.outcome == AttemptOutcome::Accepted)
                .map(|a| {
                    let before = &a.report_before;
                    let after_keys: std::collections::BTreeSet<_> = a
                        .report_after
                        .as_ref()
                        .map(|r| r.violations.iter().map(|v| v.key()).collect())
                        .unwrap_or_default();
                    before
                        .violations
                        .iter()
                        .filter(|v| !after_keys.contains(&v.key()))
                        .map(|v| format!("{} {}", v.kind, v.element))
                        .collect::<Vec<_>>()
                })
                .unwrap_or_default();
            let co = if resolved.is_empty() {
                "no violations resolved in its iteration".to_string()
            } else {
                format!("co-resolved: {}", resolved.join(", "))
            };
            let _ = writeln!(
                text,
                "  {}. {} [iteration {}] — {co}",
                idx + 1,
                accepted.action.describe(),
                accepted.iteration
            );
        }
    }
    text
}
