//! Training-data export. Every successful run becomes one structured
//! record: the initial state and violations, the accepted action sequence
//! with its rationale, the explanation, metrics, and a chat-form rendering
//! whose assistant message is the tool-call JSON of the accepted plan.
//! Records are replayable: applying the recorded actions to the recorded
//! initial state reproduces the recorded final violation fingerprint.

use super::metrics::{compute_metrics, RunMetrics};
use super::HarnessError;
use crate::actions::Action;
use crate::caseio::{build_network, CaseDocument};
use crate::context::render_adaptive;
use crate::planner::{
    build_prompt, default_priority_policy, plan_to_wire_json, ActionCapabilities, ConstraintsEcho,
    PlanRequest,
};
use crate::powerflow::solve;
use crate::violations::{analyze, ViolationReport};
use crate::workflow::{AttemptOutcome, ResolutionResult, RunStatus, WorkflowOptions};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Everything saved from one resolution run, sufficient to derive a
/// training record offline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunArtifact {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_name: Option<String>,
    /// The perturbed network the run started from.
    pub case: CaseDocument,
    pub initial_report: ViolationReport,
    pub result: ResolutionResult,
    pub workflow: WorkflowOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Jsonl,
    ChatJsonl,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(ExportFormat::Jsonl),
            "chat_jsonl" => Ok(ExportFormat::ChatJsonl),
            other => Err(format!("unknown export format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRecord {
    pub system: String,
    pub user: String,
    /// Tool-call JSON of the accepted plan; parses back to the same plan.
    pub assistant: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_name: Option<String>,
    pub initial_case: CaseDocument,
    pub initial_report: ViolationReport,
    pub plan_actions: Vec<Action>,
    pub rationale: String,
    pub explanation: String,
    pub metrics: RunMetrics,
    pub final_fingerprint: String,
    pub chat: ChatRecord,
}

/// Build the training record for one successful run.
pub fn training_record(artifact: &RunArtifact) -> Result<TrainingRecord, HarnessError> {
    if artifact.result.status != RunStatus::Resolved {
        return Err(HarnessError::Internal(format!(
            "only resolved runs are exportable (status: {})",
            artifact.result.status
        )));
    }
    let net = build_network(&artifact.case)?;
    let actions: Vec<Action> = artifact
        .result
        .accepted_actions
        .iter()
        .map(|a| a.action.clone())
        .collect();
    let rationale = artifact
        .result
        .attempt_log
        .iter()
        .filter(|a| a.outcome == AttemptOutcome::Accepted && !a.rationale.is_empty())
        .map(|a| a.rationale.clone())
        .collect::<Vec<_>>()
        .join("; ");

    // Recreate the first-iteration prompt from the recorded initial state.
    let sol = solve(&net, &artifact.workflow.solver)
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    let report = analyze(&net, &sol).map_err(|e| HarnessError::Internal(e.to_string()))?;
    let context = render_adaptive(
        &net,
        &sol,
        &report,
        artifact.workflow.context_budget,
        artifact.workflow.focus_hops,
    );
    let request = PlanRequest {
        context,
        available_actions: ActionCapabilities::from_network(
            &net,
            &report,
            artifact.workflow.focus_hops,
        ),
        constraints: ConstraintsEcho {
            t_max_remaining: artifact.workflow.t_max,
            priority_policy: default_priority_policy(),
        },
        history: Vec::new(),
    };
    let prompt = build_prompt(&request);
    let assistant = plan_to_wire_json(&actions, &rationale);

    let metrics = compute_metrics(&artifact.result, &artifact.initial_report, &net);

    Ok(TrainingRecord {
        schema_version: "1".to_string(),
        scenario_name: artifact.scenario_name.clone(),
        initial_case: artifact.case.clone(),
        initial_report: artifact.initial_report.clone(),
        plan_actions: actions,
        rationale,
        explanation: artifact.result.explanation.clone(),
        metrics,
        final_fingerprint: artifact.result.final_report.fingerprint.clone(),
        chat: ChatRecord {
            system: prompt.system,
            user: prompt.user,
            assistant,
        },
    })
}

/// Apply a record's actions to its recorded initial state and return the
/// resulting violation fingerprint. Matches `final_fingerprint` for every
/// valid record.
pub fn replay_record(record: &TrainingRecord) -> Result<String, HarnessError> {
    let mut net = build_network(&record.initial_case)?;
    crate::actions::apply_plan(&mut net, &record.plan_actions)
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    let sol = solve(&net, &crate::powerflow::SolverOptions::default())
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    let report = analyze(&net, &sol).map_err(|e| HarnessError::Internal(e.to_string()))?;
    Ok(report.fingerprint)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExportStats {
    pub written: usize,
    pub skipped: usize,
}

/// Write one line per successful run; unsuccessful runs are skipped and
/// counted.
pub fn export_training_data(
    artifacts: &[RunArtifact],
    format: ExportFormat,
    mut writer: impl Write,
) -> Result<ExportStats, HarnessError> {
    let mut stats = ExportStats::default();
    for artifact in artifacts {
        if artifact.result.status != RunStatus::Resolved {
            stats.skipped += 1;
            continue;
        }
        let record = training_record(artifact)?;
        let line = match format {
            ExportFormat::Jsonl => serde_json::to_string(&record)
                .map_err(|e| HarnessError::Internal(e.to_string()))?,
            ExportFormat::ChatJsonl => {
                let doc = serde_json::json!({
                    "messages": [
                        {"role": "system", "content": record.chat.system},
                        {"role": "user", "content": record.chat.user},
                        {"role": "assistant", "content": record.chat.assistant},
                    ]
                });
                serde_json::to_string(&doc).map_err(|e| HarnessError::Internal(e.to_string()))?
            }
        };
        writeln!(writer, "{line}")?;
        stats.written += 1;
    }
    Ok(stats)
}
