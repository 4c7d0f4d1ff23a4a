//! Plan generation behind a common interface: a deterministic heuristic
//! planner and an LLM planner with prompt construction and tool-call
//! parsing. All planners see the same [`PlanRequest`] and return validated
//! [`Plan`]s; the workflow re-checks every action before execution anyway.

mod heuristic;
mod llm;
mod prompt;
mod toolcalls;

pub use heuristic::{plan_heuristic, HeuristicPlanner};
pub use llm::{
    plan_llm, ChatMessage, ChatRequest, ChatTransport, HttpChatTransport, LlmClientConfig,
    LlmPlanner, ScriptedTransport, TransportError,
};
pub use prompt::{build_prompt, ChatPrompt};
pub use toolcalls::{parse_tool_calls, plan_to_wire_json};

use crate::actions::Action;
use crate::context::NetworkContext;
use crate::model::Network;
use crate::violations::{ViolationKind, ViolationReport};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const DEFAULT_BATTERY_S_MAX_MVA: f64 = 5.0;
pub const DEFAULT_BATTERY_P_MAX_MW: f64 = 5.0;
pub const DEFAULT_BATTERY_Q_MAX_MVAR: f64 = 5.0;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no plan improves on the current state (search exhausted)")]
    NoImprovingPlan,
    #[error("no JSON object found in planner response")]
    NoJsonFound,
    #[error("tool-call document does not match the schema: {0}")]
    SchemaMismatch(String),
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("invalid arguments for action {index}: {reason}")]
    InvalidArguments { index: usize, reason: String },
    #[error("transport failed: {0}")]
    Transport(#[from] TransportError),
    #[error("response unparseable after repair prompt: {0}")]
    UnparseableAfterRepair(String),
    #[error("planner internal failure: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryDefaults {
    pub s_max_mva: f64,
    pub p_max_mw: f64,
    pub q_max_mvar: f64,
}

impl Default for BatteryDefaults {
    fn default() -> Self {
        BatteryDefaults {
            s_max_mva: DEFAULT_BATTERY_S_MAX_MVA,
            p_max_mw: DEFAULT_BATTERY_P_MAX_MW,
            q_max_mvar: DEFAULT_BATTERY_Q_MAX_MVAR,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwitchCapability {
    pub switch_id: String,
    pub branch_id: String,
    pub closed: bool,
    /// Hops from the nearest active violation, if reachable.
    pub distance: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurtailCapability {
    pub load_id: String,
    pub bus_id: String,
    pub p_mw: f64,
    pub gamma: f64,
    pub gamma_max: f64,
    pub distance: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryCapability {
    pub battery_id: String,
    pub bus_id: String,
    pub placed: bool,
    pub s_max_mva: f64,
    pub p_max_mw: f64,
    pub q_max_mvar: f64,
    pub distance: Option<usize>,
}

/// What the action space currently offers, annotated with violation
/// proximity so planners can honor the focus radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionCapabilities {
    pub switches: Vec<SwitchCapability>,
    pub curtailable_loads: Vec<CurtailCapability>,
    pub batteries: Vec<BatteryCapability>,
    pub battery_budget_remaining: u32,
    pub battery_defaults: BatteryDefaults,
    /// All bus ids (valid battery placement targets).
    pub bus_ids: BTreeSet<String>,
    /// Per overloaded branch: curtailable loads that draw through it,
    /// largest first.
    pub overload_relief: BTreeMap<String, Vec<String>>,
    pub focus_hops: usize,
}

impl ActionCapabilities {
    pub fn from_network(net: &Network, report: &ViolationReport, focus_hops: usize) -> Self {
        let dist = crate::context::violation_distances(net, report);
        let branch_distance = |branch_id: &str| -> Option<usize> {
            let branch = net.branches.get(branch_id)?;
            match (dist.get(&branch.from_bus), dist.get(&branch.to_bus)) {
                (Some(&a), Some(&b)) => Some(a.min(b)),
                (Some(&a), None) => Some(a),
                (None, Some(&b)) => Some(b),
                (None, None) => None,
            }
        };

        let mut switches: Vec<SwitchCapability> = net
            .switches
            .values()
            .map(|sw| SwitchCapability {
                switch_id: sw.id.clone(),
                branch_id: sw.branch_id.clone(),
                closed: sw.closed,
                distance: branch_distance(&sw.branch_id),
            })
            .collect();
        switches.sort_by(|a, b| a.switch_id.cmp(&b.switch_id));

        let mut curtailable_loads: Vec<CurtailCapability> = net
            .loads
            .values()
            .filter(|l| l.curtailable)
            .map(|l| CurtailCapability {
                load_id: l.id.clone(),
                bus_id: l.bus_id.clone(),
                p_mw: l.p_mw,
                gamma: l.gamma,
                gamma_max: l.gamma_max,
                distance: dist.get(&l.bus_id).copied(),
            })
            .collect();
        curtailable_loads.sort_by(|a, b| a.load_id.cmp(&b.load_id));

        let mut batteries: Vec<BatteryCapability> = net
            .batteries
            .values()
            .map(|b| BatteryCapability {
                battery_id: b.id.clone(),
                bus_id: b.bus_id.clone(),
                placed: b.placed,
                s_max_mva: b.s_max_mva,
                p_max_mw: b.p_max_mw,
                q_max_mvar: b.q_max_mvar,
                distance: dist.get(&b.bus_id).copied(),
            })
            .collect();
        batteries.sort_by(|a, b| a.battery_id.cmp(&b.battery_id));

        let overload_relief = overload_relief_map(net, report);

        ActionCapabilities {
            switches,
            curtailable_loads,
            batteries,
            battery_budget_remaining: net.battery_budget.saturating_sub(net.placed_battery_count()),
            battery_defaults: BatteryDefaults::default(),
            bus_ids: net.buses.keys().cloned().collect(),
            overload_relief,
            focus_hops,
        }
    }

    pub fn switch(&self, id: &str) -> Option<&SwitchCapability> {
        self.switches.iter().find(|s| s.switch_id == id)
    }

    pub fn curtailable(&self, id: &str) -> Option<&CurtailCapability> {
        self.curtailable_loads.iter().find(|l| l.load_id == id)
    }

    pub fn battery(&self, id: &str) -> Option<&BatteryCapability> {
        self.batteries.iter().find(|b| b.battery_id == id)
    }
}

/// For each thermally violated branch: the curtailable loads electrically
/// behind it, largest demand first. On radial sections this is the
/// component cut off by removing the branch (the side away from the
/// slack); in meshed sections it falls back to curtailable loads within
/// two hops of the branch.
fn overload_relief_map(net: &Network, report: &ViolationReport) -> BTreeMap<String, Vec<String>> {
    use crate::model::Topology;
    let mut map = BTreeMap::new();
    let slack = net.slack_bus().map(|b| b.id.clone()).ok();
    let topology = Topology::of(net, true);
    let slack_dist = slack
        .as_ref()
        .map(|s| topology.distances_from(std::slice::from_ref(s)))
        .unwrap_or_default();

    for violation in &report.violations {
        if violation.kind != ViolationKind::Thermal {
            continue;
        }
        let Some(branch) = net.branches.get(&violation.element) else { continue };

        // Walk from the far endpoint without crossing the branch itself.
        let far = match (slack_dist.get(&branch.from_bus), slack_dist.get(&branch.to_bus)) {
            (Some(a), Some(b)) if a <= b => branch.to_bus.clone(),
            (Some(_), Some(_)) => branch.from_bus.clone(),
            _ => branch.to_bus.clone(),
        };
        let mut downstream: BTreeSet<String> = Default::default();
        let mut queue = std::collections::VecDeque::from([far.clone()]);
        downstream.insert(far);
        let mut reaches_slack = false;
        while let Some(bus) = queue.pop_front() {
            if slack.as_deref() == Some(bus.as_str()) {
                reaches_slack = true;
            }
            for (branch_id, next) in topology.adjacency.get(&bus).into_iter().flatten() {
                if branch_id == &branch.id {
                    continue;
                }
                if downstream.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }

        let candidate_buses: BTreeSet<String> = if reaches_slack {
            // Meshed: no clean downstream side; use electrical proximity.
            let near = topology.distances_from(&[branch.from_bus.clone(), branch.to_bus.clone()]);
            near.into_iter().filter(|(_, d)| *d <= 2).map(|(b, _)| b).collect()
        } else {
            downstream
        };

        let mut loads: Vec<&crate::model::Load> = net
            .loads
            .values()
            .filter(|l| l.curtailable && candidate_buses.contains(&l.bus_id))
            .collect();
        loads.sort_by(|a, b| {
            b.p_mw
                .partial_cmp(&a.p_mw)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.id.cmp(&b.id))
        });
        map.insert(
            violation.element.clone(),
            loads.into_iter().map(|l| l.id.clone()).collect(),
        );
    }
    map
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintsEcho {
    pub t_max_remaining: usize,
    pub priority_policy: String,
}

pub fn default_priority_policy() -> String {
    "1) topology reconfiguration (switching), 2) battery deployment/dispatch, 3) load curtailment"
        .to_string()
}

/// Outcome summary of a previously attempted plan, fed back to the planner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptSummary {
    pub iteration: usize,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanRequest {
    pub context: NetworkContext,
    pub available_actions: ActionCapabilities,
    pub constraints: ConstraintsEcho,
    pub history: Vec<AttemptSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<Action>,
    pub rationale: String,
    pub planner_id: String,
}

impl Plan {
    pub fn is_no_action(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Evaluation callback handed to planners: runs a candidate action list on
/// a scratch copy of the sandbox and returns the resulting report. Errors
/// are diagnostics (invalid action, solver divergence), not fatalities.
pub type EvalFn<'a> = dyn FnMut(&[Action]) -> Result<ViolationReport, String> + 'a;

pub trait Planner {
    fn id(&self) -> String;
    fn plan(&self, req: &PlanRequest, eval: &mut EvalFn) -> Result<Plan, PlannerError>;
}
