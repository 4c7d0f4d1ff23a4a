//! Prompt construction for the LLM planner. The system message carries the
//! role definition, the rendered network state, the tool schemas with live
//! capability listings, the priority policy and the output schema; the user
//! message carries the violation list and the history of failed plans.

use super::PlanRequest;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct ChatPrompt {
    pub system: String,
    pub user: String,
}

pub fn build_prompt(req: &PlanRequest) -> ChatPrompt {
    let caps = &req.available_actions;
    let mut system = String::new();

    let _ = writeln!(
        system,
        "You are an expert power system operator responsible for resolving grid violations \
         safely and efficiently. Ground every decision in power-system operating practice."
    );

    let _ = writeln!(system, "\n## current network state\n{}", req.context.text.trim_end());

    let _ = writeln!(system, "\n## available tools");
    let _ = writeln!(
        system,
        "update_switch_status: args {{\"switch_id\": string, \"closed\": boolean}} — open or close a switchable line."
    );
    if caps.switches.is_empty() {
        let _ = writeln!(system, "  (no switchable lines available)");
    }
    for sw in &caps.switches {
        let _ = writeln!(
            system,
            "  switch {} on {} currently {}{}",
            sw.switch_id,
            sw.branch_id,
            if sw.closed { "closed" } else { "open" },
            sw.distance
                .map(|d| format!(", {d} hops from a violation"))
                .unwrap_or_default(),
        );
    }
    let _ = writeln!(
        system,
        "curtail_load: args {{\"load_id\": string, \"gamma\": number in [0,1]}} — reduce a curtailable load; gamma is the curtailment fraction and must not exceed the load's gamma_max."
    );
    if caps.curtailable_loads.is_empty() {
        let _ = writeln!(system, "  (no curtailable loads available)");
    }
    for load in &caps.curtailable_loads {
        let _ = writeln!(
            system,
            "  load {} at {} p={:.3}MW gamma={:.2} gamma_max={:.2}",
            load.load_id, load.bus_id, load.p_mw, load.gamma, load.gamma_max
        );
    }
    let _ = writeln!(
        system,
        "add_battery: args {{\"bus_id\": string, \"p_mw\"?: number, \"q_mvar\"?: number, \"s_max_mva\"?: number}} — place a battery (optionally with an initial dispatch). Remaining budget: {}. Defaults when omitted: s_max={:.1}MVA, p_max={:.1}MW, q_max={:.1}MVAr.",
        caps.battery_budget_remaining,
        caps.battery_defaults.s_max_mva,
        caps.battery_defaults.p_max_mw,
        caps.battery_defaults.q_max_mvar,
    );
    let _ = writeln!(
        system,
        "dispatch_battery: args {{\"battery_id\": string, \"p_mw\": number, \"q_mvar\": number}} — set the dispatch of a placed battery within its capability circle (p^2+q^2 <= s_max^2)."
    );
    for battery in &caps.batteries {
        let _ = writeln!(
            system,
            "  battery {} at {} ({}) s_max={:.1}MVA",
            battery.battery_id,
            battery.bus_id,
            if battery.placed { "placed" } else { "slot" },
            battery.s_max_mva,
        );
    }

    let _ = writeln!(system, "\n## priority policy");
    let _ = writeln!(system, "{}", req.constraints.priority_policy);
    let _ = writeln!(
        system,
        "planning iterations remaining: {}",
        req.constraints.t_max_remaining
    );

    let _ = writeln!(system, "\n## output format");
    let _ = writeln!(
        system,
        "Respond with JSON only — a single object, no prose before or after it:\n\
         {{\"actions\":[{{\"tool\":\"update_switch_status\"|\"curtail_load\"|\"add_battery\"|\"dispatch_battery\",\"args\":{{...}}}}],\"rationale\":\"...\"}}"
    );

    let mut user = String::new();
    let _ = writeln!(user, "## active violations");
    if req.context.focus_violations.is_empty() {
        let _ = writeln!(user, "none");
    }
    for v in &req.context.focus_violations {
        match (v.observed, v.limit) {
            (Some(observed), Some(limit)) => {
                let _ = writeln!(
                    user,
                    "- {} {} observed={observed:.4} limit={limit:.4} severity={:.4}",
                    v.kind, v.element, v.severity
                );
            }
            _ => {
                let _ = writeln!(user, "- {} {} severity={:.4}", v.kind, v.element, v.severity);
            }
        }
    }
    if !req.history.is_empty() {
        let _ = writeln!(user, "\n## previous attempts");
        for attempt in &req.history {
            let _ = writeln!(user, "- iteration {}: {}", attempt.iteration, attempt.summary);
        }
    }
    let _ = writeln!(
        user,
        "\nPropose the next plan as a JSON tool-call document."
    );

    ChatPrompt { system, user }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{ContextMode, NetworkContext};
    use crate::planner::{ActionCapabilities, AttemptSummary, ConstraintsEcho, PlanRequest};
    use crate::violations::ViolationReport;

    fn request(history: Vec<AttemptSummary>) -> PlanRequest {
        let net = crate::caseio::builtin_network("cigre_mv").unwrap();
        let report = ViolationReport::default();
        PlanRequest {
            context: NetworkContext {
                mode: ContextMode::FullDetail,
                text: "=== network summary ===\n(test)".to_string(),
                token_estimate: 10,
                included_elements: Default::default(),
                focus_violations: Vec::new(),
            },
            available_actions: ActionCapabilities::from_network(&net, &report, 3),
            constraints: ConstraintsEcho {
                t_max_remaining: 10,
                priority_policy: crate::planner::default_priority_policy(),
            },
            history,
        }
    }

    #[test]
    fn system_prompt_names_all_tools_in_order() {
        let prompt = build_prompt(&request(vec![]));
        let sys = &prompt.system;
        let idx = |needle: &str| sys.find(needle).unwrap_or_else(|| panic!("missing {needle}"));
        assert!(idx("expert power system operator") < idx("## current network state"));
        assert!(idx("## current network state") < idx("## available tools"));
        assert!(idx("## available tools") < idx("## priority policy"));
        assert!(idx("## priority policy") < idx("## output format"));
        for tool in ["update_switch_status", "curtail_load", "add_battery"] {
            assert!(sys.contains(tool), "tool {tool} missing");
        }
        assert!(sys.contains("JSON only"));
    }

    #[test]
    fn empty_history_has_no_previous_attempts_section() {
        let prompt = build_prompt(&request(vec![]));
        assert!(!prompt.user.contains("previous attempts"));
        let with = build_prompt(&request(vec![AttemptSummary {
            iteration: 1,
            summary: "plan rolled back".to_string(),
        }]));
        assert!(with.user.contains("previous attempts"));
    }

    #[test]
    fn identical_requests_give_identical_bytes() {
        let a = build_prompt(&request(vec![]));
        let b = build_prompt(&request(vec![]));
        assert_eq!(a, b);
    }
}
