//! Deterministic tiered planner following the operating priority order:
//! switch reconfiguration first, then battery placement and dispatch, then
//! load curtailment. Every candidate is scored through the sandbox
//! evaluation callback; ties break toward fewer actions and lower element
//! ids, so equal requests always produce equal plans.

use super::{EvalFn, Plan, PlanRequest, Planner, PlannerError};
use crate::actions::{battery_id_for_bus, Action};
use crate::violations::{compare, ViolationKind, ViolationReport};

pub struct HeuristicPlanner;

impl Planner for HeuristicPlanner {
    fn id(&self) -> String {
        "heuristic".to_string()
    }

    fn plan(&self, req: &PlanRequest, eval: &mut EvalFn) -> Result<Plan, PlannerError> {
        plan_heuristic(req, eval)
    }
}

/// Candidate score: violation count, then total severity, then action
/// count, then the joined element ids.
fn score(report: &ViolationReport, actions: &[Action]) -> (usize, f64, usize, String) {
    let ids = actions
        .iter()
        .map(|a| format!("{a:?}"))
        .collect::<Vec<_>>()
        .join("|");
    (report.len(), report.total_severity, actions.len(), ids)
}

fn better(a: &(usize, f64, usize, String), b: &(usize, f64, usize, String)) -> bool {
    if a.0 != b.0 {
        return a.0 < b.0;
    }
    if a.1 != b.1 {
        return a.1 < b.1;
    }
    if a.2 != b.2 {
        return a.2 < b.2;
    }
    a.3 < b.3
}

pub fn plan_heuristic(req: &PlanRequest, eval: &mut EvalFn) -> Result<Plan, PlannerError> {
    let caps = &req.available_actions;
    let base = eval(&[]).map_err(PlannerError::Internal)?;
    if base.is_empty() {
        return Ok(Plan {
            actions: Vec::new(),
            rationale: "no violations present; no action needed".to_string(),
            planner_id: "heuristic".to_string(),
        });
    }

    let mut plan: Vec<Action> = Vec::new();
    let mut current = base.clone();
    let mut rationale_parts: Vec<String> = Vec::new();

    // ---- Tier 1: switch reconfiguration within the focus radius.
    let focus_switches: Vec<_> = caps
        .switches
        .iter()
        .filter(|s| s.distance.map(|d| d <= caps.focus_hops).unwrap_or(false))
        .collect();
    let mut best: Option<(Vec<Action>, ViolationReport)> = None;
    let mut consider = |actions: Vec<Action>, report: ViolationReport,
                        best: &mut Option<(Vec<Action>, ViolationReport)>| {
        let replace = match best {
            None => true,
            Some((cur_actions, cur_report)) => better(
                &score(&report, &actions),
                &score(cur_report, cur_actions),
            ),
        };
        if replace {
            *best = Some((actions, report));
        }
    };
    for sw in &focus_switches {
        let actions = vec![Action::SetSwitch {
            switch_id: sw.switch_id.clone(),
            closed: !sw.closed,
        }];
        if let Ok(report) = eval(&actions) {
            consider(actions, report, &mut best);
        }
    }
    for (i, a) in focus_switches.iter().enumerate() {
        for b in focus_switches.iter().skip(i + 1) {
            let actions = vec![
                Action::SetSwitch {
                    switch_id: a.switch_id.clone(),
                    closed: !a.closed,
                },
                Action::SetSwitch {
                    switch_id: b.switch_id.clone(),
                    closed: !b.closed,
                },
            ];
            if let Ok(report) = eval(&actions) {
                consider(actions, report, &mut best);
            }
        }
    }
    if let Some((actions, report)) = best {
        if compare(&current, &report).improved {
            rationale_parts.push(format!(
                "switch reconfiguration: {}",
                actions
                    .iter()
                    .map(|a| a.describe())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            plan = actions;
            current = report;
        }
    }

    // ---- Tier 2: battery placement at the worst undervoltage bus, raising
    // reactive dispatch in 20% steps of the rated MVA.
    let mut budget = caps.battery_budget_remaining;
    let mut occupied: std::collections::BTreeSet<String> = caps
        .batteries
        .iter()
        .filter(|b| b.placed)
        .map(|b| b.bus_id.clone())
        .collect();
    while budget > 0 && !current.is_empty() {
        let target = current
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Undervoltage && !occupied.contains(&v.element))
            .max_by(|a, b| {
                a.severity
                    .partial_cmp(&b.severity)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| b.element.cmp(&a.element))
            })
            .map(|v| v.element.clone());
        let Some(bus_id) = target else { break };

        let defaults = caps.battery_defaults;
        let q_cap = defaults.s_max_mva.min(defaults.q_max_mvar);
        let mut chosen: Option<(Vec<Action>, ViolationReport)> = None;
        for step in 1..=5u32 {
            let q = (0.2 * step as f64 * defaults.s_max_mva).min(q_cap);
            let mut candidate = plan.clone();
            candidate.push(Action::AddBattery {
                bus_id: bus_id.clone(),
                s_max_mva: defaults.s_max_mva,
                p_max_mw: defaults.p_max_mw,
                q_max_mvar: defaults.q_max_mvar,
            });
            candidate.push(Action::DispatchBattery {
                battery_id: battery_id_for_bus(&bus_id),
                p_mw: 0.0,
                q_mvar: q,
            });
            let Ok(report) = eval(&candidate) else { continue };
            let cleared = !report
                .violations
                .iter()
                .any(|v| v.kind == ViolationKind::Undervoltage && v.element == bus_id);
            let is_better = chosen
                .as_ref()
                .map(|(acts, rep)| better(&score(&report, &candidate), &score(rep, acts)))
                .unwrap_or(true);
            if is_better {
                chosen = Some((candidate, report));
            }
            if cleared {
                break;
            }
        }
        occupied.insert(bus_id.clone());
        match chosen {
            Some((candidate, report)) if compare(&current, &report).improved => {
                rationale_parts.push(format!(
                    "battery support at {bus_id} (worst undervoltage, severity ranked)"
                ));
                plan = candidate;
                current = report;
                budget -= 1;
            }
            _ => break,
        }
    }

    // ---- Tier 3: curtail the largest curtailable loads behind each
    // overloaded branch, in 0.1 gamma steps up to gamma_max.
    let overloaded: Vec<(String, f64)> = {
        let mut v: Vec<(String, f64)> = current
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Thermal)
            .map(|v| (v.element.clone(), v.severity))
            .collect();
        v.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        v
    };
    for (branch_id, _) in overloaded {
        let still_overloaded = |report: &ViolationReport| {
            report
                .violations
                .iter()
                .any(|v| v.kind == ViolationKind::Thermal && v.element == branch_id)
        };
        if !still_overloaded(&current) {
            continue;
        }
        let relief = caps.overload_relief.get(&branch_id).cloned().unwrap_or_default();
        for load_id in relief {
            if !still_overloaded(&current) {
                break;
            }
            let Some(cap) = caps.curtailable(&load_id) else { continue };
            let already = plan.iter().any(|a| {
                matches!(a, Action::CurtailLoad { load_id: l, .. } if *l == load_id)
            });
            if already {
                continue;
            }
            let mut committed = false;
            let mut fallback: Option<(Vec<Action>, ViolationReport)> = None;
            let mut step = 1;
            loop {
                let gamma = 0.1 * step as f64;
                if gamma > cap.gamma_max + 1e-12 {
                    break;
                }
                let mut candidate = plan.clone();
                candidate.push(Action::CurtailLoad {
                    load_id: load_id.clone(),
                    gamma,
                });
                if let Ok(report) = eval(&candidate) {
                    if !still_overloaded(&report) {
                        // Smallest sufficient step clears the branch.
                        if compare(&current, &report).improved {
                            rationale_parts.push(format!(
                                "curtail {load_id} by {gamma:.1} to relieve {branch_id}"
                            ));
                            plan = candidate;
                            current = report;
                            committed = true;
                        }
                        break;
                    }
                    fallback = Some((candidate, report));
                }
                step += 1;
            }
            if !committed {
                if let Some((candidate, report)) = fallback {
                    if compare(&current, &report).improved {
                        rationale_parts.push(format!(
                            "curtail {load_id} (max useful step) toward relieving {branch_id}"
                        ));
                        plan = candidate;
                        current = report;
                    }
                }
            }
        }
    }

    if plan.is_empty() || !compare(&base, &current).improved {
        return Err(PlannerError::NoImprovingPlan);
    }

    Ok(Plan {
        actions: plan,
        rationale: rationale_parts.join("; "),
        planner_id: "heuristic".to_string(),
    })
}
