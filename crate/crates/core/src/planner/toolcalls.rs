//! The tool-call wire schema: a UTF-8 JSON object
//! `{"actions":[{"tool":...,"args":{...}}],"rationale":"..."}`.
//!
//! Parsing extracts the first JSON object found in free text (fenced code
//! blocks included), validates every call against the advertised
//! capabilities, and rejects the whole plan if any action is invalid.
//! `add_battery` carrying an initial `p_mw`/`q_mvar` desugars into an
//! `AddBattery` followed by a `DispatchBattery`.

use super::{ActionCapabilities, Plan, PlannerError};
use crate::actions::{battery_id_for_bus, Action};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
struct WireDoc {
    actions: Vec<WireCall>,
    #[serde(default)]
    rationale: Option<String>,
}

#[derive(Debug, Deserialize)]
struct WireCall {
    tool: String,
    #[serde(default)]
    args: serde_json::Map<String, Value>,
}

/// Scan for the first balanced `{...}` region that parses as a JSON object.
fn first_json_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let mut search_from = 0;
    while let Some(open) = text[search_from..].find('{').map(|p| p + search_from) {
        let mut depth = 0usize;
        let mut in_string = false;
        let mut escaped = false;
        for (offset, &b) in bytes[open..].iter().enumerate() {
            match (in_string, escaped, b) {
                (true, true, _) => escaped = false,
                (true, false, b'\\') => escaped = true,
                (true, false, b'"') => in_string = false,
                (true, false, _) => {}
                (false, _, b'"') => in_string = true,
                (false, _, b'{') => depth += 1,
                (false, _, b'}') => {
                    depth -= 1;
                    if depth == 0 {
                        let candidate = &text[open..=open + offset];
                        if serde_json::from_str::<Value>(candidate)
                            .map(|v| v.is_object())
                            .unwrap_or(false)
                        {
                            return Some(candidate);
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
        search_from = open + 1;
    }
    None
}

fn arg_str(args: &serde_json::Map<String, Value>, key: &str, index: usize) -> Result<String, PlannerError> {
    match args.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(PlannerError::InvalidArguments {
            index,
            reason: format!("`{key}` must be a string, got {other}"),
        }),
        None => Err(PlannerError::InvalidArguments {
            index,
            reason: format!("missing required argument `{key}`"),
        }),
    }
}

fn arg_f64(args: &serde_json::Map<String, Value>, key: &str, index: usize) -> Result<f64, PlannerError> {
    match args.get(key) {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| PlannerError::InvalidArguments {
            index,
            reason: format!("`{key}` is not representable as f64"),
        }),
        Some(other) => Err(PlannerError::InvalidArguments {
            index,
            reason: format!("`{key}` must be a number, got {other}"),
        }),
        None => Err(PlannerError::InvalidArguments {
            index,
            reason: format!("missing required argument `{key}`"),
        }),
    }
}

fn arg_f64_opt(
    args: &serde_json::Map<String, Value>,
    key: &str,
    index: usize,
) -> Result<Option<f64>, PlannerError> {
    if args.contains_key(key) {
        arg_f64(args, key, index).map(Some)
    } else {
        Ok(None)
    }
}

fn arg_bool(args: &serde_json::Map<String, Value>, key: &str, index: usize) -> Result<bool, PlannerError> {
    match args.get(key) {
        Some(Value::Bool(b)) => Ok(*b),
        Some(other) => Err(PlannerError::InvalidArguments {
            index,
            reason: format!("`{key}` must be a boolean, got {other}"),
        }),
        None => Err(PlannerError::InvalidArguments {
            index,
            reason: format!("missing required argument `{key}`"),
        }),
    }
}

/// Parse planner output into a validated [`Plan`].
pub fn parse_tool_calls(text: &str, caps: &ActionCapabilities) -> Result<Plan, PlannerError> {
    let object_text = first_json_object(text).ok_or(PlannerError::NoJsonFound)?;
    let doc: WireDoc = serde_json::from_str(object_text)
        .map_err(|e| PlannerError::SchemaMismatch(e.to_string()))?;

    let mut actions = Vec::new();
    // Batteries added earlier in this same plan are dispatchable later in it.
    let mut added_batteries: std::collections::BTreeMap<String, (f64, f64, f64)> =
        Default::default();
    let mut adds = 0u32;

    for (index, call) in doc.actions.iter().enumerate() {
        match call.tool.as_str() {
            "update_switch_status" => {
                let switch_id = arg_str(&call.args, "switch_id", index)?;
                let closed = arg_bool(&call.args, "closed", index)?;
                if caps.switch(&switch_id).is_none() {
                    return Err(PlannerError::InvalidArguments {
                        index,
                        reason: format!("unknown switch `{switch_id}`"),
                    });
                }
                actions.push(Action::SetSwitch { switch_id, closed });
            }
            "curtail_load" => {
                let load_id = arg_str(&call.args, "load_id", index)?;
                let gamma = arg_f64(&call.args, "gamma", index)?;
                let cap = caps.curtailable(&load_id).ok_or_else(|| {
                    PlannerError::InvalidArguments {
                        index,
                        reason: format!("unknown or non-curtailable load `{load_id}`"),
                    }
                })?;
                if !(0.0..=1.0).contains(&gamma) {
                    return Err(PlannerError::InvalidArguments {
                        index,
                        reason: format!("gamma {gamma} outside [0, 1]"),
                    });
                }
                if gamma > cap.gamma_max + 1e-12 {
                    return Err(PlannerError::InvalidArguments {
                        index,
                        reason: format!(
                            "gamma {gamma} exceeds gamma_max {} for `{load_id}`",
                            cap.gamma_max
                        ),
                    });
                }
                actions.push(Action::CurtailLoad { load_id, gamma });
            }
            "add_battery" => {
                let bus_id = arg_str(&call.args, "bus_id", index)?;
                if !caps.bus_ids.contains(&bus_id) {
                    return Err(PlannerError::InvalidArguments {
                        index,
                        reason: format!("unknown bus `{bus_id}`"),
                    });
                }
                adds += 1;
                if adds > caps.battery_budget_remaining {
                    return Err(PlannerError::InvalidArguments {
                        index,
                        reason: format!(
                            "battery budget exhausted (remaining {})",
                            caps.battery_budget_remaining
                        ),
                    });
                }
                let defaults = caps.battery_defaults;
                let s_max = arg_f64_opt(&call.args, "s_max_mva", index)?.unwrap_or(defaults.s_max_mva);
                if s_max <= 0.0 {
                    return Err(PlannerError::InvalidArguments {
                        index,
                        reason: "s_max_mva must be > 0".to_string(),
                    });
                }
                let p = arg_f64_opt(&call.args, "p_mw", index)?;
                let q = arg_f64_opt(&call.args, "q_mvar", index)?;
                let battery_id = battery_id_for_bus(&bus_id);
                added_batteries.insert(
                    battery_id.clone(),
                    (s_max, defaults.p_max_mw, defaults.q_max_mvar),
                );
                actions.push(Action::AddBattery {
                    bus_id,
                    s_max_mva: s_max,
                    p_max_mw: defaults.p_max_mw,
                    q_max_mvar: defaults.q_max_mvar,
                });
                if p.is_some() || q.is_some() {
                    let (p, q) = (p.unwrap_or(0.0), q.unwrap_or(0.0));
                    check_dispatch(p, q, s_max, defaults.p_max_mw, defaults.q_max_mvar, index)?;
                    actions.push(Action::DispatchBattery {
                        battery_id,
                        p_mw: p,
                        q_mvar: q,
                    });
                }
            }
            "dispatch_battery" => {
                let battery_id = arg_str(&call.args, "battery_id", index)?;
                let p = arg_f64(&call.args, "p_mw", index)?;
                let q = arg_f64(&call.args, "q_mvar", index)?;
                let limits = caps
                    .battery(&battery_id)
                    .filter(|b| b.placed)
                    .map(|b| (b.s_max_mva, b.p_max_mw, b.q_max_mvar))
                    .or_else(|| added_batteries.get(&battery_id).copied());
                let Some((s_max, p_max, q_max)) = limits else {
                    return Err(PlannerError::InvalidArguments {
                        index,
                        reason: format!("unknown or unplaced battery `{battery_id}`"),
                    });
                };
                check_dispatch(p, q, s_max, p_max, q_max, index)?;
                actions.push(Action::DispatchBattery {
                    battery_id,
                    p_mw: p,
                    q_mvar: q,
                });
            }
            other => return Err(PlannerError::UnknownTool(other.to_string())),
        }
    }

    Ok(Plan {
        actions,
        rationale: doc.rationale.unwrap_or_default(),
        planner_id: String::new(),
    })
}

fn check_dispatch(
    p: f64,
    q: f64,
    s_max: f64,
    p_max: f64,
    q_max: f64,
    index: usize,
) -> Result<(), PlannerError> {
    if !p.is_finite() || !q.is_finite() {
        return Err(PlannerError::InvalidArguments {
            index,
            reason: "dispatch values must be finite".to_string(),
        });
    }
    if p * p + q * q > s_max * s_max + 1e-9 {
        return Err(PlannerError::InvalidArguments {
            index,
            reason: format!("dispatch p={p} q={q} exceeds capability circle s_max={s_max}"),
        });
    }
    if p.abs() > p_max + 1e-9 || q.abs() > q_max + 1e-9 {
        return Err(PlannerError::InvalidArguments {
            index,
            reason: format!("dispatch p={p} q={q} exceeds p/q limits ({p_max}/{q_max})"),
        });
    }
    Ok(())
}

/// Render actions back into the wire format; `parse_tool_calls` on the
/// output reproduces the same action list.
pub fn plan_to_wire_json(actions: &[Action], rationale: &str) -> String {
    let calls: Vec<Value> = actions
        .iter()
        .map(|action| {
            let args = match action {
                Action::SetSwitch { switch_id, closed } => serde_json::json!({
                    "switch_id": switch_id,
                    "closed": closed,
                }),
                Action::CurtailLoad { load_id, gamma } => serde_json::json!({
                    "load_id": load_id,
                    "gamma": gamma,
                }),
                Action::AddBattery {
                    bus_id,
                    s_max_mva,
                    ..
                } => serde_json::json!({
                    "bus_id": bus_id,
                    "s_max_mva": s_max_mva,
                }),
                Action::DispatchBattery {
                    battery_id,
                    p_mw,
                    q_mvar,
                } => serde_json::json!({
                    "battery_id": battery_id,
                    "p_mw": p_mw,
                    "q_mvar": q_mvar,
                }),
            };
            serde_json::json!({ "tool": action.tool_name(), "args": args })
        })
        .collect();
    serde_json::to_string(&serde_json::json!({
        "actions": calls,
        "rationale": rationale,
    }))
    .expect("wire serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::violations::ViolationReport;

    fn caps() -> ActionCapabilities {
        let net = crate::caseio::builtin_network("cigre_mv").unwrap();
        ActionCapabilities::from_network(&net, &ViolationReport::default(), 3)
    }

    #[test]
    fn fenced_block_parses_to_switch_action() {
        let text = "Here is my plan:\n```json\n{\"actions\":[{\"tool\":\"update_switch_status\",\"args\":{\"switch_id\":\"sw_s1\",\"closed\":true}}],\"rationale\":\"close tie\"}\n```\n";
        let plan = parse_tool_calls(text, &caps()).unwrap();
        assert_eq!(plan.actions.len(), 1);
        assert!(matches!(
            &plan.actions[0],
            Action::SetSwitch { switch_id, closed: true } if switch_id == "sw_s1"
        ));
        assert_eq!(plan.rationale, "close tie");
    }

    #[test]
    fn prose_only_response_is_no_json_found() {
        let err = parse_tool_calls("I think we should close the tie switch.", &caps());
        assert!(matches!(err, Err(PlannerError::NoJsonFound)));
    }

    #[test]
    fn unknown_tool_is_rejected() {
        let text = r#"{"actions":[{"tool":"delete_bus","args":{"bus_id":"bus_1"}}]}"#;
        match parse_tool_calls(text, &caps()) {
            Err(PlannerError::UnknownTool(name)) => assert_eq!(name, "delete_bus"),
            other => panic!("expected UnknownTool, got {other:?}"),
        }
    }

    #[test]
    fn unknown_element_rejects_whole_plan() {
        let text = r#"{"actions":[
            {"tool":"update_switch_status","args":{"switch_id":"sw_s1","closed":true}},
            {"tool":"curtail_load","args":{"load_id":"load_99","gamma":0.2}}
        ]}"#;
        match parse_tool_calls(text, &caps()) {
            Err(PlannerError::InvalidArguments { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected InvalidArguments, got {other:?}"),
        }
    }

    #[test]
    fn add_battery_with_dispatch_desugars() {
        let text = r#"{"actions":[{"tool":"add_battery","args":{"bus_id":"bus_10","q_mvar":2.0}}]}"#;
        let plan = parse_tool_calls(text, &caps()).unwrap();
        assert_eq!(plan.actions.len(), 2);
        assert!(matches!(plan.actions[0], Action::AddBattery { .. }));
        assert!(matches!(
            &plan.actions[1],
            Action::DispatchBattery { battery_id, q_mvar, .. }
                if battery_id == "bat_bus_10" && *q_mvar == 2.0
        ));
    }

    #[test]
    fn wire_round_trip_reproduces_actions() {
        let actions = vec![
            Action::SetSwitch {
                switch_id: "sw_s1".into(),
                closed: true,
            },
            Action::CurtailLoad {
                load_id: "load_5".into(),
                gamma: 0.3,
            },
            Action::AddBattery {
                bus_id: "bus_10".into(),
                s_max_mva: 5.0,
                p_max_mw: 5.0,
                q_max_mvar: 5.0,
            },
            Action::DispatchBattery {
                battery_id: "bat_bus_10".into(),
                p_mw: 0.0,
                q_mvar: 3.0,
            },
        ];
        let wire = plan_to_wire_json(&actions, "test");
        let plan = parse_tool_calls(&wire, &caps()).unwrap();
        assert_eq!(plan.actions, actions);
    }
}
