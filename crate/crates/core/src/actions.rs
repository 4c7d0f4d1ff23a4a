//! Typed control actions: constraint validation, application and exact
//! reversal. Applying an action returns an [`UndoRecord`] holding the
//! minimal prior state; undoing a full stack restores a bit-identical
//! network.

use crate::model::{Battery, Network};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    SetSwitch {
        switch_id: String,
        closed: bool,
    },
    CurtailLoad {
        load_id: String,
        gamma: f64,
    },
    AddBattery {
        bus_id: String,
        s_max_mva: f64,
        p_max_mw: f64,
        q_max_mvar: f64,
    },
    DispatchBattery {
        battery_id: String,
        p_mw: f64,
        q_mvar: f64,
    },
}

impl Action {
    /// The wire-format tool name for this action variant.
    pub fn tool_name(&self) -> &'static str {
        match self {
            Action::SetSwitch { .. } => "update_switch_status",
            Action::CurtailLoad { .. } => "curtail_load",
            Action::AddBattery { .. } => "add_battery",
            Action::DispatchBattery { .. } => "dispatch_battery",
        }
    }

    /// Bus ids electrically adjacent to this action's target element.
    pub fn touched_buses(&self, net: &Network) -> Vec<String> {
        match self {
            Action::SetSwitch { switch_id, .. } => net
                .switches
                .get(switch_id)
                .and_then(|s| net.branches.get(&s.branch_id))
                .map(|b| vec![b.from_bus.clone(), b.to_bus.clone()])
                .unwrap_or_default(),
            Action::CurtailLoad { load_id, .. } => net
                .loads
                .get(load_id)
                .map(|l| vec![l.bus_id.clone()])
                .unwrap_or_default(),
            Action::AddBattery { bus_id, .. } => vec![bus_id.clone()],
            Action::DispatchBattery { battery_id, .. } => net
                .batteries
                .get(battery_id)
                .map(|b| vec![b.bus_id.clone()])
                .unwrap_or_default(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Action::SetSwitch { switch_id, closed } => {
                format!("{} switch {switch_id}", if *closed { "close" } else { "open" })
            }
            Action::CurtailLoad { load_id, gamma } => {
                format!("curtail load {load_id} to gamma={gamma:.2}")
            }
            Action::AddBattery { bus_id, s_max_mva, .. } => {
                format!("add {s_max_mva:.1} MVA battery at bus {bus_id}")
            }
            Action::DispatchBattery { battery_id, p_mw, q_mvar } => {
                format!("dispatch battery {battery_id} to p={p_mw:.2} MW, q={q_mvar:.2} MVAr")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("unknown {kind} `{id}`")]
    UnknownElement { kind: &'static str, id: String },
    #[error("load `{0}` is not curtailable")]
    NotCurtailable(String),
    #[error("gamma {gamma} exceeds gamma_max {gamma_max} for load `{load_id}`")]
    GammaExceedsMax {
        load_id: String,
        gamma: f64,
        gamma_max: f64,
    },
    #[error("gamma {0} outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("battery budget exhausted ({placed} of {budget} placed)")]
    BudgetExceeded { placed: u32, budget: u32 },
    #[error("a battery is already placed at bus `{0}`")]
    BatteryAlreadyPlaced(String),
    #[error("battery `{0}` is not placed; dispatch is forbidden")]
    NotPlaced(String),
    #[error(
        "dispatch p={p} q={q} exceeds apparent-power capability {s_max} (p^2+q^2 = {lhs:.3} > {rhs:.3})"
    )]
    ApparentPowerExceeded {
        p: f64,
        q: f64,
        s_max: f64,
        lhs: f64,
        rhs: f64,
    },
    #[error("dispatch |p|={0} exceeds p_max {1}")]
    ActivePowerExceeded(f64, f64),
    #[error("dispatch |q|={0} exceeds q_max {1}")]
    ReactivePowerExceeded(f64, f64),
    #[error("non-finite value in action payload")]
    NonFinitePayload,
    #[error("battery rating must be positive")]
    NonPositiveRating,
}

/// Undo information for one applied action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UndoRecord {
    SwitchState { switch_id: String, closed: bool },
    LoadGamma { load_id: String, gamma: f64 },
    BatteryAdded { battery_id: String },
    BatteryDispatch {
        battery_id: String,
        p_mw: f64,
        q_mvar: f64,
    },
}

/// Deterministic id for a battery placed at `bus_id` by an `AddBattery`
/// action.
pub fn battery_id_for_bus(bus_id: &str) -> String {
    format!("bat_{bus_id}")
}

/// Check an action against the network without mutating anything.
pub fn validate_action(net: &Network, action: &Action) -> Result<(), ActionError> {
    let finite = |values: &[f64]| values.iter().all(|v| v.is_finite());
    match action {
        Action::SetSwitch { switch_id, closed: _ } => {
            if !net.switches.contains_key(switch_id) {
                return Err(ActionError::UnknownElement {
                    kind: "switch",
                    id: switch_id.clone(),
                });
            }
            Ok(())
        }
        Action::CurtailLoad { load_id, gamma } => {
            if !finite(&[*gamma]) {
                return Err(ActionError::NonFinitePayload);
            }
            let load = net.loads.get(load_id).ok_or_else(|| ActionError::UnknownElement {
                kind: "load",
                id: load_id.clone(),
            })?;
            if !(0.0..=1.0).contains(gamma) {
                return Err(ActionError::GammaOutOfRange(*gamma));
            }
            if !load.curtailable {
                return Err(ActionError::NotCurtailable(load_id.clone()));
            }
            if *gamma > load.gamma_max + 1e-12 {
                return Err(ActionError::GammaExceedsMax {
                    load_id: load_id.clone(),
                    gamma: *gamma,
                    gamma_max: load.gamma_max,
                });
            }
            Ok(())
        }
        Action::AddBattery {
            bus_id,
            s_max_mva,
            p_max_mw,
            q_max_mvar,
        } => {
            if !finite(&[*s_max_mva, *p_max_mw, *q_max_mvar]) {
                return Err(ActionError::NonFinitePayload);
            }
            if !net.buses.contains_key(bus_id) {
                return Err(ActionError::UnknownElement {
                    kind: "bus",
                    id: bus_id.clone(),
                });
            }
            if *s_max_mva <= 0.0 || *p_max_mw <= 0.0 || *q_max_mvar <= 0.0 {
                return Err(ActionError::NonPositiveRating);
            }
            let placed = net.placed_battery_count();
            if placed >= net.battery_budget {
                return Err(ActionError::BudgetExceeded {
                    placed,
                    budget: net.battery_budget,
                });
            }
            if net.battery_at_bus(bus_id).map(|b| b.placed).unwrap_or(false) {
                return Err(ActionError::BatteryAlreadyPlaced(bus_id.clone()));
            }
            Ok(())
        }
        Action::DispatchBattery {
            battery_id,
            p_mw,
            q_mvar,
        } => {
            if !finite(&[*p_mw, *q_mvar]) {
                return Err(ActionError::NonFinitePayload);
            }
            let battery =
                net.batteries
                    .get(battery_id)
                    .ok_or_else(|| ActionError::UnknownElement {
                        kind: "battery",
                        id: battery_id.clone(),
                    })?;
            if !battery.placed {
                return Err(ActionError::NotPlaced(battery_id.clone()));
            }
            let lhs = p_mw * p_mw + q_mvar * q_mvar;
            let rhs = battery.s_max_mva * battery.s_max_mva;
            if lhs > rhs + 1e-9 {
                return Err(ActionError::ApparentPowerExceeded {
                    p: *p_mw,
                    q: *q_mvar,
                    s_max: battery.s_max_mva,
                    lhs,
                    rhs,
                });
            }
            if p_mw.abs() > battery.p_max_mw + 1e-9 {
                return Err(ActionError::ActivePowerExceeded(p_mw.abs(), battery.p_max_mw));
            }
            if q_mvar.abs() > battery.q_max_mvar + 1e-9 {
                return Err(ActionError::ReactivePowerExceeded(
                    q_mvar.abs(),
                    battery.q_max_mvar,
                ));
            }
            Ok(())
        }
    }
}

/// Apply a validated action, returning the undo record. Fails without
/// mutating if validation does not hold.
pub fn apply_action(net: &mut Network, action: &Action) -> Result<UndoRecord, ActionError> {
    validate_action(net, action)?;
    Ok(match action {
        Action::SetSwitch { switch_id, closed } => {
            let switch = net.switches.get_mut(switch_id).expect("validated");
            let prior = switch.closed;
            switch.closed = *closed;
            UndoRecord::SwitchState {
                switch_id: switch_id.clone(),
                closed: prior,
            }
        }
        Action::CurtailLoad { load_id, gamma } => {
            let load = net.loads.get_mut(load_id).expect("validated");
            let prior = load.gamma;
            load.gamma = *gamma;
            UndoRecord::LoadGamma {
                load_id: load_id.clone(),
                gamma: prior,
            }
        }
        Action::AddBattery {
            bus_id,
            s_max_mva,
            p_max_mw,
            q_max_mvar,
        } => {
            let battery_id = battery_id_for_bus(bus_id);
            net.batteries.insert(
                battery_id.clone(),
                Battery {
                    id: battery_id.clone(),
                    bus_id: bus_id.clone(),
                    placed: true,
                    p_mw: 0.0,
                    q_mvar: 0.0,
                    s_max_mva: *s_max_mva,
                    p_max_mw: *p_max_mw,
                    q_max_mvar: *q_max_mvar,
                },
            );
            UndoRecord::BatteryAdded { battery_id }
        }
        Action::DispatchBattery {
            battery_id,
            p_mw,
            q_mvar,
        } => {
            let battery = net.batteries.get_mut(battery_id).expect("validated");
            let prior = (battery.p_mw, battery.q_mvar);
            battery.p_mw = *p_mw;
            battery.q_mvar = *q_mvar;
            UndoRecord::BatteryDispatch {
                battery_id: battery_id.clone(),
                p_mw: prior.0,
                q_mvar: prior.1,
            }
        }
    })
}

/// Reverse one applied action.
pub fn undo_action(net: &mut Network, record: &UndoRecord) {
    match record {
        UndoRecord::SwitchState { switch_id, closed } => {
            if let Some(switch) = net.switches.get_mut(switch_id) {
                switch.closed = *closed;
            }
        }
        UndoRecord::LoadGamma { load_id, gamma } => {
            if let Some(load) = net.loads.get_mut(load_id) {
                load.gamma = *gamma;
            }
        }
        UndoRecord::BatteryAdded { battery_id } => {
            net.batteries.shift_remove(battery_id);
        }
        UndoRecord::BatteryDispatch {
            battery_id,
            p_mw,
            q_mvar,
        } => {
            if let Some(battery) = net.batteries.get_mut(battery_id) {
                battery.p_mw = *p_mw;
                battery.q_mvar = *q_mvar;
            }
        }
    }
}

/// Pop and reverse a whole undo stack (records in reverse application
/// order, i.e. the first record undoes the last applied action).
pub fn undo_all(net: &mut Network, records: &[UndoRecord]) {
    for record in records {
        undo_action(net, record);
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("plan aborted at action {index}: {diagnostic}")]
pub struct PlanAborted {
    pub index: usize,
    pub diagnostic: ActionError,
    /// Undo records for the actions that were applied before the abort,
    /// reverse application order. The caller decides whether to unwind.
    pub applied: Vec<UndoRecord>,
}

/// Apply an ordered action list. Stops at the first invalid action without
/// undoing anything; on success returns the undo stack in reverse
/// application order, so [`undo_all`] restores the pre-plan network exactly.
pub fn apply_plan(net: &mut Network, actions: &[Action]) -> Result<Vec<UndoRecord>, PlanAborted> {
    let mut undo_stack: Vec<UndoRecord> = Vec::with_capacity(actions.len());
    for (index, action) in actions.iter().enumerate() {
        match apply_action(net, action) {
            Ok(record) => undo_stack.insert(0, record),
            Err(diagnostic) => {
                return Err(PlanAborted {
                    index,
                    diagnostic,
                    applied: undo_stack,
                });
            }
        }
    }
    Ok(undo_stack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caseio;

    fn test_net() -> Network {
        caseio::builtin_network("cigre_mv").expect("builtin")
    }

    fn first_curtailable(net: &Network) -> String {
        net.loads
            .values()
            .find(|l| l.curtailable)
            .map(|l| l.id.clone())
            .expect("cigre_mv has curtailable loads")
    }

    #[test]
    fn curtail_within_gamma_max_is_ok() {
        let net = test_net();
        let load_id = first_curtailable(&net);
        let action = Action::CurtailLoad { load_id, gamma: 0.2 };
        assert!(validate_action(&net, &action).is_ok());
    }

    #[test]
    fn curtail_beyond_gamma_max_rejected() {
        let net = test_net();
        let load_id = first_curtailable(&net);
        let gamma_max = net.loads[&load_id].gamma_max;
        let action = Action::CurtailLoad {
            load_id,
            gamma: gamma_max + 0.1,
        };
        assert!(matches!(
            validate_action(&net, &action),
            Err(ActionError::GammaExceedsMax { .. })
        ));
    }

    #[test]
    fn add_battery_respects_budget() {
        let mut net = test_net();
        let buses: Vec<String> = net.buses.keys().take(3).cloned().collect();
        let add = |bus: &String| Action::AddBattery {
            bus_id: bus.clone(),
            s_max_mva: 5.0,
            p_max_mw: 5.0,
            q_max_mvar: 5.0,
        };
        let budget = net.battery_budget as usize;
        assert!(budget < buses.len());
        for bus in buses.iter().take(budget) {
            apply_action(&mut net, &add(bus)).unwrap();
        }
        let err = validate_action(&net, &add(&buses[budget])).unwrap_err();
        assert!(matches!(err, ActionError::BudgetExceeded { .. }));
    }

    #[test]
    fn dispatch_outside_capability_circle_rejected() {
        let mut net = test_net();
        let bus = net.buses.keys().next().unwrap().clone();
        apply_action(
            &mut net,
            &Action::AddBattery {
                bus_id: bus.clone(),
                s_max_mva: 5.0,
                p_max_mw: 5.0,
                q_max_mvar: 5.0,
            },
        )
        .unwrap();
        let err = validate_action(
            &net,
            &Action::DispatchBattery {
                battery_id: battery_id_for_bus(&bus),
                p_mw: 4.0,
                q_mvar: 4.0,
            },
        )
        .unwrap_err();
        match err {
            ActionError::ApparentPowerExceeded { lhs, rhs, .. } => {
                assert!((lhs - 32.0).abs() < 1e-12);
                assert!((rhs - 25.0).abs() < 1e-12);
            }
            other => panic!("expected ApparentPowerExceeded, got {other:?}"),
        }
    }

    #[test]
    fn curtail_scales_effective_demand() {
        let mut net = test_net();
        let load_id = first_curtailable(&net);
        let p_before = net.loads[&load_id].p_mw;
        apply_action(
            &mut net,
            &Action::CurtailLoad {
                load_id: load_id.clone(),
                gamma: 0.2,
            },
        )
        .unwrap();
        let load = &net.loads[&load_id];
        assert!((load.effective_p_mw() - p_before * 0.8).abs() < 1e-12);
    }

    #[test]
    fn apply_then_undo_restores_bit_identical_network() {
        let mut net = test_net();
        let before = net.canonical_json();
        let load_id = first_curtailable(&net);
        let bus = net.buses.keys().next().unwrap().clone();
        let switch = net.switches.keys().next().unwrap().clone();
        let closed = net.switches[&switch].closed;
        let actions = vec![
            Action::SetSwitch {
                switch_id: switch,
                closed: !closed,
            },
            Action::CurtailLoad { load_id, gamma: 0.3 },
            Action::AddBattery {
                bus_id: bus.clone(),
                s_max_mva: 5.0,
                p_max_mw: 5.0,
                q_max_mvar: 5.0,
            },
            Action::DispatchBattery {
                battery_id: battery_id_for_bus(&bus),
                p_mw: 1.0,
                q_mvar: 2.0,
            },
        ];
        let undo = apply_plan(&mut net, &actions).unwrap();
        assert_ne!(net.canonical_json(), before);
        undo_all(&mut net, &undo);
        assert_eq!(net.canonical_json(), before);
    }

    #[test]
    fn aborted_plan_keeps_prior_actions_applied() {
        let mut net = test_net();
        let load_id = first_curtailable(&net);
        let actions = vec![
            Action::CurtailLoad {
                load_id: load_id.clone(),
                gamma: 0.3,
            },
            Action::CurtailLoad {
                load_id: "no_such_load".to_string(),
                gamma: 0.1,
            },
        ];
        let err = apply_plan(&mut net, &actions).unwrap_err();
        assert_eq!(err.index, 1);
        assert_eq!(err.applied.len(), 1);
        assert!((net.loads[&load_id].gamma - 0.3).abs() < 1e-12);
        undo_all(&mut net, &err.applied);
        assert_eq!(net.loads[&load_id].gamma, 0.0);
    }

    #[test]
    fn empty_plan_is_a_no_op() {
        let mut net = test_net();
        let before = net.canonical_json();
        let undo = apply_plan(&mut net, &[]).unwrap();
        assert!(undo.is_empty());
        assert_eq!(net.canonical_json(), before);
    }
}
