//! Named scenario presets over the built-in benchmarks, plus a small
//! crafted tie-switch feeder for end-to-end demonstrations.

use super::scenario::{generate_scenario, GeneratorConfig, Perturbation, Scenario, ScenarioTarget};
use super::HarnessError;
use crate::caseio::builtin_network;
use crate::model::*;
use crate::violations::ViolationKind;

/// Five-bus radial feeder with one normally open tie switch. At the preset
/// load level the two feeder-end buses sag below the voltage band and a
/// single tie closure clears both; curtailment alone cannot.
pub fn tie_feeder_network() -> Network {
    let mut net = Network::new(10.0);
    let bus = |id: &str, kind: BusKind| Bus {
        id: id.to_string(),
        name: id.to_string(),
        nominal_kv: 12.66,
        kind,
        v_min_pu: 0.95,
        v_max_pu: 1.05,
        in_service: true,
    };
    net.buses.insert("b1".into(), bus("b1", BusKind::Slack));
    for id in ["b2", "b3", "b4", "b5"] {
        net.buses.insert(id.into(), bus(id, BusKind::Pq));
    }
    let line = |id: &str, from: &str, to: &str, r: f64, x: f64, switchable: bool| Branch {
        id: id.to_string(),
        from_bus: from.to_string(),
        to_bus: to.to_string(),
        r_ohm: r,
        x_ohm: x,
        b_shunt_siemens: 0.0,
        s_max_mva: 8.0,
        i_max_ka: 8.0 / (3f64.sqrt() * 12.66),
        in_service: true,
        switchable,
    };
    net.branches.insert("l12".into(), line("l12", "b1", "b2", 0.3, 0.5, false));
    net.branches.insert("l23".into(), line("l23", "b2", "b3", 1.5, 2.2, false));
    net.branches.insert("l34".into(), line("l34", "b3", "b4", 1.5, 2.2, false));
    net.branches.insert("l45".into(), line("l45", "b4", "b5", 1.2, 1.8, false));
    net.branches.insert("ltie".into(), line("ltie", "b1", "b5", 0.4, 0.7, true));
    net.switches.insert(
        "sw_tie".into(),
        Switch {
            id: "sw_tie".into(),
            branch_id: "ltie".into(),
            closed: false,
        },
    );
    let load = |id: &str, bus: &str, p: f64, q: f64, curtailable: bool| Load {
        id: id.to_string(),
        bus_id: bus.to_string(),
        p_mw: p,
        q_mvar: q,
        curtailable,
        gamma: 0.0,
        gamma_max: if curtailable { 0.5 } else { 0.0 },
    };
    net.loads.insert("d3".into(), load("d3", "b3", 1.2, 0.4, false));
    net.loads.insert("d4".into(), load("d4", "b4", 1.5, 0.5, false));
    net.loads.insert("d5".into(), load("d5", "b5", 1.8, 0.6, true));
    net.generators.insert(
        "source".into(),
        Generator {
            id: "source".into(),
            bus_id: "b1".into(),
            p_mw: 0.0,
            v_set_pu: 1.0,
            q_min_mvar: -999.0,
            q_max_mvar: 999.0,
        },
    );
    net.battery_budget = 1;
    net.validate().expect("tie feeder network is valid");
    net
}

/// Resolve a scenario base name: the three builtins plus `tie_feeder`.
pub fn base_network(name: &str) -> Result<Network, HarnessError> {
    match name {
        "tie_feeder" => Ok(tie_feeder_network()),
        other => builtin_network(other).map_err(|_| HarnessError::UnknownBase(other.to_string())),
    }
}

pub fn preset_names() -> Vec<&'static str> {
    vec![
        "tie_switch_feeder",
        "case30_light",
        "case30_medium",
        "cigre_mv_severe",
        "cigre_mv_disconnected",
        "ieee69_large_loads",
        "ieee69_medium_loads",
        "ieee69_disconnected",
    ]
}

struct PresetSpec {
    base: &'static str,
    count: usize,
    kinds: &'static [ViolationKind],
    seed: u64,
    max_scale: f64,
}

fn preset_spec(name: &str) -> Option<PresetSpec> {
    use ViolationKind::*;
    let spec = match name {
        "case30_light" => PresetSpec {
            base: "ieee30",
            count: 5,
            kinds: &[Undervoltage, Thermal],
            seed: 30,
            max_scale: 2.0,
        },
        "case30_medium" => PresetSpec {
            base: "ieee30",
            count: 2,
            kinds: &[Thermal],
            seed: 31,
            max_scale: 1.6,
        },
        "cigre_mv_severe" => PresetSpec {
            base: "cigre_mv",
            count: 14,
            kinds: &[Undervoltage, Thermal],
            seed: 14,
            max_scale: 3.0,
        },
        "cigre_mv_disconnected" => PresetSpec {
            base: "cigre_mv",
            count: 5,
            kinds: &[Disconnected],
            seed: 5,
            max_scale: 1.2,
        },
        "ieee69_large_loads" => PresetSpec {
            base: "ieee69",
            count: 18,
            kinds: &[Undervoltage],
            seed: 18,
            max_scale: 3.0,
        },
        "ieee69_medium_loads" => PresetSpec {
            base: "ieee69",
            count: 29,
            kinds: &[Undervoltage, Thermal],
            seed: 29,
            max_scale: 3.0,
        },
        "ieee69_disconnected" => PresetSpec {
            base: "ieee69",
            count: 13,
            kinds: &[Disconnected],
            seed: 13,
            max_scale: 1.2,
        },
        _ => return None,
    };
    Some(spec)
}

/// Build a named preset scenario. Generated presets are seeded, so equal
/// names always produce identical scenarios.
pub fn build_preset(name: &str) -> Result<Scenario, HarnessError> {
    if name == "tie_switch_feeder" {
        let base = tie_feeder_network();
        let scenario = Scenario {
            name: name.to_string(),
            base: "tie_feeder".to_string(),
            perturbations: vec![Perturbation::ScaleLoad { factor: 1.3 }],
            expected_violation_profile: None,
        };
        // Record the achieved profile like generated presets do.
        let net = super::scenario::apply_scenario(&base, &scenario)?;
        let sol = crate::powerflow::solve(&net, &crate::powerflow::SolverOptions::default())
            .map_err(|e| HarnessError::Internal(e.to_string()))?;
        let report = crate::violations::analyze(&net, &sol)
            .map_err(|e| HarnessError::Internal(e.to_string()))?;
        return Ok(Scenario {
            expected_violation_profile: Some(super::scenario::ViolationProfile::of(&report)),
            ..scenario
        });
    }
    let spec = preset_spec(name).ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))?;
    let base = base_network(spec.base)?;
    let config = GeneratorConfig {
        max_scale: spec.max_scale,
        ..GeneratorConfig::default()
    };
    generate_scenario(
        &base,
        spec.base,
        name,
        &ScenarioTarget {
            count: spec.count,
            kinds: spec.kinds.to_vec(),
        },
        spec.seed,
        &config,
    )
}
