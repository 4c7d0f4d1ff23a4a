//! The three built-in benchmark networks.
//!
//! Each is vendored from published case data and then fitted with the
//! controllable elements the action space operates on (tie/sectionalizing
//! switches, curtailable loads, a battery budget). All three base cases
//! solve violation free; stress comes from scenarios, not the base data.

use super::{build_network, parse_case_json, parse_matpower_subset, CaseDocument, CaseError};
use crate::model::{Network, Switch};

pub const BUILTIN_NAMES: [&str; 3] = ["ieee30", "cigre_mv", "ieee69"];

const CASE30_M: &str = include_str!("data/case30.m");
const CASE69_M: &str = include_str!("data/case69.m");
const CIGRE_MV_JSON: &str = include_str!("data/cigre_mv.gridcase.json");

/// Raw document for a built-in case (before controllable-element fitting).
pub fn builtin_case_text(name: &str) -> Option<&'static str> {
    match name {
        "ieee30" => Some(CASE30_M),
        "cigre_mv" => Some(CIGRE_MV_JSON),
        "ieee69" => Some(CASE69_M),
        _ => None,
    }
}

fn make_switchable(doc: &mut CaseDocument, switch_id: &str, branch_id: &str, closed: bool) {
    for branch in &mut doc.branches {
        if branch.id == branch_id {
            branch.switchable = true;
        }
    }
    doc.switches.push(Switch {
        id: switch_id.to_string(),
        branch_id: branch_id.to_string(),
        closed,
    });
}

fn make_curtailable(doc: &mut CaseDocument, load_id: &str, gamma_max: f64) {
    for load in &mut doc.loads {
        if load.id == load_id {
            load.curtailable = true;
            load.gamma_max = gamma_max;
        }
    }
}

/// 30-bus transmission case: 30 buses, 41 branches, 20 loads, 132/33 kV.
///
/// Controllables (3): one switchable loop branch, one curtailable load and a
/// battery budget of one. The two fixed shunt capacitors are merged into the
/// loads at their buses so the load count matches the published 20.
fn ieee30() -> Result<CaseDocument, CaseError> {
    let mut doc = parse_matpower_subset(CASE30_M)?;
    // Fold the two shunt capacitors (buses 10 and 24) into the demand
    // records at the same buses; both buses carry ordinary load.
    let shunts: Vec<_> = doc
        .loads
        .iter()
        .filter(|l| l.id.starts_with("shunt_"))
        .cloned()
        .collect();
    for shunt in &shunts {
        let load = doc
            .loads
            .iter_mut()
            .find(|l| l.bus_id == shunt.bus_id && !l.id.starts_with("shunt_"))
            .expect("case30 shunt buses also carry load");
        load.p_mw += shunt.p_mw;
        load.q_mvar += shunt.q_mvar;
    }
    doc.loads.retain(|l| !l.id.starts_with("shunt_"));
    make_switchable(&mut doc, "sw30_1", "line_10_22", true);
    make_curtailable(&mut doc, "load_8", 0.5);
    doc.battery_budget = 1;
    Ok(doc)
}

/// CIGRE MV European distribution benchmark: 14 buses, 15 lines, 11 loads,
/// 20 kV. The upstream HV grid and both substation transformers are folded
/// into a slack source at bus 1 and a PV infeed at bus 12.
///
/// Controllables (9): tie switches S1/S2/S3, four curtailable loads and a
/// battery budget of two.
fn cigre_mv() -> Result<CaseDocument, CaseError> {
    parse_case_json(CIGRE_MV_JSON)
}

/// 69-bus radial distribution feeder: 69 buses, 68 branches, 59 loads,
/// 12.66 kV.
///
/// Controllables (8): three sectionalizing switches, three curtailable
/// loads (the largest demands) and a battery budget of two.
fn ieee69() -> Result<CaseDocument, CaseError> {
    let mut doc = parse_matpower_subset(CASE69_M)?;
    make_switchable(&mut doc, "sw69_1", "line_9_53", true);
    make_switchable(&mut doc, "sw69_2", "line_4_47", true);
    make_switchable(&mut doc, "sw69_3", "line_11_66", true);
    make_curtailable(&mut doc, "load_61", 0.5);
    make_curtailable(&mut doc, "load_48", 0.5);
    make_curtailable(&mut doc, "load_49", 0.5);
    doc.battery_budget = 2;
    Ok(doc)
}

pub fn builtin_document(name: &str) -> Result<CaseDocument, CaseError> {
    match name {
        "ieee30" => ieee30(),
        "cigre_mv" => cigre_mv(),
        "ieee69" => ieee69(),
        other => Err(CaseError::UnknownCase(other.to_string())),
    }
}

/// Load a built-in benchmark network by name: `ieee30`, `cigre_mv` or
/// `ieee69`.
pub fn builtin_network(name: &str) -> Result<Network, CaseError> {
    build_network(&builtin_document(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ieee30_counts_match_published_spec() {
        let net = builtin_network("ieee30").unwrap();
        assert_eq!(net.buses.len(), 30);
        assert_eq!(net.branches.len(), 41);
        assert_eq!(net.loads.len(), 20);
        let controllables = net.switches.len()
            + net.loads.values().filter(|l| l.curtailable).count()
            + net.battery_budget as usize;
        assert_eq!(controllables, 3);
        let kvs: std::collections::BTreeSet<i64> = net
            .buses
            .values()
            .map(|b| b.nominal_kv.round() as i64)
            .collect();
        assert_eq!(kvs, [33, 132].into_iter().collect());
    }

    #[test]
    fn cigre_mv_counts_match_published_spec() {
        let net = builtin_network("cigre_mv").unwrap();
        assert_eq!(net.buses.len(), 14);
        assert_eq!(net.branches.len(), 15);
        assert_eq!(net.loads.len(), 11);
        let controllables = net.switches.len()
            + net.loads.values().filter(|l| l.curtailable).count()
            + net.battery_budget as usize;
        assert_eq!(controllables, 9);
        assert!(net.buses.values().all(|b| (b.nominal_kv - 20.0).abs() < 1e-9));
    }

    #[test]
    fn ieee69_counts_match_published_spec() {
        let net = builtin_network("ieee69").unwrap();
        assert_eq!(net.buses.len(), 69);
        assert_eq!(net.branches.len(), 68);
        assert_eq!(net.loads.len(), 59);
        let controllables = net.switches.len()
            + net.loads.values().filter(|l| l.curtailable).count()
            + net.battery_budget as usize;
        assert_eq!(controllables, 8);
        assert!(net.buses.values().all(|b| (b.nominal_kv - 12.66).abs() < 1e-9));
    }
}
