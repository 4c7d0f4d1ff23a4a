//! Case file parsing and serialization, plus the built-in benchmark
//! networks.
//!
//! The native format is a UTF-8 JSON document (`.gridcase.json`) with an
//! explicit `schema_version`. A MATPOWER subset parser covers the bus/gen/
//! branch blocks of published `.m` case files so the standard benchmark
//! data can be loaded as distributed.

mod builtin;
mod matpower;

pub use builtin::{builtin_network, BUILTIN_NAMES};
pub use matpower::parse_matpower_subset;

use crate::model::{
    Battery, Branch, Bus, Generator, Load, ModelError, Network, Switch,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("unsupported construct at line {line}: {message}")]
    UnsupportedConstruct { line: usize, message: String },
    #[error("unknown built-in case `{0}`")]
    UnknownCase(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Scenario overlay carried inside a case file: stress applied on top of the
/// base data when the network is built.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverlay {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forced_switches: Vec<ForcedSwitch>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rating_derates: Vec<RatingDerate>,
}

impl ScenarioOverlay {
    pub fn is_empty(&self) -> bool {
        self.load_scale.is_none()
            && self.forced_switches.is_empty()
            && self.rating_derates.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedSwitch {
    pub switch_id: String,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingDerate {
    pub branch_id: String,
    pub factor: f64,
}

/// A parsed and validated case file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseDocument {
    pub schema_version: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub switches: Vec<Switch>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub batteries: Vec<Battery>,
    #[serde(default)]
    pub battery_budget: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioOverlay>,
    /// Parser notes (ignored columns, defaulted fields). Not serialized.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl CaseDocument {
    pub fn empty() -> Self {
        CaseDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            base_mva: 100.0,
            buses: Vec::new(),
            branches: Vec::new(),
            switches: Vec::new(),
            loads: Vec::new(),
            generators: Vec::new(),
            batteries: Vec::new(),
            battery_budget: 0,
            scenario: None,
            warnings: Vec::new(),
        }
    }

    /// Snapshot a live network back into document form (used when saving
    /// runs and training records).
    pub fn from_network(net: &Network) -> Self {
        CaseDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            base_mva: net.base_mva,
            buses: net.buses.values().cloned().collect(),
            branches: net.branches.values().cloned().collect(),
            switches: net.switches.values().cloned().collect(),
            loads: net.loads.values().cloned().collect(),
            generators: net.generators.values().cloned().collect(),
            batteries: net.batteries.values().cloned().collect(),
            battery_budget: net.battery_budget,
            scenario: None,
            warnings: Vec::new(),
        }
    }

    /// Field-level and duplicate-id validation; cross references are checked
    /// later by [`build_network`].
    pub fn check_semantics(&self) -> Result<(), CaseError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CaseError::Schema(format!(
                "unrecognized schema_version `{}` (expected `{SCHEMA_VERSION}`)",
                self.schema_version
            )));
        }
        if !(self.base_mva > 0.0) {
            return Err(CaseError::Semantic("base_mva must be > 0".to_string()));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut dup = |kind: &str, id: &str| -> Result<(), CaseError> {
            if !seen.insert((kind.to_string(), id.to_string())) {
                return Err(CaseError::Semantic(format!("duplicate {kind} id `{id}`")));
            }
            Ok(())
        };
        for b in &self.buses {
            dup("bus", &b.id)?;
            b.check().map_err(semantic)?;
        }
        for b in &self.branches {
            dup("branch", &b.id)?;
            b.check().map_err(semantic)?;
        }
        for s in &self.switches {
            dup("switch", &s.id)?;
        }
        for l in &self.loads {
            dup("load", &l.id)?;
            l.check().map_err(semantic)?;
        }
        for g in &self.generators {
            dup("generator", &g.id)?;
            g.check().map_err(semantic)?;
        }
        for b in &self.batteries {
            dup("battery", &b.id)?;
            b.check().map_err(semantic)?;
        }
        if let Some(overlay) = &self.scenario {
            if let Some(scale) = overlay.load_scale {
                if !(scale.is_finite() && scale >= 0.0) {
                    return Err(CaseError::Semantic(
                        "scenario load_scale must be finite and >= 0".to_string(),
                    ));
                }
            }
            for derate in &overlay.rating_derates {
                if !(derate.factor.is_finite() && derate.factor > 0.0) {
                    return Err(CaseError::Semantic(format!(
                        "scenario derate factor for `{}` must be > 0",
                        derate.branch_id
                    )));
                }
            }
        }
        Ok(())
    }
}

fn semantic(err: ModelError) -> CaseError {
    CaseError::Semantic(err.to_string())
}

/// Parse the native JSON case format with structural and semantic
/// validation.
pub fn parse_case_json(text: &str) -> Result<CaseDocument, CaseError> {
    let doc: CaseDocument = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            CaseError::Syntax {
                line: e.line(),
                message: e.to_string(),
            }
        } else {
            CaseError::Schema(e.to_string())
        }
    })?;
    doc.check_semantics()?;
    Ok(doc)
}

/// Serialize a case document. Output is key-order deterministic and
/// round-trips through [`parse_case_json`]. An empty scenario overlay is
/// dropped.
pub fn serialize_case(doc: &CaseDocument) -> String {
    let mut doc = doc.clone();
    if doc.scenario.as_ref().map(|s| s.is_empty()).unwrap_or(false) {
        doc.scenario = None;
    }
    serde_json::to_string_pretty(&doc).expect("case serialization cannot fail")
}

/// Build a cross-linked [`Network`] from a validated document, applying the
/// scenario overlay if one is present.
pub fn build_network(doc: &CaseDocument) -> Result<Network, CaseError> {
    doc.check_semantics()?;
    let mut net = Network::new(doc.base_mva);
    for bus in &doc.buses {
        net.buses.insert(bus.id.clone(), bus.clone());
    }
    for branch in &doc.branches {
        net.branches.insert(branch.id.clone(), branch.clone());
    }
    for switch in &doc.switches {
        net.switches.insert(switch.id.clone(), switch.clone());
    }
    for load in &doc.loads {
        net.loads.insert(load.id.clone(), load.clone());
    }
    for gen in &doc.generators {
        net.generators.insert(gen.id.clone(), gen.clone());
    }
    for battery in &doc.batteries {
        net.batteries.insert(battery.id.clone(), battery.clone());
    }
    net.battery_budget = doc.battery_budget;

    if let Some(overlay) = &doc.scenario {
        if let Some(scale) = overlay.load_scale {
            for load in net.loads.values_mut() {
                load.p_mw *= scale;
                load.q_mvar *= scale;
            }
        }
        for forced in &overlay.forced_switches {
            let switch = net.switches.get_mut(&forced.switch_id).ok_or_else(|| {
                ModelError::DanglingReference {
                    kind: "scenario overlay",
                    id: "forced_switches".to_string(),
                    target_kind: "switch",
                    target: forced.switch_id.clone(),
                }
            })?;
            switch.closed = forced.closed;
        }
        for derate in &overlay.rating_derates {
            let branch = net.branches.get_mut(&derate.branch_id).ok_or_else(|| {
                ModelError::DanglingReference {
                    kind: "scenario overlay",
                    id: "rating_derates".to_string(),
                    target_kind: "branch",
                    target: derate.branch_id.clone(),
                }
            })?;
            branch.s_max_mva *= derate.factor;
            branch.i_max_ka *= derate.factor;
        }
    }

    net.validate()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": "1",
        "base_mva": 100.0,
        "buses": [
            {"id": "b1", "nominal_kv": 10.0, "kind": "slack", "v_min_pu": 0.95, "v_max_pu": 1.05},
            {"id": "b2", "nominal_kv": 10.0, "kind": "pq", "v_min_pu": 0.95, "v_max_pu": 1.05}
        ],
        "branches": [
            {"id": "l1", "from_bus": "b1", "to_bus": "b2", "r_ohm": 0.1, "x_ohm": 0.4,
             "s_max_mva": 10.0, "i_max_ka": 0.6}
        ]
    }"#;

    #[test]
    fn minimal_two_bus_document_parses() {
        let doc = parse_case_json(MINIMAL).unwrap();
        assert_eq!(doc.buses.len(), 2);
        let net = build_network(&doc).unwrap();
        assert_eq!(net.buses.len(), 2);
        assert_eq!(net.slack_bus().unwrap().id, "b1");
    }

    #[test]
    fn missing_base_mva_is_a_schema_error_naming_the_field() {
        let text = MINIMAL.replace("\"base_mva\": 100.0,", "");
        match parse_case_json(&text) {
            Err(CaseError::Schema(msg)) => assert!(msg.contains("base_mva"), "{msg}"),
            other => panic!("expected Schema error, got {other:?}"),
        }
    }

    #[test]
    fn inverted_voltage_band_is_a_semantic_error() {
        let text = MINIMAL.replace(
            "\"v_min_pu\": 0.95, \"v_max_pu\": 1.05},",
            "\"v_min_pu\": 1.05, \"v_max_pu\": 0.95},",
        );
        assert!(matches!(parse_case_json(&text), Err(CaseError::Semantic(_))));
    }

    #[test]
    fn branch_to_unknown_bus_fails_at_build() {
        let text = MINIMAL.replace("\"to_bus\": \"b2\"", "\"to_bus\": \"nowhere\"");
        let doc = parse_case_json(&text).unwrap();
        match build_network(&doc) {
            Err(CaseError::Model(ModelError::DanglingReference { .. })) => {}
            other => panic!("expected DanglingReference, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_semantic_errors() {
        let text = MINIMAL.replace(
            "{\"id\": \"b2\", \"nominal_kv\": 10.0, \"kind\": \"pq\"",
            "{\"id\": \"b1\", \"nominal_kv\": 10.0, \"kind\": \"pq\"",
        );
        assert!(matches!(parse_case_json(&text), Err(CaseError::Semantic(_))));
    }

    #[test]
    fn garbage_is_a_syntax_error_with_line() {
        match parse_case_json("{\n  \"schema_version\": \"1\",\n  !!!") {
            Err(CaseError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected Syntax error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_identity_for_builtins() {
        for name in BUILTIN_NAMES {
            let net = builtin_network(name).unwrap();
            let doc = CaseDocument::from_network(&net);
            let text = serialize_case(&doc);
            let reparsed = parse_case_json(&text).unwrap();
            assert_eq!(serialize_case(&reparsed), text, "round trip failed for {name}");
            let rebuilt = build_network(&reparsed).unwrap();
            assert_eq!(rebuilt.canonical_json(), net.canonical_json());
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let doc = parse_case_json(MINIMAL).unwrap();
        assert_eq!(serialize_case(&doc), serialize_case(&doc.clone()));
    }

    #[test]
    fn empty_scenario_overlay_is_omitted() {
        let mut doc = parse_case_json(MINIMAL).unwrap();
        doc.scenario = Some(ScenarioOverlay::default());
        let text = serialize_case(&doc);
        assert!(!text.contains("scenario"));
    }

    #[test]
    fn overlay_applies_scale_and_derate() {
        let mut doc = parse_case_json(MINIMAL).unwrap();
        doc.loads.push(Load {
            id: "d1".into(),
            bus_id: "b2".into(),
            p_mw: 4.0,
            q_mvar: 1.0,
            curtailable: false,
            gamma: 0.0,
            gamma_max: 0.0,
        });
        doc.scenario = Some(ScenarioOverlay {
            load_scale: Some(1.5),
            forced_switches: vec![],
            rating_derates: vec![RatingDerate {
                branch_id: "l1".into(),
                factor: 0.5,
            }],
        });
        let net = build_network(&doc).unwrap();
        assert!((net.loads["d1"].p_mw - 6.0).abs() < 1e-12);
        assert!((net.branches["l1"].s_max_mva - 5.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_builtin_is_rejected() {
        assert!(matches!(
            builtin_network("ieee118"),
            Err(CaseError::UnknownCase(_))
        ));
    }
}
