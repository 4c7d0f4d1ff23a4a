//! Detection and scoring of operating-limit violations from a power-flow
//! solution: voltage band breaches, branch thermal overloads and
//! de-energized (disconnected) buses.

use crate::model::Network;
use crate::powerflow::PowerFlowSolution;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("solution is stale: network changed since the solve (digest {solution} != {network})")]
    StaleSolution { solution: String, network: String },
    #[error("power flow did not converge; no violation report can be produced")]
    DivergedAnalysis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Undervoltage,
    Overvoltage,
    Thermal,
    Disconnected,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ViolationKind::Undervoltage => "undervoltage",
            ViolationKind::Overvoltage => "overvoltage",
            ViolationKind::Thermal => "thermal",
            ViolationKind::Disconnected => "disconnected",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Bus id for voltage/disconnection violations, branch id for thermal.
    pub element: String,
    /// Observed quantity: pu voltage or loading fraction; absent for
    /// disconnections.
    pub observed: Option<f64>,
    pub limit: Option<f64>,
    /// Magnitude of the breach: pu deficit/excess, loading excess fraction,
    /// or 1.0 for a disconnection. Always > 0.
    pub severity: f64,
}

impl Violation {
    pub fn key(&self) -> (ViolationKind, String) {
        (self.kind, self.element.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
    pub counts: BTreeMap<ViolationKind, usize>,
    pub total_severity: f64,
    /// Order-independent hash of the (kind, element) pairs.
    pub fingerprint: String,
}

impl ViolationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        let mut counts = BTreeMap::new();
        let mut total_severity = 0.0;
        for v in &violations {
            *counts.entry(v.kind).or_insert(0) += 1;
            total_severity += v.severity;
        }
        let mut keys: Vec<String> = violations
            .iter()
            .map(|v| format!("{}:{}", v.kind, v.element))
            .collect();
        keys.sort();
        let fingerprint = crate::digest_str(&keys.join("\n"));
        ViolationReport {
            violations,
            counts,
            total_severity,
            fingerprint,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count_of(&self, kind: ViolationKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    /// One-line inventory such as `"3 violations (2 undervoltage, 1 thermal)"`.
    pub fn inventory(&self) -> String {
        if self.is_empty() {
            return "no violations".to_string();
        }
        let parts: Vec<String> = self
            .counts
            .iter()
            .map(|(kind, n)| format!("{n} {kind}"))
            .collect();
        format!("{} violations ({})", self.len(), parts.join(", "))
    }
}

/// Scan a solution for all limit breaches. Requires the solution to match
/// the network's current state and to have converged.
pub fn analyze(net: &Network, sol: &PowerFlowSolution) -> Result<ViolationReport, AnalysisError> {
    let digest = net.digest();
    if digest != sol.network_digest {
        return Err(AnalysisError::StaleSolution {
            solution: sol.network_digest.clone(),
            network: digest,
        });
    }
    if !sol.converged {
        return Err(AnalysisError::DivergedAnalysis);
    }

    let mut violations = Vec::new();
    for bus in net.buses.values() {
        let Some(voltage) = sol.voltage(&bus.id) else { continue };
        if !voltage.energized {
            violations.push(Violation {
                kind: ViolationKind::Disconnected,
                element: bus.id.clone(),
                observed: None,
                limit: None,
                severity: 1.0,
            });
            continue;
        }
        if voltage.v_pu < bus.v_min_pu {
            violations.push(Violation {
                kind: ViolationKind::Undervoltage,
                element: bus.id.clone(),
                observed: Some(voltage.v_pu),
                limit: Some(bus.v_min_pu),
                severity: bus.v_min_pu - voltage.v_pu,
            });
        } else if voltage.v_pu > bus.v_max_pu {
            violations.push(Violation {
                kind: ViolationKind::Overvoltage,
                element: bus.id.clone(),
                observed: Some(voltage.v_pu),
                limit: Some(bus.v_max_pu),
                severity: voltage.v_pu - bus.v_max_pu,
            });
        }
    }
    for branch in net.branches.values() {
        let Some(flow) = sol.branch_flows.get(&branch.id) else { continue };
        if flow.loading_percent > 100.0 {
            violations.push(Violation {
                kind: ViolationKind::Thermal,
                element: branch.id.clone(),
                observed: Some(flow.loading_percent / 100.0),
                limit: Some(1.0),
                severity: flow.loading_percent / 100.0 - 1.0,
            });
        }
    }
    Ok(ViolationReport::from_violations(violations))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportComparison {
    pub resolved: Vec<Violation>,
    pub persisting: Vec<Violation>,
    pub introduced: Vec<Violation>,
    pub improved: bool,
}

/// Set difference on (kind, element) identity. `improved` is the
/// lexicographic ordering on (violation count, total severity): strictly
/// fewer violations, or equally many with strictly lower total severity.
pub fn compare(before: &ViolationReport, after: &ViolationReport) -> ReportComparison {
    let after_keys: std::collections::BTreeSet<_> =
        after.violations.iter().map(|v| v.key()).collect();
    let before_keys: std::collections::BTreeSet<_> =
        before.violations.iter().map(|v| v.key()).collect();

    let resolved = before
        .violations
        .iter()
        .filter(|v| !after_keys.contains(&v.key()))
        .cloned()
        .collect();
    let persisting = before
        .violations
        .iter()
        .filter(|v| after_keys.contains(&v.key()))
        .cloned()
        .collect();
    let introduced = after
        .violations
        .iter()
        .filter(|v| !before_keys.contains(&v.key()))
        .cloned()
        .collect();

    let improved = after.len() < before.len()
        || (after.len() == before.len()
            && after.total_severity < before.total_severity - 1e-9);

    ReportComparison {
        resolved,
        persisting,
        introduced,
        improved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violation(kind: ViolationKind, element: &str, severity: f64) -> Violation {
        Violation {
            kind,
            element: element.to_string(),
            observed: Some(0.0),
            limit: Some(0.0),
            severity,
        }
    }

    fn report(entries: &[(ViolationKind, &str, f64)]) -> ViolationReport {
        ViolationReport::from_violations(
            entries
                .iter()
                .map(|(k, e, s)| violation(*k, e, *s))
                .collect(),
        )
    }

    #[test]
    fn fingerprint_is_order_independent() {
        use ViolationKind::*;
        let a = report(&[(Undervoltage, "b1", 0.02), (Thermal, "l1", 0.04)]);
        let b = report(&[(Thermal, "l1", 0.05), (Undervoltage, "b1", 0.01)]);
        assert_eq!(a.fingerprint, b.fingerprint);
        let c = report(&[(Thermal, "l2", 0.05)]);
        assert_ne!(a.fingerprint, c.fingerprint);
    }

    #[test]
    fn compare_splits_resolved_and_introduced() {
        use ViolationKind::*;
        let before = report(&[(Undervoltage, "a", 0.02), (Undervoltage, "b", 0.01)]);
        let after = report(&[(Undervoltage, "b", 0.01)]);
        let cmp = compare(&before, &after);
        assert_eq!(cmp.resolved.len(), 1);
        assert_eq!(cmp.resolved[0].element, "a");
        assert!(cmp.introduced.is_empty());
        assert!(cmp.improved);

        let worse = report(&[(Undervoltage, "a", 0.02), (Thermal, "c", 0.1)]);
        let cmp = compare(&before, &worse);
        assert_eq!(cmp.introduced.len(), 1);
        assert_eq!(cmp.introduced[0].element, "c");
        assert!(!cmp.improved);
    }

    #[test]
    fn identical_reports_do_not_improve() {
        use ViolationKind::*;
        let a = report(&[(Overvoltage, "x", 0.03)]);
        let cmp = compare(&a, &a.clone());
        assert!(!cmp.improved);
        assert_eq!(cmp.persisting.len(), 1);
    }

    #[test]
    fn equal_count_lower_severity_improves_one_way_only() {
        use ViolationKind::*;
        let high = report(&[(Undervoltage, "a", 0.05)]);
        let low = report(&[(Undervoltage, "a", 0.02)]);
        assert!(compare(&high, &low).improved);
        assert!(!compare(&low, &high).improved);
    }
}
