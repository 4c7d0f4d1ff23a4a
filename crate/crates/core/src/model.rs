//! Grid data model: buses, branches, switches, loads, generators and
//! batteries, tied together in a [`Network`] value.
//!
//! Impedances are stored in physical ohms and converted to per-unit at
//! admittance-build time (see [`crate::admittance`]), using the owning
//! network's `base_mva` and the branch from-bus `nominal_kv`. A `Network`
//! is a plain value: cloning it yields a fully independent copy, which is
//! what the sandboxed workflow relies on.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{kind} `{id}` references unknown {target_kind} `{target}`")]
    DanglingReference {
        kind: &'static str,
        id: String,
        target_kind: &'static str,
        target: String,
    },
    #[error("network has more than one slack bus (`{0}` and `{1}`)")]
    MultipleSlack(String, String),
    #[error("network has no slack bus")]
    NoSlack,
    #[error("unknown bus `{0}`")]
    UnknownBus(String),
    #[error("unknown branch `{0}`")]
    UnknownBranch(String),
    #[error("branch `{0}` has zero series impedance (r = x = 0)")]
    ZeroImpedanceBranch(String),
    #[error("switch `{id}` attached to non-switchable branch `{branch}`")]
    SwitchOnFixedBranch { id: String, branch: String },
    #[error("branch `{branch}` has more than one switch")]
    DuplicateSwitch { branch: String },
    #[error("{kind} `{id}`: {message}")]
    InvalidField {
        kind: &'static str,
        id: String,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

impl std::fmt::Display for BusKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BusKind::Slack => write!(f, "slack"),
            BusKind::Pv => write!(f, "pv"),
            BusKind::Pq => write!(f, "pq"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub nominal_kv: f64,
    pub kind: BusKind,
    pub v_min_pu: f64,
    pub v_max_pu: f64,
    #[serde(default = "default_true")]
    pub in_service: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    pub r_ohm: f64,
    pub x_ohm: f64,
    /// Total line-charging susceptance (pi-model; half is lumped at each end).
    #[serde(default)]
    pub b_shunt_siemens: f64,
    pub s_max_mva: f64,
    pub i_max_ka: f64,
    #[serde(default = "default_true")]
    pub in_service: bool,
    #[serde(default)]
    pub switchable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub id: String,
    pub branch_id: String,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: String,
    pub bus_id: String,
    pub p_mw: f64,
    pub q_mvar: f64,
    #[serde(default)]
    pub curtailable: bool,
    /// Applied curtailment fraction; effective demand is `p_mw * (1 - gamma)`.
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_max: f64,
}

impl Load {
    pub fn effective_p_mw(&self) -> f64 {
        self.p_mw * (1.0 - self.gamma)
    }

    /// Reactive demand is curtailed proportionally with the active demand.
    pub fn effective_q_mvar(&self) -> f64 {
        self.q_mvar * (1.0 - self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub bus_id: String,
    pub p_mw: f64,
    pub v_set_pu: f64,
    pub q_min_mvar: f64,
    pub q_max_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub id: String,
    pub bus_id: String,
    pub placed: bool,
    /// Active dispatch, positive = injection into the grid.
    #[serde(default)]
    pub p_mw: f64,
    #[serde(default)]
    pub q_mvar: f64,
    pub s_max_mva: f64,
    pub p_max_mw: f64,
    pub q_max_mvar: f64,
}

fn default_true() -> bool {
    true
}

impl Bus {
    /// Field-level invariants that do not need the owning network.
    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.nominal_kv > 0.0) {
            return Err(invalid("bus", &self.id, "nominal_kv must be > 0"));
        }
        if !(self.v_min_pu > 0.0 && self.v_min_pu < self.v_max_pu) {
            return Err(invalid("bus", &self.id, "requires 0 < v_min_pu < v_max_pu"));
        }
        Ok(())
    }
}

impl Branch {
    pub fn check(&self) -> Result<(), ModelError> {
        if self.from_bus == self.to_bus {
            return Err(invalid("branch", &self.id, "from_bus equals to_bus"));
        }
        if self.r_ohm < 0.0 || self.x_ohm < 0.0 || self.b_shunt_siemens < 0.0 {
            return Err(invalid("branch", &self.id, "negative impedance or shunt"));
        }
        if self.r_ohm == 0.0 && self.x_ohm == 0.0 {
            return Err(ModelError::ZeroImpedanceBranch(self.id.clone()));
        }
        if !(self.s_max_mva > 0.0) || !(self.i_max_ka > 0.0) {
            return Err(invalid("branch", &self.id, "ratings must be > 0"));
        }
        Ok(())
    }
}

impl Load {
    pub fn check(&self) -> Result<(), ModelError> {
        if self.p_mw < 0.0 {
            return Err(invalid("load", &self.id, "p_mw must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.gamma_max) {
            return Err(invalid("load", &self.id, "gamma_max must lie in [0, 1]"));
        }
        if self.gamma < 0.0 || self.gamma > self.gamma_max {
            return Err(invalid("load", &self.id, "gamma must lie in [0, gamma_max]"));
        }
        Ok(())
    }
}

impl Generator {
    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.v_set_pu > 0.0) {
            return Err(invalid("generator", &self.id, "v_set_pu must be > 0"));
        }
        if self.q_min_mvar > self.q_max_mvar {
            return Err(invalid("generator", &self.id, "q_min_mvar > q_max_mvar"));
        }
        Ok(())
    }
}

impl Battery {
    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.s_max_mva > 0.0) {
            return Err(invalid("battery", &self.id, "s_max_mva must be > 0"));
        }
        let cap = if self.placed { self.s_max_mva } else { 0.0 };
        if self.p_mw.powi(2) + self.q_mvar.powi(2) > cap.powi(2) + 1e-9 {
            return Err(invalid(
                "battery",
                &self.id,
                "dispatch exceeds apparent-power capability (or battery not placed)",
            ));
        }
        if self.p_mw.abs() > self.p_max_mw + 1e-9 || self.q_mvar.abs() > self.q_max_mvar + 1e-9 {
            return Err(invalid("battery", &self.id, "dispatch exceeds p/q limits"));
        }
        Ok(())
    }
}

/// A complete grid description. All element collections are keyed by id and
/// iterate in insertion order, so serialization is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub base_mva: f64,
    pub buses: IndexMap<String, Bus>,
    pub branches: IndexMap<String, Branch>,
    pub switches: IndexMap<String, Switch>,
    pub loads: IndexMap<String, Load>,
    pub generators: IndexMap<String, Generator>,
    pub batteries: IndexMap<String, Battery>,
    pub battery_budget: u32,
}

impl Network {
    pub fn new(base_mva: f64) -> Self {
        Network {
            base_mva,
            buses: IndexMap::new(),
            branches: IndexMap::new(),
            switches: IndexMap::new(),
            loads: IndexMap::new(),
            generators: IndexMap::new(),
            batteries: IndexMap::new(),
            battery_budget: 0,
        }
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.buses.get(id)
    }

    pub fn branch(&self, id: &str) -> Option<&Branch> {
        self.branches.get(id)
    }

    pub fn slack_bus(&self) -> Result<&Bus, ModelError> {
        let mut slack = None;
        for bus in self.buses.values() {
            if bus.kind == BusKind::Slack {
                if let Some(prev) = slack {
                    let prev: &Bus = prev;
                    return Err(ModelError::MultipleSlack(prev.id.clone(), bus.id.clone()));
                }
                slack = Some(bus);
            }
        }
        slack.ok_or(ModelError::NoSlack)
    }

    /// The switch attached to `branch_id`, if any. At most one exists on a
    /// valid network.
    pub fn switch_for_branch(&self, branch_id: &str) -> Option<&Switch> {
        self.switches.values().find(|s| s.branch_id == branch_id)
    }

    /// Whether a branch currently carries current: it must be in service and
    /// its switch, if it has one, must be closed.
    pub fn effective_branch_state(&self, branch_id: &str) -> Result<bool, ModelError> {
        let branch = self
            .branches
            .get(branch_id)
            .ok_or_else(|| ModelError::UnknownBranch(branch_id.to_string()))?;
        let switch_closed = self
            .switch_for_branch(branch_id)
            .map(|s| s.closed)
            .unwrap_or(true);
        Ok(branch.in_service && switch_closed)
    }

    pub fn placed_battery_count(&self) -> u32 {
        self.batteries.values().filter(|b| b.placed).count() as u32
    }

    pub fn battery_at_bus(&self, bus_id: &str) -> Option<&Battery> {
        self.batteries.values().find(|b| b.bus_id == bus_id)
    }

    /// Stable JSON rendering used for snapshots, digests and byte-equality
    /// checks. Collections keep insertion order, so equal values always give
    /// equal bytes.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("network serialization cannot fail")
    }

    /// Short content hash of the canonical JSON form.
    pub fn digest(&self) -> String {
        crate::digest_str(&self.canonical_json())
    }

    /// Validate every structural invariant: referential integrity, exactly
    /// one slack bus, value ranges, switch placement and the battery budget.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.slack_bus()?;
        for bus in self.buses.values() {
            bus.check()?;
        }
        for branch in self.branches.values() {
            branch.check()?;
            for (end, target) in [("from_bus", &branch.from_bus), ("to_bus", &branch.to_bus)] {
                if !self.buses.contains_key(target) {
                    return Err(ModelError::DanglingReference {
                        kind: "branch",
                        id: branch.id.clone(),
                        target_kind: "bus",
                        target: format!("{target} ({end})"),
                    });
                }
            }
        }
        let mut switched: std::collections::BTreeSet<&str> = Default::default();
        for switch in self.switches.values() {
            let branch = self.branches.get(&switch.branch_id).ok_or_else(|| {
                ModelError::DanglingReference {
                    kind: "switch",
                    id: switch.id.clone(),
                    target_kind: "branch",
                    target: switch.branch_id.clone(),
                }
            })?;
            if !branch.switchable {
                return Err(ModelError::SwitchOnFixedBranch {
                    id: switch.id.clone(),
                    branch: branch.id.clone(),
                });
            }
            if !switched.insert(branch.id.as_str()) {
                return Err(ModelError::DuplicateSwitch {
                    branch: branch.id.clone(),
                });
            }
        }
        for load in self.loads.values() {
            load.check()?;
            if !self.buses.contains_key(&load.bus_id) {
                return Err(ModelError::DanglingReference {
                    kind: "load",
                    id: load.id.clone(),
                    target_kind: "bus",
                    target: load.bus_id.clone(),
                });
            }
        }
        for gen in self.generators.values() {
            gen.check()?;
            let bus = self.buses.get(&gen.bus_id).ok_or_else(|| {
                ModelError::DanglingReference {
                    kind: "generator",
                    id: gen.id.clone(),
                    target_kind: "bus",
                    target: gen.bus_id.clone(),
                }
            })?;
            if bus.kind == BusKind::Pq {
                return Err(invalid(
                    "generator",
                    &gen.id,
                    "generators may only sit at pv or slack buses",
                ));
            }
        }
        for battery in self.batteries.values() {
            battery.check()?;
            if !self.buses.contains_key(&battery.bus_id) {
                return Err(ModelError::DanglingReference {
                    kind: "battery",
                    id: battery.id.clone(),
                    target_kind: "bus",
                    target: battery.bus_id.clone(),
                });
            }
        }
        if self.placed_battery_count() > self.battery_budget {
            return Err(invalid(
                "network",
                "batteries",
                "placed battery count exceeds battery_budget",
            ));
        }
        Ok(())
    }
}

fn invalid(kind: &'static str, id: &str, message: &str) -> ModelError {
    ModelError::InvalidField {
        kind,
        id: id.to_string(),
        message: message.to_string(),
    }
}

/// Undirected bus adjacency derived from a network's branches.
///
/// `respect_switches = true` walks only branches that are effectively in
/// service (the electrical topology); `false` also walks open-switched
/// branches (the physical topology, used for "how far is this asset from
/// that violation" distances, where an open tie switch still counts as
/// nearby).
pub struct Topology {
    /// bus id -> list of (branch id, neighbour bus id)
    pub adjacency: IndexMap<String, Vec<(String, String)>>,
}

impl Topology {
    pub fn of(net: &Network, respect_switches: bool) -> Self {
        let mut adjacency: IndexMap<String, Vec<(String, String)>> = net
            .buses
            .keys()
            .map(|id| (id.clone(), Vec::new()))
            .collect();
        for branch in net.branches.values() {
            let active = if respect_switches {
                net.effective_branch_state(&branch.id).unwrap_or(false)
            } else {
                branch.in_service
            };
            let endpoints_ok = net
                .bus(&branch.from_bus)
                .zip(net.bus(&branch.to_bus))
                .map(|(a, b)| a.in_service && b.in_service)
                .unwrap_or(false);
            if !active || !endpoints_ok {
                continue;
            }
            adjacency[&branch.from_bus].push((branch.id.clone(), branch.to_bus.clone()));
            adjacency[&branch.to_bus].push((branch.id.clone(), branch.from_bus.clone()));
        }
        Topology { adjacency }
    }

    /// Breadth-first hop distances from a seed set of buses.
    pub fn distances_from(&self, seeds: &[String]) -> IndexMap<String, usize> {
        let mut dist: IndexMap<String, usize> = IndexMap::new();
        let mut queue = std::collections::VecDeque::new();
        for seed in seeds {
            if self.adjacency.contains_key(seed) && !dist.contains_key(seed) {
                dist.insert(seed.clone(), 0);
                queue.push_back(seed.clone());
            }
        }
        while let Some(bus) = queue.pop_front() {
            let d = dist[&bus];
            for (_, next) in &self.adjacency[&bus] {
                if !dist.contains_key(next) {
                    dist.insert(next.clone(), d + 1);
                    queue.push_back(next.clone());
                }
            }
        }
        dist
    }

    /// Connected components in insertion order; each component lists bus ids
    /// in network order.
    pub fn components(&self) -> Vec<Vec<String>> {
        let mut seen: std::collections::BTreeSet<String> = Default::default();
        let mut out = Vec::new();
        for start in self.adjacency.keys() {
            if seen.contains(start) {
                continue;
            }
            let mut component: std::collections::BTreeSet<String> = Default::default();
            component.insert(start.clone());
            seen.insert(start.clone());
            let mut queue = std::collections::VecDeque::from([start.clone()]);
            while let Some(bus) = queue.pop_front() {
                for (_, next) in &self.adjacency[&bus] {
                    if seen.insert(next.clone()) {
                        component.insert(next.clone());
                        queue.push_back(next.clone());
                    }
                }
            }
            // Keep network insertion order inside the component.
            out.push(
                self.adjacency
                    .keys()
                    .filter(|k| component.contains(*k))
                    .cloned()
                    .collect(),
            );
        }
        out
    }
}
