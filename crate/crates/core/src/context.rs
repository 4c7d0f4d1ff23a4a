//! Adaptive multi-scale rendering of the grid state for planner context.
//!
//! Two modes: `full_detail` serializes every component; `semantic_graph`
//! keeps violated elements and nearby controllable assets in full detail
//! and collapses healthy regions into one summary line each. Mode selection
//! is budget driven: full detail whenever it fits.

use crate::model::{Network, Topology};
use crate::powerflow::PowerFlowSolution;
use crate::violations::{Violation, ViolationKind, ViolationReport};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write;

pub const DEFAULT_FOCUS_HOPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    FullDetail,
    SemanticGraph,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkContext {
    pub mode: ContextMode,
    pub text: String,
    pub token_estimate: usize,
    pub included_elements: BTreeSet<String>,
    pub focus_violations: Vec<Violation>,
}

/// Crude but monotone token estimate: one token per four characters.
pub fn token_estimate(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

fn fmt_violation(v: &Violation) -> String {
    match (v.observed, v.limit) {
        (Some(observed), Some(limit)) => format!(
            "{} {} observed={observed:.4} limit={limit:.4} severity={:.4}",
            v.kind, v.element, v.severity
        ),
        _ => format!("{} {} severity={:.4}", v.kind, v.element, v.severity),
    }
}

fn summary_line(net: &Network, report: &ViolationReport) -> String {
    format!(
        "buses={} branches={} switches={} loads={} generators={} batteries={}(budget {}) base_mva={}\nviolations: {}",
        net.buses.len(),
        net.branches.len(),
        net.switches.len(),
        net.loads.len(),
        net.generators.len(),
        net.batteries.values().filter(|b| b.placed).count(),
        net.battery_budget,
        net.base_mva,
        report.inventory(),
    )
}

fn bus_line(net: &Network, sol: &PowerFlowSolution, bus_id: &str, report: &ViolationReport) -> String {
    let bus = &net.buses[bus_id];
    let mut line = format!("{} {} {}kV", bus.id, bus.kind, bus.nominal_kv);
    match sol.voltage(bus_id) {
        Some(v) if v.energized => {
            let _ = write!(
                line,
                " v={:.4}pu theta={:.4}rad band=[{:.3},{:.3}]",
                v.v_pu, v.theta_rad, bus.v_min_pu, bus.v_max_pu
            );
        }
        _ => line.push_str(" DE-ENERGIZED"),
    }
    for v in &report.violations {
        if v.element == bus_id && v.kind != ViolationKind::Thermal {
            let _ = write!(line, " !{}({:.4})", v.kind, v.severity);
        }
    }
    line
}

fn branch_line(net: &Network, sol: &PowerFlowSolution, branch_id: &str, report: &ViolationReport) -> String {
    let branch = &net.branches[branch_id];
    let mut line = format!("{} {}--{}", branch.id, branch.from_bus, branch.to_bus);
    let effective = net.effective_branch_state(branch_id).unwrap_or(false);
    match net.switch_for_branch(branch_id) {
        Some(sw) => {
            let _ = write!(
                line,
                " switch={}[{}]",
                sw.id,
                if sw.closed { "closed" } else { "open" }
            );
        }
        None => {
            if !branch.in_service {
                line.push_str(" OUT-OF-SERVICE");
            }
        }
    }
    if branch.switchable {
        line.push_str(" switchable");
    }
    if effective {
        if let Some(flow) = sol.branch_flows.get(branch_id) {
            let _ = write!(
                line,
                " loading={:.1}% p_from={:.2}MW rating={:.1}MVA",
                flow.loading_percent, flow.p_from_mw, branch.s_max_mva
            );
        }
    } else {
        line.push_str(" OPEN");
    }
    if report
        .violations
        .iter()
        .any(|v| v.kind == ViolationKind::Thermal && v.element == *branch_id)
    {
        line.push_str(" !thermal");
    }
    line
}

fn load_line(net: &Network, load_id: &str) -> String {
    let load = &net.loads[load_id];
    let mut line = format!(
        "{} @{} p={:.3}MW q={:.3}MVAr",
        load.id, load.bus_id, load.effective_p_mw(), load.effective_q_mvar()
    );
    if load.curtailable {
        let _ = write!(line, " curtailable gamma={:.2} gamma_max={:.2}", load.gamma, load.gamma_max);
    }
    line
}

fn battery_line(net: &Network, battery_id: &str) -> String {
    let b = &net.batteries[battery_id];
    format!(
        "{} @{} {} p={:.2}MW q={:.2}MVAr s_max={:.1}MVA",
        b.id,
        b.bus_id,
        if b.placed { "placed" } else { "slot" },
        b.p_mw,
        b.q_mvar,
        b.s_max_mva
    )
}

/// Complete serialization of every component plus the violation list.
pub fn render_full(
    net: &Network,
    sol: &PowerFlowSolution,
    report: &ViolationReport,
) -> NetworkContext {
    let mut text = String::new();
    let mut included = BTreeSet::new();

    let _ = writeln!(text, "=== network summary ===");
    let _ = writeln!(text, "{}", summary_line(net, report));
    let _ = writeln!(text, "\n=== buses ===");
    for bus_id in net.buses.keys() {
        let _ = writeln!(text, "{}", bus_line(net, sol, bus_id, report));
        included.insert(bus_id.clone());
    }
    let _ = writeln!(text, "\n=== branches ===");
    for branch_id in net.branches.keys() {
        let _ = writeln!(text, "{}", branch_line(net, sol, branch_id, report));
        included.insert(branch_id.clone());
    }
    let _ = writeln!(text, "\n=== loads ===");
    for load_id in net.loads.keys() {
        let _ = writeln!(text, "{}", load_line(net, load_id));
        included.insert(load_id.clone());
    }
    let _ = writeln!(text, "\n=== generators ===");
    for gen in net.generators.values() {
        let _ = writeln!(
            text,
            "{} @{} p={:.2}MW v_set={:.3}pu",
            gen.id, gen.bus_id, gen.p_mw, gen.v_set_pu
        );
        included.insert(gen.id.clone());
    }
    let _ = writeln!(text, "\n=== batteries ===");
    let _ = writeln!(
        text,
        "budget={} placed={}",
        net.battery_budget,
        net.batteries.values().filter(|b| b.placed).count()
    );
    for battery_id in net.batteries.keys() {
        let _ = writeln!(text, "{}", battery_line(net, battery_id));
        included.insert(battery_id.clone());
    }
    for switch_id in net.switches.keys() {
        included.insert(switch_id.clone());
    }
    render_violation_section(&mut text, report);

    NetworkContext {
        mode: ContextMode::FullDetail,
        token_estimate: token_estimate(&text),
        text,
        included_elements: included,
        focus_violations: report.violations.clone(),
    }
}

fn render_violation_section(text: &mut String, report: &ViolationReport) {
    let _ = writeln!(text, "\n=== violations ===");
    if report.is_empty() {
        let _ = writeln!(text, "none");
    } else {
        for v in &report.violations {
            let _ = writeln!(text, "{}", fmt_violation(v));
        }
    }
}

/// Buses seeding the focus region: violated buses plus the endpoints of
/// thermally violated branches.
fn violation_seed_buses(net: &Network, report: &ViolationReport) -> Vec<String> {
    let mut seeds = Vec::new();
    for v in &report.violations {
        match v.kind {
            ViolationKind::Thermal => {
                if let Some(branch) = net.branches.get(&v.element) {
                    seeds.push(branch.from_bus.clone());
                    seeds.push(branch.to_bus.clone());
                }
            }
            _ => seeds.push(v.element.clone()),
        }
    }
    seeds
}

/// Hop distance from every bus to the nearest violation, over the physical
/// topology (open switches still count as adjacency, so tie switches near a
/// de-energized lateral stay in focus).
pub fn violation_distances(net: &Network, report: &ViolationReport) -> IndexMap<String, usize> {
    let topology = Topology::of(net, false);
    topology.distances_from(&violation_seed_buses(net, report))
}

/// Focused rendering: violated elements in full detail, controllable assets
/// within `hops`, healthy remainder summarized per connected region.
pub fn render_semantic_graph(
    net: &Network,
    sol: &PowerFlowSolution,
    report: &ViolationReport,
    hops: usize,
) -> NetworkContext {
    let mut text = String::new();
    let mut included = BTreeSet::new();

    let _ = writeln!(text, "=== network summary ===");
    let _ = writeln!(text, "mode=semantic_graph focus_radius={hops}");
    let _ = writeln!(text, "{}", summary_line(net, report));

    if report.is_empty() {
        // Healthy network: a single summary block is all the planner needs.
        let ctx_text = text;
        return NetworkContext {
            mode: ContextMode::SemanticGraph,
            token_estimate: token_estimate(&ctx_text),
            text: ctx_text,
            included_elements: included,
            focus_violations: Vec::new(),
        };
    }

    let dist = violation_distances(net, report);
    let mut focus_buses: BTreeSet<String> = dist
        .iter()
        .filter(|(_, &d)| d <= hops)
        .map(|(b, _)| b.clone())
        .collect();

    // Controllable elements within the radius pull their endpoints in.
    let branch_dist = |branch: &crate::model::Branch| -> Option<usize> {
        let df = dist.get(&branch.from_bus).copied();
        let dt = dist.get(&branch.to_bus).copied();
        match (df, dt) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    };
    for branch in net.branches.values() {
        if branch.switchable {
            if let Some(d) = branch_dist(branch) {
                if d <= hops {
                    focus_buses.insert(branch.from_bus.clone());
                    focus_buses.insert(branch.to_bus.clone());
                }
            }
        }
    }
    for load in net.loads.values().filter(|l| l.curtailable) {
        if dist.get(&load.bus_id).map(|&d| d <= hops).unwrap_or(false) {
            focus_buses.insert(load.bus_id.clone());
        }
    }
    for battery in net.batteries.values() {
        if dist.get(&battery.bus_id).map(|&d| d <= hops).unwrap_or(false) {
            focus_buses.insert(battery.bus_id.clone());
        }
    }

    let _ = writeln!(text, "\n=== focus buses (within {hops} hops of a violation) ===");
    for bus_id in net.buses.keys() {
        if focus_buses.contains(bus_id) {
            let d = dist.get(bus_id).map(|d| d.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(text, "{} dist={}", bus_line(net, sol, bus_id, report), d);
            included.insert(bus_id.clone());
        }
    }

    let _ = writeln!(text, "\n=== focus branches ===");
    for branch in net.branches.values() {
        let in_focus = focus_buses.contains(&branch.from_bus) && focus_buses.contains(&branch.to_bus);
        let violated = report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::Thermal && v.element == branch.id);
        if in_focus || violated {
            let _ = writeln!(text, "{}", branch_line(net, sol, &branch.id, report));
            included.insert(branch.id.clone());
            if let Some(sw) = net.switch_for_branch(&branch.id) {
                included.insert(sw.id.clone());
            }
        }
    }

    let _ = writeln!(text, "\n=== focus loads ===");
    for load in net.loads.values() {
        if focus_buses.contains(&load.bus_id) {
            let _ = writeln!(text, "{}", load_line(net, &load.id));
            included.insert(load.id.clone());
        }
    }

    let _ = writeln!(text, "\n=== batteries ===");
    let remaining = net.battery_budget.saturating_sub(net.placed_battery_count());
    let _ = writeln!(text, "budget remaining: {remaining}");
    for battery in net.batteries.values() {
        if focus_buses.contains(&battery.bus_id) {
            let _ = writeln!(text, "{}", battery_line(net, &battery.id));
            included.insert(battery.id.clone());
        }
    }

    // Healthy remainder: one line per connected pruned region.
    let excluded: BTreeSet<String> = net
        .buses
        .keys()
        .filter(|b| !focus_buses.contains(*b))
        .cloned()
        .collect();
    if !excluded.is_empty() {
        let _ = writeln!(text, "\n=== summarized healthy regions ===");
        let topology = Topology::of(net, false);
        let mut seen: BTreeSet<String> = Default::default();
        for start in net.buses.keys() {
            if !excluded.contains(start) || seen.contains(start) {
                continue;
            }
            // Flood within the excluded set.
            let mut region = vec![start.clone()];
            seen.insert(start.clone());
            let mut queue = std::collections::VecDeque::from([start.clone()]);
            let mut boundary: BTreeSet<String> = Default::default();
            while let Some(bus) = queue.pop_front() {
                for (branch_id, next) in &topology.adjacency[&bus] {
                    if excluded.contains(next) {
                        if seen.insert(next.clone()) {
                            region.push(next.clone());
                            queue.push_back(next.clone());
                        }
                    } else {
                        boundary.insert(branch_id.clone());
                    }
                }
            }
            let total_load: f64 = net
                .loads
                .values()
                .filter(|l| region.contains(&l.bus_id))
                .map(|l| l.effective_p_mw())
                .sum();
            let worst_v = region
                .iter()
                .filter_map(|b| sol.voltage(b))
                .filter(|v| v.energized)
                .map(|v| v.v_pu)
                .fold(f64::INFINITY, f64::min);
            let worst = if worst_v.is_finite() {
                format!("{worst_v:.4}")
            } else {
                "n/a".to_string()
            };
            let via = boundary
                .iter()
                .next()
                .cloned()
                .unwrap_or_else(|| "isolated".to_string());
            let _ = writeln!(
                text,
                "region via {via}: {} buses, {:.3}MW load, worst v={worst}pu",
                region.len(),
                total_load
            );
        }
    }

    render_violation_section(&mut text, report);
    for v in &report.violations {
        included.insert(v.element.clone());
    }

    NetworkContext {
        mode: ContextMode::SemanticGraph,
        token_estimate: token_estimate(&text),
        text,
        included_elements: included,
        focus_violations: report.violations.clone(),
    }
}

/// Budget-driven mode choice: full detail iff it fits (boundary inclusive).
pub fn choose_mode(
    net: &Network,
    sol: &PowerFlowSolution,
    report: &ViolationReport,
    budget: usize,
) -> ContextMode {
    if render_full(net, sol, report).token_estimate <= budget {
        ContextMode::FullDetail
    } else {
        ContextMode::SemanticGraph
    }
}

/// Render with the mode chosen for `budget`.
pub fn render_adaptive(
    net: &Network,
    sol: &PowerFlowSolution,
    report: &ViolationReport,
    budget: usize,
    hops: usize,
) -> NetworkContext {
    match choose_mode(net, sol, report, budget) {
        ContextMode::FullDetail => render_full(net, sol, report),
        ContextMode::SemanticGraph => render_semantic_graph(net, sol, report, hops),
    }
}
