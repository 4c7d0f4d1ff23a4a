//! Island detection and the Newton-Raphson AC power-flow solver.
//!
//! The solver works in polar per-unit form on the energized island (the one
//! containing the slack bus). PV buses hold their setpoint voltage until a
//! reactive limit binds, at which point they are re-typed PQ at the limit
//! and the case is re-solved (at most once per PV bus). Islands without the
//! slack are not solved; their buses are reported de-energized and surface
//! later as disconnection violations.

use crate::admittance::{build_admittance, i_base_ka};
use crate::model::{BusKind, ModelError, Network, Topology};
use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PowerFlowError {
    #[error("no slack bus in any energized island")]
    NoSlackInIsland,
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerance_pu: f64,
    pub max_iterations: usize,
    pub flat_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance_pu: 1e-8,
            max_iterations: 50,
            flat_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusVoltage {
    pub v_pu: f64,
    pub theta_rad: f64,
    pub energized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFlow {
    pub p_from_mw: f64,
    pub q_from_mvar: f64,
    pub p_to_mw: f64,
    pub q_to_mvar: f64,
    pub s_mva: f64,
    pub i_ka: f64,
    pub loading_percent: f64,
}

impl BranchFlow {
    fn zero() -> Self {
        BranchFlow {
            p_from_mw: 0.0,
            q_from_mvar: 0.0,
            p_to_mw: 0.0,
            q_to_mvar: 0.0,
            s_mva: 0.0,
            i_ka: 0.0,
            loading_percent: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandInfo {
    pub buses: Vec<String>,
    pub energized: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerFlowSolution {
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch_pu: f64,
    /// PV buses re-typed to PQ because a generator reactive limit bound.
    pub pv_to_pq_switches: usize,
    pub bus_voltages: IndexMap<String, BusVoltage>,
    pub branch_flows: IndexMap<String, BranchFlow>,
    pub islands: Vec<IslandInfo>,
    /// Digest of the network the solution was computed from; lets violation
    /// analysis reject solutions that have gone stale.
    pub network_digest: String,
}

impl PowerFlowSolution {
    pub fn voltage(&self, bus_id: &str) -> Option<&BusVoltage> {
        self.bus_voltages.get(bus_id)
    }
}

/// Connected components under effective branch adjacency. A component is
/// energized iff it contains the in-service slack bus.
pub fn find_islands(net: &Network) -> Vec<IslandInfo> {
    let slack_id = net
        .buses
        .values()
        .find(|b| b.kind == BusKind::Slack && b.in_service)
        .map(|b| b.id.clone());
    Topology::of(net, true)
        .components()
        .into_iter()
        .map(|buses| {
            let energized = slack_id
                .as_ref()
                .map(|s| buses.iter().any(|b| b == s))
                .unwrap_or(false);
            IslandInfo { buses, energized }
        })
        .collect()
}

/// Per-unit scheduled injections at one bus.
#[derive(Debug, Clone, Copy, Default)]
struct Injection {
    p: f64,
    /// Load-minus-battery reactive draw; generator reactive output is on top.
    q_draw: f64,
}

fn injections(net: &Network) -> IndexMap<String, Injection> {
    let mut map: IndexMap<String, Injection> = net
        .buses
        .keys()
        .map(|id| (id.clone(), Injection::default()))
        .collect();
    for load in net.loads.values() {
        if let Some(entry) = map.get_mut(&load.bus_id) {
            entry.p -= load.effective_p_mw() / net.base_mva;
            entry.q_draw += load.effective_q_mvar() / net.base_mva;
        }
    }
    for battery in net.batteries.values().filter(|b| b.placed) {
        if let Some(entry) = map.get_mut(&battery.bus_id) {
            entry.p += battery.p_mw / net.base_mva;
            entry.q_draw -= battery.q_mvar / net.base_mva;
        }
    }
    for gen in net.generators.values() {
        if let Some(entry) = map.get_mut(&gen.bus_id) {
            entry.p += gen.p_mw / net.base_mva;
        }
    }
    map
}

/// The polar-form Newton-Raphson system for one island, exposed so tests can
/// evaluate the mismatch function and Jacobian directly (finite-difference
/// checks, mismatch oracles).
pub struct NrSystem {
    pub y: DMatrix<Complex64>,
    pub bus_ids: Vec<String>,
    pub slack: usize,
    pub pv: Vec<usize>,
    pub pq: Vec<usize>,
    /// Scheduled active injection per island bus (pu).
    pub p_sched: Vec<f64>,
    /// Scheduled reactive injection per island bus (pu); meaningful for PQ.
    pub q_sched: Vec<f64>,
    /// Voltage targets for the slack and PV buses (pu).
    pub v_target: Vec<f64>,
}

impl NrSystem {
    pub fn state_dim(&self) -> usize {
        self.pv.len() + 2 * self.pq.len()
    }

    /// Initial state: flat start, with PV/slack magnitudes at their targets.
    pub fn flat_state(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.bus_ids.len();
        let theta = vec![0.0; n];
        let mut v = vec![1.0; n];
        v[self.slack] = self.v_target[self.slack];
        for &i in &self.pv {
            v[i] = self.v_target[i];
        }
        (theta, v)
    }

    pub fn calc_pq(&self, theta: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.bus_ids.len();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            let mut pi = 0.0;
            let mut qi = 0.0;
            for j in 0..n {
                let g = self.y[(i, j)].re;
                let b = self.y[(i, j)].im;
                if g == 0.0 && b == 0.0 {
                    continue;
                }
                let dt = theta[i] - theta[j];
                let (sin, cos) = dt.sin_cos();
                pi += v[j] * (g * cos + b * sin);
                qi += v[j] * (g * sin - b * cos);
            }
            p[i] = v[i] * pi;
            q[i] = v[i] * qi;
        }
        (p, q)
    }

    /// Mismatch vector `[dP at pv+pq..., dQ at pq...]`.
    pub fn mismatch(&self, theta: &[f64], v: &[f64]) -> Vec<f64> {
        let (p_calc, q_calc) = self.calc_pq(theta, v);
        let mut f = Vec::with_capacity(self.state_dim());
        for &i in self.pv.iter().chain(&self.pq) {
            f.push(self.p_sched[i] - p_calc[i]);
        }
        for &i in &self.pq {
            f.push(self.q_sched[i] - q_calc[i]);
        }
        f
    }

    /// State layout: `[theta at pv+pq..., v at pq...]`.
    pub fn apply_state(&self, x: &[f64], theta: &mut [f64], v: &mut [f64]) {
        let angles = self.pv.len() + self.pq.len();
        for (k, &i) in self.pv.iter().chain(&self.pq).enumerate() {
            theta[i] = x[k];
        }
        for (k, &i) in self.pq.iter().enumerate() {
            v[i] = x[angles + k];
        }
    }

    pub fn extract_state(&self, theta: &[f64], v: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.state_dim());
        for &i in self.pv.iter().chain(&self.pq) {
            x.push(theta[i]);
        }
        for &i in &self.pq {
            x.push(v[i]);
        }
        x
    }

    /// Analytic Jacobian of the calculated injections with respect to the
    /// state, so that `J * dx = mismatch` is the Newton step.
    pub fn jacobian(&self, theta: &[f64], v: &[f64]) -> DMatrix<f64> {
        let (p_calc, q_calc) = self.calc_pq(theta, v);
        let angle_buses: Vec<usize> = self.pv.iter().chain(&self.pq).copied().collect();
        let na = angle_buses.len();
        let npq = self.pq.len();
        let dim = na + npq;
        let mut jac = DMatrix::<f64>::zeros(dim, dim);

        let term = |i: usize, j: usize| {
            let g = self.y[(i, j)].re;
            let b = self.y[(i, j)].im;
            let dt = theta[i] - theta[j];
            let (sin, cos) = dt.sin_cos();
            (g * cos + b * sin, g * sin - b * cos)
        };

        for (row, &i) in angle_buses.iter().enumerate() {
            // dP_i rows
            for (col, &j) in angle_buses.iter().enumerate() {
                jac[(row, col)] = if i == j {
                    -q_calc[i] - self.y[(i, i)].im * v[i] * v[i]
                } else {
                    let (_, hb) = term(i, j);
                    v[i] * v[j] * hb
                };
            }
            for (col, &j) in self.pq.iter().enumerate() {
                jac[(row, na + col)] = if i == j {
                    p_calc[i] / v[i] + self.y[(i, i)].re * v[i]
                } else {
                    let (ha, _) = term(i, j);
                    v[i] * ha
                };
            }
        }
        for (row, &i) in self.pq.iter().enumerate() {
            // dQ_i rows
            for (col, &j) in angle_buses.iter().enumerate() {
                jac[(na + row, col)] = if i == j {
                    p_calc[i] - self.y[(i, i)].re * v[i] * v[i]
                } else {
                    let (ha, _) = term(i, j);
                    -v[i] * v[j] * ha
                };
            }
            for (col, &j) in self.pq.iter().enumerate() {
                jac[(na + row, na + col)] = if i == j {
                    q_calc[i] / v[i] - self.y[(i, i)].im * v[i]
                } else {
                    let (_, hb) = term(i, j);
                    v[i] * hb
                };
            }
        }
        jac
    }
}

/// Reactive capability of the generators at one bus, in per-unit.
struct PvBusInfo {
    v_set: f64,
    q_min: f64,
    q_max: f64,
}

fn pv_info(net: &Network, bus_id: &str) -> Option<PvBusInfo> {
    let mut found = false;
    let (mut v_set, mut q_min, mut q_max) = (1.0, 0.0, 0.0);
    for gen in net.generators.values().filter(|g| g.bus_id == bus_id) {
        if !found {
            v_set = gen.v_set_pu;
            found = true;
        }
        q_min += gen.q_min_mvar / net.base_mva;
        q_max += gen.q_max_mvar / net.base_mva;
    }
    found.then_some(PvBusInfo { v_set, q_min, q_max })
}

/// Build the NR system for `island`, with `demoted` listing PV buses forced
/// to PQ at a fixed generator reactive output (pu).
pub fn build_nr_system(
    net: &Network,
    island: &[String],
    demoted: &IndexMap<String, f64>,
) -> Result<NrSystem, PowerFlowError> {
    let adm = build_admittance(net, island)?;
    let inj = injections(net);
    let n = island.len();
    let mut slack = None;
    let mut pv = Vec::new();
    let mut pq = Vec::new();
    let mut p_sched = vec![0.0; n];
    let mut q_sched = vec![0.0; n];
    let mut v_target = vec![1.0; n];

    for (idx, bus_id) in island.iter().enumerate() {
        let bus = &net.buses[bus_id];
        let at = inj[bus_id];
        p_sched[idx] = at.p;
        let info = pv_info(net, bus_id);
        match bus.kind {
            BusKind::Slack => {
                slack = Some(idx);
                v_target[idx] = info.as_ref().map(|i| i.v_set).unwrap_or(1.0);
            }
            BusKind::Pv => {
                if let Some(q_fixed) = demoted.get(bus_id) {
                    pq.push(idx);
                    q_sched[idx] = q_fixed - at.q_draw;
                } else if let Some(info) = &info {
                    pv.push(idx);
                    v_target[idx] = info.v_set;
                } else {
                    // PV bus without an in-service generator behaves as PQ.
                    pq.push(idx);
                    q_sched[idx] = -at.q_draw;
                }
            }
            BusKind::Pq => {
                pq.push(idx);
                q_sched[idx] = -at.q_draw;
            }
        }
    }

    let slack = slack.ok_or(PowerFlowError::NoSlackInIsland)?;
    Ok(NrSystem {
        y: adm.y,
        bus_ids: island.to_vec(),
        slack,
        pv,
        pq,
        p_sched,
        q_sched,
        v_target,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

struct IslandSolve {
    theta: Vec<f64>,
    v: Vec<f64>,
    converged: bool,
    iterations: usize,
    max_mismatch: f64,
}

fn solve_island(
    sys: &NrSystem,
    opts: &SolverOptions,
    start: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<IslandSolve, PowerFlowError> {
    let (mut theta, mut v) = start.unwrap_or_else(|| sys.flat_state());
    let mut f = sys.mismatch(&theta, &v);
    let mut norm = max_abs(&f);
    let mut iterations = 0;

    while norm > opts.tolerance_pu && iterations < opts.max_iterations {
        iterations += 1;
        let jac = sys.jacobian(&theta, &v);
        let rhs = DVector::from_column_slice(&f);
        let lu = jac.lu();
        let dx = lu
            .solve(&rhs)
            .ok_or(PowerFlowError::SingularJacobian { iteration: iterations })?;
        if dx.iter().any(|x| !x.is_finite()) {
            return Err(PowerFlowError::SingularJacobian { iteration: iterations });
        }
        let mut x = sys.extract_state(&theta, &v);
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
        sys.apply_state(&x, &mut theta, &mut v);
        f = sys.mismatch(&theta, &v);
        norm = max_abs(&f);
        if !norm.is_finite() {
            break;
        }
    }

    Ok(IslandSolve {
        theta,
        v,
        converged: norm.is_finite() && norm <= opts.tolerance_pu,
        iterations,
        max_mismatch: norm,
    })
}

/// Full AC power flow over the energized island.
pub fn solve(net: &Network, opts: &SolverOptions) -> Result<PowerFlowSolution, PowerFlowError> {
    let islands = find_islands(net);
    let energized = islands
        .iter()
        .find(|i| i.energized)
        .ok_or(PowerFlowError::NoSlackInIsland)?;

    let inj = injections(net);
    let mut demoted: IndexMap<String, f64> = IndexMap::new();
    let pv_count = energized
        .buses
        .iter()
        .filter(|b| net.buses[b.as_str()].kind == BusKind::Pv)
        .count();

    let mut sys = build_nr_system(net, &energized.buses, &demoted)?;
    let mut result = solve_island(&sys, opts, None)?;
    let mut total_iterations = result.iterations;

    // Enforce generator reactive limits by demoting violated PV buses to PQ
    // at the binding limit and re-solving from the previous state.
    let mut rounds = 0;
    while result.converged && rounds < pv_count {
        let (_, q_calc) = sys.calc_pq(&result.theta, &result.v);
        let mut newly_demoted = false;
        for (idx, bus_id) in sys.bus_ids.iter().enumerate() {
            if !sys.pv.contains(&idx) {
                continue;
            }
            let info = match pv_info(net, bus_id) {
                Some(info) => info,
                None => continue,
            };
            let q_gen = q_calc[idx] + inj[bus_id].q_draw;
            let fixed = if q_gen > info.q_max + 1e-9 {
                Some(info.q_max)
            } else if q_gen < info.q_min - 1e-9 {
                Some(info.q_min)
            } else {
                None
            };
            if let Some(limit) = fixed {
                demoted.insert(bus_id.clone(), limit);
                newly_demoted = true;
            }
        }
        if !newly_demoted {
            break;
        }
        rounds += 1;
        let start = (result.theta.clone(), result.v.clone());
        sys = build_nr_system(net, &energized.buses, &demoted)?;
        result = solve_island(&sys, opts, Some(start))?;
        total_iterations += result.iterations;
    }

    let mut bus_voltages: IndexMap<String, BusVoltage> = net
        .buses
        .keys()
        .map(|id| {
            (
                id.clone(),
                BusVoltage {
                    v_pu: 0.0,
                    theta_rad: 0.0,
                    energized: false,
                },
            )
        })
        .collect();
    for (idx, bus_id) in sys.bus_ids.iter().enumerate() {
        bus_voltages[bus_id] = BusVoltage {
            v_pu: result.v[idx],
            theta_rad: result.theta[idx],
            energized: true,
        };
    }

    let branch_flows = branch_flows(net, &bus_voltages);

    Ok(PowerFlowSolution {
        converged: result.converged,
        iterations: total_iterations,
        max_mismatch_pu: result.max_mismatch,
        pv_to_pq_switches: demoted.len(),
        bus_voltages,
        branch_flows,
        islands,
        network_digest: net.digest(),
    })
}

/// Branch flows from solved voltages. Branches that are open or touch a
/// de-energized bus carry zero flow.
pub fn branch_flows(
    net: &Network,
    voltages: &IndexMap<String, BusVoltage>,
) -> IndexMap<String, BranchFlow> {
    let mut flows = IndexMap::new();
    for branch in net.branches.values() {
        let active = net.effective_branch_state(&branch.id).unwrap_or(false);
        let vf = voltages.get(&branch.from_bus);
        let vt = voltages.get(&branch.to_bus);
        let (Some(vf), Some(vt)) = (vf, vt) else {
            flows.insert(branch.id.clone(), BranchFlow::zero());
            continue;
        };
        if !active || !vf.energized || !vt.energized {
            flows.insert(branch.id.clone(), BranchFlow::zero());
            continue;
        }
        let kv = net.buses[&branch.from_bus].nominal_kv;
        let base = net.base_mva;
        let r = crate::admittance::ohm_to_pu(branch.r_ohm, kv, base);
        let x = crate::admittance::ohm_to_pu(branch.x_ohm, kv, base);
        let y_series = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
        let b_half = crate::admittance::siemens_to_pu(branch.b_shunt_siemens, kv, base) / 2.0;
        let v_from = Complex64::from_polar(vf.v_pu, vf.theta_rad);
        let v_to = Complex64::from_polar(vt.v_pu, vt.theta_rad);
        let i_from = y_series * (v_from - v_to) + Complex64::new(0.0, b_half) * v_from;
        let i_to = y_series * (v_to - v_from) + Complex64::new(0.0, b_half) * v_to;
        let s_from = v_from * i_from.conj();
        let s_to = v_to * i_to.conj();
        let s_mva = s_from.norm() * base;
        let i_ka = i_from.norm() * i_base_ka(kv, base);
        let loading_percent =
            100.0 * (s_mva / branch.s_max_mva).max(i_ka / branch.i_max_ka);
        flows.insert(
            branch.id.clone(),
            BranchFlow {
                p_from_mw: s_from.re * base,
                q_from_mvar: s_from.im * base,
                p_to_mw: s_to.re * base,
                q_to_mvar: s_to.im * base,
                s_mva,
                i_ka,
                loading_percent,
            },
        );
    }
    flows
}

/// Worst residual of the power-balance equations at the solved state:
/// active power at every non-slack energized bus, reactive power at every
/// PQ bus. Independent check that a solution actually satisfies the
/// physics it claims to.
pub fn solution_mismatch(net: &Network, sol: &PowerFlowSolution) -> Result<f64, PowerFlowError> {
    let energized = sol
        .islands
        .iter()
        .find(|i| i.energized)
        .ok_or(PowerFlowError::NoSlackInIsland)?;
    let sys = build_nr_system(net, &energized.buses, &IndexMap::new())?;
    let theta: Vec<f64> = sys
        .bus_ids
        .iter()
        .map(|b| sol.bus_voltages[b].theta_rad)
        .collect();
    let v: Vec<f64> = sys.bus_ids.iter().map(|b| sol.bus_voltages[b].v_pu).collect();
    let (p_calc, q_calc) = sys.calc_pq(&theta, &v);
    let mut worst = 0.0_f64;
    for (idx, bus_id) in sys.bus_ids.iter().enumerate() {
        let bus = &net.buses[bus_id];
        if bus.kind != BusKind::Slack {
            worst = worst.max((sys.p_sched[idx] - p_calc[idx]).abs());
        }
        if bus.kind == BusKind::Pq && net.generators.values().all(|g| g.bus_id != *bus_id) {
            worst = worst.max((sys.q_sched[idx] - q_calc[idx]).abs());
        }
    }
    Ok(worst)
}
