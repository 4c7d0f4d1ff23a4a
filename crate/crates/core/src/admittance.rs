//! Per-unit conversion and bus admittance matrix construction.
//!
//! Branches are stored in ohms and normalized here on the network MVA base
//! and the from-bus voltage base. Each branch contributes through the
//! standard pi-model: series admittance off-diagonal, series plus half the
//! line-charging shunt on each diagonal. Parallel branches sum.

use crate::model::{ModelError, Network};
use indexmap::IndexMap;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn z_base_ohm(nominal_kv: f64, base_mva: f64) -> f64 {
    nominal_kv * nominal_kv / base_mva
}

pub fn ohm_to_pu(ohm: f64, nominal_kv: f64, base_mva: f64) -> f64 {
    ohm / z_base_ohm(nominal_kv, base_mva)
}

pub fn pu_to_ohm(pu: f64, nominal_kv: f64, base_mva: f64) -> f64 {
    pu * z_base_ohm(nominal_kv, base_mva)
}

/// Shunt susceptance in siemens to per-unit admittance.
pub fn siemens_to_pu(siemens: f64, nominal_kv: f64, base_mva: f64) -> f64 {
    siemens * z_base_ohm(nominal_kv, base_mva)
}

/// Current base in kA for a given voltage base (three-phase apparent power).
pub fn i_base_ka(nominal_kv: f64, base_mva: f64) -> f64 {
    base_mva / (3f64.sqrt() * nominal_kv)
}

/// Complex nodal admittance matrix over one island's buses.
pub struct AdmittanceMatrix {
    pub order: usize,
    pub y: DMatrix<Complex64>,
    /// bus id -> row/column index; iteration order matches the index order.
    pub index_of: IndexMap<String, usize>,
}

impl AdmittanceMatrix {
    pub fn bus_ids(&self) -> impl Iterator<Item = &String> {
        self.index_of.keys()
    }
}

/// Build the admittance matrix over `island` (a set of bus ids), taking only
/// effectively in-service branches whose endpoints both lie in the island.
pub fn build_admittance(net: &Network, island: &[String]) -> Result<AdmittanceMatrix, ModelError> {
    let mut index_of = IndexMap::new();
    for id in island {
        if !net.buses.contains_key(id) {
            return Err(ModelError::UnknownBus(id.clone()));
        }
        index_of.insert(id.clone(), index_of.len());
    }
    let n = index_of.len();
    let mut y = DMatrix::<Complex64>::zeros(n, n);

    for branch in net.branches.values() {
        let (Some(&i), Some(&j)) = (index_of.get(&branch.from_bus), index_of.get(&branch.to_bus))
        else {
            continue;
        };
        if !net.effective_branch_state(&branch.id)? {
            continue;
        }
        if branch.r_ohm == 0.0 && branch.x_ohm == 0.0 {
            return Err(ModelError::ZeroImpedanceBranch(branch.id.clone()));
        }
        let kv = net.buses[&branch.from_bus].nominal_kv;
        let r = ohm_to_pu(branch.r_ohm, kv, net.base_mva);
        let x = ohm_to_pu(branch.x_ohm, kv, net.base_mva);
        let y_series = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
        let y_half_shunt =
            Complex64::new(0.0, siemens_to_pu(branch.b_shunt_siemens, kv, net.base_mva) / 2.0);
        y[(i, i)] += y_series + y_half_shunt;
        y[(j, j)] += y_series + y_half_shunt;
        y[(i, j)] -= y_series;
        y[(j, i)] -= y_series;
    }

    Ok(AdmittanceMatrix { order: n, y, index_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn two_bus_net(x_pu: f64) -> Network {
        let mut net = Network::new(100.0);
        for (id, kind) in [("b1", BusKind::Slack), ("b2", BusKind::Pq)] {
            net.buses.insert(
                id.to_string(),
                Bus {
                    id: id.to_string(),
                    name: String::new(),
                    nominal_kv: 10.0,
                    kind,
                    v_min_pu: 0.95,
                    v_max_pu: 1.05,
                    in_service: true,
                },
            );
        }
        net.branches.insert(
            "l1".to_string(),
            Branch {
                id: "l1".to_string(),
                from_bus: "b1".to_string(),
                to_bus: "b2".to_string(),
                r_ohm: 0.0,
                x_ohm: pu_to_ohm(x_pu, 10.0, 100.0),
                b_shunt_siemens: 0.0,
                s_max_mva: 10.0,
                i_max_ka: 1.0,
                in_service: true,
                switchable: false,
            },
        );
        net
    }

    #[test]
    fn single_reactive_branch_matches_hand_computation() {
        let net = two_bus_net(0.1);
        let island = vec!["b1".to_string(), "b2".to_string()];
        let adm = build_admittance(&net, &island).unwrap();
        let y = &adm.y;
        assert!((y[(0, 0)] - Complex64::new(0.0, -10.0)).norm() < 1e-12);
        assert!((y[(1, 1)] - Complex64::new(0.0, -10.0)).norm() < 1e-12);
        assert!((y[(0, 1)] - Complex64::new(0.0, 10.0)).norm() < 1e-12);
        assert!((y[(1, 0)] - Complex64::new(0.0, 10.0)).norm() < 1e-12);
    }

    #[test]
    fn open_switched_branch_is_excluded() {
        let mut net = two_bus_net(0.1);
        net.branches["l1"].switchable = true;
        net.switches.insert(
            "s1".to_string(),
            Switch {
                id: "s1".to_string(),
                branch_id: "l1".to_string(),
                closed: false,
            },
        );
        let island = vec!["b1".to_string(), "b2".to_string()];
        let adm = build_admittance(&net, &island).unwrap();
        assert!(adm.y.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn zero_impedance_active_branch_rejected() {
        let mut net = two_bus_net(0.1);
        net.branches["l1"].x_ohm = 0.0;
        let island = vec!["b1".to_string(), "b2".to_string()];
        match build_admittance(&net, &island) {
            Err(ModelError::ZeroImpedanceBranch(id)) => assert_eq!(id, "l1"),
            other => panic!("expected ZeroImpedanceBranch, got {other:?}"),
        }
    }

    #[test]
    fn per_unit_round_trip() {
        for &(ohm, kv, mva) in &[(0.5, 12.66, 10.0), (123.4, 132.0, 100.0), (1e-4, 0.4, 1.0)] {
            let back = pu_to_ohm(ohm_to_pu(ohm, kv, mva), kv, mva);
            assert!((back - ohm).abs() <= 1e-12 * ohm.abs());
        }
    }
}
