//! Feasibility audit of upper-bound solutions.
//!
//! Re-checks every route against the oracle's arc generator instead of the
//! RST enumeration used by the DP.

use thiserror::Error;

use crate::oracle::{raw_origins, raw_successors, RawState};
use crate::routing::VehicleRoute;
use crate::rst::{ArcKind, NodeRole, RstState, TransformedNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("upper-bound audit failed: {0}")]
pub struct AuditError(pub String);

fn raw(net: &TransformedNetwork, s: RstState) -> RawState {
    let (node, side) = match net.nodes()[s.node].role {
        NodeRole::Plain(p) | NodeRole::StationIn { physical: p, .. } => (p, false),
        NodeRole::StationOut { physical: p, .. } => (p, true),
    };
    RawState {
        node,
        side,
        time: s.time,
        resource: s.resource,
    }
}

/// Checks routes, station use, budget and the reported objective; returns
/// the unserved demand indices.
pub fn audit_solution(
    net: &TransformedNetwork,
    selection: &[usize],
    routes: &[VehicleRoute],
    penalty: f64,
    objective: f64,
) -> Result<Vec<usize>, AuditError> {
    let inst = net.instance();
    let fail = |m: String| Err(AuditError(m));
    let build: f64 = selection.iter().map(|&k| inst.stations[k].build_cost).sum();
    if build > inst.budget + 1e-9 {
        return fail(format!("build cost {build} exceeds budget {}", inst.budget));
    }
    if routes.len() != inst.vehicles.len() {
        return fail(format!(
            "{} routes for {} vehicles",
            routes.len(),
            inst.vehicles.len()
        ));
    }
    let mut served = vec![false; inst.demands.len()];
    let mut visits = vec![0u32; inst.stations.len()];
    let mut total = 0.0;
    for (v, route) in routes.iter().enumerate() {
        if route.vehicle != v {
            return fail(format!("route {v} belongs to vehicle {}", route.vehicle));
        }
        let cap = inst.vehicles[v].capacity;
        if route.states.len() != route.arcs.len() + 1 || route.arcs.is_empty() {
            return fail(format!("vehicle {v}: malformed route"));
        }
        let start = raw(net, route.states[0]);
        if !raw_origins(inst, v).contains(&start) {
            return fail(format!("vehicle {v}: bad start {start:?}"));
        }
        for (i, pair) in route.states.windows(2).enumerate() {
            let (from, to) = (raw(net, pair[0]), raw(net, pair[1]));
            let arc = &route.arcs[i];
            let exhaust = arc.kind == ArcKind::Exhaust;
            if exhaust != (i + 1 == route.arcs.len()) {
                return fail(format!("vehicle {v}: exhaust arc out of place at step {i}"));
            }
            let Some(raw_arc) = raw_successors(inst, v, from)
                .into_iter()
                .find(|a| a.to == to && a.exhaust == exhaust && (a.cost - arc.cost).abs() < 1e-9)
            else {
                return fail(format!("vehicle {v}: no arc {from:?} -> {to:?}"));
            };
            if to.resource < inst.resource_min || to.resource > cap {
                return fail(format!(
                    "vehicle {v}: resource {} out of range",
                    to.resource
                ));
            }
            if let Some(k) = raw_arc.recharge_at {
                if !selection.contains(&k) {
                    return fail(format!("vehicle {v}: charges at unbuilt station {k}"));
                }
                visits[k] += 1;
            }
            if let Some(d) = raw_arc.demand {
                served[d] = true;
            }
            total += raw_arc.cost;
        }
    }
    for (k, &n) in visits.iter().enumerate() {
        if n > inst.stations[k].capacity {
            return fail(format!(
                "station {k}: {n} visits over capacity {}",
                inst.stations[k].capacity
            ));
        }
    }
    let unserved: Vec<usize> = (0..served.len()).filter(|&d| !served[d]).collect();
    let expected = total + penalty * unserved.len() as f64;
    if (expected - objective).abs() > 1e-6 * expected.abs().max(1.0) {
        return fail(format!("objective {objective} but routes give {expected}"));
    }
    Ok(unserved)
}
