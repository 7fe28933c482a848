//! Text artifacts of a solver run.

use std::fmt::Write as _;

use crate::instance::Instance;
use crate::lagrangian::{IterationRecord, SolveResult, SolverConfig, StepRule};
use crate::routing::{replay_route, ReplayError, VehicleRoute};
use crate::rst::TransformedNetwork;

pub const BOUNDS_HEADER: &str =
    "iteration,step_size,lb,ub,best_lb,best_ub,gap,stations,unserved,iter_wall_ms";

fn station_names(inst: &Instance, ids: &[usize]) -> String {
    ids.iter()
        .map(|&k| inst.node_name(inst.stations[k].node))
        .collect::<Vec<_>>()
        .join(";")
}

/// One row per iteration. With `wall_clock` off the timing column is 0,
/// which makes the file a pure function of instance and config.
pub fn bounds_csv(inst: &Instance, trace: &[IterationRecord], wall_clock: bool) -> String {
    let mut out = String::from(BOUNDS_HEADER);
    out.push('\n');
    for r in trace {
        let wall = if wall_clock { r.wall_ms } else { 0.0 };
        let unserved = if r.upper_bound.is_finite() {
            r.unserved.len().to_string()
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.3}",
            r.iteration,
            r.step_size,
            r.lower_bound,
            r.upper_bound,
            r.best_lower,
            r.best_upper,
            r.gap,
            station_names(inst, &r.ub_selection),
            unserved,
            wall
        );
    }
    out
}

/// `vehicle,node,time,resource,arc_kind,arc_cost` per arc; every route is
/// replayed first and nothing is written if one fails.
pub fn routes_report(
    net: &TransformedNetwork,
    routes: &[VehicleRoute],
) -> Result<String, ReplayError> {
    let inst = net.instance();
    let mut out = String::from("vehicle,node,time,resource,arc_kind,arc_cost\n");
    for route in routes {
        replay_route(route, net)?;
        let id = &inst.vehicles[route.vehicle].id;
        for arc in &route.arcs {
            let _ = writeln!(
                out,
                "{id},{},{},{},{},{}",
                net.node_name(arc.from.node),
                arc.from.time,
                arc.from.resource,
                arc.kind.label(),
                arc.cost
            );
        }
    }
    Ok(out)
}

pub fn selection_report(inst: &Instance, selection: &[usize], routes: &[VehicleRoute]) -> String {
    let mut out = String::from("station,build_cost,capacity,selected,visits\n");
    for (k, s) in inst.stations.iter().enumerate() {
        let visits: u32 = routes.iter().map(|r| r.station_visits[k]).sum();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            inst.node_name(s.node),
            s.build_cost,
            s.capacity,
            u8::from(selection.contains(&k)),
            visits
        );
    }
    out
}

pub fn metadata(instance_path: &str, config: &SolverConfig, result: &SolveResult) -> String {
    let step = match config.step {
        StepRule::Harmonic => "harmonic",
        StepRule::Ratio => "ratio",
    };
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    kv("instance", instance_path.to_string());
    kv("max_iters", config.max_iterations.to_string());
    kv("term_delta", config.term_delta.to_string());
    kv(
        "penalty",
        config.penalty.map_or("auto".into(), |p| p.to_string()),
    );
    kv("penalty_value", result.penalty.to_string());
    kv("step", step.into());
    kv(
        "seed",
        config
            .ordering_seed
            .map_or(String::new(), |s| s.to_string()),
    );
    kv("complete_selection", config.complete_selection.to_string());
    kv("stall_patience", config.stall_patience.to_string());
    kv("improve_rounds", config.improve_rounds.to_string());
    kv("quantum", config.quantum.to_string());
    kv("iterations", result.trace.len().to_string());
    kv(
        "termination",
        format!("{:?}", result.termination).to_lowercase(),
    );
    kv("best_lb", result.best_lower.to_string());
    kv("best_ub", result.best_upper.to_string());
    kv("gap", result.gap().to_string());
    let total_ms: f64 = result.trace.iter().map(|r| r.wall_ms).sum();
    kv("wall_ms_total", format!("{total_ms:.3}"));
    out
}
