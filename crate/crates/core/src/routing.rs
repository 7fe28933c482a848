//! Single-vehicle minimum generalized cost routing.
//!
//! Arc costs may be negative (demand rewards), but every arc other than the
//! exhaust arc moves forward in time, so a label sweep in time order is
//! exact. Labels live in a dense time-major array for small grids and a
//! hash map otherwise; both visit reached states in discovery order per time
//! step so the two stores return identical routes.

use std::collections::HashMap;

use thiserror::Error;

use crate::instance::Vehicle;
use crate::multipliers::Multipliers;
use crate::rst::{ArcKind, RstArc, RstState, TransformedNetwork};

/// Grids with more states than this use the sparse label store.
pub const DENSE_STATE_LIMIT: usize = 4_000_000;

const NO_PRED: u32 = u32::MAX;

pub fn profit_arc_cost(arc: &RstArc, multipliers: &Multipliers) -> f64 {
    let mut c = arc.cost;
    if let Some(d) = arc.demand {
        c -= multipliers.epsilon[d];
    }
    if let ArcKind::Recharge { station } = arc.kind {
        c += multipliers.theta[station];
    }
    c
}

/// Which stations a vehicle may charge at (upper-bound mode).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationMask {
    allowed: Vec<bool>,
}

impl StationMask {
    pub fn new(forbidden: &[bool], remaining_capacity: &[u32]) -> Self {
        Self {
            allowed: forbidden
                .iter()
                .zip(remaining_capacity)
                .map(|(&f, &c)| !f && c > 0)
                .collect(),
        }
    }

    pub fn allows(&self, station: usize) -> bool {
        self.allowed[station]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleRoute {
    /// Index into `Instance::vehicles`.
    pub vehicle: usize,
    /// Origin state through the sink state reached by the exhaust arc.
    pub states: Vec<RstState>,
    pub arcs: Vec<RstArc>,
    pub generalized_cost: f64,
    pub base_cost: f64,
    /// Demand indices traversed, ascending.
    pub served_demands: Vec<usize>,
    /// Recharge-arc traversals per station.
    pub station_visits: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("vehicle {vehicle} has no feasible tour")]
pub struct Infeasible {
    pub vehicle: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("route is empty")]
    Empty,
    #[error("route does not start in the departure window at the initial resource")]
    BadStart,
    #[error("step {step}: no arc joins {from:?} to {to:?}")]
    Broken {
        step: usize,
        from: RstState,
        to: RstState,
    },
    #[error("route does not end with an exhaust arc at the destination")]
    BadEnd,
}

trait LabelStore {
    fn cost(&self, idx: usize) -> f64;
    fn pred(&self, idx: usize) -> (u32, u16);
    /// Returns true when `idx` had no label before.
    fn relax(&mut self, idx: usize, cost: f64, pred: u32, ordinal: u16) -> Option<bool>;
}

struct DenseLabels {
    cost: Vec<f64>,
    pred: Vec<u32>,
    ordinal: Vec<u16>,
}

impl DenseLabels {
    fn new(size: usize) -> Self {
        Self {
            cost: vec![f64::INFINITY; size],
            pred: vec![NO_PRED; size],
            ordinal: vec![0; size],
        }
    }
}

impl LabelStore for DenseLabels {
    #[inline]
    fn cost(&self, idx: usize) -> f64 {
        self.cost[idx]
    }

    fn pred(&self, idx: usize) -> (u32, u16) {
        (self.pred[idx], self.ordinal[idx])
    }

    #[inline]
    fn relax(&mut self, idx: usize, cost: f64, pred: u32, ordinal: u16) -> Option<bool> {
        let old = self.cost[idx];
        if cost < old {
            self.cost[idx] = cost;
            self.pred[idx] = pred;
            self.ordinal[idx] = ordinal;
            Some(old == f64::INFINITY)
        } else {
            None
        }
    }
}

#[derive(Default)]
struct SparseLabels {
    map: HashMap<usize, (f64, u32, u16)>,
}

impl LabelStore for SparseLabels {
    fn cost(&self, idx: usize) -> f64 {
        self.map.get(&idx).map_or(f64::INFINITY, |l| l.0)
    }

    fn pred(&self, idx: usize) -> (u32, u16) {
        self.map.get(&idx).map_or((NO_PRED, 0), |l| (l.1, l.2))
    }

    fn relax(&mut self, idx: usize, cost: f64, pred: u32, ordinal: u16) -> Option<bool> {
        match self.map.entry(idx) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                if cost < e.get().0 {
                    e.insert((cost, pred, ordinal));
                    Some(false)
                } else {
                    None
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert((cost, pred, ordinal));
                Some(true)
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Grid {
    nodes: usize,
    levels: usize,
    rmin: u32,
}

impl Grid {
    #[inline]
    fn index(&self, s: RstState) -> usize {
        ((s.time as usize * self.nodes) + s.node) * self.levels + (s.resource - self.rmin) as usize
    }

    fn state(&self, idx: usize) -> RstState {
        let resource = (idx % self.levels) as u32 + self.rmin;
        let rest = idx / self.levels;
        RstState::new(rest % self.nodes, (rest / self.nodes) as u32, resource)
    }
}

/// Minimum generalized cost tour of vehicle `vehicle` (index into the
/// instance). With a mask, recharge arcs of disallowed stations are skipped.
pub fn solve_single_vehicle(
    vehicle: usize,
    net: &TransformedNetwork,
    multipliers: &Multipliers,
    mask: Option<&StationMask>,
) -> Result<VehicleRoute, Infeasible> {
    let v = &net.instance().vehicles[vehicle];
    let t_end = v.arrive_window.hi.min(net.horizon());
    let grid = Grid {
        nodes: net.node_count(),
        levels: net.instance().resource_levels() as usize,
        rmin: net.resource_min(),
    };
    let size = (t_end as usize + 1) * grid.nodes * grid.levels;
    if size <= DENSE_STATE_LIMIT {
        sweep(
            vehicle,
            v,
            net,
            multipliers,
            mask,
            grid,
            t_end,
            DenseLabels::new(size),
        )
    } else {
        sweep(
            vehicle,
            v,
            net,
            multipliers,
            mask,
            grid,
            t_end,
            SparseLabels::default(),
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep<S: LabelStore>(
    vehicle: usize,
    v: &Vehicle,
    net: &TransformedNetwork,
    multipliers: &Multipliers,
    mask: Option<&StationMask>,
    grid: Grid,
    t_end: u32,
    mut labels: S,
) -> Result<VehicleRoute, Infeasible> {
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); t_end as usize + 1];
    // (cost, predecessor state index, arc ordinal) per sink time
    let mut sink: Vec<(f64, u32, u16)> = vec![(f64::INFINITY, NO_PRED, 0); t_end as usize + 1];
    let origin = net.origin_node(v);
    if v.initial_resource < grid.rmin || v.initial_resource > v.capacity {
        return Err(Infeasible { vehicle });
    }
    for t in v.depart_window.times() {
        if t > t_end {
            break;
        }
        let idx = grid.index(RstState::new(origin, t, v.initial_resource));
        if labels.relax(idx, 0.0, NO_PRED, 0) == Some(true) {
            buckets[t as usize].push(idx);
        }
    }

    for t in 0..=t_end as usize {
        let bucket = std::mem::take(&mut buckets[t]);
        for &idx in &bucket {
            let base = labels.cost(idx);
            let state = grid.state(idx);
            let mut ordinal: u16 = 0;
            net.for_each_outgoing(state, v, |arc| {
                let ord = ordinal;
                ordinal += 1;
                if let (ArcKind::Recharge { station }, Some(m)) = (arc.kind, mask) {
                    if !m.allows(station) {
                        return;
                    }
                }
                let c = base + profit_arc_cost(&arc, multipliers);
                if arc.kind == ArcKind::Exhaust {
                    let s = &mut sink[t];
                    if c < s.0 {
                        *s = (c, idx as u32, ord);
                    }
                    return;
                }
                if arc.to.time > t_end {
                    return;
                }
                let to = grid.index(arc.to);
                if labels.relax(to, c, idx as u32, ord) == Some(true) {
                    buckets[arc.to.time as usize].push(to);
                }
            });
        }
    }

    let mut best: Option<usize> = None;
    for t in v.arrive_window.times() {
        if t > t_end {
            break;
        }
        if sink[t as usize].0 < best.map_or(f64::INFINITY, |b| sink[b].0) {
            best = Some(t as usize);
        }
    }
    let best = best.ok_or(Infeasible { vehicle })?;
    let (generalized_cost, mut idx, mut ordinal) = sink[best];

    let mut arcs = Vec::new();
    loop {
        let from = grid.state(idx as usize);
        let arc = net
            .outgoing_arcs(from, v)
            .get(ordinal as usize)
            .copied()
            .expect("predecessor arc ordinal out of range");
        arcs.push(arc);
        let (p, o) = labels.pred(idx as usize);
        if p == NO_PRED {
            break;
        }
        idx = p;
        ordinal = o;
    }
    arcs.reverse();
    Ok(build_route(vehicle, net, arcs, generalized_cost))
}

fn build_route(
    vehicle: usize,
    net: &TransformedNetwork,
    arcs: Vec<RstArc>,
    generalized_cost: f64,
) -> VehicleRoute {
    let mut states = Vec::with_capacity(arcs.len() + 1);
    states.push(arcs[0].from);
    states.extend(arcs.iter().map(|a| a.to));
    let mut served: Vec<usize> = arcs.iter().filter_map(|a| a.demand).collect();
    served.sort_unstable();
    let mut station_visits = vec![0; net.instance().stations.len()];
    for a in &arcs {
        if let ArcKind::Recharge { station } = a.kind {
            station_visits[station] += 1;
        }
    }
    VehicleRoute {
        vehicle,
        states,
        base_cost: arcs.iter().map(|a| a.cost).sum(),
        arcs,
        generalized_cost,
        served_demands: served,
        station_visits,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub base_cost: f64,
    pub served_demands: Vec<usize>,
    pub station_visits: Vec<u32>,
}

/// Re-derives cost and tallies of `route` by re-enumerating each arc.
pub fn replay_route(route: &VehicleRoute, net: &TransformedNetwork) -> Result<Replay, ReplayError> {
    let v = &net.instance().vehicles[route.vehicle];
    let first = *route.states.first().ok_or(ReplayError::Empty)?;
    if first.node != net.origin_node(v)
        || !v.depart_window.contains(first.time)
        || first.resource != v.initial_resource
    {
        return Err(ReplayError::BadStart);
    }
    if route.states.len() != route.arcs.len() + 1 {
        return Err(ReplayError::Empty);
    }
    let mut base_cost = 0.0;
    let mut served = Vec::new();
    let mut visits = vec![0; net.instance().stations.len()];
    for (step, pair) in route.states.windows(2).enumerate() {
        let (from, to) = (pair[0], pair[1]);
        let declared = route.arcs[step];
        let arc = net
            .outgoing_arcs(from, v)
            .into_iter()
            .find(|a| a.to == to && a.kind == declared.kind)
            .ok_or(ReplayError::Broken { step, from, to })?;
        let last = step + 1 == route.arcs.len();
        if (arc.kind == ArcKind::Exhaust) != last {
            return Err(ReplayError::BadEnd);
        }
        base_cost += arc.cost;
        served.extend(arc.demand);
        if let ArcKind::Recharge { station } = arc.kind {
            visits[station] += 1;
        }
    }
    served.sort_unstable();
    Ok(Replay {
        base_cost,
        served_demands: served,
        station_visits: visits,
    })
}

/// Builds a route through the given states, filling gaps between equal
/// node and resource with wait arcs, and closes it with the exhaust arc.
pub fn route_from_waypoints(
    vehicle: usize,
    net: &TransformedNetwork,
    waypoints: &[RstState],
    multipliers: &Multipliers,
) -> Result<VehicleRoute, ReplayError> {
    let v = &net.instance().vehicles[vehicle];
    let mut cur = *waypoints.first().ok_or(ReplayError::Empty)?;
    let mut arcs = Vec::new();
    for (step, &next) in waypoints.iter().enumerate().skip(1) {
        let out = net.outgoing_arcs(cur, v);
        if let Some(a) = out
            .iter()
            .find(|a| a.to == next && a.kind != ArcKind::Exhaust)
        {
            arcs.push(*a);
        } else if next.node == cur.node && next.resource == cur.resource && next.time > cur.time {
            while cur.time < next.time {
                let wait = net
                    .outgoing_arcs(cur, v)
                    .into_iter()
                    .find(|a| a.kind == ArcKind::Wait)
                    .ok_or(ReplayError::Broken {
                        step,
                        from: cur,
                        to: next,
                    })?;
                arcs.push(wait);
                cur = wait.to;
            }
        } else {
            return Err(ReplayError::Broken {
                step,
                from: cur,
                to: next,
            });
        }
        cur = next;
    }
    let exhaust = net
        .outgoing_arcs(cur, v)
        .into_iter()
        .find(|a| a.kind == ArcKind::Exhaust)
        .ok_or(ReplayError::BadEnd)?;
    arcs.push(exhaust);
    let generalized_cost = arcs.iter().map(|a| profit_arc_cost(a, multipliers)).sum();
    let route = build_route(vehicle, net, arcs, generalized_cost);
    replay_route(&route, net)?;
    Ok(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{InstanceBuilder, PenaltySpec};
    use crate::rst::transform_stations;

    #[test]
    fn profit_substitution() {
        let arc = |kind, demand| RstArc {
            from: RstState::new(0, 0, 0),
            to: RstState::new(1, 1, 0),
            cost: 2.0,
            kind,
            demand,
        };
        let m = Multipliers {
            epsilon: vec![5.0],
            theta: vec![1.5],
        };
        let zero = Multipliers {
            epsilon: vec![0.0],
            theta: vec![0.0],
        };
        assert_eq!(profit_arc_cost(&arc(ArcKind::Travel, None), &zero), 2.0);
        assert_eq!(profit_arc_cost(&arc(ArcKind::Travel, Some(0)), &m), -3.0);
        let mut r = arc(ArcKind::Recharge { station: 0 }, None);
        r.cost = 0.0;
        assert_eq!(profit_arc_cost(&r, &m), 1.5);
    }

    #[test]
    fn one_arc_network() {
        let mut b = InstanceBuilder::new(5, 0, 10);
        b.option("o", "d", crate::instance::ArcOption::new(2, 3.0, -4));
        b.vehicle("v", "o", "d", (0, 0), (2, 5), 10, 6);
        let inst = b.build();
        let net = transform_stations(&inst);
        let route = solve_single_vehicle(0, &net, &Multipliers::zeros(&inst), None).unwrap();
        assert_eq!(route.base_cost, 3.0);
        assert_eq!(route.arcs.len(), 2);
        assert_eq!(route.arcs[1].kind, ArcKind::Exhaust);
        assert_eq!(route.states[1], RstState::new(1, 2, 2));
    }

    #[test]
    fn large_reward_gives_negative_cost() {
        let mut b = InstanceBuilder::new(5, 0, 10);
        b.edge("o", "d", 2);
        b.demand("o", "d", 0, 2);
        b.penalty(PenaltySpec::Fixed(100.0));
        b.vehicle("v", "o", "d", (0, 0), (2, 5), 10, 6);
        let inst = b.build();
        let net = transform_stations(&inst);
        let m = Multipliers {
            epsilon: vec![9.0],
            theta: vec![],
        };
        let route = solve_single_vehicle(0, &net, &m, None).unwrap();
        assert!(route.generalized_cost < 0.0);
        assert!(route.base_cost > 0.0);
        assert_eq!(route.served_demands, vec![0]);
    }

    #[test]
    fn infeasible_without_charge() {
        let mut b = InstanceBuilder::new(10, 0, 10);
        b.edge("o", "s", 2).edge("s", "d", 2);
        b.station("s", 1.0, 1, &[(1, 10)]);
        b.vehicle("v", "o", "d", (0, 0), (0, 10), 10, 5);
        let inst = b.build();
        let net = transform_stations(&inst);
        let zero = Multipliers::zeros(&inst);
        let route = solve_single_vehicle(0, &net, &zero, None).unwrap();
        assert_eq!(route.station_visits, vec![1]);
        assert_eq!(replay_route(&route, &net).unwrap().station_visits, vec![1]);
        let mask = StationMask::new(&[true], &[1]);
        assert_eq!(
            solve_single_vehicle(0, &net, &zero, Some(&mask)),
            Err(Infeasible { vehicle: 0 })
        );
        let mask = StationMask::new(&[false], &[0]);
        assert!(solve_single_vehicle(0, &net, &zero, Some(&mask)).is_err());
    }

    #[test]
    fn dense_and_sparse_agree() {
        let mut b = InstanceBuilder::new(12, 0, 12);
        b.edge("a", "b", 1)
            .edge("b", "c", 2)
            .edge("a", "c", 2)
            .edge("c", "s", 1);
        b.station("s", 1.0, 2, &[(1, 4), (2, 12)]);
        b.demand("b", "c", 3, 5).demand("c", "s", 6, 7);
        b.vehicle("v", "a", "a", (0, 2), (8, 12), 12, 6);
        let inst = b.build();
        let net = transform_stations(&inst);
        let m = Multipliers {
            epsilon: vec![4.0, 2.5],
            theta: vec![0.5],
        };
        let v = &inst.vehicles[0];
        let grid = Grid {
            nodes: net.node_count(),
            levels: inst.resource_levels() as usize,
            rmin: 0,
        };
        let size = 13 * grid.nodes * grid.levels;
        let dense = sweep(0, v, &net, &m, None, grid, 12, DenseLabels::new(size)).unwrap();
        let sparse = sweep(0, v, &net, &m, None, grid, 12, SparseLabels::default()).unwrap();
        assert_eq!(dense, sparse);
        let traced: f64 = dense.arcs.iter().map(|a| profit_arc_cost(a, &m)).sum();
        assert!((traced - dense.generalized_cost).abs() < 1e-9);
    }
}
