//! Implicit resource-space-time (RST) hyper-network.
//!
//! Nothing is materialized: [`TransformedNetwork::for_each_outgoing`] yields
//! the arcs leaving one `(node, time, resource)` state for one vehicle.
//! Every arc except the zero-duration exhaust arc strictly advances time, so
//! the graph is acyclic and a single forward sweep in time order suffices.

mod speed;

pub use speed::{consumption_rate, derive_arc_options, SpeedError};

use crate::instance::{Instance, NodeId, Vehicle};

/// Index of a node of the transformed network (station nodes are split).
pub type NetNodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RstState {
    pub node: NetNodeId,
    pub time: u32,
    pub resource: u32,
}

impl RstState {
    pub fn new(node: NetNodeId, time: u32, resource: u32) -> Self {
        Self {
            node,
            time,
            resource,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcKind {
    Travel,
    /// Passing a station without charging.
    Bypass,
    Wait,
    Recharge {
        station: usize,
    },
    /// Drops the remaining resource at the destination; enters the sink.
    Exhaust,
}

impl ArcKind {
    pub fn label(&self) -> &'static str {
        match self {
            ArcKind::Travel => "travel",
            ArcKind::Bypass => "bypass",
            ArcKind::Wait => "wait",
            ArcKind::Recharge { .. } => "recharge",
            ArcKind::Exhaust => "exhaust",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RstArc {
    pub from: RstState,
    pub to: RstState,
    /// Travel (or recharge) cost without multipliers.
    pub cost: f64,
    pub kind: ArcKind,
    /// Index into `Instance::demands` when this arc's space-time projection
    /// is a demand link.
    pub demand: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Plain(NodeId),
    StationIn { station: usize, physical: NodeId },
    StationOut { station: usize, physical: NodeId },
}

impl NodeRole {
    pub fn physical(&self) -> NodeId {
        match *self {
            NodeRole::Plain(p)
            | NodeRole::StationIn { physical: p, .. }
            | NodeRole::StationOut { physical: p, .. } => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetNode {
    pub name: String,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq)]
struct TravelEdge {
    to: NetNodeId,
    travel_time: u32,
    cost: f64,
    delta: i32,
    bypass: bool,
    /// `(departure time, demand index)` pairs, sorted by time.
    demands: Vec<(u32, usize)>,
}

impl TravelEdge {
    fn demand_at(&self, t: u32) -> Option<usize> {
        if self.demands.is_empty() {
            return None;
        }
        self.demands
            .binary_search_by_key(&t, |&(time, _)| time)
            .ok()
            .map(|i| self.demands[i].1)
    }
}

/// The physical network after every candidate station `k` has been split
/// into `k` (inbound side) and `k'` (outbound side). Inbound links end at
/// `k`, outbound links leave from `k'`; the two are joined by a one-unit
/// bypass arc and one recharge arc per profile entry.
#[derive(Debug, Clone)]
pub struct TransformedNetwork {
    inst: Instance,
    nodes: Vec<NetNode>,
    entry: Vec<NetNodeId>,
    exit: Vec<NetNodeId>,
    edges: Vec<Vec<TravelEdge>>,
    /// Station index for station-in nodes.
    station_of_in: Vec<Option<usize>>,
}

/// Splits station nodes and precomputes adjacency and demand lookups.
pub fn transform_stations(inst: &Instance) -> TransformedNetwork {
    let mut nodes = Vec::with_capacity(inst.nodes.len() + inst.stations.len());
    let mut entry = Vec::with_capacity(inst.nodes.len());
    let mut exit = Vec::with_capacity(inst.nodes.len());
    for node in &inst.nodes {
        let id = nodes.len();
        entry.push(id);
        exit.push(id);
        nodes.push(NetNode {
            name: node.name.clone(),
            role: NodeRole::Plain(node.id),
        });
    }
    let mut station_of_in = vec![None; nodes.len()];
    for (k, station) in inst.stations.iter().enumerate() {
        let p = station.node;
        let k_in = entry[p];
        nodes[k_in].role = NodeRole::StationIn {
            station: k,
            physical: p,
        };
        station_of_in[k_in] = Some(k);
        let k_out = nodes.len();
        nodes.push(NetNode {
            name: format!("{}'", inst.nodes[p].name),
            role: NodeRole::StationOut {
                station: k,
                physical: p,
            },
        });
        station_of_in.push(None);
        exit[p] = k_out;
    }

    let mut edges: Vec<Vec<TravelEdge>> = vec![Vec::new(); nodes.len()];
    for link in &inst.links {
        for option in &link.options {
            let mut demands: Vec<(u32, usize)> = inst
                .demands
                .iter()
                .enumerate()
                .filter(|(_, d)| {
                    d.from == link.from
                        && d.to == link.to
                        && d.arrive.checked_sub(d.depart) == Some(option.travel_time)
                })
                .map(|(i, d)| (d.depart, i))
                .collect();
            demands.sort_unstable();
            demands.dedup_by_key(|&mut (t, _)| t);
            edges[exit[link.from]].push(TravelEdge {
                to: entry[link.to],
                travel_time: option.travel_time,
                cost: option.travel_cost,
                delta: option.resource_delta,
                bypass: false,
                demands,
            });
        }
    }
    for station in &inst.stations {
        let p = station.node;
        edges[entry[p]].push(TravelEdge {
            to: exit[p],
            travel_time: 1,
            cost: 0.0,
            delta: 0,
            bypass: true,
            demands: Vec::new(),
        });
    }
    for list in &mut edges {
        list.sort_by_key(|e| (e.to, e.travel_time));
    }

    TransformedNetwork {
        inst: inst.clone(),
        nodes,
        entry,
        exit,
        edges,
        station_of_in,
    }
}

impl TransformedNetwork {
    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_name(&self, id: NetNodeId) -> &str {
        &self.nodes[id].name
    }

    pub fn node_id(&self, name: &str) -> Option<NetNodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Node at which arrivals to physical node `p` land.
    pub fn entry(&self, p: NodeId) -> NetNodeId {
        self.entry[p]
    }

    /// Node from which departures from physical node `p` leave.
    pub fn exit(&self, p: NodeId) -> NetNodeId {
        self.exit[p]
    }

    pub fn station_in(&self, k: usize) -> NetNodeId {
        self.entry[self.inst.stations[k].node]
    }

    pub fn station_out(&self, k: usize) -> NetNodeId {
        self.exit[self.inst.stations[k].node]
    }

    /// Vehicles start on the inbound side so they may charge before leaving.
    pub fn origin_node(&self, v: &Vehicle) -> NetNodeId {
        self.entry[v.origin]
    }

    pub fn destination_node(&self, v: &Vehicle) -> NetNodeId {
        self.entry[v.destination]
    }

    pub fn horizon(&self) -> u32 {
        self.inst.horizon
    }

    pub fn resource_min(&self) -> u32 {
        self.inst.resource_min
    }

    pub fn resource_max(&self) -> u32 {
        self.inst.resource_max
    }

    pub fn in_grid(&self, s: RstState) -> bool {
        s.node < self.nodes.len()
            && s.time <= self.inst.horizon
            && s.resource >= self.inst.resource_min
            && s.resource <= self.inst.resource_max
    }

    /// Number of travel options (including bypass arcs) leaving `node`.
    pub fn travel_degree(&self, node: NetNodeId) -> usize {
        self.edges[node].len()
    }

    /// Calls `f` for every arc leaving `state` that `vehicle` may use, in the
    /// fixed order: travel by (to-node, travel time), wait, recharge,
    /// exhaust. Candidates leaving the grid or the vehicle's resource range
    /// are skipped.
    #[inline]
    pub fn for_each_outgoing(&self, state: RstState, vehicle: &Vehicle, mut f: impl FnMut(RstArc)) {
        let horizon = self.inst.horizon;
        let r_min = self.inst.resource_min as i64;
        let cap = vehicle.capacity.min(self.inst.resource_max);
        if state.resource > cap {
            // Only the exhaust arc can be valid for an over-full state, and
            // such states are unreachable for this vehicle anyway.
            return;
        }
        let t = state.time;
        let r = state.resource as i64;

        for e in &self.edges[state.node] {
            let t2 = t + e.travel_time;
            let r2 = r + e.delta as i64;
            if t2 > horizon || r2 < r_min || r2 > cap as i64 {
                continue;
            }
            f(RstArc {
                from: state,
                to: RstState::new(e.to, t2, r2 as u32),
                cost: e.cost,
                kind: if e.bypass {
                    ArcKind::Bypass
                } else {
                    ArcKind::Travel
                },
                demand: e.demand_at(t),
            });
        }

        if t < horizon {
            f(RstArc {
                from: state,
                to: RstState::new(state.node, t + 1, state.resource),
                cost: 0.0,
                kind: ArcKind::Wait,
                demand: None,
            });
        }

        if let Some(k) = self.station_of_in[state.node] {
            let station = &self.inst.stations[k];
            let out = self.exit[station.node];
            for step in &station.profile {
                let t2 = t + step.duration;
                if t2 > horizon {
                    continue;
                }
                let r2 = (state.resource + step.gain).min(cap);
                f(RstArc {
                    from: state,
                    to: RstState::new(out, t2, r2),
                    cost: station.unit_price * f64::from(r2 - state.resource),
                    kind: ArcKind::Recharge { station: k },
                    demand: None,
                });
            }
        }

        if state.node == self.entry[vehicle.destination] && vehicle.arrive_window.contains(t) {
            f(RstArc {
                from: state,
                to: RstState::new(state.node, t, self.inst.resource_min),
                cost: 0.0,
                kind: ArcKind::Exhaust,
                demand: None,
            });
        }
    }

    /// Collecting form of [`Self::for_each_outgoing`].
    pub fn outgoing_arcs(&self, state: RstState, vehicle: &Vehicle) -> Vec<RstArc> {
        let mut arcs = Vec::new();
        self.for_each_outgoing(state, vehicle, |a| arcs.push(a));
        arcs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceBuilder;

    fn line_instance() -> Instance {
        let mut b = InstanceBuilder::new(6, 0, 10);
        b.edge("a", "b", 2).edge("b", "c", 1);
        b.vehicle("v", "a", "c", (0, 1), (3, 6), 10, 8);
        b.build()
    }

    #[test]
    fn zero_stations_keeps_the_network() {
        let inst = line_instance();
        let net = transform_stations(&inst);
        assert_eq!(net.node_count(), inst.nodes.len());
        for node in &inst.nodes {
            assert_eq!(net.entry(node.id), node.id);
            assert_eq!(net.exit(node.id), node.id);
            assert_eq!(net.node_name(node.id), node.name);
        }
        let degree: usize = (0..net.node_count()).map(|n| net.travel_degree(n)).sum();
        assert_eq!(degree, 4);
    }

    #[test]
    fn station_split_counts() {
        let mut b = InstanceBuilder::new(6, 0, 30);
        b.edge("x", "a", 1);
        b.station("a", 10.0, 3, &[(1, 10), (2, 20)]);
        b.vehicle("v", "x", "x", (0, 0), (6, 6), 30, 0);
        let inst = b.build();
        let net = transform_stations(&inst);
        assert_eq!(net.node_count(), 3);
        let (k_in, k_out) = (net.station_in(0), net.station_out(0));
        assert_eq!(net.node_name(k_out), "a'");
        let arcs = net.outgoing_arcs(RstState::new(k_in, 0, 0), &inst.vehicles[0]);
        let recharge = arcs
            .iter()
            .filter(|a| matches!(a.kind, ArcKind::Recharge { .. }))
            .count();
        let bypass: Vec<_> = arcs.iter().filter(|a| a.kind == ArcKind::Bypass).collect();
        assert_eq!(recharge, 2);
        assert_eq!(bypass.len(), 1);
        assert_eq!(bypass[0].to, RstState::new(k_out, 1, 0));
        // inbound lands on k, outbound leaves from k'
        let x = inst.node_id("x").unwrap();
        let from_x = net.outgoing_arcs(RstState::new(x, 0, 10), &inst.vehicles[0]);
        assert!(from_x
            .iter()
            .any(|a| a.to.node == k_in && a.kind == ArcKind::Travel));
        let from_out = net.outgoing_arcs(RstState::new(k_out, 0, 10), &inst.vehicles[0]);
        assert!(from_out
            .iter()
            .any(|a| a.to.node == x && a.kind == ArcKind::Travel));
        assert!(!from_out
            .iter()
            .any(|a| a.to.node == x && a.from.node == k_in));
    }

    #[test]
    fn exhaust_arc_inside_arrival_window() {
        let inst = line_instance();
        let net = transform_stations(&inst);
        let c = inst.node_id("c").unwrap();
        let arcs = net.outgoing_arcs(RstState::new(c, 4, 5), &inst.vehicles[0]);
        let exhaust: Vec<_> = arcs.iter().filter(|a| a.kind == ArcKind::Exhaust).collect();
        assert_eq!(exhaust.len(), 1);
        assert_eq!(exhaust[0].to, RstState::new(c, 4, 0));
        assert_eq!(*arcs.last().unwrap(), *exhaust[0]);

        let early = net.outgoing_arcs(RstState::new(c, 2, 5), &inst.vehicles[0]);
        assert!(early.iter().all(|a| a.kind != ArcKind::Exhaust));
    }

    #[test]
    fn nothing_but_exhaust_at_the_horizon() {
        let inst = line_instance();
        let net = transform_stations(&inst);
        let a = inst.node_id("a").unwrap();
        assert!(net
            .outgoing_arcs(RstState::new(a, 6, 5), &inst.vehicles[0])
            .is_empty());
        let c = inst.node_id("c").unwrap();
        let arcs = net.outgoing_arcs(RstState::new(c, 6, 5), &inst.vehicles[0]);
        assert_eq!(arcs.len(), 1);
        assert_eq!(arcs[0].kind, ArcKind::Exhaust);
    }

    #[test]
    fn enumeration_order_is_travel_wait_recharge_exhaust() {
        let mut b = InstanceBuilder::new(10, 0, 20);
        b.edge("d", "s", 1).edge("s", "e", 2);
        b.option("s", "e", crate::instance::ArcOption::new(1, 1.0, -6));
        b.station("s", 1.0, 1, &[(1, 5)]);
        b.vehicle("v", "s", "s", (0, 0), (0, 10), 20, 10);
        let inst = b.build();
        let net = transform_stations(&inst);
        let s = net.station_in(0);
        let kinds: Vec<&str> = net
            .outgoing_arcs(RstState::new(s, 2, 10), &inst.vehicles[0])
            .iter()
            .map(|a| a.kind.label())
            .collect();
        assert_eq!(kinds, ["bypass", "wait", "recharge", "exhaust"]);
        let out = net.station_out(0);
        let arcs = net.outgoing_arcs(RstState::new(out, 2, 10), &inst.vehicles[0]);
        let travel: Vec<(usize, u32)> = arcs
            .iter()
            .filter(|a| a.kind == ArcKind::Travel)
            .map(|a| (a.to.node, a.to.time - 2))
            .collect();
        let d = inst.node_id("d").unwrap();
        let e = inst.node_id("e").unwrap();
        let mut expected = vec![(d, 1), (e, 1), (e, 2)];
        expected.sort();
        assert_eq!(travel, expected);
    }

    #[test]
    fn demand_arcs_are_tagged() {
        let mut b = InstanceBuilder::new(10, 0, 20);
        b.edge("a", "b", 2);
        b.demand("a", "b", 3, 5);
        b.vehicle("v", "a", "a", (0, 0), (0, 10), 20, 10);
        let inst = b.build();
        let net = transform_stations(&inst);
        let arcs_at = |t| net.outgoing_arcs(RstState::new(0, t, 10), &inst.vehicles[0]);
        assert_eq!(arcs_at(3)[0].demand, Some(0));
        assert_eq!(arcs_at(4)[0].demand, None);
    }
}
