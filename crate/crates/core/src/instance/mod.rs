//! Problem input: physical network, arc options, candidate stations,
//! vehicles, time-dependent demand links and the construction budget.
//!
//! Times and resource levels live on an integer unit grid. Resource deltas
//! are signed: consumption is negative, recharging positive, and a vehicle
//! at level `r` traversing an option with delta `d` arrives at `r + d`.

mod text;
mod validate;

pub use text::{parse_instance, write_instance, ParseError};
pub use validate::{validate_instance, Violation, ViolationCode};

/// Dense index of a physical node.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalNode {
    pub id: NodeId,
    pub name: String,
}

/// One way of traversing a physical link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcOption {
    pub travel_time: u32,
    pub travel_cost: f64,
    pub resource_delta: i32,
}

impl ArcOption {
    pub fn new(travel_time: u32, travel_cost: f64, resource_delta: i32) -> Self {
        Self {
            travel_time,
            travel_cost,
            resource_delta,
        }
    }

    /// Default option: cost equals travel time and the vehicle burns two
    /// resource units per time unit.
    pub fn with_default_costs(travel_time: u32) -> Self {
        Self::new(travel_time, f64::from(travel_time), -2 * travel_time as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalLink {
    pub from: NodeId,
    pub to: NodeId,
    pub options: Vec<ArcOption>,
}

/// One entry of a station's equipment curve: charging for `duration` time
/// units adds `gain` resource units (clamped at the vehicle capacity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RechargeStep {
    pub duration: u32,
    pub gain: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub node: NodeId,
    pub build_cost: f64,
    /// Vehicle visits the station can serve over the horizon.
    pub capacity: u32,
    pub profile: Vec<RechargeStep>,
    /// Per-unit price of recharged resource; zero keeps recharging free.
    pub unit_price: f64,
}

/// Inclusive integer time interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub lo: u32,
    pub hi: u32,
}

impl TimeWindow {
    pub fn new(lo: u32, hi: u32) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, t: u32) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn times(&self) -> std::ops::RangeInclusive<u32> {
        self.lo..=self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: String,
    pub origin: NodeId,
    pub destination: NodeId,
    pub depart_window: TimeWindow,
    pub arrive_window: TimeWindow,
    pub capacity: u32,
    pub initial_resource: u32,
}

/// A required traversal of `from -> to` leaving at `depart` and arriving at
/// `arrive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemandLink {
    pub from: NodeId,
    pub to: NodeId,
    pub depart: u32,
    pub arrive: u32,
}

/// Cost charged for each demand left to a virtual vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltySpec {
    /// Sum of all option costs plus one, so any real service is cheaper.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub nodes: Vec<PhysicalNode>,
    pub links: Vec<PhysicalLink>,
    pub stations: Vec<Station>,
    pub vehicles: Vec<Vehicle>,
    pub demands: Vec<DemandLink>,
    pub budget: f64,
    pub horizon: u32,
    pub resource_max: u32,
    pub resource_min: u32,
    pub penalty: PenaltySpec,
}

impl Instance {
    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id].name
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Option<&PhysicalLink> {
        self.links.iter().find(|l| l.from == from && l.to == to)
    }

    pub fn option(&self, from: NodeId, to: NodeId, travel_time: u32) -> Option<&ArcOption> {
        self.link(from, to)?
            .options
            .iter()
            .find(|o| o.travel_time == travel_time)
    }

    /// Index of the station located at `node`, if any.
    pub fn station_at(&self, node: NodeId) -> Option<usize> {
        self.stations.iter().position(|s| s.node == node)
    }

    pub fn virtual_penalty(&self) -> f64 {
        match self.penalty {
            PenaltySpec::Fixed(p) => p,
            PenaltySpec::Auto => {
                self.links
                    .iter()
                    .flat_map(|l| l.options.iter())
                    .map(|o| o.travel_cost)
                    .sum::<f64>()
                    + 1.0
            }
        }
    }

    /// Number of resource levels on the grid.
    pub fn resource_levels(&self) -> u32 {
        self.resource_max.saturating_sub(self.resource_min) + 1
    }
}

/// Incremental construction of instances from code (generators, tests).
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    inst: Instance,
}

impl InstanceBuilder {
    pub fn new(horizon: u32, resource_min: u32, resource_max: u32) -> Self {
        Self {
            inst: Instance {
                nodes: Vec::new(),
                links: Vec::new(),
                stations: Vec::new(),
                vehicles: Vec::new(),
                demands: Vec::new(),
                budget: 0.0,
                horizon,
                resource_max,
                resource_min,
                penalty: PenaltySpec::Auto,
            },
        }
    }

    pub fn budget(&mut self, budget: f64) -> &mut Self {
        self.inst.budget = budget;
        self
    }

    pub fn penalty(&mut self, penalty: PenaltySpec) -> &mut Self {
        self.inst.penalty = penalty;
        self
    }

    /// Returns the id of `name`, adding the node if it is new.
    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(id) = self.inst.node_id(name) {
            return id;
        }
        let id = self.inst.nodes.len();
        self.inst.nodes.push(PhysicalNode {
            id,
            name: name.to_string(),
        });
        id
    }

    pub fn option(&mut self, from: &str, to: &str, option: ArcOption) -> &mut Self {
        let (from, to) = (self.node(from), self.node(to));
        match self
            .inst
            .links
            .iter_mut()
            .find(|l| l.from == from && l.to == to)
        {
            Some(link) => link.options.push(option),
            None => self.inst.links.push(PhysicalLink {
                from,
                to,
                options: vec![option],
            }),
        }
        self
    }

    /// Adds the same travel time in both directions with the default
    /// cost and consumption.
    pub fn edge(&mut self, a: &str, b: &str, travel_time: u32) -> &mut Self {
        self.option(a, b, ArcOption::with_default_costs(travel_time));
        self.option(b, a, ArcOption::with_default_costs(travel_time))
    }

    pub fn station(
        &mut self,
        node: &str,
        build_cost: f64,
        capacity: u32,
        profile: &[(u32, u32)],
    ) -> &mut Self {
        let node = self.node(node);
        self.inst.stations.push(Station {
            node,
            build_cost,
            capacity,
            profile: profile
                .iter()
                .map(|&(duration, gain)| RechargeStep { duration, gain })
                .collect(),
            unit_price: 0.0,
        });
        self
    }

    #[allow(clippy::too_many_arguments)]
    pub fn vehicle(
        &mut self,
        id: &str,
        origin: &str,
        destination: &str,
        depart: (u32, u32),
        arrive: (u32, u32),
        capacity: u32,
        initial_resource: u32,
    ) -> &mut Self {
        let (origin, destination) = (self.node(origin), self.node(destination));
        self.inst.vehicles.push(Vehicle {
            id: id.to_string(),
            origin,
            destination,
            depart_window: TimeWindow::new(depart.0, depart.1),
            arrive_window: TimeWindow::new(arrive.0, arrive.1),
            capacity,
            initial_resource,
        });
        self
    }

    pub fn demand(&mut self, from: &str, to: &str, depart: u32, arrive: u32) -> &mut Self {
        let (from, to) = (self.node(from), self.node(to));
        self.inst.demands.push(DemandLink {
            from,
            to,
            depart,
            arrive,
        });
        self
    }

    pub fn build(&self) -> Instance {
        self.inst.clone()
    }
}
