use std::collections::HashSet;
use std::fmt;

use super::{Instance, NodeId, TimeWindow};

/// Machine-readable classification of an instance defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    InvalidGrid,
    DuplicateNodeName,
    DanglingReference,
    EmptyLink,
    ZeroTravelTime,
    DuplicateOption,
    PositiveTravelDelta,
    NegativeCost,
    DuplicateStation,
    NegativeBuildCost,
    EmptyProfile,
    InvalidRechargeStep,
    NonMonotoneProfile,
    NegativeBudget,
    NonPositivePenalty,
    InvertedWindow,
    WindowOutOfHorizon,
    DepartAfterArrive,
    CapacityAboveGrid,
    InitialResourceOutOfRange,
    DemandTimeOrder,
    DemandOutOfHorizon,
    UnservableDemand,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::InvalidGrid => "invalid_grid",
            ViolationCode::DuplicateNodeName => "duplicate_node_name",
            ViolationCode::DanglingReference => "dangling_reference",
            ViolationCode::EmptyLink => "empty_link",
            ViolationCode::ZeroTravelTime => "zero_travel_time",
            ViolationCode::DuplicateOption => "duplicate_option",
            ViolationCode::PositiveTravelDelta => "positive_travel_delta",
            ViolationCode::NegativeCost => "negative_cost",
            ViolationCode::DuplicateStation => "duplicate_station",
            ViolationCode::NegativeBuildCost => "negative_build_cost",
            ViolationCode::EmptyProfile => "empty_profile",
            ViolationCode::InvalidRechargeStep => "invalid_recharge_step",
            ViolationCode::NonMonotoneProfile => "non_monotone_profile",
            ViolationCode::NegativeBudget => "negative_budget",
            ViolationCode::NonPositivePenalty => "non_positive_penalty",
            ViolationCode::InvertedWindow => "inverted_window",
            ViolationCode::WindowOutOfHorizon => "window_out_of_horizon",
            ViolationCode::DepartAfterArrive => "depart_after_arrive",
            ViolationCode::CapacityAboveGrid => "capacity_above_grid",
            ViolationCode::InitialResourceOutOfRange => "initial_resource_out_of_range",
            ViolationCode::DemandTimeOrder => "demand_time_order",
            ViolationCode::DemandOutOfHorizon => "demand_out_of_horizon",
            ViolationCode::UnservableDemand => "unservable_demand",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code.as_str(), self.message)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, code: ViolationCode, message: String) {
        self.0.push(Violation { code, message });
    }
}

/// Checks every structural invariant of `inst`. An empty list means valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Collector(Vec::new());
    let n = inst.nodes.len();
    let exists = |id: NodeId| id < n;
    let name = |id: NodeId| -> String {
        inst.nodes
            .get(id)
            .map_or_else(|| format!("#{id}"), |node| node.name.clone())
    };

    if inst.horizon == 0 {
        out.push(
            ViolationCode::InvalidGrid,
            "horizon must be positive".into(),
        );
    }
    if inst.resource_max == 0 || inst.resource_min > inst.resource_max {
        out.push(
            ViolationCode::InvalidGrid,
            format!(
                "resource grid [{}, {}] is empty or degenerate",
                inst.resource_min, inst.resource_max
            ),
        );
    }
    if !(inst.budget >= 0.0) {
        out.push(
            ViolationCode::NegativeBudget,
            format!("budget {} < 0", inst.budget),
        );
    }
    let penalty = inst.virtual_penalty();
    if !(penalty > 0.0) {
        out.push(
            ViolationCode::NonPositivePenalty,
            format!("virtual penalty {penalty} must be positive"),
        );
    }

    let mut names = HashSet::new();
    for (idx, node) in inst.nodes.iter().enumerate() {
        if !names.insert(node.name.as_str()) || node.id != idx {
            out.push(
                ViolationCode::DuplicateNodeName,
                format!("node `{}` (id {}) is not unique", node.name, node.id),
            );
        }
    }

    let mut pairs = HashSet::new();
    for link in &inst.links {
        if !exists(link.from) || !exists(link.to) {
            out.push(
                ViolationCode::DanglingReference,
                format!("link {}->{} references a missing node", link.from, link.to),
            );
            continue;
        }
        let label = format!("{}->{}", name(link.from), name(link.to));
        if !pairs.insert((link.from, link.to)) {
            out.push(
                ViolationCode::DuplicateOption,
                format!("link {label} is declared twice"),
            );
        }
        if link.options.is_empty() {
            out.push(
                ViolationCode::EmptyLink,
                format!("link {label} has no options"),
            );
        }
        let mut times = HashSet::new();
        for o in &link.options {
            if o.travel_time == 0 {
                out.push(
                    ViolationCode::ZeroTravelTime,
                    format!("link {label} has an option with travel time 0"),
                );
            }
            if !times.insert(o.travel_time) {
                out.push(
                    ViolationCode::DuplicateOption,
                    format!("link {label} repeats travel time {}", o.travel_time),
                );
            }
            if o.resource_delta > 0 {
                out.push(
                    ViolationCode::PositiveTravelDelta,
                    format!(
                        "link {label} option tt={} gains resource ({})",
                        o.travel_time, o.resource_delta
                    ),
                );
            }
            if !(o.travel_cost >= 0.0) {
                out.push(
                    ViolationCode::NegativeCost,
                    format!(
                        "link {label} option tt={} has cost {}",
                        o.travel_time, o.travel_cost
                    ),
                );
            }
        }
    }

    let mut station_nodes = HashSet::new();
    for s in &inst.stations {
        if !exists(s.node) {
            out.push(
                ViolationCode::DanglingReference,
                format!("station at missing node {}", s.node),
            );
            continue;
        }
        let label = name(s.node);
        if !station_nodes.insert(s.node) {
            out.push(
                ViolationCode::DuplicateStation,
                format!("node `{label}` hosts two stations"),
            );
        }
        if !(s.build_cost >= 0.0) {
            out.push(
                ViolationCode::NegativeBuildCost,
                format!("station `{label}` build cost {}", s.build_cost),
            );
        }
        if !(s.unit_price >= 0.0) {
            out.push(
                ViolationCode::NegativeCost,
                format!("station `{label}` unit price {}", s.unit_price),
            );
        }
        if s.profile.is_empty() {
            out.push(
                ViolationCode::EmptyProfile,
                format!("station `{label}` has an empty recharge profile"),
            );
        }
        for step in &s.profile {
            if step.duration == 0 || step.gain == 0 {
                out.push(
                    ViolationCode::InvalidRechargeStep,
                    format!(
                        "station `{label}` profile entry {}:{} needs positive duration and gain",
                        step.duration, step.gain
                    ),
                );
            }
        }
        let mut sorted = s.profile.clone();
        sorted.sort_by_key(|p| (p.duration, p.gain));
        if sorted.windows(2).any(|w| w[1].gain < w[0].gain) {
            out.push(
                ViolationCode::NonMonotoneProfile,
                format!("station `{label}` gains decrease with longer charging"),
            );
        }
    }

    let window_ok = |out: &mut Collector, label: &str, w: TimeWindow| {
        if w.lo > w.hi {
            out.push(
                ViolationCode::InvertedWindow,
                format!("{label} window ({},{}) is inverted", w.lo, w.hi),
            );
        }
        if w.hi > inst.horizon {
            out.push(
                ViolationCode::WindowOutOfHorizon,
                format!(
                    "{label} window ({},{}) exceeds horizon {}",
                    w.lo, w.hi, inst.horizon
                ),
            );
        }
    };
    for v in &inst.vehicles {
        if !exists(v.origin) || !exists(v.destination) {
            out.push(
                ViolationCode::DanglingReference,
                format!("vehicle `{}` references a missing node", v.id),
            );
        }
        window_ok(
            &mut out,
            &format!("vehicle `{}` departure", v.id),
            v.depart_window,
        );
        window_ok(
            &mut out,
            &format!("vehicle `{}` arrival", v.id),
            v.arrive_window,
        );
        if v.depart_window.lo > v.arrive_window.hi {
            out.push(
                ViolationCode::DepartAfterArrive,
                format!(
                    "vehicle `{}` cannot depart before its arrival window closes",
                    v.id
                ),
            );
        }
        if v.capacity == 0 || v.capacity > inst.resource_max {
            out.push(
                ViolationCode::CapacityAboveGrid,
                format!(
                    "vehicle `{}` capacity {} outside (0, {}]",
                    v.id, v.capacity, inst.resource_max
                ),
            );
        }
        if v.initial_resource < inst.resource_min || v.initial_resource > v.capacity {
            out.push(
                ViolationCode::InitialResourceOutOfRange,
                format!(
                    "vehicle `{}` initial resource {} outside [{}, {}]",
                    v.id, v.initial_resource, inst.resource_min, v.capacity
                ),
            );
        }
    }

    for d in &inst.demands {
        if !exists(d.from) || !exists(d.to) {
            out.push(
                ViolationCode::DanglingReference,
                format!("demand references a missing node ({} -> {})", d.from, d.to),
            );
            continue;
        }
        let label = format!(
            "({},{},{},{})",
            name(d.from),
            name(d.to),
            d.depart,
            d.arrive
        );
        if d.arrive <= d.depart {
            out.push(
                ViolationCode::DemandTimeOrder,
                format!("demand {label} does not move forward in time"),
            );
            continue;
        }
        if d.arrive > inst.horizon {
            out.push(
                ViolationCode::DemandOutOfHorizon,
                format!("demand {label} ends after horizon {}", inst.horizon),
            );
        }
        if inst.option(d.from, d.to, d.arrive - d.depart).is_none() {
            out.push(
                ViolationCode::UnservableDemand,
                format!(
                    "demand {label} has no option with travel time {}",
                    d.arrive - d.depart
                ),
            );
        }
    }

    out.0
}
