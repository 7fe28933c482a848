//! Exact optimum by enumeration, for small instances only.
//!
//! Arcs are generated here straight from the [`Instance`], without the
//! [`crate::rst`] module, so the oracle can check the solver rather than
//! share its bugs. Each vehicle is solved by a forward pass over states
//! augmented with the set of demands served so far and the visits made to
//! every station; vehicles are then combined over every affordable station
//! subset subject to the station capacities.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::instance::{Instance, NodeId};

/// `side` is true on the outbound half of a station node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawState {
    pub node: NodeId,
    pub side: bool,
    pub time: u32,
    pub resource: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawArc {
    pub to: RawState,
    pub cost: f64,
    pub demand: Option<usize>,
    pub recharge_at: Option<usize>,
    pub exhaust: bool,
}

/// Every arc vehicle `v` may take from `s`.
pub fn raw_successors(inst: &Instance, v: usize, s: RawState) -> Vec<RawArc> {
    let veh = &inst.vehicles[v];
    let cap = veh.capacity.min(inst.resource_max);
    let station = inst.station_at(s.node);
    let mut out = Vec::new();
    let plain = |node, time, resource| RawState {
        node,
        side: false,
        time,
        resource,
    };
    if s.resource > cap {
        return out;
    }
    let can_leave = station.is_none() || s.side;
    if can_leave {
        for link in inst.links.iter().filter(|l| l.from == s.node) {
            for o in &link.options {
                let t = s.time + o.travel_time;
                let r = s.resource as i64 + o.resource_delta as i64;
                if t > inst.horizon || r < inst.resource_min as i64 || r > cap as i64 {
                    continue;
                }
                let demand = inst.demands.iter().position(|d| {
                    d.from == link.from && d.to == link.to && d.depart == s.time && d.arrive == t
                });
                out.push(RawArc {
                    to: plain(link.to, t, r as u32),
                    cost: o.travel_cost,
                    demand,
                    recharge_at: None,
                    exhaust: false,
                });
            }
        }
    }
    if let (Some(k), false) = (station, s.side) {
        if s.time < inst.horizon {
            out.push(RawArc {
                to: RawState {
                    side: true,
                    time: s.time + 1,
                    ..s
                },
                cost: 0.0,
                demand: None,
                recharge_at: None,
                exhaust: false,
            });
        }
        let st = &inst.stations[k];
        for step in &st.profile {
            let t = s.time + step.duration;
            if t > inst.horizon {
                continue;
            }
            let r = (s.resource + step.gain).min(cap);
            out.push(RawArc {
                to: RawState {
                    node: s.node,
                    side: true,
                    time: t,
                    resource: r,
                },
                cost: st.unit_price * f64::from(r - s.resource),
                demand: None,
                recharge_at: Some(k),
                exhaust: false,
            });
        }
    }
    if s.time < inst.horizon {
        out.push(RawArc {
            to: RawState {
                time: s.time + 1,
                ..s
            },
            cost: 0.0,
            demand: None,
            recharge_at: None,
            exhaust: false,
        });
    }
    if s.node == veh.destination && !s.side && veh.arrive_window.contains(s.time) {
        out.push(RawArc {
            to: RawState {
                resource: inst.resource_min,
                ..s
            },
            cost: 0.0,
            demand: None,
            recharge_at: None,
            exhaust: true,
        });
    }
    out
}

/// Seeds of vehicle `v`: its origin at every departure time.
pub fn raw_origins(inst: &Instance, v: usize) -> Vec<RawState> {
    let veh = &inst.vehicles[v];
    veh.depart_window
        .times()
        .filter(|&t| t <= inst.horizon)
        .map(|time| RawState {
            node: veh.origin,
            side: false,
            time,
            resource: veh.initial_resource,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_stations: usize,
    pub max_demands: usize,
    pub max_vehicles: usize,
    /// Upper bound on augmented labels per vehicle and time step.
    pub max_labels: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_stations: 6,
            max_demands: 10,
            max_vehicles: 4,
            max_labels: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the enumeration limit {limit}")]
    Limit {
        what: &'static str,
        value: usize,
        limit: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Total travel cost plus the penalty per unserved demand; infinite
    /// when no affordable station set lets every vehicle finish.
    pub objective: f64,
    pub selection: Vec<usize>,
    pub served: Vec<usize>,
    /// Base cost of each vehicle's tour in the optimum.
    pub vehicle_costs: Vec<f64>,
}

type Usage = Vec<u8>;

/// Per vehicle: minimum tour cost for each (served mask, station usage).
fn vehicle_table(
    inst: &Instance,
    v: usize,
    limits: &OracleLimits,
) -> Result<BTreeMap<(u32, Usage), f64>, OracleError> {
    let caps: Vec<u8> = inst
        .stations
        .iter()
        .map(|s| s.capacity.min(u8::MAX as u32) as u8)
        .collect();
    let horizon = inst.horizon as usize;
    let mut layers: Vec<HashMap<(RawState, u32, Usage), f64>> = vec![HashMap::new(); horizon + 1];
    for s in raw_origins(inst, v) {
        layers[s.time as usize].insert((s, 0, vec![0; caps.len()]), 0.0);
    }
    let mut result: BTreeMap<(u32, Usage), f64> = BTreeMap::new();
    for t in 0..=horizon {
        let layer = std::mem::take(&mut layers[t]);
        if layer.len() > limits.max_labels {
            return Err(OracleError::Limit {
                what: "labels per time step",
                value: layer.len(),
                limit: limits.max_labels,
            });
        }
        for ((s, mask, usage), cost) in layer {
            for arc in raw_successors(inst, v, s) {
                let c = cost + arc.cost;
                if arc.exhaust {
                    let e = result.entry((mask, usage.clone())).or_insert(f64::INFINITY);
                    if c < *e {
                        *e = c;
                    }
                    continue;
                }
                let mut u = usage.clone();
                if let Some(k) = arc.recharge_at {
                    if u[k] >= caps[k] {
                        continue;
                    }
                    u[k] += 1;
                }
                let m = mask | arc.demand.map_or(0, |d| 1 << d);
                let e = layers[arc.to.time as usize]
                    .entry((arc.to, m, u))
                    .or_insert(f64::INFINITY);
                if c < *e {
                    *e = c;
                }
            }
        }
    }
    Ok(result)
}

/// Exact optimum, or an error when the instance exceeds `limits`.
pub fn brute_force_optimum(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<OracleSolution, OracleError> {
    let check = |what, value: usize, limit: usize| {
        if value > limit {
            Err(OracleError::Limit { what, value, limit })
        } else {
            Ok(())
        }
    };
    check("stations", inst.stations.len(), limits.max_stations)?;
    check("demands", inst.demands.len(), limits.max_demands)?;
    check("vehicles", inst.vehicles.len(), limits.max_vehicles)?;

    let tables: Vec<_> = (0..inst.vehicles.len())
        .map(|v| vehicle_table(inst, v, limits))
        .collect::<Result<_, _>>()?;
    let penalty = inst.virtual_penalty();
    let n_demands = inst.demands.len();
    let ns = inst.stations.len();

    let mut best = OracleSolution {
        objective: f64::INFINITY,
        selection: Vec::new(),
        served: Vec::new(),
        vehicle_costs: Vec::new(),
    };
    for subset in 0u32..(1 << ns) {
        let selected: Vec<usize> = (0..ns).filter(|k| subset & (1 << k) != 0).collect();
        let build: f64 = selected.iter().map(|&k| inst.stations[k].build_cost).sum();
        if build > inst.budget + 1e-9 {
            continue;
        }
        // (mask, total usage) -> (cost, per-vehicle costs)
        let mut joint: BTreeMap<(u32, Usage), (f64, Vec<f64>)> = BTreeMap::new();
        joint.insert((0, vec![0; ns]), (0.0, Vec::new()));
        for table in &tables {
            let mut next: BTreeMap<(u32, Usage), (f64, Vec<f64>)> = BTreeMap::new();
            for ((mask, usage), (cost, costs)) in &joint {
                for ((m, u), c) in table {
                    let allowed = (0..ns).all(|k| {
                        u[k] == 0
                            || (subset & (1 << k) != 0
                                && u32::from(usage[k]) + u32::from(u[k])
                                    <= inst.stations[k].capacity)
                    });
                    if !allowed {
                        continue;
                    }
                    let key = (
                        mask | m,
                        usage.iter().zip(u).map(|(a, b)| a + b).collect::<Usage>(),
                    );
                    let total = cost + c;
                    let e = next.entry(key).or_insert((f64::INFINITY, Vec::new()));
                    if total < e.0 {
                        let mut cs = costs.clone();
                        cs.push(*c);
                        *e = (total, cs);
                    }
                }
            }
            joint = next;
        }
        for ((mask, _), (cost, costs)) in &joint {
            let served = mask.count_ones() as usize;
            let objective = cost + penalty * (n_demands - served) as f64;
            if objective < best.objective - 1e-9 {
                best = OracleSolution {
                    objective,
                    selection: selected.clone(),
                    served: (0..n_demands).filter(|d| mask & (1 << d) != 0).collect(),
                    vehicle_costs: costs.clone(),
                };
            }
        }
    }
    Ok(best)
}
