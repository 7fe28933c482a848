//! Subgradient optimization of the Lagrangian dual.
//!
//! Station capacity and demand covering rows are priced out. The dual then
//! splits into a station knapsack and one routing problem per vehicle,
//! giving a lower bound each iteration. An upper bound comes from routing
//! the vehicles one after another over the selected stations with hard
//! capacities and charging a penalty per unserved demand, then re-routing
//! single vehicles and pairs while that lowers the total.

mod audit;

pub use crate::multipliers::Multipliers;
pub use audit::{audit_solution, AuditError};

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::instance::Instance;
use crate::knapsack::{solve_station_selection, Candidate, StationSelection, DEFAULT_QUANTUM};
use crate::routing::{solve_single_vehicle, StationMask, VehicleRoute};
use crate::rst::{transform_stations, TransformedNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `1 / (m + 1)`.
    Harmonic,
    /// Polyak step `(best_ub - lb) / |g|^2`; harmonic while no feasible
    /// solution is known.
    Ratio,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: u32,
    pub term_delta: f64,
    pub step: StepRule,
    pub penalty: Option<f64>,
    /// Shuffles the upper-bound routing order; `None` keeps instance order.
    pub ordering_seed: Option<u64>,
    /// Spend budget left after the knapsack on stations the relaxed routes
    /// use, before building the upper bound.
    pub complete_selection: bool,
    /// Stop after this many consecutive iterations in which neither best
    /// bound moved by more than `term_delta`.
    pub stall_patience: u32,
    pub quantum: f64,
    /// Rounds of single and pairwise re-routing applied to each new upper
    /// bound; 0 keeps the plain sequential pass.
    pub improve_rounds: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            term_delta: 1e-6,
            step: StepRule::Harmonic,
            penalty: None,
            ordering_seed: None,
            complete_selection: true,
            stall_patience: 10,
            quantum: DEFAULT_QUANTUM,
            improve_rounds: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub selection: StationSelection,
    /// `None` for a vehicle without any feasible tour.
    pub routes: Vec<Option<VehicleRoute>>,
    pub served_count: Vec<u32>,
    pub usage: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBound {
    /// Infinite when some vehicle could not be routed.
    pub value: f64,
    pub selection: Vec<usize>,
    pub routes: Vec<VehicleRoute>,
    pub unserved: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: u32,
    pub step_size: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub best_lower: f64,
    pub best_upper: f64,
    pub gap: f64,
    pub lb_selection: Vec<usize>,
    pub ub_selection: Vec<usize>,
    /// Unserved demands of the upper bound (empty when it is infinite).
    pub unserved: Vec<usize>,
    pub lb_routes: Vec<Option<VehicleRoute>>,
    pub ub_routes: Vec<VehicleRoute>,
    pub multipliers: Multipliers,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GapClosed,
    IterationLimit,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub objective: f64,
    pub selection: Vec<usize>,
    pub routes: Vec<VehicleRoute>,
    pub unserved: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub termination: Termination,
    /// `None` when no iteration produced a feasible solution.
    pub incumbent: Option<Incumbent>,
    pub best_lower: f64,
    pub best_upper: f64,
    pub trace: Vec<IterationRecord>,
    pub penalty: f64,
}

impl SolveResult {
    pub fn gap(&self) -> f64 {
        relative_gap(self.best_lower, self.best_upper)
    }
}

/// `(ub - max(lb, 0)) / ub`; the absolute difference when `ub <= 0` and
/// one when no upper bound exists. Values within 1e-9 of zero snap to 0.
pub fn relative_gap(best_lower: f64, best_upper: f64) -> f64 {
    if !best_upper.is_finite() {
        return 1.0;
    }
    let diff = best_upper - best_lower.max(0.0);
    let gap = if best_upper > 0.0 {
        diff / best_upper
    } else {
        diff
    };
    if gap.abs() <= 1e-9 {
        0.0
    } else {
        gap
    }
}

pub fn harmonic_step(m: u32) -> f64 {
    1.0 / (f64::from(m) + 1.0)
}

/// Subgradient of the dual at the point that produced `lb`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient {
    pub epsilon: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Subgradient {
    pub fn norm_sq(&self) -> f64 {
        self.epsilon.iter().chain(&self.theta).map(|g| g * g).sum()
    }
}

/// A demand priced above the penalty is left to a virtual vehicle in the
/// relaxation and so counts as covered.
pub fn subgradient(
    inst: &Instance,
    multipliers: &Multipliers,
    lb: &LowerBound,
    penalty: f64,
) -> Subgradient {
    let epsilon = (0..inst.demands.len())
        .map(|d| {
            let virtual_cover = if multipliers.epsilon[d] > penalty {
                1.0
            } else {
                0.0
            };
            1.0 - f64::from(lb.served_count[d]) - virtual_cover
        })
        .collect();
    let theta = inst
        .stations
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let open = if lb.selection.contains(k) { 1.0 } else { 0.0 };
            f64::from(lb.usage[k]) - f64::from(s.capacity) * open
        })
        .collect();
    Subgradient { epsilon, theta }
}

/// Projected step `max(0, x + alpha * g)`.
pub fn update_multipliers(state: &Multipliers, g: &Subgradient, alpha: f64) -> Multipliers {
    let step = |x: &[f64], g: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(g)
            .map(|(x, g)| (x + alpha * g).max(0.0))
            .collect()
    };
    Multipliers {
        epsilon: step(&state.epsilon, &g.epsilon),
        theta: step(&state.theta, &g.theta),
    }
}

fn lb_routes(net: &TransformedNetwork, multipliers: &Multipliers) -> Vec<Option<VehicleRoute>> {
    let inst = net.instance();
    let n = inst.vehicles.len();
    let work = n * net.node_count() * inst.horizon as usize * inst.resource_levels() as usize;
    let threads = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(n);
    if threads <= 1 || work < 2_000_000 {
        return (0..n)
            .map(|v| solve_single_vehicle(v, net, multipliers, None).ok())
            .collect();
    }
    let mut out: Vec<Option<VehicleRoute>> = vec![None; n];
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (c, slots) in out.chunks_mut(chunk).enumerate() {
            scope.spawn(move || {
                for (i, slot) in slots.iter_mut().enumerate() {
                    *slot = solve_single_vehicle(c * chunk + i, net, multipliers, None).ok();
                }
            });
        }
    });
    out
}

/// Dual value at `multipliers`: station knapsack plus independent routing.
pub fn compute_lower_bound(
    net: &TransformedNetwork,
    multipliers: &Multipliers,
    penalty: f64,
    quantum: f64,
) -> LowerBound {
    let inst = net.instance();
    let candidates: Vec<Candidate> = inst
        .stations
        .iter()
        .enumerate()
        .map(|(k, s)| Candidate {
            id: k,
            cost: s.build_cost,
            value: multipliers.theta[k] * f64::from(s.capacity),
        })
        .collect();
    let selection = solve_station_selection(&candidates, inst.budget, quantum);
    let routes = lb_routes(net, multipliers);

    let mut value: f64 = multipliers.epsilon.iter().map(|&e| e.min(penalty)).sum();
    value -= selection.total_value;
    let mut served_count = vec![0u32; inst.demands.len()];
    let mut usage = vec![0u32; inst.stations.len()];
    for route in &routes {
        match route {
            Some(r) => {
                value += r.generalized_cost;
                for &d in &r.served_demands {
                    served_count[d] += 1;
                }
                for (k, &n) in r.station_visits.iter().enumerate() {
                    usage[k] += n;
                }
            }
            None => value += penalty,
        }
    }
    LowerBound {
        value,
        selection,
        routes,
        served_count,
        usage,
    }
}

/// Adds unselected stations used by the relaxed routes while budget lasts.
pub fn complete_selection(
    inst: &Instance,
    selection: &StationSelection,
    usage: &[u32],
    quantum: f64,
) -> Vec<usize> {
    let left = inst.budget - selection.total_cost;
    let extra: Vec<Candidate> = inst
        .stations
        .iter()
        .enumerate()
        .filter(|(k, _)| !selection.contains(*k) && usage[*k] > 0)
        .map(|(k, s)| Candidate {
            id: k,
            cost: s.build_cost,
            value: f64::from(usage[k].min(s.capacity)),
        })
        .collect();
    let mut out = selection.selected.clone();
    out.extend(solve_station_selection(&extra, left.max(0.0), quantum).selected);
    out.sort_unstable();
    out
}

/// Partial upper-bound solution: routes so far, which vehicle first
/// claimed each demand and the station capacity left.
#[derive(Clone)]
struct Plan {
    routes: Vec<Option<VehicleRoute>>,
    owner: Vec<Option<usize>>,
    remaining: Vec<u32>,
}

impl Plan {
    fn new(inst: &Instance, selection: &[usize]) -> Self {
        Plan {
            routes: vec![None; inst.vehicles.len()],
            owner: vec![None; inst.demands.len()],
            remaining: inst
                .stations
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    if selection.contains(&k) {
                        s.capacity
                    } else {
                        0
                    }
                })
                .collect(),
        }
    }

    fn value(&self, penalty: f64) -> f64 {
        let base: f64 = self.routes.iter().flatten().map(|r| r.base_cost).sum();
        base + penalty * self.owner.iter().filter(|o| o.is_none()).count() as f64
    }

    fn release(&mut self, v: usize) {
        if let Some(route) = self.routes[v].take() {
            for (k, &n) in route.station_visits.iter().enumerate() {
                self.remaining[k] += n;
            }
        }
        for o in &mut self.owner {
            if *o == Some(v) {
                *o = None;
            }
        }
    }

    fn assign(&mut self, route: VehicleRoute) {
        for (k, &n) in route.station_visits.iter().enumerate() {
            self.remaining[k] -= n;
        }
        for &d in &route.served_demands {
            self.owner[d].get_or_insert(route.vehicle);
        }
        let v = route.vehicle;
        self.routes[v] = Some(route);
    }

    /// True-cost best response of `v` to the rest of the plan: a demand
    /// nobody has claimed is worth its penalty. A station whose capacity
    /// the route overruns is closed to `v` and the route solved again.
    fn best_response(
        &self,
        net: &TransformedNetwork,
        v: usize,
        penalty: f64,
    ) -> Result<VehicleRoute, usize> {
        let ns = self.remaining.len();
        let prices = Multipliers {
            epsilon: self
                .owner
                .iter()
                .map(|o| if o.is_some() { 0.0 } else { penalty })
                .collect(),
            theta: vec![0.0; ns],
        };
        let mut forbidden = vec![false; ns];
        loop {
            let mask = StationMask::new(&forbidden, &self.remaining);
            let route = solve_single_vehicle(v, net, &prices, Some(&mask)).map_err(|_| v)?;
            let over: Vec<usize> = (0..ns)
                .filter(|&k| route.station_visits[k] > self.remaining[k])
                .collect();
            if over.is_empty() {
                return Ok(route);
            }
            for k in over {
                forbidden[k] = true;
            }
        }
    }

    /// Re-routes `vehicles` in the given order with everyone else fixed;
    /// keeps the result only if the total objective drops.
    fn try_move(&mut self, net: &TransformedNetwork, vehicles: &[usize], penalty: f64) -> bool {
        let mut trial = self.clone();
        for &v in vehicles {
            trial.release(v);
        }
        for &v in vehicles {
            match trial.best_response(net, v, penalty) {
                Ok(route) => trial.assign(route),
                Err(_) => return false,
            }
        }
        if trial.value(penalty) < self.value(penalty) - 1e-9 {
            *self = trial;
            true
        } else {
            false
        }
    }

    /// Single and pairwise re-routing until a round finds nothing better.
    fn improve(&mut self, net: &TransformedNetwork, penalty: f64, rounds: u32) {
        let n = self.routes.len();
        for _ in 0..rounds {
            let mut improved = false;
            for v in 0..n {
                improved |= self.try_move(net, &[v], penalty);
            }
            for u in 0..n {
                for v in u + 1..n {
                    improved |= self.try_move(net, &[u, v], penalty)
                        || self.try_move(net, &[v, u], penalty);
                }
            }
            if !improved {
                break;
            }
        }
    }
}

fn route_in_order(
    net: &TransformedNetwork,
    selection: &[usize],
    order: &[usize],
    penalty: f64,
) -> Result<Plan, usize> {
    let mut plan = Plan::new(net.instance(), selection);
    for &v in order {
        let route = plan.best_response(net, v, penalty)?;
        plan.assign(route);
    }
    Ok(plan)
}

/// Sequential routing over `selection` with live station capacities. When
/// a vehicle cannot be routed it is moved to the front and the pass is
/// repeated, at most once per vehicle. The first feasible pass is then
/// improved by up to `improve_rounds` rounds of re-routing.
pub fn compute_upper_bound(
    net: &TransformedNetwork,
    selection: &[usize],
    order: &[usize],
    penalty: f64,
    improve_rounds: u32,
) -> Result<UpperBound, AuditError> {
    let mut order = order.to_vec();
    let mut found = None;
    for _ in 0..order.len().max(1) {
        match route_in_order(net, selection, &order, penalty) {
            Ok(r) => {
                found = Some(r);
                break;
            }
            Err(v) => {
                let pos = order.iter().position(|&x| x == v).unwrap();
                if pos == 0 {
                    break;
                }
                order.remove(pos);
                order.insert(0, v);
            }
        }
    }
    let Some(mut plan) = found else {
        return Ok(UpperBound {
            value: f64::INFINITY,
            selection: selection.to_vec(),
            routes: Vec::new(),
            unserved: Vec::new(),
        });
    };
    plan.improve(net, penalty, improve_rounds);
    let value = plan.value(penalty);
    let routes: Vec<VehicleRoute> = plan.routes.into_iter().map(Option::unwrap).collect();
    let unserved = audit_solution(net, selection, &routes, penalty, value)?;
    Ok(UpperBound {
        value,
        selection: selection.to_vec(),
        routes,
        unserved,
    })
}

/// Runs the subgradient loop until the gap closes, the bounds stall, or the
/// iteration limit is reached.
pub fn run(inst: &Instance, config: &SolverConfig) -> Result<SolveResult, AuditError> {
    let net = transform_stations(inst);
    let penalty = config.penalty.unwrap_or_else(|| inst.virtual_penalty());
    let mut order: Vec<usize> = (0..inst.vehicles.len()).collect();
    if let Some(seed) = config.ordering_seed {
        order.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
    }

    let mut multipliers = Multipliers::zeros(inst);
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_upper = f64::INFINITY;
    let mut incumbent: Option<Incumbent> = None;
    let mut stalled = 0;
    let mut termination = Termination::IterationLimit;
    let mut previous: Option<LowerBound> = None;
    let mut ub_cache: HashMap<Vec<usize>, UpperBound> = HashMap::new();

    for m in 1..=config.max_iterations.max(1) {
        let started = Instant::now();
        let mut alpha = 1.0;
        if let Some(lb) = &previous {
            let g = subgradient(inst, &multipliers, lb, penalty);
            let k = m - 1;
            alpha = match config.step {
                StepRule::Ratio if best_upper.is_finite() => {
                    let norm = g.norm_sq();
                    if norm > 0.0 {
                        ((best_upper - lb.value) / norm).max(0.0)
                    } else {
                        0.0
                    }
                }
                _ => harmonic_step(k),
            };
            multipliers = update_multipliers(&multipliers, &g, alpha);
        }

        let lb = compute_lower_bound(&net, &multipliers, penalty, config.quantum);
        let ub_selection = if config.complete_selection {
            complete_selection(inst, &lb.selection, &lb.usage, config.quantum)
        } else {
            lb.selection.selected.clone()
        };
        let ub = match ub_cache.get(&ub_selection) {
            Some(ub) => ub.clone(),
            None => {
                let ub = compute_upper_bound(
                    &net,
                    &ub_selection,
                    &order,
                    penalty,
                    config.improve_rounds,
                )?;
                ub_cache.insert(ub_selection.clone(), ub.clone());
                ub
            }
        };

        let (old_lower, old_upper) = (best_lower, best_upper);
        best_lower = best_lower.max(lb.value);
        if ub.value < best_upper {
            best_upper = ub.value;
            incumbent = Some(Incumbent {
                objective: ub.value,
                selection: ub.selection.clone(),
                routes: ub.routes.clone(),
                unserved: ub.unserved.clone(),
            });
        }
        let gap = relative_gap(best_lower, best_upper);
        trace.push(IterationRecord {
            iteration: m,
            step_size: alpha,
            lower_bound: lb.value,
            upper_bound: ub.value,
            best_lower,
            best_upper,
            gap,
            lb_selection: lb.selection.selected.clone(),
            ub_selection: ub.selection,
            unserved: ub.unserved,
            lb_routes: lb.routes.clone(),
            ub_routes: ub.routes,
            multipliers: multipliers.clone(),
            wall_ms: started.elapsed().as_secs_f64() * 1000.0,
        });
        previous = Some(lb);

        if gap <= 0.0 {
            termination = Termination::GapClosed;
            break;
        }
        let moved = |new: f64, old: f64| {
            if new.is_finite() && old.is_finite() {
                (new - old).abs() > config.term_delta
            } else {
                new != old
            }
        };
        if moved(best_lower, old_lower) || moved(best_upper, old_upper) {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= config.stall_patience {
                termination = Termination::Stalled;
                break;
            }
        }
    }

    Ok(SolveResult {
        termination,
        incumbent,
        best_lower,
        best_upper,
        trace,
        penalty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{InstanceBuilder, PenaltySpec};

    #[test]
    fn harmonic_update_examples() {
        let state = Multipliers {
            epsilon: vec![0.0, 16.125],
            theta: vec![0.0],
        };
        let g = Subgradient {
            epsilon: vec![1.0, 0.0],
            theta: vec![1.0],
        };
        let next = update_multipliers(&state, &g, harmonic_step(1));
        assert_eq!(next.epsilon, vec![0.5, 16.125]);
        assert_eq!(next.theta, vec![0.5]);
        let down = update_multipliers(
            &next,
            &Subgradient {
                epsilon: vec![-5.0, -5.0],
                theta: vec![-5.0],
            },
            1.0,
        );
        assert!(down.is_nonnegative());
    }

    #[test]
    fn station_subgradient_counts_usage_over_capacity() {
        let mut b = InstanceBuilder::new(10, 0, 10);
        b.edge("a", "s", 1);
        b.station("s", 1.0, 2, &[(1, 5)]);
        let inst = b.build();
        let lb = LowerBound {
            value: 0.0,
            selection: StationSelection {
                selected: vec![0],
                total_value: 0.0,
                total_cost: 1.0,
            },
            routes: vec![],
            served_count: vec![],
            usage: vec![3],
        };
        let g = subgradient(&inst, &Multipliers::zeros(&inst), &lb, 10.0);
        assert_eq!(g.theta, vec![1.0]);
        let next = update_multipliers(&Multipliers::zeros(&inst), &g, harmonic_step(1));
        assert_eq!(next.theta, vec![0.5]);
    }

    #[test]
    fn lower_bound_without_vehicles_is_the_demand_term() {
        let mut b = InstanceBuilder::new(10, 0, 10);
        b.edge("a", "b", 2);
        b.demand("a", "b", 1, 3);
        b.penalty(PenaltySpec::Fixed(100.0));
        let inst = b.build();
        let net = transform_stations(&inst);
        let m = Multipliers {
            epsilon: vec![7.0],
            theta: vec![],
        };
        assert_eq!(
            compute_lower_bound(&net, &m, 100.0, DEFAULT_QUANTUM).value,
            7.0
        );
    }

    #[test]
    fn zero_multipliers_give_the_routing_bound() {
        let mut b = InstanceBuilder::new(10, 0, 10);
        b.edge("a", "b", 2).edge("b", "c", 3);
        b.vehicle("1", "a", "c", (0, 0), (0, 10), 10, 10);
        b.vehicle("2", "b", "a", (0, 0), (0, 10), 10, 10);
        let inst = b.build();
        let net = transform_stations(&inst);
        let lb = compute_lower_bound(&net, &Multipliers::zeros(&inst), 100.0, DEFAULT_QUANTUM);
        assert_eq!(lb.value, 7.0);
    }

    #[test]
    fn unreachable_demand_costs_one_penalty() {
        let mut b = InstanceBuilder::new(10, 0, 10);
        b.edge("a", "b", 2).edge("c", "d", 1);
        b.demand("c", "d", 1, 2);
        b.vehicle("1", "a", "b", (0, 0), (0, 10), 10, 10);
        let inst = b.build();
        let net = transform_stations(&inst);
        let ub = compute_upper_bound(&net, &[], &[0], 50.0, 2).unwrap();
        assert_eq!(ub.unserved, vec![0]);
        assert_eq!(ub.value, 52.0);
    }

    #[test]
    fn pair_move_hands_a_demand_to_the_nearer_vehicle() {
        let mut b = InstanceBuilder::new(30, 0, 30);
        b.edge("a", "p", 1);
        b.edge("b", "q", 1);
        b.edge("a", "b", 5);
        b.vehicle("1", "a", "a", (1, 1), (0, 30), 30, 30);
        b.vehicle("2", "b", "b", (1, 1), (0, 30), 30, 30);
        b.demand("a", "p", 1, 2);
        b.demand("b", "q", 8, 9);
        let inst = b.build();
        let net = transform_stations(&inst);
        // the first vehicle grabs both demands when routed greedily
        let greedy = compute_upper_bound(&net, &[], &[0, 1], 100.0, 0).unwrap();
        let improved = compute_upper_bound(&net, &[], &[0, 1], 100.0, 2).unwrap();
        assert_eq!(greedy.value, 14.0);
        assert_eq!(improved.value, 4.0);
        assert_eq!(improved.routes[1].served_demands, vec![1]);
    }

    #[test]
    fn decoupled_instance_closes_at_once() {
        let mut b = InstanceBuilder::new(10, 0, 10);
        b.edge("a", "b", 2);
        b.vehicle("1", "a", "a", (0, 0), (0, 10), 10, 10);
        let result = run(&b.build(), &SolverConfig::default()).unwrap();
        assert_eq!(result.termination, Termination::GapClosed);
        assert_eq!(result.trace.len(), 1);
        assert_eq!(result.best_upper, 0.0);
    }

    #[test]
    fn gap_definition() {
        assert_eq!(relative_gap(5.0, 10.0), 0.5);
        assert_eq!(relative_gap(-3.0, 10.0), 1.0);
        assert_eq!(relative_gap(0.0, f64::INFINITY), 1.0);
        assert_eq!(relative_gap(10.0 - 1e-12, 10.0), 0.0);
    }
}
