//! Bundled test instances and seeded random generators.
//!
//! The two small networks have known optimal selections; the larger ones
//! are synthetic stand-ins of the same size as the city networks they
//! imitate.

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::instance::{ArcOption, Instance, InstanceBuilder, PenaltySpec};

/// Seven-node network with two candidate stations. The depot `c` tour can
/// serve all four demand links only by charging at `A`.
pub fn small_network() -> Instance {
    let mut b = InstanceBuilder::new(30, 0, 40);
    for n in ["a", "b", "c", "d", "e", "f", "g", "A", "B"] {
        b.node(n);
    }
    b.edge("c", "f", 3)
        .edge("f", "g", 1)
        .edge("g", "A", 1)
        .edge("A", "e", 1)
        .edge("g", "e", 2)
        .edge("d", "c", 3)
        .edge("d", "B", 1)
        .edge("B", "c", 2)
        .edge("a", "c", 2)
        .edge("a", "f", 2)
        .edge("b", "d", 2)
        .edge("b", "c", 2);
    b.option("e", "d", ArcOption::with_default_costs(2));
    b.option("d", "e", ArcOption::with_default_costs(1));
    b.station("A", 10.0, 3, &[(1, 20)]);
    b.station("B", 10.0, 3, &[(1, 20)]);
    b.budget(15.0);
    b.vehicle("1", "c", "c", (1, 2), (30, 30), 40, 15);
    b.demand("f", "g", 10, 11)
        .demand("e", "d", 15, 17)
        .demand("e", "d", 18, 20)
        .demand("e", "d", 23, 25);
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityVariant {
    Base,
    /// Faster options on `c -> e` and `g -> f` that burn extra resource.
    Fast,
    /// Stations may also stop charging halfway.
    OrderUpTo,
}

/// Two vehicles and candidate stations `c` (cost 11) and `h` (cost 14).
pub fn sensitivity_network(
    variant: SensitivityVariant,
    cap_c: u32,
    cap_h: u32,
    budget: f64,
) -> Instance {
    let mut b = InstanceBuilder::new(20, 0, 16);
    for n in ["a", "b", "c", "e", "f", "g", "h", "i", "k"] {
        b.node(n);
    }
    let both = |b: &mut InstanceBuilder, x: &str, y: &str, o: ArcOption| {
        b.option(x, y, o);
        b.option(y, x, o);
    };
    b.edge("b", "f", 1)
        .edge("f", "a", 1)
        .edge("e", "g", 1)
        .edge("g", "f", 2)
        .edge("k", "i", 1)
        .edge("i", "c", 2)
        .edge("k", "h", 1);
    // one-way: the recharged return leg runs through g
    b.option("a", "c", ArcOption::with_default_costs(1));
    both(&mut b, "c", "g", ArcOption::new(2, 2.0, -2));
    both(&mut b, "c", "e", ArcOption::new(2, 2.0, -4));
    both(&mut b, "h", "e", ArcOption::new(3, 3.0, -6));
    both(&mut b, "g", "k", ArcOption::new(5, 5.0, -8));
    if variant == SensitivityVariant::Fast {
        b.option("c", "e", ArcOption::new(1, 1.0, -6));
        b.option("g", "f", ArcOption::new(1, 1.0, -6));
    }
    let profile: &[(u32, u32)] = match variant {
        SensitivityVariant::OrderUpTo => &[(1, 8), (2, 16)],
        _ => &[(2, 16)],
    };
    b.station("c", 11.0, cap_c, profile);
    b.station("h", 14.0, cap_h, profile);
    b.budget(budget);
    b.vehicle("1", "b", "b", (1, 2), (16, 20), 16, 6);
    b.vehicle("2", "k", "k", (1, 2), (16, 20), 16, 6);
    b.demand("e", "g", 8, 9).demand("f", "a", 3, 4);
    b.build()
}

const SIOUX_FALLS: [(u32, u32, u32); 38] = [
    (1, 2, 6),
    (1, 3, 4),
    (2, 6, 5),
    (3, 4, 4),
    (3, 12, 4),
    (4, 5, 2),
    (4, 11, 6),
    (5, 6, 4),
    (5, 9, 5),
    (6, 8, 2),
    (7, 8, 3),
    (7, 18, 2),
    (8, 9, 10),
    (8, 16, 5),
    (9, 10, 3),
    (10, 11, 5),
    (10, 15, 6),
    (10, 16, 4),
    (10, 17, 8),
    (11, 12, 6),
    (11, 14, 4),
    (12, 13, 3),
    (13, 24, 4),
    (14, 15, 5),
    (14, 23, 4),
    (15, 19, 3),
    (15, 22, 3),
    (16, 17, 2),
    (16, 18, 3),
    (17, 19, 2),
    (18, 20, 4),
    (19, 20, 4),
    (20, 21, 6),
    (20, 22, 5),
    (21, 22, 2),
    (21, 24, 3),
    (22, 23, 4),
    (23, 24, 2),
];

fn shortest_times(inst: &Instance, from: usize) -> Vec<u32> {
    let n = inst.nodes.len();
    let mut dist = vec![u32::MAX; n];
    let mut done = vec![false; n];
    dist[from] = 0;
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&u| !done[u] && dist[u] < u32::MAX)
            .min_by_key(|&u| dist[u])
        else {
            break;
        };
        done[u] = true;
        for l in inst.links.iter().filter(|l| l.from == u) {
            let tt = l.options.iter().map(|o| o.travel_time).min().unwrap();
            dist[l.to] = dist[l.to].min(dist[u] + tt);
        }
    }
    dist
}

/// The 24-node, 76-link Sioux Falls road network with free-flow times in
/// minutes; splitting the five candidate stations gives 29 nodes and 81
/// arcs. Vehicles and demand links are drawn from `seed`.
pub fn sioux_falls(seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut b = InstanceBuilder::new(100, 0, 30);
    for i in 1..=24 {
        b.node(&i.to_string());
    }
    for (x, y, tt) in SIOUX_FALLS {
        b.option(
            &x.to_string(),
            &y.to_string(),
            ArcOption::new(tt, f64::from(tt), -(tt as i32)),
        );
        b.option(
            &y.to_string(),
            &x.to_string(),
            ArcOption::new(tt, f64::from(tt), -(tt as i32)),
        );
    }
    for (node, cost) in [(10, 18.0), (11, 20.0), (15, 22.0), (16, 19.0), (23, 21.0)] {
        b.station(&node.to_string(), cost, 5, &[(2, 30)]);
    }
    b.budget(60.0);
    let origins: Vec<u32> = (0..15).map(|_| rng.random_range(1..=24)).collect();
    for (v, o) in origins.iter().enumerate() {
        let dep = rng.random_range(0..=10);
        b.vehicle(
            &(v + 1).to_string(),
            &o.to_string(),
            &o.to_string(),
            (dep, dep + 5),
            (60, 100),
            30,
            15,
        );
    }
    let partial = b.build();
    let mut chosen = Vec::new();
    while chosen.len() < 12 {
        let v = rng.random_range(0..origins.len());
        let link = &partial.links[rng.random_range(0..partial.links.len())];
        let from_origin = shortest_times(&partial, partial.vehicles[v].origin)[link.from];
        let depart = partial.vehicles[v].depart_window.lo + from_origin + rng.random_range(0..=15);
        let tt = link.options[0].travel_time;
        let key = (link.from, link.to, depart);
        if depart + tt > 60 || chosen.contains(&key) {
            continue;
        }
        chosen.push(key);
        b.demand(
            &partial.nodes[link.from].name,
            &partial.nodes[link.to].name,
            depart,
            depart + tt,
        );
    }
    b.build()
}

/// Synthetic grid-like network with 933 nodes and 2967 directed links,
/// 40 candidate stations, 30 vehicles and 40 demand links.
pub fn chicago_like(seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let (cols, n) = (31usize, 933usize);
    let mut b = InstanceBuilder::new(90, 0, 40);
    for i in 0..n {
        b.node(&format!("n{i}"));
    }
    let name = |i: usize| format!("n{i}");
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        if i % cols + 1 < cols && i + 1 < n {
            pairs.push((i, i + 1));
        }
        if i + cols < n {
            pairs.push((i, i + cols));
        }
    }
    // a spanning snake keeps every node reachable
    let mut keep: Vec<(usize, usize)> = Vec::new();
    let mut rest: Vec<(usize, usize)> = Vec::new();
    for &(x, y) in &pairs {
        let row = x / cols;
        let vertical_link = y == x + cols && (x % cols == if row % 2 == 0 { cols - 1 } else { 0 });
        if y == x + 1 || vertical_link {
            keep.push((x, y));
        } else {
            rest.push((x, y));
        }
    }
    rand::seq::SliceRandom::shuffle(rest.as_mut_slice(), &mut rng);
    let target_pairs = 2967 / 2;
    let mut links = keep;
    links.extend(rest.into_iter().take(target_pairs - links.len()));
    for &(x, y) in &links {
        let tt = rng.random_range(1..=3);
        b.edge(&name(x), &name(y), tt);
    }
    // one extra one-way link for an odd total
    let (x, y) = (0, cols + 1);
    b.option(&name(x), &name(y), ArcOption::with_default_costs(2));

    let mut sites: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(sites.as_mut_slice(), &mut rng);
    for &s in sites.iter().take(40) {
        let cost = f64::from(rng.random_range(15..=25));
        b.station(&name(s), cost, 5, &[(2, 40)]);
    }
    b.budget(200.0);
    let partial = b.build();
    let mut origins = Vec::new();
    for v in 0..30 {
        let o = rng.random_range(0..n);
        origins.push(o);
        let dep = rng.random_range(0..=10);
        b.vehicle(
            &format!("{}", v + 1),
            &name(o),
            &name(o),
            (dep, dep + 5),
            (40, 90),
            40,
            40,
        );
    }
    let mut demands = Vec::new();
    while demands.len() < 40 {
        let o = origins[rng.random_range(0..origins.len())];
        let link = &partial.links[rng.random_range(0..partial.links.len())];
        let reach = shortest_times(&partial, o)[link.from];
        if reach > 25 {
            continue;
        }
        let depart = reach + rng.random_range(0..=10);
        let tt = link.options[0].travel_time;
        if demands.contains(&(link.from, link.to, depart)) {
            continue;
        }
        demands.push((link.from, link.to, depart));
        b.demand(&name(link.from), &name(link.to), depart, depart + tt);
    }
    b.build()
}

/// Knobs for [`random_micro`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicroShape {
    pub max_nodes: usize,
    pub max_horizon: u32,
    pub max_resource: u32,
    pub max_vehicles: usize,
    pub max_stations: usize,
    pub max_demands: usize,
}

impl Default for MicroShape {
    fn default() -> Self {
        Self {
            max_nodes: 6,
            max_horizon: 20,
            max_resource: 15,
            max_vehicles: 2,
            max_stations: 3,
            max_demands: 3,
        }
    }
}

/// Small random instance; always structurally valid.
pub fn random_micro(seed: u64, shape: &MicroShape) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.random_range(3..=shape.max_nodes.max(3));
    let horizon = rng.random_range(8..=shape.max_horizon.max(8));
    let rmax = rng.random_range(6..=shape.max_resource.max(6));
    let mut b = InstanceBuilder::new(horizon, 0, rmax);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    for nm in &names {
        b.node(nm);
    }
    let option = |b: &mut InstanceBuilder, rng: &mut StdRng, x: usize, y: usize| {
        let tt = rng.random_range(1..=3u32);
        let burn = rng.random_range(1..=2) * tt as i32;
        b.option(
            &names[x],
            &names[y],
            ArcOption::new(tt, f64::from(tt), -burn),
        );
        if rng.random_bool(0.3) {
            // slower and thriftier alternative
            b.option(
                &names[x],
                &names[y],
                ArcOption::new(tt + 1, f64::from(tt + 1), -(burn / 2)),
            );
        }
    };
    for i in 1..n {
        let j = rng.random_range(0..i);
        option(&mut b, &mut rng, i, j);
        option(&mut b, &mut rng, j, i);
    }
    for _ in 0..rng.random_range(0..=n) {
        let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
        if x != y && b.build().link(x, y).is_none() {
            option(&mut b, &mut rng, x, y);
        }
    }
    let mut sites: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(sites.as_mut_slice(), &mut rng);
    let ns = rng.random_range(0..=shape.max_stations.min(n));
    for &s in sites.iter().take(ns) {
        let full = rng.random_range(3..=rmax);
        let mut profile = vec![(rng.random_range(1..=2), full)];
        if rng.random_bool(0.4) {
            profile.insert(0, (1, full.div_ceil(2)));
            profile[1].0 = 2;
        }
        b.station(
            &names[s],
            f64::from(rng.random_range(1..=10)),
            rng.random_range(1..=2),
            &profile,
        );
    }
    b.budget(f64::from(rng.random_range(0..=15)));
    if rng.random_bool(0.5) {
        b.penalty(PenaltySpec::Fixed(f64::from(rng.random_range(5..=30))));
    }
    let nv = rng.random_range(1..=shape.max_vehicles.max(1));
    for v in 0..nv {
        let (o, d) = (rng.random_range(0..n), rng.random_range(0..n));
        let dep = rng.random_range(0..=horizon / 4);
        let arr_lo = rng.random_range(dep..=horizon);
        let cap = rng.random_range(rmax / 2..=rmax).max(1);
        b.vehicle(
            &v.to_string(),
            &names[o],
            &names[d],
            (dep, dep + rng.random_range(0..=2)),
            (arr_lo, horizon),
            cap,
            rng.random_range(cap / 2..=cap),
        );
    }
    let links = b.build().links;
    let nd = rng.random_range(0..=shape.max_demands);
    let mut seen = Vec::new();
    for _ in 0..nd {
        let l = &links[rng.random_range(0..links.len())];
        let o = l.options[rng.random_range(0..l.options.len())];
        if o.travel_time >= horizon {
            continue;
        }
        let t = rng.random_range(0..=horizon - o.travel_time);
        if seen.contains(&(l.from, l.to, t, o.travel_time)) {
            continue;
        }
        seen.push((l.from, l.to, t, o.travel_time));
        b.demand(&names[l.from], &names[l.to], t, t + o.travel_time);
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_instance;
    use crate::rst::transform_stations;

    #[test]
    fn bundled_instances_validate() {
        assert_eq!(validate_instance(&small_network()), vec![]);
        for v in [
            SensitivityVariant::Base,
            SensitivityVariant::Fast,
            SensitivityVariant::OrderUpTo,
        ] {
            assert_eq!(
                validate_instance(&sensitivity_network(v, 2, 2, 25.0)),
                vec![]
            );
        }
        assert_eq!(validate_instance(&sioux_falls(7)), vec![]);
    }

    #[test]
    fn sioux_falls_size() {
        let inst = sioux_falls(7);
        assert_eq!(inst.nodes.len(), 24);
        assert_eq!(inst.links.len(), 76);
        let net = transform_stations(&inst);
        assert_eq!(net.node_count(), 29);
        let arcs: usize = (0..net.node_count()).map(|n| net.travel_degree(n)).sum();
        assert_eq!(arcs, 81);
        assert_eq!(inst.vehicles.len(), 15);
        assert_eq!(inst.demands.len(), 12);
    }

    #[test]
    fn random_micro_is_valid_and_seeded() {
        for seed in 0..200 {
            let inst = random_micro(seed, &MicroShape::default());
            assert_eq!(validate_instance(&inst), vec![], "seed {seed}");
            assert_eq!(inst, random_micro(seed, &MicroShape::default()));
        }
    }
}
