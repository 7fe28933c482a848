#![allow(dead_code)]

use std::collections::HashMap;

use rrslrp::instance::Instance;
use rrslrp::knapsack::{Candidate, StationSelection};
use rrslrp::multipliers::Multipliers;
use rrslrp::oracle::{raw_origins, raw_successors, RawArc, RawState};

fn profit(arc: &RawArc, m: &Multipliers) -> f64 {
    let mut c = arc.cost;
    if let Some(d) = arc.demand {
        c -= m.epsilon[d];
    }
    if let Some(k) = arc.recharge_at {
        c += m.theta[k];
    }
    c
}

/// Minimum generalized tour cost by memoized backward recursion.
pub fn route_oracle(inst: &Instance, v: usize, m: &Multipliers) -> Option<f64> {
    fn go(
        inst: &Instance,
        v: usize,
        m: &Multipliers,
        s: RawState,
        memo: &mut HashMap<RawState, f64>,
    ) -> f64 {
        if let Some(&c) = memo.get(&s) {
            return c;
        }
        let mut best = f64::INFINITY;
        for arc in raw_successors(inst, v, s) {
            let tail = if arc.exhaust {
                0.0
            } else {
                go(inst, v, m, arc.to, memo)
            };
            best = best.min(profit(&arc, m) + tail);
        }
        memo.insert(s, best);
        best
    }
    let mut memo = HashMap::new();
    let best = raw_origins(inst, v)
        .into_iter()
        .map(|s| go(inst, v, m, s, &mut memo))
        .fold(f64::INFINITY, f64::min);
    best.is_finite().then_some(best)
}

/// Minimum over every path, one by one. Exponential; tiny horizons only.
pub fn exhaustive_paths(inst: &Instance, v: usize, m: &Multipliers) -> Option<f64> {
    fn dfs(inst: &Instance, v: usize, m: &Multipliers, s: RawState, acc: f64, best: &mut f64) {
        for arc in raw_successors(inst, v, s) {
            let c = acc + profit(&arc, m);
            if arc.exhaust {
                *best = best.min(c);
            } else {
                dfs(inst, v, m, arc.to, c, best);
            }
        }
    }
    let mut best = f64::INFINITY;
    for s in raw_origins(inst, v) {
        dfs(inst, v, m, s, 0.0, &mut best);
    }
    best.is_finite().then_some(best)
}

/// Subset enumeration with the documented tie-break.
pub fn knapsack_brute(cands: &[Candidate], budget: f64) -> StationSelection {
    let free: Vec<usize> = cands
        .iter()
        .filter(|c| c.value.abs() <= 1e-9 && c.cost.abs() < 0.005)
        .map(|c| c.id)
        .collect();
    let items: Vec<&Candidate> = cands.iter().filter(|c| !free.contains(&c.id)).collect();
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << items.len()) {
        let chosen: Vec<&Candidate> = (0..items.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| items[i])
            .collect();
        let cost: f64 = chosen.iter().map(|c| c.cost).sum();
        if cost > budget + 1e-9 {
            continue;
        }
        let value: f64 = chosen.iter().map(|c| c.value).sum();
        let mut ids: Vec<usize> = chosen.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        let better = match &best {
            None => true,
            Some((bv, bc, bids)) => {
                let tol = 1e-9 * value.abs().max(bv.abs()).max(1.0);
                if (value - bv).abs() > tol {
                    value > *bv
                } else if (cost - bc).abs() > 1e-9 {
                    cost < *bc
                } else {
                    ids < *bids
                }
            }
        };
        if better {
            best = Some((value, cost, ids));
        }
    }
    let mut selected = best.map(|b| b.2).unwrap_or_default();
    selected.extend(free);
    selected.sort_unstable();
    let pick = |id: usize| cands.iter().find(|c| c.id == id).unwrap();
    StationSelection {
        total_value: selected.iter().map(|&i| pick(i).value).sum(),
        total_cost: selected.iter().map(|&i| pick(i).cost).sum(),
        selected,
    }
}

/// Row and column counts plus the optimum of an LP-format binary program,
/// read back from text and solved with microlp.
pub struct LpSolve {
    pub rows: usize,
    pub columns: usize,
    pub objective: Option<f64>,
}

pub fn solve_lp_text(text: &str) -> LpSolve {
    use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};

    let mut section = "";
    let mut objective_tokens: Vec<String> = Vec::new();
    let mut constraint_tokens: Vec<String> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        match trimmed {
            "Minimize" | "Subject To" | "Binary" | "End" => {
                section = trimmed;
                continue;
            }
            _ => {}
        }
        let tokens = trimmed.split_whitespace().map(str::to_string);
        match section {
            "Minimize" => objective_tokens.extend(tokens),
            "Subject To" => constraint_tokens.extend(tokens),
            "Binary" => binaries.extend(tokens),
            _ => {}
        }
    }

    let parse_terms = |tokens: &[String]| -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let (mut sign, mut coef) = (1.0, None::<f64>);
        for t in tokens {
            match t.as_str() {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                _ => {
                    if let Ok(x) = t.parse::<f64>() {
                        coef = Some(x);
                    } else {
                        out.push((t.clone(), sign * coef.unwrap_or(1.0)));
                        sign = 1.0;
                        coef = None;
                    }
                }
            }
        }
        out
    };

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let objective: HashMap<String, f64> = parse_terms(&objective_tokens[1..]).into_iter().collect();
    let mut vars = HashMap::new();
    for name in &binaries {
        let v = problem.add_binary_var(objective.get(name).copied().unwrap_or(0.0));
        vars.insert(name.clone(), v);
    }

    let mut rows = 0;
    let mut i = 0;
    while i < constraint_tokens.len() {
        assert!(constraint_tokens[i].ends_with(':'), "row name expected");
        let start = i + 1;
        let mut j = start;
        while !matches!(constraint_tokens[j].as_str(), "<=" | ">=" | "=") {
            j += 1;
        }
        let op = match constraint_tokens[j].as_str() {
            "<=" => ComparisonOp::Le,
            ">=" => ComparisonOp::Ge,
            _ => ComparisonOp::Eq,
        };
        let rhs: f64 = constraint_tokens[j + 1].parse().unwrap();
        let mut expr = LinearExpr::empty();
        for (name, c) in parse_terms(&constraint_tokens[start..j]) {
            expr.add(vars[&name], c);
        }
        problem.add_constraint(expr, op, rhs);
        rows += 1;
        i = j + 2;
    }
    let objective = problem
        .solve()
        .ok()
        .and_then(|o| o.into_solution().ok())
        .map(|s| s.objective());
    LpSolve {
        rows: rows + 1,
        columns: binaries.len(),
        objective,
    }
}
