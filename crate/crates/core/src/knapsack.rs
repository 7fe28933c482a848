//! Station selection: 0/1 knapsack over build costs.

/// Default cost grid: one hundredth of a cost unit.
pub const DEFAULT_QUANTUM: f64 = 0.01;

const VALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub id: usize,
    pub cost: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationSelection {
    /// Ascending station ids.
    pub selected: Vec<usize>,
    pub total_value: f64,
    pub total_cost: f64,
}

impl StationSelection {
    pub fn empty() -> Self {
        Self {
            selected: Vec::new(),
            total_value: 0.0,
            total_cost: 0.0,
        }
    }

    pub fn contains(&self, id: usize) -> bool {
        self.selected.binary_search(&id).is_ok()
    }
}

#[derive(Debug, Clone)]
struct Cell {
    value: f64,
    ids: Vec<usize>,
}

fn value_cmp(a: f64, b: f64) -> std::cmp::Ordering {
    if (a - b).abs() <= VALUE_TOL * a.abs().max(b.abs()).max(1.0) {
        std::cmp::Ordering::Equal
    } else {
        a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Maximizes total value within `budget`. Ties prefer the smaller total
/// cost, then the lexicographically smallest id list. Stations with zero
/// value and zero cost are always added; other zero-value stations never
/// are. Costs are rounded to multiples of `quantum`.
pub fn solve_station_selection(
    candidates: &[Candidate],
    budget: f64,
    quantum: f64,
) -> StationSelection {
    let quant = |c: f64| (c / quantum).round().max(0.0) as u64;
    let free_neutral = |c: &Candidate| quant(c.cost) == 0 && c.value.abs() <= VALUE_TOL;
    let mut items: Vec<(usize, u64, f64)> = candidates
        .iter()
        .filter(|c| c.value > VALUE_TOL)
        .map(|c| (c.id, quant(c.cost), c.value))
        .collect();
    items.sort_by(|a, b| b.0.cmp(&a.0));

    let total: u64 = items.iter().map(|i| i.1).sum();
    let mut cap = ((budget / quantum) + 1e-9).floor().max(0.0) as u64;
    cap = cap.min(total);
    let g = items.iter().fold(0, |g, i| gcd(g, i.1));
    let (weights, cap): (Vec<u64>, u64) = if g > 1 {
        (items.iter().map(|i| i.1 / g).collect(), cap / g)
    } else {
        (items.iter().map(|i| i.1).collect(), cap)
    };

    let cap = cap as usize;
    let mut dp: Vec<Option<Cell>> = vec![None; cap + 1];
    dp[0] = Some(Cell {
        value: 0.0,
        ids: Vec::new(),
    });
    for (item, &w) in items.iter().zip(&weights) {
        let w = w as usize;
        if w > cap {
            continue;
        }
        for c in (w..=cap).rev() {
            let Some(prev) = &dp[c - w] else { continue };
            let value = prev.value + item.2;
            let better = match &dp[c] {
                None => true,
                Some(cur) => match value_cmp(value, cur.value) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        let mut ids = Vec::with_capacity(prev.ids.len() + 1);
                        ids.push(item.0);
                        ids.extend_from_slice(&prev.ids);
                        ids < cur.ids
                    }
                },
            };
            if better {
                let mut ids = Vec::with_capacity(prev.ids.len() + 1);
                ids.push(item.0);
                ids.extend_from_slice(&prev.ids);
                dp[c] = Some(Cell { value, ids });
            }
        }
    }

    let mut best: Option<&Cell> = None;
    for cell in dp.iter().flatten() {
        // increasing cost order: equal values keep the cheaper incumbent
        let replace = match best {
            None => true,
            Some(b) => value_cmp(cell.value, b.value) == std::cmp::Ordering::Greater,
        };
        if replace {
            best = Some(cell);
        }
    }
    let mut selected = best.map(|c| c.ids.clone()).unwrap_or_default();
    selected.extend(candidates.iter().filter(|c| free_neutral(c)).map(|c| c.id));
    selected.sort_unstable();
    selected.dedup();
    let pick = |id: usize| candidates.iter().find(|c| c.id == id).unwrap();
    StationSelection {
        total_value: selected.iter().map(|&id| pick(id).value).sum(),
        total_cost: selected.iter().map(|&id| pick(id).cost).sum(),
        selected,
    }
}
