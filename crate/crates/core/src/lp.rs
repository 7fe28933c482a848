//! Export of the full binary program in LP text format.
//!
//! Every RST arc of every vehicle becomes a binary column over the whole
//! (node, time, resource) grid, so this is only practical for small
//! instances; `max_columns` guards against accidents.

use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::Instance;
use crate::rst::{transform_stations, ArcKind, RstState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("model would have {columns} columns, above the cap of {cap}")]
    TooLarge { columns: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Binary program: minimize `objective . x` subject to `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub columns: Vec<String>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LpModel {
    /// Constraint rows plus the objective row.
    pub fn row_count(&self) -> usize {
        self.rows.len() + 1
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    fn column(&mut self, name: String, cost: f64) -> usize {
        self.columns.push(name);
        self.objective.push(cost);
        self.columns.len() - 1
    }

    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        let term = |out: &mut String, first: bool, coef: f64, col: usize| {
            let sign = if coef < 0.0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = coef.abs();
            if mag == 1.0 {
                let _ = write!(out, " {sign} {}", self.columns[col]);
            } else {
                let _ = write!(out, " {sign} {mag} {}", self.columns[col]);
            }
        };
        out.push_str("Minimize\n obj:");
        let mut first = true;
        for (col, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut out, first, c, col);
                first = false;
                if col % 8 == 7 {
                    out.push_str("\n   ");
                }
            }
        }
        if first {
            // LP readers need at least one objective term
            let _ = write!(out, " 0 {}", self.columns.first().map_or("dummy", |c| c));
        }
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let _ = write!(out, " {}:", row.name);
            for (i, &(col, coef)) in row.terms.iter().enumerate() {
                term(&mut out, i == 0, coef, col);
                if i % 8 == 7 && i + 1 < row.terms.len() {
                    out.push_str("\n   ");
                }
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs);
        }
        out.push_str("Binary\n");
        for chunk in self.columns.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
        out.push_str("End\n");
        out
    }
}

/// Builds the binary program. Each vehicle has a source feeding its origin
/// at every departure time and a sink fed by the exhaust arcs; every grid
/// state up to the vehicle's capacity gets a balance row. Unserved demand
/// is covered by a binary virtual column at the penalty cost.
pub fn build_model(inst: &Instance, max_columns: usize) -> Result<LpModel, LpError> {
    let net = transform_stations(inst);
    let mut m = LpModel {
        columns: Vec::new(),
        objective: Vec::new(),
        rows: Vec::new(),
    };
    let h = inst.horizon;
    let rmin = inst.resource_min;
    let mut station_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inst.stations.len()];
    let mut demand_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inst.demands.len()];

    for (v, veh) in inst.vehicles.iter().enumerate() {
        let q = veh.capacity.min(inst.resource_max);
        let levels = (q.saturating_sub(rmin) + 1) as usize;
        let nodes = net.node_count();
        let states = nodes * (h as usize + 1) * levels;
        let index = |s: RstState| -> usize {
            ((s.time as usize * nodes) + s.node) * levels + (s.resource - rmin) as usize
        };
        let mut balance: Vec<Vec<(usize, f64)>> = vec![Vec::new(); states];
        let mut source = Vec::new();
        let mut sink = Vec::new();

        let origin = net.origin_node(veh);
        for t in veh.depart_window.times().filter(|&t| t <= h) {
            let r = veh.initial_resource;
            let col = m.column(format!("x_{v}_src_{origin}_{t}_{t}_{r}_{r}"), 0.0);
            source.push((col, 1.0));
            balance[index(RstState::new(origin, t, r))].push((col, -1.0));
        }
        for t in 0..=h {
            for node in 0..nodes {
                for r in rmin..=q {
                    let s = RstState::new(node, t, r);
                    let mut entry = 0;
                    net.for_each_outgoing(s, veh, |arc| {
                        let to = arc.to;
                        if arc.kind == ArcKind::Exhaust {
                            let name = format!("x_{v}_{node}_snk_{t}_{t}_{r}_{}", to.resource);
                            let col = m.column(name, 0.0);
                            balance[index(s)].push((col, 1.0));
                            sink.push((col, 1.0));
                            return;
                        }
                        let mut name = format!(
                            "x_{v}_{node}_{}_{t}_{}_{r}_{}",
                            to.node, to.time, to.resource
                        );
                        // recharge entries can share endpoints with the bypass and each other
                        if matches!(arc.kind, ArcKind::Recharge { .. }) {
                            name.push_str(&format!("_c{entry}"));
                            entry += 1;
                        }
                        let col = m.column(name, arc.cost);
                        balance[index(s)].push((col, 1.0));
                        balance[index(to)].push((col, -1.0));
                        if let ArcKind::Recharge { station } = arc.kind {
                            station_terms[station].push((col, 1.0));
                        }
                        if let Some(d) = arc.demand {
                            demand_terms[d].push((col, 1.0));
                        }
                    });
                    if m.columns.len() > max_columns {
                        return Err(LpError::TooLarge {
                            columns: m.columns.len(),
                            cap: max_columns,
                        });
                    }
                }
            }
        }
        m.rows.push(Row {
            name: format!("src_{v}"),
            terms: source,
            sense: Sense::Eq,
            rhs: 1.0,
        });
        m.rows.push(Row {
            name: format!("snk_{v}"),
            terms: sink,
            sense: Sense::Eq,
            rhs: 1.0,
        });
        for (i, terms) in balance.into_iter().enumerate() {
            let r = (i % levels) as u32 + rmin;
            let node = (i / levels) % nodes;
            let t = i / levels / nodes;
            m.rows.push(Row {
                name: format!("bal_{v}_{node}_{t}_{r}"),
                terms,
                sense: Sense::Eq,
                rhs: 0.0,
            });
        }
    }

    for (k, st) in inst.stations.iter().enumerate() {
        let w = m.column(format!("w_{k}"), 0.0);
        let mut terms = std::mem::take(&mut station_terms[k]);
        terms.push((w, -f64::from(st.capacity)));
        m.rows.push(Row {
            name: format!("cap_{k}"),
            terms,
            sense: Sense::Le,
            rhs: 0.0,
        });
    }
    let penalty = inst.virtual_penalty();
    for (d, terms) in demand_terms.into_iter().enumerate() {
        let u = m.column(format!("u_{d}"), penalty);
        let mut terms = terms;
        terms.push((u, 1.0));
        m.rows.push(Row {
            name: format!("dem_{d}"),
            terms,
            sense: Sense::Ge,
            rhs: 1.0,
        });
    }
    if !inst.stations.is_empty() {
        let first_w = m.columns.len() - inst.demands.len() - inst.stations.len();
        m.rows.push(Row {
            name: "budget".into(),
            terms: inst
                .stations
                .iter()
                .enumerate()
                .map(|(k, s)| (first_w + k, s.build_cost))
                .collect(),
            sense: Sense::Le,
            rhs: inst.budget,
        });
    }
    Ok(m)
}

pub fn export_lp(inst: &Instance, max_columns: usize) -> Result<String, LpError> {
    Ok(build_model(inst, max_columns)?.to_lp_text())
}
