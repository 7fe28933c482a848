use std::collections::HashMap;
use std::fmt::Write as _;

use super::{
    ArcOption, DemandLink, Instance, NodeId, PenaltySpec, PhysicalLink, PhysicalNode, RechargeStep,
    Station, TimeWindow, Vehicle,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown node `{name}`")]
    DanglingNode { line: usize, name: String },
    #[error("line {line}: duplicate option {from}->{to} with travel time {travel_time}")]
    DuplicateOption {
        line: usize,
        from: String,
        to: String,
        travel_time: u32,
    },
    #[error("line {line}: {message}")]
    Window { line: usize, message: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::DanglingNode { line, .. }
            | ParseError::DuplicateOption { line, .. }
            | ParseError::Window { line, .. } => *line,
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Meta,
    Nodes,
    Links,
    Stations,
    Vehicles,
    Demands,
}

impl Section {
    fn from_header(header: &str) -> Option<Self> {
        Some(match header {
            "META" => Section::Meta,
            "NODES" => Section::Nodes,
            "LINKS" => Section::Links,
            "STATIONS" => Section::Stations,
            "VEHICLES" => Section::Vehicles,
            "DEMANDS" => Section::Demands,
            _ => return None,
        })
    }
}

struct Row<'a> {
    line: usize,
    text: &'a str,
}

fn number<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T, ParseError> {
    field
        .trim()
        .parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{}`", field.trim())))
}

fn fields(row: &Row<'_>, expected: usize, what: &str) -> Result<Vec<String>, ParseError> {
    let parts: Vec<String> = row.text.split(',').map(|s| s.trim().to_string()).collect();
    if parts.len() != expected {
        return Err(syntax(
            row.line,
            format!(
                "{what} row needs {expected} comma-separated fields, found {}",
                parts.len()
            ),
        ));
    }
    Ok(parts)
}

struct Resolver<'a> {
    ids: &'a HashMap<String, NodeId>,
}

impl Resolver<'_> {
    fn get(&self, line: usize, name: &str) -> Result<NodeId, ParseError> {
        self.ids
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::DanglingNode {
                line,
                name: name.to_string(),
            })
    }
}

fn check_window(
    line: usize,
    label: &str,
    window: TimeWindow,
    horizon: u32,
) -> Result<(), ParseError> {
    if window.lo > window.hi {
        return Err(ParseError::Window {
            line,
            message: format!("{label} window ({},{}) is inverted", window.lo, window.hi),
        });
    }
    if window.hi > horizon {
        return Err(ParseError::Window {
            line,
            message: format!(
                "{label} window ({},{}) exceeds horizon {horizon}",
                window.lo, window.hi
            ),
        });
    }
    Ok(())
}

/// Parses the line-oriented instance format. Cross references are resolved
/// after all sections are read, so section order is free.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut rows: HashMap<Section, Vec<Row<'_>>> = HashMap::new();
    let mut current: Option<Section> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let header = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, "unterminated section header"))?;
            let section = Section::from_header(header.trim())
                .ok_or_else(|| syntax(line, format!("unknown section `{header}`")))?;
            rows.entry(section).or_default();
            current = Some(section);
            continue;
        }
        let section = current.ok_or_else(|| syntax(line, "content before first section"))?;
        rows.entry(section).or_default().push(Row {
            line,
            text: content,
        });
    }
    let section = |s: Section| rows.get(&s).map(Vec::as_slice).unwrap_or(&[]);

    // META
    let mut meta: HashMap<&str, (usize, &str)> = HashMap::new();
    for row in section(Section::Meta) {
        for token in row.text.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| syntax(row.line, format!("expected key=value, found `{token}`")))?;
            match key {
                "horizon" | "resource_max" | "resource_min" | "budget" | "virtual_penalty" => {}
                _ => return Err(syntax(row.line, format!("unknown META key `{key}`"))),
            }
            if meta.insert(key, (row.line, value)).is_some() {
                return Err(syntax(row.line, format!("META key `{key}` given twice")));
            }
        }
    }
    let meta_line = section(Section::Meta).first().map_or(0, |r| r.line);
    let horizon: u32 = match meta.get("horizon") {
        Some(&(line, v)) => number(line, v, "horizon")?,
        None => return Err(syntax(meta_line, "META is missing `horizon`")),
    };
    let resource_max: u32 = match meta.get("resource_max") {
        Some(&(line, v)) => number(line, v, "resource_max")?,
        None => return Err(syntax(meta_line, "META is missing `resource_max`")),
    };
    let resource_min: u32 = match meta.get("resource_min") {
        Some(&(line, v)) => number(line, v, "resource_min")?,
        None => 0,
    };
    let budget: f64 = match meta.get("budget") {
        Some(&(line, v)) => number(line, v, "budget")?,
        None => 0.0,
    };
    let penalty = match meta.get("virtual_penalty") {
        None | Some((_, "auto")) => PenaltySpec::Auto,
        Some(&(line, v)) => PenaltySpec::Fixed(number(line, v, "virtual_penalty")?),
    };

    // NODES
    let mut nodes = Vec::new();
    let mut ids = HashMap::new();
    for row in section(Section::Nodes) {
        let name = row.text;
        if name.contains(',') || name.contains(char::is_whitespace) {
            return Err(syntax(row.line, format!("invalid node name `{name}`")));
        }
        if ids.insert(name.to_string(), nodes.len()).is_some() {
            return Err(syntax(row.line, format!("node `{name}` declared twice")));
        }
        nodes.push(PhysicalNode {
            id: nodes.len(),
            name: name.to_string(),
        });
    }
    let resolve = Resolver { ids: &ids };

    // LINKS
    let mut links: Vec<PhysicalLink> = Vec::new();
    for row in section(Section::Links) {
        let f = fields(row, 5, "LINKS")?;
        let from = resolve.get(row.line, &f[0])?;
        let to = resolve.get(row.line, &f[1])?;
        let option = ArcOption {
            travel_time: number(row.line, &f[2], "travel_time")?,
            travel_cost: number(row.line, &f[3], "cost")?,
            resource_delta: number(row.line, &f[4], "resource_delta")?,
        };
        match links.iter_mut().find(|l| l.from == from && l.to == to) {
            Some(link) => {
                if link
                    .options
                    .iter()
                    .any(|o| o.travel_time == option.travel_time)
                {
                    return Err(ParseError::DuplicateOption {
                        line: row.line,
                        from: f[0].clone(),
                        to: f[1].clone(),
                        travel_time: option.travel_time,
                    });
                }
                link.options.push(option);
            }
            None => links.push(PhysicalLink {
                from,
                to,
                options: vec![option],
            }),
        }
    }

    // STATIONS
    let mut stations = Vec::new();
    for row in section(Section::Stations) {
        let parts: Vec<&str> = row.text.split(',').map(str::trim).collect();
        if parts.len() < 4 {
            return Err(syntax(
                row.line,
                "STATIONS row needs node,build_cost,capacity,profile=...",
            ));
        }
        let node = resolve.get(row.line, parts[0])?;
        let build_cost = number(row.line, parts[1], "build_cost")?;
        let capacity = number(row.line, parts[2], "capacity")?;
        let mut profile = None;
        let mut unit_price = 0.0;
        for extra in &parts[3..] {
            let (key, value) = extra
                .split_once('=')
                .ok_or_else(|| syntax(row.line, format!("expected key=value, found `{extra}`")))?;
            match key.trim() {
                "profile" => {
                    let mut steps = Vec::new();
                    for entry in value.split('|') {
                        let (d, g) = entry.split_once(':').ok_or_else(|| {
                            syntax(row.line, format!("profile entry `{entry}` is not dur:gain"))
                        })?;
                        steps.push(RechargeStep {
                            duration: number(row.line, d, "recharge duration")?,
                            gain: number(row.line, g, "recharge gain")?,
                        });
                    }
                    profile = Some(steps);
                }
                "price" => unit_price = number(row.line, value, "price")?,
                other => return Err(syntax(row.line, format!("unknown station field `{other}`"))),
            }
        }
        let profile = profile.ok_or_else(|| syntax(row.line, "station is missing profile="))?;
        stations.push(Station {
            node,
            build_cost,
            capacity,
            profile,
            unit_price,
        });
    }

    // VEHICLES
    let mut vehicles = Vec::new();
    for row in section(Section::Vehicles) {
        let f = fields(row, 9, "VEHICLES")?;
        let depart_window = TimeWindow::new(
            number(row.line, &f[3], "depart_lo")?,
            number(row.line, &f[4], "depart_hi")?,
        );
        let arrive_window = TimeWindow::new(
            number(row.line, &f[5], "arrive_lo")?,
            number(row.line, &f[6], "arrive_hi")?,
        );
        check_window(row.line, "departure", depart_window, horizon)?;
        check_window(row.line, "arrival", arrive_window, horizon)?;
        if depart_window.lo > arrive_window.hi {
            return Err(ParseError::Window {
                line: row.line,
                message: format!(
                    "departure window starts at {} after arrival window ends at {}",
                    depart_window.lo, arrive_window.hi
                ),
            });
        }
        vehicles.push(Vehicle {
            id: f[0].clone(),
            origin: resolve.get(row.line, &f[1])?,
            destination: resolve.get(row.line, &f[2])?,
            depart_window,
            arrive_window,
            capacity: number(row.line, &f[7], "capacity")?,
            initial_resource: number(row.line, &f[8], "initial resource")?,
        });
    }

    // DEMANDS
    let mut demands = Vec::new();
    for row in section(Section::Demands) {
        let f = fields(row, 4, "DEMANDS")?;
        let demand = DemandLink {
            from: resolve.get(row.line, &f[0])?,
            to: resolve.get(row.line, &f[1])?,
            depart: number(row.line, &f[2], "depart")?,
            arrive: number(row.line, &f[3], "arrive")?,
        };
        if demand.depart > horizon || demand.arrive > horizon {
            return Err(ParseError::Window {
                line: row.line,
                message: format!(
                    "demand times ({},{}) exceed horizon {horizon}",
                    demand.depart, demand.arrive
                ),
            });
        }
        demands.push(demand);
    }

    Ok(Instance {
        nodes,
        links,
        stations,
        vehicles,
        demands,
        budget,
        horizon,
        resource_max,
        resource_min,
        penalty,
    })
}

/// Serializes an instance in the format read by [`parse_instance`].
pub fn write_instance(inst: &Instance) -> String {
    let name = |id: NodeId| inst.node_name(id);
    let mut out = String::new();
    let penalty = match inst.penalty {
        PenaltySpec::Auto => "auto".to_string(),
        PenaltySpec::Fixed(p) => p.to_string(),
    };
    let _ = writeln!(out, "[META]");
    let _ = writeln!(
        out,
        "horizon={}  resource_max={}  resource_min={}  budget={}  virtual_penalty={}",
        inst.horizon, inst.resource_max, inst.resource_min, inst.budget, penalty
    );
    let _ = writeln!(out, "[NODES]");
    for node in &inst.nodes {
        let _ = writeln!(out, "{}", node.name);
    }
    let _ = writeln!(
        out,
        "[LINKS]            # from,to,travel_time,cost,resource_delta"
    );
    for link in &inst.links {
        for o in &link.options {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                name(link.from),
                name(link.to),
                o.travel_time,
                o.travel_cost,
                o.resource_delta
            );
        }
    }
    let _ = writeln!(
        out,
        "[STATIONS]         # node,build_cost,capacity,profile=dur:gain|..."
    );
    for s in &inst.stations {
        let profile: Vec<String> = s
            .profile
            .iter()
            .map(|p| format!("{}:{}", p.duration, p.gain))
            .collect();
        let _ = write!(
            out,
            "{},{},{},profile={}",
            name(s.node),
            s.build_cost,
            s.capacity,
            profile.join("|")
        );
        if s.unit_price != 0.0 {
            let _ = write!(out, ",price={}", s.unit_price);
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "[VEHICLES]         # id,origin,dest,depart_lo,depart_hi,arrive_lo,arrive_hi,capacity,initial"
    );
    for v in &inst.vehicles {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            v.id,
            name(v.origin),
            name(v.destination),
            v.depart_window.lo,
            v.depart_window.hi,
            v.arrive_window.lo,
            v.arrive_window.hi,
            v.capacity,
            v.initial_resource
        );
    }
    let _ = writeln!(out, "[DEMANDS]          # from,to,depart,arrive");
    for d in &inst.demands {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            name(d.from),
            name(d.to),
            d.depart,
            d.arrive
        );
    }
    out
}
