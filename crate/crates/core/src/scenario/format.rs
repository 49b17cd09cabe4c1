//! Scenario file parsing, canonical serialization, and validation
//! diagnostics.
//!
//! The format is plain text with `#` comments and comma-separated records
//! under five sections:
//!
//! ```text
//! [nodes]      id, role            role: workshop|warehouse|customer|interchange|breakdown
//! [links]      id, tail, head, length_km, policy
//!                                  policy: two_way|one_way|one_way_reverse
//! [speeds]     route, link|default, speed_kmh
//! [workshops]  node, schedule_min, maintenance_min
//! [breakdown]  node, in_link, out_link
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::network::{
    build_network, check_layout, find_breakdown, DirectionPolicy, Link, LinkId, NodeId, NodeRole,
};
use crate::rational::Rational;
use crate::scenario::{RouteKind, Scenario, ScenarioError, SpeedTable, WorkshopParams};

fn parse_error(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

/// Splits a file into `(section, line, fields)` records, enforcing the
/// allowed section names. Shared by the scenario and path-fixture parsers.
pub(crate) fn split_records(
    text: &str,
    allowed_sections: &[&str],
) -> Result<Vec<(String, usize, Vec<String>)>, ScenarioError> {
    let mut records = Vec::new();
    let mut section: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.split_once('#') {
            Some((before, _)) => before,
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if !allowed_sections.contains(&name) {
                return Err(parse_error(line_no, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some(section) = &section else {
            return Err(parse_error(line_no, "record before any section header"));
        };
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        records.push((section.clone(), line_no, fields));
    }
    Ok(records)
}

fn expect_fields<'a>(
    fields: &'a [String],
    count: usize,
    line: usize,
    what: &str,
) -> Result<&'a [String], ScenarioError> {
    if fields.len() != count {
        return Err(parse_error(
            line,
            format!("{what} record needs {count} fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn parse_u32(field: &str, line: usize, what: &str) -> Result<u32, ScenarioError> {
    field
        .parse()
        .map_err(|_| parse_error(line, format!("{what} {field:?} is not a positive integer")))
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<Rational, ScenarioError> {
    Rational::parse(field)
        .map_err(|_| parse_error(line, format!("{what} {field:?} is not a number")))
}

pub(crate) struct RawScenario {
    pub nodes: Vec<(usize, NodeId, NodeRole)>,
    pub links: Vec<(usize, Link)>,
    pub speeds: Vec<(usize, RouteKind, Option<LinkId>, Rational)>,
    pub workshops: Vec<(usize, NodeId, WorkshopParams)>,
    pub breakdown: Option<(usize, NodeId, LinkId, LinkId)>,
}

pub(crate) fn parse_raw(text: &str) -> Result<RawScenario, ScenarioError> {
    let sections = ["nodes", "links", "speeds", "workshops", "breakdown"];
    let mut raw = RawScenario {
        nodes: Vec::new(),
        links: Vec::new(),
        speeds: Vec::new(),
        workshops: Vec::new(),
        breakdown: None,
    };
    for (section, line, fields) in split_records(text, &sections)? {
        match section.as_str() {
            "nodes" => {
                let f = expect_fields(&fields, 2, line, "node")?;
                let id = NodeId(parse_u32(&f[0], line, "node id")?);
                let role = NodeRole::from_token(&f[1])
                    .ok_or_else(|| parse_error(line, format!("unknown node role {:?}", f[1])))?;
                raw.nodes.push((line, id, role));
            }
            "links" => {
                let f = expect_fields(&fields, 5, line, "link")?;
                let link = Link {
                    id: LinkId(parse_u32(&f[0], line, "link id")?),
                    tail: NodeId(parse_u32(&f[1], line, "tail node")?),
                    head: NodeId(parse_u32(&f[2], line, "head node")?),
                    length_km: parse_number(&f[3], line, "link length")?,
                    policy: DirectionPolicy::from_token(&f[4]).ok_or_else(|| {
                        parse_error(line, format!("unknown direction policy {:?}", f[4]))
                    })?,
                };
                raw.links.push((line, link));
            }
            "speeds" => {
                let f = expect_fields(&fields, 3, line, "speed")?;
                let route_no = parse_u32(&f[0], line, "route")?;
                let route = RouteKind::from_number(route_no).ok_or_else(|| {
                    parse_error(line, format!("route must be 1..3, got {route_no}"))
                })?;
                let link = if f[1] == "default" {
                    None
                } else {
                    Some(LinkId(parse_u32(&f[1], line, "link id")?))
                };
                let speed = parse_number(&f[2], line, "speed")?;
                raw.speeds.push((line, route, link, speed));
            }
            "workshops" => {
                let f = expect_fields(&fields, 3, line, "workshop")?;
                let node = NodeId(parse_u32(&f[0], line, "workshop node")?);
                let params = WorkshopParams {
                    schedule_min: parse_number(&f[1], line, "schedule time")?,
                    maintenance_min: parse_number(&f[2], line, "maintenance time")?,
                };
                raw.workshops.push((line, node, params));
            }
            "breakdown" => {
                let f = expect_fields(&fields, 3, line, "breakdown")?;
                if raw.breakdown.is_some() {
                    return Err(parse_error(line, "breakdown declared more than once"));
                }
                raw.breakdown = Some((
                    line,
                    NodeId(parse_u32(&f[0], line, "breakdown node")?),
                    LinkId(parse_u32(&f[1], line, "in link")?),
                    LinkId(parse_u32(&f[2], line, "out link")?),
                ));
            }
            _ => unreachable!("section names validated"),
        }
    }
    Ok(raw)
}

fn build_from_raw(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    let nodes: Vec<(NodeId, NodeRole)> =
        raw.nodes.iter().map(|(_, id, role)| (*id, *role)).collect();
    let links: Vec<Link> = raw.links.iter().map(|(_, link)| link.clone()).collect();
    let network = build_network(nodes, links)?;

    let (_, declared_node, declared_in, declared_out) =
        raw.breakdown.ok_or(ScenarioError::NoBreakdown)?;
    let inferred = network.breakdown().ok_or(ScenarioError::NoBreakdown)?;
    if (inferred.node, inferred.in_link, inferred.out_link)
        != (declared_node, declared_in, declared_out)
    {
        return Err(ScenarioError::InvalidBreakdown(format!(
            "declared ({declared_node}, {declared_in}, {declared_out}) but the network wires ({}, {}, {})",
            inferred.node, inferred.in_link, inferred.out_link
        )));
    }

    let mut speeds = SpeedTable::new();
    for (_, route, link, speed) in &raw.speeds {
        match link {
            None => speeds.set_default(*route, *speed),
            Some(link) => speeds.set_override(*route, *link, *speed),
        }
    }

    let mut params = BTreeMap::new();
    for (line, node, p) in &raw.workshops {
        if params.insert(*node, *p).is_some() {
            return Err(parse_error(
                *line,
                format!("duplicate workshop record for node {node}"),
            ));
        }
    }

    Scenario::new(network, params, speeds)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    build_from_raw(parse_raw(text)?)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

/// Canonical serialization: fixed section order, records sorted by id,
/// canonical number strings. Only drivable directions survive, so a split
/// carriageway serializes with its remaining direction (or is dropped once
/// fully closed); parsing the output reproduces an equivalent scenario, and
/// an identical one whenever the scenario itself came from a file.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let network = scenario.network();
    let mut out = String::new();

    out.push_str("[nodes]\n");
    for (id, role) in network.nodes() {
        out.push_str(&format!("{id}, {}\n", role.token()));
    }

    out.push_str("\n[links]\n");
    let mut kept: BTreeSet<LinkId> = BTreeSet::new();
    for link in network.links() {
        let policy = match (network.allows_forward(link), network.allows_reverse(link)) {
            (true, true) => DirectionPolicy::TwoWay,
            (true, false) => DirectionPolicy::OneWayForward,
            (false, true) => DirectionPolicy::OneWayReverse,
            (false, false) => continue,
        };
        kept.insert(link.id);
        out.push_str(&format!(
            "{}, {}, {}, {}, {}\n",
            link.id,
            link.tail,
            link.head,
            link.length_km,
            policy.token()
        ));
    }

    out.push_str("\n[speeds]\n");
    for route in RouteKind::ALL {
        if let Some(speed) = scenario.speeds().default_speed(route) {
            out.push_str(&format!("{route}, default, {speed}\n"));
        }
    }
    for (route, link, speed) in scenario.speeds().overrides() {
        if kept.contains(&link) {
            out.push_str(&format!("{route}, {link}, {speed}\n"));
        }
    }

    out.push_str("\n[workshops]\n");
    for (node, params) in scenario.workshop_param_map() {
        out.push_str(&format!(
            "{node}, {}, {}\n",
            params.schedule_min, params.maintenance_min
        ));
    }

    let b = network
        .breakdown()
        .expect("scenario always has a breakdown");
    out.push_str(&format!(
        "\n[breakdown]\n{}, {}, {}\n",
        b.node, b.in_link, b.out_link
    ));
    out
}

/// Result of validating scenario text without solving it.
#[derive(Debug)]
pub struct Diagnosis {
    /// Invariant violations, one human-readable line each. Empty means clean.
    pub problems: Vec<String>,
    /// `OK, ...` summary line, present only when there are no problems.
    pub summary: Option<String>,
}

impl Diagnosis {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Collects every invariant violation in the scenario text instead of
/// stopping at the first, for the `validate` command. Syntax errors still
/// fail fast since nothing after them can be trusted.
pub fn diagnose_scenario(text: &str) -> Result<Diagnosis, ScenarioError> {
    let raw = parse_raw(text)?;
    let mut problems = Vec::new();

    let mut node_ids = BTreeSet::new();
    for (line, id, _) in &raw.nodes {
        if !node_ids.insert(*id) {
            problems.push(format!("line {line}: duplicate node id {id}"));
        }
    }
    let mut link_ids = BTreeSet::new();
    for (line, link) in &raw.links {
        if !link_ids.insert(link.id) {
            problems.push(format!("line {line}: duplicate link id {}", link.id));
        }
        if link.tail == link.head {
            problems.push(format!(
                "link {}: tail and head are the same node {}",
                link.id, link.tail
            ));
        }
        for end in [link.tail, link.head] {
            if !raw.nodes.iter().any(|(_, id, _)| *id == end) {
                problems.push(format!(
                    "link {}: endpoint node {end} does not exist",
                    link.id
                ));
            }
        }
        if !link.length_km.is_positive() {
            problems.push(format!("link {}: length must be positive", link.id));
        }
    }

    let mut nodes: Vec<(NodeId, NodeRole)> =
        raw.nodes.iter().map(|(_, id, role)| (*id, *role)).collect();
    nodes.sort_by_key(|(id, _)| *id);
    nodes.dedup_by_key(|(id, _)| *id);
    if let Err(e) = check_layout(&nodes) {
        problems.push(e.to_string());
    }

    let links: Vec<Link> = raw.links.iter().map(|(_, l)| l.clone()).collect();
    match raw.breakdown {
        None => problems.push("no breakdown site".to_string()),
        Some((line, node, in_link, out_link)) => match find_breakdown(&nodes, &links, None) {
            Ok(Some(b)) => {
                if (b.node, b.in_link, b.out_link) != (node, in_link, out_link) {
                    problems.push(format!(
                        "line {line}: breakdown declared as ({node}, {in_link}, {out_link}) \
                         but the network wires ({}, {}, {})",
                        b.node, b.in_link, b.out_link
                    ));
                }
            }
            Ok(None) => problems.push(format!(
                "line {line}: breakdown declared but no node has the breakdown role"
            )),
            Err(e) => problems.push(e.to_string()),
        },
    }

    // Reachability from the warehouse, collecting every stranded node.
    if let Some(warehouse) = nodes
        .iter()
        .find(|(_, r)| *r == NodeRole::Warehouse)
        .map(|(id, _)| *id)
    {
        let mut reached = BTreeSet::new();
        reached.insert(warehouse);
        let mut frontier = vec![warehouse];
        while let Some(u) = frontier.pop() {
            for link in &links {
                let forward_ok = matches!(
                    link.policy,
                    DirectionPolicy::TwoWay | DirectionPolicy::OneWayForward
                );
                let reverse_ok = matches!(
                    link.policy,
                    DirectionPolicy::TwoWay | DirectionPolicy::OneWayReverse
                );
                if forward_ok && link.tail == u && reached.insert(link.head) {
                    frontier.push(link.head);
                }
                if reverse_ok && link.head == u && reached.insert(link.tail) {
                    frontier.push(link.tail);
                }
            }
        }
        for (id, role) in &nodes {
            if *role != NodeRole::BreakdownSite && !reached.contains(id) {
                problems.push(format!("node {id} is not reachable from the warehouse"));
            }
        }
    }

    let mut speeds = SpeedTable::new();
    for (line, route, link, speed) in &raw.speeds {
        if let Some(link) = link {
            if !link_ids.contains(link) {
                problems.push(format!(
                    "line {line}: speed override for route {route} references unknown link {link}"
                ));
                continue;
            }
        }
        match link {
            None => speeds.set_default(*route, *speed),
            Some(link) => speeds.set_override(*route, *link, *speed),
        }
    }
    for route in RouteKind::ALL {
        for (_, link) in &raw.links {
            match speeds.resolve(route, link.id) {
                None => problems.push(format!(
                    "no speed resolves for route {route} on link {}",
                    link.id
                )),
                Some(s) if !s.is_positive() => problems.push(format!(
                    "speed for route {route} on link {} must be positive",
                    link.id
                )),
                Some(_) => {}
            }
        }
    }

    let declared: BTreeSet<NodeId> = raw.workshops.iter().map(|(_, node, _)| *node).collect();
    for (line, node, params) in &raw.workshops {
        match nodes.iter().find(|(id, _)| id == node) {
            Some((_, NodeRole::Workshop)) => {}
            Some(_) => problems.push(format!(
                "line {line}: workshop parameters given for non-workshop node {node}"
            )),
            None => problems.push(format!(
                "line {line}: workshop parameters given for unknown node {node}"
            )),
        }
        if params.schedule_min.is_negative() || params.maintenance_min.is_negative() {
            problems.push(format!("workshop {node}: times must be non-negative"));
        }
    }
    for (id, role) in &nodes {
        if *role == NodeRole::Workshop && !declared.contains(id) {
            problems.push(format!(
                "workshop {id} has no schedule/maintenance parameters"
            ));
        }
    }

    let summary = if problems.is_empty() {
        // Everything checked out individually; the full build must succeed.
        let scenario = build_from_raw(raw).map_err(|e| ScenarioError::Parse {
            line: 0,
            message: format!("internal: diagnostics passed but build failed: {e}"),
        })?;
        Some(format!(
            "OK, {} nodes, {} links, {} directed pairs",
            scenario.network().node_count(),
            scenario.network().link_count(),
            scenario.network().directed_pairs().len()
        ))
    } else {
        None
    };

    Ok(Diagnosis { problems, summary })
}
