//! Brute-force reference implementations for testing and cross-validation.
//!
//! Deliberately exponential: every simple path is enumerated, so results
//! are trustworthy ground truth on small graphs and nothing more. The
//! random-instance generator lives here too; it draws lengths, speeds, and
//! times from small rational grids so cross-method comparisons are exact.

use std::time::Instant;

use crate::network::{build_network, DirectionPolicy, Link, LinkId, NodeId, NodeRole, SplitSpec};
use crate::rational::Rational;
use crate::scenario::{RouteKind, Scenario, SpeedTable, WorkshopParams};
use crate::solution::{RoutePath, Solution, SolveMethod, SolveStats};
use crate::two_stage::{route_graphs, RouteGraph};

/// Default node-count cap. Instances at or under this size enumerate in
/// well under a second; anything bigger is outside the oracle's charter.
pub const DEFAULT_MAX_NODES: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("graph has {nodes} nodes, oracle capped at {max}")]
    CapExceeded { nodes: usize, max: usize },
    #[error("no feasible workshop/route combination")]
    Infeasible,
}

/// One enumerated simple path with its exact cost.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EnumeratedPath {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub cost_min: Rational,
}

/// Every simple path between two nodes of a route graph.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PathEnumeration {
    pub source: NodeId,
    pub target: NodeId,
    pub paths: Vec<EnumeratedPath>,
}

impl PathEnumeration {
    /// The cheapest enumerated path; ties keep the first in enumeration
    /// order, which is deterministic.
    pub fn min_cost(&self) -> Option<&EnumeratedPath> {
        self.paths.iter().min_by(|a, b| a.cost_min.cmp(&b.cost_min))
    }
}

/// Exhaustive depth-first enumeration of simple paths (no repeated node).
/// A path ends the moment it reaches the target, so `source == target`
/// yields exactly the empty path.
pub fn enumerate_simple_paths(
    graph: &RouteGraph,
    source: NodeId,
    target: NodeId,
    max_nodes: usize,
) -> Result<PathEnumeration, OracleError> {
    if graph.node_count() > max_nodes {
        return Err(OracleError::CapExceeded {
            nodes: graph.node_count(),
            max: max_nodes,
        });
    }
    let mut paths = Vec::new();
    let mut nodes = vec![source];
    let mut links = Vec::new();
    walk(
        graph,
        target,
        Rational::ZERO,
        &mut nodes,
        &mut links,
        &mut paths,
    );
    Ok(PathEnumeration {
        source,
        target,
        paths,
    })
}

fn walk(
    graph: &RouteGraph,
    target: NodeId,
    cost: Rational,
    nodes: &mut Vec<NodeId>,
    links: &mut Vec<LinkId>,
    out: &mut Vec<EnumeratedPath>,
) {
    let at = *nodes.last().expect("path never empty");
    if at == target {
        out.push(EnumeratedPath {
            nodes: nodes.clone(),
            links: links.clone(),
            cost_min: cost,
        });
        return;
    }
    let hops: Vec<(NodeId, LinkId, Rational)> = graph.arcs(at).collect();
    for (to, link, weight) in hops {
        if nodes.contains(&to) {
            continue;
        }
        nodes.push(to);
        links.push(link);
        walk(graph, target, cost + weight, nodes, links, out);
        nodes.pop();
        links.pop();
    }
}

/// Exact optimum by full enumeration over workshops and route-path triples.
pub fn brute_force_solution(
    scenario: &Scenario,
    max_nodes: usize,
) -> Result<(Solution, SolveStats), OracleError> {
    let started = Instant::now();
    let graphs = route_graphs(scenario);
    let mut enumerated = 0u64;
    let mut best: Option<Solution> = None;

    for workshop in scenario.workshops() {
        let params = scenario.workshop_params(workshop);
        let mut legs = Vec::with_capacity(3);
        for route in RouteKind::ALL {
            let (from, to) = scenario.route_endpoints(workshop, route);
            let en = enumerate_simple_paths(&graphs[route.index()], from, to, max_nodes)?;
            enumerated += en.paths.len() as u64;
            match en.min_cost() {
                Some(path) => legs.push(RoutePath {
                    route,
                    nodes: path.nodes.clone(),
                    links: path.links.clone(),
                    driving_min: path.cost_min,
                }),
                None => break, // this workshop cannot run this leg
            }
        }
        if legs.len() != 3 {
            continue;
        }
        let routes: [RoutePath; 3] = legs.try_into().expect("three legs");
        let total_min = params.schedule_min
            + params.maintenance_min
            + routes.iter().map(|r| r.driving_min).sum::<Rational>();
        if best.as_ref().is_none_or(|b| total_min < b.total_min) {
            best = Some(Solution {
                workshop,
                schedule_min: params.schedule_min,
                maintenance_min: params.maintenance_min,
                routes,
                total_min,
            });
        }
    }

    let solution = best.ok_or(OracleError::Infeasible)?;
    let stats = SolveStats {
        method: SolveMethod::BruteForce,
        expansions: enumerated,
        wall_time: started.elapsed(),
    };
    Ok((solution, stats))
}

/// xorshift64*, plenty for instance generation and fully reproducible.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed.wrapping_mul(2685821657736338717).max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(2685821657736338717)
    }

    /// Uniform draw from `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    fn pick<'a, T>(&mut self, choices: &'a [T]) -> &'a T {
        &choices[self.below(choices.len() as u64) as usize]
    }
}

/// Generates a random solvable scenario: a strongly connected network of at
/// most 12 nodes (breakdown site included) with 1-4 workshops, a spanning
/// backbone of two-way links plus random extras, and a breakdown injected
/// onto a random two-way link. All parameters come from small grids and the
/// result is exact-arithmetic friendly.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = Rng::new(seed);
    let workshops = 1 + rng.below(4) as u32;
    // 5 to 11 nodes before the split, 6 to 12 once the site is added
    let min_nodes = (workshops + 2).max(5);
    let pre_nodes = min_nodes + rng.below(u64::from(11 - min_nodes) + 1) as u32;

    let mut nodes: Vec<(NodeId, NodeRole)> = Vec::new();
    for id in 1..=pre_nodes {
        let role = if id <= workshops {
            NodeRole::Workshop
        } else if id == workshops + 1 {
            NodeRole::Warehouse
        } else if id == pre_nodes {
            NodeRole::Customer
        } else {
            NodeRole::Interchange
        };
        nodes.push((NodeId(id), role));
    }

    let length_grid: Vec<Rational> = (1..=20).map(|n| Rational::new(n, 2)).collect();
    let mut links: Vec<Link> = Vec::new();
    let add_link = |links: &mut Vec<Link>, tail: u32, head: u32, rng: &mut Rng, policy| {
        let id = LinkId(links.len() as u32 + 1);
        links.push(Link {
            id,
            tail: NodeId(tail),
            head: NodeId(head),
            length_km: *rng.pick(&length_grid),
            policy,
        });
    };

    // Two-way spanning backbone keeps every instance strongly connected.
    for id in 2..=pre_nodes {
        let anchor = 1 + rng.below(u64::from(id - 1)) as u32;
        let (tail, head) = if rng.below(2) == 0 {
            (anchor, id)
        } else {
            (id, anchor)
        };
        add_link(&mut links, tail, head, &mut rng, DirectionPolicy::TwoWay);
    }
    let extras = rng.below(u64::from(pre_nodes));
    for _ in 0..extras {
        let tail = 1 + rng.below(u64::from(pre_nodes)) as u32;
        let mut head = 1 + rng.below(u64::from(pre_nodes)) as u32;
        if head == tail {
            head = if tail == pre_nodes { 1 } else { tail + 1 };
        }
        let policy = match rng.below(4) {
            0 => DirectionPolicy::OneWayForward,
            1 => DirectionPolicy::OneWayReverse,
            _ => DirectionPolicy::TwoWay,
        };
        add_link(&mut links, tail, head, &mut rng, policy);
    }

    let network = build_network(nodes, links).expect("generated network is valid");

    // Break down on a random two-way link, splitting at a grid fraction.
    let two_way: Vec<&Link> = network
        .links()
        .iter()
        .filter(|l| l.policy == DirectionPolicy::TwoWay)
        .collect();
    let victim = two_way[rng.below(two_way.len() as u64) as usize];
    let fractions = [
        Rational::new(1, 4),
        Rational::new(1, 3),
        Rational::new(1, 2),
        Rational::new(2, 3),
        Rational::new(3, 4),
    ];
    let first = victim.length_km * *rng.pick(&fractions);
    let split = SplitSpec::forward(victim.id, first, victim.length_km - first);
    let network = network.inject_breakdown(&split).expect("split is valid");

    let speed_grid = [30i64, 40, 50, 60, 80, 100, 120];
    let mut speeds = SpeedTable::new();
    for route in RouteKind::ALL {
        speeds.set_default(route, Rational::from_int(*rng.pick(&speed_grid)));
        for link in network.links() {
            if rng.below(5) == 0 {
                speeds.set_override(route, link.id, Rational::from_int(*rng.pick(&speed_grid)));
            }
        }
    }

    let mut params = std::collections::BTreeMap::new();
    for workshop in network.workshops() {
        params.insert(
            workshop,
            WorkshopParams {
                schedule_min: Rational::from_int(5 * rng.below(13) as i64),
                maintenance_min: Rational::from_int(10 * rng.below(25) as i64),
            },
        );
    }

    Scenario::new(network, params, speeds).expect("generated scenario is valid")
}
