//! Two-stage solver: exact shortest paths per (workshop, route) via
//! Dijkstra, then an argmin over workshops.
//!
//! Replacing each leg's driving time with its shortest-path minimum is
//! valid because no feasible leg can be faster than the shortest path, and
//! the legs are otherwise independent once the workshop is fixed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::network::{LinkId, NodeId};
use crate::rational::Rational;
use crate::scenario::{RouteKind, Scenario};
use crate::solution::{RoutePath, Solution, SolveMethod, SolveStats};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TwoStageError {
    #[error("unknown source node {0}")]
    UnknownSource(NodeId),
    #[error("no path exists for route {route} with workshop {workshop}")]
    Unreachable { route: RouteKind, workshop: NodeId },
    #[error("no workshop can serve the breakdown")]
    AllUnreachable,
}

#[derive(Debug)]
struct Arc {
    to: usize,
    link: LinkId,
    weight_min: Rational,
}

/// Directed adjacency for one route: the drivable node pairs weighted by
/// that route's per-link driving times. The arc set is the same for every
/// route; only the weights change.
#[derive(Debug)]
pub struct RouteGraph {
    route: RouteKind,
    node_ids: Vec<NodeId>,
    adj: Vec<Vec<Arc>>,
}

impl RouteGraph {
    pub fn new(scenario: &Scenario, route: RouteKind) -> RouteGraph {
        let network = scenario.network();
        let node_ids: Vec<NodeId> = network.nodes().iter().map(|(id, _)| *id).collect();
        let mut adj: Vec<Vec<Arc>> = (0..node_ids.len()).map(|_| Vec::new()).collect();
        for pair in network.directed_pairs().pairs() {
            let from = node_ids.binary_search(&pair.from).expect("node exists");
            let to = node_ids.binary_search(&pair.to).expect("node exists");
            adj[from].push(Arc {
                to,
                link: pair.link,
                weight_min: scenario.link_time_min(route, pair.link),
            });
        }
        // Pair views are sorted by (from, to, link), so each adjacency list
        // is already ordered; the relaxation order is deterministic.
        RouteGraph {
            route,
            node_ids,
            adj,
        }
    }

    pub fn route(&self) -> RouteKind {
        self.route
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    fn index_of(&self, node: NodeId) -> Option<usize> {
        self.node_ids.binary_search(&node).ok()
    }

    /// Outgoing `(to, link, weight)` arcs of a node, in deterministic order.
    pub fn arcs(&self, from: NodeId) -> impl Iterator<Item = (NodeId, LinkId, Rational)> + '_ {
        let idx = self.index_of(from).expect("node exists");
        self.adj[idx]
            .iter()
            .map(|a| (self.node_ids[a.to], a.link, a.weight_min))
    }
}

/// Builds the three per-route graphs of a scenario at once.
pub fn route_graphs(scenario: &Scenario) -> [RouteGraph; 3] {
    [
        RouteGraph::new(scenario, RouteKind::TowOut),
        RouteGraph::new(scenario, RouteKind::TowBack),
        RouteGraph::new(scenario, RouteKind::Delivery),
    ]
}

#[derive(PartialEq, Eq)]
struct HeapEntry {
    dist: Rational,
    node: usize,
}

// Min-heap on (dist, node id): BinaryHeap is a max-heap, so reverse. Equal
// distances pop in node-id order, which pins the settle order.
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances and predecessors from one source. When produced by an
/// early-exit query only the target's entries are meaningful.
#[derive(Debug)]
pub struct ShortestPaths<'g> {
    graph: &'g RouteGraph,
    source: usize,
    dist: Vec<Option<Rational>>,
    pred: Vec<Option<(usize, LinkId)>>,
    /// Heap pops performed, the method's effort counter.
    pub pops: u64,
}

impl ShortestPaths<'_> {
    pub fn source(&self) -> NodeId {
        self.graph.node_ids[self.source]
    }

    /// Exact shortest distance, `None` when unreachable.
    pub fn distance(&self, to: NodeId) -> Option<Rational> {
        self.dist[self.graph.index_of(to)?]
    }

    /// One shortest path to `to` as (nodes, links). The source yields a
    /// single-node path with no links.
    pub fn path_to(&self, to: NodeId) -> Option<(Vec<NodeId>, Vec<LinkId>)> {
        let target = self.graph.index_of(to)?;
        self.dist[target]?;
        let mut nodes = vec![to];
        let mut links = Vec::new();
        let mut at = target;
        while at != self.source {
            let (prev, link) = self.pred[at].expect("reachable non-source has a predecessor");
            links.push(link);
            nodes.push(self.graph.node_ids[prev]);
            at = prev;
        }
        nodes.reverse();
        links.reverse();
        Some((nodes, links))
    }
}

/// Dijkstra over positive weights with a binary heap and lazy deletion.
///
/// Determinism: the heap breaks equal keys by node id, and among equal-cost
/// shortest paths a node keeps the predecessor with the lowest id.
pub fn dijkstra<'g>(
    graph: &'g RouteGraph,
    source: NodeId,
) -> Result<ShortestPaths<'g>, TwoStageError> {
    dijkstra_inner(graph, source, None)
}

/// Single-target query that stops as soon as the target settles; distances
/// to other nodes are left undefined.
pub fn shortest_path<'g>(
    graph: &'g RouteGraph,
    source: NodeId,
    target: NodeId,
) -> Result<ShortestPaths<'g>, TwoStageError> {
    let target = graph
        .index_of(target)
        .ok_or(TwoStageError::UnknownSource(target))?;
    dijkstra_inner(graph, source, Some(target))
}

fn dijkstra_inner<'g>(
    graph: &'g RouteGraph,
    source: NodeId,
    target: Option<usize>,
) -> Result<ShortestPaths<'g>, TwoStageError> {
    let source = graph
        .index_of(source)
        .ok_or(TwoStageError::UnknownSource(source))?;
    let n = graph.node_count();
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut pred: Vec<Option<(usize, LinkId)>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut pops = 0u64;

    dist[source] = Some(Rational::ZERO);
    heap.push(HeapEntry {
        dist: Rational::ZERO,
        node: source,
    });

    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        pops += 1;
        if settled[u] {
            continue; // stale entry, lazy deletion
        }
        settled[u] = true;
        if target == Some(u) {
            break;
        }
        for arc in &graph.adj[u] {
            let candidate = d + arc.weight_min;
            match dist[arc.to] {
                Some(existing) if candidate > existing => {}
                Some(existing) if candidate == existing => {
                    // Equal-cost path: prefer the lower predecessor id.
                    if let Some((prev, _)) = pred[arc.to] {
                        if u < prev {
                            pred[arc.to] = Some((u, arc.link));
                        }
                    }
                }
                _ => {
                    dist[arc.to] = Some(candidate);
                    pred[arc.to] = Some((u, arc.link));
                    heap.push(HeapEntry {
                        dist: candidate,
                        node: arc.to,
                    });
                }
            }
        }
    }

    Ok(ShortestPaths {
        graph,
        source,
        dist,
        pred,
        pops,
    })
}

/// One leg's optimum for a fixed workshop.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ShortestPathResult {
    pub route: RouteKind,
    pub time_min: Rational,
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

/// All three legs for a fixed workshop plus the combined total.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WorkshopEvaluation {
    pub workshop: NodeId,
    pub schedule_min: Rational,
    pub maintenance_min: Rational,
    pub routes: [ShortestPathResult; 3],
    pub total_min: Rational,
    pub heap_pops: u64,
}

impl WorkshopEvaluation {
    pub fn route(&self, kind: RouteKind) -> &ShortestPathResult {
        &self.routes[kind.index()]
    }
}

/// Prices one workshop: three single-target shortest-path queries combined
/// with the workshop's fixed times.
pub fn evaluate_workshop(
    scenario: &Scenario,
    workshop: NodeId,
) -> Result<WorkshopEvaluation, TwoStageError> {
    evaluate_with_graphs(scenario, &route_graphs(scenario), workshop)
}

fn evaluate_with_graphs(
    scenario: &Scenario,
    graphs: &[RouteGraph; 3],
    workshop: NodeId,
) -> Result<WorkshopEvaluation, TwoStageError> {
    let mut pops = 0u64;
    let mut routes = Vec::with_capacity(3);
    for route in RouteKind::ALL {
        let (from, to) = scenario.route_endpoints(workshop, route);
        let run = shortest_path(&graphs[route.index()], from, to)?;
        pops += run.pops;
        let time_min = run
            .distance(to)
            .ok_or(TwoStageError::Unreachable { route, workshop })?;
        let (nodes, links) = run.path_to(to).expect("distance implies a path");
        debug_assert_eq!(
            links
                .iter()
                .map(|l| scenario.link_time_min(route, *l))
                .sum::<Rational>(),
            time_min
        );
        routes.push(ShortestPathResult {
            route,
            time_min,
            nodes,
            links,
        });
    }
    let params = scenario.workshop_params(workshop);
    let total_min = params.schedule_min
        + params.maintenance_min
        + routes.iter().map(|r| r.time_min).sum::<Rational>();
    let routes: [ShortestPathResult; 3] = routes.try_into().expect("three routes");
    Ok(WorkshopEvaluation {
        workshop,
        schedule_min: params.schedule_min,
        maintenance_min: params.maintenance_min,
        routes,
        total_min,
        heap_pops: pops,
    })
}

/// Evaluates every workshop and returns the cheapest plan. Ties are broken
/// by the lowest workshop id; workshops that cannot reach a leg are skipped.
pub fn select_workshop(scenario: &Scenario) -> Result<(Solution, SolveStats), TwoStageError> {
    let started = Instant::now();
    let graphs = route_graphs(scenario);
    let mut pops = 0u64;
    let mut best: Option<WorkshopEvaluation> = None;
    for workshop in scenario.workshops() {
        match evaluate_with_graphs(scenario, &graphs, workshop) {
            Ok(eval) => {
                pops += eval.heap_pops;
                let better = match &best {
                    None => true,
                    Some(b) => eval.total_min < b.total_min,
                };
                if better {
                    best = Some(eval);
                }
            }
            Err(TwoStageError::Unreachable { .. }) => continue,
            Err(other) => return Err(other),
        }
    }
    let eval = best.ok_or(TwoStageError::AllUnreachable)?;
    let solution = Solution {
        workshop: eval.workshop,
        schedule_min: eval.schedule_min,
        maintenance_min: eval.maintenance_min,
        routes: eval.routes.clone().map(|r| RoutePath {
            route: r.route,
            nodes: r.nodes,
            links: r.links,
            driving_min: r.time_min,
        }),
        total_min: eval.total_min,
    };
    debug_assert!(solution.breakdown_sums());
    let stats = SolveStats {
        method: SolveMethod::TwoStage,
        expansions: pops,
        wall_time: started.elapsed(),
    };
    Ok((solution, stats))
}
