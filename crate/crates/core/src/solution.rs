//! Solver-independent result types.

use std::time::Duration;

use crate::network::{LinkId, NodeId, RoadNetwork};
use crate::rational::Rational;
use crate::scenario::RouteKind;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveMethod {
    Mip,
    TwoStage,
    BruteForce,
}

impl SolveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMethod::Mip => "mip",
            SolveMethod::TwoStage => "two-stage",
            SolveMethod::BruteForce => "brute-force",
        }
    }
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Search effort counters. `expansions` counts branch attempts for the
/// integer program, heap pops for the two-stage method, and enumerated
/// paths for the brute-force oracle; it is deterministic, unlike the wall
/// time.
#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub method: SolveMethod,
    pub expansions: u64,
    pub wall_time: Duration,
}

/// One driven leg: node sequence, the links in travel order, and the exact
/// driving time. An empty leg (start equals end) keeps the single node.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RoutePath {
    pub route: RouteKind,
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub driving_min: Rational,
}

impl RoutePath {
    /// Checks the path against the network edge by edge: every hop must use
    /// its link in a direction the link's policy (and any breakdown split)
    /// allows, and the node and link sequences must line up.
    pub fn is_consistent(&self, network: &RoadNetwork) -> bool {
        if self.nodes.len() != self.links.len() + 1 {
            return false;
        }
        self.links.iter().enumerate().all(|(i, link_id)| {
            let (from, to) = (self.nodes[i], self.nodes[i + 1]);
            match network.link(*link_id) {
                Some(link) if link.tail == from && link.head == to => network.allows_forward(link),
                Some(link) if link.head == from && link.tail == to => network.allows_reverse(link),
                _ => false,
            }
        })
    }
}

/// A complete recovery plan with its exact time breakdown.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Solution {
    pub workshop: NodeId,
    pub schedule_min: Rational,
    pub maintenance_min: Rational,
    pub routes: [RoutePath; 3],
    pub total_min: Rational,
}

impl Solution {
    pub fn driving_min(&self) -> Rational {
        self.routes.iter().map(|r| r.driving_min).sum()
    }

    /// The defining identity: total = schedule + maintenance + driving.
    pub fn breakdown_sums(&self) -> bool {
        self.schedule_min + self.maintenance_min + self.driving_min() == self.total_min
    }

    pub fn route(&self, kind: RouteKind) -> &RoutePath {
        &self.routes[kind.index()]
    }
}
