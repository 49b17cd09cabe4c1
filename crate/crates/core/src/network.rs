//! Road-network graph model.
//!
//! The same network is exposed through two synchronized views: a signed
//! node-link incidence matrix (consumed by the integer-program solver) and a
//! directed node-pair adjacency (consumed by the shortest-path solver). Node
//! ids follow a fixed layout: workshops `1..=N1`, then the warehouse at
//! `N1+1`, interchanges, the customer at `N2`, and, once a breakdown site
//! exists, the breakdown node at `N2+1` with exactly one link in and one
//! link out.

use std::collections::BTreeSet;
use std::fmt;

use crate::rational::Rational;

/// 1-based node identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

/// 1-based link identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinkId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeRole {
    Workshop,
    Warehouse,
    Customer,
    Interchange,
    BreakdownSite,
}

impl NodeRole {
    pub fn token(&self) -> &'static str {
        match self {
            NodeRole::Workshop => "workshop",
            NodeRole::Warehouse => "warehouse",
            NodeRole::Customer => "customer",
            NodeRole::Interchange => "interchange",
            NodeRole::BreakdownSite => "breakdown",
        }
    }

    pub fn from_token(s: &str) -> Option<NodeRole> {
        Some(match s {
            "workshop" => NodeRole::Workshop,
            "warehouse" => NodeRole::Warehouse,
            "customer" => NodeRole::Customer,
            "interchange" => NodeRole::Interchange,
            "breakdown" => NodeRole::BreakdownSite,
            _ => return None,
        })
    }
}

/// Which directions of a link may be driven. The reference direction is
/// tail to head; `OneWayReverse` permits only head to tail.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DirectionPolicy {
    TwoWay,
    OneWayForward,
    OneWayReverse,
}

impl DirectionPolicy {
    pub fn token(&self) -> &'static str {
        match self {
            DirectionPolicy::TwoWay => "two_way",
            DirectionPolicy::OneWayForward => "one_way",
            DirectionPolicy::OneWayReverse => "one_way_reverse",
        }
    }

    pub fn from_token(s: &str) -> Option<DirectionPolicy> {
        Some(match s {
            "two_way" => DirectionPolicy::TwoWay,
            "one_way" => DirectionPolicy::OneWayForward,
            "one_way_reverse" => DirectionPolicy::OneWayReverse,
            _ => return None,
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Link {
    pub id: LinkId,
    pub tail: NodeId,
    pub head: NodeId,
    pub length_km: Rational,
    pub policy: DirectionPolicy,
}

/// The breakdown site: a node spliced into a carriageway, with the upstream
/// half ending at it and the downstream half leaving it. When the site was
/// created by [`RoadNetwork::inject_breakdown`], `split_link` names the
/// original link whose forward direction the split replaced.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Breakdown {
    pub node: NodeId,
    pub in_link: LinkId,
    pub out_link: LinkId,
    pub split_link: Option<LinkId>,
}

/// How to split a link around a breakdown site.
#[derive(Clone, Debug)]
pub struct SplitSpec {
    pub original_link: LinkId,
    /// Length of the upstream half (original tail to breakdown site).
    pub d_first_km: Rational,
    /// Length of the downstream half (breakdown site to original head).
    pub d_second_km: Rational,
    pub first_policy: DirectionPolicy,
    pub second_policy: DirectionPolicy,
}

impl SplitSpec {
    /// Splits at the given lengths with both halves one-way in the original
    /// forward direction, the usual case for a blocked carriageway.
    pub fn forward(
        original_link: LinkId,
        d_first_km: Rational,
        d_second_km: Rational,
    ) -> SplitSpec {
        SplitSpec {
            original_link,
            d_first_km,
            d_second_km,
            first_policy: DirectionPolicy::OneWayForward,
            second_policy: DirectionPolicy::OneWayForward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
    #[error("duplicate link id {0}")]
    DuplicateLinkId(LinkId),
    #[error("link {link}: endpoint node {node} does not exist")]
    DanglingEndpoint { link: LinkId, node: NodeId },
    #[error("link {0}: tail and head are the same node")]
    SelfLoop(LinkId),
    #[error("link {0}: length must be positive")]
    NonPositiveLength(LinkId),
    #[error("network must contain exactly one warehouse and one customer")]
    MissingWarehouseOrCustomer,
    #[error("bad node layout: {0}")]
    BadNodePartition(String),
    #[error("breakdown site wiring: {0}")]
    BreakdownWiring(String),
    #[error("node {0} is not reachable from the warehouse")]
    DisconnectedNode(NodeId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("split lengths {got} do not add up to link {link} length {expected}")]
    LengthMismatch {
        link: LinkId,
        expected: Rational,
        got: Rational,
    },
    #[error("network already has a breakdown site")]
    BreakdownAlreadyPresent,
}

/// Immutable road network. Construct with [`build_network`]; all invariants
/// are checked there, so holders can assume a consistent graph.
#[derive(Clone, PartialEq, Debug)]
pub struct RoadNetwork {
    nodes: Vec<(NodeId, NodeRole)>,
    links: Vec<Link>,
    breakdown: Option<Breakdown>,
}

/// Signed node-link incidence: `+1` where a node is a link's tail, `-1`
/// where it is the head, `0` elsewhere. Rows are nodes by id, columns links
/// by id.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IncidenceMatrix {
    node_ids: Vec<NodeId>,
    link_ids: Vec<LinkId>,
    entries: Vec<i8>, // row-major
}

impl IncidenceMatrix {
    pub(crate) fn build(node_ids: Vec<NodeId>, links: &[Link]) -> IncidenceMatrix {
        let link_ids: Vec<LinkId> = links.iter().map(|l| l.id).collect();
        let cols = link_ids.len();
        let mut entries = vec![0i8; node_ids.len() * cols];
        for (col, link) in links.iter().enumerate() {
            let tail_row = node_ids.binary_search(&link.tail).expect("tail exists");
            let head_row = node_ids.binary_search(&link.head).expect("head exists");
            entries[tail_row * cols + col] = 1;
            entries[head_row * cols + col] = -1;
        }
        IncidenceMatrix {
            node_ids,
            link_ids,
            entries,
        }
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn link_ids(&self) -> &[LinkId] {
        &self.link_ids
    }

    pub fn entry(&self, node: NodeId, link: LinkId) -> i8 {
        let row = self
            .node_ids
            .binary_search(&node)
            .unwrap_or_else(|_| panic!("unknown node {node}"));
        let col = self
            .link_ids
            .binary_search(&link)
            .unwrap_or_else(|_| panic!("unknown link {link}"));
        self.entries[row * self.link_ids.len() + col]
    }

    /// The signed row of a node, one coefficient per link column.
    pub fn row(&self, node: NodeId) -> &[i8] {
        let row = self
            .node_ids
            .binary_search(&node)
            .unwrap_or_else(|_| panic!("unknown node {node}"));
        let cols = self.link_ids.len();
        &self.entries[row * cols..(row + 1) * cols]
    }

    pub fn column_sum(&self, link: LinkId) -> i32 {
        let col = self.link_ids.binary_search(&link).expect("unknown link");
        let cols = self.link_ids.len();
        (0..self.node_ids.len())
            .map(|r| self.entries[r * cols + col] as i32)
            .sum()
    }

    /// Deterministic text rendering, stable across runs.
    pub fn to_table_string(&self) -> String {
        let mut out = String::new();
        out.push_str("links:");
        for l in &self.link_ids {
            out.push_str(&format!(" {l:>3}"));
        }
        out.push('\n');
        let cols = self.link_ids.len();
        for (r, node) in self.node_ids.iter().enumerate() {
            out.push_str(&format!("node {node:>3}:"));
            for c in 0..cols {
                out.push_str(&format!(" {:>3}", self.entries[r * cols + c]));
            }
            out.push('\n');
        }
        out
    }
}

/// One drivable direction of some link.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct DirectedPair {
    pub from: NodeId,
    pub to: NodeId,
    pub link: LinkId,
}

/// All drivable `(from, to)` node pairs, ordered by `(from, to, link)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DirectedPairView {
    pairs: Vec<DirectedPair>,
}

impl DirectedPairView {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[DirectedPair] {
        &self.pairs
    }

    pub fn contains(&self, from: NodeId, to: NodeId) -> bool {
        self.pairs.iter().any(|p| p.from == from && p.to == to)
    }
}

/// Validates and assembles a network. If a node carries the breakdown role,
/// its single incoming and single outgoing link become the breakdown wiring.
pub fn build_network(
    nodes: Vec<(NodeId, NodeRole)>,
    links: Vec<Link>,
) -> Result<RoadNetwork, NetworkError> {
    RoadNetwork::assemble(nodes, links, None)
}

impl RoadNetwork {
    fn assemble(
        mut nodes: Vec<(NodeId, NodeRole)>,
        mut links: Vec<Link>,
        split_link: Option<LinkId>,
    ) -> Result<RoadNetwork, NetworkError> {
        nodes.sort_by_key(|(id, _)| *id);
        for w in nodes.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(NetworkError::DuplicateNodeId(w[0].0));
            }
        }
        links.sort_by_key(|l| l.id);
        for w in links.windows(2) {
            if w[0].id == w[1].id {
                return Err(NetworkError::DuplicateLinkId(w[0].id));
            }
        }

        let node_ids: BTreeSet<NodeId> = nodes.iter().map(|(id, _)| *id).collect();
        for link in &links {
            if link.tail == link.head {
                return Err(NetworkError::SelfLoop(link.id));
            }
            for end in [link.tail, link.head] {
                if !node_ids.contains(&end) {
                    return Err(NetworkError::DanglingEndpoint {
                        link: link.id,
                        node: end,
                    });
                }
            }
            if !link.length_km.is_positive() {
                return Err(NetworkError::NonPositiveLength(link.id));
            }
        }

        check_layout(&nodes)?;
        let breakdown = find_breakdown(&nodes, &links, split_link)?;

        let network = RoadNetwork {
            nodes,
            links,
            breakdown,
        };
        network.check_connectivity()?;
        Ok(network)
    }

    /// Splits a link around a new breakdown site. The upstream half keeps
    /// the original tail, the downstream half the original head, and the
    /// original link loses its forward direction: the split stands in for
    /// it, so the two halves never coexist with a parallel forward passage.
    pub fn inject_breakdown(&self, spec: &SplitSpec) -> Result<RoadNetwork, NetworkError> {
        if self.breakdown.is_some() {
            return Err(NetworkError::BreakdownAlreadyPresent);
        }
        let original = self
            .link(spec.original_link)
            .ok_or(NetworkError::UnknownLink(spec.original_link))?
            .clone();
        if !spec.d_first_km.is_positive() || !spec.d_second_km.is_positive() {
            return Err(NetworkError::NonPositiveLength(spec.original_link));
        }
        let got = spec.d_first_km + spec.d_second_km;
        let tolerance = Rational::new(1, 1_000_000_000);
        if (got - original.length_km).abs() > tolerance {
            return Err(NetworkError::LengthMismatch {
                link: original.id,
                expected: original.length_km,
                got,
            });
        }

        let site = NodeId(self.nodes.iter().map(|(id, _)| id.0).max().unwrap_or(0) + 1);
        let max_link = self.links.iter().map(|l| l.id.0).max().unwrap_or(0);
        let in_link = Link {
            id: LinkId(max_link + 1),
            tail: original.tail,
            head: site,
            length_km: spec.d_first_km,
            policy: spec.first_policy,
        };
        let out_link = Link {
            id: LinkId(max_link + 2),
            tail: site,
            head: original.head,
            length_km: spec.d_second_km,
            policy: spec.second_policy,
        };

        let mut nodes = self.nodes.clone();
        nodes.push((site, NodeRole::BreakdownSite));
        let mut links = self.links.clone();
        links.push(in_link);
        links.push(out_link);
        RoadNetwork::assemble(nodes, links, Some(original.id))
    }

    pub fn nodes(&self) -> &[(NodeId, NodeRole)] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links
            .binary_search_by_key(&id, |l| l.id)
            .ok()
            .map(|i| &self.links[i])
    }

    pub fn role(&self, node: NodeId) -> Option<NodeRole> {
        self.nodes
            .binary_search_by_key(&node, |(id, _)| *id)
            .ok()
            .map(|i| self.nodes[i].1)
    }

    pub fn contains_node(&self, node: NodeId) -> bool {
        self.role(node).is_some()
    }

    pub fn workshops(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(|(_, role)| *role == NodeRole::Workshop)
            .map(|(id, _)| *id)
    }

    pub fn warehouse(&self) -> NodeId {
        self.nodes
            .iter()
            .find(|(_, role)| *role == NodeRole::Warehouse)
            .map(|(id, _)| *id)
            .expect("validated at build")
    }

    pub fn customer(&self) -> NodeId {
        self.nodes
            .iter()
            .find(|(_, role)| *role == NodeRole::Customer)
            .map(|(id, _)| *id)
            .expect("validated at build")
    }

    pub fn breakdown(&self) -> Option<&Breakdown> {
        self.breakdown.as_ref()
    }

    /// True when the link may be driven tail to head. The forward direction
    /// of a split carriageway is closed: the breakdown halves replace it.
    pub fn allows_forward(&self, link: &Link) -> bool {
        if let Some(b) = &self.breakdown {
            if b.split_link == Some(link.id) {
                return false;
            }
        }
        matches!(
            link.policy,
            DirectionPolicy::TwoWay | DirectionPolicy::OneWayForward
        )
    }

    /// True when the link may be driven head to tail.
    pub fn allows_reverse(&self, link: &Link) -> bool {
        matches!(
            link.policy,
            DirectionPolicy::TwoWay | DirectionPolicy::OneWayReverse
        )
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        let node_ids: Vec<NodeId> = self.nodes.iter().map(|(id, _)| *id).collect();
        IncidenceMatrix::build(node_ids, &self.links)
    }

    pub fn directed_pairs(&self) -> DirectedPairView {
        let mut pairs = Vec::new();
        for link in &self.links {
            if self.allows_forward(link) {
                pairs.push(DirectedPair {
                    from: link.tail,
                    to: link.head,
                    link: link.id,
                });
            }
            if self.allows_reverse(link) {
                pairs.push(DirectedPair {
                    from: link.head,
                    to: link.tail,
                    link: link.id,
                });
            }
        }
        pairs.sort();
        DirectedPairView { pairs }
    }

    fn check_connectivity(&self) -> Result<(), NetworkError> {
        let start = self.warehouse();
        let mut reached: BTreeSet<NodeId> = BTreeSet::new();
        reached.insert(start);
        let mut frontier = vec![start];
        let pairs = self.directed_pairs();
        while let Some(u) = frontier.pop() {
            for p in pairs.pairs() {
                if p.from == u && reached.insert(p.to) {
                    frontier.push(p.to);
                }
            }
        }
        for (id, role) in &self.nodes {
            if *role != NodeRole::BreakdownSite && !reached.contains(id) {
                return Err(NetworkError::DisconnectedNode(*id));
            }
        }
        Ok(())
    }
}

/// Node ids must run contiguously from 1 in role order: workshops, the
/// warehouse, interchanges, the customer, then an optional breakdown site.
pub(crate) fn check_layout(nodes: &[(NodeId, NodeRole)]) -> Result<(), NetworkError> {
    let warehouses = nodes
        .iter()
        .filter(|(_, r)| *r == NodeRole::Warehouse)
        .count();
    let customers = nodes
        .iter()
        .filter(|(_, r)| *r == NodeRole::Customer)
        .count();
    if warehouses != 1 || customers != 1 {
        return Err(NetworkError::MissingWarehouseOrCustomer);
    }

    for (pos, (id, _)) in nodes.iter().enumerate() {
        if id.0 as usize != pos + 1 {
            return Err(NetworkError::BadNodePartition(format!(
                "node ids must be contiguous from 1, found {id}"
            )));
        }
    }

    // Legal role sequences, expressed as a tiny state machine over the
    // sorted node list.
    #[derive(PartialEq, Clone, Copy)]
    enum Stage {
        Workshops,
        AfterWarehouse,
        AfterCustomer,
        AfterBreakdown,
    }
    let mut stage = Stage::Workshops;
    for (id, role) in nodes {
        stage = match (stage, role) {
            (Stage::Workshops, NodeRole::Workshop) => Stage::Workshops,
            (Stage::Workshops, NodeRole::Warehouse) => Stage::AfterWarehouse,
            (Stage::AfterWarehouse, NodeRole::Interchange) => Stage::AfterWarehouse,
            (Stage::AfterWarehouse, NodeRole::Customer) => Stage::AfterCustomer,
            (Stage::AfterCustomer, NodeRole::BreakdownSite) => Stage::AfterBreakdown,
            _ => {
                return Err(NetworkError::BadNodePartition(format!(
                    "node {id} has role {} out of order",
                    role.token()
                )))
            }
        };
    }
    if stage != Stage::AfterCustomer && stage != Stage::AfterBreakdown {
        return Err(NetworkError::BadNodePartition(
            "customer must be the last traffic node".to_string(),
        ));
    }
    Ok(())
}

pub(crate) fn find_breakdown(
    nodes: &[(NodeId, NodeRole)],
    links: &[Link],
    split_link: Option<LinkId>,
) -> Result<Option<Breakdown>, NetworkError> {
    let site = match nodes
        .iter()
        .find(|(_, role)| *role == NodeRole::BreakdownSite)
    {
        Some((id, _)) => *id,
        None => return Ok(None),
    };
    let incident: Vec<&Link> = links
        .iter()
        .filter(|l| l.tail == site || l.head == site)
        .collect();
    if incident.len() != 2 {
        return Err(NetworkError::BreakdownWiring(format!(
            "breakdown node {site} must touch exactly two links, found {}",
            incident.len()
        )));
    }
    let in_link = incident.iter().find(|l| l.head == site).ok_or_else(|| {
        NetworkError::BreakdownWiring("no link ends at the breakdown site".into())
    })?;
    let out_link = incident
        .iter()
        .find(|l| l.tail == site)
        .ok_or_else(|| NetworkError::BreakdownWiring("no link leaves the breakdown site".into()))?;
    Ok(Some(Breakdown {
        node: site,
        in_link: in_link.id,
        out_link: out_link.id,
        split_link,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, role: NodeRole) -> (NodeId, NodeRole) {
        (NodeId(id), role)
    }

    fn link(id: u32, tail: u32, head: u32, km: i64, policy: DirectionPolicy) -> Link {
        Link {
            id: LinkId(id),
            tail: NodeId(tail),
            head: NodeId(head),
            length_km: Rational::from_int(km),
            policy,
        }
    }

    /// The highway network before the breakdown: every link two-way, the
    /// 6-7 passage still open in both directions.
    fn pre_breakdown_highway() -> RoadNetwork {
        let nodes = vec![
            node(1, NodeRole::Workshop),
            node(2, NodeRole::Workshop),
            node(3, NodeRole::Workshop),
            node(4, NodeRole::Warehouse),
            node(5, NodeRole::Interchange),
            node(6, NodeRole::Interchange),
            node(7, NodeRole::Interchange),
            node(8, NodeRole::Interchange),
            node(9, NodeRole::Interchange),
            node(10, NodeRole::Interchange),
            node(11, NodeRole::Customer),
        ];
        let links = vec![
            link(1, 1, 5, 10, DirectionPolicy::TwoWay),
            link(2, 2, 7, 10, DirectionPolicy::TwoWay),
            link(3, 2, 8, 10, DirectionPolicy::TwoWay),
            link(4, 3, 10, 10, DirectionPolicy::TwoWay),
            link(5, 4, 5, 10, DirectionPolicy::TwoWay),
            link(6, 5, 6, 10, DirectionPolicy::TwoWay),
            link(7, 6, 7, 10, DirectionPolicy::TwoWay),
            link(8, 7, 8, 10, DirectionPolicy::TwoWay),
            link(9, 8, 9, 10, DirectionPolicy::TwoWay),
            link(10, 9, 10, 10, DirectionPolicy::TwoWay),
            link(11, 10, 11, 10, DirectionPolicy::TwoWay),
        ];
        build_network(nodes, links).unwrap()
    }

    #[test]
    fn pre_breakdown_highway_pair_count() {
        // Eleven two-way links give 22 pairs. Cross-check: the broken-down
        // network has 24 pairs, exactly two of which touch node 12.
        let net = pre_breakdown_highway();
        assert_eq!(net.directed_pairs().len(), 22);
        assert!(net.directed_pairs().contains(NodeId(7), NodeId(6)));
        assert!(net.directed_pairs().contains(NodeId(6), NodeId(7)));
    }

    #[test]
    fn smallest_valid_network() {
        let net = build_network(
            vec![node(1, NodeRole::Warehouse), node(2, NodeRole::Customer)],
            vec![link(1, 1, 2, 10, DirectionPolicy::TwoWay)],
        )
        .unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.link_count(), 1);
        assert_eq!(net.directed_pairs().len(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        let err = build_network(
            vec![node(1, NodeRole::Warehouse), node(2, NodeRole::Customer)],
            vec![
                link(1, 1, 2, 10, DirectionPolicy::TwoWay),
                link(2, 2, 2, 5, DirectionPolicy::TwoWay),
            ],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::SelfLoop(LinkId(2)));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = build_network(
            vec![
                node(1, NodeRole::Warehouse),
                node(2, NodeRole::Customer),
                node(2, NodeRole::Customer),
            ],
            vec![link(1, 1, 2, 10, DirectionPolicy::TwoWay)],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DuplicateNodeId(NodeId(2)));

        let err = build_network(
            vec![node(1, NodeRole::Warehouse), node(2, NodeRole::Customer)],
            vec![
                link(1, 1, 2, 10, DirectionPolicy::TwoWay),
                link(1, 2, 1, 5, DirectionPolicy::TwoWay),
            ],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DuplicateLinkId(LinkId(1)));
    }

    #[test]
    fn dangling_endpoint_rejected() {
        let err = build_network(
            vec![node(1, NodeRole::Warehouse), node(2, NodeRole::Customer)],
            vec![link(1, 1, 9, 10, DirectionPolicy::TwoWay)],
        )
        .unwrap_err();
        assert_eq!(
            err,
            NetworkError::DanglingEndpoint {
                link: LinkId(1),
                node: NodeId(9)
            }
        );
    }

    #[test]
    fn disconnected_node_rejected() {
        let err = build_network(
            vec![
                node(1, NodeRole::Warehouse),
                node(2, NodeRole::Interchange),
                node(3, NodeRole::Customer),
            ],
            vec![link(1, 1, 3, 10, DirectionPolicy::TwoWay)],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DisconnectedNode(NodeId(2)));
    }

    #[test]
    fn one_way_reverse_only_reaches_one_direction() {
        // 1 -> 2 one-way means 2 can never reach 1, which the
        // reachability check reports.
        let err = build_network(
            vec![node(1, NodeRole::Warehouse), node(2, NodeRole::Customer)],
            vec![link(1, 2, 1, 10, DirectionPolicy::OneWayForward)],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DisconnectedNode(NodeId(2)));
    }

    #[test]
    fn inject_splits_the_carriageway() {
        // Split the two-way 6-7 carriageway at its midpoint. With link 7 at
        // 10 km that puts two 5 km one-way halves through node 12.
        let split = SplitSpec::forward(LinkId(7), Rational::from_int(5), Rational::from_int(5));
        let net = pre_breakdown_highway().inject_breakdown(&split).unwrap();

        assert_eq!(net.node_count(), 12);
        assert_eq!(net.link_count(), 13);
        assert_eq!(net.role(NodeId(12)), Some(NodeRole::BreakdownSite));
        let b = net.breakdown().unwrap();
        assert_eq!((b.in_link, b.out_link), (LinkId(12), LinkId(13)));
        assert_eq!(b.split_link, Some(LinkId(7)));

        let inc = net.incidence();
        assert_eq!(inc.entry(NodeId(6), LinkId(12)), 1);
        assert_eq!(inc.entry(NodeId(12), LinkId(12)), -1);
        assert_eq!(inc.entry(NodeId(12), LinkId(13)), 1);
        assert_eq!(inc.entry(NodeId(7), LinkId(13)), -1);

        let pairs = net.directed_pairs();
        assert!(pairs.contains(NodeId(6), NodeId(12)));
        assert!(pairs.contains(NodeId(12), NodeId(7)));
        assert!(!pairs.contains(NodeId(12), NodeId(6)));
        assert!(!pairs.contains(NodeId(7), NodeId(12)));
        // forward direction of the split carriageway is gone, reverse stays
        assert!(!pairs.contains(NodeId(6), NodeId(7)));
        assert!(pairs.contains(NodeId(7), NodeId(6)));
    }

    #[test]
    fn inject_preserves_unrelated_pairs_and_total_length() {
        let base = pre_breakdown_highway();
        let before = base.directed_pairs();
        let split = SplitSpec::forward(LinkId(6), Rational::new(7, 2), Rational::new(13, 2));
        let net = base.inject_breakdown(&split).unwrap();
        let after = net.directed_pairs();
        for p in before.pairs() {
            if p.link != LinkId(6) {
                assert!(after.pairs().contains(p), "lost pair {p:?}");
            }
        }
        let b = net.breakdown().unwrap();
        let first = net.link(b.in_link).unwrap().length_km;
        let second = net.link(b.out_link).unwrap().length_km;
        assert_eq!(first + second, Rational::from_int(10));
    }

    #[test]
    fn inject_rejects_bad_lengths() {
        let base = pre_breakdown_highway();
        let split = SplitSpec::forward(LinkId(6), Rational::from_int(4), Rational::from_int(5));
        let err = base.inject_breakdown(&split).unwrap_err();
        assert!(matches!(err, NetworkError::LengthMismatch { .. }));

        let unknown = SplitSpec::forward(LinkId(99), Rational::from_int(5), Rational::from_int(5));
        assert_eq!(
            base.inject_breakdown(&unknown).unwrap_err(),
            NetworkError::UnknownLink(LinkId(99))
        );
    }

    #[test]
    fn inject_twice_rejected() {
        let base = pre_breakdown_highway();
        let split = SplitSpec::forward(LinkId(6), Rational::from_int(5), Rational::from_int(5));
        let net = base.inject_breakdown(&split).unwrap();
        assert_eq!(
            net.inject_breakdown(&split).unwrap_err(),
            NetworkError::BreakdownAlreadyPresent
        );
    }

    #[test]
    fn incidence_columns_sum_to_zero() {
        let net = pre_breakdown_highway();
        let inc = net.incidence();
        for l in net.links() {
            assert_eq!(inc.column_sum(l.id), 0);
        }
    }

    #[test]
    fn incidence_with_no_links_is_empty() {
        let inc = IncidenceMatrix::build(vec![NodeId(1), NodeId(2)], &[]);
        assert!(inc.link_ids().is_empty());
        assert_eq!(inc.node_ids().len(), 2);
    }

    #[test]
    fn all_two_way_networks_have_two_pairs_per_link() {
        // chain networks of growing size
        for n in 2u32..8 {
            let mut nodes = vec![node(1, NodeRole::Warehouse)];
            for id in 2..n {
                nodes.push(node(id, NodeRole::Interchange));
            }
            nodes.push(node(n, NodeRole::Customer));
            let links: Vec<Link> = (1..n)
                .map(|i| link(i, i, i + 1, 1, DirectionPolicy::TwoWay))
                .collect();
            let net = build_network(nodes, links).unwrap();
            assert_eq!(net.directed_pairs().len(), 2 * (n as usize - 1));
        }
    }

    #[test]
    fn pairs_and_incidence_agree() {
        let net = pre_breakdown_highway()
            .inject_breakdown(&SplitSpec::forward(
                LinkId(6),
                Rational::from_int(5),
                Rational::from_int(5),
            ))
            .unwrap();
        let inc = net.incidence();
        let pairs = net.directed_pairs();
        for l in net.links() {
            let forward = pairs
                .pairs()
                .iter()
                .any(|p| p.link == l.id && p.from == l.tail);
            let reverse = pairs
                .pairs()
                .iter()
                .any(|p| p.link == l.id && p.from == l.head);
            assert_eq!(forward, net.allows_forward(l));
            assert_eq!(reverse, net.allows_reverse(l));
            assert_eq!(inc.entry(l.tail, l.id), 1);
            assert_eq!(inc.entry(l.head, l.id), -1);
        }
    }

    #[test]
    fn incidence_rendering_is_deterministic() {
        let a = pre_breakdown_highway().incidence().to_table_string();
        let b = pre_breakdown_highway().incidence().to_table_string();
        assert_eq!(a, b);
    }

    #[test]
    fn network_is_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<RoadNetwork>();
        assert_send_sync::<IncidenceMatrix>();
        assert_send_sync::<DirectedPairView>();
    }
}
