//! Problem parameters: workshop times, driving speeds, and the scenario
//! file format, plus the built-in example scenarios.

mod fixtures;
mod format;

pub use fixtures::{
    base_highway, builtin_fixture, modified_highway, urban_paths, Fixture, FixtureName, PathFixture,
};
pub use fixtures::{BASE_HIGHWAY_SCN, MODIFIED_HIGHWAY_SCN, URBAN_PATHS_DATA};
pub use format::{diagnose_scenario, load_scenario, parse_scenario, serialize_scenario, Diagnosis};

use std::collections::BTreeMap;

use crate::network::{LinkId, NetworkError, NodeId, NodeRole, RoadNetwork};
use crate::rational::Rational;

/// The three legs of a recovery mission, in time order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RouteKind {
    /// Tow truck from the workshop to the breakdown site.
    TowOut,
    /// Towing the vehicle from the breakdown site back to the workshop.
    TowBack,
    /// Repaired vehicle from the workshop to the customer.
    Delivery,
}

impl RouteKind {
    pub const ALL: [RouteKind; 3] = [RouteKind::TowOut, RouteKind::TowBack, RouteKind::Delivery];

    pub fn number(self) -> u32 {
        match self {
            RouteKind::TowOut => 1,
            RouteKind::TowBack => 2,
            RouteKind::Delivery => 3,
        }
    }

    pub fn index(self) -> usize {
        self.number() as usize - 1
    }

    pub fn from_number(n: u32) -> Option<RouteKind> {
        Some(match n {
            1 => RouteKind::TowOut,
            2 => RouteKind::TowBack,
            3 => RouteKind::Delivery,
            _ => return None,
        })
    }
}

impl std::fmt::Display for RouteKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.number().fmt(f)
    }
}

/// Per-workshop fixed times, in minutes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WorkshopParams {
    /// Time for the workshop to schedule a tow truck.
    pub schedule_min: Rational,
    /// Time to repair the vehicle once it arrives.
    pub maintenance_min: Rational,
}

/// Driving speeds in km/h: one default per route, plus optional per-link
/// overrides. Resolution order is override first, then the route default.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SpeedTable {
    defaults: [Option<Rational>; 3],
    overrides: BTreeMap<(u32, LinkId), Rational>,
}

impl SpeedTable {
    pub fn new() -> SpeedTable {
        SpeedTable::default()
    }

    pub fn set_default(&mut self, route: RouteKind, speed_kmh: Rational) {
        self.defaults[route.index()] = Some(speed_kmh);
    }

    pub fn set_override(&mut self, route: RouteKind, link: LinkId, speed_kmh: Rational) {
        self.overrides.insert((route.number(), link), speed_kmh);
    }

    pub fn resolve(&self, route: RouteKind, link: LinkId) -> Option<Rational> {
        self.overrides
            .get(&(route.number(), link))
            .copied()
            .or(self.defaults[route.index()])
    }

    pub fn default_speed(&self, route: RouteKind) -> Option<Rational> {
        self.defaults[route.index()]
    }

    pub fn overrides(&self) -> impl Iterator<Item = (RouteKind, LinkId, Rational)> + '_ {
        self.overrides
            .iter()
            .map(|((route, link), speed)| (RouteKind::from_number(*route).unwrap(), *link, *speed))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("workshop {0} has no schedule/maintenance parameters")]
    MissingWorkshopParams(NodeId),
    #[error("workshop {workshop}: {what} must be non-negative")]
    InvalidWorkshopParam { workshop: NodeId, what: String },
    #[error("speed for route {route} on link {link} must be positive")]
    NonPositiveSpeed { route: RouteKind, link: LinkId },
    #[error("no speed resolves for route {route} on link {link}")]
    MissingSpeed { route: RouteKind, link: LinkId },
    #[error("scenario has no breakdown site")]
    NoBreakdown,
    #[error("{context} references unknown node {node}")]
    UnknownNodeReference { node: NodeId, context: String },
    #[error("{context} references unknown link {link}")]
    UnknownLinkReference { link: LinkId, context: String },
    #[error("breakdown declaration does not match the network: {0}")]
    InvalidBreakdown(String),
    #[error("unknown fixture {0:?}; expected base_highway, modified_highway, or urban_paths")]
    UnknownFixture(String),
    #[error("fixture {0:?} only carries reference paths and cannot be solved; use `recompute`")]
    NotSolvable(String),
}

/// A fully validated problem instance: a broken-down network plus all the
/// parameters needed to price a route. Immutable once built.
#[derive(Clone, PartialEq, Debug)]
pub struct Scenario {
    network: RoadNetwork,
    workshop_params: BTreeMap<NodeId, WorkshopParams>,
    speeds: SpeedTable,
}

impl Scenario {
    pub fn new(
        network: RoadNetwork,
        workshop_params: BTreeMap<NodeId, WorkshopParams>,
        speeds: SpeedTable,
    ) -> Result<Scenario, ScenarioError> {
        if network.breakdown().is_none() {
            return Err(ScenarioError::NoBreakdown);
        }
        for (node, params) in &workshop_params {
            if network.role(*node) != Some(NodeRole::Workshop) {
                return Err(ScenarioError::UnknownNodeReference {
                    node: *node,
                    context: "workshop parameter record".to_string(),
                });
            }
            for (value, what) in [
                (params.schedule_min, "schedule time"),
                (params.maintenance_min, "maintenance time"),
            ] {
                if value.is_negative() {
                    return Err(ScenarioError::InvalidWorkshopParam {
                        workshop: *node,
                        what: what.to_string(),
                    });
                }
            }
        }
        for workshop in network.workshops() {
            if !workshop_params.contains_key(&workshop) {
                return Err(ScenarioError::MissingWorkshopParams(workshop));
            }
        }
        for (route, link, _) in speeds.overrides() {
            if network.link(link).is_none() {
                return Err(ScenarioError::UnknownLinkReference {
                    link,
                    context: format!("speed override for route {route}"),
                });
            }
        }
        for route in RouteKind::ALL {
            for link in network.links() {
                match speeds.resolve(route, link.id) {
                    None => {
                        return Err(ScenarioError::MissingSpeed {
                            route,
                            link: link.id,
                        })
                    }
                    Some(speed) if !speed.is_positive() => {
                        return Err(ScenarioError::NonPositiveSpeed {
                            route,
                            link: link.id,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Scenario {
            network,
            workshop_params,
            speeds,
        })
    }

    pub fn network(&self) -> &RoadNetwork {
        &self.network
    }

    pub fn speeds(&self) -> &SpeedTable {
        &self.speeds
    }

    pub fn customer(&self) -> NodeId {
        self.network.customer()
    }

    pub fn breakdown_node(&self) -> NodeId {
        self.network.breakdown().expect("validated").node
    }

    pub fn workshops(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.network.workshops()
    }

    pub fn workshop_params(&self, workshop: NodeId) -> &WorkshopParams {
        &self.workshop_params[&workshop]
    }

    pub fn workshop_param_map(&self) -> &BTreeMap<NodeId, WorkshopParams> {
        &self.workshop_params
    }

    pub fn speed(&self, route: RouteKind, link: LinkId) -> Rational {
        self.speeds.resolve(route, link).expect("validated")
    }

    /// Minutes to drive one link on one route: `60 * length / speed`.
    pub fn link_time_min(&self, route: RouteKind, link: LinkId) -> Rational {
        let length = self.network.link(link).expect("validated").length_km;
        Rational::from_int(60) * length / self.speed(route, link)
    }

    /// Start and end node of a route leg for a candidate workshop.
    pub fn route_endpoints(&self, workshop: NodeId, route: RouteKind) -> (NodeId, NodeId) {
        let breakdown = self.breakdown_node();
        match route {
            RouteKind::TowOut => (workshop, breakdown),
            RouteKind::TowBack => (breakdown, workshop),
            RouteKind::Delivery => (workshop, self.customer()),
        }
    }

    /// Canonical text form; see [`serialize_scenario`].
    pub fn serialize(&self) -> String {
        serialize_scenario(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures::{base_highway, modified_highway};

    #[test]
    fn base_parameters() {
        let sc = base_highway();
        assert_eq!(sc.workshops().count(), 3);
        for w in sc.workshops() {
            let p = sc.workshop_params(w);
            assert_eq!(p.schedule_min, Rational::from_int(10));
            assert_eq!(p.maintenance_min, Rational::from_int(100));
        }
        for link in sc.network().links() {
            let expected = if link.id.0 >= 12 { 5 } else { 10 };
            assert_eq!(link.length_km, Rational::from_int(expected));
            for route in RouteKind::ALL {
                assert_eq!(sc.speed(route, link.id), Rational::from_int(60));
            }
        }
        assert_eq!(sc.customer(), NodeId(11));
        assert_eq!(sc.breakdown_node(), NodeId(12));
        assert_eq!(sc.network().directed_pairs().len(), 24);
    }

    #[test]
    fn base_fixture_incidence_and_pair_view() {
        let sc = base_highway();
        let inc = sc.network().incidence();
        assert_eq!(inc.entry(NodeId(1), LinkId(1)), 1);
        assert_eq!(inc.entry(NodeId(5), LinkId(1)), -1);
        assert_eq!(inc.entry(NodeId(12), LinkId(12)), -1);
        assert_eq!(inc.entry(NodeId(12), LinkId(13)), 1);
        for link in sc.network().links() {
            assert_eq!(inc.column_sum(link.id), 0);
        }

        let expected: std::collections::BTreeSet<(u32, u32)> = [
            (1, 5),
            (2, 7),
            (2, 8),
            (3, 10),
            (4, 5),
            (5, 1),
            (5, 4),
            (5, 6),
            (6, 5),
            (6, 7),
            (6, 12),
            (7, 2),
            (7, 6),
            (7, 8),
            (8, 2),
            (8, 7),
            (8, 9),
            (9, 8),
            (9, 10),
            (10, 3),
            (10, 9),
            (10, 11),
            (11, 10),
            (12, 7),
        ]
        .into();
        let actual: std::collections::BTreeSet<(u32, u32)> = sc
            .network()
            .directed_pairs()
            .pairs()
            .iter()
            .map(|p| (p.from.0, p.to.0))
            .collect();
        assert_eq!(actual, expected);
        assert_eq!(sc.network().directed_pairs().len(), 24);
    }

    #[test]
    fn modified_parameters() {
        let sc = modified_highway();
        assert_eq!(
            sc.network().link(LinkId(7)).unwrap().length_km,
            Rational::from_int(120)
        );
        assert_eq!(
            sc.network().link(LinkId(12)).unwrap().length_km,
            Rational::from_int(30)
        );
        assert_eq!(
            sc.network().link(LinkId(13)).unwrap().length_km,
            Rational::from_int(90)
        );
        for j in 5..=13u32 {
            assert_eq!(
                sc.speed(RouteKind::TowBack, LinkId(j)),
                Rational::from_int(80)
            );
        }
        for j in 1..=4u32 {
            assert_eq!(
                sc.speed(RouteKind::TowBack, LinkId(j)),
                Rational::from_int(30)
            );
        }
    }

    #[test]
    fn link_time_examples() {
        let base = base_highway();
        for route in RouteKind::ALL {
            assert_eq!(base.link_time_min(route, LinkId(1)), Rational::from_int(10));
        }
        let modified = modified_highway();
        assert_eq!(
            modified.link_time_min(RouteKind::TowBack, LinkId(13)),
            Rational::new(135, 2) // 67.5 min: 90 km at 80 km/h
        );
    }

    #[test]
    fn link_time_scales_inversely_with_speed() {
        let sc = base_highway();
        let mut speeds = sc.speeds().clone();
        for route in RouteKind::ALL {
            let doubled = sc.speed(route, LinkId(3)) * Rational::from_int(2);
            speeds.set_override(route, LinkId(3), doubled);
        }
        let faster = Scenario::new(
            sc.network().clone(),
            sc.workshop_param_map().clone(),
            speeds,
        )
        .unwrap();
        for route in RouteKind::ALL {
            assert_eq!(
                faster.link_time_min(route, LinkId(3)) * Rational::from_int(2),
                sc.link_time_min(route, LinkId(3))
            );
        }
    }

    #[test]
    fn missing_workshop_params_rejected() {
        let sc = base_highway();
        let mut params = sc.workshop_param_map().clone();
        params.remove(&NodeId(3));
        let err = Scenario::new(sc.network().clone(), params, sc.speeds().clone()).unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::MissingWorkshopParams(NodeId(3))
        ));
    }

    #[test]
    fn negative_workshop_time_rejected() {
        let sc = base_highway();
        let mut params = sc.workshop_param_map().clone();
        params.get_mut(&NodeId(2)).unwrap().maintenance_min = Rational::from_int(-1);
        let err = Scenario::new(sc.network().clone(), params, sc.speeds().clone()).unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::InvalidWorkshopParam {
                workshop: NodeId(2),
                ..
            }
        ));
    }

    #[test]
    fn params_for_non_workshop_node_rejected() {
        let sc = base_highway();
        let mut params = sc.workshop_param_map().clone();
        params.insert(
            NodeId(5),
            WorkshopParams {
                schedule_min: Rational::from_int(1),
                maintenance_min: Rational::from_int(1),
            },
        );
        let err = Scenario::new(sc.network().clone(), params, sc.speeds().clone()).unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::UnknownNodeReference {
                node: NodeId(5),
                ..
            }
        ));
    }

    #[test]
    fn speed_override_for_unknown_link_rejected() {
        let sc = base_highway();
        let mut speeds = sc.speeds().clone();
        speeds.set_override(RouteKind::TowOut, LinkId(99), Rational::from_int(50));
        let err = Scenario::new(
            sc.network().clone(),
            sc.workshop_param_map().clone(),
            speeds,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::UnknownLinkReference {
                link: LinkId(99),
                ..
            }
        ));
    }

    #[test]
    fn zero_speed_override_rejected() {
        let sc = base_highway();
        let mut speeds = sc.speeds().clone();
        speeds.set_override(RouteKind::TowBack, LinkId(5), Rational::ZERO);
        let err = Scenario::new(
            sc.network().clone(),
            sc.workshop_param_map().clone(),
            speeds,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::NonPositiveSpeed {
                route: RouteKind::TowBack,
                link: LinkId(5)
            }
        ));
    }

    #[test]
    fn route_endpoints_follow_the_mission() {
        let sc = base_highway();
        assert_eq!(
            sc.route_endpoints(NodeId(2), RouteKind::TowOut),
            (NodeId(2), NodeId(12))
        );
        assert_eq!(
            sc.route_endpoints(NodeId(2), RouteKind::TowBack),
            (NodeId(12), NodeId(2))
        );
        assert_eq!(
            sc.route_endpoints(NodeId(2), RouteKind::Delivery),
            (NodeId(2), NodeId(11))
        );
    }
}
