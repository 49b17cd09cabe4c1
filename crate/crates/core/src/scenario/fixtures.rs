//! Built-in example scenarios, compiled in from the files under
//! `fixtures/` so the shipped files and the constants can never drift.

use std::collections::BTreeMap;

use crate::network::{LinkId, NodeId};
use crate::rational::Rational;
use crate::scenario::format::{parse_scenario, split_records};
use crate::scenario::{RouteKind, Scenario, ScenarioError, WorkshopParams};

pub const BASE_HIGHWAY_SCN: &str = include_str!("../../fixtures/base_highway.scn");
pub const MODIFIED_HIGHWAY_SCN: &str = include_str!("../../fixtures/modified_highway.scn");
pub const URBAN_PATHS_DATA: &str = include_str!("../../fixtures/urban_paths.routes");

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FixtureName {
    BaseHighway,
    ModifiedHighway,
    UrbanPaths,
}

impl FixtureName {
    pub const ALL: [FixtureName; 3] = [
        FixtureName::BaseHighway,
        FixtureName::ModifiedHighway,
        FixtureName::UrbanPaths,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FixtureName::BaseHighway => "base_highway",
            FixtureName::ModifiedHighway => "modified_highway",
            FixtureName::UrbanPaths => "urban_paths",
        }
    }

    pub fn from_name(name: &str) -> Result<FixtureName, ScenarioError> {
        FixtureName::ALL
            .into_iter()
            .find(|f| f.as_str() == name)
            .ok_or_else(|| ScenarioError::UnknownFixture(name.to_string()))
    }
}

/// A built-in fixture: either a solvable scenario or path-only reference
/// data for recomputation.
#[derive(Clone, Debug)]
pub enum Fixture {
    Scenario(Scenario),
    Paths(PathFixture),
}

impl Fixture {
    pub fn into_scenario(self, name: &str) -> Result<Scenario, ScenarioError> {
        match self {
            Fixture::Scenario(s) => Ok(s),
            Fixture::Paths(_) => Err(ScenarioError::NotSolvable(name.to_string())),
        }
    }
}

/// Returns the named built-in fixture.
pub fn builtin_fixture(name: &str) -> Result<Fixture, ScenarioError> {
    Ok(match FixtureName::from_name(name)? {
        FixtureName::BaseHighway => Fixture::Scenario(parse_scenario(BASE_HIGHWAY_SCN)?),
        FixtureName::ModifiedHighway => Fixture::Scenario(parse_scenario(MODIFIED_HIGHWAY_SCN)?),
        FixtureName::UrbanPaths => Fixture::Paths(PathFixture::parse(URBAN_PATHS_DATA)?),
    })
}

/// The base highway scenario. Panics only if the bundled fixture is broken,
/// which the test suite rules out.
pub fn base_highway() -> Scenario {
    parse_scenario(BASE_HIGHWAY_SCN).expect("bundled fixture is valid")
}

pub fn modified_highway() -> Scenario {
    parse_scenario(MODIFIED_HIGHWAY_SCN).expect("bundled fixture is valid")
}

pub fn urban_paths() -> PathFixture {
    PathFixture::parse(URBAN_PATHS_DATA).expect("bundled fixture is valid")
}

/// Reference-path data for a network whose full topology is not modeled:
/// link lengths, per-route speeds, workshop times, and the three solution
/// routes of one selected workshop. Enough to re-price the routes, not to
/// solve from scratch.
#[derive(Clone, Debug)]
pub struct PathFixture {
    link_lengths: BTreeMap<LinkId, Rational>,
    route_speeds: [Rational; 3],
    workshop_params: BTreeMap<NodeId, WorkshopParams>,
    selected_workshop: NodeId,
    route_links: [Vec<LinkId>; 3],
    route_nodes: [Vec<NodeId>; 3],
}

impl PathFixture {
    pub fn parse(text: &str) -> Result<PathFixture, ScenarioError> {
        let sections = [
            "link_lengths",
            "speeds",
            "workshops",
            "solution",
            "route_links",
            "route_nodes",
        ];
        let err = |line: usize, message: String| ScenarioError::Parse { line, message };

        let mut link_lengths = BTreeMap::new();
        let mut route_speeds: [Option<Rational>; 3] = [None; 3];
        let mut workshop_params = BTreeMap::new();
        let mut selected_workshop = None;
        let mut route_links: [Option<Vec<LinkId>>; 3] = [None, None, None];
        let mut route_nodes: [Option<Vec<NodeId>>; 3] = [None, None, None];

        for (section, line, fields) in split_records(text, &sections)? {
            let nums: Result<Vec<Rational>, _> = fields
                .iter()
                .map(|f| {
                    Rational::parse(f).map_err(|_| err(line, format!("{f:?} is not a number")))
                })
                .collect();
            let nums = nums?;
            let int_at = |i: usize| -> Result<u32, ScenarioError> {
                let v = nums[i];
                if v.denom() == 1 && v.numer() > 0 && v.numer() <= u32::MAX as i128 {
                    Ok(v.numer() as u32)
                } else {
                    Err(err(
                        line,
                        format!("field {} must be a positive integer", i + 1),
                    ))
                }
            };
            match section.as_str() {
                "link_lengths" => {
                    if nums.len() != 2 {
                        return Err(err(line, "link length record needs 2 fields".into()));
                    }
                    link_lengths.insert(LinkId(int_at(0)?), nums[1]);
                }
                "speeds" => {
                    if nums.len() != 2 {
                        return Err(err(line, "speed record needs 2 fields".into()));
                    }
                    let route = RouteKind::from_number(int_at(0)?)
                        .ok_or_else(|| err(line, "route must be 1..3".into()))?;
                    route_speeds[route.index()] = Some(nums[1]);
                }
                "workshops" => {
                    if nums.len() != 3 {
                        return Err(err(line, "workshop record needs 3 fields".into()));
                    }
                    workshop_params.insert(
                        NodeId(int_at(0)?),
                        WorkshopParams {
                            schedule_min: nums[1],
                            maintenance_min: nums[2],
                        },
                    );
                }
                "solution" => {
                    if nums.len() != 1 {
                        return Err(err(line, "solution record is one workshop id".into()));
                    }
                    selected_workshop = Some(NodeId(int_at(0)?));
                }
                "route_links" | "route_nodes" => {
                    if nums.len() < 2 {
                        return Err(err(line, "route record needs a route and one id".into()));
                    }
                    let route = RouteKind::from_number(int_at(0)?)
                        .ok_or_else(|| err(line, "route must be 1..3".into()))?;
                    let ids: Result<Vec<u32>, _> = (1..nums.len()).map(int_at).collect();
                    let ids = ids?;
                    if section == "route_links" {
                        route_links[route.index()] = Some(ids.into_iter().map(LinkId).collect());
                    } else {
                        route_nodes[route.index()] = Some(ids.into_iter().map(NodeId).collect());
                    }
                }
                _ => unreachable!("section names validated"),
            }
        }

        let fail = |message: &str| err(0, message.to_string());
        let route_speeds = [
            route_speeds[0].ok_or_else(|| fail("missing speed for route 1"))?,
            route_speeds[1].ok_or_else(|| fail("missing speed for route 2"))?,
            route_speeds[2].ok_or_else(|| fail("missing speed for route 3"))?,
        ];
        let selected_workshop = selected_workshop.ok_or_else(|| fail("missing [solution]"))?;
        let fixture = PathFixture {
            link_lengths,
            route_speeds,
            workshop_params,
            selected_workshop,
            route_links: [
                route_links[0]
                    .take()
                    .ok_or_else(|| fail("missing links for route 1"))?,
                route_links[1]
                    .take()
                    .ok_or_else(|| fail("missing links for route 2"))?,
                route_links[2]
                    .take()
                    .ok_or_else(|| fail("missing links for route 3"))?,
            ],
            route_nodes: [
                route_nodes[0]
                    .take()
                    .ok_or_else(|| fail("missing nodes for route 1"))?,
                route_nodes[1]
                    .take()
                    .ok_or_else(|| fail("missing nodes for route 2"))?,
                route_nodes[2]
                    .take()
                    .ok_or_else(|| fail("missing nodes for route 3"))?,
            ],
        };
        if !fixture
            .workshop_params
            .contains_key(&fixture.selected_workshop)
        {
            return Err(fail("selected workshop has no parameters"));
        }
        for route in RouteKind::ALL {
            for link in fixture.route_links(route) {
                if !fixture.link_lengths.contains_key(link) {
                    return Err(fail(&format!("route {route} uses unknown link {link}")));
                }
            }
            if fixture.route_nodes(route).len() != fixture.route_links(route).len() + 1 {
                return Err(fail(&format!(
                    "route {route} node sequence does not match its link count"
                )));
            }
        }
        Ok(fixture)
    }

    pub fn selected_workshop(&self) -> NodeId {
        self.selected_workshop
    }

    pub fn workshop_params(&self, workshop: NodeId) -> &WorkshopParams {
        &self.workshop_params[&workshop]
    }

    pub fn route_links(&self, route: RouteKind) -> &[LinkId] {
        &self.route_links[route.index()]
    }

    pub fn route_nodes(&self, route: RouteKind) -> &[NodeId] {
        &self.route_nodes[route.index()]
    }

    pub fn link_length_km(&self, link: LinkId) -> Rational {
        self.link_lengths[&link]
    }

    pub fn route_speed_kmh(&self, route: RouteKind) -> Rational {
        self.route_speeds[route.index()]
    }

    /// Driving minutes of the stored route: sum of `60 * length / speed`.
    pub fn route_driving_min(&self, route: RouteKind) -> Rational {
        let speed = self.route_speed_kmh(route);
        self.route_links(route)
            .iter()
            .map(|link| Rational::from_int(60) * self.link_lengths[link] / speed)
            .sum()
    }

    /// Total mission minutes for the stored solution.
    pub fn total_min(&self) -> Rational {
        let params = self.workshop_params(self.selected_workshop);
        params.schedule_min
            + params.maintenance_min
            + RouteKind::ALL
                .into_iter()
                .map(|r| self.route_driving_min(r))
                .sum::<Rational>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_name_lookup() {
        assert_eq!(
            FixtureName::from_name("base_highway").unwrap(),
            FixtureName::BaseHighway
        );
        assert!(matches!(
            FixtureName::from_name("no_such_fixture"),
            Err(ScenarioError::UnknownFixture(_))
        ));
    }

    #[test]
    fn all_builtin_fixtures_parse() {
        for name in FixtureName::ALL {
            builtin_fixture(name.as_str()).unwrap();
        }
    }

    #[test]
    fn urban_fixture_is_paths_only() {
        let fixture = builtin_fixture("urban_paths").unwrap();
        assert!(matches!(fixture, Fixture::Paths(_)));
        assert!(matches!(
            builtin_fixture("urban_paths")
                .unwrap()
                .into_scenario("urban_paths"),
            Err(ScenarioError::NotSolvable(_))
        ));
    }

    #[test]
    fn urban_lengths_match_reference() {
        let urban = urban_paths();
        assert_eq!(urban.link_length_km(LinkId(20)), Rational::from_int(120));
        assert_eq!(urban.link_length_km(LinkId(41)), Rational::from_int(60));
        assert_eq!(urban.link_length_km(LinkId(42)), Rational::from_int(90));
    }

    #[test]
    fn urban_route_times() {
        let urban = urban_paths();
        assert_eq!(
            urban.route_driving_min(RouteKind::TowOut),
            Rational::from_int(380)
        );
        assert_eq!(
            urban.route_driving_min(RouteKind::TowBack),
            Rational::from_int(510)
        );
        assert_eq!(
            urban.route_driving_min(RouteKind::Delivery),
            Rational::from_int(240)
        );
        assert_eq!(urban.total_min(), Rational::from_int(1290));
        assert_eq!(urban.selected_workshop(), NodeId(6));
        let p = urban.workshop_params(NodeId(6));
        assert_eq!(p.schedule_min, Rational::from_int(60));
        assert_eq!(p.maintenance_min, Rational::from_int(100));
    }

    #[test]
    fn compiled_fixtures_match_shipped_files() {
        for (constant, file) in [
            (BASE_HIGHWAY_SCN, "fixtures/base_highway.scn"),
            (MODIFIED_HIGHWAY_SCN, "fixtures/modified_highway.scn"),
            (URBAN_PATHS_DATA, "fixtures/urban_paths.routes"),
        ] {
            let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(file);
            let on_disk = std::fs::read_to_string(&path).unwrap();
            assert_eq!(constant, on_disk, "{file} drifted from the compiled copy");
        }
    }
}
