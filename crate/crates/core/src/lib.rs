//! Recovery planning for a vehicle that breaks down mid-mission.
//!
//! When a vehicle fails on a road link, a workshop has to schedule a tow
//! truck, tow the vehicle in, repair it, and send it on to the customer.
//! Total mission time is the scheduling time, the maintenance time, and the
//! driving time of three legs: tow truck out to the breakdown site, tow back
//! to the workshop, and final delivery. This crate picks the workshop and the
//! three routes that minimize the total, using two independent solvers:
//!
//! * [`mip`]: an exact link-flow integer program solved by a self-contained
//!   depth-first branch-and-bound search, and
//! * [`two_stage`]: per-workshop shortest paths (Dijkstra) followed by an
//!   argmin over workshops.
//!
//! Both are cross-validated against a brute-force [`oracle`]. The `towplan`
//! binary exposes solving, benchmarking, and scenario validation.

pub mod cli;
pub mod mip;
pub mod network;
pub mod oracle;
pub mod rational;
pub mod scenario;
pub mod solution;
pub mod two_stage;

pub use network::{
    build_network, DirectionPolicy, Link, LinkId, NetworkError, NodeId, NodeRole, RoadNetwork,
    SplitSpec,
};
pub use rational::Rational;
pub use scenario::{
    builtin_fixture, load_scenario, parse_scenario, Fixture, PathFixture, RouteKind, Scenario,
    ScenarioError, WorkshopParams,
};
pub use solution::{RoutePath, Solution, SolveMethod, SolveStats};
