//! Exact integer program over link flows, solved by a self-contained
//! depth-first branch-and-bound search.
//!
//! One binary variable per workshop picks where the tow truck comes from;
//! one ternary variable per (route, link) carries signed flow: `+1` drives
//! the link along its reference direction, `-1` against it, `0` skips it.
//! Signed node-link incidence rows turn path-finding into linear equalities:
//! the flow of each leg leaves its start once, arrives at its end once, and
//! conserves at every traffic node. The objective charges each selected
//! workshop its fixed times and each selected link its driving time, so the
//! driving cost depends only on whether a link is used, not on the sign.
//!
//! The search branches over variables in a fixed order (workshop choices
//! first, then flows by route and link id) and values in the order `0`,
//! `+1`, `-1`, unit-propagates equality constraints after every assignment,
//! and prunes once the cost of the assigned variables reaches the incumbent.
//! Optimality is by exhaustion; every instance this crate targets is tiny.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::time::Instant;

use crate::network::{LinkId, NodeId, NodeRole};
use crate::rational::Rational;
use crate::scenario::{RouteKind, Scenario};
use crate::solution::{RoutePath, Solution, SolveMethod, SolveStats};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MipError {
    #[error("scenario has no breakdown site")]
    NoBreakdown,
    #[error("no assignment satisfies the constraints")]
    Infeasible,
    #[error("route {route} flow does not form a single path (residual cycle)")]
    ResidualCycle { route: RouteKind },
}

/// Identity of one decision variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum VarId {
    /// Workshop selection indicator.
    Workshop(NodeId),
    /// Signed flow of a route over a link.
    Flow(RouteKind, LinkId),
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Workshop(i) => write!(f, "x[{i}]"),
            VarId::Flow(k, j) => write!(f, "y[{k},{j}]"),
        }
    }
}

/// Admissible values of a variable, a subset of `{-1, 0, +1}`. Flow
/// domains encode one-way restrictions: a sign is only admissible when the
/// link may be driven in that direction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Domain {
    pub zero: bool,
    pub pos: bool,
    pub neg: bool,
}

impl Domain {
    pub const BINARY: Domain = Domain {
        zero: true,
        pos: true,
        neg: false,
    };

    pub fn contains(&self, v: i8) -> bool {
        match v {
            0 => self.zero,
            1 => self.pos,
            -1 => self.neg,
            _ => false,
        }
    }

    /// Values in branching order: `0`, `+1`, `-1`.
    pub fn branch_values(&self) -> impl Iterator<Item = i8> {
        let d = *self;
        [(0, d.zero), (1, d.pos), (-1, d.neg)]
            .into_iter()
            .filter(|(_, ok)| *ok)
            .map(|(v, _)| v)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.zero {
            parts.push("0");
        }
        if self.pos {
            parts.push("1");
        }
        if self.neg {
            parts.push("-1");
        }
        format!("{{{}}}", parts.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct MipVar {
    pub id: VarId,
    pub domain: Domain,
    /// Objective coefficient, charged on the absolute value.
    pub cost: Rational,
}

/// Linear equality `sum(coeff * var) = rhs` with coefficients in `{-1,+1}`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(usize, i8)>,
    pub rhs: i32,
}

/// The assembled program: variables with domains and costs plus the
/// equality constraints. Immutable once built; solving never mutates it.
pub struct IntegerProgram {
    vars: Vec<MipVar>,
    constraints: Vec<Constraint>,
    index: BTreeMap<VarId, usize>,
    workshop_count: usize,
}

impl IntegerProgram {
    /// Instantiates the program for a scenario.
    pub fn build(scenario: &Scenario) -> Result<IntegerProgram, MipError> {
        let network = scenario.network();
        let breakdown = *network.breakdown().ok_or(MipError::NoBreakdown)?;
        let incidence = network.incidence();
        let link_ids = incidence.link_ids().to_vec();

        let mut vars = Vec::new();
        let mut index = BTreeMap::new();
        for workshop in network.workshops() {
            let params = scenario.workshop_params(workshop);
            index.insert(VarId::Workshop(workshop), vars.len());
            vars.push(MipVar {
                id: VarId::Workshop(workshop),
                domain: Domain::BINARY,
                cost: params.schedule_min + params.maintenance_min,
            });
        }
        let workshop_count = vars.len();
        for route in RouteKind::ALL {
            for link in network.links() {
                index.insert(VarId::Flow(route, link.id), vars.len());
                vars.push(MipVar {
                    id: VarId::Flow(route, link.id),
                    domain: Domain {
                        zero: true,
                        pos: network.allows_forward(link),
                        neg: network.allows_reverse(link),
                    },
                    cost: scenario.link_time_min(route, link.id),
                });
            }
        }

        let flow_pos =
            |route: RouteKind, link: LinkId| -> usize { index[&VarId::Flow(route, link)] };
        // Signed incidence row of a node, as (variable, coefficient) terms
        // for one route's flow variables.
        let node_flow_terms = |route: RouteKind, node: NodeId| -> Vec<(usize, i8)> {
            incidence
                .row(node)
                .iter()
                .zip(&link_ids)
                .filter(|(coeff, _)| **coeff != 0)
                .map(|(coeff, link)| (flow_pos(route, *link), *coeff))
                .collect()
        };

        let mut constraints = vec![Constraint {
            label: "select-one-workshop".to_string(),
            terms: (0..workshop_count).map(|pos| (pos, 1)).collect(),
            rhs: 1,
        }];
        constraints.push(Constraint {
            label: "tow-out-ends-at-breakdown".to_string(),
            terms: node_flow_terms(RouteKind::TowOut, breakdown.node),
            rhs: -1,
        });
        constraints.push(Constraint {
            label: "tow-out-skips-exit-stub".to_string(),
            terms: vec![(flow_pos(RouteKind::TowOut, breakdown.out_link), 1)],
            rhs: 0,
        });
        constraints.push(Constraint {
            label: "tow-back-starts-at-breakdown".to_string(),
            terms: node_flow_terms(RouteKind::TowBack, breakdown.node),
            rhs: 1,
        });
        constraints.push(Constraint {
            label: "tow-back-skips-entry-stub".to_string(),
            terms: vec![(flow_pos(RouteKind::TowBack, breakdown.in_link), 1)],
            rhs: 0,
        });
        constraints.push(Constraint {
            label: "delivery-ends-at-customer".to_string(),
            terms: node_flow_terms(RouteKind::Delivery, network.customer()),
            rhs: -1,
        });
        constraints.push(Constraint {
            label: "delivery-passes-breakdown-whole".to_string(),
            terms: vec![
                (flow_pos(RouteKind::Delivery, breakdown.in_link), 1),
                (flow_pos(RouteKind::Delivery, breakdown.out_link), -1),
            ],
            rhs: 0,
        });

        // The selected workshop sources the tow-out and delivery legs and
        // sinks the tow-back leg; unselected workshops stay balanced.
        for route in [RouteKind::TowOut, RouteKind::Delivery] {
            for workshop in network.workshops() {
                let mut terms = node_flow_terms(route, workshop);
                terms.push((index[&VarId::Workshop(workshop)], -1));
                constraints.push(Constraint {
                    label: format!("workshop-{workshop}-sources-route-{route}"),
                    terms,
                    rhs: 0,
                });
            }
        }
        for workshop in network.workshops() {
            let mut terms = node_flow_terms(RouteKind::TowBack, workshop);
            terms.push((index[&VarId::Workshop(workshop)], 1));
            constraints.push(Constraint {
                label: format!("workshop-{workshop}-sinks-route-2"),
                terms,
                rhs: 0,
            });
        }

        // Flow conservation over traffic nodes. The delivery leg terminates
        // at the customer, so the customer row is skipped for it; the
        // breakdown node needs no row because its two stubs are already
        // tied together above.
        let traffic = |role: NodeRole| {
            matches!(
                role,
                NodeRole::Warehouse | NodeRole::Interchange | NodeRole::Customer
            )
        };
        for route in [RouteKind::TowOut, RouteKind::TowBack] {
            for (node, role) in network.nodes() {
                if traffic(*role) {
                    constraints.push(Constraint {
                        label: format!("conserve-route-{route}-node-{node}"),
                        terms: node_flow_terms(route, *node),
                        rhs: 0,
                    });
                }
            }
        }
        for (node, role) in network.nodes() {
            if traffic(*role) && *node != network.customer() {
                constraints.push(Constraint {
                    label: format!("conserve-route-3-node-{node}"),
                    terms: node_flow_terms(RouteKind::Delivery, *node),
                    rhs: 0,
                });
            }
        }

        Ok(IntegerProgram {
            vars,
            constraints,
            index,
            workshop_count,
        })
    }

    pub fn vars(&self) -> &[MipVar] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn workshop_var_count(&self) -> usize {
        self.workshop_count
    }

    pub fn flow_var_count(&self) -> usize {
        self.vars.len() - self.workshop_count
    }

    pub fn position(&self, id: VarId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Objective value of an assignment: costs are charged on `|value|`.
    pub fn objective_of(&self, assignment: &[i8]) -> Rational {
        self.vars
            .iter()
            .zip(assignment)
            .filter(|(_, v)| **v != 0)
            .map(|(var, _)| var.cost)
            .sum()
    }

    /// Independent feasibility check: domains and every constraint,
    /// evaluated directly from the stored data. The search never calls
    /// this; tests use it to audit solutions.
    pub fn check_assignment(&self, assignment: &[i8]) -> Result<(), String> {
        if assignment.len() != self.vars.len() {
            return Err(format!(
                "assignment has {} values for {} variables",
                assignment.len(),
                self.vars.len()
            ));
        }
        for (var, value) in self.vars.iter().zip(assignment) {
            if !var.domain.contains(*value) {
                return Err(format!(
                    "{} = {} outside domain {}",
                    var.id,
                    value,
                    var.domain.label()
                ));
            }
        }
        for c in &self.constraints {
            let sum: i32 = c
                .terms
                .iter()
                .map(|(pos, coeff)| *coeff as i32 * assignment[*pos] as i32)
                .sum();
            if sum != c.rhs {
                return Err(format!(
                    "constraint {} sums to {sum}, needs {}",
                    c.label, c.rhs
                ));
            }
        }
        Ok(())
    }

    /// Deterministic text dump of variables, domains, costs, and
    /// constraints, for golden tests and debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("variables {}\n", self.vars.len()));
        for var in &self.vars {
            out.push_str(&format!(
                "  {} domain {} cost {}\n",
                var.id,
                var.domain.label(),
                var.cost
            ));
        }
        out.push_str(&format!("constraints {}\n", self.constraints.len()));
        for c in &self.constraints {
            out.push_str(&format!("  {}:", c.label));
            for (pos, coeff) in &c.terms {
                let sign = if *coeff >= 0 { '+' } else { '-' };
                out.push_str(&format!(" {sign}{}", self.vars[*pos].id));
            }
            out.push_str(&format!(" = {}\n", c.rhs));
        }
        out
    }
}

/// Per-(workshop, leg) shortest-path driving times, usable as an optional
/// strengthening bound in the search: once a workshop variable is fixed to
/// one, no feasible completion can drive a leg faster than its shortest
/// path. Off by default so the baseline search stays untouched; compute
/// once and pass to [`solve_with_bounds`] to enable.
pub struct RouteBounds {
    per_workshop: BTreeMap<NodeId, [Rational; 3]>,
}

impl RouteBounds {
    pub fn compute(scenario: &Scenario) -> RouteBounds {
        let graphs = crate::two_stage::route_graphs(scenario);
        let mut per_workshop = BTreeMap::new();
        for workshop in scenario.workshops() {
            let mut bounds = [Rational::ZERO; 3];
            for route in RouteKind::ALL {
                let (from, to) = scenario.route_endpoints(workshop, route);
                // An unreachable leg keeps a zero bound; the constraints
                // rule those completions out on their own.
                bounds[route.index()] =
                    crate::two_stage::shortest_path(&graphs[route.index()], from, to)
                        .ok()
                        .and_then(|run| run.distance(to))
                        .unwrap_or(Rational::ZERO);
            }
            per_workshop.insert(workshop, bounds);
        }
        RouteBounds { per_workshop }
    }
}

/// A provably optimal assignment.
pub struct MipSolution {
    pub assignment: Vec<i8>,
    pub objective_min: Rational,
    pub stats: SolveStats,
}

impl MipSolution {
    pub fn value(&self, program: &IntegerProgram, id: VarId) -> i8 {
        self.assignment[program.position(id).expect("known variable")]
    }

    pub fn selected_workshop(&self, program: &IntegerProgram) -> NodeId {
        program
            .vars()
            .iter()
            .zip(&self.assignment)
            .find_map(|(var, value)| match var.id {
                VarId::Workshop(node) if *value == 1 => Some(node),
                _ => None,
            })
            .expect("one workshop is selected by constraint")
    }
}

struct Search<'p> {
    program: &'p IntegerProgram,
    bounds: Option<&'p RouteBounds>,
    value: Vec<i8>,
    assigned: Vec<bool>,
    occurs: Vec<Vec<(usize, i8)>>,
    free_count: Vec<u32>,
    fixed_sum: Vec<i32>,
    trail: Vec<usize>,
    pending: VecDeque<usize>,
    fixed_cost: Rational,
    route_cost: [Rational; 3],
    best: Option<(Rational, Vec<i8>)>,
    branches: u64,
}

struct Conflict;

impl<'p> Search<'p> {
    fn new(program: &'p IntegerProgram, bounds: Option<&'p RouteBounds>) -> Search<'p> {
        let n = program.vars.len();
        let mut occurs: Vec<Vec<(usize, i8)>> = vec![Vec::new(); n];
        for (ci, c) in program.constraints.iter().enumerate() {
            for (pos, coeff) in &c.terms {
                occurs[*pos].push((ci, *coeff));
            }
        }
        Search {
            program,
            bounds,
            value: vec![0; n],
            assigned: vec![false; n],
            occurs,
            free_count: program
                .constraints
                .iter()
                .map(|c| c.terms.len() as u32)
                .collect(),
            fixed_sum: vec![0; program.constraints.len()],
            trail: Vec::new(),
            pending: VecDeque::new(),
            fixed_cost: Rational::ZERO,
            route_cost: [Rational::ZERO; 3],
            best: None,
            branches: 0,
        }
    }

    fn set(&mut self, var: usize, v: i8) -> Result<(), Conflict> {
        debug_assert!(!self.assigned[var]);
        if !self.program.vars[var].domain.contains(v) {
            return Err(Conflict);
        }
        self.value[var] = v;
        self.assigned[var] = true;
        self.trail.push(var);
        if v != 0 {
            self.fixed_cost += self.program.vars[var].cost;
            if let VarId::Flow(route, _) = self.program.vars[var].id {
                self.route_cost[route.index()] += self.program.vars[var].cost;
            }
        }
        let mut violated = false;
        for &(ci, coeff) in &self.occurs[var] {
            self.fixed_sum[ci] += coeff as i32 * v as i32;
            self.free_count[ci] -= 1;
            match self.free_count[ci] {
                0 => violated |= self.fixed_sum[ci] != self.program.constraints[ci].rhs,
                1 => self.pending.push_back(ci),
                _ => {}
            }
        }
        if violated {
            Err(Conflict)
        } else {
            Ok(())
        }
    }

    /// Fixes every constraint left with one free variable, or fails.
    fn propagate(&mut self) -> Result<(), Conflict> {
        while let Some(ci) = self.pending.pop_front() {
            if self.free_count[ci] != 1 {
                continue;
            }
            let c = &self.program.constraints[ci];
            let (var, coeff) = *c
                .terms
                .iter()
                .find(|(pos, _)| !self.assigned[*pos])
                .expect("exactly one free variable");
            let needed = c.rhs - self.fixed_sum[ci];
            // Coefficients are +-1, so the forced value is needed / coeff.
            let forced = needed * coeff as i32;
            if forced.abs() > 1 {
                return Err(Conflict);
            }
            self.set(var, forced as i8)?;
        }
        Ok(())
    }

    fn assign_and_propagate(&mut self, var: usize, v: i8) -> Result<(), Conflict> {
        let result = self.set(var, v).and_then(|_| self.propagate());
        if result.is_err() {
            self.pending.clear();
        }
        result
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().expect("trail not empty");
            let v = self.value[var];
            if v != 0 {
                self.fixed_cost = self.fixed_cost - self.program.vars[var].cost;
                if let VarId::Flow(route, _) = self.program.vars[var].id {
                    self.route_cost[route.index()] =
                        self.route_cost[route.index()] - self.program.vars[var].cost;
                }
            }
            for &(ci, coeff) in &self.occurs[var] {
                self.fixed_sum[ci] -= coeff as i32 * v as i32;
                self.free_count[ci] += 1;
            }
            self.assigned[var] = false;
            self.value[var] = 0;
        }
    }

    /// Cost no feasible completion of the current assignment can beat:
    /// the assigned cost, plus (once some workshop variable is one and
    /// bounds are enabled) however far each leg still is from its
    /// shortest-path minimum.
    fn lower_bound(&self) -> Rational {
        let mut bound = self.fixed_cost;
        if let Some(bounds) = self.bounds {
            let committed = (0..self.program.workshop_count)
                .find(|pos| self.assigned[*pos] && self.value[*pos] == 1)
                .map(|pos| match self.program.vars[pos].id {
                    VarId::Workshop(node) => node,
                    VarId::Flow(..) => unreachable!("workshop block holds workshop vars"),
                });
            if let Some(legs) = committed.and_then(|w| bounds.per_workshop.get(&w)) {
                for (route_idx, leg_min) in legs.iter().enumerate() {
                    if self.route_cost[route_idx] < *leg_min {
                        bound += *leg_min - self.route_cost[route_idx];
                    }
                }
            }
        }
        bound
    }

    fn dfs(&mut self) {
        if let Some((bound, _)) = &self.best {
            // Costs are non-negative, so the assigned cost (strengthened
            // by any enabled route bounds) is a lower bound; at or above
            // the incumbent nothing here can win.
            if self.lower_bound() >= *bound {
                return;
            }
        }
        let Some(var) = self.assigned.iter().position(|a| !a) else {
            // Complete and, by propagation, feasible.
            let improves = match &self.best {
                None => true,
                Some((bound, _)) => self.fixed_cost < *bound,
            };
            if improves {
                self.best = Some((self.fixed_cost, self.value.clone()));
            }
            return;
        };
        let domain = self.program.vars[var].domain;
        for v in domain.branch_values() {
            self.branches += 1;
            let mark = self.trail.len();
            if self.assign_and_propagate(var, v).is_ok() {
                self.dfs();
            }
            self.undo_to(mark);
        }
    }
}

/// Finds a provably optimal assignment by exhaustive search with unit
/// propagation and incumbent pruning. Deterministic: fixed variable order,
/// value order `0`, `+1`, `-1`, and the first optimum found is kept.
pub fn solve_exact(program: &IntegerProgram) -> Result<MipSolution, MipError> {
    solve_with_bounds(program, None)
}

/// [`solve_exact`] with the optional shortest-path strengthening bound.
/// Enabling it never changes the returned assignment: pruning only cuts
/// subtrees whose completions cannot beat the incumbent, so the first
/// optimum found under the fixed order is the same, it just gets there in
/// fewer branches.
pub fn solve_with_bounds(
    program: &IntegerProgram,
    bounds: Option<&RouteBounds>,
) -> Result<MipSolution, MipError> {
    let started = Instant::now();
    let mut search = Search::new(program, bounds);
    // Some constraints start unit (or trivially violated); settle them
    // before branching.
    for (ci, c) in program.constraints.iter().enumerate() {
        match c.terms.len() {
            0 if c.rhs != 0 => return Err(MipError::Infeasible),
            1 => search.pending.push_back(ci),
            _ => {}
        }
    }
    if search.propagate().is_ok() {
        search.dfs();
    }
    let (objective, assignment) = search.best.ok_or(MipError::Infeasible)?;
    debug_assert!(program.check_assignment(&assignment).is_ok());
    debug_assert_eq!(program.objective_of(&assignment), objective);
    Ok(MipSolution {
        assignment,
        objective_min: objective,
        stats: SolveStats {
            method: SolveMethod::Mip,
            expansions: search.branches,
            wall_time: started.elapsed(),
        },
    })
}

/// Walks one route's selected links from `start`, following signs, until no
/// unconsumed link leaves the current node. Succeeds only when the walk
/// ends at `end` having consumed every link.
fn walk_route(
    scenario: &Scenario,
    start: NodeId,
    end: NodeId,
    selected: &mut Vec<(LinkId, i8)>,
) -> Option<(Vec<NodeId>, Vec<LinkId>)> {
    let network = scenario.network();
    let mut nodes = vec![start];
    let mut links = Vec::new();
    let mut at = start;
    loop {
        let next = selected.iter().position(|(link_id, sign)| {
            let link = network.link(*link_id).expect("validated");
            (*sign > 0 && link.tail == at) || (*sign < 0 && link.head == at)
        });
        let Some(i) = next else { break };
        let (link_id, sign) = selected.remove(i);
        let link = network.link(link_id).expect("validated");
        at = if sign > 0 { link.head } else { link.tail };
        nodes.push(at);
        links.push(link_id);
    }
    (at == end && selected.is_empty()).then_some((nodes, links))
}

/// Reads the three route paths out of an optimal assignment.
pub fn extract_routes(
    solution: &MipSolution,
    program: &IntegerProgram,
    scenario: &Scenario,
) -> Result<[RoutePath; 3], MipError> {
    let workshop = solution.selected_workshop(program);
    let mut routes = Vec::with_capacity(3);
    for route in RouteKind::ALL {
        let mut selected: Vec<(LinkId, i8)> = program
            .vars()
            .iter()
            .zip(&solution.assignment)
            .filter_map(|(var, value)| match var.id {
                VarId::Flow(k, link) if k == route && *value != 0 => Some((link, *value)),
                _ => None,
            })
            .collect();
        let (from, to) = scenario.route_endpoints(workshop, route);
        let (nodes, links) = walk_route(scenario, from, to, &mut selected)
            .ok_or(MipError::ResidualCycle { route })?;
        let driving_min = links
            .iter()
            .map(|link| scenario.link_time_min(route, *link))
            .sum();
        routes.push(RoutePath {
            route,
            nodes,
            links,
            driving_min,
        });
    }
    Ok(routes.try_into().expect("three routes"))
}

/// Builds, solves, and extracts in one call.
pub fn solve_scenario(scenario: &Scenario) -> Result<(Solution, SolveStats), MipError> {
    let started = Instant::now();
    let program = IntegerProgram::build(scenario)?;
    let mip = solve_exact(&program)?;
    let routes = extract_routes(&mip, &program, scenario)?;
    let workshop = mip.selected_workshop(&program);
    let params = scenario.workshop_params(workshop);
    let solution = Solution {
        workshop,
        schedule_min: params.schedule_min,
        maintenance_min: params.maintenance_min,
        routes,
        total_min: mip.objective_min,
    };
    debug_assert!(solution.breakdown_sums());
    let stats = SolveStats {
        method: SolveMethod::Mip,
        expansions: mip.stats.expansions,
        wall_time: started.elapsed(),
    };
    Ok((solution, stats))
}
