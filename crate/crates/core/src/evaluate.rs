//! Exact evaluation of cable topologies: tree power flow with true
//! quadratic losses, cost reporting, feasibility checking, the exhaustive
//! oracle, and the conventional baselines.

use serde::{Deserialize, Serialize};

use crate::candidates::{enumerate_candidates, find_crossings, CandidateCable, CandidateGraph};
use crate::error::{Error, Result};
use crate::farm::{CostModel, Node, NodeKind, PlanningConfig, Point, WindFarmInstance};
use crate::solver::SolveStats;

/// A chosen cable set with its root-ward orientation and operating point.
/// The pair lists are sorted by their first element; curtailment holds only
/// the turbines a plan explicitly declares as stranded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub chosen: Vec<usize>,
    /// (turbine, parent node)
    pub parent: Vec<(usize, usize)>,
    /// (edge id, signed p.u. flow, positive from smaller to larger endpoint)
    pub flows: Vec<(usize, f64)>,
    /// (node id, p.u. voltage)
    pub voltages: Vec<(usize, f64)>,
    /// (turbine, p.u. curtailed power)
    pub curtailment: Vec<(usize, f64)>,
}

impl Plan {
    pub fn flow(&self, edge: usize) -> Option<f64> {
        self.flows
            .binary_search_by_key(&edge, |&(e, _)| e)
            .ok()
            .map(|k| self.flows[k].1)
    }

    pub fn voltage(&self, node: usize) -> Option<f64> {
        self.voltages
            .binary_search_by_key(&node, |&(n, _)| n)
            .ok()
            .map(|k| self.voltages[k].1)
    }

    pub fn curtailed(&self, node: usize) -> f64 {
        self.curtailment
            .binary_search_by_key(&node, |&(n, _)| n)
            .ok()
            .map_or(0.0, |k| self.curtailment[k].1)
    }
}

/// Cost sheet of one plan, in million yen and percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub investment: f64,
    pub operation: f64,
    pub curtailment_value: f64,
    pub total: f64,
    pub cable_length: f64,
    /// percent of total generation lost in cables
    pub loss_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stats: Option<SolveStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub candidates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub instance_digest: Option<String>,
}

/// Exact operating point of a radial plan.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFlow {
    /// (edge id, signed p.u. flow)
    pub flows: Vec<(usize, f64)>,
    /// (node id, p.u.)
    pub voltages: Vec<(usize, f64)>,
    /// (edge id, p.u. loss, true quadratic)
    pub losses: Vec<(usize, f64)>,
    pub total_loss_pu: f64,
}

struct Forest<'a> {
    graph: &'a CandidateGraph,
    /// edge connecting each turbine to its parent
    up_edge: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    /// nodes ordered root-ward first
    order: Vec<usize>,
}

/// Validates the plan's parent structure: every turbine exactly one parent,
/// substations none, chosen edges matching the orientation, and every tree
/// rooted at a substation.
fn build_forest<'a>(plan: &Plan, graph: &'a CandidateGraph) -> Result<Forest<'a>> {
    let nodes = &graph.instance.nodes;
    let n = nodes.len();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    for &(child, par) in &plan.parent {
        if child >= n || par >= n {
            return Err(Error::Structure(format!(
                "parent entry ({child}, {par}) references unknown nodes"
            )));
        }
        if nodes[child].kind == NodeKind::Substation {
            return Err(Error::Structure(format!(
                "substation {child} must not have a parent"
            )));
        }
        if parent[child].replace(par).is_some() {
            return Err(Error::Structure(format!("turbine {child} has two parents")));
        }
    }
    for node in nodes.iter().filter(|n| n.kind == NodeKind::WindTurbine) {
        if parent[node.id].is_none() {
            return Err(Error::Structure(format!("turbine {} has no parent", node.id)));
        }
    }

    let mut up_edge: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; graph.edges.len()];
    for &edge_id in &plan.chosen {
        let edge = graph
            .edges
            .get(edge_id)
            .ok_or_else(|| Error::Structure(format!("chosen edge {edge_id} does not exist")))?;
        let (i, j) = edge.endpoints;
        let child = if parent[j] == Some(i) {
            j
        } else if parent[i] == Some(j) {
            i
        } else {
            return Err(Error::Structure(format!(
                "chosen cable {edge_id} matches no parent relation"
            )));
        };
        if used[edge_id] || up_edge[child].replace(edge_id).is_some() {
            return Err(Error::Structure(format!(
                "turbine {child} is connected upward twice"
            )));
        }
        used[edge_id] = true;
    }
    if plan.chosen.len() != plan.parent.len() {
        return Err(Error::Structure(format!(
            "{} chosen cables cannot orient {} turbines",
            plan.chosen.len(),
            plan.parent.len()
        )));
    }

    // walk root-ward from substations through child lists
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (child, par) in parent.iter().enumerate().filter_map(|(c, p)| p.map(|p| (c, p))) {
        children[par].push(child);
    }
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<usize> = nodes
        .iter()
        .filter(|n| n.kind == NodeKind::Substation)
        .map(|n| n.id)
        .collect();
    let mut reached = vec![false; n];
    for &s in &stack {
        reached[s] = true;
    }
    while let Some(node) = stack.pop() {
        order.push(node);
        for &c in &children[node] {
            if !reached[c] {
                reached[c] = true;
                stack.push(c);
            }
        }
    }
    let stranded: Vec<usize> = (0..n).filter(|&i| !reached[i]).collect();
    if !stranded.is_empty() {
        return Err(Error::Structure(format!(
            "component {{{}}} is not rooted at any substation",
            stranded
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    Ok(Forest {
        graph,
        up_edge,
        parent,
        order,
    })
}

/// Leaf-to-root flow accumulation and root-to-leaf voltage telescoping on a
/// radial plan; losses are the true quadratic r*f^2 per cable.
pub fn tree_power_flow(
    plan: &Plan,
    graph: &CandidateGraph,
    config: &PlanningConfig,
) -> Result<TreeFlow> {
    let forest = build_forest(plan, graph)?;
    let base = &graph.instance.base;
    let n = graph.instance.nodes.len();

    // power sent root-ward by each node's subtree
    let mut up_flow = vec![0.0f64; n];
    for &node in forest.order.iter().rev() {
        let info = &graph.instance.nodes[node];
        if info.kind == NodeKind::WindTurbine {
            up_flow[node] += base.power_to_pu(info.gen_mw) - plan.curtailed(node);
        }
        if let Some(par) = forest.parent[node] {
            let carried = up_flow[node];
            up_flow[par] += carried;
        }
    }

    let mut flows = Vec::with_capacity(plan.chosen.len());
    let mut losses = Vec::with_capacity(plan.chosen.len());
    let mut total_loss = 0.0;
    for (child, edge_id) in forest
        .up_edge
        .iter()
        .enumerate()
        .filter_map(|(c, e)| e.map(|e| (c, e)))
    {
        let edge = &graph.edges[edge_id];
        let magnitude = up_flow[child];
        let signed = if edge.endpoints.0 == child {
            magnitude
        } else {
            -magnitude
        };
        let loss = edge.resistance * magnitude * magnitude;
        total_loss += loss;
        flows.push((edge_id, signed));
        losses.push((edge_id, loss));
    }
    flows.sort_unstable_by_key(|&(e, _)| e);
    losses.sort_unstable_by_key(|&(e, _)| e);

    // voltage rises from the substation toward generators
    let mut voltages = vec![0.0f64; n];
    for &node in &forest.order {
        match forest.parent[node] {
            None => voltages[node] = config.v_ref,
            Some(par) => {
                let edge = &graph.edges[forest.up_edge[node].expect("oriented")];
                voltages[node] = voltages[par] + up_flow[node] * edge.resistance;
            }
        }
    }

    Ok(TreeFlow {
        flows,
        voltages: (0..n).map(|i| (i, voltages[i])).collect(),
        losses,
        total_loss_pu: total_loss,
    })
}

/// Builds a plan (orientation, flows, voltages) from a bare cable set.
pub fn orient_forest(
    graph: &CandidateGraph,
    chosen: &[usize],
    config: &PlanningConfig,
) -> Result<Plan> {
    let n = graph.instance.nodes.len();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &edge_id in chosen {
        let edge = graph
            .edges
            .get(edge_id)
            .ok_or_else(|| Error::Structure(format!("edge {edge_id} does not exist")))?;
        adjacency[edge.endpoints.0].push((edge.endpoints.1, edge_id));
        adjacency[edge.endpoints.1].push((edge.endpoints.0, edge_id));
    }
    let mut parent_pairs = Vec::new();
    let mut visited = vec![false; n];
    let mut queue: std::collections::VecDeque<usize> = graph
        .instance
        .substations()
        .map(|s| s.id)
        .collect();
    for &s in &queue {
        visited[s] = true;
    }
    while let Some(node) = queue.pop_front() {
        for &(other, _) in &adjacency[node] {
            if !visited[other] {
                visited[other] = true;
                parent_pairs.push((other, node));
                queue.push_back(other);
            }
        }
    }
    parent_pairs.sort_unstable();

    let mut chosen_sorted = chosen.to_vec();
    chosen_sorted.sort_unstable();
    chosen_sorted.dedup();
    let mut plan = Plan {
        chosen: chosen_sorted,
        parent: parent_pairs,
        flows: Vec::new(),
        voltages: Vec::new(),
        curtailment: Vec::new(),
    };
    let flow = tree_power_flow(&plan, graph, config)?;
    plan.flows = flow.flows;
    plan.voltages = flow.voltages;
    Ok(plan)
}

pub fn operation_cost_myen(loss_mw: f64, cost_model: &CostModel) -> f64 {
    // MW over the lifetime hours, priced per kWh, reported in million yen
    cost_model.eta_hours * cost_model.energy_price * loss_mw / 1000.0
}

/// Investment, lifetime loss value, curtailment value and totals.
pub fn cost_breakdown(
    plan: &Plan,
    graph: &CandidateGraph,
    config: &PlanningConfig,
    cost_model: &CostModel,
) -> Result<CostReport> {
    let flow = tree_power_flow(plan, graph, config)?;
    let base = &graph.instance.base;

    let mut investment = 0.0;
    let mut cable_length = 0.0;
    for &edge_id in &plan.chosen {
        let edge = &graph.edges[edge_id];
        investment += edge.cost;
        cable_length += edge.length;
    }
    let loss_mw = base.power_from_pu(flow.total_loss_pu);
    let operation = operation_cost_myen(loss_mw, cost_model);
    let curtailed_pu: f64 = plan.curtailment.iter().map(|&(_, c)| c).sum();
    let curtailment_value = cost_model.curtail_penalty_myen_per_pu() * curtailed_pu;
    let generation = graph.instance.total_generation_mw();
    let loss_rate = if generation > 0.0 {
        loss_mw / generation * 100.0
    } else {
        0.0
    };
    Ok(CostReport {
        investment,
        operation,
        curtailment_value,
        total: investment + operation + curtailment_value,
        cable_length,
        loss_rate,
        stats: None,
        candidates: Some(graph.edges.len()),
        instance_digest: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanViolation {
    Structure { detail: String },
    Capacity { edge: usize, flow_pu: f64, capacity_pu: f64 },
    Voltage { node: usize, voltage_pu: f64 },
    Crossing { a: usize, b: usize },
}

impl std::fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanViolation::Structure { detail } => write!(f, "structure: {detail}"),
            PlanViolation::Capacity { edge, flow_pu, capacity_pu } => write!(
                f,
                "cable {edge} carries {flow_pu} p.u. against capacity {capacity_pu}"
            ),
            PlanViolation::Voltage { node, voltage_pu } => {
                write!(f, "node {node} voltage {voltage_pu} p.u. out of bounds")
            }
            PlanViolation::Crossing { a, b } => {
                write!(f, "chosen cables {a} and {b} cross")
            }
        }
    }
}

const FLOW_TOL: f64 = 1e-6;

/// Post-hoc verification of the planning constraints on a finished plan.
pub fn check_feasibility(
    plan: &Plan,
    graph: &CandidateGraph,
    config: &PlanningConfig,
) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    if let Err(e) = build_forest(plan, graph) {
        out.push(PlanViolation::Structure { detail: e.to_string() });
        return out;
    }
    for &(edge_id, f) in &plan.flows {
        let cap = graph.edges[edge_id].capacity;
        if f.abs() > cap + FLOW_TOL {
            out.push(PlanViolation::Capacity {
                edge: edge_id,
                flow_pu: f,
                capacity_pu: cap,
            });
        }
    }
    for &(node, v) in &plan.voltages {
        let ok = match graph.instance.nodes[node].kind {
            NodeKind::WindTurbine => v >= config.v_lo - FLOW_TOL && v <= config.v_hi + FLOW_TOL,
            NodeKind::Substation => (v - config.v_ref).abs() <= FLOW_TOL,
        };
        if !ok {
            out.push(PlanViolation::Voltage { node, voltage_pu: v });
        }
    }
    if config.forbid_crossings {
        let chosen = |id: usize| plan.chosen.binary_search(&id).is_ok();
        for &(a, b) in &graph.crossings {
            if chosen(a) && chosen(b) {
                out.push(PlanViolation::Crossing { a, b });
            }
        }
    }
    out
}

/// Exhaustively enumerates substation-rooted spanning forests and returns
/// the cheapest feasible one by exact cost. Guarded by `node_limit`.
pub fn brute_force_optimal(
    graph: &CandidateGraph,
    config: &PlanningConfig,
    cost_model: &CostModel,
    node_limit: usize,
) -> Result<(Plan, f64)> {
    let nodes = &graph.instance.nodes;
    if nodes.len() > node_limit {
        return Err(Error::invalid(format!(
            "{} nodes exceed the enumeration guard of {node_limit}",
            nodes.len()
        )));
    }
    let needed = graph.instance.turbine_count();
    let mut best: Option<(Vec<usize>, f64)> = None;

    // union-find over nodes, components remembering substation content
    #[derive(Clone)]
    struct Uf {
        parent: Vec<usize>,
        has_sub: Vec<bool>,
    }
    impl Uf {
        fn find(&mut self, i: usize) -> usize {
            let mut i = i;
            while self.parent[i] != i {
                i = self.parent[i];
            }
            i
        }
        fn union(&mut self, a: usize, b: usize) -> bool {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb || (self.has_sub[ra] && self.has_sub[rb]) {
                return false;
            }
            self.parent[ra] = rb;
            self.has_sub[rb] = self.has_sub[rb] || self.has_sub[ra];
            true
        }
    }

    fn dfs(
        graph: &CandidateGraph,
        config: &PlanningConfig,
        cost_model: &CostModel,
        next_edge: usize,
        chosen: &mut Vec<usize>,
        uf: &Uf,
        needed: usize,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        if chosen.len() == needed {
            if let Ok(plan) = orient_forest(graph, chosen, config) {
                if !check_feasibility(&plan, graph, config).is_empty() {
                    return;
                }
                if let Ok(report) = cost_breakdown(&plan, graph, config, cost_model) {
                    let better = match best {
                        None => true,
                        Some((edges, obj)) => {
                            report.total < *obj - 1e-12
                                || ((report.total - *obj).abs() <= 1e-12 && chosen < edges)
                        }
                    };
                    if better {
                        *best = Some((chosen.clone(), report.total));
                    }
                }
            }
            return;
        }
        let remaining = graph.edges.len() - next_edge;
        if remaining + chosen.len() < needed {
            return;
        }
        // take edge `next_edge`
        let edge = &graph.edges[next_edge];
        let mut with = uf.clone();
        if with.union(edge.endpoints.0, edge.endpoints.1) {
            chosen.push(next_edge);
            dfs(graph, config, cost_model, next_edge + 1, chosen, &with, needed, best);
            chosen.pop();
        }
        // skip it
        dfs(graph, config, cost_model, next_edge + 1, chosen, uf, needed, best);
    }

    let uf = Uf {
        parent: (0..nodes.len()).collect(),
        has_sub: nodes.iter().map(|n| n.kind == NodeKind::Substation).collect(),
    };
    let mut chosen = Vec::new();
    dfs(graph, config, cost_model, 0, &mut chosen, &uf, needed, &mut best);

    match best {
        Some((edges, objective)) => Ok((orient_forest(graph, &edges, config)?, objective)),
        None => Err(Error::Structure(
            "no feasible spanning forest exists".to_string(),
        )),
    }
}

/// Conventional layout: each row chained west to east, one home-run cable
/// per row from its eastmost turbine straight to the substation.
pub fn baseline_string_layout(
    instance: &WindFarmInstance,
    substation_position: Point,
    config: &PlanningConfig,
) -> Result<(CandidateGraph, Plan)> {
    if instance.substation_count() != 0 {
        return Err(Error::invalid(
            "string baseline expects an instance without substations".to_string(),
        ));
    }
    // group turbines into rows by y coordinate
    let mut rows: Vec<(f64, Vec<&Node>)> = Vec::new();
    for node in instance.turbines() {
        match rows.iter_mut().find(|(y, _)| (*y - node.coord.y).abs() < 1e-9) {
            Some((_, row)) => row.push(node),
            None => rows.push((node.coord.y, vec![node])),
        }
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (_, row) in rows.iter_mut() {
        row.sort_by(|a, b| a.coord.x.partial_cmp(&b.coord.x).unwrap());
    }
    let width = rows[0].1.len();
    let aligned = rows.iter().all(|(_, row)| {
        row.len() == width
            && row
                .iter()
                .zip(&rows[0].1)
                .all(|(a, b)| (a.coord.x - b.coord.x).abs() < 1e-9)
    });
    if !aligned {
        return Err(Error::invalid(
            "string baseline requires a rectangular grid of turbines".to_string(),
        ));
    }

    let mut sited = instance.clone();
    let sub_id = sited.nodes.len();
    sited.nodes.push(Node {
        id: sub_id,
        kind: NodeKind::Substation,
        coord: substation_position,
        gen_mw: 0.0,
    });

    let cable = config.cable_types[0];
    let mut edges: Vec<CandidateCable> = Vec::new();
    let mut push_edge = |a: usize, b: usize, sited: &WindFarmInstance| {
        let (i, j) = (a.min(b), a.max(b));
        let length = sited.nodes[i].coord.dist(&sited.nodes[j].coord);
        edges.push(CandidateCable {
            id: edges.len(),
            endpoints: (i, j),
            length,
            type_index: 0,
            cost: cable.cost_per_km * length,
            resistance: sited.base.resistance_to_pu(cable.resistance_ohm_per_km, length),
            capacity: sited.base.power_to_pu(cable.capacity_mw),
        });
    };
    for (_, row) in &rows {
        for pair in row.windows(2) {
            push_edge(pair[0].id, pair[1].id, &sited);
        }
        push_edge(row[width - 1].id, sub_id, &sited);
    }

    let mut adjacency = vec![Vec::new(); sited.nodes.len()];
    for edge in &edges {
        adjacency[edge.endpoints.0].push(edge.id);
        adjacency[edge.endpoints.1].push(edge.id);
    }
    let mut graph = CandidateGraph {
        instance: sited,
        edges,
        adjacency,
        crossings: Vec::new(),
    };
    graph.crossings = find_crossings(&graph);

    let chosen: Vec<usize> = (0..graph.edges.len()).collect();
    let plan = orient_forest(&graph, &chosen, config)?;
    Ok((graph, plan))
}

/// Cheapest spanning forest by cable cost alone, rooted at substations;
/// capacities and losses are ignored, feasibility is checked afterwards.
pub fn mst_baseline(graph: &CandidateGraph, config: &PlanningConfig) -> Result<Plan> {
    let nodes = &graph.instance.nodes;
    let mut order: Vec<usize> = (0..graph.edges.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&graph.edges[a], &graph.edges[b]);
        ea.cost
            .partial_cmp(&eb.cost)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    let mut has_sub: Vec<bool> = nodes.iter().map(|n| n.kind == NodeKind::Substation).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let needed = graph.instance.turbine_count();
    let mut chosen = Vec::with_capacity(needed);
    for edge_id in order {
        if chosen.len() == needed {
            break;
        }
        let (i, j) = graph.edges[edge_id].endpoints;
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj || (has_sub[ri] && has_sub[rj]) {
            continue;
        }
        parent[ri] = rj;
        has_sub[rj] = has_sub[rj] || has_sub[ri];
        chosen.push(edge_id);
    }
    if chosen.len() != needed {
        return Err(Error::Structure(
            "candidate graph cannot span all turbines from the substations".to_string(),
        ));
    }
    orient_forest(graph, &chosen, config)
}
