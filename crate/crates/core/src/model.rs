//! Assembles the planning MILP: investment binaries gated flows, linearized
//! losses via tangent cuts, big-M voltage-drop coupling, and spanning-tree
//! radiality over parent-child binaries.

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateGraph;
use crate::error::{Error, Result};
use crate::farm::{CostModel, NodeKind, PlanningConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integral: bool,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    /// sparse (column index, coefficient)
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Abstract minimization program with integrality marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl MilpModel {
    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            for &(col, _) in &row.coeffs {
                if col >= self.columns.len() {
                    return Err(Error::invalid(format!(
                        "row {} references missing column {col}",
                        row.name
                    )));
                }
            }
        }
        for col in &self.columns {
            if col.integral && (col.lower, col.upper) != (0.0, 1.0) {
                return Err(Error::invalid(format!(
                    "binary column {} must have bounds [0,1], got [{}, {}]",
                    col.name, col.lower, col.upper
                )));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.columns
            .iter()
            .zip(values)
            .map(|(c, v)| c.objective * v)
            .sum()
    }

    pub fn row_activity(&self, row: &Row, values: &[f64]) -> f64 {
        row.coeffs.iter().map(|&(c, a)| a * values[c]).sum()
    }

    /// Largest bound/row violation of a full assignment; zero means feasible.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (col, &v) in self.columns.iter().zip(values) {
            worst = worst.max(col.lower - v).max(v - col.upper);
        }
        for row in &self.rows {
            let a = self.row_activity(row, values);
            let violation = match row.sense {
                RowSense::Le => a - row.rhs,
                RowSense::Ge => row.rhs - a,
                RowSense::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(violation);
        }
        worst
    }
}

/// Column indices for every model variable, edge- and node-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarMap {
    /// investment binary per candidate
    pub x: Vec<usize>,
    /// smaller endpoint parents the larger one
    pub beta_fwd: Vec<usize>,
    /// larger endpoint parents the smaller one
    pub beta_rev: Vec<usize>,
    /// signed flow, positive from smaller to larger endpoint
    pub flow: Vec<usize>,
    pub flow_pos: Vec<usize>,
    pub flow_neg: Vec<usize>,
    /// loss epigraph per candidate
    pub loss: Vec<usize>,
    /// per node
    pub voltage: Vec<usize>,
    /// per node, None for substations
    pub curtail: Vec<Option<usize>>,
}

/// Sparse node x edge incidence: +1 at the smaller endpoint (flow leaves it
/// when the signed flow is positive), -1 at the larger one.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    pub nodes: usize,
    /// one column per edge: [(smaller, +1), (larger, -1)]
    pub columns: Vec<[(usize, f64); 2]>,
}

pub fn incidence_matrix(graph: &CandidateGraph) -> IncidenceMatrix {
    IncidenceMatrix {
        nodes: graph.instance.nodes.len(),
        columns: graph
            .edges
            .iter()
            .map(|e| [(e.endpoints.0, 1.0), (e.endpoints.1, -1.0)])
            .collect(),
    }
}

/// Tangent under-estimators of s^2 sampled at s_k = k*capacity/K:
/// slope 2*s_k, intercept -s_k^2. The envelope of all K+1 cuts tracks the
/// parabola from below with a worst gap of (capacity/K)^2 / 4.
pub fn pwl_loss_cuts(capacity: f64, segments: usize) -> Result<Vec<(f64, f64)>> {
    if !(capacity > 0.0) {
        return Err(Error::invalid(format!(
            "pwl capacity must be positive, got {capacity}"
        )));
    }
    if segments < 1 {
        return Err(Error::invalid("pwl segment count must be at least 1".to_string()));
    }
    Ok((0..=segments)
        .map(|k| {
            let s = k as f64 * capacity / segments as f64;
            (2.0 * s, -s * s)
        })
        .collect())
}

/// Value of the cut envelope at |f| = s.
pub fn pwl_envelope(cuts: &[(f64, f64)], s: f64) -> f64 {
    cuts.iter()
        .map(|&(slope, intercept)| slope * s + intercept)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn build_milp(
    graph: &CandidateGraph,
    config: &PlanningConfig,
    cost_model: &CostModel,
) -> Result<(MilpModel, VarMap)> {
    config.validate()?;
    let base = &graph.instance.base;
    cost_model.validate_curtail_penalty(base)?;
    if graph.edges.is_empty() {
        return Err(Error::invalid("candidate graph has no edges".to_string()));
    }

    let nodes = &graph.instance.nodes;
    let n_edges = graph.edges.len();
    let loss_weight = cost_model.loss_value_myen_per_pu(base);
    let curtail_weight = cost_model.curtail_penalty_myen_per_pu();

    let mut columns: Vec<Column> = Vec::new();
    let mut push = |name: String, lower: f64, upper: f64, integral: bool, objective: f64| {
        columns.push(Column {
            name,
            lower,
            upper,
            integral,
            objective,
        });
        columns.len() - 1
    };

    let mut map = VarMap {
        x: Vec::with_capacity(n_edges),
        beta_fwd: Vec::with_capacity(n_edges),
        beta_rev: Vec::with_capacity(n_edges),
        flow: Vec::with_capacity(n_edges),
        flow_pos: Vec::with_capacity(n_edges),
        flow_neg: Vec::with_capacity(n_edges),
        loss: Vec::with_capacity(n_edges),
        voltage: Vec::with_capacity(nodes.len()),
        curtail: Vec::with_capacity(nodes.len()),
    };

    for edge in &graph.edges {
        let e = edge.id;
        let cap = edge.capacity;
        map.x.push(push(format!("X{e}"), 0.0, 1.0, true, edge.cost));
        map.beta_fwd.push(push(format!("BP{e}"), 0.0, 1.0, true, 0.0));
        map.beta_rev.push(push(format!("BQ{e}"), 0.0, 1.0, true, 0.0));
        map.flow.push(push(format!("F{e}"), -cap, cap, false, 0.0));
        map.flow_pos.push(push(format!("FP{e}"), 0.0, cap, false, 0.0));
        map.flow_neg.push(push(format!("FM{e}"), 0.0, cap, false, 0.0));
        map.loss.push(push(
            format!("LL{e}"),
            0.0,
            cap * cap,
            false,
            loss_weight * edge.resistance,
        ));
    }
    for node in nodes.iter() {
        let idx = match node.kind {
            NodeKind::WindTurbine => push(format!("V{}", node.id), config.v_lo, config.v_hi, false, 0.0),
            NodeKind::Substation => push(format!("V{}", node.id), config.v_ref, config.v_ref, false, 0.0),
        };
        map.voltage.push(idx);
    }
    for node in nodes.iter() {
        map.curtail.push(match node.kind {
            NodeKind::WindTurbine => Some(push(
                format!("GC{}", node.id),
                0.0,
                base.power_to_pu(node.gen_mw),
                false,
                curtail_weight,
            )),
            NodeKind::Substation => None,
        });
    }

    let mut rows: Vec<Row> = Vec::new();

    // f = f+ - f-
    for e in 0..n_edges {
        rows.push(Row {
            name: format!("SPL{e}"),
            coeffs: vec![(map.flow[e], 1.0), (map.flow_pos[e], -1.0), (map.flow_neg[e], 1.0)],
            sense: RowSense::Eq,
            rhs: 0.0,
        });
    }
    // capacity gating by the investment binary
    for (e, edge) in graph.edges.iter().enumerate() {
        rows.push(Row {
            name: format!("GP{e}"),
            coeffs: vec![(map.flow_pos[e], 1.0), (map.x[e], -edge.capacity)],
            sense: RowSense::Le,
            rhs: 0.0,
        });
        rows.push(Row {
            name: format!("GM{e}"),
            coeffs: vec![(map.flow_neg[e], 1.0), (map.x[e], -edge.capacity)],
            sense: RowSense::Le,
            rhs: 0.0,
        });
    }
    // big-M voltage drop, active only on built cables
    for (e, edge) in graph.edges.iter().enumerate() {
        let (i, j) = edge.endpoints;
        let big_m = edge.capacity * edge.resistance + (config.v_hi - config.v_lo);
        rows.push(Row {
            name: format!("KVU{e}"),
            coeffs: vec![
                (map.flow[e], edge.resistance),
                (map.voltage[i], -1.0),
                (map.voltage[j], 1.0),
                (map.x[e], big_m),
            ],
            sense: RowSense::Le,
            rhs: big_m,
        });
        rows.push(Row {
            name: format!("KVD{e}"),
            coeffs: vec![
                (map.flow[e], edge.resistance),
                (map.voltage[i], -1.0),
                (map.voltage[j], 1.0),
                (map.x[e], -big_m),
            ],
            sense: RowSense::Ge,
            rhs: -big_m,
        });
    }
    // tangent cuts under the quadratic loss
    for (e, edge) in graph.edges.iter().enumerate() {
        let cuts = pwl_loss_cuts(edge.capacity, config.pwl_segments)?;
        for (k, (slope, intercept)) in cuts.into_iter().enumerate() {
            rows.push(Row {
                name: format!("PW{e}_{k}"),
                coeffs: vec![
                    (map.loss[e], 1.0),
                    (map.flow_pos[e], -slope),
                    (map.flow_neg[e], -slope),
                ],
                sense: RowSense::Ge,
                rhs: intercept,
            });
        }
    }
    // nodal balance at turbines; substations absorb freely
    let incidence = incidence_matrix(graph);
    for node in nodes.iter().filter(|n| n.kind == NodeKind::WindTurbine) {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for &edge_id in &graph.adjacency[node.id] {
            let sign = incidence.columns[edge_id]
                .iter()
                .find(|&&(n, _)| n == node.id)
                .map(|&(_, s)| s)
                .expect("adjacency and incidence agree");
            coeffs.push((map.flow[edge_id], sign));
        }
        coeffs.push((map.curtail[node.id].expect("turbine has curtail column"), 1.0));
        rows.push(Row {
            name: format!("KCL{}", node.id),
            coeffs,
            sense: RowSense::Eq,
            rhs: base.power_to_pu(node.gen_mw),
        });
    }
    // cable count fixes the forest size
    let turbine_count = graph.instance.turbine_count();
    rows.push(Row {
        name: "CNT".to_string(),
        coeffs: (0..n_edges).map(|e| (map.x[e], 1.0)).collect(),
        sense: RowSense::Eq,
        rhs: turbine_count as f64,
    });
    // a built cable has exactly one orientation
    for e in 0..n_edges {
        rows.push(Row {
            name: format!("BL{e}"),
            coeffs: vec![(map.beta_fwd[e], 1.0), (map.beta_rev[e], 1.0), (map.x[e], -1.0)],
            sense: RowSense::Eq,
            rhs: 0.0,
        });
    }
    // every turbine has exactly one parent
    for node in nodes.iter().filter(|n| n.kind == NodeKind::WindTurbine) {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for &edge_id in &graph.adjacency[node.id] {
            let edge = &graph.edges[edge_id];
            // the beta that makes this node the child
            let col = if edge.endpoints.1 == node.id {
                map.beta_fwd[edge_id]
            } else {
                map.beta_rev[edge_id]
            };
            coeffs.push((col, 1.0));
        }
        rows.push(Row {
            name: format!("PRT{}", node.id),
            coeffs,
            sense: RowSense::Eq,
            rhs: 1.0,
        });
    }
    // substations are never children
    for (e, edge) in graph.edges.iter().enumerate() {
        let (i, j) = edge.endpoints;
        if nodes[j].kind == NodeKind::Substation {
            rows.push(Row {
                name: format!("SBC{e}"),
                coeffs: vec![(map.beta_fwd[e], 1.0)],
                sense: RowSense::Eq,
                rhs: 0.0,
            });
        } else if nodes[i].kind == NodeKind::Substation {
            rows.push(Row {
                name: format!("SBC{e}"),
                coeffs: vec![(map.beta_rev[e], 1.0)],
                sense: RowSense::Eq,
                rhs: 0.0,
            });
        }
    }
    // crossing exclusion
    if config.forbid_crossings {
        for (c, &(a, b)) in graph.crossings.iter().enumerate() {
            rows.push(Row {
                name: format!("XNG{c}"),
                coeffs: vec![(map.x[a], 1.0), (map.x[b], 1.0)],
                sense: RowSense::Le,
                rhs: 1.0,
            });
        }
    }
    // at most one type per node pair
    let mut by_pair: Vec<((usize, usize), Vec<usize>)> = Vec::new();
    for edge in &graph.edges {
        match by_pair.iter_mut().find(|(p, _)| *p == edge.endpoints) {
            Some((_, ids)) => ids.push(edge.id),
            None => by_pair.push((edge.endpoints, vec![edge.id])),
        }
    }
    for (p, (pair, ids)) in by_pair.iter().filter(|(_, ids)| ids.len() > 1).enumerate() {
        let _ = pair;
        rows.push(Row {
            name: format!("PAR{p}"),
            coeffs: ids.iter().map(|&e| (map.x[e], 1.0)).collect(),
            sense: RowSense::Le,
            rhs: 1.0,
        });
    }

    let model = MilpModel {
        name: "owf-ecs".to_string(),
        columns,
        rows,
    };
    model.validate()?;
    Ok((model, map))
}
