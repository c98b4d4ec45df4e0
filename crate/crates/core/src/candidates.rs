//! Candidate-cable enumeration within a maximum range, plus crossing
//! detection between candidates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::{NodeKind, PlanningConfig, WindFarmInstance};
use crate::geometry::segments_cross;

/// Range comparisons get a small slack so exact-distance candidates (a grid
/// spacing equal to the range) are kept.
const RANGE_EPS: f64 = 1e-9;

/// One buildable cable option between two nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCable {
    pub id: usize,
    /// node ids, smaller first
    pub endpoints: (usize, usize),
    /// km
    pub length: f64,
    /// index into the configured cable types
    pub type_index: usize,
    /// million yen
    pub cost: f64,
    /// p.u.
    pub resistance: f64,
    /// p.u. power
    pub capacity: f64,
}

/// Range-filtered candidates with per-node incidence and crossing pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGraph {
    pub instance: WindFarmInstance,
    pub edges: Vec<CandidateCable>,
    /// node id -> incident edge ids
    pub adjacency: Vec<Vec<usize>>,
    /// unordered candidate pairs that geometrically cross, smaller id first
    pub crossings: Vec<(usize, usize)>,
}

impl CandidateGraph {
    pub fn segment(&self, edge: &CandidateCable) -> (crate::farm::Point, crate::farm::Point) {
        (
            self.instance.nodes[edge.endpoints.0].coord,
            self.instance.nodes[edge.endpoints.1].coord,
        )
    }
}

/// Lists one candidate per cable type for every node pair within range.
/// Substation-incident pairs from `config.substation_links` are injected
/// regardless of range. Substation-substation pairs are never candidates.
pub fn enumerate_candidates(
    instance: &WindFarmInstance,
    config: &PlanningConfig,
) -> Result<CandidateGraph> {
    config.validate()?;
    let n = instance.nodes.len();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let a = &instance.nodes[i];
            let b = &instance.nodes[j];
            if a.kind == NodeKind::Substation && b.kind == NodeKind::Substation {
                continue;
            }
            if a.coord.dist(&b.coord) <= config.max_range_km + RANGE_EPS {
                pairs.push((i, j));
            }
        }
    }
    for &(a, b) in &config.substation_links {
        if a >= n || b >= n || a == b {
            return Err(Error::invalid(format!(
                "substation link ({a}, {b}) references unknown nodes"
            )));
        }
        let pair = (a.min(b), a.max(b));
        let kinds = (
            instance.nodes[pair.0].kind,
            instance.nodes[pair.1].kind,
        );
        if kinds.0 != NodeKind::Substation && kinds.1 != NodeKind::Substation {
            return Err(Error::invalid(format!(
                "substation link ({a}, {b}) touches no substation"
            )));
        }
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    pairs.sort_unstable();

    let mut edges = Vec::with_capacity(pairs.len() * config.cable_types.len());
    for (i, j) in pairs {
        let length = instance.nodes[i].coord.dist(&instance.nodes[j].coord);
        for (type_index, cable) in config.cable_types.iter().enumerate() {
            edges.push(CandidateCable {
                id: edges.len(),
                endpoints: (i, j),
                length,
                type_index,
                cost: cable.cost_per_km * length,
                resistance: instance
                    .base
                    .resistance_to_pu(cable.resistance_ohm_per_km, length),
                capacity: instance.base.power_to_pu(cable.capacity_mw),
            });
        }
    }

    let mut adjacency = vec![Vec::new(); n];
    for edge in &edges {
        adjacency[edge.endpoints.0].push(edge.id);
        adjacency[edge.endpoints.1].push(edge.id);
    }
    for node in instance.turbines() {
        if adjacency[node.id].is_empty() {
            return Err(Error::IsolatedNode { node: node.id });
        }
    }

    let mut graph = CandidateGraph {
        instance: instance.clone(),
        edges,
        adjacency,
        crossings: Vec::new(),
    };
    graph.crossings = find_crossings(&graph);
    Ok(graph)
}

/// All unordered candidate pairs that cross geometrically, excluding pairs
/// sharing a node. Output is canonical: smaller id first, sorted.
pub fn find_crossings(graph: &CandidateGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (ai, a) in graph.edges.iter().enumerate() {
        for b in &graph.edges[ai + 1..] {
            let (ai0, ai1) = a.endpoints;
            let (bi0, bi1) = b.endpoints;
            if ai0 == bi0 || ai0 == bi1 || ai1 == bi0 || ai1 == bi1 {
                continue;
            }
            if segments_cross(graph.segment(a), graph.segment(b)) {
                out.push((a.id, b.id));
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farm::{generate_grid, Node, Point};
    use crate::siting::place_substations;

    fn grid_with_center_sub(rows: usize, cols: usize, spacing: f64) -> WindFarmInstance {
        let farm = generate_grid(rows, cols, spacing, spacing, 8.0).unwrap();
        place_substations(&farm, 1, &PlanningConfig::default()).unwrap()
    }

    fn config_with_range(range: f64) -> PlanningConfig {
        PlanningConfig {
            max_range_km: range,
            ..PlanningConfig::default()
        }
    }

    /// Independent O(n^2) pair enumeration used as the oracle for counts.
    fn brute_force_pairs(instance: &WindFarmInstance, range: f64) -> usize {
        let mut count = 0;
        for a in &instance.nodes {
            for b in &instance.nodes {
                if a.id < b.id
                    && !(a.kind == NodeKind::Substation && b.kind == NodeKind::Substation)
                {
                    let d2 = (a.coord.x - b.coord.x).powi(2) + (a.coord.y - b.coord.y).powi(2);
                    if d2.sqrt() <= range + 1e-9 {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn three_by_three_orthogonal_adjacency() {
        let farm = generate_grid(3, 3, 1.0, 1.0, 8.0).unwrap();
        let graph = enumerate_candidates(&farm, &config_with_range(1.05)).unwrap();
        assert_eq!(graph.edges.len(), 12);
        assert_eq!(graph.edges.len(), brute_force_pairs(&farm, 1.05));
        assert!(graph.crossings.is_empty());
    }

    #[test]
    fn three_by_three_with_diagonals() {
        let farm = generate_grid(3, 3, 1.0, 1.0, 8.0).unwrap();
        let graph = enumerate_candidates(&farm, &config_with_range(1.5)).unwrap();
        assert_eq!(graph.edges.len(), 20);
        assert_eq!(graph.edges.len(), brute_force_pairs(&farm, 1.5));
    }

    #[test]
    fn isolated_turbine_is_reported() {
        let mut farm = generate_grid(1, 1, 1.0, 1.0, 8.0).unwrap();
        farm.nodes.push(Node {
            id: 1,
            kind: NodeKind::Substation,
            coord: Point::new(5.0, 0.0),
            gen_mw: 0.0,
        });
        let err = enumerate_candidates(&farm, &config_with_range(1.0)).unwrap_err();
        assert!(matches!(err, Error::IsolatedNode { node: 0 }));
    }

    #[test]
    fn exact_range_boundary_is_inclusive() {
        let farm = generate_grid(3, 1, 1.0, 1.0, 8.0).unwrap();
        let graph = enumerate_candidates(&farm, &config_with_range(2.0)).unwrap();
        // 0-1, 1-2 at 1.0 and 0-2 at exactly 2.0
        assert_eq!(graph.edges.len(), 3);
    }

    #[test]
    fn parallel_types_duplicate_pairs() {
        let farm = generate_grid(1, 2, 1.0, 1.0, 8.0).unwrap();
        let mut config = config_with_range(1.5);
        config.cable_types.push(crate::farm::CableType {
            cost_per_km: 6.0,
            resistance_ohm_per_km: 0.012,
            capacity_mw: 120.0,
        });
        let graph = enumerate_candidates(&farm, &config).unwrap();
        assert_eq!(graph.edges.len(), 2);
        assert_eq!(graph.edges[0].endpoints, graph.edges[1].endpoints);
        assert_ne!(graph.edges[0].type_index, graph.edges[1].type_index);
        // Parallel candidates share both nodes, so they are not crossings.
        assert!(graph.crossings.is_empty());
    }

    #[test]
    fn substation_links_bypass_range() {
        let mut farm = generate_grid(1, 2, 1.0, 1.3, 8.0).unwrap();
        farm.nodes.push(Node {
            id: 2,
            kind: NodeKind::Substation,
            coord: Point::new(10.0, 0.0),
            gen_mw: 0.0,
        });
        let mut config = config_with_range(1.5);
        config.substation_links = vec![(2, 0)];
        let graph = enumerate_candidates(&farm, &config).unwrap();
        let has_link = graph.edges.iter().any(|e| e.endpoints == (0, 2));
        assert!(has_link, "injected substation candidate missing");
    }

    #[test]
    fn diagonal_pair_crossing_detected() {
        let farm = generate_grid(2, 2, 1.0, 1.0, 8.0).unwrap();
        let graph = enumerate_candidates(&farm, &config_with_range(1.5)).unwrap();
        // 4 orthogonal + 2 diagonals
        assert_eq!(graph.edges.len(), 6);
        let diagonals: Vec<usize> = graph
            .edges
            .iter()
            .filter(|e| e.length > 1.2)
            .map(|e| e.id)
            .collect();
        assert_eq!(graph.crossings.len(), 1);
        assert_eq!(
            graph.crossings[0],
            (diagonals[0].min(diagonals[1]), diagonals[0].max(diagonals[1]))
        );
    }

    #[test]
    fn lengths_match_euclidean_distance() {
        let farm = grid_with_center_sub(3, 3, 1.0);
        let graph = enumerate_candidates(&farm, &config_with_range(1.5)).unwrap();
        for edge in &graph.edges {
            let (a, b) = graph.segment(edge);
            assert!((edge.length - a.dist(&b)).abs() < 1e-9);
            assert!(edge.cost > 0.0 && edge.resistance > 0.0 && edge.capacity > 0.0);
        }
    }

    #[test]
    fn enumeration_is_range_monotone() {
        let farm = grid_with_center_sub(3, 4, 1.0);
        let mut previous: Vec<(usize, usize, usize)> = Vec::new();
        for range in [1.05, 1.5, 2.05, 3.0] {
            let graph = enumerate_candidates(&farm, &config_with_range(range)).unwrap();
            let pairs: Vec<(usize, usize, usize)> = graph
                .edges
                .iter()
                .map(|e| (e.endpoints.0, e.endpoints.1, e.type_index))
                .collect();
            for p in &previous {
                assert!(pairs.contains(p), "candidate {p:?} lost when range grew");
            }
            previous = pairs;
        }
    }

    #[test]
    fn full_case_crossings_include_every_diagonal_x() {
        // On the published grid every unit cell within diagonal range forms
        // an X of two crossing diagonals; check them all against the oracle.
        let farm = grid_with_center_sub(7, 9, 1.0); // coarse spacing stand-in
        let graph = enumerate_candidates(&farm, &config_with_range(1.5)).unwrap();
        let mut expected = Vec::new();
        for (ai, a) in graph.edges.iter().enumerate() {
            for b in &graph.edges[ai + 1..] {
                let (a0, a1) = a.endpoints;
                let (b0, b1) = b.endpoints;
                if a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1 {
                    continue;
                }
                if naive_intersects(graph.segment(a), graph.segment(b)) {
                    expected.push((a.id, b.id));
                }
            }
        }
        expected.sort_unstable();
        assert_eq!(graph.crossings, expected);
        assert!(!graph.crossings.is_empty());
    }

    /// Parametric-form oracle, entirely separate from the orientation code.
    fn naive_intersects(a: (Point, Point), b: (Point, Point)) -> bool {
        let (p, q) = a;
        let (r, s) = b;
        let d = (q.x - p.x) * (s.y - r.y) - (q.y - p.y) * (s.x - r.x);
        if d.abs() > 1e-12 {
            let t = ((r.x - p.x) * (s.y - r.y) - (r.y - p.y) * (s.x - r.x)) / d;
            let u = ((r.x - p.x) * (q.y - p.y) - (r.y - p.y) * (q.x - p.x)) / d;
            let eps = 1e-9;
            return t > eps && t < 1.0 - eps && u > eps && u < 1.0 - eps;
        }
        // Parallel: require collinearity and open overlap.
        let cross = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        if cross.abs() > 1e-9 {
            return false;
        }
        let axis = |pt: Point| {
            if (q.x - p.x).abs() >= (q.y - p.y).abs() {
                pt.x
            } else {
                pt.y
            }
        };
        let (alo, ahi) = (axis(p).min(axis(q)), axis(p).max(axis(q)));
        let (blo, bhi) = (axis(r).min(axis(s)), axis(r).max(axis(s)));
        alo.max(blo) + 1e-9 < ahi.min(bhi)
    }
}
