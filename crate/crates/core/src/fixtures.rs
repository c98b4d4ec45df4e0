//! Small ready-made instances used by the test suite and the demo.

use crate::candidates::{enumerate_candidates, CandidateGraph};
use crate::farm::{generate_grid, Node, NodeKind, PlanningConfig, Point, WindFarmInstance};
use crate::siting::place_substations;

/// One 8 MW turbine 1.3 km from its substation, a single candidate cable.
pub fn one_edge() -> (CandidateGraph, PlanningConfig) {
    let mut farm = generate_grid(1, 1, 1.0, 1.0, 8.0).unwrap();
    farm.nodes.push(Node {
        id: 1,
        kind: NodeKind::Substation,
        coord: Point::new(1.3, 0.0),
        gen_mw: 0.0,
    });
    let config = PlanningConfig {
        max_range_km: 1.5,
        ..PlanningConfig::default()
    };
    let graph = enumerate_candidates(&farm, &config).unwrap();
    (graph, config)
}

/// `n` turbines strung east of a substation at 1 km spacing; candidates
/// join adjacent nodes only, so the string is the unique forest.
pub fn string(n: usize) -> (CandidateGraph, PlanningConfig) {
    let mut farm = generate_grid(1, n, 1.0, 1.0, 8.0).unwrap();
    farm.nodes.push(Node {
        id: n,
        kind: NodeKind::Substation,
        coord: Point::new(-1.0, 0.0),
        gen_mw: 0.0,
    });
    let config = PlanningConfig {
        max_range_km: 1.05,
        ..PlanningConfig::default()
    };
    let graph = enumerate_candidates(&farm, &config).unwrap();
    (graph, config)
}

/// Substation and two turbines at the corners of a unit equilateral
/// triangle; all three cables are candidates with equal cost.
pub fn triangle() -> (CandidateGraph, PlanningConfig) {
    let farm = WindFarmInstance {
        nodes: vec![
            Node {
                id: 0,
                kind: NodeKind::WindTurbine,
                coord: Point::new(1.0, 0.0),
                gen_mw: 8.0,
            },
            Node {
                id: 1,
                kind: NodeKind::WindTurbine,
                coord: Point::new(0.5, 3f64.sqrt() / 2.0),
                gen_mw: 8.0,
            },
            Node {
                id: 2,
                kind: NodeKind::Substation,
                coord: Point::new(0.0, 0.0),
                gen_mw: 0.0,
            },
        ],
        base: Default::default(),
    };
    let config = PlanningConfig {
        max_range_km: 1.05,
        ..PlanningConfig::default()
    };
    let graph = enumerate_candidates(&farm, &config).unwrap();
    (graph, config)
}

/// 2x3 turbine grid with its clustering-sited substation; range 1.5 km
/// keeps 13 candidates, small enough for exhaustive enumeration.
pub fn grid_2x3() -> (CandidateGraph, PlanningConfig) {
    let farm = generate_grid(2, 3, 1.0, 1.3, 8.0).unwrap();
    let config = PlanningConfig {
        max_range_km: 1.5,
        ..PlanningConfig::default()
    };
    let sited = place_substations(&farm, 1, &config).unwrap();
    let graph = enumerate_candidates(&sited, &config).unwrap();
    (graph, config)
}

/// The published 63-turbine case: 7x9 grid, 1.0 km rows, 1.3 km columns.
pub fn published_grid() -> WindFarmInstance {
    generate_grid(7, 9, 1.0, 1.3, 8.0).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_shapes() {
        assert_eq!(one_edge().0.edges.len(), 1);
        assert_eq!(string(3).0.edges.len(), 3);
        assert_eq!(triangle().0.edges.len(), 3);
        let (g, _) = grid_2x3();
        assert_eq!(g.instance.nodes.len(), 7);
        assert_eq!(g.edges.len(), 13);
    }
}
