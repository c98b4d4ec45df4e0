//! Substation siting by fuzzy c-means clustering of turbine positions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::{Node, NodeKind, PlanningConfig, Point, WindFarmInstance};

/// Converged clustering state. `membership` is point-major: one row per
/// point, one weight per cluster, rows summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmResult {
    pub centers: Vec<Point>,
    pub membership: Vec<Vec<f64>>,
    pub iterations: usize,
    /// final weighted within-cluster dispersion
    pub objective: f64,
    /// dispersion after each iteration, non-increasing
    pub objective_trace: Vec<f64>,
}

/// Standard fuzzy c-means fixed point with deterministic k-means++-style
/// seeding. A point coincident with a center gets full membership there.
pub fn fcm_cluster(
    points: &[Point],
    c: usize,
    m: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<FcmResult> {
    fcm_cluster_weighted(points, None, c, m, tol, max_iter, seed)
}

/// As `fcm_cluster` but with optional per-point weights on the center
/// update (used for capacity-weighted siting).
pub fn fcm_cluster_weighted(
    points: &[Point],
    weights: Option<&[f64]>,
    c: usize,
    m: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<FcmResult> {
    if c < 1 {
        return Err(Error::invalid("cluster count must be at least 1".to_string()));
    }
    if c > points.len() {
        return Err(Error::invalid(format!(
            "cannot form {c} clusters from {} points",
            points.len()
        )));
    }
    if !(m > 1.0) {
        return Err(Error::invalid(format!("fuzzifier must exceed 1, got {m}")));
    }
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(Error::invalid("one weight per point required".to_string()));
        }
    }

    let exponent = 2.0 / (m - 1.0);
    let mut centers = seed_centers(points, c, seed);
    let mut membership = vec![vec![0.0; c]; points.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        update_membership(points, &centers, exponent, &mut membership);
        trace.push(dispersion(points, &centers, &membership, m));

        let next = update_centers(points, weights, &membership, m, &centers);
        let shift = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| a.dist(b))
            .fold(0.0, f64::max);
        centers = next;
        if shift < tol {
            break;
        }
    }
    // Memberships and objective for the final centers.
    update_membership(points, &centers, exponent, &mut membership);
    let objective = dispersion(points, &centers, &membership, m);
    trace.push(objective);

    Ok(FcmResult {
        centers,
        membership,
        iterations,
        objective,
        objective_trace: trace,
    })
}

fn seed_centers(points: &[Point], c: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = Vec::with_capacity(c);
    centers.push(points[rng.gen_range(0..points.len())]);
    while centers.len() < c {
        // k-means++: sample proportionally to squared distance from the
        // nearest already-chosen center.
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|ctr| {
                        let d = p.dist(ctr);
                        d * d
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            // All points coincide with chosen centers; reuse the first point.
            centers.push(points[0]);
            continue;
        }
        let mut target = rng.gen::<f64>() * total;
        let mut pick = points.len() - 1;
        for (i, w) in d2.iter().enumerate() {
            target -= w;
            if target <= 0.0 {
                pick = i;
                break;
            }
        }
        centers.push(points[pick]);
    }
    centers
}

fn update_membership(points: &[Point], centers: &[Point], exponent: f64, out: &mut [Vec<f64>]) {
    for (k, p) in points.iter().enumerate() {
        let dists: Vec<f64> = centers.iter().map(|ctr| p.dist(ctr)).collect();
        let row = &mut out[k];
        if let Some(hit) = dists.iter().position(|&d| d == 0.0) {
            for (i, u) in row.iter_mut().enumerate() {
                *u = if i == hit { 1.0 } else { 0.0 };
            }
            continue;
        }
        for i in 0..centers.len() {
            let denom: f64 = dists.iter().map(|&d| (dists[i] / d).powf(exponent)).sum();
            row[i] = 1.0 / denom;
        }
    }
}

fn update_centers(
    points: &[Point],
    weights: Option<&[f64]>,
    membership: &[Vec<f64>],
    m: f64,
    previous: &[Point],
) -> Vec<Point> {
    let c = previous.len();
    let mut num = vec![(0.0, 0.0); c];
    let mut den = vec![0.0; c];
    for (k, p) in points.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[k]);
        for i in 0..c {
            let u = w * membership[k][i].powf(m);
            num[i].0 += u * p.x;
            num[i].1 += u * p.y;
            den[i] += u;
        }
    }
    (0..c)
        .map(|i| {
            if den[i] > 0.0 {
                Point::new(num[i].0 / den[i], num[i].1 / den[i])
            } else {
                previous[i]
            }
        })
        .collect()
}

fn dispersion(points: &[Point], centers: &[Point], membership: &[Vec<f64>], m: f64) -> f64 {
    let mut j = 0.0;
    for (k, p) in points.iter().enumerate() {
        for (i, ctr) in centers.iter().enumerate() {
            let d = p.dist(ctr);
            j += membership[k][i].powf(m) * d * d;
        }
    }
    j
}

/// Two positions closer than this are treated as the same site.
const COINCIDENCE_TOL_KM: f64 = 1e-6;
/// Eastward shift applied when a cluster center lands on a turbine.
const DISPLACEMENT_KM: f64 = 1e-3;

/// Appends `c` substations at fuzzy c-means centers of the turbine
/// positions. A center landing on a turbine is nudged east so no two nodes
/// share a site.
pub fn place_substations(
    instance: &WindFarmInstance,
    c: usize,
    config: &PlanningConfig,
) -> Result<WindFarmInstance> {
    if instance.substation_count() != 0 {
        return Err(Error::invalid(
            "instance already contains substations".to_string(),
        ));
    }
    let points: Vec<Point> = instance.turbines().map(|n| n.coord).collect();
    let weights: Option<Vec<f64>> = config
        .capacity_weighted_siting
        .then(|| instance.turbines().map(|n| n.gen_mw).collect());
    let result = fcm_cluster_weighted(
        &points,
        weights.as_deref(),
        c,
        2.0,
        1e-6,
        300,
        config.solver.seed,
    )?;

    let mut out = instance.clone();
    for center in result.centers {
        let mut coord = center;
        if points
            .iter()
            .any(|p| p.dist(&coord) < COINCIDENCE_TOL_KM)
        {
            coord.x += DISPLACEMENT_KM;
        }
        out.nodes.push(Node {
            id: out.nodes.len(),
            kind: NodeKind::Substation,
            coord,
            gen_mw: 0.0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farm::generate_grid;
    use approx::assert_relative_eq;

    fn table_grid_points() -> Vec<Point> {
        generate_grid(7, 9, 1.0, 1.3, 8.0)
            .unwrap()
            .nodes
            .iter()
            .map(|n| n.coord)
            .collect()
    }

    #[test]
    fn single_cluster_is_the_centroid() {
        let points = table_grid_points();
        let result = fcm_cluster(&points, 1, 2.0, 1e-9, 300, 7).unwrap();
        assert_relative_eq!(result.centers[0].x, 5.2, epsilon = 1e-6);
        assert_relative_eq!(result.centers[0].y, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn unit_square_centroid() {
        let points = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        ];
        let result = fcm_cluster(&points, 1, 2.0, 1e-12, 300, 3).unwrap();
        assert_relative_eq!(result.centers[0].x, 0.5, epsilon = 1e-9);
        assert_relative_eq!(result.centers[0].y, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn two_clusters_mirror_the_grid_symmetry() {
        // Converged centers of the symmetric grid must map onto each other
        // under reflection about x = 5.2.
        let points = table_grid_points();
        for seed in [0, 1, 7] {
            let result = fcm_cluster(&points, 2, 2.0, 1e-10, 500, seed).unwrap();
            let [a, b] = [result.centers[0], result.centers[1]];
            let mirrored = Point::new(10.4 - b.x, b.y);
            assert_relative_eq!(a.x, mirrored.x, epsilon = 1e-5);
            assert_relative_eq!(a.y, mirrored.y, epsilon = 1e-5);
        }
    }

    #[test]
    fn membership_rows_sum_to_one() {
        let points = table_grid_points();
        let result = fcm_cluster(&points, 3, 2.0, 1e-8, 300, 11).unwrap();
        for row in &result.membership {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "row sums to {sum}");
        }
    }

    #[test]
    fn coincident_point_gets_full_membership() {
        let points = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        let result = fcm_cluster(&points, 2, 2.0, 1e-9, 300, 0).unwrap();
        // After convergence each center sits on one of the two points.
        for row in &result.membership {
            assert!(row.iter().any(|&u| (u - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn objective_trace_never_increases() {
        let points = table_grid_points();
        for c in [1, 2, 4] {
            let result = fcm_cluster(&points, c, 2.0, 1e-10, 300, 5).unwrap();
            for pair in result.objective_trace.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "objective rose from {} to {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let points = table_grid_points();
        let a = fcm_cluster(&points, 2, 2.0, 1e-8, 300, 42).unwrap();
        let b = fcm_cluster(&points, 2, 2.0, 1e-8, 300, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn translation_moves_centers_not_memberships() {
        let points = table_grid_points();
        let shifted: Vec<Point> = points
            .iter()
            .map(|p| Point::new(p.x + 13.5, p.y - 4.25))
            .collect();
        let a = fcm_cluster(&points, 2, 2.0, 1e-9, 300, 9).unwrap();
        let b = fcm_cluster(&shifted, 2, 2.0, 1e-9, 300, 9).unwrap();
        for (ca, cb) in a.centers.iter().zip(&b.centers) {
            assert_relative_eq!(ca.x + 13.5, cb.x, epsilon = 1e-9);
            assert_relative_eq!(ca.y - 4.25, cb.y, epsilon = 1e-9);
        }
        for (ra, rb) in a.membership.iter().zip(&b.membership) {
            for (ua, ub) in ra.iter().zip(rb) {
                assert_relative_eq!(ua, ub, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn cluster_count_must_fit() {
        let points = vec![Point::new(0.0, 0.0)];
        assert!(fcm_cluster(&points, 2, 2.0, 1e-9, 10, 0).is_err());
        assert!(fcm_cluster(&points, 1, 1.0, 1e-9, 10, 0).is_err());
    }

    #[test]
    fn substation_lands_displaced_from_center_turbine() {
        // The grid centroid coincides with the middle turbine, so the
        // substation is nudged 1 m east.
        let farm = generate_grid(7, 9, 1.0, 1.3, 8.0).unwrap();
        let sited = place_substations(&farm, 1, &PlanningConfig::default()).unwrap();
        assert_eq!(sited.nodes.len(), 64);
        let sub = &sited.nodes[63];
        assert_eq!(sub.kind, NodeKind::Substation);
        assert_relative_eq!(sub.coord.x, 5.201, epsilon = 1e-4);
        assert_relative_eq!(sub.coord.y, 3.0, epsilon = 1e-4);
        assert!(crate::farm::validate_instance(&sited).is_empty());
    }

    #[test]
    fn substation_off_turbine_is_kept_verbatim() {
        // 2x3 grid centroid (1.3, 0.5) is not a turbine site.
        let farm = generate_grid(2, 3, 1.0, 1.3, 8.0).unwrap();
        let sited = place_substations(&farm, 1, &PlanningConfig::default()).unwrap();
        let sub = &sited.nodes[6];
        assert_relative_eq!(sub.coord.x, 1.3, epsilon = 1e-6);
        assert_relative_eq!(sub.coord.y, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn four_turbine_cell_center() {
        let farm = generate_grid(2, 2, 1.0, 1.3, 8.0).unwrap();
        let sited = place_substations(&farm, 1, &PlanningConfig::default()).unwrap();
        let sub = &sited.nodes[4];
        assert_relative_eq!(sub.coord.x, 0.65, epsilon = 1e-6);
        assert_relative_eq!(sub.coord.y, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn siting_requires_no_existing_substation() {
        let farm = generate_grid(2, 2, 1.0, 1.0, 8.0).unwrap();
        let sited = place_substations(&farm, 1, &PlanningConfig::default()).unwrap();
        assert!(place_substations(&sited, 1, &PlanningConfig::default()).is_err());
    }
}
