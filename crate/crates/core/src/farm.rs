//! Wind farm domain model: nodes, per-unit system, cost and planning
//! configuration shared by every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar position in kilometers on a local plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    WindTurbine,
    Substation,
}

/// A turbine or substation. `gen_mw` is rated active power, zero exactly
/// for substations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "NodeDoc", into = "NodeDoc")]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    pub coord: Point,
    pub gen_mw: f64,
}

/// Wire shape of a node in the instance document; field names are fixed.
#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    kind: NodeKind,
    x_km: f64,
    y_km: f64,
    gen_mw: f64,
}

impl From<NodeDoc> for Node {
    fn from(d: NodeDoc) -> Self {
        Node {
            id: d.id,
            kind: d.kind,
            coord: Point::new(d.x_km, d.y_km),
            gen_mw: d.gen_mw,
        }
    }
}

impl From<Node> for NodeDoc {
    fn from(n: Node) -> Self {
        NodeDoc {
            id: n.id,
            kind: n.kind,
            x_km: n.coord.x,
            y_km: n.coord.y,
            gen_mw: n.gen_mw,
        }
    }
}

/// Apparent-power and line-voltage bases for the per-unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerUnitBase {
    pub s_base_mva: f64,
    pub v_base_kv: f64,
}

impl Default for PerUnitBase {
    fn default() -> Self {
        // 66 kV collector cables, 100 MVA power base.
        PerUnitBase {
            s_base_mva: 100.0,
            v_base_kv: 66.0,
        }
    }
}

impl PerUnitBase {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_base_mva > 0.0) || !(self.v_base_kv > 0.0) {
            return Err(Error::invalid(format!(
                "per-unit bases must be strictly positive, got s_base={} MVA, v_base={} kV",
                self.s_base_mva, self.v_base_kv
            )));
        }
        Ok(())
    }

    pub fn power_to_pu(&self, mw: f64) -> f64 {
        mw / self.s_base_mva
    }

    pub fn power_from_pu(&self, pu: f64) -> f64 {
        pu * self.s_base_mva
    }

    /// Series resistance of a cable run in p.u.: ohm/km scaled by length and
    /// the impedance base v²/s.
    pub fn resistance_to_pu(&self, ohm_per_km: f64, length_km: f64) -> f64 {
        ohm_per_km * length_km * self.s_base_mva / (self.v_base_kv * self.v_base_kv)
    }

    pub fn resistance_from_pu(&self, pu: f64, length_km: f64) -> f64 {
        pu * (self.v_base_kv * self.v_base_kv) / (self.s_base_mva * length_km)
    }
}

/// A wind farm instance: all nodes plus the per-unit system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindFarmInstance {
    pub nodes: Vec<Node>,
    pub base: PerUnitBase,
}

impl WindFarmInstance {
    pub fn turbines(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::WindTurbine)
    }

    pub fn substations(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Substation)
    }

    pub fn turbine_count(&self) -> usize {
        self.turbines().count()
    }

    pub fn substation_count(&self) -> usize {
        self.substations().count()
    }

    pub fn total_generation_mw(&self) -> f64 {
        self.nodes.iter().map(|n| n.gen_mw).sum()
    }
}

/// One `{id, rule}` entry per broken instance invariant. Violations are
/// data, not errors: callers decide whether to abort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    IdOutOfOrder { index: usize, id: usize },
    DuplicateCoordinates { a: usize, b: usize },
    NegativeGeneration { id: usize },
    SubstationWithGeneration { id: usize, gen_mw: f64 },
    TurbineWithoutGeneration { id: usize },
    NoSubstation,
    NoTurbine,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::IdOutOfOrder { index, id } => {
                write!(f, "node at position {index} has id {id}; ids must be 0..n in order")
            }
            Violation::DuplicateCoordinates { a, b } => {
                write!(f, "nodes {a} and {b} share identical coordinates")
            }
            Violation::NegativeGeneration { id } => {
                write!(f, "node {id} has negative generation")
            }
            Violation::SubstationWithGeneration { id, gen_mw } => {
                write!(f, "substation {id} has nonzero generation {gen_mw} MW")
            }
            Violation::TurbineWithoutGeneration { id } => {
                write!(f, "turbine {id} has zero generation")
            }
            Violation::NoSubstation => write!(f, "instance has no substation"),
            Violation::NoTurbine => write!(f, "instance has no wind turbine"),
        }
    }
}

/// Checks every instance invariant and returns the broken ones.
pub fn validate_instance(instance: &WindFarmInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    for (index, node) in instance.nodes.iter().enumerate() {
        if node.id != index {
            out.push(Violation::IdOutOfOrder { index, id: node.id });
        }
        if node.gen_mw < 0.0 {
            out.push(Violation::NegativeGeneration { id: node.id });
        }
        match node.kind {
            NodeKind::Substation if node.gen_mw != 0.0 => {
                out.push(Violation::SubstationWithGeneration {
                    id: node.id,
                    gen_mw: node.gen_mw,
                });
            }
            NodeKind::WindTurbine if node.gen_mw == 0.0 => {
                out.push(Violation::TurbineWithoutGeneration { id: node.id });
            }
            _ => {}
        }
    }
    for (ai, a) in instance.nodes.iter().enumerate() {
        for b in &instance.nodes[ai + 1..] {
            if a.coord == b.coord {
                out.push(Violation::DuplicateCoordinates { a: a.id, b: b.id });
            }
        }
    }
    if instance.substation_count() == 0 {
        out.push(Violation::NoSubstation);
    }
    if instance.turbine_count() == 0 {
        out.push(Violation::NoTurbine);
    }
    out
}

/// Lays out `rows` x `cols` turbines on a rectangular grid, node 0 at the
/// origin, columns along +x. No substations are added; siting does that.
pub fn generate_grid(
    rows: usize,
    cols: usize,
    row_spacing_km: f64,
    col_spacing_km: f64,
    wt_power_mw: f64,
) -> Result<WindFarmInstance> {
    if rows < 1 || cols < 1 {
        return Err(Error::invalid(format!(
            "grid needs at least 1 row and 1 column, got {rows}x{cols}"
        )));
    }
    if !(row_spacing_km > 0.0) || !(col_spacing_km > 0.0) {
        return Err(Error::invalid(format!(
            "grid spacings must be positive, got row {row_spacing_km} km, col {col_spacing_km} km"
        )));
    }
    if !(wt_power_mw > 0.0) {
        return Err(Error::invalid(format!(
            "turbine power must be positive, got {wt_power_mw} MW"
        )));
    }
    let mut nodes = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            nodes.push(Node {
                id: nodes.len(),
                kind: NodeKind::WindTurbine,
                coord: Point::new(col as f64 * col_spacing_km, row as f64 * row_spacing_km),
                gen_mw: wt_power_mw,
            });
        }
    }
    Ok(WindFarmInstance {
        nodes,
        base: PerUnitBase::default(),
    })
}

/// One catalogue entry: construction cost, series resistance, thermal limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CableType {
    /// million yen per km
    pub cost_per_km: f64,
    pub resistance_ohm_per_km: f64,
    pub capacity_mw: f64,
}

impl Default for CableType {
    fn default() -> Self {
        // Cost calibrated from published investment/length ratios; resistance
        // calibrated so the conventional string layout loses ~0.26% of rated
        // output; 80 MW rating carries a string of nine 8 MW turbines.
        CableType {
            cost_per_km: 4.0,
            resistance_ohm_per_km: 0.024,
            capacity_mw: 80.0,
        }
    }
}

/// Economic constants of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// million yen per km, single-type default
    pub cable_cost_per_km: f64,
    /// yen per kWh
    pub energy_price: f64,
    /// lifetime equivalent full-load hours (planning years x yearly full-load hours)
    pub eta_hours: f64,
    /// objective weight for curtailed power, yen per p.u.
    pub curtail_penalty: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            cable_cost_per_km: 4.0,
            energy_price: 0.8513,
            eta_hours: 20.0 * 2500.0,
            curtail_penalty: 1e10,
        }
    }
}

impl CostModel {
    /// Objective weight (million yen) of one p.u. of sustained power loss.
    pub fn loss_value_myen_per_pu(&self, base: &PerUnitBase) -> f64 {
        // p.u. -> MW -> kWh over the lifetime -> yen -> million yen
        self.eta_hours * self.energy_price * base.s_base_mva * 1000.0 / 1e6
    }

    /// The curtailment weight, in million yen per p.u.
    pub fn curtail_penalty_myen_per_pu(&self) -> f64 {
        self.curtail_penalty / 1e6
    }

    pub fn validate(&self, base: &PerUnitBase) -> Result<()> {
        if !(self.cable_cost_per_km > 0.0)
            || !(self.energy_price > 0.0)
            || !(self.eta_hours > 0.0)
            || !(self.curtail_penalty > 0.0)
        {
            return Err(Error::invalid(
                "cost model fields must all be strictly positive".to_string(),
            ));
        }
        self.validate_curtail_penalty(base)
    }

    /// The penalty must exceed the lifetime value of delivering one p.u., so
    /// curtailing is never cheaper than any feasible delivery.
    pub fn validate_curtail_penalty(&self, base: &PerUnitBase) -> Result<()> {
        let floor = self.eta_hours * self.energy_price * base.s_base_mva * 1000.0;
        if !(self.curtail_penalty > floor) {
            return Err(Error::invalid(format!(
                "curtail_penalty {} must exceed eta_hours*energy_price*s_base*1000 = {}",
                self.curtail_penalty, floor
            )));
        }
        Ok(())
    }
}

/// Branch-and-bound controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub time_limit_s: f64,
    pub gap_tol: f64,
    pub max_nodes: u64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            time_limit_s: 900.0,
            gap_tol: 0.0,
            max_nodes: u64::MAX,
            workers: 1,
            seed: 0,
        }
    }
}

/// Everything the pipeline needs besides the instance itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanningConfig {
    pub max_range_km: f64,
    pub cable_types: Vec<CableType>,
    /// p.u. voltage window for turbines and the fixed substation reference
    pub v_lo: f64,
    pub v_hi: f64,
    pub v_ref: f64,
    /// tangent-cut count for the quadratic loss term
    pub pwl_segments: usize,
    pub forbid_crossings: bool,
    /// substation-incident candidates injected regardless of range
    pub substation_links: Vec<(usize, usize)>,
    /// weight turbine positions by rated power when siting substations
    pub capacity_weighted_siting: bool,
    pub solver: SolverParams,
}

impl Default for PlanningConfig {
    fn default() -> Self {
        PlanningConfig {
            max_range_km: 2.0,
            cable_types: vec![CableType::default()],
            v_lo: 0.95,
            v_hi: 1.05,
            v_ref: 1.0,
            pwl_segments: 16,
            forbid_crossings: true,
            substation_links: Vec::new(),
            capacity_weighted_siting: false,
            solver: SolverParams::default(),
        }
    }
}

impl PlanningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_range_km > 0.0) {
            return Err(Error::invalid(format!(
                "max_range_km must be positive, got {}",
                self.max_range_km
            )));
        }
        if !(0.0 < self.v_lo && self.v_lo < self.v_ref && self.v_ref <= self.v_hi) {
            return Err(Error::invalid(format!(
                "voltage bounds must satisfy 0 < v_lo < v_ref <= v_hi, got {} / {} / {}",
                self.v_lo, self.v_ref, self.v_hi
            )));
        }
        if self.pwl_segments < 1 {
            return Err(Error::invalid("pwl_segments must be at least 1".to_string()));
        }
        if self.cable_types.is_empty() {
            return Err(Error::invalid("at least one cable type is required".to_string()));
        }
        for (k, t) in self.cable_types.iter().enumerate() {
            if !(t.cost_per_km > 0.0) || !(t.resistance_ohm_per_km > 0.0) || !(t.capacity_mw > 0.0)
            {
                return Err(Error::invalid(format!(
                    "cable type {k} must have positive cost, resistance and capacity"
                )));
            }
        }
        Ok(())
    }
}
