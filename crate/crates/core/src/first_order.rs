//! Infinitesimal rigidity of packings with sign-constrained radii.
//!
//! A packing is infinitesimally rigid iff the radius-fixed system only admits
//! rigid motions and some equilibrium stress has radial force sums that are
//! positive on `V-`, negative on `V+` and zero on `V0`. The stress is found
//! by a linear program; when it does not exist the dual program produces a
//! proper nontrivial flex, and both are re-verified by direct evaluation.
//! Infinitesimal rigidity implies rigidity, so a `Rigid` verdict certifies
//! the packing as rigid.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Edge, PlanarEmbeddedGraph};
use crate::linalg::{self, dot, DenseMatrix};
use crate::lp::{self, Bound, LinearProgram, LpStatus};
use crate::packing::{AnalysisTolerances, ConstraintPartition, Packing, Tag};
use crate::rigidity::{
    self, column, extended_unchecked, flex_space_report_unchecked, is_proper,
    rigidity_matrix_unchecked, trivial_flex_basis, Coord, FlexSpaceReport, FlexVector,
};

/// Per-edge stress values in canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct Stress {
    pub edges: Vec<Edge>,
    pub values: Vec<f64>,
}

impl Stress {
    pub fn zero(graph: &PlanarEmbeddedGraph) -> Self {
        Stress { edges: graph.edges().to_vec(), values: vec![0.0; graph.edge_count()] }
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.iter().position(|&e| e == key).map(|k| self.values[k])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn negated(&self) -> Self {
        Stress { edges: self.edges.clone(), values: self.values.iter().map(|v| -v).collect() }
    }

    /// Net force `sum_j w_ij (p_i - p_j)` at every vertex.
    pub fn net_forces(&self, packing: &Packing) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; packing.len()];
        for (&(i, j), &w) in self.edges.iter().zip(&self.values) {
            let (pi, pj) = (packing.center(i), packing.center(j));
            for c in 0..2 {
                out[i - 1][c] += w * (pi[c] - pj[c]);
                out[j - 1][c] += w * (pj[c] - pi[c]);
            }
        }
        out
    }

    /// Radial force sums `w_i = sum_j w_ij (r_i + r_j)`.
    pub fn radial_sums(&self, packing: &Packing) -> Vec<f64> {
        let mut out = vec![0.0; packing.len()];
        for (&(i, j), &w) in self.edges.iter().zip(&self.values) {
            let s = w * (packing.radius(i) + packing.radius(j));
            out[i - 1] += s;
            out[j - 1] += s;
        }
        out
    }

    /// Largest net force, relative to `max |w| * mean radius`. Zero for the
    /// zero stress.
    pub fn equilibrium_residual(&self, packing: &Packing) -> f64 {
        let scale = self.max_abs() * packing.mean_radius();
        if scale == 0.0 {
            return 0.0;
        }
        self.net_forces(packing)
            .iter()
            .map(|f| f[0].hypot(f[1]))
            .fold(0.0, f64::max)
            / scale
    }

    /// `w^T R(p) p'` restricted to edge rows; zero for every flex when the
    /// stress is in equilibrium with vanishing radial sums on moving radii.
    pub fn pair_with_flex(&self, graph: &PlanarEmbeddedGraph, packing: &Packing, flex: &FlexVector) -> f64 {
        let r = rigidity_matrix_unchecked(graph, packing);
        dot(&self.values, &r.matrix.mul_vec(&flex.0))
    }
}

/// Smallest signed radial sum over the constrained vertices of `partition`,
/// oriented so that a positive value satisfies the rigidifying conditions.
/// `None` when `V+` and `V-` are both empty.
pub fn radial_margin(stress: &Stress, packing: &Packing, partition: &ConstraintPartition) -> Option<f64> {
    let sums = stress.radial_sums(packing);
    let mut margin: Option<f64> = None;
    for v in 1..=partition.len() {
        let signed = match partition.tag(v) {
            Tag::Decrease => sums[v - 1],
            Tag::Increase => -sums[v - 1],
            _ => continue,
        };
        margin = Some(margin.map_or(signed, |m| m.min(signed)));
    }
    margin
}

/// Packing rescaled to unit mean radius; the scale factor that was divided out.
pub(crate) fn normalized(packing: &Packing) -> (Packing, f64) {
    let s = packing.mean_radius();
    (packing.scaled(1.0 / s), s)
}

pub(crate) fn check_inputs(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<()> {
    tol.validate()?;
    partition.check_len(graph.vertex_count())?;
    let violations = crate::packing::validate_packing(graph, packing, tol)?;
    if let Some(v) = violations.first() {
        return Err(Error::InvalidPacking(v.to_string()));
    }
    Ok(())
}

/// Required sign of the radial force sum at a vertex in a stress program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RadialRule {
    /// No condition.
    Any,
    Zero,
    /// `w_i >= t` (`margin` true) or `w_i >= 0`.
    Positive { margin: bool },
    /// `w_i <= -t` or `w_i <= 0`.
    Negative { margin: bool },
}

/// Builds the stress program over `(w_1..w_m, t)` with `|w| <= 1`,
/// equilibrium at every vertex and the given radial rules. `t` only appears
/// when some rule asks for a margin; it is then bounded above by 1.
pub(crate) fn stress_program(
    graph: &PlanarEmbeddedGraph,
    npacking: &Packing,
    rules: &[RadialRule],
    edge_objective: Option<&[f64]>,
) -> LinearProgram {
    let m = graph.edge_count();
    let n = graph.vertex_count();
    let with_t = rules
        .iter()
        .any(|r| matches!(r, RadialRule::Positive { margin: true } | RadialRule::Negative { margin: true }));
    let nv = m + usize::from(with_t);
    let r = rigidity_matrix_unchecked(graph, npacking).matrix;
    let mut lp = LinearProgram::new(nv);
    for k in 0..m {
        lp.set_bound(k, Bound::between(-1.0, 1.0));
    }
    let mut objective = vec![0.0; nv];
    if with_t {
        lp.set_bound(m, Bound { lower: None, upper: Some(1.0) });
        objective[m] = 1.0;
    }
    if let Some(c) = edge_objective {
        objective[..m].copy_from_slice(c);
    }
    lp.maximize(objective);
    for v in 1..=n {
        for c in [Coord::X, Coord::Y] {
            let col = column(v, c);
            let mut row: Vec<f64> = (0..m).map(|k| r.get(k, col)).collect();
            row.resize(nv, 0.0);
            if row.iter().any(|&a| a != 0.0) {
                lp.add_eq(row, 0.0);
            }
        }
        // radial sum = -(column r_v) . w
        let col = column(v, Coord::R);
        let mut radial: Vec<f64> = (0..m).map(|k| -r.get(k, col)).collect();
        radial.resize(nv, 0.0);
        match rules[v - 1] {
            RadialRule::Any => {}
            RadialRule::Zero => {
                lp.add_eq(radial, 0.0);
            }
            RadialRule::Positive { margin } => {
                // -w_v + t <= 0
                let mut row: Vec<f64> = radial.iter().map(|a| -a).collect();
                if margin {
                    row[m] = 1.0;
                }
                lp.add_le(row, 0.0);
            }
            RadialRule::Negative { margin } => {
                let mut row = radial;
                if margin {
                    row[m] = 1.0;
                }
                lp.add_le(row, 0.0);
            }
        }
    }
    lp
}

/// Outcome of the strict-sign stress search.
#[derive(Debug, Clone, PartialEq)]
pub enum StressSearch {
    Found { stress: Stress, margin: f64 },
    Absent { margin: f64 },
    /// The optimal margin lies in `[tol_lp / 10, tol_lp]`.
    Indeterminate { margin: f64 },
}

impl StressSearch {
    pub fn stress(&self) -> Option<&Stress> {
        match self {
            StressSearch::Found { stress, .. } => Some(stress),
            _ => None,
        }
    }

    pub fn margin(&self) -> f64 {
        match self {
            StressSearch::Found { margin, .. }
            | StressSearch::Absent { margin }
            | StressSearch::Indeterminate { margin } => *margin,
        }
    }
}

/// Maximizes the radial-sum margin over equilibrium stresses with
/// `|w| <= 1`, on the packing rescaled to unit mean radius.
pub fn stress_search(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<StressSearch> {
    check_inputs(graph, packing, partition, tol)?;
    stress_search_unchecked(graph, packing, partition, tol)
}

fn stress_search_unchecked(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<StressSearch> {
    let m = graph.edge_count();
    let signed = partition
        .tags()
        .iter()
        .any(|t| matches!(t, Tag::Increase | Tag::Decrease));
    if !signed {
        // the sign conditions are vacuous and the zero stress meets them
        return Ok(StressSearch::Found { stress: Stress::zero(graph), margin: f64::INFINITY });
    }
    let (np, _) = normalized(packing);
    let rules: Vec<RadialRule> = partition
        .tags()
        .iter()
        .map(|t| match t {
            Tag::Decrease => RadialRule::Positive { margin: true },
            Tag::Increase => RadialRule::Negative { margin: true },
            Tag::Fixed => RadialRule::Any,
            Tag::Free => RadialRule::Zero,
        })
        .collect();
    let program = stress_program(graph, &np, &rules, None);
    let out = lp::solve(&program, tol.lp)?;
    if out.status != LpStatus::Optimal {
        return Err(Error::LpBreakdown(format!("stress program ended {:?}", out.status)));
    }
    let x = out.point.expect("optimal point");
    let margin = x[m];
    if margin < tol.lp / 10.0 {
        return Ok(StressSearch::Absent { margin });
    }
    if margin <= tol.lp {
        return Ok(StressSearch::Indeterminate { margin });
    }
    let stress = Stress { edges: graph.edges().to_vec(), values: x[..m].to_vec() };
    verify_rigidifying(&stress, &np, partition, tol)?;
    Ok(StressSearch::Found { stress, margin })
}

fn verify_rigidifying(
    stress: &Stress,
    npacking: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<()> {
    let eq = stress.equilibrium_residual(npacking);
    if eq > tol.lp {
        return Err(Error::LpBreakdown(format!("stress equilibrium residual {eq:e}")));
    }
    let sums = stress.radial_sums(npacking);
    for v in partition.members(Tag::Free) {
        if sums[v - 1].abs() > tol.lp {
            return Err(Error::LpBreakdown(format!("radial sum {:e} at free vertex {v}", sums[v - 1])));
        }
    }
    match radial_margin(stress, npacking, partition) {
        Some(mg) if mg <= tol.lp / 10.0 => {
            Err(Error::LpBreakdown(format!("re-evaluated radial margin {mg:e} too small")))
        }
        _ => Ok(()),
    }
}

/// Whether `R_e(p)` has only the rigid motions in its kernel.
pub fn fixed_radius_condition(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<bool> {
    check_inputs(graph, packing, partition, tol)?;
    let re = extended_unchecked(graph, packing, partition)?;
    let rank = linalg::numerical_rank(&re.matrix, tol.rank)?;
    Ok(3 * graph.vertex_count() - rank == trivial_flex_basis(packing).len())
}

/// A stress whose radial sums are strictly positive on `V-`, strictly
/// negative on `V+` and zero on `V0`, if the margin clears `tol.lp`.
pub fn find_rigidifying_stress(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<Option<Stress>> {
    Ok(stress_search(graph, packing, partition, tol)?.stress().cloned())
}

/// A unit-norm proper flex orthogonal to the rigid motions, if one exists.
pub fn find_proper_nontrivial_flex(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<Option<FlexVector>> {
    check_inputs(graph, packing, partition, tol)?;
    proper_flex_unchecked(graph, packing, partition, tol)
}

pub(crate) fn proper_flex_unchecked(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<Option<FlexVector>> {
    if let Some(f) = sign_changing_flex(graph, packing, partition, tol)? {
        return Ok(Some(f));
    }
    Ok(kernel_flexes(graph, packing, partition, tol)?.into_iter().next())
}

/// Orthonormal nontrivial flexes that keep every constrained radius fixed.
pub fn kernel_flexes(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<Vec<FlexVector>> {
    let (np, _) = normalized(packing);
    let re = extended_unchecked(graph, &np, partition)?;
    let kernel = linalg::kernel_basis(&re.matrix, tol.rank)?;
    let trivial: Vec<Vec<f64>> = trivial_flex_basis(&np).into_iter().map(|f| f.0).collect();
    let mut all = linalg::orthonormalize(&trivial, 1e-12);
    let t = all.len();
    all.extend(kernel);
    let ortho = linalg::orthonormalize(&all, tol.strict);
    Ok(ortho.into_iter().skip(t).map(FlexVector).collect())
}

/// Primal program: `R p' = 0`, `p'` orthogonal to rigid motions,
/// `|p'| <= 1` componentwise, radius signs from the partition, maximizing
/// the total admissible radius change.
fn sign_changing_flex(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<Option<FlexVector>> {
    let n = graph.vertex_count();
    let mut objective = vec![0.0; 3 * n];
    for v in 1..=n {
        match partition.tag(v) {
            Tag::Increase => objective[column(v, Coord::R)] = 1.0,
            Tag::Decrease => objective[column(v, Coord::R)] = -1.0,
            _ => {}
        }
    }
    if objective.iter().all(|&c| c == 0.0) {
        return Ok(None);
    }
    let (np, _) = normalized(packing);
    let program = flex_program(graph, &np, partition, objective);
    let out = lp::solve(&program, tol.lp)?;
    if out.status != LpStatus::Optimal {
        return Err(Error::LpBreakdown(format!("flex program ended {:?}", out.status)));
    }
    if out.objective.unwrap_or(0.0) <= tol.lp {
        return Ok(None);
    }
    let flex = rigidity::remove_trivial(&np, &FlexVector(out.point.expect("optimal point")));
    verify_flex(graph, &np, partition, &flex, tol).map(Some)
}

pub(crate) fn flex_program(
    graph: &PlanarEmbeddedGraph,
    npacking: &Packing,
    partition: &ConstraintPartition,
    objective: Vec<f64>,
) -> LinearProgram {
    let n = graph.vertex_count();
    let r = rigidity_matrix_unchecked(graph, npacking).matrix;
    let mut program = LinearProgram::new(3 * n);
    program.maximize(objective);
    for k in 0..r.rows() {
        program.add_eq(r.row(k).to_vec(), 0.0);
    }
    for t in trivial_flex_basis(npacking) {
        program.add_eq(t.0, 0.0);
    }
    for v in 1..=n {
        program.set_bound(column(v, Coord::X), Bound::between(-1.0, 1.0));
        program.set_bound(column(v, Coord::Y), Bound::between(-1.0, 1.0));
        let rb = match partition.tag(v) {
            Tag::Increase => Bound::between(0.0, 1.0),
            Tag::Decrease => Bound::between(-1.0, 0.0),
            Tag::Fixed => Bound::between(0.0, 0.0),
            Tag::Free => Bound::between(-1.0, 1.0),
        };
        program.set_bound(column(v, Coord::R), rb);
    }
    program
}

/// Normalizes a candidate flex and checks it against the rigidity matrix,
/// the sign constraints and the rigid motions.
pub(crate) fn verify_flex(
    graph: &PlanarEmbeddedGraph,
    npacking: &Packing,
    partition: &ConstraintPartition,
    flex: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<FlexVector> {
    let size = flex.norm();
    if !(size > tol.strict) {
        return Err(Error::LpBreakdown("flex candidate is a rigid motion".into()));
    }
    let unit = flex.normalized();
    let res = rigidity::flex_residual(graph, npacking, &unit);
    if res > tol.lp.max(10.0 * tol.rank) {
        return Err(Error::LpBreakdown(format!("flex candidate violates tangency ({res:e})")));
    }
    if !is_proper(partition, &unit, tol.lp) {
        return Err(Error::LpBreakdown("flex candidate violates the radius signs".into()));
    }
    Ok(unit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigidityStatus {
    Rigid,
    NotRigid,
    /// The stress margin fell in the ambiguous band, or the primal and dual
    /// searches disagreed.
    Indeterminate,
}

impl fmt::Display for RigidityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RigidityStatus::Rigid => "rigid",
            RigidityStatus::NotRigid => "not-rigid",
            RigidityStatus::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityVerdict {
    pub status: RigidityStatus,
    pub fixed_radius_ok: bool,
    pub stress: Option<Stress>,
    /// Optimal radial margin of the stress program (unit mean radius).
    pub stress_margin: f64,
    /// A proper nontrivial flex of unit norm, for the packing scaled to unit
    /// mean radius (directions are scale invariant).
    pub counterexample_flex: Option<FlexVector>,
    pub diagnostics: FlexSpaceReport,
    /// Primal flex search and dual stress search reached the same answer.
    pub primal_dual_agree: bool,
}

impl RigidityVerdict {
    pub fn rigid(&self) -> bool {
        self.status == RigidityStatus::Rigid
    }
}

pub fn is_infinitesimally_rigid(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<RigidityVerdict> {
    check_inputs(graph, packing, partition, tol)?;
    let diagnostics = flex_space_report_unchecked(graph, packing, partition, tol)?;
    let fixed_radius_ok = diagnostics.dim_kernel_re == diagnostics.trivial_dim;
    let search = stress_search_unchecked(graph, packing, partition, tol)?;
    let stress_margin = search.margin();

    let flex = if fixed_radius_ok {
        sign_changing_flex(graph, packing, partition, tol)?
    } else {
        kernel_flexes(graph, packing, partition, tol)?.into_iter().next()
    };
    let (np, _) = normalized(packing);
    let flex = match flex {
        Some(f) => Some(verify_flex(graph, &np, partition, &f, tol)?),
        None => None,
    };
    let stress = search.stress().cloned();
    let dual_rigid = fixed_radius_ok && stress.is_some();
    let primal_rigid = flex.is_none();
    let status = match (&search, fixed_radius_ok) {
        (StressSearch::Indeterminate { .. }, true) => RigidityStatus::Indeterminate,
        _ if dual_rigid != primal_rigid => RigidityStatus::Indeterminate,
        _ if dual_rigid => RigidityStatus::Rigid,
        _ => RigidityStatus::NotRigid,
    };
    Ok(RigidityVerdict {
        status,
        fixed_radius_ok,
        stress,
        stress_margin,
        counterexample_flex: flex,
        diagnostics,
        primal_dual_agree: dual_rigid == primal_rigid,
    })
}

/// First-order behavior of one edge under a relaxed flex.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMotion {
    pub edge: Edge,
    pub stress: f64,
    /// `(p_i - p_j).(p'_i - p'_j) - (r_i + r_j)(r'_i + r'_j)`, positive when
    /// the disks separate.
    pub gap_rate: f64,
    /// Edge carries stress but the flex changes its gap.
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangencyReport {
    pub edges: Vec<EdgeMotion>,
    /// Constrained vertices with nonzero radial sum whose radius moves.
    pub radius_violations: Vec<usize>,
}

impl TangencyReport {
    pub fn consistent(&self) -> bool {
        self.radius_violations.is_empty() && self.edges.iter().all(|e| !e.violated)
    }
}

/// Checks a relaxed flex (edges may only separate, radii follow the signs)
/// against a rigidifying stress: every stressed edge must stay tangent to
/// first order and every radius with nonzero radial sum must stay fixed.
pub fn corollary_tangency_report(
    stress: &Stress,
    flex: &FlexVector,
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<TangencyReport> {
    check_inputs(graph, packing, partition, tol)?;
    if flex.len() != graph.vertex_count() || stress.edges != graph.edges() {
        return Err(Error::SizeMismatch("stress or flex does not match the graph".into()));
    }
    let (np, _) = normalized(packing);
    if !stress.is_zero() {
        let eq = stress.equilibrium_residual(&np);
        let sums = stress.radial_sums(&np);
        let bad_sign = (1..=partition.len()).any(|v| {
            let s = sums[v - 1];
            match partition.tag(v) {
                Tag::Decrease => s < -tol.lp,
                Tag::Increase => s > tol.lp,
                Tag::Free => s.abs() > tol.lp,
                Tag::Fixed => false,
            }
        });
        if eq > tol.lp || bad_sign {
            return Err(Error::Precondition(
                "stress is not an equilibrium stress with the required radial signs".into(),
            ));
        }
    }
    let unit = flex.normalized();
    let scale = stress.max_abs().max(f64::MIN_POSITIVE);
    let r = rigidity_matrix_unchecked(graph, &np).matrix;
    let rates = r.mul_vec(&unit.0);
    let edges = stress
        .edges
        .iter()
        .zip(&stress.values)
        .zip(rates)
        .map(|((&edge, &w), gap_rate)| EdgeMotion {
            edge,
            stress: w,
            gap_rate,
            violated: w.abs() > tol.lp * scale && gap_rate.abs() > tol.strict,
        })
        .collect();
    let sums = stress.radial_sums(&np);
    let radius_violations = (1..=partition.len())
        .filter(|&v| {
            partition.tag(v) != Tag::Free
                && sums[v - 1].abs() > tol.lp * scale
                && unit.r(v).abs() > tol.strict
        })
        .collect();
    Ok(TangencyReport { edges, radius_violations })
}

/// Searches for a relaxed flex that opens `edge`: edges with negative
/// stress may only separate, edges with positive stress may only overlap,
/// unstressed edges are unconstrained, radii obey the signs and the flex is
/// orthogonal to rigid motions. Returns the flex when the first-order
/// separation of `edge` can exceed `tol.lp`.
pub fn find_separating_flex(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    stress: &Stress,
    edge: Edge,
    tol: &AnalysisTolerances,
) -> Result<Option<FlexVector>> {
    check_inputs(graph, packing, partition, tol)?;
    if stress.edges != graph.edges() {
        return Err(Error::SizeMismatch("stress does not match the graph".into()));
    }
    let target = graph
        .edge_index(edge.0, edge.1)
        .ok_or_else(|| Error::InvalidGraph(format!("({},{}) is not an edge", edge.0, edge.1)))?;
    let (np, _) = normalized(packing);
    let n = graph.vertex_count();
    let r = rigidity_matrix_unchecked(graph, &np).matrix;
    let template = flex_program(graph, &np, partition, r.row(target).to_vec());
    let mut program = LinearProgram::new(3 * n);
    program.maximize(template.objective().to_vec());
    for c in &template.equalities()[r.rows()..] {
        program.add_eq(c.coefficients.clone(), c.rhs);
    }
    for (j, &b) in template.bounds().iter().enumerate() {
        program.set_bound(j, b);
    }
    let scale = stress.max_abs();
    for k in 0..r.rows() {
        let w = stress.values[k];
        if w < -tol.lp * scale {
            program.add_ge(r.row(k).to_vec(), 0.0);
        } else if w > tol.lp * scale {
            program.add_le(r.row(k).to_vec(), 0.0);
        }
    }
    let out = lp::solve(&program, tol.lp)?;
    if out.status != LpStatus::Optimal {
        return Err(Error::LpBreakdown(format!("separation program ended {:?}", out.status)));
    }
    if out.objective.unwrap_or(0.0) <= tol.lp {
        return Ok(None);
    }
    Ok(Some(FlexVector(out.point.expect("optimal point"))))
}

/// Stresses spanning the left kernel of `R_e`, restricted to the edge rows.
pub fn cokernel_stresses(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<Vec<Stress>> {
    check_inputs(graph, packing, partition, tol)?;
    let re = extended_unchecked(graph, packing, partition)?;
    let m = graph.edge_count();
    Ok(linalg::cokernel_basis(&re.matrix, tol.rank)?
        .into_iter()
        .map(|y| Stress { edges: graph.edges().to_vec(), values: y[..m].to_vec() })
        .collect())
}

/// Dense matrix view used by tests that need raw access.
#[doc(hidden)]
pub fn normalized_rigidity(graph: &PlanarEmbeddedGraph, packing: &Packing) -> DenseMatrix {
    rigidity_matrix_unchecked(graph, &normalized(packing).0).matrix
}
